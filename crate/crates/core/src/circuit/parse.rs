use std::collections::HashMap;

use crate::error::{Error, Result};

use super::{Circuit, Gate};

#[derive(Debug)]
enum Stmt {
    In(String),
    Op {
        id: String,
        and: bool,
        a: String,
        b: String,
    },
    Out(String),
}

fn valid_ident(s: &str) -> bool {
    !s.is_empty()
        && s.bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_')
}

fn parse_stmt(words: &[&str], line: usize) -> Result<Stmt> {
    let err = |message: String| Error::Parse { line, message };
    let ident = |s: &str| {
        if valid_ident(s) {
            Ok(s.to_string())
        } else {
            Err(err(format!("invalid identifier '{s}'")))
        }
    };
    match words {
        ["in", id] => Ok(Stmt::In(ident(id)?)),
        ["out", id] => Ok(Stmt::Out(ident(id)?)),
        [id, "=", kind, a, b] => {
            let and = match *kind {
                "AND" => true,
                "XOR" => false,
                other => return Err(err(format!("unknown gate kind '{other}'"))),
            };
            Ok(Stmt::Op {
                id: ident(id)?,
                and,
                a: ident(a)?,
                b: ident(b)?,
            })
        }
        [_, "=", kind, ..] if !matches!(*kind, "AND" | "XOR") => Err(err(format!("unknown gate kind '{kind}'"))),
        _ => Err(err(format!("cannot parse statement '{}'", words.join(" ")))),
    }
}

/// Parses a netlist. Statements may appear in any order; the result is
/// topologically sorted with ties broken by source order.
pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut stmts = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("");
        for part in body.split(';') {
            let words: Vec<&str> = part.split_whitespace().collect();
            if !words.is_empty() {
                stmts.push((line, parse_stmt(&words, line)?));
            }
        }
    }

    // Definitions, in source order.
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut defs: Vec<(usize, &Stmt)> = Vec::new();
    for (line, s) in &stmts {
        let id = match s {
            Stmt::In(id) | Stmt::Op { id, .. } => id,
            Stmt::Out(_) => continue,
        };
        if index.insert(id, defs.len()).is_some() {
            return Err(Error::Parse {
                line: *line,
                message: format!("'{id}' is defined twice"),
            });
        }
        defs.push((*line, s));
    }
    let lookup = |name: &str, line: usize| {
        index.get(name).copied().ok_or_else(|| Error::Parse {
            line,
            message: format!("undefined identifier '{name}'"),
        })
    };
    let mut deps: Vec<Vec<usize>> = Vec::with_capacity(defs.len());
    for (line, s) in &defs {
        deps.push(match s {
            Stmt::Op { a, b, .. } => vec![lookup(a, *line)?, lookup(b, *line)?],
            _ => Vec::new(),
        });
    }

    // Depth-first topological sort; a grey node reached again is a cycle.
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        White,
        Grey,
        Black,
    }
    let mut mark = vec![Mark::White; defs.len()];
    let mut order = Vec::with_capacity(defs.len());
    for root in 0..defs.len() {
        if mark[root] != Mark::White {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        mark[root] = Mark::Grey;
        while let Some(top) = stack.last_mut() {
            let node = top.0;
            if let Some(&d) = deps[node].get(top.1) {
                top.1 += 1;
                match mark[d] {
                    Mark::White => {
                        mark[d] = Mark::Grey;
                        stack.push((d, 0));
                    }
                    Mark::Grey => {
                        return Err(Error::Parse {
                            line: defs[node].0,
                            message: format!("cycle through '{}'", def_name(defs[d].1)),
                        })
                    }
                    Mark::Black => {}
                }
            } else {
                mark[node] = Mark::Black;
                order.push(node);
                stack.pop();
            }
        }
    }

    let mut pos = vec![0usize; defs.len()];
    for (p, &d) in order.iter().enumerate() {
        pos[d] = p;
    }
    let mut names = Vec::with_capacity(order.len());
    let mut gates = Vec::with_capacity(order.len());
    for &d in &order {
        let (_, s) = defs[d];
        names.push(def_name(s).to_string());
        gates.push(match s {
            Stmt::In(_) => Gate::Input,
            Stmt::Op { and, .. } => {
                let (a, b) = (pos[deps[d][0]], pos[deps[d][1]]);
                if *and {
                    Gate::And(a, b)
                } else {
                    Gate::Xor(a, b)
                }
            }
            Stmt::Out(_) => unreachable!("outputs are not definitions"),
        });
    }
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    for (line, s) in &stmts {
        match s {
            Stmt::In(id) => inputs.push(pos[lookup(id, *line)?]),
            Stmt::Out(id) => outputs.push(pos[lookup(id, *line)?]),
            Stmt::Op { .. } => {}
        }
    }
    if outputs.is_empty() {
        let last = stmts.last().map_or(1, |(l, _)| *l);
        return Err(Error::Parse {
            line: last,
            message: "circuit has no outputs".into(),
        });
    }
    Circuit::new(names, gates, inputs, outputs)
}

fn def_name(s: &Stmt) -> &str {
    match s {
        Stmt::In(id) | Stmt::Op { id, .. } | Stmt::Out(id) => id,
    }
}
