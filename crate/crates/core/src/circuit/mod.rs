//! Boolean circuits over GF(2): netlist parsing, plaintext and homomorphic evaluation.

mod parse;

use std::fmt;

use num_bigint::BigInt;
use rand::Rng;
use rayon::prelude::*;

use crate::arith::Rational;
use crate::error::{Error, Result};
use crate::keys::{EvalKey, Params, RETRY_CAP};
use crate::she::{eval_add, eval_mult_with, Ciphertext, Plaintext};

pub use parse::parse_circuit;

/// A node; operands index earlier nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    Input,
    Xor(usize, usize),
    And(usize, usize),
}

/// A topologically ordered circuit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    names: Vec<String>,
    gates: Vec<Gate>,
    inputs: Vec<usize>,
    outputs: Vec<usize>,
    depth: u32,
}

impl Circuit {
    /// `inputs` lists the `Input` nodes in argument order.
    pub fn new(names: Vec<String>, gates: Vec<Gate>, inputs: Vec<usize>, outputs: Vec<usize>) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if names.len() != gates.len() {
            return bad("one name per gate required".into());
        }
        for (i, g) in gates.iter().enumerate() {
            if let Gate::Xor(a, b) | Gate::And(a, b) = *g {
                if a >= i || b >= i {
                    return bad(format!("gate '{}' is not in topological order", names[i]));
                }
            }
        }
        let n_inputs = gates.iter().filter(|g| **g == Gate::Input).count();
        let mut seen = vec![false; gates.len()];
        for &i in &inputs {
            if gates.get(i) != Some(&Gate::Input) || std::mem::replace(&mut seen[i], true) {
                return bad(format!("input list entry {i} is not a distinct input node"));
            }
        }
        if inputs.len() != n_inputs {
            return bad("every input node must appear in the input list".into());
        }
        if outputs.is_empty() || outputs.iter().any(|&o| o >= gates.len()) {
            return bad("outputs must be nonempty and refer to gates".into());
        }
        let mut c = Circuit {
            names,
            gates,
            inputs,
            outputs,
            depth: 0,
        };
        let depths = c.node_depths();
        c.depth = c.outputs.iter().map(|&o| depths[o]).max().unwrap_or(0);
        Ok(c)
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn inputs(&self) -> &[usize] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    /// Largest number of AND gates on a path from an input to an output.
    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn and_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::And(..))).count()
    }

    /// Multiplicative depth of every node.
    pub fn node_depths(&self) -> Vec<u32> {
        self.propagate(|_| 0, |a, b| a.max(b), |a, b| a.max(b) + 1)
    }

    /// Forward pass over the gates with caller-supplied combinators.
    fn propagate<T: Clone>(
        &self,
        input: impl Fn(usize) -> T,
        xor: impl Fn(T, T) -> T,
        and: impl Fn(T, T) -> T,
    ) -> Vec<T> {
        let mut arg = vec![0usize; self.gates.len()];
        for (k, &i) in self.inputs.iter().enumerate() {
            arg[i] = k;
        }
        let mut v: Vec<T> = Vec::with_capacity(self.gates.len());
        for (i, g) in self.gates.iter().enumerate() {
            let x = match *g {
                Gate::Input => input(arg[i]),
                Gate::Xor(a, b) => xor(v[a].clone(), v[b].clone()),
                Gate::And(a, b) => and(v[a].clone(), v[b].clone()),
            };
            v.push(x);
        }
        v
    }

    /// Nodes grouped so every operand lies in an earlier group.
    fn layers(&self) -> Vec<Vec<usize>> {
        let lvl = self.propagate(|_| 0usize, |a, b| a.max(b) + 1, |a, b| a.max(b) + 1);
        let mut out = vec![Vec::new(); lvl.iter().max().map_or(0, |m| m + 1)];
        for (i, &l) in lvl.iter().enumerate() {
            out[l].push(i);
        }
        out
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &i in &self.inputs {
            writeln!(f, "in {}", self.names[i])?;
        }
        for (i, g) in self.gates.iter().enumerate() {
            match *g {
                Gate::Input => {}
                Gate::Xor(a, b) => writeln!(f, "{} = XOR {} {}", self.names[i], self.names[a], self.names[b])?,
                Gate::And(a, b) => writeln!(f, "{} = AND {} {}", self.names[i], self.names[a], self.names[b])?,
            }
        }
        for &o in &self.outputs {
            writeln!(f, "out {}", self.names[o])?;
        }
        Ok(())
    }
}

fn check_arity(c: &Circuit, found: usize) -> Result<()> {
    if found != c.inputs.len() {
        return Err(Error::Arity {
            expected: c.inputs.len(),
            found,
        });
    }
    Ok(())
}

/// Reference evaluator: slotwise XOR and AND.
pub fn eval_plain(c: &Circuit, inputs: &[Plaintext]) -> Result<Vec<Plaintext>> {
    check_arity(c, inputs.len())?;
    if let Some(first) = inputs.first() {
        if let Some(bad) = inputs.iter().find(|m| m.len() != first.len()) {
            return Err(Error::DimensionMismatch {
                context: "plaintext length",
                expected: first.len(),
                found: bad.len(),
            });
        }
    }
    let v = c.propagate(|k| inputs[k].clone(), |a, b| a.xor(&b), |a, b| a.and(&b));
    Ok(c.outputs.iter().map(|&o| v[o].clone()).collect())
}

pub fn eval_homomorphic(evk: &EvalKey, c: &Circuit, cts: &[Ciphertext]) -> Result<Vec<Ciphertext>> {
    eval_homomorphic_with(evk, c, cts, false)
}

/// Homomorphic evaluation. The level budget is checked for every node before
/// any gate runs. With `parallel`, independent gates run concurrently; the
/// result does not depend on scheduling.
pub fn eval_homomorphic_with(
    evk: &EvalKey,
    c: &Circuit,
    cts: &[Ciphertext],
    parallel: bool,
) -> Result<Vec<Ciphertext>> {
    check_arity(c, cts.len())?;
    let budget = evk.params().depth;
    let levels = c.propagate(|k| cts[k].level(), |a, b| a.max(b), |a, b| a.max(b) + 1);
    if let Some(&needed) = levels.iter().max() {
        if needed > budget {
            return Err(Error::DepthExceeded {
                needed: needed as usize,
                budget: budget as usize,
            });
        }
    }
    let mut arg = vec![0usize; c.gates.len()];
    for (k, &i) in c.inputs.iter().enumerate() {
        arg[i] = k;
    }
    let mut vals: Vec<Option<Ciphertext>> = vec![None; c.gates.len()];
    for layer in c.layers() {
        let compute = |&i: &usize| -> Result<Ciphertext> {
            let get = |j: usize| vals[j].as_ref().expect("operand evaluated in an earlier layer");
            match c.gates[i] {
                Gate::Input => Ok(cts[arg[i]].clone()),
                Gate::Xor(a, b) => eval_add(get(a), get(b)),
                Gate::And(a, b) => eval_mult_with(evk, get(a), get(b), false),
            }
        };
        let done: Vec<Ciphertext> = if parallel {
            layer.par_iter().map(compute).collect::<Result<_>>()?
        } else {
            layer.iter().map(compute).collect::<Result<_>>()?
        };
        for (i, ct) in layer.into_iter().zip(done) {
            vals[i] = Some(ct);
        }
    }
    Ok(c.outputs
        .iter()
        .map(|&o| vals[o].clone().expect("every node evaluated"))
        .collect())
}

/// Noise hints of every node when each input carries hint `input`.
pub fn predicted_hints(c: &Circuit, params: &Params, input: &Rational) -> Vec<Rational> {
    c.propagate(
        |_| input.clone(),
        |a, b| Params::add_noise_bound(&a, &b),
        |a, b| params.mult_noise_bound(&a, &b),
    )
}

/// A random circuit with `gates` XOR/AND gates and depth at most `max_depth`.
pub fn random_circuit<R: Rng + ?Sized>(inputs: usize, gates: usize, max_depth: u32, rng: &mut R) -> Circuit {
    assert!(inputs >= 1, "at least one input");
    let mut names: Vec<String> = (0..inputs).map(|i| format!("x{i}")).collect();
    let mut kinds = vec![Gate::Input; inputs];
    let mut depth = vec![0u32; inputs];
    for g in 0..gates {
        let n = kinds.len();
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        let d = depth[a].max(depth[b]);
        if rng.random_bool(0.5) && d < max_depth {
            kinds.push(Gate::And(a, b));
            depth.push(d + 1);
        } else {
            kinds.push(Gate::Xor(a, b));
            depth.push(d);
        }
        names.push(format!("g{g}"));
    }
    let total = kinds.len();
    let mut outputs = vec![total - 1];
    for _ in 0..rng.random_range(0..3) {
        let o = rng.random_range(0..total);
        if !outputs.contains(&o) {
            outputs.push(o);
        }
    }
    Circuit::new(names, kinds, (0..inputs).collect(), outputs).expect("generated circuits are well formed")
}

/// [`random_circuit`] retried until every node's predicted hint, starting
/// from fresh inputs, stays below the decryption threshold.
pub fn random_circuit_within<R: Rng + ?Sized>(
    params: &Params,
    inputs: usize,
    gates: usize,
    max_depth: u32,
    rng: &mut R,
) -> Result<Circuit> {
    let fresh = Rational::from_integer(BigInt::from(params.bound));
    let margin = params.decryption_margin();
    for _ in 0..RETRY_CAP {
        let c = random_circuit(inputs, gates, max_depth.min(params.depth), rng);
        if predicted_hints(&c, params, &fresh).iter().all(|h| *h < margin) {
            return Ok(c);
        }
    }
    Err(Error::GenerationFailure {
        what: "noise-admissible random circuit",
        attempts: RETRY_CAP,
    })
}
