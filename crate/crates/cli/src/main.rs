use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mvfhe::arith::Rational;
use mvfhe::circuit::{eval_homomorphic_with, parse_circuit};
use mvfhe::keys::{build_evalkey, default_pk_slack, keygen, setup, Params, Preset, DEPTH_CONSTANT};
use mvfhe::she::{decrypt, encrypt, pk_encrypt, pk_keygen, Ciphertext, Plaintext};
use mvfhe_cli::bench::{bench_preset, is_monotone, to_csv};
use mvfhe_cli::container::{short_hex, Container, FormatError, Kind, Payload};
use num_bigint::BigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{path}: {source}")]
    Format { path: PathBuf, source: FormatError },

    #[error("{0} was produced under different parameters (fingerprint {1}, expected {2})")]
    Fingerprint(PathBuf, String, String),

    #[error(transparent)]
    Scheme(#[from] mvfhe::Error),

    #[error("{0}")]
    Usage(String),
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "mvfhe",
    version,
    about = "Leveled homomorphic encryption from multivariate polynomial evaluation"
)]
struct Cli {
    /// Seed for all randomness; omit to draw one from the operating system.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Parameter preset used when no params file is given.
    #[arg(long, global = true, value_enum, default_value_t = PresetArg::Toy)]
    preset: PresetArg,

    /// Gadget-decomposed evaluation key (on) or the plain reference key (off).
    #[arg(long, global = true, value_enum)]
    gadget: Option<Switch>,

    /// Test mode: sample no noise at all.
    #[arg(long, global = true)]
    zero_noise: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Toy,
    Small,
    Medium,
    Depth3,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Preset {
        match p {
            PresetArg::Toy => Preset::Toy,
            PresetArg::Small => Preset::Small,
            PresetArg::Medium => Preset::Medium,
            PresetArg::Depth3 => Preset::Depth3,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Subcommand)]
enum Command {
    /// Derive parameters and report the depth margin.
    Params {
        /// Overrides the preset's dimension parameter.
        #[arg(long)]
        lambda: Option<u32>,
        /// Overrides the preset's depth budget L.
        #[arg(long)]
        depth: Option<u32>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Generate a secret key.
    Keygen {
        /// Params file; the global preset flags are ignored when given.
        #[arg(long)]
        params: Option<PathBuf>,
        /// Print the generator, evaluation points and key matrices.
        #[arg(long)]
        dump_keys: bool,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Build the evaluation key for multiplication.
    Evalkey {
        #[arg(long)]
        sk: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Encrypt one or more bit strings under a secret key.
    Encrypt {
        #[arg(long)]
        sk: PathBuf,
        /// Bit string such as 01; repeat for several ciphertexts.
        #[arg(short, long = "message", required = true)]
        messages: Vec<String>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Decrypt every ciphertext in a file, one bit string per line.
    Decrypt {
        #[arg(long)]
        sk: PathBuf,
        ct: PathBuf,
    },
    /// Derive a public key from a secret key.
    PkKeygen {
        #[arg(long)]
        sk: PathBuf,
        /// Row slack; the key holds ceil((1 + eps) ell log2 q) zero encryptions.
        #[arg(long, value_parser = parse_rational)]
        eps: Option<Rational>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Encrypt under a public key.
    PkEncrypt {
        #[arg(long)]
        pk: PathBuf,
        #[arg(short, long = "message", required = true)]
        messages: Vec<String>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Evaluate a netlist on encrypted inputs.
    Eval {
        #[arg(long)]
        evk: PathBuf,
        #[arg(long)]
        circuit: PathBuf,
        /// Ciphertext files, comma separated; their contents are concatenated in order.
        #[arg(long, value_delimiter = ',', required = true)]
        inputs: Vec<PathBuf>,
        /// Evaluate independent gates concurrently.
        #[arg(long)]
        parallel: bool,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Measure decryption noise against the expected plaintexts.
    Noise {
        #[arg(long)]
        sk: PathBuf,
        #[arg(long)]
        ct: PathBuf,
        /// Expected bit string per ciphertext, in order.
        #[arg(short, long = "message", required = true)]
        messages: Vec<String>,
    },
    /// Time homomorphic AND gates across presets and print a CSV.
    Bench {
        #[arg(long, value_enum, value_delimiter = ',', default_value = "toy,small,medium")]
        presets: Vec<PresetArg>,
        /// Gates timed per preset.
        #[arg(long, default_value_t = 16)]
        gates: usize,
        /// Also write the CSV to this file.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn parse_rational(s: &str) -> std::result::Result<Rational, String> {
    let bad = || format!("'{s}' is not a rational number (use a/b or a decimal)");
    if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a.trim().parse().map_err(|_| bad())?;
        let b: BigInt = b.trim().parse().map_err(|_| bad())?;
        if b == BigInt::from(0) {
            return Err(bad());
        }
        return Ok(Rational::new(a, b));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.chars().any(|c| !c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
    Ok(Rational::new(digits, BigInt::from(10).pow(frac.len() as u32)))
}

fn read(path: &Path, kind: Kind) -> Result<Container> {
    let bytes = fs::read(path).map_err(|source| CliError::Io {
        path: path.into(),
        source,
    })?;
    let c = Container::from_bytes(&bytes).and_then(|c| c.expect(kind).map(|()| c));
    c.map_err(|source| CliError::Format {
        path: path.into(),
        source,
    })
}

fn write(path: &Path, c: &Container) -> Result<()> {
    let io = |source| CliError::Io {
        path: path.into(),
        source,
    };
    let mut opts = fs::OpenOptions::new();
    opts.write(true).create(true).truncate(true);
    #[cfg(unix)]
    if c.payload.kind() == Kind::SecretKey {
        use std::os::unix::fs::OpenOptionsExt;
        opts.mode(0o600);
    }
    let mut f = opts.open(path).map_err(io)?;
    f.write_all(&c.to_bytes()).map_err(io)
}

/// Refuses to combine artifacts made under different parameters.
fn same_params(reference: &Container, other: &Container, other_path: &Path) -> Result<()> {
    let (a, b) = (reference.fingerprint(), other.fingerprint());
    if a != b {
        return Err(CliError::Fingerprint(other_path.into(), short_hex(&b), short_hex(&a)));
    }
    Ok(())
}

fn unwrap_payload<T>(c: Container, f: impl FnOnce(Payload) -> Option<T>) -> T {
    f(c.payload).expect("kind checked on read")
}

fn plaintexts(params: &Params, messages: &[String]) -> Result<Vec<Plaintext>> {
    messages
        .iter()
        .map(|s| {
            let m: Plaintext = s.parse()?;
            if m.len() != params.slots() {
                return Err(CliError::Usage(format!(
                    "message '{s}' has {} bits; these parameters carry {}",
                    m.len(),
                    params.slots()
                )));
            }
            Ok(m)
        })
        .collect()
}

fn preset_params(cli: &Cli, lambda: Option<u32>, depth: Option<u32>) -> Result<Params> {
    let (l0, d0, mut ov) = Preset::from(cli.preset).spec();
    ov.gadget = cli.gadget.map(|s| matches!(s, Switch::On));
    ov.zero_noise = cli.zero_noise;
    Ok(setup(lambda.unwrap_or(l0), depth.unwrap_or(d0), &ov)?)
}

fn print_params(p: &Params) {
    println!("lambda = {}  L = {}", p.lambda, p.depth);
    println!("v = {}  r_g = {}  r' = {}  r = {}", p.v, p.r_g, p.r_prime, p.r);
    println!(
        "n = {}  ell = {}  N = {}  n1 = {}  t = {}",
        p.n, p.ell, p.big_n, p.n1, p.t
    );
    println!("q = {} ({} bits)", p.q.value(), p.log_q());
    println!(
        "sigma = {}  B = {}  u = {}  gadget = {}",
        p.sigma, p.bound, p.u, p.gadget
    );
    let (need, have) = p.depth_margin();
    let have = have.to_integer();
    println!(
        "depth margin: q/B = {have} (~2^{}) vs ({DEPTH_CONSTANT} n log2 q)^L = {need} (~2^{}): {}",
        have.bits(),
        need.bits(),
        if have >= need { "ok" } else { "insufficient" }
    );
}

fn run(cli: Cli) -> Result<()> {
    let mut rng = match cli.seed {
        Some(s) => ChaCha20Rng::seed_from_u64(s),
        None => ChaCha20Rng::from_os_rng(),
    };
    match &cli.command {
        Command::Params { lambda, depth, out } => {
            let p = preset_params(&cli, *lambda, *depth)?;
            print_params(&p);
            if let Some(out) = out {
                write(out, &Container::new(p, Payload::Params))?;
            }
        }
        Command::Keygen { params, dump_keys, out } => {
            let p = match params {
                Some(path) => read(path, Kind::Params)?.params,
                None => preset_params(&cli, None, None)?,
            };
            let sk = keygen(&p, &mut rng)?;
            if *dump_keys {
                println!("g = {}", sk.generator());
                for (i, z) in sk.points().iter().enumerate() {
                    println!("z{} = {z:?}", i + 1);
                }
                print!("S =\n{}R1 =\n{}R2 =\n{}", sk.s(), sk.r1(), sk.r2());
            }
            write(out, &Container::new(p, Payload::SecretKey(sk)))?;
        }
        Command::Evalkey { sk, out } => {
            let c = read(sk, Kind::SecretKey)?;
            let params = c.params.clone();
            let sk = unwrap_payload(c, |p| match p {
                Payload::SecretKey(k) => Some(k),
                _ => None,
            });
            let evk = build_evalkey(&sk, &mut rng)?;
            write(out, &Container::new(params, Payload::EvalKey(evk)))?;
        }
        Command::Encrypt { sk, messages, out } => {
            let c = read(sk, Kind::SecretKey)?;
            let params = c.params.clone();
            let sk = unwrap_payload(c, |p| match p {
                Payload::SecretKey(k) => Some(k),
                _ => None,
            });
            let cts = plaintexts(&params, messages)?
                .iter()
                .map(|m| encrypt(&sk, m, &mut rng))
                .collect::<mvfhe::Result<Vec<_>>>()?;
            write(out, &Container::new(params, Payload::Ciphertexts(cts)))?;
        }
        Command::Decrypt { sk, ct } => {
            let (sk, cts) = key_and_ciphertexts(sk, ct)?;
            for ct in &cts {
                println!("{}", decrypt(&sk, ct)?);
            }
        }
        Command::PkKeygen { sk, eps, out } => {
            let c = read(sk, Kind::SecretKey)?;
            let params = c.params.clone();
            let sk = unwrap_payload(c, |p| match p {
                Payload::SecretKey(k) => Some(k),
                _ => None,
            });
            let eps = eps.clone().unwrap_or_else(default_pk_slack);
            let pk = pk_keygen(&sk, &eps, &mut rng)?;
            write(out, &Container::new(params, Payload::PublicKey(pk)))?;
        }
        Command::PkEncrypt { pk, messages, out } => {
            let c = read(pk, Kind::PublicKey)?;
            let params = c.params.clone();
            let pk = unwrap_payload(c, |p| match p {
                Payload::PublicKey(k) => Some(k),
                _ => None,
            });
            let cts = plaintexts(&params, messages)?
                .iter()
                .map(|m| pk_encrypt(&pk, m, &mut rng))
                .collect::<mvfhe::Result<Vec<_>>>()?;
            write(out, &Container::new(params, Payload::Ciphertexts(cts)))?;
        }
        Command::Eval {
            evk,
            circuit,
            inputs,
            parallel,
            out,
        } => {
            let kc = read(evk, Kind::EvalKey)?;
            let mut cts: Vec<Ciphertext> = Vec::new();
            for path in inputs {
                let c = read(path, Kind::Ciphertexts)?;
                same_params(&kc, &c, path)?;
                cts.extend(unwrap_payload(c, |p| match p {
                    Payload::Ciphertexts(v) => Some(v),
                    _ => None,
                }));
            }
            let text = fs::read_to_string(circuit).map_err(|source| CliError::Io {
                path: circuit.clone(),
                source,
            })?;
            let circ = parse_circuit(&text)?;
            let params = kc.params.clone();
            let evk = unwrap_payload(kc, |p| match p {
                Payload::EvalKey(k) => Some(k),
                _ => None,
            });
            let outs = eval_homomorphic_with(&evk, &circ, &cts, *parallel)?;
            println!(
                "evaluated {} gates ({} AND, depth {}) into {} outputs",
                circ.gates().len() - circ.inputs().len(),
                circ.and_count(),
                circ.depth(),
                outs.len()
            );
            write(out, &Container::new(params, Payload::Ciphertexts(outs)))?;
        }
        Command::Noise { sk, ct, messages } => noise(sk, ct, messages)?,
        Command::Bench { presets, gates, csv } => {
            let seed = cli.seed.unwrap_or(0);
            let mut rows = Vec::new();
            for &p in presets {
                let row = bench_preset(p.into(), *gates, seed)?;
                eprintln!(
                    "{}: {:.1} us per AND",
                    row.preset.name(),
                    row.serial.as_secs_f64() * 1e6
                );
                rows.push(row);
            }
            let text = to_csv(&rows);
            print!("{text}");
            eprintln!(
                "per-gate time {} as ell grows",
                if is_monotone(&rows) {
                    "is nondecreasing"
                } else {
                    "is NOT monotone"
                }
            );
            if let Some(path) = csv {
                fs::write(path, text).map_err(|source| CliError::Io {
                    path: path.clone(),
                    source,
                })?;
            }
        }
    }
    Ok(())
}

fn key_and_ciphertexts(sk: &Path, ct: &Path) -> Result<(mvfhe::keys::SecretKey, Vec<Ciphertext>)> {
    let kc = read(sk, Kind::SecretKey)?;
    let cc = read(ct, Kind::Ciphertexts)?;
    same_params(&kc, &cc, ct)?;
    let sk = unwrap_payload(kc, |p| match p {
        Payload::SecretKey(k) => Some(k),
        _ => None,
    });
    let cts = unwrap_payload(cc, |p| match p {
        Payload::Ciphertexts(v) => Some(v),
        _ => None,
    });
    Ok((sk, cts))
}

#[cfg(feature = "noise-oracle")]
fn noise(sk: &Path, ct: &Path, messages: &[String]) -> Result<()> {
    let (sk, cts) = key_and_ciphertexts(sk, ct)?;
    let ms = plaintexts(sk.params(), messages)?;
    if ms.len() != cts.len() {
        return Err(CliError::Usage(format!(
            "{} ciphertexts but {} expected messages",
            cts.len(),
            ms.len()
        )));
    }
    let margin = sk.params().decryption_margin().to_integer();
    for (ct, m) in cts.iter().zip(&ms) {
        let e = mvfhe::she::noise_of(&sk, ct, m)?;
        let inf = e.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0);
        let hint = ct
            .noise_hint()
            .map_or("-".to_string(), |h| h.ceil().to_integer().to_string());
        println!("level {}  noise {inf}  hint {hint}  margin {margin}", ct.level());
    }
    Ok(())
}

#[cfg(not(feature = "noise-oracle"))]
fn noise(_: &Path, _: &Path, _: &[String]) -> Result<()> {
    Err(CliError::Usage(
        "this build has no noise oracle; rebuild with the noise-oracle feature".into(),
    ))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
