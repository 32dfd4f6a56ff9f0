use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::arith::{random_prime, rational, Modulus, Rational};
use crate::error::{Error, Result};

/// Constant `c` in the depth condition `q / B >= (c * n * log2 q)^L`.
pub const DEPTH_CONSTANT: u64 = 8;

/// Smallest modulus size chosen by [`setup`].
pub const MIN_Q_BITS: u32 = 40;

/// Largest supported `bits(q) + u`; keeps the reduced evaluation key below 192 bits.
pub const MAX_Q_PLUS_U_BITS: u32 = 96;

/// Default public-key expansion slack.
pub fn default_pk_slack() -> Rational {
    rational(1, 10)
}

/// Scheme dimensions and moduli.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Params {
    pub lambda: u32,
    /// Multiplicative depth budget `L`.
    pub depth: u32,
    /// Number of variables `v`.
    pub v: usize,
    pub r_g: u32,
    pub r_prime: u32,
    pub r: u32,
    /// `C(v + r', r')`, the dimension of `I_{<=r}`.
    pub n: usize,
    /// Ciphertext length.
    pub ell: usize,
    /// `C(v + r, r)`.
    pub big_n: usize,
    /// `C(v + 2r - r_g, 2r - r_g)`, the dimension of `I_{<=2r}`.
    pub n1: usize,
    /// `n1 + ell - n`, the number of evaluation points.
    pub t: usize,
    pub q: Modulus,
    pub sigma: Rational,
    /// Noise bound `B`.
    pub bound: u64,
    /// Fractional bits of the gadget decomposition.
    pub u: u32,
    pub gadget: bool,
}

/// Optional knobs for [`setup`]; `None` picks the default.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Overrides {
    pub v: Option<usize>,
    pub r_g: Option<u32>,
    pub r_prime: Option<u32>,
    pub ell: Option<usize>,
    pub q_bits: Option<u32>,
    pub q: Option<u64>,
    pub sigma: Option<Rational>,
    pub bound: Option<u64>,
    pub u: Option<u32>,
    pub gadget: Option<bool>,
    /// Sets `sigma = 0`; ciphertexts then carry no noise.
    pub zero_noise: bool,
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

impl Params {
    /// `ceil(log2 q)`.
    pub fn log_q(&self) -> u32 {
        self.q.bits()
    }

    /// Plaintext slots `ell - n`.
    pub fn slots(&self) -> usize {
        self.ell - self.n
    }

    /// Length of a gadget-decomposed vector of `ell` entries.
    pub fn gadget_len(&self) -> usize {
        self.ell * (self.u + self.log_q()) as usize
    }

    /// Bound on the `K` terms: `ell (u + log2 q) / 2 + 1` with the gadget,
    /// `ell q / 4 + 1` without it.
    pub fn k_max(&self) -> Rational {
        k_max(self.ell, self.u, self.q.bits(), self.q.value(), self.gadget)
    }

    /// Concrete noise bound after one multiplication of ciphertexts whose
    /// noise is bounded by `h1` and `h2`.
    pub fn mult_noise_bound(&self, h1: &Rational, h2: &Rational) -> Rational {
        mult_bound(h1, h2, self.bound, &self.k_max(), self.q.value(), self.ell)
    }

    /// Noise bound after an addition.
    pub fn add_noise_bound(h1: &Rational, h2: &Rational) -> Rational {
        h1 + h2 + Rational::one()
    }

    /// Decryption succeeds while noise stays below this value (`floor(q/2)/2`).
    pub fn decryption_margin(&self) -> Rational {
        Rational::new(BigInt::from(self.q.half()), BigInt::from(2))
    }

    /// `(c * n * log2 q)^L` and `q / B`.
    pub fn depth_margin(&self) -> (BigInt, Rational) {
        depth_margin(self.n, self.q.bits(), self.depth, self.q.value(), self.bound)
    }

    /// Rows of the public-key zero-encryption matrix, `ceil((1 + eps) ell log2 q)`.
    pub fn pk_rows(&self, eps: &Rational) -> usize {
        let d = (Rational::one() + eps) * BigInt::from(self.ell as u64 * self.log_q() as u64);
        d.ceil().to_integer().try_into().expect("row count fits usize")
    }

    pub fn is_zero_noise(&self) -> bool {
        self.sigma.is_zero()
    }

    /// Checks every structural and noise invariant.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if self.lambda == 0 || self.depth == 0 {
            return bad("lambda and L must be at least 1".into());
        }
        if self.v == 0 || self.r_g == 0 || self.r_prime == 0 {
            return bad("v, r_g and r' must be positive".into());
        }
        if self.r != self.r_g + self.r_prime {
            return bad(format!("r = {} but r_g + r' = {}", self.r, self.r_g + self.r_prime));
        }
        let (v, r, rp, rg) = (self.v, self.r as usize, self.r_prime as usize, self.r_g as usize);
        let expect = [
            ("n", self.n, binomial(v + rp, rp)),
            ("N", self.big_n, binomial(v + r, r)),
            ("n1", self.n1, binomial(v + 2 * r - rg, 2 * r - rg)),
            ("t", self.t, self.n1 + self.ell.saturating_sub(self.n)),
        ];
        for (name, got, want) in expect {
            if got != want {
                return bad(format!("{name} = {got}, expected {want}"));
            }
        }
        if !(self.n < self.ell && self.ell <= self.big_n) {
            return bad(format!(
                "need n < ell <= N, got n={} ell={} N={}",
                self.n, self.ell, self.big_n
            ));
        }
        check_noise(self.sigma.clone(), self.bound)?;
        if self.gadget && self.q.bits() + self.u > MAX_Q_PLUS_U_BITS {
            return bad(format!("log2 q + u must be at most {MAX_Q_PLUS_U_BITS}"));
        }
        let margin = self.decryption_margin();
        if Rational::from_integer(BigInt::from(self.bound)) >= margin {
            return bad(format!("B = {} is not below floor(q/2)/2", self.bound));
        }
        let (need, have) = self.depth_margin();
        if have < Rational::from_integer(need.clone()) {
            return Err(Error::InvalidParams(format!(
                "q/B = {} is below (c n log2 q)^L = {need}",
                have.floor()
            )));
        }
        if self.gadget && depth_budget_hint(self) >= margin {
            return bad(format!(
                "noise after {} levels exceeds floor(q/2)/2; use a larger q",
                self.depth
            ));
        }
        let pk = (self.pk_rows(&default_pk_slack()) + self.slots()) as u64 * self.bound;
        if Rational::from_integer(pk.into()) >= margin {
            return bad("public-key noise (d + ell - n) B exceeds floor(q/2)/2".into());
        }
        Ok(())
    }
}

fn check_noise(sigma: Rational, bound: u64) -> Result<()> {
    if sigma.is_zero() {
        return Ok(());
    }
    crate::arith::DiscreteGaussian::new(sigma, bound).map(|_| ())
}

fn k_max(ell: usize, u: u32, bits: u32, q: u64, gadget: bool) -> Rational {
    if gadget {
        Rational::new(BigInt::from(ell as u64 * (u + bits) as u64), BigInt::from(2)) + Rational::one()
    } else {
        Rational::new(BigInt::from(ell as u64) * BigInt::from(q), BigInt::from(4)) + Rational::one()
    }
}

fn mult_bound(h1: &Rational, h2: &Rational, bound: u64, k: &Rational, q: u64, ell: usize) -> Rational {
    let b = Rational::from_integer(BigInt::from(bound));
    let bp = [h1, h2, &b].into_iter().max().expect("nonempty").clone();
    let four_b = &bp * BigInt::from(4);
    let one = Rational::one();
    &four_b
        + (&four_b + &one) * k * BigInt::from(2)
        + (&bp * &bp * BigInt::from(8) + &one) / BigInt::from(q)
        + Rational::from_integer(BigInt::from(ell as u64))
}

fn depth_margin(n: usize, bits: u32, depth: u32, q: u64, bound: u64) -> (BigInt, Rational) {
    let need = BigInt::from(DEPTH_CONSTANT * n as u64 * bits as u64).pow(depth);
    (need, Rational::new(BigInt::from(q), BigInt::from(bound)))
}

/// Hint after `L` levels where each level adds two ciphertexts and then
/// multiplies two such sums.
fn depth_budget_hint(p: &Params) -> Rational {
    let mut h = Rational::from_integer(BigInt::from(p.bound));
    for _ in 0..p.depth {
        let sum = Params::add_noise_bound(&h, &h);
        h = p.mult_noise_bound(&sum, &sum);
    }
    h
}

/// Derives consistent parameters for security parameter `lambda` and depth `L`.
///
/// Without overrides the geometry is `v = 2`, `r_g = 1`, the smallest `r'`
/// with `n >= lambda`, and `ell = n + 2`. The modulus size is the smallest
/// `b >= 40` satisfying every noise condition, and `q` is a prime of exactly
/// `b` bits drawn from a fixed-seed stream, so the output is deterministic.
pub fn setup(lambda: u32, depth: u32, ov: &Overrides) -> Result<Params> {
    if lambda == 0 || depth == 0 {
        return Err(Error::InvalidParams("lambda and L must be at least 1".into()));
    }
    let v = ov.v.unwrap_or(2);
    let r_g = ov.r_g.unwrap_or(1);
    if v == 0 || r_g == 0 {
        return Err(Error::InvalidParams("v and r_g must be positive".into()));
    }
    let r_prime = match ov.r_prime {
        Some(rp) => rp,
        None => (1..)
            .find(|&rp| binomial(v + rp as usize, rp as usize) >= lambda as usize)
            .expect("binomials grow without bound"),
    };
    let r = r_g + r_prime;
    let n = binomial(v + r_prime as usize, r_prime as usize);
    let ell = ov.ell.unwrap_or(n + 2);
    let big_n = binomial(v + r as usize, r as usize);
    let two_r = 2 * r as usize - r_g as usize;
    let n1 = binomial(v + two_r, two_r);
    let sigma = if ov.zero_noise {
        Rational::zero()
    } else {
        ov.sigma.clone().unwrap_or_else(|| rational(8, 1))
    };
    let bound = match ov.bound {
        Some(b) => b,
        None if sigma.is_zero() => 48,
        None => (&sigma * BigInt::from(6))
            .ceil()
            .to_integer()
            .try_into()
            .map_err(|_| Error::InvalidParams("noise bound does not fit in 64 bits".into()))?,
    };
    let mut params = Params {
        lambda,
        depth,
        v,
        r_g,
        r_prime,
        r,
        n,
        ell,
        big_n,
        n1,
        t: n1 + ell.saturating_sub(n),
        q: Modulus::new(3)?,
        sigma,
        bound,
        u: ov.u.unwrap_or(8),
        gadget: ov.gadget.unwrap_or(true),
    };
    if let Some(q) = ov.q {
        params.q = Modulus::new(q)?;
        params.validate()?;
        return Ok(params);
    }
    let candidates: Vec<u32> = match ov.q_bits {
        Some(b) => vec![b],
        None => (MIN_Q_BITS..=64).collect(),
    };
    let mut last_err = None;
    for bits in candidates {
        let mut rng = ChaCha20Rng::seed_from_u64(0x6d76_6668_6500 ^ bits as u64);
        params.q = Modulus::new(random_prime(bits, &mut rng)?)?;
        match params.validate() {
            Ok(()) => return Ok(params),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.expect("at least one candidate size"))
}

/// Named parameter sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Preset {
    /// `v=2, r'=2, n=6, ell=8`, depth 2, 40-bit `q`.
    Toy,
    /// `v=3, r'=2, n=10, ell=12`, depth 2.
    Small,
    /// `v=2, r'=4, n=15, ell=16`, depth 2.
    Medium,
    /// Toy geometry with depth 3.
    Depth3,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Toy, Preset::Small, Preset::Medium, Preset::Depth3];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Toy => "toy",
            Preset::Small => "small",
            Preset::Medium => "medium",
            Preset::Depth3 => "depth3",
        }
    }

    pub fn from_name(s: &str) -> Option<Preset> {
        Preset::ALL.into_iter().find(|p| p.name() == s)
    }

    /// `(lambda, L, overrides)` for this preset.
    pub fn spec(self) -> (u32, u32, Overrides) {
        match self {
            Preset::Toy => (6, 2, Overrides::default()),
            Preset::Small => (
                10,
                2,
                Overrides {
                    v: Some(3),
                    r_prime: Some(2),
                    ..Overrides::default()
                },
            ),
            Preset::Medium => (
                15,
                2,
                Overrides {
                    ell: Some(16),
                    ..Overrides::default()
                },
            ),
            Preset::Depth3 => (6, 3, Overrides::default()),
        }
    }

    pub fn params(self) -> Result<Params> {
        self.params_with(|_| {})
    }

    /// The preset with extra overrides applied on top.
    pub fn params_with(self, tweak: impl FnOnce(&mut Overrides)) -> Result<Params> {
        let (lambda, depth, mut ov) = self.spec();
        tweak(&mut ov);
        setup(lambda, depth, &ov)
    }
}
