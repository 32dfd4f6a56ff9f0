//! Self-describing binary container for parameters, keys and ciphertexts.
//!
//! Every file has the same frame. Integers are little-endian.
//!
//! ```text
//! magic        6 bytes  "MVFHE\0"
//! version      u16
//! kind         u8
//! params       u32 length, then the params block
//! fingerprint  32 bytes, SHA-256 of the params block
//! payload      u64 length, then the payload
//! checksum     32 bytes, SHA-256 of every preceding byte
//! ```
//!
//! Arbitrary-precision integers are a sign byte (0 or 1) followed by a
//! u32-prefixed little-endian magnitude with no trailing zero bytes.
//! Rationals are a numerator and a positive denominator in lowest terms.
//! Residues are stored as their balanced representative in an i64.
//!
//! Decoding is strict: anything a conforming writer would not produce is
//! rejected, so `encode(decode(b)) == b` for every accepted `b`.

use std::fmt;

use mvfhe::arith::{Modulus, Rational};
use mvfhe::keys::{EvalKey, Params, SecretKey, Variant};
use mvfhe::linalg::{MatrixZq, ReducedTensor};
use mvfhe::mvpoly::{Monomial, Polynomial};
use mvfhe::she::{Ciphertext, PublicKey};
use num_bigint::{BigInt, BigUint, Sign};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const MAGIC: &[u8; 6] = b"MVFHE\0";
pub const VERSION: u16 = 1;

/// SHA-256 of a serialized params block.
pub type Fingerprint = [u8; 32];

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("not an mvfhe file (bad magic)")]
    BadMagic,

    #[error("unsupported format version {found} (this build reads version {expected})")]
    Version { found: u16, expected: u16 },

    #[error("unknown payload kind {0}")]
    UnknownKind(u8),

    #[error("expected a {expected} file, found a {found} file")]
    WrongKind { expected: Kind, found: Kind },

    #[error("checksum mismatch: the file is corrupted")]
    Checksum,

    #[error("params fingerprint does not match the params block")]
    Fingerprint,

    #[error("unexpected end of data at byte {0}")]
    Truncated(usize),

    #[error("malformed {0}")]
    Malformed(&'static str),

    #[error(transparent)]
    Scheme(#[from] mvfhe::Error),
}

pub type Result<T> = std::result::Result<T, FormatError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Params = 1,
    SecretKey = 2,
    PublicKey = 3,
    EvalKey = 4,
    Ciphertexts = 5,
}

impl Kind {
    fn from_u8(b: u8) -> Result<Kind> {
        Ok(match b {
            1 => Kind::Params,
            2 => Kind::SecretKey,
            3 => Kind::PublicKey,
            4 => Kind::EvalKey,
            5 => Kind::Ciphertexts,
            other => return Err(FormatError::UnknownKind(other)),
        })
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Params => "params",
            Kind::SecretKey => "secret key",
            Kind::PublicKey => "public key",
            Kind::EvalKey => "evaluation key",
            Kind::Ciphertexts => "ciphertext",
        })
    }
}

/// A container holds exactly one payload, so the variant size spread is harmless.
#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Payload {
    Params,
    SecretKey(SecretKey),
    PublicKey(PublicKey),
    EvalKey(EvalKey),
    Ciphertexts(Vec<Ciphertext>),
}

impl Payload {
    pub fn kind(&self) -> Kind {
        match self {
            Payload::Params => Kind::Params,
            Payload::SecretKey(_) => Kind::SecretKey,
            Payload::PublicKey(_) => Kind::PublicKey,
            Payload::EvalKey(_) => Kind::EvalKey,
            Payload::Ciphertexts(_) => Kind::Ciphertexts,
        }
    }
}

/// A decoded file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Container {
    pub params: Params,
    pub payload: Payload,
}

impl Container {
    pub fn new(params: Params, payload: Payload) -> Self {
        Container { params, payload }
    }

    pub fn fingerprint(&self) -> Fingerprint {
        fingerprint(&self.params)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let block = params_block(&self.params);
        let mut body = Writer::default();
        match &self.payload {
            Payload::Params => {}
            Payload::SecretKey(sk) => body.secret_key(sk),
            Payload::PublicKey(pk) => body.public_key(pk),
            Payload::EvalKey(evk) => body.eval_key(evk),
            Payload::Ciphertexts(cts) => body.ciphertexts(cts),
        }
        let mut w = Writer::default();
        w.raw(MAGIC);
        w.u16(VERSION);
        w.u8(self.payload.kind() as u8);
        w.u32(block.len() as u32);
        w.raw(&block);
        w.raw(&sha256(&block));
        w.u64(body.0.len() as u64);
        w.raw(&body.0);
        let sum = sha256(&w.0);
        w.raw(&sum);
        w.0
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Container> {
        let mut r = Reader::new(bytes);
        if r.take(MAGIC.len())? != MAGIC {
            return Err(FormatError::BadMagic);
        }
        let version = r.u16()?;
        if version != VERSION {
            return Err(FormatError::Version {
                found: version,
                expected: VERSION,
            });
        }
        let kind = Kind::from_u8(r.u8()?)?;
        if bytes.len() < r.pos + 32 {
            return Err(FormatError::Truncated(bytes.len()));
        }
        let (framed, sum) = bytes.split_at(bytes.len() - 32);
        if sha256(framed) != sum {
            return Err(FormatError::Checksum);
        }
        let mut r = Reader {
            buf: framed,
            pos: r.pos,
        };
        let block_len = r.u32()? as usize;
        let block = r.take(block_len)?;
        if sha256(block) != r.take(32)? {
            return Err(FormatError::Fingerprint);
        }
        let params = read_params_block(block)?;
        let body_len = r.len_u64()?;
        let mut body = Reader::new(r.take(body_len)?);
        r.finish()?;
        let payload = match kind {
            Kind::Params => Payload::Params,
            Kind::SecretKey => Payload::SecretKey(body.secret_key(&params)?),
            Kind::PublicKey => Payload::PublicKey(body.public_key(&params)?),
            Kind::EvalKey => Payload::EvalKey(body.eval_key(&params)?),
            Kind::Ciphertexts => Payload::Ciphertexts(body.ciphertexts(&params)?),
        };
        body.finish()?;
        Ok(Container { params, payload })
    }

    /// Fails with [`FormatError::WrongKind`] unless the payload is `expected`.
    pub fn expect(&self, expected: Kind) -> Result<()> {
        let found = self.payload.kind();
        if found != expected {
            return Err(FormatError::WrongKind { expected, found });
        }
        Ok(())
    }
}

pub fn fingerprint(params: &Params) -> Fingerprint {
    sha256(&params_block(params))
}

/// Lowercase hex of the first eight fingerprint bytes, for messages.
pub fn short_hex(f: &Fingerprint) -> String {
    f[..8].iter().map(|b| format!("{b:02x}")).collect()
}

fn sha256(data: &[u8]) -> [u8; 32] {
    Sha256::digest(data).into()
}

fn params_block(p: &Params) -> Vec<u8> {
    let mut w = Writer::default();
    w.params(p);
    w.0
}

fn read_params_block(block: &[u8]) -> Result<Params> {
    let mut r = Reader::new(block);
    let p = r.params()?;
    r.finish()?;
    Ok(p)
}

#[derive(Default)]
struct Writer(Vec<u8>);

impl Writer {
    fn raw(&mut self, b: &[u8]) {
        self.0.extend_from_slice(b);
    }

    fn u8(&mut self, x: u8) {
        self.0.push(x);
    }

    fn u16(&mut self, x: u16) {
        self.raw(&x.to_le_bytes());
    }

    fn u32(&mut self, x: u32) {
        self.raw(&x.to_le_bytes());
    }

    fn u64(&mut self, x: u64) {
        self.raw(&x.to_le_bytes());
    }

    fn len(&mut self, x: usize) {
        self.u64(x as u64);
    }

    fn i64(&mut self, x: i64) {
        self.raw(&x.to_le_bytes());
    }

    fn bigint(&mut self, x: &BigInt) {
        self.u8((x.sign() == Sign::Minus) as u8);
        let mag = if x.sign() == Sign::NoSign {
            Vec::new()
        } else {
            x.magnitude().to_bytes_le()
        };
        self.u32(mag.len() as u32);
        self.raw(&mag);
    }

    fn rational(&mut self, x: &Rational) {
        self.bigint(x.numer());
        self.bigint(x.denom());
    }

    fn params(&mut self, p: &Params) {
        self.u32(p.lambda);
        self.u32(p.depth);
        self.len(p.v);
        self.u32(p.r_g);
        self.u32(p.r_prime);
        self.u32(p.r);
        self.len(p.n);
        self.len(p.ell);
        self.len(p.big_n);
        self.len(p.n1);
        self.len(p.t);
        self.u64(p.q.value());
        self.rational(&p.sigma);
        self.u64(p.bound);
        self.u32(p.u);
        self.u8(p.gadget as u8);
    }

    fn residues(&mut self, xs: &[i64]) {
        self.len(xs.len());
        for &x in xs {
            self.i64(x);
        }
    }

    fn matrix(&mut self, m: &MatrixZq) {
        self.len(m.rows());
        self.len(m.cols());
        for &x in m.data() {
            self.i64(x);
        }
    }

    fn rows(&mut self, rows: &[Vec<i64>]) {
        self.len(rows.len());
        for row in rows {
            self.residues(row);
        }
    }

    fn polynomial(&mut self, f: &Polynomial) {
        self.len(f.nvars());
        self.len(f.num_terms());
        for (m, c) in f.terms() {
            for &e in m.exponents() {
                self.u32(e);
            }
            self.i64(c);
        }
    }

    fn secret_key(&mut self, sk: &SecretKey) {
        self.polynomial(sk.generator());
        self.rows(sk.points());
        self.matrix(sk.s());
        self.matrix(sk.r1());
        self.matrix(sk.r2());
    }

    fn public_key(&mut self, pk: &PublicKey) {
        self.rational(pk.eps());
        self.rows(pk.c0());
        self.rows(pk.c_pk());
    }

    fn eval_key(&mut self, evk: &EvalKey) {
        let t = evk.tensor();
        self.u8(match evk.variant() {
            Variant::Gadget => 0,
            Variant::Plain => 1,
        });
        for d in t.dims() {
            self.len(d);
        }
        self.bigint(&BigInt::from(t.denom().clone()));
        self.u32(t.frac_bits());
        self.len(t.raw().len());
        for &limb in t.raw() {
            self.u32(limb);
        }
    }

    fn ciphertexts(&mut self, cts: &[Ciphertext]) {
        self.len(cts.len());
        for ct in cts {
            self.u32(ct.level());
            self.residues(ct.as_slice());
            match ct.noise_hint() {
                Some(h) => {
                    self.u8(1);
                    self.rational(h);
                }
                None => self.u8(0),
            }
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or(FormatError::Truncated(self.buf.len()))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("take returns N bytes"))
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(FormatError::Malformed("trailing bytes"));
        }
        Ok(())
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        self.array().map(u16::from_le_bytes)
    }

    fn u32(&mut self) -> Result<u32> {
        self.array().map(u32::from_le_bytes)
    }

    fn u64(&mut self) -> Result<u64> {
        self.array().map(u64::from_le_bytes)
    }

    fn i64(&mut self) -> Result<i64> {
        self.array().map(i64::from_le_bytes)
    }

    fn len_u64(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| FormatError::Malformed("length"))
    }

    /// An element count, rejected early when the remaining bytes cannot
    /// hold that many elements of `min_size` bytes.
    fn count(&mut self, min_size: usize) -> Result<usize> {
        let n = self.len_u64()?;
        if n.saturating_mul(min_size) > self.buf.len() - self.pos {
            return Err(FormatError::Truncated(self.buf.len()));
        }
        Ok(n)
    }

    fn flag(&mut self) -> Result<bool> {
        match self.u8()? {
            0 => Ok(false),
            1 => Ok(true),
            _ => Err(FormatError::Malformed("boolean flag")),
        }
    }

    fn bigint(&mut self) -> Result<BigInt> {
        let negative = self.flag()?;
        let len = self.u32()? as usize;
        let mag = self.take(len)?;
        if mag.last() == Some(&0) || (negative && mag.is_empty()) {
            return Err(FormatError::Malformed("integer encoding"));
        }
        let sign = if negative { Sign::Minus } else { Sign::Plus };
        Ok(BigInt::from_biguint(sign, BigUint::from_bytes_le(mag)))
    }

    fn rational(&mut self) -> Result<Rational> {
        let num = self.bigint()?;
        let den = self.bigint()?;
        if den.sign() != Sign::Plus {
            return Err(FormatError::Malformed("rational denominator"));
        }
        let x = Rational::new(num.clone(), den.clone());
        if *x.numer() != num || *x.denom() != den {
            return Err(FormatError::Malformed("rational not in lowest terms"));
        }
        Ok(x)
    }

    fn params(&mut self) -> Result<Params> {
        let p = Params {
            lambda: self.u32()?,
            depth: self.u32()?,
            v: self.len_u64()?,
            r_g: self.u32()?,
            r_prime: self.u32()?,
            r: self.u32()?,
            n: self.len_u64()?,
            ell: self.len_u64()?,
            big_n: self.len_u64()?,
            n1: self.len_u64()?,
            t: self.len_u64()?,
            q: Modulus::new(self.u64()?)?,
            sigma: self.rational()?,
            bound: self.u64()?,
            u: self.u32()?,
            gadget: self.flag()?,
        };
        p.validate()?;
        Ok(p)
    }

    fn residue(&mut self, q: Modulus) -> Result<i64> {
        let x = self.i64()?;
        if q.reduce(x as i128) != x {
            return Err(FormatError::Malformed("residue outside the balanced range"));
        }
        Ok(x)
    }

    fn residues(&mut self, q: Modulus) -> Result<Vec<i64>> {
        let n = self.count(8)?;
        (0..n).map(|_| self.residue(q)).collect()
    }

    fn rows(&mut self, q: Modulus) -> Result<Vec<Vec<i64>>> {
        let n = self.count(8)?;
        (0..n).map(|_| self.residues(q)).collect()
    }

    fn matrix(&mut self, q: Modulus) -> Result<MatrixZq> {
        let rows = self.len_u64()?;
        let cols = self.len_u64()?;
        let cells = rows.checked_mul(cols).ok_or(FormatError::Malformed("matrix shape"))?;
        if cells.saturating_mul(8) > self.buf.len() - self.pos {
            return Err(FormatError::Truncated(self.buf.len()));
        }
        let mut data = Vec::with_capacity(rows);
        for _ in 0..rows {
            data.push((0..cols).map(|_| self.residue(q)).collect::<Result<Vec<_>>>()?);
        }
        if rows == 0 || cols == 0 {
            return Ok(MatrixZq::zeros(rows, cols, q));
        }
        Ok(MatrixZq::from_rows(&data, q)?)
    }

    fn polynomial(&mut self, q: Modulus) -> Result<Polynomial> {
        let nvars = self.len_u64()?;
        let terms = self.count(8)?;
        let mut out: Vec<(Monomial, i64)> = Vec::with_capacity(terms);
        for _ in 0..terms {
            let exps = (0..nvars).map(|_| self.u32()).collect::<Result<Vec<_>>>()?;
            let m = Monomial::new(exps);
            let c = self.residue(q)?;
            if c == 0 || out.last().is_some_and(|(prev, _)| *prev >= m) {
                return Err(FormatError::Malformed("polynomial terms"));
            }
            out.push((m, c));
        }
        Ok(Polynomial::from_terms(nvars, q, out))
    }

    fn secret_key(&mut self, p: &Params) -> Result<SecretKey> {
        let q = p.q;
        let g = self.polynomial(q)?;
        let points = self.rows(q)?;
        let s = self.matrix(q)?;
        let r1 = self.matrix(q)?;
        let r2 = self.matrix(q)?;
        Ok(SecretKey::from_parts(p.clone(), g, points, s, r1, r2)?)
    }

    fn public_key(&mut self, p: &Params) -> Result<PublicKey> {
        let eps = self.rational()?;
        let c0 = self.rows(p.q)?;
        let c_pk = self.rows(p.q)?;
        Ok(PublicKey::from_parts(p.clone(), eps, c0, c_pk)?)
    }

    fn eval_key(&mut self, p: &Params) -> Result<EvalKey> {
        let variant = match self.u8()? {
            0 => Variant::Gadget,
            1 => Variant::Plain,
            _ => return Err(FormatError::Malformed("evaluation key variant")),
        };
        let dims = [self.len_u64()?, self.len_u64()?, self.len_u64()?];
        let denom = self
            .bigint()?
            .to_biguint()
            .ok_or(FormatError::Malformed("evaluation key denominator"))?;
        let frac_bits = self.u32()?;
        let n = self.count(4)?;
        let limbs = (0..n).map(|_| self.u32()).collect::<Result<Vec<_>>>()?;
        let tensor = ReducedTensor::from_raw(dims, p.q, denom, frac_bits, limbs)?;
        Ok(EvalKey::from_parts(p.clone(), variant, tensor)?)
    }

    fn ciphertexts(&mut self, p: &Params) -> Result<Vec<Ciphertext>> {
        let n = self.count(13)?;
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let level = self.u32()?;
            let c = self.residues(p.q)?;
            if c.len() != p.ell {
                return Err(FormatError::Malformed("ciphertext length"));
            }
            let hint = if self.flag()? { Some(self.rational()?) } else { None };
            out.push(Ciphertext::new(c, p.q, level, hint)?);
        }
        Ok(out)
    }
}
