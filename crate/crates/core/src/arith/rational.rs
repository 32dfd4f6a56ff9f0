use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::One;

/// Exact rational number, always kept in lowest terms with a positive denominator.
pub type Rational = BigRational;

/// Builds `num/den` from machine integers.
pub fn rational(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Greatest integer not exceeding `x`.
pub fn round_floor(x: &Rational) -> BigInt {
    x.numer().div_floor(x.denom())
}

/// Nearest integer, halves rounded toward positive infinity.
pub fn round_nearest(x: &Rational) -> BigInt {
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    round_floor(&(x + half))
}

/// `x mod q` as a rational in `[0, q)`.
pub(crate) fn rational_mod(x: &Rational, q: &BigInt) -> Rational {
    let qr = Rational::from_integer(q.clone());
    let k = round_floor(&(x / &qr));
    x - qr * Rational::from_integer(k)
}
