//! Exact rational scalars.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// The base field: arbitrary-precision rationals, always in lowest terms
/// with positive denominator (maintained by `num_rational`).
pub type Q = num_rational::BigRational;

/// Rational from an integer.
pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Rational from numerator and denominator.
pub fn qr(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

/// Binomial coefficient as a rational.
pub fn binomial(n: u32, k: u32) -> Q {
    if k > n {
        return Q::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc *= BigInt::from(n - i);
    }
    let mut den = BigInt::one();
    for i in 1..=k {
        den *= BigInt::from(i);
    }
    Q::new(acc, den)
}

/// Render a rational in the expression grammar (`p` or `p/q`).
pub fn format_q(x: &Q) -> String {
    if x.denom().is_one() {
        format!("{}", x.numer())
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Render a rational as a leading coefficient, with explicit sign handling
/// left to the caller: returns the absolute value rendering.
pub fn format_q_abs(x: &Q) -> String {
    format_q(&x.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), q(10));
        assert_eq!(binomial(4, 0), q(1));
        assert_eq!(binomial(3, 5), q(0));
    }

    #[test]
    fn formatting() {
        assert_eq!(format_q(&qr(3, 4)), "3/4");
        assert_eq!(format_q(&q(-7)), "-7");
        assert_eq!(format_q(&qr(-1, 2)), "-1/2");
    }
}
