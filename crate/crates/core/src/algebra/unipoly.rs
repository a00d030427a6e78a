use std::fmt;
use std::ops::{Add, Mul};

use super::Rational;

/// Dense univariate polynomial over the rationals; `coeffs[d]` multiplies `y^d`.
///
/// Trailing zeros are always trimmed, so structural equality is polynomial
/// equality.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct UniPoly {
    coeffs: Vec<Rational>,
}

impl UniPoly {
    pub fn new(coeffs: Vec<Rational>) -> Self {
        let mut p = UniPoly { coeffs };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `c * y^d`.
    pub fn monomial(c: Rational, d: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); d + 1];
        coeffs[d] = c;
        Self::new(coeffs)
    }

    /// `y + c`.
    pub fn linear_shift(c: Rational) -> Self {
        Self::new(vec![c, Rational::one()])
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(Rational::is_zero) {
            self.coeffs.pop();
        }
    }

    /// Degree, with the zero polynomial at −1.
    pub fn degree(&self) -> isize {
        self.coeffs.len() as isize - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, d: usize) -> Rational {
        self.coeffs.get(d).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn scale(&self, c: &Rational) -> UniPoly {
        UniPoly::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn eval(&self, y: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * y + c)
    }
}

impl Add<&UniPoly> for &UniPoly {
    type Output = UniPoly;
    fn add(self, rhs: &UniPoly) -> UniPoly {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        UniPoly::new((0..len).map(|d| self.coeff(d) + rhs.coeff(d)).collect())
    }
}

impl Mul<&UniPoly> for &UniPoly {
    type Output = UniPoly;
    fn mul(self, rhs: &UniPoly) -> UniPoly {
        if self.is_zero() || rhs.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UniPoly::new(out)
    }
}

impl fmt::Debug for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(d, c)| match d {
                0 => format!("{c}"),
                1 => format!("({c})y"),
                _ => format!("({c})y^{d}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(p: i64, d: i64) -> Rational {
        Rational::frac(p, d)
    }

    #[test]
    fn product_of_linear_factors() {
        let y = UniPoly::monomial(Rational::one(), 1);
        let y1 = UniPoly::linear_shift(Rational::one());
        let p = &y * &y1;
        assert_eq!(p, UniPoly::new(vec![q(0, 1), q(1, 1), q(1, 1)]));
    }

    #[test]
    fn zero_is_absorbing() {
        let p = UniPoly::new(vec![q(1, 2), q(3, 1)]);
        assert!((&UniPoly::zero() * &p).is_zero());
        assert_eq!(UniPoly::zero().degree(), -1);
        assert_eq!(UniPoly::new(vec![q(0, 1), q(0, 1)]).degree(), -1);
    }

    #[test]
    fn half_rising_factorial_matches_dense_form() {
        let y = UniPoly::monomial(Rational::one(), 1);
        let y1 = UniPoly::linear_shift(Rational::one());
        let p = (&y * &y1).scale(&q(1, 2));
        assert_eq!(p, UniPoly::new(vec![q(0, 1), q(1, 2), q(1, 2), q(0, 1)]));
    }

    fn arb_poly() -> impl Strategy<Value = UniPoly> {
        prop::collection::vec((-20i64..20, 1i64..6), 0..5)
            .prop_map(|v| UniPoly::new(v.into_iter().map(|(a, b)| q(a, b)).collect()))
    }

    proptest! {
        #[test]
        fn equality_agrees_with_pointwise_evaluation(a in arb_poly(), b in arb_poly()) {
            let deg = a.degree().max(b.degree()).max(0) as i64;
            let pointwise = (0..=deg).all(|x| a.eval(&q(x, 1)) == b.eval(&q(x, 1)));
            prop_assert_eq!(pointwise, a == b);
        }

        #[test]
        fn mul_evaluates_pointwise(a in arb_poly(), b in arb_poly(), x in -5i64..5) {
            let x = q(x, 3);
            prop_assert_eq!((&a * &b).eval(&x), a.eval(&x) * b.eval(&x));
            prop_assert_eq!((&a + &b).eval(&x), a.eval(&x) + b.eval(&x));
        }
    }
}
