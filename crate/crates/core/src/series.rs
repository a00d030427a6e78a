//! Truncated formal power series in `t` and the two routes for
//! `1 − ∏_x (1 − p(x))^{μ(x)}`: direct series arithmetic, and the sum
//! `Σ_n E_n(p, …, p) / n!` expanded over multisets of coefficient indices.

use serde::{Deserialize, Serialize};

use crate::algebra::Rational;
use crate::error::{config, domain, Result};
use crate::functional::{e_n, FunctionalInstance, MAX_EN_N};
use crate::partitions::{factorial, integer_partitions};
use crate::spaces::{MonotoneFn, Space};

/// Default truncation order.
pub const DEFAULT_TRUNCATION: usize = 6;

/// Series `c_0 + c_1 t + … + c_T t^T`, exact; nothing beyond `T` is kept.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalarSeries {
    coeffs: Vec<Rational>,
}

impl ScalarSeries {
    /// Pads or truncates `coeffs` to length `truncation + 1`.
    pub fn new(truncation: usize, mut coeffs: Vec<Rational>) -> Self {
        coeffs.resize(truncation + 1, Rational::zero());
        ScalarSeries { coeffs }
    }

    pub fn zero(truncation: usize) -> Self {
        Self::new(truncation, Vec::new())
    }

    pub fn one(truncation: usize) -> Self {
        Self::new(truncation, vec![Rational::one()])
    }

    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> &Rational {
        &self.coeffs[k]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Rational::is_zero)
    }

    fn check_same(&self, other: &ScalarSeries) -> Result<()> {
        if self.truncation() != other.truncation() {
            return domain(format!(
                "truncation mismatch: {} vs {}",
                self.truncation(),
                other.truncation()
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &ScalarSeries) -> Result<ScalarSeries> {
        self.check_same(other)?;
        Ok(ScalarSeries {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &ScalarSeries) -> Result<ScalarSeries> {
        self.check_same(other)?;
        Ok(ScalarSeries {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn scale(&self, c: &Rational) -> ScalarSeries {
        ScalarSeries {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    pub fn mul(&self, other: &ScalarSeries) -> Result<ScalarSeries> {
        self.check_same(other)?;
        let t = self.truncation();
        let mut out = vec![Rational::zero(); t + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs[..=t - i].iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Ok(ScalarSeries { coeffs: out })
    }

    /// `ln(1 − p) = −Σ_{i≥1} p^i / i`; `p` must have zero constant term.
    pub fn log1m(&self) -> Result<ScalarSeries> {
        if !self.coeffs[0].is_zero() {
            return domain("log1m needs a series with zero constant term");
        }
        let t = self.truncation();
        let mut power = self.clone();
        let mut out = ScalarSeries::zero(t);
        for i in 1..=t {
            out = out.sub(&power.scale(&Rational::new(1, i as i64)?))?;
            power = power.mul(self)?;
        }
        Ok(out)
    }

    /// `exp(x) = Σ_j x^j / j!`; `x` must have zero constant term.
    pub fn exp(&self) -> Result<ScalarSeries> {
        if !self.coeffs[0].is_zero() {
            return domain("exp needs a series with zero constant term");
        }
        let t = self.truncation();
        let mut term = ScalarSeries::one(t);
        let mut out = ScalarSeries::one(t);
        for j in 1..=t {
            term = term.mul(self)?.scale(&Rational::new(1, j as i64)?);
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// `ln(s)` for `s` with constant term 1.
    pub fn log(&self) -> Result<ScalarSeries> {
        if !self.coeffs[0].is_one() {
            return domain("log needs a series with constant term 1");
        }
        ScalarSeries::one(self.truncation()).sub(self)?.log1m()
    }

    /// `s^r = exp(r ln s)` for `s` with constant term 1.
    pub fn pow_rational(&self, r: &Rational) -> Result<ScalarSeries> {
        if !self.coeffs[0].is_one() {
            return domain("pow_rational needs a series with constant term 1");
        }
        if r.is_zero() {
            return Ok(ScalarSeries::one(self.truncation()));
        }
        self.log()?.scale(r).exp()
    }
}

/// Formal series `p = p_1 t + p_2 t² + …` whose coefficients are monotone
/// functions on a common space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionSeries {
    truncation: usize,
    coeffs: Vec<MonotoneFn>,
}

impl FunctionSeries {
    /// `coeffs[k-1] = p_k`; missing orders are zero and orders beyond
    /// `truncation` are dropped.
    pub fn new(space: &Space, truncation: usize, mut coeffs: Vec<MonotoneFn>) -> Result<Self> {
        if truncation == 0 {
            return domain("truncation must be >= 1");
        }
        for f in &coeffs {
            space.check_monotone(f.values())?;
        }
        coeffs.truncate(truncation);
        while coeffs.len() < truncation {
            coeffs.push(MonotoneFn::constant(space, Rational::zero())?);
        }
        Ok(FunctionSeries { truncation, coeffs })
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// `p_1..p_T`.
    pub fn coeffs(&self) -> &[MonotoneFn] {
        &self.coeffs
    }

    /// Scalar series `p(x)` at one point.
    pub fn at(&self, point: usize) -> ScalarSeries {
        let mut c = vec![Rational::zero()];
        c.extend(self.coeffs.iter().map(|f| f.value(point).clone()));
        ScalarSeries::new(self.truncation, c)
    }
}

/// `1 − ∏_x (1 − p(x))^{μ(x)}` by series arithmetic, folding over points in
/// order.
pub fn corollary_direct(space: &Space, p: &FunctionSeries) -> Result<ScalarSeries> {
    let t = p.truncation();
    let one = ScalarSeries::one(t);
    let mut product = one.clone();
    for (x, mu) in space.mu().iter().enumerate() {
        if mu.is_zero() {
            continue;
        }
        let factor = one.sub(&p.at(x))?.pow_rational(mu)?;
        product = product.mul(&factor)?;
    }
    one.sub(&product)
}

/// Same series via `Σ_n E_n(p, …, p) / n!`: the `t^k` coefficient is
/// `Σ_{multisets {i_1..i_n}, Σ i_s = k} E_n(p_{i_1}, …, p_{i_n}) / ∏ mult!`.
pub fn corollary_via_en(space: &Space, p: &FunctionSeries) -> Result<ScalarSeries> {
    let t = p.truncation();
    if t > MAX_EN_N {
        return config(format!("truncation {t} exceeds the E_n cap {MAX_EN_N}"));
    }
    let mut coeffs = vec![Rational::zero(); t + 1];
    for (k, slot) in coeffs.iter_mut().enumerate().skip(1) {
        for multiset in integer_partitions(k) {
            let fns: Vec<MonotoneFn> = multiset
                .parts()
                .iter()
                .map(|&i| p.coeffs()[i - 1].clone())
                .collect();
            if fns.iter().any(MonotoneFn::is_zero) {
                continue;
            }
            let weight: Rational = multiset
                .multiplicities()
                .values()
                .map(|&q| Rational::from(factorial(q)))
                .product();
            let inst = FunctionalInstance::new(space.clone(), fns)?;
            *slot += e_n(&inst)?.checked_div(&weight)?;
        }
    }
    Ok(ScalarSeries::new(t, coeffs))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonnegativityReport {
    pub nonnegative: bool,
    pub first_negative_index: Option<usize>,
    pub first_negative_value: Option<Rational>,
}

/// Scans the coefficients of `t^1..t^T`.
pub fn check_nonnegativity(s: &ScalarSeries) -> NonnegativityReport {
    let hit = s
        .coeffs()
        .iter()
        .enumerate()
        .skip(1)
        .find(|(_, c)| c.is_negative());
    NonnegativityReport {
        nonnegative: hit.is_none(),
        first_negative_index: hit.map(|(k, _)| k),
        first_negative_value: hit.map(|(_, c)| c.clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::ChainSpace;

    fn q(p: i64, d: i64) -> Rational {
        Rational::frac(p, d)
    }

    fn series(t: usize, c: &[(i64, i64)]) -> ScalarSeries {
        ScalarSeries::new(t, c.iter().map(|&(a, b)| q(a, b)).collect())
    }

    #[test]
    fn exp_of_log1m_inverts() {
        let p = series(4, &[(0, 1), (1, 2)]);
        let s = p.log1m().unwrap().exp().unwrap();
        assert_eq!(s, series(4, &[(1, 1), (-1, 2)]));
    }

    #[test]
    fn square_root_series() {
        let s = series(3, &[(1, 1), (-1, 1)]);
        let r = s.pow_rational(&q(1, 2)).unwrap();
        assert_eq!(r, series(3, &[(1, 1), (-1, 2), (-1, 8), (-1, 16)]));
    }

    #[test]
    fn zero_series_absorbs() {
        let s = series(5, &[(3, 1), (1, 7)]);
        assert!(s.mul(&ScalarSeries::zero(5)).unwrap().is_zero());
    }

    #[test]
    fn preconditions() {
        let s = series(3, &[(1, 1), (1, 1)]);
        assert!(s.log1m().is_err());
        assert!(s.exp().is_err());
        assert!(series(3, &[(2, 1)]).pow_rational(&q(1, 2)).is_err());
        assert!(s.add(&ScalarSeries::zero(2)).is_err());
    }

    #[test]
    fn pow_identities() {
        let s = series(5, &[(1, 1), (-2, 3), (1, 5), (0, 1), (7, 2)]);
        assert_eq!(s.pow_rational(&q(1, 1)).unwrap(), s);
        let back = s.pow_rational(&q(3, 7)).unwrap().pow_rational(&q(7, 3)).unwrap();
        assert_eq!(back, s);
        let cube = s.mul(&s).unwrap().mul(&s).unwrap();
        assert_eq!(s.pow_rational(&q(3, 1)).unwrap(), cube);
    }

    fn step_chain(t: usize) -> (Space, FunctionSeries) {
        let space = Space::Chain(ChainSpace::uniform(2).unwrap());
        let p1 = MonotoneFn::new(&space, vec![q(0, 1), q(1, 1)]).unwrap();
        let p = FunctionSeries::new(&space, t, vec![p1]).unwrap();
        (space, p)
    }

    #[test]
    fn step_instance_is_one_minus_sqrt() {
        let (space, p) = step_chain(4);
        let want = series(4, &[(0, 1), (1, 2), (1, 8), (1, 16), (5, 128)]);
        assert_eq!(corollary_direct(&space, &p).unwrap(), want);
        assert_eq!(corollary_via_en(&space, &p).unwrap(), want);
        assert!(check_nonnegativity(&want).nonnegative);
    }

    #[test]
    fn direct_edge_cases() {
        let space = Space::Chain(ChainSpace::new(vec![q(1, 1)]).unwrap());
        let p1 = MonotoneFn::new(&space, vec![q(3, 4)]).unwrap();
        let p = FunctionSeries::new(&space, 3, vec![p1]).unwrap();
        assert_eq!(corollary_direct(&space, &p).unwrap(), series(3, &[(0, 1), (3, 4)]));

        let p = FunctionSeries::new(&space, 3, vec![]).unwrap();
        assert!(corollary_direct(&space, &p).unwrap().is_zero());
        assert!(corollary_via_en(&space, &p).unwrap().is_zero());
    }

    #[test]
    fn second_order_term() {
        let (space, p) = step_chain(2);
        let s = corollary_via_en(&space, &p).unwrap();
        assert_eq!(s.coeff(1), &q(1, 2));
        assert_eq!(s.coeff(2), &q(1, 8));
    }

    #[test]
    fn nonnegativity_scan() {
        assert!(check_nonnegativity(&ScalarSeries::zero(4)).nonnegative);
        let s = series(4, &[(0, 1), (1, 2), (0, 1), (-1, 8), (-1, 1)]);
        let r = check_nonnegativity(&s);
        assert!(!r.nonnegative);
        assert_eq!(r.first_negative_index, Some(3));
        assert_eq!(r.first_negative_value, Some(q(-1, 8)));
    }

    #[test]
    fn truncation_cap_for_en_route() {
        let (space, p) = step_chain(MAX_EN_N + 1);
        assert!(corollary_via_en(&space, &p).is_err());
    }
}
