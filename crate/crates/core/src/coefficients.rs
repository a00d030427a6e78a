//! Monomial coefficients of `E_n` on a chain.
//!
//! `F_m(μ)` is the coefficient of `∏_i f_i(J(i))` when the level assignment
//! `J` puts `m_j` functions on level `j`; it has a partition-sum form and a
//! closed product form. `B(m_1..m_{N−1})` is the coefficient of an increment
//! monomial `∏_i a_{i,ℓ(i)}` after substituting `f_i(j) = Σ_{t≤j} a_{i,t}`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::algebra::{IncrementPolynomial, Monomial, Rational};
use crate::error::{config, domain, Result};
use crate::functional::{expand_e_n, MAX_EN_N};
use crate::partitions::{binomial, enumerate_level_matrices, enumerate_set_partitions, factorial, c_lambda};
use crate::spaces::ChainSpace;

/// Level occupation numbers `(m_1..m_N)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Composition(Vec<usize>);

impl Composition {
    pub fn new(m: Vec<usize>) -> Self {
        Composition(m)
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    /// Block layout: the first `m_1` functions on level 1, the next `m_2` on
    /// level 2, and so on.
    pub fn block_levels(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(j, &mj)| std::iter::repeat_n(j + 1, mj))
            .collect()
    }

    /// Composition counting how many functions each level receives.
    pub fn from_levels(levels: &[usize], len: usize) -> Self {
        let mut m = vec![0; len];
        for &l in levels {
            m[l - 1] += 1;
        }
        Composition(m)
    }
}

impl std::fmt::Display for Composition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Every composition of `total` into `len` nonnegative parts, lexicographic.
pub fn compositions(total: usize, len: usize) -> Vec<Composition> {
    fn go(rest: usize, slots: usize, cur: &mut Vec<usize>, out: &mut Vec<Composition>) {
        if slots == 1 {
            cur.push(rest);
            out.push(Composition(cur.clone()));
            cur.pop();
            return;
        }
        for x in 0..=rest {
            cur.push(x);
            go(rest - x, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if len > 0 {
        go(total, len, &mut Vec::new(), &mut out);
    }
    out
}

/// Every tuple of `len` nonnegative integers with sum at most `max_total`.
pub fn bounded_tuples(max_total: usize, len: usize) -> Vec<Vec<usize>> {
    (0..=max_total)
        .flat_map(|t| compositions(t, len))
        .map(|c| c.0)
        .chain(if len == 0 { Some(Vec::new()) } else { None })
        .collect()
}

fn check_len(m: &Composition, mu: &[Rational]) -> Result<()> {
    if m.0.len() != mu.len() {
        return domain(format!(
            "composition has {} levels, measure has {}",
            m.0.len(),
            mu.len()
        ));
    }
    Ok(())
}

/// `∏_{i=1}^{k} (i − 1 − x)`.
pub fn shifted_falling(k: usize, x: &Rational) -> Rational {
    (1..=k).map(|i| Rational::from(i - 1) - x).product()
}

/// Sum over level matrices `k_{i,j}` with `Σ_i i k_{i,j} = m_j`:
/// `∏_j μ(j)^{κ_j} · ∏_j m_j! · (−1)^{Σκ − 1} / ∏_{i,j} i^{k_{i,j}} k_{i,j}!`.
///
/// The all-zero composition returns 0. `mu` need not be normalized.
pub fn f_partition_sum(m: &Composition, mu: &[Rational]) -> Result<Rational> {
    check_len(m, mu)?;
    if m.is_zero() {
        return Ok(Rational::zero());
    }
    let numer_fact: Rational = m.0.iter().map(|&mj| Rational::from(factorial(mj))).product();
    let mut total = Rational::zero();
    for lm in enumerate_level_matrices(&m.0) {
        let mut kappa_total = 0usize;
        let mut term = numer_fact.clone();
        for (j, col) in lm.columns().iter().enumerate() {
            let kappa: usize = col.iter().sum();
            kappa_total += kappa;
            term *= mu[j].pow(kappa as u32);
            for (i, &k) in col.iter().enumerate() {
                let d = Rational::from(factorial(k)) * Rational::from(i + 1).pow(k as u32);
                term = term.checked_div(&d)?;
            }
        }
        if kappa_total.is_multiple_of(2) {
            term = -term;
        }
        total += term;
    }
    Ok(total)
}

/// `−∏_j ∏_{i=1}^{m_j} (i − 1 − μ(j))`; the all-zero composition returns 0.
pub fn f_closed_form(m: &Composition, mu: &[Rational]) -> Result<Rational> {
    check_len(m, mu)?;
    if m.is_zero() {
        return Ok(Rational::zero());
    }
    Ok(-m
        .0
        .iter()
        .zip(mu)
        .map(|(&mj, x)| shifted_falling(mj, x))
        .product::<Rational>())
}

/// `F_m` straight from `Σ_σ c_{λ(σ)} ∏_blocks E_block` with `f_i` the
/// indicator of level `J(i)` (block layout): a block contributes `μ(j)` when
/// all its members sit on level `j`, and 0 otherwise.
pub fn f_definitional(m: &Composition, mu: &[Rational]) -> Result<Rational> {
    check_len(m, mu)?;
    if m.is_zero() {
        return Ok(Rational::zero());
    }
    let levels = m.block_levels();
    let mut total = Rational::zero();
    for sigma in enumerate_set_partitions(levels.len())? {
        let mut prod = Rational::one();
        for block in sigma.blocks() {
            let l = levels[block[0] - 1];
            if block.iter().any(|&e| levels[e - 1] != l) {
                prod = Rational::zero();
                break;
            }
            prod *= &mu[l - 1];
        }
        if !prod.is_zero() {
            total += c_lambda(&sigma.shape()) * prod;
        }
    }
    Ok(total)
}

/// `B(m_1..m_{N−1})` for `n` functions:
/// `−Σ_{i_1..i_{N−1}} ∏_j C(Σ_{s≤j} m_s − Σ_{s<j} i_s, i_j) ∏_{i=1}^{i_j}(i−1−μ(j))
///  · ∏_{i=1}^{n−Σ i_s}(i−1−μ(N))`, with `0 ≤ i_j ≤ Σ_{s≤j} m_s − Σ_{s<j} i_s`.
pub fn b_formula(m_prefix: &[usize], n: usize, mu: &[Rational]) -> Result<Rational> {
    if mu.len() != m_prefix.len() + 1 {
        return domain(format!(
            "prefix of length {} needs a measure on {} points",
            m_prefix.len(),
            m_prefix.len() + 1
        ));
    }
    if m_prefix.iter().sum::<usize>() > n {
        return domain("prefix occupies more than n functions");
    }

    fn go(j: usize, avail_before: usize, used: usize, m: &[usize], n: usize, mu: &[Rational]) -> Rational {
        if j == m.len() {
            return shifted_falling(n - used, &mu[m.len()]);
        }
        let avail = avail_before + m[j];
        (0..=avail)
            .map(|i| {
                let w = Rational::from(binomial(avail, i)) * shifted_falling(i, &mu[j]);
                if w.is_zero() {
                    return w;
                }
                w * go(j + 1, avail - i, used + i, m, n, mu)
            })
            .sum()
    }

    Ok(-go(0, 0, 0, m_prefix, n, mu))
}

/// Increment monomial with the block layout of `(m_prefix, n − Σ m_prefix)`.
pub fn layout_monomial(m_prefix: &[usize], n: usize) -> Monomial {
    let mut m = m_prefix.to_vec();
    m.push(n - m_prefix.iter().sum::<usize>());
    Monomial::from_levels(&Composition(m).block_levels())
}

/// Coefficient of the layout monomial in the brute-force expansion of `E_n`.
pub fn b_oracle(m_prefix: &[usize], n: usize, space: &ChainSpace, budget: usize) -> Result<Rational> {
    if space.len() != m_prefix.len() + 1 {
        return domain("prefix length must be N − 1");
    }
    if m_prefix.iter().sum::<usize>() > n {
        return domain("prefix occupies more than n functions");
    }
    let poly = expand_e_n(space, n, budget)?;
    Ok(poly.coefficient(&layout_monomial(m_prefix, n)))
}

/// Oracle lookup against an expansion computed once.
pub fn b_oracle_from(expansion: &IncrementPolynomial, m_prefix: &[usize], n: usize) -> Rational {
    expansion.coefficient(&layout_monomial(m_prefix, n))
}

/// `Σ_J F_{m(J)} ∏_i (Σ_{t≤J(i)} a_{i,t})` over all level assignments
/// `J : [n] → [N]`, using the closed form for `F`.
pub fn reconstruct_from_closed_form(space: &ChainSpace, n: usize, budget: usize) -> Result<IncrementPolynomial> {
    if n == 0 || n > MAX_EN_N {
        return config(format!("n = {n} outside 1..={MAX_EN_N}"));
    }
    let levels = space.len();
    let count = levels.checked_pow(n as u32).unwrap_or(usize::MAX);
    if count > budget {
        return config(format!("reconstruction needs {count} assignments, budget is {budget}"));
    }
    let mut f_cache: BTreeMap<Composition, Rational> = BTreeMap::new();
    let mut total = IncrementPolynomial::zero();
    let mut assignment = vec![1usize; n];
    loop {
        let m = Composition::from_levels(&assignment, levels);
        let f = match f_cache.get(&m) {
            Some(f) => f.clone(),
            None => {
                let f = f_closed_form(&m, space.mu())?;
                f_cache.insert(m, f.clone());
                f
            }
        };
        if !f.is_zero() {
            let mut prod = IncrementPolynomial::constant(f);
            for (i, &j) in assignment.iter().enumerate() {
                prod = prod.mul(&IncrementPolynomial::prefix_sum(i + 1, j))?;
            }
            total.add_assign(&prod);
        }
        // odometer over [N]^n
        let mut k = 0;
        while k < n && assignment[k] == levels {
            assignment[k] = 1;
            k += 1;
        }
        if k == n {
            break;
        }
        assignment[k] += 1;
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonomialCheck {
    /// Level of each function's increment, `a_{i, levels[i-1]}`.
    pub levels: Vec<usize>,
    pub formula: Rational,
    pub oracle: Rational,
    #[serde(rename = "match")]
    pub matches: bool,
    pub nonnegative: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct E200Report {
    #[serde(rename = "N")]
    pub levels: usize,
    pub n: usize,
    pub mu: Vec<Rational>,
    pub monomials_checked: usize,
    pub all_match: bool,
    pub all_nonnegative: bool,
    pub mismatches: Vec<MonomialCheck>,
    pub negatives: Vec<MonomialCheck>,
    /// Every monomial of the union of supports, sorted.
    pub monomials: Vec<MonomialCheck>,
}

/// Rebuilds the increment expansion from closed-form `F` values and checks
/// it against the brute-force expansion term by term, plus nonnegativity of
/// every coefficient.
pub fn verify_e200(space: &ChainSpace, n: usize, budget: usize) -> Result<E200Report> {
    let oracle = expand_e_n(space, n, budget)?;
    let formula = reconstruct_from_closed_form(space, n, budget)?;
    let mut keys: Vec<&Monomial> = oracle.terms().map(|(m, _)| m).collect();
    keys.extend(formula.terms().map(|(m, _)| m));
    keys.sort();
    keys.dedup();
    let monomials: Vec<MonomialCheck> = keys
        .into_iter()
        .map(|m| {
            let f = formula.coefficient(m);
            let o = oracle.coefficient(m);
            MonomialCheck {
                levels: m.levels(n).expect("degree-n monomial covering every function"),
                matches: f == o,
                nonnegative: o.is_nonnegative() && f.is_nonnegative(),
                formula: f,
                oracle: o,
            }
        })
        .collect();
    let mismatches: Vec<_> = monomials.iter().filter(|c| !c.matches).cloned().collect();
    let negatives: Vec<_> = monomials.iter().filter(|c| !c.nonnegative).cloned().collect();
    Ok(E200Report {
        levels: space.len(),
        n,
        mu: space.mu().to_vec(),
        monomials_checked: monomials.len(),
        all_match: mismatches.is_empty(),
        all_nonnegative: negatives.is_empty(),
        mismatches,
        negatives,
        monomials,
    })
}

/// Claimed value `μ(j)` of the single-1 base case versus what the formula
/// and the expansion actually give.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseCaseCertificate {
    #[serde(rename = "N")]
    pub levels: usize,
    pub mu: Vec<Rational>,
    /// 1-based level carrying the single function.
    pub position: usize,
    pub m_prefix: Vec<usize>,
    pub claimed: Rational,
    pub formula: Rational,
    pub oracle: Rational,
    pub formula_matches_oracle: bool,
    pub claim_matches_oracle: bool,
}

/// For `n = 1` and each position `j`, compares `B` with a single function on
/// level `j` against the claimed base value `μ(j)`. The oracle value is the
/// tail mass `Σ_{t≥j} μ(t)`.
pub fn base_case_certificates(space: &ChainSpace) -> Result<Vec<BaseCaseCertificate>> {
    let levels = space.len();
    let expansion = expand_e_n(space, 1, usize::MAX)?;
    (1..=levels)
        .map(|position| {
            let mut m_prefix = vec![0; levels - 1];
            if position < levels {
                m_prefix[position - 1] = 1;
            }
            let formula = b_formula(&m_prefix, 1, space.mu())?;
            let oracle = b_oracle_from(&expansion, &m_prefix, 1);
            let claimed = space.mu()[position - 1].clone();
            Ok(BaseCaseCertificate {
                levels,
                mu: space.mu().to_vec(),
                position,
                formula_matches_oracle: formula == oracle,
                claim_matches_oracle: claimed == oracle,
                m_prefix,
                claimed,
                formula,
                oracle,
            })
        })
        .collect()
}
