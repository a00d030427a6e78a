//! Set partitions, integer partitions (shapes), level matrices and the
//! counting identities built on them.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::algebra::{Rational, UniPoly};
use crate::error::{config, domain, Result};

/// Largest `n` for which set partitions are enumerated.
pub const MAX_SET_PARTITION_N: usize = 10;
/// Largest `n` accepted by the rising-factorial identity check.
pub const MAX_IDENTITY_N: usize = 12;

const FACTORIAL_CACHE: usize = 64;

fn factorial_table() -> &'static [BigUint] {
    static TABLE: OnceLock<Vec<BigUint>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(FACTORIAL_CACHE + 1);
        t.push(BigUint::one());
        for k in 1..=FACTORIAL_CACHE {
            let next = &t[k - 1] * BigUint::from(k);
            t.push(next);
        }
        t
    })
}

pub fn factorial(n: usize) -> BigUint {
    match factorial_table().get(n) {
        Some(f) => f.clone(),
        None => (FACTORIAL_CACHE + 1..=n).fold(factorial_table()[FACTORIAL_CACHE].clone(), |acc, k| {
            acc * BigUint::from(k)
        }),
    }
}

/// `C(a, b)`, zero when `b > a`.
pub fn binomial(a: usize, b: usize) -> BigUint {
    if b > a {
        return BigUint::from(0u32);
    }
    factorial(a) / (factorial(b) * factorial(a - b))
}

/// Partition of `{1..n}` into nonempty blocks, blocks sorted by least element
/// and each block sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SetPartition {
    blocks: Vec<Vec<usize>>,
}

impl SetPartition {
    /// Validates that `blocks` partition `{1..n}` and canonicalizes the order.
    pub fn new(n: usize, mut blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n + 1];
        for block in &mut blocks {
            if block.is_empty() {
                return domain("empty block in set partition");
            }
            block.sort_unstable();
            for &e in block.iter() {
                if e == 0 || e > n {
                    return domain(format!("element {e} outside 1..={n}"));
                }
                if seen[e] {
                    return domain(format!("element {e} appears in two blocks"));
                }
                seen[e] = true;
            }
        }
        if seen.iter().skip(1).any(|s| !s) {
            return domain(format!("blocks do not cover 1..={n}"));
        }
        blocks.sort_by_key(|b| b[0]);
        Ok(SetPartition { blocks })
    }

    /// From a restricted growth string `rgs[k]` = block index of element k+1.
    fn from_rgs(rgs: &[usize]) -> Self {
        let nblocks = rgs.iter().max().map_or(0, |m| m + 1);
        let mut blocks = vec![Vec::new(); nblocks];
        for (k, &b) in rgs.iter().enumerate() {
            blocks[b].push(k + 1);
        }
        SetPartition { blocks }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn ground_size(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    /// Block sizes sorted nonincreasing.
    pub fn shape(&self) -> IntegerPartition {
        IntegerPartition::from_unsorted(self.blocks.iter().map(Vec::len).collect())
    }
}

/// Streams every set partition of `{1..n}` in restricted-growth-string
/// lexicographic order.
pub struct SetPartitions {
    rgs: Vec<usize>,
    // max of rgs[0..k], per position
    maxes: Vec<usize>,
    done: bool,
}

impl Iterator for SetPartitions {
    type Item = SetPartition;

    fn next(&mut self) -> Option<SetPartition> {
        if self.done {
            return None;
        }
        let current = SetPartition::from_rgs(&self.rgs);
        // Advance: rightmost position that can still grow.
        let n = self.rgs.len();
        let mut k = n;
        loop {
            if k <= 1 {
                self.done = true;
                break;
            }
            k -= 1;
            if self.rgs[k] <= self.maxes[k - 1] {
                self.rgs[k] += 1;
                self.maxes[k] = self.maxes[k - 1].max(self.rgs[k]);
                for t in k + 1..n {
                    self.rgs[t] = 0;
                    self.maxes[t] = self.maxes[k];
                }
                break;
            }
        }
        Some(current)
    }
}

pub fn enumerate_set_partitions(n: usize) -> Result<SetPartitions> {
    if n == 0 {
        return domain("set partitions need n >= 1");
    }
    if n > MAX_SET_PARTITION_N {
        return config(format!("n = {n} exceeds set-partition cap {MAX_SET_PARTITION_N}"));
    }
    Ok(SetPartitions {
        rgs: vec![0; n],
        maxes: vec![0; n],
        done: false,
    })
}

/// Integer partition `λ_1 ≥ … ≥ λ_ℓ ≥ 1`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct IntegerPartition {
    parts: Vec<usize>,
}

impl IntegerPartition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.contains(&0) {
            return domain("partition parts must be positive");
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return domain("partition parts must be nonincreasing");
        }
        Ok(IntegerPartition { parts })
    }

    pub(crate) fn from_unsorted(mut parts: Vec<usize>) -> Self {
        parts.sort_unstable_by(|a, b| b.cmp(a));
        IntegerPartition { parts }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// Number of parts ℓ(λ).
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn size(&self) -> usize {
        self.parts.iter().sum()
    }

    /// `(i, q_i)` for every part size `i` that occurs, ascending in `i`.
    pub fn multiplicities(&self) -> BTreeMap<usize, usize> {
        let mut q = BTreeMap::new();
        for &p in &self.parts {
            *q.entry(p).or_insert(0) += 1;
        }
        q
    }
}

impl std::fmt::Display for IntegerPartition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.parts.iter().map(usize::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

pub fn shape(sigma: &SetPartition) -> IntegerPartition {
    sigma.shape()
}

/// All partitions of `n` in reverse-lexicographic order: `(n)`, `(n-1,1)`, …,
/// `(1,…,1)`. `n = 0` yields the single empty partition.
pub fn integer_partitions(n: usize) -> Vec<IntegerPartition> {
    fn go(remaining: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<IntegerPartition>) {
        if remaining == 0 {
            out.push(IntegerPartition { parts: cur.clone() });
            return;
        }
        for p in (1..=max.min(remaining)).rev() {
            cur.push(p);
            go(remaining - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, n, &mut Vec::new(), &mut out);
    out
}

/// `c_λ = (−1)^{ℓ+1} ∏ (λ_i − 1)!`.
pub fn c_lambda(lambda: &IntegerPartition) -> Rational {
    let mag: BigUint = lambda.parts.iter().map(|&p| factorial(p - 1)).product();
    let v = Rational::from(mag);
    if lambda.len() % 2 == 1 {
        v
    } else {
        -v
    }
}

/// Number of set partitions with shape λ: `n! / ∏_i (i!)^{q_i} q_i!`.
pub fn count_shapes(lambda: &IntegerPartition) -> BigUint {
    let denom: BigUint = lambda
        .multiplicities()
        .into_iter()
        .map(|(i, q)| num_traits::pow(factorial(i), q) * factorial(q))
        .product();
    factorial(lambda.size()) / denom
}

/// Nonnegative integer matrix `k_{i,j}` with `Σ_i i·k_{i,j} = m_j` per column.
///
/// Column `j` is stored as a vector whose entry `i − 1` is `k_{i,j}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LevelMatrix {
    columns: Vec<Vec<usize>>,
}

impl LevelMatrix {
    pub fn columns(&self) -> &[Vec<usize>] {
        &self.columns
    }

    /// `k_{i,j}` with 1-based `i`, `j`.
    pub fn k(&self, i: usize, j: usize) -> usize {
        self.columns
            .get(j - 1)
            .and_then(|c| c.get(i - 1))
            .copied()
            .unwrap_or(0)
    }

    /// Column sum `κ_j`.
    pub fn kappa(&self, j: usize) -> usize {
        self.columns.get(j - 1).map_or(0, |c| c.iter().sum())
    }

    pub fn column_weight(&self, j: usize) -> usize {
        self.columns
            .get(j - 1)
            .map_or(0, |c| c.iter().enumerate().map(|(i, k)| (i + 1) * k).sum())
    }
}

/// Multiplicity vector of an integer partition of `m`, length `m`.
fn multiplicity_vector(p: &IntegerPartition, m: usize) -> Vec<usize> {
    let mut v = vec![0; m];
    for &part in p.parts() {
        v[part - 1] += 1;
    }
    v
}

/// Every level matrix for the composition `m`; the count is `∏_j p(m_j)`.
pub fn enumerate_level_matrices(m: &[usize]) -> Vec<LevelMatrix> {
    let per_column: Vec<Vec<Vec<usize>>> = m
        .iter()
        .map(|&mj| {
            integer_partitions(mj)
                .iter()
                .map(|p| multiplicity_vector(p, mj))
                .collect()
        })
        .collect();
    let mut out = vec![LevelMatrix { columns: Vec::new() }];
    for choices in per_column {
        let mut next = Vec::with_capacity(out.len() * choices.len());
        for partial in &out {
            for c in &choices {
                let mut columns = partial.columns.clone();
                columns.push(c.clone());
                next.push(LevelMatrix { columns });
            }
        }
        out = next;
    }
    out
}

/// Left side `Σ_{k: Σ i k_i = n} y^{Σ k_i} / ∏ (k_i! i^{k_i})` as a polynomial.
pub fn cycle_index_poly(n: usize) -> UniPoly {
    let mut total = UniPoly::zero();
    for p in integer_partitions(n) {
        let denom: BigUint = p
            .multiplicities()
            .into_iter()
            .map(|(i, k)| factorial(k) * num_traits::pow(BigUint::from(i), k))
            .product();
        let coeff = Rational::one()
            .checked_div(&Rational::from(denom))
            .expect("positive denominator");
        total = &total + &UniPoly::monomial(coeff, p.len());
    }
    total
}

/// Right side `y (y+1) … (y+n−1) / n!`.
pub fn rising_factorial_poly(n: usize) -> UniPoly {
    let mut acc = UniPoly::constant(Rational::one());
    for k in 0..n {
        acc = &acc * &UniPoly::linear_shift(Rational::from(k));
    }
    let inv = Rational::one()
        .checked_div(&Rational::from(factorial(n)))
        .expect("nonzero factorial");
    acc.scale(&inv)
}

/// Structural equality of both sides of the rising-factorial identity.
pub fn rising_factorial_identity_check(n: usize) -> Result<bool> {
    if n == 0 {
        return domain("identity check needs n >= 1");
    }
    if n > MAX_IDENTITY_N {
        return config(format!("n = {n} exceeds identity cap {MAX_IDENTITY_N}"));
    }
    Ok(cycle_index_poly(n) == rising_factorial_poly(n))
}

/// `Σ_{λ ⊢ n} c_λ · #{σ : λ(σ) = λ}`.
pub fn annihilation_sum(n: usize) -> Rational {
    integer_partitions(n)
        .iter()
        .map(|l| c_lambda(l) * Rational::from(BigInt::from(count_shapes(l))))
        .sum()
}
