//! Finite probability spaces (chains `{1..N}` and subset lattices `2^X`),
//! nonnegative monotone functions on them, the FKG predicate and seeded
//! generators.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::Rational;
use crate::error::{config, domain, Error, Result};

/// Default cap on chain length for generators.
pub const MAX_CHAIN_LEN: usize = 8;
/// Default cap on `|X|` for subset lattices.
pub const MAX_GROUND_SIZE: usize = 4;
/// Default largest denominator drawn by generators.
pub const DEFAULT_MAX_DENOMINATOR: u32 = 64;

fn check_measure(mu: &[Rational]) -> Result<()> {
    if mu.is_empty() {
        return domain("measure has no points");
    }
    if let Some((i, m)) = mu.iter().enumerate().find(|(_, m)| m.is_negative()) {
        return domain(format!("negative mass {m} at index {i}"));
    }
    let total: Rational = mu.iter().sum();
    if !total.is_one() {
        return domain(format!("measure sums to {total}, not 1"));
    }
    Ok(())
}

/// Totally ordered space `{1..N}` with probability weights `mu[j-1] = μ(j)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainSpace {
    mu: Vec<Rational>,
}

impl ChainSpace {
    pub fn new(mu: Vec<Rational>) -> Result<Self> {
        check_measure(&mu)?;
        Ok(ChainSpace { mu })
    }

    pub fn uniform(len: usize) -> Result<Self> {
        if len == 0 {
            return domain("chain needs at least one point");
        }
        let w = Rational::new(1, len as i64)?;
        Self::new(vec![w; len])
    }

    /// Point mass at the 1-based point `at`.
    pub fn point_mass(len: usize, at: usize) -> Result<Self> {
        if at == 0 || at > len {
            return domain(format!("point {at} outside 1..={len}"));
        }
        let mut mu = vec![Rational::zero(); len];
        mu[at - 1] = Rational::one();
        Self::new(mu)
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    pub fn mu(&self) -> &[Rational] {
        &self.mu
    }

    /// Indices (1-based) carrying zero mass; reported, not rejected.
    pub fn zero_points(&self) -> Vec<usize> {
        zero_indices(&self.mu).into_iter().map(|i| i + 1).collect()
    }
}

/// Power set of `X = {1..ground_size}`; subsets are bitmasks, bit `i-1` for
/// element `i`, and `mu[mask] = μ(A)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetLattice {
    ground_size: usize,
    mu: Vec<Rational>,
}

impl SubsetLattice {
    pub fn new(ground_size: usize, mu: Vec<Rational>) -> Result<Self> {
        if ground_size > 16 {
            return config(format!("|X| = {ground_size} is too large"));
        }
        if mu.len() != 1 << ground_size {
            return domain(format!(
                "lattice over |X| = {ground_size} needs {} masses, got {}",
                1usize << ground_size,
                mu.len()
            ));
        }
        check_measure(&mu)?;
        Ok(SubsetLattice { ground_size, mu })
    }

    pub fn uniform(ground_size: usize) -> Result<Self> {
        let size = 1usize << ground_size;
        Self::new(ground_size, vec![Rational::new(1, size as i64)?; size])
    }

    /// Product measure `μ(A) = ∏_{i∈A} p_i ∏_{i∉A} (1 − p_i)`.
    pub fn product(p: &[Rational]) -> Result<Self> {
        if p.iter().any(|x| x.is_negative() || *x > Rational::one()) {
            return domain("product measure marginals must lie in [0, 1]");
        }
        let n = p.len();
        let mu = (0..1usize << n)
            .map(|mask| {
                (0..n)
                    .map(|i| {
                        if mask >> i & 1 == 1 {
                            p[i].clone()
                        } else {
                            Rational::one() - &p[i]
                        }
                    })
                    .product()
            })
            .collect();
        Self::new(n, mu)
    }

    pub fn ground_size(&self) -> usize {
        self.ground_size
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    pub fn mu(&self) -> &[Rational] {
        &self.mu
    }

    pub fn zero_subsets(&self) -> Vec<usize> {
        zero_indices(&self.mu)
    }
}

fn zero_indices(mu: &[Rational]) -> Vec<usize> {
    mu.iter()
        .enumerate()
        .filter(|(_, m)| m.is_zero())
        .map(|(i, _)| i)
        .collect()
}

/// Either kind of finite space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Space {
    Chain(ChainSpace),
    Lattice(SubsetLattice),
}

impl Space {
    /// Number of points (`N`, or `2^|X|`).
    pub fn len(&self) -> usize {
        self.mu().len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu().is_empty()
    }

    pub fn mu(&self) -> &[Rational] {
        match self {
            Space::Chain(c) => c.mu(),
            Space::Lattice(l) => l.mu(),
        }
    }

    pub fn is_chain(&self) -> bool {
        matches!(self, Space::Chain(_))
    }

    /// Checks `values` is nonnegative and order-preserving on this space.
    pub fn check_monotone(&self, values: &[Rational]) -> Result<()> {
        if values.len() != self.len() {
            return domain(format!(
                "function has {} values, space has {} points",
                values.len(),
                self.len()
            ));
        }
        if let Some(v) = values.iter().find(|v| v.is_negative()) {
            return domain(format!("negative function value {v}"));
        }
        match self {
            Space::Chain(_) => {
                if let Some(j) = values.windows(2).position(|w| w[0] > w[1]) {
                    return domain(format!("function decreases at point {}", j + 2));
                }
            }
            Space::Lattice(l) => {
                for mask in 0..values.len() {
                    for i in 0..l.ground_size() {
                        let up = mask | 1 << i;
                        if up != mask && values[mask] > values[up] {
                            return domain(format!(
                                "function not monotone: f({mask:#b}) > f({up:#b})"
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

impl From<ChainSpace> for Space {
    fn from(c: ChainSpace) -> Self {
        Space::Chain(c)
    }
}

impl From<SubsetLattice> for Space {
    fn from(l: SubsetLattice) -> Self {
        Space::Lattice(l)
    }
}

/// Nonnegative nondecreasing function, stored by value at each point of its
/// space (bitmask order on lattices).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonotoneFn {
    values: Vec<Rational>,
}

impl MonotoneFn {
    pub fn new(space: &Space, values: Vec<Rational>) -> Result<Self> {
        space.check_monotone(&values)?;
        Ok(MonotoneFn { values })
    }

    pub fn constant(space: &Space, c: Rational) -> Result<Self> {
        Self::new(space, vec![c; space.len()])
    }

    /// Chain function from nonnegative increments.
    pub fn from_increments(increments: &[Rational]) -> Result<Self> {
        Ok(MonotoneFn {
            values: increments_to_values(increments)?,
        })
    }

    /// Lattice function `f(A) = Σ_{S ⊆ A} g(S)` for nonnegative `g`.
    pub fn from_mobius(lattice: &SubsetLattice, g: &[Rational]) -> Result<Self> {
        if g.len() != lattice.len() {
            return domain("Möbius weights must cover every subset");
        }
        if g.iter().any(Rational::is_negative) {
            return domain("Möbius weights must be nonnegative");
        }
        Ok(MonotoneFn {
            values: subset_sums(g),
        })
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn value(&self, point: usize) -> &Rational {
        &self.values[point]
    }

    /// Increments `a_j = f(j) − f(j−1)` (chain reading).
    pub fn increments(&self) -> Vec<Rational> {
        values_to_increments(&self.values).expect("validated monotone values")
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Rational::is_zero)
    }
}

/// Zeta transform over the subset lattice: `out[A] = Σ_{S ⊆ A} g[S]`.
fn subset_sums(g: &[Rational]) -> Vec<Rational> {
    let mut f = g.to_vec();
    let bits = f.len().trailing_zeros();
    for i in 0..bits {
        for mask in 0..f.len() {
            if mask >> i & 1 == 1 {
                let lower = f[mask ^ 1 << i].clone();
                f[mask] += lower;
            }
        }
    }
    f
}

pub fn increments_to_values(a: &[Rational]) -> Result<Vec<Rational>> {
    if let Some((j, x)) = a.iter().enumerate().find(|(_, x)| x.is_negative()) {
        return domain(format!("negative increment {x} at level {}", j + 1));
    }
    let mut acc = Rational::zero();
    Ok(a.iter()
        .map(|x| {
            acc += x;
            acc.clone()
        })
        .collect())
}

pub fn values_to_increments(f: &[Rational]) -> Result<Vec<Rational>> {
    if let Some(v) = f.first() {
        if v.is_negative() {
            return domain(format!("negative value {v}"));
        }
    }
    let mut prev = Rational::zero();
    f.iter()
        .enumerate()
        .map(|(j, v)| {
            let d = v - &prev;
            if d.is_negative() {
                return domain(format!("values decrease at level {}", j + 1));
            }
            prev = v.clone();
            Ok(d)
        })
        .collect()
}

/// `⟨f⟩_μ = Σ_x μ(x) f(x)`.
pub fn expectation(space: &Space, f: &MonotoneFn) -> Result<Rational> {
    if f.values.len() != space.len() {
        return domain(format!(
            "function has {} values, space has {} points",
            f.values.len(),
            space.len()
        ));
    }
    Ok(space
        .mu()
        .iter()
        .zip(&f.values)
        .map(|(m, v)| m * v)
        .sum())
}

/// One failing pair of the FKG condition, `lhs = μ(A∩B)μ(A∪B)`,
/// `rhs = μ(A)μ(B)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FkgViolation {
    pub a: usize,
    pub b: usize,
    pub lhs: Rational,
    pub rhs: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FkgReport {
    pub holds: bool,
    /// Ordered pairs examined (`4^|X|`).
    pub pairs_checked: usize,
    /// Ordered pairs where the two sides are equal.
    pub equalities: usize,
    /// Violations with `a < b` (the condition is symmetric in `A`, `B`).
    pub violations: Vec<FkgViolation>,
}

/// `μ(A∩B)·μ(A∪B) ≥ μ(A)·μ(B)` for every pair of subsets.
pub fn fkg_check(lattice: &SubsetLattice) -> FkgReport {
    let mu = lattice.mu();
    let size = mu.len();
    let mut equalities = 0;
    let mut violations = Vec::new();
    for a in 0..size {
        for b in 0..size {
            let lhs = &mu[a & b] * &mu[a | b];
            let rhs = &mu[a] * &mu[b];
            if lhs == rhs {
                equalities += 1;
            } else if lhs < rhs && a < b {
                violations.push(FkgViolation { a, b, lhs, rhs });
            }
        }
    }
    FkgReport {
        holds: violations.is_empty(),
        pairs_checked: size * size,
        equalities,
        violations,
    }
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform rational `k/d` with `d ∈ [1, max_den]`, `k ∈ [0, d]`.
pub(crate) fn unit_rational<R: Rng>(rng: &mut R, max_den: u32) -> Rational {
    let d = rng.gen_range(1..=max_den.max(1));
    let k = rng.gen_range(0..=d);
    Rational::new(k, d).expect("positive denominator")
}

fn positive_rational<R: Rng>(rng: &mut R, max_den: u32) -> Rational {
    let d = rng.gen_range(1..=max_den.max(1));
    let k = rng.gen_range(1..=d);
    Rational::new(k, d).expect("positive denominator")
}

/// Normalizes nonnegative weights to a probability vector; all-zero weights
/// become a point mass at index 0.
fn normalize(mut w: Vec<Rational>) -> Vec<Rational> {
    let total: Rational = w.iter().sum();
    if total.is_zero() {
        w[0] = Rational::one();
        return w;
    }
    w.iter()
        .map(|x| x.checked_div(&total).expect("positive total"))
        .collect()
}

/// How a chain measure is drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainMeasureKind {
    /// Every point gets positive mass.
    Full,
    /// Each point is zeroed with probability 1/3.
    Sparse,
    /// All mass on one random point.
    PointMass,
}

pub fn random_chain_space(
    len: usize,
    kind: ChainMeasureKind,
    seed: u64,
    max_denominator: u32,
) -> Result<ChainSpace> {
    let mut rng = rng_from_seed(seed);
    random_chain_space_with(&mut rng, len, kind, max_denominator)
}

pub(crate) fn random_chain_space_with<R: Rng>(
    rng: &mut R,
    len: usize,
    kind: ChainMeasureKind,
    max_denominator: u32,
) -> Result<ChainSpace> {
    if len == 0 || len > MAX_CHAIN_LEN {
        return config(format!("chain length {len} outside 1..={MAX_CHAIN_LEN}"));
    }
    check_denominator(max_denominator)?;
    match kind {
        ChainMeasureKind::PointMass => ChainSpace::point_mass(len, rng.gen_range(1..=len)),
        ChainMeasureKind::Full => {
            let w = (0..len).map(|_| positive_rational(rng, max_denominator)).collect();
            ChainSpace::new(normalize(w))
        }
        ChainMeasureKind::Sparse => {
            let mut w: Vec<Rational> = (0..len)
                .map(|_| {
                    if rng.gen_ratio(1, 3) {
                        Rational::zero()
                    } else {
                        positive_rational(rng, max_denominator)
                    }
                })
                .collect();
            if w.iter().all(Rational::is_zero) {
                let j = rng.gen_range(0..len);
                w[j] = Rational::one();
            }
            ChainSpace::new(normalize(w))
        }
    }
}

fn check_denominator(max_denominator: u32) -> Result<()> {
    if max_denominator == 0 {
        return config("max_denominator must be >= 1");
    }
    Ok(())
}

/// Which construction draws a lattice monotone function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MonotoneGenerator {
    /// `f(A) = Σ_{S⊆A} g(S)` with random `g ≥ 0` (many zeros).
    Mobius,
    /// Arbitrary nonnegative values, then `f(A) = max_{B⊆A} v(B)`.
    Repair,
    /// Scaled indicator of an up-set `{A : A ⊇ S}`.
    Step,
}

pub fn random_monotone_fn(
    space: &Space,
    generator: MonotoneGenerator,
    seed: u64,
    max_denominator: u32,
) -> Result<MonotoneFn> {
    let mut rng = rng_from_seed(seed);
    random_monotone_fn_with(&mut rng, space, generator, max_denominator)
}

pub(crate) fn random_monotone_fn_with<R: Rng>(
    rng: &mut R,
    space: &Space,
    generator: MonotoneGenerator,
    max_denominator: u32,
) -> Result<MonotoneFn> {
    check_denominator(max_denominator)?;
    let values = match (space, generator) {
        (Space::Chain(c), MonotoneGenerator::Step) => {
            let at = rng.gen_range(0..c.len());
            let height = positive_rational(rng, max_denominator);
            (0..c.len())
                .map(|j| if j >= at { height.clone() } else { Rational::zero() })
                .collect()
        }
        (Space::Chain(c), _) => {
            let a: Vec<Rational> = (0..c.len())
                .map(|_| {
                    if rng.gen_ratio(1, 4) {
                        Rational::zero()
                    } else {
                        unit_rational(rng, max_denominator)
                    }
                })
                .collect();
            increments_to_values(&a)?
        }
        (Space::Lattice(l), MonotoneGenerator::Mobius) => {
            let g: Vec<Rational> = (0..l.len())
                .map(|_| {
                    if rng.gen_ratio(1, 2) {
                        Rational::zero()
                    } else {
                        unit_rational(rng, max_denominator)
                    }
                })
                .collect();
            subset_sums(&g)
        }
        (Space::Lattice(l), MonotoneGenerator::Repair) => {
            let v: Vec<Rational> = (0..l.len()).map(|_| unit_rational(rng, max_denominator)).collect();
            monotone_repair(&v)
        }
        (Space::Lattice(l), MonotoneGenerator::Step) => {
            let s = rng.gen_range(0..l.len());
            let height = positive_rational(rng, max_denominator);
            (0..l.len())
                .map(|a| if a & s == s { height.clone() } else { Rational::zero() })
                .collect()
        }
    };
    let f = MonotoneFn::new(space, values)?;
    Ok(f)
}

/// `f(A) = max_{B ⊆ A} v(B)`, the least monotone majorant on `2^X`.
pub fn monotone_repair(v: &[Rational]) -> Vec<Rational> {
    let mut f = v.to_vec();
    let bits = f.len().trailing_zeros();
    for i in 0..bits {
        for mask in 0..f.len() {
            if mask >> i & 1 == 1 {
                let lower = &f[mask ^ 1 << i];
                if *lower > f[mask] {
                    f[mask] = lower.clone();
                }
            }
        }
    }
    f
}

/// Parameters of a pairwise log-supermodular weight
/// `w(A) = ∏_{i∈A} u_i ∏_{{i,j}⊆A} J_{ij}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsingWeights {
    pub fields: Vec<Rational>,
    /// Upper triangle in row order: `(0,1), (0,2), …, (1,2), …`.
    pub couplings: Vec<Rational>,
}

impl IsingWeights {
    pub fn measure(&self) -> Result<SubsetLattice> {
        let n = self.fields.len();
        if self.couplings.len() != n * n.saturating_sub(1) / 2 {
            return domain("coupling count does not match ground size");
        }
        if self.fields.iter().any(|u| !u.is_nonnegative() || u.is_zero()) {
            return domain("fields must be positive");
        }
        if self.couplings.iter().any(|j| *j < Rational::one()) {
            return domain("couplings must be >= 1");
        }
        let w = (0..1usize << n)
            .map(|mask| {
                let mut x = Rational::one();
                let mut c = 0;
                for i in 0..n {
                    if mask >> i & 1 == 1 {
                        x *= &self.fields[i];
                    }
                    for j in i + 1..n {
                        if mask >> i & 1 == 1 && mask >> j & 1 == 1 {
                            x *= &self.couplings[c];
                        }
                        c += 1;
                    }
                }
                x
            })
            .collect();
        SubsetLattice::new(n, normalize(w))
    }
}

/// Random FKG measure on `2^X`.
///
/// Weights are pairwise log-supermodular (`u_i > 0`, `J_ij ≥ 1`); roughly a
/// third of draws use couplings barely above 1, and a quarter restrict the
/// support to an interval `[L, U]` of the lattice (a sublattice, so zeros do
/// not break the condition). Every output is re-validated with [`fkg_check`].
pub fn random_fkg_measure(ground_size: usize, seed: u64, max_denominator: u32) -> Result<SubsetLattice> {
    let mut rng = rng_from_seed(seed);
    random_fkg_measure_with(&mut rng, ground_size, max_denominator, MAX_GROUND_SIZE)
}

pub(crate) fn random_fkg_measure_with<R: Rng>(
    rng: &mut R,
    ground_size: usize,
    max_denominator: u32,
    cap: usize,
) -> Result<SubsetLattice> {
    if ground_size == 0 || ground_size > cap {
        return config(format!("ground size {ground_size} outside 1..={cap}"));
    }
    check_denominator(max_denominator)?;
    let fields = (0..ground_size)
        .map(|_| {
            let d = rng.gen_range(1..=max_denominator);
            let k = rng.gen_range(1..=2 * d);
            Rational::new(k, d).expect("positive denominator")
        })
        .collect();
    let near_degenerate = rng.gen_ratio(1, 3);
    let npairs = ground_size * (ground_size - 1) / 2;
    let couplings = (0..npairs)
        .map(|_| {
            let bump = if near_degenerate {
                let d = rng.gen_range(8..=8 * max_denominator.max(8));
                Rational::new(rng.gen_range(0..=1), d).expect("positive denominator")
            } else if rng.gen_ratio(1, 3) {
                Rational::zero()
            } else {
                unit_rational(rng, max_denominator) * Rational::from(2i64)
            };
            Rational::one() + bump
        })
        .collect();
    let weights = IsingWeights { fields, couplings };
    let mut lattice = weights.measure()?;
    if rng.gen_ratio(1, 4) {
        let full = (1usize << ground_size) - 1;
        let lower = rng.gen_range(0..=full);
        let upper = lower | rng.gen_range(0..=full);
        let mu: Vec<Rational> = lattice
            .mu
            .iter()
            .enumerate()
            .map(|(a, m)| {
                if a & lower == lower && a | upper == upper {
                    m.clone()
                } else {
                    Rational::zero()
                }
            })
            .collect();
        lattice = SubsetLattice::new(ground_size, normalize(mu))?;
    }
    let report = fkg_check(&lattice);
    assert!(
        report.holds,
        "FKG generator produced a violating measure: {:?}",
        report.violations.first()
    );
    Ok(lattice)
}

/// Every FKG probability measure on `2^X` (`|X| ≤ 2`) whose unnormalized
/// weights are integers in `0..=max_weight`, deduplicated after normalizing.
pub fn enumerate_fkg_grid(ground_size: usize, max_weight: u32) -> Result<Vec<SubsetLattice>> {
    if ground_size == 0 || ground_size > 2 {
        return config("grid enumeration supports |X| <= 2");
    }
    let size = 1usize << ground_size;
    let base = max_weight as usize + 1;
    let mut out: Vec<SubsetLattice> = Vec::new();
    for code in 0..base.pow(size as u32) {
        let mut c = code;
        let w: Vec<Rational> = (0..size)
            .map(|_| {
                let x = c % base;
                c /= base;
                Rational::from_integer(BigInt::from(x))
            })
            .collect();
        if w.iter().all(Rational::is_zero) {
            continue;
        }
        let lattice = SubsetLattice::new(ground_size, normalize(w))?;
        if fkg_check(&lattice).holds && !out.contains(&lattice) {
            out.push(lattice);
        }
    }
    Ok(out)
}

impl std::str::FromStr for MonotoneGenerator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mobius" => Ok(Self::Mobius),
            "repair" => Ok(Self::Repair),
            "step" => Ok(Self::Step),
            _ => Err(Error::Parse(format!("unknown generator {s:?}"))),
        }
    }
}
