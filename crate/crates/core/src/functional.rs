//! Definitional evaluation of `E_δ`, `E_σ`, `E_λ` and
//! `E_n = Σ_{λ⊢n} c_λ E_λ`, plus the symbolic expansion of `E_n` in the
//! increment variables of chain functions.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use crate::algebra::{IncrementPolynomial, Rational};
use crate::error::{config, domain, Result};
use crate::partitions::{c_lambda, enumerate_set_partitions, IntegerPartition, SetPartition, MAX_SET_PARTITION_N};
use crate::spaces::{ChainSpace, MonotoneFn, Space};

/// Default cap on `n` for definitional evaluation.
pub const MAX_EN_N: usize = 7;
/// Default cap on the monomial count `N^n` of [`expand_e_n`].
pub const DEFAULT_MONOMIAL_BUDGET: usize = 1 << 16;

/// A space together with the argument functions `f_1..f_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionalInstance {
    space: Space,
    functions: Vec<MonotoneFn>,
}

impl FunctionalInstance {
    pub fn new(space: Space, functions: Vec<MonotoneFn>) -> Result<Self> {
        if functions.is_empty() {
            return domain("instance needs at least one function");
        }
        for f in &functions {
            space.check_monotone(f.values())?;
        }
        Ok(FunctionalInstance { space, functions })
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn functions(&self) -> &[MonotoneFn] {
        &self.functions
    }

    pub fn n(&self) -> usize {
        self.functions.len()
    }

    fn delta_mask(&self, delta: &[usize]) -> Result<usize> {
        if delta.is_empty() {
            return domain("E_delta needs a nonempty index set");
        }
        let mut mask = 0usize;
        for &i in delta {
            if i == 0 || i > self.n() {
                return domain(format!("function index {i} outside 1..={}", self.n()));
            }
            mask |= 1 << (i - 1);
        }
        Ok(mask)
    }

    /// `E_δ` for every nonempty δ, indexed by bitmask (bit `i−1` ↔ `f_i`).
    /// Entry 0 is 1.
    pub fn delta_table(&self) -> Vec<Rational> {
        let n = self.n();
        let mut table = vec![Rational::zero(); 1 << n];
        let mut prod = vec![Rational::zero(); 1 << n];
        for (x, mu) in self.space.mu().iter().enumerate() {
            if mu.is_zero() {
                continue;
            }
            prod[0] = Rational::one();
            for mask in 1usize..1 << n {
                let low = mask.trailing_zeros() as usize;
                prod[mask] = &prod[mask & (mask - 1)] * self.functions[low].value(x);
            }
            for mask in 1..1 << n {
                table[mask] += mu * &prod[mask];
            }
        }
        table[0] = Rational::one();
        table
    }
}

/// `⟨∏_{i∈δ} f_i⟩_μ` with 1-based function indices.
pub fn e_delta(inst: &FunctionalInstance, delta: &[usize]) -> Result<Rational> {
    let mask = inst.delta_mask(delta)?;
    Ok(inst
        .space
        .mu()
        .iter()
        .enumerate()
        .map(|(x, mu)| {
            let p: Rational = (0..inst.n())
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| inst.functions[i].value(x).clone())
                .product();
            mu * p
        })
        .sum())
}

/// `E_σ = ∏_blocks E_{σ_i}`.
pub fn e_sigma(inst: &FunctionalInstance, sigma: &SetPartition) -> Result<Rational> {
    if sigma.ground_size() != inst.n() {
        return domain(format!(
            "set partition covers {} elements, instance has {} functions",
            sigma.ground_size(),
            inst.n()
        ));
    }
    sigma.blocks().iter().map(|b| e_delta(inst, b)).product()
}

/// `E_λ = Σ_{σ : λ(σ) = λ} E_σ`.
pub fn e_lambda(inst: &FunctionalInstance, lambda: &IntegerPartition) -> Result<Rational> {
    if lambda.size() != inst.n() {
        return domain(format!("{lambda} is not a partition of {}", inst.n()));
    }
    let table = inst.delta_table();
    let class = shape_classes(inst.n())?
        .iter()
        .find(|c| &c.shape == lambda)
        .expect("every partition of n has a shape class");
    Ok(class.sum(&table))
}

/// Set partitions of `{1..n}` grouped by shape, blocks as bitmasks.
struct ShapeClass {
    shape: IntegerPartition,
    coeff: Rational,
    partitions: Vec<Vec<usize>>,
}

impl ShapeClass {
    fn sum(&self, table: &[Rational]) -> Rational {
        self.partitions
            .iter()
            .map(|blocks| blocks.iter().map(|&m| &table[m]).product::<Rational>())
            .sum()
    }
}

fn shape_classes(n: usize) -> Result<&'static [ShapeClass]> {
    static CACHE: [OnceLock<Vec<ShapeClass>>; MAX_SET_PARTITION_N + 1] =
        [const { OnceLock::new() }; MAX_SET_PARTITION_N + 1];
    if n == 0 || n > MAX_SET_PARTITION_N {
        return config(format!("n = {n} outside 1..={MAX_SET_PARTITION_N}"));
    }
    Ok(CACHE[n].get_or_init(|| build_shape_classes(n)))
}

fn build_shape_classes(n: usize) -> Vec<ShapeClass> {
    if n == 0 {
        return Vec::new();
    }
    let mut by_shape: BTreeMap<IntegerPartition, Vec<Vec<usize>>> = BTreeMap::new();
    for sigma in enumerate_set_partitions(n).expect("n within cap") {
        let masks = sigma
            .blocks()
            .iter()
            .map(|b| b.iter().fold(0usize, |m, &e| m | 1 << (e - 1)))
            .collect();
        by_shape.entry(sigma.shape()).or_default().push(masks);
    }
    // reverse-lexicographic shape order
    by_shape
        .into_iter()
        .rev()
        .map(|(shape, partitions)| ShapeClass {
            coeff: c_lambda(&shape),
            shape,
            partitions,
        })
        .collect()
}

/// `E_λ` for every `λ ⊢ n`, reverse-lexicographic.
pub fn e_lambda_table(inst: &FunctionalInstance) -> Result<Vec<(IntegerPartition, Rational)>> {
    let table = inst.delta_table();
    Ok(shape_classes(inst.n())?
        .iter()
        .map(|c| (c.shape.clone(), c.sum(&table)))
        .collect())
}

/// `E_n = Σ_{λ⊢n} c_λ E_λ` with the default cap on `n`.
pub fn e_n(inst: &FunctionalInstance) -> Result<Rational> {
    e_n_with_cap(inst, MAX_EN_N)
}

pub fn e_n_with_cap(inst: &FunctionalInstance, cap: usize) -> Result<Rational> {
    if inst.n() > cap {
        return config(format!("n = {} exceeds evaluation cap {cap}", inst.n()));
    }
    let table = inst.delta_table();
    Ok(shape_classes(inst.n())?
        .iter()
        .map(|c| &c.coeff * c.sum(&table))
        .sum())
}

/// `E_n` as `Σ_σ c_{λ(σ)} E_σ`, evaluating each block expectation afresh.
/// Slower; kept as a cross-check of [`e_n`].
pub fn e_n_by_set_partitions(inst: &FunctionalInstance) -> Result<Rational> {
    if inst.n() > MAX_EN_N {
        return config(format!("n = {} exceeds evaluation cap {MAX_EN_N}", inst.n()));
    }
    let mut total = Rational::zero();
    for sigma in enumerate_set_partitions(inst.n())? {
        total += c_lambda(&sigma.shape()) * e_sigma(inst, &sigma)?;
    }
    Ok(total)
}

/// Expands `E_n(f_1..f_n)` with `f_i(j) = Σ_{t≤j} a_{i,t}` into a polynomial
/// in the increments `a_{i,j}`.
pub fn expand_e_n(space: &ChainSpace, n: usize, budget: usize) -> Result<IncrementPolynomial> {
    if n == 0 || n > MAX_EN_N {
        return config(format!("n = {n} outside 1..={MAX_EN_N}"));
    }
    let levels = space.len();
    let monomials = levels.checked_pow(n as u32).unwrap_or(usize::MAX);
    if monomials > budget {
        return config(format!(
            "expansion needs up to {monomials} monomials, budget is {budget}"
        ));
    }
    let mut delta_polys = vec![IncrementPolynomial::zero(); 1 << n];
    for (mask, slot) in delta_polys.iter_mut().enumerate().skip(1) {
        for (j, mu) in space.mu().iter().enumerate() {
            if mu.is_zero() {
                continue;
            }
            let mut prod = IncrementPolynomial::constant(mu.clone());
            for i in (0..n).filter(|i| mask >> i & 1 == 1) {
                prod = prod.mul(&IncrementPolynomial::prefix_sum(i + 1, j + 1))?;
            }
            slot.add_assign(&prod);
        }
    }
    let mut total = IncrementPolynomial::zero();
    for class in shape_classes(n)? {
        for blocks in &class.partitions {
            let mut prod = IncrementPolynomial::constant(Rational::one());
            for &b in blocks {
                prod = prod.mul(&delta_polys[b])?;
            }
            total.add_scaled(&prod, &class.coeff);
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Monomial;
    use crate::spaces::SubsetLattice;

    fn q(p: i64, d: i64) -> Rational {
        Rational::frac(p, d)
    }

    fn step_instance(n: usize) -> FunctionalInstance {
        let space = Space::Chain(ChainSpace::uniform(2).unwrap());
        let f = MonotoneFn::new(&space, vec![q(0, 1), q(1, 1)]).unwrap();
        FunctionalInstance::new(space, vec![f; n]).unwrap()
    }

    #[test]
    fn e_delta_examples() {
        let inst = step_instance(2);
        assert_eq!(e_delta(&inst, &[1, 2]).unwrap(), q(1, 2));
        assert_eq!(e_delta(&inst, &[2]).unwrap(), q(1, 2));
        assert!(e_delta(&inst, &[]).is_err());
        assert!(e_delta(&inst, &[3]).is_err());

        let pm = Space::Chain(ChainSpace::point_mass(3, 2).unwrap());
        let f1 = MonotoneFn::new(&pm, vec![q(1, 1), q(2, 1), q(3, 1)]).unwrap();
        let f2 = MonotoneFn::new(&pm, vec![q(0, 1), q(5, 7), q(1, 1)]).unwrap();
        let inst = FunctionalInstance::new(pm, vec![f1, f2]).unwrap();
        assert_eq!(e_delta(&inst, &[1, 2]).unwrap(), q(10, 7));
    }

    #[test]
    fn e_sigma_examples() {
        let inst = step_instance(2);
        let split = SetPartition::new(2, vec![vec![1], vec![2]]).unwrap();
        let whole = SetPartition::new(2, vec![vec![1, 2]]).unwrap();
        assert_eq!(e_sigma(&inst, &split).unwrap(), q(1, 4));
        assert_eq!(e_sigma(&inst, &whole).unwrap(), q(1, 2));
        let wrong = SetPartition::new(3, vec![vec![1, 2, 3]]).unwrap();
        assert!(e_sigma(&inst, &wrong).is_err());

        let one = step_instance(1);
        let s = SetPartition::new(1, vec![vec![1]]).unwrap();
        assert_eq!(e_sigma(&one, &s).unwrap(), q(1, 2));
    }

    #[test]
    fn e_lambda_examples() {
        let inst = step_instance(2);
        let l11 = IntegerPartition::new(vec![1, 1]).unwrap();
        assert_eq!(e_lambda(&inst, &l11).unwrap(), q(1, 4));
        let inst3 = step_instance(3);
        let l21 = IntegerPartition::new(vec![2, 1]).unwrap();
        assert_eq!(e_lambda(&inst3, &l21).unwrap(), q(3, 4));
        let l3 = IntegerPartition::new(vec![3]).unwrap();
        assert_eq!(
            e_lambda(&inst3, &l3).unwrap(),
            e_delta(&inst3, &[1, 2, 3]).unwrap()
        );
        assert!(e_lambda(&inst3, &l11).is_err());
    }

    #[test]
    fn e_n_step_instances() {
        assert_eq!(e_n(&step_instance(2)).unwrap(), q(1, 4));
        assert_eq!(e_n(&step_instance(3)).unwrap(), q(3, 8));
        // μ(1−μ)(2−μ) at μ = 1/2
        assert_eq!(q(1, 2) * q(1, 2) * q(3, 2), q(3, 8));
    }

    #[test]
    fn constants_are_annihilated() {
        let space = Space::Chain(ChainSpace::new(vec![q(1, 3), q(1, 6), q(1, 2)]).unwrap());
        for n in 2..=MAX_EN_N {
            let fs = (1..=n as i64)
                .map(|c| MonotoneFn::constant(&space, q(c, 2)).unwrap())
                .collect();
            let inst = FunctionalInstance::new(space.clone(), fs).unwrap();
            assert!(e_n(&inst).unwrap().is_zero(), "n = {n}");
        }
    }

    #[test]
    fn cap_is_enforced() {
        let inst = step_instance(MAX_EN_N + 1);
        assert!(matches!(e_n(&inst), Err(crate::Error::Config(_))));
        let inst = step_instance(3);
        assert!(e_n_with_cap(&inst, 2).is_err());
    }

    #[test]
    fn shape_and_sigma_paths_agree() {
        let space = Space::Lattice(SubsetLattice::new(2, vec![q(1, 6), q(1, 3), q(1, 4), q(1, 4)]).unwrap());
        let fs = vec![
            MonotoneFn::new(&space, vec![q(0, 1), q(1, 1), q(1, 2), q(2, 1)]).unwrap(),
            MonotoneFn::new(&space, vec![q(1, 1), q(1, 1), q(3, 1), q(3, 1)]).unwrap(),
            MonotoneFn::new(&space, vec![q(0, 1), q(0, 1), q(0, 1), q(5, 1)]).unwrap(),
            MonotoneFn::new(&space, vec![q(1, 4), q(1, 2), q(1, 3), q(1, 1)]).unwrap(),
        ];
        let inst = FunctionalInstance::new(space, fs).unwrap();
        assert_eq!(e_n(&inst).unwrap(), e_n_by_set_partitions(&inst).unwrap());
    }

    #[test]
    fn expansion_two_by_two() {
        let mu2 = q(1, 3);
        let space = ChainSpace::new(vec![q(2, 3), mu2.clone()]).unwrap();
        let p = expand_e_n(&space, 2, DEFAULT_MONOMIAL_BUDGET).unwrap();
        let c = |l: [usize; 2]| p.coefficient(&Monomial::from_levels(&l));
        assert_eq!(c([2, 2]), &mu2 * (Rational::one() - &mu2));
        assert!(c([1, 1]).is_zero());
        assert!(c([1, 2]).is_zero());
        assert!(c([2, 1]).is_zero());
    }

    #[test]
    fn expansion_budget() {
        let space = ChainSpace::uniform(4).unwrap();
        assert!(matches!(expand_e_n(&space, 5, 100), Err(crate::Error::Config(_))));
    }
}
