//! Seeded batch verification and the FKG counterexample search.
//!
//! Instance `i` of a batch is generated from its own seed
//! `instance_seed(master_seed, i)`, so instances can be produced in any order
//! (and in parallel) while the report stays byte-identical for a given
//! configuration.

use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::Rational;
use crate::error::{config, Error, Result};
use crate::functional::{e_n, FunctionalInstance, MAX_EN_N};
use crate::instance::InstanceJson;
use crate::series::{
    check_nonnegativity, corollary_direct, corollary_via_en, FunctionSeries, DEFAULT_TRUNCATION,
};
use crate::spaces::{
    fkg_check, random_chain_space_with, random_fkg_measure_with, random_monotone_fn_with,
    rng_from_seed, unit_rational, ChainMeasureKind, ChainSpace, FkgReport, MonotoneFn,
    MonotoneGenerator, Space, SubsetLattice, DEFAULT_MAX_DENOMINATOR, MAX_CHAIN_LEN,
    MAX_GROUND_SIZE,
};

const CHUNK: usize = 256;

/// Label attached to search reports.
pub const SEARCH_HEURISTIC_NOTE: &str = "heuristic generator emphasis: measures with zeros, \
near-degenerate couplings and step functions; no claim about where counterexamples live";

/// SplitMix64 finalizer.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of instance `index`: `splitmix64(master_seed ^ splitmix64(index))`.
pub fn instance_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(index))
}

/// Inclusive integer interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    pub min: usize,
    pub max: usize,
}

impl Interval {
    pub fn new(min: usize, max: usize) -> Self {
        Interval { min, max }
    }

    pub fn single(v: usize) -> Self {
        Interval { min: v, max: v }
    }

    fn check(&self, name: &str, lo: usize, hi: usize) -> Result<()> {
        if self.min > self.max || self.min < lo || self.max > hi {
            return config(format!(
                "{name} range {}..={} must lie within {lo}..={hi}",
                self.min, self.max
            ));
        }
        Ok(())
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        rng.gen_range(self.min..=self.max)
    }
}

/// Proportions of the monotone-function generators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorMix {
    pub mobius: f64,
    pub repair: f64,
    pub step: f64,
}

impl Default for GeneratorMix {
    fn default() -> Self {
        GeneratorMix {
            mobius: 0.4,
            repair: 0.4,
            step: 0.2,
        }
    }
}

impl GeneratorMix {
    fn sample<R: Rng>(&self, rng: &mut R) -> MonotoneGenerator {
        let u: f64 = rng.gen();
        if u < self.mobius {
            MonotoneGenerator::Mobius
        } else if u < self.mobius + self.repair {
            MonotoneGenerator::Repair
        } else {
            MonotoneGenerator::Step
        }
    }

    fn weights(&self) -> [f64; 3] {
        [self.mobius, self.repair, self.step]
    }
}

/// Proportions of chain measure kinds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureMix {
    pub full: f64,
    pub sparse: f64,
    pub point_mass: f64,
}

impl Default for MeasureMix {
    fn default() -> Self {
        MeasureMix {
            full: 0.6,
            sparse: 0.3,
            point_mass: 0.1,
        }
    }
}

impl MeasureMix {
    pub fn point_mass_only() -> Self {
        MeasureMix {
            full: 0.0,
            sparse: 0.0,
            point_mass: 1.0,
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> ChainMeasureKind {
        let u: f64 = rng.gen();
        if u < self.full {
            ChainMeasureKind::Full
        } else if u < self.full + self.sparse {
            ChainMeasureKind::Sparse
        } else {
            ChainMeasureKind::PointMass
        }
    }

    fn weights(&self) -> [f64; 3] {
        [self.full, self.sparse, self.point_mass]
    }
}

fn check_mix(name: &str, w: [f64; 3]) -> Result<()> {
    if w.iter().any(|x| !x.is_finite() || *x < 0.0) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return config(format!("{name} proportions must be nonnegative and sum to 1"));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub master_seed: u64,
    pub instance_count: usize,
    /// Number of functions `n`.
    pub n_range: Interval,
    /// Chain length `N`.
    pub chain_len_range: Interval,
    /// `|X|` for subset lattices.
    pub ground_size_range: Interval,
    pub max_denominator: u32,
    pub generator_mix: GeneratorMix,
    pub measure_mix: MeasureMix,
    /// Series truncation for corollary batches.
    pub truncation: usize,
    /// Extremes kept per population.
    pub top_k: usize,
    /// Product-measure reduction checks run by the FKG search.
    pub reduction_checks: usize,
    pub time_budget_seconds: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            master_seed: 0,
            instance_count: 1000,
            n_range: Interval::new(2, 5),
            chain_len_range: Interval::new(1, 5),
            ground_size_range: Interval::new(1, 3),
            max_denominator: DEFAULT_MAX_DENOMINATOR,
            generator_mix: GeneratorMix::default(),
            measure_mix: MeasureMix::default(),
            truncation: DEFAULT_TRUNCATION,
            top_k: 5,
            reduction_checks: 100,
            time_budget_seconds: 600,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        self.n_range.check("n", 1, MAX_EN_N)?;
        self.chain_len_range.check("N", 1, MAX_CHAIN_LEN)?;
        self.ground_size_range.check("|X|", 1, MAX_GROUND_SIZE)?;
        if self.max_denominator == 0 {
            return config("max_denominator must be >= 1");
        }
        if self.truncation == 0 || self.truncation > MAX_EN_N {
            return config(format!("truncation must lie within 1..={MAX_EN_N}"));
        }
        check_mix("generator_mix", self.generator_mix.weights())?;
        check_mix("measure_mix", self.measure_mix.weights())?;
        Ok(())
    }

    fn rng(&self, index: usize) -> ChaCha8Rng {
        rng_from_seed(instance_seed(self.master_seed, index as u64))
    }
}

/// What a certificate's value measures.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Quantity {
    /// `E_n` of the instance's functions.
    En { n: usize },
    /// Coefficient of `t^order` of the corollary series (direct route).
    SeriesCoefficient { order: usize, truncation: usize },
}

/// Self-contained record that re-evaluates to `value` exactly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub instance: InstanceJson,
    pub quantity: Quantity,
    pub value: Rational,
    pub master_seed: u64,
    pub index: usize,
    pub instance_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fkg: Option<FkgReport>,
}

impl Certificate {
    /// Recomputes the recorded quantity from the embedded instance.
    pub fn reevaluate(&self) -> Result<Rational> {
        match &self.quantity {
            Quantity::En { n } => {
                let inst = self.instance.functional()?;
                if inst.n() != *n {
                    return Err(Error::Consistency("certificate n does not match instance".into()));
                }
                e_n(&inst)
            }
            Quantity::SeriesCoefficient { order, truncation } => {
                let (space, p) = self.instance.function_series(*truncation)?;
                Ok(corollary_direct(&space, &p)?.coeff(*order).clone())
            }
        }
    }

    pub fn verify(&self) -> Result<bool> {
        Ok(self.reevaluate()? == self.value)
    }
}

fn draw_functions<R: Rng>(
    rng: &mut R,
    space: &Space,
    n: usize,
    cfg: &SearchConfig,
) -> Result<Vec<MonotoneFn>> {
    (0..n)
        .map(|_| {
            let g = cfg.generator_mix.sample(rng);
            random_monotone_fn_with(rng, space, g, cfg.max_denominator)
        })
        .collect()
}

/// Chain instance `index` of a Lemma batch.
pub fn chain_instance(cfg: &SearchConfig, index: usize) -> Result<FunctionalInstance> {
    let mut rng = cfg.rng(index);
    let n = cfg.n_range.sample(&mut rng);
    let len = cfg.chain_len_range.sample(&mut rng);
    let kind = cfg.measure_mix.sample(&mut rng);
    let space = Space::Chain(random_chain_space_with(&mut rng, len, kind, cfg.max_denominator)?);
    let fs = draw_functions(&mut rng, &space, n, cfg)?;
    FunctionalInstance::new(space, fs)
}

/// FKG lattice instance `index` of a search batch.
pub fn lattice_instance(cfg: &SearchConfig, index: usize) -> Result<FunctionalInstance> {
    let mut rng = cfg.rng(index);
    let n = cfg.n_range.sample(&mut rng);
    let size = cfg.ground_size_range.sample(&mut rng);
    let lattice = random_fkg_measure_with(&mut rng, size, cfg.max_denominator, MAX_GROUND_SIZE)?;
    let space = Space::Lattice(lattice);
    let fs = draw_functions(&mut rng, &space, n, cfg)?;
    FunctionalInstance::new(space, fs)
}

fn fkg_transcript(space: &Space) -> Option<FkgReport> {
    match space {
        Space::Lattice(l) => Some(fkg_check(l)),
        Space::Chain(_) => None,
    }
}

fn en_certificate(cfg: &SearchConfig, index: usize, inst: &FunctionalInstance, value: Rational) -> Certificate {
    Certificate {
        instance: InstanceJson::from_functional(inst),
        quantity: Quantity::En { n: inst.n() },
        value,
        master_seed: cfg.master_seed,
        index,
        instance_seed: instance_seed(cfg.master_seed, index as u64),
        fkg: fkg_transcript(inst.space()),
    }
}

/// Runs `work` over `0..count` in parallel chunks, stopping between chunks
/// once the time budget is spent. Results come back in index order.
fn run_indexed<T, F>(count: usize, budget: Duration, work: F) -> Result<(Vec<T>, bool)>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    let start = Instant::now();
    let mut out = Vec::with_capacity(count);
    let mut next = 0;
    while next < count {
        if start.elapsed() > budget {
            return Ok((out, false));
        }
        let end = (next + CHUNK).min(count);
        let chunk: Vec<T> = (next..end).into_par_iter().map(&work).collect::<Result<_>>()?;
        out.extend(chunk);
        next = end;
    }
    Ok((out, true))
}

/// Summary of one `n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PopulationSummary {
    pub n: usize,
    pub instances: usize,
    pub zero_values: usize,
    pub negatives: usize,
    pub min: Option<Rational>,
    /// Smallest values, ties broken by index.
    pub smallest: Vec<Certificate>,
}

struct Evaluated {
    index: usize,
    n: usize,
    value: Rational,
}

fn summarize<G>(cfg: &SearchConfig, results: &[Evaluated], regenerate: G) -> Result<Vec<PopulationSummary>>
where
    G: Fn(usize) -> Result<FunctionalInstance>,
{
    let mut ns: Vec<usize> = results.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    ns.into_iter()
        .map(|n| {
            let mut pop: Vec<&Evaluated> = results.iter().filter(|r| r.n == n).collect();
            pop.sort_by(|a, b| a.value.cmp(&b.value).then(a.index.cmp(&b.index)));
            let smallest = pop
                .iter()
                .take(cfg.top_k)
                .map(|r| {
                    let inst = regenerate(r.index)?;
                    Ok(en_certificate(cfg, r.index, &inst, r.value.clone()))
                })
                .collect::<Result<_>>()?;
            Ok(PopulationSummary {
                n,
                instances: pop.len(),
                zero_values: pop.iter().filter(|r| r.value.is_zero()).count(),
                negatives: pop.iter().filter(|r| r.value.is_negative()).count(),
                min: pop.first().map(|r| r.value.clone()),
                smallest,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub config: SearchConfig,
    pub instances_run: usize,
    pub completed: bool,
    pub violations: usize,
    pub min_value: Option<Rational>,
    pub min_certificate: Option<Certificate>,
    pub populations: Vec<PopulationSummary>,
    /// Every instance with a negative value (should stay empty).
    pub violation_certificates: Vec<Certificate>,
}

impl LemmaReport {
    pub fn has_anomaly(&self) -> bool {
        self.violations > 0
    }
}

/// Random chain instances, `E_n ≥ 0` checked exactly on each.
pub fn verify_lemma_batch(cfg: &SearchConfig) -> Result<LemmaReport> {
    cfg.validate()?;
    let budget = Duration::from_secs(cfg.time_budget_seconds);
    let (results, completed) = run_indexed(cfg.instance_count, budget, |index| {
        let inst = chain_instance(cfg, index)?;
        Ok(Evaluated {
            index,
            n: inst.n(),
            value: e_n(&inst)?,
        })
    })?;
    let populations = summarize(cfg, &results, |i| chain_instance(cfg, i))?;
    let min = results
        .iter()
        .min_by(|a, b| a.value.cmp(&b.value).then(a.index.cmp(&b.index)));
    let min_certificate = min
        .map(|r| Ok::<_, Error>(en_certificate(cfg, r.index, &chain_instance(cfg, r.index)?, r.value.clone())))
        .transpose()?;
    let violation_certificates = results
        .iter()
        .filter(|r| r.value.is_negative())
        .map(|r| Ok(en_certificate(cfg, r.index, &chain_instance(cfg, r.index)?, r.value.clone())))
        .collect::<Result<Vec<_>>>()?;
    Ok(LemmaReport {
        config: cfg.clone(),
        instances_run: results.len(),
        completed,
        violations: violation_certificates.len(),
        min_value: min.map(|r| r.value.clone()),
        min_certificate,
        populations,
        violation_certificates,
    })
}

/// Product measure with functions of one coordinate, compared against the
/// two-point chain it reduces to.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionSummary {
    pub checked: usize,
    pub mismatches: usize,
}

fn reduction_check(cfg: &SearchConfig, index: usize) -> Result<bool> {
    // separate stream from the search instances
    let mut rng = rng_from_seed(instance_seed(splitmix64(cfg.master_seed ^ 0x5EED_0F0D), index as u64));
    let size = cfg.ground_size_range.sample(&mut rng);
    let n = cfg.n_range.sample(&mut rng);
    let marginals: Vec<Rational> = (0..size).map(|_| unit_rational(&mut rng, cfg.max_denominator)).collect();
    let lattice = SubsetLattice::product(&marginals)?;
    let coord = rng.gen_range(0..size);
    let p = &marginals[coord];
    let chain = Space::Chain(ChainSpace::new(vec![Rational::one() - p, p.clone()])?);
    let lattice = Space::Lattice(lattice);
    let mut chain_fns = Vec::with_capacity(n);
    let mut lattice_fns = Vec::with_capacity(n);
    for _ in 0..n {
        let low = unit_rational(&mut rng, cfg.max_denominator);
        let high = &low + unit_rational(&mut rng, cfg.max_denominator);
        let values = (0..lattice.len())
            .map(|a| if a >> coord & 1 == 1 { high.clone() } else { low.clone() })
            .collect();
        lattice_fns.push(MonotoneFn::new(&lattice, values)?);
        chain_fns.push(MonotoneFn::new(&chain, vec![low, high])?);
    }
    let on_lattice = e_n(&FunctionalInstance::new(lattice, lattice_fns)?)?;
    let on_chain = e_n(&FunctionalInstance::new(chain, chain_fns)?)?;
    Ok(on_lattice == on_chain)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FkgSearchReport {
    pub config: SearchConfig,
    pub note: String,
    pub instances_run: usize,
    pub completed: bool,
    /// A negative `E_n` with `n ≥ 3` was found; certificates are in
    /// `populations`.
    pub violation_found: bool,
    /// Negative `E_2` values, which the classical FKG inequality rules out.
    pub sanity_failures: usize,
    pub min_value: Option<Rational>,
    pub populations: Vec<PopulationSummary>,
    pub product_reduction: ReductionSummary,
}

impl FkgSearchReport {
    /// Implementation-level inconsistency: a negative `E_2` under FKG or a
    /// failed product reduction.
    pub fn has_internal_failure(&self) -> bool {
        self.sanity_failures > 0 || self.product_reduction.mismatches > 0
    }
}

/// Samples FKG measures on `2^X` and monotone functions, evaluating `E_n`.
/// Makes no assertion about the sign for `n ≥ 3`.
pub fn search_fkg(cfg: &SearchConfig) -> Result<FkgSearchReport> {
    cfg.validate()?;
    let budget = Duration::from_secs(cfg.time_budget_seconds);
    let (results, completed) = run_indexed(cfg.instance_count, budget, |index| {
        let inst = lattice_instance(cfg, index)?;
        Ok(Evaluated {
            index,
            n: inst.n(),
            value: e_n(&inst)?,
        })
    })?;
    let populations = summarize(cfg, &results, |i| lattice_instance(cfg, i))?;
    let (reductions, _) = run_indexed(cfg.reduction_checks, budget, |i| reduction_check(cfg, i))?;
    let violation_found = results.iter().any(|r| r.n >= 3 && r.value.is_negative());
    let sanity_failures = results.iter().filter(|r| r.n <= 2 && r.value.is_negative()).count();
    Ok(FkgSearchReport {
        config: cfg.clone(),
        note: SEARCH_HEURISTIC_NOTE.to_string(),
        instances_run: results.len(),
        completed,
        violation_found,
        sanity_failures,
        min_value: results.iter().map(|r| &r.value).min().cloned(),
        populations,
        product_reduction: ReductionSummary {
            checked: reductions.len(),
            mismatches: reductions.iter().filter(|ok| !**ok).count(),
        },
    })
}

/// Chain (`lattice = false`) or FKG lattice series instance `index`.
pub fn series_instance(cfg: &SearchConfig, index: usize, lattice: bool) -> Result<(Space, FunctionSeries)> {
    let mut rng = cfg.rng(index);
    let space = if lattice {
        let size = cfg.ground_size_range.sample(&mut rng);
        Space::Lattice(random_fkg_measure_with(&mut rng, size, cfg.max_denominator, MAX_GROUND_SIZE)?)
    } else {
        let len = cfg.chain_len_range.sample(&mut rng);
        let kind = cfg.measure_mix.sample(&mut rng);
        Space::Chain(random_chain_space_with(&mut rng, len, kind, cfg.max_denominator)?)
    };
    let coeffs = (0..cfg.truncation)
        .map(|k| {
            if k > 0 && rng.gen_ratio(1, 3) {
                MonotoneFn::constant(&space, Rational::zero())
            } else {
                let g = cfg.generator_mix.sample(&mut rng);
                random_monotone_fn_with(&mut rng, &space, g, cfg.max_denominator)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let p = FunctionSeries::new(&space, cfg.truncation, coeffs)?;
    Ok((space, p))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesPopulation {
    pub instances: usize,
    pub route_mismatches: usize,
    pub nonnegative_instances: usize,
    pub negative_instances: usize,
    pub min_coefficient: Option<Rational>,
    /// Instances whose routes disagree or whose series has a negative
    /// coefficient.
    pub certificates: Vec<Certificate>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorollaryReport {
    pub config: SearchConfig,
    pub completed: bool,
    pub chain: SeriesPopulation,
    /// Reported only; the lattice case is outside the proven setting.
    pub lattice: SeriesPopulation,
}

impl CorollaryReport {
    /// Route mismatch anywhere, or a negative coefficient on a chain.
    pub fn has_anomaly(&self) -> bool {
        self.chain.route_mismatches > 0
            || self.lattice.route_mismatches > 0
            || self.chain.negative_instances > 0
    }
}

struct SeriesOutcome {
    index: usize,
    routes_agree: bool,
    first_negative: Option<usize>,
    min_coefficient: Rational,
}

fn series_population(cfg: &SearchConfig, count: usize, lattice: bool, budget: Duration) -> Result<(SeriesPopulation, bool)> {
    let (outcomes, completed) = run_indexed(count, budget, |index| {
        let (space, p) = series_instance(cfg, index, lattice)?;
        let direct = corollary_direct(&space, &p)?;
        let via_en = corollary_via_en(&space, &p)?;
        let check = check_nonnegativity(&direct);
        Ok(SeriesOutcome {
            index,
            routes_agree: direct == via_en,
            first_negative: check.first_negative_index,
            min_coefficient: direct.coeffs()[1..].iter().min().cloned().unwrap_or_else(Rational::zero),
        })
    })?;
    let certificates = outcomes
        .iter()
        .filter(|o| !o.routes_agree || o.first_negative.is_some())
        .map(|o| {
            let (space, p) = series_instance(cfg, o.index, lattice)?;
            let order = o.first_negative.unwrap_or(1);
            let value = corollary_direct(&space, &p)?.coeff(order).clone();
            Ok(Certificate {
                instance: InstanceJson::from_series(&space, &p),
                quantity: Quantity::SeriesCoefficient {
                    order,
                    truncation: cfg.truncation,
                },
                value,
                master_seed: cfg.master_seed,
                index: o.index,
                instance_seed: instance_seed(cfg.master_seed, o.index as u64),
                fkg: fkg_transcript(&space),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let negative = outcomes.iter().filter(|o| o.first_negative.is_some()).count();
    Ok((
        SeriesPopulation {
            instances: outcomes.len(),
            route_mismatches: outcomes.iter().filter(|o| !o.routes_agree).count(),
            nonnegative_instances: outcomes.len() - negative,
            negative_instances: negative,
            min_coefficient: outcomes.iter().map(|o| &o.min_coefficient).min().cloned(),
            certificates,
        },
        completed,
    ))
}

/// Both corollary routes on `instance_count` chain instances and
/// `lattice_count` FKG lattice instances.
pub fn corollary_batch(cfg: &SearchConfig, lattice_count: usize) -> Result<CorollaryReport> {
    cfg.validate()?;
    let budget = Duration::from_secs(cfg.time_budget_seconds);
    let (chain, chain_done) = series_population(cfg, cfg.instance_count, false, budget)?;
    let (lattice, lattice_done) = series_population(cfg, lattice_count, true, budget)?;
    Ok(CorollaryReport {
        config: cfg.clone(),
        completed: chain_done && lattice_done,
        chain,
        lattice,
    })
}
