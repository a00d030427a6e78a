//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Every tolerance is exact equality unless a runtime bound is
//! stated.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use corrineq::coefficients::{
    b_formula, b_oracle_from, base_case_certificates, bounded_tuples, f_closed_form,
    f_partition_sum, Composition,
};
use corrineq::explorer::{
    corollary_batch, search_fkg, series_instance, verify_lemma_batch, Interval, SearchConfig,
};
use corrineq::functional::DEFAULT_MONOMIAL_BUDGET;
use corrineq::partitions::{annihilation_sum, rising_factorial_identity_check};
use corrineq::series::{check_nonnegativity, corollary_direct, corollary_via_en, FunctionSeries};
use corrineq::spaces::{
    fkg_check, random_chain_space, random_fkg_measure, rng_from_seed, ChainMeasureKind,
    SubsetLattice,
};
use corrineq::{e_n, expand_e_n, ChainSpace, FunctionalInstance, MonotoneFn, Rational, Space};
use rand::Rng;

type Outcome = Result<String, String>;

fn q(p: i64, d: i64) -> Rational {
    Rational::frac(p, d)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("runtime {t:.2?} exceeds {limit:?}"))
}

fn step_instance(n: usize) -> FunctionalInstance {
    let space = Space::Chain(ChainSpace::uniform(2).unwrap());
    let f = MonotoneFn::new(&space, vec![q(0, 1), q(1, 1)]).unwrap();
    FunctionalInstance::new(space, vec![f; n]).unwrap()
}

fn err(e: corrineq::Error) -> String {
    e.to_string()
}

fn c1_chebyshev() -> Outcome {
    let start = Instant::now();
    let cfg = SearchConfig {
        master_seed: 1,
        instance_count: 1000,
        n_range: Interval::single(2),
        chain_len_range: Interval::new(1, 8),
        max_denominator: 64,
        ..SearchConfig::default()
    };
    let r = verify_lemma_batch(&cfg).map_err(err)?;
    ensure(r.completed && r.instances_run == 1000, || "batch incomplete".into())?;
    ensure(r.violations == 0, || format!("{} negative E_2 values", r.violations))?;
    let step = e_n(&step_instance(2)).map_err(err)?;
    ensure(step == q(1, 4), || format!("step E_2 = {step}, want 1/4"))?;
    within(start, Duration::from_secs(10))?;
    Ok(format!(
        "1000 instances, min E_2 = {}, step = {step}, {:.2?}",
        r.min_value.unwrap(),
        start.elapsed()
    ))
}

fn c2_lemma() -> Outcome {
    let start = Instant::now();
    let mut mins = Vec::new();
    for n in 3..=5 {
        let cfg = SearchConfig {
            master_seed: 2 + n as u64,
            instance_count: 500,
            n_range: Interval::single(n),
            chain_len_range: Interval::new(1, 5),
            max_denominator: 64,
            ..SearchConfig::default()
        };
        let r = verify_lemma_batch(&cfg).map_err(err)?;
        ensure(r.completed && r.instances_run == 500, || format!("n={n} batch incomplete"))?;
        ensure(r.violations == 0, || format!("n={n}: {} negative values", r.violations))?;
        mins.push(format!("n={n}: {}", r.min_value.unwrap()));
    }
    let step = e_n(&step_instance(3)).map_err(err)?;
    let mu = q(1, 2);
    let closed = &mu * (Rational::one() - &mu) * (Rational::from(2i64) - &mu);
    ensure(step == q(3, 8) && closed == q(3, 8), || format!("step E_3 = {step}, closed form {closed}"))?;
    within(start, Duration::from_secs(60))?;
    Ok(format!("3x500 instances, minima [{}], step E_3 = 3/8, {:.2?}", mins.join(", "), start.elapsed()))
}

fn random_mu<R: Rng>(rng: &mut R, len: usize, normalize: bool) -> Vec<Rational> {
    let mu: Vec<Rational> = (0..len)
        .map(|_| {
            let d = rng.gen_range(1..=64i64);
            let p = if normalize { rng.gen_range(0..=d) } else { rng.gen_range(-2 * d..=3 * d) };
            q(p, d)
        })
        .collect();
    if !normalize {
        return mu;
    }
    let total: Rational = mu.iter().sum();
    if total.is_zero() {
        let mut m = vec![Rational::zero(); len];
        m[0] = Rational::one();
        return m;
    }
    mu.iter().map(|x| x.checked_div(&total).unwrap()).collect()
}

fn c3_coefficient_identity() -> Outcome {
    let mut rng = rng_from_seed(3);
    let mut checked = 0usize;
    for trial in 0..50 {
        let normalize = trial % 2 == 0;
        for len in 1..=3 {
            let mu = random_mu(&mut rng, len, normalize);
            for m in bounded_tuples(6, len) {
                let m = Composition::new(m);
                let a = f_partition_sum(&m, &mu).map_err(err)?;
                let b = f_closed_form(&m, &mu).map_err(err)?;
                ensure(a == b, || format!("m={m}, mu={mu:?}: partition sum {a} != closed form {b}"))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (composition, mu) pairs, exact equality"))
}

fn c4_b_certification() -> Outcome {
    let mut checked = 0usize;
    for trial in 0..20u64 {
        for len in 1..=3 {
            let kind = if trial % 3 == 0 { ChainMeasureKind::Sparse } else { ChainMeasureKind::Full };
            let space = random_chain_space(len, kind, 400 + trial * 7 + len as u64, 64).map_err(err)?;
            for n in 1..=5 {
                let poly = expand_e_n(&space, n, DEFAULT_MONOMIAL_BUDGET).map_err(err)?;
                for prefix in bounded_tuples(n, len - 1) {
                    let b = b_formula(&prefix, n, space.mu()).map_err(err)?;
                    let o = b_oracle_from(&poly, &prefix, n);
                    ensure(b == o, || format!("mu={:?} n={n} prefix={prefix:?}: B={b}, oracle={o}", space.mu()))?;
                    ensure(b.is_nonnegative(), || format!("negative B = {b} at {prefix:?}"))?;
                    checked += 1;
                }
            }
        }
    }
    let space = ChainSpace::new(vec![q(1, 3), q(2, 3)]).map_err(err)?;
    let certs = base_case_certificates(&space).map_err(err)?;
    let first = &certs[0];
    ensure(
        first.position == 1 && first.oracle == q(1, 1) && first.formula == q(1, 1) && first.claimed == q(1, 3),
        || format!("base case certificate not reproduced: {first:?}"),
    )?;
    ensure(!first.claim_matches_oracle && certs[1].claim_matches_oracle, || "base case flags wrong".into())?;
    Ok(format!(
        "{checked} B values equal oracle and >= 0; base case N=2,n=1,m_1=1: claimed {} vs oracle {} (certificate: {})",
        first.claimed,
        first.oracle,
        serde_json::to_string(first).unwrap()
    ))
}

fn c5_identity() -> Outcome {
    for n in 1..=12 {
        ensure(rising_factorial_identity_check(n).map_err(err)?, || format!("identity fails at n={n}"))?;
    }
    Ok("n = 1..=12 exact polynomial equality".into())
}

fn c6_annihilation() -> Outcome {
    ensure(annihilation_sum(1) == q(1, 1), || "n=1 sum != 1".into())?;
    for n in 2..=8 {
        let s = annihilation_sum(n);
        ensure(s.is_zero(), || format!("n={n} sum = {s}"))?;
    }
    Ok("n=1 gives 1, n=2..=8 give 0".into())
}

struct SeriesRun {
    chain_nonnegative: bool,
    detail: String,
}

fn c7_series_routes() -> Result<SeriesRun, String> {
    let start = Instant::now();
    let cfg = SearchConfig {
        master_seed: 7,
        instance_count: 100,
        chain_len_range: Interval::new(1, 4),
        ground_size_range: Interval::new(1, 3),
        truncation: 6,
        ..SearchConfig::default()
    };
    let r = corollary_batch(&cfg, 50).map_err(err)?;
    ensure(r.completed, || "corollary batch incomplete".into())?;
    ensure(r.chain.instances == 100 && r.lattice.instances == 50, || "wrong instance counts".into())?;
    ensure(r.chain.route_mismatches == 0, || format!("{} chain route mismatches", r.chain.route_mismatches))?;
    ensure(r.lattice.route_mismatches == 0, || format!("{} lattice route mismatches", r.lattice.route_mismatches))?;

    let space = Space::Chain(ChainSpace::uniform(2).unwrap());
    let p1 = MonotoneFn::new(&space, vec![q(0, 1), q(1, 1)]).unwrap();
    let p = FunctionSeries::new(&space, 6, vec![p1]).map_err(err)?;
    let direct = corollary_direct(&space, &p).map_err(err)?;
    let via = corollary_via_en(&space, &p).map_err(err)?;
    let want = [q(1, 2), q(1, 8), q(1, 16), q(5, 128)];
    ensure(direct == via, || "step instance routes differ".into())?;
    ensure(direct.coeffs()[1..=4] == want, || format!("step series {:?}", direct.coeffs()))?;
    within(start, Duration::from_secs(120))?;
    Ok(SeriesRun {
        chain_nonnegative: r.chain.negative_instances == 0,
        detail: format!(
            "100 chain + 50 lattice instances agree to T=6; step: 1/2, 1/8, 1/16, 5/128; lattice nonnegative {}/50; {:.2?}",
            r.lattice.nonnegative_instances,
            start.elapsed()
        ),
    })
}

fn c8_chain_corollary(run: &Result<SeriesRun, String>) -> Outcome {
    let run = run.as_ref().map_err(|e| format!("criterion 7 did not run: {e}"))?;
    ensure(run.chain_nonnegative, || "negative coefficient on a chain instance".into())?;
    // independent re-scan of the same chain instances
    let cfg = SearchConfig {
        master_seed: 7,
        chain_len_range: Interval::new(1, 4),
        truncation: 6,
        ..SearchConfig::default()
    };
    for i in 0..100 {
        let (space, p) = series_instance(&cfg, i, false).map_err(err)?;
        let s = corollary_direct(&space, &p).map_err(err)?;
        let r = check_nonnegativity(&s);
        ensure(r.nonnegative, || format!("instance {i}: t^{:?} coefficient {:?}", r.first_negative_index, r.first_negative_value))?;
    }
    Ok("all 100 chain series have nonnegative coefficients".into())
}

fn c9_fkg_machinery() -> Outcome {
    let mut rng = rng_from_seed(9);
    for _ in 0..50 {
        let size = rng.gen_range(1..=4);
        let p: Vec<Rational> = (0..size).map(|_| {
            let d = rng.gen_range(1..=64i64);
            q(rng.gen_range(0..=d), d)
        }).collect();
        let l = SubsetLattice::product(&p).map_err(err)?;
        let r = fkg_check(&l);
        ensure(r.holds && r.equalities == r.pairs_checked, || format!("product measure {p:?} not equality everywhere"))?;
    }
    for seed in 0..1000 {
        let l = random_fkg_measure(1 + seed as usize % 4, seed, 64).map_err(err)?;
        ensure(fkg_check(&l).holds, || format!("generator output {seed} fails FKG"))?;
    }
    let cfg = SearchConfig {
        master_seed: 99,
        instance_count: 1000,
        n_range: Interval::single(2),
        ground_size_range: Interval::new(1, 4),
        reduction_checks: 0,
        ..SearchConfig::default()
    };
    let r = search_fkg(&cfg).map_err(err)?;
    ensure(r.instances_run == 1000, || "n=2 population incomplete".into())?;
    ensure(r.sanity_failures == 0, || format!("{} negative E_2 under FKG", r.sanity_failures))?;
    Ok(format!(
        "50 product measures with equality, 1000 generated measures pass, 1000 lattice E_2 >= 0 (min {})",
        r.min_value.unwrap()
    ))
}

fn c10_search_harness() -> Outcome {
    let start = Instant::now();
    let cfg = SearchConfig {
        master_seed: 10,
        instance_count: 10_000,
        n_range: Interval::single(3),
        ground_size_range: Interval::single(3),
        time_budget_seconds: 600,
        ..SearchConfig::default()
    };
    let a = search_fkg(&cfg).map_err(err)?;
    let first_run = start.elapsed();
    ensure(a.completed && a.instances_run == 10_000, || "search did not complete 10,000 instances".into())?;
    ensure(first_run < Duration::from_secs(600), || format!("runtime {first_run:?}"))?;
    ensure(a.product_reduction.mismatches == 0, || "product reduction mismatch".into())?;
    let b = search_fkg(&cfg).map_err(err)?;
    let ja = serde_json::to_string_pretty(&a).unwrap();
    let jb = serde_json::to_string_pretty(&b).unwrap();
    ensure(ja == jb, || "reports differ between identical runs".into())?;
    let mut certs = 0;
    for pop in &a.populations {
        for c in &pop.smallest {
            ensure(c.verify().map_err(err)?, || format!("certificate {} does not reproduce", c.index))?;
            let round: corrineq::explorer::Certificate = serde_json::from_str(&serde_json::to_string(c).unwrap()).unwrap();
            ensure(round.verify().map_err(err)?, || "certificate JSON round trip fails".into())?;
            certs += 1;
        }
    }
    Ok(format!(
        "10000 instances in {first_run:.2?}, min E_3 = {}, violation_found = {}, {certs} certificates reproduce, reports byte-identical",
        a.min_value.unwrap(),
        a.violation_found
    ))
}

fn main() -> ExitCode {
    let series = c7_series_routes();
    let results: Vec<(&str, Outcome)> = vec![
        ("C1 Chebyshev case", c1_chebyshev()),
        ("C2 Lemma suite n=3,4,5", c2_lemma()),
        ("C3 F partition sum = closed form", c3_coefficient_identity()),
        ("C4 B formula = oracle, B >= 0, base case", c4_b_certification()),
        ("C5 rising factorial identity", c5_identity()),
        ("C6 annihilation identity", c6_annihilation()),
        ("C7 series route equivalence", series.as_ref().map(|s| s.detail.clone()).map_err(Clone::clone)),
        ("C8 corollary on chains", c8_chain_corollary(&series)),
        ("C9 FKG machinery", c9_fkg_machinery()),
        ("C10 open-conjecture harness", c10_search_harness()),
    ];
    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
