use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::Path;

use corrineq::coefficients::{
    b_formula, b_oracle_from, base_case_certificates, bounded_tuples, compositions, f_closed_form,
    f_definitional, f_partition_sum, verify_e200, BaseCaseCertificate,
};
use corrineq::explorer::{corollary_batch, search_fkg, verify_lemma_batch, Interval, SearchConfig};
use corrineq::functional::{e_lambda_table, DEFAULT_MONOMIAL_BUDGET};
use corrineq::partitions::{c_lambda, count_shapes, integer_partitions};
use corrineq::series::{check_nonnegativity, corollary_direct, corollary_via_en, NonnegativityReport};
use corrineq::spaces::{fkg_check, FkgReport};
use corrineq::{algebra::parse_rational_list, e_n, expand_e_n, ChainSpace, Error, InstanceJson, Rational, Space};
use serde::Serialize;

use crate::output::{csv_to_stdout, write_csv, write_json};
use crate::{BatchArgs, Cli, CoeffMode, Command, Route};

pub const EXIT_OK: u8 = 0;
pub const EXIT_COUNTEREXAMPLE: u8 = 1;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_INTERNAL: u8 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn invalid(e: impl Display) -> Self {
        CliError {
            code: EXIT_INVALID,
            message: e.to_string(),
        }
    }

    pub fn io(e: impl Display) -> Self {
        Self::invalid(e)
    }

    pub fn internal(e: impl Display) -> Self {
        CliError {
            code: EXIT_INTERNAL,
            message: e.to_string(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Contract(_) | Error::Consistency(_) => CliError::internal(e),
            _ => CliError::invalid(e),
        }
    }
}

pub fn run(cli: &Cli) -> Result<u8, CliError> {
    match &cli.command {
        Command::Partitions { n } => partitions(cli, *n),
        Command::Eval { instance } => eval(cli, instance),
        Command::Coeffs { levels, n, mu, mode } => coeffs(cli, *levels, *n, mu.as_deref(), *mode),
        Command::Series { instance, truncation, route } => series(cli, instance, *truncation, *route),
        Command::VerifyLemma { batch } => verify_lemma(cli, batch),
        Command::SearchFkg { batch } => search(cli, batch),
        Command::Corollary { batch, lattice_count } => corollary(cli, batch, *lattice_count),
    }
}

fn read_instance(path: &Path) -> Result<InstanceJson, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
    Ok(InstanceJson::from_json(&text)?)
}

fn partitions(cli: &Cli, n: usize) -> Result<u8, CliError> {
    if n == 0 || n > corrineq::partitions::MAX_IDENTITY_N {
        return Err(CliError::invalid(format!("n must lie within 1..={}", corrineq::partitions::MAX_IDENTITY_N)));
    }
    let header = ["shape", "length", "set_partitions", "c_lambda"];
    let rows: Vec<Vec<String>> = integer_partitions(n)
        .iter()
        .map(|l| {
            vec![
                l.to_string(),
                l.len().to_string(),
                count_shapes(l).to_string(),
                c_lambda(l).to_string(),
            ]
        })
        .collect();
    csv_to_stdout(&header, &rows)?;
    if let Some(path) = &cli.csv {
        write_csv(path, &header, &rows)?;
    }
    Ok(EXIT_OK)
}

fn subset_label(mask: usize) -> String {
    let members: Vec<String> = (0..usize::BITS as usize)
        .filter(|i| mask >> i & 1 == 1)
        .map(|i| (i + 1).to_string())
        .collect();
    format!("{{{}}}", members.join(","))
}

#[derive(Serialize)]
struct EvalReport {
    n: usize,
    e_delta: BTreeMap<String, Rational>,
    e_lambda: Vec<(String, Rational)>,
    e_n: Rational,
    zero_mass_points: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fkg: Option<FkgReport>,
}

fn eval(cli: &Cli, path: &Path) -> Result<u8, CliError> {
    let inst = read_instance(path)?.functional()?;
    let table = inst.delta_table();
    let value = e_n(&inst)?;
    let lambdas = e_lambda_table(&inst)?;
    let (zeros, fkg) = match inst.space() {
        Space::Chain(c) => (c.zero_points(), None),
        Space::Lattice(l) => (l.zero_subsets(), Some(fkg_check(l))),
    };

    println!("E_delta");
    let mut delta_rows = Vec::new();
    for (mask, v) in table.iter().enumerate().skip(1) {
        println!("  {:<16} {v}", subset_label(mask));
        delta_rows.push(vec!["E_delta".into(), subset_label(mask), v.to_string()]);
    }
    println!("E_lambda");
    let mut lambda_rows = Vec::new();
    for (l, v) in &lambdas {
        println!("  {:<16} {v}  (c = {})", l.to_string(), c_lambda(l));
        lambda_rows.push(vec!["E_lambda".into(), l.to_string(), v.to_string()]);
    }
    if !zeros.is_empty() {
        println!("zero-mass points: {zeros:?}");
    }
    if let Some(f) = &fkg {
        println!("FKG condition: {}", if f.holds { "holds" } else { "fails" });
    }
    println!("E_{} = {value}", inst.n());

    if let Some(out) = &cli.out {
        let report = EvalReport {
            n: inst.n(),
            e_delta: table
                .iter()
                .enumerate()
                .skip(1)
                .map(|(m, v)| (subset_label(m), v.clone()))
                .collect(),
            e_lambda: lambdas.iter().map(|(l, v)| (l.to_string(), v.clone())).collect(),
            e_n: value.clone(),
            zero_mass_points: zeros,
            fkg,
        };
        write_json(&report, Some(out))?;
    }
    if let Some(path) = &cli.csv {
        let mut rows = delta_rows;
        rows.extend(lambda_rows);
        rows.push(vec!["E_n".into(), inst.n().to_string(), value.to_string()]);
        write_csv(path, &["quantity", "index", "value"], &rows)?;
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct CoeffEntry {
    formula: Rational,
    oracle: Rational,
    #[serde(rename = "match")]
    matches: bool,
    nonnegative: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    partition_sum: Option<Rational>,
}

#[derive(Serialize)]
struct CoeffReport {
    mode: &'static str,
    #[serde(rename = "N")]
    levels: usize,
    n: usize,
    mu: Vec<Rational>,
    all_match: bool,
    all_nonnegative: bool,
    entries: BTreeMap<String, CoeffEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    base_case: Vec<BaseCaseCertificate>,
}

fn tuple_label(t: &[usize]) -> String {
    let parts: Vec<String> = t.iter().map(usize::to_string).collect();
    format!("({})", parts.join(","))
}

fn coeffs(cli: &Cli, levels: Option<usize>, n: usize, mu: Option<&str>, mode: CoeffMode) -> Result<u8, CliError> {
    let mu = match (mu, levels) {
        (Some(s), _) => parse_rational_list(s)?,
        (None, Some(len)) => ChainSpace::uniform(len)?.mu().to_vec(),
        (None, None) => return Err(CliError::invalid("give --N or --mu")),
    };
    if levels.is_some_and(|len| len != mu.len()) {
        return Err(CliError::invalid("--N does not match the length of --mu"));
    }
    if mu.is_empty() {
        return Err(CliError::invalid("empty measure"));
    }
    if n == 0 || n > corrineq::functional::MAX_EN_N {
        return Err(CliError::invalid(format!("n must lie within 1..={}", corrineq::functional::MAX_EN_N)));
    }
    let len = mu.len();
    let mut entries = BTreeMap::new();
    let mut base_case = Vec::new();
    let mode_name = match mode {
        CoeffMode::FCheck => {
            for m in compositions(n, len) {
                let formula = f_closed_form(&m, &mu)?;
                let oracle = f_definitional(&m, &mu)?;
                let sum = f_partition_sum(&m, &mu)?;
                entries.insert(
                    m.to_string(),
                    CoeffEntry {
                        matches: formula == oracle && sum == oracle,
                        nonnegative: formula.is_nonnegative(),
                        formula,
                        oracle,
                        partition_sum: Some(sum),
                    },
                );
            }
            "F-check"
        }
        CoeffMode::BCheck => {
            let space = ChainSpace::new(mu.clone())?;
            let poly = expand_e_n(&space, n, DEFAULT_MONOMIAL_BUDGET)?;
            for prefix in bounded_tuples(n, len - 1) {
                let formula = b_formula(&prefix, n, &mu)?;
                let oracle = b_oracle_from(&poly, &prefix, n);
                entries.insert(
                    tuple_label(&prefix),
                    CoeffEntry {
                        matches: formula == oracle,
                        nonnegative: formula.is_nonnegative(),
                        formula,
                        oracle,
                        partition_sum: None,
                    },
                );
            }
            base_case = base_case_certificates(&space)?;
            "B-check"
        }
        CoeffMode::E200 => {
            let space = ChainSpace::new(mu.clone())?;
            let report = verify_e200(&space, n, DEFAULT_MONOMIAL_BUDGET)?;
            for c in report.monomials {
                entries.insert(
                    tuple_label(&c.levels),
                    CoeffEntry {
                        formula: c.formula,
                        oracle: c.oracle,
                        matches: c.matches,
                        nonnegative: c.nonnegative,
                        partition_sum: None,
                    },
                );
            }
            "e200"
        }
    };
    let all_match = entries.values().all(|e| e.matches);
    // raw F coefficients may be negative; only B and e200 coefficients must not be
    let all_nonnegative = entries.values().all(|e| e.nonnegative);
    let report = CoeffReport {
        mode: mode_name,
        levels: len,
        n,
        mu,
        all_match,
        all_nonnegative,
        entries,
        base_case,
    };
    write_json(&report, cli.out.as_deref())?;
    if let Some(path) = &cli.csv {
        let rows: Vec<Vec<String>> = report
            .entries
            .iter()
            .map(|(k, e)| {
                vec![
                    k.clone(),
                    e.formula.to_string(),
                    e.oracle.to_string(),
                    e.matches.to_string(),
                    e.nonnegative.to_string(),
                ]
            })
            .collect();
        write_csv(path, &["key", "formula", "oracle", "match", "nonnegative"], &rows)?;
    }
    let sign_required = mode != CoeffMode::FCheck;
    if !report.all_match || (sign_required && !report.all_nonnegative) {
        return Ok(EXIT_INTERNAL);
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct SeriesReport {
    truncation: usize,
    space: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    direct: Option<Vec<Rational>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    en: Option<Vec<Rational>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    routes_agree: Option<bool>,
    nonnegativity: NonnegativityReport,
    /// Nonnegativity is a theorem on chains and only an observation on
    /// lattices.
    asserted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    fkg: Option<FkgReport>,
}

fn series(cli: &Cli, path: &Path, truncation: usize, route: Route) -> Result<u8, CliError> {
    let (space, p) = read_instance(path)?.function_series(truncation)?;
    let direct = match route {
        Route::Direct | Route::Both => Some(corollary_direct(&space, &p)?),
        Route::En => None,
    };
    let en = match route {
        Route::En | Route::Both => Some(corollary_via_en(&space, &p)?),
        Route::Direct => None,
    };
    let routes_agree = match (&direct, &en) {
        (Some(a), Some(b)) => Some(a == b),
        _ => None,
    };
    let primary = direct.as_ref().or(en.as_ref()).expect("at least one route");
    let nonnegativity = check_nonnegativity(primary);
    let report = SeriesReport {
        truncation,
        space: if space.is_chain() { "chain" } else { "lattice" },
        direct: direct.map(|s| s.coeffs().to_vec()),
        en: en.map(|s| s.coeffs().to_vec()),
        routes_agree,
        asserted: space.is_chain(),
        fkg: match &space {
            Space::Lattice(l) => Some(fkg_check(l)),
            Space::Chain(_) => None,
        },
        nonnegativity,
    };
    write_json(&report, cli.out.as_deref())?;
    if let Some(path) = &cli.csv {
        let rows: Vec<Vec<String>> = (0..=truncation)
            .map(|k| {
                let get = |s: &Option<Vec<Rational>>| s.as_ref().map_or(String::new(), |c| c[k].to_string());
                vec![k.to_string(), get(&report.direct), get(&report.en)]
            })
            .collect();
        write_csv(path, &["order", "direct", "en"], &rows)?;
    }
    if routes_agree == Some(false) || (report.asserted && !report.nonnegativity.nonnegative) {
        return Ok(EXIT_INTERNAL);
    }
    Ok(EXIT_OK)
}

fn build_config(cli: &Cli, batch: &BatchArgs, base: SearchConfig) -> Result<SearchConfig, CliError> {
    let mut cfg = match &batch.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(CliError::invalid)?
        }
        None => base,
    };
    cfg.master_seed = cli.seed;
    if let Some(c) = cli.count {
        cfg.instance_count = c;
    }
    let merge = |r: Interval, lo: Option<usize>, hi: Option<usize>| Interval::new(lo.unwrap_or(r.min), hi.unwrap_or(r.max));
    cfg.n_range = merge(cfg.n_range, batch.n_min, batch.n_max);
    cfg.chain_len_range = merge(cfg.chain_len_range, batch.chain_min, batch.chain_max);
    cfg.ground_size_range = merge(cfg.ground_size_range, batch.ground_size_min, batch.ground_size_max);
    if let Some(d) = batch.max_den {
        cfg.max_denominator = d;
    }
    if let Some(t) = batch.truncation {
        cfg.truncation = t;
    }
    if let Some(k) = batch.top_k {
        cfg.top_k = k;
    }
    if let Some(b) = batch.time_budget {
        cfg.time_budget_seconds = b;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn opt(r: &Option<Rational>) -> String {
    r.as_ref().map_or(String::new(), Rational::to_string)
}

fn verify_lemma(cli: &Cli, batch: &BatchArgs) -> Result<u8, CliError> {
    let cfg = build_config(cli, batch, SearchConfig::default())?;
    let report = verify_lemma_batch(&cfg)?;
    write_json(&report, cli.out.as_deref())?;
    if let Some(path) = &cli.csv {
        let rows: Vec<Vec<String>> = report
            .populations
            .iter()
            .map(|p| vec![p.n.to_string(), p.instances.to_string(), p.negatives.to_string(), p.zero_values.to_string(), opt(&p.min)])
            .collect();
        write_csv(path, &["n", "instances", "negatives", "zeros", "min"], &rows)?;
    }
    if cli.out.is_some() {
        println!(
            "verify-lemma: {} instances, {} violations, min {}",
            report.instances_run,
            report.violations,
            opt(&report.min_value)
        );
    }
    Ok(if report.has_anomaly() { EXIT_INTERNAL } else { EXIT_OK })
}

fn search(cli: &Cli, batch: &BatchArgs) -> Result<u8, CliError> {
    let cfg = build_config(cli, batch, SearchConfig::default())?;
    let report = search_fkg(&cfg)?;
    write_json(&report, cli.out.as_deref())?;
    if let Some(path) = &cli.csv {
        let rows: Vec<Vec<String>> = report
            .populations
            .iter()
            .map(|p| vec![p.n.to_string(), p.instances.to_string(), p.negatives.to_string(), p.zero_values.to_string(), opt(&p.min)])
            .collect();
        write_csv(path, &["n", "instances", "negatives", "zeros", "min"], &rows)?;
    }
    if cli.out.is_some() {
        println!(
            "search-fkg: {} instances, min {}, violation found: {}",
            report.instances_run,
            opt(&report.min_value),
            report.violation_found
        );
    }
    if report.has_internal_failure() {
        Ok(EXIT_INTERNAL)
    } else if report.violation_found {
        Ok(EXIT_COUNTEREXAMPLE)
    } else {
        Ok(EXIT_OK)
    }
}

fn corollary(cli: &Cli, batch: &BatchArgs, lattice_count: usize) -> Result<u8, CliError> {
    let base = SearchConfig {
        instance_count: 100,
        chain_len_range: Interval::new(1, 4),
        ..SearchConfig::default()
    };
    let cfg = build_config(cli, batch, base)?;
    let report = corollary_batch(&cfg, lattice_count)?;
    write_json(&report, cli.out.as_deref())?;
    if let Some(path) = &cli.csv {
        let row = |name: &str, p: &corrineq::explorer::SeriesPopulation| {
            vec![
                name.to_string(),
                p.instances.to_string(),
                p.route_mismatches.to_string(),
                p.nonnegative_instances.to_string(),
                p.negative_instances.to_string(),
                opt(&p.min_coefficient),
            ]
        };
        let rows = vec![row("chain", &report.chain), row("lattice", &report.lattice)];
        write_csv(path, &["space", "instances", "route_mismatches", "nonnegative", "negative", "min_coefficient"], &rows)?;
    }
    if cli.out.is_some() {
        println!(
            "corollary: chain {}/{} nonnegative, lattice {}/{} nonnegative, route mismatches {}",
            report.chain.nonnegative_instances,
            report.chain.instances,
            report.lattice.nonnegative_instances,
            report.lattice.instances,
            report.chain.route_mismatches + report.lattice.route_mismatches
        );
    }
    Ok(if report.has_anomaly() { EXIT_INTERNAL } else { EXIT_OK })
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    #[test]
    fn subset_labels_are_one_based() {
        assert_eq!(subset_label(0b1), "{1}");
        assert_eq!(subset_label(0b101), "{1,3}");
    }

    #[test]
    fn flags_override_defaults() {
        let cli = Cli::parse_from(["corrineq", "--seed", "9", "--count", "12", "verify-lemma", "--n-max", "3", "--N-min", "2"]);
        let Command::VerifyLemma { batch } = &cli.command else { unreachable!() };
        let cfg = build_config(&cli, batch, SearchConfig::default()).unwrap();
        assert_eq!(cfg.master_seed, 9);
        assert_eq!(cfg.instance_count, 12);
        assert_eq!(cfg.n_range.max, 3);
        assert_eq!(cfg.chain_len_range.min, 2);
    }

    #[test]
    fn error_classes_map_to_exit_codes() {
        assert_eq!(CliError::from(Error::Parse("x".into())).code, EXIT_INVALID);
        assert_eq!(CliError::from(Error::Consistency("x".into())).code, EXIT_INTERNAL);
    }
}
