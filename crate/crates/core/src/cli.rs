//! The `harity` experiment runner: configuration (JSON file plus flag overrides), seeded
//! execution and CSV/JSON emission.
//!
//! Every CSV row carries the value it is compared against (`bound`), the measured value,
//! its Monte Carlo standard error and `slack`, the margin in the favorable direction (three
//! standard errors included); `ok` is `slack ≥ 0`.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::adversaries::{find_clean_subset, full_binary_class, nfl_lower_bound, nfl_worst_f, random_ramsey_instance, ramsey_rho, verify_clean_subset, ShatteredScenario};
use crate::dims::{growth_bound, growth_function, vcn_k};
use crate::families::{builtin_families, family_by_name, FamilySpec};
use crate::hypotheses::{partize_class, partize_hypothesis, point_count};
use crate::learners::{check_uniform_convergence, erm, estimate_pac_success, m_uc, total_losses};
use crate::losses::{agnostic_total_loss, agnostic_zero_one, bayes_predictor, wrap_agnostic, zero_one_loss};
use crate::reductions::{big_phi_m, config_law, departization_count, departization_p, partite_product_law, phi_m, phi_m_pushforward};
use crate::sampler::{random_agnostic_scenario, Measure, SampleDrawer, Scenario, SeededStream};
use crate::templates::{partize_template, Config};
use crate::{qf, Setting};

pub const SCHEMA_VERSION: u32 = 1;

const MAX_M: usize = 5000;
const MAX_TRIALS: u64 = 1_000_000;
const MAX_MEMBERS: usize = 1 << 16;
const MAX_ATOMS: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Dims,
    Sample,
    Learn,
    VerifyUc,
    Nofreelunch,
    Reduce,
    Ramsey,
    Bayes,
}

impl Kind {
    fn name(self) -> &'static str {
        match self {
            Kind::Dims => "dims",
            Kind::Sample => "sample",
            Kind::Learn => "learn",
            Kind::VerifyUc => "verify-uc",
            Kind::Nofreelunch => "nofreelunch",
            Kind::Reduce => "reduce",
            Kind::Ramsey => "ramsey",
            Kind::Bayes => "bayes",
        }
    }
}

/// Command line: the experiment kind and scalar overrides of the JSON configuration.
#[derive(Parser, Debug)]
#[command(name = "harity", version, about = "Finite-space experiments in high-arity PAC learning")]
pub struct Cli {
    #[arg(value_enum)]
    pub kind: Kind,
    /// JSON configuration; flags override its scalars.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Family name (`matching:N`, `bdeg:N:D`, `dist:N`, `maxg:N`, `highorder:N`,
    /// `partition:<file>`, or `all` for dims).
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub loss: Option<String>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Sample sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub m: Option<Vec<usize>>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Master seed; falls back to `HARITY_SEED`, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Shattered-set size for `nofreelunch`.
    #[arg(long)]
    pub d: Option<usize>,
    /// Subset sizes for `ramsey`, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Random instances for `ramsey` and `bayes`.
    #[arg(long)]
    pub instances: Option<usize>,
    /// Class index of the target hypothesis (default: the last member).
    #[arg(long)]
    pub target: Option<usize>,
    /// Output directory for `<kind>.csv` and `<kind>.json`; stdout/stderr when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub workers: Option<usize>,
}

/// Fully resolved experiment configuration, echoed in the JSON summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: String,
    pub loss: String,
    pub eps: f64,
    pub delta: f64,
    pub m: Vec<usize>,
    pub trials: u64,
    pub seed: Option<u64>,
    pub d: usize,
    pub n: Vec<usize>,
    pub instances: usize,
    pub target: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            family: "matching:3".into(),
            loss: "01".into(),
            eps: 0.2,
            delta: 0.2,
            m: vec![10, 20, 40],
            trials: 1000,
            seed: None,
            d: 20,
            n: vec![3, 4],
            instances: 20,
            target: None,
        }
    }
}

/// One CSV row.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub experiment: String,
    pub family: String,
    pub d: Option<usize>,
    pub m: Option<usize>,
    pub eps: Option<f64>,
    pub bound: f64,
    pub measured: f64,
    pub std_err: f64,
    pub slack: f64,
    pub ok: bool,
    pub note: String,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Infeasible(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(s) => write!(f, "configuration error: {s}"),
            CliError::Infeasible(s) => write!(f, "infeasible instance: {s}"),
            CliError::Io(s) => write!(f, "i/o error: {s}"),
        }
    }
}

type Res<T> = Result<T, CliError>;

/// Merges defaults, the JSON file and flag overrides, then validates.
pub fn resolve(cli: &Cli, env_seed: Option<String>) -> Res<(ExperimentConfig, u64)> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(v) = &cli.family {
        cfg.family = v.clone();
    }
    if let Some(v) = &cli.loss {
        cfg.loss = v.clone();
    }
    if let Some(v) = cli.eps {
        cfg.eps = v;
    }
    if let Some(v) = cli.delta {
        cfg.delta = v;
    }
    if let Some(v) = &cli.m {
        cfg.m = v.clone();
    }
    if let Some(v) = cli.trials {
        cfg.trials = v;
    }
    if let Some(v) = cli.d {
        cfg.d = v;
    }
    if let Some(v) = &cli.n {
        cfg.n = v.clone();
    }
    if let Some(v) = cli.instances {
        cfg.instances = v;
    }
    if let Some(v) = cli.target {
        cfg.target = Some(v);
    }
    let seed = match (cli.seed, cfg.seed, env_seed) {
        (Some(s), _, _) | (None, Some(s), _) => s,
        (None, None, Some(e)) => e.trim().parse().map_err(|_| CliError::Config(format!("HARITY_SEED={e:?} is not an integer")))?,
        (None, None, None) => 0,
    };
    cfg.seed = Some(seed);
    if !(cfg.eps > 0.0 && cfg.eps < 1.0) || !(cfg.delta > 0.0 && cfg.delta < 1.0) {
        return Err(CliError::Config("ε and δ must lie in (0, 1)".into()));
    }
    if cfg.trials == 0 {
        return Err(CliError::Config("trials must be at least 1".into()));
    }
    if cfg.m.is_empty() {
        return Err(CliError::Config("need at least one sample size".into()));
    }
    if cfg.loss != "01" {
        return Err(CliError::Config(format!("unknown loss {:?} (supported: 01)", cfg.loss)));
    }
    if cfg.trials > MAX_TRIALS {
        return Err(CliError::Infeasible(format!("trials {} exceed the cap {MAX_TRIALS}", cfg.trials)));
    }
    if let Some(&m) = cfg.m.iter().find(|&&m| m > MAX_M) {
        return Err(CliError::Infeasible(format!("m = {m} exceeds the cap {MAX_M}")));
    }
    Ok((cfg, seed))
}

fn family(cfg: &ExperimentConfig) -> Res<FamilySpec> {
    let f = family_by_name(&cfg.family).map_err(CliError::Config)?;
    if f.class.len() > MAX_MEMBERS {
        return Err(CliError::Infeasible(format!("{} has {} members (cap {MAX_MEMBERS})", f.class.name, f.class.len())));
    }
    Ok(f)
}

fn target_scenario(spec: &FamilySpec, cfg: &ExperimentConfig) -> Res<Scenario> {
    let i = cfg.target.unwrap_or(spec.class.len() - 1);
    if i >= spec.class.len() {
        return Err(CliError::Config(format!("target {i} out of range (class has {} members)", spec.class.len())));
    }
    Scenario::new(spec.class.k, spec.measure.clone(), None, spec.class.get(i)).map_err(CliError::Config)
}

fn row(cfg: &ExperimentConfig, kind: Kind, family: &str) -> Row {
    Row {
        experiment: kind.name().into(),
        family: family.into(),
        d: None,
        m: None,
        eps: Some(cfg.eps),
        bound: 0.0,
        measured: 0.0,
        std_err: 0.0,
        slack: 0.0,
        ok: true,
        note: String::new(),
    }
}

/// Lower bound check: `measured ≥ bound − 3σ`.
fn at_least(mut r: Row, bound: f64, measured: f64, std_err: f64) -> Row {
    r.bound = bound;
    r.measured = measured;
    r.std_err = std_err;
    r.slack = measured - bound + 3.0 * std_err;
    r.ok = r.slack >= 0.0;
    r
}

/// Upper bound check: `measured ≤ bound + 3σ`.
fn at_most(mut r: Row, bound: f64, measured: f64, std_err: f64) -> Row {
    r.bound = bound;
    r.measured = measured;
    r.std_err = std_err;
    r.slack = bound - measured + 3.0 * std_err;
    r.ok = r.slack >= 0.0;
    r
}

fn run_dims(cfg: &ExperimentConfig) -> Res<Vec<Row>> {
    let specs = if cfg.family == "all" { builtin_families() } else { vec![family(cfg)?] };
    let mut rows = Vec::new();
    for spec in specs {
        let computed = vcn_k(&spec.class, spec.vcn + 1).map_err(CliError::Infeasible)?;
        let mut r = row(cfg, Kind::Dims, &spec.class.name);
        r.eps = None;
        r.d = Some(computed.value());
        r.bound = spec.vcn as f64;
        r.measured = computed.value() as f64;
        r.ok = spec.verify(spec.vcn + 1).is_ok();
        r.slack = if r.ok { 0.0 } else { -(r.measured - r.bound).abs() };
        r.note = format!("recorded VCN vs computed ({computed})");
        rows.push(r);
        for &m in cfg.m.iter().filter(|&&m| m <= 5) {
            let tau = growth_function(&spec.class, m).map_err(CliError::Infeasible)?;
            let (bound, _) = growth_bound(spec.vcn, m, spec.class.labels);
            let mut r = row(cfg, Kind::Dims, &spec.class.name);
            r.eps = None;
            r.d = Some(spec.vcn);
            r.m = Some(m);
            r = at_most(r, bound as f64, tau as f64, 0.0);
            r.note = "growth function vs (m+1)_min(d,m+1)·binom(L,2)^d".into();
            rows.push(r);
        }
    }
    Ok(rows)
}

fn run_sample(cfg: &ExperimentConfig, seed: u64) -> Res<Vec<Row>> {
    let spec = family(cfg)?;
    let sc = target_scenario(&spec, cfg)?;
    if spec.class.labels != 2 {
        return Err(CliError::Config("sample statistics need binary labels".into()));
    }
    // each label has the law of F at one μ-distributed local point
    let expected: f64 = sc.x_measure().atoms().iter().filter(|(x, _)| sc.f.eval(x) == 1).map(|(_, p)| qf(p)).sum();
    let mut rows = Vec::new();
    for &m in &cfg.m {
        let drawer = SampleDrawer::new(&sc, m);
        let fr: Vec<f64> = (0..cfg.trials)
            .map(|t| {
                let s = drawer.draw(&mut SeededStream::new(seed, t).rng());
                let y = s.labels();
                if y.is_empty() {
                    expected
                } else {
                    y.iter().filter(|&&v| v == 1).count() as f64 / y.len() as f64
                }
            })
            .collect();
        let n = fr.len() as f64;
        let mean = fr.iter().sum::<f64>() / n;
        let var = fr.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        let se = (var / n).sqrt();
        let mut r = row(cfg, Kind::Sample, &spec.class.name);
        r.eps = None;
        r.m = Some(m);
        r.bound = expected;
        r.measured = mean;
        r.std_err = se;
        r.slack = 3.0 * se + 1e-12 - (mean - expected).abs();
        r.ok = r.slack >= 0.0;
        r.note = "mean positive-label fraction vs its exact expectation".into();
        rows.push(r);
    }
    Ok(rows)
}

fn run_learn(cfg: &ExperimentConfig, seed: u64) -> Res<Vec<Row>> {
    let spec = family(cfg)?;
    let sc = target_scenario(&spec, cfg)?;
    let c = &spec.class;
    let ell = agnostic_zero_one(c.labels, c.k, c.setting, c.sizes.clone());
    let a = erm(c, &ell);
    let muc = m_uc(spec.vcn, c.k, c.labels, 1.0, cfg.eps, cfg.delta);
    Ok(cfg
        .m
        .iter()
        .map(|&m| {
            let rep = estimate_pac_success(&a, &sc, &ell, m, cfg.eps, 0.0, cfg.trials, seed);
            let mut r = at_least(row(cfg, Kind::Learn, &c.name), 1.0 - cfg.delta, rep.frequency, rep.std_err);
            r.m = Some(m);
            r.d = Some(spec.vcn);
            if (m as f64) < muc {
                r.note = format!("ERM success; below m^UC = {muc:.1}, bound informational");
                r.ok = true;
            } else {
                r.note = "ERM success vs 1-δ".into();
            }
            r
        })
        .collect())
}

fn run_verify_uc(cfg: &ExperimentConfig, seed: u64) -> Res<Vec<Row>> {
    let spec = family(cfg)?;
    let sc = target_scenario(&spec, cfg)?;
    let c = &spec.class;
    let ell = agnostic_zero_one(c.labels, c.k, c.setting, c.sizes.clone());
    let totals = total_losses(&sc, c, &ell);
    let muc = m_uc(spec.vcn, c.k, c.labels, 1.0, cfg.eps, cfg.delta);
    Ok(cfg
        .m
        .iter()
        .map(|&m| {
            let rep = check_uniform_convergence(&sc, c, &ell, &totals, m, cfg.eps, cfg.trials, seed);
            let mut r = at_least(row(cfg, Kind::VerifyUc, &c.name), 1.0 - cfg.delta, rep.frequency, rep.std_err);
            r.m = Some(m);
            r.d = Some(spec.vcn);
            if rep.representative_lemma_violations > 0 {
                r.ok = false;
            }
            if (m as f64) < muc {
                r.ok = rep.representative_lemma_violations == 0;
                r.note = format!("ε-representative frequency; below m^UC = {muc:.1}, bound informational");
            } else {
                r.note = "ε-representative frequency vs 1-δ".into();
            }
            r
        })
        .collect())
}

fn run_nofreelunch(cfg: &ExperimentConfig, seed: u64) -> Res<Vec<Row>> {
    let d = cfg.d;
    if d == 0 {
        return Err(CliError::Config("d must be at least 1".into()));
    }
    if d > 30 {
        return Err(CliError::Infeasible(format!("d = {d} exceeds the cap 30")));
    }
    let sc = ShatteredScenario::full_binary(d);
    let class = full_binary_class(d);
    let ell = agnostic_zero_one(2, 1, Setting::NonPartite, vec![d]);
    let a = erm(&class, &ell);
    cfg.m
        .iter()
        .map(|&m| {
            let bound = nfl_lower_bound(cfg.eps, m, d, 1.0, 1.0).map_err(CliError::Config)?;
            let (b, w) = nfl_worst_f(&a, &sc, m, cfg.eps, cfg.trials, seed);
            let mut r = at_least(row(cfg, Kind::Nofreelunch, &class.name), bound, w.failure, w.std_err);
            r.d = Some(d);
            r.m = Some(m);
            r.note = format!("ERM failure at worst |B| = {}", b.iter().filter(|&&x| x).count());
            Ok(r)
        })
        .collect()
}

fn run_reduce(cfg: &ExperimentConfig) -> Res<Vec<Row>> {
    let spec = family(cfg)?;
    let c = &spec.class;
    let Measure::NonPartite(mu) = &spec.measure else {
        return Err(CliError::Config("reduce expects a non-partite family".into()));
    };
    let k = c.k;
    let part = partize_template(mu, k).map_err(CliError::Config)?;
    let members: Vec<_> = c.members().into_iter().take(16).collect();
    let mut rows = Vec::new();
    for &m in &cfg.m {
        if m < k {
            continue;
        }
        let law = config_law(mu, m, k);
        let atoms: usize = law.sizes.iter().product();
        if atoms > MAX_ATOMS {
            return Err(CliError::Infeasible(format!("{atoms} configurations at m = {m} (cap {MAX_ATOMS})")));
        }
        let equal = phi_m_pushforward(mu, m, k).map_err(CliError::Config)? == partite_product_law(&part, m / k);
        let mut r = row(cfg, Kind::Reduce, &c.name);
        r.eps = None;
        r.m = Some(m);
        r.bound = 1.0;
        r.measured = equal as u8 as f64;
        r.ok = equal;
        r.slack = if equal { 0.0 } else { -1.0 };
        r.note = "pushforward of μ^m under φ_m equals (μ^kpart)^⌊m/k⌋ (exact)".into();
        rows.push(r);
        let mut mismatches = 0usize;
        for (coords, _) in law.atoms() {
            let x = Config { m, cap: k, coords };
            let px = phi_m(&x, k).map_err(CliError::Config)?;
            for f in &members {
                let lhs = big_phi_m(&f.star(&x), m, k, c.labels).map_err(CliError::Config)?;
                if lhs != partize_hypothesis(f).star_partite(&px) {
                    mismatches += 1;
                }
            }
        }
        let mut r = row(cfg, Kind::Reduce, &c.name);
        r.eps = None;
        r.m = Some(m);
        r = at_most(r, 0.0, mismatches as f64, 0.0);
        r.note = format!("Φ_m∘F* vs (F^kpart)*∘φ_m mismatches over {} members", members.len());
        rows.push(r);
    }
    let mut r = row(cfg, Kind::Reduce, &c.name);
    r.eps = None;
    r.bound = qf(&departization_p(k));
    r.measured = r.bound;
    r.note = format!("departization p; R(k,k) = {}", departization_count(k, k));
    rows.push(r);
    let pc = partize_class(c);
    let mut r = row(cfg, Kind::Reduce, &pc.name);
    r.eps = None;
    let (a, b) = (spec.vcn as f64, vcn_k(&pc, spec.vcn + 1).map_err(CliError::Infeasible)?.value() as f64);
    r.bound = a;
    r.measured = b;
    r.ok = a == b;
    r.slack = -(a - b).abs();
    r.note = "VCN of the partized class equals VCN of the class".into();
    rows.push(r);
    Ok(rows)
}

fn run_ramsey(cfg: &ExperimentConfig, seed: u64) -> Res<Vec<Row>> {
    let mut rows = Vec::new();
    for &n in &cfg.n {
        if !(1..=5).contains(&n) {
            return Err(CliError::Infeasible(format!("n = {n}: exhaustive search supports 1 ≤ n ≤ 5")));
        }
        let mut verified = 0usize;
        for i in 0..cfg.instances {
            let (f1, f2) = random_ramsey_instance(n, seed.wrapping_add(i as u64));
            let g = |a: usize, b: usize| f2[a][b];
            if let Some(u) = find_clean_subset(&f1, &g, n) {
                if u.len() == n && verify_clean_subset(&f1, &g, &u) {
                    verified += 1;
                }
            }
        }
        let mut r = row(cfg, Kind::Ramsey, "random");
        r.eps = None;
        r.d = Some(ramsey_rho(n));
        r.m = Some(n);
        r = at_least(r, cfg.instances as f64, verified as f64, 0.0);
        r.note = format!("clean {n}-subsets found within ρ({n}) = {} and re-verified", ramsey_rho(n));
        rows.push(r);
    }
    Ok(rows)
}

fn run_bayes(cfg: &ExperimentConfig, seed: u64) -> Res<Vec<Row>> {
    let spec = family(cfg)?;
    let c = &spec.class;
    let visible: Vec<usize> = match &spec.measure {
        Measure::NonPartite(mu) => mu.weights.iter().map(Vec::len).collect(),
        Measure::Partite(mu) => mu.weights.iter().map(Vec::len).collect(),
    };
    let hidden = vec![2; visible.len()];
    let points = point_count(&c.sizes) * point_count(&vec![2; c.sizes.len()]);
    if points > 10_000 {
        return Err(CliError::Infeasible(format!("{points} configuration points (cap 10^4)")));
    }
    let loss = zero_one_loss(c.labels, c.k, c.setting, c.sizes.clone());
    let ell = wrap_agnostic(&loss);
    let mut rows = Vec::new();
    for i in 0..cfg.instances {
        let sc = random_agnostic_scenario(c.k, c.setting, &visible, &hidden, c.labels, seed.wrapping_add(i as u64));
        let b = agnostic_total_loss(&sc, &ell, &bayes_predictor(&sc, &loss));
        let best = total_losses(&sc, c, &ell).into_iter().min().expect("non-empty class");
        let mut r = row(cfg, Kind::Bayes, &c.name);
        r.eps = None;
        r.d = Some(i);
        r.bound = qf(&best);
        r.measured = qf(&b);
        r.slack = qf(&(&best - &b));
        r.ok = b <= best;
        r.note = "Bayes predictor total loss vs best class member (exact)".into();
        rows.push(r);
    }
    Ok(rows)
}

/// Runs one experiment and returns its rows.
pub fn execute(kind: Kind, cfg: &ExperimentConfig, seed: u64) -> Res<Vec<Row>> {
    match kind {
        Kind::Dims => run_dims(cfg),
        Kind::Sample => run_sample(cfg, seed),
        Kind::Learn => run_learn(cfg, seed),
        Kind::VerifyUc => run_verify_uc(cfg, seed),
        Kind::Nofreelunch => run_nofreelunch(cfg, seed),
        Kind::Reduce => run_reduce(cfg),
        Kind::Ramsey => run_ramsey(cfg, seed),
        Kind::Bayes => run_bayes(cfg, seed),
    }
}

pub fn to_csv(rows: &[Row]) -> Res<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Io(e.to_string()))?;
    }
    String::from_utf8(w.into_inner().map_err(|e| CliError::Io(e.to_string()))?).map_err(|e| CliError::Io(e.to_string()))
}

fn git_describe() -> String {
    std::process::Command::new("git")
        .args(["describe", "--always", "--dirty"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .map(|o| String::from_utf8_lossy(&o.stdout).trim().to_string())
        .unwrap_or_else(|| "unknown".into())
}

pub fn summary(kind: Kind, cfg: &ExperimentConfig, rows: &[Row], wall: f64) -> serde_json::Value {
    let failures = rows.iter().filter(|r| !r.ok).count();
    let mut counts = BTreeMap::new();
    counts.insert("rows", rows.len());
    counts.insert("failures", failures);
    serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "experiment": kind.name(),
        "config": cfg,
        "git_describe": git_describe(),
        "wall_time_seconds": wall,
        "counts": counts,
        "all_ok": failures == 0,
    })
}

/// Parses arguments, runs, writes outputs and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

fn run(cli: &Cli) -> Res<()> {
    let (cfg, seed) = resolve(cli, std::env::var("HARITY_SEED").ok())?;
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(CliError::Config("workers must be at least 1".into()));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
    }
    let start = Instant::now();
    let rows = execute(cli.kind, &cfg, seed)?;
    let csv = to_csv(&rows)?;
    let json = serde_json::to_string_pretty(&summary(cli.kind, &cfg, &rows, start.elapsed().as_secs_f64())).expect("serializable");
    match &cli.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
            let write = |name: String, body: &str| {
                let p = dir.join(name);
                std::fs::write(&p, body).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
            };
            write(format!("{}.csv", cli.kind.name()), &csv)?;
            write(format!("{}.json", cli.kind.name()), &json)?;
        }
        None => {
            print!("{csv}");
            eprintln!("{json}");
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("harity").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn resolution_and_validation() {
        let (cfg, seed) = resolve(&parse(&["learn", "--eps", "0.1", "--m", "5,6"]), None).unwrap();
        assert_eq!((cfg.eps, cfg.m.clone(), seed), (0.1, vec![5, 6], 0));
        assert_eq!(resolve(&parse(&["learn"]), Some("17".into())).unwrap().1, 17);
        assert_eq!(resolve(&parse(&["learn", "--seed", "3"]), Some("17".into())).unwrap().1, 3);
        assert_eq!(resolve(&parse(&["learn"]), Some("x".into())).unwrap_err().exit_code(), 2);
        assert_eq!(resolve(&parse(&["learn", "--eps", "1.5"]), None).unwrap_err().exit_code(), 2);
        assert_eq!(resolve(&parse(&["learn", "--trials", "0"]), None).unwrap_err().exit_code(), 2);
        assert_eq!(resolve(&parse(&["learn", "--m", "999999"]), None).unwrap_err().exit_code(), 3);
        assert_eq!(resolve(&parse(&["learn", "--loss", "hinge"]), None).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn config_file_with_overrides() {
        let dir = std::env::temp_dir().join(format!("harity-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("c.json");
        std::fs::write(&p, r#"{"family": "dist:6", "m": [3, 4], "eps": 0.3, "seed": 9}"#).unwrap();
        let (cfg, seed) = resolve(&parse(&["learn", "--config", p.to_str().unwrap(), "--eps", "0.25"]), None).unwrap();
        assert_eq!((cfg.family.as_str(), cfg.eps, seed), ("dist:6", 0.25, 9));
        std::fs::write(&p, r#"{"famly": "dist:6"}"#).unwrap();
        assert_eq!(resolve(&parse(&["learn", "--config", p.to_str().unwrap()]), None).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn experiments_produce_rows() {
        let cfg = ExperimentConfig { m: vec![2, 3], trials: 50, instances: 3, d: 6, ..Default::default() };
        for kind in [Kind::Dims, Kind::Sample, Kind::Learn, Kind::VerifyUc, Kind::Nofreelunch, Kind::Reduce, Kind::Ramsey, Kind::Bayes] {
            let rows = execute(kind, &cfg, 1).unwrap();
            assert!(!rows.is_empty(), "{kind:?}");
            assert!(rows.iter().all(|r| r.ok), "{kind:?}: {rows:?}");
        }
        let bad = ExperimentConfig { family: "nope".into(), ..Default::default() };
        assert_eq!(execute(Kind::Learn, &bad, 0).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn csv_has_header_and_bound_column() {
        let cfg = ExperimentConfig { m: vec![5], d: 10, trials: 100, ..Default::default() };
        let csv = to_csv(&execute(Kind::Nofreelunch, &cfg, 0).unwrap()).unwrap();
        let header = csv.lines().next().unwrap();
        assert_eq!(header, "experiment,family,d,m,eps,bound,measured,std_err,slack,ok,note");
        assert_eq!(csv.lines().count(), 2);
    }
}
