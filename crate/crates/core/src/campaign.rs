//! Batch verification over generated graphs and functions.
//!
//! Instance `i` of check `c` draws its graph from `(seed, i)` and its
//! functions from a stream fixed by the check name, so results do not
//! depend on which other checks run or in what order.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generate::{
    bounded_function, generate, positive_function, rng_for, static_potential, GraphFamily, GraphSpec, MeasureScheme,
    WeightScheme, DEFAULT_LOG_RANGE,
};
use crate::graph::{GraphData, WeightedGraph};
use crate::harnack::{check_harnack, check_kernel_comparison_all, check_potential_term, grid_pairs, DEFAULT_PANELS, HARNACK_TOL};
use crate::heat::{kernel_defects, solve_heat, Method, StepControl};
use crate::operators::{
    check_alt_estimate, check_gradient_estimate, check_laplacian_integral, check_sqrt_comparison,
    check_sqrt_heat_estimate,
};
use crate::report::{CheckOptions, CheckReport, Witness, DEFAULT_REL_TOL};
use crate::spectral::{check_cheng_bound, check_cheng_dirichlet, check_lower_bound};

/// Every check a campaign can run. The position is the RNG stream.
pub const CHECKS: [&str; 12] = [
    "gradient_estimate",
    "alt_estimate",
    "sqrt_comparison",
    "sqrt_heat_estimate",
    "laplacian_integral",
    "cheng_bound",
    "cheng_dirichlet",
    "lower_bound",
    "harnack",
    "potential_term",
    "kernel_comparison",
    "kernel_invariants",
];

fn default_n_min() -> usize {
    2
}
fn default_n_max() -> usize {
    20
}
fn default_weights() -> WeightScheme {
    WeightScheme::LogUniform {
        lo: DEFAULT_LOG_RANGE.0,
        hi: DEFAULT_LOG_RANGE.1,
    }
}
fn default_measure() -> MeasureScheme {
    MeasureScheme::LogUniform {
        lo: DEFAULT_LOG_RANGE.0,
        hi: DEFAULT_LOG_RANGE.1,
    }
}
fn default_u_range() -> (f64, f64) {
    (0.01, 100.0)
}
fn default_q_bound() -> f64 {
    1.0
}
fn default_t_end() -> f64 {
    2.0
}
fn default_steps() -> usize {
    10
}
fn default_min_gap() -> f64 {
    0.1
}
fn default_kernel_times() -> Vec<f64> {
    vec![1.0, 2.0]
}
fn default_deltas() -> Vec<f64> {
    vec![0.5, 1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub seed: u64,
    pub n_graphs: usize,
    pub graph_family: GraphFamily,
    #[serde(default = "default_n_min")]
    pub n_min: usize,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default = "default_weights")]
    pub weight_scheme: WeightScheme,
    #[serde(default = "default_measure")]
    pub measure_scheme: MeasureScheme,
    #[serde(default)]
    pub require_connected: bool,
    /// Range of the log-uniform positive test functions.
    #[serde(default = "default_u_range")]
    pub u_range: (f64, f64),
    /// Potentials are uniform in `[-q_bound, q_bound]`.
    #[serde(default = "default_q_bound")]
    pub q_bound: f64,
    /// Heat solutions run on `steps + 1` equally spaced times in `[0, t_end]`.
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// Smallest `T2 - T1` among Harnack pairs.
    #[serde(default = "default_min_gap")]
    pub min_gap: f64,
    #[serde(default = "default_kernel_times")]
    pub kernel_times: Vec<f64>,
    #[serde(default = "default_deltas")]
    pub deltas: Vec<f64>,
    #[serde(default)]
    pub checks: Vec<String>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
}

impl CampaignConfig {
    pub fn new(seed: u64, n_graphs: usize, graph_family: GraphFamily, checks: &[&str]) -> Self {
        Self {
            seed,
            n_graphs,
            graph_family,
            n_min: default_n_min(),
            n_max: default_n_max(),
            weight_scheme: default_weights(),
            measure_scheme: default_measure(),
            require_connected: false,
            u_range: default_u_range(),
            q_bound: default_q_bound(),
            t_end: default_t_end(),
            steps: default_steps(),
            min_gap: default_min_gap(),
            kernel_times: default_kernel_times(),
            deltas: default_deltas(),
            checks: checks.iter().map(|s| s.to_string()).collect(),
            tolerances: BTreeMap::new(),
            output_path: None,
        }
    }

    pub fn graph_spec(&self) -> GraphSpec {
        GraphSpec {
            family: self.graph_family.clone(),
            n_min: self.n_min,
            n_max: self.n_max,
            weights: self.weight_scheme,
            measure: self.measure_scheme,
            require_connected: self.require_connected,
        }
    }

    /// Tolerance for `check`: the override if present, else its default.
    pub fn tolerance(&self, check: &str) -> f64 {
        self.tolerances.get(check).copied().unwrap_or(match check {
            "harnack" => HARNACK_TOL,
            "laplacian_integral" => 1e-12,
            "kernel_invariants" => 1e-9,
            _ => DEFAULT_REL_TOL,
        })
    }

    fn validate(&self) -> Result<()> {
        for c in self.checks.iter().chain(self.tolerances.keys()) {
            if !CHECKS.contains(&c.as_str()) {
                return Err(Error::UnknownCheck(c.clone()));
            }
        }
        let mut seen = self.checks.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.checks.len() {
            return Err(Error::BadParameters("a check is listed twice".into()));
        }
        let (lo, hi) = self.u_range;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::BadParameters(format!("bad u_range ({lo}, {hi})")));
        }
        if !(self.q_bound >= 0.0 && self.t_end > 0.0 && self.steps > 0) {
            return Err(Error::BadParameters("need q_bound >= 0, t_end > 0, steps > 0".into()));
        }
        Ok(())
    }
}

/// One evaluated instance, embedded whole so it can be replayed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub index: usize,
    pub graph: Option<GraphData>,
    /// Functions the check consumed, keyed by role.
    pub inputs: BTreeMap<String, Vec<f64>>,
    /// Report with per-entry vectors dropped.
    pub report: Option<CheckReport>,
    pub error: Option<String>,
}

impl InstanceRecord {
    fn passed(&self) -> bool {
        self.report.as_ref().is_some_and(|r| r.passed)
    }

    /// Ordering key: errors first, then by excess over the tolerance.
    fn badness(&self) -> f64 {
        match &self.report {
            Some(r) => r.max_violation - r.tolerance,
            None => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub name: String,
    pub tolerance: f64,
    pub instances: usize,
    pub passed: usize,
    pub failed: usize,
    /// Instances that raised an error; they also count as failed.
    pub errors: usize,
    /// Smallest `rhs - lhs` over passing and failing reports.
    pub worst_slack: Option<f64>,
    pub worst_violation: Option<f64>,
    pub worst: Option<InstanceRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub version: String,
    pub config: CampaignConfig,
    pub checks: Vec<CheckSummary>,
    pub all_passed: bool,
    /// Seconds since the Unix epoch at start.
    pub started_at: u64,
    pub wall_clock_seconds: f64,
}

impl CampaignReport {
    /// Copy with timestamps zeroed, for comparing runs.
    pub fn without_timing(&self) -> Self {
        Self {
            started_at: 0,
            wall_clock_seconds: 0.0,
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

struct Outcome {
    inputs: BTreeMap<String, Vec<f64>>,
    result: Result<CheckReport>,
}

fn time_grid(t_end: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|k| t_end * k as f64 / steps as f64).collect()
}

fn run_one(cfg: &CampaignConfig, check: &str, stream: u64, index: usize, g: &WeightedGraph) -> Outcome {
    let mut rng = rng_for(cfg.seed, index as u64, stream + 1);
    let n = g.n();
    let tol = cfg.tolerance(check);
    let opts = CheckOptions::with_tol(tol);
    let (lo, hi) = cfg.u_range;
    let mut inputs = BTreeMap::new();
    let result = match check {
        "gradient_estimate" | "alt_estimate" | "sqrt_comparison" => {
            let u = positive_function(&mut rng, n, lo, hi);
            inputs.insert("u".to_string(), u.values().to_vec());
            match check {
                "gradient_estimate" => check_gradient_estimate(g, &u, &opts),
                "alt_estimate" => check_alt_estimate(g, &u, &opts),
                _ => check_sqrt_comparison(g, &u, &opts),
            }
        }
        "laplacian_integral" => {
            let f = bounded_function(&mut rng, n, hi);
            inputs.insert("f".to_string(), f.values().to_vec());
            check_laplacian_integral(g, &f, tol)
        }
        "sqrt_heat_estimate" | "harnack" | "potential_term" => {
            let u0 = positive_function(&mut rng, n, lo, hi);
            let q = static_potential(&mut rng, n, cfg.q_bound);
            inputs.insert("u0".to_string(), u0.values().to_vec());
            inputs.insert("q".to_string(), q.at(0.0).values().to_vec());
            let times = time_grid(cfg.t_end, cfg.steps);
            solve_heat(g, &u0, q, &times, Method::EigenExact, StepControl::default()).and_then(|sol| {
                let limit = Method::EigenExact.residual_limit();
                match check {
                    "sqrt_heat_estimate" => check_sqrt_heat_estimate(&sol, limit, &opts),
                    "harnack" => {
                        let pairs = grid_pairs(&sol, cfg.min_gap);
                        check_harnack(&sol, &pairs, limit, tol, DEFAULT_PANELS)
                    }
                    _ => {
                        let pairs = grid_pairs(&sol, cfg.min_gap);
                        check_potential_term(&sol, &pairs, DEFAULT_PANELS, &opts)
                    }
                }
            })
        }
        "cheng_bound" => check_cheng_bound(g, &opts),
        "cheng_dirichlet" => {
            use rand::Rng;
            let subset: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
            let subset = if subset.is_empty() { vec![0] } else { subset };
            inputs.insert("subset".to_string(), subset.iter().map(|&x| x as f64).collect());
            check_cheng_dirichlet(g, &subset, &opts)
        }
        "lower_bound" => check_lower_bound(g, &opts),
        "kernel_comparison" => {
            let mut reports = Vec::new();
            let mut err = None;
            'outer: for &t in &cfg.kernel_times {
                for &delta in &cfg.deltas {
                    match check_kernel_comparison_all(g, t, delta, &opts) {
                        Ok(r) => reports.push(r),
                        Err(e) => {
                            err = Some(e);
                            break 'outer;
                        }
                    }
                }
            }
            match err {
                Some(e) => Err(e),
                None => Ok(CheckReport::merge("kernel_comparison", reports, tol)),
            }
        }
        "kernel_invariants" => {
            kernel_defects(g, 0.3, 0.7).map(|d| {
                let named = |label: &str| Witness::Named { label: label.into() };
                CheckReport::from_entries_absolute(
                    check,
                    vec![d.negativity, d.symmetry, d.mass, d.semigroup],
                    vec![0.0; 4],
                    vec![named("negativity"), named("symmetry"), named("mass"), named("semigroup")],
                    tol,
                )
            })
        }
        other => Err(Error::UnknownCheck(other.to_string())),
    };
    Outcome { inputs, result }
}

fn slim(mut r: CheckReport) -> CheckReport {
    r.lhs_values.clear();
    r.rhs_values.clear();
    r.witnesses.clear();
    r
}

/// Runs every configured check on `n_graphs` generated graphs and writes the
/// report to `output_path` when one is set. Errors raised by a single
/// instance are recorded in its summary and do not stop the campaign.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignReport> {
    cfg.validate()?;
    let started = Instant::now();
    let started_at = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let spec = cfg.graph_spec();
    let mut summaries: Vec<CheckSummary> = cfg
        .checks
        .iter()
        .map(|name| CheckSummary {
            name: name.clone(),
            tolerance: cfg.tolerance(name),
            instances: 0,
            passed: 0,
            failed: 0,
            errors: 0,
            worst_slack: None,
            worst_violation: None,
            worst: None,
        })
        .collect();
    if !cfg.checks.is_empty() {
        for index in 0..cfg.n_graphs {
            let graph = generate(&spec, cfg.seed, index as u64);
            for summary in summaries.iter_mut() {
                let stream = CHECKS.iter().position(|c| *c == summary.name).unwrap() as u64;
                let record = match &graph {
                    Ok(g) => {
                        let out = run_one(cfg, &summary.name, stream, index, g);
                        InstanceRecord {
                            index,
                            graph: Some(g.data().clone()),
                            inputs: out.inputs,
                            error: out.result.as_ref().err().map(|e| e.to_string()),
                            report: out.result.ok().map(slim),
                        }
                    }
                    Err(e) => InstanceRecord {
                        index,
                        graph: None,
                        inputs: BTreeMap::new(),
                        report: None,
                        error: Some(e.to_string()),
                    },
                };
                absorb(summary, record);
            }
        }
    }
    let all_passed = summaries.iter().all(|s| s.failed == 0);
    let report = CampaignReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        checks: summaries,
        all_passed,
        started_at,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    if let Some(path) = &cfg.output_path {
        std::fs::write(path, report.to_json())?;
    }
    Ok(report)
}

fn absorb(s: &mut CheckSummary, record: InstanceRecord) {
    s.instances += 1;
    if record.passed() {
        s.passed += 1;
    } else {
        s.failed += 1;
    }
    if record.error.is_some() {
        s.errors += 1;
    }
    if let Some(r) = &record.report {
        if s.worst_slack.is_none_or(|w| r.slack < w) {
            s.worst_slack = Some(r.slack);
        }
        if s.worst_violation.is_none_or(|w| r.max_violation > w) {
            s.worst_violation = Some(r.max_violation);
        }
    }
    if s.worst.as_ref().is_none_or(|w| record.badness() > w.badness()) {
        s.worst = Some(record);
    }
}

/// Reads a JSON config.
pub fn read_config(path: impl AsRef<std::path::Path>) -> Result<CampaignConfig> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}
