use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use graphgrad::campaign::{read_config, run_campaign};
use graphgrad::harnack::{
    bounded_q_exponent, check_harnack, check_kernel_comparison_all, check_kernel_upper_bound,
    check_potential_term, grid_pairs, harnack_bound, HarnackBound, HarnackQuery, KernelBoundParams,
    DEFAULT_PANELS, HARNACK_TOL,
};
use graphgrad::heat::{heat_kernel, solve_heat, Method, Potential, StepControl};
use graphgrad::io::{read_function, read_graph};
use graphgrad::operators::{
    check_alt_estimate, check_gradient_estimate, check_laplacian_integral, check_sqrt_comparison,
    check_sqrt_heat_estimate,
};
use graphgrad::report::DEFAULT_REL_TOL;
use graphgrad::spectral::{check_cheng_bound, check_lower_bound, eigendecompose, spectrum_csv};
use graphgrad::{CheckOptions, CheckReport, Error, GraphConstants, VertexFunction, WeightedGraph};

#[derive(Parser)]
#[command(name = "graphgrad", version, about = "Gradient, Harnack and heat-kernel estimates on weighted graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    EigenExact,
    ExpmStep,
    Rk4,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::EigenExact => Method::EigenExact,
            MethodArg::ExpmStep => Method::ExpmStep,
            MethodArg::Rk4 => Method::Rk4,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the graph constants as JSON.
    Constants { graph: PathBuf },
    /// Run one check and print its report as JSON. Exits 1 if it fails.
    Check {
        name: String,
        #[arg(long)]
        graph: PathBuf,
        /// Positive function, or initial data for the heat-based checks.
        #[arg(long)]
        u: Option<PathBuf>,
        /// Static potential.
        #[arg(long)]
        q: Option<PathBuf>,
        /// Overrides the check's default tolerance.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = 2.0)]
        t_end: f64,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[arg(long, default_value_t = 0.1)]
        min_gap: f64,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        #[arg(long, default_value_t = 1.0)]
        c1: f64,
        #[arg(long, default_value_t = 1.0)]
        epsilon: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
    },
    /// Solve the heat equation and write `t,vertex,value` CSV.
    Heat {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        u0: PathBuf,
        #[arg(long)]
        q: Option<PathBuf>,
        #[arg(long, default_value_t = 0.0)]
        t0: f64,
        #[arg(long)]
        t1: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long, value_enum, default_value = "eigen-exact")]
        method: MethodArg,
    },
    /// Write the heat kernel at time `t` as `t,x,y,value` CSV.
    Kernel {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        t: f64,
    },
    /// Print the Harnack bound between `(x, t1)` and `(y, t2)` as JSON.
    Harnack {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long)]
        t1: f64,
        #[arg(long)]
        t2: f64,
        #[arg(long)]
        q: Option<PathBuf>,
        /// Also report the exponent of the form valid for `|q| <= c0`.
        #[arg(long)]
        c0: Option<f64>,
    },
    /// Run a campaign from a JSON config. Exits 1 if any check fails.
    Campaign {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the spectrum of `-Δ` as `index,eigenvalue` CSV.
    Eigs {
        #[arg(long)]
        graph: PathBuf,
    },
}

enum Failure {
    Check,
    Error(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn function(path: &Path, g: &WeightedGraph) -> Result<VertexFunction, Error> {
    read_function(path, g)
}

fn potential(path: Option<&PathBuf>, g: &WeightedGraph) -> Result<Potential, Error> {
    Ok(match path {
        Some(p) => Potential::Static(function(p, g)?),
        None => Potential::zero(g.n()),
    })
}

fn vertex(g: &WeightedGraph, token: &str) -> Result<usize, Error> {
    if let Some(labels) = &g.data().labels {
        if let Some(i) = labels.iter().position(|l| l == token) {
            return Ok(i);
        }
    }
    match token.parse::<usize>() {
        Ok(i) if i < g.n() => Ok(i),
        _ => Err(Error::BadParameters(format!("unknown vertex {token:?}"))),
    }
}

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

#[derive(serde::Serialize)]
struct HarnackOutput {
    #[serde(flatten)]
    bound: HarnackBound,
    #[serde(skip_serializing_if = "Option::is_none")]
    bounded_q_exponent: Option<f64>,
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Constants { graph } => {
            let g = read_graph(graph)?;
            println!("{}", pretty(&GraphConstants::of(&g)));
        }
        Command::Check {
            name,
            graph,
            u,
            q,
            tol,
            t_end,
            steps,
            min_gap,
            t,
            delta,
            c1,
            epsilon,
            gamma,
        } => {
            let g = read_graph(graph)?;
            let report = run_check(&name, &g, u.as_deref(), q.as_ref(), tol, t_end, steps, min_gap, t, delta, KernelBoundParams { c1, epsilon, gamma })?;
            println!("{}", pretty(&report));
            if !report.passed {
                return Err(Failure::Check);
            }
        }
        Command::Heat {
            graph,
            u0,
            q,
            t0,
            t1,
            steps,
            method,
        } => {
            let g = read_graph(graph)?;
            if steps == 0 || !(t1 > t0) {
                return Err(Error::BadTimeGrid.into());
            }
            let u0 = function(&u0, &g)?;
            let times: Vec<f64> = (0..=steps)
                .map(|k| t0 + (t1 - t0) * k as f64 / steps as f64)
                .collect();
            let sol = solve_heat(&g, &u0, potential(q.as_ref(), &g)?, &times, method.into(), StepControl::default())?;
            print!("{}", sol.to_csv());
        }
        Command::Kernel { graph, t } => {
            let g = read_graph(graph)?;
            print!("{}", heat_kernel(&g, t)?.to_csv());
        }
        Command::Harnack {
            graph,
            x,
            y,
            t1,
            t2,
            q,
            c0,
        } => {
            let g = read_graph(graph)?;
            let (x, y) = (vertex(&g, &x)?, vertex(&g, &y)?);
            let q = potential(q.as_ref(), &g)?;
            let bound = harnack_bound(&g, &q, &HarnackQuery { x, y, t1, t2 }, DEFAULT_PANELS)?;
            let bounded_q_exponent = match c0 {
                Some(c0) => Some(bounded_q_exponent(&g, x, y, t1, t2, c0)?),
                None => None,
            };
            println!("{}", pretty(&HarnackOutput { bound, bounded_q_exponent }));
        }
        Command::Campaign { config } => {
            let cfg = read_config(config)?;
            let report = run_campaign(&cfg)?;
            if cfg.output_path.is_none() {
                println!("{}", report.to_json());
            }
            for s in &report.checks {
                eprintln!("{}: {}/{} passed, {} errors", s.name, s.passed, s.instances, s.errors);
            }
            if !report.all_passed {
                return Err(Failure::Check);
            }
        }
        Command::Eigs { graph } => {
            let g = read_graph(graph)?;
            print!("{}", spectrum_csv(&eigendecompose(&g)?));
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_check(
    name: &str,
    g: &WeightedGraph,
    u: Option<&Path>,
    q: Option<&PathBuf>,
    tol: Option<f64>,
    t_end: f64,
    steps: usize,
    min_gap: f64,
    t: f64,
    delta: f64,
    params: KernelBoundParams,
) -> Result<CheckReport, Error> {
    let opts = CheckOptions::with_tol(tol.unwrap_or(DEFAULT_REL_TOL));
    let need_u = || -> Result<VertexFunction, Error> {
        let path = u.ok_or_else(|| Error::BadParameters(format!("{name} needs --u")))?;
        function(path, g)
    };
    match name {
        "gradient_estimate" => check_gradient_estimate(g, &need_u()?, &opts),
        "alt_estimate" => check_alt_estimate(g, &need_u()?, &opts),
        "sqrt_comparison" => check_sqrt_comparison(g, &need_u()?, &opts),
        "laplacian_integral" => check_laplacian_integral(g, &need_u()?, tol.unwrap_or(1e-12)),
        "cheng_bound" => check_cheng_bound(g, &opts),
        "lower_bound" => check_lower_bound(g, &opts),
        "kernel_comparison" => check_kernel_comparison_all(g, t, delta, &opts),
        "kernel_upper_bound" => check_kernel_upper_bound(g, t, &params, &opts),
        "sqrt_heat_estimate" | "harnack" | "potential_term" => {
            if steps == 0 || !(t_end > 0.0) {
                return Err(Error::BadTimeGrid);
            }
            let times: Vec<f64> = (0..=steps).map(|k| t_end * k as f64 / steps as f64).collect();
            let sol = solve_heat(g, &need_u()?, potential(q, g)?, &times, Method::EigenExact, StepControl::default())?;
            let limit = Method::EigenExact.residual_limit();
            let pairs = grid_pairs(&sol, min_gap);
            match name {
                "sqrt_heat_estimate" => check_sqrt_heat_estimate(&sol, limit, &opts),
                "harnack" => check_harnack(&sol, &pairs, limit, tol.unwrap_or(HARNACK_TOL), DEFAULT_PANELS),
                _ => check_potential_term(&sol, &pairs, DEFAULT_PANELS, &opts),
            }
        }
        other => Err(Error::UnknownCheck(other.to_string())),
    }
}
