//! Deterministic random graphs and functions.
//!
//! Every draw is seeded from `(seed, index, stream)` so a single instance
//! can be regenerated without replaying the ones before it.

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::VertexFunction;
use crate::graph::{EdgeRecord, GraphData, WeightedGraph};
use crate::heat::Potential;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphFamily {
    Path,
    Cycle,
    Complete,
    /// Rows times columns as close to square as `n` allows.
    Grid,
    ErdosRenyi { p: f64 },
    /// Uniform random recursive tree plus independent extra edges with probability `p_extra`.
    RandomTree { p_extra: f64 },
    CustomFile { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightScheme {
    Unit,
    LogUniform { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureScheme {
    Unit,
    /// `μ(x) = deg(x)`; isolated vertices get 1.
    Degree,
    LogUniform { lo: f64, hi: f64 },
}

/// Default range for log-uniform weights and measures.
pub const DEFAULT_LOG_RANGE: (f64, f64) = (0.1, 10.0);

/// Everything needed to draw one graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub family: GraphFamily,
    pub n_min: usize,
    pub n_max: usize,
    pub weights: WeightScheme,
    pub measure: MeasureScheme,
    #[serde(default)]
    pub require_connected: bool,
}

pub const MAX_CONNECT_ATTEMPTS: usize = 1000;

/// Independent RNG for `(seed, index, stream)`.
pub fn rng_for(seed: u64, index: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ stream);
    rng
}

pub fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        return lo;
    }
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

fn topology(family: &GraphFamily, n: usize, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    match family {
        GraphFamily::Path => (1..n).map(|i| (i - 1, i)).collect(),
        GraphFamily::Cycle => match n {
            0 | 1 => vec![],
            2 => vec![(0, 1)],
            _ => (0..n).map(|i| (i, (i + 1) % n)).collect(),
        },
        GraphFamily::Complete => (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect(),
        GraphFamily::Grid => {
            let rows = (1..=n).filter(|r| n.is_multiple_of(*r) && r * r <= n).max().unwrap_or(1);
            let cols = n / rows.max(1);
            let id = |r: usize, c: usize| r * cols + c;
            let mut e = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    if c + 1 < cols {
                        e.push((id(r, c), id(r, c + 1)));
                    }
                    if r + 1 < rows {
                        e.push((id(r, c), id(r + 1, c)));
                    }
                }
            }
            e
        }
        GraphFamily::ErdosRenyi { p } => (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|_| rng.gen_bool(p.clamp(0.0, 1.0)))
            .collect(),
        GraphFamily::RandomTree { p_extra } => {
            let mut e: Vec<(usize, usize)> = (1..n).map(|i| (rng.gen_range(0..i), i)).collect();
            for i in 0..n {
                for j in i + 1..n {
                    if rng.gen_bool(p_extra.clamp(0.0, 1.0)) && !e.contains(&(i, j)) {
                        e.push((i, j));
                    }
                }
            }
            e
        }
        GraphFamily::CustomFile { .. } => unreachable!("custom files are read, not drawn"),
    }
}

fn decorate(n: usize, topo: Vec<(usize, usize)>, spec: &GraphSpec, rng: &mut impl Rng) -> Result<WeightedGraph> {
    let edges: Vec<EdgeRecord> = topo
        .into_iter()
        .map(|(u, v)| EdgeRecord {
            u,
            v,
            w: match spec.weights {
                WeightScheme::Unit => 1.0,
                WeightScheme::LogUniform { lo, hi } => log_uniform(rng, lo, hi),
            },
        })
        .collect();
    let measure = match spec.measure {
        MeasureScheme::Unit => vec![1.0; n],
        MeasureScheme::Degree => {
            let mut deg = vec![0.0; n];
            for e in &edges {
                deg[e.u] += e.w;
                deg[e.v] += e.w;
            }
            deg.into_iter().map(|d| if d > 0.0 { d } else { 1.0 }).collect()
        }
        MeasureScheme::LogUniform { lo, hi } => (0..n).map(|_| log_uniform(rng, lo, hi)).collect(),
    };
    WeightedGraph::from_data(GraphData {
        n,
        directed: false,
        measure,
        edges,
        labels: None,
    })
}

/// Builds a graph of `family` on exactly `n` vertices with the given schemes.
pub fn fixture(family: GraphFamily, n: usize, weights: WeightScheme, measure: MeasureScheme) -> Result<WeightedGraph> {
    let spec = GraphSpec {
        family,
        n_min: n,
        n_max: n,
        weights,
        measure,
        require_connected: false,
    };
    generate(&spec, 0, 0)
}

/// Draws graph number `index`. Random families are redrawn until connected
/// when `spec.require_connected` is set.
pub fn generate(spec: &GraphSpec, seed: u64, index: u64) -> Result<WeightedGraph> {
    if let GraphFamily::CustomFile { path } = &spec.family {
        return crate::io::read_graph(path);
    }
    if spec.n_min > spec.n_max {
        return Err(Error::BadParameters(format!(
            "n_min {} exceeds n_max {}",
            spec.n_min, spec.n_max
        )));
    }
    let mut rng = rng_for(seed, index, 0);
    let n = rng.gen_range(spec.n_min..=spec.n_max);
    for _ in 0..MAX_CONNECT_ATTEMPTS {
        let topo = topology(&spec.family, n, &mut rng);
        let g = decorate(n, topo, spec, &mut rng)?;
        if !spec.require_connected || g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::GenerationExhausted(MAX_CONNECT_ATTEMPTS))
}

/// Log-uniform positive function on `n` vertices.
pub fn positive_function(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> VertexFunction {
    VertexFunction::from_fn(n, |_| log_uniform(rng, lo, hi))
}

/// Uniform function with values in `[-bound, bound]`.
pub fn bounded_function(rng: &mut impl Rng, n: usize, bound: f64) -> VertexFunction {
    VertexFunction::from_fn(n, |_| if bound > 0.0 { rng.gen_range(-bound..=bound) } else { 0.0 })
}

pub fn static_potential(rng: &mut impl Rng, n: usize, bound: f64) -> Potential {
    Potential::Static(bounded_function(rng, n, bound))
}
