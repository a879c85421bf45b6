//! Harnack estimates along shortest paths and heat-kernel comparisons.
//!
//! For a positive solution of `Δu - ∂_t u <= q u` and `T1 < T2`,
//!
//! ```text
//! u(x, T1) <= u(y, T2) exp{ (D_μ + sqrt(D_μ/d)) (T2 - T1)
//!                           + dist(x,y)^2 / (T2 - T1) * sqrt(d μ_max / w_min)
//!                           + min over shortest paths of F(q) }
//! ```
//!
//! where the path functional `F(q)` charges hop `k` of a path of length
//! `ℓ` over the time slice `[t_k, t_{k+1}]`, `t_k = T1 + k (T2 - T1)/ℓ`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{GraphConstants, ShortestPathDag, WeightedGraph};
use crate::heat::{heat_kernel_positive, heat_kernels, HeatSolution, Potential};
use crate::report::{CheckOptions, CheckReport, Witness};
use crate::spectral::eigendecompose;

/// Simpson panels per time slice for sampled potentials.
pub const DEFAULT_PANELS: usize = 64;

/// Cost of hop `from -> to` over `[t_k, t_{k+1}]`:
///
/// `∫ q(from, t) dt + ℓ²/(T2-T1)² ∫ (t - t_k)² (q(to, t) - q(from, t)) dt`.
///
/// Static potentials use the closed form; sampled ones use composite
/// Simpson with `panels` panels (rounded up to even).
#[allow(clippy::too_many_arguments)]
pub fn segment_cost(
    q: &Potential,
    from: usize,
    to: usize,
    t_k: f64,
    t_k1: f64,
    ell: usize,
    t1: f64,
    t2: f64,
    panels: usize,
) -> Result<f64> {
    let dt = (t2 - t1) / ell as f64;
    if ell == 0 || !((t_k1 - t_k - dt).abs() <= 1e-9 * (1.0 + dt.abs())) {
        return Err(Error::GridMismatch { t1: t_k, t2: t_k1 });
    }
    let weight = (ell as f64 / (t2 - t1)).powi(2);
    match q {
        Potential::Static(q) => Ok(q[from] * dt + dt / 3.0 * (q[to] - q[from])),
        Potential::Sampled { .. } => {
            let (lo, hi) = q.span();
            if t_k < lo - 1e-12 || t_k1 > hi + 1e-12 {
                return Err(Error::GridMismatch { t1: t_k, t2: t_k1 });
            }
            let integrand = |t: f64| {
                let qf = q.value(from, t);
                qf + weight * (t - t_k).powi(2) * (q.value(to, t) - qf)
            };
            Ok(simpson(integrand, t_k, t_k1, panels))
        }
    }
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let m = (panels.max(2) + 1) & !1;
    let h = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// `F(q)` along one explicit path.
pub fn path_functional(q: &Potential, path: &[usize], t1: f64, t2: f64, panels: usize) -> Result<f64> {
    let ell = path.len().saturating_sub(1);
    if ell == 0 {
        return Ok(0.0);
    }
    let dt = (t2 - t1) / ell as f64;
    let mut total = 0.0;
    for k in 0..ell {
        let t_k = t1 + k as f64 * dt;
        total += segment_cost(q, path[k], path[k + 1], t_k, t_k + dt, ell, t1, t2, panels)?;
    }
    Ok(total)
}

/// Endpoints and time window of one Harnack comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarnackQuery {
    pub x: usize,
    pub y: usize,
    pub t1: f64,
    pub t2: f64,
}

impl HarnackQuery {
    fn validate(&self) -> Result<()> {
        if !(self.t1 < self.t2) {
            return Err(Error::BadParameters(format!(
                "need T1 < T2, got {} and {}",
                self.t1, self.t2
            )));
        }
        Ok(())
    }
}

/// Minimum of `F(q)` over the shortest paths encoded by `dag`, by dynamic
/// programming over its layers. Returns the value and one minimizing path.
pub fn min_over_dag(
    dag: &ShortestPathDag,
    q: &Potential,
    t1: f64,
    t2: f64,
    panels: usize,
) -> Result<(f64, Vec<usize>)> {
    let ell = dag.length;
    if ell == 0 {
        return Ok((0.0, vec![dag.source]));
    }
    let dt = (t2 - t1) / ell as f64;
    // best[v] = (cost, predecessor) for v in the current layer
    let mut best: HashMap<usize, (f64, usize)> = HashMap::from([(dag.source, (0.0, usize::MAX))]);
    let mut back: Vec<HashMap<usize, usize>> = Vec::with_capacity(ell);
    for (k, arcs) in dag.arcs.iter().enumerate() {
        let t_k = t1 + k as f64 * dt;
        let mut next: HashMap<usize, (f64, usize)> = HashMap::new();
        for &(u, v) in arcs {
            let Some(&(cu, _)) = best.get(&u) else { continue };
            let c = cu + segment_cost(q, u, v, t_k, t_k + dt, ell, t1, t2, panels)?;
            match next.get(&v) {
                Some(&(cv, pu)) if cv < c || (cv == c && pu <= u) => {}
                _ => {
                    next.insert(v, (c, u));
                }
            }
        }
        back.push(next.iter().map(|(&v, &(_, u))| (v, u)).collect());
        best = next;
    }
    let value = best[&dag.target].0;
    let mut path = vec![dag.target];
    for k in (0..ell).rev() {
        let v = *path.last().unwrap();
        path.push(back[k][&v]);
    }
    path.reverse();
    Ok((value, path))
}

/// `min F(q)` over all shortest `x -> y` paths, with a minimizing path.
pub fn min_path_functional(
    g: &WeightedGraph,
    q: &Potential,
    query: &HarnackQuery,
    panels: usize,
) -> Result<(f64, Vec<usize>)> {
    query.validate()?;
    let dag = g.shortest_path_dag(query.x, query.y)?;
    min_over_dag(&dag, q, query.t1, query.t2, panels)
}

/// Potential term of the Harnack exponent: `min F(q)` when `x != y`, and
/// `∫_{T1}^{T2} q(x, t) dt` when `x == y`, where the path sum is empty but
/// the potential still acts on the vertex over the whole window.
fn potential_exponent(
    dag: &ShortestPathDag,
    q: &Potential,
    t1: f64,
    t2: f64,
    panels: usize,
) -> Result<(f64, Vec<usize>)> {
    if dag.length == 0 {
        let x = dag.source;
        return Ok((segment_cost(q, x, x, t1, t2, 1, t1, t2, panels)?, vec![x]));
    }
    min_over_dag(dag, q, t1, t2, panels)
}

/// Potential terms for many queries on one graph. A static potential makes
/// every segment cost proportional to `T2 - T1`, so one evaluation per
/// vertex pair serves every time window.
struct PotentialCache<'a> {
    g: &'a WeightedGraph,
    q: &'a Potential,
    panels: usize,
    dags: HashMap<(usize, usize), ShortestPathDag>,
    unit: HashMap<(usize, usize), f64>,
}

impl<'a> PotentialCache<'a> {
    fn new(g: &'a WeightedGraph, q: &'a Potential, panels: usize) -> Self {
        Self {
            g,
            q,
            panels,
            dags: HashMap::new(),
            unit: HashMap::new(),
        }
    }

    /// `(dist(x, y), potential term)` for the window `[t1, t2]`.
    fn get(&mut self, x: usize, y: usize, t1: f64, t2: f64) -> Result<(usize, f64)> {
        HarnackQuery { x, y, t1, t2 }.validate()?;
        let dag = match self.dags.entry((x, y)) {
            std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
            std::collections::hash_map::Entry::Vacant(e) => e.insert(self.g.shortest_path_dag(x, y)?),
        };
        if !self.q.is_static() {
            let (v, _) = potential_exponent(dag, self.q, t1, t2, self.panels)?;
            return Ok((dag.length, v));
        }
        let unit = match self.unit.get(&(x, y)) {
            Some(&v) => v,
            None => {
                let (v, _) = potential_exponent(dag, self.q, 0.0, 1.0, self.panels)?;
                self.unit.insert((x, y), v);
                v
            }
        };
        Ok((dag.length, unit * (t2 - t1)))
    }
}

/// Exponent terms of the Harnack factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnackBound {
    /// `(D_μ + sqrt(D_μ/d)) (T2 - T1)`.
    pub drift: f64,
    /// `dist(x,y)² / (T2 - T1) * sqrt(d μ_max / w_min)`.
    pub distance: f64,
    /// `min F(q)` over shortest paths, or `∫ q(x, t) dt` when `x == y`.
    pub potential: f64,
    pub exponent: f64,
    /// `exp(exponent)`; may overflow to infinity.
    pub total_factor: f64,
    pub minimizing_path: Vec<usize>,
}

fn assemble(c: &GraphConstants, dist: usize, query: &HarnackQuery, potential: f64, path: Vec<usize>) -> HarnackBound {
    let span = query.t2 - query.t1;
    let drift = c.drift_rate() * span;
    let distance = if dist == 0 {
        0.0
    } else {
        (dist * dist) as f64 / span * c.distance_coefficient()
    };
    let exponent = drift + distance + potential;
    HarnackBound {
        drift,
        distance,
        potential,
        exponent,
        total_factor: exponent.exp(),
        minimizing_path: path,
    }
}

pub fn harnack_bound(
    g: &WeightedGraph,
    q: &Potential,
    query: &HarnackQuery,
    panels: usize,
) -> Result<HarnackBound> {
    let c = GraphConstants::of(g);
    query.validate()?;
    let dag = g.shortest_path_dag(query.x, query.y)?;
    let (potential, path) = potential_exponent(&dag, q, query.t1, query.t2, panels)?;
    Ok(assemble(&c, path.len() - 1, query, potential, path))
}

/// Exponent of the bounded-potential form, valid whenever `|q| <= c0`:
/// `(D_μ + sqrt(D_μ/d) + 5 c0 / 3)(T2 - T1) + dist² / (T2 - T1) * sqrt(d μ_max / w_min)`.
pub fn bounded_q_exponent(
    g: &WeightedGraph,
    x: usize,
    y: usize,
    t1: f64,
    t2: f64,
    c0: f64,
) -> Result<f64> {
    let query = HarnackQuery { x, y, t1, t2 };
    query.validate()?;
    if !(c0 >= 0.0) {
        return Err(Error::BadParameters(format!("C0 must be >= 0, got {c0}")));
    }
    let dist = g.dist(x, y)?.ok_or(Error::Disconnected(x, y))?;
    let c = GraphConstants::of(g);
    let b = assemble(&c, dist, &query, 5.0 / 3.0 * c0 * (t2 - t1), Vec::new());
    Ok(b.exponent)
}

pub fn bounded_q_bound(g: &WeightedGraph, x: usize, y: usize, t1: f64, t2: f64, c0: f64) -> Result<f64> {
    Ok(bounded_q_exponent(g, x, y, t1, t2, c0)?.exp())
}

/// A space-time comparison between grid points of a solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplePair {
    pub x: usize,
    pub i1: usize,
    pub y: usize,
    pub i2: usize,
}

/// All pairs `((x, t_i), (y, t_j))` with `t_j - t_i >= min_gap`.
pub fn grid_pairs(sol: &HeatSolution, min_gap: f64) -> Vec<SamplePair> {
    let n = sol.graph().n();
    let times = sol.times();
    let mut out = Vec::new();
    for i1 in 0..times.len() {
        for i2 in i1 + 1..times.len() {
            if times[i2] - times[i1] < min_gap - 1e-12 {
                continue;
            }
            for x in 0..n {
                for y in 0..n {
                    out.push(SamplePair { x, i1, y, i2 });
                }
            }
        }
    }
    out
}

/// Absolute tolerance used by [`check_harnack`] in log space.
pub const HARNACK_TOL: f64 = 1e-7;

/// Checks `u(x, T1) <= u(y, T2) * factor` for every sampled pair.
///
/// Compared in log space: `lhs = log u(x,T1) - log u(y,T2)`, `rhs` is the
/// Harnack exponent. The solver residual widens the tolerance by the
/// relative error it can induce in the two values.
pub fn check_harnack(
    sol: &HeatSolution,
    pairs: &[SamplePair],
    max_residual: f64,
    tolerance: f64,
    panels: usize,
) -> Result<CheckReport> {
    let residual = sol.residual()?;
    if residual > max_residual {
        return Err(Error::ResidualTooLarge {
            residual,
            limit: max_residual,
        });
    }
    let g = sol.graph();
    let c = GraphConstants::of(g);
    let times = sol.times();
    let scale = 1.0 + sol.values().iter().map(|v| v.max_abs()).fold(0.0, f64::max);
    let u_min = sol.values().iter().map(|v| v.min()).fold(f64::INFINITY, f64::min);
    if !(u_min > 0.0) {
        return Err(Error::NonpositiveFunction {
            vertex: 0,
            value: u_min,
            floor: 0.0,
        });
    }
    let allowance = 2.0 * residual * scale / u_min;
    let mut cache = PotentialCache::new(g, sol.potential(), panels);
    let mut lhs = Vec::with_capacity(pairs.len());
    let mut rhs = Vec::with_capacity(pairs.len());
    let mut wit = Vec::with_capacity(pairs.len());
    for p in pairs {
        let len = times.len();
        if p.i1 >= len || p.i2 >= len {
            return Err(Error::IndexOutOfRange {
                index: p.i1.max(p.i2),
                len,
            });
        }
        let query = HarnackQuery {
            x: p.x,
            y: p.y,
            t1: times[p.i1],
            t2: times[p.i2],
        };
        let (dist, potential) = cache.get(p.x, p.y, query.t1, query.t2)?;
        let bound = assemble(&c, dist, &query, potential, Vec::new());
        lhs.push(sol.value(p.x, p.i1).ln() - sol.value(p.y, p.i2).ln() - allowance);
        rhs.push(bound.exponent);
        wit.push(Witness::SpaceTime {
            x: p.x,
            t1: query.t1,
            y: p.y,
            t2: query.t2,
        });
    }
    Ok(CheckReport::from_entries_absolute(
        "harnack", lhs, rhs, wit, tolerance,
    ))
}

/// Checks that the potential term of the Harnack exponent is at most
/// `(5/3) sup|q| (T2 - T1)` for every sampled pair.
pub fn check_potential_term(
    sol: &HeatSolution,
    pairs: &[SamplePair],
    panels: usize,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    let g = sol.graph();
    let q = sol.potential();
    let c0 = q.max_abs();
    let times = sol.times();
    let mut cache = PotentialCache::new(g, q, panels);
    let mut lhs = Vec::with_capacity(pairs.len());
    let mut rhs = Vec::with_capacity(pairs.len());
    let mut wit = Vec::with_capacity(pairs.len());
    for p in pairs {
        let (t1, t2) = (times[p.i1], times[p.i2]);
        let (_, value) = cache.get(p.x, p.y, t1, t2)?;
        lhs.push(value);
        rhs.push(5.0 / 3.0 * c0 * (t2 - t1));
        wit.push(Witness::SpaceTime { x: p.x, t1, y: p.y, t2 });
    }
    Ok(CheckReport::from_entries(
        "potential_term",
        lhs,
        rhs,
        wit,
        opts.rel_tol,
    ))
}

/// `sqrt(|u(x,s)/u(y,s) - 1|)` at grid index `i`, a diagnostic only.
pub fn psi(sol: &HeatSolution, x: usize, y: usize, i: usize) -> f64 {
    (sol.value(x, i) / sol.value(y, i) - 1.0).abs().sqrt()
}

/// Checks the integrated comparison
///
/// `Vol(B_x(√t)) P_t(x,y) <= exp{(D_μ + sqrt(D_μ/d)) δ t + sqrt(d μ_max/w_min)/δ}
///                            Σ_{x' ∈ B_x(√t)} μ(x') P_{(1+δ)t}(x', y)`.
pub fn check_kernel_comparison(
    g: &WeightedGraph,
    x: usize,
    y: usize,
    t: f64,
    delta: f64,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    kernel_comparison_entries(g, &[(x, y)], t, delta, opts)
}

/// [`check_kernel_comparison`] for every ordered vertex pair.
pub fn check_kernel_comparison_all(
    g: &WeightedGraph,
    t: f64,
    delta: f64,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    let n = g.n();
    let pairs: Vec<_> = (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).collect();
    kernel_comparison_entries(g, &pairs, t, delta, opts)
}

fn kernel_comparison_entries(
    g: &WeightedGraph,
    pairs: &[(usize, usize)],
    t: f64,
    delta: f64,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    g.require_symmetric()?;
    if !(t > 0.0) || !(delta > 0.0) {
        return Err(Error::BadParameters(format!(
            "need t > 0 and δ > 0, got t = {t}, δ = {delta}"
        )));
    }
    let c = GraphConstants::of(g);
    let now = heat_kernel_positive(g, t)?;
    let later = heat_kernel_positive(g, (1.0 + delta) * t)?;
    let factor = (c.drift_rate() * delta * t + c.distance_coefficient() / delta).exp();
    let mut balls: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut lhs = Vec::new();
    let mut rhs = Vec::new();
    let mut wit = Vec::new();
    for &(x, y) in pairs {
        if y >= g.n() {
            return Err(Error::UnknownVertex(y));
        }
        if let std::collections::hash_map::Entry::Vacant(e) = balls.entry(x) {
            e.insert(g.ball(x, t.sqrt())?);
        }
        let ball = &balls[&x];
        let vol: f64 = ball.iter().map(|&z| g.mu(z)).sum();
        let mass: f64 = ball.iter().map(|&z| g.mu(z) * later.get(z, y)).sum();
        lhs.push(vol * now.get(x, y));
        rhs.push(factor * mass);
        wit.push(Witness::Pair { x, y });
    }
    Ok(CheckReport::from_entries(
        "kernel_comparison",
        lhs,
        rhs,
        wit,
        opts.rel_tol,
    ))
}

/// Parameters of the heat-kernel upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelBoundParams {
    /// Constant of the integrated Gaussian estimate; no closed form is
    /// known, so it is always caller-supplied.
    pub c1: f64,
    pub epsilon: f64,
    pub gamma: f64,
}

impl KernelBoundParams {
    fn validate(&self, t: f64) -> Result<()> {
        if !(t >= 1.0) {
            return Err(Error::BadParameters(format!("need t >= 1, got {t}")));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::BadParameters(format!("need 0 < γ <= 1, got {}", self.gamma)));
        }
        if !(self.epsilon > 0.0) || !(self.c1 > 0.0) {
            return Err(Error::BadParameters("need ε > 0 and C1 > 0".into()));
        }
        Ok(())
    }

    /// `C2 = D_μ ε + sqrt(D_μ/d) ε + (4/ε) sqrt(d μ_max / w_min) + C1/ε`.
    pub fn c2(&self, c: &GraphConstants) -> f64 {
        let e = self.epsilon;
        c.d_mu * e + (c.d_mu / c.d).sqrt() * e + 4.0 / e * c.distance_coefficient() + self.c1 / e
    }
}

/// Right side of the Gaussian-type upper bound
///
/// `exp(-(1-γ) λ* t) / sqrt(Vol(B_x(√t)) Vol(B_y(√t))) * exp{C2 √t - C1 dist² / (4 (1+2ε) t)}`
///
/// with `λ*` the bottom of the spectrum (zero on a finite graph).
pub fn kernel_upper_bound(
    g: &WeightedGraph,
    x: usize,
    y: usize,
    t: f64,
    params: &KernelBoundParams,
) -> Result<f64> {
    params.validate(t)?;
    let lambda_star = eigendecompose(g)?.eigenvalues.first().copied().unwrap_or(0.0).max(0.0);
    kernel_upper_bound_with(g, x, y, t, params, lambda_star)
}

fn kernel_upper_bound_with(
    g: &WeightedGraph,
    x: usize,
    y: usize,
    t: f64,
    params: &KernelBoundParams,
    lambda_star: f64,
) -> Result<f64> {
    let c = GraphConstants::of(g);
    let dist = g.dist(x, y)?.ok_or(Error::Disconnected(x, y))? as f64;
    let r = t.sqrt();
    let vx = g.ball_volume(x, r)?;
    let vy = g.ball_volume(y, r)?;
    let exponent = -(1.0 - params.gamma) * lambda_star * t + params.c2(&c) * r
        - params.c1 * dist * dist / (4.0 * (1.0 + 2.0 * params.epsilon) * t);
    Ok(exponent.exp() / (vx * vy).sqrt())
}

/// Compares the upper bound against the kernel at every connected pair.
/// Exploratory: the bound only holds for `C1` small enough, which the
/// estimate leaves unspecified.
pub fn check_kernel_upper_bound(
    g: &WeightedGraph,
    t: f64,
    params: &KernelBoundParams,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    params.validate(t)?;
    let lambda_star = eigendecompose(g)?.eigenvalues.first().copied().unwrap_or(0.0).max(0.0);
    let k = heat_kernels(g, &[t])?.pop().unwrap();
    let mut lhs = Vec::new();
    let mut rhs = Vec::new();
    let mut wit = Vec::new();
    let comps = g.components();
    for x in 0..g.n() {
        for y in 0..g.n() {
            if comps[x] != comps[y] {
                continue;
            }
            lhs.push(k.get(x, y));
            rhs.push(kernel_upper_bound_with(g, x, y, t, params, lambda_star)?);
            wit.push(Witness::Pair { x, y });
        }
    }
    Ok(CheckReport::from_entries(
        "kernel_upper_bound",
        lhs,
        rhs,
        wit,
        opts.rel_tol,
    ))
}
