//! Solutions of `∂_t u = Δu - q u` and the heat kernel.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::VertexFunction;
use crate::graph::{GraphConstants, WeightedGraph};
use crate::operators::laplacian;
use crate::spectral::{decompose_symmetric, eigendecompose, symmetrized_operator};

/// Potential `q` in `∂_t u = Δu - q u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Potential {
    /// Constant in time.
    Static(VertexFunction),
    /// Samples at increasing times, linearly interpolated in between.
    Sampled {
        times: Vec<f64>,
        values: Vec<VertexFunction>,
    },
}

impl Potential {
    pub fn zero(n: usize) -> Self {
        Potential::Static(VertexFunction::constant(n, 0.0))
    }

    pub fn is_static(&self) -> bool {
        matches!(self, Potential::Static(_))
    }

    fn check(&self, g: &WeightedGraph) -> Result<()> {
        match self {
            Potential::Static(q) => q.check_len(g),
            Potential::Sampled { times, values } => {
                if times.is_empty()
                    || times.len() != values.len()
                    || times.windows(2).any(|w| !(w[0] < w[1]))
                {
                    return Err(Error::BadTimeGrid);
                }
                values.iter().try_for_each(|v| v.check_len(g))
            }
        }
    }

    /// Time span covered by samples; unbounded for a static potential.
    pub fn span(&self) -> (f64, f64) {
        match self {
            Potential::Static(_) => (f64::NEG_INFINITY, f64::INFINITY),
            Potential::Sampled { times, .. } => (times[0], *times.last().unwrap()),
        }
    }

    /// `q(x, t)`. Sampled potentials are held constant outside their span.
    pub fn value(&self, x: usize, t: f64) -> f64 {
        match self {
            Potential::Static(q) => q[x],
            Potential::Sampled { times, values } => {
                let i = times.partition_point(|&s| s <= t);
                if i == 0 {
                    return values[0][x];
                }
                if i == times.len() {
                    return values[i - 1][x];
                }
                let (t0, t1) = (times[i - 1], times[i]);
                let s = (t - t0) / (t1 - t0);
                values[i - 1][x] * (1.0 - s) + values[i][x] * s
            }
        }
    }

    pub fn at(&self, t: f64) -> VertexFunction {
        match self {
            Potential::Static(q) => q.clone(),
            Potential::Sampled { values, .. } => {
                VertexFunction::from_fn(values[0].len(), |x| self.value(x, t))
            }
        }
    }

    /// `sup |q|` over vertices and samples.
    pub fn max_abs(&self) -> f64 {
        match self {
            Potential::Static(q) => q.max_abs(),
            Potential::Sampled { values, .. } => {
                values.iter().map(|v| v.max_abs()).fold(0.0, f64::max)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Spectral propagator of the symmetrized operator; symmetric weights only.
    EigenExact,
    /// Uniformized matrix exponential with scaling and squaring.
    ExpmStep,
    /// Classical Runge-Kutta with a Gershgorin-limited step.
    Rk4,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::EigenExact => "eigen_exact",
            Method::ExpmStep => "expm_step",
            Method::Rk4 => "rk4",
        }
    }

    /// Residual allowed for solutions produced by this method.
    pub fn residual_limit(self) -> f64 {
        match self {
            Method::EigenExact | Method::ExpmStep => 1e-8,
            Method::Rk4 => 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepControl {
    /// Upper bound on `h (2 D_μ + sup|q|)` for RK4 steps.
    pub stability: f64,
    /// How many times a grid interval may be retried with halved steps.
    pub max_halvings: u32,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            stability: 0.1,
            max_halvings: 12,
        }
    }
}

/// A solution sampled on a time grid.
#[derive(Debug, Clone)]
pub struct HeatSolution {
    graph: WeightedGraph,
    times: Vec<f64>,
    values: Vec<VertexFunction>,
    potential: Potential,
    method: Method,
    control: StepControl,
}

impl HeatSolution {
    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// `values()[i]` is `u(·, times()[i])`.
    pub fn values(&self) -> &[VertexFunction] {
        &self.values
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn value(&self, x: usize, i: usize) -> f64 {
        self.values[i][x]
    }

    /// `∂_t u` at grid index `i`, read off the equation as `Δu - q u`.
    pub fn time_derivative(&self, i: usize) -> Result<VertexFunction> {
        let u = self.values.get(i).ok_or(Error::IndexOutOfRange {
            index: i,
            len: self.times.len(),
        })?;
        let q = self.potential.at(self.times[i]);
        let lap = laplacian(&self.graph, u)?;
        Ok(VertexFunction::from_fn(self.graph.n(), |x| {
            lap[x] - q[x] * u[x]
        }))
    }

    /// Largest one-interval defect against an independent reference
    /// propagator, `max_i |u_{i+1} - P(t_{i+1} - t_i) u_i|_∞ / (1 + max|u|)`.
    ///
    /// The reference is the matrix exponential for `eigen_exact`, the
    /// spectral propagator (or a fine RK4 sweep for asymmetric weights) for
    /// `expm_step`, and RK4 at a quarter of the step for `rk4`.
    pub fn residual(&self) -> Result<f64> {
        let scale = 1.0 + self.values.iter().map(|v| v.max_abs()).fold(0.0, f64::max);
        let g = &self.graph;
        let mut worst: f64 = 0.0;
        let reference: Box<dyn Fn(usize, &VertexFunction) -> Result<VertexFunction>> =
            match (self.method, &self.potential) {
                (Method::EigenExact, Potential::Static(q)) => {
                    let gen = generator(g, q);
                    Box::new(move |i, u| {
                        let h = self.times[i + 1] - self.times[i];
                        Ok(apply(&uniformized_exp(&gen, h), u))
                    })
                }
                (Method::ExpmStep, Potential::Static(q)) if g.is_symmetric() => {
                    let prop = SpectralPropagator::new(g, q)?;
                    Box::new(move |i, u| Ok(prop.propagate(u, self.times[i + 1] - self.times[i])))
                }
                (method, _) => {
                    let fine = StepControl {
                        stability: self.control.stability
                            / if method == Method::Rk4 { 4.0 } else { 10.0 },
                        ..self.control
                    };
                    Box::new(move |i, u| {
                        rk4_interval(g, &self.potential, u, self.times[i], self.times[i + 1], &fine)
                    })
                }
            };
        for i in 0..self.times.len().saturating_sub(1) {
            let expected = reference(i, &self.values[i])?;
            for x in 0..g.n() {
                worst = worst.max((self.values[i + 1][x] - expected[x]).abs() / scale);
            }
        }
        Ok(worst)
    }

    /// CSV with header `t,vertex,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,vertex,value\n");
        for (t, u) in self.times.iter().zip(&self.values) {
            for (x, v) in u.iter().enumerate() {
                out.push_str(&format!("{t},{x},{v}\n"));
            }
        }
        out
    }
}

/// `Δ - diag(q)` as a dense matrix acting on column vectors.
fn generator(g: &WeightedGraph, q: &VertexFunction) -> DMatrix<f64> {
    let n = g.n();
    let mut a = DMatrix::zeros(n, n);
    for x in 0..n {
        let mx = g.mu(x);
        a[(x, x)] = -g.degree(x) / mx - q[x];
        for &(y, w) in g.neighbors(x) {
            a[(x, y)] += w / mx;
        }
    }
    a
}

fn apply(m: &DMatrix<f64>, u: &VertexFunction) -> VertexFunction {
    let v = m * DVector::from_column_slice(u.values());
    VertexFunction::new(v.iter().copied().collect())
}

/// `exp(h A)` for a matrix with nonnegative off-diagonal entries.
///
/// Writes `A = B - c I` with `B >= 0` entrywise, so every Taylor term and
/// every squaring works on nonnegative matrices and entries keep full
/// relative accuracy.
pub(crate) fn uniformized_exp(a: &DMatrix<f64>, h: f64) -> DMatrix<f64> {
    let n = a.nrows();
    let c = (0..n).map(|i| -a[(i, i)]).fold(0.0, f64::max);
    let mut b = a.clone();
    for i in 0..n {
        b[(i, i)] += c;
    }
    let norm = b.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max) * h;
    let mut squarings = 0u32;
    let mut scaled = norm;
    while scaled > 0.5 {
        scaled /= 2.0;
        squarings += 1;
    }
    let tau = h / 2f64.powi(squarings as i32);
    let bt = &b * tau;
    let mut term = DMatrix::<f64>::identity(n, n);
    let mut sum = term.clone();
    // Stop only once every entry has converged relative to itself, so tiny
    // entries between distant vertices keep their leading digits.
    for k in 1..200 {
        term = &term * &bt / k as f64;
        sum += &term;
        if term.iter().zip(sum.iter()).all(|(t, s)| *t <= 1e-17 * s) {
            break;
        }
    }
    sum *= (-c * tau).exp();
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// `u ↦ M^{-1/2} V exp(-t Λ) V^T M^{1/2} u` for the symmetrized operator.
struct SpectralPropagator {
    values: Vec<f64>,
    basis: DMatrix<f64>,
    sqrt_mu: Vec<f64>,
}

impl SpectralPropagator {
    fn new(g: &WeightedGraph, q: &VertexFunction) -> Result<Self> {
        let s = symmetrized_operator(g, Some(q.values()))?;
        let (values, basis) = decompose_symmetric(s);
        Ok(Self {
            values,
            basis,
            sqrt_mu: g.measure().iter().map(|m| m.sqrt()).collect(),
        })
    }

    fn propagate(&self, u: &VertexFunction, t: f64) -> VertexFunction {
        let n = self.sqrt_mu.len();
        let weighted = DVector::from_fn(n, |x, _| u[x] * self.sqrt_mu[x]);
        let mut coeff = self.basis.tr_mul(&weighted);
        for (k, c) in coeff.iter_mut().enumerate() {
            *c *= (-self.values[k] * t).exp();
        }
        let back = &self.basis * coeff;
        VertexFunction::from_fn(n, |x| back[x] / self.sqrt_mu[x])
    }
}

fn rk4_step(g: &WeightedGraph, q: &Potential, u: &[f64], t: f64, h: f64) -> Vec<f64> {
    let n = u.len();
    let rhs = |t: f64, v: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|x| {
                let s: f64 = g
                    .neighbors(x)
                    .iter()
                    .map(|&(y, w)| w * (v[y] - v[x]))
                    .sum();
                s / g.mu(x) - q.value(x, t) * v[x]
            })
            .collect()
    };
    let axpy = |a: &[f64], s: f64, b: &[f64]| -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x + s * y).collect()
    };
    let k1 = rhs(t, u);
    let k2 = rhs(t + h / 2.0, &axpy(u, h / 2.0, &k1));
    let k3 = rhs(t + h / 2.0, &axpy(u, h / 2.0, &k2));
    let k4 = rhs(t + h, &axpy(u, h, &k3));
    (0..n)
        .map(|x| u[x] + h / 6.0 * (k1[x] + 2.0 * k2[x] + 2.0 * k3[x] + k4[x]))
        .collect()
}

/// Integrates one grid interval with RK4. The step starts at the stability
/// limit and is halved whenever a nonnegative state turns negative.
fn rk4_interval(
    g: &WeightedGraph,
    q: &Potential,
    u: &VertexFunction,
    t0: f64,
    t1: f64,
    control: &StepControl,
) -> Result<VertexFunction> {
    let c = GraphConstants::of(g);
    let rate = 2.0 * c.d_mu + q.max_abs();
    let span = t1 - t0;
    let mut steps = if rate > 0.0 {
        ((span * rate / control.stability).ceil() as usize).max(1)
    } else {
        1
    };
    let nonneg = u.iter().all(|&v| v >= 0.0);
    for _ in 0..=control.max_halvings {
        let h = span / steps as f64;
        let mut v = u.values().to_vec();
        let mut ok = true;
        for k in 0..steps {
            v = rk4_step(g, q, &v, t0 + k as f64 * h, h);
            if nonneg && v.iter().any(|&x| x < 0.0) {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(VertexFunction::new(v));
        }
        steps *= 2;
    }
    Err(Error::StepRejected(t0))
}

/// Solves `∂_t u = Δu - q u` on the grid `times`, with `u(times[0]) = u0`.
///
/// `u0` must be nonnegative and not identically zero; kernel columns
/// `δ_y / μ(y)` are admissible initial data.
pub fn solve_heat(
    g: &WeightedGraph,
    u0: &VertexFunction,
    potential: Potential,
    times: &[f64],
    method: Method,
    control: StepControl,
) -> Result<HeatSolution> {
    u0.check_len(g)?;
    potential.check(g)?;
    if times.is_empty() || times.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::BadTimeGrid);
    }
    if let Some(x) = u0.iter().position(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::NonpositiveInitialData(x));
    }
    if u0.iter().all(|&v| v == 0.0) && g.n() > 0 {
        return Err(Error::NonpositiveInitialData(0));
    }
    let mut values = Vec::with_capacity(times.len());
    values.push(u0.clone());
    match (method, &potential) {
        (Method::EigenExact, Potential::Static(q)) => {
            let prop = SpectralPropagator::new(g, q)?;
            for &t in &times[1..] {
                values.push(prop.propagate(u0, t - times[0]));
            }
        }
        (Method::ExpmStep, Potential::Static(q)) => {
            let gen = generator(g, q);
            let mut u = u0.clone();
            let mut cached: Option<(f64, DMatrix<f64>)> = None;
            for w in times.windows(2) {
                let h = w[1] - w[0];
                let reuse = matches!(&cached, Some((hc, _)) if (hc - h).abs() <= 1e-14 * h);
                if !reuse {
                    cached = Some((h, uniformized_exp(&gen, h)));
                }
                u = apply(&cached.as_ref().unwrap().1, &u);
                values.push(u.clone());
            }
        }
        (Method::Rk4, _) => {
            let mut u = u0.clone();
            for w in times.windows(2) {
                u = rk4_interval(g, &potential, &u, w[0], w[1], &control)?;
                values.push(u.clone());
            }
        }
        (m, Potential::Sampled { .. }) => return Err(Error::TimeDependentPotential(m.name())),
    }
    Ok(HeatSolution {
        graph: g.clone(),
        times: times.to_vec(),
        values,
        potential,
        method,
        control,
    })
}

/// `P_t(x, y)` for every ordered vertex pair.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatKernel {
    pub t: f64,
    n: usize,
    entries: Vec<f64>,
}

impl HeatKernel {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.entries[x * self.n + y]
    }

    /// CSV with header `t,x,y,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x,y,value\n");
        for x in 0..self.n {
            for y in 0..self.n {
                out.push_str(&format!("{},{x},{y},{}\n", self.t, self.get(x, y)));
            }
        }
        out
    }
}

/// Heat kernel `P_t(x,y) = Σ_k e^{-λ_k t} φ_k(x) φ_k(y)` with
/// `μ`-orthonormal eigenfunctions. On a finite graph this is the unique,
/// hence minimal, heat kernel.
pub fn heat_kernel(g: &WeightedGraph, t: f64) -> Result<HeatKernel> {
    if !(t >= 0.0) {
        return Err(Error::BadParameters(format!("negative time {t}")));
    }
    Ok(heat_kernels(g, &[t])?.pop().unwrap())
}

/// Kernels at several times from one eigendecomposition.
pub fn heat_kernels(g: &WeightedGraph, ts: &[f64]) -> Result<Vec<HeatKernel>> {
    let dec = eigendecompose(g)?;
    let n = g.n();
    let phi = DMatrix::from_fn(n, n, |x, k| dec.eigenfunctions[k][x]);
    ts.iter()
        .map(|&t| {
            let mut scaled = phi.clone();
            for k in 0..n {
                let f = (-dec.eigenvalues[k] * t).exp();
                scaled.column_mut(k).scale_mut(f);
            }
            let p = scaled * phi.transpose();
            let mut entries = Vec::with_capacity(n * n);
            for x in 0..n {
                for y in 0..n {
                    entries.push(p[(x, y)]);
                }
            }
            Ok(HeatKernel { t, n, entries })
        })
        .collect()
}

/// Kernel from the uniformized matrix exponential. Every entry is a sum of
/// nonnegative terms, so small values keep their relative accuracy, which
/// the eigenfunction expansion cannot offer.
pub fn heat_kernel_positive(g: &WeightedGraph, t: f64) -> Result<HeatKernel> {
    if !(t >= 0.0) {
        return Err(Error::BadParameters(format!("need t >= 0, got {t}")));
    }
    let n = g.n();
    let e = uniformized_exp(&generator(g, &VertexFunction::constant(n, 0.0)), t);
    let mut entries = Vec::with_capacity(n * n);
    for x in 0..n {
        for y in 0..n {
            entries.push(e[(x, y)] / g.mu(y));
        }
    }
    Ok(HeatKernel { t, n, entries })
}

/// Worst deviations from the defining properties of the heat kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelDefects {
    /// `max(0, -min P_t(x,y))`.
    pub negativity: f64,
    /// `max |P_t(x,y) - P_t(y,x)|`.
    pub symmetry: f64,
    /// `max_x |Σ_y P_t(x,y) μ(y) - 1|`.
    pub mass: f64,
    /// `max |Σ_z P_s(x,z) P_t(z,y) μ(z) - P_{s+t}(x,y)|`, with `P_{s+t}`
    /// taken from the matrix exponential rather than the spectrum.
    pub semigroup: f64,
}

pub fn kernel_defects(g: &WeightedGraph, s: f64, t: f64) -> Result<KernelDefects> {
    let ks = heat_kernels(g, &[s, t])?;
    let (ps, pt) = (&ks[0], &ks[1]);
    let n = g.n();
    let combined = uniformized_exp(&generator(g, &VertexFunction::constant(n, 0.0)), s + t);
    let mut d = KernelDefects {
        negativity: 0.0,
        symmetry: 0.0,
        mass: 0.0,
        semigroup: 0.0,
    };
    for x in 0..n {
        let mut mass = 0.0;
        for y in 0..n {
            let v = pt.get(x, y);
            d.negativity = d.negativity.max(-v);
            d.symmetry = d.symmetry.max((v - pt.get(y, x)).abs());
            mass += v * g.mu(y);
            let conv: f64 = (0..n).map(|z| ps.get(x, z) * pt.get(z, y) * g.mu(z)).sum();
            d.semigroup = d.semigroup.max((conv - combined[(x, y)] / g.mu(y)).abs());
        }
        d.mass = d.mass.max((mass - 1.0).abs());
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn p2() -> WeightedGraph {
        WeightedGraph::undirected(vec![1.0, 1.0], &[(0, 1, 1.0)]).unwrap()
    }

    fn grid(t1: f64, steps: usize) -> Vec<f64> {
        (0..=steps).map(|i| t1 * i as f64 / steps as f64).collect()
    }

    #[test]
    fn p2_closed_form_all_methods() {
        let u0 = VertexFunction::new(vec![1.0, 2.0]);
        for method in [Method::EigenExact, Method::ExpmStep, Method::Rk4] {
            let sol = solve_heat(
                &p2(),
                &u0,
                Potential::zero(2),
                &grid(1.0, 10),
                method,
                StepControl::default(),
            )
            .unwrap();
            let tol = if method == Method::Rk4 { method.residual_limit() } else { 1e-13 };
            for (i, &t) in sol.times().iter().enumerate() {
                let e = 0.5 * (-2.0 * t).exp();
                assert_abs_diff_eq!(sol.value(0, i), 1.5 - e, epsilon = tol);
                assert_abs_diff_eq!(sol.value(1, i), 1.5 + e, epsilon = tol);
            }
            assert!(sol.residual().unwrap() <= method.residual_limit(), "{method:?}");
        }
    }

    #[test]
    fn constants_are_stationary() {
        let g = WeightedGraph::undirected(vec![0.5, 2.0, 1.0], &[(0, 1, 3.0), (1, 2, 0.2)]).unwrap();
        let u0 = VertexFunction::constant(3, 4.0);
        let sol = solve_heat(&g, &u0, Potential::zero(3), &grid(2.0, 4), Method::EigenExact, StepControl::default()).unwrap();
        for u in sol.values() {
            for &v in u.iter() {
                assert_abs_diff_eq!(v, 4.0, epsilon = 1e-12);
            }
        }
        let dt = sol.time_derivative(2).unwrap();
        assert!(dt.iter().all(|v| v.abs() < 1e-12));
        assert!(matches!(
            sol.time_derivative(5),
            Err(Error::IndexOutOfRange { index: 5, len: 5 })
        ));
    }

    #[test]
    fn time_derivative_at_start() {
        let sol = solve_heat(
            &p2(),
            &VertexFunction::new(vec![1.0, 2.0]),
            Potential::zero(2),
            &[0.0, 1.0],
            Method::EigenExact,
            StepControl::default(),
        )
        .unwrap();
        assert_eq!(sol.time_derivative(0).unwrap().values(), &[1.0, -1.0]);
    }

    #[test]
    fn constant_potential_gauge() {
        let g = WeightedGraph::undirected(vec![1.0, 2.0, 0.5], &[(0, 1, 1.0), (1, 2, 2.0), (0, 2, 0.3)]).unwrap();
        let u0 = VertexFunction::new(vec![1.0, 3.0, 0.2]);
        let times = grid(1.5, 6);
        let c = 0.7;
        for method in [Method::EigenExact, Method::ExpmStep, Method::Rk4] {
            let free = solve_heat(&g, &u0, Potential::zero(3), &times, method, StepControl::default()).unwrap();
            let damped = solve_heat(
                &g,
                &u0,
                Potential::Static(VertexFunction::constant(3, c)),
                &times,
                method,
                StepControl::default(),
            )
            .unwrap();
            let tol = if method == Method::Rk4 { 1e-6 } else { 1e-12 };
            for (i, &t) in times.iter().enumerate() {
                for x in 0..3 {
                    assert_abs_diff_eq!(damped.value(x, i), (-c * t).exp() * free.value(x, i), epsilon = tol);
                }
            }
        }
    }

    #[test]
    fn sampled_potential_requires_rk4() {
        let q = Potential::Sampled {
            times: vec![0.0, 1.0],
            values: vec![VertexFunction::constant(2, 0.0), VertexFunction::constant(2, 1.0)],
        };
        let u0 = VertexFunction::new(vec![1.0, 2.0]);
        assert!(matches!(
            solve_heat(&p2(), &u0, q.clone(), &[0.0, 1.0], Method::EigenExact, StepControl::default()),
            Err(Error::TimeDependentPotential("eigen_exact"))
        ));
        // q = t in space: u(t) = exp(-t^2/2) v(t) with v the free flow.
        let sol = solve_heat(&p2(), &u0, q, &grid(1.0, 4), Method::Rk4, StepControl::default()).unwrap();
        for (i, &t) in sol.times().iter().enumerate() {
            let e = 0.5 * (-2.0 * t).exp();
            let damp = (-t * t / 2.0).exp();
            assert_abs_diff_eq!(sol.value(0, i), damp * (1.5 - e), epsilon = 1e-7);
        }
        assert!(sol.residual().unwrap() <= Method::Rk4.residual_limit());
    }

    #[test]
    fn initial_data_validation() {
        let r = solve_heat(&p2(), &VertexFunction::new(vec![1.0, -1.0]), Potential::zero(2), &[0.0, 1.0], Method::Rk4, StepControl::default());
        assert!(matches!(r, Err(Error::NonpositiveInitialData(1))));
        let r = solve_heat(&p2(), &VertexFunction::new(vec![1.0, 1.0]), Potential::zero(2), &[0.0, 0.0], Method::Rk4, StepControl::default());
        assert!(matches!(r, Err(Error::BadTimeGrid)));
        let asym = WeightedGraph::directed(vec![1.0, 1.0], &[(0, 1, 1.0), (1, 0, 2.0)]).unwrap();
        let r = solve_heat(&asym, &VertexFunction::new(vec![1.0, 1.0]), Potential::zero(2), &[0.0, 1.0], Method::EigenExact, StepControl::default());
        assert!(matches!(r, Err(Error::AsymmetricWeights)));
        let sol = solve_heat(&asym, &VertexFunction::new(vec![1.0, 2.0]), Potential::zero(2), &grid(1.0, 5), Method::ExpmStep, StepControl::default()).unwrap();
        assert!(sol.residual().unwrap() < 1e-8);
    }

    #[test]
    fn p2_kernel_closed_form() {
        for t in [0.0, 0.5, 1.0, 5.0] {
            let k = heat_kernel(&p2(), t).unwrap();
            let e = (-2.0 * t).exp();
            assert_abs_diff_eq!(k.get(0, 0), (1.0 + e) / 2.0, epsilon = 1e-12);
            assert_abs_diff_eq!(k.get(0, 1), (1.0 - e) / 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn kernel_at_zero_is_identity_over_mu() {
        let g = WeightedGraph::undirected(vec![0.5, 2.0, 4.0], &[(0, 1, 1.0), (1, 2, 3.0)]).unwrap();
        let k = heat_kernel(&g, 0.0).unwrap();
        for x in 0..3 {
            for y in 0..3 {
                let expected = if x == y { 1.0 / g.mu(x) } else { 0.0 };
                assert_abs_diff_eq!(k.get(x, y), expected, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn uniformized_exp_matches_kernel() {
        let g = WeightedGraph::undirected(vec![0.5, 2.0, 4.0, 1.0], &[(0, 1, 1.0), (1, 2, 3.0), (2, 3, 0.1)]).unwrap();
        let t = 0.8;
        let gen = generator(&g, &VertexFunction::constant(4, 0.0));
        let e = uniformized_exp(&gen, t);
        let k = heat_kernel(&g, t).unwrap();
        // (e^{tΔ} δ_y/μ(y))(x) = P_t(x, y)
        for x in 0..4 {
            for y in 0..4 {
                assert_abs_diff_eq!(e[(x, y)] / g.mu(y), k.get(x, y), epsilon = 1e-12);
                assert!(e[(x, y)] > 0.0);
            }
        }
    }

    #[test]
    fn kernel_defects_small() {
        let g = WeightedGraph::undirected(vec![0.5, 2.0, 4.0, 1.0], &[(0, 1, 1.0), (1, 2, 3.0), (2, 3, 0.1), (0, 3, 7.0)]).unwrap();
        let d = kernel_defects(&g, 0.3, 0.7).unwrap();
        assert!(d.negativity <= 1e-12);
        assert!(d.symmetry <= 1e-12);
        assert!(d.mass <= 1e-12);
        assert!(d.semigroup <= 1e-12);
    }

    #[test]
    fn csv_layout() {
        let sol = solve_heat(&p2(), &VertexFunction::new(vec![1.0, 2.0]), Potential::zero(2), &[0.0, 0.5], Method::EigenExact, StepControl::default()).unwrap();
        let csv = sol.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "t,vertex,value");
        assert_eq!(lines[1], "0,0,1");
        assert_eq!(lines.len(), 5);
        let k = heat_kernel(&p2(), 1.0).unwrap().to_csv();
        assert!(k.starts_with("t,x,y,value\n1,0,0,"));
    }
}
