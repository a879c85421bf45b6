//! The mu-Laplacian, the gradient form, and the pointwise gradient
//! estimates for positive functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::VertexFunction;
use crate::graph::{GraphConstants, WeightedGraph};
use crate::heat::HeatSolution;
use crate::report::{CheckOptions, CheckReport, Witness};

/// `(Δf)(x) = (1/μ(x)) Σ_{y~x} w_xy (f(y) - f(x))`.
pub fn laplacian(g: &WeightedGraph, f: &VertexFunction) -> Result<VertexFunction> {
    f.check_len(g)?;
    Ok(VertexFunction::from_fn(g.n(), |x| {
        let fx = f[x];
        g.neighbors(x)
            .iter()
            .map(|&(y, w)| w * (f[y] - fx))
            .sum::<f64>()
            / g.mu(x)
    }))
}

/// Gradient form `Γ(f, h)(x) = (1/(2μ(x))) Σ_{y~x} w_xy (f(y)-f(x)) (h(y)-h(x))`.
pub fn gamma(g: &WeightedGraph, f: &VertexFunction, h: &VertexFunction) -> Result<VertexFunction> {
    f.check_len(g)?;
    h.check_len(g)?;
    Ok(VertexFunction::from_fn(g.n(), |x| {
        g.neighbors(x)
            .iter()
            .map(|&(y, w)| w * (f[y] - f[x]) * (h[y] - h[x]))
            .sum::<f64>()
            / (2.0 * g.mu(x))
    }))
}

/// `Γ(f) = Γ(f, f)`.
pub fn gamma_sq(g: &WeightedGraph, f: &VertexFunction) -> Result<VertexFunction> {
    gamma(g, f, f)
}

/// `Σ_x Δf(x) μ(x)`, which vanishes for symmetric weights.
pub fn integral_of_laplacian(g: &WeightedGraph, f: &VertexFunction) -> Result<f64> {
    g.require_symmetric()?;
    let lap = laplacian(g, f)?;
    Ok(lap.iter().zip(g.measure()).map(|(l, m)| l * m).sum())
}

/// `Σ_x Σ_{y~x} w_xy |f(y) - f(x)|`, the size of the terms that cancel in
/// [`integral_of_laplacian`].
pub fn laplacian_integral_scale(g: &WeightedGraph, f: &VertexFunction) -> Result<f64> {
    f.check_len(g)?;
    Ok((0..g.n())
        .flat_map(|x| g.neighbors(x).iter().map(move |&(y, w)| w * (f[y] - f[x]).abs()))
        .sum())
}

/// Checks `|Σ_x Δf(x) μ(x)| <= tolerance * scale` with the scale from
/// [`laplacian_integral_scale`]. The report holds the ratio against zero.
pub fn check_laplacian_integral(
    g: &WeightedGraph,
    f: &VertexFunction,
    tolerance: f64,
) -> Result<CheckReport> {
    let integral = integral_of_laplacian(g, f)?;
    let scale = laplacian_integral_scale(g, f)?;
    let ratio = if scale > 0.0 { integral.abs() / scale } else { integral.abs() };
    Ok(CheckReport::from_entries_absolute(
        "laplacian_integral",
        vec![ratio],
        vec![0.0],
        vec![Witness::Named {
            label: "integral".into(),
        }],
        tolerance,
    ))
}

/// `sqrt(2Γ(u)) / u` per vertex.
fn normalized_gradient(g: &WeightedGraph, u: &VertexFunction) -> Result<Vec<f64>> {
    let gam = gamma_sq(g, u)?;
    Ok(gam
        .iter()
        .zip(u.iter())
        .map(|(&gm, &ux)| (2.0 * gm).max(0.0).sqrt() / ux)
        .collect())
}

fn prepare_positive(g: &WeightedGraph, u: &VertexFunction, opts: &CheckOptions) -> Result<()> {
    u.check_len(g)?;
    u.check_positive(opts.pos_floor)
}

/// Verifies `sqrt(2Γ(u))/u <= sqrt(d) Δu/u + sqrt(d) D_μ + sqrt(D_μ)` at every vertex.
pub fn check_gradient_estimate(
    g: &WeightedGraph,
    u: &VertexFunction,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    prepare_positive(g, u, opts)?;
    let c = GraphConstants::of(g);
    let lhs = normalized_gradient(g, u)?;
    let lap = laplacian(g, u)?;
    let sd = c.d.sqrt();
    let rhs = (0..g.n())
        .map(|x| sd * lap[x] / u[x] + c.gradient_constant())
        .collect();
    Ok(CheckReport::per_vertex(
        "gradient_estimate",
        lhs,
        rhs,
        opts.rel_tol,
    ))
}

/// Same estimate expressed through the neighbor count `N` and the extreme
/// ratios `a = inf μ(x)/w_xy`, `b = sup μ(x)/w_xy`:
/// `sqrt(2Γ(u))/u <= sqrt(b) Δu/u + sqrt(b) (N/a + sqrt(N/(a b)))`.
pub fn check_alt_estimate(
    g: &WeightedGraph,
    u: &VertexFunction,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    prepare_positive(g, u, opts)?;
    let c = GraphConstants::of(g);
    let lhs = normalized_gradient(g, u)?;
    let lap = laplacian(g, u)?;
    let n = c.max_neighbors as f64;
    let sb = c.b.sqrt();
    let constant = if c.max_neighbors == 0 {
        0.0
    } else {
        sb * (n / c.a + (n / (c.a * c.b)).sqrt())
    };
    let rhs = (0..g.n())
        .map(|x| sb * lap[x] / u[x] + constant)
        .collect();
    Ok(CheckReport::per_vertex("alt_estimate", lhs, rhs, opts.rel_tol))
}

/// Verifies `2Γ(sqrt u) <= sqrt(D_μ) sqrt(2Γ(u))` at every vertex.
pub fn check_sqrt_comparison(
    g: &WeightedGraph,
    u: &VertexFunction,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    prepare_positive(g, u, opts)?;
    let c = GraphConstants::of(g);
    let root = u.map(f64::sqrt);
    let lhs = gamma_sq(g, &root)?.map(|v| 2.0 * v).into_vec();
    let rhs = gamma_sq(g, u)?
        .map(|v| c.d_mu.sqrt() * (2.0 * v).max(0.0).sqrt())
        .into_vec();
    Ok(CheckReport::per_vertex(
        "sqrt_comparison",
        lhs,
        rhs,
        opts.rel_tol,
    ))
}

/// Hypotheses under which the gradient estimate specializes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum CaseSpec {
    /// `Δu - q u <= 0`.
    Potential { q: VertexFunction },
    /// `Δu - h u^α <= 0`.
    PowerSource { h: VertexFunction, alpha: f64 },
    /// `Δu - ∂_t u <= q u`, with `∂_t u` supplied.
    Parabolic {
        q: VertexFunction,
        dt_u: VertexFunction,
    },
    /// `Δu - ∂_t u + a u log u <= 0`, with `∂_t u` supplied.
    LogSource { a: f64, dt_u: VertexFunction },
}

impl CaseSpec {
    pub fn name(&self) -> &'static str {
        match self {
            CaseSpec::Potential { .. } => "case_potential",
            CaseSpec::PowerSource { .. } => "case_power_source",
            CaseSpec::Parabolic { .. } => "case_parabolic",
            CaseSpec::LogSource { .. } => "case_log_source",
        }
    }

    /// `s(x)` such that the hypothesis reads `Δu(x)/u(x) <= s(x)` and the
    /// conclusion reads `sqrt(2Γ(u))/u - sqrt(d) s <= sqrt(d) D_μ + sqrt(D_μ)`.
    fn bound_term(&self, u: &VertexFunction) -> Result<Vec<f64>> {
        let n = u.len();
        let out: Vec<f64> = match self {
            CaseSpec::Potential { q } => {
                check_same(n, q)?;
                q.to_vec()
            }
            CaseSpec::PowerSource { h, alpha } => {
                check_same(n, h)?;
                (0..n).map(|x| h[x] * u[x].powf(alpha - 1.0)).collect()
            }
            CaseSpec::Parabolic { q, dt_u } => {
                check_same(n, q)?;
                check_same(n, dt_u)?;
                (0..n).map(|x| dt_u[x] / u[x] + q[x]).collect()
            }
            CaseSpec::LogSource { a, dt_u } => {
                check_same(n, dt_u)?;
                (0..n).map(|x| dt_u[x] / u[x] - a * u[x].ln()).collect()
            }
        };
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Overflow(self.name()));
        }
        Ok(out)
    }
}

fn check_same(n: usize, f: &VertexFunction) -> Result<()> {
    if f.len() == n {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            expected: n,
            got: f.len(),
        })
    }
}

/// Verifies the specialized estimate for a function satisfying one of the
/// differential inequalities in [`CaseSpec`]. The hypothesis is checked
/// first, with the same tolerance rule as the conclusion.
pub fn check_case(
    g: &WeightedGraph,
    u: &VertexFunction,
    case: &CaseSpec,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    prepare_positive(g, u, opts)?;
    let c = GraphConstants::of(g);
    let s = case.bound_term(u)?;
    let lap = laplacian(g, u)?;
    for x in 0..g.n() {
        let ratio = lap[x] / u[x];
        let excess = (ratio - s[x]) / (1.0 + s[x].abs());
        if excess > opts.rel_tol {
            return Err(Error::HypothesisViolated { vertex: x, excess });
        }
    }
    let grad = normalized_gradient(g, u)?;
    let sd = c.d.sqrt();
    let lhs = (0..g.n()).map(|x| grad[x] - sd * s[x]).collect();
    let rhs = vec![c.gradient_constant(); g.n()];
    Ok(CheckReport::per_vertex(case.name(), lhs, rhs, opts.rel_tol))
}

/// Parabolic estimate for `sqrt(u)` along a solution of `∂_t u = Δu - q u`:
///
/// `Γ(√u)/u - sqrt(D_μ d) ∂_t√u/√u - sqrt(D_μ d) q/2 <= D_μ (sqrt(D_μ d) + 1) / 2`
///
/// evaluated at every grid time with `∂_t√u = ∂_t u / (2√u)`.
pub fn check_sqrt_heat_estimate(
    sol: &HeatSolution,
    max_residual: f64,
    opts: &CheckOptions,
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
    let k = (c.d_mu * c.d).sqrt();
    let constant = c.d_mu * (k + 1.0) / 2.0;
    let mut lhs = Vec::new();
    let mut rhs = Vec::new();
    let mut wit = Vec::new();
    for (i, &t) in sol.times().iter().enumerate() {
        let u = &sol.values()[i];
        u.check_positive(opts.pos_floor)?;
        let dt_u = sol.time_derivative(i)?;
        let q = sol.potential().at(t);
        let gam = gamma_sq(g, &u.map(f64::sqrt))?;
        for x in 0..g.n() {
            // ∂_t√u / √u = ∂_t u / (2u)
            let dt_root_ratio = dt_u[x] / (2.0 * u[x]);
            lhs.push(gam[x] / u[x] - k * dt_root_ratio - k * q[x] / 2.0);
            rhs.push(constant);
            wit.push(Witness::Time { x, t });
        }
    }
    Ok(CheckReport::from_entries(
        "sqrt_heat_estimate",
        lhs,
        rhs,
        wit,
        opts.rel_tol,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn p2() -> WeightedGraph {
        WeightedGraph::undirected(vec![1.0, 1.0], &[(0, 1, 1.0)]).unwrap()
    }

    fn k3(mu: f64) -> WeightedGraph {
        WeightedGraph::undirected(vec![mu; 3], &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap()
    }

    fn vf(v: &[f64]) -> VertexFunction {
        VertexFunction::new(v.to_vec())
    }

    #[test]
    fn laplacian_fixtures() {
        let lap = laplacian(&p2(), &vf(&[0.0, 1.0])).unwrap();
        assert_eq!(lap.values(), &[1.0, -1.0]);
        let lap = laplacian(&k3(2.0), &vf(&[0.0, 1.0, 2.0])).unwrap();
        assert_abs_diff_eq!(lap[0], 1.5, epsilon = 1e-15);
        let lap = laplacian(&k3(2.0), &VertexFunction::constant(3, 7.0)).unwrap();
        assert!(lap.iter().all(|&v| v == 0.0));
        assert!(matches!(
            laplacian(&p2(), &vf(&[1.0])),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn gamma_fixtures() {
        let gm = gamma_sq(&p2(), &vf(&[0.0, 1.0])).unwrap();
        assert_eq!(gm.values(), &[0.5, 0.5]);
        let gm = gamma_sq(&k3(2.0), &vf(&[0.0, 1.0, 2.0])).unwrap();
        assert_abs_diff_eq!(gm[0], 1.25, epsilon = 1e-15);
        let gm = gamma(&p2(), &VertexFunction::constant(2, 3.0), &vf(&[5.0, -1.0])).unwrap();
        assert!(gm.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gradient_estimate_fixtures() {
        let opts = CheckOptions::default();
        let r = check_gradient_estimate(&p2(), &VertexFunction::constant(2, 3.0), &opts).unwrap();
        assert!(r.passed);
        assert_eq!(r.lhs_values, vec![0.0, 0.0]);
        assert_eq!(r.rhs_values, vec![2.0, 2.0]);

        let r = check_gradient_estimate(&p2(), &vf(&[1.0, 2.0]), &opts).unwrap();
        assert!(r.passed);
        assert_abs_diff_eq!(r.lhs_values[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.rhs_values[0], 3.0, epsilon = 1e-15);

        assert!(matches!(
            check_gradient_estimate(&p2(), &vf(&[1.0, 0.0]), &opts),
            Err(Error::NonpositiveFunction { vertex: 1, .. })
        ));
    }

    #[test]
    fn alt_estimate_p2_constant() {
        let opts = CheckOptions::default();
        let r = check_alt_estimate(&p2(), &VertexFunction::constant(2, 1.0), &opts).unwrap();
        assert!(r.passed);
        assert_eq!(r.rhs_values, vec![2.0, 2.0]);
    }

    #[test]
    fn sqrt_comparison_p2() {
        let opts = CheckOptions::default();
        let r = check_sqrt_comparison(&p2(), &vf(&[1.0, 4.0]), &opts).unwrap();
        assert!(r.passed);
        assert_abs_diff_eq!(r.lhs_values[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.rhs_values[0], 3.0, epsilon = 1e-15);
        let r = check_sqrt_comparison(&p2(), &VertexFunction::constant(2, 2.0), &opts).unwrap();
        assert!(r.passed);
        assert_eq!(r.lhs_values, vec![0.0, 0.0]);
    }

    #[test]
    fn cases() {
        let opts = CheckOptions::default();
        let g = p2();
        let u = vf(&[1.0, 2.0]);
        let lap = laplacian(&g, &u).unwrap();
        let q = lap.zip_with(&u, |l, v| l / v);
        let r = check_case(&g, &u, &CaseSpec::Potential { q: q.clone() }, &opts).unwrap();
        let base = check_gradient_estimate(&g, &u, &opts).unwrap();
        assert!(r.passed);
        for x in 0..2 {
            let a = r.rhs_values[x] - r.lhs_values[x];
            let b = base.rhs_values[x] - base.lhs_values[x];
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }

        let smaller = q.map(|v| v - 0.5);
        assert!(matches!(
            check_case(&g, &u, &CaseSpec::Potential { q: smaller }, &opts),
            Err(Error::HypothesisViolated { .. })
        ));

        let k = k3(1.0);
        let r = check_case(
            &k,
            &VertexFunction::constant(3, 1.0),
            &CaseSpec::PowerSource {
                h: VertexFunction::constant(3, 0.0),
                alpha: 2.0,
            },
            &opts,
        )
        .unwrap();
        assert!(r.passed);
        assert_eq!(r.lhs_values, vec![0.0; 3]);
    }

    #[test]
    fn log_source_case() {
        let opts = CheckOptions::default();
        let g = p2();
        let c = 0.7f64;
        let u = VertexFunction::constant(2, c.exp());
        let dt = VertexFunction::constant(2, 0.0);
        // a c <= 0 keeps Δu - ∂_t u + a u log u = a u c <= 0.
        for a in [-2.0, 0.0] {
            let r = check_case(&g, &u, &CaseSpec::LogSource { a, dt_u: dt.clone() }, &opts).unwrap();
            assert!(r.passed);
            assert_abs_diff_eq!(r.lhs_values[0], a * c, epsilon = 1e-14);
        }
        assert!(matches!(
            check_case(&g, &u, &CaseSpec::LogSource { a: 1.0, dt_u: dt }, &opts),
            Err(Error::HypothesisViolated { .. })
        ));
    }

    #[test]
    fn power_source_overflow() {
        let opts = CheckOptions::default();
        let g = p2();
        let u = VertexFunction::constant(2, 1e-12);
        let r = check_case(
            &g,
            &u,
            &CaseSpec::PowerSource {
                h: VertexFunction::constant(2, 1.0),
                alpha: -40.0,
            },
            &opts,
        );
        assert!(matches!(r, Err(Error::Overflow(_))));
    }

    #[test]
    fn laplacian_integrates_to_zero() {
        let f = vf(&[0.0, 1.0]);
        assert_eq!(integral_of_laplacian(&p2(), &f).unwrap(), 0.0);
        assert_eq!(
            integral_of_laplacian(&p2(), &VertexFunction::constant(2, 1.0)).unwrap(),
            0.0
        );
        let asym = WeightedGraph::directed(vec![1.0, 1.0], &[(0, 1, 1.0), (1, 0, 2.0)]).unwrap();
        assert!(matches!(
            integral_of_laplacian(&asym, &f),
            Err(Error::AsymmetricWeights)
        ));
    }
}
