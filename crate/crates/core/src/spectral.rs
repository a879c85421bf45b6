//! Spectrum of `-Δ` and the eigenvalue estimates built on the gradient
//! estimate.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::function::VertexFunction;
use crate::graph::{GraphConstants, WeightedGraph};
use crate::operators::laplacian;
use crate::report::{CheckOptions, CheckReport, Witness};

/// `M^{1/2} (-Δ + diag(q)) M^{-1/2}` as a dense symmetric matrix, where
/// `M = diag(μ)`. Requires symmetric weights.
pub fn symmetrized_operator(g: &WeightedGraph, q: Option<&[f64]>) -> Result<DMatrix<f64>> {
    g.require_symmetric()?;
    let n = g.n();
    let mut s = DMatrix::zeros(n, n);
    for x in 0..n {
        let mx = g.mu(x);
        s[(x, x)] = g.degree(x) / mx + q.map_or(0.0, |q| q[x]);
        for &(y, w) in g.neighbors(x) {
            s[(x, y)] = -w / (mx * g.mu(y)).sqrt();
        }
    }
    Ok(s)
}

/// Full eigendecomposition of `-Δ` with `μ`-orthonormal eigenfunctions.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// `eigenfunctions[k]` pairs with `eigenvalues[k]`; the first entry
    /// whose magnitude is not negligible is positive.
    pub eigenfunctions: Vec<VertexFunction>,
}

impl SpectralDecomposition {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Smallest eigenvalue that is not numerically zero.
    pub fn first_nonzero(&self, zero_tol: f64) -> Option<(usize, f64)> {
        self.eigenvalues
            .iter()
            .copied()
            .enumerate()
            .find(|&(_, l)| l > zero_tol)
    }

    /// Number of eigenvalues within `zero_tol` of zero.
    pub fn zero_multiplicity(&self, zero_tol: f64) -> usize {
        self.eigenvalues.iter().filter(|l| l.abs() <= zero_tol).count()
    }
}

/// Tolerance for calling an eigenvalue zero, relative to the spectral radius scale.
pub fn zero_tolerance(g: &WeightedGraph) -> f64 {
    1e-9 * (1.0 + GraphConstants::of(g).d_mu)
}

pub(crate) fn decompose_symmetric(s: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = s.nrows();
    let eig = SymmetricEigen::new(s);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut basis = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        basis.set_column(k, &eig.eigenvectors.column(i));
    }
    (values, basis)
}

pub fn eigendecompose(g: &WeightedGraph) -> Result<SpectralDecomposition> {
    let s = symmetrized_operator(g, None)?;
    let (eigenvalues, mut basis) = decompose_symmetric(s);
    let n = g.n();
    let mut eigenfunctions = Vec::with_capacity(n);
    for k in 0..n {
        let mut col = basis.column_mut(k);
        let scale = col.amax();
        if let Some(first) = col.iter().find(|v| v.abs() > 1e-8 * scale) {
            if *first < 0.0 {
                col.neg_mut();
            }
        }
        eigenfunctions.push(VertexFunction::from_fn(n, |x| col[x] / g.mu(x).sqrt()));
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenfunctions,
    })
}

/// `max_k max_x |-Δφ_k(x) - λ_k φ_k(x)| / (1 + λ_k)`.
pub fn eigen_residual(g: &WeightedGraph, dec: &SpectralDecomposition) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (lambda, phi) in dec.eigenvalues.iter().zip(&dec.eigenfunctions) {
        let lap = laplacian(g, phi)?;
        for x in 0..g.n() {
            worst = worst.max((-lap[x] - lambda * phi[x]).abs() / (1.0 + lambda.abs()));
        }
    }
    Ok(worst)
}

/// `max_{i,j} |Σ_x φ_i(x) φ_j(x) μ(x) - δ_ij|`.
pub fn orthonormality_defect(g: &WeightedGraph, dec: &SpectralDecomposition) -> f64 {
    let n = dec.len();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            let ip: f64 = (0..g.n())
                .map(|x| dec.eigenfunctions[i][x] * dec.eigenfunctions[j][x] * g.mu(x))
                .sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((ip - target).abs());
        }
    }
    worst
}

/// `D_μ + sqrt(D_μ / d)`, the upper bound for the bottom of the spectrum.
pub fn cheng_bound(c: &GraphConstants) -> f64 {
    c.drift_rate()
}

/// Checks `λ_0 <= D_μ + sqrt(D_μ)/sqrt(d)` for the bottom of the spectrum.
///
/// On a finite graph `λ_0 = 0`, so this only confirms the bound is
/// nonnegative; [`check_cheng_dirichlet`] gives the estimate real content.
pub fn check_cheng_bound(g: &WeightedGraph, opts: &CheckOptions) -> Result<CheckReport> {
    let dec = eigendecompose(g)?;
    let c = GraphConstants::of(g);
    let lambda0 = dec.eigenvalues.first().copied().unwrap_or(0.0);
    Ok(CheckReport::from_entries(
        "cheng_bound",
        vec![lambda0],
        vec![cheng_bound(&c)],
        vec![Witness::Eigenvalue { index: 0 }],
        opts.rel_tol,
    ))
}

/// Bottom eigenvalue of `-Δ` on `subset` with zero values outside it.
///
/// This is an extension: the Dirichlet ground state is nonnegative and
/// positive somewhere, which is all the gradient estimate needs, so it
/// obeys the same upper bound while being strictly positive for proper
/// subsets of a connected graph.
pub fn dirichlet_bottom(g: &WeightedGraph, subset: &[usize]) -> Result<f64> {
    let s = symmetrized_operator(g, None)?;
    if subset.is_empty() {
        return Err(Error::BadParameters("empty Dirichlet region".into()));
    }
    for &x in subset {
        if x >= g.n() {
            return Err(Error::UnknownVertex(x));
        }
    }
    let m = subset.len();
    let sub = DMatrix::from_fn(m, m, |i, j| s[(subset[i], subset[j])]);
    let (values, _) = decompose_symmetric(sub);
    Ok(values[0])
}

/// Dirichlet variant of the Cheng check on a vertex subset.
pub fn check_cheng_dirichlet(
    g: &WeightedGraph,
    subset: &[usize],
    opts: &CheckOptions,
) -> Result<CheckReport> {
    let lambda = dirichlet_bottom(g, subset)?;
    let c = GraphConstants::of(g);
    Ok(CheckReport::from_entries(
        "cheng_dirichlet",
        vec![lambda],
        vec![cheng_bound(&c)],
        vec![Witness::Eigenvalue { index: 0 }],
        opts.rel_tol,
    ))
}

/// `1 / (D d (exp{1 + D d (D_μ + sqrt(D_μ/d))} - 1))` from the diameter and constants.
pub fn lower_bound_formula(diameter: f64, d: f64, d_mu: f64) -> f64 {
    let dd = diameter * d;
    1.0 / (dd * (1.0 + dd * (d_mu + (d_mu / d).sqrt())).exp_m1())
}

/// Lower bound for every nonzero eigenvalue of `-Δ` on a finite connected
/// graph with symmetric weights.
pub fn eigenvalue_lower_bound(g: &WeightedGraph) -> Result<f64> {
    g.require_symmetric()?;
    let c = GraphConstants::of(g);
    let diameter = c.diameter.ok_or(Error::NotConnected)?;
    if diameter == 0 {
        return Err(Error::BadParameters(
            "single-vertex graph has no nonzero eigenvalue".into(),
        ));
    }
    Ok(lower_bound_formula(diameter as f64, c.d, c.d_mu))
}

/// Checks that the smallest nonzero eigenvalue is at least
/// [`eigenvalue_lower_bound`].
pub fn check_lower_bound(g: &WeightedGraph, opts: &CheckOptions) -> Result<CheckReport> {
    let bound = eigenvalue_lower_bound(g)?;
    let dec = eigendecompose(g)?;
    let (index, lambda1) = dec
        .first_nonzero(zero_tolerance(g))
        .ok_or(Error::NotConnected)?;
    Ok(CheckReport::from_entries(
        "lower_bound",
        vec![bound],
        vec![lambda1],
        vec![Witness::Eigenvalue { index }],
        opts.rel_tol,
    ))
}

/// CSV with header `index,eigenvalue`.
pub fn spectrum_csv(dec: &SpectralDecomposition) -> String {
    let mut out = String::from("index,eigenvalue\n");
    for (k, l) in dec.eigenvalues.iter().enumerate() {
        out.push_str(&format!("{k},{l}\n"));
    }
    out
}

/// CSV with header `index,vertex,value`.
pub fn eigenfunctions_csv(dec: &SpectralDecomposition) -> String {
    let mut out = String::from("index,vertex,value\n");
    for (k, phi) in dec.eigenfunctions.iter().enumerate() {
        for (x, v) in phi.iter().enumerate() {
            out.push_str(&format!("{k},{x},{v}\n"));
        }
    }
    out
}
