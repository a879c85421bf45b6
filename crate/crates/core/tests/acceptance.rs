//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

mod common;

use std::time::Instant;

use common::mixed_graph;
use graphgrad::generate::{
    bounded_function, fixture, positive_function, rng_for, static_potential, GraphFamily, MeasureScheme,
    WeightScheme,
};
use graphgrad::harnack::{
    check_harnack, check_kernel_comparison_all, check_potential_term, grid_pairs, min_path_functional,
    path_functional, HarnackQuery, DEFAULT_PANELS,
};
use graphgrad::heat::{heat_kernel, kernel_defects, solve_heat, Method, Potential, StepControl};
use graphgrad::operators::{
    check_alt_estimate, check_gradient_estimate, check_laplacian_integral, check_sqrt_comparison,
};
use graphgrad::spectral::{check_lower_bound, eigendecompose, eigenvalue_lower_bound};
use graphgrad::{CheckOptions, CheckReport, GraphConstants, VertexFunction, WeightedGraph};

type Outcome = Result<String, String>;

fn require(report: &CheckReport, what: &str) -> Result<(), String> {
    if report.passed {
        Ok(())
    } else {
        Err(format!(
            "{what}: {} violated by {:e} (lhs {}, rhs {}) at {:?}",
            report.name, report.max_violation, report.lhs, report.rhs, report.witness
        ))
    }
}

fn close(got: f64, want: f64, tol: f64, what: &str) -> Result<(), String> {
    if (got - want).abs() <= tol {
        Ok(())
    } else {
        Err(format!("{what}: got {got}, want {want}"))
    }
}

fn gradient_suite() -> Outcome {
    let opts = CheckOptions::with_tol(1e-9);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..1000 {
        let g = mixed_graph(101, i, 50, true);
        let u = positive_function(&mut rng_for(101, i as u64, 1), g.n(), 0.01, 100.0);
        for r in [
            check_gradient_estimate(&g, &u, &opts),
            check_alt_estimate(&g, &u, &opts),
            check_sqrt_comparison(&g, &u, &opts),
        ] {
            let r = r.map_err(|e| format!("graph {i}: {e}"))?;
            require(&r, &format!("graph {i}"))?;
            worst = worst.max(r.max_violation);
        }
    }
    Ok(format!("1000 graphs x 3 checks, worst relative excess {worst:e}"))
}

fn p2_fixture() -> Outcome {
    let g = fixture(GraphFamily::Path, 2, WeightScheme::Unit, MeasureScheme::Unit).map_err(|e| e.to_string())?;
    let c = GraphConstants::of(&g);
    close(c.d_mu, 1.0, 0.0, "D_mu")?;
    close(c.d, 1.0, 0.0, "d")?;
    let dec = eigendecompose(&g).map_err(|e| e.to_string())?;
    close(dec.eigenvalues[0], 0.0, 1e-12, "lambda_0")?;
    close(dec.eigenvalues[1], 2.0, 1e-12, "lambda_1")?;
    for t in [0.0, 0.5, 1.0, 5.0] {
        let k = heat_kernel(&g, t).map_err(|e| e.to_string())?;
        let diag = (1.0 + (-2.0 * t).exp()) / 2.0;
        close(k.get(0, 0), diag, 1e-12, &format!("P_{t}(0,0)"))?;
        close(k.get(0, 1), 1.0 - diag, 1e-12, &format!("P_{t}(0,1)"))?;
    }
    let e3 = 3.0f64.exp();
    let bound = eigenvalue_lower_bound(&g).map_err(|e| e.to_string())?;
    close(bound, 1.0 / (e3 - 1.0), 1e-12, "lower bound")?;
    if !(dec.eigenvalues[1] >= bound) {
        return Err("lambda_1 below bound".into());
    }
    Ok(format!("lower bound {bound}"))
}

fn semigroup_suite() -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..100 {
        let g = mixed_graph(303, i, 100, false);
        let d = kernel_defects(&g, 0.3, 0.7).map_err(|e| format!("graph {i}: {e}"))?;
        for (name, v) in [
            ("negativity", d.negativity),
            ("symmetry", d.symmetry),
            ("mass", d.mass),
            ("semigroup", d.semigroup),
        ] {
            if !(v <= 1e-9) {
                return Err(format!("graph {i} (n = {}): {name} defect {v:e}", g.n()));
            }
            worst = worst.max(v);
        }
    }
    Ok(format!("100 graphs, worst defect {worst:e}"))
}

fn harnack_suite() -> Outcome {
    let times: Vec<f64> = (0..=10).map(|k| 0.2 * k as f64).collect();
    let opts = CheckOptions::default();
    let mut pairs_checked = 0usize;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..200 {
        let g = mixed_graph(404, i, 30, true);
        let mut rng = rng_for(404, i as u64, 1);
        let u0 = positive_function(&mut rng, g.n(), 0.01, 100.0);
        let q = static_potential(&mut rng, g.n(), 1.0);
        let sol = solve_heat(&g, &u0, q, &times, Method::EigenExact, StepControl::default())
            .map_err(|e| format!("graph {i}: {e}"))?;
        let pairs = grid_pairs(&sol, 0.1);
        let h = check_harnack(&sol, &pairs, Method::EigenExact.residual_limit(), 1e-7, DEFAULT_PANELS)
            .map_err(|e| format!("graph {i}: {e}"))?;
        require(&h, &format!("graph {i}"))?;
        let p = check_potential_term(&sol, &pairs, DEFAULT_PANELS, &opts).map_err(|e| format!("graph {i}: {e}"))?;
        require(&p, &format!("graph {i}"))?;
        pairs_checked += pairs.len();
        worst = worst.max(h.max_violation);
    }
    Ok(format!("{pairs_checked} space-time pairs, worst log excess {worst:e}"))
}

/// All walks of length `dist(x, y)` from `x` that end at `y`.
fn brute_force_paths(g: &WeightedGraph, x: usize, y: usize, len: usize) -> Vec<Vec<usize>> {
    fn walk(g: &WeightedGraph, y: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let v = *cur.last().unwrap();
        if left == 0 {
            if v == y {
                out.push(cur.clone());
            }
            return;
        }
        for &(z, _) in g.neighbors(v) {
            cur.push(z);
            walk(g, y, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    walk(g, y, len, &mut vec![x], &mut out);
    out
}

fn dp_suite() -> Outcome {
    let mut compared = 0usize;
    for i in 0..50 {
        let g = mixed_graph(505, i, 10, true);
        let n = g.n();
        let mut rng = rng_for(505, i as u64, 1);
        let q = if i % 2 == 0 {
            static_potential(&mut rng, n, 1.0)
        } else {
            Potential::Sampled {
                times: vec![0.0, 0.7, 2.0],
                values: (0..3).map(|_| bounded_function(&mut rng, n, 1.0)).collect(),
            }
        };
        let (t1, t2) = (0.0, 2.0);
        for x in 0..n {
            for y in 0..n {
                if x == y {
                    continue;
                }
                let query = HarnackQuery { x, y, t1, t2 };
                let (dp, path) = min_path_functional(&g, &q, &query, DEFAULT_PANELS).map_err(|e| e.to_string())?;
                let len = g.dist(x, y).unwrap().unwrap();
                let mut best = f64::INFINITY;
                for p in brute_force_paths(&g, x, y, len) {
                    best = best.min(path_functional(&q, &p, t1, t2, DEFAULT_PANELS).map_err(|e| e.to_string())?);
                }
                close(dp, best, 1e-12, &format!("graph {i}, {x} -> {y}"))?;
                let along = path_functional(&q, &path, t1, t2, DEFAULT_PANELS).map_err(|e| e.to_string())?;
                close(along, dp, 1e-12, &format!("graph {i}, returned path {x} -> {y}"))?;
                compared += 1;
            }
        }
    }
    Ok(format!("{compared} vertex pairs"))
}

fn lower_bound_suite() -> Outcome {
    let opts = CheckOptions::default();
    let mut count = 0;
    for i in 0..200 {
        let g = mixed_graph(606, i, 40, true);
        let r = check_lower_bound(&g, &opts).map_err(|e| format!("graph {i}: {e}"))?;
        require(&r, &format!("graph {i}"))?;
        count += 1;
    }
    for family in [GraphFamily::Path, GraphFamily::Cycle] {
        for measure in [MeasureScheme::Unit, MeasureScheme::Degree] {
            for n in 2..=20 {
                let g = fixture(family.clone(), n, WeightScheme::Unit, measure).map_err(|e| e.to_string())?;
                let r = check_lower_bound(&g, &opts).map_err(|e| e.to_string())?;
                require(&r, &format!("{family:?} n = {n} {measure:?}"))?;
                count += 1;
            }
        }
    }
    Ok(format!("{count} graphs"))
}

fn kernel_comparison_suite() -> Outcome {
    let opts = CheckOptions::with_tol(1e-9);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..100 {
        let g = mixed_graph(707, i, 30, false);
        for t in [1.0, 2.0] {
            for delta in [0.5, 1.0] {
                let r = check_kernel_comparison_all(&g, t, delta, &opts).map_err(|e| format!("graph {i}: {e}"))?;
                require(&r, &format!("graph {i}, t = {t}, delta = {delta}"))?;
                worst = worst.max(r.max_violation);
            }
        }
    }
    Ok(format!("100 graphs x 4 parameter pairs, worst relative excess {worst:e}"))
}

fn integral_suite() -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..500 {
        let g = mixed_graph(808, i, 50, false);
        let f: VertexFunction = bounded_function(&mut rng_for(808, i as u64, 1), g.n(), 100.0);
        let r = check_laplacian_integral(&g, &f, 1e-12).map_err(|e| format!("graph {i}: {e}"))?;
        require(&r, &format!("graph {i}"))?;
        worst = worst.max(r.lhs);
    }
    Ok(format!("500 graphs, worst |integral| / scale {worst:e}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 gradient estimate suite", gradient_suite),
        ("2 two-vertex fixture", p2_fixture),
        ("3 heat semigroup", semigroup_suite),
        ("4 Harnack suite", harnack_suite),
        ("5 path DP against brute force", dp_suite),
        ("6 eigenvalue lower bound", lower_bound_suite),
        ("7 heat kernel comparison", kernel_comparison_suite),
        ("8 integral of the Laplacian", integral_suite),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail} ({secs:.1} s)"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why} ({secs:.1} s)");
            }
        }
    }
    if failed > 0 {
        println!("{failed} of 8 criteria failed");
        std::process::exit(1);
    }
    println!("all 8 criteria passed");
}
