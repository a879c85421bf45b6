use serde::{Deserialize, Serialize};

use crate::function::DEFAULT_POS_FLOOR;

/// Default relative tolerance for inequality checks. The estimates are
/// exact, so this only absorbs rounding.
pub const DEFAULT_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckOptions {
    pub pos_floor: f64,
    pub rel_tol: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            pos_floor: DEFAULT_POS_FLOOR,
            rel_tol: DEFAULT_REL_TOL,
        }
    }
}

impl CheckOptions {
    pub fn with_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

/// Location of the entry that came closest to violating an inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    Vertex {
        x: usize,
    },
    Time {
        x: usize,
        t: f64,
    },
    SpaceTime {
        x: usize,
        t1: f64,
        y: usize,
        t2: f64,
    },
    Pair {
        x: usize,
        y: usize,
    },
    Eigenvalue {
        index: usize,
    },
    /// A named scalar property rather than a location.
    Named {
        label: String,
    },
}

/// Outcome of checking `lhs <= rhs` entrywise.
///
/// Each entry is allowed `rel_tol * (1 + |rhs|)` of slop. `max_violation`
/// is the largest `(lhs - rhs) / (1 + |rhs|)` (plain `lhs - rhs` for
/// absolute reports), so `passed` is exactly `max_violation <= tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub lhs_values: Vec<f64>,
    pub rhs_values: Vec<f64>,
    #[serde(skip)]
    pub witnesses: Vec<Witness>,
    /// Left side at the witness.
    pub lhs: f64,
    /// Right side at the witness.
    pub rhs: f64,
    /// `rhs - lhs` at the witness.
    pub slack: f64,
    pub max_violation: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub witness: Option<Witness>,
}

impl CheckReport {
    /// Builds a report from per-entry sides. `witnesses[i]` describes entry `i`.
    pub fn from_entries(
        name: impl Into<String>,
        lhs_values: Vec<f64>,
        rhs_values: Vec<f64>,
        witnesses: Vec<Witness>,
        tolerance: f64,
    ) -> Self {
        Self::build(name, lhs_values, rhs_values, witnesses, tolerance, false)
    }

    /// Like [`CheckReport::from_entries`] but with an absolute tolerance:
    /// `max_violation` is the largest plain `lhs - rhs`.
    pub fn from_entries_absolute(
        name: impl Into<String>,
        lhs_values: Vec<f64>,
        rhs_values: Vec<f64>,
        witnesses: Vec<Witness>,
        tolerance: f64,
    ) -> Self {
        Self::build(name, lhs_values, rhs_values, witnesses, tolerance, true)
    }

    fn build(
        name: impl Into<String>,
        lhs_values: Vec<f64>,
        rhs_values: Vec<f64>,
        witnesses: Vec<Witness>,
        tolerance: f64,
        absolute: bool,
    ) -> Self {
        assert_eq!(lhs_values.len(), rhs_values.len());
        assert_eq!(lhs_values.len(), witnesses.len());
        let mut worst: Option<(usize, f64)> = None;
        for (i, (&l, &r)) in lhs_values.iter().zip(&rhs_values).enumerate() {
            let v = violation(l, r, absolute);
            if worst.is_none_or(|(_, w)| v > w) {
                worst = Some((i, v));
            }
        }
        let (lhs, rhs, max_violation, witness) = match worst {
            Some((i, v)) => (
                lhs_values[i],
                rhs_values[i],
                v,
                Some(witnesses[i].clone()),
            ),
            None => (0.0, 0.0, f64::NEG_INFINITY, None),
        };
        Self {
            name: name.into(),
            lhs_values,
            rhs_values,
            witnesses,
            lhs,
            rhs,
            slack: rhs - lhs,
            max_violation,
            tolerance,
            passed: max_violation <= tolerance,
            witness,
        }
    }

    /// Per-vertex report; entry `i` is vertex `i`.
    pub fn per_vertex(
        name: impl Into<String>,
        lhs_values: Vec<f64>,
        rhs_values: Vec<f64>,
        tolerance: f64,
    ) -> Self {
        let witnesses = (0..lhs_values.len())
            .map(|x| Witness::Vertex { x })
            .collect();
        Self::from_entries(name, lhs_values, rhs_values, witnesses, tolerance)
    }

    /// Concatenates reports of the same inequality into one.
    pub fn merge(name: impl Into<String>, reports: Vec<CheckReport>, tolerance: f64) -> Self {
        let mut lhs = Vec::new();
        let mut rhs = Vec::new();
        let mut wit = Vec::new();
        for r in reports {
            lhs.extend(r.lhs_values);
            rhs.extend(r.rhs_values);
            wit.extend(r.witnesses);
        }
        Self::from_entries(name, lhs, rhs, wit, tolerance)
    }
}

fn violation(lhs: f64, rhs: f64, absolute: bool) -> f64 {
    if rhs == f64::INFINITY && lhs.is_finite() {
        return f64::NEG_INFINITY;
    }
    let v = if absolute {
        lhs - rhs
    } else {
        (lhs - rhs) / (1.0 + rhs.abs())
    };
    // NaN anywhere fails the check.
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}
