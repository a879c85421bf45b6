#![allow(dead_code)]

use graphgrad::generate::{generate, GraphFamily, GraphSpec, MeasureScheme, WeightScheme};
use graphgrad::WeightedGraph;

pub const LOG_RANGE: (f64, f64) = (0.1, 10.0);

pub fn log_uniform_weights() -> WeightScheme {
    WeightScheme::LogUniform { lo: LOG_RANGE.0, hi: LOG_RANGE.1 }
}

pub fn log_uniform_measure() -> MeasureScheme {
    MeasureScheme::LogUniform { lo: LOG_RANGE.0, hi: LOG_RANGE.1 }
}

/// Graph `index` of a stream that rotates through the generator families,
/// with log-uniform weights and measures and `2 <= n <= n_max`.
pub fn mixed_graph(seed: u64, index: usize, n_max: usize, connected: bool) -> WeightedGraph {
    let family = match index % 6 {
        0 => GraphFamily::ErdosRenyi { p: 0.3 },
        1 => GraphFamily::RandomTree { p_extra: 0.05 },
        2 => GraphFamily::ErdosRenyi { p: 0.7 },
        3 => GraphFamily::Cycle,
        4 => GraphFamily::Grid,
        _ => GraphFamily::RandomTree { p_extra: 0.0 },
    };
    let family = match family {
        GraphFamily::ErdosRenyi { p } if !connected => GraphFamily::ErdosRenyi { p: p / 2.0 },
        f => f,
    };
    let spec = GraphSpec {
        family,
        n_min: 2,
        n_max,
        weights: log_uniform_weights(),
        measure: log_uniform_measure(),
        require_connected: connected,
    };
    generate(&spec, seed, index as u64).expect("generator succeeds")
}
