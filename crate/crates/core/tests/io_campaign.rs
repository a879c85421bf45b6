mod common;

use common::mixed_graph;
use graphgrad::campaign::{read_config, run_campaign, CampaignConfig, CHECKS};
use graphgrad::generate::{rng_for, bounded_function, GraphFamily, MeasureScheme, WeightScheme};
use graphgrad::io::{
    function_to_text, graph_to_json, graph_to_text, parse_function, parse_graph, read_graph,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn text_and_json_round_trip(seed in any::<u64>()) {
        let g = mixed_graph(seed, (seed % 97) as usize, 20, false);
        let from_text = parse_graph(&graph_to_text(g.data())).unwrap();
        prop_assert_eq!(from_text.data(), g.data());
        let from_json = parse_graph(&graph_to_json(g.data())).unwrap();
        prop_assert_eq!(from_json.data(), g.data());
        let f = bounded_function(&mut rng_for(seed, 0, 1), g.n(), 1e6);
        prop_assert_eq!(parse_function(&function_to_text(&f), g.n(), None).unwrap(), f);
    }
}

#[test]
fn graph_files_load() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tri.txt");
    std::fs::write(&path, "graph 3\nmu x 2\nedge x y 1\nedge y z 0.5\nedge z x 4\n").unwrap();
    let g = read_graph(&path).unwrap();
    assert_eq!(g.n(), 3);
    assert_eq!(g.data().labels.as_deref().unwrap(), &["x", "y", "z"]);
    assert_eq!(g.degree(0), 5.0);
    assert!(read_graph(dir.path().join("missing.txt")).is_err());
}

#[test]
fn campaign_writes_report_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let mut cfg = CampaignConfig::new(17, 6, GraphFamily::RandomTree { p_extra: 0.2 }, &CHECKS);
    cfg.n_max = 10;
    cfg.output_path = Some(out.clone());
    let cfg_path = dir.path().join("config.json");
    std::fs::write(&cfg_path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let cfg = read_config(&cfg_path).unwrap();
    let first = run_campaign(&cfg).unwrap();
    assert!(first.all_passed, "{}", first.to_json());
    let written: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(written["checks"].as_array().unwrap().len(), CHECKS.len());
    let second = run_campaign(&cfg).unwrap();
    assert_eq!(first.without_timing().to_json(), second.without_timing().to_json());
}

#[test]
fn campaign_on_paths_and_cycles() {
    for family in [GraphFamily::Path, GraphFamily::Cycle] {
        let mut cfg = CampaignConfig::new(4, 19, family, &["lower_bound", "gradient_estimate"]);
        cfg.n_min = 2;
        cfg.n_max = 20;
        cfg.weight_scheme = WeightScheme::Unit;
        cfg.measure_scheme = MeasureScheme::Degree;
        let r = run_campaign(&cfg).unwrap();
        assert!(r.all_passed);
        assert_eq!(r.checks[0].passed, 19);
    }
}
