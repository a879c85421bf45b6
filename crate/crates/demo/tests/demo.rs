use graphgrad_demo::{harnack_json, heat_flow_json, spectrum_json};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn heat_flow_conserves_mass() {
    let v = parse(heat_flow_json("cycle", 8, 0, 2.0, 20).unwrap());
    let values = v["values"].as_array().unwrap();
    assert_eq!(values.len(), 21);
    for frame in values {
        let total: f64 = frame.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
    assert_eq!(v["edges"].as_array().unwrap().len(), 8);
}

#[test]
fn harnack_holds_on_families() {
    for family in ["path", "cycle", "complete", "grid"] {
        for (x, y) in [(0, 5), (3, 3), (7, 1)] {
            let v = parse(harnack_json(family, 9, x, y, 0.5, 1.5, 0.7, 3).unwrap());
            assert_eq!(v["holds"], true, "{family} {x} {y}: {v}");
        }
    }
}

#[test]
fn spectrum_respects_lower_bound() {
    for measure in ["unit", "degree"] {
        let v = parse(spectrum_json("path", 6, measure).unwrap());
        let first = v["first_nonzero"].as_f64().unwrap();
        assert!(first >= v["lower_bound"].as_f64().unwrap());
        assert!(v["eigenvalues"][0].as_f64().unwrap().abs() < 1e-12);
    }
}

#[test]
fn rejects_bad_input() {
    assert!(spectrum_json("star", 5, "unit").is_err());
    assert!(spectrum_json("path", 1, "unit").is_err());
    assert!(heat_flow_json("path", 4, 9, 1.0, 3).is_err());
    assert!(harnack_json("path", 4, 0, 1, 1.0, 0.5, 0.0, 1).is_err());
}
