use gelfand_demo::{dtn_spectrum_value, fibre_point_value, q_curve_value};

fn floats(v: &serde_json::Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn q_curve_decreases_and_reports_the_constant() {
    let v = q_curve_value(10.0, 200).unwrap();
    let q = floats(&v["q"]);
    assert_eq!(q.len(), 200);
    assert!(q.windows(2).all(|w| w[1] < w[0]));
    assert!(q.iter().all(|&x| x > 0.0 && x < 1.0));
    let c6 = v["c6"].as_f64().unwrap();
    assert!(c6 <= v["c6_upper_bound"].as_f64().unwrap());
    let ratio = floats(&v["ratio"]);
    assert!(ratio.iter().all(|&x| x > 1.0 && x <= c6 + 1e-9));
}

#[test]
fn fibre_point_lies_on_both_characteristic_varieties() {
    let v = fibre_point_value([0.6, -0.3, 0.0], [0.4, 0.2], 2.0).unwrap();
    for key in ["k_dot_k", "k_minus_p_squared"] {
        let z = floats(&v[key]);
        assert!(z[0].hypot(z[1]) < 1e-12, "{key} = {z:?}");
    }
    let im = v["im_norm"].as_f64().unwrap();
    assert!((im - v["level"].as_f64().unwrap()).abs() < 1e-12);
    assert_eq!(v["branch"], "plus");
    let rings = floats(&v["ring_moduli"]);
    assert_eq!(rings.len(), 2);
    assert!((rings[0] * rings[1] - 1.0).abs() < 1e-12);
}

#[test]
fn fibre_point_rejects_the_origin() {
    assert!(fibre_point_value([1.0, 0.0, 0.0], [0.0, 0.0], 2.0).is_err());
}

#[test]
fn dtn_spectrum_shift_has_the_sign_of_the_bump() {
    let flat = dtn_spectrum_value(0.0, 0.8, 8, 10).unwrap();
    assert!(floats(&flat["shift"]).iter().all(|s| s.abs() < 1e-10));
    let up = floats(&dtn_spectrum_value(2.0, 0.8, 8, 10).unwrap()["shift"]);
    let down = floats(&dtn_spectrum_value(-2.0, 0.8, 8, 10).unwrap()["shift"]);
    assert_eq!(up.len(), 11);
    assert!(up.iter().all(|&s| s > 0.0));
    assert!(down.iter().all(|&s| s < 0.0));
    assert!(up.windows(2).all(|w| w[1] < w[0]), "higher degrees see less of the bump");
}
