//! Browser bindings: each export returns a JSON string for the page to plot.

use gelfand_core::constants::{c6_constant, c6_upper_bound, q_radius};
use gelfand_core::coords::{k_from_lambda, level, modulus_at_level, Branch, Frame, LambdaPoint};
use gelfand_core::forward::radial_dtn_entry;
use gelfand_core::potential::RadialProfile;
use gelfand_core::{Vec3, C64};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn render(result: gelfand_core::Result<Value>) -> Result<String, JsError> {
    result.map(|v| v.to_string()).map_err(|e| JsError::new(&e.to_string()))
}

/// `q(r)` and the ratio `q(r) / (q(r) - q(2r))` on `n` points of
/// `(1/2, r_max]`, with the supremum constant and its bound.
pub fn q_curve_value(r_max: f64, n: usize) -> gelfand_core::Result<Value> {
    let n = n.clamp(2, 4096);
    let start = 0.5 + 1e-3;
    let rs: Vec<f64> = (0..n)
        .map(|i| start + (r_max - start) * i as f64 / (n - 1) as f64)
        .collect();
    let q = rs.iter().map(|&r| q_radius(r)).collect::<gelfand_core::Result<Vec<_>>>()?;
    let ratio = rs
        .iter()
        .zip(&q)
        .map(|(&r, &a)| Ok(a / (a - q_radius(2.0 * r)?)))
        .collect::<gelfand_core::Result<Vec<_>>>()?;
    Ok(json!({
        "r": rs,
        "q": q,
        "ratio": ratio,
        "c6": c6_constant(),
        "c6_upper_bound": c6_upper_bound(),
    }))
}

#[wasm_bindgen]
pub fn q_curve(r_max: f64, n: usize) -> Result<String, JsError> {
    render(q_curve_value(r_max, n))
}

/// The complex momentum attached to `lambda` over `p`, with the two circles
/// of the fibre at `|Im k| = rho`.
pub fn fibre_point_value(p: [f64; 3], lambda: [f64; 2], rho: f64) -> gelfand_core::Result<Value> {
    let frame = Frame::default();
    let lp = LambdaPoint {
        lambda: C64::new(lambda[0], lambda[1]),
        p: Vec3::from(p),
    };
    let k = k_from_lambda(&lp, &frame)?;
    let c = k.components();
    let kk: C64 = c.iter().map(|z| z * z).sum();
    let shifted: C64 = c.iter().zip(p).map(|(z, pi)| (z - pi) * (z - pi)).sum();
    let pn = lp.p.norm();
    let rings = if rho > pn / 2.0 {
        Branch::BOTH.map(|b| modulus_at_level(rho, pn, b)).to_vec()
    } else {
        vec![]
    };
    Ok(json!({
        "k_re": k.re.as_slice(),
        "k_im": k.im.as_slice(),
        "k_dot_k": [kk.re, kk.im],
        "k_minus_p_squared": [shifted.re, shifted.im],
        "im_norm": k.im.norm(),
        "level": level(&lp),
        "branch": Branch::of(lp.lambda),
        "ring_moduli": rings,
    }))
}

#[wasm_bindgen]
pub fn fibre_point(px: f64, py: f64, pz: f64, lambda_re: f64, lambda_im: f64, rho: f64) -> Result<String, JsError> {
    render(fibre_point_value([px, py, pz], [lambda_re, lambda_im], rho))
}

/// Per-degree eigenvalues of the DtN map of a radial bump against those of
/// the zero potential (`l`).
pub fn dtn_spectrum_value(amplitude: f64, radius: f64, power: u32, max_degree: usize) -> gelfand_core::Result<Value> {
    let profile = RadialProfile::Bump { amplitude, radius, power };
    let degrees: Vec<usize> = (0..=max_degree.min(60)).collect();
    let values = degrees
        .iter()
        .map(|&l| radial_dtn_entry(&profile, l))
        .collect::<gelfand_core::Result<Vec<_>>>()?;
    let shift: Vec<f64> = degrees.iter().zip(&values).map(|(&l, v)| v - l as f64).collect();
    Ok(json!({ "degree": degrees, "value": values, "shift": shift }))
}

#[wasm_bindgen]
pub fn dtn_spectrum(amplitude: f64, radius: f64, power: u32, max_degree: usize) -> Result<String, JsError> {
    render(dtn_spectrum_value(amplitude, radius, power, max_degree))
}
