//! The four pipeline stages, each reading its inputs from and writing its
//! outputs to the output directory.

use crate::artifacts::{self, DtnMeta};
use anyhow::{bail, Result};
use gelfand_core::boundary::h_on_slice;
use gelfand_core::constants::ConstantsReport;
use gelfand_core::dbar::run_dbar;
use gelfand_core::experiment::{forward_maps, ExperimentConfig};
use gelfand_core::forward::{opnorm, perturb, NoiseModel};
use gelfand_core::fourier::{error_report, invert_bandlimited, FrequencyField, ReconParams, ReconReport};
use gelfand_core::C64;
use serde::Serialize;
use std::fs::OpenOptions;
use std::path::Path;

/// Version tag carried by every CSV row.
pub const CSV_SCHEMA: u32 = 1;

#[derive(Serialize)]
struct ForwardReport {
    max_degree: usize,
    route: String,
    delta: f64,
    seed: u64,
    difference_norm: f64,
    symmetry_defect: f64,
}

pub fn forward(cfg: &ExperimentConfig, out: &Path, degree: usize, delta: f64) -> Result<()> {
    let (clean, phi_0) = forward_maps(cfg, degree)?;
    let noise = NoiseModel {
        kind: cfg.noise.kind,
        delta,
        seed: cfg.noise.seed,
    };
    let phi_v = perturb(&clean, &noise)?;
    let route = serde_json::to_value(cfg.forward)?.as_str().unwrap_or_default().to_string();
    let meta = |role: &str, delta| DtnMeta {
        max_degree: degree,
        role: role.into(),
        route: route.clone(),
        delta,
        seed: cfg.noise.seed,
    };
    artifacts::write_dtn(out, "dtn_v", &phi_v, &meta("v", delta))?;
    artifacts::write_dtn(out, "dtn_0", &phi_0, &meta("zero", 0.0))?;
    let report = ForwardReport {
        max_degree: degree,
        route: route.clone(),
        delta,
        seed: cfg.noise.seed,
        difference_norm: opnorm(&phi_v.difference(&phi_0)?),
        symmetry_defect: phi_v.symmetry_defect(),
    };
    artifacts::write_json(out, "forward.json", &report)?;
    println!(
        "forward: L = {degree}, route {route}, |Phi_v - Phi_0| = {:.4e}",
        report.difference_norm
    );
    Ok(())
}

#[derive(Serialize)]
struct ScatterReport {
    rho: f64,
    max_degree: usize,
    nodes: usize,
    masked_fraction: f64,
    max_abs_h: f64,
}

pub fn scatter(cfg: &ExperimentConfig, out: &Path, rho: f64) -> Result<()> {
    let (phi_v, meta) = artifacts::read_dtn(out, "dtn_v")?;
    let (phi_0, _) = artifacts::read_dtn(out, "dtn_0")?;
    let grid = cfg.lambda_grid(rho)?;
    let slice = h_on_slice(&phi_v, &phi_0, &grid)?;
    artifacts::write_slice(out, &slice)?;
    let report = ScatterReport {
        rho,
        max_degree: meta.max_degree,
        nodes: slice.len(),
        masked_fraction: slice.masked_fraction(),
        max_abs_h: slice.values.iter().map(|z| z.norm()).fold(0.0, f64::max),
    };
    artifacts::write_json(out, "scatter.json", &report)?;
    println!(
        "scatter: rho = {rho}, {} ring nodes, {:.1}% masked",
        report.nodes,
        100.0 * report.masked_fraction
    );
    Ok(())
}

pub fn dbar(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let slice = artifacts::read_slice(out)?;
    let outcome = run_dbar(&slice, &cfg.dbar, cfg.mu)?;
    artifacts::write_field(out, &outcome.field)?;
    artifacts::write_frequency(out, "vhat_plus", &outcome.plus)?;
    artifacts::write_frequency(out, "vhat_minus", &outcome.minus)?;
    artifacts::write_frequency(out, "vhat_naive", &outcome.naive)?;
    artifacts::write_json(out, "dbar.json", &outcome.report)?;
    let r = &outcome.report;
    println!(
        "dbar: {} iterations, converged {}, contraction {:.3e}, spread {:.3e}",
        r.iterations, r.converged, r.contraction_estimate, r.extraction_spread
    );
    Ok(())
}

#[derive(Serialize)]
struct ReconRow {
    schema_version: u32,
    method: &'static str,
    rho: f64,
    tau: f64,
    delta: f64,
    linf_error: f64,
    i1: f64,
    i2_bound: f64,
}

impl ReconRow {
    fn new(method: &'static str, r: &ReconReport) -> Self {
        Self {
            schema_version: CSV_SCHEMA,
            method,
            rho: r.rho,
            tau: r.tau,
            delta: r.delta,
            linf_error: r.linf_error,
            i1: r.i1,
            i2_bound: r.i2_bound,
        }
    }
}

pub fn reconstruct(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let (_, dtn) = artifacts::read_dtn(out, "dtn_v")?;
    let slice = artifacts::read_slice(out)?;
    let v_true = cfg.potential()?;
    let grid = v_true.grid;
    let params = ReconParams {
        rho: slice.grid.rho,
        tau: slice.grid.tau,
        delta: dtn.delta,
    };
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for (method, name, target) in [("effective", "vhat_plus", "v_rec"), ("naive", "vhat_naive", "v_rec_naive")] {
        let vhat = artifacts::read_frequency(out, name)?;
        if vhat.band_radius.is_some_and(|b| (b - slice.grid.band()).abs() > 1e-12) {
            bail!("{name} was not produced from the stored slice");
        }
        let truth = FrequencyField {
            values: vhat.points.iter().map(|p| C64::new(cfg.profile.fourier(p.norm()), 0.0)).collect(),
            ..vhat.clone()
        };
        let v_rec = invert_bandlimited(&vhat, &grid)?;
        artifacts::write_volume(out, target, &grid, &v_rec)?;
        let report = error_report(&v_true, &v_rec, &truth, &vhat, params)?;
        rows.push(ReconRow::new(method, &report));
        reports.push((method, report));
    }
    artifacts::write_volume(out, "v_true", &grid, &v_true.values)?;
    let json: serde_json::Map<String, serde_json::Value> = reports
        .iter()
        .map(|(m, r)| Ok((m.to_string(), serde_json::to_value(r)?)))
        .collect::<Result<_>>()?;
    artifacts::write_json(out, "reconstruct.json", &json)?;
    append_rows(&out.join("reconstruct.csv"), &rows)?;
    for (m, r) in &reports {
        println!("reconstruct ({m}): linf error {:.4e}, I1 {:.4e}", r.linf_error, r.i1);
    }
    Ok(())
}

/// Appends rows, writing the header only when the file is new or empty.
pub fn append_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut w = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn verify_constants(out: &Path, r_max: f64) -> Result<()> {
    let report = ConstantsReport::evaluate(r_max);
    artifacts::write_json(out, "constants.json", &report)?;
    println!(
        "c6 = {:.9} (bound {:.9}, limit {}), c8 = {:.6e}",
        report.c6, report.c6_upper_bound, report.c6_limit, report.c8
    );
    for (r, e) in &report.q_identity_residuals {
        println!("r = {r}: |q + 1/q - 4r| = {e:.2e}");
    }
    if !report.passes() {
        bail!("constant checks failed");
    }
    Ok(())
}
