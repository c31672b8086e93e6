use crate::artifacts;
use crate::stages::{append_rows, CSV_SCHEMA};
use anyhow::Result;
use gelfand_core::experiment::{sweep_noise, sweep_rho, ExperimentConfig};
use serde::Serialize;
use std::path::Path;

/// One `sweep_rho.csv` row; the fitted slopes repeat on every row so that
/// consumers can annotate without refitting.
#[derive(Serialize)]
struct RhoCsv {
    schema_version: u32,
    rho: f64,
    max_degree: usize,
    naive_error: f64,
    effective_error: f64,
    linf_naive: f64,
    linf_effective: f64,
    iterations: usize,
    contraction: f64,
    converged: bool,
    extraction_spread: f64,
    masked_fraction: f64,
    flagged: bool,
    naive_slope: Option<f64>,
    effective_slope: Option<f64>,
}

#[derive(Serialize)]
struct NoiseCsv {
    schema_version: u32,
    delta: f64,
    log_term: f64,
    rho: f64,
    capped: bool,
    max_degree: usize,
    linf_error: f64,
    converged: bool,
    fitted_exponent: Option<f64>,
}

fn fresh(path: &Path) -> Result<()> {
    if path.exists() {
        std::fs::remove_file(path)?;
    }
    Ok(())
}

pub fn rho(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let sweep = sweep_rho(cfg)?;
    let rows: Vec<RhoCsv> = sweep
        .rows
        .iter()
        .map(|r| RhoCsv {
            schema_version: CSV_SCHEMA,
            rho: r.rho,
            max_degree: r.max_degree,
            naive_error: r.naive_error,
            effective_error: r.effective_error,
            linf_naive: r.linf_naive,
            linf_effective: r.linf_effective,
            iterations: r.iterations,
            contraction: r.contraction,
            converged: r.converged,
            extraction_spread: r.extraction_spread,
            masked_fraction: r.masked_fraction,
            flagged: r.flagged,
            naive_slope: sweep.naive_slope,
            effective_slope: sweep.effective_slope,
        })
        .collect();
    let path = out.join("sweep_rho.csv");
    fresh(&path)?;
    append_rows(&path, &rows)?;
    artifacts::write_json(out, "sweep_rho.json", &sweep)?;
    let show = |s: Option<f64>| s.map_or("n/a".to_string(), |s| format!("{s:.3}"));
    println!(
        "sweep-rho: naive slope {}, effectivized slope {}",
        show(sweep.naive_slope),
        show(sweep.effective_slope)
    );
    Ok(())
}

pub fn noise(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let sweep = sweep_noise(cfg)?;
    let rows: Vec<NoiseCsv> = sweep
        .rows
        .iter()
        .map(|r| NoiseCsv {
            schema_version: CSV_SCHEMA,
            delta: r.delta,
            log_term: r.log_term,
            rho: r.rho,
            capped: r.capped,
            max_degree: r.max_degree,
            linf_error: r.linf_error,
            converged: r.converged,
            fitted_exponent: sweep.fitted_exponent,
        })
        .collect();
    let path = out.join("sweep_noise.csv");
    fresh(&path)?;
    append_rows(&path, &rows)?;
    artifacts::write_json(out, "sweep_noise.json", &sweep)?;
    println!(
        "sweep-noise: {} rows, {} inversion(s), fitted exponent {}",
        rows.len(),
        sweep.inversions(),
        sweep.fitted_exponent.map_or("n/a".to_string(), |e| format!("{e:.3}"))
    );
    Ok(())
}
