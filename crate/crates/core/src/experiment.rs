//! End-to-end runs: DtN data, ring slice, d-bar solve, inversion and error
//! measurement, plus the two parameter sweeps.

use crate::boundary::{h_on_slice, BoundaryScattering, ScatteringSlice};
use crate::coords::{canonical_lambda, theta_point, LambdaGrid, LambdaGridSpec, LambdaPoint, PSampling};
use crate::dbar::{run_dbar, DbarOptions, DbarOutcome};
use crate::error::invalid;
use crate::forward::{dtn_general, dtn_radial_profile, dtn_zero, perturb, DtNMap, NoiseKind, NoiseModel};
use crate::fourier::{error_report, invert_bandlimited, FrequencyField, ReconParams, ReconReport};
use crate::grid::VolumeGrid;
use crate::potential::{Potential, RadialProfile};
use crate::quadrature::lagrange_weights;
use crate::{Result, C64};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ForwardRoute {
    /// Radial ODE per degree (radial profiles only).
    Radial,
    /// Finite differences on a cube.
    Fd,
}

impl std::str::FromStr for ForwardRoute {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "radial" => Ok(Self::Radial),
            "fd" => Ok(Self::Fd),
            other => Err(invalid(format!("unknown forward route {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSweepConfig {
    pub deltas: Vec<f64>,
    pub seed: u64,
    pub kind: NoiseKind,
    /// `rho = beta ln(3 + 1/delta)`.
    pub beta: f64,
    pub rho_cap: f64,
}

impl Default for NoiseSweepConfig {
    fn default() -> Self {
        Self {
            deltas: vec![1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8],
            seed: 7,
            kind: NoiseKind::RankStructured,
            beta: 0.25,
            rho_cap: 6.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub profile: RadialProfile,
    pub smoothness: u32,
    pub forward: ForwardRoute,
    /// Harmonic truncation; chosen from `rho` when absent.
    pub max_degree: Option<usize>,
    pub fd_resolution: usize,
    pub tau: f64,
    pub nu: [f64; 3],
    pub n_p: usize,
    pub n_radial: usize,
    pub n_angular: usize,
    pub level_stretch: f64,
    pub dbar: DbarOptions,
    /// Weight exponent of the frequency-side norms.
    pub mu: f64,
    pub recon_n: usize,
    pub recon_half_width: f64,
    /// `|p|` values where the decay in `rho` is measured.
    pub probe_p: Vec<f64>,
    pub rhos: Vec<f64>,
    pub noise: NoiseSweepConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            profile: RadialProfile::REFERENCE,
            smoothness: 8,
            forward: ForwardRoute::Radial,
            max_degree: None,
            fd_resolution: 24,
            tau: 0.5,
            nu: [0.0, 0.0, 1.0],
            n_p: 24,
            n_radial: 24,
            n_angular: 16,
            level_stretch: 40.0,
            dbar: DbarOptions::default(),
            mu: 2.0,
            recon_n: 24,
            recon_half_width: 1.05,
            probe_p: vec![0.25, 0.5, 0.75, 1.0, 1.25, 1.5],
            rhos: vec![3.0, 4.5, 6.0, 9.0],
            noise: NoiseSweepConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau <= 0.5) {
            return Err(invalid("tau must lie in (0, 1/2]"));
        }
        if self.rhos.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("rho list must be increasing"));
        }
        if self.forward == ForwardRoute::Fd && self.fd_resolution < 8 {
            return Err(invalid("fd resolution must be at least 8"));
        }
        Ok(())
    }

    /// Harmonic degree resolving `e^{i k x}` on the sphere at `|Im k| = rho`.
    pub fn degree_for(&self, rho: f64) -> usize {
        self.max_degree.unwrap_or_else(|| match self.forward {
            ForwardRoute::Radial => (3.5 * rho + 8.0).ceil() as usize,
            ForwardRoute::Fd => ((3.5 * rho + 8.0).ceil() as usize).min(14),
        })
    }

    pub fn lambda_grid(&self, rho: f64) -> Result<LambdaGrid> {
        let spec = LambdaGridSpec {
            rho,
            tau: self.tau,
            nu: self.nu,
            sampling: PSampling::Shells { n: self.n_p },
            n_radial: self.n_radial,
            n_angular: self.n_angular,
            level_stretch: self.level_stretch,
        };
        LambdaGrid::build(&spec)
    }

    pub fn recon_grid(&self) -> Result<VolumeGrid> {
        VolumeGrid::new(self.recon_n, self.recon_half_width)
    }

    pub fn potential(&self) -> Result<Potential> {
        Potential::from_profile(self.recon_grid()?, self.profile, self.smoothness)
    }
}

/// `Phi_v` and `Phi_0` at degree `max_degree`.
pub fn forward_maps(cfg: &ExperimentConfig, max_degree: usize) -> Result<(DtNMap, DtNMap)> {
    let phi_v = match cfg.forward {
        ForwardRoute::Radial => dtn_radial_profile(&cfg.profile, max_degree)?,
        ForwardRoute::Fd => dtn_general(&cfg.potential()?, max_degree, cfg.fd_resolution)?,
    };
    Ok((phi_v, dtn_zero(max_degree)))
}

/// Max over the probes of `(1 + |p|)^mu |a(p) - b(p)|`.
fn probe_error(probes: &[f64], a: &[C64], b: &[C64], mu: f64) -> f64 {
    probes
        .iter()
        .zip(a.iter().zip(b))
        .map(|(t, (x, y))| (1.0 + t).powf(mu) * (x - y).norm())
        .fold(0.0, f64::max)
}

/// Cubic Lagrange interpolation in `|p|` of a shell-sampled field.
pub fn interpolate_shells(f: &FrequencyField, t: f64) -> C64 {
    let radii: Vec<f64> = f.points.iter().map(|p| p.norm()).collect();
    let n = radii.len();
    let m = n.min(4);
    let pos = radii.partition_point(|r| *r < t);
    let start = pos.saturating_sub(m / 2).min(n - m);
    let w = lagrange_weights(&radii[start..start + m], t);
    w.iter().enumerate().map(|(i, w)| f.values[start + i] * *w).sum()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeErrors {
    pub p: Vec<f64>,
    pub exact: Vec<C64>,
    pub naive: Vec<C64>,
    pub effective: Vec<C64>,
    pub naive_error: f64,
    pub effective_error: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineOutcome {
    pub rho: f64,
    pub max_degree: usize,
    pub slice: ScatteringSlice,
    pub dbar: DbarOutcome,
    pub vhat_true: FrequencyField,
    pub probes: ProbeErrors,
    pub v_rec: Vec<f64>,
    pub v_rec_naive: Vec<f64>,
    pub recon: ReconReport,
    pub recon_naive: ReconReport,
}

/// Ring slice of `H` at level `rho` from the DtN maps.
pub fn scatter(cfg: &ExperimentConfig, phi_v: &DtNMap, phi_0: &DtNMap, rho: f64) -> Result<ScatteringSlice> {
    h_on_slice(phi_v, phi_0, &cfg.lambda_grid(rho)?)
}

/// Full chain at one `rho`, from given DtN maps.
pub fn run_with_maps(cfg: &ExperimentConfig, phi_v: &DtNMap, phi_0: &DtNMap, rho: f64, delta: f64) -> Result<PipelineOutcome> {
    let slice = scatter(cfg, phi_v, phi_0, rho)?;
    let dbar = run_dbar(&slice, &cfg.dbar, cfg.mu)?;
    let grid = &slice.grid;
    let vhat_true = FrequencyField {
        values: grid.p_nodes.iter().map(|p| C64::new(cfg.profile.fourier(p.norm()), 0.0)).collect(),
        ..dbar.plus.clone()
    };

    let probes_in_band: Vec<f64> = cfg.probe_p.iter().copied().filter(|t| *t < grid.band()).collect();
    let bs = BoundaryScattering::new(phi_v, phi_0)?;
    let dir = grid.frame.transverse();
    let exact: Vec<C64> = probes_in_band.iter().map(|t| C64::new(cfg.profile.fourier(*t), 0.0)).collect();
    let naive = probes_in_band
        .iter()
        .map(|t| {
            let p = dir * *t;
            let lp = LambdaPoint {
                lambda: canonical_lambda(rho, &p),
                p,
            };
            bs.eval_theta(&theta_point(&lp, &grid.frame)?)
        })
        .collect::<Result<Vec<C64>>>()?;
    let effective: Vec<C64> = probes_in_band.iter().map(|t| interpolate_shells(&dbar.plus, *t)).collect();
    let probes = ProbeErrors {
        naive_error: probe_error(&probes_in_band, &naive, &exact, cfg.mu),
        effective_error: probe_error(&probes_in_band, &effective, &exact, cfg.mu),
        p: probes_in_band,
        exact,
        naive,
        effective,
    };

    let v_true = cfg.potential()?;
    let params = ReconParams { rho, tau: cfg.tau, delta };
    let v_rec = invert_bandlimited(&dbar.plus, &v_true.grid)?;
    let recon = error_report(&v_true, &v_rec, &vhat_true, &dbar.plus, params)?;
    let v_rec_naive = invert_bandlimited(&dbar.naive, &v_true.grid)?;
    let recon_naive = error_report(&v_true, &v_rec_naive, &vhat_true, &dbar.naive, params)?;
    Ok(PipelineOutcome {
        rho,
        max_degree: phi_v.max_degree,
        slice,
        dbar,
        vhat_true,
        probes,
        v_rec,
        v_rec_naive,
        recon,
        recon_naive,
    })
}

pub fn run_pipeline(cfg: &ExperimentConfig, rho: f64) -> Result<PipelineOutcome> {
    cfg.validate()?;
    let (phi_v, phi_0) = forward_maps(cfg, cfg.degree_for(rho))?;
    run_with_maps(cfg, &phi_v, &phi_0, rho, 0.0)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Fraction of masked ring nodes above which a row is flagged.
pub const MASK_FLAG: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoRow {
    pub rho: f64,
    pub max_degree: usize,
    pub naive_error: f64,
    pub effective_error: f64,
    pub linf_naive: f64,
    pub linf_effective: f64,
    pub iterations: usize,
    pub contraction: f64,
    pub converged: bool,
    pub extraction_spread: f64,
    pub masked_fraction: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoSweep {
    pub rows: Vec<RhoRow>,
    pub naive_slope: Option<f64>,
    pub effective_slope: Option<f64>,
}

pub fn sweep_rho(cfg: &ExperimentConfig) -> Result<RhoSweep> {
    cfg.validate()?;
    if cfg.rhos.len() < 4 {
        return Err(invalid("a rho sweep needs at least four values"));
    }
    let mut rows = Vec::new();
    for &rho in &cfg.rhos {
        let out = run_pipeline(cfg, rho)?;
        let masked_fraction = out.slice.masked_fraction();
        rows.push(RhoRow {
            rho,
            max_degree: out.max_degree,
            naive_error: out.probes.naive_error,
            effective_error: out.probes.effective_error,
            linf_naive: out.recon_naive.linf_error,
            linf_effective: out.recon.linf_error,
            iterations: out.dbar.report.iterations,
            contraction: out.dbar.report.contraction_estimate,
            converged: out.dbar.report.converged,
            extraction_spread: out.dbar.report.extraction_spread,
            masked_fraction,
            flagged: masked_fraction > MASK_FLAG,
        });
    }
    let x: Vec<f64> = rows.iter().map(|r| r.rho).collect();
    let naive: Vec<f64> = rows.iter().map(|r| r.naive_error).collect();
    let eff: Vec<f64> = rows.iter().map(|r| r.effective_error).collect();
    Ok(RhoSweep {
        naive_slope: loglog_slope(&x, &naive),
        effective_slope: loglog_slope(&x, &eff),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseRow {
    pub delta: f64,
    /// `ln(3 + 1/delta)`; infinite for exact data.
    pub log_term: f64,
    pub rho: f64,
    pub capped: bool,
    pub max_degree: usize,
    pub linf_error: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSweep {
    pub rows: Vec<NoiseRow>,
    /// Slope of `ln error` against `ln ln(3 + 1/delta)` over the noisy rows.
    pub fitted_exponent: Option<f64>,
}

impl NoiseSweep {
    /// Number of increases of the error along increasing `ln(3 + 1/delta)`.
    pub fn inversions(&self) -> usize {
        let mut rows: Vec<&NoiseRow> = self.rows.iter().filter(|r| r.delta > 0.0).collect();
        rows.sort_by(|a, b| a.log_term.total_cmp(&b.log_term));
        rows.windows(2).filter(|w| w[1].linf_error > w[0].linf_error).count()
    }
}

/// `rho(delta) = beta ln(3 + 1/delta)`, capped; exact data sit at the cap.
pub fn rho_schedule(delta: f64, beta: f64, cap: f64) -> (f64, bool) {
    if delta <= 0.0 {
        return (cap, true);
    }
    let rho = beta * (3.0 + 1.0 / delta).ln();
    if rho >= cap {
        (cap, true)
    } else {
        (rho, false)
    }
}

pub fn sweep_noise(cfg: &ExperimentConfig) -> Result<NoiseSweep> {
    cfg.validate()?;
    let nc = &cfg.noise;
    let positive: Vec<f64> = nc.deltas.iter().copied().filter(|d| *d > 0.0).collect();
    let (lo, hi) = positive
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), d| (lo.min(*d), hi.max(*d)));
    if positive.is_empty() || (hi / lo).log10() < 3.0 - 1e-9 {
        return Err(invalid("noise levels must span at least three decades"));
    }
    let mut rows = Vec::new();
    for &delta in &nc.deltas {
        let (rho, capped) = rho_schedule(delta, nc.beta, nc.rho_cap);
        let degree = cfg.degree_for(rho);
        let (phi_v, phi_0) = forward_maps(cfg, degree)?;
        let noisy = perturb(
            &phi_v,
            &NoiseModel {
                kind: nc.kind,
                delta,
                seed: nc.seed,
            },
        )?;
        let out = run_with_maps(cfg, &noisy, &phi_0, rho, delta)?;
        rows.push(NoiseRow {
            delta,
            log_term: if delta > 0.0 { (3.0 + 1.0 / delta).ln() } else { f64::INFINITY },
            rho,
            capped,
            max_degree: degree,
            linf_error: out.recon.linf_error,
            converged: out.dbar.report.converged,
        });
    }
    let noisy: Vec<&NoiseRow> = rows.iter().filter(|r| r.delta > 0.0).collect();
    let x: Vec<f64> = noisy.iter().map(|r| r.log_term).collect();
    let y: Vec<f64> = noisy.iter().map(|r| r.linf_error).collect();
    Ok(NoiseSweep {
        fitted_exponent: loglog_slope(&x, &y),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|x: &f64| 3.0 * x.powf(-1.7)).collect();
        assert!((loglog_slope(&x, &y).unwrap() + 1.7).abs() < 1e-12);
    }

    #[test]
    fn schedule_caps() {
        assert_eq!(rho_schedule(0.0, 0.25, 6.0), (6.0, true));
        let (r, c) = rho_schedule(1e-4, 0.25, 6.0);
        assert!(!c && (r - 0.25 * (3.0f64 + 1e4).ln()).abs() < 1e-14);
        assert!(rho_schedule(1e-30, 0.25, 6.0).1);
    }

    #[test]
    fn route_parsing() {
        assert_eq!("fd".parse::<ForwardRoute>().unwrap(), ForwardRoute::Fd);
        assert!("spectral".parse::<ForwardRoute>().is_err());
    }

    #[test]
    fn config_rejects_wide_tau() {
        let cfg = ExperimentConfig {
            tau: 0.7,
            ..ExperimentConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
