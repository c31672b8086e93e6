//! Fourier transform with the `(2 pi)^-3` convention, band-limited inversion
//! and reconstruction error reports.

use crate::error::{invalid, Result};
use crate::grid::VolumeGrid;
use crate::norms::weighted_sup_norm;
use crate::potential::{sinc, Potential};
use crate::quadrature::gauss_legendre_on;
use crate::{Vec3, C64};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FrequencyLayout {
    /// Half-cell offset dual grid of a [`VolumeGrid`], full cube ordering.
    DualGrid { n: usize, half_width: f64 },
    /// Samples of an isotropic field at `|p| = t_j` along one direction;
    /// weights already include `4 pi t^2`.
    RadialShells,
    Scattered,
}

/// Complex samples `u(p_j)` with volume quadrature weights for `dp`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyField {
    pub points: Vec<Vec3>,
    pub values: Vec<C64>,
    pub weights: Vec<f64>,
    pub band_radius: Option<f64>,
    pub layout: FrequencyLayout,
}

impl FrequencyField {
    pub fn zeros_like(&self) -> Self {
        Self {
            values: vec![C64::new(0.0, 0.0); self.values.len()],
            ..self.clone()
        }
    }

    pub fn map_values<F: Fn(&Vec3, C64) -> C64>(&self, f: F) -> Self {
        Self {
            values: self.points.iter().zip(&self.values).map(|(p, v)| f(p, *v)).collect(),
            ..self.clone()
        }
    }

    pub fn difference(&self, other: &Self) -> Result<Self> {
        if self.points.len() != other.points.len() {
            return Err(invalid("frequency fields have different layouts"));
        }
        Ok(Self {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
            ..self.clone()
        })
    }

    /// Restricts to the open ball of radius `r` (zeroing values outside).
    pub fn band_limited(&self, r: f64) -> Self {
        Self {
            values: self
                .points
                .iter()
                .zip(&self.values)
                .map(|(p, v)| if p.norm() < r { *v } else { C64::new(0.0, 0.0) })
                .collect(),
            band_radius: Some(r),
            ..self.clone()
        }
    }

    /// `\int |u| dp` over the stored samples.
    pub fn l1(&self) -> f64 {
        self.values.iter().zip(&self.weights).map(|(v, w)| w * v.norm()).sum()
    }
}

pub(crate) enum Sign {
    Plus,
    Minus,
}

/// In-place `X_m = sum_j x_j exp(+-i p_m x_j)` along every axis, where `x_j`
/// are the cell centres of `grid` and `p_m` the offset dual frequencies.
pub(crate) fn dual_transform(grid: &VolumeGrid, data: &mut [C64], sign: Sign) {
    let a = 0.5 - grid.n() as f64 / 2.0;
    shifted_transform(grid.n(), data, sign, a, a);
}

/// `out_o = sum_i in_i e^{+-2 pi i (i + alpha)(o + beta) / n}` along each
/// axis of an `n^3` cube.
pub(crate) fn shifted_transform(n: usize, data: &mut [C64], sign: Sign, alpha: f64, beta: f64) {
    let s = match sign {
        Sign::Plus => 1.0,
        Sign::Minus => -1.0,
    };
    let tw = |t: f64| C64::from_polar(1.0, s * 2.0 * PI * t / n as f64);
    let pre: Vec<C64> = (0..n).map(|i| tw(beta * i as f64)).collect();
    let post: Vec<C64> = (0..n).map(|o| tw(alpha * o as f64 + alpha * beta)).collect();
    let mut planner = FftPlanner::new();
    let fft = match sign {
        Sign::Plus => planner.plan_fft_inverse(n),
        Sign::Minus => planner.plan_fft_forward(n),
    };
    let mut line = vec![C64::new(0.0, 0.0); n];
    for axis in 0..3 {
        let stride = [n * n, n, 1][axis];
        for base in 0..n * n {
            let (hi, lo) = (base / n, base % n);
            let start = match axis {
                0 => hi * n + lo,
                1 => hi * n * n + lo,
                _ => (hi * n + lo) * n,
            };
            for i in 0..n {
                line[i] = data[start + i * stride] * pre[i];
            }
            fft.process(&mut line);
            for o in 0..n {
                data[start + o * stride] = line[o] * post[o];
            }
        }
    }
}

/// Dual frequency `p_m = (m - n/2 + 1/2) * pi / half_width` along one axis.
pub fn dual_frequency(grid: &VolumeGrid, m: usize) -> f64 {
    (m as f64 - grid.n() as f64 / 2.0 + 0.5) * PI / grid.half_width()
}

pub fn dual_points(grid: &VolumeGrid) -> Vec<Vec3> {
    (0..grid.len())
        .map(|idx| {
            let (i, j, k) = grid.unravel(idx);
            Vec3::new(dual_frequency(grid, i), dual_frequency(grid, j), dual_frequency(grid, k))
        })
        .collect()
}

/// Discrete `v_hat(p) = (2 pi)^-3 \int e^{ipx} v(x) dx` on the dual grid.
pub fn fourier_direct(v: &Potential) -> FrequencyField {
    let grid = v.grid;
    let mut data: Vec<C64> = v.values.iter().map(|x| C64::new(*x, 0.0)).collect();
    dual_transform(&grid, &mut data, Sign::Plus);
    let scale = grid.cell_volume() / (2.0 * PI).powi(3);
    data.iter_mut().for_each(|z| *z *= scale);
    let dp = (PI / grid.half_width()).powi(3);
    FrequencyField {
        points: dual_points(&grid),
        values: data,
        weights: vec![dp; grid.len()],
        band_radius: None,
        layout: FrequencyLayout::DualGrid {
            n: grid.n(),
            half_width: grid.half_width(),
        },
    }
}

/// Grid-sum transform at an arbitrary frequency.
pub fn fourier_at(v: &Potential, p: &Vec3) -> C64 {
    let scale = v.grid.cell_volume() / (2.0 * PI).powi(3);
    v.values
        .iter()
        .enumerate()
        .filter(|(_, x)| **x != 0.0)
        .map(|(i, x)| C64::from_polar(*x, p.dot(&v.grid.node(i))))
        .sum::<C64>()
        * scale
}

/// Isotropic field sampled at Gauss-Legendre radii on `(0, band)`.
pub fn radial_shells(band: f64, n: usize, direction: Vec3, f: impl Fn(f64) -> C64) -> FrequencyField {
    let (t, w) = gauss_legendre_on(n, 0.0, band);
    let d = direction.normalize();
    FrequencyField {
        points: t.iter().map(|t| d * *t).collect(),
        values: t.iter().map(|t| f(*t)).collect(),
        weights: t.iter().zip(&w).map(|(t, w)| 4.0 * PI * t * t * w).collect(),
        band_radius: Some(band),
        layout: FrequencyLayout::RadialShells,
    }
}

/// `v(x) = \int_{|p| < band} e^{-ipx} v_hat(p) dp` at every node of `grid`
/// (real part).
pub fn invert_bandlimited(vhat: &FrequencyField, grid: &VolumeGrid) -> Result<Vec<f64>> {
    let band = vhat
        .band_radius
        .ok_or_else(|| invalid("band-limited inversion needs a band radius"))?;
    match vhat.layout {
        FrequencyLayout::DualGrid { n, half_width } => {
            if n != grid.n() || half_width != grid.half_width() {
                return Err(invalid("dual grid does not match the target grid"));
            }
            let mut data: Vec<C64> = vhat
                .points
                .iter()
                .zip(&vhat.values)
                .zip(&vhat.weights)
                .map(|((p, v), w)| if p.norm() < band { v * w } else { C64::new(0.0, 0.0) })
                .collect();
            dual_transform(grid, &mut data, Sign::Minus);
            Ok(data.iter().map(|z| z.re).collect())
        }
        FrequencyLayout::RadialShells => Ok(grid
            .nodes()
            .map(|x| {
                let r = x.norm();
                vhat.points
                    .iter()
                    .zip(&vhat.values)
                    .zip(&vhat.weights)
                    .filter(|((p, _), _)| p.norm() < band)
                    .map(|((p, v), w)| w * sinc(p.norm() * r) * v.re)
                    .sum()
            })
            .collect()),
        FrequencyLayout::Scattered => Ok(grid
            .nodes()
            .map(|x| {
                vhat.points
                    .iter()
                    .zip(&vhat.values)
                    .zip(&vhat.weights)
                    .filter(|((p, _), _)| p.norm() < band)
                    .map(|((p, v), w)| (C64::from_polar(*w, -p.dot(&x)) * v).re)
                    .sum()
            })
            .collect()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconParams {
    pub rho: f64,
    pub tau: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconReport {
    pub linf_error: f64,
    /// `\int_{|p| < band} |v_hat_true - v_hat_rec| dp`.
    pub i1: f64,
    /// Tail bound `4 pi C \int_band^inf t^2 (1+t)^-m dt` with `C` fitted from
    /// the sampled true transform; a bound, not a measured quantity.
    pub i2_bound: f64,
    pub rho: f64,
    pub tau: f64,
    pub delta: f64,
}

/// Sup error over grid nodes inside the unit ball and the band/tail split.
pub fn error_report(
    v_true: &Potential,
    v_rec: &[f64],
    vhat_true: &FrequencyField,
    vhat_rec: &FrequencyField,
    params: ReconParams,
) -> Result<ReconReport> {
    if v_rec.len() != v_true.values.len() {
        return Err(invalid("reconstruction is not on the potential's grid"));
    }
    let linf_error = v_true
        .values
        .iter()
        .zip(v_rec)
        .enumerate()
        .filter(|(i, _)| v_true.grid.node(*i).norm() < 1.0)
        .map(|(_, (a, b))| (a - b).abs())
        .fold(0.0, f64::max);
    let band = vhat_rec.band_radius.unwrap_or(f64::INFINITY);
    let i1 = vhat_true.band_limited(band).difference(&vhat_rec.band_limited(band))?.l1();
    let m = v_true.smoothness.min(64) as f64;
    let i2_bound = if band.is_finite() && m > 3.0 {
        let c = weighted_sup_norm(vhat_true, m);
        // substitute t = band / u on (0, 1]
        let (u, w) = gauss_legendre_on(200, 0.0, 1.0);
        let tail: f64 = u
            .iter()
            .zip(&w)
            .map(|(u, w)| {
                let t = band / u;
                w * t * t * (1.0 + t).powf(-m) * band / (u * u)
            })
            .sum();
        4.0 * PI * c * tail
    } else {
        f64::INFINITY
    };
    Ok(ReconReport {
        linf_error,
        i1,
        i2_bound,
        rho: params.rho,
        tau: params.tau,
        delta: params.delta,
    })
}
