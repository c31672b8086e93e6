//! Dirichlet-to-Neumann maps on the unit sphere in the real harmonic basis.

use crate::error::{invalid, Error, Result};
use crate::grid::VolumeGrid;
use crate::harmonics::{self, degree_of};
use crate::linalg::conjugate_gradient;
use crate::potential::{Potential, RadialProfile};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Matrix of the DtN map acting on coefficients of `Y_lm`, `l <= max_degree`.
#[derive(Debug, Clone, PartialEq)]
pub struct DtNMap {
    pub max_degree: usize,
    pub matrix: DMatrix<f64>,
}

impl DtNMap {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `self - other`, checking the truncations agree.
    pub fn difference(&self, other: &DtNMap) -> Result<DMatrix<f64>> {
        if self.max_degree != other.max_degree {
            return Err(invalid(format!(
                "DtN maps truncated at different degrees ({} vs {})",
                self.max_degree, other.max_degree
            )));
        }
        Ok(&self.matrix - &other.matrix)
    }

    pub fn symmetry_defect(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).abs().max()
    }
}

pub fn dtn_zero(max_degree: usize) -> DtNMap {
    let n = harmonics::count(max_degree);
    DtNMap {
        max_degree,
        matrix: DMatrix::from_fn(n, n, |i, j| if i == j { degree_of(i) as f64 } else { 0.0 }),
    }
}

fn diagonal_map(max_degree: usize, entries: &[f64]) -> DtNMap {
    let n = harmonics::count(max_degree);
    DtNMap {
        max_degree,
        matrix: DMatrix::from_fn(n, n, |i, j| if i == j { entries[degree_of(i)] } else { 0.0 }),
    }
}

/// Exact DtN map of a radial potential from the degree-wise ODEs.
pub fn dtn_radial(v: &Potential, max_degree: usize) -> Result<DtNMap> {
    let profile = v.radial_profile.ok_or(Error::NotRadial)?;
    dtn_radial_profile(&profile, max_degree)
}

pub fn dtn_radial_profile(profile: &RadialProfile, max_degree: usize) -> Result<DtNMap> {
    let entries = (0..=max_degree)
        .map(|l| radial_dtn_entry(profile, l))
        .collect::<Result<Vec<_>>>()?;
    Ok(diagonal_map(max_degree, &entries))
}

/// `f_l'(1) / f_l(1)` for `f_l = r^l y_l`, where
/// `y'' + 2(l+1)/r y' = v y`, `y(0) = 1`.
pub fn radial_dtn_entry(profile: &RadialProfile, l: usize) -> Result<f64> {
    let vr = |r: f64| profile.eval(r.min(1.0 - 1e-13));
    let a = 2.0 * (l as f64 + 1.0);
    let r0 = 1e-4;
    let v0 = vr(0.0);
    let mut y = [1.0 + v0 * r0 * r0 / (2.0 * (2.0 * l as f64 + 3.0)), v0 * r0 / (2.0 * l as f64 + 3.0)];
    let rhs = |r: f64, y: &[f64; 2]| -> [f64; 2] { [y[1], vr(r) * y[0] - a / r * y[1]] };
    let y_peak = integrate_dopri5(rhs, r0, 1.0, &mut y, 1e-12)?;
    if y[0].abs() < 1e-10 * y_peak {
        return Err(invalid(format!(
            "degree {l}: solution nearly vanishes on the boundary (0 is close to a Dirichlet eigenvalue)"
        )));
    }
    Ok(l as f64 + y[1] / y[0])
}

/// Adaptive Dormand-Prince 5(4) integration of a 2-component system; returns
/// the largest `|y_0|` seen.
fn integrate_dopri5<F>(f: F, t0: f64, t1: f64, y: &mut [f64; 2], tol: f64) -> Result<f64>
where
    F: Fn(f64, &[f64; 2]) -> [f64; 2],
{
    const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let mut t = t0;
    let mut h = 1e-3;
    let mut peak = y[0].abs();
    let mut steps = 0usize;
    while t < t1 {
        if steps > 1_000_000 {
            return Err(Error::NonConvergence {
                iterations: steps,
                residual: f64::NAN,
                contraction: f64::NAN,
            });
        }
        steps += 1;
        if t + h > t1 {
            h = t1 - t;
        }
        let mut k = [[0.0; 2]; 7];
        for s in 0..7 {
            let mut ys = *y;
            for (j, kj) in k.iter().enumerate().take(s) {
                ys[0] += h * A[s][j] * kj[0];
                ys[1] += h * A[s][j] * kj[1];
            }
            k[s] = f(t + C[s] * h, &ys);
        }
        let mut y5 = *y;
        let mut err = 0.0f64;
        for c in 0..2 {
            let mut e = 0.0;
            for s in 0..7 {
                y5[c] += h * B5[s] * k[s][c];
                e += h * (B5[s] - B4[s]) * k[s][c];
            }
            let scale = tol * (1.0 + y[c].abs().max(y5[c].abs()));
            err = err.max(e.abs() / scale);
        }
        if err <= 1.0 {
            t += h;
            *y = y5;
            peak = peak.max(y[0].abs());
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    Ok(peak)
}

/// DtN map of a general potential by finite differences on a Cartesian grid.
///
/// For each harmonic `U_j = r^l Y_j` the correction `w_j` solves
/// `(-Delta_h + v) w_j = -v U_j` on the nodes inside the ball with `w_j = 0`
/// outside, and Green's identity gives
/// `Phi_ij = l delta_ij + \int_D v U_i (U_j + w_j) dx`.
pub fn dtn_general(v: &Potential, max_degree: usize, resolution: usize) -> Result<DtNMap> {
    let n = resolution + resolution % 2;
    let grid = VolumeGrid::new(n.max(8), 1.0 + 1.0 / n as f64)?;
    let h = grid.spacing();
    let interior: Vec<usize> = (0..grid.len()).filter(|&i| grid.node(i).norm() < 1.0).collect();
    let mut slot = vec![usize::MAX; grid.len()];
    for (s, &i) in interior.iter().enumerate() {
        slot[i] = s;
    }
    let vv: Vec<f64> = interior.iter().map(|&i| sample_potential(v, &grid.node(i))).collect();
    let neighbours: Vec<[usize; 6]> = interior
        .iter()
        .map(|&idx| {
            let (i, j, k) = grid.unravel(idx);
            let mut nb = [usize::MAX; 6];
            let cand = [
                (i.wrapping_sub(1), j, k),
                (i + 1, j, k),
                (i, j.wrapping_sub(1), k),
                (i, j + 1, k),
                (i, j, k.wrapping_sub(1)),
                (i, j, k + 1),
            ];
            for (c, &(a, b, d)) in cand.iter().enumerate() {
                if a < n && b < n && d < n {
                    nb[c] = slot[grid.index(a, b, d)];
                }
            }
            nb
        })
        .collect();
    let ih2 = 1.0 / (h * h);
    let apply = |x: &[f64]| -> Vec<f64> {
        (0..x.len())
            .map(|s| {
                let nb_sum: f64 = neighbours[s].iter().filter(|&&t| t != usize::MAX).map(|&t| x[t]).sum();
                (6.0 * x[s] - nb_sum) * ih2 + vv[s] * x[s]
            })
            .collect()
    };
    let nh = harmonics::count(max_degree);
    // U_j at interior nodes
    let u: Vec<Vec<f64>> = interior
        .iter()
        .map(|&i| {
            let x = grid.node(i);
            let r = x.norm();
            let y = harmonics::eval_direction(max_degree, &x);
            y.iter().enumerate().map(|(a, y)| y * r.powi(degree_of(a) as i32)).collect()
        })
        .collect();
    let support: Vec<usize> = (0..interior.len()).filter(|&s| vv[s] != 0.0).collect();
    let columns: Vec<Vec<f64>> = (0..nh)
        .into_par_iter()
        .map(|j| -> Result<Vec<f64>> {
            let b: Vec<f64> = (0..interior.len()).map(|s| -vv[s] * u[s][j]).collect();
            let (w, _) = conjugate_gradient(&apply, &b, 1e-10, 20 * n * n)?;
            let dv = grid.cell_volume();
            Ok((0..nh)
                .map(|i| support.iter().map(|&s| vv[s] * u[s][i] * (u[s][j] + w[s])).sum::<f64>() * dv)
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let matrix = DMatrix::from_fn(nh, nh, |i, j| {
        let base = if i == j { degree_of(i) as f64 } else { 0.0 };
        base + columns[j][i]
    });
    Ok(DtNMap { max_degree, matrix })
}

fn sample_potential(v: &Potential, x: &crate::Vec3) -> f64 {
    if let Some(p) = v.radial_profile {
        return p.eval(x.norm());
    }
    // trilinear interpolation of the grid samples
    let g = &v.grid;
    let h = g.spacing();
    let n = g.n();
    let pos = |c: f64| (c + g.half_width()) / h - 0.5;
    let (fx, fy, fz) = (pos(x.x), pos(x.y), pos(x.z));
    let (i0, j0, k0) = (fx.floor(), fy.floor(), fz.floor());
    let mut acc = 0.0;
    for (di, wi) in [(0.0, 1.0 - (fx - i0)), (1.0, fx - i0)] {
        for (dj, wj) in [(0.0, 1.0 - (fy - j0)), (1.0, fy - j0)] {
            for (dk, wk) in [(0.0, 1.0 - (fz - k0)), (1.0, fz - k0)] {
                let (a, b, c) = (i0 + di, j0 + dj, k0 + dk);
                if a >= 0.0 && b >= 0.0 && c >= 0.0 && (a as usize) < n && (b as usize) < n && (c as usize) < n {
                    acc += wi * wj * wk * v.values[g.index(a as usize, b as usize, c as usize)];
                }
            }
        }
    }
    acc
}

/// Largest singular value.
pub fn opnorm(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    /// Symmetrised i.i.d. Gaussian entries.
    GaussianEntrywise,
    /// One Gaussian value per degree, repeated over the `2l+1` orders; the
    /// perturbation commutes with rotations.
    RankStructured,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub delta: f64,
    pub seed: u64,
}

/// Symmetric perturbation with operator norm `delta`.
pub fn noise_matrix(max_degree: usize, noise: &NoiseModel) -> DMatrix<f64> {
    let n = harmonics::count(max_degree);
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let e = match noise.kind {
        NoiseKind::GaussianEntrywise => {
            let g = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
            (&g + g.transpose()) * 0.5
        }
        NoiseKind::RankStructured => {
            let per_degree: Vec<f64> = (0..=max_degree).map(|_| StandardNormal.sample(&mut rng)).collect();
            DMatrix::from_fn(n, n, |i, j| if i == j { per_degree[degree_of(i)] } else { 0.0 })
        }
    };
    let norm = opnorm(&e);
    if norm == 0.0 || noise.delta == 0.0 {
        return DMatrix::zeros(n, n);
    }
    e * (noise.delta / norm)
}

pub fn perturb(phi: &DtNMap, noise: &NoiseModel) -> Result<DtNMap> {
    if !(noise.delta >= 0.0) {
        return Err(invalid("noise level must be non-negative"));
    }
    if noise.delta == 0.0 {
        return Ok(phi.clone());
    }
    Ok(DtNMap {
        max_degree: phi.max_degree,
        matrix: &phi.matrix + noise_matrix(phi.max_degree, noise),
    })
}
