use super::green::FaddeevGreen;
use super::momentum::{ComplexMomentum, ThetaPoint};
use crate::error::{invalid, Error, Result};
use crate::grid::VolumeGrid;
use crate::linalg::{cnorm, gmres};
use crate::potential::Potential;
use crate::{Vec3, C64};
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

/// Lattice-corrected weight of `1/|x|` at the origin: the trapezoid sum over
/// `hZ^3 \ {0}` plus `C h^2` integrates `1/|x|` to high order.
pub const ORIGIN_WEIGHT: f64 = 2.313_698_70;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_stationary: usize,
    pub restart: usize,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_stationary: 60,
            restart: 30,
            max_iter: 400,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    Trivial,
    Stationary,
    Gmres,
}

/// `mu(x, k)` on the grid, `psi = e^{ikx} mu`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CgoSolution {
    pub mu: Vec<C64>,
    pub k: ComplexMomentum,
    pub residual: f64,
    pub iterations: usize,
    /// Observed ratio of successive stationary-iteration residuals.
    pub contraction: f64,
    pub method: SolveMethod,
}

/// Solver for `mu = 1 + g * (v mu)` with the convolution applied by
/// zero-padded FFTs.
pub struct LippmannSchwinger {
    grid: VolumeGrid,
    values: Vec<f64>,
    support: Vec<usize>,
    opts: SolverOptions,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for LippmannSchwinger {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LippmannSchwinger")
            .field("grid", &self.grid)
            .field("support", &self.support.len())
            .finish()
    }
}

impl LippmannSchwinger {
    pub fn new(v: &Potential, opts: SolverOptions) -> Self {
        let m = 2 * v.grid.n();
        let mut planner = FftPlanner::new();
        Self {
            grid: v.grid,
            values: v.values.clone(),
            support: v.support(),
            opts,
            fwd: planner.plan_fft_forward(m),
            inv: planner.plan_fft_inverse(m),
        }
    }

    pub fn grid(&self) -> &VolumeGrid {
        &self.grid
    }

    fn padded(&self) -> usize {
        2 * self.grid.n()
    }

    fn fft3(&self, data: &mut [C64], inverse: bool) {
        let m = self.padded();
        let plan = if inverse { &self.inv } else { &self.fwd };
        // last axis: contiguous lines
        data.par_chunks_mut(m).for_each(|line| plan.process(line));
        for axis in [1usize, 0] {
            let stride = if axis == 1 { m } else { m * m };
            let outer = m * m * m / (m * stride);
            let mut lines: Vec<Vec<C64>> = Vec::with_capacity(m * m);
            for o in 0..outer {
                for inner in 0..stride {
                    let base = o * m * stride + inner;
                    lines.push((0..m).map(|t| data[base + t * stride]).collect());
                }
            }
            lines.par_iter_mut().for_each(|line| plan.process(line));
            let mut it = lines.into_iter();
            for o in 0..outer {
                for inner in 0..stride {
                    let base = o * m * stride + inner;
                    let line = it.next().expect("line count");
                    for (t, z) in line.into_iter().enumerate() {
                        data[base + t * stride] = z;
                    }
                }
            }
        }
    }

    /// FFT of the quadrature-weighted kernel `g(x - y) h^3` on the padded cube.
    fn kernel_spectrum(&self, k: &ComplexMomentum) -> Vec<C64> {
        let n = self.grid.n();
        let m = self.padded();
        let h = self.grid.spacing();
        let h3 = h * h * h;
        let green = FaddeevGreen::new(*k, 2.0 * 3f64.sqrt() * self.grid.half_width());
        let offset = |i: usize| -> f64 {
            if i < n {
                i as f64 * h
            } else {
                (i as f64 - m as f64) * h
            }
        };
        let mut data: Vec<C64> = (0..m * m * m)
            .into_par_iter()
            .map(|idx| {
                let (i, j, l) = (idx / (m * m), (idx / m) % m, idx % m);
                if i == n || j == n || l == n {
                    return C64::new(0.0, 0.0);
                }
                if idx == 0 {
                    return C64::new(-ORIGIN_WEIGHT * h * h / (4.0 * PI) + green.harmonic_at_origin() * h3, 0.0);
                }
                green.small_g(&Vec3::new(offset(i), offset(j), offset(l))) * h3
            })
            .collect();
        self.fft3(&mut data, false);
        data
    }

    /// `(g * f)(x)` at grid nodes for `f` on grid nodes.
    fn convolve(&self, spectrum: &[C64], f: &[C64]) -> Vec<C64> {
        let n = self.grid.n();
        let m = self.padded();
        let mut data = vec![C64::new(0.0, 0.0); m * m * m];
        for (idx, val) in f.iter().enumerate() {
            if *val != C64::new(0.0, 0.0) {
                let (i, j, l) = self.grid.unravel(idx);
                data[(i * m + j) * m + l] = *val;
            }
        }
        self.fft3(&mut data, false);
        data.par_iter_mut().zip(spectrum).for_each(|(d, s)| *d *= s);
        self.fft3(&mut data, true);
        let norm = 1.0 / (m * m * m) as f64;
        (0..n * n * n)
            .map(|idx| {
                let (i, j, l) = self.grid.unravel(idx);
                data[(i * m + j) * m + l] * norm
            })
            .collect()
    }

    fn scatter_support(&self, mu_s: &[C64]) -> Vec<C64> {
        let mut f = vec![C64::new(0.0, 0.0); self.grid.len()];
        for (&i, z) in self.support.iter().zip(mu_s) {
            f[i] = z * self.values[i];
        }
        f
    }

    pub fn solve(&self, k: &ComplexMomentum) -> Result<CgoSolution> {
        if self.support.is_empty() {
            return Ok(CgoSolution {
                mu: vec![C64::new(1.0, 0.0); self.grid.len()],
                k: *k,
                residual: 0.0,
                iterations: 0,
                contraction: 0.0,
                method: SolveMethod::Trivial,
            });
        }
        let spectrum = self.kernel_spectrum(k);
        let ns = self.support.len();
        let restrict = |full: &[C64]| -> Vec<C64> { self.support.iter().map(|&i| full[i]).collect() };
        let apply_t = |mu_s: &[C64]| -> Vec<C64> { restrict(&self.convolve(&spectrum, &self.scatter_support(mu_s))) };
        let ones = vec![C64::new(1.0, 0.0); ns];
        let bnorm = cnorm(&ones);

        // successive approximations while they contract
        let mut mu = ones.clone();
        let mut prev_res = f64::INFINITY;
        let mut contraction = f64::NAN;
        let mut iterations = 0;
        let mut method = SolveMethod::Stationary;
        let mut residual = f64::INFINITY;
        for it in 0..self.opts.max_stationary {
            let next: Vec<C64> = apply_t(&mu).iter().map(|z| z + 1.0).collect();
            let diff: Vec<C64> = next.iter().zip(&mu).map(|(a, b)| a - b).collect();
            let res = cnorm(&diff) / bnorm;
            if it > 0 {
                contraction = res / prev_res;
            }
            mu = next;
            iterations = it + 1;
            residual = res;
            if res <= self.opts.tol {
                break;
            }
            if it >= 2 && contraction > 0.7 {
                method = SolveMethod::Gmres;
                break;
            }
            prev_res = res;
        }
        if residual > self.opts.tol {
            method = SolveMethod::Gmres;
        }
        if method == SolveMethod::Gmres {
            let apply = |x: &[C64]| -> Vec<C64> {
                let t = apply_t(x);
                x.iter().zip(&t).map(|(a, b)| a - b).collect()
            };
            let (x, rep) = gmres(apply, &ones, &mu, self.opts.tol, self.opts.restart, self.opts.max_iter)
                .map_err(|e| match e {
                    Error::NonConvergence { iterations, residual, .. } => Error::NonConvergence {
                        iterations,
                        residual,
                        contraction,
                    },
                    other => other,
                })?;
            mu = x;
            iterations += rep.iterations;
            residual = rep.residual;
        }
        let mut full = self.convolve(&spectrum, &self.scatter_support(&mu));
        full.iter_mut().for_each(|z| *z += 1.0);
        Ok(CgoSolution {
            mu: full,
            k: *k,
            residual,
            iterations,
            contraction,
            method,
        })
    }

    /// `(2 pi)^-3 \int e^{ipx} v(x) mu(x) dx` by the grid sum.
    pub fn amplitude(&self, sol: &CgoSolution, p: &Vec3) -> C64 {
        let scale = self.grid.cell_volume() / (2.0 * PI).powi(3);
        self.support
            .iter()
            .map(|&i| C64::from_polar(self.values[i], p.dot(&self.grid.node(i))) * sol.mu[i])
            .sum::<C64>()
            * scale
    }

    /// `g * f` for a grid field `f`; exposed for Born-series checks.
    pub fn apply_green(&self, k: &ComplexMomentum, f: &[C64]) -> Vec<C64> {
        self.convolve(&self.kernel_spectrum(k), f)
    }
}

pub fn solve_mu(v: &Potential, k: &ComplexMomentum, tol: f64) -> Result<CgoSolution> {
    LippmannSchwinger::new(v, SolverOptions { tol, ..Default::default() }).solve(k)
}

/// `h(k, l) = (2 pi)^-3 \int e^{-ilx} v(x) psi(x, k) dx`.
pub fn scattering_h(v: &Potential, pt: &ThetaPoint) -> Result<C64> {
    let ls = LippmannSchwinger::new(v, SolverOptions::default());
    let sol = ls.solve(&pt.k)?;
    Ok(ls.amplitude(&sol, &pt.p()))
}

/// Scattering amplitudes of a radial potential.
///
/// For radial `v`, `h(Rk, Rl) = h(k, l)` for rotations `R`, so one solve at
/// `k_0 = s (e_1 + i e_2)` serves every `k` with `|Im k| = s`.
pub struct RadialScattering {
    ls: LippmannSchwinger,
    cache: Mutex<HashMap<u64, Arc<CgoSolution>>>,
}

impl std::fmt::Debug for RadialScattering {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RadialScattering").field("ls", &self.ls).finish()
    }
}

impl RadialScattering {
    pub fn new(v: &Potential, opts: SolverOptions) -> Result<Self> {
        if v.radial_profile.is_none() {
            return Err(Error::NotRadial);
        }
        Ok(Self {
            ls: LippmannSchwinger::new(v, opts),
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn canonical(s: f64) -> ComplexMomentum {
        ComplexMomentum::new_unchecked(Vec3::x() * s, Vec3::y() * s)
    }

    /// The solve at `k_0(s)`, cached on the bit pattern of `s` rounded to 12
    /// significant digits.
    pub fn solution(&self, s: f64) -> Result<Arc<CgoSolution>> {
        if !(s > 0.0) {
            return Err(invalid("|Im k| must be positive"));
        }
        let key = (s * 1e12).round().to_bits();
        if let Some(sol) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(sol.clone());
        }
        let sol = Arc::new(self.ls.solve(&Self::canonical(s))?);
        self.cache.lock().expect("cache lock").insert(key, sol.clone());
        Ok(sol)
    }

    /// `H(k, p) = h(k, k - p)`.
    pub fn eval(&self, k: &ComplexMomentum, p: &Vec3) -> Result<C64> {
        let s = k.im_norm();
        let e1 = k.re / s;
        let e2 = k.im / s;
        let e3 = e1.cross(&e2);
        let rp = Vec3::new(e1.dot(p), e2.dot(p), e3.dot(p));
        let sol = self.solution(s)?;
        Ok(self.ls.amplitude(&sol, &rp))
    }

    pub fn eval_theta(&self, pt: &ThetaPoint) -> Result<C64> {
        self.eval(&pt.k, &pt.p())
    }

    pub fn solver(&self) -> &LippmannSchwinger {
        &self.ls
    }
}
