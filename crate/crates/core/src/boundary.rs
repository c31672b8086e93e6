//! Scattering amplitudes from boundary measurements.
//!
//! Everything is expressed in spherical-harmonic coefficients on the unit
//! sphere. With `D = Phi_v - Phi_0`, the boundary values of `psi(., k)`
//! satisfy `c = E(ik) + S_k D c`, where `E(zeta)` are the coefficients of
//! `e^{zeta x}` and `S_k` is the single layer of the Faddeev Green's function,
//! and then `h(k, l) = (2 pi)^-3 E(-il)^T D c`.
//!
//! `S_k` splits into `-1/(4 pi |x|)`, diagonal with entries `-1/(2l+1)`, and a
//! harmonic part written as a superposition of null plane waves
//! `(s / 8 pi^2) \int_0^1 dr \int_0^{2pi} dphi e^{zeta . (x - z)}`,
//! `zeta = r s (i u(phi) - b)`, whose projections are exact.

use crate::coords::{Branch, LambdaGrid, LambdaPoint};
use crate::error::{invalid, Error, Result};
use crate::faddeev::{ComplexMomentum, ThetaPoint};
use crate::forward::DtNMap;
use crate::harmonics::{degree_of, HarmonicBasis};
use crate::{Vec3, C64};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

/// Condition estimates above this are reported as failures.
pub const CONDITION_LIMIT: f64 = 1e13;

/// `S_k D` in harmonic coefficients.
#[derive(Debug, Clone)]
pub struct BoundaryKernel {
    pub matrix: DMatrix<C64>,
    pub k: ComplexMomentum,
    difference: DMatrix<C64>,
}

#[derive(Debug, Clone)]
pub struct BoundaryPsi {
    /// Harmonic coefficients of `psi(., k)` on the sphere.
    pub coeffs: Vec<C64>,
    pub residual: f64,
    pub condition: f64,
}

impl BoundaryPsi {
    /// `psi` at the quadrature nodes of `basis`.
    pub fn on_nodes(&self, basis: &HarmonicBasis) -> Vec<C64> {
        let q = basis.quadrature();
        (0..q.len())
            .map(|j| {
                let y = crate::harmonics::eval_all(basis.max_degree(), q.cos_theta[j], q.azimuth[j]);
                y.iter().zip(&self.coeffs).map(|(y, c)| c * y).sum()
            })
            .collect()
    }
}

fn null_components(re: &Vec3, im: &Vec3) -> [C64; 3] {
    [C64::new(re.x, im.x), C64::new(re.y, im.y), C64::new(re.z, im.z)]
}

/// Coefficients of `e^{ikx}`.
pub fn incident_coefficients(basis: &HarmonicBasis, k: &ComplexMomentum) -> Vec<C64> {
    // i k = -Im k + i Re k
    basis.plane_wave_coefficients(&null_components(&-k.im, &k.re))
}

/// Coefficients of `e^{-ilx}`.
pub fn outgoing_coefficients(basis: &HarmonicBasis, l: &ComplexMomentum) -> Vec<C64> {
    basis.plane_wave_coefficients(&null_components(&l.im, &-l.re))
}

/// Coefficients of the single layer `f -> \int G(x - z, k) f(z) dz`.
pub fn single_layer(basis: &HarmonicBasis, k: &ComplexMomentum) -> DMatrix<C64> {
    let nh = basis.len();
    let lmax = basis.max_degree();
    let s = k.im_norm();
    let b = k.im / s;
    let trial = if b.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let u1 = (trial - b * b.dot(&trial)).normalize();
    let u2 = b.cross(&u1);
    let n_phi = 2 * lmax + 2;
    let mut acc = DMatrix::<C64>::zeros(nh, nh);
    for j in 0..n_phi {
        let phi = 2.0 * PI * j as f64 / n_phi as f64;
        let u = u1 * phi.cos() + u2 * phi.sin();
        let e = basis.plane_wave_coefficients(&null_components(&(-b * s), &(u * s)));
        for c in 0..nh {
            let sign = if degree_of(c) % 2 == 0 { 1.0 } else { -1.0 };
            let ec = e[c] * sign;
            for a in 0..nh {
                acc[(a, c)] += e[a] * ec;
            }
        }
    }
    let pref = s / (8.0 * PI * PI) * (2.0 * PI / n_phi as f64);
    DMatrix::from_fn(nh, nh, |a, c| {
        let la = degree_of(a);
        let lc = degree_of(c);
        let mut v = acc[(a, c)] * (pref / (la + lc + 1) as f64);
        if a == c {
            v -= 1.0 / (2 * la + 1) as f64;
        }
        v
    })
}

fn check_pair(phi_v: &DtNMap, phi_0: &DtNMap, basis: &HarmonicBasis) -> Result<DMatrix<C64>> {
    if phi_v.max_degree != basis.max_degree() {
        return Err(invalid("DtN truncation differs from the harmonic basis"));
    }
    Ok(phi_v.difference(phi_0)?.map(|x| C64::new(x, 0.0)))
}

pub fn kernel_a(phi_v: &DtNMap, phi_0: &DtNMap, k: &ComplexMomentum, basis: &HarmonicBasis) -> Result<BoundaryKernel> {
    let d = check_pair(phi_v, phi_0, basis)?;
    let matrix = if d.iter().all(|z| *z == C64::new(0.0, 0.0)) {
        DMatrix::zeros(d.nrows(), d.ncols())
    } else {
        single_layer(basis, k) * &d
    };
    Ok(BoundaryKernel {
        matrix,
        k: *k,
        difference: d,
    })
}

fn one_norm(m: &DMatrix<C64>) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Solves `(I - A) c = E(ik)`.
pub fn solve_boundary_psi(a: &BoundaryKernel, basis: &HarmonicBasis) -> Result<BoundaryPsi> {
    let rhs = DVector::from_vec(incident_coefficients(basis, &a.k));
    let n = rhs.len();
    let m = DMatrix::<C64>::identity(n, n) - &a.matrix;
    let lu = m.clone().lu();
    let inv = lu
        .try_inverse()
        .ok_or(Error::IllConditioned { condition: f64::INFINITY })?;
    let condition = one_norm(&m) * one_norm(&inv);
    if !(condition < CONDITION_LIMIT) {
        return Err(Error::IllConditioned { condition });
    }
    let c = &inv * &rhs;
    let r = &m * &c - &rhs;
    let residual = r.norm() / rhs.norm().max(f64::MIN_POSITIVE);
    Ok(BoundaryPsi {
        coeffs: c.iter().cloned().collect(),
        residual,
        condition,
    })
}

/// `h(k, l)` from `Phi_v` and `Phi_0`.
pub fn h_from_dtn(phi_v: &DtNMap, phi_0: &DtNMap, pt: &ThetaPoint, basis: &HarmonicBasis) -> Result<C64> {
    let a = kernel_a(phi_v, phi_0, &pt.k, basis)?;
    let psi = solve_boundary_psi(&a, basis)?;
    Ok(pair_amplitude(&a.difference, &psi.coeffs, &pt.l, basis))
}

fn pair_amplitude(d: &DMatrix<C64>, psi: &[C64], l: &ComplexMomentum, basis: &HarmonicBasis) -> C64 {
    let e = DVector::from_vec(outgoing_coefficients(basis, l));
    let c = DVector::from_vec(psi.to_vec());
    (e.transpose() * d * c)[(0, 0)] / (2.0 * PI).powi(3)
}

/// Whether `D` is a multiple of the identity on each degree block, so the
/// boundary problem commutes with rotations.
pub fn is_rotation_invariant(d: &DMatrix<f64>, tol: f64) -> bool {
    let n = d.nrows();
    let scale = d.abs().max().max(f64::MIN_POSITIVE);
    (0..n).all(|i| {
        (0..n).all(|j| {
            let expect = if i == j { d[(degree_of(i) * degree_of(i), degree_of(i) * degree_of(i))] } else { 0.0 };
            (d[(i, j)] - expect).abs() <= tol * scale
        })
    })
}

/// Boundary-data scattering amplitudes with per-`k` caching.
///
/// When `D` is rotation invariant, one solve at `k_0 = s (e_1 + i e_2)` per
/// level `s` serves every `k` with `|Im k| = s`.
pub struct BoundaryScattering {
    basis: HarmonicBasis,
    difference: DMatrix<C64>,
    invariant: bool,
    cache: Mutex<HashMap<[u64; 6], Arc<BoundaryPsi>>>,
}

impl std::fmt::Debug for BoundaryScattering {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BoundaryScattering")
            .field("max_degree", &self.basis.max_degree())
            .field("invariant", &self.invariant)
            .finish()
    }
}

impl BoundaryScattering {
    pub fn new(phi_v: &DtNMap, phi_0: &DtNMap) -> Result<Self> {
        let basis = HarmonicBasis::new(phi_v.max_degree);
        let d_real = phi_v.difference(phi_0)?;
        let invariant = is_rotation_invariant(&d_real, 1e-14);
        Ok(Self {
            difference: d_real.map(|x| C64::new(x, 0.0)),
            basis,
            invariant,
            cache: Mutex::new(HashMap::new()),
        })
    }

    /// Disables the rotation shortcut (used to check it).
    pub fn without_symmetry(mut self) -> Self {
        self.invariant = false;
        self
    }

    pub fn is_invariant(&self) -> bool {
        self.invariant
    }

    pub fn basis(&self) -> &HarmonicBasis {
        &self.basis
    }

    fn key(k: &ComplexMomentum) -> [u64; 6] {
        let r = |x: f64| (x * 1e12).round().to_bits();
        [r(k.re.x), r(k.re.y), r(k.re.z), r(k.im.x), r(k.im.y), r(k.im.z)]
    }

    fn psi(&self, k: &ComplexMomentum) -> Result<Arc<BoundaryPsi>> {
        let key = Self::key(k);
        if let Some(p) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(p.clone());
        }
        let a = BoundaryKernel {
            matrix: single_layer(&self.basis, k) * &self.difference,
            k: *k,
            difference: self.difference.clone(),
        };
        let psi = Arc::new(solve_boundary_psi(&a, &self.basis)?);
        self.cache.lock().expect("cache lock").insert(key, psi.clone());
        Ok(psi)
    }

    /// Condition estimate of the boundary system at `k`.
    pub fn condition(&self, k: &ComplexMomentum) -> Result<f64> {
        Ok(self.psi(k)?.condition)
    }

    pub fn eval_theta(&self, pt: &ThetaPoint) -> Result<C64> {
        if self.difference.iter().all(|z| *z == C64::new(0.0, 0.0)) {
            return Ok(C64::new(0.0, 0.0));
        }
        let (k, l) = if self.invariant {
            let s = pt.k.im_norm();
            let e1 = pt.k.re / s;
            let e2 = pt.k.im / s;
            let e3 = e1.cross(&e2);
            let rot = |v: &Vec3| Vec3::new(e1.dot(v), e2.dot(v), e3.dot(v));
            (
                ComplexMomentum::new_unchecked(Vec3::x() * s, Vec3::y() * s),
                ComplexMomentum::new_unchecked(rot(&pt.l.re), rot(&pt.l.im)),
            )
        } else {
            (pt.k, pt.l)
        };
        let psi = self.psi(&k)?;
        Ok(pair_amplitude(&self.difference, &psi.coeffs, &l, &self.basis))
    }
}

/// Ring data `h` (equivalently `H`) on the boundary level of a [`LambdaGrid`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScatteringSlice {
    pub grid: LambdaGrid,
    /// Indexed by `(p, branch, angle)`.
    pub values: Vec<C64>,
    pub valid: Vec<bool>,
}

impl ScatteringSlice {
    pub fn ring_index(&self, ip: usize, branch: Branch, a: usize) -> usize {
        (ip * 2 + branch.index()) * self.grid.n_angular + a
    }

    pub fn ring_point(&self, ip: usize, branch: Branch, a: usize) -> LambdaPoint {
        self.grid.point(ip, branch, 0, a)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, ip: usize, branch: Branch, a: usize) -> C64 {
        self.values[self.ring_index(ip, branch, a)]
    }

    pub fn masked_fraction(&self) -> f64 {
        self.valid.iter().filter(|v| !**v).count() as f64 / self.valid.len().max(1) as f64
    }

    /// Evaluates `f` at every ring node; failures are masked (value 0).
    pub fn compute<F>(grid: &LambdaGrid, f: F) -> Self
    where
        F: Fn(&ThetaPoint) -> Result<C64> + Sync,
    {
        let na = grid.n_angular;
        let nodes: Vec<(usize, Branch, usize)> = (0..grid.n_p())
            .flat_map(|ip| Branch::BOTH.into_iter().flat_map(move |b| (0..na).map(move |a| (ip, b, a))))
            .collect();
        let results: Vec<Option<C64>> = nodes
            .par_iter()
            .map(|&(ip, b, a)| {
                let lp = grid.point(ip, b, 0, a);
                crate::coords::theta_point(&lp, &grid.frame).and_then(|pt| f(&pt)).ok()
            })
            .collect();
        Self {
            grid: grid.clone(),
            valid: results.iter().map(|r| r.is_some()).collect(),
            values: results.iter().map(|r| r.unwrap_or(C64::new(0.0, 0.0))).collect(),
        }
    }
}

impl ScatteringSlice {
    /// Evaluates `f` once per `(p, branch)` at angle 0 and copies the value
    /// around the ring; valid when the data commute with rotations.
    pub fn compute_isotropic<F>(grid: &LambdaGrid, f: F) -> Self
    where
        F: Fn(&ThetaPoint) -> Result<C64> + Sync,
    {
        let na = grid.n_angular;
        let blocks: Vec<(usize, Branch)> =
            (0..grid.n_p()).flat_map(|ip| Branch::BOTH.into_iter().map(move |b| (ip, b))).collect();
        let results: Vec<Option<C64>> = blocks
            .par_iter()
            .map(|&(ip, b)| {
                let lp = grid.point(ip, b, 0, 0);
                crate::coords::theta_point(&lp, &grid.frame).and_then(|pt| f(&pt)).ok()
            })
            .collect();
        let expand = |r: &Option<C64>| std::iter::repeat_n(*r, na);
        let all: Vec<Option<C64>> = results.iter().flat_map(expand).collect();
        Self {
            grid: grid.clone(),
            valid: all.iter().map(|r| r.is_some()).collect(),
            values: all.iter().map(|r| r.unwrap_or(C64::new(0.0, 0.0))).collect(),
        }
    }
}

/// Ring data from DtN maps.
pub fn h_on_slice(phi_v: &DtNMap, phi_0: &DtNMap, grid: &LambdaGrid) -> Result<ScatteringSlice> {
    let bs = BoundaryScattering::new(phi_v, phi_0)?;
    if bs.is_invariant() && grid.is_isotropic() {
        return Ok(ScatteringSlice::compute_isotropic(grid, |pt| bs.eval_theta(pt)));
    }
    Ok(ScatteringSlice::compute(grid, |pt| bs.eval_theta(pt)))
}
