//! Real orthonormal spherical harmonics, flattened with index `l^2 + l + m`.

use crate::grid::BoundaryQuadrature;
use crate::{Vec3, C64};
use std::f64::consts::PI;

pub fn count(max_degree: usize) -> usize {
    (max_degree + 1) * (max_degree + 1)
}

pub fn index(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

pub fn degree_of(idx: usize) -> usize {
    let mut l = (idx as f64).sqrt() as usize;
    while (l + 1) * (l + 1) <= idx {
        l += 1;
    }
    while l * l > idx {
        l -= 1;
    }
    l
}

/// All `Y_lm(cos_theta, phi)` for `l <= max_degree`.
pub fn eval_all(max_degree: usize, cos_theta: f64, phi: f64) -> Vec<f64> {
    let mut out = vec![0.0; count(max_degree)];
    eval_into(max_degree, cos_theta, phi, &mut out);
    out
}

pub fn eval_into(max_degree: usize, x: f64, phi: f64, out: &mut [f64]) {
    let lmax = max_degree;
    let sin_t = (1.0 - x * x).max(0.0).sqrt();
    // normalised associated Legendre functions, no Condon-Shortley phase
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for m in 0..=lmax {
        if m > 0 {
            pmm *= ((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * sin_t;
        }
        let (cm, sm) = if m == 0 {
            (1.0, 0.0)
        } else {
            let a = m as f64 * phi;
            (2f64.sqrt() * a.cos(), 2f64.sqrt() * a.sin())
        };
        let mut store = |l: usize, p: f64| {
            out[index(l, m as i64)] = p * cm;
            if m > 0 {
                out[index(l, -(m as i64))] = p * sm;
            }
        };
        store(m, pmm);
        if m == lmax {
            break;
        }
        let mut p_prev = pmm;
        let mut p_cur = (2.0 * m as f64 + 3.0).sqrt() * x * pmm;
        store(m + 1, p_cur);
        for l in (m + 2)..=lmax {
            let lf = l as f64;
            let mf = m as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            let p_next = a * (x * p_cur - b * p_prev);
            p_prev = p_cur;
            p_cur = p_next;
            store(l, p_cur);
        }
    }
}

/// Harmonics at the direction of `x` (which need not be a unit vector).
pub fn eval_direction(max_degree: usize, x: &Vec3) -> Vec<f64> {
    let r = x.norm();
    if r == 0.0 {
        return eval_all(max_degree, 1.0, 0.0);
    }
    eval_all(max_degree, x.z / r, x.y.atan2(x.x))
}

/// Tabulated harmonics on a sphere quadrature, used for projections.
#[derive(Debug, Clone)]
pub struct HarmonicBasis {
    max_degree: usize,
    quad: BoundaryQuadrature,
    // row-major: node j, harmonic a -> Y_a(x_j) * w_j
    weighted: Vec<f64>,
}

impl HarmonicBasis {
    pub fn new(max_degree: usize) -> Self {
        let quad = BoundaryQuadrature::for_degree(max_degree);
        let nh = count(max_degree);
        let mut weighted = vec![0.0; quad.len() * nh];
        for j in 0..quad.len() {
            let row = &mut weighted[j * nh..(j + 1) * nh];
            eval_into(max_degree, quad.cos_theta[j], quad.azimuth[j], row);
            row.iter_mut().for_each(|y| *y *= quad.weights[j]);
        }
        Self {
            max_degree,
            quad,
            weighted,
        }
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn len(&self) -> usize {
        count(self.max_degree)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn quadrature(&self) -> &BoundaryQuadrature {
        &self.quad
    }

    /// Coefficients of boundary samples (given at the quadrature nodes).
    pub fn project(&self, samples: &[C64]) -> Vec<C64> {
        let nh = self.len();
        let mut c = vec![C64::new(0.0, 0.0); nh];
        for (j, f) in samples.iter().enumerate() {
            let row = &self.weighted[j * nh..(j + 1) * nh];
            c.iter_mut().zip(row).for_each(|(c, y)| *c += f * y);
        }
        c
    }

    /// Coefficients of `x -> exp(zeta . x)` on the unit sphere for a null
    /// vector `zeta` (`zeta . zeta = 0`). Each power `(zeta . x)^l` is a
    /// harmonic polynomial of degree `l`, so only the matching degree is
    /// extracted and the result is exact up to rounding.
    pub fn plane_wave_coefficients(&self, zeta: &[C64; 3]) -> Vec<C64> {
        let nh = self.len();
        let lmax = self.max_degree;
        let mut c = vec![C64::new(0.0, 0.0); nh];
        let mut powers = vec![C64::new(0.0, 0.0); lmax + 1];
        for (j, x) in self.quad.points.iter().enumerate() {
            let t = zeta[0] * x.x + zeta[1] * x.y + zeta[2] * x.z;
            let mut p = C64::new(1.0, 0.0);
            for (l, slot) in powers.iter_mut().enumerate() {
                if l > 0 {
                    p = p * t / l as f64;
                }
                *slot = p;
            }
            let row = &self.weighted[j * nh..(j + 1) * nh];
            for l in 0..=lmax {
                let tl = powers[l];
                let lo = l * l;
                for a in lo..lo + 2 * l + 1 {
                    c[a] += tl * row[a];
                }
            }
        }
        c
    }
}
