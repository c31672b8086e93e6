use super::momentum::ComplexMomentum;
use crate::error::{invalid, Result};
use crate::fourier::{dual_points, shifted_transform, Sign};
use crate::grid::VolumeGrid;
use crate::quadrature::gauss_legendre_on;
use crate::{Vec3, C64};
use std::f64::consts::PI;

/// Faddeev's Green's function for `k = s (a + i b)`, evaluated in closed form.
///
/// `G(x, k) = -1/(4 pi |x|) + (s / 4 pi) \int_0^1 J_0(r s rho) e^{-r s (b.x)} dr`
/// with `rho = |x - (b.x) b|`; Bessel's integral turns this into an angular
/// integral that is evaluated by Gauss-Legendre quadrature.
#[derive(Debug, Clone)]
pub struct FaddeevGreen {
    k: ComplexMomentum,
    s: f64,
    dir: Vec3,
    sin_nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl FaddeevGreen {
    /// Rule sized for `|x| <= max_distance`.
    pub fn new(k: ComplexMomentum, max_distance: f64) -> Self {
        let a_max = k.im_norm() * max_distance;
        Self::with_nodes(k, 24 + a_max.ceil() as usize)
    }

    pub fn with_nodes(k: ComplexMomentum, n: usize) -> Self {
        let (t, w) = gauss_legendre_on(n, 0.0, PI / 2.0);
        let s = k.im_norm();
        Self {
            k,
            s,
            dir: k.im / s,
            sin_nodes: t.iter().map(|t| t.sin()).collect(),
            // doubled: the integrand is symmetric about pi/2
            weights: w.iter().map(|w| 2.0 * w).collect(),
        }
    }

    pub fn momentum(&self) -> &ComplexMomentum {
        &self.k
    }

    /// `e^{c} G(x)` with `c = Im k . x`; finite for all `x != 0`.
    fn scaled(&self, x: &Vec3) -> f64 {
        let c = self.k.im.dot(x);
        let r = x.norm();
        let rho = (x - self.dir * (c / self.s)).norm();
        let a = self.s * rho;
        if c > 0.0 {
            // e^c G = -1/(4 pi |x|) - (s / 4 pi^2) \int_0^pi Re[(e^{i a sin t} - 1) / (c - i a sin t)] dt
            let sum: f64 = self
                .sin_nodes
                .iter()
                .zip(&self.weights)
                .map(|(st, w)| {
                    let y = a * st;
                    let num = C64::new(-2.0 * (0.5 * y).sin().powi(2), y.sin());
                    w * (num / C64::new(c, -y)).re
                })
                .sum();
            -1.0 / (4.0 * PI * r) - self.s / (4.0 * PI * PI) * sum
        } else {
            // e^c G = -(1/4 pi) [e^c / |x| - (s/pi) \int_0^pi Re[e^c (e^w - 1) / w] dt],  w = i a sin t - c
            let ec = c.exp();
            let sum: f64 = self
                .sin_nodes
                .iter()
                .zip(&self.weights)
                .map(|(st, w)| {
                    let y = a * st;
                    let z = C64::new(-c, y);
                    let val = if z.norm() < 0.5 {
                        ec * exp_minus_one_over(z)
                    } else {
                        (C64::from_polar(1.0, y) - ec) / z
                    };
                    w * val.re
                })
                .sum();
            -(ec / r - self.s / PI * sum) / (4.0 * PI)
        }
    }

    /// `G(x, k)`.
    pub fn big_g(&self, x: &Vec3) -> f64 {
        self.scaled(x) * (-self.k.im.dot(x)).exp()
    }

    /// `g(x, k) = e^{-ikx} G(x, k)`.
    pub fn small_g(&self, x: &Vec3) -> C64 {
        C64::from_polar(self.scaled(x), -self.k.re.dot(x))
    }

    /// Harmonic part `G + 1/(4 pi |x|)`.
    pub fn harmonic_part(&self, x: &Vec3) -> f64 {
        let r = x.norm();
        if r == 0.0 {
            return self.harmonic_at_origin();
        }
        self.big_g(x) + 1.0 / (4.0 * PI * r)
    }

    /// `G + 1/(4 pi |x|)` at `x = 0`, namely `s / (4 pi)`.
    pub fn harmonic_at_origin(&self) -> f64 {
        self.s / (4.0 * PI)
    }
}

/// `(e^z - 1) / z` for small `|z|`, without cancellation.
fn exp_minus_one_over(z: C64) -> C64 {
    let mut term = C64::new(1.0, 0.0);
    let mut sum = term;
    for n in 2..30 {
        term = term * z / n as f64;
        sum += term;
        if term.norm() < 1e-17 {
            break;
        }
    }
    sum
}

/// `g(x, k) = -(2 pi)^-3 \int e^{i xi x} d xi / (xi^2 + 2 k xi)` on the lattice
/// of node differences `x = (i - n/2, j - n/2, l - n/2) h` (see
/// [`lattice_offset`]), by a discrete transform of the symbol over the offset
/// dual grid. The origin sits at index `(n/2, n/2, n/2)`.
pub fn faddeev_g(k: &ComplexMomentum, grid: &VolumeGrid) -> Result<Vec<C64>> {
    let points = dual_points(grid);
    let kc = k.components();
    let floor = 1e-12 * (1.0 + k.im_norm()).powi(2);
    let mut data = Vec::with_capacity(points.len());
    for xi in &points {
        let sym = C64::new(xi.norm_squared(), 0.0) + 2.0 * (kc[0] * xi.x + kc[1] * xi.y + kc[2] * xi.z);
        if sym.norm() < floor {
            return Err(invalid(format!(
                "symbol |xi^2 + 2 k xi| = {:e} below floor at xi = {:?}",
                sym.norm(),
                [xi.x, xi.y, xi.z]
            )));
        }
        data.push(-1.0 / sym);
    }
    Ok(lattice_from_symbol(grid, data))
}

/// Inverse of [`symbol_from_samples`]: `(2 pi)^-3 sum_m e^{i p_m x} u_m (pi/hw)^3`
/// on the lattice of node differences.
pub fn lattice_from_symbol(grid: &VolumeGrid, mut data: Vec<C64>) -> Vec<C64> {
    let n = grid.n();
    shifted_transform(n, &mut data, Sign::Plus, 0.5 - n as f64 / 2.0, -(n as f64) / 2.0);
    let scale = (PI / grid.half_width()).powi(3) / (2.0 * PI).powi(3);
    data.iter_mut().for_each(|z| *z *= scale);
    data
}

/// Node-difference vector for flat index `idx` of the [`faddeev_g`] layout.
pub fn lattice_offset(grid: &VolumeGrid, idx: usize) -> Vec3 {
    let (i, j, l) = grid.unravel(idx);
    let c = |i: usize| (i as f64 - grid.n() as f64 / 2.0) * grid.spacing();
    Vec3::new(c(i), c(j), c(l))
}

/// Symbol of `g` rebuilt from lattice samples by the forward discrete transform.
pub fn symbol_from_samples(grid: &VolumeGrid, g: &[C64]) -> Vec<C64> {
    let mut data = g.to_vec();
    let n = grid.n();
    shifted_transform(n, &mut data, Sign::Minus, -(n as f64) / 2.0, 0.5 - n as f64 / 2.0);
    let h3 = grid.cell_volume();
    data.iter_mut().for_each(|z| *z *= h3);
    data
}
