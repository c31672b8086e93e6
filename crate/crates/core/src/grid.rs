use crate::error::{invalid, Result};
use crate::quadrature::gauss_legendre;
use crate::Vec3;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Uniform cell-centred grid on the cube [-half_width, half_width]^3.
///
/// Node `i` along an axis sits at `-half_width + (i + 1/2) h` with
/// `h = 2 half_width / n`, so the origin is never a node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeGrid {
    n: usize,
    half_width: f64,
}

impl VolumeGrid {
    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        if n % 2 == 1 {
            return Err(invalid("n must be even"));
        }
        if n < 8 {
            return Err(invalid("n must be at least 8"));
        }
        if !(half_width > 1.0 && half_width.is_finite()) {
            return Err(invalid("half width must exceed 1 so the cube contains the unit ball"));
        }
        Ok(Self { n, half_width })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.spacing()
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    pub fn unravel(&self, idx: usize) -> (usize, usize, usize) {
        let k = idx % self.n;
        let j = (idx / self.n) % self.n;
        (idx / (self.n * self.n), j, k)
    }

    pub fn node(&self, idx: usize) -> Vec3 {
        let (i, j, k) = self.unravel(idx);
        Vec3::new(self.coord(i), self.coord(j), self.coord(k))
    }

    pub fn nodes(&self) -> impl Iterator<Item = Vec3> + '_ {
        (0..self.len()).map(move |i| self.node(i))
    }
}

/// Product quadrature on the unit sphere: Gauss-Legendre in cos(theta) and a
/// uniform rule in the azimuth. Exact for spherical polynomials of degree
/// `<= exact_degree`.
#[derive(Debug, Clone)]
pub struct BoundaryQuadrature {
    pub points: Vec<Vec3>,
    pub weights: Vec<f64>,
    pub cos_theta: Vec<f64>,
    pub azimuth: Vec<f64>,
    exact_degree: usize,
}

impl BoundaryQuadrature {
    /// Rule exact through degree `2 * max_degree`; `max_degree` is the
    /// harmonic truncation it is meant to serve.
    pub fn for_degree(max_degree: usize) -> Self {
        Self::exact_through(2 * max_degree)
    }

    pub fn exact_through(degree: usize) -> Self {
        let n_theta = degree / 2 + 1;
        let n_phi = degree + 1;
        let (x, w) = gauss_legendre(n_theta);
        let mut points = Vec::with_capacity(n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        let mut cos_theta = Vec::with_capacity(n_theta * n_phi);
        let mut azimuth = Vec::with_capacity(n_theta * n_phi);
        for (&ct, &wt) in x.iter().zip(&w) {
            let st = (1.0 - ct * ct).max(0.0).sqrt();
            for j in 0..n_phi {
                let phi = 2.0 * PI * j as f64 / n_phi as f64;
                points.push(Vec3::new(st * phi.cos(), st * phi.sin(), ct));
                weights.push(wt * 2.0 * PI / n_phi as f64);
                cos_theta.push(ct);
                azimuth.push(phi);
            }
        }
        Self {
            points,
            weights,
            cos_theta,
            azimuth,
            exact_degree: degree,
        }
    }

    pub fn exact_degree(&self) -> usize {
        self.exact_degree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}
