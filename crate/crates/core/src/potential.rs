use crate::error::{invalid, Result};
use crate::grid::VolumeGrid;
use crate::quadrature::gauss_legendre_on;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Radial potential profiles `v(r)`, all vanishing for `r >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialProfile {
    Zero,
    /// `value` on the open ball `r < 1`.
    Constant { value: f64 },
    /// `amplitude (1 - r^2/radius^2)^power` for `r < radius`.
    Bump { amplitude: f64, radius: f64, power: u32 },
    /// `amplitude exp(-exponent r^2)` truncated at `r = 1`.
    Gaussian { amplitude: f64, exponent: f64 },
}

impl RadialProfile {
    /// The smooth bump used throughout the experiments.
    pub const REFERENCE: RadialProfile = RadialProfile::Bump {
        amplitude: 2.0,
        radius: 0.8,
        power: 8,
    };

    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            RadialProfile::Zero => 0.0,
            RadialProfile::Constant { value } => {
                if r < 1.0 {
                    value
                } else {
                    0.0
                }
            }
            RadialProfile::Bump { amplitude, radius, power } => {
                if r < radius {
                    amplitude * (1.0 - (r / radius).powi(2)).powi(power as i32)
                } else {
                    0.0
                }
            }
            RadialProfile::Gaussian { amplitude, exponent } => {
                if r < 1.0 {
                    amplitude * (-exponent * r * r).exp()
                } else {
                    0.0
                }
            }
        }
    }

    pub fn support_radius(&self) -> f64 {
        match *self {
            RadialProfile::Zero => 0.0,
            RadialProfile::Bump { radius, .. } => radius,
            _ => 1.0,
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        match *self {
            RadialProfile::Zero => RadialProfile::Zero,
            RadialProfile::Constant { value } => RadialProfile::Constant { value: s * value },
            RadialProfile::Bump { amplitude, radius, power } => RadialProfile::Bump {
                amplitude: s * amplitude,
                radius,
                power,
            },
            RadialProfile::Gaussian { amplitude, exponent } => RadialProfile::Gaussian {
                amplitude: s * amplitude,
                exponent,
            },
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        match *self {
            RadialProfile::Zero => true,
            RadialProfile::Constant { value } => value >= 0.0,
            RadialProfile::Bump { amplitude, .. } | RadialProfile::Gaussian { amplitude, .. } => amplitude >= 0.0,
        }
    }

    /// Fourier transform `(2 pi)^-3 \int e^{ipx} v(x) dx` at `|p| = t`,
    /// evaluated by Gauss-Legendre quadrature of the radial integral.
    pub fn fourier(&self, t: f64) -> f64 {
        let r_sup = self.support_radius();
        if r_sup == 0.0 {
            return 0.0;
        }
        let n = 200 + (8.0 * t * r_sup) as usize;
        let (x, w) = gauss_legendre_on(n, 0.0, r_sup);
        let s: f64 = x
            .iter()
            .zip(&w)
            .map(|(&r, &w)| w * r * r * self.eval(r) * sinc(t * r))
            .sum();
        4.0 * PI * s / (2.0 * PI).powi(3)
    }

    /// Smoothness order: the number of derivatives in `L^1`.
    pub fn smoothness(&self) -> u32 {
        match *self {
            RadialProfile::Bump { power, .. } => power,
            RadialProfile::Constant { .. } => 0,
            // the truncation jump at r = 1 is below double precision for the exponents used
            RadialProfile::Zero | RadialProfile::Gaussian { .. } => u32::MAX,
        }
    }
}

pub fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        1.0 - z * z / 6.0 + z.powi(4) / 120.0
    } else {
        z.sin() / z
    }
}

/// Real potential sampled on a volume grid, supported in the unit ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    pub grid: VolumeGrid,
    pub values: Vec<f64>,
    /// Smoothness order used for norm bookkeeping.
    pub smoothness: u32,
    /// Bound on the `W^{m,1}` norm.
    pub norm_bound: f64,
    pub radial_profile: Option<RadialProfile>,
}

impl Potential {
    pub fn zero(grid: VolumeGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
            smoothness: 8,
            norm_bound: 0.0,
            radial_profile: Some(RadialProfile::Zero),
        }
    }

    /// Samples a radial profile on the grid; `norm_bound` is computed from the
    /// sampled values at order `min(smoothness, 4)`.
    pub fn from_profile(grid: VolumeGrid, profile: RadialProfile, smoothness: u32) -> Result<Self> {
        if smoothness < 4 {
            return Err(invalid("smoothness order must exceed 3"));
        }
        let values = grid.nodes().map(|x| profile.eval(x.norm())).collect();
        let mut v = Self {
            grid,
            values,
            smoothness,
            norm_bound: 0.0,
            radial_profile: Some(profile),
        };
        v.norm_bound = crate::norms::sobolev_norm_m1(&v, smoothness.min(4))?;
        Ok(v)
    }

    /// The reference bump on the given grid.
    pub fn reference(grid: VolumeGrid) -> Result<Self> {
        Self::from_profile(grid, RadialProfile::REFERENCE, RadialProfile::REFERENCE.smoothness())
    }

    pub fn from_values(grid: VolumeGrid, values: Vec<f64>, smoothness: u32, norm_bound: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid(format!("expected {} values, got {}", grid.len(), values.len())));
        }
        if let Some((i, _)) = values
            .iter()
            .enumerate()
            .find(|&(i, v)| *v != 0.0 && grid.node(i).norm() >= 1.0)
        {
            return Err(invalid(format!("potential does not vanish outside the unit ball (node {i})")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("potential has non-finite values"));
        }
        Ok(Self {
            grid,
            values,
            smoothness,
            norm_bound,
            radial_profile: None,
        })
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| s * v).collect(),
            smoothness: self.smoothness,
            norm_bound: s.abs() * self.norm_bound,
            radial_profile: self.radial_profile.map(|p| p.scaled(s)),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    /// Indices of the nodes where `v` is non-zero.
    pub fn support(&self) -> Vec<usize> {
        (0..self.values.len()).filter(|&i| self.values[i] != 0.0).collect()
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }
}

/// Potential `Delta(sqrt sigma) / sqrt sigma` of a radial conductivity, at
/// radius `r`, by central differences of `a = sqrt sigma` with step `step`.
pub fn potential_from_conductivity<F: Fn(f64) -> f64>(sigma: F, r: f64, step: f64) -> f64 {
    let a = |t: f64| sigma(t.abs()).sqrt();
    let a0 = a(r);
    let d2 = (a(r + step) - 2.0 * a0 + a(r - step)) / (step * step);
    let lap = if r < step {
        // radial Laplacian at the origin is 3 a''(0)
        3.0 * d2
    } else {
        let d1 = (a(r + step) - a(r - step)) / (2.0 * step);
        d2 + 2.0 * d1 / r
    };
    lap / a0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles_vanish_outside_ball() {
        for p in [
            RadialProfile::REFERENCE,
            RadialProfile::Constant { value: 1.0 },
            RadialProfile::Gaussian { amplitude: 1.0, exponent: 16.0 },
        ] {
            assert_eq!(p.eval(1.0), 0.0);
            assert_eq!(p.eval(1.3), 0.0);
        }
        assert_eq!(RadialProfile::REFERENCE.eval(0.0), 2.0);
    }

    #[test]
    fn from_values_rejects_support_outside_ball() {
        let g = VolumeGrid::new(8, 1.2).unwrap();
        let mut vals = vec![0.0; g.len()];
        vals[0] = 1.0;
        assert!(Potential::from_values(g, vals, 5, 1.0).is_err());
    }

    #[test]
    fn gaussian_fourier_matches_closed_form() {
        let a = 20.0;
        let p = RadialProfile::Gaussian { amplitude: 1.0, exponent: a };
        for t in [0.0, 1.0, 4.0] {
            let exact = (PI / a).powf(1.5) * (-t * t / (4.0 * a)).exp() / (2.0 * PI).powi(3);
            // mass of the untruncated Gaussian outside the unit ball
            let tail = 4.0 * PI * (-a).exp() * (1.0 / (2.0 * a) + 1.0 / (4.0 * a * a)) / (2.0 * PI).powi(3);
            assert!((p.fourier(t) - exact).abs() <= tail + 1e-15, "t={t}");
        }
    }

    #[test]
    fn conductivity_formula_on_quadratic_root() {
        // sqrt(sigma) = 1 + r^2 gives Laplacian 6
        let sigma = |r: f64| (1.0 + r * r).powi(2);
        let v = potential_from_conductivity(sigma, 0.5, 1e-4);
        assert!((v - 6.0 / 1.25).abs() < 1e-5);
        let v0 = potential_from_conductivity(sigma, 0.0, 1e-4);
        assert!((v0 - 6.0).abs() < 1e-5);
    }
}
