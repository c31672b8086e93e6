//! Scalar constants of the stability estimates.

use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Radius of the circle `|lambda| = q(r)` on which `(|lambda| + 1/|lambda|)/4 = r`,
/// taking the root inside the unit disc.
pub fn q_radius(r: f64) -> Result<f64> {
    if !(r > 0.5) || !r.is_finite() {
        return Err(invalid(format!("q_radius needs r > 1/2, got {r}")));
    }
    Ok(small_root(r))
}

/// [`q_radius`] without the domain check; callers guarantee `r >= 1/2`.
pub(crate) fn small_root(r: f64) -> f64 {
    // 2r - sqrt(4r^2 - 1), written without cancellation
    1.0 / (2.0 * r + (4.0 * r * r - 1.0).max(0.0).sqrt())
}

/// Derivative of [`q_radius`].
pub fn q_radius_derivative(r: f64) -> f64 {
    let d = (4.0 * r * r - 1.0).sqrt();
    2.0 - 4.0 * r / d
}

fn c6_ratio(r: f64) -> f64 {
    let a = small_root(r);
    let b = small_root(2.0 * r);
    a / (a - b)
}

/// `sup_{r > 1/2} q(r) / (q(r) - q(2r))` with the default sampling limit.
pub fn c6_constant() -> f64 {
    c6_constant_up_to(C6_DEFAULT_R_MAX)
}

/// The supremum sampled on a log grid over `(1/2, r_max]`, refined by golden
/// section around the best sample. The ratio increases monotonically towards
/// [`C6_LIMIT`] in the tail.
pub fn c6_constant_up_to(r_max: f64) -> f64 {
    let n = 4000;
    let lo = 0.5f64.ln();
    let hi = r_max.ln();
    let mut best = (f64::NEG_INFINITY, 0usize);
    let rs: Vec<f64> = (0..=n).map(|i| (lo + (hi - lo) * i as f64 / n as f64).exp()).collect();
    for (i, &r) in rs.iter().enumerate() {
        let v = c6_ratio(r);
        if v > best.0 {
            best = (v, i);
        }
    }
    let i = best.1;
    let (mut a, mut b) = (rs[i.saturating_sub(1)], rs[(i + 1).min(n)]);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if c6_ratio(c) > c6_ratio(d) {
            b = d;
        } else {
            a = c;
        }
    }
    best.0.max(c6_ratio(0.5 * (a + b)))
}

/// Large-`r` limit of the ratio in [`c6_constant`].
pub const C6_LIMIT: f64 = 2.0;

/// `(2 sqrt 3 - 3)^-1`, the closed-form upper bound for [`c6_constant`].
pub fn c6_upper_bound() -> f64 {
    1.0 / (2.0 * 3f64.sqrt() - 3.0)
}

/// Boundary-reduction constant for the unit ball: `(2 pi)^-3 * |unit sphere|`.
pub fn c8_constant() -> f64 {
    (2.0 * PI).powi(-3) * 4.0 * PI
}

/// Default sampling limit for [`c6_constant`].
pub const C6_DEFAULT_R_MAX: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub c6: f64,
    pub c6_upper_bound: f64,
    pub c6_limit: f64,
    pub c8: f64,
    pub r_max: f64,
    /// `(r, |q(r) + 1/q(r) - 4r|)` for the probe radii.
    pub q_identity_residuals: Vec<(f64, f64)>,
}

impl ConstantsReport {
    pub fn evaluate(r_max: f64) -> Self {
        let q_identity_residuals = [0.6, 1.0, 2.0, 5.0]
            .iter()
            .map(|&r| {
                let q = small_root(r);
                (r, (q + 1.0 / q - 4.0 * r).abs())
            })
            .collect();
        Self {
            c6: c6_constant_up_to(r_max),
            c6_upper_bound: c6_upper_bound(),
            c6_limit: C6_LIMIT,
            c8: c8_constant(),
            r_max,
            q_identity_residuals,
        }
    }

    pub fn passes(&self) -> bool {
        self.c6 > 0.0
            && self.c6 <= self.c6_upper_bound + 1e-6
            && self.q_identity_residuals.iter().all(|(_, e)| *e <= 1e-12)
    }
}
