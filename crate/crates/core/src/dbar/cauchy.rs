use super::field::LambdaField;
use crate::constants::{q_radius_derivative, small_root};
use crate::coords::{Branch, LambdaGrid};
use crate::{Result, C64};
use rayon::prelude::*;

/// Interior values from the ring values of `boundary` (level 0).
///
/// `+`: `(1/N) sum H(zeta) zeta/(zeta - lambda)`;
/// `-`: `-(1/N) sum H(zeta) lambda/(zeta - lambda)`,
/// each divided by the same sum of `H = 1` (barycentric form). The
/// trapezoid sum of a power `zeta^n`, `0 <= n < N` on `+` and `-N < n <= 0`
/// on `-`, is `lambda^n` times that common factor, so the quotient is exact.
/// Ring nodes keep their boundary values.
#[allow(non_snake_case)]
pub fn cauchy_H0(boundary: &LambdaField) -> LambdaField {
    let g = &boundary.grid;
    let na = g.n_angular;
    let mut out = boundary.clone();
    let zero = C64::new(0.0, 0.0);
    for ip in 0..g.n_p() {
        for b in Branch::BOTH {
            let ring: Vec<(C64, C64)> = (0..na).map(|a| (g.lambda(ip, b, 0, a), boundary.at(ip, b, 0, a))).collect();
            for j in 1..g.n_levels() {
                for a in 0..na {
                    let lam = g.lambda(ip, b, j, a);
                    let (sum, unit) = ring.iter().fold((zero, zero), |(acc, one), (z, h)| {
                        let w = match b {
                            Branch::Plus => z / (z - lam),
                            Branch::Minus => -lam / (z - lam),
                        };
                        (acc + h * w, one + w)
                    });
                    out.set(ip, b, j, a, sum / unit);
                }
            }
        }
    }
    out
}

/// `|d|lambda| / d level-index|` on each level of the block.
fn radial_jacobian(g: &LambdaGrid, ip: usize, b: Branch) -> Vec<f64> {
    let pn = g.p_nodes[ip].norm();
    let top = g.n_levels() - 1;
    let log_stretch = (g.levels[top] / g.rho).ln();
    g.levels
        .iter()
        .map(|&s| {
            let dsdj = s * log_stretch / top as f64;
            let dq = q_radius_derivative(s / pn) / pn;
            let drds = match b {
                Branch::Plus => dq,
                Branch::Minus => {
                    let q = small_root(s / pn);
                    -dq / (q * q)
                }
            };
            (drds * dsdj).abs()
        })
        .collect()
}

fn unit_trapezoid(n: usize) -> Vec<f64> {
    let mut w = vec![1.0; n];
    if n == 1 {
        w[0] = 0.0;
    } else {
        w[0] = 0.5;
        w[n - 1] = 0.5;
    }
    w
}

/// Angular Fourier index for slot `i` of `n`, in `[-n/2, n/2)`.
fn mode(i: usize, n: usize) -> i64 {
    let i = i as i64;
    let n = n as i64;
    if i < n / 2 {
        i
    } else {
        i - n
    }
}

/// Solid Cauchy transform of `f` over the annulus of each branch.
///
/// `+`: `-(1/pi) int f(zeta)/(zeta - lambda) dA`;
/// `-`: `-(1/pi) int f(zeta) lambda/(zeta (zeta - lambda)) dA`.
/// Evaluated mode by mode in `arg zeta`, so the kernel needs no diagonal
/// treatment; the radial integral is a trapezoid rule over the levels.
pub fn solid_cauchy(f: &LambdaField) -> LambdaField {
    let g = &f.grid;
    let na = g.n_angular;
    let nl = g.n_levels();
    let blocks: Vec<(usize, Branch)> = (0..g.n_p()).flat_map(|ip| Branch::BOTH.into_iter().map(move |b| (ip, b))).collect();
    let twiddle: Vec<C64> = (0..na).map(|a| C64::from_polar(1.0, g.angle(a))).collect();
    let results: Vec<Vec<C64>> = blocks
        .par_iter()
        .map(|&(ip, b)| {
            let radii: Vec<f64> = (0..nl).map(|j| g.modulus(ip, b, j)).collect();
            let jac = radial_jacobian(g, ip, b);
            // coefficients f_n(r_j)
            let coeffs: Vec<Vec<C64>> = (0..nl)
                .map(|j| {
                    (0..na)
                        .map(|slot| {
                            let n = mode(slot, na);
                            (0..na)
                                .map(|a| f.at(ip, b, j, a) * twiddle[(a as i64 * -n).rem_euclid(na as i64) as usize])
                                .sum::<C64>()
                                / na as f64
                        })
                        .collect()
                })
                .collect();
            let mut out = vec![C64::new(0.0, 0.0); nl * na];
            for t in 1..nl {
                let rt = radii[t];
                let wa = unit_trapezoid(t + 1);
                let wb = unit_trapezoid(nl - t);
                let mut g_n = vec![C64::new(0.0, 0.0); na];
                for (slot, gn) in g_n.iter_mut().enumerate() {
                    let n = mode(slot, na);
                    // levels 0..=t lie on the ring side of the target, t..top beyond it
                    let (near_sign, near_cond, far_sign, far_cond) = match b {
                        Branch::Plus => (-2.0, n >= 1, 2.0, n <= 0),
                        Branch::Minus => (2.0, n <= 1, -2.0, n >= 2),
                    };
                    let kernel = |r: f64| -> f64 {
                        // bounded by one in both regimes
                        if (r - rt).abs() == 0.0 {
                            1.0
                        } else {
                            let ratio = if r > rt { rt / r } else { r / rt };
                            ratio.powi(if r > rt { (n - 1) as i32 } else { (1 - n) as i32 })
                        }
                    };
                    let mut acc = C64::new(0.0, 0.0);
                    if near_cond {
                        for (i, j) in (0..=t).enumerate() {
                            acc += coeffs[j][slot] * (near_sign * wa[i] * jac[j] * kernel(radii[j]));
                        }
                    }
                    if far_cond {
                        for (i, j) in (t..nl).enumerate() {
                            acc += coeffs[j][slot] * (far_sign * wb[i] * jac[j] * kernel(radii[j]));
                        }
                    }
                    *gn = acc;
                }
                for a in 0..na {
                    let mut v = C64::new(0.0, 0.0);
                    for (slot, gn) in g_n.iter().enumerate() {
                        let e = (mode(slot, na) - 1) * a as i64;
                        v += gn * twiddle[e.rem_euclid(na as i64) as usize];
                    }
                    out[t * na + a] = v;
                }
            }
            out
        })
        .collect();
    let mut out = LambdaField::zeros(g);
    for ((ip, b), vals) in blocks.into_iter().zip(results) {
        let start = g.index(ip, b, 0, 0);
        out.values[start..start + nl * na].copy_from_slice(&vals);
    }
    out
}

/// `M(U) = solid Cauchy transform of {U, U}` with the cutoff pairing.
/// Returns the tally of clipped and cut bracket arguments alongside.
#[allow(non_snake_case)]
pub fn area_op_M(u: &LambdaField, n_phi: usize) -> Result<(LambdaField, super::bracket::BracketTally)> {
    let interp = u.interpolant();
    let (br, tally) = super::bracket::poisson_bracket(&interp, &interp, &u.grid, n_phi)?;
    Ok((solid_cauchy(&br), tally))
}
