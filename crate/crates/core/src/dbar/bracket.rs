use super::field::{LambdaField, OmegaFunction};
use crate::coords::{k_from_basis, Branch, LambdaGrid};
use crate::faddeev::ComplexMomentum;
use crate::{Error, Result, Vec3, C64};
use rayon::prelude::*;
use std::f64::consts::PI;
use std::sync::atomic::{AtomicUsize, Ordering};

/// Trapezoid node count in the rotation angle.
pub const DEFAULT_PHI_NODES: usize = 64;

/// Tally of arguments that fell outside the representable set.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct BracketTally {
    /// Arguments below the boundary level, above the top level or on the axis.
    pub clipped: usize,
    /// Arguments with `|p'| >= 2 tau rho` (set to zero by the cutoff).
    pub cut: usize,
    pub evaluated: usize,
}

impl BracketTally {
    fn merge(self, o: Self) -> Self {
        Self {
            clipped: self.clipped + o.clipped,
            cut: self.cut + o.cut,
            evaluated: self.evaluated + o.evaluated,
        }
    }
}

/// `{F1, F2}(lambda, p) = -(pi/4) int_{-pi}^{pi} W(phi) F1(k, -xi) F2(k + xi, p + xi) dphi`
/// with `xi = Re k (cos phi - 1) + k_perp sin phi` and
/// `W = (|p|/2) (|lambda|^2 - 1)/(conj(lambda)|lambda|) (cos phi - 1) - |p| sin phi / conj(lambda)`.
pub fn bracket_at(
    lambda: C64,
    p: &Vec3,
    theta: &Vec3,
    omega: &Vec3,
    f1: &dyn OmegaFunction,
    f2: &dyn OmegaFunction,
    n_phi: usize,
    band: Option<f64>,
) -> (C64, BracketTally) {
    let k = k_from_basis(lambda, p, theta, omega);
    bracket_k(&k, lambda, p, f1, f2, n_phi, band)
}

fn bracket_k(
    k: &ComplexMomentum,
    lambda: C64,
    p: &Vec3,
    f1: &dyn OmegaFunction,
    f2: &dyn OmegaFunction,
    n_phi: usize,
    band: Option<f64>,
) -> (C64, BracketTally) {
    let pn = p.norm();
    let r = lambda.norm();
    let lc = lambda.conj();
    let radial = (r * r - 1.0) / (lc * r) * (pn / 2.0);
    let tangential = pn / lc;
    let perp = k.perp();
    let mut tally = BracketTally::default();
    let mut acc = C64::new(0.0, 0.0);
    let cut = |q: &Vec3| band.is_some_and(|b| q.norm() >= b);
    for j in 0..n_phi {
        let phi = -PI + 2.0 * PI * j as f64 / n_phi as f64;
        let (sn, cs) = phi.sin_cos();
        if j == n_phi / 2 {
            continue; // phi = 0: xi = 0 and W = 0
        }
        let w = radial * (cs - 1.0) - tangential * sn;
        let xi = k.re * (cs - 1.0) + perp * sn;
        let p1 = -xi;
        let p2 = p + xi;
        if cut(&p1) || cut(&p2) {
            tally.cut += 1;
            continue;
        }
        let k2 = k.shifted(&xi);
        match (f1.eval(k, &p1), f2.eval(&k2, &p2)) {
            (Some(a), Some(b)) => {
                tally.evaluated += 1;
                acc += w * a * b;
            }
            _ => tally.clipped += 1,
        }
    }
    (acc * (-PI / 4.0 * 2.0 * PI / n_phi as f64), tally)
}

/// Bracket of two functions on every node of `grid`.
///
/// For shell sampling the node at angle `alpha` equals the node at angle 0
/// times `e^{i alpha}`, so one evaluation per ring is made.
pub fn poisson_bracket(
    f1: &dyn OmegaFunction,
    f2: &dyn OmegaFunction,
    grid: &LambdaGrid,
    n_phi: usize,
) -> Result<(LambdaField, BracketTally)> {
    let band = Some(grid.band());
    let nl = grid.n_levels();
    let na = grid.n_angular;
    let iso = grid.is_isotropic();
    let blocks: Vec<(usize, Branch)> =
        (0..grid.n_p()).flat_map(|ip| Branch::BOTH.into_iter().map(move |b| (ip, b))).collect();
    let failures = AtomicUsize::new(0);
    let results: Vec<(Vec<C64>, BracketTally)> = blocks
        .par_iter()
        .map(|&(ip, b)| {
            let p = grid.p_nodes[ip];
            let Ok((theta, omega)) = grid.frame.basis(&p) else {
                failures.fetch_add(1, Ordering::Relaxed);
                return (vec![C64::new(0.0, 0.0); nl * na], BracketTally::default());
            };
            let mut out = vec![C64::new(0.0, 0.0); nl * na];
            let mut tally = BracketTally::default();
            for j in 0..nl {
                if iso {
                    let lam = C64::new(grid.modulus(ip, b, j), 0.0);
                    let (v, t) = bracket_at(lam, &p, &theta, &omega, f1, f2, n_phi, band);
                    tally = tally.merge(t);
                    for a in 0..na {
                        out[j * na + a] = v * C64::from_polar(1.0, grid.angle(a));
                    }
                } else {
                    for a in 0..na {
                        let lam = grid.lambda(ip, b, j, a);
                        let (v, t) = bracket_at(lam, &p, &theta, &omega, f1, f2, n_phi, band);
                        tally = tally.merge(t);
                        out[j * na + a] = v;
                    }
                }
            }
            (out, tally)
        })
        .collect();
    if failures.load(Ordering::Relaxed) > 0 {
        return Err(Error::DegenerateFrame(grid.frame.nu().into()));
    }
    let mut field = LambdaField::zeros(grid);
    let mut tally = BracketTally::default();
    for ((ip, b), (vals, t)) in blocks.into_iter().zip(results) {
        let start = grid.index(ip, b, 0, 0);
        field.values[start..start + nl * na].copy_from_slice(&vals);
        tally = tally.merge(t);
    }
    Ok((field, tally))
}
