//! `(lambda, p)` coordinates on the variety `{(k, p) : k^2 = 0, p^2 = 2kp}`.

use crate::constants::small_root;
use crate::error::{invalid, Error, Result};
use crate::faddeev::{ComplexMomentum, OmegaPoint, ThetaPoint};
use crate::quadrature::gauss_legendre_on;
use crate::{Vec3, C64};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Orientation vector `nu` with `theta(p) = nu x p / |nu x p|` and
/// `omega(p) = p x theta / |p|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    nu: Vec3,
}

const AXIS_TOL: f64 = 1e-12;

impl Frame {
    pub fn new(nu: Vec3) -> Result<Self> {
        if (nu.norm() - 1.0).abs() > 1e-12 {
            return Err(invalid("orientation vector must have unit length"));
        }
        Ok(Self { nu })
    }

    pub fn nu(&self) -> Vec3 {
        self.nu
    }

    pub fn theta(&self, p: &Vec3) -> Result<Vec3> {
        let c = self.nu.cross(p);
        let cn = c.norm();
        if cn <= AXIS_TOL * p.norm() || p.norm() == 0.0 {
            return Err(Error::DegenerateFrame([p.x, p.y, p.z]));
        }
        Ok(c / cn)
    }

    pub fn omega(&self, p: &Vec3) -> Result<Vec3> {
        let t = self.theta(p)?;
        Ok(p.cross(&t) / p.norm())
    }

    pub fn basis(&self, p: &Vec3) -> Result<(Vec3, Vec3)> {
        let t = self.theta(p)?;
        Ok((t, p.cross(&t) / p.norm()))
    }

    /// Angle between `p` and the line through `nu`, in `[0, pi/2]`.
    pub fn angle_to_axis(&self, p: &Vec3) -> f64 {
        let c = (self.nu.dot(p).abs() / p.norm()).min(1.0);
        c.acos()
    }

    /// A unit vector orthogonal to `nu`.
    pub fn transverse(&self) -> Vec3 {
        let trial = if self.nu.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
        (trial - self.nu * self.nu.dot(&trial)).normalize()
    }
}

impl Default for Frame {
    fn default() -> Self {
        Self { nu: Vec3::z() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaPoint {
    pub lambda: C64,
    pub p: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `|lambda| < 1`.
    Plus,
    /// `|lambda| > 1`.
    Minus,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Plus, Branch::Minus];

    pub fn of(lambda: C64) -> Self {
        if lambda.norm() < 1.0 {
            Branch::Plus
        } else {
            Branch::Minus
        }
    }

    pub fn index(self) -> usize {
        match self {
            Branch::Plus => 0,
            Branch::Minus => 1,
        }
    }
}

/// `k = kappa_1 theta + kappa_2 omega + p/2` with
/// `kappa_1 = (i|p|/4)(lambda + 1/lambda)`, `kappa_2 = (|p|/4)(lambda - 1/lambda)`.
pub fn k_from_lambda(lp: &LambdaPoint, f: &Frame) -> Result<ComplexMomentum> {
    if lp.lambda.norm() == 0.0 {
        return Err(invalid("lambda must be non-zero"));
    }
    let (theta, omega) = f.basis(&lp.p)?;
    Ok(k_from_basis(lp.lambda, &lp.p, &theta, &omega))
}

pub(crate) fn k_from_basis(lambda: C64, p: &Vec3, theta: &Vec3, omega: &Vec3) -> ComplexMomentum {
    let pn = p.norm();
    let inv = 1.0 / lambda;
    let k1 = C64::new(0.0, pn / 4.0) * (lambda + inv);
    let k2 = (lambda - inv) * (pn / 4.0);
    ComplexMomentum::new_unchecked(theta * k1.re + omega * k2.re + p * 0.5, theta * k1.im + omega * k2.im)
}

/// `lambda = 2 k . (theta + i omega) / (i |p|)`.
pub fn lambda_from_k(k: &ComplexMomentum, p: &Vec3, f: &Frame) -> Result<C64> {
    let (theta, omega) = f.basis(p)?;
    Ok(lambda_from_basis(k, p, &theta, &omega))
}

pub(crate) fn lambda_from_basis(k: &ComplexMomentum, p: &Vec3, theta: &Vec3, omega: &Vec3) -> C64 {
    let dot = C64::new(k.re.dot(theta) - k.im.dot(omega), k.re.dot(omega) + k.im.dot(theta));
    2.0 * dot / C64::new(0.0, p.norm())
}

/// `xi = Re k (cos phi - 1) + k_perp sin phi`, a rotation of `Re k` about `Im k`.
pub fn xi_for(k: &ComplexMomentum, phi: f64) -> Vec3 {
    k.re * (phi.cos() - 1.0) + k.perp() * phi.sin()
}

pub fn xi_rotation(lp: &LambdaPoint, f: &Frame, phi: f64) -> Result<Vec3> {
    Ok(xi_for(&k_from_lambda(lp, f)?, phi))
}

/// `k(p) = p/2 + eta theta(p) + i rho omega(p)` with `eta = sqrt(rho^2 - |p|^2/4)`.
pub fn canonical_k(rho: f64, p: &Vec3, f: &Frame) -> Result<ComplexMomentum> {
    let (theta, omega) = f.basis(p)?;
    let eta2 = rho * rho - p.norm_squared() / 4.0;
    if eta2 < 0.0 {
        return Err(invalid("|p| exceeds 2 rho"));
    }
    Ok(ComplexMomentum::new_unchecked(p * 0.5 + theta * eta2.sqrt(), omega * rho))
}

/// `lambda` of the canonical point: `i q(rho/|p|)`.
pub fn canonical_lambda(rho: f64, p: &Vec3) -> C64 {
    C64::new(0.0, small_root(rho / p.norm()))
}

pub fn theta_point(lp: &LambdaPoint, f: &Frame) -> Result<ThetaPoint> {
    let k = k_from_lambda(lp, f)?;
    Ok(ThetaPoint::from_omega(&OmegaPoint { k, p: lp.p }))
}

/// `(|lambda| + 1/|lambda|) |p| / 4`, which equals `|Im k|`.
pub fn level(lp: &LambdaPoint) -> f64 {
    let r = lp.lambda.norm();
    lp.p.norm() * (r + 1.0 / r) / 4.0
}

pub fn on_ring(lp: &LambdaPoint, rho: f64, tol: f64) -> bool {
    (level(lp) - rho).abs() <= tol * rho.max(1.0)
}

pub fn in_annulus(lp: &LambdaPoint, rho: f64) -> bool {
    level(lp) > rho
}

/// Modulus `|lambda|` of the point at level `s` on the given branch.
pub fn modulus_at_level(s: f64, pn: f64, branch: Branch) -> f64 {
    let q = small_root(s / pn);
    match branch {
        Branch::Plus => q,
        Branch::Minus => 1.0 / q,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PSampling {
    /// `n` Gauss-Legendre radii along one direction orthogonal to `nu`
    /// (isotropic fields).
    Shells { n: usize },
    /// Cube of `n^3` cell-centred points, excluding a cone of half-angle
    /// `cone_deg` around the `nu` axis and the exterior of the band.
    Cartesian { n: usize, cone_deg: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaGridSpec {
    pub rho: f64,
    pub tau: f64,
    pub nu: [f64; 3],
    pub sampling: PSampling,
    /// Interior layers beyond the ring.
    pub n_radial: usize,
    pub n_angular: usize,
    /// `|Im k|` at the outermost interior layer, relative to `rho`.
    pub level_stretch: f64,
}

impl LambdaGridSpec {
    pub fn new(rho: f64, tau: f64, n_p: usize, n_radial: usize, n_angular: usize) -> Self {
        Self {
            rho,
            tau,
            nu: [0.0, 0.0, 1.0],
            sampling: PSampling::Shells { n: n_p },
            n_radial,
            n_angular,
            level_stretch: 40.0,
        }
    }
}

/// Product grid over `p` nodes, branches, levels `|Im k| = s_j` and angles.
///
/// Level `j = 0` is the boundary ring `s = rho`; higher levels are interior
/// and approach `lambda -> 0` (plus) or `lambda -> infinity` (minus).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaGrid {
    pub rho: f64,
    pub tau: f64,
    pub frame: Frame,
    pub sampling: PSampling,
    pub p_nodes: Vec<Vec3>,
    /// Volume weights of the `p` nodes (shell weights include `4 pi t^2`).
    pub p_weights: Vec<f64>,
    pub levels: Vec<f64>,
    pub n_angular: usize,
}

pub fn build_lambda_grid(rho: f64, tau: f64, nu: Vec3, n_p: usize, n_radial: usize, n_angular: usize) -> Result<LambdaGrid> {
    let mut spec = LambdaGridSpec::new(rho, tau, n_p, n_radial, n_angular);
    spec.nu = [nu.x, nu.y, nu.z];
    LambdaGrid::build(&spec)
}

impl LambdaGrid {
    pub fn build(spec: &LambdaGridSpec) -> Result<Self> {
        if !(spec.rho > 0.0) {
            return Err(invalid("rho must be positive"));
        }
        if !(spec.tau > 0.0 && spec.tau < 1.0) {
            return Err(invalid("tau must lie in (0, 1)"));
        }
        if spec.n_radial < 3 {
            return Err(invalid("at least 3 interior layers are needed for extraction"));
        }
        if spec.n_angular < 4 || spec.n_angular % 4 != 0 {
            return Err(invalid("angular node count must be a positive multiple of 4"));
        }
        if !(spec.level_stretch > 1.0) {
            return Err(invalid("level stretch must exceed 1"));
        }
        let frame = Frame::new(Vec3::from(spec.nu))?;
        let band = 2.0 * spec.tau * spec.rho;
        let (p_nodes, p_weights) = match spec.sampling {
            PSampling::Shells { n } => {
                if n == 0 {
                    return Err(invalid("empty p sampling"));
                }
                let dir = frame.transverse();
                let (t, w) = gauss_legendre_on(n, 0.0, band);
                (
                    t.iter().map(|t| dir * *t).collect(),
                    t.iter().zip(&w).map(|(t, w)| 4.0 * PI * t * t * w).collect(),
                )
            }
            PSampling::Cartesian { n, cone_deg } => {
                let d = 2.0 * band / n as f64;
                let coord = |i: usize| (i as f64 - n as f64 / 2.0 + 0.5) * d;
                let mut pts = Vec::new();
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            let p = Vec3::new(coord(i), coord(j), coord(k));
                            if p.norm() < band && frame.angle_to_axis(&p) > cone_deg.to_radians() {
                                pts.push(p);
                            }
                        }
                    }
                }
                let w = vec![d * d * d; pts.len()];
                (pts, w)
            }
        };
        if p_nodes.is_empty() {
            return Err(invalid("parameters yield an empty p grid"));
        }
        let levels = (0..=spec.n_radial)
            .map(|j| spec.rho * spec.level_stretch.powf(j as f64 / spec.n_radial as f64))
            .collect();
        Ok(Self {
            rho: spec.rho,
            tau: spec.tau,
            frame,
            sampling: spec.sampling.clone(),
            p_nodes,
            p_weights,
            levels,
            n_angular: spec.n_angular,
        })
    }

    pub fn band(&self) -> f64 {
        2.0 * self.tau * self.rho
    }

    pub fn n_p(&self) -> usize {
        self.p_nodes.len()
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn is_isotropic(&self) -> bool {
        matches!(self.sampling, PSampling::Shells { .. })
    }

    pub fn angle(&self, a: usize) -> f64 {
        2.0 * PI * a as f64 / self.n_angular as f64
    }

    /// Nodes per `(p, branch)` block.
    pub fn block_len(&self) -> usize {
        self.n_levels() * self.n_angular
    }

    pub fn len(&self) -> usize {
        self.n_p() * 2 * self.block_len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, ip: usize, branch: Branch, level: usize, a: usize) -> usize {
        ((ip * 2 + branch.index()) * self.n_levels() + level) * self.n_angular + a
    }

    pub fn modulus(&self, ip: usize, branch: Branch, level: usize) -> f64 {
        modulus_at_level(self.levels[level], self.p_nodes[ip].norm(), branch)
    }

    pub fn lambda(&self, ip: usize, branch: Branch, level: usize, a: usize) -> C64 {
        C64::from_polar(self.modulus(ip, branch, level), self.angle(a))
    }

    pub fn point(&self, ip: usize, branch: Branch, level: usize, a: usize) -> LambdaPoint {
        LambdaPoint {
            lambda: self.lambda(ip, branch, level, a),
            p: self.p_nodes[ip],
        }
    }

    /// Angular index of the canonical node `lambda = i q`.
    pub fn canonical_angle(&self) -> usize {
        self.n_angular / 4
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_axis_example() {
        let f = Frame::new(Vec3::z()).unwrap();
        let p = Vec3::x();
        assert!((f.theta(&p).unwrap() - Vec3::y()).norm() < 1e-15);
        assert!((f.omega(&p).unwrap() - Vec3::z()).norm() < 1e-15);
        assert!(f.theta(&(Vec3::z() * 2.0)).is_err());
    }

    #[test]
    fn symmetric_point() {
        let f = Frame::default();
        let p = Vec3::new(2.0, 0.0, 0.0);
        let k = k_from_lambda(&LambdaPoint { lambda: C64::new(1.0, 0.0), p }, &f).unwrap();
        let theta = f.theta(&p).unwrap();
        assert!((k.im - theta).norm() < 1e-15);
        assert!((k.re - p * 0.5).norm() < 1e-15);
    }

    #[test]
    fn canonical_point_has_lambda_i_q() {
        let f = Frame::default();
        let p = Vec3::new(1.2, -0.4, 0.3);
        let rho = 3.0;
        let k = canonical_k(rho, &p, &f).unwrap();
        let lam = lambda_from_k(&k, &p, &f).unwrap();
        assert!((lam - canonical_lambda(rho, &p)).norm() < 1e-12, "{lam}");
        assert!(k.square().norm() < 1e-12);
        assert!((k.im_norm() - rho).abs() < 1e-12);
    }

    #[test]
    fn grid_levels_and_rings() {
        let g = build_lambda_grid(4.0, 0.5, Vec3::z(), 6, 5, 16).unwrap();
        assert_eq!(g.len(), 6 * 2 * 6 * 16);
        for ip in 0..g.n_p() {
            let r = g.rho / g.p_nodes[ip].norm();
            assert!((g.modulus(ip, Branch::Plus, 0) - small_root(r)).abs() < 1e-12);
            assert!((g.modulus(ip, Branch::Minus, 0) - 1.0 / small_root(r)).abs() < 1e-9);
            for b in Branch::BOTH {
                for j in 0..g.n_levels() {
                    let lp = g.point(ip, b, j, 3);
                    assert_eq!(Branch::of(lp.lambda), b);
                    if j == 0 {
                        assert!(on_ring(&lp, g.rho, 1e-10));
                    } else {
                        assert!(in_annulus(&lp, g.rho));
                    }
                }
            }
        }
        assert!(build_lambda_grid(4.0, 1.0, Vec3::z(), 6, 5, 16).is_err());
        assert!(build_lambda_grid(4.0, 0.5, Vec3::z(), 6, 5, 10).is_err());
    }
}
