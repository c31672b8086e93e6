use crate::error::{invalid, Error, Result};
use crate::{Vec3, C64};
use serde::{Deserialize, Serialize};

/// `k = re + i im` with `k . k = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexMomentum {
    pub re: Vec3,
    pub im: Vec3,
}

const NULL_TOL: f64 = 1e-10;

impl ComplexMomentum {
    /// Validates `|re| = |im|` and `re . im = 0` (relative to `|im|^2`).
    pub fn new(re: Vec3, im: Vec3) -> Result<Self> {
        let k = Self { re, im };
        let scale = im.norm_squared().max(re.norm_squared()).max(1.0);
        let residual = k.square().norm() / scale;
        if residual > NULL_TOL {
            return Err(Error::NotNull { residual });
        }
        if im.norm() == 0.0 {
            return Err(invalid("momentum must be non-zero"));
        }
        Ok(k)
    }

    pub(crate) fn new_unchecked(re: Vec3, im: Vec3) -> Self {
        Self { re, im }
    }

    /// `s (a + i b)` for orthonormal `a`, `b`.
    pub fn from_frame(s: f64, a: Vec3, b: Vec3) -> Result<Self> {
        Self::new(a * s, b * s)
    }

    pub fn components(&self) -> [C64; 3] {
        [
            C64::new(self.re.x, self.im.x),
            C64::new(self.re.y, self.im.y),
            C64::new(self.re.z, self.im.z),
        ]
    }

    /// `k . k` (complex bilinear).
    pub fn square(&self) -> C64 {
        C64::new(
            self.re.norm_squared() - self.im.norm_squared(),
            2.0 * self.re.dot(&self.im),
        )
    }

    /// `k . x` for real `x`.
    pub fn dot_real(&self, x: &Vec3) -> C64 {
        C64::new(self.re.dot(x), self.im.dot(x))
    }

    pub fn im_norm(&self) -> f64 {
        self.im.norm()
    }

    pub fn neg(&self) -> Self {
        Self {
            re: -self.re,
            im: -self.im,
        }
    }

    pub fn shifted(&self, real: &Vec3) -> Self {
        Self {
            re: self.re + real,
            im: self.im,
        }
    }

    /// `k_perp = Im k x Re k / |Im k|`.
    pub fn perp(&self) -> Vec3 {
        self.im.cross(&self.re) / self.im.norm()
    }
}

/// `(k, l)` with `Im k = Im l`; `p = k - l` is real.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaPoint {
    pub k: ComplexMomentum,
    pub l: ComplexMomentum,
}

impl ThetaPoint {
    pub fn new(k: ComplexMomentum, l: ComplexMomentum) -> Result<Self> {
        let d = (k.im - l.im).norm();
        if d > NULL_TOL * k.im.norm().max(1.0) {
            return Err(invalid(format!("Im k and Im l differ by {d:e}")));
        }
        Ok(Self { k, l })
    }

    pub fn p(&self) -> Vec3 {
        self.k.re - self.l.re
    }

    pub fn from_omega(pt: &OmegaPoint) -> Self {
        Self {
            k: pt.k,
            l: pt.k.shifted(&-pt.p),
        }
    }
}

/// `(k, p)` with `p^2 = 2 k . p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaPoint {
    pub k: ComplexMomentum,
    pub p: Vec3,
}

impl OmegaPoint {
    pub fn new(k: ComplexMomentum, p: Vec3) -> Result<Self> {
        let pt = Self { k, p };
        let residual = pt.constraint_residual();
        if residual > NULL_TOL * k.im.norm_squared().max(1.0) {
            return Err(Error::OffVariety { residual });
        }
        Ok(pt)
    }

    /// `|p^2 - 2 k . p|`.
    pub fn constraint_residual(&self) -> f64 {
        (C64::new(self.p.norm_squared(), 0.0) - 2.0 * self.k.dot_real(&self.p)).norm()
    }
}

/// Relabels `h(k, l)` as `H(k, p)` with `p = k - l`.
#[allow(non_snake_case)]
pub fn h_to_H(pt: &ThetaPoint, value: C64) -> (OmegaPoint, C64) {
    (
        OmegaPoint {
            k: pt.k,
            p: pt.p(),
        },
        value,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_k() -> ComplexMomentum {
        ComplexMomentum::from_frame(2.0, Vec3::x(), Vec3::y()).unwrap()
    }

    #[test]
    fn validation() {
        assert!(ComplexMomentum::new(Vec3::x(), Vec3::x()).is_err());
        assert!(ComplexMomentum::new(Vec3::x(), Vec3::y() * 1.1).is_err());
        let k = sample_k();
        assert!(k.square().norm() < 1e-14);
        assert!((k.perp() - Vec3::new(0.0, 0.0, -2.0)).norm() < 1e-14);
    }

    #[test]
    fn relabel_round_trip() {
        let k = sample_k();
        // p in the plane orthogonal to Im k on the circle p^2 = 2 Re k . p
        let p = Vec3::new(1.0, 0.0, 3f64.sqrt());
        let l = k.shifted(&-p);
        let pt = ThetaPoint::new(k, l).unwrap();
        let (om, v) = h_to_H(&pt, C64::new(1.0, 2.0));
        assert_eq!(om.p, pt.p());
        assert_eq!(v, C64::new(1.0, 2.0));
        assert!(om.constraint_residual() < 1e-10);
        let back = ThetaPoint::from_omega(&om);
        assert!((back.l.re - l.re).norm() < 1e-15 && back.l.im == l.im);
        assert!(OmegaPoint::new(k, Vec3::new(0.0, 0.0, 1.0)).is_err());
    }
}
