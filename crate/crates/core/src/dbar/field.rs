use crate::coords::{lambda_from_k, Branch, LambdaGrid, PSampling};
use crate::faddeev::ComplexMomentum;
use crate::quadrature::lagrange_weights;
use crate::{Vec3, C64};
use serde::{Deserialize, Serialize};

/// A function on `{(k, p) : k^2 = 0, p^2 = 2kp}` outside the level `rho`.
///
/// `None` marks arguments the function cannot represent (below the boundary
/// level, beyond the sampled levels, or on the excluded axis); callers count
/// them as clipped and use zero.
pub trait OmegaFunction: Sync {
    fn eval(&self, k: &ComplexMomentum, p: &Vec3) -> Option<C64>;
}

impl<F> OmegaFunction for F
where
    F: Fn(&ComplexMomentum, &Vec3) -> Option<C64> + Sync,
{
    fn eval(&self, k: &ComplexMomentum, p: &Vec3) -> Option<C64> {
        self(k, p)
    }
}

/// Branch of `(k, p)` without reference to a frame: `|lambda| < 1` exactly
/// when `(Re k x Im k) . p > 0`.
pub fn branch_of(k: &ComplexMomentum, p: &Vec3) -> Branch {
    if k.re.cross(&k.im).dot(p) > 0.0 {
        Branch::Plus
    } else {
        Branch::Minus
    }
}

/// Samples on a [`LambdaGrid`]; level 0 holds the boundary ring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaField {
    pub grid: LambdaGrid,
    pub values: Vec<C64>,
}

impl LambdaField {
    pub fn zeros(grid: &LambdaGrid) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![C64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_fn<F: Fn(usize, Branch, usize, usize) -> C64>(grid: &LambdaGrid, f: F) -> Self {
        let mut out = Self::zeros(grid);
        for ip in 0..grid.n_p() {
            for b in Branch::BOTH {
                for j in 0..grid.n_levels() {
                    for a in 0..grid.n_angular {
                        out.values[grid.index(ip, b, j, a)] = f(ip, b, j, a);
                    }
                }
            }
        }
        out
    }

    pub fn at(&self, ip: usize, b: Branch, level: usize, a: usize) -> C64 {
        self.values[self.grid.index(ip, b, level, a)]
    }

    pub fn set(&mut self, ip: usize, b: Branch, level: usize, a: usize, v: C64) {
        let i = self.grid.index(ip, b, level, a);
        self.values[i] = v;
    }

    pub fn boundary_values(&self) -> Vec<C64> {
        let g = &self.grid;
        (0..g.n_p())
            .flat_map(|ip| Branch::BOTH.into_iter().flat_map(move |b| (0..g.n_angular).map(move |a| (ip, b, a))))
            .map(|(ip, b, a)| self.at(ip, b, 0, a))
            .collect()
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(C64::new(-1.0, 0.0)))
    }

    /// `max (1 + |p|)^mu |U|` over all nodes (interior and ring).
    pub fn weighted_norm(&self, mu: f64) -> f64 {
        let g = &self.grid;
        let block = 2 * g.block_len();
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| (1.0 + g.p_nodes[i / block].norm()).powf(mu) * v.norm())
            .fold(0.0, f64::max)
    }

    /// Same norm restricted to interior nodes.
    pub fn interior_weighted_norm(&self, mu: f64) -> f64 {
        let g = &self.grid;
        let mut best = 0.0f64;
        for ip in 0..g.n_p() {
            let w = (1.0 + g.p_nodes[ip].norm()).powf(mu);
            for b in Branch::BOTH {
                for j in 1..g.n_levels() {
                    for a in 0..g.n_angular {
                        best = best.max(w * self.at(ip, b, j, a).norm());
                    }
                }
            }
        }
        best
    }

    /// Angular mean at each `(p, branch, level)`.
    pub fn ring_means(&self) -> Vec<C64> {
        let g = &self.grid;
        let na = g.n_angular as f64;
        (0..g.n_p() * 2 * g.n_levels())
            .map(|blk| self.values[blk * g.n_angular..(blk + 1) * g.n_angular].iter().sum::<C64>() / na)
            .collect()
    }

    pub fn interpolant(&self) -> FieldInterpolant<'_> {
        FieldInterpolant::new(self)
    }
}

/// Evaluation of a [`LambdaField`] at arbitrary `(k, p)` with the cutoff
/// `U = 0` for `|p| >= 2 tau rho`.
pub struct FieldInterpolant<'a> {
    field: &'a LambdaField,
    means: Vec<C64>,
    shell_radii: Vec<f64>,
    cube: Option<CubeIndex>,
}

struct CubeIndex {
    n: usize,
    spacing: f64,
    slot: Vec<Option<usize>>,
}

impl<'a> FieldInterpolant<'a> {
    fn new(field: &'a LambdaField) -> Self {
        let g = &field.grid;
        let cube = match g.sampling {
            PSampling::Cartesian { n, .. } => {
                let spacing = 2.0 * g.band() / n as f64;
                let mut slot = vec![None; n * n * n];
                for (ip, p) in g.p_nodes.iter().enumerate() {
                    let c = |x: f64| ((x / spacing) + n as f64 / 2.0 - 0.5).round() as usize;
                    slot[(c(p.x) * n + c(p.y)) * n + c(p.z)] = Some(ip);
                }
                Some(CubeIndex { n, spacing, slot })
            }
            PSampling::Shells { .. } => None,
        };
        Self {
            field,
            means: if cube.is_none() { field.ring_means() } else { Vec::new() },
            shell_radii: g.p_nodes.iter().map(|p| p.norm()).collect(),
            cube,
        }
    }

    /// Fractional level position, `None` outside the sampled levels.
    fn level_position(&self, s: f64) -> Option<f64> {
        let g = &self.field.grid;
        let top = (g.n_levels() - 1) as f64;
        let stretch = g.levels[g.n_levels() - 1] / g.rho;
        let u = top * (s / g.rho).ln() / stretch.ln();
        if u < -1e-9 || u > top + 1e-9 {
            return None;
        }
        Some(u.clamp(0.0, top))
    }

    fn level_stencil(&self, u: f64) -> [(usize, f64); 2] {
        let top = self.field.grid.n_levels() - 1;
        let j0 = (u.floor() as usize).min(top);
        let frac = u - j0 as f64;
        if frac < 1e-9 || j0 == top {
            [(j0, 1.0), (j0, 0.0)]
        } else {
            [(j0, 1.0 - frac), (j0 + 1, frac)]
        }
    }

    fn eval_isotropic(&self, t: f64, branch: Branch, u: f64) -> C64 {
        let g = &self.field.grid;
        let np = g.n_p();
        let m = np.min(4);
        let pos = self.shell_radii.partition_point(|r| *r < t);
        let start = pos.saturating_sub(m / 2).min(np - m);
        let nodes = &self.shell_radii[start..start + m];
        let w = lagrange_weights(nodes, t);
        let mut acc = C64::new(0.0, 0.0);
        for (lvl, lw) in self.level_stencil(u) {
            if lw == 0.0 {
                continue;
            }
            for (i, pw) in w.iter().enumerate() {
                let ip = start + i;
                acc += self.means[(ip * 2 + branch.index()) * g.n_levels() + lvl] * (lw * pw);
            }
        }
        acc
    }

    fn eval_cartesian(&self, k: &ComplexMomentum, p: &Vec3, branch: Branch, u: f64) -> Option<C64> {
        let g = &self.field.grid;
        let cube = self.cube.as_ref()?;
        let pos = |x: f64| x / cube.spacing + cube.n as f64 / 2.0 - 0.5;
        let f = [pos(p.x), pos(p.y), pos(p.z)];
        let base = f.map(|x| x.floor());
        let mut acc = C64::new(0.0, 0.0);
        let mut wsum = 0.0;
        for corner in 0..8usize {
            let mut w = 1.0;
            let mut idx = [0usize; 3];
            let mut inside = true;
            for d in 0..3 {
                let bit = ((corner >> d) & 1) as f64;
                let c = base[d] + bit;
                let frac = f[d] - base[d];
                w *= if bit == 1.0 { frac } else { 1.0 - frac };
                if c < 0.0 || c >= cube.n as f64 {
                    inside = false;
                } else {
                    idx[d] = c as usize;
                }
            }
            if !inside || w == 0.0 {
                continue;
            }
            let Some(ip) = cube.slot[(idx[0] * cube.n + idx[1]) * cube.n + idx[2]] else {
                continue;
            };
            // angle of the argument in the frame of this corner's p
            let lam = lambda_from_k(k, &g.p_nodes[ip], &g.frame).ok()?;
            let na = g.n_angular;
            let t = lam.arg().rem_euclid(2.0 * std::f64::consts::PI) / (2.0 * std::f64::consts::PI) * na as f64;
            let a0 = t.floor() as usize % na;
            let a1 = (a0 + 1) % na;
            let fa = t - t.floor();
            for (lvl, lw) in self.level_stencil(u) {
                if lw == 0.0 {
                    continue;
                }
                let v = self.field.at(ip, branch, lvl, a0) * (1.0 - fa) + self.field.at(ip, branch, lvl, a1) * fa;
                acc += v * (w * lw);
            }
            wsum += w;
        }
        if wsum == 0.0 {
            return None;
        }
        Some(acc / wsum)
    }
}

impl OmegaFunction for FieldInterpolant<'_> {
    fn eval(&self, k: &ComplexMomentum, p: &Vec3) -> Option<C64> {
        let g = &self.field.grid;
        let t = p.norm();
        if t >= g.band() {
            return Some(C64::new(0.0, 0.0));
        }
        let u = self.level_position(k.im_norm())?;
        let branch = branch_of(k, p);
        if self.cube.is_some() {
            if g.frame.angle_to_axis(p) < 1e-6 {
                return None;
            }
            self.eval_cartesian(k, p, branch, u)
        } else {
            Some(self.eval_isotropic(t, branch, u))
        }
    }
}
