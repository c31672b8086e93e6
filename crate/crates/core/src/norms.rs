use crate::error::{invalid, Result};
use crate::fourier::FrequencyField;
use crate::grid::VolumeGrid;
use crate::potential::Potential;

fn central_difference(grid: &VolumeGrid, f: &[f64], axis: usize) -> Vec<f64> {
    let n = grid.n();
    let h = grid.spacing();
    let stride = match axis {
        0 => n * n,
        1 => n,
        _ => 1,
    };
    (0..f.len())
        .map(|idx| {
            let (i, j, k) = grid.unravel(idx);
            let pos = [i, j, k][axis];
            let fwd = if pos + 1 < n { f[idx + stride] } else { 0.0 };
            let bwd = if pos > 0 { f[idx - stride] } else { 0.0 };
            (fwd - bwd) / (2.0 * h)
        })
        .collect()
}

/// `max_{|J| <= m} ||d^J v||_{L^1}` with derivatives by second-order central
/// differences (zero extension beyond the grid).
pub fn sobolev_norm_m1(v: &Potential, m: u32) -> Result<f64> {
    if m > v.smoothness {
        return Err(invalid(format!(
            "order {m} exceeds the potential's smoothness {}",
            v.smoothness
        )));
    }
    let grid = &v.grid;
    let dv = grid.cell_volume();
    let l1 = |f: &[f64]| f.iter().map(|x| x.abs()).sum::<f64>() * dv;
    let m = m as usize;
    let mut best = 0.0f64;
    let mut fa = v.values.clone();
    for a in 0..=m {
        if a > 0 {
            fa = central_difference(grid, &fa, 0);
        }
        let mut fab = fa.clone();
        for b in 0..=(m - a) {
            if b > 0 {
                fab = central_difference(grid, &fab, 1);
            }
            let mut fabc = fab.clone();
            for c in 0..=(m - a - b) {
                if c > 0 {
                    fabc = central_difference(grid, &fabc, 2);
                }
                best = best.max(l1(&fabc));
            }
        }
    }
    Ok(best)
}

/// `max_nodes (1 + |p|)^mu |u(p)|`.
pub fn weighted_sup_norm(u: &FrequencyField, mu: f64) -> f64 {
    u.points
        .iter()
        .zip(&u.values)
        .map(|(p, z)| (1.0 + p.norm()).powf(mu) * z.norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::RadialProfile;
    use crate::quadrature::gauss_legendre_on;
    use std::f64::consts::PI;

    #[test]
    fn zero_and_l1_of_bump() {
        let g = VolumeGrid::new(48, 1.1).unwrap();
        assert_eq!(sobolev_norm_m1(&Potential::zero(g), 4).unwrap(), 0.0);
        let v = Potential::reference(g).unwrap();
        let l1 = sobolev_norm_m1(&v, 0).unwrap();
        // radial oracle
        let (r, w) = gauss_legendre_on(400, 0.0, 0.8);
        let exact: f64 = r
            .iter()
            .zip(&w)
            .map(|(r, w)| 4.0 * PI * w * r * r * RadialProfile::REFERENCE.eval(*r))
            .sum();
        assert!((l1 - exact).abs() < 1e-3 * exact, "{l1} vs {exact}");
        let n2 = sobolev_norm_m1(&v.scaled(2.0), 3).unwrap();
        let n1 = sobolev_norm_m1(&v, 3).unwrap();
        assert!((n2 - 2.0 * n1).abs() <= 1e-12 * n2);
        assert!(sobolev_norm_m1(&v, 9).is_err());
    }
}
