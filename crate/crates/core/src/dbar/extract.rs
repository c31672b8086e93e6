use super::field::LambdaField;
use crate::boundary::ScatteringSlice;
use crate::coords::{Branch, PSampling};
use crate::error::invalid;
use crate::fourier::{FrequencyField, FrequencyLayout};
use crate::quadrature::lagrange_weights;
use crate::{Result, C64};

fn frequency_field(grid: &crate::coords::LambdaGrid, values: Vec<C64>) -> FrequencyField {
    FrequencyField {
        points: grid.p_nodes.clone(),
        values,
        weights: grid.p_weights.clone(),
        band_radius: Some(grid.band()),
        layout: match grid.sampling {
            PSampling::Shells { .. } => FrequencyLayout::RadialShells,
            PSampling::Cartesian { .. } => FrequencyLayout::Scattered,
        },
    }
}

/// Limit of the solved field at `lambda -> 0` (`+`) or `lambda -> infinity`
/// (`-`): angular means on the three highest levels are extrapolated
/// quadratically in `1/s` to `1/s = 0`.
pub fn extract_vhat(field: &LambdaField, branch: Branch) -> Result<FrequencyField> {
    let g = &field.grid;
    let nl = g.n_levels();
    if nl < 3 {
        return Err(invalid("extraction needs at least three levels"));
    }
    let levels: Vec<usize> = (nl - 3..nl).collect();
    let inv: Vec<f64> = levels.iter().map(|&j| 1.0 / g.levels[j]).collect();
    let w = lagrange_weights(&inv, 0.0);
    let na = g.n_angular as f64;
    let values = (0..g.n_p())
        .map(|ip| {
            let limit: C64 = levels
                .iter()
                .zip(&w)
                .map(|(&j, wj)| (0..g.n_angular).map(|a| field.at(ip, branch, j, a)).sum::<C64>() / na * *wj)
                .sum();
            limit
        })
        .collect();
    Ok(frequency_field(g, values))
}

/// `h(k(p), l(p))`: the slice value at the canonical node on the `+` ring.
pub fn naive_vhat(slice: &ScatteringSlice) -> Result<FrequencyField> {
    let g = &slice.grid;
    let a = g.canonical_angle();
    let mut values = Vec::with_capacity(g.n_p());
    for ip in 0..g.n_p() {
        let i = slice.ring_index(ip, Branch::Plus, a);
        if !slice.valid[i] {
            return Err(invalid(format!("canonical node missing for p node {ip}")));
        }
        values.push(slice.values[i]);
    }
    Ok(frequency_field(g, values))
}

/// `max (1 + |p|)^mu |a - b|` over the nodes.
pub fn spread(a: &FrequencyField, b: &FrequencyField, mu: f64) -> f64 {
    a.points
        .iter()
        .zip(a.values.iter().zip(&b.values))
        .map(|(p, (x, y))| (1.0 + p.norm()).powf(mu) * (x - y).norm())
        .fold(0.0, f64::max)
}
