use super::bracket::{BracketTally, DEFAULT_PHI_NODES};
use super::cauchy::area_op_M;
use super::field::LambdaField;
use crate::Result;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DbarOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub n_phi: usize,
}

impl Default for DbarOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 40,
            n_phi: DEFAULT_PHI_NODES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DbarSolveReport {
    pub iterations: usize,
    /// `max |U_{n+1} - U_n|` over all nodes, one entry per iteration.
    pub residual_history: Vec<f64>,
    /// Geometric-mean ratio of successive residuals, see [`contraction_of`].
    pub contraction_estimate: f64,
    /// Weighted norm of `v_hat^+ - v_hat^-`; filled by extraction.
    pub extraction_spread: f64,
    pub converged: bool,
    pub tally: BracketTally,
}

impl DbarSolveReport {
    /// Residuals after `burn_in` iterations never increase.
    pub fn is_monotone_after(&self, burn_in: usize) -> bool {
        self.residual_history.iter().skip(burn_in).collect::<Vec<_>>().windows(2).all(|w| w[1] <= w[0])
    }
}

/// Geometric mean of successive residual ratios after the first iterate,
/// ignoring residuals at or below `floor`. Single ratios beat between
/// coupled modes of nearly equal size, so one ratio is a poor monitor.
pub fn contraction_of(history: &[f64], floor: f64) -> f64 {
    let kept: Vec<f64> = history.iter().copied().take_while(|r| *r > floor).collect();
    let window = if kept.len() >= 3 { &kept[1..] } else { &kept[..] };
    match window {
        [first, .., last] if *first > 0.0 => (last / first).powf(1.0 / (window.len() - 1) as f64),
        _ => 0.0,
    }
}

/// Successive approximations `U_{n+1} = H0 + M(U_n)` from `U_0 = H0`.
///
/// Non-convergence is not an error: the last iterate is returned with
/// `converged = false` and the observed contraction.
#[allow(non_snake_case)]
pub fn solve_H(h0: &LambdaField, tol: f64, max_iter: usize) -> Result<(LambdaField, DbarSolveReport)> {
    solve_with(
        h0,
        &DbarOptions {
            tol,
            max_iter,
            ..DbarOptions::default()
        },
    )
}

pub fn solve_with(h0: &LambdaField, opts: &DbarOptions) -> Result<(LambdaField, DbarSolveReport)> {
    let mut u = h0.clone();
    let mut history = Vec::new();
    let mut tally = BracketTally::default();
    let mut converged = false;
    for _ in 0..opts.max_iter.max(1) {
        let (m, t) = area_op_M(&u, opts.n_phi)?;
        tally = t;
        let next = h0.add(&m);
        let r = next
            .values
            .iter()
            .zip(&u.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        u = next;
        history.push(r);
        if r <= opts.tol {
            converged = true;
            break;
        }
        if !r.is_finite() || history.len() > 3 && r > 1e3 * history[0].max(f64::MIN_POSITIVE) {
            break;
        }
    }
    let scale = u.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let contraction_estimate = contraction_of(&history, 1e3 * f64::EPSILON * scale);
    Ok((
        u,
        DbarSolveReport {
            iterations: history.len(),
            residual_history: history,
            contraction_estimate,
            extraction_spread: 0.0,
            converged,
            tally,
        },
    ))
}
