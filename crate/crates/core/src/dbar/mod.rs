//! Nonlinear d-bar step: from ring data `H(zeta, p)` on `|Im k| = rho` to the
//! limits `v_hat^{+-}(p)` at `lambda -> 0, infinity`.
//!
//! Fields live on [`LambdaGrid`](crate::coords::LambdaGrid) levels
//! `s = |Im k| >= rho` on both branches. The interior equation
//! `U = H0 + M(U)` drops the remainder term and is solved by successive
//! approximations.

mod bracket;
mod cauchy;
mod extract;
mod field;
mod solve;

pub use bracket::{bracket_at, poisson_bracket, BracketTally, DEFAULT_PHI_NODES};
pub use cauchy::{area_op_M, cauchy_H0, solid_cauchy};
pub use extract::{extract_vhat, naive_vhat, spread};
pub use field::{branch_of, FieldInterpolant, LambdaField, OmegaFunction};
pub use solve::{contraction_of, solve_H, solve_with, DbarOptions, DbarSolveReport};

use crate::boundary::ScatteringSlice;
use crate::coords::Branch;
use crate::fourier::FrequencyField;
use crate::Result;
use serde::{Deserialize, Serialize};

/// Field carrying the slice on level 0 and zeros elsewhere.
pub fn ring_field(slice: &ScatteringSlice) -> LambdaField {
    let g = &slice.grid;
    let mut f = LambdaField::zeros(g);
    for ip in 0..g.n_p() {
        for b in Branch::BOTH {
            for a in 0..g.n_angular {
                f.set(ip, b, 0, a, slice.value(ip, b, a));
            }
        }
    }
    f
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DbarOutcome {
    pub field: LambdaField,
    pub plus: FrequencyField,
    pub minus: FrequencyField,
    pub naive: FrequencyField,
    pub report: DbarSolveReport,
}

/// Ring data to `v_hat^{+-}` and the naive values; the spread is measured
/// with weight `(1 + |p|)^mu`.
pub fn run_dbar(slice: &ScatteringSlice, opts: &DbarOptions, mu: f64) -> Result<DbarOutcome> {
    let h0 = cauchy_H0(&ring_field(slice));
    let (field, mut report) = solve_with(&h0, opts)?;
    let plus = extract_vhat(&field, Branch::Plus)?;
    let minus = extract_vhat(&field, Branch::Minus)?;
    report.extraction_spread = spread(&plus, &minus, mu);
    let naive = naive_vhat(slice)?;
    Ok(DbarOutcome {
        field,
        plus,
        minus,
        naive,
        report,
    })
}
