//! Faddeev functions at zero energy: the Green's function `G(x, k)`, complex
//! geometrical optics solutions `psi = e^{ikx} mu` and scattering amplitudes
//! `h(k, l)`.

mod green;
mod lippmann;
mod momentum;

pub use green::{faddeev_g, lattice_from_symbol, lattice_offset, symbol_from_samples, FaddeevGreen};
pub use lippmann::{
    scattering_h, solve_mu, CgoSolution, LippmannSchwinger, RadialScattering, SolveMethod, SolverOptions,
};
pub use momentum::{h_to_H, ComplexMomentum, OmegaPoint, ThetaPoint};
