//! Numerical reconstruction of a compactly supported potential `v` on the unit
//! ball from its zero-energy Dirichlet-to-Neumann map, through Faddeev
//! scattering amplitudes and a non-linear D-bar equation in the spectral
//! parameter.
//!
//! The pipeline is `forward` (DtN maps) -> `boundary` (scattering data from
//! boundary measurements) or `faddeev` (scattering data from `v` itself) ->
//! `dbar` (effectivized high-frequency estimate of the Fourier transform) ->
//! `fourier` (band-limited inversion).

pub mod boundary;
pub mod constants;
pub mod container;
pub mod coords;
pub mod dbar;
pub mod error;
pub mod experiment;
pub mod faddeev;
pub mod forward;
pub mod fourier;
pub mod grid;
pub mod harmonics;
pub mod linalg;
pub mod norms;
pub mod potential;
pub mod quadrature;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

pub type Vec3 = nalgebra::Vector3<f64>;
