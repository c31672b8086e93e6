use gelfand_core::boundary::{
    h_from_dtn, h_on_slice, incident_coefficients, kernel_a, solve_boundary_psi, BoundaryScattering,
};
use gelfand_core::constants::c8_constant;
use gelfand_core::coords::{build_lambda_grid, canonical_k, theta_point, Branch, Frame};
use gelfand_core::faddeev::{scattering_h, ComplexMomentum, OmegaPoint, ThetaPoint};
use gelfand_core::forward::{dtn_radial_profile, dtn_zero, noise_matrix, opnorm, NoiseKind, NoiseModel};
use gelfand_core::grid::VolumeGrid;
use gelfand_core::harmonics::{eval_all, HarmonicBasis};
use gelfand_core::potential::{Potential, RadialProfile};
use gelfand_core::{Vec3, C64};
use nalgebra::DVector;

fn point_at(rho: f64, p: Vec3) -> ThetaPoint {
    let k = canonical_k(rho, &p, &Frame::default()).unwrap();
    ThetaPoint::from_omega(&OmegaPoint::new(k, p).unwrap())
}

fn degree_for(rho: f64) -> usize {
    (3.5 * rho + 8.0).ceil() as usize
}

#[test]
fn equal_maps_give_zero_kernel_and_amplitude() {
    let phi = dtn_radial_profile(&RadialProfile::REFERENCE, 8).unwrap();
    let basis = HarmonicBasis::new(8);
    let pt = point_at(2.0, Vec3::new(0.7, 0.1, 0.0));
    let a = kernel_a(&phi, &phi, &pt.k, &basis).unwrap();
    assert!(a.matrix.iter().all(|z| *z == C64::new(0.0, 0.0)));
    assert_eq!(h_from_dtn(&phi, &phi, &pt, &basis).unwrap(), C64::new(0.0, 0.0));
}

#[test]
fn zero_kernel_returns_the_plane_wave() {
    let max_degree = 16;
    let basis = HarmonicBasis::new(max_degree);
    let phi = dtn_zero(max_degree);
    let k = canonical_k(0.8, &Vec3::new(0.3, 0.0, 0.0), &Frame::default()).unwrap();
    let a = kernel_a(&phi, &phi, &k, &basis).unwrap();
    let psi = solve_boundary_psi(&a, &basis).unwrap();
    assert_eq!(psi.coeffs, incident_coefficients(&basis, &k));
    let q = basis.quadrature();
    for (j, x) in q.points.iter().enumerate() {
        let y = eval_all(max_degree, q.cos_theta[j], q.azimuth[j]);
        let synth: C64 = y.iter().zip(&psi.coeffs).map(|(y, c)| c * y).sum();
        let exact = (C64::i() * k.dot_real(x)).exp();
        assert!((synth - exact).norm() < 1e-10, "{synth} vs {exact}");
    }
}

#[test]
fn boundary_system_meets_residual_contract() {
    for rho in [1.0, 3.0] {
        let l = degree_for(rho);
        let basis = HarmonicBasis::new(l);
        let phi_v = dtn_radial_profile(&RadialProfile::REFERENCE, l).unwrap();
        let pt = point_at(rho, Vec3::new(0.5, 0.0, 0.0));
        let a = kernel_a(&phi_v, &dtn_zero(l), &pt.k, &basis).unwrap();
        let psi = solve_boundary_psi(&a, &basis).unwrap();
        assert!(psi.residual <= 1e-10, "rho={rho}: {}", psi.residual);
        assert!(psi.condition.is_finite() && psi.condition >= 1.0);
    }
}

#[test]
fn weak_kernel_follows_neumann_series() {
    let l = 12;
    let basis = HarmonicBasis::new(l);
    let pt = point_at(1.5, Vec3::new(0.4, 0.2, 0.0));
    let defect = |eps: f64| {
        let phi_v = dtn_radial_profile(&RadialProfile::REFERENCE.scaled(eps), l).unwrap();
        let a = kernel_a(&phi_v, &dtn_zero(l), &pt.k, &basis).unwrap();
        let psi = solve_boundary_psi(&a, &basis).unwrap();
        let c1 = DVector::from_vec(incident_coefficients(&basis, &pt.k));
        let first = &c1 + &a.matrix * &c1;
        (DVector::from_vec(psi.coeffs) - first).norm()
    };
    let (d1, d2) = (defect(0.02), defect(0.01));
    let order = (d1 / d2).log2();
    assert!((order - 2.0).abs() < 0.1, "order {order}");
}

#[test]
fn boundary_route_matches_lippmann_schwinger() {
    let rho = 2.0;
    let l = degree_for(rho);
    let phi_v = dtn_radial_profile(&RadialProfile::REFERENCE, l).unwrap();
    let basis = HarmonicBasis::new(l);
    let v = Potential::reference(VolumeGrid::new(32, 1.1).unwrap()).unwrap();
    for p in [Vec3::new(0.5, 0.0, 0.0), Vec3::new(1.0, 0.6, 0.3)] {
        let pt = point_at(rho, p);
        let from_boundary = h_from_dtn(&phi_v, &dtn_zero(l), &pt, &basis).unwrap();
        let direct = scattering_h(&v, &pt).unwrap();
        let rel = (from_boundary - direct).norm() / direct.norm();
        assert!(rel < 0.05, "p={p:?}: {from_boundary} vs {direct} ({rel:e})");
    }
}

#[test]
fn rotation_shortcut_matches_full_solve() {
    let rho = 2.5;
    let l = degree_for(rho);
    let phi_v = dtn_radial_profile(&RadialProfile::REFERENCE, l).unwrap();
    let phi_0 = dtn_zero(l);
    let fast = BoundaryScattering::new(&phi_v, &phi_0).unwrap();
    assert!(fast.is_invariant());
    let slow = BoundaryScattering::new(&phi_v, &phi_0).unwrap().without_symmetry();
    let grid = build_lambda_grid(rho, 0.5, Vec3::z(), 3, 3, 8).unwrap();
    for ip in 0..grid.n_p() {
        for b in Branch::BOTH {
            for a in [0, 3] {
                let pt = theta_point(&grid.point(ip, b, 0, a), &grid.frame).unwrap();
                let (x, y) = (fast.eval_theta(&pt).unwrap(), slow.eval_theta(&pt).unwrap());
                assert!((x - y).norm() <= 1e-9 * y.norm().max(1e-12), "{x} vs {y}");
            }
        }
    }
}

#[test]
fn non_invariant_difference_disables_the_shortcut() {
    let l = 6;
    let noise = noise_matrix(
        l,
        &NoiseModel {
            kind: NoiseKind::GaussianEntrywise,
            delta: 1e-3,
            seed: 1,
        },
    );
    let mut phi_v = dtn_zero(l);
    phi_v.matrix += noise;
    assert!(!BoundaryScattering::new(&phi_v, &dtn_zero(l)).unwrap().is_invariant());
}

#[test]
fn amplitudes_respect_exponential_bound() {
    let sigma: f64 = 2.0;
    for rho in [1.0, 2.0, 3.0] {
        let l = degree_for(rho);
        let phi_v = dtn_radial_profile(&RadialProfile::REFERENCE, l).unwrap();
        let phi_0 = dtn_zero(l);
        let grid = build_lambda_grid(rho, 0.5, Vec3::z(), 6, 3, 8).unwrap();
        let slice = h_on_slice(&phi_v, &phi_0, &grid).unwrap();
        assert_eq!(slice.masked_fraction(), 0.0);
        let bound = c8_constant() * sigma * sigma * (2.0 * rho).exp() * opnorm(&phi_v.difference(&phi_0).unwrap());
        for h in &slice.values {
            assert!(h.norm() <= bound, "rho={rho}: |h|={} > {bound}", h.norm());
        }
    }
}

#[test]
fn amplitude_is_linear_in_weak_data() {
    // first order: h is linear in Phi_v - Phi_0 as the difference shrinks
    let l = 10;
    let basis = HarmonicBasis::new(l);
    let pt = point_at(1.2, Vec3::new(0.6, 0.0, 0.0));
    let h = |eps: f64| {
        let phi_v = dtn_radial_profile(&RadialProfile::REFERENCE.scaled(eps), l).unwrap();
        h_from_dtn(&phi_v, &dtn_zero(l), &pt, &basis).unwrap()
    };
    let (a, b) = (h(1e-4), h(2e-4));
    assert!((b - 2.0 * a).norm() < 1e-3 * b.norm());
}

#[test]
fn invalid_momentum_pairs_are_rejected() {
    let k = ComplexMomentum::from_frame(1.0, Vec3::x(), Vec3::y()).unwrap();
    let l = ComplexMomentum::from_frame(2.0, Vec3::x(), Vec3::y()).unwrap();
    assert!(ThetaPoint::new(k, l).is_err());
}
