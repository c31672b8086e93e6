use gelfand_core::coords::{theta_point, Frame, LambdaPoint};
use gelfand_core::faddeev::{
    faddeev_g, lattice_from_symbol, lattice_offset, scattering_h, symbol_from_samples, solve_mu, ComplexMomentum, FaddeevGreen, LippmannSchwinger, RadialScattering, SolveMethod,
    SolverOptions,
};
use gelfand_core::fourier::{dual_points, fourier_at};
use gelfand_core::grid::VolumeGrid;
use gelfand_core::potential::Potential;
use gelfand_core::quadrature::gauss_legendre_on;
use gelfand_core::{Vec3, C64};
use std::f64::consts::PI;

fn momentum(s: f64) -> ComplexMomentum {
    let a = Vec3::new(0.3, 1.0, -0.2).normalize();
    let b = a.cross(&Vec3::new(1.0, 0.0, 0.4)).normalize();
    ComplexMomentum::from_frame(s, a, b).unwrap()
}

/// `G = -1/(4 pi |x|) + (s / 4 pi) \int_0^1 J0(r s rho_perp) e^{-r Im k . x} dr`.
fn bessel_oracle(k: &ComplexMomentum, x: &Vec3) -> f64 {
    let s = k.im_norm();
    let c = k.im.dot(x);
    let perp = (x - k.im * (c / (s * s))).norm();
    let (r, w) = gauss_legendre_on(400, 0.0, 1.0);
    let integral: f64 = r.iter().zip(&w).map(|(r, w)| w * libm::j0(r * s * perp) * (-r * c).exp()).sum();
    -1.0 / (4.0 * PI * x.norm()) + s / (4.0 * PI) * integral
}

#[test]
fn closed_form_matches_bessel_integral() {
    for s in [0.5, 2.0, 6.0] {
        let k = momentum(s);
        let green = FaddeevGreen::new(k, 2.0);
        for x in [
            Vec3::new(0.3, -0.2, 0.5),
            Vec3::new(-1.1, 0.4, 0.2),
            Vec3::new(0.05, 0.02, -0.01),
            k.im / s * 0.7,
            -k.im / s * 0.7,
            k.re / s * 0.9 + k.perp() * 0.3,
        ] {
            let z = green.big_g(&x);
            let oracle = bessel_oracle(&k, &x);
            assert!((z - oracle).abs() < 1e-9 * (1.0 + oracle.abs()), "s={s} x={x:?}: {z} vs {oracle}");
        }
    }
}

#[test]
fn closed_form_is_harmonic_away_from_origin() {
    let k = momentum(3.0);
    let green = FaddeevGreen::new(k, 2.0);
    let step = 1e-3;
    for x in [Vec3::new(0.4, 0.1, -0.3), Vec3::new(-0.2, 0.6, 0.5)] {
        let centre = green.big_g(&x);
        let lap: f64 = (0..3)
            .map(|d| {
                let mut e = Vec3::zeros();
                e[d] = step;
                green.big_g(&(x + e)) + green.big_g(&(x - e)) - 2.0 * centre
            })
            .sum::<f64>()
            / (step * step);
        let scale = 1.0 / (4.0 * PI * x.norm().powi(3));
        assert!(lap.abs() < 1e-4 * scale, "laplacian {lap} at {x:?}");
    }
}

#[test]
fn small_g_carries_the_oscillating_phase() {
    let k = momentum(2.0);
    let green = FaddeevGreen::new(k, 2.0);
    let x = Vec3::new(0.2, -0.4, 0.3);
    let back = green.small_g(&x) * (C64::i() * k.dot_real(&x)).exp();
    assert!((back.re - green.big_g(&x)).abs() < 1e-13 && back.im.abs() < 1e-13);
    assert!((green.harmonic_at_origin() - 2.0 / (4.0 * PI)).abs() < 1e-15);
}

/// `e^{-ikx} Delta (e^{ikx} g)` in the grid's own spectral calculus: the
/// symbol `-(xi^2 + 2 k xi)` applied to the samples and transformed back.
fn spectral_operator_image(n: usize, s: f64) -> (VolumeGrid, Vec<C64>) {
    let grid = VolumeGrid::new(n, 2.0).unwrap();
    let k = momentum(s);
    let kc = k.components();
    let g = faddeev_g(&k, &grid).unwrap();
    let sym = symbol_from_samples(&grid, &g);
    let applied: Vec<C64> = dual_points(&grid)
        .iter()
        .zip(&sym)
        .map(|(xi, u)| -(C64::new(xi.norm_squared(), 0.0) + 2.0 * (kc[0] * xi.x + kc[1] * xi.y + kc[2] * xi.z)) * u)
        .collect();
    (grid, lattice_from_symbol(&grid, applied))
}

#[test]
fn green_operator_image_is_a_lattice_delta() {
    for (n, s) in [(16, 1.0), (32, 3.0)] {
        let (grid, image) = spectral_operator_image(n, s);
        let origin = grid.index(n / 2, n / 2, n / 2);
        assert!(lattice_offset(&grid, origin).norm() == 0.0);
        let expected = 1.0 / grid.cell_volume();
        assert!((image[origin] - expected).norm() < 1e-10 * expected);
        let off = image
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != origin)
            .map(|(_, z)| z.norm())
            .fold(0.0, f64::max);
        assert!(off < 1e-10 * expected, "off-origin residual {off}");
    }
}

fn reference(n: usize) -> Potential {
    Potential::reference(VolumeGrid::new(n, 1.05).unwrap()).unwrap()
}

#[test]
fn zero_potential_gives_unit_mu() {
    let v = Potential::zero(VolumeGrid::new(16, 1.2).unwrap());
    let sol = solve_mu(&v, &momentum(2.0), 1e-12).unwrap();
    assert_eq!(sol.method, SolveMethod::Trivial);
    assert!(sol.mu.iter().all(|z| *z == C64::new(1.0, 0.0)));
}

#[test]
fn solver_meets_requested_residual() {
    let v = reference(24);
    for s in [1.0, 4.0] {
        let sol = solve_mu(&v, &momentum(s), 1e-11).unwrap();
        assert!(sol.residual <= 1e-11, "s={s} residual {}", sol.residual);
        // mu - 1 = g * (v mu)
        let ls = LippmannSchwinger::new(&v, SolverOptions::default());
        let vm: Vec<C64> = sol.mu.iter().zip(&v.values).map(|(m, v)| m * *v).collect();
        let gm = ls.apply_green(&sol.k, &vm);
        let defect = sol
            .mu
            .iter()
            .zip(&gm)
            .enumerate()
            .filter(|(i, _)| v.values[*i] != 0.0)
            .map(|(_, (m, g))| (m - 1.0 - g).norm())
            .fold(0.0, f64::max);
        assert!(defect < 1e-9, "defect {defect}");
    }
}

#[test]
fn born_regime_error_is_quadratic() {
    let base = reference(24);
    let f = Frame::default();
    let p = Vec3::new(0.8, 0.3, 0.0);
    let lp = LambdaPoint {
        lambda: C64::new(0.0, 0.1),
        p,
    };
    let pt = theta_point(&lp, &f).unwrap();
    let err = |eps: f64| {
        let v = base.scaled(eps);
        (scattering_h(&v, &pt).unwrap() - fourier_at(&v, &p)).norm()
    };
    let (e1, e2) = (err(0.2), err(0.1));
    let order = (e1 / e2).log2();
    assert!((order - 2.0).abs() < 0.1, "order {order}");
}

#[test]
fn radial_rotation_matches_direct_solve() {
    let v = reference(24);
    let rs = RadialScattering::new(&v, SolverOptions::default()).unwrap();
    let f = Frame::default();
    for lam in [C64::new(0.1, 0.2), C64::from_polar(3.0, 2.0)] {
        let lp = LambdaPoint {
            lambda: lam,
            p: Vec3::new(0.5, -1.0, 0.7),
        };
        let pt = theta_point(&lp, &f).unwrap();
        let direct = scattering_h(&v, &pt).unwrap();
        let rotated = rs.eval_theta(&pt).unwrap();
        assert!((direct - rotated).norm() < 1e-6 * direct.norm(), "{direct} vs {rotated}");
    }
}

#[test]
fn radial_oracle_rejects_non_radial_potential() {
    let grid = VolumeGrid::new(16, 1.2).unwrap();
    let mut vals = vec![0.0; grid.len()];
    vals[grid.index(8, 8, 8)] = 1.0;
    let v = Potential::from_values(grid, vals, 4, 1.0).unwrap();
    assert!(RadialScattering::new(&v, SolverOptions::default()).is_err());
}
