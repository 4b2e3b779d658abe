mod common;

use std::f64::consts::PI;

use num_complex::Complex64;
use statrs::function::erf::erf;
use steklov::fbi::{
    fbi_geo_circle, fbi_hol_circle, fbi_of_computed_mode, weighted_norm, zero_section_mass, NormKind, PhaseGrid,
    TransformKind, WeightSpec,
};
use steklov::geometry::Domain;
use steklov::reference::disk_mode;
use steklov::Error;

fn fraction(num: f64, den: f64) -> f64 {
    (num / den).powi(2)
}

#[test]
fn geo_and_hol_agree_up_to_constant() {
    let grid = PhaseGrid::default();
    for k in [5usize, 12, 30] {
        let samples: Vec<Complex64> = steklov::fourier::grid(256).map(|t| disk_mode(1.0, k, 1.0, t)).collect();
        let h = 1.0 / k as f64;
        let geo = fbi_geo_circle(&samples, h, &grid).unwrap();
        let hol = fbi_hol_circle(&samples, h, &grid).unwrap();
        let scale = hol.linf_norm();
        for (g, w) in geo.values.iter().zip(&hol.values) {
            if w.norm() > 1e-6 * scale {
                assert!((g / w - PI.powf(-0.25)).norm() < 1e-8);
            }
        }
    }
}

#[test]
fn l2_norm_is_stable_in_h() {
    let norms: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&h| {
            let u = common::plane_wave(512, 1.0 / h);
            let t = fbi_hol_circle(&u, h, &PhaseGrid { n_x: 512, ..PhaseGrid::default() }).unwrap();
            t.l2_norm() / (2.0 * PI).sqrt()
        })
        .collect();
    assert!(common::ratio(&norms) < 1.02, "{norms:?}");
    assert!((norms[0] / PI.powf(0.25) - 1.0).abs() < 0.02);
}

#[test]
fn translation_moves_the_table() {
    let n = 256;
    let u: Vec<Complex64> = steklov::fourier::grid(n)
        .map(|t| Complex64::new((3.0 * t).cos() + 0.4 * (11.0 * t).sin(), 0.2 * (7.0 * t).cos()))
        .collect();
    let mut shifted = u.clone();
    shifted.rotate_right(1);
    let grid = PhaseGrid { n_x: n, ..PhaseGrid::default() };
    let a = fbi_hol_circle(&u, 0.1, &grid).unwrap();
    let b = fbi_hol_circle(&shifted, 0.1, &grid).unwrap();
    for i in 0..n {
        for l in (0..grid.n_xi).step_by(25) {
            assert!((b.value((i + 1) % n, l) - a.value(i, l)).norm() < 1e-10);
        }
    }
}

#[test]
fn computed_disk_mode_matches_closed_form() {
    let modes = common::solve(&Domain::disk(1.0).unwrap(), 128, 21);
    let mode = common::disk_travelling(&modes, 1.0, 10);
    let exact: Vec<Complex64> = steklov::fourier::grid(256).map(|t| disk_mode(1.0, 10, 1.0, t)).collect();
    for kind in [TransformKind::Geo, TransformKind::Hol] {
        let computed = fbi_of_computed_mode(&mode, 0, kind, &PhaseGrid::default()).unwrap();
        let reference = match kind {
            TransformKind::Geo => fbi_geo_circle(&exact, 0.1, &PhaseGrid::default()),
            TransformKind::Hol => fbi_hol_circle(&exact, 0.1, &PhaseGrid::default()),
        }
        .unwrap();
        let err = computed.values.iter().zip(&reference.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-8 * reference.linf_norm(), "{err}");
    }
}

#[test]
fn ellipse_modes_concentrate_on_the_cosphere() {
    let modes = common::solve(&Domain::ellipse(1.2, 1.0).unwrap(), 256, 100);
    for (sigma, floor) in [(40.0, 0.99_f64), (10.0, 0.0)] {
        let mode = common::closest(&modes, sigma);
        let h = 1.0 / mode.sigma;
        let t = fbi_of_computed_mode(mode, 0, TransformKind::Hol, &PhaseGrid::default()).unwrap();
        let total = t.l2_norm();
        let band = fraction(t.band_norm(0.7, 1.3), total);
        // a pure wave at frequency 1/h puts erf(0.3/√h) of its mass in the band
        let gaussian = erf(0.3 / h.sqrt());
        assert!(band >= floor.max(0.9 * gaussian), "σ = {}: {band} vs {gaussian}", mode.sigma);
        assert!(fraction(zero_section_mass(&t, 0.25), total) < 1e-3);
    }
}

#[test]
fn weights_are_finite_on_computed_modes() {
    let modes = common::solve(&Domain::ellipse(1.2, 1.0).unwrap(), 128, 40);
    let mode = common::closest(&modes, 15.0);
    let t = fbi_of_computed_mode(mode, 0, TransformKind::Geo, &PhaseGrid::default()).unwrap();
    for spec in [WeightSpec::thm2(0.5, 1), WeightSpec::thm3_gamma(0.3), WeightSpec::thm3_sharp()] {
        for norm in [NormKind::L2, NormKind::Linf] {
            let v = weighted_norm(&t, &spec, norm).unwrap();
            assert!(v.is_finite() && v > 0.0);
        }
    }
}

#[test]
fn unresolved_modes_are_refused() {
    let modes = common::solve(&Domain::annulus(0.5, 1.0).unwrap(), 64, 64);
    let bad = modes.iter().find(|m| !m.resolved).expect("some mode should exceed the resolution limit");
    let err = fbi_of_computed_mode(bad, 0, TransformKind::Hol, &PhaseGrid::default()).unwrap_err();
    assert!(matches!(err, Error::UnresolvedMode { .. }));
}
