mod common;

use std::f64::consts::TAU;

use steklov::decay::{
    distance_list, fit_decay, predicted_constants, sample_normal_ray, verify_theorem1, PredictedConstants,
    DEFAULT_A1_TOL, DEFAULT_DELTA, DEFAULT_FIT_RANGE,
};
use steklov::extension::ExtensionField;
use steklov::geometry::Domain;
use steklov::reference::{AnnulusModeField, CylinderModeField, DiskModeField, Parity};
use steklov::{Error, SteklovField};

fn fitted<F: SteklovField>(field: &F, component: usize, t_foot: f64) -> steklov::decay::DecayProfile {
    let ts = distance_list(DEFAULT_FIT_RANGE.0, DEFAULT_FIT_RANGE.1, 37);
    fit_decay(&sample_normal_ray(field, component, t_foot, &ts, None).unwrap(), DEFAULT_FIT_RANGE).unwrap()
}

#[test]
fn first_order_rate_is_universal() {
    for k in [30, 45, 60] {
        let field = DiskModeField::new(1.0, k).unwrap();
        for t in [0.0, 1.1, 4.0] {
            let a1 = fitted(&field, 0, t).fit.unwrap().a1;
            assert!((a1 - 1.0).abs() < 0.01, "disk k = {k}: {a1}");
        }
    }
    for k in [30, 60] {
        let field = CylinderModeField { k, parity: Parity::Even };
        let a1 = fitted(&field, 0, 0.5).fit.unwrap().a1;
        assert!((a1 - 1.0).abs() < 0.01);
    }
    for branch in [0, 1] {
        let field = AnnulusModeField::new(0.5, 30, branch).unwrap();
        let a1 = fitted(&field, branch, 0.2).fit.unwrap().a1;
        assert!((a1 - 1.0).abs() < 0.01, "annulus branch {branch}: {a1}");
    }
}

#[test]
fn disk_quadratic_margin_stays_small() {
    for k in [10, 20, 40] {
        let a2 = fitted(&DiskModeField::new(1.0, k).unwrap(), 0, 0.3).fit.unwrap().a2;
        assert!((a2 - 0.5).abs() < 0.02, "k = {k}: {a2}");
    }
}

#[test]
fn envelope_of_rotation_invariant_modulus_is_the_ray() {
    let field = DiskModeField::new(1.0, 25).unwrap();
    let ts = distance_list(0.02, 0.2, 19);
    let sup = sample_normal_ray(&field, 0, 0.4, &ts, None).unwrap();
    let ray = sample_normal_ray(&field, 0, 0.4, &ts, Some(0.0)).unwrap();
    for (a, b) in sup.values.iter().zip(&ray.values) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn computed_disk_prefactor() {
    let modes = common::solve(&Domain::disk(1.0).unwrap(), 256, 41);
    let field = ExtensionField::new(&common::disk_travelling(&modes, 1.0, 20)).unwrap();
    let fit = fitted(&field, 0, 0.3).fit.unwrap();
    let h = 0.05;
    assert!((fit.a0 - 0.5 * h * TAU.ln()).abs() < 1e-6, "{}", fit.a0);
    // consistent with |u| ≤ h^{-1/4} e^{-d/h}
    assert!(fit.a0 >= -0.25 * h * (1.0 / h).ln());
    assert!((fit.a1 - 1.0).abs() < 1e-3);
}

#[test]
fn closed_form_fields_satisfy_the_bound() {
    let annulus = Domain::annulus(0.5, 1.0).unwrap();
    let constants = predicted_constants(&annulus).unwrap();
    assert!((constants.inf_q + 2.0).abs() < 1e-6);
    let profiles: Vec<_> = [(0, 0usize), (1, 1)]
        .iter()
        .map(|&(branch, component)| fitted(&AnnulusModeField::new(0.5, 20, branch).unwrap(), component, 0.3))
        .collect();
    let report = verify_theorem1(&constants, &profiles, DEFAULT_DELTA, DEFAULT_A1_TOL).unwrap();
    assert!(report.passed, "{report:?}");

    let cylinder = fitted(&CylinderModeField { k: 40, parity: Parity::Odd }, 1, 2.0);
    let report = verify_theorem1(&PredictedConstants::flat(), &[cylinder], DEFAULT_DELTA, DEFAULT_A1_TOL).unwrap();
    assert!(report.passed);
    assert!(report.feet[0].a2.abs() < 0.05);
}

#[test]
fn rejects_samples_inside_the_near_boundary_layer() {
    let modes = common::solve(&Domain::disk(1.0).unwrap(), 64, 9);
    let field = ExtensionField::new(&modes[8]).unwrap();
    let err = sample_normal_ray(&field, 0, 0.0, &[0.5 * field.d_min(), 0.2], None).unwrap_err();
    assert!(matches!(err, Error::TooCloseToBoundary { .. }));
}

#[test]
fn fit_needs_enough_samples_in_range() {
    let field = DiskModeField::new(1.0, 20).unwrap();
    let profile = sample_normal_ray(&field, 0, 0.0, &distance_list(0.02, 0.2, 37), None).unwrap();
    assert!(matches!(fit_decay(&profile, (0.02, 0.03)), Err(Error::TooFewSamples { .. })));
    assert!(fit_decay(&profile, (0.05, 0.2)).is_ok());
}
