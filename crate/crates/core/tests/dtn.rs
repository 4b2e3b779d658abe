mod common;

use std::f64::consts::TAU;

use num_complex::Complex64;
use steklov::dtn::{assemble_layers, dtn_apply, multiplicities, steklov_solve};
use steklov::geometry::Domain;
use steklov::reference::{reference_spectrum, with_multiplicity, ReferenceDomain};

#[test]
fn unit_disk_lowest_21() {
    let modes = common::solve(&Domain::disk(1.0).unwrap(), 256, 21);
    for (i, m) in modes.iter().enumerate() {
        assert!((m.sigma - i.div_ceil(2) as f64).abs() < 1e-8, "σ_{i} = {}", m.sigma);
        assert!(m.residual < 1e-10, "residual {}", m.residual);
        assert!((m.l2_norm() - 1.0).abs() < 1e-10);
    }
    let sigmas: Vec<f64> = modes.iter().map(|m| m.sigma).collect();
    assert_eq!(multiplicities(&sigmas)[0], 1);
    assert!(multiplicities(&sigmas)[1..].iter().all(|&m| m == 2));
}

#[test]
fn scaled_disk() {
    let modes = common::solve(&Domain::disk(2.5).unwrap(), 128, 9);
    for (i, m) in modes.iter().enumerate() {
        assert!((m.sigma - i.div_ceil(2) as f64 / 2.5).abs() < 1e-9);
    }
}

#[test]
fn annulus_matches_reference_roots() {
    let r0 = 0.3;
    let reference = with_multiplicity(&reference_spectrum(&ReferenceDomain::Annulus { r0 }, 40).unwrap());
    let modes = common::solve(&Domain::annulus(r0, 1.0).unwrap(), 128, 30);
    for (m, s) in modes.iter().zip(&reference) {
        assert!((m.sigma - s).abs() < 1e-6, "{} vs {s}", m.sigma);
    }
}

#[test]
fn constant_mode_comes_first() {
    for domain in [Domain::ellipse(1.5, 1.0).unwrap(), Domain::annulus(0.4, 1.0).unwrap()] {
        let modes = common::solve(&domain, 128, 3);
        assert!(modes[0].sigma.abs() < 1e-9);
        let c = modes[0].trace[0];
        assert!(modes[0].trace.iter().all(|z| (z - c).norm() < 1e-8));
    }
}

#[test]
fn dtn_on_circle_and_constants() {
    let ops = assemble_layers(&Domain::disk(1.0).unwrap(), 256).unwrap();
    let ts: Vec<f64> = ops.grid().nodes().iter().map(|n| n.t).collect();
    for k in [1usize, 7, 30] {
        let f: Vec<f64> = ts.iter().map(|t| (k as f64 * t).cos()).collect();
        let df = dtn_apply(&ops, &f).unwrap();
        for (a, b) in df.iter().zip(&f) {
            assert!((a - k as f64 * b).abs() < 1e-8);
        }
    }
    let ops = assemble_layers(&Domain::ellipse(2.0, 1.0).unwrap(), 256).unwrap();
    let d1 = dtn_apply(&ops, &vec![1.0; 256]).unwrap();
    assert!(d1.iter().all(|v| v.abs() < 1e-8));
}

#[test]
fn dtn_is_self_adjoint() {
    let ops =
        assemble_layers(&Domain::radial_fourier(1.0, vec![0.0, 0.1], vec![0.05, 0.0, 0.04]).unwrap(), 256).unwrap();
    let dtn = ops.dtn().unwrap();
    let nodes = ops.grid().nodes();
    let trig = |c: &[(f64, f64)]| -> Vec<f64> {
        nodes
            .iter()
            .map(|n| {
                c.iter().enumerate().map(|(k, (a, b))| a * (k as f64 * n.t).cos() + b * (k as f64 * n.t).sin()).sum()
            })
            .collect()
    };
    let f = trig(&[(0.3, 0.0), (0.1, -0.7), (0.0, 0.0), (0.5, 0.2), (0.0, 0.9)]);
    let g = trig(&[(-0.2, 0.0), (0.0, 0.4), (0.8, 0.1), (0.0, 0.0), (0.3, -0.3), (0.6, 0.0)]);
    let (df, dg) = (dtn.apply(&f).unwrap(), dtn.apply(&g).unwrap());
    let ip =
        |a: &[f64], b: &[f64]| -> f64 { nodes.iter().zip(a.iter().zip(b)).map(|(n, (x, y))| n.weight * x * y).sum() };
    assert!((ip(&df, &g) - ip(&f, &dg)).abs() < 1e-8);
}

#[test]
fn traces_of_distinct_eigenvalues_are_orthogonal() {
    let modes = common::solve(&Domain::ellipse(1.5, 1.0).unwrap(), 128, 20);
    let grid = modes[0].grid().clone();
    for a in &modes {
        for b in &modes {
            if (a.sigma - b.sigma).abs() > 1e-6 {
                assert!(grid.inner(&a.trace, &b.trace).norm() < 1e-8);
            }
        }
    }
}

#[test]
fn ellipse_eigenvalues_converge_spectrally() {
    let domain = Domain::ellipse(2.0, 1.0).unwrap();
    let fine: Vec<f64> = common::solve(&domain, 384, 12).iter().map(|m| m.sigma).collect();
    let err = |n: usize| -> f64 {
        common::solve(&domain, n, 12).iter().zip(&fine).map(|(m, s)| (m.sigma - s).abs()).fold(0.0, f64::max)
    };
    let (e32, e64, e128) = (err(32), err(64), err(128));
    assert!(e64 < 1e-3 * e32 || e64 < 1e-11, "{e32:e} {e64:e}");
    assert!(e128 <= e64.max(1e-11), "{e64:e} {e128:e}");
    // the disk is exact to rounding already at N = 64
    for n in [64, 128, 256] {
        let m = common::solve(&Domain::disk(1.0).unwrap(), n, 21);
        assert!(m.iter().enumerate().all(|(i, m)| (m.sigma - i.div_ceil(2) as f64).abs() < 1e-10));
    }
}

#[test]
fn weyl_asymptotics_on_ellipse() {
    let domain = Domain::ellipse(2.0, 1.0).unwrap();
    let length = domain.total_length();
    let modes = common::solve(&domain, 256, 31);
    let k = 15.0;
    let predicted = TAU * k / length;
    assert!((modes[30].sigma / predicted - 1.0).abs() < 0.05, "{} vs {predicted}", modes[30].sigma);
}

#[test]
fn ellipse_tends_to_circle() {
    let exact: Vec<f64> = (0..11).map(|i| ((i + 1) / 2) as f64).collect();
    let mut last = f64::INFINITY;
    for b in [0.7, 0.85, 0.95, 0.99, 0.999] {
        let modes = common::solve(&Domain::ellipse(1.0, b).unwrap(), 128, 11);
        // compare after scaling out the perimeter
        let scale = Domain::ellipse(1.0, b).unwrap().total_length() / TAU;
        let err = modes.iter().zip(&exact).map(|(m, e)| (m.sigma * scale - e).abs()).fold(0.0, f64::max);
        assert!(err < last, "b = {b}: {err} after {last}");
        last = err;
    }
    assert!(last < 1e-2);
}

#[test]
fn solver_rejects_too_many_modes() {
    let ops = assemble_layers(&Domain::disk(1.0).unwrap(), 32).unwrap();
    assert!(steklov_solve(&ops, 17).is_err());
    assert!(steklov_solve(&ops, 0).is_err());
}

#[test]
fn complexified_pair_has_unit_norm() {
    let modes = common::solve(&Domain::disk(1.0).unwrap(), 64, 9);
    let m = common::disk_travelling(&modes, 1.0, 4);
    assert!((m.l2_norm() - 1.0).abs() < 1e-12);
    let expected = Complex64::new(TAU.sqrt().recip(), 0.0);
    assert!((m.trace[0] - expected).norm() < 1e-10);
}
