use std::f64::consts::PI;

use archsnap::arch::{
    internal_force_scalar, internal_force_vector, mode_eigenvalue, mode_shape, total_energy,
    ArchGeometry, LoadProgram, NondimArch, ScaleSet, StateVector,
};
use archsnap::Error;
use proptest::prelude::*;

#[test]
fn eigenvalues() {
    assert_eq!(mode_eigenvalue(1).unwrap(), 2.0 * PI);
    assert_eq!(mode_eigenvalue(5).unwrap(), 6.0 * PI);
    assert_eq!(mode_eigenvalue(3).unwrap(), 4.0 * PI);
    assert_eq!(mode_eigenvalue(2).unwrap(), 2.86 * PI);
    assert_eq!(mode_eigenvalue(4).unwrap(), 4.92 * PI);
    assert_eq!(mode_eigenvalue(6).unwrap(), 6.94 * PI);
    assert_eq!(mode_eigenvalue(8), Err(Error::UnsupportedMode(8)));
    assert!(mode_eigenvalue(0).is_err());
}

#[test]
fn shapes() {
    assert_eq!(mode_shape(1, 0.0, 1.0).unwrap(), 0.0);
    assert!((mode_shape(1, 0.5, 1.0).unwrap() - 2.0).abs() < 1e-15);
    assert!(mode_shape(3, 0.5, 1.0).unwrap().abs() < 1e-15);
    assert!((mode_shape(5, 0.05, 0.1).unwrap() - 2.0).abs() < 1e-14);
    assert!(mode_shape(1, 1.5, 1.0).is_err());
    for i in [1, 2, 3, 4, 5, 6, 7, 9] {
        assert!(mode_shape(i, 0.0, 2.0).unwrap().abs() < 1e-14);
        // Even shapes vanish at the far end only up to the rounding of their eigenvalues.
        let tol = if i % 2 == 0 { 1e-2 } else { 1e-14 };
        assert!(mode_shape(i, 2.0, 2.0).unwrap().abs() < tol, "mode {i}");
    }
    for i in [1, 3, 5, 7] {
        let h = 1e-6;
        let slope = (mode_shape(i, 0.5 + h, 1.0).unwrap() - mode_shape(i, 0.5 - h, 1.0).unwrap())
            / (2.0 * h);
        assert!(slope.abs() < 1e-8, "mode {i}");
    }
}

fn steel_strip() -> ArchGeometry {
    ArchGeometry {
        span: 0.1,
        thickness: 1e-3,
        width: 1e-2,
        youngs_modulus: 200e9,
        density: 7850.0,
        rise: 6e-3,
    }
}

#[test]
fn nondimensionalization() {
    let g = steel_strip();
    let s = ScaleSet::from_geometry(&g).unwrap();
    // Hand evaluation: I = 1e-2 * 1e-9 / 12, A = 1e-5.
    let ei = 200e9 * (1e-11 / 12.0);
    let rho_a: f64 = 7850.0 * 1e-5;
    assert!((s.time - (rho_a * 1e-4 / ei).sqrt()).abs() < 1e-15);
    assert!((s.time - 0.006862943974709396).abs() < 1e-15);
    assert!((s.force - ei * 6e-3 / 1e-3).abs() < 1e-9);
    assert!((s.damping - (ei * rho_a / 1e-2).sqrt()).abs() < 1e-12);
    assert!((s.rate - s.force / s.time).abs() < 1e-9 * s.rate);

    let (arch, _) = NondimArch::from_geometry(&g, s.damping, vec![1], vec![1.0]).unwrap();
    assert!((arch.q() - 6.0).abs() < 1e-12);
    assert!((arch.damping() - 1.0).abs() < 1e-12);

    let bad = ArchGeometry {
        thickness: 0.0,
        ..g
    };
    assert!(ScaleSet::from_geometry(&bad).is_err());
    assert!(!g.exceeds_shallow_limit());
    assert!(ArchGeometry { rise: 0.03, ..g }.exceeds_shallow_limit());
}

proptest! {
    #[test]
    fn scale_roundtrip(v in 1e-6f64..1e6) {
        let s = ScaleSet::from_geometry(&steel_strip()).unwrap();
        let rt = [
            s.load_from_dimensional(s.load_to_dimensional(v)),
            s.rate_from_dimensional(s.rate_to_dimensional(v)),
            s.time_from_dimensional(s.time_to_dimensional(v)),
            s.damping_from_dimensional(s.damping_to_dimensional(v)),
            s.displacement_from_dimensional(s.displacement_to_dimensional(v)),
        ];
        for x in rt {
            prop_assert!((x - v).abs() <= 1e-12 * v);
        }
    }
}

#[test]
fn midspan_load_is_linear_spring_for_flat_limit() {
    // A flat beam (a = 0) under a small mid-span load: one-mode stiffness vs the
    // exact clamped-clamped value 192 EI/L^3.
    let arch = NondimArch::single_mode(6.0, 0.0, 0.0).unwrap();
    let x = internal_force_scalar(1e-6, &arch).unwrap() / 1e-6;
    let s = ScaleSet::from_geometry(&steel_strip()).unwrap();
    let k = s.load_to_dimensional(x) / s.displacement_to_dimensional(1.0) / (s.force / 6e-3);
    assert!((k - 194.8).abs() < 0.1, "stiffness {k}");
}

#[test]
fn as_fabricated_shape_is_force_free() {
    for a in [vec![1.0], vec![1.0, 0.3], vec![0.7, -0.2, 0.1]] {
        let arch = NondimArch::symmetric(6.0, 1.0, a.clone()).unwrap();
        let f = internal_force_vector(&a, &arch).unwrap();
        assert!(f.iter().all(|v| *v == 0.0));
    }
    let arch = NondimArch::symmetric(6.0, 1.0, vec![1.0, 0.3]).unwrap();
    assert!(matches!(
        internal_force_vector(&[1.0], &arch),
        Err(Error::LengthMismatch { .. })
    ));
}

#[test]
fn one_mode_force_matches_cubic() {
    let arch = NondimArch::single_mode(6.0, 0.0, 1.0).unwrap();
    for i in 0..=100 {
        let d = 2.0 * i as f64 / 100.0;
        let f = internal_force_vector(&[1.0 - d / 2.0], &arch).unwrap()[0];
        // Independent expansion of the cubic in delta.
        let q2 = 36.0;
        let m4 = (2.0 * PI).powi(4);
        let x = 3.0 * q2 * m4 * (d.powi(3) / 4.0 - 1.5 * d * d + (2.0 + 1.0 / (3.0 * q2)) * d);
        assert!((-4.0 * f - x).abs() <= 1e-12 * x.abs().max(m4), "delta {d}");
        assert!((internal_force_scalar(d, &arch).unwrap() - x).abs() <= 1e-12 * x.abs().max(m4));
    }
    assert_eq!(internal_force_scalar(0.0, &arch).unwrap(), 0.0);
    let two = NondimArch::symmetric(6.0, 0.0, vec![1.0, 0.0]).unwrap();
    assert!(internal_force_scalar(0.1, &two).is_err());
}

#[test]
fn fold_of_cubic_by_bisection() {
    let arch = NondimArch::single_mode(6.0, 0.0, 1.0).unwrap();
    let dx = |d: f64| {
        let h = 1e-6;
        (internal_force_scalar(d + h, &arch).unwrap()
            - internal_force_scalar(d - h, &arch).unwrap())
            / (2.0 * h)
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let m = 0.5 * (lo + hi);
        if dx(m) > 0.0 {
            lo = m;
        } else {
            hi = m;
        }
    }
    assert!((lo - 0.850658).abs() < 1e-6);
}

fn energy(arch: &NondimArch, w: &[f64]) -> f64 {
    let s = StateVector {
        tau: 0.0,
        weights: w.to_vec(),
        rates: vec![0.0; w.len()],
    };
    let e = total_energy(&s, arch, 0.0).unwrap();
    e.bending + e.compression
}

proptest! {
    #[test]
    fn force_is_energy_gradient(a5 in -0.5f64..0.8, x in proptest::collection::vec(-1.5f64..1.5, 2), q in 1.0f64..10.0) {
        let arch = NondimArch::symmetric(q, 0.0, vec![1.0, a5]).unwrap();
        let f = internal_force_vector(&x, &arch).unwrap();
        let h = 1e-6;
        for i in 0..2 {
            let mut p = x.clone();
            let mut m = x.clone();
            p[i] += h;
            m[i] -= h;
            let g = (energy(&arch, &p) - energy(&arch, &m)) / (2.0 * h);
            let scale = f.iter().fold(1.0f64, |s, v| s.max(v.abs()));
            prop_assert!((g - f[i]).abs() <= 1e-6 * scale, "{} vs {}", g, f[i]);
        }
    }

    #[test]
    fn compression_is_non_negative(x in proptest::collection::vec(-3.0f64..3.0, 3)) {
        let arch = NondimArch::symmetric(4.0, 0.0, vec![1.0, 0.2, 0.05]).unwrap();
        let s = StateVector { tau: 0.0, weights: x, rates: vec![0.1, 0.0, -0.3] };
        let e = total_energy(&s, &arch, 5.0).unwrap();
        prop_assert!(e.compression >= 0.0);
        prop_assert!(e.kinetic >= 0.0);
        prop_assert!((e.total - (e.bending + e.compression + e.work + e.kinetic)).abs() < 1e-9 * e.total.abs().max(1.0));
    }

    #[test]
    fn load_term_is_gradient_of_work(x in proptest::collection::vec(-2.0f64..2.0, 2), force in -1e4f64..1e4) {
        let arch = NondimArch::symmetric(6.0, 0.0, vec![1.0, 0.3]).unwrap();
        let work = |w: &[f64]| {
            let s = StateVector { tau: 0.0, weights: w.to_vec(), rates: vec![0.0; 2] };
            total_energy(&s, &arch, force).unwrap().work
        };
        for i in 0..2 {
            let mut p = x.clone();
            let mut m = x.clone();
            p[i] += 1e-5;
            m[i] -= 1e-5;
            let g = (work(&p) - work(&m)) / 2e-5;
            let expect = 0.25 * force * arch.load_pattern()[i];
            prop_assert!((g - expect).abs() < 1e-6 * force.abs().max(1.0));
        }
    }
}

#[test]
fn energies_vanish_at_rest() {
    let arch = NondimArch::symmetric(6.0, 0.0, vec![1.0, 0.3]).unwrap();
    let e = total_energy(&StateVector::at_rest(&arch), &arch, 0.0).unwrap();
    assert_eq!(
        (e.bending, e.compression, e.kinetic, e.total),
        (0.0, 0.0, 0.0, 0.0)
    );
}

#[test]
fn midpoint_displacement_uses_symmetric_modes() {
    let arch = NondimArch::consecutive(6.0, 0.0, vec![1.0, 0.2, 0.3, 0.0, 0.4]).unwrap();
    assert_eq!(arch.load_pattern(), &[1.0, 0.0, 0.0, 0.0, 1.0]);
    let s = StateVector {
        tau: 0.0,
        weights: vec![0.5, 0.0, 0.0, 0.0, 0.1],
        rates: vec![0.0; 5],
    };
    assert!((s.midpoint_displacement(&arch) - 2.0 * (0.5 + 0.3)).abs() < 1e-15);
    assert!((arch.midspan_rise() - 2.8).abs() < 1e-15);
}

#[test]
fn arch_validation() {
    assert!(NondimArch::single_mode(0.0, 1.0, 1.0).is_err());
    assert!(NondimArch::single_mode(6.0, -1.0, 1.0).is_err());
    assert!(NondimArch::new(6.0, 1.0, vec![1, 1], vec![1.0, 0.0]).is_err());
    assert!(NondimArch::new(6.0, 1.0, vec![1, 8], vec![1.0, 0.0]).is_err());
    assert!(NondimArch::new(6.0, 1.0, vec![1], vec![1.0, 0.0]).is_err());
    assert_eq!(
        NondimArch::symmetric(6.0, 1.0, vec![1.0, 0.0, 0.0])
            .unwrap()
            .modes(),
        &[1, 5, 9]
    );
}

#[test]
fn load_programs() {
    let s = LoadProgram::static_offset(0.5).unwrap();
    assert_eq!(s.force(10.0, 100.0), 100.5);
    let r = LoadProgram::ramp(0.0, 2.0).unwrap();
    assert_eq!(r.force(3.0, 100.0), 6.0);
    assert!(LoadProgram::ramp(0.0, -1.0).is_err());
    assert!(LoadProgram::static_offset(-1.0).is_err());
}
