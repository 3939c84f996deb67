use archsnap::arch::{internal_force_scalar, internal_force_vector, NondimArch};
use archsnap::statics::{
    critical_point, critical_point_multi_mode, critical_point_one_mode, gradient_and_hessians,
    path_slope, reduce_to_normal_form, solve_constrained, trace_equilibrium_path,
};
use archsnap::Error;
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Fold of the one-mode cubic by bisection on a centered-difference slope.
fn cubic_fold(q: f64, a1: f64) -> f64 {
    let arch = NondimArch::single_mode(q, 0.0, a1).unwrap();
    let dx = |d: f64| {
        let h = 1e-7 * a1;
        internal_force_scalar(d + h, &arch).unwrap() - internal_force_scalar(d - h, &arch).unwrap()
    };
    let (mut lo, mut hi) = (0.0, 2.0 * a1);
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if dx(m) > 0.0 {
            lo = m;
        } else {
            hi = m;
        }
    }
    lo
}

#[test]
fn one_mode_fold_q6() {
    let arch = NondimArch::single_mode(6.0, 1.0, 1.0).unwrap();
    let cp = critical_point_one_mode(&arch).unwrap();
    assert!((cp.delta - 0.850658).abs() < 1e-6);
    assert!((cp.delta - cubic_fold(6.0, 1.0)).abs() < 1e-7);
    assert!(rel(cp.force, internal_force_scalar(cp.delta, &arch).unwrap()) < 1e-15);
    assert_eq!(cp.load_gain, 1.0);
    assert_eq!(cp.null_vector, vec![-1.0]);
    assert!(cp.eigenvalue_ratio < 1e-10);
    // K is half the second derivative of -X/4 per unit 2-scaled coordinate; compare with FD on X.
    let h = 1e-4;
    let x = |d| internal_force_scalar(d, &arch).unwrap();
    let x2 = (x(cp.delta + h) - 2.0 * x(cp.delta) + x(cp.delta - h)) / (h * h);
    assert!(
        rel(cp.curvature, -x2 / 2.0) < 1e-6,
        "{} vs {}",
        cp.curvature,
        -x2 / 2.0
    );
    let far = cp.remote.as_ref().unwrap();
    assert!(rel(x(far.delta), cp.force) < 1e-9);
    assert!(far.delta > cp.delta);
}

#[test]
fn not_bistable() {
    let arch = NondimArch::single_mode(1.0, 1.0, 0.1).unwrap();
    assert_eq!(critical_point(&arch).unwrap_err(), Error::NotBistable);
    let flat = NondimArch::single_mode(6.0, 1.0, 0.0).unwrap();
    assert_eq!(critical_point(&flat).unwrap_err(), Error::NotBistable);
    let shallow = NondimArch::symmetric(6.0, 1.0, vec![1.0, 0.9]).unwrap();
    assert_eq!(critical_point(&shallow).unwrap_err(), Error::NotBistable);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn closed_form_matches_bisection(q in 2.0f64..12.0, a1 in 0.5f64..1.5) {
        let arch = NondimArch::single_mode(q, 0.0, a1).unwrap();
        let cp = critical_point_one_mode(&arch).unwrap();
        prop_assert!((cp.delta - cubic_fold(q, a1)).abs() < 1e-6 * a1);
        let path = critical_point_multi_mode(&arch).unwrap();
        prop_assert!(rel(path.delta, cp.delta) < 1e-7);
        prop_assert!(rel(path.force, cp.force) < 1e-12);
        prop_assert!(rel(path.curvature, cp.curvature) < 1e-6);
    }
}

#[test]
fn idle_modes_reproduce_one_mode() {
    let one = critical_point(&NondimArch::single_mode(6.0, 1.0, 1.0).unwrap()).unwrap();
    for modes in [vec![1, 2], vec![1, 3], vec![1, 2, 3]] {
        let n = modes.len();
        let mut a = vec![0.0; n];
        a[0] = 1.0;
        let arch = NondimArch::new(6.0, 1.0, modes.clone(), a).unwrap();
        let cp = critical_point(&arch).unwrap();
        assert!(
            rel(cp.force, one.force) < 1e-9,
            "{modes:?}: {}",
            rel(cp.force, one.force)
        );
        assert!(rel(cp.delta, one.delta) < 1e-9, "{modes:?}");
        assert!(
            rel(cp.curvature, one.curvature) < 1e-9,
            "{modes:?}: {}",
            rel(cp.curvature, one.curvature)
        );
        assert!(rel(cp.load_gain, 1.0) < 1e-12);
        assert!(cp.eigenvalue_ratio < 1e-6);
    }
}

#[test]
fn symmetric_family_fold_table() {
    // (a5, F_c, K*beta) reference values from an independent path-following prototype.
    let table = [
        (0.0, 15572.0, 20942.0),
        (0.2, 10309.0, 5316.0),
        (0.3, 6481.0, 3191.0),
        (0.5, 3794.0, 1225.0),
        (0.7, 3119.0, 119.0),
    ];
    for (a5, fc, kb) in table {
        let arch = NondimArch::symmetric(6.0, 1.0, vec![1.0, a5]).unwrap();
        let cp = critical_point(&arch).unwrap();
        assert!(rel(cp.force, fc) < 1e-3, "a5 {a5}: F_c {}", cp.force);
        assert!(
            rel(cp.curvature * cp.load_gain, kb) < 2e-3,
            "a5 {a5}: K beta {}",
            cp.curvature * cp.load_gain
        );
        assert!(
            cp.eigenvalue_ratio < 1e-6,
            "a5 {a5}: ratio {}",
            cp.eigenvalue_ratio
        );
        assert!(cp.remote.is_some());
    }
}

#[test]
fn fold_is_equilibrium_with_zero_slope() {
    for a5 in [0.0, 0.3, 0.7] {
        fold_checks(NondimArch::symmetric(6.0, 1.0, vec![1.0, a5]).unwrap());
    }
}

fn fold_checks(arch: NondimArch) {
    let cp = critical_point(&arch).unwrap();
    let f = internal_force_vector(&cp.weights, &arch).unwrap();
    let p = arch.load_pattern();
    let scale = arch.eigenvalues_fourth()[1];
    for i in 0..2 {
        assert!((f[i] + 0.25 * cp.force * p[i]).abs() < 1e-9 * scale);
    }
    assert!(path_slope(&arch, &cp.weights).abs() < 1e-6 * cp.force);
    assert!((arch.midpoint_displacement(&cp.weights) - cp.delta).abs() < 1e-12);
    let norm: f64 = cp.null_vector.iter().map(|v| v * v).sum();
    assert!((norm - 1.0).abs() < 1e-12);
    assert!(
        cp.null_vector
            .iter()
            .zip(p)
            .map(|(v, q)| v * q)
            .sum::<f64>()
            < 0.0
    );

    let far = cp.remote.as_ref().unwrap();
    let g = internal_force_vector(&far.weights, &arch).unwrap();
    for i in 0..2 {
        assert!((g[i] + 0.25 * cp.force * p[i]).abs() < 1e-7 * scale);
    }
    assert!(far.coordinate > 0.0);
    let d = gradient_and_hessians(&far.weights, &arch).unwrap();
    let (a, b, c) = (d.jacobian[0], d.jacobian[1], d.jacobian[3]);
    assert!(
        a > 0.0 && a * c - b * b > 0.0,
        "remote state must be stable"
    );
    assert!(rel(cp.switching_coordinate(&far.weights), far.coordinate) < 1e-12);
}

#[test]
fn normal_form_curvature_from_finite_differences() {
    // Project the force along V1 and differentiate twice.
    let arch = NondimArch::symmetric(6.0, 1.0, vec![1.0, 0.4]).unwrap();
    let cp = critical_point(&arch).unwrap();
    let v = &cp.null_vector;
    let g = |s: f64| {
        let w: Vec<f64> = cp
            .weights
            .iter()
            .zip(v)
            .map(|(a, b)| a + 0.5 * s * b)
            .collect();
        let f = internal_force_vector(&w, &arch).unwrap();
        -4.0 * f.iter().zip(v).map(|(a, b)| a * b).sum::<f64>()
    };
    let h = 1e-4;
    let k = (g(h) - 2.0 * g(0.0) + g(-h)) / (2.0 * h * h);
    assert!(rel(cp.curvature, k) < 1e-5, "{} vs {k}", cp.curvature);
    let nf = reduce_to_normal_form(&cp.weights, &arch).unwrap();
    assert_eq!(nf.curvature, cp.curvature);
}

#[test]
fn hessians_match_finite_differences() {
    let arch = NondimArch::symmetric(5.0, 0.0, vec![1.0, 0.2, -0.1]).unwrap();
    let w = [0.4, 0.1, 0.05];
    let d = gradient_and_hessians(&w, &arch).unwrap();
    let n = 3;
    let h = 1e-5;
    for k in 0..n {
        let mut wp = w;
        let mut wm = w;
        wp[k] += h;
        wm[k] -= h;
        let fp = internal_force_vector(&wp, &arch).unwrap();
        let fm = internal_force_vector(&wm, &arch).unwrap();
        for i in 0..n {
            let fd = (fp[i] - fm[i]) / (2.0 * h);
            let scale = d.jacobian.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            assert!(
                (d.jacobian[i * n + k] - fd).abs() < 1e-6 * scale,
                "J[{i},{k}]"
            );
        }
        let mut jp = vec![0.0; n * n];
        let mut jm = vec![0.0; n * n];
        arch.jacobian_into(&wp, &mut jp);
        arch.jacobian_into(&wm, &mut jm);
        for i in 0..n {
            for j in 0..n {
                let fd = (jp[i * n + j] - jm[i * n + j]) / (2.0 * h);
                let h_ijk = d.hessians[i][j * n + k];
                assert!(
                    (h_ijk - fd).abs() < 1e-6 * h_ijk.abs().max(1e3),
                    "H[{i}][{j},{k}]"
                );
            }
        }
    }
}

#[test]
fn equilibrium_path_rises_to_fold() {
    let arch = NondimArch::symmetric(6.0, 1.0, vec![1.0, 0.3]).unwrap();
    let cp = critical_point(&arch).unwrap();
    let grid: Vec<f64> = (0..=50).map(|k| cp.delta * k as f64 / 50.0).collect();
    let path = trace_equilibrium_path(&arch, &grid).unwrap();
    assert_eq!(path.samples.len(), 51);
    assert_eq!(path.samples[0].force, 0.0);
    for w in path.samples.windows(2) {
        assert!(w[1].force > w[0].force);
    }
    assert!(rel(path.samples[50].force, cp.force) < 1e-9);
    assert!(path.samples[10].stable);
    assert!(rel(path.force_at(cp.delta).unwrap(), cp.force) < 1e-9);
    let (w, f) = solve_constrained(&arch, 0.5 * cp.delta, arch.weights()).unwrap();
    assert!((arch.midpoint_displacement(&w) - 0.5 * cp.delta).abs() < 1e-12);
    assert!(rel(f, path.samples[25].force) < 1e-9);
}

#[test]
fn critical_time_from_ramp() {
    use archsnap::arch::LoadProgram;
    let arch = NondimArch::single_mode(6.0, 100.0, 1.0).unwrap();
    let cp = critical_point(&arch)
        .unwrap()
        .with_load(&LoadProgram::ramp(0.0, 10.0).unwrap());
    assert!(rel(cp.tau_c.unwrap(), cp.force / 10.0) < 1e-15);
    assert_eq!(
        cp.critical_time(&LoadProgram::static_offset(1.0).unwrap()),
        None
    );
}
