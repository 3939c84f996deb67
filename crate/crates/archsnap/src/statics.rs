//! Static equilibria, the switching fold and the scalar normal form at the fold.

use alloc::vec;
use alloc::vec::Vec;

use crate::arch::{LoadProgram, NondimArch};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm_inf, solve, symmetric_eigen};
use crate::roots::brent;

const NEWTON_TOL: f64 = 1e-12;
const NEWTON_MAX_ITER: usize = 50;
const PATH_POINTS: usize = 400;

/// Gradient matrix of the internal forces and one Hessian per mode equation,
/// all row-major `n x n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivatives {
    pub n: usize,
    pub jacobian: Vec<f64>,
    pub hessians: Vec<Vec<f64>>,
}

pub fn gradient_and_hessians(w: &[f64], arch: &NondimArch) -> Result<Derivatives> {
    arch.check_len(w)?;
    let n = w.len();
    let mut jacobian = vec![0.0; n * n];
    arch.jacobian_into(w, &mut jacobian);
    let m2 = arch.eigenvalues_squared();
    let q2 = arch.q() * arch.q();
    let hessians = (0..n)
        .map(|i| {
            let mut h = vec![0.0; n * n];
            for j in 0..n {
                for k in 0..n {
                    let mut v = 0.0;
                    if j == i {
                        v += w[k] * m2[k];
                    }
                    if k == i {
                        v += w[j] * m2[j];
                    }
                    if j == k {
                        v += m2[j] * w[i];
                    }
                    h[j * n + k] = 3.0 * q2 * m2[i] * v;
                }
            }
            h
        })
        .collect();
    Ok(Derivatives {
        n,
        jacobian,
        hessians,
    })
}

/// One point of a static force-displacement curve.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumSample {
    pub delta: f64,
    pub force: f64,
    pub weights: Vec<f64>,
    /// `dF/d delta` along the path.
    pub slope: f64,
    /// Smallest eigenvalue of the gradient matrix.
    pub min_eigenvalue: f64,
    /// Stable under load control (gradient matrix positive definite).
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EquilibriumPath {
    pub samples: Vec<EquilibriumSample>,
}

impl EquilibriumPath {
    /// Force at `delta` by linear interpolation between samples.
    pub fn force_at(&self, delta: f64) -> Option<f64> {
        let s = &self.samples;
        let k = s.windows(2).position(|w| {
            (w[0].delta <= delta && delta <= w[1].delta)
                || (w[1].delta <= delta && delta <= w[0].delta)
        })?;
        let (a, b) = (&s[k], &s[k + 1]);
        if a.delta == b.delta {
            return Some(a.force);
        }
        let t = (delta - a.delta) / (b.delta - a.delta);
        Some(a.force + t * (b.force - a.force))
    }
}

fn residual(arch: &NondimArch, delta: f64, w: &[f64], force: f64, out: &mut [f64]) -> f64 {
    let n = w.len();
    arch.internal_force_into(w, &mut out[..n]);
    let p = arch.load_pattern();
    for i in 0..n {
        out[i] += 0.25 * force * p[i];
    }
    out[n] = arch.midpoint_displacement(w) - delta;
    norm_inf(&out[..n]) / equilibrium_scale(arch, w, force) + libm::fabs(out[n])
}

fn bordered_matrix(arch: &NondimArch, w: &[f64]) -> Vec<f64> {
    let n = w.len();
    let mut jac = vec![0.0; n * n];
    arch.jacobian_into(w, &mut jac);
    let p = arch.load_pattern();
    let mut b = vec![0.0; (n + 1) * (n + 1)];
    for i in 0..n {
        for j in 0..n {
            b[i * (n + 1) + j] = jac[i * n + j];
        }
        b[i * (n + 1) + n] = 0.25 * p[i];
        b[n * (n + 1) + i] = -2.0 * p[i];
    }
    b
}

/// Equilibrium with prescribed mid-span deflection `delta`, by damped Newton
/// iteration from `guess`. Returns the weights and the conjugate load.
pub fn solve_constrained(arch: &NondimArch, delta: f64, guess: &[f64]) -> Result<(Vec<f64>, f64)> {
    arch.check_len(guess)?;
    let n = guess.len();
    let p = arch.load_pattern();
    if p.iter().all(|v| *v == 0.0) {
        return Err(Error::InvalidInput(
            "no retained mode moves the mid-span point",
        ));
    }
    let mut w = guess.to_vec();
    let mut f = vec![0.0; n];
    arch.internal_force_into(&w, &mut f);
    let mut force = -4.0 * dot(p, &f) / dot(p, p);
    let mut r = vec![0.0; n + 1];
    let mut res = residual(arch, delta, &w, force, &mut r);
    let mut trial_r = vec![0.0; n + 1];
    for _ in 0..NEWTON_MAX_ITER {
        if res <= NEWTON_TOL {
            return Ok((w, force));
        }
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let dx = solve(&bordered_matrix(arch, &w), &rhs, n + 1).ok_or(Error::NewtonDivergence {
            delta,
            residual: res,
        })?;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let tw: Vec<f64> = w.iter().zip(&dx).map(|(x, d)| x + lambda * d).collect();
            let tf = force + lambda * dx[n];
            let tres = residual(arch, delta, &tw, tf, &mut trial_r);
            if tres.is_finite() && tres < res {
                w = tw;
                force = tf;
                res = tres;
                core::mem::swap(&mut r, &mut trial_r);
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            // Stagnation at round-off level counts as convergence.
            if res <= 1e3 * NEWTON_TOL {
                return Ok((w, force));
            }
            return Err(Error::NewtonDivergence {
                delta,
                residual: res,
            });
        }
    }
    if res <= 1e3 * NEWTON_TOL {
        Ok((w, force))
    } else {
        Err(Error::NewtonDivergence {
            delta,
            residual: res,
        })
    }
}

/// `dF/d delta` along the displacement-controlled path at an equilibrium.
pub fn path_slope(arch: &NondimArch, w: &[f64]) -> f64 {
    let n = w.len();
    let mut rhs = vec![0.0; n + 1];
    rhs[n] = 1.0;
    match solve(&bordered_matrix(arch, w), &rhs, n + 1) {
        Some(x) => x[n],
        None => 0.0,
    }
}

fn min_eigenvalue(arch: &NondimArch, w: &[f64]) -> f64 {
    let n = w.len();
    let mut jac = vec![0.0; n * n];
    arch.jacobian_into(w, &mut jac);
    symmetric_eigen(&jac, n).0[0]
}

fn sample(arch: &NondimArch, delta: f64, weights: Vec<f64>, force: f64) -> EquilibriumSample {
    let slope = path_slope(arch, &weights);
    let min_eigenvalue = min_eigenvalue(arch, &weights);
    EquilibriumSample {
        delta,
        force,
        slope,
        min_eigenvalue,
        stable: min_eigenvalue > 0.0,
        weights,
    }
}

/// Continues an equilibrium from `(d0, w0)` to `d1`, subdividing when Newton fails.
fn continue_to(arch: &NondimArch, d0: f64, w0: &[f64], d1: f64) -> Result<(Vec<f64>, f64)> {
    let max_step = 0.01 * arch.midspan_rise().abs().max(1e-3);
    let pieces = libm::ceil(libm::fabs(d1 - d0) / max_step).max(1.0) as usize;
    let mut w = w0.to_vec();
    let mut force = 0.0;
    for k in 1..=pieces {
        let target = d0 + (d1 - d0) * k as f64 / pieces as f64;
        let prev = d0 + (d1 - d0) * (k - 1) as f64 / pieces as f64;
        (w, force) = continue_bisecting(arch, prev, &w, target, 0)?;
    }
    Ok((w, force))
}

fn continue_bisecting(
    arch: &NondimArch,
    d0: f64,
    w0: &[f64],
    d1: f64,
    depth: u32,
) -> Result<(Vec<f64>, f64)> {
    // Predictor: tangent of the path at the start point.
    let n = w0.len();
    let mut rhs = vec![0.0; n + 1];
    rhs[n] = 1.0;
    let guess: Vec<f64> = match solve(&bordered_matrix(arch, w0), &rhs, n + 1) {
        Some(t) => w0.iter().zip(&t).map(|(x, d)| x + (d1 - d0) * d).collect(),
        None => w0.to_vec(),
    };
    match solve_constrained(arch, d1, &guess) {
        Ok(v) => Ok(v),
        Err(e) if depth >= 12 => Err(e),
        Err(_) => {
            let mid = 0.5 * (d0 + d1);
            let (wm, _) = continue_bisecting(arch, d0, w0, mid, depth + 1)?;
            continue_bisecting(arch, mid, &wm, d1, depth + 1)
        }
    }
}

/// Static force-displacement curve sampled on a monotone grid of mid-span
/// deflections, continued from the as-fabricated shape.
pub fn trace_equilibrium_path(arch: &NondimArch, grid: &[f64]) -> Result<EquilibriumPath> {
    if grid.is_empty() || grid.iter().any(|d| !d.is_finite()) {
        return Err(Error::InvalidInput("grid must be non-empty and finite"));
    }
    let increasing = grid.windows(2).all(|w| w[1] > w[0]);
    let decreasing = grid.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) {
        return Err(Error::InvalidInput("grid must be strictly monotone"));
    }
    let mut samples = Vec::with_capacity(grid.len());
    let mut d = 0.0;
    let mut w = arch.weights().to_vec();
    for &target in grid {
        let (nw, force) = continue_to(arch, d, &w, target)?;
        w = nw;
        d = target;
        samples.push(sample(arch, d, w.clone(), force));
    }
    Ok(EquilibriumPath { samples })
}

/// Scalar normal form at a fold: `dbar'' + 2c dbar' = load_gain * eps + curvature * dbar^2`
/// with `A = A_c + (dbar / 2) * null_vector`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalForm {
    pub curvature: f64,
    pub load_gain: f64,
    pub null_vector: Vec<f64>,
    /// `|lambda_min| / |lambda_max|` of the gradient matrix at the fold.
    pub eigenvalue_ratio: f64,
}

/// Equilibrium on the far branch carrying the same load as the fold.
#[derive(Debug, Clone, PartialEq)]
pub struct RemoteState {
    pub delta: f64,
    pub weights: Vec<f64>,
    /// Normal-form coordinate `2 V1 . (A - A_c)` of this state.
    pub coordinate: f64,
}

/// Static switching state of an arch.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPoint {
    pub weights: Vec<f64>,
    pub delta: f64,
    pub force: f64,
    /// Normal-form curvature, positive.
    pub curvature: f64,
    /// Projection of the load pattern on the soft mode, positive.
    pub load_gain: f64,
    pub null_vector: Vec<f64>,
    pub eigenvalue_ratio: f64,
    pub remote: Option<RemoteState>,
    /// Time for a ramp to reach `F_c`; set by [`CriticalPoint::with_load`].
    pub tau_c: Option<f64>,
}

impl CriticalPoint {
    /// Normal-form coordinate `2 V1 . (A - A_c)`; increases toward switching.
    pub fn switching_coordinate(&self, w: &[f64]) -> f64 {
        2.0 * self
            .null_vector
            .iter()
            .zip(w.iter().zip(&self.weights))
            .map(|(v, (x, c))| v * (x - c))
            .sum::<f64>()
    }

    /// Time at which a ramp program reaches `F_c`.
    pub fn critical_time(&self, load: &LoadProgram) -> Option<f64> {
        match *load {
            LoadProgram::Ramp { f0, nu } if nu > 0.0 => Some((self.force - f0) / nu),
            _ => None,
        }
    }

    pub fn with_load(mut self, load: &LoadProgram) -> Self {
        self.tau_c = self.critical_time(load);
        self
    }
}

/// Closed-form fold of a one-mode arch.
pub fn critical_point_one_mode(arch: &NondimArch) -> Result<CriticalPoint> {
    if arch.len() != 1 {
        return Err(Error::InvalidInput(
            "closed-form fold needs a one-mode arch",
        ));
    }
    if arch.modes()[0] != 1 {
        return Err(Error::InvalidInput(
            "closed-form fold is derived for mode 1",
        ));
    }
    let a1 = arch.weights()[0];
    let q2 = arch.q() * arch.q();
    let radicand = a1 * a1 / 3.0 - 1.0 / (9.0 * q2);
    if !(a1 > 0.0) || !(radicand > 0.0) {
        return Err(Error::NotBistable);
    }
    let root = libm::sqrt(radicand);
    let delta = 2.0 * a1 - 2.0 * root;
    let m4 = arch.eigenvalues_fourth()[0];
    let force = crate::arch::internal_force_scalar(delta, arch)?;
    let k = 4.5 * q2 * m4 * (delta / 2.0 - a1);
    let curvature = libm::fabs(k);
    let cubic = 0.75 * q2 * m4;
    let far = delta + curvature / cubic;
    let weights = vec![a1 - delta / 2.0];
    let mut jac = [0.0];
    arch.jacobian_into(&weights, &mut jac);
    let lambda_max = libm::fabs(jac[0]).max(0.5 * m4);
    Ok(CriticalPoint {
        remote: Some(RemoteState {
            delta: far,
            weights: vec![a1 - far / 2.0],
            coordinate: far - delta,
        }),
        weights,
        delta,
        force,
        curvature,
        load_gain: 1.0,
        null_vector: vec![-1.0],
        eigenvalue_ratio: libm::fabs(jac[0]) / lambda_max,
        tau_c: None,
    })
}

/// Reduction of the mode equations at a fold to the scalar normal form.
pub fn reduce_to_normal_form(weights: &[f64], arch: &NondimArch) -> Result<NormalForm> {
    let d = gradient_and_hessians(weights, arch)?;
    let n = d.n;
    let (vals, vecs) = symmetric_eigen(&d.jacobian, n);
    let soft = (0..n)
        .min_by(|&i, &j| libm::fabs(vals[i]).total_cmp(&libm::fabs(vals[j])))
        .unwrap_or(0);
    let largest = vals.iter().fold(0.0f64, |m, v| m.max(libm::fabs(*v)));
    let mut v: Vec<f64> = (0..n).map(|r| vecs[r * n + soft]).collect();
    let p = arch.load_pattern();
    if dot(&v, p) > 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    let load_gain = -dot(&v, p);
    if !(load_gain > 1e-12) {
        return Err(Error::DegenerateReduction(load_gain));
    }
    let mut curvature = 0.0;
    for i in 0..n {
        let h = &d.hessians[i];
        let mut vhv = 0.0;
        for j in 0..n {
            for k in 0..n {
                vhv += v[j] * h[j * n + k] * v[k];
            }
        }
        curvature -= 0.5 * v[i] * vhv;
    }
    if !(curvature > 0.0) {
        return Err(Error::DegenerateReduction(curvature));
    }
    Ok(NormalForm {
        curvature,
        load_gain,
        null_vector: v,
        eigenvalue_ratio: if largest > 0.0 {
            libm::fabs(vals[soft]) / largest
        } else {
            0.0
        },
    })
}

/// Fold of an arch with any number of modes: the first force peak of the
/// displacement-controlled static path.
pub fn critical_point_multi_mode(arch: &NondimArch) -> Result<CriticalPoint> {
    let rise = arch.midspan_rise();
    if !(rise > 0.0) {
        return Err(Error::NotBistable);
    }
    let top = 2.0 * rise;
    let h = top / PATH_POINTS as f64;
    let mut prev_d = 0.0;
    let mut prev_w = arch.weights().to_vec();
    if !(path_slope(arch, &prev_w) > 0.0) {
        return Err(Error::NotBistable);
    }
    let mut bracket = None;
    for k in 1..=PATH_POINTS {
        let d = k as f64 * h;
        let (w, _) = continue_to(arch, prev_d, &prev_w, d)?;
        let slope = path_slope(arch, &w);
        if slope <= 0.0 {
            bracket = Some((prev_d, prev_w.clone(), d));
            break;
        }
        prev_d = d;
        prev_w = w;
    }
    let (lo, w_lo, hi) = bracket.ok_or(Error::NotBistable)?;
    let mut failure = None;
    let delta = brent(
        |d| match continue_to(arch, lo, &w_lo, d) {
            Ok((w, _)) => path_slope(arch, &w),
            Err(e) => {
                failure = Some(e);
                f64::NAN
            }
        },
        lo,
        hi,
        1e-15,
        200,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let delta = delta.ok_or(Error::NotBistable)?;
    let (weights, force) = continue_to(arch, lo, &w_lo, delta)?;
    let nf = reduce_to_normal_form(&weights, arch)?;
    let mut cp = CriticalPoint {
        weights,
        delta,
        force,
        curvature: nf.curvature,
        load_gain: nf.load_gain,
        null_vector: nf.null_vector,
        eigenvalue_ratio: nf.eigenvalue_ratio,
        remote: None,
        tau_c: None,
    };
    cp.remote = remote_state(arch, &cp);
    Ok(cp)
}

/// Fold of any arch: closed form for a one-mode arch, path search otherwise.
pub fn critical_point(arch: &NondimArch) -> Result<CriticalPoint> {
    if arch.len() == 1 && arch.modes()[0] == 1 {
        critical_point_one_mode(arch)
    } else {
        critical_point_multi_mode(arch)
    }
}

/// Far-branch equilibrium with `F = F_c`, found by continuing past the fold.
fn remote_state(arch: &NondimArch, cp: &CriticalPoint) -> Option<RemoteState> {
    // Implicit gradient flow at F = F_c (pseudo-transient continuation) from
    // just past the fold along +V1. The landing state can lie on a branch that
    // is not connected to the fold.
    let n = arch.len();
    let p = arch.load_pattern();
    let nudge = 1e-3 * (arch.midspan_rise() + 1.0);
    let mut w: Vec<f64> = cp
        .weights
        .iter()
        .zip(&cp.null_vector)
        .map(|(a, v)| a + nudge * v)
        .collect();
    let mut r = vec![0.0; n];
    let mut jac = vec![0.0; n * n];
    let residual = |w: &[f64], r: &mut [f64]| {
        arch.internal_force_into(w, r);
        for i in 0..n {
            r[i] += 0.25 * cp.force * p[i];
        }
        norm_inf(r) / equilibrium_scale(arch, w, cp.force)
    };
    let mut res = residual(&w, &mut r);
    let step_max = 0.02 * (arch.midspan_rise() + 1.0);
    let mut dt: f64 = 1e-6;
    let mut m = vec![0.0; n * n];
    for _ in 0..100_000 {
        if res < 1e-10 {
            break;
        }
        arch.jacobian_into(&w, &mut jac);
        let lowest = symmetric_eigen(&jac, n).0[0];
        if lowest < 0.0 {
            dt = dt.min(0.5 / -lowest);
        }
        m.copy_from_slice(&jac);
        for i in 0..n {
            m[i * n + i] += 1.0 / dt;
        }
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let dx = solve(&m, &rhs, n)?;
        let size = norm_inf(&dx);
        if size > step_max {
            dt *= 0.5;
            continue;
        }
        w.iter_mut().zip(&dx).for_each(|(a, d)| *a += d);
        res = residual(&w, &mut r);
        if !res.is_finite() {
            return None;
        }
        if size < 0.25 * step_max {
            dt *= 2.0;
        }
    }
    let weights = solve_at_load(arch, cp.force, &w)?;
    let coordinate = cp.switching_coordinate(&weights);
    if !(coordinate > 0.0) || !(min_eigenvalue(arch, &weights) > 0.0) {
        return None;
    }
    let delta = arch.midpoint_displacement(&weights);
    Some(RemoteState {
        delta,
        weights,
        coordinate,
    })
}

/// Size of the individual terms of the equilibrium residual.
fn equilibrium_scale(arch: &NondimArch, w: &[f64], force: f64) -> f64 {
    let m4 = arch.eigenvalues_fourth();
    m4.iter().fold(1.0f64, |m, v| m.max(*v)) * (1.0 + norm_inf(w) + norm_inf(arch.weights()))
        + libm::fabs(force)
}

/// Equilibrium at the fixed load `force`, by Newton iteration from `guess`.
fn solve_at_load(arch: &NondimArch, force: f64, guess: &[f64]) -> Option<Vec<f64>> {
    let n = arch.len();
    let p = arch.load_pattern();
    let mut w = guess.to_vec();
    let mut r = vec![0.0; n];
    let mut jac = vec![0.0; n * n];
    for _ in 0..NEWTON_MAX_ITER {
        arch.internal_force_into(&w, &mut r);
        for i in 0..n {
            r[i] += 0.25 * force * p[i];
        }
        if norm_inf(&r) / equilibrium_scale(arch, &w, force) <= NEWTON_TOL {
            return Some(w);
        }
        arch.jacobian_into(&w, &mut jac);
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let dx = solve(&jac, &rhs, n)?;
        w.iter_mut().zip(&dx).for_each(|(a, d)| *a += d);
    }
    None
}
