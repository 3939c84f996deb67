//! Closed-form switching times and trajectories of the scalar normal form
//!
//! ```text
//! dbar'' + c dbar' = eps + K dbar^2        (static load)
//! dbar'' + c dbar' = nu taubar + K dbar^2  (ramp, taubar measured from F_c)
//! ```
//!
//! in its damping-dominated (`dbar''` dropped) and inertial (`c = 0`) limits.

use core::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::arch::{LoadProgram, NondimArch};
use crate::error::{Error, Result};
use crate::specfun::{airy_ai_log_derivative, airy_first_negative_zero, elliptic_f};
use crate::statics::CriticalPoint;

/// Ramp delay coefficient of the inertial limit.
pub const RAMP_UNDAMPED_COEFFICIENT: f64 = 3.22;

fn positive(v: f64, what: &'static str) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(what))
    }
}

/// `(1/sqrt 2) 3^(1/4) F(pi, 1/sqrt 2)`, about 3.4508.
pub fn static_undamped_coefficient() -> f64 {
    FRAC_1_SQRT_2 * libm::pow(3.0, 0.25) * elliptic_f(PI, FRAC_1_SQRT_2).unwrap_or(f64::NAN)
}

/// Ramp coefficient obtained by mapping the autonomous blow-up time through
/// `X = (4/5) taubar^(5/4)`; about 3.2201.
pub fn boutroux_coefficient() -> f64 {
    libm::pow(1.25 * static_undamped_coefficient(), 0.8)
}

pub fn switch_time_static_damped(k: f64, eps: f64, c: f64) -> Result<f64> {
    positive(k, "curvature must be positive")?;
    positive(eps, "epsilon must be positive")?;
    positive(c, "damping must be positive")?;
    Ok(0.5 * PI * c / libm::sqrt(k * eps))
}

pub fn switch_time_static_undamped(k: f64, eps: f64) -> Result<f64> {
    positive(k, "curvature must be positive")?;
    positive(eps, "epsilon must be positive")?;
    Ok(static_undamped_coefficient() * libm::pow(k * eps, -0.25))
}

/// Delay past `F_c` for the damping-dominated ramp.
pub fn ramp_damped_delay(k: f64, nu: f64, c: f64) -> Result<f64> {
    positive(k, "curvature must be positive")?;
    positive(nu, "load rate must be positive")?;
    positive(c, "damping must be positive")?;
    Ok(airy_first_negative_zero() * libm::pow(k * nu / (c * c), -1.0 / 3.0))
}

/// Delay past `F_c` for the inertial ramp.
pub fn ramp_undamped_delay(k: f64, nu: f64) -> Result<f64> {
    positive(k, "curvature must be positive")?;
    positive(nu, "load rate must be positive")?;
    Ok(RAMP_UNDAMPED_COEFFICIENT * libm::pow(k * nu, -0.2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    StaticDamped,
    StaticUndamped,
    RampDamped,
    RampUndamped,
}

impl Regime {
    pub const ALL: [Regime; 4] = [
        Self::StaticDamped,
        Self::StaticUndamped,
        Self::RampDamped,
        Self::RampUndamped,
    ];

    pub fn new(ramp: bool, damped: bool) -> Self {
        match (ramp, damped) {
            (false, true) => Self::StaticDamped,
            (false, false) => Self::StaticUndamped,
            (true, true) => Self::RampDamped,
            (true, false) => Self::RampUndamped,
        }
    }

    pub fn is_ramp(self) -> bool {
        matches!(self, Self::RampDamped | Self::RampUndamped)
    }

    pub fn is_damped(self) -> bool {
        matches!(self, Self::StaticDamped | Self::RampDamped)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::StaticDamped => "static-damped",
            Self::StaticUndamped => "static-undamped",
            Self::RampDamped => "ramp-damped",
            Self::RampUndamped => "ramp-undamped",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.name() == s)
    }
}

impl core::fmt::Display for Regime {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

/// Predicted switching of one experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchingPrediction {
    pub regime: Regime,
    /// Time from the start of the experiment to switching.
    pub tau_inf: f64,
    /// Time spent beyond `F_c` (ramps only).
    pub delay: Option<f64>,
    /// Load at switching (ramps only).
    pub f_switch: Option<f64>,
    /// Time at which the ramp reaches `F_c`; zero for static loads.
    pub tau_c: f64,
    /// Normal-form curvature.
    pub curvature: f64,
    /// Normal-form forcing: `eps` for static loads, `nu` for ramps.
    pub forcing: f64,
    /// Normal-form damping (zero in the inertial limit).
    pub damping: f64,
}

impl SwitchingPrediction {
    /// Normal-form coordinate at experiment time `tau`. Not available for the
    /// inertial ramp, which has no closed-form trajectory.
    pub fn displacement_at(&self, tau: f64) -> Result<f64> {
        let (k, f, c) = (self.curvature, self.forcing, self.damping);
        match self.regime {
            Regime::StaticDamped => trajectory_static_damped(tau, k, f, c),
            Regime::RampDamped => trajectory_ramp_damped(tau - self.tau_c, k, f, c),
            Regime::StaticUndamped => {
                if !(0.0..self.tau_inf).contains(&tau) {
                    return Err(Error::BeyondPole);
                }
                // tau(dbar) is increasing; invert by bisection on a bracket grown geometrically.
                let mut hi = libm::sqrt(f / k).max(1e-300);
                while trajectory_static_undamped_time_of(hi, k, f)? < tau {
                    hi *= 2.0;
                }
                crate::roots::brent(
                    |d| trajectory_static_undamped_time_of(d, k, f).unwrap_or(f64::NAN) - tau,
                    0.0,
                    hi,
                    1e-15 * hi,
                    200,
                )
                .ok_or(Error::BeyondPole)
            }
            Regime::RampUndamped => Err(Error::InvalidInput(
                "no closed-form trajectory for the inertial ramp",
            )),
        }
    }
}

pub fn switch_time_ramp_damped(
    k: f64,
    nu: f64,
    c: f64,
    tau_c: f64,
    f_c: f64,
) -> Result<SwitchingPrediction> {
    let delay = ramp_damped_delay(k, nu, c)?;
    Ok(SwitchingPrediction {
        regime: Regime::RampDamped,
        tau_inf: tau_c + delay,
        delay: Some(delay),
        f_switch: Some(f_c + nu * delay),
        tau_c,
        curvature: k,
        forcing: nu,
        damping: c,
    })
}

pub fn switch_time_ramp_undamped(
    k: f64,
    nu: f64,
    tau_c: f64,
    f_c: f64,
) -> Result<SwitchingPrediction> {
    let delay = ramp_undamped_delay(k, nu)?;
    Ok(SwitchingPrediction {
        regime: Regime::RampUndamped,
        tau_inf: tau_c + delay,
        delay: Some(delay),
        f_switch: Some(f_c + nu * delay),
        tau_c,
        curvature: k,
        forcing: nu,
        damping: 0.0,
    })
}

/// Damped static trajectory `sqrt(eps/K) tan(sqrt(K eps) tau / c)`.
pub fn trajectory_static_damped(tau: f64, k: f64, eps: f64, c: f64) -> Result<f64> {
    let t_inf = switch_time_static_damped(k, eps, c)?;
    if !(0.0..t_inf).contains(&tau) {
        return Err(Error::BeyondPole);
    }
    Ok(libm::sqrt(eps / k) * libm::tan(libm::sqrt(k * eps) * tau / c))
}

/// Time at which the inertial static trajectory reaches `dbar`.
pub fn trajectory_static_undamped_time_of(dbar: f64, k: f64, eps: f64) -> Result<f64> {
    positive(k, "curvature must be positive")?;
    positive(eps, "epsilon must be positive")?;
    if !(dbar >= 0.0) {
        return Err(Error::InvalidInput("displacement must be non-negative"));
    }
    let a = libm::sqrt(3.0 * eps);
    let b = libm::sqrt(k) * dbar;
    let arg = if dbar.is_infinite() {
        -1.0
    } else {
        ((a - b) / (a + b)).clamp(-1.0, 1.0)
    };
    let amp = libm::acos(arg);
    Ok(FRAC_1_SQRT_2 * libm::pow(3.0 / (k * eps), 0.25) * elliptic_f(amp, FRAC_1_SQRT_2)?)
}

/// Pullback trajectory of the damped ramp at shifted time `taubar`.
pub fn trajectory_ramp_damped(taubar: f64, k: f64, nu: f64, c: f64) -> Result<f64> {
    positive(k, "curvature must be positive")?;
    positive(nu, "load rate must be positive")?;
    positive(c, "damping must be positive")?;
    let alpha = libm::cbrt(k * nu / (c * c));
    let z = alpha * taubar;
    if !(z < airy_first_negative_zero()) {
        return Err(Error::BeyondPole);
    }
    Ok(c * alpha / k * airy_ai_log_derivative(-z)?)
}

/// Closed-form prediction for an arch at its fold.
///
/// The normal form of the mode equations has damping `2c`, forcing
/// `load_gain * eps` (or `load_gain * nu`) and curvature `cp.curvature`.
pub fn predict(
    arch: &NondimArch,
    cp: &CriticalPoint,
    load: &LoadProgram,
    damped: bool,
) -> Result<SwitchingPrediction> {
    let gamma = 2.0 * arch.damping();
    let k = cp.curvature;
    let gain = cp.load_gain;
    if damped && !(gamma > 0.0) {
        return Err(Error::InvalidInput(
            "damped prediction needs positive damping",
        ));
    }
    match *load {
        LoadProgram::Static { epsilon } => {
            let eps = gain * epsilon;
            let (regime, tau_inf) = if damped {
                (
                    Regime::StaticDamped,
                    switch_time_static_damped(k, eps, gamma)?,
                )
            } else {
                (Regime::StaticUndamped, switch_time_static_undamped(k, eps)?)
            };
            Ok(SwitchingPrediction {
                regime,
                tau_inf,
                delay: None,
                f_switch: None,
                tau_c: 0.0,
                curvature: k,
                forcing: eps,
                damping: if damped { gamma } else { 0.0 },
            })
        }
        LoadProgram::Ramp { nu, .. } => {
            positive(nu, "load rate must be positive")?;
            let tau_c = cp.critical_time(load).unwrap_or(f64::NAN);
            if !(tau_c >= 0.0) {
                return Err(Error::InvalidInput(
                    "ramp must start below the switching load",
                ));
            }
            let nubar = gain * nu;
            let mut pred = if damped {
                switch_time_ramp_damped(k, nubar, gamma, tau_c, cp.force)?
            } else {
                switch_time_ramp_undamped(k, nubar, tau_c, cp.force)?
            };
            let delay = pred.delay.unwrap_or(0.0);
            pred.f_switch = Some(cp.force + nu * delay);
            Ok(pred)
        }
    }
}
