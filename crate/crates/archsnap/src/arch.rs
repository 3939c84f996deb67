//! Arch description, clamped-clamped buckling basis, scales, energies and the
//! internal forces of the mode equations.
//!
//! Units: lengths along the arch are measured in units of the mid-span rise
//! `h_mid`, time in `sqrt(rho A L^4 / E I)`. The nondimensional point load `F`
//! is the load that balances the one-mode cubic `X(delta)` on the static path,
//! i.e. `F = 8 f L^3 / (E I h_mid)` for a dimensional point load `f`. With that
//! choice each mode obeys
//!
//! ```text
//! 0.5 A_i'' + c A_i' + f_i(A) + 0.25 F p_i = 0
//! ```
//!
//! where `p_i` is one for modes deflecting the mid-span point and zero otherwise.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::dot;

const EVEN_EIGENVALUES: [f64; 3] = [2.86, 4.92, 6.94];

/// Buckling eigenvalue `M_i` of clamped-clamped mode `i` (1-based).
pub fn mode_eigenvalue(i: usize) -> Result<f64> {
    match i {
        0 => Err(Error::InvalidInput("mode numbers start at 1")),
        i if i % 2 == 1 => Ok((i as f64 + 1.0) * PI),
        2 | 4 | 6 => Ok(EVEN_EIGENVALUES[i / 2 - 1] * PI),
        i => Err(Error::UnsupportedMode(i)),
    }
}

/// Mode shape `phi_i(x)` on a span of length `span`.
pub fn mode_shape(i: usize, x: f64, span: f64) -> Result<f64> {
    if !(span > 0.0) || !(0.0..=span).contains(&x) {
        return Err(Error::InvalidInput("position must lie in [0, L]"));
    }
    let m = mode_eigenvalue(i)?;
    let xi = x / span;
    Ok(if i % 2 == 1 {
        1.0 - libm::cos(m * xi)
    } else {
        1.0 - 2.0 * xi - libm::cos(m * xi) + 2.0 * libm::sin(m * xi) / m
    })
}

/// Coefficient of mode `i` in the mid-span deflection, divided by two.
///
/// Symmetric modes `1, 5, 9, ...` have `phi_i(L/2) = 2`; modes `3, 7, ...` and the
/// antisymmetric modes vanish at mid-span.
pub fn load_weight(i: usize) -> f64 {
    if i % 4 == 1 {
        1.0
    } else {
        0.0
    }
}

/// Dimensional arch description. SI units are assumed but not required.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArchGeometry {
    /// Span `L`.
    pub span: f64,
    /// In-plane thickness `w`.
    pub thickness: f64,
    /// Out-of-plane width `d`.
    pub width: f64,
    /// Young's modulus `E`.
    pub youngs_modulus: f64,
    /// Mass density `rho`.
    pub density: f64,
    /// Mid-span rise `h_mid`.
    pub rise: f64,
}

impl ArchGeometry {
    pub fn second_moment(&self) -> f64 {
        self.width * self.thickness * self.thickness * self.thickness / 12.0
    }

    pub fn area(&self) -> f64 {
        self.width * self.thickness
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            self.span,
            self.thickness,
            self.width,
            self.youngs_modulus,
            self.density,
            self.rise,
        ];
        if fields.iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(Error::InvalidInput(
                "geometry fields must be positive and finite",
            ))
        }
    }

    /// True when the rise exceeds a fifth of the span, where the shallow-arch
    /// strain measure becomes questionable.
    pub fn exceeds_shallow_limit(&self) -> bool {
        self.rise / self.span > 0.2
    }
}

/// Reference scales tying nondimensional quantities to dimensional ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleSet {
    /// `E I h_mid / L^3`.
    pub force: f64,
    /// `sqrt(rho A L^4 / (E I))`.
    pub time: f64,
    /// `force / time`.
    pub rate: f64,
    /// `sqrt(E I rho A / L^2)`.
    pub damping: f64,
    /// `h_mid`.
    pub displacement: f64,
}

/// Ratio between the nondimensional point load used throughout the crate and
/// the load divided by `ScaleSet::force`.
pub const LOAD_FACTOR: f64 = 8.0;

impl ScaleSet {
    pub fn from_geometry(g: &ArchGeometry) -> Result<Self> {
        g.validate()?;
        let ei = g.youngs_modulus * g.second_moment();
        let rho_a = g.density * g.area();
        let l2 = g.span * g.span;
        let force = ei * g.rise / (l2 * g.span);
        let time = libm::sqrt(rho_a * l2 * l2 / ei);
        Ok(Self {
            force,
            time,
            rate: force / time,
            damping: libm::sqrt(ei * rho_a / (g.span * g.span)),
            displacement: g.rise,
        })
    }

    pub fn load_to_dimensional(&self, f: f64) -> f64 {
        f * self.force / LOAD_FACTOR
    }

    pub fn load_from_dimensional(&self, f: f64) -> f64 {
        f * LOAD_FACTOR / self.force
    }

    pub fn rate_to_dimensional(&self, nu: f64) -> f64 {
        nu * self.rate / LOAD_FACTOR
    }

    pub fn rate_from_dimensional(&self, nu: f64) -> f64 {
        nu * LOAD_FACTOR / self.rate
    }

    pub fn time_to_dimensional(&self, tau: f64) -> f64 {
        tau * self.time
    }

    pub fn time_from_dimensional(&self, t: f64) -> f64 {
        t / self.time
    }

    pub fn damping_to_dimensional(&self, c: f64) -> f64 {
        c * self.damping
    }

    pub fn damping_from_dimensional(&self, c: f64) -> f64 {
        c / self.damping
    }

    pub fn displacement_to_dimensional(&self, delta: f64) -> f64 {
        delta * self.displacement
    }

    pub fn displacement_from_dimensional(&self, d: f64) -> f64 {
        d / self.displacement
    }
}

/// Nondimensional arch: rise ratio `Q`, damping `c`, and the as-fabricated
/// weights `a` of the retained modes.
#[derive(Debug, Clone, PartialEq)]
pub struct NondimArch {
    q: f64,
    c: f64,
    modes: Vec<usize>,
    a: Vec<f64>,
    m2: Vec<f64>,
    m4: Vec<f64>,
    p: Vec<f64>,
    s0: f64,
}

impl NondimArch {
    /// Arch built on an explicit list of mode numbers.
    pub fn new(q: f64, c: f64, modes: Vec<usize>, a: Vec<f64>) -> Result<Self> {
        if !(q.is_finite() && q > 0.0) {
            return Err(Error::InvalidInput("Q must be positive"));
        }
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::InvalidInput("damping must be non-negative"));
        }
        if modes.is_empty() {
            return Err(Error::InvalidInput("at least one mode is required"));
        }
        if modes.len() != a.len() {
            return Err(Error::LengthMismatch {
                expected: modes.len(),
                got: a.len(),
            });
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("mode weights must be finite"));
        }
        for (k, i) in modes.iter().enumerate() {
            if modes[..k].contains(i) {
                return Err(Error::InvalidInput("mode numbers must be distinct"));
            }
        }
        let m: Vec<f64> = modes
            .iter()
            .map(|&i| mode_eigenvalue(i))
            .collect::<Result<_>>()?;
        let m2: Vec<f64> = m.iter().map(|v| v * v).collect();
        let m4 = m2.iter().map(|v| v * v).collect();
        let p = modes.iter().map(|&i| load_weight(i)).collect();
        let s0 = a.iter().zip(&m2).map(|(ai, mi)| ai * ai * mi).sum();
        Ok(Self {
            q,
            c,
            modes,
            a,
            m2,
            m4,
            p,
            s0,
        })
    }

    /// Modes `1..=N` with `N = a.len()`.
    pub fn consecutive(q: f64, c: f64, a: Vec<f64>) -> Result<Self> {
        let modes = (1..=a.len()).collect();
        Self::new(q, c, modes, a)
    }

    /// Symmetric family `1, 5, 9, ...` with `N = a.len()`.
    pub fn symmetric(q: f64, c: f64, a: Vec<f64>) -> Result<Self> {
        let modes = (0..a.len()).map(|k| 4 * k + 1).collect();
        Self::new(q, c, modes, a)
    }

    pub fn single_mode(q: f64, c: f64, a1: f64) -> Result<Self> {
        Self::new(q, c, vec![1], vec![a1])
    }

    /// Nondimensionalizes a dimensional arch with viscous damping `c_dim`.
    pub fn from_geometry(
        g: &ArchGeometry,
        c_dim: f64,
        modes: Vec<usize>,
        a: Vec<f64>,
    ) -> Result<(Self, ScaleSet)> {
        let scales = ScaleSet::from_geometry(g)?;
        let arch = Self::new(
            g.rise / g.thickness,
            scales.damping_from_dimensional(c_dim),
            modes,
            a,
        )?;
        Ok((arch, scales))
    }

    pub fn with_damping(&self, c: f64) -> Result<Self> {
        Self::new(self.q, c, self.modes.clone(), self.a.clone())
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn damping(&self) -> f64 {
        self.c
    }

    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    pub fn weights(&self) -> &[f64] {
        &self.a
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// `M_i^2` for each retained mode.
    pub fn eigenvalues_squared(&self) -> &[f64] {
        &self.m2
    }

    /// `M_i^4` for each retained mode.
    pub fn eigenvalues_fourth(&self) -> &[f64] {
        &self.m4
    }

    /// Load pattern `p`: one for modes that move the mid-span point.
    pub fn load_pattern(&self) -> &[f64] {
        &self.p
    }

    /// Mid-span rise of the as-fabricated shape in units of `h_mid`.
    pub fn midspan_rise(&self) -> f64 {
        2.0 * dot(&self.p, &self.a)
    }

    pub(crate) fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() == self.a.len() {
            Ok(())
        } else {
            Err(Error::LengthMismatch {
                expected: self.a.len(),
                got: v.len(),
            })
        }
    }

    /// Axial stretch measure `sum a_i^2 M_i^2 - sum A_i^2 M_i^2`.
    pub fn stretch(&self, w: &[f64]) -> f64 {
        self.s0 - w.iter().zip(&self.m2).map(|(x, m)| x * x * m).sum::<f64>()
    }

    /// Mid-span deflection `delta = 2 sum p_i (a_i - A_i)`.
    pub fn midpoint_displacement(&self, w: &[f64]) -> f64 {
        2.0 * self
            .p
            .iter()
            .zip(self.a.iter().zip(w))
            .map(|(p, (a, x))| p * (a - x))
            .sum::<f64>()
    }

    /// Writes the internal forces `f_i(A)` into `out` without allocating.
    pub fn internal_force_into(&self, w: &[f64], out: &mut [f64]) {
        let g = 1.5 * self.q * self.q * self.stretch(w);
        for i in 0..self.a.len() {
            out[i] = 0.5 * (w[i] - self.a[i]) * self.m4[i] - g * w[i] * self.m2[i];
        }
    }

    /// Writes the gradient matrix `df_i/dA_j` (row-major) into `out`.
    pub fn jacobian_into(&self, w: &[f64], out: &mut [f64]) {
        let n = self.a.len();
        let q2 = self.q * self.q;
        let g = 1.5 * q2 * self.stretch(w);
        for i in 0..n {
            let ui = w[i] * self.m2[i];
            for j in 0..n {
                out[i * n + j] = 3.0 * q2 * ui * w[j] * self.m2[j];
            }
            out[i * n + i] += 0.5 * self.m4[i] - g * self.m2[i];
        }
    }
}

/// Internal forces `f_i(A)` of the mode equations (all terms except inertia,
/// damping and load).
pub fn internal_force_vector(w: &[f64], arch: &NondimArch) -> Result<Vec<f64>> {
    arch.check_len(w)?;
    let mut out = vec![0.0; w.len()];
    arch.internal_force_into(w, &mut out);
    Ok(out)
}

/// One-mode force-displacement cubic `X(delta)`.
pub fn internal_force_scalar(delta: f64, arch: &NondimArch) -> Result<f64> {
    if arch.len() != 1 {
        return Err(Error::InvalidInput(
            "the scalar internal force needs a one-mode arch",
        ));
    }
    let a1 = arch.a[0];
    let q2 = arch.q * arch.q;
    let d = delta;
    Ok(3.0
        * q2
        * arch.m4[0]
        * (d * d * d / 4.0 - 1.5 * a1 * d * d + (2.0 * a1 * a1 + 1.0 / (3.0 * q2)) * d))
}

/// Load program applied at mid-span.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LoadProgram {
    /// Constant load `F_c + epsilon` applied at the critical state.
    Static { epsilon: f64 },
    /// Ramp `F(tau) = f0 + nu tau` from the as-fabricated state.
    Ramp { f0: f64, nu: f64 },
}

impl LoadProgram {
    pub fn static_offset(epsilon: f64) -> Result<Self> {
        if epsilon.is_finite() && epsilon >= 0.0 {
            Ok(Self::Static { epsilon })
        } else {
            Err(Error::InvalidInput("epsilon must be non-negative"))
        }
    }

    pub fn ramp(f0: f64, nu: f64) -> Result<Self> {
        if f0.is_finite() && nu.is_finite() && nu >= 0.0 {
            Ok(Self::Ramp { f0, nu })
        } else {
            Err(Error::InvalidInput("ramp rate must be non-negative"))
        }
    }

    /// Load at time `tau`; `f_c` is the static switching force.
    pub fn force(&self, tau: f64, f_c: f64) -> f64 {
        match *self {
            Self::Static { epsilon } => f_c + epsilon,
            Self::Ramp { f0, nu } => f0 + nu * tau,
        }
    }

    /// Load rate `dF/dtau`.
    pub fn rate(&self) -> f64 {
        match *self {
            Self::Static { .. } => 0.0,
            Self::Ramp { nu, .. } => nu,
        }
    }

    pub fn is_ramp(&self) -> bool {
        matches!(self, Self::Ramp { .. })
    }
}

/// Mode weights and their rates at time `tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub tau: f64,
    pub weights: Vec<f64>,
    pub rates: Vec<f64>,
}

impl StateVector {
    /// As-fabricated shape at rest.
    pub fn at_rest(arch: &NondimArch) -> Self {
        Self {
            tau: 0.0,
            weights: arch.a.clone(),
            rates: vec![0.0; arch.len()],
        }
    }

    pub fn midpoint_displacement(&self, arch: &NondimArch) -> f64 {
        arch.midpoint_displacement(&self.weights)
    }
}

/// Energy budget of a state under load `F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Energies {
    pub bending: f64,
    pub compression: f64,
    /// Potential of the point load, `-F delta / 8`.
    pub work: f64,
    pub kinetic: f64,
    pub total: f64,
}

/// Energies scaled so that `f_i = d(bending + compression)/dA_i`.
pub fn total_energy(state: &StateVector, arch: &NondimArch, force: f64) -> Result<Energies> {
    arch.check_len(&state.weights)?;
    arch.check_len(&state.rates)?;
    Ok(energies_of(arch, &state.weights, &state.rates, force))
}

pub(crate) fn energies_of(arch: &NondimArch, w: &[f64], rates: &[f64], force: f64) -> Energies {
    let bending = 0.25
        * w.iter()
            .zip(&arch.a)
            .zip(&arch.m4)
            .map(|((x, a), m)| (x - a) * (x - a) * m)
            .sum::<f64>();
    let s = arch.stretch(w);
    let compression = 0.375 * arch.q * arch.q * s * s;
    let work = -force * arch.midpoint_displacement(w) / 8.0;
    let kinetic = 0.25 * rates.iter().map(|v| v * v).sum::<f64>();
    Energies {
        bending,
        compression,
        work,
        kinetic,
        total: bending + compression + work + kinetic,
    }
}
