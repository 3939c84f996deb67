//! Incomplete elliptic integral of the first kind and Airy functions.

use core::f64::consts::PI;

use crate::error::{Error, Result};

/// Carlson's symmetric integral `R_F(x, y, z)` for non-negative arguments with
/// at most one zero.
pub fn carlson_rf(x: f64, y: f64, z: f64) -> Result<f64> {
    if x < 0.0 || y < 0.0 || z < 0.0 || (x + y == 0.0) || (y + z == 0.0) || (x + z == 0.0) {
        return Err(Error::InvalidInput(
            "R_F needs non-negative arguments, at most one zero",
        ));
    }
    let (mut x, mut y, mut z) = (x, y, z);
    let mut a = (x + y + z) / 3.0;
    let mut q = libm::pow(3.0 * 1e-17, -1.0 / 6.0)
        * libm::fabs(a - x)
            .max(libm::fabs(a - y))
            .max(libm::fabs(a - z));
    while q >= libm::fabs(a) {
        let (sx, sy, sz) = (libm::sqrt(x), libm::sqrt(y), libm::sqrt(z));
        let lam = sx * sy + sy * sz + sz * sx;
        x = 0.25 * (x + lam);
        y = 0.25 * (y + lam);
        z = 0.25 * (z + lam);
        a = 0.25 * (a + lam);
        q *= 0.25;
    }
    let dx = 1.0 - x / a;
    let dy = 1.0 - y / a;
    let dz = -(dx + dy);
    let e2 = dx * dy - dz * dz;
    let e3 = dx * dy * dz;
    Ok((1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0) / libm::sqrt(a))
}

/// Complete integral `K(k)`.
pub fn complete_k(k: f64) -> Result<f64> {
    check_modulus(k)?;
    carlson_rf(0.0, 1.0 - k * k, 1.0)
}

fn check_modulus(k: f64) -> Result<()> {
    if (0.0..1.0).contains(&k) {
        Ok(())
    } else {
        Err(Error::InvalidInput("elliptic modulus must lie in [0, 1)"))
    }
}

/// Legendre incomplete integral `F(phi, k) = int_0^phi dt / sqrt(1 - k^2 sin^2 t)`
/// for any finite amplitude.
pub fn elliptic_f(phi: f64, k: f64) -> Result<f64> {
    check_modulus(k)?;
    if !phi.is_finite() {
        return Err(Error::InvalidInput("amplitude must be finite"));
    }
    let n = libm::round(phi / PI);
    let psi = phi - n * PI;
    let (s, c) = (libm::sin(psi), libm::cos(psi));
    let base = if s == 0.0 {
        0.0
    } else {
        s * carlson_rf(c * c, 1.0 - k * k * s * s, 1.0)?
    };
    if n == 0.0 {
        Ok(base)
    } else {
        Ok(base + 2.0 * n * complete_k(k)?)
    }
}

/// `Ai`, `Bi` and their derivatives at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryPair {
    pub ai: f64,
    pub bi: f64,
    pub ai_prime: f64,
    pub bi_prime: f64,
}

impl AiryPair {
    pub fn wronskian(&self) -> f64 {
        self.ai * self.bi_prime - self.ai_prime * self.bi
    }
}

/// `Ai(0)`.
pub const AI0: f64 = 0.355_028_053_887_817_239;
/// `-Ai'(0)`.
pub const AIP0: f64 = 0.258_819_403_792_806_798;
const SQRT3: f64 = 1.732_050_807_568_877_2;

const MACLAURIN_LIMIT: f64 = 2.0;
const ASYMPTOTIC_LIMIT: f64 = 10.0;
const MAX_ARGUMENT: f64 = 50.0;

/// Airy functions for `|z| <= 50`.
pub fn airy(z: f64) -> Result<AiryPair> {
    if !(libm::fabs(z) <= MAX_ARGUMENT) {
        return Err(Error::OverflowGuard(z));
    }
    Ok(if libm::fabs(z) <= MACLAURIN_LIMIT {
        airy_maclaurin(z)
    } else if z > 0.0 {
        let (bi, bi_prime) = bi_maclaurin(z);
        let (ai, ai_prime) = ai_bessel_k(z);
        AiryPair {
            ai,
            bi,
            ai_prime,
            bi_prime,
        }
    } else if z >= -ASYMPTOTIC_LIMIT {
        airy_continued(z)
    } else {
        airy_asymptotic_negative(z)
    })
}

/// The two standard power-series solutions `f`, `g` and their derivatives.
fn maclaurin_fg(z: f64) -> [f64; 4] {
    let z3 = z * z * z;
    let (mut f, mut fp, mut g, mut gp) = (1.0, 0.0, z, 1.0);
    let (mut tf, mut tfp, mut tg, mut tgp) = (1.0, 0.5 * z * z, z, 1.0);
    fp += tfp;
    let mut k = 1.0;
    loop {
        tf *= z3 / ((3.0 * k - 1.0) * (3.0 * k));
        tg *= z3 / ((3.0 * k) * (3.0 * k + 1.0));
        tgp *= z3 / ((3.0 * k) * (3.0 * k - 2.0));
        f += tf;
        g += tg;
        gp += tgp;
        if k >= 2.0 {
            tfp *= z3 / ((3.0 * k - 1.0) * (3.0 * k - 3.0));
            fp += tfp;
        }
        let small = |t: f64, s: f64| libm::fabs(t) <= 1e-18 * libm::fabs(s);
        if k > 3.0 && small(tf, f) && small(tg, g) && small(tfp, fp) && small(tgp, gp) {
            break;
        }
        if tf == 0.0 && tg == 0.0 {
            break;
        }
        k += 1.0;
    }
    [f, fp, g, gp]
}

fn airy_maclaurin(z: f64) -> AiryPair {
    let [f, fp, g, gp] = maclaurin_fg(z);
    AiryPair {
        ai: AI0 * f - AIP0 * g,
        ai_prime: AI0 * fp - AIP0 * gp,
        bi: SQRT3 * (AI0 * f + AIP0 * g),
        bi_prime: SQRT3 * (AI0 * fp + AIP0 * gp),
    }
}

fn bi_maclaurin(z: f64) -> (f64, f64) {
    let [f, fp, g, gp] = maclaurin_fg(z);
    (SQRT3 * (AI0 * f + AIP0 * g), SQRT3 * (AI0 * fp + AIP0 * gp))
}

/// `K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt` by the trapezoidal rule,
/// which converges geometrically for this analytic integrand.
fn bessel_k(nu: f64, x: f64) -> f64 {
    libm::exp(-x) * bessel_k_scaled(nu, x)
}

/// `exp(x) K_nu(x)`.
fn bessel_k_scaled(nu: f64, x: f64) -> f64 {
    // The integrand is close to a Gaussian of width 1/sqrt(x) near t = 0.
    let h = 0.05f64.min(0.5 / libm::sqrt(x));
    let mut sum = 0.5;
    let mut j = 1.0;
    loop {
        let t = j * h;
        let term = libm::exp(-x * (libm::cosh(t) - 1.0)) * libm::cosh(nu * t);
        sum += term;
        if term <= 1e-18 * sum {
            break;
        }
        j += 1.0;
    }
    h * sum
}

fn ai_bessel_k(z: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * z * libm::sqrt(z);
    let ai = libm::sqrt(z / 3.0) * bessel_k(1.0 / 3.0, zeta) / PI;
    let ai_prime = -z / (PI * SQRT3) * bessel_k(2.0 / 3.0, zeta);
    (ai, ai_prime)
}

/// Continues `(Ai, Ai', Bi, Bi')` from `-2` to `z` along the real axis with
/// local Taylor expansions of `y'' = z y`.
fn airy_continued(z: f64) -> AiryPair {
    let start = airy_maclaurin(-MACLAURIN_LIMIT);
    let mut at = -MACLAURIN_LIMIT;
    let mut ya = [start.ai, start.ai_prime];
    let mut yb = [start.bi, start.bi_prime];
    let steps = libm::ceil((at - z) / 0.25) as usize;
    let h = (z - at) / steps as f64;
    for _ in 0..steps {
        ya = taylor_step(at, ya, h);
        yb = taylor_step(at, yb, h);
        at += h;
    }
    AiryPair {
        ai: ya[0],
        ai_prime: ya[1],
        bi: yb[0],
        bi_prime: yb[1],
    }
}

fn taylor_step(z0: f64, y: [f64; 2], h: f64) -> [f64; 2] {
    // c[n] are the Taylor coefficients of y about z0.
    let mut c = [0.0f64; 40];
    c[0] = y[0];
    c[1] = y[1];
    c[2] = 0.5 * z0 * c[0];
    for n in 1..38 {
        c[n + 2] = (z0 * c[n] + c[n - 1]) / ((n + 2) as f64 * (n + 1) as f64);
    }
    let (mut v, mut d) = (0.0, 0.0);
    for n in (0..40).rev() {
        v = v * h + c[n];
        if n > 0 {
            d = d * h + n as f64 * c[n];
        }
    }
    [v, d]
}

fn airy_asymptotic_negative(z: f64) -> AiryPair {
    let x = -z;
    let zeta = 2.0 / 3.0 * x * libm::sqrt(x);
    // Sums of (-1)^k u_{2k} zeta^{-2k}, (-1)^k u_{2k+1} zeta^{-2k-1}, and likewise for v.
    let (mut pu, mut qu, mut pv, mut qv) = (1.0, 0.0, 1.0, 0.0);
    let mut u = 1.0;
    let mut zp = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
        let v = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u;
        zp /= zeta;
        let tu = u * zp;
        if libm::fabs(tu) >= last {
            break;
        }
        last = libm::fabs(tu);
        let tv = v * zp;
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            pu += sign * tu;
            pv += sign * tv;
        } else {
            qu += sign * tu;
            qv += sign * tv;
        }
        if last < 1e-17 {
            break;
        }
    }
    let theta = zeta - PI / 4.0;
    let (s, c) = (libm::sin(theta), libm::cos(theta));
    let amp = 1.0 / libm::sqrt(PI);
    let x4 = libm::pow(x, 0.25);
    AiryPair {
        ai: amp / x4 * (c * pu + s * qu),
        bi: amp / x4 * (-s * pu + c * qu),
        ai_prime: amp * x4 * (s * pv - c * qv),
        bi_prime: amp * x4 * (c * pv + s * qv),
    }
}

/// Airy functions from the asymptotic expansion on the negative axis, exposed
/// for cross-checks near the switchover.
pub fn airy_negative_asymptotic(z: f64) -> Result<AiryPair> {
    if !(-MAX_ARGUMENT..=-5.0).contains(&z) {
        return Err(Error::OverflowGuard(z));
    }
    Ok(airy_asymptotic_negative(z))
}

/// Airy functions from local Taylor continuation, exposed for cross-checks.
pub fn airy_negative_series(z: f64) -> Result<AiryPair> {
    if !(-2.0 * ASYMPTOTIC_LIMIT..=0.0).contains(&z) {
        return Err(Error::OverflowGuard(z));
    }
    Ok(if z >= -MACLAURIN_LIMIT {
        airy_maclaurin(z)
    } else {
        airy_continued(z)
    })
}

/// Logarithmic derivative `Ai'(z) / Ai(z)` for `z >= -50`, valid for arbitrarily
/// large positive `z` where `Ai` itself underflows.
pub fn airy_ai_log_derivative(z: f64) -> Result<f64> {
    if z > MACLAURIN_LIMIT && z.is_finite() {
        let zeta = 2.0 / 3.0 * z * libm::sqrt(z);
        let ratio = bessel_k_scaled(2.0 / 3.0, zeta) / bessel_k_scaled(1.0 / 3.0, zeta);
        return Ok(-libm::sqrt(z) * ratio);
    }
    let p = airy(z)?;
    Ok(p.ai_prime / p.ai)
}

/// First zero `z*` of `Ai(-z)`, about 2.33810741.
pub fn airy_first_negative_zero() -> f64 {
    let ai = |z: f64| airy(-z).map(|p| p.ai).unwrap_or(f64::NAN);
    let (mut lo, mut hi) = (2.0, 3.0);
    for _ in 0..20 {
        let mid = 0.5 * (lo + hi);
        if ai(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut z = 0.5 * (lo + hi);
    for _ in 0..8 {
        let p = match airy(-z) {
            Ok(p) => p,
            Err(_) => break,
        };
        // d/dz Ai(-z) = -Ai'(-z)
        let step = p.ai / -p.ai_prime;
        z -= step;
        if libm::fabs(step) < 1e-15 {
            break;
        }
    }
    z
}
