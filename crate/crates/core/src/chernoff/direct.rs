//! Direct-imaging (photon position) exponents in the weak-source model.

use alloc::vec::Vec;
use core::f64::consts::{LN_2, PI};
#[allow(unused_imports)]
use num_traits::Float;

use super::{minimize_log_qs, ExponentResult};
use crate::error::{Error, Result};
use crate::psf::{PsfFamily, PsfModel};
use crate::quad::{integrate_panels, try_integrate_panels, uniform_panels, QuadOptions};
use crate::special::{bessel_j1, sinc};

/// Radius, in units of σ_x, of the explicitly integrated rect domain.
const RECT_RADIUS: f64 = 2000.0;
/// Radii, in units of σ_c, of the two circ domains used for extrapolation.
const CIRC_RADII: [f64; 2] = [100.0, 200.0];

/// Photon-position density for one detected photon:
/// `Υ(x, y; d) = ½|ψ(x − d/2, y)|² + ½|ψ(x + d/2, y)|²`.
pub fn upsilon(model: &PsfModel, x: f64, y: f64, d: f64) -> f64 {
    0.5 * model.intensity(x - 0.5 * d, y) + 0.5 * model.intensity(x + 0.5 * d, y)
}

/// Fourth-order central difference for `∂²Υ/∂d²` at `d = 0`, using that
/// `Υ` is even in `d`.
pub fn upsilon_second_derivative_fd(model: &PsfModel, x: f64, y: f64, h: f64) -> f64 {
    let f = |d| upsilon(model, x, y, d);
    (-2.0 * f(2.0 * h) + 32.0 * f(h) - 30.0 * f(0.0)) / (12.0 * h * h)
}

/// `𝒦 = ∬ [∂²Υ/∂d²|₀]² / Υ(·; 0)`.
///
/// Finite only for the Gaussian, where it equals `1/(8σ⁴)`. The rect and
/// circ intensities vanish on lines and rings where their curvature does
/// not, so the integrand has non-integrable `1/r²` singularities there and
/// the result is `+∞`.
pub fn kappa_integral(model: &PsfModel) -> Result<f64> {
    match model.family() {
        PsfFamily::Gaussian => {
            let s = model.sigma();
            let s2 = s * s;
            // Υ⁽²⁾(x, y; 0) = ¼ ∂²ₓ|ψ|² and |ψ|² factorizes into normal densities.
            let f = |x: f64| {
                let g = (-x * x / (2.0 * s2)).exp() / (2.0 * PI * s2).sqrt();
                let c = (x * x / s2 - 1.0) / s2;
                g * c * c / 16.0
            };
            let r = 14.0 * s;
            let v = integrate_panels(f, &[-r, 0.0, r], QuadOptions::with_tol(0.0, 1e-13))?;
            Ok(v.value)
        }
        PsfFamily::Rect | PsfFamily::Circ => Ok(f64::INFINITY),
    }
}

/// Small-separation direct-imaging exponent `d⁴𝒦/32`.
pub fn di_conditional_smalld(model: &PsfModel, d: f64) -> Result<f64> {
    if d == 0.0 {
        return Ok(0.0);
    }
    Ok(d.powi(4) * kappa_integral(model)? / 32.0)
}

/// `s Υ_d + (1 − s) Υ₀ − Υ₀^{1−s} Υ_d^s ≥ 0`, with `t = Υ_d/Υ₀ − 1`
/// supplied when it is known more accurately than the quotient.
fn deficit_density(s: f64, y0: f64, yd: f64, t: Option<f64>) -> f64 {
    if y0 < 1e-300 {
        return s * yd + (1.0 - s) * y0;
    }
    let t = t.unwrap_or_else(|| (yd - y0) / y0);
    if t.abs() < 0.5 {
        return y0 * (s * t - (s * t.ln_1p()).exp_m1());
    }
    let mixed = if yd > 0.0 {
        ((1.0 - s) * y0.ln() + s * yd.ln()).exp()
    } else {
        0.0
    };
    (s * yd + (1.0 - s) * y0 - mixed).max(0.0)
}

pub(crate) fn ln_cosh(z: f64) -> f64 {
    let z = z.abs();
    if z < 1.0 {
        let h = (0.5 * z).sinh();
        (2.0 * h * h).ln_1p()
    } else {
        z + (-2.0 * z).exp().ln_1p() - LN_2
    }
}

/// `1 − Q_s = 1 − ∬ Υ₀^{1−s} Υ_d^s`.
fn deficit(model: &PsfModel, d: f64, s: f64) -> Result<f64> {
    if s <= 0.0 || s >= 1.0 {
        return Ok(0.0);
    }
    match model.family() {
        PsfFamily::Gaussian => {
            // Υ factorizes; the x marginal ratio is e^{−d²/8σ²} cosh(xd/2σ²).
            let sg = model.sigma();
            let s2 = sg * sg;
            let f = |x: f64| {
                let g = (-x * x / (2.0 * s2)).exp() / (2.0 * PI * s2).sqrt();
                let t = (ln_cosh(x * d / (2.0 * s2)) - d * d / (8.0 * s2)).exp_m1();
                deficit_density(s, g, g * (1.0 + t), Some(t))
            };
            let r = 14.0 * sg + 0.5 * d;
            let points = [-r, -0.5 * d, 0.0, 0.5 * d, r];
            let points: Vec<f64> = dedup(&points);
            Ok(integrate_panels(f, &points, QuadOptions::with_tol(1e-19, 1e-11))?.value)
        }
        PsfFamily::Rect => {
            let a = d / model.sigma();
            let sq = |u: f64| {
                let v = sinc(u);
                v * v
            };
            let f = |u: f64| {
                let y0 = sq(u) / PI;
                let yd = 0.5 * (sq(u - 0.5 * a) + sq(u + 0.5 * a)) / PI;
                deficit_density(s, y0, yd, None)
            };
            let points = uniform_panels(-RECT_RADIUS, RECT_RADIUS, PI);
            let opts = QuadOptions {
                abs_tol: 1e-16,
                rel_tol: 1e-9,
                max_subdivisions: 200_000,
            };
            let body = integrate_panels(f, &points, opts)?.value;
            let period = |u: f64| {
                let p0 = u.sin().powi(2);
                let pd = 0.5 * ((u - 0.5 * a).sin().powi(2) + (u + 0.5 * a).sin().powi(2));
                deficit_density(s, p0, pd, None)
            };
            let avg = integrate_panels(period, &[0.0, 0.5 * PI, PI], QuadOptions::with_tol(1e-16, 1e-10))?
                .value
                / PI;
            Ok(body + 2.0 * avg / (PI * RECT_RADIUS))
        }
        PsfFamily::Circ => {
            let sc = model.sigma();
            let c = 0.5 * d / sc;
            let inten = |x: f64, y: f64| {
                let r = x.hypot(y);
                let j = if r < 1e-4 { 1.0 - r * r / 8.0 } else { 2.0 * bessel_j1(r) / r };
                j * j / (4.0 * PI)
            };
            let inner = |rho: f64| -> Result<f64> {
                if rho == 0.0 {
                    return Ok(0.0);
                }
                let y0 = inten(rho, 0.0);
                let g = |th: f64| {
                    let (x, y) = (rho * th.cos(), rho * th.sin());
                    let yd = 0.5 * (inten(x - c, y) + inten(x + c, y));
                    deficit_density(s, y0, yd, None)
                };
                let v = integrate_panels(g, &[0.0, 0.25 * PI, 0.5 * PI], QuadOptions::with_tol(1e-300, 1e-8))?;
                Ok(4.0 * rho * v.value)
            };
            let mut points = airy_breakpoints(CIRC_RADII[0]);
            let near = try_integrate_panels(inner, &points, QuadOptions::with_tol(1e-16, 1e-8))?.value;
            points = airy_breakpoints(CIRC_RADII[1]);
            let start = points.iter().position(|&p| p >= CIRC_RADII[0]).unwrap_or(0);
            let mut shell = Vec::with_capacity(points.len() - start + 1);
            shell.push(CIRC_RADII[0]);
            shell.extend(points[start..].iter().copied().filter(|&p| p > CIRC_RADII[0]));
            let far = try_integrate_panels(inner, &shell, QuadOptions::with_tol(1e-16, 1e-8))?.value;
            // D(R) ≈ D(∞) − C/R: extrapolate from R and 2R.
            let d_small = near;
            let d_large = near + far;
            Ok(2.0 * d_large - d_small)
        }
    }
}

fn dedup(points: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(points.len());
    for &p in points {
        if out.last().map_or(true, |&q| p > q) {
            out.push(p);
        }
    }
    out
}

/// 0, the approximate zeros of `J₁` below `radius`, and `radius`.
fn airy_breakpoints(radius: f64) -> Vec<f64> {
    let mut points = alloc::vec![0.0];
    for k in 1.. {
        let beta = (k as f64 + 0.25) * PI;
        let z = beta - 3.0 / (8.0 * beta);
        if z >= radius {
            break;
        }
        points.push(z);
    }
    points.push(radius);
    points
}

/// Exact conditional direct-imaging exponent
/// `−log min_s ∬ Υ(·; 0)^{1−s} Υ(·; d)^s`.
pub fn di_conditional_exact(model: &PsfModel, d: f64) -> Result<ExponentResult> {
    if !(d >= 0.0 && d.is_finite()) {
        return Err(Error::InvalidParameter(alloc::format!("separation must be >= 0, got {d}")));
    }
    if d == 0.0 {
        return Ok(ExponentResult {
            xi: 0.0,
            s_star: 0.0,
            q_min: 1.0,
        });
    }
    let mut failure = None;
    let result = minimize_log_qs(|s| match deficit(model, d, s) {
        Ok(def) => (-def.clamp(0.0, 1.0)).ln_1p(),
        Err(e) => {
            failure.get_or_insert(e);
            f64::NAN
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(result),
    }
}

/// `g(d) = ∬ Υ(x, y; d) dx dy`, which is identically 1.
pub fn di_total_probability(model: &PsfModel, d: f64) -> Result<f64> {
    match model.family() {
        PsfFamily::Gaussian => {
            let s = model.sigma();
            let g = |x: f64| (-x * x / (2.0 * s * s)).exp() / (2.0 * PI * s * s).sqrt();
            let r = 12.0 * s + 0.5 * d;
            let f = |x: f64| 0.5 * (g(x - 0.5 * d) + g(x + 0.5 * d));
            Ok(integrate_panels(f, &dedup(&[-r, -0.5 * d, 0.5 * d, r]), QuadOptions::default())?.value)
        }
        PsfFamily::Rect => {
            let a = d / model.sigma();
            let sq = |u: f64| {
                let v = sinc(u);
                v * v
            };
            let f = |u: f64| 0.5 * (sq(u - 0.5 * a) + sq(u + 0.5 * a)) / PI;
            let points = uniform_panels(-RECT_RADIUS, RECT_RADIUS, PI);
            let body = integrate_panels(f, &points, QuadOptions::with_tol(1e-13, 1e-13))?.value;
            // sin² averages to ½ beyond R, leaving ∫ du/(2(u ∓ c)²) on each side.
            let c = 0.5 * a;
            let tail = (1.0 / (RECT_RADIUS - c) + 1.0 / (RECT_RADIUS + c)) / (2.0 * PI);
            Ok(body + tail)
        }
        PsfFamily::Circ => {
            let c = 0.5 * d / model.sigma();
            let inten = |x: f64, y: f64| {
                let r = x.hypot(y);
                let j = if r < 1e-4 { 1.0 - r * r / 8.0 } else { 2.0 * bessel_j1(r) / r };
                j * j / (4.0 * PI)
            };
            let radius = 400.0;
            let inner = |rho: f64| -> Result<f64> {
                let g = |th: f64| {
                    let (x, y) = (rho * th.cos(), rho * th.sin());
                    0.5 * (inten(x - c, y) + inten(x + c, y))
                };
                let v = integrate_panels(g, &[0.0, 0.25 * PI, 0.5 * PI], QuadOptions::with_tol(1e-300, 1e-11))?;
                Ok(4.0 * rho * v.value)
            };
            let body = try_integrate_panels(inner, &airy_breakpoints(radius), QuadOptions::with_tol(0.0, 1e-10))?
                .value;
            Ok(body + 2.0 / (PI * radius))
        }
    }
}
