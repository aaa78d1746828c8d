//! Point-spread function models and their overlap functions.

use alloc::format;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_panels, uniform_panels, QuadOptions};
use crate::special::{bessel_j1, jinc, sinc};

/// Aperture family of the imaging system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PsfFamily {
    Gaussian,
    Rect,
    Circ,
}

impl PsfFamily {
    pub const ALL: [PsfFamily; 3] = [PsfFamily::Gaussian, PsfFamily::Rect, PsfFamily::Circ];

    pub fn name(self) -> &'static str {
        match self {
            PsfFamily::Gaussian => "gaussian",
            PsfFamily::Rect => "rect",
            PsfFamily::Circ => "circ",
        }
    }
}

impl core::str::FromStr for PsfFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(PsfFamily::Gaussian),
            "rect" => Ok(PsfFamily::Rect),
            "circ" => Ok(PsfFamily::Circ),
            other => Err(Error::InvalidParameter(format!("unknown PSF family `{other}`"))),
        }
    }
}

/// A PSF family with its characteristic lengths.
///
/// `sigma` is σ for the Gaussian, σ_x for the rectangular aperture and σ_c
/// for the circular aperture; `sigma_y` is only used by the rectangular
/// aperture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsfModel {
    family: PsfFamily,
    sigma: f64,
    sigma_y: f64,
}

/// Half-width, in units of σ_x, of the explicitly integrated sinc domain.
const SINC_RADIUS: f64 = 2000.0;

impl PsfModel {
    pub fn new(family: PsfFamily, sigma: f64, sigma_y: Option<f64>) -> Result<Self> {
        let sigma_y = match family {
            PsfFamily::Rect => sigma_y.unwrap_or(sigma),
            _ => sigma,
        };
        for (name, v) in [("sigma", sigma), ("sigma_y", sigma_y)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(Self {
            family,
            sigma,
            sigma_y,
        })
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        Self::new(PsfFamily::Gaussian, sigma, None)
    }

    pub fn rect(sigma_x: f64, sigma_y: f64) -> Result<Self> {
        Self::new(PsfFamily::Rect, sigma_x, Some(sigma_y))
    }

    pub fn circ(sigma_c: f64) -> Result<Self> {
        Self::new(PsfFamily::Circ, sigma_c, None)
    }

    pub fn family(&self) -> PsfFamily {
        self.family
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn sigma_y(&self) -> f64 {
        self.sigma_y
    }

    /// Amplitude ψ(x, y), normalized to unit intensity.
    pub fn amplitude(&self, x: f64, y: f64) -> f64 {
        match self.family {
            PsfFamily::Gaussian => {
                let s = self.sigma;
                (-(x * x + y * y) / (4.0 * s * s)).exp() / ((2.0 * PI).sqrt() * s)
            }
            PsfFamily::Rect => {
                sinc(x / self.sigma) * sinc(y / self.sigma_y) / (PI * (self.sigma * self.sigma_y).sqrt())
            }
            PsfFamily::Circ => {
                let r = x.hypot(y);
                jinc(r / self.sigma) / (2.0 * PI.sqrt() * self.sigma)
            }
        }
    }

    /// Intensity |ψ(x, y)|².
    pub fn intensity(&self, x: f64, y: f64) -> f64 {
        let a = self.amplitude(x, y);
        a * a
    }

    /// Closed-form overlap δ(d) = ∬ ψ(x, y) ψ(x − d, y) dx dy.
    pub fn overlap(&self, d: f64) -> f64 {
        match self.family {
            PsfFamily::Gaussian => (-d * d / (8.0 * self.sigma * self.sigma)).exp(),
            PsfFamily::Rect => sinc(d / self.sigma),
            PsfFamily::Circ => jinc(d / self.sigma),
        }
    }

    /// `1 − δ(d)` without cancellation at small separations.
    pub fn overlap_complement(&self, d: f64) -> f64 {
        match self.family {
            PsfFamily::Gaussian => -(-d * d / (8.0 * self.sigma * self.sigma)).exp_m1(),
            PsfFamily::Rect => {
                let x = d / self.sigma;
                if x.abs() >= 1.0 {
                    return 1.0 - sinc(x);
                }
                // 1 − sin(x)/x = Σ_{k≥1} (−1)^{k+1} x^{2k}/(2k+1)!
                let x2 = x * x;
                let mut term = 1.0;
                let mut sum = 0.0;
                for k in 1..=12 {
                    term *= -x2 / ((2 * k) as f64 * (2 * k + 1) as f64);
                    sum -= term;
                }
                sum
            }
            PsfFamily::Circ => {
                let x = d / self.sigma;
                if x.abs() >= 1.0 {
                    return 1.0 - jinc(x);
                }
                // 1 − 2J₁(x)/x = −Σ_{k≥1} (−t)^k/(k!(k+1)!), t = x²/4
                let t = 0.25 * x * x;
                let mut term = 1.0;
                let mut sum = 0.0;
                for k in 1..=12 {
                    term *= -t / (k as f64 * (k + 1) as f64);
                    sum -= term;
                }
                sum
            }
        }
    }

    /// Overlap δ(d) by numerical quadrature, independent of the closed form.
    ///
    /// The Gaussian and rectangular apertures are separable, so the overlap
    /// is a product of one-dimensional integrals; the sinc integrals run
    /// over |u| ≤ 2000 in π-wide panels with an asymptotic tail correction.
    /// The circular aperture is evaluated in the pupil plane, where the
    /// overlap is the Fourier transform of the uniform disk.
    pub fn overlap_by_quadrature(&self, d: f64) -> Result<f64> {
        match self.family {
            PsfFamily::Gaussian => {
                let s = self.sigma;
                let g = |x: f64| (-x * x / (4.0 * s * s)).exp() / (2.0 * PI * s * s).sqrt().sqrt();
                let r = 8.0 * s;
                let (lo, hi) = (-r + d.min(0.0), r + d.max(0.0));
                let opts = QuadOptions::with_tol(1e-14, 1e-13);
                let fx = integrate_panels(|x| g(x) * g(x - d), &[lo, 0.5 * d, hi], opts)?;
                let fy = integrate(|y| g(y) * g(y), -r, r, opts)?;
                Ok(fx.value * fy.value)
            }
            PsfFamily::Rect => {
                let a = d / self.sigma;
                Ok(sinc_product_integral(a)? * sinc_product_integral(0.0)? / (PI * PI))
            }
            PsfFamily::Circ => {
                let u = d / self.sigma;
                let opts = QuadOptions::with_tol(1e-12, 1e-13);
                let r = integrate(
                    |t: f64| {
                        let c = t.cos();
                        c * c * (u * t.sin()).cos()
                    },
                    -0.5 * PI,
                    0.5 * PI,
                    opts,
                )?;
                Ok(2.0 / PI * r.value)
            }
        }
    }

    /// ∬ |ψ|² dx dy by quadrature.
    pub fn normalization_by_quadrature(&self) -> Result<f64> {
        match self.family {
            PsfFamily::Gaussian | PsfFamily::Rect => self.overlap_by_quadrature(0.0),
            PsfFamily::Circ => {
                let opts = QuadOptions::with_tol(1e-13, 1e-13);
                let points = uniform_panels(0.0, SINC_RADIUS, PI);
                let body = integrate_panels(
                    |u| {
                        if u == 0.0 {
                            0.0
                        } else {
                            let j = bessel_j1(u);
                            j * j / u
                        }
                    },
                    &points,
                    opts,
                )?;
                let big_u = SINC_RADIUS;
                let s = (big_u - 0.25 * PI).sin();
                let tail = 2.0 / (PI * big_u)
                    * (1.0 + (2.0 * big_u - 0.5 * PI).sin() / (2.0 * big_u) + s * s / (4.0 * big_u * big_u));
                Ok(2.0 * body.value + tail)
            }
        }
    }
}

/// ∫ sinc(u) sinc(u − a) du over the real line.
fn sinc_product_integral(a: f64) -> Result<f64> {
    let r = SINC_RADIUS;
    if a.abs() >= 0.5 * r {
        return Err(Error::InvalidParameter(format!(
            "displacement {a} too large for the sinc quadrature domain"
        )));
    }
    let points = uniform_panels(-r, r, PI);
    let opts = QuadOptions::with_tol(1e-13, 1e-13);
    let body = integrate_panels(|u| sinc(u) * sinc(u - a), &points, opts)?;
    Ok(body.value + sinc_tail(a, r) + sinc_tail(-a, r))
}

/// ∫_R^∞ sin(u) sin(u − a) / (u (u − a)) du from the asymptotic expansion.
fn sinc_tail(a: f64, r: f64) -> f64 {
    // k-th derivative of v(u) = 1/(u(u − a)) at u = R.
    let v = |k: i32| -> f64 {
        let fact = [1.0, 1.0, 2.0, 6.0][k as usize];
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let diff = if a == 0.0 {
            (k + 1) as f64 / r.powi(k + 2)
        } else {
            (-(k + 1) as f64 * (-a / r).ln_1p()).exp_m1() / (a * r.powi(k + 1))
        };
        sign * fact * diff
    };
    let smooth = if a == 0.0 { 1.0 / r } else { -(-a / r).ln_1p() / a };
    let theta = 2.0 * r - a;
    let (s, c) = (theta.sin(), theta.cos());
    let oscillatory = -s * v(0) / 2.0 - c * v(1) / 4.0 + s * v(2) / 8.0 + c * v(3) / 16.0;
    0.5 * a.cos() * smooth - 0.5 * oscillatory
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn amplitudes_at_reference_points() {
        let g = PsfModel::gaussian(1.0).unwrap();
        assert_relative_eq!(g.amplitude(0.0, 0.0), 0.398_942_280_401_432_7, max_relative = 1e-15);
        let r = PsfModel::rect(1.0, 1.0).unwrap();
        assert!(r.amplitude(PI, 0.0).abs() < 1e-16);
        let c = PsfModel::circ(1.0).unwrap();
        assert_relative_eq!(c.amplitude(0.0, 0.0), 0.5 / PI.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn overlap_complement_is_consistent() {
        for model in [
            PsfModel::gaussian(1.3).unwrap(),
            PsfModel::rect(0.7, 2.0).unwrap(),
            PsfModel::circ(1.1).unwrap(),
        ] {
            for &d in &[0.3, 0.69, 0.71, 1.2, 4.0] {
                assert!((model.overlap_complement(d) - (1.0 - model.overlap(d))).abs() < 1e-15);
            }
            let d = 1e-4;
            let c = model.overlap_complement(d);
            assert!(c > 0.0 && c < 1e-8);
        }
    }

    #[test]
    fn rejects_nonpositive_lengths() {
        assert!(PsfModel::gaussian(0.0).is_err());
        assert!(PsfModel::rect(1.0, -1.0).is_err());
        assert!(PsfModel::circ(f64::NAN).is_err());
    }

    #[test]
    fn sinc_tail_matches_direct_integration() {
        let a = 0.7;
        let r = 300.0;
        let far = 300.0 + 200.0 * PI;
        let points = uniform_panels(r, far, PI);
        let near = integrate_panels(|u| sinc(u) * sinc(u - a), &points, QuadOptions::default())
            .unwrap()
            .value;
        let expected = sinc_tail(a, r) - sinc_tail(a, far);
        assert!((near - expected).abs() < 1e-13, "{near} vs {expected}");
    }
}
