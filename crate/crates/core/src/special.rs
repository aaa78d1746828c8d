//! Special functions: `sinc`, `jinc`, and the Bessel function `J₁`.

use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

const SQRT_FRAC_2_PI: f64 = 0.797_884_560_802_865_4;
const SMALL_ARG: f64 = 1e-4;

/// `sin(x)/x` with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < SMALL_ARG {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0))
    } else {
        x.sin() / x
    }
}

/// `2 J₁(x)/x`, the Airy amplitude profile, equal to 1 at the origin.
pub fn jinc(x: f64) -> f64 {
    if x.abs() < SMALL_ARG {
        let x2 = x * x;
        1.0 - x2 / 8.0 * (1.0 - x2 / 24.0 * (1.0 - x2 / 48.0))
    } else {
        2.0 * bessel_j1(x) / x
    }
}

const Z1: f64 = 1.468_197_064_212_389_3e1;
const Z2: f64 = 4.921_845_632_169_46e1;

/// Bessel function of the first kind, order one.
///
/// Rational approximation on `[0, 5]`, asymptotic phase-amplitude form
/// with rational corrections beyond. Odd in `x`.
#[allow(clippy::many_single_char_names)]
pub fn bessel_j1(x: f64) -> f64 {
    if x < 0.0 {
        return -bessel_j1(-x);
    }
    if x <= 5.0 {
        let z = x * x;
        let w = eval_polynomial(z, &RP) / eval_polynomial_1(z, &RQ);
        return w * x * (z - Z1) * (z - Z2);
    }
    let w = 5.0 / x;
    let z = w * w;
    let p = eval_polynomial(z, &PP) / eval_polynomial(z, &PQ);
    let q = eval_polynomial(z, &QP) / eval_polynomial_1(z, &QQ);
    let xn = x - 0.75 * PI;
    (p * xn.cos() - w * q * xn.sin()) * SQRT_FRAC_2_PI / x.sqrt()
}

fn eval_polynomial(x: f64, coefficients: &[f64]) -> f64 {
    coefficients.iter().fold(0.0, |acc, &c| acc * x + c)
}

/// Like [`eval_polynomial`] with an implicit leading coefficient of 1.
fn eval_polynomial_1(x: f64, coefficients: &[f64]) -> f64 {
    coefficients.iter().fold(1.0, |acc, &c| acc * x + c)
}

static RP: [f64; 4] = [
    -8.999_712_257_055_594e8,
    4.522_282_979_981_940_3e11,
    -7.274_942_452_218_183e13,
    3.682_957_328_638_529e15,
];

static RQ: [f64; 8] = [
    6.208_364_781_180_543e2,
    2.569_872_567_577_488_4e5,
    8.351_467_914_319_493e7,
    2.215_115_954_797_925e10,
    4.749_141_220_799_914e12,
    7.843_696_078_762_359e14,
    8.952_223_361_846_274e16,
    5.322_786_203_326_801e18,
];

static PP: [f64; 7] = [
    7.621_256_162_081_731e-4,
    7.313_970_569_409_176e-2,
    1.127_196_081_296_849_3,
    5.112_079_511_468_076,
    8.424_045_901_417_724,
    5.214_515_986_823_615,
    1.0,
];

static PQ: [f64; 7] = [
    5.713_231_280_725_487e-4,
    6.884_559_087_544_954e-2,
    1.105_142_326_340_617,
    5.073_863_861_286_015,
    8.399_855_543_276_042,
    5.209_828_486_823_619,
    1.0,
];

static QP: [f64; 8] = [
    5.108_625_947_501_766e-2,
    4.982_138_729_512_334,
    7.582_382_841_325_453e1,
    3.667_796_093_601_508e2,
    7.108_563_049_989_261e2,
    5.974_896_124_006_136e2,
    2.116_887_571_005_721_3e2,
    2.520_702_058_580_237_2e1,
];

static QQ: [f64; 7] = [
    7.423_732_770_356_752e1,
    1.056_448_860_382_628_3e3,
    4.986_410_583_376_536e3,
    9.562_318_924_047_562e3,
    7.997_041_604_473_507e3,
    2.826_192_785_176_390_8e3,
    3.360_936_078_106_983e2,
];

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Bessel's integral `J₁(x) = (1/π)∫₀^π cos(τ − x sin τ) dτ`; the
    /// trapezoid rule on a periodic analytic integrand converges
    /// geometrically.
    fn j1_integral(x: f64) -> f64 {
        let n = 400;
        let h = PI / n as f64;
        let mut s = 0.5 * (1.0 + (PI).cos());
        for k in 1..n {
            let t = k as f64 * h;
            s += (t - x * t.sin()).cos();
        }
        s * h / PI
    }

    #[test]
    fn j1_matches_bessel_integral() {
        let mut x = -50.0;
        while x <= 50.0 {
            assert!(
                (bessel_j1(x) - j1_integral(x)).abs() < 1e-10 * j1_integral(x).abs().max(0.1),
                "x = {x}"
            );
            x += 0.173;
        }
    }

    #[test]
    fn j1_reference_points() {
        assert_eq!(bessel_j1(0.0), 0.0);
        assert_relative_eq!(bessel_j1(1.0), 0.440_050_585_744_933_5, max_relative = 1e-12);
        assert!(bessel_j1(3.831_705_970_207_512).abs() < 1e-14);
        assert_relative_eq!(bessel_j1(-5.1), 0.337_097_202_018_231_8, max_relative = 1e-12);
    }

    #[test]
    fn removable_singularities() {
        assert_eq!(sinc(0.0), 1.0);
        assert_eq!(jinc(0.0), 1.0);
        for &x in &[1e-8, 5e-5, 9.9e-5, 1.01e-4, 1e-3] {
            assert_relative_eq!(sinc(x), x.sin() / x, max_relative = 1e-15);
            assert_relative_eq!(jinc(x), 2.0 * bessel_j1(x) / x, max_relative = 1e-14);
        }
        assert!(sinc(PI).abs() < 1e-16);
    }
}
