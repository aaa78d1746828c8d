//! Globally adaptive 21-point Gauss–Kronrod quadrature.

use alloc::collections::BinaryHeap;
use core::cmp::Ordering;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Tolerances and subdivision budget for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_subdivisions: 4000,
        }
    }
}

impl QuadOptions {
    pub fn with_tol(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Gauss weights for the nodes `XGK[1], XGK[3], …, XGK[9]`.
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod21<F>(f: &mut F, a: f64, b: f64) -> Result<Segment>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut abs_sum = kronrod.abs();
    let mut fv = [0.0; 20];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        fv[2 * j] = f1;
        fv[2 * j + 1] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        asc += WGK[j] * ((fv[2 * j] - mean).abs() + (fv[2 * j + 1] - mean).abs());
    }
    let value = kronrod * half;
    let abs_sum = abs_sum * half.abs();
    let asc = asc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    if abs_sum > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * abs_sum);
    }
    if !value.is_finite() {
        return Err(Error::InvalidParameter(alloc::format!(
            "integrand not finite on [{a}, {b}]"
        )));
    }
    Ok(Segment { a, b, value, error })
}

/// Integrates a fallible integrand over the panels delimited by `points`,
/// refining the panel with the largest error estimate until the total
/// error estimate meets the tolerance.
pub fn try_integrate_panels<F>(mut f: F, points: &[f64], opts: QuadOptions) -> Result<QuadResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    if points.len() < 2 {
        return Err(Error::InvalidParameter("need at least two breakpoints".into()));
    }
    let mut heap = BinaryHeap::with_capacity(points.len() + opts.max_subdivisions);
    let mut evaluations = 0;
    for w in points.windows(2) {
        heap.push(kronrod21(&mut f, w[0], w[1])?);
        evaluations += 21;
    }
    let mut subdivisions = 0;
    loop {
        let (value, error) = heap
            .iter()
            .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
        let tolerance = opts.abs_tol.max(opts.rel_tol * value.abs());
        if error <= tolerance {
            return Ok(QuadResult {
                value,
                error,
                evaluations,
            });
        }
        if subdivisions >= opts.max_subdivisions {
            return Err(Error::QuadratureNonConvergence {
                error,
                tolerance,
                subdivisions,
            });
        }
        let batch = (heap.len() / 16).max(1);
        for _ in 0..batch {
            let worst = heap.pop().expect("heap is never empty");
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b {
                heap.push(worst);
                let error = heap.iter().map(|s| s.error).sum();
                return Err(Error::QuadratureNonConvergence {
                    error,
                    tolerance,
                    subdivisions,
                });
            }
            heap.push(kronrod21(&mut f, worst.a, mid)?);
            heap.push(kronrod21(&mut f, mid, worst.b)?);
            evaluations += 42;
            subdivisions += 1;
        }
    }
}

/// Integrates `f` over the panels delimited by `points`.
pub fn integrate_panels<F>(mut f: F, points: &[f64], opts: QuadOptions) -> Result<QuadResult>
where
    F: FnMut(f64) -> f64,
{
    try_integrate_panels(|x| Ok(f(x)), points, opts)
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<F>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult>
where
    F: FnMut(f64) -> f64,
{
    integrate_panels(f, &[a, b], opts)
}

/// Integrates a fallible integrand over `[a, b]`.
pub fn try_integrate<F>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    try_integrate_panels(f, &[a, b], opts)
}

/// Breakpoints `a, a+h, …, b` with the final panel absorbing any remainder.
pub fn uniform_panels(a: f64, b: f64, h: f64) -> alloc::vec::Vec<f64> {
    let n = ((b - a) / h).floor() as usize;
    let mut points: alloc::vec::Vec<f64> = (0..=n).map(|k| a + k as f64 * h).collect();
    if b - points[n] > 1e-9 * h {
        points.push(b);
    } else {
        points[n] = b;
    }
    points
}
