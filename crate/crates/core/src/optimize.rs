//! Bounded scalar minimization.

/// Result of [`minimize_scalar`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarMin {
    pub argmin: f64,
    pub min: f64,
    pub evaluations: usize,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search on `[lo, hi]`.
///
/// Both endpoints are always evaluated and compared with the interior
/// result, so minima on the boundary are returned exactly. Ties resolve
/// toward the lower end of the interval.
pub fn minimize_scalar<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> ScalarMin
where
    F: FnMut(f64) -> f64,
{
    assert!(lo < hi, "minimize_scalar requires lo < hi");
    assert!(tol > 0.0, "minimize_scalar requires tol > 0");
    let f_lo = f(lo);
    let f_hi = f(hi);
    let mut evaluations = 2;

    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    evaluations += 2;
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        evaluations += 1;
    }
    let (mut argmin, mut min) = if fc <= fd { (c, fc) } else { (d, fd) };
    if f_hi < min {
        argmin = hi;
        min = f_hi;
    }
    if f_lo <= min {
        argmin = lo;
        min = f_lo;
    }
    ScalarMin {
        argmin,
        min,
        evaluations,
    }
}
