use approx::assert_relative_eq;
use twosrc_core::chernoff::*;
use twosrc_core::optimize::minimize_scalar;
use twosrc_core::scenario::{outcome_distribution, weak_outcome_distribution};
use twosrc_core::*;

fn gaussian() -> PsfModel {
    PsfModel::gaussian(1.0).unwrap()
}

fn all_models() -> [PsfModel; 3] {
    [
        gaussian(),
        PsfModel::rect(1.0, 1.0).unwrap(),
        PsfModel::circ(1.0).unwrap(),
    ]
}

#[test]
fn conditional_bspade_is_quadratic_for_gaussian() {
    for d in [0.1, 0.5, 1.0, 2.0] {
        assert!((conditional_bspade(&gaussian(), d) - d * d / 16.0).abs() < 1e-12);
    }
    assert_eq!(conditional_bspade(&gaussian(), 0.0), 0.0);
    assert_relative_eq!(conditional_bspade(&gaussian(), 0.4), 0.01, max_relative = 1e-14);
    let circ = PsfModel::circ(1.0).unwrap();
    assert!(conditional_bspade(&circ, 2.0 * 3.831_705_970_207_512_3) > 60.0);
}

#[test]
fn conditional_sliver_expansion() {
    assert_relative_eq!(conditional_sliver(&gaussian(), 1.0), 0.060_548_145_242_776, max_relative = 1e-12);
    // The series has no d⁶ term; the residual is d⁸/786432.
    for d in [0.05, 0.1, 0.2, 0.3] {
        let r = conditional_sliver(&gaussian(), d) - (d * d / 16.0 - d.powi(4) / 512.0);
        assert_relative_eq!(r, d.powi(8) / 786_432.0, max_relative = 1e-3);
    }
}

#[test]
fn relation_examples() {
    assert_eq!(conditional_to_unconditional(0.1, 0.0), 0.0);
    assert_relative_eq!(conditional_to_unconditional(1e-3, 0.01), 9.95e-6, max_relative = 1e-3);
    let mut last = 0.0;
    for xc in [0.01, 0.1, 1.0, 10.0] {
        let x = conditional_to_unconditional(0.1, xc);
        assert!(x > last);
        last = x;
    }
}

#[test]
fn exact_thermal_examples() {
    let dp = DerivedParams::from_overlaps(0.1, 0.0, 0.0).unwrap();
    assert_relative_eq!(qs_thermal(0.0, &dp), 1.0 / (1.05 * 1.05), max_relative = 1e-14);
    assert_relative_eq!(quantum_chernoff_exact(&dp).xi, 2.0 * 1.05f64.ln(), max_relative = 1e-14);
    assert_relative_eq!(sliver_chernoff_exact(&dp).xi, 1.05f64.ln(), max_relative = 1e-14);
    let zero = DerivedParams::new(0.1, &gaussian(), 0.0).unwrap();
    for s in [0.0, 0.3, 1.0] {
        assert_relative_eq!(qs_thermal(s, &zero), 1.0, max_relative = 1e-15);
    }
    assert_eq!(quantum_chernoff_exact(&zero).xi, 0.0);
    assert_eq!(bspade_chernoff_exact(&zero).xi, 0.0);
    assert_eq!(sliver_chernoff_exact(&zero).xi, 0.0);
}

#[test]
fn thermal_minimum_sits_at_zero() {
    for m in all_models() {
        for eps in [0.01, 0.1, 0.5] {
            for i in 1..=20 {
                let dp = DerivedParams::new(eps, &m, 0.3 * i as f64).unwrap();
                let golden = minimize_scalar(|s| qs_thermal(s, &dp), 0.0, 1.0, 1e-10);
                let exact = quantum_chernoff_exact(&dp);
                assert!((-golden.min.ln() - exact.xi).abs() < 1e-10);
                assert!(golden.argmin < 1e-8);
                assert_eq!(exact.s_star, 0.0);
            }
        }
    }
}

#[test]
fn generic_chernoff_reproduces_closed_forms() {
    for m in all_models() {
        for eps in [0.01, 0.1, 0.5] {
            for i in 0..=20 {
                let d = 0.3 * i as f64;
                let dp = DerivedParams::new(eps, &m, d).unwrap();
                for (kind, closed) in [
                    (MeasurementKind::Bspade, bspade_chernoff_exact(&dp).xi),
                    (MeasurementKind::Sliver, sliver_chernoff_exact(&dp).xi),
                ] {
                    let h1 = outcome_distribution(kind, Hypothesis::H1, &dp).unwrap().probs();
                    let h2 = outcome_distribution(kind, Hypothesis::H2, &dp).unwrap().probs();
                    let g = generic_chernoff(&h1, &h2).unwrap();
                    assert!((g.xi - closed).abs() < 1e-10, "{kind:?} {:?} eps={eps} d={d}", m.family());
                }
                if d > 0.0 && conditional_bspade(&m, d).is_finite() {
                    let (a1, a2) = weak_outcome_distribution(MeasurementKind::Bspade, Hypothesis::H1, &dp).unwrap();
                    let (b1, b2) = weak_outcome_distribution(MeasurementKind::Bspade, Hypothesis::H2, &dp).unwrap();
                    let g = generic_chernoff(&[a1, a2], &[b1, b2]).unwrap();
                    assert!((g.xi - conditional_bspade(&m, d)).abs() < 1e-10);
                }
            }
        }
    }
    let same = [0.2, 0.3, 0.5];
    assert!(generic_chernoff(&same, &same).unwrap().xi < 1e-15);
}

#[test]
fn bspade_is_quantum_optimal_and_sliver_is_not() {
    for m in all_models() {
        for eps in [0.01, 0.1, 0.5] {
            for i in 0..20 {
                let dp = DerivedParams::new(eps, &m, 0.3 * i as f64).unwrap();
                let q = quantum_chernoff_exact(&dp).xi;
                assert!((bspade_chernoff_exact(&dp).xi - q).abs() < 1e-12);
                assert!(sliver_chernoff_exact(&dp).xi <= q + 1e-15);
            }
        }
    }
}

#[test]
fn kappa_for_gaussian() {
    assert_relative_eq!(kappa_integral(&gaussian()).unwrap(), 0.125, max_relative = 1e-10);
    let wide = PsfModel::gaussian(1.7).unwrap();
    assert_relative_eq!(kappa_integral(&wide).unwrap(), 0.125 / 1.7f64.powi(4), max_relative = 1e-10);
    assert!(kappa_integral(&PsfModel::rect(1.0, 1.0).unwrap()).unwrap().is_infinite());
    assert!(kappa_integral(&PsfModel::circ(1.0).unwrap()).unwrap().is_infinite());
}

#[test]
fn second_derivative_converges() {
    let g = gaussian();
    let (x, y) = (0.7, -0.3);
    let exact = g.intensity(x, y) * (x * x - 1.0) / 4.0;
    let errs: Vec<f64> = [0.2, 0.1, 0.05]
        .iter()
        .map(|&h| (upsilon_second_derivative_fd(&g, x, y, h) - exact).abs())
        .collect();
    assert!(errs[1] < errs[0] / 3.5 && errs[2] < errs[1] / 3.5);
    assert!(errs[2] < 1e-6);
}

#[test]
fn small_d_direct_imaging() {
    for d in [0.1, 0.5, 1.0, 2.0] {
        let r = di_conditional_smalld(&gaussian(), d).unwrap() / (d.powi(4) / 256.0);
        assert!((r - 1.0).abs() < 1e-3);
    }
    assert_eq!(di_conditional_smalld(&gaussian(), 0.0).unwrap(), 0.0);
    assert!(di_conditional_smalld(&PsfModel::rect(1.0, 1.0).unwrap(), 0.5).unwrap().is_infinite());
}

/// Reference exponents from 30-digit adaptive quadrature with a golden
/// search over s.
const GAUSSIAN_DI: [(f64, f64); 7] = [
    (0.05, 2.439_882_024_17e-8),
    (0.1, 3.896_526_494_85e-7),
    (0.2, 6.188_558_514_59e-6),
    (0.3, 3.095_504_667_95e-5),
    (0.5, 2.303_194_653_07e-4),
    (1.0, 3.200_512_049_75e-3),
    (2.0, 3.575_442_933_65e-2),
];

#[test]
fn gaussian_direct_imaging_exact() {
    for (d, want) in GAUSSIAN_DI {
        let got = di_conditional_exact(&gaussian(), d).unwrap();
        assert_relative_eq!(got.xi, want, max_relative = 1e-6);
        assert!(got.s_star > 0.45 && got.s_star < 0.55);
        assert!(got.xi < conditional_sliver(&gaussian(), d));
    }
    let one = di_conditional_exact(&gaussian(), 1.0).unwrap().xi;
    assert!(one > di_conditional_smalld(&gaussian(), 1.0).unwrap() * 0.8 && one < 1.0 / 16.0);
    assert_eq!(di_conditional_exact(&gaussian(), 0.0).unwrap().xi, 0.0);
}

#[test]
fn small_d_tracks_exact_in_sub_rayleigh_range() {
    for (d, want) in GAUSSIAN_DI.iter().filter(|(d, _)| *d <= 0.3) {
        let approx = di_conditional_smalld(&gaussian(), *d).unwrap();
        assert!((approx / want - 1.0).abs() < 0.05);
    }
}

#[test]
fn direct_imaging_total_probability() {
    for m in all_models() {
        for d in [0.5, 2.0] {
            let g = di_total_probability(&m, d).unwrap();
            assert!((g - 1.0).abs() < 1e-6, "{:?} d={d}: {g}", m.family());
        }
    }
}

/// Reference exponents from Gauss–Legendre panels between the intensity
/// zeros with a 1/R extrapolation of the truncated domain.
#[test]
fn rect_direct_imaging_exact() {
    let rect = PsfModel::rect(1.0, 1.0).unwrap();
    let got = di_conditional_exact(&rect, 1.0).unwrap().xi;
    assert_relative_eq!(got, 7.775_28e-3, max_relative = 2e-4);
    assert!(got < conditional_sliver(&rect, 1.0));
}

#[test]
#[ignore = "nested two-dimensional quadrature, about a minute"]
fn circ_direct_imaging_exact() {
    let circ = PsfModel::circ(1.0).unwrap();
    let got = di_conditional_exact(&circ, 1.0).unwrap().xi;
    assert_relative_eq!(got, 5.167_57e-3, max_relative = 5e-4);
    assert!(got < conditional_sliver(&circ, 1.0));
}
