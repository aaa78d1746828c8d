use approx::assert_relative_eq;
use nalgebra::DMatrix;
use twosrc_core::chernoff::{conditional_bspade, qs_thermal, quantum_chernoff_exact};
use twosrc_core::states::*;
use twosrc_core::*;

fn gaussian() -> PsfModel {
    PsfModel::gaussian(1.0).unwrap()
}

fn trunc6() -> FockTruncation {
    FockTruncation {
        cutoff: 6,
        max_deficit: 1e-6,
    }
}

/// Separation with a prescribed half-separation overlap for σ = 1.
fn gaussian_d_for_half_overlap(delta_half: f64) -> f64 {
    (-32.0 * delta_half.ln()).sqrt()
}

/// `‖p₂η₂^{⊗L} − p₁η₁^{⊗L}‖₁`: the φ₃-containing part of η₂^{⊗L} is orthogonal
/// to both pure terms, leaving a rank-two problem with overlap μ^L.
fn eta_trace_norm(dp: &DerivedParams, priors: Priors, l: i32) -> f64 {
    let (p1, p2) = (priors.p1, priors.p2);
    let lp = dp.lambda_plus.powi(l);
    p2 * (1.0 - lp) + ((p2 * lp - p1).powi(2) + 4.0 * p1 * p2 * lp * (1.0 - dp.mu.powi(2 * l))).sqrt()
}

/// Scaling and squaring with a Taylor series.
fn expm(g: &DMatrix<f64>) -> DMatrix<f64> {
    let n = g.nrows();
    let squarings = 8;
    let a = g / 2f64.powi(squarings);
    let mut term = DMatrix::<f64>::identity(n, n);
    let mut sum = term.clone();
    for k in 1..30 {
        term = &term * &a / k as f64;
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

#[test]
fn beamsplitter_matches_unitary_evolution() {
    for mu in [0.0, 0.3, -0.5, 0.9, 1.0] {
        let theta = f64::acos(mu);
        for n in 0..=6usize {
            // Generator θ(a†b − ab†) on |k, n−k⟩, k = 0..=n.
            let mut g = DMatrix::<f64>::zeros(n + 1, n + 1);
            for k in 0..n {
                let c = ((k + 1) as f64 * (n - k) as f64).sqrt();
                g[(k + 1, k)] = theta * c;
                g[(k, k + 1)] = -theta * c;
            }
            let u = expm(&g);
            let amps = beamsplitter_number_vacuum(n, mu).unwrap();
            let col = u.column(n);
            let norm: f64 = amps.iter().map(|a| a * a).sum();
            assert_relative_eq!(norm, 1.0, max_relative = 1e-13);
            for k in 0..=n {
                assert!((amps[k].abs() - col[k].abs()).abs() < 1e-12, "mu={mu} n={n} k={k}");
            }
        }
    }
    assert!(beamsplitter_number_vacuum(2, 1.5).is_err());
}

#[test]
fn thermal_states_are_valid() {
    for m in [gaussian(), PsfModel::rect(1.0, 1.0).unwrap(), PsfModel::circ(1.0).unwrap()] {
        for eps in [0.01, 0.1, 0.2] {
            for d in [0.0, 0.5, 1.5, 4.0] {
                let dp = DerivedParams::new(eps, &m, d).unwrap();
                let r1 = build_rho1(&dp, &FockTruncation::default()).unwrap();
                let r2 = build_rho2(&dp, &FockTruncation::default()).unwrap();
                r1.validate().unwrap();
                r2.validate().unwrap();
                assert!(r2.deficit() < 1e-10);
            }
        }
    }
}

#[test]
fn cutoff_too_small_is_reported() {
    let dp = DerivedParams::new(0.2, &gaussian(), 1.0).unwrap();
    let err = build_rho2(&dp, &FockTruncation::new(3)).unwrap_err();
    assert!(matches!(err, Error::CutoffTooSmall { .. }));
}

#[test]
fn photon_number_marginals_are_thermal() {
    let dp = DerivedParams::new(0.1, &gaussian(), 1.3).unwrap();
    let rho = build_rho2(&dp, &FockTruncation::default()).unwrap();
    let means = [dp.mu * dp.mu * dp.eps_plus, (1.0 - dp.mu * dp.mu) * dp.eps_plus, dp.eps_minus];
    for (mode, nbar) in means.into_iter().enumerate() {
        let p = rho.photon_numbers(mode).unwrap();
        for (n, pn) in p.iter().enumerate().take(8) {
            let want = nbar.powi(n as i32) / (1.0 + nbar).powi(n as i32 + 1);
            assert!((pn - want).abs() < 1e-12, "mode {mode} n {n}");
        }
    }
}

#[test]
fn zero_separation_states_coincide() {
    let dp = DerivedParams::new(0.1, &gaussian(), 0.0).unwrap();
    let r1 = build_rho1(&dp, &trunc6()).unwrap();
    let r2 = build_rho2(&dp, &trunc6()).unwrap();
    assert!(trace_norm(&(r2.to_dense() - r1.to_dense())) < 1e-10);
    let (e1, e2) = build_eta(&dp).unwrap();
    assert!(trace_norm(&(e2.to_dense() - e1.to_dense())) < 1e-15);
    for m in 1..=3 {
        let p = helstrom_error(&r1, &r2, Priors::equal(), m, &HelstromCaps::THERMAL).unwrap();
        assert_relative_eq!(p, 0.5, max_relative = 1e-12);
        let q = helstrom_error(&r1, &r2, Priors::new(0.3, 0.7).unwrap(), m, &HelstromCaps::THERMAL).unwrap();
        assert!((q - 0.3).abs() < 1e-6);
    }
}

#[test]
fn matrix_qs_matches_thermal_formula() {
    for d in [0.3, 1.0, 2.5] {
        let dp = DerivedParams::new(0.1, &gaussian(), d).unwrap();
        let r1 = build_rho1(&dp, &FockTruncation::default()).unwrap();
        let r2 = build_rho2(&dp, &FockTruncation::default()).unwrap();
        for s in [0.0, 0.3, 0.7, 1.0] {
            let m = qs_matrix(&r1, &r2, s).unwrap();
            assert!((m - qs_thermal(s, &dp)).abs() < 1e-10, "d={d} s={s}");
        }
        let q = quantum_chernoff(&r1, &r2).unwrap();
        assert!((q.xi - quantum_chernoff_exact(&dp).xi).abs() < 1e-10);
        assert!(q.s_star < 1e-6);
    }
}

#[test]
fn eta_structure() {
    let g = gaussian();
    for d in [0.0, 0.7, 2.0] {
        let dp = DerivedParams::new(0.1, &g, d).unwrap();
        let (e1, e2) = build_eta(&dp).unwrap();
        e1.validate().unwrap();
        e2.validate().unwrap();
        assert_relative_eq!(e2.trace(), 1.0, max_relative = 1e-15);
        let h = g.overlap(0.5 * d);
        assert_relative_eq!(e2.entry(0, 0).re, h * h, max_relative = 1e-14);
    }
}

#[test]
fn conditional_quantum_exponent_equals_bspade() {
    for m in [gaussian(), PsfModel::rect(1.0, 1.0).unwrap(), PsfModel::circ(1.0).unwrap()] {
        for i in 0..=12 {
            let d = 0.25 * i as f64;
            let dp = DerivedParams::new(0.1, &m, d).unwrap();
            let (e1, e2) = build_eta(&dp).unwrap();
            let q = conditional_quantum_chernoff(&e1, &e2).unwrap();
            assert!((q.xi - conditional_bspade(&m, d)).abs() < 1e-10, "{:?} d={d}", m.family());
            assert_eq!(q.s_star, 0.0);
        }
    }
    let dp = DerivedParams::new(0.1, &gaussian(), 0.4).unwrap();
    let (e1, e2) = build_eta(&dp).unwrap();
    assert_relative_eq!(conditional_quantum_chernoff(&e1, &e2).unwrap().xi, 0.01, max_relative = 1e-10);
}

#[test]
fn conditional_helstrom_closed_form() {
    for prior in [Priors::equal(), Priors::new(0.3, 0.7).unwrap()] {
        for d in [0.5, 1.0, 2.5] {
            let dp = DerivedParams::new(0.1, &gaussian(), d).unwrap();
            let (e1, e2) = build_eta(&dp).unwrap();
            for l in 1..=12u32 {
                let p = conditional_helstrom(&e1, &e2, prior, l, &HelstromCaps::CONDITIONAL).unwrap();
                let want = 0.5 * (1.0 - eta_trace_norm(&dp, prior, l as i32));
                assert_relative_eq!(p, want, max_relative = 1e-9);
            }
        }
    }
}

#[test]
fn single_photon_helstrom_by_two_by_two_reduction() {
    let d = gaussian_d_for_half_overlap(0.9);
    let dp = DerivedParams::new(0.1, &gaussian(), d).unwrap();
    let (e1, e2) = build_eta(&dp).unwrap();
    let (mu, nu) = (dp.mu, (1.0 - dp.mu * dp.mu).sqrt());
    // ½(λ₊ss^T − e₁e₁^T) on span{φ₁, φ₂}; φ₃ carries ½λ₋.
    let a = 0.5 * (dp.lambda_plus * mu * mu - 1.0);
    let b = 0.5 * dp.lambda_plus * mu * nu;
    let c = 0.5 * dp.lambda_plus * nu * nu;
    let disc = ((a - c).powi(2) + 4.0 * b * b).sqrt();
    let (l1, l2) = (0.5 * (a + c + disc), 0.5 * (a + c - disc));
    let norm = l1.abs() + l2.abs() + 0.5 * dp.lambda_minus;
    let want = 0.5 * (1.0 - norm);
    let got = conditional_helstrom(&e1, &e2, Priors::equal(), 1, &HelstromCaps::CONDITIONAL).unwrap();
    assert_relative_eq!(got, want, max_relative = 1e-12);
    let dense = helstrom_error_dense(&e1, &e2, Priors::equal(), 1, &HelstromCaps::CONDITIONAL).unwrap();
    assert_relative_eq!(dense, want, max_relative = 1e-12);
}

#[test]
fn conditional_helstrom_decay_rate() {
    let d = gaussian_d_for_half_overlap(0.95);
    let dp = DerivedParams::new(0.1, &gaussian(), d).unwrap();
    let (e1, e2) = build_eta(&dp).unwrap();
    let xc = conditional_bspade(&gaussian(), d);
    let p: Vec<f64> = (0..=10u32)
        .map(|l| conditional_helstrom(&e1, &e2, Priors::equal(), l, &HelstromCaps::CONDITIONAL).unwrap())
        .collect();
    assert_eq!(p[0], 0.5);
    for l in 1..=10 {
        assert!(p[l] < p[l - 1]);
        // −log P/L carries the log 2 / L of the ½ prefactor and approaches ξ_c from above.
        assert!(-p[l].ln() / l as f64 > xc);
    }
    let successive = (p[9] / p[10]).ln();
    assert!((successive / xc - 1.0).abs() < 0.1);
}

#[test]
fn thermal_helstrom_decreases_with_samples() {
    let dp = DerivedParams::new(0.1, &gaussian(), 1.0).unwrap();
    let r1 = build_rho1(&dp, &trunc6()).unwrap();
    let r2 = build_rho2(&dp, &trunc6()).unwrap();
    let xi = quantum_chernoff_exact(&dp).xi;
    let dense = helstrom_error_dense(&r1, &r2, Priors::equal(), 1, &HelstromCaps::THERMAL).unwrap();
    let mut last_p = 0.5;
    let mut last_rate = f64::INFINITY;
    for m in 1..=3u32 {
        let p = helstrom_error(&r1, &r2, Priors::equal(), m, &HelstromCaps::THERMAL).unwrap();
        if m == 1 {
            assert_relative_eq!(p, dense, max_relative = 1e-11);
        }
        let rate = -(2.0 * p).ln() / m as f64;
        assert!(p < last_p && rate < last_rate && rate > xi);
        last_p = p;
        last_rate = rate;
    }
    let err = helstrom_error(&r1, &r2, Priors::equal(), 4, &HelstromCaps::THERMAL).unwrap_err();
    assert!(matches!(err, Error::DimensionCap { .. }));
}

#[test]
fn binomial_mixture_identities() {
    let dp = DerivedParams::new(0.1, &gaussian(), 1.0).unwrap();
    let (e1, e2) = build_eta(&dp).unwrap();
    let pr = Priors::equal();
    let xc = conditional_bspade(&gaussian(), 1.0);
    let cond = |l: u64| conditional_helstrom(&e1, &e2, pr, l as u32, &HelstromCaps::CONDITIONAL);
    let tiny = unconditional_from_conditional(1e-12, 50, 12, xc, pr, cond).unwrap();
    assert!((tiny.value - 0.5).abs() < 1e-10 && tiny.tail_bound < 1e-100);
    let eps = 0.1;
    let one = unconditional_from_conditional(eps, 1, 12, xc, pr, cond).unwrap();
    assert_relative_eq!(one.value, (1.0 - eps) * 0.5 + eps * cond(1).unwrap(), max_relative = 1e-14);
    let full = unconditional_from_conditional(eps, 40, 40, xc, pr, |l| {
        Ok(0.5 * (1.0 - eta_trace_norm(&dp, pr, l as i32)))
    })
    .unwrap();
    let cut = unconditional_from_conditional(eps, 40, 6, xc, pr, cond).unwrap();
    let omitted = full.value - cut.value;
    assert!(omitted > 0.0 && omitted <= cut.tail_bound);
}

#[test]
fn weak_states_match_one_photon_mixture() {
    let pr = Priors::equal();
    for eps in [1e-3, 1e-2] {
        let dp = DerivedParams::new(eps, &gaussian(), 1.0).unwrap();
        let (w1, w2) = build_weak_states(&dp).unwrap();
        w1.validate().unwrap();
        w2.validate().unwrap();
        let (e1, e2) = build_eta(&dp).unwrap();
        let weak = helstrom_error(&w1, &w2, pr, 1, &HelstromCaps::CONDITIONAL).unwrap();
        let p1 = conditional_helstrom(&e1, &e2, pr, 1, &HelstromCaps::CONDITIONAL).unwrap();
        assert_relative_eq!(weak, (1.0 - eps) * 0.5 + eps * p1, max_relative = 1e-13);
        let r1 = build_rho1(&dp, &FockTruncation::default()).unwrap();
        let r2 = build_rho2(&dp, &FockTruncation::default()).unwrap();
        let thermal = helstrom_error(&r1, &r2, pr, 1, &HelstromCaps::THERMAL).unwrap();
        assert!((thermal - weak).abs() < 10.0 * eps * eps, "eps={eps}");
    }
}

#[test]
fn coherent_average_reproduces_low_order_entries() {
    let dp = DerivedParams::new(0.1, &gaussian(), 1.0).unwrap();
    let cutoff = 2;
    let rho = build_rho2(&dp, &FockTruncation { cutoff, max_deficit: 1e-2 }).unwrap();
    let avg = coherent_average_rho2(&dp, cutoff, 20_000, 7).unwrap();
    assert_eq!(avg.draws, 20_000);
    let side = cutoff + 1;
    for i in 0..rho.dim() {
        for j in 0..rho.dim() {
            let order = |k: usize| k / (side * side) + (k / side) % side + k % side;
            if order(i) + order(j) > 2 {
                continue;
            }
            let (e, m) = (rho.entry(i, j), avg.mean[(i, j)]);
            assert!((m.re - e.re).abs() <= 4.0 * avg.se_re[(i, j)] + 1e-15, "({i},{j})");
            assert!((m.im - e.im).abs() <= 4.0 * avg.se_im[(i, j)] + 1e-15);
        }
    }
}
