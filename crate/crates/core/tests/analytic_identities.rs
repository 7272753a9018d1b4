//! Identities of the closed forms, an ODE oracle for the atomic input, and
//! determinism of the Monte Carlo.

use cvteleport::analytic::{self, FluxMode};
use cvteleport::mc::{self, LagConfig, McConfig};
use cvteleport::series::{linspace, trapezoid};
use cvteleport::{db_from_lambda, lambda_from_db, mollow, validate_regime, TeleporterParams};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn params(lambda: f64, log_ratio: f64, omega: f64) -> TeleporterParams {
    let gamma_b = 20.0;
    let gamma_s = gamma_b / 10f64.powf(log_ratio);
    TeleporterParams {
        gamma_i: 1.0,
        gamma_s,
        gamma_a: 1e3 * gamma_s,
        gamma_b,
        lambda,
        eta: 1.0,
        omega_rabi: omega,
    }
}

proptest! {
    #[test]
    fn correlation_normalization_is_the_bracket(l in 0.0..0.99f64, r in -5.0..2.0f64) {
        let p = params(l, r, 6.0);
        let a = analytic::background_flux_from_correlation(&p);
        let b = analytic::background_flux(&p);
        prop_assert!((a - b).abs() <= 1e-9 * b);
    }

    #[test]
    fn stable_bracket_matches_printed_form(l in 0.0..0.999f64, x in 0.0..100.0f64) {
        let a = analytic::filter_bracket(l, x);
        let b = analytic::filter_bracket_direct(l, x);
        prop_assert!((a - b).abs() <= 1e-14);
    }

    #[test]
    fn narrow_limit_bounds_the_exact_flux(l in 0.0..0.99f64, r in -6.0..2.0f64) {
        let p = params(l, r, 6.0);
        let exact = analytic::flux_ratio(&p, FluxMode::Exact).unwrap().f_s;
        let limit = analytic::flux_ratio(&p, FluxMode::Limit).unwrap().f_s;
        prop_assert!(limit <= exact * (1.0 + 1e-15));
    }

    #[test]
    fn decibels_round_trip(db in 0.0..60.0f64) {
        let back = db_from_lambda(lambda_from_db(db).unwrap()).unwrap();
        prop_assert!((back - db).abs() <= 1e-9 * db.max(1.0));
    }

    #[test]
    fn g2_zero_series_matches_closed_form(l in 0.0..0.99f64, r in -5.0..2.0f64, o in 0.5..20.0f64) {
        let p = params(l, r, o);
        let series = analytic::g2_out(&p, &[0.0]).unwrap().values[0];
        let closed = analytic::g2_out_zero(&p).unwrap();
        prop_assert!((series - closed).abs() <= 1e-10 * closed.max(1e-3));
    }

    #[test]
    fn a_s_starts_at_one_and_decays(l in 0.0..0.99f64, r in -3.0..2.0f64) {
        let p = params(l, r, 6.0);
        prop_assert!((analytic::a_s(0.0, &p) - 1.0).abs() < 1e-12);
        let late = 60.0 / p.gamma_b.min(p.gamma_plus());
        prop_assert!(analytic::a_s(late, &p).abs() < 1e-12);
    }

    #[test]
    fn widening_the_detector_never_adds_violations(a in 0.0..6.0f64, r in -4.0..1.0f64) {
        let p = params(0.5, r, 6.0);
        let narrow = TeleporterParams { gamma_a: 10f64.powf(a) * p.gamma_b, ..p };
        let wide = TeleporterParams { gamma_a: 10.0 * narrow.gamma_a, ..p };
        prop_assert!(validate_regime(&wide).violations.len() <= validate_regime(&narrow).violations.len());
    }

    #[test]
    fn squeezing_lowers_the_background(l in 0.0..0.98f64, r in -5.0..2.0f64) {
        let p = params(l, r, 6.0);
        let q = TeleporterParams { lambda: l + 0.01, ..p };
        prop_assert!(analytic::background_flux(&q) < analytic::background_flux(&p));
    }
}

#[test]
fn background_spectrum_integrates_to_the_flux() {
    let p = params(0.6, -1.0, 6.0);
    let w = linspace(-4e4, 4e4, 400_001);
    let s = analytic::background_spectrum(&p, &w).unwrap();
    let fs = analytic::background_flux(&p);
    // ω⁻² tails beyond the grid
    let edge = *w.last().unwrap();
    let tail = 2.0 * s.density.last().unwrap() * edge;
    let total = trapezoid(&w, &s.density) + tail;
    assert!((total - fs).abs() < 1e-4 * fs, "{total} vs {fs}");
}

#[test]
fn teleported_light_decorrelates() {
    let p = params(lambda_from_db(25.0).unwrap(), -2.0, 6.0);
    let g = analytic::g2_out(&p, &[0.0, 40.0]).unwrap();
    assert!((g.values[1] - 1.0).abs() < 1e-9);
    let g1 = analytic::g1_out(&p, &[0.0]).unwrap();
    assert!((g1.values[0] - 1.0).abs() < 1e-12);
}

type Rho = [[C64; 2]; 2];

fn mul(a: &Rho, b: &Rho) -> Rho {
    let mut c = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for (k, bk) in b.iter().enumerate() {
                c[i][j] += a[i][k] * bk[j];
            }
        }
    }
    c
}

/// Lindblad generator of a resonantly driven two-level atom: population
/// decay `2γ_i`, `H = (Ω/2)σ_x`. Basis (e, g).
fn lindblad(rho: &Rho, omega: f64, gamma_i: f64) -> Rho {
    let z = C64::new(0.0, 0.0);
    let h = [[z, C64::new(0.5 * omega, 0.0)], [C64::new(0.5 * omega, 0.0), z]];
    let sm = [[z, z], [C64::new(1.0, 0.0), z]];
    let sp = [[z, C64::new(1.0, 0.0)], [z, z]];
    let hr = mul(&h, rho);
    let rh = mul(rho, &h);
    let jump = mul(&mul(&sm, rho), &sp);
    let n = mul(&sp, &sm);
    let nr = mul(&n, rho);
    let rn = mul(rho, &n);
    let g = 2.0 * gamma_i;
    let mut out = [[z; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = C64::new(0.0, -1.0) * (hr[i][j] - rh[i][j])
                + g * (jump[i][j] - 0.5 * (nr[i][j] + rn[i][j]));
        }
    }
    out
}

fn rk4(rho: &Rho, h: f64, omega: f64, gamma_i: f64) -> Rho {
    let add = |a: &Rho, b: &Rho, s: f64| {
        let mut c = *a;
        for i in 0..2 {
            for j in 0..2 {
                c[i][j] += b[i][j] * s;
            }
        }
        c
    };
    let k1 = lindblad(rho, omega, gamma_i);
    let k2 = lindblad(&add(rho, &k1, 0.5 * h), omega, gamma_i);
    let k3 = lindblad(&add(rho, &k2, 0.5 * h), omega, gamma_i);
    let k4 = lindblad(&add(rho, &k3, h), omega, gamma_i);
    let mut out = *rho;
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] += (k1[i][j] + 2.0 * k2[i][j] + 2.0 * k3[i][j] + k4[i][j]) * (h / 6.0);
        }
    }
    out
}

#[test]
fn regression_matches_master_equation_integration() {
    let (omega, gamma_i) = (6.0, 1.0);
    let p = TeleporterParams { omega_rabi: omega, gamma_i, ..Default::default() };
    // Steady state by relaxing the ground state with the same integrator.
    let z = C64::new(0.0, 0.0);
    let mut rho: Rho = [[z, z], [z, C64::new(1.0, 0.0)]];
    for _ in 0..40_000 {
        rho = rk4(&rho, 1e-3, omega, gamma_i);
    }
    let ree = rho[0][0].re;
    assert!((ree - mollow::steady_state(omega, gamma_i).excited_population()).abs() < 1e-12);
    // σ⁻ρσ⁺ seeds g2, ρσ⁺ seeds g1.
    let mut x2: Rho = [[z, z], [z, rho[0][0]]];
    let mut x1: Rho = [[z, rho[0][0]], [z, rho[1][0]]];
    let h = 1e-3;
    let tau = linspace(0.0, 10.0, 10_001);
    let g2 = mollow::g2_in(&p, &tau).unwrap();
    let g1 = mollow::g1_in(&p, &tau).unwrap().total;
    let (mut e1, mut e2) = (0.0f64, 0.0f64);
    for k in 0..tau.len() {
        // Tr[σ⁺σ⁻ X] = X_ee, Tr[σ⁻ X] = X_eg
        let g2_ode = x2[0][0].re / (ree * ree);
        let g1_ode = x1[0][1].re / ree;
        e2 = e2.max((g2_ode - g2.values[k]).abs());
        e1 = e1.max((g1_ode - g1.values[k]).abs());
        x2 = rk4(&x2, h, omega, gamma_i);
        x1 = rk4(&x1, h, omega, gamma_i);
    }
    assert!(e2 < 1e-8, "g2 L∞ {e2:e}");
    assert!(e1 < 1e-8, "g1 L∞ {e1:e}");
}

fn small_mc(seed: u64) -> (TeleporterParams, McConfig) {
    let p = TeleporterParams {
        gamma_i: 1.0,
        gamma_s: 2.0,
        gamma_a: 20.0,
        gamma_b: 1.0,
        lambda: 0.3,
        ..Default::default()
    };
    let cfg = McConfig {
        duration: 30.0,
        n_traj: 5,
        seed,
        lags: Some(LagConfig { lag_dt: 0.5, n_lags: 4 }),
        ..Default::default()
    };
    (p, cfg)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn ensembles_split_at_any_point_merge_to_the_whole(seed in any::<u64>(), cut in 1u64..5) {
        let (p, cfg) = small_mc(seed);
        let whole = mc::run_ensemble(&p, &cfg).unwrap();
        let mut parts = mc::run_range(&p, &cfg, 0..cut).unwrap();
        parts.merge(&mc::run_range(&p, &cfg, cut..5).unwrap()).unwrap();
        let rel = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300);
        prop_assert!(rel(whole.flux.mean(), parts.flux.mean()));
        prop_assert!(rel(whole.flux.se(), parts.flux.se()));
        for (a, b) in whole.background_corr.iter().zip(&parts.background_corr) {
            prop_assert!(rel(a.mean(), b.mean()));
        }
    }

    #[test]
    fn same_seed_same_numbers(seed in any::<u64>()) {
        let (p, cfg) = small_mc(seed);
        let a = mc::run_ensemble(&p, &cfg).unwrap();
        let b = mc::run_ensemble(&p, &cfg).unwrap();
        prop_assert_eq!(a, b);
    }
}
