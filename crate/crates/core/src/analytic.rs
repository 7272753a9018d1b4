//! Closed-form coherence of the teleported light in the large-bandwidth
//! regime `γ_A ≫ γ_B, γ_s, γ_i` and `γ_B ≫ γ_i`, together with the squeezing
//! and filter design equations.
//!
//! The formulas are evaluated as written whatever the bandwidth ordering; use
//! [`crate::params::validate_regime`] to see how far a configuration strays from
//! the assumptions.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::mollow;
use crate::params::{db_from_lambda, TeleporterParams};
use crate::series::{check_delay_grid, CorrelationKind, CorrelationSeries, Spectrum};

/// Half-width, in units of `γ_s`, of the window around `γ_B = γ₊` where the
/// removable singularity of the `A_s` closed form is expanded instead.
pub const DEGENERATE_EPS: f64 = 1e-6;

fn is_degenerate(p: &TeleporterParams) -> bool {
    (p.gamma_b - p.gamma_plus()).abs() < DEGENERATE_EPS * p.gamma_s
}

/// Coefficient `(2λ/(1+λ)) γ_B γ_s` of the `e^{−γ₊τ}` term.
fn cross_coefficient(p: &TeleporterParams) -> f64 {
    2.0 * p.lambda / (1.0 + p.lambda) * p.gamma_b * p.gamma_s
}

/// Background occupation bracket `1/2 − (2λ/(1+λ)) / (1 + λ + γ_B/γ_s)`.
///
/// Evaluated in the cancellation-free form
/// `[(1−λ)² + x(1+λ)] / [2(1+λ)(1+λ+x)]` with `x = γ_B/γ_s`.
pub fn filter_bracket(lambda: f64, filter_ratio: f64) -> f64 {
    let (m, p, x) = (1.0 - lambda, 1.0 + lambda, filter_ratio);
    (m * m + x * p) / (2.0 * p * (p + x))
}

/// The same bracket as printed, `1/2 − (2λ/(1+λ))/(1+λ+x)`.
pub fn filter_bracket_direct(lambda: f64, filter_ratio: f64) -> f64 {
    0.5 - 2.0 * lambda / (1.0 + lambda) / (1.0 + lambda + filter_ratio)
}

/// Its `γ_B/γ_s → 0` limit `((1−λ)/(1+λ))²/2`.
pub fn filter_bracket_limit(lambda: f64) -> f64 {
    let s = (1.0 - lambda) / (1.0 + lambda);
    0.5 * s * s
}

/// Flux `f_s` of the noise background leaving Bob's filter,
/// `γ_B [1/2 − (2λ/(1+λ)) / (1 + λ + γ_B/γ_s)]`.
pub fn background_flux(params: &TeleporterParams) -> f64 {
    params.gamma_b * filter_bracket(params.lambda, params.filter_ratio())
}

/// `f_s` read off the zero-delay value of the unnormalized background
/// correlation `(f_s/γ_B) A_s(τ)`.
pub fn background_flux_from_correlation(params: &TeleporterParams) -> f64 {
    if is_degenerate(params) {
        return params.gamma_b * degenerate_weight(params);
    }
    let (gb, gm, gp) = (params.gamma_b, params.gamma_minus(), params.gamma_plus());
    let num = 0.5 * (gb * gb - gm * gm) - cross_coefficient(params);
    gb * num / (gb * gb - gp * gp)
}

/// Weight `1/2 − (2λγ_s/(1+λ))/(γ_B + γ₊)` of `e^{−γ_Bτ}` once the
/// singular pair is grouped into a divided difference.
fn degenerate_weight(p: &TeleporterParams) -> f64 {
    0.5 - 2.0 * p.lambda * p.gamma_s / (1.0 + p.lambda) / (p.gamma_b + p.gamma_plus())
}

/// Normalized background correlation `A_s(τ)`, with `A_s(0) = 1`.
pub fn a_s(tau: f64, params: &TeleporterParams) -> f64 {
    let (gb, gm, gp) = (params.gamma_b, params.gamma_minus(), params.gamma_plus());
    let norm = filter_bracket(params.lambda, params.filter_ratio());
    if is_degenerate(params) {
        // (e^{−γ_Bτ} − e^{−γ₊τ})/(γ_B − γ₊) ≈ −τ e^{−γ̄τ}, error (δτ)²/24.
        let mid = 0.5 * (gb + gp);
        let diff = -tau * (-mid * tau).exp();
        let unnorm = degenerate_weight(params) * (-gb * tau).exp()
            + cross_coefficient(params) / (gb + gp) * diff;
        return unnorm / norm;
    }
    let num = 0.5 * (gb * gb - gm * gm) * (-gb * tau).exp()
        - cross_coefficient(params) * (-gp * tau).exp();
    num / (gb * gb - gp * gp) / norm
}

pub fn a_s_series(params: &TeleporterParams, tau: &[f64]) -> Result<CorrelationSeries> {
    check_delay_grid(tau)?;
    Ok(CorrelationSeries {
        tau: tau.to_vec(),
        values: tau.iter().map(|&t| a_s(t, params)).collect(),
        flux_scale: background_flux(params),
        kind: CorrelationKind::As,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxMode {
    /// Finite `γ_B/γ_s`.
    Exact,
    /// `γ_B/γ_s → 0`.
    Limit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxReport {
    pub f_in: f64,
    pub f_s: f64,
    pub f_out: f64,
    /// `f_s/f_in`.
    pub ratio: f64,
    pub mode: FluxMode,
}

pub fn flux_ratio(params: &TeleporterParams, mode: FluxMode) -> Result<FluxReport> {
    if !(params.omega_rabi > 0.0) {
        return Err(Error::NoInputFlux);
    }
    let f_in = mollow::input_flux(params.omega_rabi, params.gamma_i, params.eta);
    let f_s = match mode {
        FluxMode::Exact => background_flux(params),
        FluxMode::Limit => params.gamma_b * filter_bracket_limit(params.lambda),
    };
    Ok(FluxReport {
        f_in,
        f_s,
        f_out: f_in + f_s,
        ratio: f_s / f_in,
        mode,
    })
}

/// `g2_out(0) = 2[1 − (1 + f_s/f_in)^{−2}]` for an antibunched input.
pub fn g2_zero_from_ratio(ratio: f64) -> f64 {
    let q = 1.0 / (1.0 + ratio);
    2.0 * (1.0 - q * q)
}

pub fn g2_out_zero(params: &TeleporterParams) -> Result<f64> {
    Ok(g2_zero_from_ratio(flux_ratio(params, FluxMode::Exact)?.ratio))
}

/// `f_out g1_out(τ) = f_s A_s(τ) + f_in g1_in(τ)`.
pub fn g1_out(params: &TeleporterParams, tau: &[f64]) -> Result<CorrelationSeries> {
    let flux = flux_ratio(params, FluxMode::Exact)?;
    let g1 = mollow::g1_in(params, tau)?;
    let values = tau
        .iter()
        .zip(&g1.total.values)
        .map(|(&t, g)| (flux.f_s * a_s(t, params) + flux.f_in * g) / flux.f_out)
        .collect();
    Ok(CorrelationSeries {
        tau: tau.to_vec(),
        values,
        flux_scale: flux.f_out,
        kind: CorrelationKind::G1Total,
    })
}

/// Intensity correlation of the teleported light:
/// `1 + (f_in/f_out)²[g2_in − 1] + (f_s/f_out) A_s [g1_out + (f_in/f_out) g1_in]`.
pub fn g2_out(params: &TeleporterParams, tau: &[f64]) -> Result<CorrelationSeries> {
    let flux = flux_ratio(params, FluxMode::Exact)?;
    let g1_in = mollow::g1_in(params, tau)?.total;
    let g2_in = mollow::g2_in(params, tau)?;
    let pin = flux.f_in / flux.f_out;
    let ps = flux.f_s / flux.f_out;
    let values = tau
        .iter()
        .zip(g1_in.values.iter().zip(&g2_in.values))
        .map(|(&t, (&g1, &g2))| {
            let a = a_s(t, params);
            let g1o = ps * a + pin * g1;
            (1.0 + pin * pin * (g2 - 1.0) + ps * a * (g1o + pin * g1)).max(0.0)
        })
        .collect();
    Ok(CorrelationSeries {
        tau: tau.to_vec(),
        values,
        flux_scale: flux.f_out,
        kind: CorrelationKind::G2,
    })
}

fn lorentzian(gamma: f64, w: f64) -> f64 {
    gamma / (PI * (gamma * gamma + w * w))
}

/// `∂/∂γ` of [`lorentzian`].
fn lorentzian_dgamma(gamma: f64, w: f64) -> f64 {
    let d = gamma * gamma + w * w;
    (w * w - gamma * gamma) / (PI * d * d)
}

/// Background density `f_s Ã_s(ω)`: the Fourier transform of `f_s A_s(τ)`,
/// a pair of Lorentzians of half-widths `γ_B` and `γ₊`.
pub fn background_density(params: &TeleporterParams, w: f64) -> f64 {
    let (gb, gp) = (params.gamma_b, params.gamma_plus());
    let divided = if is_degenerate(params) {
        lorentzian_dgamma(0.5 * (gb + gp), w)
    } else {
        (lorentzian(gb, w) - lorentzian(gp, w)) / (gb - gp)
    };
    let d = gb * (degenerate_weight(params) * lorentzian(gb, w)
        + cross_coefficient(params) / (gb + gp) * divided);
    d.max(0.0)
}

pub fn background_spectrum(params: &TeleporterParams, omega: &[f64]) -> Result<Spectrum> {
    if omega.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let density = omega.iter().map(|&w| background_density(params, w)).collect();
    Ok(Spectrum::new(omega.to_vec(), density))
}

/// Incoherent output spectrum `s_out(ω) = f_s Ã_s(ω) + f_in s_in(ω)`; the
/// elastic δ-peak is excluded. Without drive only the background remains.
pub fn output_spectrum(params: &TeleporterParams, omega: &[f64]) -> Result<Spectrum> {
    let bg = background_spectrum(params, omega)?;
    if params.omega_rabi == 0.0 {
        return Ok(bg);
    }
    let input = mollow::incoherent_spectrum(params, omega)?;
    Ok(bg.add(&input))
}

fn check_target(target: f64) -> Result<()> {
    if target > 0.0 && target < 2.0 {
        Ok(())
    } else {
        Err(Error::TargetOutOfRange(target))
    }
}

/// Line-center squeezing (dB) needed for a target `g2_out(0) ≪ 1`:
/// `−10 log10(Ω²/(Ω² + 2γ_i²) · ηγ_i/(2γ_B) · g2(0))`, floored at 0 dB.
pub fn required_squeezing_db(
    target_g2_zero: f64,
    omega_rabi: f64,
    gamma_i: f64,
    gamma_b: f64,
    eta: f64,
) -> Result<f64> {
    check_target(target_g2_zero)?;
    if !(omega_rabi > 0.0) {
        return Err(Error::NoInputFlux);
    }
    let o2 = omega_rabi * omega_rabi;
    let arg = o2 / (o2 + 2.0 * gamma_i * gamma_i) * eta * gamma_i / (2.0 * gamma_b) * target_g2_zero;
    Ok((-10.0 * arg.log10()).max(0.0))
}

/// Upper bound on `γ_B/γ_s`:
/// `2Ω²/(Ω² + 2γ_i²) · ηγ_i/(2γ_B) · g2(0)`.
pub fn max_filter_ratio(
    target_g2_zero: f64,
    omega_rabi: f64,
    gamma_i: f64,
    gamma_b: f64,
    eta: f64,
) -> Result<f64> {
    check_target(target_g2_zero)?;
    let o2 = omega_rabi * omega_rabi;
    Ok(2.0 * o2 / (o2 + 2.0 * gamma_i * gamma_i) * eta * gamma_i / (2.0 * gamma_b) * target_g2_zero)
}

/// Squeezing (dB) at which the finite-`γ_B/γ_s` flux ratio gives exactly the
/// target `g2_out(0)`. Solved by bisection; errors if the filter ratio alone
/// already exceeds the target.
pub fn required_squeezing_db_at_filter_ratio(
    target_g2_zero: f64,
    params: &TeleporterParams,
) -> Result<f64> {
    check_target(target_g2_zero)?;
    let at = |lambda: f64| {
        g2_out_zero(&TeleporterParams { lambda, ..*params })
    };
    let (mut lo, mut hi) = (0.0, 1.0 - 1e-15);
    if at(lo)? <= target_g2_zero {
        return Ok(0.0);
    }
    if at(hi)? > target_g2_zero {
        return Err(Error::InvalidParam {
            name: "gamma_B",
            reason: format!(
                "gamma_B/gamma_s = {:.3e} is too large to reach g2(0) = {target_g2_zero} at any squeezing",
                params.filter_ratio()
            ),
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if at(mid)? > target_g2_zero {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    db_from_lambda(hi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignResult {
    pub required_db: f64,
    pub max_filter_ratio: f64,
    /// Whether the configured `γ_B/γ_s` lies below `max_filter_ratio`.
    pub feasible: bool,
}

pub fn design(params: &TeleporterParams, target_g2_zero: f64) -> Result<DesignResult> {
    let p = params;
    let required_db = required_squeezing_db(target_g2_zero, p.omega_rabi, p.gamma_i, p.gamma_b, p.eta)?;
    let max_filter_ratio = max_filter_ratio(target_g2_zero, p.omega_rabi, p.gamma_i, p.gamma_b, p.eta)?;
    Ok(DesignResult {
        required_db,
        max_filter_ratio,
        feasible: p.filter_ratio() < max_filter_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::lambda_from_db;
    use crate::series::linspace;

    fn operating_point() -> TeleporterParams {
        let gamma_b = 20.0;
        TeleporterParams {
            gamma_i: 1.0,
            gamma_s: gamma_b / 1e-4,
            gamma_a: 1e3 * gamma_b / 1e-4,
            gamma_b,
            lambda: lambda_from_db(46.0).unwrap(),
            eta: 1.0,
            omega_rabi: 6.0,
        }
    }

    #[test]
    fn a_s_basics() {
        let p = TeleporterParams::default();
        assert!((a_s(0.0, &p) - 1.0).abs() < 1e-12);
        assert!(a_s(50.0, &p).abs() < 1e-12);
        let p0 = TeleporterParams { lambda: 0.0, ..p };
        for t in [0.01, 0.05, 0.2] {
            assert!((a_s(t, &p0) - (-p0.gamma_b * t).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn a_s_is_continuous_across_degeneracy() {
        let base = TeleporterParams {
            gamma_s: 1.0,
            gamma_a: 100.0,
            lambda: 0.4,
            ..Default::default()
        };
        let gp = base.gamma_plus();
        let at = |tau: f64, offset: f64| a_s(tau, &TeleporterParams { gamma_b: gp + offset, ..base });
        for tau in [0.0, 0.3, 1.0, 3.0] {
            for side in [1.0, -1.0] {
                let inside = at(tau, side * 0.9999e-6);
                let outside = at(tau, side * 1.0001e-6);
                assert!((inside - outside).abs() < 1e-8, "tau {tau} {inside} {outside}");
            }
        }
    }

    #[test]
    fn background_flux_examples() {
        let p = TeleporterParams { lambda: 0.0, ..Default::default() };
        assert!((background_flux(&p) - p.gamma_b / 2.0).abs() < 1e-14);

        let p = TeleporterParams {
            gamma_s: 1.0,
            gamma_b: 2.0,
            lambda: 0.5,
            ..Default::default()
        };
        let bracket = 0.5 - (2.0 / 3.0) / 3.5;
        assert!((filter_bracket(0.5, 2.0) - bracket).abs() < 1e-15);
        assert!((background_flux(&p) - 2.0 * bracket).abs() < 1e-14);
        assert!((background_flux(&p) / p.gamma_s - 0.61905).abs() < 1e-5);
        let other = background_flux_from_correlation(&p);
        assert!((other / background_flux(&p) - 1.0).abs() < 1e-12);

        // λ → 1 with vanishing filter ratio kills the background.
        assert!(filter_bracket(1.0 - 1e-9, 1e-12) < 1e-12);
    }

    #[test]
    fn bracket_forms_agree() {
        for lambda in [0.0, 0.3, 0.7, 0.9] {
            for x in [1e-3, 0.1, 1.0, 10.0] {
                let a = filter_bracket(lambda, x);
                let b = filter_bracket_direct(lambda, x);
                assert!((a - b).abs() < 1e-14, "{lambda} {x}");
            }
        }
    }

    #[test]
    fn flux_ratio_examples() {
        let p = TeleporterParams {
            lambda: 0.0,
            eta: 1.0,
            gamma_b: 1.0,
            omega_rabi: 1e4,
            ..Default::default()
        };
        let r = flux_ratio(&p, FluxMode::Exact).unwrap();
        assert!((r.ratio - 0.5).abs() < 1e-7);
        assert_eq!(r.f_out, r.f_in + r.f_s);

        let p = operating_point();
        let exact = flux_ratio(&p, FluxMode::Exact).unwrap().ratio;
        let limit = flux_ratio(&p, FluxMode::Limit).unwrap().ratio;
        // Independent evaluation of the printed flux ratio.
        let lam = p.lambda;
        let x = 1e-4;
        let bracket = 0.5 - 2.0 * lam / (1.0 + lam) / (1.0 + lam + x);
        let hand = 20.0 * bracket * 38.0 / 36.0;
        assert!((exact / hand - 1.0).abs() < 1e-9);
        assert!((exact - 7.96e-4).abs() < 0.01e-4);
        let s = (1.0 - lam) / (1.0 + lam);
        assert!((limit - 10.0 * s * s * 38.0 / 36.0).abs() < 1e-15);
        assert!((limit - 2.65e-4).abs() < 0.01e-4);

        assert!(matches!(
            flux_ratio(&TeleporterParams { omega_rabi: 0.0, ..p }, FluxMode::Exact),
            Err(Error::NoInputFlux)
        ));
    }

    #[test]
    fn g2_zero_limits() {
        assert_eq!(g2_zero_from_ratio(0.0), 0.0);
        assert!((g2_zero_from_ratio(1e12) - 2.0).abs() < 1e-11);
        let g = g2_out_zero(&operating_point()).unwrap();
        assert!((g - 0.003).abs() < 0.0005, "{g}");
    }

    #[test]
    fn g1_out_mixes_background_and_input() {
        let p = TeleporterParams {
            lambda: 0.0,
            ..Default::default()
        };
        let tau = [0.0, 1.0 / p.gamma_b];
        let g1o = g1_out(&p, &tau).unwrap();
        assert!((g1o.values[0] - 1.0).abs() < 1e-12);
        let flux = flux_ratio(&p, FluxMode::Exact).unwrap();
        let g1i = mollow::g1_in(&p, &tau).unwrap().total.values[1];
        let expected = (flux.f_s * (-1f64).exp() + flux.f_in * g1i) / flux.f_out;
        assert!((g1o.values[1] - expected).abs() < 1e-14);
    }

    #[test]
    fn g2_out_recovers_input_without_background() {
        // Vanishing background: extreme squeezing and narrow filter.
        let p = TeleporterParams {
            lambda: 1.0 - 1e-9,
            gamma_s: 1e12,
            gamma_a: 1e13,
            gamma_b: 20.0,
            ..Default::default()
        };
        let tau = linspace(0.0, 5.0, 51);
        let out = g2_out(&p, &tau).unwrap();
        let inp = mollow::g2_in(&p, &tau).unwrap();
        for (a, b) in out.values.iter().zip(&inp.values) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn background_spectrum_normalization() {
        for lambda in [0.0, 0.6] {
            let p = TeleporterParams {
                gamma_s: 1.0,
                gamma_b: 0.5,
                gamma_a: 50.0,
                lambda,
                ..Default::default()
            };
            // Integrate in θ with ω = tan θ to cover the Lorentzian tails.
            let n = 200_000;
            let mut sum = 0.0;
            for k in 0..n {
                let th = -0.5 * PI + PI * (k as f64 + 0.5) / n as f64;
                let w = th.tan();
                sum += background_density(&p, w) / th.cos().powi(2) * PI / n as f64;
            }
            assert!((sum / background_flux(&p) - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn design_examples() {
        // Forward evaluation of the design equation.
        let db = required_squeezing_db(0.003, 6.0, 1.0, 20.0, 1.0).unwrap();
        let arg: f64 = 36.0 / 38.0 / 40.0 * 0.003;
        assert!((db + 10.0 * arg.log10()).abs() < 1e-12);
        // Argument of the log equal to 1.
        // With γ_B = γ_i/4 the prefactor is 2·36/38.
        let target = 38.0 / 72.0;
        let db0 = required_squeezing_db(target, 6.0, 1.0, 0.25, 1.0).unwrap();
        assert!(db0.abs() < 1e-12);
        assert!(required_squeezing_db(0.0, 6.0, 1.0, 20.0, 1.0).is_err());
        assert!(required_squeezing_db(2.0, 6.0, 1.0, 20.0, 1.0).is_err());

        let b = max_filter_ratio(0.003, 6.0, 1.0, 20.0, 1.0).unwrap();
        assert!((b - 1.42e-4).abs() < 0.01e-4);
        let b2 = max_filter_ratio(0.003, 6.0, 1.0, 40.0, 1.0).unwrap();
        assert!((b2 * 2.0 - b).abs() < 1e-18);
        assert!(max_filter_ratio(1e-12, 6.0, 1.0, 20.0, 1.0).unwrap() < 1e-13);
    }

    #[test]
    fn design_bisection_oracle() {
        // Bisection on the limit-mode g2(0)(λ) versus the design equation.
        let target = 0.01;
        let base = TeleporterParams {
            gamma_b: 20.0,
            omega_rabi: 6.0,
            ..Default::default()
        };
        let g = |lambda: f64| {
            g2_zero_from_ratio(
                flux_ratio(&TeleporterParams { lambda, ..base }, FluxMode::Limit).unwrap().ratio,
            )
        };
        let (mut lo, mut hi) = (0.0, 1.0 - 1e-12);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > target {
                lo = mid
            } else {
                hi = mid
            }
        }
        let oracle_db = db_from_lambda(hi).unwrap();
        let db = required_squeezing_db(target, 6.0, 1.0, 20.0, 1.0).unwrap();
        assert!((db - oracle_db).abs() < 0.5, "{db} vs {oracle_db}");
    }

    #[test]
    fn exact_inversion_at_the_operating_filter_ratio() {
        let p = operating_point();
        let db = required_squeezing_db_at_filter_ratio(0.003, &p).unwrap();
        let back = g2_out_zero(&TeleporterParams {
            lambda: lambda_from_db(db).unwrap(),
            ..p
        })
        .unwrap();
        assert!((back - 0.003).abs() < 1e-9);
        // Too wide a filter cannot reach the target.
        assert!(required_squeezing_db_at_filter_ratio(0.003, &p.with_filter_ratio(1e-2)).is_err());
    }

    #[test]
    fn design_feasibility() {
        let d = design(&operating_point(), 0.003).unwrap();
        assert!(d.feasible);
        let d = design(&operating_point().with_filter_ratio(1e-3), 0.003).unwrap();
        assert!(!d.feasible);
    }
}
