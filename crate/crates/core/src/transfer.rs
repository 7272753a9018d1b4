//! Frequency-domain transfer of the input field and of the squeezed-light
//! noise through Alice's detector, Bob's displacement and Bob's filter, at the
//! level of quadrature spectra.
//!
//! Spectral densities here are per unit `dω/2π`, so a vacuum field has
//! symmetric density `1/2`. Divide by `2π` for the per-`dω` densities used
//! by [`crate::series::Spectrum`].

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::params::TeleporterParams;
use crate::series::Spectrum;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResponseShape {
    /// Brick-wall pass band of half-width `γ`.
    Flat,
    /// Single pole `γ/(γ − iω)`.
    Lorentzian,
}

/// How the output spectrum at one frequency is assembled.
///
/// The output symmetric density is
/// `input · S_in + (noise + vacuum) · 1/2`, with `S_in` the symmetric input
/// density: `input` is the power transmission of the input field, `noise` the
/// excess squeezed-light/shot noise in vacuum units and `vacuum` the share of
/// plain vacuum, `input + vacuum = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferWeights {
    pub input: f64,
    pub noise: f64,
    pub vacuum: f64,
}

impl TransferWeights {
    /// Normally-ordered background density per unit `dω/2π`.
    pub fn background(&self) -> f64 {
        0.5 * self.noise
    }
}

/// Power responses of one configuration at one frequency.
struct Responses {
    /// `|F_A|²`, `|1 + F_A|²`, `|1 − F_A|²`.
    alice: f64,
    alice_plus: f64,
    alice_minus: f64,
    /// Squeezed and antisqueezed quadrature transmissions of each squeezer.
    squeezed: f64,
    antisqueezed: f64,
    /// `|H_B|²`.
    bob: f64,
}

fn responses(
    w: f64,
    lambda: f64,
    gamma_s: f64,
    gamma_a: Option<f64>,
    gamma_b: Option<f64>,
    shape: ResponseShape,
) -> Responses {
    let w2 = w * w;
    let (alice, alice_plus, alice_minus) = match (gamma_a, shape) {
        (None, _) => (1.0, 4.0, 0.0),
        (Some(ga), ResponseShape::Lorentzian) => {
            let d = ga * ga + w2;
            (ga * ga / d, (4.0 * ga * ga + w2) / d, w2 / d)
        }
        (Some(ga), ResponseShape::Flat) => {
            if w.abs() < ga {
                (1.0, 4.0, 0.0)
            } else {
                (0.0, 1.0, 1.0)
            }
        }
    };
    let (squeezed, antisqueezed) = match shape {
        ResponseShape::Lorentzian => {
            let gp = gamma_s * (1.0 + lambda);
            let gm = gamma_s * (1.0 - lambda);
            let sq = (gm * gm + w2) / (gp * gp + w2);
            (sq, 1.0 / sq)
        }
        ResponseShape::Flat => {
            if w.abs() < gamma_s {
                let s = (1.0 - lambda) / (1.0 + lambda);
                (s * s, 1.0 / (s * s))
            } else {
                (1.0, 1.0)
            }
        }
    };
    let bob = match (gamma_b, shape) {
        (None, _) => 1.0,
        (Some(gb), ResponseShape::Lorentzian) => gb * gb / (gb * gb + w2),
        (Some(gb), ResponseShape::Flat) => {
            if w.abs() < gb {
                1.0
            } else {
                0.0
            }
        }
    };
    Responses {
        alice,
        alice_plus,
        alice_minus,
        squeezed,
        antisqueezed,
        bob,
    }
}

fn weights(r: Responses) -> TransferWeights {
    // Symmetric density of the squeezed-light noise reaching Bob:
    // (1/4)[|1 + F_A|² S_sq + |1 − F_A|² S_anti]. The antisqueezed term
    // drops out exactly when Alice passes everything.
    let anti = if r.alice_minus == 0.0 {
        0.0
    } else {
        r.alice_minus * r.antisqueezed
    };
    let sqz = 0.25 * (r.alice_plus * r.squeezed + anti);
    let input = r.bob * r.alice;
    TransferWeights {
        input,
        noise: r.bob * (r.alice + 2.0 * sqz - 1.0),
        vacuum: 1.0 - input,
    }
}

/// Transfer weights for a full configuration with Lorentzian or flat
/// responses; `bob_filter = false` removes Bob's filter.
pub fn transfer_weights(
    w: f64,
    params: &TeleporterParams,
    shape: ResponseShape,
    bob_filter: bool,
) -> TransferWeights {
    weights(responses(
        w,
        params.lambda,
        params.gamma_s,
        Some(params.gamma_a),
        bob_filter.then_some(params.gamma_b),
        shape,
    ))
}

/// Weights without Bob's filter for squeezing and detection bandwidths
/// `γ_s` and `γ_A`. With flat responses, `γ_s = γ_A` and `λ → 1` the input
/// passes untouched inside the band and is replaced by vacuum outside it.
/// `λ = 1` is accepted here.
pub fn matched_flat_limit_check(
    w: f64,
    lambda: f64,
    gamma_s: f64,
    gamma_a: f64,
    shape: ResponseShape,
) -> Result<TransferWeights> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParam {
            name: "lambda",
            reason: format!("{lambda} is outside [0, 1]"),
        });
    }
    Ok(weights(responses(w, lambda, gamma_s, Some(gamma_a), None, shape)))
}

/// Normally-ordered output background density per unit `dω/2π` for arbitrary
/// `(γ_A, γ_B, γ_s)`; `alice_broadband` takes `γ_A → ∞`.
pub fn background_density_general(params: &TeleporterParams, w: f64, alice_broadband: bool) -> f64 {
    let r = responses(
        w,
        params.lambda,
        params.gamma_s,
        (!alice_broadband).then_some(params.gamma_a),
        Some(params.gamma_b),
        ResponseShape::Lorentzian,
    );
    weights(r).background().max(0.0)
}

/// General-bandwidth background as a photon-flux spectrum per unit `dω`.
pub fn background_spectrum_general(
    params: &TeleporterParams,
    omega: &[f64],
    alice_broadband: bool,
) -> Result<Spectrum> {
    if omega.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let density = omega
        .iter()
        .map(|&w| background_density_general(params, w, alice_broadband) / (2.0 * PI))
        .collect();
    Ok(Spectrum::new(omega.to_vec(), density))
}

/// Total background flux for arbitrary bandwidths,
/// `∫ B(ω) dω/2π`, by midpoint quadrature in `θ` with `ω = γ_B tan θ`.
pub fn background_flux_general(params: &TeleporterParams, alice_broadband: bool) -> f64 {
    let n = 200_000;
    let scale = params.gamma_b;
    let h = PI / n as f64;
    (0..n)
        .map(|k| {
            let th = -0.5 * PI + h * (k as f64 + 0.5);
            let c = th.cos();
            background_density_general(params, scale * th.tan(), alice_broadband) * scale / (c * c)
        })
        .sum::<f64>()
        * h
        / (2.0 * PI)
}

/// Normally ordered background correlation `∫ B(ω) cos(ωτ) dω/2π` for
/// arbitrary bandwidths; at `τ = 0` this is [`background_flux_general`].
pub fn background_correlation_general(params: &TeleporterParams, tau: f64, alice_broadband: bool) -> f64 {
    let gb = params.gamma_b;
    let density = |w: f64| background_density_general(params, w, alice_broadband);
    // Subtract the ω⁻² tail as a Lorentzian of width γ_B with known transform.
    let far = 1e4 * gb.max(params.gamma_s).max(params.gamma_a.min(1e12 * gb));
    let c = density(far) * (gb * gb + far * far) / (gb * gb);
    let n = 400_000;
    let h = 0.5 * PI / n as f64;
    let rest = (0..n)
        .map(|k| {
            let th = h * (k as f64 + 0.5);
            let cs = th.cos();
            let w = gb * th.tan();
            let r = density(w) - c * gb * gb / (gb * gb + w * w);
            r * (w * tau).cos() * gb / (cs * cs)
        })
        .sum::<f64>()
        * h
        / PI;
    rest + c * 0.5 * gb * (-gb * tau.abs()).exp()
}

/// `|H_B(ω)|² + |1 − H_B(ω)|²` for `H_B = γ_B/(γ_B + iω)`; equals 1 for a
/// lossless filter.
pub fn filter_power_sum(gamma_b: f64, w: f64) -> f64 {
    let d = gamma_b * gamma_b + w * w;
    gamma_b * gamma_b / d + w * w / d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic;

    #[test]
    fn matched_flat_branches() {
        let inside = matched_flat_limit_check(0.0, 1.0, 1.0, 1.0, ResponseShape::Flat).unwrap();
        assert_eq!(inside, TransferWeights { input: 1.0, noise: 0.0, vacuum: 0.0 });
        let outside = matched_flat_limit_check(5.0, 1.0, 1.0, 1.0, ResponseShape::Flat).unwrap();
        assert_eq!(outside, TransferWeights { input: 0.0, noise: 0.0, vacuum: 1.0 });
        let partial = matched_flat_limit_check(0.0, 0.5, 1.0, 1.0, ResponseShape::Flat).unwrap();
        assert!((partial.noise - 2.0 / 9.0).abs() < 1e-15);
        assert!(matched_flat_limit_check(0.0, 1.5, 1.0, 1.0, ResponseShape::Flat).is_err());
    }

    #[test]
    fn broadband_background_matches_closed_form() {
        for (lambda, gb) in [(0.0, 0.5), (0.6, 0.5), (0.9, 3.0), (0.3, 1.3)] {
            let p = TeleporterParams {
                gamma_s: 1.0,
                gamma_b: gb,
                gamma_a: 1e9,
                lambda,
                ..Default::default()
            };
            for w in [0.0, 0.2, 1.0, 4.0, 30.0] {
                let a = background_density_general(&p, w, true) / (2.0 * PI);
                let b = analytic::background_density(&p, w);
                assert!((a - b).abs() < 1e-12 * b.max(1e-3), "λ {lambda} ω {w}: {a} {b}");
            }
        }
    }

    #[test]
    fn lambda_zero_noise_is_filtered_lorentzian() {
        let p = TeleporterParams {
            gamma_s: 1.0,
            gamma_b: 0.7,
            gamma_a: 1e12,
            lambda: 0.0,
            ..Default::default()
        };
        for w in [0.0, 0.5, 2.0] {
            let wts = transfer_weights(w, &p, ResponseShape::Lorentzian, true);
            let expected = p.gamma_b * p.gamma_b / (p.gamma_b * p.gamma_b + w * w);
            assert!((wts.background() - expected).abs() < 1e-9);
            assert!((wts.input + wts.vacuum - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn general_flux_limits() {
        let p = TeleporterParams {
            gamma_s: 1.0,
            gamma_b: 0.5,
            gamma_a: 50.0,
            lambda: 0.0,
            ..Default::default()
        };
        // λ = 0: ∫|H_B F_A|² dω/2π = γ_Aγ_B / (2(γ_A + γ_B)).
        let f = background_flux_general(&p, false);
        assert!((f - 50.0 * 0.5 / (2.0 * 50.5)).abs() < 1e-8);
        let p = TeleporterParams { lambda: 0.7, ..p };
        let f = background_flux_general(&p, true);
        assert!((f / analytic::background_flux(&p) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn narrow_detector_leaves_background_at_detector_width() {
        // γ_B > γ_A: the background roll-off follows Alice, not Bob.
        let p = TeleporterParams {
            gamma_s: 1.0,
            gamma_a: 1.0,
            gamma_b: 20.0,
            lambda: 0.0,
            ..Default::default()
        };
        let peak = background_density_general(&p, 0.0, false);
        let at_ga = background_density_general(&p, 1.0, false);
        assert!((at_ga / peak - 0.5).abs() < 0.01);
    }

    #[test]
    fn general_correlation_matches_closed_form() {
        let p = TeleporterParams {
            gamma_s: 1.0,
            gamma_b: 0.5,
            gamma_a: 1e9,
            lambda: 0.6,
            ..Default::default()
        };
        let fs = analytic::background_flux(&p);
        for tau in [0.0, 0.5, 2.0, 6.0] {
            let g = background_correlation_general(&p, tau, true);
            let exact = fs * analytic::a_s(tau, &p);
            assert!((g - exact).abs() < 1e-5 * fs, "τ {tau}: {g} {exact}");
        }
    }

    #[test]
    fn lossless_filter() {
        for w in [-100.0, -1.0, 0.0, 0.3, 1e3] {
            assert!((filter_power_sum(2.0, w) - 1.0).abs() < 1e-12);
        }
    }
}
