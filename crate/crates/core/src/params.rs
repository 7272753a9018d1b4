//! Physical parameters of the teleporter, squeezing conversions and regime
//! diagnostics.
//!
//! Rates are field half-bandwidths: a "bandwidth 2γ" is the full width at half
//! maximum of a single-pole response `γ/(γ − iω)` with unit gain at line
//! center. Everything is expressed in units of `gamma_i` by default
//! (`gamma_i = 1`).

use std::f64::consts::LN_10;

use crate::analytic;
use crate::error::{Error, Result};

/// Converts line-center squeezing in dB to the parametric-oscillator
/// parameter `λ`.
///
/// The dB figure is `−20 log10((1 − λ)/(1 + λ))`, whose exact inverse is
/// `λ = tanh(dB · ln 10 / 40)`.
pub fn lambda_from_db(db: f64) -> Result<f64> {
    if !(db >= 0.0) {
        return Err(Error::NegativeDecibels(db));
    }
    Ok((db * LN_10 / 40.0).tanh())
}

/// Line-center squeezing in dB for a given `λ ∈ [0, 1)`.
pub fn db_from_lambda(lambda: f64) -> Result<f64> {
    if lambda >= 1.0 {
        return Err(Error::SqueezingSingularity(lambda));
    }
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParam {
            name: "lambda",
            reason: format!("{lambda} is outside [0, 1)"),
        });
    }
    // ln((1+λ)/(1−λ)) = 2 atanh(λ); stays accurate for λ → 0.
    Ok(40.0 / LN_10 * lambda.atanh())
}

/// Rates and ratios describing one teleporter configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TeleporterParams {
    /// Half the Einstein A coefficient of the source atom.
    pub gamma_i: f64,
    /// Half the squeezing bandwidth.
    pub gamma_s: f64,
    /// Half of Alice's measurement bandwidth.
    pub gamma_a: f64,
    /// Half of Bob's filter bandwidth.
    pub gamma_b: f64,
    /// Squeezing parameter in `[0, 1)`.
    pub lambda: f64,
    /// Collection efficiency in `(0, 1]`.
    pub eta: f64,
    /// Rabi frequency of the resonant drive.
    pub omega_rabi: f64,
}

impl Default for TeleporterParams {
    /// 25 dB squeezing, `γ_B = 20γ_i`,
    /// `γ_B/γ_s = 10⁻²`, `γ_A/γ_s = 5`, `Ω = 6γ_i`.
    fn default() -> Self {
        let gamma_b = 20.0;
        let gamma_s = gamma_b / 1e-2;
        Self {
            gamma_i: 1.0,
            gamma_s,
            gamma_a: 5.0 * gamma_s,
            gamma_b,
            lambda: (25.0 * LN_10 / 40.0).tanh(),
            eta: 1.0,
            omega_rabi: 6.0,
        }
    }
}

impl TeleporterParams {
    pub fn validated(self) -> Result<Self> {
        let errors = self.violations();
        match errors.into_iter().next() {
            None => Ok(self),
            Some(e) => Err(e),
        }
    }

    /// Every invariant violation, not just the first.
    pub fn violations(&self) -> Vec<Error> {
        let mut out = Vec::new();
        let rates = [
            ("gamma_i", self.gamma_i),
            ("gamma_s", self.gamma_s),
            ("gamma_A", self.gamma_a),
            ("gamma_B", self.gamma_b),
        ];
        for (name, v) in rates {
            if !(v > 0.0 && v.is_finite()) {
                out.push(Error::InvalidParam {
                    name,
                    reason: format!("rate must be strictly positive and finite, got {v}"),
                });
            }
        }
        if self.lambda >= 1.0 {
            out.push(Error::SqueezingSingularity(self.lambda));
        } else if !(self.lambda >= 0.0) {
            out.push(Error::InvalidParam {
                name: "lambda",
                reason: format!("{} is outside [0, 1)", self.lambda),
            });
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            out.push(Error::InvalidParam {
                name: "eta",
                reason: format!("collection efficiency {} is outside (0, 1]", self.eta),
            });
        }
        if !(self.omega_rabi >= 0.0 && self.omega_rabi.is_finite()) {
            out.push(Error::InvalidParam {
                name: "omega_rabi",
                reason: format!("Rabi frequency must be nonnegative, got {}", self.omega_rabi),
            });
        }
        out
    }

    /// `γ₊ = γ_s(1 + λ)`, decay rate of the squeezed intracavity quadrature.
    pub fn gamma_plus(&self) -> f64 {
        self.gamma_s * (1.0 + self.lambda)
    }

    /// `γ₋ = γ_s(1 − λ)`, decay rate of the antisqueezed intracavity quadrature.
    pub fn gamma_minus(&self) -> f64 {
        self.gamma_s * (1.0 - self.lambda)
    }

    /// `γ_B/γ_s`.
    pub fn filter_ratio(&self) -> f64 {
        self.gamma_b / self.gamma_s
    }

    pub fn squeezing_db(&self) -> Result<f64> {
        db_from_lambda(self.lambda)
    }

    /// Sets `γ_s` from a target `γ_B/γ_s`, keeping `γ_A/γ_s` fixed.
    pub fn with_filter_ratio(mut self, ratio: f64) -> Self {
        let a_over_s = self.gamma_a / self.gamma_s;
        self.gamma_s = self.gamma_b / ratio;
        self.gamma_a = a_over_s * self.gamma_s;
        self
    }
}

/// One violated bandwidth-ordering assumption.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub inequality: String,
    /// Achieved ratio (left side over right-side rate).
    pub ratio: f64,
}

/// Which assumptions behind the large-bandwidth closed forms hold.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeReport {
    pub simplified_formulas_valid: bool,
    pub violations: Vec<Violation>,
    /// Right side of the filter-bandwidth bound minus `γ_B/γ_s`, when a target
    /// `g2(0)` was supplied.
    pub filter_constraint_margin: Option<f64>,
    pub notes: Vec<String>,
}

/// Default "much greater than" threshold.
pub const DEFAULT_REGIME_RATIO: f64 = 10.0;

/// Checks `γ_A ≫ γ_B, γ_s, γ_i` and `γ_B ≫ γ_i` with [`DEFAULT_REGIME_RATIO`].
pub fn validate_regime(params: &TeleporterParams) -> RegimeReport {
    validate_regime_with(params, DEFAULT_REGIME_RATIO, None)
}

pub fn validate_regime_with(
    params: &TeleporterParams,
    threshold: f64,
    target_g2_zero: Option<f64>,
) -> RegimeReport {
    let mut violations = Vec::new();
    let mut check = |name: &str, big: f64, small: f64| {
        let ratio = big / small;
        if ratio < threshold {
            violations.push(Violation {
                inequality: name.to_string(),
                ratio,
            });
        }
    };
    check("gamma_A >> gamma_B", params.gamma_a, params.gamma_b);
    check("gamma_A >> gamma_s", params.gamma_a, params.gamma_s);
    check("gamma_A >> gamma_i", params.gamma_a, params.gamma_i);
    check("gamma_B >> gamma_i", params.gamma_b, params.gamma_i);

    let mut notes = Vec::new();
    for v in &violations {
        notes.push(format!(
            "{} holds only with ratio {:.3} (threshold {threshold})",
            v.inequality, v.ratio
        ));
    }

    let filter_constraint_margin = target_g2_zero.and_then(|target| {
        match analytic::max_filter_ratio(
            target,
            params.omega_rabi,
            params.gamma_i,
            params.gamma_b,
            params.eta,
        ) {
            Ok(bound) => Some(bound - params.filter_ratio()),
            Err(e) => {
                notes.push(format!("filter bound not evaluated: {e}"));
                None
            }
        }
    });
    if let Some(m) = filter_constraint_margin {
        if m < 0.0 {
            notes.push(format!(
                "gamma_B/gamma_s = {:.3e} exceeds the filter bound by {:.3e}",
                params.filter_ratio(),
                -m
            ));
        }
    }

    RegimeReport {
        simplified_formulas_valid: violations.is_empty(),
        violations,
        filter_constraint_margin,
        notes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn db_conversions() {
        assert_eq!(lambda_from_db(0.0).unwrap(), 0.0);
        assert_eq!(db_from_lambda(0.0).unwrap(), 0.0);

        // Oracle: invert −20 log10((1−λ)/(1+λ)) through r = 10^(−dB/20).
        let oracle = |db: f64| {
            let r = 10f64.powf(-db / 20.0);
            (1.0 - r) / (1.0 + r)
        };
        for db in [25.0, 46.0] {
            let lam = lambda_from_db(db).unwrap();
            assert!((lam - oracle(db)).abs() < 1e-14);
            assert!((db_from_lambda(lam).unwrap() - db).abs() < 1e-12);
        }
        assert!((lambda_from_db(25.0).unwrap() - 0.89352).abs() < 5e-6);
        assert!((lambda_from_db(46.0).unwrap() - 0.99003).abs() < 5e-6);
        assert!((db_from_lambda(0.89352).unwrap() - 25.0).abs() < 1e-3);
    }

    #[test]
    fn db_errors() {
        assert!(matches!(lambda_from_db(-1.0), Err(Error::NegativeDecibels(_))));
        assert!(matches!(db_from_lambda(1.0), Err(Error::SqueezingSingularity(_))));
        assert!(db_from_lambda(-0.1).is_err());
        assert!(db_from_lambda(1.0 - 1e-12).unwrap() > 200.0);
    }

    #[test]
    fn invalid_params_are_all_reported() {
        let p = TeleporterParams {
            gamma_s: 0.0,
            eta: 1.5,
            lambda: 1.0,
            ..Default::default()
        };
        assert_eq!(p.violations().len(), 3);
        assert!(p.validated().is_err());
        assert!(TeleporterParams::default().validated().is_ok());
    }

    #[test]
    fn derived_rates_bracket_gamma_s() {
        let p = TeleporterParams::default();
        assert!(p.gamma_minus() <= p.gamma_s && p.gamma_s <= p.gamma_plus());
    }

    #[test]
    fn fig3d_ratios_are_flagged() {
        // (γ_i, γ_A, γ_B)/γ_s = (0.005, 5, 0.1)
        let p = TeleporterParams {
            gamma_i: 0.005,
            gamma_s: 1.0,
            gamma_a: 5.0,
            gamma_b: 0.1,
            ..Default::default()
        };
        let r = validate_regime(&p);
        assert!(!r.simplified_formulas_valid);
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].inequality, "gamma_A >> gamma_s");
        assert!((r.violations[0].ratio - 5.0).abs() < 1e-12);
    }

    #[test]
    fn broad_ratios_are_valid() {
        let p = TeleporterParams {
            gamma_i: 0.01,
            gamma_s: 1.0,
            gamma_a: 1000.0,
            gamma_b: 100.0,
            ..Default::default()
        };
        assert!(validate_regime(&p).simplified_formulas_valid);
    }

    #[test]
    fn fig5_filter_margin_is_positive() {
        let gamma_b = 20.0;
        let p = TeleporterParams {
            gamma_i: 1.0,
            gamma_s: gamma_b / 1e-4,
            gamma_a: 1e3 * gamma_b / 1e-4,
            gamma_b,
            lambda: lambda_from_db(46.0).unwrap(),
            eta: 1.0,
            omega_rabi: 6.0,
        };
        let r = validate_regime_with(&p, DEFAULT_REGIME_RATIO, Some(0.003));
        // 2 · 36/38 · 1/40 · 0.003 − 1e−4
        let expected = 2.0 * 36.0 / 38.0 / 40.0 * 0.003 - 1e-4;
        let m = r.filter_constraint_margin.unwrap();
        assert!((m - expected).abs() < 1e-15);
        assert!(m > 0.0);
    }

    #[test]
    fn filter_ratio_setter_keeps_alice_ratio() {
        let p = TeleporterParams::default().with_filter_ratio(1e-3);
        assert!((p.filter_ratio() - 1e-3).abs() < 1e-15);
        assert!((p.gamma_a / p.gamma_s - 5.0).abs() < 1e-12);
    }
}
