//! Resonance fluorescence of a resonantly driven two-state atom: the light
//! presented to the teleporter input.
//!
//! Two-time correlations follow from the quantum regression theorem applied to
//! the 3×3 optical Bloch generator. The atom is driven by `H = (Ω/2)σx` and
//! decays at the Einstein rate `A = 2γ_i`.

use nalgebra::{Matrix2, Matrix3, Vector3};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::params::TeleporterParams;
use crate::series::{check_delay_grid, CorrelationKind, CorrelationSeries, Spectrum};

/// Relative eigenvalue separation below which the spectral propagator is
/// abandoned for scaling-and-squaring.
const DEGENERACY_TOL: f64 = 1e-3;

/// Bloch vector `(⟨σx⟩, ⟨σy⟩, ⟨σz⟩)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
}

impl BlochVector {
    pub fn excited_population(&self) -> f64 {
        0.5 * (1.0 + self.sz)
    }

    /// `⟨σ⁻⟩ = (sx − i sy)/2`.
    pub fn lowering(&self) -> C64 {
        C64::new(0.5 * self.sx, -0.5 * self.sy)
    }
}

#[derive(Debug, Clone)]
enum Propagator {
    /// Sylvester expansion `e^{Mτ} = Σ_k e^{μ_k τ} P_k`.
    Spectral { eigenvalues: [C64; 3], projectors: [Matrix3<C64>; 3] },
    /// Near-defective generator.
    ScalingSquaring,
}

/// Affine optical Bloch equations `ds/dt = M s + b · Tr ρ`.
#[derive(Debug, Clone)]
pub struct BlochGenerator {
    matrix: Matrix3<f64>,
    offset: Vector3<f64>,
    drive: f64,
    decay: f64,
    propagator: Propagator,
}

impl BlochGenerator {
    pub fn new(omega_rabi: f64, gamma_i: f64) -> Self {
        let a = 2.0 * gamma_i;
        #[rustfmt::skip]
        let matrix = Matrix3::new(
            -0.5 * a, 0.0,         0.0,
            0.0,      -0.5 * a,    -omega_rabi,
            0.0,      omega_rabi,  -a,
        );
        let offset = Vector3::new(0.0, 0.0, -a);
        let propagator = spectral_propagator(&matrix).unwrap_or(Propagator::ScalingSquaring);
        Self {
            matrix,
            offset,
            drive: omega_rabi,
            decay: a,
            propagator,
        }
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.matrix
    }

    pub fn drive(&self) -> f64 {
        self.drive
    }

    /// Einstein A coefficient.
    pub fn decay(&self) -> f64 {
        self.decay
    }

    pub fn eigenvalues(&self) -> [C64; 3] {
        match &self.propagator {
            Propagator::Spectral { eigenvalues, .. } => *eigenvalues,
            Propagator::ScalingSquaring => {
                let ev = self.matrix.complex_eigenvalues();
                [ev[0], ev[1], ev[2]]
            }
        }
    }

    /// Largest imaginary part among the eigenvalues (the Mollow sideband
    /// splitting).
    pub fn oscillation_frequency(&self) -> f64 {
        self.eigenvalues()
            .iter()
            .map(|z| z.im.abs())
            .fold(0.0, f64::max)
    }

    pub fn uses_spectral_propagator(&self) -> bool {
        matches!(self.propagator, Propagator::Spectral { .. })
    }

    /// `e^{Mτ}`.
    pub fn propagator(&self, tau: f64) -> Matrix3<f64> {
        match &self.propagator {
            Propagator::Spectral {
                eigenvalues,
                projectors,
            } => {
                let mut acc = Matrix3::<C64>::zeros();
                for (mu, p) in eigenvalues.iter().zip(projectors) {
                    acc += p * (mu * tau).exp();
                }
                acc.map(|z| z.re)
            }
            Propagator::ScalingSquaring => (self.matrix * tau).exp(),
        }
    }

    /// Unique fixed point of the Bloch equations for a unit-trace state.
    pub fn steady_state(&self) -> BlochVector {
        let s = self
            .matrix
            .lu()
            .solve(&(-self.offset))
            .expect("Bloch generator is nonsingular");
        BlochVector {
            sx: s[0],
            sy: s[1],
            sz: s[2],
        }
    }

    /// Evolves a (generally non-Hermitian, non-unit-trace) operator `X` of the
    /// atom for a delay `τ` under the master equation.
    fn evolve(&self, x0: &AtomOperator, steady: &Vector3<C64>, tau: f64) -> AtomOperator {
        let u = self.propagator(tau).map(|v| C64::new(v, 0.0));
        let shift = steady * x0.trace;
        AtomOperator {
            trace: x0.trace,
            bloch: shift + u * (x0.bloch - shift),
        }
    }
}

fn spectral_propagator(m: &Matrix3<f64>) -> Option<Propagator> {
    let ev = m.complex_eigenvalues();
    let mu = [ev[0], ev[1], ev[2]];
    let scale = mu.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    for i in 0..3 {
        for j in (i + 1)..3 {
            if (mu[i] - mu[j]).norm() < DEGENERACY_TOL * scale {
                return None;
            }
        }
    }
    let mc = m.map(|v| C64::new(v, 0.0));
    let id = Matrix3::<C64>::identity();
    let projectors = [0, 1, 2].map(|k| {
        let mut p = id;
        for j in 0..3 {
            if j != k {
                p = p * (mc - id * mu[j]) / (mu[k] - mu[j]);
            }
        }
        p
    });
    Some(Propagator::Spectral {
        eigenvalues: mu,
        projectors,
    })
}

/// An atomic operator in the basis `{I, σx, σy, σz}`: `X = (t I + y·σ)/2`.
#[derive(Debug, Clone, Copy)]
struct AtomOperator {
    trace: C64,
    bloch: Vector3<C64>,
}

impl AtomOperator {
    /// Basis order `(e, g)`.
    fn from_matrix(x: &Matrix2<C64>) -> Self {
        let i = C64::i();
        AtomOperator {
            trace: x[(0, 0)] + x[(1, 1)],
            bloch: Vector3::new(
                x[(0, 1)] + x[(1, 0)],
                i * (x[(0, 1)] - x[(1, 0)]),
                x[(0, 0)] - x[(1, 1)],
            ),
        }
    }

    fn density(s: &BlochVector) -> Matrix2<C64> {
        Matrix2::new(
            C64::new(0.5 * (1.0 + s.sz), 0.0),
            C64::new(0.5 * s.sx, -0.5 * s.sy),
            C64::new(0.5 * s.sx, 0.5 * s.sy),
            C64::new(0.5 * (1.0 - s.sz), 0.0),
        )
    }

    /// `Tr(σ⁻ X)`.
    fn lowering(&self) -> C64 {
        0.5 * (self.bloch[0] - C64::i() * self.bloch[1])
    }

    /// `Tr(σ⁺σ⁻ X)`.
    fn excited(&self) -> C64 {
        0.5 * (self.trace + self.bloch[2])
    }
}

fn sigma_plus() -> Matrix2<C64> {
    Matrix2::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0))
}

fn sigma_minus() -> Matrix2<C64> {
    sigma_plus().transpose()
}

pub fn steady_state(omega_rabi: f64, gamma_i: f64) -> BlochVector {
    BlochGenerator::new(omega_rabi, gamma_i).steady_state()
}

/// Photon flux collected into the teleporter input,
/// `f_in = η γ_i Ω²/(Ω² + 2γ_i²) = η · 2γ_i · ρ_ee`.
pub fn input_flux(omega_rabi: f64, gamma_i: f64, eta: f64) -> f64 {
    let o2 = omega_rabi * omega_rabi;
    eta * gamma_i * o2 / (o2 + 2.0 * gamma_i * gamma_i)
}

struct Regression {
    generator: BlochGenerator,
    steady: BlochVector,
    steady_c: Vector3<C64>,
}

impl Regression {
    fn new(params: &TeleporterParams) -> Result<Self> {
        if !(params.omega_rabi > 0.0) {
            return Err(Error::NoInputFlux);
        }
        let generator = BlochGenerator::new(params.omega_rabi, params.gamma_i);
        let steady = generator.steady_state();
        let steady_c = Vector3::new(steady.sx, steady.sy, steady.sz).map(|v| C64::new(v, 0.0));
        Ok(Self {
            generator,
            steady,
            steady_c,
        })
    }

    fn rho_ee(&self) -> f64 {
        self.steady.excited_population()
    }

    /// `ρ σ⁺`, the regression seed for `⟨σ⁺(0)σ⁻(τ)⟩`.
    fn g1_seed(&self) -> AtomOperator {
        AtomOperator::from_matrix(&(AtomOperator::density(&self.steady) * sigma_plus()))
    }

    /// `σ⁻ ρ σ⁺`, the regression seed for `⟨σ⁺(0)σ⁺σ⁻(τ)σ⁻(0)⟩`.
    fn g2_seed(&self) -> AtomOperator {
        AtomOperator::from_matrix(
            &(sigma_minus() * AtomOperator::density(&self.steady) * sigma_plus()),
        )
    }

    fn coherent_fraction(&self) -> f64 {
        self.steady.lowering().norm_sqr() / self.rho_ee()
    }

    fn g1(&self, tau: f64) -> f64 {
        let x = self.generator.evolve(&self.g1_seed(), &self.steady_c, tau);
        x.lowering().re / self.rho_ee()
    }

    fn g2(&self, tau: f64) -> f64 {
        let x = self.generator.evolve(&self.g2_seed(), &self.steady_c, tau);
        x.excited().re / (self.rho_ee() * self.rho_ee())
    }
}

/// First-order coherence of the input light together with its coherent
/// (elastic) fraction `|⟨σ⁻⟩|²/⟨σ⁺σ⁻⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputCoherence {
    pub total: CorrelationSeries,
    pub coherent_fraction: f64,
}

impl InputCoherence {
    /// `g1_total − coherent_fraction`, which decays to zero.
    pub fn incoherent(&self) -> CorrelationSeries {
        CorrelationSeries {
            tau: self.total.tau.clone(),
            values: self
                .total
                .values
                .iter()
                .map(|g| g - self.coherent_fraction)
                .collect(),
            flux_scale: self.total.flux_scale,
            kind: CorrelationKind::G1Incoherent,
        }
    }
}

pub fn g1_in(params: &TeleporterParams, tau: &[f64]) -> Result<InputCoherence> {
    check_delay_grid(tau)?;
    let reg = Regression::new(params)?;
    let values = tau.iter().map(|&t| reg.g1(t)).collect();
    Ok(InputCoherence {
        total: CorrelationSeries {
            tau: tau.to_vec(),
            values,
            flux_scale: input_flux(params.omega_rabi, params.gamma_i, params.eta),
            kind: CorrelationKind::G1Total,
        },
        coherent_fraction: reg.coherent_fraction(),
    })
}

/// Second-order coherence of resonance fluorescence; `g2(0)` vanishes.
pub fn g2_in(params: &TeleporterParams, tau: &[f64]) -> Result<CorrelationSeries> {
    check_delay_grid(tau)?;
    let reg = Regression::new(params)?;
    let values = tau.iter().map(|&t| reg.g2(t).max(0.0)).collect();
    Ok(CorrelationSeries {
        tau: tau.to_vec(),
        values,
        flux_scale: input_flux(params.omega_rabi, params.gamma_i, params.eta),
        kind: CorrelationKind::G2,
    })
}

/// Closed form of the resonant `g2(τ)`:
/// `1 − e^{−3γ_iτ/2}[cos(Ω_R τ) + (3γ_i/2Ω_R) sin(Ω_R τ)]`
/// with `Ω_R = √(Ω² − γ_i²/4)` (continued analytically below critical drive).
pub fn g2_in_closed_form(omega_rabi: f64, gamma_i: f64, tau: f64) -> f64 {
    let w = C64::new(omega_rabi * omega_rabi - 0.25 * gamma_i * gamma_i, 0.0).sqrt();
    let wt = w * tau;
    let sinc = if wt.norm() < 1e-8 {
        C64::new(tau, 0.0)
    } else {
        wt.sin() / w
    };
    let bracket = wt.cos() + 1.5 * gamma_i * sinc;
    1.0 - (-1.5 * gamma_i * tau).exp() * bracket.re
}

/// Incoherent (inelastic) part of the input spectrum, in photon flux per unit
/// angular frequency; integrates to `f_in (1 − coherent fraction)`.
pub fn incoherent_spectrum(params: &TeleporterParams, omega: &[f64]) -> Result<Spectrum> {
    if omega.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let reg = Regression::new(params)?;
    let seed = reg.g1_seed();
    let v = seed.bloch - reg.steady_c * seed.trace;
    let readout = Vector3::new(C64::new(0.5, 0.0), C64::new(0.0, -0.5), C64::new(0.0, 0.0));
    let m = reg.generator.matrix().map(|x| C64::new(x, 0.0));
    let scale = input_flux(params.omega_rabi, params.gamma_i, params.eta)
        / (std::f64::consts::PI * reg.rho_ee());
    let density = omega
        .iter()
        .map(|&w| {
            // ∫₀^∞ e^{(M + iω)τ} dτ = −(M + iω)⁻¹
            let shifted = m + Matrix3::identity() * C64::new(0.0, w);
            let z = shifted.lu().solve(&v).expect("resolvent exists off the imaginary axis");
            (scale * -(readout.dot(&z)).re).max(0.0)
        })
        .collect();
    Ok(Spectrum::new(omega.to_vec(), density))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::linspace;

    fn params(omega: f64) -> TeleporterParams {
        TeleporterParams {
            omega_rabi: omega,
            ..Default::default()
        }
    }

    #[test]
    fn steady_state_limits() {
        assert!(steady_state(0.0, 1.0).excited_population().abs() < 1e-15);
        assert!((steady_state(1e4, 1.0).excited_population() - 0.5).abs() < 1e-7);
        // (Ω²/4)/(Ω²/2 + γ²) at Ω = 6γ
        let rho = steady_state(6.0, 1.0).excited_population();
        assert!((rho - 9.0 / 19.0).abs() < 1e-14);
    }

    #[test]
    fn flux_matches_population() {
        assert_eq!(input_flux(0.0, 1.0, 1.0), 0.0);
        assert!((input_flux(1e5, 1.0, 0.7) - 0.7).abs() < 1e-9);
        let f = input_flux(6.0, 1.0, 1.0);
        assert!((f - 36.0 / 38.0).abs() < 1e-15);
        assert!((f - 2.0 * steady_state(6.0, 1.0).excited_population()).abs() < 1e-14);
    }

    #[test]
    fn generator_spectrum() {
        let g = BlochGenerator::new(6.0, 1.0);
        assert!(g.uses_spectral_propagator());
        for z in g.eigenvalues() {
            assert!(z.re < 0.0);
        }
        assert!((g.oscillation_frequency() - (36.0f64 - 0.25).sqrt()).abs() < 1e-12);
        // Critical drive Ω = γ_i/2 is defective.
        assert!(!BlochGenerator::new(0.5, 1.0).uses_spectral_propagator());
    }

    #[test]
    fn propagator_paths_agree() {
        let g = BlochGenerator::new(6.0, 1.0);
        for tau in [0.0, 0.3, 2.0, 7.5] {
            let a = g.propagator(tau);
            let b = (g.matrix() * tau).exp();
            assert!((a - b).abs().max() < 1e-12, "tau = {tau}");
        }
    }

    #[test]
    fn g1_limits() {
        let p = params(6.0);
        let tau = [0.0, 50.0];
        let g1 = g1_in(&p, &tau).unwrap();
        assert!((g1.total.values[0] - 1.0).abs() < 1e-14);
        // Long-delay factorization `|⟨σ⁻⟩|²/ρ_ee`.
        let s = steady_state(6.0, 1.0);
        let coh = s.lowering().norm_sqr() / s.excited_population();
        assert!((g1.coherent_fraction - coh).abs() < 1e-15);
        assert!(coh > 0.0);
        assert!((g1.total.values[1] - coh).abs() < 1e-12);
        assert!(g1.incoherent().values[1].abs() < 1e-12);
    }

    #[test]
    fn g2_limits_and_errors() {
        let p = params(6.0);
        let g2 = g2_in(&p, &[0.0, 40.0]).unwrap();
        assert!(g2.values[0].abs() < 1e-12);
        assert!((g2.values[1] - 1.0).abs() < 1e-12);
        assert!(matches!(g2_in(&params(0.0), &[0.0]), Err(Error::NoInputFlux)));
        assert!(matches!(g2_in(&p, &[]), Err(Error::EmptyGrid)));
        assert!(g1_in(&p, &[]).is_err());
    }

    #[test]
    fn g2_near_critical_drive() {
        // Exercises the scaling-and-squaring branch.
        let p = params(0.5);
        let tau = linspace(0.0, 10.0, 41);
        let g2 = g2_in(&p, &tau).unwrap();
        for (t, v) in tau.iter().zip(&g2.values) {
            assert!((v - g2_in_closed_form(0.5, 1.0, *t)).abs() < 1e-9);
        }
    }

    #[test]
    fn spectrum_is_even_and_normalized() {
        let p = params(6.0);
        let w = linspace(-15.0, 15.0, 301);
        let s = incoherent_spectrum(&p, &w).unwrap();
        for i in 0..w.len() {
            let j = w.len() - 1 - i;
            assert!((s.density[i] - s.density[j]).abs() < 1e-10 * s.density[i].max(1e-30));
        }
        // Whole-line integral from a very wide grid.
        let wide = linspace(-4000.0, 4000.0, 400_001);
        let s = incoherent_spectrum(&p, &wide).unwrap();
        let g1 = g1_in(&p, &[0.0]).unwrap();
        let expected = g1.total.flux_scale * (1.0 - g1.coherent_fraction);
        // Lorentzian tails beyond ±4000 carry a few 1e−4 of the weight.
        assert!((s.integral / expected - 1.0).abs() < 1e-3);
    }
}
