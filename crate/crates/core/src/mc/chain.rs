//! The teleporter as coupled linear stochastic equations in the Wigner
//! picture, advanced by Euler–Maruyama.
//!
//! Field amplitudes are in units of photon flux. A vacuum white noise `ξ`
//! has symmetric density `1/2` per unit `dω/2π`, `1/4` in each real
//! quadrature; its increment over `dt` is `√(dt/4)(z₁ + i z₂)`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::params::TeleporterParams;

/// Light entering the teleporter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InputSource {
    Vacuum,
    /// Constant amplitude; flux `|α|²`.
    Coherent { amplitude: C64 },
    /// Vacuum plus a complex Ornstein–Uhlenbeck amplitude of bandwidth
    /// `γ_i` carrying the given mean flux.
    Chaotic { flux: f64 },
}

/// Alice's photocurrent: low-pass of width `γ_A`, or the broadband limit
/// in which the record follows `dQ/dt` instantly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AliceResponse {
    Lowpass,
    Broadband,
}

/// `Bypass` feeds the input straight into Bob's filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Routing {
    Teleporter,
    Bypass,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChainState {
    /// Squeezer whose output `X` quadrature is squeezed.
    pub opo_a: C64,
    /// Squeezer whose output `Y` quadrature is squeezed.
    pub opo_b: C64,
    pub alice_i: C64,
    pub bob_d: C64,
    /// Classical part of the input amplitude.
    pub input_amp: C64,
}

/// Standard normal draws for one step, in pairs (real, imaginary).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseDraws {
    pub opo_a: [f64; 2],
    pub opo_b: [f64; 2],
    pub input: [f64; 2],
    pub out: [f64; 2],
    pub source: [f64; 2],
}

impl NoiseDraws {
    pub const LEN: usize = 10;

    pub fn from_slice(z: &[f64; Self::LEN]) -> Self {
        Self {
            opo_a: [z[0], z[1]],
            opo_b: [z[2], z[3]],
            input: [z[4], z[5]],
            out: [z[6], z[7]],
            source: [z[8], z[9]],
        }
    }
}

/// Traveling fields over one step, as increments divided by `dt`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Taps {
    pub x_sq: C64,
    pub y_sq: C64,
    pub e_out: C64,
}

/// Step-size bound `0.01 / (largest rate)`. A bypassed teleporter leaves
/// the squeezers and Alice idle.
pub fn dt_max(
    params: &TeleporterParams,
    alice: AliceResponse,
    routing: Routing,
    input: InputSource,
) -> f64 {
    let mut rate = params.gamma_b;
    if routing == Routing::Teleporter {
        rate = rate.max(params.gamma_plus());
        if alice == AliceResponse::Lowpass {
            rate = rate.max(params.gamma_a);
        }
    }
    if matches!(input, InputSource::Chaotic { .. }) {
        rate = rate.max(params.gamma_i);
    }
    0.01 / rate
}

/// Precomputed coefficients of the update.
#[derive(Debug, Clone, Copy)]
pub struct Chain {
    dt: f64,
    noise: f64,
    gamma_plus: f64,
    gamma_minus: f64,
    sqrt_2gs: f64,
    gamma_a: f64,
    gamma_b: f64,
    sqrt_gb: f64,
    gamma_i: f64,
    source_gain: f64,
    alice: AliceResponse,
    routing: Routing,
    input: InputSource,
}

impl Chain {
    pub fn new(
        params: &TeleporterParams,
        dt: f64,
        alice: AliceResponse,
        routing: Routing,
        input: InputSource,
    ) -> Result<Self> {
        let limit = dt_max(params, alice, routing, input);
        if !(dt > 0.0 && dt <= limit * (1.0 + 1e-12)) {
            return Err(Error::UnstableStep { dt, dt_max: limit });
        }
        let source_gain = match input {
            InputSource::Chaotic { flux } if !(flux >= 0.0) => {
                return Err(Error::InvalidParam {
                    name: "input_flux",
                    reason: format!("{flux} is negative"),
                })
            }
            InputSource::Chaotic { flux } => (2.0 * params.gamma_i * flux * dt / 2.0).sqrt(),
            _ => 0.0,
        };
        Ok(Self {
            dt,
            noise: (dt / 4.0).sqrt(),
            gamma_plus: params.gamma_plus(),
            gamma_minus: params.gamma_minus(),
            sqrt_2gs: (2.0 * params.gamma_s).sqrt(),
            gamma_a: params.gamma_a,
            gamma_b: params.gamma_b,
            sqrt_gb: params.gamma_b.sqrt(),
            gamma_i: params.gamma_i,
            source_gain,
            alice,
            routing,
            input,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn gamma_b(&self) -> f64 {
        self.gamma_b
    }

    /// State to start a trajectory from: vacuum with the classical input in
    /// its stationary mean.
    pub fn initial_state(&self) -> ChainState {
        ChainState {
            input_amp: match self.input {
                InputSource::Coherent { amplitude } => amplitude,
                _ => C64::new(0.0, 0.0),
            },
            ..Default::default()
        }
    }

    fn vacuum(&self, z: [f64; 2]) -> C64 {
        C64::new(self.noise * z[0], self.noise * z[1])
    }

    fn advance_input(&self, s: &ChainState, z: &NoiseDraws) -> C64 {
        match self.input {
            InputSource::Chaotic { .. } => {
                s.input_amp - self.gamma_i * s.input_amp * self.dt
                    + C64::new(z.source[0], z.source[1]) * self.source_gain
            }
            _ => s.input_amp,
        }
    }

    /// One Euler–Maruyama step; drifts use the state at the start of the step.
    pub fn step(&self, s: &ChainState, z: &NoiseDraws) -> (ChainState, Taps) {
        let dt = self.dt;
        let xi_a = self.vacuum(z.opo_a);
        let xi_b = self.vacuum(z.opo_b);
        let xi_in = self.vacuum(z.input);
        let xi_out = self.vacuum(z.out);

        if self.routing == Routing::Bypass {
            let input_amp = self.advance_input(s, z);
            let e_in = s.input_amp * dt + xi_in;
            let e_out = self.sqrt_gb * s.bob_d * dt - xi_out;
            let bob_d = s.bob_d - self.gamma_b * s.bob_d * dt + self.sqrt_gb * (e_in + xi_out);
            let next = ChainState { bob_d, input_amp, ..*s };
            let taps = Taps { e_out: e_out / dt, ..Default::default() };
            return (next, taps);
        }
        let x_sq = self.sqrt_2gs * s.opo_a * dt - xi_a;
        let y_sq = self.sqrt_2gs * s.opo_b * dt - xi_b;
        let opo_a = s.opo_a
            + C64::new(-self.gamma_plus * s.opo_a.re, -self.gamma_minus * s.opo_a.im) * dt
            + self.sqrt_2gs * xi_a;
        let opo_b = s.opo_b
            + C64::new(-self.gamma_minus * s.opo_b.re, -self.gamma_plus * s.opo_b.im) * dt
            + self.sqrt_2gs * xi_b;

        let input_amp = self.advance_input(s, z);
        let e_in = s.input_amp * dt + xi_in;

        let dq = e_in * std::f64::consts::FRAC_1_SQRT_2 + (x_sq + y_sq).conj() * 0.5;
        let (alice_i, record) = match self.alice {
            AliceResponse::Broadband => (s.alice_i, dq),
            AliceResponse::Lowpass => (s.alice_i + (dq - s.alice_i * dt) * self.gamma_a, s.alice_i * dt),
        };
        let e_bob =
            (x_sq - y_sq) * std::f64::consts::FRAC_1_SQRT_2 + record * std::f64::consts::SQRT_2;

        let e_out = self.sqrt_gb * s.bob_d * dt - xi_out;
        let bob_d = s.bob_d - self.gamma_b * s.bob_d * dt + self.sqrt_gb * (e_bob + xi_out);

        let next = ChainState {
            opo_a,
            opo_b,
            alice_i,
            bob_d,
            input_amp,
        };
        let inv = 1.0 / dt;
        (
            next,
            Taps {
                x_sq: x_sq * inv,
                y_sq: y_sq * inv,
                e_out: e_out * inv,
            },
        )
    }
}
