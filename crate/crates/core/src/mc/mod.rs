//! Wigner-picture Monte Carlo of the teleporter chain.
//!
//! Each trajectory owns a ChaCha8 stream selected by `(seed, index)`, so the
//! ensemble is reproducible and independent of how trajectories are spread
//! over threads. Per-trajectory summaries are folded in index order.

mod chain;
mod estimator;

use std::f64::consts::PI;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

pub use chain::{dt_max, AliceResponse, Chain, ChainState, InputSource, NoiseDraws, Routing, Taps};
pub use estimator::{
    welch_omega, EstimatorSet, LagCovariance, LagGrid, Moments, Tap, TrajectoryEstimate, Welch,
};

use crate::error::{Error, Result};
use crate::params::TeleporterParams;
use crate::series::Spectrum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelchConfig {
    /// Requested spacing of the block-averaged samples; rounded to a whole
    /// number of steps.
    pub sample_dt: f64,
    /// Samples per segment (even).
    pub segment: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagConfig {
    /// Requested lag spacing; rounded to a whole number of steps.
    pub lag_dt: f64,
    pub n_lags: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    /// Averaging time per trajectory after the warm-up.
    pub duration: f64,
    /// Discarded settling time; defaults to `20 / (slowest rate)`.
    pub warmup: Option<f64>,
    /// Defaults to [`dt_max`].
    pub dt: Option<f64>,
    pub n_traj: usize,
    pub seed: u64,
    pub alice: AliceResponse,
    pub routing: Routing,
    pub input: InputSource,
    pub welch: Option<WelchConfig>,
    pub lags: Option<LagConfig>,
    /// Wall-clock cap on the whole ensemble.
    pub budget: Option<Duration>,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            duration: 1000.0,
            warmup: None,
            dt: None,
            n_traj: 16,
            seed: 0,
            alice: AliceResponse::Lowpass,
            routing: Routing::Teleporter,
            input: InputSource::Vacuum,
            welch: None,
            lags: None,
            budget: None,
        }
    }
}

/// Slowest relaxation rate present in the chain.
pub fn slowest_rate(params: &TeleporterParams, cfg: &McConfig) -> f64 {
    let mut rate = params.gamma_b;
    if cfg.routing == Routing::Teleporter {
        rate = rate.min(params.gamma_minus());
        if cfg.alice == AliceResponse::Lowpass {
            rate = rate.min(params.gamma_a);
        }
    }
    if matches!(cfg.input, InputSource::Chaotic { .. }) {
        rate = rate.min(params.gamma_i);
    }
    rate
}

/// Step counts and strides resolved from a configuration.
#[derive(Debug, Clone, Copy)]
struct Plan {
    warm_steps: u64,
    steps: u64,
    block: u64,
    lag_stride: u64,
}

fn resolve(params: &TeleporterParams, cfg: &McConfig) -> Result<(Chain, Plan)> {
    let params = params.validated()?;
    if cfg.n_traj == 0 {
        return Err(Error::NoTrajectories);
    }
    let dt = cfg.dt.unwrap_or_else(|| dt_max(&params, cfg.alice, cfg.routing, cfg.input));
    let chain = Chain::new(&params, dt, cfg.alice, cfg.routing, cfg.input)?;
    let warmup = cfg.warmup.unwrap_or(20.0 / slowest_rate(&params, cfg));
    if !(cfg.duration >= warmup) {
        return Err(Error::InsufficientDuration {
            duration: cfg.duration,
            required: warmup,
            what: "warm-up",
        });
    }
    let steps = (cfg.duration / dt).round() as u64;
    let mut block = 1;
    if let Some(w) = cfg.welch {
        block = ((w.sample_dt / dt).round() as u64).max(1);
        let span = (w.segment as u64 * block) as f64 * dt;
        if span > cfg.duration {
            return Err(Error::InsufficientDuration {
                duration: cfg.duration,
                required: span,
                what: "one Welch segment",
            });
        }
    }
    let mut lag_stride = 1;
    if let Some(l) = cfg.lags {
        if l.n_lags == 0 {
            return Err(Error::InvalidParam {
                name: "n_lags",
                reason: "must be at least 1".into(),
            });
        }
        lag_stride = ((l.lag_dt / dt).round() as u64).max(1);
        let span = (l.n_lags as u64 * lag_stride) as f64 * dt;
        if span > cfg.duration {
            return Err(Error::InsufficientDuration {
                duration: cfg.duration,
                required: span,
                what: "the lag window",
            });
        }
    }
    Ok((
        chain,
        Plan {
            warm_steps: (warmup / dt).round() as u64,
            steps,
            block,
            lag_stride,
        },
    ))
}

fn empty_set(chain: &Chain, plan: &Plan, cfg: &McConfig) -> EstimatorSet {
    let omega = cfg
        .welch
        .map(|w| welch_omega(w.segment, plan.block as f64 * chain.dt()))
        .unwrap_or_default();
    let lags = cfg.lags.map(|l| LagGrid {
        tau: (0..l.n_lags)
            .map(|k| (k as u64 * plan.lag_stride) as f64 * chain.dt())
            .collect(),
        gamma_b: chain.gamma_b(),
    });
    EstimatorSet::empty(chain.gamma_b(), omega, lags)
}

/// Random stream of trajectory `index` under `seed`.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

struct Guard<'a> {
    start: Instant,
    budget: Option<Duration>,
    abort: &'a AtomicBool,
}

impl Guard<'_> {
    fn check(&self) -> Result<()> {
        if self.abort.load(Ordering::Relaxed) {
            return Err(Error::BudgetExceeded(self.start.elapsed().as_secs_f64()));
        }
        if let Some(b) = self.budget {
            if self.start.elapsed() > b {
                self.abort.store(true, Ordering::Relaxed);
                return Err(Error::BudgetExceeded(self.start.elapsed().as_secs_f64()));
            }
        }
        Ok(())
    }
}

const CHECK_EVERY: u64 = 1 << 16;

fn run_trajectory(
    chain: &Chain,
    plan: &Plan,
    cfg: &McConfig,
    index: u64,
    guard: &Guard,
) -> Result<TrajectoryEstimate> {
    let mut rng = trajectory_rng(cfg.seed, index);
    let mut z = [0.0; NoiseDraws::LEN];
    let mut draw = |rng: &mut ChaCha8Rng| {
        for v in z.iter_mut() {
            *v = StandardNormal.sample(rng);
        }
        NoiseDraws::from_slice(&z)
    };
    let mut s = chain.initial_state();
    for i in 0..plan.warm_steps {
        if i % CHECK_EVERY == 0 {
            guard.check()?;
        }
        s = chain.step(&s, &draw(&mut rng)).0;
    }

    let mut welch = cfg
        .welch
        .map(|w| Welch::new(w.segment, plan.block as f64 * chain.dt()))
        .transpose()?;
    let mut lags = cfg.lags.map(|l| LagCovariance::new(l.n_lags));
    let mut block = [num_complex::Complex64::default(); 3];
    let inv_block = 1.0 / plan.block as f64;
    let mut occ = 0.0;
    for i in 0..plan.steps {
        if i % CHECK_EVERY == 0 {
            guard.check()?;
        }
        let (next, taps) = chain.step(&s, &draw(&mut rng));
        occ += next.bob_d.norm_sqr();
        if let Some(w) = welch.as_mut() {
            block[0] += taps.x_sq;
            block[1] += taps.y_sq;
            block[2] += taps.e_out;
            if (i + 1) % plan.block == 0 {
                let [x, y, e] = block.map(|v| v * inv_block);
                let re = |v: f64| num_complex::Complex64::new(v, 0.0);
                w.push([re(x.re), re(x.im), re(y.re), re(y.im), e]);
                block = [num_complex::Complex64::default(); 3];
            }
        }
        if let Some(l) = lags.as_mut() {
            if i % plan.lag_stride == 0 {
                l.push(next.bob_d);
            }
        }
        s = next;
    }
    Ok(TrajectoryEstimate {
        occupation: occ / plan.steps as f64 - 0.5,
        psd: welch.and_then(|w| w.densities()),
        lag_cov: lags.and_then(|l| l.covariances()),
    })
}

/// Runs trajectories `range` of the ensemble described by `cfg` and folds
/// them in index order.
pub fn run_range(
    params: &TeleporterParams,
    cfg: &McConfig,
    range: std::ops::Range<u64>,
) -> Result<EstimatorSet> {
    let (chain, plan) = resolve(params, cfg)?;
    let abort = AtomicBool::new(false);
    let guard = Guard {
        start: Instant::now(),
        budget: cfg.budget,
        abort: &abort,
    };
    let results: Vec<TrajectoryEstimate> = range
        .into_par_iter()
        .map(|i| run_trajectory(&chain, &plan, cfg, i, &guard))
        .collect::<Result<_>>()?;
    let mut set = empty_set(&chain, &plan, cfg);
    for r in &results {
        set.add(r);
    }
    Ok(set)
}

/// Runs the full ensemble of `cfg.n_traj` trajectories.
pub fn run_ensemble(params: &TeleporterParams, cfg: &McConfig) -> Result<EstimatorSet> {
    run_range(params, cfg, 0..cfg.n_traj as u64)
}

/// Monte Carlo background spectrum with its standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEstimate {
    /// Normally ordered background per unit `dω`; noisy estimates may dip
    /// below zero.
    pub spectrum: Spectrum,
    pub se: Vec<f64>,
    pub estimators: EstimatorSet,
}

/// Output background spectrum (symmetric density minus the vacuum floor),
/// interpolated from the Welch bins onto `omega`.
pub fn background_spectrum_mc(
    params: &TeleporterParams,
    omega: &[f64],
    cfg: &McConfig,
) -> Result<SpectrumEstimate> {
    if omega.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if cfg.input != InputSource::Vacuum {
        return Err(Error::InvalidParam {
            name: "input",
            reason: "the background spectrum needs a vacuum input".into(),
        });
    }
    if cfg.welch.is_none() {
        return Err(Error::InvalidParam {
            name: "welch",
            reason: "the background spectrum needs Welch settings".into(),
        });
    }
    let set = run_ensemble(params, cfg)?;
    let bins = &set.omega;
    let (lo, hi) = (bins[0], bins[bins.len() - 1]);
    if let Some(w) = omega.iter().find(|w| !(lo..=hi).contains(*w)) {
        return Err(Error::InvalidParam {
            name: "omega",
            reason: format!("{w} lies outside the Welch band [{lo}, {hi}]"),
        });
    }
    let out = set.psd_of(Tap::Output).expect("welch enabled");
    let step = bins[1] - bins[0];
    let (mut density, mut se) = (Vec::with_capacity(omega.len()), Vec::with_capacity(omega.len()));
    for &w in omega {
        let x = ((w - lo) / step).clamp(0.0, (bins.len() - 1) as f64);
        let k = (x.floor() as usize).min(bins.len() - 2);
        let f = x - k as f64;
        let mean = (1.0 - f) * out[k].mean() + f * out[k + 1].mean();
        let err = ((1.0 - f) * out[k].se()).hypot(f * out[k + 1].se());
        density.push((mean - 0.5) / (2.0 * PI));
        se.push(err / (2.0 * PI));
    }
    Ok(SpectrumEstimate {
        spectrum: Spectrum::new(omega.to_vec(), density),
        se,
        estimators: set,
    })
}
