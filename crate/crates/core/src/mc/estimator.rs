//! Streaming estimators: Welch periodograms, lag covariances and moments
//! over trajectories.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Count, sum and sum of squares of per-trajectory values.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Moments {
    pub n: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, other: &Moments) {
        self.n += other.n;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }

    /// Sample variance of the per-trajectory values.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return f64::NAN;
        }
        let n = self.n as f64;
        ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }

    /// Standard error of the mean.
    pub fn se(&self) -> f64 {
        (self.variance() / self.n as f64).sqrt()
    }
}

/// Tapped real quadratures and the complex output field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tap {
    OpoAX,
    OpoAY,
    OpoBX,
    OpoBY,
    Output,
}

impl Tap {
    pub const ALL: [Tap; 5] = [Tap::OpoAX, Tap::OpoAY, Tap::OpoBX, Tap::OpoBY, Tap::Output];

    pub fn label(self) -> &'static str {
        match self {
            Tap::OpoAX => "opo_a_x",
            Tap::OpoAY => "opo_a_y",
            Tap::OpoBX => "opo_b_x",
            Tap::OpoBY => "opo_b_y",
            Tap::Output => "output",
        }
    }

    /// Vacuum level of the tap's symmetric density per unit `dω/2π`.
    pub fn vacuum_level(self) -> f64 {
        match self {
            Tap::Output => 0.5,
            _ => 0.25,
        }
    }
}

/// Welch estimator of symmetric densities per unit `dω/2π` with a periodic
/// Hann window and 50% overlap.
pub struct Welch {
    segment: usize,
    sample_dt: f64,
    window: Vec<f64>,
    norm: f64,
    fft: Arc<dyn Fft<f64>>,
    buffers: Vec<Vec<C64>>,
    scratch: Vec<C64>,
    pub(crate) sums: Vec<Vec<f64>>,
    pub(crate) segments: u64,
}

impl Welch {
    pub fn new(segment: usize, sample_dt: f64) -> Result<Self> {
        if segment < 4 || segment % 2 != 0 {
            return Err(Error::InvalidParam {
                name: "welch_segment",
                reason: format!("{segment} must be even and at least 4"),
            });
        }
        let window: Vec<f64> = (0..segment)
            .map(|n| {
                let s = (PI * n as f64 / segment as f64).sin();
                s * s
            })
            .collect();
        let norm = sample_dt / window.iter().map(|w| w * w).sum::<f64>();
        let fft = FftPlanner::new().plan_fft_forward(segment);
        Ok(Self {
            segment,
            sample_dt,
            window,
            norm,
            scratch: vec![C64::default(); fft.get_inplace_scratch_len()],
            fft,
            buffers: vec![Vec::with_capacity(segment); Tap::ALL.len()],
            sums: vec![vec![0.0; segment]; Tap::ALL.len()],
            segments: 0,
        })
    }

    /// Angular frequencies of the bins in ascending order.
    pub fn omega(&self) -> Vec<f64> {
        welch_omega(self.segment, self.sample_dt)
    }

    pub fn push(&mut self, samples: [C64; 5]) {
        for (buf, s) in self.buffers.iter_mut().zip(samples) {
            buf.push(s);
        }
        if self.buffers[0].len() == self.segment {
            self.process();
        }
    }

    fn process(&mut self) {
        let half = self.segment / 2;
        let mut work = vec![C64::default(); self.segment];
        for (buf, sum) in self.buffers.iter_mut().zip(&mut self.sums) {
            for ((w, x), win) in work.iter_mut().zip(buf.iter()).zip(&self.window) {
                *w = x * win;
            }
            self.fft.process_with_scratch(&mut work, &mut self.scratch);
            for (k, v) in work.iter().enumerate() {
                // Shift so that index 0 is the most negative frequency.
                sum[(k + half) % self.segment] += self.norm * v.norm_sqr();
            }
            buf.drain(..half);
        }
        self.segments += 1;
    }

    /// Averaged density per tap, or `None` before the first full segment.
    pub fn densities(&self) -> Option<Vec<Vec<f64>>> {
        if self.segments == 0 {
            return None;
        }
        let n = self.segments as f64;
        Some(
            self.sums
                .iter()
                .map(|s| s.iter().map(|v| v / n).collect())
                .collect(),
        )
    }
}

pub fn welch_omega(segment: usize, sample_dt: f64) -> Vec<f64> {
    let half = segment as i64 / 2;
    let step = 2.0 * PI / (segment as f64 * sample_dt);
    (-half..half).map(|k| k as f64 * step).collect()
}

/// Direct-product covariances `Re⟨d*(t) d(t + kΔ)⟩` on a decimated grid.
pub struct LagCovariance {
    history: Vec<C64>,
    head: usize,
    filled: usize,
    sums: Vec<f64>,
    count: u64,
}

impl LagCovariance {
    pub fn new(n_lags: usize) -> Self {
        Self {
            history: vec![C64::default(); n_lags],
            head: 0,
            filled: 0,
            sums: vec![0.0; n_lags],
            count: 0,
        }
    }

    pub fn push(&mut self, d: C64) {
        let n = self.history.len();
        self.history[self.head] = d;
        self.filled = (self.filled + 1).min(n);
        if self.filled == n {
            for k in 0..n {
                let past = self.history[(self.head + n - k) % n];
                self.sums[k] += (past.conj() * d).re;
            }
            self.count += 1;
        }
        self.head = (self.head + 1) % n;
    }

    pub fn covariances(&self) -> Option<Vec<f64>> {
        (self.count > 0).then(|| self.sums.iter().map(|s| s / self.count as f64).collect())
    }
}

/// Summary of one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEstimate {
    pub occupation: f64,
    pub psd: Option<Vec<Vec<f64>>>,
    pub lag_cov: Option<Vec<f64>>,
}

/// Lag-grid description shared by every trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct LagGrid {
    pub tau: Vec<f64>,
    pub gamma_b: f64,
}

/// Mergeable ensemble statistics. All per-bin and per-lag entries are moments
/// of per-trajectory values, so standard errors come from the spread across
/// trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorSet {
    pub gamma_b: f64,
    /// Mean filter occupation `⟨|d|²⟩_sym − 1/2`.
    pub occupation: Moments,
    /// `γ_B · occupation`.
    pub flux: Moments,
    pub omega: Vec<f64>,
    /// Per tap, densities in vacuum units for the quadratures and per unit
    /// `dω/2π` for the output.
    pub psd: Vec<Vec<Moments>>,
    /// Line-center density of the two squeezed and the two antisqueezed
    /// quadratures, averaged per trajectory, in vacuum units.
    pub squeezed_zero: Moments,
    pub antisqueezed_zero: Moments,
    pub tau: Vec<f64>,
    pub lag_sym: Vec<Moments>,
    /// Normally ordered output correlation `γ_B (C_d(τ) − e^{−γ_Bτ}/2)`.
    pub background_corr: Vec<Moments>,
    /// Its per-trajectory normalization by the zero-lag value.
    pub normalized_corr: Vec<Moments>,
}

impl EstimatorSet {
    pub fn empty(gamma_b: f64, omega: Vec<f64>, lags: Option<LagGrid>) -> Self {
        let n_bins = omega.len();
        let tau = lags.map(|l| l.tau).unwrap_or_default();
        let n_lags = tau.len();
        let taps = if n_bins == 0 { 0 } else { Tap::ALL.len() };
        Self {
            gamma_b,
            occupation: Moments::default(),
            flux: Moments::default(),
            omega,
            psd: vec![vec![Moments::default(); n_bins]; taps],
            squeezed_zero: Moments::default(),
            antisqueezed_zero: Moments::default(),
            tau,
            lag_sym: vec![Moments::default(); n_lags],
            background_corr: vec![Moments::default(); n_lags],
            normalized_corr: vec![Moments::default(); n_lags],
        }
    }

    pub fn n_traj(&self) -> u64 {
        self.occupation.n
    }

    /// Index of the zero-frequency bin.
    pub fn zero_bin(&self) -> Option<usize> {
        (!self.omega.is_empty()).then_some(self.omega.len() / 2)
    }

    pub fn add(&mut self, t: &TrajectoryEstimate) {
        self.occupation.push(t.occupation);
        self.flux.push(self.gamma_b * t.occupation);
        if let (Some(psd), Some(zero)) = (&t.psd, self.zero_bin()) {
            for ((tap, acc), dens) in Tap::ALL.iter().zip(&mut self.psd).zip(psd) {
                let scale = if *tap == Tap::Output { 1.0 } else { 1.0 / tap.vacuum_level() };
                for (m, v) in acc.iter_mut().zip(dens) {
                    m.push(v * scale);
                }
            }
            let vac = Tap::OpoAX.vacuum_level();
            self.squeezed_zero
                .push(0.5 * (psd[0][zero] + psd[3][zero]) / vac);
            self.antisqueezed_zero
                .push(0.5 * (psd[1][zero] + psd[2][zero]) / vac);
        }
        if let Some(c) = &t.lag_cov {
            let bg: Vec<f64> = c
                .iter()
                .zip(&self.tau)
                .map(|(c, tau)| self.gamma_b * (c - 0.5 * (-self.gamma_b * tau).exp()))
                .collect();
            for (k, (&ck, &gk)) in c.iter().zip(&bg).enumerate() {
                self.lag_sym[k].push(ck);
                self.background_corr[k].push(gk);
                self.normalized_corr[k].push(gk / bg[0]);
            }
        }
    }

    pub fn merge(&mut self, other: &EstimatorSet) -> Result<()> {
        if self.omega != other.omega || self.tau != other.tau || self.gamma_b != other.gamma_b {
            return Err(Error::IncompatibleEstimators);
        }
        self.occupation.merge(&other.occupation);
        self.flux.merge(&other.flux);
        for (a, b) in self.psd.iter_mut().zip(&other.psd) {
            for (x, y) in a.iter_mut().zip(b) {
                x.merge(y);
            }
        }
        self.squeezed_zero.merge(&other.squeezed_zero);
        self.antisqueezed_zero.merge(&other.antisqueezed_zero);
        for (a, b) in [
            (&mut self.lag_sym, &other.lag_sym),
            (&mut self.background_corr, &other.background_corr),
            (&mut self.normalized_corr, &other.normalized_corr),
        ] {
            for (x, y) in a.iter_mut().zip(b) {
                x.merge(y);
            }
        }
        Ok(())
    }

    pub fn psd_of(&self, tap: Tap) -> Option<&[Moments]> {
        let i = Tap::ALL.iter().position(|t| *t == tap)?;
        self.psd.get(i).map(|v| v.as_slice())
    }
}
