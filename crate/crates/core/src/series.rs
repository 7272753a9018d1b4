//! Sampled correlation functions and spectra.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationKind {
    G1Total,
    G1Incoherent,
    G2,
    As,
}

impl CorrelationKind {
    pub fn label(self) -> &'static str {
        match self {
            CorrelationKind::G1Total => "g1_total",
            CorrelationKind::G1Incoherent => "g1_incoherent",
            CorrelationKind::G2 => "g2",
            CorrelationKind::As => "A_s",
        }
    }
}

/// A normalized correlation function on a delay grid starting at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSeries {
    pub tau: Vec<f64>,
    pub values: Vec<f64>,
    /// Photon flux that multiplies the normalized values.
    pub flux_scale: f64,
    pub kind: CorrelationKind,
}

impl CorrelationSeries {
    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }
}

/// Checks that a delay grid is nonempty, starts at zero and increases strictly.
pub fn check_delay_grid(tau: &[f64]) -> Result<()> {
    if tau.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if tau[0] != 0.0 || tau.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::BadDelayGrid);
    }
    Ok(())
}

/// Spectral density (photon flux per unit angular frequency) on a grid of
/// frequencies measured from line center.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub omega: Vec<f64>,
    pub density: Vec<f64>,
    /// Trapezoid integral of `density` over `omega`.
    pub integral: f64,
}

impl Spectrum {
    pub fn new(omega: Vec<f64>, density: Vec<f64>) -> Self {
        let integral = trapezoid(&omega, &density);
        Self {
            omega,
            density,
            integral,
        }
    }

    /// Pointwise sum of two spectra sampled on the same grid.
    pub fn add(&self, other: &Spectrum) -> Spectrum {
        assert_eq!(self.omega, other.omega, "spectra on different grids");
        let density = self
            .density
            .iter()
            .zip(&other.density)
            .map(|(a, b)| a + b)
            .collect();
        Spectrum::new(self.omega.clone(), density)
    }
}

pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

/// `n` evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { stop } else { start + step * i as f64 })
                .collect()
        }
    }
}

/// `n` logarithmically spaced points from `start` to `stop` inclusive.
pub fn logspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    linspace(start.log10(), stop.log10(), n)
        .into_iter()
        .map(|e| 10f64.powf(e))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(linspace(0.0, 1.0, 5), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let l = logspace(1e-4, 1e-1, 4);
        for (a, b) in l.iter().zip([1e-4, 1e-3, 1e-2, 1e-1]) {
            assert!((a / b - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn delay_grid_checks() {
        assert!(check_delay_grid(&[]).is_err());
        assert!(check_delay_grid(&[0.1, 0.2]).is_err());
        assert!(check_delay_grid(&[0.0, 0.2, 0.2]).is_err());
        assert!(check_delay_grid(&[0.0, 0.2]).is_ok());
    }

    #[test]
    fn spectrum_integral_is_trapezoid() {
        let s = Spectrum::new(vec![0.0, 1.0, 3.0], vec![1.0, 1.0, 2.0]);
        assert_eq!(s.integral, 1.0 + 3.0);
    }
}
