//! Half-range Fourier transforms of sampled time series.

use faer::c64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::linalg::I;
use crate::propagator::TimeGrid;

/// Tail magnitude, relative to the series peak, that triggers a truncation warning.
pub const TAIL_WARNING: f64 = 1e-3;
/// Damping target `e^{−η t_max}` used when a lineshape needs a default window.
pub const DEFAULT_WINDOW_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub omega: Vec<f64>,
    pub values: Vec<c64>,
    pub eta: f64,
    /// Relative tail magnitude if the undamped series had not decayed.
    pub tail_warning: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lineshape {
    pub omega: Vec<f64>,
    pub intensity: Vec<f64>,
    pub eta: f64,
    pub tail_warning: Option<f64>,
}

impl Lineshape {
    /// Frequency of the largest intensity (first one on ties).
    pub fn peak(&self) -> Option<f64> {
        argmax(&self.intensity).map(|i| self.omega[i])
    }

    pub fn normalized(mut self) -> Self {
        let top = self
            .intensity
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        if top.is_finite() && top != 0.0 {
            for v in &mut self.intensity {
                *v /= top;
            }
        }
        self
    }
}

pub fn argmax(xs: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &x) in xs.iter().enumerate() {
        if best.is_none_or(|b| x > xs[b]) {
            best = Some(i);
        }
    }
    best
}

/// `points` evenly spaced values over `[lo, hi]`.
pub fn omega_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || !(hi > lo) {
        return Err(invalid(format!(
            "bad omega range [{lo}, {hi}] with {points} points"
        )));
    }
    let step = (hi - lo) / (points - 1) as f64;
    Ok((0..points).map(|i| lo + i as f64 * step).collect())
}

pub fn tail_magnitude(series: &[c64]) -> f64 {
    let peak = series.iter().map(|v| v.norm()).fold(0.0, f64::max);
    match series.last() {
        Some(last) if peak > 0.0 => last.norm() / peak,
        _ => 0.0,
    }
}

/// `∫₀^{t_max} f(t) e^{−ηt} e^{iωt} dt` by the trapezoid rule.
pub fn half_fourier(series: &[c64], grid: TimeGrid, omega: &[f64], eta: f64) -> Result<Spectrum> {
    if series.len() != grid.len() {
        return Err(Error::GridMismatch {
            kernel: series.len(),
            grid: grid.len(),
        });
    }
    if !(eta >= 0.0) {
        return Err(invalid(format!("damping must be non-negative, got {eta}")));
    }
    if omega.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("omega grid must be strictly increasing"));
    }
    let tail = tail_magnitude(series);
    let tail_warning = (eta == 0.0 && tail > TAIL_WARNING).then_some(tail);
    if let Some(t) = tail_warning {
        log::warn!("series has not decayed at t_max (tail {t:.3e}); transform is truncated");
    }
    let h = grid.dt();
    let last = series.len() - 1;
    let damped: Vec<c64> = series
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let w = if k == 0 || k == last { 0.5 } else { 1.0 };
            v * (w * h * (-eta * grid.time(k)).exp())
        })
        .collect();
    let values = omega
        .iter()
        .map(|&w| {
            let rot = (I * (w * h)).exp();
            let mut phase = c64::new(1.0, 0.0);
            let mut acc = c64::new(0.0, 0.0);
            for (k, &v) in damped.iter().enumerate() {
                if k % 64 == 0 {
                    phase = (I * (w * grid.time(k))).exp();
                }
                acc += v * phase;
                phase *= rot;
            }
            acc
        })
        .collect();
    Ok(Spectrum {
        omega: omega.to_vec(),
        values,
        eta,
        tail_warning,
    })
}

/// `I(ω) = ℜ ∫₀^{t_max} C(t) e^{−ηt} e^{iωt} dt`, unnormalized.
///
/// Without an explicit `eta`, the series is damped to `1e-6` at `t_max` if
/// its tail would otherwise trigger the truncation warning.
pub fn lineshape(c: &[c64], grid: TimeGrid, omega: &[f64], eta: Option<f64>) -> Result<Lineshape> {
    let eta = eta.unwrap_or_else(|| {
        if tail_magnitude(c) > TAIL_WARNING {
            -DEFAULT_WINDOW_FLOOR.ln() / grid.t_max
        } else {
            0.0
        }
    });
    let s = half_fourier(c, grid, omega, eta)?;
    Ok(Lineshape {
        omega: s.omega,
        intensity: s.values.iter().map(|v| v.re).collect(),
        eta: s.eta,
        tail_warning: s.tail_warning,
    })
}
