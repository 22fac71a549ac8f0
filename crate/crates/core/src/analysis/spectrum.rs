use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use std::f64::consts::TAU;

use super::fit::DecayFit;
use crate::error::{Error, Result};

/// Minimum ratio of a peak to the median spectral density above the
/// frequency cut for it to count as detected.
pub const PEAK_PROMINENCE: f64 = 20.0;

/// Minimum oscillation amplitude, relative to the fitted amplitude, for a
/// peak to count as detected. Rejects peaks made of rounding noise.
pub const PEAK_RELATIVE_AMPLITUDE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralPeak {
    /// Angular frequency in Γ0.
    pub frequency: f64,
    /// Peak density over the median density above the frequency cut.
    pub prominence: f64,
    /// Amplitude of a sinusoid that would produce this peak.
    pub amplitude: f64,
}

/// One-sided Hann-windowed periodogram of fit residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSpectrum {
    /// Angular frequencies in Γ0, spaced 2π/(n·dt).
    pub frequencies: Vec<f64>,
    pub density: Vec<f64>,
    pub peak: Option<SpectralPeak>,
}

/// Periodogram of `fit.residuals` and its strongest peak at or above
/// `min_frequency` (angular, Γ0).
pub fn residual_spectrum(fit: &DecayFit, min_frequency: f64) -> Result<ResidualSpectrum> {
    if !(min_frequency > 0.0 && min_frequency.is_finite()) {
        return Err(Error::invalid("min_frequency", "must be positive"));
    }
    let n = fit.residuals.len();
    if n < 8 {
        return Err(Error::invalid("residuals", "need at least 8 samples"));
    }
    let dt = (fit.residual_times[n - 1] - fit.residual_times[0]) / (n - 1) as f64;
    let span = n as f64 * dt;
    let needed = 4.0 * TAU / min_frequency;
    if span < needed {
        return Err(Error::invalid(
            "min_frequency",
            format!("window {span} is shorter than four periods ({needed})"),
        ));
    }

    let mean = fit.residuals.iter().sum::<f64>() / n as f64;
    let window: Vec<f64> = (0..n).map(|j| 0.5 - 0.5 * (TAU * j as f64 / (n - 1) as f64).cos()).collect();
    let wsum: f64 = window.iter().sum();
    let wsq: f64 = window.iter().map(|w| w * w).sum();
    let mut buf: Vec<C64> = fit.residuals.iter().zip(&window).map(|(r, w)| C64::new((r - mean) * w, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let bins = n / 2 + 1;
    let frequencies: Vec<f64> = (0..bins).map(|k| TAU * k as f64 / span).collect();
    let density: Vec<f64> = (0..bins)
        .map(|k| {
            let one_sided = if k == 0 || 2 * k == n { 1.0 } else { 2.0 };
            one_sided * buf[k].norm_sqr() * dt / wsq
        })
        .collect();

    let candidates: Vec<usize> = (0..bins).filter(|&k| frequencies[k] >= min_frequency).collect();
    let peak = if candidates.len() < 3 {
        None
    } else {
        let mut sorted: Vec<f64> = candidates.iter().map(|&k| density[k]).collect();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let median = sorted[sorted.len() / 2];
        let &k = candidates.iter().max_by(|&&a, &&b| density[a].total_cmp(&density[b])).unwrap();
        let amplitude = 2.0 * buf[k].norm() / wsum;
        let prominence = if median > 0.0 { density[k] / median } else { f64::INFINITY };
        let detected = prominence >= PEAK_PROMINENCE && amplitude >= PEAK_RELATIVE_AMPLITUDE * fit.amplitude.abs();
        detected.then_some(SpectralPeak { frequency: frequencies[k], prominence, amplitude })
    };
    Ok(ResidualSpectrum { frequencies, density, peak })
}
