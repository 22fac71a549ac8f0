use crate::error::{Error, Result};

/// Exponential fit y(t) = amplitude·e^{−rate·(t − window.0)} to a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    /// Decay rate of the power in Γ0.
    pub rate: f64,
    /// One-sigma uncertainty of `rate` from the weighted regression.
    pub rate_stderr: f64,
    /// Fitted trace value at the start of the window.
    pub amplitude: f64,
    /// First and last sample time used.
    pub window: (f64, f64),
    pub rms_residual: f64,
    pub residual_times: Vec<f64>,
    /// Data minus model on the original (linear) scale.
    pub residuals: Vec<f64>,
}

impl DecayFit {
    pub fn model(&self, t: f64) -> f64 {
        self.amplitude * (-self.rate * (t - self.window.0)).exp()
    }
}

/// Fit A·e^{−Γ(t − t₀)} to the samples with `t_start ≤ t ≤ t_end`.
///
/// The fit is linear regression of ln y on t with weights proportional to y,
/// which are the inverse variances of ln y for counting noise.
pub fn fit_decay(times: &[f64], trace: &[f64], t_start: f64, t_end: f64) -> Result<DecayFit> {
    if times.len() != trace.len() {
        return Err(Error::invalid("trace", "times and values differ in length"));
    }
    if !(t_end > t_start) {
        return Err(Error::invalid("window", "end must follow start"));
    }
    let (first, last) = match (times.first(), times.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(Error::invalid("trace", "empty")),
    };
    if t_start < first || t_end > last {
        return Err(Error::invalid(
            "window",
            format!("[{t_start}, {t_end}] is not inside the trace [{first}, {last}]"),
        ));
    }
    let idx: Vec<usize> = (0..times.len()).filter(|&j| times[j] >= t_start && times[j] <= t_end).collect();
    if idx.len() < 3 {
        return Err(Error::Fit(format!("only {} samples in the fit window", idx.len())));
    }
    if let Some(&j) = idx.iter().find(|&&j| !(trace[j] > 0.0)) {
        return Err(Error::Fit(format!("non-positive sample {} at t = {}", trace[j], times[j])));
    }
    let t0 = times[idx[0]];
    let scale = idx.iter().map(|&j| trace[j]).fold(0.0, f64::max);
    let w: Vec<f64> = idx.iter().map(|&j| trace[j] / scale).collect();
    let x: Vec<f64> = idx.iter().map(|&j| times[j] - t0).collect();
    let y: Vec<f64> = idx.iter().map(|&j| trace[j].ln()).collect();

    let sw: f64 = w.iter().sum();
    let xm = w.iter().zip(&x).map(|(w, x)| w * x).sum::<f64>() / sw;
    let ym = w.iter().zip(&y).map(|(w, y)| w * y).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..x.len() {
        sxx += w[i] * (x[i] - xm) * (x[i] - xm);
        sxy += w[i] * (x[i] - xm) * (y[i] - ym);
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let rate = -slope;
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::Fit(format!("trace is not decaying (fitted rate {rate})")));
    }

    let mut chi2 = 0.0;
    for i in 0..x.len() {
        let r = y[i] - (intercept + slope * x[i]);
        chi2 += w[i] * r * r;
    }
    let rate_stderr = (chi2 / (x.len() - 2) as f64 / sxx).sqrt();

    let amplitude = intercept.exp();
    let residual_times: Vec<f64> = idx.iter().map(|&j| times[j]).collect();
    let residuals: Vec<f64> = idx
        .iter()
        .zip(&x)
        .map(|(&j, &xi)| trace[j] - amplitude * (-rate * xi).exp())
        .collect();
    let rms_residual = (residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64).sqrt();
    Ok(DecayFit {
        rate,
        rate_stderr,
        amplitude,
        window: (t0, *residual_times.last().unwrap()),
        rms_residual,
        residual_times,
        residuals,
    })
}

/// Fit the tail of a pulse: the window opens at the first sample at or after
/// `t_off + settle` and is `window_len` long.
pub fn fit_pulse_decay(
    times: &[f64],
    trace: &[f64],
    t_off: f64,
    window_len: f64,
    settle: f64,
) -> Result<DecayFit> {
    if !(window_len > 0.0) || !(settle >= 0.0) {
        return Err(Error::invalid("window_len", "window and settle delay must be positive"));
    }
    let open = t_off + settle;
    let start = times
        .iter()
        .copied()
        .find(|&t| t >= open)
        .ok_or_else(|| Error::invalid("t_off", format!("no samples after {open}")))?;
    fit_decay(times, trace, start, start + window_len)
}
