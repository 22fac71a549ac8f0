//! Disorder configurations and reproducible averaging over them.
//!
//! Configuration `index` of a model is drawn from its own ChaCha stream keyed
//! by `(seed, index)`, atoms consuming the stream in order. Any configuration
//! can therefore be regenerated on its own, on any worker, in any order.
//!
//! Averages are accumulated over a fixed binary tree of index ranges
//! (split at the midpoint down to [`LEAF_CONFIGS`] configurations, leaves
//! summed in index order), so the mean and standard error are bitwise
//! identical for every thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::physmodel::{check_beta, EnsembleSpec};

/// Largest index range accumulated sequentially.
pub const LEAF_CONFIGS: u64 = 8;

/// Smallest β a fluctuating coupling is clipped to.
const BETA_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum PhaseLaw {
    /// θ_n i.i.d. uniform on [0, 2π): atoms at random positions.
    Uniform,
    /// Every θ_n equal to the given value: atoms at the Bragg condition.
    Bragg { theta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisorderModel {
    pub n_atoms: usize,
    pub beta_mean: f64,
    /// Relative standard deviation of β; zero keeps every atom at `beta_mean`.
    pub beta_spread: f64,
    pub phase_law: PhaseLaw,
    pub seed: u64,
}

impl DisorderModel {
    pub fn random_positions(n_atoms: usize, beta: f64, seed: u64) -> Self {
        DisorderModel { n_atoms, beta_mean: beta, beta_spread: 0.0, phase_law: PhaseLaw::Uniform, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_atoms == 0 {
            return Err(Error::invalid("n_atoms", "must be positive"));
        }
        check_beta(self.beta_mean)?;
        if !(self.beta_spread.is_finite() && self.beta_spread >= 0.0) {
            return Err(Error::invalid("beta_spread", "must be non-negative"));
        }
        if let PhaseLaw::Bragg { theta } = self.phase_law {
            if !theta.is_finite() {
                return Err(Error::invalid("phase_law", "Bragg phase must be finite"));
            }
        }
        Ok(())
    }
}

/// The `index`-th disorder configuration of `model`.
pub fn sample_configuration(model: &DisorderModel, index: u64) -> Result<EnsembleSpec> {
    model.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    rng.set_stream(index);
    let mut beta = Vec::with_capacity(model.n_atoms);
    let mut phase = Vec::with_capacity(model.n_atoms);
    for _ in 0..model.n_atoms {
        // both draws are always made so the stream layout does not depend on the law
        let u: f64 = rng.gen();
        let z: f64 = rng.sample(StandardNormal);
        phase.push(match model.phase_law {
            PhaseLaw::Uniform => (u * TAU).min(TAU.next_down()),
            PhaseLaw::Bragg { theta } => theta.rem_euclid(TAU),
        });
        let b = model.beta_mean * (1.0 + model.beta_spread * z);
        beta.push(b.clamp(BETA_FLOOR, 0.5));
    }
    EnsembleSpec::new(beta, phase)
}

/// Mean and standard error of an array-valued observable.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_configs: u64,
}

/// Running count, mean and sum of squared deviations (Chan et al. merge).
struct Moments {
    count: u64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    fn single(values: Vec<f64>) -> Self {
        let len = values.len();
        Moments { count: 1, mean: values, m2: vec![0.0; len] }
    }

    fn merge(self, other: Moments) -> Moments {
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        let mut mean = self.mean;
        let mut m2 = self.m2;
        for i in 0..mean.len() {
            let delta = other.mean[i] - mean[i];
            mean[i] += delta * nb / n;
            m2[i] += other.m2[i] + delta * delta * na * nb / n;
        }
        Moments { count: self.count + other.count, mean, m2 }
    }
}

fn accumulate<F>(model: &DisorderModel, lo: u64, hi: u64, expected: usize, observable: &F) -> Result<Moments>
where
    F: Fn(&EnsembleSpec) -> Result<Vec<f64>> + Sync,
{
    if hi - lo <= LEAF_CONFIGS {
        let mut acc: Option<Moments> = None;
        for index in lo..hi {
            let values = observable(&sample_configuration(model, index)?)?;
            if values.len() != expected {
                return Err(Error::ShapeMismatch { expected, found: values.len(), index });
            }
            let m = Moments::single(values);
            acc = Some(match acc {
                None => m,
                Some(a) => a.merge(m),
            });
        }
        return Ok(acc.expect("non-empty range"));
    }
    let mid = lo + (hi - lo) / 2;
    let (a, b) = rayon::join(
        || accumulate(model, lo, mid, expected, observable),
        || accumulate(model, mid, hi, expected, observable),
    );
    Ok(a?.merge(b?))
}

/// Average `observable` over configurations 0..n_configs of `model`.
///
/// The observable must return arrays of one fixed length; the length of the
/// first configuration's result sets it.
pub fn average_observable<F>(model: &DisorderModel, n_configs: u64, observable: F) -> Result<MonteCarloEstimate>
where
    F: Fn(&EnsembleSpec) -> Result<Vec<f64>> + Sync,
{
    model.validate()?;
    if n_configs == 0 {
        return Err(Error::invalid("n_configs", "must be positive"));
    }
    let first = observable(&sample_configuration(model, 0)?)?;
    let expected = first.len();
    let mut moments = Moments::single(first);
    if n_configs > 1 {
        moments = moments.merge(accumulate(model, 1, n_configs, expected, &observable)?);
    }
    let n = moments.count as f64;
    let stderr = if moments.count > 1 {
        moments.m2.iter().map(|&m| (m.max(0.0) / (n - 1.0)).sqrt() / n.sqrt()).collect()
    } else {
        vec![0.0; expected]
    };
    Ok(MonteCarloEstimate { mean: moments.mean, stderr, n_configs })
}
