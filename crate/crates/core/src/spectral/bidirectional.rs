use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::physmodel::{DetuningGrid, EnsembleSpec, TransferSpectrum};

/// Denominator modulus below which a grid point is reported as degenerate.
pub const RECURSION_EPSILON: f64 = 1e-12;

const CHUNK: usize = 512;

/// Per-atom field ratios of the bidirectional recursion at a single detuning.
///
/// `t[n] = E→(after atom n)/E→(before atom n)` and
/// `s[n] = E←(before atom n)/E→(before atom n)` with `s[N] = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct BidirectionalState {
    pub t: Vec<C64>,
    pub s: Vec<C64>,
}

impl BidirectionalState {
    /// Ensemble transmission ∏ t_n.
    pub fn transmission(&self) -> C64 {
        self.t.iter().product()
    }

    /// Ensemble reflection s_1.
    pub fn reflection(&self) -> C64 {
        self.s[0]
    }
}

/// Forward and backward responses of the array, plus any grid points where
/// the recursion denominator came close to zero.
#[derive(Debug, Clone)]
pub struct BidirectionalSpectra {
    pub transmission: TransferSpectrum,
    pub reflection: TransferSpectrum,
    pub degenerate_points: Vec<usize>,
}

/// Per-atom constants hoisted out of the grid loop.
struct Site {
    beta: f64,
    shift: f64,
    phase: C64,
}

fn sites(ensemble: &EnsembleSpec) -> Vec<Site> {
    (0..ensemble.n_atoms())
        .map(|n| Site {
            beta: ensemble.beta()[n],
            shift: ensemble.shift(n),
            phase: C64::from_polar(1.0, ensemble.phase()[n]),
        })
        .collect()
}

/// One pass of the recursion from the last atom to the first.
///
/// Returns (t_N, r_N, smallest denominator modulus).
#[inline]
fn sweep(sites: &[Site], delta: f64) -> (C64, C64, f64) {
    let mut s = C64::new(0.0, 0.0);
    let mut t_total = C64::new(1.0, 0.0);
    let mut min_den = f64::INFINITY;
    for site in sites.iter().rev() {
        let d = C64::new(0.5, delta - site.shift);
        let den = d + site.beta * s * site.phase.conj();
        let den_norm = den.norm_sqr();
        min_den = min_den.min(den_norm);
        // (d − β)/den written out to avoid the generic complex division
        let num = d - site.beta;
        let t_n = C64::new(
            (num.re * den.re + num.im * den.im) / den_norm,
            (num.im * den.re - num.re * den.im) / den_norm,
        );
        s = (t_n - 1.0) * site.phase + s * t_n;
        t_total *= t_n;
    }
    (t_total, s, min_den.sqrt())
}

/// Full per-atom solution of the recursion at one detuning.
pub fn bidirectional_state(delta: f64, ensemble: &EnsembleSpec) -> BidirectionalState {
    let n_atoms = ensemble.n_atoms();
    let mut t = vec![C64::new(0.0, 0.0); n_atoms];
    let mut s = vec![C64::new(0.0, 0.0); n_atoms + 1];
    for (n, site) in sites(ensemble).iter().enumerate().rev() {
        let d = C64::new(0.5, delta - site.shift);
        let coupled = site.beta * s[n + 1] * site.phase.conj();
        t[n] = 1.0 - (site.beta + coupled) / (d + coupled);
        s[n] = (t[n] - 1.0) * site.phase + s[n + 1] * t[n];
    }
    BidirectionalState { t, s }
}

/// Transmission t_N and reflection r_N of the array including back-scattering.
///
/// Solved independently at each grid point, so the result does not depend on
/// how the grid is split between worker threads.
pub fn transfer_bidirectional(grid: &DetuningGrid, ensemble: &EnsembleSpec) -> BidirectionalSpectra {
    let sites = sites(ensemble);
    let len = grid.len();
    let mut t = vec![C64::new(0.0, 0.0); len];
    let mut r = vec![C64::new(0.0, 0.0); len];
    let degenerate: Vec<usize> = t
        .par_chunks_mut(CHUNK)
        .zip(r.par_chunks_mut(CHUNK))
        .enumerate()
        .flat_map_iter(|(c, (tc, rc))| {
            let mut bad = Vec::new();
            for (i, (tk, rk)) in tc.iter_mut().zip(rc.iter_mut()).enumerate() {
                let k = c * CHUNK + i;
                let (tn, rn, min_den) = sweep(&sites, grid.detuning(k));
                *tk = tn;
                *rk = rn;
                if min_den < RECURSION_EPSILON {
                    bad.push(k);
                }
            }
            bad
        })
        .collect();
    BidirectionalSpectra {
        transmission: TransferSpectrum::new(*grid, t).expect("length matches grid"),
        reflection: TransferSpectrum::new(*grid, r).expect("length matches grid"),
        degenerate_points: degenerate,
    }
}
