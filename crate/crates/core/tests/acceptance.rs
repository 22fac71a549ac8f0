//! End-to-end acceptance criteria. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.
//!
//! Pass criterion numbers to run a subset (`cargo test --test acceptance --
//! 1 4`). `--include-ignored` adds the 10⁴-configuration averaging tier.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use wgqed::analysis::{backward_decay_sweep, cavity_roundtrips, disorder_averaged_traces, forward_decay_sweep};
use wgqed::cli::{parse_config_str, RunPlan};
use wgqed::physmodel::{DetuningGrid, EnsembleSpec};
use wgqed::spectral::{transfer_bidirectional, transfer_unidirectional};
use wgqed::timedomain::{atom_dynamics, synthesize_pulse, PulseSpectrum, TraceSampling};

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(parts: Vec<(bool, String)>) -> Self {
        Outcome {
            passed: parts.iter().all(|(p, _)| *p),
            detail: parts
                .into_iter()
                .map(|(p, s)| format!("[{}] {s}", if p { "ok" } else { "x" }))
                .collect::<Vec<_>>()
                .join("; "),
        }
    }
}

fn plan(toml: &str) -> RunPlan {
    parse_config_str(toml).unwrap().resolve().unwrap()
}

fn resonant_attenuation() -> Outcome {
    let mut worst = 0.0f64;
    let grid = DetuningGrid::new(0.0, 0.5, 4).unwrap();
    for beta in [0.0055f64, 0.01, 0.03, 0.1] {
        for n in [1usize, 10, 100, 1000, 10_000] {
            let od = -2.0 * n as f64 * (1.0 - 2.0 * beta).ln();
            if od > 700.0 {
                continue;
            }
            let expected = (-od).exp();
            let closed = (1.0 - 2.0 * beta).powi(2 * n as i32);
            assert!((closed / expected - 1.0).abs() < 1e-12);
            let ensemble = EnsembleSpec::uniform(n, beta).unwrap();
            let t = transfer_unidirectional(&grid, &ensemble).amplitude()[grid.center_index()];
            worst = worst.max((t.norm_sqr() / expected - 1.0).abs());
        }
    }
    Outcome::new(vec![(worst <= 1e-12, format!("max relative error {worst:.2e} up to N=10^4 (limit 1e-12)"))])
}

fn small_system_oracle() -> Outcome {
    let mut worst = 0.0f64;
    let mut product = 0.0f64;
    let grid = DetuningGrid::new(0.0, 0.04, 1024).unwrap();
    for n in 1..=12 {
        for seed in 0..3 {
            let ensemble = common::random_ensemble(n, 1000 * n as u64 + seed);
            let spectra = transfer_bidirectional(&grid, &ensemble);
            for k in 0..grid.len() {
                let delta = grid.detuning(k);
                let (t, r) = common::scattering_solve(delta, &ensemble);
                worst = worst
                    .max(common::relative(spectra.transmission.amplitude()[k], t))
                    .max(common::relative(spectra.reflection.amplitude()[k], r));
                let (tm, rm) = common::transfer_matrix_solve(delta, &ensemble);
                product = product
                    .max(common::relative(spectra.transmission.amplitude()[k], tm))
                    .max(common::relative(spectra.reflection.amplitude()[k], rm));
            }
        }
    }
    // the matrix product divides by t at every atom and loses digits where
    // the array is nearly opaque, so it is reported but does not gate
    Outcome::new(vec![(
        worst <= 1e-10,
        format!(
            "max relative deviation from the linear solve {worst:.2e} over N=1..12, 1024 detunings (limit 1e-10); \
             from the transfer-matrix product {product:.2e}"
        ),
    )])
}

fn uni_bi_equivalence(n_configs: u64) -> Outcome {
    let plan = plan(&format!("scenario = \"s1\"\n[disorder]\nn_configs = {n_configs}\n"));
    let (model, n_configs) = plan.disorder.unwrap();
    let pulse = synthesize_pulse(&plan.pulse, &plan.grid).unwrap();
    let spectrum = PulseSpectrum::new(&pulse).unwrap();
    let uniform = EnsembleSpec::uniform(model.n_atoms, model.beta_mean).unwrap();
    let uni = spectrum.apply(&transfer_unidirectional(spectrum.grid(), &uniform)).unwrap().power();
    let end = plan.protocol.horizon(plan.pulse.switch_off());
    let avg = disorder_averaged_traces(&model, &spectrum, n_configs, (plan.grid.start(), end)).unwrap();
    let first = plan.grid.index_at_or_after(avg.times[0] - 0.5 * plan.grid.step()).unwrap();
    let peak = uni.iter().cloned().fold(0.0, f64::max);
    let worst = avg
        .forward
        .mean
        .iter()
        .enumerate()
        .map(|(k, b)| (b - uni[first + k]).abs())
        .fold(0.0, f64::max)
        / peak;
    Outcome::new(vec![(
        worst <= 0.01,
        format!(
            "N={} Δ={} {} configurations: max |bi-uni| = {:.2e} of peak (limit 1e-2)",
            model.n_atoms,
            plan.pulse.carrier_detuning,
            n_configs,
            worst
        ),
    )])
}

fn single_atom_limit() -> Outcome {
    let plan = plan("scenario = \"fig2\"\n[physics]\nn_atoms = 1\ndetuning = 0.0\n");
    let pulse = synthesize_pulse(&plan.pulse, &plan.grid).unwrap();
    let spectrum = PulseSpectrum::new(&pulse).unwrap();
    let ensemble = EnsembleSpec::uniform(1, plan.beta).unwrap();
    let out = spectrum.apply(&transfer_unidirectional(spectrum.grid(), &ensemble)).unwrap().power();
    let times = plan.grid.times();
    let t_off = plan.pulse.switch_off();
    let od = plan.od().unwrap();
    let field = plan.protocol.fit(&times, &out, t_off, od).unwrap().rate;
    let traj = atom_dynamics(&pulse, &ensemble, TraceSampling::full()).unwrap();
    let atom = plan.protocol.fit(&traj.times, &traj.traces[0], t_off, od).unwrap().rate;
    Outcome::new(vec![
        ((field - 1.0).abs() <= 5e-3, format!("transmitted power rate {field:.5} (1 ± 0.5%)")),
        ((atom - 1.0).abs() <= 5e-3, format!("population rate {atom:.5} (1 ± 0.5%)")),
    ])
}

fn od_trend() -> Outcome {
    let plan = plan("scenario = \"fig3\"\n");
    let pulse = synthesize_pulse(&plan.pulse, &plan.grid).unwrap();
    let points = forward_decay_sweep(&pulse, plan.beta, &plan.ods, &plan.protocol, plan.rate_settle).unwrap();
    let ods: Vec<f64> = points.iter().map(|p| p.od).collect();
    let rates: Vec<f64> = points.iter().map(|p| p.pulse_fit.rate).collect();
    let table: Vec<String> =
        points.iter().map(|p| format!("{}:{:.2}/{:.2}", p.od, p.pulse_fit.rate, p.gamma_coll)).collect();
    println!("    od:pulse_rate/gamma_coll {}", table.join(" "));

    let monotone = rates.windows(2).all(|w| w[1] > w[0]);

    let n = ods.len() as f64;
    let (mx, my) = (ods.iter().sum::<f64>() / n, rates.iter().sum::<f64>() / n);
    let sxy: f64 = ods.iter().zip(&rates).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = ods.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = rates.iter().map(|y| (y - my).powi(2)).sum();
    let r2 = sxy * sxy / (sxx * syy);

    let top = *rates.last().unwrap();
    let (lo, hi) = (ods[0], *ods.last().unwrap());
    let large = 0.5 * (lo + hi);
    let ordered = points.iter().filter(|p| p.od >= large).all(|p| p.gamma_coll >= p.pulse_fit.rate);
    let small_dev = points
        .iter()
        .filter(|p| p.od <= 5.0)
        .map(|p| (p.gamma_coll / p.pulse_fit.rate - 1.0).abs())
        .fold(0.0, f64::max);
    Outcome::new(vec![
        (monotone, "pulse rate increasing in OD".into()),
        (r2 > 0.95, format!("linear R² = {r2:.4} (> 0.95)")),
        (top >= 10.0, format!("rate at OD {hi} = {top:.2} (>= 10)")),
        (ordered, format!("collective rate >= pulse rate for OD >= {large}")),
        (small_dev <= 0.1, format!("collective vs pulse rate for OD <= 5 within {:.1}% (10%)", 100.0 * small_dev)),
    ])
}

fn directional_asymmetry() -> Outcome {
    let plan = plan("scenario = \"fig4\"\n");
    let (model, n_configs) = plan.disorder.unwrap();
    let fits = backward_decay_sweep(&model, &plan.pulse, &plan.grid, &plan.detunings, n_configs, &plan.protocol).unwrap();
    let mut by_detuning: Vec<(f64, f64, f64)> =
        fits.iter().map(|f| (f.detuning.abs(), f.forward.rate, f.backward.rate)).collect();
    by_detuning.sort_by(|a, b| a.0.total_cmp(&b.0));
    let table: Vec<String> = by_detuning.iter().map(|(d, f, b)| format!("{d}:{f:.2}/{b:.3}")).collect();
    println!("    |Δ|:forward/backward {}", table.join(" "));
    let (d0, fwd, bwd) = by_detuning[0];
    let monotone = by_detuning.windows(2).all(|w| w[1].2 > w[0].2);
    Outcome::new(vec![
        ((bwd - 1.0).abs() <= 0.3, format!("backward rate at |Δ|={d0} = {bwd:.3} (1 ± 30%)")),
        (fwd > 5.0, format!("forward rate at |Δ|={d0} = {fwd:.2} (> 5)")),
        (monotone, format!("backward rate increasing in |Δ| over {} detunings", by_detuning.len())),
    ])
}

fn cavity_equivalence() -> Outcome {
    let plan = plan("scenario = \"fig5\"\n");
    let cavity = plan.cavity.unwrap();
    let pulse = synthesize_pulse(&plan.pulse, &plan.grid).unwrap();
    let ensemble = EnsembleSpec::uniform(plan.n_atoms.unwrap(), plan.beta).unwrap();
    let run =
        cavity_roundtrips(&pulse, &ensemble, &cavity, plan.roundtrips, &plan.protocol, plan.pulse.ramp_length())
            .unwrap();
    for r in &run.roundtrips {
        println!(
            "    m={} od={:.0} deviation={:.4}% rate={:.2} superflash={:.3}",
            r.roundtrip,
            r.od_total,
            100.0 * r.max_deviation,
            r.fit.rate,
            r.superflash_ratio()
        );
    }
    let worst = run.roundtrips.iter().map(|r| r.max_deviation).fold(0.0, f64::max);
    let last = run.roundtrips.last().unwrap();
    let flash = run.roundtrips.iter().filter(|r| r.roundtrip >= 4).all(|r| r.superflash_ratio() > 1.0);
    Outcome::new(vec![
        (
            run.roundtrips.len() == 7 && worst <= 0.02,
            format!("{} roundtrips, max deviation {:.3}% of peak (2%)", run.roundtrips.len(), 100.0 * worst),
        ),
        (
            last.roundtrip == 7 && (last.fit.rate / 17.0 - 1.0).abs() <= 0.15,
            format!("rate at m={} = {:.2} (17 ± 15%)", last.roundtrip, last.fit.rate),
        ),
        (flash, "post-switch-off peak above plateau for m >= 4".into()),
    ])
}

fn property_suite() -> Outcome {
    Outcome::new(common::property_suite().into_iter().map(|c| (c.passed(), c.line())).collect())
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let full = args.iter().any(|a| a == "--include-ignored" || a == "--ignored");
    let selected: Vec<u32> = args.iter().filter_map(|a| a.parse().ok()).collect();

    let mut criteria: Vec<(u32, &str, Box<dyn Fn() -> Outcome>)> = vec![
        (1, "resonant attenuation closed form", Box::new(resonant_attenuation)),
        (2, "small-system oracle", Box::new(small_system_oracle)),
        (3, "disorder-averaged bidirectional equals unidirectional", Box::new(|| uni_bi_equivalence(1000))),
        (4, "single-atom limit", Box::new(single_atom_limit)),
        (5, "forward decay rate against optical depth", Box::new(od_trend)),
        (6, "forward/backward decay asymmetry", Box::new(directional_asymmetry)),
        (7, "cavity roundtrips equal single passes", Box::new(cavity_equivalence)),
        (8, "property suite", Box::new(property_suite)),
    ];
    if full {
        criteria.push((3, "disorder-averaged bidirectional equals unidirectional, 10^4 configurations", Box::new(|| uni_bi_equivalence(10_000))));
    }

    let mut failed = 0;
    for (number, name, run) in &criteria {
        if !selected.is_empty() && !selected.contains(number) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(|| run())).unwrap_or_else(|e| Outcome {
            passed: false,
            detail: format!(
                "panicked: {}",
                e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default()
            ),
        });
        if !outcome.passed {
            failed += 1;
        }
        println!(
            "{} criterion {number} ({name}) [{:.1}s]: {}",
            if outcome.passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            outcome.detail
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
