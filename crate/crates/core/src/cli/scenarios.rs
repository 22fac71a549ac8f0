//! One runner per scenario. Each turns a [`RunPlan`] into CSV tables.

use std::path::Path;

use super::config::{Model, RunPlan, Scenario};
use super::output::{Cell, OutputSet, Table};
use crate::analysis::{
    backward_decay_sweep, cavity_roundtrips, disorder_averaged_traces, forward_decay_sweep, residual_spectrum,
    DecayFit,
};
use crate::error::{Error, Result};
use crate::montecarlo::sample_configuration;
use crate::physmodel::{atom_number_to_od, EnsembleSpec, TransferSpectrum};
use crate::spectral::{transfer_bidirectional, transfer_cavity, transfer_unidirectional};
use crate::timedomain::{atom_dynamics, synthesize_pulse, PulseSpectrum, TraceSampling};

/// Written traces run this long past the switch-off.
const TRACE_TAIL: f64 = 3.0;

/// Half width of the written transfer spectrum around the carrier, in Γ0.
const SPECTRUM_HALF_WIDTH: f64 = 64.0;

/// Atoms whose populations are tabulated individually.
const TRACED_ATOMS: [usize; 3] = [1, 100, 600];

const T: (&str, &str) = ("t", "1/Gamma0");
const T_NS: (&str, &str) = ("t", "ns");

/// Run the scenario of `plan` and write its tables into `dir`.
pub fn run_scenario(plan: &RunPlan, dir: &Path) -> Result<OutputSet> {
    let mut out = OutputSet::default();
    match plan.config.scenario {
        Scenario::Fig2 => fig2(plan, dir, &mut out)?,
        Scenario::Fig3 => fig3(plan, dir, &mut out)?,
        Scenario::Fig4 => fig4(plan, dir, &mut out)?,
        Scenario::Fig5 => fig5(plan, dir, &mut out)?,
        Scenario::S1 => s1(plan, dir, &mut out)?,
        Scenario::Custom => custom(plan, dir, &mut out)?,
    }
    Ok(out)
}

fn n_atoms(plan: &RunPlan) -> Result<usize> {
    plan.n_atoms.ok_or_else(|| Error::Config { path: "physics".into(), message: "atom number is required".into() })
}

fn trace_end(plan: &RunPlan) -> f64 {
    let grid = &plan.grid;
    (plan.pulse.switch_off() + TRACE_TAIL).min(grid.start() + grid.duration())
}

/// Strided sample indices in [start, end].
fn trace_indices(plan: &RunPlan, end: f64) -> Vec<usize> {
    let grid = &plan.grid;
    (0..grid.len()).step_by(plan.trace_stride).take_while(|&j| grid.time(j) <= end).collect()
}

fn fig2(plan: &RunPlan, dir: &Path, out: &mut OutputSet) -> Result<()> {
    let s = Scenario::Fig2;
    let ensemble = EnsembleSpec::uniform(n_atoms(plan)?, plan.beta)?;
    let pulse = synthesize_pulse(&plan.pulse, &plan.grid)?;
    let spectrum = PulseSpectrum::new(&pulse)?;
    let transmitted = spectrum.apply(&transfer_unidirectional(spectrum.grid(), &ensemble))?;
    let end = trace_end(plan);

    let (p_in, p_out) = (pulse.power(), transmitted.power());
    let mut table = Table::new(s, &[T, T_NS, ("input", "photons*Gamma0"), ("transmitted", "photons*Gamma0")]);
    for j in trace_indices(plan, end) {
        let t = plan.grid.time(j);
        table.push(vec![t.into(), plan.units.natural_to_ns(t).into(), p_in[j].into(), p_out[j].into()]);
    }
    out.write_table(dir, "transmitted_power.csv", &table)?;

    let sampling = TraceSampling { t_start: plan.grid.start(), t_end: end, stride: plan.trace_stride };
    let traj = atom_dynamics(&pulse, &ensemble, sampling)?;
    let traced: Vec<usize> = TRACED_ATOMS.iter().copied().filter(|&n| n <= ensemble.n_atoms()).collect();
    let names: Vec<String> = traced.iter().map(|n| format!("p_{n}")).collect();
    let mut columns = vec![T, T_NS];
    columns.extend(names.iter().map(|n| (n.as_str(), "probability")));
    columns.push(("energy", "excitations"));
    columns.push(("gamma_coll", "Gamma0"));
    let mut table = Table::new(s, &columns);
    for (k, &t) in traj.times.iter().enumerate() {
        let mut row: Vec<Cell> = vec![t.into(), plan.units.natural_to_ns(t).into()];
        row.extend(traced.iter().map(|&n| Cell::from(traj.traces[n - 1][k])));
        row.push(traj.energy[k].into());
        row.push(traj.gamma_coll[k].into());
        table.push(row);
    }
    out.write_table(dir, "atom_traces.csv", &table)?;

    let every = ((plan.colormap_stride as f64 / plan.trace_stride as f64).round() as usize).max(1);
    let mut table = Table::new(s, &[T, T_NS, ("atom", "index"), ("p", "probability")]);
    for k in (0..traj.times.len()).step_by(every) {
        let t = traj.times[k];
        for (n, trace) in traj.traces.iter().enumerate() {
            table.push(vec![t.into(), plan.units.natural_to_ns(t).into(), (n + 1).into(), trace[k].into()]);
        }
    }
    out.write_table(dir, "atom_colormap.csv", &table)
}

fn fig3(plan: &RunPlan, dir: &Path, out: &mut OutputSet) -> Result<()> {
    let pulse = synthesize_pulse(&plan.pulse, &plan.grid)?;
    let points = forward_decay_sweep(&pulse, plan.beta, &plan.ods, &plan.protocol, plan.rate_settle)?;
    let mut table = Table::new(
        Scenario::Fig3,
        &[
            ("od", "1"),
            ("n_atoms", "1"),
            ("pulse_rate", "Gamma0"),
            ("pulse_rate_stderr", "Gamma0"),
            ("gamma_coll", "Gamma0"),
            ("fit_window", "ns"),
        ],
    );
    for p in &points {
        table.push(vec![
            p.od.into(),
            p.n_atoms.into(),
            p.pulse_fit.rate.into(),
            p.pulse_fit.rate_stderr.into(),
            p.gamma_coll.into(),
            plan.units.natural_to_ns(plan.protocol.window_for(p.od)).into(),
        ]);
    }
    out.write_table(dir, "decay_rate_vs_od.csv", &table)
}

fn disorder(plan: &RunPlan) -> Result<(crate::montecarlo::DisorderModel, u64)> {
    plan.disorder.ok_or_else(|| Error::Config { path: "disorder".into(), message: "required".into() })
}

fn fig4(plan: &RunPlan, dir: &Path, out: &mut OutputSet) -> Result<()> {
    let s = Scenario::Fig4;
    let (model, n_configs) = disorder(plan)?;
    let fits = backward_decay_sweep(&model, &plan.pulse, &plan.grid, &plan.detunings, n_configs, &plan.protocol)?;
    let mut rates = Table::new(
        s,
        &[
            ("detuning", "Gamma0"),
            ("forward_rate", "Gamma0"),
            ("forward_rate_stderr", "Gamma0"),
            ("backward_rate", "Gamma0"),
            ("backward_rate_stderr", "Gamma0"),
        ],
    );
    let mut traces = Table::new(
        s,
        &[
            ("detuning", "Gamma0"),
            T,
            ("forward", "photons*Gamma0"),
            ("forward_stderr", "photons*Gamma0"),
            ("backward", "photons*Gamma0"),
            ("backward_stderr", "photons*Gamma0"),
        ],
    );
    for f in &fits {
        rates.push(vec![
            f.detuning.into(),
            f.forward.rate.into(),
            f.forward.rate_stderr.into(),
            f.backward.rate.into(),
            f.backward.rate_stderr.into(),
        ]);
        let tr = &f.traces;
        for k in (0..tr.times.len()).step_by(plan.trace_stride) {
            traces.push(vec![
                f.detuning.into(),
                tr.times[k].into(),
                tr.forward.mean[k].into(),
                tr.forward.stderr[k].into(),
                tr.backward.mean[k].into(),
                tr.backward.stderr[k].into(),
            ]);
        }
    }
    out.write_table(dir, "decay_rate_vs_detuning.csv", &rates)?;
    out.write_table(dir, "averaged_traces.csv", &traces)
}

fn fig5(plan: &RunPlan, dir: &Path, out: &mut OutputSet) -> Result<()> {
    let s = Scenario::Fig5;
    let ensemble = EnsembleSpec::uniform(n_atoms(plan)?, plan.beta)?;
    let cavity = plan
        .cavity
        .ok_or_else(|| Error::Config { path: "cavity".into(), message: "required".into() })?;
    let pulse = synthesize_pulse(&plan.pulse, &plan.grid)?;
    let run = cavity_roundtrips(&pulse, &ensemble, &cavity, plan.roundtrips, &plan.protocol, plan.pulse.ramp_length())?;

    let end = plan.pulse.leading_edge() + (plan.roundtrips + 1) as f64 * cavity.tau_rt();
    let (p_in, p_out) = (pulse.power(), run.output.power());
    let mut table = Table::new(s, &[T, T_NS, ("input", "photons*Gamma0"), ("output", "photons*Gamma0")]);
    for j in trace_indices(plan, end) {
        let t = plan.grid.time(j);
        table.push(vec![t.into(), plan.units.natural_to_ns(t).into(), p_in[j].into(), p_out[j].into()]);
    }
    out.write_table(dir, "cavity_trace.csv", &table)?;

    let mut segments = Table::new(
        s,
        &[
            ("roundtrip", "1"),
            ("t_rel", "1/Gamma0"),
            ("cavity", "photons*Gamma0"),
            ("single_pass", "photons*Gamma0"),
        ],
    );
    let mut rates = Table::new(
        s,
        &[
            ("roundtrip", "1"),
            ("od_total", "1"),
            ("rate", "Gamma0"),
            ("rate_stderr", "Gamma0"),
            ("max_deviation", "fraction_of_peak"),
            ("plateau", "photons*Gamma0"),
            ("peak_after_switch_off", "photons*Gamma0"),
            ("superflash_ratio", "1"),
        ],
    );
    for rt in &run.roundtrips {
        let shift = rt.roundtrip as f64 * cavity.tau_rt();
        for k in (0..rt.times.len()).step_by(plan.trace_stride) {
            segments.push(vec![
                rt.roundtrip.into(),
                (rt.times[k] - shift).into(),
                rt.cavity[k].into(),
                rt.single_pass[k].into(),
            ]);
        }
        rates.push(vec![
            rt.roundtrip.into(),
            rt.od_total.into(),
            rt.fit.rate.into(),
            rt.fit.rate_stderr.into(),
            rt.max_deviation.into(),
            rt.plateau.into(),
            rt.peak_after_switch_off.into(),
            rt.superflash_ratio().into(),
        ]);
    }
    out.write_table(dir, "roundtrips.csv", &segments)?;
    out.write_table(dir, "decay_rate_vs_roundtrip.csv", &rates)
}

fn s1(plan: &RunPlan, dir: &Path, out: &mut OutputSet) -> Result<()> {
    let (model, n_configs) = disorder(plan)?;
    let pulse = synthesize_pulse(&plan.pulse, &plan.grid)?;
    let spectrum = PulseSpectrum::new(&pulse)?;
    let ensemble = EnsembleSpec::uniform(model.n_atoms, model.beta_mean)?;
    let uni = spectrum.apply(&transfer_unidirectional(spectrum.grid(), &ensemble))?.power();
    let end = trace_end(plan);
    let avg = disorder_averaged_traces(&model, &spectrum, n_configs, (plan.grid.start(), end))?;
    let mut table = Table::new(
        Scenario::S1,
        &[
            T,
            T_NS,
            ("unidirectional", "photons*Gamma0"),
            ("bidirectional", "photons*Gamma0"),
            ("bidirectional_stderr", "photons*Gamma0"),
            ("backward", "photons*Gamma0"),
        ],
    );
    for k in (0..avg.times.len()).step_by(plan.trace_stride) {
        let t = avg.times[k];
        let j = plan.grid.index_at_or_after(t - 0.5 * plan.grid.step()).expect("sample lies on the grid");
        table.push(vec![
            t.into(),
            plan.units.natural_to_ns(t).into(),
            uni[j].into(),
            avg.forward.mean[k].into(),
            avg.forward.stderr[k].into(),
            avg.backward.mean[k].into(),
        ]);
    }
    out.write_table(dir, "uni_vs_bi.csv", &table)
}

/// Fit columns plus the residual periodogram, when the window is long enough
/// to have one.
fn fit_row(fit: &DecayFit, plan: &RunPlan) -> (Vec<Cell>, Vec<(f64, f64)>) {
    let spectrum = residual_spectrum(fit, plan.beat_min_frequency).ok();
    let peak = spectrum.as_ref().and_then(|s| s.peak.clone());
    let row = vec![
        fit.rate.into(),
        fit.rate_stderr.into(),
        fit.amplitude.into(),
        fit.window.0.into(),
        fit.window.1.into(),
        fit.rms_residual.into(),
        peak.as_ref().map(|p| plan.units.angular_to_hz(p.frequency) / 1e6).into(),
        peak.as_ref().map(|p| p.prominence).into(),
    ];
    let density = spectrum
        .map(|s| s.frequencies.iter().zip(&s.density).map(|(&w, &d)| (w, d)).collect())
        .unwrap_or_default();
    (row, density)
}

fn custom(plan: &RunPlan, dir: &Path, out: &mut OutputSet) -> Result<()> {
    let s = Scenario::Custom;
    let model = plan.config.physics.model.unwrap_or(Model::Unidirectional);
    let n = n_atoms(plan)?;
    let pulse = synthesize_pulse(&plan.pulse, &plan.grid)?;
    let spectrum = PulseSpectrum::new(&pulse)?;
    let grid = *spectrum.grid();
    let od = atom_number_to_od(n, plan.beta);

    let (forward, backward, outputs): (TransferSpectrum, Option<TransferSpectrum>, Vec<(String, Vec<f64>)>) =
        match model {
            Model::Unidirectional | Model::Cavity => {
                let ensemble = EnsembleSpec::uniform(n, plan.beta)?;
                let mut medium = transfer_unidirectional(&grid, &ensemble);
                if model == Model::Cavity {
                    let cavity = plan
                        .cavity
                        .ok_or_else(|| Error::Config { path: "cavity".into(), message: "required".into() })?;
                    let response = transfer_cavity(&medium, &cavity);
                    if !response.degenerate_points.is_empty() {
                        return Err(Error::invalid("cavity", "response has a pole on the detuning grid"));
                    }
                    medium = response.spectrum;
                }
                let p = spectrum.apply(&medium)?.power();
                (medium, None, vec![("output".into(), p)])
            }
            Model::Bidirectional => {
                let (dm, n_configs) = disorder(plan)?;
                let first = transfer_bidirectional(&grid, &sample_configuration(&dm, 0)?);
                let avg = disorder_averaged_traces(&dm, &spectrum, n_configs, (plan.grid.start(), f64::INFINITY))?;
                (
                    first.transmission,
                    Some(first.reflection),
                    vec![("output".into(), avg.forward.mean), ("backward".into(), avg.backward.mean)],
                )
            }
        };

    let mut columns = vec![("detuning", "Gamma0"), ("transmission", "power_fraction"), ("transmission_phase", "rad")];
    if backward.is_some() {
        columns.push(("reflection", "power_fraction"));
    }
    let mut table = Table::new(s, &columns);
    for k in 0..grid.len() {
        if grid.offset(k).abs() > SPECTRUM_HALF_WIDTH {
            continue;
        }
        let a = forward.amplitude()[k];
        let mut row: Vec<Cell> = vec![grid.detuning(k).into(), a.norm_sqr().into(), a.arg().into()];
        if let Some(b) = &backward {
            row.push(b.amplitude()[k].norm_sqr().into());
        }
        table.push(row);
    }
    out.write_table(dir, "spectrum.csv", &table)?;

    let p_in = pulse.power();
    let names: Vec<String> = outputs.iter().map(|(n, _)| n.clone()).collect();
    let mut columns = vec![T, T_NS, ("input", "photons*Gamma0")];
    columns.extend(names.iter().map(|n| (n.as_str(), "photons*Gamma0")));
    let mut table = Table::new(s, &columns);
    let end = match (model, plan.cavity) {
        (Model::Cavity, Some(c)) => plan.pulse.switch_off() + 3.0 * c.tau_rt(),
        _ => trace_end(plan),
    };
    for j in trace_indices(plan, end) {
        let t = plan.grid.time(j);
        let mut row: Vec<Cell> = vec![t.into(), plan.units.natural_to_ns(t).into(), p_in[j].into()];
        row.extend(outputs.iter().map(|(_, p)| Cell::from(p[j])));
        table.push(row);
    }
    out.write_table(dir, "trace.csv", &table)?;

    let times = plan.grid.times();
    let t_off = plan.pulse.switch_off();
    let mut fits = Table::new(
        s,
        &[
            ("direction", "index"),
            ("rate", "Gamma0"),
            ("rate_stderr", "Gamma0"),
            ("amplitude", "photons*Gamma0"),
            ("window_start", "1/Gamma0"),
            ("window_end", "1/Gamma0"),
            ("rms_residual", "photons*Gamma0"),
            ("beat_frequency", "MHz"),
            ("beat_prominence", "1"),
        ],
    );
    let mut residuals = Table::new(s, &[("direction", "index"), ("frequency", "MHz"), ("density", "arb")]);
    // direction 0 is the transmitted output, 1 the reflected one
    for (i, (_, p)) in outputs.iter().enumerate() {
        let fit = plan.protocol.fit(&times, p, t_off, od)?;
        let (row, density) = fit_row(&fit, plan);
        let mut full = vec![Cell::from(i)];
        full.extend(row);
        fits.push(full);
        for (w, d) in density {
            residuals.push(vec![i.into(), (plan.units.angular_to_hz(w) / 1e6).into(), d.into()]);
        }
    }
    out.write_table(dir, "fit.csv", &fits)?;
    out.write_table(dir, "residual_spectrum.csv", &residuals)
}
