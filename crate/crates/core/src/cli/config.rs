//! Run configuration: the TOML file schema, scenario defaults, and the
//! conversion to natural units.
//!
//! Times in the file are in nanoseconds, detunings in Γ0. Every field is
//! optional; [`ScenarioConfig::complete`] fills the scenario's defaults and
//! rejects fields the scenario does not use.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};

use crate::analysis::FitProtocol;
use crate::error::{Error, Result};
use crate::montecarlo::{DisorderModel, PhaseLaw};
use crate::physmodel::{atom_number_to_od, od_to_atom_number, TimeGrid, Units, DEFAULT_BETA, DEFAULT_GAMMA0_HZ};
use crate::spectral::CavitySpec;
use crate::timedomain::{PulseSpec, DEFAULT_SETTLE_DELAY, MIN_EDGE_SAMPLES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// Transmitted pulse and per-atom populations at one detuning.
    Fig2,
    /// Tail decay rate and Γ_coll against optical depth.
    Fig3,
    /// Forward and backward tail decay rates against detuning.
    Fig4,
    /// Ring resonator output, roundtrip by roundtrip.
    Fig5,
    /// Disorder-averaged bidirectional model against the unidirectional one.
    S1,
    /// A single propagation through a chosen model.
    Custom,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Scenario::Fig2 => "fig2",
            Scenario::Fig3 => "fig3",
            Scenario::Fig4 => "fig4",
            Scenario::Fig5 => "fig5",
            Scenario::S1 => "s1",
            Scenario::Custom => "custom",
        };
        f.write_str(name)
    }
}

/// Medium used by the `custom` scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Unidirectional,
    Bidirectional,
    Cavity,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub od: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_atoms: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma0_hz: Option<f64>,
    /// Carrier detuning in Γ0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detuning: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<Model>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    /// Midpoint of the rising edge.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_on_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_ns: Option<f64>,
    /// 10–90 % rise and fall time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rise_fall_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub photon_number: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Number of samples, a power of two.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    /// Half width of the detuning window in Γ0; the time step is π/half_span.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_span: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_configs: Option<u64>,
    /// Relative standard deviation of β.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_spread: Option<f64>,
    /// When set, every atom gets this phase instead of a random one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bragg_phase: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ods: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detunings: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roundtrips: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roundtrip_ns: Option<f64>,
    /// Roundtrip amplitude transmission of the ring.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_rt: Option<f64>,
    /// Modulus of the coupler's through amplitude.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_c: Option<f64>,
    /// Phase of the coupler's through amplitude, radians.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_c_phase: Option<f64>,
    /// Static roundtrip phase at the atomic resonance, radians.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi0: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub settle_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub short_window_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub short_window_above_od: Option<f64>,
    /// Delay after switch-off at which Γ_coll is read, in 1/Γ0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_settle: Option<f64>,
    /// Lowest beat frequency searched in the fit residuals.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beat_min_mhz: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// Sample spacing of written time traces.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_stride_ns: Option<f64>,
    /// Sample spacing of the per-atom population table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub colormap_stride_ns: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    #[serde(default, skip_serializing_if = "is_default")]
    pub physics: PhysicsConfig,
    #[serde(default, skip_serializing_if = "is_default")]
    pub pulse: PulseConfig,
    #[serde(default, skip_serializing_if = "is_default")]
    pub grid: GridConfig,
    #[serde(default, skip_serializing_if = "is_default")]
    pub disorder: DisorderConfig,
    #[serde(default, skip_serializing_if = "is_default")]
    pub sweep: SweepConfig,
    #[serde(default, skip_serializing_if = "is_default")]
    pub cavity: CavityConfig,
    #[serde(default, skip_serializing_if = "is_default")]
    pub fit: FitConfig,
    #[serde(default, skip_serializing_if = "is_default")]
    pub output: OutputConfig,
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

fn config_error(path: &str, message: impl Into<String>) -> Error {
    Error::Config { path: path.to_string(), message: message.into() }
}

/// Optical depths swept by default for `fig3`.
pub const DEFAULT_FIG3_ODS: [f64; 19] =
    [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 12.0, 12.5, 14.0, 16.0, 18.0, 19.3, 20.7, 22.0, 24.0, 25.0, 26.0];

/// Detunings swept by default for `fig4`.
pub const DEFAULT_FIG4_DETUNINGS: [f64; 10] = [0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 10.0];

fn fill<T: Clone>(slot: &mut Option<T>, value: T) {
    if slot.is_none() {
        *slot = Some(value);
    }
}

fn forbid<T>(slot: &Option<T>, path: &str, scenario: Scenario) -> Result<()> {
    match slot {
        Some(_) => Err(config_error(path, format!("not used by scenario {scenario}"))),
        None => Ok(()),
    }
}

impl ScenarioConfig {
    pub fn new(scenario: Scenario) -> Self {
        ScenarioConfig {
            scenario,
            physics: Default::default(),
            pulse: Default::default(),
            grid: Default::default(),
            disorder: Default::default(),
            sweep: Default::default(),
            cavity: Default::default(),
            fit: Default::default(),
            output: Default::default(),
        }
    }

    /// Fill every default of the scenario. Idempotent.
    pub fn complete(mut self) -> Result<Self> {
        use Scenario::*;
        let s = self.scenario;
        let model = match s {
            Custom => Some(self.physics.model.unwrap_or(Model::Unidirectional)),
            _ => {
                forbid(&self.physics.model, "physics.model", s)?;
                None
            }
        };
        let uses_disorder = matches!(s, Fig4 | S1) || model == Some(Model::Bidirectional);
        let uses_cavity = s == Fig5 || model == Some(Model::Cavity);

        let p = &mut self.physics;
        if p.od.is_some() && p.n_atoms.is_some() {
            return Err(config_error("physics", "set exactly one of `od` and `n_atoms`"));
        }
        if s == Fig3 {
            forbid(&p.od, "physics.od", s)?;
            forbid(&p.n_atoms, "physics.n_atoms", s)?;
        } else if p.n_atoms.is_none() {
            fill(&mut p.od, match s {
                Fig4 => 26.0,
                Fig5 => 14.0,
                _ => 19.3,
            });
        }
        if s == Fig4 {
            forbid(&p.detuning, "physics.detuning", s)?;
        } else {
            fill(&mut p.detuning, match s {
                Fig3 => 3.8,
                Fig5 => 8.7,
                _ => 17.3,
            });
        }
        fill(&mut p.beta, DEFAULT_BETA);
        fill(&mut p.gamma0_hz, DEFAULT_GAMMA0_HZ);
        p.model = model;

        let q = &mut self.pulse;
        fill(&mut q.t_on_ns, 30.0);
        fill(&mut q.duration_ns, if s == Fig5 { 120.0 } else { 150.0 });
        fill(&mut q.rise_fall_ns, 0.85);
        fill(
            &mut q.photon_number,
            match s {
                Fig2 => 2.0,
                Fig5 => 0.04,
                _ => 1.0,
            },
        );

        let (points, half_span) = match s {
            Fig4 | S1 => (1 << 14, 1024.0),
            Fig5 => (1 << 20, 2048.0),
            _ => (1 << 16, 4096.0),
        };
        fill(&mut self.grid.points, points);
        fill(&mut self.grid.half_span, half_span);

        let d = &mut self.disorder;
        if d.seed.is_some_and(|seed| seed > i64::MAX as u64) {
            return Err(config_error("disorder.seed", "must not exceed 2^63 - 1"));
        }
        if uses_disorder {
            fill(&mut d.seed, 0);
            fill(&mut d.n_configs, match s {
                S1 => 1000,
                Fig4 => 100,
                _ => 1,
            });
            fill(&mut d.beta_spread, 0.0);
        } else {
            forbid(&d.seed, "disorder.seed", s)?;
            forbid(&d.n_configs, "disorder.n_configs", s)?;
            forbid(&d.beta_spread, "disorder.beta_spread", s)?;
            forbid(&d.bragg_phase, "disorder.bragg_phase", s)?;
        }

        let w = &mut self.sweep;
        if s == Fig3 {
            fill(&mut w.ods, DEFAULT_FIG3_ODS.to_vec());
        } else {
            forbid(&w.ods, "sweep.ods", s)?;
        }
        if s == Fig4 {
            fill(&mut w.detunings, DEFAULT_FIG4_DETUNINGS.to_vec());
        } else {
            forbid(&w.detunings, "sweep.detunings", s)?;
        }
        if s == Fig5 {
            fill(&mut w.roundtrips, 7);
        } else {
            forbid(&w.roundtrips, "sweep.roundtrips", s)?;
        }

        let c = &mut self.cavity;
        if uses_cavity {
            fill(&mut c.roundtrip_ns, 220.0);
            fill(&mut c.t_rt, 0.9);
            fill(&mut c.t_c, 0.9);
            fill(&mut c.t_c_phase, 0.0);
            fill(&mut c.phi0, 0.0);
        } else if *c != CavityConfig::default() {
            return Err(config_error("cavity", format!("not used by scenario {s}")));
        }

        let f = &mut self.fit;
        fill(&mut f.settle_ns, 1.0);
        fill(&mut f.window_ns, 30.0);
        fill(&mut f.short_window_ns, 15.0);
        fill(&mut f.short_window_above_od, 20.7);
        fill(&mut f.rate_settle, DEFAULT_SETTLE_DELAY);
        fill(&mut f.beat_min_mhz, 150.0);

        let o = &mut self.output;
        fill(&mut o.trace_stride_ns, 0.1);
        fill(&mut o.colormap_stride_ns, 1.0);
        Ok(self)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes to TOML")
    }

    /// Convert a completed configuration to natural units and validate it.
    pub fn resolve(&self) -> Result<RunPlan> {
        let cfg = self.clone().complete()?;
        let need = |v: Option<f64>, path: &str| v.ok_or_else(|| config_error(path, "missing"));
        let positive = |v: f64, path: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(config_error(path, format!("must be positive, got {v}")))
            }
        };
        let units = Units::new(need(cfg.physics.gamma0_hz, "physics.gamma0_hz")?)
            .map_err(|e| config_error("physics.gamma0_hz", e.to_string()))?;
        let beta = need(cfg.physics.beta, "physics.beta")?;
        if !(beta > 0.0 && beta < 0.5) {
            return Err(config_error("physics.beta", format!("must lie in (0, 0.5), got {beta}")));
        }
        let n_atoms = match (cfg.physics.od, cfg.physics.n_atoms) {
            (Some(od), None) => {
                let n = od_to_atom_number(positive(od, "physics.od")?, beta)
                    .map_err(|e| config_error("physics.od", e.to_string()))?;
                if n == 0 {
                    return Err(config_error("physics.od", "rounds to zero atoms"));
                }
                Some(n)
            }
            (None, Some(0)) => return Err(config_error("physics.n_atoms", "must be positive")),
            (None, n) => n,
            (Some(_), Some(_)) => unreachable!("rejected by complete"),
        };

        let pulse = PulseSpec {
            t_on: units.ns_to_natural(positive(need(cfg.pulse.t_on_ns, "pulse.t_on_ns")?, "pulse.t_on_ns")?),
            duration: units
                .ns_to_natural(positive(need(cfg.pulse.duration_ns, "pulse.duration_ns")?, "pulse.duration_ns")?),
            rise_fall: units.ns_to_natural(need(cfg.pulse.rise_fall_ns, "pulse.rise_fall_ns")?),
            carrier_detuning: cfg.physics.detuning.unwrap_or(0.0),
            photon_number: need(cfg.pulse.photon_number, "pulse.photon_number")?,
        };
        pulse.validate().map_err(|e| config_error("pulse", e.to_string()))?;

        let points = cfg.grid.points.unwrap_or(0);
        let grid = TimeGrid::from_span(need(cfg.grid.half_span, "grid.half_span")?, points)
            .map_err(|e| config_error("grid", e.to_string()))?;
        if pulse.rise_fall > 0.0 && pulse.rise_fall / grid.step() < MIN_EDGE_SAMPLES as f64 {
            return Err(config_error(
                "grid.half_span",
                format!("time step {} leaves fewer than {MIN_EDGE_SAMPLES} samples per rise time", grid.step()),
            ));
        }
        let pad = 4.0 * pulse.duration + 20.0;
        if grid.duration() < pad {
            return Err(config_error(
                "grid.points",
                format!("window {} is shorter than 4 × duration + 20 = {pad}", grid.duration()),
            ));
        }

        let disorder = match cfg.disorder.seed {
            Some(seed) => {
                let model = DisorderModel {
                    n_atoms: n_atoms.unwrap_or(1),
                    beta_mean: beta,
                    beta_spread: cfg.disorder.beta_spread.unwrap_or(0.0),
                    phase_law: match cfg.disorder.bragg_phase {
                        Some(theta) => PhaseLaw::Bragg { theta },
                        None => PhaseLaw::Uniform,
                    },
                    seed,
                };
                model.validate().map_err(|e| config_error("disorder", e.to_string()))?;
                let n_configs = cfg.disorder.n_configs.unwrap_or(1);
                if n_configs == 0 {
                    return Err(config_error("disorder.n_configs", "must be positive"));
                }
                Some((model, n_configs))
            }
            None => None,
        };

        let cavity = match cfg.cavity.roundtrip_ns {
            Some(rt) => {
                let c = &cfg.cavity;
                let tc = C64::from_polar(c.t_c.unwrap_or(0.0), c.t_c_phase.unwrap_or(0.0));
                Some(
                    CavitySpec::new(
                        c.t_rt.unwrap_or(1.0),
                        tc,
                        units.ns_to_natural(positive(rt, "cavity.roundtrip_ns")?),
                        c.phi0.unwrap_or(0.0),
                    )
                    .map_err(|e| config_error("cavity", e.to_string()))?,
                )
            }
            None => None,
        };

        let f = &cfg.fit;
        let protocol = FitProtocol {
            settle: units.ns_to_natural(need(f.settle_ns, "fit.settle_ns")?),
            window: units.ns_to_natural(positive(need(f.window_ns, "fit.window_ns")?, "fit.window_ns")?),
            short_window: units
                .ns_to_natural(positive(need(f.short_window_ns, "fit.short_window_ns")?, "fit.short_window_ns")?),
            short_window_above_od: need(f.short_window_above_od, "fit.short_window_above_od")?,
        };
        if protocol.settle < 0.0 {
            return Err(config_error("fit.settle_ns", "must not be negative"));
        }
        let ods = cfg.sweep.ods.clone().unwrap_or_default();
        for (i, &od) in ods.iter().enumerate() {
            if !(od > 0.0) {
                return Err(config_error(&format!("sweep.ods[{i}]"), "must be positive"));
            }
        }
        let trace_stride = stride(&units, need(cfg.output.trace_stride_ns, "output.trace_stride_ns")?, &grid)
            .map_err(|m| config_error("output.trace_stride_ns", m))?;
        let colormap_stride =
            stride(&units, need(cfg.output.colormap_stride_ns, "output.colormap_stride_ns")?, &grid)
                .map_err(|m| config_error("output.colormap_stride_ns", m))?;

        Ok(RunPlan {
            units,
            beta,
            n_atoms,
            pulse,
            grid,
            disorder,
            cavity,
            protocol,
            rate_settle: positive(need(f.rate_settle, "fit.rate_settle")?, "fit.rate_settle")?,
            beat_min_frequency: units.hz_to_angular(positive(need(f.beat_min_mhz, "fit.beat_min_mhz")?, "fit.beat_min_mhz")? * 1e6),
            ods,
            detunings: cfg.sweep.detunings.clone().unwrap_or_default(),
            roundtrips: cfg.sweep.roundtrips.unwrap_or(0),
            trace_stride,
            colormap_stride,
            config: cfg,
        })
    }
}

fn stride(units: &Units, ns: f64, grid: &TimeGrid) -> std::result::Result<usize, String> {
    if !(ns > 0.0) {
        return Err(format!("must be positive, got {ns}"));
    }
    Ok(((units.ns_to_natural(ns) / grid.step()).round() as usize).max(1))
}

/// A completed configuration together with everything derived from it in
/// natural units.
#[derive(Debug, Clone)]
pub struct RunPlan {
    pub config: ScenarioConfig,
    pub units: Units,
    pub beta: f64,
    pub n_atoms: Option<usize>,
    pub pulse: PulseSpec,
    pub grid: TimeGrid,
    pub disorder: Option<(DisorderModel, u64)>,
    pub cavity: Option<CavitySpec>,
    pub protocol: FitProtocol,
    pub rate_settle: f64,
    /// Angular frequency in Γ0.
    pub beat_min_frequency: f64,
    pub ods: Vec<f64>,
    pub detunings: Vec<f64>,
    pub roundtrips: u32,
    pub trace_stride: usize,
    pub colormap_stride: usize,
}

impl RunPlan {
    pub fn od(&self) -> Option<f64> {
        self.n_atoms.map(|n| atom_number_to_od(n, self.beta))
    }
}

/// Parse TOML text strictly. Errors carry the dotted path of the offending
/// field.
pub fn parse_config_str(text: &str) -> Result<ScenarioConfig> {
    let de = toml::Deserializer::new(text);
    let raw: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        config_error(if path == "." { "" } else { &path }, inner.message().trim().to_string())
    })?;
    raw.complete()
}

/// Read, parse and complete a configuration file.
pub fn parse_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_error("", format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minimal_config_is_fully_populated() {
        let cfg = parse_config_str("scenario = \"fig2\"\n").unwrap();
        assert_eq!(cfg.physics.od, Some(19.3));
        assert_eq!(cfg.physics.detuning, Some(17.3));
        assert_eq!(cfg.physics.beta, Some(DEFAULT_BETA));
        assert_eq!(cfg.pulse.duration_ns, Some(150.0));
        assert_eq!(cfg.pulse.photon_number, Some(2.0));
        assert_eq!(cfg.grid.points, Some(1 << 16));
        assert_eq!(cfg.fit.window_ns, Some(30.0));
        let plan = cfg.resolve().unwrap();
        assert_eq!(plan.n_atoms, Some(872));
        assert!((plan.pulse.duration - 4.9).abs() < 0.01);
        assert!(plan.cavity.is_none() && plan.disorder.is_none());
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_config_str("scenario = \"fig2\"\n[physics]\nbetta = 0.1\n").unwrap_err();
        match err {
            Error::Config { path, message } => {
                assert!(path.starts_with("physics"), "{path}");
                assert!(message.contains("betta"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn od_and_atom_number_are_exclusive() {
        let err = parse_config_str("scenario = \"fig2\"\n[physics]\nod = 3.0\nn_atoms = 10\n").unwrap_err();
        assert!(matches!(err, Error::Config { ref path, .. } if path == "physics"));
    }

    #[test]
    fn fields_foreign_to_the_scenario_are_rejected() {
        let err = parse_config_str("scenario = \"fig2\"\n[cavity]\nt_rt = 0.5\n").unwrap_err();
        assert!(matches!(err, Error::Config { ref path, .. } if path == "cavity"));
        let err = parse_config_str("scenario = \"fig3\"\n[physics]\nod = 5.0\n").unwrap_err();
        assert!(matches!(err, Error::Config { ref path, .. } if path == "physics.od"));
    }

    #[test]
    fn out_of_range_values_are_rejected() {
        assert!(parse_config_str("scenario = \"fig2\"\n[physics]\nbeta = 0.7\n").unwrap().resolve().is_err());
        assert!(parse_config_str("scenario = \"fig2\"\n[pulse]\nduration_ns = -1.0\n").unwrap().resolve().is_err());
        let short = parse_config_str("scenario = \"fig2\"\n[grid]\npoints = 1024\n").unwrap().resolve();
        assert!(matches!(short, Err(Error::Config { ref path, .. }) if path == "grid.points"));
        assert!(parse_config_str("scenario = \"fig9\"\n").is_err());
        assert!(parse_config_str("scenario = \"fig2\"\n[pulse]\nduration_ns = \"long\"\n").is_err());
    }

    #[test]
    fn every_scenario_resolves_with_defaults() {
        for s in [Scenario::Fig2, Scenario::Fig3, Scenario::Fig4, Scenario::Fig5, Scenario::S1, Scenario::Custom] {
            let plan = ScenarioConfig::new(s).complete().unwrap().resolve().unwrap();
            assert_eq!(plan.cavity.is_some(), s == Scenario::Fig5, "{s}");
            assert_eq!(plan.disorder.is_some(), matches!(s, Scenario::Fig4 | Scenario::S1), "{s}");
        }
    }

    #[test]
    fn completion_is_idempotent_and_round_trips() {
        for s in [Scenario::Fig2, Scenario::Fig3, Scenario::Fig4, Scenario::Fig5, Scenario::S1, Scenario::Custom] {
            let cfg = ScenarioConfig::new(s).complete().unwrap();
            assert_eq!(cfg.clone().complete().unwrap(), cfg);
            assert_eq!(parse_config_str(&cfg.to_toml()).unwrap(), cfg);
        }
    }

    proptest! {
        #[test]
        fn emitted_configs_parse_back(
            od in prop::option::of(0.1f64..60.0),
            detuning in -40.0f64..40.0,
            duration in 1.0f64..500.0,
            photons in 0.0f64..10.0,
            seed in 0u64..=i64::MAX as u64,
            n_configs in 1u64..10_000,
            model in 0usize..3,
        ) {
            let mut cfg = ScenarioConfig::new(Scenario::Custom);
            cfg.physics.od = od;
            cfg.physics.detuning = Some(detuning);
            cfg.physics.model = Some([Model::Unidirectional, Model::Bidirectional, Model::Cavity][model]);
            cfg.pulse.duration_ns = Some(duration);
            cfg.pulse.photon_number = Some(photons);
            if model == 1 {
                cfg.disorder.seed = Some(seed);
                cfg.disorder.n_configs = Some(n_configs);
            }
            let cfg = cfg.complete().unwrap();
            prop_assert_eq!(parse_config_str(&cfg.to_toml()).unwrap(), cfg);
        }
    }
}
