//! TOML run configuration.
//!
//! Every key is optional except `command`, which a subcommand on the command
//! line can also supply. Defaults:
//!
//! ```toml
//! command = "sweep"            # simulate | sweep | transition | gini-curve | selftest
//! topology = "moore"           # simulate, sweep: ring | von-neumann | moore
//! source = "ring"              # transition
//! target = "von-neumann"       # transition
//! topologies = ["ring", "von-neumann", "moore"]   # gini-curve
//! out = "cmlwealth-out"        # output path prefix
//! workers = 0                  # 0 uses every available processor
//! force = false                # overwrite existing outputs
//! scalar = "f64"               # f64 | f32
//!
//! [params]                     # simulate
//! r = 10.0
//! a = 0.5
//!
//! [grid]                       # sweep, transition
//! a_min = 0.0
//! a_max = 1.6
//! delta_a = 0.02
//! r_min = 2.0
//! r_max = 30.0
//! delta_r = 1.0
//!
//! [curve]                      # gini-curve
//! r = 10.0
//! a_min = 0.0
//! a_max = 1.6
//! delta_a = 0.02
//!
//! [protocol]
//! lattice_side = 64            # rings get lattice_side^2 sites
//! transient = 2000
//! window = 50
//! realizations = 10
//! master_seed = 1              # at most 2^63 - 1 here; --seed takes any u64
//! init_low = 1.0
//! init_high = 100.0
//!
//! [analysis]
//! bins = 100
//! threshold = 0.96
//! min_bin_count = 1            # 1 fits every nonzero bin
//! # powerlaw_min_x = 2.0       # unset: no cut
//! final_columns = false        # add H_final, gini_final to sweep files
//! ```
//!
//! `simulate` runs `transient + window` iterations of one lattice.

use std::fmt;

use anyhow::{anyhow, bail, Context};
use cmlwealth::fit::FitOptions;
use cmlwealth::{Analysis, ModelParams, SamplingProtocol, SweepGrid, Topology};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Simulate,
    Sweep,
    Transition,
    GiniCurve,
    Selftest,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Simulate => "simulate",
            Command::Sweep => "sweep",
            Command::Transition => "transition",
            Command::GiniCurve => "gini-curve",
            Command::Selftest => "selftest",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Scalar {
    F32,
    #[default]
    F64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSpec {
    pub r: f64,
    pub a_min: f64,
    pub a_max: f64,
    pub delta_a: f64,
}

impl CurveSpec {
    fn as_grid(&self) -> SweepGrid {
        SweepGrid { a_min: self.a_min, a_max: self.a_max, delta_a: self.delta_a, r_min: self.r, r_max: self.r, delta_r: 1.0 }
    }

    pub fn a_values(&self) -> cmlwealth::Result<Vec<f64>> {
        self.as_grid().a_values()
    }
}

/// A validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub topology: Topology,
    pub source: Topology,
    pub target: Topology,
    pub topologies: Vec<Topology>,
    pub out: String,
    pub workers: usize,
    pub force: bool,
    pub scalar: Scalar,
    pub r: f64,
    pub a: f64,
    pub grid: SweepGrid,
    pub curve: CurveSpec,
    pub protocol: SamplingProtocol,
    pub analysis: Analysis,
    pub final_columns: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: Command::Sweep,
            topology: Topology::Moore8,
            source: Topology::Ring1D,
            target: Topology::VonNeumann4,
            topologies: Topology::ALL.to_vec(),
            out: "cmlwealth-out".into(),
            workers: 0,
            force: false,
            scalar: Scalar::F64,
            r: 10.0,
            a: 0.5,
            grid: SweepGrid::default(),
            curve: CurveSpec { r: 10.0, a_min: 0.0, a_max: 1.6, delta_a: 0.02 },
            protocol: SamplingProtocol::desk(),
            analysis: Analysis::default(),
            final_columns: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    command: Option<Command>,
    topology: Option<String>,
    source: Option<String>,
    target: Option<String>,
    topologies: Option<Vec<String>>,
    out: Option<String>,
    workers: Option<usize>,
    force: Option<bool>,
    scalar: Option<Scalar>,
    params: Option<ParamsSection>,
    grid: Option<GridSection>,
    curve: Option<CurveSection>,
    protocol: Option<ProtocolSection>,
    analysis: Option<AnalysisSection>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsSection {
    r: Option<f64>,
    a: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSection {
    a_min: Option<f64>,
    a_max: Option<f64>,
    delta_a: Option<f64>,
    r_min: Option<f64>,
    r_max: Option<f64>,
    delta_r: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveSection {
    r: Option<f64>,
    a_min: Option<f64>,
    a_max: Option<f64>,
    delta_a: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProtocolSection {
    lattice_side: Option<usize>,
    transient: Option<u64>,
    window: Option<u64>,
    realizations: Option<u32>,
    master_seed: Option<u64>,
    init_low: Option<f64>,
    init_high: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnalysisSection {
    bins: Option<usize>,
    threshold: Option<f64>,
    min_bin_count: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    powerlaw_min_x: Option<f64>,
    final_columns: Option<bool>,
}

fn topology(key: &str, name: &str) -> anyhow::Result<Topology> {
    name.parse().map_err(|e| anyhow!("`{key}`: {e}"))
}

/// Parses and validates a config document; `command` must be present.
pub fn parse_config(text: &str) -> anyhow::Result<RunConfig> {
    parse_config_with(text, None)
}

/// As [`parse_config`], with `command` taken from `command` when given.
pub fn parse_config_with(text: &str, command: Option<Command>) -> anyhow::Result<RunConfig> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| anyhow!("invalid config: {e}"))?;
    let d = RunConfig::default();
    let params = file.params.unwrap_or_default();
    let grid = file.grid.unwrap_or_default();
    let curve = file.curve.unwrap_or_default();
    let protocol = file.protocol.unwrap_or_default();
    let analysis = file.analysis.unwrap_or_default();

    let topologies = match file.topologies {
        Some(names) => names.iter().map(|n| topology("topologies", n)).collect::<anyhow::Result<_>>()?,
        None => d.topologies.clone(),
    };
    let cfg = RunConfig {
        command: command
            .or(file.command)
            .ok_or_else(|| anyhow!("missing key `command` (simulate | sweep | transition | gini-curve | selftest)"))?,
        topology: file.topology.map_or(Ok(d.topology), |n| topology("topology", &n))?,
        source: file.source.map_or(Ok(d.source), |n| topology("source", &n))?,
        target: file.target.map_or(Ok(d.target), |n| topology("target", &n))?,
        topologies,
        out: file.out.unwrap_or(d.out),
        workers: file.workers.unwrap_or(d.workers),
        force: file.force.unwrap_or(d.force),
        scalar: file.scalar.unwrap_or(d.scalar),
        r: params.r.unwrap_or(d.r),
        a: params.a.unwrap_or(d.a),
        grid: SweepGrid {
            a_min: grid.a_min.unwrap_or(d.grid.a_min),
            a_max: grid.a_max.unwrap_or(d.grid.a_max),
            delta_a: grid.delta_a.unwrap_or(d.grid.delta_a),
            r_min: grid.r_min.unwrap_or(d.grid.r_min),
            r_max: grid.r_max.unwrap_or(d.grid.r_max),
            delta_r: grid.delta_r.unwrap_or(d.grid.delta_r),
        },
        curve: CurveSpec {
            r: curve.r.unwrap_or(d.curve.r),
            a_min: curve.a_min.unwrap_or(d.curve.a_min),
            a_max: curve.a_max.unwrap_or(d.curve.a_max),
            delta_a: curve.delta_a.unwrap_or(d.curve.delta_a),
        },
        protocol: SamplingProtocol {
            lattice_side: protocol.lattice_side.unwrap_or(d.protocol.lattice_side),
            transient: protocol.transient.unwrap_or(d.protocol.transient),
            window: protocol.window.unwrap_or(d.protocol.window),
            realizations: protocol.realizations.unwrap_or(d.protocol.realizations),
            master_seed: protocol.master_seed.unwrap_or(d.protocol.master_seed),
            init_low: protocol.init_low.unwrap_or(d.protocol.init_low),
            init_high: protocol.init_high.unwrap_or(d.protocol.init_high),
        },
        analysis: Analysis {
            bins: analysis.bins.unwrap_or(d.analysis.bins),
            fit: FitOptions {
                threshold: analysis.threshold.unwrap_or(d.analysis.fit.threshold),
                min_bin_count: analysis.min_bin_count.unwrap_or(d.analysis.fit.min_bin_count),
                powerlaw_min_x: analysis.powerlaw_min_x,
            },
        },
        final_columns: analysis.final_columns.unwrap_or(d.final_columns),
    };
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    /// Checks every field the command uses.
    pub fn validate(&self) -> anyhow::Result<()> {
        match self.command {
            Command::Simulate => {
                self.protocol.validate().context("[protocol]")?;
                ModelParams::new(self.r, self.a).context("[params]")?;
            }
            Command::Sweep | Command::Transition => {
                self.protocol.validate_sampling().context("[protocol]")?;
                self.grid.validate().context("[grid]")?;
            }
            Command::GiniCurve => {
                self.protocol.validate_sampling().context("[protocol]")?;
                self.curve.as_grid().validate().context("[curve]")?;
            }
            Command::Selftest => {}
        }
        self.analysis.validate().context("[analysis]")?;
        if self.analysis.fit.min_bin_count == 0 {
            bail!("[analysis] min_bin_count must be >= 1");
        }
        if let Some(x) = self.analysis.fit.powerlaw_min_x {
            if !(x > 0.0) || !x.is_finite() {
                bail!("[analysis] powerlaw_min_x must be positive, got {x}");
            }
        }
        if self.command == Command::Transition && self.source == self.target {
            bail!("`source` and `target` must differ, both are {}", self.source);
        }
        if self.command == Command::GiniCurve {
            if self.topologies.is_empty() {
                bail!("`topologies` must name at least one topology");
            }
            let mut seen = self.topologies.clone();
            seen.sort();
            seen.dedup();
            if seen.len() != self.topologies.len() {
                bail!("`topologies` lists a topology twice");
            }
        }
        if self.out.is_empty() {
            bail!("`out` must not be empty");
        }
        Ok(())
    }

    /// TOML text that parses back to this config, with every key written out.
    pub fn to_toml(&self) -> anyhow::Result<String> {
        let name = |t: Topology| t.name().to_string();
        let file = ConfigFile {
            command: Some(self.command),
            topology: Some(name(self.topology)),
            source: Some(name(self.source)),
            target: Some(name(self.target)),
            topologies: Some(self.topologies.iter().copied().map(name).collect()),
            out: Some(self.out.clone()),
            workers: Some(self.workers),
            force: Some(self.force),
            scalar: Some(self.scalar),
            params: Some(ParamsSection { r: Some(self.r), a: Some(self.a) }),
            grid: Some(GridSection {
                a_min: Some(self.grid.a_min),
                a_max: Some(self.grid.a_max),
                delta_a: Some(self.grid.delta_a),
                r_min: Some(self.grid.r_min),
                r_max: Some(self.grid.r_max),
                delta_r: Some(self.grid.delta_r),
            }),
            curve: Some(CurveSection {
                r: Some(self.curve.r),
                a_min: Some(self.curve.a_min),
                a_max: Some(self.curve.a_max),
                delta_a: Some(self.curve.delta_a),
            }),
            protocol: Some(ProtocolSection {
                lattice_side: Some(self.protocol.lattice_side),
                transient: Some(self.protocol.transient),
                window: Some(self.protocol.window),
                realizations: Some(self.protocol.realizations),
                master_seed: Some(self.protocol.master_seed),
                init_low: Some(self.protocol.init_low),
                init_high: Some(self.protocol.init_high),
            }),
            analysis: Some(AnalysisSection {
                bins: Some(self.analysis.bins),
                threshold: Some(self.analysis.fit.threshold),
                min_bin_count: Some(self.analysis.fit.min_bin_count),
                powerlaw_min_x: self.analysis.fit.powerlaw_min_x,
                final_columns: Some(self.final_columns),
            }),
        };
        toml::to_string(&file).context("cannot write config as TOML")
    }
}
