//! Parameter sweeps over energy-side axes.
//!
//! Every axis here leaves the radio phase untouched, so each CoMP mode's
//! radio traces are computed once and replayed for every axis value and
//! sharing setting.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::config::ScenarioConfig;
use crate::energy::{AlphaMap, SharingPolicy};
use crate::engine::{radio_traces, run_monte_carlo_with_traces, RunTotals};
use crate::error::{Error, Result};
use crate::metrics::Estimate;
use crate::output::fmt_sig;
use crate::radio::CompMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    StorageCapacity,
    StorageFactor,
    LineLossPct,
    SolarCapacity,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 4] = [
        SweepAxis::StorageCapacity,
        SweepAxis::StorageFactor,
        SweepAxis::LineLossPct,
        SweepAxis::SolarCapacity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::StorageCapacity => "STORAGE_CAPACITY",
            SweepAxis::StorageFactor => "STORAGE_FACTOR",
            SweepAxis::LineLossPct => "LINE_LOSS_PCT",
            SweepAxis::SolarCapacity => "SOLAR_CAPACITY",
        }
    }

    /// Axis label with units, for plots.
    pub fn label(self) -> &'static str {
        match self {
            SweepAxis::StorageCapacity => "storage capacity (Wh)",
            SweepAxis::StorageFactor => "storage factor",
            SweepAxis::LineLossPct => "line loss (%)",
            SweepAxis::SolarCapacity => "solar panel capacity (W)",
        }
    }

    fn check(self, v: f64) -> Result<()> {
        let ok = v.is_finite()
            && match self {
                SweepAxis::StorageCapacity => v >= 0.0,
                SweepAxis::StorageFactor => (0.0..=1.0).contains(&v),
                SweepAxis::LineLossPct => (0.0..=100.0).contains(&v),
                SweepAxis::SolarCapacity => v >= 0.0,
            };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(
                "sweep",
                format!("{} value {v} out of range", self.as_str()),
            ))
        }
    }

    /// `base` with this axis set to `value`.
    pub fn apply(self, base: &ScenarioConfig, value: f64) -> Result<ScenarioConfig> {
        self.check(value)?;
        let mut cfg = base.clone();
        match self {
            SweepAxis::StorageCapacity => {
                cfg.storage.capacity_wh = value;
                cfg.storage.level_wh = cfg.storage.level_wh.min(value);
            }
            SweepAxis::StorageFactor => cfg.storage.factor = value,
            SweepAxis::LineLossPct => cfg.alpha = AlphaMap::from_line_loss_pct(value)?,
            SweepAxis::SolarCapacity => {
                // storage grows in proportion to the panel
                let per_w = base.storage.capacity_wh / base.solar.panel_capacity_w;
                cfg.solar.panel_capacity_w = value;
                cfg.solar.c_s_w = value;
                cfg.storage.capacity_wh = per_w * value;
                cfg.storage.level_wh = cfg.storage.level_wh.min(cfg.storage.capacity_wh);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let up = s.trim().to_ascii_uppercase();
        SweepAxis::ALL.into_iter().find(|a| a.as_str() == up).ok_or_else(|| {
            format!(
                "unknown sweep axis `{s}` (expected STORAGE_CAPACITY, STORAGE_FACTOR, LINE_LOSS_PCT or SOLAR_CAPACITY)"
            )
        })
    }
}

/// A CoMP mode with sharing on or off.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scenario {
    pub mode: CompMode,
    pub sharing: bool,
}

impl Scenario {
    pub fn label(&self) -> String {
        format!("{}_{}", self.mode, if self.sharing { "share" } else { "noshare" })
    }

    /// Every mode in `modes`, each with and without sharing.
    pub fn cross(modes: &[CompMode]) -> Vec<Scenario> {
        modes
            .iter()
            .flat_map(|&mode| [false, true].map(|sharing| Scenario { mode, sharing }))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub scenarios: Vec<Scenario>,
}

impl SweepSpec {
    /// Parses `AXIS=v1,v2,...`.
    pub fn parse(text: &str, scenarios: Vec<Scenario>) -> Result<Self> {
        let (axis, values) = text
            .split_once('=')
            .ok_or_else(|| Error::invalid("sweep", "expected AXIS=v1,v2,..."))?;
        let axis: SweepAxis = axis.parse().map_err(|e: String| Error::invalid("sweep", e))?;
        let values = values
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::invalid("sweep", format!("bad value `{}`", v.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        let spec = SweepSpec {
            axis,
            values,
            scenarios,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::invalid("sweep", "no values"));
        }
        if self.scenarios.is_empty() {
            return Err(Error::invalid("sweep", "no scenarios"));
        }
        for v in &self.values {
            self.axis.check(*v)?;
        }
        if self.values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("sweep", "values must be strictly increasing"));
        }
        Ok(())
    }

    pub fn run_count(&self) -> usize {
        self.values.len() * self.scenarios.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub axis_value: f64,
    pub scenario: Scenario,
    pub totals: RunTotals,
}

pub const SWEEP_HEADER: &str = "axis_value,scenario,metric,mean,stderr";

/// Named run-level metrics written per sweep point.
pub fn sweep_metrics(t: &RunTotals) -> Vec<(&'static str, Estimate)> {
    let plain = |v: f64| Estimate {
        mean: v,
        stderr: f64::NAN,
    };
    vec![
        ("grid_wh", t.grid_wh),
        ("solar_wh", t.solar_wh),
        ("demand_wh", t.demand_wh),
        ("conventional_wh", t.conventional_wh),
        ("wastage_wh", t.wastage_wh),
        ("line_loss_wh", t.line_loss_wh),
        ("shared_wh", t.shared_wh),
        ("throughput_bps", t.throughput_bps),
        ("savings_solar_pct", t.savings_solar_pct),
        ("savings_conv_pct", t.savings_conv_pct),
        ("ee_bits_per_j", t.ee_bits_per_j),
        ("eci_j_per_bit", plain(t.eci_j_per_bit)),
        ("mean_hourly_ee", plain(t.mean_hourly_ee)),
        ("undefined_ee_hours", plain(t.undefined_ee_hours as f64)),
    ]
}

fn write_point<W: Write>(out: &mut W, p: &SweepPoint) -> std::io::Result<()> {
    for (name, e) in sweep_metrics(&p.totals) {
        writeln!(
            out,
            "{},{},{},{},{}",
            fmt_sig(p.axis_value),
            p.scenario.label(),
            name,
            fmt_sig(e.mean),
            fmt_sig(e.stderr)
        )?;
    }
    out.flush()
}

/// Runs every (value, scenario) pair, writing long-format rows to `out` as
/// each point completes.
pub fn run_sweep<W: Write>(base: &ScenarioConfig, spec: &SweepSpec, out: &mut W) -> Result<Vec<SweepPoint>> {
    spec.validate()?;
    base.validate()?;
    let io_err = |e| Error::io("sweep output", e);
    writeln!(out, "{SWEEP_HEADER}").map_err(io_err)?;

    let mut modes: Vec<CompMode> = Vec::new();
    for s in &spec.scenarios {
        if !modes.contains(&s.mode) {
            modes.push(s.mode);
        }
    }
    let mut traces = Vec::with_capacity(modes.len());
    for &mode in &modes {
        let cfg = ScenarioConfig {
            comp_mode: mode,
            ..base.clone()
        };
        traces.push(radio_traces(&cfg)?);
    }

    let mut points = Vec::with_capacity(spec.run_count());
    for &value in &spec.values {
        let at_value = spec.axis.apply(base, value)?;
        for sc in &spec.scenarios {
            let mut cfg = at_value.clone();
            cfg.comp_mode = sc.mode;
            cfg.sharing = SharingPolicy {
                enabled: sc.sharing,
                ..base.sharing
            };
            let slot = modes.iter().position(|m| *m == sc.mode).expect("mode collected");
            let run = run_monte_carlo_with_traces(&cfg, &traces[slot])?;
            let point = SweepPoint {
                axis_value: value,
                scenario: *sc,
                totals: run.totals,
            };
            write_point(out, &point).map_err(io_err)?;
            points.push(point);
        }
    }
    Ok(points)
}
