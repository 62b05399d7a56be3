//! CSV writers for run results. Floats carry six significant digits so
//! files are byte-stable and diff cleanly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::engine::{HourSummary, RunResult};
use crate::error::{Error, Result};
use crate::metrics::Estimate;
use crate::radio::CompMode;

pub const TIMESERIES_HEADER: &str =
    "hour,throughput_bps,grid_w,solar_w,savings_solar_pct,savings_conv_pct,ee_bits_per_j,eci_j_per_bit,ee_defined";

/// `x` rounded to six significant digits, printed without exponent.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{x:.5e}").parse().expect("float formatting round-trips");
    format!("{rounded}")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn write_all(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let mut w = create(path)?;
    f(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

fn timeseries_row(h: &HourSummary) -> String {
    let (ee, defined) = match h.ee_bits_per_j {
        Some(e) => (fmt_sig(e.mean), 1),
        None => ("nan".to_string(), 0),
    };
    format!(
        "{},{},{},{},{},{},{},{},{}",
        h.hour,
        fmt_sig(h.throughput_bps.mean),
        fmt_sig(h.grid_w.mean),
        fmt_sig(h.solar_w.mean),
        fmt_sig(h.savings_solar_pct.mean),
        fmt_sig(h.savings_conv_pct.mean),
        ee,
        fmt_sig(h.eci_j_per_bit.unwrap_or(f64::NAN)),
        defined
    )
}

/// Hourly means, one row per simulated hour.
pub fn emit_timeseries(result: &RunResult, path: &Path) -> Result<()> {
    write_all(path, |w| {
        writeln!(w, "{TIMESERIES_HEADER}")?;
        for h in &result.hours {
            writeln!(w, "{}", timeseries_row(h))?;
        }
        Ok(())
    })
}

/// Hourly means with standard errors and the extra power columns.
pub fn emit_hourly_detail(result: &RunResult, path: &Path) -> Result<()> {
    let pair = |e: Estimate| format!("{},{}", fmt_sig(e.mean), fmt_sig(e.stderr));
    write_all(path, |w| {
        writeln!(
            w,
            "hour,throughput_bps,throughput_se,grid_w,grid_se,solar_w,solar_se,demand_w,demand_se,\
             conventional_w,conventional_se,savings_solar_pct,savings_solar_se,savings_conv_pct,savings_conv_se,\
             sleeping_sites,sleeping_se,ee_bits_per_j,ee_se"
        )?;
        for h in &result.hours {
            let ee = h.ee_bits_per_j.map_or("nan,nan".to_string(), pair);
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{}",
                h.hour,
                pair(h.throughput_bps),
                pair(h.grid_w),
                pair(h.solar_w),
                pair(h.demand_w),
                pair(h.conventional_w),
                pair(h.savings_solar_pct),
                pair(h.savings_conv_pct),
                pair(h.sleeping_sites),
                ee
            )?;
        }
        Ok(())
    })
}

/// Run-level totals as `metric,mean,stderr`.
pub fn emit_totals(result: &RunResult, path: &Path) -> Result<()> {
    write_all(path, |w| {
        writeln!(w, "metric,mean,stderr")?;
        for (name, e) in crate::sweep::sweep_metrics(&result.totals) {
            writeln!(w, "{name},{},{}", fmt_sig(e.mean), fmt_sig(e.stderr))?;
        }
        Ok(())
    })
}

/// Empirical quantile of sorted data at probability `p` (nearest rank).
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let rank = (p.clamp(0.0, 1.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

pub const CDF_POINTS: usize = 200;

/// SINR quantile table: one row per CDF level, one column per mode.
pub fn sinr_cdf_table(samples: &[(CompMode, Vec<f64>)]) -> Vec<(f64, Vec<f64>)> {
    let sorted: Vec<Vec<f64>> = samples
        .iter()
        .map(|(_, s)| {
            let mut s = s.clone();
            s.sort_by(f64::total_cmp);
            s
        })
        .collect();
    (0..=CDF_POINTS)
        .map(|i| {
            let p = i as f64 / CDF_POINTS as f64;
            (p, sorted.iter().map(|s| quantile(s, p)).collect())
        })
        .collect()
}

pub fn emit_sinr_cdf(samples: &[(CompMode, Vec<f64>)], path: &Path) -> Result<()> {
    let table = sinr_cdf_table(samples);
    write_all(path, |w| {
        write!(w, "cdf")?;
        for (m, _) in samples {
            write!(w, ",{m}_sinr_db")?;
        }
        writeln!(w)?;
        for (p, row) in &table {
            write!(w, "{}", fmt_sig(*p))?;
            for v in row {
                write!(w, ",{}", fmt_sig(*v))?;
            }
            writeln!(w)?;
        }
        Ok(())
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    write_all(path, |w| w.write_all(text.as_bytes()))
}
