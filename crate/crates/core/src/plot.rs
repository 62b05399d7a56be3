//! SVG charts. Each chart is drawn from data that is also written as CSV.

use std::path::{Path, PathBuf};

use plotters::prelude::*;

use crate::engine::RunResult;
use crate::error::{Error, Result};
use crate::output::sinr_cdf_table;
use crate::radio::CompMode;
use crate::sweep::{sweep_metrics, SweepAxis, SweepPoint};

const PALETTE: [RGBColor; 6] = [
    RGBColor(31, 119, 180),
    RGBColor(255, 127, 14),
    RGBColor(44, 160, 44),
    RGBColor(214, 39, 40),
    RGBColor(148, 103, 189),
    RGBColor(140, 86, 75),
];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn plot_err(e: impl std::fmt::Display) -> Error {
    Error::Plot(e.to_string())
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        let pad = lo.abs().max(1.0) * 0.05;
        return (lo - pad, hi + pad);
    }
    let pad = (hi - lo) * 0.05;
    (lo - pad, hi + pad)
}

/// Line chart of finite points; non-finite points are dropped.
pub fn line_chart(path: &Path, title: &str, x_label: &str, y_label: &str, series: &[Series]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let finite: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| {
            s.points
                .iter()
                .copied()
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .collect()
        })
        .collect();
    let all = finite.iter().flatten();
    let (xmin, xmax) = all
        .clone()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (ymin, ymax) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
    let (x0, x1) = padded(xmin, xmax);
    let (y0, y1) = padded(ymin, ymax);

    let root = SVGBackend::new(path, (900, 560)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(80)
        .build_cartesian_2d(x0..x1, y0..y1)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc(x_label)
        .y_desc(y_label)
        .draw()
        .map_err(plot_err)?;
    for (i, (s, pts)) in series.iter().zip(finite).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        chart
            .draw_series(LineSeries::new(pts, color.stroke_width(2)))
            .map_err(plot_err)?
            .label(s.label.clone())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], color.stroke_width(2)));
    }
    if series.len() > 1 {
        chart
            .configure_series_labels()
            .background_style(WHITE.mix(0.85))
            .border_style(BLACK)
            .draw()
            .map_err(plot_err)?;
    }
    root.present().map_err(plot_err)?;
    Ok(())
}

/// One CDF with a curve per CoMP mode.
pub fn plot_sinr_cdf(samples: &[(CompMode, Vec<f64>)], path: &Path) -> Result<()> {
    let table = sinr_cdf_table(samples);
    let series: Vec<Series> = samples
        .iter()
        .enumerate()
        .map(|(k, (mode, _))| Series {
            label: mode.to_string(),
            points: table.iter().map(|(p, row)| (row[k], *p)).collect(),
        })
        .collect();
    line_chart(path, "Empirical CDF of received SINR", "SINR (dB)", "CDF", &series)
}

/// The five hourly charts of a single run. Returns the files written.
pub fn plot_timeseries(result: &RunResult, dir: &Path) -> Result<Vec<PathBuf>> {
    let hourly = |f: &dyn Fn(&crate::engine::HourSummary) -> f64| -> Vec<(f64, f64)> {
        result.hours.iter().map(|h| (h.hour as f64, f(h))).collect()
    };
    let one = |label: &str, points| {
        vec![Series {
            label: label.into(),
            points,
        }]
    };
    let charts = [
        (
            "throughput.svg",
            "Network throughput",
            "throughput (bit/s)",
            one("throughput", hourly(&|h| h.throughput_bps.mean)),
        ),
        (
            "grid_power.svg",
            "On-grid power",
            "grid power (W)",
            one("grid", hourly(&|h| h.grid_w.mean)),
        ),
        (
            "solar_power.svg",
            "Solar power used",
            "solar power (W)",
            one("solar", hourly(&|h| h.solar_w.mean)),
        ),
        (
            "savings.svg",
            "On-grid savings",
            "savings (%)",
            vec![
                Series {
                    label: "solar share of demand".into(),
                    points: hourly(&|h| h.savings_solar_pct.mean),
                },
                Series {
                    label: "vs conventional network".into(),
                    points: hourly(&|h| h.savings_conv_pct.mean),
                },
            ],
        ),
        (
            "eci.svg",
            "Energy consumption index",
            "ECI (J/bit)",
            one("eci", hourly(&|h| h.eci_j_per_bit.unwrap_or(f64::NAN))),
        ),
    ];
    let mut written = Vec::new();
    for (file, title, y, series) in charts {
        let path = dir.join(file);
        line_chart(&path, title, "hour", y, &series)?;
        written.push(path);
    }
    Ok(written)
}

/// One chart per headline metric, one curve per scenario.
pub fn plot_sweep(points: &[SweepPoint], axis: SweepAxis, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut labels: Vec<String> = Vec::new();
    for p in points {
        let l = p.scenario.label();
        if !labels.contains(&l) {
            labels.push(l);
        }
    }
    let mut written = Vec::new();
    for (metric, y) in [
        ("grid_wh", "grid energy (Wh)"),
        ("ee_bits_per_j", "energy efficiency (bit/J)"),
        ("savings_solar_pct", "solar share of demand (%)"),
    ] {
        let series: Vec<Series> = labels
            .iter()
            .map(|l| Series {
                label: l.clone(),
                points: points
                    .iter()
                    .filter(|p| &p.scenario.label() == l)
                    .map(|p| {
                        let v = sweep_metrics(&p.totals)
                            .into_iter()
                            .find(|(n, _)| *n == metric)
                            .map_or(f64::NAN, |(_, e)| e.mean);
                        (p.axis_value, v)
                    })
                    .collect(),
            })
            .collect();
        let path = dir.join(format!("sweep_{}_{metric}.svg", axis.as_str().to_ascii_lowercase()));
        line_chart(&path, &format!("{y} vs {}", axis.label()), axis.label(), y, &series)?;
        written.push(path);
    }
    Ok(written)
}
