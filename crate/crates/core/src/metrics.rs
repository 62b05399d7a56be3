//! Hourly performance metrics: on-grid savings, throughput, energy
//! efficiency and its reciprocal, the energy consumption index.

use crate::energy::LedgerRow;
use crate::error::{Error, Result};
use crate::radio::{ue_throughput, ServingSet};

/// Share of total demand met by solar energy, in percent.
pub fn grid_savings_solar(rows: &[LedgerRow]) -> Result<f64> {
    let demand: f64 = rows.iter().map(|r| r.demand).sum();
    if !(demand > 0.0) {
        return Err(Error::invalid("demand", "total network demand is zero"));
    }
    let solar: f64 = rows.iter().map(|r| r.solar_used).sum();
    Ok((100.0 * solar / demand).clamp(0.0, 100.0))
}

/// Grid savings against an always-on, grid-only network, in percent.
pub fn savings_vs_conventional(grid_used: f64, conventional_demand: f64) -> f64 {
    if conventional_demand <= 0.0 {
        return 0.0;
    }
    100.0 * (conventional_demand - grid_used) / conventional_demand
}

/// Sum of per-UE Shannon rates; JT users count once at their joint SINR.
pub fn network_throughput(serving: &[ServingSet], rb_bandwidth_hz: f64) -> f64 {
    serving.iter().map(|s| ue_throughput(s.sinr, rb_bandwidth_hz)).sum()
}

/// Bits per joule of grid energy; `None` when no grid power is drawn.
pub fn energy_efficiency(throughput_bps: f64, grid_w: f64) -> Option<f64> {
    (grid_w > 0.0).then(|| throughput_bps / grid_w)
}

/// Grid joules per bit. Zero when the grid is idle.
pub fn eci(grid_w: f64, throughput_bps: f64) -> Result<f64> {
    if grid_w <= 0.0 {
        return Ok(0.0);
    }
    if !(throughput_bps > 0.0) {
        return Err(Error::invalid("throughput", "ECI undefined at zero throughput"));
    }
    Ok(grid_w / throughput_bps)
}

/// Network-wide figures for one simulated hour of one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HourRecord {
    pub throughput_bps: f64,
    pub grid_w: f64,
    pub solar_w: f64,
    pub demand_w: f64,
    pub conventional_w: f64,
    pub generation_wh: f64,
    pub wastage_wh: f64,
    pub line_loss_wh: f64,
    pub shared_wh: f64,
    pub storage_wh: f64,
    pub sleeping_sites: usize,
    pub savings_solar_pct: f64,
    pub savings_conv_pct: f64,
}

impl HourRecord {
    pub fn from_ledger(
        rows: &[LedgerRow],
        throughput_bps: f64,
        conventional_w: f64,
        sleeping_sites: usize,
    ) -> Result<Self> {
        let sum = |f: fn(&LedgerRow) -> f64| rows.iter().map(f).sum::<f64>();
        let grid_w = sum(|r| r.grid_used);
        Ok(HourRecord {
            throughput_bps,
            grid_w,
            solar_w: sum(|r| r.solar_used),
            demand_w: sum(|r| r.demand),
            conventional_w,
            generation_wh: sum(|r| r.generation),
            wastage_wh: sum(|r| r.wastage),
            line_loss_wh: sum(|r| r.line_loss),
            shared_wh: sum(|r| r.shared_out),
            storage_wh: sum(|r| r.storage_after),
            sleeping_sites,
            savings_solar_pct: grid_savings_solar(rows)?,
            savings_conv_pct: savings_vs_conventional(grid_w, conventional_w),
        })
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        if n == 0 {
            return Estimate {
                mean: f64::NAN,
                stderr: f64::NAN,
            };
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        if n < 2 {
            return Estimate { mean, stderr: 0.0 };
        }
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        Estimate {
            mean,
            stderr: (var / n as f64).sqrt(),
        }
    }

    /// Ratio of sample means `x̄ / ȳ` with a first-order (delta method)
    /// standard error. Infinite when `ȳ = 0` and `x̄ > 0`.
    pub fn ratio(xs: &[f64], ys: &[f64]) -> Self {
        let n = xs.len().min(ys.len());
        if n == 0 {
            return Estimate {
                mean: f64::NAN,
                stderr: f64::NAN,
            };
        }
        let nf = n as f64;
        let mx = xs[..n].iter().sum::<f64>() / nf;
        let my = ys[..n].iter().sum::<f64>() / nf;
        if my <= 0.0 {
            let mean = if mx > 0.0 { f64::INFINITY } else { f64::NAN };
            return Estimate { mean, stderr: f64::NAN };
        }
        let r = mx / my;
        if n < 2 {
            return Estimate { mean: r, stderr: 0.0 };
        }
        let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
        for (x, y) in xs[..n].iter().zip(&ys[..n]) {
            sxx += (x - mx).powi(2);
            syy += (y - my).powi(2);
            sxy += (x - mx) * (y - my);
        }
        let d = nf - 1.0;
        let var = (sxx / d - 2.0 * r * sxy / d + r * r * syy / d) / (my * my * nf);
        Estimate {
            mean: r,
            stderr: var.max(0.0).sqrt(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SiteId;
    use crate::radio::CompMode;
    use approx::assert_abs_diff_eq;

    fn row(solar: f64, demand: f64) -> LedgerRow {
        LedgerRow {
            solar_used: solar,
            grid_used: demand - solar,
            demand,
            ..LedgerRow::default()
        }
    }

    fn ue(sinr: f64, mode: CompMode) -> ServingSet {
        ServingSet {
            mode,
            primary: SiteId(0),
            secondary: (mode == CompMode::Jt).then_some(SiteId(1)),
            sinr,
        }
    }

    #[test]
    fn solar_savings_examples() {
        assert_eq!(grid_savings_solar(&[row(100.0, 200.0); 19]).unwrap(), 50.0);
        assert_eq!(grid_savings_solar(&[row(200.0, 200.0); 3]).unwrap(), 100.0);
        assert_eq!(grid_savings_solar(&[row(0.0, 150.0); 3]).unwrap(), 0.0);
        assert!(grid_savings_solar(&[row(0.0, 0.0)]).is_err());
    }

    #[test]
    fn conventional_examples() {
        assert_eq!(savings_vs_conventional(0.0, 1000.0), 100.0);
        assert_eq!(savings_vs_conventional(1000.0, 1000.0), 0.0);
        // 19 awake-idle sites vs a night with five of them asleep
        let idle = 144.175_488_9;
        let hybrid = 14.0 * idle + 5.0 * 54.0;
        assert_abs_diff_eq!(savings_vs_conventional(hybrid, 19.0 * idle), 16.4594, epsilon = 1e-3);
    }

    #[test]
    fn throughput_examples() {
        assert_eq!(network_throughput(&[ue(1.0, CompMode::Dps)], 180e3), 180e3);
        let one = network_throughput(&[ue(7.0, CompMode::Jt)], 180e3);
        let two = network_throughput(&[ue(7.0, CompMode::Jt), ue(7.0, CompMode::Jt)], 180e3);
        assert_eq!(two, 2.0 * one);
        let s = 10f64.powf(3.325);
        let fifty = network_throughput(&vec![ue(s, CompMode::NonComp); 50], 180e3);
        assert_abs_diff_eq!(fifty, 99.4e6, epsilon = 0.1e6);
    }

    #[test]
    fn efficiency_examples() {
        assert_abs_diff_eq!(energy_efficiency(99.35e6, 1000.0).unwrap(), 99_350.0, epsilon = 1e-6);
        assert_eq!(energy_efficiency(99.35e6, 0.0), None);
        assert_eq!(energy_efficiency(0.0, 10.0), Some(0.0));
        assert_abs_diff_eq!(eci(1000.0, 99.35e6).unwrap(), 1.0065e-5, epsilon = 1e-9);
        assert_eq!(eci(0.0, 5.0).unwrap(), 0.0);
        assert!(eci(10.0, 0.0).is_err());
        let ee = energy_efficiency(3.3e6, 420.0).unwrap();
        assert_abs_diff_eq!(ee * eci(420.0, 3.3e6).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn estimate_basics() {
        let e = Estimate::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.mean, 2.5);
        assert_abs_diff_eq!(e.stderr, (1.666_666_7f64 / 4.0).sqrt(), epsilon = 1e-6);
        assert_eq!(Estimate::from_samples(&[5.0]).stderr, 0.0);
        let r = Estimate::ratio(&[2.0, 4.0], &[1.0, 2.0]);
        assert_eq!(r.mean, 2.0);
        assert_abs_diff_eq!(r.stderr, 0.0, epsilon = 1e-12);
        assert_eq!(Estimate::ratio(&[1.0], &[0.0]).mean, f64::INFINITY);
    }
}
