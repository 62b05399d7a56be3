//! Load-dependent macro BS input power with sleep mode.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PowerModelParams {
    pub eta_pa: f64,
    pub p_bb_w: f64,
    pub p_rf_w: f64,
    pub sigma_feed: f64,
    pub sigma_dc: f64,
    pub sigma_ms: f64,
    pub sigma_cool: f64,
    pub sectors: u32,
    pub p_max_dbm: f64,
    pub delta_p: f64,
    pub p_sleep_w: f64,
    /// Listed with the macro-BS parameter set but not used by the model.
    pub gamma: f64,
}

impl Default for PowerModelParams {
    fn default() -> Self {
        PowerModelParams {
            eta_pa: 0.306,
            p_bb_w: 29.4,
            p_rf_w: 12.9,
            sigma_feed: 0.5,
            sigma_dc: 0.075,
            sigma_ms: 0.09,
            sigma_cool: 0.1,
            sectors: 1,
            p_max_dbm: 43.0,
            delta_p: 4.2,
            p_sleep_w: 54.0,
            gamma: 0.15,
        }
    }
}

impl PowerModelParams {
    pub fn p_max_w(&self) -> f64 {
        10f64.powf(self.p_max_dbm / 10.0) / 1000.0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta_pa > 0.0 && self.eta_pa <= 1.0) {
            return Err(Error::invalid("eta_pa", "must lie in (0, 1]"));
        }
        for (name, v) in [
            ("sigma_feed", self.sigma_feed),
            ("sigma_dc", self.sigma_dc),
            ("sigma_ms", self.sigma_ms),
            ("sigma_cool", self.sigma_cool),
        ] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::invalid(name, "loss factor must lie in [0, 1)"));
            }
        }
        if self.sectors == 0 {
            return Err(Error::invalid("sectors", "must be at least 1"));
        }
        if !(self.p_bb_w >= 0.0 && self.p_rf_w >= 0.0) {
            return Err(Error::invalid("p_bb_w", "baseband and RF power must be non-negative"));
        }
        if !(self.delta_p >= 0.0) {
            return Err(Error::invalid("delta_p", "must be non-negative"));
        }
        if !(self.p_sleep_w >= 0.0) {
            return Err(Error::invalid("p_sleep_w", "must be non-negative"));
        }
        let p1 = sector_power_p1(self)?;
        if self.p_sleep_w >= p1 {
            return Err(Error::invalid("p_sleep_w", format!("must be below P1 = {p1:.2} W")));
        }
        Ok(())
    }
}

/// Power amplifier draw at full transmit power.
pub fn pa_power(params: &PowerModelParams) -> Result<f64> {
    let denom = params.eta_pa * (1.0 - params.sigma_feed);
    if denom == 0.0 {
        return Err(Error::invalid("eta_pa", "η_PA·(1 − σ_feed) is zero"));
    }
    Ok(params.p_max_w() / denom)
}

/// Maximum per-sector consumption.
pub fn sector_power_p1(params: &PowerModelParams) -> Result<f64> {
    let denom = (1.0 - params.sigma_dc) * (1.0 - params.sigma_ms) * (1.0 - params.sigma_cool);
    if denom == 0.0 {
        return Err(Error::invalid("sigma_dc", "a loss factor equals one"));
    }
    Ok((params.p_bb_w + params.p_rf_w + pa_power(params)?) / denom)
}

/// Input power for load `x`; a BS with zero load sleeps.
pub fn bs_input_power(params: &PowerModelParams, load: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&load) {
        return Err(Error::invalid("load", format!("{load} outside [0, 1]")));
    }
    let sectors = f64::from(params.sectors);
    if load == 0.0 {
        return Ok(sectors * params.p_sleep_w);
    }
    Ok(sectors * active_power(params, load)?)
}

/// Input power when sleep is not available: zero load is billed at the
/// active-idle level `P1 − Δp·P_MAX`.
pub fn bs_input_power_always_on(params: &PowerModelParams, load: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&load) {
        return Err(Error::invalid("load", format!("{load} outside [0, 1]")));
    }
    Ok(f64::from(params.sectors) * active_power(params, load)?)
}

fn active_power(params: &PowerModelParams, load: f64) -> Result<f64> {
    Ok(sector_power_p1(params)? + params.delta_p * params.p_max_w() * (load - 1.0))
}

/// Precomputed affine model for the simulation hot loop.
#[derive(Debug, Clone, Copy)]
pub struct PowerCurve {
    sleep_w: f64,
    full_w: f64,
    slope_w: f64,
}

impl PowerCurve {
    pub fn new(params: &PowerModelParams) -> Result<Self> {
        let sectors = f64::from(params.sectors);
        Ok(PowerCurve {
            sleep_w: sectors * params.p_sleep_w,
            full_w: sectors * sector_power_p1(params)?,
            slope_w: sectors * params.delta_p * params.p_max_w(),
        })
    }

    #[inline]
    pub fn input_power(&self, load: f64) -> f64 {
        if load <= 0.0 {
            self.sleep_w
        } else {
            self.full_w + self.slope_w * (load.min(1.0) - 1.0)
        }
    }

    #[inline]
    pub fn input_power_always_on(&self, load: f64) -> f64 {
        self.full_w + self.slope_w * (load.clamp(0.0, 1.0) - 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    // Reference values from Eq. 5-7 with P_MAX = 10^4.3 mW = 19.952623 W.
    const P_PA: f64 = 130.409_301_6;
    const P1: f64 = 227.976_506_1;

    #[test]
    fn pa_power_defaults_and_variants() {
        let p = PowerModelParams::default();
        assert_abs_diff_eq!(p.p_max_w(), 19.9526, epsilon = 1e-4);
        assert_abs_diff_eq!(pa_power(&p).unwrap(), P_PA, epsilon = 1e-6);

        let lossless = PowerModelParams {
            eta_pa: 1.0,
            sigma_feed: 0.0,
            ..p.clone()
        };
        assert_abs_diff_eq!(pa_power(&lossless).unwrap(), 19.95, epsilon = 0.01);

        let half = PowerModelParams {
            eta_pa: 0.5,
            sigma_feed: 0.5,
            ..p.clone()
        };
        assert_abs_diff_eq!(pa_power(&half).unwrap(), 79.81, epsilon = 0.01);

        let zero = PowerModelParams { eta_pa: 0.0, ..p };
        assert!(pa_power(&zero).is_err());
    }

    #[test]
    fn p1_defaults_and_variants() {
        let p = PowerModelParams::default();
        assert_abs_diff_eq!(sector_power_p1(&p).unwrap(), P1, epsilon = 1e-6);

        let lossless = PowerModelParams {
            sigma_dc: 0.0,
            sigma_ms: 0.0,
            sigma_cool: 0.0,
            ..p.clone()
        };
        assert_abs_diff_eq!(sector_power_p1(&lossless).unwrap(), 29.4 + 12.9 + P_PA, epsilon = 1e-6);

        // P_PA forced to zero via P_MAX → 0 W
        let no_pa = PowerModelParams {
            p_max_dbm: f64::NEG_INFINITY,
            ..p.clone()
        };
        assert_abs_diff_eq!(sector_power_p1(&no_pa).unwrap(), 55.84, epsilon = 0.01);

        let broken = PowerModelParams { sigma_cool: 1.0, ..p };
        assert!(sector_power_p1(&broken).is_err());
    }

    #[test]
    fn input_power_examples() {
        let p = PowerModelParams::default();
        assert_abs_diff_eq!(bs_input_power(&p, 1.0).unwrap(), P1, epsilon = 1e-6);
        assert_eq!(bs_input_power(&p, 0.0).unwrap(), 54.0);
        assert_abs_diff_eq!(bs_input_power(&p, 0.5).unwrap(), 186.0760, epsilon = 1e-4);
        assert!(bs_input_power(&p, 1.01).is_err());
        assert!(bs_input_power(&p, -0.1).is_err());
        assert_abs_diff_eq!(bs_input_power_always_on(&p, 0.0).unwrap(), 144.1755, epsilon = 1e-4);
    }

    #[test]
    fn sleep_is_cheaper_than_idle() {
        let p = PowerModelParams::default();
        let idle = bs_input_power(&p, f64::MIN_POSITIVE).unwrap();
        assert!(idle > bs_input_power(&p, 0.0).unwrap());
        assert_abs_diff_eq!(idle, 144.18, epsilon = 0.01);
    }

    #[test]
    fn validation() {
        assert!(PowerModelParams::default().validate().is_ok());
        let bad = PowerModelParams {
            p_sleep_w: 500.0,
            ..PowerModelParams::default()
        };
        assert!(bad.validate().is_err());
        let bad = PowerModelParams {
            sigma_dc: 1.0,
            ..PowerModelParams::default()
        };
        assert!(bad.validate().is_err());
    }

    proptest! {
        #[test]
        fn affine_and_increasing(a in 1e-6f64..1.0, b in 1e-6f64..1.0) {
            let p = PowerModelParams::default();
            let curve = PowerCurve::new(&p).unwrap();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let pa = bs_input_power(&p, lo).unwrap();
            let pb = bs_input_power(&p, hi).unwrap();
            if hi > lo {
                prop_assert!(pb > pa);
            }
            let mid = bs_input_power(&p, 0.5 * (lo + hi)).unwrap();
            prop_assert!((mid - 0.5 * (pa + pb)).abs() < 1e-9);
            prop_assert!((curve.input_power(lo) - pa).abs() < 1e-9);
        }
    }
}
