use std::fmt;
use std::str::FromStr;

use crate::profile::HourlyProfile;

/// How panel output varies between sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpatialMode {
    /// Every site has the nameplate panel.
    Equal,
    /// Site `n` gets `u_n · c_s` of panel, `u_n ~ U[0, 1]` drawn per iteration.
    UniformRandom,
}

impl SpatialMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SpatialMode::Equal => "equal",
            SpatialMode::UniformRandom => "uniform_random",
        }
    }
}

impl fmt::Display for SpatialMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SpatialMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "equal" => Ok(SpatialMode::Equal),
            "uniform_random" | "uniform" | "random" => Ok(SpatialMode::UniformRandom),
            other => Err(format!(
                "unknown solar mode `{other}` (expected equal or uniform_random)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolarConfig {
    /// Nameplate capacity used in `Equal` mode.
    pub panel_capacity_w: f64,
    /// Hourly yield of a 1 kW panel, in Wh.
    pub profile: HourlyProfile,
    pub spatial_mode: SpatialMode,
    /// Panel scale for `UniformRandom` mode.
    pub c_s_w: f64,
}

impl Default for SolarConfig {
    fn default() -> Self {
        SolarConfig {
            panel_capacity_w: 1000.0,
            profile: HourlyProfile::default_solar(),
            spatial_mode: SpatialMode::Equal,
            c_s_w: 1000.0,
        }
    }
}

impl SolarConfig {
    /// Multiplier on the 1 kW profile for a site with spatial draw `u`.
    /// `u` is ignored in `Equal` mode.
    pub fn site_scale(&self, u: f64) -> f64 {
        match self.spatial_mode {
            SpatialMode::Equal => self.panel_capacity_w / 1000.0,
            SpatialMode::UniformRandom => u * self.c_s_w / 1000.0,
        }
    }

    /// Energy harvested in `hour` (Wh) by a site with the given scale.
    pub fn generation(&self, hour: usize, site_scale: f64) -> f64 {
        self.profile.at(hour) * site_scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn night_generation_is_zero() {
        let cfg = SolarConfig::default();
        assert_eq!(cfg.generation(3, cfg.site_scale(0.0)), 0.0);
    }

    #[test]
    fn equal_mode_scales_linearly() {
        let one = SolarConfig::default();
        let two = SolarConfig {
            panel_capacity_w: 2000.0,
            ..SolarConfig::default()
        };
        for h in 0..24 {
            assert_eq!(
                two.generation(h, two.site_scale(0.3)),
                2.0 * one.generation(h, one.site_scale(0.9))
            );
        }
    }

    #[test]
    fn uniform_mode_uses_draw() {
        let eq = SolarConfig::default();
        let rnd = SolarConfig {
            spatial_mode: SpatialMode::UniformRandom,
            c_s_w: 1000.0,
            ..SolarConfig::default()
        };
        for h in 0..24 {
            assert_eq!(
                rnd.generation(h, rnd.site_scale(0.5)),
                0.5 * eq.generation(h, eq.site_scale(0.5))
            );
        }
    }
}
