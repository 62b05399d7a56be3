//! 24-slot hourly profiles (solar yield per kW of panel, normalized traffic).

use std::path::Path;

use crate::error::{Error, Result};

pub const HOURS_PER_DAY: usize = 24;

const DEFAULT_SOLAR_CSV: &str = include_str!("../data/solar_1kw_default.csv");
const DEFAULT_TRAFFIC_CSV: &str = include_str!("../data/traffic_residential.csv");

#[derive(Debug, Clone, PartialEq)]
pub struct HourlyProfile([f64; HOURS_PER_DAY]);

impl HourlyProfile {
    pub fn new(values: [f64; HOURS_PER_DAY]) -> Result<Self> {
        for (h, v) in values.iter().enumerate() {
            if !(v.is_finite() && *v >= 0.0) {
                return Err(Error::Validation {
                    key: format!("profile[{h}]"),
                    reason: format!("{v} is not a non-negative number"),
                });
            }
        }
        Ok(HourlyProfile(values))
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        let arr: [f64; HOURS_PER_DAY] = values.try_into().map_err(|_| Error::Validation {
            key: "profile".into(),
            reason: format!("expected {HOURS_PER_DAY} values, got {}", values.len()),
        })?;
        Self::new(arr)
    }

    pub fn zeros() -> Self {
        HourlyProfile([0.0; HOURS_PER_DAY])
    }

    pub fn constant(v: f64) -> Result<Self> {
        Self::new([v; HOURS_PER_DAY])
    }

    /// Raised-cosine daylight curve between 06:00 and 18:00, 5 kWh/day for a
    /// 1 kW panel.
    pub fn default_solar() -> Self {
        Self::parse_csv(DEFAULT_SOLAR_CSV, "<builtin solar profile>").expect("builtin solar profile is valid")
    }

    /// Normalized residential traffic, peaking in the late evening.
    pub fn default_traffic() -> Self {
        Self::parse_csv(DEFAULT_TRAFFIC_CSV, "<builtin traffic profile>").expect("builtin traffic profile is valid")
    }

    /// Value for an absolute simulation hour (wraps every 24 h).
    #[inline]
    pub fn at(&self, hour: usize) -> f64 {
        self.0[hour % HOURS_PER_DAY]
    }

    pub fn values(&self) -> &[f64; HOURS_PER_DAY] {
        &self.0
    }

    pub fn daily_total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.0.map(|v| v * factor))
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&text, &path.display().to_string())
    }

    /// Parses `hour,value` rows. A non-numeric first row is treated as a
    /// header; blank lines and `#` comments are skipped. Exactly 24 distinct
    /// hours in `0..24` are required.
    pub fn parse_csv(text: &str, origin: &str) -> Result<Self> {
        let parse_err = |line: usize, message: String| Error::Parse {
            path: origin.to_string(),
            line,
            message,
        };
        let mut slots: [Option<f64>; HOURS_PER_DAY] = [None; HOURS_PER_DAY];
        let mut seen_data = false;
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split(',').map(str::trim);
            let (Some(h), Some(v), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(parse_err(lineno, "expected two columns `hour,value`".into()));
            };
            let hour = match h.parse::<usize>() {
                Ok(hour) => hour,
                Err(_) if !seen_data => {
                    seen_data = true;
                    continue;
                }
                Err(_) => return Err(parse_err(lineno, format!("bad hour `{h}`"))),
            };
            seen_data = true;
            let value: f64 = v.parse().map_err(|_| parse_err(lineno, format!("bad value `{v}`")))?;
            if hour >= HOURS_PER_DAY {
                return Err(parse_err(lineno, format!("hour {hour} out of range 0..24")));
            }
            if slots[hour].replace(value).is_some() {
                return Err(parse_err(lineno, format!("duplicate hour {hour}")));
            }
        }
        let mut values = [0.0; HOURS_PER_DAY];
        for (h, slot) in slots.iter().enumerate() {
            values[h] = slot.ok_or_else(|| Error::Validation {
                key: origin.to_string(),
                reason: format!("missing hour {h}; exactly 24 distinct hours required"),
            })?;
        }
        Self::new(values)
    }

    pub fn to_csv(&self, value_header: &str) -> String {
        let mut out = format!("hour,{value_header}\n");
        for (h, v) in self.0.iter().enumerate() {
            out.push_str(&format!("{h},{v:?}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_solar_shape() {
        let p = HourlyProfile::default_solar();
        assert!((p.daily_total() - 5000.0).abs() < 1e-3);
        for h in (0..=5).chain(18..=23) {
            assert_eq!(p.at(h), 0.0, "hour {h}");
        }
        assert_eq!(p.at(11), p.max());
        assert_eq!(p.at(11), p.at(12));
        assert_eq!(p.at(27), p.at(3));
    }

    #[test]
    fn default_traffic_is_normalized() {
        let p = HourlyProfile::default_traffic();
        assert_eq!(p.max(), 1.0);
        assert!(p.values().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn csv_round_trip() {
        let p = HourlyProfile::default_solar();
        let q = HourlyProfile::parse_csv(&p.to_csv("wh_per_kw"), "mem").unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn csv_rejects_bad_input() {
        let mut rows: Vec<String> = (0..23).map(|h| format!("{h},1.0")).collect();
        let short = rows.join("\n");
        assert!(matches!(
            HourlyProfile::parse_csv(&short, "x"),
            Err(Error::Validation { .. })
        ));
        rows.push("5,2.0".into());
        let dup = rows.join("\n");
        assert!(matches!(
            HourlyProfile::parse_csv(&dup, "x"),
            Err(Error::Parse { line: 24, .. })
        ));
        let neg: String = (0..24).map(|h| format!("{h},-1\n")).collect();
        assert!(HourlyProfile::parse_csv(&neg, "x").is_err());
        let oob: String = (1..=24).map(|h| format!("{h},1\n")).collect();
        assert!(HourlyProfile::parse_csv(&oob, "x").is_err());
    }

    #[test]
    fn csv_accepts_any_row_order() {
        let text: String = (0..24).rev().map(|h| format!("{h},{h}\n")).collect();
        let p = HourlyProfile::parse_csv(&format!("hour,value\n{text}"), "x").unwrap();
        assert_eq!(p.at(7), 7.0);
    }
}
