//! Scenario configuration and its flat `key = value` text format.
//!
//! ```text
//! # comments start with '#'
//! comp_mode = jt
//! sharing = on
//! storage_capacity_wh = 2000
//! solar_profile = profiles/dhaka.csv   # relative to the config file
//! ```
//!
//! Missing keys keep their defaults; unknown keys are rejected.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::energy::{AlphaMap, SharingPolicy, SolarConfig, StorageState};
use crate::error::{Error, Result};
use crate::geometry::SiteId;
use crate::power::PowerModelParams;
use crate::profile::HourlyProfile;
use crate::radio::{ChannelParams, CompMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoadMode {
    /// Every site carries exactly the traffic profile value.
    ProfileOnly,
    /// Profile value times a per-site `U[0, 1]` draw.
    ProfileTimesUniform,
}

impl LoadMode {
    pub fn as_str(self) -> &'static str {
        match self {
            LoadMode::ProfileOnly => "profile_only",
            LoadMode::ProfileTimesUniform => "profile_times_uniform",
        }
    }
}

impl FromStr for LoadMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "profile_only" => Ok(LoadMode::ProfileOnly),
            "profile_times_uniform" => Ok(LoadMode::ProfileTimesUniform),
            other => Err(format!(
                "unknown load mode `{other}` (expected profile_only or profile_times_uniform)"
            )),
        }
    }
}

/// When the per-site spatial load factor is redrawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoadRedraw {
    PerIteration,
    PerHour,
}

impl LoadRedraw {
    pub fn as_str(self) -> &'static str {
        match self {
            LoadRedraw::PerIteration => "iteration",
            LoadRedraw::PerHour => "hour",
        }
    }
}

impl FromStr for LoadRedraw {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "iteration" | "per_iteration" => Ok(LoadRedraw::PerIteration),
            "hour" | "per_hour" => Ok(LoadRedraw::PerHour),
            other => Err(format!("unknown load redraw `{other}` (expected iteration or hour)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub cell_radius_m: f64,
    pub tiers: u8,
    pub channel: ChannelParams,
    pub power: PowerModelParams,
    pub solar: SolarConfig,
    /// Battery template: capacity, retention factor and initial level.
    pub storage: StorageState,
    pub traffic: HourlyProfile,
    pub comp_mode: CompMode,
    pub sharing: SharingPolicy,
    pub alpha: AlphaMap,
    pub horizon_days: usize,
    pub iterations: usize,
    pub master_seed: u64,
    pub load_mode: LoadMode,
    pub load_redraw: LoadRedraw,
    /// Leave the first simulated day out of run totals.
    pub discard_warmup: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            cell_radius_m: 1000.0,
            tiers: 2,
            channel: ChannelParams::default(),
            power: PowerModelParams::default(),
            solar: SolarConfig::default(),
            storage: StorageState::default(),
            traffic: HourlyProfile::default_traffic(),
            comp_mode: CompMode::NonComp,
            sharing: SharingPolicy::disabled(),
            alpha: AlphaMap::uniform(1.0).expect("valid alpha"),
            horizon_days: 7,
            iterations: 200,
            master_seed: 1,
            load_mode: LoadMode::ProfileTimesUniform,
            load_redraw: LoadRedraw::PerIteration,
            discard_warmup: false,
        }
    }
}

impl ScenarioConfig {
    pub fn horizon_hours(&self) -> usize {
        24 * self.horizon_days
    }

    pub fn validate(&self) -> Result<()> {
        let v = |key: &str, reason: &str| Error::Validation {
            key: key.to_string(),
            reason: reason.to_string(),
        };
        if !(self.cell_radius_m > 0.0 && self.cell_radius_m.is_finite()) {
            return Err(v("cell_radius_m", "must be positive"));
        }
        if !(1..=2).contains(&self.tiers) {
            return Err(v("tiers", "must be 1 or 2"));
        }
        self.channel.validate().map_err(to_validation)?;
        self.power.validate().map_err(to_validation)?;
        if !(self.solar.panel_capacity_w >= 0.0 && self.solar.panel_capacity_w.is_finite()) {
            return Err(v("panel_capacity_w", "must be non-negative"));
        }
        if !(self.solar.c_s_w >= 0.0 && self.solar.c_s_w.is_finite()) {
            return Err(v("c_s_w", "must be non-negative"));
        }
        self.storage.validate().map_err(to_validation)?;
        if self.traffic.max() > 1.0 {
            return Err(v("traffic_profile", "normalized traffic must lie in [0, 1]"));
        }
        if self.horizon_days == 0 {
            return Err(v("horizon_days", "must be at least 1"));
        }
        if self.iterations == 0 {
            return Err(v("iterations", "must be at least 1"));
        }
        let sites = 1 + 3 * usize::from(self.tiers) * (usize::from(self.tiers) + 1);
        for (a, b, _) in self.alpha.links() {
            if a.0 >= sites || b.0 >= sites {
                return Err(v("alpha_links", "link references a site outside the layout"));
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &path.display().to_string(), &base)
    }

    /// Parses config text. Relative profile paths resolve against `base_dir`.
    pub fn parse(text: &str, origin: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg = ScenarioConfig::default();
        let mut alpha_default: Option<(usize, f64)> = None;
        let mut alpha_links: Vec<(SiteId, SiteId, f64)> = Vec::new();
        let mut seen: Vec<String> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let err = |message: String| Error::Parse {
                path: origin.to_string(),
                line: line_no,
                message,
            };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let key = key.trim().to_ascii_lowercase();
            let value = value.trim();
            if seen.contains(&key) {
                return Err(err(format!("duplicate key `{key}`")));
            }
            seen.push(key.clone());

            let num = || -> Result<f64> {
                value
                    .parse::<f64>()
                    .map_err(|_| err(format!("`{key}`: `{value}` is not a number")))
            };
            let int = || -> Result<u64> {
                value
                    .parse::<u64>()
                    .map_err(|_| err(format!("`{key}`: `{value}` is not a non-negative integer")))
            };

            match key.as_str() {
                "cell_radius_m" => cfg.cell_radius_m = num()?,
                "tiers" => cfg.tiers = u8::try_from(int()?).map_err(|_| err("tiers too large".into()))?,
                "ref_distance_m" => cfg.channel.ref_distance_m = num()?,
                "pathloss_exponent" => cfg.channel.pathloss_exponent = num()?,
                "shadow_sigma_db" => cfg.channel.shadow_sigma_db = num()?,
                "carrier_freq_hz" => cfg.channel.carrier_freq_hz = num()?,
                "rb_bandwidth_hz" => cfg.channel.rb_bandwidth_hz = num()?,
                "rb_count" => cfg.channel.rb_count = int()? as usize,
                "bs_tx_power_dbm" => cfg.channel.bs_tx_power_dbm = num()?,
                "eta_pa" => cfg.power.eta_pa = num()?,
                "p_bb_w" => cfg.power.p_bb_w = num()?,
                "p_rf_w" => cfg.power.p_rf_w = num()?,
                "sigma_feed" => cfg.power.sigma_feed = num()?,
                "sigma_dc" => cfg.power.sigma_dc = num()?,
                "sigma_ms" => cfg.power.sigma_ms = num()?,
                "sigma_cool" => cfg.power.sigma_cool = num()?,
                "sectors" => cfg.power.sectors = u32::try_from(int()?).map_err(|_| err("sectors too large".into()))?,
                "p_max_dbm" => cfg.power.p_max_dbm = num()?,
                "delta_p" => cfg.power.delta_p = num()?,
                "p_sleep_w" => cfg.power.p_sleep_w = num()?,
                "gamma" => cfg.power.gamma = num()?,
                "panel_capacity_w" => cfg.solar.panel_capacity_w = num()?,
                "c_s_w" => cfg.solar.c_s_w = num()?,
                "solar_mode" => {
                    cfg.solar.spatial_mode = value.parse().map_err(|m: String| err(format!("`{key}`: {m}")))?
                }
                "solar_profile" => cfg.solar.profile = HourlyProfile::load_csv(&resolve(base_dir, value))?,
                "solar_profile_wh" => cfg.solar.profile = parse_inline_profile(value).map_err(err)?,
                "traffic_profile" => cfg.traffic = HourlyProfile::load_csv(&resolve(base_dir, value))?,
                "traffic_profile_values" => cfg.traffic = parse_inline_profile(value).map_err(err)?,
                "storage_capacity_wh" => cfg.storage.capacity_wh = num()?,
                "storage_factor" => cfg.storage.factor = num()?,
                "initial_storage_wh" => cfg.storage.level_wh = num()?,
                "comp_mode" => cfg.comp_mode = value.parse().map_err(|m: String| err(format!("`{key}`: {m}")))?,
                "sharing" => cfg.sharing.enabled = parse_bool(value).map_err(err)?,
                "donor_order" => cfg.sharing.order = value.parse().map_err(|m: String| err(format!("`{key}`: {m}")))?,
                "transfer_sizing" => {
                    cfg.sharing.sizing = value.parse().map_err(|m: String| err(format!("`{key}`: {m}")))?
                }
                "alpha" => {
                    if alpha_default.is_some() {
                        return Err(err("`alpha` and `line_loss_pct` are mutually exclusive".into()));
                    }
                    alpha_default = Some((line_no, num()?));
                }
                "line_loss_pct" => {
                    if alpha_default.is_some() {
                        return Err(err("`alpha` and `line_loss_pct` are mutually exclusive".into()));
                    }
                    let loss = num()?;
                    if !(0.0..=100.0).contains(&loss) {
                        return Err(Error::Validation {
                            key: "line_loss_pct".into(),
                            reason: format!("{loss} outside [0, 100]"),
                        });
                    }
                    alpha_default = Some((line_no, 1.0 - loss / 100.0));
                }
                "alpha_links" => alpha_links = parse_alpha_links(value).map_err(err)?,
                "horizon_days" => cfg.horizon_days = int()? as usize,
                "iterations" => cfg.iterations = int()? as usize,
                "seed" => cfg.master_seed = int()?,
                "load_mode" => cfg.load_mode = value.parse().map_err(|m: String| err(format!("`{key}`: {m}")))?,
                "load_redraw" => cfg.load_redraw = value.parse().map_err(|m: String| err(format!("`{key}`: {m}")))?,
                "discard_warmup" => cfg.discard_warmup = parse_bool(value).map_err(err)?,
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }

        let base_alpha = alpha_default.map(|(_, a)| a).unwrap_or(1.0);
        let mut alpha = AlphaMap::uniform(base_alpha).map_err(|_| Error::Validation {
            key: "alpha".into(),
            reason: format!("{base_alpha} outside [0, 1]"),
        })?;
        for (a, b, v) in alpha_links {
            alpha = alpha.with_link(a, b, v).map_err(|_| Error::Validation {
                key: "alpha_links".into(),
                reason: format!("{v} outside [0, 1]"),
            })?;
        }
        cfg.alpha = alpha;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Self-contained config text that parses back to an identical config.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        put("cell_radius_m", fnum(self.cell_radius_m));
        put("tiers", self.tiers.to_string());
        put("ref_distance_m", fnum(self.channel.ref_distance_m));
        put("pathloss_exponent", fnum(self.channel.pathloss_exponent));
        put("shadow_sigma_db", fnum(self.channel.shadow_sigma_db));
        put("carrier_freq_hz", fnum(self.channel.carrier_freq_hz));
        put("rb_bandwidth_hz", fnum(self.channel.rb_bandwidth_hz));
        put("rb_count", self.channel.rb_count.to_string());
        put("bs_tx_power_dbm", fnum(self.channel.bs_tx_power_dbm));
        put("eta_pa", fnum(self.power.eta_pa));
        put("p_bb_w", fnum(self.power.p_bb_w));
        put("p_rf_w", fnum(self.power.p_rf_w));
        put("sigma_feed", fnum(self.power.sigma_feed));
        put("sigma_dc", fnum(self.power.sigma_dc));
        put("sigma_ms", fnum(self.power.sigma_ms));
        put("sigma_cool", fnum(self.power.sigma_cool));
        put("sectors", self.power.sectors.to_string());
        put("p_max_dbm", fnum(self.power.p_max_dbm));
        put("delta_p", fnum(self.power.delta_p));
        put("p_sleep_w", fnum(self.power.p_sleep_w));
        put("gamma", fnum(self.power.gamma));
        put("panel_capacity_w", fnum(self.solar.panel_capacity_w));
        put("solar_mode", self.solar.spatial_mode.to_string());
        put("c_s_w", fnum(self.solar.c_s_w));
        put("solar_profile_wh", inline_profile(&self.solar.profile));
        put("storage_capacity_wh", fnum(self.storage.capacity_wh));
        put("storage_factor", fnum(self.storage.factor));
        put("initial_storage_wh", fnum(self.storage.level_wh));
        put("traffic_profile_values", inline_profile(&self.traffic));
        put("comp_mode", self.comp_mode.to_string());
        put("sharing", if self.sharing.enabled { "on" } else { "off" }.into());
        put("donor_order", self.sharing.order.to_string());
        put("transfer_sizing", self.sharing.sizing.to_string());
        put("alpha", fnum(self.alpha.default_alpha()));
        let links: Vec<String> = self
            .alpha
            .links()
            .map(|(a, b, v)| format!("{a}-{b}:{}", fnum(v)))
            .collect();
        if !links.is_empty() {
            put("alpha_links", links.join(","));
        }
        put("horizon_days", self.horizon_days.to_string());
        put("iterations", self.iterations.to_string());
        put("seed", self.master_seed.to_string());
        put("load_mode", self.load_mode.as_str().into());
        put("load_redraw", self.load_redraw.as_str().into());
        put("discard_warmup", self.discard_warmup.to_string());
        out
    }
}

impl fmt::Display for ScenarioConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_config_string())
    }
}

fn to_validation(e: Error) -> Error {
    match e {
        Error::InvalidParameter { field, reason } => Error::Validation {
            key: field.to_string(),
            reason,
        },
        other => other,
    }
}

fn resolve(base: &Path, value: &str) -> PathBuf {
    let p = Path::new(value);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Shortest representation that parses back to the same f64.
fn fnum(v: f64) -> String {
    format!("{v:?}")
}

fn inline_profile(p: &HourlyProfile) -> String {
    p.values().iter().map(|v| fnum(*v)).collect::<Vec<_>>().join(",")
}

fn parse_bool(value: &str) -> std::result::Result<bool, String> {
    match value.to_ascii_lowercase().as_str() {
        "on" | "true" | "yes" | "1" => Ok(true),
        "off" | "false" | "no" | "0" => Ok(false),
        other => Err(format!("`{other}` is not a boolean (on/off)")),
    }
}

fn parse_inline_profile(value: &str) -> std::result::Result<HourlyProfile, String> {
    let values: Vec<f64> = value
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| format!("bad profile value `{v}`")))
        .collect::<std::result::Result<_, _>>()?;
    HourlyProfile::from_slice(&values).map_err(|e| e.to_string())
}

fn parse_alpha_links(value: &str) -> std::result::Result<Vec<(SiteId, SiteId, f64)>, String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let bad = || format!("bad alpha link `{item}` (expected a-b:value)");
            let (pair, v) = item.split_once(':').ok_or_else(bad)?;
            let (a, b) = pair.split_once('-').ok_or_else(bad)?;
            let a = a.trim().parse::<usize>().map_err(|_| bad())?;
            let b = b.trim().parse::<usize>().map_err(|_| bad())?;
            let v = v.trim().parse::<f64>().map_err(|_| bad())?;
            Ok((SiteId(a), SiteId(b), v))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{DonorOrder, SpatialMode};

    fn parse(text: &str) -> Result<ScenarioConfig> {
        ScenarioConfig::parse(text, "test.cfg", Path::new("."))
    }

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = parse("").unwrap();
        assert_eq!(cfg, ScenarioConfig::default());
        assert_eq!(cfg.cell_radius_m, 1000.0);
        assert_eq!(cfg.channel.pathloss_exponent, 3.574);
        assert_eq!(cfg.power.p_sleep_w, 54.0);
        assert_eq!(cfg.storage.capacity_wh, 2000.0);
        assert_eq!(cfg.storage.factor, 0.96);
        assert_eq!(cfg.horizon_days, 7);
        assert_eq!(cfg.iterations, 200);
    }

    #[test]
    fn negative_capacity_is_rejected() {
        let err = parse("storage_capacity_wh = -5").unwrap_err();
        match err {
            Error::Validation { key, .. } => assert_eq!(key, "storage_capacity_wh"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn enum_keys_map() {
        let cfg =
            parse("comp_mode = JT\nsharing = on  # share\nsolar_mode = uniform_random\ndonor_order = surplus").unwrap();
        assert_eq!(cfg.comp_mode, CompMode::Jt);
        assert!(cfg.sharing.enabled);
        assert_eq!(cfg.solar.spatial_mode, SpatialMode::UniformRandom);
        assert_eq!(cfg.sharing.order, DonorOrder::Surplus);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse("# header\n\nbogus_key = 3").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = parse("iterations = 10\nseed = abc").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse("no equals sign").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = parse("seed = 1\nseed = 2").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn line_loss_maps_to_alpha() {
        let cfg = parse("line_loss_pct = 30").unwrap();
        assert!((cfg.alpha.default_alpha() - 0.7).abs() < 1e-12);
        assert!(parse("line_loss_pct = 30\nalpha = 0.5").is_err());
        assert!(parse("alpha = 1.5").is_err());
    }

    #[test]
    fn echo_round_trips() {
        let cfg = parse(
            "comp_mode = dps\nsharing = on\nline_loss_pct = 12.5\nalpha_links = 0-1:0.25, 2-0:0.5\n\
             storage_factor = 0.9\nseed = 77\nsolar_mode = uniform_random\nc_s_w = 1234.5",
        )
        .unwrap();
        let again = parse(&cfg.to_config_string()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn validation_failures_name_the_field() {
        for (text, key) in [
            ("tiers = 3", "tiers"),
            ("storage_factor = 1.5", "storage_factor"),
            ("iterations = 0", "iterations"),
            (
                "traffic_profile_values = 2,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0",
                "traffic_profile",
            ),
        ] {
            match parse(text).unwrap_err() {
                Error::Validation { key: k, .. } => assert_eq!(k, key, "{text}"),
                other => panic!("{text}: unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn profile_files_resolve_relative_to_config() {
        let dir = tempfile::tempdir().unwrap();
        let prof: String = (0..24).map(|h| format!("{h},{}\n", h as f64 * 10.0)).collect();
        std::fs::write(dir.path().join("sun.csv"), format!("hour,wh_per_kw\n{prof}")).unwrap();
        std::fs::write(dir.path().join("s.cfg"), "solar_profile = sun.csv\n").unwrap();
        let cfg = ScenarioConfig::load(&dir.path().join("s.cfg")).unwrap();
        assert_eq!(cfg.solar.profile.at(5), 50.0);
        let missing = ScenarioConfig::parse("solar_profile = nope.csv", "x", dir.path()).unwrap_err();
        assert!(matches!(missing, Error::Io { .. }));
    }
}
