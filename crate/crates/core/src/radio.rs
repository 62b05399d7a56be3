//! Downlink link model: log-distance path loss with log-normal shadowing,
//! per-RB SINR under intercell interference, CoMP user association and
//! Shannon throughput.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{Point, SiteId};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Thermal noise density in dBm/Hz.
pub const NOISE_DENSITY_DBM_HZ: f64 = -174.0;

/// Intracell interference. RBs inside a cell are orthogonal so this is zero;
/// it is kept as a named term of the SINR denominator.
pub const INTRACELL_INTERFERENCE_MW: f64 = 0.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelParams {
    pub ref_distance_m: f64,
    pub pathloss_exponent: f64,
    pub shadow_sigma_db: f64,
    pub carrier_freq_hz: f64,
    pub rb_bandwidth_hz: f64,
    pub rb_count: usize,
    /// Total BS transmit power over all RBs.
    pub bs_tx_power_dbm: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        ChannelParams {
            ref_distance_m: 100.0,
            pathloss_exponent: 3.574,
            shadow_sigma_db: 8.0,
            carrier_freq_hz: 2.0e9,
            rb_bandwidth_hz: 180.0e3,
            rb_count: 50,
            bs_tx_power_dbm: 43.0,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.ref_distance_m > 0.0) {
            return Err(Error::invalid("ref_distance_m", "must be positive"));
        }
        if !(self.pathloss_exponent > 0.0) {
            return Err(Error::invalid("pathloss_exponent", "must be positive"));
        }
        if !(self.shadow_sigma_db >= 0.0) {
            return Err(Error::invalid("shadow_sigma_db", "must be non-negative"));
        }
        if !(self.carrier_freq_hz > 0.0) {
            return Err(Error::invalid("carrier_freq_hz", "must be positive"));
        }
        if !(self.rb_bandwidth_hz > 0.0) {
            return Err(Error::invalid("rb_bandwidth_hz", "must be positive"));
        }
        if self.rb_count == 0 {
            return Err(Error::invalid("rb_count", "must be at least 1"));
        }
        if !self.bs_tx_power_dbm.is_finite() {
            return Err(Error::invalid("bs_tx_power_dbm", "must be finite"));
        }
        Ok(())
    }

    /// Equal split of the total transmit power over all RBs.
    pub fn tx_power_per_rb_dbm(&self) -> f64 {
        self.bs_tx_power_dbm - 10.0 * (self.rb_count as f64).log10()
    }

    /// Free-space loss at the reference distance.
    pub fn reference_loss_db(&self) -> f64 {
        20.0 * (4.0 * std::f64::consts::PI * self.ref_distance_m * self.carrier_freq_hz / SPEED_OF_LIGHT).log10()
    }

    pub fn noise_mw(&self) -> f64 {
        dbm_to_mw(noise_power_dbm(self.rb_bandwidth_hz))
    }
}

#[inline]
pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

#[inline]
pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

#[inline]
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Path loss in dB. Distances below the reference distance are clamped to it.
pub fn path_loss(params: &ChannelParams, distance_m: f64) -> Result<f64> {
    if !(distance_m > 0.0) {
        return Err(Error::invalid("distance", format!("{distance_m} must be positive")));
    }
    let d = distance_m.max(params.ref_distance_m);
    Ok(params.reference_loss_db() + 10.0 * params.pathloss_exponent * (d / params.ref_distance_m).log10())
}

pub fn received_power(params: &ChannelParams, tx_dbm_per_rb: f64, distance_m: f64, shadow_db: f64) -> Result<f64> {
    Ok(tx_dbm_per_rb - path_loss(params, distance_m)? + shadow_db)
}

/// Thermal noise over `bandwidth_hz`, in dBm.
pub fn noise_power_dbm(bandwidth_hz: f64) -> f64 {
    NOISE_DENSITY_DBM_HZ + 10.0 * bandwidth_hz.log10()
}

pub fn ue_throughput(sinr_linear: f64, bandwidth_hz: f64) -> f64 {
    bandwidth_hz * (1.0 + sinr_linear.max(0.0)).log2()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CompMode {
    NonComp,
    Dps,
    Jt,
}

impl CompMode {
    pub const ALL: [CompMode; 3] = [CompMode::NonComp, CompMode::Dps, CompMode::Jt];

    pub fn as_str(self) -> &'static str {
        match self {
            CompMode::NonComp => "noncomp",
            CompMode::Dps => "dps",
            CompMode::Jt => "jt",
        }
    }
}

impl fmt::Display for CompMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CompMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "noncomp" | "non-comp" | "non_comp" | "none" => Ok(CompMode::NonComp),
            "dps" => Ok(CompMode::Dps),
            "jt" => Ok(CompMode::Jt),
            other => Err(format!("unknown CoMP mode `{other}` (expected noncomp, dps or jt)")),
        }
    }
}

/// A dropped user. Occupies exactly one RB of its home cell.
#[derive(Debug, Clone)]
pub struct UserEquipment {
    pub ue_id: usize,
    pub position: Point,
    pub home_cell: SiteId,
    pub rb_index: usize,
    /// One shadowing value per site, in dB.
    pub shadow_db: Vec<f64>,
}

/// Per-site link quantities seen by one UE on its RB.
#[derive(Debug, Clone, Copy)]
pub struct UeLinks<'a> {
    pub distances_m: &'a [f64],
    pub rx_mw: &'a [f64],
    /// Whether each site transmits on the UE's RB.
    pub occupied: &'a [bool],
    pub noise_mw: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServingSet {
    pub mode: CompMode,
    pub primary: SiteId,
    /// Second transmitter, present only under JT.
    pub secondary: Option<SiteId>,
    pub sinr: f64,
}

impl ServingSet {
    pub fn servers(&self) -> impl Iterator<Item = SiteId> {
        std::iter::once(self.primary).chain(self.secondary)
    }

    pub fn server_count(&self) -> usize {
        1 + usize::from(self.secondary.is_some())
    }
}

/// Linear SINR when `servers` jointly transmit on the UE's RB.
///
/// Serving sites are excluded from the interference sum; every other site
/// interferes only if it occupies the same RB.
pub fn sinr(links: &UeLinks<'_>, servers: &[SiteId]) -> Result<f64> {
    if servers.is_empty() {
        return Err(Error::EmptyServingSet);
    }
    let mut signal = 0.0;
    let mut interference = 0.0;
    for (k, (&p, &occ)) in links.rx_mw.iter().zip(links.occupied).enumerate() {
        if servers.iter().any(|s| s.0 == k) {
            signal += p;
        } else if occ {
            interference += p;
        }
    }
    Ok(signal / (interference + INTRACELL_INTERFERENCE_MW + links.noise_mw))
}

/// SINR each site would give the UE if it served alone.
pub fn single_site_sinrs(links: &UeLinks<'_>) -> Vec<f64> {
    // prefix and suffix sums of the other sites' interference; subtracting a
    // dominant own signal from the total would cancel catastrophically
    let n = links.rx_mw.len();
    let term = |k: usize| if links.occupied[k] { links.rx_mw[k] } else { 0.0 };
    let mut suffix = vec![0.0; n + 1];
    for k in (0..n).rev() {
        suffix[k] = suffix[k + 1] + term(k);
    }
    let mut prefix = 0.0;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let interference = prefix + suffix[k + 1];
        out.push(links.rx_mw[k] / (interference + INTRACELL_INTERFERENCE_MW + links.noise_mw));
        prefix += term(k);
    }
    out
}

/// Chooses the serving set for a UE. Ties go to the lowest site id.
pub fn associate(mode: CompMode, links: &UeLinks<'_>) -> Result<ServingSet> {
    if links.rx_mw.is_empty() {
        return Err(Error::EmptyServingSet);
    }
    match mode {
        CompMode::NonComp => {
            let mut best = 0;
            for (k, &d) in links.distances_m.iter().enumerate() {
                if d < links.distances_m[best] {
                    best = k;
                }
            }
            let primary = SiteId(best);
            Ok(ServingSet {
                mode,
                primary,
                secondary: None,
                sinr: sinr(links, &[primary])?,
            })
        }
        CompMode::Dps => {
            let sinrs = single_site_sinrs(links);
            let best = argmax(&sinrs, None);
            Ok(ServingSet {
                mode,
                primary: SiteId(best),
                secondary: None,
                sinr: sinrs[best],
            })
        }
        CompMode::Jt => {
            let sinrs = single_site_sinrs(links);
            let first = argmax(&sinrs, None);
            if sinrs.len() == 1 {
                return Ok(ServingSet {
                    mode,
                    primary: SiteId(first),
                    secondary: None,
                    sinr: sinrs[first],
                });
            }
            let second = argmax(&sinrs, Some(first));
            let servers = [SiteId(first), SiteId(second)];
            Ok(ServingSet {
                mode,
                primary: servers[0],
                secondary: Some(servers[1]),
                sinr: sinr(links, &servers)?,
            })
        }
    }
}

fn argmax(values: &[f64], skip: Option<usize>) -> usize {
    let mut best: Option<usize> = None;
    for (k, &v) in values.iter().enumerate() {
        if Some(k) == skip {
            continue;
        }
        match best {
            Some(b) if values[b] >= v => {}
            _ => best = Some(k),
        }
    }
    best.expect("argmax over at least one candidate")
}
