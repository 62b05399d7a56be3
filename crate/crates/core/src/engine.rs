//! Seeded Monte Carlo driver.
//!
//! An iteration runs in two phases. The radio phase draws loads, drops UEs,
//! associates them and turns the resulting RB occupancy into per-site power
//! demand for every hour. The energy phase replays that demand against solar
//! generation, storage and sharing. Radio traces do not depend on any energy
//! parameter, so sweeps over storage, line loss or panel size reuse them.
//!
//! Randomness comes from ChaCha8 keyed by a per-iteration seed, with one
//! stream per concern and a fixed word offset per hour, so the draws for one
//! concern never shift when another changes.

use rand::distributions::{Distribution, Uniform};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use rayon::prelude::*;

use crate::config::{LoadMode, LoadRedraw, ScenarioConfig};
use crate::energy::{EnergyNetwork, LedgerRow};
use crate::error::{Error, Result};
use crate::geometry::{Layout, Point, SiteId};
use crate::metrics::{Estimate, HourRecord};
use crate::power::PowerCurve;
use crate::profile::{HourlyProfile, HOURS_PER_DAY};
use crate::radio::{associate, linear_to_db, ue_throughput, CompMode, ServingSet, UeLinks, UserEquipment};

const STREAM_LOAD: u64 = 1;
const STREAM_SOLAR: u64 = 2;
const STREAM_DROP: u64 = 3;
const STREAM_SHADOW: u64 = 4;

/// Words reserved per hour within a stream.
const HOUR_STRIDE_BITS: u32 = 40;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of iteration `index` under `master_seed`.
pub fn iteration_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(index))
}

fn substream(seed: u64, stream: u64, hour: Option<usize>) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    if let Some(h) = hour {
        rng.set_word_pos((h as u128 + 1) << HOUR_STRIDE_BITS);
    }
    rng
}

/// Load of one site in one hour given its spatial factor `u`.
pub fn draw_load(mode: LoadMode, traffic: &HourlyProfile, hour: usize, u: f64) -> f64 {
    match mode {
        LoadMode::ProfileOnly => traffic.at(hour),
        LoadMode::ProfileTimesUniform => traffic.at(hour) * u,
    }
}

/// Number of UEs (= occupied RBs) a cell with load `x` carries.
pub fn ues_for_load(load: f64, rb_count: usize) -> usize {
    // the small offset keeps e.g. 0.3·50 = 15.000000000000002 at 15
    let n = (load.clamp(0.0, 1.0) * rb_count as f64 - 1e-9).ceil();
    (n.max(0.0) as usize).min(rb_count)
}

/// Drops `⌈x_b·rb_count⌉` UEs uniformly inside each cell `b`, each on a
/// distinct RB of its home cell. Shadowing is left empty.
pub fn place_ues<R: Rng + ?Sized>(layout: &Layout, loads: &[f64], rb_count: usize, rng: &mut R) -> Vec<UserEquipment> {
    let r = layout.cell_radius();
    let box_x = Uniform::new_inclusive(-r, r);
    let box_y = Uniform::new_inclusive(-0.5 * 3f64.sqrt() * r, 0.5 * 3f64.sqrt() * r);
    let mut ues = Vec::new();
    for (site, &load) in layout.sites().iter().zip(loads) {
        let count = ues_for_load(load, rb_count);
        if count == 0 {
            continue;
        }
        let rbs = index::sample(rng, rb_count, count);
        for rb in rbs.iter() {
            let position = loop {
                let p = Point::new(site.position.x + box_x.sample(rng), site.position.y + box_y.sample(rng));
                if layout.in_hexagon(site.position, p) {
                    break p;
                }
            };
            ues.push(UserEquipment {
                ue_id: ues.len(),
                position,
                home_cell: site.id,
                rb_index: rb,
                shadow_db: Vec::new(),
            });
        }
    }
    ues
}

/// Draws i.i.d. `N(0, σ²)` shadowing for every UE–site pair.
pub fn draw_shadowing<R: Rng + ?Sized>(ues: &mut [UserEquipment], sites: usize, sigma_db: f64, rng: &mut R) {
    if sigma_db == 0.0 {
        for ue in ues.iter_mut() {
            ue.shadow_db = vec![0.0; sites];
        }
        return;
    }
    let normal = Normal::new(0.0, sigma_db).expect("finite sigma");
    for ue in ues.iter_mut() {
        ue.shadow_db = (0..sites).map(|_| normal.sample(rng)).collect();
    }
}

/// Radio-side outcome of one hour.
#[derive(Debug, Clone, PartialEq)]
pub struct RadioHour {
    /// Per-site input power after association (W, equal to Wh over the hour).
    pub demand_w: Vec<f64>,
    /// Network power of an always-on, non-CoMP, grid-only deployment.
    pub conventional_w: f64,
    pub throughput_bps: f64,
    pub ue_count: usize,
    pub sleeping_sites: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadioTrace {
    pub hours: Vec<RadioHour>,
}

/// Immutable per-run radio state.
struct RadioContext<'a> {
    layout: &'a Layout,
    config: &'a ScenarioConfig,
    /// `ln` of the received power (mW) at the reference distance without
    /// shadowing.
    ln_rx_ref: f64,
    noise_mw: f64,
    curve: PowerCurve,
}

const LN10_OVER_10: f64 = std::f64::consts::LN_10 / 10.0;

/// Per-UE result of association.
#[derive(Debug, Clone, Copy)]
pub struct UeOutcome {
    pub home_cell: SiteId,
    pub serving: ServingSet,
}

impl<'a> RadioContext<'a> {
    fn new(layout: &'a Layout, config: &'a ScenarioConfig) -> Result<Self> {
        Ok(RadioContext {
            layout,
            config,
            ln_rx_ref: LN10_OVER_10 * (config.channel.tx_power_per_rb_dbm() - config.channel.reference_loss_db()),
            noise_mw: config.channel.noise_mw(),
            curve: PowerCurve::new(&config.power)?,
        })
    }

    /// Associates every UE under `mode`, given the home-cell RB occupancy.
    fn associate_all(&self, ues: &[UserEquipment], mode: CompMode) -> Result<Vec<UeOutcome>> {
        let sites = self.layout.len();
        let rb_count = self.config.channel.rb_count;
        let mut occupancy = vec![false; sites * rb_count];
        for ue in ues {
            occupancy[ue.home_cell.0 * rb_count + ue.rb_index] = true;
        }
        let mut distances = vec![0.0; sites];
        let mut rx_mw = vec![0.0; sites];
        let mut occupied = vec![false; sites];
        let mut out = Vec::with_capacity(ues.len());
        let d0 = self.config.channel.ref_distance_m;
        let half_n = 0.5 * self.config.channel.pathloss_exponent;
        for ue in ues {
            for (k, site) in self.layout.sites().iter().enumerate() {
                let dx = ue.position.x - site.position.x;
                let dy = ue.position.y - site.position.y;
                let d2 = dx * dx + dy * dy;
                distances[k] = d2.sqrt();
                // same as tx - path_loss(d) + shadow in dB, in one exp
                let rel2 = (d2 / (d0 * d0)).max(1.0);
                rx_mw[k] = (self.ln_rx_ref + LN10_OVER_10 * ue.shadow_db[k] - half_n * rel2.ln()).exp();
                occupied[k] = occupancy[k * rb_count + ue.rb_index];
            }
            let links = UeLinks {
                distances_m: &distances,
                rx_mw: &rx_mw,
                occupied: &occupied,
                noise_mw: self.noise_mw,
            };
            out.push(UeOutcome {
                home_cell: ue.home_cell,
                serving: associate(mode, &links)?,
            });
        }
        Ok(out)
    }

    fn hour(&self, loads: &[f64], drop_rng: &mut ChaCha8Rng, shadow_rng: &mut ChaCha8Rng) -> Result<RadioHour> {
        let sites = self.layout.len();
        let rb_count = self.config.channel.rb_count;
        let mut ues = place_ues(self.layout, loads, rb_count, drop_rng);
        draw_shadowing(&mut ues, sites, self.config.channel.shadow_sigma_db, shadow_rng);
        let outcomes = self.associate_all(&ues, self.config.comp_mode)?;

        let mut served = vec![false; sites * rb_count];
        let mut home_count = vec![0usize; sites];
        let mut throughput = 0.0;
        for (ue, o) in ues.iter().zip(&outcomes) {
            home_count[ue.home_cell.0] += 1;
            throughput += ue_throughput(o.serving.sinr, self.config.channel.rb_bandwidth_hz);
            for s in o.serving.servers() {
                served[s.0 * rb_count + ue.rb_index] = true;
            }
        }
        let rb = rb_count as f64;
        let mut sleeping = 0;
        let demand_w: Vec<f64> = (0..sites)
            .map(|k| {
                let used = served[k * rb_count..(k + 1) * rb_count].iter().filter(|&&b| b).count();
                if used == 0 {
                    sleeping += 1;
                }
                self.curve.input_power(used as f64 / rb)
            })
            .collect();
        let conventional_w = home_count
            .iter()
            .map(|&n| self.curve.input_power_always_on(n as f64 / rb))
            .sum();
        Ok(RadioHour {
            demand_w,
            conventional_w,
            throughput_bps: throughput,
            ue_count: ues.len(),
            sleeping_sites: sleeping,
        })
    }
}

fn spatial_factors(seed: u64, stream: u64, hour: Option<usize>, sites: usize) -> Vec<f64> {
    let mut rng = substream(seed, stream, hour);
    (0..sites).map(|_| rng.gen::<f64>()).collect()
}

/// Per-site loads for `hour` of the iteration with seed `seed`.
fn hour_loads(config: &ScenarioConfig, seed: u64, hour: usize, sites: usize, fixed: &[f64]) -> Vec<f64> {
    let fresh;
    let u = match config.load_redraw {
        LoadRedraw::PerIteration => fixed,
        LoadRedraw::PerHour => {
            fresh = spatial_factors(seed, STREAM_LOAD, Some(hour), sites);
            &fresh
        }
    };
    u.iter()
        .map(|&u| draw_load(config.load_mode, &config.traffic, hour, u))
        .collect()
}

/// Radio phase of one iteration.
pub fn radio_trace(config: &ScenarioConfig, layout: &Layout, iteration: usize) -> Result<RadioTrace> {
    let ctx = RadioContext::new(layout, config)?;
    let seed = iteration_seed(config.master_seed, iteration as u64);
    let sites = layout.len();
    let fixed = spatial_factors(seed, STREAM_LOAD, None, sites);
    let hours = (0..config.horizon_hours())
        .map(|h| {
            let loads = hour_loads(config, seed, h, sites, &fixed);
            let mut drop_rng = substream(seed, STREAM_DROP, Some(h));
            let mut shadow_rng = substream(seed, STREAM_SHADOW, Some(h));
            ctx.hour(&loads, &mut drop_rng, &mut shadow_rng)
        })
        .collect::<Result<_>>()?;
    Ok(RadioTrace { hours })
}

/// Radio traces for every iteration, computed in parallel.
pub fn radio_traces(config: &ScenarioConfig) -> Result<Vec<RadioTrace>> {
    config.validate()?;
    let layout = Layout::hexagonal(config.cell_radius_m, config.tiers)?;
    (0..config.iterations)
        .into_par_iter()
        .map(|i| radio_trace(config, &layout, i))
        .collect()
}

#[derive(Debug, Clone)]
pub struct IterationOutput {
    pub hours: Vec<HourRecord>,
    /// Per-hour, per-site ledger rows when requested.
    pub ledgers: Option<Vec<Vec<LedgerRow>>>,
}

/// Energy phase of one iteration, replayed over a radio trace.
pub fn replay_energy(
    config: &ScenarioConfig,
    layout: &Layout,
    trace: &RadioTrace,
    iteration: usize,
    keep_ledgers: bool,
) -> Result<IterationOutput> {
    let sites = layout.len();
    let seed = iteration_seed(config.master_seed, iteration as u64);
    let scales: Vec<f64> = spatial_factors(seed, STREAM_SOLAR, None, sites)
        .into_iter()
        .map(|u| config.solar.site_scale(u))
        .collect();
    let neighbors = (0..sites)
        .map(|n| layout.first_tier_neighbors(SiteId(n)).map(<[SiteId]>::to_vec))
        .collect::<Result<Vec<_>>>()?;
    let mut network = EnergyNetwork::new(neighbors, config.storage)?;

    let mut hours = Vec::with_capacity(trace.hours.len());
    let mut ledgers = keep_ledgers.then(|| Vec::with_capacity(trace.hours.len()));
    let mut generation = vec![0.0; sites];
    for (h, radio) in trace.hours.iter().enumerate() {
        for (g, &scale) in generation.iter_mut().zip(&scales) {
            *g = config.solar.generation(h, scale);
        }
        let rows = network.step_hour(&generation, &radio.demand_w, &config.alpha, &config.sharing)?;
        hours.push(HourRecord::from_ledger(
            &rows,
            radio.throughput_bps,
            radio.conventional_w,
            radio.sleeping_sites,
        )?);
        if let Some(l) = ledgers.as_mut() {
            l.push(rows);
        }
    }
    Ok(IterationOutput { hours, ledgers })
}

/// One complete iteration (radio and energy).
pub fn run_iteration(config: &ScenarioConfig, iteration: usize, keep_ledgers: bool) -> Result<IterationOutput> {
    config.validate()?;
    let layout = Layout::hexagonal(config.cell_radius_m, config.tiers)?;
    let trace = radio_trace(config, &layout, iteration)?;
    replay_energy(config, &layout, &trace, iteration, keep_ledgers)
}

/// Iteration-averaged view of one simulated hour.
#[derive(Debug, Clone, PartialEq)]
pub struct HourSummary {
    pub hour: usize,
    pub throughput_bps: Estimate,
    pub grid_w: Estimate,
    pub solar_w: Estimate,
    pub demand_w: Estimate,
    pub conventional_w: Estimate,
    pub savings_solar_pct: Estimate,
    pub savings_conv_pct: Estimate,
    pub sleeping_sites: Estimate,
    /// Mean throughput over mean grid power; `None` when the grid is idle.
    pub ee_bits_per_j: Option<Estimate>,
    /// Mean grid power over mean throughput; zero when the grid is idle and
    /// `None` when there is grid draw but no traffic.
    pub eci_j_per_bit: Option<f64>,
}

/// Horizon totals, one sample per iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTotals {
    pub grid_wh: Estimate,
    pub solar_wh: Estimate,
    pub demand_wh: Estimate,
    pub conventional_wh: Estimate,
    pub generation_wh: Estimate,
    pub wastage_wh: Estimate,
    pub line_loss_wh: Estimate,
    pub shared_wh: Estimate,
    pub throughput_bps: Estimate,
    pub savings_solar_pct: Estimate,
    pub savings_conv_pct: Estimate,
    /// Total bits over total grid joules.
    pub ee_bits_per_j: Estimate,
    pub eci_j_per_bit: f64,
    /// Mean of the hourly EE series over hours where it is defined.
    pub mean_hourly_ee: f64,
    pub undefined_ee_hours: usize,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub config: ScenarioConfig,
    pub hours: Vec<HourSummary>,
    pub totals: RunTotals,
    pub iterations: Vec<IterationOutput>,
}

/// Runs every iteration and aggregates.
pub fn run_monte_carlo(config: &ScenarioConfig) -> Result<RunResult> {
    let traces = radio_traces(config)?;
    run_monte_carlo_with_traces(config, &traces)
}

/// Energy phase over precomputed radio traces (one per iteration).
pub fn run_monte_carlo_with_traces(config: &ScenarioConfig, traces: &[RadioTrace]) -> Result<RunResult> {
    config.validate()?;
    if traces.len() != config.iterations {
        return Err(Error::invalid(
            "traces",
            format!("{} traces for {} iterations", traces.len(), config.iterations),
        ));
    }
    let layout = Layout::hexagonal(config.cell_radius_m, config.tiers)?;
    let outputs: Vec<IterationOutput> = traces
        .par_iter()
        .enumerate()
        .map(|(i, t)| {
            if t.hours.len() != config.horizon_hours() {
                return Err(Error::invalid("traces", "trace horizon differs from config"));
            }
            replay_energy(config, &layout, t, i, false)
        })
        .collect::<Result<_>>()?;
    Ok(aggregate(config, outputs))
}

fn aggregate(config: &ScenarioConfig, outputs: Vec<IterationOutput>) -> RunResult {
    let horizon = config.horizon_hours();
    let column = |h: usize, f: fn(&HourRecord) -> f64| -> Vec<f64> { outputs.iter().map(|o| f(&o.hours[h])).collect() };

    let hours: Vec<HourSummary> = (0..horizon)
        .map(|h| {
            let thr = column(h, |r| r.throughput_bps);
            let grid = column(h, |r| r.grid_w);
            let grid_est = Estimate::from_samples(&grid);
            let thr_est = Estimate::from_samples(&thr);
            let ee = (grid_est.mean > 0.0).then(|| Estimate::ratio(&thr, &grid));
            let eci = if grid_est.mean <= 0.0 {
                Some(0.0)
            } else if thr_est.mean > 0.0 {
                Some(grid_est.mean / thr_est.mean)
            } else {
                None
            };
            HourSummary {
                hour: h,
                throughput_bps: thr_est,
                grid_w: grid_est,
                solar_w: Estimate::from_samples(&column(h, |r| r.solar_w)),
                demand_w: Estimate::from_samples(&column(h, |r| r.demand_w)),
                conventional_w: Estimate::from_samples(&column(h, |r| r.conventional_w)),
                savings_solar_pct: Estimate::from_samples(&column(h, |r| r.savings_solar_pct)),
                savings_conv_pct: Estimate::from_samples(&column(h, |r| r.savings_conv_pct)),
                sleeping_sites: Estimate::from_samples(&column(h, |r| r.sleeping_sites as f64)),
                ee_bits_per_j: ee,
                eci_j_per_bit: eci,
            }
        })
        .collect();

    let first = if config.discard_warmup && config.horizon_days > 1 {
        HOURS_PER_DAY
    } else {
        0
    };
    let total = |f: fn(&HourRecord) -> f64| -> Vec<f64> {
        outputs.iter().map(|o| o.hours[first..].iter().map(f).sum()).collect()
    };
    let grid = total(|r| r.grid_w);
    let solar = total(|r| r.solar_w);
    let demand = total(|r| r.demand_w);
    let conventional = total(|r| r.conventional_w);
    let throughput_sum = total(|r| r.throughput_bps);
    let included = (horizon - first) as f64;
    let throughput_mean: Vec<f64> = throughput_sum.iter().map(|t| t / included).collect();
    let solar_share: Vec<f64> = solar.iter().zip(&demand).map(|(s, d)| 100.0 * s / d).collect();
    let conv: Vec<f64> = grid
        .iter()
        .zip(&conventional)
        .map(|(g, c)| crate::metrics::savings_vs_conventional(*g, *c))
        .collect();
    let ee = Estimate::ratio(&throughput_sum, &grid);
    let eci = if ee.mean.is_infinite() { 0.0 } else { 1.0 / ee.mean };
    let defined: Vec<f64> = hours[first..]
        .iter()
        .filter_map(|h| h.ee_bits_per_j.map(|e| e.mean))
        .collect();
    let undefined = (horizon - first) - defined.len();
    let mean_hourly_ee = if defined.is_empty() {
        f64::INFINITY
    } else {
        defined.iter().sum::<f64>() / defined.len() as f64
    };

    let totals = RunTotals {
        grid_wh: Estimate::from_samples(&grid),
        solar_wh: Estimate::from_samples(&solar),
        demand_wh: Estimate::from_samples(&demand),
        conventional_wh: Estimate::from_samples(&conventional),
        generation_wh: Estimate::from_samples(&total(|r| r.generation_wh)),
        wastage_wh: Estimate::from_samples(&total(|r| r.wastage_wh)),
        line_loss_wh: Estimate::from_samples(&total(|r| r.line_loss_wh)),
        shared_wh: Estimate::from_samples(&total(|r| r.shared_wh)),
        throughput_bps: Estimate::from_samples(&throughput_mean),
        savings_solar_pct: Estimate::from_samples(&solar_share),
        savings_conv_pct: Estimate::from_samples(&conv),
        ee_bits_per_j: ee,
        eci_j_per_bit: eci,
        mean_hourly_ee,
        undefined_ee_hours: undefined,
    };

    RunResult {
        config: config.clone(),
        hours,
        totals,
        iterations: outputs,
    }
}

/// Received SINR samples (dB) of every UE over `drops` independent network
/// snapshots at a fixed per-cell load, for CDF plots.
pub fn sinr_samples(
    config: &ScenarioConfig,
    mode: CompMode,
    load: f64,
    drops: usize,
    center_only: bool,
) -> Result<Vec<f64>> {
    config.validate()?;
    let layout = Layout::hexagonal(config.cell_radius_m, config.tiers)?;
    let ctx = RadioContext::new(&layout, config)?;
    let loads = vec![load.clamp(0.0, 1.0); layout.len()];
    let per_drop: Vec<Vec<f64>> = (0..drops)
        .into_par_iter()
        .map(|d| {
            let seed = iteration_seed(config.master_seed, d as u64);
            let mut drop_rng = substream(seed, STREAM_DROP, Some(0));
            let mut shadow_rng = substream(seed, STREAM_SHADOW, Some(0));
            let mut ues = place_ues(&layout, &loads, config.channel.rb_count, &mut drop_rng);
            draw_shadowing(&mut ues, layout.len(), config.channel.shadow_sigma_db, &mut shadow_rng);
            let outcomes = ctx.associate_all(&ues, mode)?;
            Ok(outcomes
                .iter()
                .filter(|o| !center_only || o.home_cell == SiteId::CENTER)
                .map(|o| linear_to_db(o.serving.sinr))
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(per_drop.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::SharingPolicy;

    fn small(days: usize, iterations: usize) -> ScenarioConfig {
        ScenarioConfig {
            horizon_days: days,
            iterations,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn fast_link_budget_matches_path_loss() {
        use crate::radio::{dbm_to_mw, received_power};
        let cfg = ScenarioConfig::default();
        let layout = Layout::hexagonal(1000.0, 1).unwrap();
        let ctx = RadioContext::new(&layout, &cfg).unwrap();
        let tx = cfg.channel.tx_power_per_rb_dbm();
        for (d, shadow) in [(50.0, 0.0), (100.0, 3.0), (733.0, -8.0), (2500.0, 1.5)] {
            let fast = (ctx.ln_rx_ref + LN10_OVER_10 * shadow
                - 0.5 * cfg.channel.pathloss_exponent * (d * d / 1e4f64).max(1.0).ln())
            .exp();
            let slow = dbm_to_mw(received_power(&cfg.channel, tx, d, shadow).unwrap());
            assert!((fast / slow - 1.0).abs() < 1e-12, "{d}: {fast} vs {slow}");
        }
    }

    #[test]
    fn load_draws() {
        let zero = HourlyProfile::zeros();
        assert_eq!(draw_load(LoadMode::ProfileTimesUniform, &zero, 5, 0.7), 0.0);
        let one = HourlyProfile::constant(1.0).unwrap();
        assert_eq!(draw_load(LoadMode::ProfileOnly, &one, 5, 0.2), 1.0);
        assert_eq!(draw_load(LoadMode::ProfileTimesUniform, &one, 5, 0.2), 0.2);
    }

    #[test]
    fn ue_counts() {
        assert_eq!(ues_for_load(1.0, 50), 50);
        assert_eq!(ues_for_load(0.0, 50), 0);
        assert_eq!(ues_for_load(0.3, 50), 15);
        assert_eq!(ues_for_load(0.301, 50), 16);
        assert_eq!(ues_for_load(1e-6, 50), 1);
    }

    #[test]
    fn drops_stay_in_home_cell_with_distinct_rbs() {
        let layout = Layout::hexagonal(1000.0, 2).unwrap();
        let mut rng = substream(9, STREAM_DROP, Some(0));
        let loads: Vec<f64> = (0..19).map(|i| i as f64 / 18.0).collect();
        let ues = place_ues(&layout, &loads, 50, &mut rng);
        for site in layout.site_ids() {
            let mine: Vec<&UserEquipment> = ues.iter().filter(|u| u.home_cell == site).collect();
            assert_eq!(mine.len(), ues_for_load(loads[site.0], 50));
            let mut rbs: Vec<usize> = mine.iter().map(|u| u.rb_index).collect();
            rbs.sort_unstable();
            rbs.dedup();
            assert_eq!(rbs.len(), mine.len());
            for u in mine {
                assert_eq!(layout.nearest_site(u.position), site);
            }
        }
    }

    #[test]
    fn full_load_fills_every_rb() {
        let layout = Layout::hexagonal(1000.0, 1).unwrap();
        let mut rng = substream(3, STREAM_DROP, Some(0));
        let ues = place_ues(&layout, &[1.0; 7], 50, &mut rng);
        assert_eq!(ues.len(), 350);
    }

    #[test]
    fn iteration_is_deterministic() {
        let cfg = small(1, 1);
        let a = run_iteration(&cfg, 0, false).unwrap();
        let b = run_iteration(&cfg, 0, false).unwrap();
        assert_eq!(a.hours, b.hours);
        let c = run_iteration(&cfg, 1, false).unwrap();
        assert_ne!(a.hours, c.hours);
    }

    #[test]
    fn single_iteration_run_matches_iteration() {
        let cfg = small(1, 1);
        let run = run_monte_carlo(&cfg).unwrap();
        let it = run_iteration(&cfg, 0, false).unwrap();
        for (s, r) in run.hours.iter().zip(&it.hours) {
            assert_eq!(s.grid_w.mean, r.grid_w);
            assert_eq!(s.throughput_bps.mean, r.throughput_bps);
            assert_eq!(s.grid_w.stderr, 0.0);
        }
    }

    #[test]
    fn without_sharing_grid_covers_storage_shortfall() {
        let mut cfg = small(2, 1);
        cfg.sharing = SharingPolicy::disabled();
        let out = run_iteration(&cfg, 0, true).unwrap();
        for rows in out.ledgers.unwrap() {
            for r in rows {
                let available = cfg.storage.factor * r.storage_before + r.generation;
                let expect = (r.demand - available).max(0.0);
                assert!((r.grid_used - expect).abs() < 1e-9, "{r:?}");
            }
        }
    }

    #[test]
    fn zero_solar_means_all_grid() {
        let mut cfg = small(1, 2);
        cfg.solar.profile = HourlyProfile::zeros();
        let run = run_monte_carlo(&cfg).unwrap();
        for h in &run.hours {
            assert_eq!(h.grid_w.mean, h.demand_w.mean);
            assert_eq!(h.savings_solar_pct.mean, 0.0);
        }
    }

    #[test]
    fn sleep_iff_no_users() {
        let mut cfg = small(1, 1);
        cfg.comp_mode = CompMode::NonComp;
        cfg.traffic = HourlyProfile::new({
            let mut v = [0.5; 24];
            v[3] = 0.0;
            v
        })
        .unwrap();
        let layout = Layout::hexagonal(1000.0, 2).unwrap();
        let trace = radio_trace(&cfg, &layout, 0).unwrap();
        assert_eq!(trace.hours[3].sleeping_sites, 19);
        assert!(trace.hours[3].demand_w.iter().all(|&d| d == 54.0));
        assert_eq!(trace.hours[3].throughput_bps, 0.0);
        for h in &trace.hours {
            let asleep = h.demand_w.iter().filter(|&&d| d == 54.0).count();
            assert_eq!(asleep, h.sleeping_sites);
        }
    }

    #[test]
    fn jt_demands_at_least_dps() {
        let mut cfg = small(1, 1);
        cfg.tiers = 1;
        let layout = Layout::hexagonal(cfg.cell_radius_m, 1).unwrap();
        cfg.comp_mode = CompMode::Dps;
        let dps = radio_trace(&cfg, &layout, 0).unwrap();
        cfg.comp_mode = CompMode::Jt;
        let jt = radio_trace(&cfg, &layout, 0).unwrap();
        for (a, b) in dps.hours.iter().zip(&jt.hours) {
            let da: f64 = a.demand_w.iter().sum();
            let db: f64 = b.demand_w.iter().sum();
            assert!(db >= da - 1e-9, "jt {db} < dps {da}");
            assert_eq!(a.ue_count, b.ue_count);
            assert_eq!(a.conventional_w, b.conventional_w);
        }
    }

    #[test]
    fn solar_draws_do_not_perturb_radio() {
        let mut cfg = small(1, 1);
        let layout = Layout::hexagonal(1000.0, 2).unwrap();
        let a = radio_trace(&cfg, &layout, 0).unwrap();
        cfg.solar.spatial_mode = crate::energy::SpatialMode::UniformRandom;
        cfg.storage.capacity_wh = 500.0;
        let b = radio_trace(&cfg, &layout, 0).unwrap();
        assert_eq!(a, b);
    }
}
