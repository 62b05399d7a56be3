//! Hourly green-energy sharing between first-tier neighbours.
//!
//! Every site first serves its own demand from storage. Sites left short
//! (ascending id) then pull surplus from their neighbours, richest first,
//! over lossy lines that deliver a fraction `α` of what is sent. Whatever
//! is still missing comes from the grid.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::storage::{step_storage, StorageState};
use crate::error::{Error, Result};
use crate::geometry::SiteId;

/// Delivered fraction per inter-site line. Lookups are symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaMap {
    default: f64,
    links: BTreeMap<(usize, usize), f64>,
}

impl AlphaMap {
    pub fn uniform(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(AlphaMap {
            default: alpha,
            links: BTreeMap::new(),
        })
    }

    /// `α = 1 − loss/100` on every link.
    pub fn from_line_loss_pct(loss_pct: f64) -> Result<Self> {
        if !(0.0..=100.0).contains(&loss_pct) {
            return Err(Error::invalid("line_loss_pct", format!("{loss_pct} outside [0, 100]")));
        }
        Self::uniform(1.0 - loss_pct / 100.0)
    }

    pub fn with_link(mut self, a: SiteId, b: SiteId, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        self.links.insert(link_key(a, b), alpha);
        Ok(self)
    }

    pub fn default_alpha(&self) -> f64 {
        self.default
    }

    pub fn links(&self) -> impl Iterator<Item = (SiteId, SiteId, f64)> + '_ {
        self.links.iter().map(|(&(a, b), &v)| (SiteId(a), SiteId(b), v))
    }

    #[inline]
    pub fn get(&self, a: SiteId, b: SiteId) -> f64 {
        if self.links.is_empty() {
            return self.default;
        }
        self.links.get(&link_key(a, b)).copied().unwrap_or(self.default)
    }
}

fn link_key(a: SiteId, b: SiteId) -> (usize, usize) {
    (a.0.min(b.0), a.0.max(b.0))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid("alpha", format!("{alpha} outside [0, 1]")));
    }
    Ok(())
}

/// Ranking applied to a requester's neighbours before pulling energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DonorOrder {
    /// Descending stored energy (charge available this hour).
    #[default]
    StoredEnergy,
    /// Descending shareable surplus (stored energy minus own demand).
    Surplus,
}

impl DonorOrder {
    pub fn as_str(self) -> &'static str {
        match self {
            DonorOrder::StoredEnergy => "stored",
            DonorOrder::Surplus => "surplus",
        }
    }
}

impl FromStr for DonorOrder {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "stored" | "stored_energy" => Ok(DonorOrder::StoredEnergy),
            "surplus" => Ok(DonorOrder::Surplus),
            other => Err(format!("unknown donor order `{other}` (expected stored or surplus)")),
        }
    }
}

impl fmt::Display for DonorOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How much a donor is asked to send for a remaining need `r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TransferSizing {
    /// Send `r`; only `α·r` arrives and the shortfall moves on to the next donor.
    #[default]
    Literal,
    /// Send `r / α` so that `r` arrives.
    LossCompensating,
}

impl TransferSizing {
    pub fn as_str(self) -> &'static str {
        match self {
            TransferSizing::Literal => "literal",
            TransferSizing::LossCompensating => "loss_compensating",
        }
    }
}

impl FromStr for TransferSizing {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "literal" => Ok(TransferSizing::Literal),
            "loss_compensating" | "compensating" => Ok(TransferSizing::LossCompensating),
            other => Err(format!(
                "unknown transfer sizing `{other}` (expected literal or loss_compensating)"
            )),
        }
    }
}

impl fmt::Display for TransferSizing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SharingPolicy {
    pub enabled: bool,
    pub order: DonorOrder,
    pub sizing: TransferSizing,
}

impl Default for SharingPolicy {
    fn default() -> Self {
        SharingPolicy {
            enabled: true,
            order: DonorOrder::default(),
            sizing: TransferSizing::default(),
        }
    }
}

impl SharingPolicy {
    pub fn disabled() -> Self {
        SharingPolicy {
            enabled: false,
            ..Self::default()
        }
    }
}

/// Storage-side view of one site for one hour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HourInput {
    /// `μ·s(t−1) + r(t)`.
    pub available_wh: f64,
    pub demand_wh: f64,
}

/// Energy a site can give away after covering its own demand.
#[inline]
pub fn shareable_surplus(available_wh: f64, demand_wh: f64) -> f64 {
    (available_wh - demand_wh).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SiteShare {
    /// Demand covered from the site's own storage.
    pub own_used: f64,
    pub shared_out: f64,
    pub delivered_in: f64,
    /// Loss on energy sent to this site.
    pub line_loss_in: f64,
    pub grid: f64,
}

impl SiteShare {
    pub fn solar_used(&self) -> f64 {
        self.own_used + self.delivered_in
    }

    /// Total debit against the site's storage this hour.
    pub fn drawn(&self) -> f64 {
        self.own_used + self.shared_out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transfer {
    pub from: SiteId,
    pub to: SiteId,
    pub sent_wh: f64,
    pub delivered_wh: f64,
}

#[derive(Debug, Clone, Default)]
pub struct SharingOutcome {
    pub sites: Vec<SiteShare>,
    pub transfers: Vec<Transfer>,
}

impl SharingOutcome {
    pub fn total_grid(&self) -> f64 {
        self.sites.iter().map(|s| s.grid).sum()
    }
}

/// Runs one hour of the sharing procedure over all sites.
///
/// `neighbors[n]` lists the sites `n` may pull from. Donor surpluses are
/// debited as transfers happen, so later requesters see what is left.
pub fn run_sharing(
    neighbors: &[Vec<SiteId>],
    inputs: &[HourInput],
    alpha: &AlphaMap,
    policy: &SharingPolicy,
) -> Result<SharingOutcome> {
    if neighbors.len() != inputs.len() {
        return Err(Error::invalid(
            "neighbors",
            format!("{} neighbor lists for {} sites", neighbors.len(), inputs.len()),
        ));
    }
    for (n, input) in inputs.iter().enumerate() {
        if !(input.available_wh >= 0.0 && input.demand_wh >= 0.0) {
            return Err(Error::invalid(
                "hour_input",
                format!("site {n}: storage and demand must be non-negative"),
            ));
        }
    }

    let mut sites: Vec<SiteShare> = inputs
        .iter()
        .map(|i| {
            let own_used = i.available_wh.min(i.demand_wh);
            SiteShare {
                own_used,
                grid: i.demand_wh - own_used,
                ..SiteShare::default()
            }
        })
        .collect();
    let mut transfers = Vec::new();

    if !policy.enabled {
        return Ok(SharingOutcome { sites, transfers });
    }

    let mut stored: Vec<f64> = inputs.iter().map(|i| i.available_wh).collect();
    let mut surplus: Vec<f64> = inputs
        .iter()
        .map(|i| shareable_surplus(i.available_wh, i.demand_wh))
        .collect();
    let mut ranked: Vec<SiteId> = Vec::with_capacity(6);

    for n in 0..inputs.len() {
        let need = sites[n].grid;
        if need <= 0.0 {
            continue;
        }
        let me = SiteId(n);
        ranked.clear();
        ranked.extend_from_slice(&neighbors[n]);
        for &m in &ranked {
            if m.0 >= inputs.len() || m == me {
                return Err(Error::UnknownSite(m.0));
            }
        }
        let key = |m: &SiteId| match policy.order {
            DonorOrder::StoredEnergy => stored[m.0],
            DonorOrder::Surplus => surplus[m.0],
        };
        ranked.sort_by(|a, b| key(b).total_cmp(&key(a)).then(a.cmp(b)));

        let done = 1e-12 * need.max(1.0);
        let mut delivered_total = 0.0;
        for &m in &ranked {
            let remaining = need - delivered_total;
            if remaining <= done {
                break;
            }
            let available = surplus[m.0];
            if available <= 0.0 {
                continue;
            }
            let a = alpha.get(me, m);
            let wanted = match policy.sizing {
                TransferSizing::Literal => remaining,
                TransferSizing::LossCompensating if a > 0.0 => remaining / a,
                TransferSizing::LossCompensating => continue,
            };
            let sent = wanted.min(available);
            let delivered = a * sent;
            surplus[m.0] -= sent;
            stored[m.0] -= sent;
            sites[m.0].shared_out += sent;
            sites[n].delivered_in += delivered;
            sites[n].line_loss_in += sent - delivered;
            delivered_total += delivered;
            transfers.push(Transfer {
                from: m,
                to: me,
                sent_wh: sent,
                delivered_wh: delivered,
            });
        }
        sites[n].grid = (need - delivered_total).max(0.0);
        if sites[n].grid <= done {
            sites[n].grid = 0.0;
        }
    }

    Ok(SharingOutcome { sites, transfers })
}

/// Full energy account of one site for one hour.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LedgerRow {
    pub site: usize,
    pub generation: f64,
    pub demand: f64,
    pub solar_used: f64,
    pub grid_used: f64,
    pub shared_out: f64,
    pub shared_in_delivered: f64,
    pub line_loss: f64,
    pub wastage: f64,
    pub leakage: f64,
    pub storage_before: f64,
    pub storage_after: f64,
}

/// Batteries of every site plus the sharing topology.
#[derive(Debug, Clone)]
pub struct EnergyNetwork {
    neighbors: Vec<Vec<SiteId>>,
    storages: Vec<StorageState>,
}

impl EnergyNetwork {
    pub fn new(neighbors: Vec<Vec<SiteId>>, template: StorageState) -> Result<Self> {
        template.validate()?;
        let storages = vec![template; neighbors.len()];
        Ok(EnergyNetwork { neighbors, storages })
    }

    pub fn with_storages(neighbors: Vec<Vec<SiteId>>, storages: Vec<StorageState>) -> Result<Self> {
        if neighbors.len() != storages.len() {
            return Err(Error::invalid("storages", "one storage per site required"));
        }
        for s in &storages {
            s.validate()?;
        }
        Ok(EnergyNetwork { neighbors, storages })
    }

    pub fn storages(&self) -> &[StorageState] {
        &self.storages
    }

    pub fn neighbors(&self) -> &[Vec<SiteId>] {
        &self.neighbors
    }

    /// Serves one hour of demand: own storage, then sharing, then grid. Each
    /// battery is stepped exactly once.
    pub fn step_hour(
        &mut self,
        generation: &[f64],
        demand: &[f64],
        alpha: &AlphaMap,
        policy: &SharingPolicy,
    ) -> Result<Vec<LedgerRow>> {
        let n = self.storages.len();
        if generation.len() != n || demand.len() != n {
            return Err(Error::invalid("step_hour", "generation/demand length mismatch"));
        }
        let inputs: Vec<HourInput> = self
            .storages
            .iter()
            .zip(generation)
            .zip(demand)
            .map(|((s, &r), &d)| HourInput {
                available_wh: s.available(r),
                demand_wh: d,
            })
            .collect();
        let outcome = run_sharing(&self.neighbors, &inputs, alpha, policy)?;

        let mut rows = Vec::with_capacity(n);
        for (i, share) in outcome.sites.iter().enumerate() {
            let before = self.storages[i];
            let (after, wastage) = step_storage(before, generation[i], share.drawn())?;
            self.storages[i] = after;
            rows.push(LedgerRow {
                site: i,
                generation: generation[i],
                demand: demand[i],
                solar_used: share.solar_used(),
                grid_used: share.grid,
                shared_out: share.shared_out,
                shared_in_delivered: share.delivered_in,
                line_loss: share.line_loss_in,
                wastage,
                leakage: before.leakage(),
                storage_before: before.level_wh,
                storage_after: after.level_wh,
            });
        }
        Ok(rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    /// Requester 0 short by 200 Wh; neighbours 1 and 2 hold 150 and 500 Wh of
    /// surplus, with site 1 holding more stored energy overall.
    fn two_donor_case() -> (Vec<Vec<SiteId>>, Vec<HourInput>) {
        let neighbors = vec![vec![SiteId(1), SiteId(2)], vec![SiteId(0)], vec![SiteId(0)]];
        let inputs = vec![
            HourInput {
                available_wh: 0.0,
                demand_wh: 200.0,
            },
            HourInput {
                available_wh: 1000.0,
                demand_wh: 850.0,
            },
            HourInput {
                available_wh: 700.0,
                demand_wh: 200.0,
            },
        ];
        (neighbors, inputs)
    }

    #[test]
    fn lossless_exact_cover() {
        let (nb, inputs) = two_donor_case();
        let out = run_sharing(
            &nb,
            &inputs,
            &AlphaMap::uniform(1.0).unwrap(),
            &SharingPolicy::default(),
        )
        .unwrap();
        let sent: Vec<f64> = out.transfers.iter().map(|t| t.sent_wh).collect();
        assert_eq!(sent, vec![150.0, 50.0]);
        assert_eq!(out.sites[0].grid, 0.0);
        assert_eq!(out.sites[0].solar_used(), 200.0);
    }

    #[test]
    fn lossy_residual_goes_to_grid() {
        let (nb, inputs) = two_donor_case();
        let out = run_sharing(
            &nb,
            &inputs,
            &AlphaMap::uniform(0.9).unwrap(),
            &SharingPolicy::default(),
        )
        .unwrap();
        let sent: Vec<f64> = out.transfers.iter().map(|t| t.sent_wh).collect();
        let got: Vec<f64> = out.transfers.iter().map(|t| t.delivered_wh).collect();
        assert_abs_diff_eq!(sent[0], 150.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sent[1], 65.0, epsilon = 1e-9);
        assert_abs_diff_eq!(got[0], 135.0, epsilon = 1e-9);
        assert_abs_diff_eq!(got[1], 58.5, epsilon = 1e-9);
        assert_abs_diff_eq!(out.sites[0].grid, 6.5, epsilon = 1e-9);
        assert_abs_diff_eq!(out.sites[0].line_loss_in, 21.5, epsilon = 1e-9);
    }

    #[test]
    fn disabled_falls_back_to_grid() {
        let (nb, inputs) = two_donor_case();
        let out = run_sharing(
            &nb,
            &inputs,
            &AlphaMap::uniform(1.0).unwrap(),
            &SharingPolicy::disabled(),
        )
        .unwrap();
        assert!(out.transfers.is_empty());
        assert_eq!(out.sites[0].grid, 200.0);
        assert_eq!(out.sites[1].grid, 0.0);
    }

    #[test]
    fn surplus_order_picks_richest_surplus_first() {
        let (nb, inputs) = two_donor_case();
        let policy = SharingPolicy {
            order: DonorOrder::Surplus,
            ..SharingPolicy::default()
        };
        let out = run_sharing(&nb, &inputs, &AlphaMap::uniform(0.9).unwrap(), &policy).unwrap();
        assert_eq!(out.transfers[0].from, SiteId(2));
        assert_abs_diff_eq!(out.sites[0].grid, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn loss_compensating_covers_with_one_donor() {
        let (nb, inputs) = two_donor_case();
        let policy = SharingPolicy {
            order: DonorOrder::Surplus,
            sizing: TransferSizing::LossCompensating,
            ..SharingPolicy::default()
        };
        let out = run_sharing(&nb, &inputs, &AlphaMap::uniform(0.8).unwrap(), &policy).unwrap();
        assert_eq!(out.transfers.len(), 1);
        assert_abs_diff_eq!(out.transfers[0].sent_wh, 250.0, epsilon = 1e-9);
        assert_eq!(out.sites[0].grid, 0.0);
    }

    #[test]
    fn surplus_examples() {
        assert_eq!(shareable_surplus(500.0, 300.0), 200.0);
        assert_eq!(shareable_surplus(300.0, 300.0), 0.0);
        assert_eq!(shareable_surplus(100.0, 300.0), 0.0);
    }

    #[test]
    fn alpha_validation() {
        assert!(AlphaMap::uniform(-0.1).is_err());
        assert!(AlphaMap::uniform(1.1).is_err());
        assert!(AlphaMap::from_line_loss_pct(120.0).is_err());
        let map = AlphaMap::from_line_loss_pct(25.0)
            .unwrap()
            .with_link(SiteId(3), SiteId(1), 0.5)
            .unwrap();
        assert_eq!(map.get(SiteId(0), SiteId(1)), 0.75);
        assert_eq!(map.get(SiteId(1), SiteId(3)), 0.5);
        assert!(map.clone().with_link(SiteId(0), SiteId(1), 2.0).is_err());
    }

    #[test]
    fn later_requesters_see_debited_donors() {
        // sites 0 and 2 both lean on site 1, which can spare 100 Wh
        let nb = vec![vec![SiteId(1)], vec![SiteId(0), SiteId(2)], vec![SiteId(1)]];
        let inputs = vec![
            HourInput {
                available_wh: 0.0,
                demand_wh: 80.0,
            },
            HourInput {
                available_wh: 300.0,
                demand_wh: 200.0,
            },
            HourInput {
                available_wh: 0.0,
                demand_wh: 80.0,
            },
        ];
        let out = run_sharing(
            &nb,
            &inputs,
            &AlphaMap::uniform(1.0).unwrap(),
            &SharingPolicy::default(),
        )
        .unwrap();
        assert_eq!(out.sites[0].grid, 0.0);
        assert_abs_diff_eq!(out.sites[2].grid, 60.0, epsilon = 1e-9);
        assert_abs_diff_eq!(out.sites[1].shared_out, 100.0, epsilon = 1e-9);
        assert_eq!(out.sites[1].own_used, 200.0);
    }

    #[test]
    fn step_hour_updates_storage_once() {
        let nb = vec![vec![SiteId(1)], vec![SiteId(0)]];
        let mut net = EnergyNetwork::with_storages(
            nb,
            vec![
                StorageState {
                    level_wh: 0.0,
                    capacity_wh: 2000.0,
                    factor: 0.96,
                },
                StorageState {
                    level_wh: 1000.0,
                    capacity_wh: 2000.0,
                    factor: 0.96,
                },
            ],
        )
        .unwrap();
        let rows = net
            .step_hour(
                &[0.0, 100.0],
                &[150.0, 200.0],
                &AlphaMap::uniform(0.9).unwrap(),
                &SharingPolicy::default(),
            )
            .unwrap();
        // site 1: 960 + 100 available, 200 own, 150 sent
        assert_abs_diff_eq!(net.storages()[1].level_wh, 710.0, epsilon = 1e-9);
        assert_abs_diff_eq!(rows[0].shared_in_delivered, 135.0, epsilon = 1e-9);
        assert_abs_diff_eq!(rows[0].grid_used, 15.0, epsilon = 1e-9);
        assert_abs_diff_eq!(rows[1].leakage, 40.0, epsilon = 1e-9);
    }

    fn random_instance() -> impl Strategy<Value = (Vec<Vec<SiteId>>, Vec<HourInput>, f64)> {
        (prop::collection::vec((0.0f64..1500.0, 0.0f64..400.0), 7), 0.0f64..=1.0).prop_map(|(sd, alpha)| {
            let nb: Vec<Vec<SiteId>> = (0..7)
                .map(|i| {
                    if i == 0 {
                        (1..7).map(SiteId).collect()
                    } else {
                        let mut v = vec![SiteId(0)];
                        v.push(SiteId(if i == 6 { 1 } else { i + 1 }));
                        v.push(SiteId(if i == 1 { 6 } else { i - 1 }));
                        v
                    }
                })
                .collect();
            let inputs = sd
                .into_iter()
                .map(|(s, d)| HourInput {
                    available_wh: s,
                    demand_wh: d,
                })
                .collect();
            (nb, inputs, alpha)
        })
    }

    proptest! {
        #[test]
        fn ledger_invariants((nb, inputs, alpha) in random_instance()) {
            let map = AlphaMap::uniform(alpha).unwrap();
            let out = run_sharing(&nb, &inputs, &map, &SharingPolicy::default()).unwrap();
            for (i, s) in out.sites.iter().enumerate() {
                let d = inputs[i].demand_wh;
                prop_assert!((s.solar_used() + s.grid - d).abs() < 1e-9 * (1.0 + d));
                prop_assert!(s.grid >= 0.0 && s.shared_out >= 0.0 && s.delivered_in >= 0.0);
                // donors keep enough for themselves
                prop_assert!(inputs[i].available_wh - s.drawn() >= -1e-9);
                if s.shared_out > 0.0 {
                    prop_assert!(inputs[i].available_wh - s.shared_out >= d - 1e-9);
                }
                let deficit = (d - inputs[i].available_wh).max(0.0);
                prop_assert!(s.delivered_in <= deficit + 1e-9);
            }
            let sent: f64 = out.transfers.iter().map(|t| t.sent_wh).sum();
            let got: f64 = out.transfers.iter().map(|t| t.delivered_wh).sum();
            let lost: f64 = out.sites.iter().map(|s| s.line_loss_in).sum();
            prop_assert!((sent - got - lost).abs() < 1e-9 * (1.0 + sent));
            for t in &out.transfers {
                prop_assert!((t.delivered_wh - alpha * t.sent_wh).abs() < 1e-9 * (1.0 + t.sent_wh));
            }
        }

        #[test]
        fn sharing_never_increases_grid_when_lossless((nb, inputs, _a) in random_instance()) {
            let map = AlphaMap::uniform(1.0).unwrap();
            let on = run_sharing(&nb, &inputs, &map, &SharingPolicy::default()).unwrap();
            let off = run_sharing(&nb, &inputs, &map, &SharingPolicy::disabled()).unwrap();
            prop_assert!(on.total_grid() <= off.total_grid() + 1e-9);
        }

        #[test]
        fn disabled_matches_plain_arithmetic((nb, inputs, alpha) in random_instance()) {
            let map = AlphaMap::uniform(alpha).unwrap();
            let off = run_sharing(&nb, &inputs, &map, &SharingPolicy::disabled()).unwrap();
            for (i, s) in off.sites.iter().enumerate() {
                let expect = (inputs[i].demand_wh - inputs[i].available_wh).max(0.0);
                prop_assert_eq!(s.grid, expect);
                prop_assert_eq!(s.shared_out, 0.0);
            }
        }

        #[test]
        fn ample_lossless_neighbors_zero_the_grid(
            need in 1.0f64..500.0,
            surpluses in prop::collection::vec(0.0f64..300.0, 6),
        ) {
            let total: f64 = surpluses.iter().sum();
            prop_assume!(total >= need);
            let nb: Vec<Vec<SiteId>> = std::iter::once((1..7).map(SiteId).collect())
                .chain((1..7).map(|_| vec![SiteId(0)]))
                .collect();
            let inputs: Vec<HourInput> = std::iter::once(HourInput { available_wh: 0.0, demand_wh: need })
                .chain(surpluses.iter().map(|&s| HourInput { available_wh: s + 100.0, demand_wh: 100.0 }))
                .collect();
            let out = run_sharing(&nb, &inputs, &AlphaMap::uniform(1.0).unwrap(), &SharingPolicy::default()).unwrap();
            prop_assert_eq!(out.sites[0].grid, 0.0);
        }
    }
}
