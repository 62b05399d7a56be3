//! Hexagonal macro-cell layout.
//!
//! Sites sit on a flat-top hexagonal lattice centred at the origin. Cells have
//! circumradius `R`, so adjacent sites are `√3·R` apart. Site ids are assigned
//! ring by ring (centre first), counter-clockwise within a ring starting from
//! the site at 30°.

use std::fmt;

use crate::error::{Error, Result};

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Index of a base-station site within a [`Layout`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SiteId(pub usize);

impl SiteId {
    pub const CENTER: SiteId = SiteId(0);

    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for SiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Site {
    pub id: SiteId,
    pub position: Point,
    pub tier: u8,
}

#[derive(Debug, Clone)]
pub struct Layout {
    cell_radius: f64,
    sites: Vec<Site>,
    neighbors: Vec<Vec<SiteId>>,
}

impl Layout {
    /// Builds a layout with the centre site plus `tiers` surrounding rings.
    pub fn hexagonal(cell_radius: f64, tiers: u8) -> Result<Self> {
        if !(cell_radius.is_finite() && cell_radius > 0.0) {
            return Err(Error::invalid("cell_radius", "must be positive"));
        }
        if !(1..=2).contains(&tiers) {
            return Err(Error::invalid("tiers", format!("{tiers} not in {{1, 2}}")));
        }

        let t = i32::from(tiers);
        let mut cells: Vec<(u8, f64, Point)> = Vec::new();
        for q in -t..=t {
            for r in -t..=t {
                let ring = (q.abs() + r.abs() + (q + r).abs()) / 2;
                if ring > t {
                    continue;
                }
                let x = 1.5 * cell_radius * f64::from(q);
                let y = SQRT_3 * cell_radius * (f64::from(r) + 0.5 * f64::from(q));
                let angle = (y.atan2(x) - std::f64::consts::FRAC_PI_6).rem_euclid(std::f64::consts::TAU);
                cells.push((ring as u8, angle, Point::new(x, y)));
            }
        }
        // Rounding keeps lattice points that are nominally at the same angle
        // from being reordered by floating-point noise.
        cells.sort_by(|a, b| a.0.cmp(&b.0).then((a.1 * 1e9).round().total_cmp(&(b.1 * 1e9).round())));

        let sites: Vec<Site> = cells
            .into_iter()
            .enumerate()
            .map(|(i, (tier, _, position))| Site {
                id: SiteId(i),
                position,
                tier,
            })
            .collect();

        let spacing = SQRT_3 * cell_radius;
        let tol = 1e-6 * cell_radius;
        let neighbors = sites
            .iter()
            .map(|a| {
                sites
                    .iter()
                    .filter(|b| b.id != a.id && (a.position.distance(b.position) - spacing).abs() <= tol)
                    .map(|b| b.id)
                    .collect()
            })
            .collect();

        Ok(Layout {
            cell_radius,
            sites,
            neighbors,
        })
    }

    pub fn cell_radius(&self) -> f64 {
        self.cell_radius
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn site(&self, id: SiteId) -> Result<&Site> {
        self.sites.get(id.0).ok_or(Error::UnknownSite(id.0))
    }

    pub fn position(&self, id: SiteId) -> Point {
        self.sites[id.0].position
    }

    pub fn site_ids(&self) -> impl Iterator<Item = SiteId> + '_ {
        self.sites.iter().map(|s| s.id)
    }

    /// Sites at lattice spacing from `id`; fewer than six on the layout edge.
    pub fn first_tier_neighbors(&self, id: SiteId) -> Result<&[SiteId]> {
        self.neighbors
            .get(id.0)
            .map(Vec::as_slice)
            .ok_or(Error::UnknownSite(id.0))
    }

    /// Every other site ordered by ascending distance from `id`, ties by id.
    pub fn interferer_set(&self, id: SiteId) -> Result<Vec<SiteId>> {
        let origin = self.site(id)?.position;
        let mut others: Vec<(f64, SiteId)> = self
            .sites
            .iter()
            .filter(|s| s.id != id)
            .map(|s| (origin.distance(s.position), s.id))
            .collect();
        others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        Ok(others.into_iter().map(|(_, id)| id).collect())
    }

    /// Closest site to `p`, lowest id on ties.
    pub fn nearest_site(&self, p: Point) -> SiteId {
        let mut best = SiteId(0);
        let mut best_d = f64::INFINITY;
        for s in &self.sites {
            let d = p.distance(s.position);
            if d < best_d {
                best_d = d;
                best = s.id;
            }
        }
        best
    }

    /// Whether `p` lies inside the flat-top hexagon of radius `R` around `center`.
    pub fn in_hexagon(&self, center: Point, p: Point) -> bool {
        let dx = (p.x - center.x).abs();
        let dy = (p.y - center.y).abs();
        let r = self.cell_radius;
        dy <= 0.5 * SQRT_3 * r && SQRT_3 * dx + dy <= SQRT_3 * r
    }
}
