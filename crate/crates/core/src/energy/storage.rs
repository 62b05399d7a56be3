use crate::error::{Error, Result};

/// Battery bank with per-hour retention factor `μ` and a hard capacity cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StorageState {
    pub level_wh: f64,
    pub capacity_wh: f64,
    pub factor: f64,
}

impl Default for StorageState {
    fn default() -> Self {
        StorageState {
            level_wh: 0.0,
            capacity_wh: 2000.0,
            factor: 0.96,
        }
    }
}

impl StorageState {
    pub fn empty(capacity_wh: f64, factor: f64) -> Self {
        StorageState {
            level_wh: 0.0,
            capacity_wh,
            factor,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.capacity_wh >= 0.0 && self.capacity_wh.is_finite()) {
            return Err(Error::invalid("storage_capacity_wh", "must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.factor) {
            return Err(Error::invalid("storage_factor", "must lie in [0, 1]"));
        }
        if !(0.0..=self.capacity_wh).contains(&self.level_wh) {
            return Err(Error::invalid("initial_storage_wh", "must lie in [0, capacity]"));
        }
        Ok(())
    }

    /// Energy usable this hour: retained charge plus fresh generation. May
    /// exceed capacity; the excess is wasted at the end of the hour.
    #[inline]
    pub fn available(&self, generation_wh: f64) -> f64 {
        self.factor * self.level_wh + generation_wh
    }

    /// Energy lost to self-discharge over one hour.
    #[inline]
    pub fn leakage(&self) -> f64 {
        (1.0 - self.factor) * self.level_wh
    }
}

/// One-hour storage update `s' = min(μ·s + r − d, cap)`.
///
/// Returns the new state and the generation wasted above capacity.
pub fn step_storage(state: StorageState, generation_wh: f64, drawn_wh: f64) -> Result<(StorageState, f64)> {
    if !(generation_wh >= 0.0) {
        return Err(Error::invalid("generation", "must be non-negative"));
    }
    if !(drawn_wh >= 0.0) {
        return Err(Error::invalid("drawn", "must be non-negative"));
    }
    let available = state.available(generation_wh);
    let tol = 1e-9 * available.max(1.0);
    if drawn_wh > available + tol {
        return Err(Error::Overdraw {
            requested: drawn_wh,
            available,
        });
    }
    let raw = (available - drawn_wh).max(0.0);
    let wastage = (raw - state.capacity_wh).max(0.0);
    let next = StorageState {
        level_wh: raw.min(state.capacity_wh),
        ..state
    };
    Ok((next, wastage))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn at(level: f64, factor: f64) -> StorageState {
        StorageState {
            level_wh: level,
            capacity_wh: 2000.0,
            factor,
        }
    }

    #[test]
    fn recurrence_examples() {
        let (s, w) = step_storage(at(1000.0, 0.96), 500.0, 300.0).unwrap();
        assert_abs_diff_eq!(s.level_wh, 1160.0, epsilon = 1e-9);
        assert_eq!(w, 0.0);

        let (s, w) = step_storage(at(1900.0, 0.96), 500.0, 100.0).unwrap();
        assert_eq!(s.level_wh, 2000.0);
        assert_abs_diff_eq!(w, 224.0, epsilon = 1e-9);

        let (s, w) = step_storage(at(1234.5, 1.0), 0.0, 0.0).unwrap();
        assert_eq!(s.level_wh, 1234.5);
        assert_eq!(w, 0.0);
    }

    #[test]
    fn overdraw_is_rejected() {
        let err = step_storage(at(100.0, 1.0), 50.0, 200.0).unwrap_err();
        assert!(matches!(err, Error::Overdraw { .. }));
        assert!(step_storage(at(100.0, 1.0), -1.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn level_stays_in_bounds(
            level in 0.0f64..2000.0,
            factor in 0.0f64..=1.0,
            r in 0.0f64..3000.0,
            frac in 0.0f64..=1.0,
        ) {
            let s = at(level, factor);
            let d = frac * s.available(r);
            let (next, waste) = step_storage(s, r, d).unwrap();
            prop_assert!(next.level_wh >= 0.0 && next.level_wh <= next.capacity_wh);
            prop_assert!(waste >= 0.0);
            let balance = r - d - (next.level_wh - level) - s.leakage() - waste;
            prop_assert!(balance.abs() < 1e-9 * (1.0 + r + level));
        }
    }
}
