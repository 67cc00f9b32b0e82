//! Wall and simulated clocks.
//!
//! All time-integral metrics are asserted in tests, so solver components
//! never read the OS clock directly. They charge work units to a [`Clock`];
//! the simulated clock converts units to deterministic seconds, the wall
//! clock ignores charges and reports real elapsed time.

use std::cell::Cell;
use std::time::Instant;

pub trait Clock {
    /// Seconds since this clock started.
    fn now(&self) -> f64;
    /// Records `units` of work. Only the simulated clock advances on this.
    fn charge(&self, units: f64);
}

/// Deterministic clock: `now = units_charged * seconds_per_unit`.
///
/// One unit corresponds to one LP pivot; the default scale of `1e-4`
/// seconds per unit makes a simulated second worth 10,000 pivots.
pub struct SimClock {
    units: Cell<f64>,
    seconds_per_unit: f64,
}

pub const DEFAULT_SECONDS_PER_UNIT: f64 = 1e-4;

impl SimClock {
    pub fn new() -> Self {
        SimClock {
            units: Cell::new(0.0),
            seconds_per_unit: DEFAULT_SECONDS_PER_UNIT,
        }
    }

    pub fn with_scale(seconds_per_unit: f64) -> Self {
        SimClock {
            units: Cell::new(0.0),
            seconds_per_unit,
        }
    }
}

impl Default for SimClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for SimClock {
    fn now(&self) -> f64 {
        self.units.get() * self.seconds_per_unit
    }

    fn charge(&self, units: f64) {
        self.units.set(self.units.get() + units);
    }
}

pub struct WallClock {
    start: Instant,
}

impl WallClock {
    pub fn new() -> Self {
        WallClock {
            start: Instant::now(),
        }
    }
}

impl Default for WallClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for WallClock {
    fn now(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    fn charge(&self, _units: f64) {}
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sim_clock_advances_only_on_charge() {
        let clock = SimClock::new();
        assert_eq!(clock.now(), 0.0);
        clock.charge(100.0);
        clock.charge(150.0);
        assert_eq!(clock.now(), 250.0 * DEFAULT_SECONDS_PER_UNIT);
    }
}
