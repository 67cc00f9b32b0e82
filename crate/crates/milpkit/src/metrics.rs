//! Time-integral metrics over bound timelines.
//!
//! A [`BoundsTimeline`] holds the primal and dual bound tracks of one solver
//! run as right-continuous step functions: an update at time `t` takes effect
//! at `t`. The three integrals are computed by exact piecewise-constant
//! integration, so the additivity identity
//! `gap = primal(v) + dual(v)` holds for every constant `v`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One timestamped solver event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BnbEvent {
    pub t: f64,
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value")]
pub enum EventKind {
    PrimalUpdate(f64),
    DualUpdate(f64),
    NodeProcessed,
}

/// Timestamped primal/dual bound tracks over a horizon `[0, T]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsTimeline {
    /// Horizon `T` in seconds.
    pub horizon: f64,
    /// Primal bound at `t = 0` (trivial solution value); `+inf` when absent.
    pub initial_primal: f64,
    /// Dual bound at `t = 0`; `-inf` when absent.
    pub initial_dual: f64,
    pub events: Vec<BnbEvent>,
}

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("events out of order at index {index} (t = {t})")]
    UnorderedEvents { index: usize, t: f64 },
    #[error("event time {t} outside the horizon [0, {horizon}]")]
    EventOutsideHorizon { t: f64, horizon: f64 },
    #[error("primal track increases at t = {t} ({from} -> {to})")]
    PrimalIncreases { t: f64, from: f64, to: f64 },
    #[error("dual track decreases at t = {t} ({from} -> {to})")]
    DualDecreases { t: f64, from: f64, to: f64 },
    #[error("{track} bound undefined from t = 0")]
    MissingInitialBound { track: &'static str },
}

impl BoundsTimeline {
    pub fn new(horizon: f64, initial_primal: f64, initial_dual: f64) -> Self {
        BoundsTimeline {
            horizon,
            initial_primal,
            initial_dual,
            events: Vec::new(),
        }
    }

    pub fn push(&mut self, t: f64, kind: EventKind) {
        self.events.push(BnbEvent { t, kind });
    }

    /// Final primal bound after all events.
    pub fn final_primal(&self) -> f64 {
        self.events
            .iter()
            .filter_map(|e| match e.kind {
                EventKind::PrimalUpdate(v) => Some(v),
                _ => None,
            })
            .last()
            .unwrap_or(self.initial_primal)
    }

    /// Final dual bound after all events.
    pub fn final_dual(&self) -> f64 {
        self.events
            .iter()
            .filter_map(|e| match e.kind {
                EventKind::DualUpdate(v) => Some(v),
                _ => None,
            })
            .last()
            .unwrap_or(self.initial_dual)
    }

    fn validate(&self) -> Result<(), MetricError> {
        let mut last_t = 0.0;
        let mut pb = self.initial_primal;
        let mut db = self.initial_dual;
        for (index, e) in self.events.iter().enumerate() {
            if e.t < last_t {
                return Err(MetricError::UnorderedEvents { index, t: e.t });
            }
            if e.t < 0.0 || e.t > self.horizon {
                return Err(MetricError::EventOutsideHorizon {
                    t: e.t,
                    horizon: self.horizon,
                });
            }
            last_t = e.t;
            match e.kind {
                EventKind::PrimalUpdate(v) => {
                    if v > pb {
                        return Err(MetricError::PrimalIncreases { t: e.t, from: pb, to: v });
                    }
                    pb = v;
                }
                EventKind::DualUpdate(v) => {
                    if v < db {
                        return Err(MetricError::DualDecreases { t: e.t, from: db, to: v });
                    }
                    db = v;
                }
                EventKind::NodeProcessed => {}
            }
        }
        Ok(())
    }

    /// Exact integral of one step track over `[0, horizon]`.
    fn integrate<F>(&self, initial: f64, mut pick: F) -> f64
    where
        F: FnMut(&EventKind) -> Option<f64>,
    {
        let mut total = 0.0;
        let mut value = initial;
        let mut t_prev = 0.0;
        for e in &self.events {
            if let Some(v) = pick(&e.kind) {
                if e.t > t_prev {
                    total += value * (e.t - t_prev);
                    t_prev = e.t;
                }
                value = v;
            }
        }
        if self.horizon > t_prev {
            total += value * (self.horizon - t_prev);
        }
        total
    }

    fn primal_defined_from_zero(&self) -> bool {
        self.initial_primal.is_finite()
            || self
                .events
                .iter()
                .take_while(|e| e.t == 0.0)
                .any(|e| matches!(e.kind, EventKind::PrimalUpdate(v) if v.is_finite()))
    }

    fn dual_defined_from_zero(&self) -> bool {
        self.initial_dual.is_finite()
            || self
                .events
                .iter()
                .take_while(|e| e.t == 0.0)
                .any(|e| matches!(e.kind, EventKind::DualUpdate(v) if v.is_finite()))
    }
}

/// `∫ pb(t) dt − T·opt`. Nonnegative whenever `opt` under-estimates every
/// primal value. `opt` is the true optimum when known, else a substitute.
pub fn primal_integral(tl: &BoundsTimeline, opt: f64) -> Result<f64, MetricError> {
    tl.validate()?;
    let area = tl.integrate(tl.initial_primal, |k| match *k {
        EventKind::PrimalUpdate(v) => Some(v),
        _ => None,
    });
    Ok(area - tl.horizon * opt)
}

/// `T·opt − ∫ db(t) dt`. Nonnegative whenever `opt` over-estimates every
/// dual value.
pub fn dual_integral(tl: &BoundsTimeline, opt: f64) -> Result<f64, MetricError> {
    tl.validate()?;
    let area = tl.integrate(tl.initial_dual, |k| match *k {
        EventKind::DualUpdate(v) => Some(v),
        _ => None,
    });
    Ok(tl.horizon * opt - area)
}

/// `∫ (pb(t) − db(t)) dt`. Both tracks must be defined from `t = 0`.
pub fn gap_integral(tl: &BoundsTimeline) -> Result<f64, MetricError> {
    tl.validate()?;
    if !tl.primal_defined_from_zero() {
        return Err(MetricError::MissingInitialBound { track: "primal" });
    }
    if !tl.dual_defined_from_zero() {
        return Err(MetricError::MissingInitialBound { track: "dual" });
    }
    // primal_integral(tl, v) + dual_integral(tl, v): the v terms cancel.
    Ok(primal_integral(tl, 0.0)? + dual_integral(tl, 0.0)?)
}

/// `∫ db(t) dt`: the cumulated reward of the dual task. Larger is better;
/// equals the negated dual integral up to the instance constant `T·opt`.
pub fn cumulated_reward(tl: &BoundsTimeline) -> Result<f64, MetricError> {
    tl.validate()?;
    Ok(tl.integrate(tl.initial_dual, |k| match *k {
        EventKind::DualUpdate(v) => Some(v),
        _ => None,
    }))
}
