//! Versioned run-log documents.
//!
//! One JSON document per solver or pipeline run: a header identifying the
//! instance, configuration hash, and clock mode; the timestamped event
//! stream; and a footer with the final bounds. Metric values in CSV reports
//! re-derive from these logs bit for bit.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::metrics::{BnbEvent, BoundsTimeline};

pub const RUNLOG_SCHEMA: &str = "v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLogHeader {
    pub schema: String,
    pub instance: String,
    pub family: Option<String>,
    pub seed: u64,
    pub config_hash: String,
    /// "sim" or "wall".
    pub clock: String,
    /// Horizon `T` in seconds.
    pub t_limit: f64,
    #[serde(with = "crate::jsonio::maybe_inf")]
    pub initial_primal: f64,
    #[serde(with = "crate::jsonio::maybe_inf")]
    pub initial_dual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLogFooter {
    pub status: String,
    #[serde(with = "crate::jsonio::maybe_inf")]
    pub final_primal: f64,
    #[serde(with = "crate::jsonio::maybe_inf")]
    pub final_dual: f64,
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub header: RunLogHeader,
    pub events: Vec<BnbEvent>,
    pub footer: RunLogFooter,
}

impl RunLog {
    #[allow(clippy::too_many_arguments)]
    pub fn from_timeline(
        instance: &str,
        family: Option<&str>,
        seed: u64,
        config_hash: String,
        clock: &str,
        timeline: &BoundsTimeline,
        status: &str,
        nodes: usize,
    ) -> RunLog {
        RunLog {
            header: RunLogHeader {
                schema: RUNLOG_SCHEMA.to_string(),
                instance: instance.to_string(),
                family: family.map(str::to_string),
                seed,
                config_hash,
                clock: clock.to_string(),
                t_limit: timeline.horizon,
                initial_primal: timeline.initial_primal,
                initial_dual: timeline.initial_dual,
            },
            events: timeline.events.clone(),
            footer: RunLogFooter {
                status: status.to_string(),
                final_primal: timeline.final_primal(),
                final_dual: timeline.final_dual(),
                nodes,
            },
        }
    }

    /// Reconstructs the timeline the integrals are computed from.
    pub fn timeline(&self) -> BoundsTimeline {
        BoundsTimeline {
            horizon: self.header.t_limit,
            initial_primal: self.header.initial_primal,
            initial_dual: self.header.initial_dual,
            events: self.events.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        crate::jsonio::to_string(self).expect("run log serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<RunLog> {
        serde_json::from_str(text)
    }
}

/// Stable short hash of any serializable configuration.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let canon = crate::jsonio::to_string(config).expect("config serializes");
    let digest = Sha256::digest(canon.as_bytes());
    hex_prefix(&digest, 12)
}

fn hex_prefix(bytes: &[u8], len: usize) -> String {
    let mut s = String::with_capacity(len);
    for b in bytes {
        use std::fmt::Write as _;
        let _ = write!(s, "{b:02x}");
        if s.len() >= len {
            break;
        }
    }
    s.truncate(len);
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::EventKind;

    #[test]
    fn round_trips_and_rederives_the_timeline() {
        let mut tl = BoundsTimeline::new(10.0, 42.0, -3.0);
        tl.push(1.0, EventKind::DualUpdate(-1.0));
        tl.push(2.5, EventKind::PrimalUpdate(17.0));
        let log = RunLog::from_timeline(
            "inst0",
            Some("workload"),
            7,
            config_hash(&"cfg"),
            "sim",
            &tl,
            "Optimal",
            5,
        );
        let text = log.to_json();
        let back = RunLog::from_json(&text).unwrap();
        assert_eq!(back, log);
        assert_eq!(back.timeline(), tl);
        assert_eq!(back.header.schema, "v1");
    }

    #[test]
    fn config_hash_is_stable_and_sensitive() {
        let a = config_hash(&("x", 1));
        let b = config_hash(&("x", 1));
        let c = config_hash(&("x", 2));
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 12);
    }
}
