//! Seeded synthetic instance generators.
//!
//! Three families mirror the benchmark structures: multi-dimensional item
//! placement, robust workload apportionment, and a time-indexed family whose
//! period labels are recoverable from the constraint hypergraph. Each
//! generator returns the instance plus a [`StructuredView`] sidecar mapping
//! variable indices to model roles, which is what the structure-exploiting
//! heuristics consume.

pub mod item_placement;
pub mod time_indexed;
pub mod workload;

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::MilpInstance;

pub use item_placement::{gen_item_placement, ItemPlacementData, ItemPlacementParams};
pub use time_indexed::{
    gen_time_indexed, recover_periods, PeriodRecovery, TimeIndexedData, TimeIndexedParams,
};
pub use workload::{gen_workload, WorkloadData, WorkloadParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    ItemPlacement,
    Workload,
    TimeIndexed,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::ItemPlacement => "item_placement",
            Family::Workload => "workload",
            Family::TimeIndexed => "time_indexed",
        }
    }

    pub fn parse(s: &str) -> Option<Family> {
        match s {
            "item_placement" | "item-placement" => Some(Family::ItemPlacement),
            "workload" => Some(Family::Workload),
            "time_indexed" | "time-indexed" => Some(Family::TimeIndexed),
            _ => None,
        }
    }
}

/// Role of one variable in its family's model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "role")]
pub enum VarRole {
    /// Item placement binary `x_ij`.
    PlaceX { item: usize, container: usize },
    /// Item placement unevenness slack `y_jk`.
    EvenY { container: usize, dim: usize },
    /// Item placement per-dimension peak `z_k`.
    PeakZ { dim: usize },
    /// Workload machine-on binary `y_j`.
    MachineY { machine: usize },
    /// Workload flow `x_ij`.
    FlowX { task: usize, machine: usize },
    /// Time-indexed integer with its planted period (1-based).
    PeriodVar { period: u32, slot: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family_data")]
pub enum FamilyData {
    ItemPlacement(ItemPlacementData),
    Workload(WorkloadData),
    TimeIndexed(TimeIndexedData),
}

/// Generator-emitted structure sidecar: the role map, realized family data,
/// the trivial initial primal bound, and the planted optimum when the
/// instance was small enough to enumerate at generation time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuredView {
    pub family: Family,
    pub roles: Vec<VarRole>,
    pub data: FamilyData,
    pub trivial_bound: f64,
    pub planted_optimum: Option<f64>,
}

impl StructuredView {
    pub fn item_placement(&self) -> Option<&ItemPlacementData> {
        match &self.data {
            FamilyData::ItemPlacement(d) => Some(d),
            _ => None,
        }
    }

    pub fn workload(&self) -> Option<&WorkloadData> {
        match &self.data {
            FamilyData::Workload(d) => Some(d),
            _ => None,
        }
    }

    pub fn time_indexed(&self) -> Option<&TimeIndexedData> {
        match &self.data {
            FamilyData::TimeIndexed(d) => Some(d),
            _ => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum GeneratorError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("could not draw a capacity-feasible instance in {attempts} attempts")]
    CapacityInfeasible { attempts: usize },
    #[error("could not draw an LP-feasible instance in {attempts} attempts")]
    LpInfeasible { attempts: usize },
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("sidecar: {0}")]
    Json(#[from] serde_json::Error),
    #[error("mps: {0}")]
    Mps(#[from] crate::mps::MpsError),
}

/// Writes `<stem>.mps` and `<stem>.structure.json` into `dir`.
pub fn save_instance(
    dir: &Path,
    stem: &str,
    inst: &MilpInstance,
    view: &StructuredView,
) -> Result<(), GeneratorError> {
    std::fs::write(dir.join(format!("{stem}.mps")), crate::mps::write_mps(inst))?;
    std::fs::write(
        dir.join(format!("{stem}.structure.json")),
        crate::jsonio::to_string(view)?,
    )?;
    Ok(())
}

/// Loads an instance from `<path>.mps`, with its sidecar when present.
pub fn load_instance(
    mps_path: &Path,
) -> Result<(MilpInstance, Option<StructuredView>), GeneratorError> {
    let text = std::fs::read_to_string(mps_path)?;
    let inst = crate::mps::parse_mps(&text)?;
    let sidecar = mps_path.with_extension("structure.json");
    let view = if sidecar.exists() {
        Some(serde_json::from_str(&std::fs::read_to_string(sidecar)?)?)
    } else {
        None
    };
    Ok((inst, view))
}

/// Brute-force optimum over all-integer assignments; `None` when the lattice
/// exceeds `max_points` or no feasible point exists. Continuous variables
/// are completed by an LP solve with the integers fixed.
pub(crate) fn enumerate_small_optimum(inst: &MilpInstance, max_points: usize) -> Option<f64> {
    let ints: Vec<usize> = inst.integer_vars().collect();
    let mut points = 1usize;
    for &j in &ints {
        let w = (inst.upper[j] - inst.lower[j]) as usize + 1;
        points = points.checked_mul(w)?;
        if points > max_points {
            return None;
        }
    }
    let pure_integer = ints.len() == inst.num_vars();
    let mut best: Option<f64> = None;
    let mut values = vec![0.0; inst.num_vars()];
    for j in 0..inst.num_vars() {
        values[j] = if inst.lower[j].is_finite() { inst.lower[j] } else { 0.0 };
    }
    let mut idx = vec![0i64; ints.len()];
    loop {
        for (k, &j) in ints.iter().enumerate() {
            values[j] = inst.lower[j] + idx[k] as f64;
        }
        if pure_integer {
            let sol = crate::model::Solution::new(inst, values.clone());
            if crate::model::check_feasibility(inst, &sol, 1e-9)
                .map(|r| r.feasible)
                .unwrap_or(false)
            {
                best = Some(best.map_or(sol.objective, |b: f64| b.min(sol.objective)));
            }
        } else {
            let fixings: std::collections::BTreeMap<usize, f64> =
                ints.iter().map(|&j| (j, values[j])).collect();
            if let Ok(fixed) = inst.fix_variables(&fixings) {
                let r = crate::lp::solve_lp(&fixed.lp_relaxation(), 20_000);
                if r.status == crate::lp::LpStatus::Optimal {
                    best = Some(best.map_or(r.objective, |b: f64| b.min(r.objective)));
                }
            }
        }
        // Advance the mixed-radix counter.
        let mut k = 0;
        loop {
            if k == ints.len() {
                return best;
            }
            idx[k] += 1;
            let w = (inst.upper[ints[k]] - inst.lower[ints[k]]) as i64;
            if idx[k] <= w {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}
