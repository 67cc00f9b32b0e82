//! Per-candidate branching features.
//!
//! A fixed-length vector of 12 floats per fractional candidate, each mapped
//! into [-1, 1] with per-instance scale factors computed once per solve and
//! recorded alongside the run. The scorer is linear in these features, so
//! model weight averaging stays exact.

use serde::{Deserialize, Serialize};

use crate::model::{MilpInstance, Solution};

pub const NUM_FEATURES: usize = 12;

/// Per-instance normalization constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceScales {
    /// Largest |c_j|, floored at 1.
    pub cost: f64,
    /// Largest |A_ij|, floored at 1.
    pub coeff: f64,
    /// Largest column nonzero count, floored at 1.
    pub col_nnz: f64,
    /// Objective magnitude used to squash pseudo-cost gains.
    pub gain: f64,
    /// Column nonzero counts, precomputed.
    pub nnz: Vec<usize>,
    /// Per-column mean |A_ij|.
    pub col_mean_abs: Vec<f64>,
    /// Per-column max |A_ij|.
    pub col_max_abs: Vec<f64>,
}

impl InstanceScales {
    pub fn compute(inst: &MilpInstance) -> Self {
        let n = inst.num_vars();
        let mut nnz = vec![0usize; n];
        let mut sum_abs = vec![0.0_f64; n];
        let mut max_abs = vec![0.0_f64; n];
        let mut coeff: f64 = 1.0;
        for con in &inst.constraints {
            for &(j, a) in &con.coeffs {
                nnz[j] += 1;
                sum_abs[j] += a.abs();
                max_abs[j] = max_abs[j].max(a.abs());
                coeff = coeff.max(a.abs());
            }
        }
        let col_mean_abs = sum_abs
            .iter()
            .zip(&nnz)
            .map(|(s, &k)| if k > 0 { s / k as f64 } else { 0.0 })
            .collect();
        let cost = inst
            .objective
            .iter()
            .fold(1.0_f64, |acc, c| acc.max(c.abs()));
        let col_nnz = nnz.iter().copied().max().unwrap_or(0).max(1) as f64;
        let gain = inst
            .objective
            .iter()
            .map(|c| c.abs())
            .sum::<f64>()
            .max(1.0);
        InstanceScales {
            cost,
            coeff,
            col_nnz,
            gain,
            nnz,
            col_mean_abs,
            col_max_abs: max_abs,
        }
    }
}

/// Everything the feature extractor can see at one branching node.
pub struct BranchContext<'a> {
    pub inst: &'a MilpInstance,
    pub scales: &'a InstanceScales,
    pub lp_x: &'a [f64],
    pub depth: usize,
    pub incumbent: Option<&'a Solution>,
    /// Estimated objective gain of the down/up child per candidate,
    /// from the pseudo-cost table: `(pc_down * f, pc_up * (1 - f))`.
    pub gain_estimates: &'a dyn Fn(usize, f64) -> (f64, f64),
}

fn squash(gain: f64, scale: f64) -> f64 {
    // [0, inf) -> [0, 1)
    gain / (scale + gain)
}

/// Extracts the `|candidates| x 12` feature matrix. Candidates must be
/// fractional in `lp_x`.
pub fn extract_features(ctx: &BranchContext, candidates: &[usize]) -> Vec<[f64; NUM_FEATURES]> {
    let mut out = Vec::with_capacity(candidates.len());
    for &j in candidates {
        let x = ctx.lp_x[j];
        let f = x - x.floor();
        let frac = 2.0 * f.min(1.0 - f); // 1.0 at x = .5, 0 at integral
        let lo = ctx.inst.lower[j];
        let hi = ctx.inst.upper[j];
        let range = if lo.is_finite() && hi.is_finite() {
            hi - lo
        } else {
            f64::INFINITY
        };
        let lp_value = if range.is_finite() && range > 0.0 {
            ((x - lo) / range).clamp(0.0, 1.0)
        } else {
            squash(x.abs(), 1.0)
        };
        let dist_lo = if lo.is_finite() {
            squash(x - lo, 1.0)
        } else {
            1.0
        };
        let dist_hi = if hi.is_finite() {
            squash(hi - x, 1.0)
        } else {
            1.0
        };
        let (gain_down, gain_up) = (ctx.gain_estimates)(j, f);
        let agree = match ctx.incumbent {
            Some(inc) => {
                if (x - inc.values[j]).abs() < 0.5 {
                    1.0
                } else {
                    0.0
                }
            }
            None => 0.5,
        };
        out.push([
            frac,
            (ctx.inst.objective[j] / ctx.scales.cost).clamp(-1.0, 1.0),
            lp_value,
            dist_lo,
            dist_hi,
            ctx.scales.nnz[j] as f64 / ctx.scales.col_nnz,
            (ctx.scales.col_mean_abs[j] / ctx.scales.coeff).clamp(0.0, 1.0),
            (ctx.scales.col_max_abs[j] / ctx.scales.coeff).clamp(0.0, 1.0),
            squash(gain_up, ctx.scales.gain),
            squash(gain_down, ctx.scales.gain),
            ctx.depth as f64 / (ctx.depth as f64 + 10.0),
            agree,
        ]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Constraint;
    use crate::Sense;

    fn ctx_fixture() -> (MilpInstance, InstanceScales) {
        let inst = MilpInstance::new(
            "f",
            vec![2.0, -4.0, 1.0],
            vec![
                Constraint::new(vec![(0, 1.0), (1, 3.0)], Sense::Le, 4.0),
                Constraint::new(vec![(1, 3.0), (2, -1.0)], Sense::Ge, 0.0),
            ],
            vec![0.0; 3],
            vec![1.0; 3],
            vec![true, true, true],
            vec!["a".into(), "b".into(), "c".into()],
            vec!["r0".into(), "r1".into()],
        )
        .unwrap();
        let scales = InstanceScales::compute(&inst);
        (inst, scales)
    }

    #[test]
    fn half_fractionality_is_maximal() {
        let (inst, scales) = ctx_fixture();
        let lp_x = vec![0.5, 0.3, 0.0];
        let gains = |_: usize, _: f64| (0.0, 0.0);
        let ctx = BranchContext {
            inst: &inst,
            scales: &scales,
            lp_x: &lp_x,
            depth: 0,
            incumbent: None,
            gain_estimates: &gains,
        };
        let m = extract_features(&ctx, &[0, 1]);
        assert_eq!(m[0][0], 1.0);
        assert!(m[1][0] < 1.0);
    }

    #[test]
    fn identical_candidates_get_identical_rows() {
        let (inst, scales) = ctx_fixture();
        // Variables 0 and 2 differ; craft a symmetric pair instead.
        let sym = MilpInstance::new(
            "sym",
            vec![1.0, 1.0],
            vec![Constraint::new(vec![(0, 2.0), (1, 2.0)], Sense::Le, 3.0)],
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![true, true],
            vec!["a".into(), "b".into()],
            vec!["r".into()],
        )
        .unwrap();
        let sym_scales = InstanceScales::compute(&sym);
        let lp_x = vec![0.75, 0.75];
        let gains = |_: usize, _: f64| (0.25, 0.5);
        let ctx = BranchContext {
            inst: &sym,
            scales: &sym_scales,
            lp_x: &lp_x,
            depth: 3,
            incumbent: None,
            gain_estimates: &gains,
        };
        let m = extract_features(&ctx, &[0, 1]);
        assert_eq!(m[0], m[1]);
        drop((inst, scales));
    }

    #[test]
    fn rows_are_bounded_and_deterministic() {
        let (inst, scales) = ctx_fixture();
        let lp_x = vec![0.5, 0.9, 0.2];
        let gains = |j: usize, f: f64| (j as f64 * f, 1.0 - f);
        let ctx = BranchContext {
            inst: &inst,
            scales: &scales,
            lp_x: &lp_x,
            depth: 7,
            incumbent: None,
            gain_estimates: &gains,
        };
        let a = extract_features(&ctx, &[0, 1, 2]);
        let b = extract_features(&ctx, &[0, 1, 2]);
        assert_eq!(a, b);
        for row in &a {
            for v in row {
                assert!((-1.0..=1.0).contains(v), "feature {v} out of range");
            }
        }
    }
}
