//! Bounded-variable primal simplex.
//!
//! Two phases with artificial variables (no big-M), Dantzig pricing with a
//! Bland fallback once degenerate pivots pile up, dense basis inverse with
//! explicit eta updates. Dense solves are fine at the instance sizes the
//! generators produce (a few hundred rows).

use serde::{Deserialize, Serialize};

use crate::clock::Clock;
use crate::model::{MilpInstance, Sense};

/// Feasibility tolerance on constraint and bound satisfaction.
pub const FEAS_TOL: f64 = 1e-7;
/// Reduced-cost optimality tolerance.
pub const OPT_TOL: f64 = 1e-9;
/// Smallest acceptable pivot magnitude.
pub const PIVOT_TOL: f64 = 1e-10;

pub const DEFAULT_ITERATION_LIMIT: usize = 50_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct LpResult {
    pub status: LpStatus,
    /// Structural variable values; meaningful when `status == Optimal`.
    pub x: Vec<f64>,
    /// `c * x` when optimal, `+inf` when infeasible, `-inf` when unbounded.
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PivotRule {
    Dantzig,
    Bland,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpOptions {
    pub iteration_limit: usize,
    pub pivot_rule: PivotRule,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            iteration_limit: DEFAULT_ITERATION_LIMIT,
            pivot_rule: PivotRule::Dantzig,
        }
    }
}

/// Solves the LP relaxation of `inst` (integrality ignored).
pub fn solve_lp(inst: &MilpInstance, iteration_limit: usize) -> LpResult {
    solve_lp_opts(
        inst,
        &LpOptions {
            iteration_limit,
            pivot_rule: PivotRule::Dantzig,
        },
        None,
    )
}

/// Full-option entry point. Work is charged to `clock` at one unit per pivot.
pub fn solve_lp_opts(inst: &MilpInstance, opts: &LpOptions, clock: Option<&dyn Clock>) -> LpResult {
    let mut s = Simplex::new(inst, opts);
    if let Some(c) = clock {
        c.charge(5.0); // setup overhead; pivots are charged as they happen
    }
    s.run(clock)
}

struct Simplex<'a> {
    n_struct: usize,
    m: usize,
    ncols: usize, // struct + slacks + artificials
    n_real: usize, // struct + slacks
    cols: Vec<Vec<(usize, f64)>>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    cost: Vec<f64>,   // current phase costs
    obj_cost: Vec<f64>, // phase-2 costs
    b: Vec<f64>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    binv: Vec<f64>, // m*m row-major
    x: Vec<f64>,
    iterations: usize,
    degenerate_streak: usize,
    bland: bool,
    opts: &'a LpOptions,
}

impl<'a> Simplex<'a> {
    fn new(inst: &MilpInstance, opts: &'a LpOptions) -> Self {
        let n_struct = inst.num_vars();
        let m = inst.num_constraints();
        let n_real = n_struct + m;

        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_real];
        let mut lb = Vec::with_capacity(n_real);
        let mut ub = Vec::with_capacity(n_real);
        for j in 0..n_struct {
            lb.push(inst.lower[j]);
            ub.push(inst.upper[j]);
        }
        let mut b = Vec::with_capacity(m);
        for (r, con) in inst.constraints.iter().enumerate() {
            for &(j, a) in &con.coeffs {
                cols[j].push((r, a));
            }
            cols[n_struct + r].push((r, 1.0));
            let (slo, shi) = match con.sense {
                Sense::Le => (0.0, f64::INFINITY),
                Sense::Ge => (f64::NEG_INFINITY, 0.0),
                Sense::Eq => (0.0, 0.0),
            };
            lb.push(slo);
            ub.push(shi);
            b.push(con.rhs);
        }

        let mut obj_cost = vec![0.0; n_real];
        obj_cost[..n_struct].copy_from_slice(&inst.objective);

        // Nonbasic start: nearest finite bound, free variables at zero.
        let mut x = vec![0.0; n_real];
        for j in 0..n_real {
            x[j] = if lb[j].is_finite() {
                lb[j]
            } else if ub[j].is_finite() {
                ub[j]
            } else {
                0.0
            };
        }

        Simplex {
            n_struct,
            m,
            ncols: n_real,
            n_real,
            cols,
            lb,
            ub,
            cost: vec![0.0; n_real],
            obj_cost,
            b,
            basis: Vec::new(),
            in_basis: vec![false; n_real],
            binv: vec![0.0; m * m],
            x,
            iterations: 0,
            degenerate_streak: 0,
            bland: matches!(opts.pivot_rule, PivotRule::Bland),
            opts,
        }
    }

    /// Residual `b - A x_N` over the structural part of each row, with the
    /// candidate slack value it implies.
    fn row_residuals(&self) -> Vec<f64> {
        let mut resid = self.b.clone();
        for j in 0..self.n_struct {
            if self.x[j] != 0.0 {
                for &(r, a) in &self.cols[j] {
                    resid[r] -= a * self.x[j];
                }
            }
        }
        resid
    }

    fn run(&mut self, clock: Option<&dyn Clock>) -> LpResult {
        // Build the starting basis: slack basic where its implied value fits
        // its bounds, otherwise clamp the slack and anchor the row with an
        // artificial of value |residual|.
        let resid = self.row_residuals();
        let mut need_phase1 = false;
        for r in 0..self.m {
            let slack = self.n_struct + r;
            let s_val = resid[r];
            if s_val >= self.lb[slack] - FEAS_TOL && s_val <= self.ub[slack] + FEAS_TOL {
                self.basis.push(slack);
                self.in_basis[slack] = true;
                self.x[slack] = s_val;
                self.binv[r * self.m + r] = 1.0;
            } else {
                let clamped = s_val.clamp(self.lb[slack], self.ub[slack]);
                self.x[slack] = clamped;
                let residual = s_val - clamped;
                let g = if residual >= 0.0 { 1.0 } else { -1.0 };
                let art = self.ncols;
                self.cols.push(vec![(r, g)]);
                self.lb.push(0.0);
                self.ub.push(f64::INFINITY);
                self.x.push(residual.abs());
                self.cost.push(0.0);
                self.in_basis.push(true);
                self.basis.push(art);
                self.binv[r * self.m + r] = g;
                self.ncols += 1;
                need_phase1 = true;
            }
        }

        if need_phase1 {
            for j in self.n_real..self.ncols {
                self.cost[j] = 1.0;
            }
            match self.iterate(clock) {
                Iterate::Optimal => {}
                Iterate::Unbounded => unreachable!("phase-1 objective is bounded below"),
                Iterate::Limit => return self.limit_result(),
            }
            let p1: f64 = (self.n_real..self.ncols).map(|j| self.x[j]).sum();
            if p1 > FEAS_TOL {
                return LpResult {
                    status: LpStatus::Infeasible,
                    x: Vec::new(),
                    objective: f64::INFINITY,
                    iterations: self.iterations,
                };
            }
            // Freeze artificials at zero for phase 2; fixed columns never
            // re-enter, and a basic artificial stuck at zero is harmless.
            for j in self.n_real..self.ncols {
                self.lb[j] = 0.0;
                self.ub[j] = 0.0;
                self.x[j] = 0.0;
            }
        }

        for j in 0..self.n_real {
            self.cost[j] = self.obj_cost[j];
        }
        for j in self.n_real..self.ncols {
            self.cost[j] = 0.0;
        }
        match self.iterate(clock) {
            Iterate::Optimal => {
                self.refresh_basics();
                let x = self.x[..self.n_struct].to_vec();
                let objective: f64 = self.obj_cost[..self.n_struct]
                    .iter()
                    .zip(&x)
                    .map(|(c, v)| c * v)
                    .sum();
                LpResult {
                    status: LpStatus::Optimal,
                    x,
                    objective,
                    iterations: self.iterations,
                }
            }
            Iterate::Unbounded => LpResult {
                status: LpStatus::Unbounded,
                x: Vec::new(),
                objective: f64::NEG_INFINITY,
                iterations: self.iterations,
            },
            Iterate::Limit => self.limit_result(),
        }
    }

    fn limit_result(&self) -> LpResult {
        LpResult {
            status: LpStatus::IterationLimit,
            x: Vec::new(),
            objective: f64::INFINITY,
            iterations: self.iterations,
        }
    }

    /// `y = c_B B^-1`.
    fn duals(&self) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (i, &bj) in self.basis.iter().enumerate() {
            let cb = self.cost[bj];
            if cb != 0.0 {
                let row = &self.binv[i * m..(i + 1) * m];
                for k in 0..m {
                    y[k] += cb * row[k];
                }
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, y: &[f64]) -> f64 {
        let mut d = self.cost[j];
        for &(r, a) in &self.cols[j] {
            d -= y[r] * a;
        }
        d
    }

    /// `w = B^-1 A_j`.
    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut w = vec![0.0; m];
        for &(r, a) in &self.cols[j] {
            if a != 0.0 {
                for i in 0..m {
                    w[i] += self.binv[i * m + r] * a;
                }
            }
        }
        w
    }

    /// Recomputes basic values from nonbasic ones to shed pivot drift.
    fn refresh_basics(&mut self) {
        let m = self.m;
        let mut r = self.b.clone();
        for j in 0..self.ncols {
            if !self.in_basis[j] && self.x[j] != 0.0 {
                for &(row, a) in &self.cols[j] {
                    r[row] -= a * self.x[j];
                }
            }
        }
        for i in 0..m {
            let mut v = 0.0;
            for k in 0..m {
                v += self.binv[i * m + k] * r[k];
            }
            self.x[self.basis[i]] = v;
        }
    }

    fn pick_entering(&self, y: &[f64]) -> Option<(usize, f64, f64)> {
        // Returns (column, reduced cost, direction).
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.ncols {
            if self.in_basis[j] || self.lb[j] == self.ub[j] {
                continue;
            }
            let d = self.reduced_cost(j, y);
            let at_lower = self.x[j] <= self.lb[j] + FEAS_TOL;
            let at_upper = self.x[j] >= self.ub[j] - FEAS_TOL;
            let free = !self.lb[j].is_finite() && !self.ub[j].is_finite();
            let dir = if free {
                if d < -OPT_TOL {
                    1.0
                } else if d > OPT_TOL {
                    -1.0
                } else {
                    continue;
                }
            } else if at_lower && d < -OPT_TOL {
                1.0
            } else if at_upper && d > OPT_TOL {
                -1.0
            } else {
                continue;
            };
            if self.bland {
                return Some((j, d, dir));
            }
            match best {
                Some((_, bd, _)) if d.abs() <= bd.abs() => {}
                _ => best = Some((j, d, dir)),
            }
        }
        best
    }

    fn iterate(&mut self, clock: Option<&dyn Clock>) -> Iterate {
        let deg_limit = 3 * (self.n_struct + self.m);
        loop {
            if self.iterations >= self.opts.iteration_limit {
                return Iterate::Limit;
            }
            if self.iterations % 64 == 63 {
                self.refresh_basics();
            }
            let y = self.duals();
            let Some((enter, _d, dir)) = self.pick_entering(&y) else {
                return Iterate::Optimal;
            };

            let w = self.ftran(enter);
            // Ratio test: smallest step before a basic variable, or the
            // entering variable itself, hits a bound.
            let own_range = self.ub[enter] - self.lb[enter];
            let mut t_best = own_range; // may be +inf
            let mut leave: Option<usize> = None; // row index
            for i in 0..self.m {
                let delta = dir * w[i];
                if delta.abs() <= PIVOT_TOL {
                    continue;
                }
                let bj = self.basis[i];
                let xb = self.x[bj];
                let t = if delta > 0.0 {
                    if self.lb[bj].is_finite() {
                        (xb - self.lb[bj]) / delta
                    } else {
                        continue;
                    }
                } else if self.ub[bj].is_finite() {
                    (xb - self.ub[bj]) / delta
                } else {
                    continue;
                };
                let t = t.max(0.0);
                let better = match leave {
                    None => t < t_best - 1e-12,
                    Some(cur) => {
                        t < t_best - 1e-12
                            || (t < t_best + 1e-12 && {
                                if self.bland {
                                    bj < self.basis[cur]
                                } else {
                                    w[i].abs() > w[cur].abs()
                                }
                            })
                    }
                };
                if better {
                    t_best = t;
                    leave = Some(i);
                }
            }

            if leave.is_none() && !t_best.is_finite() {
                return Iterate::Unbounded;
            }

            self.iterations += 1;
            if let Some(c) = clock {
                c.charge(1.0);
            }
            if t_best <= 1e-12 {
                self.degenerate_streak += 1;
                if self.degenerate_streak > deg_limit {
                    // Stays engaged for the rest of the solve; Bland cannot cycle.
                    self.bland = true;
                }
            } else {
                self.degenerate_streak = 0;
            }

            // Apply the step to basic values and the entering variable.
            let t = t_best;
            for i in 0..self.m {
                let bj = self.basis[i];
                self.x[bj] -= t * dir * w[i];
            }
            self.x[enter] += t * dir;

            match leave {
                None => {
                    // Bound flip: entering variable moved to its other bound.
                    self.x[enter] = if dir > 0.0 { self.ub[enter] } else { self.lb[enter] };
                }
                Some(r) => {
                    let out = self.basis[r];
                    // Snap the leaving variable onto the bound it reached.
                    let delta = dir * w[r];
                    self.x[out] = if delta > 0.0 { self.lb[out] } else { self.ub[out] };
                    self.in_basis[out] = false;
                    self.in_basis[enter] = true;
                    self.basis[r] = enter;
                    // Eta update of the dense inverse.
                    let m = self.m;
                    let p = w[r];
                    for k in 0..m {
                        self.binv[r * m + k] /= p;
                    }
                    for i in 0..m {
                        if i != r && w[i] != 0.0 {
                            let f = w[i];
                            for k in 0..m {
                                self.binv[i * m + k] -= f * self.binv[r * m + k];
                            }
                        }
                    }
                }
            }
        }
    }
}

enum Iterate {
    Optimal,
    Unbounded,
    Limit,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Constraint;

    fn inst(
        c: Vec<f64>,
        rows: Vec<(Vec<(usize, f64)>, Sense, f64)>,
        lo: Vec<f64>,
        hi: Vec<f64>,
    ) -> MilpInstance {
        let n = c.len();
        let m = rows.len();
        MilpInstance::new(
            "lp",
            c,
            rows.into_iter()
                .map(|(cs, s, b)| Constraint::new(cs, s, b))
                .collect(),
            lo,
            hi,
            vec![false; n],
            (0..n).map(|j| format!("x{j}")).collect(),
            (0..m).map(|r| format!("c{r}")).collect(),
        )
        .unwrap()
    }

    #[test]
    fn one_variable_clamp() {
        let p = inst(
            vec![1.0],
            vec![(vec![(0, 1.0)], Sense::Ge, 3.0)],
            vec![0.0],
            vec![10.0],
        );
        let r = solve_lp(&p, 1000);
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.x[0] - 3.0).abs() < 1e-9);
        assert!((r.objective - 3.0).abs() < 1e-9);
    }

    #[test]
    fn triangle_vertex() {
        let p = inst(
            vec![-1.0, -1.0],
            vec![(vec![(0, 1.0), (1, 1.0)], Sense::Le, 1.0)],
            vec![0.0, 0.0],
            vec![1.0, 1.0],
        );
        let r = solve_lp(&p, 1000);
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.objective + 1.0).abs() < 1e-9);
        assert!((r.x[0] + r.x[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible() {
        let p = inst(
            vec![1.0],
            vec![
                (vec![(0, 1.0)], Sense::Ge, 5.0),
                (vec![(0, 1.0)], Sense::Le, 2.0),
            ],
            vec![0.0],
            vec![10.0],
        );
        assert_eq!(solve_lp(&p, 1000).status, LpStatus::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        let p = inst(
            vec![-1.0],
            vec![(vec![(0, 1.0)], Sense::Ge, 0.0)],
            vec![0.0],
            vec![f64::INFINITY],
        );
        assert_eq!(solve_lp(&p, 1000).status, LpStatus::Unbounded);
    }

    #[test]
    fn equality_rows_and_negative_bounds() {
        // min x + y s.t. x + y = 2, x - y = 0 -> x = y = 1.
        let p = inst(
            vec![1.0, 1.0],
            vec![
                (vec![(0, 1.0), (1, 1.0)], Sense::Eq, 2.0),
                (vec![(0, 1.0), (1, -1.0)], Sense::Eq, 0.0),
            ],
            vec![-5.0, -5.0],
            vec![5.0, 5.0],
        );
        let r = solve_lp(&p, 1000);
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.x[0] - 1.0).abs() < 1e-7);
        assert!((r.x[1] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn free_variable_lp() {
        // min x with x free, x >= -7 via a row.
        let p = inst(
            vec![1.0],
            vec![(vec![(0, 1.0)], Sense::Ge, -7.0)],
            vec![f64::NEG_INFINITY],
            vec![f64::INFINITY],
        );
        let r = solve_lp(&p, 1000);
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.objective + 7.0).abs() < 1e-7);
    }

    #[test]
    fn resolve_is_bitwise_identical() {
        let p = crate::mps::tests::random_instance(7, 10, 8).lp_relaxation();
        let a = solve_lp(&p, 5000);
        let b = solve_lp(&p, 5000);
        assert_eq!(a.status, b.status);
        if a.status == LpStatus::Optimal {
            assert_eq!(a.x, b.x);
            assert_eq!(a.objective, b.objective);
        }
    }

    #[test]
    fn iteration_limit_reported_as_such() {
        let p = inst(
            vec![-1.0, -1.0],
            vec![
                (vec![(0, 1.0), (1, 2.0)], Sense::Le, 4.0),
                (vec![(0, 2.0), (1, 1.0)], Sense::Le, 4.0),
            ],
            vec![0.0, 0.0],
            vec![10.0, 10.0],
        );
        let r = solve_lp_opts(
            &p,
            &LpOptions {
                iteration_limit: 0,
                pivot_rule: PivotRule::Dantzig,
            },
            None,
        );
        assert_eq!(r.status, LpStatus::IterationLimit);
    }

    // Vertex-enumeration oracle: solve every n x n active-set system formed
    // from rows and finite bounds, keep feasible points, take the best.
    // Independent of the simplex path.
    pub(crate) fn vertex_enumeration_opt(p: &MilpInstance) -> Option<f64> {
        let n = p.num_vars();
        #[derive(Clone)]
        enum Active {
            Row(usize),
            LowerBound(usize),
            UpperBound(usize),
        }
        let mut facets: Vec<Active> = Vec::new();
        for r in 0..p.num_constraints() {
            facets.push(Active::Row(r));
        }
        for j in 0..n {
            if p.lower[j].is_finite() {
                facets.push(Active::LowerBound(j));
            }
            if p.upper[j].is_finite() {
                facets.push(Active::UpperBound(j));
            }
        }
        let mut best: Option<f64> = None;
        let mut combo = vec![0usize; n];
        fn combos(
            facets: &[Active],
            k: usize,
            start: usize,
            combo: &mut Vec<usize>,
            p: &MilpInstance,
            best: &mut Option<f64>,
        ) {
            if k == 0 {
                // Assemble and solve the active system.
                let n = p.num_vars();
                let mut a = vec![0.0; n * n];
                let mut rhs = vec![0.0; n];
                for (i, &f) in combo.iter().enumerate() {
                    match &facets[f] {
                        Active::Row(r) => {
                            for &(j, v) in &p.constraints[*r].coeffs {
                                a[i * n + j] = v;
                            }
                            rhs[i] = p.constraints[*r].rhs;
                        }
                        Active::LowerBound(j) => {
                            a[i * n + j] = 1.0;
                            rhs[i] = p.lower[*j];
                        }
                        Active::UpperBound(j) => {
                            a[i * n + j] = 1.0;
                            rhs[i] = p.upper[*j];
                        }
                    }
                }
                if let Some(x) = solve_dense(&mut a, &mut rhs, n) {
                    let sol = crate::model::Solution::new(p, x.clone());
                    if crate::model::check_feasibility(p, &sol, 1e-7).unwrap().feasible {
                        let obj = p.objective_value(&x);
                        *best = Some(best.map_or(obj, |b: f64| b.min(obj)));
                    }
                }
                return;
            }
            for f in start..facets.len() {
                combo.push(f);
                combos(facets, k - 1, f + 1, combo, p, best);
                combo.pop();
            }
        }
        fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize) -> Option<Vec<f64>> {
            // Gaussian elimination with partial pivoting.
            for col in 0..n {
                let mut piv = col;
                for r in col + 1..n {
                    if a[r * n + col].abs() > a[piv * n + col].abs() {
                        piv = r;
                    }
                }
                if a[piv * n + col].abs() < 1e-10 {
                    return None;
                }
                if piv != col {
                    for k in 0..n {
                        a.swap(col * n + k, piv * n + k);
                    }
                    b.swap(col, piv);
                }
                for r in col + 1..n {
                    let f = a[r * n + col] / a[col * n + col];
                    if f != 0.0 {
                        for k in col..n {
                            a[r * n + k] -= f * a[col * n + k];
                        }
                        b[r] -= f * b[col];
                    }
                }
            }
            let mut x = vec![0.0; n];
            for r in (0..n).rev() {
                let mut v = b[r];
                for k in r + 1..n {
                    v -= a[r * n + k] * x[k];
                }
                x[r] = v / a[r * n + r];
            }
            Some(x)
        }
        combo.clear();
        combos(&facets, n, 0, &mut combo, p, &mut best);
        best
    }

    #[test]
    fn matches_vertex_enumeration_on_tiny_lps() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut checked = 0;
        for seed in 0..60u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xbeef);
            let n = rng.gen_range(1..=4usize);
            let m = rng.gen_range(1..=4usize);
            let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let rows: Vec<(Vec<(usize, f64)>, Sense, f64)> = (0..m)
                .map(|_| {
                    let coeffs: Vec<(usize, f64)> =
                        (0..n).map(|j| (j, rng.gen_range(-3.0..3.0))).collect();
                    let sense = if rng.gen_bool(0.5) { Sense::Le } else { Sense::Ge };
                    (coeffs, sense, rng.gen_range(-4.0..6.0))
                })
                .collect();
            let lo = vec![0.0; n];
            let hi: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..6.0)).collect();
            let p = inst(c, rows, lo, hi);
            let r = solve_lp(&p, 10_000);
            let oracle = vertex_enumeration_opt(&p);
            match (r.status, oracle) {
                (LpStatus::Optimal, Some(v)) => {
                    assert!(
                        (r.objective - v).abs() <= 1e-6 * (1.0 + v.abs()),
                        "seed {seed}: simplex {} vs oracle {v}",
                        r.objective
                    );
                    checked += 1;
                }
                (LpStatus::Infeasible, None) => checked += 1,
                (st, or) => panic!("seed {seed}: status {st:?} vs oracle {or:?}"),
            }
        }
        assert!(checked >= 40, "too few decided cases: {checked}");
    }
}
