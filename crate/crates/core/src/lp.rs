//! Exact two-phase simplex over arbitrary-precision rationals.
//!
//! Problems are `maximize c·x subject to A x = b, x >= 0`, stored by column
//! so that columns can be appended to a solved instance (column generation).
//! Every outcome carries a certificate that [`check_certificate`] verifies
//! with exact arithmetic: a primal/dual pair with equal objective, a ray for
//! unbounded problems, or a Farkas vector for infeasible ones.
//!
//! Pivoting uses the largest reduced cost and falls back to Bland's rule
//! after a run of degenerate pivots, which rules out cycling.

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::rational::{dot, fmt_q, Q};

const DEGENERATE_RUN_BEFORE_BLAND: usize = 50;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LpError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LpProblem {
    rows: usize,
    objective: Vec<Q>,
    columns: Vec<Vec<(usize, Q)>>,
    rhs: Vec<Q>,
}

impl LpProblem {
    /// A problem with `rows` equality constraints, zero right-hand side and
    /// no variables yet.
    pub fn new(rows: usize) -> Self {
        LpProblem {
            rows,
            objective: Vec::new(),
            columns: Vec::new(),
            rhs: vec![Q::zero(); rows],
        }
    }

    pub fn from_dense(objective: Vec<Q>, matrix: Vec<Vec<Q>>, rhs: Vec<Q>) -> Self {
        let mut p = LpProblem::new(rhs.len());
        p.rhs = rhs;
        for (j, c) in objective.into_iter().enumerate() {
            let col = matrix
                .iter()
                .enumerate()
                .filter(|(_, row)| !row[j].is_zero())
                .map(|(i, row)| (i, row[j].clone()))
                .collect();
            p.add_variable(c, col);
        }
        p
    }

    /// Adds a variable and returns its index. Entries on the same row are summed.
    pub fn add_variable(&mut self, cost: Q, mut entries: Vec<(usize, Q)>) -> usize {
        entries.sort_by_key(|(i, _)| *i);
        let mut col: Vec<(usize, Q)> = Vec::with_capacity(entries.len());
        for (i, v) in entries {
            assert!(i < self.rows, "row {i} out of range");
            match col.last_mut() {
                Some((j, w)) if *j == i => *w += v,
                _ => col.push((i, v)),
            }
        }
        col.retain(|(_, v)| !v.is_zero());
        self.objective.push(cost);
        self.columns.push(col);
        self.columns.len() - 1
    }

    pub fn set_rhs(&mut self, row: usize, value: Q) {
        self.rhs[row] = value;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn vars(&self) -> usize {
        self.columns.len()
    }

    pub fn objective(&self) -> &[Q] {
        &self.objective
    }

    pub fn rhs(&self) -> &[Q] {
        &self.rhs
    }

    pub fn column(&self, j: usize) -> &[(usize, Q)] {
        &self.columns[j]
    }

    /// `A x`
    pub fn apply(&self, x: &[Q]) -> Vec<Q> {
        let mut out = vec![Q::zero(); self.rows];
        for (col, xj) in self.columns.iter().zip(x) {
            if xj.is_zero() {
                continue;
            }
            for (i, a) in col {
                out[*i] += a * xj;
            }
        }
        out
    }

    /// `y · A_j`
    pub fn column_dot(&self, j: usize, y: &[Q]) -> Q {
        self.columns[j]
            .iter()
            .fold(Q::zero(), |acc, (i, a)| acc + a * &y[*i])
    }

    /// Human-readable JSON (rationals as strings) for debugging.
    pub fn to_json(&self) -> serde_json::Value {
        let s = |x: &Q| serde_json::Value::String(fmt_q(x));
        serde_json::json!({
            "rows": self.rows,
            "objective": self.objective.iter().map(s).collect::<Vec<_>>(),
            "rhs": self.rhs.iter().map(s).collect::<Vec<_>>(),
            "columns": self.columns.iter().map(|c| {
                c.iter().map(|(i, v)| serde_json::json!([i, fmt_q(v)])).collect::<Vec<_>>()
            }).collect::<Vec<_>>(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpOutcome {
    pub status: LpStatus,
    /// Optimal vertex, or the last feasible vertex when unbounded.
    pub primal: Vec<Q>,
    /// Optimal dual, or the Farkas vector when infeasible.
    pub dual: Vec<Q>,
    pub objective: Q,
    /// Improving ray when unbounded: `A r = 0`, `r >= 0`, `c·r > 0`.
    pub ray: Option<Vec<Q>>,
    pub pivots: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Var {
    // artificials sort first so ties in the ratio test expel them
    Artificial(usize),
    Structural(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Phase {
    Fresh,
    Feasible,
    Done(LpStatus),
}

/// Incremental simplex state. Columns may be added after a solve; the
/// current basis stays primal feasible, so re-solving resumes phase two.
#[derive(Clone, Debug)]
pub struct Simplex {
    problem: LpProblem,
    flip: Vec<bool>,
    /// `B⁻¹ A` over the structural columns
    body: Vec<Vec<Q>>,
    /// `B⁻¹` (the artificial block)
    inverse: Vec<Vec<Q>>,
    values: Vec<Q>,
    basis: Vec<Var>,
    phase: Phase,
    pivots: usize,
    farkas: Option<Vec<Q>>,
    ray: Option<Vec<Q>>,
}

impl Simplex {
    pub fn new(problem: LpProblem) -> Self {
        let m = problem.rows;
        let n = problem.vars();
        let flip: Vec<bool> = problem.rhs.iter().map(|b| b.is_negative()).collect();
        let mut body = vec![vec![Q::zero(); n]; m];
        for (j, col) in problem.columns.iter().enumerate() {
            for (i, a) in col {
                body[*i][j] = if flip[*i] { -a.clone() } else { a.clone() };
            }
        }
        let inverse = (0..m)
            .map(|i| {
                let mut row = vec![Q::zero(); m];
                row[i] = Q::one();
                row
            })
            .collect();
        let values = problem.rhs.iter().map(|b| b.abs()).collect();
        Simplex {
            problem,
            flip,
            body,
            inverse,
            values,
            basis: (0..m).map(Var::Artificial).collect(),
            phase: Phase::Fresh,
            pivots: 0,
            farkas: None,
            ray: None,
        }
    }

    pub fn problem(&self) -> &LpProblem {
        &self.problem
    }

    pub fn pivots(&self) -> usize {
        self.pivots
    }

    /// Appends a column. If the instance was solved to optimality it is
    /// re-opened for further pivoting.
    pub fn add_column(&mut self, cost: Q, entries: Vec<(usize, Q)>) -> usize {
        let j = self.problem.add_variable(cost, entries);
        let mut dense = vec![Q::zero(); self.problem.rows];
        for (i, a) in &self.problem.columns[j] {
            dense[*i] = if self.flip[*i] { -a.clone() } else { a.clone() };
        }
        for r in 0..self.problem.rows {
            let v = dot(&self.inverse[r], &dense);
            self.body[r].push(v);
        }
        if let Phase::Done(LpStatus::Optimal) = self.phase {
            self.phase = Phase::Feasible;
        }
        j
    }

    pub fn solve(&mut self) -> LpStatus {
        loop {
            match self.phase {
                Phase::Fresh => self.phase_one(),
                Phase::Feasible => self.phase_two(),
                Phase::Done(s) => return s,
            }
        }
    }

    fn n(&self) -> usize {
        self.problem.vars()
    }

    fn cost(&self, v: Var, phase_one: bool) -> Q {
        match (v, phase_one) {
            (Var::Artificial(_), true) => -Q::one(),
            (Var::Artificial(_), false) => Q::zero(),
            (Var::Structural(_), true) => Q::zero(),
            (Var::Structural(j), false) => self.problem.objective[j].clone(),
        }
    }

    /// Simplex multipliers `c_B B⁻¹`, in the flipped row orientation.
    fn multipliers(&self, phase_one: bool) -> Vec<Q> {
        let m = self.problem.rows;
        let mut y = vec![Q::zero(); m];
        for (r, &v) in self.basis.iter().enumerate() {
            let c = self.cost(v, phase_one);
            if c.is_zero() {
                continue;
            }
            for (i, yi) in y.iter_mut().enumerate() {
                let b = &self.inverse[r][i];
                if !b.is_zero() {
                    *yi += &c * b;
                }
            }
        }
        y
    }

    fn reduced_costs(&self, phase_one: bool) -> Vec<Q> {
        let cb: Vec<Q> = self.basis.iter().map(|&v| self.cost(v, phase_one)).collect();
        (0..self.n())
            .map(|j| {
                let mut d = self.cost(Var::Structural(j), phase_one);
                for (r, c) in cb.iter().enumerate() {
                    if !c.is_zero() && !self.body[r][j].is_zero() {
                        d -= c * &self.body[r][j];
                    }
                }
                d
            })
            .collect()
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.body[row][col].clone();
        debug_assert!(!p.is_zero());
        let inv = Q::one() / &p;
        let body_nz: Vec<usize> = (0..self.n())
            .filter(|&j| !self.body[row][j].is_zero())
            .collect();
        let inv_nz: Vec<usize> = (0..self.problem.rows)
            .filter(|&j| !self.inverse[row][j].is_zero())
            .collect();
        for &j in &body_nz {
            self.body[row][j] *= &inv;
        }
        for &j in &inv_nz {
            self.inverse[row][j] *= &inv;
        }
        self.values[row] *= &inv;
        for r in 0..self.problem.rows {
            if r == row || self.body[r][col].is_zero() {
                continue;
            }
            let f = self.body[r][col].clone();
            for &j in &body_nz {
                let delta = &f * &self.body[row][j];
                self.body[r][j] -= delta;
            }
            for &j in &inv_nz {
                let delta = &f * &self.inverse[row][j];
                self.inverse[r][j] -= delta;
            }
            let delta = &f * &self.values[row];
            self.values[r] -= delta;
        }
        self.basis[row] = Var::Structural(col);
        self.pivots += 1;
    }

    /// Minimum-ratio row for entering column `col`; ties go to the basic
    /// variable that sorts first.
    fn ratio_test(&self, col: usize) -> Option<usize> {
        let mut best: Option<(usize, Q)> = None;
        for r in 0..self.problem.rows {
            let a = &self.body[r][col];
            if !a.is_positive() {
                continue;
            }
            let ratio = &self.values[r] / a;
            best = match best {
                None => Some((r, ratio)),
                Some((br, bq)) => {
                    if ratio < bq || (ratio == bq && self.basis[r] < self.basis[br]) {
                        Some((r, ratio))
                    } else {
                        Some((br, bq))
                    }
                }
            };
        }
        best.map(|(r, _)| r)
    }

    /// Runs simplex iterations; returns `false` if unbounded (column index in `Err`).
    fn iterate(&mut self, phase_one: bool) -> Result<(), usize> {
        let mut degenerate_run = 0usize;
        loop {
            let d = self.reduced_costs(phase_one);
            let bland = degenerate_run >= DEGENERATE_RUN_BEFORE_BLAND;
            let basic: Vec<bool> = {
                let mut b = vec![false; self.n()];
                for v in &self.basis {
                    if let Var::Structural(j) = v {
                        b[*j] = true;
                    }
                }
                b
            };
            let mut entering: Option<usize> = None;
            for j in 0..self.n() {
                if basic[j] || !d[j].is_positive() {
                    continue;
                }
                match entering {
                    None => entering = Some(j),
                    Some(e) if !bland && d[j] > d[e] => entering = Some(j),
                    _ => {}
                }
                if bland {
                    break;
                }
            }
            let Some(col) = entering else {
                return Ok(());
            };
            let Some(row) = self.ratio_test(col) else {
                return Err(col);
            };
            if self.values[row].is_zero() {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(row, col);
        }
    }

    fn phase_one(&mut self) {
        self.iterate(true)
            .expect("phase one objective is bounded above by zero");
        let infeasibility: Q = self
            .basis
            .iter()
            .zip(&self.values)
            .filter(|(v, _)| matches!(v, Var::Artificial(_)))
            .fold(Q::zero(), |acc, (_, x)| acc + x);
        if infeasibility.is_positive() {
            let y = self.unflip(self.multipliers(true));
            self.farkas = Some(y);
            self.phase = Phase::Done(LpStatus::Infeasible);
            return;
        }
        // expel artificials still basic at level zero
        for r in 0..self.problem.rows {
            if !matches!(self.basis[r], Var::Artificial(_)) {
                continue;
            }
            if let Some(j) = (0..self.n()).find(|&j| !self.body[r][j].is_zero()) {
                self.pivot(r, j);
            }
        }
        self.phase = Phase::Feasible;
    }

    fn phase_two(&mut self) {
        match self.iterate(false) {
            Ok(()) => self.phase = Phase::Done(LpStatus::Optimal),
            Err(col) => {
                let mut ray = vec![Q::zero(); self.n()];
                ray[col] = Q::one();
                for (r, v) in self.basis.iter().enumerate() {
                    if let Var::Structural(j) = v {
                        ray[*j] = -self.body[r][col].clone();
                    }
                }
                self.ray = Some(ray);
                self.phase = Phase::Done(LpStatus::Unbounded);
            }
        }
    }

    fn unflip(&self, mut y: Vec<Q>) -> Vec<Q> {
        for (yi, &f) in y.iter_mut().zip(&self.flip) {
            if f {
                *yi = -yi.clone();
            }
        }
        y
    }

    pub fn primal(&self) -> Vec<Q> {
        let mut x = vec![Q::zero(); self.n()];
        for (r, v) in self.basis.iter().enumerate() {
            if let Var::Structural(j) = v {
                x[*j] = self.values[r].clone();
            }
        }
        x
    }

    /// Optimal dual in the original row orientation.
    pub fn dual(&self) -> Vec<Q> {
        self.unflip(self.multipliers(false))
    }

    /// Reduced costs `c_j - y·A_j` of all structural columns.
    pub fn reduced(&self) -> Vec<Q> {
        let y = self.dual();
        (0..self.n())
            .map(|j| &self.problem.objective[j] - self.problem.column_dot(j, &y))
            .collect()
    }

    pub fn outcome(&self) -> LpOutcome {
        let status = match self.phase {
            Phase::Done(s) => s,
            _ => panic!("outcome requested before solve"),
        };
        let primal = if status == LpStatus::Infeasible {
            vec![Q::zero(); self.n()]
        } else {
            self.primal()
        };
        let objective = dot(&self.problem.objective, &primal);
        let dual = match status {
            LpStatus::Infeasible => self.farkas.clone().unwrap_or_default(),
            _ => self.dual(),
        };
        LpOutcome {
            status,
            primal,
            dual,
            objective,
            ray: self.ray.clone(),
            pivots: self.pivots,
        }
    }
}

pub fn solve(problem: &LpProblem) -> LpOutcome {
    let mut s = Simplex::new(problem.clone());
    s.solve();
    s.outcome()
}

/// Exact membership in `{x : A x = b, x >= 0}`.
pub fn feasible(point: &[Q], problem: &LpProblem) -> Result<bool, LpError> {
    if point.len() != problem.vars() {
        return Err(LpError::DimensionMismatch {
            expected: problem.vars(),
            got: point.len(),
        });
    }
    if point.iter().any(|x| x.is_negative()) {
        return Ok(false);
    }
    Ok(problem.apply(point) == problem.rhs)
}

/// Verifies the certificate attached to `outcome` exactly.
///
/// Optimal: `A x = b`, `x >= 0`, `Aᵀ y >= c`, `b·y = c·x = objective`.
/// Unbounded: the ray is a non-negative kernel vector with `c·r > 0` and the
/// primal is feasible. Infeasible: `Aᵀ y >= 0` and `b·y < 0`.
pub fn check_certificate(problem: &LpProblem, outcome: &LpOutcome) -> bool {
    let m = problem.rows();
    let n = problem.vars();
    match outcome.status {
        LpStatus::Optimal => {
            if outcome.primal.len() != n || outcome.dual.len() != m {
                return false;
            }
            if !matches!(feasible(&outcome.primal, problem), Ok(true)) {
                return false;
            }
            let dual_ok =
                (0..n).all(|j| problem.column_dot(j, &outcome.dual) >= problem.objective[j]);
            let cx = dot(&problem.objective, &outcome.primal);
            let by = dot(&problem.rhs, &outcome.dual);
            dual_ok && cx == by && cx == outcome.objective
        }
        LpStatus::Unbounded => {
            let Some(ray) = &outcome.ray else {
                return false;
            };
            ray.len() == n
                && ray.iter().all(|x| !x.is_negative())
                && problem.apply(ray).iter().all(|x| x.is_zero())
                && dot(&problem.objective, ray).is_positive()
                && matches!(feasible(&outcome.primal, problem), Ok(true))
        }
        LpStatus::Infeasible => {
            let y = &outcome.dual;
            y.len() == m
                && (0..n).all(|j| !problem.column_dot(j, y).is_negative())
                && dot(&problem.rhs, y).is_negative()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn dense(c: &[i64], a: &[&[i64]], b: &[Q]) -> LpProblem {
        LpProblem::from_dense(
            c.iter().map(|&x| qi(x)).collect(),
            a.iter().map(|r| r.iter().map(|&x| qi(x)).collect()).collect(),
            b.to_vec(),
        )
    }

    #[test]
    fn single_variable() {
        let p = dense(&[1], &[&[1]], &[qi(1)]);
        let o = solve(&p);
        assert_eq!(o.status, LpStatus::Optimal);
        assert_eq!(o.objective, qi(1));
        assert!(check_certificate(&p, &o));
    }

    #[test]
    fn one_third() {
        let p = dense(&[1, 1], &[&[1, 1]], &[q(1, 3)]);
        let o = solve(&p);
        assert_eq!(o.objective, q(1, 3));
        assert_eq!(o.dual, vec![qi(1)]);
        assert!(check_certificate(&p, &o));
    }

    #[test]
    fn unbounded_without_constraints() {
        let mut p = LpProblem::new(0);
        p.add_variable(qi(1), vec![]);
        let o = solve(&p);
        assert_eq!(o.status, LpStatus::Unbounded);
        assert!(check_certificate(&p, &o));
    }

    #[test]
    fn infeasible_has_farkas() {
        // x1 + x2 = -1 with x >= 0
        let p = dense(&[0, 0], &[&[1, 1]], &[qi(-1)]);
        let o = solve(&p);
        assert_eq!(o.status, LpStatus::Infeasible);
        assert!(check_certificate(&p, &o));
        // x1 = 1, x1 = 2
        let p = dense(&[1], &[&[1], &[1]], &[qi(1), qi(2)]);
        let o = solve(&p);
        assert_eq!(o.status, LpStatus::Infeasible);
        assert!(check_certificate(&p, &o));
    }

    #[test]
    fn tampered_certificates_rejected() {
        let p = dense(&[3, 2, 0], &[&[1, 1, 1], &[1, -1, 0]], &[qi(4), qi(1)]);
        let o = solve(&p);
        assert_eq!(o.status, LpStatus::Optimal);
        assert!(check_certificate(&p, &o));
        let mut bad = o.clone();
        bad.dual[0] += qi(1);
        assert!(!check_certificate(&p, &bad));
        let mut bad = o.clone();
        bad.objective += q(1, 1_000_000);
        assert!(!check_certificate(&p, &bad));
    }

    #[test]
    fn feasibility_checks() {
        let p = dense(&[1, 1], &[&[1, 2]], &[qi(2)]);
        let o = solve(&p);
        assert_eq!(feasible(&o.primal, &p), Ok(true));
        assert_eq!(feasible(&[qi(-1), q(3, 2)], &p), Ok(false));
        let p0 = dense(&[1], &[&[1]], &[qi(5)]);
        assert_eq!(feasible(&[qi(0)], &p0), Ok(false));
        assert!(feasible(&[qi(0), qi(0), qi(0)], &p).is_err());
    }

    #[test]
    fn redundant_rows() {
        // duplicated constraint rows
        let p = dense(
            &[1, 2, 0],
            &[&[1, 1, 1], &[1, 1, 1], &[2, 2, 2]],
            &[qi(3), qi(3), qi(6)],
        );
        let o = solve(&p);
        assert_eq!(o.status, LpStatus::Optimal);
        assert_eq!(o.objective, qi(6));
        assert!(check_certificate(&p, &o));
    }

    #[test]
    fn column_generation_resume() {
        let mut s = Simplex::new(dense(&[1], &[&[1]], &[qi(2)]));
        assert_eq!(s.solve(), LpStatus::Optimal);
        s.add_column(qi(3), vec![(0, qi(1))]);
        assert_eq!(s.solve(), LpStatus::Optimal);
        let o = s.outcome();
        assert_eq!(o.objective, qi(6));
        assert!(check_certificate(s.problem(), &o));
    }

    #[test]
    fn deterministic() {
        let p = dense(
            &[1, 1, 1, 1],
            &[&[1, 1, 0, 0], &[0, 1, 1, 0], &[0, 0, 1, 1]],
            &[qi(1), qi(1), qi(1)],
        );
        assert_eq!(solve(&p), solve(&p));
    }
}
