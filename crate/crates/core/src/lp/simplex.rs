//! Dense two-phase tableau simplex with Bland's rule.
//!
//! Sized for the problems in this crate (a handful of variables and
//! constraints); no attempt is made at sparsity or numerical refinement.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-12;
const FEAS_EPS: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub bound: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<f64>, relation: Relation, bound: f64) -> Self {
        Self {
            coeffs,
            relation,
            bound,
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    pub fn is_satisfied(&self, x: &[f64], tol: f64) -> bool {
        let v = self.value(x);
        match self.relation {
            Relation::Le => v <= self.bound + tol,
            Relation::Eq => (v - self.bound).abs() <= tol,
            Relation::Ge => v >= self.bound - tol,
        }
    }
}

/// `minimize objective·x` subject to `constraints` and `lo ≤ x ≤ hi`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    /// Per-variable `(lo, hi)`; `lo` must be finite, `hi` may be infinite.
    pub bounds: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub value: f64,
    pub x: Vec<f64>,
    /// Phase-two reduced costs of the structural variables at termination,
    /// in the shifted space `x - lo`.
    pub reduced_costs: Vec<f64>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            objective,
            constraints: Vec::new(),
            bounds: vec![(0.0, f64::INFINITY); n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn with_objective(&self, objective: Vec<f64>) -> Result<Self> {
        if objective.len() != self.num_vars() {
            return Err(Error::Dimension(format!(
                "objective of length {} for {} variables",
                objective.len(),
                self.num_vars()
            )));
        }
        Ok(Self {
            objective,
            ..self.clone()
        })
    }

    pub fn push(&mut self, c: Constraint) {
        self.constraints.push(c);
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.bounds.len() != n {
            return Err(Error::Dimension(format!(
                "{} bounds for {n} variables",
                self.bounds.len()
            )));
        }
        if let Some(c) = self.constraints.iter().find(|c| c.coeffs.len() != n) {
            return Err(Error::Dimension(format!(
                "constraint with {} coefficients for {n} variables",
                c.coeffs.len()
            )));
        }
        for &(lo, hi) in &self.bounds {
            if !lo.is_finite() || hi.is_nan() || hi < lo {
                return Err(Error::InvalidParameters(format!("bad bounds [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    /// Every constraint and bound holds within `tol`.
    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.num_vars()
            && self
                .bounds
                .iter()
                .zip(x)
                .all(|(&(lo, hi), &v)| v >= lo - tol && v <= hi + tol)
            && self.constraints.iter().all(|c| c.is_satisfied(x, tol))
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    /// Columns that may enter the basis.
    allowed: Vec<bool>,
}

impl Tableau {
    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        (0..cost.len())
            .map(|j| {
                cost[j]
                    - self
                        .rows
                        .iter()
                        .zip(&self.basis)
                        .map(|(row, &b)| cost[b] * row[j])
                        .sum::<f64>()
            })
            .collect()
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        self.rhs[r] /= p;
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r];
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][c];
            if f == 0.0 {
                continue;
            }
            for (v, pv) in self.rows[i].iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.rhs[i] -= f * pivot_rhs;
        }
        self.basis[r] = c;
    }

    /// Bland's rule: lowest-index improving column, lowest-index leaving
    /// variable among ratio ties.
    fn optimize(&mut self, cost: &[f64]) -> Result<()> {
        let limit = 50_000;
        for _ in 0..limit {
            let rc = self.reduced_costs(cost);
            let Some(enter) = (0..cost.len()).find(|&j| self.allowed[j] && rc[j] < -1e-11) else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][enter];
                if a > PIVOT_EPS {
                    let ratio = self.rhs[i] / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-14
                                || (ratio <= lr + 1e-14 && self.basis[i] < self.basis[li])
                            {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Err(Error::Unbounded);
            };
            self.pivot(r, enter);
        }
        Err(Error::InvalidParameters("simplex iteration limit reached".into()))
    }
}

pub fn simplex_solve(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let n = lp.num_vars();

    // Shift to y = x - lo ≥ 0 and turn finite upper bounds into rows.
    let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::new();
    for c in &lp.constraints {
        let shift: f64 = c.coeffs.iter().zip(&lp.bounds).map(|(a, b)| a * b.0).sum();
        rows.push((c.coeffs.clone(), c.relation, c.bound - shift));
    }
    for (j, &(lo, hi)) in lp.bounds.iter().enumerate() {
        if hi.is_finite() {
            let mut coeffs = vec![0.0; n];
            coeffs[j] = 1.0;
            rows.push((coeffs, Relation::Le, hi - lo));
        }
    }
    for row in rows.iter_mut() {
        if row.2 < 0.0 {
            for v in row.0.iter_mut() {
                *v = -*v;
            }
            row.2 = -row.2;
            row.1 = match row.1 {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let total = n + n_slack + n_art;
    let art_start = n + n_slack;

    let mut tab = Tableau {
        rows: vec![vec![0.0; total]; m],
        rhs: vec![0.0; m],
        basis: vec![0; m],
        allowed: vec![true; total],
    };
    let (mut s, mut a) = (n, art_start);
    for (i, (coeffs, rel, b)) in rows.iter().enumerate() {
        tab.rows[i][..n].copy_from_slice(coeffs);
        tab.rhs[i] = *b;
        match rel {
            Relation::Le => {
                tab.rows[i][s] = 1.0;
                tab.basis[i] = s;
                s += 1;
            }
            Relation::Ge => {
                tab.rows[i][s] = -1.0;
                s += 1;
                tab.rows[i][a] = 1.0;
                tab.basis[i] = a;
                a += 1;
            }
            Relation::Eq => {
                tab.rows[i][a] = 1.0;
                tab.basis[i] = a;
                a += 1;
            }
        }
    }

    if n_art > 0 {
        let mut phase1 = vec![0.0; total];
        for c in phase1.iter_mut().skip(art_start) {
            *c = 1.0;
        }
        tab.optimize(&phase1)?;
        let infeas: f64 = tab
            .basis
            .iter()
            .zip(&tab.rhs)
            .filter(|(&b, _)| b >= art_start)
            .map(|(_, &v)| v)
            .sum();
        let scale = 1.0 + rows.iter().map(|r| r.2.abs()).fold(0.0, f64::max);
        if infeas > FEAS_EPS * scale {
            return Err(Error::Infeasible);
        }
        // Drive remaining zero-level artificials out; drop redundant rows.
        let mut i = 0;
        while i < tab.rows.len() {
            if tab.basis[i] >= art_start {
                match (0..art_start).find(|&j| tab.rows[i][j].abs() > 1e-9) {
                    Some(j) => {
                        tab.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        tab.rows.remove(i);
                        tab.rhs.remove(i);
                        tab.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
        for allowed in tab.allowed.iter_mut().skip(art_start) {
            *allowed = false;
        }
    }

    let mut cost = vec![0.0; total];
    cost[..n].copy_from_slice(&lp.objective);
    tab.optimize(&cost)?;

    let mut y = vec![0.0; total];
    for (&b, &v) in tab.basis.iter().zip(&tab.rhs) {
        y[b] = v;
    }
    let x: Vec<f64> = (0..n).map(|j| y[j].max(0.0) + lp.bounds[j].0).collect();
    let rc = tab.reduced_costs(&cost);
    Ok(LpSolution {
        value: lp.objective_value(&x),
        x,
        reduced_costs: rc[..n].to_vec(),
    })
}

/// Optimal point that is lexicographically smallest among all optima,
/// found by fixing the objective and then minimizing `x_0, x_1, …` in turn.
pub fn lexicographic_argmin(lp: &LinearProgram) -> Result<LpSolution> {
    let first = simplex_solve(lp)?;
    let mut fixed = lp.clone();
    fixed.push(Constraint::new(lp.objective.clone(), Relation::Eq, first.value));
    let n = lp.num_vars();
    let mut x = first.x.clone();
    for j in 0..n {
        let mut unit = vec![0.0; n];
        unit[j] = 1.0;
        let sol = simplex_solve(&fixed.with_objective(unit.clone())?)?;
        x = sol.x;
        fixed.push(Constraint::new(unit, Relation::Eq, x[j]));
    }
    Ok(LpSolution {
        value: lp.objective_value(&x),
        x,
        reduced_costs: first.reduced_costs,
    })
}
