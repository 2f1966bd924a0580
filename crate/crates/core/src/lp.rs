//! Dense two-phase primal simplex over exact rationals.
//!
//! Bland's rule picks both the entering column (lowest index with negative
//! reduced cost) and the leaving row (lowest basic index among ratio ties),
//! so the method terminates on degenerate problems. Every optimal answer is
//! a basic feasible solution, i.e. an extreme point of the feasible region.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    fn flipped(self) -> Self {
        match self {
            Relation::Le => Relation::Ge,
            Relation::Ge => Relation::Le,
            Relation::Eq => Relation::Eq,
        }
    }

    fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Relation::Le => lhs <= rhs,
            Relation::Eq => lhs == rhs,
            Relation::Ge => lhs >= rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Constraint {
    pub fn new(coeffs: Vec<Rational>, relation: Relation, rhs: Rational) -> Self {
        Self { coeffs, relation, rhs }
    }
}

/// minimize c.x subject to the constraints, 0 <= x <= upper (when given).
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
    pub upper_bounds: Vec<Option<Rational>>,
}

impl LinearProgram {
    pub fn new(objective: Vec<Rational>) -> Self {
        let n = objective.len();
        Self { objective, constraints: Vec::new(), upper_bounds: vec![None; n] }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) {
        self.constraints.push(Constraint::new(coeffs, relation, rhs));
    }

    /// Adds `sum_{j in vars} x_j  rel  rhs`.
    pub fn add_sum(&mut self, vars: impl IntoIterator<Item = usize>, relation: Relation, rhs: Rational) {
        let mut coeffs = vec![Rational::zero(); self.num_vars()];
        for j in vars {
            coeffs[j] += Rational::one();
        }
        self.add(coeffs, relation, rhs);
    }

    pub fn set_upper(&mut self, var: usize, bound: Rational) {
        self.upper_bounds[var] = Some(bound);
    }

    /// True when `x` satisfies every row and bound exactly.
    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        if x.len() != self.num_vars() || x.iter().any(|v| v.is_negative()) {
            return false;
        }
        let bounds_ok = self.upper_bounds.iter().zip(x).all(|(u, v)| u.as_ref().is_none_or(|u| v <= u));
        bounds_ok
            && self.constraints.iter().all(|row| {
                let lhs = row.coeffs.iter().zip(x).fold(Rational::zero(), |acc, (a, v)| acc + a * v);
                row.relation.holds(&lhs, &row.rhs)
            })
    }

    pub fn objective_at(&self, x: &[Rational]) -> Rational {
        self.objective.iter().zip(x).fold(Rational::zero(), |acc, (c, v)| acc + c * v)
    }

    fn check_dims(&self) -> Result<()> {
        let n = self.num_vars();
        if self.upper_bounds.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} upper bounds for {} variables",
                self.upper_bounds.len(),
                n
            )));
        }
        for (i, row) in self.constraints.iter().enumerate() {
            if row.coeffs.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "constraint {i} has {} coefficients, expected {n}",
                    row.coeffs.len()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub values: Vec<Rational>,
    pub objective_value: Rational,
    pub is_extreme_point: bool,
}

impl LpSolution {
    fn without_point(status: LpStatus, n: usize) -> Self {
        Self { status, values: vec![Rational::zero(); n], objective_value: Rational::zero(), is_extreme_point: false }
    }

    pub fn is_binary(&self) -> bool {
        self.values.iter().all(rational::is_binary)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SolveOptions {
    /// Print every tableau to stderr.
    pub dump_tableaus: bool,
}

pub fn lp_solve(lp: &LinearProgram) -> Result<LpSolution> {
    lp_solve_with(lp, SolveOptions::default())
}

pub fn lp_solve_with(lp: &LinearProgram, opts: SolveOptions) -> Result<LpSolution> {
    lp.check_dims()?;
    let n = lp.num_vars();

    // Rows in standard orientation (rhs >= 0), zero rows removed.
    let mut rows: Vec<Constraint> = Vec::new();
    let bound_rows = lp.upper_bounds.iter().enumerate().filter_map(|(j, u)| {
        u.as_ref().map(|u| {
            let mut coeffs = vec![Rational::zero(); n];
            coeffs[j] = Rational::one();
            Constraint::new(coeffs, Relation::Le, u.clone())
        })
    });
    for row in lp.constraints.iter().cloned().chain(bound_rows) {
        if row.coeffs.iter().all(Zero::is_zero) {
            if row.relation.holds(&Rational::zero(), &row.rhs) {
                continue;
            }
            return Ok(LpSolution::without_point(LpStatus::Infeasible, n));
        }
        if row.rhs.is_negative() {
            rows.push(Constraint::new(row.coeffs.iter().map(|a| -a).collect(), row.relation.flipped(), -row.rhs));
        } else {
            rows.push(row);
        }
    }

    let m = rows.len();
    let num_slack = rows.iter().filter(|r| r.relation != Relation::Eq).count();
    let num_art = rows.iter().filter(|r| r.relation != Relation::Le).count();
    let first_art = n + num_slack;
    let width = first_art + num_art;

    let mut t = Tableau {
        rows: Vec::with_capacity(m),
        rhs: Vec::with_capacity(m),
        basis: Vec::with_capacity(m),
        width,
        first_art,
        dump: opts.dump_tableaus,
    };
    let (mut next_slack, mut next_art) = (n, first_art);
    for row in &rows {
        let mut r = vec![Rational::zero(); width];
        r[..n].clone_from_slice(&row.coeffs);
        match row.relation {
            Relation::Le => {
                r[next_slack] = Rational::one();
                t.basis.push(next_slack);
                next_slack += 1;
            }
            Relation::Ge => {
                r[next_slack] = -Rational::one();
                next_slack += 1;
                r[next_art] = Rational::one();
                t.basis.push(next_art);
                next_art += 1;
            }
            Relation::Eq => {
                r[next_art] = Rational::one();
                t.basis.push(next_art);
                next_art += 1;
            }
        }
        t.rows.push(r);
        t.rhs.push(row.rhs.clone());
    }

    if num_art > 0 {
        let mut cost = vec![Rational::zero(); width];
        for c in cost.iter_mut().skip(first_art) {
            *c = Rational::one();
        }
        let allowed: Vec<bool> = vec![true; width];
        let (outcome, value) = t.run(&cost, &allowed, "phase 1");
        debug_assert!(outcome == Outcome::Optimal);
        if value.is_positive() {
            return Ok(LpSolution::without_point(LpStatus::Infeasible, n));
        }
        t.drive_out_artificials();
    }

    let mut cost = vec![Rational::zero(); width];
    cost[..n].clone_from_slice(&lp.objective);
    let allowed: Vec<bool> = (0..width).map(|j| j < first_art).collect();
    let (outcome, _) = t.run(&cost, &allowed, "phase 2");
    if outcome == Outcome::Unbounded {
        return Ok(LpSolution::without_point(LpStatus::Unbounded, n));
    }

    let mut values = vec![Rational::zero(); n];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < n {
            values[b] = t.rhs[i].clone();
        }
    }
    if !lp.is_feasible(&values) {
        return Err(Error::Lp("basic solution violates a constraint".into()));
    }
    let objective_value = lp.objective_at(&values);
    Ok(LpSolution { status: LpStatus::Optimal, values, objective_value, is_extreme_point: true })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Optimal,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    width: usize,
    first_art: usize,
    dump: bool,
}

impl Tableau {
    /// Minimizes `cost` over the current basis; returns the final objective.
    fn run(&mut self, cost: &[Rational], allowed: &[bool], label: &str) -> (Outcome, Rational) {
        // Reduced costs and -z in the last slot.
        let mut obj: Vec<Rational> = cost.to_vec();
        obj.push(Rational::zero());
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost[b].clone();
            if cb.is_zero() {
                continue;
            }
            for (j, a) in self.rows[i].iter().enumerate() {
                if !a.is_zero() {
                    obj[j] -= &cb * a;
                }
            }
            obj[self.width] -= &cb * &self.rhs[i];
        }

        let mut iteration = 0usize;
        loop {
            if self.dump {
                eprintln!("-- {label}, iteration {iteration}\n{}", self.render(&obj));
            }
            let Some(enter) = (0..self.width).find(|&j| allowed[j] && obj[j].is_negative()) else {
                return (Outcome::Optimal, -obj[self.width].clone());
            };
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][enter];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &leave {
                    None => true,
                    Some((k, best)) => ratio < *best || (ratio == *best && self.basis[i] < self.basis[*k]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((row, _)) = leave else {
                return (Outcome::Unbounded, Rational::zero());
            };
            self.pivot(row, enter, Some(&mut obj));
            iteration += 1;
        }
    }

    fn pivot(&mut self, row: usize, col: usize, obj: Option<&mut Vec<Rational>>) {
        let p = self.rows[row][col].clone();
        if !p.is_one() {
            for a in self.rows[row].iter_mut() {
                if !a.is_zero() {
                    *a /= &p;
                }
            }
            self.rhs[row] /= &p;
        }
        let pivot_row = self.rows[row].clone();
        let pivot_rhs = self.rhs[row].clone();
        let nonzero: Vec<usize> = (0..self.width).filter(|&j| !pivot_row[j].is_zero()).collect();
        for i in 0..self.rows.len() {
            if i == row {
                continue;
            }
            let factor = self.rows[i][col].clone();
            if factor.is_zero() {
                continue;
            }
            for &j in &nonzero {
                let delta = &factor * &pivot_row[j];
                self.rows[i][j] -= delta;
            }
            self.rhs[i] -= &factor * &pivot_rhs;
        }
        if let Some(obj) = obj {
            let factor = obj[col].clone();
            if !factor.is_zero() {
                for &j in &nonzero {
                    let delta = &factor * &pivot_row[j];
                    obj[j] -= delta;
                }
                obj[self.width] -= &factor * &pivot_rhs;
            }
        }
        self.basis[row] = col;
    }

    /// After a zero-valued phase 1, pivots artificial columns out of the
    /// basis; rows where that is impossible are redundant and dropped.
    fn drive_out_artificials(&mut self) {
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] < self.first_art {
                i += 1;
                continue;
            }
            match (0..self.first_art).find(|&j| !self.rows[i][j].is_zero()) {
                Some(j) => {
                    self.pivot(i, j, None);
                    i += 1;
                }
                None => {
                    self.rows.remove(i);
                    self.rhs.remove(i);
                    self.basis.remove(i);
                }
            }
        }
    }

    fn render(&self, obj: &[Rational]) -> String {
        let mut s = String::new();
        for (i, row) in self.rows.iter().enumerate() {
            s.push_str(&format!("x{:<3}|", self.basis[i]));
            for a in row {
                s.push_str(&format!(" {:>6}", a.to_string()));
            }
            s.push_str(&format!(" | {}\n", self.rhs[i]));
        }
        s.push_str("obj |");
        for a in &obj[..self.width] {
            s.push_str(&format!(" {:>6}", a.to_string()));
        }
        s.push_str(&format!(" | {}", -obj[self.width].clone()));
        s
    }
}

impl fmt::Display for LpSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} objective={} x=[", self.status, self.objective_value)?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}
