//! Dense two-phase primal simplex.
//!
//! Problems are stated as
//!
//! ```text
//! maximize    c · x
//! subject to  A_i · x  (<= | = | >=)  b_i     for every row i
//!             x_j >= l_j                       for every column j
//! ```
//!
//! Lower bounds are removed by the substitution `x = l + x'`, rows are
//! sign-normalized so every right-hand side is non-negative, and the
//! resulting standard form is solved on a dense tableau. The entering
//! variable follows Bland's rule; the leaving row applies Bland's
//! smallest-index rule within a tolerance-widened ratio test that skips
//! badly scaled pivots on degenerate vertices.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstraintSense {
    LessEqual,
    Equal,
    GreaterEqual,
}

impl ConstraintSense {
    fn flipped(self) -> Self {
        match self {
            Self::LessEqual => Self::GreaterEqual,
            Self::Equal => Self::Equal,
            Self::GreaterEqual => Self::LessEqual,
        }
    }
}

impl fmt::Display for ConstraintSense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::LessEqual => "<=",
            Self::Equal => "=",
            Self::GreaterEqual => ">=",
        })
    }
}

/// Numeric knobs of the simplex kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceSettings {
    /// Largest accepted constraint violation, and the phase-1 threshold
    /// above which a problem is declared infeasible.
    pub feasibility_tol: f64,
    /// Tableau entries at or below this value are treated as zero in the
    /// ratio test and never pivoted on.
    pub pivot_tol: f64,
    /// Reduced costs must exceed this to count as improving.
    pub optimality_tol: f64,
    pub max_iterations: usize,
}

impl Default for ToleranceSettings {
    fn default() -> Self {
        Self {
            feasibility_tol: 1e-9,
            pivot_tol: 1e-10,
            optimality_tol: 1e-9,
            max_iterations: 50_000,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("constraint {row} has {found} coefficients, expected {expected}")]
    RowLength { row: usize, expected: usize, found: usize },
    #[error("{what} has length {found}, expected {expected}")]
    Length {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

/// A maximization problem with per-row senses and per-column lower bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraint_matrix: Vec<Vec<f64>>,
    pub constraint_senses: Vec<ConstraintSense>,
    pub rhs: Vec<f64>,
    pub variable_lower_bounds: Vec<f64>,
}

impl LinearProgram {
    /// Starts a problem with the given objective, no rows, and every
    /// variable bounded below by zero.
    pub fn maximize(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            objective,
            constraint_matrix: Vec::new(),
            constraint_senses: Vec::new(),
            rhs: Vec::new(),
            variable_lower_bounds: vec![0.0; n],
        }
    }

    pub fn with_lower_bounds(mut self, bounds: Vec<f64>) -> Self {
        self.variable_lower_bounds = bounds;
        self
    }

    pub fn add_constraint(&mut self, coefficients: Vec<f64>, sense: ConstraintSense, rhs: f64) {
        self.constraint_matrix.push(coefficients);
        self.constraint_senses.push(sense);
        self.rhs.push(rhs);
    }

    pub fn with_constraint(mut self, coefficients: Vec<f64>, sense: ConstraintSense, rhs: f64) -> Self {
        self.add_constraint(coefficients, sense, rhs);
        self
    }

    pub fn num_variables(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.rhs.len()
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.objective.len();
        let m = self.rhs.len();
        if self.variable_lower_bounds.len() != n {
            return Err(LpError::Length {
                what: "variable_lower_bounds",
                expected: n,
                found: self.variable_lower_bounds.len(),
            });
        }
        if self.constraint_matrix.len() != m {
            return Err(LpError::Length {
                what: "constraint_matrix",
                expected: m,
                found: self.constraint_matrix.len(),
            });
        }
        if self.constraint_senses.len() != m {
            return Err(LpError::Length {
                what: "constraint_senses",
                expected: m,
                found: self.constraint_senses.len(),
            });
        }
        for (row, coefficients) in self.constraint_matrix.iter().enumerate() {
            if coefficients.len() != n {
                return Err(LpError::RowLength {
                    row,
                    expected: n,
                    found: coefficients.len(),
                });
            }
            if !coefficients.iter().all(|v| v.is_finite()) {
                return Err(LpError::NonFinite("constraint_matrix"));
            }
        }
        if !self.objective.iter().all(|v| v.is_finite()) {
            return Err(LpError::NonFinite("objective"));
        }
        if !self.rhs.iter().all(|v| v.is_finite()) {
            return Err(LpError::NonFinite("rhs"));
        }
        if !self.variable_lower_bounds.iter().all(|v| v.is_finite()) {
            return Err(LpError::NonFinite("variable_lower_bounds"));
        }
        Ok(())
    }

    /// Value of `A_i · x` for every row.
    pub fn row_activities(&self, x: &[f64]) -> Vec<f64> {
        self.constraint_matrix.iter().map(|row| dot(row, x)).collect()
    }

    /// Largest violation of any row or lower bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self
            .row_activities(x)
            .into_iter()
            .zip(&self.rhs)
            .zip(&self.constraint_senses)
            .map(|((lhs, &b), sense)| match sense {
                ConstraintSense::LessEqual => (lhs - b).max(0.0),
                ConstraintSense::GreaterEqual => (b - lhs).max(0.0),
                ConstraintSense::Equal => (lhs - b).abs(),
            });
        let bounds = x
            .iter()
            .zip(&self.variable_lower_bounds)
            .map(|(&v, &l)| (l - v).max(0.0));
        rows.chain(bounds).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

impl fmt::Display for LpStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Optimal => "optimal",
            Self::Infeasible => "infeasible",
            Self::Unbounded => "unbounded",
            Self::NumericalFailure => "numerical failure",
        })
    }
}

/// Outcome of [`solve_lp`].
///
/// `objective_value` is always `objective · variable_values`. For
/// non-optimal statuses the point is the last basic solution visited
/// (for `Infeasible`, the phase-1 minimizer of total infeasibility).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective_value: f64,
    pub variable_values: Vec<f64>,
    pub iterations: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Standard-form problem after bound shifting and row sign normalization:
/// `A x = b, x >= 0, b >= 0`, with slack/surplus/artificial columns appended.
struct StandardForm {
    /// Row-major, `rows × total_columns`.
    matrix: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    /// Number of original (structural) columns.
    structural: usize,
    /// Columns `[artificial_start, total)` are artificial.
    artificial_start: usize,
    total_columns: usize,
    /// Initial basic column for every row.
    initial_basis: Vec<usize>,
}

impl StandardForm {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.num_variables();
        let m = lp.num_constraints();

        let mut rows = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        let mut senses = Vec::with_capacity(m);
        for i in 0..m {
            let coefficients = &lp.constraint_matrix[i];
            let shifted = lp.rhs[i] - dot(coefficients, &lp.variable_lower_bounds);
            if shifted < 0.0 {
                rows.push(coefficients.iter().map(|v| -v).collect::<Vec<_>>());
                rhs.push(-shifted);
                senses.push(lp.constraint_senses[i].flipped());
            } else {
                rows.push(coefficients.clone());
                rhs.push(shifted);
                senses.push(lp.constraint_senses[i]);
            }
        }

        let slack_count = senses.iter().filter(|s| **s != ConstraintSense::Equal).count();
        let artificial_count = senses.iter().filter(|s| **s != ConstraintSense::LessEqual).count();
        let artificial_start = n + slack_count;
        let total_columns = artificial_start + artificial_count;

        let mut matrix = Vec::with_capacity(m);
        let mut initial_basis = Vec::with_capacity(m);
        let mut next_slack = n;
        let mut next_artificial = artificial_start;
        for (row, sense) in rows.into_iter().zip(&senses) {
            let mut full = row;
            full.resize(total_columns, 0.0);
            match sense {
                ConstraintSense::LessEqual => {
                    full[next_slack] = 1.0;
                    initial_basis.push(next_slack);
                    next_slack += 1;
                }
                ConstraintSense::GreaterEqual => {
                    full[next_slack] = -1.0;
                    next_slack += 1;
                    full[next_artificial] = 1.0;
                    initial_basis.push(next_artificial);
                    next_artificial += 1;
                }
                ConstraintSense::Equal => {
                    full[next_artificial] = 1.0;
                    initial_basis.push(next_artificial);
                    next_artificial += 1;
                }
            }
            matrix.push(full);
        }

        Self {
            matrix,
            rhs,
            structural: n,
            artificial_start,
            total_columns,
            initial_basis,
        }
    }
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
    IterationLimit,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    /// Row index into the standard form for every surviving tableau row.
    origin: Vec<usize>,
    /// Reduced costs `c_j - c_B B⁻¹ A_j` of the active objective.
    reduced: Vec<f64>,
    allowed: Vec<bool>,
    iterations: usize,
}

impl Tableau {
    fn new(form: &StandardForm) -> Self {
        let m = form.rhs.len();
        Self {
            rows: form.matrix.clone(),
            rhs: form.rhs.clone(),
            basis: form.initial_basis.clone(),
            origin: (0..m).collect(),
            reduced: vec![0.0; form.total_columns],
            allowed: vec![true; form.total_columns],
            iterations: 0,
        }
    }

    fn price(&mut self, costs: &[f64]) {
        for j in 0..self.reduced.len() {
            let mut r = costs[j];
            for (row, &b) in self.rows.iter().zip(&self.basis) {
                r -= costs[b] * row[j];
            }
            self.reduced[j] = r;
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let pivot = self.rows[row][col];
        for v in self.rows[row].iter_mut() {
            *v /= pivot;
        }
        self.rhs[row] /= pivot;
        self.rows[row][col] = 1.0;

        let pivot_row = self.rows[row].clone();
        let pivot_rhs = self.rhs[row];
        for i in 0..self.rows.len() {
            if i == row {
                continue;
            }
            let factor = self.rows[i][col];
            if factor == 0.0 {
                continue;
            }
            for (v, p) in self.rows[i].iter_mut().zip(&pivot_row) {
                *v -= factor * p;
            }
            self.rows[i][col] = 0.0;
            self.rhs[i] -= factor * pivot_rhs;
        }
        let factor = self.reduced[col];
        if factor != 0.0 {
            for (v, p) in self.reduced.iter_mut().zip(&pivot_row) {
                *v -= factor * p;
            }
            self.reduced[col] = 0.0;
        }
        self.basis[row] = col;
    }

    /// Two-pass ratio test. Pass one bounds the step, allowing each basic
    /// variable to dip by at most `feasibility_tol`; pass two collects rows
    /// whose ratio fits under that bound. Among those, rows whose pivot is
    /// within a factor of `STABLE_PIVOT_RATIO` of the largest are eligible,
    /// and Bland's rule (smallest basic index) picks the leaving row.
    fn leaving_row(&self, col: usize, tol: &ToleranceSettings) -> Option<usize> {
        const STABLE_PIVOT_RATIO: f64 = 1e-2;
        let candidates: Vec<(usize, f64)> = self
            .rows
            .iter()
            .enumerate()
            .filter(|(_, row)| row[col] > tol.pivot_tol)
            .map(|(i, row)| (i, row[col]))
            .collect();
        let bound = candidates
            .iter()
            .map(|&(i, a)| (self.rhs[i].max(0.0) + tol.feasibility_tol) / a)
            .fold(f64::INFINITY, f64::min);
        let within: Vec<(usize, f64)> = candidates
            .into_iter()
            .filter(|&(i, a)| self.rhs[i].max(0.0) / a <= bound)
            .collect();
        let largest = within.iter().map(|&(_, a)| a).fold(0.0, f64::max);
        within
            .into_iter()
            .filter(|&(_, a)| a >= STABLE_PIVOT_RATIO * largest)
            .min_by_key(|&(i, _)| self.basis[i])
            .map(|(i, _)| i)
    }

    fn run(&mut self, tol: &ToleranceSettings) -> PhaseOutcome {
        loop {
            // Bland: lowest-index improving column.
            let Some(col) = (0..self.reduced.len()).find(|&j| self.allowed[j] && self.reduced[j] > tol.optimality_tol)
            else {
                return PhaseOutcome::Optimal;
            };
            // No entry above pivot_tol: the column is an improving ray.
            let Some(row) = self.leaving_row(col, tol) else {
                return PhaseOutcome::Unbounded;
            };
            if self.iterations >= tol.max_iterations {
                return PhaseOutcome::IterationLimit;
            }
            self.pivot(row, col);
            self.iterations += 1;
            for v in self.rhs.iter_mut() {
                if *v < 0.0 && *v > -tol.feasibility_tol {
                    *v = 0.0;
                }
            }
        }
    }

    /// Pivots basic artificials out after phase 1, dropping rows that are
    /// linearly dependent on the others.
    fn expel_artificials(&mut self, artificial_start: usize, tol: &ToleranceSettings) {
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] < artificial_start {
                i += 1;
                continue;
            }
            let candidate = (0..artificial_start)
                .filter(|&j| self.rows[i][j].abs() > tol.pivot_tol)
                .max_by(|&a, &b| self.rows[i][a].abs().total_cmp(&self.rows[i][b].abs()));
            match candidate {
                Some(j) => {
                    self.pivot(i, j);
                    i += 1;
                }
                None => {
                    self.rows.remove(i);
                    self.rhs.remove(i);
                    self.basis.remove(i);
                    self.origin.remove(i);
                }
            }
        }
    }

    fn basic_point(&self, columns: usize) -> Vec<f64> {
        let mut x = vec![0.0; columns];
        for (&b, &v) in self.basis.iter().zip(&self.rhs) {
            x[b] = v;
        }
        x
    }

    /// Rebuilds `B⁻¹A` and `B⁻¹b` for the current basis from the original
    /// rows, discarding accumulated pivoting error. Returns `false` if the
    /// basis is numerically singular.
    fn refactor(&mut self, form: &StandardForm) -> bool {
        let k = self.basis.len();
        let mut system: Vec<Vec<f64>> = self
            .origin
            .iter()
            .map(|&r| {
                let mut row: Vec<f64> = self.basis.iter().map(|&b| form.matrix[r][b]).collect();
                row.extend_from_slice(&form.matrix[r]);
                row.push(form.rhs[r]);
                row
            })
            .collect();
        let Some(solved) = solve_square(&mut system, k) else {
            return false;
        };
        for (i, mut row) in solved.into_iter().enumerate() {
            self.rhs[i] = row.pop().unwrap_or(0.0);
            for &b in &self.basis {
                row[b] = 0.0;
            }
            row[self.basis[i]] = 1.0;
            self.rows[i] = row;
        }
        true
    }

    /// Dual simplex pivots that drive negative basic values out of the basis
    /// while keeping the reduced costs dual feasible. Returns `false` if a
    /// row admits no pivot or the iteration cap is hit.
    fn restore_feasibility(&mut self, tol: &ToleranceSettings) -> bool {
        loop {
            let leaving = (0..self.rows.len())
                .filter(|&i| self.rhs[i] < -tol.feasibility_tol)
                .min_by(|&a, &b| self.rhs[a].total_cmp(&self.rhs[b]));
            let Some(row) = leaving else {
                return true;
            };
            let entering = (0..self.reduced.len())
                .filter(|&j| self.allowed[j] && self.rows[row][j] < -tol.pivot_tol)
                .map(|j| (j, self.reduced[j].min(0.0) / self.rows[row][j]))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            let Some((col, _)) = entering else {
                return false;
            };
            if self.iterations >= tol.max_iterations {
                return false;
            }
            self.pivot(row, col);
            self.iterations += 1;
        }
    }

    /// Recomputes basic values from the original rows by solving
    /// `B x_B = b`; falls back to tableau values if `B` is singular.
    fn refined_point(&self, form: &StandardForm) -> Vec<f64> {
        let k = self.basis.len();
        let mut system: Vec<Vec<f64>> = self
            .origin
            .iter()
            .map(|&r| {
                let mut row: Vec<f64> = self.basis.iter().map(|&b| form.matrix[r][b]).collect();
                row.push(form.rhs[r]);
                row
            })
            .collect();
        match solve_square(&mut system, k) {
            Some(values) => {
                let mut x = vec![0.0; form.total_columns];
                for (&b, v) in self.basis.iter().zip(values) {
                    x[b] = v[0];
                }
                x
            }
            None => self.basic_point(form.total_columns),
        }
    }
}

/// Gaussian elimination with partial pivoting on an augmented `k × (k+r)`
/// system; returns the `k × r` solution block.
fn solve_square(system: &mut [Vec<f64>], k: usize) -> Option<Vec<Vec<f64>>> {
    let width = system.first().map_or(k, Vec::len);
    for col in 0..k {
        let pivot = (col..k).max_by(|&a, &b| system[a][col].abs().total_cmp(&system[b][col].abs()))?;
        if system[pivot][col].abs() < 1e-14 {
            return None;
        }
        system.swap(col, pivot);
        let (upper, lower) = system.split_at_mut(col + 1);
        let pivot_row = &upper[col];
        for row in lower.iter_mut().take(k - col - 1) {
            let factor = row[col] / pivot_row[col];
            if factor == 0.0 {
                continue;
            }
            for (v, p) in row[col..width].iter_mut().zip(&pivot_row[col..width]) {
                *v -= factor * p;
            }
        }
    }
    let mut x = vec![vec![0.0; width - k]; k];
    for r in (0..k).rev() {
        for c in k..width {
            let tail: f64 = (r + 1..k).map(|i| system[r][i] * x[i][c - k]).sum();
            x[r][c - k] = (system[r][c] - tail) / system[r][r];
        }
    }
    Some(x)
}

/// Refactor-and-repair attempts after an optimal basis fails the final
/// feasibility check.
const CLEANUP_ROUNDS: usize = 3;

/// Solves `lp` with the two-phase primal simplex method.
///
/// Only malformed input is an `Err`; solver outcomes, including numerical
/// trouble, are reported through [`LpSolution::status`].
pub fn solve_lp(lp: &LinearProgram, tol: &ToleranceSettings) -> Result<LpSolution, LpError> {
    lp.validate()?;
    let form = StandardForm::build(lp);
    let mut tableau = Tableau::new(&form);

    let finish = |status: LpStatus, standard_point: &[f64], iterations: usize| {
        let values: Vec<f64> = standard_point[..form.structural]
            .iter()
            .zip(&lp.variable_lower_bounds)
            .map(|(v, l)| v + l)
            .collect();
        LpSolution {
            status,
            objective_value: dot(&lp.objective, &values),
            variable_values: values,
            iterations,
        }
    };

    if form.artificial_start < form.total_columns {
        let phase1_costs: Vec<f64> = (0..form.total_columns)
            .map(|j| if j >= form.artificial_start { -1.0 } else { 0.0 })
            .collect();
        tableau.price(&phase1_costs);
        match tableau.run(tol) {
            PhaseOutcome::Optimal => {}
            // Phase 1 is bounded below by zero, so a ray here is numerical noise.
            PhaseOutcome::Unbounded | PhaseOutcome::IterationLimit => {
                let point = tableau.basic_point(form.total_columns);
                return Ok(finish(LpStatus::NumericalFailure, &point, tableau.iterations));
            }
        }
        let infeasibility: f64 = tableau
            .basis
            .iter()
            .zip(&tableau.rhs)
            .filter(|(&b, _)| b >= form.artificial_start)
            .map(|(_, &v)| v)
            .sum();
        if infeasibility > tol.feasibility_tol {
            let point = tableau.basic_point(form.total_columns);
            return Ok(finish(LpStatus::Infeasible, &point, tableau.iterations));
        }
        tableau.expel_artificials(form.artificial_start, tol);
        for j in form.artificial_start..form.total_columns {
            tableau.allowed[j] = false;
        }
    }

    let mut costs = vec![0.0; form.total_columns];
    costs[..form.structural].copy_from_slice(&lp.objective);
    tableau.price(&costs);
    let mut solution = None;
    for _ in 0..=CLEANUP_ROUNDS {
        let status = match tableau.run(tol) {
            PhaseOutcome::Optimal => LpStatus::Optimal,
            PhaseOutcome::Unbounded => LpStatus::Unbounded,
            PhaseOutcome::IterationLimit => LpStatus::NumericalFailure,
        };
        if status != LpStatus::Optimal {
            let point = tableau.basic_point(form.total_columns);
            return Ok(finish(status, &point, tableau.iterations));
        }
        let point = tableau.refined_point(&form);
        let candidate = finish(LpStatus::Optimal, &point, tableau.iterations);
        if lp.max_violation(&candidate.variable_values) <= tol.feasibility_tol {
            return Ok(candidate);
        }
        solution = Some(candidate);
        // Ill-conditioned bases can leave the exact basic solution slightly
        // infeasible; refactor and repair with dual pivots, then re-optimize.
        if !tableau.refactor(&form) || !tableau.restore_feasibility(tol) {
            break;
        }
        tableau.price(&costs);
    }
    let solution = solution.expect("at least one round ran");
    Ok(LpSolution {
        status: LpStatus::NumericalFailure,
        ..solution
    })
}
