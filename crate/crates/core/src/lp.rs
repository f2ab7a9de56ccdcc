//! Dense two-phase simplex solver.
//!
//! Problems here are tiny (at most a few hundred variables), so the tableau
//! is dense and the pivot rule is Bland's, trading speed for an anti-cycling
//! guarantee and reproducible pivots.

use crate::error::{Error, Result};

/// Pivot tolerance: entries smaller than this are treated as zero.
const PIVOT_TOL: f64 = 1e-10;
/// Phase-1 feasibility threshold on the artificial-variable sum.
const FEAS_TOL: f64 = 1e-9;

/// `maximize objective . x  subject to  constraints x <= bounds`, with each
/// variable either nonnegative or free (split internally).
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Vec<f64>>,
    pub bounds: Vec<f64>,
    /// `true` marks a variable as unbounded below.
    pub free: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective_value: f64,
    /// Dual multipliers of the `<=` constraints (meaningful when optimal).
    pub dual: Vec<f64>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>, constraints: Vec<Vec<f64>>, bounds: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            objective,
            constraints,
            bounds,
            free: vec![false; n],
        }
    }

    pub fn with_free(mut self, free: Vec<bool>) -> Self {
        self.free = free;
        self
    }

    fn validate(&self) -> Result<()> {
        let n = self.objective.len();
        if n == 0 {
            return Err(Error::Validation("LP has no variables".into()));
        }
        if self.constraints.len() != self.bounds.len() {
            return Err(Error::Validation(format!(
                "LP has {} constraint rows but {} bounds",
                self.constraints.len(),
                self.bounds.len()
            )));
        }
        if self.free.len() != n {
            return Err(Error::Validation(
                "free-variable flags do not match variable count".into(),
            ));
        }
        for (i, row) in self.constraints.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Validation(format!(
                    "constraint row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
        }
        let finite = self
            .objective
            .iter()
            .chain(self.bounds.iter())
            .chain(self.constraints.iter().flatten())
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Validation("LP contains non-finite entries".into()));
        }
        Ok(())
    }
}

/// Solves the program, reporting optimal/infeasible/unbounded.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let n = lp.objective.len();

    // Split free variables into positive/negative parts so the tableau stays
    // in standard form. split[i] = column of the negative part, if any.
    let mut col_of_var = Vec::with_capacity(n);
    let mut neg_col_of_var = vec![None; n];
    let mut n_ext = 0;
    for i in 0..n {
        col_of_var.push(n_ext);
        n_ext += 1;
        if lp.free[i] {
            neg_col_of_var[i] = Some(n_ext);
            n_ext += 1;
        }
    }
    let mut c_ext = vec![0.0; n_ext];
    for i in 0..n {
        c_ext[col_of_var[i]] = lp.objective[i];
        if let Some(jc) = neg_col_of_var[i] {
            c_ext[jc] = -lp.objective[i];
        }
    }
    let a_ext: Vec<Vec<f64>> = lp
        .constraints
        .iter()
        .map(|row| {
            let mut r = vec![0.0; n_ext];
            for i in 0..n {
                r[col_of_var[i]] = row[i];
                if let Some(jc) = neg_col_of_var[i] {
                    r[jc] = -row[i];
                }
            }
            r
        })
        .collect();

    let std_sol = solve_standard(&c_ext, &a_ext, &lp.bounds)?;
    match std_sol {
        StandardOutcome::Infeasible => Ok(LpSolution {
            status: LpStatus::Infeasible,
            x: vec![0.0; n],
            objective_value: f64::NEG_INFINITY,
            dual: vec![0.0; lp.bounds.len()],
        }),
        StandardOutcome::Unbounded => Ok(LpSolution {
            status: LpStatus::Unbounded,
            x: vec![0.0; n],
            objective_value: f64::INFINITY,
            dual: vec![0.0; lp.bounds.len()],
        }),
        StandardOutcome::Optimal { x_ext, dual } => {
            let mut x = vec![0.0; n];
            for i in 0..n {
                x[i] = x_ext[col_of_var[i]];
                if let Some(jc) = neg_col_of_var[i] {
                    x[i] -= x_ext[jc];
                }
            }
            let objective_value = lp
                .objective
                .iter()
                .zip(&x)
                .map(|(ci, xi)| ci * xi)
                .sum();
            Ok(LpSolution {
                status: LpStatus::Optimal,
                x,
                objective_value,
                dual,
            })
        }
    }
}

enum StandardOutcome {
    Optimal { x_ext: Vec<f64>, dual: Vec<f64> },
    Infeasible,
    Unbounded,
}

/// `maximize c . x  s.t.  A x <= b, x >= 0` by the two-phase tableau method.
fn solve_standard(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<StandardOutcome> {
    let m = b.len();
    let n = c.len();

    // Columns: structural (n) | slack (m) | artificial (per negative row) | rhs.
    let mut need_artificial = vec![false; m];
    let mut n_art = 0;
    for i in 0..m {
        if b[i] < 0.0 {
            need_artificial[i] = true;
            n_art += 1;
        }
    }
    let width = n + m + n_art + 1;
    let rhs = width - 1;
    let mut t: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut basis: Vec<usize> = Vec::with_capacity(m);
    let mut art_idx = 0;
    for i in 0..m {
        let mut row = vec![0.0; width];
        let sign = if need_artificial[i] { -1.0 } else { 1.0 };
        for j in 0..n {
            row[j] = sign * a[i][j];
        }
        row[n + i] = sign;
        row[rhs] = sign * b[i];
        if need_artificial[i] {
            let col = n + m + art_idx;
            row[col] = 1.0;
            basis.push(col);
            art_idx += 1;
        } else {
            basis.push(n + i);
        }
        t.push(row);
    }

    let guard = 20_000 + 200 * (m + n);

    if n_art > 0 {
        // Phase 1: maximize -(sum of artificials).
        let mut obj = vec![0.0; width];
        for j in (n + m)..(n + m + n_art) {
            obj[j] = 1.0; // -c_j with c_j = -1
        }
        for i in 0..m {
            if basis[i] >= n + m {
                // Canonicalize: subtract the artificial's unit cost row.
                for j in 0..width {
                    obj[j] -= t[i][j];
                }
            }
        }
        let banned = n + m + n_art; // nothing banned in phase 1
        if !pivot_until_optimal(&mut t, &mut obj, &mut basis, banned, guard)? {
            // Phase-1 objective is bounded by construction.
            return Err(Error::SolverFailure(
                "phase-1 simplex reported unbounded".into(),
            ));
        }
        let art_sum = -obj[rhs];
        if art_sum > FEAS_TOL {
            return Ok(StandardOutcome::Infeasible);
        }
        // Drive any remaining basic artificials out, dropping redundant rows.
        let mut row = 0;
        while row < t.len() {
            if basis[row] >= n + m {
                let piv = (0..n + m).find(|&j| t[row][j].abs() > PIVOT_TOL);
                match piv {
                    Some(j) => pivot(&mut t, &mut obj, &mut basis, row, j),
                    None => {
                        t.remove(row);
                        basis.remove(row);
                        continue;
                    }
                }
            }
            row += 1;
        }
        // Drop artificial columns entirely.
        for r in t.iter_mut() {
            r.drain(n + m..n + m + n_art);
        }
    }

    // Phase 2 with the real objective.
    let width2 = n + m + 1;
    let rhs2 = width2 - 1;
    let mut obj = vec![0.0; width2];
    for j in 0..n {
        obj[j] = -c[j];
    }
    for i in 0..t.len() {
        let v = basis[i];
        if v < n && c[v] != 0.0 {
            for j in 0..width2 {
                obj[j] += c[v] * t[i][j];
            }
        }
    }
    if !pivot_until_optimal(&mut t, &mut obj, &mut basis, n + m, guard)? {
        return Ok(StandardOutcome::Unbounded);
    }

    let mut x_ext = vec![0.0; n + m];
    for (i, &v) in basis.iter().enumerate() {
        x_ext[v] = t[i][rhs2];
    }
    // Duals are the reduced costs on the slack columns.
    let dual = (0..m).map(|i| obj[n + i]).collect();
    x_ext.truncate(n);
    Ok(StandardOutcome::Optimal { x_ext, dual })
}

/// Bland-rule pivoting until optimal. Returns `false` when unbounded.
fn pivot_until_optimal(
    t: &mut Vec<Vec<f64>>,
    obj: &mut [f64],
    basis: &mut [usize],
    n_cols: usize,
    guard: usize,
) -> Result<bool> {
    let rhs = obj.len() - 1;
    for _ in 0..guard {
        // Entering: lowest-index column with negative reduced cost.
        let entering = (0..n_cols).find(|&j| obj[j] < -PIVOT_TOL);
        let Some(j) = entering else {
            return Ok(true);
        };
        // Leaving: minimum ratio; ties broken by smallest basis variable.
        let mut leave: Option<(usize, f64)> = None;
        for (i, row) in t.iter().enumerate() {
            if row[j] > PIVOT_TOL {
                let ratio = row[rhs] / row[j];
                match leave {
                    None => leave = Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br - PIVOT_TOL
                            || (ratio < br + PIVOT_TOL && basis[i] < basis[bi])
                        {
                            leave = Some((i, ratio));
                        }
                    }
                }
            }
        }
        let Some((i, _)) = leave else {
            return Ok(false);
        };
        pivot(t, obj, basis, i, j);
    }
    Err(Error::SolverFailure(
        "simplex cycling guard exceeded".into(),
    ))
}

fn pivot(t: &mut [Vec<f64>], obj: &mut [f64], basis: &mut [usize], row: usize, col: usize) {
    let width = obj.len();
    let p = t[row][col];
    for v in t[row].iter_mut() {
        *v /= p;
    }
    for i in 0..t.len() {
        if i == row {
            continue;
        }
        let f = t[i][col];
        if f != 0.0 {
            for j in 0..width {
                t[i][j] -= f * t[row][j];
            }
            t[i][col] = 0.0;
        }
    }
    let f = obj[col];
    if f != 0.0 {
        for j in 0..width {
            obj[j] -= f * t[row][j];
        }
        obj[col] = 0.0;
    }
    basis[row] = col;
}
