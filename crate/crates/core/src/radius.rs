//! Chebyshev-center (radius) computations in two norms: the 1-norm radius of
//! real vectors and the operator-norm radius of small Hermitian families,
//! with dual lower-bound certificates.
//!
//! The operator-norm solver runs seeded subgradient restarts (the objective
//! `max_i ||H_i - C||` is convex piecewise-smooth in the center) and then
//! tightens the best center with a cutting-plane stage whose model minimum
//! doubles as a global lower bound on the radius.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hermitian::{norm3, HermitianOp};
use crate::lp::{self, LinearProgram, LpStatus};

const RAD1_MAX_COORDS: usize = 256;
const RAD1_MAX_VECTORS: usize = 64;
const RAD_OP_MAX_DIM: usize = 4;
const RAD_OP_MAX_COUNT: usize = 16;

/// Step schedule `a / (k + b)` for the subgradient phase.
const STEP_A: f64 = 1.0;
const STEP_B: f64 = 10.0;
/// Cutting-plane budget per polish.
const MAX_CUTS: usize = 400;

/// Options shared by the iterative radius solvers and their callers.
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Master seed; per-restart seeds derive from it.
    pub seed: u64,
    /// Seeded subgradient restarts.
    pub restarts: u32,
    /// Subgradient iterations per restart.
    pub max_iters: u32,
    /// Target accuracy of the reported radius.
    pub tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            restarts: 32,
            max_iters: 5000,
            tol: 1e-7,
        }
    }
}

/// 1-norm radius with its optimal center.
#[derive(Debug, Clone)]
pub struct Rad1Result {
    pub radius: f64,
    pub center: Vec<f64>,
}

/// Operator-norm radius with center certificate and a dual lower bound
/// (the pairwise-midpoint bound; see [`dual_value`] for supplied multipliers).
#[derive(Debug, Clone)]
pub struct RadOpResult {
    pub radius: f64,
    pub center: HermitianOp,
    pub dual_lower_bound: f64,
}

/// Minimal enclosing 1-norm ball of a finite vector set, solved exactly as
/// a linear program: one slack per coordinate per vector linearizes the
/// absolute values, one scalar bounds every per-vector distance.
pub fn rad1(vectors: &[Vec<f64>]) -> Result<Rad1Result> {
    if vectors.is_empty() {
        return Err(Error::Validation("rad1 needs at least one vector".into()));
    }
    let k = vectors[0].len();
    if k == 0 || k > RAD1_MAX_COORDS {
        return Err(Error::Validation(format!(
            "rad1 coordinate count {k} outside 1..={RAD1_MAX_COORDS}"
        )));
    }
    if vectors.len() > RAD1_MAX_VECTORS {
        return Err(Error::Validation(format!(
            "rad1 limited to {RAD1_MAX_VECTORS} vectors, got {}",
            vectors.len()
        )));
    }
    for (i, v) in vectors.iter().enumerate() {
        if v.len() != k {
            return Err(Error::Dimension {
                expected: k,
                found: v.len(),
            });
        }
        if !v.iter().all(|x| x.is_finite()) {
            return Err(Error::Validation(format!("vector {i} has non-finite entries")));
        }
    }
    let count = vectors.len();

    // Variables: c (k, free) | r | t (count*k, >= 0).
    let n_vars = k + 1 + count * k;
    let r_col = k;
    let t_col = |x: usize, i: usize| k + 1 + x * k + i;

    let mut objective = vec![0.0; n_vars];
    objective[r_col] = -1.0;
    let mut free = vec![false; n_vars];
    for f in free.iter_mut().take(k) {
        *f = true;
    }

    let mut rows = Vec::with_capacity(count * (2 * k + 1));
    let mut bounds = Vec::with_capacity(count * (2 * k + 1));
    for (x, v) in vectors.iter().enumerate() {
        for i in 0..k {
            // c_i - t_{x,i} <= v_i
            let mut row = vec![0.0; n_vars];
            row[i] = 1.0;
            row[t_col(x, i)] = -1.0;
            rows.push(row);
            bounds.push(v[i]);
            // -c_i - t_{x,i} <= -v_i
            let mut row = vec![0.0; n_vars];
            row[i] = -1.0;
            row[t_col(x, i)] = -1.0;
            rows.push(row);
            bounds.push(-v[i]);
        }
        // sum_i t_{x,i} - r <= 0
        let mut row = vec![0.0; n_vars];
        for i in 0..k {
            row[t_col(x, i)] = 1.0;
        }
        row[r_col] = -1.0;
        rows.push(row);
        bounds.push(0.0);
    }

    let lp = LinearProgram::new(objective, rows, bounds).with_free(free);
    let sol = lp::solve(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::SolverFailure(format!(
            "rad1 LP ended with status {:?}",
            sol.status
        )));
    }
    let center: Vec<f64> = sol.x[..k].to_vec();
    let radius = vectors
        .iter()
        .map(|v| crate::channels::l1_distance(v, &center))
        .fold(0.0, f64::max);
    Ok(Rad1Result { radius, center })
}

/// Trace / Pauli-coefficient coordinates of a 2x2 Hermitian operator, the
/// native space of the fast radius path.
#[derive(Debug, Clone, Copy)]
pub(crate) struct BlochPoint {
    pub t: f64,
    pub v: [f64; 3],
}

impl BlochPoint {
    pub(crate) fn from_op(h: &HermitianOp) -> Result<Self> {
        let b = h.bloch_decompose()?;
        Ok(Self {
            t: b.trace,
            v: b.vec,
        })
    }
}

/// `max_i (|t_i - tau|/2 + ||v_i - w||)` and the (lowest-index) maximizer.
#[inline]
pub(crate) fn bloch_objective(points: &[BlochPoint], x: &[f64]) -> (f64, usize) {
    let mut best = f64::NEG_INFINITY;
    let mut arg = 0;
    for (i, p) in points.iter().enumerate() {
        let dt = p.t - x[0];
        let dv = [p.v[0] - x[1], p.v[1] - x[2], p.v[2] - x[3]];
        let f = 0.5 * dt.abs() + norm3(&dv);
        if f > best {
            best = f;
            arg = i;
        }
    }
    (best, arg)
}

// The trace coordinate of the 2x2 center is eliminated in closed form: with
// d_i = ||v_i - w||, the inner minimum over tau of max_i (|t_i - tau|/2 + d_i)
// is (A + B)/2 where A = max_i (d_i - t_i/2), B = max_i (d_i + t_i/2), attained
// at tau = B - A. The remaining problem is a smooth-piece minimax over w alone.

/// Objective `(A(w) + B(w))/2` with both maximizer indices.
#[inline]
fn bloch_g(points: &[BlochPoint], w: &[f64]) -> (f64, usize, usize) {
    let mut a = f64::NEG_INFINITY;
    let mut b = f64::NEG_INFINITY;
    let (mut ia, mut ib) = (0, 0);
    for (i, p) in points.iter().enumerate() {
        let d = norm3(&[p.v[0] - w[0], p.v[1] - w[1], p.v[2] - w[2]]);
        let half_t = 0.5 * p.t;
        if d - half_t > a {
            a = d - half_t;
            ia = i;
        }
        if d + half_t > b {
            b = d + half_t;
            ib = i;
        }
    }
    (0.5 * (a + b), ia, ib)
}

fn bloch_g_grad(points: &[BlochPoint], w: &[f64], g: &mut [f64]) -> f64 {
    let (f, ia, ib) = bloch_g(points, w);
    g[0] = 0.0;
    g[1] = 0.0;
    g[2] = 0.0;
    for &i in &[ia, ib] {
        let p = &points[i];
        let q = [p.v[0] - w[0], p.v[1] - w[1], p.v[2] - w[2]];
        let n = norm3(&q);
        if n > 0.0 {
            for k in 0..3 {
                g[k] -= 0.5 * q[k] / n;
            }
        }
    }
    f
}

/// Center trace recovered from the optimal `w`.
fn bloch_tau(points: &[BlochPoint], w: &[f64]) -> f64 {
    let mut a = f64::NEG_INFINITY;
    let mut b = f64::NEG_INFINITY;
    for p in points {
        let d = norm3(&[p.v[0] - w[0], p.v[1] - w[1], p.v[2] - w[2]]);
        a = a.max(d - 0.5 * p.t);
        b = b.max(d + 0.5 * p.t);
    }
    b - a
}

/// Subgradient descent with best-iterate tracking.
fn subgradient_descent<F>(mut f: F, x0: &[f64], iters: u32) -> (f64, Vec<f64>)
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let d = x0.len();
    let mut x = x0.to_vec();
    let mut g = vec![0.0; d];
    let mut best_f = f(&x, &mut g);
    let mut best_x = x.clone();
    for k in 0..iters {
        let step = STEP_A / (k as f64 + STEP_B);
        for j in 0..d {
            x[j] -= step * g[j];
        }
        let v = f(&x, &mut g);
        if v < best_f {
            best_f = v;
            best_x.copy_from_slice(&x);
        }
    }
    (best_f, best_x)
}

/// Cutting-plane refinement. Cuts are global affine minorants of the convex
/// objective, so once the search box provably contains the true minimizer,
/// the model minimum is a certified lower bound and `best - model <= tol`
/// is a sound stopping rule.
fn kelley_refine<F>(
    mut f: F,
    x_start: &[f64],
    gap_tol: f64,
) -> (f64, Vec<f64>, f64)
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let d = x_start.len();
    let mut g = vec![0.0; d];
    let mut best_f = f(x_start, &mut g);
    let mut best_x = x_start.to_vec();

    // cuts: (gradient, offset) representing f(x) >= g.x + off.
    let mut cut_g: Vec<Vec<f64>> = vec![g.clone()];
    let mut cut_off: Vec<f64> = vec![best_f
        - g.iter().zip(x_start).map(|(a, b)| a * b).sum::<f64>()];

    let half_width = 4.0 * best_f.abs() + 1.0;
    let lo: Vec<f64> = best_x.iter().map(|v| v - half_width).collect();
    let hi: Vec<f64> = best_x.iter().map(|v| v + half_width).collect();

    let mut lower = f64::NEG_INFINITY;
    let mut x_new = vec![0.0; d];
    for _ in 0..MAX_CUTS {
        // Variables: x (d, free) | r (free). Maximize -r.
        let n_vars = d + 1;
        let mut objective = vec![0.0; n_vars];
        objective[d] = -1.0;
        let mut rows = Vec::with_capacity(cut_g.len() + 2 * d);
        let mut bounds = Vec::with_capacity(cut_g.len() + 2 * d);
        for (cg, co) in cut_g.iter().zip(&cut_off) {
            let mut row = vec![0.0; n_vars];
            row[..d].copy_from_slice(cg);
            row[d] = -1.0;
            rows.push(row);
            bounds.push(-co);
        }
        for j in 0..d {
            let mut row = vec![0.0; n_vars];
            row[j] = 1.0;
            rows.push(row);
            bounds.push(hi[j]);
            let mut row = vec![0.0; n_vars];
            row[j] = -1.0;
            rows.push(row);
            bounds.push(-lo[j]);
        }
        let lp = LinearProgram::new(objective, rows, bounds).with_free(vec![true; n_vars]);
        let Ok(sol) = lp::solve(&lp) else { break };
        if sol.status != LpStatus::Optimal {
            break;
        }
        let model_min = sol.x[d];
        lower = lower.max(model_min);
        x_new.copy_from_slice(&sol.x[..d]);
        let v = f(&x_new, &mut g);
        if v < best_f {
            best_f = v;
            best_x.copy_from_slice(&x_new);
        }
        if best_f - model_min <= gap_tol {
            break;
        }
        let off = v - g.iter().zip(&x_new).map(|(a, b)| a * b).sum::<f64>();
        cut_g.push(g.clone());
        cut_off.push(off);
    }
    (best_f, best_x, lower)
}

/// Dense Gaussian elimination with partial pivoting; `a` is row-major n x n.
/// Returns false when the system is numerically singular.
fn solve_linear(a: &mut [f64], b: &mut [f64], n: usize) -> bool {
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].abs();
        for row in (col + 1)..n {
            let v = a[row * n + col].abs();
            if v > best {
                best = v;
                piv = row;
            }
        }
        if best < 1e-12 {
            return false;
        }
        if piv != col {
            for j in 0..n {
                a.swap(col * n + j, piv * n + j);
            }
            b.swap(col, piv);
        }
        let d = a[col * n + col];
        for row in (col + 1)..n {
            let f = a[row * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                a[row * n + j] -= f * a[col * n + j];
            }
            b[row] -= f * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut acc = b[col];
        for j in (col + 1)..n {
            acc -= a[col * n + j] * b[j];
        }
        b[col] = acc / a[col * n + col];
    }
    true
}

/// Quadratically convergent finish for the 2x2 path: Newton's method on the
/// KKT system of `(A(w) + B(w))/2` with identified active sets on both
/// maxima. All pieces are smooth away from `w = v_i`, so a correct active
/// set pins the optimum to machine precision; any failure (singular system,
/// negative multiplier, worse value) falls back to the incumbent.
fn newton_polish_bloch(points: &[BlochPoint], w0: &[f64; 3], f0: f64) -> Option<(f64, [f64; 3])> {
    let mut side_a: Vec<(usize, f64)> = Vec::new();
    let mut side_b: Vec<(usize, f64)> = Vec::new();
    let (mut max_a, mut max_b) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (i, p) in points.iter().enumerate() {
        let d = norm3(&[p.v[0] - w0[0], p.v[1] - w0[1], p.v[2] - w0[2]]);
        side_a.push((i, d - 0.5 * p.t));
        side_b.push((i, d + 0.5 * p.t));
        max_a = max_a.max(d - 0.5 * p.t);
        max_b = max_b.max(d + 0.5 * p.t);
    }
    let mut act_a: Vec<usize> = side_a
        .iter()
        .filter(|(_, v)| *v >= max_a - 1e-5)
        .map(|&(i, _)| i)
        .collect();
    let mut act_b: Vec<usize> = side_b
        .iter()
        .filter(|(_, v)| *v >= max_b - 1e-5)
        .map(|&(i, _)| i)
        .collect();
    act_a.sort_by(|&x, &y| side_a[y].1.partial_cmp(&side_a[x].1).unwrap());
    act_b.sort_by(|&x, &y| side_b[y].1.partial_cmp(&side_b[x].1).unwrap());
    act_a.truncate(4);
    act_b.truncate(4);

    // Singleton-singleton active sets make the objective flat along the
    // whole segment between the two Pauli vectors (the sum of distances to
    // the endpoints is constant there), so Newton is singular and cutting
    // planes stall; that case has an exact closed form instead.
    if act_a.len() == 1 && act_b.len() == 1 && act_a[0] != act_b[0] {
        if let Some(r) = two_point_optimum(points, act_a[0], act_b[0]) {
            if r.0 <= f0 + 1e-10 {
                return Some(r);
            }
        }
    }

    let mut w_start = *w0;
    for _round in 0..5 {
        // Retry with shrinking active sets; marginal members can poison the
        // system with negative multipliers.
        let mut sol = None;
        loop {
            if let Some(r) = newton_polish_sides(points, &w_start, f0, &act_a, &act_b) {
                sol = Some(r);
                break;
            }
            if act_a.len() >= act_b.len() && act_a.len() > 1 {
                act_a.pop();
            } else if act_b.len() > 1 {
                act_b.pop();
            } else {
                break;
            }
        }
        let (f_new, w_new, ra, rb) = sol?;
        // KKT holds on the active sets; global optimality additionally
        // needs every other operator inside both maxima. A violator joins
        // its side and the system is re-solved.
        let mut worst: Option<(usize, f64, bool)> = None;
        for (i, p) in points.iter().enumerate() {
            let d = norm3(&[p.v[0] - w_new[0], p.v[1] - w_new[1], p.v[2] - w_new[2]]);
            let slack_a = (d - 0.5 * p.t) - ra;
            let slack_b = (d + 0.5 * p.t) - rb;
            if slack_a > 1e-10 && !act_a.contains(&i) {
                if worst.is_none() || slack_a > worst.unwrap().1 {
                    worst = Some((i, slack_a, true));
                }
            }
            if slack_b > 1e-10 && !act_b.contains(&i) {
                if worst.is_none() || slack_b > worst.unwrap().1 {
                    worst = Some((i, slack_b, false));
                }
            }
        }
        match worst {
            None => {
                if f_new <= f0 + 1e-10 {
                    return Some((f_new, w_new));
                }
                return None;
            }
            Some((i, _, is_a)) => {
                if is_a {
                    act_a.push(i);
                } else {
                    act_b.push(i);
                }
                w_start = w_new;
            }
        }
    }
    None
}

/// Exact optimum when one operator dominates each side: the value is
/// `||v_i - v_j||/2 + (t_j - t_i)/4` anywhere on the segment between the
/// Pauli vectors where both operators stay maximal. The admissible segment
/// parameters form an interval cut out by one quadratic inequality per
/// remaining operator per side; its midpoint is returned as the center.
fn two_point_optimum(points: &[BlochPoint], i: usize, j: usize) -> Option<(f64, [f64; 3])> {
    let (pi, pj) = (&points[i], &points[j]);
    let e = [
        pj.v[0] - pi.v[0],
        pj.v[1] - pi.v[1],
        pj.v[2] - pi.v[2],
    ];
    let len = norm3(&e);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for (k, pk) in points.iter().enumerate() {
        let c = [
            pk.v[0] - pi.v[0],
            pk.v[1] - pi.v[1],
            pk.v[2] - pi.v[2],
        ];
        // d_k(s)^2 = |c - s e|^2; constraints d_k(s) <= alpha s + beta.
        let c_sq = c[0] * c[0] + c[1] * c[1] + c[2] * c[2];
        let ce = c[0] * e[0] + c[1] * e[1] + c[2] * e[2];
        let mut apply = |alpha: f64, beta: f64| -> bool {
            // Solve s^2 (len^2 - alpha^2) - 2 s (ce + alpha beta)
            //        + (c_sq - beta^2) <= 0 with alpha s + beta >= 0.
            let a2 = len * len - alpha * alpha;
            let b2 = -2.0 * (ce + alpha * beta);
            let c2 = c_sq - beta * beta;
            intersect_quadratic(&mut lo, &mut hi, a2, b2, c2, alpha, beta)
        };
        if k != i {
            // d_k - t_k/2 <= A(s) = s len - t_i/2.
            if !apply(len, 0.5 * (pk.t - pi.t)) {
                return None;
            }
        }
        if k != j {
            // d_k + t_k/2 <= B(s) = (1-s) len + t_j/2.
            if !apply(-len, len + 0.5 * (pj.t - pk.t)) {
                return None;
            }
        }
    }
    if lo > hi + 1e-12 {
        return None;
    }
    let s = (0.5 * (lo + hi)).clamp(0.0, 1.0);
    let w = [
        pi.v[0] + s * e[0],
        pi.v[1] + s * e[1],
        pi.v[2] + s * e[2],
    ];
    let (f, _, _) = bloch_g(points, &w);
    let closed = 0.5 * len + 0.25 * (pj.t - pi.t);
    if (f - closed).abs() > 1e-9 * (1.0 + closed.abs()) {
        return None;
    }
    Some((f, w))
}

/// Intersects `{s : a s^2 + b s + c <= 0 and alpha s + beta >= 0}` into
/// `[lo, hi]`. Returns false when the result is empty.
fn intersect_quadratic(
    lo: &mut f64,
    hi: &mut f64,
    a: f64,
    b: f64,
    c: f64,
    alpha: f64,
    beta: f64,
) -> bool {
    // Sign constraint alpha s + beta >= 0 first (affine).
    if alpha.abs() > 1e-14 {
        let root = -beta / alpha;
        if alpha > 0.0 {
            *lo = lo.max(root);
        } else {
            *hi = hi.min(root);
        }
    } else if beta < 0.0 {
        return false;
    }
    if a.abs() < 1e-12 {
        // Affine: b s + c <= 0.
        if b.abs() < 1e-14 {
            return c <= 1e-10;
        }
        let root = -c / b;
        if b > 0.0 {
            *hi = hi.min(root);
        } else {
            *lo = lo.max(root);
        }
        return *lo <= *hi + 1e-12;
    }
    let disc = b * b - 4.0 * a * c;
    if a > 0.0 {
        if disc < 0.0 {
            return false;
        }
        let sq = disc.sqrt();
        let r1 = (-b - sq) / (2.0 * a);
        let r2 = (-b + sq) / (2.0 * a);
        *lo = lo.max(r1.min(r2));
        *hi = hi.min(r1.max(r2));
    } else if disc >= 0.0 {
        // Concave: feasible outside the roots; intersect with whichever
        // side overlaps the current interval (prefer the left branch).
        let sq = disc.sqrt();
        let r1 = (-b + sq) / (2.0 * a);
        let r2 = (-b - sq) / (2.0 * a);
        let (left_end, right_start) = (r1.min(r2), r1.max(r2));
        if *hi <= left_end + 1e-12 || *lo >= right_start - 1e-12 {
            if *hi <= left_end + 1e-12 {
                *hi = hi.min(left_end);
            } else {
                *lo = lo.max(right_start);
            }
        } else if *lo <= left_end {
            *hi = hi.min(left_end);
        } else {
            *lo = lo.max(right_start);
        }
    }
    *lo <= *hi + 1e-12
}

fn newton_polish_sides(
    points: &[BlochPoint],
    w0: &[f64; 3],
    f0: f64,
    act_a: &[usize],
    act_b: &[usize],
) -> Option<(f64, [f64; 3], f64, f64)> {
    let p = act_a.len();
    let q = act_b.len();
    // Unknowns: w (3) | rA | rB | mu (p) | nu (q).
    let n = 5 + p + q;
    let mut z = vec![0.0; n];
    z[0..3].copy_from_slice(w0);
    z[3] = f64::NAN; // set below from the current point
    let dist = |i: usize, w: &[f64]| {
        let pt = &points[i];
        norm3(&[pt.v[0] - w[0], pt.v[1] - w[1], pt.v[2] - w[2]])
    };
    z[3] = dist(act_a[0], w0) - 0.5 * points[act_a[0]].t;
    z[4] = dist(act_b[0], w0) + 0.5 * points[act_b[0]].t;
    for m in z[5..5 + p].iter_mut() {
        *m = 1.0 / p as f64;
    }
    for m in z[5 + p..].iter_mut() {
        *m = 1.0 / q as f64;
    }

    for _ in 0..14 {
        let w = [z[0], z[1], z[2]];
        let (ra, rb) = (z[3], z[4]);
        let mut jac = vec![0.0; n * n];
        let mut res = vec![0.0; n];

        let unit = |i: usize| -> Option<[f64; 3]> {
            let pt = &points[i];
            let qv = [pt.v[0] - w[0], pt.v[1] - w[1], pt.v[2] - w[2]];
            let nq = norm3(&qv);
            if nq < 1e-12 {
                return None;
            }
            Some([qv[0] / nq, qv[1] / nq, qv[2] / nq])
        };

        // Residual rows for both active sides.
        for (k, &i) in act_a.iter().enumerate() {
            let u = unit(i)?;
            let row = k * n;
            res[k] = dist(i, &w) - 0.5 * points[i].t - ra;
            for d in 0..3 {
                jac[row + d] = -u[d];
            }
            jac[row + 3] = -1.0;
        }
        for (k, &i) in act_b.iter().enumerate() {
            let u = unit(i)?;
            let row = (p + k) * n;
            res[p + k] = dist(i, &w) + 0.5 * points[i].t - rb;
            for d in 0..3 {
                jac[row + d] = -u[d];
            }
            jac[row + 4] = -1.0;
        }
        // Stationarity: sum mu_i (-u_i) + sum nu_j (-u_j) = 0.
        for d in 0..3 {
            let row = (p + q + d) * n;
            let mut acc = 0.0;
            for (k, &i) in act_a.iter().enumerate() {
                let u = unit(i)?;
                acc -= z[5 + k] * u[d];
                jac[row + 5 + k] = -u[d];
            }
            for (k, &i) in act_b.iter().enumerate() {
                let u = unit(i)?;
                acc -= z[5 + p + k] * u[d];
                jac[row + 5 + p + k] = -u[d];
            }
            res[p + q + d] = acc;
        }
        // d(stationarity)/dw: sum of multipliers times (I - u u^T)/dist.
        for (k, &i) in act_a.iter().enumerate().map(|(k, i)| (k, i)) {
            let u = unit(i)?;
            let nd = dist(i, &w);
            for d1 in 0..3 {
                for d2 in 0..3 {
                    let id = if d1 == d2 { 1.0 } else { 0.0 };
                    jac[(p + q + d1) * n + d2] += z[5 + k] * (id - u[d1] * u[d2]) / nd;
                }
            }
        }
        for (k, &i) in act_b.iter().enumerate() {
            let u = unit(i)?;
            let nd = dist(i, &w);
            for d1 in 0..3 {
                for d2 in 0..3 {
                    let id = if d1 == d2 { 1.0 } else { 0.0 };
                    jac[(p + q + d1) * n + d2] += z[5 + p + k] * (id - u[d1] * u[d2]) / nd;
                }
            }
        }
        // Multiplier normalizations.
        for k in 0..p {
            jac[(p + q + 3) * n + 5 + k] = 1.0;
        }
        res[p + q + 3] = z[5..5 + p].iter().sum::<f64>() - 1.0;
        for k in 0..q {
            jac[(p + q + 4) * n + 5 + p + k] = 1.0;
        }
        res[p + q + 4] = z[5 + p..].iter().sum::<f64>() - 1.0;

        let max_res = res.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        if max_res < 1e-13 {
            break;
        }
        let mut rhs: Vec<f64> = res.iter().map(|v| -v).collect();
        if !solve_linear(&mut jac, &mut rhs, n) {
            return None;
        }
        let step = rhs.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        if !step.is_finite() || step > 1.0 {
            return None;
        }
        for (zi, d) in z.iter_mut().zip(&rhs) {
            *zi += d;
        }
    }

    if z[5..].iter().any(|&m| m < -1e-8) {
        return None;
    }
    let w_new = [z[0], z[1], z[2]];
    let (f_new, _, _) = bloch_g(points, &w_new);
    if !f_new.is_finite() || f_new > f0 + 0.1 {
        return None;
    }
    Some((f_new, w_new, z[3], z[4]))
}

fn mix_seed(seed: u64, salt: u64) -> u64 {
    // splitmix64 over seed + salt; portable and deterministic.
    let mut z = seed
        .wrapping_add(salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn restart_offsets(seed: u64, restart: u64, d: usize, scale: f64) -> Vec<f64> {
    // Tiny xorshift-based uniform offsets; restart 0 starts at the centroid.
    if restart == 0 {
        return vec![0.0; d];
    }
    let mut state = mix_seed(seed, restart).max(1);
    (0..d)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            let u = (state >> 11) as f64 / (1u64 << 53) as f64;
            scale * (2.0 * u - 1.0)
        })
        .collect()
}

/// Fast specialized path: 2x2 radius over the 3-dimensional Pauli-vector
/// center (the trace coordinate is recovered in closed form).
pub(crate) fn rad2_solve(points: &[BlochPoint], opts: &SolverOptions) -> (f64, [f64; 4]) {
    let centroid = bloch_centroid(points);
    let mut g0 = [0.0; 3];
    let spread = bloch_g_grad(points, &centroid, &mut g0).max(1e-3);

    let restarts = opts.restarts.max(1) as u64;
    let eval = |x: &[f64], g: &mut [f64]| bloch_g_grad(points, x, g);
    let results: Vec<(f64, u64, Vec<f64>)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let off = restart_offsets(opts.seed, r, 3, 0.5 * spread);
            let x0: Vec<f64> = centroid.iter().zip(&off).map(|(c, o)| c + o).collect();
            let (v, x) = subgradient_descent(eval, &x0, opts.max_iters);
            (v, r, x)
        })
        .collect();
    let (_, _, best_x) = results
        .into_iter()
        .min_by(|a, b| (a.0, a.1).partial_cmp(&(b.0, b.1)).unwrap())
        .unwrap();

    // A loose cutting-plane pass is enough to identify the active sets; the
    // Newton finish then lands at machine precision. Only when the finish is
    // rejected does the tight cutting-plane pass pay its full cost.
    let (v, x, _) = kelley_refine(eval, &best_x, 1e-6);
    let w = [x[0], x[1], x[2]];
    let (value, w) = match newton_polish_bloch(points, &w, v) {
        Some((nv, nw)) if nv <= v => (nv, nw),
        _ => {
            let gap = (0.1 * opts.tol).min(1e-9);
            let (v2, x2, _) = kelley_refine(eval, &w, gap);
            let w2 = [x2[0], x2[1], x2[2]];
            match newton_polish_bloch(points, &w2, v2) {
                Some((nv, nw)) if nv <= v2 => (nv, nw),
                _ => (v2, w2),
            }
        }
    };
    let tau = bloch_tau(points, &w);
    (value, [tau, w[0], w[1], w[2]])
}

/// Subgradient-only evaluation for inner search loops; accuracy is
/// proportional to the iteration budget. Allocation-free.
pub(crate) fn rad2_cheap(points: &[BlochPoint], iters: u32, warm: Option<&[f64; 3]>) -> (f64, [f64; 3]) {
    let mut x = match warm {
        Some(w) => *w,
        None => {
            let c = bloch_centroid(points);
            [c[0], c[1], c[2]]
        }
    };
    let mut g = [0.0f64; 3];
    let mut best_f = bloch_g_grad(points, &x, &mut g);
    let mut best_x = x;
    for k in 0..iters {
        let step = STEP_A / (k as f64 + STEP_B);
        for j in 0..3 {
            x[j] -= step * g[j];
        }
        let v = bloch_g_grad(points, &x, &mut g);
        if v < best_f {
            best_f = v;
            best_x = x;
        }
    }
    (best_f, best_x)
}

fn bloch_centroid(points: &[BlochPoint]) -> Vec<f64> {
    let n = points.len() as f64;
    let mut c = vec![0.0; 3];
    for p in points {
        c[0] += p.v[0];
        c[1] += p.v[1];
        c[2] += p.v[2];
    }
    for v in c.iter_mut() {
        *v /= n;
    }
    c
}

// Frobenius-isometric real coordinates for n >= 3 Hermitian matrices:
// diagonal entries, then sqrt(2) * (Re, Im) of each upper off-diagonal.
fn params_dim(n: usize) -> usize {
    n * n
}

fn op_to_params(h: &HermitianOp) -> Vec<f64> {
    let n = h.dim();
    let mut p = Vec::with_capacity(params_dim(n));
    for i in 0..n {
        p.push(h.get(i, i).re);
    }
    let s = std::f64::consts::SQRT_2;
    for i in 0..n {
        for j in (i + 1)..n {
            let z = h.get(i, j);
            p.push(s * z.re);
            p.push(s * z.im);
        }
    }
    p
}

fn params_to_op(n: usize, p: &[f64]) -> HermitianOp {
    let mut data = vec![Complex64::ZERO; n * n];
    for i in 0..n {
        data[i * n + i] = Complex64::new(p[i], 0.0);
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut k = n;
    for i in 0..n {
        for j in (i + 1)..n {
            let z = Complex64::new(s * p[k], s * p[k + 1]);
            data[i * n + j] = z;
            data[j * n + i] = z.conj();
            k += 2;
        }
    }
    HermitianOp::from_parts_unchecked(n, data)
}

/// Objective and eigenvector subgradient for general dimension.
fn op_objective_grad(ops: &[HermitianOp], n: usize, x: &[f64], g: &mut [f64]) -> f64 {
    let c = params_to_op(n, x);
    let mut best = f64::NEG_INFINITY;
    let mut arg = 0;
    for (i, h) in ops.iter().enumerate() {
        let f = h.sub(&c).expect("same dim").operator_norm();
        if f > best {
            best = f;
            arg = i;
        }
    }
    let d = ops[arg].sub(&c).expect("same dim");
    let (vals, vecs) = d.eigendecompose().expect("Jacobi converges");
    let (lo, hi) = (vals[0], vals[n - 1]);
    let (sign, vecidx) = if hi.abs() >= lo.abs() {
        (1.0, n - 1)
    } else {
        (-1.0, 0)
    };
    let u = &vecs[vecidx];
    // gradient of ||H - C|| wrt C is -sign * u u^dag, mapped to parameters.
    let mut outer = vec![Complex64::ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            outer[i * n + j] = u[i] * u[j].conj();
        }
    }
    let grad_op = HermitianOp::from_parts_unchecked(n, outer).scale(-sign);
    let gp = op_to_params(&grad_op);
    g.copy_from_slice(&gp);
    best
}

fn validate_family(ops: &[HermitianOp], max_dim: usize) -> Result<usize> {
    let Some(first) = ops.first() else {
        return Err(Error::Validation("radius of an empty family".into()));
    };
    let n = first.dim();
    if n > max_dim {
        return Err(Error::Validation(format!(
            "operator dimension {n} exceeds supported maximum {max_dim}"
        )));
    }
    if ops.len() > RAD_OP_MAX_COUNT {
        return Err(Error::Validation(format!(
            "radius limited to {RAD_OP_MAX_COUNT} operators, got {}",
            ops.len()
        )));
    }
    for h in ops {
        if h.dim() != n {
            return Err(Error::Dimension {
                expected: n,
                found: h.dim(),
            });
        }
    }
    Ok(n)
}

/// `max_{i<j} ||H_i - H_j|| / 2`, a certified lower bound on the radius.
pub fn pairwise_lower_bound(ops: &[HermitianOp]) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..ops.len() {
        for j in (i + 1)..ops.len() {
            best = best.max(ops[i].sub(&ops[j]).expect("same dim").operator_norm());
        }
    }
    0.5 * best
}

/// Operator-norm Chebyshev radius of a Hermitian family (dimension <= 4).
pub fn rad_op(ops: &[HermitianOp], opts: &SolverOptions) -> Result<RadOpResult> {
    let n = validate_family(ops, RAD_OP_MAX_DIM)?;
    let lower = pairwise_lower_bound(ops);

    if ops.len() == 1 {
        return Ok(RadOpResult {
            radius: 0.0,
            center: ops[0].clone(),
            dual_lower_bound: 0.0,
        });
    }
    if n == 1 {
        let vals: Vec<f64> = ops.iter().map(|h| h.get(0, 0).re).collect();
        let (min, max) = vals
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                (a.min(v), b.max(v))
            });
        return Ok(RadOpResult {
            radius: 0.5 * (max - min),
            center: HermitianOp::from_real_diag(&[0.5 * (max + min)]),
            dual_lower_bound: lower,
        });
    }

    if n == 2 {
        let points: Vec<BlochPoint> = ops
            .iter()
            .map(BlochPoint::from_op)
            .collect::<Result<_>>()?;
        let (radius, x) = rad2_solve(&points, opts);
        let center = crate::hermitian::BlochForm {
            trace: x[0],
            vec: [x[1], x[2], x[3]],
        }
        .reconstruct();
        return Ok(RadOpResult {
            radius,
            center,
            dual_lower_bound: lower,
        });
    }

    // General n in {3, 4}: same pipeline over the n^2 real parameters.
    let d = params_dim(n);
    let mut centroid = vec![0.0; d];
    for h in ops {
        let p = op_to_params(h);
        for (c, v) in centroid.iter_mut().zip(&p) {
            *c += v;
        }
    }
    for c in centroid.iter_mut() {
        *c /= ops.len() as f64;
    }
    let eval = |x: &[f64], g: &mut [f64]| op_objective_grad(ops, n, x, g);
    let mut g0 = vec![0.0; d];
    let spread = eval(&centroid, &mut g0).max(1e-3);

    let restarts = opts.restarts.max(1) as u64;
    let results: Vec<(f64, u64, Vec<f64>)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let off = restart_offsets(opts.seed, r, d, 0.5 * spread);
            let x0: Vec<f64> = centroid.iter().zip(&off).map(|(c, o)| c + o).collect();
            let (v, x) = subgradient_descent(eval, &x0, opts.max_iters);
            (v, r, x)
        })
        .collect();
    let (_, _, best_x) = results
        .into_iter()
        .min_by(|a, b| (a.0, a.1).partial_cmp(&(b.0, b.1)).unwrap())
        .unwrap();

    let gap = (0.1 * opts.tol).min(1e-8);
    let (radius, x, _) = kelley_refine(eval, &best_x, gap);
    Ok(RadOpResult {
        radius,
        center: params_to_op(n, &x),
        dual_lower_bound: lower,
    })
}

const DUAL_PSD_TOL: f64 = 1e-9;
const DUAL_SUM_TOL: f64 = 1e-8;

/// Weak-duality certificate value: `sum_i Tr((lambda_i - lambda'_i) H_i)`
/// for multipliers satisfying `lambda, lambda' >= 0`,
/// `sum lambda = sum lambda'`, `Tr(sum lambda) = 1/2`. Any feasible value is
/// a lower bound on the radius.
pub fn dual_value(
    ops: &[HermitianOp],
    lambdas: &[HermitianOp],
    lambdas_prime: &[HermitianOp],
) -> Result<f64> {
    let n = validate_family(ops, RAD_OP_MAX_DIM)?;
    if lambdas.len() != ops.len() || lambdas_prime.len() != ops.len() {
        return Err(Error::Dimension {
            expected: ops.len(),
            found: lambdas.len().min(lambdas_prime.len()),
        });
    }
    let mut sum = HermitianOp::zero(n);
    let mut sum_prime = HermitianOp::zero(n);
    for (i, (l, lp)) in lambdas.iter().zip(lambdas_prime).enumerate() {
        if l.dim() != n || lp.dim() != n {
            return Err(Error::Dimension {
                expected: n,
                found: l.dim().min(lp.dim()),
            });
        }
        if l.min_eigenvalue() < -DUAL_PSD_TOL {
            return Err(Error::InfeasibleCertificate(format!(
                "lambda[{i}] has negative eigenvalue {}",
                l.min_eigenvalue()
            )));
        }
        if lp.min_eigenvalue() < -DUAL_PSD_TOL {
            return Err(Error::InfeasibleCertificate(format!(
                "lambda'[{i}] has negative eigenvalue {}",
                lp.min_eigenvalue()
            )));
        }
        sum.axpy(1.0, l);
        sum_prime.axpy(1.0, lp);
    }
    let diff = sum.max_entrywise_diff(&sum_prime);
    if diff > DUAL_SUM_TOL {
        return Err(Error::InfeasibleCertificate(format!(
            "sum lambda differs from sum lambda' by {diff:.3e}"
        )));
    }
    let tr = sum.trace();
    if (tr - 0.5).abs() > DUAL_SUM_TOL {
        return Err(Error::InfeasibleCertificate(format!(
            "Tr(sum lambda) = {tr}, expected 1/2"
        )));
    }
    let mut value = 0.0;
    for ((l, lp), h) in lambdas.iter().zip(lambdas_prime).zip(ops) {
        value += l.trace_product(h)? - lp.trace_product(h)?;
    }
    Ok(value)
}

/// Checks `Rad{alpha J + (1-alpha) K} <= alpha Rad{J} + (1-alpha) Rad{K}`
/// up to a small slack.
pub fn rad_convexity_check(
    j_ops: &[HermitianOp],
    k_ops: &[HermitianOp],
    alpha: f64,
    opts: &SolverOptions,
) -> Result<bool> {
    if j_ops.len() != k_ops.len() {
        return Err(Error::Dimension {
            expected: j_ops.len(),
            found: k_ops.len(),
        });
    }
    let mixed: Vec<HermitianOp> = j_ops
        .iter()
        .zip(k_ops)
        .map(|(a, b)| a.scale(alpha).add(&b.scale(1.0 - alpha)))
        .collect::<Result<_>>()?;
    let rj = rad_op(j_ops, opts)?.radius;
    let rk = rad_op(k_ops, opts)?.radius;
    let rm = rad_op(&mixed, opts)?.radius;
    Ok(rm <= alpha * rj + (1.0 - alpha) * rk + 1e-6)
}
