//! Dense linear programming for the locally admissible polynomial fits.
//!
//! The fit problems are tiny in the variable dimension (three polynomial
//! coefficients, plus one auxiliary) but carry one or two inequality rows per
//! observation in the window. We therefore solve
//!
//! ```text
//!   minimize c·z   subject to   G z ≤ h,   z ∈ ℝ^d free
//! ```
//!
//! through its dual `min h·y, Gᵀy = −c, y ≥ 0`, which has only `d` equality
//! rows, with a two-phase revised simplex whose basis is a d×d matrix. At the
//! dual optimum the simplex multipliers are exactly the primal solution.
//! Dantzig pricing with a Bland fallback guarantees termination; all pivots
//! are deterministic, so fits are bit-reproducible.

use crate::{Error, Result};

/// Outcome of a solve.
#[derive(Debug, Clone)]
pub enum LpOutcome {
    /// Optimal primal point and objective value.
    Optimal { z: Vec<f64>, objective: f64 },
    /// The constraint set is empty.
    Infeasible,
    /// The objective is unbounded below on the feasible set.
    Unbounded,
}

const EPS_PIVOT: f64 = 1e-11;
const EPS_COST: f64 = 1e-9;

struct Tableau<'a> {
    /// Constraint rows of the primal (columns of the dual), length-d each.
    cols: &'a [Vec<f64>],
    /// Dual objective = primal rhs.
    w: &'a [f64],
    d: usize,
    /// Basis column indices; values >= cols.len() are artificials.
    basis: Vec<usize>,
    /// Sign of each artificial column.
    art_sign: Vec<f64>,
}

impl<'a> Tableau<'a> {
    fn column(&self, j: usize, out: &mut [f64]) {
        if j < self.cols.len() {
            out.copy_from_slice(&self.cols[j]);
        } else {
            out.fill(0.0);
            out[j - self.cols.len()] = self.art_sign[j - self.cols.len()];
        }
    }

    fn cost(&self, j: usize, phase1: bool) -> f64 {
        if phase1 {
            if j < self.cols.len() {
                0.0
            } else {
                1.0
            }
        } else if j < self.cols.len() {
            self.w[j]
        } else {
            0.0
        }
    }
}

/// Solves a d×d dense system in place; returns false when singular.
fn solve_dense(a: &mut [Vec<f64>], b: &mut [f64]) -> bool {
    let d = b.len();
    for col in 0..d {
        let mut piv = col;
        for r in col + 1..d {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        if a[piv][col].abs() < 1e-13 {
            return false;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let inv = 1.0 / a[col][col];
        for r in 0..d {
            if r == col {
                continue;
            }
            let f = a[r][col] * inv;
            if f != 0.0 {
                let pivot_row = a[col].clone();
                for (c2, &pv) in pivot_row.iter().enumerate().skip(col) {
                    a[r][c2] -= f * pv;
                }
                b[r] -= f * b[col];
            }
        }
    }
    for col in 0..d {
        b[col] /= a[col][col];
    }
    true
}

fn basis_matrix(t: &Tableau, transpose: bool) -> Vec<Vec<f64>> {
    let d = t.d;
    let mut m = vec![vec![0.0; d]; d];
    let mut col = vec![0.0; d];
    for (k, &j) in t.basis.iter().enumerate() {
        t.column(j, &mut col);
        for i in 0..d {
            if transpose {
                m[k][i] = col[i];
            } else {
                m[i][k] = col[i];
            }
        }
    }
    m
}

/// Minimizes `c·z` subject to `rows[i]·z ≤ rhs[i]` with `z ∈ ℝ^d` free.
pub fn solve_min(c: &[f64], rows: &[Vec<f64>], rhs: &[f64]) -> Result<LpOutcome> {
    let d = c.len();
    let m = rows.len();
    debug_assert!(rows.iter().all(|r| r.len() == d));
    debug_assert_eq!(rhs.len(), m);

    // Dual: min w·y s.t. A y = q, y >= 0, with A columns = primal rows, q = -c.
    let q: Vec<f64> = c.iter().map(|&v| -v).collect();
    let art_sign: Vec<f64> = q
        .iter()
        .map(|&v| if v >= 0.0 { 1.0 } else { -1.0 })
        .collect();
    let mut t = Tableau {
        cols: rows,
        w: rhs,
        d,
        basis: (m..m + d).collect(),
        art_sign,
    };

    for phase1 in [true, false] {
        let status = run_simplex(&mut t, &q, phase1)?;
        match status {
            SimplexStatus::Optimal => {
                if phase1 {
                    // Positive artificials at phase-1 optimum: dual infeasible,
                    // i.e. the primal is unbounded below.
                    let xb = basic_values(&t, &q)?;
                    let art_mass: f64 = t
                        .basis
                        .iter()
                        .zip(&xb)
                        .filter(|(&j, _)| j >= m)
                        .map(|(_, &v)| v.abs())
                        .sum();
                    if art_mass > 1e-7 {
                        return Ok(LpOutcome::Unbounded);
                    }
                }
            }
            SimplexStatus::UnboundedDual => {
                return Ok(LpOutcome::Infeasible);
            }
        }
    }

    // Primal solution = simplex multipliers of the final basis.
    let mut bt = basis_matrix(&t, true);
    let mut z: Vec<f64> = t.basis.iter().map(|&j| t.cost(j, false)).collect();
    if !solve_dense(&mut bt, &mut z) {
        return Err(Error::Numerical("singular basis at LP optimum".into()));
    }
    let objective = c.iter().zip(&z).map(|(a, b)| a * b).sum();
    Ok(LpOutcome::Optimal { z, objective })
}

enum SimplexStatus {
    Optimal,
    UnboundedDual,
}

fn basic_values(t: &Tableau, q: &[f64]) -> Result<Vec<f64>> {
    let mut b = basis_matrix(t, false);
    let mut x = q.to_vec();
    if !solve_dense(&mut b, &mut x) {
        return Err(Error::Numerical("singular simplex basis".into()));
    }
    Ok(x)
}

fn run_simplex(t: &mut Tableau, q: &[f64], phase1: bool) -> Result<SimplexStatus> {
    let m = t.cols.len();
    let d = t.d;
    let max_iter = 200 * (m + d) + 2000;
    let mut bland = false;
    let mut degenerate_streak = 0usize;
    let mut col = vec![0.0; d];

    for _ in 0..max_iter {
        // Multipliers: Bᵀ π = cost_B.
        let mut bt = basis_matrix(t, true);
        let mut pi: Vec<f64> = t.basis.iter().map(|&j| t.cost(j, phase1)).collect();
        if !solve_dense(&mut bt, &mut pi) {
            return Err(Error::Numerical("singular simplex basis".into()));
        }

        // Price nonbasic columns (artificials never re-enter).
        let mut entering: Option<(usize, f64)> = None;
        for j in 0..m {
            if t.basis.contains(&j) {
                continue;
            }
            t.column(j, &mut col);
            let r = t.cost(j, phase1) - pi.iter().zip(&col).map(|(a, b)| a * b).sum::<f64>();
            if r < -EPS_COST {
                if bland {
                    entering = Some((j, r));
                    break;
                }
                match entering {
                    Some((_, best)) if r >= best => {}
                    _ => entering = Some((j, r)),
                }
            }
        }
        let Some((e, _)) = entering else {
            return Ok(SimplexStatus::Optimal);
        };

        // Direction u = B^{-1} A_e and current basic values.
        let mut bmat = basis_matrix(t, false);
        t.column(e, &mut col);
        let mut u = col.clone();
        if !solve_dense(&mut bmat, &mut u) {
            return Err(Error::Numerical("singular simplex basis".into()));
        }
        let xb = basic_values(t, q)?;

        // Ratio test; artificials basic at ~0 with u < 0 leave at step 0 so
        // they can never grow back.
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..d {
            let is_art = t.basis[i] >= m;
            if u[i] > EPS_PIVOT {
                let ratio = xb[i].max(0.0) / u[i];
                match leave {
                    Some((li, lr)) => {
                        if ratio < lr - 1e-12 || (ratio < lr + 1e-12 && t.basis[i] < t.basis[li]) {
                            leave = Some((i, ratio));
                        }
                    }
                    None => leave = Some((i, ratio)),
                }
            } else if is_art && xb[i].abs() <= 1e-9 && u[i] < -EPS_PIVOT {
                leave = Some((i, 0.0));
                break;
            }
        }
        let Some((li, step)) = leave else {
            return Ok(SimplexStatus::UnboundedDual);
        };
        if step <= 1e-12 {
            degenerate_streak += 1;
            if degenerate_streak > 40 {
                bland = true;
            }
        } else {
            degenerate_streak = 0;
        }
        t.basis[li] = e;
    }
    Err(Error::Numerical("simplex iteration limit".into()))
}

/// Minimizes `max_i (rows[i]·a − rhs[i])` over `a ∈ ℝ^k`, with the max capped
/// below at `t_floor` (one extra row keeps the problem bounded when every
/// constraint can be satisfied with a large margin). Returns `(a, t*)`.
pub fn chebyshev_fit(rows: &[Vec<f64>], rhs: &[f64], t_floor: f64) -> Result<(Vec<f64>, f64)> {
    let k = rows.first().map(|r| r.len()).unwrap_or(0);
    let d = k + 1;
    let mut g: Vec<Vec<f64>> = Vec::with_capacity(rows.len() + 1);
    let mut h: Vec<f64> = Vec::with_capacity(rows.len() + 1);
    for (r, &b) in rows.iter().zip(rhs) {
        let mut row = Vec::with_capacity(d);
        row.extend_from_slice(r);
        row.push(-1.0);
        g.push(row);
        h.push(b);
    }
    let mut cap = vec![0.0; d];
    cap[k] = -1.0;
    g.push(cap);
    h.push(-t_floor);
    let mut c = vec![0.0; d];
    c[k] = 1.0;
    match solve_min(&c, &g, &h)? {
        LpOutcome::Optimal { z, objective } => Ok((z[..k].to_vec(), objective)),
        LpOutcome::Infeasible => Err(Error::Numerical("min-max LP reported infeasible".into())),
        LpOutcome::Unbounded => Err(Error::Numerical("min-max LP reported unbounded".into())),
    }
}

/// Minimizes `obj·a` subject to `rows[i]·a ≤ rhs[i]`. `Ok(None)` when the
/// constraint set is empty.
pub fn linear_min(obj: &[f64], rows: &[Vec<f64>], rhs: &[f64]) -> Result<Option<(Vec<f64>, f64)>> {
    match solve_min(obj, rows, rhs)? {
        LpOutcome::Optimal { z, objective } => Ok(Some((z, objective))),
        LpOutcome::Infeasible => Ok(None),
        LpOutcome::Unbounded => Err(Error::Numerical(
            "value LP unbounded; missing box rows".into(),
        )),
    }
}

/// Among points satisfying `rows[i]·a ≤ rhs[i]`, returns one minimizing
/// `max_j |a_j|` (the deterministic tie-break for underdetermined fits).
pub fn min_linf_point(rows: &[Vec<f64>], rhs: &[f64], k: usize) -> Result<Option<Vec<f64>>> {
    let d = k + 1;
    let mut g: Vec<Vec<f64>> = Vec::new();
    let mut h: Vec<f64> = Vec::new();
    for (r, &b) in rows.iter().zip(rhs) {
        let mut row = Vec::with_capacity(d);
        row.extend_from_slice(r);
        row.push(0.0);
        g.push(row);
        h.push(b);
    }
    for j in 0..k {
        for s in [1.0, -1.0] {
            let mut row = vec![0.0; d];
            row[j] = s;
            row[k] = -1.0;
            g.push(row);
            h.push(0.0);
        }
    }
    let mut c = vec![0.0; d];
    c[k] = 1.0;
    match solve_min(&c, &g, &h)? {
        LpOutcome::Optimal { z, .. } => Ok(Some(z[..k].to_vec())),
        LpOutcome::Infeasible => Ok(None),
        LpOutcome::Unbounded => Err(Error::Numerical("tie-break LP unbounded".into())),
    }
}
