//! Dense phase-1 simplex for feasibility of `A z <= b` with free `z`.
//!
//! By Farkas' lemma the system is infeasible exactly when some `y >= 0` has
//! `A^T y = 0` and `b^T y = -1`. Phase 1 on that system (one artificial per
//! row, minimizing their sum) ends with value `w = pi_0`, where
//! `pi = (pi_z, pi_0)` are the row multipliers. `w > 0` means the alternative
//! is empty, and `z = pi_z / pi_0` satisfies `A z <= b`.
//!
//! The tableau has `d + 1` rows and one column per primal constraint, so it
//! stays small even with hundreds of constraints.

use crate::error::{Error, Result};
use crate::real::{Precision, Real};

#[derive(Debug, Clone)]
pub enum LpOutcome {
    Feasible(Vec<Real>),
    Infeasible,
}

/// Degenerate pivots in a row before switching to Bland's rule.
const STALL_LIMIT: usize = 40;

pub struct Feasibility {
    rows: Vec<(Vec<Real>, Real)>,
    dim: usize,
    p: Precision,
}

impl Feasibility {
    pub fn new(dim: usize, p: Precision) -> Self {
        Self { rows: Vec::new(), dim, p }
    }

    /// Adds `a . z <= b`.
    pub fn push(&mut self, a: Vec<Real>, b: Real) {
        assert_eq!(a.len(), self.dim, "constraint width");
        self.rows.push((a, b));
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Largest scaled violation `max_i (a_i . z - b_i) / |a_i|_inf` of a point.
    pub fn max_violation(&self, z: &[Real]) -> Real {
        let p = self.p;
        let mut worst = Real::from_i64(-1, p).scale(1_000_000);
        for (a, b) in &self.rows {
            let scale = a.iter().fold(Real::zero(p), |m, v| m.max(&v.abs()));
            if scale.is_zero() {
                continue;
            }
            let dot = a.iter().zip(z).fold(Real::zero(p), |acc, (ai, zi)| acc + ai * zi);
            worst = worst.max(&((dot - b) / scale));
        }
        worst
    }

    pub fn solve(&self) -> Result<LpOutcome> {
        let p = self.p;
        let tol = p.ten_pow_neg(p.digits() as i64 * 3 / 4);
        let d = self.dim;
        let nrows = d + 1;

        // Columns of the Farkas system: one per primal row, normalized.
        let mut cols: Vec<Vec<Real>> = Vec::with_capacity(self.rows.len());
        for (a, b) in &self.rows {
            let scale = a.iter().chain(std::iter::once(b)).fold(Real::zero(p), |m, v| m.max(&v.abs()));
            if scale.is_zero() {
                continue;
            }
            if a.iter().all(Real::is_zero) {
                if b.is_negative() {
                    return Ok(LpOutcome::Infeasible);
                }
                continue;
            }
            let mut col: Vec<Real> = a.iter().map(|v| v / &scale).collect();
            col.push(-(b / &scale));
            cols.push(col);
        }
        let ny = cols.len();
        let ncols = ny + nrows;

        // Row-major tableau with artificial columns ny..ny+nrows.
        let mut t: Vec<Vec<Real>> = (0..nrows)
            .map(|r| {
                let mut row: Vec<Real> = cols.iter().map(|c| c[r].clone()).collect();
                row.extend((0..nrows).map(|k| if k == r { Real::one(p) } else { Real::zero(p) }));
                row
            })
            .collect();
        let mut rhs: Vec<Real> = (0..nrows).map(|r| if r == d { Real::one(p) } else { Real::zero(p) }).collect();
        let mut basis: Vec<usize> = (ny..ncols).collect();
        let mut cost: Vec<Real> = (0..ncols)
            .map(|j| if j < ny { -(0..nrows).fold(Real::zero(p), |acc, r| acc + &t[r][j]) } else { Real::zero(p) })
            .collect();

        let max_iter = 50 * ncols;
        let mut bland = false;
        let mut stall = 0;
        for _ in 0..max_iter {
            let entering = if bland {
                (0..ncols).find(|&j| cost[j] < -&tol)
            } else {
                let mut best: Option<usize> = None;
                for j in 0..ncols {
                    if cost[j] < -&tol && best.is_none_or(|b| cost[j] < cost[b]) {
                        best = Some(j);
                    }
                }
                best
            };
            let Some(e) = entering else {
                return Ok(self.extract(&cost, ny, d));
            };

            let Some((lr, ratio)) = leaving_row(&t, &rhs, e, ny, &tol) else {
                return Err(Error::Simplex("phase-1 objective unbounded".into()));
            };
            if ratio <= tol {
                stall += 1;
                if stall > STALL_LIMIT {
                    bland = true;
                }
            } else {
                stall = 0;
            }

            let piv = t[lr][e].clone();
            for v in t[lr].iter_mut() {
                *v = &*v / &piv;
            }
            rhs[lr] = &rhs[lr] / &piv;
            let prow = t[lr].clone();
            let prhs = rhs[lr].clone();
            for r in 0..nrows {
                if r == lr || t[r][e].is_zero() {
                    continue;
                }
                let f = t[r][e].clone();
                for (v, pv) in t[r].iter_mut().zip(&prow) {
                    if !pv.is_zero() {
                        *v = &*v - &f * pv;
                    }
                }
                rhs[r] = &rhs[r] - &f * &prhs;
            }
            let f = cost[e].clone();
            for (v, pv) in cost.iter_mut().zip(&prow) {
                if !pv.is_zero() {
                    *v = &*v - &f * pv;
                }
            }
            basis[lr] = e;
        }
        Err(Error::Simplex(format!("no optimum after {max_iter} pivots")))
    }

    /// Reads the multipliers `pi_k = 1 - cost[artificial k]` at optimality.
    fn extract(&self, cost: &[Real], ny: usize, d: usize) -> LpOutcome {
        let p = self.p;
        let pi: Vec<Real> = (0..=d).map(|k| Real::one(p) - &cost[ny + k]).collect();
        let w = &pi[d];
        let threshold = p.ten_pow_neg(p.digits() as i64 / 2);
        if *w <= threshold {
            return LpOutcome::Infeasible;
        }
        LpOutcome::Feasible(pi[..d].iter().map(|v| v / w).collect())
    }
}

/// Lexicographic ratio test: ties on `rhs_r / t[r][e]` are broken by the
/// rows of `B^-1` (the artificial columns) scaled the same way, which rules
/// out cycling whatever the entering rule.
fn leaving_row(t: &[Vec<Real>], rhs: &[Real], e: usize, ny: usize, tol: &Real) -> Option<(usize, Real)> {
    let mut best: Option<(usize, Real)> = None;
    for r in 0..t.len() {
        if t[r][e] <= *tol {
            continue;
        }
        let ratio = &rhs[r] / &t[r][e];
        let replace = match &best {
            None => true,
            Some((br, bratio)) => {
                let diff = &ratio - bratio;
                if diff < -tol {
                    true
                } else if diff > *tol {
                    false
                } else {
                    lex_less(&t[r], &t[*br], e, ny)
                }
            }
        };
        if replace {
            best = Some((r, ratio));
        }
    }
    best
}

/// `B^-1` row `a` over `a[e]` lexicographically below row `b` over `b[e]`.
fn lex_less(a: &[Real], b: &[Real], e: usize, ny: usize) -> bool {
    for k in ny..a.len() {
        let va = &a[k] / &a[e];
        let vb = &b[k] / &b[e];
        if va < vb {
            return true;
        }
        if va > vb {
            return false;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> Precision {
        Precision::default()
    }

    fn r(v: f64) -> Real {
        Real::from_f64(v, p())
    }

    fn system(rows: &[(&[f64], f64)]) -> Feasibility {
        let mut lp = Feasibility::new(rows[0].0.len(), p());
        for (a, b) in rows {
            lp.push(a.iter().map(|&v| r(v)).collect(), r(*b));
        }
        lp
    }

    #[test]
    fn box_is_feasible() {
        // 1 <= z0 <= 2, z1 >= 3, z0 + z1 <= 10
        let lp = system(&[(&[-1.0, 0.0], -1.0), (&[1.0, 0.0], 2.0), (&[0.0, -1.0], -3.0), (&[1.0, 1.0], 10.0)]);
        let LpOutcome::Feasible(z) = lp.solve().unwrap() else { panic!("expected feasible") };
        assert!(lp.max_violation(&z) <= p().ten_pow_neg(30), "{z:?}");
    }

    #[test]
    fn contradiction_is_infeasible() {
        // z <= 0 and z >= 1
        let lp = system(&[(&[1.0], 0.0), (&[-1.0], -1.0)]);
        assert!(matches!(lp.solve().unwrap(), LpOutcome::Infeasible));
        // 0 <= -1 written as a zero row
        let lp = system(&[(&[0.0, 0.0], -1.0)]);
        assert!(matches!(lp.solve().unwrap(), LpOutcome::Infeasible));
    }

    #[test]
    fn homogeneous_rows_keep_origin() {
        // z0 <= z1, z1 <= z0, z0 >= 1: the line z0 = z1 >= 1.
        let lp = system(&[(&[1.0, -1.0], 0.0), (&[-1.0, 1.0], 0.0), (&[-1.0, 0.0], -1.0)]);
        let LpOutcome::Feasible(z) = lp.solve().unwrap() else { panic!("expected feasible") };
        assert!(lp.max_violation(&z) <= p().ten_pow_neg(30));
    }

    #[test]
    fn degenerate_fan() {
        // Many constraints through the same vertex.
        let mut lp = Feasibility::new(2, p());
        for k in 0..60 {
            let a = k as f64 / 60.0;
            lp.push(vec![r(a), r(1.0 - a)], r(1.0));
        }
        lp.push(vec![r(-1.0), r(0.0)], r(-0.5));
        lp.push(vec![r(0.0), r(-1.0)], r(-0.5));
        let LpOutcome::Feasible(z) = lp.solve().unwrap() else { panic!("expected feasible") };
        assert!(lp.max_violation(&z) <= p().ten_pow_neg(30));
        lp.push(vec![r(-1.0), r(-1.0)], r(-2.5));
        assert!(matches!(lp.solve().unwrap(), LpOutcome::Infeasible));
    }
}
