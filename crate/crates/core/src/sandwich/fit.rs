//! Sampled feasibility of a degree-`(n, m)` sandwich on a compact piece.
//!
//! At each sample the conditions `lo(x) Q(x) <= P(x) <= hi(x) Q(x)` and the
//! normalization `Q(x) >= 1` are linear in the coefficients. The slack `s`
//! narrows the band to `[lo + s gap, hi - s gap]` with `gap = hi - lo`;
//! `max_slack` is the largest `s` that stays feasible, found by bisection.
//! Negative values measure how far an infeasible band would have to widen.

use crate::bounds::{bound_value, ln1p, BoundId};
use crate::error::{Error, Result};
use crate::grid::linspace;
use crate::real::{Precision, Real};

use super::rational::RationalFn;
use super::simplex::{Feasibility, LpOutcome};
use super::{Region, RegionKind};

pub const MAX_DEGREE: usize = 8;
/// Widening stops at `s = -2^MAX_WIDEN`.
const MAX_WIDEN: i64 = 100;

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub bisection_steps: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { bisection_steps: 24 }
    }
}

#[derive(Debug, Clone)]
pub enum FeasibilityStatus {
    Feasible(RationalFn),
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct FeasibilityReport {
    pub n: usize,
    pub m: usize,
    pub region: Region,
    pub sample_count: usize,
    pub status: FeasibilityStatus,
    /// `None` when even `s = -2^100` is infeasible.
    pub max_slack: Option<Real>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        matches!(self.status, FeasibilityStatus::Feasible(_))
    }
}

struct Sample {
    /// `x / scale`
    u: Real,
    lo: Real,
    hi: Real,
    gap: Real,
}

fn samples_for(kind: RegionKind, xs: &[Real], scale: &Real, p: Precision) -> Result<Vec<Sample>> {
    let floor = p.ten_pow_neg(p.digits() as i64 - 2);
    let mut out = Vec::with_capacity(xs.len());
    for x in xs {
        let ln = ln1p(x, p)?;
        let cb = bound_value(BoundId::Cb, x, p)?;
        let (lo, hi) = match kind {
            RegionKind::Upper => (ln, cb),
            RegionKind::Lower => (cb, ln),
        };
        let gap = &hi - &lo;
        if !x.is_zero() && gap < floor {
            return Err(Error::Precision {
                digits: p.digits(),
                reason: format!("gap {} at x = {} is below working resolution", gap.to_decimal(6), x.to_decimal(12)),
            });
        }
        out.push(Sample { u: x / scale, lo, hi, gap });
    }
    Ok(out)
}

fn build_lp(n: usize, m: usize, samples: &[Sample], s: &Real, p: Precision) -> Feasibility {
    let mut lp = Feasibility::new(n + m + 2, p);
    for smp in samples {
        let powers: Vec<Real> = {
            let mut v = vec![Real::one(p)];
            for j in 1..=n.max(m) {
                let next = &v[j - 1] * &smp.u;
                v.push(next);
            }
            v
        };
        let lo = &smp.lo + s * &smp.gap;
        let hi = &smp.hi - s * &smp.gap;

        // lo Q - P <= 0
        let mut row: Vec<Real> = powers[..=n].iter().map(|v| -v).collect();
        row.extend(powers[..=m].iter().map(|v| &lo * v));
        lp.push(row, Real::zero(p));
        // P - hi Q <= 0
        let mut row: Vec<Real> = powers[..=n].to_vec();
        row.extend(powers[..=m].iter().map(|v| -(&hi * v)));
        lp.push(row, Real::zero(p));
        // -Q <= -1
        let mut row: Vec<Real> = vec![Real::zero(p); n + 1];
        row.extend(powers[..=m].iter().map(|v| -v));
        lp.push(row, Real::from_i64(-1, p));
    }
    lp
}

struct Solver<'a> {
    n: usize,
    m: usize,
    samples: &'a [Sample],
    p: Precision,
}

impl Solver<'_> {
    fn solve(&self, s: &Real) -> Result<Option<Vec<Real>>> {
        let lp = build_lp(self.n, self.m, self.samples, s, self.p);
        match lp.solve()? {
            LpOutcome::Infeasible => Ok(None),
            LpOutcome::Feasible(z) => {
                let tol = self.p.ten_pow_neg(self.p.digits() as i64 - 20);
                let worst = lp.max_violation(&z);
                if worst > tol {
                    return Err(Error::Simplex(format!("solution violates a constraint by {}", worst.to_decimal(6))));
                }
                Ok(Some(z))
            }
        }
    }
}

/// Fits on the given sample points (sorted or not).
pub fn fit_on_samples(
    n: usize,
    m: usize,
    kind: RegionKind,
    xs: &[Real],
    opts: FitOptions,
    p: Precision,
) -> Result<FeasibilityReport> {
    if n > MAX_DEGREE || m > MAX_DEGREE {
        return Err(Error::InvalidArgument(format!("degrees ({n}, {m}) exceed {MAX_DEGREE}")));
    }
    if xs.is_empty() {
        return Err(Error::InvalidArgument("no samples".into()));
    }
    let lo = xs.iter().skip(1).fold(xs[0].clone(), |a, b| a.min(b));
    let hi = xs.iter().skip(1).fold(xs[0].clone(), |a, b| a.max(b));
    let scale = lo.abs().max(&hi.abs());
    let scale = if scale.is_zero() { Real::one(p) } else { scale };
    let samples = samples_for(kind, xs, &scale, p)?;
    let solver = Solver { n, m, samples: &samples, p };

    let zero = Real::zero(p);
    let (best, lo_s) = if let Some(z) = solver.solve(&zero)? {
        let mut good = (z, zero.clone());
        let mut bad = Real::ratio(1, 2, p);
        if let Some(z) = solver.solve(&bad)? {
            good = (z, bad.clone());
        } else {
            for _ in 0..opts.bisection_steps {
                let mid = (&good.1 + &bad).mul_pow2(-1);
                match solver.solve(&mid)? {
                    Some(z) => good = (z, mid),
                    None => bad = mid,
                }
            }
        }
        (Some(good.0), Some(good.1))
    } else {
        // Widen until feasible, then bisect back toward zero.
        let mut bad = zero.clone();
        let mut good = None;
        for k in 0..=MAX_WIDEN {
            let s = -Real::one(p).mul_pow2(k);
            if solver.solve(&s)?.is_some() {
                good = Some(s);
                break;
            }
            bad = s;
        }
        let lo_s = match good {
            None => None,
            Some(mut good) => {
                for _ in 0..opts.bisection_steps {
                    let mid = (&good + &bad).mul_pow2(-1);
                    if solver.solve(&mid)?.is_some() {
                        good = mid;
                    } else {
                        bad = mid;
                    }
                }
                Some(good)
            }
        };
        (None, lo_s)
    };

    let status = match best {
        None => FeasibilityStatus::Infeasible,
        Some(z) => {
            let mut pc = Vec::with_capacity(n + 1);
            let mut qc = Vec::with_capacity(m + 1);
            let mut pow = Real::one(p);
            for j in 0..=n.max(m) {
                if j <= n {
                    pc.push(&z[j] / &pow);
                }
                if j <= m {
                    qc.push(&z[n + 1 + j] / &pow);
                }
                pow = pow * &scale;
            }
            FeasibilityStatus::Feasible(RationalFn::new(pc, qc)?)
        }
    };
    Ok(FeasibilityReport { n, m, region: Region { kind, lo, hi }, sample_count: xs.len(), status, max_slack: lo_s })
}

/// Fits on `samples` equally spaced points of the region.
pub fn fit_sandwich(
    n: usize,
    m: usize,
    region: &Region,
    samples: usize,
    opts: FitOptions,
    p: Precision,
) -> Result<FeasibilityReport> {
    let need = 4 * (n + m + 2);
    if samples < need {
        return Err(Error::InvalidArgument(format!("degrees ({n}, {m}) need at least {need} samples")));
    }
    let xs = linspace(&region.lo, &region.hi, samples, p);
    let mut report = fit_on_samples(n, m, region.kind, &xs, opts, p)?;
    report.region = region.clone();
    Ok(report)
}

/// One report per degree pair (rows) and upper-region `xmax` (columns).
pub fn feasibility_matrix(
    degrees: &[(usize, usize)],
    x_max: &[Real],
    samples: usize,
    opts: FitOptions,
    p: Precision,
) -> Result<Vec<Vec<FeasibilityReport>>> {
    degrees
        .iter()
        .map(|&(n, m)| x_max.iter().map(|x| fit_sandwich(n, m, &Region::upper(x, p)?, samples, opts, p)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sandwich::{check_sandwich, SandwichCheck};

    fn p() -> Precision {
        Precision::default()
    }

    #[test]
    fn constant_is_infeasible_on_unit_interval() {
        let region = Region::upper(&Real::one(p()), p()).unwrap();
        let rep = fit_sandwich(0, 0, &region, 50, FitOptions::default(), p()).unwrap();
        assert!(!rep.is_feasible());
        let s = rep.max_slack.unwrap();
        assert!(s.is_negative(), "{s:?}");
    }

    #[test]
    fn sample_count_is_checked() {
        let region = Region::upper(&Real::one(p()), p()).unwrap();
        assert!(fit_sandwich(2, 2, &region, 15, FitOptions::default(), p()).is_err());
        assert!(fit_sandwich(9, 0, &region, 100, FitOptions::default(), p()).is_err());
    }

    #[test]
    fn low_degree_fit_on_short_interval() {
        let region = Region::upper(&Real::ratio(1, 2, p()), p()).unwrap();
        let opts = FitOptions { bisection_steps: 8 };
        let rep = fit_sandwich(3, 2, &region, 40, opts, p()).unwrap();
        if let FeasibilityStatus::Feasible(r) = &rep.status {
            assert!(!rep.max_slack.as_ref().unwrap().is_negative());
            // Every sample satisfies the band.
            assert!(matches!(check_sandwich(r, &region, 40, p()).unwrap(), SandwichCheck::Holds { .. }));
        }
    }

    #[test]
    fn precision_floor_is_enforced() {
        let xs = vec![Real::zero(p()), p().ten_pow_neg(12)];
        assert!(matches!(
            fit_on_samples(1, 1, RegionKind::Upper, &xs, FitOptions::default(), p()),
            Err(Error::Precision { .. })
        ));
    }
}
