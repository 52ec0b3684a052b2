//! Sample grids.

use crate::real::{Precision, Real};

/// `n` equally spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: &Real, hi: &Real, n: usize, p: Precision) -> Vec<Real> {
    match n {
        0 => Vec::new(),
        1 => vec![lo.with_precision(p)],
        _ => {
            let lo = lo.with_precision(p);
            let hi = hi.with_precision(p);
            let span = &hi - &lo;
            let steps = Real::from_i64(n as i64 - 1, p);
            let mut out: Vec<Real> = (0..n - 1).map(|i| &lo + &span * Real::from_i64(i as i64, p) / &steps).collect();
            out.push(hi);
            out
        }
    }
}

/// `n` logarithmically spaced points from `lo` to `hi` inclusive (both positive).
pub fn logspace(lo: &Real, hi: &Real, n: usize, p: Precision) -> Vec<Real> {
    let lo = lo.with_precision(p);
    let hi = hi.with_precision(p);
    let exps = linspace(&lo.ln(), &hi.ln(), n, p);
    let mut out: Vec<Real> = exps.iter().map(Real::exp).collect();
    if let Some(first) = out.first_mut() {
        *first = lo;
    }
    if n > 1 {
        out[n - 1] = hi;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_are_exact() {
        let p = Precision::default();
        let lo = Real::parse_decimal("1e-6", p).unwrap();
        let hi = Real::parse_decimal("1e6", p).unwrap();
        let g = logspace(&lo, &hi, 500, p);
        assert_eq!(g.len(), 500);
        assert!(g[0] == lo && g[499] == hi);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        let l = linspace(&Real::zero(p), &Real::from_i64(10, p), 11, p);
        assert_eq!(l[3].to_f64(), 3.0);
    }
}
