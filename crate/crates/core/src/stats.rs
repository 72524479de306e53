//! Small numeric kernels: Pearson correlation, tie-averaged ranks, dense
//! matrix inversion and the two-sided Student t tail.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::scalar::Real;

/// Pearson correlation; `None` for fewer than 2 points or zero variance.
pub fn pearson<T: Real>(x: &[T], y: &[T]) -> Option<T> {
    assert_eq!(x.len(), y.len(), "pearson on vectors of different length");
    if x.len() < 2 || is_constant(x) || is_constant(y) {
        return None;
    }
    let n = T::from_count(x.len());
    let mx = x.iter().copied().sum::<T>() / n;
    let my = y.iter().copied().sum::<T>() / n;
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy = sxy + dx * dy;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
    }
    let denom = (sxx * syy).sqrt();
    if denom.is_zero() || !denom.is_finite() {
        return None;
    }
    Some((sxy / denom).max(-T::one()).min(T::one()))
}

fn is_constant<T: Real>(x: &[T]) -> bool {
    x.iter().all(|&v| v == x[0])
}

/// 1-based ranks with ties sharing their average rank.
pub fn ranks<T: Real>(x: &[T]) -> Vec<T> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].partial_cmp(&x[b]).expect("ranking NaN"));
    let mut out = vec![T::zero(); x.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && x[idx[end]] == x[idx[start]] {
            end += 1;
        }
        // ranks start+1 ..= end share their mean
        let avg = T::from_count(start + 1 + end) / T::from_count(2);
        for &i in &idx[start..end] {
            out[i] = avg;
        }
        start = end;
    }
    out
}

/// Gauss-Jordan inverse with partial pivoting. `None` when a pivot falls
/// below `tol` (numerically singular).
pub fn invert<T: Real>(matrix: &[Vec<T>], tol: T) -> Option<Vec<Vec<T>>> {
    let n = matrix.len();
    let mut a: Vec<Vec<T>> = matrix.to_vec();
    let mut inv: Vec<Vec<T>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| a[r][col].abs().partial_cmp(&a[s][col].abs()).expect("finite"))?;
        if !(a[pivot][col].abs() > tol) {
            return None;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col];
        for j in 0..n {
            a[col][j] = a[col][j] / p;
            inv[col][j] = inv[col][j] / p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[r][col];
            if f.is_zero() {
                continue;
            }
            for j in 0..n {
                a[r][j] = a[r][j] - f * a[col][j];
                inv[r][j] = inv[r][j] - f * inv[col][j];
            }
        }
    }
    Some(inv)
}

/// Two-sided p-value of correlation `r` estimated from `n` observations with
/// `k` controlled variables, through `t = r * sqrt(df / (1 - r^2))`, `df = n - 2 - k`.
pub fn correlation_p_value(r: f64, n: usize, k: usize) -> Option<f64> {
    let df = n.checked_sub(2 + k).filter(|&df| df > 0)? as f64;
    if r.is_nan() {
        return None;
    }
    let r2 = r * r;
    if r2 >= 1.0 {
        return Some(0.0);
    }
    let t = r * (df / (1.0 - r2)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).ok()?;
    Some((2.0 * dist.sf(t.abs())).min(1.0))
}
