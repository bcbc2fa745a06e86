//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, SMatrix};

/// Singular values of `m`, padded with zero rows when `m` is wide so that the
/// right singular vectors span the whole domain.
fn padded_svd(m: &DMatrix<f64>) -> nalgebra::SVD<f64, nalgebra::Dyn, nalgebra::Dyn> {
    let (r, c) = m.shape();
    let m = if r < c {
        let mut p = DMatrix::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(m);
        p
    } else {
        m.clone()
    };
    m.svd(true, true)
}

/// Numerical rank: singular values above `rel_tol · σ_max`.
pub fn rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.singular_values();
    let smax = sv.max();
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > rel_tol * smax).count()
}

/// Orthonormal basis (as columns) of the kernel of `m`, cutting singular
/// values at `rel_tol · σ_max`.
pub fn nullspace(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let c = m.ncols();
    let svd = padded_svd(m);
    let vt = svd.v_t.expect("requested V");
    let smax = svd.singular_values.max();
    let cols: Vec<_> = (0..c)
        .filter(|&n| svd.singular_values[n] <= rel_tol * smax.max(f64::MIN_POSITIVE))
        .map(|n| vt.row(n).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(c, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Orthonormal basis of the column space of `m`.
pub fn column_basis(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let smax = svd.singular_values.max();
    let cols: Vec<_> = (0..svd.singular_values.len())
        .filter(|&n| svd.singular_values[n] > rel_tol * smax)
        .map(|n| u.column(n).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(m.nrows(), 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Ratio of extreme singular values; infinite for a singular matrix.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.singular_values();
    let smin = sv.min();
    if smin == 0.0 {
        f64::INFINITY
    } else {
        sv.max() / smin
    }
}

/// Smallest principal angle between the column spans of `a` and `b`,
/// computed through its sine so that tiny angles keep full precision.
pub fn min_principal_angle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let qa = column_basis(a, 1e-14);
    let qb = column_basis(b, 1e-14);
    let resid = &qb - &qa * (qa.transpose() * &qb);
    let s = resid.singular_values().min().clamp(0.0, 1.0);
    s.asin()
}

/// `exp(m) − I` by Taylor series with scaling and squaring; accurate in the
/// relative sense even when `m` is tiny.
pub fn expm1<const N: usize>(m: &SMatrix<f64, N, N>) -> SMatrix<f64, N, N> {
    let norm = m.abs().row_sum().max();
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let a = m * scale;
    let mut term = a;
    let mut sum = a;
    for n in 2..=18 {
        term = term * a / n as f64;
        sum += term;
        if term.abs().max() <= 1e-18 * sum.abs().max() {
            break;
        }
    }
    // (I + E)² − I = E(2I + E)
    for _ in 0..squarings {
        sum = sum * 2.0 + sum * sum;
    }
    sum
}
