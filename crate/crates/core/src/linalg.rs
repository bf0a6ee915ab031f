//! Dense complex linear algebra on top of `faer`.
//!
//! Fiber operators are block diagonal whenever the x-coupling vanishes, so
//! [`eigh`] first splits the sparsity graph into connected components and
//! diagonalizes each block separately.

use faer::{Mat, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = Mat<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Eigenvalues ascending, eigenvectors as matching columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

pub fn zeros(n: usize) -> CMat {
    CMat::zeros(n, n)
}

pub fn identity(n: usize) -> CMat {
    CMat::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
}

pub fn adjoint(m: &CMat) -> CMat {
    m.adjoint().to_owned()
}

pub fn max_abs(m: &CMat) -> f64 {
    let mut out = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            out = out.max(m[(i, j)].norm());
        }
    }
    out
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut out = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            out = out.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    out
}

/// `max |H - H*|` over all entries.
pub fn hermitian_deviation(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut out = 0.0f64;
    for i in 0..n {
        for j in i..n {
            out = out.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    out
}

/// Replace `m` by `(m + m*)/2` in place and return the size of the correction.
pub fn hermitize(m: &mut CMat) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            dev = dev.max((m[(i, j)] - avg).norm());
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
    dev
}

/// `max |U*U - I|`.
pub fn unitarity_error(u: &CMat) -> f64 {
    let g = u.adjoint() * u;
    max_abs_diff(&g, &identity(u.nrows()))
}

pub fn mat_vec(m: &CMat, v: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(m.ncols(), v.len());
    let mut out = vec![ZERO; m.nrows()];
    for (j, &vj) in v.iter().enumerate() {
        if vj == ZERO {
            continue;
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o += m[(i, j)] * vj;
        }
    }
    out
}

pub fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn column(m: &CMat, j: usize) -> Vec<Complex64> {
    (0..m.nrows()).map(|i| m[(i, j)]).collect()
}

/// Connected components of the nonzero pattern, each sorted ascending.
pub fn components(m: &CMat) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for j in 0..n {
        for i in 0..j {
            if m[(i, j)] != ZERO || m[(j, i)] != ZERO {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

/// Full eigendecomposition of a Hermitian matrix (lower triangle is read).
pub fn eigh(m: &CMat) -> Result<HermitianEigen> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "eigh needs a square matrix");
    let mut pairs: Vec<(f64, usize, Vec<(usize, Complex64)>)> = Vec::with_capacity(n);
    for comp in components(m) {
        if comp.len() == 1 {
            let i = comp[0];
            pairs.push((m[(i, i)].re, i, vec![(i, ONE)]));
            continue;
        }
        let k = comp.len();
        let sub = CMat::from_fn(k, k, |a, b| m[(comp[a], comp[b])]);
        let evd = sub
            .self_adjoint_eigen(Side::Lower)
            .map_err(|_| Error::EigenNoConvergence { dim: k })?;
        let s = evd.S().column_vector();
        let u = evd.U();
        for c in 0..k {
            let vec: Vec<(usize, Complex64)> = (0..k).map(|r| (comp[r], u[(r, c)])).collect();
            pairs.push((s[c].re, comp[0] * n + c, vec));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut vectors = CMat::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (col, (val, _, entries)) in pairs.into_iter().enumerate() {
        values.push(val);
        for (row, z) in entries {
            vectors[(row, col)] = z;
        }
    }
    Ok(HermitianEigen { values, vectors })
}

/// Eigenvalues and eigenvectors of a real symmetric matrix, ascending.
pub fn eigh_real(m: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let n = m.nrows();
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::EigenNoConvergence { dim: n })?;
    let s = evd.S().column_vector();
    Ok(((0..n).map(|i| s[i]).collect(), evd.U().to_owned()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn block_diagonal_matches_full_solve() {
        let mut m = zeros(5);
        m[(0, 0)] = c(1.0, 0.0);
        m[(2, 2)] = c(3.0, 0.0);
        m[(0, 2)] = c(0.2, 0.1);
        m[(2, 0)] = c(0.2, -0.1);
        m[(1, 1)] = c(-1.0, 0.0);
        m[(3, 3)] = c(2.0, 0.0);
        m[(4, 4)] = c(2.5, 0.0);
        m[(3, 4)] = c(0.0, 0.3);
        m[(4, 3)] = c(0.0, -0.3);
        assert_eq!(components(&m), vec![vec![0, 2], vec![1], vec![3, 4]]);
        let e = eigh(&m).unwrap();
        let full = m.self_adjoint_eigen(Side::Lower).unwrap();
        let s = full.S().column_vector();
        for i in 0..5 {
            assert!((e.values[i] - s[i].re).abs() < 1e-13);
        }
        for j in 0..5 {
            let v = column(&e.vectors, j);
            let hv = mat_vec(&m, &v);
            let res: f64 = hv
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - b * e.values[j]).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(res < 1e-13, "residual {res}");
        }
        assert!(unitarity_error(&e.vectors) < 1e-13);
    }

    #[test]
    fn hermitize_reports_correction() {
        let mut m = zeros(2);
        m[(0, 1)] = c(1.0, 0.0);
        m[(1, 0)] = c(1.0, 2e-12);
        let dev = hermitize(&mut m);
        assert!((dev - 1e-12).abs() < 1e-15);
        assert_eq!(hermitian_deviation(&m), 0.0);
    }
}
