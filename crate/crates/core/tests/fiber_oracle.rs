//! Site blocks of the assembled fiber against a finite-difference
//! discretization of the one-dimensional operator they represent.

use std::f64::consts::PI;

use landau_core::linalg::{self, CMat};
use landau_core::{assemble, Fourier1, Fourier2, GaugeData, MatrixElementTable, TableOptions};

/// Number of eigenvalues of the symmetric tridiagonal matrix below `x`.
fn sturm_count(diag: &[f64], off: f64, x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for (i, &d) in diag.iter().enumerate() {
        q = d - x - if i == 0 { 0.0 } else { off * off / q };
        if q == 0.0 {
            q = f64::EPSILON * (d.abs() + x.abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn kth_eigenvalue(diag: &[f64], off: f64, k: usize, lo: f64, hi: f64) -> f64 {
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if sturm_count(diag, off, mid) > k {
            b = mid;
        } else {
            a = mid;
        }
        if b - a < 1e-14 * b.abs().max(1.0) {
            break;
        }
    }
    0.5 * (a + b)
}

/// Lowest `count` Dirichlet eigenvalues of `-1/2 d^2/dt^2 + V(t)` on
/// `[-len, len]` with step `h`.
fn fd_levels(v: impl Fn(f64) -> f64, len: f64, h: f64, count: usize, upper: f64) -> Vec<f64> {
    let n = (2.0 * len / h).round() as usize - 1;
    let diag: Vec<f64> = (1..=n).map(|i| 1.0 / (h * h) + v(-len + i as f64 * h)).collect();
    let off = -0.5 / (h * h);
    (0..count).map(|k| kth_eigenvalue(&diag, off, k, 0.0, upper)).collect()
}

/// Richardson-extrapolated second-order finite differences.
fn fd_oracle(v: impl Fn(f64) -> f64 + Copy, len: f64, count: usize, upper: f64) -> Vec<f64> {
    let h = 2.0 * len / 4000.0;
    let coarse = fd_levels(v, len, h, count, upper);
    let fine = fd_levels(v, len, h / 2.0, count, upper);
    coarse.iter().zip(&fine).map(|(c, f)| (4.0 * f - c) / 3.0).collect()
}

fn site_block_levels(h: &CMat, m_max: usize, n_window: usize, n: i32, count: usize) -> Vec<f64> {
    let sites = 2 * n_window + 1;
    let idx: Vec<usize> = (0..=m_max).map(|m| m * sites + (n + n_window as i32) as usize).collect();
    let block = CMat::from_fn(idx.len(), idx.len(), |a, b| h[(idx[a], idx[b])]);
    linalg::eigh(&block).unwrap().values[..count].to_vec()
}

#[test]
fn scalar_potential_site_block_matches_finite_differences() {
    let b_c = 2.0 * PI;
    let eps0 = 0.3;
    let a0 = Fourier1::cos(1, 1.0).add(&Fourier1::sin(1, 0.4));
    let gauge = GaugeData::new(b_c, eps0, 0.0, a0.clone(), Fourier2::zero()).unwrap();
    let m_max = 36;
    let table = MatrixElementTable::build(&gauge, &TableOptions::new(m_max)).unwrap();
    let xi = 0.23;
    let op = assemble(xi, &gauge, &table, m_max, 1).unwrap();
    for n in [-1, 0, 1] {
        let q = xi + n as f64;
        let p = 2.0 * PI * q / b_c;
        // (2 pi q - B y + eps0 A0(y))^2 / 2 with y = p + t
        let v = |t: f64| {
            let w = -b_c * t + eps0 * a0.eval_re(p + t);
            0.5 * w * w
        };
        let want = fd_oracle(v, 3.5, 4, 40.0);
        let got = site_block_levels(&op.matrix, m_max, 1, n, 4);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-7, "site {n}: {g} vs {w}");
        }
    }
}

#[test]
fn y_only_vector_potential_is_gauge_trivial() {
    // A1 = a(y) is removed by exp(i eps1 int a), leaving the Landau levels
    let b_c = 2.0 * PI;
    let a1 = Fourier2::from_y(&Fourier1::cos(1, 1.0).add(&Fourier1::sin(1, 0.5)));
    let gauge = GaugeData::new(b_c, 0.0, 0.08, Fourier1::zero(), a1).unwrap();
    let m_max = 30;
    let table = MatrixElementTable::build(&gauge, &TableOptions::new(m_max)).unwrap();
    for xi in [0.0, 0.41] {
        let op = assemble(xi, &gauge, &table, m_max, 1).unwrap();
        let got = site_block_levels(&op.matrix, m_max, 1, 0, 4);
        for (m, g) in got.iter().enumerate() {
            let want = b_c * (0.5 + m as f64);
            assert!((g - want).abs() < 1e-9 * want, "level {m}: {g}");
        }
    }
}

#[test]
fn scalar_potential_does_not_couple_sites() {
    let gauge = GaugeData::new(2.0 * PI, 0.05, 0.0, Fourier1::cos(1, 1.0), Fourier2::zero()).unwrap();
    let table = MatrixElementTable::build(&gauge, &TableOptions::new(5)).unwrap();
    let op = assemble(0.37, &gauge, &table, 5, 3).unwrap();
    for i in 0..op.dim() {
        for j in 0..op.dim() {
            if op.label(i).1 != op.label(j).1 {
                assert_eq!(op.matrix[(i, j)].norm(), 0.0);
            }
        }
    }
}
