//! Truncated fiber operators on the `(m, n)` lattice.
//!
//! Basis vector `(m, n)` is the Landau state `e^{2 pi i (xi+n) x} Psi_{xi+n,m}(y)`
//! with `0 <= m <= m_max`, `|n| <= N`; it sits at index `m (2N+1) + (n+N)`.
//! With `p_n = beta (xi + n)` and `K = n - k`:
//!
//! ```text
//! H[(m,n),(l,k)] = delta B_c (1/2 + m)
//!                + delta_nk [ eps0^2/2 tA0[l,m](p_n) - eps0 A0[l,m](p_n) ]
//!                + eps1^2/2 tA1[K,l,m](p_n) - eps1/2 hA1[K,l,m](p_n)
//! ```

use num_complex::Complex64;

use crate::elements::MatrixElementTable;
use crate::error::{Error, Result};
use crate::field::GaugeData;
use crate::linalg::{self, CMat, HermitianEigen};

/// Largest Hermitian correction accepted after assembly.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Largest coupling allowed to fall outside the momentum window.
pub const TAIL_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct FiberOperator {
    pub xi: f64,
    pub m_max: usize,
    pub n_window: usize,
    pub b_c: f64,
    pub beta: f64,
    pub eps0: f64,
    pub eps1: f64,
    pub matrix: CMat,
}

impl FiberOperator {
    pub fn sites(&self) -> usize {
        2 * self.n_window + 1
    }

    pub fn dim(&self) -> usize {
        (self.m_max + 1) * self.sites()
    }

    pub fn index(&self, m: usize, n: i32) -> usize {
        basis_index(m, n, self.n_window)
    }

    pub fn label(&self, i: usize) -> (usize, i32) {
        basis_label(i, self.n_window)
    }

    pub fn landau_level(&self, m: usize) -> f64 {
        self.b_c * (0.5 + m as f64)
    }

    pub fn p(&self, n: i32) -> f64 {
        self.beta * (self.xi + n as f64)
    }
}

pub fn basis_index(m: usize, n: i32, n_window: usize) -> usize {
    debug_assert!(n.unsigned_abs() as usize <= n_window);
    m * (2 * n_window + 1) + (n + n_window as i32) as usize
}

pub fn basis_label(i: usize, n_window: usize) -> (usize, i32) {
    let s = 2 * n_window + 1;
    (i / s, (i % s) as i32 - n_window as i32)
}

/// Build the truncated `H_xi`.
pub fn assemble(
    xi: f64,
    gauge: &GaugeData,
    table: &MatrixElementTable,
    m_max: usize,
    n_window: usize,
) -> Result<FiberOperator> {
    if table.l_max < m_max {
        return Err(Error::InvalidArgument(format!(
            "table covers levels up to {} but m_max = {m_max}",
            table.l_max
        )));
    }
    if (table.b_c - gauge.b_c).abs() > 1e-14 * gauge.b_c {
        return Err(Error::InvalidArgument("table and gauge disagree on B_c".into()));
    }
    let (eps0, eps1) = (gauge.eps0, gauge.eps1);

    let reach = table.k_max.min(2 * n_window) as i32;
    if eps1 != 0.0 {
        let mut tail = eps1 * table.dropped_tail;
        for k in (reach + 1)..=(table.k_max as i32) {
            for sgn in [-1, 1] {
                for l in 0..=m_max {
                    for m in 0..=m_max {
                        let bound = |fam| {
                            table
                                .modes(fam, sgn * k, l, m)
                                .iter()
                                .map(|e: &(i32, Complex64)| e.1.norm())
                                .sum::<f64>()
                        };
                        let t = 0.5 * eps1 * eps1 * bound(crate::elements::Family::A1Sq)
                            + 0.5 * eps1 * bound(crate::elements::Family::A1Hat);
                        tail = tail.max(t);
                    }
                }
            }
        }
        if tail > TAIL_TOL {
            return Err(Error::TruncationTooSmall {
                range: table.k_max,
                window: 2 * n_window,
                tail,
            });
        }
    }

    let sites = 2 * n_window + 1;
    let dim = (m_max + 1) * sites;
    let mut h = CMat::zeros(dim, dim);
    let beta = table.beta;
    let nw = n_window as i32;

    for n in -nw..=nw {
        let p = beta * (xi + n as f64);
        for m in 0..=m_max {
            let row = basis_index(m, n, n_window);
            h[(row, row)] += Complex64::from(gauge.b_c * (0.5 + m as f64));
            if eps0 != 0.0 {
                for l in 0..=m_max {
                    let col = basis_index(l, n, n_window);
                    let v = 0.5 * eps0 * eps0 * table.a0_sq(l, m, p) - eps0 * table.a0(l, m, p);
                    h[(row, col)] += Complex64::from(v);
                }
            }
            if eps1 != 0.0 {
                for big_k in -reach..=reach {
                    let k = n - big_k;
                    if k.abs() > nw {
                        continue;
                    }
                    for l in 0..=m_max {
                        let col = basis_index(l, k, n_window);
                        let v = table.a1_sq(big_k, l, m, p) * (0.5 * eps1 * eps1)
                            - table.a1_hat(big_k, l, m, p) * (0.5 * eps1);
                        h[(row, col)] += v;
                    }
                }
            }
        }
    }

    let correction = linalg::hermitize(&mut h);
    if correction > HERMITIAN_TOL {
        return Err(Error::NotHermitian {
            deviation: correction,
            tol: HERMITIAN_TOL,
        });
    }
    Ok(FiberOperator {
        xi,
        m_max,
        n_window,
        b_c: gauge.b_c,
        beta,
        eps0,
        eps1,
        matrix: h,
    })
}

/// Full eigendecomposition, eigenvalues ascending.
pub fn dense_spectrum(op: &FiberOperator) -> Result<HermitianEigen> {
    linalg::eigh(&op.matrix)
}

/// Level and site an eigenvector belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Attribution {
    pub value: f64,
    /// Level holding at least half of the weight, if any.
    pub level: Option<usize>,
    /// Site with the largest weight inside the dominant level.
    pub site: i32,
    /// Weight of the dominant level.
    pub weight: f64,
}

pub fn attribute(op: &FiberOperator, eig: &HermitianEigen) -> Vec<Attribution> {
    let sites = op.sites();
    (0..op.dim())
        .map(|c| {
            let mut level_w = vec![0.0; op.m_max + 1];
            for i in 0..op.dim() {
                level_w[i / sites] += eig.vectors[(i, c)].norm_sqr();
            }
            let (best, &w) = level_w
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
                .unwrap();
            let mut site = 0;
            let mut site_w = -1.0;
            for s in 0..sites {
                let v = eig.vectors[(best * sites + s, c)].norm_sqr();
                if v > site_w {
                    site_w = v;
                    site = s as i32 - op.n_window as i32;
                }
            }
            Attribution {
                value: eig.values[c],
                level: (w >= 0.5).then_some(best),
                site,
                weight: w,
            }
        })
        .collect()
}

/// `H = D + M + O`.
#[derive(Debug, Clone)]
pub struct BlockSplit {
    pub m_protect: usize,
    pub n_window: usize,
    pub d: Vec<f64>,
    pub m: CMat,
    pub o: CMat,
}

impl BlockSplit {
    pub fn reassemble(&self) -> CMat {
        let mut h = &self.m + &self.o;
        for (i, &v) in self.d.iter().enumerate() {
            h[(i, i)] += Complex64::from(v);
        }
        h
    }

    pub fn level(&self, i: usize) -> usize {
        basis_label(i, self.n_window).0
    }
}

/// Whether entry `(i, j)` belongs to the `O` block.
pub fn in_o_block(level_i: usize, level_j: usize, m_protect: usize) -> bool {
    level_i != level_j && level_i.min(level_j) <= m_protect
}

pub fn split_matrix(h: &CMat, n_window: usize, m_protect: usize) -> BlockSplit {
    let dim = h.nrows();
    let sites = 2 * n_window + 1;
    let mut m = CMat::zeros(dim, dim);
    let mut o = CMat::zeros(dim, dim);
    let mut d = vec![0.0; dim];
    for j in 0..dim {
        for i in 0..dim {
            let z = h[(i, j)];
            if i == j {
                d[i] = z.re;
                m[(i, i)] = Complex64::new(0.0, z.im);
            } else if in_o_block(i / sites, j / sites, m_protect) {
                o[(i, j)] = z;
            } else {
                m[(i, j)] = z;
            }
        }
    }
    BlockSplit {
        m_protect,
        n_window,
        d,
        m,
        o,
    }
}

pub fn split(op: &FiberOperator, m_protect: usize) -> BlockSplit {
    split_matrix(&op.matrix, op.n_window, m_protect)
}
