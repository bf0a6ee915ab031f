//! Generalized eigenfunctions
//!
//! ```text
//! Phi(x, y) = sum_{l, n} f[l, n] e^{2 pi i (xi+n) x} Psi_{xi+n, l}(y)
//! ```
//!
//! rebuilt from an eigenvector of a reduced level block, mapped back to the
//! Landau basis by the accumulated rotation.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fiber::{basis_index, FiberOperator};
use crate::hermite::omega_into;
use crate::linalg::{self, ZERO};
use crate::reduction::{level_block, ReductionState};
use crate::stats::fit_line;

/// Residual bound `|(H - lambda) f| / |f|`.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Largest norm fraction allowed on the outer two shells in `n` or `l`.
pub const TAIL_TOL: f64 = 1e-8;
pub const DEFAULT_GRID: (usize, usize) = (256, 512);
pub const DEFAULT_Y_MAX: f64 = 8.0;

#[derive(Debug, Clone)]
pub struct EigenfunctionField {
    pub m: usize,
    /// Site the eigenvector is localized at.
    pub k: i32,
    pub xi: f64,
    pub lambda: f64,
    pub b_c: f64,
    pub beta: f64,
    pub m_max: usize,
    pub n_window: usize,
    /// Unit-norm coefficients in the fiber basis order.
    pub coeffs: Vec<Complex64>,
    /// `|(H - lambda) f|` against the assembled fiber matrix.
    pub residual: f64,
    /// Norm fraction on `|n| >= N - 1` and `l >= m_max - 1`.
    pub n_tail: f64,
    pub l_tail: f64,
}

/// Eigenfunction of level `m` localized nearest site `k`.
pub fn reconstruct(op: &FiberOperator, state: &ReductionState, m: usize, k: i32) -> Result<EigenfunctionField> {
    reconstruct_with(op, state, m, k, TAIL_TOL)
}

/// As [`reconstruct`] with an explicit tail tolerance.
pub fn reconstruct_with(
    op: &FiberOperator,
    state: &ReductionState,
    m: usize,
    k: i32,
    tail_tol: f64,
) -> Result<EigenfunctionField> {
    if m > state.options.m_protect {
        return Err(Error::LevelOutsideWindow {
            level: m,
            window: state.options.m_protect,
        });
    }
    let nw = state.n_window as i32;
    if k.abs() > nw {
        return Err(Error::InvalidArgument(format!("site {k} outside window {nw}")));
    }
    if op.xi != state.xi || op.n_window != state.n_window || op.m_max != state.m_max {
        return Err(Error::InvalidArgument("fiber and reduction describe different truncations".into()));
    }
    let eig = linalg::eigh(&level_block(state, m))?;
    let site = (k + nw) as usize;
    let col = (0..eig.values.len())
        .max_by(|&a, &b| {
            eig.vectors[(site, a)]
                .norm_sqr()
                .total_cmp(&eig.vectors[(site, b)].norm_sqr())
        })
        .unwrap();
    let lambda = eig.values[col];
    let dim = state.dim();
    let idx = state.level_indices(m);
    let mut f = vec![ZERO; dim];
    for i in 0..dim {
        let mut acc = ZERO;
        for (s, &j) in idx.iter().enumerate() {
            acc += state.u[(i, j)] * eig.vectors[(s, col)];
        }
        f[i] = acc;
    }
    let norm = f.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let big = f
        .iter()
        .copied()
        .max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr()))
        .unwrap();
    let phase = big.conj() / big.norm() / norm;
    for z in &mut f {
        *z *= phase;
    }

    let hf = linalg::mat_vec(&op.matrix, &f);
    let residual = hf
        .iter()
        .zip(&f)
        .map(|(a, b)| (a - b * lambda).norm_sqr())
        .sum::<f64>()
        .sqrt();

    let mut n_tail = 0.0;
    let mut l_tail = 0.0;
    for (i, z) in f.iter().enumerate() {
        let (l, n) = op.label(i);
        if n.abs() >= nw - 1 {
            n_tail += z.norm_sqr();
        }
        if l + 1 >= state.m_max {
            l_tail += z.norm_sqr();
        }
    }
    let field = EigenfunctionField {
        m,
        k,
        xi: state.xi,
        lambda,
        b_c: state.b_c,
        beta: state.beta,
        m_max: state.m_max,
        n_window: state.n_window,
        coeffs: f,
        residual,
        n_tail: n_tail.sqrt(),
        l_tail: l_tail.sqrt(),
    };
    if field.n_tail > tail_tol {
        return Err(Error::TailTooLarge { which: "n", fraction: field.n_tail });
    }
    if field.l_tail > tail_tol {
        return Err(Error::TailTooLarge { which: "l", fraction: field.l_tail });
    }
    Ok(field)
}

/// Summary of `sum |f[l, n]| (l^2 + 1) e^{2 delta |n - k|}`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSum {
    pub total: f64,
    /// Contribution of each shell `|n - k| = r`.
    pub shells: Vec<f64>,
    /// Largest ratio of consecutive nonzero shells in the outer half.
    pub tail_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub n_dec: u32,
    pub y_max: f64,
    /// `sup |Phi| (y^{2 n_dec} + 1)` over the grid.
    pub bound: f64,
    /// Log-log slope of the envelope over `y_max/2 <= |y| <= y_max`.
    pub slope: Option<f64>,
    /// The weighted outward envelope grows somewhere at distance
    /// `>= y_max/2` from the center `beta (xi + k)`.
    pub non_monotone: bool,
    pub passes: bool,
}

impl EigenfunctionField {
    pub fn coeff(&self, l: usize, n: i32) -> Complex64 {
        self.coeffs[basis_index(l, n, self.n_window)]
    }

    fn sites(&self) -> std::ops::RangeInclusive<i32> {
        -(self.n_window as i32)..=self.n_window as i32
    }

    /// `G_n(y) = sum_l f[l, n] Psi_{xi+n, l}(y)` and its y-derivative.
    fn profiles(&self, y: f64) -> Vec<(Complex64, Complex64)> {
        let rb = self.b_c.sqrt();
        let pre = self.b_c.powf(0.25);
        let mut w = vec![0.0; self.m_max + 2];
        self.sites()
            .map(|n| {
                let u = rb * (y - self.beta * (self.xi + n as f64));
                omega_into(u, &mut w);
                let mut g = ZERO;
                let mut dg = ZERO;
                for l in 0..=self.m_max {
                    let c = self.coeff(l, n);
                    if c == ZERO {
                        continue;
                    }
                    let lf = l as f64;
                    let down = if l == 0 { 0.0 } else { (lf / 2.0).sqrt() * w[l - 1] };
                    let d = down - ((lf + 1.0) / 2.0).sqrt() * w[l + 1];
                    g += c * (pre * w[l]);
                    dg += c * (pre * rb * d);
                }
                (g, dg)
            })
            .collect()
    }

    fn phases(&self, x: f64) -> Vec<Complex64> {
        self.sites()
            .map(|n| Complex64::from_polar(1.0, 2.0 * PI * (self.xi + n as f64) * x))
            .collect()
    }

    pub fn eval(&self, x: f64, y: f64) -> Complex64 {
        self.profiles(y).iter().zip(self.phases(x)).map(|(g, e)| g.0 * e).sum()
    }

    /// Term-wise y-derivative.
    pub fn eval_dy(&self, x: f64, y: f64) -> Complex64 {
        self.profiles(y).iter().zip(self.phases(x)).map(|(g, e)| g.1 * e).sum()
    }

    /// Partial sum restricted to sites `|n - k| <= r`.
    pub fn eval_partial(&self, x: f64, y: f64, r: i32) -> Complex64 {
        self.profiles(y)
            .iter()
            .zip(self.phases(x))
            .zip(self.sites())
            .filter(|(_, n)| (n - self.k).abs() <= r)
            .map(|((g, e), _)| g.0 * e)
            .sum()
    }

    /// `Phi` on `x in [0,1)` by `y in [-y_max, y_max]`, row-major in `y`.
    pub fn grid(&self, nx: usize, ny: usize, y_max: f64) -> (Vec<f64>, Vec<f64>, Vec<Complex64>) {
        let xs: Vec<f64> = (0..nx).map(|i| i as f64 / nx as f64).collect();
        let ys: Vec<f64> = (0..ny)
            .map(|j| if ny == 1 { 0.0 } else { -y_max + 2.0 * y_max * j as f64 / (ny - 1) as f64 })
            .collect();
        let phases: Vec<Vec<Complex64>> = xs.iter().map(|&x| self.phases(x)).collect();
        let mut vals = Vec::with_capacity(nx * ny);
        for &y in &ys {
            let g = self.profiles(y);
            for ph in &phases {
                vals.push(g.iter().zip(ph).map(|(g, e)| g.0 * e).sum());
            }
        }
        (xs, ys, vals)
    }

    /// Grid dump: header records `m, k, xi, lambda`; columns `x,y,re,im`.
    pub fn grid_csv(&self, nx: usize, ny: usize, y_max: f64) -> String {
        let (xs, ys, vals) = self.grid(nx, ny, y_max);
        let mut s = format!(
            "# m {} k {} xi {:.16e} lambda {:.16e}\nx,y,re,im\n",
            self.m, self.k, self.xi, self.lambda
        );
        for (j, &y) in ys.iter().enumerate() {
            for (i, &x) in xs.iter().enumerate() {
                let v = vals[j * nx + i];
                writeln!(s, "{x:.16e},{y:.16e},{:.16e},{:.16e}", v.re, v.im).unwrap();
            }
        }
        s
    }

    pub fn weighted_sum(&self, delta: f64) -> WeightedSum {
        let rmax = self.sites().map(|n| (n - self.k).abs()).max().unwrap_or(0) as usize;
        let mut shells = vec![0.0; rmax + 1];
        for n in self.sites() {
            let r = (n - self.k).abs();
            for l in 0..=self.m_max {
                let lf = l as f64;
                shells[r as usize] += self.coeff(l, n).norm() * (lf * lf + 1.0) * (2.0 * delta * r as f64).exp();
            }
        }
        let nonzero: Vec<f64> = shells.iter().copied().filter(|&v| v > 0.0).collect();
        let tail_ratio = nonzero
            .windows(2)
            .skip(nonzero.len().saturating_sub(1) / 2)
            .map(|w| w[1] / w[0])
            .fold(0.0, f64::max);
        WeightedSum {
            total: shells.iter().sum(),
            shells,
            tail_ratio,
        }
    }
}

/// Polynomial-weight decay check on the default grid.
pub fn decay_report(field: &EigenfunctionField, n_dec: u32, y_max: f64) -> DecayReport {
    decay_report_on(field, n_dec, y_max, DEFAULT_GRID.0, DEFAULT_GRID.1)
}

pub fn decay_report_on(field: &EigenfunctionField, n_dec: u32, y_max: f64, nx: usize, ny: usize) -> DecayReport {
    let (_, ys, vals) = field.grid(nx, ny, y_max);
    let center = field.beta * (field.xi + field.k as f64);
    let pointwise: Vec<f64> = (0..ny)
        .map(|j| vals[j * nx..(j + 1) * nx].iter().map(|z| z.norm()).fold(0.0, f64::max))
        .collect();
    // outward hull sup_{|y' - c| >= |y - c|} on each side of the center
    let mut env = pointwise.clone();
    for j in (0..ny.saturating_sub(1)).rev() {
        if ys[j] >= center {
            env[j] = env[j].max(env[j + 1]);
        }
    }
    for j in 1..ny {
        if ys[j] < center {
            env[j] = env[j].max(env[j - 1]);
        }
    }
    let weighted: Vec<f64> = env
        .iter()
        .zip(&ys)
        .map(|(e, y)| e * (y.powi(2 * n_dec as i32) + 1.0))
        .collect();
    let bound = pointwise
        .iter()
        .zip(&ys)
        .map(|(e, y)| e * (y.powi(2 * n_dec as i32) + 1.0))
        .fold(0.0, f64::max);
    let slack = 1e-12 * bound;
    let outer = |j: usize| (ys[j] - center).abs() >= y_max / 2.0;
    let up_right = (1..ny).any(|j| ys[j - 1] >= center && outer(j - 1) && weighted[j] > weighted[j - 1] + slack);
    let up_left =
        (0..ny.saturating_sub(1)).any(|j| ys[j + 1] < center && outer(j + 1) && weighted[j] > weighted[j + 1] + slack);
    let (lx, ly): (Vec<f64>, Vec<f64>) = ys
        .iter()
        .zip(&env)
        .filter(|(y, e)| y.abs() >= y_max / 2.0 && **e > f64::MIN_POSITIVE)
        .map(|(y, e)| (y.abs().ln(), e.ln()))
        .unzip();
    let non_monotone = up_right || up_left;
    DecayReport {
        n_dec,
        y_max,
        bound,
        slope: fit_line(&lx, &ly).map(|f| f.slope),
        non_monotone,
        passes: bound.is_finite() && !non_monotone,
    }
}
