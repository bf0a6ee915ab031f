//! Iterative block diagonalization onto the protected Landau levels.
//!
//! Each step splits `H_j = D_j + M_j + O_j`, solves `[D_j, W_j] = i O_j`
//! and conjugates `H_{j+1} = e^{-i W_j} H_j e^{i W_j}` exactly, until the
//! weighted size `gamma_j` of `O_j` drops below the tolerance.
//!
//! The operator is processed per connected component of its sparsity
//! pattern, which is exact (all blocks iterate in lockstep) and turns the
//! `eps1 = 0` case into a family of small independent problems.

use std::fmt::Write as _;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::fiber::{basis_index, basis_label, in_o_block, split_matrix, BlockSplit, FiberOperator};
use crate::linalg::{self, CMat, ZERO};

pub const DEFAULT_M_PROTECT: usize = 3;
pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionOptions {
    pub m_protect: usize,
    pub tol: f64,
    pub max_iter: usize,
    /// Level weight exponent in `(l^s + 1)`.
    pub s: i32,
    /// Site weight rate in `exp(2 delta |n - k|)`.
    pub delta: f64,
}

impl Default for ReductionOptions {
    fn default() -> Self {
        Self {
            m_protect: DEFAULT_M_PROTECT,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            s: 0,
            delta: 0.0,
        }
    }
}

/// Diagnostics of one iteration, measured on `H_j` before rotating.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub j: usize,
    pub gamma: f64,
    pub delta: f64,
    pub w_norm: f64,
    /// `min |d_i - d_j| / (B_c |m_i - m_j| / 2)` over the used denominators.
    pub margin: f64,
    /// Row `(m, 0)` of `O_j` for each protected `m`, full width.
    pub o_central: Vec<Vec<Complex64>>,
    /// Row `(m, 0)` of `M_j` for each protected `m`, diagonal excluded.
    pub m_central: Vec<Vec<Complex64>>,
    /// `D_j` at `(m, 0)` for each protected `m`.
    pub d_central: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ReductionState {
    pub xi: f64,
    pub m_max: usize,
    pub n_window: usize,
    pub b_c: f64,
    pub beta: f64,
    pub eps0: f64,
    pub eps1: f64,
    pub options: ReductionOptions,
    /// Final iterate.
    pub h: CMat,
    /// Accumulated unitary; columns are the new basis vectors.
    pub u: CMat,
    /// Number of iterates measured (the last one satisfied the tolerance).
    pub j: usize,
    pub gamma: f64,
    pub delta: f64,
    pub history: Vec<IterationRecord>,
    /// Diagonal of `H_1`.
    pub d1: Vec<f64>,
}

impl ReductionState {
    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn index(&self, m: usize, n: i32) -> usize {
        basis_index(m, n, self.n_window)
    }

    pub fn label(&self, i: usize) -> (usize, i32) {
        basis_label(i, self.n_window)
    }

    /// Indices of level `m`, ordered by site.
    pub fn level_indices(&self, m: usize) -> Vec<usize> {
        let nw = self.n_window as i32;
        (-nw..=nw).map(|n| self.index(m, n)).collect()
    }

    /// Diagnostic log as CSV: `j,gamma,delta,w_norm,margin`.
    pub fn history_csv(&self) -> String {
        let mut out = String::from("j,gamma,delta,w_norm,margin\n");
        for r in &self.history {
            writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.j, r.gamma, r.delta, r.w_norm, r.margin
            )
            .unwrap();
        }
        out
    }
}

/// Solve `[D, W] = i O`: `W_ij = i O_ij / (d_i - d_j)` on the support of `O`.
/// Returns `W` and the smallest denominator margin.
pub fn solve_homological(split: &BlockSplit, b_c: f64) -> Result<(CMat, f64)> {
    let levels: Vec<usize> = (0..split.d.len()).map(|i| split.level(i)).collect();
    solve_homological_levels(split, &levels, b_c)
}

fn solve_homological_levels(split: &BlockSplit, levels: &[usize], b_c: f64) -> Result<(CMat, f64)> {
    let n = split.d.len();
    let mut w = CMat::zeros(n, n);
    let mut margin = f64::INFINITY;
    for j in 0..n {
        for i in 0..n {
            let o = split.o[(i, j)];
            if o == ZERO {
                continue;
            }
            let den = split.d[i] - split.d[j];
            let gap = levels[i].abs_diff(levels[j]) as f64;
            let threshold = 0.5 * b_c * gap;
            if den.abs() < threshold {
                return Err(Error::SmallDenominator {
                    denominator: den.abs(),
                    threshold,
                    level_a: levels[i],
                    level_b: levels[j],
                });
            }
            margin = margin.min(den.abs() / threshold);
            w[(i, j)] = Complex64::new(0.0, 1.0) * o / den;
        }
    }
    Ok((w, margin))
}

/// `e^{iW} - I` from the eigendecomposition of `W`, using
/// `e^{i t} - 1 = 2 i sin(t/2) e^{i t/2}` to keep small angles accurate.
pub fn rotation_increment(w: &CMat) -> Result<CMat> {
    let n = w.nrows();
    if linalg::max_abs(w) == 0.0 {
        return Ok(CMat::zeros(n, n));
    }
    let e = linalg::eigh(w)?;
    let phase: Vec<Complex64> = e
        .values
        .iter()
        .map(|&t| Complex64::new(0.0, 2.0 * (0.5 * t).sin()) * Complex64::from_polar(1.0, 0.5 * t))
        .collect();
    let scaled = CMat::from_fn(n, n, |i, c| e.vectors[(i, c)] * phase[c]);
    Ok(&scaled * e.vectors.adjoint())
}

fn conjugate(h: &CMat, k: &CMat) -> CMat {
    // (I + K)* H (I + K)
    let t = h + h * k;
    let mut out = &t + k.adjoint() * &t;
    linalg::hermitize(&mut out);
    out
}

/// `e^{-iW} H e^{iW}`.
pub fn rotate(h: &CMat, w: &CMat) -> Result<CMat> {
    let k = rotation_increment(w)?;
    Ok(conjugate(h, &k))
}

fn weight(level_col: usize, n_row: i32, n_col: i32, s: i32, delta: f64) -> f64 {
    ((level_col as f64).powi(s) + 1.0) * (2.0 * delta * (n_row - n_col).abs() as f64).exp()
}

/// Pointwise `(gamma, delta)` of the current iterate: `gamma` is the largest
/// weighted row sum of `O` over protected rows, `delta` the largest weighted
/// off-diagonal row sum of `M` plus the drift of the protected diagonal.
pub fn measure_norms(state: &ReductionState, s: i32, delta_dec: f64) -> (f64, f64) {
    let split = split_matrix(&state.h, state.n_window, state.options.m_protect);
    norms_of(&split, &state.d1, state.n_window, state.options.m_protect, s, delta_dec)
}

fn norms_of(split: &BlockSplit, d1: &[f64], n_window: usize, m_protect: usize, s: i32, dd: f64) -> (f64, f64) {
    let n = split.d.len();
    let mut gamma = 0.0f64;
    let mut mix = 0.0f64;
    let mut drift = 0.0f64;
    for i in 0..n {
        let (mi, ni) = basis_label(i, n_window);
        let mut o_sum = 0.0;
        let mut m_sum = 0.0;
        for j in 0..n {
            let (mj, nj) = basis_label(j, n_window);
            let w = weight(mj, ni, nj, s, dd);
            o_sum += split.o[(i, j)].norm() * w;
            if i != j {
                m_sum += split.m[(i, j)].norm() * w;
            }
        }
        mix = mix.max(m_sum);
        if mi <= m_protect {
            gamma = gamma.max(o_sum);
            drift = drift.max((split.d[i] - d1[i]).abs());
        }
    }
    (gamma, mix + drift)
}

struct Block {
    idx: Vec<usize>,
    levels: Vec<usize>,
    h: CMat,
    u: CMat,
}

/// Block-diagonalize `op` onto levels `0..=m_protect`.
pub fn reduce(op: &FiberOperator, options: &ReductionOptions) -> Result<ReductionState> {
    if options.m_protect > op.m_max {
        return Err(Error::LevelOutsideWindow {
            level: options.m_protect,
            window: op.m_max,
        });
    }
    if !(options.tol > 0.0) {
        return Err(Error::InvalidArgument("reduction tolerance must be positive".into()));
    }
    let dim = op.dim();
    let nw = op.n_window;
    let mp = options.m_protect;
    let d1: Vec<f64> = (0..dim).map(|i| op.matrix[(i, i)].re).collect();

    let mut blocks: Vec<Block> = linalg::components(&op.matrix)
        .into_iter()
        .map(|idx| {
            let k = idx.len();
            Block {
                levels: idx.iter().map(|&i| basis_label(i, nw).0).collect(),
                h: CMat::from_fn(k, k, |a, b| op.matrix[(idx[a], idx[b])]),
                u: linalg::identity(k),
                idx,
            }
        })
        .collect();
    let mut where_is = vec![(0usize, 0usize); dim];
    for (b, blk) in blocks.iter().enumerate() {
        for (a, &i) in blk.idx.iter().enumerate() {
            where_is[i] = (b, a);
        }
    }

    let mut history = Vec::new();
    let mut converged = false;
    for j in 1..=options.max_iter {
        let mut gamma = 0.0f64;
        let mut mix = 0.0f64;
        let mut drift = 0.0f64;
        let mut splits = Vec::with_capacity(blocks.len());
        for blk in &blocks {
            let sp = split_block(&blk.h, &blk.levels, mp);
            for a in 0..blk.idx.len() {
                let (_, na) = basis_label(blk.idx[a], nw);
                let mut o_sum = 0.0;
                let mut m_sum = 0.0;
                for b in 0..blk.idx.len() {
                    let (lb, nb) = basis_label(blk.idx[b], nw);
                    let w = weight(lb, na, nb, options.s, options.delta);
                    o_sum += sp.o[(a, b)].norm() * w;
                    if a != b {
                        m_sum += sp.m[(a, b)].norm() * w;
                    }
                }
                mix = mix.max(m_sum);
                if blk.levels[a] <= mp {
                    gamma = gamma.max(o_sum);
                    drift = drift.max((sp.d[a] - d1[blk.idx[a]]).abs());
                }
            }
            splits.push(sp);
        }

        let mut o_central = Vec::with_capacity(mp + 1);
        let mut m_central = Vec::with_capacity(mp + 1);
        let mut d_central = Vec::with_capacity(mp + 1);
        for m in 0..=mp {
            let (b, a) = where_is[basis_index(m, 0, nw)];
            let mut orow = vec![ZERO; dim];
            let mut mrow = vec![ZERO; dim];
            for (c, &col) in blocks[b].idx.iter().enumerate() {
                orow[col] = splits[b].o[(a, c)];
                if c != a {
                    mrow[col] = splits[b].m[(a, c)];
                }
            }
            o_central.push(orow);
            m_central.push(mrow);
            d_central.push(splits[b].d[a]);
        }

        let mut record = IterationRecord {
            j,
            gamma,
            delta: mix + drift,
            w_norm: 0.0,
            margin: f64::INFINITY,
            o_central,
            m_central,
            d_central,
        };
        if gamma <= options.tol {
            history.push(record);
            converged = true;
            break;
        }
        for (blk, sp) in blocks.iter_mut().zip(&splits) {
            if linalg::max_abs(&sp.o) == 0.0 {
                continue;
            }
            let (w, margin) = solve_homological_levels(sp, &blk.levels, op.b_c)?;
            record.margin = record.margin.min(margin);
            record.w_norm = record.w_norm.max(linalg::max_abs(&w));
            let k = rotation_increment(&w)?;
            blk.h = conjugate(&blk.h, &k);
            blk.u = &blk.u + &blk.u * &k;
        }
        history.push(record);
    }

    let last = history.last().expect("at least one iteration");
    let (gamma, delta) = (last.gamma, last.delta);
    if !converged {
        return Err(Error::NoConvergence {
            iterations: options.max_iter,
            gamma,
            tol: options.tol,
        });
    }

    let mut h = CMat::zeros(dim, dim);
    let mut u = CMat::zeros(dim, dim);
    for blk in &blocks {
        for (a, &i) in blk.idx.iter().enumerate() {
            for (b, &j) in blk.idx.iter().enumerate() {
                h[(i, j)] = blk.h[(a, b)];
                u[(i, j)] = blk.u[(a, b)];
            }
        }
    }
    Ok(ReductionState {
        xi: op.xi,
        m_max: op.m_max,
        n_window: nw,
        b_c: op.b_c,
        beta: op.beta,
        eps0: op.eps0,
        eps1: op.eps1,
        options: *options,
        h,
        u,
        j: history.len(),
        gamma,
        delta,
        history,
        d1,
    })
}

fn split_block(h: &CMat, levels: &[usize], m_protect: usize) -> BlockSplit {
    let n = h.nrows();
    let mut m = CMat::zeros(n, n);
    let mut o = CMat::zeros(n, n);
    let mut d = vec![0.0; n];
    for j in 0..n {
        for i in 0..n {
            let z = h[(i, j)];
            if i == j {
                d[i] = z.re;
            } else if in_o_block(levels[i], levels[j], m_protect) {
                o[(i, j)] = z;
            } else {
                m[(i, j)] = z;
            }
        }
    }
    BlockSplit {
        m_protect,
        n_window: 0,
        d,
        m,
        o,
    }
}

/// Sup-norm of a periodic sample plus those of its first two derivatives,
/// the derivatives taken spectrally.
pub fn c2_norm(samples: &[Complex64]) -> f64 {
    let n = samples.len();
    if n == 0 {
        return 0.0;
    }
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut spec = samples.to_vec();
    fwd.process(&mut spec);
    let sup = |v: &[Complex64]| v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut total = sup(samples);
    for order in 1..=2 {
        let mut d: Vec<Complex64> = spec
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let k = if i <= n / 2 { i as f64 } else { i as f64 - n as f64 };
                if n % 2 == 0 && i == n / 2 && order % 2 == 1 {
                    return ZERO;
                }
                c * Complex64::new(0.0, 2.0 * std::f64::consts::PI * k).powi(order) / n as f64
            })
            .collect();
        inv.process(&mut d);
        total += sup(&d);
    }
    total
}

/// `C^2`-weighted `(gamma_j, delta_j)` per iteration over a family of
/// reductions whose central sites sample `p = beta xi` uniformly on `[0, 1)`.
/// Iterations past a member's convergence contribute zero.
pub fn measure_norms_c2(family: &[ReductionState], s: i32, delta_dec: f64) -> Vec<(f64, f64)> {
    let Some(first) = family.first() else {
        return Vec::new();
    };
    let mp = first.options.m_protect;
    let nw = first.n_window;
    let dim = first.dim();
    let iters = family.iter().map(|f| f.history.len()).max().unwrap_or(0);
    let mut out = Vec::with_capacity(iters);
    for j in 0..iters {
        let mut gamma = 0.0f64;
        let mut mix = 0.0f64;
        let mut drift = 0.0f64;
        for m in 0..=mp {
            let mut o_sum = 0.0;
            let mut m_sum = 0.0;
            for col in 0..dim {
                let (l, k) = basis_label(col, nw);
                let w = weight(l, 0, k, s, delta_dec);
                let o: Vec<Complex64> = family
                    .iter()
                    .map(|f| f.history.get(j).map_or(ZERO, |r| r.o_central[m][col]))
                    .collect();
                if o.iter().any(|z| *z != ZERO) {
                    o_sum += c2_norm(&o) * w;
                }
                let mm: Vec<Complex64> = family
                    .iter()
                    .map(|f| {
                        let r = f.history.get(j).unwrap_or_else(|| f.history.last().unwrap());
                        r.m_central[m][col]
                    })
                    .collect();
                if mm.iter().any(|z| *z != ZERO) {
                    m_sum += c2_norm(&mm) * w;
                }
            }
            let dd: Vec<Complex64> = family
                .iter()
                .map(|f| {
                    let r = f.history.get(j).unwrap_or_else(|| f.history.last().unwrap());
                    Complex64::from(r.d_central[m] - f.d1[basis_index(m, 0, nw)])
                })
                .collect();
            gamma = gamma.max(o_sum);
            mix = mix.max(m_sum);
            drift = drift.max(c2_norm(&dd));
        }
        out.push((gamma, mix + drift));
    }
    out
}

/// Protected-block eigenvalues of the reduced operator for level `m`.
pub fn level_block(state: &ReductionState, m: usize) -> CMat {
    let idx = state.level_indices(m);
    CMat::from_fn(idx.len(), idx.len(), |a, b| state.h[(idx[a], idx[b])])
}

/// Largest coupling between level `m`'s block and the rest.
pub fn block_leakage(state: &ReductionState, m: usize) -> f64 {
    let idx = state.level_indices(m);
    let mut worst = 0.0f64;
    for &i in &idx {
        for j in 0..state.dim() {
            if basis_label(j, state.n_window).0 != m {
                worst = worst.max(state.h[(i, j)].norm());
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::{MatrixElementTable, TableOptions};
    use crate::fiber::{assemble, dense_spectrum, split};
    use crate::field::GaugeData;
    use crate::fourier::{Fourier1, Fourier2};
    use std::f64::consts::PI;

    fn cosine_op(eps0: f64, xi: f64, m_max: usize, nw: usize) -> (FiberOperator, MatrixElementTable) {
        let g = GaugeData::new(2.0 * PI, eps0, 0.0, Fourier1::cos(1, 1.0), Fourier2::zero()).unwrap();
        let t = MatrixElementTable::build(&g, &TableOptions::new(m_max)).unwrap();
        (assemble(xi, &g, &t, m_max, nw).unwrap(), t)
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn homological_two_by_two() {
        let mut o = CMat::zeros(2, 2);
        o[(0, 1)] = c(0.3, -0.2);
        o[(1, 0)] = c(0.3, 0.2);
        let sp = BlockSplit {
            m_protect: 0,
            n_window: 0,
            d: vec![1.0, 4.0],
            m: CMat::zeros(2, 2),
            o,
        };
        let (w, margin) = solve_homological(&sp, 2.0).unwrap();
        assert!((w[(0, 1)] - c(0.0, 1.0) * c(0.3, -0.2) / (1.0 - 4.0)).norm() < 1e-16);
        assert!(linalg::hermitian_deviation(&w) < 1e-16);
        assert!((margin - 3.0).abs() < 1e-15);
        // [D, W] = i O
        for (i, j) in [(0, 1), (1, 0)] {
            let lhs = w[(i, j)] * (sp.d[i] - sp.d[j]);
            assert!((lhs - c(0.0, 1.0) * sp.o[(i, j)]).norm() < 1e-15);
        }
        let zero = BlockSplit { o: CMat::zeros(2, 2), ..sp.clone() };
        assert_eq!(linalg::max_abs(&solve_homological(&zero, 2.0).unwrap().0), 0.0);
    }

    #[test]
    fn small_denominator_is_reported() {
        let mut o = CMat::zeros(2, 2);
        o[(0, 1)] = c(0.1, 0.0);
        o[(1, 0)] = c(0.1, 0.0);
        let sp = BlockSplit { m_protect: 0, n_window: 0, d: vec![1.0, 1.5], m: CMat::zeros(2, 2), o };
        assert!(matches!(solve_homological(&sp, 2.0), Err(Error::SmallDenominator { .. })));
    }

    #[test]
    fn rotation_preserves_spectrum() {
        let (op, _) = cosine_op(0.05, 0.2, 5, 1);
        let (w, _) = solve_homological(&split(&op, 1), op.b_c).unwrap();
        let h2 = rotate(&op.matrix, &w).unwrap();
        let a = linalg::eigh(&op.matrix).unwrap().values;
        let b = linalg::eigh(&h2).unwrap().values;
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-10);
        }
        assert_eq!(rotate(&op.matrix, &CMat::zeros(op.dim(), op.dim())).unwrap(), op.matrix);
        let k = rotation_increment(&w).unwrap();
        let u = &linalg::identity(op.dim()) + &k;
        assert!(linalg::unitarity_error(&u) <= 1e-12);
    }

    #[test]
    fn first_order_cancellation() {
        let (op, _) = cosine_op(0.02, 0.3, 6, 0);
        let sp = split(&op, 1);
        let (w, _) = solve_homological(&sp, op.b_c).unwrap();
        let h2 = rotate(&op.matrix, &w).unwrap();
        let before = linalg::max_abs(&sp.o);
        let after = linalg::max_abs(&split_matrix(&h2, 0, 1).o);
        assert!(after < 0.1 * before, "{before} -> {after}");
    }

    #[test]
    fn landau_limit_converges_immediately() {
        let (op, _) = cosine_op(0.0, 0.1, 4, 2);
        let st = reduce(&op, &ReductionOptions::default()).unwrap();
        assert_eq!(st.j, 1);
        assert_eq!(st.gamma, 0.0);
        assert_eq!(st.u, linalg::identity(op.dim()));
    }

    #[test]
    fn reduction_matches_dense_spectrum() {
        let (op, _) = cosine_op(0.01, 0.37, 8, 2);
        let st = reduce(&op, &ReductionOptions::default()).unwrap();
        assert!(st.gamma <= 1e-12);
        assert!(linalg::unitarity_error(&st.u) <= 1e-10);
        let dense = dense_spectrum(&op).unwrap();
        let attr = crate::fiber::attribute(&op, &dense);
        for m in 0..=3 {
            assert!(block_leakage(&st, m) <= 1e-12);
            let mut mine = linalg::eigh(&level_block(&st, m)).unwrap().values;
            let mut theirs: Vec<f64> = attr.iter().filter(|a| a.level == Some(m)).map(|a| a.value).collect();
            mine.sort_by(f64::total_cmp);
            theirs.sort_by(f64::total_cmp);
            assert_eq!(mine.len(), theirs.len());
            for (a, b) in mine.iter().zip(&theirs) {
                assert!((a - b).abs() <= 1e-9);
            }
        }
        // gamma decays geometrically
        let g: Vec<f64> = st.history.iter().map(|r| r.gamma).collect();
        for w in g.windows(2).take(3) {
            assert!(w[1] < 0.5 * w[0]);
        }
        assert!(st.history_csv().lines().count() == st.history.len() + 1);
    }

    #[test]
    fn first_gamma_equals_direct_table_sum() {
        let eps0 = 0.01;
        let (op, t) = cosine_op(eps0, 0.15, 8, 0);
        let opts = ReductionOptions { m_protect: 0, ..Default::default() };
        let st = reduce(&op, &opts).unwrap();
        let p = t.beta * 0.15;
        let direct: f64 = (1..=8)
            .map(|l| (0.5 * eps0 * eps0 * t.a0_sq(l, 0, p) - eps0 * t.a0(l, 0, p)).abs() * 2.0)
            .sum();
        assert!((st.history[0].gamma - direct).abs() < 1e-15);
        let (g, _) = measure_norms(&st, 0, 0.0);
        assert!(g <= 1e-12);
    }

    #[test]
    fn c2_norm_of_trig_polynomial() {
        let n = 64;
        let v: Vec<Complex64> = (0..n)
            .map(|i| Complex64::from((2.0 * PI * i as f64 / n as f64).sin()))
            .collect();
        let want = 1.0 + 2.0 * PI + 4.0 * PI * PI;
        assert!((c2_norm(&v) - want).abs() < 1e-9);
    }
}
