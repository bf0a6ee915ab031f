//! Reduced difference operators `H_{m,xi}` and spectral sweeps.
//!
//! After reduction the level-`m` block acts on sequences `g(n)` as
//!
//! ```text
//! (H_{m,xi} g)(n) = d_m(beta (xi+n)) g(n) + sum_{k != n} a_m(n-k, beta (xi+n)) g(k)
//! ```
//!
//! The fiber matrix depends on `xi` only through `p = beta xi` and is
//! 1-periodic in `p`, so `d_m` and `a_m` are read off the central site of
//! fibers sampled uniformly in `p`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::elements::{Family, MatrixElementTable};
use crate::error::{Error, Result};
use crate::fiber::{assemble, attribute, dense_spectrum};
use crate::field::GaugeData;
use crate::linalg::{self, CMat};
use crate::reduction::{level_block, reduce, ReductionOptions, ReductionState};
use crate::stats::{fit_line, LinearFit};

/// Agreement required between entries that describe the same `p`.
pub const COVARIANCE_TOL: f64 = 1e-9;
/// Below this, off-diagonal coefficients are treated as numerical noise.
pub const NOISE_FLOOR: f64 = 1e-13;

/// Reductions at `xi_i = p_i / beta` for a uniform grid `p_i = i / P`.
#[derive(Debug, Clone)]
pub struct ReducedFamily {
    pub p_grid: Vec<f64>,
    pub states: Vec<ReductionState>,
}

pub fn reduce_family(
    gauge: &GaugeData,
    table: &MatrixElementTable,
    m_max: usize,
    n_window: usize,
    options: &ReductionOptions,
    p_points: usize,
) -> Result<ReducedFamily> {
    let p_grid: Vec<f64> = (0..p_points).map(|i| i as f64 / p_points as f64).collect();
    let states = p_grid
        .par_iter()
        .map(|&p| {
            let xi = p / table.beta;
            assemble(xi, gauge, table, m_max, n_window)
                .and_then(|op| reduce(&op, options))
                .map_err(|e| e.at_fiber(xi))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ReducedFamily { p_grid, states })
}

/// Trigonometric interpolant of uniform samples on `[0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Periodic {
    coeffs: Vec<(i32, Complex64)>,
}

impl Periodic {
    pub fn from_samples(samples: &[Complex64]) -> Self {
        let n = samples.len();
        let mut spec = samples.to_vec();
        FftPlanner::<f64>::new().plan_fft_forward(n).process(&mut spec);
        let coeffs = spec
            .iter()
            .enumerate()
            .flat_map(|(i, &c)| {
                let k = if i <= n / 2 { i as i32 } else { i as i32 - n as i32 };
                let c = c / n as f64;
                if n % 2 == 0 && i == n / 2 {
                    // split the Nyquist term symmetrically
                    return vec![(k, c * 0.5), (-k, c * 0.5)];
                }
                vec![(k, c)]
            })
            .collect();
        Self { coeffs }
    }

    pub fn eval(&self, p: f64) -> Complex64 {
        self.coeffs
            .iter()
            .map(|&(k, c)| c * Complex64::from_polar(1.0, 2.0 * PI * k as f64 * p))
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct EffectiveOperator {
    pub m: usize,
    pub beta: f64,
    pub b_c: f64,
    pub eps0: f64,
    pub p_grid: Vec<f64>,
    pub d: Vec<f64>,
    /// `a_m(k, p)` samples for `k != 0`.
    pub a: BTreeMap<i32, Vec<Complex64>>,
    /// Fitted exponential decay rate of `sup_p |a_m(k, p)|` in `|k|`.
    pub decay_rate: Option<f64>,
}

/// Read `d_m`, `a_m` off the central site of a reduced family.
pub fn extract_effective(family: &ReducedFamily, m: usize) -> Result<EffectiveOperator> {
    let first = family
        .states
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty family".into()))?;
    if m > first.options.m_protect {
        return Err(Error::LevelOutsideWindow {
            level: m,
            window: first.options.m_protect,
        });
    }
    let nw = first.n_window as i32;
    let d: Vec<f64> = family
        .states
        .iter()
        .map(|s| s.h[(s.index(m, 0), s.index(m, 0))].re)
        .collect();
    let mut a = BTreeMap::new();
    for k in -nw..=nw {
        if k == 0 {
            continue;
        }
        let v: Vec<Complex64> = family
            .states
            .iter()
            .map(|s| s.h[(s.index(m, 0), s.index(m, -k))])
            .collect();
        a.insert(k, v);
    }
    let mut op = EffectiveOperator {
        m,
        beta: first.beta,
        b_c: first.b_c,
        eps0: first.eps0,
        p_grid: family.p_grid.clone(),
        d,
        a,
        decay_rate: None,
    };
    op.decay_rate = op.fit_decay().map(|f| -f.slope);
    Ok(op)
}

impl EffectiveOperator {
    pub fn landau_level(&self) -> f64 {
        self.b_c * (0.5 + self.m as f64)
    }

    /// `sup_p |a_m(k, p)|`.
    pub fn a_norm(&self, k: i32) -> f64 {
        self.a
            .get(&k)
            .map_or(0.0, |v| v.iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    pub fn is_diagonal(&self) -> bool {
        self.a.keys().all(|&k| self.a_norm(k) == 0.0)
    }

    /// Log-linear fit of `max(|a(k)|, |a(-k)|)` against `k >= 1`, over
    /// values above the noise floor.
    pub fn fit_decay(&self) -> Option<LinearFit> {
        let kmax = self.a.keys().map(|k| k.abs()).max().unwrap_or(0);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for k in 1..=kmax {
            let v = self.a_norm(k).max(self.a_norm(-k));
            if v > NOISE_FLOOR {
                xs.push(k as f64);
                ys.push(v.ln());
            }
        }
        fit_line(&xs, &ys)
    }

    /// `sum_{k != 0} sup_p |a_m(k, p)| e^{delta |k|}`, entries at or below
    /// the noise floor counted as zero.
    pub fn weighted_offdiag(&self, delta: f64) -> f64 {
        self.a
            .keys()
            .map(|&k| self.a_norm(k))
            .zip(self.a.keys())
            .filter(|(v, _)| *v > NOISE_FLOOR)
            .map(|(v, &k)| v * (delta * k.abs() as f64).exp())
            .sum()
    }

    /// `sup_p |d_m(p) - [B_c (1/2 + m) - eps0 A0[m,m](p)]|`.
    pub fn first_order_deviation(&self, table: &MatrixElementTable) -> f64 {
        self.p_grid
            .iter()
            .zip(&self.d)
            .map(|(&p, &d)| (d - (self.landau_level() - self.eps0 * table.a0(self.m, self.m, p))).abs())
            .fold(0.0, f64::max)
    }

    /// `H_{m,xi}` on sites `|n| <= n_window`, coefficients interpolated.
    pub fn matrix(&self, xi: f64, n_window: usize) -> CMat {
        let d = Periodic::from_samples(&self.d.iter().map(|&v| Complex64::from(v)).collect::<Vec<_>>());
        let a: BTreeMap<i32, Periodic> = self
            .a
            .iter()
            .filter(|(&k, _)| self.a_norm(k) > 0.0)
            .map(|(&k, v)| (k, Periodic::from_samples(v)))
            .collect();
        let nw = n_window as i32;
        let dim = 2 * n_window + 1;
        let mut h = CMat::zeros(dim, dim);
        for n in -nw..=nw {
            let p = self.beta * (xi + n as f64);
            let i = (n + nw) as usize;
            h[(i, i)] = Complex64::from(d.eval(p).re);
            for (&k, f) in &a {
                let col = n - k;
                if col.abs() <= nw {
                    h[(i, (col + nw) as usize)] = f.eval(p);
                }
            }
        }
        linalg::hermitize(&mut h);
        h
    }
}

/// Compare the central-site reading with site `n = 1` of the fiber at
/// `xi - 1` (same `p`) for `samples` evenly spaced family members.
pub fn check_covariance(
    family: &ReducedFamily,
    gauge: &GaugeData,
    table: &MatrixElementTable,
    m: usize,
    samples: usize,
) -> Result<f64> {
    let first = &family.states[0];
    let (m_max, nw, opts) = (first.m_max, first.n_window, first.options);
    let stride = (family.states.len() / samples.max(1)).max(1);
    let picks: Vec<usize> = (0..family.states.len()).step_by(stride).take(samples).collect();
    let devs = picks
        .par_iter()
        .map(|&i| {
            let s = &family.states[i];
            let op = assemble(s.xi - 1.0, gauge, table, m_max, nw)?;
            let t = reduce(&op, &opts)?;
            let mut dev = (t.h[(t.index(m, 1), t.index(m, 1))] - s.h[(s.index(m, 0), s.index(m, 0))]).norm();
            for k in 1..(nw as i32) {
                for kk in [k, -k] {
                    if (1 - kk).abs() > nw as i32 {
                        continue;
                    }
                    let a = t.h[(t.index(m, 1), t.index(m, 1 - kk))];
                    let b = s.h[(s.index(m, 0), s.index(m, -kk))];
                    dev = dev.max((a - b).norm());
                }
            }
            Ok((family.p_grid[i], dev))
        })
        .collect::<Result<Vec<_>>>()?;
    let (p, worst) = devs
        .into_iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((0.0, 0.0));
    if worst > COVARIANCE_TOL {
        return Err(Error::CovarianceViolation { p, deviation: worst });
    }
    Ok(worst)
}

/// How eigenvalues are obtained per fiber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepMethod {
    /// Dense spectrum of the assembled fiber with eigenvector attribution.
    Dense,
    /// Spectra of the protected blocks after reduction.
    Reduced(ReductionOptions),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub m_max: usize,
    pub n_window: usize,
    pub xi_points: usize,
    /// Highest level reported.
    pub top_level: usize,
    /// Sites with `|n| > N - edge_margin` are dropped as truncation artifacts.
    pub edge_margin: usize,
    pub method: SweepMethod,
    /// Agreement required between eigenvalues attributed to the same `p`.
    pub lambda_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub xi: f64,
    pub level: usize,
    pub site: i32,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct SpectrumSweep {
    pub b_c: f64,
    pub beta: f64,
    pub eps0: f64,
    pub eps1: f64,
    pub xi_grid: Vec<f64>,
    pub points: Vec<SweepPoint>,
    /// Per level, merged band intervals.
    pub bands: BTreeMap<usize, Vec<(f64, f64)>>,
    /// `(level, xi)` where two eigenvalues claimed the same curve.
    pub crossings: Vec<(usize, f64)>,
}

pub fn sweep(gauge: &GaugeData, table: &MatrixElementTable, cfg: &SweepConfig) -> Result<SpectrumSweep> {
    if cfg.xi_points == 0 {
        return Err(Error::InvalidArgument("empty xi grid".into()));
    }
    if let SweepMethod::Reduced(o) = cfg.method {
        if cfg.top_level > o.m_protect {
            return Err(Error::LevelOutsideWindow {
                level: cfg.top_level,
                window: o.m_protect,
            });
        }
    }
    if cfg.top_level > cfg.m_max {
        return Err(Error::LevelOutsideWindow {
            level: cfg.top_level,
            window: cfg.m_max,
        });
    }
    let xi_grid: Vec<f64> = (0..cfg.xi_points).map(|i| i as f64 / cfg.xi_points as f64).collect();
    let edge = cfg.n_window.saturating_sub(cfg.edge_margin) as i32;
    let per_xi = xi_grid
        .par_iter()
        .map(|&xi| -> Result<Vec<SweepPoint>> {
            sweep_fiber(xi, gauge, table, cfg, edge).map_err(|e| e.at_fiber(xi))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut points = Vec::new();
    let mut crossings = Vec::new();
    let mut curves: BTreeMap<(usize, i32), (f64, f64)> = BTreeMap::new();
    for (pts, &xi) in per_xi.into_iter().zip(&xi_grid) {
        let mut seen = BTreeMap::new();
        for p in &pts {
            if seen.insert((p.level, p.site), ()).is_some() && !crossings.contains(&(p.level, xi)) {
                crossings.push((p.level, xi));
            }
            let e = curves.entry((p.level, p.site)).or_insert((p.value, p.value));
            e.0 = e.0.min(p.value);
            e.1 = e.1.max(p.value);
        }
        points.extend(pts);
    }
    let mut bands: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
    for ((level, _), iv) in curves {
        bands.entry(level).or_default().push(iv);
    }
    for list in bands.values_mut() {
        *list = merge_intervals(std::mem::take(list));
    }
    Ok(SpectrumSweep {
        b_c: gauge.b_c,
        beta: table.beta,
        eps0: gauge.eps0,
        eps1: gauge.eps1,
        xi_grid,
        points,
        bands,
        crossings,
    })
}

fn sweep_fiber(
    xi: f64,
    gauge: &GaugeData,
    table: &MatrixElementTable,
    cfg: &SweepConfig,
    edge: i32,
) -> Result<Vec<SweepPoint>> {
    let op = assemble(xi, gauge, table, cfg.m_max, cfg.n_window)?;
    let mut pts = Vec::new();
    match cfg.method {
        SweepMethod::Dense => {
            let eig = dense_spectrum(&op)?;
            for a in attribute(&op, &eig) {
                if let Some(level) = a.level {
                    if level <= cfg.top_level && a.site.abs() <= edge {
                        pts.push(SweepPoint { xi, level, site: a.site, value: a.value });
                    }
                }
            }
        }
        SweepMethod::Reduced(opts) => {
            let st = reduce(&op, &opts)?;
            for level in 0..=cfg.top_level {
                let eig = linalg::eigh(&level_block(&st, level))?;
                for c in 0..eig.values.len() {
                    let mut best = (0usize, -1.0);
                    for r in 0..eig.values.len() {
                        let w = eig.vectors[(r, c)].norm_sqr();
                        if w > best.1 {
                            best = (r, w);
                        }
                    }
                    let site = best.0 as i32 - cfg.n_window as i32;
                    if site.abs() <= edge {
                        pts.push(SweepPoint { xi, level, site, value: eig.values[c] });
                    }
                }
            }
        }
    }
    Ok(pts)
}

/// Sort and merge overlapping closed intervals.
pub fn merge_intervals(mut v: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(v.len());
    for (lo, hi) in v {
        match out.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    out
}

impl SpectrumSweep {
    pub fn check_crossings(&self) -> Result<()> {
        match self.crossings.first() {
            Some(&(level, xi)) => Err(Error::BandCrossing { level, xi }),
            None => Ok(()),
        }
    }

    /// `lambda_m` as sorted `(p, value)` pairs, `p = beta (xi + n) mod 1`.
    /// Samples landing on the same `p` must agree to `tol`.
    pub fn lambda(&self, level: usize, tol: f64) -> Result<Vec<(f64, f64)>> {
        let mut pairs: Vec<(f64, f64)> = self
            .points
            .iter()
            .filter(|p| p.level == level)
            .map(|p| ((self.beta * (p.xi + p.site as f64)).rem_euclid(1.0), p.value))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let same = |a: f64, b: f64| {
            let d = (a - b).abs();
            d.min(1.0 - d) < 1e-9
        };
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
        let mut group: Vec<(f64, f64)> = Vec::new();
        let flush = |group: &mut Vec<(f64, f64)>, out: &mut Vec<(f64, f64)>| -> Result<()> {
            if group.is_empty() {
                return Ok(());
            }
            let lo = group.iter().map(|g| g.1).fold(f64::INFINITY, f64::min);
            let hi = group.iter().map(|g| g.1).fold(f64::NEG_INFINITY, f64::max);
            if hi - lo > tol {
                return Err(Error::BinConflict { p: group[0].0, spread: hi - lo, tol });
            }
            out.push((group[0].0, group[0].1));
            group.clear();
            Ok(())
        };
        for pr in pairs {
            if let Some(g) = group.first() {
                if !same(g.0, pr.0) {
                    flush(&mut group, &mut out)?;
                }
            }
            group.push(pr);
        }
        flush(&mut group, &mut out)?;
        // wrap-around: a group straddling p = 0 / 1
        if out.len() > 1 && same(out[0].0, out[out.len() - 1].0) {
            let spread = (out[0].1 - out[out.len() - 1].1).abs();
            if spread > tol {
                return Err(Error::BinConflict { p: 0.0, spread, tol });
            }
            out.pop();
        }
        Ok(out)
    }

    pub fn points_csv(&self) -> String {
        let mut s = String::from("xi,level,band_index,eigenvalue\n");
        for p in &self.points {
            writeln!(s, "{:.16e},{},{},{:.16e}", p.xi, p.level, p.site, p.value).unwrap();
        }
        s
    }

    pub fn bands_csv(&self) -> String {
        let mut s = String::from("level,band_lo,band_hi\n");
        for (level, list) in &self.bands {
            for (lo, hi) in list {
                writeln!(s, "{level},{lo:.16e},{hi:.16e}").unwrap();
            }
        }
        s
    }

    pub fn lambda_csv(&self, tol: f64) -> Result<String> {
        let mut s = String::from("level,p,lambda_m\n");
        for &level in self.bands.keys() {
            for (p, v) in self.lambda(level, tol)? {
                writeln!(s, "{level},{p:.16e},{v:.16e}").unwrap();
            }
        }
        Ok(s)
    }
}

/// Lebesgue measure of the merged bands of `level`.
pub fn band_measure(sweep: &SpectrumSweep, level: usize) -> f64 {
    sweep
        .bands
        .get(&level)
        .map_or(0.0, |v| v.iter().map(|(a, b)| b - a).sum())
}

/// Linear fit of band measure against `eps0`.
pub fn fit_band_measure(eps0: &[f64], measure: &[f64]) -> Option<LinearFit> {
    fit_line(eps0, measure)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MorseReport {
    pub level: usize,
    pub critical_points: usize,
    pub passes: bool,
}

/// Count sign changes of `d/dp A0[m,m]` around the circle; a Morse function
/// with two critical points has exactly two.
pub fn morse_check(table: &MatrixElementTable, m: usize) -> MorseReport {
    let modes = table.modes(Family::A0, 0, m, m);
    let deriv = |p: f64| -> f64 {
        modes
            .iter()
            .map(|&(j, c)| c * Complex64::new(0.0, 2.0 * PI * j as f64) * Complex64::from_polar(1.0, 2.0 * PI * j as f64 * p))
            .sum::<Complex64>()
            .re
    };
    let n = table.p_points;
    let scale = modes.iter().map(|e| e.1.norm()).sum::<f64>().max(f64::MIN_POSITIVE);
    let signs: Vec<i8> = (0..n)
        .map(|i| {
            let v = deriv(i as f64 / n as f64);
            if v.abs() <= 1e-12 * scale {
                0
            } else if v > 0.0 {
                1
            } else {
                -1
            }
        })
        .filter(|&s| s != 0)
        .collect();
    let changes = if signs.is_empty() {
        0
    } else {
        (0..signs.len())
            .filter(|&i| signs[i] != signs[(i + 1) % signs.len()])
            .count()
    };
    MorseReport {
        level: m,
        critical_points: changes,
        passes: changes == 2,
    }
}

/// `sup_p |lambda(p) - [B_c (1/2 + m) - eps0 A0[m,m](p)]|` over sampled pairs.
pub fn lambda_deviation(lambda: &[(f64, f64)], table: &MatrixElementTable, m: usize, eps0: f64) -> f64 {
    let level = table.b_c * (0.5 + m as f64);
    lambda
        .iter()
        .map(|&(p, v)| (v - (level - eps0 * table.a0(m, m, p))).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::TableOptions;
    use crate::fourier::{Fourier1, Fourier2};

    fn cosine(eps0: f64) -> (GaugeData, MatrixElementTable) {
        let g = GaugeData::new(2.0 * PI, eps0, 0.0, Fourier1::cos(1, 1.0), Fourier2::zero()).unwrap();
        let t = MatrixElementTable::build(&g, &TableOptions::new(8)).unwrap();
        (g, t)
    }

    #[test]
    fn merge() {
        let v = merge_intervals(vec![(3.0, 4.0), (0.0, 1.0), (0.5, 2.0), (4.0, 4.5)]);
        assert_eq!(v, vec![(0.0, 2.0), (3.0, 4.5)]);
    }

    #[test]
    fn periodic_interpolation_is_exact_for_trig_polynomials() {
        let n = 16;
        let f = |p: f64| Complex64::new((2.0 * PI * p).cos(), 0.3 * (6.0 * PI * p).sin());
        let s: Vec<Complex64> = (0..n).map(|i| f(i as f64 / n as f64)).collect();
        let per = Periodic::from_samples(&s);
        for p in [0.013, 0.5, 0.77] {
            assert!((per.eval(p) - f(p)).norm() < 1e-13);
        }
    }

    #[test]
    fn landau_sweep_has_point_bands() {
        let (g, t) = cosine(0.0);
        let cfg = SweepConfig {
            m_max: 4,
            n_window: 2,
            xi_points: 8,
            top_level: 2,
            edge_margin: 0,
            method: SweepMethod::Dense,
            lambda_tol: 1e-9,
        };
        let sw = sweep(&g, &t, &cfg).unwrap();
        for m in 0..=2 {
            assert_eq!(band_measure(&sw, m), 0.0);
            assert_eq!(sw.bands[&m], vec![(2.0 * PI * (0.5 + m as f64), 2.0 * PI * (0.5 + m as f64))]);
        }
    }

    #[test]
    fn diagonal_family_matches_d_m() {
        let (g, t) = cosine(0.01);
        let fam = reduce_family(&g, &t, 8, 2, &ReductionOptions::default(), 16).unwrap();
        let eff = extract_effective(&fam, 0).unwrap();
        assert!(eff.is_diagonal());
        assert!(eff.decay_rate.is_none());
        // multiplication-operator structure of the reduced level block
        let st = &fam.states[5];
        let blk = level_block(st, 0);
        let vals = linalg::eigh(&blk).unwrap().values;
        let mut want: Vec<f64> = (-2..=2)
            .map(|n| Periodic::from_samples(&eff.d.iter().map(|&v| v.into()).collect::<Vec<_>>()).eval(t.beta * (st.xi + n as f64)).re)
            .collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in vals.iter().zip(&want) {
            assert!((a - b).abs() <= 1e-10, "{a} {b}");
        }
        assert!(check_covariance(&fam, &g, &t, 0, 4).unwrap() <= 1e-12);
        let dev = eff.first_order_deviation(&t);
        assert!(dev < 0.01 * 0.01 * 5.0 && dev > 0.0);
    }

    #[test]
    fn morse_for_cosine_levels() {
        let (_, t) = cosine(0.01);
        for m in 0..=3 {
            assert!(morse_check(&t, m).passes, "{m}");
        }
        let g = GaugeData::landau(2.0 * PI).unwrap();
        let t0 = MatrixElementTable::build(&g, &TableOptions::new(2)).unwrap();
        assert!(!morse_check(&t0, 0).passes);
    }

    #[test]
    fn lambda_conflicts_surface() {
        let sw = SpectrumSweep {
            b_c: 2.0 * PI,
            beta: 1.0,
            eps0: 0.0,
            eps1: 0.0,
            xi_grid: vec![0.0],
            points: vec![
                SweepPoint { xi: 0.25, level: 0, site: 0, value: 1.0 },
                SweepPoint { xi: 0.25, level: 0, site: 1, value: 1.0 + 1e-3 },
            ],
            bands: BTreeMap::new(),
            crossings: vec![],
        };
        assert!(matches!(sw.lambda(0, 1e-8), Err(Error::BinConflict { .. })));
        assert_eq!(sw.lambda(0, 1e-2).unwrap().len(), 1);
    }
}
