//! Matrix elements of the gauge potentials between (displaced) Landau states.
//!
//! All four families are periodic functions of `p = beta (xi + n)`. With
//! `r = sqrt(B_c)`, `u = r y` and `s_k = 2 pi k / r`:
//!
//! ```text
//! tA0[l,m](p)    = int (A0)^2(u/r + p) Om_l(u) Om_m(u) du
//! A0[l,m](p)     = r int A0(u/r + p) u Om_l(u) Om_m(u) du
//! tA1[k,l,m](p)  = int S_k(u/r + p) Om_l(u + s_k) Om_m(u) du
//! hA1[k,l,m](p)  = -i r int F_k(u/r + p) [Om_l'(u + s_k) Om_m(u) - Om_l(u + s_k) Om_m'(u)] du
//! ```
//!
//! where `F_k(y)` is the `k`-th x-Fourier coefficient of `A1` and `S_k` that
//! of `(A1)^2`. Derivatives are expanded with
//! `Om_l' = sqrt(l/2) Om_{l-1} - sqrt((l+1)/2) Om_{l+1}`.
//!
//! Each y-mode `j` of the potential contributes exactly one p-mode
//! `exp(2 pi i j p)`, so tables are stored as finite Fourier series in `p`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field::GaugeData;
use crate::fourier::Fourier1;
use crate::hermite::{default_node_count, gauss_hermite_rule, omega_into, GaussHermite};

pub const DEFAULT_P_POINTS: usize = 256;
pub const DEFAULT_TOL_QUAD: f64 = 1e-10;

type Modes = Vec<(i32, Complex64)>;

fn cis(t: f64) -> Complex64 {
    Complex64::from_polar(1.0, t)
}

fn eval_modes(modes: &[(i32, Complex64)], p: f64) -> Complex64 {
    modes
        .iter()
        .map(|&(j, c)| c * cis(2.0 * PI * j as f64 * p))
        .sum()
}

/// The four coefficient families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    A0Sq,
    A0,
    A1Sq,
    A1Hat,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::A0Sq, Family::A0, Family::A1Sq, Family::A1Hat];

    pub fn name(self) -> &'static str {
        match self {
            Family::A0Sq => "a0_sq",
            Family::A0 => "a0",
            Family::A1Sq => "a1_sq",
            Family::A1Hat => "a1_hat",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == s)
    }

    fn has_k(self) -> bool {
        matches!(self, Family::A1Sq | Family::A1Hat)
    }
}

/// A pair of Gauss-Hermite rules, the second with twice the nodes, used to
/// certify every integral.
#[derive(Debug, Clone)]
pub struct Quadrature {
    pub coarse: GaussHermite,
    pub fine: GaussHermite,
    pub tol: f64,
}

impl Quadrature {
    pub fn new(n_nodes: usize, tol: f64) -> Result<Self> {
        Ok(Self {
            coarse: gauss_hermite_rule(n_nodes)?,
            fine: gauss_hermite_rule(2 * n_nodes)?,
            tol,
        })
    }

    /// Default rule for levels up to `l_max` (one extra order is needed by
    /// the derivative expansion).
    pub fn for_levels(l_max: usize) -> Result<Self> {
        Self::new(default_node_count(l_max + 1), DEFAULT_TOL_QUAD)
    }

    fn certify(
        &self,
        what: impl FnOnce() -> String,
        f: impl Fn(&GaussHermite) -> Complex64,
    ) -> Result<Complex64> {
        let a = f(&self.coarse);
        let b = f(&self.fine);
        let change = (a - b).norm();
        if change > self.tol {
            return Err(Error::QuadratureUnderResolved {
                what: what(),
                change,
                tol: self.tol,
            });
        }
        Ok(b)
    }
}

/// `int g(v) dv` where `g` evaluates `Om_a(v + s/2) Om_b(v - s/2)` style
/// integrands; the product carries the Gaussian `exp(-v^2 - s^2/4)`.
fn shifted_integral<F: Fn(f64, &[f64], &[f64]) -> Complex64>(
    rule: &GaussHermite,
    orders: usize,
    s: f64,
    g: F,
) -> Complex64 {
    let mut hi = vec![0.0; orders + 1];
    let mut lo = vec![0.0; orders + 1];
    let mut acc = Complex64::new(0.0, 0.0);
    for (&v, &w) in rule.nodes.iter().zip(&rule.scaled_weights) {
        omega_into(v + 0.5 * s, &mut hi);
        omega_into(v - 0.5 * s, &mut lo);
        acc += g(v - 0.5 * s, &hi, &lo) * w;
    }
    acc
}

fn deriv_combination(l: usize, m: usize, g: impl Fn(usize, usize) -> f64) -> f64 {
    let mut out = -((l + 1) as f64 / 2.0).sqrt() * g(l + 1, m) + ((m + 1) as f64 / 2.0).sqrt() * g(l, m + 1);
    if l > 0 {
        out += (l as f64 / 2.0).sqrt() * g(l - 1, m);
    }
    if m > 0 {
        out -= (m as f64 / 2.0).sqrt() * g(l, m - 1);
    }
    out
}

/// `tA0[l,m](p)` by direct quadrature.
pub fn a0_sq_element(l: usize, m: usize, p: f64, gauge: &GaugeData, quad: &Quadrature) -> Result<f64> {
    let r = gauge.b_c.sqrt();
    let v = quad.certify(
        || format!("a0_sq[{l},{m}]({p})"),
        |rule| {
            shifted_integral(rule, l.max(m), 0.0, |u, om, _| {
                let a = gauge.a0.eval_re(u / r + p);
                (a * a * om[l] * om[m]).into()
            })
        },
    )?;
    Ok(v.re)
}

/// `A0[l,m](p)` by direct quadrature.
pub fn a0_element(l: usize, m: usize, p: f64, gauge: &GaugeData, quad: &Quadrature) -> Result<f64> {
    let r = gauge.b_c.sqrt();
    let v = quad.certify(
        || format!("a0[{l},{m}]({p})"),
        |rule| {
            shifted_integral(rule, l.max(m), 0.0, |u, om, _| {
                (r * gauge.a0.eval_re(u / r + p) * u * om[l] * om[m]).into()
            })
        },
    )?;
    Ok(v.re)
}

/// `tA1[k,l,m](p)` by direct quadrature.
pub fn a1_sq_element(
    k: i32,
    l: usize,
    m: usize,
    p: f64,
    gauge: &GaugeData,
    quad: &Quadrature,
) -> Result<Complex64> {
    let r = gauge.b_c.sqrt();
    let s = 2.0 * PI * k as f64 / r;
    let sk = gauge.a1.mul(&gauge.a1).x_mode(k);
    quad.certify(
        || format!("a1_sq[{k},{l},{m}]({p})"),
        |rule| {
            shifted_integral(rule, l.max(m), s, |u, hi, lo| {
                sk.eval(u / r + p) * (hi[l] * lo[m])
            })
        },
    )
}

/// `hA1[k,l,m](p)` by direct quadrature.
pub fn a1_hat_element(
    k: i32,
    l: usize,
    m: usize,
    p: f64,
    gauge: &GaugeData,
    quad: &Quadrature,
) -> Result<Complex64> {
    let r = gauge.b_c.sqrt();
    let s = 2.0 * PI * k as f64 / r;
    let fk = gauge.a1.x_mode(k);
    let v = quad.certify(
        || format!("a1_hat[{k},{l},{m}]({p})"),
        |rule| {
            shifted_integral(rule, l.max(m) + 1, s, |u, hi, lo| {
                fk.eval(u / r + p) * deriv_combination(l, m, |a, b| hi[a] * lo[b])
            })
        },
    )?;
    Ok(Complex64::new(0.0, -r) * v)
}

/// Construction parameters for [`MatrixElementTable`].
#[derive(Debug, Clone, PartialEq)]
pub struct TableOptions {
    pub l_max: usize,
    /// Largest x-mode kept; defaults to the full x-bandwidth of `(A1)^2`.
    pub k_max: Option<usize>,
    pub n_nodes: Option<usize>,
    pub p_points: usize,
    pub tol_quad: f64,
}

impl TableOptions {
    pub fn new(l_max: usize) -> Self {
        Self {
            l_max,
            k_max: None,
            n_nodes: None,
            p_points: DEFAULT_P_POINTS,
            tol_quad: DEFAULT_TOL_QUAD,
        }
    }
}

/// Tabulated `tA0`, `A0`, `tA1`, `hA1` for levels `0..=l_max` and x-modes
/// `|k| <= k_max`, stored as exact Fourier series in `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixElementTable {
    pub b_c: f64,
    pub beta: f64,
    pub l_max: usize,
    pub k_max: usize,
    pub p_points: usize,
    pub n_nodes: usize,
    /// Largest sup-norm bound of x-modes beyond `k_max` that were dropped.
    pub dropped_tail: f64,
    pub key: String,
    a0_sq: Vec<Modes>,
    a0: Vec<Modes>,
    a1_sq: Vec<Modes>,
    a1_hat: Vec<Modes>,
}

struct Sources {
    a0_sq: Fourier1,
    a0: Fourier1,
    a1_sq: Vec<Fourier1>,
    a1_hat: Vec<Fourier1>,
}

fn sources(gauge: &GaugeData, k_max: usize) -> Sources {
    let sq = gauge.a1.mul(&gauge.a1);
    let k = k_max as i32;
    Sources {
        a0_sq: gauge.a0.mul(&gauge.a0),
        a0: gauge.a0.clone(),
        a1_sq: (-k..=k).map(|kk| sq.x_mode(kk)).collect(),
        a1_hat: (-k..=k).map(|kk| gauge.a1.x_mode(kk)).collect(),
    }
}

/// Modes of one shift `s` for every (l, m) pair.
fn shifted_family(
    rule: &GaussHermite,
    r: f64,
    s: f64,
    l_max: usize,
    src: &Fourier1,
    derivative: bool,
    times_u: bool,
) -> Vec<Modes> {
    let n = l_max + 1;
    let orders = l_max + 1;
    let mut out = vec![Vec::new(); n * n];
    if src.is_zero() {
        return out;
    }
    let nodes = rule.len();
    let mut hi = vec![0.0; nodes * (orders + 1)];
    let mut lo = vec![0.0; nodes * (orders + 1)];
    for (i, &v) in rule.nodes.iter().enumerate() {
        omega_into(v + 0.5 * s, &mut hi[i * (orders + 1)..(i + 1) * (orders + 1)]);
        omega_into(v - 0.5 * s, &mut lo[i * (orders + 1)..(i + 1) * (orders + 1)]);
    }
    let mut g = vec![Complex64::new(0.0, 0.0); (orders + 1) * (orders + 1)];
    for (j, cj) in src.modes() {
        g.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for (i, (&v, &w)) in rule.nodes.iter().zip(&rule.scaled_weights).enumerate() {
            let u = v - 0.5 * s;
            let mut ph = cis(2.0 * PI * j as f64 * u / r) * w;
            if times_u {
                ph *= u;
            }
            let h = &hi[i * (orders + 1)..(i + 1) * (orders + 1)];
            let lw = &lo[i * (orders + 1)..(i + 1) * (orders + 1)];
            for a in 0..=orders {
                let pa = ph * h[a];
                for b in 0..=orders {
                    g[a * (orders + 1) + b] += pa * lw[b];
                }
            }
        }
        for l in 0..n {
            for m in 0..n {
                let val = if derivative {
                    let re = deriv_combination(l, m, |a, b| g[a * (orders + 1) + b].re);
                    let im = deriv_combination(l, m, |a, b| g[a * (orders + 1) + b].im);
                    Complex64::new(0.0, -r) * Complex64::new(re, im)
                } else if times_u {
                    g[l * (orders + 1) + m] * r
                } else {
                    g[l * (orders + 1) + m]
                };
                out[l * n + m].push((j, cj * val));
            }
        }
    }
    out
}

struct Built {
    a0_sq: Vec<Modes>,
    a0: Vec<Modes>,
    a1_sq: Vec<Modes>,
    a1_hat: Vec<Modes>,
}

fn build_all(rule: &GaussHermite, b_c: f64, l_max: usize, k_max: usize, src: &Sources) -> Built {
    let r = b_c.sqrt();
    let k = k_max as i32;
    let shifted: Vec<(Vec<Modes>, Vec<Modes>)> = (-k..=k)
        .into_par_iter()
        .map(|kk| {
            let idx = (kk + k) as usize;
            let s = 2.0 * PI * kk as f64 / r;
            (
                shifted_family(rule, r, s, l_max, &src.a1_sq[idx], false, false),
                shifted_family(rule, r, s, l_max, &src.a1_hat[idx], true, false),
            )
        })
        .collect();
    let mut a1_sq = Vec::new();
    let mut a1_hat = Vec::new();
    for (sq, hat) in shifted {
        a1_sq.extend(sq);
        a1_hat.extend(hat);
    }
    Built {
        a0_sq: shifted_family(rule, r, 0.0, l_max, &src.a0_sq, false, false),
        a0: shifted_family(rule, r, 0.0, l_max, &src.a0, false, true),
        a1_sq,
        a1_hat,
    }
}

fn clean(modes: &mut [Modes]) {
    for list in modes.iter_mut() {
        list.retain(|(_, c)| *c != Complex64::new(0.0, 0.0));
    }
}

fn max_mode_change(a: &[Modes], b: &[Modes]) -> (f64, usize) {
    let mut worst = (0.0, 0);
    for (idx, (la, lb)) in a.iter().zip(b).enumerate() {
        for (&(ja, ca), &(jb, cb)) in la.iter().zip(lb) {
            debug_assert_eq!(ja, jb);
            let d = (ca - cb).norm();
            if d > worst.0 {
                worst = (d, idx);
            }
        }
    }
    worst
}

/// Content hash of everything a table depends on.
pub fn cache_key(gauge: &GaugeData, opts: &TableOptions, k_max: usize, n_nodes: usize) -> String {
    let mut h = Sha256::new();
    h.update(b"landau-elements-v1");
    h.update(gauge.b_c.to_bits().to_le_bytes());
    for (k, c) in gauge.a0.modes() {
        h.update(k.to_le_bytes());
        h.update(c.re.to_bits().to_le_bytes());
        h.update(c.im.to_bits().to_le_bytes());
    }
    h.update(b"|");
    for ((j, k), c) in gauge.a1.modes() {
        h.update(j.to_le_bytes());
        h.update(k.to_le_bytes());
        h.update(c.re.to_bits().to_le_bytes());
        h.update(c.im.to_bits().to_le_bytes());
    }
    for v in [opts.l_max, k_max, opts.p_points, n_nodes] {
        h.update((v as u64).to_le_bytes());
    }
    h.update(opts.tol_quad.to_bits().to_le_bytes());
    hex::encode(&h.finalize()[..12])
}

impl MatrixElementTable {
    pub fn build(gauge: &GaugeData, opts: &TableOptions) -> Result<Self> {
        let l_max = opts.l_max;
        let natural_k = gauge.a1.x_bandwidth() as usize * 2;
        let k_max = opts.k_max.unwrap_or(natural_k);
        let n_nodes = opts.n_nodes.unwrap_or_else(|| default_node_count(l_max + 1));
        if opts.p_points < 4 {
            return Err(Error::InvalidArgument("p-grid needs at least 4 points".into()));
        }
        let quad = Quadrature::new(n_nodes, opts.tol_quad)?;
        let src = sources(gauge, k_max);

        let sq = gauge.a1.mul(&gauge.a1);
        let dropped_tail = sq
            .modes()
            .chain(gauge.a1.modes())
            .filter(|((j, _), _)| j.unsigned_abs() as usize > k_max)
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max);

        let coarse = build_all(&quad.coarse, gauge.b_c, l_max, k_max, &src);
        let mut fine = build_all(&quad.fine, gauge.b_c, l_max, k_max, &src);
        for (fam, a, b) in [
            (Family::A0Sq, &coarse.a0_sq, &fine.a0_sq),
            (Family::A0, &coarse.a0, &fine.a0),
            (Family::A1Sq, &coarse.a1_sq, &fine.a1_sq),
            (Family::A1Hat, &coarse.a1_hat, &fine.a1_hat),
        ] {
            let (change, idx) = max_mode_change(a, b);
            if change > opts.tol_quad {
                let n = l_max + 1;
                let what = if fam.has_k() {
                    let k = (idx / (n * n)) as i32 - k_max as i32;
                    format!("{}[k={k}, l={}, m={}]", fam.name(), (idx % (n * n)) / n, idx % n)
                } else {
                    format!("{}[l={}, m={}]", fam.name(), idx / n, idx % n)
                };
                return Err(Error::QuadratureUnderResolved {
                    what,
                    change,
                    tol: opts.tol_quad,
                });
            }
        }
        clean(&mut fine.a0_sq);
        clean(&mut fine.a0);
        clean(&mut fine.a1_sq);
        clean(&mut fine.a1_hat);

        Ok(Self {
            b_c: gauge.b_c,
            beta: 2.0 * PI / gauge.b_c,
            l_max,
            k_max,
            p_points: opts.p_points,
            n_nodes,
            dropped_tail,
            key: cache_key(gauge, opts, k_max, n_nodes),
            a0_sq: fine.a0_sq,
            a0: fine.a0,
            a1_sq: fine.a1_sq,
            a1_hat: fine.a1_hat,
        })
    }

    fn index(&self, fam: Family, k: i32, l: usize, m: usize) -> Option<usize> {
        let n = self.l_max + 1;
        assert!(l < n && m < n, "level ({l}, {m}) outside table (l_max = {})", self.l_max);
        if fam.has_k() {
            if k.unsigned_abs() as usize > self.k_max {
                return None;
            }
            Some((k + self.k_max as i32) as usize * n * n + l * n + m)
        } else if k == 0 {
            Some(l * n + m)
        } else {
            None
        }
    }

    fn store(&self, fam: Family) -> &[Modes] {
        match fam {
            Family::A0Sq => &self.a0_sq,
            Family::A0 => &self.a0,
            Family::A1Sq => &self.a1_sq,
            Family::A1Hat => &self.a1_hat,
        }
    }

    /// p-Fourier modes of one entry (empty when identically zero).
    pub fn modes(&self, fam: Family, k: i32, l: usize, m: usize) -> &[(i32, Complex64)] {
        match self.index(fam, k, l, m) {
            Some(i) => &self.store(fam)[i],
            None => &[],
        }
    }

    pub fn eval(&self, fam: Family, k: i32, l: usize, m: usize, p: f64) -> Complex64 {
        eval_modes(self.modes(fam, k, l, m), p)
    }

    pub fn a0_sq(&self, l: usize, m: usize, p: f64) -> f64 {
        self.eval(Family::A0Sq, 0, l, m, p).re
    }

    pub fn a0(&self, l: usize, m: usize, p: f64) -> f64 {
        self.eval(Family::A0, 0, l, m, p).re
    }

    pub fn a1_sq(&self, k: i32, l: usize, m: usize, p: f64) -> Complex64 {
        self.eval(Family::A1Sq, k, l, m, p)
    }

    pub fn a1_hat(&self, k: i32, l: usize, m: usize, p: f64) -> Complex64 {
        self.eval(Family::A1Hat, k, l, m, p)
    }

    /// Whether any x-coupling (`k != 0`) entry is nonzero.
    pub fn has_x_coupling(&self) -> bool {
        let n = self.l_max + 1;
        let k0 = self.k_max * n * n;
        [&self.a1_sq, &self.a1_hat].iter().any(|s| {
            s.iter()
                .enumerate()
                .any(|(i, list)| !(k0..k0 + n * n).contains(&i) && !list.is_empty())
        })
    }

    pub fn p_grid(&self) -> Vec<f64> {
        (0..self.p_points)
            .map(|i| i as f64 / self.p_points as f64)
            .collect()
    }

    /// Samples of one entry on the p-grid.
    pub fn samples(&self, fam: Family, k: i32, l: usize, m: usize) -> Vec<Complex64> {
        let modes = self.modes(fam, k, l, m);
        self.p_grid().into_iter().map(|p| eval_modes(modes, p)).collect()
    }

    /// `(k, max_{l,m,p} |entry|)` for `k = 0..=k_max`, maximum over the p-grid.
    pub fn decay_profile(&self, fam: Family) -> Vec<(i32, f64)> {
        let n = self.l_max + 1;
        let ks: Vec<i32> = if fam.has_k() { (0..=self.k_max as i32).collect() } else { vec![0] };
        ks.into_iter()
            .map(|k| {
                let mut worst = 0.0f64;
                for l in 0..n {
                    for m in 0..n {
                        for z in self.samples(fam, k, l, m) {
                            worst = worst.max(z.norm());
                        }
                    }
                }
                (k, worst)
            })
            .collect()
    }

    /// Write the table as CSV: `family,k,l,m,j,re,im`, one row per p-mode.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        let mut head = String::new();
        writeln!(head, "# landau matrix-element table v{}", env!("CARGO_PKG_VERSION")).unwrap();
        writeln!(head, "# key {}", self.key).unwrap();
        writeln!(
            head,
            "# b_c {:.16e} l_max {} k_max {} p_points {} n_nodes {} dropped_tail {:.16e}",
            self.b_c, self.l_max, self.k_max, self.p_points, self.n_nodes, self.dropped_tail
        )
        .unwrap();
        head.push_str("family,k,l,m,j,re,im\n");
        w.write_all(head.as_bytes())?;
        let n = self.l_max + 1;
        for fam in Family::ALL {
            let ks: Vec<i32> = if fam.has_k() {
                (-(self.k_max as i32)..=self.k_max as i32).collect()
            } else {
                vec![0]
            };
            for k in ks {
                for l in 0..n {
                    for m in 0..n {
                        for &(j, c) in self.modes(fam, k, l, m) {
                            writeln!(w, "{},{k},{l},{m},{j},{:.16e},{:.16e}", fam.name(), c.re, c.im)?;
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn read_csv(text: &str) -> Result<Self> {
        let bad = |line: usize, message: String| Error::Parse { line, message };
        let mut key = None;
        let mut meta: Option<(f64, usize, usize, usize, usize, f64)> = None;
        let mut rows = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            if let Some(rest) = raw.strip_prefix("# key ") {
                key = Some(rest.trim().to_string());
            } else if let Some(rest) = raw.strip_prefix("# b_c ") {
                let t: Vec<&str> = rest.split_whitespace().collect();
                let get = |i: usize| t.get(i).copied().ok_or_else(|| bad(line, "short header".into()));
                let f = |s: &str| s.parse::<f64>().map_err(|_| bad(line, format!("bad number '{s}'")));
                let u = |s: &str| s.parse::<usize>().map_err(|_| bad(line, format!("bad integer '{s}'")));
                meta = Some((
                    f(get(0)?)?,
                    u(get(2)?)?,
                    u(get(4)?)?,
                    u(get(6)?)?,
                    u(get(8)?)?,
                    f(get(10)?)?,
                ));
            } else if raw.starts_with('#') || raw.starts_with("family,") || raw.trim().is_empty() {
                continue;
            } else {
                let t: Vec<&str> = raw.split(',').collect();
                if t.len() != 7 {
                    return Err(bad(line, "expected 7 columns".into()));
                }
                let fam = Family::from_name(t[0]).ok_or_else(|| bad(line, format!("unknown family '{}'", t[0])))?;
                let ints: Vec<i64> = t[1..5]
                    .iter()
                    .map(|s| s.parse::<i64>().map_err(|_| bad(line, format!("bad integer '{s}'"))))
                    .collect::<Result<_>>()?;
                let re: f64 = t[5].parse().map_err(|_| bad(line, "bad float".into()))?;
                let im: f64 = t[6].parse().map_err(|_| bad(line, "bad float".into()))?;
                rows.push((line, fam, ints, Complex64::new(re, im)));
            }
        }
        let key = key.ok_or_else(|| bad(0, "missing key header".into()))?;
        let (b_c, l_max, k_max, p_points, n_nodes, dropped_tail) =
            meta.ok_or_else(|| bad(0, "missing parameter header".into()))?;
        let n = l_max + 1;
        let mut table = Self {
            b_c,
            beta: 2.0 * PI / b_c,
            l_max,
            k_max,
            p_points,
            n_nodes,
            dropped_tail,
            key,
            a0_sq: vec![Vec::new(); n * n],
            a0: vec![Vec::new(); n * n],
            a1_sq: vec![Vec::new(); (2 * k_max + 1) * n * n],
            a1_hat: vec![Vec::new(); (2 * k_max + 1) * n * n],
        };
        for (line, fam, ints, c) in rows {
            let (k, l, m, j) = (ints[0] as i32, ints[1] as usize, ints[2] as usize, ints[3] as i32);
            if l >= n || m >= n {
                return Err(bad(line, "level out of range".into()));
            }
            let idx = table
                .index(fam, k, l, m)
                .ok_or_else(|| bad(line, "mode index out of range".into()))?;
            let store = match fam {
                Family::A0Sq => &mut table.a0_sq,
                Family::A0 => &mut table.a0,
                Family::A1Sq => &mut table.a1_sq,
                Family::A1Hat => &mut table.a1_hat,
            };
            store[idx].push((j, c));
        }
        Ok(table)
    }

    /// Load a cached table from `dir` if present, else build and store it.
    pub fn load_or_build(dir: &Path, gauge: &GaugeData, opts: &TableOptions) -> Result<Self> {
        let k_max = opts.k_max.unwrap_or(gauge.a1.x_bandwidth() as usize * 2);
        let n_nodes = opts.n_nodes.unwrap_or_else(|| default_node_count(opts.l_max + 1));
        let key = cache_key(gauge, opts, k_max, n_nodes);
        let path = Self::cache_path(dir, &key);
        if let Ok(text) = std::fs::read_to_string(&path) {
            if let Ok(t) = Self::read_csv(&text) {
                if t.key == key {
                    return Ok(t);
                }
            }
        }
        let table = Self::build(gauge, opts)?;
        std::fs::create_dir_all(dir)?;
        let mut buf = Vec::new();
        table.write_csv(&mut buf)?;
        let tmp = path.with_extension("tmp");
        std::fs::File::create(&tmp)?.write_all(&buf)?;
        std::fs::rename(&tmp, &path)?;
        Ok(table)
    }

    pub fn cache_path(dir: &Path, key: &str) -> PathBuf {
        dir.join(format!("elements-{key}.csv"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::{Fourier1, Fourier2};

    fn cosine_gauge() -> GaugeData {
        GaugeData::new(2.0 * PI, 0.01, 0.0, Fourier1::cos(1, 1.0), Fourier2::zero()).unwrap()
    }

    fn mixed_gauge() -> GaugeData {
        let a1 = Fourier2::product(&Fourier1::cos(1, 1.0), &Fourier1::cos(1, 1.0));
        GaugeData::new(2.0 * PI, 0.01, 0.001, Fourier1::cos(1, 1.0), a1).unwrap()
    }

    #[test]
    fn a0_ground_state_closed_form() {
        // -pi exp(-pi^2/B) sin(2 pi p) from int u sin(a u) exp(-u^2) du = sqrt(pi) a/2 exp(-a^2/4)
        let g = cosine_gauge();
        let t = MatrixElementTable::build(&g, &TableOptions::new(4)).unwrap();
        let quad = Quadrature::for_levels(4).unwrap();
        for p in [0.0, 0.1, 0.25, 0.6, 0.93] {
            let oracle = -PI * (-PI / 2.0).exp() * (2.0 * PI * p).sin();
            assert!((t.a0(0, 0, p) - oracle).abs() < 1e-12);
            assert!((a0_element(0, 0, p, &g, &quad).unwrap() - oracle).abs() < 1e-12);
        }
    }

    #[test]
    fn a0_sq_ground_state_closed_form() {
        // (A0)^2 = 1/2 + cos(4 pi y)/2, int cos(2 b u) exp(-u^2) du = sqrt(pi) exp(-b^2)
        let g = cosine_gauge();
        let t = MatrixElementTable::build(&g, &TableOptions::new(3)).unwrap();
        let b = 2.0 * PI / (2.0 * PI).sqrt();
        for p in [0.0, 0.2, 0.7] {
            let oracle = 0.5 + 0.5 * (-b * b).exp() * (4.0 * PI * p).cos();
            assert!((t.a0_sq(0, 0, p) - oracle).abs() < 1e-13);
        }
        for l in 0..=3 {
            for m in 0..=3 {
                let c0 = t.modes(Family::A0Sq, 0, l, m).iter().find(|e| e.0 == 0).map(|e| e.1.re).unwrap_or(0.0);
                let want = if l == m { 0.5 } else { 0.0 };
                assert!((c0 - want).abs() < 1e-13, "{l}{m} {c0}");
            }
        }
    }

    #[test]
    fn constant_potential_gives_identity() {
        let g = GaugeData::new(3.0, 0.1, 0.0, Fourier1::constant(1.0), Fourier2::zero()).unwrap();
        let t = MatrixElementTable::build(&g, &TableOptions::new(5)).unwrap();
        for l in 0..=5 {
            for m in 0..=5 {
                let want = if l == m { 1.0 } else { 0.0 };
                assert!((t.a0_sq(l, m, 0.3) - want).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn zero_potentials_give_empty_tables() {
        let g = GaugeData::landau(2.0 * PI).unwrap();
        let t = MatrixElementTable::build(&g, &TableOptions::new(3)).unwrap();
        assert_eq!(t.k_max, 0);
        for fam in Family::ALL {
            for l in 0..=3 {
                for m in 0..=3 {
                    assert!(t.modes(fam, 0, l, m).is_empty());
                }
            }
        }
    }

    #[test]
    fn table_matches_direct_quadrature() {
        let g = mixed_gauge();
        let t = MatrixElementTable::build(&g, &TableOptions::new(4)).unwrap();
        let quad = Quadrature::for_levels(4).unwrap();
        for &(k, l, m, p) in &[(0, 0, 0, 0.1), (1, 0, 0, 0.0), (-1, 2, 1, 0.37), (2, 3, 4, 0.8), (1, 4, 0, 0.55)] {
            let d = a1_hat_element(k, l, m, p, &g, &quad).unwrap();
            assert!((t.a1_hat(k, l, m, p) - d).norm() < 1e-12, "hat {k}{l}{m}");
            let d = a1_sq_element(k, l, m, p, &g, &quad).unwrap();
            assert!((t.a1_sq(k, l, m, p) - d).norm() < 1e-12, "sq {k}{l}{m}");
            let d = a0_sq_element(l, m, p, &g, &quad).unwrap();
            assert!((t.a0_sq(l, m, p) - d).abs() < 1e-12);
        }
    }

    #[test]
    fn a1_hat_k1_is_resolution_independent() {
        let g = mixed_gauge();
        let coarse = Quadrature::new(40, 1.0).unwrap();
        let fine = Quadrature::new(120, 1.0).unwrap();
        for k in [-1, 1] {
            let a = a1_hat_element(k, 0, 0, 0.0, &g, &coarse).unwrap();
            let b = a1_hat_element(k, 0, 0, 0.0, &g, &fine).unwrap();
            assert!((a - b).norm() < 1e-10);
            assert!(b.norm() > 1e-3);
        }
    }

    #[test]
    fn cosine_parity_rules() {
        let g = cosine_gauge();
        let t = MatrixElementTable::build(&g, &TableOptions::new(8)).unwrap();
        for l in 0..=8 {
            for m in 0..=8 {
                let c1 = t.modes(Family::A0, 0, l, m).iter().find(|e| e.0 == 1).map(|e| e.1).unwrap_or_default();
                let (a, b) = (2.0 * c1.re, -2.0 * c1.im);
                if (l + m) % 2 == 0 {
                    assert!(a.abs() <= 1e-12, "a[{l},{m}] = {a}");
                } else {
                    assert!(b.abs() <= 1e-12, "b[{l},{m}] = {b}");
                }
                let c2 = t.modes(Family::A0Sq, 0, l, m).iter().find(|e| e.0 == 2).map(|e| e.1).unwrap_or_default();
                let (c, d) = (2.0 * c2.re, -2.0 * c2.im);
                if (l + m) % 2 == 1 {
                    assert!(c.abs() <= 1e-12);
                } else {
                    assert!(d.abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn x_only_a1_zero_mode_and_shifted_overlaps() {
        // A1 = cos(2 pi x): k = 0 entries vanish; k = +-1 reduce to displaced
        // oscillator overlaps, e.g. int Om_0(u+s) Om_0(u) du = exp(-s^2/4).
        let a1 = Fourier2::product(&Fourier1::cos(1, 1.0), &Fourier1::constant(1.0));
        let g = GaugeData::new(2.0 * PI, 0.0, 0.01, Fourier1::zero(), a1).unwrap();
        let t = MatrixElementTable::build(&g, &TableOptions::new(4)).unwrap();
        for l in 0..=4 {
            for m in 0..=4 {
                assert!(t.a1_hat(0, l, m, 0.3).norm() <= 1e-12);
                let want = if l == m { 0.5 } else { 0.0 };
                assert!((t.a1_sq(0, l, m, 0.3) - want).norm() <= 1e-12);
            }
        }
        let s = (2.0 * PI).sqrt();
        let ov = (-s * s / 4.0).exp();
        assert!((t.a1_sq(2, 0, 0, 0.4) - 0.25 * (-(2.0 * s).powi(2) / 4.0).exp()).norm() < 1e-13);
        // hA1 for l = m = 0: -i r (1/2) [-sqrt(1/2) G10 + sqrt(1/2) G01] with
        // G10 = int Om_1(u+s) Om_0(u) = s ov / sqrt2 and G01 = -s ov / sqrt2
        let r = s;
        let (g10, g01) = (s * ov / 2f64.sqrt(), -s * ov / 2f64.sqrt());
        let want = Complex64::new(0.0, -r) * 0.5 * (0.5f64.sqrt() * (g01 - g10));
        assert!((t.a1_hat(1, 0, 0, 0.0) - want).norm() < 1e-12, "{} vs {want}", t.a1_hat(1, 0, 0, 0.0));
    }

    #[test]
    fn hermitian_shift_relation() {
        let g = mixed_gauge();
        let t = MatrixElementTable::build(&g, &TableOptions::new(5)).unwrap();
        for k in -2..=2 {
            for l in 0..=5 {
                for m in 0..=5 {
                    for p in [0.0, 0.3, 0.71] {
                        let shifted = p - t.beta * k as f64;
                        for fam in [Family::A1Sq, Family::A1Hat] {
                            let a = t.eval(fam, -k, m, l, shifted);
                            let b = t.eval(fam, k, l, m, p).conj();
                            assert!((a - b).norm() <= 1e-12, "{fam:?} {k} {l} {m}");
                        }
                    }
                }
            }
        }
        for l in 0..=5 {
            for m in 0..=5 {
                assert!((t.a0(l, m, 0.2) - t.a0(m, l, 0.2)).abs() <= 1e-12);
                assert!((t.a0_sq(l, m, 0.2) - t.a0_sq(m, l, 0.2)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn under_resolved_quadrature_is_reported() {
        let g = GaugeData::new(2.0 * PI, 0.01, 0.0, Fourier1::cos(6, 1.0), Fourier2::zero()).unwrap();
        let mut opts = TableOptions::new(6);
        opts.n_nodes = Some(14);
        assert!(matches!(
            MatrixElementTable::build(&g, &opts),
            Err(Error::QuadratureUnderResolved { .. })
        ));
    }

    #[test]
    fn csv_round_trip_and_cache() {
        let g = mixed_gauge();
        let opts = TableOptions::new(3);
        let t = MatrixElementTable::build(&g, &opts).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let back = MatrixElementTable::read_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back, t);

        let dir = tempfile::tempdir().unwrap();
        let a = MatrixElementTable::load_or_build(dir.path(), &g, &opts).unwrap();
        assert!(MatrixElementTable::cache_path(dir.path(), &a.key).exists());
        let b = MatrixElementTable::load_or_build(dir.path(), &g, &opts).unwrap();
        assert_eq!(a, b);
        let other = MatrixElementTable::load_or_build(dir.path(), &cosine_gauge(), &opts).unwrap();
        assert_ne!(other.key, a.key);
    }
}
