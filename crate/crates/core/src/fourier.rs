//! Finite Fourier series on the unit period.
//!
//! Every periodic object in the crate (fields, gauge potentials, the
//! p-dependence of matrix elements) is band limited, so derivatives,
//! antiderivatives and products are exact coefficient manipulations.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const TWO_PI: f64 = 2.0 * PI;

fn cis(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

/// `f(t) = sum_k c_k exp(2 pi i k t)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Fourier1 {
    coeffs: BTreeMap<i32, Complex64>,
}

impl Fourier1 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::from_modes([(0, Complex64::new(c, 0.0))])
    }

    /// `amp * cos(2 pi k t)`
    pub fn cos(k: i32, amp: f64) -> Self {
        if k == 0 {
            return Self::constant(amp);
        }
        Self::from_modes([(k, (amp / 2.0).into()), (-k, (amp / 2.0).into())])
    }

    /// `amp * sin(2 pi k t)`
    pub fn sin(k: i32, amp: f64) -> Self {
        let h = Complex64::new(0.0, -amp / 2.0);
        Self::from_modes([(k, h), (-k, -h)])
    }

    pub fn from_modes<I: IntoIterator<Item = (i32, Complex64)>>(modes: I) -> Self {
        let mut coeffs = BTreeMap::new();
        for (k, c) in modes {
            *coeffs.entry(k).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        coeffs.retain(|_, c: &mut Complex64| *c != Complex64::new(0.0, 0.0));
        Self { coeffs }
    }

    pub fn modes(&self) -> impl Iterator<Item = (i32, Complex64)> + '_ {
        self.coeffs.iter().map(|(&k, &c)| (k, c))
    }

    pub fn coeff(&self, k: i32) -> Complex64 {
        self.coeffs.get(&k).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn bandwidth(&self) -> i32 {
        self.coeffs.keys().map(|k| k.abs()).max().unwrap_or(0)
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(&k, &c)| c * cis(TWO_PI * k as f64 * t))
            .sum()
    }

    pub fn eval_re(&self, t: f64) -> f64 {
        self.eval(t).re
    }

    pub fn derivative(&self) -> Self {
        Self::from_modes(
            self.modes()
                .map(|(k, c)| (k, c * Complex64::new(0.0, TWO_PI * k as f64))),
        )
    }

    /// Zero-mean antiderivative. Fails if the mean is nonzero, since the
    /// result would not be periodic.
    pub fn antiderivative(&self) -> Result<Self> {
        let mean = self.coeff(0);
        if mean.norm() > 1e-14 * (1.0 + self.max_coeff()) {
            return Err(Error::InvalidArgument(format!(
                "antiderivative of a series with mean {mean}"
            )));
        }
        Ok(Self::from_modes(self.modes().filter(|(k, _)| *k != 0).map(
            |(k, c)| (k, c / Complex64::new(0.0, TWO_PI * k as f64)),
        )))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_modes(self.modes().map(|(k, c)| (k, c * s)))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_modes(self.modes().chain(other.modes()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        for (a, ca) in self.modes() {
            for (b, cb) in other.modes() {
                out.push((a + b, ca * cb));
            }
        }
        Self::from_modes(out)
    }

    pub fn max_coeff(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest Hermitian-symmetry defect `|c_{-k} - conj(c_k)|`.
    pub fn hermitian_defect(&self) -> f64 {
        self.modes()
            .map(|(k, c)| (self.coeff(-k) - c.conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Max of `|f|` over `samples` equispaced points.
    pub fn max_abs_sampled(&self, samples: usize) -> f64 {
        (0..samples)
            .map(|i| self.eval(i as f64 / samples as f64).norm())
            .fold(0.0, f64::max)
    }
}

/// `f(x, y) = sum_{j,k} c_{j,k} exp(2 pi i (j x + k y))`; `j` indexes x-modes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Fourier2 {
    coeffs: BTreeMap<(i32, i32), Complex64>,
}

impl Fourier2 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::from_modes([((0, 0), Complex64::new(c, 0.0))])
    }

    pub fn from_modes<I: IntoIterator<Item = ((i32, i32), Complex64)>>(modes: I) -> Self {
        let mut coeffs = BTreeMap::new();
        for (jk, c) in modes {
            *coeffs.entry(jk).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        coeffs.retain(|_, c: &mut Complex64| *c != Complex64::new(0.0, 0.0));
        Self { coeffs }
    }

    /// Tensor product `fx(x) * fy(y)`.
    pub fn product(fx: &Fourier1, fy: &Fourier1) -> Self {
        let mut out = Vec::new();
        for (j, a) in fx.modes() {
            for (k, b) in fy.modes() {
                out.push(((j, k), a * b));
            }
        }
        Self::from_modes(out)
    }

    /// Lift a function of y alone.
    pub fn from_y(fy: &Fourier1) -> Self {
        Self::from_modes(fy.modes().map(|(k, c)| ((0, k), c)))
    }

    pub fn modes(&self) -> impl Iterator<Item = ((i32, i32), Complex64)> + '_ {
        self.coeffs.iter().map(|(&jk, &c)| (jk, c))
    }

    pub fn coeff(&self, j: i32, k: i32) -> Complex64 {
        self.coeffs.get(&(j, k)).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, x: f64, y: f64) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(&(j, k), &c)| c * cis(TWO_PI * (j as f64 * x + k as f64 * y)))
            .sum()
    }

    /// The `j`-th Fourier coefficient in x, as a function of y.
    pub fn x_mode(&self, j: i32) -> Fourier1 {
        Fourier1::from_modes(
            self.modes()
                .filter(|((jj, _), _)| *jj == j)
                .map(|((_, k), c)| (k, c)),
        )
    }

    pub fn x_modes(&self) -> Vec<i32> {
        let mut js: Vec<i32> = self.coeffs.keys().map(|(j, _)| *j).collect();
        js.dedup();
        js
    }

    pub fn x_bandwidth(&self) -> i32 {
        self.coeffs.keys().map(|(j, _)| j.abs()).max().unwrap_or(0)
    }

    pub fn dx(&self) -> Self {
        Self::from_modes(
            self.modes()
                .map(|((j, k), c)| ((j, k), c * Complex64::new(0.0, TWO_PI * j as f64))),
        )
    }

    pub fn dy(&self) -> Self {
        Self::from_modes(
            self.modes()
                .map(|((j, k), c)| ((j, k), c * Complex64::new(0.0, TWO_PI * k as f64))),
        )
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_modes(self.modes().map(|(jk, c)| (jk, c * s)))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_modes(self.modes().chain(other.modes()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        for ((j1, k1), a) in self.modes() {
            for ((j2, k2), b) in other.modes() {
                out.push(((j1 + j2, k1 + k2), a * b));
            }
        }
        Self::from_modes(out)
    }

    pub fn max_coeff(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// First mode violating `c_{-j,-k} = conj(c_{j,k})`, with its defect.
    pub fn hermitian_defect(&self) -> Option<((i32, i32), f64)> {
        self.modes()
            .map(|((j, k), c)| ((j, k), (self.coeff(-j, -k) - c.conj()).norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }

    pub fn max_abs_sampled(&self, samples: usize) -> f64 {
        let mut m = 0.0f64;
        for a in 0..samples {
            for b in 0..samples {
                let v = self.eval(a as f64 / samples as f64, b as f64 / samples as f64);
                m = m.max(v.norm());
            }
        }
        m
    }
}
