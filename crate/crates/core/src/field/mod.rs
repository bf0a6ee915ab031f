//! Periodic magnetic fields on the unit lattice and their gauge potentials.
//!
//! A field `B` is split into its constant part `B_c = 2 pi Phi` and a
//! zero-flux remainder, which is written in the triangular gauge
//! `(eps0 A0(y), eps1 A1(x, y))` so that
//!
//! ```text
//! B = B_c + eps1 d_x A1 - eps0 d_y A0
//! ```
//!
//! `A0` and `A1` are stored with unit max-norm; the coupling strengths live
//! in `eps0`, `eps1` so matrix elements can be reused across a coupling sweep.

mod diophantine;
mod parse;

use std::f64::consts::PI;

use num_complex::Complex64;

pub use diophantine::{check_diophantine, continued_fraction_convergents, DiophantineReport};
pub use parse::{parse_field_file, FieldSpec};

use crate::error::{Error, Result};
use crate::fourier::{Fourier1, Fourier2};

/// Sampling density used to fold max-norms into the couplings.
const NORM_SAMPLES_1D: usize = 512;
const NORM_SAMPLES_2D: usize = 128;

/// A real, band-limited field on the unit cell.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicField {
    modes: Fourier2,
}

impl PeriodicField {
    pub fn new(modes: Fourier2) -> Result<Self> {
        let scale = 1.0 + modes.max_coeff();
        if let Some((mode, mismatch)) = modes.hermitian_defect() {
            if mismatch > 1e-12 * scale {
                return Err(Error::NonHermitianData { mode, mismatch });
            }
        }
        Ok(Self { modes })
    }

    pub fn constant(b: f64) -> Self {
        Self {
            modes: Fourier2::constant(b),
        }
    }

    pub fn modes(&self) -> &Fourier2 {
        &self.modes
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.modes.eval(x, y).re
    }

    /// Flux through the unit cell in units of the flux quantum `2 pi`.
    pub fn flux(&self) -> f64 {
        self.modes.coeff(0, 0).re / (2.0 * PI)
    }
}

pub fn flux(field: &PeriodicField) -> f64 {
    field.flux()
}

/// Constant part, gauge potentials and couplings of a periodic field.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeData {
    pub b_c: f64,
    pub beta: f64,
    pub flux: f64,
    pub eps0: f64,
    pub eps1: f64,
    pub a0: Fourier1,
    pub a1: Fourier2,
}

impl GaugeData {
    pub fn new(b_c: f64, eps0: f64, eps1: f64, a0: Fourier1, a1: Fourier2) -> Result<Self> {
        if b_c == 0.0 {
            return Err(Error::ZeroFlux);
        }
        if !b_c.is_finite() || b_c < 0.0 {
            return Err(Error::NegativeFlux {
                flux: b_c / (2.0 * PI),
            });
        }
        if !(eps0 >= 0.0 && eps1 >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "couplings must be non-negative (eps0 = {eps0}, eps1 = {eps1})"
            )));
        }
        if eps0 > 0.0 && eps1 > 0.0 && eps1 >= eps0 {
            return Err(Error::CouplingOrder { eps0, eps1 });
        }
        let d0 = a0.hermitian_defect();
        if d0 > 1e-12 * (1.0 + a0.max_coeff()) {
            return Err(Error::NonHermitianData {
                mode: (0, a0.modes().next().map(|m| m.0).unwrap_or(0)),
                mismatch: d0,
            });
        }
        if let Some((mode, mismatch)) = a1.hermitian_defect() {
            if mismatch > 1e-12 * (1.0 + a1.max_coeff()) {
                return Err(Error::NonHermitianData { mode, mismatch });
            }
        }
        Ok(Self {
            b_c,
            beta: 2.0 * PI / b_c,
            flux: b_c / (2.0 * PI),
            eps0,
            eps1,
            a0,
            a1,
        })
    }

    /// Constant field `B_c` with no perturbation.
    pub fn landau(b_c: f64) -> Result<Self> {
        Self::new(b_c, 0.0, 0.0, Fourier1::zero(), Fourier2::zero())
    }

    pub fn with_couplings(&self, eps0: f64, eps1: f64) -> Result<Self> {
        Self::new(self.b_c, eps0, eps1, self.a0.clone(), self.a1.clone())
    }

    /// `A1 + c`; leaves the field unchanged.
    pub fn with_a1_shift(&self, c: f64) -> Result<Self> {
        Self::new(
            self.b_c,
            self.eps0,
            self.eps1,
            self.a0.clone(),
            self.a1.add(&Fourier2::constant(c)),
        )
    }

    /// Subtract the x-average of `A1` (a function of y only), which does not
    /// change the field.
    pub fn normalized(&self) -> Self {
        let avg = Fourier2::from_y(&self.a1.x_mode(0));
        Self {
            a1: self.a1.add(&avg.scale(-1.0)),
            ..self.clone()
        }
    }

    pub fn is_gauge_normalized(&self, tol: f64) -> bool {
        self.a1.x_mode(0).max_coeff() <= tol
    }

    /// The zero-flux part `eps1 d_x A1 - eps0 d_y A0`.
    pub fn zero_flux_part(&self) -> Fourier2 {
        let from_a1 = self.a1.dx().scale(self.eps1);
        let from_a0 = Fourier2::from_y(&self.a0.derivative()).scale(-self.eps0);
        from_a1.add(&from_a0)
    }

    /// Rebuild `B = B_c + eps1 d_x A1 - eps0 d_y A0`.
    pub fn reconstruct(&self) -> PeriodicField {
        PeriodicField {
            modes: Fourier2::constant(self.b_c).add(&self.zero_flux_part()),
        }
    }
}

/// Split a field into `B_c` and unit-normalized gauge potentials.
pub fn decompose(field: &PeriodicField) -> Result<GaugeData> {
    let (b_c, eps0, eps1, a0, a1) = split_field(field)?;
    GaugeData::new(b_c, eps0, eps1, a0, a1)
}

/// `(B_c, eps0, eps1, A0, A1)` at natural magnitudes, coupling order unchecked.
pub(crate) fn split_field(field: &PeriodicField) -> Result<(f64, f64, f64, Fourier1, Fourier2)> {
    let phi = field.flux();
    if phi.abs() < 1e-14 {
        return Err(Error::ZeroFlux);
    }
    if phi < 0.0 {
        return Err(Error::NegativeFlux { flux: phi });
    }
    let b_c = 2.0 * PI * phi;

    let x_avg = Fourier1::from_modes(
        field
            .modes()
            .x_mode(0)
            .modes()
            .filter(|(k, _)| *k != 0),
    );
    // The x-average of a zero-flux field has zero y-mean, so A0 is periodic.
    assert!(x_avg.coeff(0).norm() == 0.0);
    let a0_raw = x_avg.antiderivative()?.scale(-1.0);

    let a1_raw = Fourier2::from_modes(field.modes().modes().filter(|((j, _), _)| *j != 0).map(
        |((j, k), c)| ((j, k), c / Complex64::new(0.0, 2.0 * PI * j as f64)),
    ));

    let (eps0, a0) = fold_amplitude_1d(a0_raw);
    let (eps1, a1) = fold_amplitude_2d(a1_raw);
    Ok((b_c, eps0, eps1, a0, a1))
}

fn fold_amplitude_1d(f: Fourier1) -> (f64, Fourier1) {
    let amp = f.max_abs_sampled(NORM_SAMPLES_1D);
    if amp == 0.0 {
        (0.0, Fourier1::zero())
    } else {
        (amp, f.scale(1.0 / amp))
    }
}

fn fold_amplitude_2d(f: Fourier2) -> (f64, Fourier2) {
    let amp = f.max_abs_sampled(NORM_SAMPLES_2D);
    if amp == 0.0 {
        (0.0, Fourier2::zero())
    } else {
        (amp, f.scale(1.0 / amp))
    }
}
