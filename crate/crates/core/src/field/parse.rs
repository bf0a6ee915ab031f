//! Line-oriented field description files.
//!
//! ```text
//! # comments start with '#'
//! flux 1.0                  # or: b_c 6.283185307179586
//! 0 1 0.0 -0.5              # Fourier mode (j, k) of B: j k re im
//! 0 -1 0.0 0.5
//! ```
//!
//! Gauge potentials may be given directly instead of `B` modes:
//!
//! ```text
//! b_c 6.283185307179586
//! eps0 0.01                 # optional magnitudes
//! eps1 0.001
//! a0 1 0.5 0.0              # mode k of A0(y): k re im
//! a0 -1 0.5 0.0
//! a1 1 1 0.25 0.0           # mode (j, k) of A1(x, y): j k re im
//! ```
//!
//! Mode lists must be Hermitian (real functions); duplicate modes add up.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;

use super::{split_field, GaugeData, PeriodicField};
use crate::error::{Error, Result};
use crate::fourier::{Fourier1, Fourier2};

/// Contents of a field file before gauge construction.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSpec {
    pub b_c: f64,
    /// Non-constant modes of `B`.
    pub b_modes: Fourier2,
    pub a0: Fourier1,
    pub a1: Fourier2,
    pub eps0: Option<f64>,
    pub eps1: Option<f64>,
}

impl FieldSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut b_c: Option<(f64, usize)> = None;
        let mut b_modes = Vec::new();
        let mut a0 = Vec::new();
        let mut a1 = Vec::new();
        let mut eps0 = None;
        let mut eps1 = None;

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let toks: Vec<&str> = content.split_whitespace().collect();
            let err = |message: String| Error::Parse { line, message };
            let num = |s: &str| -> Result<f64> {
                let v: f64 = s
                    .parse()
                    .map_err(|_| err(format!("expected a number, found '{s}'")))?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(err(format!("non-finite value '{s}'")))
                }
            };
            let int = |s: &str| -> Result<i32> {
                s.parse()
                    .map_err(|_| err(format!("expected an integer mode index, found '{s}'")))
            };
            let arity = |n: usize| -> Result<()> {
                if toks.len() == n {
                    Ok(())
                } else {
                    Err(err(format!(
                        "'{}' takes {} values, found {}",
                        toks[0],
                        n - 1,
                        toks.len() - 1
                    )))
                }
            };
            let mut set_bc = |v: f64| -> Result<()> {
                if let Some((_, prev)) = b_c {
                    return Err(err(format!("constant field already set on line {prev}")));
                }
                b_c = Some((v, line));
                Ok(())
            };

            match toks[0] {
                "flux" => {
                    arity(2)?;
                    set_bc(2.0 * PI * num(toks[1])?)?;
                }
                "b_c" => {
                    arity(2)?;
                    set_bc(num(toks[1])?)?;
                }
                "eps0" => {
                    arity(2)?;
                    eps0 = Some(num(toks[1])?);
                }
                "eps1" => {
                    arity(2)?;
                    eps1 = Some(num(toks[1])?);
                }
                "a0" => {
                    arity(4)?;
                    a0.push((int(toks[1])?, Complex64::new(num(toks[2])?, num(toks[3])?)));
                }
                "a1" => {
                    arity(5)?;
                    a1.push((
                        (int(toks[1])?, int(toks[2])?),
                        Complex64::new(num(toks[3])?, num(toks[4])?),
                    ));
                }
                _ if toks[0].parse::<i32>().is_ok() => {
                    arity(4)?;
                    let (j, k) = (int(toks[0])?, int(toks[1])?);
                    let c = Complex64::new(num(toks[2])?, num(toks[3])?);
                    if (j, k) == (0, 0) {
                        if c.im != 0.0 {
                            return Err(err("constant mode must be real".into()));
                        }
                        set_bc(c.re)?;
                    } else {
                        b_modes.push(((j, k), c));
                    }
                }
                other => return Err(err(format!("unknown keyword '{other}'"))),
            }
        }

        let (b_c, _) = b_c.ok_or(Error::Parse {
            line: 0,
            message: "missing 'flux' or 'b_c' line".into(),
        })?;
        Self::from_parts(
            b_c,
            Fourier2::from_modes(b_modes),
            Fourier1::from_modes(a0),
            Fourier2::from_modes(a1),
            eps0,
            eps1,
        )
    }

    /// Validated description from already collected modes.
    pub fn from_parts(
        b_c: f64,
        b_modes: Fourier2,
        a0: Fourier1,
        a1: Fourier2,
        eps0: Option<f64>,
        eps1: Option<f64>,
    ) -> Result<Self> {
        let spec = Self {
            b_c,
            b_modes: Fourier2::from_modes(b_modes.modes().filter(|(jk, _)| *jk != (0, 0))),
            a0,
            a1,
            eps0,
            eps1,
        };
        if b_modes.coeff(0, 0) != Complex64::new(0.0, 0.0) {
            return Err(Error::Parse {
                line: 0,
                message: "the constant mode of B is given by 'flux' or 'b_c'".into(),
            });
        }
        if !spec.b_modes.is_zero() && !(spec.a0.is_zero() && spec.a1.is_zero()) {
            return Err(Error::Parse {
                line: 0,
                message: "give either B modes or a0/a1 potentials, not both".into(),
            });
        }
        spec.check_hermitian()?;
        Ok(spec)
    }

    fn check_hermitian(&self) -> Result<()> {
        let tol = |m: f64| 1e-12 * (1.0 + m);
        if let Some((mode, mismatch)) = self.b_modes.hermitian_defect() {
            if mismatch > tol(self.b_modes.max_coeff()) {
                return Err(Error::NonHermitianData { mode, mismatch });
            }
        }
        if let Some((k, c)) = self
            .a0
            .modes()
            .find(|&(k, c)| (self.a0.coeff(-k) - c.conj()).norm() > tol(self.a0.max_coeff()))
        {
            return Err(Error::NonHermitianData {
                mode: (0, k),
                mismatch: (self.a0.coeff(-k) - c.conj()).norm(),
            });
        }
        if let Some((mode, mismatch)) = self.a1.hermitian_defect() {
            if mismatch > tol(self.a1.max_coeff()) {
                return Err(Error::NonHermitianData { mode, mismatch });
            }
        }
        Ok(())
    }

    /// The field `B` described by the file.
    pub fn field(&self) -> Result<PeriodicField> {
        if self.b_modes.is_zero() {
            let g = self.raw_gauge(1.0, 1.0)?;
            return Ok(g.reconstruct());
        }
        PeriodicField::new(Fourier2::constant(self.b_c).add(&self.b_modes))
    }

    /// Gauge data with unit-normalized potentials. Explicit couplings
    /// (arguments first, then file values) replace the natural magnitudes.
    pub fn gauge(&self, eps0: Option<f64>, eps1: Option<f64>) -> Result<GaugeData> {
        let natural = self.natural()?;
        let e0 = eps0.or(self.eps0).unwrap_or(natural.eps0);
        let e1 = eps1.or(self.eps1).unwrap_or(natural.eps1);
        GaugeData::new(natural.b_c, e0, e1, natural.a0, natural.a1)
    }

    /// `max |B - (B_c + curl A)|` on an `n x n` grid of the unit cell, with
    /// the potentials at their natural magnitudes.
    pub fn curl_residual(&self, n: usize) -> Result<f64> {
        let field = self.field()?;
        let natural = self.natural()?;
        let mut g = GaugeData::landau(natural.b_c)?;
        g.eps0 = natural.eps0;
        g.eps1 = natural.eps1;
        g.a0 = natural.a0;
        g.a1 = natural.a1;
        let rebuilt = g.reconstruct();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let (x, y) = (i as f64 / n as f64, j as f64 / n as f64);
                worst = worst.max((field.eval(x, y) - rebuilt.eval(x, y)).abs());
            }
        }
        Ok(worst)
    }

    fn natural(&self) -> Result<NaturalGauge> {
        Ok(if self.b_modes.is_zero() {
            let a0_amp = self.a0.max_abs_sampled(512);
            let a1 = self.raw_gauge(1.0, 1.0)?.normalized().a1;
            let a1_amp = a1.max_abs_sampled(128);
            let unit = |amp: f64| if amp > 0.0 { 1.0 / amp } else { 0.0 };
            NaturalGauge {
                b_c: self.b_c,
                eps0: a0_amp,
                eps1: a1_amp,
                a0: self.a0.scale(unit(a0_amp)),
                a1: a1.scale(unit(a1_amp)),
            }
        } else {
            let (b_c, eps0, eps1, a0, a1) = split_field(&self.field()?)?;
            NaturalGauge { b_c, eps0, eps1, a0, a1 }
        })
    }

    fn raw_gauge(&self, eps0: f64, eps1: f64) -> Result<GaugeData> {
        if self.b_c == 0.0 {
            return Err(Error::ZeroFlux);
        }
        // Ordering of the couplings is only enforced on the final gauge.
        let mut g = GaugeData::landau(self.b_c)?;
        g.eps0 = eps0;
        g.eps1 = eps1;
        g.a0 = self.a0.clone();
        g.a1 = self.a1.clone();
        Ok(g)
    }
}

struct NaturalGauge {
    b_c: f64,
    eps0: f64,
    eps1: f64,
    a0: Fourier1,
    a1: Fourier2,
}

/// Read and parse a field file.
pub fn parse_field_file(path: &Path) -> Result<FieldSpec> {
    let text = std::fs::read_to_string(path)?;
    FieldSpec::parse(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_b_modes() {
        let spec = FieldSpec::parse(
            "# cosine in y\nflux 1\n0 1 0.0 -0.5 # sin(2 pi y)\n0 -1 0.0 0.5\n",
        )
        .unwrap();
        assert!((spec.b_c - 2.0 * PI).abs() < 1e-15);
        let g = spec.gauge(None, None).unwrap();
        assert!((g.beta - 1.0).abs() < 1e-15);
        assert!((g.eps0 - 1.0 / (2.0 * PI)).abs() < 1e-14);
        assert!((g.a0.eval_re(0.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn parses_direct_potentials() {
        let spec = FieldSpec::parse(
            "b_c 6.283185307179586\neps0 0.01\na0 1 0.5 0\na0 -1 0.5 0\na1 1 1 0.25 0\na1 -1 -1 0.25 0\na1 1 -1 0.25 0\na1 -1 1 0.25 0\n",
        )
        .unwrap();
        let g = spec.gauge(None, Some(0.001)).unwrap();
        assert_eq!((g.eps0, g.eps1), (0.01, 0.001));
        assert!((g.a1.eval(0.0, 0.0).re - 1.0).abs() < 1e-14);
        assert!((g.a0.eval_re(0.5) + 1.0).abs() < 1e-14);
    }

    #[test]
    fn curl_residual_ignores_coupling_order() {
        // both potentials have unit natural magnitude here
        let spec = FieldSpec::parse(
            "flux 1.6180339887498949\na0 1 0.5 0\na0 -1 0.5 0\na1 1 1 0.25 0\na1 -1 -1 0.25 0\na1 1 -1 0.25 0\na1 -1 1 0.25 0\n",
        )
        .unwrap();
        assert!(matches!(spec.gauge(None, None), Err(Error::CouplingOrder { .. })));
        assert!(spec.curl_residual(32).unwrap() < 1e-12);
        let b = FieldSpec::parse("flux 1\n0 1 0.0 -0.5\n0 -1 0.0 0.5\n1 0 0.0 -0.5\n-1 0 0.0 0.5\n").unwrap();
        assert!(b.curl_residual(32).unwrap() < 1e-12);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = FieldSpec::parse("flux 1\n\n0 1 x 0\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e}");
        let e = FieldSpec::parse("flux 1\nbogus 2\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        let e = FieldSpec::parse("flux 1\nb_c 2\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        let e = FieldSpec::parse("0 1 1 0\n0 -1 1 0\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 0, .. }));
        let e = FieldSpec::parse("flux 1\na0 1 0.5\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn rejects_non_hermitian_modes() {
        let e = FieldSpec::parse("flux 1\n1 0 1.0 0.0\n").unwrap_err();
        assert!(matches!(e, Error::NonHermitianData { mode: (1, 0), .. }), "{e}");
        let e = FieldSpec::parse("flux 1\na0 1 0 1\na0 -1 0 1\n").unwrap_err();
        assert!(matches!(e, Error::NonHermitianData { .. }));
    }

    #[test]
    fn zero_flux_file() {
        let spec = FieldSpec::parse("flux 0\n0 1 0 -0.5\n0 -1 0 0.5\n").unwrap();
        assert!(matches!(spec.gauge(None, None), Err(Error::ZeroFlux)));
    }
}
