//! Run configuration read from TOML, with command-line overrides.

use std::path::{Path, PathBuf};

use landau_core::effective::SweepMethod;
use landau_core::elements::{DEFAULT_P_POINTS, DEFAULT_TOL_QUAD};
use landau_core::reduction::{DEFAULT_MAX_ITER, DEFAULT_M_PROTECT, DEFAULT_TOL};
use landau_core::{Complex64, FieldSpec, Fourier1, Fourier2, GaugeData, ReductionOptions, TableOptions};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub out: PathBuf,
    /// Worker threads for the xi pool; 0 picks the machine default.
    pub workers: usize,
    pub field: FieldConfig,
    pub truncation: TruncationConfig,
    pub reduction: ReductionConfig,
    pub spectrum: SpectrumConfig,
    pub eigfun: EigfunConfig,
    pub diagnostics: DiagnosticsConfig,
}

/// Either a field file or inline modes. Inline rows are `[j, k, re, im]`
/// for `B` and `A1`, `[k, re, im]` for `A0`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flux: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_c: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub b_modes: Vec<[f64; 4]>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub a0: Vec<[f64; 3]>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub a1: Vec<[f64; 4]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TruncationConfig {
    pub m_max: usize,
    pub n_window: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quad_nodes: Option<usize>,
    pub p_points: usize,
    pub tol_quad: f64,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        Self {
            m_max: 12,
            n_window: 16,
            k_max: None,
            quad_nodes: None,
            p_points: DEFAULT_P_POINTS,
            tol_quad: DEFAULT_TOL_QUAD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReductionConfig {
    pub m_protect: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub s: i32,
    pub delta: f64,
}

impl Default for ReductionConfig {
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

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dense,
    Reduced,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    pub xi_points: usize,
    pub edge_margin: usize,
    pub method: Method,
    pub lambda_tol: f64,
    /// Highest level reported; defaults to the protected window.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub top_level: Option<usize>,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            xi_points: 128,
            edge_margin: 2,
            method: Method::Dense,
            lambda_tol: 1e-8,
            top_level: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EigfunConfig {
    pub m: usize,
    pub k: i32,
    pub xi: f64,
    pub nx: usize,
    pub ny: usize,
    pub y_max: f64,
    pub n_dec: u32,
    pub tail_tol: f64,
    /// Rate in the coefficient weight `e^{2 delta |n - k|}`.
    pub delta: f64,
}

impl Default for EigfunConfig {
    fn default() -> Self {
        Self {
            m: 0,
            k: 0,
            xi: 0.0,
            nx: 256,
            ny: 512,
            y_max: 8.0,
            n_dec: 2,
            tail_tol: 1e-8,
            delta: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsConfig {
    /// Fiber used for the reduction log.
    pub xi: f64,
    /// Fibers sampled in `p` for the `C^2` norms; 0 disables them.
    pub family_points: usize,
    pub diophantine_c: f64,
    pub diophantine_kappa: f64,
    pub diophantine_n_max: u64,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self {
            xi: 0.0,
            family_points: 8,
            diophantine_c: 0.1,
            diophantine_kappa: 1.0,
            diophantine_n_max: 10_000,
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            out: PathBuf::from("out"),
            workers: 0,
            field: FieldConfig::default(),
            truncation: TruncationConfig::default(),
            reduction: ReductionConfig::default(),
            spectrum: SpectrumConfig::default(),
            eigfun: EigfunConfig::default(),
            diagnostics: DiagnosticsConfig::default(),
        }
    }
}

/// Values given on the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub eps0: Option<f64>,
    pub eps1: Option<f64>,
    pub m_max: Option<usize>,
    pub n_window: Option<usize>,
    pub xi_points: Option<usize>,
    pub m_protect: Option<usize>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Read a config file. A relative field file path is taken relative to
    /// the config file.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        if let (Some(f), Some(dir)) = (&cfg.field.file, path.parent()) {
            if f.is_relative() {
                cfg.field.file = Some(dir.join(f));
            }
        }
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = &o.out {
            self.out = v.clone();
        }
        if let Some(v) = o.workers {
            self.workers = v;
        }
        if let Some(v) = o.eps0 {
            self.field.eps0 = Some(v);
        }
        if let Some(v) = o.eps1 {
            self.field.eps1 = Some(v);
        }
        if let Some(v) = o.m_max {
            self.truncation.m_max = v;
        }
        if let Some(v) = o.n_window {
            self.truncation.n_window = v;
        }
        if let Some(v) = o.xi_points {
            self.spectrum.xi_points = v;
        }
        if let Some(v) = o.m_protect {
            self.reduction.m_protect = v;
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Config(m.to_string()));
        let tols = [
            ("truncation.tol_quad", self.truncation.tol_quad),
            ("reduction.tol", self.reduction.tol),
            ("spectrum.lambda_tol", self.spectrum.lambda_tol),
            ("eigfun.tail_tol", self.eigfun.tail_tol),
        ];
        for (name, v) in tols {
            if !(v > 0.0 && v.is_finite()) {
                return bad(&format!("{name} must be positive, got {v}"));
            }
        }
        if let (Some(e0), Some(e1)) = (self.field.eps0, self.field.eps1) {
            if e0 < 0.0 || e1 < 0.0 {
                return bad("couplings must be non-negative");
            }
            if e1 != 0.0 && e1 >= e0 {
                return bad(&format!("eps1 = {e1} must be below eps0 = {e0}"));
            }
        }
        if self.field.flux == Some(0.0) || self.field.b_c == Some(0.0) {
            return bad("flux must be nonzero");
        }
        if self.reduction.m_protect > self.truncation.m_max {
            return bad("reduction.m_protect exceeds truncation.m_max");
        }
        if self.truncation.p_points == 0 || self.spectrum.xi_points == 0 {
            return bad("grids must be non-empty");
        }
        Ok(())
    }

    pub fn field_spec(&self) -> Result<FieldSpec, CliError> {
        let f = &self.field;
        let inline = f.flux.is_some() || f.b_c.is_some() || !f.b_modes.is_empty() || !f.a0.is_empty() || !f.a1.is_empty();
        let spec = match (&f.file, inline) {
            (Some(_), true) => return Err(CliError::Config("give either field.file or inline modes".into())),
            (None, false) => return Err(CliError::Config("no field given".into())),
            (Some(path), false) => landau_core::field::parse_field_file(path).map_err(|e| {
                CliError::Config(format!("{}: {e}", path.display()))
            })?,
            (None, true) => {
                let b_c = match (f.flux, f.b_c) {
                    (Some(phi), None) => 2.0 * std::f64::consts::PI * phi,
                    (None, Some(b)) => b,
                    _ => return Err(CliError::Config("give exactly one of field.flux, field.b_c".into())),
                };
                let index = |v: f64| -> Result<i32, CliError> {
                    if v.fract() == 0.0 && v.abs() < i32::MAX as f64 {
                        Ok(v as i32)
                    } else {
                        Err(CliError::Config(format!("mode index {v} is not an integer")))
                    }
                };
                let two = |rows: &[[f64; 4]]| -> Result<Fourier2, CliError> {
                    let mut m = Vec::new();
                    for r in rows {
                        m.push(((index(r[0])?, index(r[1])?), Complex64::new(r[2], r[3])));
                    }
                    Ok(Fourier2::from_modes(m))
                };
                let mut a0 = Vec::new();
                for r in &f.a0 {
                    a0.push((index(r[0])?, Complex64::new(r[1], r[2])));
                }
                FieldSpec::from_parts(b_c, two(&f.b_modes)?, Fourier1::from_modes(a0), two(&f.a1)?, None, None)
                    .map_err(|e| CliError::Config(e.to_string()))?
            }
        };
        Ok(spec)
    }

    pub fn gauge(&self) -> Result<GaugeData, CliError> {
        self.field_spec()?
            .gauge(self.field.eps0, self.field.eps1)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn table_options(&self) -> TableOptions {
        let t = &self.truncation;
        TableOptions {
            l_max: t.m_max,
            k_max: t.k_max,
            n_nodes: t.quad_nodes,
            p_points: t.p_points,
            tol_quad: t.tol_quad,
        }
    }

    pub fn reduction_options(&self) -> ReductionOptions {
        let r = &self.reduction;
        ReductionOptions {
            m_protect: r.m_protect,
            tol: r.tol,
            max_iter: r.max_iter,
            s: r.s,
            delta: r.delta,
        }
    }

    pub fn sweep_method(&self) -> SweepMethod {
        match self.spectrum.method {
            Method::Dense => SweepMethod::Dense,
            Method::Reduced => SweepMethod::Reduced(self.reduction_options()),
        }
    }

    /// Resolved configuration as TOML.
    pub fn echo(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::parse(&cfg.echo()).unwrap(), cfg);
    }

    #[test]
    fn inline_cosine_field() {
        let cfg = RunConfig::parse(
            r#"
            [field]
            flux = 1.0
            a0 = [[1, 0.5, 0.0], [-1, 0.5, 0.0]]
            eps0 = 0.01
            eps1 = 0.0
            "#,
        )
        .unwrap();
        cfg.validate().unwrap();
        let g = cfg.gauge().unwrap();
        assert!((g.b_c - 2.0 * std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(g.eps0, 0.01);
        assert!((g.a0.eval_re(0.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(RunConfig::parse("[field]\nfoo = 1").is_err());
        let mut cfg = RunConfig::default();
        cfg.reduction.tol = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.field.eps0 = Some(1e-3);
        cfg.field.eps1 = Some(1e-2);
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.field.flux = Some(0.0);
        assert!(cfg.validate().is_err());
        assert!(RunConfig::default().field_spec().is_err());
    }

    #[test]
    fn overrides_win() {
        let mut cfg = RunConfig::default();
        cfg.apply(&Overrides {
            eps0: Some(0.5),
            m_max: Some(4),
            m_protect: Some(1),
            ..Default::default()
        });
        assert_eq!(cfg.field.eps0, Some(0.5));
        assert_eq!(cfg.truncation.m_max, 4);
        assert_eq!(cfg.reduction.m_protect, 1);
    }
}
