use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use landau_core::effective::{band_measure, check_covariance, morse_check, SweepConfig};
use landau_core::eigenfunctions::{decay_report_on, reconstruct_with};
use landau_core::field::check_diophantine;
use landau_core::reduction::measure_norms_c2;
use landau_core::{assemble, reduce, reduce_family, sweep, GaugeData, MatrixElementTable};

use crate::config::RunConfig;
use crate::CliError;

const VERSION: &str = concat!("landau ", env!("CARGO_PKG_VERSION"));

/// Writes files under the output directory, each prefixed with the version
/// and the resolved configuration as `#` comment lines.
pub struct Output {
    dir: PathBuf,
    header: String,
    pub written: Vec<PathBuf>,
}

impl Output {
    pub fn new(cfg: &RunConfig, command: &str) -> Result<Self, CliError> {
        fs::create_dir_all(&cfg.out).map_err(|e| CliError::Output(format!("{}: {e}", cfg.out.display())))?;
        let mut header = format!("# {VERSION} {command}\n");
        for line in cfg.echo().lines() {
            header.push_str("# ");
            header.push_str(line);
            header.push('\n');
        }
        Ok(Self {
            dir: cfg.out.clone(),
            header,
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, format!("{}{}", self.header, body))
            .map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
        self.written.push(path);
        Ok(())
    }
}

fn table(cfg: &RunConfig, gauge: &GaugeData) -> Result<MatrixElementTable, CliError> {
    Ok(MatrixElementTable::build(gauge, &cfg.table_options())?)
}

fn f(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn decompose(cfg: &RunConfig) -> Result<Output, CliError> {
    let spec = cfg.field_spec()?;
    let gauge = cfg.gauge()?;
    let residual = spec.curl_residual(64)?;
    let mut s = String::new();
    writeln!(s, "b_c {}", f(gauge.b_c)).unwrap();
    writeln!(s, "flux {}", f(gauge.flux)).unwrap();
    writeln!(s, "beta {}", f(gauge.beta)).unwrap();
    writeln!(s, "eps0 {}", f(gauge.eps0)).unwrap();
    writeln!(s, "eps1 {}", f(gauge.eps1)).unwrap();
    writeln!(s, "curl_residual {}", f(residual)).unwrap();
    for (k, c) in gauge.a0.modes() {
        writeln!(s, "a0 {k} {} {}", f(c.re), f(c.im)).unwrap();
    }
    for ((j, k), c) in gauge.a1.modes() {
        writeln!(s, "a1 {j} {k} {} {}", f(c.re), f(c.im)).unwrap();
    }
    let mut out = Output::new(cfg, "decompose")?;
    out.write("gauge.txt", &s)?;
    Ok(out)
}

pub fn spectrum(cfg: &RunConfig) -> Result<Output, CliError> {
    let gauge = cfg.gauge()?;
    let table = table(cfg, &gauge)?;
    let sc = SweepConfig {
        m_max: cfg.truncation.m_max,
        n_window: cfg.truncation.n_window,
        xi_points: cfg.spectrum.xi_points,
        top_level: cfg.spectrum.top_level.unwrap_or(cfg.reduction.m_protect),
        edge_margin: cfg.spectrum.edge_margin,
        method: cfg.sweep_method(),
        lambda_tol: cfg.spectrum.lambda_tol,
    };
    let sw = sweep(&gauge, &table, &sc)?;
    let mut measures = String::from("level,measure,bands,crossings\n");
    for &level in sw.bands.keys() {
        let crossings = sw.crossings.iter().filter(|c| c.0 == level).count();
        writeln!(
            measures,
            "{level},{},{},{crossings}",
            f(band_measure(&sw, level)),
            sw.bands[&level].len()
        )
        .unwrap();
    }
    let lambda = sw.lambda_csv(sc.lambda_tol)?;
    let mut out = Output::new(cfg, "spectrum")?;
    out.write("spectrum.csv", &sw.points_csv())?;
    out.write("bands.csv", &sw.bands_csv())?;
    out.write("lambda.csv", &lambda)?;
    out.write("measure.csv", &measures)?;
    Ok(out)
}

pub struct EigfunSummary {
    pub lambda: f64,
    pub residual: f64,
}

pub fn eigfun(cfg: &RunConfig) -> Result<(Output, EigfunSummary), CliError> {
    let e = &cfg.eigfun;
    let gauge = cfg.gauge()?;
    let table = table(cfg, &gauge)?;
    let run = || -> landau_core::Result<_> {
        let op = assemble(e.xi, &gauge, &table, cfg.truncation.m_max, cfg.truncation.n_window)?;
        let st = reduce(&op, &cfg.reduction_options())?;
        reconstruct_with(&op, &st, e.m, e.k, e.tail_tol)
    };
    let field = run().map_err(|err| err.at_fiber(e.xi))?;

    let mut summary = String::new();
    writeln!(summary, "m {}", field.m).unwrap();
    writeln!(summary, "k {}", field.k).unwrap();
    writeln!(summary, "xi {}", f(field.xi)).unwrap();
    writeln!(summary, "lambda {}", f(field.lambda)).unwrap();
    writeln!(summary, "residual {}", f(field.residual)).unwrap();
    writeln!(summary, "n_tail {}", f(field.n_tail)).unwrap();
    writeln!(summary, "l_tail {}", f(field.l_tail)).unwrap();
    let ws = field.weighted_sum(e.delta);
    writeln!(summary, "weighted_sum {}", f(ws.total)).unwrap();
    writeln!(summary, "tail_ratio {}", f(ws.tail_ratio)).unwrap();

    let mut decay = String::from("n_dec,bound,slope,non_monotone,passes\n");
    for n in 1..=e.n_dec {
        let r = decay_report_on(&field, n, e.y_max, e.nx, e.ny);
        let slope = r.slope.map_or("nan".to_string(), f);
        writeln!(decay, "{n},{},{slope},{},{}", f(r.bound), r.non_monotone, r.passes).unwrap();
    }

    let mut coeffs = String::from("l,n,re,im\n");
    for l in 0..=field.m_max {
        for n in -(field.n_window as i32)..=field.n_window as i32 {
            let c = field.coeff(l, n);
            if c.norm() > 0.0 {
                writeln!(coeffs, "{l},{n},{},{}", f(c.re), f(c.im)).unwrap();
            }
        }
    }

    let mut out = Output::new(cfg, "eigfun")?;
    out.write("eigfun.txt", &summary)?;
    out.write("eigfun_coeffs.csv", &coeffs)?;
    out.write("eigfun_decay.csv", &decay)?;
    out.write("eigfun_grid.csv", &field.grid_csv(e.nx, e.ny, e.y_max))?;
    Ok((
        out,
        EigfunSummary {
            lambda: field.lambda,
            residual: field.residual,
        },
    ))
}

pub fn diagnostics(cfg: &RunConfig) -> Result<Output, CliError> {
    let d = &cfg.diagnostics;
    let gauge = cfg.gauge()?;
    let table = table(cfg, &gauge)?;
    let opts = cfg.reduction_options();
    let (mm, nw) = (cfg.truncation.m_max, cfg.truncation.n_window);

    let st = assemble(d.xi, &gauge, &table, mm, nw)
        .and_then(|op| reduce(&op, &opts))
        .map_err(|e| e.at_fiber(d.xi))?;

    let rep = check_diophantine(gauge.beta, d.diophantine_c, d.diophantine_kappa, d.diophantine_n_max);
    let mut dio = String::new();
    writeln!(dio, "beta {}", f(rep.beta)).unwrap();
    writeln!(dio, "c {}", f(rep.c)).unwrap();
    writeln!(dio, "kappa {}", f(rep.kappa)).unwrap();
    writeln!(dio, "n_max {}", rep.n_max).unwrap();
    writeln!(dio, "min_value {}", f(rep.min_value)).unwrap();
    writeln!(dio, "argmin {}", rep.argmin).unwrap();
    writeln!(dio, "violated {}", rep.violated).unwrap();
    for (p, q) in &rep.convergents {
        writeln!(dio, "convergent {p} {q}").unwrap();
    }

    let mut morse = String::from("level,critical_points,passes\n");
    for m in 0..=opts.m_protect {
        let r = morse_check(&table, m);
        writeln!(morse, "{},{},{}", r.level, r.critical_points, r.passes).unwrap();
    }

    let mut out = Output::new(cfg, "diagnostics")?;
    out.write("reduction_log.csv", &st.history_csv())?;
    out.write("diophantine.txt", &dio)?;
    out.write("morse.csv", &morse)?;

    if d.family_points > 0 {
        let fam = reduce_family(&gauge, &table, mm, nw, &opts, d.family_points)?;
        let mut norms = String::from("j,gamma,delta\n");
        for (j, (g, dl)) in measure_norms_c2(&fam.states, opts.s, opts.delta).into_iter().enumerate() {
            writeln!(norms, "{},{},{}", j + 1, f(g), f(dl)).unwrap();
        }
        let mut cov = String::from("level,max_deviation\n");
        for m in 0..=opts.m_protect {
            let dev = check_covariance(&fam, &gauge, &table, m, d.family_points.min(4))?;
            writeln!(cov, "{m},{}", f(dev)).unwrap();
        }
        out.write("norms_c2.csv", &norms)?;
        out.write("covariance.csv", &cov)?;
    }
    Ok(out)
}
