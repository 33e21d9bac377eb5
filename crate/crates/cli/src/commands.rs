//! The subcommands. Each one turns a [`RunConfig`] into the text that is
//! written to the output once at the end.

use serde::Serialize;
use serde_json::Value;
use willmore_lab::analysis::{expansion_report, residue_spread, ReportOptions};
use willmore_lab::geometry::{
    delta_profile, gauss_energy, point_geometry, willmore_energy, MIN_CIRCLE_SAMPLES,
};
use willmore_lab::identities::{verify_field, IdentityCheckResult};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Report,
    Residue,
    Verify,
    Energy,
    Dump,
    Delta,
}

/// Text to emit, plus an error to report after it has been written.
#[derive(Debug)]
pub struct Output {
    pub text: String,
    pub failure: Option<CliError>,
}

impl Output {
    fn ok(text: String) -> Self {
        Output {
            text,
            failure: None,
        }
    }
}

pub fn run(command: Command, cfg: &RunConfig) -> Result<Output, CliError> {
    match command {
        Command::Report => report(cfg).map(Output::ok),
        Command::Residue => residue(cfg).map(Output::ok),
        Command::Verify => verify(cfg),
        Command::Energy => energy(cfg).map(Output::ok),
        Command::Dump => dump(cfg).map(Output::ok),
        Command::Delta => delta(cfg).map(Output::ok),
    }
}

/// Pretty JSON with a trailing newline; refuses NaN and infinities, which
/// serde_json would otherwise turn into `null`.
pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let v = serde_json::to_value(value).map_err(|e| CliError::NonFinite(e.to_string()))?;
    check_finite(&v, "$")?;
    let mut text = serde_json::to_string_pretty(&v).expect("a Value always serializes");
    text.push('\n');
    Ok(text)
}

fn check_finite(v: &Value, path: &str) -> Result<(), CliError> {
    match v {
        Value::Null => Err(CliError::NonFinite(path.to_string())),
        Value::Array(items) => items
            .iter()
            .enumerate()
            .try_for_each(|(i, x)| check_finite(x, &format!("{path}[{i}]"))),
        Value::Object(map) => map
            .iter()
            .try_for_each(|(k, x)| check_finite(x, &format!("{path}.{k}"))),
        _ => Ok(()),
    }
}

fn residue_radii(cfg: &RunConfig) -> Vec<f64> {
    let [a, b] = cfg.annulus;
    vec![a, (a * b).sqrt(), b]
}

fn circle_samples(cfg: &RunConfig) -> usize {
    cfg.nphi.max(MIN_CIRCLE_SAMPLES)
}

fn report(cfg: &RunConfig) -> Result<String, CliError> {
    let opts = ReportOptions {
        tol: cfg.tol,
        residue_radii: residue_radii(cfg),
        residue_samples: circle_samples(cfg),
    };
    to_json(&expansion_report(&cfg.field, &opts)?)
}

#[derive(Serialize)]
struct ResidueRow {
    radius: f64,
    value: Vec<f64>,
    error: f64,
    reliable: bool,
}

#[derive(Serialize)]
struct ResidueTable {
    surface: String,
    samples: usize,
    residues: Vec<ResidueRow>,
    mean: Vec<f64>,
    max_deviation: f64,
    relative_spread: f64,
}

fn residue(cfg: &RunConfig) -> Result<String, CliError> {
    let samples = circle_samples(cfg);
    let spread = residue_spread(&cfg.field, &residue_radii(cfg), samples)?;
    to_json(&ResidueTable {
        surface: cfg.field.name().to_string(),
        samples,
        relative_spread: spread.relative(),
        residues: spread
            .residues
            .iter()
            .map(|r| ResidueRow {
                radius: r.radius,
                value: r.value.clone(),
                error: r.error,
                reliable: r.reliable,
            })
            .collect(),
        mean: spread.mean,
        max_deviation: spread.max_deviation,
    })
}

#[derive(Serialize)]
struct VerifySummary {
    surface: String,
    seed: u64,
    total: usize,
    failed: usize,
    results: Vec<IdentityCheckResult>,
}

fn verify(cfg: &RunConfig) -> Result<Output, CliError> {
    let [a, b] = cfg.annulus;
    let results = verify_field(&cfg.field, a, b, cfg.points, cfg.seed)?;
    let failed = results.iter().filter(|r| !r.pass).count();
    let total = results.len();
    let text = if wants_csv(cfg) {
        verify_csv(&results)?
    } else {
        to_json(&VerifySummary {
            surface: cfg.field.name().to_string(),
            seed: cfg.seed,
            total,
            failed,
            results,
        })?
    };
    Ok(Output {
        text,
        failure: (failed > 0).then_some(CliError::Verification { failed, total }),
    })
}

fn wants_csv(cfg: &RunConfig) -> bool {
    cfg.out
        .as_ref()
        .and_then(|p| p.extension())
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn csv_text(header: &[String], rows: Vec<Vec<String>>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.into());
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn finite(x: f64, what: &str) -> Result<String, CliError> {
    if x.is_finite() {
        Ok(format!("{x:?}"))
    } else {
        Err(CliError::NonFinite(what.to_string()))
    }
}

fn verify_csv(results: &[IdentityCheckResult]) -> Result<String, CliError> {
    let header: Vec<String> = ["name", "x1", "x2", "residual", "tolerance", "pass", "seed"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows = results
        .iter()
        .map(|r| {
            Ok(vec![
                r.name.clone(),
                finite(r.point[0], "x1")?,
                finite(r.point[1], "x2")?,
                finite(r.residual, &r.name)?,
                finite(r.tolerance, &r.name)?,
                r.pass.to_string(),
                r.seed.map(|s| s.to_string()).unwrap_or_default(),
            ])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    csv_text(&header, rows)
}

#[derive(Serialize)]
struct EnergyRow {
    nr: usize,
    nphi: usize,
    willmore: f64,
    gauss: f64,
}

#[derive(Serialize)]
struct EnergyTable {
    surface: String,
    annulus: [f64; 2],
    willmore: f64,
    gauss: f64,
    /// Relative change between the two finest levels.
    willmore_change: f64,
    gauss_change: f64,
    convergence: Vec<EnergyRow>,
}

fn relative_change(coarse: f64, fine: f64) -> f64 {
    if coarse == fine {
        0.0
    } else {
        (fine - coarse).abs() / fine.abs().max(coarse.abs())
    }
}

fn energy(cfg: &RunConfig) -> Result<String, CliError> {
    let [a, b] = cfg.annulus;
    let mut rows = Vec::new();
    for level in 0..3 {
        let (nr, nphi) = (cfg.nr << level, cfg.nphi << level);
        rows.push(EnergyRow {
            nr,
            nphi,
            willmore: willmore_energy(&cfg.field, a, b, nr, nphi)?,
            gauss: gauss_energy(&cfg.field, a, b, nr, nphi)?,
        });
    }
    let (prev, last) = (&rows[1], &rows[2]);
    to_json(&EnergyTable {
        surface: cfg.field.name().to_string(),
        annulus: cfg.annulus,
        willmore: last.willmore,
        gauss: last.gauss,
        willmore_change: relative_change(prev.willmore, last.willmore),
        gauss_change: relative_change(prev.gauss, last.gauss),
        convergence: rows,
    })
}

/// Column names of the `dump` table for ambient dimension `m`.
pub fn dump_header(m: usize) -> Vec<String> {
    let mut h = vec!["x1".to_string(), "x2".into(), "lambda".into()];
    h.extend((1..=m).map(|k| format!("H_{k}")));
    h.extend(["grad_n_norm".into(), "defect_1".into(), "defect_2".into()]);
    h
}

fn dump(cfg: &RunConfig) -> Result<String, CliError> {
    let [a, b] = cfg.annulus;
    let mut rows = Vec::new();
    for i in 0..cfg.nr {
        let r = a + (b - a) * i as f64 / (cfg.nr - 1) as f64;
        for k in 0..cfg.nphi {
            let phi = 2.0 * std::f64::consts::PI * k as f64 / cfg.nphi as f64;
            let x = [r * phi.cos(), r * phi.sin()];
            let g = point_geometry(&cfg.field, x)?;
            let mut row = vec![finite(x[0], "x1")?, finite(x[1], "x2")?];
            row.push(finite(g.lambda, "lambda")?);
            for h in &g.mean_curvature {
                row.push(finite(*h, "H")?);
            }
            row.push(finite(g.grad_n_norm, "grad_n_norm")?);
            row.push(finite(g.conformality_defect[0], "defect_1")?);
            row.push(finite(g.conformality_defect[1], "defect_2")?);
            rows.push(row);
        }
    }
    csv_text(&dump_header(cfg.field.dim()), rows)
}

fn delta(cfg: &RunConfig) -> Result<String, CliError> {
    let [a, b] = cfg.annulus;
    let n = cfg.nr;
    let radii: Vec<f64> = (0..n)
        .map(|i| b * (a / b).powf(i as f64 / (n - 1) as f64))
        .collect();
    let rows = delta_profile(&cfg.field, &radii, cfg.nphi)?
        .into_iter()
        .map(|(r, d)| Ok(vec![finite(r, "r")?, finite(d, "delta")?]))
        .collect::<Result<Vec<_>, CliError>>()?;
    csv_text(&["r".to_string(), "delta".to_string()], rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_output_rejects_nan() {
        #[derive(Serialize)]
        struct S {
            a: Vec<f64>,
        }
        let err = to_json(&S {
            a: vec![1.0, f64::NAN],
        })
        .unwrap_err();
        assert_eq!(err.to_string(), "output contains a non-finite number at $.a[1]");
        assert!(to_json(&S { a: vec![1.0] }).unwrap().ends_with("}\n"));
    }

    #[test]
    fn dump_columns() {
        assert_eq!(
            dump_header(4).join(","),
            "x1,x2,lambda,H_1,H_2,H_3,H_4,grad_n_norm,defect_1,defect_2"
        );
    }
}
