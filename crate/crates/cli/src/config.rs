//! Run configuration: a JSON config file merged with command-line flags.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use willmore_lab::{ImmersionField, SurfaceSpec};

use crate::error::CliError;

pub const DEFAULT_ANNULUS: [f64; 2] = [0.1, 0.4];
pub const DEFAULT_NR: usize = 32;
pub const DEFAULT_NPHI: usize = 64;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_POINTS: usize = 20;

/// Keys shared by the config file and the flags. Every key is optional so
/// that flags can fill in what the file leaves out.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub surface: Option<SurfaceArg>,
    pub annulus: Option<AnnulusArg>,
    pub nr: Option<usize>,
    pub nphi: Option<usize>,
    pub kappa: Option<f64>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub points: Option<usize>,
}

/// A surface given inline as an object, or as a string holding JSON or
/// `@path`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum SurfaceArg {
    Spec(SurfaceSpec),
    Text(String),
}

/// `[a, b]` or `"a,b"`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum AnnulusArg {
    Pair([f64; 2]),
    Text(String),
}

impl ConfigLayer {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("bad config {}: {e}", path.display())))
    }

    /// Values from `over` win.
    pub fn merged(self, over: ConfigLayer) -> ConfigLayer {
        ConfigLayer {
            surface: over.surface.or(self.surface),
            annulus: over.annulus.or(self.annulus),
            nr: over.nr.or(self.nr),
            nphi: over.nphi.or(self.nphi),
            kappa: over.kappa.or(self.kappa),
            tol: over.tol.or(self.tol),
            out: over.out.or(self.out),
            seed: over.seed.or(self.seed),
            points: over.points.or(self.points),
        }
    }
}

pub fn parse_annulus(text: &str) -> Result<[f64; 2], CliError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let bad = || CliError::Config(format!("annulus must be `a,b`, got `{text}`"));
    if parts.len() != 2 {
        return Err(bad());
    }
    let a = parts[0].parse().map_err(|_| bad())?;
    let b = parts[1].parse().map_err(|_| bad())?;
    Ok([a, b])
}

pub fn parse_surface(arg: &SurfaceArg) -> Result<SurfaceSpec, CliError> {
    let text = match arg {
        SurfaceArg::Spec(spec) => return Ok(spec.clone()),
        SurfaceArg::Text(t) => t,
    };
    let json = match text.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| CliError::Surface(format!("cannot read {path}: {e}")))?,
        None => text.clone(),
    };
    SurfaceSpec::from_json(&json).map_err(|e| CliError::Surface(e.to_string()))
}

/// A validated configuration with the surface already built.
#[derive(Debug)]
pub struct RunConfig {
    pub field: ImmersionField,
    pub annulus: [f64; 2],
    pub nr: usize,
    pub nphi: usize,
    pub tol: f64,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub points: usize,
}

impl RunConfig {
    pub fn resolve(layer: ConfigLayer) -> Result<Self, CliError> {
        let spec = parse_surface(
            layer
                .surface
                .as_ref()
                .ok_or_else(|| CliError::Config("no surface given (--surface)".into()))?,
        )?;
        let kappa = layer.kappa.unwrap_or(willmore_lab::jets::DEFAULT_KAPPA);
        if !(kappa > 0.0 && kappa <= 0.1) {
            return Err(CliError::Config(format!("kappa {kappa} outside (0, 0.1]")));
        }
        let field = spec
            .build()
            .map_err(|e| CliError::Surface(e.to_string()))?
            .with_kappa(kappa);
        let annulus = match &layer.annulus {
            None => DEFAULT_ANNULUS,
            Some(AnnulusArg::Pair(p)) => *p,
            Some(AnnulusArg::Text(t)) => parse_annulus(t)?,
        };
        let [r_in, r_out] = annulus;
        if !(field.r_min() <= r_in && r_in < r_out && r_out <= field.r_max()) {
            return Err(CliError::Config(format!(
                "annulus [{r_in}, {r_out}] must satisfy {} <= r_in < r_out <= {}",
                field.r_min(),
                field.r_max()
            )));
        }
        let nr = layer.nr.unwrap_or(DEFAULT_NR);
        let nphi = layer.nphi.unwrap_or(DEFAULT_NPHI);
        if nr < 4 || nphi < 4 {
            return Err(CliError::Config(format!(
                "quadrature counts must be >= 4, got nr = {nr}, nphi = {nphi}"
            )));
        }
        let tol = layer.tol.unwrap_or(willmore_lab::analysis::DEFAULT_TOL);
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(CliError::Config(format!("tol must be positive, got {tol}")));
        }
        let points = layer.points.unwrap_or(DEFAULT_POINTS);
        if points == 0 {
            return Err(CliError::Config("points must be positive".into()));
        }
        Ok(RunConfig {
            field,
            annulus,
            nr,
            nphi,
            tol,
            out: layer.out,
            seed: layer.seed.unwrap_or(DEFAULT_SEED),
            points,
        })
    }
}
