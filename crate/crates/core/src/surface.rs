//! JSON description of zoo surfaces.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::jets::ImmersionField;
use crate::zoo;

/// A complex coefficient written either as a real number or `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coeff {
    Real(f64),
    Pair([f64; 2]),
}

impl From<Coeff> for Complex64 {
    fn from(c: Coeff) -> Self {
        match c {
            Coeff::Real(r) => Complex64::new(r, 0.0),
            Coeff::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

fn complex(cs: &[Coeff]) -> Vec<Complex64> {
    cs.iter().map(|&c| c.into()).collect()
}

fn default_dim() -> usize {
    3
}

fn default_branch() -> i32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SurfaceSpec {
    Plane {
        #[serde(default = "default_dim")]
        dim: usize,
    },
    SpherePatch {},
    Catenoid {},
    InvertedCatenoid {
        #[serde(default = "default_branch")]
        branch: i32,
    },
    CoveredInvertedCatenoid {
        theta0: u32,
        #[serde(default = "default_branch")]
        branch: i32,
    },
    WeierstrassMinimal {
        f: Vec<Coeff>,
        g: Vec<Coeff>,
    },
    /// `base` padded to `R^m` and rotated, either by an explicit row-major
    /// matrix or by a seeded random rotation (identity if neither is given).
    EmbeddedVariant {
        base: Box<SurfaceSpec>,
        m: usize,
        #[serde(default)]
        rotation: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        seed: Option<u64>,
    },
    QuarticGraph {},
    TruncatedExpansion {
        theta0: u32,
        a: Vec<Coeff>,
        #[serde(default)]
        b: Vec<Coeff>,
        #[serde(default)]
        c: Vec<Coeff>,
    },
    HolomorphicGraph {
        p: Vec<Coeff>,
    },
}

impl SurfaceSpec {
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn build(&self) -> Result<ImmersionField> {
        match self {
            SurfaceSpec::Plane { dim } => {
                if !(3..=8).contains(dim) {
                    return Err(LabError::UnsupportedDimension(*dim));
                }
                Ok(zoo::plane(*dim))
            }
            SurfaceSpec::SpherePatch {} => Ok(zoo::sphere_patch()),
            SurfaceSpec::Catenoid {} => Ok(zoo::catenoid()),
            SurfaceSpec::InvertedCatenoid { branch } => zoo::inverted_catenoid(*branch),
            SurfaceSpec::CoveredInvertedCatenoid { theta0, branch } => {
                zoo::precompose_power(&zoo::inverted_catenoid(*branch)?, *theta0)
            }
            SurfaceSpec::WeierstrassMinimal { f, g } => {
                zoo::weierstrass_minimal(&complex(f), &complex(g))
            }
            SurfaceSpec::EmbeddedVariant {
                base,
                m,
                rotation,
                seed,
            } => {
                let base = base.build()?;
                if !(3..=8).contains(m) {
                    return Err(LabError::UnsupportedDimension(*m));
                }
                let rot = match (rotation, seed) {
                    (Some(_), Some(_)) => {
                        return Err(LabError::InvalidSurface(
                            "give either rotation or seed, not both".into(),
                        ))
                    }
                    (Some(rows), None) => {
                        if rows.len() != *m || rows.iter().any(|r| r.len() != *m) {
                            return Err(LabError::InvalidSurface(format!(
                                "rotation must be {m}x{m}"
                            )));
                        }
                        DMatrix::from_fn(*m, *m, |i, j| rows[i][j])
                    }
                    (None, Some(s)) => zoo::random_rotation(*m, *s),
                    (None, None) => DMatrix::identity(*m, *m),
                };
                zoo::embed_in_higher_codim(&base, *m, &rot)
            }
            SurfaceSpec::QuarticGraph {} => Ok(zoo::quartic_graph()),
            SurfaceSpec::TruncatedExpansion { theta0, a, b, c } => {
                let a = complex(a);
                let pad = |v: &[Coeff]| {
                    let mut out = complex(v);
                    if out.is_empty() {
                        out = vec![Complex64::new(0.0, 0.0); a.len()];
                    }
                    out
                };
                zoo::truncated_expansion(*theta0, &a, &pad(b), &pad(c))
            }
            SurfaceSpec::HolomorphicGraph { p } => Ok(zoo::holomorphic_graph(&complex(p))),
        }
    }
}
