//! Quantities attached to an isolated singularity of a conformal immersion:
//! the residue of the Willmore current, the branch order, the leading and
//! sub-leading expansion coefficients, curvature profiles near the puncture
//! and a removability verdict.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::geometry::{circle_points, point_geometry, willmore_current, MIN_CIRCLE_SAMPLES};
use crate::jets::{jet, ImmersionField, Point};
use crate::multivector::MultiVector;
use crate::vecops::{dist, dot, norm, scale, sub};

/// Relative tolerance of the classifier.
pub const DEFAULT_TOL: f64 = 1e-3;

/// Largest radius of the extrapolation ladder.
pub const LADDER_TOP: f64 = 0.3;
/// Number of halvings below `LADDER_TOP`.
pub const LADDER_DEPTH: usize = 10;

/// Minimum signal-to-noise ratio of the leading Fourier projection.
pub const MIN_SNR: f64 = 10.0;

/// Largest admissible condition number of the expansion normal equations.
pub const MAX_CONDITION: f64 = 1e8;

/// Residue magnitude below which a quadrature error is not worth flagging.
pub const NEGLIGIBLE_RESIDUE: f64 = 1e-6;

const CIRCLE_SAMPLES: usize = 64;

/// Default circles for the residue and its spread.
pub const DEFAULT_RESIDUE_RADII: [f64; 3] = [0.1, 0.2, 0.4];

/// `r_k = 0.3 · 2^{-k}` for `k = 0..=10`, keeping the rungs whose stencils stay
/// well inside the field's domain. Decreasing order.
pub fn ladder(field: &ImmersionField) -> Vec<f64> {
    (0..=LADDER_DEPTH)
        .map(|k| LADDER_TOP * 0.5f64.powi(k as i32))
        .filter(|&r| r >= 2.0 * field.r_min() && r <= 0.5 * field.r_max())
        .collect()
}

fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Least-squares slope of `log y` against `log x`; `None` if any `y` is not
/// positive or fewer than two points are given.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 || ys.iter().any(|y| !(*y > 0.0) || !y.is_finite()) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    Some(fit_line(&lx, &ly).0)
}

#[derive(Debug, Clone)]
pub struct Residue {
    pub radius: f64,
    pub samples: usize,
    pub value: Vec<f64>,
    /// `|c(n) - c(n/2)|`.
    pub error: f64,
    pub reliable: bool,
}

/// Flux of the Willmore current through the circle `|x| = rho`, by the
/// trapezoid rule on `n_samples` (at least 64, rounded up to even) points.
pub fn residue(field: &ImmersionField, rho: f64, n_samples: usize) -> Result<Residue> {
    if n_samples < MIN_CIRCLE_SAMPLES {
        return Err(LabError::Precondition(format!(
            "residue needs at least {MIN_CIRCLE_SAMPLES} samples, got {n_samples}"
        )));
    }
    let n = n_samples + n_samples % 2;
    let flux: Vec<Vec<f64>> = circle_points(rho, n)
        .into_par_iter()
        .map(|x| {
            let [x1, x2] = willmore_current(field, x)?;
            let (c, s) = (x[0] / rho, x[1] / rho);
            Ok(x1.iter().zip(&x2).map(|(a, b)| c * a + s * b).collect())
        })
        .collect::<Result<_>>()?;
    let m = field.dim();
    let mut full = vec![0.0; m];
    let mut half = vec![0.0; m];
    for (k, v) in flux.iter().enumerate() {
        for i in 0..m {
            full[i] += v[i];
            if k % 2 == 0 {
                half[i] += v[i];
            }
        }
    }
    let w = 2.0 * PI * rho / n as f64;
    let value = scale(&full, w);
    let coarse = scale(&half, 2.0 * w);
    let error = dist(&value, &coarse);
    let mag = norm(&value);
    Ok(Residue {
        radius: rho,
        samples: n,
        reliable: !(error > 0.1 * mag && mag > NEGLIGIBLE_RESIDUE),
        value,
        error,
    })
}

#[derive(Debug, Clone)]
pub struct ResidueSpread {
    pub mean: Vec<f64>,
    pub max_deviation: f64,
    pub residues: Vec<Residue>,
}

impl ResidueSpread {
    /// `max_deviation / |mean|`, or 0 when both vanish.
    pub fn relative(&self) -> f64 {
        let m = norm(&self.mean);
        if self.max_deviation == 0.0 {
            0.0
        } else {
            self.max_deviation / m
        }
    }
}

/// Residues on several circles, their mean and largest pairwise difference.
pub fn residue_spread(
    field: &ImmersionField,
    radii: &[f64],
    n_samples: usize,
) -> Result<ResidueSpread> {
    if radii.len() < 3 {
        return Err(LabError::Precondition(format!(
            "residue spread needs at least 3 radii, got {}",
            radii.len()
        )));
    }
    let residues = radii
        .iter()
        .map(|&r| residue(field, r, n_samples))
        .collect::<Result<Vec<_>>>()?;
    let m = field.dim();
    let mut mean = vec![0.0; m];
    for r in &residues {
        for i in 0..m {
            mean[i] += r.value[i] / residues.len() as f64;
        }
    }
    let mut max_deviation = 0.0_f64;
    for a in &residues {
        for b in &residues {
            max_deviation = max_deviation.max(dist(&a.value, &b.value));
        }
    }
    Ok(ResidueSpread {
        mean,
        max_deviation,
        residues,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchOrder {
    pub theta0: u32,
    pub slope: f64,
    /// Distance of the slope from the nearest integer.
    pub defect: f64,
}

fn lambda_at(field: &ImmersionField, x: Point) -> Result<f64> {
    let j = jet(field, x, 1)?;
    let g = dot(j.d1(0), j.d1(0)) + dot(j.d1(1), j.d1(1));
    let lambda = 0.5 * (0.5 * g).ln();
    if !lambda.is_finite() {
        return Err(LabError::Degenerate(x[0], x[1]));
    }
    Ok(lambda)
}

fn circle_average<F>(r: f64, n: usize, f: F) -> Result<f64>
where
    F: Fn(Point) -> Result<f64> + Sync + Send,
{
    let vals = circle_points(r, n)
        .into_par_iter()
        .map(&f)
        .collect::<Result<Vec<_>>>()?;
    Ok(vals.iter().sum::<f64>() / n as f64)
}

/// Branch order from the growth of the circle-averaged conformal factor:
/// `λ ≈ (θ₀ - 1) log r`.
pub fn branch_order(field: &ImmersionField) -> Result<BranchOrder> {
    let radii = ladder(field);
    if radii.len() < 3 {
        return Err(LabError::Precondition(
            "field domain too small for the radius ladder".into(),
        ));
    }
    let lambdas = radii
        .iter()
        .map(|&r| circle_average(r, 16, |x| lambda_at(field, x)))
        .collect::<Result<Vec<_>>>()?;
    let logs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let (slope, _) = fit_line(&logs, &lambdas);
    let nearest = slope.round();
    let defect = (slope - nearest).abs();
    if defect > 0.2 || nearest < 0.0 {
        return Err(LabError::NotBranchPoint { slope, defect });
    }
    Ok(BranchOrder {
        theta0: nearest as u32 + 1,
        slope,
        defect,
    })
}

/// Complex `m`-vector as real and imaginary parts.
pub fn split(v: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    (v.iter().map(|c| c.re).collect(), v.iter().map(|c| c.im).collect())
}

fn complex_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

#[derive(Debug, Clone)]
pub struct LeadingFit {
    pub theta0: u32,
    pub a: Vec<Complex64>,
    /// `A(r)` on each ladder rung, decreasing radii.
    pub per_radius: Vec<(f64, Vec<Complex64>)>,
    pub snr: f64,
    /// `θ₀^{-1} lim e^λ / r^{θ₀-1}`, an independent estimate of `|A¹|`.
    pub scale_from_lambda: f64,
}

impl LeadingFit {
    /// `|A¹|`, the norm of the real part.
    pub fn scale(&self) -> f64 {
        norm(&split(&self.a).0)
    }
}

/// Fourier coefficients of `(∂_1 - i∂_2)Φ` on the circle of radius `r`, for
/// frequencies `-n/2 .. n/2`.
fn circle_spectrum(field: &ImmersionField, r: f64, n: usize) -> Result<Vec<(i64, Vec<Complex64>)>> {
    let pts = circle_points(r, n);
    let w: Vec<Vec<Complex64>> = pts
        .into_par_iter()
        .map(|x| {
            let j = jet(field, x, 1)?;
            Ok(j.d1(0)
                .iter()
                .zip(j.d1(1))
                .map(|(a, b)| Complex64::new(*a, -*b))
                .collect())
        })
        .collect::<Result<_>>()?;
    let m = field.dim();
    let half = n as i64 / 2;
    Ok((-half + 1..=half)
        .map(|k| {
            let mut c = vec![Complex64::new(0.0, 0.0); m];
            for (s, ws) in w.iter().enumerate() {
                let phase = Complex64::from_polar(1.0, -2.0 * PI * (k * s as i64) as f64 / n as f64);
                for i in 0..m {
                    c[i] += ws[i] * phase;
                }
            }
            (k, c.into_iter().map(|v| v / n as f64).collect())
        })
        .collect())
}

/// Leading coefficient `A` of `Φ ≈ Re(A x^θ₀)`, from the Fourier mode
/// `θ₀ - 1` of `(∂_1 - i∂_2)Φ`, extrapolated linearly in `r` from the two
/// smallest ladder rungs.
pub fn fit_leading(field: &ImmersionField, theta0: u32) -> Result<LeadingFit> {
    if theta0 == 0 {
        return Err(LabError::Precondition("theta0 must be >= 1".into()));
    }
    let radii = ladder(field);
    if radii.len() < 2 {
        return Err(LabError::Precondition(
            "field domain too small for the radius ladder".into(),
        ));
    }
    let freq = theta0 as i64 - 1;
    let t = theta0 as f64;
    let mut per_radius = Vec::new();
    let mut snr = f64::INFINITY;
    for (idx, &r) in radii.iter().enumerate() {
        let spectrum = circle_spectrum(field, r, CIRCLE_SAMPLES)?;
        let mut signal = Vec::new();
        let mut noise_sq = 0.0;
        for (k, c) in spectrum {
            if k == freq {
                signal = c;
            } else {
                noise_sq += c.iter().map(|v| v.norm_sqr()).sum::<f64>();
            }
        }
        if idx + 1 == radii.len() {
            let noise = noise_sq.sqrt();
            snr = if noise == 0.0 {
                f64::INFINITY
            } else {
                complex_norm(&signal) / noise
            };
        }
        let denom = t * r.powi(theta0 as i32 - 1);
        per_radius.push((r, signal.into_iter().map(|c| c / denom).collect::<Vec<_>>()));
    }
    if snr < MIN_SNR {
        return Err(LabError::LowSnr(snr));
    }
    let n = per_radius.len();
    let small = &per_radius[n - 1].1;
    let next = &per_radius[n - 2].1;
    let a: Vec<Complex64> = small.iter().zip(next).map(|(s, b)| 2.0 * s - b).collect();

    let r_small = radii[n - 1];
    let r_next = radii[n - 2];
    let growth = |r: f64| -> Result<f64> {
        let mean = circle_average(r, 16, |x| lambda_at(field, x))?;
        Ok(mean.exp() / r.powi(theta0 as i32 - 1))
    };
    let scale_from_lambda = (2.0 * growth(r_small)? - growth(r_next)?) / t;
    Ok(LeadingFit {
        theta0,
        a,
        per_radius,
        snr,
        scale_from_lambda,
    })
}

/// Circle average of `Φ` on the smallest ladder rung, used as `Φ(0)`.
pub fn origin_estimate(field: &ImmersionField) -> Result<Vec<f64>> {
    let radii = ladder(field);
    let r = *radii.last().ok_or_else(|| {
        LabError::Precondition("field domain too small for the radius ladder".into())
    })?;
    let pts = circle_points(r, CIRCLE_SAMPLES);
    let mut acc = vec![0.0; field.dim()];
    for x in pts {
        let v = field.eval(x)?;
        for (a, b) in acc.iter_mut().zip(v) {
            *a += b / CIRCLE_SAMPLES as f64;
        }
    }
    Ok(acc)
}

fn complex_power_terms(x: Point, theta0: u32) -> (Complex64, Complex64, Complex64) {
    let z = Complex64::new(x[0], x[1]);
    let zt = z.powu(theta0);
    (zt, zt * z, zt * z.conj())
}

#[derive(Debug, Clone)]
pub struct ExpansionFit {
    pub origin: Vec<f64>,
    pub b: Vec<Complex64>,
    pub c: Vec<Complex64>,
    pub condition: f64,
    /// Growth exponent of `|Φ - Φ(0)|`.
    pub leading_exponent: Option<f64>,
    /// Growth exponent of the remainder divided by `r^{θ₀-1}`.
    pub remainder_exponent: Option<f64>,
}

impl ExpansionFit {
    pub fn exponents(&self) -> BTreeMap<String, f64> {
        let mut out = BTreeMap::new();
        if let Some(e) = self.leading_exponent {
            out.insert("leading".to_string(), e);
        }
        if let Some(e) = self.remainder_exponent {
            out.insert("remainder".to_string(), e);
        }
        out
    }
}

/// Inner and outer radius of the sample annulus used to fit `B` and `C`.
pub const EXPANSION_ANNULUS: (f64, f64) = (0.01, 0.2);
const EXPANSION_RINGS: usize = 12;

/// Sub-leading coefficients of
/// `Φ = Φ(0) + Re(A x^θ₀ + B x^{θ₀+1} + C |x|² x^{θ₀-1}) + …`.
///
/// For `θ₀ >= 2` the residual after `A` is divided by `r^{θ₀+1}` and fitted by
/// least squares to the Fourier modes `θ₀ + 1` (for `B`) and `θ₀ - 1` (for
/// `C`), each with a first-order radial correction. For `θ₀ = 1`, `B` and `C`
/// are reported as zero and only the exponents are measured.
pub fn fit_expansion(field: &ImmersionField, theta0: u32, a: &[Complex64]) -> Result<ExpansionFit> {
    let m = field.dim();
    if a.len() != m {
        return Err(LabError::DimensionMismatch {
            left: a.len(),
            right: m,
        });
    }
    let origin = origin_estimate(field)?;
    let zero = vec![Complex64::new(0.0, 0.0); m];
    let (b, c, condition) = if theta0 >= 2 {
        solve_sub_leading(field, theta0, a, &origin)?
    } else {
        (zero.clone(), zero, 1.0)
    };

    let rungs: Vec<f64> = ladder(field)
        .into_iter()
        .filter(|&r| r >= 0.018)
        .collect();
    let mut lead = Vec::new();
    let mut rem = Vec::new();
    for &r in &rungs {
        let mut sup_lead = 0.0_f64;
        let mut sup_rem = 0.0_f64;
        for x in circle_points(r, CIRCLE_SAMPLES) {
            let v = sub(&field.eval(x)?, &origin);
            let (zt, zt1, zc) = complex_power_terms(x, theta0);
            let model: Vec<f64> = (0..m)
                .map(|k| (a[k] * zt + b[k] * zt1 + c[k] * zc).re)
                .collect();
            sup_lead = sup_lead.max(norm(&v));
            sup_rem = sup_rem.max(dist(&v, &model));
        }
        lead.push(sup_lead);
        rem.push(sup_rem / r.powi(theta0 as i32 - 1));
    }
    Ok(ExpansionFit {
        origin,
        b,
        c,
        condition,
        leading_exponent: log_log_slope(&rungs, &lead),
        remainder_exponent: log_log_slope(&rungs, &rem),
    })
}

type SubLeading = (Vec<Complex64>, Vec<Complex64>, f64);

fn solve_sub_leading(
    field: &ImmersionField,
    theta0: u32,
    a: &[Complex64],
    origin: &[f64],
) -> Result<SubLeading> {
    let m = field.dim();
    let (lo, hi) = EXPANSION_ANNULUS;
    let lo = lo.max(2.0 * field.r_min());
    let radii: Vec<f64> = (0..EXPANSION_RINGS)
        .map(|i| lo * (hi / lo).powf(i as f64 / (EXPANSION_RINGS - 1) as f64))
        .collect();
    let samples: Vec<(Point, f64)> = radii
        .iter()
        .flat_map(|&r| circle_points(r, CIRCLE_SAMPLES).into_iter().map(move |x| (x, r)))
        .collect();
    let t = theta0 as f64;
    let rows = samples.len();
    let design = DMatrix::from_fn(rows, 8, |i, j| {
        let (x, r) = samples[i];
        let phi = x[1].atan2(x[0]);
        let base = match j % 4 {
            0 => ((t + 1.0) * phi).cos(),
            1 => -((t + 1.0) * phi).sin(),
            2 => ((t - 1.0) * phi).cos(),
            _ => -((t - 1.0) * phi).sin(),
        };
        if j < 4 {
            base
        } else {
            r * base
        }
    });
    let normal = design.transpose() * &design;
    let sv = normal.singular_values();
    let condition = sv.max() / sv.min();
    if !(condition <= MAX_CONDITION) {
        return Err(LabError::IllConditioned(condition));
    }
    let chol = normal
        .clone()
        .cholesky()
        .ok_or(LabError::IllConditioned(condition))?;

    let values: Vec<Vec<f64>> = samples
        .par_iter()
        .map(|(x, _)| field.eval(*x))
        .collect::<Result<_>>()?;
    let mut b = Vec::with_capacity(m);
    let mut c = Vec::with_capacity(m);
    for k in 0..m {
        let rhs = DVector::from_fn(rows, |i, _| {
            let (x, r) = samples[i];
            let (zt, _, _) = complex_power_terms(x, theta0);
            (values[i][k] - origin[k] - (a[k] * zt).re) / r.powi(theta0 as i32 + 1)
        });
        let sol = chol.solve(&(design.transpose() * rhs));
        b.push(Complex64::new(sol[0], sol[1]));
        c.push(Complex64::new(sol[2], sol[3]));
    }
    Ok((b, c, condition))
}

/// `lim e^λ / r^{θ₀-1}` and `lim f` with `f = 2θ₀ r^{θ₀-1} e^{-λ}`, both by
/// linear extrapolation from the two smallest ladder rungs.
pub fn conformal_limits(field: &ImmersionField, theta0: u32) -> Result<(f64, f64)> {
    let radii = ladder(field);
    if radii.len() < 2 {
        return Err(LabError::Precondition(
            "field domain too small for the radius ladder".into(),
        ));
    }
    let n = radii.len();
    let t = theta0 as f64;
    let mut growth = [0.0; 2];
    let mut weight = [0.0; 2];
    for (slot, &r) in [radii[n - 1], radii[n - 2]].iter().enumerate() {
        let p = r.powi(theta0 as i32 - 1);
        growth[slot] = circle_average(r, 16, |x| Ok(lambda_at(field, x)?.exp() / p))?;
        weight[slot] = circle_average(r, 16, |x| Ok(2.0 * t * p * (-lambda_at(field, x)?).exp()))?;
    }
    Ok((
        2.0 * growth[0] - growth[1],
        2.0 * weight[0] - weight[1],
    ))
}

#[derive(Debug, Clone)]
pub struct ProfileRow {
    pub x: Point,
    pub weighted_h: Vec<f64>,
    pub predicted: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct WeightedProfile {
    pub rows: Vec<ProfileRow>,
    pub max_deviation: f64,
    pub f_limit: f64,
    pub growth_limit: f64,
    /// Log-log slope of the circle maximum of `|e^λ H|` against `r`.
    pub slope: Option<f64>,
    /// Circle maximum of `|e^λ H|` on each radius.
    pub magnitudes: Vec<(f64, f64)>,
}

impl WeightedProfile {
    /// `f_limit · lim e^λ / r^{θ₀-1}`, which equals `2θ₀` for a conformal chart.
    pub fn consistency(&self) -> f64 {
        self.f_limit * self.growth_limit
    }
}

/// Compares `e^λ H` with `f(x) Re[C (x/|x|)^{θ₀-1}]` on the given radii.
pub fn weighted_h_profile(
    field: &ImmersionField,
    theta0: u32,
    c: &[Complex64],
    radii: &[f64],
) -> Result<WeightedProfile> {
    if theta0 < 2 {
        return Err(LabError::Precondition(
            "weighted curvature profile needs theta0 >= 2".into(),
        ));
    }
    let (growth_limit, f_limit) = conformal_limits(field, theta0)?;
    let t = theta0 as f64;
    let mut rows = Vec::new();
    let mut magnitudes = Vec::new();
    let mut max_deviation = 0.0_f64;
    for &r in radii {
        let mut sup = 0.0_f64;
        for x in circle_points(r, 16) {
            let g = point_geometry(field, x)?;
            let el = g.lambda.exp();
            let weighted_h = scale(&g.mean_curvature, el);
            let f = 2.0 * t * r.powi(theta0 as i32 - 1) / el;
            let phase = Complex64::new(x[0] / r, x[1] / r).powu(theta0 - 1);
            let predicted: Vec<f64> = c.iter().map(|ck| f * (ck * phase).re).collect();
            max_deviation = max_deviation.max(dist(&weighted_h, &predicted));
            sup = sup.max(norm(&weighted_h));
            rows.push(ProfileRow {
                x,
                weighted_h,
                predicted,
            });
        }
        magnitudes.push((r, sup));
    }
    let (rs, ms): (Vec<f64>, Vec<f64>) = magnitudes.iter().cloned().unzip();
    Ok(WeightedProfile {
        rows,
        max_deviation,
        f_limit,
        growth_limit,
        slope: log_log_slope(&rs, &ms),
        magnitudes,
    })
}

#[derive(Debug, Clone)]
pub struct LogSingularity {
    /// `(r, sup_{|x|=r} |H + (c₀/4π) log|x||)`.
    pub compensated: Vec<(f64, f64)>,
    /// `(r, mean_{|x|=r} |H|)`.
    pub raw: Vec<(f64, f64)>,
    /// Coefficient `α` of the fit `|H| ≈ α log(1/r) + β` on the three
    /// smallest radii.
    pub log_coefficient: f64,
    /// `|c₀| / 4π`.
    pub expected_coefficient: f64,
}

impl LogSingularity {
    pub fn compensated_sup(&self) -> f64 {
        self.compensated.iter().map(|p| p.1).fold(0.0, f64::max)
    }

    /// Max over min of the compensated curvature across radii; 1 when it
    /// vanishes identically.
    pub fn compensated_ratio(&self) -> f64 {
        let max = self.compensated_sup();
        let min = self.compensated.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        if max == 0.0 {
            1.0
        } else {
            max / min
        }
    }

    /// `|H| / log(1/r)` on the smallest radius.
    pub fn raw_ratio_at_smallest(&self) -> f64 {
        let (r, h) = self
            .raw
            .iter()
            .cloned()
            .fold((f64::INFINITY, 0.0), |acc, p| if p.0 < acc.0 { p } else { acc });
        h / (1.0 / r).ln()
    }

    /// Relative mismatch between the measured and expected log coefficients.
    pub fn coefficient_mismatch(&self) -> f64 {
        if self.expected_coefficient == 0.0 {
            self.log_coefficient.abs()
        } else {
            (self.log_coefficient - self.expected_coefficient).abs() / self.expected_coefficient
        }
    }
}

/// Logarithmic growth of `H` near the puncture and its compensation by the
/// residue.
pub fn log_singularity_check(
    field: &ImmersionField,
    c0: &[f64],
    radii: &[f64],
) -> Result<LogSingularity> {
    let k = scale(c0, 1.0 / (4.0 * PI));
    let rows = radii
        .par_iter()
        .map(|&r| -> Result<(f64, f64, f64)> {
            let mut sup = 0.0_f64;
            let mut mean = 0.0;
            let pts = circle_points(r, 32);
            for x in &pts {
                let h = point_geometry(field, *x)?.mean_curvature;
                mean += norm(&h) / pts.len() as f64;
                let comp: Vec<f64> = h.iter().zip(&k).map(|(a, b)| a + b * r.ln()).collect();
                sup = sup.max(norm(&comp));
            }
            Ok((r, sup, mean))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut smallest = rows.clone();
    smallest.sort_by(|a, b| a.0.total_cmp(&b.0));
    smallest.truncate(3);
    let logs: Vec<f64> = smallest.iter().map(|p| (1.0 / p.0).ln()).collect();
    let means: Vec<f64> = smallest.iter().map(|p| p.2).collect();
    let log_coefficient = if smallest.len() >= 2 {
        fit_line(&logs, &means).0
    } else {
        f64::NAN
    };
    Ok(LogSingularity {
        compensated: rows.iter().map(|p| (p.0, p.1)).collect(),
        raw: rows.iter().map(|p| (p.0, p.2)).collect(),
        log_coefficient,
        expected_coefficient: norm(c0) / (4.0 * PI),
    })
}

/// Normalized circle average of the tangent 2-vector on the smallest ladder
/// rung.
pub fn tangent_plane_at_origin(field: &ImmersionField) -> Result<MultiVector> {
    let radii = ladder(field);
    let r = *radii.last().ok_or_else(|| {
        LabError::Precondition("field domain too small for the radius ladder".into())
    })?;
    let mut acc = MultiVector::zero(field.dim());
    for x in circle_points(r, CIRCLE_SAMPLES) {
        acc += &point_geometry(field, x)?.star_normal;
    }
    Ok(acc.scale(1.0 / acc.norm()))
}

/// Gauss map at the origin, `⋆` of [`tangent_plane_at_origin`].
pub fn normal_at_origin(field: &ImmersionField) -> Result<MultiVector> {
    tangent_plane_at_origin(field)?.hodge_star()
}

/// Projection onto the normal space of a unit tangent 2-vector `plane`:
/// `V + plane ⌐ (plane ⌐ V)`.
pub fn project_normal_to(plane: &MultiVector, v: &[f64]) -> Result<Vec<f64>> {
    let vv = MultiVector::from_vector(v);
    let tangent = plane.interior(&plane.interior(&vv)?)?;
    Ok((vv + tangent).to_vector())
}

/// Relative defects of the constraints on a fitted expansion. Each is zero
/// for an exact conformal expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpansionInvariants {
    /// `|A¹·A²| / |A¹|²`.
    pub orthogonality: f64,
    /// `||A¹| - |A²|| / |A¹|`.
    pub equal_norms: f64,
    /// `|π_{n(0)} A| / |A|`.
    pub normal_leak: f64,
    /// `max_k |c₀·A^k| / (|c₀| |A^k|)`, zero when `c₀` is negligible.
    pub residue_alignment: f64,
    /// `|C - π_{n(0)} C| / |A|`, present when `θ₀ >= 2`.
    pub spinning_tangent_leak: Option<f64>,
}

impl ExpansionInvariants {
    pub fn max(&self) -> f64 {
        [
            self.orthogonality,
            self.equal_norms,
            self.normal_leak,
            self.residue_alignment,
            self.spinning_tangent_leak.unwrap_or(0.0),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn expansion_invariants(
    field: &ImmersionField,
    report: &ExpansionReport,
) -> Result<ExpansionInvariants> {
    let plane = tangent_plane_at_origin(field)?;
    let (a1, a2) = (&report.A_re, &report.A_im);
    let (n1, n2) = (norm(a1), norm(a2));
    let a_norm = n1.hypot(n2);
    let leak = norm(&project_normal_to(&plane, a1)?).hypot(norm(&project_normal_to(&plane, a2)?));
    let c0_norm = norm(&report.c0);
    let residue_alignment = if c0_norm * report.scale < NEGLIGIBLE_RESIDUE {
        0.0
    } else {
        (dot(&report.c0, a1).abs() / (c0_norm * n1)).max(dot(&report.c0, a2).abs() / (c0_norm * n2))
    };
    let spinning_tangent_leak = if report.theta0 >= 2 {
        let mut leak = 0.0_f64;
        for part in [&report.C_re, &report.C_im] {
            let normal = project_normal_to(&plane, part)?;
            leak = leak.hypot(dist(part, &normal));
        }
        Some(leak / a_norm)
    } else {
        None
    };
    Ok(ExpansionInvariants {
        orthogonality: dot(a1, a2).abs() / (n1 * n1),
        equal_norms: (n1 - n2).abs() / n1,
        normal_leak: leak / a_norm,
        residue_alignment,
        spinning_tangent_leak,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Removable,
    LogSingularH,
    SpinningH,
    RegularBranchOrderLeap,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Removable => "removable",
            Verdict::LogSingularH => "log_singular_H",
            Verdict::SpinningH => "spinning_H",
            Verdict::RegularBranchOrderLeap => "regular_branch_order_leap",
        }
    }
}

/// Fitted data of an isolated singularity, as written by the `report` command.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[allow(non_snake_case)]
pub struct ExpansionReport {
    pub theta0: u32,
    pub A_re: Vec<f64>,
    pub A_im: Vec<f64>,
    pub B_re: Vec<f64>,
    pub B_im: Vec<f64>,
    pub C_re: Vec<f64>,
    pub C_im: Vec<f64>,
    pub c0: Vec<f64>,
    pub c0_spread: f64,
    pub f_limit: f64,
    pub exponents: BTreeMap<String, f64>,
    #[serde(with = "verdict_name")]
    pub verdict: Verdict,
    pub scale: f64,
}

mod verdict_name {
    use super::Verdict;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Verdict, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(v.as_str())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Verdict, D::Error> {
        let s = String::deserialize(d)?;
        [
            Verdict::Removable,
            Verdict::LogSingularH,
            Verdict::SpinningH,
            Verdict::RegularBranchOrderLeap,
        ]
        .into_iter()
        .find(|v| v.as_str() == s)
        .ok_or_else(|| D::Error::custom(format!("unknown verdict {s}")))
    }
}

impl ExpansionReport {
    pub fn a(&self) -> Vec<Complex64> {
        join(&self.A_re, &self.A_im)
    }

    pub fn b(&self) -> Vec<Complex64> {
        join(&self.B_re, &self.B_im)
    }

    pub fn c(&self) -> Vec<Complex64> {
        join(&self.C_re, &self.C_im)
    }
}

fn join(re: &[f64], im: &[f64]) -> Vec<Complex64> {
    re.iter().zip(im).map(|(a, b)| Complex64::new(*a, *b)).collect()
}

/// Verdict from the residue, the leading and the spinning coefficients.
/// Both tests are scale invariant: `|c₀| |A¹| < tol` and `|C| < tol |A|`.
pub fn classify(report: &ExpansionReport, tol: f64) -> Verdict {
    let a_norm = complex_norm(&report.a());
    let c_small = complex_norm(&report.c()) < tol * a_norm;
    let c0_small = norm(&report.c0) * report.scale < tol;
    match (report.theta0, c0_small, c_small) {
        (1, true, _) => Verdict::Removable,
        (1, false, _) => Verdict::LogSingularH,
        (_, true, true) => Verdict::Removable,
        (_, _, false) => Verdict::SpinningH,
        (_, false, true) => Verdict::RegularBranchOrderLeap,
    }
}

#[derive(Debug, Clone)]
pub struct ReportOptions {
    pub tol: f64,
    pub residue_radii: Vec<f64>,
    pub residue_samples: usize,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            tol: DEFAULT_TOL,
            residue_radii: DEFAULT_RESIDUE_RADII.to_vec(),
            residue_samples: MIN_CIRCLE_SAMPLES,
        }
    }
}

/// Branch order, expansion coefficients, residue and verdict in one pass.
pub fn expansion_report(field: &ImmersionField, opts: &ReportOptions) -> Result<ExpansionReport> {
    let order = branch_order(field)?;
    let lead = fit_leading(field, order.theta0)?;
    let exp = fit_expansion(field, order.theta0, &lead.a)?;
    let spread = residue_spread(field, &opts.residue_radii, opts.residue_samples)?;
    let (_, f_limit) = conformal_limits(field, order.theta0)?;
    let (a_re, a_im) = split(&lead.a);
    let (b_re, b_im) = split(&exp.b);
    let (c_re, c_im) = split(&exp.c);
    let mut report = ExpansionReport {
        theta0: order.theta0,
        scale: norm(&a_re),
        A_re: a_re,
        A_im: a_im,
        B_re: b_re,
        B_im: b_im,
        C_re: c_re,
        C_im: c_im,
        c0: spread.mean.clone(),
        c0_spread: spread.max_deviation,
        f_limit,
        exponents: exp
            .exponents()
            .into_iter()
            .filter(|(_, v)| v.is_finite())
            .collect(),
        verdict: Verdict::Removable,
    };
    report.verdict = classify(&report, opts.tol);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(theta0: u32, c0: f64, c: f64) -> ExpansionReport {
        ExpansionReport {
            theta0,
            A_re: vec![1.0, 0.0, 0.0],
            A_im: vec![0.0, -1.0, 0.0],
            B_re: vec![0.0; 3],
            B_im: vec![0.0; 3],
            C_re: vec![0.0, 0.0, c],
            C_im: vec![0.0; 3],
            c0: vec![0.0, 0.0, c0],
            c0_spread: 0.0,
            f_limit: 2.0,
            exponents: BTreeMap::new(),
            verdict: Verdict::Removable,
            scale: 1.0,
        }
    }

    #[test]
    fn classifier_truth_table() {
        assert_eq!(classify(&report(1, 0.0, 0.0), 1e-3), Verdict::Removable);
        assert_eq!(classify(&report(1, 50.0, 0.0), 1e-3), Verdict::LogSingularH);
        assert_eq!(classify(&report(2, 0.0, 0.0), 1e-3), Verdict::Removable);
        assert_eq!(classify(&report(2, 50.0, 0.0), 1e-3), Verdict::RegularBranchOrderLeap);
        assert_eq!(classify(&report(2, 0.0, 0.5), 1e-3), Verdict::SpinningH);
        assert_eq!(classify(&report(3, 50.0, 0.5), 1e-3), Verdict::SpinningH);
    }

    #[test]
    fn verdict_names() {
        let text = serde_json::to_string(&report(1, 0.0, 0.0)).unwrap();
        assert!(text.contains(r#""verdict":"removable""#));
        let mut r = report(1, 1.0, 0.0);
        r.verdict = Verdict::LogSingularH;
        let text = serde_json::to_string(&r).unwrap();
        assert!(text.contains(r#""verdict":"log_singular_H""#));
        let back: ExpansionReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn ladder_respects_domain() {
        let f = crate::zoo::plane(3);
        let l = ladder(&f);
        assert_eq!(l.len(), 11);
        assert_eq!(l[0], 0.3);
        let g = ImmersionField::new("narrow", 3, 0.01, 1.0, |x| Ok(vec![x[0], x[1], 0.0]));
        assert!(ladder(&g).iter().all(|r| *r >= 0.02));
    }

    #[test]
    fn log_log_slope_of_power() {
        let xs = [0.1, 0.2, 0.4];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(2.5)).collect();
        assert!((log_log_slope(&xs, &ys).unwrap() - 2.5).abs() < 1e-12);
        assert!(log_log_slope(&xs, &[1.0, 0.0, 1.0]).is_none());
    }

    #[test]
    fn normal_projection_by_interior_products() {
        let plane = MultiVector::blade(4, 0b0011, 1.0);
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(project_normal_to(&plane, &v).unwrap(), vec![0.0, 0.0, 3.0, 4.0]);
    }

    #[test]
    fn residue_needs_enough_samples_and_radii() {
        let f = crate::zoo::plane(3);
        assert!(matches!(residue(&f, 0.2, 32), Err(LabError::Precondition(_))));
        assert!(matches!(
            residue_spread(&f, &[0.1, 0.2], 64),
            Err(LabError::Precondition(_))
        ));
    }

    #[test]
    fn plane_residue_vanishes() {
        let f = crate::zoo::plane(3);
        let s = residue_spread(&f, &DEFAULT_RESIDUE_RADII, 64).unwrap();
        assert_eq!(s.mean, vec![0.0; 3]);
        assert_eq!(s.max_deviation, 0.0);
    }
}
