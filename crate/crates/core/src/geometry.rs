//! Pointwise calculus of conformal immersions: conformal factor, frames,
//! Gauss map, second fundamental form, mean curvature and the Willmore
//! operator in both its classical and divergence forms.

use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::jets::{field_derivative, field_gradient, jet, ImmersionField, Point};
use crate::multivector::MultiVector;
use crate::vecops::{axpy, dot, norm, scale, sub};

/// Conformality defect above which a point is flagged.
pub const CONFORMAL_TOL: f64 = 1e-6;

/// Relative accuracy of quantities built from two nested difference stencils.
pub const NESTED_FD_TOL: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct PointGeometry {
    pub x: Point,
    /// `λ = ½ log(½|∇Φ|²)`.
    pub lambda: f64,
    pub grad_lambda: [f64; 2],
    /// `e_j = e^{-λ} ∂_jΦ`.
    pub frame: [Vec<f64>; 2],
    /// Gauss map as a unit `(m-2)`-vector.
    pub normal: MultiVector,
    /// Unit tangent 2-vector `e_1 ∧ e_2`.
    pub star_normal: MultiVector,
    pub h11: Vec<f64>,
    pub h12: Vec<f64>,
    pub h22: Vec<f64>,
    pub mean_curvature: Vec<f64>,
    /// `∂_j n` from the moving-frame formula.
    pub grad_normal: [MultiVector; 2],
    /// `e^{-λ} |π_n ∇²Φ|`.
    pub grad_n_norm: f64,
    /// `((|∂_1Φ|² - |∂_2Φ|²) / |∇Φ|², 2 ∂_1Φ·∂_2Φ / |∇Φ|²)`.
    pub conformality_defect: [f64; 2],
    pub conformal_warning: bool,
    pub dphi: [Vec<f64>; 2],
    pub ddphi: [[Vec<f64>; 2]; 2],
    tangent_basis: [Vec<f64>; 2],
}

impl PointGeometry {
    pub fn dim(&self) -> usize {
        self.dphi[0].len()
    }

    pub fn h(&self, i: usize, j: usize) -> &[f64] {
        match (i, j) {
            (0, 0) => &self.h11,
            (1, 1) => &self.h22,
            _ => &self.h12,
        }
    }

    /// Orthogonal projection onto the tangent plane.
    pub fn project_tangent(&self, v: &[f64]) -> Vec<f64> {
        let [t1, t2] = &self.tangent_basis;
        let p = scale(t1, dot(v, t1));
        axpy(&p, dot(v, t2), t2)
    }

    /// `π_n = id - π_T`.
    pub fn project_normal(&self, v: &[f64]) -> Vec<f64> {
        sub(v, &self.project_tangent(v))
    }

    /// `∇⊥Φ = (-∂_2Φ, ∂_1Φ)`.
    pub fn grad_perp_phi(&self) -> [Vec<f64>; 2] {
        [scale(&self.dphi[1], -1.0), self.dphi[0].clone()]
    }

    /// `ΔΦ` from the second derivatives of the chart.
    pub fn laplacian_phi(&self) -> Vec<f64> {
        self.ddphi[0][0]
            .iter()
            .zip(&self.ddphi[1][1])
            .map(|(a, b)| a + b)
            .collect()
    }

    pub fn mean_curvature_norm(&self) -> f64 {
        norm(&self.mean_curvature)
    }

    pub fn conformality_defect_norm(&self) -> f64 {
        self.conformality_defect[0].hypot(self.conformality_defect[1])
    }
}

/// All first- and second-order geometry of `field` at `x`.
pub fn point_geometry(field: &ImmersionField, x: Point) -> Result<PointGeometry> {
    let j = jet(field, x, 2)?;
    let m = field.dim();
    let d1 = j.d1(0).to_vec();
    let d2 = j.d1(1).to_vec();
    let n1 = dot(&d1, &d1);
    let n2 = dot(&d2, &d2);
    let grad_sq = n1 + n2;
    let lambda = 0.5 * (0.5 * grad_sq).ln();
    if !(grad_sq > 0.0) || !lambda.is_finite() {
        return Err(LabError::Degenerate(x[0], x[1]));
    }
    let defect = [(n1 - n2) / grad_sq, 2.0 * dot(&d1, &d2) / grad_sq];

    let dd = [
        [j.d2(0, 0).to_vec(), j.d2(0, 1).to_vec()],
        [j.d2(1, 0).to_vec(), j.d2(1, 1).to_vec()],
    ];
    let grad_lambda = [
        (dot(&d1, &dd[0][0]) + dot(&d2, &dd[0][1])) / grad_sq,
        (dot(&d1, &dd[1][0]) + dot(&d2, &dd[1][1])) / grad_sq,
    ];

    let inv = (-lambda).exp();
    let frame = [scale(&d1, inv), scale(&d2, inv)];

    let t1 = scale(&d1, 1.0 / n1.sqrt());
    let w = axpy(&d2, -dot(&d2, &t1), &t1);
    let t2 = scale(&w, 1.0 / norm(&w));
    let mut g = PointGeometry {
        x,
        lambda,
        grad_lambda,
        frame,
        normal: MultiVector::zero(m),
        star_normal: MultiVector::zero(m),
        h11: Vec::new(),
        h12: Vec::new(),
        h22: Vec::new(),
        mean_curvature: Vec::new(),
        grad_normal: [MultiVector::zero(m), MultiVector::zero(m)],
        grad_n_norm: 0.0,
        conformality_defect: defect,
        conformal_warning: defect[0].hypot(defect[1]) > CONFORMAL_TOL,
        dphi: [d1, d2],
        ddphi: dd,
        tangent_basis: [t1, t2],
    };

    let e1 = MultiVector::from_vector(&g.frame[0]);
    let e2 = MultiVector::from_vector(&g.frame[1]);
    let tangent = e1.wedge(&e2)?;
    g.star_normal = tangent.scale(1.0 / tangent.norm());
    g.normal = g.star_normal.hodge_star()?;

    // π_n ∂_i∂_jΦ, then h_ij = e^{-2λ} π_n ∂_i∂_jΦ.
    let nd = [
        [g.project_normal(&g.ddphi[0][0]), g.project_normal(&g.ddphi[0][1])],
        [g.project_normal(&g.ddphi[1][0]), g.project_normal(&g.ddphi[1][1])],
    ];
    let inv2 = inv * inv;
    g.h11 = scale(&nd[0][0], inv2);
    g.h12 = scale(&nd[0][1], inv2);
    g.h22 = scale(&nd[1][1], inv2);
    g.mean_curvature = scale(&axpy(&g.h11, 1.0, &g.h22), 0.5);

    let frob: f64 = nd.iter().flatten().map(|v| dot(v, v)).sum();
    g.grad_n_norm = inv * frob.sqrt();

    for jdir in 0..2 {
        let a = MultiVector::from_vector(&scale(&nd[jdir][0], inv));
        let b = MultiVector::from_vector(&scale(&nd[jdir][1], inv));
        let sum = a.wedge(&e2)? + e1.wedge(&b)?;
        g.grad_normal[jdir] = sum.hodge_star()?;
    }
    Ok(g)
}

/// Mean curvature vector as a field on the chart.
pub fn mean_curvature_at(field: &ImmersionField, x: Point) -> Result<Vec<f64>> {
    Ok(point_geometry(field, x)?.mean_curvature)
}

/// Gauss map coefficients (dense blade array) as a field on the chart.
pub fn normal_at(field: &ImmersionField, x: Point) -> Result<Vec<f64>> {
    Ok(point_geometry(field, x)?.normal.coeffs().to_vec())
}

/// `(∂_1 H, ∂_2 H)` by differencing the mean-curvature field.
pub fn grad_mean_curvature(field: &ImmersionField, x: Point) -> Result<[Vec<f64>; 2]> {
    field_gradient(|p| mean_curvature_at(field, p), x, field.kappa())
}

/// The two components of `∇H - 3π_n(∇H) + ⋆(∇⊥n ∧ H)`.
pub fn willmore_current(field: &ImmersionField, x: Point) -> Result<[Vec<f64>; 2]> {
    let g = point_geometry(field, x)?;
    let dh = grad_mean_curvature(field, x)?;
    current_from(&g, &dh)
}

fn current_from(g: &PointGeometry, dh: &[Vec<f64>; 2]) -> Result<[Vec<f64>; 2]> {
    let h = MultiVector::from_vector(&g.mean_curvature);
    let perp = [-g.grad_normal[1].clone(), g.grad_normal[0].clone()];
    let mut out = [Vec::new(), Vec::new()];
    for j in 0..2 {
        let base = axpy(&dh[j], -3.0, &g.project_normal(&dh[j]));
        let twist = perp[j].wedge(&h)?.hodge_star()?.to_vector();
        out[j] = axpy(&base, 1.0, &twist);
    }
    Ok(out)
}

/// `div X` of the Willmore current, by differencing the current.
pub fn willmore_divergence(field: &ImmersionField, x: Point) -> Result<Vec<f64>> {
    let kappa = field.kappa();
    let d1 = field_derivative(|p| Ok(willmore_current(field, p)?[0].clone()), x, 0, kappa)?;
    let d2 = field_derivative(|p| Ok(willmore_current(field, p)?[1].clone()), x, 1, kappa)?;
    Ok(axpy(&d1, 1.0, &d2))
}

/// Classical Willmore operator
/// `Δ_⊥H + Σ_ij h_ij (h_ij · H) - 2|H|² H`, with
/// `Δ_⊥H = e^{-2λ} π_n div(π_n ∇H)`.
pub fn willmore_lhs_pointwise(field: &ImmersionField, x: Point) -> Result<Vec<f64>> {
    Ok(willmore_lhs_terms(field, x)?.total)
}

/// The Willmore operator split into its terms, for budget scaling.
#[derive(Debug, Clone)]
pub struct WillmoreTerms {
    pub normal_laplacian: Vec<f64>,
    pub curvature: Vec<f64>,
    pub cubic: Vec<f64>,
    pub total: Vec<f64>,
}

impl WillmoreTerms {
    pub fn scale(&self) -> f64 {
        norm(&self.normal_laplacian) + norm(&self.curvature) + norm(&self.cubic)
    }
}

pub fn willmore_lhs_terms(field: &ImmersionField, x: Point) -> Result<WillmoreTerms> {
    let kappa = field.kappa();
    let normal_grad = |p: Point, j: usize| -> Result<Vec<f64>> {
        let g = point_geometry(field, p)?;
        let dh = grad_mean_curvature(field, p)?;
        Ok(g.project_normal(&dh[j]))
    };
    let a = field_derivative(|p| normal_grad(p, 0), x, 0, kappa)?;
    let b = field_derivative(|p| normal_grad(p, 1), x, 1, kappa)?;
    let g = point_geometry(field, x)?;
    let div = axpy(&a, 1.0, &b);
    let normal_laplacian = scale(&g.project_normal(&div), (-2.0 * g.lambda).exp());
    let hv = &g.mean_curvature;
    let mut curvature = vec![0.0; hv.len()];
    for i in 0..2 {
        for j in 0..2 {
            let hij = g.h(i, j);
            curvature = axpy(&curvature, dot(hij, hv), hij);
        }
    }
    let cubic = scale(hv, -2.0 * dot(hv, hv));
    let total = axpy(&axpy(&normal_laplacian, 1.0, &curvature), 1.0, &cubic);
    Ok(WillmoreTerms {
        normal_laplacian,
        curvature,
        cubic,
        total,
    })
}

/// Tolerance for `|div X|` at `x`, relative to the size of the current.
pub fn divergence_budget(current_norm: f64, r: f64) -> f64 {
    NESTED_FD_TOL * (current_norm / r).max(1.0)
}

/// Tolerance for the classical Willmore residual given its term scale.
pub fn willmore_lhs_budget(term_scale: f64) -> f64 {
    NESTED_FD_TOL * term_scale.max(1.0)
}

/// Residuals of both forms of the Willmore equation at one point, with the
/// change observed between step factors `2κ` and `κ`.
#[derive(Debug, Clone)]
pub struct WillmoreCheck {
    pub x: Point,
    pub divergence: f64,
    pub divergence_budget: f64,
    pub divergence_halving: f64,
    pub lhs: f64,
    pub lhs_budget: f64,
    pub lhs_halving: f64,
}

impl WillmoreCheck {
    pub fn passes(&self) -> bool {
        self.divergence <= self.divergence_budget
            && self.lhs <= self.lhs_budget
            && self.divergence_halving <= self.divergence_budget
            && self.lhs_halving <= self.lhs_budget
    }

    /// Smallest ratio of residual to budget over the two forms.
    pub fn min_excess(&self) -> f64 {
        (self.divergence / self.divergence_budget).min(self.lhs / self.lhs_budget)
    }
}

pub fn willmore_check(field: &ImmersionField, x: Point) -> Result<WillmoreCheck> {
    let r = x[0].hypot(x[1]);
    let current = willmore_current(field, x)?;
    let cn = norm(&current[0]).hypot(norm(&current[1]));
    let div = willmore_divergence(field, x)?;
    let terms = willmore_lhs_terms(field, x)?;
    // Halving below κ makes the triple-nested stencils roundoff-bound, so
    // the step is compared against its double instead.
    let kappa = field.kappa();
    let other = if 2.0 * kappa <= 0.1 { 2.0 * kappa } else { kappa / 2.0 };
    let half = field.clone().with_kappa(other);
    let div_half = willmore_divergence(&half, x)?;
    let lhs_half = willmore_lhs_pointwise(&half, x)?;
    Ok(WillmoreCheck {
        x,
        divergence: norm(&div),
        divergence_budget: divergence_budget(cn, r),
        divergence_halving: norm(&sub(&div, &div_half)),
        lhs: norm(&terms.total),
        lhs_budget: willmore_lhs_budget(terms.scale()),
        lhs_halving: norm(&sub(&terms.total, &lhs_half)),
    })
}

fn check_annulus(field: &ImmersionField, r_in: f64, r_out: f64) -> Result<()> {
    if !(r_in >= field.r_min() && r_in < r_out && r_out <= field.r_max()) {
        return Err(LabError::InvalidAnnulus {
            r_in,
            r_out,
            r_min: field.r_min(),
            r_max: field.r_max(),
        });
    }
    Ok(())
}

/// `∫∫ f r dr dφ` over the annulus: trapezoid in φ, composite Simpson in r.
/// An odd radial count is raised to the next even one.
pub fn annulus_integral<F>(
    field: &ImmersionField,
    r_in: f64,
    r_out: f64,
    n_r: usize,
    n_phi: usize,
    integrand: F,
) -> Result<f64>
where
    F: Fn(Point) -> Result<f64> + Sync + Send,
{
    if n_r < 4 || n_phi < 4 {
        return Err(LabError::QuadratureTooCoarse { n_r, n_phi });
    }
    check_annulus(field, r_in, r_out)?;
    let n_r = n_r + n_r % 2;
    let dr = (r_out - r_in) / n_r as f64;
    let rings: Vec<f64> = (0..=n_r)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let r = r_in + i as f64 * dr;
            let mut s = 0.0;
            for k in 0..n_phi {
                let phi = 2.0 * std::f64::consts::PI * k as f64 / n_phi as f64;
                s += integrand([r * phi.cos(), r * phi.sin()])?;
            }
            Ok(s * 2.0 * std::f64::consts::PI / n_phi as f64 * r)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = rings[0] + rings[n_r];
    for (i, v) in rings.iter().enumerate().take(n_r).skip(1) {
        total += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    Ok(total * dr / 3.0)
}

/// `∫ |H|² e^{2λ} dx` over the annulus.
pub fn willmore_energy(
    field: &ImmersionField,
    r_in: f64,
    r_out: f64,
    n_r: usize,
    n_phi: usize,
) -> Result<f64> {
    annulus_integral(field, r_in, r_out, n_r, n_phi, |x| {
        let g = point_geometry(field, x)?;
        Ok(dot(&g.mean_curvature, &g.mean_curvature) * (2.0 * g.lambda).exp())
    })
}

/// `∫ |∇n|² dx` over the annulus.
pub fn gauss_energy(
    field: &ImmersionField,
    r_in: f64,
    r_out: f64,
    n_r: usize,
    n_phi: usize,
) -> Result<f64> {
    annulus_integral(field, r_in, r_out, n_r, n_phi, |x| {
        let g = point_geometry(field, x)?;
        Ok(g.grad_n_norm * g.grad_n_norm)
    })
}

/// Equally spaced points on the circle of radius `r`, starting on the
/// positive first axis.
pub fn circle_points(r: f64, n: usize) -> Vec<Point> {
    (0..n)
        .map(|k| {
            let phi = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            [r * phi.cos(), r * phi.sin()]
        })
        .collect()
}

pub const MIN_CIRCLE_SAMPLES: usize = 64;

/// `δ(r) = r sup_{|x|=r} |∇n|` on each radius, sampled at
/// `max(n_phi, 64)` angles.
pub fn delta_profile(
    field: &ImmersionField,
    radii: &[f64],
    n_phi: usize,
) -> Result<Vec<(f64, f64)>> {
    let n_phi = n_phi.max(MIN_CIRCLE_SAMPLES);
    radii
        .par_iter()
        .map(|&r| {
            let mut sup = 0.0_f64;
            for x in circle_points(r, n_phi) {
                sup = sup.max(point_geometry(field, x)?.grad_n_norm);
            }
            Ok((r, r * sup))
        })
        .collect()
}

/// Circle average of a scalar quantity at `n` points.
pub fn circle_mean<F>(r: f64, n: usize, f: F) -> Result<f64>
where
    F: Fn(Point) -> Result<f64> + Sync + Send,
{
    let vals = circle_points(r, n)
        .into_par_iter()
        .map(&f)
        .collect::<Result<Vec<_>>>()?;
    Ok(vals.iter().sum::<f64>() / n as f64)
}

/// Circle supremum of a scalar quantity at `n` points.
pub fn circle_max<F>(r: f64, n: usize, f: F) -> Result<f64>
where
    F: Fn(Point) -> Result<f64> + Sync + Send,
{
    let vals = circle_points(r, n)
        .into_par_iter()
        .map(&f)
        .collect::<Result<Vec<_>>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}
