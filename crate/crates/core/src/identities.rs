//! Pointwise checks of the algebraic identities satisfied by conformal
//! immersions: frame relations, projection formulas, the algebraic core of
//! the conservative reformulation and the perturbed harmonic map equation
//! for the Gauss map.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::geometry::{grad_mean_curvature, normal_at, point_geometry, PointGeometry};
use crate::jets::{field_laplacian, ImmersionField, Point};
use crate::multivector::{MultiVector, MAX_DIM, MIN_DIM};
use crate::vecops::{axpy, dist, dot, norm, scale, sub};
use crate::zoo::random_rotation;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheckResult {
    pub name: String,
    pub point: Point,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl IdentityCheckResult {
    pub fn new(name: impl Into<String>, point: Point, residual: f64, tolerance: f64) -> Self {
        IdentityCheckResult {
            name: name.into(),
            point,
            residual,
            tolerance,
            pass: residual <= tolerance,
            seed: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    /// Residual divided by tolerance.
    pub fn excess(&self) -> f64 {
        self.residual / self.tolerance
    }
}

pub const FRAME_TOL: f64 = 1e-8;
pub const PROJECTION_TOL: f64 = 1e-7;
pub const LEMMA_TOL: f64 = 1e-5;
pub const HARMONIC_TOL: f64 = 1e-3;

fn mv(v: &[f64]) -> MultiVector {
    MultiVector::from_vector(v)
}

/// `⋆(n∧e₁) = e₂`, `⋆(n∧e₂) = -e₁`, `⋆(e₁∧e₂) = n` on the computed frame.
pub fn check_frame_relations(field: &ImmersionField, x: Point) -> Result<Vec<IdentityCheckResult>> {
    let g = point_geometry(field, x)?;
    let e1 = mv(&g.frame[0]);
    let e2 = mv(&g.frame[1]);
    let n = &g.normal;
    let r1 = n.wedge(&e1)?.hodge_star()?.max_abs_diff(&e2);
    let r2 = n.wedge(&e2)?.hodge_star()?.max_abs_diff(&-e1.clone());
    let r3 = e1.wedge(&e2)?.hodge_star()?.max_abs_diff(n);
    Ok(vec![
        IdentityCheckResult::new("star(n^e1)=e2", x, r1, FRAME_TOL),
        IdentityCheckResult::new("star(n^e2)=-e1", x, r2, FRAME_TOL),
        IdentityCheckResult::new("star(e1^e2)=n", x, r3, FRAME_TOL),
    ])
}

/// `(⋆n)·(V∧∇Φ) = V·∇⊥Φ`, `(⋆n)•(V∧∇Φ) = π_nV∧∇⊥Φ` componentwise, and
/// `Σ_j (V∧∇⊥_jΦ)•∇⊥_jΦ = e^{2λ}(π_TV + 2π_nV)`.
pub fn check_projection_formulas(
    field: &ImmersionField,
    x: Point,
    v: &[f64],
) -> Result<Vec<IdentityCheckResult>> {
    let g = point_geometry(field, x)?;
    projection_formulas_at(&g, v)
}

fn projection_formulas_at(g: &PointGeometry, v: &[f64]) -> Result<Vec<IdentityCheckResult>> {
    let x = g.x;
    let el = g.lambda.exp();
    let vv = mv(v);
    let perp = g.grad_perp_phi();
    let pn = mv(&g.project_normal(v));
    let mut out = Vec::new();
    for j in 0..2 {
        let dphi = mv(&g.dphi[j]);
        let vd = vv.wedge(&dphi)?;
        let lhs = g.star_normal.inner(&vd)?;
        let rhs = dot(v, &perp[j]);
        out.push(IdentityCheckResult::new(
            format!("starn.(V^dPhi)_{}", j + 1),
            x,
            (lhs - rhs).abs(),
            PROJECTION_TOL * el * norm(v).max(1.0),
        ));
        let lhs = g.star_normal.bullet(&vd)?;
        let rhs = pn.wedge(&mv(&perp[j]))?;
        out.push(IdentityCheckResult::new(
            format!("starn*(V^dPhi)_{}", j + 1),
            x,
            lhs.max_abs_diff(&rhs),
            PROJECTION_TOL * el * norm(v).max(1.0),
        ));
    }
    let mut lhs = MultiVector::zero(g.dim());
    for p in &perp {
        let pp = mv(p);
        lhs += &vv.wedge(&pp)?.bullet(&pp)?;
    }
    let pt = g.project_tangent(v);
    let pn_v = g.project_normal(v);
    let rhs = scale(&axpy(&pt, 2.0, &pn_v), (2.0 * g.lambda).exp());
    out.push(IdentityCheckResult::new(
        "(V^dperpPhi)*dperpPhi",
        x,
        dist(&lhs.to_vector(), &rhs) + lhs.grade_part(0).norm(),
        PROJECTION_TOL * el * el * norm(v).max(1.0),
    ));
    Ok(out)
}

/// Random polynomial field `R² → R^m` of degree at most 3.
#[derive(Debug, Clone)]
pub struct PolynomialField {
    pub seed: u64,
    /// Coefficients per component, monomials `x₁^a x₂^b` with `a + b <= 3`.
    coeffs: Vec<[f64; 10]>,
}

const MONOMIALS: [(i32, i32); 10] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
];

impl PolynomialField {
    pub fn random(dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs = (0..dim)
            .map(|_| {
                let mut c = [0.0; 10];
                for v in &mut c {
                    *v = rng.gen_range(-1.0..1.0);
                }
                c
            })
            .collect();
        PolynomialField { seed, coeffs }
    }

    pub fn zero(dim: usize) -> Self {
        PolynomialField {
            seed: 0,
            coeffs: vec![[0.0; 10]; dim],
        }
    }

    pub fn eval(&self, x: Point) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|c| {
                MONOMIALS
                    .iter()
                    .zip(c)
                    .map(|((a, b), k)| k * x[0].powi(*a) * x[1].powi(*b))
                    .sum()
            })
            .collect()
    }
}

/// With `A := L·∇Φ` and `B := L∧∇Φ + 2H∧∇⊥Φ`:
/// `A = -(⋆n)·B⊥`, `B = -(⋆n)•B⊥ + (⋆n)A⊥` and
/// `-2ΔΦ = A·∇⊥Φ - B•∇⊥Φ`, where `(B₁, B₂)⊥ = (-B₂, B₁)`.
pub fn check_lemma_a1(
    field: &ImmersionField,
    l: &PolynomialField,
    x: Point,
) -> Result<Vec<IdentityCheckResult>> {
    let g = point_geometry(field, x)?;
    let lv = l.eval(x);
    let lm = mv(&lv);
    let hm = mv(&g.mean_curvature);
    let perp = g.grad_perp_phi();
    let a: Vec<f64> = (0..2).map(|j| dot(&lv, &g.dphi[j])).collect();
    let b: Vec<MultiVector> = (0..2)
        .map(|j| -> Result<MultiVector> {
            Ok(lm.wedge(&mv(&g.dphi[j]))? + hm.wedge(&mv(&perp[j]))?.scale(2.0))
        })
        .collect::<Result<_>>()?;
    let a_perp = [-a[1], a[0]];
    let b_perp = [-b[1].clone(), b[0].clone()];

    let el = g.lambda.exp();
    let weight = 1.0 + norm(&lv) + norm(&g.mean_curvature);
    let tol1 = LEMMA_TOL * el * weight;
    let tol2 = LEMMA_TOL * el * el * weight;
    let mut out = Vec::new();
    for j in 0..2 {
        let lhs = -g.star_normal.inner(&b_perp[j])?;
        out.push(
            IdentityCheckResult::new(format!("A=-starn.Bperp_{}", j + 1), x, (a[j] - lhs).abs(), tol1)
                .with_seed(l.seed),
        );
        let rhs = -g.star_normal.bullet(&b_perp[j])? + g.star_normal.scale(a_perp[j]);
        out.push(
            IdentityCheckResult::new(
                format!("B=-starn*Bperp+starn Aperp_{}", j + 1),
                x,
                b[j].max_abs_diff(&rhs),
                tol1,
            )
            .with_seed(l.seed),
        );
    }
    let mut rhs = vec![0.0; g.dim()];
    for j in 0..2 {
        rhs = axpy(&rhs, a[j], &perp[j]);
        let bullet = b[j].bullet(&mv(&perp[j]))?;
        rhs = sub(&rhs, &bullet.to_vector());
    }
    let lhs = scale(&g.laplacian_phi(), -2.0);
    out.push(
        IdentityCheckResult::new("-2LapPhi=A.dperpPhi-B*dperpPhi", x, dist(&lhs, &rhs), tol2)
            .with_seed(l.seed),
    );
    Ok(out)
}

/// `ΔΦ = 2e^{2λ}H`.
pub fn check_laplacian(field: &ImmersionField, x: Point) -> Result<IdentityCheckResult> {
    let g = point_geometry(field, x)?;
    let e2l = (2.0 * g.lambda).exp();
    let rhs = scale(&g.mean_curvature, 2.0 * e2l);
    Ok(IdentityCheckResult::new(
        "LapPhi=2e^2l H",
        x,
        dist(&g.laplacian_phi(), &rhs),
        1e-6 * e2l * (1.0 + norm(&g.mean_curvature)),
    ))
}

/// `Δn + |∇n|² n = 2⋆e^λ[e₁∧π_n∂₂H - e₂∧π_n∂₁H] - 2⋆e^{2λ} h₁₂∧(h₁₁-h₂₂)`,
/// with `Δn` from differencing the Gauss map.
pub fn check_perturbed_harmonic(field: &ImmersionField, x: Point) -> Result<IdentityCheckResult> {
    let g = point_geometry(field, x)?;
    let lap = MultiVector::from_coeffs(
        g.dim(),
        field_laplacian(|p| normal_at(field, p), x, field.kappa())?,
    );
    let gn2 = g.grad_n_norm * g.grad_n_norm;
    let lhs = &lap + &g.normal.scale(gn2);

    let dh = grad_mean_curvature(field, x)?;
    let e1 = mv(&g.frame[0]);
    let e2 = mv(&g.frame[1]);
    let el = g.lambda.exp();
    let twist = (e1.wedge(&mv(&g.project_normal(&dh[1])))?
        - e2.wedge(&mv(&g.project_normal(&dh[0])))?)
    .hodge_star()?
    .scale(2.0 * el);
    let shear = mv(&g.h12)
        .wedge(&mv(&sub(&g.h11, &g.h22)))?
        .hodge_star()?
        .scale(-2.0 * el * el);
    let rhs = &twist + &shear;
    let scale_sum = lap.norm() + gn2 + twist.norm() + shear.norm();
    Ok(IdentityCheckResult::new(
        "Lapn+|dn|^2n",
        x,
        lhs.max_abs_diff(&rhs),
        HARMONIC_TOL * scale_sum.max(1.0),
    ))
}

fn compute_projection_sign(m: usize) -> Result<f64> {
    if !(MIN_DIM..=MAX_DIM).contains(&m) {
        return Err(LabError::UnsupportedDimension(m));
    }
    let mut sign: Option<f64> = None;
    let mut rng = ChaCha8Rng::seed_from_u64(m as u64);
    for trial in 0..4u64 {
        let rot = random_rotation(m, 1000 + trial);
        let col = |j: usize| -> Vec<f64> { (0..m).map(|i| rot[(i, j)]).collect() };
        let (t1, t2) = (col(0), col(1));
        let normal = mv(&t1).wedge(&mv(&t2))?.hodge_star()?;
        let mut inputs: Vec<Vec<f64>> = (0..m)
            .map(|k| {
                let mut v = vec![0.0; m];
                v[k] = 1.0;
                v
            })
            .collect();
        inputs.push((0..m).map(|_| rng.gen_range(-1.0..1.0)).collect());
        for v in inputs {
            let tangent = axpy(&scale(&t1, dot(&v, &t1)), dot(&v, &t2), &t2);
            let expected = sub(&v, &tangent);
            let candidate = normal.interior(&normal.interior(&mv(&v))?)?.to_vector();
            if norm(&expected) < 1e-8 {
                if norm(&candidate) > 1e-10 {
                    return Err(LabError::InconsistentSign(m));
                }
                continue;
            }
            let s = if dot(&expected, &candidate) >= 0.0 { 1.0 } else { -1.0 };
            if dist(&expected, &scale(&candidate, s)) > 1e-10 {
                return Err(LabError::InconsistentSign(m));
            }
            match sign {
                None => sign = Some(s),
                Some(prev) if prev != s => return Err(LabError::InconsistentSign(m)),
                _ => {}
            }
        }
    }
    sign.ok_or(LabError::InconsistentSign(m))
}

/// The sign `s` with `π_nV = s · n⌐(n⌐V)` in `R^m`, found by brute force on
/// random frames and memoized.
pub fn pin_interior_projection_sign(m: usize) -> Result<f64> {
    static SIGNS: [OnceLock<Result<f64>>; MAX_DIM + 1] = [const { OnceLock::new() }; MAX_DIM + 1];
    if m > MAX_DIM {
        return Err(LabError::UnsupportedDimension(m));
    }
    SIGNS[m].get_or_init(|| compute_projection_sign(m)).clone()
}

/// Seeded points in the annulus `r_in <= |x| <= r_out`.
pub fn sample_points(r_in: f64, r_out: f64, n: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let r = rng.gen_range(r_in..=r_out);
            let phi = rng.gen_range(0.0..2.0 * PI);
            [r * phi.cos(), r * phi.sin()]
        })
        .collect()
}

/// Seeded unit vector in `R^m`.
pub fn random_unit_vector(m: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let v: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = norm(&v);
        if n > 1e-3 && n <= 1.0 {
            return scale(&v, 1.0 / n);
        }
    }
}

/// Every pointwise identity at `n_points` seeded points of the annulus.
pub fn verify_field(
    field: &ImmersionField,
    r_in: f64,
    r_out: f64,
    n_points: usize,
    seed: u64,
) -> Result<Vec<IdentityCheckResult>> {
    let mut out = Vec::new();
    for (i, x) in sample_points(r_in, r_out, n_points, seed)
        .into_iter()
        .enumerate()
    {
        let sub_seed = seed.wrapping_mul(1_000_003).wrapping_add(i as u64);
        out.extend(check_frame_relations(field, x)?);
        let v = random_unit_vector(field.dim(), sub_seed);
        out.extend(
            check_projection_formulas(field, x, &v)?
                .into_iter()
                .map(|r| r.with_seed(sub_seed)),
        );
        let l = PolynomialField::random(field.dim(), sub_seed);
        out.extend(check_lemma_a1(field, &l, x)?);
        out.push(check_laplacian(field, x)?);
        out.push(check_perturbed_harmonic(field, x)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    #[test]
    fn projection_sign_depends_on_dimension_parity() {
        assert_eq!(pin_interior_projection_sign(3), Ok(1.0));
        assert_eq!(pin_interior_projection_sign(4), Ok(-1.0));
        assert_eq!(pin_interior_projection_sign(5), Ok(1.0));
        assert!(pin_interior_projection_sign(9).is_err());
    }

    #[test]
    fn plane_frame_relations_are_exact() {
        let f = zoo::plane(3);
        for r in check_frame_relations(&f, [0.3, 0.2]).unwrap() {
            assert!(r.residual < 1e-14, "{r:?}");
        }
    }

    #[test]
    fn tangent_vector_kills_the_contraction() {
        let f = zoo::plane(4);
        let g = point_geometry(&f, [0.2, 0.1]).unwrap();
        let results = projection_formulas_at(&g, &g.frame[0].clone()).unwrap();
        for r in results.iter().filter(|r| r.name.starts_with("starn*")) {
            assert_eq!(r.residual, 0.0);
        }
    }

    #[test]
    fn normal_vector_pairs_to_zero() {
        let f = zoo::plane(3);
        let g = point_geometry(&f, [0.2, 0.1]).unwrap();
        let results = projection_formulas_at(&g, &[0.0, 0.0, 1.0]).unwrap();
        assert!(results.iter().all(|r| r.pass));
        let perp = g.grad_perp_phi();
        assert_eq!(dot(&[0.0, 0.0, 1.0], &perp[0]), 0.0);
    }

    #[test]
    fn zero_l_on_minimal_surface_reduces_to_harmonicity() {
        let f = zoo::catenoid();
        let results = check_lemma_a1(&f, &PolynomialField::zero(3), [0.5, 0.1]).unwrap();
        assert!(results.iter().all(|r| r.pass), "{results:?}");
    }

    #[test]
    fn plane_perturbed_harmonic_is_trivial() {
        let r = check_perturbed_harmonic(&zoo::plane(3), [0.2, 0.3]).unwrap();
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn polynomial_field_is_seeded() {
        let a = PolynomialField::random(4, 5).eval([0.1, 0.2]);
        let b = PolynomialField::random(4, 5).eval([0.1, 0.2]);
        let c = PolynomialField::random(4, 6).eval([0.1, 0.2]);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn sample_points_stay_in_annulus() {
        for x in sample_points(0.05, 0.5, 50, 1) {
            let r = x[0].hypot(x[1]);
            assert!((0.05..=0.5 + 1e-15).contains(&r));
        }
    }
}
