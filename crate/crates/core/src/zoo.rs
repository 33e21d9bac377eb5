//! Closed-form conformal immersions and the constructors that combine them.
//!
//! Every field is defined by composition of exact formulas; asymptotic
//! expansions are never used to define a field, only to test one.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{LabError, Result};
use crate::jets::{ImmersionField, Point};
use crate::multivector::{MAX_DIM, MIN_DIM};

/// Inner radius of the base charts. Constructors rescale it as needed.
pub const BASE_R_MIN: f64 = 1e-10;
/// Outer radius of the base charts.
pub const BASE_R_MAX: f64 = 2.0;

/// Ambient dilation applied to the inverted catenoid so that its leading
/// coefficient has `|A¹| = 1`.
pub const INVERTED_CATENOID_SCALE: f64 = 0.5;

/// `|Φ|` below which inversion is refused.
pub const INVERSION_POLE: f64 = 1e-12;

fn to_complex(x: Point) -> Complex64 {
    Complex64::new(x[0], x[1])
}

/// `x ↦ (x_1, x_2, 0, …, 0)` in `R^dim`.
pub fn plane(dim: usize) -> ImmersionField {
    ImmersionField::new("plane", dim, BASE_R_MIN, BASE_R_MAX, move |x| {
        let mut v = vec![0.0; dim];
        v[0] = x[0];
        v[1] = x[1];
        Ok(v)
    })
    .with_branch_order(1)
}

/// Inverse stereographic chart of the unit sphere,
/// `x ↦ (2x, |x|² - 1) / (1 + |x|²)`.
pub fn sphere_patch() -> ImmersionField {
    ImmersionField::new("sphere_patch", 3, BASE_R_MIN, BASE_R_MAX, |x| {
        let r2 = x[0] * x[0] + x[1] * x[1];
        let d = 1.0 + r2;
        Ok(vec![2.0 * x[0] / d, 2.0 * x[1] / d, (r2 - 1.0) / d])
    })
    .with_branch_order(1)
}

fn catenoid_with_axis_sign(axis_sign: f64) -> impl Fn(Point) -> Result<Vec<f64>> {
    move |x| {
        let r2 = x[0] * x[0] + x[1] * x[1];
        let c = 0.5 * (1.0 + 1.0 / r2);
        Ok(vec![c * x[0], c * x[1], axis_sign * 0.5 * r2.ln()])
    }
}

/// Log-polar chart of the catenoid with neck radius 1:
/// `r e^{iφ} ↦ (cosh(log r) cos φ, cosh(log r) sin φ, log r)`.
pub fn catenoid() -> ImmersionField {
    ImmersionField::new(
        "catenoid",
        3,
        BASE_R_MIN,
        BASE_R_MAX,
        catenoid_with_axis_sign(1.0),
    )
}

/// `p ↦ p / |p|²` applied after `field`.
pub fn invert(field: &ImmersionField) -> ImmersionField {
    let inner = field.raw();
    ImmersionField::new(
        format!("inverted({})", field.name()),
        field.dim(),
        field.r_min(),
        field.r_max(),
        move |x| {
            let p = inner(x)?;
            let n2: f64 = p.iter().map(|v| v * v).sum();
            if n2.sqrt() < INVERSION_POLE {
                return Err(LabError::InversionPole(x[0], x[1]));
            }
            Ok(p.into_iter().map(|v| v / n2).collect())
        },
    )
}

/// `s Φ`.
pub fn scale(field: &ImmersionField, s: f64) -> ImmersionField {
    let inner = field.raw();
    let mut out = ImmersionField::new(
        format!("scaled({}, {s})", field.name()),
        field.dim(),
        field.r_min(),
        field.r_max(),
        move |x| Ok(inner(x)?.into_iter().map(|v| v * s).collect()),
    );
    if let Some(t) = field.branch_order() {
        out = out.with_branch_order(t);
    }
    out.with_kappa(field.kappa())
}

/// Inversion of the catenoid end at `r → 0`, dilated so that `|A¹| = 1`.
/// `branch = -1` selects the mirror image in the axis direction.
pub fn inverted_catenoid(branch: i32) -> Result<ImmersionField> {
    let sign = match branch {
        1 => 1.0,
        -1 => -1.0,
        b => {
            return Err(LabError::InvalidSurface(format!(
                "branch must be +1 or -1, got {b}"
            )))
        }
    };
    let base = ImmersionField::new(
        "catenoid",
        3,
        BASE_R_MIN,
        BASE_R_MAX,
        catenoid_with_axis_sign(sign),
    );
    Ok(scale(&invert(&base), INVERTED_CATENOID_SCALE)
        .with_branch_order(1)
        .with_name(format!("inverted_catenoid({branch:+})")))
}

/// `x ↦ Φ(x^θ₀)` with the complex power on the chart.
pub fn precompose_power(field: &ImmersionField, theta0: u32) -> Result<ImmersionField> {
    if theta0 == 0 {
        return Err(LabError::InvalidSurface("theta0 must be >= 1".into()));
    }
    if theta0 == 1 {
        return Ok(field.clone());
    }
    let inner = field.raw();
    let root = 1.0 / theta0 as f64;
    let mut out = ImmersionField::new(
        format!("covered({}, {theta0})", field.name()),
        field.dim(),
        field.r_min().powf(root),
        field.r_max().powf(root),
        move |x| {
            let w = to_complex(x).powu(theta0);
            inner([w.re, w.im])
        },
    );
    if let Some(t) = field.branch_order() {
        out = out.with_branch_order(t * theta0);
    }
    Ok(out.with_kappa(field.kappa()))
}

/// `x ↦ Φ(e^{iα} x)`.
pub fn rotate_chart(field: &ImmersionField, alpha: f64) -> ImmersionField {
    let inner = field.raw();
    let rot = Complex64::from_polar(1.0, alpha);
    let mut out = ImmersionField::new(
        format!("chart_rotated({}, {alpha})", field.name()),
        field.dim(),
        field.r_min(),
        field.r_max(),
        move |x| {
            let w = to_complex(x) * rot;
            inner([w.re, w.im])
        },
    );
    if let Some(t) = field.branch_order() {
        out = out.with_branch_order(t);
    }
    out.with_kappa(field.kappa())
}

/// Complex polynomial, coefficient `k` multiplying `z^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial(pub Vec<Complex64>);

impl Polynomial {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        let mut p = Polynomial(coeffs);
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self.0.last().is_some_and(|c| *c == Complex64::new(0.0, 0.0)) {
            self.0.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Order of vanishing at 0; `None` for the zero polynomial.
    pub fn order_at_zero(&self) -> Option<usize> {
        self.0.iter().position(|c| *c != Complex64::new(0.0, 0.0))
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Polynomial(Vec::new());
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.0.len().max(other.0.len());
        let get = |p: &Self, k: usize| p.0.get(k).copied().unwrap_or_default();
        Polynomial::new((0..n).map(|k| get(self, k) + get(other, k)).collect())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Polynomial::new(self.0.iter().map(|c| c * s).collect())
    }

    /// Antiderivative vanishing at 0.
    pub fn integrate(&self) -> Self {
        let mut out = vec![Complex64::new(0.0, 0.0)];
        out.extend(
            self.0
                .iter()
                .enumerate()
                .map(|(k, c)| c / (k as f64 + 1.0)),
        );
        Polynomial::new(out)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.0
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }
}

/// Minimal immersion `Re ∫_0^z ((1-g²)f/2, i(1+g²)f/2, fg) dz` from
/// polynomial Weierstrass data.
pub fn weierstrass_minimal(f: &[Complex64], g: &[Complex64]) -> Result<ImmersionField> {
    let f = Polynomial::new(f.to_vec());
    let g = Polynomial::new(g.to_vec());
    let Some(ord) = f.order_at_zero() else {
        return Err(LabError::InvalidSurface(
            "Weierstrass data f vanishes identically".into(),
        ));
    };
    let one = Polynomial::new(vec![Complex64::new(1.0, 0.0)]);
    let g2 = g.mul(&g);
    let half = Complex64::new(0.5, 0.0);
    let i_half = Complex64::new(0.0, 0.5);
    let primitives = [
        one.add(&g2.scale(Complex64::new(-1.0, 0.0))).mul(&f).scale(half).integrate(),
        one.add(&g2).mul(&f).scale(i_half).integrate(),
        f.mul(&g).integrate(),
    ];
    Ok(ImmersionField::new(
        "weierstrass_minimal",
        3,
        BASE_R_MIN,
        BASE_R_MAX,
        move |x| {
            let z = to_complex(x);
            Ok(primitives.iter().map(|p| p.eval(z).re).collect())
        },
    )
    .with_branch_order(ord as u32 + 1))
}

/// Largest entry of `|RᵀR - I|`.
pub fn orthogonality_defect(rotation: &DMatrix<f64>) -> f64 {
    let n = rotation.ncols();
    let gram = rotation.transpose() * rotation - DMatrix::<f64>::identity(n, n);
    gram.amax()
}

/// Orthogonal matrix from the QR factorization of a seeded random matrix.
pub fn random_rotation(m: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw = DMatrix::<f64>::from_fn(m, m, |_, _| rng.gen_range(-1.0..1.0));
    let qr = raw.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..m {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Pads `field` with zeros to `R^{m_target}` and applies `rotation`.
pub fn embed_in_higher_codim(
    field: &ImmersionField,
    m_target: usize,
    rotation: &DMatrix<f64>,
) -> Result<ImmersionField> {
    if m_target < field.dim() || !(MIN_DIM..=MAX_DIM).contains(&m_target) {
        return Err(LabError::InvalidSurface(format!(
            "cannot embed R^{} into R^{m_target}",
            field.dim()
        )));
    }
    if rotation.nrows() != m_target || rotation.ncols() != m_target {
        return Err(LabError::InvalidSurface(format!(
            "rotation is {}x{}, expected {m_target}x{m_target}",
            rotation.nrows(),
            rotation.ncols()
        )));
    }
    let defect = orthogonality_defect(rotation);
    if defect > 1e-10 {
        return Err(LabError::NonOrthogonal(defect));
    }
    let inner = field.raw();
    let rot = rotation.clone();
    let mut out = ImmersionField::new(
        format!("embedded({}, {m_target})", field.name()),
        m_target,
        field.r_min(),
        field.r_max(),
        move |x| {
            let p = inner(x)?;
            Ok((0..m_target)
                .map(|i| p.iter().enumerate().map(|(j, v)| rot[(i, j)] * v).sum())
                .collect())
        },
    );
    if let Some(t) = field.branch_order() {
        out = out.with_branch_order(t);
    }
    Ok(out.with_kappa(field.kappa()))
}

/// The graph `x ↦ (x_1, x_2, x_1⁴)`: neither conformal nor Willmore.
pub fn quartic_graph() -> ImmersionField {
    ImmersionField::new("quartic_graph", 3, BASE_R_MIN, BASE_R_MAX, |x| {
        Ok(vec![x[0], x[1], x[0].powi(4)])
    })
    .with_branch_order(1)
}

/// `Re(A x^θ₀ + B x^{θ₀+1} + C |x|² x^{θ₀-1})` for complex vectors of equal
/// length.
pub fn truncated_expansion(
    theta0: u32,
    a: &[Complex64],
    b: &[Complex64],
    c: &[Complex64],
) -> Result<ImmersionField> {
    let m = a.len();
    if theta0 == 0 {
        return Err(LabError::InvalidSurface("theta0 must be >= 1".into()));
    }
    if b.len() != m || c.len() != m || !(MIN_DIM..=MAX_DIM).contains(&m) {
        return Err(LabError::InvalidSurface(
            "expansion coefficients must share a dimension in 3..=8".into(),
        ));
    }
    if a.iter().all(|v| v.norm() == 0.0) {
        return Err(LabError::InvalidSurface("leading coefficient A is zero".into()));
    }
    let (a, b, c) = (a.to_vec(), b.to_vec(), c.to_vec());
    Ok(ImmersionField::new(
        "truncated_expansion",
        m,
        BASE_R_MIN,
        BASE_R_MAX,
        move |x| {
            let z = to_complex(x);
            let zt = z.powu(theta0);
            let zt1 = zt * z;
            let zc = zt * z.conj();
            Ok((0..m)
                .map(|k| (a[k] * zt + b[k] * zt1 + c[k] * zc).re)
                .collect())
        },
    )
    .with_branch_order(theta0))
}

/// Graph `z ↦ (z, p(z))` of a holomorphic polynomial in `R^4 = C^2`.
pub fn holomorphic_graph(p: &[Complex64]) -> ImmersionField {
    let p = Polynomial::new(p.to_vec());
    ImmersionField::new("holomorphic_graph", 4, BASE_R_MIN, BASE_R_MAX, move |x| {
        let w = p.eval(to_complex(x));
        Ok(vec![x[0], x[1], w.re, w.im])
    })
    .with_branch_order(1)
}

/// The six fields used by the cross-field sweeps: sphere patch, catenoid,
/// normalized inverted catenoid, its double cover, the branched Weierstrass
/// surface with `f = g = z`, and a rotated copy of the inverted catenoid in
/// `R^5`.
pub fn standard_zoo() -> Vec<ImmersionField> {
    let z = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
    let inv = inverted_catenoid(1).expect("valid branch");
    vec![
        sphere_patch(),
        catenoid(),
        inv.clone(),
        precompose_power(&inv, 2).expect("valid power"),
        weierstrass_minimal(&z, &z).expect("nonzero data"),
        embed_in_higher_codim(&inv, 5, &random_rotation(5, 7)).expect("orthogonal"),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vecops::dist;

    #[test]
    fn catenoid_neck_point() {
        let p = catenoid().eval([1.0, 0.0]).unwrap();
        assert_eq!(p, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn inversion_is_an_involution() {
        let f = sphere_patch();
        let ff = invert(&invert(&f));
        for x in [[0.1, 0.2], [0.5, -0.3], [-0.01, 0.7]] {
            assert!(dist(&f.eval(x).unwrap(), &ff.eval(x).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn inversion_pole_is_reported() {
        let f = ImmersionField::new("through origin", 3, 1e-8, 1.0, |x| {
            Ok(vec![x[0] - 0.5, x[1], 0.0])
        });
        assert_eq!(
            invert(&f).eval([0.5, 0.0]),
            Err(LabError::InversionPole(0.5, 0.0))
        );
    }

    #[test]
    fn inverted_catenoid_degenerates_linearly() {
        let f = inverted_catenoid(1).unwrap();
        for r in [1e-3, 1e-4, 1e-5] {
            let p = f.eval([r, 0.0]).unwrap();
            let ratio = p.iter().map(|v| v * v).sum::<f64>().sqrt() / r;
            assert!((ratio - 1.0).abs() < 1e-4, "r = {r}: |Φ|/r = {ratio}");
        }
    }

    #[test]
    fn inverted_catenoid_rejects_bad_branch() {
        assert!(inverted_catenoid(0).is_err());
    }

    #[test]
    fn branches_are_mirror_images() {
        let a = inverted_catenoid(1).unwrap().eval([0.2, 0.1]).unwrap();
        let b = inverted_catenoid(-1).unwrap().eval([0.2, 0.1]).unwrap();
        assert_eq!(a[0], b[0]);
        assert_eq!(a[1], b[1]);
        assert_eq!(a[2], -b[2]);
    }

    #[test]
    fn power_one_is_identity() {
        let f = sphere_patch();
        let g = precompose_power(&f, 1).unwrap();
        assert_eq!(f.eval([0.3, 0.2]).unwrap(), g.eval([0.3, 0.2]).unwrap());
        assert!(precompose_power(&f, 0).is_err());
    }

    #[test]
    fn power_multiplies_known_branch_order() {
        let f = precompose_power(&inverted_catenoid(1).unwrap(), 3).unwrap();
        assert_eq!(f.branch_order(), Some(3));
        assert!((f.r_min() - BASE_R_MIN.powf(1.0 / 3.0)).abs() < 1e-18);
    }

    #[test]
    fn polynomial_arithmetic() {
        let c = |r: f64| Complex64::new(r, 0.0);
        let p = Polynomial::new(vec![c(1.0), c(2.0)]);
        let q = p.mul(&p);
        assert_eq!(q.0, vec![c(1.0), c(4.0), c(4.0)]);
        assert_eq!(q.integrate().0, vec![c(0.0), c(1.0), c(2.0), c(4.0 / 3.0)]);
        assert_eq!(q.eval(c(2.0)), c(25.0));
        assert_eq!(Polynomial::new(vec![c(0.0), c(0.0), c(3.0)]).order_at_zero(), Some(2));
    }

    #[test]
    fn weierstrass_branch_order_and_zero_data() {
        let z = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        assert_eq!(weierstrass_minimal(&z, &z).unwrap().branch_order(), Some(2));
        assert!(weierstrass_minimal(&[Complex64::new(0.0, 0.0)], &z).is_err());
    }

    #[test]
    fn weierstrass_closed_form_for_f_equal_g_equal_z() {
        let z = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        let f = weierstrass_minimal(&z, &z).unwrap();
        let x = [0.3, 0.2];
        let w = Complex64::new(0.3, 0.2);
        let expected = [
            (w * w / 4.0 - w.powu(4) / 8.0).re,
            (Complex64::i() * (w * w / 4.0 + w.powu(4) / 8.0)).re,
            (w.powu(3) / 3.0).re,
        ];
        assert!(dist(&f.eval(x).unwrap(), &expected) < 1e-15);
    }

    #[test]
    fn random_rotation_is_orthogonal() {
        for m in 3..=8 {
            let r = random_rotation(m, 11);
            assert!(orthogonality_defect(&r) < 1e-12);
        }
    }

    #[test]
    fn embedding_rejects_non_orthogonal_matrix() {
        let mut r = DMatrix::<f64>::identity(4, 4);
        r[(0, 1)] = 1e-6;
        assert!(matches!(
            embed_in_higher_codim(&sphere_patch(), 4, &r),
            Err(LabError::NonOrthogonal(_))
        ));
    }

    #[test]
    fn identity_embedding_pads_with_zeros() {
        let f = sphere_patch();
        let g = embed_in_higher_codim(&f, 5, &DMatrix::identity(5, 5)).unwrap();
        let x = [0.3, -0.4];
        let mut expected = f.eval(x).unwrap();
        expected.extend([0.0, 0.0]);
        assert_eq!(g.eval(x).unwrap(), expected);
    }

    #[test]
    fn standard_zoo_has_six_members() {
        let zoo = standard_zoo();
        assert_eq!(zoo.len(), 6);
        assert_eq!(zoo[5].dim(), 5);
    }
}
