//! Exterior algebra of Euclidean `R^m` for `3 <= m <= 8`.
//!
//! A basis blade `e_{i1} ∧ … ∧ e_{ik}` with `i1 < … < ik` is stored as the
//! bitmask with bits `i1..ik` set (axes are zero-based in code). Coefficients
//! live in a dense array indexed by the mask, so every key is canonical by
//! construction and signs come from counting transpositions.
//!
//! Conventions:
//!
//! * `inner` is the orthonormal-blade pairing, `⟨e_S, e_T⟩ = δ_{ST}`.
//! * `hodge_star` satisfies `α ∧ ⋆β = ⟨α, β⟩ e_1 ∧ … ∧ e_m`.
//! * `interior` is the contraction that removes `β` from the right:
//!   `⟨γ ⌐ β, α⟩ = ⟨γ, α ∧ β⟩`. With it `(e1∧e2) ⌐ e2 = e1` and
//!   `(e1∧e2) ⌐ e1 = -e2`, which is what the frame identities of conformal
//!   immersions require.
//! * `bullet` is the first-order contraction: `α • β = α ⌐ β` on 1-vectors,
//!   extended by `α • (β∧γ) = (α•β)∧γ + (-1)^{pq} (α•γ)∧β`.

use std::fmt;
use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub, SubAssign};

use crate::error::{LabError, Result};

pub const MAX_DIM: usize = 8;
pub const MIN_DIM: usize = 3;

/// Bitmask of a basis blade.
pub type Blade = u16;

#[inline]
pub fn blade_grade(mask: Blade) -> usize {
    mask.count_ones() as usize
}

/// Sign of `e_a ∧ e_b` relative to `e_{a|b}` for disjoint masks; 0 if they
/// share an axis.
#[inline]
pub fn wedge_sign(a: Blade, b: Blade) -> f64 {
    if a & b != 0 {
        return 0.0;
    }
    // Number of pairs (i in a, j in b) with i > j.
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        swaps += (a >> (j + 1)).count_ones();
        rest &= rest - 1;
    }
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[derive(Clone, PartialEq)]
pub struct MultiVector {
    dim: usize,
    coeffs: Vec<f64>,
}

impl MultiVector {
    pub fn zero(dim: usize) -> Self {
        assert!(
            (MIN_DIM..=MAX_DIM).contains(&dim),
            "ambient dimension {dim} outside 3..=8"
        );
        MultiVector {
            dim,
            coeffs: vec![0.0; 1 << dim],
        }
    }

    pub fn try_zero(dim: usize) -> Result<Self> {
        if !(MIN_DIM..=MAX_DIM).contains(&dim) {
            return Err(LabError::UnsupportedDimension(dim));
        }
        Ok(Self::zero(dim))
    }

    pub fn scalar(dim: usize, value: f64) -> Self {
        let mut mv = Self::zero(dim);
        mv.coeffs[0] = value;
        mv
    }

    /// The basis 1-vector along `axis` (zero-based).
    pub fn basis_vector(dim: usize, axis: usize) -> Self {
        assert!(axis < dim);
        Self::blade(dim, 1 << axis, 1.0)
    }

    pub fn blade(dim: usize, mask: Blade, coeff: f64) -> Self {
        let mut mv = Self::zero(dim);
        assert!((mask as usize) < (1 << dim), "blade outside ambient dimension");
        mv.coeffs[mask as usize] = coeff;
        mv
    }

    /// Wedge of the listed zero-based axes, in the given order.
    pub fn from_axes(dim: usize, axes: &[usize]) -> Self {
        axes.iter()
            .fold(Self::scalar(dim, 1.0), |acc, &a| {
                acc.wedge(&Self::basis_vector(dim, a)).unwrap()
            })
    }

    pub fn from_vector(v: &[f64]) -> Self {
        let mut mv = Self::zero(v.len());
        for (i, &c) in v.iter().enumerate() {
            mv.coeffs[1 << i] = c;
        }
        mv
    }

    /// The unit volume blade `e_1 ∧ … ∧ e_m`.
    pub fn volume(dim: usize) -> Self {
        Self::blade(dim, ((1usize << dim) - 1) as Blade, 1.0)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeff(&self, mask: Blade) -> f64 {
        self.coeffs[mask as usize]
    }

    pub fn set_coeff(&mut self, mask: Blade, value: f64) {
        self.coeffs[mask as usize] = value;
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn from_coeffs(dim: usize, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), 1 << dim);
        MultiVector { dim, coeffs }
    }

    /// Nonzero terms in increasing mask order.
    pub fn terms(&self) -> impl Iterator<Item = (Blade, f64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(m, c)| (m as Blade, *c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0.0)
    }

    /// Grade of a homogeneous multivector; `None` for mixed grades or zero.
    pub fn homogeneous_grade(&self) -> Option<usize> {
        let mut grade = None;
        for (mask, _) in self.terms() {
            let g = blade_grade(mask);
            match grade {
                None => grade = Some(g),
                Some(h) if h != g => return None,
                _ => {}
            }
        }
        grade
    }

    pub fn grade_part(&self, k: usize) -> Self {
        let mut out = Self::zero(self.dim);
        for (mask, c) in self.terms() {
            if blade_grade(mask) == k {
                out.coeffs[mask as usize] = c;
            }
        }
        out
    }

    /// Coefficients of the grade-1 part as an `R^m` vector.
    pub fn to_vector(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.coeffs[1 << i]).collect()
    }

    pub fn norm_squared(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    pub fn scale(&self, s: f64) -> Self {
        MultiVector {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(LabError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    pub fn wedge(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = Self::zero(self.dim);
        for (a, ca) in self.terms() {
            for (b, cb) in other.terms() {
                if a & b == 0 {
                    out.coeffs[(a | b) as usize] += wedge_sign(a, b) * ca * cb;
                }
            }
        }
        Ok(out)
    }

    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.check_dim(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b)
            .sum())
    }

    /// Hodge dual of a homogeneous multivector. Zero maps to zero.
    pub fn hodge_star(&self) -> Result<Self> {
        if self.is_zero() {
            return Ok(self.clone());
        }
        if self.homogeneous_grade().is_none() {
            return Err(LabError::NotHomogeneous);
        }
        let full = ((1usize << self.dim) - 1) as Blade;
        let mut out = Self::zero(self.dim);
        for (mask, c) in self.terms() {
            let comp = full & !mask;
            out.coeffs[comp as usize] += wedge_sign(mask, comp) * c;
        }
        Ok(out)
    }

    /// Right contraction `γ ⌐ β` with `⟨γ⌐β, α⟩ = ⟨γ, α∧β⟩`.
    pub fn interior(&self, beta: &Self) -> Result<Self> {
        self.check_dim(beta)?;
        if self.is_zero() || beta.is_zero() {
            return Ok(Self::zero(self.dim));
        }
        let q = self.homogeneous_grade().ok_or(LabError::NotHomogeneous)?;
        let p = beta.homogeneous_grade().ok_or(LabError::NotHomogeneous)?;
        if q < p {
            return Err(LabError::GradeTooLow { gamma: q, beta: p });
        }
        Ok(self.interior_unchecked(beta))
    }

    fn interior_unchecked(&self, beta: &Self) -> Self {
        let mut out = Self::zero(self.dim);
        for (g, cg) in self.terms() {
            for (b, cb) in beta.terms() {
                if g & b == b {
                    let rest = g & !b;
                    out.coeffs[rest as usize] += wedge_sign(rest, b) * cg * cb;
                }
            }
        }
        out
    }

    /// First-order contraction `α • β`, linear in both arguments.
    ///
    /// `β ↦ α • β` is the graded derivation determined by `α ⌐ e_i` on the
    /// basis 1-vectors; scalars are sent to zero.
    pub fn bullet(&self, beta: &Self) -> Result<Self> {
        self.check_dim(beta)?;
        let dim = self.dim;
        let n = 1usize << dim;
        // Images of every basis blade, built from smaller blades.
        let mut images: Vec<Option<MultiVector>> = vec![None; n];
        images[0] = Some(Self::zero(dim));
        let mut out = Self::zero(dim);
        for (mask, c) in beta.terms() {
            let img = self.bullet_blade(mask, &mut images);
            for (k, v) in img.coeffs.iter().enumerate() {
                out.coeffs[k] += c * v;
            }
        }
        Ok(out)
    }

    fn bullet_blade(&self, mask: Blade, images: &mut [Option<MultiVector>]) -> MultiVector {
        if let Some(img) = &images[mask as usize] {
            return img.clone();
        }
        let dim = self.dim;
        let first = mask.trailing_zeros() as usize;
        let head = 1 << first;
        let rest = mask & !head;
        let head_mv = Self::blade(dim, head, 1.0);
        let contracted = self.interior_unchecked(&head_mv);
        let img = if rest == 0 {
            contracted
        } else {
            // α•(e_head ∧ e_rest) = (α⌐e_head)∧e_rest + (-1)^{p_rest} (α•e_rest)∧e_head
            let rest_mv = Self::blade(dim, rest, 1.0);
            let rest_img = self.bullet_blade(rest, images);
            let sign = if blade_grade(rest) % 2 == 0 { 1.0 } else { -1.0 };
            let a = contracted.wedge(&rest_mv).unwrap();
            let b = rest_img.wedge(&head_mv).unwrap();
            a + b.scale(sign)
        };
        images[mask as usize] = Some(img.clone());
        img
    }

    /// Exact comparison helper for tests: largest coefficient difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl Index<Blade> for MultiVector {
    type Output = f64;
    fn index(&self, mask: Blade) -> &f64 {
        &self.coeffs[mask as usize]
    }
}

impl fmt::Debug for MultiVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for MultiVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (mask, c) in self.terms() {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            if mask != 0 {
                f.write_str("·e")?;
                let axes: Vec<String> = (0..self.dim)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| (i + 1).to_string())
                    .collect();
                f.write_str(&axes.join("∧e"))?;
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl Add for MultiVector {
    type Output = MultiVector;
    fn add(mut self, rhs: MultiVector) -> MultiVector {
        self += &rhs;
        self
    }
}

impl Add<&MultiVector> for &MultiVector {
    type Output = MultiVector;
    fn add(self, rhs: &MultiVector) -> MultiVector {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl AddAssign<&MultiVector> for MultiVector {
    fn add_assign(&mut self, rhs: &MultiVector) {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl Sub for MultiVector {
    type Output = MultiVector;
    fn sub(mut self, rhs: MultiVector) -> MultiVector {
        self -= &rhs;
        self
    }
}

impl Sub<&MultiVector> for &MultiVector {
    type Output = MultiVector;
    fn sub(self, rhs: &MultiVector) -> MultiVector {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl SubAssign<&MultiVector> for MultiVector {
    fn sub_assign(&mut self, rhs: &MultiVector) {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a -= b;
        }
    }
}

impl Neg for MultiVector {
    type Output = MultiVector;
    fn neg(self) -> MultiVector {
        self.scale(-1.0)
    }
}

impl Mul<f64> for MultiVector {
    type Output = MultiVector;
    fn mul(self, s: f64) -> MultiVector {
        self.scale(s)
    }
}

impl Mul<MultiVector> for f64 {
    type Output = MultiVector;
    fn mul(self, mv: MultiVector) -> MultiVector {
        mv.scale(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(dim: usize, i: usize) -> MultiVector {
        MultiVector::basis_vector(dim, i - 1)
    }

    #[test]
    fn wedge_of_basis_vectors_is_canonical() {
        let b = e(3, 1).wedge(&e(3, 2)).unwrap();
        assert_eq!(b.coeff(0b011), 1.0);
        let b = e(3, 2).wedge(&e(3, 1)).unwrap();
        assert_eq!(b.coeff(0b011), -1.0);
    }

    #[test]
    fn wedge_of_vector_with_itself_vanishes() {
        let v = MultiVector::from_vector(&[1.0, -2.0, 3.0, 0.5]);
        assert!(v.wedge(&v).unwrap().is_zero());
    }

    #[test]
    fn wedge_expands_bilinearly() {
        let a = e(3, 1) + e(3, 2);
        let b = e(3, 1) - e(3, 2);
        let w = a.wedge(&b).unwrap();
        assert_eq!(w, MultiVector::blade(3, 0b011, -2.0));
    }

    #[test]
    fn wedge_rejects_dimension_mismatch() {
        assert!(matches!(
            e(3, 1).wedge(&e(4, 1)),
            Err(LabError::DimensionMismatch { .. })
        ));
        assert!(e(3, 1).inner(&e(5, 1)).is_err());
    }

    #[test]
    fn inner_products() {
        let e12 = e(4, 1).wedge(&e(4, 2)).unwrap();
        let e13 = e(4, 1).wedge(&e(4, 3)).unwrap();
        assert_eq!(e12.inner(&e12).unwrap(), 1.0);
        assert_eq!(e12.inner(&e13).unwrap(), 0.0);
        let v = e(4, 1).scale(2.0) + e(4, 3);
        assert_eq!(v.inner(&e(4, 1)).unwrap(), 2.0);
    }

    #[test]
    fn hodge_star_matches_frame_relations_in_r3() {
        let e12 = e(3, 1).wedge(&e(3, 2)).unwrap();
        assert_eq!(e12.hodge_star().unwrap(), e(3, 3));
        let e31 = e(3, 3).wedge(&e(3, 1)).unwrap();
        assert_eq!(e31.hodge_star().unwrap(), e(3, 2));
    }

    #[test]
    fn hodge_star_twice_on_vector_in_r4() {
        let v = MultiVector::from_vector(&[1.0, 2.0, -3.0, 4.0]);
        let ss = v.hodge_star().unwrap().hodge_star().unwrap();
        assert_eq!(ss, -v);
    }

    #[test]
    fn hodge_star_rejects_mixed_grades() {
        let mixed = MultiVector::scalar(3, 1.0) + e(3, 1);
        assert_eq!(mixed.hodge_star(), Err(LabError::NotHomogeneous));
    }

    #[test]
    fn interior_on_tangent_and_normal_vectors() {
        let e12 = e(4, 1).wedge(&e(4, 2)).unwrap();
        assert_eq!(e12.interior(&e(4, 2)).unwrap(), e(4, 1));
        assert_eq!(e12.interior(&e(4, 1)).unwrap(), -e(4, 2));
        assert!(e12.interior(&e(4, 3)).unwrap().is_zero());
    }

    #[test]
    fn interior_rejects_low_grade() {
        let e12 = e(3, 1).wedge(&e(3, 2)).unwrap();
        assert_eq!(
            e(3, 1).interior(&e12),
            Err(LabError::GradeTooLow { gamma: 1, beta: 2 })
        );
    }

    #[test]
    fn bullet_examples() {
        let dim = 5;
        let star_n = e(dim, 1).wedge(&e(dim, 2)).unwrap();
        for alpha in 3..=5 {
            let na = e(dim, alpha);
            for j in 1..=2 {
                let lhs = star_n.bullet(&e(dim, j).wedge(&na).unwrap()).unwrap();
                let mut rhs = MultiVector::zero(dim);
                if j == 2 {
                    rhs += &e(dim, 1).wedge(&na).unwrap();
                } else {
                    rhs -= &e(dim, 2).wedge(&na).unwrap();
                }
                assert_eq!(lhs, rhs);
            }
        }
        for (j, k) in [(1, 2), (2, 1), (1, 1)] {
            let b = e(dim, j).wedge(&e(dim, k)).unwrap();
            assert!(star_n.bullet(&b).unwrap().is_zero());
        }
    }

    #[test]
    fn bullet_kills_scalars() {
        let a = e(3, 1).wedge(&e(3, 2)).unwrap();
        assert!(a.bullet(&MultiVector::scalar(3, 7.0)).unwrap().is_zero());
    }

    #[test]
    fn display_lists_terms() {
        let v = e(3, 1).scale(2.0) + e(3, 2).wedge(&e(3, 3)).unwrap();
        assert_eq!(v.to_string(), "2·e1 + 1·e2∧e3");
        assert_eq!(MultiVector::zero(3).to_string(), "0");
    }
}
