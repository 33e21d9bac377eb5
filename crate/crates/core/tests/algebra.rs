use proptest::prelude::*;
use willmore_lab::multivector::{blade_grade, Blade, MultiVector};

fn blades(m: usize) -> impl Iterator<Item = Blade> {
    0..(1u16 << m)
}

fn b(m: usize, mask: Blade) -> MultiVector {
    MultiVector::blade(m, mask, 1.0)
}

fn sign(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[test]
fn wedge_is_associative_and_graded_commutative() {
    for m in 3..=5 {
        for x in blades(m) {
            for y in blades(m) {
                let xy = b(m, x).wedge(&b(m, y)).unwrap();
                let yx = b(m, y).wedge(&b(m, x)).unwrap();
                let s = sign(blade_grade(x) * blade_grade(y));
                assert_eq!(xy, yx.scale(s), "m={m} {x:b} {y:b}");
                for z in blades(m) {
                    let left = xy.wedge(&b(m, z)).unwrap();
                    let right = b(m, x).wedge(&b(m, y).wedge(&b(m, z)).unwrap()).unwrap();
                    assert_eq!(left, right);
                }
            }
        }
    }
}

#[test]
fn hodge_star_pairs_with_wedge_and_squares_to_sign() {
    for m in 3..=5 {
        let vol = MultiVector::volume(m);
        for x in blades(m) {
            let k = blade_grade(x);
            let star = b(m, x).hodge_star().unwrap();
            assert_eq!(star.homogeneous_grade(), Some(m - k));
            // ⋆⋆ = (-1)^{k(m-k)} on grade k
            let twice = star.hodge_star().unwrap();
            assert_eq!(twice.scale(sign(k * (m - k))), b(m, x));
            for y in blades(m).filter(|y| blade_grade(*y) == k) {
                let lhs = b(m, y).wedge(&star).unwrap();
                let pairing = b(m, y).inner(&b(m, x)).unwrap();
                assert_eq!(lhs, vol.scale(pairing));
            }
        }
    }
}

#[test]
fn interior_is_the_adjoint_of_right_wedge() {
    for m in 3..=5 {
        for gamma in blades(m) {
            for beta in blades(m).filter(|s| blade_grade(*s) <= blade_grade(gamma)) {
                let contracted = b(m, gamma).interior(&b(m, beta)).unwrap();
                for alpha in blades(m) {
                    let lhs = contracted.inner(&b(m, alpha)).unwrap();
                    let rhs = b(m, gamma)
                        .inner(&b(m, alpha).wedge(&b(m, beta)).unwrap())
                        .unwrap();
                    assert_eq!(lhs, rhs, "m={m} γ={gamma:b} β={beta:b} α={alpha:b}");
                }
            }
        }
    }
}

#[test]
fn bullet_obeys_the_signed_leibniz_rule() {
    for m in 3..=5 {
        for alpha in blades(m).filter(|s| blade_grade(*s) == 2) {
            let a = b(m, alpha);
            for i in 0..m {
                let ei = MultiVector::basis_vector(m, i);
                assert_eq!(a.bullet(&ei).unwrap(), a.interior(&ei).unwrap());
            }
            for x in blades(m).filter(|s| *s != 0) {
                for y in blades(m).filter(|s| *s != 0 && s & x == 0) {
                    let lhs = a.bullet(&b(m, x).wedge(&b(m, y)).unwrap()).unwrap();
                    let s = sign(blade_grade(x) * blade_grade(y));
                    let rhs = a.bullet(&b(m, x)).unwrap().wedge(&b(m, y)).unwrap()
                        + a.bullet(&b(m, y)).unwrap().wedge(&b(m, x)).unwrap().scale(s);
                    assert_eq!(lhs, rhs, "m={m} α={alpha:b} {x:b} {y:b}");
                }
            }
        }
    }
}

#[test]
fn bullet_of_vector_wedge_against_basis() {
    // (V ∧ e_j) • e_i = δ_ij V - (V · e_i) e_j
    for m in 3..=5 {
        for v in 0..m {
            let vv = MultiVector::basis_vector(m, v);
            for j in 0..m {
                let ej = MultiVector::basis_vector(m, j);
                let wedge = vv.wedge(&ej).unwrap();
                for i in 0..m {
                    let ei = MultiVector::basis_vector(m, i);
                    let lhs = wedge.bullet(&ei).unwrap();
                    let mut rhs = MultiVector::zero(m);
                    if i == j {
                        rhs += &vv;
                    }
                    if v == i {
                        rhs -= &ej;
                    }
                    assert_eq!(lhs, rhs, "m={m} v={v} j={j} i={i}");
                }
            }
        }
    }
}

fn multivector(m: usize) -> impl Strategy<Value = MultiVector> {
    prop::collection::vec(-1.0f64..1.0, 1 << m)
        .prop_map(move |c| MultiVector::from_coeffs(m, c))
}

fn homogeneous(m: usize, k: usize) -> impl Strategy<Value = MultiVector> {
    multivector(m).prop_map(move |v| v.grade_part(k))
}

proptest! {
    #[test]
    fn wedge_is_bilinear(x in multivector(4), y in multivector(4), z in multivector(4), s in -2.0f64..2.0) {
        let lhs = x.wedge(&(&y + &z.scale(s))).unwrap();
        let rhs = x.wedge(&y).unwrap() + x.wedge(&z).unwrap().scale(s);
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn hodge_star_is_an_isometry(k in 0usize..=5, x in multivector(5)) {
        let h = x.grade_part(k);
        let star = h.hodge_star().unwrap();
        prop_assert!((star.norm() - h.norm()).abs() < 1e-12);
    }

    #[test]
    fn interior_pairing_holds_for_combinations(
        gamma in homogeneous(5, 3),
        beta in homogeneous(5, 1),
        alpha in homogeneous(5, 2),
    ) {
        let lhs = gamma.interior(&beta).unwrap().inner(&alpha).unwrap();
        let rhs = gamma.inner(&alpha.wedge(&beta).unwrap()).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn bullet_is_bilinear(a in homogeneous(4, 2), x in multivector(4), y in multivector(4)) {
        let lhs = a.bullet(&(&x + &y)).unwrap();
        let rhs = a.bullet(&x).unwrap() + a.bullet(&y).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn vector_wedge_itself_vanishes(v in prop::collection::vec(-1.0f64..1.0, 6)) {
        let mv = MultiVector::from_vector(&v);
        prop_assert!(mv.wedge(&mv).unwrap().max_abs() < 1e-15);
    }
}
