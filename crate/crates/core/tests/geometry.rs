use std::f64::consts::PI;

use num_complex::Complex64;
use willmore_lab::analysis::ladder;
use willmore_lab::geometry::{
    delta_profile, gauss_energy, point_geometry, willmore_check, willmore_energy,
};
use willmore_lab::identities::sample_points;
use willmore_lab::zoo::{
    catenoid, embed_in_higher_codim, inverted_catenoid, plane, precompose_power, quartic_graph,
    random_rotation, sphere_patch, weierstrass_minimal,
};

#[test]
fn sphere_has_unit_mean_curvature_everywhere() {
    let f = sphere_patch();
    for x in sample_points(0.01, 1.5, 40, 1) {
        let g = point_geometry(&f, x).unwrap();
        assert!((g.mean_curvature_norm() - 1.0).abs() < 1e-6, "{x:?}");
        assert!(!g.conformal_warning);
    }
}

#[test]
fn minimal_surfaces_have_vanishing_mean_curvature() {
    let z = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
    let fields = [
        (catenoid(), 0.2, 1.5),
        (weierstrass_minimal(&z, &z).unwrap(), 0.02, 0.5),
    ];
    for (f, r_in, r_out) in &fields {
        for x in sample_points(*r_in, *r_out, 40, 2) {
            let h = point_geometry(f, x).unwrap().mean_curvature_norm();
            assert!(h < 1e-6, "{} at {x:?}: |H| = {h}", f.name());
        }
    }
    let g = point_geometry(&catenoid(), [0.5, 0.0]).unwrap();
    assert!(g.mean_curvature_norm() < 1e-6);
}

#[test]
fn plane_geometry_is_flat() {
    let g = point_geometry(&plane(5), [0.3, -0.4]).unwrap();
    assert_eq!(g.lambda, 0.0);
    assert_eq!(g.mean_curvature_norm(), 0.0);
    assert_eq!(g.grad_n_norm, 0.0);
}

#[test]
fn scalar_geometry_survives_rotation_into_higher_codimension() {
    let inv = inverted_catenoid(1).unwrap();
    let emb = embed_in_higher_codim(&inv, 6, &random_rotation(6, 21)).unwrap();
    for x in sample_points(0.05, 0.4, 10, 3) {
        let a = point_geometry(&inv, x).unwrap();
        let b = point_geometry(&emb, x).unwrap();
        assert!((a.lambda - b.lambda).abs() < 1e-10);
        let (ha, hb) = (a.mean_curvature_norm(), b.mean_curvature_norm());
        assert!((ha - hb).abs() < 1e-7 * (1.0 + ha));
        assert!((a.grad_n_norm - b.grad_n_norm).abs() < 1e-7 * (1.0 + a.grad_n_norm));
    }
}

#[test]
fn willmore_fields_pass_and_quartic_graph_fails() {
    let inv = inverted_catenoid(1).unwrap();
    let sphere = sphere_patch();
    for x in [[0.25, 0.0], [0.1, 0.2], [-0.3, 0.15]] {
        for f in [&inv, &sphere] {
            let c = willmore_check(f, x).unwrap();
            assert!(c.passes(), "{} at {x:?}: {c:?}", f.name());
        }
    }
    let c = willmore_check(&quartic_graph(), [0.3, 0.0]).unwrap();
    assert!(c.divergence >= 10.0 * c.divergence_budget, "{c:?}");
}

#[test]
fn sphere_willmore_energy_is_the_cap_area() {
    let (a, b) = (0.1, 0.5);
    let w = willmore_energy(&sphere_patch(), a, b, 32, 64).unwrap();
    let area = 2.0 * PI * (2.0 / (1.0 + a * a) - 2.0 / (1.0 + b * b));
    assert!((w - area).abs() < 1e-5 * area, "{w} vs {area}");
}

#[test]
fn minimal_and_flat_energies_vanish() {
    assert!(willmore_energy(&catenoid(), 0.3, 1.5, 16, 32).unwrap() < 1e-8);
    assert_eq!(willmore_energy(&plane(3), 0.1, 1.0, 8, 8).unwrap(), 0.0);
    assert_eq!(gauss_energy(&plane(3), 0.1, 1.0, 8, 8).unwrap(), 0.0);
}

#[test]
fn gauss_energy_converges_and_doubles_under_a_double_cover() {
    let inv = inverted_catenoid(1).unwrap();
    let coarse = gauss_energy(&inv, 0.05, 0.5, 32, 64).unwrap();
    let fine = gauss_energy(&inv, 0.05, 0.5, 64, 128).unwrap();
    assert!((coarse - fine).abs() < 1e-3 * fine);

    let cover = precompose_power(&inv, 2).unwrap();
    let covered = gauss_energy(&cover, 0.2, 0.5, 64, 128).unwrap();
    let base = gauss_energy(&inv, 0.04, 0.25, 64, 128).unwrap();
    assert!((covered / base - 2.0).abs() < 0.04);
}

#[test]
fn delta_profile_decays_toward_the_singularity() {
    let inv = inverted_catenoid(1).unwrap();
    let profile = delta_profile(&inv, &ladder(&inv), 64).unwrap();
    for w in profile.windows(2) {
        assert!(w[1].1 < w[0].1, "{profile:?}");
    }
    assert!(profile.last().unwrap().1 < 0.05 * profile[0].1, "{profile:?}");
    assert!(profile.iter().all(|(_, d)| d.is_finite()));
}
