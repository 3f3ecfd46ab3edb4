use std::sync::Arc;

use hichom_core::dns::periods_for;
use hichom_core::mesh::build_periodic_map;
use hichom_core::tensor::{stress_dot, sym_dyad};
use hichom_core::{build_unit_cell_mesh, FeField, Lame, RunConfig, UnitCellGeometry};
use nalgebra::{Vector2, Vector3};
use proptest::prelude::*;
use serde_json::json;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn periodic_map_is_a_projection(n in 4usize..24) {
        let mesh = build_unit_cell_mesh(&UnitCellGeometry::disk(0.25), n).unwrap();
        let map = build_periodic_map(&mesh).unwrap();
        prop_assert_eq!(map.reduced_count(), n * n);
        for node in 0..mesh.node_count() {
            let m = map.master(node);
            prop_assert_eq!(map.master(m), m);
            let (a, b) = (mesh.nodes()[node], mesh.nodes()[m]);
            let frac = |t: f64| t - t.floor();
            prop_assert!((frac(a[0]) - b[0]).abs() < 1e-12 || (a[0] - 1.0).abs() < 1e-12);
            prop_assert!((frac(a[1]) - b[1]).abs() < 1e-12 || (a[1] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn affine_fields_are_reproduced(c0 in -2.0..2.0f64, c1 in -2.0..2.0f64, c2 in -2.0..2.0f64,
                                    x in 0.0..1.0f64, y in 0.0..1.0f64, n in 4usize..16) {
        let mesh = Arc::new(build_unit_cell_mesh(&UnitCellGeometry::laminate(0.5), n).unwrap());
        let f = FeField::interpolate_scalar(mesh, |p| c0 + c1 * p[0] + c2 * p[1]);
        prop_assert!((f.eval([x, y], 0) - (c0 + c1 * x + c2 * y)).abs() < 1e-12);
        let g = f.eval_gradient([x, y], 0);
        prop_assert!((g[0] - c1).abs() < 1e-10 && (g[1] - c2).abs() < 1e-10);
    }

    #[test]
    fn isotropic_stiffness_is_elliptic(lambda in 0.0..50.0f64, mu in 0.01..50.0f64) {
        let t = Lame::new(lambda, mu).voigt();
        prop_assert!(t.min_eigenvalue() > 0.0);
        prop_assert!(t.major_asymmetry() < 1e-14);
    }

    #[test]
    fn voigt_energy_matches_stress_pairing(lambda in 0.0..5.0f64, mu in 0.1..5.0f64,
                                           u in prop::array::uniform2(-1.0..1.0f64),
                                           v in prop::array::uniform2(-1.0..1.0f64)) {
        let t = Lame::new(lambda, mu).voigt();
        let e = sym_dyad(Vector2::new(u[0], u[1]), Vector2::new(v[0], v[1]));
        let s = t.stress(&e);
        let e_tensor = Vector3::new(e[0], e[1], e[2] / 2.0);
        prop_assert!((t.energy(&e) - stress_dot(&s, &e_tensor)).abs() < 1e-12 * (1.0 + t.energy(&e).abs()));
    }

    #[test]
    fn reciprocal_integers_tile(k in 1usize..200) {
        prop_assert_eq!(periods_for(1.0 / k as f64).unwrap(), k);
    }

    #[test]
    fn non_reciprocals_are_rejected(k in 2usize..50, frac in 0.05..0.95f64) {
        let eps = 1.0 / (k as f64 + frac);
        prop_assert_eq!(periods_for(eps).unwrap_err().kind(), "LadderMismatch");
    }

    #[test]
    fn disk_radius_validation(radius in -1.0..1.0f64) {
        let doc = json!({"command": "cell", "geometry": {"kind": "diskInclusion", "radius": radius}});
        match RunConfig::from_value(doc) {
            Ok(_) => prop_assert!(radius > 0.0 && radius < 0.5),
            Err(hichom_core::Error::Validation { key, .. }) => {
                prop_assert!(radius <= 0.0 || radius >= 0.5);
                prop_assert_eq!(key, "geometry.radius");
            }
            Err(other) => prop_assert!(false, "unexpected error {other}"),
        }
    }
}
