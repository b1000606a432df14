//! Randomized invariants across the public API.

use proptest::prelude::*;

use wgbih::analysis::{triple_bar_norm, Problem};
use wgbih::mesh::{build_polygonal, parse_mesh, write_mesh, Point};
use wgbih::polyspace::{element_quadrature, embed_exact_solution, project_element, ElementBasis};
use wgbih::system::{local_matrix, DofMap};
use wgbih::{Discretization, Flavor};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn voronoi_meshes_tile_the_square(cells in 3usize..40, seed in 0u64..1000) {
        let m = build_polygonal(cells, 3, seed).unwrap();
        prop_assert!((m.total_area() - 1.0).abs() < 1e-10);
        for e in m.edges() {
            prop_assert!((e.normal.norm() - 1.0).abs() < 1e-12);
            prop_assert_eq!(e.elements.1.is_none(), e.is_boundary());
        }
        let back = parse_mesh(&write_mesh(&m)).unwrap();
        prop_assert_eq!(back.num_elements(), m.num_elements());
        prop_assert_eq!(back.num_edges(), m.num_edges());
    }

    #[test]
    fn element_rules_integrate_monomials(cells in 3usize..20, seed in 0u64..100, a in 0i32..5, b in 0i32..5) {
        let m = build_polygonal(cells, 2, seed).unwrap();
        // Σ_T ∫_T x^a y^b over a tiling of the unit square
        let total: f64 = (0..m.num_elements())
            .map(|t| element_quadrature(&m, t, (a + b) as usize).unwrap().integrate(|p| p.x.powi(a) * p.y.powi(b)))
            .sum();
        let exact = 1.0 / ((a + 1) * (b + 1)) as f64;
        prop_assert!((total - exact).abs() < 1e-12 * exact.max(1.0));
    }

    #[test]
    fn projection_fixes_polynomials(c in prop::collection::vec(-1.0f64..1.0, 10), seed in 0u64..100) {
        let m = build_polygonal(8, 2, seed).unwrap();
        let basis = ElementBasis::for_element(m.element(0), 3);
        let rule = element_quadrature(&m, 0, 6).unwrap();
        let q = project_element(&basis, &rule, |p| basis.evaluate(&c, p)).unwrap();
        for (x, y) in q.iter().zip(&c) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn local_matrices_are_symmetric_semidefinite(seed in 0u64..200, k in 2usize..4, vector in any::<bool>()) {
        let m = build_polygonal(6, 1, seed).unwrap();
        let flavor = if vector { Flavor::VectorTrace } else { Flavor::NormalTrace };
        let d = Discretization::new(k, flavor).unwrap();
        for t in 0..m.num_elements() {
            let a = local_matrix(&m, t, &d).unwrap();
            prop_assert_eq!(&a, &a.transpose());
            let min = a.clone().symmetric_eigen().eigenvalues.min();
            prop_assert!(min > -1e-9 * a.norm());
        }
    }

    #[test]
    fn norm_vanishes_exactly_on_projected_affine_functions(a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0, seed in 0u64..100) {
        let m = build_polygonal(10, 2, seed).unwrap();
        let d = Discretization::new(2, Flavor::VectorTrace).unwrap();
        let dofs = DofMap::new(&m, &d);
        let v = embed_exact_solution(&m, d, &dofs, |p| a + b * p.x + c * p.y, |_| Point::new(b, c)).unwrap();
        prop_assert!(triple_bar_norm(&m, &d, v.as_slice()).unwrap() < 1e-9);
    }
}

#[test]
fn built_in_problems_resolve_by_name() {
    assert_eq!(Problem::by_name("case1").unwrap().name, "case1");
    assert!(Problem::by_name("nope").is_none());
}
