mod common;

use nalgebra::{DMatrix, Matrix4, Vector4};
use proptest::prelude::*;
use vemstab::decomposition::{
    consistency_matrix, element_stiffness, gamma_vector, gbc_expansion, label_sign,
    stability_basis_matrix, ElementDecomposition,
};
use vemstab::geometry::{Polygon, Vector};
use vemstab::isoparametric::{fem_stiffness, hourglass_energy, map_at};
use vemstab::projector::{project_nodal_function, residual_dofs, Projector};
use vemstab::vem::vem_element_matrices;
use vemstab::{DiffusionTensor, P0Choice, Quad, QuadratureRule};

fn quad_and_kappa(seed: u64) -> (Quad, DiffusionTensor) {
    let mut rng = common::rng(seed);
    (
        common::random_convex_quad(&mut rng),
        common::random_kappa(&mut rng),
    )
}

fn rel_diff(a: &Matrix4<f64>, b: &Matrix4<f64>) -> f64 {
    (a - b).amax() / a.amax().max(1.0)
}

fn permutation(k: usize) -> Matrix4<f64> {
    // row r of the relabeled quad is vertex (r + k) % 4 of the original
    Matrix4::from_fn(|r, c| if c == (r + k) % 4 { 1.0 } else { 0.0 })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn gamma_annihilates_linears(seed in any::<u64>()) {
        let (q, _) = quad_and_kappa(seed);
        let g = gamma_vector(&q);
        let v = q.vertices();
        let scale = q.polygon().diameter() + v.iter().map(|p| p.coords.norm()).fold(0.0, f64::max);
        let ones = Vector4::repeat(1.0);
        let xs = Vector4::from_fn(|k, _| v[k].x);
        let ys = Vector4::from_fn(|k, _| v[k].y);
        prop_assert!(g.dot(&ones).abs() < 1e-13);
        prop_assert!(g.dot(&xs).abs() < 1e-13 * scale);
        prop_assert!(g.dot(&ys).abs() < 1e-13 * scale);
        // gamma pairs with the hourglass nodal vector to one
        let psi = Vector4::from_fn(|k, _| 0.5 * label_sign(k));
        prop_assert!((g.dot(&psi) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stiffness_is_scale_invariant(seed in any::<u64>(), s in 0.01f64..100.0) {
        let (q, k) = quad_and_kappa(seed);
        let tau = 0.5 * k.trace();
        let a = element_stiffness(&q, &k, tau).unwrap();
        let b = element_stiffness(&q.scaled(s).unwrap(), &k, tau).unwrap();
        prop_assert!(rel_diff(&a, &b) < 1e-12);
        let rule = QuadratureRule::gauss(2).unwrap();
        let t0 = hourglass_energy(&q, &k, &rule).unwrap();
        let t1 = hourglass_energy(&q.scaled(s).unwrap(), &k, &rule).unwrap();
        prop_assert!((t0 - t1).abs() <= 1e-12 * t0.max(1.0));
    }

    #[test]
    fn relabeling_permutes_matrices(seed in any::<u64>(), shift in 0usize..4) {
        let (q, k) = quad_and_kappa(seed);
        let r = q.rotated_labels(shift);
        let p = permutation(shift);
        let d0 = ElementDecomposition::new(&q, &k);
        let d1 = ElementDecomposition::new(&r, &k);
        prop_assert!(rel_diff(&(p * d0.a * p.transpose()), &d1.a) < 1e-13);
        prop_assert!(rel_diff(&(p * d0.b * p.transpose()), &d1.b) < 1e-13);
        let rule = QuadratureRule::gauss(2).unwrap();
        let t0 = hourglass_energy(&q, &k, &rule).unwrap();
        let t1 = hourglass_energy(&r, &k, &rule).unwrap();
        prop_assert!((t0 - t1).abs() <= 1e-12 * t0.max(1.0));
    }

    #[test]
    fn projector_is_idempotent(seed in any::<u64>(), values in prop::array::uniform4(-1.0f64..1.0)) {
        let (q, _) = quad_and_kappa(seed);
        let p = q.polygon();
        for choice in [P0Choice::VertexMean, P0Choice::BoundaryMean] {
            let l = project_nodal_function(p, &values, choice).unwrap();
            let again: Vec<f64> = p.vertices().iter().map(|v| l.eval(*v)).collect();
            let l2 = project_nodal_function(p, &again, choice).unwrap();
            let scale = p.vertices().iter().map(|v| v.coords.norm()).fold(1.0, f64::max);
            prop_assert!((l.a - l2.a).abs() < 1e-12 * scale * l.max_abs_coeff().max(1.0));
            prop_assert!((l.gradient() - l2.gradient()).norm() < 1e-12 * l.max_abs_coeff().max(1.0));
        }
    }

    #[test]
    fn projection_gradient_is_mean_gradient(seed in any::<u64>(), xi in -1.0f64..1.0, eta in -1.0f64..1.0) {
        // the bilinear basis function phi_0 has mean gradient d_0^perp / (2|Q|)
        let (q, _) = quad_and_kappa(seed);
        let proj = Projector::new(q.polygon(), P0Choice::VertexMean).unwrap();
        let rule = QuadratureRule::gauss(3).unwrap();
        let mut mean = Vector::zeros();
        for (pt, w) in rule.iter() {
            let m = map_at(&q, pt[0], pt[1]);
            let g = vemstab::isoparametric::bilinear_shapes(pt[0], pt[1]).grads[0];
            mean += m.physical_gradient(g) * (w * m.det);
        }
        mean /= q.area();
        prop_assert!((mean - proj.basis_image(0).gradient()).norm() < 1e-10 * mean.norm().max(1.0));
        // the map itself stays inside the quad's bounding box
        let p = map_at(&q, xi, eta).point;
        let v = q.vertices();
        let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| (lo.min(c.x), hi.max(c.x)));
        prop_assert!(p.x >= lo - 1e-12 && p.x <= hi + 1e-12);
    }

    #[test]
    fn gbc_expansion_reproduces_kronecker(seed in any::<u64>()) {
        let (q, _) = quad_and_kappa(seed);
        let g = gbc_expansion(&q).unwrap();
        let scale = q.vertices().iter().map(|v| v.coords.norm()).fold(1.0, f64::max) / q.polygon().diameter();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { 1.0 } else { 0.0 };
                prop_assert!((g.vertex_value(&q, i, j) - expected).abs() < 1e-12 * scale);
            }
        }
        prop_assert!((g.determinant - 2.0 * q.area()).abs() < 1e-12 * q.area());
    }

    #[test]
    fn fem_stiffness_matches_split_for_any_order(seed in any::<u64>(), order in 2usize..=6) {
        let (q, k) = quad_and_kappa(seed);
        let rule = QuadratureRule::gauss(order).unwrap();
        let fem = fem_stiffness(&q, &k, &rule).unwrap();
        let tau = hourglass_energy(&q, &k, &rule).unwrap();
        prop_assert!(rel_diff(&fem, &element_stiffness(&q, &k, tau).unwrap()) < 1e-12);
    }

    #[test]
    fn consistency_is_psd_rank_two(seed in any::<u64>()) {
        let (q, k) = quad_and_kappa(seed);
        let a: DMatrix<f64> = consistency_matrix(q.polygon(), &k);
        let eig = a.clone().symmetric_eigen().eigenvalues;
        let top = eig.amax();
        let positive = eig.iter().filter(|&&e| e > 1e-10 * top).count();
        prop_assert_eq!(positive, 2);
        prop_assert!(eig.iter().all(|&e| e > -1e-12 * top));
        for r in 0..4 {
            prop_assert!(a.row(r).sum().abs() < 1e-12 * top);
        }
        // the hourglass nodal vector has zero mean gradient
        let s = nalgebra::DVector::from_fn(4, |k, _| label_sign(k));
        prop_assert!((&a * s).amax() < 1e-12 * top);
        prop_assert!(stability_basis_matrix(&q).amax() > 0.0);
    }
}

#[test]
fn polygon_stabilization_kernel_is_linear() {
    // residual dofs of a random convex polygon annihilate linear samples
    let mut rng = common::rng(99);
    for n in 5..=9 {
        let coords: Vec<[f64; 2]> = (0..n)
            .map(|k| {
                let t = 2.0
                    * std::f64::consts::PI
                    * (k as f64 + 0.3 * rand::Rng::random_range(&mut rng, -1.0..1.0))
                    / n as f64;
                [1.3 * t.cos(), 0.8 * t.sin()]
            })
            .collect();
        let p = Polygon::from_coords(&coords).unwrap();
        let d = residual_dofs(&p, P0Choice::BoundaryMean).unwrap();
        for f in [|_: f64, _: f64| 1.0, |x: f64, _: f64| x, |_: f64, y: f64| y] {
            let s = nalgebra::DVector::from_iterator(n, p.vertices().iter().map(|v| f(v.x, v.y)));
            assert!((&d * s).amax() < 1e-13);
        }
        let el = vem_element_matrices(&p, &DiffusionTensor::identity(), 1.0).unwrap();
        let rank = el
            .stabilization
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .filter(|&&e| e > 1e-10)
            .count();
        assert_eq!(rank, n - 3);
    }
}
