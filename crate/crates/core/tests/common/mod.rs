//! Seeded generators shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vemstab::{DiffusionTensor, Point, Quad};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Strictly convex quad: four points on a perturbed circle, then a random
/// affine map with condition number at most 10 and a random translation.
pub fn random_convex_quad(rng: &mut impl Rng) -> Quad {
    loop {
        let mut angles: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
        angles.sort_by(f64::total_cmp);
        let gaps_ok = (0..4).all(|k| {
            let next = if k == 3 {
                angles[0] + 2.0 * PI
            } else {
                angles[k + 1]
            };
            next - angles[k] > 0.3
        });
        if !gaps_ok {
            continue;
        }
        let pts: Vec<[f64; 2]> = angles
            .iter()
            .map(|&t| {
                let r = rng.random_range(0.6..1.4);
                [r * t.cos(), r * t.sin()]
            })
            .collect();
        let s1 = rng.random_range(0.2..5.0);
        let s2 = s1 * rng.random_range(0.1..1.0);
        let (r1, r2) = (rng.random_range(0.0..PI), rng.random_range(0.0..PI));
        let (tx, ty) = (rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0));
        let map = |p: [f64; 2]| {
            // rotate, stretch, rotate, translate
            let (c, s) = (r1.cos(), r1.sin());
            let (x, y) = (c * p[0] - s * p[1], s * p[0] + c * p[1]);
            let (x, y) = (s1 * x, s2 * y);
            let (c, s) = (r2.cos(), r2.sin());
            [c * x - s * y + tx, s * x + c * y + ty]
        };
        let coords = [map(pts[0]), map(pts[1]), map(pts[2]), map(pts[3])];
        let Ok(q) = Quad::from_coords(coords) else {
            continue;
        };
        if !q.is_convex() {
            continue;
        }
        // keep every interior angle away from pi so T_i stay well conditioned
        let v = q.vertices();
        let sharp = (0..4).all(|k| {
            let t = [v[(k + 1) % 4], v[(k + 2) % 4], v[(k + 3) % 4]];
            let a = ((t[1] - t[0]).perp(&(t[2] - t[0]))).abs();
            a > 0.05 * q.area()
        });
        if sharp {
            return q;
        }
    }
}

/// SPD tensor with random eigenvectors and condition number at most 1e3.
pub fn random_kappa(rng: &mut impl Rng) -> DiffusionTensor {
    let lmin = 10f64.powf(rng.random_range(-1.5..1.5));
    let lmax = lmin * 10f64.powf(rng.random_range(0.0..3.0));
    let t = rng.random_range(0.0..PI);
    let (c, s) = (t.cos(), t.sin());
    let k11 = lmin * c * c + lmax * s * s;
    let k22 = lmin * s * s + lmax * c * c;
    let k12 = (lmin - lmax) * c * s;
    DiffusionTensor::new(k11, k12, k22).expect("eigenvalues are positive")
}

pub fn random_point(rng: &mut impl Rng) -> Point {
    Point::new(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0))
}
