//! Bilinear isoparametric quadrilateral: shape functions on `[-1, 1]^2`,
//! tensor-product Gauss rules, quadrature-assembled stiffness and the
//! hourglass energy, plus the closed forms of that energy on rectangles and
//! parallelograms.
//!
//! This path never touches the decomposition code; it serves as the
//! independent check of `K = A + tau B`.

use nalgebra::{Matrix2, Matrix4};

use crate::decomposition::DiffusionTensor;
use crate::error::{Error, Result};
use crate::geometry::{Point, Quad, Vector};

/// Reference corners in vertex order.
const CORNERS: [[f64; 2]; 4] = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];

pub const MAX_GAUSS_POINTS: usize = 6;

/// Tensor-product rule on the reference square.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            // p1 = P_n(z), p0 = P_{n-1}(z)
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

impl QuadratureRule {
    /// `n x n` Gauss rule, `1 <= n <= 6`.
    pub fn gauss(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_GAUSS_POINTS {
            return Err(Error::InvalidInput(format!(
                "Gauss rule order must be in 1..={MAX_GAUSS_POINTS}, got {n}"
            )));
        }
        let (x, w) = gauss_legendre(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                points.push([x[i], x[j]]);
                weights.push(w[i] * w[j]);
            }
        }
        Ok(QuadratureRule { points, weights })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ([f64; 2], f64)> + '_ {
        self.points
            .iter()
            .copied()
            .zip(self.weights.iter().copied())
    }
}

impl Default for QuadratureRule {
    fn default() -> Self {
        QuadratureRule::gauss(2).expect("2x2 rule")
    }
}

/// Shape values and reference gradients `(d/dxi, d/deta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeEval {
    pub values: [f64; 4],
    pub grads: [[f64; 2]; 4],
}

pub fn bilinear_shapes(xi: f64, eta: f64) -> ShapeEval {
    let mut out = ShapeEval {
        values: [0.0; 4],
        grads: [[0.0; 2]; 4],
    };
    for (k, c) in CORNERS.iter().enumerate() {
        let (sx, sy) = (1.0 + c[0] * xi, 1.0 + c[1] * eta);
        out.values[k] = 0.25 * sx * sy;
        out.grads[k] = [0.25 * c[0] * sy, 0.25 * c[1] * sx];
    }
    out
}

/// Pullback of `Psi_h = (1/2) sum_i (-1)^i N_i`: value and reference gradient.
pub fn hourglass_shape(xi: f64, eta: f64) -> (f64, [f64; 2]) {
    let s = bilinear_shapes(xi, eta);
    let mut v = 0.0;
    let mut g = [0.0; 2];
    for k in 0..4 {
        let sign = if k % 2 == 0 { -0.5 } else { 0.5 };
        v += sign * s.values[k];
        g[0] += sign * s.grads[k][0];
        g[1] += sign * s.grads[k][1];
    }
    (v, g)
}

/// Physical point, Jacobian and its determinant at a reference point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceMapEval {
    pub point: Point,
    /// `[[dx/dxi, dx/deta], [dy/dxi, dy/deta]]`
    pub jacobian: Matrix2<f64>,
    pub det: f64,
}

impl ReferenceMapEval {
    /// Physical gradient from a reference gradient: `J^{-T} g`.
    pub fn physical_gradient(&self, g: [f64; 2]) -> Vector {
        let j = &self.jacobian;
        let inv_det = 1.0 / self.det;
        Vector::new(
            (j[(1, 1)] * g[0] - j[(1, 0)] * g[1]) * inv_det,
            (-j[(0, 1)] * g[0] + j[(0, 0)] * g[1]) * inv_det,
        )
    }
}

pub fn map_at(q: &Quad, xi: f64, eta: f64) -> ReferenceMapEval {
    let s = bilinear_shapes(xi, eta);
    let v = q.vertices();
    let mut x = Vector::zeros();
    let mut j = Matrix2::zeros();
    for ((p, &w), g) in v.iter().zip(&s.values).zip(&s.grads) {
        x += p.coords * w;
        j[(0, 0)] += p.x * g[0];
        j[(0, 1)] += p.x * g[1];
        j[(1, 0)] += p.y * g[0];
        j[(1, 1)] += p.y * g[1];
    }
    ReferenceMapEval {
        point: Point::from(x),
        jacobian: j,
        det: j[(0, 0)] * j[(1, 1)] - j[(0, 1)] * j[(1, 0)],
    }
}

fn checked_map(q: &Quad, xi: f64, eta: f64) -> Result<ReferenceMapEval> {
    let m = map_at(q, xi, eta);
    if !(m.det > 0.0) {
        return Err(Error::InvalidMap(format!(
            "Jacobian determinant {:.3e} <= 0 at reference point ({xi}, {eta})",
            m.det
        )));
    }
    Ok(m)
}

/// `K_ij = integral kappa grad phi_j . grad phi_i` by quadrature.
pub fn fem_stiffness(
    q: &Quad,
    kappa: &DiffusionTensor,
    rule: &QuadratureRule,
) -> Result<Matrix4<f64>> {
    let mut k = Matrix4::zeros();
    for ([xi, eta], w) in rule.iter() {
        let m = checked_map(q, xi, eta)?;
        let s = bilinear_shapes(xi, eta);
        let grads: [Vector; 4] = std::array::from_fn(|a| m.physical_gradient(s.grads[a]));
        let flux: [Vector; 4] = grads.map(|g| kappa.apply(g));
        let dv = w * m.det;
        for i in 0..4 {
            for j in 0..4 {
                k[(i, j)] += dv * flux[j].dot(&grads[i]);
            }
        }
    }
    Ok(k)
}

/// `tau = integral kappa grad Psi_h . grad Psi_h` by quadrature.
pub fn hourglass_energy(q: &Quad, kappa: &DiffusionTensor, rule: &QuadratureRule) -> Result<f64> {
    let mut tau = 0.0;
    for ([xi, eta], w) in rule.iter() {
        let m = checked_map(q, xi, eta)?;
        let g = m.physical_gradient(hourglass_shape(xi, eta).1);
        tau += w * m.det * kappa.inner(g, g);
    }
    Ok(tau)
}

fn check_sides(a: f64, b: f64) -> Result<()> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "side lengths must be positive, got a={a}, b={b}"
        )));
    }
    Ok(())
}

/// Hourglass energy on `[0, a] x [0, b]`: `(b^2 k11 + a^2 k22) / (3ab)`.
pub fn tau_rectangle(a: f64, b: f64, kappa: &DiffusionTensor) -> Result<f64> {
    check_sides(a, b)?;
    Ok((b * b * kappa.k11() + a * a * kappa.k22()) / (3.0 * a * b))
}

/// Hourglass energy on a parallelogram with side `a` along the x-axis, side
/// `b`, and angle `theta` between them.
pub fn tau_parallelogram(a: f64, b: f64, theta: f64, kappa: &DiffusionTensor) -> Result<f64> {
    check_sides(a, b)?;
    if !(theta > 0.0 && theta < std::f64::consts::PI) {
        return Err(Error::InvalidInput(format!(
            "angle must lie in (0, pi), got {theta}"
        )));
    }
    let (s, c) = theta.sin_cos();
    let (k11, k12, k22) = (kappa.k11(), kappa.k12(), kappa.k22());
    Ok((a * a * k22 + b * b * k11) / (3.0 * a * b * s)
        + b * ((k22 - k11) * c * c - 2.0 * k12 * c * s) / (3.0 * a * s))
}

/// `(0,0), (a,0), (a + b cos t, b sin t), (b cos t, b sin t)`.
pub fn parallelogram(a: f64, b: f64, theta: f64) -> Result<Quad> {
    check_sides(a, b)?;
    let (s, c) = theta.sin_cos();
    Quad::from_coords([[0.0, 0.0], [a, 0.0], [a + b * c, b * s], [b * c, b * s]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gauss_rules_integrate_polynomials() {
        for n in 1..=MAX_GAUSS_POINTS {
            let (x, w) = gauss_legendre(n);
            assert_abs_diff_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-14);
            for deg in 0..2 * n {
                let exact = if deg % 2 == 1 {
                    0.0
                } else {
                    2.0 / (deg as f64 + 1.0)
                };
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                assert_abs_diff_eq!(q, exact, epsilon = 1e-14);
            }
        }
        let (x, _) = gauss_legendre(2);
        assert_abs_diff_eq!(x[1], 1.0 / 3f64.sqrt(), epsilon = 1e-15);
        let r = QuadratureRule::gauss(3).unwrap();
        assert_abs_diff_eq!(r.weights.iter().sum::<f64>(), 4.0, epsilon = 1e-14);
        assert!(QuadratureRule::gauss(0).is_err());
        assert!(QuadratureRule::gauss(7).is_err());
    }

    #[test]
    fn shapes() {
        let s = bilinear_shapes(0.0, 0.0);
        assert_eq!(s.values, [0.25; 4]);
        assert_eq!(bilinear_shapes(-1.0, -1.0).values, [1.0, 0.0, 0.0, 0.0]);
        for (xi, eta) in [(0.3, -0.7), (-0.9, 0.1)] {
            let s = bilinear_shapes(xi, eta);
            assert_abs_diff_eq!(s.values.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(
                s.grads.iter().map(|g| g[0]).sum::<f64>(),
                0.0,
                epsilon = 1e-15
            );
            assert_abs_diff_eq!(
                s.grads.iter().map(|g| g[1]).sum::<f64>(),
                0.0,
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn hourglass_shape_values() {
        let corners: Vec<f64> = CORNERS
            .iter()
            .map(|c| hourglass_shape(c[0], c[1]).0)
            .collect();
        assert_eq!(corners, vec![-0.5, 0.5, -0.5, 0.5]);
        assert_eq!(hourglass_shape(0.0, 0.0).0, 0.0);
        for (xi, eta) in [(0.0, -1.0), (1.0, 0.0), (0.0, 1.0), (-1.0, 0.0)] {
            assert_abs_diff_eq!(hourglass_shape(xi, eta).0, 0.0, epsilon = 1e-16);
        }
        // zero mean on every edge (linear along each edge, so the midpoint rule is exact)
        let (x, w) = gauss_legendre(3);
        for (fixed, along_xi) in [(-1.0, true), (1.0, true), (-1.0, false), (1.0, false)] {
            let m: f64 = x
                .iter()
                .zip(&w)
                .map(|(&t, &w)| {
                    let v = if along_xi {
                        hourglass_shape(t, fixed).0
                    } else {
                        hourglass_shape(fixed, t).0
                    };
                    w * v
                })
                .sum();
            assert_abs_diff_eq!(m, 0.0, epsilon = 1e-16);
        }
    }

    #[test]
    fn unit_square_fem_stiffness() {
        let q = Quad::from_coords([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        let k =
            fem_stiffness(&q, &DiffusionTensor::identity(), &QuadratureRule::default()).unwrap();
        #[rustfmt::skip]
        let expected = Matrix4::new(
             4.0, -1.0, -2.0, -1.0,
            -1.0,  4.0, -1.0, -2.0,
            -2.0, -1.0,  4.0, -1.0,
            -1.0, -2.0, -1.0,  4.0,
        ) / 6.0;
        assert_abs_diff_eq!(k, expected, epsilon = 1e-15);
    }

    #[test]
    fn rectangle_rows_sum_to_zero_and_rule_independent() {
        let q = Quad::from_coords([[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [0.0, 1.0]]).unwrap();
        let kappa = DiffusionTensor::new(1.5, 0.2, 0.8).unwrap();
        let k2 = fem_stiffness(&q, &kappa, &QuadratureRule::gauss(2).unwrap()).unwrap();
        let k5 = fem_stiffness(&q, &kappa, &QuadratureRule::gauss(5).unwrap()).unwrap();
        for i in 0..4 {
            assert_abs_diff_eq!(k2.row(i).sum(), 0.0, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(k2, k5, epsilon = 1e-14);
    }

    #[test]
    fn tau_examples() {
        let id = DiffusionTensor::identity();
        let rule = QuadratureRule::default();
        let sq = Quad::from_coords([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        assert_abs_diff_eq!(
            hourglass_energy(&sq, &id, &rule).unwrap(),
            2.0 / 3.0,
            epsilon = 1e-15
        );
        assert_eq!(tau_rectangle(1.0, 1.0, &id).unwrap(), 2.0 / 3.0);
        let rect = Quad::from_coords([[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [0.0, 1.0]]).unwrap();
        assert_abs_diff_eq!(
            hourglass_energy(&rect, &id, &rule).unwrap(),
            5.0 / 6.0,
            epsilon = 1e-15
        );
        let diag = DiffusionTensor::new(1.0, 0.0, 4.0).unwrap();
        assert_abs_diff_eq!(
            tau_rectangle(1.0, 2.0, &diag).unwrap(),
            4.0 / 3.0,
            epsilon = 1e-15
        );
        let t = std::f64::consts::FRAC_PI_3;
        let expected = 2.0 / (3.0 * t.sin());
        assert_abs_diff_eq!(
            tau_parallelogram(1.0, 1.0, t, &id).unwrap(),
            expected,
            epsilon = 1e-15
        );
        let p = parallelogram(1.0, 1.0, t).unwrap();
        assert_abs_diff_eq!(
            hourglass_energy(&p, &id, &rule).unwrap(),
            expected,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(expected, 0.769800358919501, epsilon = 1e-12);
    }

    #[test]
    fn parallelogram_reduces_to_rectangle() {
        let kappa = DiffusionTensor::new(3.0, -0.4, 0.5).unwrap();
        let r = tau_rectangle(1.7, 0.6, &kappa).unwrap();
        let p = tau_parallelogram(1.7, 0.6, std::f64::consts::FRAC_PI_2, &kappa).unwrap();
        assert_abs_diff_eq!(r, p, epsilon = 1e-14);
        // (a, b, k11, k22) <-> (b, a, k22, k11)
        let swapped = DiffusionTensor::new(0.5, -0.4, 3.0).unwrap();
        assert_abs_diff_eq!(
            r,
            tau_rectangle(0.6, 1.7, &swapped).unwrap(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn invalid_inputs() {
        let id = DiffusionTensor::identity();
        assert!(tau_rectangle(0.0, 1.0, &id).is_err());
        assert!(tau_parallelogram(1.0, 1.0, 0.0, &id).is_err());
        assert!(tau_parallelogram(1.0, -1.0, 1.0, &id).is_err());
        let nc = Quad::from_coords([[0.0, 0.0], [1.0, 0.0], [0.1, 0.1], [0.0, 1.0]]).unwrap();
        assert!(matches!(
            hourglass_energy(&nc, &id, &QuadratureRule::default()),
            Err(Error::InvalidMap(_))
        ));
        assert!(matches!(
            fem_stiffness(&nc, &id, &QuadratureRule::default()),
            Err(Error::InvalidMap(_))
        ));
    }
}
