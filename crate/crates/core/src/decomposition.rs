//! Quadrature-free element ingredients: the consistency matrix `A`, the
//! hourglass vector `gamma`, the rank-one matrix `B = gamma gamma^T` and the
//! affine-plus-hourglass expansion of any set of barycentric coordinates on a
//! quadrilateral.
//!
//! Formulas use 1-based cyclic vertex labels; storage is 0-based, so the
//! vertex stored at index `k` carries label `k + 1` and sign `(-1)^(k+1)`.

use nalgebra::{DMatrix, Matrix2, Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{rotate_cw, Polygon, Quad, Vector};

/// Constant symmetric positive-definite 2x2 diffusion coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionTensor {
    k11: f64,
    k12: f64,
    k22: f64,
}

impl DiffusionTensor {
    pub fn new(k11: f64, k12: f64, k22: f64) -> Result<Self> {
        let det = k11 * k22 - k12 * k12;
        if !(k11.is_finite() && k12.is_finite() && k22.is_finite()) || k11 <= 0.0 || det <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "diffusion tensor [[{k11}, {k12}], [{k12}, {k22}]] is not positive definite"
            )));
        }
        Ok(DiffusionTensor { k11, k12, k22 })
    }

    pub const fn identity() -> Self {
        DiffusionTensor {
            k11: 1.0,
            k12: 0.0,
            k22: 1.0,
        }
    }

    pub fn isotropic(k: f64) -> Result<Self> {
        Self::new(k, 0.0, k)
    }

    pub fn k11(&self) -> f64 {
        self.k11
    }

    pub fn k12(&self) -> f64 {
        self.k12
    }

    pub fn k22(&self) -> f64 {
        self.k22
    }

    pub fn trace(&self) -> f64 {
        self.k11 + self.k22
    }

    pub fn matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.k11, self.k12, self.k12, self.k22)
    }

    #[inline]
    pub fn apply(&self, v: Vector) -> Vector {
        Vector::new(
            self.k11 * v.x + self.k12 * v.y,
            self.k12 * v.x + self.k22 * v.y,
        )
    }

    /// `kappa u . v`
    #[inline]
    pub fn inner(&self, u: Vector, v: Vector) -> f64 {
        self.apply(u).dot(&v)
    }
}

/// `d_i = V_{i+1} - V_{i-1}` for the four vertices.
pub fn diagonals(q: &Quad) -> [Vector; 4] {
    let d = q.polygon().diagonals();
    [d[0], d[1], d[2], d[3]]
}

/// `A_ij = kappa d_j^perp . d_i^perp / (4 |P|)` on any polygon.
///
/// Symmetric positive semidefinite with rank at most two and zero row sums.
pub fn consistency_matrix(p: &Polygon, kappa: &DiffusionTensor) -> DMatrix<f64> {
    let n = p.len();
    let rotated: Vec<Vector> = p.diagonals().into_iter().map(rotate_cw).collect();
    let scale = 1.0 / (4.0 * p.area());
    DMatrix::from_fn(n, n, |i, j| scale * kappa.inner(rotated[j], rotated[i]))
}

/// Signed areas `T_i` of the triangles left after removing vertex `i`.
pub fn signed_triangle_areas(q: &Quad) -> [f64; 4] {
    let v = q.vertices();
    let tri = |a: usize, b: usize, c: usize| {
        0.5 * ((v[b].x - v[a].x) * (v[c].y - v[a].y) - (v[c].x - v[a].x) * (v[b].y - v[a].y))
    };
    [tri(1, 2, 3), tri(0, 2, 3), tri(0, 1, 3), tri(0, 1, 2)]
}

/// Sign `(-1)^i` for the vertex stored at 0-based index `k` (label `k + 1`).
#[inline]
pub fn label_sign(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        -1.0
    } else {
        1.0
    }
}

/// `gamma_i = (-1)^i T_i / |Q|`.
pub fn gamma_vector(q: &Quad) -> Vector4<f64> {
    let t = signed_triangle_areas(q);
    let area = q.area();
    Vector4::from_fn(|k, _| label_sign(k) * t[k] / area)
}

/// `B = gamma gamma^T`.
pub fn stability_basis_matrix(q: &Quad) -> Matrix4<f64> {
    let g = gamma_vector(q);
    g * g.transpose()
}

/// The 4x4 matrix mapping the basis functions to `(1, x, y, Psi_h)`.
pub fn transform_matrix(q: &Quad) -> Matrix4<f64> {
    let v = q.vertices();
    Matrix4::from_fn(|r, k| match r {
        0 => 1.0,
        1 => v[k].x,
        2 => v[k].y,
        _ => 0.5 * label_sign(k),
    })
}

/// Coefficients of `phi_i = a_i + b_i x + c_i y + gamma_i Psi_h`.
#[derive(Debug, Clone, PartialEq)]
pub struct GbcExpansion {
    pub a: [f64; 4],
    pub b: [f64; 4],
    pub c: [f64; 4],
    pub gamma: [f64; 4],
    /// Determinant of [`transform_matrix`]; equals `2 |Q|`.
    pub determinant: f64,
}

impl GbcExpansion {
    /// `phi_i(V_j)` rebuilt from the expansion; should be the Kronecker delta.
    pub fn vertex_value(&self, q: &Quad, i: usize, j: usize) -> f64 {
        let v = q.vertices()[j];
        self.a[i] + self.b[i] * v.x + self.c[i] * v.y + self.gamma[i] * 0.5 * label_sign(j)
    }
}

/// Solves the `(1, x, y, Psi_h)` transform in closed form. The constant term
/// has numerator `T_i + x_{i+1} y_{i-1} - x_{i-1} y_{i+1}`, so that
/// `phi_i(V_j) = delta_ij`.
pub fn gbc_expansion(q: &Quad) -> Result<GbcExpansion> {
    let area = q.area();
    let determinant = transform_matrix(q).determinant();
    if determinant.abs() <= 1e-14 * area.abs().max(f64::MIN_POSITIVE) || determinant == 0.0 {
        return Err(Error::DegenerateGeometry(format!(
            "transform matrix is singular (det = {determinant:e})"
        )));
    }
    let v = q.vertices();
    let t = signed_triangle_areas(q);
    let d = diagonals(q);
    let mut out = GbcExpansion {
        a: [0.0; 4],
        b: [0.0; 4],
        c: [0.0; 4],
        gamma: [0.0; 4],
        determinant,
    };
    for i in 0..4 {
        let next = v[(i + 1) % 4];
        let prev = v[(i + 3) % 4];
        out.a[i] = (t[i] + next.x * prev.y - prev.x * next.y) / (2.0 * area);
        out.b[i] = d[i].y / (2.0 * area);
        out.c[i] = -d[i].x / (2.0 * area);
        out.gamma[i] = label_sign(i) * t[i] / area;
    }
    Ok(out)
}

/// `K = A + tau B` on a quadrilateral.
pub fn element_stiffness(q: &Quad, kappa: &DiffusionTensor, tau: f64) -> Result<Matrix4<f64>> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "tau must be finite and >= 0, got {tau}"
        )));
    }
    Ok(ElementDecomposition::new(q, kappa).stiffness(tau))
}

/// The triple `(A, B, gamma)` of a quadrilateral together with the 2x2 block
/// `C` of `A = [[C, -C], [-C, C]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementDecomposition {
    pub a: Matrix4<f64>,
    pub b: Matrix4<f64>,
    pub gamma: Vector4<f64>,
    pub c: Matrix2<f64>,
    pub area: f64,
}

impl ElementDecomposition {
    pub fn new(q: &Quad, kappa: &DiffusionTensor) -> Self {
        let a_dyn = consistency_matrix(q.polygon(), kappa);
        let a = Matrix4::from_fn(|i, j| a_dyn[(i, j)]);
        let c = Matrix2::new(a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
        let gamma = gamma_vector(q);
        ElementDecomposition {
            a,
            b: gamma * gamma.transpose(),
            gamma,
            c,
            area: q.area(),
        }
    }

    pub fn stiffness(&self, tau: f64) -> Matrix4<f64> {
        self.a + self.b * tau
    }
}
