//! Projection onto linear polynomials computed from vertex values alone.
//!
//! The gradient of the projection is the mean gradient over the element,
//! `(1/|P|) * integral grad v = sum_i v_i d_i^perp / (2|P|)`, and the constant
//! is fixed by a projection `P0` onto constants that only sees boundary data.

use std::iter::Sum;
use std::ops::{Add, Mul};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{rotate_cw, Point, Polygon, Vector};

/// `a + b x + c y`
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LinearPolynomial {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl LinearPolynomial {
    pub const fn new(a: f64, b: f64, c: f64) -> Self {
        LinearPolynomial { a, b, c }
    }

    pub fn eval(&self, p: Point) -> f64 {
        self.a + self.b * p.x + self.c * p.y
    }

    pub fn gradient(&self) -> Vector {
        Vector::new(self.b, self.c)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs())
    }
}

impl Add for LinearPolynomial {
    type Output = LinearPolynomial;
    fn add(self, o: Self) -> Self {
        LinearPolynomial::new(self.a + o.a, self.b + o.b, self.c + o.c)
    }
}

impl Mul<LinearPolynomial> for f64 {
    type Output = LinearPolynomial;
    fn mul(self, p: LinearPolynomial) -> LinearPolynomial {
        LinearPolynomial::new(self * p.a, self * p.b, self * p.c)
    }
}

impl Sum for LinearPolynomial {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(LinearPolynomial::default(), Add::add)
    }
}

/// Which projection onto constants fixes the free constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum P0Choice {
    /// Mean of the vertex values.
    #[default]
    VertexMean,
    /// Mean over the boundary of the piecewise-linear trace.
    BoundaryMean,
}

pub fn vertex_center(p: &Polygon) -> Point {
    let n = p.len() as f64;
    let s: Vector = p.vertices().iter().map(|v| v.coords).sum();
    Point::from(s / n)
}

/// Weights `(|e_{i-1}| + |e_i|) / (2 |dP|)`; `P0 v = sum_i w_i v(V_i)`.
fn boundary_weights(p: &Polygon) -> Result<Vec<f64>> {
    let perimeter = p.perimeter();
    if !(perimeter > 0.0) {
        return Err(Error::DegenerateGeometry(
            "polygon has zero perimeter".into(),
        ));
    }
    let n = p.len() as isize;
    Ok((0..n)
        .map(|i| {
            let prev = (p.vertex(i) - p.vertex(i - 1)).norm();
            let next = (p.vertex(i + 1) - p.vertex(i)).norm();
            0.5 * (prev + next) / perimeter
        })
        .collect())
}

/// `P0 x` for the boundary mean: the edge-length weighted vertex average.
pub fn boundary_centroid(p: &Polygon) -> Result<Point> {
    let w = boundary_weights(p)?;
    let s: Vector = p
        .vertices()
        .iter()
        .zip(&w)
        .map(|(v, w)| v.coords * *w)
        .sum();
    Ok(Point::from(s))
}

/// Weights of the chosen `P0` acting on vertex values. They sum to one.
pub fn p0_weights(p: &Polygon, choice: P0Choice) -> Result<Vec<f64>> {
    match choice {
        P0Choice::VertexMean => Ok(vec![1.0 / p.len() as f64; p.len()]),
        P0Choice::BoundaryMean => boundary_weights(p),
    }
}

/// Precomputed projector on one polygon.
#[derive(Debug, Clone)]
pub struct Projector {
    /// `P0 x`.
    center: Point,
    weights: Vec<f64>,
    /// `grad Pi phi_i = d_i^perp / (2 |P|)`.
    grads: Vec<Vector>,
    images: Vec<LinearPolynomial>,
}

impl Projector {
    pub fn new(p: &Polygon, choice: P0Choice) -> Result<Self> {
        let weights = p0_weights(p, choice)?;
        let o = p.vertices()[0];
        let shift: Vector = p
            .vertices()
            .iter()
            .zip(&weights)
            .map(|(v, w)| (v - o) * *w)
            .sum();
        let center = o + shift;
        let scale = 1.0 / (2.0 * p.area());
        let grads: Vec<Vector> = p
            .diagonals()
            .into_iter()
            .map(|d| rotate_cw(d) * scale)
            .collect();
        let images = grads
            .iter()
            .zip(&weights)
            .map(|(g, &wi)| LinearPolynomial::new(wi - g.dot(&center.coords), g.x, g.y))
            .collect();
        Ok(Projector {
            center,
            weights,
            grads,
            images,
        })
    }

    /// `(Pi phi_i)(x)` evaluated about the projection center, which avoids
    /// the cancellation in the monomial form far from the origin.
    pub fn eval_basis(&self, i: usize, x: Point) -> f64 {
        self.weights[i] + self.grads[i].dot(&(x - self.center))
    }

    /// Image of the i-th basis function.
    pub fn basis_image(&self, i: usize) -> LinearPolynomial {
        self.images[i]
    }

    pub fn project(&self, values: &[f64]) -> Result<LinearPolynomial> {
        if values.len() != self.images.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} nodal values, got {}",
                self.images.len(),
                values.len()
            )));
        }
        Ok(values
            .iter()
            .zip(&self.images)
            .map(|(&v, &img)| v * img)
            .sum())
    }
}

/// Projection of the i-th basis function.
pub fn project_basis_function(p: &Polygon, i: usize, choice: P0Choice) -> Result<LinearPolynomial> {
    if i >= p.len() {
        return Err(Error::InvalidInput(format!(
            "vertex index {i} out of range for {} vertices",
            p.len()
        )));
    }
    Ok(Projector::new(p, choice)?.basis_image(i))
}

/// Projection of the local function with the given vertex values.
pub fn project_nodal_function(
    p: &Polygon,
    values: &[f64],
    choice: P0Choice,
) -> Result<LinearPolynomial> {
    Projector::new(p, choice)?.project(values)
}

/// `D_ki = dof_k[(I - Pi) phi_i] = delta_ki - (Pi phi_i)(V_k)`.
pub fn residual_dofs(p: &Polygon, choice: P0Choice) -> Result<DMatrix<f64>> {
    let proj = Projector::new(p, choice)?;
    let n = p.len();
    Ok(DMatrix::from_fn(n, n, |k, i| {
        let delta = if k == i { 1.0 } else { 0.0 };
        delta - proj.eval_basis(i, p.vertices()[k])
    }))
}
