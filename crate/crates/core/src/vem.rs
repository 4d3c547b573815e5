//! Lowest-order virtual element matrices on polygons and the policies that
//! pick the stabilization parameter.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::decomposition::{consistency_matrix, DiffusionTensor};
use crate::error::{Error, Result};
use crate::geometry::{cross, Polygon, Quad};
use crate::isoparametric::{hourglass_energy, tau_parallelogram, tau_rectangle, QuadratureRule};
use crate::projector::{residual_dofs, P0Choice};

/// Relative tolerance for recognising rectangles and parallelograms.
pub const SHAPE_TOL: f64 = 1e-10;

/// How the stabilization parameter of each element is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauPolicy {
    /// `trace(kappa) / 2`, independent of the element shape.
    VemTrace,
    /// Hourglass energy of the bilinear element by an `order x order` Gauss rule.
    FemQuadrature {
        order: usize,
    },
    /// Closed form on axis-aligned rectangles.
    RectangleClosed,
    /// Closed form on parallelograms with one side along the x-axis.
    ParallelogramClosed,
    Constant(f64),
    /// `tau = 0`: consistency term only. Singular on quads; for studies.
    Unstabilized,
}

impl TauPolicy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            TauPolicy::Constant(v) if !(v > 0.0 && v.is_finite()) => {
                Err(Error::InvalidInput(format!(
                "constant tau must be positive (use `zero` for the unstabilized study), got {v}"
            )))
            }
            TauPolicy::FemQuadrature { order } => QuadratureRule::gauss(order).map(|_| ()),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for TauPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TauPolicy::VemTrace => write!(f, "trace"),
            TauPolicy::FemQuadrature { order } => write!(f, "fem:{order}"),
            TauPolicy::RectangleClosed => write!(f, "rect"),
            TauPolicy::ParallelogramClosed => write!(f, "para"),
            TauPolicy::Constant(v) => write!(f, "const:{v}"),
            TauPolicy::Unstabilized => write!(f, "zero"),
        }
    }
}

impl FromStr for TauPolicy {
    type Err = Error;

    /// `trace`, `fem[:order]`, `rect`, `para`, `const:<value>` (or a bare
    /// number), `zero`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let bad = || Error::InvalidInput(format!("unknown tau policy `{s}`"));
        let policy = match (head, arg) {
            ("trace", None) => TauPolicy::VemTrace,
            ("fem", None) => TauPolicy::FemQuadrature { order: 2 },
            ("fem", Some(o)) => TauPolicy::FemQuadrature {
                order: o.parse().map_err(|_| bad())?,
            },
            ("rect", None) => TauPolicy::RectangleClosed,
            ("para", None) => TauPolicy::ParallelogramClosed,
            ("zero", None) => TauPolicy::Unstabilized,
            ("const", Some(v)) => TauPolicy::Constant(parse_number(v).ok_or_else(bad)?),
            (v, None) => TauPolicy::Constant(parse_number(v).ok_or_else(bad)?),
            _ => return Err(bad()),
        };
        policy.validate()?;
        Ok(policy)
    }
}

/// Accepts plain floats and simple fractions such as `2/3`.
pub fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let (n, d): (f64, f64) = (n.trim().parse().ok()?, d.trim().parse().ok()?);
        return Some(n / d);
    }
    s.parse().ok()
}

/// Side lengths of an axis-aligned rectangle, if `q` is one.
pub fn rectangle_sides(q: &Quad) -> Option<(f64, f64)> {
    let v = q.vertices();
    let scale = q.polygon().diameter();
    let tol = SHAPE_TOL * scale;
    let e: Vec<_> = (0..4).map(|i| v[(i + 1) % 4] - v[i]).collect();
    let axis_aligned = (0..4).all(|i| e[i].x.abs() <= tol || e[i].y.abs() <= tol);
    let alternating = (0..4).all(|i| (e[i].x.abs() <= tol) != (e[(i + 1) % 4].x.abs() <= tol));
    let opposite = (e[0] + e[2]).norm() <= tol && (e[1] + e[3]).norm() <= tol;
    if !(axis_aligned && alternating && opposite) {
        return None;
    }
    let (w, h) = if e[0].y.abs() <= tol {
        (e[0].x.abs(), e[1].y.abs())
    } else {
        (e[1].x.abs(), e[0].y.abs())
    };
    Some((w, h))
}

/// `(a, b, theta)` of a parallelogram with a side parallel to the x-axis.
pub fn parallelogram_params(q: &Quad) -> Option<(f64, f64, f64)> {
    let v = q.vertices();
    let tol = SHAPE_TOL * q.polygon().diameter();
    let e: Vec<_> = (0..4).map(|i| v[(i + 1) % 4] - v[i]).collect();
    if (e[0] + e[2]).norm() > tol || (e[1] + e[3]).norm() > tol {
        return None;
    }
    // the horizontal edge traversed in +x is the bottom side
    let k = (0..4).find(|&i| e[i].y.abs() <= tol && e[i].x > 0.0)?;
    let a = e[k].norm();
    let side = v[(k + 3) % 4] - v[k];
    debug_assert!(cross(e[k], side) > 0.0);
    Some((a, side.norm(), side.y.atan2(side.x)))
}

/// Stabilization parameter of one element under `policy`.
pub fn tau_vem(kappa: &DiffusionTensor, policy: TauPolicy, p: &Polygon) -> Result<f64> {
    let as_quad = || {
        Quad::from_polygon(p.clone())
            .map_err(|_| Error::ShapeMismatch(format!("policy `{policy}` needs a quadrilateral")))
    };
    match policy {
        TauPolicy::VemTrace => Ok(0.5 * kappa.trace()),
        TauPolicy::FemQuadrature { order } => {
            hourglass_energy(&as_quad()?, kappa, &QuadratureRule::gauss(order)?)
        }
        TauPolicy::RectangleClosed => {
            let (a, b) = rectangle_sides(&as_quad()?).ok_or_else(|| {
                Error::ShapeMismatch("element is not an axis-aligned rectangle".into())
            })?;
            tau_rectangle(a, b, kappa)
        }
        TauPolicy::ParallelogramClosed => {
            let (a, b, theta) = parallelogram_params(&as_quad()?).ok_or_else(|| {
                Error::ShapeMismatch("element is not a parallelogram with a horizontal side".into())
            })?;
            tau_parallelogram(a, b, theta, kappa)
        }
        TauPolicy::Constant(v) => {
            policy.validate()?;
            Ok(v)
        }
        TauPolicy::Unstabilized => Ok(0.0),
    }
}

/// Consistency, stabilization and total element matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct VemElement {
    pub consistency: DMatrix<f64>,
    pub stabilization: DMatrix<f64>,
    pub stiffness: DMatrix<f64>,
}

/// `K_VEM = K_C + tau D^T D` with the dofi-dofi stabilization.
pub fn vem_element_matrices(p: &Polygon, kappa: &DiffusionTensor, tau: f64) -> Result<VemElement> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "tau must be finite and >= 0, got {tau}"
        )));
    }
    let consistency = consistency_matrix(p, kappa);
    let d = residual_dofs(p, P0Choice::VertexMean)?;
    let stabilization = d.tr_mul(&d) * tau;
    let stiffness = &consistency + &stabilization;
    Ok(VemElement {
        consistency,
        stabilization,
        stiffness,
    })
}
