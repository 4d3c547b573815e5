//! Element-level reports: the decomposition `K = A + tau B` of one quad, the
//! projector on one polygon, and closed-form versus quadrature `tau`.

use std::fmt;

use nalgebra::{Matrix4, Vector4};
use serde::Serialize;

use crate::decomposition::{
    element_stiffness, gbc_expansion, label_sign, signed_triangle_areas, DiffusionTensor,
    ElementDecomposition,
};
use crate::error::{Error, Result};
use crate::geometry::{Polygon, Quad};
use crate::isoparametric::{
    fem_stiffness, hourglass_energy, parallelogram, tau_parallelogram, tau_rectangle,
    QuadratureRule,
};
use crate::projector::{p0_weights, residual_dofs, P0Choice, Projector};
use crate::vem::{tau_vem, TauPolicy};

fn rows4(m: &Matrix4<f64>) -> [[f64; 4]; 4] {
    let mut out = [[0.0; 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = m[(i, j)];
        }
    }
    out
}

/// The constant alternating matrix `s s^T / 4`, `s_k = (-1)^(k+1)` in
/// 1-based labels.
pub fn alternating_matrix() -> Matrix4<f64> {
    let s = Vector4::from_fn(|k, _| label_sign(k));
    s * s.transpose() * 0.25
}

#[derive(Debug, Clone, Serialize)]
pub struct GbcReport {
    pub a: [f64; 4],
    pub b: [f64; 4],
    pub c: [f64; 4],
    pub gamma: [f64; 4],
    pub determinant: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PolicyReport {
    pub policy: String,
    pub tau: Option<f64>,
    /// Error category and message when the policy does not apply.
    pub error: Option<String>,
    pub stiffness: Option<[[f64; 4]; 4]>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ElementReport {
    pub vertices: Vec<[f64; 2]>,
    pub kappa: DiffusionTensor,
    pub area: f64,
    pub convex: bool,
    pub a: [[f64; 4]; 4],
    pub b: [[f64; 4]; 4],
    pub gamma: [f64; 4],
    pub c: [[f64; 2]; 2],
    pub triangle_areas: [f64; 4],
    pub gbc: Option<GbcReport>,
    pub policies: Vec<PolicyReport>,
    /// `max |K_quad - (A + tau_quad B)|` with the 2x2 Gauss rule, or the
    /// reason it is unavailable.
    pub identity_residual: std::result::Result<f64, String>,
    /// `max |B - s s^T / 4|`; zero on parallelograms.
    pub alternating_deviation: f64,
}

impl ElementReport {
    pub fn b_is_alternating(&self) -> bool {
        self.alternating_deviation <= 1e-12
    }

    pub fn policy(&self, p: TauPolicy) -> Option<&PolicyReport> {
        let name = p.to_string();
        self.policies.iter().find(|r| r.policy == name)
    }
}

fn describe(e: &Error) -> String {
    format!("{}: {e}", e.category())
}

/// Decomposition of `K` on one quad, with `tau` and `K` under each policy.
pub fn inspect_element(
    q: &Quad,
    kappa: &DiffusionTensor,
    policies: &[TauPolicy],
) -> Result<ElementReport> {
    let dec = ElementDecomposition::new(q, kappa);
    let policies = policies
        .iter()
        .map(|&policy| match tau_vem(kappa, policy, q.polygon()) {
            Ok(tau) => PolicyReport {
                policy: policy.to_string(),
                tau: Some(tau),
                error: None,
                stiffness: Some(rows4(&dec.stiffness(tau))),
            },
            Err(e) => PolicyReport {
                policy: policy.to_string(),
                tau: None,
                error: Some(describe(&e)),
                stiffness: None,
            },
        })
        .collect();
    let rule = QuadratureRule::gauss(2)?;
    let identity_residual = fem_stiffness(q, kappa, &rule)
        .and_then(|k| {
            let tau = hourglass_energy(q, kappa, &rule)?;
            Ok((k - element_stiffness(q, kappa, tau)?).amax())
        })
        .map_err(|e| describe(&e));
    let gbc = gbc_expansion(q).ok().map(|g| GbcReport {
        a: g.a,
        b: g.b,
        c: g.c,
        gamma: g.gamma,
        determinant: g.determinant,
    });
    Ok(ElementReport {
        vertices: q.vertices().iter().map(|v| [v.x, v.y]).collect(),
        kappa: *kappa,
        area: dec.area,
        convex: q.is_convex(),
        a: rows4(&dec.a),
        b: rows4(&dec.b),
        gamma: dec.gamma.into(),
        c: [
            [dec.c[(0, 0)], dec.c[(0, 1)]],
            [dec.c[(1, 0)], dec.c[(1, 1)]],
        ],
        triangle_areas: signed_triangle_areas(q),
        gbc,
        policies,
        identity_residual,
        alternating_deviation: (dec.b - alternating_matrix()).amax(),
    })
}

fn write_matrix(f: &mut fmt::Formatter<'_>, name: &str, m: &[[f64; 4]; 4]) -> fmt::Result {
    writeln!(f, "{name} =")?;
    for row in m {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:>13.6e}")).collect();
        writeln!(f, "  [{}]", cells.join(" "))?;
    }
    Ok(())
}

fn fmt_vec(v: &[f64]) -> String {
    let cells: Vec<String> = v.iter().map(|x| format!("{x:.6e}")).collect();
    format!("[{}]", cells.join(", "))
}

impl fmt::Display for ElementReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verts: Vec<String> = self
            .vertices
            .iter()
            .map(|v| format!("({}, {})", v[0], v[1]))
            .collect();
        writeln!(f, "vertices: {}", verts.join(" "))?;
        writeln!(
            f,
            "kappa: [[{}, {}], [{}, {}]]",
            self.kappa.k11(),
            self.kappa.k12(),
            self.kappa.k12(),
            self.kappa.k22()
        )?;
        writeln!(f, "area: {:.6e}  convex: {}", self.area, self.convex)?;
        writeln!(
            f,
            "signed triangle areas T: {}",
            fmt_vec(&self.triangle_areas)
        )?;
        writeln!(f, "gamma: {}", fmt_vec(&self.gamma))?;
        writeln!(
            f,
            "C = [[{:.6e}, {:.6e}], [{:.6e}, {:.6e}]]",
            self.c[0][0], self.c[0][1], self.c[1][0], self.c[1][1]
        )?;
        write_matrix(f, "A", &self.a)?;
        write_matrix(f, "B", &self.b)?;
        if self.b_is_alternating() {
            writeln!(
                f,
                "B is the constant alternating matrix (deviation {:.1e})",
                self.alternating_deviation
            )?;
        }
        match &self.gbc {
            Some(g) => {
                writeln!(
                    f,
                    "GBC phi_i = a_i + b_i x + c_i y + gamma_i Psi_h, det = {:.6e}",
                    g.determinant
                )?;
                writeln!(f, "  a: {}", fmt_vec(&g.a))?;
                writeln!(f, "  b: {}", fmt_vec(&g.b))?;
                writeln!(f, "  c: {}", fmt_vec(&g.c))?;
            }
            None => writeln!(f, "GBC expansion unavailable")?,
        }
        for p in &self.policies {
            match (p.tau, &p.error) {
                (Some(t), _) => {
                    writeln!(f, "tau[{}] = {t:.15e}", p.policy)?;
                    if let Some(k) = &p.stiffness {
                        write_matrix(f, &format!("K[{}]", p.policy), k)?;
                    }
                }
                (None, Some(e)) => writeln!(f, "tau[{}] unavailable: {e}", p.policy)?,
                (None, None) => writeln!(f, "tau[{}] unavailable", p.policy)?,
            }
        }
        match &self.identity_residual {
            Ok(r) => writeln!(
                f,
                "identity residual |K_quad - (A + tau_quad B)|_max = {r:.3e}"
            ),
            Err(e) => writeln!(f, "identity residual unavailable: {e}"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProjectorReport {
    pub choice: P0Choice,
    pub p0_weights: Vec<f64>,
    /// `[a, b, c]` of `Pi phi_i = a + b x + c y`, one per vertex.
    pub basis_images: Vec<[f64; 3]>,
    /// Row `k`, column `i`: `delta_ki - (Pi phi_i)(V_k)`.
    pub residual_dofs: Vec<Vec<f64>>,
    /// `max |D^T D - B|` on quads.
    pub stabilization_mismatch: Option<f64>,
}

pub fn projector_report(p: &Polygon, choice: P0Choice) -> Result<ProjectorReport> {
    let proj = Projector::new(p, choice)?;
    let d = residual_dofs(p, choice)?;
    let n = p.len();
    let mismatch = Quad::from_polygon(p.clone()).ok().map(|q| {
        let b = ElementDecomposition::new(&q, &DiffusionTensor::identity()).b;
        let dtd = d.tr_mul(&d);
        (0..4)
            .flat_map(|i| (0..4).map(move |j| (i, j)))
            .fold(0.0f64, |m, (i, j)| m.max((dtd[(i, j)] - b[(i, j)]).abs()))
    });
    Ok(ProjectorReport {
        choice,
        p0_weights: p0_weights(p, choice)?,
        basis_images: (0..n)
            .map(|i| {
                let l = proj.basis_image(i);
                [l.a, l.b, l.c]
            })
            .collect(),
        residual_dofs: (0..n)
            .map(|k| (0..n).map(|i| d[(k, i)]).collect())
            .collect(),
        stabilization_mismatch: mismatch,
    })
}

impl fmt::Display for ProjectorReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "P0: {:?}", self.choice)?;
        writeln!(f, "P0 weights: {}", fmt_vec(&self.p0_weights))?;
        for (i, l) in self.basis_images.iter().enumerate() {
            writeln!(
                f,
                "Pi phi_{i} = {:.6e} + {:.6e} x + {:.6e} y",
                l[0], l[1], l[2]
            )?;
        }
        writeln!(f, "D =")?;
        for row in &self.residual_dofs {
            writeln!(f, "  {}", fmt_vec(row))?;
        }
        if let Some(m) = self.stabilization_mismatch {
            writeln!(f, "|D^T D - B|_max = {m:.3e}")?;
        }
        Ok(())
    }
}

/// Element shape for the `tau` table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauShape {
    Rectangle {
        a: f64,
        b: f64,
    },
    /// Side `a` along the x-axis, side `b` at angle `theta` (radians).
    Parallelogram {
        a: f64,
        b: f64,
        theta: f64,
    },
}

impl TauShape {
    pub fn quad(&self) -> Result<Quad> {
        match *self {
            TauShape::Rectangle { a, b } => {
                Quad::from_coords([[0.0, 0.0], [a, 0.0], [a, b], [0.0, b]])
            }
            TauShape::Parallelogram { a, b, theta } => parallelogram(a, b, theta),
        }
    }

    pub fn closed_form(&self, kappa: &DiffusionTensor) -> Result<f64> {
        match *self {
            TauShape::Rectangle { a, b } => tau_rectangle(a, b, kappa),
            TauShape::Parallelogram { a, b, theta } => tau_parallelogram(a, b, theta, kappa),
        }
    }
}

impl fmt::Display for TauShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TauShape::Rectangle { a, b } => write!(f, "rect({a}x{b})"),
            TauShape::Parallelogram { a, b, theta } => {
                write!(f, "para({a},{b},{:.4}deg)", theta.to_degrees())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TauTableRow {
    pub shape: String,
    pub k11: f64,
    pub k12: f64,
    pub k22: f64,
    pub tau_closed: f64,
    pub tau_quadrature: f64,
    pub tau_trace: f64,
    pub difference: f64,
}

/// Closed-form and 2x2 Gauss hourglass energies for every shape and tensor.
pub fn tau_table(shapes: &[TauShape], kappas: &[DiffusionTensor]) -> Result<Vec<TauTableRow>> {
    if shapes.is_empty() || kappas.is_empty() {
        return Err(Error::InvalidInput(
            "tau table needs at least one shape and one tensor".into(),
        ));
    }
    let rule = QuadratureRule::gauss(2)?;
    let mut rows = Vec::with_capacity(shapes.len() * kappas.len());
    for s in shapes {
        let q = s.quad()?;
        for k in kappas {
            let closed = s.closed_form(k)?;
            let quad = hourglass_energy(&q, k, &rule)?;
            rows.push(TauTableRow {
                shape: s.to_string(),
                k11: k.k11(),
                k12: k.k12(),
                k22: k.k22(),
                tau_closed: closed,
                tau_quadrature: quad,
                tau_trace: 0.5 * k.trace(),
                difference: (closed - quad).abs(),
            });
        }
    }
    Ok(rows)
}
