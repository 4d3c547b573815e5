//! Global assembly, Dirichlet elimination and the linear solve.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::decomposition::DiffusionTensor;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::{Point, Polygon, Quad};
use crate::isoparametric::{fem_stiffness, hourglass_energy, QuadratureRule};
use crate::mesh::Mesh;
use crate::solver::{pcg, CsrMatrix, SolveOptions, SolveReport};
use crate::vem::{tau_vem, vem_element_matrices, TauPolicy};

/// Per-element diffusion coefficient, evaluated at the cell's area centroid.
pub type KappaField<'a> = &'a (dyn Fn(Point) -> DiffusionTensor + Sync);
pub type SourceField<'a> = &'a (dyn Fn(Point) -> f64 + Sync);

/// Discretization used for every element of a mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    Vem(TauPolicy),
    /// Bilinear isoparametric elements with an `order x order` Gauss rule.
    IsoFem {
        order: usize,
    },
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::Vem(p) => write!(f, "vem:{p}"),
            Scheme::IsoFem { order: 2 } => write!(f, "isofem"),
            Scheme::IsoFem { order } => write!(f, "isofem:{order}"),
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;

    /// `isofem[:order]` or `vem[:<tau policy>]` (policy defaults to `trace`).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, rest) = s.split_once(':').unwrap_or((s, ""));
        match head {
            "isofem" | "fem" => {
                let order = if rest.is_empty() {
                    2
                } else {
                    rest.parse().map_err(|_| {
                        Error::InvalidInput(format!("bad quadrature order in `{s}`"))
                    })?
                };
                QuadratureRule::gauss(order)?;
                Ok(Scheme::IsoFem { order })
            }
            "vem" if rest.is_empty() => Ok(Scheme::Vem(TauPolicy::VemTrace)),
            "vem" => Ok(Scheme::Vem(rest.parse()?)),
            _ => Err(Error::InvalidInput(format!("unknown scheme `{s}`"))),
        }
    }
}

/// One element matrix and the stabilization parameter it carries.
///
/// For isoparametric elements `tau` is the quadrature hourglass energy, so
/// both schemes report the quantity multiplying `B`.
pub fn element_matrix(
    p: &Polygon,
    kappa: &DiffusionTensor,
    scheme: Scheme,
) -> Result<(DMatrix<f64>, f64)> {
    match scheme {
        Scheme::Vem(policy) => {
            let tau = tau_vem(kappa, policy, p)?;
            Ok((vem_element_matrices(p, kappa, tau)?.stiffness, tau))
        }
        Scheme::IsoFem { order } => {
            let q = Quad::from_polygon(p.clone())?;
            let rule = QuadratureRule::gauss(order)?;
            let k = fem_stiffness(&q, kappa, &rule)?;
            let tau = hourglass_energy(&q, kappa, &rule)?;
            Ok((DMatrix::from_fn(4, 4, |i, j| k[(i, j)]), tau))
        }
    }
}

/// Assembled operator and load before boundary conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Stabilization parameter of every cell.
    pub taus: Vec<f64>,
}

/// Scatters all element matrices into one sparse matrix.
///
/// Element matrices may be computed concurrently; the scatter runs in cell
/// order so the result does not depend on `exec`. The load uses
/// `f(centroid) |P| / N_P` on every vertex of a cell.
pub fn assemble_global(
    mesh: &Mesh,
    kappa: KappaField,
    source: Option<SourceField>,
    scheme: Scheme,
    exec: Execution,
) -> Result<GlobalSystem> {
    let locals = exec.try_map_range(mesh.num_cells(), |c| {
        let poly = mesh.cell_polygon(c)?;
        let centroid = poly.centroid();
        let (k, tau) = element_matrix(&poly, &kappa(centroid), scheme).map_err(|e| e.in_cell(c))?;
        let load = source.map(|f| f(centroid) * poly.area() / poly.len() as f64);
        Ok((k, tau, load))
    })?;
    let n = mesh.num_points();
    let mut triplets = Vec::with_capacity(locals.iter().map(|(k, _, _)| k.len()).sum());
    let mut rhs = vec![0.0; n];
    let mut taus = Vec::with_capacity(locals.len());
    for (cell, (k, tau, load)) in mesh.cells().iter().zip(locals) {
        for (a, &i) in cell.iter().enumerate() {
            for (b, &j) in cell.iter().enumerate() {
                triplets.push((i, j, k[(a, b)]));
            }
            if let Some(l) = load {
                rhs[i] += l;
            }
        }
        taus.push(tau);
    }
    Ok(GlobalSystem {
        matrix: CsrMatrix::from_triplets(n, n, triplets),
        rhs,
        taus,
    })
}

/// Boundary values sampled from a function.
pub fn boundary_values_from_fn(mesh: &Mesh, g: impl Fn(Point) -> f64) -> BTreeMap<usize, f64> {
    mesh.boundary()
        .iter()
        .map(|&i| (i, g(mesh.points()[i])))
        .collect()
}

/// System restricted to the free (non-Dirichlet) vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// System index -> mesh vertex.
    pub free_dofs: Vec<usize>,
    /// Mesh vertex -> system index, `None` on constrained vertices.
    pub dof_of_vertex: Vec<Option<usize>>,
    pub boundary_values: BTreeMap<usize, f64>,
}

/// Symmetric elimination: constrained rows and columns are dropped and their
/// coupling moves to the right-hand side.
pub fn apply_dirichlet(
    global: &GlobalSystem,
    mesh: &Mesh,
    g: &BTreeMap<usize, f64>,
) -> Result<SparseSystem> {
    if let Some(missing) = mesh.boundary().iter().find(|i| !g.contains_key(i)) {
        return Err(Error::InvalidInput(format!(
            "missing boundary value for vertex {missing}"
        )));
    }
    let n = mesh.num_points();
    if let Some((&bad, _)) = g.iter().find(|(&i, _)| i >= n) {
        return Err(Error::InvalidInput(format!(
            "boundary value for unknown vertex {bad}"
        )));
    }
    let mut dof_of_vertex = vec![None; n];
    let mut free_dofs = Vec::new();
    for (v, slot) in dof_of_vertex.iter_mut().enumerate() {
        if !g.contains_key(&v) {
            *slot = Some(free_dofs.len());
            free_dofs.push(v);
        }
    }
    let m = free_dofs.len();
    let mut rhs = Vec::with_capacity(m);
    let mut triplets = Vec::new();
    for (row, &v) in free_dofs.iter().enumerate() {
        let mut b = global.rhs[v];
        for (col, val) in global.matrix.row(v) {
            match dof_of_vertex[col] {
                Some(j) => triplets.push((row, j, val)),
                None => b -= val * g[&col],
            }
        }
        rhs.push(b);
    }
    Ok(SparseSystem {
        matrix: CsrMatrix::from_triplets(m, m, triplets),
        rhs,
        free_dofs,
        dof_of_vertex,
        boundary_values: g.clone(),
    })
}

impl SparseSystem {
    /// Full vertex vector from free values and boundary data.
    pub fn expand(&self, free: &[f64]) -> Vec<f64> {
        self.dof_of_vertex
            .iter()
            .enumerate()
            .map(|(v, d)| match d {
                Some(j) => free[*j],
                None => self.boundary_values[&v],
            })
            .collect()
    }
}

/// Solves the constrained system and returns values at every mesh vertex.
pub fn solve(sys: &SparseSystem, opts: SolveOptions) -> Result<(Vec<f64>, SolveReport)> {
    let (x, report) = pcg(&sys.matrix, &sys.rhs, opts)?;
    Ok((sys.expand(&x), report))
}

/// Vertex solution of one Dirichlet problem.
#[derive(Debug, Clone)]
pub struct Solution {
    pub u: Vec<f64>,
    pub report: SolveReport,
    pub taus: Vec<f64>,
}

/// Assemble, constrain and solve in one call.
pub fn solve_dirichlet(
    mesh: &Mesh,
    kappa: KappaField,
    source: Option<SourceField>,
    g: &BTreeMap<usize, f64>,
    scheme: Scheme,
    exec: Execution,
    opts: SolveOptions,
) -> Result<Solution> {
    let global = assemble_global(mesh, kappa, source, scheme, exec)?;
    let sys = apply_dirichlet(&global, mesh, g)?;
    let (u, report) = solve(&sys, opts)?;
    Ok(Solution {
        u,
        report,
        taus: global.taus,
    })
}
