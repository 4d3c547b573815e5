//! Laplace problem on the unit square whose boundary data alternates in sign
//! from vertex to vertex, i.e. it oscillates exactly like the hourglass mode
//! of a uniform grid. A stabilization parameter far from the true hourglass
//! energy lets the oscillation leak into the interior.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::assembly::{boundary_values_from_fn, solve_dirichlet, Scheme};
use crate::decomposition::DiffusionTensor;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::Point;
use crate::mesh::{make_structured_quad_mesh, Mesh, Rect};
use crate::solver::SolveOptions;
use crate::vem::TauPolicy;

use super::{mean_tau, ErrorRow, Field, RunReport};

#[derive(Debug, Clone, PartialEq)]
pub struct HourglassConfig {
    /// Cells per side; must be even.
    pub sizes: Vec<usize>,
    pub taus: Vec<f64>,
    pub amplitude: f64,
    /// Vertices closer than this to the boundary are excluded from the
    /// interior metric.
    pub margin: f64,
    /// Cells per side of the isoparametric reference solution, which
    /// carries the same piecewise-linear boundary data as each coarse run;
    /// every size must divide it. `0` skips the reference comparison.
    pub reference_size: usize,
    /// Also run isoparametric FEM on every size.
    pub include_fem: bool,
    pub solve: SolveOptions,
}

impl Default for HourglassConfig {
    fn default() -> Self {
        HourglassConfig {
            sizes: vec![20, 40, 80],
            taus: vec![0.01, 0.1, 1.0, 10.0, 100.0, 2.0 / 3.0],
            amplitude: 0.25,
            margin: 0.25,
            reference_size: 160,
            include_fem: true,
            solve: SolveOptions::default(),
        }
    }
}

impl HourglassConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::InvalidInput("mesh size list is empty".into()));
        }
        if let Some(n) = self.sizes.iter().find(|&&n| n == 0 || n % 2 != 0) {
            return Err(Error::InvalidInput(format!(
                "mesh size {n} must be even and positive"
            )));
        }
        if self.taus.is_empty() {
            return Err(Error::InvalidInput("tau list is empty".into()));
        }
        if let Some(t) = self.taus.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return Err(Error::InvalidInput(format!("tau {t} must be positive")));
        }
        if !(self.amplitude > 0.0) {
            return Err(Error::InvalidInput(format!(
                "amplitude {} must be positive",
                self.amplitude
            )));
        }
        if !(0.0..0.5).contains(&self.margin) {
            return Err(Error::InvalidInput(format!(
                "margin {} outside [0, 0.5)",
                self.margin
            )));
        }
        if self.reference_size > 0 {
            if let Some(n) = self
                .sizes
                .iter()
                .find(|&&n| !self.reference_size.is_multiple_of(n))
            {
                return Err(Error::InvalidInput(format!(
                    "reference size {} is not a multiple of {n}",
                    self.reference_size
                )));
            }
        }
        Ok(())
    }
}

/// `amplitude * (-1)^(i + j)` on boundary vertex `(i, j)` of an `n x n` grid;
/// the corner `(0, 0)` gets `+amplitude`.
pub fn checkerboard_boundary(mesh: &Mesh, amplitude: f64) -> Result<BTreeMap<usize, f64>> {
    let grid = mesh.meta().grid.ok_or_else(|| {
        Error::InvalidInput("checkerboard data needs a structured grid mesh".into())
    })?;
    if grid.nx != grid.ny || grid.nx % 2 != 0 {
        return Err(Error::InvalidInput(format!(
            "checkerboard data needs an n x n grid with n even, got {}x{}",
            grid.nx, grid.ny
        )));
    }
    Ok(mesh
        .boundary()
        .iter()
        .map(|&id| {
            let (i, j) = grid.grid_coords(id);
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            (id, amplitude * sign)
        })
        .collect())
}

/// Piecewise-linear trace of the `n x n` checkerboard data at a boundary
/// point of the unit square, so finer meshes can carry the same data.
pub fn checkerboard_trace(n: usize, amplitude: f64, p: Point) -> f64 {
    let (s, r) = (p.x * n as f64, p.y * n as f64);
    let (i0, j0) = (
        s.floor().clamp(0.0, n as f64 - 1.0),
        r.floor().clamp(0.0, n as f64 - 1.0),
    );
    let (ts, tr) = (s - i0, r - j0);
    let sigma = |i: f64, j: f64| if (i + j) as i64 % 2 == 0 { 1.0 } else { -1.0 };
    amplitude
        * ((1.0 - ts) * (1.0 - tr) * sigma(i0, j0)
            + ts * (1.0 - tr) * sigma(i0 + 1.0, j0)
            + ts * tr * sigma(i0 + 1.0, j0 + 1.0)
            + (1.0 - ts) * tr * sigma(i0, j0 + 1.0))
}

/// `max |u|` over vertices at distance at least `margin` from the boundary
/// of the bounding box of the mesh.
pub fn interior_max(mesh: &Mesh, u: &[f64], margin: f64) -> f64 {
    let domain = mesh
        .meta()
        .grid
        .map(|g| g.domain)
        .unwrap_or_else(|| bounding_rect(mesh));
    mesh.points()
        .iter()
        .zip(u)
        .filter(|(p, _)| {
            let d = (p.x - domain.x0)
                .min(domain.x1 - p.x)
                .min(p.y - domain.y0)
                .min(domain.y1 - p.y);
            d >= margin - 1e-12
        })
        .fold(0.0, |m, (_, v)| m.max(v.abs()))
}

fn bounding_rect(mesh: &Mesh) -> Rect {
    let mut r = Rect {
        x0: f64::INFINITY,
        x1: f64::NEG_INFINITY,
        y0: f64::INFINITY,
        y1: f64::NEG_INFINITY,
    };
    for p in mesh.points() {
        r.x0 = r.x0.min(p.x);
        r.x1 = r.x1.max(p.x);
        r.y0 = r.y0.min(p.y);
        r.y1 = r.y1.max(p.y);
    }
    r
}

/// Solution of the checkerboard problem on an `n x n` grid.
pub fn solve_checkerboard(
    n: usize,
    amplitude: f64,
    scheme: Scheme,
    exec: Execution,
    opts: SolveOptions,
) -> Result<(Mesh, Vec<f64>, f64)> {
    let mesh = make_structured_quad_mesh(n, n, Rect::UNIT)?;
    let g = checkerboard_boundary(&mesh, amplitude)?;
    let sol = solve_dirichlet(
        &mesh,
        &|_| DiffusionTensor::identity(),
        None,
        &g,
        scheme,
        exec,
        opts,
    )?;
    Ok((mesh, sol.u, mean_tau(&sol.taus)))
}

/// Isoparametric solution on a `fine x fine` grid with the `n x n`
/// checkerboard trace, sampled at the vertices of the `n x n` grid.
pub fn reference_solution(
    n: usize,
    fine: usize,
    amplitude: f64,
    exec: Execution,
    opts: SolveOptions,
) -> Result<Vec<f64>> {
    if !fine.is_multiple_of(n) {
        return Err(Error::InvalidInput(format!(
            "reference size {fine} is not a multiple of {n}"
        )));
    }
    let mesh = make_structured_quad_mesh(fine, fine, Rect::UNIT)?;
    let g = boundary_values_from_fn(&mesh, |p| checkerboard_trace(n, amplitude, p));
    let sol = solve_dirichlet(
        &mesh,
        &|_| DiffusionTensor::identity(),
        None,
        &g,
        Scheme::IsoFem { order: 2 },
        exec,
        opts,
    )?;
    let stride = fine / n;
    let coarse = make_structured_quad_mesh(n, n, Rect::UNIT)?;
    let (cg, fg) = (
        coarse.meta().grid.expect("structured"),
        mesh.meta().grid.expect("structured"),
    );
    Ok((0..coarse.num_points())
        .map(|id| {
            let (i, j) = cg.grid_coords(id);
            sol.u[fg.point_index(i * stride, j * stride)]
        })
        .collect())
}

/// Interior metric for VEM with a constant `tau`.
pub fn hourglass_metric(
    n: usize,
    tau: f64,
    config: &HourglassConfig,
    exec: Execution,
) -> Result<f64> {
    let (mesh, u, _) = solve_checkerboard(
        n,
        config.amplitude,
        Scheme::Vem(TauPolicy::Constant(tau)),
        exec,
        config.solve,
    )?;
    Ok(interior_max(&mesh, &u, config.margin))
}

/// Runs VEM for every `(n, tau)` pair, plus isoparametric FEM on each size
/// when requested. `Linf_error` is the distance to the reference solution
/// sampled at the coarse vertices.
pub fn run_hourglass(config: &HourglassConfig, exec: Execution) -> Result<RunReport> {
    config.validate()?;
    let mut jobs: Vec<(usize, Scheme)> = Vec::new();
    for &n in &config.sizes {
        for &t in &config.taus {
            jobs.push((n, Scheme::Vem(TauPolicy::Constant(t))));
        }
        if config.include_fem {
            jobs.push((n, Scheme::IsoFem { order: 2 }));
        }
    }
    let references: Vec<Option<Vec<f64>>> = if config.reference_size > 0 {
        let r = config.reference_size;
        exec.try_map(&config.sizes, |&n| {
            reference_solution(n, r, config.amplitude, Execution::Sequential, config.solve)
                .map(Some)
                .map_err(|e| e.context(format!("reference solution on {r}x{r} for n = {n}")))
        })?
    } else {
        vec![None; config.sizes.len()]
    };
    let runs = exec.try_map(&jobs, |&(n, scheme)| {
        solve_checkerboard(
            n,
            config.amplitude,
            scheme,
            Execution::Sequential,
            config.solve,
        )
        .map_err(|e| e.context(format!("{scheme} on {n}x{n}")))
    })?;
    let mut report = RunReport::default();
    for (&(n, scheme), (mesh, u, tau)) in jobs.iter().zip(runs) {
        let k = config
            .sizes
            .iter()
            .position(|&s| s == n)
            .expect("job sizes come from the config");
        let error = references[k]
            .as_ref()
            .map(|r| u.iter().zip(r).map(|(a, b)| a - b).collect::<Vec<f64>>());
        report.rows.push(ErrorRow {
            scheme: scheme.to_string(),
            n,
            h_mean: mesh.h_mean(),
            tau: Some(tau),
            linf_error: error
                .as_ref()
                .map(|e| e.iter().fold(0.0, |m: f64, v| m.max(v.abs()))),
            interior_max: Some(interior_max(&mesh, &u, config.margin)),
            rate: None,
        });
        report.fields.push(Field {
            name: format!(
                "hourglass_{}_n{n}",
                scheme.to_string().replace([':', '/'], "-")
            ),
            mesh: Arc::new(mesh),
            u,
            error,
        });
    }
    Ok(report)
}
