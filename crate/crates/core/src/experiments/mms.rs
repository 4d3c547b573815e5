//! Manufactured-solution comparison of isoparametric FEM and VEM.

use std::sync::Arc;

use crate::assembly::{boundary_values_from_fn, solve_dirichlet, Scheme};
use crate::decomposition::DiffusionTensor;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::{Point, Vector};
use crate::mesh::{make_structured_quad_mesh, perturb_mesh, Mesh, Rect};
use crate::solver::SolveOptions;
use crate::vem::TauPolicy;

use super::{fill_rates, mean_tau, ErrorRow, Field, RunReport};

/// `u = x^3 - x y^2 + x^2 y - x y + x^2 - x + y - 1 + sin 5x sin 7y + ln(1 + x^2 + y^4)`
pub fn exact_u(p: Point) -> f64 {
    let (x, y) = (p.x, p.y);
    x * x * x - x * y * y + x * x * y - x * y + x * x - x + y - 1.0
        + (5.0 * x).sin() * (7.0 * y).sin()
        + (1.0 + x * x + y.powi(4)).ln()
}

pub fn grad_u(p: Point) -> Vector {
    let (x, y) = (p.x, p.y);
    let l = 1.0 + x * x + y.powi(4);
    Vector::new(
        3.0 * x * x - y * y + 2.0 * x * y - y + 2.0 * x - 1.0
            + 5.0 * (5.0 * x).cos() * (7.0 * y).sin()
            + 2.0 * x / l,
        -2.0 * x * y + x * x - x
            + 1.0
            + 7.0 * (5.0 * x).sin() * (7.0 * y).cos()
            + 4.0 * y.powi(3) / l,
    )
}

/// `[[1 + y^2, -x y], [-x y, 1 + x^2]]`; determinant `1 + x^2 + y^2`.
pub fn kappa(p: Point) -> DiffusionTensor {
    DiffusionTensor::new(1.0 + p.y * p.y, -p.x * p.y, 1.0 + p.x * p.x)
        .expect("coefficient is positive definite everywhere")
}

/// `f = -div(kappa grad u)`.
///
/// With `k11 = 1 + y^2`, `k12 = -xy`, `k22 = 1 + x^2`:
/// `div(kappa grad u) = k11 u_xx + 2 k12 u_xy + k22 u_yy - x u_x - y u_y`.
pub fn source(p: Point) -> f64 {
    let (x, y) = (p.x, p.y);
    let l = 1.0 + x * x + y.powi(4);
    let (s5, c5) = (5.0 * x).sin_cos();
    let (s7, c7) = (7.0 * y).sin_cos();
    let uxx = 6.0 * x + 2.0 * y + 2.0 - 25.0 * s5 * s7 + (2.0 * l - 4.0 * x * x) / (l * l);
    let uyy = -2.0 * x - 49.0 * s5 * s7 + (12.0 * y * y * l - 16.0 * y.powi(6)) / (l * l);
    let uxy = 2.0 * x - 2.0 * y - 1.0 + 35.0 * c5 * c7 - 8.0 * x * y.powi(3) / (l * l);
    let g = grad_u(p);
    let div = (1.0 + y * y) * uxx - 2.0 * x * y * uxy + (1.0 + x * x) * uyy - x * g.x - y * g.y;
    -div
}

#[derive(Debug, Clone, PartialEq)]
pub struct MmsConfig {
    pub sizes: Vec<usize>,
    /// Perturbation amplitude as a fraction of the local mesh size; 0 keeps
    /// the uniform grid.
    pub perturb: f64,
    pub seed: u64,
    pub schemes: Vec<Scheme>,
    pub solve: SolveOptions,
}

impl Default for MmsConfig {
    fn default() -> Self {
        MmsConfig {
            sizes: vec![10, 20, 40, 80],
            perturb: 0.0,
            seed: 42,
            schemes: vec![
                Scheme::IsoFem { order: 2 },
                Scheme::Vem(TauPolicy::VemTrace),
            ],
            solve: SolveOptions::default(),
        }
    }
}

impl MmsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sizes.len() < 2 {
            return Err(Error::InvalidInput(
                "at least two mesh sizes are needed for a rate".into(),
            ));
        }
        if self.sizes.contains(&0) {
            return Err(Error::InvalidInput("mesh sizes must be positive".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::InvalidInput("scheme list is empty".into()));
        }
        if !(0.0..0.5).contains(&self.perturb) {
            return Err(Error::InvalidInput(format!(
                "perturbation {} outside [0, 0.5)",
                self.perturb
            )));
        }
        Ok(())
    }
}

pub fn mms_mesh(n: usize, perturb: f64, seed: u64) -> Result<Mesh> {
    let m = make_structured_quad_mesh(n, n, Rect::UNIT)?;
    if perturb > 0.0 {
        perturb_mesh(&m, perturb, seed)
    } else {
        Ok(m)
    }
}

/// Discrete solution of the manufactured problem on one mesh.
#[derive(Debug, Clone)]
pub struct MmsRun {
    pub u: Vec<f64>,
    /// `u_h - u` at every vertex.
    pub error: Vec<f64>,
    pub linf: f64,
    pub mean_tau: f64,
}

/// Solves with `kappa` frozen at every cell centroid and boundary data from
/// the exact solution.
pub fn solve_mms(
    mesh: &Mesh,
    scheme: Scheme,
    exec: Execution,
    opts: SolveOptions,
) -> Result<MmsRun> {
    let g = boundary_values_from_fn(mesh, exact_u);
    let sol = solve_dirichlet(mesh, &kappa, Some(&source), &g, scheme, exec, opts)?;
    let error: Vec<f64> = sol
        .u
        .iter()
        .zip(mesh.points())
        .map(|(uh, &p)| uh - exact_u(p))
        .collect();
    let linf = error.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let mean_tau = mean_tau(&sol.taus);
    Ok(MmsRun {
        u: sol.u,
        error,
        linf,
        mean_tau,
    })
}

/// Every scheme on every mesh size; rows are grouped by scheme in size order.
pub fn run_mms(config: &MmsConfig, exec: Execution) -> Result<RunReport> {
    config.validate()?;
    let meshes: Vec<Arc<Mesh>> = exec.try_map(&config.sizes, |&n| {
        mms_mesh(n, config.perturb, config.seed).map(Arc::new)
    })?;
    let jobs: Vec<(Scheme, usize)> = config
        .schemes
        .iter()
        .flat_map(|&s| (0..meshes.len()).map(move |k| (s, k)))
        .collect();
    let runs = exec.try_map(&jobs, |&(scheme, k)| {
        solve_mms(&meshes[k], scheme, Execution::Sequential, config.solve)
            .map_err(|e| e.context(format!("{scheme} on {0}x{0}", config.sizes[k])))
    })?;
    let mut rows = Vec::with_capacity(jobs.len());
    let mut fields = Vec::with_capacity(jobs.len());
    for (&(scheme, k), run) in jobs.iter().zip(runs) {
        let mesh = &meshes[k];
        rows.push(ErrorRow {
            scheme: scheme.to_string(),
            n: config.sizes[k],
            h_mean: mesh.h_mean(),
            tau: Some(run.mean_tau),
            linf_error: Some(run.linf),
            interior_max: None,
            rate: None,
        });
        fields.push(Field {
            name: format!(
                "mms_{}_n{}",
                scheme.to_string().replace(':', "-"),
                config.sizes[k]
            ),
            mesh: Arc::clone(mesh),
            u: run.u,
            error: Some(run.error),
        });
    }
    fill_rates(&mut rows);
    Ok(RunReport { rows, fields })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_values() {
        assert_abs_diff_eq!(exact_u(Point::new(0.0, 0.0)), -1.0, epsilon = 1e-15);
        let expected = 5f64.sin() * 7f64.sin() + 3f64.ln();
        assert_abs_diff_eq!(exact_u(Point::new(1.0, 1.0)), expected, epsilon = 1e-14);
        assert_abs_diff_eq!(expected, 0.468612, epsilon = 1e-6);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = 1e-6;
        for _ in 0..50 {
            let p = Point::new(rng.random(), rng.random());
            let g = grad_u(p);
            let dx =
                (exact_u(p + Vector::new(h, 0.0)) - exact_u(p - Vector::new(h, 0.0))) / (2.0 * h);
            let dy =
                (exact_u(p + Vector::new(0.0, h)) - exact_u(p - Vector::new(0.0, h))) / (2.0 * h);
            assert_abs_diff_eq!(g.x, dx, epsilon = 1e-7);
            assert_abs_diff_eq!(g.y, dy, epsilon = 1e-7);
        }
    }

    /// Second-order central differences of the flux `kappa grad u`.
    fn fd_source(p: Point, h: f64) -> f64 {
        let flux = |q: Point| kappa(q).apply(grad_u(q));
        let ex = Vector::new(h, 0.0);
        let ey = Vector::new(0.0, h);
        let div = (flux(p + ex).x - flux(p - ex).x + flux(p + ey).y - flux(p - ey).y) / (2.0 * h);
        -div
    }

    #[test]
    fn source_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let p = Point::new(rng.random(), rng.random());
            let (f, fd) = (source(p), fd_source(p, 1e-5));
            assert!((f - fd).abs() <= 1e-6, "f={f} fd={fd} at {p:?}");
        }
    }

    #[test]
    fn config_validation() {
        let mut c = MmsConfig::default();
        assert!(c.validate().is_ok());
        c.sizes = vec![10];
        assert!(c.validate().is_err());
        c = MmsConfig {
            schemes: vec![],
            ..MmsConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
