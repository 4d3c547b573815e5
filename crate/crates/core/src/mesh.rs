//! Polygonal meshes, structured quad generators and seeded perturbation.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, Polygon};

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub const UNIT: Rect = Rect {
        x0: 0.0,
        x1: 1.0,
        y0: 0.0,
        y1: 1.0,
    };

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }
}

/// Layout of a tensor-product grid; point `(i, j)` has index `j * (nx + 1) + i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub nx: usize,
    pub ny: usize,
    pub domain: Rect,
}

impl GridInfo {
    pub fn point_index(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    pub fn grid_coords(&self, id: usize) -> (usize, usize) {
        (id % (self.nx + 1), id / (self.nx + 1))
    }
}

/// How a mesh was produced.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MeshMeta {
    pub generator: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridInfo>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    points: Vec<Point>,
    cells: Vec<Vec<usize>>,
    boundary: Vec<usize>,
    meta: MeshMeta,
}

#[derive(Serialize, Deserialize)]
struct MeshJson {
    points: Vec<[f64; 2]>,
    cells: Vec<Vec<usize>>,
    boundary: Vec<usize>,
    #[serde(default)]
    meta: MeshMeta,
}

impl Mesh {
    /// Builds a mesh and checks indices, cell orientation and that every
    /// boundary vertex touches a boundary edge.
    pub fn new(
        points: Vec<Point>,
        cells: Vec<Vec<usize>>,
        boundary: Vec<usize>,
        meta: MeshMeta,
    ) -> Result<Self> {
        let n = points.len();
        if let Some(p) = points.iter().find(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite mesh point {p:?}")));
        }
        for (c, cell) in cells.iter().enumerate() {
            if cell.len() < 3 {
                return Err(Error::InvalidInput(format!(
                    "cell {c} has {} vertices",
                    cell.len()
                )));
            }
            if let Some(&bad) = cell.iter().find(|&&i| i >= n) {
                return Err(Error::InvalidInput(format!(
                    "cell {c} references point {bad} (only {n} points)"
                )));
            }
        }
        let boundary: Vec<usize> = boundary
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if let Some(&bad) = boundary.iter().find(|&&i| i >= n) {
            return Err(Error::InvalidInput(format!(
                "boundary id {bad} out of range"
            )));
        }
        let mesh = Mesh {
            points,
            cells,
            boundary,
            meta,
        };
        for c in 0..mesh.cells.len() {
            let p = mesh.cell_polygon(c)?;
            if p.was_reoriented() {
                return Err(Error::DegenerateGeometry(format!("cell {c} is clockwise")));
            }
        }
        let on_edge: BTreeSet<usize> = mesh
            .boundary_edges()
            .into_iter()
            .flat_map(|(a, b)| [a, b])
            .collect();
        if let Some(&bad) = mesh.boundary.iter().find(|i| !on_edge.contains(i)) {
            return Err(Error::InvalidInput(format!(
                "boundary vertex {bad} does not lie on the domain boundary"
            )));
        }
        Ok(mesh)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    /// Sorted boundary vertex ids.
    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn meta(&self) -> &MeshMeta {
        &self.meta
    }

    pub fn num_points(&self) -> usize {
        self.points.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn is_boundary(&self, id: usize) -> bool {
        self.boundary.binary_search(&id).is_ok()
    }

    pub fn cell_polygon(&self, c: usize) -> Result<Polygon> {
        let verts = self.cells[c].iter().map(|&i| self.points[i]).collect();
        Polygon::new(verts).map_err(|e| e.in_cell(c))
    }

    /// Edges that belong to exactly one cell, as (smaller, larger) id pairs.
    pub fn boundary_edges(&self) -> Vec<(usize, usize)> {
        let mut count: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for cell in &self.cells {
            for k in 0..cell.len() {
                let (a, b) = (cell[k], cell[(k + 1) % cell.len()]);
                *count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        count
            .into_iter()
            .filter(|&(_, c)| c == 1)
            .map(|(e, _)| e)
            .collect()
    }

    /// Mean cell diameter.
    pub fn h_mean(&self) -> f64 {
        let total: f64 = (0..self.num_cells())
            .map(|c| self.cell_polygon(c).map(|p| p.diameter()).unwrap_or(0.0))
            .sum();
        total / self.num_cells() as f64
    }

    pub fn total_area(&self) -> Result<f64> {
        (0..self.num_cells())
            .map(|c| self.cell_polygon(c).map(|p| p.area()))
            .sum()
    }

    /// Applies `f` to every point, keeping connectivity and boundary flags.
    pub fn map_points(&self, f: impl Fn(Point) -> Point, generator: &str) -> Result<Mesh> {
        let mut meta = self.meta.clone();
        meta.generator = generator.to_string();
        Mesh::new(
            self.points.iter().map(|&p| f(p)).collect(),
            self.cells.clone(),
            self.boundary.clone(),
            meta,
        )
    }

    pub fn to_json(&self) -> Result<String> {
        let m = MeshJson {
            points: self.points.iter().map(|p| [p.x, p.y]).collect(),
            cells: self.cells.clone(),
            boundary: self.boundary.clone(),
            meta: self.meta.clone(),
        };
        Ok(serde_json::to_string(&m)?)
    }

    pub fn from_json(s: &str) -> Result<Mesh> {
        let m: MeshJson = serde_json::from_str(s)?;
        Mesh::new(
            m.points.iter().map(|c| Point::new(c[0], c[1])).collect(),
            m.cells,
            m.boundary,
            m.meta,
        )
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Mesh> {
        Mesh::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

/// Uniform `nx x ny` grid of axis-aligned quads over `domain`.
pub fn make_structured_quad_mesh(nx: usize, ny: usize, domain: Rect) -> Result<Mesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidInput(format!(
            "grid size must be positive, got {nx}x{ny}"
        )));
    }
    if !(domain.x1 > domain.x0 && domain.y1 > domain.y0) {
        return Err(Error::DegenerateGeometry(format!(
            "empty domain {domain:?}"
        )));
    }
    let grid = GridInfo { nx, ny, domain };
    let mut points = Vec::with_capacity((nx + 1) * (ny + 1));
    let mut boundary = Vec::new();
    for j in 0..=ny {
        // pin the last row/column exactly on the domain edge
        let y = if j == ny {
            domain.y1
        } else {
            domain.y0 + (domain.y1 - domain.y0) * j as f64 / ny as f64
        };
        for i in 0..=nx {
            let x = if i == nx {
                domain.x1
            } else {
                domain.x0 + (domain.x1 - domain.x0) * i as f64 / nx as f64
            };
            if i == 0 || j == 0 || i == nx || j == ny {
                boundary.push(points.len());
            }
            points.push(Point::new(x, y));
        }
    }
    let mut cells = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            cells.push(vec![
                grid.point_index(i, j),
                grid.point_index(i + 1, j),
                grid.point_index(i + 1, j + 1),
                grid.point_index(i, j + 1),
            ]);
        }
    }
    let meta = MeshMeta {
        generator: "structured".into(),
        grid: Some(grid),
        amplitude: None,
        seed: None,
    };
    Mesh::new(points, cells, boundary, meta)
}

/// Displaces every interior point by a seeded offset drawn uniformly from
/// `[-a h, a h]^2`, where `h` is the shortest edge incident to the point.
///
/// Each point draws from its own ChaCha stream (stream id = point index),
/// so offsets depend only on `(seed, point)`. Cells that stop being strictly
/// convex get the offsets of their vertices halved until they recover.
pub fn perturb_mesh(mesh: &Mesh, amplitude: f64, seed: u64) -> Result<Mesh> {
    if !(0.0..0.5).contains(&amplitude) {
        return Err(Error::InvalidInput(format!(
            "perturbation amplitude must lie in [0, 0.5), got {amplitude}"
        )));
    }
    let n = mesh.num_points();
    let mut h = vec![f64::INFINITY; n];
    for cell in mesh.cells() {
        for k in 0..cell.len() {
            let (a, b) = (cell[k], cell[(k + 1) % cell.len()]);
            let len = (mesh.points[a] - mesh.points[b]).norm();
            h[a] = h[a].min(len);
            h[b] = h[b].min(len);
        }
    }
    let mut offsets = vec![[0.0f64; 2]; n];
    if amplitude > 0.0 {
        for (id, off) in offsets.iter_mut().enumerate() {
            if mesh.is_boundary(id) || !h[id].is_finite() {
                continue;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(id as u64);
            let r = amplitude * h[id];
            *off = [rng.random_range(-r..=r), rng.random_range(-r..=r)];
        }
    }
    let displaced = |offsets: &[[f64; 2]]| -> Vec<Point> {
        mesh.points
            .iter()
            .zip(offsets)
            .map(|(p, o)| Point::new(p.x + o[0], p.y + o[1]))
            .collect()
    };
    const MAX_ROUNDS: usize = 40;
    for _ in 0..MAX_ROUNDS {
        let points = displaced(&offsets);
        let bad: Vec<usize> = (0..mesh.num_cells())
            .filter(|&c| {
                let verts = mesh.cells[c].iter().map(|&i| points[i]).collect();
                !matches!(Polygon::new(verts), Ok(p) if !p.was_reoriented() && p.is_convex())
            })
            .collect();
        if bad.is_empty() {
            let meta = MeshMeta {
                generator: "perturbed".into(),
                grid: mesh.meta.grid,
                amplitude: Some(amplitude),
                seed: Some(seed),
            };
            return Mesh::new(points, mesh.cells.clone(), mesh.boundary.clone(), meta);
        }
        for c in bad {
            for &i in &mesh.cells[c] {
                offsets[i] = [offsets[i][0] * 0.5, offsets[i][1] * 0.5];
            }
        }
    }
    Err(Error::DegenerateGeometry(format!(
        "amplitude {amplitude} cannot keep all cells convex after clamping"
    )))
}
