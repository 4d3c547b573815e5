//! Planar polygon geometry: orientation, areas, edges and normals.

use nalgebra::{Point2, Vector2};

use crate::error::{Error, Result};

pub type Point = Point2<f64>;
pub type Vector = Vector2<f64>;

/// Relative threshold below which an area counts as zero.
const AREA_EPS: f64 = 1e-14;

/// Shoelace signed area; positive for counter-clockwise loops. Coordinates
/// are taken relative to the first vertex.
pub fn signed_area(vertices: &[Point]) -> f64 {
    let n = vertices.len();
    let Some(&o) = vertices.first() else {
        return 0.0;
    };
    let mut twice = 0.0;
    for i in 1..n.saturating_sub(1) {
        twice += cross(vertices[i] - o, vertices[i + 1] - o);
    }
    0.5 * twice
}

/// Signed area of a vertex loop, rejecting loops with fewer than three
/// vertices or (numerically) zero area.
pub fn polygon_area(vertices: &[Point]) -> Result<f64> {
    if vertices.len() < 3 {
        return Err(Error::DegenerateGeometry(format!(
            "polygon needs at least 3 vertices, got {}",
            vertices.len()
        )));
    }
    let area = signed_area(vertices);
    let scale = bounding_diameter(vertices);
    if !area.is_finite() || area.abs() <= AREA_EPS * scale * scale {
        return Err(Error::DegenerateGeometry(format!(
            "polygon has zero area ({area:e})"
        )));
    }
    Ok(area)
}

fn bounding_diameter(vertices: &[Point]) -> f64 {
    let (mut lo, mut hi) = (vertices[0], vertices[0]);
    for v in vertices {
        lo = Point::new(lo.x.min(v.x), lo.y.min(v.y));
        hi = Point::new(hi.x.max(v.x), hi.y.max(v.y));
    }
    (hi - lo).norm()
}

/// Clockwise rotation by 90 degrees: `(x, y) -> (y, -x)`.
#[inline]
pub fn rotate_cw(v: Vector) -> Vector {
    Vector::new(v.y, -v.x)
}

/// Cross product z-component of two planar vectors.
#[inline]
pub fn cross(a: Vector, b: Vector) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Edge vectors, outward unit normals and lengths of a closed loop.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeData {
    /// `edges[i] = V[i+1] - V[i]`
    pub edges: Vec<Vector>,
    pub normals: Vec<Vector>,
    pub lengths: Vec<f64>,
}

/// A simple polygon stored counter-clockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Point>,
    area: f64,
    reoriented: bool,
}

impl Polygon {
    /// Validates the loop and normalizes it to counter-clockwise order.
    ///
    /// A clockwise input is reversed while keeping its first vertex in place,
    /// and [`Polygon::was_reoriented`] records that this happened.
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        if let Some(v) = vertices
            .iter()
            .find(|v| !v.x.is_finite() || !v.y.is_finite())
        {
            return Err(Error::InvalidInput(format!("non-finite vertex {v:?}")));
        }
        let n = vertices.len();
        for i in 0..n {
            if n >= 2 && vertices[i] == vertices[(i + 1) % n] {
                return Err(Error::DegenerateGeometry(format!(
                    "repeated consecutive vertex at index {i}"
                )));
            }
        }
        let area = polygon_area(&vertices)?;
        if area > 0.0 {
            Ok(Polygon {
                vertices,
                area,
                reoriented: false,
            })
        } else {
            let mut v = vertices;
            v[1..].reverse();
            Ok(Polygon {
                vertices: v,
                area: -area,
                reoriented: true,
            })
        }
    }

    pub fn from_coords(coords: &[[f64; 2]]) -> Result<Self> {
        Self::new(coords.iter().map(|c| Point::new(c[0], c[1])).collect())
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Cyclic vertex access.
    #[inline]
    pub fn vertex(&self, i: isize) -> Point {
        let n = self.vertices.len() as isize;
        self.vertices[i.rem_euclid(n) as usize]
    }

    /// Area (always positive after normalization).
    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn was_reoriented(&self) -> bool {
        self.reoriented
    }

    /// `d_i = V_{i+1} - V_{i-1}` for every vertex.
    pub fn diagonals(&self) -> Vec<Vector> {
        let n = self.len() as isize;
        (0..n)
            .map(|i| self.vertex(i + 1) - self.vertex(i - 1))
            .collect()
    }

    pub fn edge_data(&self) -> Result<EdgeData> {
        edge_data(self)
    }

    pub fn perimeter(&self) -> f64 {
        let n = self.len() as isize;
        (0..n)
            .map(|i| (self.vertex(i + 1) - self.vertex(i)).norm())
            .sum()
    }

    /// Area centroid.
    pub fn centroid(&self) -> Point {
        let n = self.len();
        let (mut cx, mut cy) = (0.0, 0.0);
        // shift to the first vertex for conditioning
        let o = self.vertices[0];
        for i in 0..n {
            let a = self.vertices[i] - o;
            let b = self.vertices[(i + 1) % n] - o;
            let w = a.x * b.y - b.x * a.y;
            cx += (a.x + b.x) * w;
            cy += (a.y + b.y) * w;
        }
        let s = 1.0 / (6.0 * self.area);
        Point::new(o.x + cx * s, o.y + cy * s)
    }

    /// Largest distance between two vertices.
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                d = d.max((b - a).norm());
            }
        }
        d
    }

    /// Strict convexity: every corner turns left.
    pub fn is_convex(&self) -> bool {
        let n = self.len() as isize;
        (0..n).all(|i| {
            let e0 = self.vertex(i) - self.vertex(i - 1);
            let e1 = self.vertex(i + 1) - self.vertex(i);
            cross(e0, e1) > 0.0
        })
    }

    pub fn translated(&self, t: Vector) -> Polygon {
        Polygon {
            vertices: self.vertices.iter().map(|v| v + t).collect(),
            area: self.area,
            reoriented: self.reoriented,
        }
    }
}

/// Edge vectors, outward unit normals and lengths.
pub fn edge_data(p: &Polygon) -> Result<EdgeData> {
    let n = p.len() as isize;
    let mut out = EdgeData {
        edges: Vec::with_capacity(p.len()),
        normals: Vec::with_capacity(p.len()),
        lengths: Vec::with_capacity(p.len()),
    };
    for i in 0..n {
        let e = p.vertex(i + 1) - p.vertex(i);
        let len = e.norm();
        if len == 0.0 {
            return Err(Error::DegenerateGeometry(format!("zero-length edge {i}")));
        }
        out.edges.push(e);
        // CCW loop: the outward normal is the clockwise rotation of the edge
        out.normals.push(rotate_cw(e) / len);
        out.lengths.push(len);
    }
    Ok(out)
}

/// A polygon with exactly four vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Quad(Polygon);

impl Quad {
    pub fn new(vertices: [Point; 4]) -> Result<Self> {
        Ok(Quad(Polygon::new(vertices.to_vec())?))
    }

    pub fn from_coords(coords: [[f64; 2]; 4]) -> Result<Self> {
        Self::new(coords.map(|c| Point::new(c[0], c[1])))
    }

    pub fn from_polygon(p: Polygon) -> Result<Self> {
        if p.len() != 4 {
            return Err(Error::ShapeMismatch(format!(
                "expected a quadrilateral, got {} vertices",
                p.len()
            )));
        }
        Ok(Quad(p))
    }

    pub fn polygon(&self) -> &Polygon {
        &self.0
    }

    pub fn into_polygon(self) -> Polygon {
        self.0
    }

    pub fn vertices(&self) -> [Point; 4] {
        let v = self.0.vertices();
        [v[0], v[1], v[2], v[3]]
    }

    pub fn area(&self) -> f64 {
        self.0.area()
    }

    pub fn is_convex(&self) -> bool {
        self.0.is_convex()
    }

    /// Uniformly scaled copy about the origin.
    pub fn scaled(&self, s: f64) -> Result<Quad> {
        Quad::new(self.vertices().map(|v| Point::from(v.coords * s)))
    }

    pub fn translated(&self, t: Vector) -> Quad {
        Quad(self.0.translated(t))
    }

    /// Relabel so that vertex `k` becomes the first one.
    pub fn rotated_labels(&self, k: usize) -> Quad {
        let v = self.vertices();
        Quad::new([v[k % 4], v[(k + 1) % 4], v[(k + 2) % 4], v[(k + 3) % 4]])
            .expect("relabeling preserves validity")
    }
}
