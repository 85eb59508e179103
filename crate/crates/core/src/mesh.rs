//! Structured triangulations of duct cross-sections.
//!
//! Every generator maps a regular grid onto the domain so that meshes are a
//! pure function of their [`DomainSpec`]. Cartesian shapes use a grid whose
//! cell diagonals point towards the domain centre, which keeps the square
//! mesh symmetric under both axis reflections and the diagonal swap.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::io::{fmt_real, LineReader};
use crate::{fingerprint, Error, Result};

/// Cross-section shapes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    /// The centred square `[-1/2, 1/2]^2`.
    UnitSquare,
    /// Centred `w x h` rectangle.
    Rectangle { w: f64, h: f64 },
    /// Right triangle with vertices `(0,0)`, `(1,0)`, `(0,1)`.
    RightTriangle,
    /// `[0,1]^2` minus the open square `(1/2,1) x (1/2,1)`.
    LShape,
    /// Centred ellipse with semi-axes `a` and `b`.
    Ellipse { a: f64, b: f64 },
}

impl Shape {
    /// Exact area of the continuous domain.
    pub fn area(&self) -> f64 {
        match *self {
            Shape::UnitSquare => 1.0,
            Shape::Rectangle { w, h } => w * h,
            Shape::RightTriangle => 0.5,
            Shape::LShape => 0.75,
            Shape::Ellipse { a, b } => std::f64::consts::PI * a * b,
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::UnitSquare => write!(f, "square"),
            Shape::Rectangle { w, h } => write!(f, "rectangle:{w},{h}"),
            Shape::RightTriangle => write!(f, "triangle"),
            Shape::LShape => write!(f, "l_shape"),
            Shape::Ellipse { a, b } => write!(f, "ellipse:{a},{b}"),
        }
    }
}

impl FromStr for Shape {
    type Err = Error;

    /// Accepts `square`, `triangle`, `l_shape`, `disk`, `rectangle[:w,h]` and
    /// `ellipse[:a,b]`. Bare `rectangle` is `2 x 1`, bare `ellipse` is
    /// `ellipse:0.5,0.35`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let pair = |args: Option<&str>, default: (f64, f64)| -> Result<(f64, f64)> {
            let Some(args) = args else { return Ok(default) };
            let parts: Vec<&str> = args.split(',').collect();
            if parts.len() != 2 {
                return Err(Error::invalid(format!("expected two sizes in '{s}'")));
            }
            let parse =
                |p: &str| p.trim().parse::<f64>().map_err(|_| Error::invalid(format!("bad size '{p}' in '{s}'")));
            Ok((parse(parts[0])?, parse(parts[1])?))
        };
        let shape = match name.trim() {
            "square" | "unit_square" => Shape::UnitSquare,
            "triangle" | "right_triangle" => Shape::RightTriangle,
            "l_shape" | "lshape" | "L" => Shape::LShape,
            "disk" => Shape::Ellipse { a: 1.0, b: 1.0 },
            "rectangle" => {
                let (w, h) = pair(args, (2.0, 1.0))?;
                Shape::Rectangle { w, h }
            }
            "ellipse" => {
                let (a, b) = pair(args, (0.5, 0.35))?;
                Shape::Ellipse { a, b }
            }
            other => return Err(Error::invalid(format!("unknown domain '{other}'"))),
        };
        Ok(shape)
    }
}

/// A shape together with its grid resolution (subdivisions per unit length).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainSpec {
    pub shape: Shape,
    pub resolution: usize,
}

impl DomainSpec {
    pub fn new(shape: Shape, resolution: usize) -> Self {
        Self { shape, resolution }
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution < 1 {
            return Err(Error::invalid("mesh resolution must be at least 1"));
        }
        let positive = |v: f64, what: &str| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(format!("{what} must be strictly positive, got {v}")))
            }
        };
        match self.shape {
            Shape::Rectangle { w, h } => {
                positive(w, "rectangle width")?;
                positive(h, "rectangle height")
            }
            Shape::Ellipse { a, b } => {
                positive(a, "ellipse semi-axis a")?;
                positive(b, "ellipse semi-axis b")
            }
            _ => Ok(()),
        }
    }
}

/// Area and constant P1 basis gradients of one triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleGeometry {
    pub area: f64,
    pub grads: [[f64; 2]; 3],
}

impl TriangleGeometry {
    fn from_points(p: [[f64; 2]; 3]) -> Self {
        let [[x0, y0], [x1, y1], [x2, y2]] = p;
        let twice_area = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0);
        let inv = 1.0 / twice_area;
        TriangleGeometry {
            area: 0.5 * twice_area,
            grads: [
                [(y1 - y2) * inv, (x2 - x1) * inv],
                [(y2 - y0) * inv, (x0 - x2) * inv],
                [(y0 - y1) * inv, (x1 - x0) * inv],
            ],
        }
    }
}

/// Conforming triangulation with tagged boundary vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<usize>,
    on_boundary: Vec<bool>,
    geometry: Vec<TriangleGeometry>,
}

impl Mesh {
    /// Builds a mesh from raw vertices and counter-clockwise triangles,
    /// deriving the boundary from edges that belong to a single triangle.
    pub fn from_parts(vertices: Vec<[f64; 2]>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let mut edges: HashMap<(usize, usize), u8> = HashMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= vertices.len() {
                    return Err(Error::invalid(format!(
                        "triangle {t} references vertex {v} but the mesh has {} vertices",
                        vertices.len()
                    )));
                }
            }
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        let mut on_boundary = vec![false; vertices.len()];
        for (&(a, b), &count) in &edges {
            match count {
                1 => {
                    on_boundary[a] = true;
                    on_boundary[b] = true;
                }
                2 => {}
                _ => return Err(Error::invalid(format!("edge ({a}, {b}) is shared by {count} triangles"))),
            }
        }
        let boundary = (0..vertices.len()).filter(|&v| on_boundary[v]).collect();
        let mut geometry = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let g = TriangleGeometry::from_points([vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]]);
            if !(g.area > 0.0) {
                return Err(Error::invalid(format!("triangle {t} has non-positive signed area {}", g.area)));
            }
            geometry.push(g);
        }
        Ok(Mesh { vertices, triangles, boundary, on_boundary, geometry })
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Sorted indices of the vertices on the domain boundary.
    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.on_boundary[v]
    }

    pub fn boundary_mask(&self) -> &[bool] {
        &self.on_boundary
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn geometry(&self) -> &[TriangleGeometry] {
        &self.geometry
    }

    pub fn triangle_geometry(&self, t: usize) -> Result<TriangleGeometry> {
        self.geometry.get(t).copied().ok_or(Error::IndexOutOfRange { index: t, len: self.geometry.len() })
    }

    pub fn centroid(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        [(pa[0] + pb[0] + pc[0]) / 3.0, (pa[1] + pb[1] + pc[1]) / 3.0]
    }

    pub fn total_area(&self) -> f64 {
        self.geometry.iter().map(|g| g.area).sum()
    }

    /// Number of distinct edges.
    pub fn n_edges(&self) -> usize {
        let mut edges: Vec<(usize, usize)> = self
            .triangles
            .iter()
            .flat_map(|t| (0..3).map(move |k| (t[k].min(t[(k + 1) % 3]), t[k].max(t[(k + 1) % 3]))))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges.len()
    }

    /// Short hex digest of the text serialization.
    pub fn fingerprint(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        fingerprint(&buf)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "mesh {} {}", self.vertices.len(), self.triangles.len())?;
        for [x, y] in &self.vertices {
            writeln!(w, "{} {}", fmt_real(*x), fmt_real(*y))?;
        }
        for [i, j, k] in &self.triangles {
            writeln!(w, "{i} {j} {k}")?;
        }
        write!(w, "boundary {}", self.boundary.len())?;
        for b in &self.boundary {
            write!(w, " {b}")?;
        }
        writeln!(w)?;
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = LineReader::new(r);
        let (ln, header) = lines.next_tokens()?;
        if header.len() != 3 || header[0] != "mesh" {
            return Err(Error::parse(ln, "expected 'mesh <N_v> <N_t>'"));
        }
        let nv: usize = lines.parse_at(ln, &header[1])?;
        let nt: usize = lines.parse_at(ln, &header[2])?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (ln, tok) = lines.next_tokens()?;
            if tok.len() != 2 {
                return Err(Error::parse(ln, "expected 'x y'"));
            }
            vertices.push([lines.parse_at(ln, &tok[0])?, lines.parse_at(ln, &tok[1])?]);
        }
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let (ln, tok) = lines.next_tokens()?;
            if tok.len() != 3 {
                return Err(Error::parse(ln, "expected 'i j k'"));
            }
            triangles.push([lines.parse_at(ln, &tok[0])?, lines.parse_at(ln, &tok[1])?, lines.parse_at(ln, &tok[2])?]);
        }
        let (ln, tok) = lines.next_tokens()?;
        if tok.len() < 2 || tok[0] != "boundary" {
            return Err(Error::parse(ln, "expected 'boundary <count> ...'"));
        }
        let count: usize = lines.parse_at(ln, &tok[1])?;
        let listed: Vec<usize> = tok[2..].iter().map(|t| lines.parse_at(ln, t)).collect::<Result<_>>()?;
        if listed.len() != count {
            return Err(Error::parse(ln, "boundary count does not match listed indices"));
        }
        let mesh = Mesh::from_parts(vertices, triangles).map_err(|e| Error::parse(ln, e.to_string()))?;
        if mesh.boundary != listed {
            return Err(Error::parse(ln, "listed boundary differs from the boundary edges"));
        }
        Ok(mesh)
    }
}

/// Builds the triangulation for `spec`.
pub fn generate_mesh(spec: &DomainSpec) -> Result<Mesh> {
    spec.validate()?;
    let n = spec.resolution;
    let cells = |len: f64| ((len * n as f64).round() as usize).max(1);
    match spec.shape {
        Shape::UnitSquare => cartesian(-0.5, -0.5, 1.0, 1.0, n, n, |_, _| true),
        Shape::Rectangle { w, h } => cartesian(-0.5 * w, -0.5 * h, w, h, cells(w), cells(h), |_, _| true),
        Shape::LShape => {
            // The re-entrant corner must sit on a grid line.
            let m = n + n % 2;
            let half = m / 2;
            cartesian(0.0, 0.0, 1.0, 1.0, m, m, |i, j| !(i >= half && j >= half))
        }
        Shape::RightTriangle => right_triangle(n),
        Shape::Ellipse { a, b } => ellipse(a, b, ((a.max(b) * n as f64).ceil() as usize).max(1)),
    }
}

/// Regular `nx x ny` cell grid on `[x0, x0+w] x [y0, y0+h]`, restricted to
/// cells accepted by `keep`.
fn cartesian(
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    nx: usize,
    ny: usize,
    keep: impl Fn(usize, usize) -> bool,
) -> Result<Mesh> {
    let (cx, cy) = (x0 + 0.5 * w, y0 + 0.5 * h);
    let coord = |i: usize, j: usize| [x0 + w * i as f64 / nx as f64, y0 + h * j as f64 / ny as f64];

    let mut index = vec![usize::MAX; (nx + 1) * (ny + 1)];
    let mut vertices = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            let touches =
                [(i, j), (i.wrapping_sub(1), j), (i, j.wrapping_sub(1)), (i.wrapping_sub(1), j.wrapping_sub(1))]
                    .iter()
                    .any(|&(ci, cj)| ci < nx && cj < ny && keep(ci, cj));
            if touches {
                index[j * (nx + 1) + i] = vertices.len();
                vertices.push(coord(i, j));
            }
        }
    }
    let id = |i: usize, j: usize| index[j * (nx + 1) + i];

    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            if !keep(i, j) {
                continue;
            }
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            let xc = x0 + w * (i as f64 + 0.5) / nx as f64 - cx;
            let yc = y0 + h * (j as f64 + 0.5) / ny as f64 - cy;
            if xc * yc > 0.0 {
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            } else {
                triangles.push([a, b, d]);
                triangles.push([b, c, d]);
            }
        }
    }
    Mesh::from_parts(vertices, triangles)
}

fn right_triangle(n: usize) -> Result<Mesh> {
    let h = 1.0 / n as f64;
    let mut index = vec![usize::MAX; (n + 1) * (n + 1)];
    let mut vertices = Vec::new();
    for j in 0..=n {
        for i in 0..=(n - j) {
            index[j * (n + 1) + i] = vertices.len();
            vertices.push([i as f64 * h, j as f64 * h]);
        }
    }
    let id = |i: usize, j: usize| index[j * (n + 1) + i];
    let mut triangles = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..(n - j) {
            let (a, b, d) = (id(i, j), id(i + 1, j), id(i, j + 1));
            if i + j + 1 < n {
                let c = id(i + 1, j + 1);
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            } else {
                triangles.push([a, b, d]);
            }
        }
    }
    Mesh::from_parts(vertices, triangles)
}

/// Concentric rings of `6k` vertices (k = 1..rings) around the centre,
/// stretched by the semi-axes.
fn ellipse(a: f64, b: f64, rings: usize) -> Result<Mesh> {
    use std::f64::consts::TAU;
    let start = |k: usize| if k == 0 { 0 } else { 1 + 3 * k * (k - 1) };
    let mut vertices = Vec::with_capacity(1 + 3 * rings * (rings + 1));
    vertices.push([0.0, 0.0]);
    for k in 1..=rings {
        let rho = k as f64 / rings as f64;
        for j in 0..6 * k {
            let theta = TAU * j as f64 / (6 * k) as f64;
            let (s, c) = theta.sin_cos();
            vertices.push([a * rho * c, b * rho * s]);
        }
    }

    let mut triangles = Vec::with_capacity(6 * rings * rings);
    let mut push = |tri: [usize; 3], vertices: &[[f64; 2]]| {
        let [p, q, r] = [vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]];
        let cross = (q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]);
        triangles.push(if cross > 0.0 { tri } else { [tri[0], tri[2], tri[1]] });
    };
    for j in 0..6 {
        push([0, 1 + j, 1 + (j + 1) % 6], &vertices);
    }
    for k in 2..=rings {
        let (inner_n, outer_n) = (6 * (k - 1), 6 * k);
        let (inner0, outer0) = (start(k - 1), start(k));
        let inner = |i: usize| inner0 + i % inner_n;
        let outer = |j: usize| outer0 + j % outer_n;
        let (mut i, mut j) = (0, 0);
        while i < inner_n || j < outer_n {
            // Compare the next angles as exact fractions of a full turn.
            let advance_outer = if i == inner_n {
                true
            } else if j == outer_n {
                false
            } else {
                (j + 1) * inner_n <= (i + 1) * outer_n
            };
            if advance_outer {
                push([inner(i), outer(j), outer(j + 1)], &vertices);
                j += 1;
            } else {
                push([inner(i), outer(j), inner(i + 1)], &vertices);
                i += 1;
            }
        }
    }
    Mesh::from_parts(vertices, triangles)
}
