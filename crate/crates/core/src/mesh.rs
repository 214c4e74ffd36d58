//! Conforming triangle meshes of rectangles, uniform refinement, and
//! per-cell and per-edge geometry.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// A conforming, counter-clockwise oriented triangulation.
///
/// Local edge `i` of a cell is opposite local vertex `i` and is traversed
/// counter-clockwise: `e0 = v1→v2`, `e1 = v2→v0`, `e2 = v0→v1`. Global edges
/// are stored with their vertices in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<Point>,
    cells: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    cell_edges: Vec<[usize; 3]>,
    edge_cells: Vec<(usize, Option<usize>)>,
}

/// Oriented geometry of one edge. The normal points out of the lower-index
/// adjacent cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FacetGeometry {
    pub edge: usize,
    pub normal: Point,
    pub tangent: Point,
    pub midpoint: Point,
    pub length: f64,
}

/// The affine map from the reference triangle `(0,0), (1,0), (0,1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub origin: Point,
    /// Column-major Jacobian: `jac[c][r] = ∂x_r/∂x̂_c`.
    pub jac: [[f64; 2]; 2],
    pub det: f64,
    /// Inverse Jacobian in the same layout.
    pub inv: [[f64; 2]; 2],
}

impl AffineMap {
    pub fn to_physical(&self, xh: Point) -> Point {
        [
            self.origin[0] + self.jac[0][0] * xh[0] + self.jac[1][0] * xh[1],
            self.origin[1] + self.jac[0][1] * xh[0] + self.jac[1][1] * xh[1],
        ]
    }

    /// `J v` for a reference vector `v`.
    pub fn apply(&self, v: Point) -> Point {
        [
            self.jac[0][0] * v[0] + self.jac[1][0] * v[1],
            self.jac[0][1] * v[0] + self.jac[1][1] * v[1],
        ]
    }

    pub fn to_reference(&self, x: Point) -> Point {
        let d = [x[0] - self.origin[0], x[1] - self.origin[1]];
        [
            self.inv[0][0] * d[0] + self.inv[1][0] * d[1],
            self.inv[0][1] * d[0] + self.inv[1][1] * d[1],
        ]
    }
}

fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

impl Mesh {
    /// Builds the mesh from vertices and counter-clockwise cells.
    pub fn from_cells(vertices: Vec<Point>, cells: Vec<[usize; 3]>) -> Result<Self> {
        let mut edge_index: HashMap<[usize; 2], usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut edge_cells: Vec<(usize, Option<usize>)> = Vec::new();
        let mut cell_edges = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            if cell.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::Geometry(format!("cell {c} references a missing vertex")));
            }
            let mut ce = [0; 3];
            for (i, slot) in ce.iter_mut().enumerate() {
                let (a, b) = (cell[(i + 1) % 3], cell[(i + 2) % 3]);
                let key = [a.min(b), a.max(b)];
                let e = *edge_index.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edge_cells.push((c, None));
                    edges.len() - 1
                });
                if edge_cells[e].0 != c {
                    if edge_cells[e].1.is_some() {
                        return Err(Error::Geometry(format!(
                            "edge {key:?} is shared by more than two cells"
                        )));
                    }
                    edge_cells[e].1 = Some(c);
                }
                *slot = e;
            }
            cell_edges.push(ce);
        }
        let mesh = Self {
            vertices,
            cells,
            edges,
            cell_edges,
            edge_cells,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    /// Structured mesh of `[0, lx] × [0, ly]` with `nx × ny` squares, each
    /// split along its lower-left to upper-right diagonal.
    pub fn rectangle(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        if nx == 0 || ny == 0 || !(lx > 0.0) || !(ly > 0.0) {
            return Err(Error::Geometry(format!(
                "invalid rectangle {nx}x{ny} of size {lx}x{ly}"
            )));
        }
        let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                vertices.push([lx * i as f64 / nx as f64, ly * j as f64 / ny as f64]);
            }
        }
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        let mut cells = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let (v00, v10, v01, v11) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
                cells.push([v00, v10, v11]);
                cells.push([v00, v11, v01]);
            }
        }
        Self::from_cells(vertices, cells)
    }

    pub fn unit_square(n: usize) -> Result<Self> {
        Self::rectangle(n, n, 1.0, 1.0)
    }

    /// Red refinement: every cell splits into four similar children.
    pub fn refine(&self) -> Self {
        let mut vertices = self.vertices.clone();
        let nv = vertices.len();
        for e in &self.edges {
            let (a, b) = (self.vertices[e[0]], self.vertices[e[1]]);
            vertices.push([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]);
        }
        let mut cells = Vec::with_capacity(4 * self.cells.len());
        for (cell, ce) in self.cells.iter().zip(&self.cell_edges) {
            let [a, b, c] = *cell;
            let [ma, mb, mc] = [nv + ce[0], nv + ce[1], nv + ce[2]];
            cells.push([a, mc, mb]);
            cells.push([mc, b, ma]);
            cells.push([mb, ma, c]);
            cells.push([ma, mb, mc]);
        }
        Self::from_cells(vertices, cells).expect("refinement of a valid mesh is valid")
    }

    fn validate(&self) -> Result<()> {
        for c in 0..self.num_cells() {
            if !(self.area(c) > 0.0) {
                return Err(Error::Geometry(format!(
                    "cell {c} is degenerate or clockwise"
                )));
            }
        }
        let euler = self.num_vertices() as i64 - self.num_edges() as i64 + self.num_cells() as i64;
        if euler != 1 {
            return Err(Error::Geometry(format!(
                "Euler characteristic {euler} differs from 1"
            )));
        }
        Ok(())
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> Point {
        self.vertices[v]
    }

    pub fn cells(&self) -> &[[usize; 3]] {
        &self.cells
    }

    pub fn cell(&self, c: usize) -> [usize; 3] {
        self.cells[c]
    }

    pub fn edge(&self, e: usize) -> [usize; 2] {
        self.edges[e]
    }

    pub fn cell_edges(&self, c: usize) -> [usize; 3] {
        self.cell_edges[c]
    }

    /// The cells sharing edge `e`, lower index first.
    pub fn edge_cells(&self, e: usize) -> (usize, Option<usize>) {
        self.edge_cells[e]
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edge_cells[e].1.is_none()
    }

    pub fn boundary_edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_edges()).filter(|&e| self.is_boundary_edge(e))
    }

    pub fn cell_points(&self, c: usize) -> [Point; 3] {
        self.cells[c].map(|v| self.vertices[v])
    }

    pub fn affine_map(&self, c: usize) -> AffineMap {
        let [p0, p1, p2] = self.cell_points(c);
        let jac = [[p1[0] - p0[0], p1[1] - p0[1]], [p2[0] - p0[0], p2[1] - p0[1]]];
        let det = jac[0][0] * jac[1][1] - jac[1][0] * jac[0][1];
        let inv = [
            [jac[1][1] / det, -jac[0][1] / det],
            [-jac[1][0] / det, jac[0][0] / det],
        ];
        AffineMap {
            origin: p0,
            jac,
            det,
            inv,
        }
    }

    pub fn area(&self, c: usize) -> f64 {
        0.5 * self.affine_map(c).det
    }

    pub fn centroid(&self, c: usize) -> Point {
        let [a, b, d] = self.cell_points(c);
        [(a[0] + b[0] + d[0]) / 3.0, (a[1] + b[1] + d[1]) / 3.0]
    }

    /// Cell diameter: the longest edge.
    pub fn h_cell(&self, c: usize) -> f64 {
        self.cell_edges[c]
            .iter()
            .map(|&e| self.edge_length(e))
            .fold(0.0, f64::max)
    }

    /// Largest cell diameter.
    pub fn h_max(&self) -> f64 {
        (0..self.num_cells()).map(|c| self.h_cell(c)).fold(0.0, f64::max)
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e];
        dist(self.vertices[a], self.vertices[b])
    }

    /// Unit normal of edge `e`, outward from its lower-index cell.
    pub fn edge_normal(&self, e: usize) -> Point {
        let c = self.edge_cells[e].0;
        let i = self.local_edge_index(c, e).expect("edge belongs to its cell");
        self.local_outward_normal(c, i)
    }

    /// Unit outward normal of local edge `i` of cell `c`.
    pub fn local_outward_normal(&self, c: usize, i: usize) -> Point {
        let (a, b) = self.local_edge_vertices(c, i);
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        let (dx, dy) = (pb[0] - pa[0], pb[1] - pa[1]);
        let len = (dx * dx + dy * dy).sqrt();
        [dy / len, -dx / len]
    }

    pub fn facet(&self, e: usize) -> FacetGeometry {
        let [a, b] = self.edges[e];
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        let normal = self.edge_normal(e);
        FacetGeometry {
            edge: e,
            normal,
            tangent: [-normal[1], normal[0]],
            midpoint: [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])],
            length: dist(pa, pb),
        }
    }

    pub fn facet_geometry(&self) -> Vec<FacetGeometry> {
        (0..self.num_edges()).map(|e| self.facet(e)).collect()
    }

    /// Smallest interior angle over all cells, in radians.
    pub fn min_angle(&self) -> f64 {
        let mut best = f64::INFINITY;
        for c in 0..self.num_cells() {
            let p = self.cell_points(c);
            for i in 0..3 {
                let (o, a, b) = (p[i], p[(i + 1) % 3], p[(i + 2) % 3]);
                let u = [a[0] - o[0], a[1] - o[1]];
                let v = [b[0] - o[0], b[1] - o[1]];
                let cos = (u[0] * v[0] + u[1] * v[1]) / (dist(a, o) * dist(b, o));
                best = best.min(cos.clamp(-1.0, 1.0).acos());
            }
        }
        best
    }

    /// Counter-clockwise endpoints of local edge `i`.
    pub fn local_edge_vertices(&self, c: usize, i: usize) -> (usize, usize) {
        let cell = self.cells[c];
        (cell[(i + 1) % 3], cell[(i + 2) % 3])
    }

    pub fn local_edge_index(&self, c: usize, e: usize) -> Option<usize> {
        self.cell_edges[c].iter().position(|&x| x == e)
    }

    /// Legacy VTK unstructured grid with piecewise-constant cell data.
    pub fn to_vtk(&self, title: &str, scalars: &[(&str, &[f64])], vectors: &[(&str, &[Point])]) -> String {
        let mut s = String::new();
        let nc = self.num_cells();
        let _ = writeln!(s, "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID");
        let _ = writeln!(s, "POINTS {} double", self.num_vertices());
        for p in &self.vertices {
            let _ = writeln!(s, "{:?} {:?} 0", p[0], p[1]);
        }
        let _ = writeln!(s, "CELLS {nc} {}", 4 * nc);
        for c in &self.cells {
            let _ = writeln!(s, "3 {} {} {}", c[0], c[1], c[2]);
        }
        let _ = writeln!(s, "CELL_TYPES {nc}");
        for _ in 0..nc {
            s.push_str("5\n");
        }
        if !scalars.is_empty() || !vectors.is_empty() {
            let _ = writeln!(s, "CELL_DATA {nc}");
        }
        for (name, data) in scalars {
            let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
            for v in data.iter() {
                let _ = writeln!(s, "{v:?}");
            }
        }
        for (name, data) in vectors {
            let _ = writeln!(s, "VECTORS {name} double");
            for v in data.iter() {
                let _ = writeln!(s, "{:?} {:?} 0", v[0], v[1]);
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_cell_square() {
        let m = Mesh::unit_square(1).unwrap();
        assert_eq!((m.num_vertices(), m.num_edges(), m.num_cells()), (4, 5, 2));
        assert_eq!(m.boundary_edges().count(), 4);
        let diag = (0..5).find(|&e| !m.is_boundary_edge(e)).unwrap();
        assert_eq!(m.edge(diag), [0, 3]);
        assert_eq!(m.edge_cells(diag), (0, Some(1)));
        let n = m.edge_normal(diag);
        let r = 0.5f64.sqrt();
        assert!((n[0] + r).abs() < 1e-15 && (n[1] - r).abs() < 1e-15);
        assert!((m.h_max() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn counts_on_structured_meshes() {
        for n in [1, 2, 3, 8] {
            let m = Mesh::unit_square(n).unwrap();
            assert_eq!(m.num_cells(), 2 * n * n);
            assert_eq!(m.num_edges(), 3 * n * n + 2 * n);
            assert_eq!(m.boundary_edges().count(), 4 * n);
        }
    }

    #[test]
    fn refinement_matches_structured_mesh_counts() {
        let mut m = Mesh::unit_square(2).unwrap();
        for _ in 0..3 {
            let r = m.refine();
            assert_eq!(r.num_cells(), 4 * m.num_cells());
            assert!((r.h_max() - 0.5 * m.h_max()).abs() < 1e-14);
            let total: f64 = (0..r.num_cells()).map(|c| r.area(c)).sum();
            assert!((total - 1.0).abs() < 1e-13);
            m = r;
        }
        let s = Mesh::unit_square(16).unwrap();
        assert_eq!(m.num_edges(), s.num_edges());
        assert_eq!(m.num_vertices(), s.num_vertices());
    }

    #[test]
    fn normals_are_outward() {
        let m = Mesh::rectangle(3, 2, 2.0, 1.0).unwrap();
        for c in 0..m.num_cells() {
            let g = m.centroid(c);
            for i in 0..3 {
                let (a, _) = m.local_edge_vertices(c, i);
                let p = m.vertex(a);
                let n = m.local_outward_normal(c, i);
                assert!(n[0] * (p[0] - g[0]) + n[1] * (p[1] - g[1]) > 0.0);
            }
        }
    }

    #[test]
    fn facets() {
        let m = Mesh::unit_square(2).unwrap();
        for f in m.facet_geometry() {
            let [a, b] = m.edge(f.edge);
            let (pa, pb) = (m.vertex(a), m.vertex(b));
            let d = [pb[0] - pa[0], pb[1] - pa[1]];
            assert!((f.normal[0].hypot(f.normal[1]) - 1.0).abs() < 1e-14);
            assert!((f.normal[0] * d[0] + f.normal[1] * d[1]).abs() < 1e-14);
            if let (_, Some(c2)) = m.edge_cells(f.edge) {
                let i = m.local_edge_index(c2, f.edge).unwrap();
                let n2 = m.local_outward_normal(c2, i);
                assert!((n2[0] + f.normal[0]).abs() < 1e-14 && (n2[1] + f.normal[1]).abs() < 1e-14);
            }
            if (f.midpoint[0] - 1.0).abs() < 1e-14 {
                assert!((f.normal[0] - 1.0).abs() < 1e-14 && f.normal[1].abs() < 1e-14);
            }
        }
    }

    #[test]
    fn refinement_preserves_angles() {
        let mut m = Mesh::unit_square(1).unwrap();
        let a0 = m.min_angle();
        for _ in 0..4 {
            m = m.refine();
            assert!(m.min_angle() >= a0 - 1e-12);
        }
    }

    #[test]
    fn affine_map_roundtrip() {
        let m = Mesh::rectangle(2, 3, 1.5, 0.7).unwrap();
        for c in 0..m.num_cells() {
            let f = m.affine_map(c);
            let pts = m.cell_points(c);
            for (xh, p) in [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]].iter().zip(pts) {
                let x = f.to_physical(*xh);
                assert!(dist(x, p) < 1e-15);
                assert!(dist(f.to_reference(x), *xh) < 1e-14);
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Mesh::unit_square(0).is_err());
        let cw = Mesh::from_cells(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]], vec![[0, 1, 2]]);
        assert!(cw.is_err());
        let missing = Mesh::from_cells(vec![[0.0, 0.0]], vec![[0, 1, 2]]);
        assert!(missing.is_err());
    }

    #[test]
    fn vtk_header() {
        let m = Mesh::unit_square(1).unwrap();
        let s = m.to_vtk("t", &[("p", &[1.0, 2.0])], &[("u", &[[0.0, 1.0], [1.0, 0.0]])]);
        assert!(s.starts_with("# vtk DataFile Version 3.0\nt\nASCII"));
        assert!(s.contains("CELL_DATA 2\nSCALARS p double 1"));
        assert!(s.contains("VECTORS u double\n0.0 1.0 0"));
    }
}
