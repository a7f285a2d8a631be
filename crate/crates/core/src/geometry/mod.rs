//! Triangle meshes, point clouds, boundaries, vertex areas and the weighted
//! surface graph that carries the discrete metric.

mod io;
pub mod primitives;

use std::collections::BTreeMap;

use nalgebra::{Point2, Point3};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Real;

pub use io::{
    load_index_list, load_mesh, load_pointcloud, parse_index_list, parse_off, parse_xyz,
    save_index_list, save_mesh, save_pointcloud, write_off, write_xyz,
};

#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh<T: Real> {
    vertices: Vec<Point3<T>>,
    faces: Vec<[usize; 3]>,
}

impl<T: Real> TriangleMesh<T> {
    pub fn new(vertices: Vec<Point3<T>>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let n = vertices.len();
        if let Some(i) = vertices
            .iter()
            .position(|p| !p.iter().all(|c| c.is_finite()))
        {
            return Err(Error::InvalidInput(format!(
                "vertex {i} has a non-finite coordinate"
            )));
        }
        for (fi, f) in faces.iter().enumerate() {
            if let Some(&bad) = f.iter().find(|&&v| v >= n) {
                return Err(Error::InvalidInput(format!(
                    "face {fi} references vertex {bad} but the mesh has {n} vertices"
                )));
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::InvalidInput(format!(
                    "face {fi} is degenerate ({} {} {})",
                    f[0], f[1], f[2]
                )));
            }
        }
        Ok(Self { vertices, faces })
    }

    pub fn vertices(&self) -> &[Point3<T>] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn face_area(&self, f: usize) -> T {
        let [a, b, c] = self.faces[f];
        let (pa, pb, pc) = (&self.vertices[a], &self.vertices[b], &self.vertices[c]);
        (pb - pa).cross(&(pc - pa)).norm() * T::lit(0.5)
    }

    pub fn total_area(&self) -> T {
        (0..self.faces.len()).fold(T::zero(), |acc, f| acc + self.face_area(f))
    }

    /// Unique undirected edges `(u, v)` with `u < v`, mapped to their incident
    /// face count.
    pub fn edge_face_counts(&self) -> BTreeMap<(usize, usize), usize> {
        let mut counts = BTreeMap::new();
        for f in &self.faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                *counts.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        counts
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud<T: Real> {
    points: Vec<Point3<T>>,
    parameterization: Option<Vec<Point2<T>>>,
}

impl<T: Real> PointCloud<T> {
    pub fn new(points: Vec<Point3<T>>) -> Result<Self> {
        if let Some(i) = points.iter().position(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidInput(format!(
                "point {i} has a non-finite coordinate"
            )));
        }
        Ok(Self {
            points,
            parameterization: None,
        })
    }

    pub fn with_parameterization(points: Vec<Point3<T>>, param: Vec<Point2<T>>) -> Result<Self> {
        if param.len() != points.len() {
            return Err(Error::Dimension(format!(
                "{} parameter samples for {} points",
                param.len(),
                points.len()
            )));
        }
        if param.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidInput(
                "non-finite parameter coordinate".into(),
            ));
        }
        let mut cloud = Self::new(points)?;
        cloud.parameterization = Some(param);
        Ok(cloud)
    }

    pub fn points(&self) -> &[Point3<T>] {
        &self.points
    }

    pub fn parameterization(&self) -> Option<&[Point2<T>]> {
        self.parameterization.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Sorted set of boundary vertex indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BoundarySet {
    indices: Vec<usize>,
}

impl BoundarySet {
    /// Validates a strictly increasing index list against a vertex count.
    pub fn new(indices: Vec<usize>, n_vertices: usize) -> Result<Self> {
        if let Some(w) = indices.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(format!(
                "boundary indices not strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if let Some(&last) = indices.last() {
            if last >= n_vertices {
                return Err(Error::InvalidInput(format!(
                    "boundary index {last} out of range for {n_vertices} vertices"
                )));
            }
        }
        Ok(Self { indices })
    }

    /// Sorts and deduplicates before validating.
    pub fn from_unsorted(mut indices: Vec<usize>, n_vertices: usize) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        Self::new(indices, n_vertices)
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.indices.binary_search(&v).is_ok()
    }
}

/// Per-vertex area weights (the diagonal of the lumped mass matrix).
#[derive(Debug, Clone, PartialEq)]
pub struct VertexAreas<T: Real> {
    areas: Vec<T>,
}

impl<T: Real> VertexAreas<T> {
    pub fn new(areas: Vec<T>) -> Result<Self> {
        if let Some(i) = areas.iter().position(|&a| !(a > T::zero()) || !a.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "vertex area {i} is not a positive finite number"
            )));
        }
        Ok(Self { areas })
    }

    pub fn uniform(n: usize, value: T) -> Result<Self> {
        Self::new(vec![value; n])
    }

    pub fn as_slice(&self) -> &[T] {
        &self.areas
    }

    pub fn len(&self) -> usize {
        self.areas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.areas.is_empty()
    }

    pub fn sum(&self) -> T {
        self.areas.iter().fold(T::zero(), |acc, &a| acc + a)
    }
}

/// Undirected graph over surface samples whose edge weights are the
/// Euclidean lengths of the edges.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceGraph<T: Real> {
    coords: Vec<Point3<T>>,
    adjacency: Vec<Vec<(usize, T)>>,
}

impl<T: Real> SurfaceGraph<T> {
    /// Builds the graph from an edge list; duplicates and orientation are
    /// ignored. Self-loops and zero-length edges are rejected.
    pub fn from_edges<I>(coords: Vec<Point3<T>>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let n = coords.len();
        let mut adjacency: Vec<Vec<(usize, T)>> = vec![Vec::new(); n];
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidInput(format!(
                    "edge ({a}, {b}) out of range for {n} vertices"
                )));
            }
            if a == b {
                return Err(Error::InvalidInput(format!("self-loop at vertex {a}")));
            }
            let w = (coords[a] - coords[b]).norm();
            if !(w > T::zero()) {
                return Err(Error::InvalidInput(format!(
                    "edge ({a}, {b}) has zero length (coincident vertices)"
                )));
            }
            adjacency[a].push((b, w));
            adjacency[b].push((a, w));
        }
        for nbrs in &mut adjacency {
            nbrs.sort_by_key(|&(v, _)| v);
            nbrs.dedup_by_key(|&mut (v, _)| v);
        }
        Ok(Self { coords, adjacency })
    }

    pub fn coords(&self) -> &[Point3<T>] {
        &self.coords
    }

    pub fn adjacency(&self) -> &[Vec<(usize, T)>] {
        &self.adjacency
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, T)] {
        &self.adjacency[v]
    }

    pub fn n_vertices(&self) -> usize {
        self.coords.len()
    }

    pub fn n_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Undirected edges as `(u, v, weight)` with `u < v`, in index order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, nbrs)| {
            nbrs.iter()
                .filter(move |&&(v, _)| u < v)
                .map(move |&(v, w)| (u, v, w))
        })
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.n_vertices();
        let mut label = vec![usize::MAX; n];
        let mut out = Vec::new();
        for start in 0..n {
            if label[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut comp = vec![start];
            label[start] = id;
            let mut head = 0;
            while head < comp.len() {
                let u = comp[head];
                head += 1;
                for &(v, _) in &self.adjacency[u] {
                    if label[v] == usize::MAX {
                        label[v] = id;
                        comp.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.n_vertices() <= 1 || self.components().len() == 1
    }
}

/// Vertices incident to a mesh edge that belongs to exactly one face.
pub fn extract_boundary<T: Real>(mesh: &TriangleMesh<T>) -> BoundarySet {
    let mut indices: Vec<usize> = mesh
        .edge_face_counts()
        .into_iter()
        .filter(|&(_, count)| count == 1)
        .flat_map(|((a, b), _)| [a, b])
        .collect();
    indices.sort_unstable();
    indices.dedup();
    BoundarySet { indices }
}

/// Barycentric vertex areas: every vertex receives a third of each incident
/// triangle's area.
pub fn vertex_areas<T: Real>(mesh: &TriangleMesh<T>) -> Result<VertexAreas<T>> {
    let mut areas = vec![T::zero(); mesh.n_vertices()];
    let third = T::one() / T::lit(3.0);
    for (fi, f) in mesh.faces().iter().enumerate() {
        let share = mesh.face_area(fi) * third;
        for &v in f {
            areas[v] += share;
        }
    }
    if let Some(v) = areas.iter().position(|&a| !(a > T::zero())) {
        return Err(Error::InvalidInput(format!(
            "vertex {v} has zero area (isolated vertex or only degenerate faces)"
        )));
    }
    VertexAreas::new(areas)
}

pub fn mesh_graph<T: Real>(mesh: &TriangleMesh<T>) -> Result<SurfaceGraph<T>> {
    let edges: Vec<(usize, usize)> = mesh.edge_face_counts().into_keys().collect();
    SurfaceGraph::from_edges(mesh.vertices().to_vec(), edges)
}

/// Symmetrized k-nearest-neighbour graph: an edge is kept when either
/// endpoint selects the other. Ties in distance are broken by index.
pub fn knn_graph<T: Real>(cloud: &PointCloud<T>, k: usize) -> Result<SurfaceGraph<T>> {
    let n = cloud.len();
    if k == 0 || k >= n {
        return Err(Error::InvalidInput(format!(
            "k = {k} must satisfy 0 < k < {n} (point count)"
        )));
    }
    let pts = cloud.points();
    let selections: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut cand: Vec<(T, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| ((pts[i] - pts[j]).norm_squared(), j))
                .collect();
            let by_dist = |a: &(T, usize), b: &(T, usize)| {
                a.0.partial_cmp(&b.0)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.1.cmp(&b.1))
            };
            cand.select_nth_unstable_by(k - 1, by_dist);
            cand.truncate(k);
            cand.into_iter().map(|(_, j)| j).collect()
        })
        .collect();
    let edges = selections
        .iter()
        .enumerate()
        .flat_map(|(i, sel)| sel.iter().map(move |&j| (i, j)));
    SurfaceGraph::from_edges(pts.to_vec(), edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    macro_rules! assert_close {
        ($a:expr, $b:expr, $tol:expr) => {{
            let (a, b): (f64, f64) = ($a, $b);
            assert!((a - b).abs() <= $tol, "{a} vs {b} (tol {})", $tol);
        }};
    }

    fn p(x: f64, y: f64, z: f64) -> Point3<f64> {
        Point3::new(x, y, z)
    }

    fn unit_square() -> TriangleMesh<f64> {
        TriangleMesh::new(
            vec![p(0., 0., 0.), p(1., 0., 0.), p(1., 1., 0.), p(0., 1., 0.)],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn mesh_rejects_bad_faces() {
        let v = vec![p(0., 0., 0.), p(1., 0., 0.), p(0., 1., 0.)];
        assert!(TriangleMesh::new(v.clone(), vec![[0, 1, 5]]).is_err());
        assert!(TriangleMesh::new(v.clone(), vec![[0, 1, 1]]).is_err());
        let mut nan = v.clone();
        nan[1].x = f64::NAN;
        assert!(TriangleMesh::new(nan, vec![[0, 1, 2]]).is_err());
    }

    #[test]
    fn boundary_of_single_triangle_is_all_vertices() {
        let m = TriangleMesh::new(
            vec![p(0., 0., 0.), p(1., 0., 0.), p(0., 1., 0.)],
            vec![[0, 1, 2]],
        )
        .unwrap();
        assert_eq!(extract_boundary(&m).indices(), &[0, 1, 2]);
    }

    #[test]
    fn boundary_of_tetrahedron_is_empty() {
        assert!(extract_boundary(&primitives::tetrahedron::<f64>()).is_empty());
    }

    #[test]
    fn boundary_of_square_is_all_four() {
        assert_eq!(extract_boundary(&unit_square()).indices(), &[0, 1, 2, 3]);
    }

    #[test]
    fn nonmanifold_edge_is_not_boundary() {
        // three triangles fanning around edge (0, 1)
        let m = TriangleMesh::new(
            vec![p(0., 0., 0.), p(1., 0., 0.), p(0., 1., 0.), p(0., -1., 0.), p(0., 0., 1.)],
            vec![[0, 1, 2], [1, 0, 3], [0, 1, 4]],
        )
        .unwrap();
        let counts = m.edge_face_counts();
        assert_eq!(counts[&(0, 1)], 3);
        // 0 and 1 still lie on single-face edges of the fan
        assert_eq!(extract_boundary(&m).indices(), &[0, 1, 2, 3, 4]);
    }

    #[test]
    fn areas_of_single_triangle() {
        let m = TriangleMesh::new(
            vec![p(0., 0., 0.), p(1., 0., 0.), p(0., 1., 0.)],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let a = vertex_areas(&m).unwrap();
        for &x in a.as_slice() {
            assert_close!(x, 1.0 / 6.0, 1e-15);
        }
    }

    #[test]
    fn areas_of_square_favor_diagonal() {
        let a = vertex_areas(&unit_square()).unwrap();
        let a = a.as_slice();
        assert_close!(a[0], 1.0 / 3.0, 1e-15);
        assert_close!(a[2], 1.0 / 3.0, 1e-15);
        assert_close!(a[1], 1.0 / 6.0, 1e-15);
        assert_close!(a[3], 1.0 / 6.0, 1e-15);
    }

    #[test]
    fn areas_sum_to_total_area() {
        let m = primitives::icosphere::<f64>(2);
        let a = vertex_areas(&m).unwrap();
        let total = m.total_area();
        assert!(((a.sum() - total) / total).abs() <= 1e-9);
    }

    #[test]
    fn isolated_vertex_has_no_area() {
        let m = TriangleMesh::new(
            vec![p(0., 0., 0.), p(1., 0., 0.), p(0., 1., 0.), p(5., 5., 5.)],
            vec![[0, 1, 2]],
        )
        .unwrap();
        assert!(vertex_areas(&m).is_err());
    }

    #[test]
    fn mesh_graph_of_right_triangle() {
        let m = TriangleMesh::new(
            vec![p(0., 0., 0.), p(1., 0., 0.), p(0., 1., 0.)],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let g = mesh_graph(&m).unwrap();
        let mut w: Vec<f64> = g.edges().map(|e| e.2).collect();
        w.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(w.len(), 3);
        assert_close!(w[0], 1.0, 1e-15);
        assert_close!(w[1], 1.0, 1e-15);
        assert_close!(w[2], 2f64.sqrt(), 1e-15);
    }

    #[test]
    fn shared_edge_appears_once() {
        let g = mesh_graph(&unit_square()).unwrap();
        assert_eq!(g.n_edges(), 5);
        assert_eq!(mesh_graph(&primitives::tetrahedron::<f64>()).unwrap().n_edges(), 6);
    }

    #[test]
    fn knn_chain() {
        let c = PointCloud::new(vec![p(0., 0., 0.), p(1., 0., 0.), p(2., 0., 0.)]).unwrap();
        let g = knn_graph(&c, 1).unwrap();
        let e: Vec<_> = g.edges().map(|(a, b, _)| (a, b)).collect();
        assert_eq!(e, vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn knn_full_is_complete() {
        let pts: Vec<_> = (0..6).map(|i| p(i as f64, (i * i) as f64, 0.5)).collect();
        let c = PointCloud::new(pts).unwrap();
        let g = knn_graph(&c, 5).unwrap();
        assert_eq!(g.n_edges(), 15);
        assert!(knn_graph(&c, 6).is_err());
        assert!(knn_graph(&c, 0).is_err());
    }

    #[test]
    fn graph_weights_are_euclidean_and_symmetric() {
        let m = primitives::icosphere::<f64>(1);
        let g = mesh_graph(&m).unwrap();
        for (u, v, w) in g.edges() {
            assert!((w - (g.coords()[u] - g.coords()[v]).norm()).abs() <= 1e-12);
            assert!(g.neighbors(v).iter().any(|&(x, wx)| x == u && wx == w));
        }
    }

    #[test]
    fn boundary_set_validation() {
        assert!(BoundarySet::new(vec![1, 1], 3).is_err());
        assert!(BoundarySet::new(vec![2, 1], 3).is_err());
        assert!(BoundarySet::new(vec![0, 3], 3).is_err());
        assert_eq!(
            BoundarySet::from_unsorted(vec![2, 0, 2], 3).unwrap().indices(),
            &[0, 2]
        );
    }
}
