//! Shortest-path distances on a [`SurfaceGraph`].
//!
//! All-pairs distances are `n` independent Dijkstra runs, one per source,
//! spread over the rayon pool. Each row is computed sequentially, so the
//! result does not depend on the number of workers.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{BoundarySet, SurfaceGraph};
use crate::scalar::Real;

/// Dense symmetric matrix of graph-geodesic distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix<T: Real>(DMatrix<T>);

impl<T: Real> DistanceMatrix<T> {
    /// Wraps a square matrix after checking shape, symmetry, zero diagonal
    /// and non-negativity.
    pub fn from_matrix(m: DMatrix<T>) -> Result<Self> {
        let (r, c) = m.shape();
        if r != c {
            return Err(Error::Dimension(format!("distance matrix is {r}x{c}")));
        }
        for i in 0..r {
            if m[(i, i)] != T::zero() {
                return Err(Error::InvalidInput(format!("nonzero diagonal at {i}")));
            }
            for j in 0..i {
                let (a, b) = (m[(i, j)], m[(j, i)]);
                if a != b {
                    return Err(Error::InvalidInput(format!("asymmetric at ({i}, {j})")));
                }
                if !(a >= T::zero()) {
                    return Err(Error::InvalidInput(format!(
                        "negative or NaN distance at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self(m))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<T> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.0
    }

    /// Distances from vertex `i`, as a contiguous slice.
    pub fn row(&self, i: usize) -> &[T] {
        // column-major storage; symmetric, so column i is row i
        let n = self.n();
        &self.0.as_slice()[i * n..(i + 1) * n]
    }

    /// Sub-matrix on the given vertices, in the given order.
    pub fn restrict(&self, indices: &[usize]) -> Self {
        Self(self.0.select_rows(indices).select_columns(indices))
    }

    pub fn max(&self) -> T {
        self.0.iter().fold(T::zero(), |m, &x| if x > m { x } else { m })
    }
}

/// Per-vertex distance to the nearest boundary vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceToBoundary<T: Real>(Vec<T>);

impl<T: Real> DistanceToBoundary<T> {
    pub fn new(values: Vec<T>) -> Self {
        Self(values)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    /// Minimum over boundary columns of an existing distance matrix. Agrees
    /// bit-for-bit with the entries of `d`, unlike a separate multi-source run.
    pub fn from_matrix(d: &DistanceMatrix<T>, boundary: &BoundarySet) -> Self {
        let vals = (0..d.n())
            .map(|i| {
                let row = d.row(i);
                boundary
                    .indices()
                    .iter()
                    .fold(T::infinity(), |m, &b| if row[b] < m { row[b] } else { m })
            })
            .collect();
        Self(vals)
    }
}

#[derive(Copy, Clone, PartialEq)]
struct Entry<T> {
    dist: T,
    vertex: usize,
}

impl<T: PartialOrd> Eq for Entry<T> {}

impl<T: PartialOrd> Ord for Entry<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, ties broken by vertex index
        other
            .dist
            .partial_cmp(&self.dist)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl<T: PartialOrd> PartialOrd for Entry<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra from a set of zero-distance sources over adjacency lists with
/// non-negative weights.
pub(crate) fn dijkstra<T: Real>(adjacency: &[Vec<(usize, T)>], sources: &[usize]) -> Vec<T> {
    let mut dist = vec![T::infinity(); adjacency.len()];
    let mut heap = BinaryHeap::new();
    for &s in sources {
        dist[s] = T::zero();
        heap.push(Entry {
            dist: T::zero(),
            vertex: s,
        });
    }
    while let Some(Entry { dist: d, vertex: u }) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adjacency[u] {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Entry { dist: nd, vertex: v });
            }
        }
    }
    dist
}

/// Exact graph distances from `source`; unreachable vertices are `+inf`.
pub fn single_source<T: Real>(graph: &SurfaceGraph<T>, source: usize) -> Vec<T> {
    assert!(source < graph.n_vertices(), "source {source} out of range");
    dijkstra(graph.adjacency(), &[source])
}

/// Distance from every vertex to the nearest source. An empty source set
/// yields `+inf` everywhere.
pub fn multi_source<T: Real>(graph: &SurfaceGraph<T>, sources: &BoundarySet) -> DistanceToBoundary<T> {
    DistanceToBoundary(dijkstra(graph.adjacency(), sources.indices()))
}

/// All-pairs distances over adjacency lists; entries may be infinite.
/// The result is made exactly symmetric by taking the smaller of the two
/// directed evaluations, which differ at most by summation order.
pub(crate) fn all_pairs<T: Real>(adjacency: &[Vec<(usize, T)>]) -> DMatrix<T> {
    let n = adjacency.len();
    let cols: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map(|s| dijkstra(adjacency, &[s]))
        .collect();
    let mut m = DMatrix::from_fn(n, n, |i, j| cols[j][i]);
    for j in 0..n {
        for i in 0..j {
            let v = if m[(i, j)] < m[(j, i)] { m[(i, j)] } else { m[(j, i)] };
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// All-pairs graph distances for a connected graph.
pub fn distance_matrix<T: Real>(graph: &SurfaceGraph<T>) -> Result<DistanceMatrix<T>> {
    let n = graph.n_vertices();
    if n == 0 {
        return Ok(DistanceMatrix(DMatrix::zeros(0, 0)));
    }
    let probe = single_source(graph, 0);
    if let Some(j) = probe.iter().position(|d| !d.is_finite()) {
        return Err(Error::Disconnected(0, j));
    }
    Ok(DistanceMatrix(all_pairs(graph.adjacency())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Point3;

    fn chain(xs: &[f64]) -> SurfaceGraph<f64> {
        let coords = xs.iter().map(|&x| Point3::new(x, 0.0, 0.0)).collect();
        SurfaceGraph::from_edges(coords, (1..xs.len()).map(|i| (i - 1, i))).unwrap()
    }

    fn unit_square_cycle() -> SurfaceGraph<f64> {
        let c = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(1.0, 1.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ];
        SurfaceGraph::from_edges(c, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap()
    }

    #[test]
    fn chain_single_source() {
        let g = chain(&[0.0, 1.0, 2.0]);
        assert_eq!(single_source(&g, 0), vec![0.0, 1.0, 2.0]);
        assert_eq!(single_source(&g, 1)[1], 0.0);
    }

    #[test]
    fn four_cycle() {
        assert_eq!(single_source(&unit_square_cycle(), 0), vec![0.0, 1.0, 2.0, 1.0]);
    }

    #[test]
    fn multi_source_chain() {
        let g = chain(&[0.0, 1.0, 2.0]);
        let b = BoundarySet::new(vec![0, 2], 3).unwrap();
        assert_eq!(multi_source(&g, &b).as_slice(), &[0.0, 1.0, 0.0]);
        let all = BoundarySet::new(vec![0, 1, 2], 3).unwrap();
        assert_eq!(multi_source(&g, &all).as_slice(), &[0.0, 0.0, 0.0]);
        let g4 = chain(&[0.0, 1.0, 2.0, 3.0]);
        let b0 = BoundarySet::new(vec![0], 4).unwrap();
        assert_eq!(multi_source(&g4, &b0).as_slice(), single_source(&g4, 0).as_slice());
        assert!(multi_source(&g, &BoundarySet::empty())
            .as_slice()
            .iter()
            .all(|d| d.is_infinite()));
    }

    #[test]
    fn chain_matrix() {
        let d = distance_matrix(&chain(&[0.0, 1.0, 2.0])).unwrap();
        let expected = DMatrix::from_row_slice(3, 3, &[0., 1., 2., 1., 0., 1., 2., 1., 0.]);
        assert_eq!(d.as_matrix(), &expected);
        assert_eq!(d.row(2), &[2.0, 1.0, 0.0]);
    }

    #[test]
    fn triangle_matrix() {
        let h = 3f64.sqrt() / 2.0;
        let c = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.5, h, 0.0),
        ];
        let g = SurfaceGraph::from_edges(c, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let d = distance_matrix(&g).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 0.0 } else { 1.0 };
                assert!((d.get(i, j) - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn disconnected_graph_is_an_error() {
        let c = vec![Point3::new(0.0f64, 0.0, 0.0), Point3::new(1.0, 0.0, 0.0), Point3::new(5.0, 0.0, 0.0)];
        let g = SurfaceGraph::from_edges(c, [(0, 1)]).unwrap();
        assert!(matches!(distance_matrix(&g), Err(Error::Disconnected(0, 2))));
        assert!(single_source(&g, 0)[2].is_infinite());
    }

    #[test]
    fn from_matrix_validates() {
        assert!(DistanceMatrix::from_matrix(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 0.0])).is_err());
        assert!(DistanceMatrix::from_matrix(DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 0.0])).is_err());
        assert!(DistanceMatrix::from_matrix(DMatrix::<f64>::zeros(2, 3)).is_err());
        assert!(DistanceMatrix::from_matrix(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).is_ok());
    }
}
