//! Consistency criteria for pairs of points on a partial surface.
//!
//! A pair `(i, j)` is *guaranteed* when its partial-surface distance cannot
//! have been shortened by any missing region. The boundary-distance
//! criterion (`ct_mask`) accepts a pair when `D_ij <= db_i + db_j`. The
//! wormhole criterion tightens the bound on any path leaving the partial
//! surface: it must exit at some boundary vertex `B1`, re-enter at `B2` and
//! cover at least the straight-line distance between them, so
//!
//! ```text
//! K_ij = min over (B1, B2) of  d(i, B1) + d(j, B2) + sqrt(c_m) * |B1 - B2|
//! ```
//!
//! and the pair is guaranteed when `D_ij <= K_ij`. With `c_m = 1` this is
//! the Euclidean wormhole bound; `c_m = 0` drops the shortcut term and gives
//! back the boundary-distance criterion.
//!
//! `K` is available two ways: [`threshold_naive`] evaluates the minimum
//! directly in boundary-pair blocks, and [`threshold_fast`] reruns all-pairs
//! shortest paths on the graph with an extra edge between every two
//! boundary vertices, which yields `min(D, K)`. Both give the same mask.

use nalgebra::{DMatrix, Matrix2, Point3};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geodesics::{all_pairs, DistanceMatrix, DistanceToBoundary};
use crate::geometry::{BoundarySet, SurfaceGraph};
use crate::scalar::Real;

/// Relative slack in `D <= K`, so that pairs sitting exactly on the
/// threshold stay guaranteed despite summation-order roundoff.
pub const MASK_RTOL: f64 = 1e-9;

/// Default number of boundary pairs evaluated per block by the naive
/// threshold.
pub const DEFAULT_BATCH: usize = 256 * 256;

/// The metric floor `c_m`: a lower bound on the smallest eigenvalue of the
/// surface metric, scaling the straight-line shortcut by `sqrt(c_m)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricScale<T: Real>(T);

impl<T: Real> MetricScale<T> {
    pub fn new(c_m: T) -> Result<Self> {
        if !(c_m >= T::zero()) || !c_m.is_finite() {
            return Err(Error::InvalidInput(format!(
                "metric floor must be finite and non-negative, got {c_m}"
            )));
        }
        Ok(Self(c_m))
    }

    /// `c_m = 1`: the metric induced by the embedding space.
    pub fn euclidean() -> Self {
        Self(T::one())
    }

    pub fn value(self) -> T {
        self.0
    }

    pub fn shortcut_factor(self) -> T {
        self.0.sqrt()
    }
}

impl<T: Real> Default for MetricScale<T> {
    fn default() -> Self {
        Self::euclidean()
    }
}

#[inline]
pub(crate) fn within<T: Real>(d: T, k: T, slack: T) -> bool {
    let scale = if d > T::one() { d } else { T::one() };
    d <= k + slack * scale
}

fn check_shape<T: Real>(d: &DistanceMatrix<T>, k: &DMatrix<T>) -> Result<()> {
    if k.shape() != (d.n(), d.n()) {
        return Err(Error::Dimension(format!(
            "threshold is {}x{}, distances are {n}x{n}",
            k.nrows(),
            k.ncols(),
            n = d.n()
        )));
    }
    Ok(())
}

/// `M_ij = 1` iff `D_ij <= K_ij` (with [`MASK_RTOL`] slack).
pub fn binary_mask<T: Real>(d: &DistanceMatrix<T>, k: &DMatrix<T>) -> Result<DMatrix<bool>> {
    check_shape(d, k)?;
    let slack = T::lit(MASK_RTOL);
    let dm = d.as_matrix();
    Ok(DMatrix::from_fn(d.n(), d.n(), |i, j| {
        within(dm[(i, j)], k[(i, j)], slack)
    }))
}

/// `Ms_ij = min(K_ij / D_ij, 1)`, exactly 1 wherever the binary mask is 1
/// (including the diagonal).
pub fn soft_mask<T: Real>(d: &DistanceMatrix<T>, k: &DMatrix<T>) -> Result<DMatrix<T>> {
    check_shape(d, k)?;
    let slack = T::lit(MASK_RTOL);
    let dm = d.as_matrix();
    Ok(DMatrix::from_fn(d.n(), d.n(), |i, j| {
        let (dij, kij) = (dm[(i, j)], k[(i, j)]);
        if within(dij, kij, slack) {
            T::one()
        } else {
            let r = kij / dij;
            if r < T::one() {
                r
            } else {
                T::one()
            }
        }
    }))
}

/// Threshold of the boundary-distance criterion: `db_i + db_j`.
pub fn ct_threshold<T: Real>(db: &DistanceToBoundary<T>) -> DMatrix<T> {
    let v = db.as_slice();
    DMatrix::from_fn(v.len(), v.len(), |i, j| v[i] + v[j])
}

/// Boundary-distance criterion mask: `D_ij <= db_i + db_j`.
pub fn ct_mask<T: Real>(d: &DistanceMatrix<T>, db: &DistanceToBoundary<T>) -> Result<DMatrix<bool>> {
    if db.as_slice().len() != d.n() {
        return Err(Error::Dimension(format!(
            "{} boundary distances for {} vertices",
            db.as_slice().len(),
            d.n()
        )));
    }
    binary_mask(d, &ct_threshold(db))
}

fn symmetrize_min<T: Real>(k: &mut DMatrix<T>) {
    let n = k.nrows();
    for j in 0..n {
        for i in 0..j {
            let v = if k[(i, j)] < k[(j, i)] { k[(i, j)] } else { k[(j, i)] };
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
}

/// Wormhole threshold `K` by direct minimisation over boundary pairs.
///
/// The boundary pairs are split into blocks of at most `batch` pairs (whole
/// rows of `B1`). Within a block the inner minimum over `B2` is taken first,
/// `H(j, B1) = min_B2 d(j, B2) + s * |B1 - B2|`, then
/// `K_ij = min(K_ij, min_B1 d(i, B1) + H(j, B1))`. Memory is
/// `O(n * |B| + n * batch / |B|)` on top of the output.
///
/// `coords` are the vertex positions of the graph `d` was computed on. An
/// empty boundary yields `+inf` everywhere.
pub fn threshold_naive<T: Real>(
    d: &DistanceMatrix<T>,
    boundary: &BoundarySet,
    coords: &[Point3<T>],
    scale: MetricScale<T>,
    batch: usize,
) -> Result<DMatrix<T>> {
    let n = d.n();
    if coords.len() != n {
        return Err(Error::Dimension(format!(
            "{} coordinates for a {n}-vertex distance matrix",
            coords.len()
        )));
    }
    if boundary.indices().last().is_some_and(|&b| b >= n) {
        return Err(Error::InvalidInput("boundary index out of range".into()));
    }
    if batch == 0 {
        return Err(Error::InvalidInput("batch size must be positive".into()));
    }
    let nb = boundary.len();
    if nb == 0 {
        return Ok(DMatrix::from_element(n, n, T::infinity()));
    }
    let bidx = boundary.indices();
    let s = scale.shortcut_factor();

    // db_rows(k, c) = d(c, b_k): one contiguous column per vertex
    let db_rows = DMatrix::from_fn(nb, n, |k, c| d.get(c, bidx[k]));
    // shortcut(k, a) = s * |b_k - b_a|
    let shortcut = DMatrix::from_fn(nb, nb, |k, a| s * (coords[bidx[k]] - coords[bidx[a]]).norm());

    let chunk = (batch / nb).clamp(1, nb);
    let mut k_mat = DMatrix::from_element(n, n, T::infinity());

    for start in (0..nb).step_by(chunk) {
        let end = (start + chunk).min(nb);
        let width = end - start;
        // h(a, c) = min_k d(c, b_k) + shortcut(k, start + a)
        let mut h = DMatrix::from_element(width, n, T::infinity());
        h.par_column_iter_mut().enumerate().for_each(|(c, mut col)| {
            let dc = db_rows.column(c);
            for a in 0..width {
                let sc = shortcut.column(start + a);
                let mut best = T::infinity();
                for k in 0..nb {
                    let v = dc[k] + sc[k];
                    if v < best {
                        best = v;
                    }
                }
                col[a] = best;
            }
        });
        k_mat.par_column_iter_mut().enumerate().for_each(|(c, mut out)| {
            for a in 0..width {
                let hc = h[(a, c)];
                let drow = d.row(bidx[start + a]);
                for (o, &dr) in out.iter_mut().zip(drow) {
                    let v = dr + hc;
                    if v < *o {
                        *o = v;
                    }
                }
            }
        });
    }
    symmetrize_min(&mut k_mat);
    Ok(k_mat)
}

/// Adjacency of `graph` plus an edge of weight `s * |B1 - B2|` between
/// every two boundary vertices.
pub fn wormhole_adjacency<T: Real>(
    graph: &SurfaceGraph<T>,
    boundary: &BoundarySet,
    scale: MetricScale<T>,
) -> Vec<Vec<(usize, T)>> {
    let s = scale.shortcut_factor();
    let coords = graph.coords();
    let mut adj = graph.adjacency().to_vec();
    let b = boundary.indices();
    for (x, &u) in b.iter().enumerate() {
        for &v in &b[x + 1..] {
            let w = s * (coords[u] - coords[v]).norm();
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
    }
    adj
}

/// Wormhole threshold via shortest paths on the augmented graph:
/// returns `K~ = min(D, K)`, which gives the same mask as `K`.
pub fn threshold_fast<T: Real>(
    graph: &SurfaceGraph<T>,
    boundary: &BoundarySet,
    scale: MetricScale<T>,
) -> Result<DMatrix<T>> {
    let n = graph.n_vertices();
    if boundary.indices().last().is_some_and(|&b| b >= n) {
        return Err(Error::InvalidInput("boundary index out of range".into()));
    }
    if let Some(j) = crate::geodesics::single_source(graph, 0)
        .iter()
        .position(|d| !d.is_finite())
    {
        return Err(Error::Disconnected(0, j));
    }
    Ok(all_pairs(&wormhole_adjacency(graph, boundary, scale)))
}

/// Smallest eigenvalue over a field of symmetric positive semi-definite
/// 2x2 metric tensors.
pub fn metric_floor<T: Real>(tensors: &[Matrix2<T>]) -> Result<MetricScale<T>> {
    if tensors.is_empty() {
        return Err(Error::InvalidInput("no metric tensors supplied".into()));
    }
    let tol = T::lit(1e-12);
    let mut floor = T::infinity();
    for (v, m) in tensors.iter().enumerate() {
        let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
        let scale = a.abs().max(b.abs()).max(c.abs()).max(d.abs()).max(T::one());
        if (b - c).abs() > tol * scale || !m.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "metric tensor at vertex {v} is not symmetric"
            )));
        }
        let half = T::lit(0.5);
        let mean = (a + d) * half;
        let dev = ((a - d) * half).hypot(b);
        let mut lo = mean - dev;
        if lo < -tol * scale {
            return Err(Error::InvalidInput(format!(
                "metric tensor at vertex {v} is not positive semi-definite"
            )));
        }
        if lo < T::zero() {
            lo = T::zero();
        }
        if lo < floor {
            floor = lo;
        }
    }
    MetricScale::new(floor)
}

/// Which algorithm computes the wormhole threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdAlgo {
    Naive { batch: usize },
    Fast,
}

/// Threshold, binary mask and soft mask of one criterion on one surface.
#[derive(Debug, Clone)]
pub struct MaskSet<T: Real> {
    pub threshold: DMatrix<T>,
    pub binary: DMatrix<bool>,
    pub soft: DMatrix<T>,
}

impl<T: Real> MaskSet<T> {
    pub fn from_threshold(d: &DistanceMatrix<T>, threshold: DMatrix<T>) -> Result<Self> {
        let binary = binary_mask(d, &threshold)?;
        let soft = soft_mask(d, &threshold)?;
        Ok(Self {
            threshold,
            binary,
            soft,
        })
    }

    pub fn guaranteed_pairs(&self) -> usize {
        let n = self.binary.nrows();
        (0..n)
            .map(|j| (0..j).filter(|&i| self.binary[(i, j)]).count())
            .sum()
    }
}

/// Wormhole masks for `graph`, whose all-pairs distances are `d`.
pub fn wormhole_masks<T: Real>(
    graph: &SurfaceGraph<T>,
    d: &DistanceMatrix<T>,
    boundary: &BoundarySet,
    scale: MetricScale<T>,
    algo: ThresholdAlgo,
) -> Result<MaskSet<T>> {
    let k = match algo {
        ThresholdAlgo::Naive { batch } => threshold_naive(d, boundary, graph.coords(), scale, batch)?,
        ThresholdAlgo::Fast => threshold_fast(graph, boundary, scale)?,
    };
    MaskSet::from_threshold(d, k)
}

/// Boundary-distance criterion masks, with `db` taken from `d` itself.
pub fn ct_masks<T: Real>(d: &DistanceMatrix<T>, boundary: &BoundarySet) -> Result<MaskSet<T>> {
    let db = DistanceToBoundary::from_matrix(d, boundary);
    MaskSet::from_threshold(d, ct_threshold(&db))
}
