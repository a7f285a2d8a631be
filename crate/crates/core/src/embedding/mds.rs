use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::criterion::{self, MetricScale, ThresholdAlgo};
use crate::error::{Error, Result};
use crate::geodesics::{distance_matrix, DistanceMatrix};
use crate::geometry::{BoundarySet, SurfaceGraph};
use crate::scalar::Real;

/// Output of classical scaling.
#[derive(Debug, Clone)]
pub struct ClassicalScaling<T: Real> {
    /// `n x m` coordinates.
    pub coords: DMatrix<T>,
    /// The `m` leading eigenvalues of the double-centred matrix, clamped at 0.
    pub eigenvalues: Vec<T>,
    /// Set when fewer than `m` eigenvalues were positive and the remaining
    /// columns were left at zero.
    pub padded: bool,
}

/// Classical scaling: eigendecomposition of `-1/2 J D^2 J`, keeping the
/// `m` largest eigenpairs with coordinates `v * sqrt(lambda)`.
pub fn classical_scaling<T: Real>(d: &DistanceMatrix<T>, m: usize) -> Result<ClassicalScaling<T>> {
    let n = d.n();
    if m == 0 || m >= n {
        return Err(Error::InvalidInput(format!(
            "target dimension {m} must satisfy 1 <= m < {n}"
        )));
    }
    let dm = d.as_matrix();
    let sq = dm.map(|x| x * x);
    let nf = T::from_count(n);
    let col_mean: Vec<T> = (0..n).map(|j| sq.column(j).sum() / nf).collect();
    let grand = col_mean.iter().fold(T::zero(), |a, &b| a + b) / nf;
    let half = T::lit(-0.5);
    // symmetric input: row means equal column means
    let b = DMatrix::from_fn(n, n, |i, j| half * (sq[(i, j)] - col_mean[i] - col_mean[j] + grand));
    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut coords = DMatrix::zeros(n, m);
    let mut eigenvalues = Vec::with_capacity(m);
    let mut padded = false;
    for (c, &k) in order.iter().take(m).enumerate() {
        let lambda = eig.eigenvalues[k];
        if lambda > T::zero() {
            let s = lambda.sqrt();
            let v = eig.eigenvectors.column(k);
            // deterministic sign: largest-magnitude entry positive
            let pivot = v.iter().fold(T::zero(), |p, &x| if x.abs() > p.abs() { x } else { p });
            let sign = if pivot < T::zero() { -T::one() } else { T::one() };
            for i in 0..n {
                coords[(i, c)] = v[i] * s * sign;
            }
            eigenvalues.push(lambda);
        } else {
            padded = true;
            eigenvalues.push(T::zero());
        }
    }
    Ok(ClassicalScaling {
        coords,
        eigenvalues,
        padded,
    })
}

/// Symmetric MDS weights in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MdsWeights<T: Real>(DMatrix<T>);

impl<T: Real> MdsWeights<T> {
    pub fn from_matrix(w: DMatrix<T>) -> Result<Self> {
        let (r, c) = w.shape();
        if r != c {
            return Err(Error::Dimension(format!("weights are {r}x{c}")));
        }
        for j in 0..c {
            for i in 0..r {
                let x = w[(i, j)];
                if !(x >= T::zero() && x <= T::one()) {
                    return Err(Error::InvalidInput(format!("weight {x} at ({i}, {j}) outside [0, 1]")));
                }
                if x != w[(j, i)] {
                    return Err(Error::InvalidInput(format!("weights asymmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self(w))
    }

    pub fn ones(n: usize) -> Self {
        Self(DMatrix::from_element(n, n, T::one()))
    }

    pub fn as_matrix(&self) -> &DMatrix<T> {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }
}

/// Weights from a binary mask, forced to 1 for pairs closer than
/// `local_radius`.
pub fn build_weights<T: Real>(
    d: &DistanceMatrix<T>,
    mask: &DMatrix<bool>,
    local_radius: T,
) -> Result<MdsWeights<T>> {
    let n = d.n();
    if mask.shape() != (n, n) {
        return Err(Error::Dimension(format!(
            "mask is {}x{}, distances are {n}x{n}",
            mask.nrows(),
            mask.ncols()
        )));
    }
    if !(local_radius >= T::zero()) {
        return Err(Error::InvalidInput("local radius must be non-negative".into()));
    }
    let dm = d.as_matrix();
    MdsWeights::from_matrix(DMatrix::from_fn(n, n, |i, j| {
        if mask[(i, j)] || dm[(i, j)] < local_radius {
            T::one()
        } else {
            T::zero()
        }
    }))
}

fn check_config<T: Real>(coords: &DMatrix<T>, n: usize) -> Result<()> {
    if coords.nrows() != n || coords.ncols() == 0 {
        return Err(Error::Dimension(format!(
            "configuration is {}x{}, expected {n} rows",
            coords.nrows(),
            coords.ncols()
        )));
    }
    Ok(())
}

#[inline]
fn point_dist<T: Real>(x: &[T], m: usize, i: usize, j: usize) -> T {
    let (a, b) = (&x[i * m..(i + 1) * m], &x[j * m..(j + 1) * m]);
    a.iter()
        .zip(b)
        .fold(T::zero(), |s, (&p, &q)| s + (p - q) * (p - q))
        .sqrt()
}

fn row_major<T: Real>(coords: &DMatrix<T>) -> Vec<T> {
    coords.transpose().as_slice().to_vec()
}

fn stress_rows<T: Real>(x: &[T], m: usize, d: &DMatrix<T>, w: &DMatrix<T>) -> T {
    let n = d.nrows();
    let partial: Vec<T> = (0..n)
        .into_par_iter()
        .map(|j| {
            let (dc, wc) = (d.column(j), w.column(j));
            let mut s = T::zero();
            for i in 0..j {
                let wij = wc[i];
                if wij != T::zero() {
                    let r = point_dist(x, m, i, j) - dc[i];
                    s += wij * r * r;
                }
            }
            s
        })
        .collect();
    partial.into_iter().fold(T::zero(), |a, b| a + b) * T::lit(2.0)
}

/// Weighted raw stress `sum_{i != j} w_ij (|x_i - x_j| - D_ij)^2`, i.e. the
/// sum over unordered pairs counted twice.
pub fn stress<T: Real>(coords: &DMatrix<T>, d: &DistanceMatrix<T>, w: &MdsWeights<T>) -> Result<T> {
    check_config(coords, d.n())?;
    if w.n() != d.n() {
        return Err(Error::Dimension("weights and distances differ in size".into()));
    }
    Ok(stress_rows(&row_major(coords), coords.ncols(), d.as_matrix(), w.as_matrix()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmacofOptions<T: Real> {
    pub max_iter: usize,
    /// Stop once `(s_prev - s) / s_prev` falls below this.
    pub rel_tol: T,
}

impl<T: Real> Default for SmacofOptions<T> {
    fn default() -> Self {
        Self {
            max_iter: 500,
            rel_tol: T::lit(1e-6),
        }
    }
}

/// Result of stress majorization.
#[derive(Debug, Clone)]
pub struct Embedding<T: Real> {
    /// `n x m` coordinates.
    pub coords: DMatrix<T>,
    /// Stress of the initial configuration followed by the stress after each
    /// Guttman update.
    pub stress_trace: Vec<T>,
}

impl<T: Real> Embedding<T> {
    pub fn final_stress(&self) -> T {
        *self.stress_trace.last().expect("trace holds the initial stress")
    }

    pub fn iterations(&self) -> usize {
        self.stress_trace.len() - 1
    }
}

/// Weighted SMACOF. Each step applies the Guttman transform
/// `X <- V^+ B(X) X`, where `V` is the weighted graph Laplacian of `w`.
/// `V^+ y` is obtained by a Cholesky solve against `V + 11^T / n`, which is
/// valid because every column of `B(X) X` sums to zero.
pub fn smacof_weighted<T: Real>(
    d: &DistanceMatrix<T>,
    w: &MdsWeights<T>,
    init: &DMatrix<T>,
    opts: SmacofOptions<T>,
) -> Result<Embedding<T>> {
    let n = d.n();
    check_config(init, n)?;
    if w.n() != n {
        return Err(Error::Dimension("weights and distances differ in size".into()));
    }
    if init.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("initial configuration is not finite".into()));
    }
    let wm = w.as_matrix();
    for i in 0..n {
        if (0..n).all(|j| j == i || wm[(i, j)] == T::zero()) {
            return Err(Error::Contract(format!(
                "vertex {i} has no positive weight and is unconstrained"
            )));
        }
    }
    let m = init.ncols();
    let dm = d.as_matrix();
    let mut x = row_major(init);
    let mut trace = vec![stress_rows(&x, m, dm, wm)];
    if trace[0] == T::zero() || opts.max_iter == 0 {
        return Ok(Embedding {
            coords: init.clone(),
            stress_trace: trace,
        });
    }

    let inv_n = T::one() / T::from_count(n);
    let mut v = DMatrix::from_fn(n, n, |i, j| if i == j { T::zero() } else { -wm[(i, j)] } + inv_n);
    for i in 0..n {
        let deg = (0..n).filter(|&j| j != i).fold(T::zero(), |s, j| s + wm[(i, j)]);
        v[(i, i)] = deg + inv_n;
    }
    let chol = v.cholesky().ok_or_else(|| {
        Error::Contract("weight graph is disconnected; the Guttman transform is undefined".into())
    })?;

    for _ in 0..opts.max_iter {
        // (B(X) X)_i = sum_j w_ij D_ij / |x_i - x_j| (x_i - x_j)
        let bx_rows: Vec<Vec<T>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let (wc, dc) = (wm.column(i), dm.column(i));
                let xi = &x[i * m..(i + 1) * m];
                let mut acc = vec![T::zero(); m];
                for j in 0..n {
                    let wij = wc[j];
                    if j == i || wij == T::zero() {
                        continue;
                    }
                    let dist = point_dist(&x, m, i, j);
                    if dist > T::zero() {
                        let f = wij * dc[j] / dist;
                        let xj = &x[j * m..(j + 1) * m];
                        for c in 0..m {
                            acc[c] += f * (xi[c] - xj[c]);
                        }
                    }
                }
                acc
            })
            .collect();
        let bx = DMatrix::from_fn(n, m, |i, c| bx_rows[i][c]);
        let next = chol.solve(&bx);
        x = row_major(&next);
        let s = stress_rows(&x, m, dm, wm);
        let prev = *trace.last().unwrap();
        trace.push(s);
        if s == T::zero() || (prev - s) / prev < opts.rel_tol {
            break;
        }
    }
    let coords = DMatrix::from_row_slice(n, m, &x);
    Ok(Embedding {
        coords,
        stress_trace: trace,
    })
}

/// Which pairs constrain a masked MDS run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairMask<T: Real> {
    /// Wormhole criterion (WHCIE).
    Wormhole(MetricScale<T>),
    /// Boundary-distance criterion (TCIE).
    BoundaryDistance,
    /// Every pair.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskedMdsOptions<T: Real> {
    pub dim: usize,
    pub local_radius: T,
    pub smacof: SmacofOptions<T>,
    pub algo: ThresholdAlgo,
}

impl<T: Real> Default for MaskedMdsOptions<T> {
    fn default() -> Self {
        Self {
            dim: 2,
            local_radius: T::lit(3.0),
            smacof: SmacofOptions::default(),
            algo: ThresholdAlgo::Fast,
        }
    }
}

/// Weights for a masked MDS run on a surface with distances `d`.
pub fn pair_weights<T: Real>(
    graph: &SurfaceGraph<T>,
    d: &DistanceMatrix<T>,
    boundary: &BoundarySet,
    mask: PairMask<T>,
    local_radius: T,
    algo: ThresholdAlgo,
) -> Result<MdsWeights<T>> {
    let binary = match mask {
        PairMask::Wormhole(scale) => criterion::wormhole_masks(graph, d, boundary, scale, algo)?.binary,
        PairMask::BoundaryDistance => criterion::ct_masks(d, boundary)?.binary,
        PairMask::All => return Ok(MdsWeights::ones(d.n())),
    };
    build_weights(d, &binary, local_radius)
}

/// Masked MDS pipeline: distances, mask, weights, classical-scaling start,
/// weighted SMACOF.
pub fn masked_mds<T: Real>(
    graph: &SurfaceGraph<T>,
    boundary: &BoundarySet,
    mask: PairMask<T>,
    opts: &MaskedMdsOptions<T>,
) -> Result<Embedding<T>> {
    let d = distance_matrix(graph)?;
    let w = pair_weights(graph, &d, boundary, mask, opts.local_radius, opts.algo)?;
    let init = classical_scaling(&d, opts.dim)?;
    smacof_weighted(&d, &w, &init.coords, opts.smacof)
}

/// Wormhole-constrained isometric embedding.
pub fn whcie<T: Real>(
    graph: &SurfaceGraph<T>,
    boundary: &BoundarySet,
    opts: &MaskedMdsOptions<T>,
) -> Result<Embedding<T>> {
    masked_mds(graph, boundary, PairMask::Wormhole(MetricScale::euclidean()), opts)
}

/// Same pipeline with the boundary-distance mask.
pub fn tcie<T: Real>(
    graph: &SurfaceGraph<T>,
    boundary: &BoundarySet,
    opts: &MaskedMdsOptions<T>,
) -> Result<Embedding<T>> {
    masked_mds(graph, boundary, PairMask::BoundaryDistance, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::procrustes_error;

    fn euclidean(points: &DMatrix<f64>) -> DistanceMatrix<f64> {
        let n = points.nrows();
        DistanceMatrix::from_matrix(DMatrix::from_fn(n, n, |i, j| {
            (points.row(i) - points.row(j)).norm()
        }))
        .unwrap()
    }

    #[test]
    fn collinear_points() {
        let d = DistanceMatrix::from_matrix(DMatrix::from_row_slice(3, 3, &[0., 1., 2., 1., 0., 1., 2., 1., 0.])).unwrap();
        let cs = classical_scaling(&d, 1).unwrap();
        let mut xs: Vec<f64> = cs.coords.iter().copied().collect();
        // -1, 0, 1 up to sign; the middle point sits at the origin
        assert!(xs[1].abs() < 1e-12);
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (x, want) in xs.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((x - want).abs() < 1e-12, "{xs:?}");
        }
        assert!((cs.eigenvalues[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn planar_points_recovered() {
        let p = DMatrix::from_row_slice(5, 2, &[0., 0., 3., 0., 3., 1., 0.5, 2., -1., 1.5]);
        let cs = classical_scaling(&euclidean(&p), 2).unwrap();
        assert!(!cs.padded);
        assert!(procrustes_error(&cs.coords, &p).unwrap() <= 1e-9);
    }

    #[test]
    fn zero_distances_pad() {
        let d = DistanceMatrix::from_matrix(DMatrix::<f64>::zeros(4, 4)).unwrap();
        let cs = classical_scaling(&d, 2).unwrap();
        assert!(cs.padded);
        assert!(cs.coords.iter().all(|&x| x == 0.0));
        assert!(classical_scaling(&d, 0).is_err());
        assert!(classical_scaling(&d, 4).is_err());
    }

    #[test]
    fn stress_examples() {
        let d = DistanceMatrix::from_matrix(DMatrix::from_row_slice(2, 2, &[0., 2., 2., 0.])).unwrap();
        let x = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        assert_eq!(stress(&x, &d, &MdsWeights::ones(2)).unwrap(), 2.0);
        let zero = MdsWeights::from_matrix(DMatrix::zeros(2, 2)).unwrap();
        assert_eq!(stress(&x, &d, &zero).unwrap(), 0.0);
        let exact = DMatrix::from_row_slice(2, 1, &[0.0, 2.0]);
        assert_eq!(stress(&exact, &d, &MdsWeights::ones(2)).unwrap(), 0.0);
    }

    #[test]
    fn smacof_on_exact_solution_is_a_no_op() {
        let p = DMatrix::from_row_slice(4, 2, &[0., 0., 1., 0., 1., 1., 0., 1.]);
        let e = smacof_weighted(&euclidean(&p), &MdsWeights::ones(4), &p, SmacofOptions::default()).unwrap();
        assert_eq!(e.stress_trace, vec![0.0]);
        assert_eq!(e.coords, p);
    }

    #[test]
    fn smacof_decreases_stress() {
        let p = DMatrix::from_fn(12, 3, |i, c| ((i * 7 + c * 3) as f64).sin() * 4.0);
        let d = euclidean(&p);
        let init = DMatrix::from_fn(12, 2, |i, c| ((i * 5 + c) as f64).cos());
        let w = MdsWeights::from_matrix(DMatrix::from_fn(12, 12, |i, j| if (i + j) % 3 == 0 { 0.0 } else { 1.0 })).unwrap();
        let e = smacof_weighted(&d, &w, &init, SmacofOptions { max_iter: 300, rel_tol: 0.0 }).unwrap();
        assert!(e.iterations() > 10);
        for s in e.stress_trace.windows(2) {
            assert!(s[1] <= s[0] + 1e-12, "{} -> {}", s[0], s[1]);
        }
        assert!(e.final_stress() < e.stress_trace[0]);
        assert!((stress(&e.coords, &d, &w).unwrap() - e.final_stress()).abs() <= 1e-12 * e.final_stress().max(1.0));
    }

    #[test]
    fn unconstrained_vertex_is_rejected() {
        let p = DMatrix::from_row_slice(3, 1, &[0., 1., 2.]);
        let mut w = DMatrix::from_element(3, 3, 1.0);
        for k in 0..3 {
            w[(2, k)] = 0.0;
            w[(k, 2)] = 0.0;
        }
        let w = MdsWeights::from_matrix(w).unwrap();
        assert!(matches!(
            smacof_weighted(&euclidean(&p), &w, &p, SmacofOptions::default()),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn weight_override() {
        let d = DistanceMatrix::from_matrix(DMatrix::from_row_slice(3, 3, &[0., 1., 5., 1., 0., 4., 5., 4., 0.])).unwrap();
        let mask = DMatrix::from_fn(3, 3, |i, j| i == j);
        let w0 = build_weights(&d, &mask, 0.0).unwrap();
        assert_eq!(w0.as_matrix(), &mask.map(|b| if b { 1.0 } else { 0.0 }));
        let all = build_weights(&d, &mask, 6.0).unwrap();
        assert!(all.as_matrix().iter().all(|&x| x == 1.0));
        let local = build_weights(&d, &mask, 3.0).unwrap();
        assert_eq!(local.as_matrix()[(0, 1)], 1.0);
        assert_eq!(local.as_matrix()[(0, 2)], 0.0);
        assert!(MdsWeights::from_matrix(DMatrix::from_row_slice(2, 2, &[0., 0.5, 0.4, 0.])).is_err());
    }
}
