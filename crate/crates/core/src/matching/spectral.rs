use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::geometry::{mesh_graph, vertex_areas, TriangleMesh, VertexAreas};
use crate::scalar::Real;

use super::Correspondence;

/// Lower bound applied to every assembled edge weight `(cot a + cot b) / 2`.
pub const COT_WEIGHT_FLOOR: f64 = 1e-10;

/// Truncated Laplace–Beltrami eigenbasis with its lumped mass matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBasis<T: Real> {
    eigenvalues: Vec<T>,
    eigenfunctions: DMatrix<T>,
    areas: VertexAreas<T>,
}

impl<T: Real> SpectralBasis<T> {
    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    /// `n x k`, one eigenfunction per column.
    pub fn eigenfunctions(&self) -> &DMatrix<T> {
        &self.eigenfunctions
    }

    pub fn areas(&self) -> &VertexAreas<T> {
        &self.areas
    }

    pub fn k(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.eigenfunctions.nrows()
    }

    /// The first `k` eigenpairs.
    pub fn truncate(&self, k: usize) -> Self {
        let k = k.min(self.k());
        Self {
            eigenvalues: self.eigenvalues[..k].to_vec(),
            eigenfunctions: self.eigenfunctions.columns(0, k).into_owned(),
            areas: self.areas.clone(),
        }
    }
}

fn cot<T: Real>(at: &nalgebra::Point3<T>, a: &nalgebra::Point3<T>, b: &nalgebra::Point3<T>) -> T {
    let (u, v) = (a - at, b - at);
    // keep the denominator away from zero for sliver triangles
    let floor = T::default_epsilon() * u.norm() * v.norm();
    let cross = u.cross(&v).norm();
    u.dot(&v) / if cross > floor { cross } else { floor }
}

/// Dense cotangent stiffness matrix (positive semi-definite sign convention).
pub fn cotangent_stiffness<T: Real>(mesh: &TriangleMesh<T>) -> DMatrix<T> {
    let n = mesh.n_vertices();
    let p = mesh.vertices();
    let half = T::lit(0.5);
    let mut w = DMatrix::<T>::zeros(n, n);
    for &[i, j, k] in mesh.faces() {
        for (a, b, c) in [(i, j, k), (j, k, i), (k, i, j)] {
            let ct = cot(&p[c], &p[a], &p[b]) * half;
            w[(a, b)] += ct;
            w[(b, a)] += ct;
        }
    }
    let floor = T::lit(COT_WEIGHT_FLOOR);
    let mut l = DMatrix::<T>::zeros(n, n);
    for (a, b) in mesh.edge_face_counts().into_keys() {
        let wab = if w[(a, b)] > floor { w[(a, b)] } else { floor };
        l[(a, b)] = -wab;
        l[(b, a)] = -wab;
        l[(a, a)] += wab;
        l[(b, b)] += wab;
    }
    l
}

/// The `k` smallest eigenpairs of `L phi = lambda A phi` with the cotangent
/// stiffness `L` and the barycentric mass `A`. Eigenfunctions are
/// `A`-orthonormal; each is signed so that its largest-magnitude entry is
/// positive.
pub fn lbo_basis<T: Real>(mesh: &TriangleMesh<T>, k: usize) -> Result<SpectralBasis<T>> {
    let n = mesh.n_vertices();
    if k == 0 || k >= n {
        return Err(Error::InvalidInput(format!("basis size {k} must be in 1..{n}")));
    }
    let comps = mesh_graph(mesh)?.components();
    if comps.len() > 1 {
        return Err(Error::DisconnectedComponents(comps));
    }
    let areas = vertex_areas(mesh)?;
    let inv_sqrt: DVector<T> = DVector::from_iterator(n, areas.as_slice().iter().map(|&a| T::one() / a.sqrt()));
    let l = cotangent_stiffness(mesh);
    let s = DMatrix::from_fn(n, n, |i, j| inv_sqrt[i] * l[(i, j)] * inv_sqrt[j]);
    let eig = SymmetricEigen::new(s);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let mut eigenvalues = Vec::with_capacity(k);
    let mut phi = DMatrix::<T>::zeros(n, k);
    for (c, &idx) in order.iter().take(k).enumerate() {
        let lam = eig.eigenvalues[idx];
        eigenvalues.push(if lam > T::zero() { lam } else { T::zero() });
        let mut col = eig.eigenvectors.column(idx).component_mul(&inv_sqrt);
        let pivot = col.iamax();
        if col[pivot] < T::zero() {
            col.neg_mut();
        }
        phi.set_column(c, &col);
    }
    Ok(SpectralBasis {
        eigenvalues,
        eigenfunctions: phi,
        areas,
    })
}

/// Spectral representation of a correspondence, with the truncation rank
/// used by the orthogonality target.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalMap<T: Real> {
    c: DMatrix<T>,
    r: usize,
}

impl<T: Real> FunctionalMap<T> {
    pub fn new(c: DMatrix<T>, r: usize) -> Result<Self> {
        if c.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numeric("functional map has non-finite entries".into()));
        }
        if r > c.nrows() || r > c.ncols() {
            return Err(Error::InvalidInput(format!("rank {r} exceeds the {}x{} map", c.nrows(), c.ncols())));
        }
        Ok(Self { c, r })
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.c
    }

    pub fn rank(&self) -> usize {
        self.r
    }
}

/// `C = Phi_partial^T A_partial P Phi_full`. The rank counts the partial
/// eigenvalues strictly below the largest retained full eigenvalue.
pub fn functional_map<T: Real>(
    p: &Correspondence<T>,
    full: &SpectralBasis<T>,
    partial: &SpectralBasis<T>,
) -> Result<FunctionalMap<T>> {
    if p.n_partial() != partial.n_vertices() || p.n_full() != full.n_vertices() {
        return Err(Error::Dimension(format!(
            "correspondence is {}x{} but the bases have {} (partial) and {} (full) vertices",
            p.n_partial(),
            p.n_full(),
            partial.n_vertices(),
            full.n_vertices()
        )));
    }
    let a = partial.areas.as_slice();
    let weighted = DMatrix::from_fn(partial.n_vertices(), partial.k(), |i, j| {
        partial.eigenfunctions[(i, j)] * a[i]
    });
    let c = weighted.transpose() * p.as_matrix() * &full.eigenfunctions;
    let lam_max = full.eigenvalues.last().copied().unwrap_or(T::zero());
    let r = partial.eigenvalues.iter().filter(|&&l| l < lam_max).count();
    FunctionalMap::new(c, r.min(full.k()))
}

/// `|| C C^T - J_r ||_F`, where `J_r` keeps the first `r` diagonal ones.
pub fn ortho_loss<T: Real>(fm: &FunctionalMap<T>) -> T {
    let mut g = &fm.c * fm.c.transpose();
    for i in 0..fm.r {
        g[(i, i)] -= T::one();
    }
    g.norm()
}
