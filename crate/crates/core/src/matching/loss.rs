use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geodesics::DistanceMatrix;
use crate::geometry::VertexAreas;
use crate::scalar::Real;

/// Softmax temperature used for datasets with holes.
pub const TAU_HOLES: f64 = 0.07;
/// Softmax temperature used for datasets with cuts.
pub const TAU_CUTS: f64 = 0.01;

/// Soft correspondence from the partial surface (rows) to the full surface
/// (columns). Each row is a probability distribution; columns are free, so
/// full-surface vertices in missing regions may stay unmatched.
#[derive(Debug, Clone, PartialEq)]
pub struct Correspondence<T: Real>(DMatrix<T>);

impl<T: Real> Correspondence<T> {
    pub fn new(p: DMatrix<T>) -> Result<Self> {
        let tol = T::lit(1e-9);
        for (i, row) in p.row_iter().enumerate() {
            if row.iter().any(|&x| !(x >= T::zero() && x <= T::one())) {
                return Err(Error::InvalidInput(format!("row {i} has entries outside [0, 1]")));
            }
            if (row.sum() - T::one()).abs() > tol {
                return Err(Error::InvalidInput(format!("row {i} sums to {}", row.sum())));
            }
        }
        Ok(Self(p))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn as_matrix(&self) -> &DMatrix<T> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.0
    }

    pub fn n_partial(&self) -> usize {
        self.0.nrows()
    }

    pub fn n_full(&self) -> usize {
        self.0.ncols()
    }
}

/// `P_ij = softmax_j(<f_partial_i, f_full_j> / tau)`.
pub fn softmax_correspondence<T: Real>(
    f_full: &DMatrix<T>,
    f_partial: &DMatrix<T>,
    tau: T,
) -> Result<Correspondence<T>> {
    if !(tau > T::zero()) {
        return Err(Error::InvalidInput(format!("temperature must be positive, got {tau}")));
    }
    if f_full.ncols() != f_partial.ncols() {
        return Err(Error::Dimension(format!(
            "feature dimensions differ: {} (full) vs {} (partial)",
            f_full.ncols(),
            f_partial.ncols()
        )));
    }
    let mut g = f_partial * f_full.transpose() / tau;
    for mut row in g.row_iter_mut() {
        let max = row.max();
        row.apply(|x| *x = (*x - max).exp());
        let sum = row.sum();
        row /= sum;
    }
    Ok(Correspondence(g))
}

fn check_loss_shapes<T: Real>(
    p: &DMatrix<T>,
    d_x: &DistanceMatrix<T>,
    d_yp: &DistanceMatrix<T>,
    mask: &DMatrix<T>,
    areas: &VertexAreas<T>,
) -> Result<()> {
    let (ny, nx) = p.shape();
    if d_x.n() != nx {
        return Err(Error::Dimension(format!("P has {nx} columns, full distances are {0}x{0}", d_x.n())));
    }
    if d_yp.n() != ny {
        return Err(Error::Dimension(format!("P has {ny} rows, partial distances are {0}x{0}", d_yp.n())));
    }
    if mask.shape() != (ny, ny) {
        return Err(Error::Dimension(format!("mask is {}x{}, expected {ny}x{ny}", mask.nrows(), mask.ncols())));
    }
    if areas.len() != ny {
        return Err(Error::Dimension(format!("{} vertex areas for {ny} partial vertices", areas.len())));
    }
    if mask.iter().any(|&m| !(m >= T::zero() && m <= T::one())) {
        return Err(Error::InvalidInput("mask entries must lie in [0, 1]".into()));
    }
    Ok(())
}

/// `E = W .* (P D_X P^T - D_Y')` with `W_ij = mask_ij a_i a_j`.
fn weighted_residual<T: Real>(
    p: &DMatrix<T>,
    d_x: &DistanceMatrix<T>,
    d_yp: &DistanceMatrix<T>,
    mask: &DMatrix<T>,
    areas: &VertexAreas<T>,
) -> (DMatrix<T>, DMatrix<T>) {
    let a = areas.as_slice();
    let resid = p * d_x.as_matrix() * p.transpose() - d_yp.as_matrix();
    let e = DMatrix::from_fn(resid.nrows(), resid.ncols(), |i, j| mask[(i, j)] * a[i] * a[j] * resid[(i, j)]);
    (resid, e)
}

/// `sum_ij mask_ij a_i a_j ((P D_X P^T - D_Y')_ij)^2`.
pub fn masked_geo_loss<T: Real>(
    p: &DMatrix<T>,
    d_x: &DistanceMatrix<T>,
    d_yp: &DistanceMatrix<T>,
    mask: &DMatrix<T>,
    areas: &VertexAreas<T>,
) -> Result<T> {
    check_loss_shapes(p, d_x, d_yp, mask, areas)?;
    let (resid, e) = weighted_residual(p, d_x, d_yp, mask, areas);
    Ok(resid.component_mul(&e).sum())
}

/// Gradient of [`masked_geo_loss`] with respect to every entry of `P`:
/// `2 (E P D_X^T + E^T P D_X)`.
pub fn masked_geo_loss_grad<T: Real>(
    p: &DMatrix<T>,
    d_x: &DistanceMatrix<T>,
    d_yp: &DistanceMatrix<T>,
    mask: &DMatrix<T>,
    areas: &VertexAreas<T>,
) -> Result<DMatrix<T>> {
    check_loss_shapes(p, d_x, d_yp, mask, areas)?;
    let (_, e) = weighted_residual(p, d_x, d_yp, mask, areas);
    let dx = d_x.as_matrix();
    let two = T::lit(2.0);
    Ok((&e * p * dx.transpose() + e.transpose() * p * dx) * two)
}

/// Coefficients of the combined objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights<T: Real> {
    pub lambda_geo: T,
    pub lambda_ortho: T,
}

impl<T: Real> Default for LossWeights<T> {
    fn default() -> Self {
        Self {
            lambda_geo: T::lit(1e3),
            lambda_ortho: T::one(),
        }
    }
}

pub fn total_loss<T: Real>(geo: T, ortho: T, weights: LossWeights<T>) -> T {
    weights.lambda_geo * geo + weights.lambda_ortho * ortho
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain_d() -> DistanceMatrix<f64> {
        DistanceMatrix::from_matrix(DMatrix::from_row_slice(3, 3, &[0., 1., 2., 1., 0., 1., 2., 1., 0.])).unwrap()
    }

    /// Direct quadruple sum over the definition of `P D_X P^T`.
    fn brute_loss(p: &DMatrix<f64>, dx: &DMatrix<f64>, dy: &DMatrix<f64>, m: &DMatrix<f64>, a: &[f64]) -> f64 {
        let (ny, nx) = p.shape();
        let mut total = 0.0;
        for i in 0..ny {
            for j in 0..ny {
                let mut q = 0.0;
                for k in 0..nx {
                    for l in 0..nx {
                        q += p[(i, k)] * dx[(k, l)] * p[(j, l)];
                    }
                }
                total += m[(i, j)] * a[i] * a[j] * (q - dy[(i, j)]).powi(2);
            }
        }
        total
    }

    #[test]
    fn identity_self_match_is_zero() {
        let d = chain_d();
        let areas = VertexAreas::uniform(3, 1.0).unwrap();
        let ones = DMatrix::from_element(3, 3, 1.0);
        let p = Correspondence::identity(3);
        assert_eq!(masked_geo_loss(p.as_matrix(), &d, &d, &ones, &areas).unwrap(), 0.0);
        let g = masked_geo_loss_grad(p.as_matrix(), &d, &d, &ones, &areas).unwrap();
        assert_eq!(g.amax(), 0.0);
    }

    #[test]
    fn shifted_targets() {
        let d = chain_d();
        let dy = DistanceMatrix::from_matrix(d.as_matrix().map_with_location(|i, j, x| if i == j { x } else { x + 1.0 })).unwrap();
        let areas = VertexAreas::uniform(3, 1.0).unwrap();
        let ones = DMatrix::from_element(3, 3, 1.0);
        let id = DMatrix::identity(3, 3);
        let l = masked_geo_loss(&id, &d, &dy, &ones, &areas).unwrap();
        assert_eq!(l, 6.0);
        assert_eq!(brute_loss(&id, d.as_matrix(), dy.as_matrix(), &ones, &[1.0; 3]), 6.0);
        let zeros = DMatrix::zeros(3, 3);
        assert_eq!(masked_geo_loss(&id, &d, &dy, &zeros, &areas).unwrap(), 0.0);
        assert_eq!(masked_geo_loss_grad(&id, &d, &dy, &zeros, &areas).unwrap().amax(), 0.0);
    }

    #[test]
    fn shape_errors() {
        let d = chain_d();
        let areas = VertexAreas::uniform(3, 1.0).unwrap();
        let ones = DMatrix::from_element(3, 3, 1.0);
        assert!(masked_geo_loss(&DMatrix::identity(2, 3), &d, &d, &ones, &areas).is_err());
        assert!(masked_geo_loss(&DMatrix::identity(3, 3), &d, &d, &DMatrix::from_element(2, 2, 1.0), &areas).is_err());
        assert!(masked_geo_loss(&DMatrix::identity(3, 3), &d, &d, &DMatrix::from_element(3, 3, 2.0), &areas).is_err());
        let short = VertexAreas::uniform(2, 1.0).unwrap();
        assert!(masked_geo_loss(&DMatrix::identity(3, 3), &d, &d, &ones, &short).is_err());
    }

    #[test]
    fn softmax_rows() {
        let same = DMatrix::from_element(5, 3, 0.3);
        let p = softmax_correspondence(&same, &DMatrix::from_element(2, 3, 0.3f64), 0.07).unwrap();
        assert!(p.as_matrix().iter().all(|&x| (x - 0.2).abs() < 1e-15));

        // unit-gap logits
        let full = DMatrix::from_row_slice(3, 1, &[0.0, 1.0, 2.0]);
        let partial = DMatrix::from_row_slice(1, 1, &[1.0]);
        let sharp = softmax_correspondence(&full, &partial, 1e-4).unwrap();
        assert!(sharp.as_matrix()[(0, 2)] > 0.99);
        assert!(Correspondence::new(sharp.as_matrix().clone()).is_ok());

        assert!(softmax_correspondence(&full, &partial, 0.0).is_err());
        assert!(softmax_correspondence(&full, &DMatrix::zeros(1, 2), 1.0).is_err());
    }

    #[test]
    fn correspondence_validation() {
        assert!(Correspondence::new(DMatrix::from_row_slice(1, 2, &[0.5, 0.6])).is_err());
        assert!(Correspondence::new(DMatrix::from_row_slice(1, 2, &[1.5, -0.5])).is_err());
        assert!(Correspondence::new(DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 1.0, 0.0])).is_ok());
    }

    #[test]
    fn total_loss_examples() {
        assert_eq!(total_loss(0.0, 0.0, LossWeights::default()), 0.0);
        assert!((total_loss(0.002f64, 0.5, LossWeights::default()) - 2.5).abs() < 1e-12);
        let w = LossWeights { lambda_geo: 0.0, lambda_ortho: 3.0 };
        assert_eq!(total_loss(7.0, 0.5, w), 1.5);
    }
}
