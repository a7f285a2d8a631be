use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Real;

fn centered<T: Real>(x: &DMatrix<T>) -> DMatrix<T> {
    let n = T::from_count(x.nrows());
    let mut c = x.clone();
    for mut col in c.column_iter_mut() {
        let mean = col.sum() / n;
        col.add_scalar_mut(-mean);
    }
    c
}

/// Root-mean-square residual per coordinate after the best rigid alignment
/// (translation, rotation and reflection, no scaling) of `a` onto `b`.
pub fn procrustes_error<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> Result<T> {
    if a.shape() != b.shape() {
        return Err(Error::Dimension(format!(
            "configurations are {}x{} and {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    if a.is_empty() {
        return Ok(T::zero());
    }
    let (ac, bc) = (centered(a), centered(b));
    // orthogonal R minimising |A R - B| is U V^T for A^T B = U S V^T
    let svd = (ac.transpose() * &bc).svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::Numeric("SVD did not converge".into())),
    };
    let resid = ac * (u * v_t) - bc;
    Ok((resid.norm_squared() / T::from_count(a.len())).sqrt())
}
