//! Partial-to-full matching: soft correspondences, the masked geodesic
//! preservation loss and its gradient, and the spectral (functional map)
//! orthogonality regularizer.

mod loss;
mod spectral;

pub use loss::{
    masked_geo_loss, masked_geo_loss_grad, softmax_correspondence, total_loss, Correspondence,
    LossWeights, TAU_CUTS, TAU_HOLES,
};
pub use spectral::{
    cotangent_stiffness, functional_map, lbo_basis, ortho_loss, FunctionalMap, SpectralBasis,
    COT_WEIGHT_FLOOR,
};
