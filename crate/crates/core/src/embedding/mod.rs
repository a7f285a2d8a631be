//! Masked multidimensional scaling and the synthetic surfaces used to
//! evaluate it.

mod mds;
mod procrustes;
mod synth;

pub use mds::{
    build_weights, classical_scaling, masked_mds, pair_weights, smacof_weighted, stress, tcie,
    whcie, ClassicalScaling, Embedding, MaskedMdsOptions, MdsWeights, PairMask, SmacofOptions,
};
pub use procrustes::procrustes_error;
pub use synth::{
    gen_grid_with_defect, gen_swiss_roll, spiral_arclength, GridDefect, ParamRect, SwissRoll,
    SwissRollDefect, SwissRollSpec, ROLL_HEIGHT, ROLL_T_RANGE,
};
