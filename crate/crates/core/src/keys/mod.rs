//! Parameters, secret keys and the evaluation key for multiplication.

mod evalkey;
pub mod gadget;
mod keygen;
mod params;

pub use evalkey::{
    build_evalkey, build_evalkey_traced, build_evalkey_with, eps_limit, weight_tensor, EpsMode, EvalKey, EvalKeyTrace,
    Variant,
};
pub use gadget::{bitdecomp, powersoftwo};
pub use keygen::{build_g, eval_matrix, ideal_basis, keygen, keygen_with, R2Mode, SecretKey, RETRY_CAP};
pub use params::{
    binomial, default_pk_slack, setup, Overrides, Params, Preset, DEPTH_CONSTANT, MAX_Q_PLUS_U_BITS, MIN_Q_BITS,
};
