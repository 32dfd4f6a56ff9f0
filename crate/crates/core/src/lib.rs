//! Leveled homomorphic encryption from multivariate polynomial evaluation.
//!
//! Ciphertexts are evaluations of ideal elements at secret points, mixed by a
//! secret matrix. Addition is vector addition; multiplication applies an
//! order-3 evaluation key tensor. See the crate README for a walkthrough.

pub mod arith;
pub mod circuit;
pub mod error;
pub mod keys;
pub mod linalg;
pub mod mvpoly;
pub mod she;

pub use circuit::{eval_homomorphic, eval_plain, parse_circuit, Circuit};
pub use error::{Error, Result};
pub use keys::{build_evalkey, keygen, setup, EvalKey, Params, Preset, SecretKey};
pub use she::{decrypt, encrypt, eval_add, eval_mult, pk_encrypt, pk_keygen, Ciphertext, Plaintext, PublicKey};
