//! Dense linear algebra over `Z_q` and exact rational tensors.

mod reduced;
mod tensor;
mod zq;

pub use reduced::ReducedTensor;
pub(crate) use reduced::Wide;
pub use tensor::{MatrixQ, Tensor3Q};
pub use zq::MatrixZq;
