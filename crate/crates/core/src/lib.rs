//! heightlab: a desk-scale laboratory for random surfaces given by graph
//! homomorphisms Z^m -> Z.
//!
//! The crate provides exact counting and entropy of height functions,
//! local surface tension estimation, discrete Kirszbraun extension,
//! simplicial approximation of Lipschitz profiles, exact and Glauber
//! sampling, and a verification harness for the profile, variational, and
//! large-deviation identities that govern the model's limit shapes.

pub mod enumeration;
pub mod error;
pub mod height;
pub mod io;
pub mod kirszbraun;
pub mod lattice;
pub mod minimize;
pub mod rat;
pub mod sampler;
pub mod simplicial;
pub mod verify;

pub use error::{Error, Result};
