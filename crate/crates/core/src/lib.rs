//! Software model of a TFHE processor over the Solinas prime
//! `q = 2^64 - 2^32 + 1`.
//!
//! * [`field`]: division-free reduction, Karatsuba products, roots of unity.
//! * [`ntt`]: negacyclic NTT/iNTT and the streamed stage/cycle model.
//! * [`tfhe`]: keys, ciphertexts, external product, bootstrapping, key switching.
//! * [`processor`]: instruction encoding, object store, executor, cost model.
//! * [`selftest`]: oracle suites used by the `selftest` command.

pub mod error;
pub mod field;
pub mod ntt;
pub mod processor;
pub mod selftest;
pub mod tfhe;

pub use error::{Error, Result};
pub use field::{FieldElement, WideProduct, Q};
