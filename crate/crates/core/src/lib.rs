//! Linear symmetric private information retrieval from `(N, M)`-MDS coded
//! storage with up to `T` colluding servers.
//!
//! A database of `K` files is stored across `N` servers with a generalized
//! Reed-Solomon code of dimension `M`. The user retrieves one file so that
//! no `T` servers learn its index, while common randomness shared by the
//! servers keeps every other file hidden from the user. Each retrieval
//! downloads `N·M` symbols for a file of `M(N−M−T+1)` symbols, which is
//! the linear-scheme capacity `1 − (M+T−1)/N`.
//!
//! Modules:
//! * [`field`]: prime-field arithmetic and exact linear algebra.
//! * [`grs`]: storage and query generator matrices.
//! * [`scheme`]: encoding, queries, answers, decoding.
//! * [`privacy`]: exhaustive information-theoretic audits on small instances.
//! * [`metrics`]: capacity and secrecy formulas and measured rates.
//! * [`sim`]: message-passing execution with a binary wire format.

pub mod error;
pub mod field;
pub mod grs;
pub mod metrics;
pub mod privacy;
pub mod rng;
pub mod scheme;
pub mod sim;

pub use error::{Error, Result};
pub use field::{Fe, FieldMatrix, PrimeField};
pub use scheme::SchemeParams;
