//! Construction, encoding, validation and analysis of n-bit S-boxes.
//!
//! Two correspondences are provided:
//!
//! * [`bcn`]: an S-box is equivalent to its `n` output bit-planes (binary
//!   coefficient numbers), each read as a polynomial over GF(2) of degree at
//!   most `2^n - 1`.
//! * [`coeff`]: an S-box is the coefficient list of one polynomial of degree
//!   `2^n - 1` with coefficients mod `2^n`.
//!
//! [`generator`] assembles boxes from chosen planes and searches for proper
//! ones, [`analysis`] scores them, and [`poly`] supplies the polynomial
//! arithmetic and irreducibility testing underneath.

pub mod analysis;
pub mod bcn;
pub mod coeff;
pub mod error;
pub mod exec;
pub mod generator;
pub mod poly;
pub mod sbox;

pub use analysis::{analyze, MetricsReport};
pub use bcn::{bcns_to_sbox, sbox_to_bcns, Bcn, Role};
pub use coeff::{big_sbox_probe, coeffs_from_sbox, sbox_from_coeffs, CoeffPermPoly, Order};
pub use error::{Error, Result};
pub use exec::Exec;
pub use generator::{candidate_stats, generate, search, CandidateReport, SearchConfig, Verdict};
pub use poly::{GfPolynomial, PolyClass};
pub use sbox::SBox;
