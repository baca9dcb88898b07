//! Exact construction and desk-scale verification of completely positive
//! tensor reformulations of polynomial optimization problems with linear
//! inequality constraints.
//!
//! The crate is organized around the pipeline it implements:
//!
//! * [`tensor`] — exact symmetric tensor algebra: canonical sparse storage,
//!   rank-1 outer powers, multiplicity-weighted inner products, uniform mode
//!   products and the adjoint pairing identity.
//! * [`poly`] — sparse rational polynomials and the coefficient-tensor maps
//!   in both directions.
//! * [`pop`] — problem instances over polyhedral or finite feasible sets,
//!   recession cones, the scaling certificate, and brute-force oracles.
//! * [`builder`] — the lifted convex program, the equivalent completely
//!   positive tensor programs, and their copositive duals.
//! * [`oracle`] — simplex-lattice copositivity search, constructive
//!   completely-positive membership, dual feasibility and bound probing.
//! * [`formats`] — deterministic text and JSON codecs for every artifact.
//! * [`pipeline`] — end-to-end verification with machine-readable reports.
//!
//! Construction-layer arithmetic is exact rational throughout; floating
//! point appears only in oracle margins and the report fields derived from
//! them.

pub mod builder;
pub mod error;
pub mod formats;
pub mod linalg;
pub mod oracle;
pub mod pipeline;
pub mod poly;
pub mod pop;
pub mod rat;
pub mod tensor;

pub use error::{Error, Result};
pub use rat::Rat;
