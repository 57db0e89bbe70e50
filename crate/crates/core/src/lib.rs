//! Tensor block-term-decomposition modulation (BTDM) for massive unsourced
//! random access.
//!
//! Each active user sends the matrix signal `A·Bᵀ`, where `A` and `B` are
//! unitary Grassmann-constellation symbols carrying the user's coded bits.
//! Through a flat Rayleigh channel to an `N`-antenna receiver the sum of all
//! users forms a third-order tensor with rank-(L,L,1) block-term structure.
//! The receiver fits that structure with a Gauss-Newton dogleg solver,
//! demaps every recovered subspace back to bits and validates the result
//! with an outer BCH code.
//!
//! Module map:
//!
//! - [`tensor`]: dense complex tensors, block terms, synthesis and residuals.
//! - [`codec`]: bit budgeting, cube-split mapping, symbol construction and demapping.
//! - [`solver`]: Gauss-Newton dogleg fit and factor canonicalization.
//! - [`outer`]: shortened binary BCH outer code.
//! - [`channel`]: Rayleigh fading, AWGN and transmit-side synthesis.
//! - [`receiver`]: demodulation, successive cancellation, grouping and PUPE.
//! - [`harness`]: experiment configuration and the Monte-Carlo driver.

pub mod channel;
pub mod codec;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod link;
pub mod outer;
pub mod receiver;
pub mod rng;
pub mod solver;
pub mod tensor;


pub use channel::{ChannelConfig, Transmission};
pub use codec::{Bits, CodecParams, GrassmannSymbol};
pub use error::{Error, Result};
pub use harness::{ExperimentConfig, ResultRow, TrialReport};
pub use linalg::CMatrix;
pub use link::LinkParams;
pub use outer::{BchCode, DecodeStatus};
pub use receiver::{MessageSet, Reception, ReceiverConfig};
pub use solver::{SolveResult, SolverConfig};
pub use tensor::{BlockTerm, BtdModel, ComplexTensor3};

pub use num_complex::Complex64;
