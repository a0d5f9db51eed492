//! D-optimal designs for paired comparison experiments with `K` two-level
//! attributes under a linear model with main effects, first-order and
//! second-order interactions.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: profiles, effect coding, regression and difference vectors,
//!   comparison depth and the orbits `X_d` of pairs with a fixed depth.
//! - [`measures`]: invariant designs over comparison depths, their diagonal
//!   information matrices, full information matrices for arbitrary pair
//!   designs and rounding to exact designs.
//! - [`optimality`]: variance functions, equivalence-theorem certification,
//!   block-wise optimal depths and the D-optimal weight search.
//! - [`oracle`]: brute-force information matrices, orbit census counts and a
//!   naive dense LU, used to check every closed form independently.
//! - [`sim`]: simulated responses and least-squares recovery.
//! - [`cli`]: the design document format and the command implementations
//!   behind the `pairdesign` binary.
//!
//! ```
//! use pairdesign::optimality::d_optimal_design;
//!
//! let result = d_optimal_design(4).unwrap();
//! assert!(result.certified);
//! assert_eq!(result.support_depths, vec![2, 4]);
//! assert!((result.design.weight(4) - 1.0 / 7.0).abs() < 1e-10);
//! ```

pub mod cli;
pub mod error;
pub mod fraction;
pub mod measures;
pub mod model;
pub mod optimality;
pub mod oracle;
pub mod sim;

pub use error::{Error, Result};
pub use measures::{DepthDesign, DiagonalInfo, ExactDesign, LogDet, PairDesign};
pub use model::{Block, ModelSpec, PairedComparison, Profile};
pub use optimality::{d_optimal_design, kw_certify, OptimalDesignResult, VarianceProfile};
