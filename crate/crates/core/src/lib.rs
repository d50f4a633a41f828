//! Referral trees as cooperative games.
//!
//! A referral tree is modelled as a *tree game*: a coalition is worth the
//! value of the members connected to the root through the coalition. This
//! crate computes Shapley values of such games three independent ways
//! (exhaustive, over trimmed coalitions, and the linear closed form for the
//! one-unit-per-member game), maintains them under streaming joins, compares
//! them with refer-a-friend and geometric payouts, and checks core membership
//! and convexity.
//!
//! Every engine is generic over [`Scalar`]; the [`Rational`] aliases give the
//! exact instantiation used throughout, [`f64`] works for approximations.

pub mod analysis;
pub mod enumerate;
pub mod error;
pub mod game;
pub mod generate;
pub mod incremental;
pub mod io;
pub mod mechanisms;
pub mod scalar;
pub mod shapley;
pub mod tree;

pub use error::{Error, Result};
pub use game::ValueFunction;
pub use incremental::{IncrementalState, JoinDelta};
pub use scalar::Scalar;
pub use tree::{Coalition, NodeId, RootedTree, TrimmedSet};

/// Exact arbitrary-precision rational.
pub type Rational = num_rational::BigRational;

pub type Allocation = shapley::Allocation<Rational>;
pub type TreeGame = game::TreeGame<Rational>;
pub type MechanismSpec = mechanisms::MechanismSpec<Rational>;
pub type MechanismKind = mechanisms::MechanismKind<Rational>;
pub type RewardReport = mechanisms::RewardReport<Rational>;

pub type AllocationF64 = shapley::Allocation<f64>;
pub type TreeGameF64 = game::TreeGame<f64>;
