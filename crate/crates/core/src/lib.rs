//! Scott analysis of finite metric spaces with exact rational distances.
//!
//! The crate computes back-and-forth ranks of tuples and spaces, solves
//! Ehrenfeucht–Fraïssé games and tolerance-scheduled approximation games,
//! searches for compact approximation systems over nested nets, and turns
//! winning strategies and systems into certified autoisometries. Brute-force
//! oracles in [`oracle`] recompute the central quantities independently.

pub mod analysis;
pub mod cas;
pub mod corpus;
pub mod error;
pub mod game;
pub mod metric;
pub mod nets;
pub mod oracle;
pub mod rank;
pub mod rational;
pub mod tuple;

pub use analysis::{
    atomic_related, compute_bf_table, distinguishing_strategy, scott_rank_pair, scott_rank_space,
    BackAndForthTable, RankSolver, SpaceRank,
};
pub use error::{Error, Result};
pub use metric::{parse_metric_space, MetricSpace, Point};
pub use nets::{build_net_family, NetFamily};
pub use rank::{Budget, RankValue};
pub use rational::Rational;
pub use tuple::PointTuple;
