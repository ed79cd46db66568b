//! Exact majorization calculus on `(0, ∞)` and `ℤ⁺`.
//!
//! Step functions with rational breakpoints, the head/tail majorization
//! orders, the partition lemmas behind them, explicit operator synthesis with
//! exact norm evaluation, K-functionals and Boyd-index estimation.

pub mod boyd;
pub mod error;
pub mod exact;
pub mod finseq;
pub mod generate;
pub mod interpolation;
pub mod interval;
pub mod majorization;
pub mod mpmap;
pub mod operators;
pub mod oracle;
pub mod partitions;
pub mod rat;
pub mod stepfn;

pub use error::{Error, Result};
pub use exact::{Enclosure, Extended, PowerProduct};
pub use finseq::FinSeq;
pub use interval::{Interval, IntervalSet};
pub use majorization::{check_order, check_order_on_set, check_order_seq, Certificate, OrderKind, OrderTag};
pub use mpmap::{MPMap, MapPiece};
pub use partitions::{DeltaPartition, IntervalPair, PairPartition, SeqDeltaCover};
pub use rat::Rat;
pub use stepfn::{DilateDirection, NormIndex, StepFunction};
