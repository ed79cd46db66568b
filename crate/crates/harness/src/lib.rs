//! Verification campaigns over the lemma suite: seeded instance generation,
//! exact checking in a worker pool, deterministic JSON/CSV reports and
//! single-instance replay.

pub mod campaign;
pub mod lemma;
pub mod lemmas;
pub mod numeric;
pub mod replay;

pub use campaign::{run_campaign, CampaignParams, Report, Row, Status};
pub use lemma::{Bound, Instance, Lemma, LemmaRegistry, Outcome, Variant};
pub use replay::{load_instance, parse_instance, replay, Verdict, VerdictKind};
