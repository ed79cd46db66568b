//! Structured linear operators: expression trees, exact application and
//! norms, and the explicit constructions behind the majorization theorems.

mod contraction;
mod expr;
mod norm;
mod normal;
mod synth;

pub use contraction::{lp_contraction_check, scale_to_bicontraction, ContractionReport};
pub use expr::{Block, Carrier, Domain, Multiplier, Operand, OperatorExpr, Row, TransferPiece};
pub use norm::{matrix_norm, normal_norm, op_norm, op_norms, transfer_norm, NormEntry, NormReport};
pub use normal::{apply, compile, Normal, SeqMatrix, TransferForm};
pub use synth::{
    synth_head_equal, synth_head_weak, synth_seq_head, synth_seq_tail, synth_tail_equal, synth_tail_weak, synthesize,
    verify_synthesis, BoundCheck, SynthCheck, SynthKind,
};
