//! Rerunning a single stored instance.

use std::path::Path;

use majorn_core::{Error, Result};
use serde::Serialize;

use crate::lemma::{Instance, LemmaRegistry, Outcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictKind {
    Pass,
    Fail,
    /// The instance does not satisfy the lemma's hypotheses.
    Precondition,
    Error,
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub lemma: String,
    pub variant: String,
    pub verdict: VerdictKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<Outcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl Verdict {
    pub fn exit_code(&self) -> i32 {
        match self.verdict {
            VerdictKind::Pass => 0,
            VerdictKind::Fail => 1,
            VerdictKind::Precondition | VerdictKind::Error => 2,
        }
    }
}

/// Parses an instance, reporting the line and column of malformed input.
pub fn parse_instance(text: &str) -> Result<Instance> {
    serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("instance file, line {} column {}: {e}", e.line(), e.column())))
}

pub fn load_instance(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
    parse_instance(&text).map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn replay(registry: &LemmaRegistry, instance: &Instance) -> Result<Verdict> {
    let lemma = registry.get(&instance.lemma)?;
    let (verdict, outcome, message) = match lemma.check(&instance.variant, &instance.data) {
        Ok(o) => (if o.pass { VerdictKind::Pass } else { VerdictKind::Fail }, Some(o), None),
        Err(e @ Error::Precondition(_)) => (VerdictKind::Precondition, None, Some(e.to_string())),
        Err(e) => (VerdictKind::Error, None, Some(e.to_string())),
    };
    Ok(Verdict { lemma: lemma.tag().to_string(), variant: instance.variant.label.clone(), verdict, outcome, message })
}
