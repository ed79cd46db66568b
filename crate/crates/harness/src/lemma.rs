//! The lemma interface and the registry campaigns and replays draw from.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use majorn_core::rat::{self, Rat};
use majorn_core::{Error, OrderTag, Result};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// One parameter setting of a lemma: an exponent and, for lemmas that range
/// over orders, the order tag.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variant {
    pub label: String,
    #[serde(with = "rat::serde_str")]
    pub r: Rat,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub kind: Option<OrderTag>,
}

impl Variant {
    pub fn exponent(r: &Rat) -> Self {
        Variant { label: format!("r={}", rat::format(r)), r: r.clone(), kind: None }
    }

    pub fn with_kind(tag: OrderTag, r: &Rat) -> Self {
        Variant { label: format!("{tag} r={}", rat::format(r)), r: r.clone(), kind: Some(tag) }
    }

    pub fn tag(&self) -> Result<OrderTag> {
        self.kind.ok_or_else(|| Error::Invalid(format!("variant {} lacks an order kind", self.label)))
    }
}

/// A self-contained instance: enough to rerun a single check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub lemma: String,
    pub variant: Variant,
    pub data: Value,
}

/// Published bound quoted next to an observed constant.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Bound {
    pub name: String,
    pub expr: String,
    pub value: f64,
}

impl Bound {
    pub fn new(name: impl Into<String>, expr: impl Into<String>, value: f64) -> Self {
        Bound { name: name.into(), expr: expr.into(), value }
    }
}

/// Result of checking one instance.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub pass: bool,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub observed: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub counts: BTreeMap<String, u64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub trace: Vec<String>,
}

impl Outcome {
    pub fn new(pass: bool) -> Self {
        Outcome { pass, ..Default::default() }
    }

    pub fn observe(mut self, key: impl Into<String>, value: f64) -> Self {
        self.observed.insert(key.into(), value);
        self
    }

    pub fn count(self, key: impl Into<String>) -> Self {
        self.count_n(key, 1)
    }

    pub fn count_n(mut self, key: impl Into<String>, n: u64) -> Self {
        *self.counts.entry(key.into()).or_insert(0) += n;
        self
    }

    pub fn note(mut self, line: impl Into<String>) -> Self {
        self.trace.push(line.into());
        self
    }

    /// Marks the outcome failed with a reason.
    pub fn fail(mut self, why: impl Into<String>) -> Self {
        self.pass = false;
        self.trace.push(why.into());
        self
    }
}

pub trait Lemma: Send + Sync {
    fn tag(&self) -> &'static str;

    fn summary(&self) -> &'static str;

    fn default_exponents(&self) -> Vec<Rat> {
        vec![rat::one()]
    }

    fn default_size(&self) -> usize {
        6
    }

    /// Parameter settings a campaign sweeps; each receives `samples` instances.
    fn variants(&self, exponents: &[Rat]) -> Result<Vec<Variant>> {
        Ok(exponents.iter().map(Variant::exponent).collect())
    }

    /// Bounds on the observed constants of a variant.
    fn bounds(&self, _variant: &Variant) -> Vec<Bound> {
        Vec::new()
    }

    fn generate(&self, rng: &mut ChaCha8Rng, variant: &Variant, size: usize) -> Result<Value>;

    /// Verifies one instance. A violated lemma precondition is reported as
    /// `Error::Precondition`, never as a failed outcome.
    fn check(&self, variant: &Variant, data: &Value) -> Result<Outcome>;
}

pub fn to_data<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Invalid(format!("cannot encode instance: {e}")))
}

pub fn from_data<T: for<'de> Deserialize<'de>>(v: &Value) -> Result<T> {
    T::deserialize(v).map_err(|e| Error::Parse(format!("malformed instance data: {e}")))
}

/// Lemmas by tag, plus aliases.
#[derive(Clone, Default)]
pub struct LemmaRegistry {
    lemmas: BTreeMap<String, Arc<dyn Lemma>>,
    aliases: BTreeMap<String, String>,
}

impl fmt::Debug for LemmaRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.lemmas.keys()).finish()
    }
}

impl LemmaRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        crate::lemmas::register_all(&mut r);
        r
    }

    pub fn register(&mut self, lemma: impl Lemma + 'static) {
        self.lemmas.insert(lemma.tag().to_string(), Arc::new(lemma));
    }

    pub fn alias(&mut self, alias: &str, tag: &str) {
        self.aliases.insert(alias.to_string(), tag.to_string());
    }

    pub fn tags(&self) -> Vec<&str> {
        self.lemmas.keys().map(String::as_str).collect()
    }

    pub fn aliases(&self) -> impl Iterator<Item = (&str, &str)> {
        self.aliases.iter().map(|(a, t)| (a.as_str(), t.as_str()))
    }

    pub fn get(&self, tag: &str) -> Result<Arc<dyn Lemma>> {
        let key = self.aliases.get(tag).map(String::as_str).unwrap_or(tag);
        self.lemmas
            .get(key)
            .cloned()
            .ok_or_else(|| Error::Invalid(format!("unknown lemma '{tag}' (known: {})", self.tags().join(", "))))
    }
}
