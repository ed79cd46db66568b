//! Seeded campaigns: generation, construction and exact verification over
//! many instances, merged into a deterministic report.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use majorn_core::generate::instance_rng;
use majorn_core::rat::{self, Rat};
use majorn_core::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;

use crate::lemma::{Bound, Instance, LemmaRegistry, Outcome, Variant};

/// Environment variable capping the worker pool.
pub const THREADS_VAR: &str = "MAJORN_THREADS";

#[derive(Clone, Debug)]
pub struct CampaignParams {
    pub lemma: String,
    /// Instances per variant.
    pub samples: usize,
    pub seed: u64,
    pub size: Option<usize>,
    pub exponents: Option<Vec<Rat>>,
    /// Worker count; `MAJORN_THREADS` or the rayon default when unset.
    pub threads: Option<usize>,
}

impl CampaignParams {
    pub fn new(lemma: &str, samples: usize, seed: u64) -> Self {
        CampaignParams { lemma: lemma.to_string(), samples, seed, size: None, exponents: None, threads: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Error => "error",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub id: u64,
    pub variant: String,
    pub status: Status,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub observed: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    /// Present on every row that did not pass.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance: Option<Instance>,
    #[serde(skip)]
    counts: BTreeMap<String, u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstantSummary {
    pub name: String,
    pub max_observed: f64,
    /// Instance attaining the maximum.
    pub argmax: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_value: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VariantSummary {
    pub label: String,
    pub instances: usize,
    pub pass: usize,
    pub fail: usize,
    pub errors: usize,
    pub constants: Vec<ConstantSummary>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub counts: BTreeMap<String, u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub lemma: String,
    pub summary: String,
    pub seed: u64,
    pub samples: usize,
    pub size: usize,
    pub exponents: Vec<String>,
    pub total: usize,
    pub pass: usize,
    pub fail: usize,
    pub errors: usize,
    pub status: String,
    pub variants: Vec<VariantSummary>,
    pub rows: Vec<Row>,
    /// Wall-clock time; kept out of the JSON so reports are reproducible.
    #[serde(skip)]
    pub runtime: Duration,
}

impl Report {
    /// 0 when every instance passed, 1 on a lemma violation, 2 when an
    /// instance could not be checked.
    pub fn exit_code(&self) -> i32 {
        if self.fail > 0 {
            1
        } else if self.errors > 0 {
            2
        } else {
            0
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One line per instance; observed constants as columns.
    pub fn to_csv(&self) -> Result<String> {
        let keys: BTreeSet<&str> = self.rows.iter().flat_map(|r| r.observed.keys().map(String::as_str)).collect();
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Invalid(format!("csv: {e}"));
        let mut header = vec!["id", "variant", "status"];
        header.extend(keys.iter().copied());
        w.write_record(&header).map_err(csv_err)?;
        for row in &self.rows {
            let mut rec = vec![row.id.to_string(), row.variant.clone(), row.status.as_str().to_string()];
            rec.extend(keys.iter().map(|k| row.observed.get(*k).map(|v| v.to_string()).unwrap_or_default()));
            w.write_record(&rec).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Invalid(format!("csv: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::Invalid(e.to_string()))
    }

    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ =
            writeln!(s, "lemma {} (seed {}, {} per variant, size {})", self.lemma, self.seed, self.samples, self.size);
        for v in &self.variants {
            let _ = writeln!(
                s,
                "  {:<24} {:>6} instances  {:>6} pass  {:>4} fail  {:>4} error",
                v.label, v.instances, v.pass, v.fail, v.errors
            );
            for c in &v.constants {
                let bound = match (&c.bound, c.bound_value) {
                    (Some(expr), Some(val)) => format!("  bound {expr} = {val:.6}"),
                    _ => String::new(),
                };
                let _ = writeln!(s, "      {:<22} max {:.6} (instance {}){bound}", c.name, c.max_observed, c.argmax);
            }
            for (k, n) in &v.counts {
                let _ = writeln!(s, "      {k:<22} {n}");
            }
        }
        let _ = writeln!(
            s,
            "{}: {} pass, {} fail, {} error in {:.2}s",
            self.status,
            self.pass,
            self.fail,
            self.errors,
            self.runtime.as_secs_f64()
        );
        s
    }

    pub fn failures(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| r.status != Status::Pass)
    }
}

/// Worker pool with `threads` workers, else as many as `MAJORN_THREADS` allows.
pub fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        b = b.num_threads(n.max(1));
    } else if let Ok(v) = std::env::var(THREADS_VAR) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Error::Invalid(format!("{THREADS_VAR} must be a positive integer, got {v:?}")))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::Invalid(format!("thread pool: {e}")))
}

pub fn run_campaign(registry: &LemmaRegistry, params: &CampaignParams) -> Result<Report> {
    let start = Instant::now();
    let lemma = registry.get(&params.lemma)?;
    let exponents = params.exponents.clone().unwrap_or_else(|| lemma.default_exponents());
    let variants = lemma.variants(&exponents)?;
    let size = params.size.unwrap_or_else(|| lemma.default_size());
    if size == 0 {
        return Err(Error::Invalid("size must be positive".into()));
    }
    let total = params.samples * variants.len();

    let run_one = |id: usize| -> Result<Row> {
        let variant = &variants[id / params.samples];
        let mut rng = instance_rng(params.seed, id as u64);
        let data = lemma.generate(&mut rng, variant, size).map_err(|e| {
            Error::Oracle(format!("{} instance {id} [{}]: generation failed: {e}", lemma.tag(), variant.label))
        })?;
        let instance = Instance { lemma: lemma.tag().to_string(), variant: variant.clone(), data };
        let (status, outcome, message) = match lemma.check(variant, &instance.data) {
            Ok(o) if o.pass => (Status::Pass, o, None),
            Ok(o) => {
                let msg = o.trace.last().cloned();
                (Status::Fail, o, msg)
            }
            Err(e) => (Status::Error, Outcome::default(), Some(e.to_string())),
        };
        Ok(Row {
            id: id as u64,
            variant: variant.label.clone(),
            status,
            observed: outcome.observed,
            message,
            instance: (status != Status::Pass).then_some(instance),
            counts: outcome.counts,
        })
    };
    let rows: Vec<Row> =
        thread_pool(params.threads)?.install(|| (0..total).into_par_iter().map(run_one).collect::<Result<_>>())?;

    let summaries = variants.iter().map(|v| summarize(v, lemma.bounds(v), &rows)).collect();
    let count = |s: Status| rows.iter().filter(|r| r.status == s).count();
    let (pass, fail, errors) = (count(Status::Pass), count(Status::Fail), count(Status::Error));
    let status = if fail > 0 {
        "FAIL"
    } else if errors > 0 {
        "ERROR"
    } else {
        "PASS"
    };
    Ok(Report {
        lemma: lemma.tag().to_string(),
        summary: lemma.summary().to_string(),
        seed: params.seed,
        samples: params.samples,
        size,
        exponents: exponents.iter().map(rat::format).collect(),
        total,
        pass,
        fail,
        errors,
        status: status.to_string(),
        variants: summaries,
        rows,
        runtime: start.elapsed(),
    })
}

fn summarize(variant: &Variant, bounds: Vec<Bound>, rows: &[Row]) -> VariantSummary {
    let mine: Vec<&Row> = rows.iter().filter(|r| r.variant == variant.label).collect();
    let mut maxima: BTreeMap<&str, (f64, u64)> = BTreeMap::new();
    let mut counts = BTreeMap::new();
    for r in &mine {
        for (k, v) in &r.observed {
            let e = maxima.entry(k.as_str()).or_insert((f64::NEG_INFINITY, r.id));
            if *v > e.0 {
                *e = (*v, r.id);
            }
        }
        for (k, n) in &r.counts {
            *counts.entry(k.clone()).or_insert(0) += n;
        }
    }
    let constants = maxima
        .into_iter()
        .map(|(name, (max, argmax))| {
            let b = bounds.iter().find(|b| b.name == name);
            ConstantSummary {
                name: name.to_string(),
                max_observed: max,
                argmax,
                bound: b.map(|b| b.expr.clone()),
                bound_value: b.map(|b| b.value),
            }
        })
        .collect();
    let n = |s: Status| mine.iter().filter(|r| r.status == s).count();
    VariantSummary {
        label: variant.label.clone(),
        instances: mine.len(),
        pass: n(Status::Pass),
        fail: n(Status::Fail),
        errors: n(Status::Error),
        constants,
        counts,
    }
}
