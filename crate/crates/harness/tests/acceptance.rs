//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use majorn_core::boyd::{boyd_upper, conj_lsz_probe, default_probes, ConjReport, DEFAULT_PROBE_LEN};
use majorn_core::oracle::parse_oracle;
use majorn_core::rat;
use majorn_harness::lemmas::{APPLY_EXACT, APPLY_INEXACT, BOUNDS_HOLD, BOUNDS_VIOLATED};
use majorn_harness::{run_campaign, CampaignParams, LemmaRegistry, Report};

const SEED: u64 = 20240601;
const REARRANGE_BUDGET: Duration = Duration::from_secs(10);
const BOYD_BUDGET: Duration = Duration::from_secs(30);
const BOYD_K_MAX: u64 = 1 << 12;
const SLOPE_TOLERANCE: f64 = 0.05;
const CONTRACTION_SLACK: f64 = 1.0 + 1.0 / (1u64 << 30) as f64;
const CV_CONSTANT: f64 = 3.0;
const CONJ_SAMPLES: usize = 200;
/// Relative agreement of family ratios with `N^{1/q - 1/r}`.
const FAMILY_RTOL: f64 = 1e-9;

struct Line {
    ok: bool,
    detail: String,
}

fn line(ok: bool, detail: impl Into<String>) -> Line {
    Line { ok, detail: detail.into() }
}

fn campaign(reg: &LemmaRegistry, lemma: &str, samples: usize) -> Result<Report, String> {
    run_campaign(reg, &CampaignParams::new(lemma, samples, SEED)).map_err(|e| format!("{lemma}: {e}"))
}

fn clean(r: &Report) -> bool {
    r.fail == 0 && r.errors == 0 && r.total == r.pass
}

fn counts(r: &Report) -> BTreeMap<String, u64> {
    let mut out = BTreeMap::new();
    for v in &r.variants {
        for (k, n) in &v.counts {
            *out.entry(k.clone()).or_insert(0) += n;
        }
    }
    out
}

fn max_constant(r: &Report, name: &str) -> f64 {
    r.variants
        .iter()
        .flat_map(|v| &v.constants)
        .filter(|c| c.name == name)
        .map(|c| c.max_observed)
        .fold(f64::NEG_INFINITY, f64::max)
}

fn rearrangement(reg: &LemmaRegistry) -> Result<Line, String> {
    let r = campaign(reg, "rearrange", 10_000)?;
    Ok(line(
        clean(&r) && r.total == 10_000 && r.runtime < REARRANGE_BUDGET,
        format!(
            "{} functions, {} mismatches, {:.2}s (budget {}s)",
            r.total,
            r.fail,
            r.runtime.as_secs_f64(),
            REARRANGE_BUDGET.as_secs()
        ),
    ))
}

fn order_soundness(reg: &LemmaRegistry) -> Result<Line, String> {
    let r = campaign(reg, "check-order", 3334)?;
    let mut per_kind: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for v in &r.variants {
        let kind = v.label.split_whitespace().next().unwrap_or_default().to_string();
        let e = per_kind.entry(kind).or_default();
        e.0 += v.instances;
        e.1 += v.fail + v.errors;
    }
    let c = counts(&r);
    let ok = per_kind.len() == 4 && per_kind.values().all(|&(n, bad)| n >= 10_000 && bad == 0);
    let kinds: Vec<String> = per_kind.iter().map(|(k, (n, bad))| format!("{k} {n}/{bad}")).collect();
    Ok(line(
        ok,
        format!(
            "pairs/disagreements per kind: {}; {} ordered, {} not ordered",
            kinds.join(", "),
            c.get("holds").copied().unwrap_or(0),
            c.get("fails").copied().unwrap_or(0)
        ),
    ))
}

fn partitions(reg: &LemmaRegistry) -> Result<Line, String> {
    let mut ok = true;
    let mut parts = Vec::new();
    for lemma in ["partition-pairs", "partition-head", "partition-tail"] {
        let r = campaign(reg, lemma, 1000)?;
        ok &= clean(&r) && r.total >= 1000;
        parts.push(format!("{lemma} {}/{}", r.pass, r.total));
    }
    let r = campaign(reg, "seq-partition", 1000)?;
    let hist = counts(&r);
    let overlaps: Vec<u64> = hist.keys().filter_map(|k| k.strip_prefix("overlap ")?.parse().ok()).collect();
    ok &= clean(&r) && overlaps.iter().all(|k| (1..=3).contains(k));
    let hist: Vec<String> =
        hist.iter().filter(|(k, _)| k.starts_with("overlap ")).map(|(k, n)| format!("{k}: {n}")).collect();
    parts.push(format!("seq-partition {}/{} histogram {{{}}}", r.pass, r.total, hist.join(", ")));
    Ok(line(ok, parts.join("; ")))
}

const SYNTH: [&str; 6] =
    ["synth-head-eq", "synth-tail-eq", "synth-head-weak", "synth-tail-weak", "synth-seq-tail", "synth-seq-head"];

fn synth_campaigns(reg: &LemmaRegistry) -> Result<Vec<Report>, String> {
    SYNTH.iter().map(|l| campaign(reg, l, 1000)).collect()
}

fn synthesis_exactness(reports: &[Report]) -> Line {
    let mut ok = true;
    let mut parts = Vec::new();
    for r in reports {
        for v in &r.variants {
            let exact = v.counts.get(APPLY_EXACT).copied().unwrap_or(0);
            let inexact = v.counts.get(APPLY_INEXACT).copied().unwrap_or(0);
            ok &= v.instances >= 1000 && v.errors == 0 && exact == v.instances as u64 && inexact == 0;
            parts.push(format!("{} {}: {exact}/{}", r.lemma, v.label, v.instances));
        }
    }
    line(ok, format!("exact T f = g: {}", parts.join(", ")))
}

fn norm_constants(reports: &[Report]) -> Line {
    let mut ok = true;
    let mut parts = Vec::new();
    for r in reports {
        let c = counts(r);
        let violated = c.get(BOUNDS_VIOLATED).copied().unwrap_or(0);
        ok &= violated == 0 && c.get(BOUNDS_HOLD).copied().unwrap_or(0) == r.total as u64 && r.errors == 0;
        for v in &r.variants {
            for k in &v.constants {
                if let Some(b) = k.bound_value {
                    ok &= k.max_observed <= b;
                    parts.push(format!("{} {} {} {:.4} <= {:.4}", r.lemma, v.label, k.name, k.max_observed, b));
                }
            }
        }
        parts.push(format!("{} violations {violated}", r.lemma));
    }
    line(ok, parts.join("; "))
}

fn lp_contraction(reg: &LemmaRegistry) -> Result<Line, String> {
    let r = campaign(reg, "lp-contraction", 100)?;
    let labels: Vec<&str> = r.variants.iter().map(|v| v.label.as_str()).collect();
    let max = max_constant(&r, "max ratio");
    Ok(line(
        clean(&r) && labels == ["p=1 q=2", "p=1/2 q=1"] && max <= CONTRACTION_SLACK,
        format!("{} operators x 100 functions over {labels:?}, max ratio {max:.12}", r.total),
    ))
}

fn decompose(reg: &LemmaRegistry) -> Result<Line, String> {
    let r = campaign(reg, "decompose", 1000)?;
    Ok(line(clean(&r), format!("{}/{} decompositions exact and majorized", r.pass, r.total)))
}

fn k_functionals(reg: &LemmaRegistry) -> Result<Line, String> {
    let a = campaign(reg, "kfun-l0lq", 1000)?;
    let b = campaign(reg, "kfun-l1linf", 1000)?;
    Ok(line(
        clean(&a) && clean(&b),
        format!(
            "k_l0_lq {}/{} exact; k_l1_linf {}/{} within grid, max gap {:.3e}",
            a.pass,
            a.total,
            b.pass,
            b.total,
            max_constant(&b, "grid gap")
        ),
    ))
}

fn cesaro(reg: &LemmaRegistry) -> Result<Line, String> {
    let r = campaign(reg, "cv-comparison", 1000)?;
    let max = max_constant(&r, "max ratio");
    Ok(line(
        clean(&r) && r.size == 1024 && max <= CV_CONSTANT,
        format!("{} sequences of length {}, max C/V ratio {max:.6}", r.total, r.size),
    ))
}

fn boyd() -> Result<Line, String> {
    let start = Instant::now();
    let probes = default_probes(DEFAULT_PROBE_LEN);
    let mut ok = true;
    let mut parts = Vec::new();
    for p in [1.0, 2.0, 4.0] {
        let oracle = parse_oracle(&format!("lp:{p}")).map_err(|e| e.to_string())?;
        let est = boyd_upper(oracle.as_ref(), BOYD_K_MAX, &probes).map_err(|e| e.to_string())?;
        let err = (est.slope - 1.0 / p).abs();
        ok &= err <= SLOPE_TOLERANCE && !est.flagged;
        parts.push(format!("p={p} slope {:.4} (error {err:.4})", est.slope));
    }
    let t = start.elapsed();
    ok &= t < BOYD_BUDGET;
    Ok(line(ok, format!("{}; {:.2}s", parts.join(", "), t.as_secs_f64())))
}

/// The family `v = s e_0` (`s^q <= N`), `u = N` ones has ratio `N^{1/q - 1/r}` in `ℓ_r`.
fn family_matches(report: &ConjReport, r: f64, q: f64) -> bool {
    report.tail_part.family.iter().all(|m| {
        let want = (m.n as f64).powf(1.0 / q - 1.0 / r);
        (m.ratio_lo - want).abs() <= FAMILY_RTOL * want && m.ratio_lo <= m.ratio_hi
    })
}

fn conj() -> Result<Line, String> {
    let probe = |p: &str, q: i64| -> Result<ConjReport, String> {
        let oracle = parse_oracle(&format!("lp:{p}")).map_err(|e| e.to_string())?;
        conj_lsz_probe(oracle.as_ref(), &rat::int(q), CONJ_SAMPLES, SEED).map_err(|e| e.to_string())
    };
    let mut ok = true;
    let mut parts = Vec::new();
    for (p, q) in [("1", 2), ("2", 4)] {
        let rep = probe(p, q)?;
        let bounded = !rep.tail_part.unbounded
            && !rep.head_part.unbounded
            && rep.inconsistencies.is_empty()
            && rep.tail_part.max_ratio.is_finite()
            && rep.head_part.max_ratio.is_finite();
        ok &= bounded;
        parts.push(format!(
            "l{p} q={q}: tail max {:.3}, head max {:.3} at p={}, {}",
            rep.tail_part.max_ratio,
            rep.head_part.max_ratio,
            rat::format(&rep.p),
            if bounded { "bounded" } else { "UNBOUNDED" }
        ));
    }
    for (r, q) in [("2", 1), ("4", 2)] {
        let rep = probe(r, q)?;
        let fam = &rep.tail_part.family;
        let ns: Vec<u64> = fam.iter().map(|m| m.n).collect();
        let grows = fam.windows(2).all(|w| w[1].ratio_lo > w[0].ratio_hi);
        let right_sizes = ns == (4..=12).map(|e| 1u64 << e).collect::<Vec<_>>();
        let exact = family_matches(&rep, r.parse().unwrap(), q as f64);
        ok &= rep.tail_part.unbounded && grows && right_sizes && exact;
        parts.push(format!(
            "l{r} q={q}: family N=2^4..2^12 ratios {:.3} -> {:.3}, {}",
            fam.first().map(|m| m.ratio_lo).unwrap_or(f64::NAN),
            fam.last().map(|m| m.ratio_lo).unwrap_or(f64::NAN),
            if grows && exact { "monotone, matches N^(1/q-1/r)" } else { "NOT monotone or off formula" }
        ));
    }
    Ok(line(ok, parts.join("; ")))
}

fn determinism(reg: &LemmaRegistry) -> Result<Line, String> {
    let mut diffs = Vec::new();
    let mut n = 0;
    for tag in reg.tags() {
        let mut a = CampaignParams::new(tag, 6, SEED);
        match tag {
            "cv-comparison" => a.size = Some(128),
            "boyd-recovery" => a.size = Some(8),
            _ => {}
        }
        a.threads = Some(1);
        let mut b = a.clone();
        b.threads = Some(3);
        let ra = run_campaign(reg, &a).map_err(|e| e.to_string())?;
        let rb = run_campaign(reg, &b).map_err(|e| e.to_string())?;
        if ra.to_json() != rb.to_json() || ra.to_csv().ok() != rb.to_csv().ok() {
            diffs.push(tag.to_string());
        }
        n += 1;
    }
    Ok(line(diffs.is_empty(), format!("{n} campaigns run twice (1 vs 3 workers), differing: {diffs:?}")))
}

fn main() -> ExitCode {
    let reg = LemmaRegistry::builtin();
    let synth = synth_campaigns(&reg);
    let from_synth = |f: fn(&[Report]) -> Line| synth.as_ref().map(|r| f(r)).map_err(Clone::clone);
    let results: Vec<(&str, Result<Line, String>)> = vec![
        ("rearrangement oracle equivalence", rearrangement(&reg)),
        ("order decision soundness", order_soundness(&reg)),
        ("partition lemmas", partitions(&reg)),
        ("operator synthesis exactness", from_synth(synthesis_exactness)),
        ("norm-constant conformance", from_synth(norm_constants)),
        ("Lp contraction of (L0, Lq) bi-contractions", lp_contraction(&reg)),
        ("decompose_pq", decompose(&reg)),
        ("K-functional identities", k_functionals(&reg)),
        ("Cesaro/V comparison", cesaro(&reg)),
        ("Boyd index recovery", boyd()),
        ("interpolation probe coherence", conj()),
        ("determinism", determinism(&reg)),
    ];
    let mut failed = 0;
    for (i, (name, res)) in results.into_iter().enumerate() {
        let (ok, detail) = match res {
            Ok(l) => (l.ok, l.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!ok);
        println!("[{}] {:>2} {name}: {detail}", if ok { "PASS" } else { "FAIL" }, i + 1);
    }
    println!("acceptance: {} of 12 criteria passed", 12 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
