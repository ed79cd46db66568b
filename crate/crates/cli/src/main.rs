//! `majorn`: command-line front end for the majorization toolkit and its
//! verification campaigns.
//!
//! Exit codes: 0 success or all pass, 1 a checked property fails, 2
//! precondition, usage or input errors.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use majorn_core::boyd::{boyd_upper, conj_lsz_probe, default_probes, DEFAULT_PROBE_LEN};
use majorn_core::interpolation::{
    decompose_pq, membership_probe, verify_decomposition, Couple, KFunctional, ProbeDomain,
};
use majorn_core::operators::{op_norms, synthesize, verify_synthesis, Operand, OperatorExpr, SynthKind};
use majorn_core::oracle::parse_oracle;
use majorn_core::partitions::{
    partition_head, partition_pairs, partition_seq, partition_tail, verify_head_partition, verify_pairs,
    verify_seq_cover, verify_tail_partition,
};
use majorn_core::rat::{self, Rat};
use majorn_core::{check_order, check_order_seq, FinSeq, NormIndex, OrderKind, OrderTag, StepFunction};
use majorn_harness::lemmas::spike_plateau_family;
use majorn_harness::{load_instance, replay, run_campaign, CampaignParams, LemmaRegistry};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "majorn", version, about = "Exact majorization, operator synthesis and lemma campaigns")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PartitionLemma {
    Pairs,
    Head,
    Tail,
    Seq,
}

#[derive(Subcommand)]
enum Command {
    /// Decreasing rearrangement of a step function.
    Mu { f: PathBuf },
    /// Decide an order between f and g; exit 1 when it fails.
    Check {
        #[arg(long, value_parser = parse_tag)]
        kind: OrderTag,
        #[arg(long, value_parser = parse_rat, default_value = "1")]
        r: Rat,
        f: PathBuf,
        g: PathBuf,
    },
    /// Build and verify an interval or index partition.
    Partition {
        #[arg(long, value_enum)]
        lemma: PartitionLemma,
        f: PathBuf,
        g: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Synthesize an operator with T f = g and check its norm bounds.
    Synth {
        #[arg(long, value_parser = parse_synth)]
        lemma: SynthKind,
        #[arg(long, value_parser = parse_rat)]
        r: Rat,
        f: PathBuf,
        g: PathBuf,
        /// Where to write the operator.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Norms of a stored operator.
    Opnorm {
        op: PathBuf,
        /// Norm index: 0, a positive rational or inf. Repeatable.
        #[arg(long = "p", value_parser = parse_index, required = true)]
        p: Vec<NormIndex>,
    },
    /// K-functional of f at t.
    Kfun {
        #[arg(long, value_parser = parse_couple)]
        couple: Couple,
        #[arg(long, value_parser = parse_rat)]
        p: Option<Rat>,
        #[arg(long, value_parser = parse_rat)]
        q: Option<Rat>,
        #[arg(long, value_parser = parse_rat)]
        t: Rat,
        f: PathBuf,
    },
    /// Split g = g1 + g2 with g1^p head- and g2^q tail-majorized by f.
    Decompose {
        #[arg(long, value_parser = parse_rat)]
        p: Rat,
        #[arg(long, value_parser = parse_rat)]
        q: Rat,
        f: PathBuf,
        g: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Sample ordered pairs and report norm ratios; exit 1 on a divergent family.
    Probe {
        /// Oracle spec (`lp:2`, `linf`, `lorentz:1:n^-1/2`) or a bare `lp` with --p.
        #[arg(long)]
        oracle: String,
        #[arg(long, value_parser = parse_rat)]
        p: Option<Rat>,
        #[arg(long, value_parser = parse_tag)]
        kind: OrderTag,
        /// Order exponent; defaults to --p, else 1.
        #[arg(long, value_parser = parse_rat)]
        r: Option<Rat>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Probe sequences instead of functions.
        #[arg(long)]
        sequence: bool,
        /// Also write the spike/plateau family as a replayable instance.
        #[arg(long)]
        family_out: Option<PathBuf>,
    },
    /// Upper Boyd index estimate from dilation norms.
    Boyd {
        #[arg(long)]
        oracle: String,
        #[arg(long, default_value_t = 4096)]
        kmax: u64,
    },
    /// Three-part interpolation probe; exit 1 on an inconsistency.
    Conj {
        #[arg(long)]
        oracle: String,
        #[arg(long, value_parser = parse_rat)]
        q: Rat,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a seeded campaign for one lemma.
    Verify {
        #[arg(long)]
        lemma: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        size: Option<usize>,
        /// Comma-separated exponents, e.g. `1/2,1,2`.
        #[arg(long, value_delimiter = ',', value_parser = parse_rat)]
        exponents: Option<Vec<Rat>>,
        #[arg(long)]
        threads: Option<usize>,
        /// JSON report path.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Rerun a stored instance.
    Replay { file: PathBuf },
    /// List registered lemma tags.
    Lemmas,
}

fn parse_rat(s: &str) -> Result<Rat, String> {
    rat::parse(s).map_err(|e| e.to_string())
}

fn parse_tag(s: &str) -> Result<OrderTag, String> {
    s.parse().map_err(|e: majorn_core::Error| e.to_string())
}

fn parse_synth(s: &str) -> Result<SynthKind, String> {
    s.parse().map_err(|e: majorn_core::Error| e.to_string())
}

fn parse_couple(s: &str) -> Result<Couple, String> {
    s.parse().map_err(|e: majorn_core::Error| e.to_string())
}

fn parse_index(s: &str) -> Result<NormIndex, String> {
    NormIndex::parse(s).map_err(|e| e.to_string())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("{}: malformed input", path.display()))
}

fn write_json(path: &Path, v: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(v)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

/// Writes to stdout; a closed pipe (`majorn ... | head`) is not an error.
fn emit(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn print_json(v: &impl Serialize) -> Result<()> {
    emit(&(serde_json::to_string_pretty(v)? + "\n"))
}

fn code(pass: bool) -> i32 {
    if pass {
        0
    } else {
        1
    }
}

fn operand(path: &Path) -> Result<Operand> {
    read_json(path)
}

fn oracle_spec(oracle: &str, p: Option<&Rat>) -> Result<String> {
    Ok(match (oracle.contains(':'), p) {
        (true, _) => oracle.to_string(),
        (false, Some(p)) if oracle == "lp" || oracle == "lorentz" => format!("{oracle}:{}", rat::format(p)),
        (false, None) if oracle == "lp" => bail!("oracle lp needs --p"),
        _ => oracle.to_string(),
    })
}

fn check(kind: OrderTag, r: Rat, f: &Path, g: &Path) -> Result<i32> {
    let kind = OrderKind::new(kind, r);
    let cert = match (operand(f)?, operand(g)?) {
        (Operand::Step(f), Operand::Step(g)) => check_order(&f, &g, &kind)?,
        (Operand::Seq(a), Operand::Seq(b)) => check_order_seq(&a, &b, &kind)?,
        _ => bail!("f and g must both be step functions or both sequences"),
    };
    print_json(&json!({ "kind": kind.to_string(), "certificate": cert }))?;
    Ok(code(cert.holds))
}

fn partition(lemma: PartitionLemma, f: &Path, g: &Path, output: Option<&Path>) -> Result<i32> {
    let (name, part, verdict): (&str, Value, majorn_core::Result<()>) = match lemma {
        PartitionLemma::Seq => {
            let (a, b): (FinSeq, FinSeq) = (read_json(f)?, read_json(g)?);
            let cover = partition_seq(&a, &b)?;
            let v = verify_seq_cover(&a, &b, &cover);
            ("seq", serde_json::to_value(&cover)?, v)
        }
        _ => {
            let (f, g): (StepFunction, StepFunction) = (read_json(f)?, read_json(g)?);
            match lemma {
                PartitionLemma::Pairs => {
                    let p = partition_pairs(&f, &g)?;
                    ("pairs", serde_json::to_value(&p)?, verify_pairs(&f, &g, &p))
                }
                PartitionLemma::Head => {
                    let p = partition_head(&f, &g)?;
                    ("head", serde_json::to_value(&p)?, verify_head_partition(&f, &g, &p))
                }
                _ => {
                    let p = partition_tail(&f, &g)?;
                    ("tail", serde_json::to_value(&p)?, verify_tail_partition(&f, &g, &p))
                }
            }
        }
    };
    let out = json!({
        "lemma": name,
        "partition": part,
        "verified": verdict.is_ok(),
        "error": verdict.as_ref().err().map(|e| e.to_string()),
    });
    match output {
        Some(path) => {
            write_json(path, &out)?;
            emit(&format!("{name} partition {}\n", if verdict.is_ok() { "verified" } else { "FAILED verification" }))?;
        }
        None => print_json(&out)?,
    }
    Ok(code(verdict.is_ok()))
}

fn synth(kind: SynthKind, r: Rat, f: &Path, g: &Path, output: Option<&Path>) -> Result<i32> {
    let (f, g) = (operand(f)?, operand(g)?);
    let op = synthesize(kind, &f, &g, &r)?;
    let sc = verify_synthesis(kind, &f, &g, &r, &op)?;
    match output {
        Some(path) => write_json(path, &op)?,
        None => print_json(&json!({ "operator": op }))?,
    }
    print_json(&sc)?;
    Ok(code(sc.passed()))
}

fn kfun(couple: Couple, p: Option<Rat>, q: Option<Rat>, t: Rat, f: &Path) -> Result<i32> {
    let f: StepFunction = read_json(f)?;
    let k = KFunctional::new(couple, p, q)?.eval(&f, &t)?;
    let holmstedt = k
        .holmstedt
        .as_ref()
        .map(|h| json!({ "cut": h.cut.to_string(), "head": h.head.to_string(), "tail": h.tail.to_string() }));
    print_json(&json!({
        "couple": couple.to_string(),
        "t": rat::format(&t),
        "value": k.value.to_string(),
        "approx": k.value.to_f64(),
        "equivalent_only": k.equivalent_only,
        "holmstedt": holmstedt,
    }))?;
    Ok(0)
}

fn decompose(p: Rat, q: Rat, f: &Path, g: &Path, output: Option<&Path>) -> Result<i32> {
    let (f, g): (StepFunction, StepFunction) = (read_json(f)?, read_json(g)?);
    let d = decompose_pq(&f, &g, &p, &q)?;
    let v = verify_decomposition(&f, &g, &p, &q, &d)?;
    match output {
        Some(path) => write_json(path, &d)?,
        None => print_json(&json!({ "decomposition": d }))?,
    }
    print_json(&v)?;
    Ok(code(v.passed()))
}

#[allow(clippy::too_many_arguments)]
fn probe(
    oracle: &str,
    p: Option<Rat>,
    kind: OrderTag,
    r: Option<Rat>,
    samples: usize,
    seed: u64,
    sequence: bool,
    family_out: Option<&Path>,
) -> Result<i32> {
    let spec = oracle_spec(oracle, p.as_ref())?;
    let r = r.or(p).unwrap_or_else(rat::one);
    let kind = OrderKind::new(kind, r);
    let domain = if sequence { ProbeDomain::Sequence } else { ProbeDomain::Function };
    let v = membership_probe(parse_oracle(&spec)?.as_ref(), &kind, domain, samples, seed)?;
    if let Some(path) = family_out {
        write_json(path, &spike_plateau_family(&spec, &kind, None)?)?;
    }
    print_json(&v)?;
    Ok(code(!v.divergent))
}

fn verify(reg: &LemmaRegistry, params: CampaignParams, output: Option<&Path>, csv: Option<&Path>) -> Result<i32> {
    let report = run_campaign(reg, &params)?;
    if let Some(path) = output {
        fs::write(path, report.to_json() + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = csv {
        fs::write(path, report.to_csv()?).with_context(|| format!("writing {}", path.display()))?;
    }
    let mut text = report.table();
    for row in report.failures().take(5) {
        let msg = row.message.as_deref().unwrap_or("");
        text += &format!("  {} #{} [{}]: {msg}\n", row.status.as_str(), row.id, row.variant);
    }
    emit(&text)?;
    Ok(report.exit_code())
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Mu { f } => {
            let f: StepFunction = read_json(&f)?;
            print_json(&f.rearrange())?;
            Ok(0)
        }
        Command::Check { kind, r, f, g } => check(kind, r, &f, &g),
        Command::Partition { lemma, f, g, output } => partition(lemma, &f, &g, output.as_deref()),
        Command::Synth { lemma, r, f, g, output } => synth(lemma, r, &f, &g, output.as_deref()),
        Command::Opnorm { op, p } => {
            let op: OperatorExpr = read_json(&op)?;
            print_json(&op_norms(&op, &p)?)?;
            Ok(0)
        }
        Command::Kfun { couple, p, q, t, f } => kfun(couple, p, q, t, &f),
        Command::Decompose { p, q, f, g, output } => decompose(p, q, &f, &g, output.as_deref()),
        Command::Probe { oracle, p, kind, r, samples, seed, sequence, family_out } => {
            probe(&oracle, p, kind, r, samples, seed, sequence, family_out.as_deref())
        }
        Command::Boyd { oracle, kmax } => {
            let est = boyd_upper(parse_oracle(&oracle)?.as_ref(), kmax, &default_probes(DEFAULT_PROBE_LEN))?;
            print_json(&est)?;
            Ok(0)
        }
        Command::Conj { oracle, q, samples, seed } => {
            let rep = conj_lsz_probe(parse_oracle(&oracle)?.as_ref(), &q, samples, seed)?;
            print_json(&rep)?;
            Ok(code(rep.inconsistencies.is_empty()))
        }
        Command::Verify { lemma, samples, seed, size, exponents, threads, output, csv } => {
            let params = CampaignParams { lemma, samples, seed, size, exponents, threads };
            verify(&LemmaRegistry::builtin(), params, output.as_deref(), csv.as_deref())
        }
        Command::Replay { file } => {
            let verdict = replay(&LemmaRegistry::builtin(), &load_instance(&file)?)?;
            print_json(&verdict)?;
            Ok(verdict.exit_code())
        }
        Command::Lemmas => {
            let reg = LemmaRegistry::builtin();
            let mut text = String::new();
            for tag in reg.tags() {
                text += &format!("{tag:<18} {}\n", reg.get(tag)?.summary());
            }
            for (alias, tag) in reg.aliases() {
                text += &format!("{alias:<18} alias of {tag}\n");
            }
            emit(&text)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
