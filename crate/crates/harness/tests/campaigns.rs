use majorn_core::generate::instance_rng;
use majorn_core::rat;
use majorn_core::{Error, OrderKind, OrderTag, StepFunction};
use majorn_harness::lemmas::spike_plateau_family;
use majorn_harness::{
    parse_instance, replay, run_campaign, CampaignParams, Instance, LemmaRegistry, Status, VerdictKind,
};

fn small(lemma: &str, samples: usize, seed: u64) -> CampaignParams {
    CampaignParams::new(lemma, samples, seed)
}

#[test]
fn every_lemma_passes_a_small_campaign() {
    let reg = LemmaRegistry::builtin();
    for tag in reg.tags() {
        let mut p = small(tag, 4, 11);
        match tag {
            "cv-comparison" => p.size = Some(64),
            "boyd-recovery" => p.size = Some(8),
            _ => {}
        }
        let report = run_campaign(&reg, &p).unwrap();
        assert_eq!(report.status, "PASS", "{tag}:\n{}", report.table());
        assert_eq!(report.exit_code(), 0);
        assert_eq!(report.total, report.pass);
    }
}

#[test]
fn aliases_resolve_to_synth_lemmas() {
    let reg = LemmaRegistry::builtin();
    for (alias, tag) in [
        ("first-operator", "synth-head-eq"),
        ("second-operator", "synth-tail-eq"),
        ("third-operator", "synth-head-weak"),
        ("fourth-operator", "synth-tail-weak"),
    ] {
        assert_eq!(reg.get(alias).unwrap().tag(), tag);
    }
}

#[test]
fn zero_samples_give_an_empty_passing_report() {
    let reg = LemmaRegistry::builtin();
    let report = run_campaign(&reg, &small("first-operator", 0, 1)).unwrap();
    assert_eq!(report.total, 0);
    assert!(report.rows.is_empty());
    assert_eq!(report.status, "PASS");
    assert_eq!(report.exit_code(), 0);
}

#[test]
fn reports_are_byte_identical_across_runs_and_thread_counts() {
    let reg = LemmaRegistry::builtin();
    for tag in ["check-order", "synth-head-weak", "decompose", "monotone-probe"] {
        let mut a = small(tag, 12, 99);
        a.threads = Some(1);
        let mut b = a.clone();
        b.threads = Some(4);
        let (ra, rb) = (run_campaign(&reg, &a).unwrap(), run_campaign(&reg, &b).unwrap());
        assert_eq!(ra.to_json(), rb.to_json(), "{tag}");
        assert_eq!(ra.to_csv().unwrap(), rb.to_csv().unwrap(), "{tag}");
    }
}

#[test]
fn different_seeds_give_different_instances() {
    let reg = LemmaRegistry::builtin();
    let a = run_campaign(&reg, &small("rearrange", 8, 1)).unwrap();
    let b = run_campaign(&reg, &small("rearrange", 8, 2)).unwrap();
    assert_ne!(a.to_csv().unwrap(), b.to_csv().unwrap());
}

#[test]
fn csv_has_fixed_columns_then_observed_constants() {
    let reg = LemmaRegistry::builtin();
    let report = run_campaign(&reg, &small("lp-contraction", 2, 5)).unwrap();
    let csv = report.to_csv().unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "id,variant,status,max ratio");
    assert_eq!(lines.count(), report.total);
}

#[test]
fn explicit_exponents_and_unknown_lemmas() {
    let reg = LemmaRegistry::builtin();
    let mut p = small("synth-tail-eq", 3, 4);
    p.exponents = Some(vec![rat::frac(3, 2)]);
    let report = run_campaign(&reg, &p).unwrap();
    assert_eq!(report.exponents, vec!["3/2"]);
    assert_eq!(report.total, 3);
    assert_eq!(report.status, "PASS");

    let err = run_campaign(&reg, &small("no-such-lemma", 1, 0)).unwrap_err();
    assert!(matches!(err, Error::Invalid(ref m) if m.contains("rearrange")), "{err}");
}

fn generated(reg: &LemmaRegistry, tag: &str, id: u64) -> Instance {
    let lemma = reg.get(tag).unwrap();
    let variant = lemma.variants(&lemma.default_exponents()).unwrap().remove(0);
    let data = lemma.generate(&mut instance_rng(3, id), &variant, lemma.default_size()).unwrap();
    Instance { lemma: tag.to_string(), variant, data }
}

#[test]
fn replay_of_a_generated_instance_passes() {
    let reg = LemmaRegistry::builtin();
    let inst = generated(&reg, "synth-head-eq", 0);
    let text = serde_json::to_string(&inst).unwrap();
    let v = replay(&reg, &parse_instance(&text).unwrap()).unwrap();
    assert_eq!(v.verdict, VerdictKind::Pass, "{v:?}");
    assert_eq!(v.exit_code(), 0);
}

#[test]
fn replay_of_the_plateau_family_fails_for_linf() {
    let reg = LemmaRegistry::builtin();
    let inst = spike_plateau_family("linf", &OrderKind::new(OrderTag::TailWeak, rat::one()), None).unwrap();
    let v = replay(&reg, &inst).unwrap();
    assert_eq!(v.verdict, VerdictKind::Fail, "{v:?}");
    assert_eq!(v.exit_code(), 1);
}

#[test]
fn replay_with_inflated_g_is_a_precondition_violation() {
    let reg = LemmaRegistry::builtin();
    let mut inst = (0..)
        .map(|id| generated(&reg, "synth-tail-weak", id))
        .find(|i| !serde_json::from_value::<StepFunction>(i.data["g"].clone()).unwrap().is_zero())
        .unwrap();
    let g: StepFunction = serde_json::from_value(inst.data["g"].clone()).unwrap();
    inst.data["g"] = serde_json::to_value(g.scale(&rat::int(1 << 20))).unwrap();
    let v = replay(&reg, &inst).unwrap();
    assert_eq!(v.verdict, VerdictKind::Precondition, "{v:?}");
    assert_eq!(v.exit_code(), 2);
}

#[test]
fn malformed_instances_report_their_position() {
    let err = parse_instance("{\n  \"lemma\": \"rearrange\",\n  \"variant\": [\n}").unwrap_err();
    assert!(matches!(err, Error::Parse(ref m) if m.contains("line 4")), "{err}");

    let reg = LemmaRegistry::builtin();
    let mut inst = generated(&reg, "rearrange", 0);
    inst.data = serde_json::json!({"nonsense": true});
    assert_eq!(replay(&reg, &inst).unwrap().verdict, VerdictKind::Error);
}

#[test]
fn failing_rows_carry_a_replayable_instance() {
    let reg = LemmaRegistry::builtin();
    let mut p = small("monotone-probe", 6, 8);
    p.exponents = Some(vec![rat::one()]);
    let report = run_campaign(&reg, &p).unwrap();
    for row in report.rows.iter().filter(|r| r.status != Status::Pass) {
        let inst = row.instance.as_ref().expect("non-pass rows embed their instance");
        let v = replay(&reg, inst).unwrap();
        assert_ne!(v.verdict, VerdictKind::Pass);
    }
    assert!(report.rows.iter().filter(|r| r.status == Status::Pass).all(|r| r.instance.is_none()));
}
