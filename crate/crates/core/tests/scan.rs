//! Manual diagnostics for layout calibration. Run with:
//! `cargo test -p crosscheck --test scan -- --ignored --nocapture`

use crosscheck::campaign::{generate_suite, run_suite, CampaignConfig};
use crosscheck::planners::PlannerKind;
use crosscheck::report::{mt_summarize, pair_records};
use crosscheck::scenario::ScenarioClass;
use crosscheck::testgen::CaseRole;
use std::collections::BTreeMap;

fn config(
    classes: Vec<ScenarioClass>,
    mt: Vec<ScenarioClass>,
    planner: PlannerKind,
) -> CampaignConfig {
    CampaignConfig {
        classes,
        mt_classes: mt,
        planner,
        jobs: 0,
        ..CampaignConfig::default()
    }
}

#[test]
#[ignore]
fn scan_class_a() {
    let cfg = config(vec![ScenarioClass::A], vec![], PlannerKind::Limited);
    let suite = generate_suite(&cfg).unwrap();
    let records = run_suite(&suite, &cfg).unwrap();
    let mut by_trigger: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for r in &records {
        let key = r.params.get("pedTrigger").unwrap().to_string();
        let entry = by_trigger.entry(key).or_default();
        entry.1 += 1;
        if r.is_failure() {
            entry.0 += 1;
        }
    }
    println!("class A failures by pedTrigger: {by_trigger:?}");
    let mut by_speed: BTreeMap<String, usize> = BTreeMap::new();
    let mut by_loc: BTreeMap<String, usize> = BTreeMap::new();
    for r in records.iter().filter(|r| r.is_failure()) {
        *by_speed
            .entry(r.params.get("pedSpeed").unwrap().to_string())
            .or_default() += 1;
        *by_loc
            .entry(r.params.get("pedLocation").unwrap().to_string())
            .or_default() += 1;
    }
    println!("failures by pedSpeed: {by_speed:?}, by pedLocation: {by_loc:?}");
    println!(
        "total: {}/81",
        records.iter().filter(|r| r.is_failure()).count()
    );
}

#[test]
#[ignore]
fn scan_class_b() {
    let cfg = config(vec![ScenarioClass::B], vec![], PlannerKind::Limited);
    let suite = generate_suite(&cfg).unwrap();
    let records = run_suite(&suite, &cfg).unwrap();
    let mut by_trigger: BTreeMap<String, usize> = BTreeMap::new();
    let mut by_env: BTreeMap<String, usize> = BTreeMap::new();
    for r in records.iter().filter(|r| r.is_failure()) {
        *by_trigger
            .entry(r.params.get("pedTrigger").unwrap().to_string())
            .or_default() += 1;
        *by_env
            .entry(format!(
                "tod={} rain={}",
                r.params.get("timeOfDay").unwrap(),
                r.params.get("rain").unwrap()
            ))
            .or_default() += 1;
    }
    println!(
        "class B total failures {}/216, by trigger {:?}, by env {:?}",
        records.iter().filter(|r| r.is_failure()).count(),
        by_trigger,
        by_env
    );
}

#[test]
#[ignore]
fn scan_class_c() {
    for planner in [
        PlannerKind::Oracle,
        PlannerKind::Limited,
        PlannerKind::Blind,
    ] {
        let cfg = config(vec![ScenarioClass::C], vec![], planner);
        let suite = generate_suite(&cfg).unwrap();
        let records = run_suite(&suite, &cfg).unwrap();
        let collisions = records.iter().filter(|r| r.is_failure()).count();
        let timeouts = records
            .iter()
            .filter(|r| r.verdict == crosscheck::Verdict::Timeout)
            .count();
        println!("class C {planner}: {collisions} collisions, {timeouts} timeouts / 36");
    }
}

#[test]
#[ignore]
fn scan_class_d() {
    for planner in [
        PlannerKind::Limited,
        PlannerKind::Blind,
        PlannerKind::Oracle,
    ] {
        let cfg = config(vec![ScenarioClass::D], vec![ScenarioClass::D], planner);
        let suite = generate_suite(&cfg).unwrap();
        let records = run_suite(&suite, &cfg).unwrap();
        let pairs = pair_records(&records).unwrap();
        let summary = mt_summarize(&pairs);
        let src_failures = records
            .iter()
            .filter(|r| r.role == CaseRole::Source && r.is_failure())
            .count();
        println!("== class D with {planner}: source failures {src_failures}/243");
        for s in &summary {
            println!(
                "   {}: pairs {} src {} fu {} violations {}",
                s.relation, s.pairs, s.source_failures, s.follow_up_failures, s.violations
            );
        }
        if planner == PlannerKind::Limited {
            for r in records.iter().filter(|r| r.is_failure()).take(40) {
                println!(
                    "   FAIL {} {:?} turn={} ls={} lt={} rs={} rt={} coll={:?}",
                    r.case_id,
                    r.role,
                    r.params.get("turnDirection").unwrap(),
                    r.params.get("leftSpeed").unwrap(),
                    r.params.get("leftTrigger").unwrap(),
                    r.params.get("rightSpeed").unwrap(),
                    r.params.get("rightTrigger").unwrap(),
                    r.collision.as_ref().map(|c| (&c.agents, c.time)),
                );
            }
        }
    }
}
