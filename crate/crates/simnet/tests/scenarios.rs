//! Canned scenarios end to end through the virtual-time engine.

use handover_simnet::{canned, run_scenario, MsgKind, Scenario, SimError};

fn run(name: &str) -> handover_simnet::Transcript {
    let sc = canned::load(name).unwrap().unwrap();
    match run_scenario(&sc) {
        Ok(t) => t,
        Err(SimError::DeadlockDetected { unmet, transcript }) => {
            panic!("{name}: unmet {unmet:?}\n{}", transcript.render())
        }
        Err(e) => panic!("{name}: {e}"),
    }
}

#[test]
fn every_canned_scenario_meets_its_expectations() {
    for name in canned::names() {
        run(name);
    }
}

#[test]
fn honest_run_ends_confirmed_on_both_sides_with_exact_sizes() {
    let t = run("honest");
    let tail: Vec<_> = t.events().rev().take(2).collect();
    assert_eq!(tail[1].event, "handle_ack");
    assert_eq!(tail[1].outcome, "Confirmed");
    assert_eq!(tail[0].outcome, "Match");
    for (kind, len) in [(MsgKind::Req, 104), (MsgKind::Rep, 88), (MsgKind::Ack, 20)] {
        let sizes: Vec<_> = t.messages(kind).map(|(_, b)| b.len()).collect();
        assert!(!sizes.is_empty());
        assert!(sizes.iter().all(|&n| n == len), "{kind}: {sizes:?}");
    }
}

#[test]
fn same_seed_gives_identical_transcripts_and_different_seeds_differ() {
    for name in canned::names() {
        let sc = canned::load(name).unwrap().unwrap();
        let a = run_scenario(&sc).unwrap().render();
        let b = run_scenario(&sc).unwrap().render();
        assert_eq!(a, b, "{name}");
        let c = run_scenario(&sc.clone().with_seed(sc.seed + 1)).unwrap().render();
        assert_ne!(a, c, "{name}");
    }
}

#[test]
fn replay_yields_exactly_one_replay_detection() {
    let t = run("replay");
    assert_eq!(t.count_any("handle_request", "ReplayDetected"), 1);
}

#[test]
fn unmet_expectation_is_a_deadlock_with_transcript() {
    let text = canned::text("honest").unwrap() + "\nexpect rsu-1 handle_ack Confirmed count=2\n";
    let sc = Scenario::parse(&text).unwrap();
    match run_scenario(&sc) {
        Err(SimError::DeadlockDetected { unmet, transcript }) => {
            assert_eq!(unmet.len(), 1);
            assert_eq!(transcript.count("rsu-1", "handle_ack", "Confirmed"), 1);
        }
        other => panic!("expected deadlock, got {other:?}"),
    }
}

#[test]
fn lossy_links_are_deterministic_and_can_stall_a_handover() {
    let text = canned::text("honest").unwrap().replace("link fog-1 rsu-1 open latency=1", "link fog-1 rsu-1 open latency=1 drop=1");
    let sc = Scenario::parse(&text).unwrap();
    let Err(SimError::DeadlockDetected { transcript, .. }) = run_scenario(&sc) else { panic!("lost REQ should stall") };
    assert_eq!(transcript.count("rsu-1", "link", "Lost(REQ)"), 1);
}

/// Byte-exact transcript of the honest scenario. Regenerate with `UPDATE_GOLDEN=1`.
#[test]
fn honest_transcript_matches_golden_file() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/honest.txt");
    let got = run("honest").render();
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(path, &got).unwrap();
    }
    let want = std::fs::read_to_string(path).expect("golden file present");
    assert_eq!(got, want);
}

mod properties {
    use handover_simnet::{canned, run_scenario, Scenario};
    use proptest::prelude::*;

    fn honest_with(extra: &str) -> Scenario {
        let mut text = canned::text("honest").unwrap();
        text.push_str(extra);
        Scenario::parse(&text).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn honest_handover_confirms_under_any_seed(seed in any::<u64>()) {
            let t = run_scenario(&honest_with("").with_seed(seed)).unwrap();
            prop_assert_eq!(t.count("rsu-1", "key_agreement", "Match"), 1);
            prop_assert_eq!(t.render(), run_scenario(&honest_with("").with_seed(seed)).unwrap().render());
        }

        #[test]
        fn any_flipped_request_byte_is_never_accepted(seed in any::<u64>(), offset in 0usize..104, xor in 1u8..=255) {
            let sc = Scenario::parse(&format!(
                "{}\nadversary tamper kind=REQ hop=vn-1>fog-1 offset={offset} xor={xor:#04x}\n",
                canned::text("honest").unwrap().lines().filter(|l| !l.starts_with("expect")).collect::<Vec<_>>().join("\n")
            )).unwrap().with_seed(seed);
            let t = run_scenario(&sc).unwrap();
            prop_assert_eq!(t.count("rsu-1", "handle_request", "Accepted"), 0);
            prop_assert_eq!(t.count_any("key_agreement", "Match"), 0);
        }
    }
}
