//! End-to-end acceptance checks, one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the summary lines stay in order.
//! Exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use handover_core::actors::params::CTX_S1;
use handover_core::actors::{audit_frame_claim, rotate_group_key, AuditVerdict, Directory, FrameClaim, RsuError, VnError};
use handover_core::crypto::symmetric::sym_encrypt;
use handover_core::wire::{AuthAck, AuthReply, AuthRequest, Pid, Timestamp, WireError, ACK_BYTES, REP_BYTES, REQ_BYTES};
use handover_core::{ch_collide, ch_commit, ch_keygen, msm2, scalar_mul, GroupPoint, NonZeroScalar, Scalar};
use handover_oracle as oracle;
use handover_simnet::bench::{bench_latency, bench_loss_ratio, bench_loss_series, BenchConfig, Fixture, LatencyConfig};
use handover_simnet::{canned, forge_request, run_scenario, MsgKind, SimError, Transcript};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

type Verdict = Result<String, String>;

/// Name, optional runtime budget, check.
type Criterion = (&'static str, Option<Duration>, fn() -> Verdict);

/// Virtual clock used for fixture handovers; registrations expire well after it.
const NOW_MS: u64 = 1_000_500;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn run_canned(name: &str, seed: Option<u64>) -> Result<Transcript, String> {
    let sc = canned::load(name).ok_or(format!("no scenario {name}"))?.map_err(|e| e.to_string())?;
    let sc = match seed {
        Some(s) => sc.with_seed(s),
        None => sc,
    };
    run_scenario(&sc).map_err(|e| match e {
        SimError::DeadlockDetected { unmet, .. } => format!("{name}: unmet {unmet:?}"),
        other => format!("{name}: {other}"),
    })
}

fn wire_sizes() -> Verdict {
    ensure((REQ_BYTES, REP_BYTES, ACK_BYTES) == (104, 88, 20), || "size constants".into())?;
    let mut fx = Fixture::new(1, 1);
    let pk = *fx.rsu.pk_bytes();
    let (req, session) = fx.vehicles[0].start_handover(&pk, NOW_MS, &mut fx.rng).map_err(|e| e.to_string())?;
    let (sid, rep) = fx.rsu.handle_request(&req, NOW_MS, &mut fx.rng).map_err(|e| e.to_string())?;
    let out = fx.vehicles[0].handle_reply(&session, &rep, NOW_MS).map_err(|e| e.to_string())?;
    fx.rsu.handle_ack(sid, &out.ack).map_err(|e| e.to_string())?;
    let encoded = [req.encode().len(), rep.encode().len(), out.ack.encode().len()];
    ensure(encoded == [104, 88, 20], || format!("encoded sizes {encoded:?}"))?;
    let t = run_canned("honest", None)?;
    for (kind, want) in [(MsgKind::Req, 104), (MsgKind::Rep, 88), (MsgKind::Ack, 20)] {
        let sizes: Vec<usize> = t.messages(kind).map(|(_, b)| b.len()).collect();
        ensure(!sizes.is_empty() && sizes.iter().all(|&n| n == want), || format!("{kind} on the wire {sizes:?}"))?;
    }
    Ok(format!("REQ {} + REP {} + ACK {} = {} bytes", encoded[0], encoded[1], encoded[2], encoded.iter().sum::<usize>()))
}

fn mutual_authentication() -> Verdict {
    const VEHICLES: usize = 50;
    const ROUNDS: usize = 20;
    let mut fx = Fixture::new(2, VEHICLES);
    let pk = *fx.rsu.pk_bytes();
    let mut agreed = 0;
    for round in 0..ROUNDS {
        for v in 0..VEHICLES {
            let now = NOW_MS + round as u64 * 10;
            let vn = &mut fx.vehicles[v];
            let (req, session) = vn.start_handover(&pk, now, &mut fx.rng).map_err(|e| format!("vn {v}: {e}"))?;
            let (sid, rep) = fx.rsu.handle_request(&req, now, &mut fx.rng).map_err(|e| format!("rsu {v}: {e}"))?;
            let out = vn.handle_reply(&session, &rep, now).map_err(|e| format!("vn {v}: {e}"))?;
            let ks = fx.rsu.handle_ack(sid, &out.ack).map_err(|e| format!("ack {v}: {e}"))?;
            if ks == out.ks {
                agreed += 1;
            }
        }
    }
    let n = VEHICLES * ROUNDS;
    ensure(agreed == n, || format!("{agreed}/{n} agreed"))?;
    Ok(format!("{agreed}/{n} handovers confirmed with equal session keys"))
}

fn chameleon_algebra() -> Verdict {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    for i in 0..10_000 {
        let kp = ch_keygen(&mut rng);
        let r = NonZeroScalar::random(&mut rng);
        let m = ch_collide(&kp.trapdoor, &r);
        ensure(ch_commit(&kp.key.y, &m, &r.get()) == kp.key.ch, || format!("collision {i}"))?;
        // m = k − α·γ·x with A = α·Y opens to CH under (m, γ, A)
        let alpha = NonZeroScalar::random(&mut rng).get();
        let a = kp.key.y.mul(&alpha);
        let gamma = NonZeroScalar::random(&mut rng).get();
        let m = *kp.trapdoor.k() - alpha * gamma * kp.trapdoor.x().get();
        ensure(msm2(&m, &gamma, &a) == kp.key.ch, || format!("blinded response {i}"))?;
    }
    let g = oracle::generator();
    for i in 0..1000 {
        let s = Scalar::random(&mut rng);
        let got = scalar_mul(&GroupPoint::generator(), &s)
            .to_affine()
            .map(|(x, y)| (oracle::from_be(&x.to_be_bytes()), oracle::from_be(&y.to_be_bytes())));
        ensure(got == oracle::mul(&g, &oracle::from_be(&s.to_be_bytes())), || format!("scalar_mul {i}"))?;
    }
    Ok("10^4 collisions, 10^4 blinded responses, 10^3 scalar_mul against double-and-add".into())
}

fn request_flip_ok(pos: usize, err: &RsuError) -> bool {
    match pos {
        0..=15 | 72..=99 => *err == RsuError::UnknownCredential,
        16..=43 => matches!(err, RsuError::UnknownCredential | RsuError::Malformed(WireError::NonCanonicalScalar)),
        44..=71 => matches!(err, RsuError::UnknownCredential | RsuError::Malformed(WireError::OffCurvePoint)),
        _ => matches!(err, RsuError::UnknownCredential | RsuError::StaleTimestamp),
    }
}

fn exhaustive_flips() -> Result<usize, String> {
    let mut fx = Fixture::new(4, 2);
    let pk = *fx.rsu.pk_bytes();
    let mut checked = 0;

    let (req, session) = fx.vehicles[0].start_handover(&pk, NOW_MS, &mut fx.rng).map_err(|e| e.to_string())?;
    let bytes = req.encode();
    for pos in 0..REQ_BYTES {
        for x in 1..=255u8 {
            let mut t = bytes;
            t[pos] ^= x;
            match fx.rsu.handle_request_bytes(&t, NOW_MS, &mut fx.rng) {
                Ok(_) => return Err(format!("REQ byte {pos} ^{x:#04x} accepted")),
                Err(e) if !request_flip_ok(pos, &e) => return Err(format!("REQ byte {pos} ^{x:#04x}: {e:?}")),
                Err(_) => checked += 1,
            }
        }
    }

    let (sid, rep) = fx.rsu.handle_request(&req, NOW_MS, &mut fx.rng).map_err(|e| e.to_string())?;
    let pid_before = fx.vehicles[0].credential().map(|c| c.pid());
    let rep_bytes = rep.encode();
    for pos in 0..REP_BYTES {
        for x in 1..=255u8 {
            let mut t = rep_bytes;
            t[pos] ^= x;
            let flipped = AuthReply::decode(&t).map_err(|e| e.to_string())?;
            match fx.vehicles[0].handle_reply(&session, &flipped, NOW_MS) {
                Ok(_) => return Err(format!("REP byte {pos} ^{x:#04x} accepted")),
                Err(VnError::BadKeyConfirm | VnError::StaleTimestamp) => checked += 1,
                Err(e) => return Err(format!("REP byte {pos} ^{x:#04x}: {e:?}")),
            }
        }
    }
    ensure(fx.vehicles[0].credential().map(|c| c.pid()) == pid_before, || "pseudonym changed by a bad REP".into())?;

    let out = fx.vehicles[0].handle_reply(&session, &rep, NOW_MS).map_err(|e| e.to_string())?;
    let ack_bytes = out.ack.encode();
    for pos in 0..ACK_BYTES {
        for x in 1..=255u8 {
            let mut t = ack_bytes;
            t[pos] ^= x;
            let flipped = AuthAck::decode(&t).map_err(|e| e.to_string())?;
            match fx.rsu.handle_ack(sid, &flipped) {
                Err(RsuError::BadAck) => checked += 1,
                other => return Err(format!("ACK byte {pos} ^{x:#04x}: {other:?}")),
            }
        }
    }
    fx.rsu.handle_ack(sid, &out.ack).map_err(|e| format!("untouched ACK: {e}"))?;
    Ok(checked)
}

/// Three forger profiles: no secrets at all, an overheard pseudonym, and a
/// compromised `D` without the trapdoor.
fn forged_requests(n: usize) -> Result<usize, String> {
    let mut fx = Fixture::new(5, 1);
    let cred = fx.vehicles[0].credential().ok_or("unregistered")?;
    let (pid, d) = (cred.pid(), cred.d().clone());
    let mut accepted = 0;
    for i in 0..n {
        let now = NOW_MS + (i / 50) as u64;
        let req = match i % 3 {
            0 => {
                let mut raw = [0u8; 16];
                fx.rng.fill_bytes(&mut raw);
                forge_request(&mut fx.rng, Pid(raw), now)
            }
            1 => forge_request(&mut fx.rng, pid, now),
            _ => {
                let beta = Scalar::random(&mut fx.rng);
                let s1: [u8; 28] = sym_encrypt(&d, &beta.to_be_bytes(), CTX_S1).try_into().expect("length preserving");
                let a = GroupPoint::mul_generator(&Scalar::random(&mut fx.rng));
                let a = if a.has_even_y() { a } else { -a };
                // S1 opens correctly; only the response m lacks the trapdoor
                AuthRequest { pid, m: Scalar::random(&mut fx.rng), a: a.normalize(), s1, t1: Timestamp::from_ms(now) }
            }
        };
        if fx.rsu.handle_request(&req, now, &mut fx.rng).is_ok() {
            accepted += 1;
        }
    }
    Ok(accepted)
}

fn attack_rejection() -> Verdict {
    let mut checks = Vec::new();
    for name in canned::ATTACKS {
        let t = run_canned(name, None)?;
        ensure(t.count_any("handle_request", "Accepted") <= t.count_any("handover", "Started"), || {
            format!("{name}: more requests accepted than handovers started")
        })?;
        checks.push(*name);
    }
    let flips = exhaustive_flips()?;
    let forged = 10_000;
    let accepted = forged_requests(forged)?;
    ensure(accepted == 0, || format!("{accepted}/{forged} forged requests accepted"))?;
    Ok(format!("{} scenarios, {flips} single-byte flips typed, 0/{forged} forgeries accepted", checks.len()))
}

fn cross_domain() -> Verdict {
    let t = run_canned("cross-domain", None)?;
    let req_sizes = |rsu: &str| -> Vec<usize> {
        t.messages(MsgKind::Req).filter(|(h, _)| h.to == rsu).map(|(_, b)| b.len()).collect()
    };
    let (home, foreign) = (req_sizes("rsu-1"), req_sizes("rsu-2"));
    ensure(!home.is_empty() && !foreign.is_empty(), || "missing requests in one domain".into())?;
    for kind in [MsgKind::Req, MsgKind::Rep, MsgKind::Ack] {
        let mut sizes: Vec<usize> = t.messages(kind).map(|(_, b)| b.len()).collect();
        sizes.dedup();
        ensure(sizes.len() == 1, || format!("{kind} sizes differ across domains: {sizes:?}"))?;
    }
    ensure(t.count("rsu-2", "key_agreement", "Match") == 1, || "no key agreement in the foreign domain".into())?;
    ensure(t.count_any("key_agreement", "Mismatch") == 0, || "key mismatch".into())?;
    Ok("registered at rsm-1, confirmed at rsu-2 after sync, sizes equal, Ks match".into())
}

fn revocation() -> Verdict {
    run_canned("revocation", None)?;
    let mut fx = Fixture::new(6, 3);
    let pk = *fx.rsu.pk_bytes();
    let mut sids = Vec::new();
    for (i, vn) in fx.vehicles.iter_mut().enumerate() {
        let now = NOW_MS + i as u64;
        let (req, session) = vn.start_handover(&pk, now, &mut fx.rng).map_err(|e| e.to_string())?;
        let (sid, rep) = fx.rsu.handle_request(&req, now, &mut fx.rng).map_err(|e| e.to_string())?;
        let out = vn.handle_reply(&session, &rep, now).map_err(|e| e.to_string())?;
        fx.rsu.handle_ack(sid, &out.ack).map_err(|e| e.to_string())?;
        sids.push(sid);
    }
    // vn-0 revoked, vn-1 follows the rotation, vn-2 misses its update
    let ch = *fx.vehicles[0].credential().ok_or("unregistered")?.ch();
    fx.rsm.revoke(ch, NOW_MS + 5).map_err(|e| e.to_string())?;
    let outcome = rotate_group_key(&mut fx.lea, &mut [&mut fx.rsm], &mut [&mut fx.rsu], &mut fx.rng);
    ensure(outcome.updates.iter().all(|(_, sid, _)| *sid != sids[0]), || "revoked vehicle got an update".into())?;
    let (_, _, upd) = outcome.updates.iter().find(|(_, sid, _)| *sid == sids[1]).ok_or("no update for vn-1")?;
    fx.vehicles[1].apply_update_from(&pk, upd).map_err(|e| e.to_string())?;
    let now = NOW_MS + 20;
    let mut results = Vec::new();
    for vn in fx.vehicles.iter_mut() {
        let (req, _) = vn.start_handover(&pk, now, &mut fx.rng).map_err(|e| e.to_string())?;
        results.push(fx.rsu.handle_request(&req, now, &mut fx.rng).map(|_| ()));
    }
    ensure(results[0] == Err(RsuError::UnknownCredential), || format!("revoked: {:?}", results[0]))?;
    ensure(results[1].is_ok(), || format!("updated: {:?}", results[1]))?;
    ensure(results[2] == Err(RsuError::UnknownCredential), || format!("missed update: {:?}", results[2]))?;
    Ok("revoked UnknownCredential, updated Accepted, missed update UnknownCredential".into())
}

fn trace_and_audit() -> Verdict {
    let t = run_canned("trace", None)?;
    ensure(t.count("lea", "trace", "vn-1") == 1, || "scenario trace".into())?;
    const N: usize = 4;
    let mut fx = Fixture::new(7, N);
    let pk = *fx.rsu.pk_bytes();
    let mut directory = Directory::default();
    directory.publish(fx.rsu.id(), fx.rsu.verifying_key());
    let lea_pk = fx.lea.params().lea_sig_pk;
    let mut framed = 0;
    for i in 0..N {
        let now = NOW_MS + i as u64;
        let (req, _) = fx.vehicles[i].start_handover(&pk, now, &mut fx.rng).map_err(|e| e.to_string())?;
        let evidence = fx.rsu.report_malicious(&req);
        let traced = fx.lea.trace(&evidence, &directory, now).map_err(|e| e.to_string())?;
        ensure(traced.id == fx.vehicles[i].id(), || format!("vehicle {i} traced to {:?}", traced.id))?;
        let claim = FrameClaim::from(&traced);
        let honest = audit_frame_claim(&lea_pk, &directory, &evidence, &claim, &fx.ledger).map_err(|e| e.to_string())?;
        ensure(honest == AuditVerdict::Consistent, || format!("vehicle {i} honest claim {honest:?}"))?;
        for (j, other) in fx.vehicles.iter().enumerate().filter(|(j, _)| *j != i) {
            let cred = other.credential().ok_or("unregistered")?;
            let sub = FrameClaim { id: other.id().to_vec(), txid: *cred.txid(), d_star: cred.d().clone() };
            let v = audit_frame_claim(&lea_pk, &directory, &evidence, &sub, &fx.ledger).map_err(|e| e.to_string())?;
            ensure(v == AuditVerdict::Framed, || format!("vehicle {i} claimed as {j}: {v:?}"))?;
            framed += 1;
        }
    }
    Ok(format!("{N} traces recovered, {N} Consistent, {framed} substitutions Framed"))
}

fn performance() -> Verdict {
    let lat = bench_latency(&LatencyConfig::default());
    let phase = |n: &str| lat.phase(n).map(|p| p.mean_ms).unwrap_or(f64::INFINITY);
    let (verify, build) = (phase("rsu_verify"), phase("vn_build"));
    println!("      rsu_verify mean {verify:.4} ms, vn_build mean {build:.4} ms, batch R^2 {:.5}", lat.batch_fit.r_squared);
    ensure(verify < 1.7, || format!("rsu_verify mean {verify:.4} ms"))?;
    ensure(build < 0.1, || format!("vn_build mean {build:.4} ms"))?;
    ensure(lat.batch_fit.r_squared > 0.99, || format!("batch R^2 {:.5}", lat.batch_fit.r_squared))?;

    let base = BenchConfig::default();
    let report = bench_loss_series(&[5000], &base);
    let row = &report.rows[0];
    let mut csv = Vec::new();
    report.write_csv(&mut csv).map_err(|e| e.to_string())?;
    let csv = String::from_utf8(csv).map_err(|e| e.to_string())?;
    let dir = std::path::Path::new(env!("CARGO_TARGET_TMPDIR"));
    std::fs::write(dir.join("loss.csv"), &csv).map_err(|e| e.to_string())?;
    println!(
        "      5000 req/s: loss {:.4} ({} workers, capacity {:.0} req/s)",
        row.loss_ratio(),
        report.workers,
        report.capacity_rps
    );
    let loss_note = if row.loss_ratio() == 0.0 {
        "loss 0 at 5000 req/s".to_string()
    } else {
        ensure(csv.contains("measured_capacity_req_per_s="), || "loss.csv lacks measured capacity".into())?;
        format!("loss {:.4} at 5000 req/s, capacity {:.0} req/s documented in loss.csv", row.loss_ratio(), report.capacity_rps)
    };

    let saturate = (report.capacity_rps * 10.0).min(200_000.0) as u32;
    let sat = bench_loss_ratio(&BenchConfig { rate_per_s: saturate, ..base });
    ensure(sat.loss_ratio() > 0.0, || format!("no loss at {saturate} req/s"))?;
    Ok(format!(
        "verify {verify:.3} ms, build {build:.4} ms, R^2 {:.4}, {loss_note}, loss {:.3} at {saturate} req/s",
        lat.batch_fit.r_squared,
        sat.loss_ratio()
    ))
}

fn determinism() -> Verdict {
    let mut n = 0;
    for name in canned::names() {
        for seed in [None, Some(0xdead_beef)] {
            let a = run_canned(name, seed)?.render();
            let b = run_canned(name, seed)?.render();
            ensure(a == b, || format!("{name} seed {seed:?} differs between runs"))?;
            n += 1;
        }
    }
    Ok(format!("{n} scenario runs byte-identical on repeat"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("wire sizes", Some(Duration::from_secs(1)), wire_sizes),
        ("mutual authentication and key agreement", Some(Duration::from_secs(10)), mutual_authentication),
        ("chameleon algebra", Some(Duration::from_secs(60)), chameleon_algebra),
        ("attack rejection", Some(Duration::from_secs(120)), attack_rejection),
        ("cross-domain handover", Some(Duration::from_secs(5)), cross_domain),
        ("revocation", Some(Duration::from_secs(5)), revocation),
        ("trace and audit", Some(Duration::from_secs(5)), trace_and_audit),
        ("performance", None, performance),
        ("determinism", Some(Duration::from_secs(5)), determinism),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let res = check();
        let took = start.elapsed();
        let res = match (res, budget) {
            (Ok(_), Some(b)) if took > b => Err(format!("took {took:.2?}, budget {b:?}")),
            (r, _) => r,
        };
        match res {
            Ok(detail) => println!("PASS {} {name}: {detail} [{took:.2?}]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why} [{took:.2?}]", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
