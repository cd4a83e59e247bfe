//! Randomized invariants over the primitives, the codecs and the ledger.

use handover_core::crypto::hash::h2;
use handover_core::crypto::symmetric::{pid_decrypt, pid_encrypt, sym_decrypt, sym_encrypt};
use handover_core::ledger::{compute_txid, Ledger, LedgerPayload, LedgerView};
use handover_core::wire::{
    AuthAck, AuthReply, AuthRequest, Pid, RegistrationEnvelope, Timestamp, TranscriptLine, UpdateMsg,
};
use handover_core::crypto::pke::Signature;
use handover_core::{ch_collide, ch_commit, ch_keygen, msm2, GroupPoint, NonZeroScalar, Scalar, SymKey};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn rng_from(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trapdoor_collisions_open_to_the_commitment(seed in any::<u64>()) {
        let mut rng = rng_from(seed);
        let kp = ch_keygen(&mut rng);
        let r = NonZeroScalar::random(&mut rng);
        let m = ch_collide(&kp.trapdoor, &r);
        prop_assert_eq!(ch_commit(&kp.key.y, &m, &r.get()), kp.key.ch);
    }

    #[test]
    fn blinded_response_satisfies_commitment_identity(seed in any::<u64>()) {
        // m = k − (α·γ)·x with A = α·Y gives m·P + γ·A = CH
        let mut rng = rng_from(seed);
        let kp = ch_keygen(&mut rng);
        let alpha = NonZeroScalar::random(&mut rng).get();
        let a = kp.key.y.mul(&alpha);
        let beta = Scalar::random(&mut rng);
        let gamma = h2(&[7u8; 16], &beta, &a, &[1u8; 28], &SymKey::from_bytes([3; 20]), b"rsu", 42).get();
        let m = *kp.trapdoor.k() - alpha * gamma * kp.trapdoor.x().get();
        prop_assert_eq!(msm2(&m, &gamma, &a), kp.key.ch);
    }

    #[test]
    fn keystream_roundtrip_preserves_length(key in any::<[u8; 20]>(), data in proptest::collection::vec(any::<u8>(), 0..4096), ctx in any::<Vec<u8>>()) {
        let k = SymKey::from_bytes(key);
        let ct = sym_encrypt(&k, &data, &ctx);
        prop_assert_eq!(ct.len(), data.len());
        prop_assert_eq!(sym_decrypt(&k, &ct, &ctx), data);
    }

    #[test]
    fn pid_cipher_roundtrip(seed in any::<u64>(), pd in any::<[u8; 16]>()) {
        let b = Scalar::random(&mut rng_from(seed));
        prop_assert_eq!(pid_decrypt(&b, &pid_encrypt(&b, &pd)), pd);
    }

    #[test]
    fn decoding_arbitrary_bytes_never_panics(bytes in proptest::collection::vec(any::<u8>(), 0..200)) {
        let _ = AuthRequest::decode(&bytes);
        let _ = AuthReply::decode(&bytes);
        let _ = AuthAck::decode(&bytes);
        let _ = UpdateMsg::decode(&bytes);
        let _ = RegistrationEnvelope::decode(&bytes);
        let _ = TranscriptLine::parse(&String::from_utf8_lossy(&bytes));
    }

    #[test]
    fn requests_of_exact_length_decode_or_fail_typed(mut bytes in proptest::collection::vec(any::<u8>(), 104)) {
        bytes[16] &= 0x7f;
        match AuthRequest::decode(&bytes) {
            Ok(req) => prop_assert_eq!(&req.encode()[..], &bytes[..]),
            Err(e) => prop_assert!(matches!(
                e,
                handover_core::wire::WireError::OffCurvePoint | handover_core::wire::WireError::NonCanonicalScalar
            )),
        }
    }

    #[test]
    fn replies_and_acks_roundtrip(s2 in any::<[u8; 64]>(), s3 in any::<[u8; 20]>(), t2 in any::<u32>()) {
        let rep = AuthReply { s2, s3: handover_core::Digest(s3), t2: Timestamp(t2) };
        prop_assert_eq!(AuthReply::decode(&rep.encode()).unwrap(), rep);
        let ack = AuthAck { ack: handover_core::Digest(s3) };
        prop_assert_eq!(AuthAck::decode(&ack.encode()).unwrap(), ack);
    }

    #[test]
    fn freshness_is_symmetric_and_wraps(t in any::<u32>(), d in 0u32..2000) {
        let a = Timestamp(t);
        let b = Timestamp(t.wrapping_add(d));
        prop_assert_eq!(a.is_fresh(b, 500), d <= 500);
        prop_assert_eq!(b.is_fresh(a, 500), d <= 500);
    }

    #[test]
    fn ledger_is_append_only_and_content_addressed(ops in proptest::collection::vec((1u64..30, any::<bool>(), 0u8..=255), 1..25)) {
        let (ledger, registrar, revoker) = Ledger::genesis();
        let mut snapshots: Vec<Vec<_>> = Vec::new();
        for (i, (n, revoke, flip)) in ops.iter().enumerate() {
            let ch = GroupPoint::mul_generator(&Scalar::from_u64(*n));
            let now = i as u64 * 10;
            let payload = if *revoke {
                LedgerPayload::Revocation { ch }
            } else {
                LedgerPayload::Registration { sigma: Signature([*flip; 56]), ch, t_exp: now + 1000 }
            };
            let res = match payload {
                LedgerPayload::Revocation { ch } => ledger.append_revocation(&revoker, ch, now),
                p => ledger.append_registration(&registrar, p, now),
            };
            if let Ok(txid) = res {
                prop_assert!(ledger.verify_inclusion(&txid, &payload));
                prop_assert_eq!(compute_txid(&payload, ledger.height() - 1), txid);
                // any single-bit change of the payload breaks inclusion
                let tampered = match payload {
                    LedgerPayload::Registration { mut sigma, ch, t_exp } => {
                        sigma.0[usize::from(*flip) % 56] ^= 1 << (flip % 8);
                        LedgerPayload::Registration { sigma, ch, t_exp }
                    }
                    LedgerPayload::Revocation { ch } => LedgerPayload::Revocation { ch: -ch },
                };
                prop_assert!(!ledger.verify_inclusion(&txid, &tampered));
            }
            let now_log = ledger.entries_from(0);
            for old in &snapshots {
                prop_assert_eq!(&now_log[..old.len()], &old[..]);
            }
            for (h, tx) in now_log.iter().enumerate() {
                prop_assert_eq!(tx.height, h as u64);
            }
            snapshots.push(now_log);
        }
    }

    #[test]
    fn views_converge_after_quiescence(delays in proptest::collection::vec(0u64..500, 2..5), n in 1usize..20, seed in any::<u64>()) {
        let (ledger, registrar, revoker) = Ledger::genesis();
        let mut views: Vec<LedgerView> = delays.iter().enumerate().map(|(i, d)| LedgerView::new(format!("n{i}"), *d)).collect();
        let mut rng = rng_from(seed);
        for i in 0..n {
            let ch = GroupPoint::mul_generator(&Scalar::random(&mut rng));
            let now = i as u64 * 37;
            ledger.append_registration(&registrar, LedgerPayload::Registration { sigma: Signature([0; 56]), ch, t_exp: 1 << 40 }, now).unwrap();
            if i % 3 == 0 {
                ledger.append_revocation(&revoker, ch, now).unwrap();
            }
            for v in views.iter_mut() {
                v.pump(&ledger, now);
                // a view is always a prefix of the canonical log
                prop_assert_eq!(v.entries(), &ledger.entries_from(0)[..v.applied_height() as usize]);
            }
        }
        let quiet = n as u64 * 37 + 500;
        for v in views.iter_mut() {
            v.pump(&ledger, quiet);
        }
        let first = views[0].entries().to_vec();
        for v in &views {
            prop_assert_eq!(v.entries(), &first[..]);
            prop_assert_eq!(v.applied_height(), ledger.height());
        }
    }
}

#[test]
fn distinct_commitment_inputs_never_collide() {
    let mut rng = rng_from(99);
    let kp = ch_keygen(&mut rng);
    let mut seen = std::collections::HashSet::new();
    for _ in 0..10_000 {
        let m = Scalar::random(&mut rng);
        let r = Scalar::random(&mut rng);
        assert!(seen.insert(ch_commit(&kp.key.y, &m, &r).to_compressed()));
    }
}

#[test]
fn pid_values_are_16_bytes_and_injective() {
    let mut rng = rng_from(5);
    let b = Scalar::random(&mut rng);
    let mut seen = std::collections::HashSet::new();
    for i in 0u64..1000 {
        let mut pd = [0u8; 16];
        pd[..8].copy_from_slice(&i.to_be_bytes());
        assert!(seen.insert(Pid(pid_encrypt(&b, &pd))));
    }
}
