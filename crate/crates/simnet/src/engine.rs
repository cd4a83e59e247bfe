//! Single-threaded discrete-event execution of a [`Scenario`] in virtual time.
//!
//! Two seeded streams drive everything: one for the actors' cryptographic
//! randomness and one for link jitter and loss. Containers that are iterated
//! are ordered, so a seed fully determines the transcript.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::fmt;

use handover_core::actors::{
    audit_frame_claim, lea_init, rotate_group_key, rsm_init, rsu_init, Directory, Event, FrameClaim, Lea, LeaReceipt, Rsm,
    Rsu, SessionId, Vehicle, VnSession,
};
use handover_core::crypto::pke::Signature;
use handover_core::ledger::{Ledger, TxId};
use handover_core::wire::{AuthAck, AuthReply, AuthRequest, Pid, RegistrationEnvelope, Timestamp, UpdateMsg};
use handover_core::{GroupPoint, Scalar};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::adversary::{Action, MsgKind, Payload};
use crate::error::SimError;
use crate::scenario::{Scenario, StepAction};
use crate::topology::{Hop, NodeKind};

/// Upper bound on processed queue items; a runaway script is a bug, not a workload.
const MAX_ITEMS: usize = 1_000_000;
const NET_STREAM: u64 = 0x6e65_7477_6f72_6b00;
pub const ADVERSARY: &str = "adversary";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Entry {
    /// A frame delivered across one hop, as the receiver saw it.
    Msg { t_ms: u64, hop: Hop, kind: MsgKind, tag: u64, bytes: Vec<u8> },
    Event(Event),
}

impl fmt::Display for Entry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Msg { t_ms, hop, kind, tag, bytes } => {
                write!(f, "t={t_ms} msg hop={hop} kind={kind} tag={tag} len={} hex={}", bytes.len(), hex::encode(bytes))
            }
            Self::Event(e) => e.fmt(f),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transcript {
    pub seed: u64,
    pub entries: Vec<Entry>,
}

impl Transcript {
    pub fn render(&self) -> String {
        let mut out = format!("seed={}\n", self.seed);
        for e in &self.entries {
            out.push_str(&e.to_string());
            out.push('\n');
        }
        out
    }

    pub fn events(&self) -> impl DoubleEndedIterator<Item = &Event> {
        self.entries.iter().filter_map(|e| match e {
            Entry::Event(ev) => Some(ev),
            Entry::Msg { .. } => None,
        })
    }

    /// Frames of `kind` delivered to their final hop.
    pub fn messages(&self, kind: MsgKind) -> impl Iterator<Item = (&Hop, &[u8])> {
        self.entries.iter().filter_map(move |e| match e {
            Entry::Msg { hop, kind: k, bytes, .. } if *k == kind => Some((hop, bytes.as_slice())),
            _ => None,
        })
    }

    pub fn count(&self, actor: &str, event: &str, outcome: &str) -> usize {
        self.events().filter(|e| e.actor == actor && e.event == event && e.outcome == outcome).count()
    }

    /// Occurrences of `(event, outcome)` at any actor.
    pub fn count_any(&self, event: &str, outcome: &str) -> usize {
        self.events().filter(|e| e.event == event && e.outcome == outcome).count()
    }
}

/// Error names without spaces, e.g. `Malformed(OffCurvePoint)`.
fn outcome_of(e: &impl fmt::Debug) -> String {
    format!("{e:?}").replace(' ', "")
}

#[derive(Clone, Debug)]
struct Frame {
    src: String,
    dst: String,
    kind: MsgKind,
    tag: u64,
    bytes: Vec<u8>,
    path: Vec<String>,
    /// Index in `path` of the node currently holding the frame.
    at: usize,
    /// Adversary-originated copies are not intercepted again.
    forged: bool,
}

impl Frame {
    fn hop(&self) -> Hop {
        Hop { from: self.path[self.at].clone(), to: self.path[self.at + 1].clone() }
    }
}

enum Item {
    Step(StepAction),
    Arrive(Frame),
    Forward(Frame),
    Inject { action: usize, remaining: u32 },
}

struct Queued {
    at: u64,
    seq: u64,
    item: Item,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        (self.at, self.seq) == (other.at, other.seq)
    }
}
impl Eq for Queued {}
impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Queued {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        (other.at, other.seq).cmp(&(self.at, self.seq))
    }
}

struct VnState {
    vehicle: Vehicle,
    home: String,
    pool: usize,
    pending_reg: Option<handover_core::actors::PendingRegistration>,
    session: Option<(String, VnSession)>,
}

#[derive(Default)]
struct AdversaryState {
    matched: Vec<u32>,
    captured: Vec<Vec<Vec<u8>>>,
    held: Vec<Option<Frame>>,
    /// Last pseudonym seen in any request on an open hop.
    overheard_pid: Option<Pid>,
}

struct Sim<'a> {
    sc: &'a Scenario,
    now: u64,
    seq: u64,
    processed: usize,
    queue: BinaryHeap<Queued>,
    rng: ChaCha20Rng,
    net: ChaCha20Rng,
    ledger: Ledger,
    lea: Lea,
    lea_name: String,
    directory: Directory,
    rsms: BTreeMap<String, Rsm>,
    rsus: BTreeMap<String, Rsu>,
    vns: BTreeMap<String, VnState>,
    reg_origin: BTreeMap<(String, u64), String>,
    next_reg_tag: u64,
    owners: BTreeMap<(String, SessionId), String>,
    last_req: BTreeMap<(String, String), AuthRequest>,
    adv: AdversaryState,
    entries: Vec<Entry>,
}

/// Runs `scenario` to quiescence under `scenario.seed`.
///
/// Fails with [`SimError::DeadlockDetected`] when the queue drains with any
/// expectation unmet; the transcript is attached to the error.
pub fn run_scenario(scenario: &Scenario) -> Result<Transcript, SimError> {
    scenario.validate()?;
    let mut sim = Sim::new(scenario);
    sim.run();
    let transcript = Transcript { seed: scenario.seed, entries: std::mem::take(&mut sim.entries) };
    let unmet: Vec<String> = scenario
        .expectations
        .iter()
        .filter(|x| {
            let n = transcript.count(&x.actor, &x.event, &x.outcome);
            match x.count {
                Some(want) => n != want,
                None => n == 0,
            }
        })
        .map(|x| format!("{x} (saw {})", transcript.count(&x.actor, &x.event, &x.outcome)))
        .collect();
    if unmet.is_empty() {
        Ok(transcript)
    } else {
        Err(SimError::DeadlockDetected { unmet, transcript: Box::new(transcript) })
    }
}

fn encode_receipt(r: &LeaReceipt) -> Vec<u8> {
    let mut out = Vec::with_capacity(96);
    out.extend_from_slice(&r.txid);
    out.extend_from_slice(&r.sigma.0);
    out.extend_from_slice(&r.t_exp.to_be_bytes());
    out
}

fn decode_receipt(b: &[u8]) -> Option<LeaReceipt> {
    if b.len() != 96 {
        return None;
    }
    let txid: TxId = b[..32].try_into().ok()?;
    let sigma = Signature(b[32..88].try_into().ok()?);
    let t_exp = u64::from_be_bytes(b[88..].try_into().ok()?);
    Some(LeaReceipt { txid, sigma, t_exp })
}

impl<'a> Sim<'a> {
    fn new(sc: &'a Scenario) -> Self {
        let topo = &sc.topology;
        let mut rng = ChaCha20Rng::seed_from_u64(sc.seed);
        let net = ChaCha20Rng::seed_from_u64(sc.seed ^ NET_STREAM);
        let (ledger, registrar, revoker) = Ledger::genesis();
        let lea = lea_init(ledger.clone(), registrar, sc.config, &mut rng);
        let lea_name = topo.names_of(NodeKind::Lea).next().expect("validated").to_string();
        let mut rsms = BTreeMap::new();
        for name in topo.names_of(NodeKind::Rsm) {
            let spec = topo.node(name).expect("listed");
            rsms.insert(name.to_string(), rsm_init(&lea, name, revoker.clone(), spec.sync_ms));
        }
        let mut directory = Directory::default();
        let mut rsus = BTreeMap::new();
        for name in topo.names_of(NodeKind::Rsu) {
            let rsm = &rsms[topo.node(name).and_then(|n| n.domain.as_deref()).expect("validated")];
            let rsu = rsu_init(rsm, name, sc.config, &mut rng);
            directory.publish(name, rsu.verifying_key());
            rsus.insert(name.to_string(), rsu);
        }
        let mut vns = BTreeMap::new();
        for name in topo.names_of(NodeKind::Vn) {
            let spec = topo.node(name).expect("listed");
            vns.insert(
                name.to_string(),
                VnState {
                    vehicle: Vehicle::new(name.as_bytes().to_vec(), lea.params().clone(), sc.config),
                    home: spec.domain.clone().expect("validated"),
                    pool: spec.pool,
                    pending_reg: None,
                    session: None,
                },
            );
        }
        let n = sc.script.actions.len();
        let adv = AdversaryState {
            matched: vec![0; n],
            captured: vec![Vec::new(); n],
            held: vec![None; n],
            overheard_pid: None,
        };
        let mut sim = Self {
            sc,
            now: 0,
            seq: 0,
            processed: 0,
            queue: BinaryHeap::new(),
            rng,
            net,
            ledger,
            lea,
            lea_name,
            directory,
            rsms,
            rsus,
            vns,
            reg_origin: BTreeMap::new(),
            next_reg_tag: 1,
            owners: BTreeMap::new(),
            last_req: BTreeMap::new(),
            adv,
            entries: Vec::new(),
        };
        for step in &sc.steps {
            sim.schedule(step.at_ms, Item::Step(step.action.clone()));
        }
        for (i, a) in sc.script.actions.iter().enumerate() {
            if let Action::Inject { at_ms, payload, .. } = a {
                let remaining = match payload {
                    Payload::Bytes(_) => 1,
                    Payload::ForgedRequests { count, .. } => *count,
                };
                sim.schedule(*at_ms, Item::Inject { action: i, remaining });
            }
        }
        sim
    }

    fn schedule(&mut self, at: u64, item: Item) {
        self.seq += 1;
        self.queue.push(Queued { at, seq: self.seq, item });
    }

    fn event(&mut self, actor: &str, event: &str, outcome: impl fmt::Display) {
        self.entries.push(Entry::Event(Event {
            t_ms: self.now,
            actor: actor.to_string(),
            event: event.to_string(),
            outcome: outcome.to_string().replace(' ', "_"),
            micros: None,
        }));
    }

    fn run(&mut self) {
        while let Some(q) = self.queue.pop() {
            self.processed += 1;
            if self.processed > MAX_ITEMS {
                self.event("engine", "halt", "ItemLimit");
                break;
            }
            self.now = q.at;
            for rsm in self.rsms.values() {
                rsm.pump(self.now);
            }
            match q.item {
                Item::Step(s) => self.step(s),
                Item::Arrive(f) => self.arrive(f),
                Item::Forward(f) => self.transmit(f),
                Item::Inject { action, remaining } => self.inject(action, remaining),
            }
        }
    }

    fn send(&mut self, src: &str, dst: &str, kind: MsgKind, tag: u64, bytes: Vec<u8>) {
        let Some(path) = self.sc.topology.route(src, dst) else {
            self.event(src, "send", format!("NoRoute({dst})"));
            return;
        };
        let frame = Frame { src: src.into(), dst: dst.into(), kind, tag, bytes, path, at: 0, forged: false };
        self.transmit(frame);
    }

    fn link_delay(&mut self, hop: &Hop, jitter: bool) -> Option<u64> {
        let link = self.sc.topology.link(&hop.from, &hop.to)?;
        let extra = if jitter && link.jitter_ms > 0 { self.net.gen_range(0..=link.jitter_ms) } else { 0 };
        Some(link.latency_ms + extra)
    }

    /// Sends `frame` across its next hop, through the adversary and the link's loss model.
    fn transmit(&mut self, mut frame: Frame) {
        let hop = frame.hop();
        let Some(link) = self.sc.topology.link(&hop.from, &hop.to).cloned() else {
            self.event(&hop.from, "send", format!("NoLink({hop})"));
            return;
        };
        if !link.secure && !frame.forged {
            match self.intercept(frame) {
                Some(f) => frame = f,
                None => return,
            }
        }
        if link.drop > 0.0 && self.net.gen_bool(link.drop) {
            self.event(&hop.to, "link", format!("Lost({})", frame.kind));
            return;
        }
        let delay = self.link_delay(&hop, true).expect("link exists");
        frame.at += 1;
        self.schedule(self.now + delay, Item::Arrive(frame));
    }

    /// Applies every matching adversary action in script order; `None` when the
    /// frame is withheld.
    fn intercept(&mut self, mut frame: Frame) -> Option<Frame> {
        let hop = frame.hop();
        if frame.kind == MsgKind::Req {
            if let Ok(req) = AuthRequest::decode(&frame.bytes) {
                self.adv.overheard_pid = Some(req.pid);
            }
        }
        for (i, action) in self.sc.script.actions.iter().enumerate() {
            if action.hop() != &hop || action.kind() != frame.kind || matches!(action, Action::Inject { .. }) {
                continue;
            }
            self.adv.matched[i] += 1;
            let count = self.adv.matched[i];
            let verb = action.verb();
            match action {
                Action::Capture { nth, .. } if nth.hits(count) => {
                    self.adv.captured[i].push(frame.bytes.clone());
                    self.event(ADVERSARY, verb, frame.kind);
                }
                Action::Replay { nth, delay_ms, redirect, .. } if nth.hits(count) => {
                    let mut copy = frame.clone();
                    copy.forged = true;
                    let at = match redirect {
                        Some(to) => {
                            copy.dst = to.clone();
                            copy.path = vec![hop.from.clone(), to.clone()];
                            copy.at = 1;
                            self.now + delay_ms
                        }
                        None => {
                            copy.at += 1;
                            self.now + self.link_delay(&hop, false).unwrap_or(0) + delay_ms
                        }
                    };
                    self.event(ADVERSARY, verb, frame.kind);
                    self.schedule(at, Item::Arrive(copy));
                }
                Action::Tamper { nth, offset, xor, .. } if nth.hits(count) => {
                    if let Some(b) = frame.bytes.get_mut(*offset) {
                        *b ^= xor;
                        self.event(ADVERSARY, verb, format!("{}[{offset}]^{xor:02x}", frame.kind));
                    }
                }
                Action::Drop { nth, .. } if nth.hits(count) => {
                    self.event(ADVERSARY, verb, frame.kind);
                    return None;
                }
                Action::Splice { .. } => match self.adv.held[i].take() {
                    None if count == 1 => {
                        self.event(ADVERSARY, "hold", frame.kind);
                        self.adv.held[i] = Some(frame);
                        return None;
                    }
                    Some(mut first) => {
                        std::mem::swap(&mut first.bytes, &mut frame.bytes);
                        first.forged = true;
                        frame.forged = true;
                        self.event(ADVERSARY, verb, frame.kind);
                        self.transmit(first);
                    }
                    None => {}
                },
                _ => {}
            }
        }
        Some(frame)
    }

    fn inject(&mut self, action: usize, remaining: u32) {
        let Action::Inject { hop, kind, payload, .. } = &self.sc.script.actions[action] else { return };
        let bytes = match payload {
            Payload::Bytes(b) => b.clone(),
            Payload::ForgedRequests { spacing_ms, reuse_pid, .. } => {
                if remaining > 1 {
                    self.schedule(self.now + spacing_ms, Item::Inject { action, remaining: remaining - 1 });
                }
                let pid = match (reuse_pid, self.adv.overheard_pid) {
                    (true, Some(p)) => p,
                    _ => Pid(self.rng.gen()),
                };
                forge_request(&mut self.rng, pid, self.now).encode().to_vec()
            }
        };
        self.event(ADVERSARY, "inject", kind);
        let frame = Frame {
            src: hop.from.clone(),
            dst: hop.to.clone(),
            kind: *kind,
            tag: 0,
            bytes,
            path: vec![hop.from.clone(), hop.to.clone()],
            at: 0,
            forged: true,
        };
        self.transmit(frame);
    }

    fn arrive(&mut self, frame: Frame) {
        let hop = Hop { from: frame.path[frame.at - 1].clone(), to: frame.path[frame.at].clone() };
        self.entries.push(Entry::Msg {
            t_ms: self.now,
            hop: hop.clone(),
            kind: frame.kind,
            tag: frame.tag,
            bytes: frame.bytes.clone(),
        });
        if frame.at + 1 < frame.path.len() {
            let delay = self.sc.topology.node(&hop.to).map_or(0, |n| n.forward_ms);
            self.schedule(self.now + delay, Item::Forward(frame));
            return;
        }
        let here = hop.to;
        match (self.sc.topology.kind(&here), frame.kind) {
            (Some(NodeKind::Rsm), MsgKind::RegReq) => self.rsm_registration(&here, frame),
            (Some(NodeKind::Lea), MsgKind::RegFwd) => self.lea_registration(frame),
            (Some(NodeKind::Rsm), MsgKind::RegReceipt) => self.rsm_receipt(&here, frame),
            (Some(NodeKind::Vn), MsgKind::RegRep) => self.vn_registration(&here, frame),
            (Some(NodeKind::Rsu), MsgKind::Req) => self.rsu_request(&here, frame),
            (Some(NodeKind::Vn), MsgKind::Rep) => self.vn_reply(&here, frame),
            (Some(NodeKind::Rsu), MsgKind::Ack) => self.rsu_ack(&here, frame),
            (Some(NodeKind::Vn), MsgKind::Upd) => self.vn_update(&here, frame),
            _ => self.event(&here, "deliver", format!("Unexpected({})", frame.kind)),
        }
    }

    fn step(&mut self, step: StepAction) {
        match step {
            StepAction::Register { vn } => {
                let st = self.vns.get_mut(&vn).expect("validated");
                let (env, pending) = st.vehicle.begin_registration(&mut self.rng);
                st.pending_reg = Some(pending);
                let home = st.home.clone();
                self.event(&vn, "register", "Started");
                self.send(&vn, &home, MsgKind::RegReq, 0, env.encode());
            }
            StepAction::Handover { vn, rsu } => {
                let pk = self.directory.rsu_key_bytes(&rsu).expect("validated");
                let st = self.vns.get_mut(&vn).expect("validated");
                match st.vehicle.start_handover(&pk, self.now, &mut self.rng) {
                    Ok((req, session)) => {
                        st.session = Some((rsu.clone(), session));
                        self.event(&vn, "handover", "Started");
                        self.send(&vn, &rsu, MsgKind::Req, 0, req.encode().to_vec());
                    }
                    Err(e) => self.event(&vn, "handover", outcome_of(&e)),
                }
            }
            StepAction::Revoke { vn } => {
                let st = &self.vns[&vn];
                let Some(ch) = st.vehicle.credential().map(|c| *c.ch()) else {
                    self.event(&st.home.clone(), "revoke", "NotRegistered");
                    return;
                };
                let home = st.home.clone();
                match self.rsms[&home].revoke(ch, self.now) {
                    Ok(_) => self.event(&home, "revoke", "Posted"),
                    Err(e) => self.event(&home, "revoke", outcome_of(&e)),
                }
            }
            StepAction::Rotate => {
                let mut rsms: Vec<&mut Rsm> = self.rsms.values_mut().collect();
                let mut rsus: Vec<&mut Rsu> = self.rsus.values_mut().collect();
                let out = rotate_group_key(&mut self.lea, &mut rsms, &mut rsus, &mut self.rng);
                let lea = self.lea_name.clone();
                self.event(&lea, "rotate", format!("Epoch{}", out.epoch));
                for (rsu, sid, msg) in out.updates {
                    if let Some(vn) = self.owners.get(&(rsu.clone(), sid)).cloned() {
                        self.send(&rsu, &vn, MsgKind::Upd, sid, msg.encode().to_vec());
                    }
                }
            }
            StepAction::Sync => {
                for rsm in self.rsms.values() {
                    rsm.sync_all();
                }
            }
            StepAction::Report { vn, rsu } => self.report(&vn, &rsu),
        }
    }

    fn report(&mut self, vn: &str, rsu: &str) {
        let Some(req) = self.last_req.get(&(rsu.to_string(), vn.to_string())) else {
            self.event(rsu, "report", "NoRequest");
            return;
        };
        let evidence = self.rsus[rsu].report_malicious(req);
        self.event(rsu, "report", "Signed");
        let lea = self.lea_name.clone();
        match self.lea.trace(&evidence, &self.directory, self.now) {
            Ok(t) => {
                self.event(&lea, "trace", String::from_utf8_lossy(&t.id));
                let verdict = audit_frame_claim(
                    &self.lea.params().lea_sig_pk,
                    &self.directory,
                    &evidence,
                    &FrameClaim::from(&t),
                    &self.ledger,
                );
                match verdict {
                    Ok(v) => self.event("auditor", "audit", outcome_of(&v)),
                    Err(e) => self.event("auditor", "audit", outcome_of(&e)),
                }
            }
            Err(e) => self.event(&lea, "trace", outcome_of(&e)),
        }
    }

    fn rsm_registration(&mut self, rsm: &str, frame: Frame) {
        match RegistrationEnvelope::decode(&frame.bytes) {
            Ok(RegistrationEnvelope::Request { c1 }) => {
                let tag = self.next_reg_tag;
                self.next_reg_tag += 1;
                self.reg_origin.insert((rsm.to_string(), tag), frame.src);
                let lea = self.lea_name.clone();
                self.send(rsm, &lea, MsgKind::RegFwd, tag, c1);
            }
            Ok(_) => self.event(rsm, "register", "Unexpected"),
            Err(e) => self.event(rsm, "register", outcome_of(&e)),
        }
    }

    fn lea_registration(&mut self, frame: Frame) {
        let lea = self.lea_name.clone();
        match self.lea.register(&frame.bytes, self.now) {
            Ok(receipt) => {
                self.event(&lea, "register", "Posted");
                self.send(&lea, &frame.src, MsgKind::RegReceipt, frame.tag, encode_receipt(&receipt));
            }
            Err(e) => self.event(&lea, "register", outcome_of(&e)),
        }
    }

    fn rsm_receipt(&mut self, rsm: &str, frame: Frame) {
        let Some(vn) = self.reg_origin.remove(&(rsm.to_string(), frame.tag)) else {
            self.event(rsm, "register", "UnknownTag");
            return;
        };
        let Some(receipt) = decode_receipt(&frame.bytes) else {
            self.event(rsm, "register", "BadReceipt");
            return;
        };
        let reply = self.rsms[rsm].complete_registration(&receipt, &mut self.rng);
        self.send(rsm, &vn, MsgKind::RegRep, 0, RegistrationEnvelope::Reply(reply).encode());
    }

    fn vn_registration(&mut self, vn: &str, frame: Frame) {
        let reply = match RegistrationEnvelope::decode(&frame.bytes) {
            Ok(RegistrationEnvelope::Reply(r)) => r,
            Ok(_) => return self.event(vn, "register", "Unexpected"),
            Err(e) => return self.event(vn, "register", outcome_of(&e)),
        };
        let st = self.vns.get_mut(vn).expect("node exists");
        let Some(pending) = st.pending_reg.take() else {
            return self.event(vn, "register", "Ignored");
        };
        let pool = st.pool;
        let out = st.vehicle.finish_registration(pending, reply, &self.ledger, self.now).and_then(|()| st.vehicle.refill_pool(pool, &mut self.rng));
        match out {
            Ok(()) => self.event(vn, "register", "Registered"),
            Err(e) => self.event(vn, "register", outcome_of(&e)),
        }
    }

    fn rsu_request(&mut self, rsu: &str, frame: Frame) {
        if let Ok(req) = AuthRequest::decode(&frame.bytes) {
            self.last_req.insert((rsu.to_string(), frame.src.clone()), req);
        }
        let unit = self.rsus.get_mut(rsu).expect("node exists");
        match unit.handle_request_bytes(&frame.bytes, self.now, &mut self.rng) {
            Ok((sid, rep)) => {
                self.owners.insert((rsu.to_string(), sid), frame.src.clone());
                self.event(rsu, "handle_request", "Accepted");
                self.send(rsu, &frame.src, MsgKind::Rep, sid, rep.encode().to_vec());
            }
            Err(e) => self.event(rsu, "handle_request", outcome_of(&e)),
        }
    }

    fn vn_reply(&mut self, vn: &str, frame: Frame) {
        let Some(st) = self.vns.get_mut(vn) else { return };
        let Some((rsu, session)) = st.session.take() else {
            return self.event(vn, "handle_reply", "Ignored");
        };
        if rsu != frame.src {
            st.session = Some((rsu, session));
            return self.event(vn, "handle_reply", "Ignored");
        }
        let res = AuthReply::decode(&frame.bytes)
            .map_err(handover_core::actors::VnError::from)
            .and_then(|rep| st.vehicle.handle_reply(&session, &rep, self.now));
        match res {
            Ok(out) => {
                self.event(vn, "handle_reply", "Confirmed");
                self.send(vn, &rsu, MsgKind::Ack, frame.tag, out.ack.encode().to_vec());
            }
            Err(e) => {
                st.session = Some((rsu, session));
                self.event(vn, "handle_reply", outcome_of(&e));
            }
        }
    }

    fn rsu_ack(&mut self, rsu: &str, frame: Frame) {
        let unit = self.rsus.get_mut(rsu).expect("node exists");
        match AuthAck::decode(&frame.bytes).map_err(Into::into).and_then(|ack| unit.handle_ack(frame.tag, &ack)) {
            Ok(ks) => {
                self.event(rsu, "handle_ack", "Confirmed");
                let owner = self.owners.get(&(rsu.to_string(), frame.tag)).cloned();
                let agree = owner
                    .as_ref()
                    .and_then(|vn| self.vns.get(vn))
                    .and_then(|st| st.vehicle.last_session_key())
                    .is_some_and(|k| *k == ks);
                self.event(rsu, "key_agreement", if agree { "Match" } else { "Mismatch" });
            }
            Err(e) => self.event(rsu, "handle_ack", outcome_of(&e)),
        }
    }

    fn vn_update(&mut self, vn: &str, frame: Frame) {
        let sender = self.directory.rsu_key_bytes(&frame.src).map(|k| k.to_vec()).unwrap_or_default();
        let st = self.vns.get_mut(vn).expect("node exists");
        let res = UpdateMsg::decode(&frame.bytes)
            .map_err(handover_core::actors::VnError::from)
            .and_then(|u| st.vehicle.apply_update_from(&sender, &u));
        match res {
            Ok(()) => self.event(vn, "update", "Applied"),
            Err(e) => self.event(vn, "update", outcome_of(&e)),
        }
    }
}

/// A well-formed request built without any credential: random `m`, `A` and `S1`.
pub fn forge_request(rng: &mut (impl RngCore + rand::CryptoRng), pid: Pid, now_ms: u64) -> AuthRequest {
    let mut s1 = [0u8; 28];
    rng.fill_bytes(&mut s1);
    let m = Scalar::random(rng);
    let a = GroupPoint::mul_generator(&Scalar::random(rng));
    let a = if a.has_even_y() { a } else { -a };
    AuthRequest { pid, m, a: a.normalize(), s1, t1: Timestamp::from_ms(now_ms) }
}
