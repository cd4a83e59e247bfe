//! Declarative scenario files.
//!
//! One directive per line; `#` starts a comment. Positional words come first,
//! then `key=value` options:
//!
//! ```text
//! seed = 7
//! freshness_ms = 500
//! node lea kind=lea
//! node rsm-1 kind=rsm sync_ms=20
//! node rsu-1 kind=rsu domain=rsm-1
//! node vn-1 kind=vn home=rsm-1 pool=4
//! node fog-1 kind=fog forward_ms=1
//! link lea rsm-1 secure latency=2
//! link vn-1 fog-1 open latency=3 jitter=2 drop=0
//! step at=0 register vn-1
//! step at=100 handover vn-1 rsu-1
//! adversary replay kind=REQ hop=vn-1>fog-1 delay=5
//! expect rsu-1 handle_request ReplayDetected count=1
//! ```

use std::collections::BTreeMap;

use handover_core::actors::ProtocolConfig;

use crate::adversary::{Action, AdversaryScript, MsgKind, Nth, Payload};
use crate::error::SimError;
use crate::topology::{Hop, LinkSpec, NodeKind, NodeSpec, Topology};

pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepAction {
    Register { vn: String },
    Handover { vn: String, rsu: String },
    /// The vehicle's home RSM posts a revocation of its commitment.
    Revoke { vn: String },
    Rotate,
    /// Brings every RSM ledger view up to the head immediately.
    Sync,
    /// The RSU signs the last request it got from the vehicle; the LEA traces it
    /// and the claim is audited.
    Report { vn: String, rsu: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub at_ms: u64,
    pub action: StepAction,
}

/// Event count that must hold at the end of the run; `count: None` means at least one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expectation {
    pub actor: String,
    pub event: String,
    pub outcome: String,
    pub count: Option<usize>,
}

impl std::fmt::Display for Expectation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {} {}", self.actor, self.event, self.outcome)?;
        match self.count {
            Some(n) => write!(f, " count={n}"),
            None => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub seed: u64,
    pub config: ProtocolConfig,
    pub topology: Topology,
    pub steps: Vec<Step>,
    pub script: AdversaryScript,
    pub expectations: Vec<Expectation>,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            config: ProtocolConfig::default(),
            topology: Topology::default(),
            steps: Vec::new(),
            script: AdversaryScript::default(),
            expectations: Vec::new(),
        }
    }
}

impl Scenario {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn parse(text: &str) -> Result<Self, SimError> {
        let mut sc = Scenario::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            parse_line(&mut sc, line).map_err(|reason| SimError::Parse { line: i + 1, reason })?;
        }
        sc.validate()?;
        Ok(sc)
    }

    /// Topology, adversary and step references.
    pub fn validate(&self) -> Result<(), SimError> {
        self.topology.validate()?;
        self.script.validate(&self.topology)?;
        let want = |name: &str, kind: NodeKind| {
            if self.topology.kind(name) == Some(kind) {
                Ok(())
            } else {
                Err(SimError::UnknownNode(name.to_string()))
            }
        };
        for step in &self.steps {
            match &step.action {
                StepAction::Register { vn } | StepAction::Revoke { vn } => want(vn, NodeKind::Vn)?,
                StepAction::Handover { vn, rsu } | StepAction::Report { vn, rsu } => {
                    want(vn, NodeKind::Vn)?;
                    want(rsu, NodeKind::Rsu)?;
                    if self.topology.route(vn, rsu).is_none() {
                        return Err(SimError::Topology(format!("no route from {vn} to {rsu}")));
                    }
                }
                StepAction::Rotate | StepAction::Sync => {}
            }
        }
        Ok(())
    }
}

struct Words<'a> {
    positional: Vec<&'a str>,
    options: BTreeMap<&'a str, &'a str>,
}

impl<'a> Words<'a> {
    fn split(line: &'a str) -> Self {
        let mut positional = Vec::new();
        let mut options = BTreeMap::new();
        for w in line.split_whitespace() {
            match w.split_once('=') {
                Some((k, v)) if !k.is_empty() => {
                    options.insert(k, v);
                }
                _ => positional.push(w),
            }
        }
        Self { positional, options }
    }

    fn pos(&self, i: usize, what: &str) -> Result<&'a str, String> {
        self.positional.get(i).copied().ok_or_else(|| format!("missing {what}"))
    }

    fn opt<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, String> {
        match self.options.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| format!("bad value for {key}: {v}")),
        }
    }

    fn req<T: std::str::FromStr>(&self, key: &str) -> Result<T, String> {
        self.opt(key)?.ok_or_else(|| format!("missing {key}="))
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<(), String> {
        match self.options.keys().find(|k| !allowed.contains(k)) {
            Some(k) => Err(format!("unknown option {k}")),
            None => Ok(()),
        }
    }
}

fn parse_line(sc: &mut Scenario, line: &str) -> Result<(), String> {
    // `key = value` settings
    if let Some((k, v)) = line.split_once('=') {
        let k = k.trim();
        if !k.contains(char::is_whitespace) && !k.is_empty() && !v.trim().contains(char::is_whitespace) {
            let v = v.trim();
            let num = || v.parse::<u64>().map_err(|_| format!("bad value for {k}: {v}"));
            match k {
                "seed" => sc.seed = num()?,
                "freshness_ms" => {
                    let ms = u32::try_from(num()?).map_err(|_| "freshness_ms too large".to_string())?;
                    sc.config = ProtocolConfig { registration_ttl_ms: sc.config.registration_ttl_ms, ..ProtocolConfig::with_freshness(ms) };
                }
                "registration_ttl_ms" => sc.config.registration_ttl_ms = num()?,
                _ => return Err(format!("unknown setting {k}")),
            }
            return Ok(());
        }
    }
    let w = Words::split(line);
    match w.pos(0, "directive")? {
        "node" => parse_node(sc, &w),
        "link" => parse_link(sc, &w),
        "step" => parse_step(sc, &w),
        "adversary" => parse_adversary(sc, &w),
        "expect" => {
            w.check_keys(&["count"])?;
            sc.expectations.push(Expectation {
                actor: w.pos(1, "actor")?.to_string(),
                event: w.pos(2, "event")?.to_string(),
                outcome: w.pos(3, "outcome")?.to_string(),
                count: w.opt("count")?,
            });
            Ok(())
        }
        other => Err(format!("unknown directive {other}")),
    }
}

fn parse_node(sc: &mut Scenario, w: &Words) -> Result<(), String> {
    w.check_keys(&["kind", "domain", "home", "sync_ms", "forward_ms", "pool"])?;
    let name = w.pos(1, "node name")?;
    let kind_s: String = w.req("kind")?;
    let kind = NodeKind::parse(&kind_s).ok_or_else(|| format!("unknown node kind {kind_s}"))?;
    if sc.topology.nodes.contains_key(name) {
        return Err(format!("duplicate node {name}"));
    }
    let mut node = NodeSpec::new(name, kind);
    node.domain = w.opt::<String>("domain")?.or(w.opt("home")?);
    node.sync_ms = w.opt("sync_ms")?.unwrap_or(0);
    node.forward_ms = w.opt("forward_ms")?.unwrap_or(0);
    node.pool = w.opt("pool")?.unwrap_or(node.pool);
    sc.topology.add_node(node);
    Ok(())
}

fn parse_link(sc: &mut Scenario, w: &Words) -> Result<(), String> {
    w.check_keys(&["latency", "jitter", "drop"])?;
    let secure = match w.pos(3, "secure|open")? {
        "secure" => true,
        "open" => false,
        other => return Err(format!("expected secure or open, got {other}")),
    };
    let mut link = LinkSpec::new(w.pos(1, "endpoint")?, w.pos(2, "endpoint")?, secure, w.opt("latency")?.unwrap_or(1));
    link.jitter_ms = w.opt("jitter")?.unwrap_or(0);
    link.drop = w.opt("drop")?.unwrap_or(0.0);
    sc.topology.add_link(link);
    Ok(())
}

fn parse_step(sc: &mut Scenario, w: &Words) -> Result<(), String> {
    w.check_keys(&["at"])?;
    let at_ms = w.req("at")?;
    let name = |i| w.pos(i, "node name").map(str::to_string);
    let action = match w.pos(1, "step kind")? {
        "register" => StepAction::Register { vn: name(2)? },
        "handover" => StepAction::Handover { vn: name(2)?, rsu: name(3)? },
        "revoke" => StepAction::Revoke { vn: name(2)? },
        "rotate" => StepAction::Rotate,
        "sync" => StepAction::Sync,
        "report" => StepAction::Report { vn: name(2)?, rsu: name(3)? },
        other => return Err(format!("unknown step {other}")),
    };
    sc.steps.push(Step { at_ms, action });
    Ok(())
}

fn parse_adversary(sc: &mut Scenario, w: &Words) -> Result<(), String> {
    let verb = w.pos(1, "adversary verb")?;
    let kind_s: String = w.req("kind")?;
    let kind = MsgKind::parse(&kind_s).ok_or_else(|| format!("unknown message kind {kind_s}"))?;
    let hop_s: String = w.req("hop")?;
    let hop = Hop::parse(&hop_s).ok_or_else(|| format!("hop must be from>to, got {hop_s}"))?;
    let nth = match w.options.get("nth") {
        None => Nth::Only(1),
        Some(&"every") => Nth::Every,
        Some(v) => Nth::Only(v.parse().map_err(|_| format!("bad nth {v}"))?),
    };
    let action = match verb {
        "capture" => {
            w.check_keys(&["kind", "hop", "nth"])?;
            Action::Capture { hop, kind, nth }
        }
        "replay" => {
            w.check_keys(&["kind", "hop", "nth", "delay", "to"])?;
            Action::Replay { hop, kind, nth, delay_ms: w.opt("delay")?.unwrap_or(0), redirect: w.opt("to")? }
        }
        "tamper" => {
            w.check_keys(&["kind", "hop", "nth", "offset", "xor"])?;
            let xor_s: String = w.opt("xor")?.unwrap_or_else(|| "0x01".to_string());
            let xor = u8::from_str_radix(xor_s.trim_start_matches("0x"), 16).map_err(|_| format!("bad xor {xor_s}"))?;
            if xor == 0 {
                return Err("xor=0 would not change the frame".to_string());
            }
            Action::Tamper { hop, kind, nth, offset: w.req("offset")?, xor }
        }
        "drop" => {
            w.check_keys(&["kind", "hop", "nth"])?;
            Action::Drop { hop, kind, nth }
        }
        "inject" => {
            w.check_keys(&["kind", "hop", "at", "hex", "forge", "spacing", "reuse_pid"])?;
            let payload = match (w.opt::<String>("hex")?, w.opt::<u32>("forge")?) {
                (Some(h), None) => Payload::Bytes(hex::decode(&h).map_err(|e| format!("bad hex: {e}"))?),
                (None, Some(count)) => {
                    if kind != MsgKind::Req {
                        return Err("forge= only applies to kind=REQ".to_string());
                    }
                    Payload::ForgedRequests {
                        count,
                        spacing_ms: w.opt("spacing")?.unwrap_or(1),
                        reuse_pid: w.opt("reuse_pid")?.unwrap_or(false),
                    }
                }
                _ => return Err("inject needs exactly one of hex= or forge=".to_string()),
            };
            Action::Inject { hop, kind, at_ms: w.req("at")?, payload }
        }
        "splice" => {
            w.check_keys(&["kind", "hop"])?;
            Action::Splice { hop, kind }
        }
        other => return Err(format!("unknown adversary verb {other}")),
    };
    sc.script.push(action);
    Ok(())
}
