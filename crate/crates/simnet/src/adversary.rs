//! Scripted network attacker acting on open hops only.

use std::fmt;

use crate::error::SimError;
use crate::topology::{Hop, Topology};

/// Frame types carried by the simulated network.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MsgKind {
    RegReq,
    RegFwd,
    RegReceipt,
    RegRep,
    Req,
    Rep,
    Ack,
    Upd,
}

impl MsgKind {
    pub const ALL: [MsgKind; 8] = [
        Self::RegReq,
        Self::RegFwd,
        Self::RegReceipt,
        Self::RegRep,
        Self::Req,
        Self::Rep,
        Self::Ack,
        Self::Upd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::RegReq => "REG_REQ",
            Self::RegFwd => "REG_FWD",
            Self::RegReceipt => "REG_RECEIPT",
            Self::RegRep => "REG_REP",
            Self::Req => "REQ",
            Self::Rep => "REP",
            Self::Ack => "ACK",
            Self::Upd => "UPD",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for MsgKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which matching frames an action applies to, counted per action from 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Nth {
    Every,
    Only(u32),
}

impl Nth {
    pub fn hits(self, count: u32) -> bool {
        match self {
            Self::Every => true,
            Self::Only(n) => n == count,
        }
    }
}

/// What an injected frame contains.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Payload {
    Bytes(Vec<u8>),
    /// `count` well-formed requests with random `m`, `A` and `S1`, stamped with the
    /// current time. With `reuse_pid`, the pseudonym of the first request captured
    /// on the hop is reused.
    ForgedRequests { count: u32, spacing_ms: u64, reuse_pid: bool },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Action {
    /// Eavesdrop: record a copy.
    Capture { hop: Hop, kind: MsgKind, nth: Nth },
    /// Deliver an extra copy `delay_ms` later, to `redirect` if set.
    Replay { hop: Hop, kind: MsgKind, nth: Nth, delay_ms: u64, redirect: Option<String> },
    /// XOR one byte of the payload.
    Tamper { hop: Hop, kind: MsgKind, nth: Nth, offset: usize, xor: u8 },
    Drop { hop: Hop, kind: MsgKind, nth: Nth },
    /// Send fabricated frames into `hop` at `at_ms`, spoofing `hop.from`.
    Inject { hop: Hop, kind: MsgKind, at_ms: u64, payload: Payload },
    /// Hold the first matching frame and swap payloads with the second, so each
    /// session receives the other's message.
    Splice { hop: Hop, kind: MsgKind },
}

impl Action {
    pub fn hop(&self) -> &Hop {
        match self {
            Self::Capture { hop, .. }
            | Self::Replay { hop, .. }
            | Self::Tamper { hop, .. }
            | Self::Drop { hop, .. }
            | Self::Inject { hop, .. }
            | Self::Splice { hop, .. } => hop,
        }
    }

    pub fn kind(&self) -> MsgKind {
        match self {
            Self::Capture { kind, .. }
            | Self::Replay { kind, .. }
            | Self::Tamper { kind, .. }
            | Self::Drop { kind, .. }
            | Self::Inject { kind, .. }
            | Self::Splice { kind, .. } => *kind,
        }
    }

    pub fn verb(&self) -> &'static str {
        match self {
            Self::Capture { .. } => "capture",
            Self::Replay { .. } => "replay",
            Self::Tamper { .. } => "tamper",
            Self::Drop { .. } => "drop",
            Self::Inject { .. } => "inject",
            Self::Splice { .. } => "splice",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AdversaryScript {
    pub actions: Vec<Action>,
}

impl AdversaryScript {
    pub fn push(&mut self, action: Action) -> &mut Self {
        self.actions.push(action);
        self
    }

    /// Every action must name an existing open hop; a script aimed at a secure
    /// link is an error rather than a silent no-op.
    pub fn validate(&self, topology: &Topology) -> Result<(), SimError> {
        for (index, action) in self.actions.iter().enumerate() {
            if !topology.is_open_hop(action.hop()) {
                return Err(SimError::SecureLinkTargeted { index, link: action.hop().to_string() });
            }
            if let Action::Replay { redirect: Some(to), .. } = action {
                if topology.node(to).is_none() {
                    return Err(SimError::UnknownNode(to.clone()));
                }
            }
        }
        Ok(())
    }
}
