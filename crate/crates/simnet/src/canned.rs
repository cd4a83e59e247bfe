//! Built-in scenarios: the honest path and one per attacker capability.
//!
//! All share a two-domain topology. Vehicles reach RSUs through `fog-1`;
//! vehicle↔RSM registration links are secure unless a scenario opens them.

use crate::error::SimError;
use crate::scenario::Scenario;

fn base(open_registration: bool) -> String {
    let reg = if open_registration { "open" } else { "secure" };
    format!(
        "node lea kind=lea
node rsm-1 kind=rsm sync_ms=5
node rsm-2 kind=rsm sync_ms=20
node rsu-1 kind=rsu domain=rsm-1
node rsu-2 kind=rsu domain=rsm-2
node fog-1 kind=fog forward_ms=1
node vn-1 kind=vn home=rsm-1
node vn-2 kind=vn home=rsm-1
node vn-3 kind=vn home=rsm-2
link lea rsm-1 secure latency=2
link lea rsm-2 secure latency=2
link rsm-1 rsu-1 secure latency=1
link rsm-2 rsu-2 secure latency=1
link vn-1 rsm-1 {reg} latency=5
link vn-2 rsm-1 {reg} latency=5
link vn-3 rsm-2 {reg} latency=5
link vn-1 fog-1 open latency=2 jitter=2
link vn-2 fog-1 open latency=2 jitter=2
link vn-3 fog-1 open latency=2 jitter=2
link fog-1 rsu-1 open latency=1
link fog-1 rsu-2 open latency=1
"
    )
}

const HONEST: &str = "
step at=0 register vn-1
step at=100 handover vn-1 rsu-1
expect vn-1 register Registered count=1
expect rsu-1 handle_request Accepted count=1
expect vn-1 handle_reply Confirmed count=1
expect rsu-1 handle_ack Confirmed count=1
expect rsu-1 key_agreement Match count=1
";

const REPLAY: &str = "
step at=0 register vn-1
step at=100 handover vn-1 rsu-1
adversary replay kind=REQ hop=vn-1>fog-1 delay=5
expect rsu-1 handle_request Accepted count=1
expect rsu-1 handle_request ReplayDetected count=1
expect rsu-1 handle_ack Confirmed count=1
";

/// One flipped byte in each of `S1` of a REQ, `S3` of a REP and the ACK.
const TAMPER: &str = "
step at=0 register vn-1
step at=0 register vn-2
step at=0 register vn-3
step at=100 handover vn-1 rsu-1
step at=100 handover vn-2 rsu-1
step at=100 handover vn-3 rsu-1
adversary tamper kind=REQ hop=vn-1>fog-1 offset=80 xor=0x01
adversary tamper kind=REP hop=fog-1>vn-2 offset=70 xor=0x80
adversary tamper kind=ACK hop=vn-3>fog-1 offset=0 xor=0xff
expect rsu-1 handle_request UnknownCredential count=1
expect vn-2 handle_reply BadKeyConfirm count=1
expect rsu-1 handle_ack BadAck count=1
expect vn-3 handle_reply Confirmed count=1
expect rsu-1 handle_ack Confirmed count=0
";

/// Well-formed requests with no credential behind them, half reusing an overheard pseudonym.
const IMPERSONATE: &str = "
step at=0 register vn-1
step at=100 handover vn-1 rsu-1
adversary inject kind=REQ hop=fog-1>rsu-1 at=200 forge=50 spacing=1 reuse_pid=true
adversary inject kind=REQ hop=fog-1>rsu-1 at=200 forge=50 spacing=1
expect rsu-1 handle_request Accepted count=1
expect rsu-1 handle_request UnknownCredential count=100
";

/// ACKs of two concurrent sessions delivered to each other's session.
const SPLICE: &str = "
step at=0 register vn-1
step at=0 register vn-2
step at=100 handover vn-1 rsu-1
step at=100 handover vn-2 rsu-1
adversary splice kind=ACK hop=fog-1>rsu-1
expect vn-1 handle_reply Confirmed count=1
expect vn-2 handle_reply Confirmed count=1
expect rsu-1 handle_ack BadAck count=2
expect rsu-1 handle_ack Confirmed count=0
";

/// vn-1's registration reply redirected to vn-2, whose own request is in flight.
const REGISTRATION_REPLAY: &str = "
step at=0 register vn-1
step at=3 register vn-2
adversary replay kind=REG_REP hop=rsm-1>vn-1 to=vn-2 delay=0
expect vn-1 register Registered count=1
expect vn-2 register NotOnChain count=1
expect vn-2 register Ignored count=1
";

/// Registered through rsm-1, authenticated at rsu-2 of rsm-2 before and after
/// rsm-2's view catches up.
const CROSS_DOMAIN: &str = "
step at=0 register vn-1
step at=15 handover vn-1 rsu-2
step at=200 handover vn-1 rsu-2
step at=400 handover vn-1 rsu-1
expect rsu-2 handle_request UnknownCredential count=1
expect rsu-2 handle_ack Confirmed count=1
expect rsu-2 key_agreement Match count=1
expect rsu-1 key_agreement Match count=1
";

/// vn-1 revoked, vn-3 misses its update, vn-2 follows the rotation.
const REVOCATION: &str = "
step at=0 register vn-1
step at=0 register vn-2
step at=0 register vn-3
step at=100 handover vn-1 rsu-1
step at=100 handover vn-2 rsu-1
step at=100 handover vn-3 rsu-1
step at=200 revoke vn-1
step at=250 handover vn-1 rsu-1
step at=300 rotate
adversary drop kind=UPD hop=fog-1>vn-3
step at=400 handover vn-1 rsu-1
step at=400 handover vn-2 rsu-1
step at=400 handover vn-3 rsu-1
expect rsu-1 handle_request RevokedCredential count=1
expect vn-2 update Applied count=1
expect vn-3 update Applied count=0
expect vn-1 update Applied count=0
expect vn-2 handle_reply Confirmed count=2
expect vn-1 handle_reply Confirmed count=1
expect vn-3 handle_reply Confirmed count=1
expect rsu-1 handle_request UnknownCredential count=2
";

const TRACE: &str = "
step at=0 register vn-1
step at=0 register vn-2
step at=100 handover vn-2 rsu-1
step at=110 handover vn-1 rsu-1
step at=300 report vn-1 rsu-1
expect lea trace vn-1 count=1
expect auditor audit Consistent count=1
";

/// Registration, intra- and cross-domain handovers, then a rotation.
const DEMO: &str = "
step at=0 register vn-1
step at=0 register vn-3
step at=100 handover vn-1 rsu-1
step at=100 handover vn-3 rsu-2
step at=200 handover vn-1 rsu-2
step at=300 rotate
step at=400 handover vn-1 rsu-2
step at=400 handover vn-3 rsu-2
expect vn-1 handle_reply Confirmed count=3
expect vn-3 handle_reply Confirmed count=2
expect rsu-1 key_agreement Match count=1
expect rsu-2 key_agreement Match count=4
expect vn-1 update Applied count=1
";

/// `(name, open registration links, body)`.
const CANNED: &[(&str, bool, &str)] = &[
    ("honest", false, HONEST),
    ("demo", false, DEMO),
    ("replay", false, REPLAY),
    ("tamper", false, TAMPER),
    ("impersonate", false, IMPERSONATE),
    ("splice", false, SPLICE),
    ("registration-replay", true, REGISTRATION_REPLAY),
    ("cross-domain", false, CROSS_DOMAIN),
    ("revocation", false, REVOCATION),
    ("trace", false, TRACE),
];

/// Scenarios exercising one attacker capability each.
pub const ATTACKS: &[&str] = &["replay", "tamper", "impersonate", "splice", "registration-replay"];

pub fn names() -> impl Iterator<Item = &'static str> {
    CANNED.iter().map(|(n, _, _)| *n)
}

/// Full scenario text, topology included.
pub fn text(name: &str) -> Option<String> {
    CANNED.iter().find(|(n, _, _)| *n == name).map(|(_, open, body)| format!("{}{body}", base(*open)))
}

pub fn load(name: &str) -> Option<Result<Scenario, SimError>> {
    text(name).map(|t| Scenario::parse(&t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_canned_scenarios_parse() {
        for name in names() {
            load(name).unwrap().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        assert!(load("nope").is_none());
    }
}
