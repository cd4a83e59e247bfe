#![allow(dead_code)]

use handover_core::actors::{
    lea_init, rsm_init, rsu_init, Directory, Lea, ProtocolConfig, Rsm, Rsu, SessionId, Vehicle, VnError, VnSession,
};
use handover_core::ledger::Ledger;
use handover_core::wire::{AuthAck, AuthReply, AuthRequest, RegistrationEnvelope};
use handover_core::SymKey;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// One LEA, `domains` RSMs with one RSU each, all synced instantly.
pub struct World {
    pub rng: ChaCha20Rng,
    pub ledger: Ledger,
    pub lea: Lea,
    pub rsms: Vec<Rsm>,
    pub rsus: Vec<Rsu>,
    pub directory: Directory,
    pub config: ProtocolConfig,
    pub now: u64,
}

pub struct Exchange {
    pub req: AuthRequest,
    pub rep: AuthReply,
    pub ack: AuthAck,
    pub vn_ks: SymKey,
    pub rsu_ks: SymKey,
}

impl World {
    pub fn new(seed: u64, domains: usize) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let config = ProtocolConfig::default();
        let (ledger, registrar, revoker) = Ledger::genesis();
        let lea = lea_init(ledger.clone(), registrar, config, &mut rng);
        let mut directory = Directory::default();
        let mut rsms = Vec::new();
        let mut rsus = Vec::new();
        for d in 0..domains {
            let rsm = rsm_init(&lea, format!("rsm-{d}"), revoker.clone(), 0);
            let rsu = rsu_init(&rsm, format!("rsu-{d}"), config, &mut rng);
            directory.publish(rsu.id(), rsu.verifying_key());
            rsms.push(rsm);
            rsus.push(rsu);
        }
        Self { rng, ledger, lea, rsms, rsus, directory, config, now: 1_000_000 }
    }

    pub fn sync(&self) {
        for rsm in &self.rsms {
            rsm.sync_all();
        }
    }

    pub fn register(&mut self, id: &str, domain: usize) -> Vehicle {
        let mut vn = Vehicle::new(id.as_bytes().to_vec(), self.lea.params().clone(), self.config);
        let (env, pending) = vn.begin_registration(&mut self.rng);
        let RegistrationEnvelope::Request { c1 } = env else { unreachable!() };
        let reply = self.rsms[domain].handle_registration(&c1, &mut self.lea, self.now, &mut self.rng).unwrap();
        vn.finish_registration(pending, reply, &self.ledger, self.now).unwrap();
        vn.refill_pool(4, &mut self.rng).unwrap();
        self.sync();
        vn
    }

    pub fn start(&mut self, vn: &mut Vehicle, rsu: usize) -> Result<(AuthRequest, VnSession), VnError> {
        let pk = *self.rsus[rsu].pk_bytes();
        vn.start_handover(&pk, self.now, &mut self.rng)
    }

    /// A full honest exchange; panics on any rejection.
    pub fn handover(&mut self, vn: &mut Vehicle, rsu: usize) -> Exchange {
        self.now += 10;
        let (req, session) = self.start(vn, rsu).unwrap();
        let (sid, rep) = self.rsus[rsu].handle_request(&req, self.now, &mut self.rng).unwrap();
        let out = vn.handle_reply(&session, &rep, self.now).unwrap();
        let rsu_ks = self.rsus[rsu].handle_ack(sid, &out.ack).unwrap();
        Exchange { req, rep, ack: out.ack, vn_ks: out.ks, rsu_ks }
    }

    pub fn request_and_reply(&mut self, vn: &mut Vehicle, rsu: usize) -> (AuthRequest, VnSession, SessionId, AuthReply) {
        self.now += 10;
        let (req, session) = self.start(vn, rsu).unwrap();
        let (sid, rep) = self.rsus[rsu].handle_request(&req, self.now, &mut self.rng).unwrap();
        (req, session, sid, rep)
    }
}
