//! Length-preserving symmetric encryption and the pseudo-identity cipher.

use aes::cipher::{BlockDecrypt, BlockEncrypt, KeyInit};
use aes::Aes128;
use sha3::digest::{ExtendableOutput, Update, XofReader};
use sha3::Shake256;
use zeroize::Zeroize;

use super::group::Scalar;
use super::hash::SymKey;

/// Length of a pseudo-identity and of the `PD` block it encrypts.
pub const PID_LEN: usize = 16;

const STREAM_DOMAIN: &[u8] = b"handover-auth/v1/stream";
const PID_KEY_DOMAIN: &[u8] = b"handover-auth/v1/pid-key";

fn keystream(key: &[u8], context: &[u8]) -> impl XofReader {
    let mut h = Shake256::default();
    h.update(STREAM_DOMAIN);
    h.update(&(key.len() as u32).to_be_bytes());
    h.update(key);
    h.update(&(context.len() as u32).to_be_bytes());
    h.update(context);
    h.finalize_xof()
}

fn xor_stream(key: &[u8], data: &[u8], context: &[u8]) -> Vec<u8> {
    let mut out = vec![0u8; data.len()];
    keystream(key, context).read(&mut out);
    for (o, d) in out.iter_mut().zip(data) {
        *o ^= d;
    }
    out
}

/// `SEN_key(plaintext)`. Each key is used once per `context`, so no nonce is carried.
pub fn sym_encrypt(key: &SymKey, plaintext: &[u8], context: &[u8]) -> Vec<u8> {
    xor_stream(key.as_bytes(), plaintext, context)
}

/// `SDE_key(ciphertext)`.
pub fn sym_decrypt(key: &SymKey, ciphertext: &[u8], context: &[u8]) -> Vec<u8> {
    xor_stream(key.as_bytes(), ciphertext, context)
}

/// AES-128 keyed from the group secret `b`, encrypting a single `PD` block.
#[derive(Clone)]
pub struct PidCipher {
    aes: Aes128,
}

impl PidCipher {
    pub fn new(b: &Scalar) -> Self {
        let mut h = Shake256::default();
        h.update(PID_KEY_DOMAIN);
        h.update(&b.to_be_bytes());
        let mut key = [0u8; 16];
        h.finalize_xof().read(&mut key);
        let aes = Aes128::new(&key.into());
        key.zeroize();
        Self { aes }
    }

    pub fn encrypt(&self, pd: &[u8; PID_LEN]) -> [u8; PID_LEN] {
        let mut block = (*pd).into();
        self.aes.encrypt_block(&mut block);
        block.into()
    }

    pub fn decrypt(&self, pid: &[u8; PID_LEN]) -> [u8; PID_LEN] {
        let mut block = (*pid).into();
        self.aes.decrypt_block(&mut block);
        block.into()
    }
}

impl core::fmt::Debug for PidCipher {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str("PidCipher(..)")
    }
}

/// `pID = SEN_b(PD)`.
pub fn pid_encrypt(b: &Scalar, pd: &[u8; PID_LEN]) -> [u8; PID_LEN] {
    PidCipher::new(b).encrypt(pd)
}

/// `PD = SDE_b(pID)`.
pub fn pid_decrypt(b: &Scalar, pid: &[u8; PID_LEN]) -> [u8; PID_LEN] {
    PidCipher::new(b).decrypt(pid)
}
