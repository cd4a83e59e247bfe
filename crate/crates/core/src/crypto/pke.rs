//! Signatures and public-key encryption.
//!
//! Signatures are deterministic ECDSA over P-224. Encryption is ephemeral
//! Diffie-Hellman over the same group followed by an XOF keystream and a
//! keyed-hash tag over `E ‖ body`.

use core::fmt;

use p224::ecdsa::signature::{Signer, Verifier};
use rand::{CryptoRng, RngCore};
use sha3::digest::{ExtendableOutput, Update, XofReader};
use sha3::Shake256;
use subtle::ConstantTimeEq;
use thiserror::Error;
use zeroize::{Zeroize, Zeroizing};

use super::group::{GroupPoint, NonZeroScalar, COMPRESSED_POINT_BYTES};

/// Encoded signature length (`r ‖ s`).
pub const SIGNATURE_BYTES: usize = 56;
/// Encoded public key length (SEC1 compressed).
pub const PUBLIC_KEY_BYTES: usize = COMPRESSED_POINT_BYTES;
/// Ciphertext expansion of [`aenc`].
pub const AENC_OVERHEAD: usize = COMPRESSED_POINT_BYTES + AENC_TAG_BYTES;

const AENC_TAG_BYTES: usize = 20;
const AENC_KDF_DOMAIN: &[u8] = b"handover-auth/v1/aenc-kdf";
const AENC_MAC_DOMAIN: &[u8] = b"handover-auth/v1/aenc-mac";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PkeError {
    #[error("ciphertext too short")]
    Truncated,
    #[error("ciphertext ephemeral key is not a curve point")]
    BadEphemeral,
    #[error("ciphertext integrity check failed")]
    Integrity,
    #[error("malformed public key")]
    BadPublicKey,
}

#[derive(Clone)]
pub struct SigningKey(p224::ecdsa::SigningKey);

#[derive(Clone, Copy, PartialEq, Eq)]
pub struct VerifyingKey(p224::ecdsa::VerifyingKey);

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Signature(pub [u8; SIGNATURE_BYTES]);

impl SigningKey {
    pub fn verifying_key(&self) -> VerifyingKey {
        VerifyingKey(*self.0.verifying_key())
    }

    pub fn sign(&self, msg: &[u8]) -> Signature {
        let sig: p224::ecdsa::Signature = self.0.sign(msg);
        let mut out = [0u8; SIGNATURE_BYTES];
        out.copy_from_slice(&sig.to_bytes());
        Signature(out)
    }
}

impl fmt::Debug for SigningKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SigningKey(..)")
    }
}

impl VerifyingKey {
    pub fn to_bytes(&self) -> [u8; PUBLIC_KEY_BYTES] {
        let mut out = [0u8; PUBLIC_KEY_BYTES];
        out.copy_from_slice(self.0.to_encoded_point(true).as_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, PkeError> {
        p224::ecdsa::VerifyingKey::from_sec1_bytes(bytes)
            .map(Self)
            .map_err(|_| PkeError::BadPublicKey)
    }

    /// False on any malformed or non-matching signature.
    pub fn verify(&self, sig: &Signature, msg: &[u8]) -> bool {
        match p224::ecdsa::Signature::from_slice(&sig.0) {
            Ok(s) => self.0.verify(msg, &s).is_ok(),
            Err(_) => false,
        }
    }
}

impl fmt::Debug for VerifyingKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VerifyingKey({})", hex::encode(self.to_bytes()))
    }
}

impl fmt::Debug for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Signature({})", hex::encode(self.0))
    }
}

pub fn keygen_sig(rng: &mut (impl RngCore + CryptoRng)) -> (SigningKey, VerifyingKey) {
    let sk = SigningKey(p224::ecdsa::SigningKey::random(rng));
    let pk = sk.verifying_key();
    (sk, pk)
}

pub fn sign(sk: &SigningKey, msg: &[u8]) -> Signature {
    sk.sign(msg)
}

pub fn verify(pk: &VerifyingKey, sig: &Signature, msg: &[u8]) -> bool {
    pk.verify(sig, msg)
}

#[derive(Clone)]
pub struct DecryptionKey(NonZeroScalar);

#[derive(Clone, Copy, PartialEq, Eq)]
pub struct EncryptionKey(GroupPoint);

impl DecryptionKey {
    pub fn encryption_key(&self) -> EncryptionKey {
        EncryptionKey(GroupPoint::mul_generator(&self.0.get()))
    }
}

impl Drop for DecryptionKey {
    fn drop(&mut self) {
        self.0.zeroize();
    }
}

impl fmt::Debug for DecryptionKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("DecryptionKey(..)")
    }
}

impl EncryptionKey {
    pub fn to_bytes(&self) -> [u8; PUBLIC_KEY_BYTES] {
        self.0.to_compressed()
    }

    pub fn from_bytes(bytes: &[u8; PUBLIC_KEY_BYTES]) -> Result<Self, PkeError> {
        match GroupPoint::from_compressed(bytes) {
            Ok(p) if !bool::from(p.is_identity()) => Ok(Self(p)),
            _ => Err(PkeError::BadPublicKey),
        }
    }
}

impl fmt::Debug for EncryptionKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EncryptionKey({})", hex::encode(self.to_bytes()))
    }
}

pub fn keygen_enc(rng: &mut (impl RngCore + CryptoRng)) -> (DecryptionKey, EncryptionKey) {
    let sk = DecryptionKey(NonZeroScalar::random(rng));
    let pk = sk.encryption_key();
    (sk, pk)
}

struct AencKeys {
    stream: Shake256,
    mac: Zeroizing<[u8; 32]>,
}

fn aenc_keys(eph: &[u8; COMPRESSED_POINT_BYTES], shared: &GroupPoint) -> AencKeys {
    let mut h = Shake256::default();
    h.update(AENC_KDF_DOMAIN);
    h.update(eph);
    h.update(&shared.to_compressed());
    let mut reader = h.finalize_xof();
    let mut enc = Zeroizing::new([0u8; 32]);
    let mut mac = Zeroizing::new([0u8; 32]);
    reader.read(enc.as_mut());
    reader.read(mac.as_mut());
    let mut stream = Shake256::default();
    stream.update(AENC_KDF_DOMAIN);
    stream.update(enc.as_ref());
    AencKeys { stream, mac }
}

fn aenc_tag(mac: &[u8; 32], eph: &[u8], body: &[u8]) -> [u8; AENC_TAG_BYTES] {
    let mut h = Shake256::default();
    h.update(AENC_MAC_DOMAIN);
    h.update(mac);
    h.update(eph);
    h.update(body);
    let mut tag = [0u8; AENC_TAG_BYTES];
    h.finalize_xof().read(&mut tag);
    tag
}

/// `E ‖ body ‖ tag`, `len = msg.len() + AENC_OVERHEAD`.
pub fn aenc(pk: &EncryptionKey, msg: &[u8], rng: &mut (impl RngCore + CryptoRng)) -> Vec<u8> {
    let e = NonZeroScalar::random(rng);
    let eph = GroupPoint::mul_generator(&e.get()).to_compressed();
    let shared = pk.0.mul(&e.get());
    let keys = aenc_keys(&eph, &shared);
    let mut body = vec![0u8; msg.len()];
    keys.stream.finalize_xof().read(&mut body);
    for (b, m) in body.iter_mut().zip(msg) {
        *b ^= m;
    }
    let tag = aenc_tag(&keys.mac, &eph, &body);
    let mut out = Vec::with_capacity(msg.len() + AENC_OVERHEAD);
    out.extend_from_slice(&eph);
    out.extend_from_slice(&body);
    out.extend_from_slice(&tag);
    out
}

pub fn adec(sk: &DecryptionKey, ct: &[u8]) -> Result<Vec<u8>, PkeError> {
    if ct.len() < AENC_OVERHEAD {
        return Err(PkeError::Truncated);
    }
    let (eph, rest) = ct.split_at(COMPRESSED_POINT_BYTES);
    let (body, tag) = rest.split_at(rest.len() - AENC_TAG_BYTES);
    let eph: [u8; COMPRESSED_POINT_BYTES] = eph.try_into().expect("split length");
    let e_point = GroupPoint::from_compressed(&eph).map_err(|_| PkeError::BadEphemeral)?;
    if bool::from(e_point.is_identity()) {
        return Err(PkeError::BadEphemeral);
    }
    let shared = e_point.mul(&sk.0.get());
    let keys = aenc_keys(&eph, &shared);
    let expected = aenc_tag(&keys.mac, &eph, body);
    if !bool::from(expected.ct_eq(tag)) {
        return Err(PkeError::Integrity);
    }
    let mut out = vec![0u8; body.len()];
    keys.stream.finalize_xof().read(&mut out);
    for (o, b) in out.iter_mut().zip(body) {
        *o ^= b;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn signature_roundtrip_and_flip() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let (sk, pk) = keygen_sig(&mut rng);
        let msg = b"registration record".to_vec();
        let sig = sign(&sk, &msg);
        assert!(verify(&pk, &sig, &msg));
        for i in 0..msg.len() {
            let mut m = msg.clone();
            m[i] ^= 1;
            assert!(!verify(&pk, &sig, &m));
        }
        let mut bad = sig;
        bad.0[10] ^= 0x40;
        assert!(!verify(&pk, &bad, &msg));
        let (_, other) = keygen_sig(&mut rng);
        assert!(!verify(&other, &sig, &msg));
    }

    #[test]
    fn verifying_key_bytes_roundtrip() {
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let (_, pk) = keygen_sig(&mut rng);
        assert_eq!(VerifyingKey::from_bytes(&pk.to_bytes()).unwrap(), pk);
        assert!(VerifyingKey::from_bytes(&[0u8; 29]).is_err());
    }

    #[test]
    fn aenc_roundtrip_and_tamper() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let (sk, pk) = keygen_enc(&mut rng);
        for len in [0usize, 1, 28, 57, 300] {
            let msg: Vec<u8> = (0..len).map(|i| i as u8).collect();
            let ct = aenc(&pk, &msg, &mut rng);
            assert_eq!(ct.len(), len + AENC_OVERHEAD);
            assert_eq!(adec(&sk, &ct).unwrap(), msg);
            for i in COMPRESSED_POINT_BYTES..ct.len() {
                let mut t = ct.clone();
                t[i] ^= 0x01;
                assert_eq!(adec(&sk, &t), Err(PkeError::Integrity));
            }
        }
        let (other, _) = keygen_enc(&mut rng);
        let ct = aenc(&pk, b"x", &mut rng);
        assert_eq!(adec(&other, &ct), Err(PkeError::Integrity));
        assert_eq!(adec(&sk, &ct[..10]), Err(PkeError::Truncated));
    }
}
