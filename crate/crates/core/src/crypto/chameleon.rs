//! The chameleon hash `CH_Y(m, r) = m·P + r·Y` and its trapdoor.

use core::fmt;

use rand::{CryptoRng, RngCore};
use zeroize::{Zeroize, ZeroizeOnDrop};

use super::group::{msm2, GroupPoint, NonZeroScalar, Scalar};

/// `(k, x)` with `k = m* + r*·x`.
#[derive(Clone, Zeroize, ZeroizeOnDrop)]
pub struct ChameleonTrapdoor {
    k: Scalar,
    x: NonZeroScalar,
}

impl ChameleonTrapdoor {
    pub fn from_parts(k: Scalar, x: NonZeroScalar) -> Self {
        Self { k, x }
    }

    pub fn k(&self) -> &Scalar {
        &self.k
    }

    pub fn x(&self) -> &NonZeroScalar {
        &self.x
    }
}

impl fmt::Debug for ChameleonTrapdoor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ChameleonTrapdoor(..)")
    }
}

/// Public key `Y = x·P` and the committed point `CH`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChameleonHashKey {
    pub y: GroupPoint,
    pub ch: GroupPoint,
}

/// Output of [`ch_keygen`].
#[derive(Debug)]
pub struct ChameleonKeyPair {
    pub trapdoor: ChameleonTrapdoor,
    pub key: ChameleonHashKey,
    pub m_star: Scalar,
    pub r_star: Scalar,
}

/// Keygen with a random `r*`.
pub fn ch_keygen(rng: &mut (impl RngCore + CryptoRng)) -> ChameleonKeyPair {
    let x = NonZeroScalar::random(rng);
    let m_star = NonZeroScalar::random(rng);
    let r_star = NonZeroScalar::random(rng);
    ch_keygen_from(x, m_star, r_star.get())
}

/// Keygen with a caller-supplied `r*` (the registration flow passes `H0(ID, s)`).
pub fn ch_keygen_with(rng: &mut (impl RngCore + CryptoRng), r_star: &Scalar) -> ChameleonKeyPair {
    let x = NonZeroScalar::random(rng);
    let m_star = NonZeroScalar::random(rng);
    ch_keygen_from(x, m_star, *r_star)
}

fn ch_keygen_from(x: NonZeroScalar, m_star: NonZeroScalar, r_star: Scalar) -> ChameleonKeyPair {
    let y = GroupPoint::mul_generator(&x.get()).normalize();
    let m_star = m_star.get();
    let k = m_star + r_star * x.get();
    // k·P = m*·P + r*·x·P
    let ch = GroupPoint::mul_generator(&k).normalize();
    ChameleonKeyPair {
        trapdoor: ChameleonTrapdoor { k, x },
        key: ChameleonHashKey { y, ch },
        m_star,
        r_star,
    }
}

/// `m·P + r·Y`.
pub fn ch_commit(y: &GroupPoint, m: &Scalar, r: &Scalar) -> GroupPoint {
    debug_assert!(!bool::from(y.is_identity()), "chameleon key Y must not be the identity");
    msm2(m, r, y)
}

/// `m' = k − r'·x`, so that `ch_commit(Y, m', r') = CH`.
pub fn ch_collide(td: &ChameleonTrapdoor, r_new: &NonZeroScalar) -> Scalar {
    td.k - r_new.get() * td.x.get()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn keygen_is_deterministic_under_seed() {
        let a = ch_keygen(&mut ChaCha20Rng::seed_from_u64(9));
        let b = ch_keygen(&mut ChaCha20Rng::seed_from_u64(9));
        assert_eq!(a.key, b.key);
        assert_eq!(a.trapdoor.k(), b.trapdoor.k());
    }

    #[test]
    fn commitment_matches_keygen_and_trapdoor() {
        let mut rng = ChaCha20Rng::seed_from_u64(10);
        let kp = ch_keygen(&mut rng);
        assert_eq!(ch_commit(&kp.key.y, &kp.m_star, &kp.r_star), kp.key.ch);
        assert_eq!(ch_commit(&kp.key.y, kp.trapdoor.k(), &Scalar::ZERO), kp.key.ch);
        assert_eq!(kp.key.y, GroupPoint::mul_generator(&kp.trapdoor.x().get()));
    }

    #[test]
    fn collision_with_original_randomness_is_original_message() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let kp = ch_keygen(&mut rng);
        let r = NonZeroScalar::new(kp.r_star).unwrap();
        assert_eq!(ch_collide(&kp.trapdoor, &r), kp.m_star);
    }

    #[test]
    fn random_collisions_open_to_ch() {
        let mut rng = ChaCha20Rng::seed_from_u64(12);
        let kp = ch_keygen(&mut rng);
        for _ in 0..50 {
            let r = NonZeroScalar::random(&mut rng);
            let m = ch_collide(&kp.trapdoor, &r);
            assert_eq!(ch_commit(&kp.key.y, &m, &r.get()), kp.key.ch);
        }
    }
}
