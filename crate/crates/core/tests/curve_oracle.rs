//! The optimized field, scalar and group arithmetic against the naive
//! arbitrary-precision reference.

use handover_core::{msm2, scalar_mul, FieldElement, GroupPoint, Scalar};
use handover_oracle as oracle;
use num_bigint::BigUint;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn affine_of(pt: &GroupPoint) -> oracle::Affine {
    pt.to_affine().map(|(x, y)| (oracle::from_be(&x.to_be_bytes()), oracle::from_be(&y.to_be_bytes())))
}

fn scalar_int(s: &Scalar) -> BigUint {
    oracle::from_be(&s.to_be_bytes())
}

fn field_int(f: &FieldElement) -> BigUint {
    oracle::from_be(&f.to_be_bytes())
}

fn random_scalar(rng: &mut ChaCha20Rng) -> Scalar {
    Scalar::random(rng)
}

#[test]
fn scalar_mul_matches_double_and_add_on_1000_scalars() {
    let mut rng = ChaCha20Rng::seed_from_u64(0x5ca1a2);
    let base_k = random_scalar(&mut rng);
    let bases = [GroupPoint::generator(), GroupPoint::mul_generator(&base_k)];
    let oracle_bases = [oracle::generator(), oracle::mul(&oracle::generator(), &scalar_int(&base_k))];
    assert_eq!(affine_of(&bases[1]), oracle_bases[1]);
    for i in 0..1000 {
        let s = random_scalar(&mut rng);
        let which = i % 2;
        let got = scalar_mul(&bases[which], &s);
        let want = oracle::mul(&oracle_bases[which], &scalar_int(&s));
        assert_eq!(affine_of(&got), want, "scalar {i}");
        assert!(oracle::is_on_curve(&affine_of(&got)));
    }
}

#[test]
fn fixed_base_matches_oracle() {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    for _ in 0..200 {
        let s = random_scalar(&mut rng);
        assert_eq!(affine_of(&GroupPoint::mul_generator(&s)), oracle::mul(&oracle::generator(), &scalar_int(&s)));
    }
}

#[test]
fn scalar_mul_edge_scalars() {
    let g = GroupPoint::generator();
    let q_minus_1 = -Scalar::ONE;
    assert_eq!(affine_of(&scalar_mul(&g, &Scalar::ZERO)), None);
    assert_eq!(scalar_mul(&g, &Scalar::ONE), g);
    assert_eq!(affine_of(&scalar_mul(&g, &q_minus_1)), oracle::neg(&oracle::generator()));
    assert_eq!(scalar_mul(&GroupPoint::identity(), &Scalar::from_u64(7)), GroupPoint::identity());
    for small in 2u64..40 {
        let want = oracle::mul(&oracle::generator(), &BigUint::from(small));
        assert_eq!(affine_of(&scalar_mul(&g, &Scalar::from_u64(small))), want);
    }
}

#[test]
fn msm2_matches_composed_oracle() {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let q = oracle::q();
    for _ in 0..100 {
        let m = random_scalar(&mut rng);
        let gamma = random_scalar(&mut rng);
        let a_k = random_scalar(&mut rng);
        let a = GroupPoint::mul_generator(&a_k);
        let want = oracle::mul(&oracle::generator(), &((scalar_int(&m) + scalar_int(&gamma) * scalar_int(&a_k)) % &q));
        assert_eq!(affine_of(&msm2(&m, &gamma, &a)), want);
    }
    let a = GroupPoint::mul_generator(&Scalar::from_u64(5));
    assert!(bool::from(msm2(&Scalar::ZERO, &Scalar::ZERO, &a).is_identity()));
    let m = Scalar::from_u64(11);
    assert_eq!(msm2(&m, &Scalar::ZERO, &a), GroupPoint::mul_generator(&m));
}

#[test]
fn scalar_arithmetic_matches_bigint_mod_q() {
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let q = oracle::q();
    for _ in 0..10_000 {
        let (a, b, c) = (random_scalar(&mut rng), random_scalar(&mut rng), random_scalar(&mut rng));
        let (ai, bi, ci) = (scalar_int(&a), scalar_int(&b), scalar_int(&c));
        assert_eq!(scalar_int(&(a + b)), (&ai + &bi) % &q);
        assert_eq!(scalar_int(&(a - b)), (&ai + &q - &bi) % &q);
        assert_eq!(scalar_int(&(a * b + c)), (&ai * &bi + &ci) % &q);
        assert_eq!(scalar_int(&(-c)), (&q - &ci) % &q);
    }
    for _ in 0..200 {
        let a = random_scalar(&mut rng);
        let inv = Option::<Scalar>::from(a.invert()).unwrap();
        assert_eq!(scalar_int(&inv), scalar_int(&a).modinv(&q).unwrap());
    }
}

#[test]
fn field_arithmetic_matches_bigint_mod_p() {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let p = oracle::p();
    for _ in 0..10_000 {
        let a = FieldElement::random(&mut rng);
        let b = FieldElement::random(&mut rng);
        let (ai, bi) = (field_int(&a), field_int(&b));
        assert_eq!(field_int(&(a * b)), (&ai * &bi) % &p);
        assert_eq!(field_int(&a.square()), (&ai * &ai) % &p);
        assert_eq!(field_int(&(a - b)), (&ai + &p - &bi) % &p);
        assert_eq!(field_int(&(a + b)), (&ai + &bi) % &p);
    }
}

#[test]
fn byte_parsing_rejects_out_of_range_values() {
    let q_bytes = oracle::fixed28(&oracle::q());
    assert!(bool::from(Scalar::from_be_bytes(&q_bytes).is_none()));
    let below = oracle::fixed28(&(oracle::q() - 1u32));
    assert!(bool::from(Scalar::from_be_bytes(&below).is_some()));
    let p_bytes = oracle::fixed28(&oracle::p());
    assert!(bool::from(FieldElement::from_be_bytes(&p_bytes).is_none()));
}

#[test]
fn x_only_decoding_agrees_with_curve_equation() {
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let mut on = 0;
    for _ in 0..500 {
        let mut x = [0u8; 28];
        rng.fill_bytes(&mut x);
        x[0] &= 0x7f;
        match GroupPoint::from_x_bytes(&x) {
            Ok(pt) => {
                on += 1;
                let aff = affine_of(&pt);
                assert!(oracle::is_on_curve(&aff));
                assert_eq!(aff.as_ref().unwrap().0, oracle::from_be(&x));
                assert!(pt.has_even_y());
            }
            Err(_) => {
                // no y exists: check both candidate signs fail on the reference curve
                let xi = oracle::from_be(&x);
                let p = oracle::p();
                let rhs = (&xi * &xi % &p * &xi + oracle::from_be(&hex_b()) + &p * 3u32 - &xi * 3u32 % &p) % &p;
                let euler = rhs.modpow(&((&p - 1u32) >> 1), &p);
                assert_ne!(euler, BigUint::from(1u32));
            }
        }
    }
    assert!(on > 150 && on < 350, "about half of x values should be on the curve, got {on}");
}

fn hex_b() -> Vec<u8> {
    hex::decode("b4050a850c04b3abf54132565044b0b7d7bfd8ba270b39432355ffb4").unwrap()
}
