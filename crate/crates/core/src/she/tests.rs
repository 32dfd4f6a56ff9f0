use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::*;
use crate::arith::rational;
use crate::keys::{build_evalkey, build_evalkey_with, keygen, setup, EpsMode, Overrides, Preset};
use crate::mvpoly::Polynomial;

fn toy(seed: u64) -> (SecretKey, ChaCha20Rng) {
    let p = Preset::Toy.params().unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (keygen(&p, &mut rng).unwrap(), rng)
}

fn max_abs(v: &[i64]) -> i64 {
    v.iter().map(|x| x.abs()).max().unwrap_or(0)
}

#[test]
fn hand_built_ciphertext() {
    let (sk, _) = toy(1);
    let p = sk.params();
    let m = Plaintext::unit(p.slots(), 0);
    let ct = encrypt_with(&sk, &m, &vec![0; p.n], &vec![0; p.slots()]).unwrap();
    let mut want = vec![0; p.slots()];
    want[0] = p.q.half();
    assert_eq!(decrypt_raw(&sk, &ct).unwrap(), want);
    assert_eq!(decrypt(&sk, &ct).unwrap(), m);

    let zero = Plaintext::zeros(p.slots());
    let ct = encrypt_with(&sk, &zero, &vec![0; p.n], &vec![0; p.slots()]).unwrap();
    assert!(ct.as_slice().iter().all(|&x| x == 0));
}

#[test]
fn decoding_threshold() {
    let (sk, _) = toy(2);
    let p = sk.params();
    let h = p.q.half();
    let q4 = (p.q.value() / 4) as i64;
    let zero = Plaintext::zeros(p.slots());
    // Just past floor(q/2)/2 the bit flips; just below it survives.
    let at = |e: i64| {
        let ct = encrypt_with(&sk, &zero, &vec![3; p.n], &[e, -e]).unwrap();
        decrypt(&sk, &ct).unwrap()
    };
    assert_eq!(at(q4 + 1), Plaintext::ones(p.slots()));
    assert_eq!(at((h - 1) / 2), zero);
    assert_eq!(decode(&[(h + 1) / 2, -((h + 1) / 2)], p.q), Plaintext::ones(2));
    assert_eq!(decode(&[(h + 1) / 2 - 1, 1 - (h + 1) / 2], p.q), Plaintext::zeros(2));
}

#[test]
fn roundtrip_and_fresh_noise() {
    let (sk, mut rng) = toy(3);
    let p = sk.params().clone();
    for _ in 0..1000 {
        let m = Plaintext::random(p.slots(), &mut rng);
        let ct = encrypt(&sk, &m, &mut rng).unwrap();
        assert_eq!(decrypt(&sk, &ct).unwrap(), m);
        assert!(max_abs(&noise_of(&sk, &ct, &m).unwrap()) <= p.bound as i64);
        assert_eq!(ct.len(), p.ell);
        assert_eq!(ct.level(), 0);
    }
}

#[test]
fn zero_noise_has_zero_noise() {
    let p = Preset::Toy.params_with(|o| o.zero_noise = true).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let sk = keygen(&p, &mut rng).unwrap();
    for _ in 0..50 {
        let m = Plaintext::random(p.slots(), &mut rng);
        let ct = encrypt(&sk, &m, &mut rng).unwrap();
        assert!(noise_of(&sk, &ct, &m).unwrap().iter().all(|&e| e == 0));
    }
}

#[test]
fn addition() {
    let (sk, mut rng) = toy(5);
    let p = sk.params().clone();
    for _ in 0..1000 {
        let m1 = Plaintext::random(p.slots(), &mut rng);
        let m2 = Plaintext::random(p.slots(), &mut rng);
        let c1 = encrypt(&sk, &m1, &mut rng).unwrap();
        let c2 = encrypt(&sk, &m2, &mut rng).unwrap();
        let s = eval_add(&c1, &c2).unwrap();
        let want = m1.xor(&m2);
        assert_eq!(decrypt(&sk, &s).unwrap(), want);
        let e = max_abs(&noise_of(&sk, &s, &want).unwrap());
        assert!(e <= 2 * p.bound as i64 + 1);
        assert!(rational(e, 1) <= *s.noise_hint().unwrap());
    }
    let m = Plaintext::random(p.slots(), &mut rng);
    let c = encrypt(&sk, &m, &mut rng).unwrap();
    let z = encrypt(&sk, &Plaintext::zeros(p.slots()), &mut rng).unwrap();
    assert_eq!(decrypt(&sk, &eval_add(&c, &z).unwrap()).unwrap(), m);
    assert_eq!(
        decrypt(&sk, &eval_add(&c, &c).unwrap()).unwrap(),
        Plaintext::zeros(p.slots())
    );
}

#[test]
fn addition_expansion_at_zero_noise() {
    let p = Preset::Toy.params_with(|o| o.zero_noise = true).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let sk = keygen(&p, &mut rng).unwrap();
    let q = p.q;
    for (a, b) in [(0u8, 0u8), (0, 1), (1, 0), (1, 1)] {
        let m1 = Plaintext::new(vec![a, b]).unwrap();
        let m2 = Plaintext::new(vec![b, 1]).unwrap();
        let s = eval_add(
            &encrypt(&sk, &m1, &mut rng).unwrap(),
            &encrypt(&sk, &m2, &mut rng).unwrap(),
        )
        .unwrap();
        let x = decrypt_raw(&sk, &s).unwrap();
        let x2 = m1.xor(&m2);
        for j in 0..2 {
            let (s1, s2, sx) = (m1.bits()[j] as i128, m2.bits()[j] as i128, x2.bits()[j] as i128);
            // (m1 xor m2) floor(q/2) - (m1 + m2 - m1 xor m2) / 2, exactly
            let want = sx * q.half() as i128 - (s1 + s2 - sx) / 2;
            assert_eq!(x[j], q.reduce(want));
            assert_eq!(x[j], q.reduce((s1 + s2) * q.half() as i128));
        }
    }
}

#[test]
fn multiplication_truth_table() {
    for seed in 0..5 {
        let (sk, mut rng) = toy(100 + seed);
        let p = sk.params().clone();
        let evk = build_evalkey(&sk, &mut rng).unwrap();
        let cases = [(vec![0, 1], vec![0, 0]), (vec![0, 1], vec![1, 1])];
        for (a, b) in cases {
            let (m1, m2) = (Plaintext::new(a).unwrap(), Plaintext::new(b).unwrap());
            for (x, y) in [(&m1, &m2), (&m2, &m1)] {
                let c1 = encrypt(&sk, x, &mut rng).unwrap();
                let c2 = encrypt(&sk, y, &mut rng).unwrap();
                let c = eval_mult(&evk, &c1, &c2).unwrap();
                let want = x.and(y);
                assert_eq!(c.len(), p.ell);
                assert_eq!(c.level(), 1);
                assert_eq!(decrypt(&sk, &c).unwrap(), want);
                let e = max_abs(&noise_of(&sk, &c, &want).unwrap());
                let bound = p.mult_noise_bound(c1.noise_hint().unwrap(), c2.noise_hint().unwrap());
                assert!(rational(e, 1) <= bound);
                assert_eq!(c.noise_hint(), Some(&bound));
            }
        }
    }
}

#[test]
fn ones_are_a_multiplicative_identity() {
    let (sk, mut rng) = toy(7);
    let p = sk.params().clone();
    let evk = build_evalkey(&sk, &mut rng).unwrap();
    let one = encrypt(&sk, &Plaintext::ones(p.slots()), &mut rng).unwrap();
    for _ in 0..20 {
        let m = Plaintext::random(p.slots(), &mut rng);
        let c = encrypt(&sk, &m, &mut rng).unwrap();
        let serial = eval_mult(&evk, &c, &one).unwrap();
        assert_eq!(decrypt(&sk, &serial).unwrap(), m);
        assert_eq!(eval_mult_with(&evk, &c, &one, true).unwrap(), serial);
    }
}

#[test]
fn depth_chain_and_budget() {
    let p = Preset::Depth3.params().unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let sk = keygen(&p, &mut rng).unwrap();
    let evk = build_evalkey(&sk, &mut rng).unwrap();
    let mut m = Plaintext::ones(p.slots());
    let mut c = encrypt(&sk, &m, &mut rng).unwrap();
    for level in 1..=3 {
        let mi = Plaintext::random(p.slots(), &mut rng);
        c = eval_mult(&evk, &c, &encrypt(&sk, &mi, &mut rng).unwrap()).unwrap();
        m = m.and(&mi);
        assert_eq!(c.level(), level);
        assert_eq!(decrypt(&sk, &c).unwrap(), m);
        let e = max_abs(&noise_of(&sk, &c, &m).unwrap());
        assert!(rational(e, 1) <= *c.noise_hint().unwrap());
    }
    let fresh = encrypt(&sk, &m, &mut rng).unwrap();
    assert_eq!(
        eval_mult(&evk, &c, &fresh),
        Err(Error::DepthExceeded { needed: 4, budget: 3 })
    );
}

#[test]
fn mismatches_are_rejected() {
    let (sk, mut rng) = toy(9);
    let p = sk.params();
    let c = encrypt(&sk, &Plaintext::zeros(p.slots()), &mut rng).unwrap();
    let other_q = Ciphertext::new(
        c.as_slice().iter().map(|_| 0).collect(),
        Modulus::new(101).unwrap(),
        0,
        None,
    )
    .unwrap();
    assert_eq!(eval_add(&c, &other_q), Err(Error::ParamsMismatch));
    assert_eq!(decrypt(&sk, &other_q), Err(Error::ParamsMismatch));
    let plain = build_evalkey_with(&sk, Variant::Plain, EpsMode::Random, &mut rng).unwrap();
    assert!(matches!(eval_mult(&plain, &c, &c), Err(Error::VariantMismatch(_))));
    assert!(encrypt(&sk, &Plaintext::zeros(3), &mut rng).is_err());
}

/// `c = f(z) R` for `f` in the ideal; multiplication then reproduces the
/// reduced product's evaluations exactly.
fn pipeline_check(gadget: bool) {
    let p = Preset::Toy
        .params_with(|o| {
            o.zero_noise = true;
            o.gadget = Some(gadget);
        })
        .unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(10 + gadget as u64);
    let sk = keygen(&p, &mut rng).unwrap();
    let evk = build_evalkey_with(&sk, Variant::of(&p), EpsMode::Zero, &mut rng).unwrap();
    let ideal = |rng: &mut ChaCha20Rng| {
        let h = Polynomial::random(p.v, p.r_prime, p.q, rng);
        sk.generator().mul(&h).unwrap()
    };
    for _ in 0..10 {
        let (f1, f2) = (ideal(&mut rng), ideal(&mut rng));
        let enc = |f: &Polynomial| {
            let c = sk.r().left_mul(&sk.evaluate(f).unwrap()).unwrap();
            Ciphertext::new(c, p.q, 0, None).unwrap()
        };
        let out = eval_mult(&evk, &enc(&f1), &enc(&f2)).unwrap();
        let got = sk.r_inv().left_mul(out.as_slice()).unwrap();
        let prod = f1.mul(&f2).unwrap().reduce_by_set(&sk.reduction_set(), p.r).unwrap();
        assert_eq!(got, sk.evaluate(&prod).unwrap());
        assert_eq!(decrypt(&sk, &out).unwrap(), Plaintext::zeros(p.slots()));
    }
    // Zero noise and zero eps: a real product decrypts exactly with the
    // gadget key. The plain key leaves `-m K` with `|K|` up to `ell q / 4`,
    // because `floor(q/2)` is `(q - 1)/2`, so it is only checked above.
    if !gadget {
        return;
    }
    for _ in 0..10 {
        let m1 = Plaintext::random(p.slots(), &mut rng);
        let m2 = Plaintext::random(p.slots(), &mut rng);
        let c = eval_mult(
            &evk,
            &encrypt(&sk, &m1, &mut rng).unwrap(),
            &encrypt(&sk, &m2, &mut rng).unwrap(),
        )
        .unwrap();
        assert_eq!(decrypt(&sk, &c).unwrap(), m1.and(&m2));
    }
}

#[test]
fn polynomial_pipeline_gadget() {
    pipeline_check(true);
}

#[test]
fn polynomial_pipeline_plain() {
    pipeline_check(false);
}

#[test]
fn fresh_eps_keeps_products() {
    let p = setup(
        6,
        1,
        &Overrides {
            q_bits: Some(24),
            u: Some(24),
            ..Overrides::default()
        },
    )
    .unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(12);
    let sk = keygen(&p, &mut rng).unwrap();
    let k1 = build_evalkey(&sk, &mut rng).unwrap();
    let k2 = build_evalkey(&sk, &mut rng).unwrap();
    assert_ne!(k1.tensor(), k2.tensor());
    for _ in 0..20 {
        let m1 = Plaintext::random(p.slots(), &mut rng);
        let m2 = Plaintext::random(p.slots(), &mut rng);
        let c1 = encrypt(&sk, &m1, &mut rng).unwrap();
        let c2 = encrypt(&sk, &m2, &mut rng).unwrap();
        let a = decrypt(&sk, &eval_mult(&k1, &c1, &c2).unwrap()).unwrap();
        let b = decrypt(&sk, &eval_mult(&k2, &c1, &c2).unwrap()).unwrap();
        assert_eq!(a, m1.and(&m2));
        assert_eq!(a, b);
    }
}

#[test]
fn public_key() {
    let (sk, mut rng) = toy(13);
    let p = sk.params().clone();
    let eps = crate::keys::default_pk_slack();
    let pk = pk_keygen(&sk, &eps, &mut rng).unwrap();
    assert_eq!(pk.c0().len(), 352);
    let zero = Plaintext::zeros(p.slots());
    for row in pk.c0() {
        let c = Ciphertext::new(row.clone(), p.q, 0, None).unwrap();
        assert_eq!(decrypt(&sk, &c).unwrap(), zero);
    }
    for (i, row) in pk.c_pk().iter().enumerate() {
        let c = Ciphertext::new(row.clone(), p.q, 0, None).unwrap();
        assert_eq!(decrypt(&sk, &c).unwrap(), Plaintext::unit(p.slots(), i));
    }
    let empty = pk_encrypt_subset(&pk, &zero, &vec![false; pk.c0().len()]).unwrap();
    assert!(empty.as_slice().iter().all(|&x| x == 0));
    assert!(empty.noise_hint().unwrap().is_zero());

    let evk = build_evalkey(&sk, &mut rng).unwrap();
    for _ in 0..100 {
        let m1 = Plaintext::random(p.slots(), &mut rng);
        let m2 = Plaintext::random(p.slots(), &mut rng);
        let c1 = pk_encrypt(&pk, &m1, &mut rng).unwrap();
        let c2 = pk_encrypt(&pk, &m2, &mut rng).unwrap();
        assert_eq!(decrypt(&sk, &c1).unwrap(), m1);
        let e = max_abs(&noise_of(&sk, &c1, &m1).unwrap());
        assert!(rational(e, 1) <= *c1.noise_hint().unwrap());
        assert_eq!(decrypt(&sk, &eval_add(&c1, &c2).unwrap()).unwrap(), m1.xor(&m2));
        assert_eq!(decrypt(&sk, &eval_mult(&evk, &c1, &c2).unwrap()).unwrap(), m1.and(&m2));
    }
    let pk2 = pk_keygen(&sk, &eps, &mut ChaCha20Rng::seed_from_u64(99)).unwrap();
    assert_ne!(pk.c0(), pk2.c0());
    assert!(pk_keygen(&sk, &Rational::zero(), &mut rng).is_err());
}

#[test]
fn plaintext_text_form() {
    let m: Plaintext = "0110".parse().unwrap();
    assert_eq!(m.bits(), &[0, 1, 1, 0]);
    assert_eq!(m.to_string(), "0110");
    assert!("012".parse::<Plaintext>().is_err());
    assert!(Plaintext::new(vec![2]).is_err());
}

#[test]
fn uniform_r2_breaks_products() {
    let p = Preset::Toy.params().unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(14);
    let sk = crate::keys::keygen_with(&p, crate::keys::R2Mode::Uniform, &mut rng).unwrap();
    let evk = build_evalkey(&sk, &mut rng).unwrap();
    let mut wrong = 0;
    for _ in 0..20 {
        let m1 = Plaintext::random(p.slots(), &mut rng);
        let m2 = Plaintext::random(p.slots(), &mut rng);
        let c1 = encrypt(&sk, &m1, &mut rng).unwrap();
        let c2 = encrypt(&sk, &m2, &mut rng).unwrap();
        // Fresh ciphertexts and sums are unaffected.
        assert_eq!(decrypt(&sk, &eval_add(&c1, &c2).unwrap()).unwrap(), m1.xor(&m2));
        let c = eval_mult(&evk, &c1, &c2).unwrap();
        let e = max_abs(&noise_of(&sk, &c, &m1.and(&m2)).unwrap());
        if rational(e, 1) > *c.noise_hint().unwrap() {
            wrong += 1;
        }
    }
    assert!(wrong >= 15, "only {wrong} of 20 products exceeded the bound");
}
