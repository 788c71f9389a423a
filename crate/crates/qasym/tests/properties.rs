//! Property-based invariants over randomized inputs: algebraic identities of
//! the vectorization calculus, duality of the Hilbert–Schmidt adjoint,
//! unitarity of the sampled ensembles, and group laws of the binary words.

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use qasym::op::{devectorize, hs_inner, vectorize, Operator, Picture, Superoperator};
use qasym::pukanszky::{mu_weight, BinaryWord};
use qasym::random::{haar_unitary, random_unital_channel};
use qasym::spectral::random_operator;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn seeded_op(d: usize, seed: u64) -> Operator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_operator(d, &mut rng)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// devectorize ∘ vectorize is the identity on operators.
    #[test]
    fn vec_roundtrip(d in 2usize..5, seed in 0u64..1_000_000) {
        let x = seeded_op(d, seed);
        let back = devectorize(&vectorize(&x), d).unwrap();
        prop_assert!((&x - &back).norm() <= 1e-14 * x.norm().max(1.0));
    }

    /// ⟨S*(X), Y⟩ = ⟨X, S(Y)⟩ for the Hilbert–Schmidt adjoint of a sampled
    /// channel, and the adjoint is an involution.
    #[test]
    fn hs_adjoint_duality(d in 2usize..4, seed in 0u64..1_000_000) {
        let kraus = random_unital_channel(d, 3, seed).unwrap();
        let s = Superoperator::from_kraus(&kraus, Picture::Heisenberg).unwrap();
        let x = seeded_op(d, seed ^ 0xabc);
        let y = seeded_op(d, seed ^ 0xdef);
        let lhs = hs_inner(&s.hs_adjoint().apply(&x).unwrap(), &y).unwrap();
        let rhs = hs_inner(&x, &s.apply(&y).unwrap()).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-10 * lhs.norm().max(1.0));
        let invol = s.hs_adjoint().hs_adjoint().sub(&s).unwrap().norm();
        prop_assert!(invol <= 1e-14 * s.norm().max(1.0));
    }

    /// Sampled unitaries satisfy U*U = I.
    #[test]
    fn haar_unitary_is_unitary(d in 2usize..6, seed in 0u64..1_000_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = haar_unitary(d, &mut rng).unwrap();
        let defect = (&(&u.adjoint() * &u) - &Operator::identity(d)).norm();
        prop_assert!(defect <= 1e-12);
    }

    /// Kraus-built Heisenberg channels are unital: S(I) = I.
    #[test]
    fn kraus_channels_are_unital(d in 2usize..4, k in 1usize..4, seed in 0u64..1_000_000) {
        let kraus = random_unital_channel(d, k, seed).unwrap();
        let s = Superoperator::from_kraus(&kraus, Picture::Heisenberg).unwrap();
        let defect = (&s.apply(&Operator::identity(d)).unwrap() - &Operator::identity(d)).norm();
        prop_assert!(defect <= 1e-12);
    }

    /// Binary words form a group under xor, with index a bijection.
    #[test]
    fn word_group_laws(n in 1usize..6, a in 0usize..32, b in 0usize..32) {
        let a = a % (1 << n);
        let b = b % (1 << n);
        let wa = BinaryWord::from_index(n, a);
        let wb = BinaryWord::from_index(n, b);
        prop_assert_eq!(wa.xor(&wb).index(), a ^ b);
        prop_assert_eq!(wa.xor(&wa).index(), 0);
        prop_assert_eq!(wa.xor(&BinaryWord::zero(n)).index(), a);
    }

    /// The biased-coin weights are a probability distribution on words.
    #[test]
    fn mu_weights_sum_to_one(n in 1usize..6, lam in 0.05f64..0.5) {
        let total: f64 = BinaryWord::all(n).iter().map(|x| mu_weight(x, lam)).sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
    }

    /// Vectorization is an isometry: ‖vec(X)‖ = ‖X‖ and vec respects the
    /// Hilbert–Schmidt inner product.
    #[test]
    fn vectorize_isometry(d in 2usize..5, seed in 0u64..1_000_000) {
        let x = seeded_op(d, seed);
        let y = seeded_op(d, seed ^ 0x55);
        let vx = vectorize(&x);
        let vy = vectorize(&y);
        let dot: C64 = vx.iter().zip(vy.iter()).map(|(a, b)| a.conj() * b).sum();
        let hs = hs_inner(&x, &y).unwrap();
        prop_assert!((dot - hs).norm() <= 1e-12 * hs.norm().max(1.0));
    }
}
