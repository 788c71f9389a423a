//! Seeded random instances: Haar unitaries, unital mixed-unitary channels,
//! generic unital-completely-positive maps from Stinespring isometries, and
//! Gaussian semigroup generators. Everything is deterministic per seed with a
//! fixed, platform-independent stream cipher PRNG.

use ndarray::Array2;
use ndarray_linalg::QR;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::markov::GKLSGenerator;
use crate::op::Operator;

/// A standard complex Gaussian matrix.
fn ginibre(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<C64> {
    let mut m = Array2::<C64>::zeros((rows, cols));
    for z in m.iter_mut() {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        *z = C64::new(re, im);
    }
    m
}

/// Haar-distributed unitary: QR of a complex Gaussian with the R diagonal
/// phases divided out (plain QR alone is not Haar-uniform).
pub fn haar_unitary(d: usize, rng: &mut ChaCha8Rng) -> Result<Operator> {
    let g = ginibre(d, d, rng);
    let (q, r) = g
        .qr()
        .map_err(|e| Error::Numerical(format!("QR factorization failed: {e}")))?;
    let mut q = q;
    for j in 0..d {
        let rj = r[(j, j)];
        let phase = if rj.norm() > 0.0 { rj / rj.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase.conj();
        }
    }
    Operator::new(q)
}

/// The first `cols` columns of a Haar unitary: a Haar-distributed isometry.
pub fn haar_isometry(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Result<Array2<C64>> {
    if cols > rows {
        return Err(Error::InvalidInput(format!(
            "isometry needs rows ≥ cols, got {rows} < {cols}"
        )));
    }
    let u = haar_unitary(rows, rng)?;
    Ok(u.array().slice(ndarray::s![.., ..cols]).to_owned())
}

/// Uniform point on the probability simplex (normalized exponentials).
pub fn random_simplex(k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut w: Vec<f64> = (0..k).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let total: f64 = w.iter().sum();
    for v in &mut w {
        *v /= total;
    }
    w
}

/// Mixed-unitary channel X ↦ Σ p_i U_i* X U_i as its Kraus family
/// {√p_i U_i}. Unital and trace-preserving in both pictures, hence always
/// faithful (the maximally mixed state is stationary and full-rank).
pub fn random_unital_channel(d: usize, k: usize, seed: u64) -> Result<Vec<Operator>> {
    if d < 2 || k < 1 {
        return Err(Error::InvalidInput(format!(
            "mixed-unitary channel needs d ≥ 2 and k ≥ 1, got d = {d}, k = {k}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = random_simplex(k, &mut rng);
    let mut kraus = Vec::with_capacity(k);
    for w in p {
        kraus.push(haar_unitary(d, &mut rng)?.scale_re(w.sqrt()));
    }
    Ok(kraus)
}

/// Generic unital map from a Haar Stinespring isometry V : H → H ⊗ E,
/// returned as the Kraus family of X ↦ V*(X ⊗ I)V. Unital by construction;
/// the Schrödinger dual is generally not unital, so these instances are
/// generically non-faithful — the negative branch of the theorems.
pub fn random_ucp(d: usize, env_dim: usize, seed: u64) -> Result<Vec<Operator>> {
    if d < 1 || env_dim < 1 {
        return Err(Error::InvalidInput("dimensions must be ≥ 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = haar_isometry(d * env_dim, d, &mut rng)?;
    // Environment-major row blocks: K_i = rows i·d .. (i+1)·d.
    let mut kraus = Vec::with_capacity(env_dim);
    for i in 0..env_dim {
        let block = v.slice(ndarray::s![i * d..(i + 1) * d, ..]).to_owned();
        kraus.push(Operator::new(block)?);
    }
    Ok(kraus)
}

/// Gaussian semigroup generator: Hermitized Gaussian Hamiltonian and Gaussian
/// jump operators, scaled to O(1) norms.
pub fn random_gkls(d: usize, jump_count: usize, seed: u64) -> Result<GKLSGenerator> {
    if d < 1 {
        return Err(Error::InvalidInput("dimension must be ≥ 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / (d as f64).sqrt();
    let h = Operator::new(ginibre(d, d, &mut rng))?.hermitize().scale_re(scale);
    let jumps: Vec<Operator> = (0..jump_count)
        .map(|_| Operator::new(ginibre(d, d, &mut rng)).map(|l| l.scale_re(scale)))
        .collect::<Result<_>>()?;
    GKLSGenerator::new(h, jumps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::op::{validate_ucp, Picture, Superoperator, Tolerances};

    #[test]
    fn haar_unitary_is_unitary_and_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = haar_unitary(4, &mut rng).unwrap();
        let defect = (&(&u.adjoint() * &u) - &Operator::identity(4)).norm();
        assert!(defect < 1e-13, "{defect}");

        let mut rng2 = ChaCha8Rng::seed_from_u64(5);
        let u2 = haar_unitary(4, &mut rng2).unwrap();
        assert_eq!(u.array(), u2.array());
    }

    #[test]
    fn unital_channel_is_ucp_and_unitary_at_k1() {
        let tol = Tolerances::default();
        let kraus = random_unital_channel(2, 3, 42).unwrap();
        let s = Superoperator::from_kraus(&kraus, Picture::Heisenberg).unwrap();
        let rep = validate_ucp(&s, &tol).unwrap();
        assert!(rep.is_ucp() && rep.is_trace_preserving_dual);

        // Single-unitary mixture: spectrum on the unit circle.
        let kraus = random_unital_channel(3, 1, 7).unwrap();
        let s = Superoperator::from_kraus(&kraus, Picture::Heisenberg).unwrap();
        let eigs = crate::spectral::full_spectrum(&s).unwrap();
        assert!(eigs.iter().all(|z| (z.norm() - 1.0).abs() < 1e-10));
    }

    #[test]
    fn stinespring_map_is_ucp() {
        let tol = Tolerances::default();
        for seed in [0u64, 1, 2] {
            let kraus = random_ucp(2, 2, seed).unwrap();
            let total: Operator = kraus
                .iter()
                .fold(Operator::zeros(2), |acc, k| &acc + &(&k.adjoint() * k));
            assert!((&total - &Operator::identity(2)).norm() < 1e-12);
            let s = Superoperator::from_kraus(&kraus, Picture::Heisenberg).unwrap();
            assert!(validate_ucp(&s, &tol).unwrap().is_ucp());
        }
        // env_dim = 1: the isometry is a unitary.
        let kraus = random_ucp(3, 1, 9).unwrap();
        assert_eq!(kraus.len(), 1);
        let defect = (&(&kraus[0].adjoint() * &kraus[0]) - &Operator::identity(3)).norm();
        assert!(defect < 1e-12);
    }

    #[test]
    fn gkls_axioms_on_random_generator() {
        let tol = Tolerances::default();
        let g = random_gkls(3, 2, 11).unwrap();
        let s = crate::markov::gkls_superop(&g).unwrap();
        let (_, _, _, gap) = crate::markov::generator_spectrum_classify(&s, &tol).unwrap();
        assert!(gap >= 0.0);
    }

    #[test]
    fn simplex_normalization() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = random_simplex(5, &mut rng);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|&x| x > 0.0));
    }
}
