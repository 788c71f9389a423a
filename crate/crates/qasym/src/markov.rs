//! Quantum dynamical semigroups: GKLS generators (Heisenberg picture),
//! generator spectra, semigroup attractor and fixed spaces, the Markovian
//! decoherence-free algebra, gauge transformations, faithfulness, and the
//! matrix exponential connecting the generator to the unit-time map.

use ndarray::{Array1, Array2};
use ndarray_linalg::Inverse;
use num_complex::Complex64 as C64;

use crate::dfa;
use crate::error::{Error, Result};
use crate::op::{
    anticommutator, commutant, commutator, devectorize, nullspace, orthonormalize, vectorize,
    Operator, OperatorSubspace, Superoperator, Tolerances,
};
use crate::spectral::{self, PeripheralRule};

const I1: C64 = C64::new(0.0, 1.0);

/// A GKLS generator in Heisenberg form:
/// L(X) = i[H, X] + Σ_k (L_k* X L_k − ½{L_k* L_k, X}).
#[derive(Debug, Clone)]
pub struct GKLSGenerator {
    hamiltonian: Operator,
    jumps: Vec<Operator>,
}

impl GKLSGenerator {
    pub fn new(hamiltonian: Operator, jumps: Vec<Operator>) -> Result<Self> {
        let d = hamiltonian.dim();
        let defect = hamiltonian.hermiticity_defect();
        if defect > 1e-12 * hamiltonian.norm().max(1.0) {
            return Err(Error::InvalidInput(format!(
                "Hamiltonian is not hermitian (defect {defect:.3e})"
            )));
        }
        if jumps.iter().any(|l| l.dim() != d) {
            return Err(Error::DimMismatch(
                "jump operator dimension differs from Hamiltonian".into(),
            ));
        }
        Ok(GKLSGenerator { hamiltonian, jumps })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[Operator] {
        &self.jumps
    }

    /// Apply the Schrödinger-picture (predual) generator:
    /// L*(ρ) = −i[H, ρ] + Σ_k (L_k ρ L_k* − ½{L_k* L_k, ρ}).
    pub fn apply_dual(&self, rho: &Operator) -> Result<Operator> {
        let mut out = commutator(&self.hamiltonian, rho).scale(-I1);
        for l in &self.jumps {
            let ls = l.adjoint();
            let lsl = &ls * l;
            let mut t = &(l * rho) * &ls;
            t = &t - &anticommutator(&lsl, rho).scale_re(0.5);
            out = &out + &t;
        }
        Ok(out)
    }

    /// Apply the generator to an operator without materializing the
    /// superoperator matrix.
    pub fn apply(&self, x: &Operator) -> Result<Operator> {
        let mut out = commutator(&self.hamiltonian, x).scale(I1);
        for l in &self.jumps {
            let ls = l.adjoint();
            let lsl = &ls * l;
            let mut t = &(&ls * x) * l;
            t = &t - &anticommutator(&lsl, x).scale_re(0.5);
            out = &out + &t;
        }
        Ok(out)
    }
}

/// Assemble the d²×d² superoperator matrix of a GKLS generator via the
/// Kronecker identities.
pub fn gkls_superop(g: &GKLSGenerator) -> Result<Superoperator> {
    let d = g.dim();
    let h = g.hamiltonian();
    // i[H, ·] = i (left(H) − right(H))
    let mut s = Superoperator::left_mult(h)
        .sub(&Superoperator::right_mult(h))?
        .scale(I1);
    for l in g.jumps() {
        let ls = l.adjoint();
        let lsl = &ls * l;
        let term = Superoperator::sandwich(&ls, l)?
            .sub(
                &Superoperator::left_mult(&lsl)
                    .add(&Superoperator::right_mult(&lsl))?
                    .scale(C64::new(0.5, 0.0)),
            )?;
        s = s.add(&term)?;
    }
    // The generator must annihilate the identity (unital semigroup).
    let li = s.apply(&Operator::identity(d))?;
    if li.norm() > 1e-10 * (1.0 + s.norm()) {
        return Err(Error::Numerical(format!(
            "assembled generator does not annihilate the identity (‖L(I)‖ = {:.3e})",
            li.norm()
        )));
    }
    Ok(s)
}

/// Classify a generator spectrum: peripheral = {λ : Re λ ≥ −tol}. Enforces
/// 0 ∈ spect, conjugation symmetry, and the closed left half-plane; the
/// exponential gap is −max{Re λ : λ bulk}.
pub fn generator_spectrum_classify(
    s_l: &Superoperator,
    tol: &Tolerances,
) -> Result<(Vec<C64>, Vec<C64>, Vec<C64>, f64)> {
    let eigs = spectral::full_spectrum(s_l)?;
    let scale = s_l.norm().max(1.0);
    let zero_res = eigs.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    if zero_res > 1e-8 * scale {
        return Err(Error::InvalidInput(format!(
            "generator spectrum does not contain 0 (closest eigenvalue at distance {zero_res:.3e})"
        )));
    }
    let max_re = eigs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    if max_re > tol.residual * scale {
        return Err(Error::InvalidInput(format!(
            "generator has an eigenvalue with positive real part ({max_re:.3e})"
        )));
    }
    let ax = spectral::spectrum_axioms(&eigs);
    if ax.conjugation_residual > 1e-7 * scale {
        return Err(Error::InvalidInput(format!(
            "generator spectrum is not conjugation-symmetric (residual {:.3e})",
            ax.conjugation_residual
        )));
    }
    let (peripheral, bulk, gap) =
        spectral::classify_by_rule(&eigs, PeripheralRule::ImaginaryAxis(tol.peripheral));
    Ok((eigs, peripheral, bulk, gap))
}

/// True when two peripheral generator eigenvalues differ by a nonzero
/// multiple of 2πi, so that distinct generator eigenvalues collide after
/// exponentiation to the unit-time map.
pub fn detect_aliasing(peripheral: &[C64]) -> bool {
    let two_pi = std::f64::consts::TAU;
    for (i, &a) in peripheral.iter().enumerate() {
        for &b in &peripheral[i + 1..] {
            let diff = a - b;
            if diff.re.abs() < 1e-8 && diff.im.abs() > 1e-8 {
                let k = diff.im / two_pi;
                if (k - k.round()).abs() < 1e-8 && k.round() != 0.0 {
                    return true;
                }
            }
        }
    }
    false
}

/// Attractor of the semigroup: span of generator eigenoperators with
/// Re λ = 0, cross-checked against the attractor of the unit-time map (unless
/// 2πi aliasing makes that comparison invalid).
pub struct SemigroupAttractor {
    pub subspace: OperatorSubspace,
    pub aliasing_detected: bool,
    /// Equality residual against the unit-time-map attractor.
    pub unit_time_residual: f64,
}

pub fn semigroup_attractor(s_l: &Superoperator, tol: &Tolerances) -> Result<SemigroupAttractor> {
    let split = spectral::spectral_split(s_l, PeripheralRule::ImaginaryAxis(tol.peripheral), tol)?;
    let aliasing = detect_aliasing(&split.peripheral);
    let phi1 = expm(s_l, 1.0)?;
    let attr1 = spectral::attractor_subspace(&phi1, tol)?;
    let residual = split.attr.equality_residual(&attr1)?;
    if !aliasing && residual > 1e-7 {
        return Err(Error::Numerical(format!(
            "semigroup attractor disagrees with unit-time attractor (residual {residual:.3e}) \
             without detected aliasing"
        )));
    }
    Ok(SemigroupAttractor {
        subspace: split.attr,
        aliasing_detected: aliasing,
        unit_time_residual: residual,
    })
}

/// Fixed points of the semigroup (= Ker L) together with the generally larger
/// fixed space of the unit-time map.
pub struct SemigroupFix {
    pub ker_l: OperatorSubspace,
    pub fix_unit_time: OperatorSubspace,
    /// Ker L ⊆ Fix(Φ₁) containment residual (zero up to tolerance always).
    pub containment_residual: f64,
    /// Whether the inclusion is strict (Φ₁ has extra fixed points).
    pub strict: bool,
}

pub fn semigroup_fix(s_l: &Superoperator, tol: &Tolerances) -> Result<SemigroupFix> {
    let d = s_l.dim();
    let ker = OperatorSubspace::from_columns(d, &nullspace(s_l.matrix(), tol.rank)?)?;
    let ker = orthonormalize(ker.basis(), 1e-12).unwrap_or(ker);
    let phi1 = expm(s_l, 1.0)?;
    let fix1 = spectral::fixed_point_subspace(&phi1, tol)?;
    let containment_residual = fix1.containment_residual(&ker)?;
    Ok(SemigroupFix {
        strict: fix1.len() > ker.len(),
        containment_residual,
        ker_l: ker,
        fix_unit_time: fix1,
    })
}

/// Span of the iterated commutators δ_H^j applied to the jump operators and
/// their adjoints, stabilized.
fn stabilized_jump_set(g: &GKLSGenerator, tol: &Tolerances) -> Result<Vec<Operator>> {
    let d = g.dim();
    let mut gens: Vec<Operator> = Vec::new();
    for l in g.jumps() {
        gens.push(l.clone());
        gens.push(l.adjoint());
    }
    if gens.is_empty() {
        return Ok(gens);
    }
    let mut span = orthonormalize(&gens, tol.rank)?;
    let mut frontier = gens.clone();
    for _ in 0..d * d {
        let mut next = Vec::new();
        for f in &frontier {
            let c = commutator(g.hamiltonian(), f);
            if span.residual(&c)? > tol.rank.max(1e-10) * c.norm().max(1.0) {
                next.push(c.clone());
                gens.push(c);
            }
        }
        if next.is_empty() {
            break;
        }
        let mut all = span.basis().to_vec();
        all.extend(next.iter().cloned());
        span = orthonormalize(&all, tol.rank)?;
        frontier = next;
    }
    Ok(gens)
}

/// The decoherence-free algebra of the semigroup: the commutant of the
/// δ_H-stabilized set of jump operators and their adjoints. Cross-validated
/// against the discrete-time algebra of Φ₁ (exhaustively at small dimension,
/// by sampled multiplicativity probes at large dimension) and against the
/// unitary-containment property.
pub fn dfa_markov(g: &GKLSGenerator, tol: &Tolerances) -> Result<dfa::AlgebraDescription> {
    let d = g.dim();
    let gens = stabilized_jump_set(g, tol)?;
    let n = if gens.is_empty() {
        OperatorSubspace::full(d)
    } else {
        commutant(&gens, tol.rank)?
    };

    let sample_times = [0.1, 0.7, 1.3];
    if d <= 8 {
        // Exhaustive cross-validation: N ⊆ dfa_discrete(Φ₁).
        let s_l = gkls_superop(g)?;
        let phi1 = expm(&s_l, 1.0)?;
        let n1 = dfa::dfa_discrete(&phi1, tol)?;
        let res = n1.subspace.containment_residual(&n)?;
        if res > 1e-7 {
            return Err(Error::Numerical(format!(
                "semigroup algebra fails containment in the unit-time algebra \
                 (residual {res:.3e}); sampled-time intersection fallback is advised"
            )));
        }
    }
    // Multiplicativity of Φ_t on N at sampled times, probed against matrix
    // units at small d and random operators at large d.
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0x0dfa);
    let probes: Vec<Operator> = if d <= 8 {
        (0..d * d)
            .map(|a| Operator::matrix_unit(d, a % d, a / d))
            .collect()
    } else {
        (0..6).map(|_| spectral::random_operator(d, &mut rng)).collect()
    };
    // At large dimension the algebra basis itself is sampled with a fixed
    // stride; exhaustive otherwise.
    let stride = (n.len() / 8).max(1);
    let checked: Vec<&Operator> = if d <= 8 {
        n.basis().iter().collect()
    } else {
        n.basis().iter().step_by(stride).collect()
    };
    for &t in &sample_times {
        let pys: Vec<Operator> = probes
            .iter()
            .map(|y| expm_apply_generator(g, t, y))
            .collect::<Result<_>>()?;
        for b in checked.iter().copied() {
            let pb = expm_apply_generator(g, t, b)?;
            for (y, py) in probes.iter().zip(&pys) {
                let r1 = (&expm_apply_generator(g, t, &(y * b))? - &(py * &pb)).norm();
                let r2 = (&expm_apply_generator(g, t, &(b * y))? - &(&pb * py)).norm();
                if r1.max(r2) > 1e-7 {
                    return Err(Error::Numerical(format!(
                        "semigroup algebra fails the multiplicative-domain probe at t = {t} \
                         (residual {:.3e}); sampled-time intersection fallback is advised",
                        r1.max(r2)
                    )));
                }
            }
        }
    }
    let ucr = unitary_containment_check(g, &n, &sample_times)?;
    if ucr > 1e-7 {
        return Err(Error::Numerical(format!(
            "semigroup algebra fails the unitary-containment check (residual {ucr:.3e})"
        )));
    }

    let desc = dfa::algebra_structure(&n, tol)?;
    if !(desc.is_star_closed && desc.is_product_closed && desc.contains_identity) {
        return Err(Error::PropertyViolation(
            "semigroup decoherence-free subspace is not a unital *-algebra".into(),
        ));
    }
    Ok(desc)
}

/// Max over sampled times t and N-basis elements B of
/// ‖Φ_t(B) − e^{itH} B e^{−itH}‖.
pub fn unitary_containment_check(
    g: &GKLSGenerator,
    n: &OperatorSubspace,
    sample_times: &[f64],
) -> Result<f64> {
    let mut max = 0.0f64;
    // Strided sampling of a large algebra basis, exhaustive otherwise.
    let stride = if n.len() > 16 { n.len() / 8 } else { 1 };
    for &t in sample_times {
        let u = expm_matrix(&g.hamiltonian().array().mapv(|z| z * I1 * t))?;
        let u = Operator::new(u)?;
        let us = u.adjoint();
        for b in n.basis().iter().step_by(stride.max(1)) {
            let lhs = expm_apply_generator(g, t, b)?;
            let rhs = &(&u * b) * &us;
            max = max.max((&lhs - &rhs).norm());
        }
    }
    Ok(max)
}

/// Gauge transformation of the GKLS decomposition: shifting each jump by a
/// scalar, L_k ↦ L_k + c_k I, with the compensating Hamiltonian change
/// H ↦ H + (1/2i) Σ (c̄_k L_k − c_k L_k*) + r I leaves the generator itself
/// unchanged — which is verified before returning.
pub fn gauge_transform(g: &GKLSGenerator, shifts: &[C64], r: f64) -> Result<GKLSGenerator> {
    if shifts.len() != g.jumps().len() {
        return Err(Error::InvalidInput(format!(
            "gauge shift count {} does not match jump count {}",
            shifts.len(),
            g.jumps().len()
        )));
    }
    let d = g.dim();
    let mut h = g.hamiltonian().clone();
    let mut corr = Operator::zeros(d);
    for (l, &c) in g.jumps().iter().zip(shifts) {
        corr = &corr + &(&l.scale(c.conj()) - &l.adjoint().scale(c));
    }
    // 1/(2i) = −i/2
    h = &h + &corr.scale(C64::new(0.0, -0.5));
    h = &h + &Operator::identity(d).scale_re(r);
    let jumps: Vec<Operator> = g
        .jumps()
        .iter()
        .zip(shifts)
        .map(|(l, &c)| l + &Operator::identity(d).scale(c))
        .collect();
    let out = GKLSGenerator::new(h, jumps)?;
    let res = gkls_superop(&out)?.sub(&gkls_superop(g)?)?.norm();
    if res > 1e-10 * (1.0 + gkls_superop(g)?.norm()) {
        return Err(Error::Internal(format!(
            "gauge transform changed the generator (residual {res:.3e})"
        )));
    }
    Ok(out)
}

/// Faithfulness of the semigroup plus the attractor/algebra comparison that
/// faithfulness guarantees.
#[derive(Debug, Clone)]
pub struct SemigroupFaithfulness {
    pub faithful: bool,
    pub sigma: Operator,
    pub sigma_min_eigenvalue: f64,
    /// Attr vs N mutual-containment residual (reported for every instance).
    pub attr_equals_dfa_residual: f64,
    /// Equality holding while faithfulness fails — possible, and recorded
    /// rather than treated as a faithfulness certificate.
    pub equality_without_faithfulness: bool,
}

pub fn semigroup_faithful(g: &GKLSGenerator, tol: &Tolerances) -> Result<SemigroupFaithfulness> {
    let n = dfa_markov(g, tol)?.subspace;
    semigroup_faithful_given(g, tol, &n)
}

/// [`semigroup_faithful`] with the decoherence-free algebra already computed
/// (avoids recomputing it when the caller holds one).
pub fn semigroup_faithful_given(
    g: &GKLSGenerator,
    tol: &Tolerances,
    n: &OperatorSubspace,
) -> Result<SemigroupFaithfulness> {
    let d = g.dim();
    let mixed = Operator::identity(d).scale_re(1.0 / d as f64);
    let scale = g
        .jumps()
        .iter()
        .map(|l| l.norm() * l.norm())
        .sum::<f64>()
        .max(1.0);

    // Distinguished stationary state: ergodic (eigenvalue-0) projection of
    // the maximally mixed state under the dual generator. When I/d is itself
    // stationary it already is that projection.
    let (sigma, lam_min) = if g.apply_dual(&mixed)?.norm() <= 1e-10 * scale {
        (mixed.clone(), 1.0 / d as f64)
    } else if d <= 16 {
        let dual = gkls_superop(g)?.hs_adjoint();
        let p0 = spectral::eigenprojector(&dual, |z| z.norm() <= tol.peripheral.max(1e-9))?;
        let raw = devectorize(&p0.apply_vec(&vectorize(&mixed)), d)?;
        let herm = raw.hermitize();
        let (vals, vecs) = crate::op::eigh_decompose(herm.array())?;
        let mut sig = Array2::<C64>::zeros((d, d));
        for (k, &v) in vals.iter().enumerate() {
            if v < tol.psd {
                continue;
            }
            let u = vecs.column(k);
            for a in 0..d {
                for b in 0..d {
                    sig[(a, b)] += C64::new(v, 0.0) * u[a] * u[b].conj();
                }
            }
        }
        let tr: C64 = (0..d).map(|i| sig[(i, i)]).sum();
        if tr.re <= tol.psd {
            return Err(Error::Numerical(
                "distinguished stationary state of the semigroup has vanishing trace".into(),
            ));
        }
        sig.mapv_inplace(|z| z / tr);
        let sigma = Operator::new(sig)?;
        let drift = g.apply_dual(&sigma)?.norm();
        if drift > 1e-7 * scale {
            return Err(Error::Numerical(format!(
                "distinguished state is not annihilated by the dual generator \
                 (‖L*(σ)‖ = {drift:.3e})"
            )));
        }
        let lam_min = sigma.eigvalsh()?[0];
        (sigma, lam_min)
    } else {
        return Err(Error::Numerical(
            "faithfulness at large dimension requires a stationary maximally mixed state \
             (non-unital dual generators above dimension 16 are out of scope)"
                .into(),
        ));
    };
    let faithful = lam_min > tol.rank;

    let attr = if d <= 16 {
        semigroup_attractor(&gkls_superop(g)?, tol)?.subspace
    } else {
        hermitian_semigroup_attractor(g, tol)?
    };
    let residual = attr.equality_residual(n)?;
    if faithful && residual > 1e-7 {
        return Err(Error::PropertyViolation(format!(
            "faithful semigroup with Attr ≠ N (residual {residual:.3e})"
        )));
    }
    Ok(SemigroupFaithfulness {
        faithful,
        sigma,
        sigma_min_eigenvalue: lam_min,
        attr_equals_dfa_residual: residual,
        equality_without_faithfulness: !faithful && residual <= 1e-7,
    })
}

/// Matrix exponential by Padé(13) approximation with scaling and squaring.
pub fn expm_matrix(a: &Array2<C64>) -> Result<Array2<C64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimMismatch("expm: matrix not square".into()));
    }
    if n == 0 {
        return Ok(Array2::zeros((0, 0)));
    }
    // 1-norm (max column sum).
    let norm1 = (0..n)
        .map(|j| (0..n).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0f64, f64::max);
    if !norm1.is_finite() {
        return Err(Error::Numerical("expm: non-finite input".into()));
    }
    let theta13 = 5.371920351148152;
    let s = if norm1 > theta13 {
        (norm1 / theta13).log2().ceil() as u32
    } else {
        0
    };
    if s > 60 {
        return Err(Error::Numerical(format!(
            "expm: norm {norm1:.3e} requires excessive squaring"
        )));
    }
    let a = a.mapv(|z| z / C64::new((2.0f64).powi(s as i32), 0.0));
    let b: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let id = Array2::<C64>::eye(n);
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);
    let w1 = a6.mapv(|z| z * b[13]) + a4.mapv(|z| z * b[11]) + a2.mapv(|z| z * b[9]);
    let w2 = a6.mapv(|z| z * b[7]) + a4.mapv(|z| z * b[5]) + a2.mapv(|z| z * b[3]) + id.mapv(|z| z * b[1]);
    let u = a.dot(&(a6.dot(&w1) + w2));
    let z1 = a6.mapv(|z| z * b[12]) + a4.mapv(|z| z * b[10]) + a2.mapv(|z| z * b[8]);
    let v = a6.dot(&z1) + a6.mapv(|z| z * b[6]) + a4.mapv(|z| z * b[4]) + a2.mapv(|z| z * b[2]) + id.mapv(|z| z * b[0]);
    let denom = (&v - &u)
        .inv()
        .map_err(|e| Error::Numerical(format!("expm: Padé denominator singular: {e}")))?;
    let mut r = denom.dot(&(&v + &u));
    for _ in 0..s {
        r = r.dot(&r);
    }
    Ok(r)
}

/// e^{t L} as a superoperator. Hermitian superoperators (with respect to the
/// Hilbert-Schmidt product) take the spectral route; the general case goes
/// through Padé scaling-and-squaring.
pub fn expm(s: &Superoperator, t: f64) -> Result<Superoperator> {
    let d = s.dim();
    let d2 = d * d;
    if s.hermiticity_defect() <= 1e-12 * s.norm().max(1.0) {
        let (vals, vecs) = crate::op::eigh_decompose(s.matrix())?;
        let mut scaled = Array2::<C64>::zeros((d2, d2));
        for j in 0..d2 {
            let f = C64::new((t * vals[j]).exp(), 0.0);
            for i in 0..d2 {
                scaled[(i, j)] = vecs[(i, j)] * f;
            }
        }
        let vh = vecs.t().mapv(|z| z.conj());
        return Superoperator::new(d, scaled.dot(&vh));
    }
    Superoperator::new(d, expm_matrix(&s.matrix().mapv(|z| z * C64::new(t, 0.0)))?)
}

/// Action of e^{t L} on a single vectorized operator by substepped Taylor
/// series — avoids materializing the exponential at large dimension.
pub fn expm_apply(s: &Superoperator, t: f64, v: &Array1<C64>) -> Result<Array1<C64>> {
    let norm = s.norm();
    let steps = ((t.abs() * norm).ceil() as usize).max(1);
    let h = t / steps as f64;
    let mut y = v.clone();
    for _ in 0..steps {
        let mut term = y.clone();
        let mut acc = y.clone();
        for k in 1..=80u32 {
            term = s.apply_vec(&term).mapv(|z| z * C64::new(h / k as f64, 0.0));
            acc = &acc + &term;
            let tn = term.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let an = acc.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if tn <= 1e-16 * an.max(1e-300) {
                break;
            }
        }
        y = acc;
    }
    Ok(y)
}

/// Weights w_k of a jump family L_k = √w_k U_k with every U_k a self-adjoint
/// unitary and every pair either commuting or anticommuting, when the
/// generator has that form (and H = 0); `None` otherwise. For such a family
/// the sandwich superoperators pairwise commute and square to w_k² times the
/// identity, so e^{tL} factors into closed-form cosh/sinh maps.
fn involutive_jump_weights(g: &GKLSGenerator) -> Option<Vec<f64>> {
    let d = g.dim();
    let scale = g
        .jumps()
        .iter()
        .map(|l| l.norm())
        .fold(1.0f64, f64::max);
    let tiny = 1e-12 * scale * scale;
    if g.hamiltonian().norm() > 1e-12 * scale {
        return None;
    }
    let mut weights = Vec::with_capacity(g.jumps().len());
    for l in g.jumps() {
        if l.hermiticity_defect() > tiny {
            return None;
        }
        // L² = wI with w = ‖L‖²/d for a scaled self-adjoint unitary.
        let w = l.norm() * l.norm() / d as f64;
        let sq = l * l;
        if (&sq - &Operator::identity(d).scale_re(w)).norm() > tiny {
            return None;
        }
        weights.push(w);
    }
    for (i, li) in g.jumps().iter().enumerate() {
        for lj in &g.jumps()[i + 1..] {
            let prod = li * lj;
            let swapped = lj * li;
            let comm = (&prod - &swapped).norm();
            let anti = (&prod + &swapped).norm();
            if comm.min(anti) > tiny {
                return None;
            }
        }
    }
    Some(weights)
}

/// Action of Φ_t = e^{tL} on a single operator, computed from the generator
/// itself by substepped Taylor series — no superoperator matrix is ever
/// materialized, which keeps large-dimension instances tractable. When the
/// jumps form a (anti)commuting family of scaled self-adjoint unitaries with
/// H = 0, the exact product formula
/// e^{t(S_k − w_k)} = e^{−t w_k}(cosh(t w_k)·id + sinh(t w_k)·S_k/w_k)
/// is used instead, term by term.
pub fn expm_apply_generator(g: &GKLSGenerator, t: f64, x: &Operator) -> Result<Operator> {
    if let Some(weights) = involutive_jump_weights(g) {
        let mut y = x.clone();
        for (l, &w) in g.jumps().iter().zip(&weights) {
            if w <= 0.0 {
                continue;
            }
            let tw = t * w;
            let sandwich = &(l * &y) * l;
            y = &y.scale_re((-tw).exp() * tw.cosh())
                + &sandwich.scale_re((-tw).exp() * tw.sinh() / w);
        }
        return Ok(y);
    }
    // Spectral-norm estimate of L for the substep count; only efficiency
    // depends on it.
    let mut bound = 2.0 * crate::op::operator_norm_estimate(g.hamiltonian());
    for l in g.jumps() {
        let s = crate::op::operator_norm_estimate(l);
        bound += 2.0 * s * s;
    }
    let steps = ((t.abs() * bound).ceil() as usize).max(1);
    let h = t / steps as f64;
    let mut y = x.clone();
    for _ in 0..steps {
        let mut term = y.clone();
        let mut acc = y.clone();
        for k in 1..=80u32 {
            term = g.apply(&term)?.scale_re(h / k as f64);
            acc = &acc + &term;
            if term.norm() <= 1e-16 * acc.norm().max(1e-300) {
                break;
            }
        }
        y = acc;
    }
    Ok(y)
}

/// Attractor of a semigroup whose generator is Hermitian as a superoperator
/// (H ≈ 0 and every jump self-adjoint): the spectrum is then real and
/// nonpositive, so the attractor is exactly Ker L, which in turn is the joint
/// commutant of the jumps (the generator is a sum of negative-semidefinite
/// double commutators). Verified by applying L to the result. This route
/// avoids any dense eigendecomposition and stays cheap at large dimension.
pub fn hermitian_semigroup_attractor(
    g: &GKLSGenerator,
    tol: &Tolerances,
) -> Result<OperatorSubspace> {
    let scale = g
        .jumps()
        .iter()
        .map(|l| l.norm())
        .fold(g.hamiltonian().norm(), f64::max)
        .max(1.0);
    if g.hamiltonian().norm() > 1e-12 * scale
        || g.jumps().iter().any(|l| l.hermiticity_defect() > 1e-12 * scale)
    {
        return Err(Error::InvalidInput(
            "hermitian semigroup route requires H = 0 and self-adjoint jumps".into(),
        ));
    }
    let d = g.dim();
    let n = if g.jumps().is_empty() {
        OperatorSubspace::full(d)
    } else {
        commutant(g.jumps(), tol.rank)?
    };
    let mut res = 0.0f64;
    for b in n.basis() {
        res = res.max(g.apply(b)?.norm());
    }
    if res > 1e-8 * scale * scale {
        return Err(Error::Numerical(format!(
            "hermitian semigroup kernel candidate is not annihilated by L (residual {res:.3e})"
        )));
    }
    Ok(n)
}
