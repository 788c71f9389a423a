//! Spectrum computation and classification for superoperators: peripheral and
//! bulk spectra, spectral gap, attractor/fixed-point/transient subspaces,
//! peripheral projection, and the asymptotic map.
//!
//! The spectral projector is built from an ordered Schur decomposition (the
//! selected eigenvalues reordered into the leading block, then decoupled with
//! a triangular Sylvester solve) rather than a Jordan form, which keeps the
//! construction backward-stable and tolerant of defective bulk eigenvalues.
//! Superoperators that are Hermitian with respect to the Hilbert-Schmidt
//! product take a cheaper symmetric-eigensolver route.

use ndarray::Array2;
use ndarray_linalg::Eig;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::op::{
    devectorize, nullspace, orthonormalize, Operator, OperatorSubspace, Superoperator, Tolerances,
};
use crate::schur;

/// Which part of the spectrum counts as peripheral.
#[derive(Debug, Clone, Copy)]
pub enum PeripheralRule {
    /// |λ| ≥ 1 − tol: UCP maps (discrete time).
    UnitCircle(f64),
    /// Re λ ≥ −tol: semigroup generators (continuous time).
    ImaginaryAxis(f64),
}

impl PeripheralRule {
    pub fn is_peripheral(&self, z: C64) -> bool {
        match *self {
            PeripheralRule::UnitCircle(tol) => z.norm() >= 1.0 - tol,
            PeripheralRule::ImaginaryAxis(tol) => z.re >= -tol,
        }
    }

    /// Gap to the peripheral boundary for a bulk eigenvalue.
    fn bulk_distance(&self, z: C64) -> f64 {
        match *self {
            PeripheralRule::UnitCircle(_) => 1.0 - z.norm(),
            PeripheralRule::ImaginaryAxis(_) => -z.re,
        }
    }
}

/// Deterministic eigenvalue ordering: by modulus (descending), then real part,
/// then imaginary part.
pub fn sort_eigenvalues(eigs: &mut [C64]) {
    eigs.sort_by(|a, b| {
        b.norm()
            .partial_cmp(&a.norm())
            .unwrap()
            .then(b.re.partial_cmp(&a.re).unwrap())
            .then(b.im.partial_cmp(&a.im).unwrap())
    });
}

/// All d² eigenvalues of the superoperator matrix, with multiplicity, in the
/// deterministic order of [`sort_eigenvalues`].
pub fn full_spectrum(s: &Superoperator) -> Result<Vec<C64>> {
    let (w, _) = s
        .matrix()
        .eig()
        .map_err(|e| Error::Numerical(format!("eigensolver failed: {e}")))?;
    let mut eigs = w.to_vec();
    sort_eigenvalues(&mut eigs);
    Ok(eigs)
}

/// Partition a spectrum into peripheral and bulk parts and compute the gap
/// (1 minus the largest bulk modulus; 1 when the bulk is empty).
pub fn classify_and_gap(eigs: &[C64], tol_peripheral: f64) -> (Vec<C64>, Vec<C64>, f64) {
    classify_by_rule(eigs, PeripheralRule::UnitCircle(tol_peripheral))
}

/// Rule-generic classification. For the imaginary-axis rule the "gap" is the
/// exponential gap −max{Re λ : λ bulk}, again capped at the convention value
/// 1 for the unit-circle rule when the bulk is empty.
pub fn classify_by_rule(eigs: &[C64], rule: PeripheralRule) -> (Vec<C64>, Vec<C64>, f64) {
    let mut peripheral = Vec::new();
    let mut bulk = Vec::new();
    for &z in eigs {
        if rule.is_peripheral(z) {
            peripheral.push(z);
        } else {
            bulk.push(z);
        }
    }
    let gap = match rule {
        PeripheralRule::UnitCircle(_) => bulk
            .iter()
            .map(|&z| rule.bulk_distance(z))
            .fold(f64::INFINITY, f64::min)
            .min(1.0),
        PeripheralRule::ImaginaryAxis(_) => bulk
            .iter()
            .map(|&z| rule.bulk_distance(z))
            .fold(f64::INFINITY, f64::min),
    };
    let gap = if bulk.is_empty() {
        match rule {
            PeripheralRule::UnitCircle(_) => 1.0,
            PeripheralRule::ImaginaryAxis(_) => f64::INFINITY,
        }
    } else {
        gap
    };
    (peripheral, bulk, gap)
}

/// Spectral splitting of a superoperator along a peripheral rule: the
/// invariant-subspace basis for the selected eigenvalues, the spectral
/// projector onto it, and the restricted (asymptotic) map.
pub struct SpectralSplit {
    pub eigenvalues: Vec<C64>,
    pub peripheral: Vec<C64>,
    pub bulk: Vec<C64>,
    pub gap: f64,
    /// HS-orthonormal basis of the selected invariant subspace.
    pub attr: OperatorSubspace,
    /// Spectral projector onto `attr` along the complementary invariant
    /// subspace.
    pub projector: Superoperator,
    /// The map restricted to `attr`, in the `attr` basis coordinates.
    pub asymptotic: Array2<C64>,
    /// Whether the cheap Hermitian route was taken.
    pub hermitian: bool,
}

/// Check peripheral semisimplicity inside the leading triangular block: for
/// each distinct selected eigenvalue the geometric multiplicity must match
/// the algebraic one.
fn check_semisimple(t11: &Array2<C64>, tol: &Tolerances) -> Result<()> {
    let m = t11.nrows();
    if m <= 1 {
        return Ok(());
    }
    let mut remaining: Vec<C64> = (0..m).map(|i| t11[(i, i)]).collect();
    let cluster_tol = 1e-7f64.max(tol.peripheral);
    while let Some(&lam) = remaining.first() {
        let mult = remaining.iter().filter(|z| (*z - lam).norm() <= cluster_tol).count();
        remaining.retain(|z| (*z - lam).norm() > cluster_tol);
        let shifted = t11 - &(Array2::<C64>::eye(m) * lam);
        let ns = nullspace(&shifted, cluster_tol)?;
        if ns.ncols() < mult {
            return Err(Error::Numerical(format!(
                "peripheral eigenvalue {lam} is not semisimple: geometric multiplicity {} < algebraic {}",
                ns.ncols(),
                mult
            )));
        }
    }
    Ok(())
}

/// Compute the spectral split of `s` for the given peripheral rule.
pub fn spectral_split(
    s: &Superoperator,
    rule: PeripheralRule,
    tol: &Tolerances,
) -> Result<SpectralSplit> {
    let d = s.dim();
    let d2 = d * d;
    let scale = s.norm().max(1.0);
    if s.hermiticity_defect() <= 1e-12 * scale {
        return spectral_split_hermitian(s, rule, tol);
    }

    let os = schur::ordered_schur(s.matrix(), |z| rule.is_peripheral(z))?;
    let m = os.selected;
    let mut eigs = os.eigenvalues.clone();
    sort_eigenvalues(&mut eigs);
    let (peripheral, bulk, gap) = classify_by_rule(&eigs, rule);

    let t11 = os.t.slice(ndarray::s![..m, ..m]).to_owned();
    check_semisimple(&t11, tol)?;

    // Attractor basis: the leading Schur vectors, devectorized. Unitary Q
    // makes them HS-orthonormal.
    let attr = if m == 0 {
        OperatorSubspace::empty(d)
    } else {
        OperatorSubspace::from_columns(d, &os.q.slice(ndarray::s![.., ..m]).to_owned())?
    };

    // Spectral projector: with T = [[T11, T12], [0, T22]] and R solving
    // T11 R − R T22 = T12, the projector is Q [[I, R], [0, 0]] Q^H.
    let projector = if m == d2 {
        Superoperator::identity(d)
    } else if m == 0 {
        Superoperator::zeros(d)
    } else {
        let t12 = os.t.slice(ndarray::s![..m, m..]).to_owned();
        let t22 = os.t.slice(ndarray::s![m.., m..]).to_owned();
        let r = schur::sylvester_triangular(&t11, &t22, &t12)?;
        let mut inner = Array2::<C64>::zeros((d2, d2));
        for i in 0..m {
            inner[(i, i)] = C64::new(1.0, 0.0);
            for j in 0..(d2 - m) {
                inner[(i, m + j)] = r[(i, j)];
            }
        }
        let qh = os.q.t().mapv(|z| z.conj());
        Superoperator::new(d, os.q.dot(&inner).dot(&qh))?
    };

    Ok(SpectralSplit {
        eigenvalues: eigs,
        peripheral,
        bulk,
        gap,
        attr,
        projector,
        asymptotic: t11,
        hermitian: false,
    })
}

fn spectral_split_hermitian(
    s: &Superoperator,
    rule: PeripheralRule,
    tol: &Tolerances,
) -> Result<SpectralSplit> {
    let _ = tol;
    let d = s.dim();
    let (vals, vecs) = crate::op::eigh_decompose(s.matrix())?;
    let mut eigs: Vec<C64> = vals.iter().map(|&v| C64::new(v, 0.0)).collect();
    let sel: Vec<usize> = (0..eigs.len())
        .filter(|&i| rule.is_peripheral(eigs[i]))
        .collect();
    let m = sel.len();
    let d2 = d * d;

    let mut qp = Array2::<C64>::zeros((d2, m));
    let mut asymptotic = Array2::<C64>::zeros((m, m));
    for (c, &i) in sel.iter().enumerate() {
        for r in 0..d2 {
            qp[(r, c)] = vecs[(r, i)];
        }
        asymptotic[(c, c)] = eigs[i];
    }
    let attr = if m == 0 {
        OperatorSubspace::empty(d)
    } else {
        OperatorSubspace::from_columns(d, &qp)?
    };
    // Orthogonal projector: Hermitian superoperators have orthogonal spectral
    // subspaces.
    let projector = if m == d2 {
        Superoperator::identity(d)
    } else if m == 0 {
        Superoperator::zeros(d)
    } else {
        let qph = qp.t().mapv(|z| z.conj());
        Superoperator::new(d, qp.dot(&qph))?
    };
    sort_eigenvalues(&mut eigs);
    let (peripheral, bulk, gap) = classify_by_rule(&eigs, rule);
    Ok(SpectralSplit {
        eigenvalues: eigs,
        peripheral,
        bulk,
        gap,
        attr,
        projector,
        asymptotic,
        hermitian: true,
    })
}

/// Full spectral analysis of a (discrete-time) UCP superoperator.
pub struct SpectralAnalysis {
    pub eigenvalues: Vec<C64>,
    pub peripheral: Vec<C64>,
    pub bulk: Vec<C64>,
    pub gap: f64,
    pub attr: OperatorSubspace,
    pub fix: OperatorSubspace,
    pub transient: OperatorSubspace,
    pub p_peripheral: Superoperator,
    /// Restriction of the map to Attr, in the attr basis.
    pub asymptotic: Array2<C64>,
}

/// Analyze a UCP superoperator: spectrum, gap, Attr, Fix, transient part, and
/// the peripheral projection.
pub fn analyze(s: &Superoperator, tol: &Tolerances) -> Result<SpectralAnalysis> {
    let split = spectral_split(s, PeripheralRule::UnitCircle(tol.peripheral), tol)?;
    let fix = fixed_point_subspace(s, tol)?;
    let transient = transient_from_split(s, &split, tol)?;

    // Attr must be invariant under the map.
    let mut inv_residual = 0.0f64;
    for b in split.attr.basis() {
        inv_residual = inv_residual.max(split.attr.residual(&s.apply(b)?)?);
    }
    if inv_residual > 10.0 * tol.residual {
        return Err(Error::Numerical(format!(
            "attractor subspace is not invariant (residual {inv_residual:.3e}); \
             input may not be a UCP map at the configured tolerances"
        )));
    }

    Ok(SpectralAnalysis {
        eigenvalues: split.eigenvalues,
        peripheral: split.peripheral,
        bulk: split.bulk,
        gap: split.gap,
        attr: split.attr,
        fix,
        transient,
        p_peripheral: split.projector,
        asymptotic: split.asymptotic,
    })
}

/// Orthonormal basis of span of peripheral eigenvectors.
pub fn attractor_subspace(s: &Superoperator, tol: &Tolerances) -> Result<OperatorSubspace> {
    Ok(spectral_split(s, PeripheralRule::UnitCircle(tol.peripheral), tol)?.attr)
}

/// Eigenspace at λ = 1: the nullspace of S − id.
pub fn fixed_point_subspace(s: &Superoperator, tol: &Tolerances) -> Result<OperatorSubspace> {
    let d = s.dim();
    let shifted = s.matrix() - &Array2::<C64>::eye(d * d);
    let ns = nullspace(&shifted, tol.rank)?;
    OperatorSubspace::from_columns(d, &ns)
}

/// The idempotent UCP map projecting onto Attr along the transient part.
pub fn peripheral_projection(s: &Superoperator, tol: &Tolerances) -> Result<Superoperator> {
    Ok(spectral_split(s, PeripheralRule::UnitCircle(tol.peripheral), tol)?.projector)
}

/// Kernel of the peripheral projection.
pub fn transient_subspace(s: &Superoperator, tol: &Tolerances) -> Result<OperatorSubspace> {
    let split = spectral_split(s, PeripheralRule::UnitCircle(tol.peripheral), tol)?;
    transient_from_split(s, &split, tol)
}

/// Build the transient subspace from a spectral split without recomputing the
/// Schur form: in Schur coordinates ker [[I,R],[0,0]] = range [[-R],[I]].
pub fn transient_from_split(
    s: &Superoperator,
    split: &SpectralSplit,
    _tol: &Tolerances,
) -> Result<OperatorSubspace> {
    let d = s.dim();
    let d2 = d * d;
    let m = split.attr.len();
    if m == d2 {
        return Ok(OperatorSubspace::empty(d));
    }
    // Columns of I − P span the kernel of P.
    let p = split.projector.matrix();
    let ip = &Array2::<C64>::eye(d2) - p;
    let mut cols = Vec::with_capacity(d2);
    for j in 0..d2 {
        cols.push(devectorize(&ip.column(j).to_owned(), d)?);
    }
    let sub = orthonormalize(&cols, 1e-9)?;
    if sub.len() != d2 - m {
        return Err(Error::Numerical(format!(
            "transient subspace dimension {} does not complement attractor dimension {m} in {d2}",
            sub.len()
        )));
    }
    Ok(sub)
}

/// Representation of S restricted to Attr in the attr basis; the restriction
/// must be invariant and have unimodular spectrum.
pub fn asymptotic_map(
    s: &Superoperator,
    attr: &OperatorSubspace,
    tol: &Tolerances,
) -> Result<Array2<C64>> {
    let m = attr.len();
    let mut a = Array2::<C64>::zeros((m, m));
    for (j, bj) in attr.basis().iter().enumerate() {
        let img = s.apply(bj)?;
        if attr.residual(&img)? > 10.0 * tol.residual {
            return Err(Error::Numerical(
                "asymptotic map: attr basis is not invariant under the map".into(),
            ));
        }
        for (i, bi) in attr.basis().iter().enumerate() {
            a[(i, j)] = crate::op::hs_inner(bi, &img)?;
        }
    }
    Ok(a)
}

/// Verdict of the direct-sum decomposition check B(H) = Attr ⊕ T.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct JdlgReport {
    pub dim_attr: usize,
    pub dim_transient: usize,
    pub dims_complete: bool,
    pub intersection_dim: usize,
    pub reconstruction_residual: f64,
    /// Max over checked steps of ‖Sⁿ(x_t)‖ / ((1−gap+0.05)ⁿ ‖x_t‖).
    pub conditioning_factor: f64,
    /// ‖Sⁿ(x_t)‖ at the final checked step, relative to ‖x_t‖.
    pub final_transient_norm: f64,
    pub transient_decays: bool,
}

/// Verify the Jacobs-de Leeuw-Glicksberg decomposition on a random operator:
/// dimensions complement, trivial intersection, exact reconstruction, and
/// geometric decay of the transient component.
pub fn jdlg_verify(
    s: &Superoperator,
    analysis: &SpectralAnalysis,
    tol: &Tolerances,
    seed: u64,
) -> Result<JdlgReport> {
    let d = s.dim();
    let d2 = d * d;
    let dim_attr = analysis.attr.len();
    let dim_transient = analysis.transient.len();
    let dims_complete = dim_attr + dim_transient == d2;
    let inter = crate::op::subspace_intersect(&analysis.attr, &analysis.transient, 1e-7)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = Array2::<C64>::zeros((d, d));
    for z in m.iter_mut() {
        *z = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
    }
    let x = Operator::new(m)?;
    let x_attr = devectorize(&analysis.p_peripheral.apply_vec(&crate::op::vectorize(&x)), d)?;
    let x_trans = &x - &x_attr;
    let reconstruction_residual = (&x - &(&x_attr + &x_trans)).norm()
        + analysis.attr.residual(&x_attr)?
        + analysis.transient.residual(&x_trans)?;

    let gap = analysis.gap;
    let rho = (1.0 - gap + 0.05).clamp(0.05, 1.0);
    let xt_norm = x_trans.norm().max(1e-300);
    let n_steps = if dim_transient == 0 {
        0
    } else {
        ((20.0 / gap.max(0.05)).ceil() as usize).min(2000)
    };
    let mut v = crate::op::vectorize(&x_trans);
    let mut kappa = 1.0f64;
    let mut final_rel = if dim_transient == 0 { 0.0 } else { 1.0 };
    let mut bound = 1.0f64;
    for _ in 0..n_steps {
        v = s.apply_vec(&v);
        bound *= rho;
        let rel = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() / xt_norm;
        kappa = kappa.max(rel / bound.max(1e-300));
        final_rel = rel;
    }
    // Continue to n = 50/gap for the hard decay check.
    let extra = if dim_transient == 0 {
        0
    } else {
        ((50.0 / gap.max(0.05)).ceil() as usize).min(5000).saturating_sub(n_steps)
    };
    for _ in 0..extra {
        v = s.apply_vec(&v);
        final_rel = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() / xt_norm;
    }
    let transient_decays = dim_transient == 0 || final_rel <= 1e-6;
    if !dims_complete || inter.len() != 0 || reconstruction_residual > 10.0 * tol.residual {
        return Err(Error::Numerical(format!(
            "JdLG decomposition failed: dims {dim_attr}+{dim_transient} vs {d2}, \
             intersection {}, reconstruction residual {reconstruction_residual:.3e}",
            inter.len()
        )));
    }
    Ok(JdlgReport {
        dim_attr,
        dim_transient,
        dims_complete,
        intersection_dim: inter.len(),
        reconstruction_residual,
        conditioning_factor: kappa,
        final_transient_norm: final_rel,
        transient_decays,
    })
}

/// Spectral projector onto the invariant subspace of the eigenvalues picked
/// by `select`, along the complementary invariant subspace. Same construction
/// as [`spectral_split`] but for an arbitrary eigenvalue predicate (used for
/// the ergodic projector at λ = 1).
pub fn eigenprojector(s: &Superoperator, select: impl Fn(C64) -> bool) -> Result<Superoperator> {
    let d = s.dim();
    let d2 = d * d;
    let scale = s.norm().max(1.0);
    if s.hermiticity_defect() <= 1e-12 * scale {
        let (vals, vecs) = crate::op::eigh_decompose(s.matrix())?;
        let sel: Vec<usize> = (0..d2)
            .filter(|&i| select(C64::new(vals[i], 0.0)))
            .collect();
        let mut qp = Array2::<C64>::zeros((d2, sel.len()));
        for (c, &i) in sel.iter().enumerate() {
            for r in 0..d2 {
                qp[(r, c)] = vecs[(r, i)];
            }
        }
        let qph = qp.t().mapv(|z| z.conj());
        return Superoperator::new(d, qp.dot(&qph));
    }
    let os = schur::ordered_schur(s.matrix(), &select)?;
    let m = os.selected;
    if m == d2 {
        return Ok(Superoperator::identity(d));
    }
    if m == 0 {
        return Ok(Superoperator::zeros(d));
    }
    let t11 = os.t.slice(ndarray::s![..m, ..m]).to_owned();
    let t12 = os.t.slice(ndarray::s![..m, m..]).to_owned();
    let t22 = os.t.slice(ndarray::s![m.., m..]).to_owned();
    let r = schur::sylvester_triangular(&t11, &t22, &t12)?;
    let mut inner = Array2::<C64>::zeros((d2, d2));
    for i in 0..m {
        inner[(i, i)] = C64::new(1.0, 0.0);
        for j in 0..(d2 - m) {
            inner[(i, m + j)] = r[(i, j)];
        }
    }
    let qh = os.q.t().mapv(|z| z.conj());
    Superoperator::new(d, os.q.dot(&inner).dot(&qh))
}

/// Residuals for the UCP spectrum axioms: 1 ∈ spect(Φ), conjugation symmetry,
/// and max |λ| ≤ 1.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SpectrumAxioms {
    pub contains_one_residual: f64,
    pub conjugation_residual: f64,
    pub max_modulus: f64,
}

pub fn spectrum_axioms(eigs: &[C64]) -> SpectrumAxioms {
    let one = C64::new(1.0, 0.0);
    let contains_one_residual = eigs
        .iter()
        .map(|&z| (z - one).norm())
        .fold(f64::INFINITY, f64::min);
    // Greedy bipartite pairing of the spectrum with its conjugate.
    let mut used = vec![false; eigs.len()];
    let mut conj_res = 0.0f64;
    for &z in eigs {
        let zc = z.conj();
        let mut best = f64::INFINITY;
        let mut best_i = usize::MAX;
        for (i, &w) in eigs.iter().enumerate() {
            if !used[i] {
                let d = (w - zc).norm();
                if d < best {
                    best = d;
                    best_i = i;
                }
            }
        }
        if best_i != usize::MAX {
            used[best_i] = true;
            conj_res = conj_res.max(best);
        }
    }
    let max_modulus = eigs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    SpectrumAxioms {
        contains_one_residual,
        conjugation_residual: conj_res,
        max_modulus,
    }
}

/// Random unit-norm operator (test/probe helper shared by theorem checks).
pub fn random_operator(d: usize, rng: &mut impl Rng) -> Operator {
    let mut m = Array2::<C64>::zeros((d, d));
    for z in m.iter_mut() {
        *z = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
    }
    let op = Operator::new(m).expect("finite random entries");
    let n = op.norm();
    op.scale_re(1.0 / n)
}

/// Verify the limit law P_P = lim Φ^{n_i}. When every peripheral phase is
/// (numerically) rational with small denominator, the subsequence n_i = i·r
/// with r the common period is constructive and the limit is checked
/// directly; otherwise only ‖Sⁿ(id − P_P)‖ → 0 together with unimodularity of
/// the peripheral part is verified.
pub fn peripheral_limit_residual(
    s: &Superoperator,
    split: &SpectralAnalysis,
    max_denominator: usize,
    steps: usize,
) -> Result<f64> {
    // Try to find a common period r with λ^r ≈ 1 for all peripheral λ.
    let mut period: Option<usize> = None;
    'outer: for r in 1..=max_denominator {
        for &lam in &split.peripheral {
            let mut p = C64::new(1.0, 0.0);
            for _ in 0..r {
                p *= lam;
            }
            if (p - C64::new(1.0, 0.0)).norm() > 1e-9 {
                continue 'outer;
            }
        }
        period = Some(r);
        break;
    }
    let d = s.dim();
    match period {
        Some(r) => {
            // ‖S^{i·r} − P_P‖ at i = steps.
            let mut power = Superoperator::identity(d);
            for _ in 0..(r * steps) {
                power = power.compose(s)?;
            }
            Ok(power.sub(&split.p_peripheral)?.norm())
        }
        None => {
            // ‖Sⁿ(id − P_P)‖ → 0.
            let id = Superoperator::identity(d);
            let mut rest = id.sub(&split.p_peripheral)?;
            for _ in 0..steps {
                rest = s.compose(&rest)?;
            }
            Ok(rest.norm())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::op::{hs_inner, Picture};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn dephasing(p: f64) -> Superoperator {
        let k = vec![
            Operator::identity(2).scale_re((1.0 - p).sqrt()),
            Operator::pauli_z().scale_re(p.sqrt()),
        ];
        Superoperator::from_kraus(&k, Picture::Heisenberg).unwrap()
    }

    fn depolarize2() -> Superoperator {
        // X ↦ tr(X)/2 · I
        let iv = crate::op::vectorize(&Operator::identity(2));
        let mut m = Array2::zeros((4, 4));
        for r in 0..4 {
            for cc in 0..4 {
                m[(r, cc)] = iv[r] * iv[cc].conj() / c(2.0, 0.0);
            }
        }
        Superoperator::new(2, m).unwrap()
    }

    #[test]
    fn spectrum_identity_channel() {
        let eigs = full_spectrum(&Superoperator::identity(2)).unwrap();
        assert!(eigs.iter().all(|z| (z - c(1.0, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn spectrum_dephasing() {
        let mut eigs = full_spectrum(&dephasing(0.25)).unwrap();
        sort_eigenvalues(&mut eigs);
        let expect = [1.0, 1.0, 0.5, 0.5];
        for (e, x) in eigs.iter().zip(expect.iter()) {
            assert!((e - c(*x, 0.0)).norm() < 1e-12, "{eigs:?}");
        }
    }

    #[test]
    fn spectrum_depolarizing() {
        let mut eigs = full_spectrum(&depolarize2()).unwrap();
        sort_eigenvalues(&mut eigs);
        assert!((eigs[0] - c(1.0, 0.0)).norm() < 1e-12);
        for z in &eigs[1..] {
            assert!(z.norm() < 1e-12);
        }
    }

    #[test]
    fn classify_examples() {
        let (p, b, gap) = classify_and_gap(&[c(1.0, 0.0), c(1.0, 0.0), c(0.5, 0.0), c(0.5, 0.0)], 1e-9);
        assert_eq!((p.len(), b.len()), (2, 2));
        assert!((gap - 0.5).abs() < 1e-12);

        let (_, b, gap) = classify_and_gap(&[c(1.0, 0.0); 4], 1e-9);
        assert!(b.is_empty());
        assert_eq!(gap, 1.0);

        let th = std::f64::consts::PI / 3.0;
        let eigs = [c(1.0, 0.0), C64::from_polar(1.0, th), c(0.9, 0.0), c(0.0, 0.0)];
        let (p, _, gap) = classify_and_gap(&eigs, 1e-9);
        assert_eq!(p.len(), 2);
        assert!((gap - 0.1).abs() < 1e-12);
    }

    #[test]
    fn attractor_cases() {
        let tol = Tolerances::default();
        assert_eq!(attractor_subspace(&Superoperator::identity(2), &tol).unwrap().len(), 4);

        let attr = attractor_subspace(&dephasing(0.25), &tol).unwrap();
        assert_eq!(attr.len(), 2);
        let iz = orthonormalize(&[Operator::identity(2), Operator::pauli_z()], 1e-9).unwrap();
        assert!(attr.equality_residual(&iz).unwrap() < 1e-10);

        let attr = attractor_subspace(&depolarize2(), &tol).unwrap();
        assert_eq!(attr.len(), 1);
        assert!(attr.residual(&Operator::identity(2)).unwrap() < 1e-10);
    }

    #[test]
    fn fixed_points_cases() {
        let tol = Tolerances::default();
        let u = Operator::diag(&[c(1.0, 0.0), C64::from_polar(1.0, std::f64::consts::FRAC_PI_2)]);
        let s = Superoperator::from_kraus(&[u], Picture::Heisenberg).unwrap();
        let fix = fixed_point_subspace(&s, &tol).unwrap();
        assert_eq!(fix.len(), 2);
        assert!(fix.residual(&Operator::matrix_unit(2, 0, 0)).unwrap() < 1e-10);
        assert!(fix.residual(&Operator::matrix_unit(2, 1, 1)).unwrap() < 1e-10);

        assert_eq!(fixed_point_subspace(&dephasing(0.25), &tol).unwrap().len(), 2);
        assert_eq!(fixed_point_subspace(&Superoperator::identity(2), &tol).unwrap().len(), 4);
    }

    #[test]
    fn peripheral_projection_cases() {
        let tol = Tolerances::default();
        let p = peripheral_projection(&Superoperator::identity(2), &tol).unwrap();
        assert!(p.sub(&Superoperator::identity(2)).unwrap().norm() < 1e-12);

        // Dephasing: P equals lim Φⁿ (entries 0.5ⁿ → 0).
        let s = dephasing(0.25);
        let p = peripheral_projection(&s, &tol).unwrap();
        let mut power = Superoperator::identity(2);
        for _ in 0..60 {
            power = power.compose(&s).unwrap();
        }
        assert!(p.sub(&power).unwrap().norm() < 1e-12);
        // Idempotent, commutes with S.
        assert!(p.compose(&p).unwrap().sub(&p).unwrap().norm() < 1e-12);
        assert!(p.compose(&s).unwrap().sub(&s.compose(&p).unwrap()).unwrap().norm() < 1e-12);

        // Depolarizing map is already idempotent: P = S.
        let s = depolarize2();
        let p = peripheral_projection(&s, &tol).unwrap();
        assert!(p.sub(&s).unwrap().norm() < 1e-10);
    }

    #[test]
    fn peripheral_projection_is_ucp() {
        let tol = Tolerances::default();
        let p = peripheral_projection(&dephasing(0.25), &tol).unwrap();
        let rep = crate::op::validate_ucp(&p, &tol).unwrap();
        assert!(rep.is_cp && rep.is_unital);
    }

    #[test]
    fn transient_cases() {
        let tol = Tolerances::default();
        let t = transient_subspace(&dephasing(0.25), &tol).unwrap();
        assert_eq!(t.len(), 2);
        let xy = orthonormalize(&[Operator::pauli_x(), Operator::pauli_y()], 1e-9).unwrap();
        assert!(t.equality_residual(&xy).unwrap() < 1e-10);

        assert_eq!(transient_subspace(&Superoperator::identity(2), &tol).unwrap().len(), 0);
        assert_eq!(transient_subspace(&depolarize2(), &tol).unwrap().len(), 3);
    }

    #[test]
    fn asymptotic_map_cases() {
        let tol = Tolerances::default();
        // Dephasing: identity on {I, Z} coordinates.
        let s = dephasing(0.25);
        let attr = attractor_subspace(&s, &tol).unwrap();
        let a = asymptotic_map(&s, &attr, &tol).unwrap();
        assert!((&a - &Array2::<C64>::eye(2)).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() < 1e-10);

        // Unitary channel: eigenvalues e^{i(θ_i − θ_j)}.
        let th = std::f64::consts::PI / 3.0;
        let u = Operator::diag(&[c(1.0, 0.0), C64::from_polar(1.0, th)]);
        let s = Superoperator::from_kraus(&[u], Picture::Heisenberg).unwrap();
        let attr = attractor_subspace(&s, &tol).unwrap();
        let a = asymptotic_map(&s, &attr, &tol).unwrap();
        let (w, _) = a.eig().unwrap();
        let mut phases: Vec<f64> = w.iter().map(|z| z.arg()).collect();
        phases.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let expect = [-th, 0.0, 0.0, th];
        for (p, e) in phases.iter().zip(expect.iter()) {
            assert!((p - e).abs() < 1e-10, "{phases:?}");
        }

        // Depolarizing: 1×1 matrix [1].
        let s = depolarize2();
        let attr = attractor_subspace(&s, &tol).unwrap();
        let a = asymptotic_map(&s, &attr, &tol).unwrap();
        assert_eq!(a.dim(), (1, 1));
        assert!((a[(0, 0)] - c(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn jdlg_cases() {
        let tol = Tolerances::default();
        let s = dephasing(0.25);
        let an = analyze(&s, &tol).unwrap();
        let rep = jdlg_verify(&s, &an, &tol, 7).unwrap();
        assert_eq!((rep.dim_attr, rep.dim_transient), (2, 2));
        assert!(rep.transient_decays);
        assert!(rep.reconstruction_residual < 1e-10);

        let s = Superoperator::identity(2);
        let an = analyze(&s, &tol).unwrap();
        let rep = jdlg_verify(&s, &an, &tol, 7).unwrap();
        assert_eq!((rep.dim_attr, rep.dim_transient), (4, 0));
    }

    #[test]
    fn limit_law_rational_phases() {
        let tol = Tolerances::default();
        let s = dephasing(0.25);
        let an = analyze(&s, &tol).unwrap();
        let res = peripheral_limit_residual(&s, &an, 16, 60).unwrap();
        assert!(res < 1e-10, "residual {res}");
    }

    #[test]
    fn fix_subset_attr() {
        let tol = Tolerances::default();
        for s in [dephasing(0.25), depolarize2(), Superoperator::identity(2)] {
            let an = analyze(&s, &tol).unwrap();
            assert!(an.attr.contains(&an.fix, 1e-8).unwrap());
        }
    }

    #[test]
    fn attr_basis_orthonormal() {
        let tol = Tolerances::default();
        let an = analyze(&dephasing(0.25), &tol).unwrap();
        assert!(an.attr.orthonormality_defect().unwrap() < 1e-10);
        for (i, a) in an.attr.basis().iter().enumerate() {
            for (j, b) in an.attr.basis().iter().enumerate() {
                let g = hs_inner(a, b).unwrap();
                let t = if i == j { 1.0 } else { 0.0 };
                assert!((g - c(t, 0.0)).norm() < 1e-10);
            }
        }
    }
}
