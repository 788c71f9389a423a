//! Complex operator and superoperator arithmetic over a finite-dimensional
//! Hilbert space, Hilbert-Schmidt geometry, vectorization, Kraus/Choi
//! machinery, and subspace/commutant linear algebra.
//!
//! Vectorization is column-stacking throughout: `vec(X)[i + d*j] = X[i,j]`,
//! so that `vec(A X B) = (B^T ⊗ A) vec(X)` is the single identity every
//! other module relies on.

use ndarray::{Array1, Array2};
use ndarray::linalg::kron;
use ndarray_linalg::{Eigh, SVD, UPLO};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Numerical tolerances used across the crate.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct Tolerances {
    /// Threshold for classifying an eigenvalue as peripheral.
    pub peripheral: f64,
    /// Relative singular-value cutoff for rank/nullspace decisions.
    pub rank: f64,
    /// Acceptable residual for operator identities.
    pub residual: f64,
    /// Slack below zero allowed for "positive semidefinite".
    pub psd: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { peripheral: 1e-9, rank: 1e-9, residual: 1e-8, psd: 1e-9 }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("peripheral", self.peripheral),
            ("rank", self.rank),
            ("residual", self.residual),
            ("psd", self.psd),
        ] {
            if !(v > 0.0 && v < 1e-2) {
                return Err(Error::InvalidInput(format!(
                    "tolerance `{name}` must lie in (0, 1e-2), got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// A d×d complex matrix: observables, Hamiltonians, Kraus and jump operators,
/// density operators.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    mat: Array2<C64>,
}

impl Operator {
    pub fn new(mat: Array2<C64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
            return Err(Error::DimMismatch(format!(
                "operator must be square and nonempty, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("operator has non-finite entries".into()));
        }
        Ok(Operator { mat })
    }

    pub fn zeros(d: usize) -> Self {
        Operator { mat: Array2::zeros((d, d)) }
    }

    pub fn identity(d: usize) -> Self {
        Operator { mat: Array2::eye(d) }
    }

    /// Matrix unit E_ij (1 in row i, column j).
    pub fn matrix_unit(d: usize, i: usize, j: usize) -> Self {
        let mut m = Array2::zeros((d, d));
        m[(i, j)] = C64::new(1.0, 0.0);
        Operator { mat: m }
    }

    pub fn diag(entries: &[C64]) -> Self {
        let d = entries.len();
        let mut m = Array2::zeros((d, d));
        for (i, z) in entries.iter().enumerate() {
            m[(i, i)] = *z;
        }
        Operator { mat: m }
    }

    pub fn pauli_x() -> Self {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        Operator { mat: ndarray::array![[o, l], [l, o]] }
    }

    pub fn pauli_y() -> Self {
        let o = C64::new(0.0, 0.0);
        let i = C64::new(0.0, 1.0);
        Operator { mat: ndarray::array![[o, -i], [i, o]] }
    }

    pub fn pauli_z() -> Self {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        Operator { mat: ndarray::array![[l, o], [o, -l]] }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn array(&self) -> &Array2<C64> {
        &self.mat
    }

    pub fn into_array(self) -> Array2<C64> {
        self.mat
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Operator {
        Operator { mat: self.mat.t().mapv(|z| z.conj()) }
    }

    pub fn transpose(&self) -> Operator {
        Operator { mat: self.mat.t().to_owned() }
    }

    pub fn conj(&self) -> Operator {
        Operator { mat: self.mat.mapv(|z| z.conj()) }
    }

    pub fn trace(&self) -> C64 {
        self.mat.diag().sum()
    }

    /// Hilbert-Schmidt (Frobenius) norm.
    pub fn norm(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, z: C64) -> Operator {
        Operator { mat: self.mat.mapv(|w| w * z) }
    }

    pub fn scale_re(&self, r: f64) -> Operator {
        self.scale(C64::new(r, 0.0))
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (self - &self.adjoint()).norm()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol * self.norm().max(1.0)
    }

    /// (X + X*)/2.
    pub fn hermitize(&self) -> Operator {
        (self + &self.adjoint()).scale_re(0.5)
    }

    /// Eigenvalues of a Hermitian operator, ascending.
    pub fn eigvalsh(&self) -> Result<Vec<f64>> {
        let (vals, _) = self
            .mat
            .eigh(UPLO::Lower)
            .map_err(|e| Error::Numerical(format!("hermitian eigensolve failed: {e}")))?;
        Ok(vals.to_vec())
    }
}

/// Hermitian eigendecomposition with eigenvectors as columns: returns
/// (λ ascending, V) with m = V diag(λ) V^H.
///
/// The backend solver hands back the eigenvector matrix with its entries
/// conjugated relative to that convention (the row-major input reaches the
/// column-major LAPACK routine as the transpose, i.e. the conjugate of a
/// Hermitian matrix), so the columns are conjugated here before returning —
/// verified by the reconstruction test below and asserted cheaply on the
/// first column.
pub fn eigh_decompose(m: &Array2<C64>) -> Result<(Vec<f64>, Array2<C64>)> {
    let (vals, vecs) = m
        .eigh(UPLO::Lower)
        .map_err(|e| Error::Numerical(format!("hermitian eigensolve failed: {e}")))?;
    let v = vecs.mapv(|z| z.conj());
    if let (Some(&lam), true) = (vals.first(), m.nrows() > 0) {
        let u = v.column(0);
        let mu = m.dot(&u.to_owned());
        let res: f64 = mu
            .iter()
            .zip(u.iter())
            .map(|(a, b)| (a - b * C64::new(lam, 0.0)).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let scale = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1.0);
        if res > 1e-8 * scale {
            return Err(Error::Numerical(format!(
                "hermitian eigendecomposition failed verification (residual {res:.3e})"
            )));
        }
    }
    Ok((vals.to_vec(), v))
}

impl std::ops::Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator { mat: &self.mat + &rhs.mat }
    }
}

impl std::ops::Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator { mat: &self.mat - &rhs.mat }
    }
}

impl std::ops::Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator { mat: self.mat.dot(&rhs.mat) }
    }
}

pub fn commutator(a: &Operator, b: &Operator) -> Operator {
    &(a * b) - &(b * a)
}

pub fn anticommutator(a: &Operator, b: &Operator) -> Operator {
    &(a * b) + &(b * a)
}

/// ⟨X|Y⟩_HS = tr(X* Y); conjugate-linear in the first argument.
pub fn hs_inner(x: &Operator, y: &Operator) -> Result<C64> {
    if x.dim() != y.dim() {
        return Err(Error::DimMismatch(format!(
            "hs_inner: {} vs {}",
            x.dim(),
            y.dim()
        )));
    }
    Ok(x.mat
        .iter()
        .zip(y.mat.iter())
        .map(|(a, b)| a.conj() * b)
        .sum())
}

/// Column-stacking vectorization: `vec(X)[i + d*j] = X[i,j]`.
pub fn vectorize(x: &Operator) -> Array1<C64> {
    let d = x.dim();
    let mut v = Array1::zeros(d * d);
    for j in 0..d {
        for i in 0..d {
            v[i + d * j] = x.mat[(i, j)];
        }
    }
    v
}

pub fn devectorize(v: &Array1<C64>, d: usize) -> Result<Operator> {
    if v.len() != d * d {
        return Err(Error::DimMismatch(format!(
            "devectorize: length {} is not {}^2",
            v.len(),
            d
        )));
    }
    let mut m = Array2::zeros((d, d));
    for j in 0..d {
        for i in 0..d {
            m[(i, j)] = v[i + d * j];
        }
    }
    Ok(Operator { mat: m })
}

/// Which picture a Kraus family acts in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Picture {
    /// X ↦ Σ K_i* X K_i (observables).
    Heisenberg,
    /// ρ ↦ Σ K_i ρ K_i* (states).
    Schrodinger,
}

/// A d²×d² matrix acting on vectorized operators.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    mat: Array2<C64>,
}

impl Superoperator {
    pub fn new(dim: usize, mat: Array2<C64>) -> Result<Self> {
        if mat.nrows() != dim * dim || mat.ncols() != dim * dim {
            return Err(Error::DimMismatch(format!(
                "superoperator for dim {} must be {}x{}, got {}x{}",
                dim,
                dim * dim,
                dim * dim,
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(Superoperator { dim, mat })
    }

    pub fn identity(dim: usize) -> Self {
        Superoperator { dim, mat: Array2::eye(dim * dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Superoperator { dim, mat: Array2::zeros((dim * dim, dim * dim)) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.mat
    }

    pub fn matrix_mut(&mut self) -> &mut Array2<C64> {
        &mut self.mat
    }

    /// Superoperator of X ↦ A X B, i.e. B^T ⊗ A.
    pub fn sandwich(a: &Operator, b: &Operator) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::DimMismatch("sandwich: operand dims differ".into()));
        }
        Ok(Superoperator {
            dim: a.dim(),
            mat: kron(&b.transpose().mat, &a.mat),
        })
    }

    /// Left multiplication X ↦ A X.
    pub fn left_mult(a: &Operator) -> Self {
        Superoperator {
            dim: a.dim(),
            mat: kron(&Array2::eye(a.dim()), &a.mat),
        }
    }

    /// Right multiplication X ↦ X A.
    pub fn right_mult(a: &Operator) -> Self {
        Superoperator {
            dim: a.dim(),
            mat: kron(&a.transpose().mat, &Array2::eye(a.dim())),
        }
    }

    pub fn apply(&self, x: &Operator) -> Result<Operator> {
        if x.dim() != self.dim {
            return Err(Error::DimMismatch(format!(
                "apply: operator dim {} vs superoperator dim {}",
                x.dim(),
                self.dim
            )));
        }
        devectorize(&self.mat.dot(&vectorize(x)), self.dim)
    }

    pub fn apply_vec(&self, v: &Array1<C64>) -> Array1<C64> {
        self.mat.dot(v)
    }

    /// Composition self ∘ other.
    pub fn compose(&self, other: &Superoperator) -> Result<Superoperator> {
        if self.dim != other.dim {
            return Err(Error::DimMismatch("compose: dims differ".into()));
        }
        Ok(Superoperator { dim: self.dim, mat: self.mat.dot(&other.mat) })
    }

    /// Adjoint with respect to the Hilbert-Schmidt product: the conjugate
    /// transpose of the matrix.
    pub fn hs_adjoint(&self) -> Superoperator {
        Superoperator { dim: self.dim, mat: self.mat.t().mapv(|z| z.conj()) }
    }

    pub fn norm(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let adj = self.hs_adjoint();
        (&self.mat - &adj.mat).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn add(&self, other: &Superoperator) -> Result<Superoperator> {
        if self.dim != other.dim {
            return Err(Error::DimMismatch("add: dims differ".into()));
        }
        Ok(Superoperator { dim: self.dim, mat: &self.mat + &other.mat })
    }

    pub fn sub(&self, other: &Superoperator) -> Result<Superoperator> {
        if self.dim != other.dim {
            return Err(Error::DimMismatch("sub: dims differ".into()));
        }
        Ok(Superoperator { dim: self.dim, mat: &self.mat - &other.mat })
    }

    pub fn scale(&self, z: C64) -> Superoperator {
        Superoperator { dim: self.dim, mat: self.mat.mapv(|w| w * z) }
    }

    /// Assemble the superoperator of a Kraus family in the given picture.
    pub fn from_kraus(kraus: &[Operator], picture: Picture) -> Result<Superoperator> {
        if kraus.is_empty() {
            return Err(Error::InvalidInput("empty Kraus list".into()));
        }
        let d = kraus[0].dim();
        if kraus.iter().any(|k| k.dim() != d) {
            return Err(Error::DimMismatch("Kraus operators have mixed dims".into()));
        }
        let mut mat = Array2::zeros((d * d, d * d));
        for k in kraus {
            let term = match picture {
                Picture::Heisenberg => Superoperator::sandwich(&k.adjoint(), k)?,
                Picture::Schrodinger => Superoperator::sandwich(k, &k.adjoint())?,
            };
            mat = mat + term.mat;
        }
        Ok(Superoperator { dim: d, mat })
    }

    /// Choi matrix C = Σ_ij E_ij ⊗ S(E_ij), a d²×d² operator. S is completely
    /// positive iff C is positive semidefinite.
    pub fn choi_matrix(&self) -> Result<Operator> {
        let d = self.dim;
        let mut c = Array2::zeros((d * d, d * d));
        for i in 0..d {
            for j in 0..d {
                let eij = Operator::matrix_unit(d, i, j);
                let s_eij = self.apply(&eij)?;
                c = c + kron(eij.array(), s_eij.array());
            }
        }
        Operator::new(c)
    }
}

/// Result of checking a superoperator against the UCP/CPTP axioms.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct UcpReport {
    pub is_cp: bool,
    pub is_unital: bool,
    pub is_trace_preserving_dual: bool,
    pub min_choi_eigenvalue: f64,
    pub choi_hermiticity_defect: f64,
    pub unitality_residual: f64,
}

impl UcpReport {
    pub fn is_ucp(&self) -> bool {
        self.is_cp && self.is_unital
    }
}

/// Check complete positivity (Choi PSD), unitality, and trace preservation of
/// the dual. Reports rather than fails.
pub fn validate_ucp(s: &Superoperator, tol: &Tolerances) -> Result<UcpReport> {
    let d = s.dim();
    let choi = s.choi_matrix()?;
    let defect = choi.hermiticity_defect();
    let eigs = choi.hermitize().eigvalsh()?;
    let min_eig = eigs.first().copied().unwrap_or(0.0);
    let is_cp = defect <= tol.residual && min_eig >= -tol.psd;

    let id = Operator::identity(d);
    let unitality_residual = (&s.apply(&id)? - &id).norm();
    let is_unital = unitality_residual <= tol.residual;

    // Trace preservation of the dual, checked on matrix units through the
    // adjoint route.
    let dual = s.hs_adjoint();
    let mut tp_residual = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            let e = Operator::matrix_unit(d, i, j);
            let t = dual.apply(&e)?.trace() - e.trace();
            tp_residual = tp_residual.max(t.norm());
        }
    }
    Ok(UcpReport {
        is_cp,
        is_unital,
        is_trace_preserving_dual: tp_residual <= tol.residual,
        min_choi_eigenvalue: min_eig,
        choi_hermiticity_defect: defect,
        unitality_residual,
    })
}

/// A Hilbert-Schmidt-orthonormal list of operators spanning a subspace of
/// B(H).
#[derive(Debug, Clone)]
pub struct OperatorSubspace {
    dim: usize,
    basis: Vec<Operator>,
}

impl OperatorSubspace {
    pub fn empty(dim: usize) -> Self {
        OperatorSubspace { dim, basis: Vec::new() }
    }

    /// Full ambient space B(H), in the matrix-unit basis.
    pub fn full(dim: usize) -> Self {
        let mut basis = Vec::with_capacity(dim * dim);
        for j in 0..dim {
            for i in 0..dim {
                basis.push(Operator::matrix_unit(dim, i, j));
            }
        }
        OperatorSubspace { dim, basis }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis(&self) -> &[Operator] {
        &self.basis
    }

    /// d²×k matrix whose columns are the vectorized basis elements.
    pub fn basis_matrix(&self) -> Array2<C64> {
        let d2 = self.dim * self.dim;
        let mut m = Array2::zeros((d2, self.basis.len()));
        for (j, b) in self.basis.iter().enumerate() {
            let v = vectorize(b);
            for i in 0..d2 {
                m[(i, j)] = v[i];
            }
        }
        m
    }

    pub fn from_columns(dim: usize, cols: &Array2<C64>) -> Result<Self> {
        let mut basis = Vec::with_capacity(cols.ncols());
        for j in 0..cols.ncols() {
            basis.push(devectorize(&cols.column(j).to_owned(), dim)?);
        }
        Ok(OperatorSubspace { dim, basis })
    }

    /// Orthogonal projection of x onto the span.
    pub fn project(&self, x: &Operator) -> Result<Operator> {
        let mut acc = Operator::zeros(self.dim);
        for b in &self.basis {
            let c = hs_inner(b, x)?;
            acc = &acc + &b.scale(c);
        }
        Ok(acc)
    }

    /// Norm of the component of x orthogonal to the span.
    pub fn residual(&self, x: &Operator) -> Result<f64> {
        Ok((x - &self.project(x)?).norm())
    }

    /// Whether every basis element of `other` lies in this span.
    pub fn contains(&self, other: &OperatorSubspace, tol_residual: f64) -> Result<bool> {
        Ok(self.containment_residual(other)? <= tol_residual)
    }

    /// Max projection residual of `other`'s basis onto this span.
    pub fn containment_residual(&self, other: &OperatorSubspace) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::DimMismatch("containment: ambient dims differ".into()));
        }
        let mut worst = 0.0f64;
        for b in &other.basis {
            worst = worst.max(self.residual(b)?);
        }
        Ok(worst)
    }

    /// Symmetric subspace-equality residual.
    pub fn equality_residual(&self, other: &OperatorSubspace) -> Result<f64> {
        Ok(self
            .containment_residual(other)?
            .max(other.containment_residual(self)?))
    }

    /// Max orthonormality defect |⟨B_i,B_j⟩ − δ_ij| over basis pairs.
    pub fn orthonormality_defect(&self) -> Result<f64> {
        let mut worst = 0.0f64;
        for (i, a) in self.basis.iter().enumerate() {
            for (j, b) in self.basis.iter().enumerate() {
                let g = hs_inner(a, b)?;
                let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                worst = worst.max((g - target).norm());
            }
        }
        Ok(worst)
    }
}

/// Cheap spectral-norm estimate by power iteration on A*A. Used only for
/// step-size heuristics (never for correctness decisions), so a slight
/// underestimate is harmless.
pub fn operator_norm_estimate(a: &Operator) -> f64 {
    let d = a.dim();
    if d == 0 {
        return 0.0;
    }
    let m = a.array();
    let mh = a.adjoint();
    let mut v = Array1::from_shape_fn(d, |i| {
        C64::new(1.0 + 0.37 * (i as f64).sin(), 0.23 * (i as f64).cos())
    });
    let mut sigma = 0.0f64;
    for _ in 0..12 {
        let nv = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1e-300);
        v.mapv_inplace(|z| z / C64::new(nv, 0.0));
        let w = m.dot(&v);
        sigma = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v = mh.array().dot(&w);
    }
    sigma
}

/// Modified Gram-Schmidt with a re-orthogonalization pass. Vectors whose
/// residual norm falls below `tol_rank` times the largest input norm are
/// discarded; deterministic given the input order.
pub fn orthonormalize(ops: &[Operator], tol_rank: f64) -> Result<OperatorSubspace> {
    if ops.is_empty() {
        return Err(Error::InvalidInput(
            "orthonormalize: ambient dimension unknown for empty input".into(),
        ));
    }
    let d = ops[0].dim();
    if ops.iter().any(|o| o.dim() != d) {
        return Err(Error::DimMismatch("orthonormalize: mixed dims".into()));
    }
    let scale = ops.iter().map(|o| o.norm()).fold(0.0f64, f64::max).max(1e-300);
    let mut basis: Vec<Operator> = Vec::new();
    for op in ops {
        let mut v = op.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = hs_inner(b, &v)?;
                v = &v - &b.scale(c);
            }
        }
        let n = v.norm();
        if n > tol_rank * scale {
            basis.push(v.scale_re(1.0 / n));
        }
    }
    Ok(OperatorSubspace { dim: d, basis })
}

/// Orthonormal basis (as columns) of the nullspace of `m`, with the singular
/// value threshold `tol_rank` relative to the largest singular value (capped
/// below by 1, so an all-but-zero matrix has a full nullspace).
pub fn nullspace(m: &Array2<C64>, tol_rank: f64) -> Result<Array2<C64>> {
    let k = m.ncols();
    let (_, s, vt) = m
        .svd(false, true)
        .map_err(|e| Error::Numerical(format!("SVD failed: {e}")))?;
    let vt = vt.ok_or_else(|| Error::Internal("SVD did not return V^T".into()))?;
    let smax = s.iter().cloned().fold(0.0f64, f64::max);
    let thresh = tol_rank * smax.max(1.0);
    let mut null_rows: Vec<usize> = Vec::new();
    for r in 0..k {
        let sv = if r < s.len() { s[r] } else { 0.0 };
        if sv <= thresh {
            null_rows.push(r);
        }
    }
    let mut out = Array2::zeros((k, null_rows.len()));
    for (c, &r) in null_rows.iter().enumerate() {
        for j in 0..k {
            out[(j, c)] = vt[(r, j)].conj();
        }
    }
    Ok(out)
}

/// Restrict an orthonormal basis (columns of `basis`, vectorized operators of
/// dimension `d`) to the kernel of the linear map `apply`.
pub fn restrict_to_kernel(
    basis: &Array2<C64>,
    d: usize,
    apply: &dyn Fn(&Operator) -> Result<Operator>,
    tol_rank: f64,
) -> Result<Array2<C64>> {
    let k = basis.ncols();
    if k == 0 {
        return Ok(basis.clone());
    }
    let d2 = d * d;
    let mut m = Array2::zeros((d2, k));
    for j in 0..k {
        let x = devectorize(&basis.column(j).to_owned(), d)?;
        let v = vectorize(&apply(&x)?);
        for i in 0..d2 {
            m[(i, j)] = v[i];
        }
    }
    // Scale-invariant threshold: the basis columns are unit vectors, so the
    // relevant scale is the largest image norm, capped below by 1.
    let scale = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1.0);
    let mut mm = m;
    mm.mapv_inplace(|z| z / C64::new(scale, 0.0));
    let null = nullspace(&mm, tol_rank)?;
    Ok(basis.dot(&null))
}

/// Intersection of two subspaces: the part of A annihilated by the projector
/// complement of B.
pub fn subspace_intersect(
    a: &OperatorSubspace,
    b: &OperatorSubspace,
    tol_rank: f64,
) -> Result<OperatorSubspace> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch("intersect: ambient dims differ".into()));
    }
    if a.is_empty() || b.is_empty() {
        return Ok(OperatorSubspace::empty(a.dim()));
    }
    let qa = a.basis_matrix();
    let qb = b.basis_matrix();
    // (I - Q_B Q_B^H) Q_A, whose nullspace in A-coordinates is A ∩ B.
    let qbh_qa = qb.t().mapv(|z| z.conj()).dot(&qa);
    let m = &qa - &qb.dot(&qbh_qa);
    // Singular values here are sines of principal angles, so an absolute
    // threshold against 1 is the right scale.
    let (_, s, vt) = m
        .svd(false, true)
        .map_err(|e| Error::Numerical(format!("SVD failed: {e}")))?;
    let vt = vt.ok_or_else(|| Error::Internal("SVD did not return V^T".into()))?;
    let k = qa.ncols();
    let mut cols: Vec<Array1<C64>> = Vec::new();
    for r in 0..k {
        let sv = if r < s.len() { s[r] } else { 0.0 };
        if sv <= tol_rank.max(1e-12) {
            let coeff: Array1<C64> = (0..k).map(|j| vt[(r, j)].conj()).collect();
            cols.push(qa.dot(&coeff));
        }
    }
    let ops: Vec<Operator> = cols
        .iter()
        .map(|c| devectorize(c, a.dim()))
        .collect::<Result<_>>()?;
    if ops.is_empty() {
        return Ok(OperatorSubspace::empty(a.dim()));
    }
    orthonormalize(&ops, 1e-12)
}

/// Commutant {X : [G, X] = 0 for all G in gens}, computed as the joint
/// nullspace of the commutation maps X ↦ [G, X] by successive restriction of
/// an orthonormal basis. Always contains the identity.
///
/// Diagonal generators are handled exactly: their joint commutant is the span
/// of the matrix units E_ij whose indices carry identical diagonal signatures,
/// which both avoids the d²×d² restriction at large dimension and removes any
/// numerical rank decision for that part of the computation.
pub fn commutant(gens: &[Operator], tol_rank: f64) -> Result<OperatorSubspace> {
    if gens.is_empty() {
        return Err(Error::InvalidInput("commutant of empty generator list".into()));
    }
    let d = gens[0].dim();
    if gens.iter().any(|g| g.dim() != d) {
        return Err(Error::DimMismatch("commutant: mixed generator dims".into()));
    }
    let mut diag: Vec<&Operator> = Vec::new();
    let mut rest: Vec<&Operator> = Vec::new();
    for g in gens {
        let gn = g.norm();
        if gn == 0.0 {
            continue;
        }
        let offdiag: f64 = g
            .array()
            .indexed_iter()
            .filter(|((i, j), _)| i != j)
            .map(|(_, z)| z.norm_sqr())
            .sum::<f64>()
            .sqrt();
        if offdiag <= 1e-13 * gn {
            diag.push(g);
        } else {
            rest.push(g);
        }
    }
    let mut basis = if diag.is_empty() {
        Array2::eye(d * d)
    } else {
        // Group indices whose diagonal entries agree across every diagonal
        // generator; [G, E_ij] = (g_ii − g_jj) E_ij, so E_ij survives exactly
        // when i and j share a class.
        let mut class = vec![usize::MAX; d];
        let mut reps: Vec<usize> = Vec::new();
        for i in 0..d {
            let hit = reps.iter().position(|&r| {
                diag.iter().all(|g| {
                    (g.array()[(i, i)] - g.array()[(r, r)]).norm()
                        <= 1e-9 * g.norm().max(1.0)
                })
            });
            class[i] = match hit {
                Some(c) => c,
                None => {
                    reps.push(i);
                    reps.len() - 1
                }
            };
        }
        let cols: Vec<(usize, usize)> = (0..d)
            .flat_map(|j| (0..d).map(move |i| (i, j)))
            .filter(|&(i, j)| class[i] == class[j])
            .collect();
        let mut b = Array2::<C64>::zeros((d * d, cols.len()));
        for (c, &(i, j)) in cols.iter().enumerate() {
            b[(i + d * j, c)] = C64::new(1.0, 0.0);
        }
        b
    };
    for g in rest {
        // Scale invariance: the kernel of X ↦ [G, X] does not depend on ‖G‖.
        let g = g.scale_re(1.0 / g.norm());
        let apply = |x: &Operator| -> Result<Operator> { Ok(commutator(&g, x)) };
        basis = restrict_to_kernel(&basis, d, &apply, tol_rank)?;
        if basis.ncols() == 0 {
            break;
        }
    }
    let sub = OperatorSubspace::from_columns(d, &basis)?;
    orthonormalize(sub.basis(), 1e-12)
}

/// Double commutant: the von Neumann algebra generated by gens and I.
pub fn double_commutant(gens: &[Operator], tol_rank: f64) -> Result<OperatorSubspace> {
    let first = commutant(gens, tol_rank)?;
    commutant(first.basis(), tol_rank)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn eigh_decompose_columns_are_eigenvectors() {
        // A complex Hermitian matrix catches eigenvector-orientation bugs
        // that real-symmetric fixtures cannot (conjugation is invisible on
        // real data).
        let y = Operator::pauli_y();
        let (vals, v) = eigh_decompose(y.array()).unwrap();
        assert_eq!(vals.len(), 2);
        for (k, &lam) in vals.iter().enumerate() {
            let u = v.column(k).to_owned();
            let yu = y.array().dot(&u);
            let res: f64 = yu
                .iter()
                .zip(u.iter())
                .map(|(a, b)| (a - b * c(lam, 0.0)).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(res < 1e-14, "column {k} residual {res}");
        }
        // Reconstruction V Λ V^H = Y.
        let mut rec = Array2::<C64>::zeros((2, 2));
        for (k, &lam) in vals.iter().enumerate() {
            for r in 0..2 {
                for col in 0..2 {
                    rec[(r, col)] += c(lam, 0.0) * v[(r, k)] * v[(col, k)].conj();
                }
            }
        }
        let err = (&Operator::new(rec).unwrap() - &y).norm();
        assert!(err < 1e-14, "{err}");
    }

    #[test]
    fn hs_inner_basics() {
        let i2 = Operator::identity(2);
        assert_eq!(hs_inner(&i2, &i2).unwrap(), c(2.0, 0.0));
        let e01 = Operator::matrix_unit(2, 0, 1);
        assert_eq!(hs_inner(&e01, &e01).unwrap(), c(1.0, 0.0));
        let z = Operator::pauli_z();
        let x = Operator::pauli_x();
        assert_eq!(hs_inner(&z, &x).unwrap(), c(0.0, 0.0));
        assert!(hs_inner(&i2, &Operator::identity(3)).is_err());
    }

    #[test]
    fn vectorize_convention() {
        let e00 = Operator::matrix_unit(2, 0, 0);
        assert_eq!(vectorize(&e00).to_vec(), vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let e10 = Operator::matrix_unit(2, 1, 0);
        assert_eq!(vectorize(&e10).to_vec(), vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(devectorize(&Array1::zeros(3), 2).is_err());
    }

    #[test]
    fn sandwich_identity_on_random() {
        // vec(AXB) = (B^T ⊗ A) vec(X)
        let a = Operator::new(ndarray::array![[c(1.0, 0.5), c(0.0, -1.0)], [c(2.0, 0.0), c(0.3, 0.3)]]).unwrap();
        let b = Operator::new(ndarray::array![[c(0.0, 1.0), c(1.5, 0.0)], [c(-1.0, 2.0), c(0.0, 0.7)]]).unwrap();
        let x = Operator::new(ndarray::array![[c(0.2, -0.4), c(1.0, 1.0)], [c(3.0, 0.0), c(0.0, -2.0)]]).unwrap();
        let s = Superoperator::sandwich(&a, &b).unwrap();
        let direct = &(&a * &x) * &b;
        let via = s.apply(&x).unwrap();
        assert!((&direct - &via).norm() < 1e-12);
    }

    #[test]
    fn kraus_identity_channel() {
        let s = Superoperator::from_kraus(&[Operator::identity(2)], Picture::Heisenberg).unwrap();
        assert!((&s.mat - &Array2::<C64>::eye(4)).iter().map(|z| z.norm_sqr()).sum::<f64>() < 1e-24);
    }

    #[test]
    fn kraus_dephasing_action() {
        let k = vec![
            Operator::identity(2).scale_re(0.75f64.sqrt()),
            Operator::pauli_z().scale_re(0.25f64.sqrt()),
        ];
        let s = Superoperator::from_kraus(&k, Picture::Heisenberg).unwrap();
        // Verified entrywise against direct action on the 4 matrix units.
        let z = Operator::pauli_z();
        for i in 0..2 {
            for j in 0..2 {
                let e = Operator::matrix_unit(2, i, j);
                let expect = &e.scale_re(0.75) + &(&(&z * &e) * &z).scale_re(0.25);
                assert!((&s.apply(&e).unwrap() - &expect).norm() < 1e-14);
            }
        }
        let x = Operator::pauli_x();
        assert!((&s.apply(&x).unwrap() - &x.scale_re(0.5)).norm() < 1e-14);
    }

    #[test]
    fn kraus_unitary_conjugation_flips_x() {
        let s = Superoperator::from_kraus(&[Operator::pauli_z()], Picture::Heisenberg).unwrap();
        let x = Operator::pauli_x();
        assert!((&s.apply(&x).unwrap() - &x.scale_re(-1.0)).norm() < 1e-14);
    }

    #[test]
    fn kraus_errors() {
        assert!(Superoperator::from_kraus(&[], Picture::Heisenberg).is_err());
        let mixed = vec![Operator::identity(2), Operator::identity(3)];
        assert!(Superoperator::from_kraus(&mixed, Picture::Heisenberg).is_err());
    }

    #[test]
    fn adjoint_is_involution_and_dual_preserves_trace() {
        let k = vec![
            Operator::identity(2).scale_re(0.75f64.sqrt()),
            Operator::pauli_z().scale_re(0.25f64.sqrt()),
        ];
        let s = Superoperator::from_kraus(&k, Picture::Heisenberg).unwrap();
        let back = s.hs_adjoint().hs_adjoint();
        assert!((&s.mat - &back.mat).iter().map(|z| z.norm_sqr()).sum::<f64>() < 1e-24);
        // The Schrödinger dual of a Heisenberg Kraus family is the same family
        // in the other picture.
        let dual = Superoperator::from_kraus(&k, Picture::Schrodinger).unwrap();
        assert!((&s.hs_adjoint().mat - &dual.mat).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() < 1e-12);
    }

    #[test]
    fn adjoint_pairing_identity() {
        let k = vec![
            Operator::identity(2).scale_re(0.75f64.sqrt()),
            Operator::pauli_z().scale_re(0.25f64.sqrt()),
        ];
        let s = Superoperator::from_kraus(&k, Picture::Heisenberg).unwrap();
        let sa = s.hs_adjoint();
        let x = Operator::new(ndarray::array![[c(0.3, 0.1), c(1.0, -0.2)], [c(0.0, 2.0), c(-1.0, 0.4)]]).unwrap();
        let y = Operator::new(ndarray::array![[c(1.2, 0.0), c(0.4, 0.9)], [c(-0.3, 0.0), c(0.0, -1.1)]]).unwrap();
        let lhs = hs_inner(&x, &s.apply(&y).unwrap()).unwrap();
        let rhs = hs_inner(&sa.apply(&x).unwrap(), &y).unwrap();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn unitary_channel_adjoint_inverts() {
        let u = Operator::diag(&[c(1.0, 0.0), C64::from_polar(1.0, 0.7)]);
        let s = Superoperator::from_kraus(&[u], Picture::Heisenberg).unwrap();
        let prod = s.compose(&s.hs_adjoint()).unwrap();
        assert!((&prod.mat - &Array2::<C64>::eye(4)).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() < 1e-12);
    }

    #[test]
    fn choi_identity_channel() {
        let s = Superoperator::identity(2);
        let mut eigs = s.choi_matrix().unwrap().eigvalsh().unwrap();
        eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expect = [0.0, 0.0, 0.0, 2.0];
        for (e, x) in eigs.iter().zip(expect.iter()) {
            assert!((e - x).abs() < 1e-12, "eigs {eigs:?}");
        }
    }

    #[test]
    fn choi_dephasing_eigenvalues() {
        let k = vec![
            Operator::identity(2).scale_re(0.75f64.sqrt()),
            Operator::pauli_z().scale_re(0.25f64.sqrt()),
        ];
        let s = Superoperator::from_kraus(&k, Picture::Heisenberg).unwrap();
        let mut eigs = s.choi_matrix().unwrap().eigvalsh().unwrap();
        eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expect = [0.0, 0.0, 0.5, 1.5];
        for (e, x) in eigs.iter().zip(expect.iter()) {
            assert!((e - x).abs() < 1e-12, "eigs {eigs:?}");
        }
    }

    #[test]
    fn choi_unitary_is_rank_one() {
        let s = Superoperator::from_kraus(&[Operator::pauli_z()], Picture::Heisenberg).unwrap();
        let eigs = s.choi_matrix().unwrap().eigvalsh().unwrap();
        let nonzero = eigs.iter().filter(|e| e.abs() > 1e-10).count();
        assert_eq!(nonzero, 1);
        assert!(eigs.iter().all(|e| *e > -1e-10));
    }

    #[test]
    fn validate_ucp_cases() {
        let tol = Tolerances::default();
        let id = Superoperator::identity(2);
        let r = validate_ucp(&id, &tol).unwrap();
        assert!(r.is_cp && r.is_unital && r.is_trace_preserving_dual);

        // X ↦ tr(X)/2 · I: Choi = I/2 ⊗ ... is PSD, unital.
        let mut m = Array2::zeros((4, 4));
        let iv = vectorize(&Operator::identity(2));
        for r_ in 0..4 {
            for c_ in 0..4 {
                m[(r_, c_)] = iv[r_] * iv[c_].conj() / c(2.0, 0.0);
            }
        }
        let depol = Superoperator::new(2, m).unwrap();
        let r = validate_ucp(&depol, &tol).unwrap();
        assert!(r.is_cp && r.is_unital);

        // Transpose map: positive but not completely positive.
        let mut t = Array2::zeros((4, 4));
        for i in 0..2 {
            for j in 0..2 {
                // vec(E_ji) has a 1 at position j + 2*i
                t[(j + 2 * i, i + 2 * j)] = c(1.0, 0.0);
            }
        }
        let transpose = Superoperator::new(2, t).unwrap();
        let r = validate_ucp(&transpose, &tol).unwrap();
        assert!(!r.is_cp);
        assert!((r.min_choi_eigenvalue - (-1.0)).abs() < 1e-10);
    }

    #[test]
    fn orthonormalize_cases() {
        let i2 = Operator::identity(2);
        let s = orthonormalize(&[i2.clone(), i2.scale_re(2.0)], 1e-9).unwrap();
        assert_eq!(s.len(), 1);
        assert!((s.basis()[0].norm() - 1.0).abs() < 1e-12);

        let s = orthonormalize(&[i2.clone(), Operator::pauli_z()], 1e-9).unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.orthonormality_defect().unwrap() < 1e-12);
    }

    #[test]
    fn subspace_contains_and_intersect() {
        let i2 = Operator::identity(2);
        let z = Operator::pauli_z();
        let x = Operator::pauli_x();
        let span_i = orthonormalize(&[i2.clone()], 1e-9).unwrap();
        let span_iz = orthonormalize(&[i2.clone(), z.clone()], 1e-9).unwrap();
        assert!(span_iz.contains(&span_i, 1e-8).unwrap());
        assert!(!span_i.contains(&span_iz, 1e-8).unwrap());

        let span_x = orthonormalize(&[x.clone()], 1e-9).unwrap();
        let span_z = orthonormalize(&[z.clone()], 1e-9).unwrap();
        assert_eq!(subspace_intersect(&span_x, &span_z, 1e-9).unwrap().len(), 0);

        let span_ix = orthonormalize(&[i2.clone(), x], 1e-9).unwrap();
        let cap = subspace_intersect(&span_ix, &span_iz, 1e-9).unwrap();
        assert_eq!(cap.len(), 1);
        assert!(cap.residual(&i2.scale_re(0.5f64.sqrt())).unwrap() < 1e-10);
    }

    #[test]
    fn commutant_cases() {
        let c_full = commutant(&[Operator::identity(2)], 1e-9).unwrap();
        assert_eq!(c_full.len(), 4);

        let c_z = commutant(&[Operator::pauli_z()], 1e-9).unwrap();
        assert_eq!(c_z.len(), 2);
        assert!(c_z.residual(&Operator::identity(2).scale_re(0.5f64.sqrt())).unwrap() < 1e-10);

        let c_xz = commutant(&[Operator::pauli_x(), Operator::pauli_z()], 1e-9).unwrap();
        assert_eq!(c_xz.len(), 1);

        assert!(commutant(&[], 1e-9).is_err());
    }

    #[test]
    fn commutant_is_star_and_product_closed() {
        let cz = commutant(&[Operator::pauli_z()], 1e-9).unwrap();
        assert!(cz.residual(&Operator::identity(2).scale_re(0.5f64.sqrt())).unwrap() < 1e-10);
        for a in cz.basis() {
            assert!(cz.residual(&a.adjoint()).unwrap() < 1e-10);
            for b in cz.basis() {
                assert!(cz.residual(&(a * b)).unwrap() < 1e-10);
            }
        }
    }

    #[test]
    fn double_commutant_generates_algebra() {
        // {Z}'' = span{I, Z}
        let dc = double_commutant(&[Operator::pauli_z()], 1e-9).unwrap();
        assert_eq!(dc.len(), 2);
        // {X, Z}'' = all of B(H)
        let dc = double_commutant(&[Operator::pauli_x(), Operator::pauli_z()], 1e-9).unwrap();
        assert_eq!(dc.len(), 4);
    }
}
