//! Complex Schur decomposition with eigenvalue reordering, and triangular
//! Sylvester solves, on top of LAPACK (zgees/ztrsen/ztrsyl).
//!
//! These routines are the backbone of the spectral-projector construction:
//! reorder the selected eigenvalues into the leading block, then decouple the
//! blocks with a Sylvester solve. ndarray-linalg does not expose them, so we
//! bind the three routines directly against the already-linked LAPACK.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

#[allow(clippy::too_many_arguments)]
extern "C" {
    fn zgees_(
        jobvs: *const u8,
        sort: *const u8,
        select: *const core::ffi::c_void,
        n: *const i32,
        a: *mut C64,
        lda: *const i32,
        sdim: *mut i32,
        w: *mut C64,
        vs: *mut C64,
        ldvs: *const i32,
        work: *mut C64,
        lwork: *const i32,
        rwork: *mut f64,
        bwork: *mut i32,
        info: *mut i32,
    );
    fn ztrsen_(
        job: *const u8,
        compq: *const u8,
        select: *const i32,
        n: *const i32,
        t: *mut C64,
        ldt: *const i32,
        q: *mut C64,
        ldq: *const i32,
        w: *mut C64,
        m: *mut i32,
        s: *mut f64,
        sep: *mut f64,
        work: *mut C64,
        lwork: *const i32,
        info: *mut i32,
    );
    fn ztrsyl_(
        trana: *const u8,
        tranb: *const u8,
        isgn: *const i32,
        m: *const i32,
        n: *const i32,
        a: *const C64,
        lda: *const i32,
        b: *const C64,
        ldb: *const i32,
        c: *mut C64,
        ldc: *const i32,
        scale: *mut f64,
        info: *mut i32,
    );
}

fn to_col_major(a: &Array2<C64>) -> Vec<C64> {
    let (m, n) = a.dim();
    let mut v = Vec::with_capacity(m * n);
    for j in 0..n {
        for i in 0..m {
            v.push(a[(i, j)]);
        }
    }
    v
}

fn from_col_major(v: &[C64], m: usize, n: usize) -> Array2<C64> {
    Array2::from_shape_fn((m, n), |(i, j)| v[i + m * j])
}

/// Schur decomposition A = Q T Q^H with unitary Q and upper-triangular T.
/// Returns (q, t, eigenvalues); the eigenvalues appear on the diagonal of T
/// in the order LAPACK produced them.
pub fn schur(a: &Array2<C64>) -> Result<(Array2<C64>, Array2<C64>, Vec<C64>)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimMismatch("schur: matrix not square".into()));
    }
    if n == 0 {
        return Ok((Array2::zeros((0, 0)), Array2::zeros((0, 0)), vec![]));
    }
    let mut t = to_col_major(a);
    let mut q = vec![C64::new(0.0, 0.0); n * n];
    let mut w = vec![C64::new(0.0, 0.0); n];
    let mut rwork = vec![0.0f64; n];
    let ni = n as i32;
    let mut sdim = 0i32;
    let mut info = 0i32;
    // Workspace query.
    let mut work_query = [C64::new(0.0, 0.0)];
    unsafe {
        zgees_(
            b"V".as_ptr(),
            b"N".as_ptr(),
            core::ptr::null(),
            &ni,
            t.as_mut_ptr(),
            &ni,
            &mut sdim,
            w.as_mut_ptr(),
            q.as_mut_ptr(),
            &ni,
            work_query.as_mut_ptr(),
            &(-1i32),
            rwork.as_mut_ptr(),
            core::ptr::null_mut(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Numerical(format!("zgees workspace query failed: info={info}")));
    }
    let lwork = work_query[0].re as i32;
    let mut work = vec![C64::new(0.0, 0.0); lwork.max(1) as usize];
    unsafe {
        zgees_(
            b"V".as_ptr(),
            b"N".as_ptr(),
            core::ptr::null(),
            &ni,
            t.as_mut_ptr(),
            &ni,
            &mut sdim,
            w.as_mut_ptr(),
            q.as_mut_ptr(),
            &ni,
            work.as_mut_ptr(),
            &lwork,
            rwork.as_mut_ptr(),
            core::ptr::null_mut(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Numerical(format!("zgees failed to converge: info={info}")));
    }
    Ok((from_col_major(&q, n, n), from_col_major(&t, n, n), w))
}

/// An ordered Schur decomposition: the eigenvalues satisfying the selection
/// predicate occupy the leading `selected`×`selected` block of T.
pub struct OrderedSchur {
    pub q: Array2<C64>,
    pub t: Array2<C64>,
    /// Eigenvalues in the reordered diagonal order.
    pub eigenvalues: Vec<C64>,
    /// Size of the leading (selected) block.
    pub selected: usize,
}

/// Compute a Schur decomposition and reorder the eigenvalues picked by
/// `select` into the leading block (ztrsen).
pub fn ordered_schur(a: &Array2<C64>, select: impl Fn(C64) -> bool) -> Result<OrderedSchur> {
    let n = a.nrows();
    let (q, t, w) = schur(a)?;
    let flags: Vec<i32> = w.iter().map(|&z| i32::from(select(z))).collect();
    let m_expected = flags.iter().filter(|&&f| f != 0).count();
    if n == 0 || m_expected == n || m_expected == 0 {
        return Ok(OrderedSchur { q, t, eigenvalues: w, selected: m_expected });
    }
    let mut tv = to_col_major(&t);
    let mut qv = to_col_major(&q);
    let mut wv = vec![C64::new(0.0, 0.0); n];
    let ni = n as i32;
    let mut m_out = 0i32;
    let mut s = 0.0f64;
    let mut sep = 0.0f64;
    let mut info = 0i32;
    let mut work_query = [C64::new(0.0, 0.0)];
    unsafe {
        ztrsen_(
            b"N".as_ptr(),
            b"V".as_ptr(),
            flags.as_ptr(),
            &ni,
            tv.as_mut_ptr(),
            &ni,
            qv.as_mut_ptr(),
            &ni,
            wv.as_mut_ptr(),
            &mut m_out,
            &mut s,
            &mut sep,
            work_query.as_mut_ptr(),
            &(-1i32),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Numerical(format!("ztrsen workspace query failed: info={info}")));
    }
    let lwork = work_query[0].re as i32;
    let mut work = vec![C64::new(0.0, 0.0); lwork.max(1) as usize];
    unsafe {
        ztrsen_(
            b"N".as_ptr(),
            b"V".as_ptr(),
            flags.as_ptr(),
            &ni,
            tv.as_mut_ptr(),
            &ni,
            qv.as_mut_ptr(),
            &ni,
            wv.as_mut_ptr(),
            &mut m_out,
            &mut s,
            &mut sep,
            work.as_mut_ptr(),
            &lwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Numerical(format!("ztrsen failed: info={info}")));
    }
    Ok(OrderedSchur {
        q: from_col_major(&qv, n, n),
        t: from_col_major(&tv, n, n),
        eigenvalues: wv,
        selected: m_out as usize,
    })
}

/// Solve the triangular Sylvester equation A X − X B = C for upper-triangular
/// A (m×m) and B (n×n). Fails if A and B have (numerically) common
/// eigenvalues.
pub fn sylvester_triangular(
    a: &Array2<C64>,
    b: &Array2<C64>,
    c: &Array2<C64>,
) -> Result<Array2<C64>> {
    let m = a.nrows();
    let n = b.nrows();
    if a.ncols() != m || b.ncols() != n || c.nrows() != m || c.ncols() != n {
        return Err(Error::DimMismatch("sylvester: inconsistent shapes".into()));
    }
    if m == 0 || n == 0 {
        return Ok(Array2::zeros((m, n)));
    }
    let av = to_col_major(a);
    let bv = to_col_major(b);
    let mut cv = to_col_major(c);
    let mi = m as i32;
    let ni = n as i32;
    let isgn = -1i32;
    let mut scale = 0.0f64;
    let mut info = 0i32;
    unsafe {
        ztrsyl_(
            b"N".as_ptr(),
            b"N".as_ptr(),
            &isgn,
            &mi,
            &ni,
            av.as_ptr(),
            &mi,
            bv.as_ptr(),
            &ni,
            cv.as_mut_ptr(),
            &mi,
            &mut scale,
            &mut info,
        );
    }
    if info < 0 {
        return Err(Error::Internal(format!("ztrsyl: bad argument {}", -info)));
    }
    if info == 1 || scale == 0.0 || !scale.is_finite() {
        return Err(Error::Numerical(
            "Sylvester solve is singular: selected and unselected eigenvalues (nearly) collide"
                .into(),
        ));
    }
    let inv = C64::new(1.0 / scale, 0.0);
    for z in cv.iter_mut() {
        *z *= inv;
    }
    Ok(from_col_major(&cv, m, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn norm(a: &Array2<C64>) -> f64 {
        a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn schur_reconstructs() {
        let a = array![
            [c(1.0, 0.2), c(2.0, 0.0), c(0.0, -1.0)],
            [c(0.5, 0.0), c(-1.0, 1.0), c(3.0, 0.0)],
            [c(0.0, 0.3), c(1.0, 0.0), c(0.0, 0.5)]
        ];
        let (q, t, w) = schur(&a).unwrap();
        let qh = q.t().mapv(|z| z.conj());
        let recon = q.dot(&t).dot(&qh);
        assert!(norm(&(&recon - &a)) < 1e-12);
        // Unitary Q
        assert!(norm(&(&q.dot(&qh) - &Array2::<C64>::eye(3))) < 1e-12);
        // Diagonal of T carries the eigenvalues.
        for (i, &wi) in w.iter().enumerate() {
            assert!((t[(i, i)] - wi).norm() < 1e-12);
        }
    }

    #[test]
    fn ordered_schur_moves_selected_to_front() {
        // Diagonalizable matrix with eigenvalues 1, 0.5, -2.
        let a = array![
            [c(0.5, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)],
            [c(0.0, 0.0), c(0.0, 0.0), c(-2.0, 0.0)]
        ];
        let os = ordered_schur(&a, |z| (z - c(1.0, 0.0)).norm() < 1e-8).unwrap();
        assert_eq!(os.selected, 1);
        assert!((os.t[(0, 0)] - c(1.0, 0.0)).norm() < 1e-10);
        let qh = os.q.t().mapv(|z| z.conj());
        assert!(norm(&(&os.q.dot(&os.t).dot(&qh) - &a)) < 1e-10);
    }

    #[test]
    fn sylvester_solves() {
        let a = array![[c(2.0, 0.0), c(1.0, 0.0)], [c(0.0, 0.0), c(3.0, 0.0)]];
        let b = array![[c(-1.0, 0.5)]];
        let cc = array![[c(1.0, 0.0)], [c(0.0, 2.0)]];
        let x = sylvester_triangular(&a, &b, &cc).unwrap();
        let resid = &a.dot(&x) - &x.dot(&b) - &cc;
        assert!(norm(&resid) < 1e-12);
    }

    #[test]
    fn sylvester_detects_collision() {
        let a = array![[c(1.0, 0.0)]];
        let b = array![[c(1.0, 0.0)]];
        let cc = array![[c(1.0, 0.0)]];
        assert!(sylvester_triangular(&a, &b, &cc).is_err());
    }
}
