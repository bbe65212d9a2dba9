//! Small dense linear-algebra kernel.
//!
//! Everything the other modules need from matrix land lives here: row-vector
//! linear solves, a general real eigendecomposition with complex eigenvalues
//! and biorthogonal left/right eigenvectors, and exact rational kernel bases.
//! No other module touches raw factorizations.
//!
//! The eigendecomposition reduces to Hessenberg form and runs Francis
//! double-shift QR iteration (the classic EISPACK `orthes`/`hqr2` pair), so
//! complex conjugate eigenvalue pairs are exact by construction. Matrices
//! here are dense and small (a few hundred rows at most).

use nalgebra::{Complex, DMatrix};
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::netmodel::Rat;

pub type C64 = Complex<f64>;

const EPS: f64 = 2.220446049250313e-16;

/// Maximum QR iterations spent on a single eigenvalue before giving up.
const MAX_EIGEN_ITER: usize = 60;

#[derive(Debug, Error, PartialEq)]
pub enum SpectralError {
    #[error("matrix is singular to working precision")]
    SingularMatrix,
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

/// Solves the row system `x · Q = r` by a transposed partial-pivot solve.
pub fn solve_row_system(q: &DMatrix<f64>, r: &[f64]) -> Result<Vec<f64>, SpectralError> {
    let n = q.nrows();
    assert_eq!(q.ncols(), n, "square matrix required");
    assert_eq!(r.len(), n, "dimension mismatch");
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut a = q.transpose();
    let mut b = r.to_vec();
    let scale = a.amax();
    let tol = (n as f64) * EPS * scale;

    for col in 0..n {
        let (piv, piv_abs) = (col..n)
            .map(|row| (row, a[(row, col)].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if !piv_abs.is_finite() || piv_abs <= tol {
            return Err(SpectralError::SingularMatrix);
        }
        if piv != col {
            a.swap_rows(col, piv);
            b.swap(col, piv);
        }
        let pivot = a[(col, col)];
        for row in col + 1..n {
            let factor = a[(row, col)] / pivot;
            if factor != 0.0 {
                for cc in col..n {
                    let sub = factor * a[(col, cc)];
                    a[(row, cc)] -= sub;
                }
                b[row] -= factor * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in i + 1..n {
            s -= a[(i, j)] * x[j];
        }
        x[i] = s / a[(i, i)];
    }
    Ok(x)
}

/// Eigenvalues, right eigenvectors `U` (columns) and left eigenvectors
/// `V = U⁻¹` (rows) of a real square matrix, ordered by descending real
/// part, ties by descending imaginary part.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<C64>,
    /// Columns are unit-norm right eigenvectors.
    pub right: DMatrix<C64>,
    /// `V = U⁻¹`, so `V·U = I`; absent when `U` is numerically singular.
    pub left: Option<DMatrix<C64>>,
    /// True when `σ_min(U) > 1e-8 · σ_max(U)`.
    pub diagonalizable: bool,
}

impl EigenDecomposition {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// k-th right eigenvector as a column vector.
    pub fn right_vector(&self, k: usize) -> Vec<C64> {
        (0..self.n()).map(|i| self.right[(i, k)]).collect()
    }

    /// k-th left eigenvector as a row vector (requires `left`).
    pub fn left_vector(&self, k: usize) -> Vec<C64> {
        let v = self.left.as_ref().expect("left eigenvectors unavailable");
        (0..self.n()).map(|j| v[(k, j)]).collect()
    }
}

/// Eigenvalues only, same ordering contract as [`eigendecompose`].
pub fn eigenvalues(q: &DMatrix<f64>) -> Result<Vec<C64>, SpectralError> {
    Ok(eigendecompose(q)?.eigenvalues)
}

/// Full eigendecomposition of a general real matrix.
pub fn eigendecompose(q: &DMatrix<f64>) -> Result<EigenDecomposition, SpectralError> {
    let n = q.nrows();
    assert_eq!(q.ncols(), n, "square matrix required");
    assert!(n >= 1, "empty matrix");
    if q.iter().any(|x| !x.is_finite()) {
        return Err(SpectralError::NumericalFailure("non-finite entries".into()));
    }

    let mut work = Hqr2::new(q.clone());
    work.orthes();
    work.hqr2()?;

    // Unpack the packed real storage into complex columns. Conjugate pairs
    // are stored as (re, +im) at k and (re, -im) at k+1, with the vector for
    // the +im eigenvalue split across columns k (real part) and k+1
    // (imaginary part).
    let mut values = Vec::with_capacity(n);
    let mut right = DMatrix::<C64>::zeros(n, n);
    let mut k = 0;
    while k < n {
        if work.e[k] == 0.0 {
            values.push(C64::new(work.d[k], 0.0));
            for i in 0..n {
                right[(i, k)] = C64::new(work.v[(i, k)], 0.0);
            }
            k += 1;
        } else {
            debug_assert!(work.e[k] > 0.0 && k + 1 < n && work.e[k + 1] == -work.e[k]);
            values.push(C64::new(work.d[k], work.e[k]));
            values.push(C64::new(work.d[k + 1], work.e[k + 1]));
            for i in 0..n {
                let re = work.v[(i, k)];
                let im = work.v[(i, k + 1)];
                right[(i, k)] = C64::new(re, im);
                right[(i, k + 1)] = C64::new(re, -im);
            }
            k += 2;
        }
    }

    for col in 0..n {
        let norm = (0..n).map(|i| right[(i, col)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(SpectralError::NumericalFailure("zero eigenvector".into()));
        }
        for i in 0..n {
            right[(i, col)] /= C64::new(norm, 0.0);
        }
    }

    // Sort by descending real part, ties by descending imaginary part.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        values[b]
            .re
            .total_cmp(&values[a].re)
            .then(values[b].im.total_cmp(&values[a].im))
    });
    let eigenvalues: Vec<C64> = order.iter().map(|&i| values[i]).collect();
    let mut u = DMatrix::<C64>::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for i in 0..n {
            u[(i, new_col)] = right[(i, old_col)];
        }
    }

    let (sigma_min, sigma_max) = singular_extremes(&u);
    let diagonalizable = sigma_min > 1e-8 * sigma_max;
    let left = if sigma_min > 1e-13 * sigma_max {
        u.clone().try_inverse()
    } else {
        None
    };

    Ok(EigenDecomposition {
        eigenvalues,
        right: u,
        left,
        diagonalizable,
    })
}

/// Smallest and largest singular value of a complex matrix, via the SVD of
/// its real 2n×2n embedding (each singular value appears twice there).
fn singular_extremes(u: &DMatrix<C64>) -> (f64, f64) {
    let n = u.nrows();
    let mut emb = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = u[(i, j)];
            emb[(i, j)] = z.re;
            emb[(i, j + n)] = -z.im;
            emb[(i + n, j)] = z.im;
            emb[(i + n, j + n)] = z.re;
        }
    }
    let sv = nalgebra::SVD::new(emb, false, false).singular_values;
    let max = sv.iter().copied().fold(0.0_f64, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    (min, max)
}

/// Exact basis of the right kernel of a rational matrix, via fraction
/// elimination to reduced row echelon form. Empty iff the matrix has full
/// column rank.
pub fn kernel_basis_exact(q: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    rref(q).1
}

/// Exact rank of a rational matrix.
pub fn rank_exact(q: &[Vec<Rat>]) -> usize {
    rref(q).0
}

#[allow(clippy::needless_range_loop)] // elimination indexes two rows at once
fn rref(q: &[Vec<Rat>]) -> (usize, Vec<Vec<Rat>>) {
    let rows = q.len();
    if rows == 0 {
        return (0, Vec::new());
    }
    let cols = q[0].len();
    let mut mat: Vec<Vec<Rat>> = q.to_vec();
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !mat[i][c].is_zero()) else {
            continue;
        };
        mat.swap(r, p);
        let inv = mat[r][c].clone();
        for cc in c..cols {
            mat[r][cc] = &mat[r][cc] / &inv;
        }
        for i in 0..rows {
            if i != r && !mat[i][c].is_zero() {
                let factor = mat[i][c].clone();
                for cc in c..cols {
                    let sub = &factor * &mat[r][cc];
                    mat[i][cc] = &mat[i][cc] - sub;
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
    }
    let rank = pivot_cols.len();
    let mut basis = Vec::new();
    for free in 0..cols {
        if pivot_cols.contains(&free) {
            continue;
        }
        let mut v = vec![BigRational::zero(); cols];
        v[free] = BigRational::one();
        for (row_idx, &pc) in pivot_cols.iter().enumerate() {
            if free > pc {
                v[pc] = -mat[row_idx][free].clone();
            }
        }
        basis.push(v);
    }
    (rank, basis)
}

/// Hessenberg reduction plus Francis double-shift QR with accumulated
/// transformations and eigenvector back-substitution. Ported from the
/// EISPACK `orthes`/`hqr2` pair (via their public-domain JAMA form).
struct Hqr2 {
    n: usize,
    h: DMatrix<f64>,
    v: DMatrix<f64>,
    d: Vec<f64>,
    e: Vec<f64>,
    ort: Vec<f64>,
}

impl Hqr2 {
    fn new(a: DMatrix<f64>) -> Self {
        let n = a.nrows();
        Hqr2 {
            n,
            h: a,
            v: DMatrix::identity(n, n),
            d: vec![0.0; n],
            e: vec![0.0; n],
            ort: vec![0.0; n],
        }
    }

    fn orthes(&mut self) {
        let n = self.n;
        let low = 0;
        let high = n - 1;

        for m in (low + 1)..high {
            let mut scale = 0.0;
            for i in m..=high {
                scale += self.h[(i, m - 1)].abs();
            }
            if scale != 0.0 {
                let mut hsum = 0.0;
                for i in (m..=high).rev() {
                    self.ort[i] = self.h[(i, m - 1)] / scale;
                    hsum += self.ort[i] * self.ort[i];
                }
                let mut g = hsum.sqrt();
                if self.ort[m] > 0.0 {
                    g = -g;
                }
                hsum -= self.ort[m] * g;
                self.ort[m] -= g;

                for j in m..n {
                    let mut f = 0.0;
                    for i in (m..=high).rev() {
                        f += self.ort[i] * self.h[(i, j)];
                    }
                    f /= hsum;
                    for i in m..=high {
                        self.h[(i, j)] -= f * self.ort[i];
                    }
                }
                for i in 0..=high {
                    let mut f = 0.0;
                    for j in (m..=high).rev() {
                        f += self.ort[j] * self.h[(i, j)];
                    }
                    f /= hsum;
                    for j in m..=high {
                        self.h[(i, j)] -= f * self.ort[j];
                    }
                }
                self.ort[m] *= scale;
                self.h[(m, m - 1)] = scale * g;
            }
        }

        for m in ((low + 1)..high).rev() {
            if self.h[(m, m - 1)] != 0.0 {
                for i in (m + 1)..=high {
                    self.ort[i] = self.h[(i, m - 1)];
                }
                for j in m..=high {
                    let mut g = 0.0;
                    for i in m..=high {
                        g += self.ort[i] * self.v[(i, j)];
                    }
                    // Double division avoids possible underflow.
                    g = (g / self.ort[m]) / self.h[(m, m - 1)];
                    for i in m..=high {
                        self.v[(i, j)] += g * self.ort[i];
                    }
                }
            }
        }
    }

    // Keeps the reference algorithm's assignment structure.
    #[allow(unused_assignments)]
    fn hqr2(&mut self) -> Result<(), SpectralError> {
        let nn = self.n;
        let low = 0usize;
        let high = nn - 1;
        let mut exshift = 0.0;
        let (mut p, mut q, mut r, mut s, mut z) = (0.0, 0.0, 0.0, 0.0, 0.0);
        let (mut t, mut w, mut x, mut y);

        let mut norm = 0.0;
        for i in 0..nn {
            for j in i.saturating_sub(1)..nn {
                norm += self.h[(i, j)].abs();
            }
        }
        if norm == 0.0 {
            // Zero matrix: eigenvalues all zero, accumulated V (= identity)
            // is already a valid eigenvector basis.
            return Ok(());
        }

        let mut n = high;
        let mut iter = 0usize;
        loop {
            // Look for a single small sub-diagonal element.
            let mut l = n;
            while l > low {
                s = self.h[(l - 1, l - 1)].abs() + self.h[(l, l)].abs();
                if s == 0.0 {
                    s = norm;
                }
                if self.h[(l, l - 1)].abs() < EPS * s {
                    break;
                }
                l -= 1;
            }

            if l == n {
                // One root found.
                self.h[(n, n)] += exshift;
                self.d[n] = self.h[(n, n)];
                self.e[n] = 0.0;
                iter = 0;
                if n == low {
                    break;
                }
                n -= 1;
            } else if l + 1 == n {
                // Two roots found.
                w = self.h[(n, n - 1)] * self.h[(n - 1, n)];
                p = (self.h[(n - 1, n - 1)] - self.h[(n, n)]) / 2.0;
                q = p * p + w;
                z = q.abs().sqrt();
                self.h[(n, n)] += exshift;
                self.h[(n - 1, n - 1)] += exshift;
                x = self.h[(n, n)];

                if q >= 0.0 {
                    // Real pair.
                    z = if p >= 0.0 { p + z } else { p - z };
                    self.d[n - 1] = x + z;
                    self.d[n] = self.d[n - 1];
                    if z != 0.0 {
                        self.d[n] = x - w / z;
                    }
                    self.e[n - 1] = 0.0;
                    self.e[n] = 0.0;
                    x = self.h[(n, n - 1)];
                    s = x.abs() + z.abs();
                    p = x / s;
                    q = z / s;
                    r = (p * p + q * q).sqrt();
                    p /= r;
                    q /= r;

                    for j in (n - 1)..nn {
                        z = self.h[(n - 1, j)];
                        self.h[(n - 1, j)] = q * z + p * self.h[(n, j)];
                        self.h[(n, j)] = q * self.h[(n, j)] - p * z;
                    }
                    for i in 0..=n {
                        z = self.h[(i, n - 1)];
                        self.h[(i, n - 1)] = q * z + p * self.h[(i, n)];
                        self.h[(i, n)] = q * self.h[(i, n)] - p * z;
                    }
                    for i in low..=high {
                        z = self.v[(i, n - 1)];
                        self.v[(i, n - 1)] = q * z + p * self.v[(i, n)];
                        self.v[(i, n)] = q * self.v[(i, n)] - p * z;
                    }
                } else {
                    // Complex pair.
                    self.d[n - 1] = x + p;
                    self.d[n] = x + p;
                    self.e[n - 1] = z;
                    self.e[n] = -z;
                }
                iter = 0;
                if n <= low + 1 {
                    break;
                }
                n -= 2;
            } else {
                // No convergence yet; form a shift.
                x = self.h[(n, n)];
                y = 0.0;
                w = 0.0;
                if l < n {
                    y = self.h[(n - 1, n - 1)];
                    w = self.h[(n, n - 1)] * self.h[(n - 1, n)];
                }

                if iter == 10 {
                    exshift += x;
                    for i in low..=n {
                        self.h[(i, i)] -= x;
                    }
                    s = self.h[(n, n - 1)].abs() + self.h[(n - 1, n - 2)].abs();
                    x = 0.75 * s;
                    y = x;
                    w = -0.4375 * s * s;
                }

                if iter == 30 {
                    s = (y - x) / 2.0;
                    s = s * s + w;
                    if s > 0.0 {
                        s = s.sqrt();
                        if y < x {
                            s = -s;
                        }
                        s = x - w / ((y - x) / 2.0 + s);
                        for i in low..=n {
                            self.h[(i, i)] -= s;
                        }
                        exshift += s;
                        x = 0.964;
                        y = x;
                        w = x;
                    }
                }

                iter += 1;
                if iter > MAX_EIGEN_ITER {
                    return Err(SpectralError::NumericalFailure(
                        "QR iteration did not converge".into(),
                    ));
                }

                // Look for two consecutive small sub-diagonal elements.
                let mut m = n - 2;
                loop {
                    z = self.h[(m, m)];
                    r = x - z;
                    s = y - z;
                    p = (r * s - w) / self.h[(m + 1, m)] + self.h[(m, m + 1)];
                    q = self.h[(m + 1, m + 1)] - z - r - s;
                    r = self.h[(m + 2, m + 1)];
                    s = p.abs() + q.abs() + r.abs();
                    p /= s;
                    q /= s;
                    r /= s;
                    if m == l {
                        break;
                    }
                    if self.h[(m, m - 1)].abs() * (q.abs() + r.abs())
                        < EPS
                            * (p.abs()
                                * (self.h[(m - 1, m - 1)].abs()
                                    + z.abs()
                                    + self.h[(m + 1, m + 1)].abs()))
                    {
                        break;
                    }
                    m -= 1;
                }

                for i in (m + 2)..=n {
                    self.h[(i, i - 2)] = 0.0;
                    if i > m + 2 {
                        self.h[(i, i - 3)] = 0.0;
                    }
                }

                // Double QR step on rows l..=n and columns m..=n.
                for k in m..n {
                    let notlast = k != n - 1;
                    if k != m {
                        p = self.h[(k, k - 1)];
                        q = self.h[(k + 1, k - 1)];
                        r = if notlast { self.h[(k + 2, k - 1)] } else { 0.0 };
                        x = p.abs() + q.abs() + r.abs();
                        if x == 0.0 {
                            continue;
                        }
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                    s = (p * p + q * q + r * r).sqrt();
                    if p < 0.0 {
                        s = -s;
                    }
                    if s != 0.0 {
                        if k != m {
                            self.h[(k, k - 1)] = -s * x;
                        } else if l != m {
                            self.h[(k, k - 1)] = -self.h[(k, k - 1)];
                        }
                        p += s;
                        x = p / s;
                        y = q / s;
                        z = r / s;
                        q /= p;
                        r /= p;

                        for j in k..nn {
                            p = self.h[(k, j)] + q * self.h[(k + 1, j)];
                            if notlast {
                                p += r * self.h[(k + 2, j)];
                                self.h[(k + 2, j)] -= p * z;
                            }
                            self.h[(k, j)] -= p * x;
                            self.h[(k + 1, j)] -= p * y;
                        }
                        for i in 0..=n.min(k + 3) {
                            p = x * self.h[(i, k)] + y * self.h[(i, k + 1)];
                            if notlast {
                                p += z * self.h[(i, k + 2)];
                                self.h[(i, k + 2)] -= p * r;
                            }
                            self.h[(i, k)] -= p;
                            self.h[(i, k + 1)] -= p * q;
                        }
                        for i in low..=high {
                            p = x * self.v[(i, k)] + y * self.v[(i, k + 1)];
                            if notlast {
                                p += z * self.v[(i, k + 2)];
                                self.v[(i, k + 2)] -= p * r;
                            }
                            self.v[(i, k)] -= p;
                            self.v[(i, k + 1)] -= p * q;
                        }
                    }
                }
            }
        }

        // Back-substitute to find the vectors of the upper triangular form.
        for nb in (0..nn).rev() {
            p = self.d[nb];
            q = self.e[nb];

            if q == 0.0 {
                // Real vector.
                let mut l = nb;
                self.h[(nb, nb)] = 1.0;
                for i in (0..nb).rev() {
                    w = self.h[(i, i)] - p;
                    r = 0.0;
                    for j in l..=nb {
                        r += self.h[(i, j)] * self.h[(j, nb)];
                    }
                    if self.e[i] < 0.0 {
                        z = w;
                        s = r;
                    } else {
                        l = i;
                        if self.e[i] == 0.0 {
                            self.h[(i, nb)] = if w != 0.0 { -r / w } else { -r / (EPS * norm) };
                        } else {
                            // Solve the 2x2 real block.
                            x = self.h[(i, i + 1)];
                            y = self.h[(i + 1, i)];
                            q = (self.d[i] - p) * (self.d[i] - p) + self.e[i] * self.e[i];
                            t = (x * s - z * r) / q;
                            self.h[(i, nb)] = t;
                            self.h[(i + 1, nb)] = if x.abs() > z.abs() {
                                (-r - w * t) / x
                            } else {
                                (-s - y * t) / z
                            };
                        }
                        // Overflow control.
                        t = self.h[(i, nb)].abs();
                        if (EPS * t) * t > 1.0 {
                            for j in i..=nb {
                                self.h[(j, nb)] /= t;
                            }
                        }
                    }
                }
            } else if q < 0.0 {
                // Complex vector (second of the pair carries q < 0).
                let mut l = nb - 1;

                if self.h[(nb, nb - 1)].abs() > self.h[(nb - 1, nb)].abs() {
                    self.h[(nb - 1, nb - 1)] = q / self.h[(nb, nb - 1)];
                    self.h[(nb - 1, nb)] = -(self.h[(nb, nb)] - p) / self.h[(nb, nb - 1)];
                } else {
                    let (re, im) =
                        cdiv(0.0, -self.h[(nb - 1, nb)], self.h[(nb - 1, nb - 1)] - p, q);
                    self.h[(nb - 1, nb - 1)] = re;
                    self.h[(nb - 1, nb)] = im;
                }
                self.h[(nb, nb - 1)] = 0.0;
                self.h[(nb, nb)] = 1.0;
                for i in (0..nb.saturating_sub(1)).rev() {
                    let mut ra = 0.0;
                    let mut sa = 0.0;
                    for j in l..=nb {
                        ra += self.h[(i, j)] * self.h[(j, nb - 1)];
                        sa += self.h[(i, j)] * self.h[(j, nb)];
                    }
                    w = self.h[(i, i)] - p;

                    if self.e[i] < 0.0 {
                        z = w;
                        r = ra;
                        s = sa;
                    } else {
                        l = i;
                        if self.e[i] == 0.0 {
                            let (re, im) = cdiv(-ra, -sa, w, q);
                            self.h[(i, nb - 1)] = re;
                            self.h[(i, nb)] = im;
                        } else {
                            // Solve the complex 2x2 block.
                            x = self.h[(i, i + 1)];
                            y = self.h[(i + 1, i)];
                            let mut vr =
                                (self.d[i] - p) * (self.d[i] - p) + self.e[i] * self.e[i] - q * q;
                            let vi = (self.d[i] - p) * 2.0 * q;
                            if vr == 0.0 && vi == 0.0 {
                                vr = EPS
                                    * norm
                                    * (w.abs() + q.abs() + x.abs() + y.abs() + z.abs());
                            }
                            let (re, im) =
                                cdiv(x * r - z * ra + q * sa, x * s - z * sa - q * ra, vr, vi);
                            self.h[(i, nb - 1)] = re;
                            self.h[(i, nb)] = im;
                            if x.abs() > z.abs() + q.abs() {
                                self.h[(i + 1, nb - 1)] = (-ra - w * self.h[(i, nb - 1)]
                                    + q * self.h[(i, nb)])
                                    / x;
                                self.h[(i + 1, nb)] =
                                    (-sa - w * self.h[(i, nb)] - q * self.h[(i, nb - 1)]) / x;
                            } else {
                                let (re, im) = cdiv(
                                    -r - y * self.h[(i, nb - 1)],
                                    -s - y * self.h[(i, nb)],
                                    z,
                                    q,
                                );
                                self.h[(i + 1, nb - 1)] = re;
                                self.h[(i + 1, nb)] = im;
                            }
                        }
                        // Overflow control.
                        t = self.h[(i, nb - 1)].abs().max(self.h[(i, nb)].abs());
                        if (EPS * t) * t > 1.0 {
                            for j in i..=nb {
                                self.h[(j, nb - 1)] /= t;
                                self.h[(j, nb)] /= t;
                            }
                        }
                    }
                }
            }
        }

        // Back-transform to eigenvectors of the original matrix.
        for j in (low..nn).rev() {
            for i in low..=high {
                z = 0.0;
                for k in low..=j.min(high) {
                    z += self.v[(i, k)] * self.h[(k, j)];
                }
                self.v[(i, j)] = z;
            }
        }
        Ok(())
    }
}

/// Complex scalar division `(xr + i·xi) / (yr + i·yi)` without overflow.
fn cdiv(xr: f64, xi: f64, yr: f64, yi: f64) -> (f64, f64) {
    if yr.abs() > yi.abs() {
        let r = yi / yr;
        let d = yr + r * yi;
        ((xr + r * xi) / d, (xi - r * xr) / d)
    } else {
        let r = yr / yi;
        let d = yi + r * yr;
        ((r * xr + xi) / d, (r * xi - xr) / d)
    }
}
