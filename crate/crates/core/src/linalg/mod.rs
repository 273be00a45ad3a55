//! Dense complex matrix kernel.
//!
//! Row-major `Complex<f64>` matrices with the handful of operations the rest
//! of the crate needs: products, Kronecker products, partial trace and
//! partial transpose, factor permutations, Hermitian eigenvalues and
//! tolerance-aware positivity checks. Dimensions stay small (≤ 16 complex,
//! ≤ 32 after the real embedding), so everything is straightforward dense
//! arithmetic.

mod eigen;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol::TolerancePolicy;

pub type C64 = Complex<f64>;

pub const C_ZERO: C64 = Complex::new(0.0, 0.0);
pub const C_ONE: C64 = Complex::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub fn cr(re: f64) -> C64 {
    Complex::new(re, 0.0)
}

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![C_ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, C_ONE);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimMismatch("ragged rows".into()));
        }
        Ok(ComplexMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, cr(v));
            }
        }
        m
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &e) in entries.iter().enumerate() {
            m.set(i, i, e);
        }
        m
    }

    /// |u⟩⟨v|.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    /// Projector |i⟩⟨i| in dimension `n`.
    pub fn basis_proj(n: usize, i: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m.set(i, i, C_ONE);
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn add_at(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.cols + j] += v;
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn conj(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j).conj())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut m = self.clone();
        for v in &mut m.data {
            *v *= s;
        }
        m
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(cr(s))
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut m = self.clone();
        for (v, w) in m.data.iter_mut().zip(&other.data) {
            *v += w;
        }
        m
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut m = self.clone();
        for (v, w) in m.data.iter_mut().zip(&other.data) {
            *v -= w;
        }
        m
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "matmul: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == C_ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out.add_at(i, j, a * other.get(k, j));
                }
            }
        }
        out
    }

    /// A · v for a column vector.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    /// U · M · U† (sandwich product).
    pub fn sandwich(&self, u: &Self) -> Self {
        u.matmul(self).matmul(&u.adjoint())
    }

    pub fn trace(&self) -> C64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    /// Largest entrywise absolute value.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Standard Kronecker product: (A⊗B)[(i·rb+k),(j·cb+l)] = A[i,j]·B[k,l].
    pub fn kron(&self, other: &Self) -> Self {
        let (ra, ca) = (self.rows, self.cols);
        let (rb, cb) = (other.rows, other.cols);
        let mut out = Self::zeros(ra * rb, ca * cb);
        for i in 0..ra {
            for j in 0..ca {
                let a = self.get(i, j);
                if a == C_ZERO {
                    continue;
                }
                for k in 0..rb {
                    for l in 0..cb {
                        out.set(i * rb + k, j * cb + l, a * other.get(k, l));
                    }
                }
            }
        }
        out
    }

    /// Trace over tensor factor `which` of a square matrix on a product of
    /// factors with the given dimensions.
    pub fn partial_trace(&self, dims: &[usize], which: usize) -> Result<Self> {
        let total: usize = dims.iter().product();
        if !self.is_square() || self.rows != total {
            return Err(Error::DimMismatch(format!(
                "partial_trace: matrix is {}x{} but dims multiply to {}",
                self.rows, self.cols, total
            )));
        }
        if which >= dims.len() {
            return Err(Error::DimMismatch(format!(
                "partial_trace: factor index {} out of range (have {})",
                which,
                dims.len()
            )));
        }
        let kept: Vec<usize> = (0..dims.len()).filter(|&f| f != which).collect();
        let kept_dims: Vec<usize> = kept.iter().map(|&f| dims[f]).collect();
        let out_dim: usize = kept_dims.iter().product();
        let mut out = Self::zeros(out_dim, out_dim);

        let strides = index_strides(dims);
        let mut row_digits = vec![0usize; dims.len()];
        let mut col_digits = vec![0usize; dims.len()];
        let mut rdig = vec![0usize; kept.len()];
        let mut cdig = vec![0usize; kept.len()];
        for r_out in 0..out_dim {
            digits_of(r_out, &kept_dims, &mut rdig);
            for c_out in 0..out_dim {
                digits_of(c_out, &kept_dims, &mut cdig);
                let mut acc = C_ZERO;
                for t in 0..dims[which] {
                    for (p, &f) in kept.iter().enumerate() {
                        row_digits[f] = rdig[p];
                        col_digits[f] = cdig[p];
                    }
                    row_digits[which] = t;
                    col_digits[which] = t;
                    let ri: usize = row_digits.iter().zip(&strides).map(|(d, s)| d * s).sum();
                    let ci: usize = col_digits.iter().zip(&strides).map(|(d, s)| d * s).sum();
                    acc += self.get(ri, ci);
                }
                out.set(r_out, c_out, acc);
            }
        }
        Ok(out)
    }

    /// Transpose applied to one factor of a bipartite square matrix.
    pub fn partial_transpose(&self, dims: [usize; 2], which: usize) -> Result<Self> {
        let total = dims[0] * dims[1];
        if !self.is_square() || self.rows != total {
            return Err(Error::DimMismatch(format!(
                "partial_transpose: matrix is {}x{} but dims multiply to {}",
                self.rows, self.cols, total
            )));
        }
        if which > 1 {
            return Err(Error::DimMismatch(
                "partial_transpose: factor index must be 0 or 1".into(),
            ));
        }
        let (d0, d1) = (dims[0], dims[1]);
        let mut out = Self::zeros(total, total);
        for a in 0..d0 {
            for b in 0..d1 {
                for a2 in 0..d0 {
                    for b2 in 0..d1 {
                        let v = self.get(a * d1 + b, a2 * d1 + b2);
                        let (ri, ci) = if which == 0 {
                            (a2 * d1 + b, a * d1 + b2)
                        } else {
                            (a * d1 + b2, a2 * d1 + b)
                        };
                        out.set(ri, ci, v);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Reorder the tensor factors of a square matrix. `perm[new] = old`:
    /// factor `perm[p]` of the input becomes factor `p` of the output.
    pub fn permute_factors(&self, dims: &[usize], perm: &[usize]) -> Result<Self> {
        let total: usize = dims.iter().product();
        if !self.is_square() || self.rows != total {
            return Err(Error::DimMismatch(format!(
                "permute_factors: matrix is {}x{} but dims multiply to {}",
                self.rows, self.cols, total
            )));
        }
        if perm.len() != dims.len() {
            return Err(Error::DimMismatch(
                "permute_factors: perm length must match dims".into(),
            ));
        }
        let mut seen = vec![false; dims.len()];
        for &p in perm {
            if p >= dims.len() || seen[p] {
                return Err(Error::InvalidInput("permute_factors: not a permutation".into()));
            }
            seen[p] = true;
        }
        let in_strides = index_strides(dims);
        let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
        let mut out = Self::zeros(total, total);
        let mut rdig = vec![0usize; dims.len()];
        let mut cdig = vec![0usize; dims.len()];
        for r in 0..total {
            digits_of(r, &new_dims, &mut rdig);
            let ri: usize = rdig
                .iter()
                .enumerate()
                .map(|(p, d)| d * in_strides[perm[p]])
                .sum();
            for ccol in 0..total {
                digits_of(ccol, &new_dims, &mut cdig);
                let ci: usize = cdig
                    .iter()
                    .enumerate()
                    .map(|(p, d)| d * in_strides[perm[p]])
                    .sum();
                out.set(r, ccol, self.get(ri, ci));
            }
        }
        Ok(out)
    }

    /// Largest |m[i,j] − conj(m[j,i])| over all entries.
    pub fn hermiticity_defect(&self) -> f64 {
        assert!(self.is_square());
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in 0..self.cols {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// (m + m†)/2 after checking the defect is within `eps_eq`.
    pub fn hermitian_part(&self, eps_eq: f64) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::DimMismatch("hermitian_part: matrix not square".into()));
        }
        let defect = self.hermiticity_defect();
        if defect > eps_eq {
            return Err(Error::NotHermitian {
                asymmetry: defect,
                eps: eps_eq,
            });
        }
        Ok(self.add(&self.adjoint()).scale_re(0.5))
    }

    /// All eigenvalues of the Hermitian part, ascending. Errors when the
    /// matrix is not Hermitian within `eps_eq`.
    pub fn hermitian_eigenvalues(&self, eps_eq: f64) -> Result<Vec<f64>> {
        let h = self.hermitian_part(eps_eq)?;
        eigen::hermitian_eigenvalues(&h)
    }

    /// Smallest eigenvalue of the Hermitian part (default tolerance policy).
    pub fn min_eigenvalue(&self) -> Result<f64> {
        self.min_eigenvalue_with(TolerancePolicy::default().eps_eq)
    }

    pub fn min_eigenvalue_with(&self, eps_eq: f64) -> Result<f64> {
        let ev = self.hermitian_eigenvalues(eps_eq)?;
        Ok(ev.into_iter().fold(f64::INFINITY, f64::min))
    }

    /// Positive semidefinite within `tol.eps_psd`.
    pub fn is_psd(&self, tol: &TolerancePolicy) -> Result<bool> {
        Ok(self.min_eigenvalue_with(tol.eps_eq)? >= -tol.eps_psd)
    }
}

fn index_strides(dims: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    strides
}

fn digits_of(mut idx: usize, dims: &[usize], out: &mut [usize]) {
    for p in (0..dims.len()).rev() {
        out[p] = idx % dims[p];
        idx /= dims[p];
    }
}

// ---------------------------------------------------------------------------
// vectors

/// ⟨u|v⟩ with conjugation on the first argument.
pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// |u⟩ ⊗ |v⟩.
pub fn kron_vec(u: &[C64], v: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(u.len() * v.len());
    for a in u {
        for b in v {
            out.push(a * b);
        }
    }
    out
}

/// Computational basis vector |i⟩ in dimension n.
pub fn ket(n: usize, i: usize) -> Vec<C64> {
    let mut v = vec![C_ZERO; n];
    v[i] = C_ONE;
    v
}

// ---------------------------------------------------------------------------
// JSON encoding: {"rows":n,"cols":m,"re":[...],"im":[...]}, row-major.

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson {
            rows: self.rows,
            cols: self.cols,
            re: self.data.iter().map(|v| v.re).collect(),
            im: self.data.iter().map(|v| v.im).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(d)?;
        if raw.re.len() != raw.rows * raw.cols || raw.im.len() != raw.rows * raw.cols {
            return Err(serde::de::Error::custom(
                "matrix entry count does not match rows*cols",
            ));
        }
        Ok(ComplexMatrix {
            rows: raw.rows,
            cols: raw.cols,
            data: raw
                .re
                .into_iter()
                .zip(raw.im)
                .map(|(re, im)| Complex::new(re, im))
                .collect(),
        })
    }
}
