//! Dense complex third-order tensors and rank-(L,L,1) block terms.
//!
//! Storage is column-major with mode 1 fastest: entry `(i, j, n)` of a
//! `T1 × T2 × N` tensor lives at `i + T1·(j + T2·n)`.
//!
//! Unfolding conventions (rows × columns, first listed index fastest in the
//! column index):
//!
//! - mode 1: `T1 × (T2·N)`, column `j + T2·n`
//! - mode 2: `T2 × (T1·N)`, column `i + T1·n`
//! - mode 3: `N × (T1·T2)`, column `i + T1·j`

use std::ops::{Add, Index, IndexMut, Sub};

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::linalg::{frobenius, has_full_column_rank, identity, is_finite, CMatrix};

pub type Dims = (usize, usize, usize);

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexTensor3 {
    dims: Dims,
    data: Vec<Complex64>,
}

impl ComplexTensor3 {
    pub fn zeros(dims: Dims) -> Self {
        Self {
            dims,
            data: vec![Complex64::new(0.0, 0.0); dims.0 * dims.1 * dims.2],
        }
    }

    pub fn from_vec(dims: Dims, data: Vec<Complex64>) -> Result<Self> {
        if dims.0 == 0 || dims.1 == 0 || dims.2 == 0 {
            return invalid(format!("tensor dims must be positive, got {dims:?}"));
        }
        if data.len() != dims.0 * dims.1 * dims.2 {
            return invalid(format!(
                "tensor of dims {dims:?} needs {} entries, got {}",
                dims.0 * dims.1 * dims.2,
                data.len()
            ));
        }
        Ok(Self { dims, data })
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(dims.0 * dims.1 * dims.2);
        for n in 0..dims.2 {
            for j in 0..dims.1 {
                for i in 0..dims.0 {
                    data.push(f(i, j, n));
                }
            }
        }
        Self { dims, data }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn offset(&self, i: usize, j: usize, n: usize) -> usize {
        i + self.dims.0 * (j + self.dims.1 * n)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scale(&mut self, c: Complex64) {
        self.data.iter_mut().for_each(|z| *z *= c);
    }

    /// `self += c · other`.
    pub fn axpy(&mut self, c: Complex64, other: &Self) -> Result<()> {
        self.check_same_dims(other)?;
        for (z, w) in self.data.iter_mut().zip(&other.data) {
            *z += c * w;
        }
        Ok(())
    }

    fn check_same_dims(&self, other: &Self) -> Result<()> {
        if self.dims != other.dims {
            return invalid(format!(
                "tensor dims mismatch: {:?} vs {:?}",
                self.dims, other.dims
            ));
        }
        Ok(())
    }

    /// Frontal slice `X(:, :, n)` as a `T1 × T2` matrix.
    pub fn frontal_slice(&self, n: usize) -> CMatrix {
        let (t1, t2, _) = self.dims;
        let start = t1 * t2 * n;
        CMatrix::from_column_slice(t1, t2, &self.data[start..start + t1 * t2])
    }

    /// Mode-`mode` unfolding (`mode` ∈ {1, 2, 3}), see the module docs for
    /// the column ordering.
    pub fn unfold(&self, mode: usize) -> Result<CMatrix> {
        let (t1, t2, nn) = self.dims;
        match mode {
            1 => Ok(CMatrix::from_column_slice(t1, t2 * nn, &self.data)),
            2 => {
                let mut m = CMatrix::zeros(t2, t1 * nn);
                for n in 0..nn {
                    for j in 0..t2 {
                        for i in 0..t1 {
                            m[(j, i + t1 * n)] = self[(i, j, n)];
                        }
                    }
                }
                Ok(m)
            }
            3 => {
                let mut m = CMatrix::zeros(nn, t1 * t2);
                for n in 0..nn {
                    for j in 0..t2 {
                        for i in 0..t1 {
                            m[(n, i + t1 * j)] = self[(i, j, n)];
                        }
                    }
                }
                Ok(m)
            }
            _ => invalid(format!("unfolding mode must be 1, 2 or 3, got {mode}")),
        }
    }

    /// Inverse of [`ComplexTensor3::unfold`].
    pub fn fold(matrix: &CMatrix, mode: usize, dims: Dims) -> Result<Self> {
        let (t1, t2, nn) = dims;
        let expected = match mode {
            1 => (t1, t2 * nn),
            2 => (t2, t1 * nn),
            3 => (nn, t1 * t2),
            _ => return invalid(format!("unfolding mode must be 1, 2 or 3, got {mode}")),
        };
        if matrix.shape() != expected {
            return invalid(format!(
                "mode-{mode} unfolding of {dims:?} must be {expected:?}, got {:?}",
                matrix.shape()
            ));
        }
        Ok(Self::from_fn(dims, |i, j, n| match mode {
            1 => matrix[(i, j + t2 * n)],
            2 => matrix[(j, i + t1 * n)],
            _ => matrix[(n, i + t1 * j)],
        }))
    }
}

impl Index<(usize, usize, usize)> for ComplexTensor3 {
    type Output = Complex64;
    fn index(&self, (i, j, n): (usize, usize, usize)) -> &Complex64 {
        &self.data[self.offset(i, j, n)]
    }
}

impl IndexMut<(usize, usize, usize)> for ComplexTensor3 {
    fn index_mut(&mut self, (i, j, n): (usize, usize, usize)) -> &mut Complex64 {
        let o = self.offset(i, j, n);
        &mut self.data[o]
    }
}

impl Add for &ComplexTensor3 {
    type Output = ComplexTensor3;
    fn add(self, rhs: Self) -> ComplexTensor3 {
        assert_eq!(self.dims, rhs.dims, "tensor dims mismatch");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        ComplexTensor3 { dims: self.dims, data }
    }
}

impl Sub for &ComplexTensor3 {
    type Output = ComplexTensor3;
    fn sub(self, rhs: Self) -> ComplexTensor3 {
        assert_eq!(self.dims, rhs.dims, "tensor dims mismatch");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        ComplexTensor3 { dims: self.dims, data }
    }
}

/// One user's faded contribution `(A·G·Bᵀ) ⊗ h`.
///
/// `core` is the `L × L` mixing matrix `G`. Transmit-side terms and raw solver
/// iterates carry `G = I`; canonicalized terms keep `A`, `B` column-orthonormal
/// and park the remaining mixing and scale in `G` and `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTerm {
    pub a: CMatrix,
    pub b: CMatrix,
    pub core: CMatrix,
    pub h: Vec<Complex64>,
}

impl BlockTerm {
    /// Validated constructor with `G = I`.
    pub fn new(a: CMatrix, b: CMatrix, h: Vec<Complex64>) -> Result<Self> {
        let l = a.ncols();
        Self::with_core(a, b, identity(l), h)
    }

    pub fn with_core(a: CMatrix, b: CMatrix, core: CMatrix, h: Vec<Complex64>) -> Result<Self> {
        let term = Self { a, b, core, h };
        term.validate()?;
        Ok(term)
    }

    /// Unvalidated constructor for solver iterates, which may be degenerate.
    pub(crate) fn from_factors(a: CMatrix, b: CMatrix, h: Vec<Complex64>) -> Self {
        let l = a.ncols();
        Self { a, b, core: identity(l), h }
    }

    fn validate(&self) -> Result<()> {
        let l = self.a.ncols();
        if l == 0 || self.b.ncols() != l {
            return invalid(format!(
                "A and B must share L ≥ 1 columns, got {} and {}",
                self.a.ncols(),
                self.b.ncols()
            ));
        }
        if self.core.shape() != (l, l) {
            return invalid(format!("core must be {l}x{l}, got {:?}", self.core.shape()));
        }
        let (t1, t2) = (self.a.nrows(), self.b.nrows());
        if self.h.is_empty() || t1 == 0 || t2 == 0 {
            return invalid("block term dims must be positive");
        }
        if l >= 2 && l >= t1.min(t2) {
            return invalid(format!("L = {l} must be below min(T1, T2) = {}", t1.min(t2)));
        }
        if !is_finite(&self.a) || !is_finite(&self.b) || !is_finite(&self.core) {
            return invalid("block term factors must be finite");
        }
        if !has_full_column_rank(&self.a) || !has_full_column_rank(&self.b) {
            return invalid("A and B must have full column rank");
        }
        Ok(())
    }

    pub fn l(&self) -> usize {
        self.a.ncols()
    }

    pub fn dims(&self) -> Dims {
        (self.a.nrows(), self.b.nrows(), self.h.len())
    }

    /// The matrix signal `A·G·Bᵀ`.
    pub fn signal(&self) -> CMatrix {
        &self.a * &self.core * self.b.transpose()
    }

    /// `‖(A·G·Bᵀ) ⊗ h‖_F²`.
    pub fn energy(&self) -> f64 {
        let s = frobenius(&self.signal());
        let h: f64 = self.h.iter().map(|z| z.norm_sqr()).sum();
        s * s * h
    }

    /// Accumulate `c · (A·G·Bᵀ) ⊗ h` into `out`.
    fn accumulate(&self, out: &mut ComplexTensor3, c: Complex64) {
        let s = self.signal();
        let (t1, t2, _) = out.dims;
        for (n, hn) in self.h.iter().enumerate() {
            let w = c * hn;
            let base = t1 * t2 * n;
            for (o, z) in out.data[base..base + t1 * t2].iter_mut().zip(s.iter()) {
                *o += w * z;
            }
        }
    }
}

/// Ordered list of block terms sharing `(T1, T2, N, L)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BtdModel {
    terms: Vec<BlockTerm>,
}

impl BtdModel {
    pub fn new(terms: Vec<BlockTerm>) -> Result<Self> {
        if let Some(first) = terms.first() {
            let (dims, l) = (first.dims(), first.l());
            if let Some(bad) = terms.iter().find(|t| t.dims() != dims || t.l() != l) {
                return invalid(format!(
                    "block terms disagree: {:?}/L={} vs {:?}/L={}",
                    dims,
                    l,
                    bad.dims(),
                    bad.l()
                ));
            }
        }
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[BlockTerm] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<BlockTerm> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn dims(&self) -> Option<Dims> {
        self.terms.first().map(BlockTerm::dims)
    }

    pub fn l(&self) -> Option<usize> {
        self.terms.first().map(BlockTerm::l)
    }

    /// Concatenation of two models.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self::new(terms)
    }
}

/// `(A·Bᵀ) ⊗ h` as a dense tensor.
pub fn synthesize_block_term(term: &BlockTerm) -> Result<ComplexTensor3> {
    term.validate_shapes()?;
    let mut out = ComplexTensor3::zeros(term.dims());
    term.accumulate(&mut out, Complex64::new(1.0, 0.0));
    Ok(out)
}

/// `Σ_k (A_k·B_kᵀ) ⊗ h_k + noise`.
pub fn synthesize_received(model: &BtdModel, noise: Option<&ComplexTensor3>) -> Result<ComplexTensor3> {
    let dims = match model.dims() {
        Some(d) => d,
        None => return invalid("cannot synthesize from an empty model"),
    };
    let mut out = match noise {
        Some(nz) if nz.dims() != dims => {
            return invalid(format!("noise dims {:?} do not match model dims {dims:?}", nz.dims()))
        }
        Some(nz) => nz.clone(),
        None => ComplexTensor3::zeros(dims),
    };
    for term in model.terms() {
        term.validate_shapes()?;
        term.accumulate(&mut out, Complex64::new(1.0, 0.0));
    }
    Ok(out)
}

/// `Y − Σ_k (A_k·Bᵀ_k) ⊗ h_k`.
pub fn residual_tensor(model: &BtdModel, y: &ComplexTensor3) -> Result<ComplexTensor3> {
    if let Some(d) = model.dims() {
        if d != y.dims() {
            return invalid(format!("model dims {d:?} do not match tensor dims {:?}", y.dims()));
        }
    }
    let mut r = y.clone();
    for term in model.terms() {
        term.validate_shapes()?;
        term.accumulate(&mut r, Complex64::new(-1.0, 0.0));
    }
    Ok(r)
}

/// `‖Y − Σ_k (A_k·Bᵀ_k) ⊗ h_k‖_F`.
pub fn residual(model: &BtdModel, y: &ComplexTensor3) -> Result<f64> {
    residual_tensor(model, y).map(|r| r.norm())
}

impl BlockTerm {
    fn validate_shapes(&self) -> Result<()> {
        let l = self.a.ncols();
        if self.b.ncols() != l || self.core.shape() != (l, l) || self.h.is_empty() {
            return invalid(format!(
                "inconsistent block term shapes: A {:?}, B {:?}, core {:?}, h {}",
                self.a.shape(),
                self.b.shape(),
                self.core.shape(),
                self.h.len()
            ));
        }
        Ok(())
    }
}
