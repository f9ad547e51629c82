//! Dense symmetric/Hermitian and rectangular matrices tagged with their base field.
//!
//! Entries are stored row-major as `Complex64`; real matrices keep every
//! imaginary part at exactly zero. Symmetric matrices store the full square.

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Absolute tolerance for the structural cone predicates.
pub const TOL_ZERO: f64 = 1e-10;

/// Tolerance for the symmetry check applied to matrices read from files.
pub const TOL_SYMMETRY: f64 = 1e-12;

pub type C64 = Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Field::Real => "real",
            Field::Complex => "complex",
        })
    }
}

impl std::str::FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real" | "R" => Ok(Field::Real),
            "complex" | "C" => Ok(Field::Complex),
            other => domain(format!("unknown field `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ConeLabel {
    ZeroDiagonal,
    EqualDiagonal,
    PSD,
    Nonnegative,
    WeightedLaplacian,
    DiagonallyDominant,
}

/// An n×n real symmetric or complex Hermitian matrix.
///
/// Construction enforces exact symmetry: the lower triangle is always the
/// conjugate of the upper triangle and the diagonal is real.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    n: usize,
    field: Field,
    data: Vec<C64>,
}

impl SymMatrix {
    /// Build from the upper triangle of `f`; the lower triangle is mirrored.
    pub fn from_fn(n: usize, field: Field, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        assert!(n > 0, "matrix dimension must be positive");
        let mut data = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            data[i * n + i] = C64::new(f(i, i).re, 0.0);
            for j in i + 1..n {
                let mut v = f(i, j);
                if field == Field::Real {
                    v.im = 0.0;
                }
                data[i * n + j] = v;
                data[j * n + i] = v.conj();
            }
        }
        SymMatrix { n, field, data }
    }

    pub fn real_from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        Self::from_fn(n, Field::Real, |i, j| C64::new(f(i, j), 0.0))
    }

    /// Build a real symmetric matrix from row-major entries, rejecting
    /// asymmetry larger than [`TOL_SYMMETRY`].
    pub fn from_real(n: usize, entries: &[f64]) -> Result<Self> {
        let data: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_entries(n, Field::Real, &data)
    }

    /// Build from row-major entries, checking symmetry (Hermitian symmetry
    /// for complex input) and realness of the diagonal.
    pub fn from_entries(n: usize, field: Field, entries: &[C64]) -> Result<Self> {
        if n == 0 || entries.len() != n * n {
            return domain(format!("expected {} entries for a {n}x{n} matrix, got {}", n * n, entries.len()));
        }
        for (k, v) in entries.iter().enumerate() {
            if !v.re.is_finite() || !v.im.is_finite() {
                return domain(format!("entry {k} is not finite"));
            }
            if field == Field::Real && v.im != 0.0 {
                return domain(format!("entry {k} is complex in a real matrix"));
            }
        }
        for i in 0..n {
            let im = entries[i * n + i].im;
            if im.abs() > TOL_SYMMETRY {
                return Err(Error::ComplexDiagonal { i, im });
            }
            for j in i + 1..n {
                let gap = (entries[i * n + j] - entries[j * n + i].conj()).norm();
                if gap > TOL_SYMMETRY {
                    return Err(Error::NotSymmetric { i, j, gap });
                }
            }
        }
        Ok(Self::from_fn(n, field, |i, j| {
            if i == j {
                entries[i * n + i]
            } else {
                (entries[i * n + j] + entries[j * n + i].conj()) * 0.5
            }
        }))
    }

    pub fn diag(entries: &[f64]) -> Self {
        Self::real_from_fn(entries.len(), |i, j| if i == j { entries[i] } else { 0.0 })
    }

    pub fn zeros(n: usize, field: Field) -> Self {
        Self::from_fn(n, field, |_, _| C64::new(0.0, 0.0))
    }

    pub fn identity(n: usize, field: Field) -> Self {
        Self::from_fn(n, field, |i, j| C64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.n + j]
    }

    /// Real part of entry (i, j).
    pub fn re(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j].re
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    /// Row-major real entries; fails for complex-tagged matrices.
    pub fn real_entries(&self) -> Result<Vec<f64>> {
        self.expect_field(Field::Real)?;
        Ok(self.data.iter().map(|v| v.re).collect())
    }

    pub fn expect_field(&self, field: Field) -> Result<()> {
        if self.field == field {
            Ok(())
        } else {
            Err(Error::FieldMismatch { expected: field, found: self.field })
        }
    }

    /// The same entries, tagged complex.
    pub fn to_complex(&self) -> Self {
        SymMatrix { field: Field::Complex, ..self.clone() }
    }

    /// True when every entry has zero imaginary part.
    pub fn is_real_valued(&self) -> bool {
        self.data.iter().all(|v| v.im == 0.0)
    }

    pub fn map(&self, mut f: impl FnMut(C64) -> C64) -> Self {
        Self::from_fn(self.n, self.field, |i, j| f(self.get(i, j)))
    }

    pub fn neg(&self) -> Self {
        self.map(|v| -v)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    pub fn add(&self, other: &SymMatrix) -> Self {
        assert_eq!(self.n, other.n);
        let field = if self.field == other.field { self.field } else { Field::Complex };
        Self::from_fn(self.n, field, |i, j| self.get(i, j) + other.get(i, j))
    }

    pub fn sub(&self, other: &SymMatrix) -> Self {
        self.add(&other.neg())
    }

    /// A + αI.
    pub fn shift(&self, alpha: f64) -> Self {
        Self::from_fn(self.n, self.field, |i, j| {
            if i == j {
                self.get(i, i) + alpha
            } else {
                self.get(i, j)
            }
        })
    }

    /// D* A D for the diagonal matrix D = diag(d).
    pub fn congruence_diag(&self, d: &[C64]) -> Self {
        assert_eq!(d.len(), self.n);
        let field = if d.iter().any(|z| z.im != 0.0) { Field::Complex } else { self.field };
        Self::from_fn(self.n, field, |i, j| d[i].conj() * self.get(i, j) * d[j])
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.re(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Sum of all entries (real part).
    pub fn entry_sum(&self) -> f64 {
        self.data.iter().map(|v| v.re).sum()
    }

    pub fn entry_abs_sum(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).sum()
    }

    /// x* A x for a vector over the matrix field.
    pub fn quad_form(&self, x: &[C64]) -> f64 {
        assert_eq!(x.len(), self.n);
        let mut s = 0.0;
        for i in 0..self.n {
            let mut row = C64::new(0.0, 0.0);
            for j in 0..self.n {
                row += self.get(i, j) * x[j];
            }
            s += (x[i].conj() * row).re;
        }
        s
    }

    /// Σ a_ij g_ij for a Hermitian matrix G given row-major.
    pub fn pair_sum(&self, g: &[C64]) -> f64 {
        assert_eq!(g.len(), self.n * self.n);
        self.data.iter().zip(g).map(|(a, g)| (a * g).re).sum()
    }

    pub fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn to_nalgebra_real(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.re(i, j))
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = match self.field {
            Field::Real => SymmetricEigen::new(self.to_nalgebra_real()).eigenvalues.iter().copied().collect(),
            Field::Complex => SymmetricEigen::new(self.to_nalgebra()).eigenvalues.iter().copied().collect(),
        };
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Unit eigenvector of the largest eigenvalue.
    pub fn leading_eigenvector(&self) -> Vec<C64> {
        match self.field {
            Field::Real => {
                let eig = SymmetricEigen::new(self.to_nalgebra_real());
                let k = eig.eigenvalues.imax();
                eig.eigenvectors.column(k).iter().map(|&x| C64::new(x, 0.0)).collect()
            }
            Field::Complex => {
                let eig = SymmetricEigen::new(self.to_nalgebra());
                let k = eig.eigenvalues.imax();
                eig.eigenvectors.column(k).iter().copied().collect()
            }
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// PSD test with the scale-aware tolerance 1e−8·‖A‖_F.
    pub fn is_psd(&self) -> bool {
        self.min_eigenvalue() >= -1e-8 * self.frobenius_norm()
    }

    pub fn classify_cones(&self) -> BTreeSet<ConeLabel> {
        let n = self.n;
        let mut out = BTreeSet::new();
        let d: Vec<f64> = (0..n).map(|i| self.re(i, i)).collect();
        if d.iter().all(|x| x.abs() <= TOL_ZERO) {
            out.insert(ConeLabel::ZeroDiagonal);
        }
        if d.iter().all(|x| (x - d[0]).abs() <= TOL_ZERO) {
            out.insert(ConeLabel::EqualDiagonal);
        }
        if self.is_psd() {
            out.insert(ConeLabel::PSD);
        }
        if self.data.iter().all(|v| v.im == 0.0 && v.re >= 0.0) {
            out.insert(ConeLabel::Nonnegative);
        }
        if self.field == Field::Real {
            let rows_vanish = (0..n).all(|i| (0..n).map(|j| self.re(i, j)).sum::<f64>().abs() <= TOL_ZERO);
            let off_nonpos = (0..n).all(|i| (0..n).all(|j| i == j || self.re(i, j) <= TOL_ZERO));
            if rows_vanish && off_nonpos {
                out.insert(ConeLabel::WeightedLaplacian);
            }
        }
        if self.is_diagonally_dominant() {
            out.insert(ConeLabel::DiagonallyDominant);
        }
        out
    }

    pub fn is_diagonally_dominant(&self) -> bool {
        (0..self.n).all(|i| {
            let off: f64 = (0..self.n).filter(|&j| j != i).map(|j| self.get(i, j).norm()).sum();
            self.re(i, i) >= off - TOL_ZERO
        })
    }

    /// Orthogonal projection onto diagonal matrices.
    pub fn delta_projection(&self) -> Self {
        Self::from_fn(self.n, self.field, |i, j| if i == j { self.get(i, i) } else { C64::new(0.0, 0.0) })
    }

    /// Orthogonal projection onto equal-diagonal matrices: off-diagonal kept,
    /// every diagonal entry replaced by tr(A)/n.
    pub fn xi_projection(&self) -> Self {
        let t = self.trace() / self.n as f64;
        Self::from_fn(self.n, self.field, |i, j| if i == j { C64::new(t, 0.0) } else { self.get(i, j) })
    }

    /// Frobenius inner product Re tr(A* B).
    pub fn frobenius_dot(&self, other: &SymMatrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a.conj() * b).re).sum()
    }

    /// The weighted Laplacian diag(A𝟙) − A of a real zero-diagonal matrix.
    pub fn laplacian_of(&self) -> Result<Self> {
        self.expect_field(Field::Real)?;
        if (0..self.n).any(|i| self.re(i, i).abs() > TOL_ZERO) {
            return domain("laplacian_of requires a zero diagonal");
        }
        let rows: Vec<f64> = (0..self.n).map(|i| (0..self.n).filter(|&j| j != i).map(|j| self.re(i, j)).sum()).collect();
        Ok(Self::real_from_fn(self.n, |i, j| if i == j { rows[i] } else { -self.re(i, j) }))
    }

    /// Split a real diagonally dominant matrix as A = H + L, with H
    /// nonnegative and diagonally dominant and L a weighted Laplacian whose
    /// off-diagonal support is disjoint from that of H.
    pub fn sdd_decompose(&self) -> Result<(SymMatrix, SymMatrix)> {
        self.expect_field(Field::Real)?;
        if !self.is_diagonally_dominant() {
            return domain("sdd_decompose requires a diagonally dominant matrix");
        }
        let n = self.n;
        let b = Self::real_from_fn(n, |i, j| if i != j && self.re(i, j) < 0.0 { -self.re(i, j) } else { 0.0 });
        let l = b.laplacian_of()?;
        let h = Self::real_from_fn(n, |i, j| {
            if i == j {
                self.re(i, i) - l.re(i, i)
            } else if self.re(i, j) < 0.0 {
                0.0
            } else {
                self.re(i, j)
            }
        });
        Ok((h, l))
    }

    /// The 2n×2n real symmetric matrix obtained by replacing each entry
    /// α+iβ with the block [[α, β], [−β, α]].
    pub fn hermitian_to_real(&self) -> Result<Self> {
        self.expect_field(Field::Complex)?;
        let n = self.n;
        Ok(Self::real_from_fn(2 * n, |p, q| {
            let a = self.get(p / 2, q / 2);
            match (p % 2, q % 2) {
                (0, 0) | (1, 1) => a.re,
                (0, 1) => a.im,
                _ => -a.im,
            }
        }))
    }
}

/// The real vector (α₁, −β₁, …, αₙ, −βₙ) of δ = α + iβ, for which
/// δ*Aδ equals δ̂ᵀÂδ̂ with Â = `hermitian_to_real(A)`.
pub fn realify_vector(delta: &[C64]) -> Vec<C64> {
    delta.iter().flat_map(|z| [C64::new(z.re, 0.0), C64::new(-z.im, 0.0)]).collect()
}

/// An m×n matrix over the tagged field.
#[derive(Clone, Debug, PartialEq)]
pub struct RectMatrix {
    m: usize,
    n: usize,
    field: Field,
    data: Vec<C64>,
}

impl RectMatrix {
    pub fn from_entries(m: usize, n: usize, field: Field, entries: &[C64]) -> Result<Self> {
        if m == 0 || n == 0 || entries.len() != m * n {
            return domain(format!("expected {} entries for a {m}x{n} matrix, got {}", m * n, entries.len()));
        }
        if entries.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return domain("matrix has non-finite entries");
        }
        if field == Field::Real && entries.iter().any(|v| v.im != 0.0) {
            return domain("complex entry in a real matrix");
        }
        Ok(RectMatrix { m, n, field, data: entries.to_vec() })
    }

    pub fn from_real(m: usize, n: usize, entries: &[f64]) -> Result<Self> {
        let data: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_entries(m, n, Field::Real, &data)
    }

    pub fn real_from_fn(m: usize, n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let data = (0..m * n).map(|k| C64::new(f(k / n, k % n), 0.0)).collect();
        RectMatrix { m, n, field: Field::Real, data }
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.n + j]
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn to_complex(&self) -> Self {
        RectMatrix { field: Field::Complex, ..self.clone() }
    }

    /// The Hermitian dilation [[0, B], [B*, 0]].
    pub fn embed(&self) -> SymMatrix {
        let (m, n) = (self.m, self.n);
        SymMatrix::from_fn(m + n, self.field, |i, j| {
            if i < m && j >= m {
                self.get(i, j - m)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }
}
