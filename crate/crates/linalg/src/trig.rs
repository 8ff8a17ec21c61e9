//! Closed-form averaging for nilpotent sinusoidal forcing.
//!
//! Entries of the transition matrix are trigonometric polynomials whose
//! frequencies are integer combinations of a basis `ω_1..ω_S`. When the basis
//! is rationally independent (square roots of distinct squarefree integers,
//! for example) the long-time mean of such a polynomial is exactly its
//! constant term, so `mean(Φ⁻¹ A Φ)` can be computed symbolically.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::LinalgError;

const PRUNE: f64 = 1e-300;
/// A frequency-zero coefficient above this size means a secular primitive.
const SECULAR_TOLERANCE: f64 = 1e-13;

/// Trigonometric polynomial `Σ c_k exp(i (k·ω) t)` keyed by integer vectors `k`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrigPoly {
    terms: BTreeMap<Vec<i32>, Complex64>,
}

impl TrigPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64, basis_len: usize) -> Self {
        let mut p = Self::zero();
        if c != 0.0 {
            p.terms.insert(vec![0; basis_len], Complex64::new(c, 0.0));
        }
        p
    }

    /// `amplitude · sin(ω_index · t)`.
    pub fn sine(amplitude: f64, index: usize, basis_len: usize) -> Self {
        let mut p = Self::zero();
        if amplitude == 0.0 {
            return p;
        }
        let mut k = vec![0; basis_len];
        k[index] = 1;
        // sin x = (e^{ix} − e^{−ix}) / 2i
        p.terms.insert(k.clone(), Complex64::new(0.0, -0.5 * amplitude));
        k[index] = -1;
        p.terms.insert(k, Complex64::new(0.0, 0.5 * amplitude));
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Constant term, i.e. the long-time mean.
    pub fn mean(&self) -> f64 {
        self.terms
            .iter()
            .find(|(k, _)| k.iter().all(|&v| v == 0))
            .map(|(_, c)| c.re)
            .unwrap_or(0.0)
    }

    /// Evaluates at time `t` for the given basis frequencies.
    pub fn eval(&self, t: f64, basis: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(k, c)| {
                let w = frequency(k, basis);
                (c * Complex64::new(0.0, w * t).exp()).re
            })
            .sum()
    }

    fn add_term(&mut self, k: Vec<i32>, c: Complex64) {
        let entry = self.terms.entry(k).or_insert(Complex64::new(0.0, 0.0));
        *entry += c;
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| c.norm() > PRUNE);
    }

    pub fn add_assign(&mut self, other: &TrigPoly, scale: f64) {
        if scale == 0.0 {
            return;
        }
        for (k, c) in &other.terms {
            self.add_term(k.clone(), c * scale);
        }
        self.prune();
    }

    pub fn mul(&self, other: &TrigPoly) -> TrigPoly {
        let mut out = TrigPoly::zero();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let k: Vec<i32> = ka.iter().zip(kb).map(|(a, b)| a + b).collect();
                out.add_term(k, ca * cb);
            }
        }
        out.prune();
        out
    }

    /// Mean of the product without forming it.
    pub fn mean_of_product(&self, other: &TrigPoly) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (ka, ca) in &self.terms {
            let neg: Vec<i32> = ka.iter().map(|v| -v).collect();
            if let Some(cb) = other.terms.get(&neg) {
                acc += ca * cb;
            }
        }
        acc.re
    }

    /// Primitive `∫₀ᵗ p(s) ds`.
    pub fn integrate(&self, basis: &[f64]) -> Result<TrigPoly, LinalgError> {
        let mut out = TrigPoly::zero();
        let zero = vec![0; basis.len()];
        let mut constant = Complex64::new(0.0, 0.0);
        for (k, c) in &self.terms {
            let w = frequency(k, basis);
            if k.iter().all(|&v| v == 0) || w.abs() < 1e-12 {
                if c.norm() > SECULAR_TOLERANCE {
                    return Err(LinalgError::Secular);
                }
                continue;
            }
            let q = c / Complex64::new(0.0, w);
            out.add_term(k.clone(), q);
            constant -= q;
        }
        out.add_term(zero, constant);
        out.prune();
        Ok(out)
    }
}

fn frequency(k: &[i32], basis: &[f64]) -> f64 {
    k.iter().zip(basis).map(|(&a, &w)| a as f64 * w).sum()
}

/// Square matrix of trigonometric polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigMatrix {
    n: usize,
    entries: Vec<TrigPoly>,
}

impl TrigMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, entries: vec![TrigPoly::zero(); n * n] }
    }

    pub fn from_constant(m: &DMatrix<f64>, basis_len: usize) -> Self {
        let n = m.nrows();
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.entries[i * n + j] = TrigPoly::constant(m[(i, j)], basis_len);
            }
        }
        out
    }

    pub fn get(&self, i: usize, j: usize) -> &TrigPoly {
        &self.entries[i * self.n + j]
    }

    fn get_mut(&mut self, i: usize, j: usize) -> &mut TrigPoly {
        &mut self.entries[i * self.n + j]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(TrigPoly::is_zero)
    }

    pub fn mul(&self, other: &TrigMatrix) -> TrigMatrix {
        let n = self.n;
        let mut out = TrigMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let prod = a.mul(b);
                    out.get_mut(i, j).add_assign(&prod, 1.0);
                }
            }
        }
        out
    }

    pub fn add_assign(&mut self, other: &TrigMatrix, scale: f64) {
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            a.add_assign(b, scale);
        }
    }

    pub fn integrate(&self, basis: &[f64]) -> Result<TrigMatrix, LinalgError> {
        let mut out = TrigMatrix::zeros(self.n);
        for (o, e) in out.entries.iter_mut().zip(&self.entries) {
            *o = e.integrate(basis)?;
        }
        Ok(out)
    }

    pub fn mean(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j).mean())
    }

    pub fn eval(&self, t: f64, basis: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j).eval(t, basis))
    }

    /// `mean(self · other)` computed entrywise from constant-term pairings.
    pub fn mean_of_product(&self, other: &TrigMatrix) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| self.get(i, k).mean_of_product(other.get(k, j))).sum()
        })
    }
}

/// One forcing term `amplitude · sin(basis[index] · t) · matrix`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisTerm {
    pub matrix: DMatrix<f64>,
    pub amplitude: f64,
    pub index: usize,
}

/// Builds the forcing matrix symbolically.
pub fn forcing(n: usize, terms: &[BasisTerm], basis_len: usize) -> TrigMatrix {
    let mut p = TrigMatrix::zeros(n);
    for term in terms {
        let s = TrigPoly::sine(term.amplitude, term.index, basis_len);
        for i in 0..n {
            for j in 0..n {
                let m = term.matrix[(i, j)];
                if m != 0.0 {
                    p.get_mut(i, j).add_assign(&s, m);
                }
            }
        }
    }
    p
}

/// Mean-identity transition matrix `Φ̃ = Φ(t,0)·C` and its inverse, both symbolic.
#[derive(Debug, Clone)]
pub struct SymbolicTransition {
    pub phi: TrigMatrix,
    pub phi_inv: TrigMatrix,
}

/// Picard series for `Φ' = PΦ`, which terminates because `P` is nilpotent.
pub fn symbolic_transition(
    p: &TrigMatrix,
    basis: &[f64],
) -> Result<SymbolicTransition, LinalgError> {
    let n = p.n;
    let id = DMatrix::<f64>::identity(n, n);
    let mut l_total = TrigMatrix::zeros(n);
    let mut level = p.integrate(basis)?;
    let mut depth = 0;
    while !level.is_zero() {
        depth += 1;
        if depth > n {
            return Err(LinalgError::NotNilpotent);
        }
        l_total.add_assign(&level, 1.0);
        level = p.mul(&level).integrate(basis)?;
    }
    // (I + L)⁻¹ = Σ (−L)^k, finite because L inherits the nilpotent pattern.
    let mut inv = TrigMatrix::from_constant(&id, basis.len());
    let mut power = TrigMatrix::from_constant(&id, basis.len());
    let mut k = 0;
    loop {
        power = power.mul(&l_total);
        if power.is_zero() {
            break;
        }
        k += 1;
        if k > n {
            return Err(LinalgError::NotNilpotent);
        }
        inv.add_assign(&power, if k % 2 == 1 { -1.0 } else { 1.0 });
    }
    let mut phi = TrigMatrix::from_constant(&id, basis.len());
    phi.add_assign(&l_total, 1.0);
    let mean_phi = phi.mean();
    let c = mean_phi.clone().try_inverse().ok_or(LinalgError::Singular)?;
    let c_t = TrigMatrix::from_constant(&c, basis.len());
    let mean_t = TrigMatrix::from_constant(&mean_phi, basis.len());
    Ok(SymbolicTransition { phi: phi.mul(&c_t), phi_inv: mean_t.mul(&inv) })
}

/// Exact long-time mean of `Φ̃⁻¹ A Φ̃` for nilpotent sinusoidal forcing.
///
/// `basis` must be rationally independent; the caller is responsible for that.
pub fn exact_average(
    a: &DMatrix<f64>,
    terms: &[BasisTerm],
    basis: &[f64],
) -> Result<DMatrix<f64>, LinalgError> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(LinalgError::NotSquare { rows: n, cols: a.ncols() });
    }
    for t in terms {
        if t.matrix.shape() != (n, n) {
            return Err(LinalgError::DimensionMismatch { expected: n, found: t.matrix.nrows() });
        }
        if t.index >= basis.len() {
            return Err(LinalgError::DimensionMismatch { expected: basis.len(), found: t.index });
        }
    }
    let p = forcing(n, terms, basis.len());
    if p.is_zero() {
        return Ok(a.clone());
    }
    let tr = symbolic_transition(&p, basis)?;
    let a_t = TrigMatrix::from_constant(a, basis.len());
    Ok(tr.phi_inv.mean_of_product(&a_t.mul(&tr.phi)))
}
