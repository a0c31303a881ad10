//! Dense complex linear algebra for registers of a few qubits.
//!
//! Basis states are ordered with the first qubit of a register as the most
//! significant bit, so `|t c r>` maps to index `4t + 2c + r`.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default absolute tolerance for entrywise comparisons.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted for a positive-semidefinite state.
pub const PSD_TOL: f64 = 1e-10;
/// Largest `|lambda| * dt` for which classical RK4 is stable on the imaginary axis
/// (the exact bound is 2*sqrt(2)); kept slightly inside it.
const RK4_STABILITY: f64 = 2.5;

/// Square complex matrix whose dimension is a power of two.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    data: DMatrix<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix{:?}", self.data)
    }
}

impl ComplexMatrix {
    pub fn from_dmatrix(data: DMatrix<Complex64>) -> Result<Self> {
        let (rows, cols) = data.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if !rows.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(rows));
        }
        Ok(Self { data })
    }

    /// Builds a matrix from row-major entries.
    pub fn from_rows(dim: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Self::from_dmatrix(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::from_dmatrix(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::from_dmatrix(DMatrix::zeros(dim, dim))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut data = DMatrix::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            data[(i, i)] = Complex64::new(d, 0.0);
        }
        Self::from_dmatrix(data)
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    /// Number of qubits spanned by this matrix.
    pub fn num_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[(row, col)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.data
    }

    pub fn adjoint(&self) -> Self {
        Self {
            data: self.data.adjoint(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.data.trace()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            data: &self.data * Complex64::new(factor, 0.0),
        }
    }

    /// Real parts of the diagonal.
    pub fn real_diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.data[(i, i)].re).collect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.dim() == other.dim() && self.max_abs_diff(other) <= tol
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.data[(i, j)] - self.data[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// Largest off-diagonal magnitude.
    pub fn off_diagonal_norm(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    worst = worst.max(self.data[(i, j)].norm());
                }
            }
        }
        worst
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        self.off_diagonal_norm() <= tol
    }

    /// `(A + A^dagger) / 2`
    pub fn hermitian_part(&self) -> Self {
        Self {
            data: (&self.data + self.data.adjoint()) * Complex64::new(0.5, 0.0),
        }
    }

    /// `[self, other] = self * other - other * self`
    pub fn commutator(&self, other: &Self) -> Self {
        if self.off_diagonal_norm() == 0.0 {
            // [D, X]_ab = (d_a - d_b) X_ab for diagonal D
            let n = self.dim();
            let d: Vec<Complex64> = (0..n).map(|i| self.data[(i, i)]).collect();
            let data = DMatrix::from_fn(n, n, |a, b| (d[a] - d[b]) * other.data[(a, b)]);
            return Self { data };
        }
        Self {
            data: &self.data * &other.data - &other.data * &self.data,
        }
    }

    /// Eigendecomposition of a Hermitian matrix: ascending eigenvalues and
    /// the matching eigenvectors as columns.
    pub fn eigh(&self) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
        let err = self.hermiticity_error();
        let scale = self.data.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if err > DEFAULT_TOL * scale.max(1.0) {
            return Err(Error::NotHermitian(err));
        }
        let eig = SymmetricEigen::new(self.hermitian_part().data);
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(self.dim(), self.dim(), |r, c| {
            eig.eigenvectors[(r, order[c])]
        });
        Ok((values, vectors))
    }

    /// Applies `f` to the spectrum of a Hermitian matrix.
    pub fn hermitian_function(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let (values, vectors) = self.eigh()?;
        let n = self.dim();
        let diag = DMatrix::from_fn(n, n, |r, c| {
            if r == c {
                Complex64::new(f(values[r]), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Ok(Self {
            data: &vectors * diag * vectors.adjoint(),
        })
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix {
            data: &self.data + &rhs.data,
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix {
            data: &self.data - &rhs.data,
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix {
            data: &self.data * &rhs.data,
        }
    }
}

impl Mul<Complex64> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Complex64) -> ComplexMatrix {
        ComplexMatrix {
            data: &self.data * rhs,
        }
    }
}

/// Tensor product with `a` occupying the leading (more significant) slots.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix {
        data: a.data.kronecker(&b.data),
    }
}

/// Hermitian, unit-trace, positive-semidefinite matrix over a labelled qubit register.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    qubits: Vec<String>,
}

impl DensityMatrix {
    /// Validates the matrix and attaches the register labels, first label
    /// being the most significant tensor slot.
    pub fn new<S: Into<String>>(matrix: ComplexMatrix, qubits: Vec<S>) -> Result<Self> {
        let rho = Self::from_parts(matrix, qubits)?;
        rho.validate()?;
        Ok(rho)
    }

    fn from_parts<S: Into<String>>(matrix: ComplexMatrix, qubits: Vec<S>) -> Result<Self> {
        let qubits: Vec<String> = qubits.into_iter().map(Into::into).collect();
        if qubits.len() != matrix.num_qubits() {
            return Err(Error::DimensionMismatch {
                expected: matrix.dim(),
                found: 1 << qubits.len(),
            });
        }
        for (i, q) in qubits.iter().enumerate() {
            if qubits[..i].contains(q) {
                return Err(Error::DuplicateLabel(q.clone()));
            }
        }
        Ok(Self { matrix, qubits })
    }

    /// Diagonal state with the given basis populations.
    pub fn from_populations<S: Into<String>>(populations: &[f64], qubits: Vec<S>) -> Result<Self> {
        Self::new(ComplexMatrix::from_real_diagonal(populations)?, qubits)
    }

    pub fn maximally_mixed<S: Into<String>>(qubits: Vec<S>) -> Result<Self> {
        let dim = 1usize << qubits.len();
        Self::from_populations(&vec![1.0 / dim as f64; dim], qubits)
    }

    /// Pure computational basis state `|index>`.
    pub fn basis_state<S: Into<String>>(index: usize, qubits: Vec<S>) -> Result<Self> {
        let dim = 1usize << qubits.len();
        if index >= dim {
            return Err(Error::InvalidInput(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut pops = vec![0.0; dim];
        pops[index] = 1.0;
        Self::from_populations(&pops, qubits)
    }

    /// Checks unit trace, Hermiticity and positive semidefiniteness.
    pub fn validate(&self) -> Result<()> {
        let herm = self.matrix.hermiticity_error();
        if herm > DEFAULT_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = self.matrix.trace();
        if (tr.re - 1.0).abs() > DEFAULT_TOL || tr.im.abs() > DEFAULT_TOL {
            return Err(Error::TraceNotUnit(tr.re));
        }
        let min_eig = if self.matrix.is_diagonal(0.0) {
            self.populations().into_iter().fold(f64::INFINITY, f64::min)
        } else {
            self.matrix.eigh()?.0[0]
        };
        if min_eig < -PSD_TOL {
            return Err(Error::NotPositive(min_eig));
        }
        Ok(())
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn qubits(&self) -> &[String] {
        &self.qubits
    }

    pub fn num_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Tensor slot of `label`.
    pub fn position(&self, label: &str) -> Result<usize> {
        self.qubits
            .iter()
            .position(|q| q == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Diagonal entries (basis populations).
    pub fn populations(&self) -> Vec<f64> {
        self.matrix.real_diagonal()
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        self.matrix.is_diagonal(tol)
    }

    /// `Tr[op * rho]`, real part.
    pub fn expectation(&self, op: &ComplexMatrix) -> Result<f64> {
        if op.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: op.dim(),
            });
        }
        Ok((op * &self.matrix).trace().re)
    }

    /// Product state `self (x) other`; registers must be disjoint.
    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        let mut qubits = self.qubits.clone();
        qubits.extend(other.qubits.iter().cloned());
        Self::from_parts(kron(&self.matrix, &other.matrix), qubits)
    }

    /// Replaces the matrix, keeping the register; the caller guarantees validity.
    pub(crate) fn with_matrix(&self, matrix: ComplexMatrix) -> DensityMatrix {
        debug_assert_eq!(matrix.dim(), self.dim());
        DensityMatrix {
            matrix,
            qubits: self.qubits.clone(),
        }
    }

    /// Reorders the tensor slots to follow `order`.
    pub fn permute_qubits<S: AsRef<str>>(&self, order: &[S]) -> Result<DensityMatrix> {
        if order.len() != self.num_qubits() {
            return Err(Error::RegisterMismatch {
                expected: self.qubits.clone(),
                found: order.iter().map(|s| s.as_ref().to_string()).collect(),
            });
        }
        let n = self.num_qubits();
        let src_pos: Vec<usize> = order
            .iter()
            .map(|l| self.position(l.as_ref()))
            .collect::<Result<_>>()?;
        let map = |new_index: usize| -> usize {
            let mut old = 0usize;
            for (k, &p) in src_pos.iter().enumerate() {
                let bit = (new_index >> (n - 1 - k)) & 1;
                old |= bit << (n - 1 - p);
            }
            old
        };
        let dim = self.dim();
        let data = DMatrix::from_fn(dim, dim, |r, c| self.matrix.get(map(r), map(c)));
        Self::from_parts(
            ComplexMatrix { data },
            order.iter().map(|s| s.as_ref().to_string()).collect(),
        )
    }
}

/// Traces out every qubit not in `keep`; kept qubits retain their relative order.
pub fn partial_trace<S: AsRef<str>>(rho: &DensityMatrix, keep: &[S]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::InvalidInput("partial trace must keep at least one qubit".into()));
    }
    let n = rho.num_qubits();
    let mut kept_pos = Vec::with_capacity(keep.len());
    for label in keep {
        let p = rho.position(label.as_ref())?;
        if kept_pos.contains(&p) {
            return Err(Error::DuplicateLabel(label.as_ref().to_string()));
        }
        kept_pos.push(p);
    }
    kept_pos.sort_unstable();
    let traced_pos: Vec<usize> = (0..n).filter(|p| !kept_pos.contains(p)).collect();
    let k = kept_pos.len();

    let compose = |kept_bits: usize, traced_bits: usize| -> usize {
        let mut idx = 0usize;
        for (j, &p) in kept_pos.iter().enumerate() {
            idx |= ((kept_bits >> (k - 1 - j)) & 1) << (n - 1 - p);
        }
        for (j, &p) in traced_pos.iter().enumerate() {
            idx |= ((traced_bits >> (traced_pos.len() - 1 - j)) & 1) << (n - 1 - p);
        }
        idx
    };

    let out_dim = 1usize << k;
    let env_dim = 1usize << traced_pos.len();
    let data = DMatrix::from_fn(out_dim, out_dim, |r, c| {
        (0..env_dim)
            .map(|e| rho.matrix.get(compose(r, e), compose(c, e)))
            .sum()
    });
    let qubits = kept_pos.iter().map(|&p| rho.qubits[p].clone()).collect::<Vec<_>>();
    DensityMatrix::from_parts(ComplexMatrix { data }, qubits)
}

/// Uhlmann fidelity `(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    let f = if rho.is_diagonal(0.0) && sigma.is_diagonal(0.0) {
        let overlap: f64 = rho
            .populations()
            .iter()
            .zip(sigma.populations())
            .map(|(p, q)| (p.max(0.0) * q.max(0.0)).sqrt())
            .sum();
        overlap * overlap
    } else {
        let sqrt_rho = rho.matrix.hermitian_function(|x| x.max(0.0).sqrt())?;
        let inner = (&(&sqrt_rho * &sigma.matrix) * &sqrt_rho).hermitian_part();
        let (values, _) = inner.eigh()?;
        let s: f64 = values.iter().map(|&v| v.max(0.0).sqrt()).sum();
        s * s
    };
    Ok(f.clamp(0.0, 1.0))
}

/// Integrates `d rho/dt = -(i/hbar) [H(t), rho]` with fixed-step classical RK4.
///
/// The step is shrunk so that an integer number of steps covers `t_span`.
/// The state is re-symmetrized after every step. Fails when `H(t)` is not
/// Hermitian, or when the state has coherences that the step cannot resolve.
pub fn evolve_lvn<F>(
    rho0: &DensityMatrix,
    hamiltonian_at: F,
    t_span: (f64, f64),
    dt: f64,
    hbar: f64,
) -> Result<DensityMatrix>
where
    F: Fn(f64) -> ComplexMatrix,
{
    let (t0, t1) = t_span;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidInput(format!("time step must be positive, got {dt}")));
    }
    if t0.partial_cmp(&t1).is_none_or(|o| o.is_gt()) {
        return Err(Error::InvalidInput(format!("invalid time span [{t0}, {t1}]")));
    }
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(rho0.clone());
    }
    let steps = ((span / dt) - 1e-9).ceil().max(1.0) as usize;
    let h = span / steps as f64;

    let minus_i_over_hbar = Complex64::new(0.0, -1.0 / hbar);
    let hamiltonian = |t: f64| -> Result<ComplexMatrix> {
        let ham = hamiltonian_at(t);
        if ham.dim() != rho0.dim() {
            return Err(Error::DimensionMismatch {
                expected: rho0.dim(),
                found: ham.dim(),
            });
        }
        let scale = ham.as_dmatrix().iter().map(|z| z.norm()).fold(0.0, f64::max);
        let err = ham.hermiticity_error();
        if err > DEFAULT_TOL * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::NotHermitian(err));
        }
        Ok(ham)
    };
    let rhs = |ham: &ComplexMatrix, rho: &ComplexMatrix| &ham.commutator(rho) * minus_i_over_hbar;

    let mut rho = rho0.matrix.clone();
    for step in 0..steps {
        let t = t0 + step as f64 * h;
        let h_start = hamiltonian(t)?;
        let k1 = rhs(&h_start, &rho);
        if k1.as_dmatrix().iter().all(|z| *z == Complex64::new(0.0, 0.0))
            && h_start.off_diagonal_norm() == 0.0
            && rho.off_diagonal_norm() == 0.0
        {
            // diagonal state under a diagonal Hamiltonian: RK4 stages all vanish
            let h_mid = hamiltonian(t + 0.5 * h)?;
            let h_end = hamiltonian(t + h)?;
            if h_mid.off_diagonal_norm() == 0.0 && h_end.off_diagonal_norm() == 0.0 {
                continue;
            }
        }
        let spread = gershgorin_spread(&h_start) / hbar;
        if spread * h > RK4_STABILITY {
            return Err(Error::StepTooCoarse { dt: h, omega: spread });
        }
        let h_mid = hamiltonian(t + 0.5 * h)?;
        let h_end = hamiltonian(t + h)?;
        let k2 = rhs(&h_mid, &(&rho + &k1.scale(0.5 * h)));
        let k3 = rhs(&h_mid, &(&rho + &k2.scale(0.5 * h)));
        let k4 = rhs(&h_end, &(&rho + &k3.scale(h)));
        let incr = &(&(&k1 + &k2.scale(2.0)) + &k3.scale(2.0)) + &k4;
        rho = (&rho + &incr.scale(h / 6.0)).hermitian_part();
    }
    let out = rho0.with_matrix(rho);
    let tr = out.matrix.trace().re;
    if (tr - 1.0).abs() > 1e-10 {
        return Err(Error::Invariant(format!("trace drifted to {tr} during integration")));
    }
    Ok(out)
}

/// Upper bound on the eigenvalue spread of a Hermitian matrix.
fn gershgorin_spread(m: &ComplexMatrix) -> f64 {
    let n = m.dim();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let radius: f64 = (0..n).filter(|&j| j != i).map(|j| m.get(i, j).norm()).sum();
        let c = m.get(i, i).re;
        lo = lo.min(c - radius);
        hi = hi.max(c + radius);
    }
    hi - lo
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn sigma_x() -> ComplexMatrix {
        ComplexMatrix::from_rows(2, &[c(0.0), c(1.0), c(1.0), c(0.0)]).unwrap()
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let i2 = ComplexMatrix::identity(2).unwrap();
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4).unwrap());
    }

    #[test]
    fn kron_of_projectors() {
        let a = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]).unwrap();
        let b = ComplexMatrix::from_real_diagonal(&[0.0, 1.0]).unwrap();
        assert_eq!(kron(&a, &b), ComplexMatrix::from_real_diagonal(&[0.0, 1.0, 0.0, 0.0]).unwrap());
    }

    #[test]
    fn kron_sigma_x_flips_both_bits() {
        let xx = kron(&sigma_x(), &sigma_x());
        // |00><00| -> |11><11|
        let p00 = ComplexMatrix::from_real_diagonal(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        let out = &(&xx * &p00) * &xx.adjoint();
        assert_eq!(out, ComplexMatrix::from_real_diagonal(&[0.0, 0.0, 0.0, 1.0]).unwrap());
    }

    #[test]
    fn rejects_non_power_of_two() {
        let m = DMatrix::<Complex64>::identity(3, 3);
        assert_eq!(ComplexMatrix::from_dmatrix(m), Err(Error::NotPowerOfTwo(3)));
    }

    #[test]
    fn density_matrix_validation() {
        let bad_trace = ComplexMatrix::from_real_diagonal(&[0.6, 0.6]).unwrap();
        assert!(matches!(DensityMatrix::new(bad_trace, vec!["a"]), Err(Error::TraceNotUnit(_))));
        let negative = ComplexMatrix::from_real_diagonal(&[1.1, -0.1]).unwrap();
        assert!(matches!(DensityMatrix::new(negative, vec!["a"]), Err(Error::NotPositive(_))));
        let skew = ComplexMatrix::from_rows(2, &[c(0.5), c(0.1), c(0.0), c(0.5)]).unwrap();
        assert!(matches!(DensityMatrix::new(skew, vec!["a"]), Err(Error::NotHermitian(_))));
        let m = ComplexMatrix::identity(2).unwrap().scale(0.5);
        assert_eq!(
            DensityMatrix::new(m.clone(), vec!["a", "b"]).unwrap_err(),
            Error::DimensionMismatch { expected: 2, found: 4 }
        );
    }

    #[test]
    fn partial_trace_recovers_product_factor() {
        let a = DensityMatrix::from_populations(&[0.7, 0.3], vec!["A"]).unwrap();
        let b = DensityMatrix::from_populations(&[0.2, 0.8], vec!["B"]).unwrap();
        let ab = a.tensor(&b).unwrap();
        assert!(partial_trace(&ab, &["A"]).unwrap().matrix().approx_eq(a.matrix(), 1e-15));
        assert!(partial_trace(&ab, &["B"]).unwrap().matrix().approx_eq(b.matrix(), 1e-15));
    }

    #[test]
    fn partial_trace_of_maximally_mixed() {
        let rho = DensityMatrix::maximally_mixed(vec!["x", "y", "z"]).unwrap();
        for q in ["x", "y", "z"] {
            let m = partial_trace(&rho, &[q]).unwrap();
            assert_eq!(m.populations(), vec![0.5, 0.5]);
            assert_eq!(m.qubits(), &[q.to_string()]);
        }
    }

    #[test]
    fn partial_trace_keeps_original_order() {
        let rho = DensityMatrix::basis_state(0b011, vec!["x", "y", "z"]).unwrap();
        let kept = partial_trace(&rho, &["z", "x"]).unwrap();
        assert_eq!(kept.qubits(), &["x".to_string(), "z".to_string()]);
        // x = 0, z = 1 -> |01>
        assert_eq!(kept.populations(), vec![0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn partial_trace_errors() {
        let rho = DensityMatrix::maximally_mixed(vec!["x", "y"]).unwrap();
        assert_eq!(partial_trace(&rho, &["w"]), Err(Error::UnknownLabel("w".into())));
        assert!(partial_trace::<&str>(&rho, &[]).is_err());
    }

    #[test]
    fn partial_trace_of_coherent_pair() {
        // Bell state: reduced state maximally mixed
        let h = c(0.5);
        let z = c(0.0);
        let m = ComplexMatrix::from_rows(
            4,
            &[h, z, z, h, z, z, z, z, z, z, z, z, h, z, z, h],
        )
        .unwrap();
        let bell = DensityMatrix::new(m, vec!["a", "b"]).unwrap();
        let red = partial_trace(&bell, &["a"]).unwrap();
        assert!(red
            .matrix()
            .approx_eq(&ComplexMatrix::identity(2).unwrap().scale(0.5), 1e-15));
    }

    #[test]
    fn permute_qubits_moves_bits() {
        let rho = DensityMatrix::basis_state(0b100, vec!["x", "y", "z"]).unwrap();
        let p = rho.permute_qubits(&["y", "z", "x"]).unwrap();
        assert_eq!(p.populations()[0b001], 1.0);
    }

    #[test]
    fn fidelity_basic_cases() {
        let rho = DensityMatrix::from_populations(&[0.3, 0.7], vec!["q"]).unwrap();
        assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-14);
        let up = DensityMatrix::basis_state(0, vec!["q"]).unwrap();
        let down = DensityMatrix::basis_state(1, vec!["q"]).unwrap();
        assert_eq!(fidelity(&up, &down).unwrap(), 0.0);
        let pair = DensityMatrix::maximally_mixed(vec!["a", "b"]).unwrap();
        assert!(fidelity(&rho, &pair).is_err());
    }

    #[test]
    fn fidelity_with_coherence() {
        // |+><+| against |0><0| gives 1/2
        let plus = ComplexMatrix::from_rows(2, &[c(0.5), c(0.5), c(0.5), c(0.5)]).unwrap();
        let plus = DensityMatrix::new(plus, vec!["q"]).unwrap();
        let up = DensityMatrix::basis_state(0, vec!["q"]).unwrap();
        assert!((fidelity(&plus, &up).unwrap() - 0.5).abs() < 1e-12);
        assert!((fidelity(&up, &plus).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn evolve_commuting_diagonal_is_exact() {
        let rho0 = DensityMatrix::from_populations(&[0.1, 0.2, 0.3, 0.4], vec!["a", "b"]).unwrap();
        let ham = ComplexMatrix::from_real_diagonal(&[1e-25, -2e-25, 3e-25, 0.0]).unwrap();
        let out = evolve_lvn(&rho0, |_| ham.clone(), (0.0, 1.0), 1e-3, 1.054_571_817e-34).unwrap();
        assert_eq!(out, rho0);
    }

    #[test]
    fn evolve_rejects_non_hermitian_hamiltonian() {
        let rho0 = DensityMatrix::maximally_mixed(vec!["a"]).unwrap();
        let ham = ComplexMatrix::from_rows(2, &[c(1.0), c(1.0), c(0.0), c(1.0)]).unwrap();
        assert!(matches!(
            evolve_lvn(&rho0, |_| ham.clone(), (0.0, 1.0), 0.1, 1.0),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn evolve_rejects_unresolved_coherence() {
        let plus = ComplexMatrix::from_rows(2, &[c(0.5), c(0.5), c(0.5), c(0.5)]).unwrap();
        let plus = DensityMatrix::new(plus, vec!["q"]).unwrap();
        let ham = ComplexMatrix::from_real_diagonal(&[-1.0, 1.0]).unwrap();
        assert!(matches!(
            evolve_lvn(&plus, |_| ham.clone(), (0.0, 10.0), 2.0, 1.0),
            Err(Error::StepTooCoarse { .. })
        ));
    }

    #[test]
    fn evolve_rejects_bad_step() {
        let rho0 = DensityMatrix::maximally_mixed(vec!["a"]).unwrap();
        let ham = ComplexMatrix::identity(2).unwrap();
        assert!(evolve_lvn(&rho0, |_| ham.clone(), (0.0, 1.0), 0.0, 1.0).is_err());
        assert!(evolve_lvn(&rho0, |_| ham.clone(), (1.0, 0.0), 0.1, 1.0).is_err());
    }
}
