//! Ideal permutation gates on labelled registers and the reset channel.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qmath::{kron, partial_trace, ComplexMatrix, DensityMatrix, DEFAULT_TOL};

/// A unitary that permutes computational basis states.
#[derive(Clone, Debug, PartialEq)]
pub struct GateUnitary {
    name: String,
    acts_on: Vec<String>,
    /// `permutation[i]` is the image of basis state `i`.
    permutation: Vec<usize>,
    matrix: ComplexMatrix,
}

impl GateUnitary {
    /// Builds the gate from a basis-state map over `register`.
    pub fn from_permutation<S: AsRef<str>>(
        name: impl Into<String>,
        register: &[S],
        permutation: Vec<usize>,
    ) -> Result<Self> {
        let dim = 1usize << register.len();
        if permutation.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: permutation.len(),
            });
        }
        let mut seen = vec![false; dim];
        for &p in &permutation {
            if p >= dim || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidInput("gate map is not a permutation".into()));
            }
        }
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for (col, &row) in permutation.iter().enumerate() {
            entries[row * dim + col] = Complex64::new(1.0, 0.0);
        }
        Ok(Self {
            name: name.into(),
            acts_on: register.iter().map(|s| s.as_ref().to_string()).collect(),
            permutation,
            matrix: ComplexMatrix::from_rows(dim, &entries)?,
        })
    }

    fn from_bit_map<S: AsRef<str>>(
        name: impl Into<String>,
        register: &[S],
        map: impl Fn(&mut [u8]),
    ) -> Result<Self> {
        let n = register.len();
        let permutation = (0..1usize << n)
            .map(|index| {
                let mut bits: Vec<u8> = (0..n).map(|k| ((index >> (n - 1 - k)) & 1) as u8).collect();
                map(&mut bits);
                bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize)
            })
            .collect();
        Self::from_permutation(name, register, permutation)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn acts_on(&self) -> &[String] {
        &self.acts_on
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    /// Image of basis state `index`.
    pub fn map_basis(&self, index: usize) -> usize {
        self.permutation[index]
    }

    /// `self * other`, i.e. `other` acts first.
    pub fn then_after(&self, other: &GateUnitary, name: impl Into<String>) -> Result<GateUnitary> {
        if self.acts_on != other.acts_on {
            return Err(Error::RegisterMismatch {
                expected: self.acts_on.clone(),
                found: other.acts_on.clone(),
            });
        }
        let permutation = other.permutation.iter().map(|&i| self.permutation[i]).collect();
        Self::from_permutation(name, &self.acts_on, permutation)
    }

    /// Largest entrywise deviation of `U U^dagger` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let id = ComplexMatrix::identity(self.matrix.dim()).expect("power of two");
        (&self.matrix * &self.matrix.adjoint()).max_abs_diff(&id)
    }
}

fn slot(register: &[String], label: &str) -> Result<usize> {
    register
        .iter()
        .position(|q| q == label)
        .ok_or_else(|| Error::UnknownLabel(label.to_string()))
}

fn distinct(labels: &[&str]) -> Result<()> {
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(Error::DuplicateLabel(l.to_string()));
        }
    }
    Ok(())
}

fn owned(register: &[impl AsRef<str>]) -> Vec<String> {
    register.iter().map(|s| s.as_ref().to_string()).collect()
}

/// Exchanges the basis bits of `a` and `b`; identity on the other qubits.
pub fn swap_unitary<S: AsRef<str>>(register: &[S], a: &str, b: &str) -> Result<GateUnitary> {
    let reg = owned(register);
    distinct(&[a, b])?;
    let (ia, ib) = (slot(&reg, a)?, slot(&reg, b)?);
    GateUnitary::from_bit_map(format!("SWAP({a},{b})"), &reg, |bits| bits.swap(ia, ib))
}

/// Flips every target when `control` is 1.
pub fn cnotnot_unitary<S: AsRef<str>>(register: &[S], control: &str, targets: [&str; 2]) -> Result<GateUnitary> {
    let reg = owned(register);
    distinct(&[control, targets[0], targets[1]])?;
    let c = slot(&reg, control)?;
    let ts = [slot(&reg, targets[0])?, slot(&reg, targets[1])?];
    GateUnitary::from_bit_map(format!("CNotNot({control};{},{})", targets[0], targets[1]), &reg, |bits| {
        if bits[c] == 1 {
            for &t in &ts {
                bits[t] ^= 1;
            }
        }
    })
}

/// Flips `target` when both controls are 1.
pub fn toffoli_unitary<S: AsRef<str>>(register: &[S], controls: [&str; 2], target: &str) -> Result<GateUnitary> {
    let reg = owned(register);
    distinct(&[controls[0], controls[1], target])?;
    let cs = [slot(&reg, controls[0])?, slot(&reg, controls[1])?];
    let t = slot(&reg, target)?;
    GateUnitary::from_bit_map(format!("Toffoli({},{};{target})", controls[0], controls[1]), &reg, |bits| {
        if bits[cs[0]] == 1 && bits[cs[1]] == 1 {
            bits[t] ^= 1;
        }
    })
}

/// 3-bit entropy compression `CNotNot * Toffoli * CNotNot`.
///
/// The CNotNot gates are controlled by the target and flip the compression
/// and reset qubits; the Toffoli is controlled by compression and reset and
/// flips the target. Net effect: `|t c r> = |011> <-> |100>`, all other
/// basis states fixed.
pub fn comp_unitary<S: AsRef<str>>(
    register: &[S],
    target: &str,
    compression: &str,
    reset: &str,
) -> Result<GateUnitary> {
    let cnn = cnotnot_unitary(register, target, [compression, reset])?;
    let toffoli = toffoli_unitary(register, [compression, reset], target)?;
    cnn.then_after(&toffoli, "tmp")?.then_after(&cnn, "COMP")
}

/// `U rho U^dagger`
pub fn apply(gate: &GateUnitary, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if gate.acts_on() != rho.qubits() {
        return Err(Error::RegisterMismatch {
            expected: gate.acts_on.clone(),
            found: rho.qubits().to_vec(),
        });
    }
    // permutation conjugation: (P rho P^T)[p(i), p(j)] = rho[i, j]
    let dim = rho.dim();
    let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            entries[gate.permutation[i] * dim + gate.permutation[j]] = rho.matrix().get(i, j);
        }
    }
    Ok(rho.with_matrix(ComplexMatrix::from_rows(dim, &entries)?))
}

/// Replaces the reset qubit by `thermal_reset_state` and every other qubit by
/// its own marginal, discarding all correlations.
pub fn reset_channel(
    rho: &DensityMatrix,
    reset_label: &str,
    thermal_reset_state: &DensityMatrix,
) -> Result<DensityMatrix> {
    replace_marginal(rho, reset_label, thermal_reset_state)
}

/// Product of single-qubit marginals with `label` swapped for `replacement`.
pub(crate) fn replace_marginal(
    rho: &DensityMatrix,
    label: &str,
    replacement: &DensityMatrix,
) -> Result<DensityMatrix> {
    rho.position(label)?;
    if replacement.num_qubits() != 1 {
        return Err(Error::InvalidInput(format!(
            "replacement state for {label} must be a single qubit"
        )));
    }
    replacement.validate()?;
    let mut matrix: Option<ComplexMatrix> = None;
    for q in rho.qubits() {
        let factor = if q == label {
            replacement.matrix().clone()
        } else {
            let m = partial_trace(rho, &[q.as_str()])?.matrix().clone();
            // renormalize so rounding in the trace does not compound across resets
            m.scale(1.0 / m.trace().re)
        };
        matrix = Some(match matrix {
            None => factor,
            Some(m) => kron(&m, &factor),
        });
    }
    let out = DensityMatrix::new(matrix.expect("nonempty register"), rho.qubits().to_vec())?;
    debug_assert!(out.matrix().hermiticity_error() <= DEFAULT_TOL);
    Ok(out)
}
