//! NMR spin system: qubit specifications, the lab-frame Zeeman plus scalar
//! coupling Hamiltonian, thermal states, and polarization/spin temperature.
//!
//! Basis convention: `|0>` is spin-up, the lower-energy Zeeman state, with
//! `I_z |0> = +1/2 |0>`. A single-spin Zeeman term reads `-hbar * omega * I_z`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmath::{partial_trace, ComplexMatrix, DensityMatrix};

/// Physical constants in SI units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalConstants {
    /// Reduced Planck constant, J s.
    pub hbar: f64,
    /// Boltzmann constant, J/K.
    pub k_boltzmann: f64,
    /// Avogadro constant, 1/mol.
    pub avogadro: f64,
}

impl PhysicalConstants {
    /// CODATA 2018 exact/recommended values.
    pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
        hbar: 1.054_571_817e-34,
        k_boltzmann: 1.380_649e-23,
        avogadro: 6.022_140_76e23,
    };

    /// `tanh(hbar * omega / (2 k_B T))`
    pub fn thermal_polarization(&self, omega: f64, temperature: f64) -> f64 {
        (self.hbar * omega / (2.0 * self.k_boltzmann * temperature)).tanh()
    }

    /// Temperature at which a spin of frequency `omega` has polarization `epsilon`.
    pub fn effective_temperature(&self, epsilon: f64, omega: f64) -> Result<f64> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidInput(format!(
                "polarization {epsilon} outside (0, 1) has no positive spin temperature"
            )));
        }
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidInput(format!("frequency must be positive, got {omega}")));
        }
        Ok(self.hbar * omega / (2.0 * self.k_boltzmann * epsilon.atanh()))
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA_2018
    }
}

/// Thermal polarization with CODATA constants.
pub fn thermal_polarization(omega: f64, temperature: f64) -> f64 {
    PhysicalConstants::CODATA_2018.thermal_polarization(omega, temperature)
}

/// Spin temperature with CODATA constants.
pub fn effective_temperature(epsilon: f64, omega: f64) -> Result<f64> {
    PhysicalConstants::CODATA_2018.effective_temperature(epsilon, omega)
}

/// Role a spin plays in the cooling algorithm or the engine.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Target,
    Compression,
    Reset,
    SwapPartner,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Role::Target => "target",
            Role::Compression => "compression",
            Role::Reset => "reset",
            Role::SwapPartner => "swap-partner",
        };
        f.write_str(s)
    }
}

impl FromStr for Role {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "target" => Ok(Role::Target),
            "compression" => Ok(Role::Compression),
            "reset" => Ok(Role::Reset),
            "swap-partner" => Ok(Role::SwapPartner),
            other => Err(Error::Config(format!("unknown role `{other}`"))),
        }
    }
}

/// One spin-1/2 nucleus.
#[derive(Clone, Debug, PartialEq)]
pub struct QubitSpec {
    pub label: String,
    pub role: Role,
    /// gamma / 2 pi in MHz/T.
    pub gamma_over_2pi: f64,
    /// Longitudinal relaxation time in seconds.
    pub t1: f64,
    /// Tabulated Larmor frequency omega / 2 pi in MHz at the system field.
    /// When present it takes precedence over `gamma * B`.
    pub larmor_over_2pi: Option<f64>,
}

impl QubitSpec {
    pub fn new(label: impl Into<String>, role: Role, gamma_over_2pi: f64, t1: f64) -> Result<Self> {
        let spec = Self {
            label: label.into(),
            role,
            gamma_over_2pi,
            t1,
            larmor_over_2pi: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_larmor(mut self, omega_over_2pi_mhz: f64) -> Result<Self> {
        self.larmor_over_2pi = Some(omega_over_2pi_mhz);
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.label.is_empty() {
            return Err(Error::Config("qubit label must be nonempty".into()));
        }
        if !(self.gamma_over_2pi > 0.0 && self.gamma_over_2pi.is_finite()) {
            return Err(Error::Config(format!(
                "qubit {}: gyromagnetic ratio must be positive",
                self.label
            )));
        }
        if !(self.t1 > 0.0 && self.t1.is_finite()) {
            return Err(Error::Config(format!("qubit {}: t1 must be positive", self.label)));
        }
        if let Some(f) = self.larmor_over_2pi {
            if !(f > 0.0 && f.is_finite()) {
                return Err(Error::Config(format!(
                    "qubit {}: Larmor frequency must be positive",
                    self.label
                )));
            }
        }
        Ok(())
    }
}

/// Coupled spins in a static field, in contact with a bath.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinSystem {
    qubits: Vec<QubitSpec>,
    /// J / 2 pi in Hz, keyed by label pair in register order.
    couplings: BTreeMap<(String, String), f64>,
    b_field: f64,
    bath_temperature: f64,
    constants: PhysicalConstants,
}

impl SpinSystem {
    /// `couplings` lists `(a, b, J/2pi [Hz])`; each unordered pair at most once.
    pub fn new(
        qubits: Vec<QubitSpec>,
        couplings: &[(&str, &str, f64)],
        b_field: f64,
        bath_temperature: f64,
    ) -> Result<Self> {
        if qubits.is_empty() {
            return Err(Error::Config("spin system needs at least one qubit".into()));
        }
        for (i, q) in qubits.iter().enumerate() {
            q.validate()?;
            if qubits[..i].iter().any(|p| p.label == q.label) {
                return Err(Error::DuplicateLabel(q.label.clone()));
            }
        }
        for role in [Role::Target, Role::Compression, Role::Reset, Role::SwapPartner] {
            if qubits.iter().filter(|q| q.role == role).count() > 1 {
                return Err(Error::Config(format!("more than one {role} qubit")));
            }
        }
        if !(b_field > 0.0 && b_field.is_finite()) {
            return Err(Error::Config(format!("field must be positive, got {b_field}")));
        }
        if !(bath_temperature > 0.0 && bath_temperature.is_finite()) {
            return Err(Error::Config(format!(
                "bath temperature must be positive, got {bath_temperature}"
            )));
        }
        let index_of = |label: &str| {
            qubits
                .iter()
                .position(|q| q.label == label)
                .ok_or_else(|| Error::UnknownLabel(label.to_string()))
        };
        let mut map = BTreeMap::new();
        for &(a, b, j) in couplings {
            let (ia, ib) = (index_of(a)?, index_of(b)?);
            if ia == ib {
                return Err(Error::Config(format!("self-coupling on qubit {a}")));
            }
            if !j.is_finite() {
                return Err(Error::Config(format!("coupling {a}-{b} is not finite")));
            }
            let key = if ia < ib {
                (a.to_string(), b.to_string())
            } else {
                (b.to_string(), a.to_string())
            };
            if map.insert(key, j).is_some() {
                return Err(Error::Config(format!("coupling {a}-{b} given twice")));
            }
        }
        Ok(Self {
            qubits,
            couplings: map,
            b_field,
            bath_temperature,
            constants: PhysicalConstants::CODATA_2018,
        })
    }

    /// 13C2-trichloroethylene: C1 target, C2 compression, H reset, at a
    /// 500 MHz proton frequency and 300 K.
    pub fn tce() -> Self {
        let qubits = vec![
            QubitSpec::new("C1", Role::Target, 10.7084, 43.0)
                .and_then(|q| q.with_larmor(125.77))
                .expect("valid preset"),
            QubitSpec::new("C2", Role::Compression, 10.7084, 20.0)
                .and_then(|q| q.with_larmor(125.77))
                .expect("valid preset"),
            QubitSpec::new("H", Role::Reset, 42.477, 3.5)
                .and_then(|q| q.with_larmor(500.13))
                .expect("valid preset"),
        ];
        Self::new(
            qubits,
            &[("C1", "C2", 103.0), ("C1", "H", 9.0), ("C2", "H", 200.8)],
            500.13 / 42.477,
            300.0,
        )
        .expect("valid preset")
    }

    pub fn with_constants(mut self, constants: PhysicalConstants) -> Self {
        self.constants = constants;
        self
    }

    pub fn with_bath_temperature(mut self, temperature: f64) -> Result<Self> {
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(Error::Config(format!(
                "bath temperature must be positive, got {temperature}"
            )));
        }
        self.bath_temperature = temperature;
        Ok(self)
    }

    pub fn qubits(&self) -> &[QubitSpec] {
        &self.qubits
    }

    pub fn labels(&self) -> Vec<String> {
        self.qubits.iter().map(|q| q.label.clone()).collect()
    }

    pub fn b_field(&self) -> f64 {
        self.b_field
    }

    pub fn bath_temperature(&self) -> f64 {
        self.bath_temperature
    }

    pub fn constants(&self) -> &PhysicalConstants {
        &self.constants
    }

    pub fn qubit(&self, label: &str) -> Result<&QubitSpec> {
        self.qubits
            .iter()
            .find(|q| q.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn qubit_with_role(&self, role: Role) -> Result<&QubitSpec> {
        self.qubits
            .iter()
            .find(|q| q.role == role)
            .ok_or_else(|| Error::MissingRole(role.to_string()))
    }

    /// Angular Larmor frequency at full field, rad/s.
    pub fn omega(&self, label: &str) -> Result<f64> {
        let q = self.qubit(label)?;
        Ok(self.omega_of(q))
    }

    fn omega_of(&self, q: &QubitSpec) -> f64 {
        let mhz = q.larmor_over_2pi.unwrap_or(q.gamma_over_2pi * self.b_field);
        2.0 * PI * mhz * 1e6
    }

    /// J / 2 pi in Hz between two qubits (zero when uncoupled).
    pub fn coupling(&self, a: &str, b: &str) -> f64 {
        self.couplings
            .get(&(a.to_string(), b.to_string()))
            .or_else(|| self.couplings.get(&(b.to_string(), a.to_string())))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn couplings(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.couplings.iter().map(|((a, b), j)| (a.as_str(), b.as_str(), *j))
    }

    /// Lab-frame Hamiltonian with per-qubit Zeeman frequencies `omegas` (rad/s,
    /// register order) and the system's scalar couplings, summed over ordered
    /// pairs `i != j`.
    pub fn zeeman_coupling_hamiltonian(&self, omegas: &[f64]) -> Result<ComplexMatrix> {
        let n = self.qubits.len();
        if omegas.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: omegas.len(),
            });
        }
        let hbar = self.constants.hbar;
        let spin = |index: usize, k: usize| -> f64 {
            if (index >> (n - 1 - k)) & 1 == 0 {
                0.5
            } else {
                -0.5
            }
        };
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let jij = self.coupling(&self.qubits[i].label, &self.qubits[j].label);
                    if jij != 0.0 {
                        pairs.push((i, j, 2.0 * PI * jij));
                    }
                }
            }
        }
        let diag: Vec<f64> = (0..1usize << n)
            .map(|index| {
                let zeeman: f64 = (0..n).map(|k| omegas[k] * spin(index, k)).sum();
                let coupling: f64 = pairs
                    .iter()
                    .map(|&(i, j, jij)| jij * spin(index, i) * spin(index, j))
                    .sum();
                -hbar * zeeman + hbar * coupling
            })
            .collect();
        ComplexMatrix::from_real_diagonal(&diag)
    }

    /// Full-field angular frequencies scaled by `field_scale`, register order.
    pub fn scaled_omegas(&self, field_scale: f64) -> Vec<f64> {
        self.qubits.iter().map(|q| field_scale * self.omega_of(q)).collect()
    }

    /// Thermal state of the whole register at the bath temperature.
    pub fn thermal_state(&self, field_scale: f64) -> Result<DensityMatrix> {
        let h = static_hamiltonian(self, field_scale)?;
        gibbs_state(&h, self.bath_temperature, self.labels(), &self.constants)
    }

    /// Single-qubit thermal state of `label` under its bare Zeeman term.
    pub fn local_thermal_state(&self, label: &str, field_scale: f64) -> Result<DensityMatrix> {
        let omega = field_scale * self.omega(label)?;
        let h = local_zeeman(omega, &self.constants);
        gibbs_state(&h, self.bath_temperature, vec![label.to_string()], &self.constants)
    }

    /// The subsystem made of the qubits carrying `roles`, in register order,
    /// with the couplings among them.
    pub fn restricted_to_roles(&self, roles: &[Role]) -> Result<SpinSystem> {
        for &role in roles {
            self.qubit_with_role(role)?;
        }
        let qubits: Vec<QubitSpec> = self
            .qubits
            .iter()
            .filter(|q| roles.contains(&q.role))
            .cloned()
            .collect();
        let couplings: Vec<(&str, &str, f64)> = self
            .couplings()
            .filter(|(a, b, _)| {
                qubits.iter().any(|q| q.label == *a) && qubits.iter().any(|q| q.label == *b)
            })
            .collect();
        Ok(SpinSystem::new(qubits, &couplings, self.b_field, self.bath_temperature)?
            .with_constants(self.constants))
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SystemConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.build()
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("config not found: {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Canonical TOML rendering; loads back to an equal system.
    pub fn to_toml_string(&self) -> String {
        let cfg = SystemConfig {
            bath_temperature_k: self.bath_temperature,
            b_field_t: Some(self.b_field),
            reference: None,
            qubits: self
                .qubits
                .iter()
                .map(|q| QubitConfig {
                    label: q.label.clone(),
                    role: q.role,
                    gamma_over_2pi_mhz_per_t: q.gamma_over_2pi,
                    t1_s: q.t1,
                    omega_over_2pi_mhz: q.larmor_over_2pi,
                })
                .collect(),
            couplings: self
                .couplings()
                .map(|(a, b, j)| CouplingConfig {
                    pair: [a.to_string(), b.to_string()],
                    j_over_2pi_hz: j,
                })
                .collect(),
        };
        toml::to_string(&cfg).expect("system config serializes")
    }
}

/// `-hbar * omega * I_z` on one qubit.
pub fn local_zeeman(omega: f64, constants: &PhysicalConstants) -> ComplexMatrix {
    let e = 0.5 * constants.hbar * omega;
    ComplexMatrix::from_real_diagonal(&[-e, e]).expect("2x2")
}

/// Lab-frame Hamiltonian `-hbar sum_i s omega_i I_iz + hbar sum_{i != j} J_ij I_iz I_jz`
/// with `s = field_scale`.
pub fn static_hamiltonian(sys: &SpinSystem, field_scale: f64) -> Result<ComplexMatrix> {
    if !(field_scale > 0.0 && field_scale.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "field scale must be positive, got {field_scale}"
        )));
    }
    sys.zeeman_coupling_hamiltonian(&sys.scaled_omegas(field_scale))
}

/// `exp(-H / k_B T) / Z`
pub fn gibbs_state<S: Into<String>>(
    hamiltonian: &ComplexMatrix,
    temperature: f64,
    qubits: Vec<S>,
    constants: &PhysicalConstants,
) -> Result<DensityMatrix> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "temperature must be positive, got {temperature}"
        )));
    }
    let beta = 1.0 / (constants.k_boltzmann * temperature);
    let unnormalized = if hamiltonian.is_diagonal(0.0) {
        let energies = hamiltonian.real_diagonal();
        let e0 = energies.iter().copied().fold(f64::INFINITY, f64::min);
        let weights: Vec<f64> = energies.iter().map(|e| (-beta * (e - e0)).exp()).collect();
        ComplexMatrix::from_real_diagonal(&weights)?
    } else {
        let (values, _) = hamiltonian.eigh()?;
        let e0 = values[0];
        hamiltonian.hermitian_function(|e| (-beta * (e - e0)).exp())?
    };
    let z = unnormalized.trace().re;
    DensityMatrix::new(unnormalized.scale(1.0 / z), qubits)
}

/// Reduced state of one qubit.
pub fn qubit_marginal(rho: &DensityMatrix, label: &str) -> Result<DensityMatrix> {
    partial_trace(rho, &[label])
}

/// `P_up - P_down = rho_00 - rho_11` of a single-qubit state.
pub fn polarization(rho: &DensityMatrix) -> Result<f64> {
    if rho.num_qubits() != 1 {
        return Err(Error::InvalidInput(format!(
            "polarization needs a single-qubit state, got {} qubits",
            rho.num_qubits()
        )));
    }
    let d = rho.matrix().get(0, 0) - rho.matrix().get(1, 1);
    if d.im.abs() > 1e-12 {
        return Err(Error::InvalidInput(format!(
            "population difference has imaginary part {}",
            d.im
        )));
    }
    Ok(d.re)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemConfig {
    bath_temperature_k: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    b_field_t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reference: Option<ReferenceConfig>,
    qubits: Vec<QubitConfig>,
    #[serde(default)]
    couplings: Vec<CouplingConfig>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReferenceConfig {
    label: String,
    omega_over_2pi_mhz: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QubitConfig {
    label: String,
    role: Role,
    gamma_over_2pi_mhz_per_t: f64,
    t1_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    omega_over_2pi_mhz: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CouplingConfig {
    pair: [String; 2],
    j_over_2pi_hz: f64,
}

impl SystemConfig {
    fn build(self) -> Result<SpinSystem> {
        let qubits = self
            .qubits
            .iter()
            .map(|q| {
                let spec = QubitSpec::new(q.label.clone(), q.role, q.gamma_over_2pi_mhz_per_t, q.t1_s)?;
                match q.omega_over_2pi_mhz {
                    Some(f) => spec.with_larmor(f),
                    None => Ok(spec),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let b_field = match (self.b_field_t, &self.reference) {
            (Some(b), None) => b,
            (None, Some(r)) => {
                let q = qubits
                    .iter()
                    .find(|q| q.label == r.label)
                    .ok_or_else(|| Error::UnknownLabel(r.label.clone()))?;
                r.omega_over_2pi_mhz / q.gamma_over_2pi
            }
            _ => {
                return Err(Error::Config(
                    "give exactly one of `b_field_t` or `[reference]`".into(),
                ))
            }
        };
        let couplings: Vec<(&str, &str, f64)> = self
            .couplings
            .iter()
            .map(|c| (c.pair[0].as_str(), c.pair[1].as_str(), c.j_over_2pi_hz))
            .collect();
        SpinSystem::new(qubits, &couplings, b_field, self.bath_temperature_k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MHZ: f64 = 2.0 * PI * 1e6;

    #[test]
    fn single_qubit_hamiltonian() {
        let q = QubitSpec::new("q", Role::Target, 10.0, 1.0).unwrap();
        let sys = SpinSystem::new(vec![q], &[], 2.0, 300.0).unwrap();
        let h = static_hamiltonian(&sys, 1.0).unwrap();
        let e = 0.5 * PhysicalConstants::CODATA_2018.hbar * 20.0 * MHZ;
        assert!((h.get(0, 0).re + e).abs() < 1e-12 * e);
        assert!((h.get(1, 1).re - e).abs() < 1e-12 * e);
        assert_eq!(h.get(0, 1).norm(), 0.0);
    }

    #[test]
    fn tce_ground_entry_matches_table() {
        let sys = SpinSystem::tce();
        let hbar = PhysicalConstants::CODATA_2018.hbar;
        let h = static_hamiltonian(&sys, 1.0).unwrap();
        // ordered-pair J sum counts each coupling twice
        let j_sum = 2.0 * (103.0 + 9.0 + 200.8) * 2.0 * PI;
        let expected = -hbar * (125.77 + 125.77 + 500.13) * MHZ / 2.0 + hbar * j_sum / 4.0;
        assert!((h.get(0, 0).re - expected).abs() < 1e-12 * expected.abs());
        assert!(h.is_diagonal(0.0));
    }

    #[test]
    fn half_field_halves_zeeman_only() {
        let sys = SpinSystem::tce();
        let full = static_hamiltonian(&sys, 1.0).unwrap().real_diagonal();
        let half = static_hamiltonian(&sys, 0.5).unwrap().real_diagonal();
        let couplings = sys.zeeman_coupling_hamiltonian(&[0.0; 3]).unwrap().real_diagonal();
        for i in 0..8 {
            let zeeman_full = full[i] - couplings[i];
            let zeeman_half = half[i] - couplings[i];
            assert!((zeeman_half - 0.5 * zeeman_full).abs() < 1e-12 * zeeman_full.abs());
        }
    }

    #[test]
    fn infinite_temperature_is_maximally_mixed() {
        let sys = SpinSystem::tce();
        let h = static_hamiltonian(&sys, 1.0).unwrap();
        let rho = gibbs_state(&h, 1e12, sys.labels(), sys.constants()).unwrap();
        for p in rho.populations() {
            assert!((p - 0.125).abs() < 1e-10);
        }
    }

    #[test]
    fn thermal_polarization_values() {
        assert_eq!(thermal_polarization(0.0, 300.0), 0.0);
        let carbon = thermal_polarization(125.77 * MHZ, 300.0);
        assert!((carbon - 1.006e-5).abs() < 0.001e-5, "{carbon}");
        let hydrogen = thermal_polarization(500.13 * MHZ, 300.0);
        assert!((hydrogen - 4.000e-5).abs() < 0.001e-5, "{hydrogen}");
    }

    #[test]
    fn single_qubit_gibbs_polarization() {
        let c = PhysicalConstants::CODATA_2018;
        let rho = gibbs_state(&local_zeeman(500.13 * MHZ, &c), 300.0, vec!["H"], &c).unwrap();
        let eps = polarization(&rho).unwrap();
        assert!((eps - 4.000e-5).abs() < 0.001e-5);
    }

    #[test]
    fn effective_temperature_inverts_thermal_polarization() {
        let omega = 125.77 * MHZ;
        let eps = thermal_polarization(omega, 300.0);
        let t = effective_temperature(eps, omega).unwrap();
        assert!((t - 300.0).abs() < 1e-9 * 300.0);
    }

    #[test]
    fn effective_temperature_anchor_values() {
        let omega = 62.885 * MHZ;
        let t1 = effective_temperature(3.0e-5, omega).unwrap();
        assert!((t1 - 50.3).abs() < 0.05, "{t1}");
        let t7 = effective_temperature(4.0e-5, omega).unwrap();
        assert!((t7 - 37.7).abs() < 0.05, "{t7}");
    }

    #[test]
    fn effective_temperature_rejects_out_of_range() {
        assert!(effective_temperature(0.0, 1.0).is_err());
        assert!(effective_temperature(-0.1, 1.0).is_err());
        assert!(effective_temperature(1.0, 1.0).is_err());
    }

    #[test]
    fn polarization_of_simple_states() {
        let mixed = DensityMatrix::maximally_mixed(vec!["q"]).unwrap();
        assert_eq!(polarization(&mixed).unwrap(), 0.0);
        let up = DensityMatrix::basis_state(0, vec!["q"]).unwrap();
        assert_eq!(polarization(&up).unwrap(), 1.0);
        let pair = DensityMatrix::maximally_mixed(vec!["a", "b"]).unwrap();
        assert!(polarization(&pair).is_err());
    }

    #[test]
    fn hydrogen_marginal_at_half_field() {
        let sys = SpinSystem::tce();
        let rho = sys.thermal_state(0.5).unwrap();
        let eps = polarization(&qubit_marginal(&rho, "H").unwrap()).unwrap();
        assert!((eps - 2.000e-5).abs() < 0.001e-5, "{eps}");
    }

    #[test]
    fn system_validation() {
        let q = || QubitSpec::new("a", Role::Target, 1.0, 1.0).unwrap();
        assert!(QubitSpec::new("a", Role::Target, 0.0, 1.0).is_err());
        assert!(QubitSpec::new("a", Role::Target, 1.0, -1.0).is_err());
        assert!(SpinSystem::new(vec![q()], &[], 0.0, 300.0).is_err());
        assert!(SpinSystem::new(vec![q()], &[], 1.0, 0.0).is_err());
        assert!(SpinSystem::new(vec![q()], &[("a", "a", 1.0)], 1.0, 300.0).is_err());
        assert!(SpinSystem::new(vec![q(), q()], &[], 1.0, 300.0).is_err());
        let b = QubitSpec::new("b", Role::Reset, 1.0, 1.0).unwrap();
        assert!(SpinSystem::new(vec![q(), b.clone()], &[("a", "b", 1.0), ("b", "a", 2.0)], 1.0, 300.0).is_err());
        let sys = SpinSystem::new(vec![q(), b], &[("b", "a", 5.0)], 1.0, 300.0).unwrap();
        assert_eq!(sys.coupling("a", "b"), 5.0);
        assert_eq!(sys.coupling("b", "a"), 5.0);
    }

    #[test]
    fn tce_field_derived_from_proton() {
        let sys = SpinSystem::tce();
        assert!((sys.b_field() - 500.13 / 42.477).abs() < 1e-12);
        assert!((sys.omega("H").unwrap() - 500.13 * MHZ).abs() < 1e-6);
    }

    #[test]
    fn toml_config_with_reference_frequency() {
        let text = r#"
            bath_temperature_k = 300.0

            [reference]
            label = "H"
            omega_over_2pi_mhz = 500.13

            [[qubits]]
            label = "C1"
            role = "target"
            gamma_over_2pi_mhz_per_t = 10.7084
            t1_s = 43.0

            [[qubits]]
            label = "C2"
            role = "compression"
            gamma_over_2pi_mhz_per_t = 10.7084
            t1_s = 20.0

            [[qubits]]
            label = "H"
            role = "reset"
            gamma_over_2pi_mhz_per_t = 42.477
            t1_s = 3.5

            [[couplings]]
            pair = ["C1", "C2"]
            j_over_2pi_hz = 103.0
        "#;
        let sys = SpinSystem::from_toml_str(text).unwrap();
        assert!((sys.b_field() - 500.13 / 42.477).abs() < 1e-12);
        let c1 = sys.omega("C1").unwrap() / MHZ;
        assert!((c1 - 10.7084 * 500.13 / 42.477).abs() < 1e-9);
        assert_eq!(sys.coupling("C2", "C1"), 103.0);
        assert_eq!(sys.coupling("C1", "H"), 0.0);
    }

    #[test]
    fn toml_config_errors() {
        let no_field = r#"
            bath_temperature_k = 300.0
            [[qubits]]
            label = "a"
            role = "target"
            gamma_over_2pi_mhz_per_t = 1.0
            t1_s = 1.0
        "#;
        assert!(matches!(SpinSystem::from_toml_str(no_field), Err(Error::Config(_))));
        let with_field = no_field.replace("bath_temperature_k = 300.0", "bath_temperature_k = 300.0\nb_field_t = 1.0");
        assert!(SpinSystem::from_toml_str(&with_field).is_ok());
        let bad_role = with_field.replace("target", "spectator");
        assert!(matches!(SpinSystem::from_toml_str(&bad_role), Err(Error::Config(_))));
        assert!(matches!(SpinSystem::from_path("/nonexistent/sys.toml"), Err(Error::Config(_))));
    }

    #[test]
    fn toml_round_trip_of_preset() {
        let sys = SpinSystem::tce();
        let again = SpinSystem::from_toml_str(&sys.to_toml_string()).unwrap();
        assert_eq!(sys, again);
    }
}
