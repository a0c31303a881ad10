mod common;

use hbac_otto::qmath::{fidelity, ComplexMatrix};
use hbac_otto::spinsys::{
    gibbs_state, polarization, qubit_marginal, static_hamiltonian, thermal_polarization, PhysicalConstants,
};
use hbac_otto::SpinSystem;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

/// `exp(a)` by Taylor series with scaling and squaring.
fn expm_taylor(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let norm = a.iter().map(|z| z.norm()).sum::<f64>();
    let squarings = norm.log2().ceil().max(0.0) as u32 + 1;
    let scaled = a / Complex64::new(2f64.powi(squarings as i32), 0.0);
    let dim = a.nrows();
    let mut sum = DMatrix::<Complex64>::identity(dim, dim);
    let mut term = DMatrix::<Complex64>::identity(dim, dim);
    for k in 1..30 {
        term = &term * &scaled / Complex64::new(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

fn taylor_gibbs(h: &ComplexMatrix, beta: f64) -> DMatrix<Complex64> {
    let e = expm_taylor(&(h.as_dmatrix() * Complex64::new(-beta, 0.0)));
    let z = e.trace();
    e / z
}

fn max_dev(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn tce_target_marginal_polarization() {
    let sys = SpinSystem::tce();
    let rho = sys.thermal_state(1.0).unwrap();
    let eps = polarization(&qubit_marginal(&rho, "C1").unwrap()).unwrap();
    let expected = common::eps_thermal(common::rad(common::OMEGA_C_MHZ), common::BATH_T);
    assert!((eps - 1.006e-5).abs() < 0.0005e-5, "{eps:e}");
    assert!(common::rel_err(eps, expected) < 1e-3);
}

#[test]
fn tce_gibbs_state_matches_taylor_exponential() {
    let sys = SpinSystem::tce();
    let consts = PhysicalConstants::CODATA_2018;
    for scale in [0.5, 1.0] {
        let h = static_hamiltonian(&sys, scale).unwrap();
        let rho = gibbs_state(&h, 300.0, sys.labels(), &consts).unwrap();
        let oracle = taylor_gibbs(&h, 1.0 / (consts.k_boltzmann * 300.0));
        assert!(max_dev(rho.matrix().as_dmatrix(), &oracle) < 1e-14);
    }
}

#[test]
fn tce_thermal_state_close_to_product_of_marginals() {
    let sys = SpinSystem::tce();
    let rho = sys.thermal_state(1.0).unwrap();
    let labels = sys.labels();
    let mut product = qubit_marginal(&rho, &labels[0]).unwrap();
    for l in &labels[1..] {
        product = product.tensor(&qubit_marginal(&rho, l).unwrap()).unwrap();
    }
    assert!(fidelity(&rho, &product).unwrap() >= 0.999_999);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn marginals_follow_single_spin_law(scale in 0.05f64..2.0, temperature in 1.0f64..600.0) {
        let sys = SpinSystem::tce();
        let rho = gibbs_state(
            &static_hamiltonian(&sys, scale).unwrap(),
            temperature,
            sys.labels(),
            sys.constants(),
        )
        .unwrap();
        for label in sys.labels() {
            let eps = polarization(&qubit_marginal(&rho, &label).unwrap()).unwrap();
            let law = thermal_polarization(sys.omega(&label).unwrap() * scale, temperature);
            prop_assert!((eps - law).abs() < 2e-9, "{label}: {eps:e} vs {law:e}");
        }
    }

    #[test]
    fn populations_decrease_with_energy(scale in 0.05f64..2.0, temperature in 1.0f64..600.0) {
        let sys = SpinSystem::tce();
        let h = static_hamiltonian(&sys, scale).unwrap();
        let rho = gibbs_state(&h, temperature, sys.labels(), sys.constants()).unwrap();
        let energies = h.real_diagonal();
        let pops = rho.populations();
        for i in 0..energies.len() {
            for j in 0..energies.len() {
                if energies[i] < energies[j] {
                    prop_assert!(pops[i] > pops[j]);
                }
            }
        }
    }

    #[test]
    fn non_diagonal_gibbs_matches_taylor(
        entries in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 10),
        temperature in 0.5f64..5.0,
    ) {
        // dimensionless units with k_B = 1
        let consts = PhysicalConstants { hbar: 1.0, k_boltzmann: 1.0, avogadro: 1.0 };
        let mut m = DMatrix::<Complex64>::zeros(4, 4);
        let mut k = 0;
        for i in 0..4 {
            for j in i..4 {
                let (re, im) = entries[k];
                k += 1;
                if i == j {
                    m[(i, i)] = Complex64::new(re, 0.0);
                } else {
                    m[(i, j)] = Complex64::new(re, im);
                    m[(j, i)] = Complex64::new(re, -im);
                }
            }
        }
        let h = ComplexMatrix::from_dmatrix(m).unwrap();
        let rho = gibbs_state(&h, temperature, vec!["a", "b"], &consts).unwrap();
        let oracle = taylor_gibbs(&h, 1.0 / temperature);
        prop_assert!(max_dev(rho.matrix().as_dmatrix(), &oracle) < 1e-12);
    }
}
