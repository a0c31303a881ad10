//! Closed-form low-polarization model of the cycles, written independently of
//! the density-matrix pipeline. Every polarization is a scalar; cooling follows
//! the recurrence `eps_n = eps_{n-1} / 2 + eps_b` from `eps_0 = eps_b`.

#![allow(dead_code)]

use std::f64::consts::PI;

pub const HBAR: f64 = 1.054_571_817e-34;
pub const KB: f64 = 1.380_649e-23;
pub const NA: f64 = 6.022_140_76e23;

pub const BATH_T: f64 = 300.0;
pub const OMEGA_C_MHZ: f64 = 125.77;
pub const OMEGA_H_MHZ: f64 = 500.13;
pub const T1_TARGET: f64 = 43.0;
pub const T1_RESET: f64 = 3.5;

pub fn rad(mhz: f64) -> f64 {
    2.0 * PI * mhz * 1e6
}

pub fn eps_thermal(omega: f64, t: f64) -> f64 {
    (HBAR * omega / (2.0 * KB * t)).tanh()
}

pub fn spin_temperature(eps: f64, omega: f64) -> f64 {
    HBAR * omega / (2.0 * KB * eps.atanh())
}

/// Target polarization after round `n`, iterating the scalar recurrence.
pub fn eps_round(eps_b: f64, n: usize) -> f64 {
    let mut eps = eps_b;
    for _ in 0..n {
        eps = eps / 2.0 + eps_b;
    }
    eps
}

/// `eps_b (2 - 2^-n)`
pub fn eps_round_closed(eps_b: f64, n: usize) -> f64 {
    eps_b * (2.0 - 0.5f64.powi(n as i32))
}

#[derive(Debug, Clone, Copy)]
pub struct FourStroke {
    pub q_in: f64,
    pub q_out: f64,
    pub w: f64,
    pub power: f64,
    pub power_iso: f64,
    pub t_cold: f64,
}

pub fn four_stroke(n: usize) -> FourStroke {
    let w_full = rad(OMEGA_C_MHZ);
    let w_half = w_full / 2.0;
    let eps0 = eps_thermal(w_full, BATH_T);
    let eps_b = eps_thermal(rad(OMEGA_H_MHZ) / 2.0, BATH_T);
    let eps_cold = eps_round_closed(eps_b, n);
    // energy of a spin with polarization eps under -hbar w I_z is -hbar w eps / 2
    let q_in = HBAR * w_full / 2.0 * (eps_cold - eps0) * NA;
    let q_out = HBAR * w_half / 2.0 * (eps_cold - eps0) * NA;
    let w = q_in - q_out;
    FourStroke {
        q_in,
        q_out,
        w,
        power: w / (T1_TARGET + T1_RESET * (2 * n + 1) as f64),
        power_iso: w / (2.0 * T1_TARGET),
        t_cold: spin_temperature(eps_cold, w_half),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TwoStroke {
    pub q_in: f64,
    pub w: f64,
    pub power: f64,
    pub eta: f64,
    pub window_upper_mhz: f64,
}

pub fn two_stroke(omega_s_mhz: f64, n: usize) -> TwoStroke {
    let w_t = rad(OMEGA_C_MHZ);
    let w_s = rad(omega_s_mhz);
    let eps_b = eps_thermal(rad(OMEGA_H_MHZ), BATH_T);
    let eps_t = eps_round_closed(eps_b, n);
    let eps_s = eps_thermal(w_s, BATH_T);
    let q_in = HBAR * w_s / 2.0 * (eps_t - eps_s) * NA;
    let q_out = HBAR * w_t / 2.0 * (eps_t - eps_s) * NA;
    let w = q_in - q_out;
    let t_t = spin_temperature(eps_t, w_t);
    TwoStroke {
        q_in,
        w,
        power: w / (T1_RESET * (2 * n + 1) as f64),
        eta: 1.0 - w_t / w_s,
        window_upper_mhz: OMEGA_C_MHZ * BATH_T / t_t,
    }
}

pub fn rel_err(actual: f64, expected: f64) -> f64 {
    ((actual - expected) / expected).abs()
}
