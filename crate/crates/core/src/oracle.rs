//! Brute-force verifier for the closed-form conditionals.
//!
//! The input pulse pair `(a_alpha^dag)^k1 (b_beta^dag)^k2 |0>` is pushed
//! through the 50:50 beam-splitter symbolically, one creation operator at a
//! time, producing the exact amplitude of every four-mode occupation tuple.
//! Event probabilities then come straight from the click model, with no
//! closed-form shortcut. Deliberately shares nothing with the closed forms
//! except the polarization type and the single-pair click formula.

use std::collections::BTreeMap;

use crate::conditionals::Polarization;
use crate::detector::{event_probability, EventPair};
use crate::error::{ModelError, Result};
use crate::Real;

/// Largest `k1 + k2` the expansion accepts. The monomial count grows
/// combinatorially, and nothing in the model needs more than two four-photon
/// pulses.
pub const DEFAULT_ORACLE_CEILING: usize = 8;

/// Amplitudes of a pure state over four-mode occupation tuples
/// `(n1, n2, n3, n4)`. All beam-splitter coefficients are real, so real
/// amplitudes suffice.
#[derive(Clone, Debug, PartialEq)]
pub struct FockAmplitudeMap<T> {
    amps: BTreeMap<[u8; 4], T>,
}

impl<T: Real> FockAmplitudeMap<T> {
    pub fn from_amplitudes(entries: impl IntoIterator<Item = ([u8; 4], T)>) -> Self {
        let mut amps = BTreeMap::new();
        for (occ, amp) in entries {
            *amps.entry(occ).or_insert_with(T::zero) += amp;
        }
        amps.retain(|_, a| *a != T::zero());
        Self { amps }
    }

    pub fn amplitude(&self, occ: [u8; 4]) -> T {
        self.amps.get(&occ).copied().unwrap_or_else(T::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = ([u8; 4], T)> + '_ {
        self.amps.iter().map(|(&occ, &a)| (occ, a))
    }

    pub fn norm_squared(&self) -> T {
        self.amps.values().fold(T::zero(), |acc, &a| acc + a * a)
    }
}

/// Coefficients of one input creation operator over the four output modes,
/// after polarization decomposition and the beam-splitter transform
/// `a -> (a + b)/sqrt(2)`, `b -> (a - b)/sqrt(2)` per polarization.
fn mode_coefficients<T: Real>(input_is_b: bool, pol: Polarization) -> [T; 4] {
    let r = T::from_f64(std::f64::consts::FRAC_1_SQRT_2).unwrap();
    let h = T::from_f64(0.5).unwrap();
    let z = T::zero();
    match (input_is_b, pol) {
        (false, Polarization::H) => [r, z, r, z],
        (false, Polarization::V) => [z, r, z, r],
        (false, Polarization::Plus) => [h, h, h, h],
        (false, Polarization::Minus) => [h, -h, h, -h],
        (true, Polarization::H) => [r, z, -r, z],
        (true, Polarization::V) => [z, r, z, -r],
        (true, Polarization::Plus) => [h, h, -h, -h],
        (true, Polarization::Minus) => [h, -h, -h, h],
    }
}

/// Exact multinomial expansion of the beam-splitter output for `k1` photons
/// of polarization `alpha` in mode `a` and `k2` of `beta` in mode `b`.
pub fn expand_output_state<T: Real>(
    k1: usize,
    k2: usize,
    alpha: Polarization,
    beta: Polarization,
) -> Result<FockAmplitudeMap<T>> {
    expand_output_state_with_ceiling(k1, k2, alpha, beta, DEFAULT_ORACLE_CEILING)
}

pub fn expand_output_state_with_ceiling<T: Real>(
    k1: usize,
    k2: usize,
    alpha: Polarization,
    beta: Polarization,
    ceiling: usize,
) -> Result<FockAmplitudeMap<T>> {
    if k1 + k2 > ceiling {
        return Err(ModelError::OracleCapacity {
            total: k1 + k2,
            ceiling,
        });
    }
    // Polynomial in the four output creation operators, keyed by exponents.
    let mut poly: BTreeMap<[u8; 4], T> = BTreeMap::new();
    poly.insert([0, 0, 0, 0], T::one());
    let factors = std::iter::repeat_n((false, alpha), k1)
        .chain(std::iter::repeat_n((true, beta), k2));
    for (input_is_b, pol) in factors {
        let coeffs = mode_coefficients::<T>(input_is_b, pol);
        let mut next: BTreeMap<[u8; 4], T> = BTreeMap::new();
        for (occ, c) in &poly {
            for (mode, &w) in coeffs.iter().enumerate() {
                if w == T::zero() {
                    continue;
                }
                let mut bumped = *occ;
                bumped[mode] += 1;
                *next.entry(bumped).or_insert_with(T::zero) += *c * w;
            }
        }
        poly = next;
    }
    // Monomial -> Fock amplitude: input normalization 1/sqrt(k1! k2!) and
    // output mode factors sqrt(n_m!).
    let input_norm = (factorial::<T>(k1) * factorial::<T>(k2)).sqrt();
    let amps = poly.into_iter().map(|(occ, c)| {
        let mode_norm = occ
            .iter()
            .fold(T::one(), |acc, &n| acc * factorial::<T>(usize::from(n)));
        (occ, c * mode_norm.sqrt() / input_norm)
    });
    Ok(FockAmplitudeMap::from_amplitudes(amps))
}

fn factorial<T: Real>(n: usize) -> T {
    (1..=n).fold(T::one(), |acc, k| acc * T::from_usize(k).unwrap())
}

/// Event probability computed entirely from the expanded output state.
/// Accepts any of the six detector pairs, not just success events.
pub fn oracle_event_prob<T: Real>(
    event: EventPair,
    k1: usize,
    k2: usize,
    alpha: Polarization,
    beta: Polarization,
    dark_rate: T,
) -> Result<T> {
    let state = expand_output_state(k1, k2, alpha, beta)?;
    event_probability(event, &state, dark_rate)
}
