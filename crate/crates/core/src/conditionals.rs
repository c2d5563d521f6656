//! Closed-form success-event probabilities for a beam-splitter fed with `k1`
//! photons of polarization `alpha` in mode `a` and `k2` photons of
//! polarization `beta` in mode `b`.
//!
//! Eight same-basis polarization pairs are modeled. In the Z basis the
//! output stays diagonal per polarization mode, so each event picks up a
//! single occupation pattern; orthogonal pairs keep the photons apart while
//! parallel pairs bunch them into one spatial mode. In the X basis the two
//! pulses interfere and the amplitude of each split `l : k1+k2-l` carries a
//! binomial interference sum whose sign pattern depends on the event.
//!
//! Every formula here is cross-checked against the independent expansion in
//! [`crate::oracle`].

use crate::detector::{check_dark_rate, click_pair_probability, EventPair};
use crate::error::{ModelError, Result};
use crate::Real;

/// Photon polarization: `H`/`V` span the Z basis, `Plus`/`Minus` the X basis
/// with `|±> = (|H> ± |V>)/sqrt(2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Polarization {
    H,
    V,
    Plus,
    Minus,
}

/// A measurement/preparation basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Basis {
    Z,
    X,
}

impl Polarization {
    pub fn basis(self) -> Basis {
        match self {
            Polarization::H | Polarization::V => Basis::Z,
            Polarization::Plus | Polarization::Minus => Basis::X,
        }
    }
}

impl Basis {
    /// The four polarization pairs contributing to this basis' statistics.
    pub fn pairs(self) -> [(Polarization, Polarization); 4] {
        use Polarization::*;
        match self {
            Basis::Z => [(H, V), (V, H), (H, H), (V, V)],
            Basis::X => [(Plus, Minus), (Minus, Plus), (Plus, Plus), (Minus, Minus)],
        }
    }
}

/// All eight modeled polarization pairs, in table order.
pub const ORIENTATIONS: [(Polarization, Polarization); 8] = {
    use Polarization::*;
    [
        (H, V),
        (V, H),
        (H, H),
        (V, V),
        (Plus, Minus),
        (Minus, Plus),
        (Plus, Plus),
        (Minus, Minus),
    ]
};

/// A pure two-pulse input to the beam-splitter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BeamSplitterInput {
    pub k1: usize,
    pub k2: usize,
    pub alpha: Polarization,
    pub beta: Polarization,
}

impl BeamSplitterInput {
    pub fn new(k1: usize, k2: usize, alpha: Polarization, beta: Polarization) -> Self {
        Self {
            k1,
            k2,
            alpha,
            beta,
        }
    }
}

/// Probability of a success event for the given pure input.
///
/// Errors on non-success events and on polarization pairs that mix bases.
pub fn success_event_probability<T: Real>(
    event: EventPair,
    input: BeamSplitterInput,
    dark_rate: T,
) -> Result<T> {
    if !event.is_success() {
        let (i, j) = event.detectors();
        return Err(ModelError::NotSuccessEvent { i, j });
    }
    check_dark_rate(dark_rate)?;
    let BeamSplitterInput {
        k1,
        k2,
        alpha,
        beta,
    } = input;
    match (alpha.basis(), beta.basis()) {
        (Basis::Z, Basis::Z) => {
            if alpha == beta {
                Ok(z_parallel(
                    event,
                    k1,
                    k2,
                    dark_rate,
                    alpha == Polarization::V,
                ))
            } else {
                Ok(z_orthogonal(
                    event,
                    k1,
                    k2,
                    dark_rate,
                    alpha == Polarization::V,
                ))
            }
        }
        (Basis::X, Basis::X) => {
            // Swapping both signs leaves every probability unchanged:
            // p^{-+} = p^{+-} and p^{--} = p^{++}.
            let (ca, cb) = match (alpha, beta) {
                (Polarization::Minus, Polarization::Plus) => {
                    (Polarization::Plus, Polarization::Minus)
                }
                (Polarization::Minus, Polarization::Minus) => {
                    (Polarization::Plus, Polarization::Plus)
                }
                other => other,
            };
            Ok(x_basis(event, k1, k2, dark_rate, ca != cb))
        }
        _ => Err(ModelError::MixedBasisPair(alpha, beta)),
    }
}

/// Orthogonal Z pair. Every polarization mode keeps its photons, so each
/// event sees the one output component with all photons on its own pair of
/// detectors, weighted `(1/2)^(k1+k2)`.
///
/// `alpha_is_v` selects the `(V, H)` ordering, which swaps the photon counts.
fn z_orthogonal<T: Real>(event: EventPair, k1: usize, k2: usize, d: T, alpha_is_v: bool) -> T {
    let (k1, k2) = if alpha_is_v { (k2, k1) } else { (k1, k2) };
    // Occupations (l_i, l_j) per event for the (H, V) input: detector pairs
    // (1,2), (3,4), (1,4) see (k1, k2); (2,3) sees the V photon count first.
    let (l_i, l_j) = match event.detectors() {
        (2, 3) => (k2, k1),
        _ => (k1, k2),
    };
    let half = T::from_f64(0.5).unwrap();
    half.powi((k1 + k2) as i32) * click_pair_probability(l_i, l_j, d)
}

/// Parallel Z pair. All photons share one polarization and bunch into a
/// single spatial mode with weight `C(k1+k2, k1) (1/2)^(k1+k2)`; the second
/// detector of the event can only fire through a dark count.
fn z_parallel<T: Real>(event: EventPair, k1: usize, k2: usize, d: T, is_vv: bool) -> T {
    let k = k1 + k2;
    let coeff = binomial::<T>(k, k1) * T::from_f64(0.5).unwrap().powi(k as i32);
    // For (H, H) the photons sit on the first detector of (1,2)/(3,4) and on
    // the second of (1,4)/(2,3); (V, V) relabels H <-> V, i.e. 1<->2, 3<->4.
    let photons_on_first = matches!(
        (event.detectors(), is_vv),
        ((1, 2) | (3, 4), false) | ((2, 3), true)
    );
    let (l_i, l_j) = if photons_on_first { (k, 0) } else { (0, k) };
    coeff * click_pair_probability(l_i, l_j, d)
}

/// X-basis pair. The amplitude of the split `l` photons on the event's first
/// detector and `k1+k2-l` on its second carries the interference sum
/// `sum_s C(k1,s) C(k2,l-s) (+-1)^(l-s)`; orthogonal pairs put the signed sum
/// on events (1,2)/(3,4), parallel pairs on (1,4)/(2,3).
fn x_basis<T: Real>(event: EventPair, k1: usize, k2: usize, d: T, orthogonal: bool) -> T {
    let k = k1 + k2;
    let phi_plus_event = matches!(event.detectors(), (1, 2) | (3, 4));
    let signed = if orthogonal {
        phi_plus_event
    } else {
        !phi_plus_event
    };
    let mut acc = T::zero();
    for l in 0..=k {
        let mut inner = T::zero();
        let s_min = l.saturating_sub(k2);
        let s_max = l.min(k1);
        for s in s_min..=s_max {
            let term = binomial::<T>(k1, s) * binomial::<T>(k2, l - s);
            let negate = signed && (l - s) % 2 == 1;
            inner += if negate { -term } else { term };
        }
        let weight = factorial::<T>(l) * factorial::<T>(k - l) * inner * inner;
        acc += weight * click_pair_probability(l, k - l, d);
    }
    let norm =
        T::from_f64(0.25).unwrap().powi(k as i32) / (factorial::<T>(k1) * factorial::<T>(k2));
    acc * norm
}

pub(crate) fn factorial<T: Real>(n: usize) -> T {
    (1..=n).fold(T::one(), |acc, k| acc * T::from_usize(k).unwrap())
}

pub(crate) fn binomial<T: Real>(n: usize, k: usize) -> T {
    if k > n {
        return T::zero();
    }
    let k = k.min(n - k);
    let mut acc = T::one();
    for i in 0..k {
        acc = acc * T::from_usize(n - i).unwrap() / T::from_usize(i + 1).unwrap();
    }
    acc
}

/// Dense memo of [`success_event_probability`] over all eight orientations,
/// the four success events and photon numbers up to `(max_k1, max_k2)`, for
/// one dark rate. Immutable once built, so freely shared across threads.
#[derive(Clone, Debug)]
pub struct ConditionalTable<T> {
    dark_rate: T,
    max_k1: usize,
    max_k2: usize,
    values: Vec<T>,
}

impl<T: Real> ConditionalTable<T> {
    pub fn new(dark_rate: T, max_k1: usize, max_k2: usize) -> Result<Self> {
        check_dark_rate(dark_rate)?;
        let stride_k2 = max_k2 + 1;
        let stride_k1 = (max_k1 + 1) * stride_k2;
        let stride_event = 4 * stride_k1;
        let mut values = vec![T::zero(); 8 * stride_event];
        for (oi, &(alpha, beta)) in ORIENTATIONS.iter().enumerate() {
            for (ei, &event) in crate::detector::SUCCESS_EVENTS.iter().enumerate() {
                for k1 in 0..=max_k1 {
                    for k2 in 0..=max_k2 {
                        let input = BeamSplitterInput::new(k1, k2, alpha, beta);
                        let p = success_event_probability(event, input, dark_rate)?;
                        values[oi * stride_event + ei * stride_k1 + k1 * stride_k2 + k2] = p;
                    }
                }
            }
        }
        Ok(Self {
            dark_rate,
            max_k1,
            max_k2,
            values,
        })
    }

    pub fn dark_rate(&self) -> T {
        self.dark_rate
    }

    pub fn max_k1(&self) -> usize {
        self.max_k1
    }

    pub fn max_k2(&self) -> usize {
        self.max_k2
    }

    pub fn probability(
        &self,
        alpha: Polarization,
        beta: Polarization,
        event: EventPair,
        k1: usize,
        k2: usize,
    ) -> Result<T> {
        if k1 > self.max_k1 || k2 > self.max_k2 {
            return Err(ModelError::KernelTooSmall {
                max_k1: self.max_k1,
                max_k2: self.max_k2,
                k1,
                k2,
            });
        }
        let oi = orientation_index(alpha, beta).ok_or(ModelError::MixedBasisPair(alpha, beta))?;
        let ei = success_index(event).ok_or_else(|| {
            let (i, j) = event.detectors();
            ModelError::NotSuccessEvent { i, j }
        })?;
        Ok(self.value(oi, ei, k1, k2))
    }

    pub(crate) fn value(&self, oi: usize, ei: usize, k1: usize, k2: usize) -> T {
        let stride_k2 = self.max_k2 + 1;
        let stride_k1 = (self.max_k1 + 1) * stride_k2;
        let stride_event = 4 * stride_k1;
        self.values[oi * stride_event + ei * stride_k1 + k1 * stride_k2 + k2]
    }
}

pub(crate) fn orientation_index(alpha: Polarization, beta: Polarization) -> Option<usize> {
    ORIENTATIONS
        .iter()
        .position(|&(a, b)| a == alpha && b == beta)
}

pub(crate) fn success_index(event: EventPair) -> Option<usize> {
    crate::detector::SUCCESS_EVENTS
        .iter()
        .position(|&e| e == event)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::SUCCESS_EVENTS;
    use crate::oracle::oracle_event_prob;
    use Polarization::{Minus, Plus, H, V};

    fn event(i: u8, j: u8) -> EventPair {
        EventPair::new(i, j).unwrap()
    }

    fn prob(e: EventPair, k1: usize, k2: usize, a: Polarization, b: Polarization, d: f64) -> f64 {
        success_event_probability(e, BeamSplitterInput::new(k1, k2, a, b), d).unwrap()
    }

    #[test]
    fn orthogonal_z_single_photons() {
        assert!((prob(event(1, 2), 1, 1, H, V, 0.0) - 0.25).abs() < 1e-15);
        let d = 0.01;
        let vac = prob(event(1, 2), 0, 0, H, V, d);
        assert!((vac - d * d * (1.0 - d) * (1.0 - d)).abs() < 1e-18);
        // (2,3) sees the swapped occupations: both positive here.
        let p = prob(event(2, 3), 2, 1, H, V, d);
        assert!((p - 0.125 * 0.9801).abs() < 1e-15);
    }

    #[test]
    fn parallel_z_bunches() {
        let d = 0.01;
        let p = prob(event(1, 2), 1, 1, H, H, d);
        assert!((p - 0.5 * d * (1.0 - d) * (1.0 - d)).abs() < 1e-15);
        let p14 = prob(event(1, 4), 1, 0, H, H, d);
        assert!((p14 - 0.5 * d * (1.0 - d) * (1.0 - d)).abs() < 1e-15);
        let vac = prob(event(3, 4), 0, 0, H, H, d);
        assert!((vac - d * d * (1.0 - d) * (1.0 - d)).abs() < 1e-18);
    }

    #[test]
    fn x_basis_single_photons() {
        assert!((prob(event(1, 2), 1, 1, Plus, Plus, 0.0) - 0.25).abs() < 1e-15);
        // Hong-Ou-Mandel suppression, exactly zero without dark counts.
        assert_eq!(prob(event(1, 4), 1, 1, Plus, Plus, 0.0), 0.0);
        assert_eq!(prob(event(2, 3), 1, 1, Plus, Plus, 0.0), 0.0);
        let d = 0.01;
        let p = prob(event(1, 4), 1, 1, Plus, Plus, d);
        assert!((p - 0.25 * d * (1.0 - d) * (1.0 - d)).abs() < 1e-18);
    }

    #[test]
    fn vacuum_with_no_darks_never_fires() {
        for &(a, b) in &ORIENTATIONS {
            for &e in &SUCCESS_EVENTS {
                assert_eq!(prob(e, 0, 0, a, b, 0.0), 0.0);
            }
        }
    }

    #[test]
    fn rejects_non_success_events_and_mixed_bases() {
        let input = BeamSplitterInput::new(1, 1, H, V);
        assert!(matches!(
            success_event_probability::<f64>(event(1, 3), input, 0.0),
            Err(ModelError::NotSuccessEvent { i: 1, j: 3 })
        ));
        let mixed = BeamSplitterInput::new(1, 1, H, Plus);
        assert!(matches!(
            success_event_probability::<f64>(event(1, 2), mixed, 0.0),
            Err(ModelError::MixedBasisPair(_, _))
        ));
    }

    #[test]
    fn exchange_symmetries_are_exact() {
        for k1 in 0..=4usize {
            for k2 in 0..=4usize {
                for &e in &SUCCESS_EVENTS {
                    for d in [0.0, 0.05] {
                        assert_eq!(
                            prob(e, k1, k2, Minus, Plus, d),
                            prob(e, k1, k2, Plus, Minus, d)
                        );
                        assert_eq!(
                            prob(e, k1, k2, Minus, Minus, d),
                            prob(e, k1, k2, Plus, Plus, d)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn mirror_symmetry_between_hv_and_vh() {
        for k1 in 0..=4usize {
            for k2 in 0..=4usize {
                for d in [0.0, 1e-3, 0.05] {
                    assert_eq!(
                        prob(event(1, 2), k1, k2, H, V, d),
                        prob(event(1, 2), k2, k1, V, H, d)
                    );
                }
            }
        }
    }

    #[test]
    fn success_events_sum_below_one() {
        for k1 in 0..=4usize {
            for k2 in 0..=4usize {
                for &(a, b) in &ORIENTATIONS {
                    for d in [0.0, 0.05] {
                        let total: f64 = SUCCESS_EVENTS
                            .iter()
                            .map(|&e| prob(e, k1, k2, a, b, d))
                            .sum();
                        assert!(total <= 1.0 + 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn closed_forms_match_the_oracle_up_to_three_photons() {
        for k1 in 0..=3usize {
            for k2 in 0..=3usize {
                for &(a, b) in &ORIENTATIONS {
                    for &e in &SUCCESS_EVENTS {
                        for d in [0.0, 0.05] {
                            let closed = prob(e, k1, k2, a, b, d);
                            let oracle = oracle_event_prob::<f64>(e, k1, k2, a, b, d).unwrap();
                            assert!(
                                (closed - oracle).abs() < 1e-12,
                                "k=({k1},{k2}) pols ({a:?},{b:?}) event {e} d={d}: \
                                 closed {closed} vs oracle {oracle}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn table_matches_direct_evaluation() {
        let table = ConditionalTable::new(0.01, 4, 3).unwrap();
        for &(a, b) in &ORIENTATIONS {
            for &e in &SUCCESS_EVENTS {
                for k1 in 0..=4usize {
                    for k2 in 0..=3usize {
                        assert_eq!(
                            table.probability(a, b, e, k1, k2).unwrap(),
                            prob(e, k1, k2, a, b, 0.01)
                        );
                    }
                }
            }
        }
        assert!(matches!(
            table.probability(H, V, event(1, 2), 5, 0),
            Err(ModelError::KernelTooSmall { .. })
        ));
    }
}
