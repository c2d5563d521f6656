//! Threshold detectors with dark counts and the two-fold success-event logic.
//!
//! Detector `i` watches output mode `i` of the relay (1 = aH, 2 = aV,
//! 3 = bH, 4 = bV). An event `(i, j)` means detectors `i` and `j` click and
//! the other two stay silent; detection efficiency never appears here
//! because it is folded into the channel transmittance.

use crate::error::{ModelError, Result};
use crate::oracle::FockAmplitudeMap;
use crate::Real;

/// An unordered pair of detector indices, `1 <= i < j <= 4`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EventPair {
    i: u8,
    j: u8,
}

impl EventPair {
    pub fn new(i: u8, j: u8) -> Result<Self> {
        if i >= 1 && i < j && j <= 4 {
            Ok(Self { i, j })
        } else {
            Err(ModelError::InvalidEventPair { i, j })
        }
    }

    const fn of(i: u8, j: u8) -> Self {
        Self { i, j }
    }

    pub fn detectors(self) -> (u8, u8) {
        (self.i, self.j)
    }

    /// Whether this pair announces a successful Bell-type outcome.
    pub fn is_success(self) -> bool {
        SUCCESS_EVENTS.contains(&self)
    }
}

impl std::fmt::Display for EventPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.i, self.j)
    }
}

/// The protocol's accepted outcomes: (1,2) and (3,4) herald a Phi+-type
/// result, (1,4) and (2,3) a Psi--type result.
pub const SUCCESS_EVENTS: [EventPair; 4] = [
    EventPair::of(1, 2),
    EventPair::of(3, 4),
    EventPair::of(1, 4),
    EventPair::of(2, 3),
];

/// All six two-fold detector pairs.
pub const ALL_EVENT_PAIRS: [EventPair; 6] = [
    EventPair::of(1, 2),
    EventPair::of(1, 3),
    EventPair::of(1, 4),
    EventPair::of(2, 3),
    EventPair::of(2, 4),
    EventPair::of(3, 4),
];

/// Relay detector parameters: only the dark count rate, shared by all four.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectorParams<T> {
    dark_rate: T,
}

impl<T: Real> DetectorParams<T> {
    pub fn new(dark_rate: T) -> Result<Self> {
        check_dark_rate(dark_rate)?;
        Ok(Self { dark_rate })
    }

    pub fn dark_rate(&self) -> T {
        self.dark_rate
    }
}

pub(crate) fn check_dark_rate<T: Real>(d: T) -> Result<()> {
    if d < T::zero() || d >= T::one() || !d.is_finite() {
        return Err(ModelError::DarkRateOutOfRange(
            d.to_f64().unwrap_or(f64::NAN),
        ));
    }
    Ok(())
}

/// Probability that the event's two detectors click and the other two do not,
/// given `l_i` photons on one and `l_j` on the other (all remaining modes
/// vacuum). The `(1-d)^2` factor is the silence of the other two detectors.
pub fn click_pair_probability<T: Real>(l_i: usize, l_j: usize, dark_rate: T) -> T {
    let silent = (T::one() - dark_rate) * (T::one() - dark_rate);
    match (l_i > 0, l_j > 0) {
        (true, true) => silent,
        (true, false) | (false, true) => dark_rate * silent,
        (false, false) => dark_rate * dark_rate * silent,
    }
}

/// Probability of `event` for an arbitrary pure output state of the relay's
/// beam-splitter. Components with photons outside the event's two modes
/// cannot produce the event (a third detector would click) and contribute
/// zero; the rest contribute their diagonal weight times
/// [`click_pair_probability`].
pub fn event_probability<T: Real>(
    event: EventPair,
    state: &FockAmplitudeMap<T>,
    dark_rate: T,
) -> Result<T> {
    check_dark_rate(dark_rate)?;
    let norm = state.norm_squared();
    if (norm - T::one()).abs() > T::from_f64(1e-10).unwrap_or_else(T::epsilon) {
        return Err(ModelError::UnnormalizedState(
            norm.to_f64().unwrap_or(f64::NAN),
        ));
    }
    let (i, j) = event.detectors();
    let (i, j) = (usize::from(i) - 1, usize::from(j) - 1);
    let mut acc = T::zero();
    for (occ, amp) in state.iter() {
        let outside = (0..4).any(|m| m != i && m != j && occ[m] > 0);
        if outside {
            continue;
        }
        let weight = amp * amp;
        acc += weight * click_pair_probability(usize::from(occ[i]), usize::from(occ[j]), dark_rate);
    }
    Ok(acc)
}
