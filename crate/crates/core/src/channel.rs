//! Linear lossy channel: binomial photon deletion plus the dB bookkeeping
//! that folds detector efficiency into the per-arm transmittance.

use crate::error::{ModelError, Result};
use crate::sources::PhotonNumberDistribution;
use crate::Real;

/// Per-arm channel description. The relay detectors are modeled as ideal,
/// with their efficiency `xi` absorbed into each arm's transmittance:
/// `eta = 10^(-loss_db/10) * xi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelParams<T> {
    loss_db_a: T,
    loss_db_b: T,
    detector_efficiency: T,
}

impl<T: Real> ChannelParams<T> {
    pub fn new(loss_db_a: T, loss_db_b: T, detector_efficiency: T) -> Result<Self> {
        for loss in [loss_db_a, loss_db_b] {
            if loss < T::zero() || !loss.is_finite() {
                return Err(ModelError::NegativeLoss(loss.to_f64().unwrap_or(f64::NAN)));
            }
        }
        if detector_efficiency <= T::zero() || detector_efficiency > T::one() {
            return Err(ModelError::DetectorEfficiencyOutOfRange(
                detector_efficiency.to_f64().unwrap_or(f64::NAN),
            ));
        }
        Ok(Self {
            loss_db_a,
            loss_db_b,
            detector_efficiency,
        })
    }

    /// Relay in the middle: one total loss split equally between the arms.
    pub fn symmetric(total_loss_db: T, detector_efficiency: T) -> Result<Self> {
        let half = total_loss_db / T::from_u32(2).unwrap();
        Self::new(half, half, detector_efficiency)
    }

    pub fn loss_db_a(&self) -> T {
        self.loss_db_a
    }

    pub fn loss_db_b(&self) -> T {
        self.loss_db_b
    }

    pub fn detector_efficiency(&self) -> T {
        self.detector_efficiency
    }

    /// Effective transmittance on Alice's arm.
    pub fn eta_a(&self) -> T {
        effective_transmittance(self.loss_db_a, self.detector_efficiency)
            .expect("validated at construction")
    }

    /// Effective transmittance on Bob's arm.
    pub fn eta_b(&self) -> T {
        effective_transmittance(self.loss_db_b, self.detector_efficiency)
            .expect("validated at construction")
    }
}

/// `eta = 10^(-loss_db/10) * xi`.
pub fn effective_transmittance<T: Real>(loss_db: T, xi: T) -> Result<T> {
    if loss_db < T::zero() || !loss_db.is_finite() {
        return Err(ModelError::NegativeLoss(
            loss_db.to_f64().unwrap_or(f64::NAN),
        ));
    }
    if xi <= T::zero() || xi > T::one() {
        return Err(ModelError::DetectorEfficiencyOutOfRange(
            xi.to_f64().unwrap_or(f64::NAN),
        ));
    }
    let ten = T::from_u32(10).unwrap();
    Ok(ten.powf(-loss_db / ten) * xi)
}

/// Binomial photon deletion at transmittance `eta`:
/// `f_k = sum_(n>=k) p_n C(n,k) eta^k (1-eta)^(n-k)`.
///
/// Total mass is conserved, so the output keeps the input's tail mass and
/// cutoff. Never increases the photon number.
pub fn apply_loss<T: Real>(
    dist: &PhotonNumberDistribution<T>,
    eta: T,
) -> Result<PhotonNumberDistribution<T>> {
    if eta < T::zero() || eta > T::one() || !eta.is_finite() {
        return Err(ModelError::TransmittanceOutOfRange(
            eta.to_f64().unwrap_or(f64::NAN),
        ));
    }
    let survive = eta;
    let lost = T::one() - eta;
    let probs = dist.probs();
    let mut out = vec![T::zero(); probs.len()];
    for (n, &p_n) in probs.iter().enumerate() {
        if p_n == T::zero() {
            continue;
        }
        // C(n,k) eta^k (1-eta)^(n-k), built multiplicatively in k.
        let mut binom = T::one();
        for (k, slot) in out.iter_mut().enumerate().take(n + 1) {
            let weight = binom * survive.powi(k as i32) * lost.powi((n - k) as i32);
            *slot += p_n * weight;
            binom = binom * T::from_usize(n - k).unwrap() / T::from_usize(k + 1).unwrap();
        }
    }
    Ok(PhotonNumberDistribution::from_parts(out, dist.tail_mass()))
}
