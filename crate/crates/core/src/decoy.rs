//! Three-intensity decoy-state analysis: bounds on the single-photon-pair
//! yield and phase error, infinite-decoy reference values, and the final
//! secret key rate.
//!
//! Each user runs three intensities `{0, mu, mu'}` of the same source
//! family. From the nine observed gain/error pairs the single-photon-pair
//! yield `Y11` is bounded from below and the phase-flip error `e11` from
//! above; the key rate combines both with the signal statistics:
//!
//! ```text
//! R = a1' b1' Y11^Z [1 - H(e11^X)] - S^Z_(mu'mu') f_EC H(E^Z_(mu'mu'))
//! ```

use crate::channel::{apply_loss, ChannelParams};
use crate::conditionals::{Basis, ConditionalTable};
use crate::error::{ModelError, Result};
use crate::gains::{basis_statistics_with, BasisStatistics, SourcePairContext};
use crate::sources::{PhotonNumberDistribution, SourceSpec};
use crate::Real;

/// Relative cancellation threshold below which the yield-bound denominator
/// is reported as ill-conditioned instead of divided by.
const DENOMINATOR_GUARD: f64 = 1e-9;

/// One of the three decoy-state intensity settings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntensityLevel {
    Vacuum,
    Decoy,
    Signal,
}

impl IntensityLevel {
    pub const ALL: [IntensityLevel; 3] = [
        IntensityLevel::Vacuum,
        IntensityLevel::Decoy,
        IntensityLevel::Signal,
    ];

    fn index(self) -> usize {
        match self {
            IntensityLevel::Vacuum => 0,
            IntensityLevel::Decoy => 1,
            IntensityLevel::Signal => 2,
        }
    }
}

/// The two users' decoy and signal source states (photon-number
/// distributions before the channel) plus the intensities they stand for.
#[derive(Clone, Debug)]
pub struct ThreeIntensityConfig<T> {
    alice_decoy: PhotonNumberDistribution<T>,
    alice_signal: PhotonNumberDistribution<T>,
    bob_decoy: PhotonNumberDistribution<T>,
    bob_signal: PhotonNumberDistribution<T>,
    mu: T,
    mu_prime: T,
}

impl<T: Real> ThreeIntensityConfig<T> {
    pub fn new(
        alice_decoy: PhotonNumberDistribution<T>,
        alice_signal: PhotonNumberDistribution<T>,
        bob_decoy: PhotonNumberDistribution<T>,
        bob_signal: PhotonNumberDistribution<T>,
        mu: T,
        mu_prime: T,
    ) -> Result<Self> {
        if !(T::zero() < mu && mu < mu_prime) {
            return Err(ModelError::InvalidIntensityOrder {
                mu: mu.to_f64().unwrap_or(f64::NAN),
                mu_prime: mu_prime.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self {
            alice_decoy,
            alice_signal,
            bob_decoy,
            bob_signal,
            mu,
            mu_prime,
        })
    }

    /// Both users drive the same source family at intensities `mu`/`mu'`.
    pub fn from_sources(
        alice: &SourceSpec<T>,
        bob: &SourceSpec<T>,
        mu: T,
        mu_prime: T,
        n_max: usize,
    ) -> Result<Self> {
        Self::new(
            alice.distribution_at(mu, n_max)?,
            alice.distribution_at(mu_prime, n_max)?,
            bob.distribution_at(mu, n_max)?,
            bob.distribution_at(mu_prime, n_max)?,
            mu,
            mu_prime,
        )
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn mu_prime(&self) -> T {
        self.mu_prime
    }

    pub fn alice_source(&self, level: IntensityLevel) -> PhotonNumberDistribution<T> {
        match level {
            IntensityLevel::Vacuum => PhotonNumberDistribution::vacuum(),
            IntensityLevel::Decoy => self.alice_decoy.clone(),
            IntensityLevel::Signal => self.alice_signal.clone(),
        }
    }

    pub fn bob_source(&self, level: IntensityLevel) -> PhotonNumberDistribution<T> {
        match level {
            IntensityLevel::Vacuum => PhotonNumberDistribution::vacuum(),
            IntensityLevel::Decoy => self.bob_decoy.clone(),
            IntensityLevel::Signal => self.bob_signal.clone(),
        }
    }

    /// Alice's decoy-state photon-number coefficient `a_k`.
    pub fn a(&self, k: usize) -> T {
        self.alice_decoy.prob(k)
    }

    /// Alice's signal-state coefficient `a_k'`.
    pub fn a_prime(&self, k: usize) -> T {
        self.alice_signal.prob(k)
    }

    /// Bob's decoy-state coefficient `b_k`.
    pub fn b(&self, k: usize) -> T {
        self.bob_decoy.prob(k)
    }

    /// Bob's signal-state coefficient `b_k'`.
    pub fn b_prime(&self, k: usize) -> T {
        self.bob_signal.prob(k)
    }

    /// Largest photon-number cutoff across the four source states.
    pub fn max_cutoff(&self) -> usize {
        self.alice_decoy
            .cutoff()
            .max(self.alice_signal.cutoff())
            .max(self.bob_decoy.cutoff())
            .max(self.bob_signal.cutoff())
    }
}

/// Gain and error statistics of one intensity pair, both bases.
#[derive(Clone, Copy, Debug)]
pub struct PairStatistics<T> {
    pub z: BasisStatistics<T>,
    pub x: BasisStatistics<T>,
}

/// The nine observable intensity pairs `(x, y)` with `x, y` in `{0, mu, mu'}`.
#[derive(Clone, Debug)]
pub struct GainTable<T> {
    entries: Vec<PairStatistics<T>>,
}

impl<T: Real> GainTable<T> {
    pub fn entry(&self, alice: IntensityLevel, bob: IntensityLevel) -> &PairStatistics<T> {
        &self.entries[alice.index() * 3 + bob.index()]
    }

    pub fn basis(
        &self,
        alice: IntensityLevel,
        bob: IntensityLevel,
        basis: Basis,
    ) -> &BasisStatistics<T> {
        let entry = self.entry(alice, bob);
        match basis {
            Basis::Z => &entry.z,
            Basis::X => &entry.x,
        }
    }
}

/// Evaluates all nine intensity pairs through the channel. The kernel must
/// cover the sources' photon-number cutoffs at the requested dark rate.
pub fn build_gain_table<T: Real>(
    cfg: &ThreeIntensityConfig<T>,
    channel: &ChannelParams<T>,
    dark_rate: T,
    misalignment: T,
    kernel: &ConditionalTable<T>,
) -> Result<GainTable<T>> {
    let eta_a = channel.eta_a();
    let eta_b = channel.eta_b();
    let alice: Vec<_> = IntensityLevel::ALL
        .iter()
        .map(|&lv| apply_loss(&cfg.alice_source(lv), eta_a))
        .collect::<Result<_>>()?;
    let bob: Vec<_> = IntensityLevel::ALL
        .iter()
        .map(|&lv| apply_loss(&cfg.bob_source(lv), eta_b))
        .collect::<Result<_>>()?;
    let mut entries = Vec::with_capacity(9);
    for dist_a in &alice {
        for dist_b in &bob {
            let ctx =
                SourcePairContext::new(dist_a.clone(), dist_b.clone(), dark_rate, misalignment)?;
            entries.push(PairStatistics {
                z: basis_statistics_with(&ctx, kernel, Basis::Z)?,
                x: basis_statistics_with(&ctx, kernel, Basis::X)?,
            });
        }
    }
    Ok(GainTable { entries })
}

/// Vacuum-component contamination of the decoy-decoy gain:
/// `S~0 = a0 S_(0,mu) + b0 S_(mu,0) - a0 b0 S_(0,0)`.
fn vacuum_contribution<T: Real>(
    table: &GainTable<T>,
    basis: Basis,
    a0: T,
    b0: T,
    level: IntensityLevel,
) -> T {
    use IntensityLevel::Vacuum;
    let s_0y = table.basis(Vacuum, level, basis).gain;
    let s_x0 = table.basis(level, Vacuum, basis).gain;
    let s_00 = table.basis(Vacuum, Vacuum, basis).gain;
    a0 * s_0y + b0 * s_x0 - a0 * b0 * s_00
}

/// Lower bound on the single-photon-pair yield from the three-intensity
/// observables, clamped below at zero:
///
/// ```text
/// Y11 >= [a1' b2' (S_(mu,mu) - S~0) - a1 b2 (S_(mu',mu') - S~0')]
///        / [a1' a1 (b2' b1 - b2 b1')]
/// ```
///
/// Errors when the denominator vanishes, cancels catastrophically or comes
/// out non-positive (the bound's validity condition).
pub fn y11_lower_bound<T: Real>(
    table: &GainTable<T>,
    cfg: &ThreeIntensityConfig<T>,
    basis: Basis,
) -> Result<T> {
    use IntensityLevel::{Decoy, Signal};
    let (a1, b1, b2) = (cfg.a(1), cfg.b(1), cfg.b(2));
    let (a1p, b1p, b2p) = (cfg.a_prime(1), cfg.b_prime(1), cfg.b_prime(2));
    let cross = b2p * b1 - b2 * b1p;
    let guard = T::from_f64(DENOMINATOR_GUARD).unwrap() * (b2p * b1 + b2 * b1p);
    let denominator = a1p * a1 * cross;
    if denominator <= T::zero() || cross.abs() <= guard {
        return Err(ModelError::IllConditionedDecoy {
            denominator: denominator.to_f64().unwrap_or(f64::NAN),
        });
    }
    let s_mu = table.basis(Decoy, Decoy, basis).gain
        - vacuum_contribution(table, basis, cfg.a(0), cfg.b(0), Decoy);
    let s_mu_prime = table.basis(Signal, Signal, basis).gain
        - vacuum_contribution(table, basis, cfg.a_prime(0), cfg.b_prime(0), Signal);
    let raw = (a1p * b2p * s_mu - a1 * b2 * s_mu_prime) / denominator;
    Ok(raw.max(T::zero()))
}

/// Upper bound on the single-photon-pair phase-flip error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct E11Bound<T> {
    /// The bound, clamped into `[0, 1]`.
    pub value: T,
    /// Set when the raw bound exceeded one before clamping.
    pub overflow: bool,
    /// Diagnostic: the plain four-term error-gain combination divided by
    /// `Y11` alone, without the vacuum weights or the `a1 b1` factor.
    pub as_printed: T,
}

/// X-basis phase-error bound. Subtracting the vacuum-component error mass
/// (weighted by the vacuum coefficients, exactly as in the yield bound)
/// leaves the strictly-multiphoton error gain, which dominates the
/// single-photon-pair share:
///
/// ```text
/// e11 <= [W_(mu,mu) - a0 W_(0,mu) - b0 W_(mu,0) + a0 b0 W_(0,0)]
///        / (a1 b1 Y11^(X,L)),     W_(x,y) = E^X_(x,y) S^X_(x,y)
/// ```
///
/// The unweighted combination `W_mumu - W_mu0 - W_0mu + W_00` over-subtracts
/// single-sided error mass and can dip below the true `e11`; it is kept in
/// [`E11Bound::as_printed`] as a diagnostic only.
pub fn e11_upper_bound<T: Real>(
    table: &GainTable<T>,
    cfg: &ThreeIntensityConfig<T>,
    y11_lower_x: T,
) -> Result<E11Bound<T>> {
    use IntensityLevel::{Decoy, Vacuum};
    if y11_lower_x <= T::zero() {
        return Err(ModelError::UndefinedBound(
            y11_lower_x.to_f64().unwrap_or(f64::NAN),
        ));
    }
    let w = |a: IntensityLevel, b: IntensityLevel| table.basis(a, b, Basis::X).adjusted_error_gain;
    let (a0, b0) = (cfg.a(0), cfg.b(0));
    let numerator = w(Decoy, Decoy) - a0 * w(Vacuum, Decoy) - b0 * w(Decoy, Vacuum)
        + a0 * b0 * w(Vacuum, Vacuum);
    let plain = w(Decoy, Decoy) - w(Decoy, Vacuum) - w(Vacuum, Decoy) + w(Vacuum, Vacuum);
    let raw = numerator / (cfg.a(1) * cfg.b(1) * y11_lower_x);
    Ok(E11Bound {
        value: raw.min(T::one()).max(T::zero()),
        overflow: raw > T::one(),
        as_printed: plain / y11_lower_x,
    })
}

/// Infinite-decoy reference: yield and adjusted error rate of an exact
/// single-photon pair sent through the channel. The error is `None` only in
/// the fully dark, fully lossy corner where no event can occur.
pub fn true_single_pair_values<T: Real>(
    channel: &ChannelParams<T>,
    dark_rate: T,
    misalignment: T,
    basis: Basis,
) -> Result<(T, Option<T>)> {
    let single = PhotonNumberDistribution::fock(1);
    let dist_a = apply_loss(&single, channel.eta_a())?;
    let dist_b = apply_loss(&single, channel.eta_b())?;
    let ctx = SourcePairContext::new(dist_a, dist_b, dark_rate, misalignment)?;
    let kernel = ConditionalTable::new(dark_rate, 1, 1)?;
    let stats = basis_statistics_with(&ctx, &kernel, basis)?;
    Ok((stats.gain, stats.adjusted_error))
}

/// Binary Shannon entropy `H(x) = -x log2 x - (1-x) log2 (1-x)`.
pub fn binary_entropy<T: Real>(x: T) -> Result<T> {
    if x < T::zero() || x > T::one() || !x.is_finite() {
        return Err(ModelError::EntropyDomain(x.to_f64().unwrap_or(f64::NAN)));
    }
    if x == T::zero() || x == T::one() {
        return Ok(T::zero());
    }
    let y = T::one() - x;
    Ok(-(x * x.log2()) - y * y.log2())
}

/// A key rate, clamped at zero with an explicit below-threshold flag.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KeyRate<T> {
    pub rate: T,
    pub below_threshold: bool,
}

/// Secret key rate from single-photon-pair quantities and signal statistics.
///
/// The privacy-amplification factor `1 - H(e11)` is taken as zero once
/// `e11 >= 1/2`: beyond that the single-photon bits carry no extractable
/// secrecy. Negative rates are reported as zero with the flag set.
pub fn key_rate<T: Real>(
    y11_z: T,
    e11_x: T,
    pair_coeff: T,
    signal_gain_z: T,
    signal_error_z: T,
    f_ec: T,
) -> Result<KeyRate<T>> {
    let half = T::from_f64(0.5).unwrap();
    let privacy = if e11_x >= half {
        T::zero()
    } else {
        T::one() - binary_entropy(e11_x)?
    };
    let correction = signal_gain_z * f_ec * binary_entropy(signal_error_z)?;
    let raw = pair_coeff * y11_z * privacy - correction;
    Ok(KeyRate {
        rate: raw.max(T::zero()),
        below_threshold: raw <= T::zero(),
    })
}

/// Key rate of the three-intensity protocol given its bounds.
pub fn three_intensity_key_rate<T: Real>(
    table: &GainTable<T>,
    cfg: &ThreeIntensityConfig<T>,
    y11_z_lower: T,
    e11_x_upper: T,
    f_ec: T,
) -> Result<KeyRate<T>> {
    let signal = table.basis(IntensityLevel::Signal, IntensityLevel::Signal, Basis::Z);
    let signal_error = signal
        .adjusted_error
        .ok_or(ModelError::UndefinedErrorRate)?;
    key_rate(
        y11_z_lower,
        e11_x_upper,
        cfg.a_prime(1) * cfg.b_prime(1),
        signal.gain,
        signal_error,
        f_ec,
    )
}

/// Outcome of the signal-intensity grid search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MuPrimeChoice<T> {
    pub mu_prime: T,
    pub rate: KeyRate<T>,
    /// Set when every candidate came out below threshold; `mu_prime` is then
    /// the grid minimum.
    pub all_zero: bool,
}

/// Scans an ascending `mu'` grid and returns the rate-maximizing point, ties
/// broken toward the smaller intensity.
pub fn optimize_mu_prime<T, F>(mu: T, grid: &[T], mut rate_at: F) -> Result<MuPrimeChoice<T>>
where
    T: Real,
    F: FnMut(T) -> Result<KeyRate<T>>,
{
    if grid.is_empty() {
        return Err(ModelError::EmptyGrid);
    }
    if grid[0] <= mu {
        return Err(ModelError::InvalidIntensityOrder {
            mu: mu.to_f64().unwrap_or(f64::NAN),
            mu_prime: grid[0].to_f64().unwrap_or(f64::NAN),
        });
    }
    debug_assert!(grid.windows(2).all(|w| w[0] < w[1]), "grid must ascend");
    let mut best: Option<MuPrimeChoice<T>> = None;
    for &mu_prime in grid {
        let rate = rate_at(mu_prime)?;
        let replace = match &best {
            None => true,
            Some(cur) => rate.rate > cur.rate.rate,
        };
        if replace {
            best = Some(MuPrimeChoice {
                mu_prime,
                rate,
                all_zero: false,
            });
        }
    }
    let mut choice = best.expect("grid is non-empty");
    if choice.rate.rate <= T::zero() {
        choice.mu_prime = grid[0];
        choice.all_zero = true;
    }
    Ok(choice)
}

/// Bounds and reference values for one basis at one operating point.
#[derive(Clone, Copy, Debug)]
pub struct DecoyBounds<T> {
    pub basis: Basis,
    pub y11_lower: T,
    pub y11_true: T,
    /// X basis only; the Z statistics never enter the phase-error bound.
    pub e11_upper: Option<E11Bound<T>>,
    pub e11_true: Option<T>,
}

/// Bundles the three-intensity bounds with the infinite-decoy references
/// for one basis. The phase-error fields are populated in the X basis only.
pub fn decoy_bounds<T: Real>(
    table: &GainTable<T>,
    cfg: &ThreeIntensityConfig<T>,
    channel: &ChannelParams<T>,
    dark_rate: T,
    misalignment: T,
    basis: Basis,
) -> Result<DecoyBounds<T>> {
    let (y11_true, e11_true) = true_single_pair_values(channel, dark_rate, misalignment, basis)?;
    let y11_lower = y11_lower_bound(table, cfg, basis)?;
    let e11_upper = match basis {
        Basis::X if y11_lower > T::zero() => Some(e11_upper_bound(table, cfg, y11_lower)?),
        _ => None,
    };
    Ok(DecoyBounds {
        basis,
        y11_lower,
        y11_true,
        e11_upper,
        e11_true: match basis {
            Basis::X => e11_true,
            Basis::Z => None,
        },
    })
}
