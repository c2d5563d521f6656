//! Truncated photon-number distributions for every pulse source family.
//!
//! Every source here is diagonal in the Fock basis, so a pulse is fully
//! described by its photon-number probabilities `p_0..p_N` plus the residual
//! mass beyond the cutoff. Constructors raise the cutoff automatically until
//! the tail drops below [`DEFAULT_TAIL_TOLERANCE`], up to [`MAX_CUTOFF`].

use crate::error::{ModelError, Result};
use crate::Real;

/// Residual mass a constructor is allowed to leave beyond the cutoff.
///
/// Stated for `f64`; for wider-epsilon scalars the effective tolerance is
/// relaxed to `64 * epsilon` so constructors stay usable in `f32`.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-10;

/// Hard ceiling for the automatic cutoff raise.
pub const MAX_CUTOFF: usize = 64;

/// Default photon-number cutoff. Intensities of order one decay factorially,
/// so twelve terms already leave a tail far below the tolerance.
pub const DEFAULT_CUTOFF: usize = 12;

fn tail_tolerance<T: Real>() -> T {
    let stated = T::from_f64(DEFAULT_TAIL_TOLERANCE).unwrap_or_else(T::epsilon);
    let floor = T::epsilon() * T::from_u32(64).unwrap();
    stated.max(floor)
}

/// Photon-number statistics of one pulse, truncated at a finite cutoff.
#[derive(Clone, Debug, PartialEq)]
pub struct PhotonNumberDistribution<T> {
    probs: Vec<T>,
    tail_mass: T,
}

impl<T: Real> PhotonNumberDistribution<T> {
    /// The vacuum pulse: exactly zero photons.
    pub fn vacuum() -> Self {
        Self {
            probs: vec![T::one()],
            tail_mass: T::zero(),
        }
    }

    /// A number state: exactly `n` photons.
    pub fn fock(n: usize) -> Self {
        let mut probs = vec![T::zero(); n + 1];
        probs[n] = T::one();
        Self {
            probs,
            tail_mass: T::zero(),
        }
    }

    /// Poissonian statistics of mean `x`, `p_n = x^n e^{-x} / n!`.
    pub fn poisson(x: T, n_max: usize) -> Result<Self> {
        check_intensity(x)?;
        let mut term = T::zero();
        Self::from_term_series(n_max, T::one(), move |n| {
            if n == 0 {
                term = (-x).exp();
            } else {
                term = term * x / T::from_usize(n).unwrap();
            }
            term
        })
    }

    /// Sub-Poissonian heralded source: with correlation `p_cor` the trigger
    /// guarantees one extra photon on top of a Poissonian background, and the
    /// trigger dark rate `d_i` re-admits vacuum:
    ///
    /// ```text
    /// p_0     = p_cor d_i + (1 - p_cor) e^{-x}
    /// p_(n>0) = p_cor e^{-x} x^(n-1)/(n-1)! + (1 - p_cor) e^{-x} x^n/n!
    /// ```
    ///
    /// The raw masses add to `1 + p_cor d_i`; the distribution is normalized
    /// to unit trace by that analytic total.
    pub fn sub_poissonian_hsps(x: T, p_cor: T, d_i: T, n_max: usize) -> Result<Self> {
        check_intensity(x)?;
        check_probability("correlation", p_cor)?;
        check_probability("trigger dark rate", d_i)?;
        let total_mass = T::one() + p_cor * d_i;
        let mut poisson_prev = T::zero(); // x^{n-1} e^{-x} / (n-1)!
        Self::from_term_series(n_max, total_mass, move |n| {
            if n == 0 {
                poisson_prev = (-x).exp();
                p_cor * d_i + (T::one() - p_cor) * poisson_prev
            } else {
                let poisson_cur = poisson_prev * x / T::from_usize(n).unwrap();
                let term = p_cor * poisson_prev + (T::one() - p_cor) * poisson_cur;
                poisson_prev = poisson_cur;
                term
            }
        })
    }

    /// Poissonian pump post-selected on a trigger click of efficiency `eta_t`
    /// and dark rate `d_t`:
    ///
    /// ```text
    /// p_n ∝ (x^n e^{-x}/n!) (1 - (1 - eta_t)^n (1 - d_t))
    /// ```
    ///
    /// normalized by the analytic click probability `1 - (1 - d_t) e^{-x eta_t}`.
    pub fn heralded_poisson(x: T, eta_t: T, d_t: T, n_max: usize) -> Result<Self> {
        check_intensity(x)?;
        check_probability("trigger efficiency", eta_t)?;
        check_probability("trigger dark rate", d_t)?;
        let click_mass = T::one() - (T::one() - d_t) * (-x * eta_t).exp();
        if click_mass <= T::zero() {
            return Err(ModelError::DegenerateSource);
        }
        let no_click = T::one() - eta_t;
        let mut poisson = T::zero();
        Self::from_term_series(n_max, click_mass, move |n| {
            if n == 0 {
                poisson = (-x).exp();
            } else {
                poisson = poisson * x / T::from_usize(n).unwrap();
            }
            poisson * (T::one() - no_click.powi(n as i32) * (T::one() - d_t))
        })
    }

    /// Builds a distribution from raw term weights `term(0), term(1), ...`
    /// divided by the analytic `total_mass`, raising the cutoff beyond
    /// `n_max` until the tail tolerance is met.
    ///
    /// `term` is called with strictly increasing `n`, so it may carry
    /// recurrence state.
    fn from_term_series(
        n_max: usize,
        total_mass: T,
        mut term: impl FnMut(usize) -> T,
    ) -> Result<Self> {
        let tol = tail_tolerance::<T>();
        let mut probs = Vec::with_capacity(n_max + 1);
        let mut sum = T::zero();
        let mut cutoff = n_max.min(MAX_CUTOFF);
        let mut n = 0;
        loop {
            while n <= cutoff {
                let p = term(n) / total_mass;
                debug_assert!(p >= T::zero(), "negative photon-number weight at n = {n}");
                probs.push(p);
                sum += p;
                n += 1;
            }
            let tail = (T::one() - sum).max(T::zero());
            if tail <= tol {
                return Ok(Self {
                    probs,
                    tail_mass: tail,
                });
            }
            if cutoff >= MAX_CUTOFF {
                return Err(ModelError::TailToleranceExceeded {
                    tail: tail.to_f64().unwrap_or(f64::NAN),
                    tolerance: tol.to_f64().unwrap_or(f64::NAN),
                });
            }
            cutoff += 1;
        }
    }

    /// Internal constructor for already-valid parts (loss transform output).
    pub(crate) fn from_parts(probs: Vec<T>, tail_mass: T) -> Self {
        debug_assert!(!probs.is_empty());
        Self { probs, tail_mass }
    }

    /// Probabilities `p_0..p_cutoff`.
    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    /// `p_n`, zero beyond the cutoff.
    pub fn prob(&self, n: usize) -> T {
        self.probs.get(n).copied().unwrap_or_else(T::zero)
    }

    /// Largest photon number carried explicitly.
    pub fn cutoff(&self) -> usize {
        self.probs.len() - 1
    }

    /// Residual probability beyond the cutoff.
    pub fn tail_mass(&self) -> T {
        self.tail_mass
    }

    /// Mean photon number of the truncated part.
    pub fn mean(&self) -> T {
        self.probs
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (n, &p)| {
                acc + T::from_usize(n).unwrap() * p
            })
    }
}

fn check_intensity<T: Real>(x: T) -> Result<()> {
    if x < T::zero() || !x.is_finite() {
        return Err(ModelError::NegativeIntensity(
            x.to_f64().unwrap_or(f64::NAN),
        ));
    }
    Ok(())
}

pub(crate) fn check_probability<T: Real>(name: &'static str, value: T) -> Result<()> {
    if value < T::zero() || value > T::one() || !value.is_finite() {
        return Err(ModelError::ProbabilityOutOfRange {
            name,
            value: value.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

/// The source families the simulator knows how to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourceFamily {
    Vacuum,
    WeakCoherent,
    PoissonianHsps,
    SubPoissonianHsps,
}

/// One user's source: a family plus the parameters it needs. Families ignore
/// the parameters they do not use.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SourceSpec<T> {
    pub family: SourceFamily,
    /// Mean photon number of the pump or coherent field.
    pub intensity: T,
    /// Trigger detector efficiency (heralded families).
    pub trigger_efficiency: T,
    /// Trigger detector dark rate (heralded families).
    pub trigger_dark: T,
    /// Photon-pair correlation (sub-Poissonian family only).
    pub correlation: T,
}

impl<T: Real> SourceSpec<T> {
    pub fn validate(&self) -> Result<()> {
        check_intensity(self.intensity)?;
        check_probability("trigger efficiency", self.trigger_efficiency)?;
        check_probability("trigger dark rate", self.trigger_dark)?;
        check_probability("correlation", self.correlation)?;
        Ok(())
    }

    /// The photon-number distribution at this spec's own intensity.
    pub fn distribution(&self, n_max: usize) -> Result<PhotonNumberDistribution<T>> {
        self.distribution_at(self.intensity, n_max)
    }

    /// The distribution of the same source driven at a different intensity,
    /// as used by the decoy-state intensity levels.
    pub fn distribution_at(&self, x: T, n_max: usize) -> Result<PhotonNumberDistribution<T>> {
        self.validate()?;
        match self.family {
            SourceFamily::Vacuum => Ok(PhotonNumberDistribution::vacuum()),
            SourceFamily::WeakCoherent => PhotonNumberDistribution::poisson(x, n_max),
            SourceFamily::PoissonianHsps => PhotonNumberDistribution::heralded_poisson(
                x,
                self.trigger_efficiency,
                self.trigger_dark,
                n_max,
            ),
            SourceFamily::SubPoissonianHsps => PhotonNumberDistribution::sub_poissonian_hsps(
                x,
                self.correlation,
                self.trigger_dark,
                n_max,
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type Dist = PhotonNumberDistribution<f64>;

    fn factorial(n: usize) -> f64 {
        (1..=n).fold(1.0, |acc, k| acc * k as f64)
    }

    /// Independent route: direct power-series term, no recurrence.
    fn poisson_pmf(x: f64, n: usize) -> f64 {
        x.powi(n as i32) * (-x).exp() / factorial(n)
    }

    fn assert_unit_mass(d: &Dist) {
        let total: f64 = d.probs().iter().sum::<f64>() + d.tail_mass();
        assert!(
            (total - 1.0).abs() < 1e-12,
            "mass {total} not within 1e-12 of 1"
        );
        assert!(d.probs().iter().all(|&p| p >= 0.0));
        assert!(d.tail_mass() <= 1e-10 + 1e-15);
    }

    #[test]
    fn vacuum_is_a_point_mass() {
        let d = Dist::vacuum();
        assert_eq!(d.probs(), &[1.0]);
        assert_eq!(d.tail_mass(), 0.0);
    }

    #[test]
    fn poisson_at_zero_intensity_is_vacuum() {
        let d = Dist::poisson(0.0, 5).unwrap();
        assert_eq!(d.prob(0), 1.0);
        for n in 1..=5 {
            assert_eq!(d.prob(n), 0.0);
        }
    }

    #[test]
    fn poisson_small_intensity_matches_series() {
        let d = Dist::poisson(0.05, 10).unwrap();
        // Frozen from the direct series: e^{-0.05} and 0.05 e^{-0.05}.
        assert!((d.prob(0) - 0.951229424500714).abs() < 1e-12);
        assert!((d.prob(1) - 0.047561471225036).abs() < 1e-12);
        // Cumulative-sum oracle across the whole support.
        let mut cumulative = 0.0;
        for n in 0..=10 {
            assert!((d.prob(n) - poisson_pmf(0.05, n)).abs() < 1e-14);
            cumulative += poisson_pmf(0.05, n);
        }
        assert!((d.probs().iter().sum::<f64>() - cumulative).abs() < 1e-14);
    }

    #[test]
    fn poisson_mass_closes_to_one() {
        let d = Dist::poisson(0.5, 10).unwrap();
        assert_unit_mass(&d);
    }

    #[test]
    fn poisson_rejects_negative_intensity() {
        assert!(matches!(
            Dist::poisson(-0.1, 10),
            Err(ModelError::NegativeIntensity(_))
        ));
    }

    #[test]
    fn poisson_raises_cutoff_until_tail_fits() {
        // x = 4 leaves ~37% of the mass beyond n = 3; the constructor must
        // keep extending the support rather than fail.
        let d = Dist::poisson(4.0, 3).unwrap();
        assert!(d.cutoff() > 3);
        assert_unit_mass(&d);
    }

    #[test]
    fn sub_poissonian_collapses_to_poisson_without_correlation() {
        let d = Dist::sub_poissonian_hsps(0.1, 0.0, 1e-6, 10).unwrap();
        let p = Dist::poisson(0.1, 10).unwrap();
        for n in 0..=10 {
            assert!((d.prob(n) - p.prob(n)).abs() < 1e-10);
        }
    }

    #[test]
    fn sub_poissonian_perfect_correlation_is_shifted_poisson() {
        let d = Dist::sub_poissonian_hsps(0.1, 1.0, 0.0, 12).unwrap();
        assert_eq!(d.prob(0), 0.0);
        for n in 1..=12 {
            assert!((d.prob(n) - poisson_pmf(0.1, n - 1)).abs() < 1e-14);
        }
        // Shifted Poisson: mean is x + 1 by direct moment sum.
        assert!((d.mean() - 1.1).abs() < 1e-12);
    }

    #[test]
    fn sub_poissonian_vacuum_weight_two_routes_agree() {
        let (x, p_cor, d_i) = (0.1, 0.8, 1e-6);
        let d = Dist::sub_poissonian_hsps(x, p_cor, d_i, 20).unwrap();
        // Oracle: sum every raw term of the density operator, then divide the
        // vacuum term by that total mass.
        let raw0 = p_cor * d_i + (1.0 - p_cor) * (-x).exp();
        let mut total = raw0;
        for n in 1..=60 {
            total += p_cor * poisson_pmf(x, n - 1) + (1.0 - p_cor) * poisson_pmf(x, n);
        }
        assert!((d.prob(0) - raw0 / total).abs() < 1e-12);
    }

    #[test]
    fn heralded_perfect_trigger_removes_vacuum() {
        let d = Dist::heralded_poisson(0.1, 1.0, 0.0, 10).unwrap();
        assert_eq!(d.prob(0), 0.0);
        let norm = 1.0 - (-0.1f64).exp();
        for n in 1..=10 {
            assert!((d.prob(n) - poisson_pmf(0.1, n) / norm).abs() < 1e-14);
        }
    }

    #[test]
    fn heralded_always_dark_trigger_is_plain_poisson() {
        let d = Dist::heralded_poisson(0.1, 0.0, 1.0, 10).unwrap();
        let p = Dist::poisson(0.1, 10).unwrap();
        for n in 0..=10 {
            assert!((d.prob(n) - p.prob(n)).abs() < 1e-14);
        }
    }

    #[test]
    fn heralded_dead_trigger_is_degenerate() {
        assert!(matches!(
            Dist::heralded_poisson(0.1, 0.0, 0.0, 10),
            Err(ModelError::DegenerateSource)
        ));
    }

    #[test]
    fn heralded_ratio_matches_trigger_enumeration() {
        let (x, eta_t, d_t) = (0.1, 0.75, 1e-6);
        let d = Dist::heralded_poisson(x, eta_t, d_t, 12).unwrap();
        assert_unit_mass(&d);
        // Enumerate trigger outcomes photon by photon: j of n partners are
        // seen with binomial weight; the trigger clicks unless j = 0 and no
        // dark count fires.
        let click_given = |n: usize| -> f64 {
            (0..=n)
                .map(|j| {
                    let w = factorial(n) / (factorial(j) * factorial(n - j))
                        * eta_t.powi(j as i32)
                        * (1.0 - eta_t).powi((n - j) as i32);
                    w * if j > 0 { 1.0 } else { d_t }
                })
                .sum()
        };
        let expected_ratio =
            (poisson_pmf(x, 0) * click_given(0)) / (poisson_pmf(x, 1) * click_given(1));
        assert!((d.prob(0) / d.prob(1) - expected_ratio).abs() < 1e-12);
    }

    #[test]
    fn source_spec_dispatches_families() {
        let spec = SourceSpec {
            family: SourceFamily::WeakCoherent,
            intensity: 0.3,
            trigger_efficiency: 0.75,
            trigger_dark: 1e-6,
            correlation: 0.9,
        };
        let d = spec.distribution(DEFAULT_CUTOFF).unwrap();
        let p = Dist::poisson(0.3, DEFAULT_CUTOFF).unwrap();
        assert_eq!(d, p);

        let vac = SourceSpec {
            family: SourceFamily::Vacuum,
            ..spec
        };
        assert_eq!(vac.distribution(DEFAULT_CUTOFF).unwrap(), Dist::vacuum());
    }

    proptest! {
        #[test]
        fn every_family_normalizes(
            x in 0.0..2.0f64,
            p_cor in 0.0..1.0f64,
            eta_t in 0.01..1.0f64,
            d_t in 0.0..0.01f64,
        ) {
            assert_unit_mass(&Dist::poisson(x, DEFAULT_CUTOFF).unwrap());
            assert_unit_mass(&Dist::sub_poissonian_hsps(x, p_cor, d_t, DEFAULT_CUTOFF).unwrap());
            assert_unit_mass(&Dist::heralded_poisson(x, eta_t, d_t, DEFAULT_CUTOFF).unwrap());
        }
    }
}
