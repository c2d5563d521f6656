//! Sampling cross-check of the source -> loss -> mixing pipeline.
//!
//! Photon numbers are drawn from an independently computed Poisson pmf,
//! thinned photon by photon with Bernoulli trials, and the conditional event
//! probability is averaged over the samples. The closed pipeline value must
//! sit inside the Monte-Carlo confidence band.

use mdiqkd::channel::apply_loss;
use mdiqkd::conditionals::{success_event_probability, BeamSplitterInput, Polarization};
use mdiqkd::detector::EventPair;
use mdiqkd::gains::{q_event, SourcePairContext};
use mdiqkd::sources::PhotonNumberDistribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SAMPLES: usize = 10_000_000;

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Direct-series Poisson pmf, independent of the library's recurrence.
fn poisson_pmf(x: f64, n: usize) -> f64 {
    x.powi(n as i32) * (-x).exp() / factorial(n)
}

fn sample_poisson(x: f64, rng: &mut ChaCha8Rng) -> usize {
    let mut u: f64 = rng.random();
    for n in 0..64 {
        let p = poisson_pmf(x, n);
        if u < p {
            return n;
        }
        u -= p;
    }
    64
}

fn thin(n: usize, eta: f64, rng: &mut ChaCha8Rng) -> usize {
    (0..n).filter(|_| rng.random::<f64>() < eta).count()
}

#[test]
fn mixed_source_event_probability_matches_sampling() {
    let (mu_a, mu_b) = (0.4, 0.25);
    let (eta_a, eta_b) = (0.6, 0.45);
    let dark = 0.01;

    let dist_a = apply_loss(&PhotonNumberDistribution::poisson(mu_a, 16).unwrap(), eta_a).unwrap();
    let dist_b = apply_loss(&PhotonNumberDistribution::poisson(mu_b, 16).unwrap(), eta_b).unwrap();
    let ctx = SourcePairContext::new(dist_a, dist_b, dark, 0.0).unwrap();

    let cases = [
        (
            Polarization::H,
            Polarization::V,
            EventPair::new(1, 2).unwrap(),
        ),
        (
            Polarization::Plus,
            Polarization::Plus,
            EventPair::new(1, 4).unwrap(),
        ),
        (
            Polarization::H,
            Polarization::H,
            EventPair::new(2, 3).unwrap(),
        ),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for (alpha, beta, event) in cases {
        let closed = q_event(&ctx, alpha, beta, event).unwrap();
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..SAMPLES {
            let k1 = thin(sample_poisson(mu_a, &mut rng), eta_a, &mut rng);
            let k2 = thin(sample_poisson(mu_b, &mut rng), eta_b, &mut rng);
            let p =
                success_event_probability(event, BeamSplitterInput::new(k1, k2, alpha, beta), dark)
                    .unwrap();
            sum += p;
            sum_sq += p * p;
        }
        let mean = sum / SAMPLES as f64;
        let var = (sum_sq / SAMPLES as f64 - mean * mean).max(0.0);
        let sigma = (var / SAMPLES as f64).sqrt();
        assert!(
            (closed - mean).abs() <= 3.0 * sigma + 1e-12,
            "({alpha:?},{beta:?}) {event}: closed {closed} vs MC {mean} +- {sigma}"
        );
    }
}
