use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use textrl::agent::ReplayBuffer;
use textrl::textproc::FeatureVector;
use textrl::worldmodel::Transition;

fn buffer(priorities: &[f64], alpha: f64) -> ReplayBuffer {
    let mut b = ReplayBuffer::new(16, alpha);
    for i in 0..priorities.len() {
        b.push(Transition {
            features: FeatureVector(vec![i as f64]),
            action: 0,
            reward: 0.0,
            next_features: FeatureVector(vec![0.0]),
            done: false,
            priority: 0.0,
        });
    }
    let slots: Vec<usize> = (0..priorities.len()).collect();
    b.set_priorities(&slots, priorities);
    b
}

/// Counts per slot over `draws` single draws, and the chi-square p-value
/// against the buffer's stated probabilities.
fn draw(b: &ReplayBuffer, draws: usize, seed: u64) -> (Vec<f64>, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0usize; b.len()];
    for _ in 0..draws {
        counts[b.sample(1, &mut rng).unwrap()[0]] += 1;
    }
    let probs = b.probabilities();
    let stat: f64 = counts
        .iter()
        .zip(&probs)
        .map(|(&c, &p)| {
            let e = p * draws as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    let p_value = 1.0 - ChiSquared::new((b.len() - 1) as f64).unwrap().cdf(stat);
    (counts.iter().map(|&c| c as f64 / draws as f64).collect(), p_value)
}

#[test]
fn proportional_sampling_matches_priorities() {
    let (freq, p) = draw(&buffer(&[1.0, 3.0], 1.0), 200_000, 1);
    assert!((freq[0] - 0.25).abs() < 0.01 && (freq[1] - 0.75).abs() < 0.01);
    assert!(p > 0.01, "p = {p}");
}

#[test]
fn alpha_zero_and_equal_priorities_are_uniform() {
    let (freq, _) = draw(&buffer(&[1.0, 3.0], 0.0), 100_000, 2);
    assert!((freq[0] - 0.5).abs() < 0.01);
    let (freq, p) = draw(&buffer(&[2.0, 2.0, 2.0, 2.0], 0.6), 100_000, 3);
    assert!(freq.iter().all(|f| (f - 0.25).abs() < 0.01));
    assert!(p > 0.01);
}

#[test]
fn skewed_alpha_matches_closed_form() {
    let b = buffer(&[0.5, 1.0, 4.0], 0.6);
    let w: Vec<f64> = [0.5f64, 1.0, 4.0].iter().map(|p| p.powf(0.6)).collect();
    let total: f64 = w.iter().sum();
    for (p, wi) in b.probabilities().iter().zip(&w) {
        assert!((p - wi / total).abs() < 1e-15);
    }
    let (_, p) = draw(&b, 100_000, 4);
    assert!(p > 0.01);
}
