use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Gradients, NeuralError, ParameterSet};

/// Smallest subset size checked when a network has more coordinates.
pub const MIN_COORDINATES: usize = 200;
const SELECTION_SEED: u64 = 0x6772_6164;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheck {
    pub max_rel_error: f64,
    pub coordinates: usize,
    /// Tensor and flat index of the worst coordinate.
    pub worst: Option<(String, usize)>,
}

/// Compares the analytic gradient returned by `loss` with central finite
/// differences.
///
/// Checks every coordinate when there are at most `max(limit, 200)` of them,
/// otherwise a fixed pseudo-random subset of that size. The relative error
/// per coordinate is `|a - n| / max(1e-8, |a| + |n|)`.
pub fn grad_check<F>(params: &ParameterSet, eps: f64, limit: usize, loss: F) -> Result<GradCheck, NeuralError>
where
    F: Fn(&ParameterSet) -> Result<(f64, Gradients), NeuralError>,
{
    if !(eps > 0.0) {
        return Err(NeuralError::InvalidHyperparameter("eps"));
    }
    let (first, grads) = loss(params)?;
    let (second, grads_again) = loss(params)?;
    if first.to_bits() != second.to_bits() || grads != grads_again {
        return Err(NeuralError::NonDeterministic { first, second });
    }

    let coords: Vec<(&String, usize)> = params
        .tensors
        .iter()
        .flat_map(|(name, t)| (0..t.len()).map(move |i| (name, i)))
        .collect();
    let limit = limit.max(MIN_COORDINATES);
    let selected: Vec<usize> = if coords.len() <= limit {
        (0..coords.len()).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(SELECTION_SEED);
        let mut picked = rand::seq::index::sample(&mut rng, coords.len(), limit).into_vec();
        picked.sort_unstable();
        picked
    };

    let mut probe = params.clone();
    let mut report = GradCheck {
        max_rel_error: 0.0,
        coordinates: selected.len(),
        worst: None,
    };
    for &c in &selected {
        let (name, i) = coords[c];
        let original = params.tensors[name].values[i];
        probe.tensors.get_mut(name).unwrap().values[i] = original + eps;
        let (plus, _) = loss(&probe)?;
        probe.tensors.get_mut(name).unwrap().values[i] = original - eps;
        let (minus, _) = loss(&probe)?;
        probe.tensors.get_mut(name).unwrap().values[i] = original;

        let numeric = (plus - minus) / (2.0 * eps);
        let analytic = grads.get(name).map_or(0.0, |g| g.values[i]);
        let rel = (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(1e-8);
        if !rel.is_finite() {
            return Err(NeuralError::NonFinite {
                tensor: name.clone(),
                index: i,
            });
        }
        if report.worst.is_none() || rel > report.max_rel_error {
            report.max_rel_error = rel;
            report.worst = Some((name.clone(), i));
        }
    }
    Ok(report)
}
