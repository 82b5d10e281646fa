use super::NeuralError;

/// Numerically stable softmax (max subtracted before exponentiating).
pub fn softmax(logits: &[f64]) -> Result<Vec<f64>, NeuralError> {
    if logits.is_empty() {
        return Err(NeuralError::EmptyInput);
    }
    masked_softmax(logits, &vec![true; logits.len()])
}

/// Softmax restricted to `mask`; masked-out entries are exactly zero and
/// their logits are never read.
pub fn masked_softmax(logits: &[f64], mask: &[bool]) -> Result<Vec<f64>, NeuralError> {
    super::shape_check("mask", logits.len(), mask.len())?;
    let mut max = f64::NEG_INFINITY;
    for (i, (&z, &m)) in logits.iter().zip(mask).enumerate() {
        if !m {
            continue;
        }
        if !z.is_finite() {
            return Err(NeuralError::NonFinite {
                tensor: "logits".into(),
                index: i,
            });
        }
        max = max.max(z);
    }
    if max == f64::NEG_INFINITY {
        return Err(NeuralError::EmptyMask);
    }
    let mut probs: Vec<f64> = logits
        .iter()
        .zip(mask)
        .map(|(&z, &m)| if m { (z - max).exp() } else { 0.0 })
        .collect();
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    Ok(probs)
}

/// Shannon entropy in nats; zero-probability entries contribute nothing.
pub fn entropy(probs: &[f64]) -> f64 {
    -probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}
