use super::AgentError;

/// `G[t] = r[t] + γ·G[t+1]`, computed backward.
pub fn discounted_returns(rewards: &[f64], gamma: f64) -> Vec<f64> {
    let mut out = vec![0.0; rewards.len()];
    let mut running = 0.0;
    for (g, r) in out.iter_mut().zip(rewards).rev() {
        running = r + gamma * running;
        *g = running;
    }
    out
}

/// `A[t] = G[t] - V[t]`.
pub fn raw_advantages(returns: &[f64], values: &[f64]) -> Result<Vec<f64>, AgentError> {
    if returns.len() != values.len() {
        return Err(AgentError::LengthMismatch {
            left: returns.len(),
            right: values.len(),
        });
    }
    Ok(returns.iter().zip(values).map(|(g, v)| g - v).collect())
}

/// Advantages, optionally standardized with the population (1/N) variance.
/// Standardization is skipped for fewer than two entries or variance below
/// 1e-8.
pub fn advantages(returns: &[f64], values: &[f64], normalize: bool) -> Result<Vec<f64>, AgentError> {
    let mut adv = raw_advantages(returns, values)?;
    if normalize && adv.len() >= 2 {
        let n = adv.len() as f64;
        let mean = adv.iter().sum::<f64>() / n;
        let var = adv.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
        if var >= 1e-8 {
            let sd = var.sqrt();
            adv.iter_mut().for_each(|a| *a = (*a - mean) / sd);
        }
    }
    Ok(adv)
}
