//! Convergence diagnostics.

/// Split-chain potential scale reduction of one scalar.
///
/// Every chain is truncated to the shortest length and cut into two halves
/// (the middle draw of an odd length is dropped). Returns `NaN` when the
/// halves hold fewer than two draws, and `1` for a constant quantity.
pub fn split_rhat(chains: &[&[f64]]) -> f64 {
    let len = chains.iter().map(|c| c.len()).min().unwrap_or(0);
    let n = len / 2;
    if chains.is_empty() || n < 2 {
        return f64::NAN;
    }
    let mut halves: Vec<&[f64]> = Vec::with_capacity(2 * chains.len());
    for c in chains {
        halves.push(&c[..n]);
        halves.push(&c[len - n..len]);
    }
    let m = halves.len() as f64;
    let nf = n as f64;
    let means: Vec<f64> = halves.iter().map(|h| h.iter().sum::<f64>() / nf).collect();
    let grand = means.iter().sum::<f64>() / m;
    let between = nf / (m - 1.0) * means.iter().map(|x| (x - grand).powi(2)).sum::<f64>();
    let within = halves
        .iter()
        .zip(&means)
        .map(|(h, mean)| h.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0))
        .sum::<f64>()
        / m;
    if within <= 0.0 {
        return if between <= 0.0 { 1.0 } else { f64::INFINITY };
    }
    let pooled = (nf - 1.0) / nf * within + between / nf;
    (pooled / within).sqrt()
}
