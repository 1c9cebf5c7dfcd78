//! Univariate slice sampling with stepping out and shrinkage.

use rand::Rng;

/// One slice-sampling update of `x` under the log density `log_density`.
///
/// Returns the new point and the number of density evaluations.
pub fn slice_step<R: Rng + ?Sized>(
    x: f64,
    log_density: impl Fn(f64) -> f64,
    width: f64,
    max_steps: usize,
    rng: &mut R,
) -> (f64, usize) {
    let mut evals = 1;
    let level = log_density(x) + rng.random::<f64>().ln();

    let mut left = x - width * rng.random::<f64>();
    let mut right = left + width;
    let mut j = (max_steps as f64 * rng.random::<f64>()) as usize;
    let mut k = max_steps.saturating_sub(1) - j.min(max_steps.saturating_sub(1));
    while j > 0 {
        evals += 1;
        if log_density(left) <= level {
            break;
        }
        left -= width;
        j -= 1;
    }
    while k > 0 {
        evals += 1;
        if log_density(right) <= level {
            break;
        }
        right += width;
        k -= 1;
    }

    loop {
        let candidate = left + (right - left) * rng.random::<f64>();
        evals += 1;
        if log_density(candidate) > level {
            return (candidate, evals);
        }
        if candidate < x {
            left = candidate;
        } else {
            right = candidate;
        }
        if right - left < 1e-12 {
            return (x, evals);
        }
    }
}
