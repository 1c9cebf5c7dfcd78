//! Integer thresholds for fractional bounds.
//!
//! Every probability in this crate is an integer count over `M` draws, and
//! every error budget is an integer count of allowed failures. The helpers
//! here convert a fractional bound such as `(1 - alpha) * M` into the matching
//! integer, treating products that land within floating-point noise of an
//! integer as that integer. Without the snap, `0.29 * 100` would floor to 28.

const SNAP_REL: f64 = 1e-9;

fn snapped(frac: f64, n: usize) -> f64 {
    let x = frac * n as f64;
    let r = x.round();
    if (x - r).abs() <= SNAP_REL * r.abs().max(1.0) {
        r
    } else {
        x
    }
}

/// `floor(frac * n)`, clamped to `[0, n]`.
pub fn floor_mul(frac: f64, n: usize) -> usize {
    let v = snapped(frac, n).floor();
    if v <= 0.0 {
        0
    } else {
        (v as usize).min(n)
    }
}

/// Smallest count `c` with `c > frac * n`. May exceed `n`, in which case no
/// count satisfies the bound.
pub fn exceed_count(frac: f64, n: usize) -> usize {
    let v = snapped(frac, n).floor();
    if v < 0.0 {
        0
    } else {
        v as usize + 1
    }
}

/// Smallest count `c` with `c >= frac * n`.
pub fn at_least_count(frac: f64, n: usize) -> usize {
    let v = snapped(frac, n).ceil();
    if v <= 0.0 {
        0
    } else {
        v as usize
    }
}
