//! Scalar update rules of a single koncept: fuzzy membership, activation,
//! stability and the two plasticity rules.

use super::{KebaError, KebaParams};

/// Linear fuzzy membership of a point at distance `d` from the center of an
/// open ball with inner radius `r1` and outer radius `r2`.
pub fn membership(d: f64, r1: f64, r2: f64) -> Result<f64, KebaError> {
    if !(r1 > 0.0 && r1 < r2) {
        return Err(KebaError::InvalidRadii { r1, r2 });
    }
    Ok(membership_unchecked(d, r1, r2))
}

#[inline]
pub(crate) fn membership_unchecked(d: f64, r1: f64, r2: f64) -> f64 {
    if d <= r1 {
        1.0
    } else if d >= r2 {
        0.0
    } else {
        1.0 - (d - r1) / (r2 - r1)
    }
}

/// New activation: a convex combination of the current value and the previous
/// activation, with the previous activation weighted by Aⁿ·ι.
///
/// Written as a step from `a_prev` toward `v` so that `v == a_prev` is an
/// exact fixed point in floating point.
pub fn update_activation(v: f64, a_prev: f64, level: usize, params: &KebaParams) -> f64 {
    let w = params.memory_weight(level);
    (a_prev + (v - a_prev) / (1.0 + w)).clamp(0.0, 1.0)
}

/// Rounding slack below 1 that still counts as fully stable.
const STABLE_SLACK: f64 = 1e-12;

/// Stability rises by κ and falls by the change in activation. Sums that
/// miss 1 only through rounding (ten steps of 0.1, say) are snapped to 1 so
/// that ⌈1/κ⌉ steady ticks always reach full stability.
pub fn update_stability(s_prev: f64, a_t: f64, a_prev: f64, stability_speed: f64) -> f64 {
    let s = s_prev + stability_speed - (a_t - a_prev).abs();
    if s >= 1.0 - STABLE_SLACK {
        1.0
    } else {
        s.max(0.0)
    }
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Moves `center` toward `target` by η·v of the gap.
pub fn adapt_center(center: &mut [f64], target: &[f64], v: f64, center_rate: f64) {
    let step = center_rate * v;
    if step == 0.0 {
        return;
    }
    for (x, a) in center.iter_mut().zip(target) {
        *x = ((1.0 - step) * *x + step * a).clamp(0.0, 1.0);
    }
}

/// Which radius rule fired for a given distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadiusRule {
    ShrinkInner,
    ShrinkOuter,
    GrowInner,
    GrowOuter,
    Unchanged,
}

/// Adjusts the radii of a ball containing a point at distance `d`, then
/// restores `0 < r1 < r2` with `r1 ≥ ζ` and `r2 ≥ r1 + ζ`.
///
/// Callers gate this on the koncept having a positive value and `d` lying
/// above the noise floor.
pub fn adapt_radii(r1: &mut f64, r2: &mut f64, d: f64, radius_rate: f64) -> RadiusRule {
    let (inner, outer) = (*r1, *r2);
    let rule = if d <= inner / 2.0 {
        *r1 -= radius_rate;
        RadiusRule::ShrinkInner
    } else if d <= inner {
        *r2 -= radius_rate;
        RadiusRule::ShrinkOuter
    } else if d <= (inner + outer) / 2.0 {
        *r1 += radius_rate;
        RadiusRule::GrowInner
    } else if d <= outer {
        *r2 += radius_rate;
        RadiusRule::GrowOuter
    } else {
        RadiusRule::Unchanged
    };
    *r1 = r1.max(radius_rate);
    *r2 = r2.max(*r1 + radius_rate);
    rule
}
