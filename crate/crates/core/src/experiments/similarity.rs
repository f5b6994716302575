//! How alike two animats' koncept structures are, level by level.

use std::collections::HashMap;

use crate::engine::{Hierarchy, Koncept, KonceptId, PROTO_COUNT};

pub const DEFAULT_SIMILARITY_TOL: f64 = 0.1;

/// Matched koncepts at one level, as (a, b) id pairs.
type Matching = Vec<(KonceptId, KonceptId)>;

/// Center expressed over a shared coordinate system. `key` maps a parent id
/// to its shared slot; `None` if some parent has no counterpart.
fn aligned(k: &Koncept, key: &HashMap<KonceptId, usize>, dims: usize) -> Option<Vec<f64>> {
    let ball = k.ball.as_ref()?;
    let mut x = vec![0.0; dims];
    for (p, c) in k.parents.iter().zip(&ball.center) {
        x[*key.get(p)?] = *c;
    }
    Some(x)
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Greedy one-to-one matching: closest pairs first, ties by position.
fn match_level(a: &[Koncept], b: &[Koncept], key_a: &HashMap<KonceptId, usize>, key_b: &HashMap<KonceptId, usize>, dims: usize, tol: f64) -> Matching {
    let xa: Vec<_> = a.iter().map(|k| aligned(k, key_a, dims)).collect();
    let xb: Vec<_> = b.iter().map(|k| aligned(k, key_b, dims)).collect();
    let mut pairs = Vec::new();
    for (i, pa) in xa.iter().enumerate() {
        let Some(pa) = pa else { continue };
        for (j, pb) in xb.iter().enumerate() {
            let Some(pb) = pb else { continue };
            let d = distance(pa, pb);
            if d <= tol {
                pairs.push((d, i, j));
            }
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut out = Vec::new();
    for (_, i, j) in pairs {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            out.push((a[i].id, b[j].id));
        }
    }
    out
}

/// Similarity at every level from 1 up to the deeper of the two
/// hierarchies. A level absent from either side scores 0.
pub fn level_similarities(a: &Hierarchy, b: &Hierarchy, tol: f64) -> Vec<f64> {
    let depth = a.levels().len().max(b.levels().len());
    // Level 1 aligns over the protokoncept slots, which both sides share.
    let mut key_a: HashMap<KonceptId, usize> = (0..PROTO_COUNT).map(|i| (KonceptId(i as u32), i)).collect();
    let mut key_b = key_a.clone();
    let mut dims = PROTO_COUNT;
    let mut out = Vec::new();
    for n in 1..depth {
        let (la, lb) = (a.level(n).unwrap_or(&[]), b.level(n).unwrap_or(&[]));
        if la.is_empty() || lb.is_empty() {
            out.push(0.0);
            key_a.clear();
            key_b.clear();
            continue;
        }
        let m = match_level(la, lb, &key_a, &key_b, dims, tol);
        out.push(m.len() as f64 / la.len().max(lb.len()) as f64);
        // Matched pairs become the shared coordinates one level up.
        key_a = m.iter().enumerate().map(|(s, (x, _))| (*x, s)).collect();
        key_b = m.iter().enumerate().map(|(s, (_, y))| (*y, s)).collect();
        dims = m.len();
    }
    out
}

/// Fraction of koncepts at `level` with a counterpart in the other
/// hierarchy whose center lies within `tol`. Level 0 is always 1.
pub fn koncept_similarity(a: &Hierarchy, b: &Hierarchy, level: usize, tol: f64) -> f64 {
    if level == 0 {
        return 1.0;
    }
    if a.level(level).is_none_or(<[_]>::is_empty) || b.level(level).is_none_or(<[_]>::is_empty) {
        tracing::warn!(level, "level missing from a hierarchy; similarity taken as 0");
        return 0.0;
    }
    level_similarities(a, b, tol)[level - 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{KebaParams, Links, OpenBall};
    use crate::rng::RngStream;

    fn proto(i: u32) -> Koncept {
        Koncept { id: KonceptId(i), level: 0, parents: vec![], ball: None, v: 0.0, a: 0.0, a_prev: 0.0, s: 0.0, links: Links::from_array([0.0; 3]) }
    }

    fn k(id: u32, level: usize, parents: &[u32], center: &[f64]) -> Koncept {
        Koncept {
            id: KonceptId(id),
            level,
            parents: parents.iter().map(|&p| KonceptId(p)).collect(),
            ball: Some(OpenBall { center: center.to_vec(), r1: 0.1, r2: 0.2 }),
            ..proto(id)
        }
    }

    fn build(upper: Vec<Vec<Koncept>>) -> Hierarchy {
        let mut levels = vec![(0..15).map(proto).collect::<Vec<_>>()];
        levels.extend(upper);
        Hierarchy::from_parts(KebaParams::default(), levels, RngStream::new(0, "l"), 0).unwrap()
    }

    #[test]
    fn identical_hierarchies_match_fully() {
        let h = build(vec![
            vec![k(15, 1, &[0, 3], &[0.9, 0.8]), k(16, 1, &[1, 3, 4], &[1.0, 0.7, 0.6])],
            vec![k(17, 2, &[15, 16], &[0.5, 0.5])],
        ]);
        assert_eq!(koncept_similarity(&h, &h, 1, DEFAULT_SIMILARITY_TOL), 1.0);
        assert_eq!(koncept_similarity(&h, &h, 2, DEFAULT_SIMILARITY_TOL), 1.0);
        assert_eq!(level_similarities(&h, &h, DEFAULT_SIMILARITY_TOL), vec![1.0, 1.0]);
    }

    #[test]
    fn distant_centers_do_not_match() {
        let a = build(vec![vec![k(15, 1, &[0, 3], &[0.9, 0.8])]]);
        let b = build(vec![vec![k(15, 1, &[0, 3], &[0.5, 0.3])]]);
        assert_eq!(koncept_similarity(&a, &b, 1, 0.1), 0.0);
    }

    #[test]
    fn different_parents_do_not_match() {
        let a = build(vec![vec![k(15, 1, &[0, 3], &[0.9, 0.8])]]);
        let b = build(vec![vec![k(15, 1, &[0, 4], &[0.9, 0.8])]]);
        assert_eq!(koncept_similarity(&a, &b, 1, 0.1), 0.0);
    }

    #[test]
    fn ratio_uses_larger_level() {
        let a = build(vec![vec![k(15, 1, &[0, 3], &[0.9, 0.8]), k(16, 1, &[1, 2], &[0.7, 0.7])]]);
        let b = build(vec![vec![k(15, 1, &[0, 3], &[0.95, 0.8])]]);
        assert_eq!(koncept_similarity(&a, &b, 1, 0.1), 0.5);
    }

    #[test]
    fn matching_is_one_to_one() {
        let a = build(vec![vec![k(15, 1, &[0, 3], &[0.9, 0.8]), k(16, 1, &[0, 3], &[0.91, 0.8])]]);
        let b = build(vec![vec![k(15, 1, &[0, 3], &[0.9, 0.8])]]);
        assert_eq!(koncept_similarity(&a, &b, 1, 0.1), 0.5);
    }

    #[test]
    fn upper_levels_follow_lower_matching() {
        // Same level-2 centers, but one parent has no counterpart below.
        let a = build(vec![
            vec![k(15, 1, &[0, 3], &[0.9, 0.8]), k(16, 1, &[1, 2], &[0.7, 0.7])],
            vec![k(17, 2, &[15, 16], &[0.5, 0.5])],
        ]);
        let b = build(vec![
            vec![k(15, 1, &[0, 3], &[0.9, 0.8]), k(16, 1, &[1, 2], &[0.2, 0.2])],
            vec![k(17, 2, &[15, 16], &[0.5, 0.5])],
        ]);
        assert_eq!(level_similarities(&a, &b, 0.1), vec![0.5, 0.0]);
    }

    #[test]
    fn parent_order_does_not_matter() {
        let a = build(vec![vec![k(15, 1, &[0, 3], &[0.9, 0.8])]]);
        let b = build(vec![vec![k(15, 1, &[3, 0], &[0.8, 0.9])]]);
        assert_eq!(koncept_similarity(&a, &b, 1, 0.1), 1.0);
    }

    #[test]
    fn missing_level_scores_zero() {
        let a = build(vec![vec![k(15, 1, &[0, 3], &[0.9, 0.8])]]);
        assert_eq!(koncept_similarity(&a, &a, 2, 0.1), 0.0);
        assert_eq!(koncept_similarity(&a, &a, 0, 0.1), 1.0);
    }
}
