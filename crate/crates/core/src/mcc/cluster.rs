//! Building blocks of the training loop, operating on windows.

use alloc::vec;
use alloc::vec::Vec;

use super::Variant;
use crate::distance::DistanceSpec;
use crate::error::{Error, Result};
use crate::window::Window;

/// Cluster membership of the positives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    /// `members[k]` holds the positive indices in cluster `k`, ascending.
    pub members: Vec<Vec<usize>>,
}

impl Assignment {
    /// For a single-assignment clustering, the cluster of each positive.
    pub fn cluster_of(&self, n_positives: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; n_positives];
        for (k, members) in self.members.iter().enumerate() {
            for &i in members {
                out[i] = Some(k);
            }
        }
        out
    }
}

/// Index of the smallest value; ties go to the lowest index.
pub(crate) fn argmin(values: impl IntoIterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.into_iter().enumerate() {
        if best.is_none_or(|(_, b)| v < b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

/// Assigns positives to clusters.
///
/// The improved variant maps each positive to its nearest center. The original
/// variant first computes a radius for each center over its nearest members,
/// then lets every positive join each cluster whose ball covers it (and
/// always its nearest one), so clusters may overlap.
pub fn cluster_assign(
    centers: &[Window],
    positives: &[Window],
    spec: DistanceSpec,
    variant: Variant,
) -> Result<Assignment> {
    if centers.is_empty() {
        return Err(Error::Empty("center list"));
    }
    if positives.is_empty() {
        return Err(Error::Empty("positive set"));
    }
    let dist: Vec<Vec<f64>> = centers
        .iter()
        .map(|c| positives.iter().map(|p| spec.distance(c, p)).collect())
        .collect::<Result<_>>()?;
    Ok(assign_from_matrix(&dist, positives.len(), variant))
}

/// `dist[k][i]` is the distance from center `k` to positive `i`.
pub(crate) fn assign_from_matrix(dist: &[Vec<f64>], n: usize, variant: Variant) -> Assignment {
    let k = dist.len();
    let mut members = vec![Vec::new(); k];
    let nearest: Vec<usize> = (0..n)
        .map(|i| argmin(dist.iter().map(|row| row[i])).unwrap_or(0))
        .collect();
    for (i, &c) in nearest.iter().enumerate() {
        members[c].push(i);
    }
    if variant == Variant::Original {
        let radii: Vec<f64> = members
            .iter()
            .zip(dist)
            .map(|(m, row)| m.iter().map(|&i| row[i]).fold(0.0, f64::max))
            .collect();
        for (c, members_c) in members.iter_mut().enumerate() {
            *members_c = (0..n)
                .filter(|&i| nearest[i] == c || dist[c][i] <= radii[c])
                .collect();
        }
    }
    Assignment { members }
}

/// New center for a cluster: the minimax medoid (improved) or the
/// elementwise mean (original).
pub fn update_center(cluster: &[Window], spec: DistanceSpec, variant: Variant) -> Result<Window> {
    if cluster.is_empty() {
        return Err(Error::Empty("cluster"));
    }
    match variant {
        Variant::Improved => {
            let n = cluster.len();
            let mut d = vec![0.0; n * n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = spec.distance(&cluster[i], &cluster[j])?;
                    d[i * n + j] = v;
                    d[j * n + i] = v;
                }
            }
            let idx: Vec<usize> = (0..n).collect();
            let best = minimax_medoid(&idx, |i, j| d[i * n + j]);
            Ok(cluster[best].clone())
        }
        Variant::Original => Window::mean_of(cluster),
    }
}

/// Member minimizing its maximum distance to the other members. Ties go to
/// the earliest member in `members`.
pub(crate) fn minimax_medoid(members: &[usize], dist: impl Fn(usize, usize) -> f64) -> usize {
    let mut best = members[0];
    let mut best_max = f64::INFINITY;
    for &p in members {
        let mut worst = 0.0f64;
        for &q in members {
            if p != q {
                worst = worst.max(dist(p, q));
                if worst >= best_max {
                    break;
                }
            }
        }
        if worst < best_max {
            best_max = worst;
            best = p;
        }
    }
    best
}

/// Coverage radius: the largest distance from the center to a member.
pub fn derive_threshold(center: &Window, cluster: &[Window], spec: DistanceSpec) -> Result<f64> {
    if cluster.is_empty() {
        return Err(Error::Empty("cluster"));
    }
    cluster
        .iter()
        .try_fold(0.0f64, |acc, m| Ok(acc.max(spec.distance(center, m)?)))
}

/// Discrepancy cost of a ball: the number of negatives inside it.
pub fn cluster_cost(center: &Window, radius: f64, negatives: &[Window], spec: DistanceSpec) -> Result<usize> {
    let mut count = 0;
    for n in negatives {
        if spec.distance(center, n)? <= radius {
            count += 1;
        }
    }
    Ok(count)
}

/// Picks the next seed from the worst cluster: the member whose coverage
/// would trap the most negatives, i.e. maximizing the count of negatives no
/// farther from `center` than the member itself. Ties prefer the farther
/// member, then the lower index. Returns an index into `cluster`.
pub fn select_seed(
    cluster: &[Window],
    center: &Window,
    negatives: &[Window],
    spec: DistanceSpec,
) -> Result<usize> {
    if cluster.is_empty() {
        return Err(Error::Empty("cluster"));
    }
    let member_dist: Vec<f64> = cluster
        .iter()
        .map(|p| spec.distance(center, p))
        .collect::<Result<_>>()?;
    let neg_dist: Vec<f64> = negatives
        .iter()
        .map(|n| spec.distance(center, n))
        .collect::<Result<_>>()?;
    let candidates: Vec<usize> = (0..cluster.len()).collect();
    Ok(seed_from_distances(&candidates, &member_dist, &neg_dist).unwrap_or(0))
}

/// Index-level seed choice. `member_dist[i]` and `neg_dist` are distances
/// from the worst cluster's center; `candidates` are the eligible positives.
pub(crate) fn seed_from_distances(
    candidates: &[usize],
    member_dist: &[f64],
    neg_dist: &[f64],
) -> Option<usize> {
    let mut sorted_neg = neg_dist.to_vec();
    sorted_neg.sort_by(f64::total_cmp);
    let mut best: Option<(usize, usize, f64)> = None;
    for &i in candidates {
        let d = member_dist[i];
        let trapped = sorted_neg.partition_point(|&n| n <= d);
        let better = match best {
            None => true,
            Some((_, bt, bd)) => trapped > bt || (trapped == bt && d > bd),
        };
        if better {
            best = Some((i, trapped, d));
        }
    }
    best.map(|(i, _, _)| i)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[f64]) -> Vec<Window> {
        v.iter().map(|&x| Window::point(&[x]).unwrap()).collect()
    }

    fn pts2(v: &[(f64, f64)]) -> Vec<Window> {
        v.iter().map(|&(x, y)| Window::point(&[x, y]).unwrap()).collect()
    }

    const E: DistanceSpec = DistanceSpec::EUCLIDEAN;

    #[test]
    fn single_center_takes_all() {
        let p = pts(&[1.0, 2.0, 3.0]);
        let a = cluster_assign(&pts(&[0.0]), &p, E, Variant::Improved).unwrap();
        assert_eq!(a.members, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn coincident_positives_join_their_center() {
        let centers = pts(&[0.0, 10.0]);
        let p = pts(&[10.0, 0.0, 10.0]);
        let a = cluster_assign(&centers, &p, E, Variant::Improved).unwrap();
        assert_eq!(a.members, vec![vec![1], vec![0, 2]]);
        assert_eq!(a.cluster_of(3), vec![Some(1), Some(0), Some(1)]);
    }

    #[test]
    fn assign_ties_go_to_lowest_cluster() {
        let a = cluster_assign(&pts(&[-1.0, 1.0]), &pts(&[0.0]), E, Variant::Improved).unwrap();
        assert_eq!(a.members, vec![vec![0], vec![]]);
    }

    #[test]
    fn original_assignment_overlaps() {
        // Center 8 has nearest members {8, 12}, so radius 4 reaches the
        // positive at 4 that is nearest to center 0 by tie-break.
        let centers = pts(&[0.0, 8.0]);
        let p = pts(&[0.0, 3.9, 4.0, 8.0, 12.0]);
        let a = cluster_assign(&centers, &p, E, Variant::Original).unwrap();
        assert_eq!(a.members[0], vec![0, 1, 2]);
        assert_eq!(a.members[1], vec![2, 3, 4]);
        assert!(cluster_assign(&centers, &[], E, Variant::Original).is_err());
        assert!(cluster_assign(&[], &p, E, Variant::Original).is_err());
    }

    #[test]
    fn medoid_of_collinear_points() {
        let c = update_center(&pts(&[0.0, 1.0, 10.0]), E, Variant::Improved).unwrap();
        assert_eq!(c.values(), &[1.0]);
        let single = update_center(&pts(&[4.0]), E, Variant::Improved).unwrap();
        assert_eq!(single.values(), &[4.0]);
        let mean = update_center(&pts(&[0.0, 1.0, 11.0]), E, Variant::Original).unwrap();
        assert_eq!(mean.values(), &[4.0]);
        assert!(update_center(&[], E, Variant::Improved).is_err());
    }

    #[test]
    fn medoid_tie_takes_lowest_index() {
        let c = update_center(&pts(&[0.0, 2.0]), E, Variant::Improved).unwrap();
        assert_eq!(c.values(), &[0.0]);
    }

    #[test]
    fn threshold_is_max_member_distance() {
        let center = Window::point(&[0.0, 0.0]).unwrap();
        let members = pts2(&[(0.0, 3.0), (4.0, 0.0)]);
        assert_eq!(derive_threshold(&center, &members, E).unwrap(), 4.0);
        assert_eq!(derive_threshold(&center, core::slice::from_ref(&center), E).unwrap(), 0.0);
        assert!(derive_threshold(&center, &[], E).is_err());
    }

    #[test]
    fn cost_counts_inclusive_boundary() {
        let center = Window::point(&[0.0, 0.0]).unwrap();
        let negs = pts2(&[(3.0, 4.0), (6.0, 8.0)]);
        assert_eq!(cluster_cost(&center, 5.0, &negs, E).unwrap(), 1);
        assert_eq!(cluster_cost(&center, 0.0, &negs, E).unwrap(), 0);
        assert_eq!(cluster_cost(&center, 5.0, &[], E).unwrap(), 0);
    }

    #[test]
    fn seed_traps_most_negatives() {
        let center = Window::point(&[0.0]).unwrap();
        let cluster = pts(&[1.0, 9.0]);
        let negs = pts(&[2.0, 3.0]);
        assert_eq!(select_seed(&cluster, &center, &negs, E).unwrap(), 1);
        assert_eq!(select_seed(&pts(&[5.0]), &center, &negs, E).unwrap(), 0);
        assert!(select_seed(&[], &center, &negs, E).is_err());
    }

    #[test]
    fn seed_ties_prefer_farther_then_lower() {
        let center = Window::point(&[0.0]).unwrap();
        // No negatives: every member traps zero, so the farthest wins.
        assert_eq!(select_seed(&pts(&[1.0, 3.0, 2.0]), &center, &[], E).unwrap(), 1);
        assert_eq!(select_seed(&pts(&[3.0, -3.0]), &center, &[], E).unwrap(), 0);
    }
}
