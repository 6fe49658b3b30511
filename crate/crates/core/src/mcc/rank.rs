use alloc::vec;
use alloc::vec::Vec;

use super::MccModel;
use crate::error::{Error, Result};
use crate::window::Window;

/// Orders templates by greedy marginal coverage of `positives`.
///
/// Each step picks the unranked template covering the most positives not yet
/// covered (ties to the lower current index) and records that count. The
/// returned model lists templates in rank order, so `top_k` selects a prefix.
pub fn rank_templates(model: &MccModel, positives: &[Window]) -> Result<MccModel> {
    let order = rank_order(model, positives)?;
    Ok(apply_order(model, &order))
}

/// Greedy order as `(template index, coverage count)` pairs.
pub(crate) fn rank_order(model: &MccModel, positives: &[Window]) -> Result<Vec<(usize, usize)>> {
    if positives.is_empty() {
        return Err(Error::Empty("positive set"));
    }
    let covers: Vec<Vec<bool>> = model
        .templates
        .iter()
        .map(|t| {
            positives
                .iter()
                .map(|p| {
                    model.check_shape(p)?;
                    Ok(t.covers(model.distance.distance(p, &t.center)?, 1.0))
                })
                .collect::<Result<Vec<bool>>>()
        })
        .collect::<Result<_>>()?;
    Ok(greedy_cover_order(&covers))
}

pub(crate) fn apply_order(model: &MccModel, order: &[(usize, usize)]) -> MccModel {
    let mut ranked = model.clone();
    ranked.templates = order
        .iter()
        .enumerate()
        .map(|(pos, &(idx, gain))| {
            let mut t = model.templates[idx].clone();
            t.rank = Some(pos + 1);
            t.coverage_count = gain;
            t
        })
        .collect();
    ranked
}

/// Greedy max-marginal-coverage order over boolean cover rows, returning
/// `(row index, newly covered count)` pairs.
pub(crate) fn greedy_cover_order(covers: &[Vec<bool>]) -> Vec<(usize, usize)> {
    let n = covers.first().map_or(0, Vec::len);
    let mut covered = vec![false; n];
    let mut remaining: Vec<usize> = (0..covers.len()).collect();
    let mut order = Vec::with_capacity(covers.len());
    while !remaining.is_empty() {
        let gain = |k: usize| {
            covers[k]
                .iter()
                .zip(&covered)
                .filter(|(&c, &done)| c && !done)
                .count()
        };
        let mut best_pos = 0;
        let mut best_gain = gain(remaining[0]);
        for (pos, &k) in remaining.iter().enumerate().skip(1) {
            let g = gain(k);
            if g > best_gain {
                best_gain = g;
                best_pos = pos;
            }
        }
        let k = remaining.remove(best_pos);
        for (c, &hit) in covered.iter_mut().zip(&covers[k]) {
            *c |= hit;
        }
        order.push((k, best_gain));
    }
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::DistanceSpec;
    use crate::mcc::Template;
    use alloc::string::String;

    fn model(centers: &[(f64, f64)]) -> MccModel {
        MccModel {
            templates: centers
                .iter()
                .map(|&(c, r)| Template {
                    center: Window::point(&[c]).unwrap(),
                    radius: r,
                    rank: None,
                    coverage_count: 0,
                })
                .collect(),
            distance: DistanceSpec::EUCLIDEAN,
            window_shape: (1, 1),
            preprocessing_fingerprint: String::new(),
        }
    }

    fn pts(v: &[f64]) -> Vec<Window> {
        v.iter().map(|&x| Window::point(&[x]).unwrap()).collect()
    }

    #[test]
    fn single_template() {
        let m = rank_templates(&model(&[(0.0, 1.0)]), &pts(&[0.0, 0.5, 3.0])).unwrap();
        assert_eq!(m.templates[0].rank, Some(1));
        assert_eq!(m.templates[0].coverage_count, 2);
    }

    #[test]
    fn greedy_prefers_larger_then_marginal() {
        // B (index 0) covers {3, 4}; A (index 1) covers {1, 2, 3}.
        let m = rank_templates(&model(&[(3.5, 0.5), (2.0, 1.0)]), &pts(&[1.0, 2.0, 3.0, 4.0])).unwrap();
        assert_eq!(m.templates[0].center.values(), &[2.0]);
        assert_eq!(m.templates[0].coverage_count, 3);
        assert_eq!(m.templates[1].coverage_count, 1);
        assert_eq!(m.templates[1].rank, Some(2));
        m.validate().unwrap();
    }

    #[test]
    fn ties_keep_lower_index() {
        let order = greedy_cover_order(&[vec![true, false], vec![false, true], vec![false, false]]);
        assert_eq!(order, vec![(0, 1), (1, 1), (2, 0)]);
    }

    #[test]
    fn empty_positives_rejected() {
        assert!(rank_templates(&model(&[(0.0, 1.0)]), &[]).is_err());
    }
}
