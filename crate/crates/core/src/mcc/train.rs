//! Outer training loop.
//!
//! Start with one cluster seeded by a random positive, cluster to a fixed
//! point, and keep adding a center taken from the costliest cluster until the
//! stop criterion holds or `max_clusters` is reached.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::cluster::{argmin, minimax_medoid, seed_from_distances};
use super::{MccModel, StopMode, Template, TrainConfig, Variant};
use crate::distance::DistanceSpec;
use crate::error::{Error, Result};
use crate::rng::substream;
use crate::window::Window;

const MAX_INNER_ROUNDS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceStep {
    /// Number of clusters after this outer iteration.
    pub clusters: usize,
    /// Total discrepancy cost (sum of per-cluster costs).
    pub total_cost: f64,
    /// Training precision of the union of all balls.
    pub precision: f64,
    /// Inner clustering rounds used.
    pub inner_rounds: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainTrace {
    pub steps: Vec<TraceStep>,
    /// False when `max_clusters` was hit (or no cluster could be split)
    /// before the stop criterion held.
    pub criterion_met: bool,
}

impl TrainTrace {
    pub fn warning(&self) -> Option<&'static str> {
        (!self.criterion_met).then_some("stop criterion not met before training ended")
    }
}

/// Result of one inner clustering pass.
#[derive(Debug, Clone)]
struct Clustering {
    centers: Vec<Window>,
    members: Vec<Vec<usize>>,
    radii: Vec<f64>,
    costs: Vec<usize>,
    /// `center_dist[k][i]`: distance from center `k` to positive `i`.
    center_pos: Vec<Vec<f64>>,
    center_neg: Vec<Vec<f64>>,
    /// For the improved variant, the positive index of each center.
    center_index: Vec<Option<usize>>,
    rounds: usize,
}

impl Clustering {
    fn total_cost(&self) -> usize {
        self.costs.iter().sum()
    }

    fn precision(&self) -> f64 {
        let covered = |rows: &[Vec<f64>]| -> usize {
            let n = rows.first().map_or(0, Vec::len);
            (0..n)
                .filter(|&i| rows.iter().zip(&self.radii).any(|(row, &r)| row[i] <= r))
                .count()
        };
        let tp = covered(&self.center_pos) as f64;
        let fp = covered(&self.center_neg) as f64;
        if tp + fp == 0.0 {
            0.0
        } else {
            tp / (tp + fp)
        }
    }
}

/// Trains a model. The returned trace holds one step per outer iteration.
pub fn train(positives: &[Window], negatives: &[Window], config: &TrainConfig) -> Result<(MccModel, TrainTrace)> {
    config.validate()?;
    let first = positives.first().ok_or(Error::Empty("positive set"))?;
    for w in positives.iter().chain(negatives) {
        config.distance.check_compatible(first, w)?;
    }

    let mut rng = substream(config.rng_seed, 0);
    let mut solver = Solver::new(positives, negatives, config.distance, config.variant)?;

    let seed = rng.random_range(0..positives.len());
    let mut state = solver.cluster(vec![Seed::Positive(seed)])?;
    let mut steps = vec![step(&state)];
    let mut criterion_met = stop_reached(&state, config.stop);

    while !criterion_met && state.centers.len() < config.max_clusters {
        let Some(new_seed) = solver.next_seed(&state, &mut rng) else {
            break;
        };
        let mut seeds: Vec<Seed> = state
            .center_index
            .iter()
            .zip(&state.centers)
            .map(|(idx, c)| match idx {
                Some(i) => Seed::Positive(*i),
                None => Seed::Free(c.clone()),
            })
            .collect();
        seeds.push(Seed::Positive(new_seed));
        state = solver.cluster(seeds)?;
        steps.push(step(&state));
        criterion_met = stop_reached(&state, config.stop);
    }

    let templates = state
        .centers
        .into_iter()
        .zip(state.radii)
        .map(|(center, radius)| Template {
            center,
            radius,
            rank: None,
            coverage_count: 0,
        })
        .collect();
    let model = MccModel {
        templates,
        distance: config.distance,
        window_shape: first.shape(),
        preprocessing_fingerprint: String::new(),
    };
    Ok((model, TrainTrace { steps, criterion_met }))
}

fn step(state: &Clustering) -> TraceStep {
    TraceStep {
        clusters: state.centers.len(),
        total_cost: state.total_cost() as f64,
        precision: state.precision(),
        inner_rounds: state.rounds,
    }
}

fn stop_reached(state: &Clustering, stop: StopMode) -> bool {
    match stop {
        StopMode::CostThreshold(h) => state.total_cost() as f64 <= h,
        StopMode::PrecisionTarget(p) => state.precision() >= p,
    }
}

enum Seed {
    Positive(usize),
    Free(Window),
}

struct Solver<'a> {
    pos: &'a [Window],
    neg: &'a [Window],
    spec: DistanceSpec,
    variant: Variant,
    /// Positive-to-positive distances, row-major (improved variant only).
    pos_pos: Vec<f64>,
    /// Lazily computed positive-to-negative distance rows.
    pos_neg: Vec<Option<Vec<f64>>>,
}

impl<'a> Solver<'a> {
    fn new(pos: &'a [Window], neg: &'a [Window], spec: DistanceSpec, variant: Variant) -> Result<Self> {
        let n = pos.len();
        let mut pos_pos = Vec::new();
        if variant == Variant::Improved {
            pos_pos = vec![0.0; n * n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let d = spec.distance(&pos[i], &pos[j])?;
                    pos_pos[i * n + j] = d;
                    pos_pos[j * n + i] = d;
                }
            }
        }
        Ok(Self {
            pos,
            neg,
            spec,
            variant,
            pos_pos,
            pos_neg: vec![None; n],
        })
    }

    fn pos_row(&self, i: usize) -> Vec<f64> {
        let n = self.pos.len();
        self.pos_pos[i * n..(i + 1) * n].to_vec()
    }

    fn neg_row(&mut self, i: usize) -> Result<Vec<f64>> {
        if self.pos_neg[i].is_none() {
            let row = self
                .neg
                .iter()
                .map(|w| self.spec.distance(&self.pos[i], w))
                .collect::<Result<Vec<_>>>()?;
            self.pos_neg[i] = Some(row);
        }
        Ok(self.pos_neg[i].clone().unwrap_or_default())
    }

    fn free_rows(&self, center: &Window) -> Result<(Vec<f64>, Vec<f64>)> {
        let p = self.pos.iter().map(|w| self.spec.distance(center, w)).collect::<Result<_>>()?;
        let n = self.neg.iter().map(|w| self.spec.distance(center, w)).collect::<Result<_>>()?;
        Ok((p, n))
    }

    fn cluster(&mut self, seeds: Vec<Seed>) -> Result<Clustering> {
        match self.variant {
            Variant::Improved => {
                let centers = seeds
                    .into_iter()
                    .map(|s| match s {
                        Seed::Positive(i) => i,
                        // Improved centers are always positives.
                        Seed::Free(_) => unreachable!("free center in improved variant"),
                    })
                    .collect();
                self.cluster_improved(centers)
            }
            Variant::Original => {
                let centers = seeds
                    .into_iter()
                    .map(|s| match s {
                        Seed::Positive(i) => self.pos[i].clone(),
                        Seed::Free(w) => w,
                    })
                    .collect();
                self.cluster_original(centers)
            }
        }
    }

    /// Nearest-center assignment with minimax-medoid recentering, iterated to
    /// a fixed point. A repeated center set ends the loop with the lowest-cost
    /// state seen.
    fn cluster_improved(&mut self, mut centers: Vec<usize>) -> Result<Clustering> {
        let n = self.pos.len();
        let mut seen: Vec<Vec<usize>> = Vec::new();
        let mut history: Vec<Clustering> = Vec::new();
        for round in 1..=MAX_INNER_ROUNDS {
            let mut members = vec![Vec::new(); centers.len()];
            for i in 0..n {
                let own = centers.iter().position(|&c| c == i);
                let k = own.unwrap_or_else(|| {
                    argmin(centers.iter().map(|&c| self.pos_pos[c * n + i])).unwrap_or(0)
                });
                members[k].push(i);
            }
            let new_centers: Vec<usize> = members
                .iter()
                .map(|m| minimax_medoid(m, |a, b| self.pos_pos[a * n + b]))
                .collect();
            let radii: Vec<f64> = members
                .iter()
                .zip(&new_centers)
                .map(|(m, &c)| m.iter().map(|&i| self.pos_pos[c * n + i]).fold(0.0, f64::max))
                .collect();
            let mut center_neg = Vec::with_capacity(new_centers.len());
            for &c in &new_centers {
                center_neg.push(self.neg_row(c)?);
            }
            let costs = center_neg
                .iter()
                .zip(&radii)
                .map(|(row, &r)| row.iter().filter(|&&d| d <= r).count())
                .collect();
            let state = Clustering {
                centers: new_centers.iter().map(|&c| self.pos[c].clone()).collect(),
                center_pos: new_centers.iter().map(|&c| self.pos_row(c)).collect(),
                center_neg,
                center_index: new_centers.iter().map(|&c| Some(c)).collect(),
                members,
                radii,
                costs,
                rounds: round,
            };
            if new_centers == centers {
                return Ok(state);
            }
            if seen.contains(&new_centers) {
                history.push(state);
                return Ok(lowest_cost(history));
            }
            seen.push(core::mem::replace(&mut centers, new_centers));
            history.push(state);
        }
        Ok(history.pop().expect("at least one round"))
    }

    /// Multi-assignment with mean recentering, iterated to a fixed point.
    fn cluster_original(&mut self, mut centers: Vec<Window>) -> Result<Clustering> {
        let mut seen: Vec<Vec<u64>> = Vec::new();
        let mut history: Vec<Clustering> = Vec::new();
        for round in 1..=MAX_INNER_ROUNDS {
            let mut center_pos = Vec::with_capacity(centers.len());
            for c in &centers {
                center_pos.push(self.free_rows(c)?.0);
            }
            let assignment =
                super::cluster::assign_from_matrix(&center_pos, self.pos.len(), Variant::Original);
            let mut new_centers = Vec::with_capacity(centers.len());
            for (c, m) in centers.iter().zip(&assignment.members) {
                if m.is_empty() {
                    new_centers.push(c.clone());
                } else {
                    new_centers.push(Window::mean_of(m.iter().map(|&i| &self.pos[i]))?);
                }
            }
            let mut pos_rows = Vec::with_capacity(new_centers.len());
            let mut neg_rows = Vec::with_capacity(new_centers.len());
            for c in &new_centers {
                let (p, n) = self.free_rows(c)?;
                pos_rows.push(p);
                neg_rows.push(n);
            }
            let radii: Vec<f64> = assignment
                .members
                .iter()
                .zip(&pos_rows)
                .map(|(m, row)| m.iter().map(|&i| row[i]).fold(0.0, f64::max))
                .collect();
            let costs = neg_rows
                .iter()
                .zip(&radii)
                .map(|(row, &r)| row.iter().filter(|&&d| d <= r).count())
                .collect();
            let fingerprint = center_bits(&new_centers);
            let fixed = center_bits(&centers) == fingerprint;
            let state = Clustering {
                center_index: vec![None; new_centers.len()],
                centers: new_centers.clone(),
                members: assignment.members,
                radii,
                costs,
                center_pos: pos_rows,
                center_neg: neg_rows,
                rounds: round,
            };
            if fixed {
                return Ok(state);
            }
            if seen.contains(&fingerprint) {
                history.push(state);
                return Ok(lowest_cost(history));
            }
            seen.push(center_bits(&centers));
            history.push(state);
            centers = new_centers;
        }
        Ok(history.pop().expect("at least one round"))
    }

    /// Seed for the next cluster, drawn from the costliest cluster that still
    /// has a member other than its center.
    fn next_seed(&mut self, state: &Clustering, rng: &mut impl Rng) -> Option<usize> {
        let mut order: Vec<usize> = (0..state.costs.len()).collect();
        // Stable sort keeps lower indices first among equal costs.
        order.sort_by(|&a, &b| state.costs[b].cmp(&state.costs[a]));
        for t in order {
            let candidates: Vec<usize> = state.members[t]
                .iter()
                .copied()
                .filter(|i| !state.center_index.contains(&Some(*i)))
                .filter(|&i| state.center_pos[t][i] > 0.0 || self.variant == Variant::Original)
                .collect();
            if candidates.is_empty() {
                continue;
            }
            return Some(match self.variant {
                Variant::Improved => {
                    seed_from_distances(&candidates, &state.center_pos[t], &state.center_neg[t])?
                }
                Variant::Original => candidates[rng.random_range(0..candidates.len())],
            });
        }
        None
    }
}

fn lowest_cost(history: Vec<Clustering>) -> Clustering {
    let mut best: Option<Clustering> = None;
    for s in history {
        if best.as_ref().is_none_or(|b| s.total_cost() < b.total_cost()) {
            best = Some(s);
        }
    }
    best.expect("non-empty history")
}

fn center_bits(centers: &[Window]) -> Vec<u64> {
    centers
        .iter()
        .flat_map(|c| c.values().iter().map(|v| v.to_bits()))
        .collect()
}
