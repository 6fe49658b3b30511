//! Reference classifiers: k-nearest neighbors and a medoid-based nearest
//! centroid, both over any [`DistanceSpec`].

use alloc::vec::Vec;

use crate::distance::DistanceSpec;
use crate::error::{Error, Result};
use crate::mcc::{update_center, Variant};
use crate::window::Window;

#[derive(Debug, Clone, PartialEq)]
pub struct NnModel {
    pub samples: Vec<Window>,
    pub labels: Vec<bool>,
    pub k: usize,
    pub distance: DistanceSpec,
}

impl NnModel {
    pub fn new(samples: Vec<Window>, labels: Vec<bool>, k: usize, distance: DistanceSpec) -> Result<Self> {
        if samples.len() != labels.len() {
            return Err(Error::InvalidParameter("samples and labels differ in length".into()));
        }
        if k == 0 || k > samples.len() {
            return Err(Error::InvalidParameter(alloc::format!(
                "k = {k} must be in 1..={}",
                samples.len()
            )));
        }
        Ok(Self {
            samples,
            labels,
            k,
            distance,
        })
    }

    /// Majority label among the `k` nearest samples. Distance ties keep the
    /// lower index; vote ties are negative.
    pub fn predict(&self, w: &Window) -> Result<bool> {
        let mut dists: Vec<(f64, usize)> = self
            .samples
            .iter()
            .enumerate()
            .map(|(i, s)| Ok((self.distance.distance(w, s)?, i)))
            .collect::<Result<_>>()?;
        if self.k == 1 {
            let best = dists
                .iter()
                .fold((f64::INFINITY, 0), |b, &d| if d.0 < b.0 { d } else { b });
            return Ok(self.labels[best.1]);
        }
        dists.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let votes = dists[..self.k].iter().filter(|(_, i)| self.labels[*i]).count();
        Ok(2 * votes > self.k)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NearestCentroid {
    pub positive: Option<Window>,
    pub negative: Option<Window>,
    pub distance: DistanceSpec,
}

impl NearestCentroid {
    /// One minimax medoid per class present in the data.
    pub fn train(samples: &[Window], labels: &[bool], distance: DistanceSpec) -> Result<Self> {
        if samples.is_empty() || samples.len() != labels.len() {
            return Err(Error::Empty("labeled samples"));
        }
        let class = |want: bool| -> Result<Option<Window>> {
            let members: Vec<Window> = samples
                .iter()
                .zip(labels)
                .filter(|(_, &l)| l == want)
                .map(|(s, _)| s.clone())
                .collect();
            if members.is_empty() {
                Ok(None)
            } else {
                update_center(&members, distance, Variant::Improved).map(Some)
            }
        };
        Ok(Self {
            positive: class(true)?,
            negative: class(false)?,
            distance,
        })
    }

    /// Label of the nearer center; equidistant samples are negative.
    pub fn predict(&self, w: &Window) -> Result<bool> {
        match (&self.positive, &self.negative) {
            (Some(p), Some(n)) => Ok(self.distance.distance(w, p)? < self.distance.distance(w, n)?),
            (Some(_), None) => Ok(true),
            (None, _) => Ok(false),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn pts(v: &[f64]) -> Vec<Window> {
        v.iter().map(|&x| Window::point(&[x]).unwrap()).collect()
    }

    #[test]
    fn one_nn_returns_own_label() {
        let m = NnModel::new(pts(&[0.0, 1.0, 2.0]), vec![true, false, true], 1, DistanceSpec::EUCLIDEAN).unwrap();
        assert!(!m.predict(&Window::point(&[1.0]).unwrap()).unwrap());
        assert!(m.predict(&Window::point(&[2.0]).unwrap()).unwrap());
    }

    #[test]
    fn k_equals_n_majority() {
        let m = NnModel::new(pts(&[0.0, 1.0, 2.0]), vec![true, false, true], 3, DistanceSpec::EUCLIDEAN).unwrap();
        assert!(m.predict(&Window::point(&[100.0]).unwrap()).unwrap());
        let even = NnModel::new(pts(&[0.0, 1.0]), vec![true, false], 2, DistanceSpec::EUCLIDEAN).unwrap();
        assert!(!even.predict(&Window::point(&[0.0]).unwrap()).unwrap());
        assert!(NnModel::new(pts(&[0.0]), vec![true], 2, DistanceSpec::EUCLIDEAN).is_err());
    }

    #[test]
    fn centroid_cases() {
        let m = NearestCentroid::train(&pts(&[-1.0, 1.0]), &[false, true], DistanceSpec::EUCLIDEAN).unwrap();
        assert!(m.predict(&Window::point(&[0.5]).unwrap()).unwrap());
        assert!(!m.predict(&Window::point(&[-0.5]).unwrap()).unwrap());
        assert!(!m.predict(&Window::point(&[0.0]).unwrap()).unwrap());
        let pos_only = NearestCentroid::train(&pts(&[3.0]), &[true], DistanceSpec::EUCLIDEAN).unwrap();
        assert!(pos_only.predict(&Window::point(&[-50.0]).unwrap()).unwrap());
        let neg_only = NearestCentroid::train(&pts(&[3.0]), &[false], DistanceSpec::EUCLIDEAN).unwrap();
        assert!(!neg_only.predict(&Window::point(&[3.0]).unwrap()).unwrap());
    }
}
