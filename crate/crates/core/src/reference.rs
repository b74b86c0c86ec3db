//! Construction and streaming updates of the reference embedding sets.
//!
//! The initial normal set is the k-means centers of the source-domain
//! training normals followed by every target-domain training normal.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::math::squared_distance;
use crate::scoring::ReferenceSets;
use crate::types::{Embedding, Label};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig {
    pub k: usize,
    pub max_iterations: usize,
    /// Stop once the relative objective decrease falls below this.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            k: 32,
            max_iterations: 100,
            tolerance: 1e-6,
            seed: 0,
        }
    }
}

impl KMeansConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(invalid("k must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(invalid("max_iterations must be positive"));
        }
        if !(self.tolerance > 0.0) {
            return Err(invalid("tolerance must be positive"));
        }
        Ok(())
    }
}

/// Result of a k-means run, including the per-iteration objective.
#[derive(Debug, Clone)]
pub struct KMeansFit {
    pub centers: Vec<Embedding>,
    /// Within-cluster sum of squared distances after each assignment step.
    pub objective: Vec<f64>,
    pub assignments: Vec<usize>,
}

/// Seeded k-means (Lloyd iterations, k-means++ seeding) on Euclidean distance.
pub fn kmeans(points: &[Embedding], cfg: &KMeansConfig) -> Result<Vec<Embedding>> {
    kmeans_fit(points, cfg).map(|fit| fit.centers)
}

pub fn kmeans_fit(points: &[Embedding], cfg: &KMeansConfig) -> Result<KMeansFit> {
    cfg.validate()?;
    let first = points.first().ok_or(Error::EmptyInput)?;
    let dim = first.dim();
    for p in points {
        p.check_dim(dim)?;
    }
    if cfg.k > points.len() {
        return Err(Error::TooFewPoints {
            k: cfg.k,
            points: points.len(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut centers = seed_centers(points, cfg.k, &mut rng);
    let mut assignments = vec![0usize; points.len()];
    let mut distances = vec![0f64; points.len()];
    let mut objective = Vec::new();

    for _ in 0..cfg.max_iterations {
        let obj = assign(points, &centers, &mut assignments, &mut distances);
        let converged = match objective.last() {
            Some(&prev) if prev > 0.0 => (prev - obj) / prev < cfg.tolerance,
            Some(_) => true,
            None => obj == 0.0,
        };
        objective.push(obj);
        if converged {
            break;
        }
        update_centers(points, &mut centers, &mut assignments, &distances, dim);
    }

    let centers = centers
        .into_iter()
        .map(Embedding::new)
        .collect::<Result<Vec<_>>>()?;
    Ok(KMeansFit {
        centers,
        objective,
        assignments,
    })
}

fn seed_centers(points: &[Embedding], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut chosen = Vec::with_capacity(k);
    chosen.push(rng.random_range(0..n));
    let mut nearest: Vec<f64> = points
        .iter()
        .map(|p| squared_distance(p.as_slice(), points[chosen[0]].as_slice()))
        .collect();

    while chosen.len() < k {
        let total: f64 = nearest.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = None;
            for (i, &d) in nearest.iter().enumerate() {
                if d > 0.0 {
                    pick = Some(i);
                    if target < d {
                        break;
                    }
                    target -= d;
                }
            }
            pick.expect("positive total weight")
        } else {
            // every remaining point coincides with a center; take an unused index
            let unused: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            unused[rng.random_range(0..unused.len())]
        };
        chosen.push(next);
        for (d, p) in nearest.iter_mut().zip(points) {
            let nd = squared_distance(p.as_slice(), points[next].as_slice());
            if nd < *d {
                *d = nd;
            }
        }
    }
    chosen
        .into_iter()
        .map(|i| points[i].as_slice().to_vec())
        .collect()
}

fn assign(
    points: &[Embedding],
    centers: &[Vec<f64>],
    assignments: &mut [usize],
    distances: &mut [f64],
) -> f64 {
    let mut total = 0.0;
    for (i, p) in points.iter().enumerate() {
        let (best, dist) = centers
            .iter()
            .enumerate()
            .map(|(c, center)| (c, squared_distance(p.as_slice(), center)))
            .fold((0, f64::INFINITY), |acc, cur| if cur.1 < acc.1 { cur } else { acc });
        assignments[i] = best;
        distances[i] = dist;
        total += dist;
    }
    total
}

fn update_centers(
    points: &[Embedding],
    centers: &mut [Vec<f64>],
    assignments: &mut [usize],
    distances: &[f64],
    dim: usize,
) {
    let k = centers.len();
    let mut sums = vec![vec![0f64; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &c) in points.iter().zip(assignments.iter()) {
        counts[c] += 1;
        for (s, v) in sums[c].iter_mut().zip(p.as_slice()) {
            *s += v;
        }
    }
    let mut taken = vec![false; points.len()];
    for c in 0..k {
        if counts[c] > 0 {
            let n = counts[c] as f64;
            for (dst, s) in centers[c].iter_mut().zip(&sums[c]) {
                *dst = s / n;
            }
            continue;
        }
        // Empty cluster: re-seed it at the point farthest from its center,
        // taken from a cluster that can spare it.
        let far = (0..points.len())
            .filter(|&i| !taken[i] && counts[assignments[i]] > 1)
            .fold(None, |best: Option<usize>, i| match best {
                Some(b) if distances[b] >= distances[i] => Some(b),
                _ => Some(i),
            });
        if let Some(i) = far {
            taken[i] = true;
            counts[assignments[i]] -= 1;
            assignments[i] = c;
            counts[c] = 1;
            centers[c] = points[i].as_slice().to_vec();
        }
    }
}

/// Initial reference sets: k centers of the source normals, then every
/// target normal, with an empty anomalous set.
pub fn build_initial_reference(
    source_normals: &[Embedding],
    target_normals: &[Embedding],
    cfg: &KMeansConfig,
) -> Result<ReferenceSets> {
    let mut normal = kmeans(source_normals, cfg)?;
    normal.extend(target_normals.iter().cloned());
    ReferenceSets::with_normals(normal)
}

impl ReferenceSets {
    /// Appends `e` to the anomalous set when `label` is anomalous, otherwise
    /// to the normal set. Existing members are untouched.
    pub fn add_member(&mut self, e: Embedding, label: Label) -> Result<()> {
        e.check_dim(self.dim())?;
        match label {
            Label::Anomalous => self.anomalous.push(e),
            Label::Normal => self.normal.push(e),
        }
        Ok(())
    }
}
