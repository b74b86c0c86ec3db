//! Seeded synthetic embedding datasets with source, target and anomaly
//! structure.
//!
//! Per machine, a random unit vector is the source-normal mean. The
//! target-normal mean is shifted from it by `target_shift` along a random
//! direction orthogonal to it. Anomaly clusters sit `anomaly_shift` away from
//! the normal mean of their domain along distinct directions; the first of
//! them leans toward the target shift direction, which places it close to
//! the target normals. Optionally a fraction of the test source normals is
//! drawn from an extra cluster that no training normal covers. Every
//! embedding is `normalize(center + spread * z)` with `z` standard normal.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Result};
use crate::math::{dot, sqrt};
use crate::types::{Domain, Embedding, Label, Sample};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SynthConfig {
    pub dim: usize,
    pub machines: usize,
    pub source_train: usize,
    pub target_train: usize,
    pub test_normal_source: usize,
    pub test_normal_target: usize,
    pub test_anomalous: usize,
    /// Per-component standard deviation of the isotropic noise on normals.
    pub spread: f64,
    /// Per-component standard deviation of the noise on anomalies.
    pub anomaly_spread: f64,
    pub target_shift: f64,
    pub anomaly_shift: f64,
    pub anomaly_clusters: usize,
    /// Cosine between the first anomaly direction and the target shift direction.
    pub near_target_cosine: f64,
    /// Weight of a fault direction common to every anomaly cluster of a machine.
    pub anomaly_shared: f64,
    /// Fraction of test source normals drawn from an unseen normal cluster.
    pub unseen_normal_fraction: f64,
    pub unseen_shift: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            dim: 128,
            machines: 7,
            source_train: 990,
            target_train: 10,
            test_normal_source: 50,
            test_normal_target: 50,
            test_anomalous: 100,
            spread: 0.07,
            anomaly_spread: 0.05,
            target_shift: 0.5,
            anomaly_shift: 0.6,
            anomaly_clusters: 6,
            near_target_cosine: 0.4,
            anomaly_shared: 0.7,
            unseen_normal_fraction: 0.0,
            unseen_shift: 0.6,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 4 {
            return Err(invalid("dim must be at least 4"));
        }
        let counts = [
            self.machines,
            self.source_train,
            self.target_train,
            self.test_normal_source,
            self.test_normal_target,
            self.test_anomalous,
        ];
        if counts.contains(&0) {
            return Err(invalid("all sample counts must be at least 1"));
        }
        for spread in [self.spread, self.anomaly_spread] {
            if !(spread > 0.0) || !spread.is_finite() {
                return Err(invalid("spreads must be positive"));
            }
        }
        if !(self.target_shift >= 0.0) {
            return Err(invalid("target_shift must be non-negative"));
        }
        if !(self.anomaly_shift > self.target_shift) || !self.anomaly_shift.is_finite() {
            return Err(invalid("anomaly_shift must exceed target_shift"));
        }
        if self.anomaly_clusters < 2 || self.anomaly_clusters + 4 > self.dim {
            return Err(invalid("anomaly_clusters must be at least 2 and at most dim - 4"));
        }
        if !(0.0..1.0).contains(&self.anomaly_shared) {
            return Err(invalid("anomaly_shared must lie in [0, 1)"));
        }
        if !(-1.0..=1.0).contains(&self.near_target_cosine) {
            return Err(invalid("near_target_cosine must lie in [-1, 1]"));
        }
        if !(0.0..=1.0).contains(&self.unseen_normal_fraction) {
            return Err(invalid("unseen_normal_fraction must lie in [0, 1]"));
        }
        if !(self.unseen_shift >= 0.0) {
            return Err(invalid("unseen_shift must be non-negative"));
        }
        Ok(())
    }

    pub fn machine_name(index: usize) -> String {
        format!("machine{index:02}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthData {
    pub train: Vec<Sample>,
    pub test: Vec<Sample>,
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthData> {
    cfg.validate()?;
    let mut data = SynthData {
        train: Vec::new(),
        test: Vec::new(),
    };
    for m in 0..cfg.machines {
        let seed = cfg
            .seed
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(m as u64 + 1);
        let mut gen = MachineGen::new(cfg, m, ChaCha8Rng::seed_from_u64(seed));
        gen.emit(&mut data)?;
    }
    Ok(data)
}

struct MachineGen<'a> {
    cfg: &'a SynthConfig,
    name: String,
    rng: ChaCha8Rng,
}

impl<'a> MachineGen<'a> {
    fn new(cfg: &'a SynthConfig, index: usize, rng: ChaCha8Rng) -> Self {
        Self {
            cfg,
            name: SynthConfig::machine_name(index),
            rng,
        }
    }

    fn gaussian(&mut self) -> Vec<f64> {
        (0..self.cfg.dim)
            .map(|_| StandardNormal.sample(&mut self.rng))
            .collect()
    }

    /// Random unit vector orthogonal to every vector in `basis` (itself orthonormal).
    fn direction(&mut self, basis: &[Vec<f64>]) -> Vec<f64> {
        loop {
            let mut v = self.gaussian();
            for b in basis {
                let p = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
            }
            let n = sqrt(dot(&v, &v));
            if n > 1e-9 {
                return v.into_iter().map(|x| x / n).collect();
            }
        }
    }

    fn point(&mut self, center: &[f64], spread: f64) -> Result<Embedding> {
        let z = self.gaussian();
        let v: Vec<f64> = center.iter().zip(z).map(|(c, z)| c + spread * z).collect();
        Ok(Embedding::new(v)?.normalized())
    }

    fn sample(&mut self, id: String, center: &[f64], domain: Domain, label: Label) -> Result<Sample> {
        let spread = match label {
            Label::Normal => self.cfg.spread,
            Label::Anomalous => self.cfg.anomaly_spread,
        };
        Ok(Sample {
            id,
            machine: self.name.clone(),
            domain,
            label,
            embedding: self.point(center, spread)?,
        })
    }

    fn emit(&mut self, out: &mut SynthData) -> Result<()> {
        let cfg = self.cfg;
        let shifted = |base: &[f64], dir: &[f64], by: f64| -> Vec<f64> {
            base.iter().zip(dir).map(|(b, d)| b + by * d).collect()
        };

        let source_mean = self.direction(&[]);
        let mut basis = alloc::vec![source_mean.clone()];
        let target_dir = self.direction(&basis);
        basis.push(target_dir.clone());
        let target_mean = shifted(&source_mean, &target_dir, cfg.target_shift);

        let fault_dir = self.direction(&basis);
        basis.push(fault_dir.clone());
        let blend = |a: &[f64], wa: f64, b: &[f64], wb: f64| -> Vec<f64> {
            a.iter().zip(b).map(|(x, y)| wa * x + wb * y).collect()
        };
        let mut anomaly_dirs = Vec::with_capacity(cfg.anomaly_clusters);
        for k in 0..cfg.anomaly_clusters {
            let d = self.direction(&basis);
            basis.push(d.clone());
            let own = if k == 0 {
                let c = cfg.near_target_cosine;
                blend(&target_dir, c, &d, sqrt(1.0 - c * c))
            } else {
                d
            };
            let w = cfg.anomaly_shared;
            anomaly_dirs.push(blend(&fault_dir, w, &own, sqrt(1.0 - w * w)));
        }
        let unseen_dir = self.direction(&basis);
        let unseen_mean = shifted(&source_mean, &unseen_dir, cfg.unseen_shift);

        let name = self.name.clone();
        for i in 0..cfg.source_train {
            let s = self.sample(format!("{name}_train_source_{i:04}"), &source_mean, Domain::Source, Label::Normal)?;
            out.train.push(s);
        }
        for i in 0..cfg.target_train {
            let s = self.sample(format!("{name}_train_target_{i:04}"), &target_mean, Domain::Target, Label::Normal)?;
            out.train.push(s);
        }

        let unseen = libm::round(cfg.unseen_normal_fraction * cfg.test_normal_source as f64) as usize;
        for i in 0..cfg.test_normal_source {
            let center = if i < unseen { &unseen_mean } else { &source_mean };
            let s = self.sample(format!("{name}_test_normal_source_{i:04}"), center, Domain::Source, Label::Normal)?;
            out.test.push(s);
        }
        for i in 0..cfg.test_normal_target {
            let s = self.sample(format!("{name}_test_normal_target_{i:04}"), &target_mean, Domain::Target, Label::Normal)?;
            out.test.push(s);
        }
        for i in 0..cfg.test_anomalous {
            let (domain, base) = if i % 2 == 0 {
                (Domain::Source, &source_mean)
            } else {
                (Domain::Target, &target_mean)
            };
            let center = shifted(base, &anomaly_dirs[(i / 2) % cfg.anomaly_clusters], cfg.anomaly_shift);
            let s = self.sample(format!("{name}_test_anomaly_{i:04}"), &center, domain, Label::Anomalous)?;
            out.test.push(s);
        }
        Ok(())
    }
}
