//! Stable per-cell seed derivation.

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

struct Fnv(u64);

impl Fnv {
    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(FNV_PRIME);
        }
    }

    /// Length-prefixed so adjacent fields cannot run together.
    fn field(&mut self, bytes: &[u8]) {
        self.write(&(bytes.len() as u64).to_le_bytes());
        self.write(bytes);
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for one (machine, strategy, budget, trial) cell. Independent of
/// execution order and platform.
pub fn trial_seed(base: u64, machine: &str, strategy: &str, budget: f64, trial: usize) -> u64 {
    let mut h = Fnv(FNV_OFFSET);
    h.field(&base.to_le_bytes());
    h.field(machine.as_bytes());
    h.field(strategy.as_bytes());
    h.field(&budget.to_bits().to_le_bytes());
    h.field(&(trial as u64).to_le_bytes());
    splitmix64(h.0)
}

/// Seed for per-machine work shared by every cell, such as k-means.
pub fn machine_seed(base: u64, machine: &str) -> u64 {
    let mut h = Fnv(FNV_OFFSET);
    h.field(&base.to_le_bytes());
    h.field(b"reference");
    h.field(machine.as_bytes());
    splitmix64(h.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn stable_values() {
        assert_eq!(
            trial_seed(0, "machine00", "hybrid", 0.1, 0),
            trial_seed(0, "machine00", "hybrid", 0.1, 0)
        );
        assert_ne!(
            trial_seed(0, "machine00", "hybrid", 0.1, 0),
            trial_seed(1, "machine00", "hybrid", 0.1, 0)
        );
    }

    #[test]
    fn default_grid_has_no_collisions() {
        for base in [0u64, 1, 42, u64::MAX] {
            let mut seen = HashSet::new();
            for m in 0..7 {
                let machine = format!("machine{m:02}");
                for s in ["hybrid", "random", "qbc"] {
                    for b in [0.0, 0.1, 0.2, 0.3] {
                        for t in 0..10 {
                            assert!(seen.insert(trial_seed(base, &machine, s, b, t)));
                        }
                    }
                }
                assert!(seen.insert(machine_seed(base, &machine)));
            }
        }
    }
}
