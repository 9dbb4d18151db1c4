use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rate multiplier applied to designated slow workers by
/// [`SpeedModel::with_stragglers`].
pub const STRAGGLER_RATE: f64 = 0.2;

/// How long each worker takes per block, before cost weighting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpeedModel {
    /// `shift + Exp(rate * multiplier_i)` seconds per block, drawn
    /// independently. An empty multiplier list means all ones.
    ShiftedExponential {
        shift: f64,
        rate: f64,
        #[serde(default)]
        multipliers: Vec<f64>,
    },
    /// Fixed seconds per block for each worker.
    Deterministic { times: Vec<f64> },
    /// One second per block, except that `stragglers` stop for good after
    /// `completed` blocks.
    HaltAfter {
        stragglers: BTreeSet<usize>,
        completed: usize,
    },
}

impl Default for SpeedModel {
    fn default() -> Self {
        SpeedModel::ShiftedExponential {
            shift: 1.0,
            rate: 1.0,
            multipliers: Vec::new(),
        }
    }
}

impl SpeedModel {
    /// Default shifted exponential with `slow` workers at rate
    /// [`STRAGGLER_RATE`].
    pub fn with_stragglers(n: usize, slow: &[usize]) -> Self {
        let multipliers = (0..n)
            .map(|i| {
                if slow.contains(&i) {
                    STRAGGLER_RATE
                } else {
                    1.0
                }
            })
            .collect();
        SpeedModel::ShiftedExponential {
            shift: 1.0,
            rate: 1.0,
            multipliers,
        }
    }

    pub fn check(&self, n: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidModel(m));
        match self {
            SpeedModel::ShiftedExponential {
                shift,
                rate,
                multipliers,
            } => {
                if !(shift.is_finite() && *shift >= 0.0) {
                    return bad(format!("shift must be finite and >= 0, got {shift}"));
                }
                if !(rate.is_finite() && *rate > 0.0) {
                    return bad(format!("rate must be finite and > 0, got {rate}"));
                }
                if !multipliers.is_empty() && multipliers.len() != n {
                    return bad(format!(
                        "{} rate multipliers for {n} workers",
                        multipliers.len()
                    ));
                }
                if multipliers.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
                    return bad("rate multipliers must be finite and > 0".into());
                }
            }
            SpeedModel::Deterministic { times } => {
                if times.len() != n {
                    return bad(format!("{} block times for {n} workers", times.len()));
                }
                if times.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
                    return bad("block times must be finite and > 0".into());
                }
            }
            SpeedModel::HaltAfter { stragglers, .. } => {
                if let Some(s) = stragglers.iter().find(|&&s| s >= n) {
                    return bad(format!("straggler {s} out of range for {n} workers"));
                }
            }
        }
        Ok(())
    }

    /// `durations[i][k]`: raw seconds for worker `i`'s `k`-th block, or
    /// infinity once a worker has halted.
    ///
    /// Each worker draws from its own stream keyed on `(seed, i)`, so the
    /// `k`-th draw of worker `i` is the same for every plan run with the
    /// same seed.
    pub fn raw_durations(&self, n: usize, ell: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        self.check(n)?;
        Ok(match self {
            SpeedModel::ShiftedExponential {
                shift,
                rate,
                multipliers,
            } => (0..n)
                .map(|i| {
                    let m = multipliers.get(i).copied().unwrap_or(1.0);
                    let exp = Exp::new(rate * m).expect("positive rate");
                    let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, i as u64));
                    (0..ell).map(|_| shift + exp.sample(&mut rng)).collect()
                })
                .collect(),
            SpeedModel::Deterministic { times } => times.iter().map(|&t| vec![t; ell]).collect(),
            SpeedModel::HaltAfter {
                stragglers,
                completed,
            } => (0..n)
                .map(|i| {
                    (0..ell)
                        .map(|k| {
                            if stragglers.contains(&i) && k >= *completed {
                                f64::INFINITY
                            } else {
                                1.0
                            }
                        })
                        .collect()
                })
                .collect(),
        })
    }
}

/// SplitMix64 finaliser over two words; used to derive independent seeds.
pub fn mix(a: u64, b: u64) -> u64 {
    let mut z = a ^ b
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(0x632B_E59B_D9B4_E019);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_are_shifted_and_reproducible() {
        let m = SpeedModel::default();
        let a = m.raw_durations(4, 3, 11).unwrap();
        let b = m.raw_durations(4, 3, 11).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().flatten().all(|&d| d > 1.0));
        assert_ne!(a, m.raw_durations(4, 3, 12).unwrap());
    }

    #[test]
    fn prefix_draws_do_not_depend_on_list_length() {
        let m = SpeedModel::default();
        let short = m.raw_durations(3, 2, 5).unwrap();
        let long = m.raw_durations(3, 4, 5).unwrap();
        for (s, l) in short.iter().zip(&long) {
            assert_eq!(&s[..], &l[..2]);
        }
    }

    #[test]
    fn halt_after() {
        let m = SpeedModel::HaltAfter {
            stragglers: [1].into(),
            completed: 1,
        };
        let d = m.raw_durations(2, 3, 0).unwrap();
        assert_eq!(d[0], vec![1.0; 3]);
        assert_eq!(d[1][0], 1.0);
        assert!(d[1][1].is_infinite());
    }

    #[test]
    fn rejects_bad_models() {
        let m = SpeedModel::ShiftedExponential {
            shift: 1.0,
            rate: 0.0,
            multipliers: vec![],
        };
        assert!(m.check(3).is_err());
        assert!(SpeedModel::Deterministic { times: vec![1.0] }
            .check(2)
            .is_err());
        assert!(SpeedModel::with_stragglers(3, &[0]).check(4).is_err());
        let halt = SpeedModel::HaltAfter {
            stragglers: [5].into(),
            completed: 0,
        };
        assert!(halt.check(5).is_err());
    }

    #[test]
    fn config_shape() {
        let m: SpeedModel =
            serde_json::from_str(r#"{"kind":"shifted_exponential","shift":1.0,"rate":2.0}"#)
                .unwrap();
        assert_eq!(
            m,
            SpeedModel::ShiftedExponential {
                shift: 1.0,
                rate: 2.0,
                multipliers: vec![]
            }
        );
    }
}
