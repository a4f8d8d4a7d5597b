//! Runs every property for a number of seeded trials and aggregates the
//! outcomes.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::properties::{self, Trial};
use super::SuiteConfig;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub trial: usize,
    /// Seed of the generator handed to the trial; rerunning the property
    /// with this seed and `config` reproduces the failure.
    pub seed: u64,
    pub config: SuiteConfig,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyRecord {
    pub name: String,
    pub trials: usize,
    pub passed: usize,
    pub failed: usize,
    /// How many passing trials carried each case tag.
    pub tags: BTreeMap<String, usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
}

impl PropertyRecord {
    /// Combines two records of the same property; associative, and order
    /// independent up to which counterexample is kept (the lower trial).
    pub fn merge(mut self, other: PropertyRecord) -> PropertyRecord {
        self.trials += other.trials;
        self.passed += other.passed;
        self.failed += other.failed;
        for (k, n) in other.tags {
            *self.tags.entry(k).or_default() += n;
        }
        self.counterexample = match (self.counterexample, other.counterexample) {
            (Some(a), Some(b)) => Some(if b.trial < a.trial { b } else { a }),
            (a, b) => a.or(b),
        };
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    pub properties: Vec<PropertyRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration_ms: Option<u128>,
}

impl SuiteReport {
    pub fn total_failures(&self) -> usize {
        self.properties.iter().map(|p| p.failed).sum()
    }

    pub fn all_passed(&self) -> bool {
        self.total_failures() == 0
    }

    pub fn property(&self, name: &str) -> Option<&PropertyRecord> {
        self.properties.iter().find(|p| p.name == name)
    }
}

/// Seed for one trial, mixed with splitmix64 so nearby inputs diverge.
pub fn trial_seed(base: u64, property: usize, trial: usize) -> u64 {
    let mut z = base
        .wrapping_add((property as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add((trial as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn run_trial(trial: Trial, config: &SuiteConfig, seed: u64) -> properties::TrialResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    trial(config, &mut rng)
}

/// Candidate smaller configurations: fewer vertices first, then smaller
/// denominators, then fewer atoms.
fn shrink_steps(config: &SuiteConfig) -> Vec<SuiteConfig> {
    let mut out = Vec::new();
    if config.max_vertices > config.min_vertices {
        let mut c = config.clone();
        c.max_vertices = (config.max_vertices / 2).max(config.min_vertices);
        out.push(c);
        let mut c = config.clone();
        c.max_vertices -= 1;
        out.push(c);
    }
    if config.denom_bound > 2 {
        let mut c = config.clone();
        c.denom_bound = (config.denom_bound / 2).max(2);
        out.push(c);
        let mut c = config.clone();
        c.denom_bound -= 1;
        out.push(c);
    }
    if config.max_atoms > 1 {
        let mut c = config.clone();
        c.max_atoms = (config.max_atoms / 2).max(1);
        out.push(c);
        let mut c = config.clone();
        c.max_atoms -= 1;
        out.push(c);
    }
    out.dedup();
    out
}

/// Seeds tried against each shrunk configuration.
const SHRINK_SEEDS: u64 = 8;

/// Greedily shrinks a failing case. Each step keeps the first smaller
/// configuration for which some nearby seed still fails.
pub fn shrink(trial: Trial, failing: Counterexample) -> Counterexample {
    let mut best = failing;
    'outer: loop {
        for candidate in shrink_steps(&best.config) {
            for k in 0..SHRINK_SEEDS {
                let seed = best.seed.wrapping_add(k);
                if let Err(message) = run_trial(trial, &candidate, seed) {
                    best = Counterexample { trial: best.trial, seed, config: candidate, message };
                    continue 'outer;
                }
            }
        }
        return best;
    }
}

fn run_property(index: usize, name: &str, trial: Trial, config: &SuiteConfig) -> PropertyRecord {
    let mut record = PropertyRecord { name: name.to_string(), ..Default::default() };
    for t in 0..config.trials {
        let seed = trial_seed(config.seed, index, t);
        record.trials += 1;
        match run_trial(trial, config, seed) {
            Ok(tags) => {
                record.passed += 1;
                for tag in tags {
                    *record.tags.entry(tag.to_string()).or_default() += 1;
                }
            }
            Err(message) => {
                record.failed += 1;
                if record.counterexample.is_none() {
                    let found = Counterexample { trial: t, seed, config: config.clone(), message };
                    record.counterexample = Some(shrink(trial, found));
                }
            }
        }
    }
    record
}

/// Runs every property `config.trials` times, one thread per property.
/// An invalid configuration is reported as a failure of every property.
pub fn run_suite(config: &SuiteConfig) -> SuiteReport {
    let start = Instant::now();
    if config.trials == 0 {
        return SuiteReport { config: config.clone(), properties: Vec::new(), duration_ms: None };
    }
    let all = properties::all();
    let properties = std::thread::scope(|scope| {
        let handles: Vec<_> = all
            .iter()
            .enumerate()
            .map(|(i, &(name, trial))| scope.spawn(move || run_property(i, name, trial, config)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("property thread panicked")).collect()
    });
    SuiteReport { config: config.clone(), properties, duration_ms: Some(start.elapsed().as_millis()) }
}
