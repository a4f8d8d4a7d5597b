//! Randomized property suites: generators, reference oracles, geometric
//! checks, and the runner that aggregates everything into a report.

pub mod gen;
pub mod lemmas;
pub mod oracle;
pub mod properties;
pub mod suite;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use gen::{gen_tree, TreeMode};
pub use lemmas::{check_dirac_preserved_extension, check_thales, DiracExtensionCheck, ThalesCheck};
pub use suite::{run_suite, Counterexample, PropertyRecord, SuiteReport};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub min_vertices: usize,
    pub max_vertices: usize,
    pub min_valency: usize,
    pub max_valency: usize,
    pub max_atoms: usize,
    pub denom_bound: u32,
    /// Trials per property.
    pub trials: usize,
    /// Deliberately corrupt one property, to check that failures surface.
    #[serde(default)]
    pub inject_fault: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 42,
            min_vertices: 1,
            max_vertices: 12,
            min_valency: 3,
            max_valency: 5,
            max_atoms: 5,
            denom_bound: 12,
            trials: 50,
            inject_fault: false,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if self.min_vertices == 0 || self.max_vertices == 0 || self.max_atoms == 0 {
            return bad("bounds must be positive");
        }
        if self.min_vertices > self.max_vertices {
            return bad("min_vertices exceeds max_vertices");
        }
        if self.min_valency == 0 || self.min_valency > self.max_valency {
            return bad("valency bounds must satisfy 0 < min <= max");
        }
        if self.denom_bound < 2 {
            return bad("denominator bound must be at least 2");
        }
        Ok(())
    }
}
