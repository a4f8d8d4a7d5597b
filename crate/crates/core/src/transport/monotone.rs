use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::tree::Tree;

use super::{Coupling, TransportPlan};

/// Plans with more couplings than this cannot be checked exhaustively.
pub const EXHAUSTIVE_LIMIT: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CycleLength {
    /// Cycles of length 2 up to the given bound.
    Max(usize),
    /// Every cycle length up to the support size.
    Exhaustive,
}

impl Default for CycleLength {
    fn default() -> Self {
        CycleLength::Max(2)
    }
}

/// Couplings `c_0 .. c_{k-1}` whose cyclic target shift `src_i -> dst_{i+1}`
/// is strictly cheaper.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleViolation {
    pub cycle: Vec<Coupling>,
    pub cost: Rational,
    pub shifted_cost: Rational,
}

/// Searches the plan's support for a cycle violating cyclical monotonicity.
/// `Ok(None)` means no violating cycle of the searched lengths exists.
pub fn is_cyclically_monotone(
    tree: &Tree,
    plan: &TransportPlan,
    max_len: CycleLength,
) -> Result<Option<CycleViolation>> {
    let pairs = plan.couplings();
    let k = pairs.len();
    let bound = match max_len {
        CycleLength::Max(n) => n.min(k),
        CycleLength::Exhaustive if k > EXHAUSTIVE_LIMIT => {
            return Err(Error::SupportTooLarge { size: k, limit: EXHAUSTIVE_LIMIT })
        }
        CycleLength::Exhaustive => k,
    };
    if bound < 2 {
        return Ok(None);
    }
    let cost: Vec<Vec<Rational>> = pairs
        .iter()
        .map(|a| {
            pairs
                .iter()
                .map(|b| {
                    let d = tree.distance(&a.src, &b.dst);
                    &d * &d
                })
                .collect()
        })
        .collect();

    for len in 2..=bound {
        // cycles listed once per rotation: the smallest index goes first
        for first in 0..k {
            let mut cycle = vec![first];
            let mut used = vec![false; k];
            used[first] = true;
            if let Some(found) = search(&cost, &mut cycle, &mut used, len) {
                let current: Rational = found.iter().map(|&i| &cost[i][i]).sum();
                let shifted: Rational =
                    (0..len).map(|j| &cost[found[j]][found[(j + 1) % len]]).sum();
                return Ok(Some(CycleViolation {
                    cycle: found.iter().map(|&i| pairs[i].clone()).collect(),
                    cost: current,
                    shifted_cost: shifted,
                }));
            }
        }
    }
    Ok(None)
}

fn search(cost: &[Vec<Rational>], cycle: &mut Vec<usize>, used: &mut [bool], len: usize) -> Option<Vec<usize>> {
    if cycle.len() == len {
        let current: Rational = cycle.iter().map(|&i| &cost[i][i]).sum();
        let shifted: Rational = (0..len).map(|j| &cost[cycle[j]][cycle[(j + 1) % len]]).sum();
        return (shifted < current).then(|| cycle.clone());
    }
    for next in cycle[0] + 1..cost.len() {
        if used[next] {
            continue;
        }
        used[next] = true;
        cycle.push(next);
        let found = search(cost, cycle, used, len);
        cycle.pop();
        used[next] = false;
        if found.is_some() {
            return found;
        }
    }
    None
}
