//! Independent reference computations used to cross-check the main code
//! paths. None of these share code with the routines they check.

use num_traits::{Signed, Zero};

use crate::measure::Measure;
use crate::radon::{FlagTable, VertexFunction};
use crate::rational::Rational;
use crate::tree::{perpendicular, Tree};

/// Minimum squared cost over all vertices of the transportation polytope.
///
/// Every vertex of the polytope is the unique solution supported on some
/// spanning tree of the complete bipartite graph `K_{m,n}`; we enumerate all
/// such trees, solve each by peeling leaves, and keep the feasible minimum.
/// Exponential; meant for supports of size at most 4 or 5.
pub fn brute_force_w2(tree: &Tree, mu: &Measure, nu: &Measure) -> Rational {
    let supply: Vec<Rational> = mu.atoms().iter().map(|a| a.mass.clone()).collect();
    let demand: Vec<Rational> = nu.atoms().iter().map(|a| a.mass.clone()).collect();
    let cost: Vec<Vec<Rational>> = mu
        .atoms()
        .iter()
        .map(|a| {
            nu.atoms()
                .iter()
                .map(|b| {
                    let d = tree.distance(&a.point, &b.point);
                    &d * &d
                })
                .collect()
        })
        .collect();
    brute_force_transport(&supply, &demand, &cost).expect("balanced marginals are feasible")
}

pub fn brute_force_transport(supply: &[Rational], demand: &[Rational], cost: &[Vec<Rational>]) -> Option<Rational> {
    let (m, n) = (supply.len(), demand.len());
    let cells: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let mut best: Option<Rational> = None;
    let mut chosen = Vec::new();
    enumerate_trees(&cells, 0, m, n, &mut chosen, &mut |tree_cells| {
        if let Some(flow) = peel(tree_cells, supply, demand) {
            let c: Rational = tree_cells.iter().zip(&flow).map(|(&(i, j), f)| f * &cost[i][j]).sum();
            if best.as_ref().is_none_or(|b| &c < b) {
                best = Some(c);
            }
        }
    });
    best
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        x = parent[x];
    }
    x
}

fn acyclic(cells: &[(usize, usize)], m: usize, n: usize) -> bool {
    let mut parent: Vec<usize> = (0..m + n).collect();
    for &(i, j) in cells {
        let (a, b) = (find(&mut parent, i), find(&mut parent, m + j));
        if a == b {
            return false;
        }
        parent[a] = b;
    }
    true
}

type Visitor<'a> = dyn FnMut(&[(usize, usize)]) + 'a;

fn enumerate_trees(
    cells: &[(usize, usize)],
    from: usize,
    m: usize,
    n: usize,
    chosen: &mut Vec<(usize, usize)>,
    visit: &mut Visitor<'_>,
) {
    let need = m + n - 1;
    if chosen.len() == need {
        visit(chosen);
        return;
    }
    if cells.len() - from < need - chosen.len() {
        return;
    }
    for k in from..cells.len() {
        chosen.push(cells[k]);
        if acyclic(chosen, m, n) {
            enumerate_trees(cells, k + 1, m, n, chosen, visit);
        }
        chosen.pop();
    }
}

/// Flows on a spanning tree meeting the marginals, if all nonnegative.
fn peel(cells: &[(usize, usize)], supply: &[Rational], demand: &[Rational]) -> Option<Vec<Rational>> {
    let (m, n) = (supply.len(), demand.len());
    let mut rest: Vec<Rational> = supply.iter().chain(demand).cloned().collect();
    let mut flow: Vec<Option<Rational>> = vec![None; cells.len()];
    for _ in 0..cells.len() {
        // a node with exactly one undetermined cell fixes that cell
        let mut degree = vec![0usize; m + n];
        for (k, &(i, j)) in cells.iter().enumerate() {
            if flow[k].is_none() {
                degree[i] += 1;
                degree[m + j] += 1;
            }
        }
        let (k, node) = cells
            .iter()
            .enumerate()
            .filter(|(k, _)| flow[*k].is_none())
            .find_map(|(k, &(i, j))| {
                if degree[i] == 1 {
                    Some((k, i))
                } else if degree[m + j] == 1 {
                    Some((k, m + j))
                } else {
                    None
                }
            })?;
        let f = rest[node].clone();
        if f.is_negative() {
            return None;
        }
        let (i, j) = cells[k];
        rest[i] -= &f;
        rest[m + j] -= &f;
        flow[k] = Some(f);
    }
    if rest.iter().any(|r| !r.is_zero()) {
        return None;
    }
    Some(flow.into_iter().map(Option::unwrap).collect())
}

/// W² between measures on a line, given as sorted `(coordinate, mass)`
/// lists, by the monotone (quantile) coupling.
pub fn w2_on_line(a: &[(Rational, Rational)], b: &[(Rational, Rational)]) -> Rational {
    let mut a: Vec<_> = a.to_vec();
    let mut b: Vec<_> = b.to_vec();
    a.sort();
    b.sort();
    let (mut i, mut j) = (0, 0);
    let mut total = Rational::zero();
    while i < a.len() && j < b.len() {
        let m = a[i].1.clone().min(b[j].1.clone());
        let d = &a[i].0 - &b[j].0;
        total += &m * &d * &d;
        a[i].1 -= &m;
        b[j].1 -= &m;
        if a[i].1.is_zero() {
            i += 1;
        }
        if j < b.len() && b[j].1.is_zero() {
            j += 1;
        }
    }
    total
}

/// Transform computed by enumerating each perpendicular's vertices.
pub fn brute_force_radon(tree: &Tree, h: &VertexFunction) -> FlagTable {
    let mut table = FlagTable::default();
    for flag in crate::radon::enumerate_flags(tree) {
        let perp = perpendicular(tree, &flag).expect("enumerated flag is valid");
        table.values.insert(flag, perp.vertices.iter().map(|&v| h.get(v)).sum());
    }
    table
}

/// Squared distance from the comparison vertex `ȳ` to the point at
/// fraction `t` along side `x̄z̄` of the Euclidean triangle with
/// `|x̄ȳ| = a`, `|ȳz̄| = b`, `|x̄z̄| = c`, from explicit coordinates
/// `x̄ = (0,0)`, `z̄ = (c,0)`, `ȳ = (p, ±sqrt(a² - p²))`.
pub fn comparison_distance_sq(a: &Rational, b: &Rational, c: &Rational, t: &Rational) -> Rational {
    if c.is_zero() {
        return a * a;
    }
    let two = Rational::from_integer(2.into());
    let p = (a * a + c * c - b * b) / (&two * c);
    let height_sq = a * a - &p * &p;
    let dx = &p - t * c;
    &dx * &dx + height_sq
}
