//! Transportation simplex over exact rationals.
//!
//! Starts from the north-west corner basis and pivots with Bland's rule:
//! the entering cell is the first non-basic cell (row-major) with negative
//! reduced cost, and ties for the leaving cell go to the smallest index.
//! Degenerate bases keep their zero-flow cells so the basis is always a
//! spanning tree of the bipartite row/column graph.

use std::collections::VecDeque;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Optimal flows `flow[i][j]` and their total cost.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransportSolution {
    pub flow: Vec<Vec<Rational>>,
    pub cost: Rational,
}

pub fn solve_transportation(
    supply: &[Rational],
    demand: &[Rational],
    cost: &[Vec<Rational>],
) -> Result<TransportSolution> {
    let (m, n) = (supply.len(), demand.len());
    if m == 0 || n == 0 {
        return Err(Error::Solver("empty marginal".into()));
    }
    if supply.iter().sum::<Rational>() != demand.iter().sum::<Rational>() {
        return Err(Error::Solver("marginals have different totals".into()));
    }
    if cost.len() != m || cost.iter().any(|row| row.len() != n) {
        return Err(Error::Solver("cost matrix shape mismatch".into()));
    }

    let mut flow = vec![vec![Rational::zero(); n]; m];
    let mut basic = vec![vec![false; n]; m];

    // north-west corner
    let mut a = supply.to_vec();
    let mut b = demand.to_vec();
    let (mut i, mut j) = (0, 0);
    loop {
        let x = a[i].clone().min(b[j].clone());
        flow[i][j] = x.clone();
        basic[i][j] = true;
        a[i] -= &x;
        b[j] -= &x;
        if i == m - 1 && j == n - 1 {
            break;
        }
        if (a[i].is_zero() && i < m - 1) || j == n - 1 {
            i += 1;
        } else {
            j += 1;
        }
    }

    loop {
        let (u, v) = potentials(&basic, cost);
        let entering = (0..m)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .find(|&(i, j)| !basic[i][j] && (&cost[i][j] - &u[i] - &v[j]).is_negative());
        let Some((ei, ej)) = entering else { break };

        let cycle = basis_path(&basic, ej, ei)
            .ok_or_else(|| Error::Solver("basis is not a spanning tree".into()))?;
        // cycle[0] is the entering cell (+), then alternating -, +, ...
        let mut cells = vec![(ei, ej)];
        cells.extend(cycle);
        let (li, lj) = cells
            .iter()
            .skip(1)
            .step_by(2)
            .min_by(|&&(ai, aj), &&(bi, bj)| {
                flow[ai][aj].cmp(&flow[bi][bj]).then((ai * n + aj).cmp(&(bi * n + bj)))
            })
            .copied()
            .unwrap();
        let theta = flow[li][lj].clone();
        for (k, &(ci, cj)) in cells.iter().enumerate() {
            if k % 2 == 0 {
                flow[ci][cj] += &theta;
            } else {
                flow[ci][cj] -= &theta;
            }
        }
        basic[ei][ej] = true;
        basic[li][lj] = false;
    }

    let cost_total = (0..m)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| &flow[i][j] * &cost[i][j])
        .sum();
    Ok(TransportSolution { flow, cost: cost_total })
}

/// Dual potentials with `u[0] = 0` and `u[i] + v[j] = c[i][j]` on the basis.
fn potentials(basic: &[Vec<bool>], cost: &[Vec<Rational>]) -> (Vec<Rational>, Vec<Rational>) {
    let (m, n) = (basic.len(), basic[0].len());
    let mut u: Vec<Option<Rational>> = vec![None; m];
    let mut v: Vec<Option<Rational>> = vec![None; n];
    u[0] = Some(Rational::zero());
    let mut queue = VecDeque::from([(true, 0usize)]);
    while let Some((is_row, k)) = queue.pop_front() {
        if is_row {
            for j in 0..n {
                if basic[k][j] && v[j].is_none() {
                    v[j] = Some(&cost[k][j] - u[k].as_ref().unwrap());
                    queue.push_back((false, j));
                }
            }
        } else {
            for i in 0..m {
                if basic[i][k] && u[i].is_none() {
                    u[i] = Some(&cost[i][k] - v[k].as_ref().unwrap());
                    queue.push_back((true, i));
                }
            }
        }
    }
    (
        u.into_iter().map(|x| x.expect("connected basis")).collect(),
        v.into_iter().map(|x| x.expect("connected basis")).collect(),
    )
}

/// Basis cells on the tree path from column `col` to row `row`.
fn basis_path(basic: &[Vec<bool>], col: usize, row: usize) -> Option<Vec<(usize, usize)>> {
    let (m, n) = (basic.len(), basic[0].len());
    // nodes: rows 0..m, columns m..m+n
    let mut prev: Vec<Option<usize>> = vec![None; m + n];
    let start = m + col;
    let target = row;
    let mut seen = vec![false; m + n];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(node) = queue.pop_front() {
        if node == target {
            break;
        }
        let neighbours: Vec<usize> = if node < m {
            (0..n).filter(|&j| basic[node][j]).map(|j| m + j).collect()
        } else {
            (0..m).filter(|&i| basic[i][node - m]).collect()
        };
        for next in neighbours {
            if !seen[next] {
                seen[next] = true;
                prev[next] = Some(node);
                queue.push_back(next);
            }
        }
    }
    if !seen[target] {
        return None;
    }
    let mut cells = Vec::new();
    let mut node = target;
    let mut chain = vec![node];
    while let Some(p) = prev[node] {
        chain.push(p);
        node = p;
    }
    // chain runs row .. col; we want cells from the column side first
    chain.reverse();
    for pair in chain.windows(2) {
        let (x, y) = (pair[0], pair[1]);
        let cell = if x < m { (x, y - m) } else { (y, x - m) };
        cells.push(cell);
    }
    Some(cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn textbook_instance() {
        // supplies 20, 30, 25; demands 10, 35, 30; optimum 735 (checked with an LP solver)
        let cost = vec![ints(&[8, 6, 10]), ints(&[9, 12, 13]), ints(&[14, 9, 16])];
        let sol = solve_transportation(&ints(&[20, 30, 25]), &ints(&[10, 35, 30]), &cost).unwrap();
        for (i, s) in [20, 30, 25].iter().enumerate() {
            assert_eq!(sol.flow[i].iter().sum::<Rational>(), int(*s));
        }
        assert_eq!(sol.cost, int(735));
    }

    #[test]
    fn degenerate_square_assignment() {
        let half = ratio(1, 2);
        let cost = vec![ints(&[0, 4]), ints(&[4, 0])];
        let sol =
            solve_transportation(&[half.clone(), half.clone()], &[half.clone(), half], &cost).unwrap();
        assert_eq!(sol.cost, int(0));
    }

    #[test]
    fn rejects_unbalanced() {
        assert!(solve_transportation(&ints(&[1]), &ints(&[2]), &[ints(&[0])]).is_err());
    }
}
