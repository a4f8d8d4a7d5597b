//! Exact quadratic optimal transport on a tree.

mod monotone;
mod simplex;

pub use monotone::{is_cyclically_monotone, CycleLength, CycleViolation, EXHAUSTIVE_LIMIT};
pub use simplex::{solve_transportation, TransportSolution};

use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::rational::Rational;
use crate::tree::{BranchRule, Path, Tree, TreePoint};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coupling {
    pub src: TreePoint,
    pub dst: TreePoint,
    pub mass: Rational,
}

/// A finitely supported coupling with its cached squared cost
/// `Σ mass · d²(src, dst)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransportPlan {
    couplings: Vec<Coupling>,
    cost: Rational,
}

impl TransportPlan {
    pub fn new(tree: &Tree, couplings: Vec<Coupling>) -> TransportPlan {
        let cost = couplings
            .iter()
            .map(|c| {
                let d = tree.distance(&c.src, &c.dst);
                &c.mass * &d * &d
            })
            .sum();
        TransportPlan { couplings, cost }
    }

    pub fn couplings(&self) -> &[Coupling] {
        &self.couplings
    }

    pub fn squared_cost(&self) -> &Rational {
        &self.cost
    }

    pub fn source(&self) -> Result<Measure> {
        Measure::new(self.couplings.iter().map(|c| (c.src.clone(), c.mass.clone())))
    }

    pub fn target(&self) -> Result<Measure> {
        Measure::new(self.couplings.iter().map(|c| (c.dst.clone(), c.mass.clone())))
    }
}

fn squared_distances(tree: &Tree, mu: &Measure, nu: &Measure) -> Vec<Vec<Rational>> {
    mu.atoms()
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
        .collect()
}

/// Optimal plan for the squared tree distance.
pub fn optimal_plan(tree: &Tree, mu: &Measure, nu: &Measure) -> Result<TransportPlan> {
    let cost = squared_distances(tree, mu, nu);
    let supply: Vec<Rational> = mu.atoms().iter().map(|a| a.mass.clone()).collect();
    let demand: Vec<Rational> = nu.atoms().iter().map(|a| a.mass.clone()).collect();
    let sol = solve_transportation(&supply, &demand, &cost)?;
    let mut couplings = Vec::new();
    for (i, a) in mu.atoms().iter().enumerate() {
        for (j, b) in nu.atoms().iter().enumerate() {
            if sol.flow[i][j].is_positive() {
                couplings.push(Coupling {
                    src: a.point.clone(),
                    dst: b.point.clone(),
                    mass: sol.flow[i][j].clone(),
                });
            }
        }
    }
    let plan = TransportPlan { couplings, cost: sol.cost };
    debug_assert_eq!(plan, TransportPlan::new(tree, plan.couplings.clone()));
    Ok(plan)
}

/// Squared Wasserstein distance `W²(μ, ν)`.
pub fn w2_squared(tree: &Tree, mu: &Measure, nu: &Measure) -> Result<Rational> {
    if mu.is_dirac() || nu.is_dirac() {
        // a single plan exists
        let (x, other) = if mu.is_dirac() { (mu, nu) } else { (nu, mu) };
        return Ok(dirac_plan(tree, &x.atoms()[0].point, other).cost);
    }
    Ok(optimal_plan(tree, mu, nu)?.cost)
}

/// The only plan from `δ_x` to `mu`.
pub fn dirac_plan(tree: &Tree, x: &TreePoint, mu: &Measure) -> TransportPlan {
    TransportPlan::new(
        tree,
        mu.atoms()
            .iter()
            .map(|a| Coupling { src: x.clone(), dst: a.point.clone(), mass: a.mass.clone() })
            .collect(),
    )
}

fn check_unit(t: &Rational) -> Result<()> {
    if t.is_negative() || t > &Rational::one() {
        return Err(Error::ParameterOutOfRange(t.to_string()));
    }
    Ok(())
}

/// Displacement interpolation: the measure-valued geodesic that moves each
/// coupled mass along its tree path at constant speed.
#[derive(Clone, Debug)]
pub struct WassersteinGeodesic {
    plan: TransportPlan,
    paths: Vec<Path>,
}

impl WassersteinGeodesic {
    pub fn new(tree: &Tree, plan: TransportPlan) -> WassersteinGeodesic {
        let paths = plan.couplings.iter().map(|c| tree.path(&c.src, &c.dst)).collect();
        WassersteinGeodesic { plan, paths }
    }

    pub fn plan(&self) -> &TransportPlan {
        &self.plan
    }

    pub fn at(&self, tree: &Tree, t: &Rational) -> Result<Measure> {
        check_unit(t)?;
        Measure::new(self.plan.couplings.iter().zip(&self.paths).map(|(c, path)| {
            (path.point_at(tree, &(t * &path.length)), c.mass.clone())
        }))
    }

    /// Evaluates past `t = 1` by continuing every path with `rule`.
    pub fn extended_at(&self, tree: &Tree, t: &Rational, rule: BranchRule) -> Result<Measure> {
        if t.is_negative() {
            return Err(Error::ParameterOutOfRange(t.to_string()));
        }
        if t <= &Rational::one() {
            return self.at(tree, t);
        }
        let over = t - Rational::one();
        let atoms = self
            .plan
            .couplings
            .iter()
            .zip(&self.paths)
            .map(|(c, path)| Ok((path.extend(tree, &(&over * &path.length), rule)?, c.mass.clone())))
            .collect::<Result<Vec<_>>>()?;
        Measure::new(atoms)
    }
}

pub fn interpolate(tree: &Tree, plan: &TransportPlan, t: &Rational) -> Result<Measure> {
    WassersteinGeodesic::new(tree, plan.clone()).at(tree, t)
}

/// `x^t · μ`: the geodesic from `δ_x` to `μ` at time `t`.
pub fn dilate(tree: &Tree, x: &TreePoint, mu: &Measure, t: &Rational) -> Result<Measure> {
    check_unit(t)?;
    interpolate(tree, &dirac_plan(tree, x, mu), t)
}

/// Geodesic from `δ_x` through `μ` evaluated at any `t >= 0`; past `t = 1`
/// each atom keeps going along its path, turning at vertices by the
/// smallest-edge rule.
pub fn extend_from_dirac(tree: &Tree, x: &TreePoint, mu: &Measure, t: &Rational) -> Result<Measure> {
    extend_from_dirac_with(tree, x, mu, t, BranchRule::SmallestEdge)
}

pub fn extend_from_dirac_with(
    tree: &Tree,
    x: &TreePoint,
    mu: &Measure,
    t: &Rational,
    rule: BranchRule,
) -> Result<Measure> {
    tree.require_complete()?;
    WassersteinGeodesic::new(tree, dirac_plan(tree, x, mu)).extended_at(tree, t, rule)
}

/// The two-cycle showing that a geodesic from `μ0` to `δ_y` cannot be
/// continued: the continued plan sends `y'` to `y''` and keeps `y` fixed,
/// while swapping targets is strictly cheaper.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonExtensionWitness {
    /// Plan from `μ0` to the continued measure at time `1 + ε`.
    pub plan: TransportPlan,
    pub y_prime: TreePoint,
    pub y_second: TreePoint,
    pub y: TreePoint,
    /// `d²(y', y'') + d²(y, y)`
    pub cost: Rational,
    /// `d²(y', y) + d²(y, y'')`
    pub swapped_cost: Rational,
}

/// Continues the geodesic `μ0 → δ_y` to time `1 + eps` along the paths of
/// its unique plan (turning by `rule`) and returns the cyclical-monotonicity
/// violation of the continued plan, or `None` when `eps = 0`.
pub fn check_nonextendable(
    tree: &Tree,
    mu0: &Measure,
    y: &TreePoint,
    eps: &Rational,
    rule: BranchRule,
) -> Result<Option<NonExtensionWitness>> {
    if !mu0.in_support(y) {
        return Err(Error::NotInSupport);
    }
    if mu0.is_dirac() {
        return Err(Error::DiracMeasure);
    }
    if eps.is_negative() {
        return Err(Error::ParameterOutOfRange(eps.to_string()));
    }
    let mut couplings = Vec::new();
    for atom in mu0.atoms() {
        let path = tree.path(&atom.point, y);
        let dst = path.extend(tree, &(eps * &path.length), rule)?;
        couplings.push(Coupling { src: atom.point.clone(), dst, mass: atom.mass.clone() });
    }
    let plan = TransportPlan::new(tree, couplings);
    let moving = plan.couplings.iter().find(|c| &c.src != y).expect("non-Dirac measure");
    let sq = |a: &TreePoint, b: &TreePoint| {
        let d = tree.distance(a, b);
        &d * &d
    };
    let cost = sq(&moving.src, &moving.dst) + sq(y, y);
    let swapped_cost = sq(&moving.src, y) + sq(y, &moving.dst);
    if cost <= swapped_cost {
        return Ok(None);
    }
    Ok(Some(NonExtensionWitness {
        y_prime: moving.src.clone(),
        y_second: moving.dst.clone(),
        y: y.clone(),
        plan,
        cost,
        swapped_cost,
    }))
}

/// `(1 + ε)² > 1 + ε²`, i.e. `2ε > 0`.
pub fn convexity_gap(eps: &Rational) -> Rational {
    let one = Rational::one();
    let lhs = (&one + eps) * (&one + eps);
    lhs - (&one + eps * eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use crate::tree::fixtures::*;
    use crate::tree::EdgeId;

    fn half_half(a: TreePoint, b: TreePoint) -> Measure {
        Measure::new([(a, ratio(1, 2)), (b, ratio(1, 2))]).unwrap()
    }

    #[test]
    fn w2_examples_on_tripod() {
        let t = tripod();
        let (o, x, y, z) = (v(&t, "o"), v(&t, "x"), v(&t, "y"), v(&t, "z"));
        let dx = Measure::dirac(x.clone());
        assert_eq!(w2_squared(&t, &dx, &half_half(y.clone(), z.clone())).unwrap(), int(4));
        assert_eq!(w2_squared(&t, &half_half(x.clone(), y.clone()), &Measure::dirac(o)).unwrap(), int(1));
        let mu = half_half(x.clone(), z.clone());
        assert_eq!(w2_squared(&t, &mu, &mu).unwrap(), int(0));
        assert_eq!(w2_squared(&t, &dx, &Measure::dirac(y)).unwrap(), int(4));
    }

    #[test]
    fn plans_have_exact_marginals() {
        let t = tripod();
        let (x, y, z) = (v(&t, "x"), v(&t, "y"), v(&t, "z"));
        let mu = half_half(x.clone(), y.clone());
        let nu = half_half(y, z);
        let plan = optimal_plan(&t, &mu, &nu).unwrap();
        assert_eq!(plan.source().unwrap(), mu);
        assert_eq!(plan.target().unwrap(), nu);
        // x -> z and y -> y, or x -> y and y -> z: both cost 2
        assert_eq!(plan.squared_cost(), &int(2));
        let id = optimal_plan(&t, &mu, &mu).unwrap();
        assert!(id.couplings().iter().all(|c| c.src == c.dst));
        let from_dirac = optimal_plan(&t, &Measure::dirac(x.clone()), &mu).unwrap();
        assert!(from_dirac.couplings().iter().all(|c| c.src == x));
    }

    #[test]
    fn interpolation_examples() {
        let t = tripod();
        let (o, x, y, z) = (v(&t, "o"), v(&t, "x"), v(&t, "y"), v(&t, "z"));
        let plan = dirac_plan(&t, &x, &Measure::dirac(y.clone()));
        assert_eq!(interpolate(&t, &plan, &ratio(1, 2)).unwrap(), Measure::dirac(o.clone()));
        assert_eq!(interpolate(&t, &plan, &int(0)).unwrap(), Measure::dirac(x.clone()));
        assert_eq!(interpolate(&t, &plan, &int(1)).unwrap(), Measure::dirac(y.clone()));
        let spread = dirac_plan(&t, &x, &half_half(y, z));
        assert_eq!(interpolate(&t, &spread, &ratio(1, 2)).unwrap(), Measure::dirac(o));
        assert!(interpolate(&t, &plan, &ratio(3, 2)).is_err());
    }

    #[test]
    fn dilation_examples() {
        let s = star3();
        // tip beyond a on ray 3, and tip beyond d on ray 7, each 1 past the leg end
        let x = s.point(EdgeId(3), int(1)).unwrap();
        let far = s.point(EdgeId(7), int(1)).unwrap();
        let mu = Measure::dirac(far.clone());
        assert_eq!(dilate(&s, &x, &mu, &ratio(1, 2)).unwrap(), Measure::dirac(v(&s, "c")));
        assert_eq!(dilate(&s, &x, &mu, &int(0)).unwrap(), Measure::dirac(x.clone()));
        assert_eq!(dilate(&s, &x, &mu, &int(1)).unwrap(), mu);
    }

    #[test]
    fn extension_from_center_of_star3() {
        let s = star3();
        let c = v(&s, "c");
        let mu = half_half(v(&s, "a"), v(&s, "b"));
        let mu2 = extend_from_dirac(&s, &c, &mu, &int(2)).unwrap();
        let expected = half_half(
            s.point(EdgeId(3), int(1)).unwrap(),
            s.point(EdgeId(5), int(1)).unwrap(),
        );
        assert_eq!(mu2, expected);
        let c0 = Measure::dirac(c.clone());
        assert_eq!(
            w2_squared(&s, &c0, &mu2).unwrap(),
            int(4) * w2_squared(&s, &c0, &mu).unwrap()
        );
        assert_eq!(extend_from_dirac(&s, &c, &mu, &int(1)).unwrap(), mu);
        assert!(extend_from_dirac(&tripod(), &v(&tripod(), "o"), &mu, &int(2)).is_err());
    }

    #[test]
    fn dirac_moves_at_constant_speed_along_ray() {
        let s = star3();
        let c = v(&s, "c");
        let g = Measure::dirac(v(&s, "d"));
        for k in 0..8 {
            let t = ratio(k, 2);
            let m = extend_from_dirac(&s, &c, &g, &t).unwrap();
            assert!(m.is_dirac());
            assert_eq!(s.distance(&c, &m.atoms()[0].point), t);
        }
    }

    #[test]
    fn nonextension_witness_on_extended_tripod() {
        let t = tripod_extended();
        let (x, y) = (v(&t, "x"), v(&t, "y"));
        let mu0 = half_half(x.clone(), y.clone());
        let w = check_nonextendable(&t, &mu0, &y, &int(1), BranchRule::SmallestEdge)
            .unwrap()
            .unwrap();
        assert_eq!(w.y_prime, x);
        assert_eq!(w.cost, int(16));
        assert_eq!(w.swapped_cost, int(8));
        assert!(is_cyclically_monotone(&t, &w.plan, CycleLength::Max(2)).unwrap().is_some());
        assert_eq!(check_nonextendable(&t, &mu0, &y, &int(0), BranchRule::SmallestEdge).unwrap(), None);
        assert_eq!(
            check_nonextendable(&t, &Measure::dirac(y.clone()), &y, &int(1), BranchRule::SmallestEdge)
                .unwrap_err(),
            Error::DiracMeasure
        );
        assert_eq!(
            check_nonextendable(&t, &mu0, &v(&t, "z"), &int(1), BranchRule::SmallestEdge).unwrap_err(),
            Error::NotInSupport
        );
    }

    #[test]
    fn convexity_gap_is_twice_eps() {
        for k in 1..10 {
            assert_eq!(convexity_gap(&ratio(k, 7)), ratio(2 * k, 7));
        }
    }
}
