//! Checks for the geometric statements behind the Wasserstein isometry
//! results: midpoint (Thales) comparison for dilations, and extendability
//! of geodesics issued from Dirac masses.

use std::cmp::Ordering;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::rational::Rational;
use crate::transport::{
    check_nonextendable, dilate, extend_from_dirac, is_cyclically_monotone, w2_squared, CycleLength,
    NonExtensionWitness,
};
use crate::tree::{BranchRule, Geodesic, Tree, TreePoint};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThalesCheck {
    /// `W²(x^{1/2}·μ, δ_{(x+g)/2})`
    pub lhs_sq: Rational,
    /// `W²(μ, δ_g) / 4`
    pub rhs_sq: Rational,
    pub relation: Ordering,
}

/// Compares the dilation of `μ` from `x` with the dilation of `δ_g`.
pub fn check_thales(
    tree: &Tree,
    gamma: &Geodesic,
    x: &TreePoint,
    g: &TreePoint,
    mu: &Measure,
) -> Result<ThalesCheck> {
    if !gamma.contains(tree, x) || !gamma.contains(tree, g) {
        return Err(Error::NotOnGeodesic);
    }
    let half = Rational::new(1.into(), 2.into());
    let dilated = dilate(tree, x, mu, &half)?;
    let mid = Measure::dirac(tree.midpoint(x, g));
    let lhs_sq = w2_squared(tree, &dilated, &mid)?;
    let rhs_sq = w2_squared(tree, mu, &Measure::dirac(g.clone()))? / Rational::from_integer(4.into());
    Ok(ThalesCheck { relation: lhs_sq.cmp(&rhs_sq), lhs_sq, rhs_sq })
}

/// Points `x, g` of `gamma` on either side of the projection of `y` (which
/// must lie off `gamma`), with `d(x, g) > d(x, y)` whenever the geodesic
/// is long enough; `x, y, g` are then not aligned.
pub fn thales_configuration(tree: &Tree, gamma: &Geodesic, y: &TreePoint) -> Option<(TreePoint, TreePoint)> {
    if gamma.contains(tree, y) {
        return None;
    }
    let foot = gamma.project_coordinate(tree, y);
    let coords = gamma.coords();
    let one = Rational::one();
    let back = match gamma.start_ray() {
        Some(_) => one.clone(),
        None => (&foot - &coords[0]).min(one.clone()),
    };
    let reach = tree.distance(&gamma.project(tree, y), y) + Rational::from_integer(2.into());
    let ahead = match gamma.end_ray() {
        Some(_) => reach,
        None => (coords.last().unwrap() - &foot).min(reach),
    };
    if !back.is_positive() || !ahead.is_positive() {
        return None;
    }
    let x = gamma.point_at(tree, &(&foot - back))?;
    let g = gamma.point_at(tree, &(&foot + ahead))?;
    Some((x, g))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiracExtensionCheck {
    /// Every sampled pair satisfied `W²(μ_s, μ_t) = (t-s)² W²(μ_0, μ_1)`.
    pub geodesic_property: bool,
    pub pairs_checked: usize,
    /// Witness that the geodesic from `μ` to a Dirac at one of its atoms does
    /// not extend; `None` when `μ` is itself a Dirac mass.
    pub witness: Option<NonExtensionWitness>,
    pub passed: bool,
}

/// Times `k/4` up to `horizon`, plus the horizon itself.
pub fn time_grid(horizon: &Rational) -> Vec<Rational> {
    let quarter = Rational::new(1.into(), 4.into());
    let mut out = Vec::new();
    let mut t = Rational::zero();
    while &t <= horizon {
        out.push(t.clone());
        t += &quarter;
    }
    if out.last() != Some(horizon) {
        out.push(horizon.clone());
    }
    out
}

/// Geodesics from `δ_x` through `μ` extend (exactly) up to `horizon`, and
/// the geodesic from `μ` to a Dirac mass at one of its atoms does not
/// extend past time 1.
pub fn check_dirac_preserved_extension(
    tree: &Tree,
    x: &TreePoint,
    mu: &Measure,
    horizon: &Rational,
) -> Result<DiracExtensionCheck> {
    tree.require_complete()?;
    if horizon <= &Rational::one() {
        return Err(Error::ParameterOutOfRange(horizon.to_string()));
    }
    let times = time_grid(horizon);
    let path: Vec<Measure> = times
        .iter()
        .map(|t| extend_from_dirac(tree, x, mu, t))
        .collect::<Result<_>>()?;
    let unit = w2_squared(tree, &path[0], mu)?;
    let mut ok = true;
    let mut pairs = 0;
    for i in 0..times.len() {
        for j in i + 1..times.len() {
            let dt = &times[j] - &times[i];
            pairs += 1;
            if w2_squared(tree, &path[i], &path[j])? != &dt * &dt * &unit {
                ok = false;
            }
        }
    }
    let witness = if mu.is_dirac() {
        None
    } else {
        let y = mu.atoms()[0].point.clone();
        check_nonextendable(tree, mu, &y, &Rational::one(), BranchRule::SmallestEdge)?
    };
    let violated = match &witness {
        None => mu.is_dirac(),
        Some(w) => {
            w.cost > w.swapped_cost
                && is_cyclically_monotone(tree, &w.plan, CycleLength::Max(2))?.is_some()
        }
    };
    Ok(DiracExtensionCheck { geodesic_property: ok, pairs_checked: pairs, passed: ok && violated, witness })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use crate::tree::fixtures::*;
    use crate::tree::{geodesic_through_flag, EdgeId, Flag};

    fn xy_geodesic(t: &Tree) -> Geodesic {
        // through the x and y legs of the extended tripod
        let o = t.vertex("o").unwrap();
        geodesic_through_flag(t, &Flag::new(t, o, EdgeId(0), EdgeId(1)).unwrap()).unwrap()
    }

    #[test]
    fn thales_strict_off_geodesic() {
        let t = tripod_extended();
        let gamma = xy_geodesic(&t);
        let (x, y, z) = (v(&t, "x"), v(&t, "y"), v(&t, "z"));
        let r = check_thales(&t, &gamma, &x, &y, &Measure::dirac(z)).unwrap();
        assert_eq!((r.lhs_sq.clone(), r.rhs_sq.clone()), (int(0), int(1)));
        assert_eq!(r.relation, Ordering::Less);
    }

    #[test]
    fn thales_equality_on_geodesic() {
        let t = tripod_extended();
        let gamma = xy_geodesic(&t);
        let (x, y) = (v(&t, "x"), v(&t, "y"));
        let g = t.point(EdgeId(5), int(1)).unwrap();
        let mu = Measure::new([(y.clone(), ratio(1, 2)), (g.clone(), ratio(1, 2))]).unwrap();
        let r = check_thales(&t, &gamma, &x, &g, &mu).unwrap();
        assert_eq!(r.relation, Ordering::Equal);
        // cross-check W²(μ, δ_g) with the quantile coupling on the line
        let line: Vec<_> = mu
            .atoms()
            .iter()
            .map(|a| (gamma.coordinate(&t, &a.point).unwrap(), a.mass.clone()))
            .collect();
        let gc = gamma.coordinate(&t, &g).unwrap();
        assert_eq!(
            crate::verify::oracle::w2_on_line(&line, &[(gc, int(1))]) / int(4),
            r.rhs_sq
        );
        let r = check_thales(&t, &gamma, &x, &g, &Measure::dirac(g.clone())).unwrap();
        assert_eq!((r.lhs_sq, r.rhs_sq, r.relation), (int(0), int(0), Ordering::Equal));
        assert!(check_thales(&t, &gamma, &v(&t, "z"), &g, &mu).is_err());
    }

    #[test]
    fn branching_configuration_gives_strict_inequality() {
        let t = tripod_extended();
        let gamma = xy_geodesic(&t);
        let z = t.point(EdgeId(7), ratio(1, 2)).unwrap();
        let (x, g) = thales_configuration(&t, &gamma, &z).unwrap();
        assert!(t.distance(&x, &g) > t.distance(&x, &z));
        let r = check_thales(&t, &gamma, &x, &g, &Measure::dirac(z)).unwrap();
        assert_eq!(r.relation, Ordering::Less);
    }

    #[test]
    fn dirac_extension_on_star3() {
        let s = star3();
        let c = v(&s, "c");
        let mu = Measure::new([(v(&s, "a"), ratio(1, 3)), (s.point(EdgeId(2), ratio(1, 2)).unwrap(), ratio(2, 3))])
            .unwrap();
        let r = check_dirac_preserved_extension(&s, &c, &mu, &int(3)).unwrap();
        assert!(r.passed);
        assert!(r.witness.is_some());
        let r = check_dirac_preserved_extension(&s, &c, &Measure::dirac(v(&s, "d")), &int(3)).unwrap();
        assert!(r.passed && r.witness.is_none());
    }
}
