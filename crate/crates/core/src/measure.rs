//! Finitely supported probability measures on a tree and their projections
//! onto geodesics.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::tree::{Geodesic, Tree, TreePoint};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub point: TreePoint,
    pub mass: Rational,
}

/// Probability measure with finitely many atoms. Atoms are sorted by point
/// and have pairwise distinct locations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Measure {
    atoms: Vec<Atom>,
}

impl Measure {
    /// Merges atoms at equal locations and checks the total is exactly one.
    pub fn new(atoms: impl IntoIterator<Item = (TreePoint, Rational)>) -> Result<Measure> {
        let merged = merge(atoms)?;
        let total: Rational = merged.values().sum();
        if !total.is_one() {
            return Err(Error::MassNotOne(total.to_string()));
        }
        Ok(Measure {
            atoms: merged.into_iter().map(|(point, mass)| Atom { point, mass }).collect(),
        })
    }

    pub fn dirac(p: TreePoint) -> Measure {
        Measure { atoms: vec![Atom { point: p, mass: Rational::one() }] }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn is_dirac(&self) -> bool {
        self.atoms.len() == 1
    }

    pub fn mass_at(&self, p: &TreePoint) -> Rational {
        self.atoms
            .iter()
            .find(|a| &a.point == p)
            .map_or_else(Rational::zero, |a| a.mass.clone())
    }

    pub fn in_support(&self, p: &TreePoint) -> bool {
        self.atoms.iter().any(|a| &a.point == p)
    }

    pub fn check_on(&self, tree: &Tree) -> Result<()> {
        self.atoms.iter().try_for_each(|a| tree.check_point(&a.point))
    }
}

fn merge(
    atoms: impl IntoIterator<Item = (TreePoint, Rational)>,
) -> Result<BTreeMap<TreePoint, Rational>> {
    let mut merged: BTreeMap<TreePoint, Rational> = BTreeMap::new();
    for (point, mass) in atoms {
        if !mass.is_positive() {
            return Err(Error::NonPositiveMass(mass.to_string()));
        }
        *merged.entry(point).or_insert_with(Rational::zero) += mass;
    }
    Ok(merged)
}

/// `Σ mass · d²(x0, atom)`.
pub fn second_moment(tree: &Tree, mu: &Measure, x0: &TreePoint) -> Rational {
    mu.atoms
        .iter()
        .map(|a| {
            let d = tree.distance(x0, &a.point);
            &a.mass * &d * &d
        })
        .sum()
}

/// Image of a measure under the projection onto a geodesic, in the
/// geodesic's arc-length coordinate. Atoms sorted by coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RadonSample {
    pub geodesic: Geodesic,
    pub atoms: Vec<(Rational, Rational)>,
}

impl RadonSample {
    pub fn mass_at(&self, coord: &Rational) -> Rational {
        self.atoms
            .iter()
            .find(|(c, _)| c == coord)
            .map_or_else(Rational::zero, |(_, m)| m.clone())
    }

    pub fn total(&self) -> Rational {
        self.atoms.iter().map(|(_, m)| m).sum()
    }
}

pub fn pushforward_projection(tree: &Tree, gamma: &Geodesic, mu: &Measure) -> RadonSample {
    let mut merged: BTreeMap<Rational, Rational> = BTreeMap::new();
    for atom in &mu.atoms {
        let c = gamma.project_coordinate(tree, &atom.point);
        *merged.entry(c).or_insert_with(Rational::zero) += &atom.mass;
    }
    RadonSample { geodesic: gamma.clone(), atoms: merged.into_iter().collect() }
}

impl RadonSample {
    /// The sample as a measure on the tree.
    pub fn to_measure(&self, tree: &Tree) -> Result<Measure> {
        let atoms = self
            .atoms
            .iter()
            .map(|(c, m)| {
                self.geodesic
                    .point_at(tree, c)
                    .map(|p| (p, m.clone()))
                    .ok_or(Error::NotOnGeodesic)
            })
            .collect::<Result<Vec<_>>>()?;
        Measure::new(atoms)
    }
}
