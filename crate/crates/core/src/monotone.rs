//! Cyclical-monotonicity checking for finite point sets via competitor
//! search, plus the closed-form four-point criterion.
//!
//! A competitor of the uniform measure on a finite set shares all three
//! two-dimensional projections. Any competitor measure is supported on the
//! coordinate grid generated by the set — the projections force every atom
//! onto existing coordinate values — so maximizing over measures on that
//! grid is a complete search, and it is a linear program.

use crate::lp::{build_model, xyz_cost_tensor, LpStatus, MarginalSpec, Sense};
use crate::measure::GridMeasure3;
use crate::rational::rat;
use crate::{Error, Rational, Result};
use num_traits::Zero;

/// A finite set of distinct rational points in R^3, carrying the uniform
/// measure with one atom per point.
#[derive(Clone, Debug)]
pub struct PointSet3 {
    points: Vec<[Rational; 3]>,
}

impl PointSet3 {
    pub fn new(points: Vec<[Rational; 3]>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("empty point set".into()));
        }
        for (i, p) in points.iter().enumerate() {
            for q in points.iter().skip(i + 1) {
                if p == q {
                    return Err(Error::InvalidInput(format!(
                        "duplicate point ({}, {}, {})",
                        p[0], p[1], p[2]
                    )));
                }
            }
        }
        Ok(PointSet3 { points })
    }

    pub fn points(&self) -> &[[Rational; 3]] {
        &self.points
    }

    fn axis_values(&self, axis: usize) -> Vec<Rational> {
        let mut vals: Vec<Rational> = self.points.iter().map(|p| p[axis].clone()).collect();
        vals.sort();
        vals.dedup();
        vals
    }

    /// The uniform measure on the set, on its generated coordinate grid.
    pub fn uniform_measure(&self) -> Result<GridMeasure3> {
        let xs = self.axis_values(0);
        let ys = self.axis_values(1);
        let zs = self.axis_values(2);
        let w = rat(1, self.points.len() as i64);
        let atoms: Vec<([usize; 3], Rational)> = self
            .points
            .iter()
            .map(|p| {
                let i = xs.binary_search(&p[0]).expect("own coordinate");
                let j = ys.binary_search(&p[1]).expect("own coordinate");
                let k = zs.binary_search(&p[2]).expect("own coordinate");
                ([i, j, k], w.clone())
            })
            .collect();
        GridMeasure3::from_atoms(xs, ys, zs, &atoms)
    }
}

/// Best competitor value and witness for the cost `xyz`.
#[derive(Clone, Debug)]
pub struct CompetitorReport {
    pub base_cost: Rational,
    pub optimum: Rational,
    pub witness: GridMeasure3,
    /// Whether the base measure already attains the optimum.
    pub monotone: bool,
}

/// Solve the competitor problem for the uniform measure on `g`: optimize
/// `Σ xyz` over all measures on the generated grid sharing its three
/// projections. `Sense::Max` is the paper's cyclical-monotonicity sense;
/// `Sense::Min` probes optimality for the minimization problem.
pub fn competitor_optimum(g: &PointSet3, sense: Sense) -> Result<CompetitorReport> {
    let base = g.uniform_measure()?;
    let spec = MarginalSpec::from_measure(&base)?;
    let (xs, ys, zs) = base.coords();
    let cost = xyz_cost_tensor(xs, ys, zs);
    let model = build_model(&spec, &cost, sense)?;
    let sol = model.solve()?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Internal(format!(
            "competitor LP ended {:?} though the base measure is feasible",
            sol.status
        )));
    }
    let optimum = sol.objective.clone().expect("optimal");
    let witness = GridMeasure3::from_atoms(
        xs.to_vec(),
        ys.to_vec(),
        zs.to_vec(),
        &sol.atoms(&[xs.len(), ys.len(), zs.len()])
            .into_iter()
            .map(|(idx, w)| ([idx[0], idx[1], idx[2]], w))
            .collect::<Vec<_>>(),
    )?;
    let base_cost = base.plan_cost(crate::measure::CostRule::Left)?;
    let monotone = optimum == base_cost;
    Ok(CompetitorReport {
        base_cost,
        optimum,
        witness,
        monotone,
    })
}

/// Whether no competitor beats the uniform measure on `g`; when one does,
/// returns it.
pub fn is_cyclically_monotone(
    g: &PointSet3,
    sense: Sense,
) -> Result<(bool, Option<GridMeasure3>)> {
    let report = competitor_optimum(g, sense)?;
    if report.monotone {
        Ok((true, None))
    } else {
        Ok((false, Some(report.witness)))
    }
}

/// Closed-form criterion for the four-point configuration
/// `{(a1,b1,c2), (a1,b2,c1), (a2,b1,c1), (a2,b2,c2)}`: it is cyclically
/// monotone for the maximization of `xyz` iff
/// `(a1-a2)(b1-b2)(c1-c2) <= 0`.
pub fn four_point_criterion(
    a1: &Rational,
    a2: &Rational,
    b1: &Rational,
    b2: &Rational,
    c1: &Rational,
    c2: &Rational,
) -> Result<bool> {
    if a1 == a2 || b1 == b2 || c1 == c2 {
        return Err(Error::DegenerateConfiguration(
            "coordinate pairs must be distinct".into(),
        ));
    }
    let product = (a1 - a2) * (b1 - b2) * (c1 - c2);
    Ok(product <= Rational::zero())
}

/// The four-point configuration as a point set.
pub fn four_point_set(
    a1: &Rational,
    a2: &Rational,
    b1: &Rational,
    b2: &Rational,
    c1: &Rational,
    c2: &Rational,
) -> Result<PointSet3> {
    PointSet3::new(vec![
        [a1.clone(), b1.clone(), c2.clone()],
        [a1.clone(), b2.clone(), c1.clone()],
        [a2.clone(), b1.clone(), c1.clone()],
        [a2.clone(), b2.clone(), c2.clone()],
    ])
}

/// A four-point ("box parity class") configuration: the sorted coordinate
/// pairs of its bounding box, and which parity class of the box it is.
#[derive(Clone, Debug)]
pub struct BoxClass {
    pub x_pair: [Rational; 2],
    pub y_pair: [Rational; 2],
    pub z_pair: [Rational; 2],
    /// Whether the set contains the all-low corner `(u1, v1, w1)`.
    pub even: bool,
}

/// Classify a 4-subset of grid atoms as a four-point configuration: each
/// coordinate takes exactly two values, twice each, and any two points
/// differ in exactly two coordinates.
pub fn box_parity_class(points: &[[Rational; 3]; 4]) -> Option<BoxClass> {
    let mut pairs: Vec<[Rational; 2]> = Vec::new();
    for axis in 0..3 {
        let mut vals: Vec<Rational> = points.iter().map(|p| p[axis].clone()).collect();
        vals.sort();
        if vals[0] == vals[1] && vals[2] == vals[3] && vals[1] != vals[2] {
            pairs.push([vals[0].clone(), vals[3].clone()]);
        } else {
            return None;
        }
    }
    for i in 0..4 {
        for j in (i + 1)..4 {
            let differing = (0..3).filter(|&a| points[i][a] != points[j][a]).count();
            if differing != 2 {
                return None;
            }
        }
    }
    let even = points
        .iter()
        .any(|p| p[0] == pairs[0][0] && p[1] == pairs[1][0] && p[2] == pairs[2][0]);
    Some(BoxClass {
        x_pair: pairs[0].clone(),
        y_pair: pairs[1].clone(),
        z_pair: pairs[2].clone(),
        even,
    })
}

/// Every four-point-shaped subset of an optimal support must be the class
/// favored by the optimization sense: the even parity class of its box for
/// minimization, the odd one for maximization.
pub fn support_is_four_point_monotone(measure: &GridMeasure3, sense: Sense) -> bool {
    let (xs, ys, zs) = measure.coords();
    let pts: Vec<[Rational; 3]> = measure
        .atoms()
        .map(|([i, j, k], _)| [xs[i].clone(), ys[j].clone(), zs[k].clone()])
        .collect();
    let n = pts.len();
    for a in 0..n {
        for b in (a + 1)..n {
            for c in (b + 1)..n {
                for d in (c + 1)..n {
                    let quad = [
                        pts[a].clone(),
                        pts[b].clone(),
                        pts[c].clone(),
                        pts[d].clone(),
                    ];
                    if let Some(class) = box_parity_class(&quad) {
                        let ok = match sense {
                            Sense::Min => class.even,
                            Sense::Max => !class.even,
                        };
                        if !ok {
                            return false;
                        }
                    }
                }
            }
        }
    }
    true
}

/// Parse a CSV of `x,y,z` rational rows (optional `x,y,z` header).
pub fn point_set_from_csv(text: &str) -> Result<PointSet3> {
    let mut points = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || (lineno == 0 && trimmed.eq_ignore_ascii_case("x,y,z")) {
            continue;
        }
        let parts: Vec<&str> = trimmed.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::Parse {
                input: line.to_string(),
                expected: "CSV row \"x,y,z\"",
            });
        }
        points.push([
            crate::rational::parse_rational(parts[0])?,
            crate::rational::parse_rational(parts[1])?,
            crate::rational::parse_rational(parts[2])?,
        ]);
    }
    PointSet3::new(points)
}
