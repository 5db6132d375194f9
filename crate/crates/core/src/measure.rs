//! Discrete measures on 3-dimensional coordinate grids: XOR transport
//! plans, marginals, costs, reflections and distribution functions.

use crate::integral::xy_xor_integral;
use crate::rational::{rat, rational_pow2};
use crate::tensor::Tensor;
use crate::{Error, Rational, Result};
use num_traits::Zero;
use std::sync::OnceLock;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum PlanKind {
    Min,
    Max,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CostRule {
    /// Atoms sit at the stored coordinates (left cell endpoints for the
    /// dyadic plans).
    Left,
    /// Cell midpoints of a level-`n` dyadic grid.
    Midpoint,
    /// Exact cost of the limiting continuous plan carried by the cells of
    /// an XOR plan.
    ExactCell,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReflectPair {
    Xy,
    Xz,
    Yz,
}

/// A nonnegative measure on the grid `xs × ys × zs`.
///
/// Immutable after construction; marginals and prefix sums are computed on
/// first use and cached.
#[derive(Debug)]
pub struct GridMeasure3 {
    xs: Vec<Rational>,
    ys: Vec<Rational>,
    zs: Vec<Rational>,
    weights: Tensor<Rational>,
    mass: Rational,
    level: Option<u32>,
    plan: Option<PlanKind>,
    marginals: OnceLock<[Tensor<Rational>; 3]>,
    prefix: OnceLock<Tensor<Rational>>,
}

impl Clone for GridMeasure3 {
    fn clone(&self) -> Self {
        GridMeasure3 {
            xs: self.xs.clone(),
            ys: self.ys.clone(),
            zs: self.zs.clone(),
            weights: self.weights.clone(),
            mass: self.mass.clone(),
            level: self.level,
            plan: self.plan,
            marginals: OnceLock::new(),
            prefix: OnceLock::new(),
        }
    }
}

impl PartialEq for GridMeasure3 {
    fn eq(&self, other: &Self) -> bool {
        self.xs == other.xs
            && self.ys == other.ys
            && self.zs == other.zs
            && self.weights == other.weights
    }
}

fn check_coords(axis: char, coords: &[Rational]) -> Result<()> {
    if coords.is_empty() {
        return Err(Error::InvalidInput(format!("empty {axis}-coordinate list")));
    }
    for w in coords.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::InvalidInput(format!(
                "{axis}-coordinates must be strictly increasing"
            )));
        }
    }
    Ok(())
}

impl GridMeasure3 {
    pub fn from_weights(
        xs: Vec<Rational>,
        ys: Vec<Rational>,
        zs: Vec<Rational>,
        weights: Tensor<Rational>,
    ) -> Result<Self> {
        check_coords('x', &xs)?;
        check_coords('y', &ys)?;
        check_coords('z', &zs)?;
        if weights.dims() != [xs.len(), ys.len(), zs.len()] {
            return Err(Error::DimensionMismatch(format!(
                "weights {:?} vs grid {}x{}x{}",
                weights.dims(),
                xs.len(),
                ys.len(),
                zs.len()
            )));
        }
        if weights.data().iter().any(|w| w < &Rational::zero()) {
            return Err(Error::InvalidInput("negative weight".into()));
        }
        let mass = weights.sum();
        Ok(GridMeasure3 {
            xs,
            ys,
            zs,
            weights,
            mass,
            level: None,
            plan: None,
            marginals: OnceLock::new(),
            prefix: OnceLock::new(),
        })
    }

    pub fn from_atoms(
        xs: Vec<Rational>,
        ys: Vec<Rational>,
        zs: Vec<Rational>,
        atoms: &[([usize; 3], Rational)],
    ) -> Result<Self> {
        let mut weights =
            Tensor::filled(vec![xs.len(), ys.len(), zs.len()], Rational::zero());
        for (idx, w) in atoms {
            let slot = weights.get_mut(&idx[..]);
            *slot = slot.clone() + w.clone();
        }
        Self::from_weights(xs, ys, zs, weights)
    }

    /// The index-XOR plan on an explicit coordinate grid: one atom of the
    /// given weight per `(i, j)` pair, at `k = i⊕j` for the minimizing plan
    /// and `k = (s-1) - (i⊕j)` for the maximizing plan. All three axes must
    /// share one power-of-two size.
    pub fn xor_index_plan_on(
        xs: Vec<Rational>,
        ys: Vec<Rational>,
        zs: Vec<Rational>,
        kind: PlanKind,
        atom_weight: Rational,
    ) -> Result<Self> {
        let s = xs.len();
        if ys.len() != s || zs.len() != s {
            return Err(Error::DimensionMismatch(
                "xor plan needs equal axis sizes".into(),
            ));
        }
        if !s.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "xor plan needs a power-of-two grid, got {s}"
            )));
        }
        let atoms: Vec<([usize; 3], Rational)> = (0..s)
            .flat_map(|i| {
                let w = atom_weight.clone();
                (0..s).map(move |j| {
                    let k = match kind {
                        PlanKind::Min => i ^ j,
                        PlanKind::Max => (s - 1) - (i ^ j),
                    };
                    ([i, j, k], w.clone())
                })
            })
            .collect();
        Self::from_atoms(xs, ys, zs, &atoms)
    }

    /// The level-`n` XOR plan on the dyadic grid `{i/2^n}`: weight `4^-n`
    /// at `(i, j, i⊕j)` (min) or `(i, j, (2^n-1)-(i⊕j))` (max).
    pub fn xor_plan(level: u32, kind: PlanKind) -> Self {
        let coords = dyadic_grid(level);
        let weight = rat(1, 1) / rational_pow2(2 * level);
        let mut m = Self::xor_index_plan_on(coords.clone(), coords.clone(), coords, kind, weight)
            .expect("dyadic grid is valid");
        m.level = Some(level);
        m.plan = Some(kind);
        m
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.xs.len(), self.ys.len(), self.zs.len()]
    }

    pub fn coords(&self) -> (&[Rational], &[Rational], &[Rational]) {
        (&self.xs, &self.ys, &self.zs)
    }

    pub fn weights(&self) -> &Tensor<Rational> {
        &self.weights
    }

    pub fn weight(&self, i: usize, j: usize, k: usize) -> &Rational {
        self.weights.get(&[i, j, k])
    }

    pub fn mass(&self) -> &Rational {
        &self.mass
    }

    pub fn level(&self) -> Option<u32> {
        self.level
    }

    pub fn plan_kind(&self) -> Option<PlanKind> {
        self.plan
    }

    /// Nonzero atoms in row-major order.
    pub fn atoms(&self) -> impl Iterator<Item = ([usize; 3], &Rational)> {
        self.weights.iter().filter_map(|(idx, w)| {
            if w.is_zero() {
                None
            } else {
                Some(([idx[0], idx[1], idx[2]], w))
            }
        })
    }

    /// The three 2-dimensional projections, in axis-pair order
    /// `(x,y), (x,z), (y,z)`.
    pub fn marginals2(&self) -> &[Tensor<Rational>; 3] {
        self.marginals.get_or_init(|| {
            [
                self.weights.project(&[0, 1]),
                self.weights.project(&[0, 2]),
                self.weights.project(&[1, 2]),
            ]
        })
    }

    /// Whether every cell of every 2-dimensional projection carries the
    /// same weight.
    pub fn has_uniform_marginals(&self, cell_weight: &Rational) -> bool {
        self.marginals2()
            .iter()
            .all(|m| m.data().iter().all(|w| w == cell_weight))
    }

    /// Transport cost `Σ w_{ijk} · x_i y_j z_k` under the chosen
    /// representative rule.
    pub fn plan_cost(&self, rule: CostRule) -> Result<Rational> {
        match rule {
            CostRule::Left => Ok(self
                .atoms()
                .map(|([i, j, k], w)| w * &self.xs[i] * &self.ys[j] * &self.zs[k])
                .sum()),
            CostRule::Midpoint => {
                let level = self.level.ok_or_else(|| {
                    Error::InvalidInput("midpoint rule needs a dyadic level grid".into())
                })?;
                let half_cell = rat(1, 1) / rational_pow2(level + 1);
                Ok(self
                    .atoms()
                    .map(|([i, j, k], w)| {
                        w * (&self.xs[i] + &half_cell)
                            * (&self.ys[j] + &half_cell)
                            * (&self.zs[k] + &half_cell)
                    })
                    .sum())
            }
            CostRule::ExactCell => match self.plan {
                Some(PlanKind::Min) => Ok(xy_xor_integral()),
                Some(PlanKind::Max) => Ok(rat(1, 4) - xy_xor_integral()),
                None => Err(Error::ExactCellUnsupported),
            },
        }
    }

    fn check_axis_symmetric(axis: char, coords: &[Rational]) -> Result<()> {
        let n = coords.len();
        let total = &coords[0] + &coords[n - 1];
        for i in 0..n {
            if &coords[i] + &coords[n - 1 - i] != total {
                return Err(Error::AsymmetricGrid {
                    axis,
                    detail: format!(
                        "coords[{i}] + coords[{}] differs from coords[0] + coords[{}]",
                        n - 1 - i,
                        n - 1
                    ),
                });
            }
        }
        Ok(())
    }

    /// Pushforward under the double reflection of the named axis pair
    /// (index reversal on both axes). Requires each reflected axis to have
    /// a reflection-symmetric coordinate list, so that index reversal is
    /// the value map `t -> c - t`.
    pub fn reflect(&self, pair: ReflectPair) -> Result<GridMeasure3> {
        let (rx, ry, rz) = match pair {
            ReflectPair::Xy => (true, true, false),
            ReflectPair::Xz => (true, false, true),
            ReflectPair::Yz => (false, true, true),
        };
        if rx {
            Self::check_axis_symmetric('x', &self.xs)?;
        }
        if ry {
            Self::check_axis_symmetric('y', &self.ys)?;
        }
        if rz {
            Self::check_axis_symmetric('z', &self.zs)?;
        }
        let [nx, ny, nz] = self.dims();
        let weights = Tensor::from_fn(vec![nx, ny, nz], |idx| {
            let i = if rx { nx - 1 - idx[0] } else { idx[0] };
            let j = if ry { ny - 1 - idx[1] } else { idx[1] };
            let k = if rz { nz - 1 - idx[2] } else { idx[2] };
            self.weights.get(&[i, j, k]).clone()
        });
        let mut m = Self::from_weights(
            self.xs.clone(),
            self.ys.clone(),
            self.zs.clone(),
            weights,
        )?;
        m.level = self.level;
        Ok(m)
    }

    /// Distribution function `F(x_i, y_j, z_k) = μ([0,x_i]×[0,y_j]×[0,z_k])`
    /// as the inclusive prefix sum of weights.
    pub fn cdf(&self, i: usize, j: usize, k: usize) -> Rational {
        let p = self.prefix.get_or_init(|| {
            let [nx, ny, nz] = self.dims();
            let mut t = self.weights.clone();
            for a in 0..nx {
                for b in 0..ny {
                    for c in 0..nz {
                        let mut v = t.get(&[a, b, c]).clone();
                        if a > 0 {
                            v += t.get(&[a - 1, b, c]).clone();
                        }
                        if b > 0 {
                            v += t.get(&[a, b - 1, c]).clone();
                            if a > 0 {
                                v -= t.get(&[a - 1, b - 1, c]).clone();
                            }
                        }
                        if c > 0 {
                            v += t.get(&[a, b, c - 1]).clone();
                            if a > 0 {
                                v -= t.get(&[a - 1, b, c - 1]).clone();
                            }
                            if b > 0 {
                                v -= t.get(&[a, b - 1, c - 1]).clone();
                                if a > 0 {
                                    v += t.get(&[a - 1, b - 1, c - 1]).clone();
                                }
                            }
                        }
                        *t.get_mut(&[a, b, c]) = v;
                    }
                }
            }
            t
        });
        p.get(&[i, j, k]).clone()
    }
}

/// Left endpoints `i/2^n` of the level-`n` dyadic grid.
pub fn dyadic_grid(level: u32) -> Vec<Rational> {
    let denom = rational_pow2(level);
    (0..(1u64 << level))
        .map(|i| Rational::from_integer(i.into()) / &denom)
        .collect()
}

/// Left-rule cost of the level-`n` XOR plan by direct summation, without
/// materializing the `8^n`-cell weight tensor:
/// `Σ_{i,j} i·j·(i⊕j) / 2^{5n}` for the minimizing plan and the
/// complemented sum for the maximizing one. Exact for levels far beyond
/// what the dense representation can hold; agrees with
/// `xor_plan(n, kind).plan_cost(Left)` wherever both run.
pub fn xor_plan_left_cost(level: u32, kind: PlanKind) -> Rational {
    assert!(level <= 20, "summation index would overflow");
    let top = 1u64 << level;
    let mut sum: u128 = 0;
    for i in 0..top {
        for j in 0..top {
            let k = match kind {
                PlanKind::Min => i ^ j,
                PlanKind::Max => (top - 1) - (i ^ j),
            };
            sum += i as u128 * j as u128 * k as u128;
        }
    }
    Rational::new(sum.into(), num_bigint::BigInt::from(1u8) << (5 * level))
}
