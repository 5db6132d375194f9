//! The discrete multistochastic (n,k)-Kantorovich linear program.
//!
//! A [`MarginalSpec`] fixes, for every k-subset of the n axes, the
//! k-dimensional projection the transport measure must have. [`build_model`]
//! turns that into equality constraints over the `Π sizes` cell weights,
//! drops dependent rows deterministically (greedy lexicographic-first
//! independent set, so every dropped row is the lexicographically last
//! member of its dependency relation), and [`LpModel::solve`] runs the exact
//! two-phase simplex. Every optimal solve is certified on the spot: exact
//! primal feasibility, complementary slackness and zero duality gap.
//! Infeasible models yield an exactly verified Farkas certificate.

pub mod io;

use crate::linalg::{select_independent_rows, SparseRow};
use crate::simplex::{
    self, farkas_is_valid, optimum_is_certified, ConstraintSystem, MinimizeOutcome,
    PrepareOutcome,
};
use crate::tensor::{multi_indices, Tensor};
use crate::{Error, Rational, Result};
use num_traits::{Signed, Zero};
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Min,
    Max,
}

/// Prescribed k-dimensional projections of an (n,k)-stochastic measure.
#[derive(Clone, Debug)]
pub struct MarginalSpec {
    sizes: Vec<usize>,
    k: usize,
    marginals: BTreeMap<Vec<usize>, Tensor<Rational>>,
}

/// All sorted k-subsets of `0..n`, lexicographically.
pub fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k == 0 || k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] != i + n - k {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

impl MarginalSpec {
    pub fn new(
        sizes: Vec<usize>,
        k: usize,
        marginals: BTreeMap<Vec<usize>, Tensor<Rational>>,
    ) -> Result<Self> {
        let n = sizes.len();
        if n < 2 || k == 0 || k >= n {
            return Err(Error::InvalidInput(format!(
                "need 1 <= k < n, got k={k}, n={n}"
            )));
        }
        if sizes.contains(&0) {
            return Err(Error::InvalidInput("zero-size axis".into()));
        }
        let expected = k_subsets(n, k);
        let keys: Vec<Vec<usize>> = marginals.keys().cloned().collect();
        if keys != expected {
            return Err(Error::InvalidInput(format!(
                "marginal keys {keys:?} must be exactly the sorted {k}-subsets of 0..{n}"
            )));
        }
        for (subset, t) in &marginals {
            let want: Vec<usize> = subset.iter().map(|&a| sizes[a]).collect();
            if t.dims() != want {
                return Err(Error::DimensionMismatch(format!(
                    "marginal {subset:?} has dims {:?}, grid wants {want:?}",
                    t.dims()
                )));
            }
            if t.data().iter().any(|w| w.is_negative()) {
                return Err(Error::InvalidInput(format!(
                    "negative weight in marginal {subset:?}"
                )));
            }
        }
        Ok(MarginalSpec { sizes, k, marginals })
    }

    /// Uniform marginals of the given total mass on every k-face.
    pub fn uniform(sizes: &[usize], k: usize, total_mass: Rational) -> Result<Self> {
        let mut marginals = BTreeMap::new();
        for subset in k_subsets(sizes.len(), k) {
            let dims: Vec<usize> = subset.iter().map(|&a| sizes[a]).collect();
            let cells: usize = dims.iter().product();
            let w = total_mass.clone() / Rational::from_integer((cells as i64).into());
            marginals.insert(subset, Tensor::filled(dims, w));
        }
        Self::new(sizes.to_vec(), k, marginals)
    }

    /// The three pairwise projections of a 3-dimensional measure as a
    /// (3,2) marginal spec.
    pub fn from_measure(m: &crate::measure::GridMeasure3) -> Result<Self> {
        let [xy, xz, yz] = m.marginals2().clone();
        let mut marginals = BTreeMap::new();
        marginals.insert(vec![0, 1], xy);
        marginals.insert(vec![0, 2], xz);
        marginals.insert(vec![1, 2], yz);
        Self::new(m.dims().to_vec(), 2, marginals)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn marginals(&self) -> &BTreeMap<Vec<usize>, Tensor<Rational>> {
        &self.marginals
    }

    pub fn marginal(&self, subset: &[usize]) -> Option<&Tensor<Rational>> {
        self.marginals.get(subset)
    }

    /// Necessary consistency conditions: equal total masses, and agreement
    /// of the order-(k-1) projections of every pair of overlapping
    /// marginals.
    pub fn consistency_check(&self) -> ConsistencyReport {
        let mut report = ConsistencyReport {
            consistent: true,
            checked: 0,
            violations: Vec::new(),
        };
        let subsets: Vec<&Vec<usize>> = self.marginals.keys().collect();
        let masses: Vec<Rational> = subsets
            .iter()
            .map(|s| self.marginals[*s].sum())
            .collect();
        for i in 1..subsets.len() {
            report.checked += 1;
            if masses[i] != masses[0] {
                report.consistent = false;
                report.violations.push(format!(
                    "mass(mu_{}) = {} differs from mass(mu_{}) = {}",
                    subset_label(subsets[i]),
                    masses[i],
                    subset_label(subsets[0]),
                    masses[0]
                ));
            }
        }
        for a in 0..subsets.len() {
            for b in a + 1..subsets.len() {
                let shared: Vec<usize> = subsets[a]
                    .iter()
                    .copied()
                    .filter(|i| subsets[b].contains(i))
                    .collect();
                if shared.len() != self.k - 1 {
                    continue;
                }
                report.checked += 1;
                // positions of the shared axes within each subset
                let pos = |subset: &[usize]| -> Vec<usize> {
                    shared
                        .iter()
                        .map(|i| {
                            subset
                                .iter()
                                .position(|j| j == i)
                                .expect("shared axis is in both subsets")
                        })
                        .collect()
                };
                let pa = self.marginals[subsets[a]].project(&pos(subsets[a]));
                let pb = self.marginals[subsets[b]].project(&pos(subsets[b]));
                if pa != pb {
                    report.consistent = false;
                    report.violations.push(format!(
                        "Pr_{}(mu_{}) != Pr_{}(mu_{})",
                        subset_label(&shared),
                        subset_label(subsets[a]),
                        subset_label(&shared),
                        subset_label(subsets[b])
                    ));
                }
            }
        }
        report
    }
}

pub fn subset_label(subset: &[usize]) -> String {
    if subset.iter().all(|&i| i < 10) {
        subset.iter().map(|i| i.to_string()).collect()
    } else {
        subset
            .iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct ConsistencyReport {
    pub consistent: bool,
    pub checked: usize,
    pub violations: Vec<String>,
}

/// Identity of a raw constraint row: one cell of one marginal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowId {
    pub subset: Vec<usize>,
    pub cell: Vec<usize>,
}

/// The assembled LP: kept rows are independent; dropped rows are recorded
/// with implied zero dual multipliers.
#[derive(Clone, Debug)]
pub struct LpModel {
    pub sizes: Vec<usize>,
    pub k: usize,
    pub cols: usize,
    pub sense: Sense,
    pub cost: Vec<Rational>,
    raw_rows: Vec<SparseRow<Rational>>,
    raw_rhs: Vec<Rational>,
    row_ids: Vec<RowId>,
    kept: Vec<usize>,
    dropped: Vec<usize>,
    /// Rank-level inconsistency found during row selection, over raw rows.
    rank_certificate: Option<Vec<Rational>>,
}

/// Flatten a full-grid cost tensor in the model's column order.
pub fn build_model(spec: &MarginalSpec, cost: &Tensor<Rational>, sense: Sense) -> Result<LpModel> {
    if cost.dims() != spec.sizes {
        return Err(Error::DimensionMismatch(format!(
            "cost dims {:?} vs sizes {:?}",
            cost.dims(),
            spec.sizes
        )));
    }
    let subsets = k_subsets(spec.sizes.len(), spec.k);
    let mut row_ids = Vec::new();
    let mut raw_rhs = Vec::new();
    let mut row_offsets = Vec::new();
    for subset in &subsets {
        row_offsets.push(row_ids.len());
        let t = &spec.marginals[subset];
        for (cell, w) in t.iter() {
            row_ids.push(RowId {
                subset: subset.clone(),
                cell,
            });
            raw_rhs.push(w.clone());
        }
    }
    let mut raw_rows: Vec<SparseRow<Rational>> = vec![Vec::new(); row_ids.len()];
    for (col, idx) in multi_indices(&spec.sizes).enumerate() {
        for (s, subset) in subsets.iter().enumerate() {
            let t = &spec.marginals[subset];
            let cell: Vec<usize> = subset.iter().map(|&a| idx[a]).collect();
            let row = row_offsets[s] + t.flat_index(&cell);
            raw_rows[row].push((col, Rational::from_integer(1.into())));
        }
    }
    let cols: usize = spec.sizes.iter().product();
    let selection = select_independent_rows(&raw_rows, &raw_rhs, cols)?;
    Ok(LpModel {
        sizes: spec.sizes.clone(),
        k: spec.k,
        cols,
        sense,
        cost: cost.data().to_vec(),
        raw_rows,
        raw_rhs,
        row_ids,
        kept: selection.kept,
        dropped: selection.dropped,
        rank_certificate: selection.infeasibility,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Exact verification flags; a solution is only returned when all the
/// applicable flags are true.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct SolveChecks {
    pub primal_feasible: bool,
    pub complementary_slackness: bool,
    pub zero_duality_gap: bool,
    pub farkas_verified: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: Option<Rational>,
    /// Full primal vector in model column order (empty unless optimal).
    pub primal: Vec<Rational>,
    /// Dual multiplier per raw row (zero on dropped rows).
    pub duals: Vec<Rational>,
    /// Farkas vector per raw row when infeasible.
    pub farkas: Option<Vec<Rational>>,
    pub checks: SolveChecks,
    pub pivots: u64,
}

impl LpSolution {
    /// Nonzero primal atoms as `(multi_index, weight)`.
    pub fn atoms(&self, sizes: &[usize]) -> Vec<(Vec<usize>, Rational)> {
        multi_indices(sizes)
            .zip(&self.primal)
            .filter(|(_, w)| !w.is_zero())
            .map(|(idx, w)| (idx, w.clone()))
            .collect()
    }
}

impl LpModel {
    pub fn row_ids(&self) -> &[RowId] {
        &self.row_ids
    }

    pub fn kept_rows(&self) -> &[usize] {
        &self.kept
    }

    pub fn dropped_rows(&self) -> &[usize] {
        &self.dropped
    }

    pub fn raw_row_count(&self) -> usize {
        self.raw_rows.len()
    }

    /// The reduced (independent-row) equality system.
    pub fn constraint_system(&self) -> ConstraintSystem<Rational> {
        ConstraintSystem {
            ncols: self.cols,
            rows: self.kept.iter().map(|&r| self.raw_rows[r].clone()).collect(),
            rhs: self.kept.iter().map(|&r| self.raw_rhs[r].clone()).collect(),
        }
    }

    fn raw_system(&self) -> ConstraintSystem<Rational> {
        ConstraintSystem {
            ncols: self.cols,
            rows: self.raw_rows.clone(),
            rhs: self.raw_rhs.clone(),
        }
    }

    fn infeasible_solution(&self, farkas_raw: Vec<Rational>) -> Result<LpSolution> {
        let ok = farkas_is_valid(&self.raw_system(), &farkas_raw);
        if !ok {
            return Err(Error::Internal("invalid Farkas certificate".into()));
        }
        Ok(LpSolution {
            status: LpStatus::Infeasible,
            objective: None,
            primal: Vec::new(),
            duals: Vec::new(),
            farkas: Some(farkas_raw),
            checks: SolveChecks {
                primal_feasible: false,
                complementary_slackness: false,
                zero_duality_gap: false,
                farkas_verified: Some(true),
            },
            pivots: 0,
        })
    }

    /// Run phase one once; the result can solve any number of objectives.
    pub fn prepare(&self) -> Result<PreparedLp<'_>> {
        if let Some(cert) = &self.rank_certificate {
            return Ok(PreparedLp {
                model: self,
                inner: PreparedInner::Infeasible(cert.clone()),
            });
        }
        let cs = self.constraint_system();
        match simplex::prepare(&cs)? {
            PrepareOutcome::Infeasible { farkas } => {
                let mut raw = vec![Rational::zero(); self.raw_rows.len()];
                for (slot, &r) in self.kept.iter().enumerate() {
                    raw[r] = farkas[slot].clone();
                }
                Ok(PreparedLp {
                    model: self,
                    inner: PreparedInner::Infeasible(raw),
                })
            }
            PrepareOutcome::Feasible(system) => Ok(PreparedLp {
                model: self,
                inner: PreparedInner::Feasible { cs, system },
            }),
        }
    }

    /// Solve the model's own objective.
    pub fn solve(&self) -> Result<LpSolution> {
        self.prepare()?.solve_objective(&self.cost, self.sense)
    }
}

enum PreparedInner {
    Feasible {
        cs: ConstraintSystem<Rational>,
        system: simplex::PreparedSystem<Rational>,
    },
    Infeasible(Vec<Rational>),
}

/// A model with phase one already done.
pub struct PreparedLp<'a> {
    model: &'a LpModel,
    inner: PreparedInner,
}

impl PreparedLp<'_> {
    pub fn is_feasible(&self) -> bool {
        matches!(self.inner, PreparedInner::Feasible { .. })
    }

    pub fn solve_objective(&self, cost: &[Rational], sense: Sense) -> Result<LpSolution> {
        let model = self.model;
        let (cs, system) = match &self.inner {
            PreparedInner::Infeasible(raw) => {
                return model.infeasible_solution(raw.clone());
            }
            PreparedInner::Feasible { cs, system } => (cs, system),
        };
        let min_cost: Vec<Rational> = match sense {
            Sense::Min => cost.to_vec(),
            Sense::Max => cost.iter().map(|c| -c.clone()).collect(),
        };
        match system.minimize(&min_cost)? {
            MinimizeOutcome::Unbounded => Ok(LpSolution {
                status: LpStatus::Unbounded,
                objective: None,
                primal: Vec::new(),
                duals: Vec::new(),
                farkas: None,
                checks: SolveChecks {
                    primal_feasible: false,
                    complementary_slackness: false,
                    zero_duality_gap: false,
                    farkas_verified: None,
                },
                pivots: 0,
            }),
            MinimizeOutcome::Optimal(opt) => {
                if !optimum_is_certified(cs, &min_cost, &opt) {
                    return Err(Error::Internal(
                        "optimum failed exact certification".into(),
                    ));
                }
                let sign = match sense {
                    Sense::Min => Rational::from_integer(1.into()),
                    Sense::Max => Rational::from_integer((-1).into()),
                };
                let mut duals = vec![Rational::zero(); model.raw_rows.len()];
                for (slot, &r) in model.kept.iter().enumerate() {
                    duals[r] = &sign * &opt.duals[slot];
                }
                Ok(LpSolution {
                    status: LpStatus::Optimal,
                    objective: Some(&sign * &opt.objective),
                    primal: opt.x,
                    duals,
                    farkas: None,
                    checks: SolveChecks {
                        primal_feasible: true,
                        complementary_slackness: true,
                        zero_duality_gap: true,
                        farkas_verified: None,
                    },
                    pivots: opt.pivots,
                })
            }
        }
    }
}

/// Per-subset dual potential tables extracted from the row multipliers.
#[derive(Clone, Debug)]
pub struct DualPotentials {
    pub tables: BTreeMap<Vec<usize>, Tensor<Rational>>,
    pub sense: Sense,
    /// Tables are shifted by constants summing to zero so that all have the
    /// same mean; reported for reproducibility.
    pub normalization: &'static str,
}

impl DualPotentials {
    /// Σ_I f_I at a full grid index.
    pub fn sum_at(&self, idx: &[usize]) -> Rational {
        let mut s = Rational::zero();
        for (subset, t) in &self.tables {
            let cell: Vec<usize> = subset.iter().map(|&a| idx[a]).collect();
            s += t.get(&cell).clone();
        }
        s
    }

    /// Dual objective Σ_I <f_I, μ_I>.
    pub fn objective(&self, spec: &MarginalSpec) -> Rational {
        let mut s = Rational::zero();
        for (subset, t) in &self.tables {
            let mu = &spec.marginals()[subset];
            s += t
                .data()
                .iter()
                .zip(mu.data())
                .map(|(a, b)| a * b)
                .sum::<Rational>();
        }
        s
    }

    /// Exact feasibility of the potential: `Σ f_I <= c` everywhere for the
    /// min problem (`>=` for max), with equality on the primal support.
    pub fn verify(&self, model: &LpModel, primal: &[Rational]) -> bool {
        for (col, idx) in multi_indices(&model.sizes).enumerate() {
            let s = self.sum_at(&idx);
            let c = &model.cost[col];
            let ok = match self.sense {
                Sense::Min => s <= *c,
                Sense::Max => s >= *c,
            };
            if !ok {
                return false;
            }
            if !primal[col].is_zero() && s != *c {
                return false;
            }
        }
        true
    }
}

/// Map dual multipliers back to potential tables `f_I`, normalize them to a
/// common mean, and verify feasibility plus complementary slackness.
pub fn dual_potentials(model: &LpModel, sol: &LpSolution) -> Result<DualPotentials> {
    if sol.status != LpStatus::Optimal {
        return Err(Error::InvalidInput(
            "dual potentials need an optimal solution".into(),
        ));
    }
    let subsets = k_subsets(model.sizes.len(), model.k);
    let mut tables: BTreeMap<Vec<usize>, Tensor<Rational>> = subsets
        .iter()
        .map(|s| {
            let dims: Vec<usize> = s.iter().map(|&a| model.sizes[a]).collect();
            (s.clone(), Tensor::filled(dims, Rational::zero()))
        })
        .collect();
    for (row, id) in model.row_ids.iter().enumerate() {
        let t = tables.get_mut(&id.subset).expect("subset table exists");
        *t.get_mut(&id.cell) += sol.duals[row].clone();
    }
    // equalize means by zero-sum shifts
    let count = Rational::from_integer((tables.len() as i64).into());
    let means: BTreeMap<Vec<usize>, Rational> = tables
        .iter()
        .map(|(s, t)| {
            let cells = Rational::from_integer((t.len() as i64).into());
            (s.clone(), t.sum() / cells)
        })
        .collect();
    let avg: Rational = means.values().sum::<Rational>() / &count;
    for (s, t) in tables.iter_mut() {
        let shift = &avg - &means[s];
        if !shift.is_zero() {
            let shifted = Tensor::from_fn(t.dims().to_vec(), |idx| t.get(idx) + &shift);
            *t = shifted;
        }
    }
    let potentials = DualPotentials {
        tables,
        sense: model.sense,
        normalization: "equal-mean",
    };
    if !potentials.verify(model, &sol.primal) {
        return Err(Error::Internal(
            "dual potentials failed feasibility or slackness".into(),
        ));
    }
    Ok(potentials)
}

/// The cost tensor `c_{ijk} = x_i y_j z_k`.
pub fn xyz_cost_tensor(xs: &[Rational], ys: &[Rational], zs: &[Rational]) -> Tensor<Rational> {
    Tensor::from_fn(vec![xs.len(), ys.len(), zs.len()], |idx| {
        &xs[idx[0]] * &ys[idx[1]] * &zs[idx[2]]
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{dyadic_grid, CostRule, GridMeasure3, PlanKind};
    use crate::rational::rat;
    use crate::simplex::enumerate_basic_minimum;

    fn baby_cube_spec() -> MarginalSpec {
        MarginalSpec::uniform(&[2, 2, 2], 2, rat(1, 1)).unwrap()
    }

    fn unit_grid() -> Vec<Rational> {
        vec![rat(0, 1), rat(1, 1)]
    }

    #[test]
    fn subsets_enumeration() {
        assert_eq!(k_subsets(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(k_subsets(4, 1).len(), 4);
        assert_eq!(k_subsets(5, 3).len(), 10);
    }

    #[test]
    fn model_shapes() {
        let spec = baby_cube_spec();
        let cost = xyz_cost_tensor(&unit_grid(), &unit_grid(), &unit_grid());
        let model = build_model(&spec, &cost, Sense::Min).unwrap();
        assert_eq!(model.cols, 8);
        assert_eq!(model.raw_row_count(), 12);
        assert_eq!(model.kept_rows().len(), 7); // rank 3s^2 - 3s + 1 at s=2
        let spec4 = MarginalSpec::uniform(&[4, 4, 4], 2, rat(1, 1)).unwrap();
        let g = dyadic_grid(2);
        let cost4 = xyz_cost_tensor(&g, &g, &g);
        let model4 = build_model(&spec4, &cost4, Sense::Min).unwrap();
        assert_eq!(model4.cols, 64);
        assert_eq!(model4.raw_row_count(), 48);
        assert_eq!(model4.kept_rows().len(), 37);
    }

    #[test]
    fn three_one_model_is_classical_transport() {
        let spec = MarginalSpec::uniform(&[2, 2, 2], 1, rat(1, 1)).unwrap();
        let cost = xyz_cost_tensor(&unit_grid(), &unit_grid(), &unit_grid());
        let model = build_model(&spec, &cost, Sense::Min).unwrap();
        assert_eq!(model.raw_row_count(), 6);
        let sol = model.solve().unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        // product measure is feasible; min of xyz over P(mu1) x ... is 0
        assert_eq!(sol.objective.unwrap(), rat(0, 1));
    }

    #[test]
    fn baby_cube_min_and_max() {
        let spec = baby_cube_spec();
        let cost = xyz_cost_tensor(&unit_grid(), &unit_grid(), &unit_grid());
        let min = build_model(&spec, &cost, Sense::Min).unwrap().solve().unwrap();
        assert_eq!(min.objective.clone().unwrap(), rat(0, 1));
        let max = build_model(&spec, &cost, Sense::Max).unwrap().solve().unwrap();
        assert_eq!(max.objective.clone().unwrap(), rat(1, 4));
        // the max optimum is the odd-parity measure
        let atoms = max.atoms(&[2, 2, 2]);
        assert_eq!(atoms.len(), 4);
        for (idx, w) in &atoms {
            assert_eq!((idx[0] + idx[1] + idx[2]) % 2, 1);
            assert_eq!(w, &rat(1, 4));
        }
    }

    #[test]
    fn simplex_matches_enumeration_on_baby_cube() {
        let spec = baby_cube_spec();
        let cost = xyz_cost_tensor(&unit_grid(), &unit_grid(), &unit_grid());
        for sense in [Sense::Min, Sense::Max] {
            let model = build_model(&spec, &cost, sense).unwrap();
            let sol = model.solve().unwrap();
            let cs = model.constraint_system();
            let signed: Vec<Rational> = match sense {
                Sense::Min => model.cost.clone(),
                Sense::Max => model.cost.iter().map(|c| -c).collect(),
            };
            let (best, _) = enumerate_basic_minimum(&cs, &signed).unwrap().unwrap();
            let best = match sense {
                Sense::Min => best,
                Sense::Max => -best,
            };
            assert_eq!(best, sol.objective.unwrap());
        }
    }

    #[test]
    fn dual_potentials_certify_baby_cube() {
        let spec = baby_cube_spec();
        let cost = xyz_cost_tensor(&unit_grid(), &unit_grid(), &unit_grid());
        let model = build_model(&spec, &cost, Sense::Min).unwrap();
        let sol = model.solve().unwrap();
        let pots = dual_potentials(&model, &sol).unwrap();
        assert_eq!(pots.objective(&spec), rat(0, 1));
        // shifting by constants that sum to zero keeps feasibility and
        // objective
        let mut shifted = pots.clone();
        let keys: Vec<Vec<usize>> = shifted.tables.keys().cloned().collect();
        let deltas = [rat(1, 3), rat(-1, 4), rat(-1, 12)];
        for (key, d) in keys.iter().zip(&deltas) {
            let t = shifted.tables.get_mut(key).unwrap();
            *t = Tensor::from_fn(t.dims().to_vec(), |idx| t.get(idx) + d);
        }
        assert!(shifted.verify(&model, &sol.primal));
        assert_eq!(shifted.objective(&spec), rat(0, 1));
    }

    #[test]
    fn uniform_level_two_dual_value_equals_primal() {
        let spec = MarginalSpec::uniform(&[4, 4, 4], 2, rat(1, 1)).unwrap();
        let g = dyadic_grid(2);
        let model = build_model(&spec, &xyz_cost_tensor(&g, &g, &g), Sense::Min).unwrap();
        let sol = model.solve().unwrap();
        let pots = dual_potentials(&model, &sol).unwrap();
        assert_eq!(pots.objective(&spec), sol.objective.clone().unwrap());
        assert_eq!(
            sol.objective.unwrap(),
            GridMeasure3::xor_plan(2, PlanKind::Min)
                .plan_cost(CostRule::Left)
                .unwrap()
        );
    }

    #[test]
    fn consistency_of_product_marginals() {
        // mu_{i,j} = mu_i x mu_j is always consistent
        let mu = [rat(1, 2), rat(1, 3), rat(1, 6)];
        let mut marginals = BTreeMap::new();
        for subset in k_subsets(3, 2) {
            marginals.insert(
                subset.clone(),
                Tensor::from_fn(vec![3, 3], |idx| &mu[idx[0]] * &mu[idx[1]]),
            );
        }
        let spec = MarginalSpec::new(vec![3, 3, 3], 2, marginals).unwrap();
        let report = spec.consistency_check();
        assert!(report.consistent, "{:?}", report.violations);
    }

    #[test]
    fn perturbed_marginal_is_named() {
        let mut spec = baby_cube_spec();
        let t = spec.marginals.get_mut(&vec![0, 1]).unwrap();
        *t.get_mut(&[0, 0]) += rat(1, 8);
        let report = spec.consistency_check();
        assert!(!report.consistent);
        assert!(report.violations.iter().any(|v| v.contains("mu_01")));
    }

    #[test]
    fn diagonal_product_discretization_is_infeasible_with_certificate() {
        // diagonal mu_01, product mu_02, block-structured mu_12: consistent
        // but infeasible
        let s = 4usize;
        let mut marginals = BTreeMap::new();
        marginals.insert(
            vec![0, 1],
            Tensor::from_fn(vec![s, s], |idx| {
                if idx[0] == idx[1] {
                    rat(1, 4)
                } else {
                    rat(0, 1)
                }
            }),
        );
        marginals.insert(vec![0, 2], Tensor::filled(vec![s, s], rat(1, 16)));
        let block = [
            [rat(1, 8), rat(1, 8), rat(0, 1), rat(0, 1)],
            [rat(1, 8), rat(1, 8), rat(0, 1), rat(0, 1)],
            [rat(0, 1), rat(0, 1), rat(1, 8), rat(1, 8)],
            [rat(0, 1), rat(0, 1), rat(1, 8), rat(1, 8)],
        ];
        marginals.insert(
            vec![1, 2],
            Tensor::from_fn(vec![s, s], |idx| block[idx[0]][idx[1]].clone()),
        );
        let spec = MarginalSpec::new(vec![s, s, s], 2, marginals).unwrap();
        assert!(spec.consistency_check().consistent);
        let g = dyadic_grid(2);
        let model = build_model(&spec, &xyz_cost_tensor(&g, &g, &g), Sense::Min).unwrap();
        let sol = model.solve().unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
        assert_eq!(sol.checks.farkas_verified, Some(true));
        assert!(sol.farkas.is_some());
    }

    #[test]
    fn mass_mismatch_is_caught_at_row_selection() {
        // unequal marginal masses make the equality system rank-inconsistent;
        // the certificate comes straight out of the elimination
        let mut marginals = BTreeMap::new();
        marginals.insert(vec![0, 1], Tensor::filled(vec![2, 2], rat(1, 4)));
        marginals.insert(vec![0, 2], Tensor::filled(vec![2, 2], rat(1, 4)));
        marginals.insert(vec![1, 2], Tensor::filled(vec![2, 2], rat(1, 2)));
        let spec = MarginalSpec::new(vec![2, 2, 2], 2, marginals).unwrap();
        let report = spec.consistency_check();
        assert!(!report.consistent);
        assert!(report.violations.iter().any(|v| v.contains("mass")));
        let cost = xyz_cost_tensor(&unit_grid(), &unit_grid(), &unit_grid());
        let model = build_model(&spec, &cost, Sense::Min).unwrap();
        let sol = model.solve().unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
        assert_eq!(sol.checks.farkas_verified, Some(true));
        assert_eq!(sol.farkas.as_ref().unwrap().len(), model.raw_row_count());
    }

    #[test]
    fn prepared_model_reuses_phase_one() {
        let spec = baby_cube_spec();
        let cost = xyz_cost_tensor(&unit_grid(), &unit_grid(), &unit_grid());
        let model = build_model(&spec, &cost, Sense::Min).unwrap();
        let prepared = model.prepare().unwrap();
        assert!(prepared.is_feasible());
        let a = prepared.solve_objective(&model.cost, Sense::Min).unwrap();
        let b = prepared.solve_objective(&model.cost, Sense::Max).unwrap();
        assert_eq!(a.objective.unwrap(), rat(0, 1));
        assert_eq!(b.objective.unwrap(), rat(1, 4));
    }
}
