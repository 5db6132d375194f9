//! Command implementations behind the `msk` binary.
//!
//! Every command returns its stdout payload plus a pass/fail verdict;
//! verification commands emit a [`RunReport`] in JSON, evaluation commands
//! print exact values, and export commands write files. Exit codes: 0 when
//! all asserted checks pass, 1 on a check failure, 2 on usage errors.

pub mod report;

use msk_core::checks::{
    epsilon_example, four_point_theorem_check, rectangle_increments, xor_optimality_check,
};
use msk_core::integral::{closed_sum_oracle, f_via_integral, i_eval};
use msk_core::lp::{self, build_model, dual_potentials, xyz_cost_tensor, MarginalSpec, Sense};
use msk_core::measure::{dyadic_grid, xor_plan_left_cost, PlanKind};
use msk_core::monotone::{competitor_optimum, point_set_from_csv};
use msk_core::potential::PotentialTable;
use msk_core::rational::{format_rational, parse_rational, rat, rational_pow2, rational_pow8};
use msk_core::{Dyadic, Error, Rational};
use num_traits::Signed;
use report::RunReport;
use serde_json::json;
use std::path::Path;
use std::time::Instant;

/// Environment variable bounding the size of the potential memo table
/// (entries), checked before verification sweeps.
pub const MEMO_BUDGET_ENV: &str = "MSK_MEMO_MAX_ENTRIES";
const DEFAULT_MEMO_BUDGET: u64 = 64_000_000;

#[derive(Debug)]
pub enum CliError {
    /// Bad input or arguments: exit code 2.
    Usage(String),
    /// A computation-level failure: exit code 1.
    Check(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Check(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. }
            | Error::InvalidInput(_)
            | Error::DimensionMismatch(_)
            | Error::LevelTooSmall { .. }
            | Error::OutsideUnitInterval(_)
            | Error::MantissaTooLarge(_)
            | Error::ExactCellUnsupported
            | Error::AsymmetricGrid { .. }
            | Error::DegenerateConfiguration(_)
            | Error::BudgetExceeded { .. }
            | Error::Io(_)
            | Error::Json(_) => CliError::Usage(e.to_string()),
            Error::PivotLimit(_) | Error::Internal(_) => CliError::Check(e.to_string()),
        }
    }
}

pub type CliResult = Result<CommandOutput, CliError>;

#[derive(Debug)]
pub struct CommandOutput {
    pub stdout: String,
    pub passed: bool,
}

impl CommandOutput {
    fn text(stdout: String) -> Self {
        CommandOutput {
            stdout,
            passed: true,
        }
    }

    fn report(r: RunReport) -> Self {
        CommandOutput {
            passed: r.passed,
            stdout: r.to_json_string(),
        }
    }
}

fn memo_budget() -> u64 {
    std::env::var(MEMO_BUDGET_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_MEMO_BUDGET)
}

fn check_budget(level: u32) -> Result<(), CliError> {
    let side = (1u64 << level) + 1;
    let budget = memo_budget();
    if side.saturating_mul(side) > budget {
        return Err(Error::BudgetExceeded {
            level,
            budget: format!("{budget} memo entries ({MEMO_BUDGET_ENV})"),
        }
        .into());
    }
    Ok(())
}

fn finish(report: RunReport, timing: bool, t0: Instant) -> CommandOutput {
    let mut report = report.finish();
    if timing {
        report.timing_ms = Some(t0.elapsed().as_millis());
    }
    CommandOutput::report(report)
}

/// `potential eval a b [--level n]`: `f(a,b)`, or `f_C(a/2^n, b/2^n)` when
/// a level is given.
pub fn potential_eval(a: u64, b: u64, level: Option<u32>) -> CliResult {
    let table = PotentialTable::new();
    let out = match level {
        None => table.f_int(a, b).to_string(),
        Some(n) => {
            let value = Rational::from_integer(table.f_int(a, b)) / rational_pow8(n);
            format_rational(&value)
        }
    };
    Ok(CommandOutput::text(format!("{out}\n")))
}

fn potential_checks(report: &mut RunReport, table: &PotentialTable, level: u32, lipschitz_cap: u32) {
    let bound = table.verify_bound(level);
    let witness_matches = bound.equality_set_matches_closure_witness();
    report.push_check("bound", bound.pass(), &bound);
    // the closure-witness characterization is conjecture-level: asserted on
    // small levels, recorded above them
    let asserted = level <= 5;
    report.push_check(
        "closure-witness",
        witness_matches || !asserted,
        json!({ "matches": witness_matches, "asserted": asserted }),
    );
    let identities = table.check_identities(level);
    report.push_check("identities", identities.pass(), &identities);
    let mut lipschitz = Vec::new();
    let mut lipschitz_ok = true;
    for n in 0..=lipschitz_cap.min(3) {
        for m in 0..=lipschitz_cap.min(3) {
            let r = table.lipschitz_check(n, m);
            lipschitz_ok &= r.holds;
            lipschitz.push(r);
        }
    }
    report.push_check("lipschitz", lipschitz_ok, &lipschitz);
}

/// `potential verify --level n`.
pub fn potential_verify(level: u32, timing: bool) -> CliResult {
    check_budget(level)?;
    let t0 = Instant::now();
    let mut report = RunReport::new("potential verify").arg("level", level);
    potential_checks(&mut report, &PotentialTable::new(), level, level);
    Ok(finish(report, timing, t0))
}

/// `integral eval a b`: exact `I(a, b)` at dyadic points of `[0,1]`.
pub fn integral_eval(a: &str, b: &str) -> CliResult {
    let x: Dyadic = a.parse()?;
    let y: Dyadic = b.parse()?;
    let value = i_eval(&x, &y)?;
    Ok(CommandOutput::text(format!("{}\n", format_rational(&value))))
}

fn integral_checks(report: &mut RunReport, level: u32) -> Result<(), CliError> {
    let table = PotentialTable::new();
    let mut oracle_ok = true;
    let mut oracle_checked = 0u64;
    for n in 0..=level {
        for p in 0..=(1u64 << n) {
            for q in 0..=(1u64 << n) {
                oracle_checked += 1;
                if i_eval(&Dyadic::from_u64(p, n), &Dyadic::from_u64(q, n))?
                    != closed_sum_oracle(p, q, n)?
                {
                    oracle_ok = false;
                }
            }
        }
    }
    report.push_check(
        "oracle-equivalence",
        oracle_ok,
        json!({ "checked": oracle_checked, "level": level }),
    );

    let top = 1u64 << level;
    let mut sym_ok = true;
    let mut hom_ok = true;
    let mut edge_ok = true;
    let mut rep_ok = true;
    let one = Dyadic::one();
    for p in 0..=top {
        let x = Dyadic::from_u64(p, level);
        if i_eval(&x, &one)? != x.to_rational() / rat(2, 1) {
            edge_ok = false;
        }
        for q in 0..=top {
            let y = Dyadic::from_u64(q, level);
            if i_eval(&x, &y)? != i_eval(&y, &x)? {
                sym_ok = false;
            }
            if p <= top / 2 && q <= top / 2 {
                let double =
                    i_eval(&Dyadic::from_u64(2 * p, level), &Dyadic::from_u64(2 * q, level))?;
                if double != rat(8, 1) * i_eval(&x, &y)? {
                    hom_ok = false;
                }
            }
            if f_via_integral(&x, &y)? != table.f_dyadic(&x, &y)? {
                rep_ok = false;
            }
        }
    }
    report.push_check("symmetry", sym_ok, json!({ "level": level }));
    report.push_check("homogeneity", hom_ok, json!({ "level": level }));
    report.push_check("unit-edge", edge_ok, json!({ "level": level }));
    report.push_check("integral-representation", rep_ok, json!({ "level": level }));
    Ok(())
}

/// `integral verify --level n`.
pub fn integral_verify(level: u32, timing: bool) -> CliResult {
    if level > 8 {
        return Err(CliError::Usage(
            "integral verify is capped at level 8 (the oracle is a quadratic double loop)".into(),
        ));
    }
    check_budget(level)?;
    let t0 = Instant::now();
    let mut report = RunReport::new("integral verify").arg("level", level);
    integral_checks(&mut report, level)?;
    Ok(finish(report, timing, t0))
}

fn read_to_string(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn emit(out: Option<&Path>, payload: String) -> CliResult {
    match out {
        None => Ok(CommandOutput::text(payload)),
        Some(path) => {
            std::fs::write(path, payload)
                .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
            Ok(CommandOutput::text(format!("wrote {}\n", path.display())))
        }
    }
}

/// `lp solve --in file [--out file]`.
pub fn lp_solve(input: &Path, out: Option<&Path>) -> CliResult {
    let problem = lp::io::problem_from_json(&read_to_string(input)?)?;
    let model = build_model(&problem.spec, &problem.cost, problem.sense)?;
    let sol = model.solve()?;
    let mut value = lp::io::solution_to_json(&model, &sol)?;
    value["consistency"] =
        serde_json::to_value(problem.spec.consistency_check()).map_err(Error::from)?;
    let mut payload = serde_json::to_string_pretty(&value).map_err(Error::from)?;
    payload.push('\n');
    emit(out, payload)
}

/// `lp feasibility --in file [--out file]`: consistency report plus phase
/// one only.
pub fn lp_feasibility(input: &Path, out: Option<&Path>) -> CliResult {
    let problem = lp::io::problem_from_json(&read_to_string(input)?)?;
    let consistency = problem.spec.consistency_check();
    let model = build_model(&problem.spec, &problem.cost, problem.sense)?;
    let prepared = model.prepare()?;
    let feasible = prepared.is_feasible();
    let farkas = if feasible {
        None
    } else {
        let sol = prepared.solve_objective(&model.cost, model.sense)?;
        sol.farkas
            .map(|f| f.iter().map(format_rational).collect::<Vec<_>>())
    };
    let value = json!({
        "consistent": consistency.consistent,
        "consistency": consistency,
        "feasible": feasible,
        "farkas": farkas,
    });
    let mut payload = serde_json::to_string_pretty(&value).map_err(Error::from)?;
    payload.push('\n');
    emit(out, payload)
}

/// `examples epsilon --eps p/q`.
pub fn examples_epsilon(eps: &str, timing: bool) -> CliResult {
    let eps = parse_rational(eps)?;
    let t0 = Instant::now();
    let r = epsilon_example(&eps)?;
    let mut report = RunReport::new("examples epsilon").arg("eps", format_rational(&eps));
    report.push_check("free-terms", r.free_term_plan == "12" && r.free_term_competitor == "10", json!({
        "plan": r.free_term_plan, "competitor": r.free_term_competitor,
    }));
    report.push_check("uniform-marginals", r.marginals_uniform, json!({}));
    report.push_check("competitor-beats-plan", r.competitor_beats_plan, json!({
        "plan": r.cost_plan, "competitor": r.cost_competitor,
    }));
    report.push_check("lp-not-above-competitor", r.lp_not_above_competitor, json!({
        "lp_min": r.lp_min,
    }));
    Ok(finish(report, timing, t0))
}

/// `examples baby-cube`: both optimization senses on the `{0,1}^3` cube
/// with uniform pairwise marginals.
pub fn examples_baby_cube(timing: bool) -> CliResult {
    let t0 = Instant::now();
    let spec = MarginalSpec::uniform(&[2, 2, 2], 2, rat(1, 1))?;
    let unit = vec![rat(0, 1), rat(1, 1)];
    let cost = xyz_cost_tensor(&unit, &unit, &unit);
    let mut report = RunReport::new("examples baby-cube");
    for (sense, expect, name) in [
        (Sense::Min, rat(0, 1), "min"),
        (Sense::Max, rat(1, 4), "max"),
    ] {
        let model = build_model(&spec, &cost, sense)?;
        let sol = model.solve()?;
        let objective = sol.objective.clone().expect("feasible cube");
        let parity = (sense == Sense::Max) as usize;
        let parity_ok = sol
            .atoms(&[2, 2, 2])
            .iter()
            .all(|(idx, _)| (idx[0] + idx[1] + idx[2]) % 2 == parity);
        report.push_check(
            name,
            objective == expect && parity_ok,
            json!({
                "objective": format_rational(&objective),
                "expected": format_rational(&expect),
                "support_parity_uniform": parity_ok,
            }),
        );
    }
    Ok(finish(report, timing, t0))
}

/// `examples four-point --trials n --seed s [--measures m]`.
pub fn examples_four_point(trials: u32, measures: u32, seed: u64, timing: bool) -> CliResult {
    let t0 = Instant::now();
    let r = four_point_theorem_check(trials, measures, seed)?;
    let mut report = RunReport::new("examples four-point")
        .arg("trials", trials)
        .arg("measures", measures);
    report.seed = Some(seed);
    report.push_check("lp-equals-plan", r.lp_matches == trials, json!({
        "matched": r.lp_matches, "trials": trials,
    }));
    report.push_check("cdf-dominance", r.failures.is_empty(), json!({
        "checked": r.dominance_checks, "failures": r.failures,
    }));
    Ok(finish(report, timing, t0))
}

/// `fractal export --level n --what ... --format ... --out path`.
pub fn fractal_export(
    level: u32,
    what: msk_core::fractal::FractalSet,
    format: msk_core::fractal::FractalFormat,
    out: &Path,
) -> CliResult {
    let file = std::fs::File::create(out)
        .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", out.display())))?;
    let mut writer = std::io::BufWriter::new(file);
    msk_core::fractal::export_fractal(level, what, format, &mut writer)?;
    use std::io::Write;
    writer.flush().map_err(Error::from)?;
    Ok(CommandOutput::text(format!("wrote {}\n", out.display())))
}

/// `monotone check --points file.csv [--sense max]`.
pub fn monotone_check(points: &Path, sense: Sense) -> CliResult {
    let set = point_set_from_csv(&read_to_string(points)?)?;
    let r = competitor_optimum(&set, sense)?;
    let witness_atoms: Vec<serde_json::Value> = r
        .witness
        .atoms()
        .map(|([i, j, k], w)| {
            let (xs, ys, zs) = r.witness.coords();
            json!({
                "x": format_rational(&xs[i]),
                "y": format_rational(&ys[j]),
                "z": format_rational(&zs[k]),
                "weight": format_rational(w),
            })
        })
        .collect();
    let value = json!({
        "monotone": r.monotone,
        "sense": sense,
        "points": set.points().len(),
        "base_cost": format_rational(&r.base_cost),
        "competitor_optimum": format_rational(&r.optimum),
        "witness_atoms": witness_atoms,
    });
    let mut payload = serde_json::to_string_pretty(&value).map_err(Error::from)?;
    payload.push('\n');
    Ok(CommandOutput::text(payload))
}

/// `verify-all --level n [--inject-fault]`: the full §6/§7 sweep.
pub fn verify_all(level: u32, inject_fault: bool, timing: bool) -> CliResult {
    check_budget(level)?;
    let t0 = Instant::now();
    let mut report = RunReport::new("verify-all")
        .arg("level", level)
        .arg("inject_fault", inject_fault);
    let table = if inject_fault {
        // deliberately corrupted base value: the sweeps must name a failing
        // identity
        PotentialTable::with_bases(0, -1, 3)
    } else {
        PotentialTable::new()
    };
    potential_checks(&mut report, &table, level, level);
    if !inject_fault {
        integral_checks(&mut report, level.min(6))?;
    } else {
        report.push_check(
            "fault-injected",
            false,
            json!({ "note": "base value f(1,1) overridden to 3" }),
        );
    }
    Ok(finish(report, timing, t0))
}

/// `report-duality --level n`: primal optimum vs plan cost vs dual
/// objective, with refinement gaps toward the continuous targets.
pub fn report_duality(level: u32, timing: bool) -> CliResult {
    if level > 4 {
        return Err(CliError::Usage(
            "report-duality is capped at level 4 (8^n LP variables)".into(),
        ));
    }
    let t0 = Instant::now();
    let mut report = RunReport::new("report-duality").arg("level", level);

    let s = 1usize << level;
    let spec = MarginalSpec::uniform(&[s, s, s], 2, rat(1, 1))?;
    let g = dyadic_grid(level);
    let model = build_model(&spec, &xyz_cost_tensor(&g, &g, &g), Sense::Min)?;
    let sol = model.solve()?;
    let lp_value = sol.objective.clone().expect("uniform problem feasible");
    let plan_value = xor_plan_left_cost(level, PlanKind::Min);
    let equal = lp_value == plan_value;
    // equality is a theorem at levels <= 2; recorded above
    report.push_check(
        "primal-equals-plan",
        equal || level > 2,
        json!({
            "lp": format_rational(&lp_value),
            "plan": format_rational(&plan_value),
            "equal": equal,
            "asserted": level <= 2,
        }),
    );

    // dual potentials of the solved LP certify the same value
    let pots = dual_potentials(&model, &sol)?;
    let dual_value = pots.objective(&spec);
    report.push_check(
        "lp-dual-objective",
        dual_value == lp_value,
        json!({ "value": format_rational(&dual_value) }),
    );

    // the recurrence potential (1/8) f_C as a feasible dual on this grid:
    // 3 * (1/8) * sum of f_C over cells, each weighted 1/4^n
    let table = PotentialTable::new();
    let mut fc_sum = Rational::from_integer(0.into());
    for i in 0..(1u64 << level) {
        for j in 0..(1u64 << level) {
            fc_sum += Rational::from_integer(table.f_int(i, j));
        }
    }
    let discrete_dual =
        rat(3, 8) * fc_sum / (rational_pow2(2 * level) * rational_pow8(level));
    report.push_check(
        "recurrence-dual-weak-duality",
        discrete_dual <= lp_value,
        json!({ "value": format_rational(&discrete_dual) }),
    );

    // refinement gaps toward the continuous targets, shrinking monotonically
    let min_target = rat(3, 28);
    let max_target = rat(1, 7);
    let mut gaps = Vec::new();
    let mut monotone = true;
    let mut last_min: Option<Rational> = None;
    let mut last_max: Option<Rational> = None;
    for n in 1..=8u32 {
        let gmin = (xor_plan_left_cost(n, PlanKind::Min) - &min_target).abs();
        let gmax = (xor_plan_left_cost(n, PlanKind::Max) - &max_target).abs();
        if let (Some(a), Some(b)) = (&last_min, &last_max) {
            monotone &= gmin <= *a && gmax <= *b;
        }
        gaps.push(json!({
            "level": n,
            "min_gap": format_rational(&gmin),
            "max_gap": format_rational(&gmax),
        }));
        last_min = Some(gmin);
        last_max = Some(gmax);
    }
    report.push_check(
        "refinement-gaps-shrink",
        monotone,
        json!({
            "min_target": "3/28",
            "max_target": "1/7",
            "gaps": gaps,
        }),
    );

    // rectangle increments of the solved dual potential: recorded, no sign
    // asserted
    let table01 = &pots.tables[&vec![0usize, 1]];
    if table01.dims()[0] >= 2 {
        let inc = rectangle_increments(table01)?;
        report.push_check("rectangle-increments", true, &inc);
    }
    Ok(finish(report, timing, t0))
}

/// `potential verify`-style wrapper for the xor-optimality recording used
/// by integration tests and docs.
pub fn xor_optimality(level: u32, sense: Sense, timing: bool) -> CliResult {
    let t0 = Instant::now();
    let r = xor_optimality_check(level, sense)?;
    let mut report = RunReport::new("xor-optimality")
        .arg("level", level)
        .arg("sense", format!("{sense:?}"));
    // equality is asserted only at the proved levels
    report.push_check("lp-equals-plan", r.equal || level > 2, &r);
    Ok(finish(report, timing, t0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_outputs() {
        assert_eq!(potential_eval(1, 2, None).unwrap().stdout, "7\n");
        assert_eq!(potential_eval(2, 1, Some(2)).unwrap().stdout, "7/64\n");
        assert_eq!(integral_eval("1", "1").unwrap().stdout, "1/2\n");
        assert_eq!(integral_eval("3/4", "1/2^1").unwrap().stdout, "5/32\n");
        assert!(integral_eval("1/3", "1").is_err());
    }

    #[test]
    fn verify_all_passes_and_fault_fails() {
        let ok = verify_all(2, false, false).unwrap();
        assert!(ok.passed);
        let faulty = verify_all(2, true, false).unwrap();
        assert!(!faulty.passed);
        // a named identity appears in the report
        assert!(faulty.stdout.contains("parity fails") || faulty.stdout.contains("fails at"));
    }

    #[test]
    fn report_round_trips() {
        let out = verify_all(1, false, false).unwrap();
        let parsed: report::RunReport = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(parsed.to_json_string(), out.stdout);
    }

}
