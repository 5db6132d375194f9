//! JSON problem and solution formats. Every number travels as an exact
//! `"p/q"` string; no floats appear anywhere.

use super::{
    dual_potentials, subset_label, DualPotentials, LpModel, LpSolution, LpStatus, MarginalSpec,
    Sense,
};
use crate::rational::{format_rational, parse_rational};
use crate::tensor::Tensor;
use crate::{Error, Rational, Result};
use serde_json::{json, Map, Value};
use std::collections::BTreeMap;

fn parse_subset_key(key: &str) -> Result<Vec<usize>> {
    let err = || Error::Parse {
        input: key.to_string(),
        expected: "subset key like \"01\"",
    };
    let parts: Vec<usize> = if key.contains(',') {
        key.split(',')
            .map(|p| p.trim().parse::<usize>().map_err(|_| err()))
            .collect::<Result<_>>()?
    } else {
        key.chars()
            .map(|c| c.to_digit(10).map(|d| d as usize).ok_or_else(err))
            .collect::<Result<_>>()?
    };
    Ok(parts)
}

/// Nested arrays of `"p/q"` strings into a tensor of the given shape.
fn tensor_from_value(v: &Value, dims: &[usize]) -> Result<Tensor<Rational>> {
    fn collect(v: &Value, dims: &[usize], out: &mut Vec<Rational>) -> Result<()> {
        match dims.split_first() {
            None => {
                let s = v.as_str().ok_or(Error::Parse {
                    input: v.to_string(),
                    expected: "rational string leaf",
                })?;
                out.push(parse_rational(s)?);
                Ok(())
            }
            Some((d, rest)) => {
                let arr = v.as_array().ok_or(Error::Parse {
                    input: v.to_string(),
                    expected: "nested array",
                })?;
                if arr.len() != *d {
                    return Err(Error::DimensionMismatch(format!(
                        "array length {} expected {d}",
                        arr.len()
                    )));
                }
                for item in arr {
                    collect(item, rest, out)?;
                }
                Ok(())
            }
        }
    }
    let mut data = Vec::with_capacity(dims.iter().product());
    collect(v, dims, &mut data)?;
    Tensor::from_data(dims.to_vec(), data)
}

fn tensor_to_value(t: &Tensor<Rational>) -> Value {
    fn build(data: &[Rational], dims: &[usize]) -> Value {
        match dims.split_first() {
            None => Value::String(format_rational(&data[0])),
            Some((d, rest)) => {
                let stride: usize = rest.iter().product();
                Value::Array(
                    (0..*d)
                        .map(|i| build(&data[i * stride..(i + 1) * stride], rest))
                        .collect(),
                )
            }
        }
    }
    build(t.data(), t.dims())
}

/// A parsed problem file.
pub struct Problem {
    pub spec: MarginalSpec,
    pub cost: Tensor<Rational>,
    pub sense: Sense,
    pub coords: Option<Vec<Vec<Rational>>>,
}

pub fn problem_from_json(text: &str) -> Result<Problem> {
    let v: Value = serde_json::from_str(text)?;
    let obj = v.as_object().ok_or(Error::Parse {
        input: "<root>".into(),
        expected: "json object",
    })?;
    let sizes: Vec<usize> = obj
        .get("sizes")
        .and_then(|s| s.as_array())
        .ok_or(Error::Parse {
            input: "sizes".into(),
            expected: "array of integers",
        })?
        .iter()
        .map(|x| {
            x.as_u64().map(|u| u as usize).ok_or(Error::Parse {
                input: x.to_string(),
                expected: "integer size",
            })
        })
        .collect::<Result<_>>()?;
    let k = obj.get("k").and_then(|x| x.as_u64()).ok_or(Error::Parse {
        input: "k".into(),
        expected: "integer",
    })? as usize;
    let marg_obj = obj
        .get("marginals")
        .and_then(|m| m.as_object())
        .ok_or(Error::Parse {
            input: "marginals".into(),
            expected: "object keyed by subsets",
        })?;
    let mut marginals = BTreeMap::new();
    for (key, val) in marg_obj {
        let subset = parse_subset_key(key)?;
        let dims: Vec<usize> = subset
            .iter()
            .map(|&a| {
                sizes.get(a).copied().ok_or(Error::InvalidInput(format!(
                    "subset {key} references axis {a} out of range"
                )))
            })
            .collect::<Result<_>>()?;
        marginals.insert(subset, tensor_from_value(val, &dims)?);
    }
    let spec = MarginalSpec::new(sizes.clone(), k, marginals)?;
    let coords = match obj.get("coords") {
        None => None,
        Some(Value::Object(map)) => {
            let mut out = vec![Vec::new(); sizes.len()];
            for (key, val) in map {
                let axis: usize = key.parse().map_err(|_| Error::Parse {
                    input: key.clone(),
                    expected: "axis index",
                })?;
                let arr = val.as_array().ok_or(Error::Parse {
                    input: key.clone(),
                    expected: "coordinate array",
                })?;
                out[axis] = arr
                    .iter()
                    .map(|x| {
                        parse_rational(x.as_str().unwrap_or_default())
                    })
                    .collect::<Result<_>>()?;
            }
            for (axis, c) in out.iter().enumerate() {
                if c.len() != sizes[axis] {
                    return Err(Error::DimensionMismatch(format!(
                        "coords[{axis}] has {} entries, size is {}",
                        c.len(),
                        sizes[axis]
                    )));
                }
            }
            Some(out)
        }
        Some(other) => {
            return Err(Error::Parse {
                input: other.to_string(),
                expected: "coords object",
            })
        }
    };
    let cost = match obj.get("cost") {
        Some(Value::String(s)) if s == "xyz" => {
            if sizes.len() != 3 {
                return Err(Error::InvalidInput(
                    "cost \"xyz\" needs exactly three axes".into(),
                ));
            }
            let default_axis = |axis: usize| -> Vec<Rational> {
                let s = sizes[axis];
                (0..s)
                    .map(|i| Rational::new((i as i64).into(), (s as i64).into()))
                    .collect()
            };
            let grids: Vec<Vec<Rational>> = match &coords {
                Some(c) => c.clone(),
                None => (0..3).map(default_axis).collect(),
            };
            super::xyz_cost_tensor(&grids[0], &grids[1], &grids[2])
        }
        Some(v) => tensor_from_value(v, &sizes)?,
        None => {
            return Err(Error::Parse {
                input: "cost".into(),
                expected: "tensor or \"xyz\"",
            })
        }
    };
    let sense = match obj.get("sense").and_then(|s| s.as_str()) {
        Some("min") | None => Sense::Min,
        Some("max") => Sense::Max,
        Some(other) => {
            return Err(Error::Parse {
                input: other.to_string(),
                expected: "\"min\" or \"max\"",
            })
        }
    };
    Ok(Problem {
        spec,
        cost,
        sense,
        coords,
    })
}

pub fn problem_to_json(spec: &MarginalSpec, cost: &Tensor<Rational>, sense: Sense) -> Value {
    let mut marginals = Map::new();
    for (subset, t) in spec.marginals() {
        marginals.insert(subset_label(subset), tensor_to_value(t));
    }
    json!({
        "sizes": spec.sizes(),
        "k": spec.k(),
        "marginals": Value::Object(marginals),
        "cost": tensor_to_value(cost),
        "sense": match sense { Sense::Min => "min", Sense::Max => "max" },
    })
}

/// Solution report: status, exact objective, sparse atoms, dual potentials,
/// certificates and check flags.
pub fn solution_to_json(model: &LpModel, sol: &LpSolution) -> Result<Value> {
    let atoms: Vec<Value> = sol
        .atoms(&model.sizes)
        .into_iter()
        .map(|(idx, w)| json!({ "index": idx, "weight": format_rational(&w) }))
        .collect();
    let potentials: Option<DualPotentials> = if sol.status == LpStatus::Optimal {
        Some(dual_potentials(model, sol)?)
    } else {
        None
    };
    let dual_tables = potentials.as_ref().map(|p| {
        let mut m = Map::new();
        for (subset, t) in &p.tables {
            m.insert(subset_label(subset), tensor_to_value(t));
        }
        Value::Object(m)
    });
    let dropped: Vec<Value> = model
        .dropped_rows()
        .iter()
        .map(|&r| {
            let id = &model.row_ids()[r];
            json!({ "subset": subset_label(&id.subset), "cell": id.cell })
        })
        .collect();
    Ok(json!({
        "status": sol.status,
        "objective": sol.objective.as_ref().map(format_rational),
        "atoms": atoms,
        "dual_potentials": dual_tables,
        "normalization": potentials.as_ref().map(|p| p.normalization),
        "farkas": sol.farkas.as_ref().map(|f| f.iter().map(format_rational).collect::<Vec<_>>()),
        "checks": sol.checks,
        "dropped_rows": dropped,
        "pivots": sol.pivots,
    }))
}
