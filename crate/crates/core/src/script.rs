//! Ordered operation scripts over a diagram.
//!
//! - A script is a JSON list of commands: the mutations `slide`, `remove`,
//!   `branch`, and the analyses `validate`, `trace`, `holonomy`, `seed`,
//!   `exact`.
//! - Execution is transactional: commands run left to right against a
//!   working copy, and the first failure aborts the whole run with nothing
//!   to keep.
//! - Analyses append JSON reports; mutations replace the working diagram.

use crate::affine::{IntegralAffineMap, Vec2Q};
use crate::atlas::{ChartAtlas, Loop};
use crate::diagram::EigenrayDiagram;
use crate::error::{Error, Result};
use crate::exact::{fmt_rat, WireRat};
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// One step of a script.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum ScriptCommand {
    Slide { node: [WireRat; 2], to: [WireRat; 2] },
    Remove { node: [WireRat; 2] },
    Branch { node: [WireRat; 2] },
    Validate,
    Trace { start: [WireRat; 2], dir: [WireRat; 2], budget: WireRat },
    Holonomy {
        #[serde(rename = "loop")]
        vertices: Vec<[WireRat; 2]>,
    },
    Seed,
    Exact,
}

/// An ordered list of commands.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperationScript {
    pub commands: Vec<ScriptCommand>,
}

impl OperationScript {
    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::parse(format!("script: {e}")))
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("script serialization cannot fail")
    }
}

/// Result of a successful run: the final diagram and one report per
/// analysis command, in script order.
#[derive(Clone, Debug)]
pub struct ScriptOutcome {
    pub diagram: EigenrayDiagram,
    pub reports: Vec<Value>,
}

fn point(p: &[WireRat; 2]) -> Vec2Q {
    Vec2Q::new(p[0].0.clone(), p[1].0.clone())
}

/// Wire form of an integral affine map: integer matrix rows plus a rational
/// translation, `{"linear": [[a, b], [c, d]], "translate": ["x", "y"]}`.
pub fn map_to_json(m: &IntegralAffineMap) -> Value {
    let int_value = |i: &crate::exact::Int| -> Value {
        i.to_i64().map(Value::from).unwrap_or_else(|| Value::from(i.to_string()))
    };
    json!({
        "linear": [
            [int_value(&m.linear[0][0]), int_value(&m.linear[0][1])],
            [int_value(&m.linear[1][0]), int_value(&m.linear[1][1])],
        ],
        "translate": [fmt_rat(&m.translate.x), fmt_rat(&m.translate.y)],
    })
}

/// Wire form of the seed data: one `{"dir": [x, y], "flux": "p/q"}` entry per
/// canonical diagram element.
pub fn seed_to_json(diagram: &EigenrayDiagram) -> Value {
    let seed: Vec<Value> = diagram
        .seed_data()
        .iter()
        .map(|(v, f)| {
            json!({
                "dir": [
                    v.x.to_i64().map(Value::from)
                        .unwrap_or_else(|| Value::from(v.x.to_string())),
                    v.y.to_i64().map(Value::from)
                        .unwrap_or_else(|| Value::from(v.y.to_string())),
                ],
                "flux": fmt_rat(f),
            })
        })
        .collect();
    Value::from(seed)
}

/// Wire form of the exactness verdict: `{"exact": bool, "base": [x, y] | null}`.
pub fn exactness_to_json(diagram: &EigenrayDiagram) -> Value {
    let witness = diagram.is_exact();
    json!({
        "exact": witness.is_some(),
        "base": witness.map(|p| json!([fmt_rat(&p.x), fmt_rat(&p.y)])),
    })
}

/// Runs the script against a copy of `diagram`; the input is never touched.
pub fn run_script(diagram: &EigenrayDiagram, script: &OperationScript) -> Result<ScriptOutcome> {
    let mut current = diagram.clone();
    let mut reports = Vec::new();
    for cmd in &script.commands {
        match cmd {
            ScriptCommand::Slide { node, to } => {
                current = current.nodal_slide(&point(node), &point(to))?;
            }
            ScriptCommand::Remove { node } => {
                current = current.node_removal(&point(node))?;
            }
            ScriptCommand::Branch { node } => {
                current = current.branch_move(&point(node))?;
            }
            ScriptCommand::Validate => {
                let report = current.to_doc().validate();
                reports.push(json!({
                    "op": "validate",
                    "report": serde_json::to_value(&report)
                        .map_err(|e| Error::parse(e.to_string()))?,
                }));
            }
            ScriptCommand::Trace { start, dir, budget } => {
                let atlas = ChartAtlas::new(current.clone());
                let path =
                    atlas.trace_geodesic(&point(start), &point(dir), &budget.0)?;
                let path_json: Value = serde_json::from_str(&path.to_json_string())
                    .map_err(|e| Error::parse(e.to_string()))?;
                reports.push(json!({ "op": "trace", "path": path_json }));
            }
            ScriptCommand::Holonomy { vertices } => {
                let atlas = ChartAtlas::new(current.clone());
                let l = Loop { vertices: vertices.iter().map(point).collect() };
                let map = atlas.holonomy(&l)?;
                reports.push(json!({ "op": "holonomy", "map": map_to_json(&map) }));
            }
            ScriptCommand::Seed => {
                reports.push(json!({ "op": "seed", "seed": seed_to_json(&current) }));
            }
            ScriptCommand::Exact => {
                let mut entry = json!({ "op": "exact" });
                if let (Value::Object(target), Value::Object(body)) =
                    (&mut entry, exactness_to_json(&current))
                {
                    target.extend(body);
                }
                reports.push(entry);
            }
        }
    }
    Ok(ScriptOutcome { diagram: current, reports })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat, rat_int};

    fn wp(x: i64, y: i64) -> [WireRat; 2] {
        [WireRat(rat_int(x)), WireRat(rat_int(y))]
    }

    #[test]
    fn scripts_round_trip_and_reject_junk() {
        let script = OperationScript {
            commands: vec![
                ScriptCommand::Slide { node: wp(1, 0), to: wp(-1, 0) },
                ScriptCommand::Validate,
                ScriptCommand::Trace {
                    start: wp(3, 2),
                    dir: wp(1, 1),
                    budget: WireRat(rat_int(5)),
                },
                ScriptCommand::Holonomy { vertices: vec![wp(0, 0), wp(4, 0), wp(4, 4)] },
                ScriptCommand::Seed,
                ScriptCommand::Exact,
                ScriptCommand::Remove { node: wp(-1, 0) },
                ScriptCommand::Branch { node: wp(0, 1) },
            ],
        };
        let text = script.to_json_string();
        assert_eq!(OperationScript::from_json_str(&text).unwrap(), script);
        assert!(OperationScript::from_json_str(r#"{"commands":[{"op":"warp"}]}"#).is_err());
        assert!(OperationScript::from_json_str(r#"{"commands":[{"op":"slide"}]}"#).is_err());
        assert!(OperationScript::from_json_str("{}").is_err());
    }

    #[test]
    fn empty_script_is_the_identity() {
        let d = EigenrayDiagram::five_charts();
        let out = run_script(&d, &OperationScript { commands: vec![] }).unwrap();
        assert_eq!(out.diagram.to_json_string(), d.to_json_string());
        assert!(out.reports.is_empty());
    }

    #[test]
    fn slide_script_matches_direct_operation() {
        let d = EigenrayDiagram::five_charts();
        let script = OperationScript {
            commands: vec![ScriptCommand::Slide { node: wp(1, 0), to: wp(-1, 0) }],
        };
        let out = run_script(&d, &script).unwrap();
        let direct = d
            .nodal_slide(&Vec2Q::new(rat_int(1), rat_int(0)), &Vec2Q::new(rat_int(-1), rat_int(0)))
            .unwrap();
        assert_eq!(out.diagram.to_json_string(), direct.to_json_string());
    }

    #[test]
    fn failures_abort_without_partial_results() {
        let d = EigenrayDiagram::five_charts();
        // Second command targets a node that no longer exists.
        let script = OperationScript {
            commands: vec![
                ScriptCommand::Remove { node: wp(1, 0) },
                ScriptCommand::Slide { node: wp(1, 0), to: wp(2, 0) },
            ],
        };
        assert!(run_script(&d, &script).is_err());
        // Input diagram untouched by reference semantics.
        assert_eq!(d.elements().len(), 2);
    }

    #[test]
    fn analysis_commands_report_in_order() {
        let d = EigenrayDiagram::five_charts();
        let script = OperationScript {
            commands: vec![
                ScriptCommand::Validate,
                ScriptCommand::Seed,
                ScriptCommand::Exact,
                ScriptCommand::Holonomy {
                    vertices: vec![wp(-1, -1), wp(5, -1), wp(5, 5), wp(-1, 5)],
                },
            ],
        };
        let out = run_script(&d, &script).unwrap();
        assert_eq!(out.reports.len(), 4);
        assert_eq!(out.reports[0]["op"], "validate");
        assert_eq!(out.reports[0]["report"]["violations"], json!([]));
        assert_eq!(out.reports[1]["seed"][0]["dir"], json!([0, 1]));
        assert_eq!(out.reports[1]["seed"][0]["flux"], json!("0/1"));
        assert_eq!(out.reports[2]["op"], "exact");
        assert_eq!(out.reports[3]["op"], "holonomy");
        // The loop encloses both nodes; the holonomy is a nontrivial shear
        // composite, so the linear part is not the identity.
        assert_ne!(out.reports[3]["map"]["linear"], json!([[1, 0], [0, 1]]));
    }

    #[test]
    fn trace_reports_carry_the_path() {
        let d = EigenrayDiagram::five_charts();
        let script = OperationScript {
            commands: vec![ScriptCommand::Trace {
                start: [WireRat(rat(-1, 2)), WireRat(rat(1, 3))],
                dir: wp(1, 1),
                budget: WireRat(rat_int(4)),
            }],
        };
        let out = run_script(&d, &script).unwrap();
        assert_eq!(out.reports[0]["op"], "trace");
        assert!(out.reports[0]["path"]["segments"].as_array().unwrap().len() >= 1);
        assert!(out.reports[0]["path"]["status"].is_string());
    }
}
