//! JSON instance files: `{"m": int, "players": [{"clauses": [...]}, ...]}` where each
//! clause is either a value array or `{"set": [item, ...]}`, plus an optional
//! `provenance` block describing how the instance was produced.

use crate::error::{Error, Result};
use crate::hardness::{F1Instance, GInstance};
use crate::valuation::{Clause, Valuation};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use std::path::Path;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum ClauseJson {
    Values(Vec<f64>),
    Set { set: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlayerJson {
    clauses: Vec<ClauseJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceJson {
    m: usize,
    players: Vec<PlayerJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<Provenance>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub construction: String,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Hidden structure of a planted instance; omitted unless explicitly revealed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hidden: Option<Value>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub m: usize,
    pub players: Vec<Valuation>,
    pub provenance: Option<Provenance>,
}

impl Instance {
    pub fn new(players: Vec<Valuation>) -> Result<Self> {
        let m = players
            .first()
            .map(Valuation::m)
            .ok_or_else(|| Error::Format("an instance needs at least one player".into()))?;
        if let Some(v) = players.iter().find(|v| v.m() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: v.m(),
            });
        }
        Ok(Instance {
            m,
            players,
            provenance: None,
        })
    }

    pub fn with_provenance(mut self, p: Provenance) -> Self {
        self.provenance = Some(p);
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: InstanceJson =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        let players = raw
            .players
            .into_iter()
            .enumerate()
            .map(|(p, pj)| {
                let clauses = pj
                    .clauses
                    .into_iter()
                    .map(|c| match c {
                        ClauseJson::Values(vs) => {
                            if vs.len() != raw.m {
                                return Err(Error::Format(format!(
                                    "player {p}: clause has {} values for {} items",
                                    vs.len(),
                                    raw.m
                                )));
                            }
                            Clause::new(vs)
                        }
                        ClauseJson::Set { set } => Clause::from_indices(raw.m, &set),
                    })
                    .collect::<Result<Vec<_>>>()?;
                Valuation::new(raw.m, clauses)
            })
            .collect::<Result<Vec<_>>>()?;
        if players.is_empty() {
            return Err(Error::Format(
                "an instance needs at least one player".into(),
            ));
        }
        Ok(Instance {
            m: raw.m,
            players,
            provenance: raw.provenance,
        })
    }

    /// Binary clauses are written in set form, all others as value arrays.
    pub fn to_json(&self) -> String {
        let raw = InstanceJson {
            m: self.m,
            players: self
                .players
                .iter()
                .map(|v| PlayerJson {
                    clauses: v
                        .clauses()
                        .iter()
                        .map(|c| match c.as_set() {
                            Some(s) => ClauseJson::Set { set: s.to_vec() },
                            None => ClauseJson::Values(c.values()),
                        })
                        .collect(),
                })
                .collect(),
            provenance: self.provenance.clone(),
        };
        serde_json::to_string(&raw).expect("instances always serialize")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }
}

fn params(pairs: Value) -> Map<String, Value> {
    match pairs {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}

/// Planted-pair instance as a file; `reveal` adds the condition report.
pub fn f1_to_instance(inst: &F1Instance, reveal: bool) -> Instance {
    let p = &inst.params;
    let hidden = reveal.then(|| {
        json!({
            "planted_clause": 0,
            "violations": inst.conditions.violations,
            "evaluated": inst.conditions.evaluated,
        })
    });
    Instance {
        m: p.m(),
        players: vec![inst.v1.clone(), inst.v2.clone()],
        provenance: Some(Provenance {
            construction: "planted-pair".into(),
            params: params(json!({
                "eps": p.eps().to_string(),
                "t": p.t(),
                "attempts": inst.attempts,
                "verified": inst.verified,
            })),
            seed: Some(inst.seed),
            hidden,
        }),
    }
}

/// Hidden-bit instance as a file; `reveal` adds `M`, `S`, `T`, `U1`, `U2`, `J1`, `J2`.
pub fn g_to_instance(inst: &GInstance, reveal: bool) -> Instance {
    let h = &inst.hidden;
    let hidden = reveal.then(|| {
        json!({
            "bit": h.bit,
            "s": h.s.to_vec(),
            "t": h.t.to_vec(),
            "u1": h.u1.to_vec(),
            "u2": h.u2.to_vec(),
            "j1": h.j1,
            "j2": h.j2,
        })
    });
    Instance {
        m: inst.m,
        players: vec![inst.v1.clone(), inst.v2.clone()],
        provenance: Some(Provenance {
            construction: "hidden-bit".into(),
            params: params(json!({ "l": inst.l })),
            seed: Some(inst.seed),
            hidden,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_clause_forms_load() {
        let text = r#"{"m": 3, "players": [
            {"clauses": [[1, 0, 1], {"set": [1]}]},
            {"clauses": [[0.5, 2, 0]]}
        ]}"#;
        let inst = Instance::from_json(text).unwrap();
        assert_eq!(inst.players.len(), 2);
        assert!(inst.players[0].is_binary());
        assert!(!inst.players[1].is_binary());
        assert_eq!(
            inst.players[0].clause(0),
            &Clause::from_indices(3, &[0, 2]).unwrap()
        );
        let again = Instance::from_json(&inst.to_json()).unwrap();
        assert_eq!(again, inst);
        assert_eq!(again.to_json(), inst.to_json());
    }

    #[test]
    fn malformed_files_are_rejected() {
        for bad in [
            r#"{"m": 2, "players": [{"clauses": [[1, 0, 1]]}]}"#,
            r#"{"m": 2, "players": [{"clauses": [{"set": [5]}]}]}"#,
            r#"{"m": 2, "players": [{"clauses": []}]}"#,
            r#"{"m": 2, "players": []}"#,
            r#"{"m": 2, "players": [{"clauses": [[1, 0]]}], "extra": 1}"#,
            r#"{"m": 2, "players": [{"clauses": [[-1, 0]]}]}"#,
        ] {
            assert!(Instance::from_json(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn hidden_fields_need_reveal() {
        let g = crate::hardness::gen_appendix_g(12, 3, 1, Some(1)).unwrap();
        let closed = g_to_instance(&g, false).to_json();
        assert!(!closed.contains("\"bit\""));
        let open = g_to_instance(&g, true);
        assert_eq!(
            open.provenance.as_ref().unwrap().hidden.as_ref().unwrap()["bit"],
            1
        );
        assert_eq!(Instance::from_json(&open.to_json()).unwrap(), open);
    }
}
