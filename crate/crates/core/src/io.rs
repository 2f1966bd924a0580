//! JSON documents for instances and plans.
//!
//! Money and quality values are decimal strings with six places on output
//! and any plain decimal on input. Level ordinals in files are 1-based and
//! every entity is referenced by its string id.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geo::GeoPoint;
use crate::model::{
    self, Assignment, Client, Contracting, CostBreakdown, DataCenter, ExecCostModel, MarketInstance, Placement, Plan,
    Provider, Purchase, QualityLevel,
};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    providers: Vec<ProviderFile>,
    data_centers: Vec<DataCenterFile>,
    clients: Vec<ClientFile>,
    exec_cost: ExecCostFile,
    contracting: Contracting,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProviderFile {
    id: String,
    levels: Vec<LevelFile>,
    oper_cost: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LevelFile {
    quality: String,
    per_query_fee: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bulk_fee: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DataCenterFile {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lon: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClientFile {
    id: String,
    demands: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    location: Option<GeoPoint>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum AlphaEntry {
    Scalar(String),
    PerLevel(Vec<String>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum ExecCostFile {
    /// provider id -> `[data center][client]` entries.
    Explicit {
        #[serde(default)]
        level_independent: bool,
        alpha: BTreeMap<String, Vec<Vec<AlphaEntry>>>,
    },
    Distance {
        rate: String,
    },
}

fn dec(s: &str, what: &str) -> Result<Rational> {
    rational::parse_decimal(s).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

fn fmt(v: &Rational) -> String {
    rational::format_decimal(v)
}

fn instance_from_file(file: InstanceFile) -> Result<MarketInstance> {
    let mut providers = Vec::with_capacity(file.providers.len());
    for p in &file.providers {
        let mut levels = Vec::with_capacity(p.levels.len());
        for (l, lvl) in p.levels.iter().enumerate() {
            levels.push(QualityLevel {
                index: l + 1,
                quality: dec(&lvl.quality, "quality")?,
                per_query_fee: dec(&lvl.per_query_fee, "per_query_fee")?,
                bulk_fee: lvl.bulk_fee.as_deref().map(|s| dec(s, "bulk_fee")).transpose()?,
            });
        }
        let oper_cost = p
            .oper_cost
            .iter()
            .map(|row| row.iter().map(|s| dec(s, "oper_cost")).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        providers.push(Provider { id: p.id.clone(), levels, oper_cost });
    }
    let data_centers = file
        .data_centers
        .iter()
        .map(|d| {
            let location = match (d.lat, d.lon) {
                (Some(lat), Some(lon)) => Some(GeoPoint::new(lat, lon)),
                (None, None) => None,
                _ => return Err(Error::Parse(format!("data center {} has only one coordinate", d.id))),
            };
            Ok(DataCenter { id: d.id.clone(), location })
        })
        .collect::<Result<Vec<_>>>()?;
    let clients = file
        .clients
        .iter()
        .map(|c| {
            let demands = c
                .demands
                .iter()
                .map(|(p, w)| Ok((p.clone(), dec(w, "demand")?)))
                .collect::<Result<BTreeMap<_, _>>>()?;
            Ok(Client { id: c.id.clone(), demands, location: c.location })
        })
        .collect::<Result<Vec<_>>>()?;
    let exec_cost = match file.exec_cost {
        ExecCostFile::Distance { rate } => ExecCostModel::Distance { rate: dec(&rate, "rate")? },
        ExecCostFile::Explicit { level_independent, mut alpha } => {
            for id in alpha.keys() {
                if !providers.iter().any(|p| &p.id == id) {
                    return Err(Error::Parse(format!("execution cost given for unknown provider {id}")));
                }
            }
            let mut tensor = Vec::with_capacity(providers.len());
            for p in &providers {
                let num_levels = p.levels.len();
                let rows = alpha
                    .remove(&p.id)
                    .ok_or_else(|| Error::Parse(format!("no execution cost for provider {}", p.id)))?;
                let m = rows
                    .iter()
                    .map(|row| {
                        row.iter()
                            .map(|e| match e {
                                AlphaEntry::Scalar(s) => Ok(vec![dec(s, "alpha")?; num_levels]),
                                AlphaEntry::PerLevel(v) => v.iter().map(|s| dec(s, "alpha")).collect(),
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                tensor.push(m);
            }
            ExecCostModel::Explicit { alpha: tensor, level_independent }
        }
    };
    Ok(MarketInstance { providers, data_centers, clients, exec_cost, contracting: file.contracting })
}

fn instance_to_file(instance: &MarketInstance) -> InstanceFile {
    let exec_cost = match &instance.exec_cost {
        ExecCostModel::Distance { rate } => ExecCostFile::Distance { rate: fmt(rate) },
        ExecCostModel::Explicit { alpha, level_independent } => ExecCostFile::Explicit {
            level_independent: *level_independent,
            alpha: instance
                .providers
                .iter()
                .zip(alpha)
                .map(|(p, m)| {
                    let rows = m
                        .iter()
                        .map(|row| {
                            row.iter()
                                .map(|v| {
                                    if *level_independent && v.iter().all(|x| x == &v[0]) && !v.is_empty() {
                                        AlphaEntry::Scalar(fmt(&v[0]))
                                    } else {
                                        AlphaEntry::PerLevel(v.iter().map(fmt).collect())
                                    }
                                })
                                .collect()
                        })
                        .collect();
                    (p.id.clone(), rows)
                })
                .collect(),
        },
    };
    InstanceFile {
        providers: instance
            .providers
            .iter()
            .map(|p| ProviderFile {
                id: p.id.clone(),
                levels: p
                    .levels
                    .iter()
                    .map(|l| LevelFile {
                        quality: fmt(&l.quality),
                        per_query_fee: fmt(&l.per_query_fee),
                        bulk_fee: l.bulk_fee.as_ref().map(fmt),
                    })
                    .collect(),
                oper_cost: p.oper_cost.iter().map(|r| r.iter().map(fmt).collect()).collect(),
            })
            .collect(),
        data_centers: instance
            .data_centers
            .iter()
            .map(|d| DataCenterFile {
                id: d.id.clone(),
                lat: d.location.map(|g| g.lat),
                lon: d.location.map(|g| g.lon),
            })
            .collect(),
        clients: instance
            .clients
            .iter()
            .map(|c| ClientFile {
                id: c.id.clone(),
                demands: c.demands.iter().map(|(p, w)| (p.clone(), fmt(w))).collect(),
                location: c.location,
            })
            .collect(),
        exec_cost,
        contracting: instance.contracting,
    }
}

/// Parses an instance without validating it.
pub fn parse_instance(text: &str) -> Result<MarketInstance> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    instance_from_file(file)
}

/// Parses and validates.
pub fn load_instance(text: &str) -> Result<MarketInstance> {
    let instance = parse_instance(text)?;
    model::ensure_valid(&instance)?;
    Ok(instance)
}

pub fn instance_to_value(instance: &MarketInstance) -> serde_json::Value {
    serde_json::to_value(instance_to_file(instance)).expect("plain data serializes")
}

pub fn instance_to_json(instance: &MarketInstance) -> String {
    serde_json::to_string_pretty(&instance_to_value(instance)).expect("plain data serializes")
}

/// Compact JSON with sorted keys and six-place decimals.
pub fn canonical_json(instance: &MarketInstance) -> String {
    // serde_json's default map is ordered by key
    serde_json::to_string(&instance_to_value(instance)).expect("plain data serializes")
}

/// Hex SHA-256 of the canonical JSON.
pub fn fingerprint(instance: &MarketInstance) -> String {
    let digest = Sha256::digest(canonical_json(instance).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PurchaseFile {
    provider: String,
    level: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PlacementFile {
    provider: String,
    data_center: String,
    level: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct AssignmentFile {
    client: String,
    provider: String,
    data_center: String,
    level: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PlanFile {
    purchases: Vec<PurchaseFile>,
    placements: Vec<PlacementFile>,
    assignments: Vec<AssignmentFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cost: Option<CostBreakdown>,
}

pub fn plan_to_value(instance: &MarketInstance, plan: &Plan, cost: Option<&CostBreakdown>) -> serde_json::Value {
    let pid = |p: usize| instance.providers[p].id.clone();
    let did = |d: usize| instance.data_centers[d].id.clone();
    let file = PlanFile {
        purchases: plan
            .purchases
            .iter()
            .map(|z| PurchaseFile { provider: pid(z.provider), level: z.level + 1 })
            .collect(),
        placements: plan
            .placements
            .iter()
            .map(|y| PlacementFile { provider: pid(y.provider), data_center: did(y.data_center), level: y.level + 1 })
            .collect(),
        assignments: plan
            .assignments
            .iter()
            .map(|x| AssignmentFile {
                client: instance.clients[x.client].id.clone(),
                provider: pid(x.provider),
                data_center: did(x.data_center),
                level: x.level + 1,
            })
            .collect(),
        cost: cost.cloned(),
    };
    serde_json::to_value(file).expect("plain data serializes")
}

pub fn plan_to_json(instance: &MarketInstance, plan: &Plan, cost: Option<&CostBreakdown>) -> String {
    serde_json::to_string_pretty(&plan_to_value(instance, plan, cost)).expect("plain data serializes")
}

/// Reads a plan against `instance`, returning it with the recorded cost if present.
pub fn parse_plan(instance: &MarketInstance, text: &str) -> Result<(Plan, Option<CostBreakdown>)> {
    let file: PlanFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let provider = |id: &str| instance.provider_index(id).ok_or_else(|| Error::Parse(format!("unknown provider {id}")));
    let dc = |id: &str| {
        instance
            .data_centers
            .iter()
            .position(|d| d.id == id)
            .ok_or_else(|| Error::Parse(format!("unknown data center {id}")))
    };
    let client = |id: &str| {
        instance.clients.iter().position(|c| c.id == id).ok_or_else(|| Error::Parse(format!("unknown client {id}")))
    };
    let level = |l: usize| l.checked_sub(1).ok_or_else(|| Error::Parse("levels are numbered from 1".into()));
    let mut plan = Plan::default();
    for z in &file.purchases {
        plan.purchases.insert(Purchase { provider: provider(&z.provider)?, level: level(z.level)? });
    }
    for y in &file.placements {
        plan.placements.insert(Placement {
            provider: provider(&y.provider)?,
            data_center: dc(&y.data_center)?,
            level: level(y.level)?,
        });
    }
    for x in &file.assignments {
        plan.assignments.insert(Assignment {
            client: client(&x.client)?,
            provider: provider(&x.provider)?,
            data_center: dc(&x.data_center)?,
            level: level(x.level)?,
        });
    }
    Ok((plan, file.cost))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{instance_a, instance_g};
    use crate::model::{evaluate_cost, ViolationKind};
    use crate::rational::int;

    #[test]
    fn instance_round_trip() {
        for inst in [instance_g(), instance_a()] {
            let text = instance_to_json(&inst);
            assert_eq!(load_instance(&text).unwrap(), inst);
        }
    }

    #[test]
    fn instance_g_document() {
        let v = instance_to_value(&instance_g());
        assert_eq!(v["providers"][0]["levels"][0]["per_query_fee"], "2.000000");
        assert_eq!(v["exec_cost"]["type"], "explicit");
        assert_eq!(v["exec_cost"]["alpha"]["p1"][1][0], "1.000000");
        assert_eq!(v["contracting"], "per_query");
    }

    #[test]
    fn per_level_alpha_and_distance() {
        let text = r#"{
            "providers": [{"id": "p", "levels": [{"quality": "1", "per_query_fee": "1"}, {"quality": "2", "per_query_fee": "2.5"}],
                           "oper_cost": [["1", "2"]]}],
            "data_centers": [{"id": "d"}],
            "clients": [{"id": "c", "demands": {"p": "1.5"}}],
            "exec_cost": {"type": "explicit", "alpha": {"p": [[["0.1", "0.2"]]]}},
            "contracting": "per_query"
        }"#;
        let inst = load_instance(text).unwrap();
        assert_eq!(inst.exec_cost(0, 0, 0, 1).unwrap(), crate::rational::ratio(1, 5));
        assert!(!inst.exec_level_independent());

        let text = r#"{
            "providers": [{"id": "p", "levels": [{"quality": "1", "per_query_fee": "1"}], "oper_cost": [["1"]]}],
            "data_centers": [{"id": "d", "lat": 0.0, "lon": 0.0}],
            "clients": [{"id": "c", "demands": {"p": "1"}, "location": {"lat": 0.0, "lon": 1.0}}],
            "exec_cost": {"type": "distance", "rate": "1000"},
            "contracting": "bulk"
        }"#;
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.contracting, Contracting::Bulk);
        assert_eq!(fmt(&inst.exec_cost(0, 0, 0, 0).unwrap()), "0.111195");
        let again = parse_instance(&instance_to_json(&inst)).unwrap();
        assert_eq!(again, inst);
    }

    #[test]
    fn malformed_documents() {
        assert!(matches!(parse_instance("{"), Err(Error::Parse(_))));
        assert!(matches!(parse_instance("{\"providers\": 3}"), Err(Error::Parse(_))));
        let mut v = instance_to_value(&instance_g());
        v["providers"][0]["levels"][0]["quality"] = "1e3".into();
        assert!(matches!(parse_instance(&v.to_string()), Err(Error::Parse(_))));
        let mut v = instance_to_value(&instance_g());
        v["exec_cost"]["alpha"]["nobody"] = serde_json::json!([]);
        assert!(parse_instance(&v.to_string()).is_err());
    }

    #[test]
    fn invalid_instance_is_reported() {
        let mut v = instance_to_value(&instance_g());
        v["clients"][0]["demands"]["p1"] = "7".into();
        match load_instance(&v.to_string()) {
            Err(Error::InvalidInstance(report)) => assert!(report.has(ViolationKind::UnsatisfiableDemand)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fingerprint_is_stable_and_sensitive() {
        let g = instance_g();
        assert_eq!(fingerprint(&g), fingerprint(&g.clone()));
        assert_eq!(fingerprint(&g).len(), 64);
        let reparsed = parse_instance(&instance_to_json(&g)).unwrap();
        assert_eq!(fingerprint(&g), fingerprint(&reparsed));
        let mut h = g.clone();
        h.providers[0].oper_cost[0][0] = int(6);
        assert_ne!(fingerprint(&g), fingerprint(&h));
        assert!(!canonical_json(&g).contains('\n'));
    }

    #[test]
    fn plan_round_trip() {
        let inst = instance_g();
        let (plan, cost) = crate::baselines::opt_cost(&inst, Default::default()).unwrap();
        let text = plan_to_json(&inst, &plan, Some(&cost));
        assert!(text.contains("\"dc2\""));
        assert!(text.contains("\"total\": \"10.000000\""));
        let (back, recorded) = parse_plan(&inst, &text).unwrap();
        assert_eq!(back, plan);
        assert_eq!(evaluate_cost(&inst, &back).unwrap(), recorded.unwrap());
    }

    #[test]
    fn plan_with_bad_references() {
        let inst = instance_g();
        let text = r#"{"purchases": [{"provider": "p1", "level": 0}], "placements": [], "assignments": []}"#;
        assert!(parse_plan(&inst, text).is_err());
        let text = r#"{"purchases": [], "placements": [{"provider": "p1", "data_center": "dc9", "level": 1}], "assignments": []}"#;
        assert!(parse_plan(&inst, text).is_err());
    }
}
