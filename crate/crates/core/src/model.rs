//! Market data model: providers offering quality levels, data centers,
//! clients with per-provider quality floors, and the plan/cost types.
//!
//! Indices are 0-based everywhere in memory. Level ordinals are shown
//! 1-based only at the JSON boundary.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{self, GeoPoint};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq)]
pub struct QualityLevel {
    /// 1-based ordinal within the provider.
    pub index: usize,
    pub quality: Rational,
    pub per_query_fee: Rational,
    pub bulk_fee: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Provider {
    pub id: String,
    pub levels: Vec<QualityLevel>,
    /// `oper_cost[d][l]`: cost of moving level `l` to data center `d`.
    pub oper_cost: Vec<Vec<Rational>>,
}

impl Provider {
    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    /// Smallest level index whose quality meets `required`.
    pub fn min_level_for(&self, required: &Rational) -> Option<usize> {
        self.levels.iter().position(|lvl| &lvl.quality >= required)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataCenter {
    pub id: String,
    pub location: Option<GeoPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Client {
    pub id: String,
    /// provider id -> required quality value.
    pub demands: BTreeMap<String, Rational>,
    pub location: Option<GeoPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExecCostModel {
    /// `alpha[p][d][c][l]`.
    Explicit { alpha: Vec<Vec<Vec<Vec<Rational>>>>, level_independent: bool },
    /// `rate * haversine(d, c)` in money per gigameter; never varies with the level.
    Distance { rate: Rational },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Contracting {
    PerQuery,
    Bulk,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarketInstance {
    pub providers: Vec<Provider>,
    pub data_centers: Vec<DataCenter>,
    pub clients: Vec<Client>,
    pub exec_cost: ExecCostModel,
    pub contracting: Contracting,
}

impl MarketInstance {
    pub fn num_data_centers(&self) -> usize {
        self.data_centers.len()
    }

    pub fn provider_index(&self, id: &str) -> Option<usize> {
        self.providers.iter().position(|p| p.id == id)
    }

    pub fn exec_level_independent(&self) -> bool {
        match &self.exec_cost {
            ExecCostModel::Explicit { level_independent, .. } => *level_independent,
            ExecCostModel::Distance { .. } => true,
        }
    }

    /// alpha_{d,c}(l, p).
    pub fn exec_cost(&self, p: usize, d: usize, c: usize, l: usize) -> Result<Rational> {
        match &self.exec_cost {
            ExecCostModel::Explicit { alpha, .. } => alpha
                .get(p)
                .and_then(|m| m.get(d))
                .and_then(|m| m.get(c))
                .and_then(|m| m.get(l))
                .cloned()
                .ok_or_else(|| Error::DimensionMismatch(format!("no execution cost for p={p} d={d} c={c} l={l}"))),
            ExecCostModel::Distance { rate } => {
                let dc = self.data_centers[d].location;
                let cl = self.clients[c].location;
                match (dc, cl) {
                    (Some(a), Some(b)) => Ok(geo::distance_cost(rate, a, b)),
                    _ => Err(Error::DimensionMismatch(format!(
                        "distance-based execution cost needs coordinates for data center {} and client {}",
                        self.data_centers[d].id, self.clients[c].id
                    ))),
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViolationKind {
    DuplicateId,
    EmptyLevels,
    NonPositiveQuality,
    NonMonotoneQuality,
    NonMonotoneFees,
    NegativeCost,
    DimensionMismatch,
    UnknownProvider,
    UnsatisfiableDemand,
    MissingCoordinates,
    InvalidCoordinates,
    MissingBulkFee,
    LevelDependence,
}

impl ViolationKind {
    pub fn label(self) -> &'static str {
        match self {
            ViolationKind::DuplicateId => "duplicate id",
            ViolationKind::EmptyLevels => "provider has no levels",
            ViolationKind::NonPositiveQuality => "quality not strictly positive",
            ViolationKind::NonMonotoneQuality => "qualities not strictly increasing",
            ViolationKind::NonMonotoneFees => "fees not strictly increasing",
            ViolationKind::NegativeCost => "negative cost",
            ViolationKind::DimensionMismatch => "dimension mismatch",
            ViolationKind::UnknownProvider => "unknown provider",
            ViolationKind::UnsatisfiableDemand => "unsatisfiable demand",
            ViolationKind::MissingCoordinates => "missing coordinates",
            ViolationKind::InvalidCoordinates => "invalid coordinates",
            ViolationKind::MissingBulkFee => "missing bulk fee",
            ViolationKind::LevelDependence => "execution cost varies with level",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    fn push(&mut self, kind: ViolationKind, detail: impl Into<String>) {
        self.violations.push(Violation { kind, detail: detail.into() });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for v in &self.violations {
            writeln!(f, "{}: {}", v.kind.label(), v.detail)?;
        }
        Ok(())
    }
}

/// Checks every structural invariant and reports all violations found.
pub fn validate_instance(instance: &MarketInstance) -> ValidationReport {
    let mut report = ValidationReport::default();
    let num_dcs = instance.data_centers.len();

    let check_unique = |what: &str, ids: Vec<&str>, report: &mut ValidationReport| {
        let mut seen = HashSet::new();
        for id in ids {
            if !seen.insert(id) {
                report.push(ViolationKind::DuplicateId, format!("{what} {id}"));
            }
        }
    };
    check_unique("provider", instance.providers.iter().map(|p| p.id.as_str()).collect(), &mut report);
    check_unique("data center", instance.data_centers.iter().map(|d| d.id.as_str()).collect(), &mut report);
    check_unique("client", instance.clients.iter().map(|c| c.id.as_str()).collect(), &mut report);

    for p in &instance.providers {
        if p.levels.is_empty() {
            report.push(ViolationKind::EmptyLevels, p.id.clone());
        }
        for (l, lvl) in p.levels.iter().enumerate() {
            if lvl.index != l + 1 {
                report.push(
                    ViolationKind::DimensionMismatch,
                    format!("provider {} level at position {} has index {}", p.id, l + 1, lvl.index),
                );
            }
            if !lvl.quality.is_positive() {
                report.push(ViolationKind::NonPositiveQuality, format!("provider {} level {}", p.id, l + 1));
            }
            if lvl.per_query_fee.is_negative() || lvl.bulk_fee.as_ref().is_some_and(|f| f.is_negative()) {
                report.push(ViolationKind::NegativeCost, format!("provider {} level {} fee", p.id, l + 1));
            }
            if instance.contracting == Contracting::Bulk && lvl.bulk_fee.is_none() {
                report.push(ViolationKind::MissingBulkFee, format!("provider {} level {}", p.id, l + 1));
            }
        }
        for w in p.levels.windows(2) {
            if w[1].quality <= w[0].quality {
                report.push(
                    ViolationKind::NonMonotoneQuality,
                    format!("provider {} levels {} and {}", p.id, w[0].index, w[1].index),
                );
            }
            if w[1].per_query_fee <= w[0].per_query_fee {
                report.push(
                    ViolationKind::NonMonotoneFees,
                    format!("provider {} levels {} and {}", p.id, w[0].index, w[1].index),
                );
            }
        }
        if p.oper_cost.len() != num_dcs || p.oper_cost.iter().any(|row| row.len() != p.levels.len()) {
            report.push(
                ViolationKind::DimensionMismatch,
                format!("provider {} operation cost must be {} x {}", p.id, num_dcs, p.levels.len()),
            );
        }
        if p.oper_cost.iter().flatten().any(|v| v.is_negative()) {
            report.push(ViolationKind::NegativeCost, format!("provider {} operation cost", p.id));
        }
    }

    for c in &instance.clients {
        for (pid, required) in &c.demands {
            match instance.provider_index(pid) {
                None => report.push(ViolationKind::UnknownProvider, format!("client {} demands {}", c.id, pid)),
                Some(p) => {
                    if instance.providers[p].min_level_for(required).is_none() {
                        report.push(
                            ViolationKind::UnsatisfiableDemand,
                            format!(
                                "client {} requires quality {} from {}",
                                c.id,
                                rational::format_decimal(required),
                                pid
                            ),
                        );
                    }
                }
            }
        }
        if let Some(loc) = c.location {
            if !loc.is_valid() {
                report.push(ViolationKind::InvalidCoordinates, format!("client {}", c.id));
            }
        }
    }
    for d in &instance.data_centers {
        if let Some(loc) = d.location {
            if !loc.is_valid() {
                report.push(ViolationKind::InvalidCoordinates, format!("data center {}", d.id));
            }
        }
    }

    match &instance.exec_cost {
        ExecCostModel::Explicit { alpha, level_independent } => {
            if alpha.len() != instance.providers.len() {
                report.push(
                    ViolationKind::DimensionMismatch,
                    format!("execution cost covers {} providers, expected {}", alpha.len(), instance.providers.len()),
                );
            }
            for (p, per_dc) in alpha.iter().enumerate().take(instance.providers.len()) {
                let prov = &instance.providers[p];
                let dims_ok = per_dc.len() == num_dcs
                    && per_dc.iter().all(|per_client| {
                        per_client.len() == instance.clients.len()
                            && per_client.iter().all(|lv| lv.len() == prov.levels.len())
                    });
                if !dims_ok {
                    report.push(
                        ViolationKind::DimensionMismatch,
                        format!(
                            "execution cost for provider {} must be {} x {} x {}",
                            prov.id,
                            num_dcs,
                            instance.clients.len(),
                            prov.levels.len()
                        ),
                    );
                    continue;
                }
                if per_dc.iter().flatten().flatten().any(|v| v.is_negative()) {
                    report.push(ViolationKind::NegativeCost, format!("execution cost for provider {}", prov.id));
                }
                if *level_independent && per_dc.iter().flatten().any(|lv| lv.iter().any(|v| v != &lv[0])) {
                    report.push(ViolationKind::LevelDependence, format!("provider {}", prov.id));
                }
            }
        }
        ExecCostModel::Distance { rate } => {
            if rate.is_negative() {
                report.push(ViolationKind::NegativeCost, "distance rate");
            }
            for d in &instance.data_centers {
                if d.location.is_none() {
                    report.push(ViolationKind::MissingCoordinates, format!("data center {}", d.id));
                }
            }
            for c in &instance.clients {
                if c.location.is_none() {
                    report.push(ViolationKind::MissingCoordinates, format!("client {}", c.id));
                }
            }
        }
    }
    report
}

pub fn ensure_valid(instance: &MarketInstance) -> Result<()> {
    let report = validate_instance(instance);
    if report.is_ok() {
        Ok(())
    } else {
        Err(Error::InvalidInstance(report))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Purchase {
    pub provider: usize,
    pub level: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Placement {
    pub provider: usize,
    pub data_center: usize,
    pub level: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    pub client: usize,
    pub provider: usize,
    pub data_center: usize,
    pub level: usize,
}

/// Purchase (z), placement (y) and assignment (x) decisions. Each set holds
/// the entries equal to one.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Plan {
    pub purchases: BTreeSet<Purchase>,
    pub placements: BTreeSet<Placement>,
    pub assignments: BTreeSet<Assignment>,
}

impl Plan {
    /// (client, provider) -> (data center, level), derived from the assignments.
    pub fn served_levels(&self) -> BTreeMap<(usize, usize), (usize, usize)> {
        let mut out = BTreeMap::new();
        for a in &self.assignments {
            out.entry((a.client, a.provider)).or_insert((a.data_center, a.level));
        }
        out
    }

    pub fn extend(&mut self, other: Plan) {
        self.purchases.extend(other.purchases);
        self.placements.extend(other.placements);
        self.assignments.extend(other.assignments);
    }

    pub fn is_empty(&self) -> bool {
        self.purchases.is_empty() && self.placements.is_empty() && self.assignments.is_empty()
    }

    /// Adds purchases for every placed level.
    pub fn purchase_placed_levels(&mut self) {
        let extra: Vec<Purchase> =
            self.placements.iter().map(|y| Purchase { provider: y.provider, level: y.level }).collect();
        self.purchases.extend(extra);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostBreakdown {
    #[serde(with = "rational::decimal_string")]
    pub oper: Rational,
    #[serde(with = "rational::decimal_string")]
    pub exec: Rational,
    #[serde(with = "rational::decimal_string")]
    pub purch: Rational,
    #[serde(with = "rational::decimal_string")]
    pub total: Rational,
}

impl CostBreakdown {
    pub fn new(oper: Rational, exec: Rational, purch: Rational) -> Self {
        let total = &oper + &exec + &purch;
        Self { oper, exec, purch, total }
    }

    pub fn zero() -> Self {
        Self::new(Rational::zero(), Rational::zero(), Rational::zero())
    }

    /// OperCost + ExecCost, the bandwidth part of the bill.
    pub fn bandwidth(&self) -> Rational {
        &self.oper + &self.exec
    }
}

impl std::ops::Add for CostBreakdown {
    type Output = CostBreakdown;
    fn add(self, rhs: CostBreakdown) -> CostBreakdown {
        CostBreakdown::new(self.oper + rhs.oper, self.exec + rhs.exec, self.purch + rhs.purch)
    }
}

/// Returns the first violated plan constraint, if any.
pub fn check_plan(instance: &MarketInstance, plan: &Plan) -> std::result::Result<(), String> {
    let num_p = instance.providers.len();
    let num_d = instance.data_centers.len();
    let num_c = instance.clients.len();
    let level_ok = |p: usize, l: usize| p < num_p && l < instance.providers[p].levels.len();

    for z in &plan.purchases {
        if !level_ok(z.provider, z.level) {
            return Err(format!("purchase of unknown level {:?}", z));
        }
    }
    for y in &plan.placements {
        if !level_ok(y.provider, y.level) || y.data_center >= num_d {
            return Err(format!("placement out of range {:?}", y));
        }
        let z = Purchase { provider: y.provider, level: y.level };
        if !plan.purchases.contains(&z) {
            return Err(format!(
                "level {} of provider {} placed at data center {} but not purchased",
                y.level + 1,
                instance.providers[y.provider].id,
                instance.data_centers[y.data_center].id
            ));
        }
    }
    let mut served: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for x in &plan.assignments {
        if !level_ok(x.provider, x.level) || x.data_center >= num_d || x.client >= num_c {
            return Err(format!("assignment out of range {:?}", x));
        }
        let y = Placement { provider: x.provider, data_center: x.data_center, level: x.level };
        if !plan.placements.contains(&y) {
            return Err(format!(
                "client {} served level {} of provider {} from data center {} where it is not placed",
                instance.clients[x.client].id,
                x.level + 1,
                instance.providers[x.provider].id,
                instance.data_centers[x.data_center].id
            ));
        }
        let client = &instance.clients[x.client];
        let provider = &instance.providers[x.provider];
        let Some(required) = client.demands.get(&provider.id) else {
            return Err(format!("client {} served provider {} it did not request", client.id, provider.id));
        };
        if &provider.levels[x.level].quality < required {
            return Err(format!(
                "client {} served level {} of provider {} below its quality floor",
                client.id,
                x.level + 1,
                provider.id
            ));
        }
        *served.entry((x.client, x.provider)).or_default() += 1;
    }
    for (c, client) in instance.clients.iter().enumerate() {
        for pid in client.demands.keys() {
            let Some(p) = instance.provider_index(pid) else {
                return Err(format!("client {} demands unknown provider {}", client.id, pid));
            };
            match served.get(&(c, p)).copied().unwrap_or(0) {
                1 => {}
                0 => return Err(format!("client {} not served by provider {}", client.id, pid)),
                n => return Err(format!("client {} served {} times by provider {}", client.id, n, pid)),
            }
        }
    }
    Ok(())
}

/// Exact OperCost, ExecCost and PurchCost of a feasible plan.
pub fn evaluate_cost(instance: &MarketInstance, plan: &Plan) -> Result<CostBreakdown> {
    check_plan(instance, plan).map_err(Error::InfeasiblePlan)?;
    let mut oper = Rational::zero();
    for y in &plan.placements {
        oper += &instance.providers[y.provider].oper_cost[y.data_center][y.level];
    }
    let mut exec = Rational::zero();
    let mut purch = Rational::zero();
    for x in &plan.assignments {
        exec += instance.exec_cost(x.provider, x.data_center, x.client, x.level)?;
        if instance.contracting == Contracting::PerQuery {
            purch += &instance.providers[x.provider].levels[x.level].per_query_fee;
        }
    }
    if instance.contracting == Contracting::Bulk {
        for z in &plan.purchases {
            let lvl = &instance.providers[z.provider].levels[z.level];
            let fee = lvl
                .bulk_fee
                .as_ref()
                .ok_or_else(|| Error::MissingBulkFees(instance.providers[z.provider].id.clone()))?;
            purch += fee;
        }
    }
    Ok(CostBreakdown::new(oper, exec, purch))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubClient {
    /// Index into the instance's client list.
    pub client: usize,
    /// 0-based smallest level meeting the client's quality floor.
    pub min_level: usize,
    /// `exec[d][l]` = alpha_{d,c}(l).
    pub exec: Vec<Vec<Rational>>,
}

/// The decoupled problem of one provider.
#[derive(Debug, Clone, PartialEq)]
pub struct ProviderSubproblem {
    pub provider: usize,
    pub provider_id: String,
    pub levels: Vec<QualityLevel>,
    /// `oper_cost[d][l]`.
    pub oper_cost: Vec<Vec<Rational>>,
    pub clients: Vec<SubClient>,
    pub exec_level_independent: bool,
    pub contracting: Contracting,
}

impl ProviderSubproblem {
    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn num_data_centers(&self) -> usize {
        self.oper_cost.len()
    }

    pub fn fee(&self, l: usize) -> &Rational {
        &self.levels[l].per_query_fee
    }

    pub fn bulk_fee(&self, l: usize) -> Option<&Rational> {
        self.levels[l].bulk_fee.as_ref()
    }

    pub fn oper_level_independent(&self) -> bool {
        self.oper_cost.iter().all(|row| row.iter().all(|v| v == &row[0]))
    }

    pub fn exec_values_level_independent(&self) -> bool {
        self.clients.iter().all(|c| c.exec.iter().all(|row| row.iter().all(|v| v == &row[0])))
    }

    /// Number of (d, l) facilities, the exponent of exhaustive enumeration.
    pub fn num_facilities(&self) -> usize {
        self.num_data_centers() * self.num_levels()
    }
}

/// One subproblem per provider, in provider order.
pub fn split_by_provider(instance: &MarketInstance) -> Result<Vec<ProviderSubproblem>> {
    let mut out = Vec::with_capacity(instance.providers.len());
    for (p, provider) in instance.providers.iter().enumerate() {
        let mut clients = Vec::new();
        for (c, client) in instance.clients.iter().enumerate() {
            let Some(required) = client.demands.get(&provider.id) else {
                continue;
            };
            let min_level = provider.min_level_for(required).ok_or_else(|| Error::UnsatisfiableDemand {
                client: client.id.clone(),
                provider: provider.id.clone(),
            })?;
            let mut exec = Vec::with_capacity(instance.data_centers.len());
            for d in 0..instance.data_centers.len() {
                match &instance.exec_cost {
                    ExecCostModel::Distance { .. } => {
                        let v = instance.exec_cost(p, d, c, 0)?;
                        exec.push(vec![v; provider.levels.len()]);
                    }
                    ExecCostModel::Explicit { .. } => {
                        let row = (0..provider.levels.len())
                            .map(|l| instance.exec_cost(p, d, c, l))
                            .collect::<Result<Vec<_>>>()?;
                        exec.push(row);
                    }
                }
            }
            clients.push(SubClient { client: c, min_level, exec });
        }
        out.push(ProviderSubproblem {
            provider: p,
            provider_id: provider.id.clone(),
            levels: provider.levels.clone(),
            oper_cost: provider.oper_cost.clone(),
            clients,
            exec_level_independent: instance.exec_level_independent(),
            contracting: instance.contracting,
        });
    }
    Ok(out)
}

/// Builders for small hand-made instances.
pub mod build {
    use super::*;

    pub fn levels(qualities: &[Rational], fees: &[Rational], bulk: Option<&[Rational]>) -> Vec<QualityLevel> {
        qualities
            .iter()
            .zip(fees)
            .enumerate()
            .map(|(l, (q, f))| QualityLevel {
                index: l + 1,
                quality: q.clone(),
                per_query_fee: f.clone(),
                bulk_fee: bulk.map(|b| b[l].clone()),
            })
            .collect()
    }

    pub fn data_centers(n: usize) -> Vec<DataCenter> {
        (0..n).map(|d| DataCenter { id: format!("dc{}", d + 1), location: None }).collect()
    }

    pub fn client(id: impl Into<String>, demands: &[(&str, Rational)]) -> Client {
        Client {
            id: id.into(),
            demands: demands.iter().map(|(p, w)| (p.to_string(), w.clone())).collect(),
            location: None,
        }
    }
}
