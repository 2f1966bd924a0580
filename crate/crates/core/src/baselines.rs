//! Reference algorithms: the exact optima OptCost and OptBand, the
//! NearestDC greedy, and conversions to and from uncapacitated facility
//! location (UFLP).
//!
//! OptCost and OptBand search the binary placement supports over the
//! `(d, l)` facilities of each provider with branch and bound. Costs are
//! scaled to a common denominator so the search compares integers.

use std::ops::Add;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    self, build, evaluate_cost, Assignment, Contracting, CostBreakdown, ExecCostModel, MarketInstance, Placement, Plan,
    Provider, ProviderSubproblem, Purchase,
};
use crate::rational::{self, Rational};

pub const DEFAULT_BUDGET: u64 = 1 << 20;
pub const BUDGET_ENV: &str = "DATUM_BUDGET";

/// Largest number of placement supports enumerated per provider.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExhaustiveBudget(u64);

impl ExhaustiveBudget {
    pub fn new(max_supports: u64) -> Result<Self> {
        if max_supports == 0 {
            return Err(Error::InvalidParams("exhaustive budget must be positive".into()));
        }
        Ok(Self(max_supports))
    }

    pub fn get(self) -> u64 {
        self.0
    }

    /// The default, overridden by `DATUM_BUDGET` when set.
    pub fn from_env() -> Result<Self> {
        match std::env::var(BUDGET_ENV) {
            Ok(v) => {
                let n: u64 = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidParams(format!("{BUDGET_ENV} must be a positive integer, got {v:?}")))?;
                Self::new(n)
            }
            Err(_) => Ok(Self::default()),
        }
    }
}

impl Default for ExhaustiveBudget {
    fn default() -> Self {
        Self(DEFAULT_BUDGET)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Objective {
    Total,
    Bandwidth,
}

trait Cost: Clone + Ord + Zero + for<'a> Add<&'a Self, Output = Self> {}
impl Cost for i128 {}
impl Cost for BigInt {}

/// One provider's search data, with facility `j = d * L + l`.
struct Search<T> {
    open_cost: Vec<T>,
    level_of: Vec<usize>,
    /// Fee charged once when a level first gets a facility (bulk, total objective).
    level_fee: Option<Vec<T>>,
    /// `conn[c][j]`, `None` when the level is below the client's floor.
    conn: Vec<Vec<Option<T>>>,
    /// `suffix_min[c][j]` = cheapest allowed connection among facilities `j..`.
    suffix_min: Vec<Vec<Option<T>>>,
    best: Option<(T, Vec<bool>)>,
}

fn min_opt<T: Cost>(a: &Option<T>, b: &Option<T>) -> Option<T> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if y < x { y.clone() } else { x.clone() }),
        (Some(x), None) | (None, Some(x)) => Some(x.clone()),
        (None, None) => None,
    }
}

impl<T: Cost> Search<T> {
    fn new(open_cost: Vec<T>, level_of: Vec<usize>, level_fee: Option<Vec<T>>, conn: Vec<Vec<Option<T>>>) -> Self {
        let n = open_cost.len();
        let suffix_min = conn
            .iter()
            .map(|row| {
                let mut s = vec![None; n + 1];
                for j in (0..n).rev() {
                    s[j] = min_opt(&row[j], &s[j + 1]);
                }
                s
            })
            .collect();
        Self { open_cost, level_of, level_fee, conn, suffix_min, best: None }
    }

    fn run(&mut self) {
        let n = self.open_cost.len();
        let num_levels = self.level_of.iter().max().map_or(0, |m| m + 1);
        let mut open = vec![false; n];
        let open_min = vec![None; self.conn.len()];
        let mut level_count = vec![0usize; num_levels];
        self.dfs(0, T::zero(), &mut open, open_min, &mut level_count);
    }

    fn dfs(
        &mut self,
        j: usize,
        fixed: T,
        open: &mut Vec<bool>,
        open_min: Vec<Option<T>>,
        level_count: &mut Vec<usize>,
    ) {
        let mut bound = fixed.clone();
        for (c, m) in open_min.iter().enumerate() {
            match min_opt(m, &self.suffix_min[c][j]) {
                Some(v) => bound = bound + &v,
                None => return,
            }
        }
        if let Some((b, _)) = &self.best {
            if &bound >= b {
                return;
            }
        }
        if j == open.len() {
            self.best = Some((bound, open.clone()));
            return;
        }

        // open facility j
        let l = self.level_of[j];
        let mut with = fixed.clone() + &self.open_cost[j];
        if level_count[l] == 0 {
            if let Some(fees) = &self.level_fee {
                with = with + &fees[l];
            }
        }
        let next_min: Vec<Option<T>> = open_min.iter().zip(&self.conn).map(|(m, row)| min_opt(m, &row[j])).collect();
        open[j] = true;
        level_count[l] += 1;
        self.dfs(j + 1, with, open, next_min, level_count);
        open[j] = false;
        level_count[l] -= 1;

        self.dfs(j + 1, fixed, open, open_min, level_count);
    }
}

/// Integer images of a set of rationals over their common denominator.
fn common_scale(values: &[&Rational]) -> BigInt {
    values.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

fn scaled(v: &Rational, scale: &BigInt) -> BigInt {
    v.numer() * (scale / v.denom())
}

struct Scaled {
    open_cost: Vec<BigInt>,
    level_of: Vec<usize>,
    level_fee: Option<Vec<BigInt>>,
    conn: Vec<Vec<Option<BigInt>>>,
}

fn scaled_problem(sub: &ProviderSubproblem, objective: Objective) -> Scaled {
    let num_levels = sub.num_levels();
    let bulk = sub.contracting == Contracting::Bulk;
    let zero = Rational::zero();
    let fee_of = |l: usize| -> &Rational {
        match (objective, bulk) {
            (Objective::Total, false) => sub.fee(l),
            _ => &zero,
        }
    };
    let level_fees: Option<Vec<Rational>> = match (objective, bulk) {
        (Objective::Total, true) => {
            Some((0..num_levels).map(|l| sub.bulk_fee(l).cloned().unwrap_or_default()).collect())
        }
        _ => None,
    };

    let mut open_cost = Vec::new();
    let mut level_of = Vec::new();
    for row in &sub.oper_cost {
        for (l, b) in row.iter().enumerate() {
            open_cost.push(b.clone());
            level_of.push(l);
        }
    }
    let conn: Vec<Vec<Option<Rational>>> = sub
        .clients
        .iter()
        .map(|c| {
            (0..open_cost.len())
                .map(|j| {
                    let (d, l) = (j / num_levels, j % num_levels);
                    (l >= c.min_level).then(|| fee_of(l) + &c.exec[d][l])
                })
                .collect()
        })
        .collect();

    let mut all: Vec<&Rational> = open_cost.iter().collect();
    if let Some(f) = &level_fees {
        all.extend(f.iter());
    }
    all.extend(conn.iter().flatten().flatten());
    let scale = common_scale(&all);
    Scaled {
        open_cost: open_cost.iter().map(|v| scaled(v, &scale)).collect(),
        level_of,
        level_fee: level_fees.map(|f| f.iter().map(|v| scaled(v, &scale)).collect()),
        conn: conn.iter().map(|row| row.iter().map(|v| v.as_ref().map(|v| scaled(v, &scale))).collect()).collect(),
    }
}

/// Optimal open facilities and, per client, the facility serving it.
fn search(sub: &ProviderSubproblem, objective: Objective) -> (Vec<bool>, Vec<usize>) {
    let s = scaled_problem(sub, objective);
    let terms = s.open_cost.len() + s.conn.len() + s.level_fee.as_ref().map_or(0, Vec::len) + 1;
    let limit = BigInt::from(i128::MAX / 4) / BigInt::from(terms);
    let fits = s
        .open_cost
        .iter()
        .chain(s.level_fee.iter().flatten())
        .chain(s.conn.iter().flatten().flatten())
        .all(|v| v.abs() <= limit);
    let open = if fits {
        let to = |v: &BigInt| v.to_i128().expect("bounded above");
        let mut search = Search::new(
            s.open_cost.iter().map(to).collect(),
            s.level_of.clone(),
            s.level_fee.as_ref().map(|f| f.iter().map(to).collect()),
            s.conn.iter().map(|r| r.iter().map(|v| v.as_ref().map(to)).collect()).collect(),
        );
        search.run();
        search.best.map(|(_, o)| o)
    } else {
        let mut search = Search::new(s.open_cost.clone(), s.level_of.clone(), s.level_fee.clone(), s.conn.clone());
        search.run();
        search.best.map(|(_, o)| o)
    };
    let open = open.expect("opening every facility is feasible");
    let num_levels = sub.num_levels();
    let num_dcs = sub.num_data_centers();
    // cheapest open facility, ties to the lowest level then lowest data center
    let serving = s
        .conn
        .iter()
        .map(|row| {
            let mut best: Option<usize> = None;
            for l in 0..num_levels {
                for d in 0..num_dcs {
                    let j = d * num_levels + l;
                    let (true, Some(v)) = (open[j], &row[j]) else { continue };
                    if best.is_none_or(|b| v < row[b].as_ref().expect("allowed")) {
                        best = Some(j);
                    }
                }
            }
            best.expect("every client has an open allowed facility")
        })
        .collect();
    (open, serving)
}

fn check_budget(sub: &ProviderSubproblem, budget: ExhaustiveBudget) -> Result<()> {
    let n = sub.num_facilities();
    let required: u128 = if n >= 128 { u128::MAX } else { 1u128 << n };
    if required > budget.get() as u128 {
        return Err(Error::OversizeInstance { provider: sub.provider_id.clone(), required, budget: budget.get() });
    }
    Ok(())
}

fn exhaustive(
    instance: &MarketInstance,
    budget: ExhaustiveBudget,
    objective: Objective,
) -> Result<(Plan, CostBreakdown)> {
    model::ensure_valid(instance)?;
    let subs = model::split_by_provider(instance)?;
    for sub in subs.iter().filter(|s| !s.clients.is_empty()) {
        check_budget(sub, budget)?;
    }
    let mut plan = Plan::default();
    for sub in subs.iter().filter(|s| !s.clients.is_empty()) {
        let (_, serving) = search(sub, objective);
        let num_levels = sub.num_levels();
        for (k, &j) in serving.iter().enumerate() {
            let (d, l) = (j / num_levels, j % num_levels);
            plan.assignments.insert(Assignment {
                client: sub.clients[k].client,
                provider: sub.provider,
                data_center: d,
                level: l,
            });
            plan.placements.insert(Placement { provider: sub.provider, data_center: d, level: l });
        }
    }
    plan.purchase_placed_levels();
    let cost = evaluate_cost(instance, &plan)?;
    Ok((plan, cost))
}

/// Exact minimum of operation + execution + purchasing cost.
pub fn opt_cost(instance: &MarketInstance, budget: ExhaustiveBudget) -> Result<(Plan, CostBreakdown)> {
    exhaustive(instance, budget, Objective::Total)
}

/// Exact minimum of operation + execution cost; the reported breakdown
/// still includes what the chosen plan pays in fees.
pub fn opt_band(instance: &MarketInstance, budget: ExhaustiveBudget) -> Result<(Plan, CostBreakdown)> {
    exhaustive(instance, budget, Objective::Bandwidth)
}

/// Serve every client exactly its floor level from the data center with
/// the cheapest operation cost for that level.
pub fn nearest_dc(instance: &MarketInstance) -> Result<(Plan, CostBreakdown)> {
    model::ensure_valid(instance)?;
    let mut plan = Plan::default();
    for sub in model::split_by_provider(instance)? {
        for c in &sub.clients {
            let l = c.min_level;
            let mut d_star = 0;
            for d in 1..sub.num_data_centers() {
                if sub.oper_cost[d][l] < sub.oper_cost[d_star][l] {
                    d_star = d;
                }
            }
            plan.purchases.insert(Purchase { provider: sub.provider, level: l });
            plan.placements.insert(Placement { provider: sub.provider, data_center: d_star, level: l });
            plan.assignments.insert(Assignment {
                client: c.client,
                provider: sub.provider,
                data_center: d_star,
                level: l,
            });
        }
    }
    let cost = evaluate_cost(instance, &plan)?;
    Ok((plan, cost))
}

/// Uncapacitated facility location with explicitly forbidden edges.
#[derive(Debug, Clone, PartialEq)]
pub struct UflpInstance {
    pub facility_costs: Vec<Rational>,
    /// `connection_costs[i][j]`, `None` when client `i` may not use facility `j`.
    pub connection_costs: Vec<Vec<Option<Rational>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UflpFormat {
    Dense,
    Sparse,
}

impl UflpInstance {
    pub fn num_facilities(&self) -> usize {
        self.facility_costs.len()
    }

    pub fn num_clients(&self) -> usize {
        self.connection_costs.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.facility_costs.is_empty() {
            return Err(Error::InvalidParams("UFLP instance has no facilities".into()));
        }
        if self.facility_costs.iter().any(|v| v.is_negative()) {
            return Err(Error::InvalidParams("negative facility cost".into()));
        }
        for (i, row) in self.connection_costs.iter().enumerate() {
            if row.len() != self.num_facilities() {
                return Err(Error::DimensionMismatch(format!(
                    "client {i} has {} connection costs for {} facilities",
                    row.len(),
                    self.num_facilities()
                )));
            }
            if row.iter().flatten().any(|v| v.is_negative()) {
                return Err(Error::InvalidParams(format!("negative connection cost for client {i}")));
            }
            if row.iter().all(Option::is_none) {
                return Err(Error::InvalidParams(format!("client {i} has no allowed facility")));
            }
        }
        Ok(())
    }

    /// Cost of opening `open`, or `None` if some client cannot connect.
    pub fn objective(&self, open: &[bool]) -> Option<Rational> {
        let mut total = rational::sum(self.facility_costs.iter().zip(open).filter(|(_, o)| **o).map(|(c, _)| c));
        for row in &self.connection_costs {
            total += row.iter().zip(open).filter_map(|(c, o)| if *o { c.as_ref() } else { None }).min()?;
        }
        Some(total)
    }

    /// Stand-in cost for forbidden edges in dense exports; larger than
    /// any plan that avoids them.
    pub fn big_m(&self) -> Rational {
        let mut m = Rational::one() + rational::sum(&self.facility_costs);
        for row in &self.connection_costs {
            m += row.iter().flatten().max().cloned().unwrap_or_default();
        }
        m
    }

    pub fn dense_costs(&self) -> Vec<Vec<Rational>> {
        let m = self.big_m();
        self.connection_costs
            .iter()
            .map(|row| row.iter().map(|v| v.clone().unwrap_or_else(|| m.clone())).collect())
            .collect()
    }

    pub fn to_json(&self, format: UflpFormat) -> serde_json::Value {
        let connection_costs = match format {
            UflpFormat::Dense => ConnectionFile::Dense {
                costs: self.dense_costs().iter().map(|r| r.iter().map(rational::format_decimal).collect()).collect(),
            },
            UflpFormat::Sparse => ConnectionFile::Sparse {
                num_clients: self.num_clients(),
                edges: self
                    .connection_costs
                    .iter()
                    .enumerate()
                    .flat_map(|(i, row)| {
                        row.iter().enumerate().filter_map(move |(j, v)| {
                            v.as_ref().map(|v| EdgeFile { client: i, facility: j, cost: rational::format_decimal(v) })
                        })
                    })
                    .collect(),
            },
        };
        let file = UflpFile {
            facility_costs: self.facility_costs.iter().map(rational::format_decimal).collect(),
            connection_costs,
        };
        serde_json::to_value(file).expect("plain data serializes")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let file: UflpFile = serde_json::from_value(value.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        let parse = |s: &str| rational::parse_decimal(s).map_err(|e| Error::Parse(e.to_string()));
        let facility_costs = file.facility_costs.iter().map(|s| parse(s)).collect::<Result<Vec<_>>>()?;
        let n = facility_costs.len();
        let connection_costs = match file.connection_costs {
            ConnectionFile::Dense { costs } => costs
                .iter()
                .map(|row| row.iter().map(|s| parse(s).map(Some)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?,
            ConnectionFile::Sparse { num_clients, edges } => {
                let mut rows = vec![vec![None; n]; num_clients];
                for e in edges {
                    if e.client >= num_clients || e.facility >= n {
                        return Err(Error::Parse(format!("edge ({}, {}) out of range", e.client, e.facility)));
                    }
                    rows[e.client][e.facility] = Some(parse(&e.cost)?);
                }
                rows
            }
        };
        let out = Self { facility_costs, connection_costs };
        out.validate()?;
        Ok(out)
    }
}

#[derive(Serialize, Deserialize)]
struct UflpFile {
    facility_costs: Vec<String>,
    connection_costs: ConnectionFile,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "format", rename_all = "snake_case")]
enum ConnectionFile {
    Dense { costs: Vec<Vec<String>> },
    Sparse { num_clients: usize, edges: Vec<EdgeFile> },
}

#[derive(Serialize, Deserialize)]
struct EdgeFile {
    client: usize,
    facility: usize,
    cost: String,
}

/// Facilities are `(d, l)` pairs, index `d * L + l`; connecting a client
/// costs the fee plus execution cost, and levels below its floor are forbidden.
pub fn to_uflp(sub: &ProviderSubproblem) -> Result<UflpInstance> {
    if sub.contracting != Contracting::PerQuery {
        return Err(Error::InvalidParams("UFLP conversion needs per-query contracting".into()));
    }
    let num_levels = sub.num_levels();
    let facility_costs: Vec<Rational> = sub.oper_cost.iter().flatten().cloned().collect();
    let connection_costs = sub
        .clients
        .iter()
        .map(|c| {
            (0..facility_costs.len())
                .map(|j| {
                    let (d, l) = (j / num_levels, j % num_levels);
                    (l >= c.min_level).then(|| sub.fee(l) + &c.exec[d][l])
                })
                .collect()
        })
        .collect();
    Ok(UflpInstance { facility_costs, connection_costs })
}

/// One provider with a single free level, one data center per facility and
/// one client per UFLP client. Forbidden edges cost `big_m()`.
pub fn from_uflp(uflp: &UflpInstance) -> Result<MarketInstance> {
    uflp.validate()?;
    let dense = uflp.dense_costs();
    let provider = Provider {
        id: "p1".into(),
        levels: build::levels(&[Rational::one()], &[Rational::zero()], Some(&[Rational::zero()])),
        oper_cost: uflp.facility_costs.iter().map(|b| vec![b.clone()]).collect(),
    };
    let clients =
        (0..uflp.num_clients()).map(|i| build::client(format!("c{}", i + 1), &[("p1", Rational::zero())])).collect();
    let alpha =
        vec![(0..uflp.num_facilities()).map(|j| dense.iter().map(|row| vec![row[j].clone()]).collect()).collect()];
    Ok(MarketInstance {
        providers: vec![provider],
        data_centers: build::data_centers(uflp.num_facilities()),
        clients,
        exec_cost: ExecCostModel::Explicit { alpha, level_independent: true },
        contracting: Contracting::PerQuery,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{instance_a, instance_b, instance_g};
    use crate::model::split_by_provider;
    use crate::rational::{int, ratio};

    fn budget() -> ExhaustiveBudget {
        ExhaustiveBudget::default()
    }

    #[test]
    fn opt_cost_examples() {
        let (plan, cost) = opt_cost(&instance_g(), budget()).unwrap();
        assert_eq!(cost.total, int(10));
        assert_eq!(plan.placements.iter().map(|y| y.data_center).collect::<Vec<_>>(), vec![1]);
        assert_eq!(opt_cost(&instance_b(), budget()).unwrap().1.total, int(19));
        assert_eq!(opt_cost(&instance_a(), budget()).unwrap().1.total, int(24));
    }

    #[test]
    fn empty_client_set() {
        let mut inst = instance_g();
        inst.clients.clear();
        if let ExecCostModel::Explicit { alpha, .. } = &mut inst.exec_cost {
            alpha[0].iter_mut().for_each(|r| r.clear());
        }
        let (plan, cost) = opt_cost(&inst, budget()).unwrap();
        assert!(plan.is_empty());
        assert_eq!(cost, CostBreakdown::zero());
        assert!(nearest_dc(&inst).unwrap().0.is_empty());
    }

    #[test]
    fn opt_band_examples() {
        let (plan, cost) = opt_band(&instance_b(), budget()).unwrap();
        assert_eq!(plan.purchases.iter().map(|z| z.level).collect::<Vec<_>>(), vec![1]);
        assert_eq!(cost.total, int(24));
        assert_eq!(opt_band(&instance_g(), budget()).unwrap().1.total, int(10));
    }

    #[test]
    fn one_level_one_dc_band_equals_cost() {
        let mut inst = instance_g();
        inst.providers[0].oper_cost.truncate(1);
        inst.data_centers.truncate(1);
        if let ExecCostModel::Explicit { alpha, .. } = &mut inst.exec_cost {
            alpha[0].truncate(1);
        }
        assert_eq!(opt_band(&inst, budget()).unwrap(), opt_cost(&inst, budget()).unwrap());
    }

    #[test]
    fn bulk_fees_charged_per_level() {
        let mut inst = instance_a();
        inst.contracting = Contracting::Bulk;
        // {2}: 12 + 3 = 15; {1,2}: 10 + 12 + 1 + 3 = 26
        assert_eq!(opt_cost(&inst, budget()).unwrap().1.total, int(15));
    }

    #[test]
    fn nearest_dc_examples() {
        let (plan, cost) = nearest_dc(&instance_g()).unwrap();
        assert_eq!(cost.total, int(11));
        assert_eq!(plan.placements.iter().next().unwrap().data_center, 0);
        let (plan, cost) = nearest_dc(&instance_a()).unwrap();
        assert_eq!(plan.purchases.len(), 2);
        assert_eq!(cost.total, int(28));
    }

    #[test]
    fn budget_is_enforced() {
        let err = opt_cost(&instance_a(), ExhaustiveBudget::new(3).unwrap()).unwrap_err();
        match err {
            Error::OversizeInstance { required, budget, .. } => {
                assert_eq!(required, 4);
                assert_eq!(budget, 3);
            }
            other => panic!("{other:?}"),
        }
        assert!(ExhaustiveBudget::new(0).is_err());
    }

    #[test]
    fn fractional_costs_are_exact() {
        let mut inst = instance_g();
        inst.providers[0].oper_cost = vec![vec![ratio(1, 3)], vec![ratio(1, 7)]];
        let (_, cost) = opt_cost(&inst, budget()).unwrap();
        // DC1: 1/3 + 4 + 2 ; DC2: 1/7 + 1 + 2
        assert_eq!(cost.total, ratio(1, 7) + int(3));
    }

    #[test]
    fn huge_costs_use_the_wide_path() {
        let mut inst = instance_g();
        let big = Rational::from_integer(BigInt::from(10).pow(40));
        inst.providers[0].oper_cost = vec![vec![big.clone()], vec![&big + int(1)]];
        let (_, cost) = opt_cost(&inst, budget()).unwrap();
        // DC2: big + 1 + 1 + 2 beats DC1: big + 4 + 2
        assert_eq!(cost.total, big + int(4));
    }

    #[test]
    fn to_uflp_of_instance_a() {
        let sub = &split_by_provider(&instance_a()).unwrap()[0];
        let u = to_uflp(sub).unwrap();
        assert_eq!(u.facility_costs, vec![int(10), int(12)]);
        assert_eq!(u.connection_costs[3], vec![None, Some(int(3))]);
        assert_eq!(u.connection_costs[0], vec![Some(int(1)), Some(int(3))]);
        assert_eq!(u.objective(&[false, true]), Some(int(24)));
        assert_eq!(u.objective(&[true, false]), None);
        assert_eq!(u.big_m(), int(1 + 22 + 4 * 3));
    }

    #[test]
    fn to_uflp_of_instance_g() {
        let sub = &split_by_provider(&instance_g()).unwrap()[0];
        let u = to_uflp(sub).unwrap();
        assert_eq!(u.num_facilities(), 2);
        let best = [[true, false], [false, true], [true, true]].iter().filter_map(|o| u.objective(o)).min().unwrap();
        assert_eq!(best, int(10));
    }

    #[test]
    fn from_uflp_example() {
        let u = UflpInstance {
            facility_costs: vec![int(5), int(7)],
            connection_costs: vec![vec![Some(int(4)), Some(int(1))]],
        };
        let inst = from_uflp(&u).unwrap();
        assert!(model::validate_instance(&inst).is_ok());
        assert_eq!(opt_cost(&inst, budget()).unwrap().1.total, int(8));
        let back = to_uflp(&split_by_provider(&inst).unwrap()[0]).unwrap();
        assert_eq!(back, u);
    }

    #[test]
    fn from_uflp_single_facility() {
        let u = UflpInstance {
            facility_costs: vec![int(2)],
            connection_costs: vec![vec![Some(int(1))], vec![Some(int(3))]],
        };
        assert_eq!(opt_cost(&from_uflp(&u).unwrap(), budget()).unwrap().1.total, int(6));
    }

    #[test]
    fn forbidden_edges_become_big_m() {
        let u = UflpInstance {
            facility_costs: vec![int(1), int(2)],
            connection_costs: vec![vec![None, Some(int(1))], vec![Some(int(1)), Some(int(5))]],
        };
        let inst = from_uflp(&u).unwrap();
        let (_, cost) = opt_cost(&inst, budget()).unwrap();
        let best = [[true, true], [false, true]].iter().filter_map(|o| u.objective(o)).min().unwrap();
        assert_eq!(cost.total, best);
    }

    #[test]
    fn json_round_trip() {
        let u = UflpInstance {
            facility_costs: vec![int(1), ratio(5, 2)],
            connection_costs: vec![vec![None, Some(int(1))], vec![Some(ratio(1, 4)), Some(int(5))]],
        };
        let sparse = u.to_json(UflpFormat::Sparse);
        assert_eq!(sparse["connection_costs"]["format"], "sparse");
        assert_eq!(UflpInstance::from_json(&sparse).unwrap(), u);
        let dense = u.to_json(UflpFormat::Dense);
        let back = UflpInstance::from_json(&dense).unwrap();
        assert_eq!(back.connection_costs[0][0], Some(u.big_m()));
        assert_eq!(back.facility_costs, u.facility_costs);
    }

    #[test]
    fn json_rejects_bad_input() {
        let v = serde_json::json!({"facility_costs": ["1"], "connection_costs": {"format": "sparse", "num_clients": 1, "edges": []}});
        assert!(UflpInstance::from_json(&v).is_err());
        let v = serde_json::json!({"facility_costs": ["1"], "connection_costs": {"format": "sparse", "num_clients": 1, "edges": [{"client": 0, "facility": 3, "cost": "1"}]}});
        assert!(UflpInstance::from_json(&v).is_err());
        let v = serde_json::json!({"facility_costs": ["x"], "connection_costs": {"format": "dense", "costs": [["1"]]}});
        assert!(UflpInstance::from_json(&v).is_err());
    }

    #[test]
    fn bulk_to_uflp_rejected() {
        let mut inst = instance_a();
        inst.contracting = Contracting::Bulk;
        assert!(to_uflp(&split_by_provider(&inst).unwrap()[0]).is_err());
    }
}
