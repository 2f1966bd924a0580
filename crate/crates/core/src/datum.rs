//! The two-step heuristic for a geo-distributed data cloud.
//!
//! Step 1 decides purchasing as if the cloud were one data center whose
//! operation cost for level `l` is a transformed cost `beta*(l)`, using the
//! exact single data center solver. Step 2 fixes those purchases and, level
//! by level, places each purchased level on the replica subset minimizing
//! operation cost plus the execution cost of the clients it serves.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::model::{
    self, evaluate_cost, Assignment, Contracting, CostBreakdown, MarketInstance, Placement, Plan, ProviderSubproblem,
    Purchase,
};
use crate::rational::{self, Rational};
use crate::single_dc::{self, CategoryProfile};

pub const DEFAULT_MAX_REPLICAS: usize = 2;
pub const DEFAULT_CATALOG_CEILING: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct DatumConfig {
    pub max_replicas: usize,
    pub mu1: Rational,
    pub mu2: f64,
    pub catalog_ceiling: usize,
}

impl Default for DatumConfig {
    fn default() -> Self {
        Self {
            max_replicas: DEFAULT_MAX_REPLICAS,
            mu1: Rational::zero(),
            mu2: 0.0,
            catalog_ceiling: DEFAULT_CATALOG_CEILING,
        }
    }
}

/// Replica subsets with aggregate costs, ordered by size then
/// lexicographically; that order is also the argmin tie-break.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetCatalog {
    pub subsets: Vec<Vec<usize>>,
    /// `beta[v][l]` = sum of member operation costs.
    pub beta: Vec<Vec<Rational>>,
    /// `alpha[v][k][l]` = cheapest member execution cost for subproblem client `k`.
    pub alpha: Vec<Vec<Vec<Rational>>>,
    /// `serving[v][k][l]`: member data center achieving `alpha[v][k][l]`.
    pub serving: Vec<Vec<Vec<usize>>>,
}

impl SubsetCatalog {
    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    pub fn index_of(&self, subset: &[usize]) -> Option<usize> {
        self.subsets.iter().position(|s| s == subset)
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// All k-combinations of `0..n` in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k == 0 || k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

pub fn build_subset_catalog(sub: &ProviderSubproblem, max_replicas: usize) -> Result<SubsetCatalog> {
    build_subset_catalog_with_ceiling(sub, max_replicas, DEFAULT_CATALOG_CEILING)
}

pub fn build_subset_catalog_with_ceiling(
    sub: &ProviderSubproblem,
    max_replicas: usize,
    ceiling: usize,
) -> Result<SubsetCatalog> {
    let num_dcs = sub.num_data_centers();
    if max_replicas == 0 || max_replicas > num_dcs {
        return Err(Error::InvalidParams(format!("max_replicas must be between 1 and {num_dcs}, got {max_replicas}")));
    }
    let count: u128 = (1..=max_replicas as u128).map(|k| binomial(num_dcs as u128, k)).sum();
    if count > ceiling as u128 {
        return Err(Error::CatalogTooLarge { count, ceiling });
    }
    let num_levels = sub.num_levels();
    let subsets: Vec<Vec<usize>> = (1..=max_replicas).flat_map(|k| combinations(num_dcs, k)).collect();
    let mut beta = Vec::with_capacity(subsets.len());
    let mut alpha = Vec::with_capacity(subsets.len());
    let mut serving = Vec::with_capacity(subsets.len());
    for v in &subsets {
        beta.push((0..num_levels).map(|l| rational::sum(v.iter().map(|&d| &sub.oper_cost[d][l]))).collect::<Vec<_>>());
        let mut a_v = Vec::with_capacity(sub.clients.len());
        let mut s_v = Vec::with_capacity(sub.clients.len());
        for c in &sub.clients {
            let mut a_c = Vec::with_capacity(num_levels);
            let mut s_c = Vec::with_capacity(num_levels);
            for l in 0..num_levels {
                let mut best = v[0];
                for &d in &v[1..] {
                    if c.exec[d][l] < c.exec[best][l] {
                        best = d;
                    }
                }
                a_c.push(c.exec[best][l].clone());
                s_c.push(best);
            }
            a_v.push(a_c);
            s_v.push(s_c);
        }
        alpha.push(a_v);
        serving.push(s_v);
    }
    Ok(SubsetCatalog { subsets, beta, alpha, serving })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformedCosts {
    pub beta_star: Vec<Rational>,
    pub mu1: Rational,
    pub mu2: f64,
}

/// `beta*(l) = min_v { beta_v(l) + mu1 * sum_{l' <= l} sum_{c: w_c = l'} alpha_{v,c}(l') e^{-mu2 (l - l')} }`.
/// The exponential weight is quantized to micro-units; with `mu1 = 0` no
/// floating point is involved.
pub fn transformed_costs(
    catalog: &SubsetCatalog,
    sub: &ProviderSubproblem,
    mu1: &Rational,
    mu2: f64,
) -> TransformedCosts {
    let num_levels = sub.num_levels();
    let mut beta_star = Vec::with_capacity(num_levels);
    for l in 0..num_levels {
        let mut best: Option<Rational> = None;
        for v in 0..catalog.len() {
            let mut value = catalog.beta[v][l].clone();
            if !mu1.is_zero() {
                let mut weighted = Rational::zero();
                for (k, c) in sub.clients.iter().enumerate() {
                    if c.min_level > l {
                        continue;
                    }
                    let decay = rational::from_f64((-mu2 * (l - c.min_level) as f64).exp());
                    weighted += &catalog.alpha[v][k][c.min_level] * decay;
                }
                value += mu1 * weighted;
            }
            if best.as_ref().is_none_or(|b| &value < b) {
                best = Some(value);
            }
        }
        beta_star.push(best.unwrap_or_else(Rational::zero));
    }
    TransformedCosts { beta_star, mu1: mu1.clone(), mu2 }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOneResult {
    /// Y(l).
    pub purchased: Vec<bool>,
    /// Level delivered to each subproblem client (X_c(l) = 1 for exactly this l).
    pub client_level: Vec<usize>,
    /// sum beta*(l) Y(l) + sum f(l) X_c(l).
    pub objective: Rational,
}

impl StepOneResult {
    /// C(l): subproblem client indices served level `l`.
    pub fn level_groups(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.purchased.len()];
        for (k, &l) in self.client_level.iter().enumerate() {
            groups[l].push(k);
        }
        groups
    }
}

fn profile_of(sub: &ProviderSubproblem) -> CategoryProfile {
    let mut counts = vec![0u64; sub.num_levels()];
    for c in &sub.clients {
        counts[c.min_level] += 1;
    }
    CategoryProfile { counts }
}

/// Purchasing as a single data center with operation costs `beta*`.
/// Execution costs play no part here, so they may depend on the level.
pub fn datum_step1(sub: &ProviderSubproblem, tc: &TransformedCosts) -> Result<StepOneResult> {
    let profile = profile_of(sub);
    let fees: Vec<Rational> = (0..sub.num_levels()).map(|l| sub.fee(l).clone()).collect();
    let plan = single_dc::solve_profile(&tc.beta_star, &fees, &profile)?;
    let client_level = sub.clients.iter().map(|c| plan.category_choice[&c.min_level]).collect();
    Ok(StepOneResult { purchased: plan.open_levels, client_level, objective: plan.objective })
}

/// Placement for one provider: at most one subset per level.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPlan {
    pub provider: usize,
    /// `placement[l]` = catalog index of the subset holding level `l`.
    pub placement: Vec<Option<usize>>,
    pub client_level: Vec<usize>,
}

impl JointPlan {
    pub fn lower(&self, sub: &ProviderSubproblem, catalog: &SubsetCatalog) -> Plan {
        let p = self.provider;
        let mut plan = Plan::default();
        for (l, v) in self.placement.iter().enumerate() {
            let Some(v) = *v else { continue };
            plan.purchases.insert(Purchase { provider: p, level: l });
            for &d in &catalog.subsets[v] {
                plan.placements.insert(Placement { provider: p, data_center: d, level: l });
            }
        }
        for (k, c) in sub.clients.iter().enumerate() {
            let l = self.client_level[k];
            let v = self.placement[l].expect("served level is placed");
            plan.assignments.insert(Assignment {
                client: c.client,
                provider: p,
                data_center: catalog.serving[v][k][l],
                level: l,
            });
        }
        plan
    }
}

/// Score of placing level `l` on subset `v` for the clients in `group`.
pub fn placement_score(catalog: &SubsetCatalog, v: usize, l: usize, group: &[usize]) -> Rational {
    let mut s = catalog.beta[v][l].clone();
    for &k in group {
        s += &catalog.alpha[v][k][l];
    }
    s
}

pub fn datum_step2(sub: &ProviderSubproblem, catalog: &SubsetCatalog, s1: &StepOneResult) -> JointPlan {
    let groups = s1.level_groups();
    let mut placement = vec![None; sub.num_levels()];
    for (l, slot) in placement.iter_mut().enumerate() {
        if !s1.purchased[l] {
            continue;
        }
        let mut best: Option<(usize, Rational)> = None;
        for v in 0..catalog.len() {
            let score = placement_score(catalog, v, l, &groups[l]);
            if best.as_ref().is_none_or(|(_, b)| &score < b) {
                best = Some((v, score));
            }
        }
        *slot = best.map(|(v, _)| v);
    }
    JointPlan { provider: sub.provider, placement, client_level: s1.client_level.clone() }
}

/// Everything Datum computes for one provider.
#[derive(Debug, Clone)]
pub struct ProviderRun {
    pub catalog: SubsetCatalog,
    pub transformed: TransformedCosts,
    pub step_one: StepOneResult,
    pub joint: JointPlan,
    pub plan: Plan,
}

fn effective_replicas(sub: &ProviderSubproblem, config: &DatumConfig) -> usize {
    config.max_replicas.min(sub.num_data_centers())
}

pub fn datum_provider(sub: &ProviderSubproblem, config: &DatumConfig) -> Result<ProviderRun> {
    let catalog = build_subset_catalog_with_ceiling(sub, effective_replicas(sub, config), config.catalog_ceiling)?;
    let transformed = transformed_costs(&catalog, sub, &config.mu1, config.mu2);
    let step_one = datum_step1(sub, &transformed)?;
    let joint = datum_step2(sub, &catalog, &step_one);
    let plan = joint.lower(sub, &catalog);
    Ok(ProviderRun { catalog, transformed, step_one, joint, plan })
}

pub fn datum_solve(instance: &MarketInstance, config: &DatumConfig) -> Result<(Plan, CostBreakdown)> {
    model::ensure_valid(instance)?;
    if instance.contracting != Contracting::PerQuery {
        return Err(Error::InvalidParams("datum_solve expects per-query contracting; use datum_solve_bulk".into()));
    }
    if config.max_replicas == 0 {
        return Err(Error::InvalidParams("max_replicas must be positive".into()));
    }
    let mut plan = Plan::default();
    for sub in model::split_by_provider(instance)? {
        if sub.clients.is_empty() {
            continue;
        }
        plan.extend(datum_provider(&sub, config)?.plan);
    }
    let cost = evaluate_cost(instance, &plan)?;
    Ok((plan, cost))
}

/// Level every client accepts with the cheapest bulk fee; the top level
/// whenever some client requires it.
fn bulk_level(sub: &ProviderSubproblem) -> Result<Option<usize>> {
    let Some(highest) = sub.clients.iter().map(|c| c.min_level).max() else {
        return Ok(None);
    };
    let fees = (0..sub.num_levels())
        .map(|l| sub.bulk_fee(l).cloned())
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::MissingBulkFees(sub.provider_id.clone()))?;
    let mut best = sub.num_levels() - 1;
    for l in (highest..sub.num_levels()).rev() {
        if fees[l] < fees[best] {
            best = l;
        }
    }
    Ok(Some(best))
}

/// Bulk contracting with level-independent operation and execution costs:
/// buy one level for everyone, then place it with the Step 2 closed form.
pub fn datum_solve_bulk(instance: &MarketInstance, config: &DatumConfig) -> Result<(Plan, CostBreakdown)> {
    model::ensure_valid(instance)?;
    if instance.contracting != Contracting::Bulk {
        return Err(Error::InvalidParams("datum_solve_bulk expects bulk contracting".into()));
    }
    let mut plan = Plan::default();
    for sub in model::split_by_provider(instance)? {
        if !sub.oper_level_independent() || !sub.exec_values_level_independent() {
            return Err(Error::LevelDependentCosts);
        }
        let Some(level) = bulk_level(&sub)? else {
            continue;
        };
        let catalog =
            build_subset_catalog_with_ceiling(&sub, effective_replicas(&sub, config), config.catalog_ceiling)?;
        let mut purchased = vec![false; sub.num_levels()];
        purchased[level] = true;
        let s1 = StepOneResult {
            purchased,
            client_level: vec![level; sub.clients.len()],
            objective: sub.bulk_fee(level).cloned().unwrap_or_default(),
        };
        let joint = datum_step2(&sub, &catalog, &s1);
        plan.extend(joint.lower(&sub, &catalog));
    }
    let cost = evaluate_cost(instance, &plan)?;
    Ok((plan, cost))
}
