//! Exact purchasing for a data cloud with one data center.
//!
//! With level-independent execution costs the execution bill is a constant,
//! so the problem only chooses which levels to buy (`y`) and which open level
//! each client category is served (`chi`). Clients sharing a minimum level
//! form one category with multiplicity `S_i`.
//!
//! The solver runs the category LP relaxation first. If its extreme point is
//! fractional, it fixes the breakpoints `m_i` of that point, rewrites `chi`
//! as an affine function of `y`, and solves the reduced LP in `y` alone. The
//! reduced constraint matrix has the consecutive-ones property, so every
//! extreme point is 0/1 and maps back to an optimal binary plan.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::lp::{lp_solve, LinearProgram, LpStatus, Relation};
use crate::model::{
    evaluate_cost, Assignment, Contracting, CostBreakdown, MarketInstance, Placement, Plan, ProviderSubproblem,
    Purchase,
};
use crate::rational::{self, Rational};

/// `counts[i]` = number of clients whose minimum level index is `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryProfile {
    pub counts: Vec<u64>,
}

impl CategoryProfile {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn num_levels(&self) -> usize {
        self.counts.len()
    }

    /// Category indices with at least one client.
    pub fn nonempty(&self) -> Vec<usize> {
        (0..self.counts.len()).filter(|&i| self.counts[i] > 0).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingleDcPlan {
    pub open_levels: Vec<bool>,
    /// nonempty category -> level serving it.
    pub category_choice: BTreeMap<usize, usize>,
    /// Operation plus purchasing cost; the execution constant is excluded.
    pub objective: Rational,
    /// Whether the fractional branch (breakpoints and reduced LP) was used.
    pub used_reduction: bool,
}

impl SingleDcPlan {
    pub fn open_set(&self) -> Vec<usize> {
        (0..self.open_levels.len()).filter(|&l| self.open_levels[l]).collect()
    }
}

/// `m[i]` for every category, 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Breakpoints {
    pub m: Vec<usize>,
}

pub fn categorize(sub: &ProviderSubproblem) -> Result<CategoryProfile> {
    if !sub.exec_level_independent {
        return Err(Error::LevelDependentExecCost);
    }
    let mut counts = vec![0u64; sub.num_levels()];
    for c in &sub.clients {
        counts[c.min_level] += 1;
    }
    Ok(CategoryProfile { counts })
}

/// First `m >= i` where the running sum of `y` from `i` reaches one.
pub fn breakpoint_from(y: &[Rational], i: usize) -> Option<usize> {
    let one = Rational::one();
    let mut acc = Rational::zero();
    for (l, v) in y.iter().enumerate().skip(i) {
        acc += v;
        if acc >= one {
            return Some(l);
        }
    }
    None
}

pub fn breakpoints(y: &[Rational]) -> Result<Breakpoints> {
    match y.last() {
        Some(last) if last.is_one() => {}
        _ => return Err(Error::NoBreakpoint),
    }
    let m = (0..y.len()).map(|i| breakpoint_from(y, i).ok_or(Error::NoBreakpoint)).collect::<Result<Vec<_>>>()?;
    Ok(Breakpoints { m })
}

/// `chi_i` as an affine function of `y` given the breakpoint `m_i`:
/// follow `y` on `[i, m_i)`, put the remainder at `m_i`, zero after.
pub fn chi_from_breakpoint(y: &[Rational], i: usize, m: usize) -> Vec<Rational> {
    let mut chi = vec![Rational::zero(); y.len()];
    let mut used = Rational::zero();
    for l in i..m {
        chi[l] = y[l].clone();
        used += &y[l];
    }
    chi[m] = Rational::one() - used;
    chi
}

fn check_fees(fees: &[Rational]) -> Result<()> {
    if fees.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParams("per-query fees must strictly increase".into()));
    }
    Ok(())
}

/// Variable layout of the category LP: `y` first, then `chi_i(l)` for each
/// nonempty category `i` and `l >= i`.
pub struct CategoryLp {
    pub lp: LinearProgram,
    pub categories: Vec<usize>,
    /// `chi_index[k][l - categories[k]]` is the column of `chi_{categories[k]}(l)`.
    pub chi_index: Vec<Vec<usize>>,
}

pub fn category_lp(beta: &[Rational], fees: &[Rational], profile: &CategoryProfile) -> CategoryLp {
    let num_levels = beta.len();
    let categories = profile.nonempty();
    let mut objective: Vec<Rational> = beta.to_vec();
    let mut chi_index = Vec::with_capacity(categories.len());
    for &i in &categories {
        let count = rational::int(profile.counts[i] as i64);
        let mut cols = Vec::new();
        for fee in fees.iter().take(num_levels).skip(i) {
            cols.push(objective.len());
            objective.push(&count * fee);
        }
        chi_index.push(cols);
    }
    let mut lp = LinearProgram::new(objective);
    let n = lp.num_vars();
    for (k, &i) in categories.iter().enumerate() {
        for (off, &col) in chi_index[k].iter().enumerate() {
            let mut row = vec![Rational::zero(); n];
            row[col] = Rational::one();
            row[i + off] = -Rational::one();
            lp.add(row, Relation::Le, Rational::zero());
        }
        lp.add_sum(chi_index[k].iter().copied(), Relation::Eq, Rational::one());
    }
    CategoryLp { lp, categories, chi_index }
}

/// The LP in `y` obtained by substituting the breakpoint form of `chi`.
/// `m[i]` must be set for every nonempty category. The returned constant is
/// the part of the objective that does not multiply any `y`.
pub fn reduced_lp(
    beta: &[Rational],
    fees: &[Rational],
    profile: &CategoryProfile,
    m: &[Option<usize>],
) -> Result<(LinearProgram, Rational)> {
    let num_levels = beta.len();
    let mut objective: Vec<Rational> = beta.to_vec();
    let mut constant = Rational::zero();
    let mut rows: Vec<(usize, usize, Relation)> = Vec::new();
    for i in profile.nonempty() {
        let mi = m[i].ok_or(Error::NoBreakpoint)?;
        if mi < i || mi >= num_levels {
            return Err(Error::InvalidParams(format!("breakpoint {mi} out of range for category {i}")));
        }
        let count = rational::int(profile.counts[i] as i64);
        // S_i [ sum_{l in [i, m_i)} f(l) y(l) + f(m_i) (1 - sum_{l in [i, m_i)} y(l)) ]
        constant += &count * &fees[mi];
        for l in i..mi {
            objective[l] += &count * (&fees[l] - &fees[mi]);
        }
        if mi > i {
            rows.push((i, mi - 1, Relation::Le));
        }
        rows.push((i, mi, Relation::Ge));
    }
    let mut lp = LinearProgram::new(objective);
    for (lo, hi, rel) in rows {
        lp.add_sum(lo..=hi, rel, Rational::one());
    }
    for l in 0..num_levels {
        lp.set_upper(l, Rational::one());
    }
    Ok((lp, constant))
}

fn plan_from_binary_y(
    beta: &[Rational],
    fees: &[Rational],
    profile: &CategoryProfile,
    y: &[Rational],
    m: &[Option<usize>],
    used_reduction: bool,
) -> Result<SingleDcPlan> {
    let open_levels: Vec<bool> = y.iter().map(|v| v.is_one()).collect();
    let mut category_choice = BTreeMap::new();
    let mut objective = Rational::zero();
    for (l, open) in open_levels.iter().enumerate() {
        if *open {
            objective += &beta[l];
        }
    }
    for i in profile.nonempty() {
        let mi = m[i].ok_or(Error::NoBreakpoint)?;
        let chi = chi_from_breakpoint(y, i, mi);
        let chosen: Vec<usize> = (0..chi.len()).filter(|&l| !chi[l].is_zero()).collect();
        if chosen.len() != 1 || !chi[chosen[0]].is_one() || !open_levels[chosen[0]] {
            return Err(Error::InternalNonBinary);
        }
        category_choice.insert(i, chosen[0]);
        objective += rational::int(profile.counts[i] as i64) * &fees[chosen[0]];
    }
    Ok(SingleDcPlan { open_levels, category_choice, objective, used_reduction })
}

/// Exact optimum for operation costs `beta`, fees and a category profile.
pub fn solve_profile(beta: &[Rational], fees: &[Rational], profile: &CategoryProfile) -> Result<SingleDcPlan> {
    let num_levels = beta.len();
    if fees.len() != num_levels || profile.num_levels() != num_levels {
        return Err(Error::DimensionMismatch(format!(
            "{} operation costs, {} fees, {} categories",
            num_levels,
            fees.len(),
            profile.num_levels()
        )));
    }
    check_fees(fees)?;
    if profile.total() == 0 {
        return Ok(SingleDcPlan {
            open_levels: vec![false; num_levels],
            category_choice: BTreeMap::new(),
            objective: Rational::zero(),
            used_reduction: false,
        });
    }

    // Relaxation of the category formulation.
    let relaxed = category_lp(beta, fees, profile);
    let sol = lp_solve(&relaxed.lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Lp(format!("category relaxation is {:?}", sol.status)));
    }
    let y_frac = &sol.values[..num_levels];
    let m: Vec<Option<usize>> = (0..num_levels).map(|i| breakpoint_from(y_frac, i)).collect();
    if sol.is_binary() {
        let mut open = y_frac.to_vec();
        // Close zero-cost levels that no category uses.
        let mut used = vec![false; num_levels];
        for (k, cols) in relaxed.chi_index.iter().enumerate() {
            for (off, &col) in cols.iter().enumerate() {
                if sol.values[col].is_one() {
                    used[relaxed.categories[k] + off] = true;
                }
            }
        }
        for l in 0..num_levels {
            if !used[l] && beta[l].is_zero() {
                open[l] = Rational::zero();
            }
        }
        let m_open: Vec<Option<usize>> = (0..num_levels).map(|i| breakpoint_from(&open, i)).collect();
        let plan = plan_from_binary_y(beta, fees, profile, &open, &m_open, false)?;
        debug_assert_eq!(plan.objective, sol.objective_value);
        return Ok(plan);
    }

    let (reduced, constant) = reduced_lp(beta, fees, profile, &m)?;
    let red = lp_solve(&reduced)?;
    if red.status != LpStatus::Optimal {
        return Err(Error::Lp(format!("reduced LP is {:?}", red.status)));
    }
    if !red.is_binary() {
        return Err(Error::InternalNonBinary);
    }
    let plan = plan_from_binary_y(beta, fees, profile, &red.values, &m, true)?;
    debug_assert_eq!(plan.objective, &red.objective_value + &constant);
    debug_assert_eq!(plan.objective, sol.objective_value);
    Ok(plan)
}

fn single_dc_beta(sub: &ProviderSubproblem) -> Result<&[Rational]> {
    if sub.num_data_centers() != 1 {
        return Err(Error::NotSingleDataCenter(sub.num_data_centers()));
    }
    Ok(&sub.oper_cost[0])
}

pub fn solve_single_dc(sub: &ProviderSubproblem) -> Result<SingleDcPlan> {
    let profile = categorize(sub)?;
    let beta = single_dc_beta(sub)?;
    let fees: Vec<Rational> = (0..sub.num_levels()).map(|l| sub.fee(l).clone()).collect();
    solve_profile(beta, &fees, &profile)
}

/// Bulk contracting buys a single level: the one with the cheapest
/// `beta + bulk fee` among levels every client accepts. When some client
/// needs the top level this is the top level.
pub fn solve_bulk_profile(beta: &[Rational], bulk_fees: &[Rational], profile: &CategoryProfile) -> SingleDcPlan {
    let num_levels = beta.len();
    let nonempty = profile.nonempty();
    let Some(&highest) = nonempty.last() else {
        return SingleDcPlan {
            open_levels: vec![false; num_levels],
            category_choice: BTreeMap::new(),
            objective: Rational::zero(),
            used_reduction: false,
        };
    };
    let mut best = num_levels - 1;
    let mut best_cost = &beta[best] + &bulk_fees[best];
    for l in (highest..num_levels).rev() {
        let cost = &beta[l] + &bulk_fees[l];
        if cost < best_cost {
            best = l;
            best_cost = cost;
        }
    }
    let mut open_levels = vec![false; num_levels];
    open_levels[best] = true;
    SingleDcPlan {
        open_levels,
        category_choice: nonempty.into_iter().map(|i| (i, best)).collect(),
        objective: best_cost,
        used_reduction: false,
    }
}

pub fn solve_single_dc_bulk(sub: &ProviderSubproblem) -> Result<SingleDcPlan> {
    let profile = categorize(sub)?;
    let beta = single_dc_beta(sub)?;
    let bulk = (0..sub.num_levels())
        .map(|l| sub.bulk_fee(l).cloned())
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::MissingBulkFees(sub.provider_id.clone()))?;
    Ok(solve_bulk_profile(beta, &bulk, &profile))
}

/// Expands a single data center plan for one provider into model decisions.
pub fn lower_plan(sub: &ProviderSubproblem, plan: &SingleDcPlan) -> Plan {
    let p = sub.provider;
    let mut out = Plan::default();
    for (l, open) in plan.open_levels.iter().enumerate() {
        if *open {
            out.purchases.insert(Purchase { provider: p, level: l });
            out.placements.insert(Placement { provider: p, data_center: 0, level: l });
        }
    }
    for c in &sub.clients {
        let level = plan.category_choice[&c.min_level];
        out.assignments.insert(Assignment { client: c.client, provider: p, data_center: 0, level });
    }
    out
}

/// Solves every provider of a one-data-center instance exactly.
pub fn single_dc_solve(instance: &MarketInstance) -> Result<(Plan, CostBreakdown)> {
    crate::model::ensure_valid(instance)?;
    let mut plan = Plan::default();
    for sub in crate::model::split_by_provider(instance)? {
        let sp = match instance.contracting {
            Contracting::PerQuery => solve_single_dc(&sub)?,
            Contracting::Bulk => solve_single_dc_bulk(&sub)?,
        };
        plan.extend(lower_plan(&sub, &sp));
    }
    let cost = evaluate_cost(instance, &plan)?;
    Ok((plan, cost))
}
