//! Random instance builders and brute-force oracles shared by the
//! integration and acceptance tests. The oracles only read raw instance
//! data; none of them calls a solver from the library.

#![allow(dead_code)]

use std::collections::BTreeMap;

use datum_core::baselines::UflpInstance;
use datum_core::model::{build, Client, Contracting, ExecCostModel, MarketInstance, Plan, Provider};
use datum_core::rational::{int, ratio, Rational};
use num_traits::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Nonnegative rational with a small denominator dividing 10^6, so
/// instances survive the six-place decimal file format unchanged.
pub fn money(rng: &mut ChaCha8Rng, max: i64) -> Rational {
    let den = [1, 2, 4, 5, 8, 25][rng.gen_range(0..6)];
    ratio(rng.gen_range(0..=max * den), den)
}

/// Strictly increasing positive fees.
pub fn increasing_fees(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rational> {
    let mut acc = Rational::zero();
    (0..n)
        .map(|_| {
            acc += money(rng, 6) + ratio(1, 4);
            acc.clone()
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub max_providers: usize,
    pub max_dcs: usize,
    pub max_levels: usize,
    pub max_clients: usize,
    /// Upper bound on data centers times levels.
    pub max_facilities: usize,
    pub contracting: Contracting,
    /// Execution costs identical across levels.
    pub exec_level_independent: bool,
    /// Operation costs identical across levels.
    pub oper_level_independent: bool,
}

impl Default for Shape {
    fn default() -> Self {
        Self {
            max_providers: 2,
            max_dcs: 3,
            max_levels: 3,
            max_clients: 5,
            max_facilities: 8,
            contracting: Contracting::PerQuery,
            exec_level_independent: false,
            oper_level_independent: false,
        }
    }
}

pub fn random_instance(rng: &mut ChaCha8Rng, shape: Shape) -> MarketInstance {
    let num_p = rng.gen_range(1..=shape.max_providers);
    let (num_d, num_c) = loop {
        let d = rng.gen_range(1..=shape.max_dcs);
        if (1..=shape.max_levels).any(|l| d * l <= shape.max_facilities) {
            break (d, rng.gen_range(0..=shape.max_clients));
        }
    };
    let mut providers = Vec::new();
    for p in 0..num_p {
        let num_l = loop {
            let l = rng.gen_range(1..=shape.max_levels);
            if num_d * l <= shape.max_facilities {
                break l;
            }
        };
        let qualities: Vec<Rational> = (1..=num_l as i64).map(int).collect();
        let fees = increasing_fees(rng, num_l);
        let bulk: Vec<Rational> = (0..num_l).map(|_| money(rng, 10)).collect();
        let oper_cost = (0..num_d)
            .map(|_| {
                if shape.oper_level_independent {
                    vec![money(rng, 12); num_l]
                } else {
                    (0..num_l).map(|_| money(rng, 12)).collect()
                }
            })
            .collect();
        providers.push(Provider {
            id: format!("p{}", p + 1),
            levels: build::levels(&qualities, &fees, Some(&bulk)),
            oper_cost,
        });
    }
    let clients: Vec<Client> = (0..num_c)
        .map(|c| {
            let mut demands = BTreeMap::new();
            while demands.is_empty() {
                for p in &providers {
                    if rng.gen_bool(0.7) {
                        // quality floors between levels exercise the resolution
                        let l = rng.gen_range(1..=p.levels.len() as i64);
                        let w = if rng.gen_bool(0.3) { int(l) - ratio(1, 2) } else { int(l) };
                        demands.insert(p.id.clone(), w);
                    }
                }
            }
            Client { id: format!("c{}", c + 1), demands, location: None }
        })
        .collect();
    let alpha = providers
        .iter()
        .map(|p| {
            (0..num_d)
                .map(|_| {
                    (0..num_c)
                        .map(|_| {
                            if shape.exec_level_independent {
                                vec![money(rng, 8); p.levels.len()]
                            } else {
                                (0..p.levels.len()).map(|_| money(rng, 8)).collect()
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    MarketInstance {
        providers,
        data_centers: build::data_centers(num_d),
        clients,
        exec_cost: ExecCostModel::Explicit { alpha, level_independent: shape.exec_level_independent },
        contracting: shape.contracting,
    }
}

fn alpha(inst: &MarketInstance, p: usize, d: usize, c: usize, l: usize) -> Rational {
    match &inst.exec_cost {
        ExecCostModel::Explicit { alpha, .. } => alpha[p][d][c][l].clone(),
        ExecCostModel::Distance { .. } => panic!("oracles take explicit execution costs"),
    }
}

/// 0-based floor level of `c` for provider `p`, if it demands `p`.
fn floor_level(inst: &MarketInstance, p: usize, c: usize) -> Option<usize> {
    let w = inst.clients[c].demands.get(&inst.providers[p].id)?;
    Some(inst.providers[p].levels.iter().position(|lvl| &lvl.quality >= w).expect("satisfiable demand"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleObjective {
    Total,
    /// Operation plus execution cost only.
    Bandwidth,
}

/// Minimum over every placement support of every provider, by plain enumeration.
pub fn exhaustive_optimum(inst: &MarketInstance, objective: OracleObjective) -> Rational {
    let mut total = Rational::zero();
    for p in 0..inst.providers.len() {
        let prov = &inst.providers[p];
        let num_l = prov.levels.len();
        let facilities: Vec<(usize, usize)> =
            (0..inst.data_centers.len()).flat_map(|d| (0..num_l).map(move |l| (d, l))).collect();
        let clients: Vec<(usize, usize)> =
            (0..inst.clients.len()).filter_map(|c| floor_level(inst, p, c).map(|m| (c, m))).collect();
        if clients.is_empty() {
            continue;
        }
        let mut best: Option<Rational> = None;
        for mask in 1u64..(1 << facilities.len()) {
            let open: Vec<(usize, usize)> =
                facilities.iter().enumerate().filter(|(j, _)| mask >> j & 1 == 1).map(|(_, f)| *f).collect();
            let mut cost: Rational = open.iter().map(|&(d, l)| prov.oper_cost[d][l].clone()).sum();
            if objective == OracleObjective::Total && inst.contracting == Contracting::Bulk {
                let mut levels: Vec<usize> = open.iter().map(|f| f.1).collect();
                levels.sort_unstable();
                levels.dedup();
                for l in levels {
                    cost += prov.levels[l].bulk_fee.clone().unwrap();
                }
            }
            let mut feasible = true;
            for &(c, m) in &clients {
                let serve = open
                    .iter()
                    .filter(|&&(_, l)| l >= m)
                    .map(|&(d, l)| {
                        let fee = match (objective, inst.contracting) {
                            (OracleObjective::Total, Contracting::PerQuery) => prov.levels[l].per_query_fee.clone(),
                            _ => Rational::zero(),
                        };
                        alpha(inst, p, d, c, l) + fee
                    })
                    .min();
                match serve {
                    Some(v) => cost += v,
                    None => {
                        feasible = false;
                        break;
                    }
                }
            }
            if feasible && best.as_ref().is_none_or(|b| &cost < b) {
                best = Some(cost);
            }
        }
        total += best.expect("opening everything is feasible");
    }
    total
}

/// (oper, exec, purch) of a plan, summed term by term from raw data.
pub fn direct_cost(inst: &MarketInstance, plan: &Plan) -> (Rational, Rational, Rational) {
    let oper =
        plan.placements.iter().map(|y| inst.providers[y.provider].oper_cost[y.data_center][y.level].clone()).sum();
    let exec = plan.assignments.iter().map(|x| alpha(inst, x.provider, x.data_center, x.client, x.level)).sum();
    let purch = match inst.contracting {
        Contracting::PerQuery => {
            plan.assignments.iter().map(|x| inst.providers[x.provider].levels[x.level].per_query_fee.clone()).sum()
        }
        Contracting::Bulk => {
            plan.purchases.iter().map(|z| inst.providers[z.provider].levels[z.level].bulk_fee.clone().unwrap()).sum()
        }
    };
    (oper, exec, purch)
}

/// True when no client could be served more cheaply by another placed
/// facility of the same provider at or above its floor.
pub fn assignments_are_locally_optimal(inst: &MarketInstance, plan: &Plan) -> bool {
    let per_client = |p: usize, c: usize, d: usize, l: usize| {
        let fee = match inst.contracting {
            Contracting::PerQuery => inst.providers[p].levels[l].per_query_fee.clone(),
            Contracting::Bulk => Rational::zero(),
        };
        alpha(inst, p, d, c, l) + fee
    };
    plan.assignments.iter().all(|x| {
        let m = floor_level(inst, x.provider, x.client).unwrap();
        let current = per_client(x.provider, x.client, x.data_center, x.level);
        plan.placements
            .iter()
            .filter(|y| y.provider == x.provider && y.level >= m)
            .all(|y| per_client(x.provider, x.client, y.data_center, y.level) >= current)
    })
}

/// Single data center optimum over all 2^L openings: each nonempty
/// category pays the cheapest fee among open levels at or above it.
pub fn single_dc_brute(beta: &[Rational], fees: &[Rational], counts: &[u64]) -> Rational {
    let n = beta.len();
    let mut best: Option<Rational> = None;
    for mask in 1u32..(1 << n) {
        let open = |l: usize| mask >> l & 1 == 1;
        let mut cost: Rational = (0..n).filter(|&l| open(l)).map(|l| beta[l].clone()).sum();
        let mut ok = true;
        for (i, &s) in counts.iter().enumerate() {
            if s == 0 {
                continue;
            }
            match (i..n).filter(|&l| open(l)).map(|l| fees[l].clone()).min() {
                Some(f) => cost += int(s as i64) * f,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok && best.as_ref().is_none_or(|b| &cost < b) {
            best = Some(cost);
        }
    }
    best.unwrap_or_default()
}

pub fn random_uflp(rng: &mut ChaCha8Rng, max_facilities: usize, max_clients: usize) -> UflpInstance {
    let n = rng.gen_range(1..=max_facilities);
    let m = rng.gen_range(1..=max_clients);
    let facility_costs = (0..n).map(|_| money(rng, 15)).collect();
    let connection_costs = (0..m)
        .map(|_| {
            let keep = rng.gen_range(0..n);
            (0..n).map(|j| (j == keep || rng.gen_bool(0.7)).then(|| money(rng, 10))).collect()
        })
        .collect();
    UflpInstance { facility_costs, connection_costs }
}

/// UFLP optimum over all nonempty facility sets.
pub fn uflp_optimum(u: &UflpInstance) -> Rational {
    let n = u.facility_costs.len();
    let mut best: Option<Rational> = None;
    'mask: for mask in 1u64..(1 << n) {
        let open = |j: usize| mask >> j & 1 == 1;
        let mut cost: Rational = (0..n).filter(|&j| open(j)).map(|j| u.facility_costs[j].clone()).sum();
        for row in &u.connection_costs {
            match (0..n).filter(|&j| open(j)).filter_map(|j| row[j].clone()).min() {
                Some(v) => cost += v,
                None => continue 'mask,
            }
        }
        if best.as_ref().is_none_or(|b| &cost < b) {
            best = Some(cost);
        }
    }
    best.expect("every client has an allowed facility")
}
