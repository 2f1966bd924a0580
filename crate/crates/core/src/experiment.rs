//! Algorithm dispatch, run records and the comparison / sweep tables.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_traits::Zero;
use serde::Serialize;

use crate::baselines::{self, ExhaustiveBudget};
use crate::datum::{self, DatumConfig};
use crate::error::{Error, Result};
use crate::io;
use crate::model::{Contracting, CostBreakdown, MarketInstance, Plan};
use crate::rational::{self, Rational};
use crate::scenario::{self, Knob, ScenarioParams};
use crate::single_dc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    Datum,
    NearestDc,
    OptBand,
    OptCost,
    SingleDc,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] =
        [Algorithm::Datum, Algorithm::NearestDc, Algorithm::OptBand, Algorithm::OptCost, Algorithm::SingleDc];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Datum => "datum",
            Algorithm::NearestDc => "nearestdc",
            Algorithm::OptBand => "optband",
            Algorithm::OptCost => "optcost",
            Algorithm::SingleDc => "single-dc",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.trim().to_ascii_lowercase().chars().filter(|c| !matches!(c, '-' | '_')).collect();
        // "minband" is another name for the bandwidth-only optimum
        if key == "minband" {
            return Ok(Algorithm::OptBand);
        }
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().replace('-', "") == key)
            .ok_or_else(|| Error::UnknownAlgorithm(s.to_string()))
    }
}

/// Parses a comma separated list, keeping the first occurrence of each.
pub fn parse_algorithms(list: &str) -> Result<Vec<Algorithm>> {
    let mut out = Vec::new();
    for part in list.split(',').filter(|p| !p.trim().is_empty()) {
        let a: Algorithm = part.parse()?;
        if !out.contains(&a) {
            out.push(a);
        }
    }
    if out.is_empty() {
        return Err(Error::UnknownAlgorithm(list.to_string()));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolveConfig {
    pub datum: DatumConfig,
    pub budget: ExhaustiveBudget,
}

impl SolveConfig {
    pub fn echo(&self) -> String {
        format!(
            "max_replicas={};mu1={};mu2={};budget={}",
            self.datum.max_replicas,
            rational::format_decimal(&self.datum.mu1),
            self.datum.mu2,
            self.budget.get()
        )
    }
}

pub fn solve(instance: &MarketInstance, algorithm: Algorithm, config: &SolveConfig) -> Result<(Plan, CostBreakdown)> {
    match algorithm {
        Algorithm::Datum => match instance.contracting {
            Contracting::PerQuery => datum::datum_solve(instance, &config.datum),
            Contracting::Bulk => datum::datum_solve_bulk(instance, &config.datum),
        },
        Algorithm::NearestDc => baselines::nearest_dc(instance),
        Algorithm::OptBand => baselines::opt_band(instance, config.budget),
        Algorithm::OptCost => baselines::opt_cost(instance, config.budget),
        Algorithm::SingleDc => single_dc::single_dc_solve(instance),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub seed: Option<u64>,
    pub algorithm: String,
    pub config: String,
    pub cost: Option<CostBreakdown>,
    pub runtime_ms: Option<f64>,
    pub fingerprint: String,
    pub error: Option<String>,
}

impl RunRecord {
    pub fn total(&self) -> Option<&Rational> {
        self.cost.as_ref().map(|c| &c.total)
    }

    fn money(&self) -> [String; 4] {
        match &self.cost {
            Some(c) => [&c.oper, &c.exec, &c.purch, &c.total].map(rational::format_decimal),
            None => Default::default(),
        }
    }

    fn runtime(&self) -> String {
        self.runtime_ms.map(|ms| format!("{ms:.3}")).unwrap_or_default()
    }
}

/// Runs one algorithm, capturing its failure in the record.
pub fn run(
    instance: &MarketInstance,
    fingerprint: &str,
    seed: Option<u64>,
    algorithm: Algorithm,
    config: &SolveConfig,
    timing: bool,
) -> (RunRecord, Option<Plan>) {
    let start = Instant::now();
    let result = solve(instance, algorithm, config);
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let (cost, plan, error) = match result {
        Ok((plan, cost)) => (Some(cost), Some(plan), None),
        Err(e) => (None, None, Some(e.to_string())),
    };
    let record = RunRecord {
        seed,
        algorithm: algorithm.name().to_string(),
        config: config.echo(),
        cost,
        runtime_ms: timing.then_some(elapsed),
        fingerprint: fingerprint.to_string(),
        error,
    };
    (record, plan)
}

/// One row per (seed, algorithm), ordered by seed then algorithm name.
pub fn compare(
    base: &ScenarioParams,
    seeds: &[u64],
    algorithms: &[Algorithm],
    config: &SolveConfig,
    timing: bool,
) -> Result<Vec<RunRecord>> {
    let mut algs = algorithms.to_vec();
    algs.sort_by_key(|a| a.name());
    algs.dedup();
    let mut seeds = seeds.to_vec();
    seeds.sort_unstable();
    seeds.dedup();
    let mut out = Vec::new();
    for &seed in &seeds {
        let params = ScenarioParams { seed, ..base.clone() };
        let instance = scenario::generate(&params)?;
        let fp = io::fingerprint(&instance);
        for &a in &algs {
            out.push(run(&instance, &fp, Some(seed), a, config, timing).0);
        }
    }
    Ok(out)
}

pub const COMPARE_HEADER: [&str; 9] =
    ["seed", "algorithm", "oper", "exec", "purch", "total", "runtime_ms", "fingerprint", "error"];

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

pub fn compare_csv(records: &[RunRecord]) -> String {
    csv_text(
        &COMPARE_HEADER,
        records.iter().map(|r| {
            let [oper, exec, purch, total] = r.money();
            vec![
                r.seed.map(|s| s.to_string()).unwrap_or_default(),
                r.algorithm.clone(),
                oper,
                exec,
                purch,
                total,
                r.runtime(),
                r.fingerprint.clone(),
                r.error.clone().unwrap_or_default(),
            ]
        }),
    )
}

/// Per-algorithm means of the successful rows.
pub fn summary(records: &[RunRecord]) -> String {
    let mut by_alg: BTreeMap<&str, (Rational, usize, usize, Option<f64>)> = BTreeMap::new();
    for r in records {
        let e = by_alg.entry(&r.algorithm).or_insert((Rational::zero(), 0, 0, None));
        match r.total() {
            Some(t) => {
                e.0 += t;
                e.1 += 1;
                if let Some(ms) = r.runtime_ms {
                    e.3 = Some(e.3.unwrap_or(0.0) + ms);
                }
            }
            None => e.2 += 1,
        }
    }
    let mut s = String::from("algorithm  runs  failed  mean_total  mean_ms\n");
    for (alg, (sum, n, failed, ms)) in by_alg {
        let (mean, mean_ms) = if n > 0 {
            let mean_ms = ms.map_or("-".into(), |ms| format!("{:.3}", ms / n as f64));
            (rational::format_decimal(&(sum / Rational::from_integer(n.into()))), mean_ms)
        } else {
            ("-".into(), "-".into())
        };
        s.push_str(&format!("{alg:<10} {n:>5} {failed:>7} {mean:>11} {mean_ms:>8}\n"));
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub knob: Knob,
    pub target: f64,
    pub run: RunRecord,
}

#[allow(clippy::too_many_arguments)]
pub fn sweep(
    base: &ScenarioParams,
    knob: Knob,
    from: f64,
    to: f64,
    steps: usize,
    seeds: &[u64],
    algorithms: &[Algorithm],
    config: &SolveConfig,
    timing: bool,
) -> Result<Vec<SweepRecord>> {
    let points = scenario::sweep_params(base, knob, from, to, steps)?;
    let targets = scenario::sweep_targets(from, to, steps)?;
    let mut out = Vec::new();
    for (params, target) in points.iter().zip(targets) {
        for run in compare(params, seeds, algorithms, config, timing)? {
            out.push(SweepRecord { knob, target, run });
        }
    }
    Ok(out)
}

pub const SWEEP_HEADER: [&str; 11] =
    ["knob", "target", "seed", "algorithm", "total", "oper", "exec", "purch", "runtime_ms", "fingerprint", "error"];

pub fn sweep_csv(records: &[SweepRecord]) -> String {
    csv_text(
        &SWEEP_HEADER,
        records.iter().map(|s| {
            let r = &s.run;
            let [oper, exec, purch, total] = r.money();
            vec![
                s.knob.name().to_string(),
                format!("{:.6}", s.target),
                r.seed.map(|v| v.to_string()).unwrap_or_default(),
                r.algorithm.clone(),
                total,
                oper,
                exec,
                purch,
                r.runtime(),
                r.fingerprint.clone(),
                r.error.clone().unwrap_or_default(),
            ]
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::instance_g;

    fn tiny() -> ScenarioParams {
        ScenarioParams {
            num_data_centers: 2,
            num_providers: 3,
            num_clients: 6,
            levels_per_provider: 3,
            ..Default::default()
        }
    }

    #[test]
    fn algorithm_names() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert_eq!("MinBand".parse::<Algorithm>().unwrap(), Algorithm::OptBand);
        assert!(matches!("simplex".parse::<Algorithm>(), Err(Error::UnknownAlgorithm(_))));
        assert_eq!(parse_algorithms("optcost,datum,optcost").unwrap(), vec![Algorithm::OptCost, Algorithm::Datum]);
        assert!(parse_algorithms(",").is_err());
    }

    #[test]
    fn solve_dispatch_on_instance_g() {
        let cfg = SolveConfig::default();
        let g = instance_g();
        let totals: Vec<Rational> = [Algorithm::Datum, Algorithm::OptCost, Algorithm::OptBand, Algorithm::NearestDc]
            .iter()
            .map(|&a| solve(&g, a, &cfg).unwrap().1.total)
            .collect();
        assert_eq!(totals, [10, 10, 10, 11].map(rational::int));
        assert!(matches!(solve(&g, Algorithm::SingleDc, &cfg), Err(Error::NotSingleDataCenter(2))));
    }

    #[test]
    fn compare_rows_and_order() {
        let algs = [Algorithm::OptCost, Algorithm::Datum, Algorithm::NearestDc];
        let recs = compare(&tiny(), &[5, 2], &algs, &SolveConfig::default(), false).unwrap();
        assert_eq!(recs.len(), 6);
        let keys: Vec<(u64, &str)> = recs.iter().map(|r| (r.seed.unwrap(), r.algorithm.as_str())).collect();
        assert_eq!(
            keys,
            [(2, "datum"), (2, "nearestdc"), (2, "optcost"), (5, "datum"), (5, "nearestdc"), (5, "optcost")]
        );
        for seed_rows in recs.chunks(3) {
            assert!(seed_rows.iter().all(|r| r.fingerprint == seed_rows[0].fingerprint));
            assert!(seed_rows[0].total().unwrap() >= seed_rows[2].total().unwrap());
        }
        let text = compare_csv(&recs);
        assert!(text.starts_with("seed,algorithm,oper,exec,purch,total,runtime_ms,fingerprint,error\n"));
        assert_eq!(text.lines().count(), 7);
        assert_eq!(text, compare_csv(&compare(&tiny(), &[2, 5], &algs, &SolveConfig::default(), false).unwrap()));
        assert!(summary(&recs).contains("optcost"));
    }

    #[test]
    fn oversize_rows_keep_others() {
        let cfg = SolveConfig { budget: ExhaustiveBudget::new(2).unwrap(), ..Default::default() };
        let recs = compare(&tiny(), &[1], &[Algorithm::OptCost, Algorithm::Datum], &cfg, true).unwrap();
        assert!(recs[0].cost.is_some() && recs[0].runtime_ms.is_some());
        assert!(recs[1].error.as_deref().unwrap().contains("budget"));
        let text = compare_csv(&recs);
        assert!(text.lines().nth(2).unwrap().starts_with("1,optcost,,,,,"));
    }

    #[test]
    fn sweep_rows() {
        let mut base = tiny();
        base.ratio_internal_to_external = -3.0;
        let recs = sweep(
            &base,
            Knob::BandToFee,
            -2.0,
            2.0,
            5,
            &[0],
            &[Algorithm::Datum, Algorithm::OptBand],
            &SolveConfig::default(),
            false,
        )
        .unwrap();
        assert_eq!(recs.len(), 10);
        let text = sweep_csv(&recs);
        assert!(text.starts_with("knob,target,seed,algorithm,total,"));
        assert!(text.contains("band_to_fee,-2.000000,0,datum,"));
    }
}
