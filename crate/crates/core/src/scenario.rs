//! Seeded synthetic market modeled on a US-wide data cloud.
//!
//! Data center `d` sits at the largest city of the `d`-th state in
//! [`DATA_CENTER_STATES`]; providers take turns over the second and third
//! largest cities of those states. Randomness comes from SplitMix64 seeded
//! with the scenario seed, and floats are `(x >> 11) * 2^-53` of its output.
//! Draw order: every client's city, then every client's provider set, then
//! the level of each demand (client order, then provider order), then the
//! fees of each provider. No draw depends on the ratio targets, so a sweep
//! over targets keeps everything else fixed.

use std::fmt;
use std::str::FromStr;

use rand_xoshiro::rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::cities::{self, City, CITIES, DATA_CENTER_STATES};
use crate::error::{Error, Result};
use crate::geo::{haversine_gm, GeoPoint};
use crate::model::{build, Client, Contracting, DataCenter, ExecCostModel, MarketInstance, Provider};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams {
    pub seed: u64,
    pub num_data_centers: usize,
    pub num_providers: usize,
    pub num_clients: usize,
    pub levels_per_provider: usize,
    /// Defaults to half the providers when `None`.
    pub avg_providers_per_client: Option<f64>,
    pub zipf_shape: f64,
    pub pareto_mean: f64,
    pub pareto_shape: f64,
    pub rate_per_gigameter: f64,
    /// Target `log10((sum alpha + sum beta) / sum f)`.
    pub ratio_band_to_fee: f64,
    /// Target `log10(sum alpha / (sum beta + sum f))`.
    pub ratio_internal_to_external: f64,
    pub max_replicas: usize,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            seed: 0,
            num_data_centers: 10,
            num_providers: 20,
            num_clients: 100,
            levels_per_provider: 8,
            avg_providers_per_client: None,
            zipf_shape: 30.0,
            pareto_mean: 10.0,
            pareto_shape: 2.0,
            rate_per_gigameter: 1.0,
            ratio_band_to_fee: -0.5,
            ratio_internal_to_external: -1.0,
            max_replicas: 2,
        }
    }
}

impl ScenarioParams {
    pub fn avg_providers(&self) -> f64 {
        self.avg_providers_per_client.unwrap_or(self.num_providers as f64 / 2.0)
    }

    /// Pareto scale giving the configured mean.
    pub fn pareto_scale(&self) -> f64 {
        self.pareto_mean * (self.pareto_shape - 1.0) / self.pareto_shape
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if !(1..=DATA_CENTER_STATES.len()).contains(&self.num_data_centers) {
            return bad(format!("num_data_centers must be 1..={}", DATA_CENTER_STATES.len()));
        }
        if self.num_providers == 0 || self.num_clients == 0 || self.levels_per_provider == 0 {
            return bad("provider, client and level counts must be positive".into());
        }
        let avg = self.avg_providers();
        if !(avg > 0.0 && avg <= self.num_providers as f64) {
            return bad(format!("avg_providers_per_client must be in (0, {}]", self.num_providers));
        }
        if !(self.zipf_shape.is_finite() && self.zipf_shape >= 0.0) {
            return bad("zipf_shape must be a nonnegative number".into());
        }
        if !(self.pareto_shape.is_finite() && self.pareto_shape > 1.0) {
            return bad("pareto_shape must exceed 1 for a finite mean".into());
        }
        if !(self.pareto_mean.is_finite() && self.pareto_mean > 0.0) {
            return bad("pareto_mean must be positive".into());
        }
        if !(self.rate_per_gigameter.is_finite() && self.rate_per_gigameter > 0.0) {
            return bad("rate_per_gigameter must be positive".into());
        }
        if self.max_replicas == 0 {
            return bad("max_replicas must be positive".into());
        }
        if !(self.ratio_band_to_fee.is_finite() && self.ratio_internal_to_external.is_finite()) {
            return Err(Error::InvalidRatioTargets("targets must be finite".into()));
        }
        if self.ratio_band_to_fee <= self.ratio_internal_to_external {
            return Err(Error::InvalidRatioTargets(format!(
                "band-to-fee target {} must exceed internal-to-external target {}",
                self.ratio_band_to_fee, self.ratio_internal_to_external
            )));
        }
        Ok(())
    }
}

/// Floats in [0, 1) from the top 53 bits.
struct Draws(SplitMix64);

impl Draws {
    fn new(seed: u64) -> Self {
        Self(SplitMix64::seed_from_u64(seed))
    }

    fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Index drawn with probability proportional to `weights`.
    fn weighted(&mut self, weights: &[f64]) -> usize {
        let total: f64 = weights.iter().sum();
        let mut u = self.unit() * total;
        for (i, w) in weights.iter().enumerate() {
            if u < *w {
                return i;
            }
            u -= w;
        }
        weights.len() - 1
    }
}

/// Levels (0-based) ordered by distance from the center level
/// `round(L / 2)` (1-based), nearer first, ties to the lower level.
pub fn zipf_level_order(num_levels: usize) -> Vec<usize> {
    let center = ((num_levels as f64 / 2.0).round() as usize).max(1);
    let mut order: Vec<usize> = (1..=num_levels).collect();
    order.sort_by_key(|&l| (l.abs_diff(center), l));
    order.into_iter().map(|l| l - 1).collect()
}

/// `P(rank r) ∝ r^-shape` for ranks `1..=n`.
pub fn zipf_weights(n: usize, shape: f64) -> Vec<f64> {
    (1..=n).map(|r| (r as f64).powf(-shape)).collect()
}

/// Scales `(s_alpha, s_beta)` that hit the targets given raw sums of
/// execution costs `a`, operation costs `b` and fees `f`.
pub fn calibration_scales(a: f64, b: f64, f: f64, band_to_fee: f64, internal_to_external: f64) -> Result<(f64, f64)> {
    let r1 = 10f64.powf(band_to_fee);
    let r2 = 10f64.powf(internal_to_external);
    let s_beta = f * (r1 - r2) / (b * (1.0 + r2));
    let s_alpha = r2 * (s_beta * b + f) / a;
    if !(s_beta.is_finite() && s_alpha.is_finite() && s_beta > 0.0 && s_alpha > 0.0) {
        return Err(Error::InvalidRatioTargets(format!(
            "calibration gives non-positive scales (alpha {s_alpha}, beta {s_beta})"
        )));
    }
    Ok((s_alpha, s_beta))
}

fn point(c: &City) -> GeoPoint {
    GeoPoint::new(c.lat, c.lon)
}

/// Provider sites: second and third largest cities of the first `num_dcs` states.
pub fn provider_sites(num_dcs: usize) -> Vec<&'static City> {
    DATA_CENTER_STATES[..num_dcs].iter().flat_map(|s| cities::largest_in_state(s, 3).into_iter().skip(1)).collect()
}

pub fn generate(params: &ScenarioParams) -> Result<MarketInstance> {
    params.validate()?;
    let mut rng = Draws::new(params.seed);
    let num_dcs = params.num_data_centers;
    let num_levels = params.levels_per_provider;

    let dc_cities: Vec<&City> =
        DATA_CENTER_STATES[..num_dcs].iter().map(|s| cities::largest_in_state(s, 1)[0]).collect();
    let sites = provider_sites(num_dcs);
    let provider_cities: Vec<&City> = (0..params.num_providers).map(|p| sites[p % sites.len()]).collect();

    let weights: Vec<f64> = CITIES.iter().map(|c| c.population as f64).collect();
    let client_cities: Vec<&City> = (0..params.num_clients).map(|_| &CITIES[rng.weighted(&weights)]).collect();

    let include = params.avg_providers() / params.num_providers as f64;
    let demanded: Vec<Vec<usize>> = (0..params.num_clients)
        .map(|_| loop {
            let set: Vec<usize> = (0..params.num_providers).filter(|_| rng.unit() < include).collect();
            if !set.is_empty() {
                break set;
            }
        })
        .collect();

    let order = zipf_level_order(num_levels);
    let zipf = zipf_weights(num_levels, params.zipf_shape);
    let levels: Vec<Vec<usize>> =
        demanded.iter().map(|set| set.iter().map(|_| order[rng.weighted(&zipf)]).collect()).collect();

    let scale = params.pareto_scale();
    let fees: Vec<Vec<Rational>> = (0..params.num_providers)
        .map(|_| {
            let mut draws: Vec<f64> =
                (0..num_levels).map(|_| scale / (1.0 - rng.unit()).powf(1.0 / params.pareto_shape)).collect();
            draws.sort_by(f64::total_cmp);
            let mut out: Vec<Rational> = Vec::with_capacity(num_levels);
            for x in draws {
                let mut v = rational::from_f64(x);
                if let Some(prev) = out.last() {
                    if &v <= prev {
                        v = prev + rational::ratio(1, 1_000_000);
                    }
                }
                out.push(v);
            }
            out
        })
        .collect();

    // Raw sums at one unit of money per gigameter.
    let rate = params.rate_per_gigameter;
    let raw_exec: f64 =
        dc_cities.iter().flat_map(|d| client_cities.iter().map(move |c| rate * haversine_gm(point(d), point(c)))).sum();
    let raw_oper: f64 = provider_cities
        .iter()
        .flat_map(|p| dc_cities.iter().map(move |d| rate * haversine_gm(point(p), point(d))))
        .sum();
    let raw_fees: f64 = fees.iter().flatten().map(rational::to_f64).sum();
    let (s_alpha, s_beta) =
        calibration_scales(raw_exec, raw_oper, raw_fees, params.ratio_band_to_fee, params.ratio_internal_to_external)?;

    let qualities: Vec<Rational> = (1..=num_levels as i64).map(rational::int).collect();
    let providers: Vec<Provider> = (0..params.num_providers)
        .map(|p| Provider {
            id: format!("p{}", p + 1),
            levels: build::levels(&qualities, &fees[p], None),
            oper_cost: dc_cities
                .iter()
                .map(|d| {
                    let v = rational::from_f64(rate * s_beta * haversine_gm(point(provider_cities[p]), point(d)));
                    vec![v; num_levels]
                })
                .collect(),
        })
        .collect();
    let data_centers = dc_cities
        .iter()
        .enumerate()
        .map(|(d, c)| DataCenter { id: format!("dc{}", d + 1), location: Some(point(c)) })
        .collect();
    let clients = (0..params.num_clients)
        .map(|c| Client {
            id: format!("c{}", c + 1),
            demands: demanded[c]
                .iter()
                .zip(&levels[c])
                .map(|(&p, &l)| (format!("p{}", p + 1), qualities[l].clone()))
                .collect(),
            location: Some(point(client_cities[c])),
        })
        .collect();

    Ok(MarketInstance {
        providers,
        data_centers,
        clients,
        exec_cost: ExecCostModel::Distance { rate: rational::from_f64(rate * s_alpha) },
        contracting: Contracting::PerQuery,
    })
}

/// Realized `(log10((A + B) / F), log10(A / (B + F)))` where `A` sums
/// execution cost over data-center/client pairs, `B` sums operation cost over
/// provider/data-center pairs and `F` sums fees over provider levels.
pub fn realized_ratios(instance: &MarketInstance) -> Result<(f64, f64)> {
    let mut a = 0.0;
    for d in 0..instance.num_data_centers() {
        for c in 0..instance.clients.len() {
            a += rational::to_f64(&instance.exec_cost(0, d, c, 0)?);
        }
    }
    let b: f64 = instance.providers.iter().flat_map(|p| p.oper_cost.iter().map(|row| rational::to_f64(&row[0]))).sum();
    let f: f64 =
        instance.providers.iter().flat_map(|p| p.levels.iter().map(|l| rational::to_f64(&l.per_query_fee))).sum();
    Ok((((a + b) / f).log10(), (a / (b + f)).log10()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Knob {
    BandToFee,
    InternalToExternal,
}

impl Knob {
    pub fn name(self) -> &'static str {
        match self {
            Knob::BandToFee => "band_to_fee",
            Knob::InternalToExternal => "internal_to_external",
        }
    }
}

impl fmt::Display for Knob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Knob {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "band_to_fee" => Ok(Knob::BandToFee),
            "internal_to_external" => Ok(Knob::InternalToExternal),
            other => Err(Error::InvalidParams(format!(
                "unknown knob {other:?}; expected band_to_fee or internal_to_external"
            ))),
        }
    }
}

/// Evenly spaced targets for `knob`; every other parameter is copied.
pub fn sweep_targets(from: f64, to: f64, steps: usize) -> Result<Vec<f64>> {
    if steps < 2 {
        return Err(Error::InvalidParams("a sweep needs at least 2 steps".into()));
    }
    Ok((0..steps).map(|k| from + (to - from) * k as f64 / (steps - 1) as f64).collect())
}

pub fn sweep_params(
    base: &ScenarioParams,
    knob: Knob,
    from: f64,
    to: f64,
    steps: usize,
) -> Result<Vec<ScenarioParams>> {
    sweep_targets(from, to, steps)?
        .into_iter()
        .map(|t| {
            let mut p = base.clone();
            match knob {
                Knob::BandToFee => p.ratio_band_to_fee = t,
                Knob::InternalToExternal => p.ratio_internal_to_external = t,
            }
            p.validate()?;
            Ok(p)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io;
    use crate::model::{split_by_provider, validate_instance};

    fn small(seed: u64) -> ScenarioParams {
        ScenarioParams {
            seed,
            num_data_centers: 4,
            num_providers: 6,
            num_clients: 40,
            levels_per_provider: 4,
            ..Default::default()
        }
    }

    #[test]
    fn deterministic() {
        let a = io::instance_to_json(&generate(&small(7)).unwrap());
        let b = io::instance_to_json(&generate(&small(7)).unwrap());
        assert_eq!(a, b);
        let c = io::instance_to_json(&generate(&small(8)).unwrap());
        assert_ne!(a, c);
    }

    #[test]
    fn pareto_scale_from_mean() {
        assert_eq!(ScenarioParams::default().pareto_scale(), 5.0);
    }

    #[test]
    fn calibration_solves_both_equations() {
        let (a, b, f) = (3.0, 5.0, 7.0);
        let (r1, r2) = (10f64.powf(-0.5), 0.1);
        let (sa, sb) = calibration_scales(a, b, f, -0.5, -1.0).unwrap();
        assert!((sb - f * (r1 - r2) / (b * (1.0 + r2))).abs() < 1e-12);
        assert!((sa * a + sb * b - r1 * f).abs() < 1e-12);
        assert!((sa * a - r2 * (sb * b + f)).abs() < 1e-12);
        assert!(matches!(calibration_scales(a, b, f, -1.0, -1.0), Err(Error::InvalidRatioTargets(_))));
    }

    #[test]
    fn zipf_ordering() {
        assert_eq!(zipf_level_order(8), vec![3, 2, 4, 1, 5, 0, 6, 7]);
        assert_eq!(zipf_level_order(1), vec![0]);
        assert_eq!(zipf_level_order(4), vec![1, 0, 2, 3]);
        let w = zipf_weights(3, 2.0);
        assert_eq!(w, vec![1.0, 0.25, 1.0 / 9.0]);
    }

    #[test]
    fn generated_instance_properties() {
        for seed in 0..5 {
            let p = small(seed);
            let inst = generate(&p).unwrap();
            assert!(validate_instance(&inst).is_ok());
            assert_eq!(inst.data_centers.len(), 4);
            for prov in &inst.providers {
                assert!(prov.levels.windows(2).all(|w| w[0].per_query_fee < w[1].per_query_fee));
            }
            assert!(inst.clients.iter().all(|c| !c.demands.is_empty()));
            split_by_provider(&inst).unwrap();
            let (bf, ie) = realized_ratios(&inst).unwrap();
            assert!((bf - p.ratio_band_to_fee).abs() <= 1e-3, "{bf}");
            assert!((ie - p.ratio_internal_to_external).abs() <= 1e-3, "{ie}");
        }
    }

    #[test]
    fn default_scale_layout() {
        let inst = generate(&ScenarioParams { num_clients: 30, ..Default::default() }).unwrap();
        assert_eq!(inst.providers.len(), 20);
        assert_eq!(inst.providers[0].levels.len(), 8);
        let la = inst.data_centers[0].location.unwrap();
        assert_eq!((la.lat, la.lon), (34.0522, -118.2437));
        let sites: Vec<&str> = provider_sites(2).iter().map(|c| c.name).collect();
        assert_eq!(sites, ["San Diego", "San Jose", "Spokane", "Tacoma"]);
    }

    #[test]
    fn sweep_keeps_demands() {
        let ps = sweep_params(&small(3), Knob::BandToFee, -0.9, 2.0, 4).unwrap();
        assert_eq!(ps.len(), 4);
        let demands: Vec<_> = ps
            .iter()
            .map(|p| {
                let inst = generate(p).unwrap();
                inst.clients.iter().map(|c| c.demands.clone()).collect::<Vec<_>>()
            })
            .collect();
        assert!(demands.windows(2).all(|w| w[0] == w[1]));
        assert_eq!(sweep_targets(-2.0, 2.0, 5).unwrap(), vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert!(sweep_params(&small(3), Knob::BandToFee, -2.0, 2.0, 5).is_err());
        assert!(sweep_targets(0.0, 1.0, 1).is_err());
        assert_eq!("internal_to_external".parse::<Knob>().unwrap(), Knob::InternalToExternal);
    }

    #[test]
    fn rejects_bad_params() {
        let mut p = small(0);
        p.num_data_centers = 11;
        assert!(generate(&p).is_err());
        let mut p = small(0);
        p.pareto_shape = 1.0;
        assert!(generate(&p).is_err());
    }
}
