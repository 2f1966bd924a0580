mod common;

use common::*;
use datum_core::baselines::{self, from_uflp, nearest_dc, opt_band, opt_cost, to_uflp, ExhaustiveBudget};
use datum_core::datum::{datum_solve, DatumConfig};
use datum_core::io;
use datum_core::model::{evaluate_cost, split_by_provider, Contracting, MarketInstance};
use datum_core::rational::Rational;
use datum_core::single_dc::single_dc_solve;
use proptest::prelude::*;

fn budget() -> ExhaustiveBudget {
    ExhaustiveBudget::default()
}

fn instance(seed: u64, shape: Shape) -> MarketInstance {
    random_instance(&mut rng(seed), shape)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn opt_cost_matches_enumeration(seed in any::<u64>(), bulk in any::<bool>()) {
        let shape = Shape {
            contracting: if bulk { Contracting::Bulk } else { Contracting::PerQuery },
            ..Shape::default()
        };
        let inst = instance(seed, shape);
        let (plan, cost) = opt_cost(&inst, budget()).unwrap();
        prop_assert_eq!(&cost.total, &exhaustive_optimum(&inst, OracleObjective::Total));
        prop_assert!(assignments_are_locally_optimal(&inst, &plan));
    }

    #[test]
    fn opt_band_minimizes_bandwidth(seed in any::<u64>()) {
        let inst = instance(seed, Shape::default());
        let (plan, cost) = opt_band(&inst, budget()).unwrap();
        prop_assert_eq!(cost.bandwidth(), exhaustive_optimum(&inst, OracleObjective::Bandwidth));
        prop_assert_eq!(evaluate_cost(&inst, &plan).unwrap(), cost.clone());
        prop_assert!(cost.total >= exhaustive_optimum(&inst, OracleObjective::Total));
    }

    #[test]
    fn evaluate_cost_matches_direct_sums(seed in any::<u64>(), bulk in any::<bool>()) {
        let shape = Shape {
            contracting: if bulk { Contracting::Bulk } else { Contracting::PerQuery },
            ..Shape::default()
        };
        let inst = instance(seed, shape);
        for (plan, cost) in [opt_cost(&inst, budget()).unwrap(), nearest_dc(&inst).unwrap()] {
            let (oper, exec, purch) = direct_cost(&inst, &plan);
            prop_assert_eq!(&cost.oper, &oper);
            prop_assert_eq!(&cost.exec, &exec);
            prop_assert_eq!(&cost.purch, &purch);
            prop_assert_eq!(cost.total, oper + exec + purch);
        }
    }

    #[test]
    fn heuristics_bounded_below_by_optimum(seed in any::<u64>()) {
        let inst = instance(seed, Shape::default());
        let best = exhaustive_optimum(&inst, OracleObjective::Total);
        let (_, nearest) = nearest_dc(&inst).unwrap();
        prop_assert!(nearest.total >= best);
        let (plan, datum) = datum_solve(&inst, &DatumConfig::default()).unwrap();
        prop_assert!(datum.total >= best);
        prop_assert_eq!(evaluate_cost(&inst, &plan).unwrap(), datum);
    }

    #[test]
    fn providers_decouple(seed in any::<u64>()) {
        let inst = instance(seed, Shape { max_providers: 3, ..Shape::default() });
        let joint = opt_cost(&inst, budget()).unwrap().1.total;
        let mut parts = Rational::default();
        for p in 0..inst.providers.len() {
            let mut one = inst.clone();
            let id = inst.providers[p].id.clone();
            for c in &mut one.clients {
                c.demands.retain(|k, _| k == &id);
            }
            parts += exhaustive_optimum(&one, OracleObjective::Total);
        }
        prop_assert_eq!(joint, parts);
    }

    #[test]
    fn single_data_center_is_exact(seed in any::<u64>()) {
        let shape = Shape { max_dcs: 1, max_levels: 5, max_clients: 8, exec_level_independent: true, ..Shape::default() };
        let inst = instance(seed, shape);
        let (_, exact) = single_dc_solve(&inst).unwrap();
        prop_assert_eq!(&exact.total, &exhaustive_optimum(&inst, OracleObjective::Total));
        let (_, datum) = datum_solve(&inst, &DatumConfig::default()).unwrap();
        prop_assert_eq!(datum.total, exact.total);
    }

    #[test]
    fn uflp_round_trip_preserves_optimum(seed in any::<u64>()) {
        let u = random_uflp(&mut rng(seed), 6, 5);
        let inst = from_uflp(&u).unwrap();
        let best = uflp_optimum(&u);
        prop_assert_eq!(&opt_cost(&inst, budget()).unwrap().1.total, &best);
        let back = to_uflp(&split_by_provider(&inst).unwrap()[0]).unwrap();
        prop_assert_eq!(uflp_optimum(&back), best);
    }

    #[test]
    fn instance_json_round_trip(seed in any::<u64>(), bulk in any::<bool>()) {
        let shape = Shape {
            contracting: if bulk { Contracting::Bulk } else { Contracting::PerQuery },
            ..Shape::default()
        };
        let inst = instance(seed, shape);
        let back = io::load_instance(&io::instance_to_json(&inst)).unwrap();
        prop_assert_eq!(io::fingerprint(&back), io::fingerprint(&inst));
        prop_assert_eq!(back, inst);
    }

    #[test]
    fn plan_files_reevaluate_exactly(seed in any::<u64>()) {
        let inst = instance(seed, Shape::default());
        let (plan, cost) = datum_solve(&inst, &DatumConfig::default()).unwrap();
        let text = io::plan_to_json(&inst, &plan, Some(&cost));
        let (back, recorded) = io::parse_plan(&inst, &text).unwrap();
        prop_assert_eq!(evaluate_cost(&inst, &back).unwrap(), recorded.unwrap());
    }
}

#[test]
fn oversize_reports_required_budget() {
    let inst = instance(11, Shape { max_dcs: 3, max_levels: 3, max_facilities: 9, max_clients: 3, ..Shape::default() });
    let small = ExhaustiveBudget::new(1).unwrap();
    match opt_cost(&inst, small) {
        Err(datum_core::Error::OversizeInstance { required, .. }) => assert!(required >= 2),
        other => assert!(inst.clients.is_empty(), "{other:?}"),
    }
    assert_eq!(baselines::DEFAULT_BUDGET, 1 << 20);
}
