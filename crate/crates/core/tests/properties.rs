mod common;

use kgbench_core::advisor::{advise, Rules, WorkloadProfile};
use kgbench_core::engine::ingest_graph;
use kgbench_core::harness::{aggregate, summarize, Mode, RunRecord};
use kgbench_core::ingest::{load_csv_bundle, CsvExportBundle};
use kgbench_core::metrics::{compute_all, entropy, MetricsReport};
use kgbench_core::scale::duplicate_merge;
use kgbench_core::workload::{compile, Paradigm, SchemaBinding, Workload};
use kgbench_core::Execution;
use proptest::prelude::*;

fn metrics(sr: f64, cd: f64) -> MetricsReport {
    MetricsReport {
        node_count: 1000,
        edge_count: (cd * 1000.0) as u64,
        scale: 1000 + (cd * 1000.0) as u64,
        connectivity_density: cd,
        type_diversity: sr / 2.0,
        class_entropy: sr / 4.0,
        reltype_entropy: sr / 4.0,
        semantic_richness: sr,
        class_count: 4,
        reltype_count: 4,
    }
}

fn profile() -> impl Strategy<Value = WorkloadProfile> {
    prop::array::uniform4(0u32..100).prop_filter_map("all zero", |w| {
        let total: u32 = w.iter().sum();
        if total == 0 {
            return None;
        }
        let mut f = w.map(|x| x as f64 / total as f64);
        f[3] = 1.0 - f[0] - f[1] - f[2];
        WorkloadProfile::new(f.map(|x| x.max(0.0))).ok()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn csv_round_trip(seed in any::<u64>()) {
        let kg = common::random_graph(seed, 80);
        let bundle = CsvExportBundle::from_graph(&kg).unwrap();
        for exec in [Execution::Sequential, Execution::default()] {
            prop_assert_eq!(&load_csv_bundle(&bundle, exec).unwrap(), &kg);
        }
    }

    #[test]
    fn entropy_is_bounded(counts in prop::collection::vec(1usize..500, 1..20)) {
        let hist = counts.iter().enumerate().map(|(i, c)| (format!("t{i}"), *c)).collect();
        let h = entropy(&hist).unwrap();
        prop_assert!(h >= 0.0);
        prop_assert!(h <= (counts.len() as f64).ln() + 1e-12);
    }

    #[test]
    fn duplication_preserves_shape(seed in any::<u64>(), n in 0u32..4) {
        let kg = common::random_graph(seed, 60);
        let scaled = duplicate_merge(&kg, n).unwrap();
        prop_assert_eq!(scaled.node_count(), kg.node_count() << n);
        prop_assert_eq!(scaled.edge_count(), kg.edge_count() << n);
        if let (Ok(a), Ok(b)) = (compute_all(&kg), compute_all(&scaled)) {
            prop_assert_eq!(a.semantic_richness.to_bits(), b.semantic_richness.to_bits());
            prop_assert_eq!(a.connectivity_density.to_bits(), b.connectivity_density.to_bits());
        }
    }

    #[test]
    fn caches_are_transparent(seed in any::<u64>()) {
        let kg = common::random_faers_graph(seed, 400);
        for p in Paradigm::BENCHMARKED {
            let mut e = ingest_graph(p, &kg);
            for q in Workload::faers_default().queries {
                let plan = compile(&q, p).unwrap();
                let first = e.execute(&plan).unwrap();
                let warm = e.execute(&plan).unwrap();
                e.clear_caches();
                prop_assert!(e.cached_structures().is_empty());
                let cold = e.execute(&plan).unwrap();
                prop_assert_eq!(&first, &warm);
                prop_assert!(first.same_bag(&cold));
            }
        }
    }

    #[test]
    fn engines_match_oracle(seed in any::<u64>(), depth in 1u32..4) {
        let kg = common::random_faers_graph(seed, 300);
        let mut queries = Workload::faers_default().queries;
        queries.push(SchemaBinding::default().tier4(depth));
        kgbench_core::harness::verify_equivalence(&kg, &queries, &Paradigm::BENCHMARKED).unwrap();
    }

    #[test]
    fn aggregation_ignores_record_order(mut values in prop::collection::vec(0.001f64..100.0, 2..40), rot in 0usize..40) {
        let recs = |vals: &[f64]| -> Vec<RunRecord> {
            vals.iter().enumerate().map(|(i, v)| RunRecord {
                backend: "graph".into(),
                query_id: "q".into(),
                scale: 1,
                mode: Mode::Hot,
                run_index: i as u32 + 1,
                elapsed_ms: *v,
                result_count: 0,
            }).collect()
        };
        let a = aggregate(&recs(&values)).unwrap();
        let k = rot % values.len();
        values.rotate_left(k);
        let b = aggregate(&recs(&values)).unwrap();
        prop_assert_eq!(a.len(), 1);
        prop_assert!((a[0].mean_ms - b[0].mean_ms).abs() <= 1e-9 * a[0].mean_ms);
        let s = summarize(&values).unwrap();
        prop_assert!(s.ci_low <= s.mean && s.mean <= s.ci_high);
        prop_assert!(s.stddev >= 0.0);
    }

    #[test]
    fn advisor_ranks_every_paradigm_once(sr in 0.0f64..15.0, cd in 0.0f64..3.0, p in profile()) {
        let r = advise(&metrics(sr, cd), &p);
        let mut ranked = r.ranking.clone();
        ranked.sort_by_key(|p| p.as_str());
        prop_assert_eq!(ranked, vec![Paradigm::Document, Paradigm::Graph, Paradigm::MultiModel]);
        prop_assert_eq!(r.fired[0].rule, r.decided_by);
        prop_assert_eq!(r.fired[0].favors, r.first());
        prop_assert_eq!(&r, &advise(&metrics(sr, cd), &p));
    }

    #[test]
    fn graph_never_drops_when_sr_or_cd_grows(
        sr in 0.0f64..15.0,
        cd in 0.0f64..3.0,
        dsr in 0.0f64..5.0,
        dcd in 0.0f64..1.0,
        tier in 1u8..3,
    ) {
        let p = WorkloadProfile::single(tier);
        let rank = |sr, cd| advise(&metrics(sr, cd), &p).ranking.iter().position(|x| *x == Paradigm::Graph).unwrap();
        prop_assert!(rank(sr + dsr, cd) <= rank(sr, cd));
        prop_assert!(rank(sr, cd + dcd) <= rank(sr, cd));
    }

    #[test]
    fn duplication_never_changes_advice(seed in 0u64..50, n in 1u32..3, p in profile()) {
        let kg = common::random_faers_graph(seed, 200);
        let a = compute_all(&kg).unwrap();
        let b = compute_all(&duplicate_merge(&kg, n).unwrap()).unwrap();
        let (ra, rb) = (advise(&a, &p), advise(&b, &p));
        prop_assert_eq!(ra.ranking, rb.ranking);
        prop_assert_eq!(ra.decided_by, rb.decided_by);
        prop_assert_eq!(rb.metrics.scale, a.scale << n);
    }

    #[test]
    fn workload_json_round_trip(depth in 1u32..6, lo in 0i64..100, span in 0i64..50) {
        let b = SchemaBinding { age_range: [lo as f64, (lo + span) as f64], ..SchemaBinding::default() };
        let w = Workload::from_binding("t", b, depth);
        let back = Workload::from_json(&w.to_json()).unwrap();
        prop_assert_eq!(back, w);
    }
}

#[test]
fn rules_default_round_trips_through_json() {
    let r = Rules::default();
    let back: Rules = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
    assert_eq!(back, r);
}
