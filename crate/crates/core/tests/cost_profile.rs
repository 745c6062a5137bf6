//! Relative latency profile of the engines on the 8x adverse-event graph.

use kgbench_core::engine::{ingest_graph, Backend};
use kgbench_core::harness::{run_cell, summarize, Mode, Summary, DEFAULT_RUNS};
use kgbench_core::scale::duplicate_merge;
use kgbench_core::synth::{generate_synthetic, SyntheticSpec};
use kgbench_core::workload::{compile, Paradigm, QuerySpec, SchemaBinding};

fn measure(engine: &mut dyn Backend, q: &QuerySpec, mode: Mode) -> Summary {
    let plan = compile(q, engine.paradigm()).unwrap();
    let recs = run_cell(engine, &plan, mode, DEFAULT_RUNS, 8).unwrap();
    summarize(&recs.iter().map(|r| r.elapsed_ms).collect::<Vec<_>>()).unwrap()
}

#[test]
fn tier_one_and_tier_four_profiles() {
    let base = generate_synthetic(&SyntheticSpec::faers_like(14_000, 7)).unwrap();
    let kg = duplicate_merge(&base, 3).unwrap();
    let mut doc = ingest_graph(Paradigm::Document, &kg);
    let mut graph = ingest_graph(Paradigm::Graph, &kg);
    let b = SchemaBinding::default();
    let t1 = b.tier1();

    let doc_cold = measure(doc.as_mut(), &t1, Mode::Cold);
    let doc_hot = measure(doc.as_mut(), &t1, Mode::Hot);
    let graph_cold = measure(graph.as_mut(), &t1, Mode::Cold);
    let graph_hot = measure(graph.as_mut(), &t1, Mode::Hot);
    eprintln!("tier1 document cold {doc_cold:?}\ntier1 document hot {doc_hot:?}");
    eprintln!("tier1 graph cold {graph_cold:?}\ntier1 graph hot {graph_hot:?}");
    // The cold index build costs the document engine its lead; only the
    // warm ordering is stable.
    assert!(doc_hot.strictly_below(&doc_cold));
    assert!(doc_hot.strictly_below(&graph_hot));

    let t4 = b.tier4(1);
    let doc_hot = measure(doc.as_mut(), &t4, Mode::Hot);
    let graph_hot = measure(graph.as_mut(), &t4, Mode::Hot);
    assert!(graph_hot.strictly_below(&doc_hot));
}
