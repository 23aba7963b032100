use warmlab::analysis::{
    build_crystal_tree, check_disconnect, disconnect_candidates, goodness_report, gw_statistics, GoodnessReport,
    UniformScope,
};
use warmlab::graph::build_tree;
use warmlab::montecarlo::{run_replicas, McEstimate};
use warmlab::warm::{simulate, WarmConfig};
use warmlab::{ParamInputs, ParamSet};

#[test]
fn warm_to_crystal_statistics() {
    let g = build_tree(5, 2, 1e-3).unwrap();
    let p = ParamSet::derive(&ParamInputs { alpha: 2.0, m: 2, n: 5, big_m: 41, eps: 0.5, q: 1e-3, c1: 1.0 }).unwrap();
    let trees = run_replicas(40, 5, |i, _| {
        let tr = simulate(&g, &WarmConfig::new(2.0, 50.0, 1000 + i)).unwrap();
        let rep = goodness_report(&g, &tr, &p, UniformScope::Stream { limit: 400 }).unwrap();
        let json = rep.to_json().unwrap();
        let back: GoodnessReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, rep);
        build_crystal_tree(&g, &rep, g.root(0))
    });
    let stats = gw_statistics(&trees);
    assert_eq!(stats.trees, 40);
    assert_eq!(stats.histogram.values().sum::<u64>(), stats.nodes);
    assert!(stats.empty_trees <= 40);
}

#[test]
fn disconnect_never_violated_on_small_trees() {
    let g = build_tree(2, 3, 0.5).unwrap();
    let cands = disconnect_candidates(&g);
    assert!(!cands.is_empty());
    let est = warmlab::montecarlo::estimate_event(
        |i, _| {
            let tr = simulate(&g, &WarmConfig::new(2.0, 40.0, i)).unwrap();
            cands.iter().all(|&v| !check_disconnect(&g, &tr, v).unwrap().violated)
        },
        500,
        0,
    )
    .unwrap();
    assert_eq!(est, McEstimate::from_counts(500, 500, 0, 0).unwrap());
}
