//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use warmlab::analysis::{build_crystal_tree, check_disconnect, disconnect_candidates, GoodnessReport, VertexGoodness};
use warmlab::graph::{build_tree, Graph, VertexId};
use warmlab::montecarlo::{
    run_replicas, run_theorem1, verify_lemma_ss, verify_p_delta, verify_p_s, Verdict, MIN_EXACT,
};
use warmlab::numeric::{partial_sum_cdf, simplex_bounds};
use warmlab::urn::{evaluate_outcome, rubin_race, run_rubin, run_sequential, UrnState};
use warmlab::warm::{simulate, WarmConfig};
use warmlab::Substream;

const SEED: u64 = 20_240_601;

type Criterion = fn() -> anyhow::Result<Outcome>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn ok(pass: bool, detail: impl Into<String>) -> anyhow::Result<Outcome> {
    Ok(Outcome { pass, detail: detail.into() })
}

fn tv<K: Ord>(a: &BTreeMap<K, f64>, b: &BTreeMap<K, f64>) -> f64 {
    let keys: BTreeSet<&K> = a.keys().chain(b.keys()).collect();
    0.5 * keys.into_iter().map(|k| (a.get(k).unwrap_or(&0.0) - b.get(k).unwrap_or(&0.0)).abs()).sum::<f64>()
}

fn frequencies<K: Ord>(xs: Vec<K>) -> BTreeMap<K, f64> {
    let n = xs.len() as f64;
    let mut m = BTreeMap::new();
    for x in xs {
        *m.entry(x).or_insert(0.0) += 1.0 / n;
    }
    m
}

/// Sequence law from (2, 1) against the product of selection probabilities.
fn urn_exactness() -> anyhow::Result<Outcome> {
    let start = Instant::now();
    let initial = UrnState::new(vec![2, 1])?;
    let seqs = run_replicas(100_000, SEED, |_, s| run_sequential(&initial, 2.0, 6, s).map(|t| t.choices));
    let seqs: Vec<Vec<usize>> = seqs.into_iter().collect::<Result<_, _>>()?;
    let empirical = frequencies(seqs);
    let mut exact = BTreeMap::new();
    for code in 0u32..64 {
        let seq: Vec<usize> = (0..6).map(|i| (code >> i) as usize & 1).collect();
        let mut t = [2.0f64, 1.0];
        let mut p = 1.0;
        for &c in &seq {
            p *= t[c] * t[c] / (t[0] * t[0] + t[1] * t[1]);
            t[c] += 1.0;
        }
        exact.insert(seq, p);
    }
    let d = tv(&empirical, &exact);
    let secs = start.elapsed().as_secs_f64();
    ok(d <= 0.01 && secs < 10.0, format!("TV {d:.4} over 64 sequences, {secs:.1}s"))
}

/// Law of the exactly-(m-1) colour set over the first ten events, both engines.
fn engine_coupling() -> anyhow::Result<Outcome> {
    let (m, n, steps) = (3u64, 2usize, 10u64);
    let initial = UrnState::head_start(m, n)?;
    let set = |counts: Vec<u64>| -> Vec<usize> {
        counts.iter().enumerate().skip(1).filter(|&(_, &c)| c == m - 1).map(|(k, _)| k).collect()
    };
    let seq =
        run_replicas(100_000, SEED, |_, s| run_sequential(&initial, 2.0, steps, s).map(|t| set(t.counts_first(10))));
    let race =
        run_replicas(100_000, SEED + 1, |_, s| rubin_race(&initial, 2.0, steps, s).map(|t| set(t.counts_first(10))));
    let seq = frequencies(seq.into_iter().collect::<Result<Vec<_>, _>>()?);
    let race = frequencies(race.into_iter().collect::<Result<Vec<_>, _>>()?);
    let d = tv(&seq, &race);
    let undecided =
        run_replicas(100_000, SEED + 2, |_, s| run_rubin(2.0, m, n, s).map(|c| !evaluate_outcome(&c, m).decided));
    let undecided = undecided.into_iter().collect::<Result<Vec<_>, _>>()?;
    let frac = undecided.iter().filter(|&&u| u).count() as f64 / undecided.len() as f64;
    ok(d <= 0.02 && frac < 0.01, format!("TV {d:.4}, undecided {frac:.5}"))
}

/// First selection from (1, 1) is a fair coin under both engines.
fn symmetry() -> anyhow::Result<Outcome> {
    let initial = UrnState::new(vec![1, 1])?;
    let first = |xs: Vec<warmlab::Result<warmlab::urn::UrnTrace>>| -> anyhow::Result<f64> {
        let xs = xs.into_iter().collect::<Result<Vec<_>, _>>()?;
        Ok(xs.iter().filter(|t| t.choices[0] == 0).count() as f64 / xs.len() as f64)
    };
    let seq = first(run_replicas(100_000, SEED, |_, s| run_sequential(&initial, 2.0, 1, s)))?;
    let race = first(run_replicas(100_000, SEED + 1, |_, s| rubin_race(&initial, 2.0, 1, s)))?;
    let pass = (seq - 0.5).abs() <= 0.006 && (race - 0.5).abs() <= 0.006;
    ok(pass, format!("sequential {seq:.4}, race {race:.4}"))
}

fn s_coverage() -> anyhow::Result<Outcome> {
    let start = Instant::now();
    let r = verify_p_s(2.0, 1000, 6.0, 10_000, SEED)?;
    let secs = start.elapsed().as_secs_f64();
    let c = &r.cells[0];
    let detail = format!(
        "coverage {:.4} [{:.4}, {:.4}], {secs:.1}s",
        c.values["cover_p_hat"], c.values["cover_ci_low"], c.values["cover_ci_high"]
    );
    ok(r.verdict == Verdict::Pass && secs < 30.0, detail)
}

fn simplex() -> anyhow::Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for x in [0.01, 0.05, 0.1] {
        let f = partial_sum_cdf(2.0, 2, x);
        let (lo, hi) = simplex_bounds(2.0, 2, x);
        pass &= lo - 1e-12 <= f && f <= hi + 1e-12;
        parts.push(format!("x={x}: {lo:.3e} <= {f:.3e} <= {hi:.3e}"));
    }
    ok(pass, parts.join("; "))
}

fn lemma_ss() -> anyhow::Result<Outcome> {
    let r = verify_lemma_ss(2.0, 5, 0.1, 0.2, 1_000_000, SEED)?;
    let margin = r.cells.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min);
    ok(r.verdict == Verdict::Pass, format!("margin {margin:.3e}"))
}

fn disconnect() -> anyhow::Result<Outcome> {
    let graph = build_tree(3, 3, 0.5)?;
    let candidates = disconnect_candidates(&graph);
    let results = run_replicas(10_000, SEED, |i, _| -> warmlab::Result<(u64, u64)> {
        let traj = simulate(&graph, &WarmConfig::new(2.0, 40.0, warmlab::rng::replica_key(SEED, i)))?;
        let (mut armed, mut violated) = (0, 0);
        for &v in &candidates {
            let c = check_disconnect(&graph, &traj, v)?;
            armed += u64::from(c.e1 && c.e2);
            violated += u64::from(c.violated);
        }
        Ok((armed, violated))
    });
    let (mut armed, mut violated) = (0, 0);
    for r in results {
        let (a, v) = r?;
        armed += a;
        violated += v;
    }
    ok(
        violated == 0 && armed > 0,
        format!("{} checks, {armed} with both conditions, {violated} violations", 10_000 * candidates.len()),
    )
}

fn oracle(
    graph: &Graph,
    report: &GoodnessReport,
    v: VertexId,
    nodes: &mut BTreeSet<VertexId>,
    edges: &mut BTreeSet<(VertexId, VertexId)>,
) {
    nodes.insert(v);
    for &k in &report.get(v).p_children {
        if let Some(&c) = graph.children(v).get(k - 1) {
            if report.get(c).tree_good {
                edges.insert((v, c));
                oracle(graph, report, c, nodes, edges);
            }
        }
    }
}

fn crystal() -> anyhow::Result<Outcome> {
    let mut src = Substream::derive(SEED, b"crystal", "acceptance");
    let mut mismatches = 0;
    let mut nonempty = 0;
    for _ in 0..1000 {
        let arity = 2 + (src.uniform() * 3.0) as u32;
        let depth = 1 + (src.uniform() * 4.0) as usize;
        let graph = build_tree(arity, depth, 0.5)?;
        let vertices = graph
            .vertices()
            .map(|v| VertexGoodness {
                name: graph.name(v),
                time_regular: true,
                time_good: true,
                polya_regular: true,
                polya_non_disturbing: true,
                polya_well_behaved: true,
                polya_good: true,
                tree_good: src.uniform() < 0.8,
                p_children: (1..=arity as usize).filter(|_| src.uniform() < 0.5).collect(),
                horizon_limited: false,
            })
            .collect();
        let report = GoodnessReport { vertices };
        let root = graph.root(0);
        let tree = build_crystal_tree(&graph, &report, root);
        let (mut nodes, mut edges) = (BTreeSet::new(), BTreeSet::new());
        if report.get(root).tree_good {
            oracle(&graph, &report, root, &mut nodes, &mut edges);
            nonempty += 1;
        }
        let got_nodes: BTreeSet<_> = tree.nodes.iter().copied().collect();
        let got_edges: BTreeSet<_> = tree.edges.iter().copied().collect();
        let bfs = tree.nodes.windows(2).all(|w| graph.vertex(w[0]).depth() <= graph.vertex(w[1]).depth());
        if got_nodes != nodes || got_edges != edges || got_nodes.len() != tree.nodes.len() || !bfs {
            mismatches += 1;
        }
    }
    ok(mismatches == 0, format!("{mismatches} mismatches over 1000 reports ({nonempty} non-empty)"))
}

fn warmlab(dir: &Path, args: &[&str]) -> anyhow::Result<(i32, String)> {
    let out = Command::new(env!("CARGO_BIN_EXE_warmlab")).current_dir(dir).args(args).output()?;
    Ok((out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned()))
}

fn replay() -> anyhow::Result<Outcome> {
    let d = tempfile::tempdir()?;
    let runs: [&[&str]; 5] = [
        &["params", "--alpha", "2", "--m", "2", "--n", "5", "--M", "41", "--eps", "0.5", "--q", "1e-4", "--c1", "0.5"],
        &["urn", "simulate", "--m", "10", "--replicas", "2000", "--seed", "7"],
        &["urn", "verify", "--prop", "p_LargeDev", "--replicas", "2000", "--seed", "7"],
        &["warm", "--replicas", "200", "--horizon", "50", "--seed", "7"],
        &["report", "r1", "r1"],
    ];
    let mut failures = Vec::new();
    for (i, args) in runs.iter().enumerate() {
        let out = format!("r{i}");
        let mut a = args.to_vec();
        a.extend(["--threads", "1", "--out", &out]);
        warmlab(d.path(), &a)?;
        let (code, text) =
            warmlab(d.path(), &["replay", "--manifest", &out, "--threads", "4", "--out", &format!("{out}-replay")])?;
        if code != 0 || !text.contains("identical") {
            failures.push(args[0]);
        }
    }
    ok(failures.is_empty(), format!("{} commands replayed with 1 vs 4 threads, differing: {failures:?}", runs.len()))
}

fn theorem1_trend() -> anyhow::Result<Outcome> {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for m in [10, 20, 30] {
        let r = run_theorem1(2.0, m, 1.0, 10_000, SEED, MIN_EXACT)?;
        pass &= r.undecided_fraction < 0.05;
        let e = &r.event;
        parts.push(format!(
            "m={m}: {:.4} [{:.4}, {:.4}] undecided {:.4}",
            e.p_hat, e.ci_low, e.ci_high, r.undecided_fraction
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    parts.push(format!("{secs:.1}s"));
    ok(pass && secs < 300.0, parts.join("; "))
}

fn negative_controls() -> anyhow::Result<Outcome> {
    let p = verify_p_delta(2.0, &[10, 20, 40], 0.0, 1.0, 0, SEED)?;
    let n = run_theorem1(2.0, 10, 1.0, 100, SEED, MIN_EXACT)?.n;
    let r = run_theorem1(2.0, 10, 1.0, 1000, SEED, n + 1)?;
    let pass = p.verdict == Verdict::Fail && r.event.successes == 0;
    ok(pass, format!("delta=0 verdict {:?}; min_exact=n+1 gives {}/{}", p.verdict, r.event.successes, r.event.trials))
}

fn main() {
    let criteria: [(&str, Criterion); 11] = [
        ("urn exactness from (2,1)", urn_exactness),
        ("race vs sequential coupling", engine_coupling),
        ("symmetric first selection", symmetry),
        ("S bracket coverage", s_coverage),
        ("simplex bounds", simplex),
        ("lemma s < s'", lemma_ss),
        ("disconnect never violated", disconnect),
        ("crystal tree vs recursive oracle", crystal),
        ("manifest replay across thread counts", replay),
        ("theorem pipeline m = 10, 20, 30", theorem1_trend),
        ("negative controls", negative_controls),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (pass, detail) = match f() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e:#}")),
        };
        failed += usize::from(!pass);
        println!("{} {:>2} {name}: {detail}", if pass { "PASS" } else { "FAIL" }, i + 1);
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
}
