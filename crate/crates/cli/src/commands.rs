use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::Context;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use warmlab::analysis::{
    build_crystal_tree, check_disconnect, disconnect_candidates, goodness_report, gw_statistics, CrystalTree,
    UniformScope,
};
use warmlab::graph::{build_composite, build_tree, BlockSpec, Graph};
use warmlab::montecarlo::{
    run_replicas, run_theorem1, verify_lemma_ss, verify_p_delta, verify_p_growing, verify_p_large_dev, verify_p_s,
    verify_p_zincr, GrowingInputs, McEstimate, Outcome, PropositionReport, Verdict,
};
use warmlab::rng::replica_key;
use warmlab::urn::{evaluate_outcome, run_rubin, theorem1_event};
use warmlab::warm::{simulate, WarmConfig, DEFAULT_EVENT_CAP};
use warmlab::ParamSet;

use crate::manifest::{sha256_hex, Outputs};
use crate::settings::Settings;
use crate::{Command, Job, SimulateArgs, UrnAction, Usage, VerifyArgs, WarmArgs, EXIT_OK, EXIT_VALIDATION};

pub const PROPS: [&str; 6] = ["p_S", "p_Zincr", "p_LargeDev", "lemma_ss", "p_growing", "p_delta"];

/// `c1` for commands that need `s₋ > 0` at moderate `m`.
pub const URN_C1: f64 = 1.0;

/// The mergeable part of a run: named estimates under fixed parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatesFile {
    pub kind: String,
    pub params: BTreeMap<String, Value>,
    pub estimates: BTreeMap<String, McEstimate>,
    #[serde(default)]
    pub seeds: Vec<u64>,
}

pub fn dispatch(job: &Job, out: &mut Outputs, inputs: &mut BTreeMap<String, String>) -> anyhow::Result<u8> {
    let s = &job.settings;
    match &job.command {
        Command::Params => cmd_params(s, out),
        Command::Urn { action: UrnAction::Simulate(a) } => cmd_urn_simulate(s, a, out),
        Command::Urn { action: UrnAction::Verify(a) } => cmd_urn_verify(s, a, out),
        Command::Warm(a) => cmd_warm(s, a, job.blocks.as_deref(), out),
        Command::Report { inputs: paths } => cmd_report(paths, out, inputs),
        Command::Replay { .. } => Err(Usage("replay is not a job".into()).into()),
    }
}

fn usage(e: warmlab::Error) -> anyhow::Error {
    match e {
        warmlab::Error::EventCap { .. } => e.into(),
        other => Usage(other.to_string()).into(),
    }
}

fn cmd_params(s: &Settings, out: &mut Outputs) -> anyhow::Result<u8> {
    let p = s.param_set()?;
    let violations = p.validate();
    let mut text = String::new();
    for (k, v) in p.table() {
        writeln!(text, "{k:<8} {v}")?;
    }
    if violations.is_empty() {
        text.push_str("ok\n");
    } else {
        let names: Vec<&str> = violations.iter().map(|c| c.name()).collect();
        writeln!(text, "violated: {}", names.join(", "))?;
    }
    print!("{text}");
    out.write("params.toml", p.to_config_string())?;
    out.write("params.txt", &text)?;
    Ok(if violations.is_empty() { EXIT_OK } else { EXIT_VALIDATION })
}

fn cmd_urn_simulate(s: &Settings, a: &SimulateArgs, out: &mut Outputs) -> anyhow::Result<u8> {
    let alpha = s.alpha();
    let m = s.require(s.m, "m")?;
    let (replicas, seed) = (s.replicas(), s.seed());
    let file = if a.explicit {
        let n = s.require(s.n, "n")? as usize;
        let outcomes =
            run_replicas(replicas, seed, |_, src| run_rubin(alpha, m, n, src).map(|c| evaluate_outcome(&c, m)))
                .into_iter()
                .collect::<warmlab::Result<Vec<_>>>()
                .map_err(usage)?;
        let mut lines = String::new();
        for o in &outcomes {
            lines.push_str(&o.to_json_line()?);
            lines.push('\n');
        }
        out.write("outcomes.jsonl", lines)?;
        let tally = |f: &dyn Fn(&warmlab::urn::PolyaOutcome) -> Outcome| {
            let (mut succ, mut und) = (0, 0);
            for o in &outcomes {
                match f(o) {
                    Outcome::Success => succ += 1,
                    Outcome::Undecided => und += 1,
                    Outcome::Failure => {}
                }
            }
            McEstimate::from_counts(succ, replicas, und, seed)
        };
        let decided = |o: &warmlab::urn::PolyaOutcome, b: bool| if o.decided { b.into() } else { Outcome::Undecided };
        let mut est = BTreeMap::new();
        est.insert(
            "event".into(),
            tally(&|o| match theorem1_event(o) {
                Ok(b) => decided(o, b && o.exact_m_minus_1.len() as u128 >= a.min_exact),
                Err(_) => Outcome::Undecided,
            })?,
        );
        est.insert("only_zero_exceeds".into(), tally(&|o| decided(o, o.only_zero_exceeds))?);
        est.insert("exact_at_least".into(), tally(&|o| decided(o, o.exact_m_minus_1.len() as u128 >= a.min_exact))?);
        EstimatesFile {
            kind: "urn-explicit".into(),
            params: BTreeMap::from([
                ("alpha".into(), json!(alpha)),
                ("m".into(), json!(m)),
                ("n".into(), json!(n)),
                ("min_exact".into(), json!(a.min_exact.to_string())),
            ]),
            estimates: est,
            seeds: vec![seed],
        }
    } else {
        let c1 = s.c1.unwrap_or(URN_C1);
        let rep = run_theorem1(alpha, m, c1, replicas, seed, a.min_exact).map_err(usage)?;
        out.write("outcomes.jsonl", rep.outcomes_jsonl()?)?;
        out.write("summary.json", rep.to_json()? + "\n")?;
        let text = format!("{rep}\n");
        print!("{text}");
        out.write("summary.txt", text)?;
        EstimatesFile {
            kind: "urn-pipeline".into(),
            params: BTreeMap::from([
                ("alpha".into(), json!(alpha)),
                ("m".into(), json!(m)),
                ("c1".into(), json!(c1)),
                ("n".into(), json!(rep.n.to_string())),
                ("min_exact".into(), json!(a.min_exact.to_string())),
            ]),
            estimates: BTreeMap::from([
                ("event".into(), rep.event.clone()),
                ("only_zero_exceeds".into(), rep.only_zero_exceeds.clone()),
                ("exact_at_least".into(), rep.exact_at_least.clone()),
            ]),
            seeds: vec![seed],
        }
    };
    write_estimates(out, &file)?;
    Ok(EXIT_OK)
}

fn cmd_urn_verify(s: &Settings, a: &VerifyArgs, out: &mut Outputs) -> anyhow::Result<u8> {
    let alpha = s.alpha();
    let (replicas, seed) = (s.replicas(), s.seed());
    let samples = a.samples.unwrap_or(0);
    let m_grid = |default: &[u64]| if a.m_grid.is_empty() { default.to_vec() } else { a.m_grid.clone() };
    let report: PropositionReport = match a.prop.as_str() {
        "p_S" => verify_p_s(alpha, s.require(s.m, "m")?, s.c1.unwrap_or(warmlab::params::DEFAULT_C1), replicas, seed),
        "p_Zincr" => {
            verify_p_zincr(alpha, s.require(s.m, "m")?, s.c1.unwrap_or(URN_C1), a.grid.unwrap_or(101), samples, seed)
        }
        "p_LargeDev" => verify_p_large_dev(alpha, &m_grid(&[1, 2, 4, 8, 16, 32, 64]), replicas, seed),
        "lemma_ss" => verify_lemma_ss(
            alpha,
            s.require(s.m, "m")?,
            s.require(a.s, "s")?,
            s.require(a.s_prime, "s-prime")?,
            replicas,
            seed,
        ),
        "p_growing" => verify_p_growing(&GrowingInputs {
            alpha,
            m: s.require(s.m, "m")?,
            beta: a.beta.unwrap_or(0.5 * (alpha - 1.0) / alpha),
            c1: s.c1.unwrap_or(URN_C1),
            grid: a.grid.unwrap_or(16),
            xs: if a.xs.is_empty() { vec![0.01, 0.05, 0.1] } else { a.xs.clone() },
            samples,
            seed,
        }),
        "p_delta" => verify_p_delta(
            alpha,
            &m_grid(&[10, 20, 40]),
            a.delta.unwrap_or((alpha - 1.0) / (20.0 * 2f64.powf(alpha))),
            s.c1.unwrap_or(URN_C1),
            samples,
            seed,
        ),
        other => {
            return Err(Usage(format!("unknown proposition `{other}`; expected one of {}", PROPS.join(", "))).into())
        }
    }
    .map_err(usage)?;
    let text = report.to_string();
    print!("{text}");
    out.write("report.json", report.to_json()? + "\n")?;
    out.write("report.txt", text)?;
    Ok(if report.verdict == Verdict::Fail { EXIT_VALIDATION } else { EXIT_OK })
}

struct ReplicaRow {
    events: usize,
    candidates: usize,
    violations: usize,
    root_tree_good: Option<bool>,
    tree_good: Option<usize>,
    crystal: Option<CrystalTree>,
    files: Vec<(String, String)>,
}

fn cmd_warm(s: &Settings, a: &WarmArgs, blocks: Option<&[BlockSpec]>, out: &mut Outputs) -> anyhow::Result<u8> {
    let alpha = s.alpha();
    let horizon = s.horizon.unwrap_or(100.0);
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Usage(format!("horizon must be positive, got {horizon}")).into());
    }
    let blocks: Vec<BlockSpec> = match blocks {
        Some(b) => b.to_vec(),
        None => vec![BlockSpec { arity: s.n.unwrap_or(2) as u32, depth: s.depth.unwrap_or(3), q: s.q.unwrap_or(0.1) }],
    };
    let graph: Graph = if blocks.len() == 1 {
        build_tree(blocks[0].arity, blocks[0].depth, blocks[0].q)
    } else {
        build_composite(&blocks)
    }
    .map_err(usage)?;

    // The goodness ledger needs m, M and eps, and a single arity.
    let params: Option<ParamSet> = match (s.m, s.big_m, s.eps) {
        (Some(m), Some(big_m), Some(eps)) => {
            let arity = blocks[0].arity;
            if blocks.iter().any(|b| b.arity != arity) {
                return Err(Usage("the goodness ledger needs blocks of one arity".into()).into());
            }
            let inputs = warmlab::ParamInputs {
                alpha,
                m,
                n: arity as u64,
                big_m,
                eps,
                q: blocks[0].q,
                c1: s.c1.unwrap_or(warmlab::params::DEFAULT_C1),
            };
            Some(ParamSet::derive(&inputs).map_err(usage)?)
        }
        (None, None, None) => None,
        _ => return Err(Usage("the goodness ledger needs all of --m, --M and --eps".into()).into()),
    };
    let scope = params.as_ref().map(|p| UniformScope::Stream { limit: a.uniform_limit.unwrap_or(p.mprime) });
    let candidates = disconnect_candidates(&graph);
    let (replicas, seed) = (s.replicas.unwrap_or(100), s.seed());
    let cap = a.event_cap.unwrap_or(DEFAULT_EVENT_CAP);

    let rows = run_replicas(replicas, seed, |i, _| -> warmlab::Result<ReplicaRow> {
        let cfg = WarmConfig { alpha, horizon, seed: replica_key(seed, i), record_uniforms: true, event_cap: cap };
        let traj = simulate(&graph, &cfg)?;
        let mut violations = 0;
        for &v in &candidates {
            violations += check_disconnect(&graph, &traj, v)?.violated as usize;
        }
        let mut files = Vec::new();
        let keep = i < a.keep_csv;
        if keep {
            files.push((format!("trajectories/replica_{i:05}_events.csv"), traj.events_csv(&graph)));
            files.push((format!("trajectories/replica_{i:05}_tallies.csv"), traj.tallies_csv(&graph)));
        }
        let (mut root_tree_good, mut tree_good, mut crystal) = (None, None, None);
        if let (Some(p), Some(scope)) = (&params, scope) {
            let rep = goodness_report(&graph, &traj, p, scope)?;
            let root = graph.root(0);
            root_tree_good = Some(rep.get(root).tree_good);
            tree_good = Some(rep.vertices.iter().filter(|g| g.tree_good).count());
            let tree = build_crystal_tree(&graph, &rep, root);
            if keep {
                files.push((format!("goodness/replica_{i:05}.json"), rep.to_json()? + "\n"));
            }
            crystal = Some(tree);
        }
        Ok(ReplicaRow {
            events: traj.events.len(),
            candidates: candidates.len(),
            violations,
            root_tree_good,
            tree_good,
            crystal,
            files,
        })
    })
    .into_iter()
    .collect::<warmlab::Result<Vec<_>>>()
    .map_err(usage)?;

    let mut table = String::from("replica,seed,events,disconnect_candidates,disconnect_violations,root_tree_good,tree_good_vertices,crystal_nodes\n");
    let opt = |x: Option<String>| x.unwrap_or_default();
    for (i, r) in rows.iter().enumerate() {
        writeln!(
            table,
            "{i},{},{},{},{},{},{},{}",
            replica_key(seed, i as u64),
            r.events,
            r.candidates,
            r.violations,
            opt(r.root_tree_good.map(|b| b.to_string())),
            opt(r.tree_good.map(|n| n.to_string())),
            opt(r.crystal.as_ref().map(|c| c.nodes.len().to_string())),
        )?;
        for (name, data) in &r.files {
            out.write(name, data)?;
        }
    }
    out.write("replicas.csv", table)?;
    out.write("graph.txt", graph.to_adjacency())?;

    let clean = rows.iter().filter(|r| r.violations == 0).count() as u64;
    let mut estimates =
        BTreeMap::from([("disconnect_clean".to_string(), McEstimate::from_counts(clean, replicas, 0, seed)?)]);
    let mut summary = json!({
        "vertices": graph.vertex_count(),
        "edges": graph.edge_count(),
        "horizon": horizon,
        "replicas": replicas,
        "events_total": rows.iter().map(|r| r.events as u64).sum::<u64>(),
        "disconnect_violations": rows.iter().map(|r| r.violations as u64).sum::<u64>(),
    });
    if let Some(p) = &params {
        let good = rows.iter().filter(|r| r.root_tree_good == Some(true)).count() as u64;
        estimates.insert("root_tree_good".into(), McEstimate::from_counts(good, replicas, 0, seed)?);
        let trees: Vec<CrystalTree> = rows.into_iter().filter_map(|r| r.crystal).collect();
        let gw = gw_statistics(&trees);
        out.write("gw_histogram.csv", gw.histogram_csv())?;
        summary["params"] = serde_json::to_value(p)?;
        summary["gw"] = serde_json::to_value(&gw)?;
    }
    summary["estimates"] = serde_json::to_value(&estimates)?;
    out.write("summary.json", serde_json::to_string_pretty(&summary)? + "\n")?;

    let mut params_key = BTreeMap::from([
        ("alpha".to_string(), json!(alpha)),
        ("horizon".to_string(), json!(horizon)),
        ("blocks".to_string(), serde_json::to_value(&blocks)?),
    ]);
    if let Some(p) = &params {
        params_key.insert("m".into(), json!(p.m));
        params_key.insert("M".into(), json!(p.big_m));
        params_key.insert("eps".into(), json!(p.eps));
    }
    let file = EstimatesFile { kind: "warm".into(), params: params_key, estimates, seeds: vec![seed] };
    let mut text = String::new();
    writeln!(text, "WARM on {} vertices, horizon {horizon}, {replicas} replicas", graph.vertex_count())?;
    write_estimate_lines(&mut text, &file.estimates)?;
    print!("{text}");
    write_estimates(out, &file)?;
    Ok(EXIT_OK)
}

fn write_estimates(out: &mut Outputs, f: &EstimatesFile) -> anyhow::Result<()> {
    out.write("estimates.json", serde_json::to_string_pretty(f)? + "\n")
}

fn write_estimate_lines(text: &mut String, est: &BTreeMap<String, McEstimate>) -> anyhow::Result<()> {
    for (k, e) in est {
        writeln!(
            text,
            "  {k:<20} {:.4} [{:.4}, {:.4}]  {}/{} decided of {}",
            e.p_hat,
            e.ci_low,
            e.ci_high,
            e.successes,
            e.decided(),
            e.trials
        )?;
    }
    Ok(())
}

fn cmd_report(paths: &[PathBuf], out: &mut Outputs, inputs: &mut BTreeMap<String, String>) -> anyhow::Result<u8> {
    if paths.is_empty() {
        return Err(Usage("report needs at least one input".into()).into());
    }
    let mut files = Vec::new();
    for p in paths {
        let path = if p.is_dir() { p.join("estimates.json") } else { p.clone() };
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("reading {}", path.display()))
            .map_err(|e| Usage(format!("{e:#}")))?;
        inputs.insert(path.display().to_string(), sha256_hex(text.as_bytes()));
        let f: EstimatesFile = serde_json::from_str(&text).map_err(|e| Usage(format!("{}: {e}", path.display())))?;
        files.push((path, f));
    }
    let (first_path, first) = &files[0];
    for (path, f) in &files[1..] {
        let mut diff = Vec::new();
        if f.kind != first.kind {
            diff.push(format!("  kind: {} vs {}", first.kind, f.kind));
        }
        let keys: BTreeSet<&String> = first.params.keys().chain(f.params.keys()).collect();
        for k in keys {
            let (a, b) = (first.params.get(k), f.params.get(k));
            if a != b {
                let show = |v: Option<&Value>| v.map_or("<absent>".to_string(), |v| v.to_string());
                diff.push(format!("  {k}: {} vs {}", show(a), show(b)));
            }
        }
        let names_a: BTreeSet<&String> = first.estimates.keys().collect();
        let names_b: BTreeSet<&String> = f.estimates.keys().collect();
        if names_a != names_b {
            diff.push(format!("  estimates: {names_a:?} vs {names_b:?}"));
        }
        if !diff.is_empty() {
            return Err(Usage(format!(
                "refusing to merge {} with {}:\n{}",
                first_path.display(),
                path.display(),
                diff.join("\n")
            ))
            .into());
        }
    }
    let mut merged = first.clone();
    for (_, f) in &files[1..] {
        for (k, e) in merged.estimates.iter_mut() {
            *e = e.merge(&f.estimates[k])?;
        }
        merged.seeds.extend(&f.seeds);
    }
    let mut text = String::new();
    writeln!(text, "{} runs of {} merged", files.len(), merged.kind)?;
    for (k, v) in &merged.params {
        writeln!(text, "  {k} = {v}")?;
    }
    write_estimate_lines(&mut text, &merged.estimates)?;
    let distinct: BTreeSet<u64> = merged.seeds.iter().copied().collect();
    if distinct.len() < merged.seeds.len() {
        writeln!(text, "  warning: some inputs share a seed, so their replicas coincide")?;
    }
    print!("{text}");
    let mut csv = String::from("estimate,successes,trials,undecided,p_hat,ci_low,ci_high\n");
    for (k, e) in &merged.estimates {
        writeln!(csv, "{k},{},{},{},{},{},{}", e.successes, e.trials, e.undecided, e.p_hat, e.ci_low, e.ci_high)?;
    }
    out.write("merged.json", serde_json::to_string_pretty(&merged)? + "\n")?;
    out.write("merged.csv", csv)?;
    out.write("merged.txt", text)?;
    Ok(EXIT_OK)
}
