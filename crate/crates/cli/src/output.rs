use std::time::Duration;

use rdfalign_core::eval::{aligned_edge_ratio, PrecisionReport, SideReport, SweepPoint};
use rdfalign_core::{Label, NodeId, NodeKey, Origin, TripleGraph};
use clap::ValueEnum;
use serde_json::{json, Value};

use crate::methods::{MethodResult, RunConfig};

fn sorted_rows<'a>(keys: &'a [NodeKey], pairs: &[(NodeId, NodeId, f64)]) -> Vec<(&'a str, &'a str, NodeId, NodeId, f64)> {
    let mut rows: Vec<_> = pairs.iter().map(|&(a, b, s)| (keys[a.index()].0.as_str(), keys[b.index()].0.as_str(), a, b, s)).collect();
    rows.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
    rows
}

/// One `src<TAB>tgt<TAB>sigma` line per pair, sorted by keys.
pub fn pairs_tsv(keys: &[NodeKey], pairs: &[(NodeId, NodeId, f64)]) -> String {
    let mut out = String::new();
    for (s, t, _, _, sigma) in sorted_rows(keys, pairs) {
        out.push_str(&format!("{s}\t{t}\t{sigma}\n"));
    }
    out
}

fn literal_text(g: &TripleGraph, n: NodeId) -> Option<String> {
    match g.label(n) {
        Label::Literal(l) => Some(l.full_text()),
        _ => None,
    }
}

pub fn pairs_json(g: &TripleGraph, keys: &[NodeKey], pairs: &[(NodeId, NodeId, f64)]) -> String {
    let rows: Vec<Value> = sorted_rows(keys, pairs)
        .into_iter()
        .map(|(s, t, a, b, sigma)| {
            let mut v = json!({ "source": s, "target": t, "sigma": sigma });
            if let Some(text) = literal_text(g, a) {
                v["source_text"] = json!(text);
            }
            if let Some(text) = literal_text(g, b) {
                v["target_text"] = json!(text);
            }
            v
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&json!({ "pairs": rows })).expect("json");
    text.push('\n');
    text
}

fn side_counts(g: &TripleGraph, origin: Origin) -> Value {
    let (uris, literals, blanks) = g.kind_counts(Some(origin));
    json!({ "uris": uris, "literals": literals, "blanks": blanks, "edges": g.triple_count_of(origin) })
}

/// Statistics for an alignment run, as pretty JSON.
pub fn stats_block(g: &TripleGraph, cfg: &RunConfig, result: &MethodResult, elapsed: Duration) -> String {
    let pairs: Vec<(NodeId, NodeId)> = result.pairs.iter().map(|&(a, b, _)| (a, b)).collect();
    let distinct = |f: fn(&(NodeId, NodeId)) -> NodeId| {
        let mut v: Vec<NodeId> = pairs.iter().map(f).collect();
        v.sort_unstable();
        v.dedup();
        v.len()
    };
    let mut source = side_counts(g, Origin::Source);
    source["aligned"] = json!(distinct(|p| p.0));
    let mut target = side_counts(g, Origin::Target);
    target["aligned"] = json!(distinct(|p| p.1));
    let v = json!({
        "method": cfg.method.to_possible_value().map(|v| v.get_name().to_string()),
        "theta": cfg.theta,
        "source": source,
        "target": target,
        "pairs": pairs.len(),
        "aligned_edge_ratio": aligned_edge_ratio(g, &pairs),
        "rounds": result.rounds,
        "hit_round_cap": result.hit_round_cap,
        "wall_ms": elapsed.as_secs_f64() * 1000.0,
    });
    let mut text = serde_json::to_string_pretty(&v).expect("json");
    text.push('\n');
    text
}

fn side_json(keys: &[NodeKey], r: &SideReport) -> Value {
    let names = |v: &[NodeId]| v.iter().map(|n| keys[n.index()].0.clone()).collect::<Vec<_>>();
    json!({
        "exact": names(&r.exact),
        "inclusive": names(&r.inclusive),
        "missing": names(&r.missing),
        "false": names(&r.false_matches),
    })
}

fn report_value(keys: &[NodeKey], r: &PrecisionReport, theta: Option<f64>, rounds: usize) -> Value {
    let c = r.source.counts();
    json!({
        "theta": theta,
        "rounds": rounds,
        "exact": c.exact,
        "inclusive": c.inclusive,
        "missing": c.missing,
        "false": c.false_matches,
        "target": r.target.counts(),
        "aligned_edge_ratio": r.aligned_edge_ratio,
        "nodes": { "source": side_json(keys, &r.source), "target": side_json(keys, &r.target) },
    })
}

/// Source-side counts at the top level, target-side counts and node lists below.
pub fn report_json(keys: &[NodeKey], r: &PrecisionReport, theta: Option<f64>, rounds: usize) -> String {
    let mut text = serde_json::to_string_pretty(&report_value(keys, r, theta, rounds)).expect("json");
    text.push('\n');
    text
}

pub fn sweep_json(keys: &[NodeKey], points: &[SweepPoint], best: Option<usize>) -> String {
    let reports: Vec<Value> = points.iter().map(|p| report_value(keys, &p.report, Some(p.theta), p.rounds)).collect();
    let v = json!({ "sweep": reports, "best_theta": best.map(|i| points[i].theta) });
    let mut text = serde_json::to_string_pretty(&v).expect("json");
    text.push('\n');
    text
}

pub fn graph_stats(g: &TripleGraph) -> String {
    let mut v = json!({ "source": side_counts(g, Origin::Source) });
    if g.count_of(Origin::Target) > 0 {
        v["target"] = side_counts(g, Origin::Target);
    }
    let mut text = serde_json::to_string_pretty(&v).expect("json");
    text.push('\n');
    text
}
