//! File formats: observation records, aggregated tallies, networks,
//! fitted-parameter reports, posterior edge lists, fit traces, and DOT
//! export.
//!
//! All text formats are tab-separated with `#`-prefixed header or comment
//! lines, and every writer emits bytes that depend only on its inputs, so
//! identical runs produce identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::em::EmConfig;
use crate::error::{Error, Result};
use crate::params::{ModelId, ModelParams};
use crate::posterior::EdgePosterior;
use crate::types::{
    build_multimodal, build_tallies, canonical_pair, cells, MeasurementTally, ModeTallyEntry,
    MultimodalTally, Network, NodeIndex, TallyData, TallyEntry,
};

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io_at(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io_at(path, e))
}

/// Lines of a file that carry data: trimmed, non-empty, not comments.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(no, l)| (no + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
}

fn parse_count(field: &str, what: &str, path: &Path, line: usize) -> Result<u32> {
    field
        .parse::<u32>()
        .map_err(|_| parse_err(path, line, format!("bad {what} {field:?}")))
}

/// Reads raw observation records, one check per line: `i<TAB>j<TAB>outcome`
/// with outcome 0 or 1. Blank lines and `#` comments are skipped.
pub fn read_records(path: &Path, directed: bool) -> Result<MeasurementTally> {
    let text = read_text(path)?;
    let mut records = Vec::new();
    for (no, line) in data_lines(&text) {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(parse_err(
                path,
                no,
                format!("expected 3 tab-separated fields, got {}", fields.len()),
            ));
        }
        let outcome = parse_count(fields[2], "outcome", path, no)?;
        if outcome > 1 {
            return Err(parse_err(path, no, format!("outcome {outcome} is not 0 or 1")));
        }
        records.push((fields[0].to_string(), fields[1].to_string(), outcome as u8));
    }
    build_tallies(&records, directed)
}

/// Reads multimodal observation records: `i<TAB>j<TAB>mode<TAB>outcome`.
pub fn read_multimodal_records(path: &Path) -> Result<MultimodalTally> {
    let text = read_text(path)?;
    let mut records = Vec::new();
    for (no, line) in data_lines(&text) {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(parse_err(
                path,
                no,
                format!("expected 4 tab-separated fields, got {}", fields.len()),
            ));
        }
        let outcome = parse_count(fields[3], "outcome", path, no)?;
        if outcome > 1 {
            return Err(parse_err(path, no, format!("outcome {outcome} is not 0 or 1")));
        }
        records.push((
            fields[0].to_string(),
            fields[1].to_string(),
            fields[2].to_string(),
            outcome as u8,
        ));
    }
    build_multimodal(&records)
}

/// Writes an aggregated tally. Single-mode header: `#tally<TAB>directed`
/// or `#tally<TAB>undirected`, rows `i<TAB>j<TAB>trials<TAB>positives`.
/// Multimodal header: `#tally-modes` plus a `#modes` line fixing the mode
/// order, rows carry a mode column.
pub fn write_tally(path: &Path, data: &TallyData) -> Result<()> {
    let mut out = String::new();
    match data {
        TallyData::Single(t) => {
            let dir = if t.directed() { "directed" } else { "undirected" };
            writeln!(out, "#tally\t{dir}").unwrap();
            writeln!(out, "#nodes\t{}", t.index().labels().join("\t")).unwrap();
            for e in t.entries() {
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}",
                    t.index().label(e.i),
                    t.index().label(e.j),
                    e.trials,
                    e.positives
                )
                .unwrap();
            }
        }
        TallyData::Modes(t) => {
            writeln!(out, "#tally-modes").unwrap();
            writeln!(out, "#nodes\t{}", t.index().labels().join("\t")).unwrap();
            writeln!(out, "#modes\t{}", t.modes().join("\t")).unwrap();
            for e in t.entries() {
                for (m, mode) in t.modes().iter().enumerate() {
                    if e.trials[m] == 0 && e.positives[m] == 0 {
                        continue;
                    }
                    writeln!(
                        out,
                        "{}\t{}\t{}\t{}\t{}",
                        t.index().label(e.i),
                        t.index().label(e.j),
                        mode,
                        e.trials[m],
                        e.positives[m]
                    )
                    .unwrap();
                }
            }
        }
    }
    write_text(path, &out)
}

/// Reads aggregated pair counts with no header: `i<TAB>j<TAB>trials<TAB>positives`
/// rows, `#` comments and blank lines skipped. Rows naming the same pair are
/// summed, after orientation is dropped for undirected data.
pub fn read_counts(path: &Path, directed: bool) -> Result<MeasurementTally> {
    let text = read_text(path)?;
    let mut index = NodeIndex::new();
    let mut order: Vec<(u32, u32)> = Vec::new();
    let mut sums: std::collections::HashMap<(u32, u32), (u64, u64)> =
        std::collections::HashMap::new();
    for (no, line) in data_lines(&text) {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(parse_err(
                path,
                no,
                format!("expected 4 tab-separated fields, got {}", fields.len()),
            ));
        }
        let i = index.intern(fields[0]);
        let j = index.intern(fields[1]);
        if i == j {
            return Err(parse_err(path, no, format!("self-pair {:?}", fields[0])));
        }
        let trials = parse_count(fields[2], "trial count", path, no)?;
        let positives = parse_count(fields[3], "positive count", path, no)?;
        if positives > trials {
            return Err(parse_err(
                path,
                no,
                format!("{positives} positives out of {trials} trials"),
            ));
        }
        let key = canonical_pair(i, j, directed);
        let slot = sums.entry(key).or_insert_with(|| {
            order.push(key);
            (0, 0)
        });
        slot.0 += u64::from(trials);
        slot.1 += u64::from(positives);
    }
    let mut entries = Vec::with_capacity(order.len());
    for key in order {
        let (trials, positives) = sums[&key];
        let (trials, positives) = (
            u32::try_from(trials).map_err(|_| {
                Error::InvalidInput(format!("trial count for a pair exceeds {}", u32::MAX))
            })?,
            u32::try_from(positives).unwrap_or(u32::MAX),
        );
        entries.push(TallyEntry {
            i: key.0,
            j: key.1,
            trials,
            positives,
        });
    }
    MeasurementTally::from_entries(index, directed, entries)
}

/// Reads measurement data whose format is detected from the first
/// non-blank line: a `#tally` or `#tally-modes` header selects
/// [`read_tally`], anything else is treated as bare counts for
/// [`read_counts`].
pub fn read_tally_or_counts(path: &Path, directed: bool) -> Result<TallyData> {
    let text = read_text(path)?;
    let head = text
        .lines()
        .map(|l| l.trim_end_matches('\r'))
        .find(|l| !l.trim().is_empty());
    match head {
        Some(l) if l.starts_with("#tally") => read_tally(path),
        _ => Ok(TallyData::Single(read_counts(path, directed)?)),
    }
}

/// Reads a tally written by [`write_tally`].
pub fn read_tally(path: &Path) -> Result<TallyData> {
    let text = read_text(path)?;
    let mut lines = text.lines().enumerate().map(|(no, l)| (no + 1, l.trim_end_matches('\r')));
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "empty tally file"))?;
    let header_fields: Vec<&str> = header.split('\t').collect();
    let mut index = NodeIndex::new();
    let mut node_header = false;
    let mut modes_header: Option<Vec<String>> = None;
    let rest: Vec<(usize, &str)> = lines
        .filter(|(_, l)| !l.trim().is_empty())
        .collect();
    let mut body = Vec::new();
    for (no, line) in rest {
        if let Some(names) = line.strip_prefix("#nodes\t") {
            for name in names.split('\t') {
                index.intern(name);
            }
            node_header = true;
        } else if let Some(names) = line.strip_prefix("#modes\t") {
            modes_header = Some(names.split('\t').map(str::to_string).collect());
        } else if !line.trim_start().starts_with('#') {
            body.push((no, line));
        }
    }
    match header_fields.as_slice() {
        ["#tally", dir @ ("directed" | "undirected")] => {
            let directed = *dir == "directed";
            let mut entries: Vec<TallyEntry> = Vec::new();
            for (no, line) in body {
                let fields: Vec<&str> = line.split('\t').collect();
                if fields.len() != 4 {
                    return Err(parse_err(
                        path,
                        no,
                        format!("expected 4 tab-separated fields, got {}", fields.len()),
                    ));
                }
                let i = intern_checked(&mut index, fields[0], node_header, path, no)?;
                let j = intern_checked(&mut index, fields[1], node_header, path, no)?;
                entries.push(TallyEntry {
                    i,
                    j,
                    trials: parse_count(fields[2], "trial count", path, no)?,
                    positives: parse_count(fields[3], "positive count", path, no)?,
                });
            }
            Ok(TallyData::Single(MeasurementTally::from_entries(
                index, directed, entries,
            )?))
        }
        ["#tally-modes"] => {
            let mode_header = modes_header.is_some();
            let mut modes: Vec<String> = modes_header.unwrap_or_default();
            let mut raw: Vec<(u32, u32, usize, u32, u32)> = Vec::new();
            for (no, line) in body {
                let fields: Vec<&str> = line.split('\t').collect();
                if fields.len() != 5 {
                    return Err(parse_err(
                        path,
                        no,
                        format!("expected 5 tab-separated fields, got {}", fields.len()),
                    ));
                }
                let i = intern_checked(&mut index, fields[0], node_header, path, no)?;
                let j = intern_checked(&mut index, fields[1], node_header, path, no)?;
                let m = match modes.iter().position(|m| m == fields[2]) {
                    Some(m) => m,
                    None if mode_header => {
                        return Err(parse_err(
                            path,
                            no,
                            format!("mode {:?} not in #modes header", fields[2]),
                        ))
                    }
                    None => {
                        modes.push(fields[2].to_string());
                        modes.len() - 1
                    }
                };
                raw.push((
                    i,
                    j,
                    m,
                    parse_count(fields[3], "trial count", path, no)?,
                    parse_count(fields[4], "positive count", path, no)?,
                ));
            }
            let n_modes = modes.len().max(1);
            let mut map: std::collections::BTreeMap<(u32, u32), ModeTallyEntry> =
                std::collections::BTreeMap::new();
            for (i, j, m, trials, positives) in raw {
                let e = map.entry((i, j)).or_insert_with(|| ModeTallyEntry {
                    i,
                    j,
                    trials: vec![0; n_modes],
                    positives: vec![0; n_modes],
                });
                e.trials[m] += trials;
                e.positives[m] += positives;
            }
            if modes.is_empty() {
                modes.push("m0".to_string());
            }
            Ok(TallyData::Modes(MultimodalTally::from_entries(
                index,
                modes,
                map.into_values().collect(),
            )?))
        }
        _ => Err(parse_err(
            path,
            1,
            "expected a '#tally<TAB>directed', '#tally<TAB>undirected' or '#tally-modes' header",
        )),
    }
}

fn intern_checked(
    index: &mut NodeIndex,
    label: &str,
    node_header: bool,
    path: &Path,
    line: usize,
) -> Result<u32> {
    if node_header {
        index
            .id(label)
            .ok_or_else(|| parse_err(path, line, format!("node {label:?} not in #nodes header")))
    } else {
        Ok(index.intern(label))
    }
}

/// Writes a network: header with directedness and the full node list,
/// then `i<TAB>j<TAB>value` rows. A diagonal row gives the number of
/// self-loops at that node.
pub fn write_network(path: &Path, g: &Network, index: &NodeIndex) -> Result<()> {
    if index.len() != g.n() {
        return Err(Error::InvalidInput(format!(
            "index has {} labels for {} nodes",
            index.len(),
            g.n()
        )));
    }
    let mut out = String::new();
    let dir = if g.directed() { "directed" } else { "undirected" };
    writeln!(out, "#network\t{dir}").unwrap();
    writeln!(out, "#nodes\t{}", index.labels().join("\t")).unwrap();
    for (i, j, v) in g.entries() {
        let shown = if i == j { v / 2 } else { v };
        writeln!(out, "{}\t{}\t{}", index.label(i), index.label(j), shown).unwrap();
    }
    write_text(path, &out)
}

/// Reads a network written by [`write_network`].
pub fn read_network(path: &Path) -> Result<(Network, NodeIndex)> {
    let text = read_text(path)?;
    let mut first = None;
    let mut index = NodeIndex::new();
    let mut rows = Vec::new();
    for (no, line) in text
        .lines()
        .enumerate()
        .map(|(no, l)| (no + 1, l.trim_end_matches('\r')))
    {
        if line.trim().is_empty() {
            continue;
        }
        if first.is_none() {
            first = Some((no, line.to_string()));
            continue;
        }
        if let Some(names) = line.strip_prefix("#nodes\t") {
            for name in names.split('\t') {
                index.intern(name);
            }
        } else if !line.trim_start().starts_with('#') {
            rows.push((no, line.to_string()));
        }
    }
    let (hno, header) = first.ok_or_else(|| parse_err(path, 1, "empty network file"))?;
    let directed = match header.split('\t').collect::<Vec<_>>().as_slice() {
        ["#network", "directed"] => true,
        ["#network", "undirected"] => false,
        _ => {
            return Err(parse_err(
                path,
                hno,
                "expected a '#network<TAB>directed' or '#network<TAB>undirected' header",
            ))
        }
    };
    if index.is_empty() {
        return Err(parse_err(path, hno, "missing '#nodes' header"));
    }
    let mut g = Network::empty(index.len(), directed);
    for (no, line) in rows {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(parse_err(
                path,
                no,
                format!("expected 3 tab-separated fields, got {}", fields.len()),
            ));
        }
        let i = index
            .id(fields[0])
            .ok_or_else(|| parse_err(path, no, format!("node {:?} not in #nodes header", fields[0])))?;
        let j = index
            .id(fields[1])
            .ok_or_else(|| parse_err(path, no, format!("node {:?} not in #nodes header", fields[1])))?;
        let v = parse_count(fields[2], "value", path, no)?;
        if i == j {
            g.set_self_loops(i, v);
        } else {
            g.set_pair(i, j, v);
        }
    }
    Ok((g, index))
}

/// A fitted model as written to disk: the parameters, rates derived from
/// them, fit diagnostics, and enough provenance to rerun the fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub model: ModelId,
    pub params: ModelParams,
    /// Node labels in id order; propensity and report rows align with it.
    pub nodes: Vec<String>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub restart: usize,
    pub notes: Vec<String>,
    /// Per-mode probability that a single positive check is wrong, for the
    /// models with a present/absent error channel.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub false_discovery_rate: Option<Vec<f64>>,
    /// Per-reporter precision of positive claims, for the per-node model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reporter_precision: Option<Vec<Option<f64>>>,
    /// Path of the measurement data the fit ran on.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    /// The engine configuration, seed included.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<EmConfig>,
}

/// Writes a fit report as pretty JSON.
pub fn write_report(path: &Path, report: &FitReport) -> Result<()> {
    if report.model != report.params.model_id() {
        return Err(Error::InvalidInput(format!(
            "report says model {} but carries {} parameters",
            report.model,
            report.params.model_id()
        )));
    }
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    write_text(path, &text)
}

/// Reads parameters from either a full [`FitReport`] or a bare
/// [`ModelParams`] JSON document.
pub fn read_params(path: &Path) -> Result<(ModelParams, Option<Vec<String>>)> {
    let text = read_text(path)?;
    if let Ok(report) = serde_json::from_str::<FitReport>(&text) {
        return Ok((report.params, Some(report.nodes)));
    }
    let params: ModelParams = serde_json::from_str(&text)?;
    Ok((params, None))
}

/// Writes the posterior as an edge list: `source<TAB>target<TAB>q` where
/// `q` is the probability of any connection. Rows are the measured pairs
/// with `q >= qmin` in `(i, j)` order; `qmin = 0` lists every measured
/// pair. Unmeasured pairs are summarized by one trailing comment line with
/// their count and shared implicit probability, or the range it spans when
/// node propensities make it vary.
pub fn write_edges(path: &Path, post: &EdgePosterior, qmin: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&qmin) {
        return Err(Error::InvalidInput(format!("qmin {qmin} outside [0, 1]")));
    }
    let mut out = String::new();
    writeln!(out, "source\ttarget\tq").unwrap();
    let index = post.index();
    for (i, j, q) in post.stored() {
        if q >= qmin {
            writeln!(out, "{}\t{}\t{}", index.label(i), index.label(j), q).unwrap();
        }
    }
    let rest = post.cell_count() - post.stored_len();
    if rest > 0 {
        if post.implicit_is_constant() {
            let (i, j) = post.unmeasured().next().unwrap();
            writeln!(out, "#unmeasured\t{rest}\t{}", post.edge_prob(i, j)).unwrap();
        } else {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for (i, j) in post.unmeasured() {
                let q = post.edge_prob(i, j);
                lo = lo.min(q);
                hi = hi.max(q);
            }
            writeln!(out, "#unmeasured\t{rest}\t{lo}..{hi}").unwrap();
        }
    }
    write_text(path, &out)
}

/// Writes the objective trace: `iteration<TAB>objective`, iteration 0
/// being the freshly initialized parameters.
pub fn write_trace(path: &Path, trace: &[f64]) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "iteration\tobjective").unwrap();
    for (it, v) in trace.iter().enumerate() {
        writeln!(out, "{it}\t{v}").unwrap();
    }
    write_text(path, &out)
}

fn dot_escape(label: &str) -> String {
    label.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Writes a Graphviz view of the posterior: an edge for each pair whose
/// connection probability reaches `threshold`, with pen width proportional
/// to that probability, and node sizes proportional to the propensities
/// when given. Nodes with no drawn edge are omitted, unless nothing at all
/// clears the threshold, in which case the bare nodes are kept.
pub fn write_dot(
    path: &Path,
    post: &EdgePosterior,
    threshold: f64,
    propensity: Option<&[f64]>,
) -> Result<()> {
    if let Some(phi) = propensity {
        if phi.len() != post.n() {
            return Err(Error::InvalidInput(format!(
                "{} propensities for {} nodes",
                phi.len(),
                post.n()
            )));
        }
    }
    let index = post.index();
    let mut row = Vec::new();
    let mut drawn: Vec<(u32, u32, f64)> = Vec::new();
    for (i, j) in cells(post.n(), post.directed()) {
        post.value_dist(i, j, &mut row);
        let q = 1.0 - row[0];
        if q >= threshold {
            drawn.push((i, j, q));
        }
    }
    let mut keep = vec![drawn.is_empty(); post.n()];
    for &(i, j, _) in &drawn {
        keep[i as usize] = true;
        keep[j as usize] = true;
    }
    let mut out = String::new();
    let (kind, arrow) = if post.directed() {
        ("digraph", "->")
    } else {
        ("graph", "--")
    };
    writeln!(out, "{kind} posterior {{").unwrap();
    writeln!(out, "  node [shape=circle fixedsize=true];").unwrap();
    for i in 0..post.n() as u32 {
        if !keep[i as usize] {
            continue;
        }
        let width = propensity.map_or(0.5, |phi| 0.5 * phi[i as usize]);
        writeln!(
            out,
            "  \"{}\" [width={width:.3}];",
            dot_escape(index.label(i))
        )
        .unwrap();
    }
    for (i, j, q) in drawn {
        writeln!(
            out,
            "  \"{}\" {arrow} \"{}\" [penwidth={:.3} label=\"{q:.2}\"];",
            dot_escape(index.label(i)),
            dot_escape(index.label(j)),
            5.0 * q
        )
        .unwrap();
    }
    writeln!(out, "}}").unwrap();
    write_text(path, &out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::BernoulliParams;

    fn tmp(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("netrecon-io-tests");
        fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn records_round_trip_through_tally_files() {
        let p = tmp("records.tsv");
        fs::write(&p, "# survey\na\tb\t1\nb\ta\t0\na\tc\t1\n").unwrap();
        let t = read_records(&p, false).unwrap();
        assert_eq!(t.entries().len(), 2);
        let data = TallyData::Single(t);
        let tp = tmp("tally.tsv");
        write_tally(&tp, &data).unwrap();
        let back = read_tally(&tp).unwrap();
        assert_eq!(back.single().unwrap().entries(), data.single().unwrap().entries());
        assert_eq!(back.index().labels(), data.index().labels());
    }

    #[test]
    fn record_errors_name_the_line() {
        let p = tmp("bad-records.tsv");
        fs::write(&p, "a\tb\t1\na\tb\t7\n").unwrap();
        let err = read_records(&p, false).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("wrong error {other:?}"),
        }
    }

    #[test]
    fn multimodal_tally_round_trip() {
        let recs = [
            ("a", "b", "call", 1u8),
            ("a", "b", "text", 0),
            ("b", "a", "call", 1),
        ];
        let t = build_multimodal(&recs).unwrap();
        let data = TallyData::Modes(t);
        let p = tmp("modes.tsv");
        write_tally(&p, &data).unwrap();
        let back = read_tally(&p).unwrap();
        let (a, b) = (data.modes().unwrap(), back.modes().unwrap());
        assert_eq!(a.modes(), b.modes());
        assert_eq!(a.entries(), b.entries());
    }

    #[test]
    fn network_round_trip_keeps_isolated_nodes_and_loops() {
        let mut g = Network::empty(4, false);
        g.set_pair(0, 2, 3);
        g.set_self_loops(1, 2);
        let index = NodeIndex::from_labels(&["w", "x", "y", "z"]).unwrap();
        let p = tmp("network.tsv");
        write_network(&p, &g, &index).unwrap();
        let (back, idx) = read_network(&p).unwrap();
        assert_eq!(back.n(), 4);
        assert_eq!(back.value(0, 2), 3);
        assert_eq!(back.self_loops(1), 2);
        assert_eq!(idx.label(3), "z");
    }

    #[test]
    fn report_round_trip_and_bare_params() {
        let report = FitReport {
            model: ModelId::Bernoulli,
            params: ModelParams::Bernoulli(BernoulliParams {
                edge_prob: 0.25,
                true_pos: 0.9,
                false_pos: 0.01,
            }),
            nodes: vec!["a".into(), "b".into()],
            objective: -12.5,
            iterations: 17,
            converged: true,
            restart: 3,
            notes: vec![],
            false_discovery_rate: Some(vec![0.032]),
            reporter_precision: None,
            input: Some("checks.tsv".into()),
            config: Some(EmConfig::default()),
        };
        let p = tmp("report.json");
        write_report(&p, &report).unwrap();
        let (params, nodes) = read_params(&p).unwrap();
        assert_eq!(params, report.params);
        assert_eq!(nodes.unwrap(), report.nodes);
        let text = fs::read_to_string(&p).unwrap();
        let back: FitReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
        let bare = tmp("bare.json");
        fs::write(
            &bare,
            serde_json::to_string(&report.params).unwrap(),
        )
        .unwrap();
        let (params2, nodes2) = read_params(&bare).unwrap();
        assert_eq!(params2, report.params);
        assert!(nodes2.is_none());
    }

    #[test]
    fn report_model_must_match_its_params() {
        let report = FitReport {
            model: ModelId::Poisson,
            params: ModelParams::Bernoulli(BernoulliParams {
                edge_prob: 0.25,
                true_pos: 0.9,
                false_pos: 0.01,
            }),
            nodes: vec![],
            objective: 0.0,
            iterations: 0,
            converged: false,
            restart: 0,
            notes: vec![],
            false_discovery_rate: None,
            reporter_precision: None,
            input: None,
            config: None,
        };
        let err = write_report(&tmp("mismatch.json"), &report).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn counts_sum_duplicates_and_drop_orientation() {
        let p = tmp("counts.tsv");
        fs::write(&p, "# checks\na\tb\t3\t2\nb\ta\t1\t1\na\tc\t2\t0\na\tb\t1\t0\n").unwrap();
        let t = read_counts(&p, false).unwrap();
        assert_eq!(t.entries().len(), 2);
        let ab = t.entries().iter().find(|e| (e.i, e.j) == (0, 1)).unwrap();
        assert_eq!((ab.trials, ab.positives), (5, 3));
        let directed = read_counts(&p, true).unwrap();
        assert_eq!(directed.entries().len(), 3);
    }

    #[test]
    fn count_errors_name_the_line() {
        let p = tmp("bad-counts.tsv");
        fs::write(&p, "a\tb\t3\t2\na\tb\t1\t4\n").unwrap();
        match read_counts(&p, false).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("wrong error {other:?}"),
        }
        fs::write(&p, "a\ta\t3\t2\n").unwrap();
        match read_counts(&p, false).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("wrong error {other:?}"),
        }
        fs::write(&p, "a\tb\tmany\t2\n").unwrap();
        assert!(read_counts(&p, false).is_err());
    }

    #[test]
    fn data_format_is_sniffed_from_the_header() {
        let p = tmp("sniffed.tsv");
        fs::write(&p, "#tally\tundirected\na\tb\t3\t2\n").unwrap();
        let data = read_tally_or_counts(&p, false).unwrap();
        assert_eq!(data.single().unwrap().entries().len(), 1);
        fs::write(&p, "a\tb\t3\t2\nb\tc\t2\t1\n").unwrap();
        let data = read_tally_or_counts(&p, false).unwrap();
        assert_eq!(data.single().unwrap().entries().len(), 2);
    }

    #[test]
    fn edges_respect_the_threshold() {
        let index = NodeIndex::from_labels(&["a", "b", "c"]).unwrap();
        let post = EdgePosterior::simple(
            index,
            false,
            vec![(0, 1), (0, 2)],
            vec![0.9, 0.2],
            0.05,
        )
        .unwrap();
        let p = tmp("edges.tsv");
        write_edges(&p, &post, 0.5).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "source\ttarget\tq");
        assert_eq!(lines[1], "a\tb\t0.9");
        assert_eq!(lines[2], "#unmeasured\t1\t0.05");
        assert_eq!(lines.len(), 3);
        write_edges(&p, &post, 0.0).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.lines().any(|l| l == "a\tc\t0.2"));
    }

    #[test]
    fn dot_quotes_odd_labels() {
        let index = NodeIndex::from_labels(&["he\"llo", "x"]).unwrap();
        let post =
            EdgePosterior::simple(index, false, vec![(0, 1)], vec![0.8], 0.0).unwrap();
        let p = tmp("graph.dot");
        write_dot(&p, &post, 0.5, None).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.contains("\"he\\\"llo\" -- \"x\""));
        assert!(text.starts_with("graph posterior {"));
    }

    #[test]
    fn dot_omits_nodes_without_drawn_edges() {
        let index = NodeIndex::from_labels(&["a", "b", "c"]).unwrap();
        let post = EdgePosterior::simple(
            index,
            false,
            vec![(0, 1), (1, 2)],
            vec![0.9, 0.1],
            0.0,
        )
        .unwrap();
        let p = tmp("omit.dot");
        write_dot(&p, &post, 0.5, None).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.contains("\"a\""));
        assert!(text.contains("\"b\""));
        assert!(!text.contains("\"c\""));
        write_dot(&p, &post, 0.95, None).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert!(!text.contains("--"));
        for label in ["\"a\"", "\"b\"", "\"c\""] {
            assert!(text.contains(label), "bare {label} missing");
        }
    }

    #[test]
    fn dot_widths_scale_with_probability_and_propensity() {
        let index = NodeIndex::from_labels(&["a", "b", "c"]).unwrap();
        let post = EdgePosterior::simple(
            index,
            false,
            vec![(0, 1), (1, 2)],
            vec![1.0, 0.1],
            0.0,
        )
        .unwrap();
        let p = tmp("widths.dot");
        write_dot(&p, &post, 0.05, Some(&[2.0, 1.0, 0.5])).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.contains("penwidth=5.000"));
        assert!(text.contains("penwidth=0.500"));
        assert!(text.contains("\"a\" [width=1.000];"));
        assert!(text.contains("\"b\" [width=0.500];"));
        assert!(text.contains("\"c\" [width=0.250];"));
    }
}
