//! Node indexing, measurement tallies, and networks.
//!
//! A *tally* is the sufficient statistic of repeated binary measurements: for
//! each node pair that was measured at all, the number of checks `N_ij` and
//! the number of positive outcomes `E_ij`. Pairs never measured are simply
//! absent; every algorithm in the crate treats them analytically instead of
//! materializing the O(n²) pair set.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::error::{Error, Result};

/// Bijection between external string labels and dense ids `0..n`.
#[derive(Debug, Clone, Default)]
pub struct NodeIndex {
    labels: Vec<String>,
    ids: HashMap<String, u32>,
}

impl NodeIndex {
    pub fn new() -> Self {
        Self::default()
    }

    /// Index with labels `"0"`, `"1"`, ... for data that has no names.
    pub fn anonymous(n: usize) -> Self {
        let mut idx = Self::new();
        for i in 0..n {
            idx.intern(&i.to_string());
        }
        idx
    }

    pub fn from_labels<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        let mut idx = Self::new();
        for l in labels {
            let before = idx.len();
            idx.intern(l.as_ref());
            if idx.len() == before {
                return Err(Error::InvalidInput(format!(
                    "duplicate node label {:?}",
                    l.as_ref()
                )));
            }
        }
        Ok(idx)
    }

    /// Returns the id for `label`, assigning the next free id on first sight.
    pub fn intern(&mut self, label: &str) -> u32 {
        if let Some(&id) = self.ids.get(label) {
            return id;
        }
        let id = self.labels.len() as u32;
        self.labels.push(label.to_string());
        self.ids.insert(label.to_string(), id);
        id
    }

    pub fn id(&self, label: &str) -> Option<u32> {
        self.ids.get(label).copied()
    }

    pub fn label(&self, id: u32) -> &str {
        &self.labels[id as usize]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Aggregated measurements of one node pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TallyEntry {
    pub i: u32,
    pub j: u32,
    /// Number of times the pair was checked.
    pub trials: u32,
    /// Number of checks that came back positive.
    pub positives: u32,
}

/// Measurement counts for every observed node pair.
///
/// Undirected tallies store each pair once with `i < j`; directed tallies
/// store ordered pairs. Self-pairs are rejected. Entries are kept sorted by
/// `(i, j)`, which fixes the iteration order everywhere downstream.
#[derive(Debug, Clone)]
pub struct MeasurementTally {
    index: NodeIndex,
    directed: bool,
    entries: Vec<TallyEntry>,
}

impl MeasurementTally {
    pub fn from_entries(
        index: NodeIndex,
        directed: bool,
        mut entries: Vec<TallyEntry>,
    ) -> Result<Self> {
        let n = index.len() as u32;
        for e in &mut entries {
            if !directed && e.i > e.j {
                std::mem::swap(&mut e.i, &mut e.j);
            }
            if e.i == e.j {
                return Err(Error::InvalidInput(format!(
                    "self-pair ({}, {}) in tally",
                    e.i, e.j
                )));
            }
            if e.i >= n || e.j >= n {
                return Err(Error::InvalidInput(format!(
                    "pair ({}, {}) out of range for {} nodes",
                    e.i, e.j, n
                )));
            }
            if e.positives > e.trials {
                return Err(Error::InvalidInput(format!(
                    "pair ({}, {}) has {} positives out of {} trials",
                    e.i, e.j, e.positives, e.trials
                )));
            }
        }
        entries.sort_by_key(|e| (e.i, e.j));
        if entries.windows(2).any(|w| (w[0].i, w[0].j) == (w[1].i, w[1].j)) {
            return Err(Error::InvalidInput("duplicate pair in tally".into()));
        }
        Ok(Self {
            index,
            directed,
            entries,
        })
    }

    pub fn n(&self) -> usize {
        self.index.len()
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    pub fn index(&self) -> &NodeIndex {
        &self.index
    }

    pub fn entries(&self) -> &[TallyEntry] {
        &self.entries
    }

    /// Number of distinct pair cells the model has: `n(n-1)/2` undirected,
    /// `n(n-1)` directed.
    pub fn cell_count(&self) -> usize {
        let n = self.n();
        if self.directed {
            n * (n - 1)
        } else {
            n * (n - 1) / 2
        }
    }

    pub fn lookup(&self, i: u32, j: u32) -> Option<&TallyEntry> {
        let key = canonical_pair(i, j, self.directed);
        self.entries
            .binary_search_by_key(&key, |e| (e.i, e.j))
            .ok()
            .map(|k| &self.entries[k])
    }

    /// Total number of measurements across all pairs.
    pub fn total_trials(&self) -> u64 {
        self.entries.iter().map(|e| e.trials as u64).sum()
    }

    /// Collapses a directed tally onto unordered pairs, keeping the two
    /// directions' counts side by side. For a pair `(i, j)` with `i < j`,
    /// the `ij` counts are i's reports about j and the `ji` counts are j's
    /// reports about i. Sorted by `(i, j)`.
    pub fn merge_directions(&self) -> Result<Vec<MergedPair>> {
        if !self.directed {
            return Err(Error::ModelMismatch(
                "direction merge needs a directed tally".into(),
            ));
        }
        let mut map: BTreeMap<(u32, u32), MergedPair> = BTreeMap::new();
        for e in &self.entries {
            let (a, b) = canonical_pair(e.i, e.j, false);
            let m = map.entry((a, b)).or_insert(MergedPair {
                i: a,
                j: b,
                trials_ij: 0,
                pos_ij: 0,
                trials_ji: 0,
                pos_ji: 0,
            });
            if e.i == a {
                m.trials_ij += e.trials;
                m.pos_ij += e.positives;
            } else {
                m.trials_ji += e.trials;
                m.pos_ji += e.positives;
            }
        }
        Ok(map.into_values().collect())
    }
}

/// Both directions of one unordered pair of a directed tally.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MergedPair {
    pub i: u32,
    pub j: u32,
    /// Checks by `i` on the pair (`i < j`).
    pub trials_ij: u32,
    pub pos_ij: u32,
    /// Checks by `j` on the pair.
    pub trials_ji: u32,
    pub pos_ji: u32,
}

/// Per-mode measurement counts of one ordered node pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeTallyEntry {
    pub i: u32,
    pub j: u32,
    /// Checks per mode, indexed like [`MultimodalTally::modes`].
    pub trials: Vec<u32>,
    pub positives: Vec<u32>,
}

/// Directed measurements taken through several independent data modes.
///
/// Convention: an entry `(i, j)` measures the potential edge *from j to i*
/// (row i collects the evidence about what i receives).
#[derive(Debug, Clone)]
pub struct MultimodalTally {
    index: NodeIndex,
    modes: Vec<String>,
    entries: Vec<ModeTallyEntry>,
}

impl MultimodalTally {
    pub fn from_entries(
        index: NodeIndex,
        modes: Vec<String>,
        mut entries: Vec<ModeTallyEntry>,
    ) -> Result<Self> {
        let n = index.len() as u32;
        let m = modes.len();
        if m == 0 {
            return Err(Error::InvalidInput("no measurement modes".into()));
        }
        for e in &entries {
            if e.i == e.j {
                return Err(Error::InvalidInput(format!(
                    "self-pair ({}, {}) in tally",
                    e.i, e.j
                )));
            }
            if e.i >= n || e.j >= n {
                return Err(Error::InvalidInput(format!(
                    "pair ({}, {}) out of range for {} nodes",
                    e.i, e.j, n
                )));
            }
            if e.trials.len() != m || e.positives.len() != m {
                return Err(Error::InvalidInput("mode count mismatch in entry".into()));
            }
            if e.trials
                .iter()
                .zip(&e.positives)
                .any(|(tn, te)| te > tn)
            {
                return Err(Error::InvalidInput(format!(
                    "pair ({}, {}) has more positives than trials",
                    e.i, e.j
                )));
            }
        }
        entries.sort_by_key(|e| (e.i, e.j));
        if entries.windows(2).any(|w| (w[0].i, w[0].j) == (w[1].i, w[1].j)) {
            return Err(Error::InvalidInput("duplicate pair in tally".into()));
        }
        Ok(Self {
            index,
            modes,
            entries,
        })
    }

    pub fn n(&self) -> usize {
        self.index.len()
    }

    pub fn index(&self) -> &NodeIndex {
        &self.index
    }

    pub fn modes(&self) -> &[String] {
        &self.modes
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn entries(&self) -> &[ModeTallyEntry] {
        &self.entries
    }

    pub fn cell_count(&self) -> usize {
        self.n() * (self.n() - 1)
    }
}

/// Either kind of measurement data, as accepted by the fitting engine.
#[derive(Debug, Clone)]
pub enum TallyData {
    Single(MeasurementTally),
    Modes(MultimodalTally),
}

impl TallyData {
    pub fn n(&self) -> usize {
        match self {
            TallyData::Single(t) => t.n(),
            TallyData::Modes(t) => t.n(),
        }
    }

    pub fn directed(&self) -> bool {
        match self {
            TallyData::Single(t) => t.directed(),
            TallyData::Modes(_) => true,
        }
    }

    pub fn index(&self) -> &NodeIndex {
        match self {
            TallyData::Single(t) => t.index(),
            TallyData::Modes(t) => t.index(),
        }
    }

    pub fn single(&self) -> Result<&MeasurementTally> {
        match self {
            TallyData::Single(t) => Ok(t),
            TallyData::Modes(_) => Err(Error::ModelMismatch(
                "model takes single-mode tallies, got multimodal data".into(),
            )),
        }
    }

    pub fn modes(&self) -> Result<&MultimodalTally> {
        match self {
            TallyData::Modes(t) => Ok(t),
            TallyData::Single(_) => Err(Error::ModelMismatch(
                "model takes multimodal tallies, got single-mode data".into(),
            )),
        }
    }
}

/// Builds an aggregated tally from raw `(i, j, outcome)` observation records.
///
/// Labels are interned in first-seen order. For undirected data, `(a, b)`
/// and `(b, a)` records land in the same pair. Outcomes must be 0 or 1;
/// self-loops are rejected with the offending record named.
pub fn build_tallies<S: AsRef<str>>(
    records: &[(S, S, u8)],
    directed: bool,
) -> Result<MeasurementTally> {
    let mut index = NodeIndex::new();
    let mut counts: BTreeMap<(u32, u32), (u32, u32)> = BTreeMap::new();
    for (rec_no, (a, b, outcome)) in records.iter().enumerate() {
        let (a, b) = (a.as_ref(), b.as_ref());
        if *outcome > 1 {
            return Err(Error::InvalidInput(format!(
                "record {}: outcome {} is not 0 or 1",
                rec_no, outcome
            )));
        }
        if a == b {
            return Err(Error::InvalidInput(format!(
                "record {}: self-loop on {:?}",
                rec_no, a
            )));
        }
        let i = index.intern(a);
        let j = index.intern(b);
        let key = canonical_pair(i, j, directed);
        let slot = counts.entry(key).or_insert((0, 0));
        slot.0 += 1;
        slot.1 += *outcome as u32;
    }
    let entries = counts
        .into_iter()
        .map(|((i, j), (trials, positives))| TallyEntry {
            i,
            j,
            trials,
            positives,
        })
        .collect();
    MeasurementTally::from_entries(index, directed, entries)
}

/// Builds a multimodal tally from `(i, j, mode, outcome)` records.
///
/// Mode labels are interned in first-seen order; duplicate records for the
/// same pair and mode aggregate by summation.
pub fn build_multimodal<S: AsRef<str>>(records: &[(S, S, S, u8)]) -> Result<MultimodalTally> {
    let mut index = NodeIndex::new();
    let mut modes: Vec<String> = Vec::new();
    let mut counts: BTreeMap<(u32, u32), Vec<(u32, u32)>> = BTreeMap::new();
    for (rec_no, (a, b, mode, outcome)) in records.iter().enumerate() {
        let (a, b, mode) = (a.as_ref(), b.as_ref(), mode.as_ref());
        if *outcome > 1 {
            return Err(Error::InvalidInput(format!(
                "record {}: outcome {} is not 0 or 1",
                rec_no, outcome
            )));
        }
        if a == b {
            return Err(Error::InvalidInput(format!(
                "record {}: self-loop on {:?}",
                rec_no, a
            )));
        }
        let i = index.intern(a);
        let j = index.intern(b);
        let m = match modes.iter().position(|x| x == mode) {
            Some(m) => m,
            None => {
                modes.push(mode.to_string());
                modes.len() - 1
            }
        };
        let slot = counts.entry((i, j)).or_default();
        if slot.len() <= m {
            slot.resize(m + 1, (0, 0));
        }
        slot[m].0 += 1;
        slot[m].1 += *outcome as u32;
    }
    let n_modes = modes.len();
    let entries = counts
        .into_iter()
        .map(|((i, j), mut per_mode)| {
            per_mode.resize(n_modes, (0, 0));
            ModeTallyEntry {
                i,
                j,
                trials: per_mode.iter().map(|c| c.0).collect(),
                positives: per_mode.iter().map(|c| c.1).collect(),
            }
        })
        .collect();
    MultimodalTally::from_entries(index, modes, entries)
}

/// Canonical storage key for a pair: sorted when undirected.
pub fn canonical_pair(i: u32, j: u32, directed: bool) -> (u32, u32) {
    if !directed && i > j {
        (j, i)
    } else {
        (i, j)
    }
}

/// Iterator over every pair cell of an n-node network in canonical order:
/// `i < j` for undirected, all ordered `i != j` for directed.
pub fn cells(n: usize, directed: bool) -> impl Iterator<Item = (u32, u32)> {
    let n = n as u32;
    (0..n).flat_map(move |i| {
        let lo = if directed { 0 } else { i + 1 };
        (lo..n).filter_map(move |j| (i != j).then_some((i, j)))
    })
}

/// A network with nonnegative integer pair values.
///
/// Values are edge multiplicities for the multigraph models, 0/1 for simple
/// graphs, and type indices for the edge-type models. Diagonal entries
/// follow the even-count convention: `A_ii` is twice the number of
/// self-loops at node i. Only nonzero entries are stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    n: usize,
    directed: bool,
    values: BTreeMap<(u32, u32), u32>,
}

impl Network {
    pub fn empty(n: usize, directed: bool) -> Self {
        Self {
            n,
            directed,
            values: BTreeMap::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    /// Sets the value of an off-diagonal pair; zero removes the entry.
    pub fn set_pair(&mut self, i: u32, j: u32, value: u32) {
        assert_ne!(i, j, "use set_self_loops for diagonal entries");
        assert!((i as usize) < self.n && (j as usize) < self.n);
        let key = canonical_pair(i, j, self.directed);
        if value == 0 {
            self.values.remove(&key);
        } else {
            self.values.insert(key, value);
        }
    }

    /// Sets the number of self-loops at node i (stored as `A_ii = 2·loops`).
    pub fn set_self_loops(&mut self, i: u32, loops: u32) {
        assert!((i as usize) < self.n);
        if loops == 0 {
            self.values.remove(&(i, i));
        } else {
            self.values.insert((i, i), 2 * loops);
        }
    }

    /// Adjacency value `A_ij`; for `i == j` this is twice the loop count.
    pub fn value(&self, i: u32, j: u32) -> u32 {
        let key = canonical_pair(i, j, self.directed);
        self.values.get(&key).copied().unwrap_or(0)
    }

    pub fn self_loops(&self, i: u32) -> u32 {
        self.value(i, i) / 2
    }

    /// Nonzero entries in sorted key order (diagonal included).
    pub fn entries(&self) -> impl Iterator<Item = (u32, u32, u32)> + '_ {
        self.values.iter().map(|(&(i, j), &v)| (i, j, v))
    }

    /// Degree of node i: `Σ_j A_ij`, with the diagonal convention making
    /// each self-loop count 2. For directed networks this is the row sum
    /// (out-entries of i).
    pub fn degree(&self, i: u32) -> u32 {
        let mut d = 0;
        for (a, b, v) in self.entries() {
            if a == i && b == i {
                d += v;
            } else if self.directed {
                if a == i {
                    d += v;
                }
            } else if a == i || b == i {
                d += v;
            }
        }
        d
    }

    /// Total edge count: `½ Σ_ij A_ij` undirected (self-loops count once),
    /// `Σ_ij A_ij` directed.
    pub fn edge_count(&self) -> u32 {
        self.values
            .iter()
            .map(|(&(i, j), &v)| if i == j { v / 2 } else { v })
            .sum()
    }

    /// True when every value is at most 1 and there are no self-loops.
    pub fn is_simple(&self) -> bool {
        self.values.iter().all(|(&(i, j), &v)| i != j && v <= 1)
    }
}

impl fmt::Display for Network {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} nodes:", self.n)?;
        for (i, j, v) in self.entries() {
            write!(f, " {}-{}:{}", i, j, v)?;
        }
        Ok(())
    }
}
