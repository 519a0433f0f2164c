//! CART trees with exhaustive threshold search over random split candidates.

use rand::Rng;
use serde::Serialize;

use super::dataset::{Dataset, Task};

/// Levels up to this count are split by exhaustive subset search; above it,
/// levels are ordered by outcome and split like an ordered variable.
pub const MAX_EXHAUSTIVE_LEVELS: usize = 10;

const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TreeParams {
    /// Split candidates drawn per node.
    pub mtry: usize,
    /// Minimum number of (bootstrap) samples in each child of a split.
    pub min_node_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Node {
    /// Prediction stored at `leaf_values[offset..offset + width]`.
    Leaf { offset: usize },
    /// Rows with `x <= threshold` go left.
    Numeric {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    /// Rows whose level is flagged in `left_levels` go left.
    Categorical {
        feature: usize,
        left_levels: Vec<bool>,
        left: usize,
        right: usize,
    },
}

/// Row indices of every numeric predictor sorted by value, shared by all
/// trees of a forest so that no tree sorts from scratch.
#[derive(Debug, Clone)]
pub struct SortedColumns {
    orders: Vec<Vec<u32>>,
}

impl SortedColumns {
    pub fn new(data: &Dataset) -> Self {
        let orders = (0..data.n_predictors())
            .map(|j| {
                let col = data.predictor(j);
                if col.n_levels().is_some() {
                    return Vec::new();
                }
                let mut order: Vec<u32> = (0..data.n_rows() as u32).collect();
                order.sort_by(|&a, &b| col.values[a as usize].total_cmp(&col.values[b as usize]));
                order
            })
            .collect();
        SortedColumns { orders }
    }
}

/// A fitted binary tree. Predictions are class-probability vectors
/// (classification) or a single mean (regression).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tree {
    nodes: Vec<Node>,
    leaf_values: Vec<f64>,
    width: usize,
    used_features: Vec<bool>,
}

impl Tree {
    /// Grow a tree on `rows` (indices into `data`, repeats allowed).
    ///
    /// # Panics
    ///
    /// If `rows` is empty.
    pub fn fit<R: Rng>(data: &Dataset, rows: &[u32], params: TreeParams, rng: &mut R) -> Tree {
        Self::fit_sorted(data, &SortedColumns::new(data), rows, params, rng)
    }

    /// [`Tree::fit`] with column orders computed once for `data`.
    pub fn fit_sorted<R: Rng>(
        data: &Dataset,
        sorted: &SortedColumns,
        rows: &[u32],
        params: TreeParams,
        rng: &mut R,
    ) -> Tree {
        assert!(!rows.is_empty(), "a tree needs at least one sample");
        let n_features = data.n_predictors();
        let features: Vec<&[f64]> = (0..n_features)
            .map(|j| data.predictor(j).values.as_slice())
            .collect();
        let levels: Vec<Option<usize>> = (0..n_features)
            .map(|j| data.predictor(j).n_levels())
            .collect();
        let n_classes = match data.task() {
            Task::Classification => data.n_classes(),
            Task::Regression => 0,
        };
        let mut builder = Builder {
            features,
            levels,
            y: &data.target().values,
            n_classes,
            params: TreeParams {
                mtry: params.mtry.clamp(1, n_features.max(1)),
                min_node_size: params.min_node_size.max(1),
            },
            pool: (0..n_features).collect(),
            rows: rows.to_vec(),
            members: Vec::new(),
            sorted: Vec::new(),
            goes_left: Vec::new(),
            scratch_members: Vec::with_capacity(rows.len()),
            scratch_entries: Vec::with_capacity(rows.len()),
            counts: vec![0.0; n_classes.max(1)],
            tree: Tree {
                nodes: Vec::new(),
                leaf_values: Vec::new(),
                width: n_classes.max(1),
                used_features: vec![false; n_features],
            },
        };
        builder.presort(data.n_rows(), sorted);
        builder.grow(0, rows.len(), rng);
        builder.tree
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    /// Whether any split in the tree tests predictor `j`.
    pub fn uses_feature(&self, j: usize) -> bool {
        self.used_features.get(j).copied().unwrap_or(false)
    }

    /// Predict from a feature accessor `x(j)`.
    pub fn predict_with<F: Fn(usize) -> f64>(&self, x: F) -> &[f64] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { offset } => {
                    return &self.leaf_values[*offset..*offset + self.width];
                }
                Node::Numeric {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if x(*feature) <= *threshold { *left } else { *right };
                }
                Node::Categorical {
                    feature,
                    left_levels,
                    left,
                    right,
                } => {
                    let code = x(*feature) as usize;
                    let goes_left = left_levels.get(code).copied().unwrap_or(false);
                    i = if goes_left { *left } else { *right };
                }
            }
        }
    }

    /// Predict row `i` of `data`.
    pub fn predict_row(&self, data: &Dataset, i: usize) -> &[f64] {
        self.predict_with(|j| data.predictor(j).values[i])
    }
}

enum Rule {
    Numeric(f64),
    Categorical(Vec<bool>),
}

struct Best {
    feature: usize,
    score: f64,
    rule: Rule,
}

/// Sufficient statistics of a set of rows.
#[derive(Clone)]
enum Stats {
    Reg { n: f64, sum: f64 },
    Cls { n: f64, counts: Vec<f64> },
}

impl Stats {
    fn n(&self) -> f64 {
        match self {
            Stats::Reg { n, .. } | Stats::Cls { n, .. } => *n,
        }
    }

    /// `sum²/n` for regression, `Σ c_k²/n` for classification. Maximising the
    /// sum over the children minimises squared error or Gini impurity.
    fn score(&self) -> f64 {
        match self {
            Stats::Reg { n, sum } => sum * sum / n,
            Stats::Cls { n, counts } => counts.iter().map(|c| c * c).sum::<f64>() / n,
        }
    }

    fn add(&mut self, other: &Stats) {
        match (self, other) {
            (Stats::Reg { n, sum }, Stats::Reg { n: n2, sum: s2 }) => {
                *n += n2;
                *sum += s2;
            }
            (Stats::Cls { n, counts }, Stats::Cls { n: n2, counts: c2 }) => {
                *n += n2;
                counts.iter_mut().zip(c2).for_each(|(a, b)| *a += b);
            }
            _ => unreachable!("mixed statistics"),
        }
    }

    fn sub(&self, other: &Stats) -> Stats {
        match (self, other) {
            (Stats::Reg { n, sum }, Stats::Reg { n: n2, sum: s2 }) => Stats::Reg {
                n: n - n2,
                sum: sum - s2,
            },
            (Stats::Cls { n, counts }, Stats::Cls { n: n2, counts: c2 }) => Stats::Cls {
                n: n - n2,
                counts: counts.iter().zip(c2).map(|(a, b)| a - b).collect(),
            },
            _ => unreachable!("mixed statistics"),
        }
    }

    /// Value used to order categorical levels when there are too many for
    /// exhaustive search.
    fn ordering_key(&self, class: usize) -> f64 {
        match self {
            Stats::Reg { n, sum } => sum / n,
            Stats::Cls { n, counts } => counts[class] / n,
        }
    }
}

/// One bootstrap sample in a feature's presorted order.
#[derive(Clone, Copy)]
struct Entry {
    x: f64,
    y: f64,
    sample: u32,
}

/// Grows a tree over sample positions `0..N` (bootstrap draws, repeats
/// allowed). Every node owns the same range `start..end` in `members` and in
/// each numeric feature's presorted entry list; a split stably partitions all
/// of them, so no node ever re-sorts.
struct Builder<'a> {
    features: Vec<&'a [f64]>,
    levels: Vec<Option<usize>>,
    y: &'a [f64],
    n_classes: usize,
    params: TreeParams,
    pool: Vec<usize>,
    /// Data row of each sample position.
    rows: Vec<u32>,
    members: Vec<u32>,
    sorted: Vec<Vec<Entry>>,
    goes_left: Vec<bool>,
    scratch_members: Vec<u32>,
    scratch_entries: Vec<Entry>,
    counts: Vec<f64>,
    tree: Tree,
}

impl Builder<'_> {
    /// Lay out each numeric feature's samples in value order by expanding
    /// the shared row order with the bootstrap multiplicities.
    fn presort(&mut self, n_rows: usize, columns: &SortedColumns) {
        let n = self.rows.len();
        self.members = (0..n as u32).collect();
        self.goes_left = vec![false; n];
        // samples of each row, grouped by row (counting sort)
        let mut start = vec![0u32; n_rows + 1];
        for &r in &self.rows {
            start[r as usize + 1] += 1;
        }
        for i in 0..n_rows {
            start[i + 1] += start[i];
        }
        let mut fill = start.clone();
        let mut by_row = vec![0u32; n];
        for (s, &r) in self.rows.iter().enumerate() {
            by_row[fill[r as usize] as usize] = s as u32;
            fill[r as usize] += 1;
        }
        self.sorted = columns
            .orders
            .iter()
            .enumerate()
            .map(|(f, order)| {
                if order.is_empty() {
                    return Vec::new();
                }
                let x = self.features[f];
                let mut entries = Vec::with_capacity(n);
                for &r in order {
                    let r = r as usize;
                    for &s in &by_row[start[r] as usize..start[r + 1] as usize] {
                        entries.push(Entry {
                            x: x[r],
                            y: self.y[r],
                            sample: s,
                        });
                    }
                }
                entries
            })
            .collect();
    }

    fn empty_stats(&self) -> Stats {
        if self.n_classes > 0 {
            Stats::Cls {
                n: 0.0,
                counts: vec![0.0; self.n_classes],
            }
        } else {
            Stats::Reg { n: 0.0, sum: 0.0 }
        }
    }

    fn y_of(&self, sample: u32) -> f64 {
        self.y[self.rows[sample as usize] as usize]
    }

    fn stats_of(&self, start: usize, end: usize) -> Stats {
        let mut s = self.empty_stats();
        let members = &self.members[start..end];
        match &mut s {
            Stats::Reg { n, sum } => {
                *n = members.len() as f64;
                *sum = members.iter().map(|&m| self.y_of(m)).sum();
            }
            Stats::Cls { n, counts } => {
                *n = members.len() as f64;
                for &m in members {
                    counts[self.y_of(m) as usize] += 1.0;
                }
            }
        }
        s
    }

    fn is_pure(&self, start: usize, end: usize) -> bool {
        let first = self.y_of(self.members[start]);
        self.members[start..end].iter().all(|&m| self.y_of(m) == first)
    }

    fn push_leaf(&mut self, stats: &Stats) -> usize {
        let offset = self.tree.leaf_values.len();
        match stats {
            Stats::Reg { n, sum } => self.tree.leaf_values.push(sum / n),
            Stats::Cls { n, counts } => {
                self.tree.leaf_values.extend(counts.iter().map(|c| c / n));
            }
        }
        self.tree.nodes.push(Node::Leaf { offset });
        self.tree.nodes.len() - 1
    }

    fn grow<R: Rng>(&mut self, start: usize, end: usize, rng: &mut R) -> usize {
        let stats = self.stats_of(start, end);
        let size = end - start;
        let min = self.params.min_node_size;
        if size < 2 * min || self.is_pure(start, end) || self.features.is_empty() {
            return self.push_leaf(&stats);
        }

        // Partial Fisher-Yates draw of the split candidates, evaluated in
        // ascending index order so ties go to the lowest variable.
        let p = self.pool.len();
        let mtry = self.params.mtry;
        for i in 0..mtry {
            let k = rng.random_range(i..p);
            self.pool.swap(i, k);
        }
        let mut candidates: Vec<usize> = self.pool[..mtry].to_vec();
        candidates.sort_unstable();

        let parent = stats.score();
        let mut best: Option<Best> = None;
        for &f in &candidates {
            let found = match self.levels[f] {
                None => best_numeric(&self.sorted[f][start..end], &stats, min, &mut self.counts)
                    .map(|(score, t)| (score, Rule::Numeric(t))),
                Some(n_levels) => self.best_categorical(f, n_levels, start, end, &stats),
            };
            if let Some((score, rule)) = found {
                if best.as_ref().is_none_or(|b| score > b.score) {
                    best = Some(Best {
                        feature: f,
                        score,
                        rule,
                    });
                }
            }
        }

        let best = match best {
            Some(b) if b.score - parent > MIN_GAIN * (1.0 + parent.abs()) => b,
            _ => return self.push_leaf(&stats),
        };

        let split = self.partition(start, end, best.feature, &best.rule);
        debug_assert!(split - start >= min && end - split >= min);

        let id = self.tree.nodes.len();
        self.tree.nodes.push(Node::Leaf { offset: usize::MAX });
        self.tree.used_features[best.feature] = true;
        let left = self.grow(start, split, rng);
        let right = self.grow(split, end, rng);
        self.tree.nodes[id] = match best.rule {
            Rule::Numeric(threshold) => Node::Numeric {
                feature: best.feature,
                threshold,
                left,
                right,
            },
            Rule::Categorical(left_levels) => Node::Categorical {
                feature: best.feature,
                left_levels,
                left,
                right,
            },
        };
        id
    }

    /// Stably move the node's left-going samples to the front of every
    /// per-node list; returns the boundary.
    fn partition(&mut self, start: usize, end: usize, feature: usize, rule: &Rule) -> usize {
        let column = self.features[feature];
        for &m in &self.members[start..end] {
            let x = column[self.rows[m as usize] as usize];
            self.goes_left[m as usize] = match rule {
                Rule::Numeric(t) => x <= *t,
                Rule::Categorical(mask) => mask[x as usize],
            };
        }
        let goes_left = &self.goes_left;
        let split = start
            + stable_partition(&mut self.members[start..end], &mut self.scratch_members, |&m| {
                goes_left[m as usize]
            });
        for entries in self.sorted.iter_mut().filter(|e| !e.is_empty()) {
            stable_partition(&mut entries[start..end], &mut self.scratch_entries, |e| {
                goes_left[e.sample as usize]
            });
        }
        split
    }

    fn best_categorical(
        &self,
        f: usize,
        n_levels: usize,
        start: usize,
        end: usize,
        total: &Stats,
    ) -> Option<(f64, Rule)> {
        let x = self.features[f];
        let mut per_level: Vec<Stats> = vec![self.empty_stats(); n_levels];
        for &m in &self.members[start..end] {
            let r = self.rows[m as usize] as usize;
            let level = x[r] as usize;
            match &mut per_level[level] {
                Stats::Reg { n, sum } => {
                    *n += 1.0;
                    *sum += self.y[r];
                }
                Stats::Cls { n, counts } => {
                    *n += 1.0;
                    counts[self.y[r] as usize] += 1.0;
                }
            }
        }
        let mut present: Vec<usize> = (0..n_levels).filter(|&l| per_level[l].n() > 0.0).collect();
        let q = present.len();
        if q < 2 {
            return None;
        }
        let min = self.params.min_node_size as f64;
        let evaluate = |left: &Stats| -> Option<f64> {
            let right = total.sub(left);
            (left.n() >= min && right.n() >= min).then(|| left.score() + right.score())
        };

        let mut best: Option<(f64, Vec<bool>)> = None;
        if q <= MAX_EXHAUSTIVE_LEVELS {
            // The first present level always goes left; enumerate the rest.
            for mask in 0..(1u32 << (q - 1)) - 1 {
                let mut left = per_level[present[0]].clone();
                for (bit, &level) in present[1..].iter().enumerate() {
                    if mask & (1 << bit) != 0 {
                        left.add(&per_level[level]);
                    }
                }
                if let Some(score) = evaluate(&left) {
                    if best.as_ref().is_none_or(|(s, _)| score > *s) {
                        let mut flags = vec![false; n_levels];
                        flags[present[0]] = true;
                        for (bit, &level) in present[1..].iter().enumerate() {
                            flags[level] = mask & (1 << bit) != 0;
                        }
                        best = Some((score, flags));
                    }
                }
            }
        } else {
            let class = match total {
                Stats::Cls { counts, .. } if counts.len() == 2 => 1,
                Stats::Cls { counts, .. } => counts
                    .iter()
                    .enumerate()
                    .fold((0, f64::MIN), |acc, (i, &c)| if c > acc.1 { (i, c) } else { acc })
                    .0,
                Stats::Reg { .. } => 0,
            };
            present.sort_by(|&a, &b| {
                per_level[a]
                    .ordering_key(class)
                    .total_cmp(&per_level[b].ordering_key(class))
                    .then(a.cmp(&b))
            });
            let mut left = self.empty_stats();
            for cut in 0..q - 1 {
                left.add(&per_level[present[cut]]);
                if let Some(score) = evaluate(&left) {
                    if best.as_ref().is_none_or(|(s, _)| score > *s) {
                        let mut flags = vec![false; n_levels];
                        present[..=cut].iter().for_each(|&l| flags[l] = true);
                        best = Some((score, flags));
                    }
                }
            }
        }
        best.map(|(score, flags)| (score, Rule::Categorical(flags)))
    }
}

/// Best threshold over entries sorted by `x`: the children's combined score
/// and the midpoint threshold.
fn best_numeric(entries: &[Entry], total: &Stats, min: usize, counts: &mut [f64]) -> Option<(f64, f64)> {
    let n = entries.len();
    if entries[0].x == entries[n - 1].x {
        return None;
    }
    let nf = n as f64;
    let mut best: Option<(f64, usize)> = None;
    match total {
        Stats::Reg { sum, .. } => {
            let mut left_sum = 0.0;
            for i in 0..n - 1 {
                left_sum += entries[i].y;
                let n_left = i + 1;
                if entries[i].x == entries[i + 1].x || n_left < min || n - n_left < min {
                    continue;
                }
                let nl = n_left as f64;
                let right_sum = sum - left_sum;
                let score = left_sum * left_sum / nl + right_sum * right_sum / (nf - nl);
                if best.is_none_or(|(s, _)| score > s) {
                    best = Some((score, i));
                }
            }
        }
        Stats::Cls { counts: total_counts, .. } => {
            let left = counts;
            left.iter_mut().for_each(|c| *c = 0.0);
            let mut right = total_counts.clone();
            let mut sq_left = 0.0;
            let mut sq_right: f64 = total_counts.iter().map(|c| c * c).sum();
            for i in 0..n - 1 {
                let c = entries[i].y as usize;
                sq_left += 2.0 * left[c] + 1.0;
                left[c] += 1.0;
                sq_right -= 2.0 * right[c] - 1.0;
                right[c] -= 1.0;
                let n_left = i + 1;
                if entries[i].x == entries[i + 1].x || n_left < min || n - n_left < min {
                    continue;
                }
                let nl = n_left as f64;
                let score = sq_left / nl + sq_right / (nf - nl);
                if best.is_none_or(|(s, _)| score > s) {
                    best = Some((score, i));
                }
            }
        }
    }
    best.map(|(score, i)| {
        let (lo, hi) = (entries[i].x, entries[i + 1].x);
        let mid = 0.5 * (lo + hi);
        (score, if mid < hi { mid } else { lo })
    })
}

/// Stable partition of `items` by `left`, using `scratch` for the right
/// part; returns the number of left items.
fn stable_partition<T: Copy, F: Fn(&T) -> bool>(items: &mut [T], scratch: &mut Vec<T>, left: F) -> usize {
    scratch.clear();
    let mut k = 0;
    for i in 0..items.len() {
        let item = items[i];
        if left(&item) {
            items[k] = item;
            k += 1;
        } else {
            scratch.push(item);
        }
    }
    items[k..].copy_from_slice(scratch);
    k
}
