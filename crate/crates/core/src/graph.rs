//! Directed acyclic graphs over an indexed variable set and the structural
//! queries the divergence machinery relies on: parents, topological order,
//! skeleton, v-structures, d-separation, directed unblocked paths and
//! Markov-equivalence-class enumeration.

use std::collections::{BTreeSet, BinaryHeap, VecDeque};
use std::cmp::Reverse;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};

/// Default node limit for [`Dag::markov_equivalence_class`].
pub const DEFAULT_MEC_LIMIT: usize = 8;

/// A directed acyclic graph. Edge `(i, j)` means `i -> j`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawDag", into = "RawDag")]
pub struct Dag {
    num_vars: usize,
    edges: BTreeSet<(usize, usize)>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    order: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct RawDag {
    num_vars: usize,
    edges: Vec<(usize, usize)>,
}

impl TryFrom<RawDag> for Dag {
    type Error = Error;

    fn try_from(raw: RawDag) -> Result<Self> {
        Dag::new(raw.num_vars, raw.edges)
    }
}

impl From<Dag> for RawDag {
    fn from(g: Dag) -> Self {
        RawDag {
            num_vars: g.num_vars,
            edges: g.edges.into_iter().collect(),
        }
    }
}

impl fmt::Debug for Dag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dag({}; ", self.num_vars)?;
        let mut first = true;
        for (i, j) in &self.edges {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "{i}->{j}")?;
        }
        write!(f, ")")
    }
}

impl Dag {
    /// Builds a DAG, rejecting out-of-range indices, self-loops, duplicate
    /// edges, antiparallel pairs and cycles.
    pub fn new(num_vars: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if num_vars == 0 {
            return input("a graph needs at least one variable");
        }
        let mut set = BTreeSet::new();
        for (i, j) in edges {
            if i >= num_vars || j >= num_vars {
                return input(format!("edge ({i}, {j}) out of range for {num_vars} variables"));
            }
            if i == j {
                return Err(Error::Structure(format!("self-loop on {i}")));
            }
            if !set.insert((i, j)) {
                return input(format!("duplicate edge ({i}, {j})"));
            }
        }
        let order = topological_sort(num_vars, &set)?;
        let mut parents = vec![Vec::new(); num_vars];
        let mut children = vec![Vec::new(); num_vars];
        for &(i, j) in &set {
            parents[j].push(i);
            children[i].push(j);
        }
        Ok(Dag {
            num_vars,
            edges: set,
            parents,
            children,
            order,
        })
    }

    pub fn empty(num_vars: usize) -> Result<Self> {
        Dag::new(num_vars, [])
    }

    /// The complete DAG `i -> j` for all `i < j`.
    pub fn complete(num_vars: usize) -> Result<Self> {
        let edges = (0..num_vars).flat_map(|i| (i + 1..num_vars).map(move |j| (i, j)));
        Dag::new(num_vars, edges)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.edges.contains(&(from, to))
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.has_edge(a, b) || self.has_edge(b, a)
    }

    /// Parents of `i` in ascending index order.
    pub fn parents(&self, i: usize) -> Result<&[usize]> {
        self.check_index(i)?;
        Ok(&self.parents[i])
    }

    pub fn children(&self, i: usize) -> Result<&[usize]> {
        self.check_index(i)?;
        Ok(&self.children[i])
    }

    pub(crate) fn pa(&self, i: usize) -> &[usize] {
        &self.parents[i]
    }

    /// Topological order with smallest-index-first tie breaking.
    pub fn topological_order(&self) -> &[usize] {
        &self.order
    }

    pub fn skeleton(&self) -> EdgeSet {
        EdgeSet {
            num_vars: self.num_vars,
            edges: self.edges.iter().map(|&(i, j)| (i.min(j), i.max(j))).collect(),
        }
    }

    /// Unshielded colliders `i -> k <- j`, reported as `(i, k, j)` with `i < j`.
    pub fn v_structures(&self) -> BTreeSet<(usize, usize, usize)> {
        let mut out = BTreeSet::new();
        for k in 0..self.num_vars {
            let pa = &self.parents[k];
            for (a, &i) in pa.iter().enumerate() {
                for &j in &pa[a + 1..] {
                    if !self.adjacent(i, j) {
                        out.insert((i, k, j));
                    }
                }
            }
        }
        out
    }

    /// Same skeleton and same v-structures.
    pub fn is_markov_equivalent(&self, other: &Dag) -> Result<bool> {
        if self.num_vars != other.num_vars {
            return input(format!(
                "cannot compare graphs over {} and {} variables",
                self.num_vars, other.num_vars
            ));
        }
        Ok(self.skeleton() == other.skeleton() && self.v_structures() == other.v_structures())
    }

    /// Whether `a` and `b` are d-separated by `z`.
    ///
    /// Reachability over (node, direction) states: a trail may pass a
    /// non-collider that is not in `z`, and a collider that is in `z` or has
    /// a descendant in `z`.
    pub fn d_separated(&self, a: &[usize], b: &[usize], z: &[usize]) -> Result<bool> {
        let a = self.index_set(a)?;
        let b = self.index_set(b)?;
        let z = self.index_set(z)?;
        if !a.is_disjoint(&b) || !a.is_disjoint(&z) || !b.is_disjoint(&z) {
            return input("d-separation sets must be pairwise disjoint");
        }
        let n = self.num_vars;
        let mut in_z = vec![false; n];
        for &v in &z {
            in_z[v] = true;
        }
        // Nodes with a descendant in z (including z itself).
        let mut anc_z = in_z.clone();
        let mut stack: Vec<usize> = z.iter().copied().collect();
        while let Some(v) = stack.pop() {
            for &p in &self.parents[v] {
                if !anc_z[p] {
                    anc_z[p] = true;
                    stack.push(p);
                }
            }
        }
        // State: (node, arrived_from_child). Arriving "from child" means we
        // traversed the edge against its direction.
        let mut seen = vec![[false; 2]; n];
        let mut queue = VecDeque::new();
        for &s in &a {
            queue.push_back((s, true));
        }
        while let Some((v, up)) = queue.pop_front() {
            if seen[v][up as usize] {
                continue;
            }
            seen[v][up as usize] = true;
            if b.contains(&v) {
                return Ok(false);
            }
            if up {
                if !in_z[v] {
                    for &p in &self.parents[v] {
                        queue.push_back((p, true));
                    }
                    for &c in &self.children[v] {
                        queue.push_back((c, false));
                    }
                }
            } else {
                if !in_z[v] {
                    for &c in &self.children[v] {
                        queue.push_back((c, false));
                    }
                }
                if anc_z[v] {
                    for &p in &self.parents[v] {
                        queue.push_back((p, true));
                    }
                }
            }
        }
        Ok(true)
    }

    /// Whether some target reaches `i` along a directed path that avoids `z`
    /// entirely (both endpoints included). Always true when `i` is a target.
    pub fn has_unblocked_directed_path(
        &self,
        targets: &[usize],
        i: usize,
        z: &[usize],
    ) -> Result<bool> {
        Ok(self.unblocked_directed_path(targets, i, z)?.is_some())
    }

    /// Like [`Dag::has_unblocked_directed_path`] but returns a shortest
    /// witnessing path `k -> ... -> i`.
    pub fn unblocked_directed_path(
        &self,
        targets: &[usize],
        i: usize,
        z: &[usize],
    ) -> Result<Option<Vec<usize>>> {
        self.check_index(i)?;
        let targets = self.index_set(targets)?;
        let z = self.index_set(z)?;
        if targets.contains(&i) {
            return Ok(Some(vec![i]));
        }
        if z.contains(&i) {
            return Ok(None);
        }
        let n = self.num_vars;
        let mut prev: Vec<Option<usize>> = vec![None; n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        for &k in &targets {
            if !z.contains(&k) {
                seen[k] = true;
                queue.push_back(k);
            }
        }
        while let Some(v) = queue.pop_front() {
            if v == i {
                let mut path = vec![i];
                let mut cur = i;
                while let Some(p) = prev[cur] {
                    path.push(p);
                    cur = p;
                }
                path.reverse();
                return Ok(Some(path));
            }
            for &c in &self.children[v] {
                if !seen[c] && !z.contains(&c) {
                    seen[c] = true;
                    prev[c] = Some(v);
                    queue.push_back(c);
                }
            }
        }
        Ok(None)
    }

    /// All DAGs Markov equivalent to `self`, with the default node limit.
    pub fn markov_equivalence_class(&self) -> Result<Vec<Dag>> {
        self.markov_equivalence_class_with_limit(DEFAULT_MEC_LIMIT)
    }

    /// Exhaustive orientation search over the skeleton. Partial orientations
    /// that already contain a directed cycle, a v-structure foreign to `self`,
    /// or that break one of `self`'s v-structures are pruned; every complete
    /// orientation is then checked with [`Dag::is_markov_equivalent`].
    ///
    /// Members are returned in lexicographic order of their orientation
    /// vector over the sorted skeleton (`false` = lower index points to
    /// higher index).
    pub fn markov_equivalence_class_with_limit(&self, limit: usize) -> Result<Vec<Dag>> {
        if self.num_vars > limit {
            return Err(Error::Capacity {
                what: "Markov equivalence class enumeration (variables)",
                requested: self.num_vars,
                limit,
            });
        }
        let skeleton: Vec<(usize, usize)> = self.skeleton().edges.into_iter().collect();
        let vs = self.v_structures();
        let mut search = OrientationSearch {
            reference: self,
            skeleton: &skeleton,
            v_structures: &vs,
            adjacency: vec![Vec::new(); self.num_vars],
            out: Vec::new(),
        };
        search.recurse(0)?;
        Ok(search.out)
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.num_vars {
            input(format!("variable {i} out of range for {} variables", self.num_vars))
        } else {
            Ok(())
        }
    }

    fn index_set(&self, items: &[usize]) -> Result<BTreeSet<usize>> {
        for &v in items {
            self.check_index(v)?;
        }
        Ok(items.iter().copied().collect())
    }
}

struct OrientationSearch<'a> {
    reference: &'a Dag,
    skeleton: &'a [(usize, usize)],
    v_structures: &'a BTreeSet<(usize, usize, usize)>,
    /// Directed edges chosen so far, as children lists.
    adjacency: Vec<Vec<usize>>,
    out: Vec<Dag>,
}

impl OrientationSearch<'_> {
    fn recurse(&mut self, pos: usize) -> Result<()> {
        if pos == self.skeleton.len() {
            let edges = self
                .adjacency
                .iter()
                .enumerate()
                .flat_map(|(i, cs)| cs.iter().map(move |&j| (i, j)));
            let g = Dag::new(self.reference.num_vars, edges.collect::<Vec<_>>())?;
            if g.is_markov_equivalent(self.reference)? {
                self.out.push(g);
            }
            return Ok(());
        }
        let (a, b) = self.skeleton[pos];
        for (from, to) in [(a, b), (b, a)] {
            if self.reaches(to, from) {
                continue;
            }
            self.adjacency[from].push(to);
            if self.consistent_at(to) {
                self.recurse(pos + 1)?;
            }
            self.adjacency[from].pop();
        }
        Ok(())
    }

    fn reaches(&self, from: usize, to: usize) -> bool {
        let mut seen = vec![false; self.adjacency.len()];
        let mut stack = vec![from];
        while let Some(v) = stack.pop() {
            if v == to {
                return true;
            }
            if !std::mem::replace(&mut seen[v], true) {
                stack.extend(self.adjacency[v].iter().copied());
            }
        }
        false
    }

    /// Checks v-structures centred on `k` among edges oriented so far.
    fn consistent_at(&self, k: usize) -> bool {
        let parents: Vec<usize> = (0..self.adjacency.len())
            .filter(|&p| self.adjacency[p].contains(&k))
            .collect();
        for (x, &i) in parents.iter().enumerate() {
            for &j in &parents[x + 1..] {
                if self.reference.adjacent(i, j) {
                    continue;
                }
                let key = (i.min(j), k, i.max(j));
                if !self.v_structures.contains(&key) {
                    return false;
                }
            }
        }
        // A reference v-structure at some collider must keep both arrows.
        for &(i, c, j) in self.v_structures {
            for (p, q) in [(i, c), (j, c)] {
                if self.adjacency[q].contains(&p) {
                    return false;
                }
            }
        }
        true
    }
}

/// Kahn's algorithm with a min-heap so ties resolve to the smallest index.
pub fn topological_sort(num_vars: usize, edges: &BTreeSet<(usize, usize)>) -> Result<Vec<usize>> {
    let mut indegree = vec![0usize; num_vars];
    let mut children = vec![Vec::new(); num_vars];
    for &(i, j) in edges {
        indegree[j] += 1;
        children[i].push(j);
    }
    let mut heap: BinaryHeap<Reverse<usize>> = (0..num_vars)
        .filter(|&v| indegree[v] == 0)
        .map(Reverse)
        .collect();
    let mut order = Vec::with_capacity(num_vars);
    while let Some(Reverse(v)) = heap.pop() {
        order.push(v);
        for &c in &children[v] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                heap.push(Reverse(c));
            }
        }
    }
    if order.len() != num_vars {
        return Err(Error::Structure("graph contains a directed cycle".into()));
    }
    Ok(order)
}

/// A set of unordered index pairs, stored normalized as `(min, max)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EdgeSet {
    num_vars: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl EdgeSet {
    pub fn new(num_vars: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut edges = BTreeSet::new();
        for (a, b) in pairs {
            if a >= num_vars || b >= num_vars {
                return input(format!("pair ({a}, {b}) out of range for {num_vars} variables"));
            }
            if a == b {
                return input(format!("pair ({a}, {b}) must have distinct members"));
            }
            edges.insert((a.min(b), a.max(b)));
        }
        Ok(EdgeSet { num_vars, edges })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn is_subset(&self, other: &EdgeSet) -> bool {
        self.edges.is_subset(&other.edges)
    }

    /// Endpoints of all pairs, ascending.
    pub fn vertices(&self) -> BTreeSet<usize> {
        self.edges.iter().flat_map(|&(a, b)| [a, b]).collect()
    }
}
