//! Instance generators: exact cover, maximum independent set (and the
//! vertex-cover transform feeding it), and the binary-tree family whose
//! saturated configurations are too many to enumerate.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::ReductionError;
use crate::model::{is_identifier, Monomer, SiteType, Tbn};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactCoverInstance {
    sets: Vec<BTreeSet<String>>,
}

impl ExactCoverInstance {
    pub fn new<I, S>(sets: I) -> Result<Self, ReductionError>
    where
        I: IntoIterator<Item = S>,
        S: IntoIterator,
        S::Item: Into<String>,
    {
        let sets: Vec<BTreeSet<String>> = sets
            .into_iter()
            .map(|s| s.into_iter().map(Into::into).collect())
            .collect();
        if sets.is_empty() {
            return Err(ReductionError::EmptyInstance);
        }
        for s in &sets {
            if s.is_empty() {
                return Err(ReductionError::Syntax("empty set".into()));
            }
            if let Some(bad) = s.iter().find(|e| !is_identifier(e)) {
                return Err(ReductionError::Syntax(format!("bad element name `{bad}`")));
            }
        }
        Ok(Self { sets })
    }

    /// Parses `"a,b;b,c;c"`: sets separated by `;`, elements by `,`.
    pub fn parse(text: &str) -> Result<Self, ReductionError> {
        Self::new(text.split(';').map(|set| {
            set.split(',')
                .map(str::trim)
                .filter(|e| !e.is_empty())
                .map(str::to_string)
                .collect::<Vec<_>>()
        }))
    }

    pub fn sets(&self) -> &[BTreeSet<String>] {
        &self.sets
    }

    /// `Y`, the union of all sets.
    pub fn universe(&self) -> BTreeSet<String> {
        self.sets.iter().flatten().cloned().collect()
    }

    /// `X' - Y`: the flattened multiset minus one copy of each element.
    pub fn surplus(&self) -> Vec<String> {
        let mut counts: BTreeMap<&String, usize> = BTreeMap::new();
        for e in self.sets.iter().flatten() {
            *counts.entry(e).or_default() += 1;
        }
        counts
            .into_iter()
            .flat_map(|(e, c)| std::iter::repeat_n(e.clone(), c - 1))
            .collect()
    }
}

/// `T_j(X)`: `j - 1` copies of the set monomers and the `Y*` monomer, plus a
/// single monomer holding every copy's `(X' - Y)*` sites. Copies are prefixed
/// `1_`, `2_`, ...; with `j = 2` the single copy is left unprefixed.
///
/// If the sets are pairwise disjoint, `X' - Y` is empty. A monomer without
/// sites is not allowed, so it is replaced by one inert site that has no
/// complement anywhere; such a monomer is always a polymer of its own, which
/// is exactly how an empty monomer would behave.
pub fn exact_cover_to_tbn(x: &ExactCoverInstance, j: usize) -> Result<Tbn, ReductionError> {
    if j < 2 {
        return Err(ReductionError::BadCopyCount(j));
    }
    let name = |copy: usize, e: &str| {
        if j == 2 {
            e.to_string()
        } else {
            format!("{copy}_{e}")
        }
    };
    let mut monomers = Vec::new();
    let mut merged = Vec::new();
    for copy in 1..j {
        for set in x.sets() {
            monomers.push(Monomer::new(
                set.iter().map(|e| SiteType::plain(name(copy, e))).collect(),
            ));
        }
        monomers.push(Monomer::new(
            x.universe()
                .iter()
                .map(|e| SiteType::starred(name(copy, e)))
                .collect(),
        ));
        merged.extend(x.surplus().iter().map(|e| SiteType::starred(name(copy, e))));
    }
    if merged.is_empty() {
        let mut inert = String::from("inert");
        while x.universe().contains(&inert) {
            inert.push('_');
        }
        merged.push(SiteType::plain(inert));
    }
    monomers.push(Monomer::new(merged));
    Ok(Tbn::new(monomers)?)
}

/// Simple undirected graph over named vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    vertices: Vec<String>,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    pub fn new<S: Into<String>>(
        vertices: impl IntoIterator<Item = S>,
    ) -> Result<Self, ReductionError> {
        let vertices: Vec<String> = vertices.into_iter().map(Into::into).collect();
        let mut seen = BTreeSet::new();
        for v in &vertices {
            if !is_identifier(v) || v.contains('-') || !seen.insert(v) {
                return Err(ReductionError::Syntax(format!(
                    "bad or repeated vertex name `{v}`"
                )));
            }
        }
        Ok(Self {
            vertices,
            edges: BTreeSet::new(),
        })
    }

    /// Parses `"a-b,b-c"`. Vertices are numbered in order of first mention.
    pub fn parse_edges(text: &str) -> Result<Self, ReductionError> {
        let mut pairs = Vec::new();
        let mut names: Vec<String> = Vec::new();
        for tok in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (u, v) = tok
                .split_once('-')
                .ok_or_else(|| ReductionError::Syntax(format!("edge `{tok}` lacks `-`")))?;
            let (u, v) = (u.trim().to_string(), v.trim().to_string());
            for w in [&u, &v] {
                if !names.contains(w) {
                    names.push(w.clone());
                }
            }
            pairs.push((u, v));
        }
        let mut g = Graph::new(names)?;
        for (u, v) in pairs {
            g.add_edge(&u, &v)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, u: &str, v: &str) -> Result<(), ReductionError> {
        let a = self.vertex(u)?;
        let b = self.vertex(v)?;
        self.add_edge_ids(a, b)
    }

    pub fn add_edge_ids(&mut self, a: usize, b: usize) -> Result<(), ReductionError> {
        for x in [a, b] {
            if x >= self.vertices.len() {
                return Err(ReductionError::UnknownVertex(x.to_string()));
            }
        }
        if a == b {
            return Err(ReductionError::SelfLoop(self.vertices[a].clone()));
        }
        self.edges.insert((a.min(b), a.max(b)));
        Ok(())
    }

    pub fn vertex(&self, name: &str) -> Result<usize, ReductionError> {
        self.vertices
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| ReductionError::UnknownVertex(name.to_string()))
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    /// Edges as `(u, v)` with `u < v`.
    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter_map(move |&(a, b)| {
            if a == v {
                Some(b)
            } else if b == v {
                Some(a)
            } else {
                None
            }
        })
    }

    fn edge_site(&self, (a, b): (usize, usize)) -> String {
        format!("{}-{}", self.vertices[a], self.vertices[b])
    }
}

/// The template construction: monomer 0 carries one site per edge, and the
/// monomer of vertex `v` carries the complement of every edge incident to
/// `v`. Returns the TBN and the monomer id of each vertex.
pub fn graph_mis_to_tbn(g: &Graph) -> Result<(Tbn, Vec<usize>), ReductionError> {
    if g.edges().is_empty() {
        return Err(ReductionError::Edgeless);
    }
    let mut monomers = vec![Monomer::labeled(
        "E",
        g.edges()
            .iter()
            .map(|&e| SiteType::plain(g.edge_site(e)))
            .collect(),
    )];
    let mut ids = Vec::with_capacity(g.len());
    for v in 0..g.len() {
        let sites: Vec<SiteType> = g
            .edges()
            .iter()
            .filter(|&&(a, b)| a == v || b == v)
            .map(|&e| SiteType::starred(g.edge_site(e)))
            .collect();
        if sites.is_empty() {
            // An isolated vertex: inert site, always free.
            monomers.push(Monomer::labeled(
                format!("m_{}", g.vertices()[v]),
                vec![SiteType::plain(format!("iso_{}", g.vertices()[v]))],
            ));
        } else {
            monomers.push(Monomer::labeled(format!("m_{}", g.vertices()[v]), sites));
        }
        ids.push(monomers.len() - 1);
    }
    Ok((Tbn::new(monomers)?, ids))
}

/// Duplicates `g` into `g ⊎ g'`, joins `w` to `u'` whenever `w` and `u` are
/// adjacent, and adds a vertex adjacent to `target` and `target'`. Returns
/// the new graph and the new vertex: `target` lies in some minimum vertex
/// cover of `g` iff the new vertex lies in some maximum independent set.
pub fn vc_member_to_mis_member(g: &Graph, target: usize) -> Result<(Graph, usize), ReductionError> {
    if target >= g.len() {
        return Err(ReductionError::UnknownVertex(target.to_string()));
    }
    let n = g.len();
    let mut names: Vec<String> = g.vertices().to_vec();
    names.extend(g.vertices().iter().map(|v| format!("{v}'")));
    let mut extra = format!("{}_dot", g.vertices()[target]);
    while names.contains(&extra) {
        extra.push('\'');
    }
    names.push(extra);
    let mut h = Graph::new(names)?;
    for &(a, b) in g.edges() {
        h.add_edge_ids(a, b)?;
        h.add_edge_ids(n + a, n + b)?;
        h.add_edge_ids(a, n + b)?;
        h.add_edge_ids(b, n + a)?;
    }
    h.add_edge_ids(2 * n, target)?;
    h.add_edge_ids(2 * n, n + target)?;
    Ok((h, 2 * n))
}

/// The binary-tree family: level `i` (`0..n`) has `2^(n-i-1)` monomers
/// `{d(i+1)*, d(i), d(i), m_j}` with a unique `m_j` each. Monomers are listed
/// root first, so `m1` is the root.
pub fn tree_tbn(n: usize) -> Result<Tbn, ReductionError> {
    if n == 0 || n > 24 {
        return Err(ReductionError::BadDepth);
    }
    let mut monomers = Vec::with_capacity((1 << n) - 1);
    let mut j = 1;
    for i in (0..n).rev() {
        for _ in 0..1usize << (n - i - 1) {
            monomers.push(Monomer::new(vec![
                SiteType::starred(format!("d{}", i + 1)),
                SiteType::plain(format!("d{i}")),
                SiteType::plain(format!("d{i}")),
                SiteType::plain(format!("m{j}")),
            ]));
            j += 1;
        }
    }
    Ok(Tbn::new(monomers)?)
}

/// [`tree_tbn`] with its monomers in a seeded random order.
pub fn tree_tbn_shuffled(n: usize, seed: u64) -> Result<Tbn, ReductionError> {
    let t = tree_tbn(n)?;
    let mut order: Vec<usize> = (0..t.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Ok(t.reordered(&order)?)
}
