//! Thermodynamic binding networks: site types, monomers, configurations and
//! the semantic predicates over them.
//!
//! A [`Tbn`] is an ordered multiset of [`Monomer`]s. Every site instance gets
//! a dense global [`SiteId`]; a [`Configuration`] is a matching over those ids
//! that only joins complementary site types. Polymers are the connected
//! components of the monomer graph induced by inter-monomer pairs.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::error::ModelError;
use crate::union_find::UnionFind;

/// A site type `name` or its complement `name*`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SiteType {
    name: String,
    starred: bool,
}

impl SiteType {
    pub fn new(name: impl Into<String>, starred: bool) -> Self {
        Self {
            name: name.into(),
            starred,
        }
    }

    pub fn plain(name: impl Into<String>) -> Self {
        Self::new(name, false)
    }

    pub fn starred(name: impl Into<String>) -> Self {
        Self::new(name, true)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_starred(&self) -> bool {
        self.starred
    }

    /// The complementary type. `t.complement().complement() == t`.
    pub fn complement(&self) -> SiteType {
        Self {
            name: self.name.clone(),
            starred: !self.starred,
        }
    }

    pub fn is_complement_of(&self, other: &SiteType) -> bool {
        self.name == other.name && self.starred != other.starred
    }
}

impl fmt::Display for SiteType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.starred {
            write!(f, "{}*", self.name)
        } else {
            f.write_str(&self.name)
        }
    }
}

/// Returns true for identifiers accepted as site or label names.
pub(crate) fn is_identifier(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | '\'' | '[' | ']'))
}

impl FromStr for SiteType {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, starred) = match s.strip_suffix('*') {
            Some(rest) => (rest, true),
            None => (s, false),
        };
        if !is_identifier(name) {
            return Err(ModelError::InvalidSiteType(s.to_string()));
        }
        Ok(Self::new(name, starred))
    }
}

/// A monomer: an unstructured multiset of sites, with an optional label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monomer {
    pub label: Option<String>,
    pub sites: Vec<SiteType>,
}

impl Monomer {
    pub fn new(sites: Vec<SiteType>) -> Self {
        Self { label: None, sites }
    }

    pub fn labeled(label: impl Into<String>, sites: Vec<SiteType>) -> Self {
        Self {
            label: Some(label.into()),
            sites,
        }
    }

    /// Parses a space separated site list such as `"a b* c"`.
    pub fn parse_sites(text: &str) -> Result<Self, ModelError> {
        let sites = text
            .split_whitespace()
            .map(SiteType::from_str)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(sites))
    }

    /// True if two sites of this monomer are complementary.
    pub fn is_self_complementary(&self) -> bool {
        self.sites
            .iter()
            .any(|s| self.sites.iter().any(|t| s.is_complement_of(t)))
    }

    /// The sites as a sorted multiset, for order-insensitive comparison.
    pub fn site_multiset(&self) -> Vec<SiteType> {
        let mut v = self.sites.clone();
        v.sort();
        v
    }
}

impl fmt::Display for Monomer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, s) in self.sites.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str("}")
    }
}

/// Dense global index of a site instance within a [`Tbn`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SiteId(pub usize);

/// Position of a site instance: monomer id and slot within that monomer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SiteRef {
    pub monomer: usize,
    pub slot: usize,
}

impl fmt::Display for SiteRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.monomer, self.slot)
    }
}

impl FromStr for SiteRef {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ModelError::InvalidSiteRef(s.to_string());
        let (m, slot) = s.split_once('.').ok_or_else(bad)?;
        Ok(SiteRef {
            monomer: m.parse().map_err(|_| bad())?,
            slot: slot.parse().map_err(|_| bad())?,
        })
    }
}

/// A thermodynamic binding network.
///
/// Monomer order is significant: it is the canonical ordering used by the
/// encoder, and ids are `0..n` in that order. Duplicate monomers are distinct
/// instances.
#[derive(Clone, Debug)]
pub struct Tbn {
    monomers: Vec<Monomer>,
    site_refs: Vec<SiteRef>,
    site_offset: Vec<usize>,
    // Interned site type per site instance.
    site_kind: Vec<usize>,
    kinds: Vec<SiteType>,
    complement_kind: Vec<Option<usize>>,
    kind_count: Vec<usize>,
    sites_of_kind: Vec<Vec<SiteId>>,
}

impl Default for Tbn {
    fn default() -> Self {
        Self::empty()
    }
}

impl PartialEq for Tbn {
    fn eq(&self, other: &Self) -> bool {
        self.monomers == other.monomers
    }
}

impl Eq for Tbn {}

impl Tbn {
    pub fn empty() -> Self {
        Self::build(Vec::new())
    }

    /// Builds a TBN, rejecting monomers without sites.
    pub fn new(monomers: Vec<Monomer>) -> Result<Self, ModelError> {
        if let Some(i) = monomers.iter().position(|m| m.sites.is_empty()) {
            return Err(ModelError::EmptyMonomer(i));
        }
        Ok(Self::build(monomers))
    }

    /// Builds a TBN from site lists written as text, e.g. `["b", "b c", "a a b* c*"]`.
    pub fn from_site_lists<S: AsRef<str>>(lists: &[S]) -> Result<Self, ModelError> {
        let monomers = lists
            .iter()
            .map(|l| Monomer::parse_sites(l.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(monomers)
    }

    fn build(monomers: Vec<Monomer>) -> Self {
        let mut site_refs = Vec::new();
        let mut site_offset = Vec::with_capacity(monomers.len() + 1);
        let mut site_kind = Vec::new();
        let mut kinds: Vec<SiteType> = Vec::new();
        let mut kind_index: HashMap<SiteType, usize> = HashMap::new();
        for (m, mono) in monomers.iter().enumerate() {
            site_offset.push(site_refs.len());
            for (slot, st) in mono.sites.iter().enumerate() {
                site_refs.push(SiteRef { monomer: m, slot });
                let k = *kind_index.entry(st.clone()).or_insert_with(|| {
                    kinds.push(st.clone());
                    kinds.len() - 1
                });
                site_kind.push(k);
            }
        }
        site_offset.push(site_refs.len());
        let complement_kind = kinds
            .iter()
            .map(|k| kind_index.get(&k.complement()).copied())
            .collect();
        let mut kind_count = vec![0; kinds.len()];
        let mut sites_of_kind = vec![Vec::new(); kinds.len()];
        for (i, &k) in site_kind.iter().enumerate() {
            kind_count[k] += 1;
            sites_of_kind[k].push(SiteId(i));
        }
        Self {
            monomers,
            site_refs,
            site_offset,
            site_kind,
            kinds,
            complement_kind,
            kind_count,
            sites_of_kind,
        }
    }

    pub fn monomers(&self) -> &[Monomer] {
        &self.monomers
    }

    pub fn monomer(&self, id: usize) -> &Monomer {
        &self.monomers[id]
    }

    pub fn len(&self) -> usize {
        self.monomers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomers.is_empty()
    }

    pub fn site_count(&self) -> usize {
        self.site_refs.len()
    }

    pub fn site_ref(&self, s: SiteId) -> SiteRef {
        self.site_refs[s.0]
    }

    pub fn site_id(&self, r: SiteRef) -> Option<SiteId> {
        let mono = self.monomers.get(r.monomer)?;
        (r.slot < mono.sites.len()).then(|| SiteId(self.site_offset[r.monomer] + r.slot))
    }

    pub fn monomer_of(&self, s: SiteId) -> usize {
        self.site_refs[s.0].monomer
    }

    pub fn site_type(&self, s: SiteId) -> &SiteType {
        &self.kinds[self.site_kind[s.0]]
    }

    /// Global ids of the sites of monomer `m`.
    pub fn sites_of(&self, m: usize) -> impl Iterator<Item = SiteId> + '_ {
        (self.site_offset[m]..self.site_offset[m + 1]).map(SiteId)
    }

    /// Number of site instances of type `t` in the whole TBN.
    pub fn count(&self, t: &SiteType) -> usize {
        self.kinds
            .iter()
            .position(|k| k == t)
            .map_or(0, |k| self.kind_count[k])
    }

    fn kind_is_limiting(&self, k: usize) -> bool {
        let comp = self.complement_kind[k].map_or(0, |c| self.kind_count[c]);
        comp >= self.kind_count[k]
    }

    /// Site types present in the TBN whose complement occurs at least as
    /// often as they do.
    pub fn limiting_site_types(&self) -> BTreeSet<SiteType> {
        (0..self.kinds.len())
            .filter(|&k| self.kind_is_limiting(k))
            .map(|k| self.kinds[k].clone())
            .collect()
    }

    pub fn is_limiting_site(&self, s: SiteId) -> bool {
        self.kind_is_limiting(self.site_kind[s.0])
    }

    /// All site instances complementary to `s`, including ones on the same
    /// monomer, in increasing id order.
    pub fn compatible_sites(&self, s: SiteId) -> &[SiteId] {
        match self.complement_kind[self.site_kind[s.0]] {
            Some(c) => &self.sites_of_kind[c],
            None => &[],
        }
    }

    /// Every unordered complementary site pair `(s, t)` with `s < t`.
    pub fn complementary_pairs(&self) -> Vec<(SiteId, SiteId)> {
        let mut out = Vec::new();
        for s in 0..self.site_count() {
            let s = SiteId(s);
            out.extend(
                self.compatible_sites(s)
                    .iter()
                    .filter(|&&t| t > s)
                    .map(|&t| (s, t)),
            );
        }
        out
    }

    /// True if some monomer carries two complementary sites.
    pub fn has_self_complementary_monomer(&self) -> bool {
        self.monomers.iter().any(Monomer::is_self_complementary)
    }

    /// Strict mode: rejects TBNs where a monomer could pair with itself.
    pub fn check_strict(&self) -> Result<(), ModelError> {
        match self
            .monomers
            .iter()
            .position(Monomer::is_self_complementary)
        {
            Some(i) => Err(ModelError::SelfComplementary(i)),
            None => Ok(()),
        }
    }

    pub fn is_valid_configuration(&self, c: &Configuration) -> bool {
        let mut used = vec![false; self.site_count()];
        for &(s, t) in c.pairs() {
            if s.0 >= self.site_count() || t.0 >= self.site_count() || s == t {
                return false;
            }
            if !self.site_type(s).is_complement_of(self.site_type(t)) {
                return false;
            }
            if std::mem::replace(&mut used[s.0], true) || std::mem::replace(&mut used[t.0], true) {
                return false;
            }
        }
        true
    }

    /// Saturation via the limiting-site criterion: every site whose type is
    /// limiting is paired.
    pub fn is_saturated(&self, c: &Configuration) -> bool {
        let paired = c.paired_mask(self.site_count());
        (0..self.site_count()).all(|s| paired[s] || !self.is_limiting_site(SiteId(s)))
    }

    /// Saturation via direct maximality: no two unpaired sites are
    /// complementary.
    pub fn is_maximal(&self, c: &Configuration) -> bool {
        let paired = c.paired_mask(self.site_count());
        (0..self.site_count())
            .all(|s| paired[s] || self.compatible_sites(SiteId(s)).iter().all(|t| paired[t.0]))
    }

    /// Connected components over inter-monomer pairs.
    pub fn polymers(&self, c: &Configuration) -> PolymerPartition {
        let mut uf = UnionFind::new(self.len());
        for &(s, t) in c.pairs() {
            uf.union(self.monomer_of(s), self.monomer_of(t));
        }
        PolymerPartition::from_union_find(&mut uf)
    }

    /// True if monomer `m` has no pair to a different monomer.
    pub fn is_free(&self, c: &Configuration, m: usize) -> bool {
        c.pairs().iter().all(|&(s, t)| {
            let (a, b) = (self.monomer_of(s), self.monomer_of(t));
            a == b || (a != m && b != m)
        })
    }

    /// The TBN with the single instance `m` removed; later ids shift down.
    pub fn remove_monomer(&self, m: usize) -> Result<Tbn, ModelError> {
        if m >= self.len() {
            return Err(ModelError::InvalidMonomer {
                id: m,
                len: self.len(),
            });
        }
        let mut monomers = self.monomers.clone();
        monomers.remove(m);
        Ok(Self::build(monomers))
    }

    /// The TBN with monomers permuted: new position `i` holds old monomer `order[i]`.
    pub fn reordered(&self, order: &[usize]) -> Result<Tbn, ModelError> {
        let mut seen = vec![false; self.len()];
        if order.len() != self.len()
            || order
                .iter()
                .any(|&i| i >= self.len() || std::mem::replace(&mut seen[i], true))
        {
            return Err(ModelError::InvalidOrdering);
        }
        Ok(Self::build(
            order.iter().map(|&i| self.monomers[i].clone()).collect(),
        ))
    }

    /// Concatenation of two TBNs as a multiset union.
    pub fn union(&self, other: &Tbn) -> Tbn {
        let mut monomers = self.monomers.clone();
        monomers.extend(other.monomers.iter().cloned());
        Self::build(monomers)
    }

    /// Resolves a monomer selector: a 0-based index or a unique label.
    pub fn find_monomer(&self, selector: &str) -> Result<usize, ModelError> {
        let matches: Vec<usize> = self
            .monomers
            .iter()
            .enumerate()
            .filter(|(_, m)| m.label.as_deref() == Some(selector))
            .map(|(i, _)| i)
            .collect();
        match matches.as_slice() {
            [i] => Ok(*i),
            [] => match selector.parse::<usize>() {
                Ok(i) if i < self.len() => Ok(i),
                _ => Err(ModelError::UnknownMonomer(selector.to_string())),
            },
            _ => Err(ModelError::AmbiguousLabel(selector.to_string())),
        }
    }

    /// Display name for monomer `m`: its label, or its sites.
    pub fn monomer_name(&self, m: usize) -> String {
        let mono = &self.monomers[m];
        mono.label.clone().unwrap_or_else(|| mono.to_string())
    }
}

/// A matching among complementary site instances.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Configuration {
    pairs: BTreeSet<(SiteId, SiteId)>,
}

impl Configuration {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (SiteId, SiteId)>) -> Self {
        let mut c = Self::new();
        for (s, t) in pairs {
            c.insert(s, t);
        }
        c
    }

    /// Adds the unordered pair `{s, t}`.
    pub fn insert(&mut self, s: SiteId, t: SiteId) {
        self.pairs.insert(if s <= t { (s, t) } else { (t, s) });
    }

    pub fn remove(&mut self, s: SiteId, t: SiteId) {
        self.pairs.remove(&if s <= t { (s, t) } else { (t, s) });
    }

    pub fn pairs(&self) -> &BTreeSet<(SiteId, SiteId)> {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    fn paired_mask(&self, sites: usize) -> Vec<bool> {
        let mut paired = vec![false; sites];
        for &(s, t) in &self.pairs {
            if s.0 < sites {
                paired[s.0] = true;
            }
            if t.0 < sites {
                paired[t.0] = true;
            }
        }
        paired
    }
}

/// Partition of monomer ids into polymers.
///
/// Groups are sorted internally and ordered by their smallest member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolymerPartition {
    groups: Vec<Vec<usize>>,
}

impl PolymerPartition {
    fn from_union_find(uf: &mut UnionFind) -> Self {
        let mut by_root: HashMap<usize, Vec<usize>> = HashMap::new();
        for m in 0..uf.len() {
            by_root.entry(uf.find(m)).or_default().push(m);
        }
        let mut groups: Vec<Vec<usize>> = by_root.into_values().collect();
        groups.sort_by_key(|g| g[0]);
        Self { groups }
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn group_of(&self, m: usize) -> Option<usize> {
        self.groups.iter().position(|g| g.contains(&m))
    }
}
