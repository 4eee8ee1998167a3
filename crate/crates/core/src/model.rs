//! Set systems (hypergraphs), their ingestion, and the condensation that
//! shrinks them before support extraction.
//!
//! Elements and sets are addressed by dense ids in document order. Every set
//! keeps its members sorted by [`ElementId`], so two systems describing the
//! same membership relation in the same document order compare equal.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ElementId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SetId(pub usize);

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Display for SetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InputError {
    #[error("malformed document at line {line}, column {column}: {message}")]
    Malformed {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("malformed CSV at {location}: {message}")]
    MalformedCsv { location: String, message: String },
    #[error("empty name at {location}")]
    EmptyName { location: String },
    #[error("duplicate set name {name:?} at {location}")]
    DuplicateSet { name: String, location: String },
    #[error("duplicate element {name:?} at {location}")]
    DuplicateElement { name: String, location: String },
    #[error("element {name:?} at {location} belongs to no set")]
    ElementWithoutSet { name: String, location: String },
    #[error("set {name:?} has {size} element(s); at least 2 are required")]
    SetTooSmall { name: String, size: usize },
    #[error("the input has no sets")]
    Empty,
    #[error("set system is disconnected: {first:?} and {second:?} share no chain of common elements")]
    Disconnected { first: String, second: String },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown element {0}")]
pub struct UnknownElement(pub ElementId);

/// Supported input document formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Json,
    /// One row per element: element name, then the names of its sets.
    Csv { has_header: bool },
}

/// A validated hypergraph: named elements, named sets, and membership.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetSystem {
    element_names: Vec<String>,
    set_names: Vec<String>,
    members: Vec<Vec<ElementId>>,
    memberships: Vec<Vec<SetId>>,
}

impl SetSystem {
    /// Builds and validates a system from `(set name, element names)` pairs.
    /// Elements are numbered by first appearance.
    pub fn from_named_sets<S, E, I>(sets: I) -> Result<Self, InputError>
    where
        S: AsRef<str>,
        E: AsRef<str>,
        I: IntoIterator<Item = (S, Vec<E>)>,
    {
        let mut element_index: HashMap<String, ElementId> = HashMap::new();
        let mut element_names = Vec::new();
        let mut set_names = Vec::new();
        let mut seen_sets = HashSet::new();
        let mut members = Vec::new();
        for (set, elems) in sets {
            let set = set.as_ref().trim().to_string();
            if set.is_empty() {
                return Err(InputError::EmptyName {
                    location: format!("set #{}", set_names.len() + 1),
                });
            }
            if !seen_sets.insert(set.clone()) {
                return Err(InputError::DuplicateSet {
                    location: format!("set #{}", set_names.len() + 1),
                    name: set,
                });
            }
            let mut list = Vec::new();
            let mut in_set = HashSet::new();
            for (pos, e) in elems.iter().enumerate() {
                let name = e.as_ref().trim().to_string();
                if name.is_empty() {
                    return Err(InputError::EmptyName {
                        location: format!("set {set:?}, entry {}", pos + 1),
                    });
                }
                if !in_set.insert(name.clone()) {
                    return Err(InputError::DuplicateElement {
                        location: format!("set {set:?}, entry {}", pos + 1),
                        name,
                    });
                }
                let id = *element_index.entry(name.clone()).or_insert_with(|| {
                    element_names.push(name);
                    ElementId(element_names.len() - 1)
                });
                list.push(id);
            }
            set_names.push(set);
            members.push(list);
        }
        let system = Self::from_parts(element_names, set_names, members);
        system.validate()?;
        Ok(system)
    }

    /// Assembles a system without validation. Member lists are sorted and the
    /// per-element memberships derived.
    pub(crate) fn from_parts(
        element_names: Vec<String>,
        set_names: Vec<String>,
        mut members: Vec<Vec<ElementId>>,
    ) -> Self {
        let mut memberships = vec![Vec::new(); element_names.len()];
        for (s, list) in members.iter_mut().enumerate() {
            list.sort_unstable();
            for e in list.iter() {
                memberships[e.0].push(SetId(s));
            }
        }
        Self {
            element_names,
            set_names,
            members,
            memberships,
        }
    }

    fn validate(&self) -> Result<(), InputError> {
        if self.set_names.is_empty() {
            return Err(InputError::Empty);
        }
        for (s, list) in self.members.iter().enumerate() {
            if list.len() < 2 {
                return Err(InputError::SetTooSmall {
                    name: self.set_names[s].clone(),
                    size: list.len(),
                });
            }
        }
        for (e, sets) in self.memberships.iter().enumerate() {
            if sets.is_empty() {
                return Err(InputError::ElementWithoutSet {
                    name: self.element_names[e].clone(),
                    location: format!("element #{}", e + 1),
                });
            }
        }
        let comp = self.set_components();
        if let Some(s) = (1..comp.len()).find(|&s| comp[s] != comp[0]) {
            return Err(InputError::Disconnected {
                first: self.set_names[0].clone(),
                second: self.set_names[s].clone(),
            });
        }
        Ok(())
    }

    /// Connected-component label per set in the set intersection graph.
    fn set_components(&self) -> Vec<usize> {
        let n = self.set_names.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for sets in &self.memberships {
            for w in sets.windows(2) {
                let a = find(&mut parent, w[0].0);
                let b = find(&mut parent, w[1].0);
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        (0..n).map(|s| find(&mut parent, s)).collect()
    }

    pub fn is_connected(&self) -> bool {
        let comp = self.set_components();
        comp.iter().all(|&c| c == comp[0])
    }

    pub fn element_count(&self) -> usize {
        self.element_names.len()
    }

    pub fn set_count(&self) -> usize {
        self.set_names.len()
    }

    pub fn element_name(&self, e: ElementId) -> &str {
        &self.element_names[e.0]
    }

    pub fn element_names(&self) -> &[String] {
        &self.element_names
    }

    pub fn set_name(&self, s: SetId) -> &str {
        &self.set_names[s.0]
    }

    pub fn set_names(&self) -> &[String] {
        &self.set_names
    }

    pub fn elements(&self) -> impl Iterator<Item = ElementId> + '_ {
        (0..self.element_names.len()).map(ElementId)
    }

    pub fn sets(&self) -> impl Iterator<Item = SetId> + '_ {
        (0..self.set_names.len()).map(SetId)
    }

    /// Members of a set, ascending by id.
    pub fn members(&self, s: SetId) -> &[ElementId] {
        &self.members[s.0]
    }

    /// Sets containing an element, ascending by id.
    pub fn memberships(&self, e: ElementId) -> &[SetId] {
        &self.memberships[e.0]
    }

    pub fn degree(&self, e: ElementId) -> usize {
        self.memberships[e.0].len()
    }

    pub fn contains(&self, s: SetId, e: ElementId) -> bool {
        self.memberships[e.0].binary_search(&s).is_ok()
    }

    pub fn find_element(&self, name: &str) -> Option<ElementId> {
        self.element_names.iter().position(|n| n == name).map(ElementId)
    }

    pub fn find_set(&self, name: &str) -> Option<SetId> {
        self.set_names.iter().position(|n| n == name).map(SetId)
    }

    fn check(&self, e: ElementId) -> Result<(), UnknownElement> {
        if e.0 < self.element_names.len() {
            Ok(())
        } else {
            Err(UnknownElement(e))
        }
    }

    /// Number of sets both elements belong to.
    pub fn similarity(&self, u: ElementId, v: ElementId) -> Result<usize, UnknownElement> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.similarity_unchecked(u, v))
    }

    pub(crate) fn similarity_unchecked(&self, u: ElementId, v: ElementId) -> usize {
        let (a, b) = (&self.memberships[u.0], &self.memberships[v.0]);
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }

    /// Incidence row of an element: bit `i` set iff the element is in set `i`.
    pub fn signature(&self, e: ElementId) -> Result<MembershipSignature, UnknownElement> {
        self.check(e)?;
        Ok(self.signature_unchecked(e))
    }

    pub(crate) fn signature_unchecked(&self, e: ElementId) -> MembershipSignature {
        let mut sig = MembershipSignature::zeros(self.set_count());
        for s in &self.memberships[e.0] {
            sig.set(s.0);
        }
        sig
    }

    /// Serializes to the JSON input schema.
    pub fn to_json(&self) -> String {
        let mut map = serde_json::Map::new();
        for s in self.sets() {
            let names: Vec<serde_json::Value> = self
                .members(s)
                .iter()
                .map(|&e| serde_json::Value::String(self.element_name(e).to_string()))
                .collect();
            map.insert(self.set_name(s).to_string(), serde_json::Value::Array(names));
        }
        let mut root = serde_json::Map::new();
        root.insert("sets".into(), serde_json::Value::Object(map));
        serde_json::to_string_pretty(&serde_json::Value::Object(root)).expect("json")
    }
}

/// A fixed-length bit vector over the sets of a system.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MembershipSignature {
    len: usize,
    words: Vec<u64>,
}

impl MembershipSignature {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn set(&mut self, i: usize) {
        assert!(i < self.len);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn get(&self, i: usize) -> bool {
        i < self.len && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of differing bits; the squared Euclidean distance of the 0/1 vectors.
    pub fn hamming(&self, other: &Self) -> usize {
        assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    pub fn to_bits(&self) -> Vec<u8> {
        (0..self.len).map(|i| self.get(i) as u8).collect()
    }
}

/// Reads a set system document.
pub fn parse_set_system(bytes: &[u8], format: InputFormat) -> Result<SetSystem, InputError> {
    match format {
        InputFormat::Json => parse_json(bytes),
        InputFormat::Csv { has_header } => parse_csv(bytes, has_header),
    }
}

struct OrderedSets(Vec<(String, Vec<String>)>);

impl<'de> Deserialize<'de> for OrderedSets {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = OrderedSets;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object mapping set names to arrays of element names")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<OrderedSets, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, Vec<String>>()? {
                    out.push((k, v));
                }
                Ok(OrderedSets(out))
            }
        }
        d.deserialize_map(V)
    }
}

#[derive(Deserialize)]
struct JsonDoc {
    sets: OrderedSets,
}

fn parse_json(bytes: &[u8]) -> Result<SetSystem, InputError> {
    let doc: JsonDoc = serde_json::from_slice(bytes).map_err(|e| InputError::Malformed {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    SetSystem::from_named_sets(doc.sets.0)
}

fn parse_csv(bytes: &[u8], has_header: bool) -> Result<SetSystem, InputError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .from_reader(bytes);
    let mut sets: Vec<(String, Vec<String>)> = Vec::new();
    let mut set_index: HashMap<String, usize> = HashMap::new();
    let mut seen = HashSet::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1 + has_header as usize;
        let record = record.map_err(|e| InputError::MalformedCsv {
            location: format!("row {row}"),
            message: e.to_string(),
        })?;
        let mut fields = record.iter().map(str::trim);
        let element = match fields.next() {
            Some(e) if !e.is_empty() => e.to_string(),
            _ => {
                // blank lines are tolerated
                if record.iter().all(|f| f.trim().is_empty()) {
                    continue;
                }
                return Err(InputError::EmptyName {
                    location: format!("row {row}, column 1"),
                });
            }
        };
        if !seen.insert(element.clone()) {
            return Err(InputError::DuplicateElement {
                name: element,
                location: format!("row {row}"),
            });
        }
        let mut any = false;
        let mut row_sets = HashSet::new();
        for set in fields.filter(|f| !f.is_empty()) {
            if !row_sets.insert(set) {
                continue;
            }
            any = true;
            let idx = *set_index.entry(set.to_string()).or_insert_with(|| {
                sets.push((set.to_string(), Vec::new()));
                sets.len() - 1
            });
            sets[idx].1.push(element.clone());
        }
        if !any {
            return Err(InputError::ElementWithoutSet {
                name: element,
                location: format!("row {row}"),
            });
        }
    }
    SetSystem::from_named_sets(sets)
}

/// A system with single-set elements set aside and equal-signature elements
/// merged, plus the bookkeeping to undo both.
#[derive(Debug, Clone, PartialEq)]
pub struct CondensedSystem {
    pub source: SetSystem,
    /// The reduced system. Its elements are representatives named after their
    /// first merged member.
    pub kernel: SetSystem,
    /// Kernel element id → source elements it stands for, ascending.
    pub merge_map: Vec<Vec<ElementId>>,
    /// Set id → source elements removed because they belong to that set only.
    pub singles_map: Vec<Vec<ElementId>>,
}

impl CondensedSystem {
    /// Source elements represented by a kernel vertex.
    pub fn expansion(&self, k: ElementId) -> &[ElementId] {
        &self.merge_map[k.0]
    }

    /// Rebuilds the source system from kernel, merges and singles.
    pub fn expand(&self) -> SetSystem {
        let mut members: Vec<Vec<ElementId>> = vec![Vec::new(); self.kernel.set_count()];
        for s in self.kernel.sets() {
            for &k in self.kernel.members(s) {
                members[s.0].extend_from_slice(&self.merge_map[k.0]);
            }
            members[s.0].extend_from_slice(&self.singles_map[s.0]);
        }
        SetSystem::from_parts(
            self.source.element_names.clone(),
            self.kernel.set_names.clone(),
            members,
        )
    }
}

/// Condenses a system: drops elements in exactly one set and merges elements
/// with identical memberships.
///
/// A set left with fewer than two kernel vertices keeps its lexicographically
/// smallest single-set elements until it has two (or runs out of them).
pub fn condense(s: &SetSystem) -> CondensedSystem {
    let mut groups: BTreeMap<&[SetId], Vec<ElementId>> = BTreeMap::new();
    for e in s.elements() {
        if s.degree(e) >= 2 {
            groups.entry(s.memberships(e)).or_default().push(e);
        }
    }
    // kernel vertex for each multi-set group, keyed by its first member
    let mut reps: Vec<Vec<ElementId>> = groups.into_values().collect();

    let mut singles_map: Vec<Vec<ElementId>> = vec![Vec::new(); s.set_count()];
    for set in s.sets() {
        let multi_groups = reps
            .iter()
            .filter(|g| s.contains(set, g[0]))
            .count();
        let mut singles: Vec<ElementId> = s
            .members(set)
            .iter()
            .copied()
            .filter(|&e| s.degree(e) == 1)
            .collect();
        let keep = 2usize.saturating_sub(multi_groups).min(singles.len());
        if keep > 0 {
            let mut by_name = singles.clone();
            by_name.sort_by(|a, b| s.element_name(*a).cmp(s.element_name(*b)).then(a.cmp(b)));
            let kept: Vec<ElementId> = by_name[..keep].to_vec();
            singles.retain(|e| !kept.contains(e));
            reps.extend(kept.into_iter().map(|e| vec![e]));
        }
        singles_map[set.0] = singles;
    }
    reps.sort_by_key(|g| g[0]);

    let names = reps.iter().map(|g| s.element_name(g[0]).to_string()).collect();
    let mut members = vec![Vec::new(); s.set_count()];
    for (k, g) in reps.iter().enumerate() {
        for set in s.memberships(g[0]) {
            members[set.0].push(ElementId(k));
        }
    }
    let kernel = SetSystem::from_parts(names, s.set_names.clone(), members);
    CondensedSystem {
        source: s.clone(),
        kernel,
        merge_map: reps,
        singles_map,
    }
}
