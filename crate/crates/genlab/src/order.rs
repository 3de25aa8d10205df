//! Finite partial orders: compatibility, density, the perp/regular-closure
//! operators, prefilters and filters, genericity, and separativity.
//!
//! Conventions follow forcing practice: `q <= p` reads "q extends p" (q is
//! the stronger condition). `below(p)` is the downset of extensions of `p`,
//! `above(p)` the upset. Elements carry a canonical total order (insertion
//! order) used for all deterministic tie-breaking.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;

/// A subset of a poset's elements, bitmask semantics over the canonical order.
pub type ElementSet = BitSet;

/// An ordered list of subsets; the order is the enumeration order used by
/// generic construction.
pub type DenseFamily = Vec<ElementSet>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrderError {
    Empty,
    DuplicateElement(String),
    UnknownElement(String),
    NotAntisymmetric(String, String),
    NotTransitive(String, String, String),
    NotAPrefilter,
    NoTopElement,
    BadSubset,
}

impl fmt::Display for OrderError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrderError::Empty => write!(f, "poset must be nonempty"),
            OrderError::DuplicateElement(e) => write!(f, "duplicate element {e:?}"),
            OrderError::UnknownElement(e) => write!(f, "unknown element {e:?}"),
            OrderError::NotAntisymmetric(p, q) => {
                write!(
                    f,
                    "antisymmetry violated: {p:?} <= {q:?} and {q:?} <= {p:?}"
                )
            }
            OrderError::NotTransitive(p, q, r) => write!(
                f,
                "transitivity violated: {p:?} <= {q:?} <= {r:?} but not {p:?} <= {r:?}"
            ),
            OrderError::NotAPrefilter => write!(f, "not a prefilter"),
            OrderError::NoTopElement => write!(f, "poset has no maximum element"),
            OrderError::BadSubset => write!(f, "subset universe does not match poset"),
        }
    }
}

impl std::error::Error for OrderError {}

/// JSON form: `{ "elements": [...], "leq": [["p","q"], ...] }`, with the
/// reflexive closure applied on load.
#[derive(Serialize, Deserialize)]
pub struct PosetJson {
    pub elements: Vec<String>,
    pub leq: Vec<(String, String)>,
}

#[derive(Clone)]
pub struct FinitePoset {
    names: Vec<String>,
    index: HashMap<String, usize>,
    below: Vec<BitSet>, // below[p] = { q : q <= p }
    above: Vec<BitSet>, // above[p] = { q : p <= q }
}

impl fmt::Debug for FinitePoset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FinitePoset({:?})", self.names)
    }
}

impl FinitePoset {
    /// Builds a poset from element names and `(p, q)` pairs meaning `p <= q`.
    /// The reflexive closure is applied; antisymmetry and transitivity are
    /// checked, not repaired.
    pub fn new<S: Into<String>>(
        elements: Vec<S>,
        leq_pairs: &[(usize, usize)],
    ) -> Result<Self, OrderError> {
        let names: Vec<String> = elements.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(OrderError::Empty);
        }
        let mut index = HashMap::new();
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(OrderError::DuplicateElement(n.clone()));
            }
        }
        let n = names.len();
        let mut above = vec![BitSet::new(n); n];
        for &(p, q) in leq_pairs {
            if p >= n || q >= n {
                return Err(OrderError::UnknownElement(format!("#{}", p.max(q))));
            }
            above[p].insert(q);
        }
        for (i, up) in above.iter_mut().enumerate() {
            up.insert(i);
        }
        // antisymmetry
        for p in 0..n {
            for q in (p + 1)..n {
                if above[p].contains(q) && above[q].contains(p) {
                    return Err(OrderError::NotAntisymmetric(
                        names[p].clone(),
                        names[q].clone(),
                    ));
                }
            }
        }
        // transitivity
        for p in 0..n {
            for q in 0..n {
                if p != q && above[p].contains(q) && !above[q].is_subset(&above[p]) {
                    let r = above[q]
                        .iter()
                        .find(|&r| !above[p].contains(r))
                        .expect("witness exists");
                    return Err(OrderError::NotTransitive(
                        names[p].clone(),
                        names[q].clone(),
                        names[r].clone(),
                    ));
                }
            }
        }
        let mut below = vec![BitSet::new(n); n];
        for p in 0..n {
            for q in above[p].iter() {
                below[q].insert(p);
            }
        }
        Ok(FinitePoset {
            names,
            index,
            below,
            above,
        })
    }

    pub fn from_named_pairs<S: Into<String>>(
        elements: Vec<S>,
        leq_pairs: &[(&str, &str)],
    ) -> Result<Self, OrderError> {
        let names: Vec<String> = elements.into_iter().map(Into::into).collect();
        let mut index = HashMap::new();
        for (i, n) in names.iter().enumerate() {
            index.insert(n.clone(), i);
        }
        let mut pairs = Vec::with_capacity(leq_pairs.len());
        for (p, q) in leq_pairs {
            let pi = *index
                .get(*p)
                .ok_or_else(|| OrderError::UnknownElement(p.to_string()))?;
            let qi = *index
                .get(*q)
                .ok_or_else(|| OrderError::UnknownElement(q.to_string()))?;
            pairs.push((pi, qi));
        }
        Self::new(names, &pairs)
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let parsed: PosetJson = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let refs: Vec<(&str, &str)> = parsed
            .leq
            .iter()
            .map(|(p, q)| (p.as_str(), q.as_str()))
            .collect();
        Self::from_named_pairs(parsed.elements.clone(), &refs).map_err(|e| e.to_string())
    }

    pub fn to_json(&self) -> PosetJson {
        let mut leq = Vec::new();
        for p in 0..self.len() {
            for q in self.above[p].iter() {
                if p != q {
                    leq.push((self.names[p].clone(), self.names[q].clone()));
                }
            }
        }
        PosetJson {
            elements: self.names.clone(),
            leq,
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        false // nonempty by construction
    }

    pub fn name(&self, p: usize) -> &str {
        &self.names[p]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn element(&self, name: &str) -> Result<usize, OrderError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| OrderError::UnknownElement(name.to_string()))
    }

    pub fn leq(&self, p: usize, q: usize) -> bool {
        self.above[p].contains(q)
    }

    /// `⌈p⌉`: the set of extensions of `p`.
    pub fn below(&self, p: usize) -> &BitSet {
        &self.below[p]
    }

    /// `⌊p⌋`: the set of conditions weaker than `p`.
    pub fn above(&self, p: usize) -> &BitSet {
        &self.above[p]
    }

    /// `⌈X⌉`: everything extending some member of `X`.
    pub fn downset(&self, x: &BitSet) -> BitSet {
        self.check(x);
        let mut out = BitSet::new(self.len());
        for q in x.iter() {
            out.union_with(&self.below[q]);
        }
        out
    }

    /// `⌊X⌋`: everything extended by some member of `X`.
    pub fn upset(&self, x: &BitSet) -> BitSet {
        self.check(x);
        let mut out = BitSet::new(self.len());
        for q in x.iter() {
            out.union_with(&self.above[q]);
        }
        out
    }

    fn check(&self, x: &BitSet) {
        assert_eq!(x.len(), self.len(), "subset universe mismatch");
    }

    pub fn empty_set(&self) -> BitSet {
        BitSet::new(self.len())
    }

    pub fn full_set(&self) -> BitSet {
        BitSet::full(self.len())
    }

    pub fn compatible(&self, p: usize, q: usize) -> bool {
        self.below[p].intersects(&self.below[q])
    }

    pub fn incompatible(&self, p: usize, q: usize) -> bool {
        !self.compatible(p, q)
    }

    /// `X^⊥`: the conditions incompatible with every member of `X`.
    pub fn perp(&self, x: &BitSet) -> BitSet {
        self.check(x);
        let mut out = BitSet::new(self.len());
        'outer: for p in 0..self.len() {
            for q in x.iter() {
                if self.compatible(p, q) {
                    continue 'outer;
                }
            }
            out.insert(p);
        }
        out
    }

    /// `X^⊥⊥`; extensive, monotone, idempotent.
    pub fn regular_closure(&self, x: &BitSet) -> BitSet {
        self.perp(&self.perp(x))
    }

    pub fn is_regular(&self, x: &BitSet) -> bool {
        self.regular_closure(x) == *x
    }

    /// Every principal downset is regular.
    pub fn is_separative(&self) -> bool {
        let by_downsets = (0..self.len()).all(|p| self.is_regular(&self.below[p]));
        debug_assert_eq!(by_downsets, self.is_separative_by_separation());
        by_downsets
    }

    /// Alternate criterion: `p ⋠ q` implies some `r <= p` is incompatible
    /// with `q`.
    pub fn is_separative_by_separation(&self) -> bool {
        for p in 0..self.len() {
            for q in 0..self.len() {
                if !self.leq(p, q) && self.below[p].iter().all(|r| self.compatible(r, q)) {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_dense(&self, x: &BitSet) -> bool {
        self.check(x);
        (0..self.len()).all(|p| self.below[p].intersects(x))
    }

    /// `S' = { p : (∃q∈S) p<=q or (∀q∈S) p|q }`; always dense.
    pub fn derived_dense_set(&self, s: &BitSet) -> BitSet {
        let mut out = self.downset(s);
        out.union_with(&self.perp(s));
        out
    }

    pub fn minimal_elements(&self) -> BitSet {
        BitSet::from_indices(
            self.len(),
            (0..self.len()).filter(|&p| self.below[p].count() == 1),
        )
    }

    pub fn maximal_elements(&self) -> BitSet {
        BitSet::from_indices(
            self.len(),
            (0..self.len()).filter(|&p| self.above[p].count() == 1),
        )
    }

    /// The maximum element, if the poset has one.
    pub fn top(&self) -> Option<usize> {
        (0..self.len()).find(|&p| self.below[p].count() == self.len())
    }

    pub fn is_directed(&self, d: &BitSet) -> bool {
        self.check(d);
        let members: Vec<usize> = d.iter().collect();
        for (i, &p) in members.iter().enumerate() {
            for &q in &members[i + 1..] {
                let common = self.below[p].intersection(&self.below[q]);
                if !common.intersects(d) {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_prefilter(&self, d: &BitSet) -> bool {
        self.is_directed(d)
    }

    pub fn is_filter(&self, d: &BitSet) -> bool {
        self.is_directed(d) && self.upset(d) == *d
    }

    /// A finite prefilter always has a minimum element.
    pub fn prefilter_minimum(&self, d: &BitSet) -> Result<Option<usize>, OrderError> {
        if !self.is_prefilter(d) {
            return Err(OrderError::NotAPrefilter);
        }
        Ok(d.iter().find(|&m| d.is_subset(&self.above[m])))
    }

    /// Genericity in the sense of "meets or is decided against": for every
    /// set in the family, some member of `d` lies in the set or is
    /// incompatible with all of it.
    pub fn is_generic(&self, d: &BitSet, family: &[BitSet]) -> Result<bool, OrderError> {
        if !self.is_prefilter(d) {
            return Err(OrderError::NotAPrefilter);
        }
        for s in family {
            let decided = s.union(&self.perp(s));
            if !d.intersects(&decided) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Extends a prefilter to a maximal filter, deterministically: descend
    /// from the prefilter's minimum, taking the first strictly smaller
    /// element in canonical order.
    pub fn extend_to_maximal_filter(&self, d: &BitSet) -> Result<BitSet, OrderError> {
        let mut m = match self.prefilter_minimum(d)? {
            Some(m) => m,
            None => return Err(OrderError::NotAPrefilter), // empty prefilter has no filter base
        };
        for e in 0..self.len() {
            if e != m && self.leq(e, m) {
                m = e;
            }
        }
        Ok(self.above[m].clone())
    }
}
