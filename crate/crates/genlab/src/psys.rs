//! Semifilters, entailment, consistency, reductivity, the condition poset of
//! complete semifilters, the theory validities, ultrasemifilter search, and
//! the noncommuting-pair measure analysis.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::boolalg::{regular_algebra, BaElem, RegularAlgebra};
use crate::order::FinitePoset;
use crate::quantum::{self, PropSystem};

#[derive(Debug, Clone, PartialEq)]
pub enum PsysError {
    Invalid(String),
    CapExceeded { what: &'static str, cap: usize },
    TimeBudgetExceeded { what: &'static str, seconds: f64 },
    NotBoolean(String),
}

impl fmt::Display for PsysError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PsysError::Invalid(s) => write!(f, "{s}"),
            PsysError::CapExceeded { what, cap } => {
                write!(f, "{what} exceeds configured cap {cap}")
            }
            PsysError::TimeBudgetExceeded { what, seconds } => {
                write!(f, "{what} exceeded the {seconds}s time budget")
            }
            PsysError::NotBoolean(s) => write!(f, "not a boolean subsystem: {s}"),
        }
    }
}

impl std::error::Error for PsysError {}

/// Enumeration guards. Work is refused, not silently truncated, when a cap
/// is hit.
#[derive(Clone, Debug)]
pub struct SemifilterCaps {
    pub max_conditions: usize,
    pub time_budget: Option<Duration>,
}

impl Default for SemifilterCaps {
    fn default() -> Self {
        SemifilterCaps {
            max_conditions: 20_000,
            time_budget: Some(Duration::from_secs(60)),
        }
    }
}

impl SemifilterCaps {
    pub fn unlimited() -> Self {
        SemifilterCaps {
            max_conditions: usize::MAX,
            time_budget: None,
        }
    }
}

/// A finite propositional system given abstractly: a partial order with an
/// order-reversing complement involution, a commutation relation, and meets
/// defined exactly on commuting pairs.
#[derive(Clone, Debug)]
pub struct AbstractPS {
    labels: Vec<String>,
    above: Vec<BitSet>,
    compl: Vec<usize>,
    commutes: Vec<BitSet>,
    meet: Vec<Vec<Option<usize>>>,
    zero: usize,
    one: usize,
}

#[derive(Serialize, Deserialize)]
pub struct AbstractPsJson {
    pub elements: Vec<String>,
    pub leq: Vec<(String, String)>,
    pub complement: Vec<(String, String)>,
    pub commutes: Vec<(String, String)>,
    pub meet: Vec<(String, String, String)>,
    pub zero: String,
    pub one: String,
}

impl AbstractPS {
    /// Validates every structural invariant: partial order with bottom and
    /// top, complement an order-reversing involution, commutation symmetric
    /// and reflexive and implied by comparability, meets defined exactly on
    /// commuting pairs, each a greatest lower bound, associative where
    /// defined.
    pub fn new(
        labels: Vec<String>,
        leq_pairs: &[(usize, usize)],
        compl: Vec<usize>,
        commute_pairs: &[(usize, usize)],
        meet_entries: &[(usize, usize, usize)],
        zero: usize,
        one: usize,
    ) -> Result<Self, PsysError> {
        let n = labels.len();
        let bad = |s: String| Err(PsysError::Invalid(s));
        if n == 0 {
            return bad("empty system".into());
        }
        // order relation, reflexively closed, checked via FinitePoset
        let poset = FinitePoset::new(labels.clone(), leq_pairs)
            .map_err(|e| PsysError::Invalid(format!("order relation: {e}")))?;
        let above: Vec<BitSet> = (0..n).map(|i| poset.above(i).clone()).collect();
        let below: Vec<BitSet> = (0..n).map(|i| poset.below(i).clone()).collect();
        if below[one].count() != n {
            return bad("1 must be the maximum".into());
        }
        if above[zero].count() != n {
            return bad("0 must be the minimum".into());
        }
        if compl.len() != n {
            return bad("complement map must cover every element".into());
        }
        for i in 0..n {
            if compl[compl[i]] != i {
                return bad(format!("complement is not an involution at {}", labels[i]));
            }
        }
        if compl[zero] != one {
            return bad("complement of 0 must be 1".into());
        }
        for i in 0..n {
            for j in 0..n {
                if above[i].contains(j) && !above[compl[j]].contains(compl[i]) {
                    return bad(format!(
                        "complement is not order-reversing on {} <= {}",
                        labels[i], labels[j]
                    ));
                }
            }
        }
        let mut commutes = vec![BitSet::new(n); n];
        for &(i, j) in commute_pairs {
            commutes[i].insert(j);
            commutes[j].insert(i);
        }
        for i in 0..n {
            commutes[i].insert(i);
            commutes[i].insert(compl[i]);
            commutes[compl[i]].insert(i);
            for j in 0..n {
                if above[i].contains(j) || above[j].contains(i) {
                    commutes[i].insert(j);
                    commutes[j].insert(i);
                }
            }
        }
        let mut meet = vec![vec![None; n]; n];
        for i in 0..n {
            meet[i][i] = Some(i);
        }
        for &(i, j, m) in meet_entries {
            meet[i][j] = Some(m);
            meet[j][i] = Some(m);
        }
        for i in 0..n {
            // meets with 0 and 1 are forced
            meet[i][zero] = Some(zero);
            meet[zero][i] = Some(zero);
            meet[i][one] = Some(i);
            meet[one][i] = Some(i);
        }
        for i in 0..n {
            for j in 0..n {
                match (commutes[i].contains(j), meet[i][j]) {
                    (true, None) => {
                        return bad(format!(
                            "commuting pair {} , {} has no meet",
                            labels[i], labels[j]
                        ))
                    }
                    (false, Some(_)) => {
                        return bad(format!(
                            "meet given for noncommuting pair {} , {}",
                            labels[i], labels[j]
                        ))
                    }
                    (true, Some(m)) => {
                        // greatest lower bound among all elements
                        let lower = below[i].intersection(&below[j]);
                        if !lower.contains(m) || !lower.is_subset(&below[m]) {
                            return bad(format!(
                                "meet of {} and {} is not a greatest lower bound",
                                labels[i], labels[j]
                            ));
                        }
                    }
                    (false, None) => {}
                }
            }
        }
        // associativity where defined
        for i in 0..n {
            for j in commutes[i].iter() {
                for k in 0..n {
                    if !commutes[i].contains(k) || !commutes[j].contains(k) {
                        continue;
                    }
                    let ij = meet[i][j].unwrap();
                    let jk = meet[j][k].unwrap();
                    if let (Some(l), Some(r)) = (meet[ij][k], meet[i][jk]) {
                        if l != r {
                            return bad(format!(
                                "meet not associative at {}, {}, {}",
                                labels[i], labels[j], labels[k]
                            ));
                        }
                    }
                }
            }
        }
        Ok(AbstractPS {
            labels,
            above,
            compl,
            commutes,
            meet,
            zero,
            one,
        })
    }

    /// Derives the abstract relations from a concrete projection system.
    pub fn from_prop_system(sys: &PropSystem) -> Result<Self, PsysError> {
        let n = sys.len();
        let mut leq_pairs = Vec::new();
        let mut commute_pairs = Vec::new();
        let mut meet_entries = Vec::new();
        let mut compl = vec![usize::MAX; n];
        for i in 0..n {
            let ci = sys.element(i).complement();
            compl[i] = sys
                .index_of(&ci)
                .ok_or_else(|| PsysError::Invalid("system not closed under complement".into()))?;
            for j in 0..n {
                let commuting = quantum::commutes(sys.element(i), sys.element(j))
                    .map_err(|e| PsysError::Invalid(e.to_string()))?;
                if commuting {
                    if i < j {
                        commute_pairs.push((i, j));
                    }
                    if quantum::leq(sys.element(i), sys.element(j)).unwrap() {
                        leq_pairs.push((i, j));
                    }
                    if i <= j {
                        let m = quantum::meet_commuting(sys.element(i), sys.element(j)).unwrap();
                        let mi = sys.index_of(&m).ok_or_else(|| {
                            PsysError::Invalid("system not closed under commuting meet".into())
                        })?;
                        meet_entries.push((i, j, mi));
                    }
                }
            }
        }
        let labels = (0..n)
            .map(|i| {
                if i == sys.zero_index() {
                    "0".to_string()
                } else if i == sys.one_index() {
                    "1".to_string()
                } else {
                    format!("P{i}")
                }
            })
            .collect();
        AbstractPS::new(
            labels,
            &leq_pairs,
            compl,
            &commute_pairs,
            &meet_entries,
            sys.zero_index(),
            sys.one_index(),
        )
    }

    /// The boolean propositional algebra on `atoms` atoms as an abstract
    /// system; everything commutes.
    pub fn boolean_algebra(atoms: usize) -> Self {
        assert!((1..=8).contains(&atoms));
        let n = 1usize << atoms;
        let labels: Vec<String> = (0..n)
            .map(|m| {
                let ids: Vec<String> = (0..atoms)
                    .filter(|a| m >> a & 1 == 1)
                    .map(|a| a.to_string())
                    .collect();
                format!("{{{}}}", ids.join(","))
            })
            .collect();
        let mut leq = Vec::new();
        let mut commute = Vec::new();
        let mut meets = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i & j == i {
                    leq.push((i, j));
                }
                if i <= j {
                    commute.push((i, j));
                    meets.push((i, j, i & j));
                }
            }
        }
        let compl: Vec<usize> = (0..n).map(|i| !i & (n - 1)).collect();
        AbstractPS::new(labels, &leq, compl, &commute, &meets, 0, n - 1)
            .expect("powerset algebra is a valid system")
    }

    pub fn from_json(text: &str) -> Result<Self, PsysError> {
        let parsed: AbstractPsJson =
            serde_json::from_str(text).map_err(|e| PsysError::Invalid(e.to_string()))?;
        let mut index = HashMap::new();
        for (i, l) in parsed.elements.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(PsysError::Invalid(format!("duplicate element {l}")));
            }
        }
        let look = |l: &String| -> Result<usize, PsysError> {
            index
                .get(l)
                .copied()
                .ok_or_else(|| PsysError::Invalid(format!("unknown element {l}")))
        };
        let leq: Result<Vec<_>, _> = parsed
            .leq
            .iter()
            .map(|(a, b)| Ok((look(a)?, look(b)?)))
            .collect();
        let commute: Result<Vec<_>, _> = parsed
            .commutes
            .iter()
            .map(|(a, b)| Ok((look(a)?, look(b)?)))
            .collect();
        let meets: Result<Vec<_>, _> = parsed
            .meet
            .iter()
            .map(|(a, b, c)| Ok((look(a)?, look(b)?, look(c)?)))
            .collect();
        let mut compl = vec![usize::MAX; parsed.elements.len()];
        for (a, b) in &parsed.complement {
            let (i, j) = (look(a)?, look(b)?);
            compl[i] = j;
            compl[j] = i;
        }
        if compl.contains(&usize::MAX) {
            return Err(PsysError::Invalid("complement map incomplete".into()));
        }
        AbstractPS::new(
            parsed.elements.clone(),
            &leq?,
            compl,
            &commute?,
            &meets?,
            look(&parsed.zero)?,
            look(&parsed.one)?,
        )
    }

    pub fn to_json(&self) -> AbstractPsJson {
        let n = self.len();
        let mut leq = Vec::new();
        let mut commutes = Vec::new();
        let mut meet = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && self.above[i].contains(j) {
                    leq.push((self.labels[i].clone(), self.labels[j].clone()));
                }
                if i < j && self.commutes[i].contains(j) {
                    commutes.push((self.labels[i].clone(), self.labels[j].clone()));
                }
                if i <= j {
                    if let Some(m) = self.meet[i][j] {
                        meet.push((
                            self.labels[i].clone(),
                            self.labels[j].clone(),
                            self.labels[m].clone(),
                        ));
                    }
                }
            }
        }
        let complement = (0..n)
            .filter(|&i| i <= self.compl[i])
            .map(|i| (self.labels[i].clone(), self.labels[self.compl[i]].clone()))
            .collect();
        AbstractPsJson {
            elements: self.labels.clone(),
            leq,
            complement,
            commutes,
            meet,
            zero: self.labels[self.zero].clone(),
            one: self.labels[self.one].clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn element(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn zero(&self) -> usize {
        self.zero
    }

    pub fn one(&self) -> usize {
        self.one
    }

    pub fn compl(&self, i: usize) -> usize {
        self.compl[i]
    }

    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.above[i].contains(j)
    }

    pub fn commute(&self, i: usize, j: usize) -> bool {
        self.commutes[i].contains(j)
    }

    pub fn meet_of(&self, i: usize, j: usize) -> Option<usize> {
        self.meet[i][j]
    }

    pub fn empty_set(&self) -> BitSet {
        BitSet::new(self.len())
    }

    pub fn set_of(&self, labels: &[&str]) -> Result<BitSet, PsysError> {
        let mut s = self.empty_set();
        for l in labels {
            let i = self
                .element(l)
                .ok_or_else(|| PsysError::Invalid(format!("unknown element {l}")))?;
            s.insert(i);
        }
        Ok(s)
    }

    pub fn format_subset(&self, s: &BitSet) -> String {
        let ids: Vec<&str> = s.iter().map(|i| self.label(i)).collect();
        format!("{{{}}}", ids.join(","))
    }
}

/// An upward-closed, commuting-meet-closed subset. When the closure reaches
/// 0 the semifilter is degenerate (inconsistent); its member set then
/// collapses to everything.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Semifilter {
    pub members: BitSet,
    pub degenerate: bool,
}

/// Least fixpoint of upward closure and commuting-meet adjunction over the
/// seed (with 1 adjoined, the smallest semifilter being `{1}`).
pub fn semifilter_closure(ps: &AbstractPS, seed: &BitSet) -> Semifilter {
    let mut members = ps.empty_set();
    members.insert(ps.one);
    let mut queue: VecDeque<usize> = seed.iter().collect();
    for e in seed.iter() {
        members.insert(e);
    }
    while let Some(e) = queue.pop_front() {
        // upward closure
        for q in ps.above[e].iter() {
            if !members.contains(q) {
                members.insert(q);
                queue.push_back(q);
            }
        }
        // commuting meets with everything already present
        let partners: Vec<usize> = members.intersection(&ps.commutes[e]).iter().collect();
        for x in partners {
            let m = ps.meet[e][x].expect("commuting pair has a meet");
            if !members.contains(m) {
                members.insert(m);
                queue.push_back(m);
            }
        }
    }
    let degenerate = members.contains(ps.zero);
    if degenerate {
        members = BitSet::full(ps.len());
    }
    Semifilter {
        members,
        degenerate,
    }
}

/// `S` entails `P` iff `P` lies in the complete-semifilter closure of `S`.
pub fn entails(ps: &AbstractPS, s: &BitSet, p: usize) -> bool {
    semifilter_closure(ps, s).members.contains(p)
}

pub fn is_consistent(ps: &AbstractPS, s: &BitSet) -> bool {
    !semifilter_closure(ps, s).degenerate
}

/// All non-degenerate complete semifilters, in a canonical order (by size,
/// then set order). Every semifilter is reachable from `{1}` by adjoining
/// one element at a time and closing, so a breadth-first sweep enumerates
/// them all.
pub fn enumerate_complete_semifilters(
    ps: &AbstractPS,
    caps: &SemifilterCaps,
) -> Result<Vec<BitSet>, PsysError> {
    let start = Instant::now();
    let root = semifilter_closure(ps, &ps.empty_set());
    let mut seen: HashSet<BitSet> = HashSet::new();
    let mut queue: VecDeque<BitSet> = VecDeque::new();
    seen.insert(root.members.clone());
    queue.push_back(root.members);
    while let Some(f) = queue.pop_front() {
        if let Some(budget) = caps.time_budget {
            if start.elapsed() > budget {
                return Err(PsysError::TimeBudgetExceeded {
                    what: "complete-semifilter enumeration",
                    seconds: budget.as_secs_f64(),
                });
            }
        }
        for e in 0..ps.len() {
            if e == ps.zero || f.contains(e) {
                continue;
            }
            let mut seed = f.clone();
            seed.insert(e);
            let ext = semifilter_closure(ps, &seed);
            if ext.degenerate || seen.contains(&ext.members) {
                continue;
            }
            if seen.len() >= caps.max_conditions {
                return Err(PsysError::CapExceeded {
                    what: "complete semifilters",
                    cap: caps.max_conditions,
                });
            }
            seen.insert(ext.members.clone());
            queue.push_back(ext.members);
        }
    }
    let mut out: Vec<BitSet> = seen.into_iter().collect();
    out.sort_by_key(|s| (s.count(), s.clone()));
    Ok(out)
}

/// The condition poset: complete semifilters ordered by reverse inclusion.
pub struct ConditionPoset {
    pub poset: FinitePoset,
    pub conditions: Vec<BitSet>,
}

impl ConditionPoset {
    pub fn index_of(&self, members: &BitSet) -> Option<usize> {
        self.conditions.iter().position(|c| c == members)
    }
}

pub fn condition_poset(
    ps: &AbstractPS,
    caps: &SemifilterCaps,
) -> Result<ConditionPoset, PsysError> {
    let conditions = enumerate_complete_semifilters(ps, caps)?;
    let names: Vec<String> = conditions.iter().map(|c| ps.format_subset(c)).collect();
    let mut pairs = Vec::new();
    for (i, a) in conditions.iter().enumerate() {
        for (j, b) in conditions.iter().enumerate() {
            // p <= q iff p includes q as a set
            if b.is_subset(a) {
                pairs.push((i, j));
            }
        }
    }
    let poset = FinitePoset::new(names, &pairs)
        .map_err(|e| PsysError::Invalid(format!("condition order: {e}")))?;
    Ok(ConditionPoset { poset, conditions })
}

/// `[S]`: the regular closure of the set of conditions extending the
/// complete semifilter generated by `S`. Degenerate `S` gives the empty
/// (zero) element.
pub fn bracket(ps: &AbstractPS, cp: &ConditionPoset, s: &BitSet) -> BitSet {
    let c = semifilter_closure(ps, s);
    let mut base = BitSet::new(cp.conditions.len());
    if !c.degenerate {
        for (i, cond) in cp.conditions.iter().enumerate() {
            if c.members.is_subset(cond) {
                base.insert(i);
            }
        }
    }
    cp.poset.regular_closure(&base)
}

/// The direct membership form `{ p : S subset-of p }`; agrees with
/// [`bracket`] exactly when the system is reductive.
pub fn bracket_by_membership(cp: &ConditionPoset, s: &BitSet) -> BitSet {
    BitSet::from_indices(
        cp.conditions.len(),
        cp.conditions
            .iter()
            .enumerate()
            .filter(|(_, cond)| s.is_subset(cond))
            .map(|(i, _)| i),
    )
}

pub struct ReductivityReport {
    pub reductive: bool,
    /// First counterexample `(S, P)`: `S + {complement P}` is inconsistent
    /// yet `S` does not entail `P`.
    pub witness: Option<(BitSet, usize)>,
}

/// Brute force over closure-distinct premise sets: every subset's entailment
/// behavior factors through its complete-semifilter closure, so only the
/// (non-degenerate) complete semifilters need checking; degenerate premises
/// entail everything vacuously.
pub fn is_reductive(
    ps: &AbstractPS,
    caps: &SemifilterCaps,
) -> Result<ReductivityReport, PsysError> {
    let semifilters = enumerate_complete_semifilters(ps, caps)?;
    for c in &semifilters {
        for p in 0..ps.len() {
            if c.contains(p) {
                continue;
            }
            let mut seed = c.clone();
            seed.insert(ps.compl(p));
            if semifilter_closure(ps, &seed).degenerate {
                return Ok(ReductivityReport {
                    reductive: false,
                    witness: Some((c.clone(), p)),
                });
            }
        }
    }
    Ok(ReductivityReport {
        reductive: true,
        witness: None,
    })
}

/// All subsets of pairwise commuting elements, enumerated depth-first with a
/// hard cap on the count.
fn commuting_subsets(ps: &AbstractPS, cap: usize) -> Result<Vec<BitSet>, PsysError> {
    let n = ps.len();
    let mut out = vec![ps.empty_set()];
    let mut stack: Vec<(usize, BitSet, BitSet)> = vec![(0, ps.empty_set(), BitSet::full(n))];
    while let Some((next, current, allowed)) = stack.pop() {
        for e in next..n {
            if !allowed.contains(e) {
                continue;
            }
            let mut s = current.clone();
            s.insert(e);
            if out.len() >= cap {
                return Err(PsysError::CapExceeded {
                    what: "commuting subsets",
                    cap,
                });
            }
            out.push(s.clone());
            stack.push((e + 1, s, allowed.intersection(&ps.commutes[e])));
        }
    }
    Ok(out)
}

fn meet_of_subset(ps: &AbstractPS, s: &BitSet) -> Result<usize, PsysError> {
    let mut m = ps.one;
    for e in s.iter() {
        m = ps.meet[m][e].ok_or_else(|| {
            PsysError::Invalid(format!(
                "commuting subset {} has no iterated meet: {} and {} do not commute",
                ps.format_subset(s),
                ps.label(m),
                ps.label(e)
            ))
        })?;
    }
    Ok(m)
}

/// The three theory sentences evaluated under the canonical interpretation
/// into `Reg` of the condition poset: upward closure, commuting-meet
/// closure (over every commuting subset), and decision of every
/// complementary pair.
pub struct TheoryValidities {
    pub reg: RegularAlgebra,
    pub values: [BaElem; 3],
}

pub fn t_r_validities(
    ps: &AbstractPS,
    cp: &ConditionPoset,
    caps: &SemifilterCaps,
) -> Result<TheoryValidities, PsysError> {
    let reg = regular_algebra(&cp.poset);
    let a = reg.algebra().clone();
    let g: Vec<BaElem> = (0..ps.len())
        .map(|p| {
            let b = bracket(ps, cp, &BitSet::singleton(ps.len(), p));
            reg.element_of(&b, &cp.poset)
                .expect("bracket sets are regular")
        })
        .collect();

    let mut upward = a.one();
    for p in 0..ps.len() {
        for q in 0..ps.len() {
            if ps.leq(p, q) {
                upward.intersect_with(&a.implies(&g[p], &g[q]));
            }
        }
    }

    let subset_cap = caps.max_conditions.saturating_mul(100);
    let mut meets = a.one();
    for s in commuting_subsets(ps, subset_cap)? {
        let conj = a.meet_all(s.iter().map(|p| &g[p]).collect::<Vec<_>>());
        let target = &g[meet_of_subset(ps, &s)?];
        meets.intersect_with(&a.implies(&conj, target));
    }

    let mut decided = a.one();
    for p in 0..ps.len() {
        decided.intersect_with(&a.join(&g[p], &g[ps.compl(p)]));
    }

    Ok(TheoryValidities {
        reg,
        values: [upward, meets, decided],
    })
}

/// For a boolean subsystem `A` and `S` a subset of `A`, the sentence
/// "some member of `S` holds or some member of `S`-perp holds" (perp taken
/// inside `A`) has value 1 over a reductive system.
pub fn boolean_subsystem_check(
    ps: &AbstractPS,
    cp: &ConditionPoset,
    a_set: &BitSet,
    s: &BitSet,
) -> Result<bool, PsysError> {
    if !s.is_subset(a_set) {
        return Err(PsysError::Invalid("S must be a subset of A".into()));
    }
    if !a_set.contains(ps.zero) || !a_set.contains(ps.one) {
        return Err(PsysError::NotBoolean("must contain 0 and 1".into()));
    }
    let members: Vec<usize> = a_set.iter().collect();
    for &i in &members {
        if !a_set.contains(ps.compl(i)) {
            return Err(PsysError::NotBoolean(format!(
                "not closed under complement at {}",
                ps.label(i)
            )));
        }
        for &j in &members {
            if !ps.commute(i, j) {
                return Err(PsysError::NotBoolean(format!(
                    "{} and {} do not commute",
                    ps.label(i),
                    ps.label(j)
                )));
            }
            let m = ps.meet[i][j].expect("commuting");
            if !a_set.contains(m) {
                return Err(PsysError::NotBoolean(format!(
                    "not closed under meet at {} , {}",
                    ps.label(i),
                    ps.label(j)
                )));
            }
        }
    }
    // S-perp inside A: meets to zero with every member of S
    let s_perp: Vec<usize> = members
        .iter()
        .copied()
        .filter(|&p| s.iter().all(|q| ps.meet[p][q] == Some(ps.zero)))
        .collect();
    let reg = regular_algebra(&cp.poset);
    let alg = reg.algebra();
    let mut value = alg.zero();
    for p in s.iter().chain(s_perp) {
        let b = bracket(ps, cp, &BitSet::singleton(ps.len(), p));
        value.union_with(
            &reg.element_of(&b, &cp.poset)
                .expect("bracket sets are regular"),
        );
    }
    Ok(value == alg.one())
}

/// Backtracking search for a full consistent semifilter. `None` is a
/// proof by exhaustion that no pseudoclassical valuation of the system
/// exists.
pub fn ultrasemifilter_search(
    ps: &AbstractPS,
    caps: &SemifilterCaps,
) -> Result<Option<BitSet>, PsysError> {
    let start = Instant::now();
    let root = semifilter_closure(ps, &ps.empty_set());
    let mut nodes: usize = 0;
    fn dfs(
        ps: &AbstractPS,
        current: &Semifilter,
        nodes: &mut usize,
        start: &Instant,
        caps: &SemifilterCaps,
    ) -> Result<Option<BitSet>, PsysError> {
        if current.degenerate {
            return Ok(None);
        }
        *nodes += 1;
        if (*nodes).is_multiple_of(4096) {
            if let Some(budget) = caps.time_budget {
                if start.elapsed() > budget {
                    return Err(PsysError::TimeBudgetExceeded {
                        what: "ultrasemifilter search",
                        seconds: budget.as_secs_f64(),
                    });
                }
            }
        }
        let undecided = (0..ps.len())
            .find(|&p| !current.members.contains(p) && !current.members.contains(ps.compl(p)));
        let p = match undecided {
            None => return Ok(Some(current.members.clone())),
            Some(p) => p,
        };
        for choice in [p, ps.compl(p)] {
            let mut seed = current.members.clone();
            seed.insert(choice);
            let ext = semifilter_closure(ps, &seed);
            if let Some(found) = dfs(ps, &ext, nodes, start, caps)? {
                return Ok(Some(found));
            }
        }
        Ok(None)
    }
    dfs(ps, &root, &mut nodes, &start, caps)
}

/// The noncommuting-pair measure report: atom weights on the four maximal
/// semifilters and the marginal identities of the 2x2 table.
#[derive(Debug, Clone, Serialize)]
pub struct MeasureTable {
    pub p_label: String,
    pub q_label: String,
    /// weights of the atoms `{P,Q}`, `{P,comp Q}`, `{comp P,Q}`,
    /// `{comp P, comp Q}` in that order
    pub atom_weights: [f64; 4],
    pub mu_p: f64,
    pub mu_compl_p: f64,
    pub mu_q: f64,
    pub mu_compl_q: f64,
    pub marginals_ok: bool,
}

/// Requires the six-element shape `{0, P, comp P, Q, comp Q, 1}` with `P`
/// and `Q` noncommuting. Weights apply to the atoms in the order
/// `(P,Q), (P,comp Q), (comp P,Q), (comp P, comp Q)`.
pub fn measure_table(
    ps: &AbstractPS,
    cp: &ConditionPoset,
    weights: &[f64; 4],
) -> Result<MeasureTable, PsysError> {
    if weights.iter().any(|&w| w < 0.0) {
        return Err(PsysError::Invalid("weights must be nonnegative".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(PsysError::Invalid(format!(
            "weights must sum to 1 (got {total})"
        )));
    }
    if ps.len() != 6 {
        return Err(PsysError::Invalid(
            "measure table requires the six-element noncommuting-pair system".into(),
        ));
    }
    let others: Vec<usize> = (0..6)
        .filter(|&i| i != ps.zero() && i != ps.one())
        .collect();
    let p = others[0];
    let q = *others
        .iter()
        .find(|&&x| !ps.commute(p, x))
        .ok_or_else(|| PsysError::Invalid("no noncommuting pair present".into()))?;
    let atoms_expected = [
        (p, q),
        (p, ps.compl(q)),
        (ps.compl(p), q),
        (ps.compl(p), ps.compl(q)),
    ];
    // weight per condition-poset atom (minimal condition)
    let reg = regular_algebra(&cp.poset);
    if reg.atoms() != 4 {
        return Err(PsysError::Invalid(format!(
            "expected 4 atoms, found {}",
            reg.atoms()
        )));
    }
    let mut weight_of_atom = [0.0; 4];
    for (slot, &(x, y)) in atoms_expected.iter().enumerate() {
        let members = BitSet::from_indices(6, [x, y, ps.one()]);
        let cond = cp
            .index_of(&members)
            .ok_or_else(|| PsysError::Invalid("expected maximal semifilter missing".into()))?;
        let atom = (0..4)
            .find(|&a| reg.atom_element(a) == cond)
            .ok_or_else(|| PsysError::Invalid("maximal semifilter is not an atom".into()))?;
        weight_of_atom[atom] = weights[slot];
    }
    let mu = |x: usize| -> f64 {
        let b = bracket(ps, cp, &BitSet::singleton(6, x));
        let e = reg
            .element_of(&b, &cp.poset)
            .expect("bracket sets are regular");
        e.iter().map(|a| weight_of_atom[a]).sum()
    };
    let mu_p = mu(p);
    let mu_compl_p = mu(ps.compl(p));
    let mu_q = mu(q);
    let mu_compl_q = mu(ps.compl(q));
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12;
    let marginals_ok = close(mu_p, weights[0] + weights[1])
        && close(mu_compl_p, weights[2] + weights[3])
        && close(mu_q, weights[0] + weights[2])
        && close(mu_compl_q, weights[1] + weights[3])
        && close(mu_p + mu_compl_p, 1.0)
        && close(mu_q + mu_compl_q, 1.0);
    Ok(MeasureTable {
        p_label: ps.label(p).to_string(),
        q_label: ps.label(q).to_string(),
        atom_weights: *weights,
        mu_p,
        mu_compl_p,
        mu_q,
        mu_compl_q,
        marginals_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn closure_examples_on_malley() {
        let ps = fixtures::malley_ps();
        let one_only = semifilter_closure(&ps, &ps.empty_set());
        assert_eq!(one_only.members, ps.set_of(&["1"]).unwrap());
        let p = ps.set_of(&["P"]).unwrap();
        let c = semifilter_closure(&ps, &p);
        assert!(!c.degenerate);
        assert_eq!(c.members, ps.set_of(&["P", "1"]).unwrap());
        let contradictory = ps.set_of(&["P", "~P"]).unwrap();
        assert!(semifilter_closure(&ps, &contradictory).degenerate);
    }

    #[test]
    fn closure_laws() {
        let ps = fixtures::malley_ps();
        for mask in 0..(1u64 << 6) {
            let s = BitSet::from_mask(6, mask);
            let c = semifilter_closure(&ps, &s);
            assert!(s.is_subset(&c.members), "extensive");
            let c2 = semifilter_closure(&ps, &c.members);
            assert_eq!(c2.members, c.members, "idempotent");
            assert_eq!(c2.degenerate, c.degenerate);
            for sup_mask in 0..(1u64 << 6) {
                let sup = BitSet::from_mask(6, sup_mask);
                if s.is_subset(&sup) {
                    let cs = semifilter_closure(&ps, &sup);
                    assert!(c.members.is_subset(&cs.members), "monotone");
                }
            }
        }
    }

    #[test]
    fn entailment_examples() {
        let ps = fixtures::malley_ps();
        for mask in 0..(1u64 << 6) {
            let s = BitSet::from_mask(6, mask);
            assert!(entails(&ps, &s, ps.one()), "everything entails 1");
        }
        let p_only = ps.set_of(&["P"]).unwrap();
        let q = ps.element("Q").unwrap();
        assert!(!entails(&ps, &p_only, q));
        assert!(!is_consistent(&ps, &ps.set_of(&["P", "~P"]).unwrap()));
    }

    #[test]
    fn malley_condition_poset_has_nine_conditions() {
        let ps = fixtures::malley_ps();
        let cp = condition_poset(&ps, &SemifilterCaps::default()).unwrap();
        assert_eq!(cp.conditions.len(), 9);
        let maximal: Vec<&BitSet> = cp.conditions.iter().filter(|c| c.count() == 3).collect();
        assert_eq!(maximal.len(), 4, "four maximal semifilters");
        // top condition is {1}
        let top = cp.poset.top().expect("reverse inclusion has a top");
        assert_eq!(cp.conditions[top], ps.set_of(&["1"]).unwrap());
    }

    #[test]
    fn four_element_pa_has_three_conditions() {
        // {0, P, comp P, 1} is the 2-atom algebra
        let ps = AbstractPS::boolean_algebra(2);
        let cp = condition_poset(&ps, &SemifilterCaps::default()).unwrap();
        assert_eq!(cp.conditions.len(), 3);
        // the trivial algebra has only the condition {1}
        let two = AbstractPS::boolean_algebra(1);
        let cp = condition_poset(&two, &SemifilterCaps::default()).unwrap();
        assert_eq!(cp.conditions.len(), 1);
    }

    #[test]
    fn bracket_examples() {
        let ps = fixtures::malley_ps();
        let cp = condition_poset(&ps, &SemifilterCaps::default()).unwrap();
        let all = bracket(&ps, &cp, &ps.set_of(&["1"]).unwrap());
        assert_eq!(all.count(), 9);
        let p = ps.set_of(&["P"]).unwrap();
        let bp = bracket(&ps, &cp, &p);
        assert_eq!(bp.count(), 3, "the three conditions containing P");
        assert_eq!(bp, bracket_by_membership(&cp, &p), "reductive cross-check");
        let degenerate = ps.set_of(&["P", "~P"]).unwrap();
        assert!(bracket(&ps, &cp, &degenerate).is_empty());
    }

    #[test]
    fn reductivity_examples() {
        for atoms in 1..=3 {
            let pa = AbstractPS::boolean_algebra(atoms);
            assert!(
                is_reductive(&pa, &SemifilterCaps::default())
                    .unwrap()
                    .reductive
            );
        }
        let malley = fixtures::malley_ps();
        assert!(
            is_reductive(&malley, &SemifilterCaps::default())
                .unwrap()
                .reductive
        );
        let bad = fixtures::nonreductive_ps();
        let report = is_reductive(&bad, &SemifilterCaps::default()).unwrap();
        assert!(!report.reductive);
        let (s, p) = report.witness.unwrap();
        // the witness is genuine
        let mut seed = s.clone();
        seed.insert(bad.compl(p));
        assert!(semifilter_closure(&bad, &seed).degenerate);
        assert!(!entails(&bad, &s, p));
    }

    #[test]
    fn theory_validities() {
        let caps = SemifilterCaps::default();
        for atoms in 1..=3 {
            let pa = AbstractPS::boolean_algebra(atoms);
            let cp = condition_poset(&pa, &caps).unwrap();
            let tv = t_r_validities(&pa, &cp, &caps).unwrap();
            let one = tv.reg.algebra().one();
            assert_eq!(tv.values, [one.clone(), one.clone(), one]);
        }
        let malley = fixtures::malley_ps();
        let cp = condition_poset(&malley, &caps).unwrap();
        let tv = t_r_validities(&malley, &cp, &caps).unwrap();
        let one = tv.reg.algebra().one();
        assert_eq!(tv.values, [one.clone(), one.clone(), one]);
        // non-reductive systems still validate the upward-closure clause
        let bad = fixtures::nonreductive_ps();
        let cp = condition_poset(&bad, &caps).unwrap();
        let tv = t_r_validities(&bad, &cp, &caps).unwrap();
        assert_eq!(tv.values[0], tv.reg.algebra().one());
        assert_ne!(tv.values[2], tv.reg.algebra().one());
    }

    #[test]
    fn bracket_union_dense_iff_decision_clause() {
        let caps = SemifilterCaps::default();
        for ps in [
            fixtures::malley_ps(),
            fixtures::nonreductive_ps(),
            AbstractPS::boolean_algebra(2),
        ] {
            let cp = condition_poset(&ps, &caps).unwrap();
            let reg = regular_algebra(&cp.poset);
            let mut all_dense = true;
            for p in 0..ps.len() {
                let union = bracket(&ps, &cp, &BitSet::singleton(ps.len(), p)).union(&bracket(
                    &ps,
                    &cp,
                    &BitSet::singleton(ps.len(), ps.compl(p)),
                ));
                let dense = cp.poset.is_dense(&union);
                let clause_value = reg.algebra().join(
                    &reg.element_of(
                        &bracket(&ps, &cp, &BitSet::singleton(ps.len(), p)),
                        &cp.poset,
                    )
                    .unwrap(),
                    &reg.element_of(
                        &bracket(&ps, &cp, &BitSet::singleton(ps.len(), ps.compl(p))),
                        &cp.poset,
                    )
                    .unwrap(),
                );
                assert_eq!(dense, clause_value == reg.algebra().one());
                all_dense &= dense;
            }
            let tv = t_r_validities(&ps, &cp, &caps).unwrap();
            assert_eq!(all_dense, tv.values[2] == tv.reg.algebra().one());
        }
    }

    #[test]
    fn boolean_subsystem_checks() {
        let ps = fixtures::malley_ps();
        let cp = condition_poset(&ps, &SemifilterCaps::default()).unwrap();
        let a = ps.set_of(&["0", "P", "~P", "1"]).unwrap();
        let s = ps.set_of(&["P"]).unwrap();
        assert!(boolean_subsystem_check(&ps, &cp, &a, &s).unwrap());
        // S = nonzero part of A: S-perp is empty, the join of S alone is 1
        let s = ps.set_of(&["P", "~P", "1"]).unwrap();
        assert!(boolean_subsystem_check(&ps, &cp, &a, &s).unwrap());
        // A not boolean: P and Q do not commute
        let bad = ps.set_of(&["0", "P", "~P", "Q", "~Q", "1"]).unwrap();
        assert!(matches!(
            boolean_subsystem_check(&ps, &cp, &bad, &ps.set_of(&["P"]).unwrap()),
            Err(PsysError::NotBoolean(_))
        ));
        // a one-direction boolean subsystem of the spin system
        let spin = crate::quantum::spin_half_system(&fixtures::spin_directions(2)).unwrap();
        let sps = AbstractPS::from_prop_system(&spin).unwrap();
        let scp = condition_poset(&sps, &SemifilterCaps::default()).unwrap();
        let p_x = 2; // first seeded direction projection
        let mut a = BitSet::from_indices(sps.len(), [sps.zero(), sps.one(), p_x, sps.compl(p_x)]);
        let s = BitSet::singleton(sps.len(), p_x);
        assert!(boolean_subsystem_check(&sps, &scp, &a, &s).unwrap());
        a.remove(sps.zero());
        assert!(boolean_subsystem_check(&sps, &scp, &a, &s).is_err());
    }

    #[test]
    fn ultrasemifilter_examples() {
        let caps = SemifilterCaps::default();
        for atoms in 1..=3 {
            let pa = AbstractPS::boolean_algebra(atoms);
            let found = ultrasemifilter_search(&pa, &caps).unwrap().unwrap();
            // a full consistent semifilter is an ultrafilter here
            for p in 0..pa.len() {
                assert!(found.contains(p) ^ found.contains(pa.compl(p)));
            }
        }
        let malley = fixtures::malley_ps();
        let found = ultrasemifilter_search(&malley, &caps).unwrap().unwrap();
        assert_eq!(found.count(), 3, "a maximal semifilter {{X, Y, 1}}");
    }

    #[test]
    fn measure_table_examples() {
        let ps = fixtures::malley_ps();
        let cp = condition_poset(&ps, &SemifilterCaps::default()).unwrap();
        let t = measure_table(&ps, &cp, &[0.25, 0.25, 0.25, 0.25]).unwrap();
        assert!(t.marginals_ok);
        assert!((t.mu_p - 0.5).abs() < 1e-12 && (t.mu_q - 0.5).abs() < 1e-12);
        let t = measure_table(&ps, &cp, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(t.marginals_ok);
        assert!((t.mu_p - 1.0).abs() < 1e-12 && (t.mu_q - 1.0).abs() < 1e-12);
        assert!(measure_table(&ps, &cp, &[0.5, 0.5, 0.5, -0.5]).is_err());
        assert!(measure_table(&ps, &cp, &[0.5, 0.25, 0.25, 0.25]).is_err());
    }

    #[test]
    fn separative_condition_posets_for_reductive_systems() {
        let caps = SemifilterCaps::default();
        for ps in [
            fixtures::malley_ps(),
            AbstractPS::boolean_algebra(2),
            AbstractPS::boolean_algebra(3),
            AbstractPS::from_prop_system(&fixtures::malley_prop_system()).unwrap(),
        ] {
            assert!(is_reductive(&ps, &caps).unwrap().reductive);
            let cp = condition_poset(&ps, &caps).unwrap();
            assert!(cp.poset.is_separative());
        }
        // for the non-reductive fixture the outcome is logged, not asserted
        let bad = fixtures::nonreductive_ps();
        let cp = condition_poset(&bad, &caps).unwrap();
        let _ = cp.poset.is_separative();
    }

    #[test]
    fn pseudoclassical_correspondence() {
        // ultrasemifilters <-> generic (principal-at-minimal) filters,
        // exhaustively on the noncommuting-pair system and the spin systems
        let caps = SemifilterCaps::default();
        let mut systems = vec![fixtures::malley_ps()];
        for k in 1..=3 {
            let sys = crate::quantum::spin_half_system(&fixtures::spin_directions(k)).unwrap();
            systems.push(AbstractPS::from_prop_system(&sys).unwrap());
        }
        for ps in systems {
            let cp = condition_poset(&ps, &caps).unwrap();
            check_correspondence(&ps, &cp);
        }
    }

    fn check_correspondence(ps: &AbstractPS, cp: &ConditionPoset) {
        let minimal = cp.poset.minimal_elements();
        for m in minimal.iter() {
            let filter = cp.poset.above(m);
            // union of the conditions in the filter is the maximal semifilter
            let mut union = ps.empty_set();
            for c in filter.iter() {
                union.union_with(&cp.conditions[c]);
            }
            assert_eq!(union, cp.conditions[m]);
            // full: decides every pair
            for p in 0..ps.len() {
                if p != ps.zero() {
                    assert!(union.contains(p) || union.contains(ps.compl(p)));
                }
            }
            // inverse direction: conditions included in the union form the filter
            let back = BitSet::from_indices(
                cp.conditions.len(),
                cp.conditions
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.is_subset(&union))
                    .map(|(i, _)| i),
            );
            assert_eq!(back, *filter);
        }
    }

    #[test]
    fn json_round_trip() {
        let ps = fixtures::malley_ps();
        let json = serde_json::to_string(&ps.to_json()).unwrap();
        let back = AbstractPS::from_json(&json).unwrap();
        assert_eq!(back.len(), ps.len());
        for i in 0..ps.len() {
            assert_eq!(back.compl(i), ps.compl(i));
            for j in 0..ps.len() {
                assert_eq!(back.leq(i, j), ps.leq(i, j));
                assert_eq!(back.commute(i, j), ps.commute(i, j));
                assert_eq!(back.meet_of(i, j), ps.meet_of(i, j));
            }
        }
    }
}
