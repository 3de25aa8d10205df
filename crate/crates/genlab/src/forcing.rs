//! Forcing over finite fragments: hereditarily finite sets, transitive
//! collapse, poset-labelled names, evaluation under a filter, boolean values
//! of primitive and compound sentences in the regular algebra, and the
//! exhaustively verifiable truth lemma.
//!
//! The ground model is the true universe of hereditarily finite sets up to a
//! rank bound, where generic filters on a finite poset are exactly the
//! principal filters at minimal elements.

use std::collections::HashMap;
use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bitset::BitSet;
use crate::boolalg::{regular_algebra, BaElem, RegularAlgebra};
use crate::order::FinitePoset;

#[derive(Debug, Clone, PartialEq)]
pub enum ForcingError {
    NotWellFounded,
    NotExtensional(usize, usize),
    RankBoundExceeded { rank: usize, bound: usize },
    NoTopElement,
    NotSeparative,
    Parse(String),
}

impl fmt::Display for ForcingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ForcingError::NotWellFounded => write!(f, "relation is not well-founded"),
            ForcingError::NotExtensional(a, b) => {
                write!(f, "extensionality violated at <{a},{b}>")
            }
            ForcingError::RankBoundExceeded { rank, bound } => {
                write!(f, "rank {rank} exceeds the configured bound {bound}")
            }
            ForcingError::NoTopElement => write!(f, "forcing poset needs a maximum element"),
            ForcingError::NotSeparative => write!(f, "forcing poset must be separative"),
            ForcingError::Parse(s) => write!(f, "parse error: {s}"),
        }
    }
}

impl std::error::Error for ForcingError {}

/// A hereditarily finite set in canonical form: members sorted and
/// collapsed, so structural equality is extensional equality.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct HfSet {
    members: Vec<HfSet>,
}

impl HfSet {
    pub fn empty() -> Self {
        HfSet {
            members: Vec::new(),
        }
    }

    pub fn from_members<I: IntoIterator<Item = HfSet>>(members: I) -> Self {
        let mut m: Vec<HfSet> = members.into_iter().collect();
        m.sort();
        m.dedup();
        HfSet { members: m }
    }

    pub fn members(&self) -> &[HfSet] {
        &self.members
    }

    pub fn has_member(&self, x: &HfSet) -> bool {
        self.members.binary_search(x).is_ok()
    }

    /// Least `r` with the set included in the rank-`r` stage.
    pub fn rank(&self) -> usize {
        self.members.iter().map(|m| m.rank() + 1).max().unwrap_or(0)
    }

    /// The von Neumann ordinal `n`.
    pub fn ordinal(n: usize) -> Self {
        let mut current = HfSet::empty();
        let mut all = Vec::new();
        for _ in 0..n {
            all.push(current.clone());
            current = HfSet::from_members(all.clone());
        }
        current
    }

    /// Literal syntax: `{}`, `{{},{{}}}`.
    pub fn parse(text: &str) -> Result<Self, ForcingError> {
        let chars: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
        let (set, used) = Self::parse_at(&chars, 0)?;
        if used != chars.len() {
            return Err(ForcingError::Parse("trailing input".into()));
        }
        Ok(set)
    }

    fn parse_at(chars: &[char], pos: usize) -> Result<(HfSet, usize), ForcingError> {
        if chars.get(pos) != Some(&'{') {
            return Err(ForcingError::Parse(format!("expected '{{' at {pos}")));
        }
        let mut members = Vec::new();
        let mut p = pos + 1;
        if chars.get(p) == Some(&'}') {
            return Ok((HfSet::empty(), p + 1));
        }
        loop {
            let (m, used) = Self::parse_at(chars, p)?;
            members.push(m);
            p = used;
            match chars.get(p) {
                Some(',') => p += 1,
                Some('}') => return Ok((HfSet::from_members(members), p + 1)),
                _ => return Err(ForcingError::Parse(format!("expected ',' or '}}' at {p}"))),
            }
        }
    }
}

impl fmt::Display for HfSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, m) in self.members.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, "}}")
    }
}

/// All hereditarily finite sets of rank at most `bound` (there are
/// `2^2^...` of them, so the bound is capped small).
pub fn universe_up_to_rank(bound: usize) -> Vec<HfSet> {
    assert!(bound <= 4, "the rank-4 universe already has 65536 sets");
    let mut stage: Vec<HfSet> = vec![HfSet::empty()];
    for _ in 0..bound {
        let mut next = Vec::new();
        for mask in 0u32..(1 << stage.len()) {
            let members = stage
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, s)| s.clone());
            next.push(HfSet::from_members(members));
        }
        next.sort();
        next.dedup();
        stage = next;
    }
    stage
}

/// Mostowski collapse of an extensional well-founded relation on
/// `0..nodes`: the unique map onto a transitive set with
/// `x E y  iff  collapse(x) in collapse(y)`. Edges read `(x, y)` as "x is
/// E-below y".
pub fn transitive_collapse(
    nodes: usize,
    edges: &[(usize, usize)],
) -> Result<Vec<HfSet>, ForcingError> {
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    for &(x, y) in edges {
        assert!(x < nodes && y < nodes, "edge out of range");
        preds[y].push(x);
    }
    for p in &mut preds {
        p.sort_unstable();
        p.dedup();
    }
    // extensionality: distinct nodes must have distinct E-preimages
    for a in 0..nodes {
        for b in (a + 1)..nodes {
            if preds[a] == preds[b] {
                return Err(ForcingError::NotExtensional(a, b));
            }
        }
    }
    // well-foundedness on a finite carrier is acyclicity; Kahn sweep
    let mut out_count: Vec<usize> = preds.iter().map(Vec::len).collect();
    let mut order: Vec<usize> = (0..nodes).filter(|&n| out_count[n] == 0).collect();
    let mut succs: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    for (y, ps) in preds.iter().enumerate() {
        for &x in ps {
            succs[x].push(y);
        }
    }
    let mut head = 0;
    while head < order.len() {
        let n = order[head];
        head += 1;
        for &s in &succs[n] {
            out_count[s] -= 1;
            if out_count[s] == 0 {
                order.push(s);
            }
        }
    }
    if order.len() != nodes {
        return Err(ForcingError::NotWellFounded);
    }
    let mut image: Vec<Option<HfSet>> = vec![None; nodes];
    for &n in &order {
        let members = preds[n]
            .iter()
            .map(|&p| image[p].clone().expect("processed in E-order"));
        image[n] = Some(HfSet::from_members(members));
    }
    let collapse: Vec<HfSet> = image.into_iter().map(Option::unwrap).collect();
    // the isomorphism property, verified outright
    for x in 0..nodes {
        for y in 0..nodes {
            let edge = preds[y].binary_search(&x).is_ok();
            assert_eq!(
                edge,
                collapse[y].has_member(&collapse[x]),
                "collapse is an isomorphism"
            );
        }
    }
    Ok(collapse)
}

/// A poset-labelled name: a finite set of pairs (child name, condition).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct PName {
    pairs: Vec<(PName, usize)>,
}

impl PName {
    pub fn from_pairs<I: IntoIterator<Item = (PName, usize)>>(pairs: I) -> Self {
        let mut p: Vec<(PName, usize)> = pairs.into_iter().collect();
        p.sort();
        p.dedup();
        PName { pairs: p }
    }

    pub fn empty() -> Self {
        PName { pairs: Vec::new() }
    }

    pub fn pairs(&self) -> &[(PName, usize)] {
        &self.pairs
    }

    pub fn rank(&self) -> usize {
        self.pairs
            .iter()
            .map(|(y, _)| y.rank() + 1)
            .max()
            .unwrap_or(0)
    }
}

pub const DEFAULT_NAME_RANK_BOUND: usize = 8;

/// The canonical name whose evaluation is `a` under every filter: every
/// member named with the maximum condition.
pub fn check_name(
    poset: &FinitePoset,
    a: &HfSet,
    rank_bound: usize,
) -> Result<PName, ForcingError> {
    if a.rank() > rank_bound {
        return Err(ForcingError::RankBoundExceeded {
            rank: a.rank(),
            bound: rank_bound,
        });
    }
    let top = poset.top().ok_or(ForcingError::NoTopElement)?;
    fn build(a: &HfSet, top: usize) -> PName {
        PName::from_pairs(a.members().iter().map(|b| (build(b, top), top)))
    }
    Ok(build(a, top))
}

/// The canonical name for the generic object: evaluates to (the ordinal
/// encoding of) the filter itself, for any filter.
pub fn generic_name(poset: &FinitePoset) -> Result<PName, ForcingError> {
    let top = poset.top().ok_or(ForcingError::NoTopElement)?;
    let _ = top;
    let pairs: Result<Vec<(PName, usize)>, ForcingError> = (0..poset.len())
        .map(|p| Ok((check_name(poset, &HfSet::ordinal(p), usize::MAX)?, p)))
        .collect();
    Ok(PName::from_pairs(pairs?))
}

/// `x` evaluated under a filter: members named by conditions the filter
/// contains, recursively.
pub fn eval_name(x: &PName, filter: &BitSet) -> HfSet {
    HfSet::from_members(
        x.pairs
            .iter()
            .filter(|(_, p)| filter.contains(*p))
            .map(|(y, _)| eval_name(y, filter)),
    )
}

/// Position of `(r0, r1)` in the max-then-min-then-first well order on
/// pairs of naturals; strictly decreases when either coordinate drops,
/// even after swapping the pair.
pub fn pair_rank(r0: usize, r1: usize) -> u64 {
    let (r0, r1) = (r0 as u64, r1 as u64);
    let m = r0.max(r1);
    let v = r0.min(r1);
    if r0 == r1 {
        m * m + 2 * m
    } else {
        m * m + 2 * v + u64::from(r0 != v)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
enum BvKind {
    Member,
    Equal,
}

/// A boolean-valuation session over a separative poset with a maximum:
/// computes values in `Reg P` for primitive and compound sentences, with a
/// per-session memo table keyed on canonical name forms.
pub struct BvSession<'a> {
    poset: &'a FinitePoset,
    reg: RegularAlgebra,
    memo: HashMap<(BvKind, PName, PName), BaElem>,
}

impl<'a> BvSession<'a> {
    pub fn new(poset: &'a FinitePoset) -> Result<Self, ForcingError> {
        if poset.top().is_none() {
            return Err(ForcingError::NoTopElement);
        }
        if !poset.is_separative() {
            return Err(ForcingError::NotSeparative);
        }
        Ok(BvSession {
            poset,
            reg: regular_algebra(poset),
            memo: HashMap::new(),
        })
    }

    pub fn reg(&self) -> &RegularAlgebra {
        &self.reg
    }

    pub fn poset(&self) -> &'a FinitePoset {
        self.poset
    }

    fn implies(&self, a: &BaElem, b: &BaElem) -> BaElem {
        self.reg.algebra().implies(a, b)
    }

    /// `[[ x0 in x1 ]] = join over (y,p) in x1 of (cone p  wedge  [[ y = x0 ]])`.
    pub fn bv_membership(&mut self, x0: &PName, x1: &PName) -> BaElem {
        let key = (BvKind::Member, x0.clone(), x1.clone());
        if let Some(v) = self.memo.get(&key) {
            return v.clone();
        }
        let here = pair_rank(x0.rank(), x1.rank());
        let mut out = self.reg.algebra().zero();
        for (y, p) in x1.pairs.clone() {
            assert!(
                pair_rank(y.rank(), x0.rank()) < here,
                "membership recursion descends the pair rank"
            );
            let eq = self.bv_equality(&y, x0);
            out.union_with(&self.reg.algebra().meet(self.reg.embed(p), &eq));
        }
        self.memo.insert(key, out.clone());
        out
    }

    /// `[[ x0 = x1 ]]`: both inclusions, each a meet of implications from
    /// the labelling condition to membership in the other name.
    pub fn bv_equality(&mut self, x0: &PName, x1: &PName) -> BaElem {
        let key = (BvKind::Equal, x0.clone(), x1.clone());
        if let Some(v) = self.memo.get(&key) {
            return v.clone();
        }
        let here = pair_rank(x0.rank(), x1.rank());
        let mut out = self.reg.algebra().one();
        for (y, p) in x0.pairs.clone() {
            assert!(
                pair_rank(y.rank(), x1.rank()) < here,
                "equality recursion descends the pair rank"
            );
            let inner = self.bv_membership(&y, x1);
            out.intersect_with(&self.implies(&self.reg.embed(p).clone(), &inner));
        }
        for (y, p) in x1.pairs.clone() {
            assert!(
                pair_rank(y.rank(), x0.rank()) < here,
                "equality recursion descends the pair rank"
            );
            let inner = self.bv_membership(&y, x0);
            out.intersect_with(&self.implies(&self.reg.embed(p).clone(), &inner));
        }
        self.memo.insert(key, out.clone());
        out
    }

    /// `[[ x in M-tilde ]] = join over ground sets a of [[ x = check a ]]`.
    pub fn bv_in_universe(&mut self, x: &PName, universe: &[HfSet]) -> BaElem {
        let mut out = self.reg.algebra().zero();
        for a in universe {
            let a_name = check_name(self.poset, a, usize::MAX).expect("poset has a top");
            out.union_with(&self.bv_equality(x, &a_name));
        }
        out
    }

    pub fn bv_formula(&mut self, formula: &Formula, universe: &[HfSet]) -> BaElem {
        let mut env = Vec::new();
        self.bv_formula_in(formula, universe, &mut env)
    }

    fn bv_formula_in(
        &mut self,
        formula: &Formula,
        universe: &[HfSet],
        env: &mut Vec<PName>,
    ) -> BaElem {
        let a = self.reg.algebra().clone();
        match formula {
            Formula::Member(t0, t1) => {
                let (n0, n1) = (t0.resolve(env), t1.resolve(env));
                self.bv_membership(&n0, &n1)
            }
            Formula::Equal(t0, t1) => {
                let (n0, n1) = (t0.resolve(env), t1.resolve(env));
                self.bv_equality(&n0, &n1)
            }
            Formula::InUniverse(t) => {
                let n = t.resolve(env);
                self.bv_in_universe(&n, universe)
            }
            Formula::Not(f) => a.compl(&self.bv_formula_in(f, universe, env)),
            Formula::And(f, g) => a.meet(
                &self.bv_formula_in(f, universe, env),
                &self.bv_formula_in(g, universe, env),
            ),
            Formula::Or(f, g) => a.join(
                &self.bv_formula_in(f, universe, env),
                &self.bv_formula_in(g, universe, env),
            ),
            Formula::Implies(f, g) => {
                let fv = self.bv_formula_in(f, universe, env);
                let gv = self.bv_formula_in(g, universe, env);
                a.implies(&fv, &gv)
            }
            Formula::Iff(f, g) => {
                let fv = self.bv_formula_in(f, universe, env);
                let gv = self.bv_formula_in(g, universe, env);
                a.meet(&a.implies(&fv, &gv), &a.implies(&gv, &fv))
            }
            Formula::All(bound, f) => {
                let mut out = a.one();
                for name in bound {
                    env.push(name.clone());
                    out.intersect_with(&self.bv_formula_in(f, universe, env));
                    env.pop();
                }
                out
            }
            Formula::Exists(bound, f) => {
                let mut out = a.zero();
                for name in bound {
                    env.push(name.clone());
                    out.union_with(&self.bv_formula_in(f, universe, env));
                    env.pop();
                }
                out
            }
        }
    }
}

/// A term of the forcing language: a name constant or a bound variable
/// (de Bruijn index into the enclosing quantifiers).
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Term {
    Name(PName),
    Var(usize),
}

impl Term {
    fn resolve(&self, env: &[PName]) -> PName {
        match self {
            Term::Name(n) => n.clone(),
            Term::Var(i) => env[env.len() - 1 - *i].clone(),
        }
    }
}

/// Sentences over primitive membership, equality, and ground-universe
/// membership, with connectives and quantifiers bounded by explicit finite
/// name lists.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Formula {
    Member(Term, Term),
    Equal(Term, Term),
    InUniverse(Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    All(Vec<PName>, Box<Formula>),
    Exists(Vec<PName>, Box<Formula>),
}

/// Direct model-theoretic evaluation in the generic extension determined by
/// `filter`.
pub fn models(formula: &Formula, filter: &BitSet, universe: &[HfSet]) -> bool {
    fn go(formula: &Formula, filter: &BitSet, universe: &[HfSet], env: &mut Vec<PName>) -> bool {
        match formula {
            Formula::Member(t0, t1) => {
                let v0 = eval_name(&t0.resolve(env), filter);
                let v1 = eval_name(&t1.resolve(env), filter);
                v1.has_member(&v0)
            }
            Formula::Equal(t0, t1) => {
                eval_name(&t0.resolve(env), filter) == eval_name(&t1.resolve(env), filter)
            }
            Formula::InUniverse(t) => {
                let v = eval_name(&t.resolve(env), filter);
                universe.contains(&v)
            }
            Formula::Not(f) => !go(f, filter, universe, env),
            Formula::And(f, g) => go(f, filter, universe, env) && go(g, filter, universe, env),
            Formula::Or(f, g) => go(f, filter, universe, env) || go(g, filter, universe, env),
            Formula::Implies(f, g) => !go(f, filter, universe, env) || go(g, filter, universe, env),
            Formula::Iff(f, g) => go(f, filter, universe, env) == go(g, filter, universe, env),
            Formula::All(bound, f) => bound.iter().all(|n| {
                env.push(n.clone());
                let v = go(f, filter, universe, env);
                env.pop();
                v
            }),
            Formula::Exists(bound, f) => bound.iter().any(|n| {
                env.push(n.clone());
                let v = go(f, filter, universe, env);
                env.pop();
                v
            }),
        }
    }
    go(formula, filter, universe, &mut Vec::new())
}

#[derive(Debug, Clone)]
pub struct TruthLemmaDiscrepancy {
    pub minimal_element: usize,
    pub sentence_index: usize,
    pub truth: bool,
    pub forced: bool,
}

#[derive(Debug, Clone)]
pub struct TruthLemmaReport {
    pub generics: usize,
    pub sentences: usize,
    pub checks: usize,
    pub discrepancies: Vec<TruthLemmaDiscrepancy>,
}

/// For every generic filter (principal at a minimal element, which is what
/// genericity over the full finite ground model comes to) and every corpus
/// sentence: truth in the evaluated structure must coincide with some
/// member of the filter forcing the sentence.
pub fn truth_lemma_check(
    poset: &FinitePoset,
    universe: &[HfSet],
    corpus: &[Formula],
) -> Result<TruthLemmaReport, ForcingError> {
    let mut session = BvSession::new(poset)?;
    truth_lemma_check_in(&mut session, universe, corpus)
}

fn truth_lemma_check_in(
    session: &mut BvSession,
    universe: &[HfSet],
    corpus: &[Formula],
) -> Result<TruthLemmaReport, ForcingError> {
    let poset = session.poset();
    let minimal: Vec<usize> = poset.minimal_elements().iter().collect();
    let mut checks = 0;
    let mut discrepancies = Vec::new();
    for (si, sentence) in corpus.iter().enumerate() {
        let value = session.bv_formula(sentence, universe);
        for &m in &minimal {
            let filter = poset.above(m);
            let truth = models(sentence, filter, universe);
            // the filter meets the (downward closed) regular set exactly
            // when its minimal element carries the corresponding atom
            let atom = (0..session.reg().atoms())
                .find(|&a| session.reg().atom_element(a) == m)
                .expect("minimal elements are atoms");
            let forced = value.contains(atom);
            checks += 1;
            if truth != forced {
                discrepancies.push(TruthLemmaDiscrepancy {
                    minimal_element: m,
                    sentence_index: si,
                    truth,
                    forced,
                });
            }
        }
    }
    Ok(TruthLemmaReport {
        generics: minimal.len(),
        sentences: corpus.len(),
        checks,
        discrepancies,
    })
}

/// Seeded random sentence corpus over a name pool drawn from the ground
/// universe, the canonical generic name, and composite labelled names.
pub fn generate_sentence_corpus(
    poset: &FinitePoset,
    universe: &[HfSet],
    count: usize,
    seed: u64,
) -> Result<Vec<Formula>, ForcingError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool: Vec<PName> = Vec::new();
    for a in universe {
        pool.push(check_name(poset, a, usize::MAX)?);
    }
    pool.push(generic_name(poset)?);
    // composite names mixing children and conditions
    let base = pool.clone();
    for _ in 0..8 {
        let width = rng.random_range(1..=3);
        let pairs = (0..width)
            .map(|_| {
                (
                    base[rng.random_range(0..base.len())].clone(),
                    rng.random_range(0..poset.len()),
                )
            })
            .collect::<Vec<_>>();
        pool.push(PName::from_pairs(pairs));
    }
    fn random_term(rng: &mut ChaCha8Rng, pool: &[PName], depth_vars: usize) -> Term {
        if depth_vars > 0 && rng.random_bool(0.3) {
            Term::Var(rng.random_range(0..depth_vars))
        } else {
            Term::Name(pool[rng.random_range(0..pool.len())].clone())
        }
    }
    fn random_formula(
        rng: &mut ChaCha8Rng,
        pool: &[PName],
        budget: usize,
        depth_vars: usize,
    ) -> Formula {
        if budget == 0 || rng.random_bool(0.35) {
            let t0 = random_term(rng, pool, depth_vars);
            let t1 = random_term(rng, pool, depth_vars);
            return match rng.random_range(0..3) {
                0 => Formula::Member(t0, t1),
                1 => Formula::Equal(t0, t1),
                _ => Formula::InUniverse(t0),
            };
        }
        match rng.random_range(0..7) {
            0 => Formula::Not(Box::new(random_formula(rng, pool, budget - 1, depth_vars))),
            1 => Formula::And(
                Box::new(random_formula(rng, pool, budget - 1, depth_vars)),
                Box::new(random_formula(rng, pool, budget - 1, depth_vars)),
            ),
            2 => Formula::Or(
                Box::new(random_formula(rng, pool, budget - 1, depth_vars)),
                Box::new(random_formula(rng, pool, budget - 1, depth_vars)),
            ),
            3 => Formula::Implies(
                Box::new(random_formula(rng, pool, budget - 1, depth_vars)),
                Box::new(random_formula(rng, pool, budget - 1, depth_vars)),
            ),
            4 => Formula::Iff(
                Box::new(random_formula(rng, pool, budget - 1, depth_vars)),
                Box::new(random_formula(rng, pool, budget - 1, depth_vars)),
            ),
            5 => {
                let bound = random_bound(rng, pool);
                Formula::All(
                    bound,
                    Box::new(random_formula(rng, pool, budget - 1, depth_vars + 1)),
                )
            }
            _ => {
                let bound = random_bound(rng, pool);
                Formula::Exists(
                    bound,
                    Box::new(random_formula(rng, pool, budget - 1, depth_vars + 1)),
                )
            }
        }
    }
    fn random_bound(rng: &mut ChaCha8Rng, pool: &[PName]) -> Vec<PName> {
        let width = rng.random_range(1..=3);
        (0..width)
            .map(|_| pool[rng.random_range(0..pool.len())].clone())
            .collect()
    }
    Ok((0..count)
        .map(|_| random_formula(&mut rng, &pool, 3, 0))
        .collect())
}

/// CLI name literal: `check(<hf>)`, `gname`, or `{[<name>,<element>],...}`.
pub fn parse_name(poset: &FinitePoset, text: &str) -> Result<PName, ForcingError> {
    let trimmed: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if trimmed == "gname" {
        return generic_name(poset);
    }
    if let Some(rest) = trimmed.strip_prefix("check(") {
        let inner = rest
            .strip_suffix(')')
            .ok_or_else(|| ForcingError::Parse("expected ')'".into()))?;
        let hf = HfSet::parse(inner)?;
        return check_name(poset, &hf, DEFAULT_NAME_RANK_BOUND);
    }
    parse_name_set(poset, &trimmed)
}

fn parse_name_set(poset: &FinitePoset, text: &str) -> Result<PName, ForcingError> {
    let inner = text
        .strip_prefix('{')
        .and_then(|t| t.strip_suffix('}'))
        .ok_or_else(|| ForcingError::Parse("expected {[name,element],...}".into()))?;
    if inner.is_empty() {
        return Ok(PName::empty());
    }
    let mut pairs = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    let bytes: Vec<char> = inner.chars().collect();
    let mut items = Vec::new();
    for (i, &c) in bytes.iter().enumerate() {
        match c {
            '[' | '{' | '(' => depth += 1,
            ']' | '}' | ')' => depth -= 1,
            ',' if depth == 0 => {
                items.push(bytes[start..i].iter().collect::<String>());
                start = i + 1;
            }
            _ => {}
        }
    }
    items.push(bytes[start..].iter().collect::<String>());
    for item in items {
        let body = item
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| ForcingError::Parse(format!("expected [name,element], got {item}")))?;
        // split at the last top-level comma: the element name follows it
        let chars: Vec<char> = body.chars().collect();
        let mut depth = 0usize;
        let mut split = None;
        for (i, &c) in chars.iter().enumerate() {
            match c {
                '[' | '{' | '(' => depth += 1,
                ']' | '}' | ')' => depth -= 1,
                ',' if depth == 0 => split = Some(i),
                _ => {}
            }
        }
        let split = split.ok_or_else(|| ForcingError::Parse("expected [name,element]".into()))?;
        let name_text: String = chars[..split].iter().collect();
        let elem_text: String = chars[split + 1..].iter().collect();
        let child = parse_name(poset, &name_text)?;
        let elem = poset
            .element(&elem_text)
            .map_err(|_| ForcingError::Parse(format!("unknown poset element {elem_text}")))?;
        pairs.push((child, elem));
    }
    Ok(PName::from_pairs(pairs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn hf_basics() {
        assert_eq!(HfSet::empty().rank(), 0);
        assert_eq!(HfSet::ordinal(3).rank(), 3);
        assert_eq!(HfSet::ordinal(2).members().len(), 2);
        let parsed = HfSet::parse("{{},{{}}}").unwrap();
        assert_eq!(parsed, HfSet::ordinal(2));
        assert_eq!(parsed.to_string(), "{{},{{}}}");
        assert!(HfSet::parse("{{}").is_err());
        // duplicates collapse
        assert_eq!(
            HfSet::from_members([HfSet::empty(), HfSet::empty()]),
            HfSet::from_members([HfSet::empty()])
        );
    }

    #[test]
    fn universe_counts() {
        assert_eq!(universe_up_to_rank(0).len(), 1);
        assert_eq!(universe_up_to_rank(1).len(), 2);
        assert_eq!(universe_up_to_rank(2).len(), 4);
        assert_eq!(universe_up_to_rank(3).len(), 16);
        for s in universe_up_to_rank(3) {
            assert!(s.rank() <= 3);
        }
    }

    #[test]
    fn collapse_examples() {
        // x E y, x E z, y E z collapses to the von Neumann numerals
        let c = transitive_collapse(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        assert_eq!(c[0], HfSet::ordinal(0));
        assert_eq!(c[1], HfSet::ordinal(1));
        assert_eq!(c[2], HfSet::ordinal(2));

        let c = transitive_collapse(1, &[]).unwrap();
        assert_eq!(c[0], HfSet::empty());

        assert_eq!(
            transitive_collapse(2, &[]),
            Err(ForcingError::NotExtensional(0, 1))
        );
        assert_eq!(
            transitive_collapse(2, &[(0, 1), (1, 0)]),
            Err(ForcingError::NotWellFounded)
        );
    }

    #[test]
    fn check_name_evaluates_to_itself() {
        // rank <= 3 across the suite posets with a top
        for (_, p) in fixtures::poset_suite() {
            if p.top().is_none() {
                continue;
            }
            for a in universe_up_to_rank(3) {
                let name = check_name(&p, &a, 4).unwrap();
                for e in 0..p.len() {
                    let filter = p.above(e);
                    assert_eq!(eval_name(&name, filter), a);
                }
            }
        }
        // the full rank-4 universe on the three-element poset
        let p = fixtures::vee();
        for a in universe_up_to_rank(4) {
            let name = check_name(&p, &a, 4).unwrap();
            for e in 0..p.len() {
                assert_eq!(eval_name(&name, p.above(e)), a);
            }
        }
        let deep = HfSet::ordinal(5);
        assert!(matches!(
            check_name(&p, &deep, 4),
            Err(ForcingError::RankBoundExceeded { .. })
        ));
    }

    #[test]
    fn generic_name_evaluates_to_the_filter() {
        for (_, p) in fixtures::poset_suite() {
            if p.top().is_none() {
                continue;
            }
            let gname = generic_name(&p).unwrap();
            // all filters, not only generic ones: every principal filter
            for e in 0..p.len() {
                let filter = p.above(e);
                let expected = HfSet::from_members(filter.iter().map(HfSet::ordinal));
                assert_eq!(eval_name(&gname, filter), expected);
            }
        }
        // worked case: principal filter at a in the vee
        let p = fixtures::vee();
        let gname = generic_name(&p).unwrap();
        let filter = p.above(0);
        assert_eq!(
            eval_name(&gname, filter),
            HfSet::from_members([HfSet::ordinal(0), HfSet::ordinal(2)])
        );
    }

    #[test]
    fn eval_name_examples() {
        let p = fixtures::vee();
        let zero_check = check_name(&p, &HfSet::empty(), 4).unwrap();
        let x = PName::from_pairs([(zero_check, 0)]); // {[check 0, a]}
        let at_a = p.above(0);
        let at_b = p.above(1);
        assert_eq!(eval_name(&x, at_a), HfSet::ordinal(1), "{{0}} = 1");
        assert_eq!(eval_name(&x, at_b), HfSet::empty());
        assert_eq!(eval_name(&PName::empty(), at_a), HfSet::empty());
    }

    #[test]
    fn pair_rank_properties() {
        assert_eq!(pair_rank(0, 0), 0);
        assert_eq!(pair_rank(0, 1), 1);
        assert_eq!(pair_rank(1, 0), 2, "consecutive with its swap");
        // strict decrease when either coordinate drops, with or without swap
        for r0 in 0..=4usize {
            for r1 in 0..=4usize {
                let here = pair_rank(r0, r1);
                for s0 in 0..r0 {
                    assert!(pair_rank(s0, r1) < here);
                    assert!(pair_rank(r1, s0) < here);
                }
                for s1 in 0..r1 {
                    assert!(pair_rank(r0, s1) < here);
                    assert!(pair_rank(s1, r0) < here);
                }
            }
        }
        // bijectivity on a grid
        let mut seen = std::collections::BTreeSet::new();
        for r0 in 0..=4usize {
            for r1 in 0..=4usize {
                assert!(seen.insert(pair_rank(r0, r1)));
            }
        }
    }

    #[test]
    fn bv_primitive_examples() {
        let p = fixtures::vee();
        let mut session = BvSession::new(&p).unwrap();
        let zero = check_name(&p, &HfSet::empty(), 4).unwrap();
        assert_eq!(
            session.bv_equality(&zero, &zero),
            session.reg().algebra().one()
        );
        assert_eq!(
            session.bv_membership(&zero, &zero),
            session.reg().algebra().zero()
        );
        // x = {[check 0, a]}: the value of "x = 1" is the a-cone
        let x = PName::from_pairs([(zero.clone(), 0)]);
        let one_name = check_name(&p, &HfSet::ordinal(1), 4).unwrap();
        let v = session.bv_equality(&x, &one_name);
        assert_eq!(&v, session.reg().embed(0));
        // cross-check by the truth lemma over both principal generics
        for m in p.minimal_elements().iter() {
            let truth = eval_name(&x, p.above(m)) == HfSet::ordinal(1);
            let atom = (0..session.reg().atoms())
                .find(|&a| session.reg().atom_element(a) == m)
                .unwrap();
            assert_eq!(truth, v.contains(atom));
        }
    }

    #[test]
    fn bv_check_names_agree_with_equality() {
        let p = fixtures::vee();
        let mut session = BvSession::new(&p).unwrap();
        for a in universe_up_to_rank(3) {
            for b in universe_up_to_rank(3) {
                let na = check_name(&p, &a, 4).unwrap();
                let nb = check_name(&p, &b, 4).unwrap();
                let v = session.bv_equality(&na, &nb);
                if a == b {
                    assert_eq!(v, session.reg().algebra().one());
                } else {
                    assert_eq!(v, session.reg().algebra().zero());
                }
            }
        }
    }

    #[test]
    fn bv_equality_is_an_equivalence_up_to_value() {
        let p = fixtures::vee();
        let mut session = BvSession::new(&p).unwrap();
        // all names of rank <= 2 with children drawn from rank <= 1 names
        let mut names: Vec<PName> = vec![PName::empty()];
        let rank1: Vec<PName> = (0..p.len())
            .map(|e| PName::from_pairs([(PName::empty(), e)]))
            .collect();
        names.extend(rank1.clone());
        for (i, a) in rank1.iter().enumerate() {
            for e in 0..p.len() {
                names.push(PName::from_pairs([(a.clone(), e)]));
                if i + 1 < rank1.len() {
                    names.push(PName::from_pairs([
                        (a.clone(), e),
                        (rank1[i + 1].clone(), (e + 1) % p.len()),
                    ]));
                }
            }
        }
        let alg = session.reg().algebra().clone();
        for x in &names {
            assert_eq!(session.bv_equality(x, x), alg.one(), "reflexive");
            for y in &names {
                let xy = session.bv_equality(x, y);
                assert_eq!(xy, session.bv_equality(y, x), "symmetric");
                for z in &names {
                    let yz = session.bv_equality(y, z);
                    let xz = session.bv_equality(x, z);
                    assert!(
                        alg.leq(&alg.meet(&xy, &yz), &xz),
                        "transitive up to boolean value"
                    );
                }
            }
        }
    }

    #[test]
    fn bv_in_universe_examples() {
        let p = fixtures::vee();
        let mut session = BvSession::new(&p).unwrap();
        let universe = universe_up_to_rank(2);
        let two = check_name(&p, &HfSet::ordinal(2), 4).unwrap();
        assert_eq!(
            session.bv_in_universe(&two, &universe),
            session.reg().algebra().one()
        );
        // x = {[check 0, a]} evaluates to 1 or 0, both in the universe
        let zero = check_name(&p, &HfSet::empty(), 4).unwrap();
        let x = PName::from_pairs([(zero, 0)]);
        assert_eq!(
            session.bv_in_universe(&x, &universe),
            session.reg().algebra().one()
        );
        assert_eq!(
            session.bv_in_universe(&x, &[]),
            session.reg().algebra().zero()
        );
    }

    #[test]
    fn bv_sentence_examples() {
        let p = fixtures::vee();
        let mut session = BvSession::new(&p).unwrap();
        let universe = universe_up_to_rank(2);
        let zero = check_name(&p, &HfSet::empty(), 4).unwrap();
        let x = PName::from_pairs([(zero.clone(), 0)]);
        let sigma = Formula::Equal(
            Term::Name(x),
            Term::Name(check_name(&p, &HfSet::ordinal(1), 4).unwrap()),
        );
        let excluded_middle = Formula::Or(
            Box::new(sigma.clone()),
            Box::new(Formula::Not(Box::new(sigma))),
        );
        assert_eq!(
            session.bv_formula(&excluded_middle, &universe),
            session.reg().algebra().one()
        );
        let one_name = check_name(&p, &HfSet::ordinal(1), 4).unwrap();
        let exists = Formula::Exists(
            vec![zero.clone(), one_name],
            Box::new(Formula::Equal(Term::Var(0), Term::Name(zero.clone()))),
        );
        assert_eq!(
            session.bv_formula(&exists, &universe),
            session.reg().algebra().one()
        );
        // "check a is in the generic object"
        let gname = generic_name(&p).unwrap();
        let a_in_g = Formula::Member(
            Term::Name(check_name(&p, &HfSet::ordinal(0), 4).unwrap()),
            Term::Name(gname),
        );
        assert_eq!(
            &session.bv_formula(&a_in_g, &universe),
            session.reg().embed(0)
        );
    }

    #[test]
    fn truth_lemma_small_run() {
        let p = fixtures::vee();
        let universe = universe_up_to_rank(2);
        let corpus = generate_sentence_corpus(&p, &universe, 60, 17).unwrap();
        let report = truth_lemma_check(&p, &universe, &corpus).unwrap();
        assert_eq!(report.generics, 2);
        assert_eq!(report.sentences, 60);
        assert!(
            report.discrepancies.is_empty(),
            "{:?}",
            report.discrepancies
        );
    }

    #[test]
    fn truth_lemma_detects_corrupted_values() {
        let p = fixtures::vee();
        let universe = universe_up_to_rank(2);
        let zero = check_name(&p, &HfSet::empty(), 4).unwrap();
        let x = PName::from_pairs([(zero.clone(), 0)]);
        let one_name = check_name(&p, &HfSet::ordinal(1), 4).unwrap();
        let corpus = vec![Formula::Equal(
            Term::Name(x.clone()),
            Term::Name(one_name.clone()),
        )];
        let mut session = BvSession::new(&p).unwrap();
        // poison the memo entry for the primitive sentence with a wrong value
        session
            .memo
            .insert((BvKind::Equal, x, one_name), session.reg.algebra().zero());
        let report = truth_lemma_check_in(&mut session, &universe, &corpus).unwrap();
        assert!(!report.discrepancies.is_empty());
    }

    #[test]
    fn chain_poset_is_rejected_for_bv() {
        let c = fixtures::chain2();
        assert!(matches!(
            BvSession::new(&c),
            Err(ForcingError::NotSeparative)
        ));
    }

    #[test]
    fn name_literals_parse() {
        let p = fixtures::vee();
        assert_eq!(parse_name(&p, "gname").unwrap(), generic_name(&p).unwrap());
        assert_eq!(
            parse_name(&p, "check({})").unwrap(),
            check_name(&p, &HfSet::empty(), 8).unwrap()
        );
        let composite = parse_name(&p, "{[check({}),a],[gname,1]}").unwrap();
        assert_eq!(composite.pairs().len(), 2);
        assert!(parse_name(&p, "{[check({}),zz]}").is_err());
    }
}
