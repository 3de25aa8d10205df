//! Boolean expressions: primitives, complement, and set-valued join/meet,
//! with rank, subexpressions, the Borel test, valuation under an
//! interpretation, the genericity requirement sets, and the equivalence of
//! the projection-valued and prefilter-membership valuations on generic
//! prefilters.
//!
//! Join and meet take finite child *sets*: constructors sort and collapse
//! duplicates, so structural equality is set equality.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::boolalg::{BaElem, FiniteBooleanAlgebra};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum BoolExpr {
    Prim(usize),
    Compl(Box<BoolExpr>),
    Join(Vec<BoolExpr>),
    Meet(Vec<BoolExpr>),
}

impl BoolExpr {
    pub fn prim(i: usize) -> Self {
        BoolExpr::Prim(i)
    }

    pub fn compl(e: BoolExpr) -> Self {
        BoolExpr::Compl(Box::new(e))
    }

    pub fn join<I: IntoIterator<Item = BoolExpr>>(children: I) -> Self {
        BoolExpr::Join(canonical_children(children))
    }

    pub fn meet<I: IntoIterator<Item = BoolExpr>>(children: I) -> Self {
        BoolExpr::Meet(canonical_children(children))
    }

    /// 0 for primitives, successor through complement, sup of successors
    /// through join/meet.
    pub fn rank(&self) -> usize {
        match self {
            BoolExpr::Prim(_) => 0,
            BoolExpr::Compl(e) => e.rank() + 1,
            BoolExpr::Join(es) | BoolExpr::Meet(es) => {
                es.iter().map(|e| e.rank() + 1).max().unwrap_or(0)
            }
        }
    }

    pub fn subexpressions(&self) -> BTreeSet<BoolExpr> {
        let mut out = BTreeSet::new();
        self.collect_subexpressions(&mut out);
        out
    }

    fn collect_subexpressions(&self, out: &mut BTreeSet<BoolExpr>) {
        if !out.insert(self.clone()) {
            return;
        }
        match self {
            BoolExpr::Prim(_) => {}
            BoolExpr::Compl(e) => e.collect_subexpressions(out),
            BoolExpr::Join(es) | BoolExpr::Meet(es) => {
                for e in es {
                    e.collect_subexpressions(out);
                }
            }
        }
    }

    /// Every join and meet in a finite tree has finitely many children, so
    /// this always holds at desk scale; the node-arity walk is the primary
    /// criterion, with the subexpression count available as the equivalent
    /// formulation.
    pub fn is_borel(&self) -> bool {
        match self {
            BoolExpr::Prim(_) => true,
            BoolExpr::Compl(e) => e.is_borel(),
            BoolExpr::Join(es) | BoolExpr::Meet(es) => es.iter().all(|e| e.is_borel()),
        }
    }

    pub fn primitives(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.collect_primitives(&mut out);
        out
    }

    fn collect_primitives(&self, out: &mut BTreeSet<usize>) {
        match self {
            BoolExpr::Prim(i) => {
                out.insert(*i);
            }
            BoolExpr::Compl(e) => e.collect_primitives(out),
            BoolExpr::Join(es) | BoolExpr::Meet(es) => {
                for e in es {
                    e.collect_primitives(out);
                }
            }
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            BoolExpr::Prim(_) => 1,
            BoolExpr::Compl(e) => 1 + e.node_count(),
            BoolExpr::Join(es) | BoolExpr::Meet(es) => {
                1 + es.iter().map(BoolExpr::node_count).sum::<usize>()
            }
        }
    }
}

fn canonical_children<I: IntoIterator<Item = BoolExpr>>(children: I) -> Vec<BoolExpr> {
    let set: BTreeSet<BoolExpr> = children.into_iter().collect();
    set.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprError {
    UnassignedPrimitive(usize),
    NotAPrefilter,
    NotGeneric,
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprError::UnassignedPrimitive(i) => write!(f, "primitive e{i} has no assignment"),
            ExprError::NotAPrefilter => write!(f, "the given set is not a prefilter"),
            ExprError::NotGeneric => {
                write!(f, "prefilter is not generic for the requirement sets")
            }
        }
    }
}

impl std::error::Error for ExprError {}

/// An assignment of primitive indices to elements of a finite boolean
/// algebra.
#[derive(Clone, Debug)]
pub struct Interpretation<'a> {
    pub algebra: &'a FiniteBooleanAlgebra,
    pub assignment: BTreeMap<usize, BaElem>,
}

impl<'a> Interpretation<'a> {
    pub fn new(algebra: &'a FiniteBooleanAlgebra, pairs: Vec<(usize, BaElem)>) -> Self {
        Interpretation {
            algebra,
            assignment: pairs.into_iter().collect(),
        }
    }

    fn value(&self, i: usize) -> Result<&BaElem, ExprError> {
        self.assignment
            .get(&i)
            .ok_or(ExprError::UnassignedPrimitive(i))
    }
}

/// Structural recursion mapping complement, join, and meet to the algebra's
/// operations. The empty join is 0 and the empty meet is 1.
pub fn evaluate(e: &BoolExpr, interp: &Interpretation) -> Result<BaElem, ExprError> {
    let a = interp.algebra;
    Ok(match e {
        BoolExpr::Prim(i) => interp.value(*i)?.clone(),
        BoolExpr::Compl(inner) => a.compl(&evaluate(inner, interp)?),
        BoolExpr::Join(es) => {
            let mut out = a.zero();
            for child in es {
                out.union_with(&evaluate(child, interp)?);
            }
            out
        }
        BoolExpr::Meet(es) => {
            let mut out = a.one();
            for child in es {
                out.intersect_with(&evaluate(child, interp)?);
            }
            out
        }
    })
}

/// The family of requirement sets for an expression under a propositional
/// interpretation: singletons for every subexpression value, the child-value
/// set for every join, and the complemented child-value set for every meet.
pub fn genericity_requirement_sets(
    e: &BoolExpr,
    pi: &Interpretation,
) -> Result<Vec<BTreeSet<BaElem>>, ExprError> {
    let mut family: BTreeSet<BTreeSet<BaElem>> = BTreeSet::new();
    for sub in e.subexpressions() {
        family.insert([evaluate(&sub, pi)?].into_iter().collect());
        match &sub {
            BoolExpr::Join(es) => {
                let set: Result<BTreeSet<_>, _> = es.iter().map(|c| evaluate(c, pi)).collect();
                family.insert(set?);
            }
            BoolExpr::Meet(es) => {
                let set: Result<BTreeSet<_>, _> = es
                    .iter()
                    .map(|c| evaluate(c, pi).map(|v| pi.algebra.compl(&v)))
                    .collect();
                family.insert(set?);
            }
            _ => {}
        }
    }
    Ok(family.into_iter().collect())
}

/// A prefilter of nonzero algebra elements, directed under the algebra
/// order.
pub fn is_ba_prefilter(algebra: &FiniteBooleanAlgebra, d: &BTreeSet<BaElem>) -> bool {
    if d.contains(&algebra.zero()) {
        return false;
    }
    d.iter().all(|p| {
        d.iter().all(|q| {
            let glb = algebra.meet(p, q);
            d.iter().any(|r| algebra.leq(r, &glb))
        })
    })
}

/// Membership semantics for the prefilter-valued valuation: a primitive
/// holds of `d` when its assigned element is a member, complement is
/// negation, join is existential, meet is universal.
pub fn delta_membership(
    e: &BoolExpr,
    pi: &Interpretation,
    d: &BTreeSet<BaElem>,
) -> Result<bool, ExprError> {
    Ok(match e {
        BoolExpr::Prim(i) => d.contains(pi.value(*i)?),
        BoolExpr::Compl(inner) => !delta_membership(inner, pi, d)?,
        BoolExpr::Join(es) => {
            let mut any = false;
            for child in es {
                any |= delta_membership(child, pi, d)?;
            }
            any
        }
        BoolExpr::Meet(es) => {
            let mut all = true;
            for child in es {
                all &= delta_membership(child, pi, d)?;
            }
            all
        }
    })
}

pub fn pi_membership(
    e: &BoolExpr,
    pi: &Interpretation,
    d: &BTreeSet<BaElem>,
) -> Result<bool, ExprError> {
    Ok(d.contains(&evaluate(e, pi)?))
}

/// Is `d` generic for the requirement family of `e`? Each set must either
/// meet `d` or have some member of `d` incompatible with all of it.
pub fn is_generic_for_expr(
    e: &BoolExpr,
    pi: &Interpretation,
    d: &BTreeSet<BaElem>,
) -> Result<bool, ExprError> {
    if !is_ba_prefilter(pi.algebra, d) {
        return Err(ExprError::NotAPrefilter);
    }
    let a = pi.algebra;
    for s in genericity_requirement_sets(e, pi)? {
        let decided = d
            .iter()
            .any(|p| s.contains(p) || s.iter().all(|q| a.meet(p, q) == a.zero()));
        if !decided {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The two valuations agree on generic prefilters. Returns the agreement
/// verdict; a non-generic prefilter is reported distinctly, since the
/// equivalence may then legitimately fail.
pub fn pi_delta_equivalence_check(
    e: &BoolExpr,
    pi: &Interpretation,
    d: &BTreeSet<BaElem>,
) -> Result<bool, ExprError> {
    if !is_generic_for_expr(e, pi, d)? {
        return Err(ExprError::NotGeneric);
    }
    Ok(delta_membership(e, pi, d)? == pi_membership(e, pi, d)?)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub pos: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at {}: {}", self.pos, self.message)
    }
}

impl std::error::Error for ParseError {}

/// Grammar: `expr := prim | "!(" expr ")" | "V[" list "]" | "A[" list "]"`,
/// `prim := "e" digits`, `list := [ expr ("," expr)* ]`, whitespace
/// insignificant. The empty list is accepted so the empty join and meet
/// round-trip.
pub fn parse(text: &str) -> Result<BoolExpr, ParseError> {
    let bytes: Vec<char> = text.chars().collect();
    let mut p = Parser { bytes, pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(p.error("trailing input"));
    }
    Ok(e)
}

pub fn print(e: &BoolExpr) -> String {
    match e {
        BoolExpr::Prim(i) => format!("e{i}"),
        BoolExpr::Compl(inner) => format!("!({})", print(inner)),
        BoolExpr::Join(es) => {
            let parts: Vec<String> = es.iter().map(print).collect();
            format!("V[{}]", parts.join(","))
        }
        BoolExpr::Meet(es) => {
            let parts: Vec<String> = es.iter().map(print).collect();
            format!("A[{}]", parts.join(","))
        }
    }
}

struct Parser {
    bytes: Vec<char>,
    pos: usize,
}

impl Parser {
    fn error(&self, message: &str) -> ParseError {
        ParseError {
            pos: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected {c:?}")))
        }
    }

    fn expr(&mut self) -> Result<BoolExpr, ParseError> {
        match self.peek() {
            Some('e') => {
                self.pos += 1;
                let start = self.pos;
                while self.bytes.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
                if self.pos == start {
                    return Err(self.error("expected digits after 'e'"));
                }
                let digits: String = self.bytes[start..self.pos].iter().collect();
                let i = digits
                    .parse::<usize>()
                    .map_err(|_| self.error("primitive index out of range"))?;
                Ok(BoolExpr::Prim(i))
            }
            Some('!') => {
                self.pos += 1;
                self.expect('(')?;
                let inner = self.expr()?;
                self.expect(')')?;
                Ok(BoolExpr::compl(inner))
            }
            Some(op @ ('V' | 'A')) => {
                self.pos += 1;
                self.expect('[')?;
                let mut children = Vec::new();
                if self.peek() != Some(']') {
                    loop {
                        children.push(self.expr()?);
                        match self.peek() {
                            Some(',') => {
                                self.pos += 1;
                            }
                            Some(']') => break,
                            _ => return Err(self.error("expected ',' or ']'")),
                        }
                    }
                }
                self.expect(']')?;
                Ok(if op == 'V' {
                    BoolExpr::join(children)
                } else {
                    BoolExpr::meet(children)
                })
            }
            _ => Err(self.error("expected 'e', '!', 'V', or 'A'")),
        }
    }
}

/// The structural total order used for canonical child sorting.
pub fn structural_cmp(a: &BoolExpr, b: &BoolExpr) -> Ordering {
    a.cmp(b)
}
