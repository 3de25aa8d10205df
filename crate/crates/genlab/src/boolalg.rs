//! Finite boolean algebras in atomic canonical form, ultrafilters, the
//! regular algebra `Reg P` of a finite poset, the three filter-sentence
//! validities, and the universality homomorphism.
//!
//! Elements are atom subsets; meet, join, and complement are set operations,
//! so Stone duality (ultrafilters <-> atoms) comes for free.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::order::FinitePoset;

/// An element of a [`FiniteBooleanAlgebra`]: a subset of its atoms.
pub type BaElem = BitSet;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteBooleanAlgebra {
    atoms: usize,
}

/// JSON form: `{ "atoms": n }`; elements serialize as sorted atom-index
/// arrays.
#[derive(Serialize, Deserialize)]
pub struct BaJson {
    pub atoms: usize,
}

impl FiniteBooleanAlgebra {
    pub fn new(atoms: usize) -> Self {
        assert!(atoms > 0, "a boolean algebra needs at least one atom");
        FiniteBooleanAlgebra { atoms }
    }

    pub fn atoms(&self) -> usize {
        self.atoms
    }

    pub fn zero(&self) -> BaElem {
        BitSet::new(self.atoms)
    }

    pub fn one(&self) -> BaElem {
        BitSet::full(self.atoms)
    }

    pub fn atom(&self, i: usize) -> BaElem {
        BitSet::singleton(self.atoms, i)
    }

    pub fn meet(&self, a: &BaElem, b: &BaElem) -> BaElem {
        a.intersection(b)
    }

    pub fn join(&self, a: &BaElem, b: &BaElem) -> BaElem {
        a.union(b)
    }

    pub fn compl(&self, a: &BaElem) -> BaElem {
        a.complement()
    }

    pub fn implies(&self, a: &BaElem, b: &BaElem) -> BaElem {
        self.join(&self.compl(a), b)
    }

    pub fn leq(&self, a: &BaElem, b: &BaElem) -> bool {
        a.is_subset(b)
    }

    pub fn join_all<'a, I: IntoIterator<Item = &'a BaElem>>(&self, xs: I) -> BaElem {
        let mut out = self.zero();
        for x in xs {
            out.union_with(x);
        }
        out
    }

    pub fn meet_all<'a, I: IntoIterator<Item = &'a BaElem>>(&self, xs: I) -> BaElem {
        let mut out = self.one();
        for x in xs {
            out.intersect_with(x);
        }
        out
    }

    /// All `2^atoms` elements in canonical (mask) order. Enumeration only;
    /// individual elements work at any atom count.
    pub fn elements(&self) -> Vec<BaElem> {
        assert!(self.atoms <= 20, "element enumeration capped at 20 atoms");
        (0..(1u64 << self.atoms))
            .map(|m| BitSet::from_mask(self.atoms, m))
            .collect()
    }

    pub fn element_from_atoms(&self, indices: &[usize]) -> BaElem {
        BitSet::from_indices(self.atoms, indices.iter().copied())
    }

    pub fn element_to_json(&self, e: &BaElem) -> Vec<usize> {
        e.iter().collect()
    }

    /// The nonzero part of the algebra as a partial order (`<=` is subset),
    /// together with the element masks in canonical order.
    pub fn nonzero_poset(&self) -> (FinitePoset, Vec<BaElem>) {
        assert!(self.atoms <= 16, "nonzero_poset capped at 16 atoms");
        let masks: Vec<BaElem> = (1..(1u64 << self.atoms))
            .map(|m| BitSet::from_mask(self.atoms, m))
            .collect();
        let names: Vec<String> = masks
            .iter()
            .map(|m| {
                let ids: Vec<String> = m.iter().map(|i| i.to_string()).collect();
                format!("{{{}}}", ids.join(","))
            })
            .collect();
        let mut pairs = Vec::new();
        for (i, a) in masks.iter().enumerate() {
            for (j, b) in masks.iter().enumerate() {
                if a.is_subset(b) {
                    pairs.push((i, j));
                }
            }
        }
        let poset = FinitePoset::new(names, &pairs).expect("subset order is a partial order");
        (poset, masks)
    }

    pub fn op_table(&self) -> OpTableAlgebra {
        let elems = self.elements();
        let n = elems.len();
        let code = |e: &BaElem| e.as_mask() as usize;
        let mut meet = vec![vec![0; n]; n];
        let mut join = vec![vec![0; n]; n];
        let mut compl = vec![0; n];
        for (i, a) in elems.iter().enumerate() {
            compl[i] = code(&self.compl(a));
            for (j, b) in elems.iter().enumerate() {
                meet[i][j] = code(&self.meet(a, b));
                join[i][j] = code(&self.join(a, b));
            }
        }
        OpTableAlgebra {
            size: n,
            meet,
            join,
            compl,
            zero: 0,
            one: n - 1,
        }
    }
}

/// A boolean algebra given by raw operation tables. This is the form
/// `verify_axioms` inspects, so tests can tamper with a table and watch the
/// violation surface.
#[derive(Clone, Debug)]
pub struct OpTableAlgebra {
    pub size: usize,
    pub meet: Vec<Vec<usize>>,
    pub join: Vec<Vec<usize>>,
    pub compl: Vec<usize>,
    pub zero: usize,
    pub one: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomViolation {
    pub law: &'static str,
    pub witness: String,
}

impl fmt::Display for AxiomViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} fails at {}", self.law, self.witness)
    }
}

/// Checks every identity of the boolean-algebra definition over all element
/// pairs and triples: idempotence, commutativity, associativity,
/// distributivity, complement laws (existence and uniqueness), De Morgan.
pub fn verify_axioms(a: &OpTableAlgebra) -> Result<(), AxiomViolation> {
    let n = a.size;
    let fail = |law: &'static str, witness: String| Err(AxiomViolation { law, witness });
    if a.zero == a.one {
        return fail("0 != 1", "zero equals one".into());
    }
    for p in 0..n {
        if a.join[p][p] != p {
            return fail("join idempotence", format!("P={p}"));
        }
        if a.meet[p][p] != p {
            return fail("meet idempotence", format!("P={p}"));
        }
        let c = a.compl[p];
        if a.join[p][c] != a.one || a.meet[p][c] != a.zero {
            return fail("complement law", format!("P={p}"));
        }
        let mut complements = 0;
        for q in 0..n {
            if a.join[p][q] == a.one && a.meet[p][q] == a.zero {
                complements += 1;
            }
        }
        if complements != 1 {
            return fail("complement uniqueness", format!("P={p}"));
        }
        for q in 0..n {
            if a.join[p][q] != a.join[q][p] {
                return fail("join commutativity", format!("P={p}, Q={q}"));
            }
            if a.meet[p][q] != a.meet[q][p] {
                return fail("meet commutativity", format!("P={p}, Q={q}"));
            }
            if a.compl[a.join[p][q]] != a.meet[a.compl[p]][a.compl[q]] {
                return fail("De Morgan (join)", format!("P={p}, Q={q}"));
            }
            if a.compl[a.meet[p][q]] != a.join[a.compl[p]][a.compl[q]] {
                return fail("De Morgan (meet)", format!("P={p}, Q={q}"));
            }
            for r in 0..n {
                if a.join[p][a.join[q][r]] != a.join[a.join[p][q]][r] {
                    return fail("join associativity", format!("P={p}, Q={q}, R={r}"));
                }
                if a.meet[p][a.meet[q][r]] != a.meet[a.meet[p][q]][r] {
                    return fail("meet associativity", format!("P={p}, Q={q}, R={r}"));
                }
                if a.meet[a.join[p][q]][r] != a.join[a.meet[p][r]][a.meet[q][r]] {
                    return fail(
                        "distributivity (meet over join)",
                        format!("P={p}, Q={q}, R={r}"),
                    );
                }
                if a.join[a.meet[p][q]][r] != a.meet[a.join[p][r]][a.join[q][r]] {
                    return fail(
                        "distributivity (join over meet)",
                        format!("P={p}, Q={q}, R={r}"),
                    );
                }
            }
        }
    }
    Ok(())
}

/// An ultrafilter on a finite boolean algebra; one exists per atom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ultrafilter {
    atom: usize,
    atoms: usize,
}

impl Ultrafilter {
    pub fn atom(&self) -> usize {
        self.atom
    }

    pub fn contains(&self, e: &BaElem) -> bool {
        e.contains(self.atom)
    }

    /// The members as explicit elements (enumeration-capped).
    pub fn members(&self, a: &FiniteBooleanAlgebra) -> Vec<BaElem> {
        a.elements()
            .into_iter()
            .filter(|e| self.contains(e))
            .collect()
    }
}

pub fn ultrafilters(a: &FiniteBooleanAlgebra) -> Vec<Ultrafilter> {
    (0..a.atoms())
        .map(|atom| Ultrafilter {
            atom,
            atoms: a.atoms(),
        })
        .collect()
}

/// The boolean value of a question `C` (a set of ultrafilters, encoded by
/// their atoms): the unique element `P` with `P in F  iff  F in C` for every
/// ultrafilter `F`. Existence and uniqueness are re-verified, not assumed.
pub fn question_boolean_value(a: &FiniteBooleanAlgebra, c: &BitSet) -> BaElem {
    assert_eq!(
        c.len(),
        a.atoms(),
        "C is a set of ultrafilters, one per atom"
    );
    let p = c.clone(); // join of the atoms of the members of C
    for f in ultrafilters(a) {
        assert_eq!(
            f.contains(&p),
            c.contains(f.atom()),
            "defining property of the boolean value"
        );
    }
    if a.atoms() <= 16 {
        let witnesses = a
            .elements()
            .into_iter()
            .filter(|q| {
                ultrafilters(a)
                    .iter()
                    .all(|f| f.contains(q) == c.contains(f.atom()))
            })
            .count();
        assert_eq!(witnesses, 1, "boolean value is unique");
    }
    p
}

/// The regular algebra of a finite poset. Atoms are the poset's minimal
/// elements; a regular set corresponds to its set of minimal elements.
pub struct RegularAlgebra {
    algebra: FiniteBooleanAlgebra,
    atom_to_element: Vec<usize>,
    embed: Vec<BaElem>,
    poset_len: usize,
}

pub fn regular_algebra(p: &FinitePoset) -> RegularAlgebra {
    let minimal: Vec<usize> = p.minimal_elements().iter().collect();
    let algebra = FiniteBooleanAlgebra::new(minimal.len());
    let mut atom_of_element = vec![usize::MAX; p.len()];
    for (i, &m) in minimal.iter().enumerate() {
        atom_of_element[m] = i;
    }
    let embed = (0..p.len())
        .map(|e| {
            BitSet::from_indices(
                minimal.len(),
                p.below(e).iter().filter_map(|q| {
                    let a = atom_of_element[q];
                    (a != usize::MAX).then_some(a)
                }),
            )
        })
        .collect();
    RegularAlgebra {
        algebra,
        atom_to_element: minimal,
        embed,
        poset_len: p.len(),
    }
}

impl RegularAlgebra {
    pub fn algebra(&self) -> &FiniteBooleanAlgebra {
        &self.algebra
    }

    pub fn atoms(&self) -> usize {
        self.algebra.atoms()
    }

    /// The poset element a given atom is the image of.
    pub fn atom_element(&self, atom: usize) -> usize {
        self.atom_to_element[atom]
    }

    /// `p -> regular closure of its principal downset`, as an atom mask.
    pub fn embed(&self, p: usize) -> &BaElem {
        &self.embed[p]
    }

    /// Materializes an algebra element as the regular subset of the poset it
    /// stands for: `{ p : Min(p) subset-of A }`.
    pub fn regular_set(&self, e: &BaElem, poset: &FinitePoset) -> BitSet {
        assert_eq!(poset.len(), self.poset_len);
        BitSet::from_indices(
            self.poset_len,
            (0..self.poset_len).filter(|&p| self.embed[p].is_subset(e)),
        )
    }

    /// The algebra element corresponding to a regular subset, or `None` when
    /// the subset is not regular.
    pub fn element_of(&self, x: &BitSet, poset: &FinitePoset) -> Option<BaElem> {
        let mut atoms = self.algebra.zero();
        for p in x.iter() {
            if self.embed[p].count() == 1 {
                atoms.union_with(&self.embed[p]);
            }
        }
        // keep atoms that actually lie in x
        let atoms = BitSet::from_indices(
            self.atoms(),
            atoms
                .iter()
                .filter(|&a| x.contains(self.atom_to_element[a])),
        );
        (self.regular_set(&atoms, poset) == *x).then_some(atoms)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FilterSentence {
    UpwardClosure,
    Directedness,
    Decision,
}

impl fmt::Display for FilterSentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FilterSentence::UpwardClosure => write!(f, "upward closure"),
            FilterSentence::Directedness => write!(f, "directedness"),
            FilterSentence::Decision => write!(f, "decision of X or X-perp"),
        }
    }
}

/// Evaluates the three filter sentences under an interpretation `iota` of
/// poset elements into `target`. The decision clause quantifies over every
/// subset of the poset, so this is exponential in the poset size.
pub fn filter_sentence_values_under(
    poset: &FinitePoset,
    target: &FiniteBooleanAlgebra,
    iota: &[BaElem],
) -> [BaElem; 3] {
    assert_eq!(iota.len(), poset.len());
    let n = poset.len();
    assert!(n <= 20, "decision clause enumerates all 2^n subsets");
    let mut upward = target.one();
    let mut directed = target.one();
    for p in 0..n {
        for q in 0..n {
            if poset.leq(p, q) {
                upward.intersect_with(&target.implies(&iota[p], &iota[q]));
            }
            let both = target.meet(&iota[p], &iota[q]);
            let common = target.join_all(
                poset
                    .below(p)
                    .intersection(poset.below(q))
                    .iter()
                    .map(|r| &iota[r])
                    .collect::<Vec<_>>(),
            );
            directed.intersect_with(&target.implies(&both, &common));
        }
    }
    let mut decision = target.one();
    for mask in 0..(1u64 << n) {
        let x = BitSet::from_mask(n, mask);
        let decided = x.union(&poset.perp(&x));
        let clause = target.join_all(decided.iter().map(|q| &iota[q]).collect::<Vec<_>>());
        decision.intersect_with(&clause);
    }
    [upward, directed, decision]
}

/// The three validities under the canonical interpretation into `Reg P`; all
/// three are 1 for every poset.
pub fn filter_sentence_values(poset: &FinitePoset) -> (RegularAlgebra, [BaElem; 3]) {
    let ra = regular_algebra(poset);
    let iota: Vec<BaElem> = (0..poset.len()).map(|p| ra.embed(p).clone()).collect();
    let values = filter_sentence_values_under(poset, ra.algebra(), &iota);
    (ra, values)
}

#[derive(Debug, Clone)]
pub struct UniversalityRefusal {
    pub violated: FilterSentence,
}

impl fmt::Display for UniversalityRefusal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "interpretation violates the {} sentence", self.violated)
    }
}

impl std::error::Error for UniversalityRefusal {}

/// The complete homomorphism `h : Reg P -> A` induced by an interpretation
/// that validates the filter sentences: `h(X) = join of iota over X`.
pub struct UniversalHom {
    reg: RegularAlgebra,
    target: FiniteBooleanAlgebra,
    iota: Vec<BaElem>,
}

impl UniversalHom {
    pub fn reg(&self) -> &RegularAlgebra {
        &self.reg
    }

    pub fn apply(&self, e: &BaElem, poset: &FinitePoset) -> BaElem {
        let x = self.reg.regular_set(e, poset);
        self.target
            .join_all(x.iter().map(|p| &self.iota[p]).collect::<Vec<_>>())
    }
}

/// Checks the precondition and builds `h`, verifying that it preserves
/// complement, join, and meet across all pairs of regular elements.
pub fn universality_hom(
    poset: &FinitePoset,
    target: &FiniteBooleanAlgebra,
    iota: Vec<BaElem>,
) -> Result<UniversalHom, UniversalityRefusal> {
    let [a, b, c] = filter_sentence_values_under(poset, target, &iota);
    if a != target.one() {
        return Err(UniversalityRefusal {
            violated: FilterSentence::UpwardClosure,
        });
    }
    if b != target.one() {
        return Err(UniversalityRefusal {
            violated: FilterSentence::Directedness,
        });
    }
    if c != target.one() {
        return Err(UniversalityRefusal {
            violated: FilterSentence::Decision,
        });
    }
    let reg = regular_algebra(poset);
    let hom = UniversalHom {
        reg,
        target: target.clone(),
        iota,
    };
    // hom laws, exhaustively over Reg P
    let atoms = hom.reg.atoms();
    assert!(atoms <= 12, "hom verification enumerates Reg P");
    let elems: Vec<BaElem> = hom.reg.algebra().elements();
    for x in &elems {
        let hx = hom.apply(x, poset);
        assert_eq!(
            hom.apply(&hom.reg.algebra().compl(x), poset),
            target.compl(&hx),
            "h preserves complement"
        );
        for y in &elems {
            let hy = hom.apply(y, poset);
            assert_eq!(
                hom.apply(&hom.reg.algebra().join(x, y), poset),
                target.join(&hx, &hy),
                "h preserves join"
            );
            assert_eq!(
                hom.apply(&hom.reg.algebra().meet(x, y), poset),
                target.meet(&hx, &hy),
                "h preserves meet"
            );
        }
    }
    Ok(hom)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vee() -> FinitePoset {
        FinitePoset::from_named_pairs(vec!["a", "b", "1"], &[("a", "1"), ("b", "1")]).unwrap()
    }

    #[test]
    fn axioms_hold_for_powerset_algebras() {
        for atoms in 1..=4 {
            let a = FiniteBooleanAlgebra::new(atoms);
            assert!(verify_axioms(&a.op_table()).is_ok());
        }
    }

    #[test]
    fn tampered_complement_is_caught() {
        let a = FiniteBooleanAlgebra::new(3);
        let mut t = a.op_table();
        t.compl[1] = 1; // pretend atom 0 is its own complement
        let err = verify_axioms(&t).unwrap_err();
        assert_eq!(err.law, "complement law");
        assert!(err.witness.contains('1'));
    }

    #[test]
    fn two_element_algebra() {
        let two = FiniteBooleanAlgebra::new(1);
        assert!(verify_axioms(&two.op_table()).is_ok());
        let ufs = ultrafilters(&two);
        assert_eq!(ufs.len(), 1);
        assert!(ufs[0].contains(&two.one()));
        assert!(!ufs[0].contains(&two.zero()));
    }

    #[test]
    fn regular_algebra_of_vee() {
        let p = vee();
        let ra = regular_algebra(&p);
        assert_eq!(ra.atoms(), 2);
        assert_eq!(*ra.embed(2), ra.algebra().one(), "embed(1) = 1");
        assert_eq!(ra.embed(0).count(), 1);
        // the brute-force double-perp family has exactly 4 members
        let mut regulars = 0;
        for mask in 0..8u64 {
            let x = BitSet::from_mask(3, mask);
            if p.is_regular(&x) {
                regulars += 1;
                let e = ra
                    .element_of(&x, &p)
                    .expect("regular sets correspond to elements");
                assert_eq!(ra.regular_set(&e, &p), x);
            } else {
                assert!(ra.element_of(&x, &p).is_none());
            }
        }
        assert_eq!(regulars, 4);
    }

    #[test]
    fn regular_algebra_of_chain_is_two() {
        let c = FinitePoset::from_named_pairs(vec!["a", "1"], &[("a", "1")]).unwrap();
        let ra = regular_algebra(&c);
        assert_eq!(ra.atoms(), 1);
        let mut regulars = 0;
        for mask in 0..4u64 {
            if c.is_regular(&BitSet::from_mask(2, mask)) {
                regulars += 1;
            }
        }
        assert_eq!(regulars, 2, "only the empty set and everything are regular");
    }

    #[test]
    fn reg_of_ba_nonzero_part_is_isomorphic() {
        for atoms in 1..=3 {
            let a = FiniteBooleanAlgebra::new(atoms);
            let (poset, masks) = a.nonzero_poset();
            let ra = regular_algebra(&poset);
            assert_eq!(ra.atoms(), atoms, "minimal elements are the atoms");
            // p -> embed(p) matches p's own atom mask under the atom relabeling
            for (i, mask) in masks.iter().enumerate() {
                let relabeled = BitSet::from_indices(
                    atoms,
                    ra.embed(i).iter().map(|at| {
                        masks[ra.atom_element(at)]
                            .first()
                            .expect("atom is a singleton")
                    }),
                );
                assert_eq!(relabeled, *mask);
            }
        }
    }

    #[test]
    fn embed_image_is_dense_and_order_faithful_when_separative() {
        let mut posets: Vec<FinitePoset> = crate::fixtures::poset_suite()
            .into_iter()
            .map(|(_, p)| p)
            .collect();
        posets.extend(crate::fixtures::random_poset_suite(40, 6, 7));
        for p in &posets {
            let ra = regular_algebra(p);
            // density: every nonzero element sits above some embed image
            for mask in 1..(1u64 << ra.atoms()) {
                let e = BitSet::from_mask(ra.atoms(), mask);
                let below =
                    (0..p.len()).any(|q| !ra.embed(q).is_empty() && ra.embed(q).is_subset(&e));
                assert!(below);
            }
            if p.is_separative() {
                for a in 0..p.len() {
                    for b in 0..p.len() {
                        assert_eq!(
                            p.leq(a, b),
                            ra.embed(a).is_subset(ra.embed(b)),
                            "order isomorphism onto the image"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn ultrafilter_count_and_maximality() {
        let a = FiniteBooleanAlgebra::new(3);
        let ufs = ultrafilters(&a);
        assert_eq!(ufs.len(), 3);
        for f in &ufs {
            for e in a.elements() {
                assert!(
                    f.contains(&e) ^ f.contains(&a.compl(&e)),
                    "exactly one of P, complement(P) is in the ultrafilter"
                );
            }
        }
    }

    #[test]
    fn filter_sentences_on_vee() {
        let p = vee();
        let (ra, values) = filter_sentence_values(&p);
        for v in &values {
            assert_eq!(*v, ra.algebra().one());
        }
    }

    #[test]
    fn question_boolean_value_examples() {
        let a = FiniteBooleanAlgebra::new(3);
        assert_eq!(question_boolean_value(&a, &BitSet::new(3)), a.zero());
        assert_eq!(question_boolean_value(&a, &BitSet::full(3)), a.one());
        let c = BitSet::from_indices(3, [0, 2]);
        assert_eq!(
            question_boolean_value(&a, &c),
            a.element_from_atoms(&[0, 2])
        );
    }

    #[test]
    fn inference_identities_exhaustive() {
        for atoms in 1..=4 {
            let a = FiniteBooleanAlgebra::new(atoms);
            let n = atoms;
            for cm in 0..(1u64 << n) {
                let c = BitSet::from_mask(n, cm);
                let bv_c = question_boolean_value(&a, &c);
                assert_eq!(
                    question_boolean_value(&a, &c.complement()),
                    a.compl(&bv_c),
                    "bv(complement C) = complement bv(C)"
                );
                for dm in 0..(1u64 << n) {
                    let d = BitSet::from_mask(n, dm);
                    let bv_d = question_boolean_value(&a, &d);
                    assert_eq!(
                        question_boolean_value(&a, &c.union(&d)),
                        a.join(&bv_c, &bv_d)
                    );
                    assert_eq!(
                        question_boolean_value(&a, &c.intersection(&d)),
                        a.meet(&bv_c, &bv_d)
                    );
                    if c.is_subset(&d) {
                        assert!(a.leq(&bv_c, &bv_d));
                    }
                }
            }
        }
    }

    #[test]
    fn every_ultrafilter_is_generic_for_bv_families() {
        // genericity of ultrafilters with respect to families of boolean
        // values of subfamilies, exhaustively for small algebras
        for atoms in 1..=4 {
            let a = FiniteBooleanAlgebra::new(atoms);
            let (poset, masks) = a.nonzero_poset();
            let questions: Vec<BitSet> = (0..(1u64 << atoms))
                .map(|m| BitSet::from_mask(atoms, m))
                .collect();
            // a subfamily of questions gives the set of their boolean values
            for fam_mask in 0..(1u64 << questions.len()) {
                let mut s = poset.empty_set();
                for (qi, q) in questions.iter().enumerate() {
                    if fam_mask >> qi & 1 == 1 {
                        let bv = question_boolean_value(&a, q);
                        if let Some(idx) = masks.iter().position(|m| *m == bv) {
                            s.insert(idx);
                        }
                    }
                }
                for f in ultrafilters(&a) {
                    let filter = BitSet::from_indices(
                        poset.len(),
                        masks
                            .iter()
                            .enumerate()
                            .filter(|(_, m)| f.contains(m))
                            .map(|(i, _)| i),
                    );
                    assert!(poset.is_generic(&filter, &[s.clone()]).unwrap());
                }
            }
        }
    }

    #[test]
    fn universality_identity_case() {
        let p = vee();
        let ra = regular_algebra(&p);
        let iota: Vec<BaElem> = (0..p.len()).map(|e| ra.embed(e).clone()).collect();
        let hom = universality_hom(&p, ra.algebra(), iota).unwrap();
        for e in ra.algebra().elements() {
            assert_eq!(hom.apply(&e, &p), e, "h is the identity on Reg P");
        }
    }

    #[test]
    fn universality_into_two_by_ultrafilter_choice() {
        let p = vee();
        let two = FiniteBooleanAlgebra::new(1);
        // a -> 1, b -> 0, 1 -> 1: evaluation along the principal generic at a
        let iota = vec![two.one(), two.zero(), two.one()];
        let hom = universality_hom(&p, &two, iota).unwrap();
        let ra = regular_algebra(&p);
        let a_atom = (0..ra.atoms()).find(|&i| ra.atom_element(i) == 0).unwrap();
        for e in ra.algebra().elements() {
            let expect = if e.contains(a_atom) {
                two.one()
            } else {
                two.zero()
            };
            assert_eq!(hom.apply(&e, &p), expect);
        }
    }

    #[test]
    fn universality_refusal_names_the_sentence() {
        let p = vee();
        let two = FiniteBooleanAlgebra::new(1);
        // a -> 1, b -> 1, 1 -> 1 breaks directedness: a and b have no common extension
        let iota = vec![two.one(), two.one(), two.one()];
        match universality_hom(&p, &two, iota) {
            Err(err) => assert_eq!(err.violated, FilterSentence::Directedness),
            Ok(_) => panic!("expected refusal"),
        }
    }
}
