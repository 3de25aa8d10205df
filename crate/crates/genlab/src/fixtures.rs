//! Named small systems and seeded generators shared by tests, the
//! acceptance suite, and the command-line examples.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::order::FinitePoset;
use crate::psys::AbstractPS;
use crate::quantum::{self, Projection, PropSystem};

/// Two incompatible conditions under a top: the canonical separative poset.
pub fn vee() -> FinitePoset {
    FinitePoset::from_named_pairs(vec!["a", "b", "1"], &[("a", "1"), ("b", "1")]).unwrap()
}

/// A two-element chain; the smallest non-separative poset.
pub fn chain2() -> FinitePoset {
    FinitePoset::from_named_pairs(vec!["a", "1"], &[("a", "1")]).unwrap()
}

pub fn chain(n: usize) -> FinitePoset {
    let names: Vec<String> = (0..n).map(|i| format!("c{i}")).collect();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i..n {
            pairs.push((i, j));
        }
    }
    FinitePoset::new(names, &pairs).unwrap()
}

/// Four minimal elements under a single top.
pub fn four_minimal() -> FinitePoset {
    FinitePoset::from_named_pairs(
        vec!["a", "b", "c", "d", "1"],
        &[("a", "1"), ("b", "1"), ("c", "1"), ("d", "1")],
    )
    .unwrap()
}

/// The diamond: bottom, two middles, top. Not separative (the bottom is
/// below both middles).
pub fn diamond() -> FinitePoset {
    FinitePoset::from_named_pairs(
        vec!["bot", "x", "y", "1"],
        &[
            ("bot", "x"),
            ("bot", "y"),
            ("bot", "1"),
            ("x", "1"),
            ("y", "1"),
        ],
    )
    .unwrap()
}

/// Binary strings of length at most `depth`, ordered by reverse prefix:
/// longer strings extend their prefixes. Element names are the strings,
/// with "" the root.
pub fn binary_string_poset(depth: usize) -> FinitePoset {
    assert!(depth <= 10);
    let mut names: Vec<String> = vec![String::new()];
    for len in 1..=depth {
        for v in 0..(1u32 << len) {
            let s: String = (0..len)
                .rev()
                .map(|b| if v >> b & 1 == 1 { '1' } else { '0' })
                .collect();
            names.push(s);
        }
    }
    let mut pairs = Vec::new();
    for (i, a) in names.iter().enumerate() {
        for (j, b) in names.iter().enumerate() {
            if a.starts_with(b.as_str()) {
                pairs.push((i, j));
            }
        }
    }
    FinitePoset::new(names, &pairs).unwrap()
}

/// The named small posets exercised throughout the tests.
pub fn poset_suite() -> Vec<(&'static str, FinitePoset)> {
    vec![
        ("vee", vee()),
        ("chain2", chain2()),
        ("chain4", chain(4)),
        ("diamond", diamond()),
        ("four-minimal", four_minimal()),
        ("binary-depth-2", binary_string_poset(2)),
    ]
}

/// A seeded random poset on up to `max_elements` elements: a random
/// lower-triangular relation, transitively closed.
pub fn random_poset(max_elements: usize, rng: &mut ChaCha8Rng) -> FinitePoset {
    let n = rng.random_range(1..=max_elements);
    let mut above = vec![0u32; n]; // above[i] = bitmask of j > i with i <= j
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random_bool(0.35) {
                above[i] |= 1 << j;
            }
        }
    }
    // transitive closure; vertices already topologically ordered by index
    for i in (0..n).rev() {
        for j in (i + 1)..n {
            if above[i] >> j & 1 == 1 {
                above[i] |= above[j];
            }
        }
    }
    let names: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if above[i] >> j & 1 == 1 {
                pairs.push((i, j));
            }
        }
    }
    FinitePoset::new(names, &pairs).unwrap()
}

pub fn random_poset_suite(count: usize, max_elements: usize, seed: u64) -> Vec<FinitePoset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| random_poset(max_elements, &mut rng))
        .collect()
}

/// The six-element system `{0, P, ~P, Q, ~Q, 1}` with `P`, `Q` noncommuting:
/// no nontrivial order relations, meets only on complementary pairs.
pub fn malley_ps() -> AbstractPS {
    let labels: Vec<String> = ["0", "P", "~P", "Q", "~Q", "1"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let (zero, p, np, q, nq, one) = (0, 1, 2, 3, 4, 5);
    let mut leq = Vec::new();
    for i in 0..6 {
        leq.push((zero, i));
        leq.push((i, one));
    }
    let compl = vec![one, np, p, nq, q, zero];
    let meets = vec![(p, np, zero), (q, nq, zero)];
    AbstractPS::new(labels, &leq, compl, &[], &meets, zero, one).unwrap()
}

/// A six-element system that is not reductive: `X` and `Y` commute with
/// meet 0, yet `X` is not below the complement of `Y`, so inconsistency of
/// `{X, Y}` does not make `X` entail `~Y`.
pub fn nonreductive_ps() -> AbstractPS {
    let labels: Vec<String> = ["0", "X", "~X", "Y", "~Y", "1"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let (zero, x, nx, y, ny, one) = (0, 1, 2, 3, 4, 5);
    let mut leq = Vec::new();
    for i in 0..6 {
        leq.push((zero, i));
        leq.push((i, one));
    }
    let compl = vec![one, nx, x, ny, y, zero];
    let mids = [x, nx, y, ny];
    let mut commute = Vec::new();
    let mut meets = Vec::new();
    for (k, &a) in mids.iter().enumerate() {
        for &b in &mids[k + 1..] {
            commute.push((a, b));
            meets.push((a, b, zero));
        }
    }
    AbstractPS::new(labels, &leq, compl, &commute, &meets, zero, one).unwrap()
}

/// The same six-element noncommuting-pair system realized by concrete
/// projections in dimension 2.
pub fn malley_prop_system() -> PropSystem {
    let p = Projection::new(quantum::CMatrix::from_rows(&[
        vec![quantum::C_ONE, quantum::C_ZERO],
        vec![quantum::C_ZERO, quantum::C_ZERO],
    ]))
    .unwrap();
    let q = Projection::new(quantum::CMatrix::from_rows(&[
        vec![quantum::Complex::real(0.5), quantum::Complex::real(0.5)],
        vec![quantum::Complex::real(0.5), quantum::Complex::real(0.5)],
    ]))
    .unwrap();
    quantum::close_system(&[p, q], quantum::DEFAULT_CLOSURE_CAP).unwrap()
}

/// Three spin measurement directions spanning the octant.
pub fn spin_directions(k: usize) -> Vec<[f64; 3]> {
    let s = 1.0 / 3f64.sqrt();
    let all = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [s, s, s]];
    all[..k].to_vec()
}

/// The shipped 18-ray, 9-basis dimension-4 ray set; each ray appears in
/// exactly two bases, so a parity count rules out any one-per-basis choice.
pub const KS18_JSON: &str = include_str!("../data/ks18.json");
