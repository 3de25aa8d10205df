//! Generic-filter construction: the descending-sequence algorithm over an
//! enumerated dense family, contextual product posets, the truncated
//! cylinder algebra with its product measure, and the Born-statistics
//! simulator with verifiable genericity certificates.

use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::boolalg::FiniteBooleanAlgebra;
use crate::expr::{BoolExpr, Interpretation};
use crate::order::{DenseFamily, FinitePoset, OrderError};

#[derive(Debug, Clone, PartialEq)]
pub enum GenericError {
    BadSpec(String),
    Order(OrderError),
    Infeasible {
        m: u32,
        n_prime: usize,
        detail: String,
    },
    CapExceeded(String),
    CertificateMismatch(String),
}

impl fmt::Display for GenericError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenericError::BadSpec(s) => write!(f, "{s}"),
            GenericError::Order(e) => write!(f, "{e}"),
            GenericError::Infeasible { m, n_prime, detail } => {
                write!(f, "family (M={m}, N'={n_prime}) cannot be met: {detail}")
            }
            GenericError::CapExceeded(s) => write!(f, "{s}"),
            GenericError::CertificateMismatch(s) => write!(f, "certificate mismatch: {s}"),
        }
    }
}

impl std::error::Error for GenericError {}

impl From<OrderError> for GenericError {
    fn from(e: OrderError) -> Self {
        GenericError::Order(e)
    }
}

/// How a common extension is picked when a dense set offers several.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ChooserPolicy {
    /// First candidate in canonical element order.
    Lexicographic,
    /// Uniform choice from a seeded stream; bit-identical across runs.
    Seeded(u64),
}

pub struct GenericBuildSpec<'a> {
    pub poset: &'a FinitePoset,
    pub start: usize,
    pub family: DenseFamily,
    pub policy: ChooserPolicy,
}

pub struct GenericBuild {
    /// The descending sequence of conditions, one entry per family member
    /// processed (plus the start).
    pub chain: Vec<usize>,
    /// The filter generated by the final condition.
    pub filter: BitSet,
}

/// The descending-sequence construction: at each step, if the current
/// condition is compatible with some member of the next set, extend to a
/// common extension picked by the chooser; otherwise keep it. The resulting
/// filter is generic for the family.
pub fn build_generic(spec: &GenericBuildSpec) -> Result<GenericBuild, GenericError> {
    let poset = spec.poset;
    if spec.start >= poset.len() {
        return Err(GenericError::BadSpec("start condition out of range".into()));
    }
    for s in &spec.family {
        if s.len() != poset.len() {
            return Err(GenericError::BadSpec(
                "family member is not a subset of the poset".into(),
            ));
        }
    }
    let mut rng = match spec.policy {
        ChooserPolicy::Seeded(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        ChooserPolicy::Lexicographic => None,
    };
    let mut current = spec.start;
    let mut chain = vec![current];
    for s in &spec.family {
        let candidates: Vec<usize> = poset
            .below(current)
            .intersection(&poset.downset(s))
            .iter()
            .collect();
        if !candidates.is_empty() {
            current = match rng.as_mut() {
                None => candidates[0],
                Some(r) => candidates[r.random_range(0..candidates.len())],
            };
        }
        chain.push(current);
    }
    let filter = poset.above(current).clone();
    debug_assert!(poset.is_generic(&filter, &spec.family).unwrap_or(false));
    Ok(GenericBuild { chain, filter })
}

/// A finite-support product of posets: conditions assign each factor an
/// element or leave it unconstrained at that factor's top. Factors without
/// a maximum get an explicit top adjoined.
pub struct ContextualProduct {
    pub poset: FinitePoset,
    /// Condition index -> per-factor coordinate; `None` is the adjoined top.
    pub coords: Vec<Vec<Option<usize>>>,
    factor_lens: Vec<usize>,
}

const PRODUCT_CAP: usize = 20_000;

/// `support` bounds the number of coordinates a condition may constrain
/// away from the top (`None` allows all of them). For every factor and
/// every dense subset of it, the lifted set is verified dense in the
/// product.
pub fn contextual_product(
    factors: &[FinitePoset],
    support: Option<usize>,
) -> Result<ContextualProduct, GenericError> {
    if factors.is_empty() {
        return Err(GenericError::BadSpec("product of no factors".into()));
    }
    // coordinate domains; the factor's own maximum serves as the
    // unconstrained value when one exists
    let tops: Vec<Option<usize>> = factors.iter().map(|f| f.top()).collect();
    let sizes: Vec<usize> = factors
        .iter()
        .zip(&tops)
        .map(|(f, t)| f.len() + usize::from(t.is_none()))
        .collect();
    let mut total: usize = 1;
    for s in &sizes {
        total = total.saturating_mul(*s);
        if total > PRODUCT_CAP {
            return Err(GenericError::CapExceeded(format!(
                "product exceeds {PRODUCT_CAP} conditions"
            )));
        }
    }
    // enumerate coordinate tuples; coordinate == factor.len() encodes the
    // adjoined top for topless factors
    let mut coords: Vec<Vec<Option<usize>>> = Vec::new();
    let mut tuple = vec![0usize; factors.len()];
    'outer: loop {
        let decoded: Vec<Option<usize>> = tuple
            .iter()
            .zip(factors)
            .map(|(&c, f)| (c < f.len()).then_some(c))
            .collect();
        let constrained = decoded
            .iter()
            .zip(&tops)
            .filter(|(c, t)| match (c, t) {
                (None, _) => false,
                (Some(e), Some(top)) => e != top,
                (Some(_), None) => true,
            })
            .count();
        if support.is_none_or(|cap| constrained <= cap) {
            coords.push(decoded);
        }
        for i in 0..factors.len() {
            tuple[i] += 1;
            if tuple[i] < sizes[i] {
                continue 'outer;
            }
            tuple[i] = 0;
        }
        break;
    }
    let names: Vec<String> = coords
        .iter()
        .map(|c| {
            let parts: Vec<String> = c
                .iter()
                .zip(factors)
                .map(|(maybe, f)| match maybe {
                    Some(e) => f.name(*e).to_string(),
                    None => "T".to_string(),
                })
                .collect();
            format!("({})", parts.join(","))
        })
        .collect();
    let mut pairs = Vec::new();
    for (i, a) in coords.iter().enumerate() {
        for (j, b) in coords.iter().enumerate() {
            let le = a
                .iter()
                .zip(b)
                .zip(factors)
                .all(|((ca, cb), f)| match (ca, cb) {
                    (_, None) => true,
                    (None, Some(_)) => false,
                    (Some(x), Some(y)) => f.leq(*x, *y),
                });
            if le {
                pairs.push((i, j));
            }
        }
    }
    let poset = FinitePoset::new(names, &pairs).map_err(GenericError::Order)?;
    let product = ContextualProduct {
        poset,
        coords,
        factor_lens: factors.iter().map(FinitePoset::len).collect(),
    };
    product.verify_density_lifting(factors)?;
    Ok(product)
}

impl ContextualProduct {
    /// The lift of a factor subset: conditions whose coordinate lies in it.
    pub fn lift(&self, factor: usize, d: &BitSet) -> BitSet {
        BitSet::from_indices(
            self.coords.len(),
            self.coords
                .iter()
                .enumerate()
                .filter(|(_, c)| c[factor].is_some_and(|e| d.contains(e)))
                .map(|(i, _)| i),
        )
    }

    /// Coordinates of a product filter in one factor, dropping adjoined tops.
    pub fn project_filter(&self, filter: &BitSet, factor: usize) -> BitSet {
        let mut out = BitSet::new(self.factor_lens[factor]);
        for (i, c) in self.coords.iter().enumerate() {
            if filter.contains(i) {
                if let Some(e) = c[factor] {
                    out.insert(e);
                }
            }
        }
        out
    }

    fn verify_density_lifting(&self, factors: &[FinitePoset]) -> Result<(), GenericError> {
        for (fi, f) in factors.iter().enumerate() {
            let dense_sets: Vec<BitSet> = if f.len() <= 10 {
                (0..(1u64 << f.len()))
                    .map(|m| BitSet::from_mask(f.len(), m))
                    .filter(|d| f.is_dense(d))
                    .collect()
            } else {
                let mut sets = vec![f.minimal_elements()];
                for p in 0..f.len() {
                    sets.push(f.derived_dense_set(&BitSet::singleton(f.len(), p)));
                }
                sets
            };
            for d in dense_sets {
                if !self.poset.is_dense(&self.lift(fi, &d)) {
                    return Err(GenericError::BadSpec(format!(
                        "lift of a dense subset of factor {fi} is not dense"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// The depth-`n` cylinder algebra: atoms are the `2^n` leaves (full binary
/// strings), weighted by the product measure that gives each coordinate
/// probability `q` of being 1.
pub struct CylinderAlgebra {
    depth: usize,
    q: f64,
    algebra: FiniteBooleanAlgebra,
    leaf_weight: Vec<f64>,
}

impl CylinderAlgebra {
    pub fn new(depth: usize, q: f64) -> Result<Self, GenericError> {
        if depth == 0 || depth > 16 {
            return Err(GenericError::BadSpec("depth must be in 1..=16".into()));
        }
        if !(0.0..=1.0).contains(&q) {
            return Err(GenericError::BadSpec("q must lie in [0,1]".into()));
        }
        let leaves = 1usize << depth;
        let leaf_weight = (0..leaves)
            .map(|leaf| {
                (0..depth)
                    .map(|m| if leaf >> m & 1 == 1 { q } else { 1.0 - q })
                    .product()
            })
            .collect();
        Ok(CylinderAlgebra {
            depth,
            q,
            algebra: FiniteBooleanAlgebra::new(leaves),
            leaf_weight,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn algebra(&self) -> &FiniteBooleanAlgebra {
        &self.algebra
    }

    pub fn measure(&self, e: &BitSet) -> f64 {
        e.iter().map(|leaf| self.leaf_weight[leaf]).sum()
    }

    /// The event "coordinate `m` is 1".
    pub fn coordinate_event(&self, m: usize) -> BitSet {
        assert!(m < self.depth);
        BitSet::from_indices(
            1 << self.depth,
            (0..(1usize << self.depth)).filter(|leaf| leaf >> m & 1 == 1),
        )
    }

    /// The interpretation sending primitive `m` to the coordinate event.
    pub fn interpretation(&self) -> Interpretation<'_> {
        Interpretation::new(
            &self.algebra,
            (0..self.depth)
                .map(|m| (m, self.coordinate_event(m)))
                .collect(),
        )
    }

    /// The truncated frequency-band expression: for every band width `1/M`
    /// up to `m_max`, some tail start `N` below the depth after which every
    /// initial segment has mean within the band.
    pub fn frequency_expr(&self, m_max: u32) -> BoolExpr {
        let depth = self.depth;
        let mut per_m = Vec::new();
        for m in 1..=m_max {
            let mut alternatives = Vec::new();
            for n_start in 0..depth {
                let mut tail = Vec::new();
                for n in (n_start + 1)..=depth {
                    let mut sigma_join = Vec::new();
                    for sigma in 0u64..(1 << n) {
                        let ones = sigma.count_ones() as f64;
                        if (self.q - ones / n as f64).abs() < 1.0 / m as f64 {
                            let literals = (0..n).map(|bit| {
                                if sigma >> bit & 1 == 1 {
                                    BoolExpr::prim(bit)
                                } else {
                                    BoolExpr::compl(BoolExpr::prim(bit))
                                }
                            });
                            sigma_join.push(BoolExpr::meet(literals));
                        }
                    }
                    tail.push(BoolExpr::join(sigma_join));
                }
                alternatives.push(BoolExpr::meet(tail));
            }
            per_m.push(BoolExpr::join(alternatives));
        }
        BoolExpr::meet(per_m)
    }
}

/// One statistics family per `(M, N')`: conditions deciding some `n > N'`
/// initial bits whose mean lies within `1/M` of `q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateEntry {
    pub m: u32,
    pub n_prime: usize,
    pub met: bool,
    /// 1-based processing step at which the family was handled.
    pub step: usize,
    /// Length of the decided prefix witnessing membership (0 when unmet).
    pub witness_len: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BornRun {
    pub q: f64,
    pub policy: ChooserPolicy,
    pub bits: Vec<u8>,
    pub certificate: Vec<CertificateEntry>,
}

impl BornRun {
    pub fn running_means(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.bits
            .iter()
            .enumerate()
            .map(|(i, &b)| {
                acc += b as f64;
                acc / (i + 1) as f64
            })
            .collect()
    }
}

pub struct BornParams {
    pub q: f64,
    pub n_bits: usize,
    pub m_max: u32,
    pub n_max: usize,
    pub policy: ChooserPolicy,
}

fn in_band(q: f64, m: u32, n: usize, ones: usize) -> bool {
    (q - ones as f64 / n as f64).abs() < 1.0 / m as f64
}

/// Builds a length-`n_bits` outcome sequence in the depth-`n_bits` cylinder
/// tree, generic for every statistics family `(M <= m_max, N' <= n_max)`.
///
/// The deterministic policy runs the descending-sequence construction over
/// the families in lexicographic `(M, N')` order, interleaving bit decisions
/// (each extension decides bits; leftovers are decided 0 at the end). The
/// seeded policy samples the whole sequence from the common-uniform stream
/// and certifies it afterward.
pub fn born_simulate(params: &BornParams) -> Result<BornRun, GenericError> {
    let BornParams {
        q,
        n_bits,
        m_max,
        n_max,
        policy,
    } = *params;
    if !(q > 0.0 && q < 1.0) {
        return Err(GenericError::BadSpec("q must lie strictly in (0,1)".into()));
    }
    if n_bits == 0 || n_bits > 1 << 20 {
        return Err(GenericError::BadSpec("N must lie in 1..=2^20".into()));
    }
    if m_max > 0 && n_max + 1 > n_bits {
        return Err(GenericError::Infeasible {
            m: 1,
            n_prime: n_max,
            detail: format!("families need a prefix longer than N'={n_max}, but N={n_bits}"),
        });
    }
    match policy {
        ChooserPolicy::Seeded(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let bits: Vec<u8> = (0..n_bits)
                .map(|_| u8::from(rng.random::<f64>() < q))
                .collect();
            let certificate = certify(&bits, q, m_max, n_max);
            Ok(BornRun {
                q,
                policy,
                bits,
                certificate,
            })
        }
        ChooserPolicy::Lexicographic => {
            let mut bits: Vec<u8> = Vec::new();
            let mut ones = 0usize;
            // prefix_ones[n] = ones among the first n bits
            let mut prefix_ones: Vec<usize> = vec![0];
            let mut certificate = Vec::new();
            let mut step = 0;
            for m in 1..=m_max {
                for n_prime in 0..=n_max {
                    step += 1;
                    // already witnessed by a decided prefix?
                    let existing =
                        (n_prime + 1..=bits.len()).find(|&n| in_band(q, m, n, prefix_ones[n]));
                    if let Some(n) = existing {
                        certificate.push(CertificateEntry {
                            m,
                            n_prime,
                            met: true,
                            step,
                            witness_len: n,
                        });
                        continue;
                    }
                    // lexicographically least qualifying extension: shortest
                    // target length, fewest added ones, ones packed last
                    let mut found = None;
                    'search: for n in (bits.len().max(n_prime) + 1)..=n_bits {
                        for k_add in 0..=(n - bits.len()) {
                            if in_band(q, m, n, ones + k_add) {
                                found = Some((n, k_add));
                                break 'search;
                            }
                        }
                    }
                    let (n, k_add) = found.ok_or(GenericError::Infeasible {
                        m,
                        n_prime,
                        detail: format!(
                            "no extension of the current {} decided bits reaches the 1/{} band \
                             at any length in ({}, {}]",
                            bits.len(),
                            m,
                            n_prime.max(bits.len()),
                            n_bits
                        ),
                    })?;
                    let zeros = n - bits.len() - k_add;
                    bits.extend(std::iter::repeat_n(0u8, zeros));
                    bits.extend(std::iter::repeat_n(1u8, k_add));
                    ones += k_add;
                    for i in prefix_ones.len()..=bits.len() {
                        prefix_ones.push(prefix_ones[i - 1] + bits[i - 1] as usize);
                    }
                    certificate.push(CertificateEntry {
                        m,
                        n_prime,
                        met: true,
                        step,
                        witness_len: n,
                    });
                }
            }
            // residual bit-deciding families, met by the least extension
            bits.resize(n_bits, 0);
            Ok(BornRun {
                q,
                policy,
                bits,
                certificate,
            })
        }
    }
}

fn certify(bits: &[u8], q: f64, m_max: u32, n_max: usize) -> Vec<CertificateEntry> {
    let mut prefix_ones = vec![0usize; bits.len() + 1];
    for (i, &b) in bits.iter().enumerate() {
        prefix_ones[i + 1] = prefix_ones[i] + b as usize;
    }
    let mut out = Vec::new();
    let mut step = 0;
    for m in 1..=m_max {
        for n_prime in 0..=n_max {
            step += 1;
            let witness = (n_prime + 1..=bits.len()).find(|&n| in_band(q, m, n, prefix_ones[n]));
            out.push(CertificateEntry {
                m,
                n_prime,
                met: witness.is_some(),
                step,
                witness_len: witness.unwrap_or(0),
            });
        }
    }
    out
}

/// Re-derives every certificate claim from the bits alone and compares.
pub fn verify_certificate(run: &BornRun, m_max: u32, n_max: usize) -> Result<(), GenericError> {
    let expected = certify(&run.bits, run.q, m_max, n_max);
    if expected.len() != run.certificate.len() {
        return Err(GenericError::CertificateMismatch(format!(
            "{} entries, expected {}",
            run.certificate.len(),
            expected.len()
        )));
    }
    for (got, want) in run.certificate.iter().zip(&expected) {
        if got.m != want.m || got.n_prime != want.n_prime {
            return Err(GenericError::CertificateMismatch(format!(
                "family order differs at step {}",
                want.step
            )));
        }
        if got.met != want.met {
            return Err(GenericError::CertificateMismatch(format!(
                "family (M={}, N'={}) met={} but scan says {}",
                got.m, got.n_prime, got.met, want.met
            )));
        }
        if got.met {
            // the claimed witness must genuinely lie in the family
            let n = got.witness_len;
            if n <= got.n_prime || n > run.bits.len() {
                return Err(GenericError::CertificateMismatch(format!(
                    "witness length {n} out of range for (M={}, N'={})",
                    got.m, got.n_prime
                )));
            }
            let ones: usize = run.bits[..n].iter().map(|&b| b as usize).sum();
            if !in_band(run.q, got.m, n, ones) {
                return Err(GenericError::CertificateMismatch(format!(
                    "claimed witness for (M={}, N'={}) is outside the band",
                    got.m, got.n_prime
                )));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FrequencyConfig {
    pub block_sizes: Vec<usize>,
    pub z_threshold: f64,
    pub chi2_sigma_threshold: f64,
}

impl Default for FrequencyConfig {
    fn default() -> Self {
        FrequencyConfig {
            block_sizes: vec![8, 32, 128],
            z_threshold: 4.0,
            chi2_sigma_threshold: 4.0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunsTest {
    pub runs: usize,
    pub expected: f64,
    pub z: f64,
    pub degenerate: bool,
    pub flagged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockTest {
    pub block_size: usize,
    pub blocks: usize,
    pub chi2: f64,
    pub normalized: f64,
    pub flagged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FrequencyReport {
    pub n: usize,
    pub mean: f64,
    pub deviation: f64,
    pub longest_run: usize,
    pub runs_test: RunsTest,
    pub block_tests: Vec<BlockTest>,
}

/// Purely descriptive statistics with configured thresholds: running mean
/// against `q`, longest run, a runs test, and block-frequency tests.
pub fn frequency_report(bits: &[u8], q: f64, config: &FrequencyConfig) -> FrequencyReport {
    let n = bits.len();
    let ones: usize = bits.iter().map(|&b| b as usize).sum();
    let mean = if n == 0 { 0.0 } else { ones as f64 / n as f64 };
    let mut longest = 0;
    let mut current = 0;
    let mut prev: Option<u8> = None;
    let mut runs = 0;
    for &b in bits {
        if prev == Some(b) {
            current += 1;
        } else {
            runs += 1;
            current = 1;
        }
        longest = longest.max(current);
        prev = Some(b);
    }
    let n0 = (n - ones) as f64;
    let n1 = ones as f64;
    let nf = n as f64;
    let degenerate = n == 0 || ones == 0 || ones == n;
    let (expected, z) = if degenerate {
        (0.0, f64::INFINITY)
    } else {
        let e = 1.0 + 2.0 * n1 * n0 / nf;
        let var = 2.0 * n1 * n0 * (2.0 * n1 * n0 - nf) / (nf * nf * (nf - 1.0));
        (e, (runs as f64 - e) / var.sqrt())
    };
    let runs_test = RunsTest {
        runs,
        expected,
        z,
        degenerate,
        flagged: degenerate || z.abs() > config.z_threshold,
    };
    let block_tests = config
        .block_sizes
        .iter()
        .filter(|&&bs| bs > 0 && bs <= n)
        .map(|&bs| {
            let blocks = n / bs;
            let mut chi2 = 0.0;
            for b in 0..blocks {
                let s: usize = bits[b * bs..(b + 1) * bs].iter().map(|&x| x as usize).sum();
                let p = s as f64 / bs as f64;
                chi2 += (p - q) * (p - q) * bs as f64 / (q * (1.0 - q));
            }
            let k = blocks as f64;
            let normalized = (chi2 - k) / (2.0 * k).sqrt();
            BlockTest {
                block_size: bs,
                blocks,
                chi2,
                normalized,
                flagged: normalized.abs() > config.chi2_sigma_threshold,
            }
        })
        .collect();
    FrequencyReport {
        n,
        mean,
        deviation: (mean - q).abs(),
        longest_run: longest,
        runs_test,
        block_tests,
    }
}
