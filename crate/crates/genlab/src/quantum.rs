//! Propositions as orthogonal projections on small complex Hilbert spaces:
//! lattice operations on commuting projections, system generation, Born and
//! ensemble expectations, von Neumann conditioning, and the worked physical
//! systems (spin-1/2 direction families, ray files for noncontextuality
//! checks).
//!
//! Complex arithmetic is hand-rolled on dense matrices; dimensions stay
//! small, so nothing heavier than a Cholesky-style pivot sweep is needed.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Tolerance for every matrix predicate; projection equality is
/// entrywise within this bound.
pub const EPS_TOL: f64 = 1e-9;

// dedup buckets are far coarser than accumulated arithmetic error and far
// finer than the gap between distinct projections in desk-scale systems
const KEY_QUANTUM: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

pub const C_ZERO: Complex = Complex { re: 0.0, im: 0.0 };
pub const C_ONE: Complex = Complex { re: 1.0, im: 0.0 };

impl Complex {
    pub fn new(re: f64, im: f64) -> Self {
        Complex { re, im }
    }

    pub fn real(re: f64) -> Self {
        Complex { re, im: 0.0 }
    }

    pub fn conj(self) -> Self {
        Complex {
            re: self.re,
            im: -self.im,
        }
    }

    pub fn abs(self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn scale(self, s: f64) -> Self {
        Complex {
            re: self.re * s,
            im: self.im * s,
        }
    }
}

impl Add for Complex {
    type Output = Complex;
    fn add(self, o: Complex) -> Complex {
        Complex::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for Complex {
    type Output = Complex;
    fn sub(self, o: Complex) -> Complex {
        Complex::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for Complex {
    type Output = Complex;
    fn mul(self, o: Complex) -> Complex {
        Complex::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }
}

impl Neg for Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        Complex::new(-self.re, -self.im)
    }
}

/// A dense square complex matrix, row major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix {
            n,
            data: vec![C_ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, C_ONE);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "matrix must be square");
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex) {
        self.data[i * self.n + j] = v;
    }

    pub fn add(&self, o: &CMatrix) -> CMatrix {
        assert_eq!(self.n, o.n);
        CMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&o.data)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, o: &CMatrix) -> CMatrix {
        assert_eq!(self.n, o.n);
        CMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&o.data)
                .map(|(&a, &b)| a - b)
                .collect(),
        }
    }

    pub fn mul(&self, o: &CMatrix) -> CMatrix {
        assert_eq!(self.n, o.n);
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.abs() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.set(i, j, out.get(i, j) + a * o.get(k, j));
                }
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> CMatrix {
        CMatrix {
            n: self.n,
            data: self.data.iter().map(|&a| a.scale(s)).collect(),
        }
    }

    pub fn adjoint(&self) -> CMatrix {
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, self.get(j, i).conj());
            }
        }
        out
    }

    pub fn trace(&self) -> Complex {
        (0..self.n).fold(C_ZERO, |acc, i| acc + self.get(i, i))
    }

    /// Largest entry modulus.
    pub fn norm_inf(&self) -> f64 {
        self.data.iter().map(|c| c.abs()).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, o: &CMatrix, tol: f64) -> bool {
        self.n == o.n && self.sub(o).norm_inf() <= tol
    }

    pub fn apply(&self, v: &[Complex]) -> Vec<Complex> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| (0..self.n).fold(C_ZERO, |acc, j| acc + self.get(i, j) * v[j]))
            .collect()
    }

    /// `|v><v| / <v,v>`: the rank-1 projection onto the span of `v`.
    pub fn rank_one_projection(v: &[Complex]) -> Result<CMatrix, QuantumError> {
        let norm2: f64 = v.iter().map(|c| c.abs() * c.abs()).sum();
        if norm2 <= EPS_TOL {
            return Err(QuantumError::ZeroVector);
        }
        let n = v.len();
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, (v[i] * v[j].conj()).scale(1.0 / norm2));
            }
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum QuantumError {
    DimensionMismatch,
    NotHermitian,
    NotIdempotent,
    NotPositiveSemidefinite,
    TraceNotOne(f64),
    ZeroVector,
    Noncommuting,
    ClosureCapExceeded(usize),
    NullConditioning,
    NonOrthogonalBasis(usize),
    NotOrthogonalFamily,
    BadDirection(String),
    BadInput(String),
}

impl fmt::Display for QuantumError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuantumError::DimensionMismatch => write!(f, "matrix dimensions differ"),
            QuantumError::NotHermitian => write!(f, "matrix is not Hermitian within tolerance"),
            QuantumError::NotIdempotent => write!(f, "matrix is not idempotent within tolerance"),
            QuantumError::NotPositiveSemidefinite => {
                write!(f, "matrix is not positive semidefinite")
            }
            QuantumError::TraceNotOne(t) => write!(f, "trace is {t}, expected 1"),
            QuantumError::ZeroVector => write!(f, "zero vector"),
            QuantumError::Noncommuting => write!(f, "projections do not commute"),
            QuantumError::ClosureCapExceeded(cap) => {
                write!(f, "closure exceeds configured size cap {cap}")
            }
            QuantumError::NullConditioning => write!(f, "conditioning on null event"),
            QuantumError::NonOrthogonalBasis(i) => {
                write!(f, "basis group {i} is not orthogonal")
            }
            QuantumError::NotOrthogonalFamily => {
                write!(f, "family is not pairwise orthogonal")
            }
            QuantumError::BadDirection(s) => write!(f, "bad direction: {s}"),
            QuantumError::BadInput(s) => write!(f, "{s}"),
        }
    }
}

impl std::error::Error for QuantumError {}

/// An orthogonal projection: Hermitian and idempotent within [`EPS_TOL`].
#[derive(Clone, Debug)]
pub struct Projection {
    m: CMatrix,
}

impl Projection {
    pub fn new(m: CMatrix) -> Result<Self, QuantumError> {
        if !m.approx_eq(&m.adjoint(), EPS_TOL) {
            return Err(QuantumError::NotHermitian);
        }
        if !m.mul(&m).approx_eq(&m, EPS_TOL) {
            return Err(QuantumError::NotIdempotent);
        }
        Ok(Projection { m })
    }

    pub fn zero(dim: usize) -> Self {
        Projection {
            m: CMatrix::zeros(dim),
        }
    }

    pub fn one(dim: usize) -> Self {
        Projection {
            m: CMatrix::identity(dim),
        }
    }

    pub fn from_ray(v: &[Complex]) -> Result<Self, QuantumError> {
        Projection::new(CMatrix::rank_one_projection(v)?)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    /// `I - P`, exactly; complement is involutive on the nose.
    pub fn complement(&self) -> Projection {
        Projection {
            m: CMatrix::identity(self.dim()).sub(&self.m),
        }
    }

    pub fn approx_eq(&self, o: &Projection) -> bool {
        self.m.approx_eq(&o.m, EPS_TOL)
    }

    pub fn is_zero(&self) -> bool {
        self.m.norm_inf() <= EPS_TOL
    }

    pub fn is_one(&self) -> bool {
        self.m.approx_eq(&CMatrix::identity(self.dim()), EPS_TOL)
    }

    /// Tolerance-bucketed canonical key; closure fixpoints need stable
    /// identity.
    fn key(&self) -> Vec<(i64, i64)> {
        self.m
            .data
            .iter()
            .map(|c| {
                let re = (c.re / KEY_QUANTUM).round() as i64;
                let im = (c.im / KEY_QUANTUM).round() as i64;
                (re, im)
            })
            .collect()
    }
}

pub fn commutes(p: &Projection, q: &Projection) -> Result<bool, QuantumError> {
    if p.dim() != q.dim() {
        return Err(QuantumError::DimensionMismatch);
    }
    let pq = p.m.mul(&q.m);
    let qp = q.m.mul(&p.m);
    Ok(pq.sub(&qp).norm_inf() <= EPS_TOL)
}

/// Meet of commuting projections is their product.
pub fn meet_commuting(p: &Projection, q: &Projection) -> Result<Projection, QuantumError> {
    if !commutes(p, q)? {
        return Err(QuantumError::Noncommuting);
    }
    Projection::new(p.m.mul(&q.m))
}

pub fn join_commuting(p: &Projection, q: &Projection) -> Result<Projection, QuantumError> {
    let meet = meet_commuting(&p.complement(), &q.complement())?;
    Ok(meet.complement())
}

/// `P <= Q` iff `PQ = P`, for commuting projections.
pub fn leq(p: &Projection, q: &Projection) -> Result<bool, QuantumError> {
    if !commutes(p, q)? {
        return Err(QuantumError::Noncommuting);
    }
    Ok(p.m.mul(&q.m).approx_eq(&p.m, EPS_TOL))
}

/// A finite propositional system: a list of distinct projections containing
/// 0 and I, closed under complement and commuting binary meet.
#[derive(Clone, Debug)]
pub struct PropSystem {
    dim: usize,
    elements: Vec<Projection>,
    zero: usize,
    one: usize,
}

impl PropSystem {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn elements(&self) -> &[Projection] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &Projection {
        &self.elements[i]
    }

    pub fn zero_index(&self) -> usize {
        self.zero
    }

    pub fn one_index(&self) -> usize {
        self.one
    }

    pub fn index_of(&self, p: &Projection) -> Option<usize> {
        self.elements.iter().position(|e| e.approx_eq(p))
    }
}

pub const DEFAULT_CLOSURE_CAP: usize = 4096;

/// Least fixpoint of the seed under complement and commuting binary meet,
/// with 0 and I adjoined. Deduplication is by bucketed canonical key.
pub fn close_system(seed: &[Projection], cap: usize) -> Result<PropSystem, QuantumError> {
    let dim = match seed.first() {
        Some(p) => p.dim(),
        None => return Err(QuantumError::BadInput("empty seed".into())),
    };
    if seed.iter().any(|p| p.dim() != dim) {
        return Err(QuantumError::DimensionMismatch);
    }
    let mut elements: Vec<Projection> = Vec::new();
    let mut keys: HashMap<Vec<(i64, i64)>, usize> = HashMap::new();
    fn push(
        elements: &mut Vec<Projection>,
        keys: &mut HashMap<Vec<(i64, i64)>, usize>,
        p: Projection,
    ) {
        if let std::collections::hash_map::Entry::Vacant(slot) = keys.entry(p.key()) {
            slot.insert(elements.len());
            elements.push(p);
        }
    }
    push(&mut elements, &mut keys, Projection::zero(dim));
    push(&mut elements, &mut keys, Projection::one(dim));
    for p in seed {
        push(&mut elements, &mut keys, p.clone());
    }
    let mut frontier_start = 0;
    loop {
        let end = elements.len();
        if end > cap {
            return Err(QuantumError::ClosureCapExceeded(cap));
        }
        let mut added = false;
        for i in frontier_start..end {
            let c = elements[i].complement();
            if !keys.contains_key(&c.key()) {
                push(&mut elements, &mut keys, c);
                added = true;
            }
        }
        for i in 0..end {
            for j in i..end {
                // only pairs with at least one member in the new frontier
                if i < frontier_start && j < frontier_start {
                    continue;
                }
                if commutes(&elements[i], &elements[j])? {
                    let m = meet_commuting(&elements[i], &elements[j])?;
                    if !keys.contains_key(&m.key()) {
                        push(&mut elements, &mut keys, m);
                        added = true;
                    }
                }
                if elements.len() > cap {
                    return Err(QuantumError::ClosureCapExceeded(cap));
                }
            }
        }
        if !added {
            break;
        }
        frontier_start = end;
    }
    Ok(PropSystem {
        dim,
        zero: 0,
        one: 1,
        elements,
    })
}

/// `||P psi||^2 / ||psi||^2`.
pub fn born_expectation(p: &Projection, psi: &[Complex]) -> Result<f64, QuantumError> {
    let norm2: f64 = psi.iter().map(|c| c.abs() * c.abs()).sum();
    if norm2 <= EPS_TOL {
        return Err(QuantumError::ZeroVector);
    }
    if psi.len() != p.dim() {
        return Err(QuantumError::DimensionMismatch);
    }
    let image = p.matrix().apply(psi);
    let img2: f64 = image.iter().map(|c| c.abs() * c.abs()).sum();
    Ok(img2 / norm2)
}

/// Hermitian, positive semidefinite, unit trace within tolerance.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    m: CMatrix,
}

impl DensityOperator {
    pub fn new(m: CMatrix) -> Result<Self, QuantumError> {
        if !m.approx_eq(&m.adjoint(), EPS_TOL) {
            return Err(QuantumError::NotHermitian);
        }
        if !is_psd(&m) {
            return Err(QuantumError::NotPositiveSemidefinite);
        }
        let t = m.trace();
        if (t.re - 1.0).abs() > EPS_TOL || t.im.abs() > EPS_TOL {
            return Err(QuantumError::TraceNotOne(t.re));
        }
        Ok(DensityOperator { m })
    }

    pub fn pure(psi: &[Complex]) -> Result<Self, QuantumError> {
        DensityOperator::new(CMatrix::rank_one_projection(psi)?)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityOperator {
            m: CMatrix::identity(dim).scale(1.0 / dim as f64),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }
}

/// Cholesky-style sweep with a pivot tolerance: a Hermitian matrix is PSD
/// iff the sweep never produces a significantly negative pivot and null
/// pivots have null rows.
fn is_psd(m: &CMatrix) -> bool {
    let n = m.dim();
    let mut a = m.clone();
    let tol = 1e-8 * (1.0 + m.norm_inf());
    for k in 0..n {
        let d = a.get(k, k).re;
        if d < -tol {
            return false;
        }
        if d <= tol {
            // null pivot: the rest of its row/column must vanish
            for j in k + 1..n {
                if a.get(k, j).abs() > tol {
                    return false;
                }
            }
            continue;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = a.get(i, j) - (a.get(i, k) * a.get(k, j)).scale(1.0 / d);
                a.set(i, j, v);
            }
        }
    }
    true
}

/// `tr(DP)`, the ensemble expectation of a proposition.
pub fn density_expectation(d: &DensityOperator, p: &Projection) -> Result<f64, QuantumError> {
    if d.dim() != p.dim() {
        return Err(QuantumError::DimensionMismatch);
    }
    Ok(d.m.mul(p.matrix()).trace().re)
}

/// For a pairwise orthogonal family: expectation of I is 1 and expectation
/// of the join equals the sum of expectations.
pub fn additivity_check(d: &DensityOperator, family: &[Projection]) -> Result<bool, QuantumError> {
    for (i, p) in family.iter().enumerate() {
        for q in &family[i + 1..] {
            if p.matrix().mul(q.matrix()).norm_inf() > EPS_TOL {
                return Err(QuantumError::NotOrthogonalFamily);
            }
        }
    }
    let one = Projection::one(d.dim());
    if (density_expectation(d, &one)? - 1.0).abs() > EPS_TOL {
        return Ok(false);
    }
    let mut sum_matrix = CMatrix::zeros(d.dim());
    let mut sum_expect = 0.0;
    for p in family {
        sum_matrix = sum_matrix.add(p.matrix());
        sum_expect += density_expectation(d, p)?;
    }
    let join = Projection::new(sum_matrix)?;
    Ok((density_expectation(d, &join)? - sum_expect).abs() <= EPS_TOL)
}

/// `PDP / tr(DP)`: the ensemble after filtering on `P`.
pub fn vn_conditional(
    d: &DensityOperator,
    p: &Projection,
) -> Result<DensityOperator, QuantumError> {
    let weight = density_expectation(d, p)?;
    if weight <= EPS_TOL {
        return Err(QuantumError::NullConditioning);
    }
    let pdp = p.matrix().mul(&d.m).mul(p.matrix());
    DensityOperator::new(pdp.scale(1.0 / weight))
}

/// Trace of a product of matrices computed as a bare index sum, with no
/// intermediate products; serves as an independent evaluation path.
pub fn trace_product_elementwise(ms: &[&CMatrix]) -> Complex {
    assert!(!ms.is_empty());
    let n = ms[0].dim();
    // tr(M0 M1 .. Mk) = sum over index cycles
    fn go(ms: &[&CMatrix], row: usize, first: usize, acc: Complex, out: &mut Complex) {
        if ms.is_empty() {
            if row == first {
                *out = *out + acc;
            }
            return;
        }
        let n = ms[0].dim();
        for j in 0..n {
            go(&ms[1..], j, first, acc * ms[0].get(row, j), out);
        }
    }
    let mut out = C_ZERO;
    for i in 0..n {
        go(ms, i, i, C_ONE, &mut out);
    }
    out
}

/// A fixed witness that ordering matters for von Neumann conditioning on
/// noncommuting propositions: a rank-1 density misaligned with both `P` and
/// `Q`.
pub struct MalleyWitness {
    pub density: DensityOperator,
    pub p: Projection,
    pub q: Projection,
    pub tr_dpqp: f64,
    pub tr_dqpq: f64,
}

pub fn malley_asymmetry_witness(dim: usize) -> Result<MalleyWitness, QuantumError> {
    if dim < 2 {
        return Err(QuantumError::BadInput(
            "dimension must be at least 2".into(),
        ));
    }
    let mut e0 = vec![C_ZERO; dim];
    e0[0] = C_ONE;
    let density = DensityOperator::pure(&e0)?;
    let p = Projection::from_ray(&e0)?;
    let q_ray: Vec<Complex> = {
        let mut v = vec![C_ZERO; dim];
        v[0] = C_ONE;
        v[1] = C_ONE;
        v
    };
    let q = Projection::from_ray(&q_ray)?;
    let dm = density.matrix();
    let tr_dpqp = dm
        .mul(p.matrix())
        .mul(q.matrix())
        .mul(p.matrix())
        .trace()
        .re;
    let tr_dqpq = dm
        .mul(q.matrix())
        .mul(p.matrix())
        .mul(q.matrix())
        .trace()
        .re;
    Ok(MalleyWitness {
        density,
        p,
        q,
        tr_dpqp,
        tr_dqpq,
    })
}

/// `P^a = (I + a . sigma) / 2` from the Pauli construction.
pub fn spin_projection(direction: [f64; 3]) -> Result<Projection, QuantumError> {
    let [x, y, z] = direction;
    let norm = (x * x + y * y + z * z).sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(QuantumError::BadDirection(format!(
            "direction ({x}, {y}, {z}) is not unit length"
        )));
    }
    let m = CMatrix::from_rows(&[
        vec![
            Complex::real((1.0 + z) / 2.0),
            Complex::new(x / 2.0, -y / 2.0),
        ],
        vec![
            Complex::new(x / 2.0, y / 2.0),
            Complex::real((1.0 - z) / 2.0),
        ],
    ]);
    Projection::new(m)
}

/// The system `{0, I} union {P^a, complement(P^a)}` over the given
/// directions. Distinct directions must be neither parallel nor antiparallel.
pub fn spin_half_system(directions: &[[f64; 3]]) -> Result<PropSystem, QuantumError> {
    for (i, a) in directions.iter().enumerate() {
        for b in &directions[i + 1..] {
            let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            if dot.abs() > 1.0 - 1e-9 {
                return Err(QuantumError::BadDirection(format!(
                    "directions {a:?} and {b:?} collapse to the same measurement"
                )));
            }
        }
    }
    let seed: Result<Vec<Projection>, QuantumError> =
        directions.iter().map(|&a| spin_projection(a)).collect();
    let system = close_system(&seed?, DEFAULT_CLOSURE_CAP)?;
    // sanity: one complementary pair per direction
    debug_assert_eq!(system.len(), 2 * directions.len() + 2);
    Ok(system)
}

/// Ray file: a list of orthogonal bases, rays as complex coordinate vectors.
#[derive(Serialize, Deserialize)]
pub struct RayFileJson {
    pub dim: usize,
    pub bases: Vec<Vec<Vec<(f64, f64)>>>,
}

/// Direction file: unit 3-vectors.
#[derive(Serialize, Deserialize)]
pub struct DirectionFileJson {
    pub directions: Vec<[f64; 3]>,
}

/// The system generated by the rank-1 projections of the rays, plus
/// complements and commuting meets. Every basis group must be a full
/// orthogonal basis of the ambient dimension.
pub fn ks_system(file: &RayFileJson, cap: usize) -> Result<PropSystem, QuantumError> {
    let dim = file.dim;
    let mut seed: Vec<Projection> = Vec::new();
    for (bi, basis) in file.bases.iter().enumerate() {
        if basis.len() != dim {
            return Err(QuantumError::NonOrthogonalBasis(bi));
        }
        let rays: Vec<Vec<Complex>> = basis
            .iter()
            .map(|ray| {
                ray.iter()
                    .map(|&(re, im)| Complex::new(re, im))
                    .collect::<Vec<_>>()
            })
            .collect();
        for ray in &rays {
            if ray.len() != dim {
                return Err(QuantumError::BadInput(format!(
                    "ray in basis {bi} has wrong dimension"
                )));
            }
        }
        for (i, u) in rays.iter().enumerate() {
            for v in &rays[i + 1..] {
                let inner = u
                    .iter()
                    .zip(v)
                    .fold(C_ZERO, |acc, (a, b)| acc + a.conj() * *b);
                if inner.abs() > EPS_TOL {
                    return Err(QuantumError::NonOrthogonalBasis(bi));
                }
            }
        }
        for ray in &rays {
            seed.push(Projection::from_ray(ray)?);
        }
    }
    close_system(&seed, cap)
}

pub fn parse_ray_file(text: &str) -> Result<RayFileJson, QuantumError> {
    serde_json::from_str(text).map_err(|e| QuantumError::BadInput(e.to_string()))
}

pub fn parse_direction_file(text: &str) -> Result<DirectionFileJson, QuantumError> {
    serde_json::from_str(text).map_err(|e| QuantumError::BadInput(e.to_string()))
}
