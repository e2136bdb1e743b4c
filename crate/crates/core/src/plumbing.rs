//! Singular-set loops: a cyclic chain of `t = b₂ + 2` invariant spheres,
//! consecutive ones meeting at a pole.
//!
//! Sphere `i` has Euler number `e_i`; `ε_i` is the intersection sign at the
//! pole it shares with sphere `i - 1` (indices mod `t`). All indices in
//! this module are 0-based.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forms::{self, SymmetricForm};
use crate::matrix::IntMatrix;
use crate::primes::is_prime;
use crate::reduction;

/// Prime used by enumeration when none is given.
pub const DEFAULT_PRIME: u64 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn from_value(v: i64) -> Option<Sign> {
        match v {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn times(self, other: Sign) -> Sign {
        if self == other {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn product(signs: impl IntoIterator<Item = Sign>) -> Sign {
        signs.into_iter().fold(Sign::Plus, Sign::times)
    }
}

impl From<Sign> for i8 {
    fn from(s: Sign) -> i8 {
        s.value() as i8
    }
}

impl TryFrom<i8> for Sign {
    type Error = String;

    fn try_from(v: i8) -> Result<Self, Self::Error> {
        Sign::from_value(v as i64).ok_or_else(|| format!("sign must be 1 or -1, got {v}"))
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+1",
            Sign::Minus => "-1",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sphere {
    #[serde(with = "crate::decimal")]
    pub euler: BigInt,
    pub sign: Sign,
}

impl Sphere {
    pub fn new(euler: impl Into<BigInt>, sign: Sign) -> Self {
        Sphere { euler: euler.into(), sign }
    }
}

/// Cases outside the loop description. They carry no sphere data.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExceptionFlag {
    #[default]
    None,
    /// `b₂ = 1`, `p = 3`, pseudofree: the fixed set is isolated points.
    PseudofreeP3B1,
    /// As above, with the fake projective plane (non-zero KS) in view.
    PseudofreeP3Chern,
    /// `p = 2`, no fixed points, intersection form `H`.
    FixedPointFreeP2Hyperbolic,
}

impl ExceptionFlag {
    pub fn is_exception(self) -> bool {
        self != ExceptionFlag::None
    }

    pub fn b2(self) -> Option<usize> {
        match self {
            ExceptionFlag::None => None,
            ExceptionFlag::PseudofreeP3B1 | ExceptionFlag::PseudofreeP3Chern => Some(1),
            ExceptionFlag::FixedPointFreeP2Hyperbolic => Some(2),
        }
    }

    pub fn required_prime(self) -> Option<u64> {
        match self {
            ExceptionFlag::None => None,
            ExceptionFlag::PseudofreeP3B1 | ExceptionFlag::PseudofreeP3Chern => Some(3),
            ExceptionFlag::FixedPointFreeP2Hyperbolic => Some(2),
        }
    }

    pub fn note(self) -> Option<&'static str> {
        match self {
            ExceptionFlag::None => None,
            ExceptionFlag::PseudofreeP3B1 => Some(
                "b2 = 1, p = 3, pseudofree action: M is homeomorphic to ±CP² or possibly to the \
                 Chern manifold; no loop of spheres, so no equivariant decomposition is asserted",
            ),
            ExceptionFlag::PseudofreeP3Chern => Some(
                "b2 = 1, p = 3, pseudofree action with non-zero Kirby-Siebenmann invariant in \
                 view: M may be ±(Chern manifold); no equivariant decomposition is asserted",
            ),
            ExceptionFlag::FixedPointFreeP2Hyperbolic => Some(
                "p = 2 fixed-point-free action with intersection form H: outside the loop \
                 construction, which assumes a non-empty fixed set",
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SingularSetData {
    pub p: u64,
    pub spheres: Vec<Sphere>,
    /// For the pseudofree exceptions this picks `+CP²` or `-CP²`.
    pub orientation: Sign,
    #[serde(default)]
    pub exception: ExceptionFlag,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlumbingError {
    #[error("a loop needs at least 3 spheres, got {t}")]
    TooFewSpheres { t: usize },
    #[error("cut indices must differ (both {0})")]
    SameCutIndex(usize),
    #[error("sphere index {index} out of range for a loop of {t}")]
    IndexOutOfRange { index: usize, t: usize },
    #[error("not a linear chain: {0}")]
    NotChain(String),
    #[error("exception data has no sphere loop")]
    ExceptionData,
}

impl SingularSetData {
    pub fn new(p: u64, spheres: Vec<Sphere>) -> Self {
        SingularSetData { p, spheres, orientation: Sign::Plus, exception: ExceptionFlag::None }
    }

    /// Loop data from `(e_i, ε_i)` pairs.
    pub fn from_pairs(p: u64, pairs: &[(i64, i64)]) -> Option<Self> {
        let spheres = pairs
            .iter()
            .map(|&(e, s)| Some(Sphere::new(e, Sign::from_value(s)?)))
            .collect::<Option<Vec<_>>>()?;
        Some(SingularSetData::new(p, spheres))
    }

    pub fn exception(flag: ExceptionFlag, orientation: Sign) -> Self {
        SingularSetData {
            p: flag.required_prime().unwrap_or(DEFAULT_PRIME),
            spheres: Vec::new(),
            orientation,
            exception: flag,
        }
    }

    /// The `CP²`-type triangle: `t = 3`, all `e_i = 1`, all `ε_i = +1`.
    pub fn cp2_triangle(p: u64) -> Self {
        SingularSetData::from_pairs(p, &[(1, 1), (1, 1), (1, 1)]).unwrap()
    }

    /// The `S²×S²`-type square: `t = 4`, all `e_i = 0`, all `ε_i = +1`.
    pub fn s2xs2_square(p: u64) -> Self {
        SingularSetData::from_pairs(p, &[(0, 1), (0, 1), (0, 1), (0, 1)]).unwrap()
    }

    pub fn t(&self) -> usize {
        self.spheres.len()
    }

    pub fn b2(&self) -> usize {
        self.exception.b2().unwrap_or_else(|| self.t().saturating_sub(2))
    }

    /// Same loop read from sphere `k` onwards.
    pub fn rotate(&self, k: usize) -> Self {
        let t = self.t();
        let mut out = self.clone();
        if t > 0 {
            out.spheres = (0..t).map(|i| self.spheres[(i + k) % t].clone()).collect();
        }
        out
    }

    /// Same loop traversed backwards: new sphere `i` is old sphere
    /// `t - 1 - i`, so the pole signs move to `ε'_i = ε_{(t - i) mod t}`.
    pub fn reflect(&self) -> Self {
        let t = self.t();
        let mut out = self.clone();
        out.spheres = (0..t)
            .map(|i| Sphere {
                euler: self.spheres[t - 1 - i].euler.clone(),
                sign: self.spheres[(t - i) % t].sign,
            })
            .collect();
        out
    }

    fn loop_len(&self) -> Result<usize, PlumbingError> {
        if self.exception.is_exception() {
            return Err(PlumbingError::ExceptionData);
        }
        let t = self.t();
        if t < 3 {
            return Err(PlumbingError::TooFewSpheres { t });
        }
        Ok(t)
    }
}

/// The `t × t` intersection matrix of the closed loop: `e_i` on the
/// diagonal and `ε_{i+1}` at `(i, i+1 mod t)` and its mirror.
pub fn circular_matrix(data: &SingularSetData) -> Result<SymmetricForm, PlumbingError> {
    let t = data.loop_len()?;
    let mut m = IntMatrix::zeros(t, t);
    for i in 0..t {
        m[(i, i)] = data.spheres[i].euler.clone();
        let j = (i + 1) % t;
        let s = BigInt::from(data.spheres[j].sign.value());
        m[(i, j)] = s.clone();
        m[(j, i)] = s;
    }
    Ok(SymmetricForm::new(m).expect("circular matrix is symmetric"))
}

/// One chain left after cutting the loop. `spheres` lists the original
/// indices in loop order; `flips` are the basis signs that made every
/// coupling `+1`, so `form` is congruent to the raw principal submatrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutPiece {
    pub spheres: Vec<usize>,
    pub flips: Vec<Sign>,
    pub form: SymmetricForm,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cut {
    pub pair: (usize, usize),
    pub adjacent: bool,
    pub pieces: Vec<CutPiece>,
}

impl Cut {
    /// Block sum of the pieces, itself a chain-shaped form.
    pub fn form(&self) -> SymmetricForm {
        let forms: Vec<SymmetricForm> = self.pieces.iter().map(|p| p.form.clone()).collect();
        forms::block_sum(&forms).expect("cut of a loop with t >= 3 is non-empty")
    }

    pub fn is_unimodular(&self) -> bool {
        self.form().is_unimodular()
    }
}

pub fn are_adjacent(t: usize, i: usize, j: usize) -> bool {
    (i + 1) % t == j || (j + 1) % t == i
}

/// Deletes spheres `i` and `j`, leaving one chain when they are adjacent
/// and two otherwise (an arc may be empty for `t = 3`).
pub fn cut_redundant(data: &SingularSetData, i: usize, j: usize) -> Result<Cut, PlumbingError> {
    let t = data.loop_len()?;
    for index in [i, j] {
        if index >= t {
            return Err(PlumbingError::IndexOutOfRange { index, t });
        }
    }
    if i == j {
        return Err(PlumbingError::SameCutIndex(i));
    }
    let full = circular_matrix(data)?;
    let arc = |from: usize, to: usize| -> Vec<usize> {
        let mut v = Vec::new();
        let mut k = (from + 1) % t;
        while k != to {
            v.push(k);
            k = (k + 1) % t;
        }
        v
    };
    let pieces = [arc(i, j), arc(j, i)]
        .into_iter()
        .filter(|a| !a.is_empty())
        .map(|spheres| chain_piece(&full, spheres))
        .collect();
    Ok(Cut { pair: (i.min(j), i.max(j)), adjacent: are_adjacent(t, i, j), pieces })
}

fn chain_piece(full: &SymmetricForm, spheres: Vec<usize>) -> CutPiece {
    let mut flips = vec![Sign::Plus];
    for w in spheres.windows(2) {
        let prev = *flips.last().unwrap();
        let coupling = full.entry(w[0], w[1]);
        flips.push(if coupling.is_negative() { prev.flip() } else { prev });
    }
    let n = spheres.len();
    let mut m = IntMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            let s = flips[a].times(flips[b]).value();
            m[(a, b)] = full.entry(spheres[a], spheres[b]) * s;
        }
    }
    let form = SymmetricForm::new(m).expect("principal submatrix is symmetric");
    CutPiece { spheres, flips, form }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "reason", rename_all = "snake_case")]
pub enum Verdict {
    Valid,
    Invalid(String),
    /// Exception data: no loop to check, only the flagged note applies.
    Exceptional,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutTest {
    pub i: usize,
    pub j: usize,
    pub adjacent: bool,
    pub unimodular: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub circular_rank: usize,
    pub expected_rank: usize,
    pub cuts_tested: Vec<CutTest>,
    pub fixed_point_count: usize,
    pub primitivity_note: String,
    pub verdict: Verdict,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.verdict == Verdict::Valid
    }

    pub fn unimodular_cuts(&self) -> impl Iterator<Item = &CutTest> {
        self.cuts_tested.iter().filter(|c| c.unimodular)
    }
}

const ODD_PRIMITIVITY_NOTE: &str = "p odd: the transfer argument alone leaves open sphere classes \
    divisible by 2; connectivity of the loop settles primitivity, so this is informational only";
const EVEN_PRIMITIVITY_NOTE: &str = "p = 2: each sphere represents a primitive class";

/// Checks the structural constraints on loop data. Never fails; problems
/// go into the verdict.
pub fn validate(data: &SingularSetData) -> ValidationReport {
    let primitivity_note =
        if data.p == 2 { EVEN_PRIMITIVITY_NOTE } else { ODD_PRIMITIVITY_NOTE }.to_string();
    let t = data.t();
    let mut report = ValidationReport {
        circular_rank: 0,
        expected_rank: t.saturating_sub(2),
        cuts_tested: Vec::new(),
        fixed_point_count: t,
        primitivity_note,
        verdict: Verdict::Valid,
    };
    let invalid = |mut r: ValidationReport, why: String| {
        r.verdict = Verdict::Invalid(why);
        r
    };

    if data.exception.is_exception() {
        let flag = data.exception;
        report.expected_rank = flag.b2().unwrap_or(0);
        report.circular_rank = report.expected_rank;
        report.fixed_point_count = match flag {
            ExceptionFlag::FixedPointFreeP2Hyperbolic => 0,
            _ => report.expected_rank + 2,
        };
        if !data.spheres.is_empty() {
            return invalid(report, "exception data must not list spheres".into());
        }
        if flag.required_prime() != Some(data.p) {
            return invalid(report, format!("exception {flag:?} requires a different p than {}", data.p));
        }
        report.verdict = Verdict::Exceptional;
        return report;
    }
    if !is_prime(data.p) {
        return invalid(report, format!("p = {} is not prime", data.p));
    }
    if t < 3 {
        return invalid(report, format!("a loop needs at least 3 spheres, got {t}"));
    }

    let full = circular_matrix(data).expect("t >= 3 checked");
    report.circular_rank = full.matrix().rank();
    if report.circular_rank != report.expected_rank {
        let why = format!(
            "circular matrix has rank {}, expected t - 2 = {}",
            report.circular_rank, report.expected_rank
        );
        return invalid(report, why);
    }
    for i in 0..t {
        for j in i + 1..t {
            let cut = cut_redundant(data, i, j).expect("indices in range");
            report.cuts_tested.push(CutTest {
                i,
                j,
                adjacent: cut.adjacent,
                unimodular: cut.is_unimodular(),
            });
        }
    }
    if report.unimodular_cuts().next().is_none() {
        return invalid(report, "no pair of spheres leaves a unimodular chain".into());
    }
    report
}

/// `|H₁|` of the plumbing boundary: `|det|`, with 1 meaning `S³` and 0
/// meaning `S¹×S²`.
pub fn boundary_h1_order(chain: &SymmetricForm) -> Result<BigInt, PlumbingError> {
    let n = chain.dim();
    for i in 0..n {
        for j in i + 1..n {
            let x = chain.entry(i, j);
            let ok = if j == i + 1 { x.abs().is_one() } else { x.is_zero() };
            if !ok {
                return Err(PlumbingError::NotChain(format!(
                    "entry ({i}, {j}) = {x} breaks the linear chain shape"
                )));
            }
        }
    }
    Ok(chain.determinant().abs())
}

/// Canonical representative of a loop up to rotation, reflection and
/// re-signing of sphere classes: only the product of the pole signs
/// survives, placed as a single `-1` on sphere 0 (or all `+1`), and the
/// Euler sequence is the lexicographically least of its dihedral images.
pub fn canonical_form(data: &SingularSetData) -> Option<SingularSetData> {
    if data.exception.is_exception() {
        return Some(data.clone());
    }
    let eulers: Vec<BigInt> = data.spheres.iter().map(|s| s.euler.clone()).collect();
    let best = dihedral_images(&eulers).min()?;
    let product = Sign::product(data.spheres.iter().map(|s| s.sign));
    let spheres = best
        .into_iter()
        .enumerate()
        .map(|(i, e)| Sphere { euler: e, sign: if i == 0 { product } else { Sign::Plus } })
        .collect();
    Some(SingularSetData { spheres, ..data.clone() })
}

fn dihedral_images<T: Clone>(seq: &[T]) -> impl Iterator<Item = Vec<T>> + '_ {
    let t = seq.len();
    (0..t).flat_map(move |k| {
        let forward: Vec<T> = (0..t).map(|i| seq[(i + k) % t].clone()).collect();
        let backward: Vec<T> = (0..t).map(|i| seq[(k + t - i) % t].clone()).collect();
        [forward, backward]
    })
}

fn is_lex_min_dihedral(seq: &[i64]) -> bool {
    let t = seq.len();
    for k in 0..t {
        for reverse in [false, true] {
            let image = (0..t).map(|i| if reverse { seq[(k + t - i) % t] } else { seq[(i + k) % t] });
            for (a, b) in image.zip(seq.iter()) {
                match a.cmp(b) {
                    std::cmp::Ordering::Less => return false,
                    std::cmp::Ordering::Greater => break,
                    std::cmp::Ordering::Equal => {}
                }
            }
        }
    }
    true
}

/// Streams the Valid canonical configurations with `t = b2 + 2` and
/// `|e_i| ≤ euler_bound`, in lexicographic order of the Euler sequence,
/// the all-`+1` sign pattern before the one with a `-1`.
pub struct SingularDataIter {
    p: u64,
    bound: i64,
    current: Option<Vec<i64>>,
    fixed_first: Option<i64>,
    pending: Vec<SingularSetData>,
}

impl SingularDataIter {
    pub fn new(b2: usize, euler_bound: u64, p: u64) -> Self {
        Self::build(b2, euler_bound, p, None)
    }

    /// Only sequences with `e_0 = first`; the classes for different `first`
    /// partition the full enumeration.
    pub fn with_first(b2: usize, euler_bound: u64, p: u64, first: i64) -> Self {
        Self::build(b2, euler_bound, p, Some(first))
    }

    fn build(b2: usize, euler_bound: u64, p: u64, fixed_first: Option<i64>) -> Self {
        let bound = euler_bound.min(i64::MAX as u64 / 2) as i64;
        let t = b2 + 2;
        let mut start = vec![-bound; t];
        let mut current = Some(start.clone());
        if let Some(f) = fixed_first {
            if f.abs() > bound || b2 == 0 {
                current = None;
            } else {
                start[0] = f;
                current = Some(start);
            }
        } else if b2 == 0 {
            current = None;
        }
        SingularDataIter { p, bound, current, fixed_first, pending: Vec::new() }
    }

    fn advance(&mut self) {
        let Some(cur) = self.current.as_mut() else { return };
        let lowest = if self.fixed_first.is_some() { 1 } else { 0 };
        for k in (lowest..cur.len()).rev() {
            if cur[k] < self.bound {
                cur[k] += 1;
                return;
            }
            cur[k] = -self.bound;
        }
        self.current = None;
    }
}

impl Iterator for SingularDataIter {
    type Item = SingularSetData;

    fn next(&mut self) -> Option<SingularSetData> {
        loop {
            if let Some(d) = self.pending.pop() {
                return Some(d);
            }
            let eulers = self.current.clone()?;
            self.advance();
            if !is_lex_min_dihedral(&eulers) {
                continue;
            }
            for product in [Sign::Minus, Sign::Plus] {
                let spheres = eulers
                    .iter()
                    .enumerate()
                    .map(|(i, &e)| Sphere::new(e, if i == 0 { product } else { Sign::Plus }))
                    .collect();
                let data = SingularSetData::new(self.p, spheres);
                if has_loop_rank(&eulers, product) && validate(&data).is_valid() {
                    self.pending.push(data);
                }
            }
        }
    }
}

/// Cheap pre-filter: rank of the circular matrix in machine integers.
fn has_loop_rank(eulers: &[i64], product: Sign) -> bool {
    let t = eulers.len();
    let mut m = vec![vec![0i64; t]; t];
    for i in 0..t {
        m[i][i] = eulers[i];
        let j = (i + 1) % t;
        let s = if j == 0 { product.value() } else { 1 };
        m[i][j] = s;
        m[j][i] = s;
    }
    let rows: Vec<Vec<BigInt>> =
        m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    IntMatrix::from_rows(&rows).map(|mat| mat.rank() == t - 2).unwrap_or(false)
}

pub fn enumerate_singular_data(b2: usize, euler_bound: u64) -> Vec<SingularSetData> {
    SingularDataIter::new(b2, euler_bound, DEFAULT_PRIME).collect()
}

pub fn enumerate_singular_data_for_prime(b2: usize, euler_bound: u64, p: u64) -> Vec<SingularSetData> {
    SingularDataIter::new(b2, euler_bound, p).collect()
}

/// Reduces the cut form of every unimodular cut of a Valid configuration.
pub fn unimodular_cut_certificates(
    data: &SingularSetData,
) -> Result<Vec<(Cut, reduction::CongruenceCertificate)>, reduction::ReductionError> {
    let report = validate(data);
    report
        .unimodular_cuts()
        .map(|c| {
            let cut = cut_redundant(data, c.i, c.j).expect("tested cut");
            reduction::reduce_chain(&cut.form()).map(|cert| (cut, cert))
        })
        .collect()
}

/// Small Euler numbers as machine integers, for display and search code.
pub fn small_eulers(data: &SingularSetData) -> Option<Vec<i64>> {
    data.spheres.iter().map(|s| s.euler.to_i64()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(pairs: &[(i64, i64)]) -> SingularSetData {
        SingularSetData::from_pairs(3, pairs).unwrap()
    }

    fn form(rows: &[Vec<i64>]) -> SymmetricForm {
        SymmetricForm::from_rows(rows).unwrap()
    }

    #[test]
    fn circular_matrix_examples() {
        let tri = SingularSetData::cp2_triangle(3);
        assert_eq!(circular_matrix(&tri).unwrap(), form(&vec![vec![1, 1, 1]; 3]));

        let sq = SingularSetData::s2xs2_square(3);
        let expected = form(&[vec![0, 1, 0, 1], vec![1, 0, 1, 0], vec![0, 1, 0, 1], vec![1, 0, 1, 0]]);
        let m = circular_matrix(&sq).unwrap();
        assert_eq!(m, expected);
        assert_eq!(m.matrix().rank(), 2);

        let signed = data(&[(1, 1), (1, 1), (1, -1)]);
        let m = circular_matrix(&signed).unwrap();
        assert_eq!(m.entry(1, 2), &BigInt::from(-1));
        assert_eq!(m.entry(2, 1), &BigInt::from(-1));
        assert_eq!(m.entry(0, 1), &BigInt::one());

        assert_eq!(
            circular_matrix(&data(&[(1, 1), (1, 1)])),
            Err(PlumbingError::TooFewSpheres { t: 2 })
        );
    }

    #[test]
    fn cut_examples() {
        let tri = SingularSetData::cp2_triangle(3);
        let cut = cut_redundant(&tri, 1, 2).unwrap();
        assert!(cut.adjacent);
        assert_eq!(cut.form(), form(&[vec![1]]));

        let sq = SingularSetData::s2xs2_square(3);
        assert_eq!(cut_redundant(&sq, 2, 3).unwrap().form(), SymmetricForm::hyperbolic());

        let hexagon = data(&[(1, 1); 6]);
        let cut = cut_redundant(&hexagon, 0, 3).unwrap();
        assert!(!cut.adjacent);
        let lens: Vec<usize> = cut.pieces.iter().map(|p| p.spheres.len()).collect();
        assert_eq!(lens, vec![2, 2]);

        assert_eq!(cut_redundant(&tri, 1, 1), Err(PlumbingError::SameCutIndex(1)));
    }

    #[test]
    fn cut_pieces_have_positive_couplings() {
        let d = data(&[(0, -1), (2, 1), (1, -1), (-1, -1), (0, 1)]);
        let cut = cut_redundant(&d, 0, 1).unwrap();
        let piece = &cut.pieces[0];
        for k in 0..piece.spheres.len() - 1 {
            assert_eq!(piece.form.entry(k, k + 1), &BigInt::one());
        }
    }

    #[test]
    fn validate_examples() {
        let tri = validate(&SingularSetData::cp2_triangle(3));
        assert!(tri.is_valid());
        assert_eq!(tri.fixed_point_count, 3);
        assert!(tri.cuts_tested.iter().any(|c| (c.i, c.j) == (1, 2) && c.unimodular));

        let sq = validate(&SingularSetData::s2xs2_square(3));
        assert!(sq.is_valid());
        assert!(sq.cuts_tested.iter().filter(|c| c.adjacent).all(|c| c.unimodular));

        let bad = validate(&data(&[(2, 1), (2, 1), (2, 1)]));
        assert_eq!(bad.circular_rank, 3);
        assert!(matches!(bad.verdict, Verdict::Invalid(_)));

        let not_prime = SingularSetData { p: 4, ..SingularSetData::cp2_triangle(3) };
        assert!(!validate(&not_prime).is_valid());
    }

    #[test]
    fn exceptions_validate_as_exceptional() {
        for flag in [
            ExceptionFlag::PseudofreeP3B1,
            ExceptionFlag::PseudofreeP3Chern,
            ExceptionFlag::FixedPointFreeP2Hyperbolic,
        ] {
            let r = validate(&SingularSetData::exception(flag, Sign::Plus));
            assert_eq!(r.verdict, Verdict::Exceptional);
        }
    }

    #[test]
    fn boundary_orders() {
        assert_eq!(boundary_h1_order(&form(&[vec![1]])).unwrap(), BigInt::one());
        assert_eq!(boundary_h1_order(&form(&[vec![2]])).unwrap(), BigInt::from(2));
        assert_eq!(boundary_h1_order(&form(&[vec![2, 1], vec![1, 2]])).unwrap(), BigInt::from(3));
        assert_eq!(boundary_h1_order(&form(&[vec![0, 1], vec![1, 0]])).unwrap(), BigInt::one());
        assert!(boundary_h1_order(&form(&vec![vec![1, 1, 1]; 3])).is_err());
    }

    #[test]
    fn rotation_and_reflection_preserve_the_loop() {
        let d = data(&[(1, 1), (0, -1), (2, 1), (-1, 1), (3, -1)]);
        let perm_invariant = |x: &SingularSetData| {
            let m = circular_matrix(x).unwrap();
            (m.matrix().rank(), m.determinant())
        };
        for k in 0..5 {
            assert_eq!(perm_invariant(&d.rotate(k)), perm_invariant(&d));
        }
        assert_eq!(d.reflect().reflect(), d);
        assert_eq!(perm_invariant(&d.reflect()), perm_invariant(&d));
        // Reflection keeps each pole sign attached to the same pair of spheres.
        let r = d.reflect();
        let m = circular_matrix(&d).unwrap();
        let mr = circular_matrix(&r).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(mr.entry(i, j), m.entry(4 - i, 4 - j));
            }
        }
    }

    #[test]
    fn enumeration_contains_standard_models() {
        let one = enumerate_singular_data(1, 1);
        assert!(one.contains(&SingularSetData::cp2_triangle(DEFAULT_PRIME)));
        let two = enumerate_singular_data(2, 0);
        assert!(two.contains(&SingularSetData::s2xs2_square(DEFAULT_PRIME)));
        for d in one.iter().chain(&two) {
            assert!(validate(d).is_valid());
            assert_eq!(canonical_form(d).as_ref(), Some(d));
        }
    }

    #[test]
    fn enumeration_partitions_by_first_entry() {
        let all = enumerate_singular_data(2, 2);
        let mut parts: Vec<SingularSetData> =
            (-2..=2).flat_map(|f| SingularDataIter::with_first(2, 2, 3, f)).collect();
        let mut sorted = all.clone();
        let key = |d: &SingularSetData| format!("{:?}", d);
        sorted.sort_by_key(key);
        parts.sort_by_key(key);
        assert_eq!(sorted, parts);
    }

    #[test]
    fn canonical_form_merges_dihedral_images() {
        let d = data(&[(1, -1), (2, 1), (0, 1), (1, 1)]);
        let c = canonical_form(&d).unwrap();
        for k in 0..4 {
            assert_eq!(canonical_form(&d.rotate(k)).unwrap(), c);
        }
        assert_eq!(canonical_form(&d.reflect()).unwrap(), c);
    }
}
