//! Rank bookkeeping for the Borel spectral sequence of the pair `(M, Σ)`
//! under `G = Z_p × Z_p`.
//!
//! Group cohomology is generated by `α, β` in degree 2 and `μ` in degree 3
//! (exterior for odd `p`; for `p = 2`, `μ²` is a combination of `α, β`
//! monomials and so adds no rank). Every positive-degree group is an
//! elementary abelian `p`-group, so cells with `i > 0` are `Z_p^k` and only
//! `k` is recorded.
//!
//! The relative coefficient groups depend on the number of components `N`
//! of `Σ` and on a cokernel rank `L`:
//!
//! | `j` | `H^j(M, Σ)` |
//! |-----|-------------|
//! | 1 | `Z^{N-1}` |
//! | 2 | `Z^{N+L}` |
//! | 3 | `Z^{L+2} ⊕ T` (`T` has no `p`-torsion) |
//! | 4 | `Z` |

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::primes::is_prime;

/// Highest group-cohomology degree modelled.
pub const MAX_DEGREE: usize = 6;
/// Columns `i = 0..=5` and rows `j = 0..=4` of a page.
pub const PAGE_COLUMNS: usize = 6;
pub const PAGE_ROWS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BorelError {
    #[error("degree {0} is beyond the modelled range (at most {MAX_DEGREE})")]
    DegreeOutOfRange(usize),
    #[error("p = {0} is not prime")]
    NotPrime(u64),
    #[error("N must be at least 1")]
    NoComponents,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupCohomologyRank {
    pub degree: usize,
    pub free_rank: usize,
    pub torsion_rank: usize,
    pub generators: Vec<String>,
}

/// Exponents of `α^a β^b μ^c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Monomial {
    a: u32,
    b: u32,
    c: u32,
}

impl Monomial {
    const ONE: Monomial = Monomial { a: 0, b: 0, c: 0 };
    const ALPHA: Monomial = Monomial { a: 1, b: 0, c: 0 };
    const BETA: Monomial = Monomial { a: 0, b: 1, c: 0 };
    const MU: Monomial = Monomial { a: 0, b: 0, c: 1 };

    fn degree(self) -> usize {
        (2 * self.a + 2 * self.b + 3 * self.c) as usize
    }

    /// `None` when the product vanishes (`μ² = 0`, or is rewritten away).
    fn times(self, o: Monomial) -> Option<Monomial> {
        let c = self.c + o.c;
        (c <= 1).then_some(Monomial { a: self.a + o.a, b: self.b + o.b, c })
    }

    /// All basis monomials of a degree: `μ` first, then falling powers of
    /// `α`.
    fn basis(degree: usize) -> Vec<Monomial> {
        let mut out = Vec::new();
        for c in [1u32, 0] {
            let rest = degree as i64 - 3 * c as i64;
            if rest < 0 || rest % 2 != 0 {
                continue;
            }
            let k = (rest / 2) as u32;
            for a in (0..=k).rev() {
                out.push(Monomial { a, b: k - a, c });
            }
        }
        debug_assert!(out.iter().all(|m| m.degree() == degree));
        out
    }
}

fn power(name: &str, e: u32) -> String {
    const SUP: [&str; 10] = ["⁰", "¹", "²", "³", "⁴", "⁵", "⁶", "⁷", "⁸", "⁹"];
    match e {
        0 => String::new(),
        1 => name.to_string(),
        _ => format!("{name}{}", e.to_string().chars().map(|d| SUP[d as usize - '0' as usize]).collect::<String>()),
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = format!("{}{}{}", power("μ", self.c), power("α", self.a), power("β", self.b));
        f.write_str(if s.is_empty() { "1" } else { &s })
    }
}

/// Integral `H^n(Z_p × Z_p; Z)`: `Z` in degree 0, otherwise `Z_p^k` with
/// `k` the number of monomials of degree `n`.
pub fn group_cohomology_rank(p: u64, degree: usize) -> Result<GroupCohomologyRank, BorelError> {
    if !is_prime(p) {
        return Err(BorelError::NotPrime(p));
    }
    if degree > MAX_DEGREE {
        return Err(BorelError::DegreeOutOfRange(degree));
    }
    if degree == 0 {
        return Ok(GroupCohomologyRank {
            degree,
            free_rank: 1,
            torsion_rank: 0,
            generators: vec!["1".into()],
        });
    }
    let basis = Monomial::basis(degree);
    Ok(GroupCohomologyRank {
        degree,
        free_rank: 0,
        torsion_rank: basis.len(),
        generators: basis.iter().map(|m| m.to_string()).collect(),
    })
}

fn torsion_rank(degree: usize) -> usize {
    if degree == 0 {
        0
    } else {
        Monomial::basis(degree).len()
    }
}

/// `dim_{F_p} H^n(Z_p × Z_p; F_p)`, counted from the ring presentation:
/// two degree-1 exterior and two degree-2 polynomial generators for odd
/// `p`, two degree-1 polynomial generators for `p = 2`.
pub fn mod_p_dimension(p: u64, degree: usize) -> Result<usize, BorelError> {
    if !is_prime(p) {
        return Err(BorelError::NotPrime(p));
    }
    let polynomial_in_two = |d: usize| d + 1;
    if p == 2 {
        return Ok(polynomial_in_two(degree));
    }
    let mut total = 0;
    for (exterior_degree, multiplicity) in [(0usize, 1usize), (1, 2), (2, 1)] {
        if degree >= exterior_degree && (degree - exterior_degree).is_multiple_of(2) {
            total += multiplicity * polynomial_in_two((degree - exterior_degree) / 2);
        }
    }
    Ok(total)
}

/// Rank of `H^*(M; F_p)` as a free `H^*(G; F_p)`-module once the
/// spectral sequence of `M` collapses: the total Betti number `b₂ + 2`.
pub fn equivariant_free_rank(b2: usize) -> usize {
    b2 + 2
}

/// `constant + n·N + l·L`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LinearRank {
    pub constant: i64,
    pub n: i64,
    pub l: i64,
}

impl LinearRank {
    pub const fn new(constant: i64, n: i64, l: i64) -> Self {
        LinearRank { constant, n, l }
    }

    pub fn eval(&self, n: i64, l: i64) -> i64 {
        self.constant + self.n * n + self.l * l
    }

    pub fn scale(&self, k: i64) -> Self {
        LinearRank::new(self.constant * k, self.n * k, self.l * k)
    }

    pub fn plus(&self, o: &LinearRank) -> Self {
        LinearRank::new(self.constant + o.constant, self.n + o.n, self.l + o.l)
    }

    pub fn minus(&self, o: &LinearRank) -> Self {
        self.plus(&o.scale(-1))
    }
}

impl fmt::Display for LinearRank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        for (coeff, var) in [(self.n, "N"), (self.l, "L"), (self.constant, "")] {
            if coeff == 0 {
                continue;
            }
            let mag = coeff.abs();
            let body = if var.is_empty() || mag != 1 { format!("{mag}{var}") } else { var.to_string() };
            if out.is_empty() {
                out = if coeff < 0 { format!("−{body}") } else { body };
            } else {
                out.push_str(if coeff < 0 { "−" } else { "+" });
                out.push_str(&body);
            }
        }
        f.write_str(if out.is_empty() { "0" } else { &out })
    }
}

/// Integral rank of `H^j(M, Σ)` and whether the torsion summand `T` sits
/// there.
pub fn coefficient_rank(j: usize) -> (LinearRank, bool) {
    match j {
        1 => (LinearRank::new(-1, 1, 0), false),
        2 => (LinearRank::new(0, 1, 1), false),
        3 => (LinearRank::new(2, 0, 1), true),
        4 => (LinearRank::new(1, 0, 0), false),
        _ => (LinearRank::default(), false),
    }
}

/// A cell of the page in terms of `N` and `L`: free rank for `i = 0`,
/// `Z_p` rank otherwise.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolicCell {
    pub i: usize,
    pub j: usize,
    pub free: LinearRank,
    pub torsion: LinearRank,
    pub has_t: bool,
}

pub fn symbolic_cell(i: usize, j: usize) -> SymbolicCell {
    let (coeff, has_t) = coefficient_rank(j);
    if i == 0 {
        SymbolicCell { i, j, free: coeff, torsion: LinearRank::default(), has_t }
    } else {
        SymbolicCell {
            i,
            j,
            free: LinearRank::default(),
            torsion: coeff.scale(torsion_rank(i) as i64),
            has_t: false,
        }
    }
}

pub fn symbolic_page() -> Vec<SymbolicCell> {
    (0..PAGE_ROWS)
        .flat_map(|j| (0..PAGE_COLUMNS).map(move |i| symbolic_cell(i, j)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageParameters {
    pub n: u64,
    pub l: u64,
    pub b2: u64,
    pub p: u64,
    /// Whether `T` may be non-zero. It never has `p`-torsion, so it never
    /// adds to a rank.
    pub torsion_flag_t: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageCell {
    pub i: usize,
    pub j: usize,
    pub free_rank: u64,
    pub torsion_rank: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankPage {
    pub parameters: PageParameters,
    pub cells: Vec<PageCell>,
    pub column_labels: Vec<String>,
    pub notes: Vec<String>,
}

impl RankPage {
    pub fn cell(&self, i: usize, j: usize) -> Option<&PageCell> {
        self.cells.iter().find(|c| c.i == i && c.j == j)
    }
}

pub fn column_labels() -> Vec<String> {
    (0..PAGE_COLUMNS)
        .map(|i| match i {
            0 => "1".to_string(),
            1 => "—".to_string(),
            _ => Monomial::basis(i).iter().map(|m| m.to_string()).collect::<Vec<_>>().join(", "),
        })
        .collect()
}

/// `E₂^{i,j} = H^i(G; H^j(M, Σ))` evaluated at the given parameters.
pub fn e2_page(n: u64, l: u64, b2: u64, p: u64) -> Result<RankPage, BorelError> {
    if !is_prime(p) {
        return Err(BorelError::NotPrime(p));
    }
    if n == 0 {
        return Err(BorelError::NoComponents);
    }
    let torsion_flag_t = p != 2;
    let cells = symbolic_page()
        .into_iter()
        .map(|c| PageCell {
            i: c.i,
            j: c.j,
            free_rank: c.free.eval(n as i64, l as i64) as u64,
            torsion_rank: c.torsion.eval(n as i64, l as i64) as u64,
        })
        .collect();
    let mut notes = vec![
        "cell (2, 1) is computed from the coefficient ranks; the inequality never uses it".to_string(),
    ];
    notes.push(if torsion_flag_t {
        "T: possibly non-zero, 2T = 0, so it has p-rank 0".to_string()
    } else {
        "T = 0 for p = 2".to_string()
    });
    Ok(RankPage {
        parameters: PageParameters { n, l, b2, p, torsion_flag_t },
        cells,
        column_labels: column_labels(),
        notes,
    })
}

/// One expected entry of a reference table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TableEntry {
    pub i: usize,
    pub j: usize,
    pub free: bool,
    pub rank: LinearRank,
}

const fn entry(i: usize, j: usize, free: bool, constant: i64, n: i64, l: i64) -> TableEntry {
    TableEntry { i, j, free, rank: LinearRank::new(constant, n, l) }
}

/// The entries printed in the general page, in `N` and `L`.
pub const GENERAL_TABLE: [TableEntry; 11] = [
    entry(0, 4, true, 1, 0, 0),
    entry(1, 4, false, 0, 0, 0),
    entry(0, 3, true, 2, 0, 1),
    entry(1, 3, false, 0, 0, 0),
    entry(0, 2, true, 0, 1, 1),
    entry(1, 2, false, 0, 0, 0),
    entry(2, 2, false, 0, 2, 2),
    entry(0, 1, true, -1, 1, 0),
    entry(1, 1, false, 0, 0, 0),
    entry(3, 1, false, -1, 1, 0),
    entry(4, 1, false, -3, 3, 0),
];

/// The two-component page (`N = 2`, `L = 0`): rows `j = 1..=4`, columns
/// `i = 0..=5`; column 0 is a free rank.
pub const TWO_COMPONENT_TABLE: [[u64; 6]; 4] = [
    [1, 0, 2, 1, 3, 2],
    [2, 0, 4, 2, 6, 4],
    [2, 0, 4, 2, 6, 4],
    [1, 0, 2, 1, 3, 2],
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableCheck {
    pub table: String,
    pub i: usize,
    pub j: usize,
    pub n: u64,
    pub l: u64,
    pub expected: String,
    pub observed: u64,
    pub holds: bool,
}

/// Compares [`e2_page`] with both reference tables: the general one at
/// `N ∈ {1, 2, 3}`, `L ∈ {0, 1, 2}`, and the two-component one.
pub fn table_checks(p: u64) -> Result<Vec<TableCheck>, BorelError> {
    let mut out = Vec::new();
    for n in 1..=3u64 {
        for l in 0..=2u64 {
            let page = e2_page(n, l, n + l, p)?;
            for e in GENERAL_TABLE {
                let cell = page.cell(e.i, e.j).expect("cell in range");
                let observed = if e.free { cell.free_rank } else { cell.torsion_rank };
                let expected = e.rank.eval(n as i64, l as i64);
                out.push(TableCheck {
                    table: "general".into(),
                    i: e.i,
                    j: e.j,
                    n,
                    l,
                    expected: format!("{} = {expected}", e.rank),
                    observed,
                    holds: observed as i64 == expected,
                });
            }
        }
    }
    let page = e2_page(2, 0, 2, p)?;
    for (row, values) in TWO_COMPONENT_TABLE.iter().enumerate() {
        let j = 4 - row;
        for (i, &expected) in values.iter().enumerate() {
            let cell = page.cell(i, j).expect("cell in range");
            let observed = if i == 0 { cell.free_rank } else { cell.torsion_rank };
            out.push(TableCheck {
                table: "two-component".into(),
                i,
                j,
                n: 2,
                l: 0,
                expected: expected.to_string(),
                observed,
                holds: observed == expected,
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerStep {
    pub label: String,
    pub assertion: String,
    pub observed: String,
    pub holds: bool,
}

impl LedgerStep {
    fn new(label: &str, assertion: impl Into<String>, observed: impl Into<String>, holds: bool) -> Self {
        LedgerStep {
            label: label.to_string(),
            assertion: assertion.into(),
            observed: observed.into(),
            holds,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LVanishingCertificate {
    pub n: u64,
    /// `rk E^{0,3} + rk E^{4,1} ≥ rk E^{2,2} + rk E^{3,1}` in `N`, `L`.
    pub inequality: String,
    pub instantiated: String,
    pub simplified: String,
    pub l_max: i64,
    pub steps: Vec<LedgerStep>,
    pub l_vanishes: bool,
}

/// Replays the rank count that forces `L = 0`.
///
/// `E^{2,2}` and `E^{3,1}` sit in total degree 4 with `i > 0`, so every
/// class there must die. Their only possible killers are differentials
/// out of `E^{0,3}` (whose integral rank may be treated as a `p`-rank, as
/// the edge cokernel has exponent `p`) and `d₂` from `E^{2,2}` into
/// `E^{4,1}`.
pub fn verify_l_vanishes(n: u64) -> Result<LVanishingCertificate, BorelError> {
    if n == 0 {
        return Err(BorelError::NoComponents);
    }
    let killers = symbolic_cell(0, 3).free.plus(&symbolic_cell(4, 1).torsion);
    let victims = symbolic_cell(2, 2).torsion.plus(&symbolic_cell(3, 1).torsion);
    let diff = killers.minus(&victims);
    let ni = n as i64;

    let mut steps = vec![
        LedgerStep::new(
            "sources",
            "rk E^{0,3} = L+2 and rk E^{4,1} = 3N−3",
            format!("{}, {}", symbolic_cell(0, 3).free, symbolic_cell(4, 1).torsion),
            symbolic_cell(0, 3).free == LinearRank::new(2, 0, 1)
                && symbolic_cell(4, 1).torsion == LinearRank::new(-3, 3, 0),
        ),
        LedgerStep::new(
            "targets",
            "rk E^{2,2} = 2N+2L and rk E^{3,1} = N−1",
            format!("{}, {}", symbolic_cell(2, 2).torsion, symbolic_cell(3, 1).torsion),
            symbolic_cell(2, 2).torsion == LinearRank::new(0, 2, 2)
                && symbolic_cell(3, 1).torsion == LinearRank::new(-1, 1, 0),
        ),
        LedgerStep::new(
            "mortality",
            "E^{3,1} dies only by receiving from E^{0,3}; E^{2,2} by receiving from E^{0,3} or mapping into E^{4,1}",
            "recorded",
            true,
        ),
        LedgerStep::new(
            "difference",
            "(killers) − (targets) has no N term",
            diff.to_string(),
            diff.n == 0,
        ),
    ];
    // diff = c + l·L ≥ 0 with l < 0 bounds L above by c / (−l).
    let l_max = if diff.l < 0 { diff.constant.div_euclid(-diff.l) } else { i64::MAX };
    steps.push(LedgerStep::new("bound", "L ≤ 0", format!("L ≤ {l_max}"), l_max <= 0));
    for l in 0..=1i64 {
        let lhs = killers.eval(ni, l);
        let rhs = victims.eval(ni, l);
        let page = e2_page(n, l as u64, n, 3)?;
        let from_page = page.cell(0, 3).unwrap().free_rank + page.cell(4, 1).unwrap().torsion_rank;
        let from_page_rhs = page.cell(2, 2).unwrap().torsion_rank + page.cell(3, 1).unwrap().torsion_rank;
        let consistent = from_page as i64 == lhs && from_page_rhs as i64 == rhs;
        steps.push(LedgerStep::new(
            &format!("page at L = {l}"),
            if l == 0 { "inequality holds" } else { "inequality fails" },
            format!("{lhs} ≥ {rhs}"),
            consistent && ((lhs >= rhs) == (l == 0)),
        ));
    }
    let l_vanishes = steps.iter().all(|s| s.holds);
    Ok(LVanishingCertificate {
        n,
        inequality: format!("{} ≥ {}", killers, victims),
        instantiated: format!(
            "(2+L) + ({}) ≥ (2·{n}+2L) + ({})",
            3 * ni - 3,
            ni - 1
        ),
        simplified: format!("{} ≥ 0", diff),
        l_max,
        steps,
        l_vanishes,
    })
}

/// Coefficient generators at `N = 2`, `L = 0`: `a` spans `H¹`, `b, c`
/// span `H²`, `e, f` span `H³` and `g` spans `H⁴`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Gen {
    A,
    B,
    C,
    E,
    F,
    G,
}

impl Gen {
    fn row(self) -> usize {
        match self {
            Gen::A => 1,
            Gen::B | Gen::C => 2,
            Gen::E | Gen::F => 3,
            Gen::G => 4,
        }
    }

    fn all_in_row(j: usize) -> Vec<Gen> {
        [Gen::A, Gen::B, Gen::C, Gen::E, Gen::F, Gen::G].into_iter().filter(|g| g.row() == j).collect()
    }
}

type Element = BTreeMap<(Monomial, Gen), i64>;

fn term(m: Monomial, g: Gen, k: i64) -> Element {
    let mut e = Element::new();
    e.insert((m, g), k);
    e
}

fn add(mut x: Element, y: &Element) -> Element {
    for (k, v) in y {
        *x.entry(*k).or_insert(0) += v;
    }
    x.retain(|_, v| *v != 0);
    x
}

fn times(m: Monomial, x: &Element) -> Element {
    let mut out = Element::new();
    for ((n, g), v) in x {
        if let Some(prod) = m.times(*n) {
            *out.entry((prod, *g)).or_insert(0) += v;
        }
    }
    out.retain(|_, v| *v != 0);
    out
}

/// `d₂` on coefficient generators, extended `H*(G)`-linearly.
fn d2_generator(g: Gen) -> Element {
    match g {
        Gen::B => term(Monomial::ALPHA, Gen::A, 1),
        Gen::C => term(Monomial::BETA, Gen::A, 1),
        Gen::E => add(term(Monomial::BETA, Gen::B, 1), &term(Monomial::ALPHA, Gen::C, -1)),
        _ => Element::new(),
    }
}

fn d2(x: &Element) -> Element {
    x.iter().fold(Element::new(), |acc, ((m, g), v)| {
        let image: Element = times(*m, &d2_generator(*g)).into_iter().map(|(k, c)| (k, c * v)).collect();
        add(acc, &image)
    })
}

fn cell_basis(i: usize, j: usize) -> Vec<(Monomial, Gen)> {
    let monomials = if i == 0 { vec![Monomial::ONE] } else { Monomial::basis(i) };
    monomials
        .into_iter()
        .flat_map(|m| Gen::all_in_row(j).into_iter().map(move |g| (m, g)))
        .collect()
}

fn basis_element(k: (Monomial, Gen)) -> Element {
    term(k.0, k.1, 1)
}

/// Rank over `F_p` of a set of vectors.
fn rank_mod_p(vectors: &[Element], p: u64) -> usize {
    let keys: Vec<(Monomial, Gen)> = {
        let mut k: Vec<_> = vectors.iter().flat_map(|v| v.keys().copied()).collect();
        k.sort();
        k.dedup();
        k
    };
    let p = p as i64;
    let mut rows: Vec<Vec<i64>> = vectors
        .iter()
        .map(|v| keys.iter().map(|k| v.get(k).copied().unwrap_or(0).rem_euclid(p)).collect())
        .collect();
    let mut rank = 0;
    for col in 0..keys.len() {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else { continue };
        rows.swap(rank, pivot);
        let inv = mod_inverse(rows[rank][col], p);
        for c in 0..keys.len() {
            rows[rank][c] = rows[rank][c] * inv % p;
        }
        for r in 0..rows.len() {
            if r != rank && rows[r][col] != 0 {
                let f = rows[r][col];
                for c in 0..keys.len() {
                    rows[r][c] = (rows[r][c] - f * rows[rank][c]).rem_euclid(p);
                }
            }
        }
        rank += 1;
    }
    rank
}

fn mod_inverse(a: i64, p: i64) -> i64 {
    // Fermat: a^(p-2) mod p.
    let (mut base, mut exp, mut acc) = (a.rem_euclid(p), p - 2, 1i64);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

/// Rank of `d₂` out of cell `(i, j)` over `F_p`.
fn d2_rank(i: usize, j: usize, p: u64) -> usize {
    let images: Vec<Element> = cell_basis(i, j).into_iter().map(|k| d2(&basis_element(k))).collect();
    rank_mod_p(&images, p)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContradictionCertificate {
    pub p: u64,
    pub steps: Vec<LedgerStep>,
    pub contradiction: bool,
}

/// Replays, rank by rank over `F_p`, why two components are impossible.
pub fn check_table2_contradiction() -> ContradictionCertificate {
    check_table2_contradiction_at(3).expect("3 is prime")
}

pub fn check_table2_contradiction_at(p: u64) -> Result<ContradictionCertificate, BorelError> {
    let page = e2_page(2, 0, 2, p)?;
    let torsion = |i: usize, j: usize| page.cell(i, j).map(|c| c.torsion_rank).unwrap_or(0) as usize;
    let dim = |i: usize, j: usize| cell_basis(i, j).len();
    let mut steps = Vec::new();

    steps.push(LedgerStep::new(
        "page",
        "at N = 2, L = 0: rk E^{2,2} = 4 and rk E^{3,1} = 1",
        format!("{}, {}", torsion(2, 2), torsion(3, 1)),
        torsion(2, 2) == 4 && torsion(3, 1) == 1,
    ));
    let model_matches = (2..=5).all(|i| (1..=4).all(|j| dim(i, j) == torsion(i, j)));
    steps.push(LedgerStep::new(
        "model",
        "generators a; b, c; e, f; g span the page cells with i > 0",
        if model_matches { "dimensions agree" } else { "dimensions differ" },
        model_matches,
    ));
    let n = 2i64;
    steps.push(LedgerStep::new(
        "component bound",
        "N = 2 satisfies N ≥ 2(N − 2)",
        format!("{n} ≥ {}", 2 * (n - 2)),
        n >= 2 * (n - 2),
    ));

    // Row j = 1 dies except μa.
    let r02 = d2_rank(0, 2, p);
    let r22 = d2_rank(2, 2, p);
    let r32 = d2_rank(3, 2, p);
    let survivors_row1 = (torsion(2, 1) - r02) + (torsion(4, 1) - r22) + (torsion(5, 1) - r32);
    steps.push(LedgerStep::new(
        "row j = 1",
        "d₂(b) = αa, d₂(c) = βa kill E^{2,1}, E^{4,1}, E^{5,1}",
        format!("ranks {r02}, {r22}, {r32}; {survivors_row1} classes left there"),
        r02 == torsion(2, 1) && r22 == torsion(4, 1) && r32 == torsion(5, 1),
    ));
    steps.push(LedgerStep::new(
        "E₃^{3,1}",
        "⟨μa⟩ survives to E₃",
        format!("rank {}", torsion(3, 1)),
        torsion(3, 1) == 1 && dim(1, 2) == 0,
    ));

    // Kernel of d₂ on E^{2,2} is spanned by βb − αc.
    let kernel22 = dim(2, 2) - r22;
    let beta_b_minus_alpha_c =
        add(term(Monomial::BETA, Gen::B, 1), &term(Monomial::ALPHA, Gen::C, -1));
    steps.push(LedgerStep::new(
        "ker d₂^{2,2}",
        "rank 1, spanned by βb − αc",
        format!("rank {kernel22}"),
        kernel22 == 1 && d2(&beta_b_minus_alpha_c).is_empty(),
    ));
    let e = term(Monomial::ONE, Gen::E, 1);
    steps.push(LedgerStep::new(
        "d₂(e)",
        "d₂(e) = βb − αc and d₂d₂(e) = 0",
        format!("d₂ has rank {} on E^{{0,3}}", d2_rank(0, 3, p)),
        d2(&e) == beta_b_minus_alpha_c && d2(&d2(&e)).is_empty() && d2_rank(0, 3, p) == 1,
    ));
    steps.push(LedgerStep::new(
        "d₃(f)",
        "μa must die; f, independent of e, carries d₃(f) = μa",
        "E^{0,3} has rank 2 with d₂(f) = 0",
        dim(0, 3) == 2 && d2(&term(Monomial::ONE, Gen::F, 1)).is_empty(),
    ));

    // μαa and μβa are already boundaries, so d₃(αf) = d₃(βf) = 0.
    let image32: Vec<Element> =
        cell_basis(3, 2).into_iter().map(|k| d2(&basis_element(k))).collect();
    let mu_alpha = Monomial::MU.times(Monomial::ALPHA).unwrap();
    let mu_beta = Monomial::MU.times(Monomial::BETA).unwrap();
    let mut with_targets = image32.clone();
    with_targets.push(term(mu_alpha, Gen::A, 1));
    with_targets.push(term(mu_beta, Gen::A, 1));
    let absorbed = rank_mod_p(&with_targets, p) == rank_mod_p(&image32, p);
    steps.push(LedgerStep::new(
        "d₃(αf), d₃(βf)",
        "μαa and μβa lie in the image of d₂^{3,2}, so both vanish",
        if absorbed { "contained" } else { "not contained" },
        absorbed,
    ));

    let r23 = d2_rank(2, 3, p);
    let kernel23 = dim(2, 3) - r23;
    steps.push(LedgerStep::new(
        "ker d₂^{2,3}",
        "rank 2 (αf and βf)",
        format!("rank {kernel23}"),
        kernel23 == 2,
    ));
    steps.push(LedgerStep::new(
        "d₃^{2,3}",
        "d₃ vanishes on ker d₂^{2,3}",
        if absorbed { "zero" } else { "non-zero" },
        absorbed,
    ));
    let incoming_bound = dim(0, 4);
    steps.push(LedgerStep::new(
        "d₂^{0,4}",
        "rank ≤ 1 (its source has rank 1)",
        format!("source rank {incoming_bound}"),
        incoming_bound <= 1,
    ));
    let survivors = kernel23 as i64 - incoming_bound as i64;
    let contradiction = survivors >= 1 && steps.iter().all(|s| s.holds);
    steps.push(LedgerStep::new(
        "E∞^{2,3}",
        "rank ≥ 1, yet every class with i > 0 must die: contradiction, so N = 1",
        format!("rank ≥ {survivors}"),
        contradiction,
    ));
    Ok(ContradictionCertificate { p, steps, contradiction })
}
