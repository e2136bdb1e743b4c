//! Splitting unimodular forms into `(+1)`, `(-1)` and hyperbolic blocks.
//!
//! [`reduce_chain`] handles the chain (linear plumbing) shape directly by
//! peeling off entries with `|e_i| ≤ 1`. [`brute_force_split`] is an
//! independent search over short lattice vectors and serves both as an
//! oracle and as the fallback for shapes the chain reducer does not cover.
//!
//! Certificates are canonical: blocks are listed `PlusOne`, then `MinusOne`,
//! then `Hyperbolic`, and a certificate never mixes odd and hyperbolic
//! blocks, so its block multiset is a function of rank, signature and parity.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forms::{self, FormInvariants, Parity, SymmetricForm, UnimodularMatrix};
use crate::matrix::IntMatrix;

/// Largest rank the brute-force search accepts by default.
pub const DEFAULT_RANK_LIMIT: usize = 6;
/// First coordinate bound tried by [`split_with_default_bounds`].
pub const DEFAULT_BOUND: u32 = 3;
/// Last coordinate bound tried before giving up.
pub const MAX_BOUND: u32 = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Block {
    PlusOne,
    MinusOne,
    Hyperbolic,
}

impl Block {
    pub fn size(self) -> usize {
        match self {
            Block::PlusOne | Block::MinusOne => 1,
            Block::Hyperbolic => 2,
        }
    }

    pub fn form(self) -> SymmetricForm {
        match self {
            Block::PlusOne => SymmetricForm::diagonal(&[1]).unwrap(),
            Block::MinusOne => SymmetricForm::diagonal(&[-1]).unwrap(),
            Block::Hyperbolic => SymmetricForm::hyperbolic(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockCounts {
    pub plus: usize,
    pub minus: usize,
    pub hyperbolic: usize,
}

impl BlockCounts {
    pub fn of(blocks: &[Block]) -> Self {
        let mut c = BlockCounts::default();
        for b in blocks {
            match b {
                Block::PlusOne => c.plus += 1,
                Block::MinusOne => c.minus += 1,
                Block::Hyperbolic => c.hyperbolic += 1,
            }
        }
        c
    }

    /// The block multiset a unimodular form with these invariants must split
    /// into, if it splits at all.
    pub fn from_invariants(inv: &FormInvariants) -> Option<Self> {
        let rank = inv.rank as i64;
        let sig = inv.signature;
        match inv.parity {
            Parity::Odd => Some(BlockCounts {
                plus: ((rank + sig) / 2) as usize,
                minus: ((rank - sig) / 2) as usize,
                hyperbolic: 0,
            }),
            Parity::Even if sig == 0 => {
                Some(BlockCounts { plus: 0, minus: 0, hyperbolic: (rank / 2) as usize })
            }
            Parity::Even => None,
        }
    }

    /// Trades each hyperbolic block for `(+1) ⊕ (−1)` when odd blocks are
    /// present, matching the canonical form of certificates.
    pub fn canonical(self) -> Self {
        if self.plus + self.minus > 0 {
            BlockCounts {
                plus: self.plus + self.hyperbolic,
                minus: self.minus + self.hyperbolic,
                hyperbolic: 0,
            }
        } else {
            self
        }
    }

    pub fn rank(&self) -> usize {
        self.plus + self.minus + 2 * self.hyperbolic
    }

    pub fn signature(&self) -> i64 {
        self.plus as i64 - self.minus as i64
    }
}

/// `transform(source, base_change)` equals the block-diagonal assembly of
/// `blocks`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CongruenceCertificate {
    pub source: SymmetricForm,
    pub base_change: UnimodularMatrix,
    pub blocks: Vec<Block>,
}

impl CongruenceCertificate {
    pub fn block_form(&self) -> SymmetricForm {
        let forms: Vec<SymmetricForm> = self.blocks.iter().map(|b| b.form()).collect();
        forms::block_sum(&forms).expect("certificate with no blocks")
    }

    /// Re-multiplies `Uᵀ A U` and compares it entry by entry with the block
    /// assembly. Also re-checks `|det U| = 1`.
    pub fn verify(&self) -> bool {
        if self.blocks.is_empty() || !self.base_change.determinant().abs().is_one() {
            return false;
        }
        match forms::transform(&self.source, &self.base_change) {
            Ok(t) => t == self.block_form(),
            Err(_) => false,
        }
    }

    pub fn counts(&self) -> BlockCounts {
        BlockCounts::of(&self.blocks)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("form is not unimodular (determinant {det})")]
    NotUnimodular { det: BigInt },
    #[error("form is not a chain: {0}")]
    NotChainShape(String),
    #[error("rank {rank} exceeds the brute-force limit {limit}")]
    RankTooLarge { rank: usize, limit: usize },
    #[error("no splitting vector with coordinates in [-{bound}, {bound}]")]
    SearchExhausted { bound: u32 },
}

/// True for tridiagonal forms whose couplings are all in `{-1, 0, 1}`: one
/// chain, or an orthogonal sum of consecutive chains.
pub fn is_chain_shape(a: &SymmetricForm) -> bool {
    chain_shape_violation(a).is_none()
}

fn chain_shape_violation(a: &SymmetricForm) -> Option<String> {
    let n = a.dim();
    for i in 0..n {
        for j in i + 1..n {
            let x = a.entry(i, j);
            if j == i + 1 {
                if x.abs() > BigInt::one() {
                    return Some(format!("coupling ({i}, {j}) is {x}"));
                }
            } else if !x.is_zero() {
                return Some(format!("entry ({i}, {j}) is off the tridiagonal band"));
            }
        }
    }
    None
}

fn require_unimodular(a: &SymmetricForm) -> Result<(), ReductionError> {
    let det = a.determinant();
    if det.abs().is_one() {
        Ok(())
    } else {
        Err(ReductionError::NotUnimodular { det })
    }
}

/// Reduces a unimodular chain form.
///
/// Repeatedly takes the first remaining index whose diagonal entry has
/// absolute value at most one: a `±1` entry is split off as a rank-one
/// block, a `0` entry is paired with its coupled neighbour. Either step
/// leaves a chain behind. Should no such entry exist, the remainder is
/// handed to the brute-force search.
pub fn reduce_chain(a: &SymmetricForm) -> Result<CongruenceCertificate, ReductionError> {
    require_unimodular(a)?;
    if let Some(why) = chain_shape_violation(a) {
        return Err(ReductionError::NotChainShape(why));
    }
    let mut ws = Workspace::new(a);
    while !ws.active.is_empty() {
        let pivot = ws.active.iter().position(|&i| ws.gram[i][i].abs() <= BigInt::one());
        let Some(pos) = pivot else {
            let remaining = ws.active.len();
            if remaining > DEFAULT_RANK_LIMIT {
                return Err(ReductionError::RankTooLarge {
                    rank: remaining,
                    limit: DEFAULT_RANK_LIMIT,
                });
            }
            ws = search_with_doubling(ws)?;
            break;
        };
        let i = ws.active[pos];
        if ws.gram[i][i].is_zero() {
            let left = pos.checked_sub(1).map(|p| ws.active[p]);
            let right = ws.active.get(pos + 1).copied();
            let partner = [left, right]
                .into_iter()
                .flatten()
                .find(|&j| !ws.gram[i][j].is_zero())
                .expect("isolated null vector in a unimodular form");
            ws.split_isotropic_pair(i, partner);
        } else {
            ws.split_unit(i);
        }
    }
    Ok(ws.into_certificate())
}

/// Brute-force splitting with coordinates bounded by `bound`, for forms of
/// rank at most [`DEFAULT_RANK_LIMIT`].
pub fn brute_force_split(
    a: &SymmetricForm,
    bound: u32,
) -> Result<CongruenceCertificate, ReductionError> {
    brute_force_split_with_limit(a, bound, DEFAULT_RANK_LIMIT)
}

pub fn brute_force_split_with_limit(
    a: &SymmetricForm,
    bound: u32,
    rank_limit: usize,
) -> Result<CongruenceCertificate, ReductionError> {
    require_unimodular(a)?;
    if a.dim() > rank_limit {
        return Err(ReductionError::RankTooLarge { rank: a.dim(), limit: rank_limit });
    }
    let mut ws = Workspace::new(a);
    search_split(&mut ws, bound)?;
    Ok(ws.into_certificate())
}

/// Brute force with the bound doubling from [`DEFAULT_BOUND`] to
/// [`MAX_BOUND`].
pub fn split_with_default_bounds(a: &SymmetricForm) -> Result<CongruenceCertificate, ReductionError> {
    require_unimodular(a)?;
    if a.dim() > DEFAULT_RANK_LIMIT {
        return Err(ReductionError::RankTooLarge { rank: a.dim(), limit: DEFAULT_RANK_LIMIT });
    }
    Ok(search_with_doubling(Workspace::new(a))?.into_certificate())
}

/// Chain reduction when the shape allows it, brute force otherwise.
pub fn reduce(a: &SymmetricForm) -> Result<CongruenceCertificate, ReductionError> {
    match reduce_chain(a) {
        Err(ReductionError::NotChainShape(_)) => split_with_default_bounds(a),
        other => other,
    }
}

fn search_with_doubling(ws: Workspace) -> Result<Workspace, ReductionError> {
    let mut bound = DEFAULT_BOUND;
    loop {
        let mut attempt = ws.clone();
        match search_split(&mut attempt, bound) {
            Ok(()) => return Ok(attempt),
            Err(ReductionError::SearchExhausted { .. }) if bound < MAX_BOUND => {
                bound = (bound * 2).min(MAX_BOUND);
            }
            Err(e) => return Err(e),
        }
    }
}

/// Working basis: `cols[k]` is a vector in the original coordinates and
/// `gram[x][y] = cols[x] · cols[y]`. Indices in `active` are still to be
/// split, in chain order.
#[derive(Clone)]
struct Workspace {
    source: SymmetricForm,
    cols: Vec<Vec<BigInt>>,
    gram: Vec<Vec<BigInt>>,
    active: Vec<usize>,
    parts: Vec<(Block, Vec<usize>)>,
}

impl Workspace {
    fn new(a: &SymmetricForm) -> Self {
        let n = a.dim();
        let cols = (0..n)
            .map(|j| (0..n).map(|i| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
            .collect();
        let gram = (0..n).map(|i| (0..n).map(|j| a.entry(i, j).clone()).collect()).collect();
        Workspace { source: a.clone(), cols, gram, active: (0..n).collect(), parts: Vec::new() }
    }

    /// Basis vector `target += q * source`, as a congruence on `gram`.
    fn add_multiple(&mut self, target: usize, source: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        let n = self.cols.len();
        for k in 0..n {
            let v = &self.cols[source][k] * q;
            self.cols[target][k] += v;
        }
        for k in 0..n {
            let v = &self.gram[k][source] * q;
            self.gram[k][target] += v;
        }
        for k in 0..n {
            let v = &self.gram[source][k] * q;
            self.gram[target][k] += v;
        }
    }

    fn negate(&mut self, i: usize) {
        let n = self.cols.len();
        for k in 0..n {
            self.cols[i][k] = -&self.cols[i][k];
            if k != i {
                self.gram[i][k] = -&self.gram[i][k];
                self.gram[k][i] = -&self.gram[k][i];
            }
        }
    }

    fn retire(&mut self, block: Block, indices: Vec<usize>) {
        self.active.retain(|k| !indices.contains(k));
        self.parts.push((block, indices));
    }

    /// Splits off `i` with `i · i = ±1`, projecting every other active
    /// vector onto its orthogonal complement.
    fn split_unit(&mut self, i: usize) {
        let e = self.gram[i][i].clone();
        debug_assert!(e.abs().is_one());
        let others: Vec<usize> = self.active.iter().copied().filter(|&j| j != i).collect();
        for j in others {
            if !self.gram[j][i].is_zero() {
                let q = -(&e * &self.gram[j][i]);
                self.add_multiple(j, i, &q);
            }
        }
        let block = if e.is_positive() { Block::PlusOne } else { Block::MinusOne };
        self.retire(block, vec![i]);
    }

    /// Splits off the pair `(i, j)` where `i · i = 0` and `i · j = ±1`.
    /// An even `j · j` yields a hyperbolic block, an odd one `(+1) ⊕ (−1)`.
    fn split_isotropic_pair(&mut self, i: usize, j: usize) {
        debug_assert!(self.gram[i][i].is_zero());
        if self.gram[i][j].is_negative() {
            self.negate(j);
        }
        debug_assert!(self.gram[i][j].is_one());
        let ej = self.gram[j][j].clone();
        if ej.is_even() {
            let half: BigInt = &ej / 2;
            self.add_multiple(j, i, &-half);
            let others: Vec<usize> =
                self.active.iter().copied().filter(|&x| x != i && x != j).collect();
            for x in others {
                let along_i = self.gram[x][i].clone();
                let along_j = self.gram[x][j].clone();
                self.add_multiple(x, i, &-along_j);
                self.add_multiple(x, j, &-along_i);
            }
            self.retire(Block::Hyperbolic, vec![i.min(j), i.max(j)]);
        } else {
            let half: BigInt = (&ej - 1) / 2;
            self.add_multiple(j, i, &-half);
            self.split_unit(j);
            self.split_unit(i);
        }
    }

    fn active_gram(&self) -> Vec<Vec<BigInt>> {
        self.active
            .iter()
            .map(|&x| self.active.iter().map(|&y| self.gram[x][y].clone()).collect())
            .collect()
    }

    /// Replaces the active vectors by `active · u` (`u` in active
    /// coordinates) and recomputes their Gram entries from the source form.
    fn change_active_basis(&mut self, u: &IntMatrix) {
        let m = self.active.len();
        let n = self.cols.len();
        let new_cols: Vec<Vec<BigInt>> = (0..m)
            .map(|c| {
                let mut v = vec![BigInt::zero(); n];
                for r in 0..m {
                    let coeff = &u[(r, c)];
                    if coeff.is_zero() {
                        continue;
                    }
                    for k in 0..n {
                        v[k] += coeff * &self.cols[self.active[r]][k];
                    }
                }
                v
            })
            .collect();
        for (c, v) in new_cols.into_iter().enumerate() {
            self.cols[self.active[c]] = v;
        }
        let all: Vec<usize> = (0..n).collect();
        for &x in &self.active {
            for &y in &all {
                let g = self.source.pair(&self.cols[x], &self.cols[y]);
                self.gram[x][y] = g.clone();
                self.gram[y][x] = g;
            }
        }
    }

    /// Applies the fixed exchanges `(±1) ⊕ H ≅ (±1) ⊕ (+1) ⊕ (−1)` until no
    /// hyperbolic block sits next to an odd one, then orders the blocks.
    fn into_certificate(mut self) -> CongruenceCertificate {
        let mut parts: Vec<(Block, Vec<Vec<BigInt>>)> = self
            .parts
            .drain(..)
            .map(|(b, idx)| (b, idx.iter().map(|&k| self.cols[k].clone()).collect()))
            .collect();
        loop {
            let odd = parts.iter().position(|(b, _)| *b != Block::Hyperbolic);
            let hyp = parts.iter().position(|(b, _)| *b == Block::Hyperbolic);
            let (Some(o), Some(h)) = (odd, hyp) else { break };
            let (odd_block, e) = (parts[o].0, parts[o].1[0].clone());
            let (f1, f2) = (parts[h].1[0].clone(), parts[h].1[1].clone());
            let exchanged = exchange_odd_hyperbolic(odd_block, &e, &f1, &f2);
            let (first, second) = if o < h { (o, h) } else { (h, o) };
            parts.remove(second);
            parts.remove(first);
            parts.extend(exchanged.into_iter().map(|(b, v)| (b, vec![v])));
        }
        parts.sort_by_key(|a| a.0);

        let n = self.source.dim();
        let columns: Vec<Vec<BigInt>> = parts.iter().flat_map(|(_, vs)| vs.iter().cloned()).collect();
        let base_change = UnimodularMatrix::new(IntMatrix::from_columns(n, &columns))
            .expect("base change lost unimodularity");
        let cert = CongruenceCertificate {
            source: self.source,
            base_change,
            blocks: parts.into_iter().map(|(b, _)| b).collect(),
        };
        debug_assert!(cert.verify(), "unsound certificate");
        cert
    }
}

/// Local base change for `(s) ⊕ H` with basis `e, f1, f2`, `e·e = s = ±1`.
///
/// * `s = +1`: `e + f1`, `e - f2` have square `+1`; `e + f1 - f2` has `-1`.
/// * `s = -1`: `e + f1`, `e + f2` have square `-1`; `e + f1 + f2` has `+1`.
pub const ODD_HYPERBOLIC_EXCHANGE_PLUS: [[i64; 3]; 3] = [[1, 1, 1], [1, 0, 1], [0, -1, -1]];
pub const ODD_HYPERBOLIC_EXCHANGE_MINUS: [[i64; 3]; 3] = [[1, 1, 1], [1, 0, 1], [0, 1, 1]];

fn exchange_odd_hyperbolic(
    odd: Block,
    e: &[BigInt],
    f1: &[BigInt],
    f2: &[BigInt],
) -> Vec<(Block, Vec<BigInt>)> {
    let (matrix, blocks) = match odd {
        Block::PlusOne => (
            ODD_HYPERBOLIC_EXCHANGE_PLUS,
            [Block::PlusOne, Block::PlusOne, Block::MinusOne],
        ),
        Block::MinusOne => (
            ODD_HYPERBOLIC_EXCHANGE_MINUS,
            [Block::MinusOne, Block::MinusOne, Block::PlusOne],
        ),
        Block::Hyperbolic => unreachable!("exchange needs an odd block"),
    };
    let basis = [e, f1, f2];
    (0..3)
        .map(|c| {
            let v = (0..e.len())
                .map(|k| {
                    (0..3).fold(BigInt::zero(), |acc, r| acc + &basis[r][k] * matrix[r][c])
                })
                .collect();
            (blocks[c], v)
        })
        .collect()
}

/// Greedy search: split off any vector of square `±1`, otherwise any
/// primitive isotropic vector together with a dual partner.
fn search_split(ws: &mut Workspace, bound: u32) -> Result<(), ReductionError> {
    while !ws.active.is_empty() {
        let gram = ws.active_gram();
        let qf = QuadraticEval::new(&gram);
        let m = gram.len();

        // x·x ≡ Σ g_ii x_i² (mod 2): an even lattice has no unit vectors.
        let even = (0..m).all(|i| gram[i][i].is_even());
        let unit = if even { None } else { shell_vectors(m, bound).find(|v| qf.norm(v).abs().is_one()) };
        if let Some(v) = unit {
            let u = IntMatrix::from_columns(m, &[to_big(&v)])
                .extend_to_unimodular()
                .expect("unit vector is primitive");
            ws.change_active_basis(&u);
            ws.split_unit(ws.active[0]);
            continue;
        }

        let isotropic = shell_vectors(m, bound).find(|v| is_primitive(v) && qf.norm(v).is_zero());
        if let Some(v) = isotropic {
            let v = to_big(&v);
            let w = dual_partner(&gram, &v);
            let u = IntMatrix::from_columns(m, &[v, w])
                .extend_to_unimodular()
                .expect("unimodular pair spans a saturated sublattice");
            ws.change_active_basis(&u);
            ws.split_isotropic_pair(ws.active[0], ws.active[1]);
            continue;
        }

        return Err(ReductionError::SearchExhausted { bound });
    }
    Ok(())
}

fn to_big(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

fn is_primitive(v: &[i64]) -> bool {
    v.iter().fold(0i64, |g, &x| g.gcd(&x)) == 1
}

/// Some `w` with `v · w = 1`; exists because the form is unimodular and `v`
/// primitive.
fn dual_partner(gram: &[Vec<BigInt>], v: &[BigInt]) -> Vec<BigInt> {
    let m = v.len();
    let gv: Vec<BigInt> = (0..m)
        .map(|i| (0..m).fold(BigInt::zero(), |acc, j| acc + &gram[i][j] * &v[j]))
        .collect();
    let mut g = BigInt::zero();
    let mut coeffs = vec![BigInt::zero(); m];
    for k in 0..m {
        if gv[k].is_zero() {
            continue;
        }
        if g.is_zero() {
            g = gv[k].clone();
            coeffs[k] = BigInt::one();
            continue;
        }
        let egcd = g.extended_gcd(&gv[k]);
        for c in coeffs.iter_mut() {
            *c *= &egcd.x;
        }
        coeffs[k] = egcd.y;
        g = egcd.gcd;
    }
    debug_assert!(g.abs().is_one());
    if g.is_negative() {
        coeffs.iter_mut().for_each(|c| *c = -&*c);
    }
    coeffs
}

/// Evaluates `vᵀ G v`, in `i128` when the Gram matrix is small enough.
struct QuadraticEval<'a> {
    big: &'a [Vec<BigInt>],
    small: Option<Vec<Vec<i128>>>,
}

impl<'a> QuadraticEval<'a> {
    fn new(gram: &'a [Vec<BigInt>]) -> Self {
        let small = gram
            .iter()
            .map(|r| r.iter().map(|x| x.to_i64().map(i128::from)).collect::<Option<Vec<_>>>())
            .collect::<Option<Vec<_>>>();
        QuadraticEval { big: gram, small }
    }

    fn norm(&self, v: &[i64]) -> BigInt {
        if let Some(g) = &self.small {
            if let Some(x) = norm_i128(g, v) {
                return BigInt::from(x);
            }
        }
        let m = v.len();
        let mut acc = BigInt::zero();
        for i in 0..m {
            for j in 0..m {
                acc += &self.big[i][j] * v[i] * v[j];
            }
        }
        acc
    }
}

fn norm_i128(g: &[Vec<i128>], v: &[i64]) -> Option<i128> {
    let mut acc: i128 = 0;
    for (i, row) in g.iter().enumerate() {
        if v[i] == 0 {
            continue;
        }
        for (j, &gij) in row.iter().enumerate() {
            if v[j] == 0 {
                continue;
            }
            let t = gij.checked_mul(v[i] as i128 * v[j] as i128)?;
            acc = acc.checked_add(t)?;
        }
    }
    Some(acc)
}

/// Nonzero vectors in `[-bound, bound]^m`, shell by shell in the sup norm,
/// one per `±` pair (first nonzero coordinate positive), lexicographic
/// within a shell.
fn shell_vectors(m: usize, bound: u32) -> impl Iterator<Item = Vec<i64>> {
    (1..=bound as i64).flat_map(move |r| {
        let total = (2 * r + 1).pow(m as u32);
        (0..total).filter_map(move |mut code| {
            let mut v = vec![0i64; m];
            for k in (0..m).rev() {
                v[k] = code % (2 * r + 1) - r;
                code /= 2 * r + 1;
            }
            let on_shell = v.iter().any(|x| x.abs() == r);
            let first = v.iter().find(|&&x| x != 0).copied().unwrap_or(0);
            (on_shell && first.cmp(&0) == Ordering::Greater).then_some(v)
        })
    })
}
