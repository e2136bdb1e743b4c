//! Independent oracles and generators shared by the integration tests.
//! Nothing here calls into the library's own invariant code.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use zpzp_forms::forms::{SymmetricForm, UnimodularMatrix};
use zpzp_forms::plumbing::{Sign, SingularSetData, Sphere};

pub type Mat = Vec<Vec<BigInt>>;

pub fn to_big(rows: &[Vec<i64>]) -> Mat {
    rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
}

fn mul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    (0..n)
        .map(|i| (0..m).map(|j| (0..k).map(|t| &a[i][t] * &b[t][j]).sum()).collect())
        .collect()
}

/// Characteristic polynomial `det(xI − A)` by Faddeev–LeVerrier, as
/// coefficients `c[0] + c[1] x + … + c[n] xⁿ`. Every division is exact.
pub fn characteristic_polynomial(a: &Mat) -> Vec<BigInt> {
    let n = a.len();
    let mut c = vec![BigInt::zero(); n + 1];
    c[n] = BigInt::from(1);
    let mut m: Mat = vec![vec![BigInt::zero(); n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = mul(a, &m);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += &c[n - k + 1];
        }
        let am = mul(a, &next);
        let trace: BigInt = (0..n).map(|i| am[i][i].clone()).sum();
        let q = -trace / BigInt::from(k as u64);
        c[n - k] = q;
        m = next;
    }
    c
}

fn sign_changes(coeffs: impl Iterator<Item = BigInt>) -> usize {
    let signs: Vec<bool> = coeffs.filter(|c| !c.is_zero()).map(|c| c.is_positive()).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// `(positive, negative, zero)` eigenvalue counts of a symmetric matrix.
/// All roots of its characteristic polynomial are real, so Descartes' rule
/// of signs is exact.
pub fn inertia_oracle(a: &Mat) -> (usize, usize, usize) {
    let c = characteristic_polynomial(a);
    let zero = c.iter().take_while(|x| x.is_zero()).count();
    let pos = sign_changes(c.iter().cloned());
    let neg = sign_changes(c.iter().enumerate().map(|(k, x)| if k % 2 == 1 { -x.clone() } else { x.clone() }));
    (pos, neg, zero)
}

pub fn signature_oracle(a: &Mat) -> i64 {
    let (p, n, _) = inertia_oracle(a);
    p as i64 - n as i64
}

/// In any basis, `x·x ≡ Σ a_ii x_i² (mod 2)`.
pub fn is_odd_oracle(a: &Mat) -> bool {
    a.iter().enumerate().any(|(i, r)| r[i].is_odd())
}

/// Cofactor-expansion determinant, fine for the tiny sizes used here.
pub fn det_oracle(a: &Mat) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::from(1);
    }
    if n == 1 {
        return a[0][0].clone();
    }
    let mut total = BigInt::zero();
    for j in 0..n {
        if a[0][j].is_zero() {
            continue;
        }
        let minor: Mat =
            a[1..].iter().map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, x)| x.clone()).collect()).collect();
        let term = &a[0][j] * det_oracle(&minor);
        if j % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

pub fn rows_of(f: &SymmetricForm) -> Mat {
    f.matrix().to_rows()
}

/// Unimodular matrix built from elementary column operations
/// `col_j += k · col_i` and column negations.
pub fn elementary_product(n: usize, ops: &[(usize, usize, i64)]) -> UnimodularMatrix {
    let mut m: Mat = (0..n).map(|i| (0..n).map(|j| BigInt::from((i == j) as i64)).collect()).collect();
    for &(i, j, k) in ops {
        let (i, j) = (i % n, j % n);
        if i == j {
            if k < 0 {
                for row in m.iter_mut() {
                    row[i] = -row[i].clone();
                }
            }
            continue;
        }
        for row in m.iter_mut() {
            let add = &row[i] * k;
            row[j] += add;
        }
    }
    UnimodularMatrix::from_rows(&m).expect("elementary products are unimodular")
}

/// Block kinds: 0 → (+1), 1 → (−1), 2 → H.
pub fn block_form(kinds: &[u8]) -> SymmetricForm {
    let n: usize = kinds.iter().map(|&k| if k == 2 { 2 } else { 1 }).sum();
    let mut m = vec![vec![0i64; n]; n];
    let mut at = 0;
    for &k in kinds {
        match k {
            0 => m[at][at] = 1,
            1 => m[at][at] = -1,
            _ => {
                m[at][at + 1] = 1;
                m[at + 1][at] = 1;
                at += 1;
            }
        }
        at += 1;
    }
    SymmetricForm::from_rows(&m).unwrap()
}

pub fn arb_ops(max: usize) -> impl Strategy<Value = Vec<(usize, usize, i64)>> {
    prop::collection::vec((0usize..8, 0usize..8, -2i64..=2), 0..max)
}

/// A unimodular form `Uᵀ B U` with `B` a block sum of known kinds.
pub fn arb_unimodular_form(max_blocks: usize) -> impl Strategy<Value = (Vec<u8>, SymmetricForm)> {
    (prop::collection::vec(0u8..3, 1..=max_blocks), arb_ops(10)).prop_map(|(kinds, ops)| {
        let b = block_form(&kinds);
        let u = elementary_product(b.dim(), &ops);
        let f = zpzp_forms::forms::transform(&b, &u).unwrap();
        (kinds, f)
    })
}

/// Symmetric integer matrices, not necessarily unimodular.
pub fn arb_symmetric(max_dim: usize, bound: i64) -> impl Strategy<Value = Mat> {
    (1..=max_dim).prop_flat_map(move |n| {
        prop::collection::vec(-bound..=bound, n * (n + 1) / 2).prop_map(move |upper| {
            let mut m = vec![vec![BigInt::zero(); n]; n];
            let mut k = 0;
            for i in 0..n {
                for j in i..n {
                    m[i][j] = BigInt::from(upper[k]);
                    m[j][i] = BigInt::from(upper[k]);
                    k += 1;
                }
            }
            m
        })
    })
}

/// Tridiagonal chain forms with couplings in {−1, 0, 1}.
pub fn arb_chain(max_dim: usize, bound: i64) -> impl Strategy<Value = Mat> {
    (1..=max_dim).prop_flat_map(move |n| {
        (prop::collection::vec(-bound..=bound, n), prop::collection::vec(-1i64..=1, n.saturating_sub(1))).prop_map(
            move |(diag, off)| {
                let mut m = vec![vec![BigInt::zero(); n]; n];
                for i in 0..n {
                    m[i][i] = BigInt::from(diag[i]);
                }
                for (i, &c) in off.iter().enumerate() {
                    m[i][i + 1] = BigInt::from(c);
                    m[i + 1][i] = BigInt::from(c);
                }
                m
            },
        )
    })
}

pub fn arb_sign() -> impl Strategy<Value = Sign> {
    prop_oneof![Just(Sign::Plus), Just(Sign::Minus)]
}

/// Loops of `t` spheres with small Euler numbers; mostly not valid.
pub fn arb_loop(max_t: usize, bound: i64) -> impl Strategy<Value = SingularSetData> {
    (3..=max_t).prop_flat_map(move |t| {
        (prop::collection::vec((-bound..=bound, arb_sign()), t), prop_oneof![Just(2u64), Just(3), Just(5)]).prop_map(
            |(spheres, p)| SingularSetData::new(p, spheres.into_iter().map(|(e, s)| Sphere::new(e, s)).collect()),
        )
    })
}

/// Loops whose Euler numbers can be enormous.
pub fn arb_big_loop() -> impl Strategy<Value = SingularSetData> {
    prop::collection::vec(("-?[1-9][0-9]{0,40}", arb_sign()), 3..7).prop_map(|spheres| {
        SingularSetData::new(
            7,
            spheres.into_iter().map(|(e, s)| Sphere::new(e.parse::<BigInt>().unwrap(), s)).collect(),
        )
    })
}
