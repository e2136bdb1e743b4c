//! Acceptance criteria, one line each. Runs as a plain binary so the lines
//! are always printed; any failing criterion makes it exit non-zero.

mod common;

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use zpzp_forms::borel;
use zpzp_forms::classify::{self, CutStrategy, KsFlag};
use zpzp_forms::cli::report::Report;
use zpzp_forms::forms::{self, SymmetricForm};
use zpzp_forms::gluing::{self, CompatibilityVerdict, Gl2Matrix, IncompatibilityReason};
use zpzp_forms::plumbing::{self, ExceptionFlag, Sign, SingularDataIter, SingularSetData, DEFAULT_PRIME};
use zpzp_forms::reduction::{self, BlockCounts};

const EULER_BOUND: u64 = 3;
const TIME_BUDGET: Duration = Duration::from_secs(60);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// Every Valid configuration with `b2` in 1..=6 and `|e| ≤ 3`, enumerated
/// in parallel by leading Euler number.
fn all_configurations() -> Vec<SingularSetData> {
    let bound = EULER_BOUND as i64;
    (1..=6usize)
        .flat_map(|b2| (-bound..=bound).map(move |first| (b2, first)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .flat_map_iter(|(b2, first)| SingularDataIter::with_first(b2, EULER_BOUND, DEFAULT_PRIME, first))
        .collect()
}

fn det_is_unit(d: &BigInt) -> bool {
    *d == BigInt::from(1) || *d == BigInt::from(-1)
}

fn criterion_1(configs: &[SingularSetData], enumeration: Duration) -> Outcome {
    let start = Instant::now();
    let results: Vec<(usize, Vec<String>)> = configs
        .par_iter()
        .map(|d| {
            let report = plumbing::validate(d);
            let mut failures = Vec::new();
            let mut cuts = 0;
            for c in report.unimodular_cuts() {
                cuts += 1;
                let cut = plumbing::cut_redundant(d, c.i, c.j).unwrap();
                let form = cut.form();
                match reduction::reduce_chain(&form) {
                    Ok(cert) => {
                        let exact = forms::transform(&form, &cert.base_change).unwrap() == cert.block_form();
                        if !(cert.verify() && exact && det_is_unit(&cert.base_change.determinant())) {
                            failures.push(format!("{d:?} cut {:?}: certificate does not verify", cut.pair));
                        }
                    }
                    Err(e) => failures.push(format!("{d:?} cut {:?}: {e}", cut.pair)),
                }
            }
            if cuts == 0 {
                failures.push(format!("{d:?}: no unimodular cut"));
            }
            (cuts, failures)
        })
        .collect();
    let elapsed = enumeration + start.elapsed();
    let cuts: usize = results.iter().map(|r| r.0).sum();
    let failures: Vec<&String> = results.iter().flat_map(|r| &r.1).collect();
    let pass = failures.is_empty() && !configs.is_empty() && elapsed < TIME_BUDGET;
    let mut detail = format!(
        "{} configurations (b2 1..=6, |e| <= {EULER_BOUND}), {cuts} unimodular cuts certified, {:.1} s",
        configs.len(),
        elapsed.as_secs_f64()
    );
    if let Some(f) = failures.first() {
        detail.push_str(&format!("; {} failures, first: {f}", failures.len()));
    }
    outcome(pass, detail)
}

fn small_det(m: &[Vec<i64>]) -> i64 {
    let n = m.len();
    if n == 1 {
        return m[0][0];
    }
    (0..n)
        .map(|j| {
            let minor: Vec<Vec<i64>> =
                m[1..].iter().map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, &x)| x).collect()).collect();
            let s = if j % 2 == 0 { 1 } else { -1 };
            s * m[0][j] * small_det(&minor)
        })
        .sum()
}

fn symmetric_from_code(n: usize, mut code: usize) -> Vec<Vec<i64>> {
    let mut m = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = (code % 5) as i64 - 2;
            code /= 5;
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    m
}

fn criterion_2() -> Outcome {
    let mut checked = 0usize;
    let mut chains = 0usize;
    let mut disagreements: Vec<String> = Vec::new();
    for n in 1..=4usize {
        let total = 5usize.pow((n * (n + 1) / 2) as u32);
        let results: Vec<(usize, usize, Vec<String>)> = (0..total)
            .into_par_iter()
            .fold(
                || (0, 0, Vec::new()),
                |(mut seen, mut chained, mut bad), code| {
                    let m = symmetric_from_code(n, code);
                    if small_det(&m).abs() != 1 {
                        return (seen, chained, bad);
                    }
                    seen += 1;
                    let f = SymmetricForm::from_rows(&m).unwrap();
                    let predicted = BlockCounts::from_invariants(&forms::invariants(&f)).map(|c| c.canonical());
                    let brute = reduction::brute_force_split(&f, reduction::MAX_BOUND);
                    let brute_counts = match &brute {
                        Ok(c) if c.verify() => Some(c.counts().canonical()),
                        _ => None,
                    };
                    if brute_counts.is_none() || brute_counts != predicted {
                        bad.push(format!("{m:?}: brute force {brute_counts:?}, classification {predicted:?}"));
                    }
                    if reduction::is_chain_shape(&f) {
                        chained += 1;
                        let chain = reduction::reduce_chain(&f).ok().filter(|c| c.verify()).map(|c| c.counts().canonical());
                        if chain.is_none() || chain != brute_counts || chain != predicted {
                            bad.push(format!("{m:?}: chain {chain:?}, brute force {brute_counts:?}"));
                        }
                    }
                    (seen, chained, bad)
                },
            )
            .collect();
        for (s, c, b) in results {
            checked += s;
            chains += c;
            disagreements.extend(b);
        }
    }
    let mut detail = format!(
        "{checked} unimodular matrices (rank <= 4, entries in [-2, 2]), {chains} chain-shaped; {} disagreements",
        disagreements.len()
    );
    if let Some(d) = disagreements.first() {
        detail.push_str(&format!(", first: {d}"));
    }
    outcome(disagreements.is_empty() && checked > 0, detail)
}

/// Table entries written out by hand: `(i, j, free?, constant, N coeff, L coeff)`.
/// Blank cells of the reference table are not listed.
const GENERAL_PAGE: [(usize, usize, bool, i64, i64, i64); 17] = [
    (0, 4, true, 1, 0, 0),
    (1, 4, false, 0, 0, 0),
    (0, 3, true, 2, 0, 1),
    (1, 3, false, 0, 0, 0),
    (0, 2, true, 0, 1, 1),
    (1, 2, false, 0, 0, 0),
    (2, 2, false, 0, 2, 2),
    (0, 1, true, -1, 1, 0),
    (1, 1, false, 0, 0, 0),
    (3, 1, false, -1, 1, 0),
    (4, 1, false, -3, 3, 0),
    (0, 0, true, 0, 0, 0),
    (1, 0, false, 0, 0, 0),
    (2, 0, false, 0, 0, 0),
    (3, 0, false, 0, 0, 0),
    (4, 0, false, 0, 0, 0),
    (5, 0, false, 0, 0, 0),
];

/// Rows `j = 4, 3, 2, 1`, columns `i = 0..=5`; column 0 is a free rank.
const TWO_COMPONENT_PAGE: [[u64; 6]; 4] = [[1, 0, 2, 1, 3, 2], [2, 0, 4, 2, 6, 4], [2, 0, 4, 2, 6, 4], [1, 0, 2, 1, 3, 2]];

/// Ranks of `H^k(Z_p × Z_p; Z)` for `k = 0..=5`, free in degree 0.
const GROUP_RANKS: [u64; 6] = [1, 0, 2, 1, 3, 2];

fn criterion_3() -> Outcome {
    let mut problems = Vec::new();
    for (k, &expected) in GROUP_RANKS.iter().enumerate() {
        let g = borel::group_cohomology_rank(3, k).unwrap();
        let observed = if k == 0 { g.free_rank } else { g.torsion_rank };
        if observed as u64 != expected {
            problems.push(format!("H^{k}(G) rank {observed}, expected {expected}"));
        }
    }
    let mut entries = 0;
    for n in 1..=3u64 {
        for l in 0..=2u64 {
            let page = borel::e2_page(n, l, n + l, 3).unwrap();
            for (i, j, free, c, cn, cl) in GENERAL_PAGE {
                let cell = page.cell(i, j).unwrap();
                let observed = if free { cell.free_rank } else { cell.torsion_rank } as i64;
                let expected = c + cn * n as i64 + cl * l as i64;
                entries += 1;
                if observed != expected {
                    problems.push(format!("N={n} L={l} ({i},{j}): {observed} != {expected}"));
                }
            }
        }
    }
    let page = borel::e2_page(2, 0, 2, 3).unwrap();
    for (row, values) in TWO_COMPONENT_PAGE.iter().enumerate() {
        let j = 4 - row;
        for (i, &expected) in values.iter().enumerate() {
            let cell = page.cell(i, j).unwrap();
            let observed = if i == 0 { cell.free_rank } else { cell.torsion_rank };
            entries += 1;
            if observed != expected {
                problems.push(format!("two components ({i},{j}): {observed} != {expected}"));
            }
        }
    }
    let mut vanish = 0;
    for n in 1..=100 {
        let cert = borel::verify_l_vanishes(n).unwrap();
        if cert.l_vanishes && cert.l_max == 0 && cert.steps.iter().all(|s| s.holds) {
            vanish += 1;
        } else {
            problems.push(format!("L vanishing fails at N = {n}"));
        }
    }
    let ledger = borel::check_table2_contradiction();
    let last = ledger.steps.last();
    let flagged = ledger.contradiction && last.is_some_and(|s| s.holds && s.observed.contains("rank ≥ 1"));
    if !flagged {
        problems.push("two-component ledger does not end in a contradiction".into());
    }
    let detail = format!(
        "{entries} table entries, L = 0 for {vanish}/100 values of N, final ledger step {:?} flags contradiction: {flagged}{}",
        last.map(|s| s.label.as_str()).unwrap_or("-"),
        problems.first().map(|p| format!("; first problem: {p}")).unwrap_or_default()
    );
    outcome(problems.is_empty(), detail)
}

fn criterion_4(configs: &[SingularSetData]) -> Outcome {
    let failures: Vec<String> = configs
        .par_iter()
        .filter_map(|d| {
            let c = match classify::classify(d) {
                Ok(c) => c,
                Err(e) => return Some(format!("{d:?}: {e}")),
            };
            let h = &c.homeo_type;
            let sig = signature_oracle(&rows_of(&plumbing::circular_matrix(d).unwrap()));
            if h.a + h.b + 2 * h.c != d.b2() || h.a as i64 - h.b as i64 != sig {
                return Some(format!("{d:?}: {h:?} violates the counting identities (signature {sig})"));
            }
            for cert in &c.certificates {
                match classify::homeo_type(&cert.certificate, d) {
                    Ok(other) if other == *h => {}
                    other => return Some(format!("{d:?}: cut {:?} gives {other:?}", cert.cut.pair)),
                }
            }
            if !c.cut_independent {
                return Some(format!("{d:?}: not cut independent"));
            }
            None
        })
        .collect();
    let detail = format!(
        "{} Valid configurations: a + b + 2c = b2, a - b = signature, identical across cuts; {} failures{}",
        configs.len(),
        failures.len(),
        failures.first().map(|f| format!(", first: {f}")).unwrap_or_default()
    );
    outcome(failures.is_empty(), detail)
}

fn generator(k: u8) -> Gl2Matrix {
    match k {
        0 => gluing::clutch(1),
        1 => gluing::switch(),
        _ => gluing::orientation(-1).unwrap(),
    }
}

fn word(w: &[u8]) -> Gl2Matrix {
    w.iter().fold(Gl2Matrix::identity(), |acc, &k| &acc * &generator(k))
}

fn is_identity_oracle(g: &Gl2Matrix) -> bool {
    let e = g.entries();
    let one = BigInt::from(1);
    let zero = BigInt::from(0);
    *e[0][0] == one && *e[0][1] == zero && *e[1][0] == zero && *e[1][1] == one
}

fn criterion_5() -> Outcome {
    use IncompatibilityReason::*;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_2024);
    let mut problems = Vec::new();
    let mut identities = 0;
    for _ in 0..1000 {
        let len = rng.gen_range(0..=12);
        let w: Vec<u8> = (0..len).map(|_| rng.gen_range(0..3u8)).collect();
        let g = word(&w);
        let id = is_identity_oracle(&g);
        identities += id as usize;
        for p in [3u64, 5, 7] {
            let trivial = gluing::compatibility(&g, p).unwrap() == CompatibilityVerdict::TrivialPrincipal;
            if trivial != id {
                problems.push(format!("word {w:?} at p = {p}: γ = {g}, verdict trivial = {trivial}"));
            }
        }
    }
    let j = Gl2Matrix::new(0, 1, -1, 0).unwrap();
    let cases = [
        (word(&[2, 1]), j.clone(), BaseFiberSplitViolation),
        (word(&[1, 2]), j.neg(), BaseFiberSplitViolation),
        (word(&[1, 2, 1, 2]), Gl2Matrix::new(-1, 0, 0, -1).unwrap(), MinusIdentityTorsionViolation),
    ];
    for (g, expected_matrix, reason) in cases {
        if g != expected_matrix {
            problems.push(format!("word gives {g}, expected {expected_matrix}"));
        }
        let v = gluing::compatibility(&g, 2).unwrap();
        if v != CompatibilityVerdict::Incompatible(reason) {
            problems.push(format!("p = 2, γ = {g}: {v:?}, expected {reason:?}"));
        }
    }
    let calibration = match gluing::calibrate_convention(&gluing::standard_models(3)) {
        Ok(c) => {
            let ok = gluing::standard_models(3)
                .iter()
                .all(|m| gluing::total_gluing(m, &c).map(|g| is_identity_oracle(&g)).unwrap_or(false));
            if !ok {
                problems.push(format!("calibrated convention {c} does not glue the models to I"));
            }
            c.to_string()
        }
        Err(e) => {
            for attempt in &e.transcript {
                eprintln!("  tried {}: {:?}", attempt.convention, attempt.gammas);
            }
            problems.push(format!("calibration failed: {e}"));
            "none".into()
        }
    };
    let detail = format!(
        "1000 seeded words ({identities} equal to I), p in {{3, 5, 7}}; p = 2 reasons for J, -J, -I; calibrated convention {calibration}{}",
        problems.first().map(|p| format!("; first problem: {p}")).unwrap_or_default()
    );
    outcome(problems.is_empty(), detail)
}

fn criterion_6(configs: &[SingularSetData]) -> Outcome {
    let mut problems = Vec::new();
    let exceptions = [
        (ExceptionFlag::PseudofreeP3B1, KsFlag::PossiblyChern),
        (ExceptionFlag::FixedPointFreeP2Hyperbolic, KsFlag::Zero),
        (ExceptionFlag::PseudofreeP3Chern, KsFlag::PossiblyChern),
    ];
    for (flag, ks) in exceptions {
        for orientation in [Sign::Plus, Sign::Minus] {
            let d = SingularSetData::exception(flag, orientation);
            match classify::classify(&d) {
                Ok(c) => {
                    let h = &c.homeo_type;
                    let flagged = h.exception_note.is_some() && h.ks == ks;
                    if !flagged || c.decomposition.is_some() {
                        problems.push(format!("{flag:?}: not flagged or decomposed ({h:?})"));
                    }
                    let cert = c.exception_certificate.as_ref();
                    if !cert.is_some_and(|c| c.verify()) {
                        problems.push(format!("{flag:?}: exception form has no verified certificate"));
                    }
                }
                Err(e) => problems.push(format!("{flag:?}: {e}")),
            }
        }
    }
    let unflagged = configs
        .par_iter()
        .filter(|d| match classify::classify(d) {
            Ok(c) => c.homeo_type.ks != KsFlag::Zero || c.homeo_type.exception_note.is_some(),
            Err(_) => true,
        })
        .count();
    if unflagged > 0 {
        problems.push(format!("{unflagged} ordinary configurations not reported with KS zero"));
    }
    let detail = format!(
        "3 exception kinds flagged with no decomposition; {} ordinary configurations report KS zero{}",
        configs.len() - unflagged,
        problems.first().map(|p| format!("; first problem: {p}")).unwrap_or_default()
    );
    outcome(problems.is_empty(), detail)
}

fn criterion_7() -> Outcome {
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let mut problems = Vec::new();
    let mut seen = Vec::new();
    for (file, expected) in [("cp2_triangle.toml", "S⁴ # ℂP²"), ("s2xs2_square.toml", "S⁴ # S²×S²")] {
        let out = Command::new(env!("CARGO_BIN_EXE_zpzp"))
            .args(["classify", "--input"])
            .arg(fixtures.join(file))
            .args(["--format", "structured"])
            .output()
            .expect("zpzp runs");
        let text = String::from_utf8_lossy(&out.stdout);
        let report = match Report::from_json(&text) {
            Ok(r) => r,
            Err(e) => {
                problems.push(format!("{file}: unreadable report ({e})"));
                continue;
            }
        };
        let strategy = report.decomposition.as_ref().map(|d| d.cut_strategy);
        let description = report.description.clone().unwrap_or_default();
        if out.status.code() != Some(0) || description != expected || strategy != Some(CutStrategy::AdjacentPair) {
            problems.push(format!("{file}: exit {:?}, {description:?} via {strategy:?}", out.status.code()));
        }
        seen.push(format!("{file} -> {description}"));
    }
    let detail = format!(
        "{}{}",
        seen.join(", "),
        problems.first().map(|p| format!("; first problem: {p}")).unwrap_or_default()
    );
    outcome(problems.is_empty(), detail)
}

fn main() {
    let start = Instant::now();
    let configs = all_configurations();
    let enumeration = start.elapsed();

    let results = [
        ("1", "splitting at desk scale", criterion_1(&configs, enumeration)),
        ("2", "oracle equivalence", criterion_2()),
        ("3", "table reproduction", criterion_3()),
        ("4", "counting identities", criterion_4(&configs)),
        ("5", "gluing calculus", criterion_5()),
        ("6", "exception handling", criterion_6(&configs)),
        ("7", "end-to-end fixtures", criterion_7()),
    ];
    let mut failed = 0;
    for (n, name, o) in &results {
        println!("criterion {n} ({name}): {} — {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += !o.pass as usize;
    }
    println!("acceptance: {} of {} criteria pass ({:.1} s)", results.len() - failed, results.len(), start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
