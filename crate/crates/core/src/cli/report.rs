//! Report assembly. The structured form is pretty JSON whose fields are all
//! deterministic, so parsing and re-emitting a report is byte-identical.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::borel::{
    self, ContradictionCertificate, GroupCohomologyRank, LVanishingCertificate, TableCheck,
};
use crate::classify::{EquivariantDecomposition, HomeoType, KsFlag};
use crate::gluing::{CompatibilityVerdict, GluingReport};
use crate::plumbing::{SingularSetData, ValidationReport, Verdict};
use crate::reduction::CongruenceCertificate;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Invalid,
    Incompatible,
    Failed,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Invalid | Status::Incompatible | Status::Failed => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateEntry {
    pub cut: Option<(usize, usize)>,
    pub adjacent: Option<bool>,
    pub certificate: CongruenceCertificate,
    /// Filled by re-multiplying, not copied from the producer.
    pub verified: bool,
}

impl CertificateEntry {
    pub fn new(cut: Option<(usize, usize)>, adjacent: Option<bool>, certificate: CongruenceCertificate) -> Self {
        let verified = certificate.verify();
        CertificateEntry { cut, adjacent, certificate, verified }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LRangeCheck {
    pub from: u64,
    pub to: u64,
    pub all_vanish: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BorelSection {
    pub group_ranks: Vec<GroupCohomologyRank>,
    pub tables: Vec<TableCheck>,
    pub l_vanishes: Vec<LVanishingCertificate>,
    pub l_range: LRangeCheck,
    pub contradiction: ContradictionCertificate,
    pub all_checks_pass: bool,
}

pub fn borel_section(p: u64, with_tables: bool) -> BorelSection {
    let group_ranks = (0..=borel::MAX_DEGREE)
        .map(|n| borel::group_cohomology_rank(p, n).expect("prime p, degree in range"))
        .collect();
    let tables = if with_tables { borel::table_checks(p).expect("prime p") } else { Vec::new() };
    let l_vanishes: Vec<LVanishingCertificate> =
        (1..=3).map(|n| borel::verify_l_vanishes(n).expect("n >= 1")).collect();
    let all_vanish = (1..=100).all(|n| borel::verify_l_vanishes(n).map(|c| c.l_vanishes).unwrap_or(false));
    let contradiction = borel::check_table2_contradiction_at(p).expect("prime p");
    let all_checks_pass = tables.iter().all(|t| t.holds)
        && l_vanishes.iter().all(|c| c.l_vanishes)
        && all_vanish
        && contradiction.contradiction;
    BorelSection {
        group_ranks,
        tables,
        l_vanishes,
        l_range: LRangeCheck { from: 1, to: 100, all_vanish },
        contradiction,
        all_checks_pass,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub status: Status,
    pub exit_code: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificates: Option<Vec<CertificateEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub homeo_type: Option<HomeoType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cut_independent: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<EquivariantDecomposition>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gluing: Option<GluingReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub borel: Option<BorelSection>,
    #[serde(default)]
    pub exception_notes: Vec<String>,
    #[serde(default)]
    pub errors: Vec<String>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            command: command.to_string(),
            status: Status::Ok,
            exit_code: 0,
            input: None,
            validation: None,
            certificates: None,
            homeo_type: None,
            description: None,
            cut_independent: None,
            decomposition: None,
            gluing: None,
            borel: None,
            exception_notes: Vec::new(),
            errors: Vec::new(),
        }
    }

    pub fn set_status(&mut self, status: Status) {
        self.status = status;
        self.exit_code = status.exit_code();
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Report> {
        serde_json::from_str(text)
    }

    pub fn to_human(&self) -> String {
        render_human(self)
    }
}

/// One-line summary of loop data.
pub fn describe_data(d: &SingularSetData) -> String {
    if d.exception.is_exception() {
        return format!("p = {}, exception {:?}, orientation {}", d.p, d.exception, d.orientation);
    }
    let e: Vec<String> = d.spheres.iter().map(|s| s.euler.to_string()).collect();
    let eps: Vec<String> = d.spheres.iter().map(|s| s.sign.to_string()).collect();
    format!("p = {}, t = {}, e = ({}), ε = ({})", d.p, d.t(), e.join(", "), eps.join(", "))
}

fn render_human(r: &Report) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "command: {}", r.command);
    let _ = writeln!(s, "status: {:?} (exit {})", r.status, r.exit_code);
    if let Some(input) = &r.input {
        let _ = writeln!(s, "input:");
        for line in input.lines().filter(|l| !l.is_empty()) {
            let _ = writeln!(s, "  {line}");
        }
    }
    if let Some(v) = &r.validation {
        let verdict = match &v.verdict {
            Verdict::Valid => "valid".to_string(),
            Verdict::Invalid(why) => format!("invalid: {why}"),
            Verdict::Exceptional => "exceptional".to_string(),
        };
        let _ = writeln!(s, "validation: {verdict}");
        let _ = writeln!(
            s,
            "  circular rank {} (expected {}), fixed points {}",
            v.circular_rank, v.expected_rank, v.fixed_point_count
        );
        let good: Vec<String> = v
            .unimodular_cuts()
            .map(|c| format!("{{{}, {}}}{}", c.i, c.j, if c.adjacent { " adjacent" } else { "" }))
            .collect();
        if !v.cuts_tested.is_empty() {
            let _ = writeln!(
                s,
                "  unimodular cuts ({} of {} tested): {}",
                good.len(),
                v.cuts_tested.len(),
                if good.is_empty() { "none".to_string() } else { good.join(", ") }
            );
        }
        let _ = writeln!(s, "  note: {}", v.primitivity_note);
    }
    if let Some(certs) = &r.certificates {
        for c in certs {
            let cut = match c.cut {
                Some((i, j)) => format!(" for cut {{{i}, {j}}}"),
                None => String::new(),
            };
            let _ = writeln!(
                s,
                "certificate{cut}: blocks {:?}, {}",
                c.certificate.blocks,
                if c.verified { "verified" } else { "NOT VERIFIED" }
            );
            let _ = writeln!(s, "  source {}", c.certificate.source);
            let _ = writeln!(s, "  base change {}", c.certificate.base_change);
        }
    }
    if let Some(h) = &r.homeo_type {
        let ks = match h.ks {
            KsFlag::Zero => "KS zero",
            KsFlag::PossiblyChern => "KS possibly non-zero",
        };
        let _ = writeln!(s, "homeomorphism type: {h} ({ks}; a = {}, b = {}, c = {})", h.a, h.b, h.c);
    }
    if let Some(ci) = r.cut_independent {
        let _ = writeln!(s, "  identical across unimodular cuts: {ci}");
    }
    if let Some(d) = &r.decomposition {
        let _ = writeln!(
            s,
            "equivariant decomposition: {d} via {:?} (cut {{{}, {}}})",
            d.cut_strategy, d.cut.0, d.cut.1
        );
        for n in &d.notes {
            let _ = writeln!(s, "  note: {n}");
        }
    }
    if let Some(g) = &r.gluing {
        let verdict = match g.verdict {
            CompatibilityVerdict::TrivialPrincipal => "trivial principal".to_string(),
            CompatibilityVerdict::Incompatible(reason) => format!("incompatible ({reason:?})"),
        };
        let _ = writeln!(
            s,
            "gluing: γ = {} (det {:+}) under {}{}: {verdict}",
            g.gamma,
            g.determinant,
            g.convention,
            if g.calibrated { " (calibrated)" } else { " (convention-dependent)" }
        );
        let _ = writeln!(s, "  note: {}", g.note);
    }
    if let Some(b) = &r.borel {
        render_borel(&mut s, b);
    }
    if let Some(desc) = &r.description {
        let _ = writeln!(s, "result: {desc}");
    }
    for n in &r.exception_notes {
        let _ = writeln!(s, "exception: {n}");
    }
    for e in &r.errors {
        let _ = writeln!(s, "error: {e}");
    }
    s
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAILED"
    }
}

fn render_borel(s: &mut String, b: &BorelSection) {
    let _ = writeln!(s, "group cohomology ranks:");
    for g in &b.group_ranks {
        let _ = writeln!(
            s,
            "  H^{}: free {}, Z_p rank {}  ⟨{}⟩",
            g.degree,
            g.free_rank,
            g.torsion_rank,
            g.generators.join(", ")
        );
    }
    if !b.tables.is_empty() {
        for table in ["general", "two-component"] {
            let rows: Vec<&TableCheck> = b.tables.iter().filter(|t| t.table == table).collect();
            let passed = rows.iter().filter(|t| t.holds).count();
            let _ = writeln!(s, "table {table}: {passed}/{} entries reproduced", rows.len());
            for t in rows.iter().filter(|t| !t.holds) {
                let _ = writeln!(
                    s,
                    "  mismatch at (i={}, j={}) N={} L={}: expected {}, observed {}",
                    t.i, t.j, t.n, t.l, t.expected, t.observed
                );
            }
        }
    }
    for c in &b.l_vanishes {
        let _ = writeln!(
            s,
            "L vanishing, N = {}: {} i.e. {} ⇒ L ≤ {} [{}]",
            c.n,
            c.inequality,
            c.simplified,
            c.l_max,
            mark(c.l_vanishes)
        );
        for step in &c.steps {
            let _ = writeln!(s, "  {}: {} — {} [{}]", step.label, step.assertion, step.observed, mark(step.holds));
        }
    }
    let _ = writeln!(
        s,
        "L = 0 for every N in [{}, {}]: {}",
        b.l_range.from,
        b.l_range.to,
        mark(b.l_range.all_vanish)
    );
    let _ = writeln!(s, "two-component ledger (p = {}):", b.contradiction.p);
    for step in &b.contradiction.steps {
        let _ = writeln!(s, "  {}: {} — {} [{}]", step.label, step.assertion, step.observed, mark(step.holds));
    }
    let _ = writeln!(
        s,
        "contradiction reached: {}; all borel checks: {}",
        b.contradiction.contradiction,
        mark(b.all_checks_pass)
    );
}
