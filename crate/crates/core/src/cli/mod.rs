//! The `zpzp` command line: argument parsing, dispatch and exit codes.
//!
//! Exit status 0 means success (exception cases included), 1 an invalid
//! configuration or an incompatible gluing under the calibrated
//! convention, 2 a usage or input-format error. Nothing is written to
//! stdout on status 2.

pub mod document;
pub mod report;

use std::fmt;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

use crate::classify::{self, ClassifyError};
use crate::gluing::{self, CompatibilityVerdict, FactorOrder};
use crate::plumbing::{self, SingularDataIter, SingularSetData, Verdict, DEFAULT_PRIME};
use crate::reduction;

use document::Document;
use report::{borel_section, CertificateEntry, Report, Status};

/// Euler bound used by `enumerate` when none is given.
pub const DEFAULT_EULER_BOUND: u64 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Validate,
    Reduce,
    Classify,
    Gluing,
    Enumerate,
    BorelCheck,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Reduce => "reduce",
            Command::Classify => "classify",
            Command::Gluing => "gluing",
            Command::Enumerate => "enumerate",
            Command::BorelCheck => "borel-check",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Human,
    Structured,
}

/// Certified algebra for Z_p × Z_p actions on simply-connected 4-manifolds.
#[derive(Clone, Debug, Parser)]
#[command(name = "zpzp", version)]
pub struct RunConfig {
    #[arg(value_enum)]
    pub command: Command,
    /// Input document (TOML) for validate, reduce, classify and gluing.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Second Betti number for enumerate.
    #[arg(long)]
    pub b2: Option<usize>,
    /// Bound on |e_i| for enumerate.
    #[arg(long = "euler-bound")]
    pub euler_bound: Option<u64>,
    /// `calibrated` (the default), `default`, or WORD:SIGN:POLE:DIR such as
    /// `SOC:direct:incoming:ltr`.
    #[arg(long)]
    pub convention: Option<String>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Human)]
    pub format: OutputFormat,
}

#[derive(Debug)]
pub enum UsageError {
    MissingInput(Command),
    MissingB2,
    ZeroB2,
    Read(PathBuf, io::Error),
    Document(PathBuf, document::DocumentError),
    WrongDocument(&'static str),
    Convention(String),
    Io(io::Error),
}

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UsageError::MissingInput(c) => write!(f, "`{}` requires --input <path>", c.name()),
            UsageError::MissingB2 => write!(f, "`enumerate` requires --b2 <n>"),
            UsageError::ZeroB2 => write!(f, "--b2 must be at least 1"),
            UsageError::Read(p, e) => write!(f, "cannot read {}: {e}", p.display()),
            UsageError::Document(p, e) => write!(f, "{}: {e}", p.display()),
            UsageError::WrongDocument(what) => write!(f, "input document {what}"),
            UsageError::Convention(s) => write!(f, "unknown convention {s:?}"),
            UsageError::Io(e) => write!(f, "write failed: {e}"),
        }
    }
}

impl std::error::Error for UsageError {}

impl From<io::Error> for UsageError {
    fn from(e: io::Error) -> Self {
        UsageError::Io(e)
    }
}

/// `None` selects calibration.
fn resolve_convention(name: Option<&str>) -> Result<Option<FactorOrder>, UsageError> {
    match name {
        None | Some("calibrated") => Ok(None),
        Some(s) => s.parse().map(Some).map_err(|_| UsageError::Convention(s.to_string())),
    }
}

fn load(config: &RunConfig) -> Result<(Document, String), UsageError> {
    let path = config.input.clone().ok_or(UsageError::MissingInput(config.command))?;
    let text = std::fs::read_to_string(&path).map_err(|e| UsageError::Read(path.clone(), e))?;
    let doc = document::parse(&text).map_err(|e| UsageError::Document(path, e))?;
    let echo = document::emit(&doc);
    Ok((doc, echo))
}

fn require_data(doc: Document) -> Result<SingularSetData, UsageError> {
    doc.data.ok_or(UsageError::WrongDocument("has no singular-set data (`p`, `spheres`)"))
}

/// Runs one command, writing the report to `out`. Errors are usage errors
/// (status 2) and leave `out` untouched.
pub fn run(config: &RunConfig, out: &mut dyn Write) -> Result<i32, UsageError> {
    let convention = resolve_convention(config.convention.as_deref())?;
    if config.command == Command::Enumerate {
        return enumerate(config, out);
    }
    let report = match config.command {
        Command::BorelCheck => {
            let mut r = Report::new("borel-check");
            let section = borel_section(DEFAULT_PRIME, true);
            if !section.all_checks_pass {
                r.set_status(Status::Failed);
            }
            r.borel = Some(section);
            r
        }
        Command::Validate => {
            let (doc, echo) = load(config)?;
            validate(require_data(doc)?, echo)
        }
        Command::Reduce => {
            let (doc, echo) = load(config)?;
            reduce(doc, echo)
        }
        Command::Classify => {
            let (doc, echo) = load(config)?;
            classify(require_data(doc)?, echo, convention)
        }
        Command::Gluing => {
            let (doc, echo) = load(config)?;
            glue(require_data(doc)?, echo, convention)
        }
        Command::Enumerate => unreachable!(),
    };
    let text = match config.format {
        OutputFormat::Human => report.to_human(),
        OutputFormat::Structured => report.to_json(),
    };
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(report.exit_code)
}

fn exception_notes(data: &SingularSetData) -> Vec<String> {
    data.exception.note().map(|n| vec![n.to_string()]).unwrap_or_default()
}

fn validate(data: SingularSetData, echo: String) -> Report {
    let mut r = Report::new("validate");
    r.input = Some(echo);
    let v = plumbing::validate(&data);
    if matches!(v.verdict, Verdict::Invalid(_)) {
        r.set_status(Status::Invalid);
    }
    r.validation = Some(v);
    r.exception_notes = exception_notes(&data);
    r
}

fn reduce(doc: Document, echo: String) -> Report {
    let mut r = Report::new("reduce");
    r.input = Some(echo);
    let mut certs = Vec::new();
    if let Some(form) = &doc.form {
        match reduction::reduce(form) {
            Ok(c) => certs.push(CertificateEntry::new(None, None, c)),
            Err(e) => {
                r.errors.push(e.to_string());
                r.set_status(Status::Invalid);
            }
        }
    }
    if let Some(data) = &doc.data {
        let v = plumbing::validate(data);
        r.exception_notes = exception_notes(data);
        match &v.verdict {
            Verdict::Invalid(_) => r.set_status(Status::Invalid),
            Verdict::Exceptional => {
                let form = classify::exception_form(data.exception, data.orientation).expect("flag set");
                match reduction::reduce(&form) {
                    Ok(c) => certs.push(CertificateEntry::new(None, None, c)),
                    Err(e) => r.errors.push(e.to_string()),
                }
            }
            Verdict::Valid => match classify::certify_cuts(data) {
                Ok(cs) => certs.extend(
                    cs.into_iter()
                        .map(|c| CertificateEntry::new(Some(c.cut.pair), Some(c.cut.adjacent), c.certificate)),
                ),
                Err(e) => {
                    r.errors.push(e.to_string());
                    r.set_status(Status::Failed);
                }
            },
        }
        r.validation = Some(v);
    }
    if certs.iter().any(|c| !c.verified) {
        r.set_status(Status::Failed);
    }
    r.certificates = Some(certs);
    r
}

fn classify(data: SingularSetData, echo: String, convention: Option<FactorOrder>) -> Report {
    let mut r = Report::new("classify");
    r.input = Some(echo);
    r.exception_notes = exception_notes(&data);
    match classify::classify(&data) {
        Err(ClassifyError::Invalid(_)) => {
            r.validation = Some(plumbing::validate(&data));
            r.set_status(Status::Invalid);
            return r;
        }
        Err(e) => {
            r.validation = Some(plumbing::validate(&data));
            r.errors.push(e.to_string());
            r.set_status(Status::Failed);
            return r;
        }
        Ok(c) => {
            let mut certs: Vec<CertificateEntry> = c
                .certificates
                .into_iter()
                .map(|x| CertificateEntry::new(Some(x.cut.pair), Some(x.cut.adjacent), x.certificate))
                .collect();
            if let Some(ec) = c.exception_certificate {
                certs.push(CertificateEntry::new(None, None, ec));
            }
            r.validation = Some(c.validation);
            r.certificates = Some(certs);
            r.homeo_type = Some(c.homeo_type);
            r.description = Some(c.description);
            r.cut_independent = Some(c.cut_independent);
            if c.decomposition_consistent == Some(false) {
                r.errors.push("decomposition and homeomorphism type disagree".into());
                r.set_status(Status::Failed);
            }
            r.decomposition = c.decomposition;
        }
    }
    if !data.exception.is_exception() {
        match gluing::gluing_report(&data, convention) {
            Ok(g) => {
                if g.calibrated && matches!(g.verdict, CompatibilityVerdict::Incompatible(_)) {
                    r.set_status(Status::Incompatible);
                }
                r.gluing = Some(g);
            }
            Err(e) => r.errors.push(e.to_string()),
        }
    }
    r.borel = Some(borel_section(data.p, false));
    r
}

fn glue(data: SingularSetData, echo: String, convention: Option<FactorOrder>) -> Report {
    let mut r = Report::new("gluing");
    r.input = Some(echo);
    r.exception_notes = exception_notes(&data);
    if data.exception.is_exception() {
        return r;
    }
    let v = plumbing::validate(&data);
    if matches!(v.verdict, Verdict::Invalid(_)) {
        r.validation = Some(v);
        r.set_status(Status::Invalid);
        return r;
    }
    match gluing::gluing_report(&data, convention) {
        Ok(g) => {
            if g.calibrated && matches!(g.verdict, CompatibilityVerdict::Incompatible(_)) {
                r.set_status(Status::Incompatible);
            }
            r.gluing = Some(g);
        }
        Err(e) => {
            r.errors.push(e.to_string());
            r.set_status(Status::Failed);
        }
    }
    r
}

fn enumerate(config: &RunConfig, out: &mut dyn Write) -> Result<i32, UsageError> {
    let b2 = config.b2.ok_or(UsageError::MissingB2)?;
    if b2 == 0 {
        return Err(UsageError::ZeroB2);
    }
    let bound = config.euler_bound.unwrap_or(DEFAULT_EULER_BOUND);
    for data in SingularDataIter::new(b2, bound, DEFAULT_PRIME) {
        let line = match config.format {
            OutputFormat::Human => report::describe_data(&data),
            OutputFormat::Structured => serde_json::to_string(&data).expect("data serialises"),
        };
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(0)
}
