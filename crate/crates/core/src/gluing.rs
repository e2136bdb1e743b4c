//! `GL(2, Z)` bookkeeping for the torus bundle over the loop of spheres.
//!
//! Each sphere contributes a factor `γ_i` built from a clutching matrix
//! `C(e_i)`, the coordinate switch `S` and an orientation change `O(ε)`.
//! The order of those three inside `γ_i`, the sign and pole used for `ε`,
//! and the direction of the product around the loop are only fixed up to
//! isotopy, so they form a [`FactorOrder`] parameter that can be
//! calibrated against models known to carry torus actions.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::plumbing::SingularSetData;
use crate::primes::is_prime;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[[String; 2]; 2]", into = "[[String; 2]; 2]")]
pub struct Gl2Matrix {
    a: BigInt,
    b: BigInt,
    c: BigInt,
    d: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GluingError {
    #[error("determinant {0} is not ±1")]
    NotUnimodular(BigInt),
    #[error("orientation sign must be ±1, got {0}")]
    BadSign(i64),
    #[error("p = {0} is not prime")]
    NotPrime(u64),
    #[error("gluing needs a loop of at least 3 spheres, got {0}")]
    TooFewSpheres(usize),
    #[error("exception data has no sphere loop")]
    ExceptionData,
    #[error("unknown convention {0:?}")]
    UnknownConvention(String),
}

impl Gl2Matrix {
    /// `[[a, b], [c, d]]`.
    pub fn new(
        a: impl Into<BigInt>,
        b: impl Into<BigInt>,
        c: impl Into<BigInt>,
        d: impl Into<BigInt>,
    ) -> Result<Self, GluingError> {
        let m = Gl2Matrix { a: a.into(), b: b.into(), c: c.into(), d: d.into() };
        let det = m.determinant();
        if det.abs().is_one() {
            Ok(m)
        } else {
            Err(GluingError::NotUnimodular(det))
        }
    }

    fn raw(a: i64, b: i64, c: i64, d: i64) -> Self {
        Gl2Matrix::new(a, b, c, d).expect("constant is unimodular")
    }

    pub fn identity() -> Self {
        Gl2Matrix::raw(1, 0, 0, 1)
    }

    pub fn minus_identity() -> Self {
        Gl2Matrix::raw(-1, 0, 0, -1)
    }

    /// `J = [[0, 1], [-1, 0]]`, the quarter turn.
    pub fn quarter_turn() -> Self {
        Gl2Matrix::raw(0, 1, -1, 0)
    }

    pub fn entries(&self) -> [[&BigInt; 2]; 2] {
        [[&self.a, &self.b], [&self.c, &self.d]]
    }

    pub fn determinant(&self) -> BigInt {
        &self.a * &self.d - &self.b * &self.c
    }

    pub fn is_identity(&self) -> bool {
        *self == Gl2Matrix::identity()
    }

    pub fn neg(&self) -> Self {
        Gl2Matrix { a: -&self.a, b: -&self.b, c: -&self.c, d: -&self.d }
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Gl2Matrix::identity(), |acc, _| &acc * self)
    }
}

impl Mul for &Gl2Matrix {
    type Output = Gl2Matrix;

    fn mul(self, o: &Gl2Matrix) -> Gl2Matrix {
        Gl2Matrix {
            a: &self.a * &o.a + &self.b * &o.c,
            b: &self.a * &o.b + &self.b * &o.d,
            c: &self.c * &o.a + &self.d * &o.c,
            d: &self.c * &o.b + &self.d * &o.d,
        }
    }
}

impl TryFrom<[[String; 2]; 2]> for Gl2Matrix {
    type Error = String;

    fn try_from(rows: [[String; 2]; 2]) -> Result<Self, String> {
        let parse = |s: &String| s.parse::<BigInt>().map_err(|_| format!("bad integer {s:?}"));
        Gl2Matrix::new(parse(&rows[0][0])?, parse(&rows[0][1])?, parse(&rows[1][0])?, parse(&rows[1][1])?)
            .map_err(|e| e.to_string())
    }
}

impl From<Gl2Matrix> for [[String; 2]; 2] {
    fn from(m: Gl2Matrix) -> Self {
        [[m.a.to_string(), m.b.to_string()], [m.c.to_string(), m.d.to_string()]]
    }
}

impl fmt::Display for Gl2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

/// `[[1, 0], [e, 1]]`.
pub fn clutch(e: impl Into<BigInt>) -> Gl2Matrix {
    Gl2Matrix { a: BigInt::one(), b: BigInt::zero(), c: e.into(), d: BigInt::one() }
}

/// `[[0, 1], [1, 0]]`.
pub fn switch() -> Gl2Matrix {
    Gl2Matrix::raw(0, 1, 1, 0)
}

/// `[[1, 0], [0, ε]]`.
pub fn orientation(eps: i64) -> Result<Gl2Matrix, GluingError> {
    match eps {
        1 | -1 => Ok(Gl2Matrix::raw(1, 0, 0, eps)),
        other => Err(GluingError::BadSign(other)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Factor {
    Switch,
    Orientation,
    Clutch,
}

impl Factor {
    fn letter(self) -> char {
        match self {
            Factor::Switch => 'S',
            Factor::Orientation => 'O',
            Factor::Clutch => 'C',
        }
    }
}

/// Whether `O` uses `ε` or `-ε`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SignConvention {
    Direct,
    Reversed,
}

/// Which pole of sphere `i` supplies its sign: the one shared with the
/// previous sphere (`ε_i`) or with the next (`ε_{i+1}`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PoleConvention {
    Incoming,
    Outgoing,
}

/// `LeftToRight` is `γ_1 · γ_2 ⋯ γ_t`; `RightToLeft` is `γ_t ⋯ γ_1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    LeftToRight,
    RightToLeft,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct FactorOrder {
    pub factors: [Factor; 3],
    pub sign: SignConvention,
    pub pole: PoleConvention,
    pub direction: Direction,
}

const PERMUTATIONS: [[Factor; 3]; 6] = {
    use Factor::*;
    [
        [Switch, Orientation, Clutch],
        [Switch, Clutch, Orientation],
        [Orientation, Switch, Clutch],
        [Orientation, Clutch, Switch],
        [Clutch, Switch, Orientation],
        [Clutch, Orientation, Switch],
    ]
};

impl Default for FactorOrder {
    /// `γ_i = S · O(ε_i) · C(e_i)`, multiplied left to right from sphere 0.
    fn default() -> Self {
        FactorOrder {
            factors: PERMUTATIONS[0],
            sign: SignConvention::Direct,
            pole: PoleConvention::Incoming,
            direction: Direction::LeftToRight,
        }
    }
}

impl FactorOrder {
    /// All 48 variants, default first, in the order calibration tries them.
    pub fn all() -> Vec<FactorOrder> {
        let mut out = Vec::with_capacity(48);
        for factors in PERMUTATIONS {
            for sign in [SignConvention::Direct, SignConvention::Reversed] {
                for pole in [PoleConvention::Incoming, PoleConvention::Outgoing] {
                    for direction in [Direction::LeftToRight, Direction::RightToLeft] {
                        out.push(FactorOrder { factors, sign, pole, direction });
                    }
                }
            }
        }
        out
    }

    /// `γ_i` for sphere `i` of `data`.
    pub fn sphere_factor(&self, data: &SingularSetData, i: usize) -> Gl2Matrix {
        let t = data.t();
        let pole = match self.pole {
            PoleConvention::Incoming => data.spheres[i].sign,
            PoleConvention::Outgoing => data.spheres[(i + 1) % t].sign,
        };
        let eps = match self.sign {
            SignConvention::Direct => pole,
            SignConvention::Reversed => pole.flip(),
        };
        self.factors.iter().fold(Gl2Matrix::identity(), |acc, f| {
            let m = match f {
                Factor::Switch => switch(),
                Factor::Orientation => orientation(eps.value()).unwrap(),
                Factor::Clutch => clutch(data.spheres[i].euler.clone()),
            };
            &acc * &m
        })
    }
}

impl fmt::Display for FactorOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let word: String = self.factors.iter().map(|x| x.letter()).collect();
        let sign = match self.sign {
            SignConvention::Direct => "direct",
            SignConvention::Reversed => "reversed",
        };
        let pole = match self.pole {
            PoleConvention::Incoming => "incoming",
            PoleConvention::Outgoing => "outgoing",
        };
        let dir = match self.direction {
            Direction::LeftToRight => "ltr",
            Direction::RightToLeft => "rtl",
        };
        write!(f, "{word}:{sign}:{pole}:{dir}")
    }
}

impl FromStr for FactorOrder {
    type Err = GluingError;

    /// `WORD:SIGN:POLE:DIR`, e.g. `SOC:direct:incoming:ltr`, or `default`.
    /// The `calibrated` alias is resolved by the caller, which owns the
    /// model list.
    fn from_str(s: &str) -> Result<Self, GluingError> {
        let bad = || GluingError::UnknownConvention(s.to_string());
        if s == "default" {
            return Ok(FactorOrder::default());
        }
        let parts: Vec<&str> = s.split(':').collect();
        let [word, sign, pole, dir] = parts.as_slice() else { return Err(bad()) };
        let factors = PERMUTATIONS
            .into_iter()
            .find(|p| p.iter().map(|f| f.letter()).collect::<String>() == word.to_ascii_uppercase())
            .ok_or_else(bad)?;
        let sign = match *sign {
            "direct" => SignConvention::Direct,
            "reversed" => SignConvention::Reversed,
            _ => return Err(bad()),
        };
        let pole = match *pole {
            "incoming" => PoleConvention::Incoming,
            "outgoing" => PoleConvention::Outgoing,
            _ => return Err(bad()),
        };
        let direction = match *dir {
            "ltr" => Direction::LeftToRight,
            "rtl" => Direction::RightToLeft,
            _ => return Err(bad()),
        };
        Ok(FactorOrder { factors, sign, pole, direction })
    }
}

impl From<FactorOrder> for String {
    fn from(c: FactorOrder) -> String {
        c.to_string()
    }
}

impl TryFrom<String> for FactorOrder {
    type Error = GluingError;

    fn try_from(s: String) -> Result<Self, GluingError> {
        s.parse()
    }
}

/// Product of the per-sphere factors around the loop.
pub fn total_gluing(data: &SingularSetData, convention: &FactorOrder) -> Result<Gl2Matrix, GluingError> {
    if data.exception.is_exception() {
        return Err(GluingError::ExceptionData);
    }
    let t = data.t();
    if t < 3 {
        return Err(GluingError::TooFewSpheres(t));
    }
    let factors: Vec<Gl2Matrix> = (0..t).map(|i| convention.sphere_factor(data, i)).collect();
    let product = match convention.direction {
        Direction::LeftToRight => factors.iter().fold(Gl2Matrix::identity(), |acc, g| &acc * g),
        Direction::RightToLeft => factors.iter().rev().fold(Gl2Matrix::identity(), |acc, g| &acc * g),
    };
    Ok(product)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IncompatibilityReason {
    /// `p > 2`: the gluing must centralise the action, forcing `γ = I`.
    NotIdentityOddP,
    /// `p = 2`, `γ = ±J`: swaps base and fibre of the last bundle.
    BaseFiberSplitViolation,
    /// `p = 2`, `γ = -I`: would make the meridian homologous to its negative.
    MinusIdentityTorsionViolation,
    /// `p = 2`, `γ` outside `{±I, ±J}`.
    NotInNormalizer,
}

impl IncompatibilityReason {
    pub fn explanation(self) -> &'static str {
        match self {
            IncompatibilityReason::NotIdentityOddP => {
                "for p > 2 the gluing must centralise the action, so only the identity is allowed"
            }
            IncompatibilityReason::BaseFiberSplitViolation => {
                "±J exchanges base and fibre, which the last bundle's splitting forbids"
            }
            IncompatibilityReason::MinusIdentityTorsionViolation => {
                "-I makes the meridian homologous to its negative, contradicting torsion-freeness"
            }
            IncompatibilityReason::NotInNormalizer => {
                "for p = 2 the gluing must normalise the action, i.e. lie in {±I, ±J}"
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "reason", rename_all = "snake_case")]
pub enum CompatibilityVerdict {
    /// The boundary of the tubular neighbourhood is a trivial principal
    /// torus bundle.
    TrivialPrincipal,
    Incompatible(IncompatibilityReason),
}

pub fn compatibility(gamma: &Gl2Matrix, p: u64) -> Result<CompatibilityVerdict, GluingError> {
    if !is_prime(p) {
        return Err(GluingError::NotPrime(p));
    }
    use CompatibilityVerdict::*;
    use IncompatibilityReason::*;
    if gamma.is_identity() {
        return Ok(TrivialPrincipal);
    }
    if p > 2 {
        return Ok(Incompatible(NotIdentityOddP));
    }
    let j = Gl2Matrix::quarter_turn();
    Ok(if *gamma == Gl2Matrix::minus_identity() {
        Incompatible(MinusIdentityTorsionViolation)
    } else if *gamma == j || *gamma == j.neg() {
        Incompatible(BaseFiberSplitViolation)
    } else {
        Incompatible(NotInNormalizer)
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CalibrationAttempt {
    pub convention: FactorOrder,
    /// `(model index, γ)` for each model, up to the first that is not `I`.
    pub gammas: Vec<(usize, Gl2Matrix)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no factor order makes every model glue to the identity ({} tried)", .transcript.len())]
pub struct NoConventionFound {
    pub transcript: Vec<CalibrationAttempt>,
}

/// First convention in [`FactorOrder::all`] order under which every model
/// glues to `I`.
pub fn calibrate_convention(models: &[SingularSetData]) -> Result<FactorOrder, NoConventionFound> {
    let mut transcript = Vec::new();
    'conventions: for convention in FactorOrder::all() {
        let mut attempt = CalibrationAttempt { convention, gammas: Vec::new() };
        for (k, model) in models.iter().enumerate() {
            let ok = match total_gluing(model, &convention) {
                Ok(gamma) => {
                    let id = gamma.is_identity();
                    attempt.gammas.push((k, gamma));
                    id
                }
                Err(_) => false,
            };
            if !ok {
                transcript.push(attempt);
                continue 'conventions;
            }
        }
        return Ok(convention);
    }
    Err(NoConventionFound { transcript })
}

/// The models used to calibrate: the `CP²` triangle and the `S²×S²`
/// square.
pub fn standard_models(p: u64) -> Vec<SingularSetData> {
    vec![SingularSetData::cp2_triangle(p), SingularSetData::s2xs2_square(p)]
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GluingReport {
    pub convention: FactorOrder,
    /// Whether `convention` is the one calibration picks on the standard
    /// models. Verdicts under any other convention are convention-dependent.
    pub calibrated: bool,
    pub gamma: Gl2Matrix,
    pub determinant: i64,
    pub verdict: CompatibilityVerdict,
    pub note: String,
}

impl GluingReport {
    pub fn convention_dependent(&self) -> bool {
        !self.calibrated
    }
}

/// Resolves the convention (`None` means calibrate), computes `γ` and the
/// compatibility verdict.
pub fn gluing_report(
    data: &SingularSetData,
    convention: Option<FactorOrder>,
) -> Result<GluingReport, GluingError> {
    let calibrated = calibrate_convention(&standard_models(data.p)).ok();
    let convention = match (convention, calibrated) {
        (Some(c), _) => c,
        (None, Some(c)) => c,
        (None, None) => FactorOrder::default(),
    };
    let is_calibrated = calibrated == Some(convention);
    let gamma = total_gluing(data, &convention)?;
    let verdict = compatibility(&gamma, data.p)?;
    let determinant = if gamma.determinant().is_positive() { 1 } else { -1 };
    let mut note = match (is_calibrated, verdict) {
        (true, CompatibilityVerdict::TrivialPrincipal) => {
            "trivial principal torus bundle: the disk adjunction lifts without obstruction".to_string()
        }
        (true, CompatibilityVerdict::Incompatible(r)) => r.explanation().to_string(),
        (false, _) => format!(
            "convention-dependent: {convention} is not the calibrated convention, so this verdict \
             is not a statement about the manifold"
        ),
    };
    if determinant < 0 && is_calibrated {
        note.push_str(
            "; det γ = -1: the boundary torus bundle would be non-orientable, so this \
             configuration cannot arise from a locally linear action",
        );
    }
    Ok(GluingReport { convention, calibrated: is_calibrated, gamma, determinant, verdict, note })
}
