//! From certified splittings to manifolds: homeomorphism types and
//! equivariant connected-sum decompositions.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forms::{self, Parity, SymmetricForm};
use crate::plumbing::{
    self, Cut, ExceptionFlag, PlumbingError, Sign, SingularSetData, ValidationReport, Verdict,
};
use crate::reduction::{self, BlockCounts, CongruenceCertificate, ReductionError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KsFlag {
    Zero,
    /// The fake projective plane cannot be ruled out.
    PossiblyChern,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomeoType {
    /// Copies of `ℂP²`, `−ℂP²` and `S²×S²`.
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub ks: KsFlag,
    pub exception_note: Option<String>,
}

impl HomeoType {
    pub fn counts(&self) -> BlockCounts {
        BlockCounts { plus: self.a, minus: self.b, hyperbolic: self.c }
    }

    pub fn b2(&self) -> usize {
        self.a + self.b + 2 * self.c
    }

    pub fn signature(&self) -> i64 {
        self.a as i64 - self.b as i64
    }
}

impl fmt::Display for HomeoType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ks == KsFlag::PossiblyChern {
            let sign = if self.b > 0 { "−" } else { "" };
            return write!(f, "{sign}ℂP² or {sign}(Chern manifold)");
        }
        let mut parts = Vec::new();
        parts.extend(std::iter::repeat_n(Summand::CP2, self.a));
        parts.extend(std::iter::repeat_n(Summand::NegCP2, self.b));
        parts.extend(std::iter::repeat_n(Summand::S2xS2, self.c));
        if parts.is_empty() {
            parts.push(Summand::S4);
        }
        f.write_str(&join(&parts))
    }
}

fn join(parts: &[Summand]) -> String {
    parts.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" # ")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error("certificate does not verify")]
    Unverified,
    #[error("exception case {0:?} has no equivariant decomposition")]
    ExceptionCase(ExceptionFlag),
    #[error("configuration is not valid: {0}")]
    Invalid(String),
    #[error("no unimodular cut (impossible for valid data)")]
    NoUnimodularCut,
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Plumbing(#[from] PlumbingError),
}

/// The intersection form of an exception case: `(±1)` for the pseudofree
/// cases, `H` for the fixed-point-free one.
pub fn exception_form(flag: ExceptionFlag, orientation: Sign) -> Option<SymmetricForm> {
    match flag {
        ExceptionFlag::None => None,
        ExceptionFlag::PseudofreeP3B1 | ExceptionFlag::PseudofreeP3Chern => {
            Some(SymmetricForm::diagonal(&[orientation.value()]).unwrap())
        }
        ExceptionFlag::FixedPointFreeP2Hyperbolic => Some(SymmetricForm::hyperbolic()),
    }
}

/// Counts blocks of a verified certificate, trading `H` for `(+1) ⊕ (−1)`
/// when odd blocks are present.
pub fn homeo_type(cert: &CongruenceCertificate, data: &SingularSetData) -> Result<HomeoType, ClassifyError> {
    if !cert.verify() {
        return Err(ClassifyError::Unverified);
    }
    let counts = cert.counts().canonical();
    let ks = match data.exception {
        ExceptionFlag::PseudofreeP3B1 | ExceptionFlag::PseudofreeP3Chern
            if data.p == 3 && counts.rank() == 1 =>
        {
            KsFlag::PossiblyChern
        }
        _ => KsFlag::Zero,
    };
    Ok(HomeoType {
        a: counts.plus,
        b: counts.minus,
        c: counts.hyperbolic,
        ks,
        exception_note: data.exception.note().map(str::to_string),
    })
}

/// A unimodular cut and the certificate for its (block-summed) chain form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutCertificate {
    pub cut: Cut,
    pub certificate: CongruenceCertificate,
    pub verified: bool,
}

/// Certifies every unimodular cut: adjacent pairs first, then the rest,
/// each group in index order.
pub fn certify_cuts(data: &SingularSetData) -> Result<Vec<CutCertificate>, ClassifyError> {
    if data.exception.is_exception() {
        return Err(ClassifyError::ExceptionCase(data.exception));
    }
    let report = plumbing::validate(data);
    if let Verdict::Invalid(why) = &report.verdict {
        return Err(ClassifyError::Invalid(why.clone()));
    }
    let mut order: Vec<_> = report.unimodular_cuts().collect();
    order.sort_by_key(|c| (!c.adjacent, c.i, c.j));
    order
        .into_iter()
        .map(|c| {
            let cut = plumbing::cut_redundant(data, c.i, c.j)?;
            let certificate = reduction::reduce_chain(&cut.form())?;
            let verified = certificate.verify();
            Ok(CutCertificate { cut, certificate, verified })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Summand {
    S4,
    S2xS2,
    CP2,
    NegCP2,
    /// `ℂP² # −ℂP²` kept whole: it carries torus actions with no
    /// equivariant splitting.
    CP2NegCP2,
}

impl Summand {
    pub fn counts(self) -> BlockCounts {
        match self {
            Summand::S4 => BlockCounts::default(),
            Summand::S2xS2 => BlockCounts { plus: 0, minus: 0, hyperbolic: 1 },
            Summand::CP2 => BlockCounts { plus: 1, minus: 0, hyperbolic: 0 },
            Summand::NegCP2 => BlockCounts { plus: 0, minus: 1, hyperbolic: 0 },
            Summand::CP2NegCP2 => BlockCounts { plus: 1, minus: 1, hyperbolic: 0 },
        }
    }
}

impl fmt::Display for Summand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Summand::S4 => "S⁴",
            Summand::S2xS2 => "S²×S²",
            Summand::CP2 => "ℂP²",
            Summand::NegCP2 => "(−ℂP²)",
            Summand::CP2NegCP2 => "(ℂP² # −ℂP²)",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CutStrategy {
    /// The two removed spheres are neighbours: one chain remains.
    AdjacentPair,
    /// Only non-adjacent cuts are unimodular: two chains, split in turn.
    TwoStep,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivariantDecomposition {
    pub summands: Vec<Summand>,
    pub leading_s4: bool,
    pub cut_strategy: CutStrategy,
    pub cut: (usize, usize),
    /// One certificate per remaining chain.
    pub piece_certificates: Vec<CongruenceCertificate>,
    pub notes: Vec<String>,
}

impl EquivariantDecomposition {
    pub fn counts(&self) -> BlockCounts {
        self.summands.iter().fold(BlockCounts::default(), |acc, s| {
            let c = s.counts();
            BlockCounts {
                plus: acc.plus + c.plus,
                minus: acc.minus + c.minus,
                hyperbolic: acc.hyperbolic + c.hyperbolic,
            }
        })
    }
}

impl fmt::Display for EquivariantDecomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&join(&self.summands))
    }
}

const LEADING_S4_NOTE: &str = "the action on the leading S⁴ summand need not be standard";
const CP2_NEG_CP2_NOTE: &str = "an odd rank-2 signature-0 chain is kept as the atom ℂP² # −ℂP²; \
    splitting it as ℂP² # (−ℂP²) is the alternative presentation";

/// `S⁴ # M₁ # … # M_k` from the first adjacent unimodular cut, or from a
/// non-adjacent one when no adjacent cut works.
pub fn equivariant_decomposition(
    data: &SingularSetData,
    certs: &[CutCertificate],
) -> Result<EquivariantDecomposition, ClassifyError> {
    if data.exception.is_exception() {
        return Err(ClassifyError::ExceptionCase(data.exception));
    }
    let chosen = certs
        .iter()
        .filter(|c| c.verified)
        .find(|c| c.cut.adjacent)
        .or_else(|| certs.iter().find(|c| c.verified))
        .ok_or(ClassifyError::NoUnimodularCut)?;
    let cut_strategy =
        if chosen.cut.adjacent { CutStrategy::AdjacentPair } else { CutStrategy::TwoStep };

    let mut summands = vec![Summand::S4];
    let mut notes = vec![LEADING_S4_NOTE.to_string()];
    let mut piece_certificates = Vec::new();
    for piece in &chosen.cut.pieces {
        let cert = reduction::reduce_chain(&piece.form)?;
        let inv = forms::invariants(&piece.form);
        if inv.parity == Parity::Odd && inv.rank == 2 && inv.signature == 0 {
            summands.push(Summand::CP2NegCP2);
            notes.push(CP2_NEG_CP2_NOTE.to_string());
        } else {
            let counts = cert.counts().canonical();
            summands.extend(std::iter::repeat_n(Summand::CP2, counts.plus));
            summands.extend(std::iter::repeat_n(Summand::NegCP2, counts.minus));
            summands.extend(std::iter::repeat_n(Summand::S2xS2, counts.hyperbolic));
        }
        piece_certificates.push(cert);
    }
    Ok(EquivariantDecomposition {
        summands,
        leading_s4: true,
        cut_strategy,
        cut: chosen.cut.pair,
        piece_certificates,
        notes,
    })
}

/// Everything the pipeline derives from one configuration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub validation: ValidationReport,
    pub certificates: Vec<CutCertificate>,
    /// For exceptions: the certificate of the exception's own form.
    pub exception_certificate: Option<CongruenceCertificate>,
    pub homeo_type: HomeoType,
    pub description: String,
    /// `homeo_type` agrees across every unimodular cut.
    pub cut_independent: bool,
    pub decomposition: Option<EquivariantDecomposition>,
    /// Summands and homeomorphism type describe the same block multiset.
    pub decomposition_consistent: Option<bool>,
}

pub fn classify(data: &SingularSetData) -> Result<Classification, ClassifyError> {
    let validation = plumbing::validate(data);
    if let Verdict::Invalid(why) = &validation.verdict {
        return Err(ClassifyError::Invalid(why.clone()));
    }
    if data.exception.is_exception() {
        let form = exception_form(data.exception, data.orientation).expect("flag is set");
        let cert = reduction::reduce(&form)?;
        let homeo = homeo_type(&cert, data)?;
        return Ok(Classification {
            validation,
            certificates: Vec::new(),
            exception_certificate: Some(cert),
            description: homeo.to_string(),
            homeo_type: homeo,
            cut_independent: true,
            decomposition: None,
            decomposition_consistent: None,
        });
    }
    let certificates = certify_cuts(data)?;
    let first = certificates.first().ok_or(ClassifyError::NoUnimodularCut)?;
    let homeo = homeo_type(&first.certificate, data)?;
    let mut cut_independent = true;
    for c in &certificates[1..] {
        cut_independent &= homeo_type(&c.certificate, data)? == homeo;
    }
    let decomposition = equivariant_decomposition(data, &certificates)?;
    let consistent = decomposition.counts().canonical() == homeo.counts().canonical();
    Ok(Classification {
        validation,
        description: decomposition.to_string(),
        certificates,
        exception_certificate: None,
        homeo_type: homeo,
        cut_independent,
        decomposition: Some(decomposition),
        decomposition_consistent: Some(consistent),
    })
}

/// Valid configurations at this size whose unimodular cuts are all
/// non-adjacent, i.e. that need the two-step splitting.
pub fn two_step_configurations(b2: usize, euler_bound: u64) -> impl Iterator<Item = SingularSetData> {
    plumbing::SingularDataIter::new(b2, euler_bound, plumbing::DEFAULT_PRIME).filter(|d| {
        let report = plumbing::validate(d);
        let all_far = report.unimodular_cuts().all(|c| !c.adjacent);
        all_far
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduction::Block;

    fn cert_for(rows: &[Vec<i64>]) -> CongruenceCertificate {
        reduction::reduce(&SymmetricForm::from_rows(rows).unwrap()).unwrap()
    }

    #[test]
    fn homeo_type_examples() {
        let tri = SingularSetData::cp2_triangle(3);
        let chain = cert_for(&[vec![1, 1, 0], vec![1, 1, 1], vec![0, 1, 1]]);
        assert_eq!(chain.blocks, vec![Block::PlusOne, Block::PlusOne, Block::MinusOne]);
        let h = homeo_type(&chain, &tri).unwrap();
        assert_eq!((h.a, h.b, h.c, h.ks), (2, 1, 0, KsFlag::Zero));
        assert_eq!(h.to_string(), "ℂP² # ℂP² # (−ℂP²)");

        let hyp = homeo_type(&cert_for(&[vec![0, 1], vec![1, 0]]), &tri).unwrap();
        assert_eq!((hyp.a, hyp.b, hyp.c), (0, 0, 1));
        assert_eq!(hyp.to_string(), "S²×S²");

        let pseudo = SingularSetData::exception(ExceptionFlag::PseudofreeP3B1, Sign::Minus);
        let h = homeo_type(&cert_for(&[vec![-1]]), &pseudo).unwrap();
        assert_eq!(h.ks, KsFlag::PossiblyChern);
        assert!(h.exception_note.is_some());
        assert_eq!(h.to_string(), "−ℂP² or −(Chern manifold)");
    }

    #[test]
    fn unverified_certificates_are_rejected() {
        let mut cert = cert_for(&[vec![0, 1], vec![1, 0]]);
        cert.blocks = vec![Block::PlusOne, Block::MinusOne];
        assert_eq!(
            homeo_type(&cert, &SingularSetData::s2xs2_square(3)),
            Err(ClassifyError::Unverified)
        );
    }

    #[test]
    fn standard_models_decompose() {
        let tri = classify(&SingularSetData::cp2_triangle(3)).unwrap();
        let d = tri.decomposition.as_ref().unwrap();
        assert_eq!(d.to_string(), "S⁴ # ℂP²");
        assert_eq!(d.cut_strategy, CutStrategy::AdjacentPair);
        assert!(tri.cut_independent);

        let sq = classify(&SingularSetData::s2xs2_square(3)).unwrap();
        let d = sq.decomposition.as_ref().unwrap();
        assert_eq!(d.to_string(), "S⁴ # S²×S²");
        assert_eq!(d.cut_strategy, CutStrategy::AdjacentPair);
        assert_eq!(sq.decomposition_consistent, Some(true));
    }

    #[test]
    fn exceptions_have_no_decomposition() {
        for flag in [
            ExceptionFlag::PseudofreeP3B1,
            ExceptionFlag::PseudofreeP3Chern,
            ExceptionFlag::FixedPointFreeP2Hyperbolic,
        ] {
            let data = SingularSetData::exception(flag, Sign::Plus);
            let c = classify(&data).unwrap();
            assert!(c.decomposition.is_none());
            assert!(c.homeo_type.exception_note.is_some());
            assert_eq!(
                equivariant_decomposition(&data, &[]),
                Err(ClassifyError::ExceptionCase(flag))
            );
        }
    }

    #[test]
    fn two_step_cuts_give_the_same_summands() {
        // Every small valid loop has an adjacent unimodular cut ...
        assert_eq!(two_step_configurations(4, 3).count(), 0);
        // ... so exercise the two-chain path by withholding the adjacent ones.
        let mut exercised = 0;
        for data in plumbing::enumerate_singular_data(4, 2) {
            let certs = certify_cuts(&data).unwrap();
            let far: Vec<CutCertificate> = certs.iter().filter(|c| !c.cut.adjacent).cloned().collect();
            if far.is_empty() {
                continue;
            }
            let two = equivariant_decomposition(&data, &far).unwrap();
            assert_eq!(two.cut_strategy, CutStrategy::TwoStep);
            assert_eq!(two.piece_certificates.len(), 2);
            let one = equivariant_decomposition(&data, &certs).unwrap();
            assert_eq!(one.cut_strategy, CutStrategy::AdjacentPair);
            assert_eq!(two.counts().canonical(), one.counts().canonical());
            exercised += 1;
        }
        assert!(exercised > 0);
    }

    #[test]
    fn invalid_configurations_are_refused() {
        let bad = SingularSetData::from_pairs(3, &[(2, 1), (2, 1), (2, 1)]).unwrap();
        assert!(matches!(classify(&bad), Err(ClassifyError::Invalid(_))));
    }
}
