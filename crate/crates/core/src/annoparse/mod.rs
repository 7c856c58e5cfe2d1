//! Grammars for the strings a text reader returns for annotation patches.
//!
//! Three grammars, one per annotation class (see `docs/grammar.ebnf`):
//!
//! * GD&T frames are pipe-delimited: `⌖|⌀0.1Ⓜ|A|B-C|D`.
//! * Measures are space-delimited: `2x M8x1.25`, `⌀10 ±0.1`, `10 +0.1/-0.05`.
//! * Roughness is `Ra 3.2` with an optional process token.
//!
//! Each parser reports the character offset of the first offending input,
//! and every parsed record has a canonical text form that parses back to
//! an equal record.

mod cursor;
mod gdt;
mod measure;
mod roughness;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::schema::AnnotationClass;

pub use gdt::{
    parse_gdt, Datum, DatumRef, GdtCharacteristic, GdtFrame, MaterialModifier, ToleranceZone,
};
pub use measure::{parse_measure, MeasureKind, MeasureSpec, Qualifier, Tolerance};
pub use roughness::{parse_roughness, RoughnessParameter, RoughnessProcess, RoughnessSpec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Empty,
    UnknownCharacteristic(String),
    CompositeFrame,
    MissingTolerance,
    DatumBeforeTolerance,
    NonPositiveTolerance,
    SphericalWithoutDiameter,
    InvalidDatum(String),
    TooManyDatums(usize),
    DatumsOnFormTolerance(GdtCharacteristic),
    EmptySegment,
    DigitGrouping,
    InvalidNumber(String),
    ToleranceWithoutNominal,
    NegativeNominal,
    NonPositiveNominal,
    InvertedDeviation,
    UnbalancedParenthesis,
    UnknownRoughnessParameter(String),
    NonPositiveRoughness,
    UnexpectedChar { found: char, expected: &'static str },
    UnexpectedEnd { expected: &'static str },
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ParseErrorKind::*;
        match self {
            Empty => write!(f, "empty annotation text"),
            UnknownCharacteristic(s) => write!(f, "unknown characteristic symbol '{s}'"),
            CompositeFrame => write!(
                f,
                "composite frames with more than one characteristic are not supported"
            ),
            MissingTolerance => write!(f, "missing tolerance segment"),
            DatumBeforeTolerance => write!(f, "datum segment before tolerance"),
            NonPositiveTolerance => write!(f, "tolerance value must be positive"),
            SphericalWithoutDiameter => write!(
                f,
                "spherical zone 'S' must be followed by a diameter symbol"
            ),
            InvalidDatum(s) => write!(f, "invalid datum reference '{s}'"),
            TooManyDatums(n) => write!(f, "at most 3 datum references allowed, found {n}"),
            DatumsOnFormTolerance(c) => write!(f, "form tolerance {} takes no datums", c.name()),
            EmptySegment => write!(f, "empty frame segment"),
            DigitGrouping => write!(
                f,
                "digit grouping or decimal comma not accepted; use '.' only"
            ),
            InvalidNumber(s) => write!(f, "invalid number '{s}'"),
            ToleranceWithoutNominal => write!(f, "tolerance without nominal value"),
            NegativeNominal => write!(f, "negative nominal value"),
            NonPositiveNominal => write!(f, "nominal value must be positive"),
            InvertedDeviation => write!(f, "upper deviation is below lower deviation"),
            UnbalancedParenthesis => write!(f, "unbalanced parenthesis"),
            UnknownRoughnessParameter(s) => write!(f, "unknown roughness parameter '{s}'"),
            NonPositiveRoughness => write!(f, "roughness value must be positive"),
            UnexpectedChar { found, expected } => {
                write!(f, "unexpected '{found}', expected {expected}")
            }
            UnexpectedEnd { expected } => write!(f, "unexpected end of text, expected {expected}"),
        }
    }
}

/// A grammar rejection at a character offset into the (NFC-normalized) input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at offset {offset}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub offset: usize,
}

impl ParseError {
    pub(crate) fn new(kind: ParseErrorKind, offset: usize) -> Self {
        Self { kind, offset }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{class} annotation: {source}")]
pub struct AnnotationParseError {
    pub class: AnnotationClass,
    #[source]
    pub source: ParseError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ParsedAnnotation {
    Gdt(GdtFrame),
    Measure(MeasureSpec),
    Roughness(RoughnessSpec),
}

impl ParsedAnnotation {
    pub fn class(&self) -> AnnotationClass {
        match self {
            ParsedAnnotation::Gdt(_) => AnnotationClass::Gdt,
            ParsedAnnotation::Measure(_) => AnnotationClass::Measure,
            ParsedAnnotation::Roughness(_) => AnnotationClass::Roughness,
        }
    }

    /// Flattened key/value view used for field-level scoring.
    pub fn to_fields(&self) -> BTreeMap<String, String> {
        match self {
            ParsedAnnotation::Gdt(g) => g.to_fields(),
            ParsedAnnotation::Measure(m) => m.to_fields(),
            ParsedAnnotation::Roughness(r) => r.to_fields(),
        }
    }
}

pub fn nfc(text: &str) -> String {
    text.nfc().collect()
}

pub fn parse_annotation(
    class: AnnotationClass,
    text: &str,
) -> Result<ParsedAnnotation, AnnotationParseError> {
    let normalized = nfc(text);
    let wrap = |source| AnnotationParseError { class, source };
    match class {
        AnnotationClass::Gdt => parse_gdt(&normalized)
            .map(ParsedAnnotation::Gdt)
            .map_err(wrap),
        AnnotationClass::Measure => parse_measure(&normalized)
            .map(ParsedAnnotation::Measure)
            .map_err(wrap),
        AnnotationClass::Roughness => parse_roughness(&normalized)
            .map(ParsedAnnotation::Roughness)
            .map_err(wrap),
    }
}

pub fn canonical_text(a: &ParsedAnnotation) -> String {
    match a {
        ParsedAnnotation::Gdt(g) => g.canonical_text(),
        ParsedAnnotation::Measure(m) => m.canonical_text(),
        ParsedAnnotation::Roughness(r) => r.canonical_text(),
    }
}

/// Shortest decimal that reads back to the same value.
pub(crate) fn fmt_num(v: f64) -> String {
    format!("{v}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dispatch_by_class() {
        let g = parse_annotation(AnnotationClass::Gdt, "⏥|0.05").unwrap();
        assert_eq!(g.class(), AnnotationClass::Gdt);
        let m = parse_annotation(AnnotationClass::Measure, "R5").unwrap();
        assert_eq!(m.class(), AnnotationClass::Measure);
        let err = parse_annotation(AnnotationClass::Roughness, "⏥|0.05").unwrap_err();
        assert_eq!(err.class, AnnotationClass::Roughness);
    }

    #[test]
    fn bare_number_only_reads_as_measure() {
        assert!(parse_annotation(AnnotationClass::Measure, "5").is_ok());
        assert!(parse_annotation(AnnotationClass::Gdt, "5").is_err());
        assert!(parse_annotation(AnnotationClass::Roughness, "5").is_err());
    }

    #[test]
    fn input_is_nfc_normalized() {
        // A + combining acute composes to one character before parsing
        let err = parse_annotation(AnnotationClass::Gdt, "⌖|0.1|A\u{0301}").unwrap_err();
        assert_eq!(err.source.offset, 6);
    }

    #[test]
    fn error_display_mentions_offset() {
        let err = parse_annotation(AnnotationClass::Roughness, "Rx 1").unwrap_err();
        assert_eq!(
            err.to_string(),
            "roughness annotation: unknown roughness parameter 'Rx' at offset 0"
        );
    }
}
