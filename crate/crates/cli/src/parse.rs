use edraw_core::canonical::to_canonical_bytes;
use edraw_core::{parse_annotation, AnnotationClass};

use crate::output::{emit, Failure};

pub fn parse(class: AnnotationClass, text: &str) -> Result<(), Failure> {
    let parsed = parse_annotation(class, text).map_err(Failure::domain)?;
    let value = serde_json::to_value(&parsed).expect("parsed annotation serializes");
    emit(None, &to_canonical_bytes(&value))
}
