use std::path::Path;

use edraw_core::schema::{informational_notes, parse_unified, SchemaError};

use crate::output::{read_bytes, Failure};

pub fn validate(input: &Path) -> Result<(), Failure> {
    let doc = parse_unified(&read_bytes(input)?).map_err(|e| match e {
        SchemaError::Violations(v) => Failure {
            code: 1,
            messages: v
                .iter()
                .map(|x| format!("{}: {x}", input.display()))
                .collect(),
        },
        other => Failure::domain(format!("{}: {other}", input.display())),
    })?;
    for note in informational_notes(&doc) {
        println!("note: {note}");
    }
    println!("{}: ok", input.display());
    Ok(())
}
