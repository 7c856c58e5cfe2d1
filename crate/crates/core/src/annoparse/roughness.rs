use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::cursor::Cursor;
use super::{fmt_num, ParseError, ParseErrorKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RoughnessParameter {
    Ra,
    Rz,
    Rq,
    Rt,
}

impl RoughnessParameter {
    pub const ALL: [RoughnessParameter; 4] = [Self::Ra, Self::Rz, Self::Rq, Self::Rt];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Ra => "Ra",
            Self::Rz => "Rz",
            Self::Rq => "Rq",
            Self::Rt => "Rt",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.as_str().eq_ignore_ascii_case(s))
    }
}

/// Manufacturing-process requirement carried by the texture symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoughnessProcess {
    Any,
    MaterialRemovalRequired,
    MaterialRemovalProhibited,
}

impl RoughnessProcess {
    fn token(self) -> &'static str {
        match self {
            Self::Any => "APA",
            Self::MaterialRemovalRequired => "MRR",
            Self::MaterialRemovalProhibited => "NMR",
        }
    }

    fn name(self) -> &'static str {
        match self {
            Self::Any => "any",
            Self::MaterialRemovalRequired => "material_removal_required",
            Self::MaterialRemovalProhibited => "material_removal_prohibited",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoughnessSpec {
    pub parameter: RoughnessParameter,
    /// Micrometres.
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub process: Option<RoughnessProcess>,
}

impl RoughnessSpec {
    pub fn canonical_text(&self) -> String {
        let mut s = format!("{} {}", self.parameter.as_str(), fmt_num(self.value));
        if let Some(p) = self.process {
            s.push(' ');
            s.push_str(p.token());
        }
        s
    }

    pub(crate) fn to_fields(&self) -> BTreeMap<String, String> {
        let mut f = BTreeMap::new();
        f.insert("parameter".into(), self.parameter.as_str().into());
        f.insert("value".into(), fmt_num(self.value));
        if let Some(p) = self.process {
            f.insert("process".into(), p.name().into());
        }
        f
    }
}

fn process(cur: &mut Cursor) -> Option<RoughnessProcess> {
    if cur.eat('√') || cur.eat('✓') {
        return Some(RoughnessProcess::Any);
    }
    let table = [
        ("APA", RoughnessProcess::Any),
        ("ANY", RoughnessProcess::Any),
        ("MRR", RoughnessProcess::MaterialRemovalRequired),
        ("NMR", RoughnessProcess::MaterialRemovalProhibited),
    ];
    for (word, p) in table {
        let start = cur.pos();
        if cur.eat_word(word, true) && !matches!(cur.peek(), Some(c) if c.is_alphanumeric()) {
            return Some(p);
        }
        cur.set_pos(start);
    }
    None
}

pub fn parse_roughness(text: &str) -> Result<RoughnessSpec, ParseError> {
    let mut cur = Cursor::new(text);
    cur.skip_ws();
    if cur.at_end() {
        return Err(ParseError::new(ParseErrorKind::Empty, 0));
    }
    let name_at = cur.pos();
    let mut name = String::new();
    while let Some(c) = cur.peek().filter(|c| c.is_alphabetic()) {
        name.push(c);
        cur.bump();
    }
    if name.is_empty() {
        return Err(cur.unexpected("roughness parameter"));
    }
    let parameter = RoughnessParameter::from_name(&name).ok_or_else(|| {
        ParseError::new(
            ParseErrorKind::UnknownRoughnessParameter(name.clone()),
            name_at,
        )
    })?;
    cur.skip_ws();
    if cur.eat('=') {
        cur.skip_ws();
    }
    let value_at = cur.pos();
    if matches!(cur.peek(), Some('-' | '−')) {
        return Err(ParseError::new(
            ParseErrorKind::NonPositiveRoughness,
            value_at,
        ));
    }
    let Some(value) = cur.number()? else {
        return Err(cur.unexpected("roughness value"));
    };
    if value <= 0.0 {
        return Err(ParseError::new(
            ParseErrorKind::NonPositiveRoughness,
            value_at,
        ));
    }
    cur.skip_ws();
    // optional unit
    let unit_at = cur.pos();
    if !(cur.eat_word("µm", false) || cur.eat_word("μm", false) || cur.eat_word("um", true)) {
        cur.set_pos(unit_at);
    }
    cur.skip_ws();
    let process = process(&mut cur);
    cur.skip_ws();
    if !cur.at_end() {
        return Err(cur.unexpected("end of roughness"));
    }
    Ok(RoughnessSpec {
        parameter,
        value,
        process,
    })
}
