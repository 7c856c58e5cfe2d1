use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::cursor::Cursor;
use super::{fmt_num, ParseError, ParseErrorKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GdtCharacteristic {
    Straightness,
    Flatness,
    Circularity,
    Cylindricity,
    ProfileOfLine,
    ProfileOfSurface,
    Angularity,
    Perpendicularity,
    Parallelism,
    Position,
    Concentricity,
    Symmetry,
    CircularRunout,
    TotalRunout,
}

impl GdtCharacteristic {
    pub const ALL: [GdtCharacteristic; 14] = [
        Self::Straightness,
        Self::Flatness,
        Self::Circularity,
        Self::Cylindricity,
        Self::ProfileOfLine,
        Self::ProfileOfSurface,
        Self::Angularity,
        Self::Perpendicularity,
        Self::Parallelism,
        Self::Position,
        Self::Concentricity,
        Self::Symmetry,
        Self::CircularRunout,
        Self::TotalRunout,
    ];

    pub fn symbol(self) -> char {
        match self {
            Self::Straightness => '⏤',
            Self::Flatness => '⏥',
            Self::Circularity => '○',
            Self::Cylindricity => '⌭',
            Self::ProfileOfLine => '⌒',
            Self::ProfileOfSurface => '⌓',
            Self::Angularity => '∠',
            Self::Perpendicularity => '⊥',
            Self::Parallelism => '∥',
            Self::Position => '⌖',
            Self::Concentricity => '◎',
            Self::Symmetry => '⌯',
            Self::CircularRunout => '↗',
            Self::TotalRunout => '⌰',
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Straightness => "straightness",
            Self::Flatness => "flatness",
            Self::Circularity => "circularity",
            Self::Cylindricity => "cylindricity",
            Self::ProfileOfLine => "profile_of_line",
            Self::ProfileOfSurface => "profile_of_surface",
            Self::Angularity => "angularity",
            Self::Perpendicularity => "perpendicularity",
            Self::Parallelism => "parallelism",
            Self::Position => "position",
            Self::Concentricity => "concentricity",
            Self::Symmetry => "symmetry",
            Self::CircularRunout => "circular_runout",
            Self::TotalRunout => "total_runout",
        }
    }

    /// Canonical symbol plus the look-alike code points readers emit.
    pub fn from_symbol(c: char) -> Option<Self> {
        let found = Self::ALL.into_iter().find(|k| k.symbol() == c);
        found.or(match c {
            '⟂' => Some(Self::Perpendicularity),
            '◯' => Some(Self::Circularity),
            '⫽' => Some(Self::Parallelism),
            _ => None,
        })
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Form tolerances never reference datums.
    pub fn is_form(self) -> bool {
        matches!(
            self,
            Self::Straightness | Self::Flatness | Self::Circularity | Self::Cylindricity
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaterialModifier {
    /// Ⓜ, maximum material condition
    Mmc,
    /// Ⓛ, least material condition
    Lmc,
    /// Ⓢ, regardless of feature size
    Rfs,
}

impl MaterialModifier {
    pub fn symbol(self) -> char {
        match self {
            Self::Mmc => 'Ⓜ',
            Self::Lmc => 'Ⓛ',
            Self::Rfs => 'Ⓢ',
        }
    }

    fn letter(self) -> &'static str {
        match self {
            Self::Mmc => "M",
            Self::Lmc => "L",
            Self::Rfs => "S",
        }
    }
}

fn modifier(cur: &mut Cursor) -> Option<MaterialModifier> {
    match cur.peek() {
        Some('Ⓜ') => {
            cur.bump();
            Some(MaterialModifier::Mmc)
        }
        Some('Ⓛ') => {
            cur.bump();
            Some(MaterialModifier::Lmc)
        }
        Some('Ⓢ') => {
            cur.bump();
            Some(MaterialModifier::Rfs)
        }
        Some('(') => {
            for m in [
                MaterialModifier::Mmc,
                MaterialModifier::Lmc,
                MaterialModifier::Rfs,
            ] {
                let start = cur.pos();
                if cur.eat_word(&format!("({})", m.letter()), false) {
                    return Some(m);
                }
                cur.set_pos(start);
            }
            None
        }
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToleranceZone {
    /// Total width between two parallel lines or planes.
    Width,
    /// Cylindrical zone, `⌀` prefix.
    Diameter,
    /// Spherical zone, `S⌀` prefix.
    SphericalDiameter,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DatumRef {
    pub primary: char,
    /// Second letter of a common datum such as `A-B`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secondary: Option<char>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Datum {
    pub reference: DatumRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modifier: Option<MaterialModifier>,
}

impl Datum {
    fn text(&self) -> String {
        let mut s = String::new();
        s.push(self.reference.primary);
        if let Some(b) = self.reference.secondary {
            s.push('-');
            s.push(b);
        }
        if let Some(m) = self.modifier {
            s.push(m.symbol());
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GdtFrame {
    pub characteristic: GdtCharacteristic,
    pub zone: ToleranceZone,
    pub tolerance_value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub material_modifier: Option<MaterialModifier>,
    #[serde(default)]
    pub datums: Vec<Datum>,
}

impl GdtFrame {
    pub fn canonical_text(&self) -> String {
        let mut s = String::new();
        s.push(self.characteristic.symbol());
        s.push('|');
        s.push_str(&self.tolerance_text());
        for d in &self.datums {
            s.push('|');
            s.push_str(&d.text());
        }
        s
    }

    fn tolerance_text(&self) -> String {
        let mut s = String::new();
        match self.zone {
            ToleranceZone::Width => {}
            ToleranceZone::Diameter => s.push('⌀'),
            ToleranceZone::SphericalDiameter => s.push_str("S⌀"),
        }
        s.push_str(&fmt_num(self.tolerance_value));
        if let Some(m) = self.material_modifier {
            s.push(m.symbol());
        }
        s
    }

    pub(crate) fn to_fields(&self) -> BTreeMap<String, String> {
        let mut f = BTreeMap::new();
        f.insert("characteristic".into(), self.characteristic.name().into());
        f.insert("tolerance".into(), self.tolerance_text());
        for (i, d) in self.datums.iter().enumerate() {
            f.insert(format!("datum_{}", i + 1), d.text());
        }
        f
    }
}

fn is_datum_letter(c: char) -> bool {
    c.is_ascii_uppercase() && !matches!(c, 'I' | 'O' | 'Q')
}

/// One `|`-delimited segment with surrounding whitespace trimmed.
struct Segment {
    text: String,
    /// Character offset of the first non-blank character.
    offset: usize,
    /// Offset just past the segment, for "missing" diagnostics.
    end: usize,
}

fn segments(text: &str) -> Vec<Segment> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut start = 0;
    for i in 0..=chars.len() {
        if i == chars.len() || chars[i] == '|' {
            let raw = &chars[start..i];
            let lead = raw.iter().take_while(|c| c.is_whitespace()).count();
            let trail = raw.iter().rev().take_while(|c| c.is_whitespace()).count();
            let body: String = if lead >= raw.len() {
                String::new()
            } else {
                raw[lead..raw.len() - trail].iter().collect()
            };
            out.push(Segment {
                text: body,
                offset: start + lead.min(raw.len()),
                end: i,
            });
            start = i + 1;
        }
    }
    out
}

fn parse_datum(seg: &Segment) -> Result<Datum, ParseError> {
    let mut cur = Cursor::new(&seg.text);
    let invalid = || ParseError::new(ParseErrorKind::InvalidDatum(seg.text.clone()), seg.offset);
    let primary = cur
        .bump()
        .filter(|&c| is_datum_letter(c))
        .ok_or_else(invalid)?;
    let secondary = if cur.eat('-') {
        Some(
            cur.bump()
                .filter(|&c| is_datum_letter(c))
                .ok_or_else(invalid)?,
        )
    } else {
        None
    };
    cur.skip_ws();
    let modifier = modifier(&mut cur);
    if !cur.at_end() {
        return Err(invalid());
    }
    Ok(Datum {
        reference: DatumRef { primary, secondary },
        modifier,
    })
}

fn looks_like_datum(seg: &Segment) -> bool {
    seg.text.chars().next().is_some_and(is_datum_letter) && parse_datum(seg).is_ok()
}

fn parse_tolerance(
    seg: &Segment,
) -> Result<(ToleranceZone, f64, Option<MaterialModifier>), ParseError> {
    let mut cur = Cursor::new(&seg.text);
    let at = |local: usize| seg.offset + local;
    let relocate = |e: ParseError| ParseError::new(e.kind, seg.offset + e.offset);

    let spherical_at = cur.pos();
    let spherical = cur.eat('S');
    let diameter = eat_diameter(&mut cur);
    cur.skip_ws();
    if spherical && !diameter {
        return Err(ParseError::new(
            ParseErrorKind::SphericalWithoutDiameter,
            at(spherical_at),
        ));
    }
    let zone = match (spherical, diameter) {
        (true, _) => ToleranceZone::SphericalDiameter,
        (false, true) => ToleranceZone::Diameter,
        (false, false) => ToleranceZone::Width,
    };
    let num_at = cur.pos();
    if matches!(cur.peek(), Some('-' | '−')) {
        return Err(ParseError::new(
            ParseErrorKind::NonPositiveTolerance,
            at(num_at),
        ));
    }
    let value = match cur.number().map_err(relocate)? {
        Some(v) => v,
        None => return Err(relocate(cur.unexpected("tolerance value"))),
    };
    if value <= 0.0 {
        return Err(ParseError::new(
            ParseErrorKind::NonPositiveTolerance,
            at(num_at),
        ));
    }
    cur.skip_ws();
    let m = modifier(&mut cur);
    if !cur.at_end() {
        return Err(relocate(cur.unexpected("end of tolerance segment")));
    }
    Ok((zone, value, m))
}

pub(crate) fn eat_diameter(cur: &mut Cursor) -> bool {
    if cur.eat_any(&['⌀', 'Ø', 'ø', '∅']).is_some() {
        return true;
    }
    cur.eat_word("dia", true)
}

pub fn parse_gdt(text: &str) -> Result<GdtFrame, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError::new(ParseErrorKind::Empty, 0));
    }
    let segs = segments(text);

    // any characteristic symbol past the first one means a composite frame
    let mut symbols = text
        .chars()
        .enumerate()
        .filter(|(_, c)| GdtCharacteristic::from_symbol(*c).is_some());
    if let (Some(_), Some((second, _))) = (symbols.next(), symbols.next()) {
        return Err(ParseError::new(ParseErrorKind::CompositeFrame, second));
    }

    let head = &segs[0];
    let characteristic = head
        .text
        .chars()
        .next()
        .filter(|_| head.text.chars().count() == 1)
        .and_then(GdtCharacteristic::from_symbol)
        .or_else(|| GdtCharacteristic::from_name(&head.text.to_lowercase()))
        .ok_or_else(|| {
            ParseError::new(
                ParseErrorKind::UnknownCharacteristic(head.text.clone()),
                head.offset,
            )
        })?;

    let Some(tol) = segs.get(1) else {
        return Err(ParseError::new(ParseErrorKind::MissingTolerance, head.end));
    };
    if tol.text.is_empty() {
        return Err(ParseError::new(
            ParseErrorKind::MissingTolerance,
            tol.offset,
        ));
    }
    if looks_like_datum(tol) {
        return Err(ParseError::new(
            ParseErrorKind::DatumBeforeTolerance,
            tol.offset,
        ));
    }
    let (zone, tolerance_value, material_modifier) = parse_tolerance(tol)?;

    let mut datums = Vec::new();
    for (i, seg) in segs[2..].iter().enumerate() {
        if seg.text.is_empty() {
            return Err(ParseError::new(ParseErrorKind::EmptySegment, seg.offset));
        }
        if i == 3 {
            return Err(ParseError::new(
                ParseErrorKind::TooManyDatums(segs.len() - 2),
                seg.offset,
            ));
        }
        let datum = parse_datum(seg)?;
        if characteristic.is_form() {
            return Err(ParseError::new(
                ParseErrorKind::DatumsOnFormTolerance(characteristic),
                seg.offset,
            ));
        }
        datums.push(datum);
    }

    Ok(GdtFrame {
        characteristic,
        zone,
        tolerance_value,
        material_modifier,
        datums,
    })
}
