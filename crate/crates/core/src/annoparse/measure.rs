use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::cursor::Cursor;
use super::gdt::eat_diameter;
use super::{fmt_num, ParseError, ParseErrorKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    Linear,
    Diameter,
    SphericalDiameter,
    Radius,
    SphericalRadius,
    Square,
    ThreadMetric,
    Angular,
    Chamfer,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 9] = [
        Self::Linear,
        Self::Diameter,
        Self::SphericalDiameter,
        Self::Radius,
        Self::SphericalRadius,
        Self::Square,
        Self::ThreadMetric,
        Self::Angular,
        Self::Chamfer,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Linear => "linear",
            Self::Diameter => "diameter",
            Self::SphericalDiameter => "spherical_diameter",
            Self::Radius => "radius",
            Self::SphericalRadius => "spherical_radius",
            Self::Square => "square",
            Self::ThreadMetric => "thread_metric",
            Self::Angular => "angular",
            Self::Chamfer => "chamfer",
        }
    }

    fn prefix(self) -> &'static str {
        match self {
            Self::Diameter => "⌀",
            Self::SphericalDiameter => "S⌀",
            Self::Radius => "R",
            Self::SphericalRadius => "SR",
            Self::Square => "□",
            Self::ThreadMetric => "M",
            Self::Linear | Self::Angular | Self::Chamfer => "",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Tolerance {
    None,
    /// `±value`
    Symmetric {
        value: f64,
    },
    /// Signed deviations from nominal, `+upper/-lower`.
    Asymmetric {
        upper: f64,
        lower: f64,
    },
    /// ISO fit or thread tolerance class such as `H7` or `6g`.
    FitClass {
        class: String,
    },
}

/// Hole-feature symbols kept as a note on the measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Qualifier {
    Counterbore,
    Countersink,
    Depth,
}

impl Qualifier {
    pub fn symbol(self) -> char {
        match self {
            Self::Counterbore => '⌴',
            Self::Countersink => '⌵',
            Self::Depth => '↧',
        }
    }

    fn from_symbol(c: char) -> Option<Self> {
        match c {
            '⌴' => Some(Self::Counterbore),
            '⌵' => Some(Self::Countersink),
            '↧' => Some(Self::Depth),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Self::Counterbore => "counterbore",
            Self::Countersink => "countersink",
            Self::Depth => "depth",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<u32>,
    pub kind: MeasureKind,
    /// Length in drawing units, or degrees for angular measures. For a
    /// chamfer this is the leg length.
    pub nominal: f64,
    pub tolerance: Tolerance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thread_pitch: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chamfer_angle: Option<f64>,
    #[serde(default)]
    pub reference: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qualifier: Option<Qualifier>,
}

fn signed_text(v: f64) -> String {
    if v > 0.0 {
        format!("+{}", fmt_num(v))
    } else if v < 0.0 {
        format!("-{}", fmt_num(-v))
    } else {
        "0".to_string()
    }
}

impl MeasureSpec {
    pub fn canonical_text(&self) -> String {
        let mut s = String::new();
        if let Some(n) = self.count {
            s.push_str(&format!("{n}x "));
        }
        if self.reference {
            s.push('(');
        }
        if let Some(q) = self.qualifier {
            s.push(q.symbol());
        }
        s.push_str(self.kind.prefix());
        s.push_str(&fmt_num(self.nominal));
        match self.kind {
            MeasureKind::ThreadMetric => {
                if let Some(p) = self.thread_pitch {
                    s.push('x');
                    s.push_str(&fmt_num(p));
                }
                if let Tolerance::FitClass { class } = &self.tolerance {
                    s.push('-');
                    s.push_str(class);
                }
            }
            MeasureKind::Angular => s.push('°'),
            MeasureKind::Chamfer => {
                s.push_str(" x ");
                s.push_str(&fmt_num(self.chamfer_angle.unwrap_or(45.0)));
                s.push('°');
            }
            _ => {}
        }
        if self.kind != MeasureKind::ThreadMetric {
            let tol = self.tolerance_text();
            if !tol.is_empty() {
                s.push(' ');
                s.push_str(&tol);
            }
        }
        if self.reference {
            s.push(')');
        }
        s
    }

    fn tolerance_text(&self) -> String {
        let deg = if self.kind == MeasureKind::Angular {
            "°"
        } else {
            ""
        };
        match &self.tolerance {
            Tolerance::None => String::new(),
            Tolerance::Symmetric { value } => format!("±{}{deg}", fmt_num(*value)),
            Tolerance::Asymmetric { upper, lower } => {
                format!("{}{deg}/{}{deg}", signed_text(*upper), signed_text(*lower))
            }
            Tolerance::FitClass { class } => class.clone(),
        }
    }

    pub(crate) fn to_fields(&self) -> BTreeMap<String, String> {
        let mut f = BTreeMap::new();
        f.insert("kind".into(), self.kind.name().into());
        f.insert("nominal".into(), fmt_num(self.nominal));
        if self.tolerance != Tolerance::None {
            f.insert("tolerance".into(), self.tolerance_text());
        }
        if let Some(n) = self.count {
            f.insert("count".into(), n.to_string());
        }
        if let Some(p) = self.thread_pitch {
            f.insert("thread_pitch".into(), fmt_num(p));
        }
        if let Some(a) = self.chamfer_angle {
            f.insert("chamfer_angle".into(), fmt_num(a));
        }
        if self.reference {
            f.insert("reference".into(), "true".into());
        }
        if let Some(q) = self.qualifier {
            f.insert("qualifier".into(), q.name().into());
        }
        f
    }
}

const TIMES: [char; 3] = ['x', 'X', '×'];
const MINUS: [char; 2] = ['-', '−'];

fn eat_degree(cur: &mut Cursor) -> bool {
    if cur.eat('°') {
        return true;
    }
    let start = cur.pos();
    cur.skip_ws();
    if cur.eat_word("deg", true) && !matches!(cur.peek(), Some(c) if c.is_alphanumeric()) {
        return true;
    }
    cur.set_pos(start);
    false
}

/// `<number> [ws] x [ws] <number>°` starting at the cursor, without consuming.
fn chamfer_ahead(cur: &Cursor) -> bool {
    let mut c = cur.clone();
    if !matches!(c.number(), Ok(Some(_))) {
        return false;
    }
    c.skip_ws();
    if c.eat_any(&TIMES).is_none() {
        return false;
    }
    c.skip_ws();
    matches!(c.number(), Ok(Some(_))) && eat_degree(&mut c)
}

fn count_prefix(cur: &mut Cursor) -> Result<Option<u32>, ParseError> {
    let start = cur.pos();
    if chamfer_ahead(cur) {
        return Ok(None);
    }
    let Some(n) = cur.integer() else {
        return Ok(None);
    };
    // "2.5x" or "2,5x" is never a count
    if matches!(cur.peek(), Some('.' | ',')) {
        cur.set_pos(start);
        return Ok(None);
    }
    cur.skip_ws();
    if cur.eat_any(&TIMES).is_none() || cur.at_end() {
        cur.set_pos(start);
        return Ok(None);
    }
    if n == 0 {
        return Err(ParseError::new(
            ParseErrorKind::InvalidNumber("0".into()),
            start,
        ));
    }
    Ok(Some(n))
}

fn signed(cur: &mut Cursor) -> Result<Option<f64>, ParseError> {
    let start = cur.pos();
    let sign = match cur.peek() {
        Some('+') => {
            cur.bump();
            1.0
        }
        Some(c) if MINUS.contains(&c) => {
            cur.bump();
            -1.0
        }
        _ => 1.0,
    };
    match cur.number()? {
        Some(v) => Ok(Some(if v == 0.0 { 0.0 } else { sign * v })),
        None => {
            cur.set_pos(start);
            Ok(None)
        }
    }
}

/// Letters then digits (`H7`, `js6`) or digits then letters (`6g`).
fn fit_class(cur: &mut Cursor, digits_first: bool) -> Option<String> {
    let start = cur.pos();
    let mut class = String::new();
    let mut take = |cur: &mut Cursor, alpha: bool| {
        let mut n = 0;
        while let Some(c) = cur.peek() {
            let ok = if alpha {
                c.is_ascii_alphabetic()
            } else {
                c.is_ascii_digit()
            };
            if !ok || n == 2 {
                break;
            }
            class.push(c);
            cur.bump();
            n += 1;
        }
        n
    };
    let (a, b) = if digits_first {
        let d = take(cur, false);
        (d, take(cur, true))
    } else {
        let l = take(cur, true);
        (l, take(cur, false))
    };
    if a == 0 || b == 0 || matches!(cur.peek(), Some(c) if c.is_alphanumeric()) {
        cur.set_pos(start);
        return None;
    }
    Some(class)
}

fn tolerance(cur: &mut Cursor, angular: bool) -> Result<Tolerance, ParseError> {
    let start = cur.pos();
    cur.skip_ws();
    let deg = |cur: &mut Cursor| {
        if angular {
            cur.eat('°');
        }
    };
    let sym_at = cur.pos();
    if cur.eat('±') || cur.eat_word("+/-", false) || cur.eat_word("+-", false) {
        cur.skip_ws();
        let at = cur.pos();
        if matches!(cur.peek(), Some(c) if MINUS.contains(&c)) {
            return Err(ParseError::new(ParseErrorKind::NonPositiveTolerance, at));
        }
        let Some(v) = cur.number()? else {
            return Err(cur.unexpected("tolerance value"));
        };
        if v <= 0.0 {
            return Err(ParseError::new(ParseErrorKind::NonPositiveTolerance, at));
        }
        deg(cur);
        return Ok(Tolerance::Symmetric { value: v });
    }
    if matches!(cur.peek(), Some(c) if c == '+' || MINUS.contains(&c)) {
        let Some(upper) = signed(cur)? else {
            return Err(cur.unexpected("upper deviation"));
        };
        deg(cur);
        cur.skip_ws();
        if !cur.eat('/') {
            return Err(cur.unexpected("'/' between deviations"));
        }
        cur.skip_ws();
        let Some(lower) = signed(cur)? else {
            return Err(cur.unexpected("lower deviation"));
        };
        deg(cur);
        if upper < lower {
            return Err(ParseError::new(ParseErrorKind::InvertedDeviation, sym_at));
        }
        return Ok(Tolerance::Asymmetric { upper, lower });
    }
    if let Some(class) = fit_class(cur, false) {
        return Ok(Tolerance::FitClass { class });
    }
    cur.set_pos(start);
    Ok(Tolerance::None)
}

pub fn parse_measure(text: &str) -> Result<MeasureSpec, ParseError> {
    let mut cur = Cursor::new(text);
    cur.skip_ws();
    if cur.at_end() {
        return Err(ParseError::new(ParseErrorKind::Empty, 0));
    }
    let count = count_prefix(&mut cur)?;
    cur.skip_ws();
    let paren_at = cur.pos();
    let reference = cur.eat('(');
    cur.skip_ws();
    let qualifier = cur.peek().and_then(Qualifier::from_symbol);
    if qualifier.is_some() {
        cur.bump();
        cur.skip_ws();
    }

    let mut kind = if cur.eat_word("SR", false) {
        MeasureKind::SphericalRadius
    } else if cur.peek() == Some('S') && {
        let mut probe = cur.clone();
        probe.bump();
        eat_diameter(&mut probe)
    } {
        cur.bump();
        eat_diameter(&mut cur);
        MeasureKind::SphericalDiameter
    } else if eat_diameter(&mut cur) {
        MeasureKind::Diameter
    } else if cur.eat('R') {
        MeasureKind::Radius
    } else if cur.eat('□') {
        MeasureKind::Square
    } else if cur.peek() == Some('M') && matches!(cur.peek_at(1), Some(c) if c.is_ascii_digit()) {
        cur.bump();
        MeasureKind::ThreadMetric
    } else {
        MeasureKind::Linear
    };
    cur.skip_ws();

    let num_at = cur.pos();
    match cur.peek() {
        Some(c)
            if MINUS.contains(&c)
                && matches!(cur.peek_at(1), Some(d) if d.is_ascii_digit() || d == '.') =>
        {
            return Err(ParseError::new(ParseErrorKind::NegativeNominal, num_at));
        }
        Some('±' | '+') => {
            return Err(ParseError::new(
                ParseErrorKind::ToleranceWithoutNominal,
                num_at,
            ));
        }
        _ => {}
    }
    let chamfer = kind == MeasureKind::Linear && chamfer_ahead(&cur);
    let Some(nominal) = cur.number()? else {
        return Err(cur.unexpected("nominal value"));
    };
    if nominal <= 0.0 {
        return Err(ParseError::new(ParseErrorKind::NonPositiveNominal, num_at));
    }

    let mut thread_pitch = None;
    let mut chamfer_angle = None;
    let mut tol = Tolerance::None;
    match kind {
        MeasureKind::ThreadMetric => {
            if cur.eat_any(&TIMES).is_some() {
                let at = cur.pos();
                match cur.number()? {
                    Some(p) if p > 0.0 => thread_pitch = Some(p),
                    Some(_) => return Err(ParseError::new(ParseErrorKind::NonPositiveNominal, at)),
                    None => return Err(cur.unexpected("thread pitch")),
                }
            }
            let dash = cur.pos();
            if cur.eat('-') {
                match fit_class(&mut cur, true) {
                    Some(class) => tol = Tolerance::FitClass { class },
                    None => cur.set_pos(dash),
                }
            }
        }
        MeasureKind::Linear if chamfer => {
            cur.skip_ws();
            cur.eat_any(&TIMES);
            cur.skip_ws();
            let at = cur.pos();
            let angle = cur.number()?.unwrap_or(0.0);
            if angle <= 0.0 {
                return Err(ParseError::new(ParseErrorKind::NonPositiveNominal, at));
            }
            eat_degree(&mut cur);
            chamfer_angle = Some(angle);
            kind = MeasureKind::Chamfer;
        }
        MeasureKind::Linear if eat_degree(&mut cur) => {
            kind = MeasureKind::Angular;
            tol = tolerance(&mut cur, true)?;
        }
        _ => tol = tolerance(&mut cur, false)?,
    }

    cur.skip_ws();
    if reference {
        if !cur.eat(')') {
            return Err(match cur.peek() {
                None => ParseError::new(ParseErrorKind::UnbalancedParenthesis, paren_at),
                Some(_) => cur.unexpected("')'"),
            });
        }
        cur.skip_ws();
    }
    if !cur.at_end() {
        if cur.peek() == Some(')') {
            return Err(ParseError::new(
                ParseErrorKind::UnbalancedParenthesis,
                cur.pos(),
            ));
        }
        return Err(cur.unexpected("end of measure"));
    }

    Ok(MeasureSpec {
        count,
        kind,
        nominal,
        tolerance: tol,
        thread_pitch,
        chamfer_angle,
        reference,
        qualifier,
    })
}
