use super::{ParseError, ParseErrorKind};

/// Character cursor; offsets are character (not byte) positions.
#[derive(Debug, Clone)]
pub(crate) struct Cursor {
    chars: Vec<char>,
    pos: usize,
}

impl Cursor {
    pub(crate) fn new(text: &str) -> Self {
        Self {
            chars: text.chars().collect(),
            pos: 0,
        }
    }

    pub(crate) fn pos(&self) -> usize {
        self.pos
    }

    pub(crate) fn set_pos(&mut self, pos: usize) {
        self.pos = pos;
    }

    pub(crate) fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    pub(crate) fn peek_at(&self, ahead: usize) -> Option<char> {
        self.chars.get(self.pos + ahead).copied()
    }

    pub(crate) fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        Some(c)
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    pub(crate) fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn eat_any(&mut self, set: &[char]) -> Option<char> {
        match self.peek() {
            Some(c) if set.contains(&c) => {
                self.pos += 1;
                Some(c)
            }
            _ => None,
        }
    }

    /// Consumes `word` when it appears next, optionally ignoring ASCII case.
    pub(crate) fn eat_word(&mut self, word: &str, ignore_case: bool) -> bool {
        let mut i = self.pos;
        for w in word.chars() {
            match self.chars.get(i) {
                Some(&c) if c == w || (ignore_case && c.eq_ignore_ascii_case(&w)) => i += 1,
                _ => return false,
            }
        }
        self.pos = i;
        true
    }

    pub(crate) fn skip_ws(&mut self) -> usize {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
        self.pos - start
    }

    /// Reads an unsigned decimal with `.` as the only separator.
    ///
    /// A `,` directly followed by a digit is rejected rather than read as a
    /// thousands or decimal separator.
    pub(crate) fn number(&mut self) -> Result<Option<f64>, ParseError> {
        let start = self.pos;
        let mut seen_digit = false;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
            seen_digit = true;
        }
        if self.peek() == Some('.') && matches!(self.peek_at(1), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
            seen_digit = true;
        }
        if !seen_digit {
            self.pos = start;
            return Ok(None);
        }
        if self.peek() == Some(',') && matches!(self.peek_at(1), Some(c) if c.is_ascii_digit()) {
            return Err(ParseError::new(ParseErrorKind::DigitGrouping, self.pos));
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse::<f64>()
            .map(Some)
            .map_err(|_| ParseError::new(ParseErrorKind::InvalidNumber(text), start))
    }

    pub(crate) fn integer(&mut self) -> Option<u32> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return None;
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        match text.parse() {
            Ok(v) => Some(v),
            Err(_) => {
                self.pos = start;
                None
            }
        }
    }

    pub(crate) fn unexpected(&self, expected: &'static str) -> ParseError {
        match self.peek() {
            Some(c) => ParseError::new(
                ParseErrorKind::UnexpectedChar { found: c, expected },
                self.pos,
            ),
            None => ParseError::new(ParseErrorKind::UnexpectedEnd { expected }, self.pos),
        }
    }
}
