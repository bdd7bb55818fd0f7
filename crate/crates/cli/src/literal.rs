//! Bracketed integer matrix literals such as `[[2, 4], [6, 8]]`, with arbitrary-size entries.

use std::str::FromStr;

use mrank::linalg::IntMatrix;
use num_bigint::BigInt;

use crate::CliError;

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl Cursor<'_> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.text[self.pos..].chars().next() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.text[self.pos..].chars().next()
    }

    fn error(&self, message: impl Into<String>) -> CliError {
        let before = &self.text[..self.pos];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        CliError::Parse { line, column, message: message.into() }
    }

    fn expect(&mut self, c: char) -> Result<(), CliError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected '{c}'")))
        }
    }

    fn integer(&mut self) -> Result<BigInt, CliError> {
        self.skip_ws();
        let rest = &self.text[self.pos..];
        let sign = usize::from(rest.starts_with('-') || rest.starts_with('+'));
        let digits = rest[sign..].chars().take_while(char::is_ascii_digit).count();
        if digits == 0 {
            return Err(self.error("expected an integer"));
        }
        let token = &rest[..sign + digits];
        let value = BigInt::from_str(token.trim_start_matches('+')).map_err(|e| self.error(e.to_string()))?;
        self.pos += token.len();
        Ok(value)
    }

    /// `[a, b, …]` where `item` parses one element.
    fn list<T>(&mut self, mut item: impl FnMut(&mut Self) -> Result<T, CliError>) -> Result<Vec<T>, CliError> {
        self.expect('[')?;
        let mut out = Vec::new();
        if self.peek() == Some(']') {
            self.pos += 1;
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            match self.peek() {
                Some(',') => self.pos += 1,
                Some(']') => {
                    self.pos += 1;
                    return Ok(out);
                }
                _ => return Err(self.error("expected ',' or ']'")),
            }
        }
    }
}

pub fn parse_matrix(text: &str) -> Result<IntMatrix, CliError> {
    let mut cur = Cursor { text, pos: 0 };
    let rows = cur.list(|c| c.list(Cursor::integer))?;
    if cur.peek().is_some() {
        return Err(cur.error("trailing input after matrix"));
    }
    let cols = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().position(|r| r.len() != cols) {
        return Err(CliError::Parse { line: 1, column: 1, message: format!("row {} has {} entries, expected {cols}", bad + 1, rows[bad].len()) });
    }
    IntMatrix::from_bigint_rows(rows, cols).map_err(|e| CliError::Parse { line: 1, column: 1, message: e.to_string() })
}
