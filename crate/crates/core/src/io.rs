//! Shared helpers for the line-oriented text formats.

use std::io::BufRead;
use std::str::FromStr;

use crate::{Error, Result};

/// Formats a double with 17 significant digits, enough for an exact round trip.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Line reader that tracks 1-based line numbers for error messages.
pub struct LineReader<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> LineReader<R> {
    pub fn new(r: R) -> Self {
        Self { inner: r.lines(), line: 0 }
    }

    /// Next line and its line number; a missing line is a parse error.
    pub fn next_line(&mut self) -> Result<(usize, String)> {
        self.line += 1;
        match self.inner.next() {
            Some(Ok(l)) => Ok((self.line, l)),
            Some(Err(e)) => Err(e.into()),
            None => Err(Error::parse(self.line, "unexpected end of file")),
        }
    }

    pub fn next_tokens(&mut self) -> Result<(usize, Vec<String>)> {
        let (ln, l) = self.next_line()?;
        Ok((ln, l.split_whitespace().map(str::to_owned).collect()))
    }

    /// Reads one line holding a single value.
    pub fn next_value<T: FromStr>(&mut self) -> Result<T> {
        let (ln, l) = self.next_line()?;
        self.parse_at(ln, l.trim())
    }

    pub fn parse_at<T: FromStr>(&self, line: usize, token: &str) -> Result<T> {
        token.parse().map_err(|_| Error::parse(line, format!("cannot parse '{token}'")))
    }

    pub fn line(&self) -> usize {
        self.line
    }
}

/// Writes `field <N>` followed by one value per line.
pub fn write_field<W: std::io::Write>(mut w: W, values: &[f64]) -> Result<()> {
    writeln!(w, "field {}", values.len())?;
    for v in values {
        writeln!(w, "{}", fmt_real(*v))?;
    }
    Ok(())
}

pub fn read_field<R: BufRead>(r: R) -> Result<Vec<f64>> {
    let mut lines = LineReader::new(r);
    let (ln, header) = lines.next_tokens()?;
    if header.len() != 2 || header[0] != "field" {
        return Err(Error::parse(ln, "expected 'field <N>'"));
    }
    let n: usize = lines.parse_at(ln, &header[1])?;
    (0..n).map(|_| lines.next_value()).collect()
}
