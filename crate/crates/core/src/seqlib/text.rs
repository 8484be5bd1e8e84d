//! Plain-text codebook format: one code per line,
//! `<family> <length> <index> <chips>` with chips written as `+`/`-`.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use super::{ChipSequence, Family, SeqError};

pub fn write_codebook(codes: &[ChipSequence]) -> String {
    let mut out = String::new();
    for c in codes {
        let _ = write!(out, "{} {} {} ", c.family(), c.len(), c.index());
        out.extend(c.chips().iter().map(|&x| if x > 0 { '+' } else { '-' }));
        out.push('\n');
    }
    out
}

pub fn parse_codebook(text: &str) -> Result<Vec<ChipSequence>, SeqError> {
    let mut codes = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let err = |reason| SeqError::Parse { line: line_no, reason };
        let mut parts = line.split_whitespace();
        let family = parts.next().and_then(Family::parse).ok_or(err("unknown family"))?;
        let len: usize = parts.next().and_then(|s| s.parse().ok()).ok_or(err("bad length"))?;
        let index: usize = parts.next().and_then(|s| s.parse().ok()).ok_or(err("bad index"))?;
        let body = parts.next().ok_or(err("missing chips"))?;
        if parts.next().is_some() {
            return Err(err("trailing fields"));
        }
        let chips: Vec<i8> = body
            .chars()
            .map(|ch| match ch {
                '+' => Ok(1),
                '-' => Ok(-1),
                _ => Err(err("chip must be + or -")),
            })
            .collect::<Result<_, _>>()?;
        if chips.len() != len {
            return Err(err("length does not match chips"));
        }
        codes.push(ChipSequence::new(chips, family, index)?);
    }
    Ok(codes)
}
