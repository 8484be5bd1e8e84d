//! Plain-text network dump.
//!
//! ```text
//! seqnoma-qnet 1
//! sizes 7 64 64 120
//! dropout 0.1
//! layer 0 w <64·7 values>
//! layer 0 b <64 values>
//! ...
//! ```
//!
//! Values use Rust's shortest round-trip float formatting, so a write/read
//! cycle is lossless.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use super::network::QNetwork;
use super::DqnError;

const MAGIC: &str = "seqnoma-qnet 1";

pub fn write_checkpoint(net: &QNetwork) -> String {
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    out.push_str("sizes");
    for s in net.sizes() {
        let _ = write!(out, " {s}");
    }
    let _ = writeln!(out, "\ndropout {}", net.dropout);
    for (i, l) in net.layers.iter().enumerate() {
        for (tag, vals) in [("w", &l.w), ("b", &l.b)] {
            let _ = write!(out, "layer {i} {tag}");
            for v in vals.iter() {
                let _ = write!(out, " {v:?}");
            }
            out.push('\n');
        }
    }
    out
}

pub fn read_checkpoint(text: &str) -> Result<QNetwork, DqnError> {
    let err = |line: usize, reason: &str| DqnError::Parse { line, reason: reason.to_string() };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    let (n, head) = lines.next().ok_or_else(|| err(1, "empty checkpoint"))?;
    if head != MAGIC {
        return Err(err(n, "bad header"));
    }
    let (n, sizes_line) = lines.next().ok_or_else(|| err(2, "missing sizes"))?;
    let sizes: Vec<usize> = match sizes_line.strip_prefix("sizes ") {
        Some(rest) => rest.split_whitespace().map(|t| t.parse().map_err(|_| err(n, "bad size"))).collect::<Result<_, _>>()?,
        None => return Err(err(n, "expected sizes")),
    };
    if sizes.len() < 2 || sizes.contains(&0) {
        return Err(err(n, "need at least two positive sizes"));
    }
    let (n, drop_line) = lines.next().ok_or_else(|| err(3, "missing dropout"))?;
    let dropout: f64 = drop_line
        .strip_prefix("dropout ")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| err(n, "bad dropout"))?;
    let mut layers = Vec::new();
    for (i, pair) in sizes.windows(2).enumerate() {
        let mut read = |tag: &str, count: usize| -> Result<Vec<f64>, DqnError> {
            let (n, l) = lines.next().ok_or_else(|| err(0, "truncated checkpoint"))?;
            let prefix = format!("layer {i} {tag}");
            let rest = l.strip_prefix(prefix.as_str()).ok_or_else(|| err(n, "unexpected layer line"))?;
            let vals: Vec<f64> =
                rest.split_whitespace().map(|t| t.parse().map_err(|_| err(n, "bad number"))).collect::<Result<_, _>>()?;
            if vals.len() != count {
                return Err(err(n, "wrong value count"));
            }
            Ok(vals)
        };
        let w = read("w", pair[0] * pair[1])?;
        let b = read("b", pair[1])?;
        layers.push((w, b));
    }
    if let Some((n, _)) = lines.next() {
        return Err(err(n, "trailing data"));
    }
    QNetwork::from_layers(&layers, dropout)
}
