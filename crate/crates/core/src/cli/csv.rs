//! Plain CSV helpers. Numbers are written with 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::hilbert::{ProductVector, C64};

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// `block,<i>` header lines, then one `re,im` line per entry.
pub fn format_vector(x: &ProductVector) -> String {
    let mut out = String::new();
    for (i, b) in x.blocks.iter().enumerate() {
        writeln!(out, "block,{i}").expect("string write");
        for v in b.iter() {
            writeln!(out, "{},{}", num(v.re), num(v.im)).expect("string write");
        }
    }
    out
}

/// Parses the format of [`format_vector`]; a single value per line is real.
pub fn parse_vector(text: &str) -> Result<ProductVector> {
    let mut blocks: Vec<Vec<C64>> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |what: &str| Error::Config(format!("data line {}: {what}", ln + 1));
        if let Some(rest) = line.strip_prefix("block") {
            let idx: usize = rest.trim_start_matches(',').trim().parse().map_err(|_| bad("bad block header"))?;
            if idx != blocks.len() {
                return Err(bad("blocks must be numbered 0, 1, ..."));
            }
            blocks.push(Vec::new());
            continue;
        }
        let cur = blocks.last_mut().ok_or_else(|| bad("value before the first block header"))?;
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        let parse = |s: &str| s.parse::<f64>().map_err(|_| bad("not a number"));
        let v = match parts.as_slice() {
            [re] => C64::new(parse(re)?, 0.0),
            [re, im] => C64::new(parse(re)?, parse(im)?),
            _ => return Err(bad("expected one or two values")),
        };
        cur.push(v);
    }
    if blocks.is_empty() {
        return Err(Error::Config("data file has no blocks".into()));
    }
    Ok(ProductVector::new(blocks.into_iter().map(DVector::from_vec).collect()))
}

pub fn read_vector(path: &Path) -> Result<ProductVector> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read data {}: {e}", path.display())))?;
    parse_vector(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let x = ProductVector::new(vec![
            DVector::from_vec(vec![C64::new(0.1, -1e-300), C64::new(1.0 / 3.0, 2.0)]),
            DVector::from_vec(vec![C64::new(-7.25, 0.0)]),
        ]);
        assert_eq!(parse_vector(&format_vector(&x)).unwrap(), x);
    }

    #[test]
    fn real_lines_and_errors() {
        let x = parse_vector("block,0\n1.5\n2\nblock,1\n3,4\n").unwrap();
        assert_eq!(x.blocks.len(), 2);
        assert_eq!(x.block(0)[1], C64::new(2.0, 0.0));
        assert!(parse_vector("1.0\n").is_err());
        assert!(parse_vector("block,1\n1.0\n").is_err());
        assert!(parse_vector("block,0\n1,2,3\n").is_err());
    }
}
