//! Initial-distribution specs: `mask:K`, a bare mask `K`, `level:J:uniform`
//! or `atoms:[(MASK,W),...]`. Masks accept decimal, `0b` and `0x` forms;
//! atom weights accept `p/q`.

use moran_core::{Configuration, InitialDistribution};

use crate::error::{CliError, CliResult};
use crate::model_file::parse_number;

pub fn parse_mask(s: &str) -> CliResult<u64> {
    let s = s.trim();
    let parsed = if let Some(b) = s.strip_prefix("0b") {
        u64::from_str_radix(b, 2)
    } else if let Some(h) = s.strip_prefix("0x") {
        u64::from_str_radix(h, 16)
    } else {
        s.parse()
    };
    parsed.map_err(|_| CliError::Parse(format!("not a mask: {s:?}")))
}

pub fn parse_init(spec: &str, n: usize) -> CliResult<InitialDistribution> {
    let spec = spec.trim();
    let lower = spec.to_ascii_lowercase();
    if let Some(rest) = lower.strip_prefix("mask:") {
        return point(parse_mask(rest)?, n);
    }
    if let Some(rest) = lower.strip_prefix("level:") {
        let j = rest
            .strip_suffix(":uniform")
            .ok_or_else(|| CliError::Parse(format!("expected level:J:uniform, got {spec:?}")))?;
        let j: usize = j.parse().map_err(|_| CliError::Parse(format!("not a level: {j:?}")))?;
        return Ok(InitialDistribution::uniform_level(n, j)?);
    }
    if let Some(rest) = lower.strip_prefix("atoms:") {
        return atoms(rest, n);
    }
    point(parse_mask(spec)?, n)
}

fn point(bits: u64, n: usize) -> CliResult<InitialDistribution> {
    Ok(InitialDistribution::point(Configuration::new(bits, n)?)?)
}

fn atoms(list: &str, n: usize) -> CliResult<InitialDistribution> {
    let bad = || CliError::Parse(format!("expected atoms:[(MASK,W),...], got {list:?}"));
    let inner = list
        .trim()
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(bad)?;
    let mut out = Vec::new();
    let mut rest = inner.trim();
    while !rest.is_empty() {
        let open = rest.strip_prefix('(').ok_or_else(bad)?;
        let (pair, tail) = open.split_once(')').ok_or_else(bad)?;
        let (mask, weight) = pair.split_once(',').ok_or_else(bad)?;
        out.push((Configuration::new(parse_mask(mask)?, n)?, parse_number(weight)?));
        rest = tail.trim_start();
        rest = rest.strip_prefix(',').unwrap_or(rest).trim_start();
    }
    Ok(InitialDistribution::new(out)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forms() {
        let d = parse_init("mask:5", 3).unwrap();
        assert_eq!(d.atoms()[0].0.bits(), 5);
        assert_eq!(parse_init("0b011", 3).unwrap().atoms()[0].0.bits(), 3);
        assert_eq!(parse_init("level:1:uniform", 3).unwrap().atoms().len(), 3);
        assert_eq!(parse_init("LEVEL:2:uniform", 4).unwrap().atoms().len(), 6);
        let a = parse_init("atoms:[(1, 1/4), (0x2,3/4)]", 2).unwrap();
        assert_eq!(a.atoms()[1], (Configuration::new(2, 2).unwrap(), 0.75));
    }

    #[test]
    fn rejects() {
        assert_eq!(parse_init("mask:7", 3).unwrap_err().kind(), "AtomOnAbsorbing");
        assert_eq!(parse_init("mask:8", 3).unwrap_err().kind(), "MaskOutOfRange");
        assert_eq!(parse_init("level:3:uniform", 3).unwrap_err().kind(), "LevelOutOfRange");
        assert!(parse_init("level:1", 3).is_err());
        assert!(parse_init("atoms:[(1,0.5)]", 3).is_err());
        assert!(parse_init("atoms:(1,1)", 3).is_err());
        assert!(parse_init("one", 3).is_err());
    }
}
