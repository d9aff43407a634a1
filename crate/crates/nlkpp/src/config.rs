//! Plain-text `key = value` experiment configs. Command-line flags override
//! file values; keys a command does not know are rejected.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Keys every command accepts.
pub const GLOBAL_KEYS: [&str; 2] = ["out", "seed"];

/// Parses `key = value` lines; `#` starts a comment. Dashes in keys read as underscores.
pub fn parse(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", no + 1)))?;
        let key = k.trim().replace('-', "_");
        if key.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", no + 1)));
        }
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key `{key}`", no + 1)));
        }
    }
    Ok(map)
}

/// Resolved parameters of one command: file values checked against the
/// command's keys, then overridden by flags.
#[derive(Debug, Clone, Default)]
pub struct Params {
    file: BTreeMap<String, String>,
    resolved: BTreeMap<String, String>,
}

impl Params {
    /// Rejects file keys outside `keys` and [`GLOBAL_KEYS`].
    pub fn new(file: BTreeMap<String, String>, keys: &[&str]) -> Result<Self> {
        for k in file.keys() {
            if !keys.contains(&k.as_str()) && !GLOBAL_KEYS.contains(&k.as_str()) {
                return Err(Error::Config(format!("unknown key `{k}`")));
            }
        }
        Ok(Self { file, resolved: BTreeMap::new() })
    }

    fn parse_value<T: FromStr>(key: &str, s: &str) -> Result<T>
    where
        T::Err: Display,
    {
        s.parse().map_err(|e| Error::Config(format!("`{key}`: {e}")))
    }

    /// Flag value, else file value, else `default`.
    pub fn get<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T::Err: Display,
    {
        let v = match (flag, self.file.get(key)) {
            (Some(v), _) => v,
            (None, Some(s)) => Self::parse_value(key, s)?,
            (None, None) => default,
        };
        self.resolved.insert(key.into(), v.to_string());
        Ok(v)
    }

    /// Like [`Params::get`] with no default.
    pub fn require<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>) -> Result<T>
    where
        T::Err: Display,
    {
        let v = match (flag, self.file.get(key)) {
            (Some(v), _) => v,
            (None, Some(s)) => Self::parse_value(key, s)?,
            (None, None) => return Err(Error::Config(format!("missing `{key}`"))),
        };
        self.resolved.insert(key.into(), v.to_string());
        Ok(v)
    }

    /// Comma-separated list.
    pub fn list<T: FromStr + Display>(&mut self, key: &str, flag: Option<Vec<T>>, default: Vec<T>) -> Result<Vec<T>>
    where
        T::Err: Display,
    {
        let v = match (flag, self.file.get(key)) {
            (Some(v), _) => v,
            (None, Some(s)) => s.split(',').map(|p| Self::parse_value(key, p.trim())).collect::<Result<_>>()?,
            (None, None) => default,
        };
        let shown: Vec<String> = v.iter().map(ToString::to_string).collect();
        self.resolved.insert(key.into(), shown.join(","));
        Ok(v)
    }

    /// Every value read so far, as written to the run manifest.
    pub fn resolved(&self) -> &BTreeMap<String, String> {
        &self.resolved
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let file = parse("eps-bar = 0.5\n# note\ngrid = 512 # inline\n").unwrap();
        let mut p = Params::new(file, &["eps_bar", "grid"]).unwrap();
        assert_eq!(p.get("eps_bar", Some(0.25), 0.0).unwrap(), 0.25);
        assert_eq!(p.get("grid", None, 1024usize).unwrap(), 512);
        assert_eq!(p.get("d_floor", None, 1e-10).unwrap(), 1e-10);
        assert_eq!(p.resolved()["grid"], "512");
    }

    #[test]
    fn unknown_and_malformed_keys_are_rejected() {
        assert!(matches!(Params::new(parse("gird = 3").unwrap(), &["grid"]), Err(Error::Config(_))));
        assert!(matches!(parse("no equals sign"), Err(Error::Config(_))));
        assert!(matches!(parse("a = 1\na = 2"), Err(Error::Config(_))));
        let mut p = Params::new(parse("grid = many").unwrap(), &["grid"]).unwrap();
        assert!(matches!(p.get("grid", None, 1usize), Err(Error::Config(_))));
    }

    #[test]
    fn lists_parse_from_file() {
        let mut p = Params::new(parse("d_list = 1e-4, 1e-5").unwrap(), &["d_list"]).unwrap();
        assert_eq!(p.list::<f64>("d_list", None, vec![]).unwrap(), vec![1e-4, 1e-5]);
    }
}
