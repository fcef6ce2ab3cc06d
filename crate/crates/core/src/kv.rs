//! Flat `key = value` text format shared by experiment configs and energy
//! profiles. `#` starts a comment, blank lines are ignored, keys may carry
//! dotted section prefixes and must be unique.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvDocument {
    entries: Vec<(String, String)>,
}

impl KvDocument {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: Vec<(String, String)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "line {}: expected 'key = value', got '{}'",
                    lineno + 1,
                    raw.trim()
                ))
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", lineno + 1)));
            }
            if entries.iter().any(|(k, _)| k == key) {
                return Err(Error::Config(format!("line {}: duplicate key '{key}'", lineno + 1)));
            }
            entries.push((key.to_string(), value.trim().to_string()));
        }
        Ok(KvDocument { entries })
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn insert(&mut self, key: impl Into<String>, value: impl Into<String>) {
        let key = key.into();
        let value = value.into();
        match self.entries.iter_mut().find(|(k, _)| *k == key) {
            Some(slot) => slot.1 = value,
            None => self.entries.push((key, value)),
        }
    }

    pub fn render(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

pub fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("'{key}': cannot parse '{value}'")))
}

pub fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| parse_value(key, item))
        .collect()
}

pub fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        other => Err(Error::Config(format!("'{key}': expected a boolean, got '{other}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_sections() {
        let doc = KvDocument::parse("# header\nsoil.vwc = 0.119 # in situ\n\nsweep.sfs = 7, 8 ,9\n").unwrap();
        assert_eq!(doc.get("soil.vwc"), Some("0.119"));
        assert_eq!(
            parse_list::<u8>("sweep.sfs", doc.get("sweep.sfs").unwrap()).unwrap(),
            vec![7, 8, 9]
        );
    }

    #[test]
    fn rejects_garbage() {
        assert!(KvDocument::parse("no equals sign").is_err());
        assert!(KvDocument::parse("a = 1\na = 2").is_err());
        assert!(KvDocument::parse(" = 3").is_err());
        assert!(parse_value::<f64>("x", "abc").is_err());
        assert!(parse_bool("x", "maybe").is_err());
    }

    #[test]
    fn render_round_trip() {
        let doc = KvDocument::parse("a = 1\nb.c = x, y\n").unwrap();
        assert_eq!(KvDocument::parse(&doc.render()).unwrap(), doc);
    }
}
