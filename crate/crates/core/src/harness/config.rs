//! `key = value` configuration files. Blank lines and `#` comments are
//! ignored; a key may appear once.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, (usize, String)>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
                line,
                message: format!("expected `key = value`, found `{content}`"),
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Config {
                    line,
                    message: "empty key".into(),
                });
            }
            if entries
                .insert(key.to_string(), (line, value.trim().to_string()))
                .is_some()
            {
                return Err(Error::Config {
                    line,
                    message: format!("duplicate key `{key}`"),
                });
            }
        }
        Ok(ConfigFile { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    /// Parses the value of `key`, if present.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some((line, v)) => v.parse().map(Some).map_err(|e| Error::Config {
                line: *line,
                message: format!("`{key}`: {e}"),
            }),
        }
    }

    /// Whitespace-separated list, e.g. `grid = 128 128`.
    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .split_whitespace()
                .map(|t| {
                    t.parse().map_err(|e| Error::Config {
                        line: *line,
                        message: format!("`{key}`: {e}"),
                    })
                })
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }

    /// Fails on the first key outside `allowed`.
    pub fn reject_unknown(&self, allowed: &[&str]) -> Result<()> {
        for (key, (line, _)) in &self.entries {
            if !allowed.contains(&key.as_str()) {
                return Err(Error::Config {
                    line: *line,
                    message: format!("unknown key `{key}`"),
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_values_comments_and_lists() {
        let c = ConfigFile::parse("# run\nk = 4\n\neps=0.25 # comment\ngrid = 64 32\n").unwrap();
        assert_eq!(c.get::<usize>("k").unwrap(), Some(4));
        assert_eq!(c.get::<f64>("eps").unwrap(), Some(0.25));
        assert_eq!(c.get_list::<usize>("grid").unwrap(), Some(vec![64, 32]));
        assert_eq!(c.get::<f64>("tau").unwrap(), None);
        assert!(c.reject_unknown(&["k", "eps", "grid"]).is_ok());
        assert!(c.reject_unknown(&["k"]).is_err());
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert!(matches!(
            ConfigFile::parse("k = 3\nnonsense\n"),
            Err(Error::Config { line: 2, .. })
        ));
        assert!(matches!(
            ConfigFile::parse("k = 3\nk = 4\n"),
            Err(Error::Config { line: 2, .. })
        ));
        let c = ConfigFile::parse("k = three").unwrap();
        assert!(matches!(
            c.get::<usize>("k"),
            Err(Error::Config { line: 1, .. })
        ));
    }
}
