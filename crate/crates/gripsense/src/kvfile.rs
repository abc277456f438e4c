//! Line-oriented `[section]` / `key = value` text format shared by
//! calibration profiles and simulator scenario files.
//!
//! Grammar: blank lines and lines starting with `#` are ignored; `[name]`
//! opens a section; every other line must be `key = value` inside a section.
//! Duplicate keys within a section are rejected.

use thiserror::Error;

#[derive(Debug, Error)]
#[error("line {line}: {message}")]
pub struct KvError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct KvSection {
    pub name: String,
    pub line: usize,
    entries: Vec<(String, String, usize)>,
}

impl KvSection {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _, _)| k == key).map(|(_, v, _)| v.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str, KvError> {
        self.get(key).ok_or_else(|| KvError {
            line: self.line,
            message: format!("section [{}] is missing key {key:?}", self.name),
        })
    }

    pub fn parse_f64(&self, key: &str) -> Result<f64, KvError> {
        let raw = self.require(key)?;
        raw.parse::<f64>().map_err(|e| KvError {
            line: self.line_of(key),
            message: format!("[{}] {key} = {raw:?}: {e}", self.name),
        })
    }

    pub fn parse_usize(&self, key: &str) -> Result<usize, KvError> {
        let raw = self.require(key)?;
        raw.parse::<usize>().map_err(|e| KvError {
            line: self.line_of(key),
            message: format!("[{}] {key} = {raw:?}: {e}", self.name),
        })
    }

    pub fn parse_u64(&self, key: &str) -> Result<u64, KvError> {
        let raw = self.require(key)?;
        raw.parse::<u64>().map_err(|e| KvError {
            line: self.line_of(key),
            message: format!("[{}] {key} = {raw:?}: {e}", self.name),
        })
    }

    pub fn parse_bool(&self, key: &str) -> Result<bool, KvError> {
        let raw = self.require(key)?;
        match raw {
            "true" => Ok(true),
            "false" => Ok(false),
            _ => Err(KvError {
                line: self.line_of(key),
                message: format!("[{}] {key} must be true or false, got {raw:?}", self.name),
            }),
        }
    }

    /// Space-separated f64 list.
    pub fn parse_f64_list(&self, key: &str) -> Result<Vec<f64>, KvError> {
        let raw = self.require(key)?;
        raw.split_whitespace()
            .map(|tok| {
                tok.parse::<f64>().map_err(|e| KvError {
                    line: self.line_of(key),
                    message: format!("[{}] {key}: token {tok:?}: {e}", self.name),
                })
            })
            .collect()
    }

    pub fn line_of(&self, key: &str) -> usize {
        self.entries.iter().find(|(k, _, _)| k == key).map(|(_, _, l)| *l).unwrap_or(self.line)
    }
}

#[derive(Debug, Clone, Default)]
pub struct KvFile {
    sections: Vec<KvSection>,
}

impl KvFile {
    pub fn parse(text: &str) -> Result<Self, KvError> {
        let mut sections: Vec<KvSection> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(stripped) = line.strip_prefix('[') {
                let Some(name) = stripped.strip_suffix(']') else {
                    return Err(KvError { line: line_no, message: format!("unterminated section header {line:?}") });
                };
                let name = name.trim();
                if name.is_empty() {
                    return Err(KvError { line: line_no, message: "empty section name".into() });
                }
                sections.push(KvSection { name: name.to_string(), line: line_no, entries: Vec::new() });
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(KvError { line: line_no, message: format!("expected `key = value`, got {line:?}") });
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return Err(KvError { line: line_no, message: "empty key".into() });
            }
            let Some(section) = sections.last_mut() else {
                return Err(KvError { line: line_no, message: format!("key {key:?} outside any section") });
            };
            if section.get(&key).is_some() {
                return Err(KvError {
                    line: line_no,
                    message: format!("duplicate key {key:?} in section [{}]", section.name),
                });
            }
            section.entries.push((key, value, line_no));
        }
        Ok(Self { sections })
    }

    pub fn sections(&self) -> impl Iterator<Item = &KvSection> {
        self.sections.iter()
    }

    pub fn section(&self, name: &str) -> Option<&KvSection> {
        self.sections.iter().find(|s| s.name == name)
    }
}

/// Incremental writer for the same format. Values are written with Rust's
/// shortest round-trip float formatting when callers format them with `{}`.
#[derive(Debug, Default)]
pub struct KvWriter {
    buf: String,
}

impl KvWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn section(&mut self, name: &str) -> &mut Self {
        if !self.buf.is_empty() {
            self.buf.push('\n');
        }
        self.buf.push_str(&format!("[{name}]\n"));
        self
    }

    pub fn kv(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        self.buf.push_str(&format!("{key} = {value}\n"));
        self
    }

    pub fn finish(self) -> String {
        self.buf
    }
}
