//! Sectioned key-value configuration text.
//!
//! ```text
//! # comment
//! [operator r0]
//! interval_ms = 250
//! input:
//!     <topdown+1>power
//!     <bottomup, filter cpu>cpu-cycles
//! output:
//!     <bottomup-1>healthy
//! ```
//!
//! A section header is `[kind]` or `[kind name]`. Inside a section, lines are
//! either `key = value` or `list:` followed by indented items. Lines whose
//! first non-blank character is `#` are comments.

use std::fmt;
use std::str::FromStr;

use crate::error::ConfError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfEntry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfList {
    pub name: String,
    pub items: Vec<(String, usize)>,
    pub line: usize,
}

impl ConfList {
    pub fn values(&self) -> impl Iterator<Item = &str> {
        self.items.iter().map(|(s, _)| s.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfSection {
    pub kind: String,
    pub name: Option<String>,
    pub line: usize,
    pub entries: Vec<ConfEntry>,
    pub lists: Vec<ConfList>,
}

impl ConfSection {
    pub fn new(kind: impl Into<String>, name: Option<String>) -> Self {
        ConfSection {
            kind: kind.into(),
            name,
            line: 0,
            entries: Vec::new(),
            lists: Vec::new(),
        }
    }

    pub fn entry(&self, key: &str) -> Option<&ConfEntry> {
        self.entries.iter().rev().find(|e| e.key == key)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entry(key).map(|e| e.value.as_str())
    }

    /// Parses `key` with `FromStr`, reporting the entry's line on failure.
    pub fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfError>
    where
        T::Err: fmt::Display,
    {
        match self.entry(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse()
                .map(Some)
                .map_err(|err| ConfError::new(e.line, format!("{key}: {err}"))),
        }
    }

    pub fn parse_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, ConfError>
    where
        T::Err: fmt::Display,
    {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    pub fn list(&self, name: &str) -> Option<&ConfList> {
        self.lists.iter().find(|l| l.name == name)
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push(ConfEntry {
            key: key.into(),
            value: value.to_string(),
            line: 0,
        });
    }

    pub fn set_list(&mut self, name: impl Into<String>, items: impl IntoIterator<Item = impl ToString>) {
        self.lists.push(ConfList {
            name: name.into(),
            items: items.into_iter().map(|i| (i.to_string(), 0)).collect(),
            line: 0,
        });
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConfDoc {
    pub sections: Vec<ConfSection>,
}

impl ConfDoc {
    pub fn parse(text: &str) -> Result<Self, ConfError> {
        let mut doc = ConfDoc::default();
        let mut in_list = false;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let indented = raw.starts_with([' ', '\t']);
            if indented && in_list {
                let section = doc.sections.last_mut().expect("list implies a section");
                let list = section.lists.last_mut().expect("list is open");
                list.items.push((trimmed.to_string(), line));
                continue;
            }
            in_list = false;
            if let Some(header) = trimmed.strip_prefix('[') {
                let inner = header
                    .strip_suffix(']')
                    .ok_or_else(|| ConfError::new(line, "unterminated section header"))?
                    .trim();
                let mut words = inner.split_whitespace();
                let kind = words
                    .next()
                    .ok_or_else(|| ConfError::new(line, "empty section header"))?;
                let name = words.next().map(str::to_string);
                if words.next().is_some() {
                    return Err(ConfError::new(line, "section header takes at most a kind and a name"));
                }
                let mut section = ConfSection::new(kind, name);
                section.line = line;
                doc.sections.push(section);
                continue;
            }
            let Some(section) = doc.sections.last_mut() else {
                return Err(ConfError::new(line, "entry outside of any section"));
            };
            if let Some((key, value)) = trimmed.split_once('=') {
                let key = key.trim();
                if key.is_empty() || key.contains(char::is_whitespace) {
                    return Err(ConfError::new(line, format!("invalid key {key:?}")));
                }
                section.entries.push(ConfEntry {
                    key: key.to_string(),
                    value: value.trim().to_string(),
                    line,
                });
            } else if let Some(name) = trimmed.strip_suffix(':') {
                let name = name.trim();
                if name.is_empty() || name.contains(char::is_whitespace) {
                    return Err(ConfError::new(line, format!("invalid list name {name:?}")));
                }
                if section.list(name).is_some() {
                    return Err(ConfError::new(line, format!("duplicate list {name:?}")));
                }
                section.lists.push(ConfList {
                    name: name.to_string(),
                    items: Vec::new(),
                    line,
                });
                in_list = true;
            } else {
                return Err(ConfError::new(
                    line,
                    format!("expected `key = value`, `list:` or `[section]`, found {trimmed:?}"),
                ));
            }
        }
        Ok(doc)
    }

    pub fn sections<'a>(&'a self, kind: &'a str) -> impl Iterator<Item = &'a ConfSection> + 'a {
        self.sections.iter().filter(move |s| s.kind == kind)
    }

    pub fn section(&self, kind: &str) -> Option<&ConfSection> {
        self.sections.iter().find(|s| s.kind == kind)
    }
}

impl fmt::Display for ConfDoc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.sections.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            match &s.name {
                Some(n) => writeln!(f, "[{} {}]", s.kind, n)?,
                None => writeln!(f, "[{}]", s.kind)?,
            }
            for e in &s.entries {
                writeln!(f, "{} = {}", e.key, e.value)?;
            }
            for l in &s.lists {
                writeln!(f, "{}:", l.name)?;
                for (item, _) in &l.items {
                    writeln!(f, "    {item}")?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# plugin config
[global]
streaming = true

[operator r0]
interval_ms = 250
input:
    <topdown+1>power
    # a comment inside the list
    <bottomup, filter cpu>cpu-cycles
output:
    <bottomup-1>healthy
mode = online
";

    #[test]
    fn parses_sections_entries_and_lists() {
        let doc = ConfDoc::parse(SAMPLE).unwrap();
        assert_eq!(doc.sections.len(), 2);
        let op = doc.section("operator").unwrap();
        assert_eq!(op.name.as_deref(), Some("r0"));
        assert_eq!(op.parse::<u64>("interval_ms").unwrap(), Some(250));
        assert_eq!(op.get("mode"), Some("online"));
        let input: Vec<&str> = op.list("input").unwrap().values().collect();
        assert_eq!(input, vec!["<topdown+1>power", "<bottomup, filter cpu>cpu-cycles"]);
        assert_eq!(op.list("output").unwrap().items[0].1, 12);
    }

    #[test]
    fn reports_lines() {
        assert_eq!(ConfDoc::parse("x = 1").unwrap_err().line, 1);
        assert_eq!(ConfDoc::parse("[a]\n\nnonsense").unwrap_err().line, 3);
        assert_eq!(ConfDoc::parse("[a\n").unwrap_err().line, 1);
        let doc = ConfDoc::parse("[a]\nn = x").unwrap();
        assert_eq!(doc.sections[0].parse::<u32>("n").unwrap_err().line, 2);
    }

    #[test]
    fn display_round_trips() {
        let doc = ConfDoc::parse(SAMPLE).unwrap();
        let again = ConfDoc::parse(&doc.to_string()).unwrap();
        assert_eq!(doc.to_string(), again.to_string());
        assert_eq!(again.sections[1].list("input").unwrap().items.len(), 2);
    }
}
