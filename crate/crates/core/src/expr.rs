//! Sensor expressions: `<LEVEL[, filter REGEX]>NAME`.

use std::fmt;
use std::str::FromStr;

use regex::Regex;

use crate::error::ExprParseError;
use crate::tree::{LevelAnchor, LevelSpec, NodeId, SensorTree};
use crate::sensor::Topic;

/// A generic sensor reference: a tree level (vertical navigation), an
/// optional regex over node paths (horizontal navigation) and the sensor name.
#[derive(Debug, Clone)]
pub struct SensorExpression {
    pub level: LevelSpec,
    filter: Option<Regex>,
    pub sensor_name: String,
}

impl PartialEq for SensorExpression {
    fn eq(&self, other: &Self) -> bool {
        self.level == other.level
            && self.filter_text() == other.filter_text()
            && self.sensor_name == other.sensor_name
    }
}

impl Eq for SensorExpression {}

impl SensorExpression {
    pub fn new(level: LevelSpec, filter: Option<&str>, sensor_name: &str) -> Result<Self, ExprParseError> {
        let filter = filter
            .filter(|f| !f.is_empty())
            .map(|f| {
                Regex::new(f).map_err(|e| ExprParseError {
                    column: 1,
                    message: format!("invalid filter regex: {e}"),
                })
            })
            .transpose()?;
        validate_name(sensor_name, 1)?;
        Ok(SensorExpression {
            level,
            filter,
            sensor_name: sensor_name.to_string(),
        })
    }

    pub fn parse(text: &str) -> Result<Self, ExprParseError> {
        Parser::new(text).parse()
    }

    pub fn filter_text(&self) -> Option<&str> {
        self.filter.as_ref().map(Regex::as_str)
    }

    /// Whether a node path passes the horizontal filter (unanchored search).
    pub fn filter_matches(&self, node_path: &str) -> bool {
        self.filter.as_ref().is_none_or(|re| re.is_match(node_path))
    }

    /// Nodes at this expression's level that pass the filter, ordered by path.
    pub fn node_domain(&self, tree: &SensorTree) -> Vec<NodeId> {
        tree.nodes_at_level(self.level)
            .into_iter()
            .filter(|&id| self.filter_matches(&tree.node(id).path))
            .collect()
    }

    /// Existing sensor topics matched by this expression, ordered by topic.
    pub fn domain(&self, tree: &SensorTree) -> Vec<Topic> {
        let mut topics: Vec<Topic> = self
            .node_domain(tree)
            .into_iter()
            .filter_map(|id| tree.node(id).sensor(&self.sensor_name).cloned())
            .collect();
        topics.sort();
        topics
    }

    /// Domain topics whose owning node is hierarchically related to `block`.
    pub fn resolve_for(&self, tree: &SensorTree, block: NodeId) -> Vec<Topic> {
        let mut topics: Vec<Topic> = self
            .node_domain(tree)
            .into_iter()
            .filter(|&id| tree.hierarchically_related(id, block))
            .filter_map(|id| tree.node(id).sensor(&self.sensor_name).cloned())
            .collect();
        topics.sort();
        topics
    }
}

impl fmt::Display for SensorExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.filter {
            Some(re) => write!(f, "<{}, filter {}>{}", self.level, re.as_str(), self.sensor_name),
            None => write!(f, "<{}>{}", self.level, self.sensor_name),
        }
    }
}

impl FromStr for SensorExpression {
    type Err = ExprParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

fn validate_name(name: &str, column: usize) -> Result<(), ExprParseError> {
    if name.is_empty() {
        return Err(ExprParseError {
            column,
            message: "missing sensor name".into(),
        });
    }
    if let Some((i, c)) = name
        .char_indices()
        .find(|(_, c)| *c == '/' || c.is_whitespace() || c.is_control())
    {
        return Err(ExprParseError {
            column: column + name[..i].chars().count(),
            message: format!("invalid character {c:?} in sensor name"),
        });
    }
    Ok(())
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser { text, pos: 0 }
    }

    fn column(&self) -> usize {
        self.text[..self.pos].chars().count() + 1
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ExprParseError> {
        Err(ExprParseError {
            column: self.column(),
            message: message.into(),
        })
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.text.len() - trimmed.len();
    }

    fn eat(&mut self, c: char) -> bool {
        if self.rest().starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn parse(mut self) -> Result<SensorExpression, ExprParseError> {
        self.skip_ws();
        if !self.eat('<') {
            return self.err("expected '<'");
        }
        self.skip_ws();
        let level = self.parse_level()?;
        self.skip_ws();

        let mut filter = None;
        if self.eat(',') {
            self.skip_ws();
            if !self.rest().starts_with("filter") {
                return self.err("expected 'filter'");
            }
            self.pos += "filter".len();
            let Some(close) = self.rest().rfind('>') else {
                return self.err("missing '>'");
            };
            let filter_col = self.column();
            let raw = &self.rest()[..close];
            let pattern = raw.trim();
            if !pattern.is_empty() {
                if !raw.starts_with(char::is_whitespace) {
                    return self.err("expected whitespace after 'filter'");
                }
                let re = Regex::new(pattern).map_err(|e| ExprParseError {
                    column: filter_col,
                    message: format!("invalid filter regex: {e}"),
                })?;
                filter = Some(re);
            }
            self.pos += close;
        }
        if !self.eat('>') {
            return self.err("expected '>' or ','");
        }
        let name_col = self.column();
        let name = self.rest().trim_end();
        validate_name(name, name_col)?;
        Ok(SensorExpression {
            level,
            filter,
            sensor_name: name.to_string(),
        })
    }

    fn parse_level(&mut self) -> Result<LevelSpec, ExprParseError> {
        let word_len = self
            .rest()
            .find(|c: char| !c.is_ascii_alphabetic())
            .unwrap_or(self.rest().len());
        let anchor = match &self.rest()[..word_len] {
            "topdown" => LevelAnchor::TopDown,
            "bottomup" => LevelAnchor::BottomUp,
            other => return self.err(format!("unknown level keyword {other:?}")),
        };
        self.pos += word_len;
        self.skip_ws();
        let sign = if self.eat('+') {
            1
        } else if self.eat('-') {
            -1
        } else {
            return Ok(LevelSpec { anchor, offset: 0 });
        };
        self.skip_ws();
        let digits = self
            .rest()
            .find(|c: char| !c.is_ascii_digit())
            .unwrap_or(self.rest().len());
        if digits == 0 {
            return self.err("expected level offset");
        }
        let offset: i64 = match self.rest()[..digits].parse() {
            Ok(v) => v,
            Err(_) => return self.err("level offset out of range"),
        };
        self.pos += digits;
        Ok(LevelSpec {
            anchor,
            offset: sign * offset,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_listing_forms() {
        let e = SensorExpression::parse("<topdown+1>power").unwrap();
        assert_eq!(e.level, LevelSpec::topdown(1));
        assert_eq!(e.filter_text(), None);
        assert_eq!(e.sensor_name, "power");

        let e = SensorExpression::parse("<bottomup, filter cpu>cpu-cycles").unwrap();
        assert_eq!(e.level, LevelSpec::bottomup(0));
        assert_eq!(e.filter_text(), Some("cpu"));
        assert_eq!(e.sensor_name, "cpu-cycles");

        let e = SensorExpression::parse("<bottomup-1>healthy").unwrap();
        assert_eq!(e.level, LevelSpec::bottomup(1));
    }

    #[test]
    fn tolerates_whitespace() {
        let e = SensorExpression::parse("  < bottomup - 2 ,   filter  ^/r0[1-3]/ >temp ").unwrap();
        assert_eq!(e.level, LevelSpec::bottomup(2));
        assert_eq!(e.filter_text(), Some("^/r0[1-3]/"));
        assert_eq!(e.sensor_name, "temp");
    }

    #[test]
    fn errors_carry_columns() {
        let e = SensorExpression::parse("<sideways>x").unwrap_err();
        assert_eq!(e.column, 2);
        assert!(e.message.contains("sideways"));

        assert_eq!(SensorExpression::parse("topdown>x").unwrap_err().column, 1);
        assert_eq!(SensorExpression::parse("<topdown+>x").unwrap_err().column, 10);
        assert_eq!(SensorExpression::parse("<topdown>").unwrap_err().column, 10);
        assert_eq!(SensorExpression::parse("<topdown>a/b").unwrap_err().column, 11);
        assert_eq!(SensorExpression::parse("<topdown, filter (>x").unwrap_err().column, 17);
        assert_eq!(SensorExpression::parse("<topdown; x").unwrap_err().column, 9);
        assert!(SensorExpression::parse("<topdown, nofilter x>y").is_err());
    }

    #[test]
    fn display_round_trips() {
        for text in [
            "<topdown+1>power",
            "<bottomup, filter cpu>cpu-cycles",
            "<bottomup-1>healthy",
            "<topdown>x",
        ] {
            let e = SensorExpression::parse(text).unwrap();
            assert_eq!(e.to_string(), text);
            assert_eq!(SensorExpression::parse(&e.to_string()).unwrap(), e);
        }
    }
}
