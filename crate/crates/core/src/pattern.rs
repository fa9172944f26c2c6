//! Named, anchored extraction patterns.
//!
//! Tools answer with `snd-event(<term>)` and `snd-value(<term>)`; a
//! coordinator pulls the term out with the built-in `rec-event` and
//! `rec-value` patterns, named after the receiving side of each primitive.
//! Applications add their own patterns (`window`, `start`, ...) to the same
//! table. Matching is plain greedy regex matching; nested terms are not
//! understood.

use alloc::borrow::ToOwned;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use regex::Regex;

pub const REC_EVENT: &str = "rec-event";
pub const REC_VALUE: &str = "rec-value";

const REC_EVENT_PATTERN: &str = r"^snd-event\((.+)\)$";
const REC_VALUE_PATTERN: &str = r"^snd-value\((.+)\)$";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PatternError {
    #[error("no pattern named `{0}`")]
    Unknown(String),
    #[error("pattern `{0}` is built in and cannot be redefined")]
    Builtin(String),
    #[error("pattern `{0}` must be anchored with `^` and `$`")]
    Unanchored(String),
    #[error("pattern `{pattern}` does not compile: {reason}")]
    Invalid { pattern: String, reason: String },
}

/// True when `pattern` starts with `^` and ends with an unescaped `$`.
pub fn is_anchored(pattern: &str) -> bool {
    let Some(body) = pattern.strip_prefix('^') else {
        return false;
    };
    let Some(rest) = body.strip_suffix('$') else {
        return false;
    };
    let escapes = rest.bytes().rev().take_while(|b| *b == b'\\').count();
    escapes % 2 == 0
}

/// Compiles an anchored pattern, rejecting unanchored ones.
pub fn compile_anchored(pattern: &str) -> Result<Regex, PatternError> {
    if !is_anchored(pattern) {
        return Err(PatternError::Unanchored(pattern.to_owned()));
    }
    Regex::new(pattern).map_err(|e| PatternError::Invalid {
        pattern: pattern.to_owned(),
        reason: alloc::format!("{e}"),
    })
}

/// Captures of `regex` on a whole-line match; groups that did not
/// participate come back empty.
pub fn captures(regex: &Regex, line: &str) -> Option<Vec<String>> {
    let caps = regex.captures(line)?;
    Some(
        caps.iter()
            .skip(1)
            .map(|m| m.map(|m| m.as_str().to_owned()).unwrap_or_default())
            .collect(),
    )
}

#[derive(Debug, Clone)]
pub struct PatternTable {
    entries: BTreeMap<String, Regex>,
}

impl Default for PatternTable {
    fn default() -> Self {
        Self::new()
    }
}

impl PatternTable {
    /// A table holding only `rec-event` and `rec-value`.
    pub fn new() -> Self {
        let mut entries = BTreeMap::new();
        for (name, pattern) in [(REC_EVENT, REC_EVENT_PATTERN), (REC_VALUE, REC_VALUE_PATTERN)] {
            let regex = Regex::new(pattern).expect("built-in pattern compiles");
            entries.insert(name.to_owned(), regex);
        }
        PatternTable { entries }
    }

    pub fn define(&mut self, name: &str, pattern: &str) -> Result<(), PatternError> {
        if name == REC_EVENT || name == REC_VALUE {
            return Err(PatternError::Builtin(name.to_owned()));
        }
        let regex = compile_anchored(pattern)?;
        self.entries.insert(name.to_owned(), regex);
        Ok(())
    }

    /// Builder form of [`define`](Self::define).
    pub fn with(mut self, name: &str, pattern: &str) -> Result<Self, PatternError> {
        self.define(name, pattern)?;
        Ok(self)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    /// Capture groups of `name` when it matches the whole of `line`.
    ///
    /// An unknown name is an error, not a failed match.
    pub fn extract(&self, name: &str, line: &str) -> Result<Option<Vec<String>>, PatternError> {
        let regex = self
            .entries
            .get(name)
            .ok_or_else(|| PatternError::Unknown(name.to_owned()))?;
        Ok(captures(regex, line))
    }

    /// First capture of `name`, for the common single-argument patterns.
    pub fn extract_one(&self, name: &str, line: &str) -> Result<Option<String>, PatternError> {
        Ok(self
            .extract(name, line)?
            .and_then(|caps| caps.into_iter().next()))
    }
}
