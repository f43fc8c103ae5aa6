//! Line-oriented `key:value` records separated by tabs.

use std::fmt::Display;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RecordError {
    #[error("line {line}: field `{token}` is not of the form key:value")]
    Malformed { line: usize, token: String },
    #[error("line {line}: missing field `{key}`")]
    Missing { line: usize, key: &'static str },
    #[error("line {line}: invalid value `{value}` for field `{key}`")]
    Invalid { line: usize, key: &'static str, value: String },
}

/// Joins fields as `key:value` pairs separated by tabs.
pub(crate) fn format_record(fields: &[(&str, &dyn Display)]) -> String {
    fields
        .iter()
        .map(|(k, v)| format!("{k}:{v}"))
        .collect::<Vec<_>>()
        .join("\t")
}

/// Parsed fields of one record line.
pub(crate) struct Record<'a> {
    line: usize,
    fields: Vec<(&'a str, &'a str)>,
}

impl<'a> Record<'a> {
    pub(crate) fn parse(text: &'a str, line: usize) -> Result<Self, RecordError> {
        let fields = text
            .split('\t')
            .filter(|t| !t.trim().is_empty())
            .map(|token| {
                token
                    .split_once(':')
                    .map(|(k, v)| (k.trim(), v.trim()))
                    .ok_or_else(|| RecordError::Malformed {
                        line,
                        token: token.to_string(),
                    })
            })
            .collect::<Result<_, _>>()?;
        Ok(Record { line, fields })
    }

    pub(crate) fn raw(&self, key: &'static str) -> Result<&'a str, RecordError> {
        self.fields
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| *v)
            .ok_or(RecordError::Missing { line: self.line, key })
    }

    pub(crate) fn get<T: std::str::FromStr>(&self, key: &'static str) -> Result<T, RecordError> {
        let raw = self.raw(key)?;
        raw.parse().map_err(|_| RecordError::Invalid {
            line: self.line,
            key,
            value: raw.to_string(),
        })
    }
}

/// Iterates non-blank, non-comment (`#`) lines with 1-based line numbers.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
}
