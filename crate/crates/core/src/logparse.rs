//! Binary-diff log query extraction and build-log segmentation.
//!
//! The diff log contributes the basic query: every path-like string found on
//! a section header line. The build log is split into command segments along
//! the `Entering/Leaving directory` markers that make prints, giving one
//! retrievable document per directory visit.

use std::collections::BTreeMap;

use regex::Regex;
use thiserror::Error;

use crate::corpus::{term_counts, tokenize};

/// Recognizes diff-log lines that introduce a compared member.
pub const DEFAULT_DIFF_HEADER_REGEX: &str = r"^[│\s]*(?:---|\+\+\+|├──)\s";
/// Recognizes the directory-enter marker emitted by make.
pub const DEFAULT_ENTER_REGEX: &str = r#"Entering directory [`'"]([^`'"]+)[`'"]"#;
/// Recognizes the directory-leave marker emitted by make.
pub const DEFAULT_LEAVE_REGEX: &str = r#"Leaving directory [`'"]([^`'"]+)[`'"]"#;

#[derive(Debug, Error)]
pub enum LogParseError {
    #[error("invalid {which} regex {pattern:?}: {source}")]
    InvalidRegex {
        which: &'static str,
        pattern: String,
        #[source]
        source: regex::Error,
    },
}

/// Compiled log-recognition patterns; all three are overridable.
#[derive(Debug, Clone)]
pub struct LogPatterns {
    pub diff_header: Regex,
    pub enter_marker: Regex,
    pub leave_marker: Regex,
}

impl Default for LogPatterns {
    fn default() -> Self {
        Self::new(
            DEFAULT_DIFF_HEADER_REGEX,
            DEFAULT_ENTER_REGEX,
            DEFAULT_LEAVE_REGEX,
        )
        .expect("default log patterns compile")
    }
}

impl LogPatterns {
    pub fn new(
        diff_header: &str,
        enter_marker: &str,
        leave_marker: &str,
    ) -> Result<Self, LogParseError> {
        let compile = |which: &'static str, pattern: &str| {
            Regex::new(pattern).map_err(|source| LogParseError::InvalidRegex {
                which,
                pattern: pattern.to_string(),
                source,
            })
        };
        Ok(Self {
            diff_header: compile("diff header", diff_header)?,
            enter_marker: compile("enter marker", enter_marker)?,
            leave_marker: compile("leave marker", leave_marker)?,
        })
    }
}

/// The file names extracted from the diff log, plus their tokenized form.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BasicQuery {
    /// Path strings in first-seen order, de-duplicated.
    pub file_names: Vec<String>,
    /// Concatenation of `tokenize(name)` over `file_names`.
    pub terms: Vec<String>,
}

/// Extract the basic query from a binary-diff log.
///
/// Only section header lines contribute; hunk bodies are ignored. A token is
/// path-like when it contains a `/` or looks like `name.ext` with a short
/// alphabetic extension.
pub fn extract_basic_query(diff_log: &str, patterns: &LogPatterns) -> BasicQuery {
    let mut file_names = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for line in diff_log.lines() {
        if !patterns.diff_header.is_match(line) {
            continue;
        }
        for raw in line.split_whitespace() {
            let token = raw.trim_matches(|c: char| matches!(c, '"' | '\'' | ',' | ';' | ':' | '(' | ')'));
            if token.is_empty() || !is_path_like(token) {
                continue;
            }
            if seen.insert(token.to_string()) {
                file_names.push(token.to_string());
            }
        }
    }
    let terms = file_names.iter().flat_map(|name| tokenize(name)).collect();
    BasicQuery { file_names, terms }
}

fn is_path_like(token: &str) -> bool {
    if token.contains('/') {
        return token.chars().any(|c| c.is_ascii_alphanumeric());
    }
    name_ext_re().is_match(token)
}

fn name_ext_re() -> &'static Regex {
    static RE: std::sync::OnceLock<Regex> = std::sync::OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"^[A-Za-z0-9_][A-Za-z0-9_.+~-]*\.[A-Za-z]{1,6}$").expect("static regex")
    })
}

/// Build commands grouped by the directory they were executed in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandSegment {
    /// Creation order; the preamble segment, when present, is 0.
    pub segment_id: usize,
    /// Directory named by the enter marker; empty for the preamble.
    pub directory: String,
    /// Lines attributed to this segment, joined with `\n`.
    pub text: String,
    /// Number of lines attributed to this segment.
    pub line_count: usize,
    /// term -> occurrence count over `text`.
    pub term_freqs: BTreeMap<String, u32>,
}

/// Split a build log into command segments along directory markers.
///
/// Each enter marker opens a fresh segment and the matching leave marker
/// closes it; with nested markers the innermost open segment receives the
/// lines. Lines outside any marker pair belong to the preamble segment.
/// Every line of the log lands in exactly one segment. An empty log yields
/// no segments; unbalanced markers are tolerated (unclosed segments end at
/// EOF, a stray leave stays in the current segment with a warning).
pub fn segment_build_log(build_log: &str, patterns: &LogPatterns) -> Vec<CommandSegment> {
    struct Pending<'a> {
        directory: String,
        lines: Vec<&'a str>,
    }

    let mut pending: Vec<Pending> = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    let mut preamble: Option<usize> = None;

    for line in build_log.lines() {
        if let Some(caps) = patterns.enter_marker.captures(line) {
            let directory = caps
                .get(1)
                .map(|m| m.as_str().to_string())
                .unwrap_or_default();
            let idx = pending.len();
            pending.push(Pending {
                directory,
                lines: vec![line],
            });
            stack.push(idx);
            continue;
        }
        let is_leave = patterns.leave_marker.is_match(line);
        let target = match stack.last() {
            Some(&idx) => idx,
            None => *preamble.get_or_insert_with(|| {
                let idx = pending.len();
                pending.push(Pending {
                    directory: String::new(),
                    lines: Vec::new(),
                });
                idx
            }),
        };
        pending[target].lines.push(line);
        if is_leave && stack.pop().is_none() {
            log::warn!("leave marker without a matching enter marker: {line}");
        }
    }

    pending
        .into_iter()
        .enumerate()
        .map(|(segment_id, p)| {
            let text = p.lines.join("\n");
            let term_freqs = term_counts(&tokenize(&text));
            CommandSegment {
                segment_id,
                directory: p.directory,
                text,
                line_count: p.lines.len(),
                term_freqs,
            }
        })
        .collect()
}
