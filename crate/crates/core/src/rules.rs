//! Line-oriented heuristic rule engine: regex patterns for constructs that
//! commonly break bit-for-bit reproducibility (embedded timestamps,
//! locale-dependent ordering, unsorted file lists).
//!
//! Files are scanned as plain text regardless of extension, one line at a
//! time, case-sensitively. Matching is a set operation: the engine reports
//! which files matched which rules, not an ordering.

use std::collections::BTreeSet;
use std::path::Path;

use fancy_regex::Regex;
use rayon::prelude::*;
use serde::Deserialize;
use thiserror::Error;

use crate::corpus::Corpus;

/// Ids below this value are reserved for the built-in rule set.
pub const CUSTOM_RULE_ID_MIN: u32 = 100;

#[derive(Debug, Error)]
pub enum RuleError {
    #[error("rule {name} has an invalid pattern {pattern:?}: {source}")]
    InvalidPattern {
        name: String,
        pattern: String,
        #[source]
        source: Box<fancy_regex::Error>,
    },
    #[error("duplicate rule id {0}")]
    DuplicateId(u32),
    #[error("duplicate rule name {0:?}")]
    DuplicateName(String),
    #[error("custom rule {name} uses reserved id {id} (custom ids start at {CUSTOM_RULE_ID_MIN})")]
    ReservedId { name: String, id: u32 },
    #[error("failed to read rules file {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("failed to parse rules file {path}: {source}")]
    Parse {
        path: std::path::PathBuf,
        #[source]
        source: Box<toml::de::Error>,
    },
}

/// A single heuristic rule. The pattern dialect supports negative lookahead
/// assertions and is applied per line.
#[derive(Debug, Clone)]
pub struct Rule {
    pub id: u32,
    pub name: String,
    pub pattern: String,
    pub description: String,
    regex: Regex,
    /// Substring every matching line must contain; a cheap pre-filter that
    /// skips the backtracking engine on the vast majority of lines.
    quick: Option<&'static str>,
}

impl Rule {
    pub fn new(
        id: u32,
        name: impl Into<String>,
        pattern: impl Into<String>,
        description: impl Into<String>,
    ) -> Result<Self, RuleError> {
        let name = name.into();
        let pattern = pattern.into();
        let regex = Regex::new(&pattern).map_err(|source| RuleError::InvalidPattern {
            name: name.clone(),
            pattern: pattern.clone(),
            source: Box::new(source),
        })?;
        Ok(Self {
            id,
            name,
            pattern,
            description: description.into(),
            regex,
            quick: None,
        })
    }

    fn builtin(id: u32, name: &str, pattern: &str, quick: &'static str, description: &str) -> Self {
        let mut rule = Self::new(id, name, pattern, description).expect("built-in pattern compiles");
        rule.quick = Some(quick);
        rule
    }

    /// True iff the pattern matches anywhere in `line`.
    pub fn matches_line(&self, line: &str) -> bool {
        if let Some(quick) = self.quick {
            if !line.contains(quick) {
                return false;
            }
        }
        self.regex.is_match(line).unwrap_or_else(|err| {
            log::warn!("rule {} backtracking error: {err}", self.name);
            false
        })
    }
}

/// The built-in rule set, in id order.
///
/// Two patterns are transcribed best-effort from ambiguous typesetting and
/// frozen by fixture tests: `SORT_IN_PIPE` reads the pipe/backtick pair as an
/// alternation, and `LS_WITHOUT_LOCALE` keeps its lookahead after a `.*`, so
/// it only excludes `LC_ALL=` occurrences that follow the `ls` itself.
pub fn builtin_rules() -> Vec<Rule> {
    vec![
        Rule::builtin(
            1,
            "TIME_MACRO",
            r"__TIME__",
            "__TIME__",
            "C __TIME__ preprocessor macro embeds the compile time",
        ),
        Rule::builtin(
            2,
            "DATE_MACRO",
            r"__DATE__",
            "__DATE__",
            "C __DATE__ preprocessor macro embeds the compile date",
        ),
        Rule::builtin(
            3,
            "GZIP_ARG",
            r"\bgzip\s(?!.*-[a-z9]*n)",
            "gzip",
            "gzip without -n stores a timestamp in the compressed header",
        ),
        Rule::builtin(
            4,
            "DATE_CMD",
            r"(\$\(date)|(\$\(shell\s*date)|(\`date)",
            "date",
            "current date captured via the date shell command",
        ),
        Rule::builtin(
            5,
            "PY_DATE",
            r"datetime\.datetime\.today",
            "datetime.datetime.today",
            "current date taken in Python via datetime.datetime.today",
        ),
        Rule::builtin(
            6,
            "PL_LOCALTIME",
            r"\$\.*localtime",
            "localtime",
            "current time bound to a scalar via localtime in Perl",
        ),
        Rule::builtin(
            7,
            "SYSTEM_DATE",
            r"system.*date",
            "system",
            "system call capturing the current date",
        ),
        Rule::builtin(
            8,
            "DATE_IN_TEX",
            r"\\date.*\\today",
            r"\date",
            "TeX \\date{\\today} embeds the build date in documents",
        ),
        Rule::builtin(
            9,
            "SORT_IN_PIPE",
            r"^.*(?:\||\`)(?!.*LC_ALL=).*\s*sort\b",
            "sort",
            "sort in a pipeline or substitution without a fixed locale",
        ),
        Rule::builtin(
            10,
            "GMTIME",
            r"gmtime\(",
            "gmtime(",
            "current time taken via gmtime()",
        ),
        Rule::builtin(
            11,
            "TAR_GZIP_PIPE",
            r"\btar\b.*\|\s*\bgzip\b",
            "tar",
            "tar piped into gzip embeds a compression timestamp",
        ),
        Rule::builtin(
            12,
            "PL_UNSORTED_KEY",
            r"(^(?!.*sort).*\s*keys\s*%)",
            "keys",
            "iterating Perl hash keys without sort is order-unstable",
        ),
        Rule::builtin(
            13,
            "LS_WITHOUT_LOCALE",
            r"^.*\$\(.*(?!.*LC_ALL=).*\s*\bls\b",
            "$(",
            "ls output substituted without a fixed locale is order-unstable",
        ),
        Rule::builtin(
            14,
            "UNSORTED_WILDCARD",
            r"(^(?!.*sort).*\s*\bwildcard\b)",
            "wildcard",
            "make $(wildcard) without $(sort) yields unstable file order",
        ),
    ]
}

/// A file that matched at least one rule, with per-line evidence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleMatch {
    pub path: String,
    pub rule_ids: BTreeSet<u32>,
    /// (rule id, 1-based line number) evidence pairs, in line order.
    pub lines: Vec<(u32, usize)>,
}

/// Scan one text against every rule; returns (rule id, 1-based line) pairs.
pub fn scan_text(text: &str, rules: &[Rule]) -> Vec<(u32, usize)> {
    let mut hits = Vec::new();
    for (i, line) in text.lines().enumerate() {
        for rule in rules {
            if rule.matches_line(line) {
                hits.push((rule.id, i + 1));
            }
        }
    }
    hits
}

/// Scan every text document of the corpus. The result is semantically an
/// unordered set; it is emitted sorted by path for determinism. Binary files
/// are not scanned.
pub fn filter_corpus(corpus: &Corpus, rules: &[Rule]) -> Vec<RuleMatch> {
    corpus
        .documents()
        .par_iter()
        .filter_map(|doc| {
            let text = corpus.document_text(doc.doc_id);
            let lines = scan_text(&text, rules);
            if lines.is_empty() {
                return None;
            }
            let rule_ids = lines.iter().map(|&(id, _)| id).collect();
            Some(RuleMatch {
                path: doc.path.clone(),
                rule_ids,
                lines,
            })
        })
        .collect()
}

#[derive(Debug, Deserialize)]
struct RulesFile {
    #[serde(default)]
    rules: Vec<RuleRecord>,
}

#[derive(Debug, Deserialize)]
struct RuleRecord {
    id: u32,
    name: String,
    pattern: String,
    #[serde(default)]
    description: String,
}

/// Load custom rules from a TOML file. Custom ids must be >= 100; the
/// built-in set stays frozen.
///
/// ```toml
/// [[rules]]
/// id = 100
/// name = "EPOCH_SECONDS"
/// pattern = '\btime\(\s*NULL\s*\)'
/// description = "wall-clock seconds recorded in output"
/// ```
pub fn load_rules_file(path: &Path) -> Result<Vec<Rule>, RuleError> {
    let raw = std::fs::read_to_string(path).map_err(|source| RuleError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let parsed: RulesFile = toml::from_str(&raw).map_err(|source| RuleError::Parse {
        path: path.to_path_buf(),
        source: Box::new(source),
    })?;
    let mut rules = Vec::with_capacity(parsed.rules.len());
    for record in parsed.rules {
        if record.id < CUSTOM_RULE_ID_MIN {
            return Err(RuleError::ReservedId {
                name: record.name,
                id: record.id,
            });
        }
        rules.push(Rule::new(
            record.id,
            record.name,
            record.pattern,
            record.description,
        )?);
    }
    Ok(rules)
}

/// Combine the built-in set with custom rules, rejecting id or name clashes.
pub fn combined_rules(custom: Vec<Rule>) -> Result<Vec<Rule>, RuleError> {
    let mut rules = builtin_rules();
    rules.extend(custom);
    let mut ids = BTreeSet::new();
    let mut names = BTreeSet::new();
    for rule in &rules {
        if !ids.insert(rule.id) {
            return Err(RuleError::DuplicateId(rule.id));
        }
        if !names.insert(rule.name.clone()) {
            return Err(RuleError::DuplicateName(rule.name.clone()));
        }
    }
    Ok(rules)
}
