//! Source-tree ingestion: walks a package tree into an immutable, tokenized
//! document collection ready for TF-IDF indexing and rule scanning.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use globset::{Glob, GlobSet, GlobSetBuilder};
use rayon::prelude::*;
use thiserror::Error;
use walkdir::WalkDir;

/// Default per-file size cap: 8 MiB.
pub const DEFAULT_MAX_FILE_SIZE: u64 = 8 * 1024 * 1024;

/// Leading bytes inspected by the binary-content heuristic.
const BINARY_SNIFF_LEN: usize = 8192;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("source root {0} does not exist or is not a directory")]
    RootNotFound(PathBuf),
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid glob pattern {pattern:?}: {source}")]
    Glob {
        pattern: String,
        #[source]
        source: globset::Error,
    },
}

/// Options controlling [`ingest_tree`].
#[derive(Debug, Clone)]
pub struct IngestOptions {
    /// Files larger than this many bytes are skipped with a warning.
    pub max_file_size: u64,
    /// When non-empty, only paths matching one of these globs are ingested.
    pub include: Vec<String>,
    /// Paths matching one of these globs are skipped.
    pub exclude: Vec<String>,
    /// Follow symbolic links while walking. Off by default.
    pub follow_symlinks: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            max_file_size: DEFAULT_MAX_FILE_SIZE,
            include: Vec::new(),
            exclude: Vec::new(),
            follow_symlinks: false,
        }
    }
}

/// A file read from the package tree.
#[derive(Debug, Clone)]
pub struct SourceFile {
    /// `/`-separated path relative to the package root.
    pub path: String,
    /// Raw content.
    pub bytes: Vec<u8>,
    /// Binary files stay out of the document collection but are still
    /// counted in [`Corpus::n_files`].
    pub is_text: bool,
}

impl SourceFile {
    /// Classify `bytes` with the NUL-byte heuristic and build a file record.
    pub fn classify(path: String, bytes: Vec<u8>) -> Self {
        let sniff = &bytes[..bytes.len().min(BINARY_SNIFF_LEN)];
        let is_text = !sniff.contains(&0);
        Self { path, bytes, is_text }
    }
}

/// A tokenized text file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    /// Stable index, assigned in lexicographic path order.
    pub doc_id: usize,
    /// `/`-separated path relative to the package root.
    pub path: String,
    /// term -> number of occurrences in this document.
    pub term_freqs: BTreeMap<String, u32>,
    /// Total token count; equals the sum of `term_freqs`.
    pub length: u64,
}

/// An immutable document collection with corpus-level term statistics.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    files: Vec<SourceFile>,
    documents: Vec<Document>,
    /// Index into `files` for each document.
    doc_files: Vec<usize>,
    /// term -> number of documents containing it.
    df: HashMap<String, u32>,
    warnings: Vec<String>,
}

impl Corpus {
    /// Build a corpus from in-memory files. Files are sorted by path;
    /// duplicate paths keep the first occurrence.
    pub fn from_files(mut files: Vec<SourceFile>) -> Self {
        files.sort_by(|a, b| a.path.cmp(&b.path));
        files.dedup_by(|b, a| a.path == b.path);

        let doc_files: Vec<usize> = files
            .iter()
            .enumerate()
            .filter(|(_, f)| f.is_text)
            .map(|(i, _)| i)
            .collect();

        let documents: Vec<Document> = doc_files
            .par_iter()
            .enumerate()
            .map(|(doc_id, &file_idx)| {
                let file = &files[file_idx];
                let text = String::from_utf8_lossy(&file.bytes);
                let mut term_freqs = BTreeMap::new();
                let mut length = 0u64;
                for term in tokenize(&text) {
                    *term_freqs.entry(term).or_insert(0) += 1;
                    length += 1;
                }
                Document {
                    doc_id,
                    path: file.path.clone(),
                    term_freqs,
                    length,
                }
            })
            .collect();

        let mut df: HashMap<String, u32> = HashMap::new();
        for doc in &documents {
            for term in doc.term_freqs.keys() {
                *df.entry(term.clone()).or_insert(0) += 1;
            }
        }

        Self {
            files,
            documents,
            doc_files,
            df,
            warnings: Vec::new(),
        }
    }

    /// Tokenized text documents, ordered by path.
    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    /// Every ingested file, text and binary, ordered by path.
    pub fn files(&self) -> &[SourceFile] {
        &self.files
    }

    /// Number of text documents (the `N` of the TF-IDF weighting).
    pub fn n_docs(&self) -> usize {
        self.documents.len()
    }

    /// Number of ingested files including binaries.
    pub fn n_files(&self) -> usize {
        self.files.len()
    }

    /// term -> number of documents containing it.
    pub fn df(&self) -> &HashMap<String, u32> {
        &self.df
    }

    /// Decoded text of a document, for line-oriented rule scanning.
    pub fn document_text(&self, doc_id: usize) -> std::borrow::Cow<'_, str> {
        String::from_utf8_lossy(&self.files[self.doc_files[doc_id]].bytes)
    }

    /// Warnings accumulated during ingestion (skipped or unreadable files).
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }
}

/// Walk `root` and ingest every text file into a [`Corpus`].
///
/// Files are ordered lexicographically by their `/`-separated relative path,
/// so repeated ingestion of an unchanged tree yields an identical corpus.
/// Unreadable files and files over the size cap are skipped with a warning.
pub fn ingest_tree(root: &Path, options: &IngestOptions) -> Result<Corpus, CorpusError> {
    if !root.is_dir() {
        return Err(CorpusError::RootNotFound(root.to_path_buf()));
    }
    let include = build_globset(&options.include)?;
    let exclude = build_globset(&options.exclude)?;

    let mut candidates: Vec<(String, PathBuf)> = Vec::new();
    let mut warnings: Vec<String> = Vec::new();
    for entry in WalkDir::new(root).follow_links(options.follow_symlinks) {
        let entry = match entry {
            Ok(e) => e,
            Err(err) => {
                let msg = format!("skipping unreadable entry: {err}");
                log::warn!("{msg}");
                warnings.push(msg);
                continue;
            }
        };
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = entry
            .path()
            .strip_prefix(root)
            .expect("walked path is under root");
        let rel_str = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        if let Some(include) = &include {
            if !include.is_match(&rel_str) {
                continue;
            }
        }
        if let Some(exclude) = &exclude {
            if exclude.is_match(&rel_str) {
                continue;
            }
        }
        candidates.push((rel_str, entry.path().to_path_buf()));
    }
    candidates.sort_by(|a, b| a.0.cmp(&b.0));

    let read: Vec<Result<SourceFile, String>> = candidates
        .par_iter()
        .map(|(rel, abs)| {
            let len = fs::metadata(abs).map(|m| m.len()).unwrap_or(0);
            if len > options.max_file_size {
                return Err(format!(
                    "skipping {rel}: {len} bytes exceeds the {max} byte cap",
                    max = options.max_file_size
                ));
            }
            match fs::read(abs) {
                Ok(bytes) => Ok(SourceFile::classify(rel.clone(), bytes)),
                Err(err) => Err(format!("skipping unreadable file {rel}: {err}")),
            }
        })
        .collect();

    let mut files = Vec::with_capacity(read.len());
    for item in read {
        match item {
            Ok(file) => files.push(file),
            Err(msg) => {
                log::warn!("{msg}");
                warnings.push(msg);
            }
        }
    }

    let mut corpus = Corpus::from_files(files);
    corpus.warnings = warnings;
    Ok(corpus)
}

fn build_globset(patterns: &[String]) -> Result<Option<GlobSet>, CorpusError> {
    if patterns.is_empty() {
        return Ok(None);
    }
    let mut builder = GlobSetBuilder::new();
    for pattern in patterns {
        let glob = Glob::new(pattern).map_err(|source| CorpusError::Glob {
            pattern: pattern.clone(),
            source,
        })?;
        builder.add(glob);
    }
    let set = builder.build().map_err(|source| CorpusError::Glob {
        pattern: patterns.join(","),
        source,
    })?;
    Ok(Some(set))
}

fn is_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn is_path_char(c: char) -> bool {
    is_word_char(c) || c == '/' || c == '.' || c == '-'
}

/// Split `text` into lowercase terms.
///
/// Base terms are maximal `[A-Za-z0-9_]` runs of length >= 2. Runs that form
/// path-like strings (contain a `/`) additionally emit each `/`-component
/// that is not itself a plain word (e.g. `libcompat.a`, `bin-x86_64`) plus
/// the normalized joined path, so file names from a binary-diff log match
/// path mentions inside Makefiles and logs. The exact emission order is
/// frozen by a golden test.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(start) = rest.find(is_path_char) {
        let tail = &rest[start..];
        let end = tail
            .find(|c: char| !is_path_char(c))
            .unwrap_or(tail.len());
        let run = &tail[..end];
        tokenize_run(run, &mut out);
        rest = &tail[end..];
    }
    out
}

fn tokenize_run(run: &str, out: &mut Vec<String>) {
    for word in run.split(|c: char| !is_word_char(c)) {
        if word.len() >= 2 {
            out.push(word.to_ascii_lowercase());
        }
    }
    if !run.contains('/') {
        return;
    }
    let comps: Vec<String> = run
        .split('/')
        .map(|c| c.trim_end_matches('.'))
        .filter(|c| c.len() >= 2 || (c.len() == 1 && *c != "."))
        .map(|c| c.to_ascii_lowercase())
        .collect();
    for comp in &comps {
        // Plain words are already covered by the base split above.
        if comp.len() >= 2 && (comp.contains('.') || comp.contains('-')) {
            out.push(comp.clone());
        }
    }
    if comps.len() >= 2 {
        out.push(comps.join("/"));
    }
}

/// Count occurrences of each term in `terms`.
pub fn term_counts<S: AsRef<str>>(terms: &[S]) -> BTreeMap<String, u32> {
    let mut counts = BTreeMap::new();
    for term in terms {
        *counts.entry(term.as_ref().to_string()).or_insert(0) += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;
    use tempfile::tempdir;

    fn write(root: &Path, rel: &str, contents: &[u8]) {
        let path = root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).unwrap();
        }
        fs::write(path, contents).unwrap();
    }

    #[test]
    fn tokenize_golden_path_like() {
        // Frozen emission order: base words, non-word components, joined path.
        assert_eq!(
            tokenize("usr/lib/libcompat.a"),
            vec![
                "usr",
                "lib",
                "libcompat",
                "libcompat.a",
                "usr/lib/libcompat.a"
            ]
        );
        assert_eq!(
            tokenize("./usr/lib/diet/lib/libcompat.a"),
            vec![
                "usr",
                "lib",
                "diet",
                "lib",
                "libcompat",
                "libcompat.a",
                "usr/lib/diet/lib/libcompat.a"
            ]
        );
        assert_eq!(
            tokenize("ar cru bin-x86_64/libcompat.a dyn_obj/x.o"),
            vec![
                "ar",
                "cru",
                "bin",
                "x86_64",
                "libcompat",
                "bin-x86_64",
                "libcompat.a",
                "bin-x86_64/libcompat.a",
                "dyn_obj",
                "x.o",
                "dyn_obj/x.o"
            ]
        );
    }

    #[test]
    fn tokenize_empty_and_plain() {
        assert_eq!(tokenize(""), Vec::<String>::new());
        assert_eq!(tokenize("AR cru"), vec!["ar", "cru"]);
        assert_eq!(tokenize("int x;"), vec!["int"]);
        assert_eq!(tokenize("__DATE__"), vec!["__date__"]);
    }

    #[test]
    fn tokenize_is_deterministic_across_threads() {
        let text = "ar cru bin-x86_64/libcompat.a $(wildcard src/*.c) usr/lib";
        let expected = tokenize(text);
        let results: Vec<Vec<String>> = (0..8)
            .into_par_iter()
            .map(|_| tokenize(text))
            .collect();
        for r in results {
            assert_eq!(r, expected);
        }
    }

    #[test]
    fn ingest_empty_dir() {
        let dir = tempdir().unwrap();
        let corpus = ingest_tree(dir.path(), &IngestOptions::default()).unwrap();
        assert_eq!(corpus.n_docs(), 0);
        assert_eq!(corpus.n_files(), 0);
    }

    #[test]
    fn ingest_two_files_document_frequencies() {
        let dir = tempdir().unwrap();
        write(dir.path(), "a.c", b"int x;");
        write(dir.path(), "b.c", b"int y;");
        let corpus = ingest_tree(dir.path(), &IngestOptions::default()).unwrap();
        assert_eq!(corpus.n_docs(), 2);
        assert_eq!(corpus.df().get("int"), Some(&2));
        // Single-character identifiers fall below the minimum token length.
        assert_eq!(corpus.df().get("x"), None);
        assert_eq!(corpus.documents()[0].path, "a.c");
        assert_eq!(corpus.documents()[1].path, "b.c");
    }

    #[test]
    fn ingest_binary_excluded_from_documents() {
        let dir = tempdir().unwrap();
        write(dir.path(), "blob.bin", b"abc\0def");
        write(dir.path(), "ok.txt", b"hello world");
        let corpus = ingest_tree(dir.path(), &IngestOptions::default()).unwrap();
        assert_eq!(corpus.n_files(), 2);
        assert_eq!(corpus.n_docs(), 1);
        assert_eq!(corpus.documents()[0].path, "ok.txt");
        let blob = corpus.files().iter().find(|f| f.path == "blob.bin").unwrap();
        assert!(!blob.is_text);
    }

    #[test]
    fn ingest_missing_root_is_fatal() {
        let err = ingest_tree(Path::new("/nonexistent/for/sure"), &IngestOptions::default());
        assert!(matches!(err, Err(CorpusError::RootNotFound(_))));
    }

    #[test]
    fn ingest_size_cap_skips_with_warning() {
        let dir = tempdir().unwrap();
        write(dir.path(), "big.txt", &vec![b'a'; 4096]);
        write(dir.path(), "small.txt", b"fits");
        let options = IngestOptions {
            max_file_size: 1024,
            ..IngestOptions::default()
        };
        let corpus = ingest_tree(dir.path(), &options).unwrap();
        assert_eq!(corpus.n_files(), 1);
        assert_eq!(corpus.warnings().len(), 1);
        assert!(corpus.warnings()[0].contains("big.txt"));
    }

    #[test]
    fn ingest_include_exclude_globs() {
        let dir = tempdir().unwrap();
        write(dir.path(), "src/a.c", b"int a2;");
        write(dir.path(), "src/b.h", b"int b2;");
        write(dir.path(), "doc/readme", b"hi there");
        let options = IngestOptions {
            include: vec!["src/**".to_string()],
            exclude: vec!["**/*.h".to_string()],
            ..IngestOptions::default()
        };
        let corpus = ingest_tree(dir.path(), &options).unwrap();
        let paths: Vec<&str> = corpus.files().iter().map(|f| f.path.as_str()).collect();
        assert_eq!(paths, vec!["src/a.c"]);
    }

    #[test]
    fn ingest_symlinks_not_followed_by_default() {
        let dir = tempdir().unwrap();
        write(dir.path(), "real/file.txt", b"content here");
        std::os::unix::fs::symlink(dir.path().join("real"), dir.path().join("link")).unwrap();
        let corpus = ingest_tree(dir.path(), &IngestOptions::default()).unwrap();
        assert_eq!(corpus.n_files(), 1);

        let options = IngestOptions {
            follow_symlinks: true,
            ..IngestOptions::default()
        };
        let followed = ingest_tree(dir.path(), &options).unwrap();
        assert_eq!(followed.n_files(), 2);
    }

    #[test]
    fn ingest_is_idempotent() {
        let dir = tempdir().unwrap();
        write(dir.path(), "Makefile", b"all:\n\tgzip doc.txt\n");
        write(dir.path(), "src/main.c", b"int main(void) { return 0; }\n");
        let a = ingest_tree(dir.path(), &IngestOptions::default()).unwrap();
        let b = ingest_tree(dir.path(), &IngestOptions::default()).unwrap();
        assert_eq!(a.documents(), b.documents());
        assert_eq!(a.n_files(), b.n_files());
    }

    #[test]
    fn df_matches_brute_force_recount() {
        let mut files = Vec::new();
        let texts = [
            "ar cru libcompat.a",
            "int main(void)",
            "gzip -9 doc.txt && ar x libcompat.a",
            "wildcard src/*.c sort",
            "",
        ];
        for (i, text) in texts.iter().enumerate() {
            files.push(SourceFile::classify(format!("f{i}"), text.as_bytes().to_vec()));
        }
        let corpus = Corpus::from_files(files);

        let mut brute: HashMap<String, u32> = HashMap::new();
        for doc in corpus.documents() {
            let distinct: HashSet<&String> = doc.term_freqs.keys().collect();
            for term in distinct {
                *brute.entry(term.clone()).or_insert(0) += 1;
            }
        }
        assert_eq!(&brute, corpus.df());
        for doc in corpus.documents() {
            let total: u64 = doc.term_freqs.values().map(|&c| u64::from(c)).sum();
            assert_eq!(total, doc.length);
            assert!(doc.term_freqs.values().all(|&c| c >= 1));
        }
    }
}
