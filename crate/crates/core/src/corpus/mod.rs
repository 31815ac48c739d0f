//! Source-tree ingestion, identifier tokenization and term-document matrices.

mod matrix;
mod tokenize;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use globset::{Glob, GlobSet, GlobSetBuilder};
use log::warn;
use sha2::{Digest, Sha256};
use walkdir::WalkDir;

use crate::error::{Error, Result};
use crate::sidecar::{content_lines, escape_field, fmt_sig9, unescape_field};

pub use matrix::{build_matrix, TermDocumentMatrix, Weighting, DEFAULT_MIN_DOC_FREQ};
pub use tokenize::{split_identifier, strip_comments_and_strings, tokenize, StopWords, Tokenizer, MIN_TERM_LEN};

/// File category, used by the marker layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DocKind {
    Source,
    Markup,
    Config,
    Property,
    Other,
}

impl DocKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DocKind::Source => "source",
            DocKind::Markup => "markup",
            DocKind::Config => "config",
            DocKind::Property => "property",
            DocKind::Other => "other",
        }
    }
}

impl fmt::Display for DocKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DocKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "source" => DocKind::Source,
            "markup" => DocKind::Markup,
            "config" => DocKind::Config,
            "property" => DocKind::Property,
            "other" => DocKind::Other,
            _ => return Err(Error::Validation(format!("unknown file kind `{s}`"))),
        })
    }
}

/// Extension (lowercase, without dot) to kind lookup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KindMap {
    by_extension: BTreeMap<String, DocKind>,
}

impl Default for KindMap {
    fn default() -> Self {
        use DocKind::*;
        let table: &[(&str, DocKind)] = &[
            ("java", Source), ("c", Source), ("h", Source), ("cc", Source), ("cpp", Source),
            ("cxx", Source), ("hpp", Source), ("cs", Source), ("rs", Source), ("py", Source),
            ("js", Source), ("ts", Source), ("go", Source), ("kt", Source), ("scala", Source),
            ("swift", Source), ("m", Source), ("rb", Source), ("php", Source), ("st", Source),
            ("groovy", Source),
            ("jsp", Markup), ("html", Markup), ("htm", Markup), ("xhtml", Markup), ("jspf", Markup),
            ("vm", Markup), ("ftl", Markup),
            ("xml", Config), ("xsd", Config), ("json", Config), ("yaml", Config), ("yml", Config),
            ("toml", Config), ("ini", Config), ("cfg", Config), ("conf", Config),
            ("properties", Property),
        ];
        KindMap {
            by_extension: table.iter().map(|(e, k)| (e.to_string(), *k)).collect(),
        }
    }
}

impl KindMap {
    pub fn empty() -> Self {
        KindMap {
            by_extension: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, extension: &str, kind: DocKind) {
        self.by_extension
            .insert(extension.trim_start_matches('.').to_ascii_lowercase(), kind);
    }

    pub fn kind_of(&self, path: &str) -> DocKind {
        let name = path.rsplit('/').next().unwrap_or(path);
        match name.rsplit_once('.') {
            Some((stem, ext)) if !stem.is_empty() => self
                .by_extension
                .get(&ext.to_ascii_lowercase())
                .copied()
                .unwrap_or(DocKind::Other),
            _ => DocKind::Other,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    /// Relative path with `/` separators.
    pub id: String,
    pub display_name: String,
    pub text: String,
    pub kloc: f64,
    pub kind: DocKind,
    pub snapshot: String,
}

impl Document {
    pub fn new(id: &str, text: String, kind: DocKind, snapshot: &str) -> Self {
        Document {
            id: id.to_string(),
            display_name: display_name_of(id),
            kloc: line_count(&text) as f64 / 1000.0,
            text,
            kind,
            snapshot: snapshot.to_string(),
        }
    }
}

/// Physical line count: newline-terminated lines plus a trailing unterminated one.
pub fn line_count(text: &str) -> usize {
    text.lines().count()
}

fn display_name_of(id: &str) -> String {
    let name = id.rsplit('/').next().unwrap_or(id);
    match name.rsplit_once('.') {
        Some((stem, _)) if !stem.is_empty() => stem.to_string(),
        _ => name.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ManifestStatus {
    Ingested,
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: String,
    pub bytes: u64,
    /// Lowercase hex SHA-256 of the file content; empty for skipped files.
    pub digest: String,
    pub status: ManifestStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub documents: Vec<Document>,
    pub snapshot: String,
    pub manifest: Vec<ManifestEntry>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

impl Corpus {
    /// Builds a corpus from in-memory `(id, text)` pairs.
    pub fn from_texts<I, S, T>(snapshot: &str, texts: I, kinds: &KindMap) -> Result<Corpus>
    where
        I: IntoIterator<Item = (S, T)>,
        S: AsRef<str>,
        T: Into<String>,
    {
        let mut documents = Vec::new();
        let mut manifest = Vec::new();
        for (id, text) in texts {
            let id = id.as_ref();
            let text: String = text.into();
            manifest.push(ManifestEntry {
                path: id.to_string(),
                bytes: text.len() as u64,
                digest: sha256_hex(text.as_bytes()),
                status: ManifestStatus::Ingested,
            });
            documents.push(Document::new(id, text, kinds.kind_of(id), snapshot));
        }
        Corpus::assemble(snapshot, documents, manifest)
    }

    fn assemble(snapshot: &str, mut documents: Vec<Document>, mut manifest: Vec<ManifestEntry>) -> Result<Corpus> {
        documents.sort_by(|a, b| a.id.cmp(&b.id));
        manifest.sort_by(|a, b| a.path.cmp(&b.path));
        for pair in documents.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(Error::Validation(format!("duplicate document id `{}`", pair[0].id)));
            }
        }
        Ok(Corpus {
            documents,
            snapshot: snapshot.to_string(),
            manifest,
        })
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn ids(&self) -> Vec<String> {
        self.documents.iter().map(|d| d.id.clone()).collect()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.documents.binary_search_by(|d| d.id.as_str().cmp(id)).ok()
    }

    /// Hex digest over the manifest lines; identical inputs give identical fingerprints.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        for e in &self.manifest {
            hasher.update(e.path.as_bytes());
            hasher.update([0]);
            hasher.update(e.bytes.to_le_bytes());
            hasher.update(e.digest.as_bytes());
            hasher.update([matches!(e.status, ManifestStatus::Ingested) as u8]);
        }
        hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Sidecar text: a header, one `doc` line per document, one manifest line per file.
    pub fn to_sidecar(&self) -> String {
        let mut out = format!("corpus\t{}\t{}\n", escape_field(&self.snapshot), self.documents.len());
        for d in &self.documents {
            out.push_str(&format!(
                "doc\t{}\t{}\t{}\t{}\n",
                escape_field(&d.id),
                d.kind,
                fmt_sig9(d.kloc),
                escape_field(&d.display_name)
            ));
        }
        for e in &self.manifest {
            match &e.status {
                ManifestStatus::Ingested => out.push_str(&format!(
                    "file\t{}\t{}\t{}\n",
                    escape_field(&e.path),
                    e.bytes,
                    e.digest
                )),
                ManifestStatus::Skipped(reason) => out.push_str(&format!(
                    "skipped\t{}\t{}\t{}\n",
                    escape_field(&e.path),
                    e.bytes,
                    escape_field(reason)
                )),
            }
        }
        out
    }
}

/// Summary of a corpus sidecar, enough to re-derive report values.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSummary {
    pub snapshot: String,
    pub documents: Vec<(String, DocKind, f64)>,
    pub files: usize,
    pub skipped: usize,
}

pub fn parse_corpus_sidecar(text: &str, origin: &str) -> Result<CorpusSummary> {
    let mut lines = content_lines(text);
    let (ln, header) = lines.next().ok_or_else(|| Error::parse(origin, 1, "empty corpus sidecar"))?;
    let h: Vec<&str> = header.split('\t').collect();
    if h.len() != 3 || h[0] != "corpus" {
        return Err(Error::parse(origin, ln, "expected `corpus <snapshot> <n>` header"));
    }
    let n: usize = h[2].parse().map_err(|_| Error::parse(origin, ln, "bad document count"))?;
    let mut summary = CorpusSummary {
        snapshot: unescape_field(h[1]),
        documents: Vec::with_capacity(n),
        files: 0,
        skipped: 0,
    };
    for (ln, line) in lines {
        let f: Vec<&str> = line.split('\t').collect();
        match f[0] {
            "doc" if f.len() == 5 => {
                let kind = f[2].parse().map_err(|_| Error::parse(origin, ln, "bad kind"))?;
                let kloc = f[3].parse().map_err(|_| Error::parse(origin, ln, "bad kloc"))?;
                summary.documents.push((unescape_field(f[1]), kind, kloc));
            }
            "file" => summary.files += 1,
            "skipped" => summary.skipped += 1,
            _ => return Err(Error::parse(origin, ln, "unrecognized corpus line")),
        }
    }
    if summary.documents.len() != n {
        return Err(Error::parse(origin, 1, "document count does not match header"));
    }
    Ok(summary)
}

/// Include/exclude patterns and the extension map used by [`ingest`].
#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub include: Vec<String>,
    pub exclude: Vec<String>,
    pub kinds: KindMap,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            include: vec!["**/*".to_string()],
            exclude: Vec::new(),
            kinds: KindMap::default(),
        }
    }
}

fn glob_set(patterns: &[String]) -> Result<GlobSet> {
    let mut builder = GlobSetBuilder::new();
    for p in patterns {
        let glob = Glob::new(p).map_err(|e| Error::Pattern {
            pattern: p.clone(),
            message: e.to_string(),
        })?;
        builder.add(glob);
    }
    builder.build().map_err(|e| Error::Pattern {
        pattern: patterns.join(","),
        message: e.to_string(),
    })
}

/// Reads every file under `root` that matches an include pattern and no exclude
/// pattern. An empty include list matches nothing.
pub fn ingest(root: &Path, options: &IngestOptions, snapshot: &str) -> Result<Corpus> {
    fs::read_dir(root).map_err(|source| Error::UnreadableRoot {
        path: root.to_path_buf(),
        source,
    })?;
    let include = glob_set(&options.include)?;
    let exclude = glob_set(&options.exclude)?;

    let mut documents = Vec::new();
    let mut manifest = Vec::new();
    let mut seen = HashSet::new();
    for entry in WalkDir::new(root).sort_by_file_name() {
        let entry = match entry {
            Ok(e) => e,
            Err(err) => {
                let path = err
                    .path()
                    .and_then(|p| p.strip_prefix(root).ok())
                    .map(|p| p.to_string_lossy().replace('\\', "/"))
                    .unwrap_or_default();
                warn!("skipping unreadable entry {path}: {err}");
                manifest.push(ManifestEntry {
                    path,
                    bytes: 0,
                    digest: String::new(),
                    status: ManifestStatus::Skipped(err.to_string()),
                });
                continue;
            }
        };
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = match entry.path().strip_prefix(root) {
            Ok(r) => r.to_string_lossy().replace('\\', "/"),
            Err(_) => continue,
        };
        if !include.is_match(&rel) || exclude.is_match(&rel) {
            continue;
        }
        match fs::read(entry.path()) {
            Ok(bytes) => {
                if !seen.insert(rel.clone()) {
                    continue;
                }
                manifest.push(ManifestEntry {
                    path: rel.clone(),
                    bytes: bytes.len() as u64,
                    digest: sha256_hex(&bytes),
                    status: ManifestStatus::Ingested,
                });
                let text = String::from_utf8_lossy(&bytes).into_owned();
                documents.push(Document::new(&rel, text, options.kinds.kind_of(&rel), snapshot));
            }
            Err(err) => {
                warn!("skipping unreadable file {rel}: {err}");
                manifest.push(ManifestEntry {
                    path: rel,
                    bytes: 0,
                    digest: String::new(),
                    status: ManifestStatus::Skipped(err.to_string()),
                });
            }
        }
    }
    Corpus::assemble(snapshot, documents, manifest)
}
