use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::{Corpus, Tokenizer};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::sidecar::{content_lines, fmt_sig9};

pub const DEFAULT_MIN_DOC_FREQ: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    Raw,
    #[default]
    TfIdf,
}

impl Weighting {
    pub fn as_str(self) -> &'static str {
        match self {
            Weighting::Raw => "raw",
            Weighting::TfIdf => "tf-idf",
        }
    }

    /// Weight of a raw count `tf` for a term with inverse document frequency `idf`.
    pub fn apply(self, tf: f64, idf: f64) -> f64 {
        match self {
            Weighting::Raw => tf,
            Weighting::TfIdf => (1.0 + tf).ln() * idf,
        }
    }
}

impl fmt::Display for Weighting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Weighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(Weighting::Raw),
            "tf-idf" | "tfidf" => Ok(Weighting::TfIdf),
            _ => Err(Error::Validation(format!("unknown weighting `{s}` (raw | tf-idf)"))),
        }
    }
}

/// Weighted term frequencies, one row per document and one column per term.
#[derive(Debug, Clone, PartialEq)]
pub struct TermDocumentMatrix {
    pub terms: Vec<String>,
    pub entries: Matrix,
    pub weighting: Weighting,
    /// `ln(n / df)` per kept term; all ones under raw weighting.
    pub idf: Vec<f64>,
}

impl TermDocumentMatrix {
    pub fn n_documents(&self) -> usize {
        self.entries.rows()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn term_index(&self, term: &str) -> Option<usize> {
        self.terms.binary_search_by(|t| t.as_str().cmp(term)).ok()
    }

    pub fn to_sidecar(&self) -> String {
        let (n, m) = (self.n_documents(), self.n_terms());
        let mut out = format!("tdm {n} {m} {}\n", self.weighting);
        for (t, idf) in self.terms.iter().zip(&self.idf) {
            out.push_str(&format!("{t} {}\n", fmt_sig9(*idf)));
        }
        let nnz = self.entries.as_slice().iter().filter(|v| **v != 0.0).count();
        out.push_str(&format!("entries {nnz}\n"));
        for i in 0..n {
            for (j, v) in self.entries.row(i).iter().enumerate() {
                if *v != 0.0 {
                    out.push_str(&format!("{i} {j} {}\n", fmt_sig9(*v)));
                }
            }
        }
        out
    }

    pub fn from_sidecar(text: &str, origin: &str) -> Result<TermDocumentMatrix> {
        let bad = |ln: usize, msg: &str| Error::parse(origin, ln, msg);
        let mut lines = content_lines(text);
        let (ln, header) = lines.next().ok_or_else(|| bad(1, "empty matrix sidecar"))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 4 || h[0] != "tdm" {
            return Err(bad(ln, "expected `tdm <n> <m> <weighting>` header"));
        }
        let n: usize = h[1].parse().map_err(|_| bad(ln, "bad n"))?;
        let m: usize = h[2].parse().map_err(|_| bad(ln, "bad m"))?;
        let weighting: Weighting = h[3].parse()?;
        let mut terms = Vec::with_capacity(m);
        let mut idf = Vec::with_capacity(m);
        for _ in 0..m {
            let (ln, line) = lines.next().ok_or_else(|| bad(ln, "truncated term list"))?;
            let (t, w) = line.split_once(' ').ok_or_else(|| bad(ln, "expected `<term> <idf>`"))?;
            terms.push(t.to_string());
            idf.push(w.trim().parse().map_err(|_| bad(ln, "bad idf"))?);
        }
        let (ln, entries_line) = lines.next().ok_or_else(|| bad(ln, "missing entries section"))?;
        if !entries_line.starts_with("entries ") {
            return Err(bad(ln, "expected `entries <count>`"));
        }
        let mut entries = Matrix::zeros(n, m);
        for (ln, line) in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(bad(ln, "expected `<row> <col> <value>`"));
            }
            let i: usize = f[0].parse().map_err(|_| bad(ln, "bad row"))?;
            let j: usize = f[1].parse().map_err(|_| bad(ln, "bad col"))?;
            if i >= n || j >= m {
                return Err(bad(ln, "entry index out of range"));
            }
            entries[(i, j)] = f[2].parse().map_err(|_| bad(ln, "bad value"))?;
        }
        Ok(TermDocumentMatrix {
            terms,
            entries,
            weighting,
            idf,
        })
    }
}

/// Counts each document's terms and builds the weighted matrix.
///
/// Columns whose document frequency is below `min_doc_freq` are dropped, and under
/// tf-idf so are columns present in every document (their idf is zero).
pub fn build_matrix(
    corpus: &Corpus,
    weighting: Weighting,
    min_doc_freq: usize,
    tokenizer: &Tokenizer,
) -> Result<TermDocumentMatrix> {
    if corpus.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    let n = corpus.len();
    let counts: Vec<BTreeMap<String, f64>> = corpus
        .documents
        .iter()
        .map(|d| {
            let mut c = BTreeMap::new();
            for t in tokenizer.terms(&d.text) {
                *c.entry(t).or_insert(0.0) += 1.0;
            }
            c
        })
        .collect();

    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for c in &counts {
        for t in c.keys() {
            *df.entry(t.as_str()).or_insert(0) += 1;
        }
    }
    if df.is_empty() {
        return Err(Error::EmptyVocabulary);
    }

    let mut terms = Vec::new();
    let mut idf = Vec::new();
    for (t, &f) in &df {
        if f < min_doc_freq || (weighting == Weighting::TfIdf && f == n) {
            continue;
        }
        terms.push(t.to_string());
        idf.push(match weighting {
            Weighting::Raw => 1.0,
            Weighting::TfIdf => (n as f64 / f as f64).ln(),
        });
    }
    if terms.is_empty() {
        return Err(Error::EmptyVocabulary);
    }

    let mut entries = Matrix::zeros(n, terms.len());
    for (i, c) in counts.iter().enumerate() {
        for (j, t) in terms.iter().enumerate() {
            if let Some(&tf) = c.get(t) {
                entries[(i, j)] = weighting.apply(tf, idf[j]);
            }
        }
    }
    Ok(TermDocumentMatrix {
        terms,
        entries,
        weighting,
        idf,
    })
}
