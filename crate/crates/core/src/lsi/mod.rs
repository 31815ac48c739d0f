//! Latent semantic space over a term-document matrix.

pub mod svd;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use log::warn;
use sha2::{Digest, Sha256};

use crate::corpus::{TermDocumentMatrix, Weighting};
use crate::error::{Error, Result};
use crate::matrix::{dot, norm, Matrix};
use crate::sidecar::{content_lines, fmt_sig9};

/// Relative threshold below which a singular value counts as zero.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// `min(25, floor(sqrt(min(n, m))) + 5)`, never more than `min(n, m)`.
pub fn default_rank(n: usize, m: usize) -> usize {
    let small = n.min(m);
    let k = ((small as f64).sqrt().floor() as usize + 5).min(25);
    k.min(small).max(1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LsiSpace {
    pub rank: usize,
    pub singular_values: Vec<f64>,
    /// m x k, the right singular vectors.
    pub term_factors: Matrix,
    /// n x k, rows are `U_k Sigma_k` in corpus order.
    pub entity_vectors: Matrix,
    pub terms: Vec<String>,
    pub idf: Vec<f64>,
    pub weighting: Weighting,
    pub source_digest: String,
}

fn matrix_digest(m: &TermDocumentMatrix) -> String {
    let mut h = Sha256::new();
    h.update((m.n_documents() as u64).to_le_bytes());
    h.update((m.n_terms() as u64).to_le_bytes());
    h.update(m.weighting.as_str().as_bytes());
    for t in &m.terms {
        h.update(t.as_bytes());
        h.update([0]);
    }
    for v in m.entries.as_slice() {
        h.update(v.to_bits().to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Truncated SVD of the matrix. A `k` beyond the numerical rank is clamped with a warning.
pub fn lsi_index(matrix: &TermDocumentMatrix, k: usize) -> Result<LsiSpace> {
    let (n, m) = (matrix.n_documents(), matrix.n_terms());
    if n == 0 || m == 0 || matrix.entries.is_all_zero() {
        return Err(Error::Degenerate("term-document matrix is all zero".into()));
    }
    if k == 0 {
        return Err(Error::Validation("LSI rank must be positive".into()));
    }
    let mut k_eff = k;
    if k > n.min(m) {
        warn!("requested rank {k} exceeds min(n, m) = {}; clamping", n.min(m));
        k_eff = n.min(m);
    }
    let decomposition = svd::truncated_svd(&matrix.entries, k_eff);
    let top = decomposition.singular_values[0];
    let numerical = decomposition
        .singular_values
        .iter()
        .take_while(|&&s| s > RANK_TOLERANCE * top)
        .count();
    if numerical < k_eff {
        warn!("requested rank {k_eff} exceeds numerical rank {numerical}; clamping");
        k_eff = numerical;
    }
    let d = decomposition.truncate(k_eff);

    let mut entity_vectors = d.u.clone();
    for i in 0..n {
        for (j, s) in d.singular_values.iter().enumerate() {
            entity_vectors[(i, j)] *= s;
        }
    }
    Ok(LsiSpace {
        rank: k_eff,
        singular_values: d.singular_values,
        term_factors: d.v,
        entity_vectors,
        terms: matrix.terms.clone(),
        idf: matrix.idf.clone(),
        weighting: matrix.weighting,
        source_digest: matrix_digest(matrix),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldIn {
    pub vector: Vec<f64>,
    /// Set when no term of the input is part of the space's vocabulary.
    pub vocabulary_disjoint: bool,
}

impl LsiSpace {
    pub fn n_entities(&self) -> usize {
        self.entity_vectors.rows()
    }

    /// Raw counts of `terms` indexed against this space's vocabulary; unseen terms are dropped.
    pub fn term_vector<S: AsRef<str>>(&self, terms: &[S]) -> Vec<f64> {
        let index: HashMap<&str, usize> = self.terms.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
        let mut q = vec![0.0; self.terms.len()];
        for t in terms {
            if let Some(&j) = index.get(t.as_ref()) {
                q[j] += 1.0;
            }
        }
        q
    }

    /// Projects a raw term-count vector into the space: the counts are weighted
    /// as the space's own matrix was, then multiplied by the term factors.
    pub fn fold_in(&self, raw_term_vector: &[f64]) -> Result<FoldIn> {
        if raw_term_vector.len() != self.terms.len() {
            return Err(Error::Dimension(format!(
                "term vector has length {}, space vocabulary has {}",
                raw_term_vector.len(),
                self.terms.len()
            )));
        }
        if raw_term_vector.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::Validation("term counts must be finite and non-negative".into()));
        }
        let mut vector = vec![0.0; self.rank];
        let mut any = false;
        for (j, &tf) in raw_term_vector.iter().enumerate() {
            if tf == 0.0 {
                continue;
            }
            any = true;
            let w = self.weighting.apply(tf, self.idf[j]);
            for (c, f) in vector.iter_mut().zip(self.term_factors.row(j)) {
                *c += w * f;
            }
        }
        Ok(FoldIn {
            vector,
            vocabulary_disjoint: !any,
        })
    }

    pub fn to_sidecar(&self) -> String {
        let (n, m, k) = (self.n_entities(), self.terms.len(), self.rank);
        let mut out = format!("lsi {n} {m} {k} {} {}\n", self.weighting, self.source_digest);
        let sv: Vec<String> = self.singular_values.iter().map(|s| fmt_sig9(*s)).collect();
        out.push_str(&format!("sigma {}\n", sv.join(" ")));
        for j in 0..m {
            out.push_str(&format!("{} {}", self.terms[j], fmt_sig9(self.idf[j])));
            for v in self.term_factors.row(j) {
                out.push(' ');
                out.push_str(&fmt_sig9(*v));
            }
            out.push('\n');
        }
        for i in 0..n {
            let row: Vec<String> = self.entity_vectors.row(i).iter().map(|v| fmt_sig9(*v)).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_sidecar(text: &str, origin: &str) -> Result<LsiSpace> {
        let bad = |ln: usize, msg: &str| Error::parse(origin, ln, msg);
        let num = |ln: usize, s: &str| s.parse::<f64>().map_err(|_| bad(ln, "bad number"));
        let mut lines = content_lines(text);
        let (ln, header) = lines.next().ok_or_else(|| bad(1, "empty LSI sidecar"))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 6 || h[0] != "lsi" {
            return Err(bad(ln, "expected `lsi <n> <m> <k> <weighting> <digest>` header"));
        }
        let n: usize = h[1].parse().map_err(|_| bad(ln, "bad n"))?;
        let m: usize = h[2].parse().map_err(|_| bad(ln, "bad m"))?;
        let k: usize = h[3].parse().map_err(|_| bad(ln, "bad k"))?;
        let weighting: Weighting = h[4].parse()?;
        let (ln, sigma_line) = lines.next().ok_or_else(|| bad(ln, "missing sigma line"))?;
        let mut parts = sigma_line.split_whitespace();
        if parts.next() != Some("sigma") {
            return Err(bad(ln, "expected `sigma` line"));
        }
        let singular_values = parts.map(|s| num(ln, s)).collect::<Result<Vec<_>>>()?;
        if singular_values.len() != k {
            return Err(bad(ln, "wrong number of singular values"));
        }
        let mut terms = Vec::with_capacity(m);
        let mut idf = Vec::with_capacity(m);
        let mut term_factors = Matrix::zeros(m, k);
        for j in 0..m {
            let (ln, line) = lines.next().ok_or_else(|| bad(ln, "truncated term factors"))?;
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != k + 2 {
                return Err(bad(ln, "wrong term factor row length"));
            }
            terms.push(f[0].to_string());
            idf.push(num(ln, f[1])?);
            for c in 0..k {
                term_factors[(j, c)] = num(ln, f[c + 2])?;
            }
        }
        let mut entity_vectors = Matrix::zeros(n, k);
        for i in 0..n {
            let (ln, line) = lines.next().ok_or_else(|| bad(ln, "truncated entity vectors"))?;
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != k {
                return Err(bad(ln, "wrong entity vector length"));
            }
            for c in 0..k {
                entity_vectors[(i, c)] = num(ln, f[c])?;
            }
        }
        Ok(LsiSpace {
            rank: k,
            singular_values,
            term_factors,
            entity_vectors,
            terms,
            idf,
            weighting,
            source_digest: h[5].to_string(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    #[default]
    Cosine,
    Pearson,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Cosine => "cosine",
            Metric::Pearson => "pearson",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cosine" => Ok(Metric::Cosine),
            "pearson" => Ok(Metric::Pearson),
            _ => Err(Error::Validation(format!("unknown metric `{s}` (cosine | pearson)"))),
        }
    }
}

/// Symmetric n x n dissimilarities with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityMatrix {
    pub n: usize,
    pub entries: Matrix,
    pub metric: Metric,
}

impl DissimilarityMatrix {
    /// Wraps an arbitrary square matrix after checking it is a valid dissimilarity.
    pub fn from_matrix(entries: Matrix, metric: Metric) -> Result<Self> {
        let n = entries.rows();
        if entries.cols() != n {
            return Err(Error::Dimension("dissimilarity matrix must be square".into()));
        }
        for i in 0..n {
            for j in 0..n {
                let v = entries[(i, j)];
                if !v.is_finite() {
                    return Err(Error::Validation(format!("non-finite dissimilarity at ({i}, {j})")));
                }
                if v < 0.0 {
                    return Err(Error::Validation(format!("negative dissimilarity at ({i}, {j})")));
                }
                if (v - entries[(j, i)]).abs() > 1e-12 * v.abs().max(1.0) {
                    return Err(Error::Validation(format!("asymmetric dissimilarity at ({i}, {j})")));
                }
            }
            if entries[(i, i)] != 0.0 {
                return Err(Error::Validation(format!("non-zero diagonal at {i}")));
            }
        }
        Ok(DissimilarityMatrix { n, entries, metric })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }
}

pub fn dissimilarity(space: &LsiSpace, metric: Metric) -> DissimilarityMatrix {
    let rows: Vec<&[f64]> = (0..space.n_entities()).map(|i| space.entity_vectors.row(i)).collect();
    dissimilarity_of(&rows, metric)
}

/// Pairwise dissimilarities of arbitrary concept vectors (e.g. folded-in ones).
/// A vector without direction (zero norm, or zero variance under Pearson) is at
/// distance 1 from every other entity.
pub fn dissimilarity_of<V: AsRef<[f64]>>(vectors: &[V], metric: Metric) -> DissimilarityMatrix {
    let n = vectors.len();
    let prepared: Vec<Option<Vec<f64>>> = vectors
        .iter()
        .map(|v| {
            let v = v.as_ref();
            let mut x = v.to_vec();
            if metric == Metric::Pearson && !x.is_empty() {
                let mean = x.iter().sum::<f64>() / x.len() as f64;
                x.iter_mut().for_each(|e| *e -= mean);
            }
            let nx = norm(&x);
            (nx > 0.0).then(|| x.into_iter().map(|e| e / nx).collect())
        })
        .collect();
    let mut entries = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let d = match (&prepared[i], &prepared[j]) {
                (Some(a), Some(b)) => (1.0 - dot(a, b)).clamp(0.0, 2.0),
                _ => 1.0,
            };
            entries[(i, j)] = d;
            entries[(j, i)] = d;
        }
    }
    DissimilarityMatrix { n, entries, metric }
}
