//! Synthetic corpora with planted vocabulary clusters, for demos and tests.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::StopWords;
use crate::error::{Error, Result};

pub const CLUSTERS: usize = 3;
pub const DOCS_PER_CLUSTER: usize = 10;
pub const SHARED_TERMS: usize = 10;
pub const EXCLUSIVE_TERMS: usize = 20;
/// Seed of the reference fixture used by the acceptance runs.
pub const DEFAULT_SEED: u64 = 1;
const OWN_PER_DOC: usize = 16;
const SHARED_PER_DOC: usize = 5;

const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
const VOWELS: &[u8] = b"aeiou";
const PACKAGES: [&str; CLUSTERS] = ["core", "view", "wire"];
const ROLES: [&str; 5] = ["Service", "Store", "Panel", "Codec", "Task"];

/// Documents as `(id, text)` plus the planted cluster of each.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedCorpus {
    pub documents: Vec<(String, String)>,
    pub labels: Vec<usize>,
    pub shared: Vec<String>,
    pub exclusive: Vec<Vec<String>>,
}

/// Distinct lowercase pseudo-words that survive tokenization unchanged.
fn words(rng: &mut ChaCha8Rng, count: usize, taken: &mut BTreeSet<String>) -> Vec<String> {
    let stop = StopWords::standard();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let syllables = rng.gen_range(2..=3);
        let w: String = (0..syllables)
            .flat_map(|_| {
                [
                    CONSONANTS[rng.gen_range(0..CONSONANTS.len())] as char,
                    VOWELS[rng.gen_range(0..VOWELS.len())] as char,
                ]
            })
            .collect();
        if !stop.contains(&w) && taken.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    c.next().map(|f| f.to_ascii_uppercase().to_string() + c.as_str()).unwrap_or_default()
}

/// Statement-like lines drawing 3 to 6 terms each from `primary` (75%) and `secondary`.
fn body(rng: &mut ChaCha8Rng, primary: &[String], secondary: &[String]) -> String {
    let lines = rng.gen_range(20..=120);
    let mut text = String::new();
    for _ in 0..lines {
        let n = rng.gen_range(3..=6);
        let terms: Vec<&str> = (0..n)
            .map(|_| {
                let pool = if secondary.is_empty() || rng.gen_bool(0.75) { primary } else { secondary };
                pool[rng.gen_range(0..pool.len())].as_str()
            })
            .collect();
        text.push_str(&format!("    {} = {};\n", terms[0], terms[1..].join(" + ")));
    }
    text
}

/// Thirty documents in three clusters. Every cluster owns twenty exclusive
/// terms; ten terms are shared by all. Each document draws on a random sixteen of
/// its cluster's terms and five of the shared ones.
pub fn planted_clusters(seed: u64) -> PlantedCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut taken = BTreeSet::new();
    let shared = words(&mut rng, SHARED_TERMS, &mut taken);
    let exclusive: Vec<Vec<String>> = (0..CLUSTERS).map(|_| words(&mut rng, EXCLUSIVE_TERMS, &mut taken)).collect();
    let mut documents = Vec::new();
    let mut labels = Vec::new();
    for (c, own) in exclusive.iter().enumerate() {
        for j in 0..DOCS_PER_CLUSTER {
            let mut own_pick = own.clone();
            own_pick.shuffle(&mut rng);
            own_pick.truncate(OWN_PER_DOC);
            let mut shared_pick = shared.clone();
            shared_pick.shuffle(&mut rng);
            shared_pick.truncate(SHARED_PER_DOC);
            let id = format!("{}/{}{}.java", PACKAGES[c], capitalize(&own[j]), ROLES[j % ROLES.len()]);
            documents.push((id, body(&mut rng, &own_pick, &shared_pick)));
            labels.push(c);
        }
    }
    PlantedCorpus {
        documents,
        labels,
        shared,
        exclusive,
    }
}

/// `count` documents built only from terms that `existing` does not use.
pub fn fresh_documents(existing: &PlantedCorpus, count: usize, seed: u64) -> Vec<(String, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut taken: BTreeSet<String> = existing.shared.iter().chain(existing.exclusive.iter().flatten()).cloned().collect();
    let vocab = words(&mut rng, EXCLUSIVE_TERMS, &mut taken);
    (0..count)
        .map(|j| {
            let id = format!("ext/{}{}.java", capitalize(&vocab[j % vocab.len()]), ROLES[j % ROLES.len()]);
            (id, body(&mut rng, &vocab, &[]))
        })
        .collect()
}

/// Writes `(id, text)` pairs below `root`, creating directories as needed.
pub fn write_documents(root: &Path, documents: &[(String, String)]) -> Result<()> {
    for (id, text) in documents {
        let path = root.join(id);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{tokenize, StopWords};

    #[test]
    fn shape_and_determinism() {
        let a = planted_clusters(5);
        assert_eq!(a.documents.len(), CLUSTERS * DOCS_PER_CLUSTER);
        assert_eq!(a, planted_clusters(5));
        assert_ne!(a.documents, planted_clusters(6).documents);
        let ids: BTreeSet<&String> = a.documents.iter().map(|(id, _)| id).collect();
        assert_eq!(ids.len(), a.documents.len());
    }

    #[test]
    fn terms_survive_tokenization_and_stay_in_cluster() {
        let a = planted_clusters(11);
        let stop = StopWords::standard();
        for ((_, text), &c) in a.documents.iter().zip(&a.labels) {
            for t in tokenize(text, &stop) {
                assert!(a.shared.contains(&t) || a.exclusive[c].contains(&t), "{t}");
            }
        }
        let fresh = fresh_documents(&a, 3, 1);
        for (_, text) in &fresh {
            for t in tokenize(text, &stop) {
                assert!(!a.shared.contains(&t) && a.exclusive.iter().all(|e| !e.contains(&t)));
            }
        }
    }
}
