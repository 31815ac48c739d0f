use std::fs;

use softmap::corpus::{ingest, parse_corpus_sidecar, DocKind, IngestOptions};
use softmap::Error;

fn tree() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let files = [
        ("src/app/Main.java", "class Main { void run() { startServer(); } }\n"),
        ("src/app/Server.java", "class Server { void startServer() {} }\n"),
        ("web/index.jsp", "<%= startServer %>\n"),
        ("conf/app.properties", "server.port=8080\n"),
        ("conf/beans.xml", "<bean id=\"server\"/>\n"),
        ("README", "notes\n"),
    ];
    for (path, text) in files {
        let p = dir.path().join(path);
        fs::create_dir_all(p.parent().unwrap()).unwrap();
        fs::write(p, text).unwrap();
    }
    dir
}

#[test]
fn ingestion_is_sorted_and_kinded() {
    let dir = tree();
    let corpus = ingest(dir.path(), &IngestOptions::default(), "v1").unwrap();
    let ids = corpus.ids();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
    assert_eq!(ids.len(), 6);
    let kind = |id: &str| corpus.documents[corpus.index_of(id).unwrap()].kind;
    assert_eq!(kind("src/app/Main.java"), DocKind::Source);
    assert_eq!(kind("web/index.jsp"), DocKind::Markup);
    assert_eq!(kind("conf/beans.xml"), DocKind::Config);
    assert_eq!(kind("conf/app.properties"), DocKind::Property);
    assert_eq!(kind("README"), DocKind::Other);
    assert_eq!(corpus.documents[corpus.index_of("conf/app.properties").unwrap()].display_name, "app");
}

#[test]
fn ingestion_is_deterministic() {
    let dir = tree();
    let options = IngestOptions {
        include: vec!["**/*.java".into(), "**/*.xml".into()],
        exclude: vec!["**/Server.java".into()],
        ..IngestOptions::default()
    };
    let a = ingest(dir.path(), &options, "v1").unwrap();
    let b = ingest(dir.path(), &options, "v1").unwrap();
    assert_eq!(a.ids(), ["conf/beans.xml", "src/app/Main.java"]);
    assert_eq!(a.to_sidecar(), b.to_sidecar());
    assert_eq!(a.fingerprint(), b.fingerprint());
    let summary = parse_corpus_sidecar(&a.to_sidecar(), "c").unwrap();
    assert_eq!(summary.documents.len(), 2);
}

#[test]
fn missing_root_and_bad_patterns_are_input_errors() {
    let dir = tree();
    let missing = ingest(&dir.path().join("nope"), &IngestOptions::default(), "v");
    assert!(matches!(missing, Err(Error::UnreadableRoot { .. })));
    let bad = IngestOptions {
        include: vec!["[".into()],
        ..IngestOptions::default()
    };
    let err = ingest(dir.path(), &bad, "v").unwrap_err();
    assert!(matches!(err, Error::Pattern { .. }) && err.is_input_error());
}
