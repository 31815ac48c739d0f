//! Lexical extraction of vocabulary terms from source text.

use std::collections::HashSet;

const JAVA_KEYWORDS: &[&str] = &[
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char", "class", "const",
    "continue", "default", "do", "double", "else", "enum", "extends", "final", "finally",
    "float", "for", "goto", "if", "implements", "import", "instanceof", "int", "interface",
    "long", "native", "new", "package", "private", "protected", "public", "return", "short",
    "static", "strictfp", "super", "switch", "synchronized", "this", "throw", "throws",
    "transient", "try", "void", "volatile", "while", "true", "false", "null", "var", "record",
    "string", "object", "override",
];

const C_FAMILY_KEYWORDS: &[&str] = &[
    "auto", "break", "case", "char", "const", "continue", "default", "do", "double", "else",
    "enum", "extern", "float", "for", "goto", "if", "inline", "int", "long", "register",
    "restrict", "return", "short", "signed", "sizeof", "static", "struct", "switch", "typedef",
    "union", "unsigned", "void", "volatile", "while", "bool", "true", "false", "include",
    "define", "ifdef", "ifndef", "endif", "elif", "pragma", "undef", "class", "namespace",
    "template", "typename", "using", "virtual", "delete", "new", "operator", "friend", "this",
    "public", "private", "protected", "nullptr", "constexpr", "std", "null", "try", "catch",
    "throw", "override", "noexcept", "mutable", "explicit", "size", "uint", "int8", "int16",
    "int32", "int64", "uint8", "uint16", "uint32", "uint64",
];

const ENGLISH_FUNCTION_WORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "all", "also", "am", "an", "and", "any", "are",
    "as", "at", "be", "because", "been", "before", "being", "below", "between", "both", "but",
    "by", "can", "could", "did", "does", "doing", "down", "during", "each", "few", "from",
    "further", "had", "has", "have", "having", "he", "her", "here", "hers", "him", "his",
    "how", "i", "in", "into", "is", "it", "its", "itself", "just", "me", "more", "most", "my",
    "no", "nor", "not", "now", "of", "off", "on", "once", "only", "or", "other", "our", "out",
    "over", "own", "same", "she", "should", "so", "some", "such", "than", "that", "the",
    "their", "them", "then", "there", "these", "they", "those", "through", "to", "too",
    "under", "until", "up", "very", "was", "we", "were", "what", "when", "where", "which",
    "who", "whom", "why", "will", "with", "would", "you", "your", "yours",
];

/// A set of lowercase terms removed after splitting.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StopWords {
    words: HashSet<String>,
}

impl StopWords {
    pub fn empty() -> Self {
        StopWords::default()
    }

    pub fn java() -> Self {
        Self::from_words(JAVA_KEYWORDS.iter().copied())
    }

    pub fn c_family() -> Self {
        Self::from_words(C_FAMILY_KEYWORDS.iter().copied())
    }

    pub fn english() -> Self {
        Self::from_words(ENGLISH_FUNCTION_WORDS.iter().copied())
    }

    /// Java and C-family keywords plus English function words.
    pub fn standard() -> Self {
        let mut s = Self::java();
        s.extend(&Self::c_family());
        s.extend(&Self::english());
        s
    }

    pub fn from_words<'a>(words: impl IntoIterator<Item = &'a str>) -> Self {
        StopWords {
            words: words.into_iter().map(str::to_lowercase).collect(),
        }
    }

    pub fn extend(&mut self, other: &StopWords) {
        self.words.extend(other.words.iter().cloned());
    }

    pub fn contains(&self, term: &str) -> bool {
        self.words.contains(term)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

pub const MIN_TERM_LEN: usize = 2;

/// Splits text into lowercase vocabulary terms, preserving order and multiplicity.
///
/// Identifier runs match `[A-Za-z][A-Za-z0-9]*`. A run is cut at lower-to-upper
/// humps (`ludoFactory`), before the last capital of an acronym that is followed
/// by lowercase (`HTTPRequest`), and at digit-to-letter transitions (`utf8Decoder`).
/// Digits stay attached to the letters before them, so `v2` is one term.
pub fn tokenize(text: &str, stopwords: &StopWords) -> Vec<String> {
    let mut out = Vec::new();
    for run in identifier_runs(text) {
        for part in split_identifier(run) {
            let term = part.to_ascii_lowercase();
            if term.len() >= MIN_TERM_LEN && !stopwords.contains(&term) {
                out.push(term);
            }
        }
    }
    out
}

fn identifier_runs(text: &str) -> impl Iterator<Item = &str> {
    let bytes = text.as_bytes();
    let mut i = 0;
    std::iter::from_fn(move || {
        while i < bytes.len() && !bytes[i].is_ascii_alphabetic() {
            i += 1;
        }
        if i >= bytes.len() {
            return None;
        }
        let start = i;
        while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
            i += 1;
        }
        Some(&text[start..i])
    })
}

/// Splits one ASCII identifier run into its camel-case / digit parts.
pub fn split_identifier(run: &str) -> Vec<&str> {
    let b = run.as_bytes();
    let mut parts = Vec::new();
    let mut start = 0;
    for i in 1..b.len() {
        let prev = b[i - 1];
        let cur = b[i];
        let next = b.get(i + 1).copied();
        let hump = prev.is_ascii_lowercase() && cur.is_ascii_uppercase();
        let acronym_end = prev.is_ascii_uppercase()
            && cur.is_ascii_uppercase()
            && next.is_some_and(|n| n.is_ascii_lowercase());
        let after_digits = prev.is_ascii_digit() && cur.is_ascii_alphabetic();
        if hump || acronym_end || after_digits {
            parts.push(&run[start..i]);
            start = i;
        }
    }
    if start < b.len() {
        parts.push(&run[start..]);
    }
    parts
}

/// Blanks out `//` and `/* */` comments and string/char literals of C-family
/// sources, keeping line structure intact.
pub fn strip_comments_and_strings(text: &str) -> String {
    #[derive(PartialEq)]
    enum State {
        Code,
        LineComment,
        BlockComment,
        Str(char),
    }
    let mut out = String::with_capacity(text.len());
    let mut state = State::Code;
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match state {
            State::Code => match c {
                '/' if chars.peek() == Some(&'/') => {
                    chars.next();
                    state = State::LineComment;
                    out.push(' ');
                }
                '/' if chars.peek() == Some(&'*') => {
                    chars.next();
                    state = State::BlockComment;
                    out.push(' ');
                }
                '"' | '\'' => {
                    state = State::Str(c);
                    out.push(' ');
                }
                _ => out.push(c),
            },
            State::LineComment => {
                if c == '\n' {
                    state = State::Code;
                    out.push('\n');
                }
            }
            State::BlockComment => {
                if c == '*' && chars.peek() == Some(&'/') {
                    chars.next();
                    state = State::Code;
                    out.push(' ');
                } else if c == '\n' {
                    out.push('\n');
                }
            }
            State::Str(quote) => {
                if c == '\\' {
                    chars.next();
                } else if c == quote {
                    state = State::Code;
                    out.push(' ');
                } else if c == '\n' {
                    // unterminated literal ends at the line break
                    state = State::Code;
                    out.push('\n');
                }
            }
        }
    }
    out
}

/// Tokenizer settings shared by matrix construction and folding-in.
#[derive(Debug, Clone)]
pub struct Tokenizer {
    pub stopwords: StopWords,
    pub include_comments: bool,
}

impl Default for Tokenizer {
    fn default() -> Self {
        Tokenizer {
            stopwords: StopWords::standard(),
            include_comments: true,
        }
    }
}

impl Tokenizer {
    pub fn terms(&self, text: &str) -> Vec<String> {
        if self.include_comments {
            tokenize(text, &self.stopwords)
        } else {
            tokenize(&strip_comments_and_strings(text), &self.stopwords)
        }
    }
}
