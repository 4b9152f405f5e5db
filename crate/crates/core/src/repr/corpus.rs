use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsonl;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSentence {
    pub sentence_id: usize,
    pub text: String,
    pub tokens: Vec<String>,
}

/// Sentences indexed by their id; `sentences[i].sentence_id == i`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    sentences: Vec<CorpusSentence>,
}

impl Corpus {
    /// Validates ids (unique, contiguous from 0) and non-empty token lists.
    /// Sentences may come in any order.
    pub fn new(mut sentences: Vec<CorpusSentence>) -> Result<Self> {
        sentences.sort_by_key(|s| s.sentence_id);
        if let Some(pair) = sentences.windows(2).find(|p| p[0].sentence_id == p[1].sentence_id) {
            return Err(Error::DuplicateSentence(pair[0].sentence_id));
        }
        for (i, s) in sentences.iter().enumerate() {
            if s.sentence_id != i {
                return Err(Error::InvalidCorpus(format!(
                    "sentence ids must be contiguous from 0; id {i} is missing"
                )));
            }
            if s.tokens.is_empty() {
                return Err(Error::InvalidCorpus(format!("sentence {i} has no tokens")));
            }
        }
        Ok(Self { sentences })
    }

    pub fn sentences(&self) -> &[CorpusSentence] {
        &self.sentences
    }

    pub fn sentence(&self, id: usize) -> Option<&CorpusSentence> {
        self.sentences.get(id)
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(|s| s.tokens.len()).sum()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        jsonl::write(path, &self.sentences)
    }
}

/// Loads a JSON-lines corpus. Blank lines are ignored.
pub fn load_corpus(path: &Path) -> Result<Corpus> {
    let rows: Vec<(usize, CorpusSentence)> = jsonl::read(path)?;
    let mut seen = std::collections::HashMap::new();
    for (line, s) in &rows {
        if let Some(first) = seen.insert(s.sentence_id, *line) {
            return Err(Error::parse(
                path,
                *line,
                format!("duplicate sentence id {} (first seen on line {first})", s.sentence_id),
            ));
        }
        if s.tokens.is_empty() {
            return Err(Error::parse(path, *line, format!("sentence {} has no tokens", s.sentence_id)));
        }
    }
    Corpus::new(rows.into_iter().map(|(_, s)| s).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn two_sentence_fixture() {
        let f = write_tmp(
            "{\"sentence_id\":0,\"text\":\"The cat sat down .\",\"tokens\":[\"The\",\"cat\",\"sat\",\"down\",\".\"]}\n\
             {\"sentence_id\":1,\"text\":\"Dogs run fast .\",\"tokens\":[\"Dogs\",\"run\",\"fast\",\".\"]}\n",
        );
        let corpus = load_corpus(f.path()).unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(corpus.token_count(), 9);
    }

    #[test]
    fn empty_file_is_empty_corpus() {
        let f = write_tmp("");
        assert!(load_corpus(f.path()).unwrap().is_empty());
    }

    #[test]
    fn duplicate_id_is_named() {
        let f = write_tmp(
            "{\"sentence_id\":5,\"text\":\"a\",\"tokens\":[\"a\"]}\n{\"sentence_id\":5,\"text\":\"b\",\"tokens\":[\"b\"]}\n",
        );
        let err = load_corpus(f.path()).unwrap_err().to_string();
        assert!(err.contains("duplicate sentence id 5"), "{err}");
    }

    #[test]
    fn malformed_line_cites_line_number() {
        let f = write_tmp("{\"sentence_id\":0,\"text\":\"a\",\"tokens\":[\"a\"]}\n{not json}\n");
        match load_corpus(f.path()).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn gaps_in_ids_are_rejected() {
        let f = write_tmp("{\"sentence_id\":1,\"text\":\"a\",\"tokens\":[\"a\"]}\n");
        assert!(matches!(load_corpus(f.path()), Err(Error::InvalidCorpus(_))));
    }
}
