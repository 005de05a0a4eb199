use std::collections::{BTreeSet, HashMap};
use std::io::BufRead;

use super::levenshtein::levenshtein;
use super::ClassifyError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LemmaEntry {
    pub lemma: String,
    pub pos: Option<String>,
}

/// Surface form -> lemma lookup, loaded from `surface<TAB>lemma[<TAB>pos]`
/// lines.
#[derive(Debug, Clone, Default)]
pub struct LemmaDictionary {
    entries: HashMap<String, LemmaEntry>,
    /// Sorted, with char lengths for pruning.
    lemmas: Vec<(String, usize)>,
}

impl LemmaDictionary {
    pub fn from_entries<I>(entries: I) -> Result<Self, ClassifyError>
    where
        I: IntoIterator<Item = (String, LemmaEntry)>,
    {
        let mut map: HashMap<String, LemmaEntry> = HashMap::new();
        for (i, (surface, entry)) in entries.into_iter().enumerate() {
            if let Some(prev) = map.get(&surface) {
                if *prev != entry {
                    return Err(ClassifyError::Parse {
                        line: i + 1,
                        message: format!("surface form `{surface}` mapped to two lemmas"),
                    });
                }
            }
            map.insert(surface, entry);
        }
        let lemma_set: BTreeSet<&str> = map.values().map(|e| e.lemma.as_str()).collect();
        let lemmas = lemma_set
            .into_iter()
            .map(|l| (l.to_owned(), l.chars().count()))
            .collect();
        Ok(LemmaDictionary {
            entries: map,
            lemmas,
        })
    }

    pub fn from_reader<R: BufRead>(input: R) -> Result<Self, ClassifyError> {
        let mut entries = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut cols = line.split('\t');
            let (Some(surface), Some(lemma)) = (cols.next(), cols.next()) else {
                return Err(ClassifyError::Parse {
                    line: i + 1,
                    message: "expected `surface<TAB>lemma[<TAB>pos]`".into(),
                });
            };
            let pos = cols.next().filter(|p| !p.is_empty()).map(str::to_owned);
            entries.push((
                surface.to_owned(),
                LemmaEntry {
                    lemma: lemma.to_owned(),
                    pos,
                },
            ));
        }
        Self::from_entries(entries)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, surface: &str) -> Option<&LemmaEntry> {
        self.entries.get(surface)
    }

    /// Lemma of a surface form; unknown forms are their own lemma.
    pub fn lemmatize<'a>(&'a self, surface: &'a str) -> &'a str {
        self.entries
            .get(surface)
            .map(|e| e.lemma.as_str())
            .unwrap_or(surface)
    }

    pub fn lemma_set(&self) -> impl Iterator<Item = &str> {
        self.lemmas.iter().map(|(l, _)| l.as_str())
    }

    /// Closest lemma within `max_dist` edits. Ties resolve to the
    /// lexicographically smallest lemma. Candidates whose length differs by
    /// more than `max_dist` are skipped without computing a distance.
    pub fn nearest_lemma(&self, token: &str, max_dist: usize) -> Option<(&str, usize)> {
        let len = token.chars().count();
        let mut best: Option<(&str, usize)> = None;
        for (lemma, lemma_len) in &self.lemmas {
            if len.abs_diff(*lemma_len) > max_dist {
                continue;
            }
            let d = levenshtein(token, lemma);
            if d <= max_dist && best.is_none_or(|(_, bd)| d < bd) {
                best = Some((lemma, d));
                if d == 0 {
                    break;
                }
            }
        }
        best
    }
}

/// Word embeddings in the text format `<count> <dims>` followed by
/// `word v1 ... vd` lines. Keys are case-folded.
#[derive(Debug, Clone, Default)]
pub struct WordVectors {
    dims: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl WordVectors {
    pub fn new(dims: usize) -> Self {
        WordVectors {
            dims,
            vectors: HashMap::new(),
        }
    }

    pub fn insert(&mut self, word: &str, vector: Vec<f64>) -> Result<(), ClassifyError> {
        if vector.len() != self.dims {
            return Err(ClassifyError::DimensionMismatch {
                line: 0,
                expected: self.dims,
                found: vector.len(),
            });
        }
        self.vectors.entry(word.to_lowercase()).or_insert(vector);
        Ok(())
    }

    pub fn from_reader<R: BufRead>(input: R) -> Result<Self, ClassifyError> {
        let mut lines = input.lines();
        let header = lines.next().transpose()?.unwrap_or_default();
        let mut head = header.split_whitespace().map(str::parse::<usize>);
        let (Some(Ok(_count)), Some(Ok(dims))) = (head.next(), head.next()) else {
            return Err(ClassifyError::Parse {
                line: 1,
                message: "expected header `<count> <dims>`".into(),
            });
        };
        let mut out = WordVectors::new(dims);
        for (i, line) in lines.enumerate() {
            let line = line?;
            let lineno = i + 2;
            let mut cols = line.split_whitespace();
            let Some(word) = cols.next() else { continue };
            let vector = cols
                .map(|v| {
                    v.parse::<f64>().map_err(|e| ClassifyError::Parse {
                        line: lineno,
                        message: e.to_string(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            if vector.len() != dims {
                return Err(ClassifyError::DimensionMismatch {
                    line: lineno,
                    expected: dims,
                    found: vector.len(),
                });
            }
            out.vectors.entry(word.to_lowercase()).or_insert(vector);
        }
        Ok(out)
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.vectors.get(&word.to_lowercase()).map(Vec::as_slice)
    }

    /// Mean vector over the known words; `None` if no word is known.
    pub fn mean<S: AsRef<str>>(&self, words: &[S]) -> Option<Vec<f64>> {
        let mut sum = vec![0.0; self.dims];
        let mut n = 0usize;
        for w in words {
            if let Some(v) = self.get(w.as_ref()) {
                sum.iter_mut().zip(v).for_each(|(s, x)| *s += x);
                n += 1;
            }
        }
        (n > 0).then(|| sum.into_iter().map(|s| s / n as f64).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_dictionary_with_optional_pos() {
        let dict = LemmaDictionary::from_reader(
            "ging\tgehen\tVERB\ngehe\tgehen\n\nHaus\tHaus\tNOUN\n".as_bytes(),
        )
        .unwrap();
        assert_eq!(dict.len(), 3);
        assert_eq!(dict.lemmatize("ging"), "gehen");
        assert_eq!(dict.lemmatize("Boot"), "Boot");
        assert_eq!(dict.get("ging").unwrap().pos.as_deref(), Some("VERB"));
        assert_eq!(dict.lemma_set().collect::<Vec<_>>(), ["Haus", "gehen"]);
    }

    #[test]
    fn conflicting_entries_rejected() {
        assert!(LemmaDictionary::from_reader("a\tx\na\ty\n".as_bytes()).is_err());
        assert!(LemmaDictionary::from_reader("a\n".as_bytes()).is_err());
    }

    #[test]
    fn nearest_lemma_exhaustive_agreement() {
        let dict = LemmaDictionary::from_reader(
            "Haus\tHaus\nBoot\tBoot\nMaus\tMaus\nBrief\tBrief\nwürde\twerden\nFreund\tFreund\nZeit\tZeit\nGeld\tGeld\nKind\tKind\nBrot\tBrot\n".as_bytes(),
        )
        .unwrap();
        for token in ["Hauss", "Bot", "Brif", "Freundt", "xyz", "Kinde", "Gelt"] {
            // exhaustive scan with no pruning
            let brute = dict
                .lemma_set()
                .map(|l| (levenshtein(token, l), l))
                .min()
                .filter(|(d, _)| *d <= 2)
                .map(|(d, l)| (l, d));
            assert_eq!(dict.nearest_lemma(token, 2), brute, "{token}");
        }
    }

    #[test]
    fn vectors_load_and_case_fold() {
        let vecs = WordVectors::from_reader("2 3\ndaher 1 0 0\nes 0 1 0\n".as_bytes()).unwrap();
        assert_eq!(vecs.dims(), 3);
        assert_eq!(vecs.get("Daher"), Some(&[1.0, 0.0, 0.0][..]));
        assert_eq!(vecs.mean(&["Es", "unbekannt"]), Some(vec![0.0, 1.0, 0.0]));
        assert_eq!(vecs.mean(&["unbekannt"]), None);
    }

    #[test]
    fn inconsistent_vector_file() {
        let err = WordVectors::from_reader("2 3\na 1 0 0\nb 1 0\n".as_bytes()).unwrap_err();
        assert!(matches!(
            err,
            ClassifyError::DimensionMismatch {
                line: 3,
                expected: 3,
                found: 2
            }
        ));
    }
}
