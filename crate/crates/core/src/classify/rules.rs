use std::io::BufRead;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{AlterationSpan, Category, ClassifyError, LemmaDictionary, WordVectors};
use crate::corpus::HandScribe;

const DEFAULT_PARATEXT_PATTERNS: &[&str] = &[
    // numerals and foliation like 6, 12., 6r, 14v
    r"^\d+[.)]?$",
    r"^\d+[rv]$",
    // 26.06.1804, 1804-06-26
    r"^\d{1,2}\.\d{1,2}\.(\d{2}|\d{4})$",
    r"^\d{4}-\d{2}-\d{2}$",
    r"^(?i)M{0,3}(CM|CD|D?C{0,3})(XC|XL|L?X{0,3})(IX|IV|V?I{0,3})\.?$",
    r"^(?i)(fol|bl|blatt|s|p|r|v|recto|verso|nr|no)\.?$",
    r"^(?i)(jan|januar|january|janvier|feb|februar|february|février|mär|märz|march|mars|apr|april|avril|mai|may|jun|juni|june|juin|jul|juli|july|juillet|aug|august|août|sep|sept|september|septembre|okt|oct|oktober|october|octobre|nov|november|novembre|dez|dec|dezember|december|décembre)\.?$",
];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnknownHandPolicy {
    /// A hand with no declared scribe counts as a non-author hand.
    #[default]
    Accept,
    Reject,
}

impl std::str::FromStr for UnknownHandPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "accept" => Ok(Self::Accept),
            "reject" => Ok(Self::Reject),
            other => Err(format!("expected accept|reject, got `{other}`")),
        }
    }
}

impl std::fmt::Display for UnknownHandPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Accept => "accept",
            Self::Reject => "reject",
        })
    }
}

#[derive(Debug, Clone)]
pub struct ParatextRules {
    patterns: Vec<Regex>,
    pub unknown_hand: UnknownHandPolicy,
}

impl Default for ParatextRules {
    fn default() -> Self {
        Self::from_patterns(DEFAULT_PARATEXT_PATTERNS.iter().copied())
            .expect("built-in patterns compile")
    }
}

impl ParatextRules {
    pub fn from_patterns<'a, I: IntoIterator<Item = &'a str>>(
        patterns: I,
    ) -> Result<Self, ClassifyError> {
        let patterns = patterns
            .into_iter()
            .map(|p| {
                Regex::new(p).map_err(|e| ClassifyError::BadPattern {
                    pattern: p.to_owned(),
                    message: e.to_string(),
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(ParatextRules {
            patterns,
            unknown_hand: UnknownHandPolicy::default(),
        })
    }

    /// One regular expression per line; blank lines and `#` comments skipped.
    pub fn from_reader<R: BufRead>(input: R) -> Result<Self, ClassifyError> {
        let lines = input.lines().collect::<Result<Vec<_>, _>>()?;
        Self::from_patterns(
            lines
                .iter()
                .map(|l| l.trim())
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    pub fn matches(&self, token: &str) -> bool {
        self.patterns.iter().any(|p| p.is_match(token))
    }
}

#[derive(Debug, Clone)]
pub struct ClassifierConfig {
    pub max_dist: usize,
    pub style_threshold: f64,
    pub paratext: ParatextRules,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            max_dist: 2,
            style_threshold: 0.3,
            paratext: ParatextRules::default(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ClassifierDeps<'a> {
    pub dict: &'a LemmaDictionary,
    pub vectors: &'a WordVectors,
    pub config: &'a ClassifierConfig,
}

fn is_punct(token: &str) -> bool {
    !token.chars().any(char::is_alphanumeric)
}

fn words(tokens: &[String]) -> Vec<&str> {
    tokens
        .iter()
        .map(String::as_str)
        .filter(|t| !is_punct(t))
        .collect()
}

/// Additions by a non-author hand consisting only of numerals, dates or
/// foliation markers.
pub fn classify_paratext(span: &AlterationSpan, rules: &ParatextRules) -> bool {
    let foreign_hand = match span.hand_scribe {
        HandScribe::Author => false,
        HandScribe::Unknown => rules.unknown_hand == UnknownHandPolicy::Accept,
        HandScribe::Archivist | HandScribe::Editor => true,
    };
    let after = words(&span.after_tokens);
    foreign_hand
        && words(&span.before_tokens).is_empty()
        && !after.is_empty()
        && after.iter().all(|t| rules.matches(t))
}

/// Positionally aligned token pairs that fuzzy-match the same lemma.
/// Spans whose sides differ in length are never spelling corrections.
pub fn classify_spelling(
    span: &AlterationSpan,
    dict: &LemmaDictionary,
    max_dist: usize,
) -> Result<bool, ClassifyError> {
    if dict.is_empty() {
        return Err(ClassifyError::EmptyDictionary);
    }
    let before = words(&span.before_tokens);
    let after = words(&span.after_tokens);
    if before.len() != after.len() || before.is_empty() {
        return Ok(false);
    }
    Ok(before.iter().zip(&after).all(|(b, a)| {
        b == a
            || match (
                dict.nearest_lemma(b, max_dist),
                dict.nearest_lemma(a, max_dist),
            ) {
                (Some((lb, _)), Some((la, _))) => lb == la,
                _ => false,
            }
    }))
}

/// Same lemma multiset on both sides (punctuation ignored) but a different
/// surface sequence. Part-of-speech tags are not consulted: each surface
/// form has exactly one dictionary entry, so a POS change implies a form
/// change.
pub fn classify_grammar(span: &AlterationSpan, dict: &LemmaDictionary) -> bool {
    fn lemmas<'a>(tokens: &'a [String], dict: &'a LemmaDictionary) -> Vec<&'a str> {
        let mut l: Vec<&str> = words(tokens)
            .into_iter()
            .map(|t| dict.lemmatize(t))
            .collect();
        l.sort_unstable();
        l
    }
    span.before_tokens != span.after_tokens
        && lemmas(&span.before_tokens, dict) == lemmas(&span.after_tokens, dict)
}

/// Cosine distance between the mean embeddings of both sides falls below
/// `threshold`.
pub fn classify_stylistic(span: &AlterationSpan, vecs: &WordVectors, threshold: f64) -> bool {
    let before = words(&span.before_tokens);
    let after = words(&span.after_tokens);
    if before.is_empty() || after.is_empty() {
        return false;
    }
    let (Some(b), Some(a)) = (vecs.mean(&before), vecs.mean(&after)) else {
        return false;
    };
    match cosine_similarity(&b, &a) {
        Some(sim) => 1.0 - sim < threshold,
        None => false,
    }
}

fn cosine_similarity(a: &[f64], b: &[f64]) -> Option<f64> {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    (na > 0.0 && nb > 0.0).then(|| (dot / (na * nb)).clamp(-1.0, 1.0))
}

/// First matching test wins; content-related by elimination.
pub fn classify_cascade(
    span: &AlterationSpan,
    deps: &ClassifierDeps<'_>,
) -> Result<Category, ClassifyError> {
    if span.category() != Category::Unclassified {
        return Err(ClassifyError::AlreadyClassified {
            doc_id: span.doc_id.clone(),
            span_id: span.span_id,
            category: span.category(),
        });
    }
    let cfg = deps.config;
    let category = if classify_paratext(span, &cfg.paratext) {
        Category::Paratext
    } else if classify_spelling(span, deps.dict, cfg.max_dist)? {
        Category::Spelling
    } else if classify_grammar(span, deps.dict) {
        Category::Grammar
    } else if classify_stylistic(span, deps.vectors, cfg.style_threshold) {
        Category::Stylistic
    } else {
        Category::ContentRelated
    };
    Ok(category)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::levenshtein;

    fn span(before: &[&str], after: &[&str], hand: HandScribe) -> AlterationSpan {
        AlterationSpan::new(
            0,
            "d".into(),
            before.iter().map(|s| s.to_string()).collect(),
            after.iter().map(|s| s.to_string()).collect(),
            hand,
            None,
        )
    }

    fn dict() -> LemmaDictionary {
        LemmaDictionary::from_reader(
            "würde\twerden\nwurde\twerden\nging\tgehen\ngehe\tgehen\nHaus\tHaus\nBoot\tBoot\nBrief\tBrief\nFreund\tFreund\nZeit\tZeit\nGeld\tGeld\nKind\tKind\nMutter\tMutter\n"
                .as_bytes(),
        )
        .unwrap()
    }

    fn vectors() -> WordVectors {
        let mut v = WordVectors::new(3);
        v.insert("daher", vec![1.0, 0.2, 0.0]).unwrap();
        v.insert("bedarf", vec![0.1, 1.0, 0.3]).unwrap();
        v.insert("es", vec![0.0, 0.4, 1.0]).unwrap();
        v.insert("Krankheit", vec![1.0, 0.0, 0.0]).unwrap();
        v.insert("Reise", vec![0.0, 0.0, 1.0]).unwrap();
        v
    }

    #[test]
    fn paratext_rules() {
        let rules = ParatextRules::default();
        assert!(classify_paratext(
            &span(&[], &["6"], HandScribe::Archivist),
            &rules
        ));
        assert!(!classify_paratext(
            &span(&[], &["lieber", "Freund"], HandScribe::Author),
            &rules
        ));
        assert!(!classify_paratext(
            &span(&[], &["6"], HandScribe::Author),
            &rules
        ));
        assert!(classify_paratext(
            &span(&[], &["26.06.1804"], HandScribe::Editor),
            &rules
        ));
        assert!(classify_paratext(
            &span(&[], &["Bl", ".", "85", "r"], HandScribe::Archivist),
            &rules
        ));
        assert!(classify_paratext(
            &span(&[], &["XIV"], HandScribe::Archivist),
            &rules
        ));
        assert!(!classify_paratext(
            &span(&["5"], &["6"], HandScribe::Archivist),
            &rules
        ));
        assert!(!classify_paratext(
            &span(&[], &["Mutter"], HandScribe::Archivist),
            &rules
        ));
    }

    #[test]
    fn paratext_unknown_hand_policy() {
        let mut rules = ParatextRules::default();
        let s = span(&[], &["99"], HandScribe::Unknown);
        rules.unknown_hand = UnknownHandPolicy::Accept;
        assert!(classify_paratext(&s, &rules));
        rules.unknown_hand = UnknownHandPolicy::Reject;
        assert!(!classify_paratext(&s, &rules));
    }

    #[test]
    fn custom_pattern_file() {
        let rules = ParatextRules::from_reader("# stamps\n^STAMP$\n".as_bytes()).unwrap();
        assert!(classify_paratext(
            &span(&[], &["STAMP"], HandScribe::Archivist),
            &rules
        ));
        assert!(!classify_paratext(
            &span(&[], &["6"], HandScribe::Archivist),
            &rules
        ));
        assert!(ParatextRules::from_reader("(".as_bytes()).is_err());
    }

    #[test]
    fn spelling_same_lemma() {
        let d = dict();
        assert!(
            classify_spelling(&span(&["wurde"], &["würde"], HandScribe::Author), &d, 2).unwrap()
        );
        assert!(
            classify_spelling(&span(&["Freundt"], &["Freund"], HandScribe::Author), &d, 2).unwrap()
        );
        assert!(classify_spelling(&span(&["Haus"], &["Haus"], HandScribe::Author), &d, 2).unwrap());
        assert!(!classify_spelling(
            &span(&["Haus"], &["Haus", "Boot"], HandScribe::Author),
            &d,
            2
        )
        .unwrap());
        assert!(!classify_spelling(&span(&["leidet"], &[], HandScribe::Author), &d, 2).unwrap());
    }

    #[test]
    fn spelling_haus_boot_differs_by_exhaustive_scan() {
        let d = dict();
        // exhaustive nearest entries over the fixture dictionary
        let nearest = |t: &str| {
            d.lemma_set()
                .map(|l| (levenshtein(t, l), l.to_string()))
                .min()
                .unwrap()
        };
        assert_eq!(nearest("Haus"), (0, "Haus".to_string()));
        assert_eq!(nearest("Boot"), (0, "Boot".to_string()));
        assert!(
            !classify_spelling(&span(&["Haus"], &["Boot"], HandScribe::Author), &d, 2).unwrap()
        );
    }

    #[test]
    fn spelling_needs_dictionary() {
        let empty = LemmaDictionary::default();
        assert!(matches!(
            classify_spelling(&span(&["a"], &["b"], HandScribe::Author), &empty, 2),
            Err(ClassifyError::EmptyDictionary)
        ));
    }

    #[test]
    fn spelling_is_symmetric() {
        let d = dict();
        for (b, a) in [
            ("wurde", "würde"),
            ("Haus", "Boot"),
            ("ging", "gehe"),
            ("Mutte", "Mutter"),
            ("Kind", "Kinder"),
        ] {
            let fwd = classify_spelling(&span(&[b], &[a], HandScribe::Author), &d, 2).unwrap();
            let rev = classify_spelling(&span(&[a], &[b], HandScribe::Author), &d, 2).unwrap();
            assert_eq!(fwd, rev, "{b} / {a}");
        }
    }

    #[test]
    fn grammar_rules() {
        let d = dict();
        assert!(classify_grammar(
            &span(&["ging"], &["gehe"], HandScribe::Author),
            &d
        ));
        assert!(!classify_grammar(
            &span(&["Haus"], &["Haus"], HandScribe::Author),
            &d
        ));
        assert!(!classify_grammar(
            &span(&["Haus"], &["Boot"], HandScribe::Author),
            &d
        ));
        assert!(classify_grammar(
            &span(&["Haus", ","], &["Haus"], HandScribe::Author),
            &d
        ));
        // multiset, not set
        assert!(!classify_grammar(
            &span(&["Haus", "Haus"], &["Haus"], HandScribe::Author),
            &d
        ));
    }

    #[test]
    fn stylistic_reordering_has_zero_distance() {
        let v = vectors();
        let s = span(
            &["Daher", "bedarf", "es"],
            &["Es", "bedarf", "daher"],
            HandScribe::Author,
        );
        assert!(classify_stylistic(&s, &v, 1e-9));
        assert!(classify_stylistic(
            &span(&["es"], &["es"], HandScribe::Author),
            &v,
            0.3
        ));
        assert!(!classify_stylistic(
            &span(&["unbekannt"], &["es"], HandScribe::Author),
            &v,
            0.3
        ));
        assert!(!classify_stylistic(
            &span(&["Krankheit"], &["Reise"], HandScribe::Author),
            &v,
            0.3
        ));
        assert!(!classify_stylistic(
            &span(&["es"], &[], HandScribe::Author),
            &v,
            0.3
        ));
    }

    #[test]
    fn stylistic_is_symmetric() {
        let v = vectors();
        for t in [0.05, 0.3, 0.9, 1.5] {
            let a = span(
                &["daher", "Krankheit"],
                &["Reise", "es"],
                HandScribe::Author,
            );
            let b = span(
                &["Reise", "es"],
                &["daher", "Krankheit"],
                HandScribe::Author,
            );
            assert_eq!(classify_stylistic(&a, &v, t), classify_stylistic(&b, &v, t));
        }
    }

    #[test]
    fn cascade_order() {
        let d = dict();
        let v = vectors();
        let cfg = ClassifierConfig::default();
        let deps = ClassifierDeps {
            dict: &d,
            vectors: &v,
            config: &cfg,
        };
        let cases = [
            (span(&[], &["6"], HandScribe::Archivist), Category::Paratext),
            (
                span(&["wurde"], &["würde"], HandScribe::Author),
                Category::Spelling,
            ),
            (
                span(&["ging"], &["gehe"], HandScribe::Author),
                Category::Grammar,
            ),
            (
                span(
                    &["Daher", "bedarf", "es"],
                    &["Es", "bedarf", "daher"],
                    HandScribe::Author,
                ),
                Category::Stylistic,
            ),
            (
                span(
                    &["leidet", "schon", "seit", "längerer", "Zeit"],
                    &[],
                    HandScribe::Author,
                ),
                Category::ContentRelated,
            ),
        ];
        for (s, expected) in cases {
            assert_eq!(classify_cascade(&s, &deps).unwrap(), expected, "{s:?}");
            // deterministic
            assert_eq!(classify_cascade(&s, &deps).unwrap(), expected);
        }
    }

    #[test]
    fn cascade_rejects_classified_span() {
        let d = dict();
        let v = vectors();
        let cfg = ClassifierConfig::default();
        let deps = ClassifierDeps {
            dict: &d,
            vectors: &v,
            config: &cfg,
        };
        let mut s = span(&["a"], &[], HandScribe::Author);
        s.assign(Category::ContentRelated).unwrap();
        assert!(matches!(
            classify_cascade(&s, &deps),
            Err(ClassifyError::AlreadyClassified { .. })
        ));
    }
}
