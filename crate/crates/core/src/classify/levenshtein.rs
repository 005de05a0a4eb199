/// Edit distance over Unicode scalar values with unit insert, delete and
/// substitute costs.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }

    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Memoised recursion over suffixes; independent of the two-row table.
    fn reference(a: &[char], b: &[char]) -> usize {
        fn go(a: &[char], b: &[char], memo: &mut Vec<Vec<Option<usize>>>) -> usize {
            if let Some(v) = memo[a.len()][b.len()] {
                return v;
            }
            let v = match (a.split_first(), b.split_first()) {
                (None, _) => b.len(),
                (_, None) => a.len(),
                (Some((x, ra)), Some((y, rb))) => {
                    let sub = go(ra, rb, memo) + usize::from(x != y);
                    sub.min(go(ra, b, memo) + 1).min(go(a, rb, memo) + 1)
                }
            };
            memo[a.len()][b.len()] = Some(v);
            v
        }
        let mut memo = vec![vec![None; b.len() + 1]; a.len() + 1];
        go(a, b, &mut memo)
    }

    #[test]
    fn known_distances() {
        assert_eq!(levenshtein("hate", "fate"), 1);
        assert_eq!(levenshtein("wurde", "würde"), 1);
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(levenshtein("x", "x"), 0);
        assert_eq!(levenshtein("kitten", "sitting"), 3);
    }

    fn short() -> impl Strategy<Value = String> {
        proptest::string::string_regex("[abcüß]{0,7}").unwrap()
    }

    proptest! {
        #[test]
        fn matches_reference(a in short(), b in short()) {
            let ac: Vec<char> = a.chars().collect();
            let bc: Vec<char> = b.chars().collect();
            prop_assert_eq!(levenshtein(&a, &b), reference(&ac, &bc));
        }

        #[test]
        fn symmetric(a in short(), b in short()) {
            prop_assert_eq!(levenshtein(&a, &b), levenshtein(&b, &a));
        }

        #[test]
        fn triangle(a in short(), b in short(), c in short()) {
            prop_assert!(levenshtein(&a, &c) <= levenshtein(&a, &b) + levenshtein(&b, &c));
        }
    }
}
