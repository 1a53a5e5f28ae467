//! Name similarity used to rank declarations against an errored identifier.
//!
//! score = 0.5·J(trigrams of last segment) + 0.3·J(name tokens) + 0.2·edit similarity,
//! with an exact name match fixed at 1.0.

pub const TRIGRAM_WEIGHT: f64 = 0.5;
pub const TOKEN_WEIGHT: f64 = 0.3;
pub const EDIT_WEIGHT: f64 = 0.2;

/// Precomputed features of one name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NameFeatures {
    pub trigrams: Vec<u64>,
    pub tokens: Vec<String>,
    pub chars: Vec<char>,
}

impl NameFeatures {
    pub fn new(name: &str) -> Self {
        Self { trigrams: segment_trigrams(name), tokens: name_tokens(name), chars: name.chars().collect() }
    }
}

pub fn last_segment(name: &str) -> &str {
    name.rsplit('.').next().unwrap_or(name)
}

fn pack(chars: &[char]) -> u64 {
    chars.iter().fold(0u64, |acc, &c| (acc << 21) | c as u64)
}

/// Sorted, deduplicated character trigrams of the lowercased last path
/// segment. Segments shorter than three characters form a single gram.
pub fn segment_trigrams(name: &str) -> Vec<u64> {
    let seg: Vec<char> = last_segment(name).chars().flat_map(char::to_lowercase).collect();
    let mut grams: Vec<u64> = match seg.len() {
        0 => Vec::new(),
        1 | 2 => vec![pack(&seg)],
        _ => seg.windows(3).map(pack).collect(),
    };
    grams.sort_unstable();
    grams.dedup();
    grams
}

/// Lowercased tokens of the full name, split on dots, underscores, and
/// camel-case boundaries. Sorted and deduplicated.
pub fn name_tokens(name: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for part in name.split(['.', '_']) {
        let chars: Vec<char> = part.chars().collect();
        let mut start = 0;
        for i in 1..chars.len() {
            let (prev, cur) = (chars[i - 1], chars[i]);
            let next_lower = chars.get(i + 1).is_some_and(|c| c.is_lowercase());
            let boundary = (prev.is_lowercase() || prev.is_ascii_digit()) && cur.is_uppercase()
                || prev.is_uppercase() && cur.is_uppercase() && next_lower;
            if boundary {
                tokens.push(chars[start..i].iter().collect::<String>());
                start = i;
            }
        }
        if start < chars.len() {
            tokens.push(chars[start..].iter().collect::<String>());
        }
    }
    let mut tokens: Vec<String> = tokens.into_iter().map(|t| t.to_lowercase()).filter(|t| !t.is_empty()).collect();
    tokens.sort_unstable();
    tokens.dedup();
    tokens
}

/// Jaccard similarity of two sorted, deduplicated slices; 0 when both are empty.
pub fn jaccard<T: Ord>(a: &[T], b: &[T]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let (mut i, mut j, mut inter) = (0, 0, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                inter += 1;
                i += 1;
                j += 1;
            }
        }
    }
    inter as f64 / (a.len() + b.len() - inter) as f64
}

pub fn levenshtein(a: &[char], b: &[char]) -> usize {
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

/// 1 − distance / max length, in characters; 1 for two empty names.
pub fn edit_similarity(a: &[char], b: &[char]) -> f64 {
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 1.0;
    }
    1.0 - levenshtein(a, b) as f64 / longest as f64
}

pub fn score(query: &str, q: &NameFeatures, name: &str, f: &NameFeatures) -> f64 {
    if query == name {
        return 1.0;
    }
    let s = TRIGRAM_WEIGHT * jaccard(&q.trigrams, &f.trigrams)
        + TOKEN_WEIGHT * jaccard(&q.tokens, &f.tokens)
        + EDIT_WEIGHT * edit_similarity(&q.chars, &f.chars);
    s.clamp(0.0, 1.0)
}
