//! Extraction of errored identifiers from kernel messages.

use regex::Regex;

use crate::lean;

/// Message shapes that name an identifier the kernel could not resolve.
///
/// Each pattern must expose the identifier as capture group `id`. The
/// defaults cover unknown identifiers and constants, unknown tactics, and
/// ambiguous overloads; extra patterns can be registered but none are on by
/// default.
#[derive(Debug, Clone)]
pub struct NamePatterns {
    patterns: Vec<Regex>,
    ambiguous: Regex,
}

impl Default for NamePatterns {
    fn default() -> Self {
        Self {
            patterns: vec![
                Regex::new(r"unknown identifier '(?P<id>[^']+)'").unwrap(),
                Regex::new(r"unknown constant '(?P<id>[^']+)'").unwrap(),
                Regex::new(r"unknown tactic '(?P<id>[^']+)'").unwrap(),
            ],
            ambiguous: Regex::new(r"ambiguous, possible interpretations").unwrap(),
        }
    }
}

impl NamePatterns {
    pub fn with_extra(mut self, pattern: &str) -> Result<Self, regex::Error> {
        let re = Regex::new(pattern)?;
        if re.capture_names().flatten().all(|n| n != "id") {
            // A pattern without an `id` group captures the whole match.
            self.patterns.push(Regex::new(&format!("(?P<id>{pattern})"))?);
        } else {
            self.patterns.push(re);
        }
        Ok(self)
    }

    /// Identifiers named by `message`, in order of appearance, deduplicated.
    /// Every returned name occurs verbatim in `message`.
    pub fn extract(&self, message: &str) -> Vec<String> {
        let mut found: Vec<(usize, String)> = Vec::new();
        for re in &self.patterns {
            for caps in re.captures_iter(message) {
                if let Some(m) = caps.name("id") {
                    let id = m.as_str().trim_start_matches('«').trim_end_matches('»');
                    if lean::is_identifier(id) {
                        found.push((m.start(), id.to_string()));
                    }
                }
            }
        }
        if let Some(m) = self.ambiguous.find(message) {
            // Interpretations are listed one per line as `name : type`.
            let mut offset = m.end();
            for line in message[m.end()..].split_inclusive('\n') {
                let trimmed = line.trim_start();
                if let Some((name, _)) = trimmed.split_once(" : ") {
                    let name = name.trim().trim_start_matches("_root_.");
                    if lean::is_identifier(name) {
                        found.push((offset, name.to_string()));
                    }
                }
                offset += line.len();
            }
        }
        found.sort_by_key(|(pos, _)| *pos);
        let mut out: Vec<String> = Vec::new();
        for (_, id) in found {
            if !out.contains(&id) {
                out.push(id);
            }
        }
        out
    }
}
