use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};

const BUILTIN: &str = include_str!("../../topics.txt");

/// Topic labels that data generation is conditioned on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopicSet {
    topics: Vec<String>,
}

impl TopicSet {
    /// One label per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<TopicSet> {
        let topics: Vec<String> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(String::from)
            .collect();
        if topics.is_empty() {
            return Err(Error::InvalidArgument("topic set is empty".into()));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = topics.iter().find(|t| !seen.insert(t.as_str())) {
            return Err(Error::InvalidArgument(format!("duplicate topic `{dup}`")));
        }
        Ok(TopicSet { topics })
    }

    pub fn load(path: &Path) -> Result<TopicSet> {
        TopicSet::parse(&std::fs::read_to_string(path)?)
    }

    pub fn builtin() -> TopicSet {
        TopicSet::parse(BUILTIN).expect("shipped topics.txt is valid")
    }

    pub fn contains(&self, topic: &str) -> bool {
        self.topics.iter().any(|t| t == topic)
    }

    pub fn as_slice(&self) -> &[String] {
        &self.topics
    }

    pub fn len(&self) -> usize {
        self.topics.len()
    }

    pub fn is_empty(&self) -> bool {
        self.topics.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_set_is_valid() {
        let set = TopicSet::builtin();
        assert!(set.contains("energy production"));
        assert!(set.contains("market share"));
        assert!(set.len() >= 20);
    }

    #[test]
    fn rejects_empty_and_duplicates() {
        assert!(TopicSet::parse("\n# nothing\n").is_err());
        assert!(TopicSet::parse("a\nb\na\n").is_err());
        assert_eq!(TopicSet::parse(" a \n\nb").unwrap().as_slice(), ["a", "b"]);
    }
}
