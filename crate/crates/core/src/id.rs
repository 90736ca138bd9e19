use std::fmt;

use crate::error::{Error, Result};

/// Words reserved by the `.sol` grammar; none of them can name an element.
pub const KEYWORDS: &[&str] = &[
    "structure", "level", "entity", "rel", "of", "in", "out", "opaque", "alt", "p", "denote",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

/// Case-sensitive identifier: an ASCII letter followed by letters, digits or
/// underscores. Also used for structure names and alternative-group tags.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ElementId(String);

impl ElementId {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if Self::is_valid(&name) {
            Ok(Self(name))
        } else {
            Err(Error::InvalidIdentifier(name))
        }
    }

    pub fn is_valid(name: &str) -> bool {
        let mut chars = name.chars();
        match chars.next() {
            Some(c) if c.is_ascii_alphabetic() => {}
            _ => return false,
        }
        chars.all(|c| c.is_ascii_alphanumeric() || c == '_') && !is_keyword(name)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for ElementId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl PartialEq<str> for ElementId {
    fn eq(&self, other: &str) -> bool {
        self.0 == other
    }
}

impl PartialEq<&str> for ElementId {
    fn eq(&self, other: &&str) -> bool {
        self.0 == *other
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_identifier_syntax() {
        for ok in ["R", "E_1", "coin_up", "R_m", "not_R_h", "x9"] {
            assert!(ElementId::new(ok).is_ok(), "{ok}");
        }
    }

    #[test]
    fn rejects_bad_identifiers_and_keywords() {
        for bad in ["", "1R", "_a", "a-b", "é", "rel", "p", "of", "a b"] {
            assert_eq!(
                ElementId::new(bad),
                Err(Error::InvalidIdentifier(bad.to_string())),
                "{bad}"
            );
        }
    }
}
