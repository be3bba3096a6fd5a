use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

const MAX_LEN: usize = 8;

/// Name of a digit sign (`N01`, `N39B`, or a placeholder like `U7`), stored
/// inline so runs stay `Copy`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DigitSign([u8; MAX_LEN]);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseSignError {
    #[error("`{0}` is not a digit sign name")]
    NotDigit(String),
    #[error("digit sign name `{0}` longer than {MAX_LEN} bytes")]
    TooLong(String),
}

impl DigitSign {
    pub fn as_str(&self) -> &str {
        let len = self.0.iter().position(|&b| b == 0).unwrap_or(MAX_LEN);
        // Only ASCII is ever stored.
        std::str::from_utf8(&self.0[..len]).expect("ascii sign name")
    }

    /// Accepts any short ASCII alphanumeric name; table configs use this for
    /// placeholder digits that have no `N` label.
    pub fn placeholder(name: &str) -> Result<Self, ParseSignError> {
        if name.is_empty() || !name.bytes().all(|b| b.is_ascii_alphanumeric()) {
            return Err(ParseSignError::NotDigit(name.to_string()));
        }
        Self::pack(name)
    }

    fn pack(name: &str) -> Result<Self, ParseSignError> {
        if name.len() > MAX_LEN {
            return Err(ParseSignError::TooLong(name.to_string()));
        }
        let mut buf = [0u8; MAX_LEN];
        buf[..name.len()].copy_from_slice(name.as_bytes());
        Ok(DigitSign(buf))
    }
}

/// `N`, one or more digits, optional trailing letter.
pub(crate) fn is_digit_name(name: &str) -> bool {
    let Some(rest) = name.strip_prefix('N') else {
        return false;
    };
    let digits = rest.bytes().take_while(u8::is_ascii_digit).count();
    if digits == 0 {
        return false;
    }
    let tail = &rest[digits..];
    tail.is_empty() || (tail.len() == 1 && tail.as_bytes()[0].is_ascii_alphabetic())
}

pub(crate) fn is_text_name(name: &str) -> bool {
    name.len() > 1
        && name.starts_with('M')
        && !name
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, '(' | ')' | ','))
}

impl FromStr for DigitSign {
    type Err = ParseSignError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if !is_digit_name(s) {
            return Err(ParseSignError::NotDigit(s.to_string()));
        }
        Self::pack(s)
    }
}

impl fmt::Display for DigitSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for DigitSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for DigitSign {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for DigitSign {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        DigitSign::placeholder(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digit_names() {
        for ok in ["N01", "N8B", "N39B", "N14", "N2"] {
            assert!(is_digit_name(ok), "{ok}");
        }
        for bad in ["N", "NB", "N01BB", "M288", "n01", "N01~a"] {
            assert!(!is_digit_name(bad), "{bad}");
        }
    }

    #[test]
    fn text_names_keep_variants() {
        assert!(is_text_name("M056~f"));
        assert!(is_text_name("M351+X"));
        assert!(!is_text_name("M"));
        assert!(!is_text_name("N01"));
    }

    #[test]
    fn round_trips_and_orders_like_strings() {
        let a: DigitSign = "N1".parse().unwrap();
        let b: DigitSign = "N10".parse().unwrap();
        assert_eq!(a.to_string(), "N1");
        assert!(a < b);
        assert_eq!(
            "N123456789".parse::<DigitSign>(),
            Err(ParseSignError::TooLong("N123456789".into()))
        );
    }
}
