//! Pinned reference values with the metadata of the oracle that produced
//! them.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub key: String,
    pub value: f64,
    pub tol: f64,
    pub computed: String,
    pub oracle: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Fixtures {
    #[serde(rename = "fixture", default)]
    pub entries: Vec<Fixture>,
}

const BUILTIN: &str = include_str!("../fixtures/pinned.toml");

impl Fixtures {
    /// The fixtures shipped with the crate.
    pub fn builtin() -> Self {
        Self::parse(BUILTIN).expect("builtin fixtures parse")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let f: Fixtures = toml::from_str(text).map_err(|e| Error::Fixture(e.to_string()))?;
        for (i, a) in f.entries.iter().enumerate() {
            if !(a.tol > 0.0) || !a.value.is_finite() {
                return Err(Error::Fixture(format!("`{}`: value must be finite and tol positive", a.key)));
            }
            if f.entries[..i].iter().any(|b| b.key == a.key) {
                return Err(Error::Fixture(format!("duplicate key `{}`", a.key)));
            }
        }
        Ok(f)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Fixture(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Result<&Fixture> {
        self.entries.iter().find(|f| f.key == key).ok_or_else(|| Error::Fixture(format!("no fixture `{key}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_parses() {
        let f = Fixtures::builtin();
        assert!(f.get("deficit.gaussian.n2").is_ok());
        assert!(f.get("nope").is_err());
    }

    #[test]
    fn rejects_bad_entries() {
        let dup = "[[fixture]]\nkey='a'\nvalue=1.0\ntol=1e-3\ncomputed=''\noracle=''\n";
        assert!(Fixtures::parse(&dup.repeat(2)).is_err());
        assert!(Fixtures::parse(&dup.replace("1e-3", "0.0")).is_err());
        assert!(Fixtures::parse("x = ").is_err());
    }
}
