//! Defaults, the optional TOML config file, and flag overrides.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dseries::SeriesCaps;
use crate::error::{Error, Result};

/// Settings read from a config file; every field is optional.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub p: Option<u64>,
    #[serde(rename = "N")]
    pub n: Option<u32>,
    pub ext_degree: Option<u32>,
    #[serde(rename = "M")]
    pub m: Option<i64>,
    #[serde(rename = "D")]
    pub d: Option<u32>,
    pub r: Option<u32>,
    pub seed: Option<u64>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text)
            .map_err(|e| Error::Parse { pos: e.span().map_or(0, |s| s.start), msg: format!("config: {}", e.message()) })
    }
}

/// Fully resolved parameters of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    pub p: u64,
    #[serde(rename = "N")]
    pub n: u32,
    pub ext_degree: u32,
    #[serde(rename = "M")]
    pub m: i64,
    #[serde(rename = "D")]
    pub d: u32,
    pub r: u32,
    pub seed: u64,
}

impl Default for Params {
    fn default() -> Self {
        Params { p: 5, n: 12, ext_degree: 1, m: 32, d: 8, r: 2, seed: 0 }
    }
}

impl Params {
    /// Built-in defaults, then the config file, then flags.
    pub fn resolve(file: Option<&ConfigFile>, flags: &ConfigFile) -> Params {
        let mut out = Params::default();
        for layer in file.into_iter().chain(std::iter::once(flags)) {
            out.p = layer.p.unwrap_or(out.p);
            out.n = layer.n.unwrap_or(out.n);
            out.ext_degree = layer.ext_degree.unwrap_or(out.ext_degree);
            out.m = layer.m.unwrap_or(out.m);
            out.d = layer.d.unwrap_or(out.d);
            out.r = layer.r.unwrap_or(out.r);
            out.seed = layer.seed.unwrap_or(out.seed);
        }
        out
    }

    pub fn caps(&self) -> Result<SeriesCaps> {
        SeriesCaps::new(self.m, self.d, self.r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file() {
        let file = ConfigFile::parse("p = 7\nN = 20\nM = 40").unwrap();
        let flags = ConfigFile { n: Some(9), ..Default::default() };
        let p = Params::resolve(Some(&file), &flags);
        assert_eq!((p.p, p.n, p.m, p.d, p.r), (7, 9, 40, 8, 2));
    }

    #[test]
    fn defaults() {
        let p = Params::resolve(None, &ConfigFile::default());
        assert_eq!((p.n, p.m, p.d, p.r), (12, 32, 8, 2));
    }

    #[test]
    fn unknown_key_is_a_parse_error() {
        assert!(matches!(ConfigFile::parse("Q = 1"), Err(Error::Parse { .. })));
    }
}
