//! Run configuration, loadable from a TOML file.
//!
//! ```toml
//! index = "out/index"
//! embeddings = "glove.6B.50d.txt"
//! tag = "cssm"
//!
//! [salience]
//! window = 30
//! alpha = 0.1
//!
//! [aggregation]
//! mode = "cssm-lf"
//! beta = 0.2
//! rerank_depth = "full"
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::aggregate::AggregationParams;
use crate::error::{Error, Result};
use crate::salience::SalienceParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    pub index: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub queries: Option<PathBuf>,
    pub qrels: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub tag: String,
    pub threads: Option<usize>,
    pub salience: SalienceParams,
    pub aggregation: AggregationParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            corpus: None,
            index: None,
            embeddings: None,
            queries: None,
            qrels: None,
            out: None,
            tag: "cssm".to_owned(),
            threads: None,
            salience: SalienceParams::default(),
            aggregation: AggregationParams::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::InvalidParameter(m) => Error::parse(path, 1, m),
            e => e,
        })
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(text).map_err(|e| Error::InvalidParameter(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn validate(&self) -> Result<()> {
        self.salience.validate()?;
        self.aggregation.validate()?;
        if self.tag.is_empty() || self.tag.chars().any(char::is_whitespace) {
            return Err(Error::InvalidParameter(format!(
                "run tag `{}` must be one non-empty word",
                self.tag
            )));
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidParameter("threads must be >= 1".into()));
        }
        Ok(())
    }
}
