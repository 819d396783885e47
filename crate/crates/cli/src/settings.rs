//! Configuration file format and command-line overrides.

use std::path::Path;

use serde::Deserialize;
use zkcec_core::protocol::{Config, RomMode};

/// Environment variable naming the default configuration file.
pub const CONFIG_ENV: &str = "ZKCEC_CONFIG";

#[derive(Clone, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub protocol: Config,
    pub transport: Transport,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Transport {
    /// Address to accept one peer on.
    pub listen: Option<String>,
    /// Address of a listening peer.
    pub connect: Option<String>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let f: Self = toml::from_str(text).map_err(|e| e.to_string())?;
        f.protocol.validate()?;
        Ok(f)
    }

    pub fn load(path: Option<&Path>) -> Result<Self, String> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
                Self::parse(&text).map_err(|e| format!("{}: {e}", p.display()))
            }
        }
    }
}

/// Flags that take precedence over the file.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    /// Base seed: dealer `s`, verifier `s + 1`, prover `s + 2`.
    pub seed: Option<u64>,
    pub rom_mode: Option<RomMode>,
    pub compress: Option<bool>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut Config) {
        if let Some(s) = self.seed {
            cfg.dealer_seed = s;
            cfg.verifier_seed = s.wrapping_add(1);
            cfg.prover_seed = s.wrapping_add(2);
        }
        if let Some(m) = self.rom_mode {
            cfg.rom_mode = m;
        }
        if let Some(c) = self.compress {
            cfg.compress = c;
        }
    }
}
