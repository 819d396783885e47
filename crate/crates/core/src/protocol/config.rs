//! Parameters both parties must agree on, plus local seeds.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::encoding::{Blake2Hasher, CodeHasher, HASH_BITS, W_LIT};
use crate::sat::DEFAULT_BUDGET;

pub const PROTOCOL_VERSION: u8 = 1;

/// How hidden-index memory reads are proven.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RomMode {
    /// Bit-decomposed one-hot selector.
    #[default]
    Onehot,
}

impl RomMode {
    pub fn id(self) -> &'static str {
        match self {
            RomMode::Onehot => "onehot-bits",
        }
    }
}

impl FromStr for RomMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "onehot" | "onehot-bits" => Ok(RomMode::Onehot),
            _ => Err(format!("unknown rom mode {s:?}; supported: onehot")),
        }
    }
}

impl fmt::Display for RomMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Merge single-use resolvents into chains.
    pub compress: bool,
    pub rom_mode: RomMode,
    /// Resolution steps proven per challenge.
    pub batch_steps: usize,
    /// Solver conflict budget (prover only).
    pub solver_budget: u64,
    /// Seed of the simulated dealer; both parties must use the same one.
    pub dealer_seed: u64,
    /// Verifier challenge seed.
    pub verifier_seed: u64,
    /// Prover hash-key seed.
    pub prover_seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            compress: true,
            rom_mode: RomMode::Onehot,
            batch_steps: 64,
            solver_budget: DEFAULT_BUDGET,
            dealer_seed: 1,
            verifier_seed: 2,
            prover_seed: 3,
        }
    }
}

impl Config {
    /// Canonical description of everything that shapes the message flow.
    pub fn canonical(&self) -> String {
        format!(
            "zkcec/v{PROTOCOL_VERSION};field=gf2^128:x^128+x^7+x^2+x+1;hash={};hash_bits={HASH_BITS};\
             w_lit={W_LIT};rom={};compress={};batch={}",
            Blake2Hasher.id(),
            self.rom_mode.id(),
            self.compress,
            self.batch_steps
        )
    }

    pub fn digest(&self) -> [u8; 32] {
        Sha256::digest(self.canonical().as_bytes()).into()
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.batch_steps == 0 {
            return Err("batch_steps must be positive".into());
        }
        Ok(())
    }
}
