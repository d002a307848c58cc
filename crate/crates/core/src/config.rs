//! Resource caps shared by all search and enumeration routines.

use serde::{Deserialize, Serialize};

/// All caps live in one record so every bounded claim can name the bound it
/// was checked under.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    /// Largest carrier any construction (product, power, amalgam) may produce.
    pub carrier_cap: usize,
    /// Largest carrier `canonical_form` will permute over.
    pub canonical_cap: usize,
    /// Largest raw map count `enumerate_homomorphisms` will sweep.
    pub enumeration_cap: u64,
    /// Largest number of free tuple slots the generic one-point-extension
    /// generator will enumerate (2^slots candidates).
    pub extension_slot_cap: usize,
    /// Largest carrier for amalgam candidates, on top of |B1|+|B2|.
    pub amalgam_size_cap: usize,
    /// Maximum operation arity in clone closures.
    pub arity_cap: usize,
    /// Maximum term depth in clone closures.
    pub depth_cap: usize,
    /// Maximum number of queued extension tasks in stage builders.
    pub queue_cap: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            carrier_cap: 4096,
            canonical_cap: 8,
            enumeration_cap: 2_000_000,
            extension_slot_cap: 16,
            amalgam_size_cap: 16,
            arity_cap: 3,
            depth_cap: 6,
            queue_cap: 200_000,
        }
    }
}

impl Caps {
    pub fn set(&mut self, key: &str, value: u64) -> Result<(), crate::Error> {
        let v = value as usize;
        match key {
            "carrier" => self.carrier_cap = v,
            "canonical" => self.canonical_cap = v,
            "enumeration" => self.enumeration_cap = value,
            "extension_slots" => self.extension_slot_cap = v,
            "amalgam_size" => self.amalgam_size_cap = v,
            "arity" => self.arity_cap = v,
            "depth" => self.depth_cap = v,
            "queue" => self.queue_cap = v,
            _ => return Err(crate::Error::Config(format!("unknown cap key `{key}`"))),
        }
        Ok(())
    }
}
