//! Bounded check reports with re-verifiable witnesses.

use serde::{Deserialize, Serialize};

use crate::morphism::MorphismRecord;
use crate::structure::RelStructure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// The property held for every instance examined up to the stated bound.
    HoldsUpToBound,
    /// A counterexample was found; this verdict is final.
    Fails,
}

/// An amalgamation-style instance: two maps out of a common `a`.
/// The kinds of `f1`/`f2` vary per property (AP: both embeddings, HAP: `f2`
/// is a homomorphism).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Square {
    pub a: RelStructure,
    pub b1: RelStructure,
    pub b2: RelStructure,
    pub f1: MorphismRecord,
    pub f2: MorphismRecord,
}

/// A completed amalgamation square.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SquareSolution {
    pub c: RelStructure,
    pub g1: MorphismRecord,
    pub g2: MorphismRecord,
}

/// Solution shape for the amalgamated extension property: the amalgam plus an
/// enlarged target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtSolution {
    pub c: RelStructure,
    pub g1: MorphismRecord,
    pub g2: MorphismRecord,
    pub t_prime: RelStructure,
    pub k: MorphismRecord,
    pub h: MorphismRecord,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    /// Hereditary-property instance: a member and the subset whose induced
    /// substructure was tested.
    Hereditary {
        member: RelStructure,
        subset: Vec<usize>,
        in_class: bool,
    },
    /// JEP/AP/HAP instance. `solution: None` marks a counterexample.
    Amalgamation {
        square: Square,
        solution: Option<SquareSolution>,
    },
    /// Strict-AP instance: the surviving candidate, if any, together with the
    /// test-object bound the mediating checks ran under.
    StrictAmalgamation {
        square: Square,
        test_bound: usize,
        solution: Option<SquareSolution>,
    },
    /// Amalgamated-extension instance.
    AmalgamatedExtension {
        square: Square,
        t: RelStructure,
        h1: MorphismRecord,
        h2: MorphismRecord,
        solution: Option<ExtSolution>,
    },
    /// Extension-property instance: an anchored small-into-big embedding and
    /// the extension found in the ambient structure, if any.
    Extension {
        small: RelStructure,
        big: RelStructure,
        emb: MorphismRecord,
        anchor: MorphismRecord,
        extension: Option<MorphismRecord>,
    },
    /// Back-and-forth survival of a partial isomorphism.
    Homogeneity {
        piece_map: Vec<(usize, usize)>,
        rounds_requested: usize,
        rounds_survived: usize,
    },
    /// Universality instance in the comma setting: a member with a coloring
    /// into the target and the color-compatible embedding found, if any.
    Universality {
        a: RelStructure,
        h: MorphismRecord,
        embedding: Option<MorphismRecord>,
    },
    /// Target-extension instance (condition (2)): a coloring of `a` and the
    /// extension through `b`, if any.
    TargetExtension {
        a: RelStructure,
        b: RelStructure,
        emb: MorphismRecord,
        h: MorphismRecord,
        extension: Option<MorphismRecord>,
    },
}

/// Outcome of one bounded property check.
///
/// A `Fails` verdict is final and carries the counterexample as the last
/// witness. A `HoldsUpToBound` verdict is explicitly bounded; `witnesses`
/// then holds a deterministic sample of per-instance solutions (the first
/// `witness_cap` instances), while every instance was checked.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub property: String,
    pub bound: usize,
    pub verdict: Verdict,
    pub instances_checked: usize,
    pub witnesses: Vec<Witness>,
    /// Set when a size or enumeration cap limited the search for some
    /// instance, i.e. the verdict may under-approximate.
    pub cap_bound: bool,
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn holds(&self) -> bool {
        self.verdict == Verdict::HoldsUpToBound
    }

    pub fn counterexample(&self) -> Option<&Witness> {
        if self.verdict == Verdict::Fails {
            self.witnesses.last()
        } else {
            None
        }
    }
}

/// How many success witnesses a report retains.
pub const WITNESS_SAMPLE: usize = 64;
