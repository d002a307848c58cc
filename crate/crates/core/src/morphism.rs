//! Total maps between structures, tagged with their verified kind.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::structure::RelStructure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MorphismKind {
    Hom,
    Embedding,
    Iso,
}

/// A total carrier map together with the structures it relates.
///
/// `verify` checks the tagged kind: homomorphisms map every source tuple into
/// the corresponding target relation; embeddings are additionally injective
/// and tuple-reflecting; isomorphisms are additionally bijective.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Morphism {
    pub source: RelStructure,
    pub target: RelStructure,
    pub map: Vec<usize>,
    pub kind: MorphismKind,
}

/// Minimal wire form: `{"map":[…],"kind":…}`, source and target supplied by
/// context.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismRecord {
    pub map: Vec<usize>,
    pub kind: MorphismKind,
}

impl From<&Morphism> for MorphismRecord {
    fn from(m: &Morphism) -> Self {
        MorphismRecord { map: m.map.clone(), kind: m.kind }
    }
}

impl Morphism {
    /// Builds and verifies in one step.
    pub fn verified(
        source: &RelStructure,
        target: &RelStructure,
        map: Vec<usize>,
        kind: MorphismKind,
    ) -> Result<Morphism> {
        let m = Morphism {
            source: source.clone(),
            target: target.clone(),
            map,
            kind,
        };
        m.verify()?;
        Ok(m)
    }

    pub fn identity(s: &RelStructure) -> Morphism {
        Morphism {
            source: s.clone(),
            target: s.clone(),
            map: (0..s.size).collect(),
            kind: MorphismKind::Iso,
        }
    }

    pub fn verify(&self) -> Result<()> {
        if self.source.signature != self.target.signature {
            return Err(Error::SignatureMismatch(
                "morphism endpoints have different signatures".into(),
            ));
        }
        if self.map.len() != self.source.size {
            return Err(Error::NotAMorphism {
                expected: format!("{:?}", self.kind),
                reason: format!(
                    "map length {} differs from source size {}",
                    self.map.len(),
                    self.source.size
                ),
            });
        }
        for &v in &self.map {
            if v >= self.target.size {
                return Err(Error::VertexOutOfRange { vertex: v, size: self.target.size });
            }
        }
        for (sym, rel) in self.source.relations.iter().enumerate() {
            for t in rel {
                let image: Vec<usize> = t.iter().map(|&v| self.map[v]).collect();
                if !self.target.has_tuple(sym, &image) {
                    return Err(Error::NotAMorphism {
                        expected: "hom".into(),
                        reason: format!(
                            "tuple {:?} maps to {:?} outside `{}`",
                            t,
                            image,
                            self.source.signature.symbols()[sym].name
                        ),
                    });
                }
            }
        }
        if self.kind == MorphismKind::Hom {
            return Ok(());
        }
        // injectivity
        let mut inverse = vec![usize::MAX; self.target.size];
        for (x, &y) in self.map.iter().enumerate() {
            if inverse[y] != usize::MAX {
                return Err(Error::NotAMorphism {
                    expected: "embedding".into(),
                    reason: format!("not injective: {} and {} both map to {}", inverse[y], x, y),
                });
            }
            inverse[y] = x;
        }
        // tuple reflection on the image
        for (sym, rel) in self.target.relations.iter().enumerate() {
            for t in rel {
                if t.iter().all(|&v| inverse[v] != usize::MAX) {
                    let pre: Vec<usize> = t.iter().map(|&v| inverse[v]).collect();
                    if !self.source.has_tuple(sym, &pre) {
                        return Err(Error::NotAMorphism {
                            expected: "embedding".into(),
                            reason: format!(
                                "target tuple {:?} under `{}` is not reflected",
                                t,
                                self.target.signature.symbols()[sym].name
                            ),
                        });
                    }
                }
            }
        }
        if self.kind == MorphismKind::Iso && self.source.size != self.target.size {
            return Err(Error::NotAMorphism {
                expected: "iso".into(),
                reason: "carrier sizes differ".into(),
            });
        }
        Ok(())
    }

    /// `other ∘ self`, verified at the weaker of the two kinds.
    pub fn then(&self, other: &Morphism) -> Result<Morphism> {
        if self.target != other.source {
            return Err(Error::CompositionMismatch(
                "codomain of the first map is not the domain of the second".into(),
            ));
        }
        let kind = match (self.kind, other.kind) {
            (MorphismKind::Iso, MorphismKind::Iso) => MorphismKind::Iso,
            (MorphismKind::Hom, _) | (_, MorphismKind::Hom) => MorphismKind::Hom,
            _ => MorphismKind::Embedding,
        };
        let map = self.map.iter().map(|&v| other.map[v]).collect();
        Morphism::verified(&self.source, &other.target, map, kind)
    }
}

/// Checks `r ∘ s = 1` on the carrier of `s`'s source (`B`), where
/// `r: A → B` and `s: B → A`. Returns the first witness point on failure.
pub fn is_retraction_pair(r: &Morphism, s: &Morphism) -> Result<std::result::Result<(), usize>> {
    if r.target != s.source || s.target != r.source {
        return Err(Error::CompositionMismatch(
            "expected r: A -> B and s: B -> A".into(),
        ));
    }
    for x in 0..s.source.size {
        if r.map[s.map[x]] != x {
            return Ok(Err(x));
        }
    }
    Ok(Ok(()))
}

pub use crate::search::{
    enumerate_homomorphisms, enumerate_morphisms, find_embedding, find_homomorphism,
    find_isomorphism, find_morphism, find_section, PartialMap,
};
