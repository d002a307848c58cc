//! Finite relational structures over a declared signature.
//!
//! Carriers are always initial segments `{0, …, n-1}` of the naturals; every
//! construction that identifies or combines vertices produces a fresh
//! relabeling together with explicit witness maps.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::de::Error as _;
use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::config::Caps;
use crate::error::{Error, Result};
use crate::morphism::{Morphism, MorphismKind};

/// A relation symbol: a name together with a positive arity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolDecl {
    pub name: String,
    pub arity: usize,
}

/// An ordered list of relation symbols. The order is significant for
/// serialization and for the relation-table indexing of [`RelStructure`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signature {
    symbols: Vec<SymbolDecl>,
}

impl Signature {
    pub fn new(symbols: Vec<(impl Into<String>, usize)>) -> Result<Signature> {
        let symbols: Vec<SymbolDecl> = symbols
            .into_iter()
            .map(|(name, arity)| SymbolDecl { name: name.into(), arity })
            .collect();
        let sig = Signature { symbols };
        sig.validate()?;
        Ok(sig)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for s in &self.symbols {
            if s.arity == 0 {
                return Err(Error::InvalidStructure(format!(
                    "symbol `{}` has arity 0; arities must be >= 1",
                    s.name
                )));
            }
            if !seen.insert(&s.name) {
                return Err(Error::InvalidStructure(format!(
                    "duplicate symbol name `{}`",
                    s.name
                )));
            }
        }
        Ok(())
    }

    pub fn symbols(&self) -> &[SymbolDecl] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.name == name)
    }

    /// One binary symbol `E`; the signature of graphs and digraphs.
    pub fn graph() -> Signature {
        Signature::new(vec![("E", 2)]).unwrap()
    }

    /// One binary symbol `lt`; the signature of strict orders.
    pub fn order() -> Signature {
        Signature::new(vec![("lt", 2)]).unwrap()
    }
}

impl Serialize for Signature {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.symbols.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Signature {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let symbols = Vec::<SymbolDecl>::deserialize(deserializer)?;
        let sig = Signature { symbols };
        sig.validate().map_err(D::Error::custom)?;
        Ok(sig)
    }
}

/// A finite relational structure: carrier `{0, …, size-1}` plus one tuple set
/// per signature symbol. Tuple sets are kept sorted, so serialization is
/// canonical by construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelStructure {
    pub signature: Signature,
    pub size: usize,
    /// Indexed parallel to `signature.symbols()`.
    pub relations: Vec<BTreeSet<Vec<usize>>>,
}

impl RelStructure {
    /// The structure with the given carrier size and no tuples.
    pub fn empty(signature: Signature, size: usize) -> RelStructure {
        let relations = vec![BTreeSet::new(); signature.len()];
        RelStructure { signature, size, relations }
    }

    pub fn with_tuples(
        signature: Signature,
        size: usize,
        tuples: Vec<(&str, Vec<Vec<usize>>)>,
    ) -> Result<RelStructure> {
        let mut s = RelStructure::empty(signature, size);
        for (name, ts) in tuples {
            let idx = s.signature.index_of(name).ok_or_else(|| {
                Error::InvalidStructure(format!("unknown symbol `{name}`"))
            })?;
            for t in ts {
                s.relations[idx].insert(t);
            }
        }
        s.validate()?;
        Ok(s)
    }

    pub fn add_tuple(&mut self, symbol: usize, tuple: Vec<usize>) {
        self.relations[symbol].insert(tuple);
    }

    pub fn has_tuple(&self, symbol: usize, tuple: &[usize]) -> bool {
        self.relations[symbol].contains(tuple)
    }

    /// Checks every invariant; reports the first violation.
    pub fn validate(&self) -> Result<()> {
        self.signature.validate()?;
        for (idx, rel) in self.relations.iter().enumerate() {
            let decl = &self.signature.symbols()[idx];
            for t in rel {
                if t.len() != decl.arity {
                    return Err(Error::ArityMismatch(format!(
                        "tuple {:?} has length {} but `{}` is declared with arity {}",
                        t,
                        t.len(),
                        decl.name,
                        decl.arity
                    )));
                }
                for &v in t {
                    if v >= self.size {
                        return Err(Error::VertexOutOfRange { vertex: v, size: self.size });
                    }
                }
            }
        }
        if self.relations.len() != self.signature.len() {
            return Err(Error::InvalidStructure(
                "relation table count differs from signature length".into(),
            ));
        }
        Ok(())
    }

    pub fn tuple_count(&self) -> usize {
        self.relations.iter().map(|r| r.len()).sum()
    }

    /// Direct product: carrier indexed row-major by pairs, a tuple present iff
    /// both coordinate projections are present.
    pub fn direct_product(&self, other: &RelStructure, caps: &Caps) -> Result<RelStructure> {
        if self.signature != other.signature {
            return Err(Error::SignatureMismatch(
                "direct_product requires a common signature".into(),
            ));
        }
        let size = self.size.checked_mul(other.size).ok_or(Error::CarrierCap {
            got: usize::MAX,
            cap: caps.carrier_cap,
        })?;
        if size > caps.carrier_cap {
            return Err(Error::CarrierCap { got: size, cap: caps.carrier_cap });
        }
        let mut out = RelStructure::empty(self.signature.clone(), size);
        let pair = |i: usize, j: usize| i * other.size + j;
        for (sym, rel_a) in self.relations.iter().enumerate() {
            for ta in rel_a {
                for tb in &other.relations[sym] {
                    let t: Vec<usize> =
                        ta.iter().zip(tb.iter()).map(|(&x, &y)| pair(x, y)).collect();
                    out.relations[sym].insert(t);
                }
            }
        }
        Ok(out)
    }

    /// The two projection maps of `direct_product`, as raw vertex maps.
    pub fn product_projections(size_a: usize, size_b: usize) -> (Vec<usize>, Vec<usize>) {
        let n = size_a * size_b;
        let p1 = (0..n).map(|v| v / size_b).collect();
        let p2 = (0..n).map(|v| v % size_b).collect();
        (p1, p2)
    }

    /// `n`-th power with lexicographic (most-significant-first) tuple
    /// indexing. `power(a, 1)` is identical to `a`.
    pub fn power(&self, n: usize, caps: &Caps) -> Result<RelStructure> {
        if n == 0 {
            return Err(Error::Precondition("power exponent must be positive".into()));
        }
        let mut size: usize = 1;
        for _ in 0..n {
            size = size.checked_mul(self.size).unwrap_or(usize::MAX);
            if size > caps.carrier_cap {
                return Err(Error::CarrierCap { got: size, cap: caps.carrier_cap });
            }
        }
        let decode = |v: usize| -> Vec<usize> {
            let mut t = vec![0; n];
            let mut rest = v;
            for i in (0..n).rev() {
                t[i] = rest % self.size;
                rest /= self.size;
            }
            t
        };
        let components: Vec<Vec<usize>> = (0..size).map(decode)
            .collect();
        let mut out = RelStructure::empty(self.signature.clone(), size);
        for (sym, rel) in self.relations.iter().enumerate() {
            if size == 0 {
                break;
            }
            let arity = self.signature.symbols()[sym].arity;
            // A tuple of power vertices is in R iff every coordinate slice is.
            let mut tuple = vec![0usize; arity];
            loop {
                let ok = (0..n).all(|i| {
                    let slice: Vec<usize> =
                        tuple.iter().map(|&w| components[w][i]).collect();
                    rel.contains(&slice)
                });
                if ok {
                    out.relations[sym].insert(tuple.clone());
                }
                // lexicographic increment
                let mut pos = arity;
                while pos > 0 {
                    tuple[pos - 1] += 1;
                    if tuple[pos - 1] < size {
                        break;
                    }
                    tuple[pos - 1] = 0;
                    pos -= 1;
                }
                if pos == 0 {
                    break;
                }
            }
        }
        Ok(out)
    }

    /// Restriction to a vertex subset, relabeled in increasing original
    /// order. Returns the substructure and the inclusion embedding.
    pub fn induced_substructure(&self, subset: &[usize]) -> Result<(RelStructure, Morphism)> {
        for &v in subset {
            if v >= self.size {
                return Err(Error::VertexOutOfRange { vertex: v, size: self.size });
            }
        }
        let order: Vec<usize> = subset.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        let rank: BTreeMap<usize, usize> =
            order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut sub = RelStructure::empty(self.signature.clone(), order.len());
        for (sym, rel) in self.relations.iter().enumerate() {
            for t in rel {
                if t.iter().all(|v| rank.contains_key(v)) {
                    sub.relations[sym].insert(t.iter().map(|v| rank[v]).collect());
                }
            }
        }
        let inclusion = Morphism::verified(&sub, self, order, MorphismKind::Embedding)?;
        Ok((sub, inclusion))
    }

    /// Glue `b1` and `b2` along `a` with no tuples beyond the images of the
    /// originals. Carrier keeps `b1`'s indices and appends the vertices of
    /// `b2` outside `f2(a)` in increasing order.
    pub fn free_amalgam(
        a: &RelStructure,
        b1: &RelStructure,
        b2: &RelStructure,
        f1: &Morphism,
        f2: &Morphism,
    ) -> Result<(RelStructure, Morphism, Morphism)> {
        for (f, b, tag) in [(f1, b1, "f1"), (f2, b2, "f2")] {
            if f.kind != MorphismKind::Embedding && f.kind != MorphismKind::Iso {
                return Err(Error::NotAMorphism {
                    expected: "embedding".into(),
                    reason: format!("{tag} is tagged {:?}", f.kind),
                });
            }
            if f.source != *a || f.target != *b {
                return Err(Error::CompositionMismatch(format!(
                    "{tag} must be an embedding of a into its B"
                )));
            }
            f.verify()?;
        }
        let mut g2_map = vec![usize::MAX; b2.size];
        for (x, &y) in f2.map.iter().enumerate() {
            g2_map[y] = f1.map[x];
        }
        let mut next = b1.size;
        for y in 0..b2.size {
            if g2_map[y] == usize::MAX {
                g2_map[y] = next;
                next += 1;
            }
        }
        let mut out = RelStructure::empty(a.signature.clone(), next);
        for (sym, rel) in b1.relations.iter().enumerate() {
            for t in rel {
                out.relations[sym].insert(t.clone());
            }
        }
        for (sym, rel) in b2.relations.iter().enumerate() {
            for t in rel {
                out.relations[sym].insert(t.iter().map(|&v| g2_map[v]).collect());
            }
        }
        let g1 = Morphism::verified(b1, &out, (0..b1.size).collect(), MorphismKind::Embedding)?;
        let g2 = Morphism::verified(b2, &out, g2_map, MorphismKind::Embedding)?;
        Ok((out, g1, g2))
    }

    /// Relabel the carrier along a permutation: vertex `v` becomes `perm[v]`.
    pub fn apply_permutation(&self, perm: &[usize]) -> RelStructure {
        debug_assert_eq!(perm.len(), self.size);
        let mut out = RelStructure::empty(self.signature.clone(), self.size);
        for (sym, rel) in self.relations.iter().enumerate() {
            for t in rel {
                out.relations[sym].insert(t.iter().map(|&v| perm[v]).collect());
            }
        }
        out
    }

    /// Disjoint union, `other`'s vertices shifted past `self`'s.
    pub fn disjoint_union(&self, other: &RelStructure) -> Result<RelStructure> {
        if self.signature != other.signature {
            return Err(Error::SignatureMismatch("disjoint_union".into()));
        }
        let mut out = self.clone();
        out.size += other.size;
        for (sym, rel) in other.relations.iter().enumerate() {
            for t in rel {
                out.relations[sym].insert(t.iter().map(|&v| v + self.size).collect());
            }
        }
        Ok(out)
    }
}

impl fmt::Display for RelStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{}|", self.size)?;
        for (sym, rel) in self.relations.iter().enumerate() {
            write!(f, " {}={:?}", self.signature.symbols()[sym].name, rel)?;
        }
        Ok(())
    }
}

impl Serialize for RelStructure {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        struct Relations<'a>(&'a RelStructure);
        impl Serialize for Relations<'_> {
            fn serialize<S: Serializer>(
                &self,
                serializer: S,
            ) -> std::result::Result<S::Ok, S::Error> {
                let mut map = serializer.serialize_map(Some(self.0.signature.len()))?;
                for (sym, decl) in self.0.signature.symbols().iter().enumerate() {
                    // BTreeSet<Vec<usize>> iterates lexicographically.
                    let tuples: Vec<&Vec<usize>> = self.0.relations[sym].iter().collect();
                    map.serialize_entry(&decl.name, &tuples)?;
                }
                map.end()
            }
        }
        let mut st = serializer.serialize_struct("RelStructure", 3)?;
        st.serialize_field("signature", &self.signature)?;
        st.serialize_field("size", &self.size)?;
        st.serialize_field("relations", &Relations(self))?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for RelStructure {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            signature: Signature,
            size: usize,
            relations: BTreeMap<String, Vec<Vec<usize>>>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let mut s = RelStructure::empty(raw.signature, raw.size);
        for (name, tuples) in raw.relations {
            let idx = s
                .signature
                .index_of(&name)
                .ok_or_else(|| D::Error::custom(format!("unknown relation symbol `{name}`")))?;
            for t in tuples {
                if !s.relations[idx].insert(t.clone()) {
                    return Err(D::Error::custom(format!(
                        "duplicate tuple {t:?} under `{name}`"
                    )));
                }
            }
        }
        s.validate().map_err(D::Error::custom)?;
        Ok(s)
    }
}

/// Small structures used throughout tests and built-in scenarios.
pub mod zoo {
    use super::*;

    /// Complete loopless graph on `n` vertices (both orientations stored).
    pub fn clique(n: usize) -> RelStructure {
        let mut g = RelStructure::empty(Signature::graph(), n);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    g.add_tuple(0, vec![i, j]);
                }
            }
        }
        g
    }

    /// Edgeless graph on `n` vertices.
    pub fn edgeless(n: usize) -> RelStructure {
        RelStructure::empty(Signature::graph(), n)
    }

    /// Path 0 - 1 - … - (n-1), undirected.
    pub fn path(n: usize) -> RelStructure {
        let mut g = RelStructure::empty(Signature::graph(), n);
        for i in 0..n.saturating_sub(1) {
            g.add_tuple(0, vec![i, i + 1]);
            g.add_tuple(0, vec![i + 1, i]);
        }
        g
    }

    /// Strict linear order 0 < 1 < … < n-1 over the `lt` signature.
    pub fn chain(n: usize) -> RelStructure {
        let mut s = RelStructure::empty(Signature::order(), n);
        for i in 0..n {
            for j in (i + 1)..n {
                s.add_tuple(0, vec![i, j]);
            }
        }
        s
    }

    /// Transitive tournament on `n` vertices over the graph signature:
    /// the strict chain seen as a digraph.
    pub fn transitive_tournament(n: usize) -> RelStructure {
        let mut s = RelStructure::empty(Signature::graph(), n);
        for i in 0..n {
            for j in (i + 1)..n {
                s.add_tuple(0, vec![i, j]);
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morphism::find_isomorphism;

    fn caps() -> Caps {
        Caps::default()
    }

    #[test]
    fn validate_accepts_well_formed_edge() {
        let s = RelStructure::with_tuples(Signature::graph(), 2, vec![("E", vec![vec![0, 1]])])
            .unwrap();
        assert!(s.validate().is_ok());
    }

    #[test]
    fn validate_rejects_out_of_range_entry() {
        let mut s = RelStructure::empty(Signature::graph(), 2);
        s.add_tuple(0, vec![0, 5]);
        assert_eq!(
            s.validate(),
            Err(Error::VertexOutOfRange { vertex: 5, size: 2 })
        );
    }

    #[test]
    fn validate_rejects_arity_mismatch() {
        let mut s = RelStructure::empty(Signature::graph(), 2);
        s.add_tuple(0, vec![0, 1, 1]);
        assert!(matches!(s.validate(), Err(Error::ArityMismatch(_))));
    }

    #[test]
    fn size_zero_is_legal() {
        let s = RelStructure::empty(Signature::graph(), 0);
        assert!(s.validate().is_ok());
    }

    #[test]
    fn product_of_two_edges() {
        // K_2 x K_2: vertices (i,j) |-> 2i+j, edges exactly {02<->13 pairs}:
        // ((0,0),(1,1)) and ((0,1),(1,0)) plus symmetric tuples.
        let k2 = zoo::clique(2);
        let p = k2.direct_product(&k2, &caps()).unwrap();
        assert_eq!(p.size, 4);
        let expected: BTreeSet<Vec<usize>> =
            [vec![0, 3], vec![3, 0], vec![1, 2], vec![2, 1]].into_iter().collect();
        assert_eq!(p.relations[0], expected);
    }

    #[test]
    fn product_with_full_singleton_is_isomorphic() {
        let a = zoo::path(3);
        let mut one = RelStructure::empty(Signature::graph(), 1);
        one.add_tuple(0, vec![0, 0]);
        let p = a.direct_product(&one, &caps()).unwrap();
        assert!(find_isomorphism(&a, &p, &caps()).unwrap().is_some());
    }

    #[test]
    fn product_with_empty_is_empty() {
        let b = zoo::clique(3);
        let empty = RelStructure::empty(Signature::graph(), 0);
        let p = empty.direct_product(&b, &caps()).unwrap();
        assert_eq!(p.size, 0);
    }

    #[test]
    fn product_projections_are_homomorphisms() {
        let a = zoo::path(3);
        let b = zoo::clique(2);
        let p = a.direct_product(&b, &caps()).unwrap();
        let (p1, p2) = RelStructure::product_projections(a.size, b.size);
        assert!(Morphism::verified(&p, &a, p1, MorphismKind::Hom).is_ok());
        assert!(Morphism::verified(&p, &b, p2, MorphismKind::Hom).is_ok());
    }

    #[test]
    fn power_one_is_identical() {
        let a = zoo::path(3);
        assert_eq!(a.power(1, &caps()).unwrap(), a);
    }

    #[test]
    fn power_two_equals_product() {
        let k2 = zoo::clique(2);
        assert_eq!(
            k2.power(2, &caps()).unwrap(),
            k2.direct_product(&k2, &caps()).unwrap()
        );
    }

    #[test]
    fn power_respects_carrier_cap() {
        let a = zoo::edgeless(3);
        let mut c = caps();
        c.carrier_cap = 64;
        assert_eq!(
            a.power(4, &c),
            Err(Error::CarrierCap { got: 81, cap: 64 })
        );
    }

    #[test]
    fn induced_of_clique_is_smaller_clique() {
        let k3 = zoo::clique(3);
        let (sub, inc) = k3.induced_substructure(&[0, 1]).unwrap();
        assert_eq!(sub, zoo::clique(2));
        assert!(inc.verify().is_ok());
    }

    #[test]
    fn induced_empty_subset() {
        let a = zoo::clique(3);
        let (sub, _) = a.induced_substructure(&[]).unwrap();
        assert_eq!(sub.size, 0);
    }

    #[test]
    fn induced_path_endpoints_have_no_edge() {
        // brute-force oracle: no tuple of path(3) lies within {0,2}
        let p = zoo::path(3);
        let keep: BTreeSet<usize> = [0, 2].into_iter().collect();
        let survivors: Vec<_> = p.relations[0]
            .iter()
            .filter(|t| t.iter().all(|v| keep.contains(v)))
            .collect();
        assert!(survivors.is_empty());
        let (sub, _) = p.induced_substructure(&keep.iter().copied().collect::<Vec<_>>()).unwrap();
        assert_eq!(sub, zoo::edgeless(2));
    }

    fn embedding_of_vertex_into_edge(target: &RelStructure, v: usize) -> Morphism {
        let pt = zoo::edgeless(1);
        Morphism::verified(&pt, target, vec![v], MorphismKind::Embedding).unwrap()
    }

    #[test]
    fn free_amalgam_of_two_edges_over_a_vertex() {
        let k2 = zoo::clique(2);
        let pt = zoo::edgeless(1);
        let f1 = embedding_of_vertex_into_edge(&k2, 0);
        let f2 = embedding_of_vertex_into_edge(&k2, 0);
        let (c, g1, g2) = RelStructure::free_amalgam(&pt, &k2, &k2, &f1, &f2).unwrap();
        assert_eq!(c.size, 3);
        // a path of length 2: no edge between the two outer vertices
        assert_eq!(c.relations[0].len(), 4);
        assert!(!c.has_tuple(0, &[1, 2]) && !c.has_tuple(0, &[2, 1]));
        assert_eq!(g1.map[0], g2.map[0]);
    }

    #[test]
    fn free_amalgam_over_empty_is_disjoint_union() {
        let a = RelStructure::empty(Signature::graph(), 0);
        let b1 = zoo::clique(2);
        let b2 = zoo::path(3);
        let f1 = Morphism::verified(&a, &b1, vec![], MorphismKind::Embedding).unwrap();
        let f2 = Morphism::verified(&a, &b2, vec![], MorphismKind::Embedding).unwrap();
        let (c, _, _) = RelStructure::free_amalgam(&a, &b1, &b2, &f1, &f2).unwrap();
        assert_eq!(c, b1.disjoint_union(&b2).unwrap());
    }

    #[test]
    fn free_amalgam_of_triangles_over_edge() {
        let k2 = zoo::clique(2);
        let k3 = zoo::clique(3);
        let f = Morphism::verified(&k2, &k3, vec![0, 1], MorphismKind::Embedding).unwrap();
        let (c, _, _) = RelStructure::free_amalgam(&k2, &k3, &k3, &f, &f).unwrap();
        assert_eq!(c.size, 4);
        // oracle: count undirected edges after identification
        assert_eq!(c.relations[0].len(), 10); // 5 undirected edges, both orientations
        assert!(c.validate().is_ok());
    }

    #[test]
    fn free_amalgam_rejects_non_embeddings() {
        let pt = zoo::edgeless(1);
        let e2 = zoo::edgeless(2);
        let hom = Morphism::verified(&e2, &pt, vec![0, 0], MorphismKind::Hom).unwrap();
        let f2 = Morphism::verified(&e2, &e2, vec![0, 1], MorphismKind::Embedding).unwrap();
        assert!(RelStructure::free_amalgam(&e2, &pt, &e2, &hom, &f2).is_err());
    }

    #[test]
    fn structure_json_round_trip_and_shape() {
        let k3 = zoo::clique(3);
        let json = serde_json::to_string(&k3).unwrap();
        assert!(json.starts_with("{\"signature\":[{\"name\":\"E\",\"arity\":2}],\"size\":3,"));
        let back: RelStructure = serde_json::from_str(&json).unwrap();
        assert_eq!(back, k3);
    }

    #[test]
    fn structure_json_rejects_duplicate_tuple() {
        let json = r#"{"signature":[{"name":"E","arity":2}],"size":2,
                       "relations":{"E":[[0,1],[0,1]]}}"#;
        assert!(serde_json::from_str::<RelStructure>(json).is_err());
    }
}
