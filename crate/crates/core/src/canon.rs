//! Isomorphism-class codes via a minimal encoding over all carrier
//! permutations.

use serde::{Deserialize, Serialize};

use crate::config::Caps;
use crate::error::{Error, Result};
use crate::structure::RelStructure;

/// A total-order-comparable encoding of an isomorphism class: equal codes iff
/// isomorphic (for structures over the same signature).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CanonicalCode(pub Vec<u8>);

fn encode(s: &RelStructure) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&(s.signature.len() as u32).to_be_bytes());
    for decl in s.signature.symbols() {
        out.extend_from_slice(&(decl.name.len() as u32).to_be_bytes());
        out.extend_from_slice(decl.name.as_bytes());
        out.extend_from_slice(&(decl.arity as u32).to_be_bytes());
    }
    out.extend_from_slice(&(s.size as u32).to_be_bytes());
    for rel in &s.relations {
        out.extend_from_slice(&(rel.len() as u32).to_be_bytes());
        for t in rel {
            for &v in t {
                out.extend_from_slice(&(v as u32).to_be_bytes());
            }
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![];
    let mut perm: Vec<usize> = (0..n).collect();
    // Heap's algorithm
    fn heap(k: usize, perm: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(perm.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, perm, out);
            if k % 2 == 0 {
                perm.swap(i, k - 1);
            } else {
                perm.swap(0, k - 1);
            }
        }
    }
    heap(n, &mut perm, &mut out);
    out
}

/// Minimal encoding over all carrier permutations of a fixed injective
/// encoding of the relation tables. Deterministic.
pub fn canonical_form(s: &RelStructure, caps: &Caps) -> Result<CanonicalCode> {
    if s.size > caps.canonical_cap {
        return Err(Error::CanonicalCap { got: s.size, cap: caps.canonical_cap });
    }
    let mut best: Option<Vec<u8>> = None;
    for perm in permutations(s.size) {
        let code = encode(&s.apply_permutation(&perm));
        match &best {
            Some(b) if *b <= code => {}
            _ => best = Some(code),
        }
    }
    Ok(CanonicalCode(best.unwrap_or_else(|| encode(s))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morphism::find_isomorphism;
    use crate::structure::{zoo, RelStructure, Signature};

    fn caps() -> Caps {
        Caps::default()
    }

    #[test]
    fn swapped_edge_has_same_code() {
        let k2 = zoo::clique(2);
        let swapped = k2.apply_permutation(&[1, 0]);
        assert_eq!(
            canonical_form(&k2, &caps()).unwrap(),
            canonical_form(&swapped, &caps()).unwrap()
        );
    }

    #[test]
    fn triangle_differs_from_path() {
        assert_ne!(
            canonical_form(&zoo::clique(3), &caps()).unwrap(),
            canonical_form(&zoo::path(3), &caps()).unwrap()
        );
    }

    #[test]
    fn empty_structure_is_a_fixed_constant() {
        let e = RelStructure::empty(Signature::graph(), 0);
        let a = canonical_form(&e, &caps()).unwrap();
        let b = canonical_form(&e, &caps()).unwrap();
        assert_eq!(a, b);
        assert!(!a.0.is_empty());
    }

    #[test]
    fn cap_is_enforced() {
        let e = zoo::edgeless(9);
        let mut c = caps();
        c.canonical_cap = 8;
        assert!(matches!(
            canonical_form(&e, &c),
            Err(Error::CanonicalCap { got: 9, cap: 8 })
        ));
    }

    /// Equal codes iff isomorphic, exhaustively on all graphs up to size 3
    /// (raw enumeration, cross-checked against isomorphism search).
    #[test]
    fn codes_agree_with_isomorphism_search() {
        let mut all = vec![];
        for size in 0..=3usize {
            let slots: Vec<(usize, usize)> = (0..size)
                .flat_map(|i| (0..size).map(move |j| (i, j)))
                .collect();
            for mask in 0..(1u64 << slots.len()) {
                let mut s = RelStructure::empty(Signature::graph(), size);
                for (b, &(i, j)) in slots.iter().enumerate() {
                    if mask & (1 << b) != 0 {
                        s.add_tuple(0, vec![i, j]);
                    }
                }
                all.push(s);
            }
        }
        let codes: Vec<_> = all
            .iter()
            .map(|s| canonical_form(s, &caps()).unwrap())
            .collect();
        for i in 0..all.len() {
            for j in 0..all.len() {
                let iso = find_isomorphism(&all[i], &all[j], &caps()).unwrap().is_some();
                assert_eq!(codes[i] == codes[j], iso, "{} vs {}", all[i], all[j]);
            }
        }
    }
}
