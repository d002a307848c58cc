//! Complete backtracking search for homomorphisms, embeddings, and
//! isomorphisms.
//!
//! Variable ordering is most-constrained-vertex first (smallest live domain,
//! ties by index); value ordering is ascending target index. Both are fixed,
//! so the morphism returned by a `find_*` call is reproducible. Enumeration
//! uses plain index order, which yields maps in lexicographic order directly.

use crate::config::Caps;
use crate::error::{Error, Result};
use crate::morphism::{Morphism, MorphismKind};
use crate::structure::RelStructure;

/// Search state: a partial function from the source carrier to the target
/// carrier.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PartialMap {
    pub assignments: Vec<(usize, usize)>,
}

impl PartialMap {
    pub fn empty() -> PartialMap {
        PartialMap { assignments: vec![] }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, usize)>) -> PartialMap {
        PartialMap { assignments: pairs.into_iter().collect() }
    }

    pub fn identity_on(n: usize) -> PartialMap {
        PartialMap { assignments: (0..n).map(|v| (v, v)).collect() }
    }
}

struct Engine<'a> {
    source: &'a RelStructure,
    target: &'a RelStructure,
    kind: MorphismKind,
    /// domains[x][t]: is target vertex t still a candidate image for x
    domains: Vec<Vec<bool>>,
    counts: Vec<usize>,
    assigned: Vec<Option<usize>>,
    /// inverse of the current partial assignment (injective kinds only)
    used: Vec<Option<usize>>,
    /// source tuples grouped by participating vertex: (symbol, tuple)
    tuples_by_vertex: Vec<Vec<(usize, Vec<usize>)>>,
    /// removal trail for backtracking: (x, t) pairs
    trail: Vec<(usize, usize)>,
}

impl<'a> Engine<'a> {
    fn new(
        source: &'a RelStructure,
        target: &'a RelStructure,
        kind: MorphismKind,
    ) -> Result<Engine<'a>> {
        if source.signature != target.signature {
            return Err(Error::SignatureMismatch("search endpoints".into()));
        }
        let mut tuples_by_vertex = vec![vec![]; source.size];
        for (sym, rel) in source.relations.iter().enumerate() {
            for t in rel {
                let mut seen = vec![];
                for &v in t {
                    if !seen.contains(&v) {
                        seen.push(v);
                        tuples_by_vertex[v].push((sym, t.clone()));
                    }
                }
            }
        }
        let n = source.size;
        let m = target.size;
        Ok(Engine {
            source,
            target,
            kind,
            domains: vec![vec![true; m]; n],
            counts: vec![m; n],
            assigned: vec![None; n],
            used: vec![None; m],
            tuples_by_vertex,
            trail: vec![],
        })
    }

    fn injective(&self) -> bool {
        self.kind != MorphismKind::Hom
    }

    fn remove(&mut self, x: usize, t: usize) {
        if self.domains[x][t] {
            self.domains[x][t] = false;
            self.counts[x] -= 1;
            self.trail.push((x, t));
        }
    }

    /// One pass of generalized arc consistency to a fixpoint. Sound: only
    /// removes values with no support.
    fn arc_consistency(&mut self) -> bool {
        let mut changed = true;
        while changed {
            changed = false;
            for (sym, rel) in self.source.relations.iter().enumerate() {
                let target_rel: Vec<&Vec<usize>> = self.target.relations[sym].iter().collect();
                for t in rel {
                    for (p, &x) in t.iter().enumerate() {
                        if self.assigned[x].is_some() {
                            continue;
                        }
                        let mut removals = vec![];
                        for cand in 0..self.target.size {
                            if !self.domains[x][cand] {
                                continue;
                            }
                            let supported = target_rel.iter().any(|u| {
                                u[p] == cand
                                    && t.iter().zip(u.iter()).all(|(&sv, &tv)| {
                                        if sv == x {
                                            tv == cand
                                        } else {
                                            match self.assigned[sv] {
                                                Some(a) => tv == a,
                                                None => self.domains[sv][tv],
                                            }
                                        }
                                    })
                            });
                            if !supported {
                                removals.push(cand);
                            }
                        }
                        for cand in removals {
                            self.remove(x, cand);
                            changed = true;
                            if self.counts[x] == 0 {
                                return false;
                            }
                        }
                    }
                }
            }
        }
        true
    }

    /// Check local consistency after assigning x := t; returns false on a
    /// violated constraint.
    fn consistent_after(&self, x: usize) -> bool {
        let map = |v: usize| self.assigned[v];
        for (sym, t) in &self.tuples_by_vertex[x] {
            if let Some(image) = t.iter().map(|&v| map(v)).collect::<Option<Vec<usize>>>() {
                if !self.target.has_tuple(*sym, &image) {
                    return false;
                }
            }
        }
        if self.injective() {
            // reflection: any fully-imaged target tuple touching t must pull
            // back to a source tuple
            let t = self.assigned[x].unwrap();
            for (sym, rel) in self.target.relations.iter().enumerate() {
                for u in rel {
                    if !u.contains(&t) {
                        continue;
                    }
                    if let Some(pre) =
                        u.iter().map(|&w| self.used[w]).collect::<Option<Vec<usize>>>()
                    {
                        if !self.source.has_tuple(sym, &pre) {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    fn assign(&mut self, x: usize, t: usize) -> bool {
        self.assigned[x] = Some(t);
        if self.injective() {
            self.used[t] = Some(x);
        }
        if !self.consistent_after(x) {
            return false;
        }
        // forward checking: prune unassigned neighbors through shared tuples
        let mark = self.trail.len();
        let _ = mark;
        if self.injective() {
            for y in 0..self.source.size {
                if y != x && self.assigned[y].is_none() {
                    self.remove(y, t);
                    if self.counts[y] == 0 {
                        return false;
                    }
                }
            }
        }
        for (sym, tuple) in self.tuples_by_vertex[x].clone() {
            let unassigned: Vec<usize> = tuple
                .iter()
                .copied()
                .filter(|&v| self.assigned[v].is_none())
                .collect();
            let mut distinct = unassigned.clone();
            distinct.dedup();
            distinct.sort_unstable();
            distinct.dedup();
            if distinct.len() != 1 {
                continue;
            }
            let y = distinct[0];
            let mut removals = vec![];
            for cand in 0..self.target.size {
                if !self.domains[y][cand] {
                    continue;
                }
                let image: Vec<usize> = tuple
                    .iter()
                    .map(|&v| if v == y { cand } else { self.assigned[v].unwrap() })
                    .collect();
                if !self.target.has_tuple(sym, &image) {
                    removals.push(cand);
                }
            }
            for cand in removals {
                self.remove(y, cand);
                if self.counts[y] == 0 {
                    return false;
                }
            }
        }
        true
    }

    fn unassign(&mut self, x: usize, t: usize, mark: usize) {
        while self.trail.len() > mark {
            let (y, v) = self.trail.pop().unwrap();
            self.domains[y][v] = true;
            self.counts[y] += 1;
        }
        self.assigned[x] = None;
        if self.injective() {
            self.used[t] = None;
        }
    }

    fn pick_variable(&self) -> Option<usize> {
        (0..self.source.size)
            .filter(|&x| self.assigned[x].is_none())
            .min_by_key(|&x| (self.counts[x], x))
    }

    /// Complete DFS. `on_found` returns true to stop the search.
    fn solve(&mut self, lex_order: bool, on_found: &mut dyn FnMut(Vec<usize>) -> bool) -> bool {
        let var = if lex_order {
            (0..self.source.size).find(|&x| self.assigned[x].is_none())
        } else {
            self.pick_variable()
        };
        let x = match var {
            Some(x) => x,
            None => {
                if self.kind == MorphismKind::Iso
                    && self.used.iter().any(|u| u.is_none())
                {
                    return false;
                }
                let map: Vec<usize> = self.assigned.iter().map(|a| a.unwrap()).collect();
                return on_found(map);
            }
        };
        for t in 0..self.target.size {
            if !self.domains[x][t] {
                continue;
            }
            if self.injective() && self.used[t].is_some() {
                continue;
            }
            let mark = self.trail.len();
            if self.assign(x, t) && self.solve(lex_order, on_found) {
                return true;
            }
            self.unassign(x, t, mark);
        }
        false
    }

    /// Installs the seed. `Ok(false)` means no morphism of this kind extends
    /// the seed (injectivity clash or relation violation); hard errors are
    /// reserved for malformed seeds.
    fn apply_seed(&mut self, seed: &PartialMap) -> Result<bool> {
        for &(x, t) in &seed.assignments {
            if x >= self.source.size {
                return Err(Error::InconsistentSeed(format!(
                    "seed vertex {x} outside source carrier"
                )));
            }
            if t >= self.target.size {
                return Err(Error::InconsistentSeed(format!(
                    "seed image {t} outside target carrier"
                )));
            }
            if let Some(prev) = self.assigned[x] {
                if prev != t {
                    return Err(Error::InconsistentSeed(format!(
                        "vertex {x} seeded to both {prev} and {t}"
                    )));
                }
                continue;
            }
            if self.injective() && self.used[t].is_some() {
                return Ok(false);
            }
            if !self.assign(x, t) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn restrict(&mut self, allowed: &dyn Fn(usize, usize) -> bool) {
        for x in 0..self.source.size {
            if self.assigned[x].is_some() {
                continue;
            }
            for t in 0..self.target.size {
                if self.domains[x][t] && !allowed(x, t) {
                    self.remove(x, t);
                }
            }
        }
    }
}

/// The general entry point: first morphism of the requested kind extending
/// `seed`, with image candidates optionally restricted per vertex.
pub fn find_morphism(
    source: &RelStructure,
    target: &RelStructure,
    kind: MorphismKind,
    seed: &PartialMap,
    restrict: Option<&dyn Fn(usize, usize) -> bool>,
) -> Result<Option<Morphism>> {
    if kind == MorphismKind::Iso && source.size != target.size {
        return Ok(None);
    }
    if kind != MorphismKind::Hom && source.size > target.size {
        return Ok(None);
    }
    let mut engine = Engine::new(source, target, kind)?;
    if !engine.apply_seed(seed)? {
        return Ok(None);
    }
    if let Some(f) = restrict {
        engine.restrict(f);
    }
    if !engine.arc_consistency() {
        return Ok(None);
    }
    let mut found = None;
    engine.solve(false, &mut |map| {
        found = Some(map);
        true
    });
    match found {
        Some(map) => Ok(Some(Morphism::verified(source, target, map, kind)?)),
        None => Ok(None),
    }
}

pub fn find_homomorphism(
    source: &RelStructure,
    target: &RelStructure,
    seed: &PartialMap,
) -> Result<Option<Morphism>> {
    find_morphism(source, target, MorphismKind::Hom, seed, None)
}

pub fn find_embedding(
    source: &RelStructure,
    target: &RelStructure,
    _caps: &Caps,
) -> Result<Option<Morphism>> {
    find_morphism(source, target, MorphismKind::Embedding, &PartialMap::empty(), None)
}

pub fn find_isomorphism(
    source: &RelStructure,
    target: &RelStructure,
    _caps: &Caps,
) -> Result<Option<Morphism>> {
    find_morphism(source, target, MorphismKind::Iso, &PartialMap::empty(), None)
}

/// All morphisms of the given kind, in lexicographic map order. `limit`
/// bounds the number returned; `None` means exhaustive (subject to the
/// enumeration cap).
pub fn enumerate_morphisms(
    source: &RelStructure,
    target: &RelStructure,
    kind: MorphismKind,
    caps: &Caps,
    limit: Option<usize>,
) -> Result<Vec<Morphism>> {
    if limit.is_none() {
        let space = (target.size as u64).checked_pow(source.size as u32);
        match space {
            Some(s) if s <= caps.enumeration_cap => {}
            _ if source.size == 0 => {}
            _ => {
                return Err(Error::EnumerationCap {
                    got: space.unwrap_or(u64::MAX),
                    cap: caps.enumeration_cap,
                })
            }
        }
    }
    if kind == MorphismKind::Iso && source.size != target.size {
        return Ok(vec![]);
    }
    if kind != MorphismKind::Hom && source.size > target.size {
        return Ok(vec![]);
    }
    let mut engine = Engine::new(source, target, kind)?;
    if !engine.arc_consistency() {
        return Ok(vec![]);
    }
    let mut out = vec![];
    engine.solve(true, &mut |map| {
        out.push(map);
        limit.is_some_and(|l| out.len() >= l)
    });
    out.into_iter()
        .map(|map| Morphism::verified(source, target, map, kind))
        .collect()
}

pub fn enumerate_homomorphisms(
    source: &RelStructure,
    target: &RelStructure,
    caps: &Caps,
) -> Result<Vec<Morphism>> {
    enumerate_morphisms(source, target, MorphismKind::Hom, caps, None)
}

/// A homomorphism `s` with `r ∘ s = 1` on `r`'s target, found by complete
/// search over the fibers of `r`.
pub fn find_section(r: &Morphism) -> Result<Option<Morphism>> {
    let fiber_ok = |x: usize, t: usize| r.map[t] == x;
    find_morphism(&r.target, &r.source, MorphismKind::Hom, &PartialMap::empty(), Some(&fiber_ok))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::zoo;

    fn caps() -> Caps {
        Caps::default()
    }

    /// Brute-force oracle, independent of the search path: sweep all
    /// |target|^|source| raw maps.
    pub(crate) fn brute_force_morphisms(
        source: &RelStructure,
        target: &RelStructure,
        kind: MorphismKind,
    ) -> Vec<Vec<usize>> {
        let n = source.size;
        let m = target.size;
        let mut out = vec![];
        let total = (m as u64).checked_pow(n as u32).unwrap_or(0);
        if n == 0 {
            let empty = Morphism {
                source: source.clone(),
                target: target.clone(),
                map: vec![],
                kind,
            };
            if empty.verify().is_ok() {
                out.push(vec![]);
            }
            return out;
        }
        for code in 0..total {
            let mut map = vec![0usize; n];
            let mut rest = code;
            for i in (0..n).rev() {
                map[i] = (rest % m as u64) as usize;
                rest /= m as u64;
            }
            let cand = Morphism {
                source: source.clone(),
                target: target.clone(),
                map: map.clone(),
                kind,
            };
            if cand.verify().is_ok() {
                out.push(map);
            }
        }
        out.sort();
        out
    }

    #[test]
    fn k3_into_k2_has_no_homomorphism() {
        let found = find_homomorphism(&zoo::clique(3), &zoo::clique(2), &PartialMap::empty())
            .unwrap();
        assert!(found.is_none());
    }

    #[test]
    fn k2_into_k3_hom_count_matches_brute_force() {
        let homs =
            enumerate_homomorphisms(&zoo::clique(2), &zoo::clique(3), &caps()).unwrap();
        assert_eq!(homs.len(), 6);
        let oracle =
            brute_force_morphisms(&zoo::clique(2), &zoo::clique(3), MorphismKind::Hom);
        assert_eq!(
            homs.iter().map(|m| m.map.clone()).collect::<Vec<_>>(),
            oracle
        );
    }

    #[test]
    fn identity_seed_returns_identity() {
        let a = zoo::path(3);
        let m = find_homomorphism(&a, &a, &PartialMap::identity_on(a.size))
            .unwrap()
            .unwrap();
        assert_eq!(m.map, vec![0, 1, 2]);
    }

    #[test]
    fn single_vertex_into_k3() {
        let homs =
            enumerate_homomorphisms(&zoo::edgeless(1), &zoo::clique(3), &caps()).unwrap();
        assert_eq!(homs.len(), 3);
    }

    #[test]
    fn k3_to_k2_enumeration_is_empty() {
        let homs =
            enumerate_homomorphisms(&zoo::clique(3), &zoo::clique(2), &caps()).unwrap();
        assert!(homs.is_empty());
    }

    #[test]
    fn embedding_exists_and_reflects() {
        assert!(find_embedding(&zoo::clique(2), &zoo::clique(3), &caps())
            .unwrap()
            .is_some());
        // two isolated vertices do not embed into an edge
        assert!(find_embedding(&zoo::edgeless(2), &zoo::clique(2), &caps())
            .unwrap()
            .is_none());
    }

    #[test]
    fn path_relabeled_is_isomorphic() {
        let p = zoo::path(3);
        // path 2-1-0: same structure under the reversal permutation
        let q = p.apply_permutation(&[2, 1, 0]);
        let iso = find_isomorphism(&p, &q, &caps()).unwrap().unwrap();
        assert!(iso.verify().is_ok());
        let oracle = brute_force_morphisms(&p, &q, MorphismKind::Iso);
        assert!(!oracle.is_empty());
    }

    #[test]
    fn relation_violating_seed_finds_nothing() {
        // collapsing an edge of K_2 onto one vertex extends to no hom
        let found = find_homomorphism(
            &zoo::clique(2),
            &zoo::clique(2),
            &PartialMap::from_pairs([(0, 0), (1, 0)]),
        )
        .unwrap();
        assert!(found.is_none());
    }

    #[test]
    fn malformed_seed_is_reported() {
        let err = find_homomorphism(
            &zoo::clique(2),
            &zoo::clique(2),
            &PartialMap::from_pairs([(0, 5)]),
        );
        assert!(matches!(err, Err(Error::InconsistentSeed(_))));
    }

    #[test]
    fn section_of_projection_with_full_row_vertex() {
        // B = single vertex with a loop: A x B ~ A, projection onto A has the
        // obvious section
        let a = zoo::path(3);
        let mut b = RelStructure::empty(a.signature.clone(), 1);
        b.add_tuple(0, vec![0, 0]);
        let p = a.direct_product(&b, &caps()).unwrap();
        let (p1, _) = RelStructure::product_projections(a.size, b.size);
        let r = Morphism::verified(&p, &a, p1, MorphismKind::Hom).unwrap();
        let s = find_section(&r).unwrap().unwrap();
        assert_eq!(
            crate::morphism::is_retraction_pair(&r, &s).unwrap(),
            Ok(())
        );
    }

    #[test]
    fn non_surjective_map_has_no_section() {
        let e2 = zoo::edgeless(2);
        let pt = zoo::edgeless(1);
        let r = Morphism::verified(&pt, &e2, vec![0], MorphismKind::Hom).unwrap();
        assert!(find_section(&r).unwrap().is_none());
    }

    #[test]
    fn section_of_identity_is_identity() {
        let a = zoo::path(3);
        let id = Morphism::identity(&a);
        let s = find_section(&id).unwrap().unwrap();
        assert_eq!(s.map, vec![0, 1, 2]);
    }

    #[test]
    fn completeness_on_small_pairs() {
        // all graphs on <= 2 vertices, raw (not up to iso)
        let mut all = vec![];
        for size in 0..=2usize {
            let slots: Vec<(usize, usize)> = (0..size)
                .flat_map(|i| (0..size).map(move |j| (i, j)))
                .collect();
            for mask in 0..(1u32 << slots.len()) {
                let mut s = RelStructure::empty(crate::structure::Signature::graph(), size);
                for (b, &(i, j)) in slots.iter().enumerate() {
                    if mask & (1 << b) != 0 {
                        s.add_tuple(0, vec![i, j]);
                    }
                }
                all.push(s);
            }
        }
        for a in &all {
            for b in &all {
                for kind in [MorphismKind::Hom, MorphismKind::Embedding, MorphismKind::Iso] {
                    let oracle = brute_force_morphisms(a, b, kind);
                    let found =
                        enumerate_morphisms(a, b, kind, &caps(), None).unwrap();
                    assert_eq!(
                        found.iter().map(|m| m.map.clone()).collect::<Vec<_>>(),
                        oracle,
                        "mismatch for {a} -> {b} ({kind:?})"
                    );
                    let first = find_morphism(a, b, kind, &PartialMap::empty(), None).unwrap();
                    assert_eq!(first.is_some(), !oracle.is_empty());
                }
            }
        }
    }
}
