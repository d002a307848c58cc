//! Anchored amalgam search.
//!
//! Given a member `base` (kept as a carrier prefix, so the first leg of the
//! amalgam is the identity inclusion), a `pattern` structure with some of its
//! vertices anchored to vertices of `base`, enumerate member extensions of
//! `base` into which the pattern embeds over the anchor. Unanchored pattern
//! vertices are placed one at a time, either identified with an existing
//! vertex or realized by a one-point member extension, so every candidate is
//! a member by construction and is jointly covered by the two legs.
//!
//! An optional coloring constraint threads a homomorphism into a fixed
//! target through the search, which is what the comma-category builders use.

use crate::age::AgeSpec;
use crate::config::Caps;
use crate::error::Result;
use crate::morphism::MorphismKind;
use crate::structure::RelStructure;

/// A solved amalgam instance: `g1` is the inclusion of the base prefix,
/// `g2` embeds the pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Amalgam {
    pub c: RelStructure,
    pub g2: Vec<usize>,
    /// Extended coloring of `c`, present when the search was colored.
    pub coloring: Option<Vec<usize>>,
}

/// Coloring constraint: base and pattern colorings into a common target,
/// assumed to agree over the anchor.
#[derive(Debug, Clone, Copy)]
pub struct ColorConstraint<'a> {
    pub base_color: &'a [usize],
    pub pattern_color: &'a [usize],
    pub target: &'a RelStructure,
}

pub struct AmalgamSearch<'a> {
    pub spec: &'a AgeSpec,
    pub caps: &'a Caps,
    pub base: &'a RelStructure,
    pub pattern: &'a RelStructure,
    /// Pairs (pattern vertex, base vertex).
    pub anchored: &'a [(usize, usize)],
    /// Allow unanchored pattern vertices to be identified with existing
    /// vertices instead of always adding fresh ones.
    pub allow_identify: bool,
    /// `Embedding` keeps the pattern leg injective and tuple-exact;
    /// `Hom` only preserves tuples forward and may collapse vertices.
    pub pattern_kind: MorphismKind,
    pub color: Option<ColorConstraint<'a>>,
}

struct Dfs<'a> {
    req: &'a AmalgamSearch<'a>,
    /// pattern vertex -> c vertex
    g2: Vec<Option<usize>>,
    /// unanchored pattern vertices in ascending order
    todo: Vec<usize>,
}

impl<'a> Dfs<'a> {
    /// Compatibility of placing pattern vertex `b` at `c` vertex `w`:
    /// forward tuple preservation always, plus tuple reflection on the image
    /// when the pattern leg is an embedding. Checked incrementally.
    fn exact_at(&self, c: &RelStructure, inverse: &[Option<usize>], b: usize, w: usize) -> bool {
        let pat = self.req.pattern;
        let placed = |v: usize| -> Option<usize> {
            if v == b {
                Some(w)
            } else {
                self.g2[v]
            }
        };
        for (sym, rel) in pat.relations.iter().enumerate() {
            for t in rel {
                if !t.contains(&b) {
                    continue;
                }
                if let Some(image) = t.iter().map(|&v| placed(v)).collect::<Option<Vec<_>>>() {
                    if !c.has_tuple(sym, &image) {
                        return false;
                    }
                }
            }
        }
        if self.req.pattern_kind != MorphismKind::Embedding {
            return true;
        }
        let inv = |v: usize| -> Option<usize> {
            if v == w {
                Some(b)
            } else {
                inverse[v]
            }
        };
        for (sym, rel) in c.relations.iter().enumerate() {
            for t in rel {
                if !t.contains(&w) {
                    continue;
                }
                if let Some(pre) = t.iter().map(|&v| inv(v)).collect::<Option<Vec<_>>>() {
                    if !pat.has_tuple(sym, &pre) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Tuples added by a one-point extension must respect the coloring.
    fn extension_color_ok(&self, ext: &RelStructure, colors: &[usize], new_color: usize) -> bool {
        let Some(cc) = &self.req.color else { return true };
        let n = ext.size - 1;
        let color_of = |v: usize| if v == n { new_color } else { colors[v] };
        for (sym, rel) in ext.relations.iter().enumerate() {
            for t in rel {
                if !t.contains(&n) {
                    continue;
                }
                let image: Vec<usize> = t.iter().map(|&v| color_of(v)).collect();
                if !cc.target.has_tuple(sym, &image) {
                    return false;
                }
            }
        }
        true
    }

    fn run(
        &mut self,
        c: RelStructure,
        inverse: Vec<Option<usize>>,
        colors: Vec<usize>,
        depth: usize,
        on_found: &mut dyn FnMut(Amalgam) -> bool,
    ) -> Result<bool> {
        if depth == self.todo.len() {
            let g2: Vec<usize> = self.g2.iter().map(|v| v.unwrap()).collect();
            let coloring = self.req.color.map(|_| colors.clone());
            return Ok(on_found(Amalgam { c, g2, coloring }));
        }
        let b = self.todo[depth];
        let b_color = self.req.color.map(|cc| cc.pattern_color[b]);
        let injective = self.req.pattern_kind == MorphismKind::Embedding;
        if self.req.allow_identify {
            for w in 0..c.size {
                if injective && inverse[w].is_some() {
                    continue;
                }
                if let Some(bc) = b_color {
                    if colors[w] != bc {
                        continue;
                    }
                }
                if !self.exact_at(&c, &inverse, b, w) {
                    continue;
                }
                self.g2[b] = Some(w);
                let mut inv = inverse.clone();
                if injective {
                    inv[w] = Some(b);
                }
                if self.run(c.clone(), inv, colors.clone(), depth + 1, on_found)? {
                    return Ok(true);
                }
                self.g2[b] = None;
            }
        }
        if c.size + 1 <= self.req.caps.carrier_cap {
            for ext in self.req.spec.one_point_extensions(&c, self.req.caps)? {
                let w = c.size;
                if !self.exact_at(&ext, &inverse, b, w) {
                    continue;
                }
                if let Some(bc) = b_color {
                    if !self.extension_color_ok(&ext, &colors, bc) {
                        continue;
                    }
                }
                self.g2[b] = Some(w);
                let mut inv = inverse.clone();
                inv.push(Some(b));
                let mut cols = colors.clone();
                if let Some(bc) = b_color {
                    cols.push(bc);
                }
                if self.run(ext, inv, cols, depth + 1, on_found)? {
                    return Ok(true);
                }
                self.g2[b] = None;
            }
        }
        Ok(false)
    }
}

impl<'a> AmalgamSearch<'a> {
    /// Run the search; `on_found` returns true to stop. Returns whether the
    /// search was stopped by a yield.
    pub fn for_each(&self, on_found: &mut dyn FnMut(Amalgam) -> bool) -> Result<bool> {
        let mut g2 = vec![None; self.pattern.size];
        let mut inverse = vec![None; self.base.size];
        for &(b, w) in self.anchored {
            g2[b] = Some(w);
            inverse[w] = Some(b);
        }
        let todo: Vec<usize> =
            (0..self.pattern.size).filter(|v| g2[*v].is_none()).collect();
        let colors = match self.color {
            Some(cc) => cc.base_color.to_vec(),
            None => vec![],
        };
        let mut dfs = Dfs { req: self, g2, todo };
        dfs.run(self.base.clone(), inverse, colors, 0, on_found)
    }

    /// First solution in the fixed search order.
    pub fn first(&self) -> Result<Option<Amalgam>> {
        let mut found = None;
        self.for_each(&mut |a| {
            found = Some(a);
            true
        })?;
        Ok(found)
    }

    /// The free amalgam (all unanchored vertices fresh, no tuples beyond the
    /// images), if it is a member and color-compatible.
    pub fn free_candidate(&self) -> Result<Option<Amalgam>> {
        let mut c = self.base.clone();
        let mut g2 = vec![None; self.pattern.size];
        for &(b, w) in self.anchored {
            g2[b] = Some(w);
        }
        let mut colors = match self.color {
            Some(cc) => cc.base_color.to_vec(),
            None => vec![],
        };
        for b in 0..self.pattern.size {
            if g2[b].is_none() {
                g2[b] = Some(c.size);
                c.size += 1;
                if let Some(cc) = self.color {
                    colors.push(cc.pattern_color[b]);
                }
            }
        }
        let g2: Vec<usize> = g2.into_iter().map(|v| v.unwrap()).collect();
        for (sym, rel) in self.pattern.relations.iter().enumerate() {
            for t in rel {
                c.relations[sym].insert(t.iter().map(|&v| g2[v]).collect());
            }
        }
        if c.size > self.caps.carrier_cap {
            return Ok(None);
        }
        if !self.spec.contains(&c, self.caps)? {
            return Ok(None);
        }
        // the base must stay induced: the pattern image may not add tuples
        // entirely inside the base unless they were already there
        for (sym, rel) in c.relations.iter().enumerate() {
            for t in rel {
                if t.iter().all(|&v| v < self.base.size) && !self.base.has_tuple(sym, t) {
                    return Ok(None);
                }
            }
        }
        let coloring = self.color.map(|_| colors);
        Ok(Some(Amalgam { c, g2, coloring }))
    }

    /// Free amalgam first when the class is flagged closed under it, then
    /// the deterministic DFS.
    pub fn find(&self) -> Result<Option<Amalgam>> {
        if self.spec.free_amalgam_closed() {
            if let Some(a) = self.free_candidate()? {
                return Ok(Some(a));
            }
        }
        self.first()
    }
}
