//! Classes of finite structures: forbidden-pattern classes, explicit
//! catalogues, and built-in oracle predicates, with up-to-isomorphism member
//! enumeration.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::canon::canonical_form;
use crate::config::Caps;
use crate::error::{Error, Result};
use crate::search::find_embedding;
use crate::structure::{RelStructure, Signature};

/// Built-in membership predicates. All of these classes are hereditary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Oracle {
    /// Loopless graphs with symmetric edge sets.
    SimpleGraphs,
    /// Simple graphs with no triangle.
    TriangleFreeGraphs,
    /// Irreflexive transitive binary relations.
    StrictPosets,
    /// Strict posets that are total.
    Chains,
    /// Loopless digraphs.
    SimpleDigraphs,
    /// Loopless digraphs with no directed cycle.
    Dags,
}

impl Oracle {
    pub fn from_name(name: &str) -> Option<Oracle> {
        match name {
            "simple_graphs" => Some(Oracle::SimpleGraphs),
            "triangle_free_graphs" => Some(Oracle::TriangleFreeGraphs),
            "strict_posets" => Some(Oracle::StrictPosets),
            "chains" => Some(Oracle::Chains),
            "simple_digraphs" => Some(Oracle::SimpleDigraphs),
            "dags" => Some(Oracle::Dags),
            _ => None,
        }
    }

    pub fn signature(&self) -> Signature {
        match self {
            Oracle::StrictPosets | Oracle::Chains => Signature::order(),
            _ => Signature::graph(),
        }
    }

    fn accepts(&self, s: &RelStructure) -> bool {
        let rel = &s.relations[0];
        let irreflexive = rel.iter().all(|t| t[0] != t[1]);
        match self {
            Oracle::SimpleGraphs => {
                irreflexive && rel.iter().all(|t| rel.contains(&vec![t[1], t[0]]))
            }
            Oracle::TriangleFreeGraphs => {
                Oracle::SimpleGraphs.accepts(s)
                    && !(0..s.size).any(|a| {
                        (a + 1..s.size).any(|b| {
                            rel.contains(&vec![a, b])
                                && (b + 1..s.size).any(|c| {
                                    rel.contains(&vec![a, c]) && rel.contains(&vec![b, c])
                                })
                        })
                    })
            }
            Oracle::StrictPosets => {
                irreflexive
                    && rel.iter().all(|t| {
                        rel.iter()
                            .filter(|u| u[0] == t[1])
                            .all(|u| rel.contains(&vec![t[0], u[1]]))
                    })
            }
            Oracle::Chains => {
                Oracle::StrictPosets.accepts(s)
                    && (0..s.size).all(|a| {
                        (a + 1..s.size).all(|b| {
                            rel.contains(&vec![a, b]) || rel.contains(&vec![b, a])
                        })
                    })
            }
            Oracle::SimpleDigraphs => irreflexive,
            Oracle::Dags => irreflexive && !has_directed_cycle(s),
        }
    }
}

fn has_directed_cycle(s: &RelStructure) -> bool {
    // DFS coloring
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        White,
        Grey,
        Black,
    }
    let mut marks = vec![Mark::White; s.size];
    fn visit(v: usize, s: &RelStructure, marks: &mut Vec<Mark>) -> bool {
        marks[v] = Mark::Grey;
        for t in &s.relations[0] {
            if t[0] == v {
                match marks[t[1]] {
                    Mark::Grey => return true,
                    Mark::White => {
                        if visit(t[1], s, marks) {
                            return true;
                        }
                    }
                    Mark::Black => {}
                }
            }
        }
        marks[v] = Mark::Black;
        false
    }
    (0..s.size).any(|v| marks[v] == Mark::White && visit(v, s, &mut marks))
}

/// Reachability matrix over the single binary relation.
fn reachable(s: &RelStructure) -> Vec<Vec<bool>> {
    let n = s.size;
    let mut r = vec![vec![false; n]; n];
    for t in &s.relations[0] {
        r[t[0]][t[1]] = true;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if r[i][k] && r[k][j] {
                    r[i][j] = true;
                }
            }
        }
    }
    r
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgeMode {
    /// Members are the structures embedding none of the listed patterns.
    Forbidden(Vec<RelStructure>),
    /// Members are exactly the isomorphism classes listed.
    Catalogue(Vec<RelStructure>),
    Oracle(Oracle),
}

/// Tri-state closure flags. `None` means unknown.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgeFlags {
    #[serde(default)]
    pub closed_under_free_amalgam: Option<bool>,
    #[serde(default)]
    pub closed_under_products: Option<bool>,
}

/// A description of a class of finite structures over a fixed signature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgeSpec {
    pub signature: Signature,
    pub mode: AgeMode,
    #[serde(default)]
    pub flags: AgeFlags,
}

impl AgeSpec {
    pub fn oracle(o: Oracle) -> AgeSpec {
        let flags = match o {
            Oracle::SimpleGraphs | Oracle::SimpleDigraphs => AgeFlags {
                closed_under_free_amalgam: Some(true),
                closed_under_products: Some(true),
            },
            Oracle::TriangleFreeGraphs | Oracle::Dags => AgeFlags {
                closed_under_free_amalgam: Some(true),
                closed_under_products: Some(true),
            },
            Oracle::StrictPosets | Oracle::Chains => AgeFlags {
                closed_under_free_amalgam: Some(false),
                closed_under_products: None,
            },
        };
        AgeSpec { signature: o.signature(), mode: AgeMode::Oracle(o), flags }
    }

    pub fn simple_graphs() -> AgeSpec {
        AgeSpec::oracle(Oracle::SimpleGraphs)
    }

    pub fn chains() -> AgeSpec {
        AgeSpec::oracle(Oracle::Chains)
    }

    pub fn strict_posets() -> AgeSpec {
        AgeSpec::oracle(Oracle::StrictPosets)
    }

    pub fn catalogue(members: Vec<RelStructure>) -> Result<AgeSpec> {
        let signature = members
            .first()
            .map(|m| m.signature.clone())
            .ok_or_else(|| Error::Config("catalogue must not be empty".into()))?;
        if members.iter().any(|m| m.signature != signature) {
            return Err(Error::SignatureMismatch("catalogue members".into()));
        }
        Ok(AgeSpec { signature, mode: AgeMode::Catalogue(members), flags: AgeFlags::default() })
    }

    pub fn forbidden(signature: Signature, patterns: Vec<RelStructure>) -> AgeSpec {
        AgeSpec { signature, mode: AgeMode::Forbidden(patterns), flags: AgeFlags::default() }
    }

    pub fn is_hereditary_by_construction(&self) -> bool {
        !matches!(self.mode, AgeMode::Catalogue(_))
    }

    /// Whether the class is closed under free amalgamation: the explicit
    /// flag when set, otherwise what is known for the built-in oracles.
    pub fn free_amalgam_closed(&self) -> bool {
        if let Some(flag) = self.flags.closed_under_free_amalgam {
            return flag;
        }
        matches!(
            self.mode,
            AgeMode::Oracle(
                Oracle::SimpleGraphs
                    | Oracle::TriangleFreeGraphs
                    | Oracle::SimpleDigraphs
                    | Oracle::Dags
            )
        )
    }

    /// Membership test. Isomorphism-invariant by construction for forbidden
    /// and oracle modes and via canonical comparison for catalogues.
    pub fn contains(&self, s: &RelStructure, caps: &Caps) -> Result<bool> {
        if s.signature != self.signature {
            return Ok(false);
        }
        s.validate()?;
        match &self.mode {
            AgeMode::Forbidden(patterns) => {
                for p in patterns {
                    if find_embedding(p, s, caps)?.is_some() {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            AgeMode::Catalogue(members) => {
                for m in members {
                    if m.size == s.size
                        && crate::search::find_isomorphism(m, s, caps)?.is_some()
                    {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            AgeMode::Oracle(o) => Ok(o.accepts(s)),
        }
    }

    /// All member extensions of `s` by one fresh vertex (index `s.size`),
    /// keeping `s` induced on the old carrier. Deterministic order.
    ///
    /// Catalogue classes are not hereditary, so incremental generation is
    /// unsound for them; callers must enumerate the catalogue directly.
    pub fn one_point_extensions(&self, s: &RelStructure, caps: &Caps) -> Result<Vec<RelStructure>> {
        match &self.mode {
            AgeMode::Catalogue(_) => Err(Error::Precondition(
                "one-point extension generation is unsupported for catalogue classes".into(),
            )),
            AgeMode::Oracle(Oracle::SimpleGraphs) => self.graph_extensions(s, caps, |_| true),
            AgeMode::Oracle(Oracle::TriangleFreeGraphs) => {
                let rel = s.relations[0].clone();
                self.graph_extensions(s, caps, move |nbrs: &[usize]| {
                    nbrs.iter().enumerate().all(|(i, &a)| {
                        nbrs[i + 1..].iter().all(|&b| !rel.contains(&vec![a, b]))
                    })
                })
            }
            AgeMode::Oracle(Oracle::Chains) => Ok(chain_insertions(s)),
            AgeMode::Oracle(Oracle::StrictPosets) => Ok(poset_extensions(s)),
            AgeMode::Oracle(Oracle::Dags) => Ok(dag_extensions(s)),
            AgeMode::Oracle(Oracle::SimpleDigraphs) | AgeMode::Forbidden(_) => {
                self.generic_extensions(s, caps)
            }
        }
    }

    fn graph_extensions(
        &self,
        s: &RelStructure,
        caps: &Caps,
        admissible: impl Fn(&[usize]) -> bool,
    ) -> Result<Vec<RelStructure>> {
        let n = s.size;
        // one slot per potential neighbor, 2^n candidates
        if n > caps.extension_slot_cap {
            return Err(Error::ExtensionSlotCap { got: n, cap: caps.extension_slot_cap });
        }
        let mut out = vec![];
        for mask in 0..(1u64 << n) {
            let nbrs: Vec<usize> = (0..n).filter(|&v| mask & (1 << v) != 0).collect();
            if !admissible(&nbrs) {
                continue;
            }
            let mut ext = s.clone();
            ext.size = n + 1;
            for &v in &nbrs {
                ext.add_tuple(0, vec![v, n]);
                ext.add_tuple(0, vec![n, v]);
            }
            out.push(ext);
        }
        Ok(out)
    }

    /// Fallback: enumerate every tuple pattern involving the new vertex and
    /// filter by membership. Exponential in the slot count, hence capped.
    fn generic_extensions(&self, s: &RelStructure, caps: &Caps) -> Result<Vec<RelStructure>> {
        let n = s.size;
        let mut slots: Vec<(usize, Vec<usize>)> = vec![];
        for (sym, decl) in self.signature.symbols().iter().enumerate() {
            // all tuples over {0..n} that mention vertex n
            let mut tuple = vec![0usize; decl.arity];
            loop {
                if tuple.contains(&n) {
                    slots.push((sym, tuple.clone()));
                }
                let mut pos = decl.arity;
                while pos > 0 {
                    tuple[pos - 1] += 1;
                    if tuple[pos - 1] <= n {
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
        if slots.len() > caps.extension_slot_cap {
            return Err(Error::ExtensionSlotCap {
                got: slots.len(),
                cap: caps.extension_slot_cap,
            });
        }
        let mut out = vec![];
        for mask in 0..(1u64 << slots.len()) {
            let mut ext = s.clone();
            ext.size = n + 1;
            for (b, (sym, tuple)) in slots.iter().enumerate() {
                if mask & (1 << b) != 0 {
                    ext.add_tuple(*sym, tuple.clone());
                }
            }
            if self.contains(&ext, caps)? {
                out.push(ext);
            }
        }
        Ok(out)
    }

    /// Exhaustive list of members with sizes `0..=n`, one representative per
    /// isomorphism class, sorted by size then canonical code.
    pub fn enumerate_members(&self, n: usize, caps: &Caps) -> Result<Vec<RelStructure>> {
        if let AgeMode::Catalogue(members) = &self.mode {
            let mut seen = BTreeSet::new();
            let mut out = vec![];
            for m in members {
                if m.size <= n && seen.insert((m.size, canonical_form(m, caps)?)) {
                    out.push(m.clone());
                }
            }
            out.sort_by_key(|m| (m.size, canonical_form(m, caps).unwrap()));
            return Ok(out);
        }
        let empty = RelStructure::empty(self.signature.clone(), 0);
        let mut out: Vec<RelStructure> = vec![];
        let mut frontier = if self.contains(&empty, caps)? { vec![empty] } else { vec![] };
        out.extend(frontier.iter().cloned());
        for _size in 1..=n {
            let mut seen = BTreeSet::new();
            let mut next = vec![];
            for m in &frontier {
                for ext in self.one_point_extensions(m, caps)? {
                    let code = canonical_form(&ext, caps)?;
                    if seen.insert(code) {
                        next.push(ext);
                    }
                }
            }
            next.sort_by_key(|m| canonical_form(m, caps).unwrap());
            out.extend(next.iter().cloned());
            frontier = next;
        }
        Ok(out)
    }
}

fn chain_insertions(s: &RelStructure) -> Vec<RelStructure> {
    // rank by number of elements below
    let n = s.size;
    let below = |v: usize| s.relations[0].iter().filter(|t| t[1] == v).count();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| below(v));
    let mut out = vec![];
    for pos in 0..=n {
        let mut ext = s.clone();
        ext.size = n + 1;
        for (i, &v) in order.iter().enumerate() {
            if i < pos {
                ext.add_tuple(0, vec![v, n]);
            } else {
                ext.add_tuple(0, vec![n, v]);
            }
        }
        out.push(ext);
    }
    out
}

fn poset_extensions(s: &RelStructure) -> Vec<RelStructure> {
    let n = s.size;
    let lt = |a: usize, b: usize| s.relations[0].contains(&vec![a, b]);
    let mut out = vec![];
    for down in 0..(1u64 << n) {
        // down-set: closed under going down
        let in_down = |v: usize| down & (1 << v) != 0;
        if !(0..n).all(|v| !in_down(v) || (0..n).all(|u| !lt(u, v) || in_down(u))) {
            continue;
        }
        let rest: Vec<usize> = (0..n).filter(|&v| !in_down(v)).collect();
        for up_mask in 0..(1u64 << rest.len()) {
            let ups: Vec<usize> = rest
                .iter()
                .enumerate()
                .filter(|(i, _)| up_mask & (1 << i) != 0)
                .map(|(_, &v)| v)
                .collect();
            // up-set closure and cross-transitivity
            let in_up = |v: usize| ups.contains(&v);
            if !(0..n).all(|v| !in_up(v) || (0..n).all(|u| !lt(v, u) || in_up(u))) {
                continue;
            }
            if !(0..n).all(|d| !in_down(d) || ups.iter().all(|&u| lt(d, u))) {
                continue;
            }
            let mut ext = s.clone();
            ext.size = n + 1;
            for v in 0..n {
                if in_down(v) {
                    ext.add_tuple(0, vec![v, n]);
                } else if in_up(v) {
                    ext.add_tuple(0, vec![n, v]);
                }
            }
            out.push(ext);
        }
    }
    out.sort();
    out
}

fn dag_extensions(s: &RelStructure) -> Vec<RelStructure> {
    let n = s.size;
    let reach = reachable(s);
    let mut out = vec![];
    for in_mask in 0..(1u64 << n) {
        // predecessors of the new vertex
        let ins: Vec<usize> = (0..n).filter(|&v| in_mask & (1 << v) != 0).collect();
        // successors must not reach any predecessor
        let allowed: Vec<usize> = (0..n)
            .filter(|&v| !ins.iter().any(|&i| v == i || reach[v][i]))
            .collect();
        for out_mask in 0..(1u64 << allowed.len()) {
            let outs: Vec<usize> = allowed
                .iter()
                .enumerate()
                .filter(|(i, _)| out_mask & (1 << i) != 0)
                .map(|(_, &v)| v)
                .collect();
            let mut ext = s.clone();
            ext.size = n + 1;
            for &v in &ins {
                ext.add_tuple(0, vec![v, n]);
            }
            for &v in &outs {
                ext.add_tuple(0, vec![n, v]);
            }
            out.push(ext);
        }
    }
    out.sort();
    out
}
