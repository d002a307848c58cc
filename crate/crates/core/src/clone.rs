//! Finite clone machinery: operation tables, superposition, complex
//! products, bracket sets, Cayley depth, polymorphism search, and the
//! staged-retraction decomposition of polymorphisms into an endomorphism
//! composed with an iterated pairing embedding.

use std::collections::BTreeSet;

use serde::de::{SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::config::Caps;
use crate::error::{Error, Result};
use crate::morphism::{is_retraction_pair, Morphism, MorphismKind};
use crate::search::enumerate_morphisms;
use crate::structure::RelStructure;

/// A finitary operation on `{0,…,q−1}`, tabulated lexicographically with the
/// first argument most significant.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct OpTable {
    pub q: usize,
    pub arity: usize,
    pub table: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOpTable {
    q: usize,
    arity: usize,
    table: Vec<usize>,
}

impl<'de> Deserialize<'de> for OpTable {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = RawOpTable::deserialize(deserializer)?;
        let op = OpTable { q: raw.q, arity: raw.arity, table: raw.table };
        op.validate().map_err(serde::de::Error::custom)?;
        Ok(op)
    }
}

impl OpTable {
    pub fn new(q: usize, arity: usize, table: Vec<usize>) -> Result<OpTable> {
        let op = OpTable { q, arity, table };
        op.validate()?;
        Ok(op)
    }

    pub fn validate(&self) -> Result<()> {
        let len = self.q.checked_pow(self.arity as u32).ok_or_else(|| {
            Error::ArityMismatch("table length overflows".into())
        })?;
        if self.table.len() != len {
            return Err(Error::ArityMismatch(format!(
                "table has {} entries, expected {}^{} = {}",
                self.table.len(),
                self.q,
                self.arity,
                len
            )));
        }
        if let Some(&bad) = self.table.iter().find(|&&v| v >= self.q) {
            return Err(Error::ArityMismatch(format!(
                "table value {bad} out of range for carrier {}",
                self.q
            )));
        }
        Ok(())
    }

    /// Lexicographic index of an argument tuple, first argument most
    /// significant.
    pub fn index(&self, args: &[usize]) -> usize {
        args.iter().fold(0, |acc, &a| acc * self.q + a)
    }

    pub fn eval(&self, args: &[usize]) -> usize {
        debug_assert_eq!(args.len(), self.arity);
        self.table[self.index(args)]
    }
}

/// The i-th n-ary projection (1-based, `e_i^n`).
pub fn projection(q: usize, n: usize, i: usize) -> Result<OpTable> {
    if i == 0 || i > n {
        return Err(Error::ArityMismatch(format!("projection index {i} out of 1..={n}")));
    }
    let mut table = Vec::with_capacity(q.pow(n as u32));
    let mut args = vec![0usize; n];
    loop {
        table.push(args[i - 1]);
        let mut pos = n;
        loop {
            if pos == 0 {
                return OpTable::new(q, n, table);
            }
            pos -= 1;
            args[pos] += 1;
            if args[pos] < q {
                break;
            }
            args[pos] = 0;
        }
    }
}

/// `f ∘ ⟨g_1,…,g_n⟩`: all `g_j` of one common arity `m`, same carrier.
pub fn superpose(f: &OpTable, gs: &[&OpTable]) -> Result<OpTable> {
    if gs.len() != f.arity {
        return Err(Error::ArityMismatch(format!(
            "head of arity {} applied to {} arguments",
            f.arity,
            gs.len()
        )));
    }
    let m = gs.first().map_or(0, |g| g.arity);
    for g in gs {
        if g.arity != m || g.q != f.q {
            return Err(Error::ArityMismatch(
                "argument operations must share carrier and arity".into(),
            ));
        }
    }
    if f.arity == 0 {
        return Err(Error::ArityMismatch("nullary operations are not modeled".into()));
    }
    let q = f.q;
    let mut table = Vec::with_capacity(q.pow(m as u32));
    let mut args = vec![0usize; m];
    loop {
        let inner: Vec<usize> = gs.iter().map(|g| g.eval(&args)).collect();
        table.push(f.eval(&inner));
        let mut pos = m;
        loop {
            if pos == 0 {
                return OpTable::new(q, m, table);
            }
            pos -= 1;
            args[pos] += 1;
            if args[pos] < q {
                break;
            }
            args[pos] = 0;
        }
    }
}

/// A deduplicated set of operations on a common carrier.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CloneFragment {
    pub q: usize,
    pub ops: BTreeSet<OpTable>,
}

impl CloneFragment {
    pub fn new(q: usize, ops: impl IntoIterator<Item = OpTable>) -> Result<CloneFragment> {
        let ops: BTreeSet<OpTable> = ops.into_iter().collect();
        if let Some(bad) = ops.iter().find(|op| op.q != q) {
            return Err(Error::ArityMismatch(format!(
                "operation on carrier {} in fragment on carrier {q}",
                bad.q
            )));
        }
        Ok(CloneFragment { q, ops })
    }

    pub fn of_arity(&self, n: usize) -> impl Iterator<Item = &OpTable> {
        self.ops.iter().filter(move |op| op.arity == n)
    }

    pub fn arities(&self) -> BTreeSet<usize> {
        self.ops.iter().map(|op| op.arity).collect()
    }
}

/// `U1 · U2`: every superposition with head in `U1` and arguments of one
/// common arity in `U2`.
pub fn complex_product(u1: &CloneFragment, u2: &CloneFragment, caps: &Caps) -> Result<CloneFragment> {
    if u1.q != u2.q {
        return Err(Error::ArityMismatch("fragments on different carriers".into()));
    }
    let mut out = BTreeSet::new();
    let mut work: u64 = 0;
    for f in &u1.ops {
        if f.arity > caps.arity_cap {
            return Err(Error::ArityMismatch(format!(
                "head arity {} exceeds the arity cap {}",
                f.arity, caps.arity_cap
            )));
        }
        for m in u2.arities() {
            if m > caps.arity_cap {
                return Err(Error::ArityMismatch(format!(
                    "argument arity {m} exceeds the arity cap {}",
                    caps.arity_cap
                )));
            }
            let args: Vec<&OpTable> = u2.of_arity(m).collect();
            let combos = (args.len() as u64).checked_pow(f.arity as u32);
            match combos {
                Some(c) if work + c <= caps.enumeration_cap => work += c,
                _ => {
                    return Err(Error::EnumerationCap {
                        got: combos.unwrap_or(u64::MAX),
                        cap: caps.enumeration_cap,
                    })
                }
            }
            let mut idx = vec![0usize; f.arity];
            if args.is_empty() {
                continue;
            }
            loop {
                let chosen: Vec<&OpTable> = idx.iter().map(|&i| args[i]).collect();
                out.insert(superpose(f, &chosen)?);
                let mut pos = f.arity;
                let mut done = true;
                while pos > 0 {
                    pos -= 1;
                    idx[pos] += 1;
                    if idx[pos] < args.len() {
                        done = false;
                        break;
                    }
                    idx[pos] = 0;
                }
                if done {
                    break;
                }
            }
        }
    }
    CloneFragment::new(u1.q, out)
}

/// All k-ary projections on carrier `q`.
pub fn projections(q: usize, k: usize) -> Result<BTreeSet<OpTable>> {
    (1..=k).map(|i| projection(q, k, i)).collect()
}

/// Bracket levels `U^{[k,0]} … U^{[k,i]}`: level 0 is the k-ary projections,
/// each next level adds one more head application from `U`.
pub fn bracket(
    u: &CloneFragment,
    k: usize,
    i: usize,
    caps: &Caps,
) -> Result<Vec<BTreeSet<OpTable>>> {
    let mut levels = vec![projections(u.q, k)?];
    for _ in 0..i {
        let prev = levels.last().unwrap();
        let prev_frag = CloneFragment { q: u.q, ops: prev.clone() };
        let step = complex_product(u, &prev_frag, caps)?;
        let mut next = prev.clone();
        next.extend(step.ops);
        levels.push(next);
    }
    Ok(levels)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CayleyDepth {
    Bounded(usize),
    /// The bracket chain stabilized (or hit the depth cap) without covering
    /// the target set.
    UnboundedWithinCap { stabilized: bool, depth_tried: usize },
}

/// Least `n` with `bracket(U,k,n) ⊇ target`.
pub fn cayley_depth(
    u: &CloneFragment,
    k: usize,
    target: &BTreeSet<OpTable>,
    caps: &Caps,
) -> Result<CayleyDepth> {
    let mut current = projections(u.q, k)?;
    for depth in 0..=caps.depth_cap {
        if target.is_subset(&current) {
            return Ok(CayleyDepth::Bounded(depth));
        }
        if depth == caps.depth_cap {
            break;
        }
        let frag = CloneFragment { q: u.q, ops: current.clone() };
        let step = complex_product(u, &frag, caps)?;
        let before = current.len();
        current.extend(step.ops);
        if current.len() == before {
            return Ok(CayleyDepth::UnboundedWithinCap { stabilized: true, depth_tried: depth });
        }
    }
    Ok(CayleyDepth::UnboundedWithinCap { stabilized: false, depth_tried: caps.depth_cap })
}

/// All n-ary polymorphisms of `a`: homomorphisms from the n-th power to `a`,
/// re-indexed as operation tables. The power's lexicographic vertex order
/// matches the table index order, so the search map is the table.
pub fn polymorphisms(
    a: &RelStructure,
    n: usize,
    caps: &Caps,
    limit: Option<usize>,
) -> Result<CloneFragment> {
    let power = a.power(n, caps)?;
    let homs = enumerate_morphisms(&power, a, MorphismKind::Hom, caps, limit)?;
    CloneFragment::new(
        a.size,
        homs.into_iter()
            .map(|m| OpTable::new(a.size, n, m.map))
            .collect::<Result<Vec<_>>>()?,
    )
}

/// Closure of `U` plus all projections under superposition, up to the arity
/// cap; the flag reports whether a fixpoint was reached within the depth cap.
pub fn generate_clone(
    u: &CloneFragment,
    arity_cap: usize,
    depth_cap: usize,
    caps: &Caps,
) -> Result<(CloneFragment, bool)> {
    let mut ops: BTreeSet<OpTable> = u.ops.clone();
    for k in 1..=arity_cap {
        ops.extend(projections(u.q, k)?);
    }
    let mut stabilized = false;
    for _ in 0..depth_cap {
        let frag = CloneFragment { q: u.q, ops: ops.clone() };
        let step = complex_product(&frag, &frag, caps)?;
        let before = ops.len();
        ops.extend(step.ops.into_iter().filter(|op| op.arity <= arity_cap));
        if ops.len() == before {
            stabilized = true;
            break;
        }
    }
    Ok((CloneFragment { q: u.q, ops }, stabilized))
}

/// A term over generator operations and projections.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TermTree {
    Gen(usize),
    Proj { n: usize, i: usize },
    Apply { head: Box<TermTree>, args: Vec<TermTree> },
}

impl Serialize for TermTree {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            TermTree::Gen(id) => {
                let mut seq = serializer.serialize_seq(Some(2))?;
                seq.serialize_element("gen")?;
                seq.serialize_element(id)?;
                seq.end()
            }
            TermTree::Proj { n, i } => {
                let mut seq = serializer.serialize_seq(Some(3))?;
                seq.serialize_element("proj")?;
                seq.serialize_element(n)?;
                seq.serialize_element(i)?;
                seq.end()
            }
            TermTree::Apply { head, args } => {
                let mut seq = serializer.serialize_seq(Some(2 + args.len()))?;
                seq.serialize_element("apply")?;
                seq.serialize_element(head)?;
                for a in args {
                    seq.serialize_element(a)?;
                }
                seq.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for TermTree {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct TermVisitor;
        impl<'de> Visitor<'de> for TermVisitor {
            type Value = TermTree;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a [tag, …] term array")
            }
            fn visit_seq<A: SeqAccess<'de>>(
                self,
                mut seq: A,
            ) -> std::result::Result<TermTree, A::Error> {
                let tag: String = seq
                    .next_element()?
                    .ok_or_else(|| serde::de::Error::custom("empty term array"))?;
                match tag.as_str() {
                    "gen" => {
                        let id = seq
                            .next_element()?
                            .ok_or_else(|| serde::de::Error::custom("gen needs an id"))?;
                        Ok(TermTree::Gen(id))
                    }
                    "proj" => {
                        let n = seq
                            .next_element()?
                            .ok_or_else(|| serde::de::Error::custom("proj needs an arity"))?;
                        let i = seq
                            .next_element()?
                            .ok_or_else(|| serde::de::Error::custom("proj needs an index"))?;
                        Ok(TermTree::Proj { n, i })
                    }
                    "apply" => {
                        let head: TermTree = seq
                            .next_element()?
                            .ok_or_else(|| serde::de::Error::custom("apply needs a head"))?;
                        let mut args = Vec::new();
                        while let Some(arg) = seq.next_element::<TermTree>()? {
                            args.push(arg);
                        }
                        Ok(TermTree::Apply { head: Box::new(head), args })
                    }
                    other => Err(serde::de::Error::custom(format!("unknown term tag {other}"))),
                }
            }
        }
        deserializer.deserialize_seq(TermVisitor)
    }
}

impl TermTree {
    /// Evaluates the term as a total operation over generator tables.
    pub fn eval(&self, gens: &[OpTable], q: usize, arity: usize) -> Result<OpTable> {
        let mut table = Vec::with_capacity(q.pow(arity as u32));
        let mut args = vec![0usize; arity];
        loop {
            let v = self
                .eval_point(&|id, inner| {
                    let g = gens.get(id)?;
                    if inner.len() != g.arity {
                        return None;
                    }
                    Some(g.eval(inner))
                }, &args)
                .ok_or_else(|| Error::ArityMismatch("term evaluation undefined".into()))?;
            table.push(v);
            let mut pos = arity;
            loop {
                if pos == 0 {
                    return OpTable::new(q, arity, table);
                }
                pos -= 1;
                args[pos] += 1;
                if args[pos] < q {
                    break;
                }
                args[pos] = 0;
            }
        }
    }

    /// Point evaluation against (possibly partial) generator semantics.
    pub fn eval_point(
        &self,
        gen: &dyn Fn(usize, &[usize]) -> Option<usize>,
        vals: &[usize],
    ) -> Option<usize> {
        match self {
            TermTree::Proj { i, .. } => vals.get(i - 1).copied(),
            TermTree::Gen(id) => gen(*id, vals),
            TermTree::Apply { head, args } => {
                let inner: Option<Vec<usize>> =
                    args.iter().map(|a| a.eval_point(gen, vals)).collect();
                head.eval_point(gen, &inner?)
            }
        }
    }
}

/// A retraction pair between two finite stages: `eps` embeds the square of
/// the small stage into the big one, `r` retracts it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StagedRetraction {
    pub small: RelStructure,
    pub big: RelStructure,
    /// Homomorphism big → small × small, as a map into pair indices
    /// (row-major, first component most significant).
    pub r: Vec<usize>,
    /// Embedding small × small → big.
    pub eps: Vec<usize>,
}

impl StagedRetraction {
    pub fn new(
        small: RelStructure,
        big: RelStructure,
        r: Vec<usize>,
        eps: Vec<usize>,
        caps: &Caps,
    ) -> Result<StagedRetraction> {
        let square = small.direct_product(&small, caps)?;
        let r_m = Morphism::verified(&big, &square, r.clone(), MorphismKind::Hom)?;
        let eps_m = Morphism::verified(&square, &big, eps.clone(), MorphismKind::Embedding)?;
        if let Err(point) = is_retraction_pair(&r_m, &eps_m)? {
            return Err(Error::Precondition(format!(
                "r ∘ eps differs from the identity at pair index {point}"
            )));
        }
        Ok(StagedRetraction { small, big, r, eps })
    }

    fn m(&self) -> usize {
        self.small.size
    }

    /// ε as a partial binary operation on the big carrier: defined when
    /// both arguments lie in the small stage.
    pub fn eps_at(&self, x: usize, y: usize) -> Option<usize> {
        let m = self.m();
        (x < m && y < m).then(|| self.eps[x * m + y])
    }

    fn r_at(&self, a: usize) -> (usize, usize) {
        let v = self.r[a];
        (v / self.m(), v % self.m())
    }
}

/// One level of the iterated pairing chain: `eps` of arity `level + 1`
/// (partial, on its tracked domain) and the total `r` of matching arity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpsLevel {
    pub level: usize,
    /// Tracked domain of ε_level: (argument tuple over the small carrier,
    /// value in the big carrier).
    pub eps: Vec<(Vec<usize>, usize)>,
    /// r_level: big carrier point → tuple over the small carrier.
    pub r: Vec<Vec<usize>>,
    pub term: TermTree,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpsChain {
    pub levels: Vec<EpsLevel>,
}

/// Builds ε_1…ε_d and r_1…r_d, verifying r_i ∘ ε_i = 1 pointwise on each
/// tracked domain, and that each ε_i's term tree reproduces the recursion.
pub fn build_eps_chain(sr: &StagedRetraction, depth: usize) -> Result<EpsChain> {
    let m = sr.small.size;
    let big = sr.big.size;
    let mut levels: Vec<EpsLevel> = Vec::new();
    for level in 1..=depth {
        let term = match levels.last() {
            None => TermTree::Gen(0),
            Some(prev) => {
                let inner_arity = level + 1;
                TermTree::Apply {
                    head: Box::new(TermTree::Gen(0)),
                    args: vec![
                        TermTree::Apply {
                            head: Box::new(prev.term.clone()),
                            args: (1..=level)
                                .map(|i| TermTree::Proj { n: inner_arity, i })
                                .collect(),
                        },
                        TermTree::Proj { n: inner_arity, i: inner_arity },
                    ],
                }
            }
        };
        let eps: Vec<(Vec<usize>, usize)> = match levels.last() {
            None => {
                let mut out = Vec::new();
                for x in 0..m {
                    for y in 0..m {
                        out.push((vec![x, y], sr.eps_at(x, y).unwrap()));
                    }
                }
                out
            }
            Some(prev) => {
                let mut out = Vec::new();
                for (tuple, v) in &prev.eps {
                    if *v >= m {
                        continue;
                    }
                    for y in 0..m {
                        let mut t = tuple.clone();
                        t.push(y);
                        out.push((t, sr.eps_at(*v, y).unwrap()));
                    }
                }
                out
            }
        };
        if eps.is_empty() {
            return Err(Error::Precondition(format!(
                "tracked domain of ε empties at level {level}; the stage gap is too small"
            )));
        }
        let r: Vec<Vec<usize>> = match levels.last() {
            None => (0..big)
                .map(|a| {
                    let (b, c) = sr.r_at(a);
                    vec![b, c]
                })
                .collect(),
            Some(prev) => (0..big)
                .map(|a| {
                    let (b, c) = sr.r_at(a);
                    let mut t = prev.r[b].clone();
                    t.push(c);
                    t
                })
                .collect(),
        };
        // Claim 2: r_i ∘ ε_i is the identity on the tracked domain
        for (tuple, v) in &eps {
            if &r[*v] != tuple {
                return Err(Error::Precondition(format!(
                    "r_{level} ∘ ε_{level} fails at {tuple:?}: got {:?}",
                    r[*v]
                )));
            }
        }
        // the term tree reproduces the recursion pointwise
        let gen = |id: usize, args: &[usize]| -> Option<usize> {
            (id == 0 && args.len() == 2).then(|| sr.eps_at(args[0], args[1])).flatten()
        };
        for (tuple, v) in &eps {
            if term.eval_point(&gen, tuple) != Some(*v) {
                return Err(Error::Precondition(format!(
                    "term for ε_{level} disagrees with the recursion at {tuple:?}"
                )));
            }
        }
        levels.push(EpsLevel { level, eps, r, term });
    }
    Ok(EpsChain { levels })
}

/// A decomposition `f = (f ∘ r_i) ∘ ε_i`: a unary head applied to the
/// iterated pairing term, exact on the tracked domain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    /// f ∘ r_i, a unary operation on the big carrier.
    pub unary: OpTable,
    /// `["apply", ["gen", 1], ε_i-term]` with generator 0 = ε, 1 = the unary
    /// head.
    pub term: TermTree,
    /// Points of the tracked domain on which the round-trip was verified.
    pub checked_points: usize,
}

/// Decomposes an (i+1)-ary polymorphism `f` of the big stage through a
/// chain valid to depth i.
pub fn decompose_polymorphism(
    f: &OpTable,
    sr: &StagedRetraction,
    chain: &EpsChain,
    caps: &Caps,
) -> Result<Decomposition> {
    if f.q != sr.big.size {
        return Err(Error::ArityMismatch(format!(
            "operation lives on carrier {}, the stage has {}",
            f.q,
            sr.big.size
        )));
    }
    if f.arity < 2 {
        return Err(Error::ArityMismatch("need arity >= 2 to decompose".into()));
    }
    let level = f.arity - 1;
    let Some(lvl) = chain.levels.get(level - 1) else {
        return Err(Error::Precondition(format!(
            "chain too shallow: depth {} < required level {level}",
            chain.levels.len()
        )));
    };
    // f must be a polymorphism of the big stage
    let power = sr.big.power(f.arity, caps)?;
    Morphism::verified(&power, &sr.big, f.table.clone(), MorphismKind::Hom).map_err(|e| {
        Error::Precondition(format!("operation is not a polymorphism: {e}"))
    })?;
    let unary = OpTable::new(
        sr.big.size,
        1,
        (0..sr.big.size).map(|a| f.eval(&lvl.r[a])).collect(),
    )?;
    let term = TermTree::Apply {
        head: Box::new(TermTree::Gen(1)),
        args: vec![lvl.term.clone()],
    };
    // round-trip equality on the tracked domain
    let gen = |id: usize, args: &[usize]| -> Option<usize> {
        match id {
            0 if args.len() == 2 => sr.eps_at(args[0], args[1]),
            1 if args.len() == 1 => Some(unary.eval(args)),
            _ => None,
        }
    };
    let mut checked_points = 0;
    for (tuple, _) in &lvl.eps {
        let via_term = term.eval_point(&gen, tuple);
        if via_term != Some(f.eval(tuple)) {
            return Err(Error::Precondition(format!(
                "decomposition disagrees with f at {tuple:?}"
            )));
        }
        checked_points += 1;
    }
    Ok(Decomposition { unary, term, checked_points })
}
