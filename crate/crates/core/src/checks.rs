//! Bounded checks of class properties: HP, JEP, AP, strict AP, HAP, and the
//! amalgamated extension property.
//!
//! Every check enumerates its instances exhaustively up to the stated bound,
//! runs them in parallel, and merges verdicts deterministically by instance
//! order. Witnesses re-verify through morphism verification before they are
//! reported; a `Fails` verdict carries the first counterexample in instance
//! order as its last witness.

use rayon::prelude::*;

use crate::age::{AgeMode, AgeSpec};
use crate::amalgam::{AmalgamSearch, ColorConstraint};
use crate::config::Caps;
use crate::error::Result;
use crate::morphism::{Morphism, MorphismKind, MorphismRecord};
use crate::report::{
    CheckReport, ExtSolution, Square, SquareSolution, Verdict, Witness, WITNESS_SAMPLE,
};
use crate::search::{enumerate_morphisms, find_morphism, PartialMap};
use crate::structure::RelStructure;

/// Runs `check` over all instances in parallel and merges in instance order.
/// The closure returns `(ok, witness)`; a witness is required whenever
/// `ok == false` and is kept for the first `WITNESS_SAMPLE` successes.
fn run_check<I: Sync>(
    property: &str,
    bound: usize,
    instances: &[I],
    cap_bound: bool,
    notes: Vec<String>,
    check: impl Fn(usize, &I) -> Result<(bool, Option<Witness>)> + Sync,
) -> Result<CheckReport> {
    let results: Result<Vec<(bool, Option<Witness>)>> = instances
        .par_iter()
        .enumerate()
        .map(|(i, inst)| check(i, inst))
        .collect();
    let mut witnesses = Vec::new();
    let mut verdict = Verdict::HoldsUpToBound;
    for (ok, w) in results? {
        if !ok {
            witnesses.extend(w);
            verdict = Verdict::Fails;
            break;
        }
        if witnesses.len() < WITNESS_SAMPLE {
            witnesses.extend(w);
        }
    }
    Ok(CheckReport {
        property: property.to_string(),
        bound,
        verdict,
        instances_checked: instances.len(),
        witnesses,
        cap_bound,
        notes,
    })
}

fn sample(idx: usize) -> bool {
    idx < WITNESS_SAMPLE
}

/// Caps for one amalgam search: carrier limited by the instance-size bound
/// and the configured amalgam cap.
fn amalgam_caps(caps: &Caps, size_bound: usize) -> (Caps, bool) {
    let mut c = caps.clone();
    let capped = caps.amalgam_size_cap < size_bound;
    c.carrier_cap = size_bound.min(caps.amalgam_size_cap).min(caps.carrier_cap);
    (c, capped)
}

/// Maps between enumerated members, kind-indexed: `table[i][j]` lists all
/// maps of the kind from member `i` to member `j`.
fn map_table(
    members: &[RelStructure],
    kind: MorphismKind,
    caps: &Caps,
) -> Result<Vec<Vec<Vec<Vec<usize>>>>> {
    members
        .iter()
        .map(|a| {
            members
                .iter()
                .map(|b| {
                    Ok(enumerate_morphisms(a, b, kind, caps, None)?
                        .into_iter()
                        .map(|m| m.map)
                        .collect())
                })
                .collect()
        })
        .collect()
}

fn square(
    a: &RelStructure,
    b1: &RelStructure,
    b2: &RelStructure,
    f1: &[usize],
    f1_kind: MorphismKind,
    f2: &[usize],
    f2_kind: MorphismKind,
) -> Square {
    Square {
        a: a.clone(),
        b1: b1.clone(),
        b2: b2.clone(),
        f1: MorphismRecord { map: f1.to_vec(), kind: f1_kind },
        f2: MorphismRecord { map: f2.to_vec(), kind: f2_kind },
    }
}

/// Solves one AP-shaped square: find a member `C` with embeddings of `b1`
/// and `b2` agreeing on the anchor. Returns `(c, g1, g2)`, verified.
fn solve_square(
    spec: &AgeSpec,
    caps: &Caps,
    b1: &RelStructure,
    b2: &RelStructure,
    anchored: &[(usize, usize)],
) -> Result<Option<(RelStructure, Vec<usize>, Vec<usize>)>> {
    let size_bound = b1.size + b2.size;
    let (search_caps, _) = amalgam_caps(caps, size_bound);
    let found = match &spec.mode {
        AgeMode::Catalogue(_) => {
            let mut found = None;
            'outer: for c in spec.enumerate_members(search_caps.carrier_cap, caps)? {
                for g1 in enumerate_morphisms(b1, &c, MorphismKind::Embedding, caps, None)? {
                    let seed = PartialMap::from_pairs(
                        anchored.iter().map(|&(pv, bv)| (pv, g1.map[bv])),
                    );
                    if let Some(g2) =
                        find_morphism(b2, &c, MorphismKind::Embedding, &seed, None)?
                    {
                        found = Some((c, g1.map, g2.map));
                        break 'outer;
                    }
                }
            }
            found
        }
        _ => AmalgamSearch {
            spec,
            caps: &search_caps,
            base: b1,
            pattern: b2,
            anchored,
            allow_identify: true,
            pattern_kind: MorphismKind::Embedding,
            color: None,
        }
        .find()?
        .map(|am| (am.c, (0..b1.size).collect(), am.g2)),
    };
    match found {
        Some((c, g1, g2)) => {
            Morphism::verified(b1, &c, g1.clone(), MorphismKind::Embedding)?;
            Morphism::verified(b2, &c, g2.clone(), MorphismKind::Embedding)?;
            for &(pv, bv) in anchored {
                debug_assert_eq!(g2[pv], g1[bv]);
            }
            Ok(Some((c, g1, g2)))
        }
        None => Ok(None),
    }
}

/// Every jointly-surjective amalgam candidate of a square, in a fixed order.
fn for_each_joint_candidate(
    spec: &AgeSpec,
    caps: &Caps,
    b1: &RelStructure,
    b2: &RelStructure,
    anchored: &[(usize, usize)],
    on_found: &mut dyn FnMut(RelStructure, Vec<usize>, Vec<usize>) -> bool,
) -> Result<()> {
    let size_bound = b1.size + b2.size;
    let (search_caps, _) = amalgam_caps(caps, size_bound);
    match &spec.mode {
        AgeMode::Catalogue(_) => {
            for c in spec.enumerate_members(search_caps.carrier_cap, caps)? {
                for g1 in enumerate_morphisms(b1, &c, MorphismKind::Embedding, caps, None)? {
                    for g2 in enumerate_morphisms(b2, &c, MorphismKind::Embedding, caps, None)? {
                        if anchored.iter().any(|&(pv, bv)| g2.map[pv] != g1.map[bv]) {
                            continue;
                        }
                        let mut covered = vec![false; c.size];
                        g1.map.iter().chain(g2.map.iter()).for_each(|&v| covered[v] = true);
                        if !covered.iter().all(|&v| v) {
                            continue;
                        }
                        if on_found(c.clone(), g1.map.clone(), g2.map.clone()) {
                            return Ok(());
                        }
                    }
                }
            }
        }
        _ => {
            let search = AmalgamSearch {
                spec,
                caps: &search_caps,
                base: b1,
                pattern: b2,
                anchored,
                allow_identify: true,
                pattern_kind: MorphismKind::Embedding,
                color: None,
            };
            let g1: Vec<usize> = (0..b1.size).collect();
            search.for_each(&mut |am| on_found(am.c, g1.clone(), am.g2))?;
        }
    }
    Ok(())
}

pub fn check_hp(spec: &AgeSpec, n: usize, caps: &Caps) -> Result<CheckReport> {
    let members = spec.enumerate_members(n, caps)?;
    let mut instances: Vec<(usize, Vec<usize>)> = Vec::new();
    for (i, m) in members.iter().enumerate() {
        // all proper subsets, in increasing mask order
        for mask in 0u64..(1u64 << m.size).saturating_sub(1) {
            let subset: Vec<usize> = (0..m.size).filter(|v| mask & (1 << v) != 0).collect();
            instances.push((i, subset));
        }
    }
    let mut notes = vec![];
    if spec.is_hereditary_by_construction() {
        notes.push("class is hereditary by construction; check is confirmatory".to_string());
    }
    run_check("hp", n, &instances, false, notes, |idx, (i, subset)| {
        let member = &members[*i];
        let (induced, _) = member.induced_substructure(subset)?;
        let in_class = spec.contains(&induced, caps)?;
        let witness = (!in_class || sample(idx)).then(|| Witness::Hereditary {
            member: member.clone(),
            subset: subset.clone(),
            in_class,
        });
        Ok((in_class, witness))
    })
}

pub fn check_jep(spec: &AgeSpec, n: usize, caps: &Caps) -> Result<CheckReport> {
    let members = spec.enumerate_members(n, caps)?;
    let mut instances = Vec::new();
    let mut cap_bound = false;
    for i in 0..members.len() {
        for j in 0..members.len() {
            cap_bound |= amalgam_caps(caps, members[i].size + members[j].size).1;
            instances.push((i, j));
        }
    }
    let empty = RelStructure::empty(spec.signature.clone(), 0);
    run_check("jep", n, &instances, cap_bound, vec![], |idx, &(i, j)| {
        let (b1, b2) = (&members[i], &members[j]);
        let solution = solve_square(spec, caps, b1, b2, &[])?;
        let ok = solution.is_some();
        let witness = (!ok || sample(idx)).then(|| Witness::Amalgamation {
            square: square(
                &empty,
                b1,
                b2,
                &[],
                MorphismKind::Embedding,
                &[],
                MorphismKind::Embedding,
            ),
            solution: solution.map(|(c, g1, g2)| SquareSolution {
                c,
                g1: MorphismRecord { map: g1, kind: MorphismKind::Embedding },
                g2: MorphismRecord { map: g2, kind: MorphismKind::Embedding },
            }),
        });
        Ok((ok, witness))
    })
}

/// AP instances as index tuples into the member list and embedding tables.
fn ap_instances(
    members: &[RelStructure],
    emb: &[Vec<Vec<Vec<usize>>>],
    caps: &Caps,
) -> (Vec<(usize, usize, usize, usize, usize)>, bool) {
    let mut instances = Vec::new();
    let mut cap_bound = false;
    for a in 0..members.len() {
        for b1 in 0..members.len() {
            for b2 in 0..members.len() {
                for i1 in 0..emb[a][b1].len() {
                    for i2 in 0..emb[a][b2].len() {
                        cap_bound |=
                            amalgam_caps(caps, members[b1].size + members[b2].size).1;
                        instances.push((a, b1, b2, i1, i2));
                    }
                }
            }
        }
    }
    (instances, cap_bound)
}

fn anchor_pairs(f1: &[usize], f2: &[usize]) -> Vec<(usize, usize)> {
    f2.iter().copied().zip(f1.iter().copied()).collect()
}

pub fn check_ap(spec: &AgeSpec, n: usize, caps: &Caps) -> Result<CheckReport> {
    let members = spec.enumerate_members(n, caps)?;
    let emb = map_table(&members, MorphismKind::Embedding, caps)?;
    let (instances, cap_bound) = ap_instances(&members, &emb, caps);
    run_check("ap", n, &instances, cap_bound, vec![], |idx, &(a, b1, b2, i1, i2)| {
        let (f1, f2) = (&emb[a][b1][i1], &emb[a][b2][i2]);
        let solution = solve_square(spec, caps, &members[b1], &members[b2], &anchor_pairs(f1, f2))?;
        let ok = solution.is_some();
        let witness = (!ok || sample(idx)).then(|| Witness::Amalgamation {
            square: square(
                &members[a],
                &members[b1],
                &members[b2],
                f1,
                MorphismKind::Embedding,
                f2,
                MorphismKind::Embedding,
            ),
            solution: solution.map(|(c, g1, g2)| SquareSolution {
                c,
                g1: MorphismRecord { map: g1, kind: MorphismKind::Embedding },
                g2: MorphismRecord { map: g2, kind: MorphismKind::Embedding },
            }),
        });
        Ok((ok, witness))
    })
}

/// The mediating map out of a jointly-surjective candidate is determined
/// pointwise; it exists iff the determination is consistent and a
/// homomorphism.
fn mediates(
    c: &RelStructure,
    g1: &[usize],
    g2: &[usize],
    d: &RelStructure,
    h1: &[usize],
    h2: &[usize],
) -> bool {
    let mut m = vec![usize::MAX; c.size];
    for (x, &cx) in g1.iter().enumerate() {
        m[cx] = h1[x];
    }
    for (y, &cy) in g2.iter().enumerate() {
        if m[cy] != usize::MAX && m[cy] != h2[y] {
            return false;
        }
        m[cy] = h2[y];
    }
    if m.contains(&usize::MAX) {
        return false;
    }
    for (sym, rel) in c.relations.iter().enumerate() {
        for t in rel {
            let image: Vec<usize> = t.iter().map(|&v| m[v]).collect();
            if !d.has_tuple(sym, &image) {
                return false;
            }
        }
    }
    true
}

pub fn check_strict_ap(spec: &AgeSpec, n: usize, d: usize, caps: &Caps) -> Result<CheckReport> {
    let members = spec.enumerate_members(n, caps)?;
    let emb = map_table(&members, MorphismKind::Embedding, caps)?;
    let test_members = spec.enumerate_members(d, caps)?;
    let (instances, cap_bound) = ap_instances(&members, &emb, caps);
    let notes = vec![format!(
        "pushout mediation tested against members of size <= {d} only"
    )];
    run_check("strict_ap", n, &instances, cap_bound, notes, |idx, &(a, b1, b2, i1, i2)| {
        let (f1, f2) = (&emb[a][b1][i1], &emb[a][b2][i2]);
        let (sb1, sb2) = (&members[b1], &members[b2]);
        // test triples (D, h1, h2) with h1∘f1 = h2∘f2
        let mut triples: Vec<(&RelStructure, Vec<usize>, Vec<usize>)> = Vec::new();
        for test in &test_members {
            for h1 in enumerate_morphisms(sb1, test, MorphismKind::Hom, caps, None)? {
                for h2 in enumerate_morphisms(sb2, test, MorphismKind::Hom, caps, None)? {
                    if (0..members[a].size).all(|x| h1.map[f1[x]] == h2.map[f2[x]]) {
                        triples.push((test, h1.map.clone(), h2.map));
                    }
                }
            }
        }
        let anchored = anchor_pairs(f1, f2);
        let mut surviving: Option<SquareSolution> = None;
        for_each_joint_candidate(spec, caps, sb1, sb2, &anchored, &mut |c, g1, g2| {
            if triples.iter().all(|(t, h1, h2)| mediates(&c, &g1, &g2, t, h1, h2)) {
                surviving = Some(SquareSolution {
                    c,
                    g1: MorphismRecord { map: g1, kind: MorphismKind::Embedding },
                    g2: MorphismRecord { map: g2, kind: MorphismKind::Embedding },
                });
                true
            } else {
                false
            }
        })?;
        let ok = surviving.is_some();
        let witness = (!ok || sample(idx)).then(|| Witness::StrictAmalgamation {
            square: square(
                &members[a],
                sb1,
                sb2,
                f1,
                MorphismKind::Embedding,
                f2,
                MorphismKind::Embedding,
            ),
            test_bound: d,
            solution: surviving,
        });
        Ok((ok, witness))
    })
}

pub fn check_hap(spec: &AgeSpec, n: usize, caps: &Caps) -> Result<CheckReport> {
    let members = spec.enumerate_members(n, caps)?;
    let emb = map_table(&members, MorphismKind::Embedding, caps)?;
    let hom = map_table(&members, MorphismKind::Hom, caps)?;
    let mut instances = Vec::new();
    let mut cap_bound = false;
    for a in 0..members.len() {
        for b1 in 0..members.len() {
            for b2 in 0..members.len() {
                for i1 in 0..emb[a][b1].len() {
                    for i2 in 0..hom[a][b2].len() {
                        cap_bound |=
                            amalgam_caps(caps, members[b1].size + members[b2].size).1;
                        instances.push((a, b1, b2, i1, i2));
                    }
                }
            }
        }
    }
    run_check("hap", n, &instances, cap_bound, vec![], |idx, &(a, b1, b2, i1, i2)| {
        let (f1, f2) = (&emb[a][b1][i1], &hom[a][b2][i2]);
        let (sb1, sb2) = (&members[b1], &members[b2]);
        // find C with an embedding of B2 (kept as prefix in the hereditary
        // case) and a homomorphic image of B1 agreeing over A
        let anchored: Vec<(usize, usize)> =
            f1.iter().copied().zip(f2.iter().copied()).collect();
        let size_bound = sb1.size + sb2.size;
        let (search_caps, _) = amalgam_caps(caps, size_bound);
        let found = match &spec.mode {
            AgeMode::Catalogue(_) => {
                let mut found = None;
                'outer: for c in spec.enumerate_members(search_caps.carrier_cap, caps)? {
                    for g2 in enumerate_morphisms(sb2, &c, MorphismKind::Embedding, caps, None)? {
                        let seed = PartialMap::from_pairs(
                            anchored.iter().map(|&(pv, bv)| (pv, g2.map[bv])),
                        );
                        if let Some(g1) = find_morphism(sb1, &c, MorphismKind::Hom, &seed, None)? {
                            found = Some((c, g1.map, g2.map));
                            break 'outer;
                        }
                    }
                }
                found
            }
            _ => AmalgamSearch {
                spec,
                caps: &search_caps,
                base: sb2,
                pattern: sb1,
                anchored: &anchored,
                allow_identify: true,
                pattern_kind: MorphismKind::Hom,
                color: None,
            }
            .find()?
            .map(|am| (am.c, am.g2, (0..sb2.size).collect::<Vec<usize>>())),
        };
        if let Some((c, g1, g2)) = &found {
            Morphism::verified(sb1, c, g1.clone(), MorphismKind::Hom)?;
            Morphism::verified(sb2, c, g2.clone(), MorphismKind::Embedding)?;
        }
        let ok = found.is_some();
        let witness = (!ok || sample(idx)).then(|| Witness::Amalgamation {
            square: square(
                &members[a],
                sb1,
                sb2,
                f1,
                MorphismKind::Embedding,
                f2,
                MorphismKind::Hom,
            ),
            solution: found.map(|(c, g1, g2)| SquareSolution {
                c,
                g1: MorphismRecord { map: g1, kind: MorphismKind::Hom },
                g2: MorphismRecord { map: g2, kind: MorphismKind::Embedding },
            }),
        });
        Ok((ok, witness))
    })
}

/// Member extensions of `start` (kept as a prefix) with up to `max_extra`
/// added points, by increasing size. Deduplicated exactly per level.
fn extension_chain(
    spec: &AgeSpec,
    caps: &Caps,
    start: &RelStructure,
    max_extra: usize,
    on_found: &mut dyn FnMut(&RelStructure) -> Result<bool>,
) -> Result<bool> {
    let mut level = vec![start.clone()];
    for extra in 0..=max_extra {
        for s in &level {
            if on_found(s)? {
                return Ok(true);
            }
        }
        if extra == max_extra || start.size + extra + 1 > caps.carrier_cap {
            break;
        }
        let mut next: Vec<RelStructure> = Vec::new();
        for s in &level {
            for ext in spec.one_point_extensions(s, caps)? {
                if !next.contains(&ext) {
                    next.push(ext);
                }
            }
        }
        level = next;
    }
    Ok(false)
}

pub fn check_amalg_ext(spec: &AgeSpec, n: usize, caps: &Caps) -> Result<CheckReport> {
    let members = spec.enumerate_members(n, caps)?;
    let emb = map_table(&members, MorphismKind::Embedding, caps)?;
    let hom = map_table(&members, MorphismKind::Hom, caps)?;
    let mut instances = Vec::new();
    let mut cap_bound = false;
    for a in 0..members.len() {
        for b1 in 0..members.len() {
            for b2 in 0..members.len() {
                for t in 0..members.len() {
                    for i1 in 0..emb[a][b1].len() {
                        for i2 in 0..emb[a][b2].len() {
                            for j1 in 0..hom[b1][t].len() {
                                for j2 in 0..hom[b2][t].len() {
                                    let (f1, f2) = (&emb[a][b1][i1], &emb[a][b2][i2]);
                                    let (h1, h2) = (&hom[b1][t][j1], &hom[b2][t][j2]);
                                    if (0..members[a].size)
                                        .any(|x| h1[f1[x]] != h2[f2[x]])
                                    {
                                        continue;
                                    }
                                    cap_bound |= amalgam_caps(
                                        caps,
                                        members[b1].size + members[b2].size,
                                    )
                                    .1;
                                    instances.push((a, b1, b2, t, i1, i2, j1, j2));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    run_check(
        "amalg_ext",
        n,
        &instances,
        cap_bound,
        vec![],
        |idx, &(a, b1, b2, t, i1, i2, j1, j2)| {
            let (f1, f2) = (&emb[a][b1][i1], &emb[a][b2][i2]);
            let (h1, h2) = (&hom[b1][t][j1], &hom[b2][t][j2]);
            let (sb1, sb2, st) = (&members[b1], &members[b2], &members[t]);
            let solution = solve_ext(spec, caps, sb1, sb2, &anchor_pairs(f1, f2), st, h1, h2)?;
            let ok = solution.is_some();
            let witness = (!ok || sample(idx)).then(|| Witness::AmalgamatedExtension {
                square: square(
                    &members[a],
                    sb1,
                    sb2,
                    f1,
                    MorphismKind::Embedding,
                    f2,
                    MorphismKind::Embedding,
                ),
                t: st.clone(),
                h1: MorphismRecord { map: h1.clone(), kind: MorphismKind::Hom },
                h2: MorphismRecord { map: h2.clone(), kind: MorphismKind::Hom },
                solution,
            });
            Ok((ok, witness))
        },
    )
}

/// Solves one amalgamated-extension instance: amalgam (C, g1, g2) plus an
/// enlarged target T' with k: T↪T' and h: C→T' commuting with both colorings.
#[allow(clippy::too_many_arguments)]
fn solve_ext(
    spec: &AgeSpec,
    caps: &Caps,
    b1: &RelStructure,
    b2: &RelStructure,
    anchored: &[(usize, usize)],
    t: &RelStructure,
    h1: &[usize],
    h2: &[usize],
) -> Result<Option<ExtSolution>> {
    let c_bound = b1.size + b2.size;
    let (search_caps, _) = amalgam_caps(caps, c_bound);
    let finish = |c: RelStructure,
                  g1: Vec<usize>,
                  g2: Vec<usize>,
                  t_prime: RelStructure,
                  k: Vec<usize>,
                  h: Vec<usize>|
     -> Result<ExtSolution> {
        Morphism::verified(b1, &c, g1.clone(), MorphismKind::Embedding)?;
        Morphism::verified(b2, &c, g2.clone(), MorphismKind::Embedding)?;
        Morphism::verified(t, &t_prime, k.clone(), MorphismKind::Embedding)?;
        Morphism::verified(&c, &t_prime, h.clone(), MorphismKind::Hom)?;
        Ok(ExtSolution {
            c,
            g1: MorphismRecord { map: g1, kind: MorphismKind::Embedding },
            g2: MorphismRecord { map: g2, kind: MorphismKind::Embedding },
            t_prime,
            k: MorphismRecord { map: k, kind: MorphismKind::Embedding },
            h: MorphismRecord { map: h, kind: MorphismKind::Hom },
        })
    };
    if let AgeMode::Catalogue(_) = &spec.mode {
        let t_bound = (t.size + c_bound).min(caps.amalgam_size_cap).min(caps.carrier_cap);
        for t_prime in spec.enumerate_members(t_bound, caps)? {
            for k in enumerate_morphisms(t, &t_prime, MorphismKind::Embedding, caps, None)? {
                let kh1: Vec<usize> = h1.iter().map(|&v| k.map[v]).collect();
                let kh2: Vec<usize> = h2.iter().map(|&v| k.map[v]).collect();
                let mut found = None;
                for_each_joint_candidate(spec, caps, b1, b2, anchored, &mut |c, g1, g2| {
                    let mut seed = Vec::new();
                    for (x, &cx) in g1.iter().enumerate() {
                        seed.push((cx, kh1[x]));
                    }
                    for (y, &cy) in g2.iter().enumerate() {
                        seed.push((cy, kh2[y]));
                    }
                    if seed.iter().any(|&(v, col)| {
                        seed.iter().any(|&(v2, col2)| v == v2 && col != col2)
                    }) {
                        return false;
                    }
                    let pm = PartialMap::from_pairs(seed);
                    match find_morphism(&c, &t_prime, MorphismKind::Hom, &pm, None) {
                        Ok(Some(h)) => {
                            found = Some((c, g1, g2, h.map));
                            true
                        }
                        _ => false,
                    }
                })?;
                if let Some((c, g1, g2, h)) = found {
                    return Ok(Some(finish(c, g1, g2, t_prime, k.map, h)?));
                }
            }
        }
        return Ok(None);
    }
    // hereditary classes: search a colored amalgam into T enlarged by a
    // prefix-preserving member extension, smallest enlargement first
    let max_extra = c_bound.saturating_sub(anchored.len());
    let mut solution = None;
    extension_chain(spec, caps, t, max_extra, &mut |t_prime| {
        let search = AmalgamSearch {
            spec,
            caps: &search_caps,
            base: b1,
            pattern: b2,
            anchored,
            allow_identify: true,
            pattern_kind: MorphismKind::Embedding,
            color: Some(ColorConstraint {
                base_color: h1,
                pattern_color: h2,
                target: t_prime,
            }),
        };
        if let Some(am) = search.find()? {
            let g1: Vec<usize> = (0..b1.size).collect();
            let k: Vec<usize> = (0..t.size).collect();
            let h = am.coloring.expect("colored search returns a coloring");
            solution = Some(finish(am.c, g1, am.g2, t_prime.clone(), k, h)?);
            return Ok(true);
        }
        Ok(false)
    })?;
    Ok(solution)
}
