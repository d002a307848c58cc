//! Finite stages of a Fraïssé-style limit, built by fair FIFO saturation of
//! extension tasks, plus bounded extension-property and partial-homogeneity
//! verification.
//!
//! Every stage keeps the previous stage as a carrier prefix, so all chain
//! links are identity inclusions and anchors recorded against earlier stages
//! stay valid verbatim.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::age::{AgeMode, AgeSpec};
use crate::amalgam::AmalgamSearch;
use crate::config::Caps;
use crate::error::{Error, Result};
use crate::morphism::{Morphism, MorphismKind, MorphismRecord};
use crate::report::{CheckReport, Verdict, Witness, WITNESS_SAMPLE};
use crate::search::{enumerate_morphisms, find_morphism, PartialMap};
use crate::structure::RelStructure;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainStage {
    pub index: usize,
    pub structure: RelStructure,
    /// Embedding from the previous stage; `None` on stage 0. Always the
    /// prefix inclusion here.
    pub link: Option<MorphismRecord>,
}

/// One saturation requirement: extend the anchored copy of `small` inside
/// the current stage to a copy of `big`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionTask {
    pub id: usize,
    pub small: RelStructure,
    pub big: RelStructure,
    /// Embedding small ↪ big.
    pub emb: Vec<usize>,
    /// Embedding small ↪ stage (valid in all later stages).
    pub anchor: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DischargeAction {
    /// The big side already embedded over the anchor.
    Skipped,
    /// A new stage of the given size was created.
    Amalgamated { new_size: usize },
}

/// Audit trail of the saturation run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SaturationManifest {
    pub k: usize,
    pub budget: usize,
    pub tasks_enqueued: usize,
    pub tasks_discharged: usize,
    pub tasks_skipped: usize,
    pub open_tasks: usize,
    pub queue_capped: bool,
    /// (task id, action) in discharge order; ids are assigned in enqueue
    /// order, so FIFO fairness is auditable.
    pub discharge_log: Vec<(usize, DischargeAction)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LimitBuild {
    pub stages: Vec<ChainStage>,
    pub manifest: SaturationManifest,
}

impl LimitBuild {
    pub fn last_stage(&self) -> &RelStructure {
        &self.stages.last().expect("at least stage 0 exists").structure
    }
}

/// All (small ↪ big) member pairs with |big| ≤ k; the empty structure is
/// included on the small side even when the class omits it, so joint
/// embedding requirements bootstrap the chain.
fn task_pairs(
    spec: &AgeSpec,
    k: usize,
    caps: &Caps,
) -> Result<Vec<(RelStructure, RelStructure, Vec<usize>)>> {
    let mut smalls = spec.enumerate_members(k, caps)?;
    if !smalls.iter().any(|s| s.size == 0) {
        smalls.insert(0, RelStructure::empty(spec.signature.clone(), 0));
    }
    let bigs = spec.enumerate_members(k, caps)?;
    let mut pairs = Vec::new();
    for a in &smalls {
        for b in &bigs {
            if a.size >= b.size {
                continue;
            }
            for emb in enumerate_morphisms(a, b, MorphismKind::Embedding, caps, None)? {
                pairs.push((a.clone(), b.clone(), emb.map));
            }
        }
    }
    Ok(pairs)
}

/// Discharges one open task against the current stage, keeping the stage as
/// a carrier prefix of the result.
fn amalgamate_onto_stage(
    spec: &AgeSpec,
    caps: &Caps,
    stage: &RelStructure,
    task: &ExtensionTask,
) -> Result<RelStructure> {
    let anchored: Vec<(usize, usize)> = task
        .emb
        .iter()
        .copied()
        .zip(task.anchor.iter().copied())
        .collect();
    let mut search_caps = caps.clone();
    search_caps.carrier_cap = (stage.size + task.big.size).min(caps.carrier_cap);
    match &spec.mode {
        AgeMode::Catalogue(_) => {
            for c in spec.enumerate_members(search_caps.carrier_cap, caps)? {
                for g1 in enumerate_morphisms(stage, &c, MorphismKind::Embedding, caps, None)? {
                    let seed = PartialMap::from_pairs(
                        anchored.iter().map(|&(pv, bv)| (pv, g1.map[bv])),
                    );
                    if find_morphism(&task.big, &c, MorphismKind::Embedding, &seed, None)?
                        .is_some()
                    {
                        // relabel so the stage becomes the carrier prefix
                        let mut perm = vec![usize::MAX; c.size];
                        for (v, &cv) in g1.map.iter().enumerate() {
                            perm[cv] = v;
                        }
                        let mut next = stage.size;
                        for slot in perm.iter_mut() {
                            if *slot == usize::MAX {
                                *slot = next;
                                next += 1;
                            }
                        }
                        return Ok(c.apply_permutation(&perm));
                    }
                }
            }
            Err(Error::AmalgamationFailed(format!(
                "no member of size <= {} completes task {} (extend {} -> {})",
                search_caps.carrier_cap, task.id, task.small.size, task.big.size
            )))
        }
        _ => AmalgamSearch {
            spec,
            caps: &search_caps,
            base: stage,
            pattern: &task.big,
            anchored: &anchored,
            allow_identify: true,
            pattern_kind: MorphismKind::Embedding,
            color: None,
        }
        .find()?
        .map(|am| am.c)
        .ok_or_else(|| {
            Error::AmalgamationFailed(format!(
                "no amalgam of size <= {} completes task {} (extend {} -> {})",
                search_caps.carrier_cap, task.id, task.small.size, task.big.size
            ))
        }),
    }
}

/// Builds chain stages by FIFO saturation of all extension tasks with big
/// side of size ≤ `k`. `budget` caps the number of stages.
pub fn saturate_limit(
    spec: &AgeSpec,
    k: usize,
    budget: usize,
    caps: &Caps,
) -> Result<LimitBuild> {
    saturate_limit_from(spec, k, budget, caps, RelStructure::empty(spec.signature.clone(), 0))
}

/// Same as `saturate_limit`, but starting from a given stage-0 structure
/// (which must be a member or the empty structure).
pub fn saturate_limit_from(
    spec: &AgeSpec,
    k: usize,
    budget: usize,
    caps: &Caps,
    stage0: RelStructure,
) -> Result<LimitBuild> {
    let pairs = task_pairs(spec, k, caps)?;
    let mut stages = vec![ChainStage { index: 0, structure: stage0, link: None }];
    let mut queue: std::collections::VecDeque<ExtensionTask> = Default::default();
    let mut manifest = SaturationManifest {
        k,
        budget,
        tasks_enqueued: 0,
        tasks_discharged: 0,
        tasks_skipped: 0,
        open_tasks: 0,
        queue_capped: false,
        discharge_log: Vec::new(),
    };
    // enqueue every anchor of a task pair; with `from = Some(s)`, only
    // anchors touching a vertex at index >= s (the fresh part of the stage)
    let enqueue = |stage: &RelStructure,
                   from: Option<usize>,
                   queue: &mut std::collections::VecDeque<ExtensionTask>,
                   manifest: &mut SaturationManifest|
     -> Result<()> {
        // many pairs share a small side; enumerate its anchors only once
        let mut anchor_cache: Vec<(&RelStructure, Vec<Vec<usize>>)> = Vec::new();
        for (small, _, _) in &pairs {
            if anchor_cache.iter().any(|(s, _)| *s == small) {
                continue;
            }
            let mut anchors: Vec<Vec<usize>> =
                enumerate_morphisms(small, stage, MorphismKind::Embedding, caps, None)?
                    .into_iter()
                    .map(|m| m.map)
                    .collect();
            if let Some(s) = from {
                anchors.retain(|a| a.iter().any(|&v| v >= s));
            }
            anchor_cache.push((small, anchors));
        }
        for (small, big, emb) in &pairs {
            let anchors =
                &anchor_cache.iter().find(|(s, _)| *s == small).expect("cached above").1;
            for anchor in anchors {
                if queue.len() >= caps.queue_cap {
                    manifest.queue_capped = true;
                    return Ok(());
                }
                queue.push_back(ExtensionTask {
                    id: manifest.tasks_enqueued,
                    small: small.clone(),
                    big: big.clone(),
                    emb: emb.clone(),
                    anchor: anchor.clone(),
                });
                manifest.tasks_enqueued += 1;
            }
        }
        Ok(())
    };
    enqueue(&stages[0].structure, None, &mut queue, &mut manifest)?;
    while let Some(task) = queue.pop_front() {
        if stages.len() >= budget {
            queue.push_front(task);
            break;
        }
        let stage = stages.last().unwrap().structure.clone();
        let seed = PartialMap::from_pairs(
            task.emb.iter().copied().zip(task.anchor.iter().copied()),
        );
        if find_morphism(&task.big, &stage, MorphismKind::Embedding, &seed, None)?.is_some() {
            manifest.tasks_skipped += 1;
            manifest.discharge_log.push((task.id, DischargeAction::Skipped));
            continue;
        }
        let next = amalgamate_onto_stage(spec, caps, &stage, &task)?;
        manifest.tasks_discharged += 1;
        manifest
            .discharge_log
            .push((task.id, DischargeAction::Amalgamated { new_size: next.size }));
        let old_size = stage.size;
        let link = Morphism::verified(
            &stage,
            &next,
            (0..stage.size).collect(),
            MorphismKind::Embedding,
        )?;
        stages.push(ChainStage {
            index: stages.len(),
            structure: next.clone(),
            link: Some(MorphismRecord::from(&link)),
        });
        enqueue(&next, Some(old_size), &mut queue, &mut manifest)?;
    }
    manifest.open_tasks = queue.len();
    Ok(LimitBuild { stages, manifest })
}

/// Checks the k-extension property of `u`: every embedding of a member
/// `small` into `u` extends along every member embedding small ↪ big with
/// |big| ≤ k.
pub fn verify_extension_property(
    u: &RelStructure,
    spec: &AgeSpec,
    k: usize,
    caps: &Caps,
) -> Result<CheckReport> {
    let pairs = task_pairs(spec, k, caps)?;
    let mut instances: Vec<(usize, Vec<usize>)> = Vec::new();
    for (i, (small, _, _)) in pairs.iter().enumerate() {
        for anchor in enumerate_morphisms(small, u, MorphismKind::Embedding, caps, None)? {
            instances.push((i, anchor.map));
        }
    }
    let results: Result<Vec<(bool, Option<Witness>)>> = instances
        .par_iter()
        .enumerate()
        .map(|(idx, (i, anchor))| {
            let (small, big, emb) = &pairs[*i];
            let seed =
                PartialMap::from_pairs(emb.iter().copied().zip(anchor.iter().copied()));
            let extension = find_morphism(big, u, MorphismKind::Embedding, &seed, None)?;
            let ok = extension.is_some();
            let witness = (!ok || idx < WITNESS_SAMPLE).then(|| Witness::Extension {
                small: small.clone(),
                big: big.clone(),
                emb: MorphismRecord { map: emb.clone(), kind: MorphismKind::Embedding },
                anchor: MorphismRecord { map: anchor.clone(), kind: MorphismKind::Embedding },
                extension: extension.map(|m| MorphismRecord::from(&m)),
            });
            Ok((ok, witness))
        })
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
        property: "extension_property".to_string(),
        bound: k,
        verdict,
        instances_checked: instances.len(),
        witnesses,
        cap_bound: false,
        notes: vec![],
    })
}

/// A partial map inside `u` is a partial isomorphism when it is injective and
/// tuple-exact between its domain and range.
fn is_partial_iso(u: &RelStructure, piece: &[(usize, usize)]) -> bool {
    let mut img = vec![None; u.size];
    let mut pre = vec![None; u.size];
    for &(v, w) in piece {
        match (img[v], pre[w]) {
            (None, None) => {
                img[v] = Some(w);
                pre[w] = Some(v);
            }
            (Some(x), _) if x == w && pre[w] == Some(v) => {}
            _ => return false,
        }
    }
    for rel in 0..u.signature.len() {
        for t in &u.relations[rel] {
            if let Some(image) = t.iter().map(|&v| img[v]).collect::<Option<Vec<_>>>() {
                if !u.has_tuple(rel, &image) {
                    return false;
                }
            }
            if let Some(preimage) = t.iter().map(|&w| pre[w]).collect::<Option<Vec<_>>>() {
                if !u.has_tuple(rel, &preimage) {
                    return false;
                }
            }
        }
    }
    true
}

/// Back-and-forth: the piece survives `steps` rounds if every one-point
/// challenge on either side has an answer that itself survives the rest.
fn survives(u: &RelStructure, piece: &[(usize, usize)], steps: usize) -> bool {
    if steps == 0 {
        return true;
    }
    let dom: Vec<usize> = piece.iter().map(|&(v, _)| v).collect();
    let ran: Vec<usize> = piece.iter().map(|&(_, w)| w).collect();
    let answerable = |v: usize, forth: bool| -> bool {
        (0..u.size).any(|w| {
            let pair = if forth { (v, w) } else { (w, v) };
            let mut extended = piece.to_vec();
            extended.push(pair);
            is_partial_iso(u, &extended) && survives(u, &extended, steps - 1)
        })
    };
    (0..u.size).filter(|v| !dom.contains(v)).all(|v| answerable(v, true))
        && (0..u.size).filter(|w| !ran.contains(w)).all(|w| answerable(w, false))
}

fn survival_depth(u: &RelStructure, piece: &[(usize, usize)], steps: usize) -> usize {
    (0..=steps).rev().find(|&r| survives(u, piece, r)).unwrap_or(0)
}

/// For every isomorphism between induced substructures of `u` of size ≤ k,
/// reports how many back-and-forth rounds it survives; the verdict holds iff
/// every piece survives all `steps` rounds.
pub fn verify_partial_homogeneity(
    u: &RelStructure,
    _spec: &AgeSpec,
    k: usize,
    steps: usize,
    caps: &Caps,
) -> Result<CheckReport> {
    let mut pieces: Vec<Vec<(usize, usize)>> = Vec::new();
    let subsets: Vec<Vec<usize>> = (0u64..(1 << u.size))
        .filter(|m| (m.count_ones() as usize) <= k)
        .map(|m| (0..u.size).filter(|v| m & (1 << v) != 0).collect())
        .collect();
    for s in &subsets {
        let (is_, _) = u.induced_substructure(s)?;
        for t in &subsets {
            if t.len() != s.len() {
                continue;
            }
            let (it, _) = u.induced_substructure(t)?;
            for iso in enumerate_morphisms(&is_, &it, MorphismKind::Iso, caps, None)? {
                pieces.push(
                    s.iter()
                        .enumerate()
                        .map(|(i, &v)| (v, t[iso.map[i]]))
                        .collect(),
                );
            }
        }
    }
    let depths: Vec<usize> = pieces
        .par_iter()
        .map(|piece| survival_depth(u, piece, steps))
        .collect();
    let mut witnesses = Vec::new();
    let mut verdict = Verdict::HoldsUpToBound;
    let mut min_depth = steps;
    for (piece, &depth) in pieces.iter().zip(&depths) {
        min_depth = min_depth.min(depth);
        let failing = depth < steps;
        if failing || witnesses.len() < WITNESS_SAMPLE {
            witnesses.push(Witness::Homogeneity {
                piece_map: piece.clone(),
                rounds_requested: steps,
                rounds_survived: depth,
            });
        }
        if failing {
            verdict = Verdict::Fails;
            break;
        }
    }
    Ok(CheckReport {
        property: "partial_homogeneity".to_string(),
        bound: k,
        verdict,
        instances_checked: pieces.len(),
        witnesses,
        cap_bound: false,
        notes: vec![format!("minimum survival depth {min_depth} of {steps} rounds")],
    })
}
