//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line. Expected verdicts are checked exactly, with independent
//! oracles wherever a result can be recomputed a second way.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use forge_core::age::AgeSpec;
use forge_core::cert::{bracket_closure_certificate, verify_certificate, Certificate};
use forge_core::checks::{check_amalg_ext, check_ap, check_hap, check_strict_ap};
use forge_core::clone::{
    build_eps_chain, cayley_depth, decompose_polymorphism, polymorphisms, projection,
    superpose, CayleyDepth, CloneFragment, OpTable, StagedRetraction,
};
use forge_core::comma::{
    build_universal_hom, check_target_extension, extract_section, verify_universality,
    CommaObject, Scenario,
};
use forge_core::fraisse::{saturate_limit, verify_extension_property};
use forge_core::morphism::{enumerate_morphisms, find_embedding, find_homomorphism, PartialMap};
use forge_core::report::Witness;
use forge_core::structure::zoo;
use forge_core::{Caps, MorphismKind, RelStructure, Signature};

fn conclude(n: usize, desc: &str, ok: bool) {
    println!("criterion {n} ({desc}): {}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n} ({desc}) failed");
}

fn timed<T>(budget: Duration, f: impl FnOnce() -> T) -> (T, bool) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed() <= budget)
}

#[test]
fn criterion_1_age_classifications_at_three() {
    let caps = Caps::default();
    let minute = Duration::from_secs(60);
    let graphs = AgeSpec::simple_graphs();
    let chains = AgeSpec::chains();
    let posets = AgeSpec::strict_posets();
    let mut ok = true;

    let (r, in_time) = timed(minute, || check_ap(&graphs, 3, &caps).unwrap());
    ok &= r.holds() && in_time;
    let (r, in_time) = timed(minute, || check_strict_ap(&graphs, 3, 3, &caps).unwrap());
    ok &= r.holds() && in_time;
    let (r, in_time) = timed(minute, || check_hap(&graphs, 3, &caps).unwrap());
    ok &= r.holds() && in_time;

    let (r, in_time) = timed(minute, || check_amalg_ext(&chains, 3, &caps).unwrap());
    ok &= r.holds() && in_time;
    let (r, in_time) = timed(minute, || check_strict_ap(&chains, 3, 3, &caps).unwrap());
    ok &= !r.holds() && in_time;

    let (r, in_time) = timed(minute, || check_hap(&posets, 3, &caps).unwrap());
    ok &= r.holds() && in_time;

    conclude(1, "age classifications at n=3", ok);
}

#[test]
fn criterion_2_graph_limit_has_two_extension_property() {
    let caps = Caps::default();
    let spec = AgeSpec::simple_graphs();
    let ((build, report, outcome), in_time) = timed(Duration::from_secs(60), || {
        let build = saturate_limit(&spec, 2, 64, &caps).unwrap();
        let report = verify_extension_property(build.last_stage(), &spec, 2, &caps).unwrap();
        let cert = Certificate::limit(
            spec.clone(),
            2,
            64,
            build.stages.clone(),
            build.manifest.clone(),
            report.clone(),
        );
        let outcome = verify_certificate(&cert, &caps).unwrap();
        (build, report, outcome)
    });
    let ok = build.manifest.open_tasks == 0
        && report.holds()
        && report.instances_checked > 0
        && outcome.ok()
        && in_time;
    conclude(2, "saturated graph stage passes exhaustive 2-extension", ok);
}

#[test]
fn criterion_3_universal_three_colored_stage() {
    let mut caps = Caps::default();
    caps.queue_cap = 20_000;
    let spec = AgeSpec::simple_graphs();
    let k3 = zoo::clique(3);
    let scenario = Scenario::new(spec, k3.clone(), 3, 90).unwrap();
    let build = build_universal_hom(&scenario, &caps, None).unwrap();
    let stage = build.last_stage();

    // every proper coloring of every <=3-vertex graph embeds color-compatibly
    let universality = verify_universality(stage, &scenario, 3, &caps).unwrap();
    let mut ok = universality.holds() && universality.instances_checked >= 80;

    // the coloring is a retraction: it has a verified section
    let section = extract_section(stage, &scenario, &caps).unwrap();
    match section {
        Some(sec) => {
            ok &= (0..k3.size).all(|tv| stage.coloring[sec.map[tv]] == tv);
        }
        None => ok = false,
    }

    // colorings do not extend over all graphs: the first failure is a
    // 4-clique-type witness with no coloring at all
    let ext = check_target_extension(&scenario, 4, &caps).unwrap();
    ok &= !ext.holds();
    match ext.counterexample() {
        Some(Witness::TargetExtension { b, extension, .. }) => {
            ok &= extension.is_none()
                && b.size == 4
                && find_homomorphism(b, &k3, &PartialMap::empty()).unwrap().is_none();
        }
        _ => ok = false,
    }
    conclude(3, "universal homomorphism stage over the triangle", ok);
}

#[test]
fn criterion_4_leveled_dag_universality() {
    let mut caps = Caps::default();
    caps.queue_cap = 20_000;
    let spec = AgeSpec::oracle(forge_core::age::Oracle::SimpleDigraphs);
    let t4 = zoo::transitive_tournament(4);
    let scenario = Scenario::new(spec, t4, 3, 50).unwrap();
    let build = build_universal_hom(&scenario, &caps, None).unwrap();
    let report = verify_universality(build.last_stage(), &scenario, 3, &caps).unwrap();
    let ok = report.holds() && report.instances_checked >= 100;
    conclude(4, "universality for leveled DAGs over the 4-chain", ok);
}

#[test]
fn criterion_5_staged_polymorphism_decomposition() {
    let caps = Caps::default();
    let small = zoo::clique(2);
    let square = small.direct_product(&small, &caps).unwrap();
    // saturate over the square itself, starting from the square with the
    // identity coloring, so the final coloring retracts onto the prefix
    let scenario = Scenario::new(AgeSpec::simple_graphs(), square.clone(), 2, 24).unwrap();
    let init =
        CommaObject::verified(square.clone(), (0..square.size).collect(), &square).unwrap();
    let build = build_universal_hom(&scenario, &caps, Some(init)).unwrap();
    let stage = build.last_stage();
    let sr = StagedRetraction::new(
        small.clone(),
        stage.structure.clone(),
        stage.coloring.clone(),
        (0..square.size).collect(),
        &caps,
    )
    .unwrap();

    let chain = build_eps_chain(&sr, 2).unwrap();
    let mut ok = chain.levels.len() == 2;
    for lvl in &chain.levels {
        // nonempty tracked domain, and the retraction identity re-checked
        // point by point
        ok &= !lvl.eps.is_empty();
        for (args, image) in &lvl.eps {
            ok &= &lvl.r[*image] == args;
        }
    }

    // at least 10 searched binary polymorphisms decompose exactly
    let polys = polymorphisms(&sr.big, 2, &caps, Some(12)).unwrap();
    let ops: Vec<OpTable> = polys.ops.into_iter().collect();
    ok &= ops.len() >= 10;
    let m = small.size;
    for f in &ops {
        let d = decompose_polymorphism(f, &sr, &chain, &caps).unwrap();
        ok &= d.checked_points > 0;
        // independent round-trip: f(x, y) = (f ∘ r)(ε(x, y)) on the domain
        for x in 0..m {
            for y in 0..m {
                let e = sr.eps_at(x, y).unwrap();
                ok &= f.eval(&[x, y]) == d.unary.eval(&[e]);
            }
        }
    }
    conclude(5, "staged retraction decomposes binary polymorphisms", ok);
}

/// Every `arity`-ary operation table on `{0..q-1}`.
fn all_tables(q: usize, arity: usize) -> Vec<OpTable> {
    let rows = q.pow(arity as u32);
    let count = q.pow(rows as u32);
    (0..count)
        .map(|mut code| {
            let mut table = vec![0usize; rows];
            for slot in table.iter_mut().rev() {
                *slot = code % q;
                code /= q;
            }
            OpTable::new(q, arity, table).unwrap()
        })
        .collect()
}

#[test]
fn criterion_6_binary_tables_generate_ternary_ones() {
    let mut caps = Caps::default();
    caps.depth_cap = 8;
    let gens = CloneFragment::new(2, all_tables(2, 2)).unwrap();
    let target: BTreeSet<OpTable> = all_tables(2, 3).into_iter().collect();
    let ((depth, oracle), in_time) = timed(Duration::from_secs(10), || {
        let depth = cayley_depth(&gens, 3, &target, &caps).unwrap();
        // independent oracle: plain breadth-first closure by superposition
        let mut current: BTreeSet<OpTable> =
            (1..=3).map(|i| projection(2, 3, i).unwrap()).collect();
        let mut oracle = None;
        for d in 0..=caps.depth_cap {
            if target.is_subset(&current) {
                oracle = Some(d);
                break;
            }
            let snapshot: Vec<OpTable> = current.iter().cloned().collect();
            for f in &gens.ops {
                for g1 in &snapshot {
                    for g2 in &snapshot {
                        current.insert(superpose(f, &[g1, g2]).unwrap());
                    }
                }
            }
        }
        (depth, oracle)
    });
    let ok = match (depth, oracle) {
        (CayleyDepth::Bounded(n), Some(m)) => n == m && in_time,
        _ => false,
    };
    conclude(6, "binary tables generate all ternary tables at q=2", ok);
}

mod clone_laws {
    use super::*;
    use forge_core::clone::{bracket, complex_product, generate_clone};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_table(rng: &mut ChaCha8Rng, q: usize, arity: usize) -> OpTable {
        let rows = q.pow(arity as u32);
        OpTable::new(q, arity, (0..rows).map(|_| rng.gen_range(0..q)).collect()).unwrap()
    }

    fn random_fragment(rng: &mut ChaCha8Rng, q: usize) -> CloneFragment {
        let ops: Vec<OpTable> = (0..rng.gen_range(1..=2))
            .map(|_| {
                let arity = rng.gen_range(1..=2);
                random_table(rng, q, arity)
            })
            .collect();
        CloneFragment::new(q, ops).unwrap()
    }

    #[test]
    fn criterion_7_clone_laws_hold_on_random_instances() {
        let mut caps = Caps::default();
        caps.enumeration_cap = 20_000_000;
        let mut rng = ChaCha8Rng::seed_from_u64(0x7a3e);
        let mut violations = 0usize;

        // associativity of the complex product, with a clone in the middle
        // (on arbitrary fragments only right-nesting inclusion holds)
        for _ in 0..100 {
            let u1 = random_fragment(&mut rng, 2);
            let u3 = random_fragment(&mut rng, 2);
            let seed_arity = rng.gen_range(1..=2);
            let seed = random_table(&mut rng, 2, seed_arity);
            let (u2, stabilized) = generate_clone(
                &CloneFragment::new(2, [seed]).unwrap(),
                2,
                8,
                &caps,
            )
            .unwrap();
            assert!(stabilized);
            let left =
                complex_product(&complex_product(&u1, &u2, &caps).unwrap(), &u3, &caps).unwrap();
            let right =
                complex_product(&u1, &complex_product(&u2, &u3, &caps).unwrap(), &caps).unwrap();
            if left != right {
                violations += 1;
            }
        }

        // bracket monotonicity
        for _ in 0..100 {
            let u = random_fragment(&mut rng, 2);
            let k = rng.gen_range(1..=2);
            let levels = bracket(&u, k, 3, &caps).unwrap();
            for w in levels.windows(2) {
                if !w[0].is_subset(&w[1]) {
                    violations += 1;
                }
            }
        }

        // U^{[l,n]} · U^{[k,m]} ⊆ U^{[k,n+m]}
        for _ in 0..100 {
            let u = random_fragment(&mut rng, 2);
            let l = rng.gen_range(1..=2);
            let k = rng.gen_range(1..=2);
            let n = rng.gen_range(1..=3);
            let m = rng.gen_range(1..=3);
            let left_levels = bracket(&u, l, n, &caps).unwrap();
            let right_levels = bracket(&u, k, m.max(n + m), &caps).unwrap();
            let lhs = complex_product(
                &CloneFragment { q: 2, ops: left_levels[n].clone() },
                &CloneFragment { q: 2, ops: right_levels[m].clone() },
                &caps,
            )
            .unwrap();
            if !lhs.ops.is_subset(&right_levels[n + m]) {
                violations += 1;
            }
        }

        conclude(7, "clone laws on 300 random instances", violations == 0);
    }
}

/// All structures over the graph signature on `n` labeled points.
fn all_structures(n: usize) -> Vec<RelStructure> {
    let sig = Signature::graph();
    let tuples: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    (0u32..1 << tuples.len())
        .map(|mask| {
            let mut s = RelStructure::empty(sig.clone(), n);
            for (b, &(i, j)) in tuples.iter().enumerate() {
                if mask & (1 << b) != 0 {
                    s.add_tuple(0, vec![i, j]);
                }
            }
            s
        })
        .collect()
}

/// Brute-force morphism count by sweeping every total map.
fn brute_count(s: &RelStructure, t: &RelStructure, kind: MorphismKind) -> usize {
    if t.size == 0 {
        return usize::from(s.size == 0);
    }
    let mut map = vec![0usize; s.size];
    let mut count = 0;
    loop {
        let hom = s.relations.iter().enumerate().all(|(sym, rel)| {
            rel.iter().all(|tuple| {
                t.has_tuple(sym, &tuple.iter().map(|&v| map[v]).collect::<Vec<_>>())
            })
        });
        let good = hom
            && (kind == MorphismKind::Hom || {
                let injective =
                    (0..s.size).all(|a| (a + 1..s.size).all(|b| map[a] != map[b]));
                injective
                    && t.relations.iter().enumerate().all(|(sym, rel)| {
                        rel.iter().all(|tuple| {
                            let pre: Option<Vec<usize>> = tuple
                                .iter()
                                .map(|&v| map.iter().position(|&w| w == v))
                                .collect();
                            match pre {
                                Some(pre) => s.has_tuple(sym, &pre),
                                None => true,
                            }
                        })
                    })
            });
        if good {
            count += 1;
        }
        // next map in lexicographic order
        let mut pos = s.size;
        loop {
            if pos == 0 {
                return count;
            }
            pos -= 1;
            map[pos] += 1;
            if map[pos] < t.size {
                break;
            }
            map[pos] = 0;
        }
    }
}

#[test]
fn criterion_8_search_agrees_with_exhaustive_enumeration() {
    let caps = Caps::default();
    let mut structures = Vec::new();
    for n in 0..=3 {
        structures.extend(all_structures(n));
    }
    let mut discrepancies = 0usize;
    for s in &structures {
        for t in &structures {
            for kind in [MorphismKind::Hom, MorphismKind::Embedding] {
                let expected = brute_count(s, t, kind);
                let found = match kind {
                    MorphismKind::Hom => find_homomorphism(s, t, &PartialMap::empty()).unwrap(),
                    _ => find_embedding(s, t, &caps).unwrap(),
                };
                if found.is_some() != (expected > 0) {
                    discrepancies += 1;
                }
                let listed = enumerate_morphisms(s, t, kind, &caps, None).unwrap();
                if listed.len() != expected {
                    discrepancies += 1;
                }
            }
        }
    }
    conclude(
        8,
        "searches agree with brute force on all pairs of size <= 3",
        discrepancies == 0,
    );
}

#[test]
fn criterion_9_certificates_accept_fresh_and_reject_tampered() {
    let caps = Caps::default();
    let graphs = AgeSpec::simple_graphs();

    let age_cert = Certificate::age_check(
        graphs.clone(),
        2,
        vec![
            check_ap(&graphs, 2, &caps).unwrap(),
            check_hap(&graphs, 2, &caps).unwrap(),
        ],
    );

    let build = saturate_limit(&graphs, 2, 64, &caps).unwrap();
    let ext = verify_extension_property(build.last_stage(), &graphs, 2, &caps).unwrap();
    let limit_cert =
        Certificate::limit(graphs.clone(), 2, 64, build.stages, build.manifest, ext);

    let scenario = Scenario::new(graphs.clone(), zoo::clique(2), 2, 64).unwrap();
    let cb = build_universal_hom(&scenario, &caps, None).unwrap();
    let uni = verify_universality(cb.last_stage(), &scenario, 2, &caps).unwrap();
    let uni_cert =
        Certificate::universal_hom(graphs.clone(), zoo::clique(2), 2, 64, cb.stages, uni);

    let mut clone_caps = caps.clone();
    clone_caps.depth_cap = 8;
    let nand = OpTable::new(2, 2, vec![1, 1, 1, 0]).unwrap();
    let gens = CloneFragment::new(2, [nand]).unwrap();
    let bracket_cert =
        bracket_closure_certificate(&gens, 2, &all_tables(2, 2), &clone_caps).unwrap();

    let small = zoo::edgeless(2);
    let big = small.direct_product(&small, &caps).unwrap();
    let sr = StagedRetraction::new(small, big.clone(), vec![0, 1, 2, 3], vec![0, 1, 2, 3], &caps)
        .unwrap();
    let chain = build_eps_chain(&sr, 2).unwrap();
    let decs: Vec<_> = polymorphisms(&big, 2, &caps, Some(4))
        .unwrap()
        .ops
        .into_iter()
        .map(|f| {
            let d = decompose_polymorphism(&f, &sr, &chain, &caps).unwrap();
            (f, d)
        })
        .collect();
    let dec_cert = Certificate::clone_decompose(sr, 2, decs);

    let fresh = [age_cert, limit_cert, uni_cert, bracket_cert, dec_cert];
    let mut ok = true;
    for cert in &fresh {
        let outcome = verify_certificate(cert, &caps).unwrap();
        ok &= outcome.ok();
    }

    // single-field mutation suite over the serialized forms; every entry
    // touches a claim the verifier re-checks
    type Mutation = (&'static str, &'static str, fn(&mut serde_json::Value));
    let mutations: Vec<Mutation> = vec![
        ("age_check", "report bound exceeds certificate bound", |v| {
            bump_int(&mut v["reports"][0]["bound"])
        }),
        ("age_check", "verdict flipped to fails", |v| {
            v["reports"][0]["verdict"] = "fails".into()
        }),
        ("age_check", "witness structure signature", |v| {
            bump_first_int(&mut v["reports"][0]["witnesses"][0])
        }),
        ("limit", "stage carrier grows", |v| bump_int(&mut v["stages"][1]["structure"]["size"])),
        ("limit", "report bound differs from k", |v| bump_int(&mut v["extension"]["bound"])),
        ("limit", "link entry redirected", |v| {
            let stages = v["stages"].as_array_mut().unwrap();
            let link = stages.last_mut().unwrap()["link"]["map"].as_array_mut().unwrap();
            link[0] = serde_json::Value::from(link[1].as_u64().unwrap());
        }),
        ("universal_hom", "coloring entry flipped", |v| {
            let stages = v["stages"].as_array_mut().unwrap();
            bump_int(&mut stages.last_mut().unwrap()["coloring"][0])
        }),
        ("universal_hom", "report bound differs from k", |v| {
            bump_int(&mut v["universality"]["bound"])
        }),
        ("universal_hom", "verdict flipped to fails", |v| {
            v["universality"]["verdict"] = "fails".into()
        }),
        ("universal_hom", "witness structure signature", |v| {
            bump_first_int(&mut v["universality"]["witnesses"][0])
        }),
        ("bracket_closure", "claimed depth shrunk", |v| {
            let n = v["depth"]["bounded"].as_u64().unwrap();
            v["depth"]["bounded"] = serde_json::Value::from(n - 1);
        }),
        ("bracket_closure", "witness operation detached from its term", |v| {
            bump_int(&mut v["terms"][0][0]["table"][0])
        }),
        ("bracket_closure", "generator table entry flipped", |v| {
            bump_first_int(&mut v["generators"]["ops"][0]["table"])
        }),
        ("clone_decompose", "retraction map entry", |v| {
            bump_int(&mut v["retraction"]["r"][0])
        }),
        ("clone_decompose", "section map entry", |v| bump_int(&mut v["retraction"]["eps"][0])),
        ("clone_decompose", "unary head entry", |v| {
            bump_int(&mut v["decompositions"][0][1]["unary"]["table"][0])
        }),
        ("clone_decompose", "decomposed operation entry", |v| {
            bump_int(&mut v["decompositions"][0][0]["table"][0])
        }),
    ];
    let mut tampered_total = 0usize;
    let mut rejected = 0usize;
    for cert in &fresh {
        let base = serde_json::to_value(cert).unwrap();
        for (kind, what, mutate) in &mutations {
            if *kind != cert.kind_name() {
                continue;
            }
            let mut v = base.clone();
            mutate(&mut v);
            assert_ne!(v, base, "mutation `{what}` did not change the certificate");
            tampered_total += 1;
            let accepted = match serde_json::from_value::<Certificate>(v) {
                Ok(c) => verify_certificate(&c, &caps).map(|o| o.ok()).unwrap_or(false),
                Err(_) => false, // structurally invalid: rejected at parse time
            };
            if accepted {
                println!("mutation not rejected: {kind}: {what}");
            } else {
                rejected += 1;
            }
        }
    }
    ok &= tampered_total == mutations.len() && rejected == tampered_total;
    conclude(9, "fresh certificates verify, tampered ones are rejected", ok);
}

/// Increments an integer leaf in place.
fn bump_int(v: &mut serde_json::Value) {
    let x = v.as_u64().expect("expected an integer leaf");
    *v = serde_json::Value::from(x + 1);
}

/// Increments the first integer leaf found in depth-first order.
fn bump_first_int(v: &mut serde_json::Value) {
    fn walk(v: &mut serde_json::Value) -> bool {
        match v {
            serde_json::Value::Number(n) => {
                if let Some(x) = n.as_u64() {
                    *v = serde_json::Value::from(x + 1);
                    true
                } else {
                    false
                }
            }
            serde_json::Value::Array(items) => items.iter_mut().any(walk),
            serde_json::Value::Object(map) => map.values_mut().any(walk),
            _ => false,
        }
    }
    walk(v);
}
