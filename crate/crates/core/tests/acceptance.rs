//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any fails.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::{index::sample, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use morita_core::envelope::{build_envelope, ks_verify, saturation_split, EnvelopeError};
use morita_core::expander::{girth, spectral_gap};
use morita_core::graph::Graph;
use morita_core::group::GroupContext;
use morita_core::groupoid::{
    coboundary_cocycle, cocycle_from_labels, equivalence_check, germ_groupoid, pair_groupoid, random_groupoid, Cocycle,
    FiniteGroupoid, GroupoidError,
};
use morita_core::invmon::prefix::br_check_f_inverse;
use morita_core::invmon::Limits;
use morita_core::pbij::{Carrier, PartialBijection};
use morita_core::pipeline::{pipeline_monster_desk, PipelineConfig, RunManifest};
use morita_core::translations::{translation_family, verify_lemma_pts, verify_partition, PointSet};

struct Instance {
    name: String,
    points: PointSet,
}

fn instances() -> Vec<Instance> {
    let z = GroupContext::free_abelian(1).unwrap();
    let f2 = GroupContext::free(2).unwrap();
    let z2 = GroupContext::free_abelian(2).unwrap();
    let mut out = vec![
        Instance {
            name: "Z {0,1,2,4}".into(),
            points: PointSet::parse(&z, &["0", "1", "2", "4"]).unwrap(),
        },
        Instance {
            name: "F2 ball(1)".into(),
            points: PointSet::new(&f2, f2.ball(&f2.identity(), 1).unwrap().elements().to_vec()).unwrap(),
        },
    ];
    let ball = z2.ball(&z2.identity(), 3).unwrap();
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let mut idx = sample(&mut rng, ball.len(), 6).into_vec();
        idx.sort_unstable();
        out.push(Instance {
            name: format!("Z^2 ball(3) sample {seed}"),
            points: PointSet::new(&z2, idx.iter().map(|&i| ball.get(i).clone()).collect()).unwrap(),
        });
    }
    out
}

/// Germ cocycle of the translation monoid of `x`.
fn germ_cocycle(x: &PointSet) -> Result<(FiniteGroupoid, Cocycle), String> {
    let s = translation_family(x).monoid(Limits::default()).map_err(|e| e.to_string())?;
    let germs = germ_groupoid(&s).map_err(|e| e.to_string())?;
    let rho = cocycle_from_labels(&germs, &s).map_err(|e| e.to_string())?;
    Ok((germs.groupoid().clone(), rho))
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(failures: &[String], ok_detail: String, elapsed: Duration, budget: Option<Duration>) -> Outcome {
    let mut failures = failures.to_vec();
    if let Some(b) = budget {
        if elapsed > b {
            failures.push(format!("took {:.1} s, budget {:.0} s", elapsed.as_secs_f64(), b.as_secs_f64()));
        }
    }
    if failures.is_empty() {
        Outcome {
            pass: true,
            detail: format!("{ok_detail}, {:.2} s", elapsed.as_secs_f64()),
        }
    } else {
        Outcome {
            pass: false,
            detail: failures.join("; "),
        }
    }
}

fn c1(insts: &[Instance]) -> Outcome {
    let t = Instant::now();
    let mut failures = Vec::new();
    for inst in insts {
        match verify_lemma_pts(&translation_family(&inst.points), Limits::default()) {
            Ok(r) if r.all_pass() => {}
            Ok(r) => failures.push(format!("{}: {:?}", inst.name, r.outcome)),
            Err(e) => failures.push(format!("{}: {e}", inst.name)),
        }
    }
    outcome(&failures, format!("{} instances", insts.len()), t.elapsed(), Some(Duration::from_secs(60)))
}

fn c2(insts: &[Instance]) -> Outcome {
    let t = Instant::now();
    let mut failures = Vec::new();
    for inst in insts {
        let n = inst.points.len();
        let cert = verify_partition(&translation_family(&inst.points));
        // oracle: count covers of each pair directly from the definition
        let fam = translation_family(&inst.points);
        let ctx = inst.points.ctx();
        let mut covered_once = true;
        for x in 0..n {
            for y in 0..n {
                let covers = fam.members().iter().filter(|(_, t)| t.apply(x) == Some(y)).count();
                let g = ctx.mul(&ctx.inv(inst.points.get(y)).unwrap(), inst.points.get(x)).unwrap();
                let right_label = fam.get(&g).is_some_and(|t| t.apply(x) == Some(y));
                covered_once &= covers == 1 && right_label;
            }
        }
        let dom_sum: usize = fam.members().iter().map(|(_, t)| t.size()).sum();
        if !(cert.holds() && cert.domain_sum == n * n && dom_sum == n * n && covered_once) {
            failures.push(format!("{}: domain sum {} for |X| = {n}", inst.name, cert.domain_sum));
        }
    }
    outcome(&failures, format!("{} instances", insts.len()), t.elapsed(), None)
}

fn c3(insts: &[Instance]) -> Outcome {
    let t = Instant::now();
    let mut failures = Vec::new();
    for inst in insts {
        match germ_cocycle(&inst.points) {
            Ok((g, _)) => {
                let pair = pair_groupoid(&inst.points.format()).unwrap();
                let n = inst.points.len();
                if !equivalence_check(&g, &pair).equivalent || g.arrow_count() != n * n {
                    failures.push(format!("{}: {} arrows", inst.name, g.arrow_count()));
                }
            }
            Err(e) => failures.push(format!("{}: {e}", inst.name)),
        }
    }
    outcome(&failures, format!("{} instances", insts.len()), t.elapsed(), None)
}

fn c4(insts: &[Instance]) -> Outcome {
    let t = Instant::now();
    let mut failures = Vec::new();
    let mut cases: Vec<(String, Cocycle)> = Vec::new();

    let two = pair_groupoid(&["a".to_string(), "b".to_string()]).unwrap();
    let rho = coboundary_cocycle(&two, &[0, 1]).unwrap();
    // the classes at R are exactly {(a, n), (b, n − 1)} cut to the window
    let omega = build_envelope(&rho, 8).unwrap();
    let one = rho.ctx().parse_element("1").unwrap();
    for n in -7..=8i64 {
        let g = rho.ctx().parse_element(&n.to_string()).unwrap();
        let h = rho.ctx().mul(&g, &rho.ctx().inv(&one).unwrap()).unwrap();
        if omega.class_at(0, &g) != omega.class_at(1, &h) {
            failures.push(format!("two-point: (a,{n}) and (b,{}) not identified", n - 1));
        }
    }
    if omega.class_count() != 2 * 8 + 2 {
        failures.push(format!("two-point: {} classes", omega.class_count()));
    }
    cases.push(("two-point".into(), rho));
    for inst in insts {
        match germ_cocycle(&inst.points) {
            Ok((_, rho)) => cases.push((inst.name.clone(), rho)),
            Err(e) => failures.push(format!("{}: {e}", inst.name)),
        }
    }
    for (name, rho) in &cases {
        match ks_verify(rho, 8, 3, 2) {
            Ok(r) if r.equivalent && r.stable && r.radii.len() == 3 => {}
            Ok(r) => failures.push(format!("{name}: equivalent {} stable {}", r.equivalent, r.stable)),
            Err(e) => failures.push(format!("{name}: {e}")),
        }
    }
    outcome(&failures, format!("{} cocycles, R = 8..10", cases.len()), t.elapsed(), Some(Duration::from_secs(120)))
}

fn c5() -> Outcome {
    let t = Instant::now();
    let mut failures = Vec::new();
    let mut splits = 0usize;
    let mut rejections = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..50 {
        let g = random_groupoid(&mut rng, 30);
        let pot: Vec<i64> = (0..g.unit_count()).map(|_| rng.gen_range(-2..=2)).collect();
        let rho = coboundary_cocycle(&g, &pot).unwrap();
        let omega = build_envelope(&rho, 2).unwrap();
        let orbits = g.orbits();
        let k = orbits.len();
        for mask in 0..1u64 << k {
            let f: BTreeSet<usize> = (0..k).filter(|i| mask >> i & 1 == 1).flat_map(|i| orbits[i].clone()).collect();
            splits += 1;
            match saturation_split(&omega, &f) {
                Ok(split) => {
                    // oracle: count classes over F directly from the members
                    let direct = (0..omega.class_count())
                        .filter(|&c| omega.members(c).iter().all(|(u, _)| f.contains(u)))
                        .count();
                    if !split.holds()
                        || split.classes_in_f + split.classes_in_complement != omega.class_count()
                        || split.classes_in_f != direct
                    {
                        failures.push(format!("case {case}: split of {f:?} not additive"));
                    }
                }
                Err(e) => failures.push(format!("case {case}: saturated {f:?} rejected: {e}")),
            }
        }
        for _ in 0..20 {
            let f: BTreeSet<usize> = (0..g.unit_count()).filter(|_| rng.gen_bool(0.5)).collect();
            let saturated = orbits.iter().all(|o| o.iter().all(|u| f.contains(u)) || o.iter().all(|u| !f.contains(u)));
            if saturated {
                continue;
            }
            rejections += 1;
            match saturation_split(&omega, &f) {
                Err(EnvelopeError::Groupoid(GroupoidError::NotSaturated(w))) => {
                    let a = g.arrow(w.arrow_index);
                    let valid = g.units()[a.source] == w.source
                        && g.units()[a.target] == w.target
                        && a.name == w.arrow
                        && f.contains(&a.source) != f.contains(&a.target);
                    if !valid {
                        failures.push(format!("case {case}: invalid witness {w:?}"));
                    }
                }
                other => failures.push(format!("case {case}: unsaturated {f:?} gave {other:?}")),
            }
        }
    }
    if failures.len() > 5 {
        failures.truncate(5);
    }
    outcome(&failures, format!("{splits} splits, {rejections} rejections"), t.elapsed(), None)
}

fn c6() -> Outcome {
    let t = Instant::now();
    let mut failures = Vec::new();
    let mut triples = 0;
    for ctx in [GroupContext::free_abelian(1).unwrap(), GroupContext::free(2).unwrap()] {
        let r = br_check_f_inverse(&ctx, 4);
        triples += r.triples;
        if !r.holds() {
            failures.push(format!("{}: {:?}", ctx.kind(), r.witness));
        }
    }
    outcome(&failures, format!("{triples} bracketed triples"), t.elapsed(), Some(Duration::from_secs(10)))
}

/// Shortest cycle by enumerating simple paths from each start vertex
/// through larger vertices only.
fn brute_force_girth(g: &Graph) -> Option<usize> {
    fn extend(g: &Graph, start: usize, path: &mut Vec<usize>, best: &mut Option<usize>) {
        let last = *path.last().unwrap();
        for &w in g.neighbors(last) {
            if w == start && path.len() >= 3 {
                *best = Some(best.map_or(path.len(), |b| b.min(path.len())));
            } else if w > start && !path.contains(&w) {
                path.push(w);
                extend(g, start, path, best);
                path.pop();
            }
        }
    }
    let mut best = None;
    for s in 0..g.n() {
        extend(g, s, &mut vec![s], &mut best);
    }
    best
}

fn c7() -> Outcome {
    let t = Instant::now();
    let mut failures = Vec::new();
    let p = Graph::petersen();
    let gp = spectral_gap(&p).unwrap().gap;
    if girth(&p) != Some(5) || (gp - 2.0).abs() > 1e-9 {
        failures.push(format!("Petersen girth {:?} gap {gp}", girth(&p)));
    }
    let gk = spectral_gap(&Graph::complete(4)).unwrap().gap;
    if (gk - 4.0).abs() > 1e-9 {
        failures.push(format!("K4 gap {gk}"));
    }
    for n in [5usize, 10, 50, 200] {
        let gap = spectral_gap(&Graph::cycle(n)).unwrap().gap;
        let want = 2.0 - 2.0 * (2.0 * std::f64::consts::PI / n as f64).cos();
        if (gap - want).abs() > 1e-6 {
            failures.push(format!("C{n} gap {gap}, expected {want}"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut compared = 0;
    for _ in 0..100 {
        let n = rng.gen_range(3..=14usize);
        let p = rng.gen_range(0.15..0.6);
        let edges: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .filter(|_| rng.gen_bool(p))
            .collect();
        let g = Graph::new(n, &edges).unwrap();
        if n <= 10 {
            compared += 1;
            if girth(&g) != brute_force_girth(&g) {
                failures.push(format!("girth mismatch on {edges:?}"));
            }
        }
    }
    outcome(&failures, format!("{compared} girth comparisons"), t.elapsed(), None)
}

fn random_pbij(rng: &mut ChaCha8Rng, c: &std::sync::Arc<Carrier>) -> PartialBijection {
    let n = c.len();
    let mut targets: Vec<usize> = (0..n).collect();
    targets.shuffle(rng);
    let pairs: Vec<(usize, usize)> = (0..n).filter(|_| rng.gen_bool(0.7)).map(|x| (x, targets[x])).collect();
    PartialBijection::from_pairs(c, &pairs).unwrap()
}

fn random_restriction(rng: &mut ChaCha8Rng, s: &PartialBijection) -> PartialBijection {
    let pairs: Vec<(usize, usize)> = s.pairs().filter(|_| rng.gen_bool(0.6)).collect();
    PartialBijection::from_pairs(s.carrier(), &pairs).unwrap()
}

fn graph(s: &PartialBijection) -> BTreeSet<(usize, usize)> {
    s.pairs().collect()
}

fn c8() -> Outcome {
    let t = Instant::now();
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..10_000 {
        let c = Carrier::range(rng.gen_range(1..=8));
        let (s, t2, u) = (random_pbij(&mut rng, &c), random_pbij(&mut rng, &c), random_pbij(&mut rng, &c));
        let comp = |a: &PartialBijection, b: &PartialBijection| a.compose(b).unwrap();
        let mut ok = comp(&comp(&s, &t2), &u) == comp(&s, &comp(&t2, &u));
        let si = s.inverse();
        ok &= comp(&comp(&s, &si), &s) == s && comp(&comp(&si, &s), &si) == si && si.inverse() == s;
        ok &= comp(&s, &t2).inverse() == comp(&t2.inverse(), &si);

        // a chain r ≤ q ≤ u and an unrelated s
        let q = random_restriction(&mut rng, &u);
        let r = random_restriction(&mut rng, &q);
        let leq = |a: &PartialBijection, b: &PartialBijection| a.leq(b).unwrap();
        ok &= leq(&s, &s) && leq(&r, &q) && leq(&q, &u) && leq(&r, &u);
        ok &= !(leq(&s, &t2) && leq(&t2, &s)) || s == t2;
        for (a, b) in [(&s, &t2), (&r, &q), (&q, &u), (&s, &u), (&u, &q)] {
            let oracle = graph(a).is_subset(&graph(b));
            let by_domain = *a == comp(b, &a.domain_idempotent());
            let by_range = *a == comp(&a.range_idempotent(), b);
            ok &= leq(a, b) == oracle && oracle == by_domain && oracle == by_range;
        }
        if !ok {
            failures.push(format!("sample {i}: s = {s}, t = {t2}, u = {u}"));
            break;
        }
    }
    outcome(&failures, "10000 samples".into(), t.elapsed(), None)
}

fn c9() -> Outcome {
    let t = Instant::now();
    let mut failures = Vec::new();
    let configs = [
        r#"{"group": "Z", "points": [0, 1, 2, 4], "radius": 8, "margin": 3, "stability_steps": 2}"#,
        r#"{"group": "free2", "points": ["e", "a", "b", "A", "B"], "radius": 6, "margin": 2}"#,
        r#"{"group": "Z", "graph": {"n": 2, "edges": [[0, 1]]}, "embedding": [1, 1], "radius": 3, "margin": 1}"#,
    ];
    for text in configs {
        let run = || {
            let cfg = PipelineConfig::from_json_str(text).unwrap();
            pipeline_monster_desk(&cfg, RunManifest::new("pipeline", "acceptance").input("config", text.as_bytes()))
                .unwrap()
                .files()
        };
        let (a, b) = (run(), run());
        if a != b {
            failures.push(format!("bundles differ for {text}"));
        }
    }
    outcome(&failures, format!("{} configs", configs.len()), t.elapsed(), None)
}

fn main() -> ExitCode {
    let insts = instances();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("1 lemma suite", Box::new(|| c1(&insts))),
        ("2 partition law", Box::new(|| c2(&insts))),
        ("3 germ/pair collapse", Box::new(|| c3(&insts))),
        ("4 envelope equivalence", Box::new(|| c4(&insts))),
        ("5 saturation suite", Box::new(c5)),
        ("6 prefix expansion", Box::new(c6)),
        ("7 spectral fixtures", Box::new(c7)),
        ("8 order theory", Box::new(c8)),
        ("9 determinism", Box::new(c9)),
    ];
    let mut all = true;
    for (name, f) in &criteria {
        let o = f();
        all &= o.pass;
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
