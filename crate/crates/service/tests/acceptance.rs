//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;
#[path = "../../core/tests/common/mod.rs"]
mod oracles;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use iw_core::archive::journal::journal_path;
use iw_core::archive::{ElementDraft, ErrorClass, Via};
use iw_core::retrieval::{build_index, contextual_search, search, DocMeta, PostingsIndex, Tokenizer, WorkContext};
use iw_core::schema::{categorical_context, LinkKind, SchemaRef};
use iw_core::{Archive, ArchiveError, ArchiveOptions, Index, ScoringParams};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn scenario_fidelity() -> Outcome {
    let started = Instant::now();
    let (a, b) = oracles::replay("patient-a.scenario.json", 1);
    let ctx = a.episodic_context(&b["dd"], 1).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    let got: BTreeMap<String, Vec<Via>> = ctx
        .nodes
        .iter()
        .filter(|n| n.ie != b["dd"])
        .map(|n| (n.ie.clone(), n.via.clone()))
        .collect();
    let want = BTreeMap::from([
        (b["case"].clone(), vec![Via::DsOut]),
        (b["ii"].clone(), vec![Via::RsOut]),
        (b["tr"].clone(), vec![Via::RsOut]),
        (b["tp"].clone(), vec![Via::DsIn]),
    ]);
    ensure(got == want, || format!("context of DD was {got:?}"))?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("4 neighbors with exact relations, {elapsed:.2?}"))
}

fn traversal_oracles() -> Outcome {
    let mut checked = 0;
    let mut mismatches = Vec::new();
    for script in ["patient-a.scenario.json", "two-patients.scenario.json"] {
        let (a, _) = oracles::replay(script, 2);
        for ie in a.elements() {
            for depth in 1..=4 {
                let ctx = a.episodic_context(&ie.id, depth).map_err(|e| e.to_string())?;
                let got: BTreeMap<String, (u32, BTreeSet<String>)> = ctx
                    .nodes
                    .iter()
                    .map(|n| {
                        let labels = n
                            .via
                            .iter()
                            .map(|v| serde_json::to_value(v).unwrap().as_str().unwrap().to_owned())
                            .collect();
                        (n.ie.clone(), (n.hops, labels))
                    })
                    .collect();
                checked += 1;
                if got != oracles::episodic_oracle(&a, &ie.id, depth) {
                    mismatches.push(format!("{script}:{}@{depth}", ie.id));
                }
            }
        }
    }
    let schema = oracles::patient_care();
    for act in &schema.activities {
        for r in 0..=4 {
            let ctx = categorical_context(&schema, &act.id, r).map_err(|e| e.to_string())?;
            let hops = |v: &[iw_core::schema::ContextActivity]| -> BTreeMap<String, u32> {
                v.iter().map(|x| (x.id.clone(), x.hops)).collect()
            };
            checked += 1;
            if (hops(&ctx.before), hops(&ctx.after)) != oracles::flow_oracle(&schema, &act.id, r) {
                mismatches.push(format!("categorical {}@{r}", act.id));
            }
        }
    }
    ensure(mismatches.is_empty(), || format!("mismatches: {mismatches:?}"))?;
    Ok(format!("{checked} comparisons, 0 mismatches"))
}

const VOCAB: &[&str] = &[
    "fever", "cough", "rash", "fracture", "viral", "dengue", "malaria", "platelets", "fluids", "rest",
    "chest", "pain", "x", "Fever", "blood", "smear", "acute", "mild", "plan", "test",
];
const CATEGORIES: &[&str] = &["case", "initial-impression", "test-result", "differential-diagnostic", "treatment-plan"];

fn scoring_oracles() -> Outcome {
    let schema = oracles::patient_care();
    let params = ScoringParams::default();
    let neutral = params.with_boost(0.0);
    let mut corpora = 0;
    let mut queries = 0;
    let mut worst: f64 = 0.0;
    for seed in 0..25u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(1..=50);
        let docs: Vec<(String, String, String)> = (0..n)
            .map(|i| {
                let len = rng.random_range(0..20);
                let body = (0..len).map(|_| *VOCAB.choose(&mut rng).unwrap()).collect::<Vec<_>>().join(" ");
                (format!("d{i:03}"), CATEGORIES.choose(&mut rng).unwrap().to_string(), body)
            })
            .collect();
        let index: Index = PostingsIndex::from_documents(
            docs.iter().map(|(id, c, body)| {
                (id.as_str(), DocMeta { schema: SchemaRef::new("patient-care", 1), category: c.clone() }, body.as_str())
            }),
            Tokenizer::default(),
            0,
        );
        let plain: Vec<(String, String)> = docs.iter().map(|(i, _, b)| (i.clone(), b.clone())).collect();
        corpora += 1;
        for _ in 0..4 {
            let q = (0..rng.random_range(1..4)).map(|_| *VOCAB.choose(&mut rng).unwrap()).collect::<Vec<_>>().join(" ");
            let hits = search(&index, &q, n, &params);
            let want = oracles::oracle_ranking(&oracles::bm25_oracle(&plain, &q));
            ensure(hits.len() == want.len(), || format!("seed {seed} {q:?}: {} hits vs {}", hits.len(), want.len()))?;
            for (h, (id, s)) in hits.iter().zip(&want) {
                worst = worst.max((h.score - s).abs());
                ensure(&h.ie == id && (h.score - s).abs() < 1e-9, || format!("seed {seed} {q:?}: {} {} vs {id} {s}", h.ie, h.score))?;
            }
            for activity in ["admit", "examine", "diagnosis", "plan-treatment"] {
                let ctx = WorkContext {
                    instance: "ti-any".into(),
                    activity_category: activity.into(),
                    schema: SchemaRef::new("patient-care", 1),
                };
                let k = rng.random_range(1..=n + 1);
                let a = search(&index, &q, k, &neutral);
                let b = contextual_search(&index, &schema, &q, &ctx, k, false, &neutral).map_err(|e| e.to_string())?;
                ensure(a == b, || format!("parity broke: seed {seed} {q:?} {activity}"))?;
            }
            queries += 1;
        }
    }
    Ok(format!("{corpora} corpora, {queries} queries, max |error| {worst:.1e}, parity on all"))
}

fn boost_behavior() -> Outcome {
    let (a, b) = oracles::replay("boost.scenario.json", 1);
    let schema = oracles::patient_care();
    let index: Index = build_index(&a, Tokenizer::default());
    let ctx = WorkContext {
        instance: b["ti"].clone(),
        activity_category: "diagnosis".into(),
        schema: SchemaRef::new("patient-care", 1),
    };
    let mut checked = Vec::new();
    for w in [0.0, 0.1, 0.5, 1.0, 2.0, 5.0] {
        let hits = contextual_search(&index, &schema, "fever", &ctx, 10, false, &ScoringParams::default().with_boost(w))
            .map_err(|e| e.to_string())?;
        let pos = |id: &str| hits.iter().position(|h| h.ie == id).unwrap();
        let (dd, tp) = (pos(&b["dd"]), pos(&b["tp"]));
        if w > 0.0 {
            ensure(hits[dd].score > hits[tp].score && dd < tp, || format!("w={w}: DD did not outrank TP"))?;
        } else {
            ensure(hits[dd].score == hits[tp].score, || "w=0: scores differ".into())?;
            let first = if b["dd"] < b["tp"] { dd } else { tp };
            ensure(first < dd.max(tp), || "w=0: tie not broken by id".into())?;
        }
        checked.push(w.to_string());
    }
    Ok(format!("w in {{{}}}", checked.join(", ")))
}

fn replay_determinism() -> Outcome {
    let (source, _) = oracles::replay("two-patients.scenario.json", 99);
    let journal = source.memory_journal().unwrap().join("\n") + "\n";
    let mut exports = Vec::new();
    let mut indexes = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        fs::write(journal_path(dir.path()), &journal).map_err(|e| e.to_string())?;
        let a = Archive::open(dir.path(), ArchiveOptions::default()).map_err(|e| e.to_string())?;
        exports.push(a.canonical_export());
        for _ in 0..2 {
            let index: Index = build_index(&a, Tokenizer::default());
            indexes.push(index.to_canonical_json());
        }
    }
    ensure(exports[0] == exports[1], || "exports differ".into())?;
    ensure(exports[0] == source.canonical_export(), || "replayed export differs from source".into())?;
    ensure(indexes.windows(2).all(|w| w[0] == w[1]), || "index rebuilds differ".into())?;
    Ok(format!("{} export bytes, {} index bytes, identical", exports[0].len(), indexes[0].len()))
}

/// Picks a random id from `pool`, or a bogus one.
fn pick(rng: &mut ChaCha8Rng, pool: &[String], bogus: &str) -> String {
    if pool.is_empty() || rng.random_bool(0.1) {
        bogus.to_owned()
    } else {
        pool.choose(rng).unwrap().clone()
    }
}

fn random_sequences() -> Outcome {
    const SEQUENCES: u64 = 10_000;
    let schema = oracles::patient_care();
    let activities: Vec<&str> = schema.activities.iter().map(|a| a.id.as_str()).chain(["surgery"]).collect();
    let contents: Vec<&str> = schema.contents.iter().map(|c| c.id.as_str()).chain(["x-ray"]).collect();
    let mut accepted = 0u64;
    let mut rejected: BTreeMap<&'static str, u64> = BTreeMap::new();
    for seed in 0..SEQUENCES {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = Archive::in_memory(ArchiveOptions::seeded(seed));
        a.register_schema(schema.clone()).map_err(|e| e.to_string())?;
        let (mut tis, mut ais, mut ies) = (Vec::<String>::new(), Vec::<String>::new(), Vec::<String>::new());
        let ops = rng.random_range(5..40);
        for _ in 0..ops {
            let result: Result<(), ArchiveError> = match rng.random_range(0..10) {
                0 => {
                    let r = if rng.random_bool(0.9) { SchemaRef::new("patient-care", 1) } else { SchemaRef::new("other", 1) };
                    a.begin_instance(&r, "t", "u").map(|t| tis.push(t.id))
                }
                1 | 2 => {
                    let ti = pick(&mut rng, &tis, "ti-bogus");
                    let cat = *activities.choose(&mut rng).unwrap();
                    a.begin_activity(&ti, cat).map(|x| ais.push(x.id))
                }
                3 => {
                    let ai = pick(&mut rng, &ais, "ai-bogus");
                    a.end_activity(&ai).map(drop)
                }
                4 => {
                    let ti = pick(&mut rng, &tis, "ti-bogus");
                    a.close_instance(&ti).map(drop)
                }
                5..=7 => {
                    let ti = pick(&mut rng, &tis, "ti-bogus");
                    // usually the instance's own active activity, sometimes anything
                    let ai = match a.active_activity(&ti) {
                        Some(x) if rng.random_bool(0.8) => x.id.clone(),
                        _ => pick(&mut rng, &ais, "ai-bogus"),
                    };
                    let n_ds = rng.random_range(0..3);
                    let n_rs = rng.random_range(0..3);
                    let draft = ElementDraft {
                        instance: ti,
                        activity: ai,
                        category: contents.choose(&mut rng).unwrap().to_string(),
                        author: ["u", "v", "w"].choose(&mut rng).unwrap().to_string(),
                        body: if rng.random_bool(0.95) { "fever noted".into() } else { " ".into() },
                        attachments: Vec::new(),
                        ds_targets: (0..n_ds).map(|_| pick(&mut rng, &ies, "ie-bogus")).collect(),
                        rs_targets: (0..n_rs).map(|_| pick(&mut rng, &ies, "ie-bogus")).collect(),
                        force: rng.random_bool(0.3),
                    };
                    a.record_element(draft).map(|r| ies.push(r.element.id))
                }
                8 => {
                    let from = pick(&mut rng, &ies, "ie-bogus");
                    let to = pick(&mut rng, &ies, "ie-bogus");
                    let kind = if rng.random_bool(0.5) { LinkKind::Ds } else { LinkKind::Rs };
                    a.link_elements(&from, &to, kind, None).map(drop)
                }
                _ => {
                    let ie = pick(&mut rng, &ies, "ie-bogus");
                    a.retract_element(&ie, None).map(drop)
                }
            };
            match result {
                Ok(()) => accepted += 1,
                Err(e) => {
                    ensure(e.class() != ErrorClass::Storage, || format!("seed {seed}: storage error {e}"))?;
                    *rejected.entry(e.code()).or_default() += 1;
                }
            }
        }
        let report = a.integrity_check();
        ensure(report.errors.is_empty(), || format!("seed {seed}: {:?}", report.errors))?;
    }
    let total_rejected: u64 = rejected.values().sum();
    Ok(format!(
        "{SEQUENCES} sequences, {accepted} accepted ops, {total_rejected} rejected across {} error codes, 0 integrity errors",
        rejected.len()
    ))
}

fn api_engine_equivalence(rt: &tokio::runtime::Runtime) -> Outcome {
    let mut done = Vec::new();
    for (i, script) in ["patient-a.scenario.json", "two-patients.scenario.json", "boost.scenario.json"]
        .iter()
        .enumerate()
    {
        let seed = 500 + i as u64;
        let (engine, engine_ids) = common::replay_on_engine(script, seed);
        let app = common::TestApp::seeded(seed);
        let api_ids = rt.block_on(common::replay_over_http(&app, script));
        ensure(engine_ids == api_ids, || format!("{script}: id bindings differ"))?;
        ensure(app.export() == engine.canonical_export(), || format!("{script}: exports differ"))?;
        done.push(*script);
    }
    Ok(format!("identical exports for {}", done.join(", ")))
}

fn main() -> ExitCode {
    let rt = tokio::runtime::Builder::new_current_thread().enable_all().build().unwrap();
    let criteria: Vec<Criterion> = vec![
        ("scenario fidelity: episodic context of DD", Box::new(scenario_fidelity)),
        ("oracle equivalence: traversal", Box::new(traversal_oracles)),
        ("oracle equivalence: scoring and w=0 parity", Box::new(scoring_oracles)),
        ("boost behavior on identical bodies", Box::new(boost_behavior)),
        ("replay determinism: export and index", Box::new(replay_determinism)),
        ("invariant suite: randomized operation sequences", Box::new(random_sequences)),
        ("API/engine export equivalence", Box::new(move || api_engine_equivalence(&rt))),
    ];
    let mut failed = 0;
    for (name, run) in &criteria {
        let started = Instant::now();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(run))
            .unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{:.2?}]", started.elapsed()),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
