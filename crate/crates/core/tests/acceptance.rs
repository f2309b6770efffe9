//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fail. Pass a substring to run a subset.

mod common;

use craftsim_core::dataset::{
    emit_transitions, filter_runs, write_examples, DatasetStats, FilterPolicy, StatsTable, STATS_COLUMNS,
};
use craftsim_core::episode::{run_episode, Endpoints, EndReason, EpisodeConfig, EpisodeLog, Record, Role};
use craftsim_core::evaluator::{apply_fixes, blueprint_diff, score_blueprint, Score, ScoreDetail, ScoreKind};
use craftsim_core::oracle::OracleAgent;
use craftsim_core::task::generate::generate_construction_task;
use craftsim_core::task::split::goal_items;
use craftsim_core::task::{
    generate_blueprint, generate_cooking_task, generate_crafting_task, split_train_test, BlueprintConfig,
    CookingOptions, Domain, PlanBlocked, SplitKind, SplitSizes, TaskSpec, CRAFTING_TEST_ITEMS,
};
use craftsim_core::world::provision::{spawn_world_from_spec, ProvisionSpec, WorldKind};
use craftsim_core::AgentEndpoint;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

type Check = fn() -> Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn oracle_log(task: &TaskSpec, seed: u64) -> EpisodeLog {
    let mut eps: Endpoints =
        task.agent_names.iter().map(|n| (n.clone(), Box::new(OracleAgent::new()) as Box<dyn AgentEndpoint>)).collect();
    run_episode(&EpisodeConfig::new(task.clone(), seed), &mut eps).expect("episode runs")
}

fn solved(log: &EpisodeLog) -> bool {
    let (tick, reason, score) = log.end().unwrap();
    let max = log.task().unwrap().max_ticks();
    reason == EndReason::Completed && score.value == 1.0 && tick <= max
}

fn determinism() -> Result<String, String> {
    let start = Instant::now();
    let task = TaskSpec::load(&common::repo_root().join("fixtures/stone_pickaxe.json")).map_err(|e| e.to_string())?;
    let a = oracle_log(&task, 7).to_jsonl();
    let b = oracle_log(&task, 7).to_jsonl();
    let took = start.elapsed();
    ensure(a == b, || "two runs differ".into())?;
    ensure(took < Duration::from_secs(10), || format!("took {took:?}"))?;
    Ok(format!("{} lines identical, {:.0?}", a.lines().count(), took))
}

fn crafting_completeness() -> Result<String, String> {
    let start = Instant::now();
    let mut ok = 0;
    let mut failed = Vec::new();
    for i in 0..100u64 {
        let target = CRAFTING_TEST_ITEMS[i as usize % CRAFTING_TEST_ITEMS.len()];
        let task = generate_crafting_task(1_000_000 + i, 2, target, PlanBlocked::None).map_err(|e| e.to_string())?;
        if solved(&oracle_log(&task, i)) {
            ok += 1;
        } else {
            failed.push(task.task_name);
        }
    }
    let took = start.elapsed();
    ensure(ok >= 95, || format!("{ok}/100 solved, failed: {failed:?}"))?;
    ensure(took < Duration::from_secs(300), || format!("took {took:?}"))?;
    Ok(format!("{ok}/100 solved in {took:.1?}"))
}

const COOKING_TEST: [&str; 6] = ["cooked_mutton", "baked_potato", "cake", "golden_carrot", "mushroom_stew", "bread"];
const COOKING_TRAIN: [&str; 10] = [
    "cooked_beef",
    "cooked_porkchop",
    "cooked_chicken",
    "cooked_rabbit",
    "beetroot_soup",
    "rabbit_stew",
    "suspicious_stew",
    "cookie",
    "pumpkin_pie",
    "golden_apple",
];

fn cooking() -> Result<String, String> {
    let mut sets: Vec<Vec<&str>> = COOKING_TEST.iter().map(|i| vec![*i]).collect();
    for (a, x) in COOKING_TEST.iter().enumerate() {
        for y in &COOKING_TEST[a + 1..] {
            sets.push(vec![*x, *y]);
        }
    }
    let mut failed = Vec::new();
    for (i, items) in sets.iter().enumerate() {
        let opts = CookingOptions { items: Some(items.iter().map(|s| s.to_string()).collect()), ..Default::default() };
        let task = generate_cooking_task(i as u64, &opts).map_err(|e| e.to_string())?;
        if !solved(&oracle_log(&task, i as u64)) {
            failed.push(items.join("+"));
        }
    }
    ensure(failed.is_empty(), || format!("failed: {failed:?}"))?;

    let opts = CookingOptions {
        hells_kitchen: true,
        items: Some(vec!["baked_potato".into(), "cake".into()]),
        ..Default::default()
    };
    let task = generate_cooking_task(42, &opts).map_err(|e| e.to_string())?;
    let log = oracle_log(&task, 42);
    ensure(solved(&log), || "hell's kitchen run failed".into())?;
    let asks = log
        .chats()
        .filter(|r| matches!(r, Record::Chat { text, kind: craftsim_core::conversation::DeliveryKind::Chat, .. }
            if text.contains("recipe") && text.contains('?')))
        .count();
    ensure(asks >= 1, || "no recipe request in the chat log".into())?;
    Ok(format!("{} single/pair tasks solved, hell's kitchen solved with {asks} recipe requests", sets.len()))
}

fn fix_closure() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for i in 0..30u32 {
        let (m, r) = ((i % 3) as u8, ((i / 3) % 3) as u8);
        let cfg = BlueprintConfig::new(m, r, ((i / 9) % 3) as u8, ((i + i / 9) % 3) as u8, i).unwrap();
        let bp = generate_blueprint(cfg, 100 + i as u64).unwrap();
        let mut world = spawn_world_from_spec(&ProvisionSpec::new(WorldKind::ConstructionSuperflat), i as u64);
        let fixes = common::parse_fix_lines(&blueprint_diff(&world, &bp, None).unwrap());
        apply_fixes(&mut world, &bp, &fixes);
        let s = score_blueprint(&world, &bp).value;
        ensure(s == 1.0, || format!("{} scored {s} after applying every fix", bp.name()))?;

        let cells: Vec<_> = bp.cells().filter(|(_, _, m)| *m != "air").map(|(_, p, m)| (p, m.to_string())).collect();
        let total = cells.len();
        let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
        for _ in 0..5 {
            let mut world = spawn_world_from_spec(&ProvisionSpec::new(WorldKind::ConstructionSuperflat), i as u64);
            for (p, m) in cells.choose_multiple(&mut rng, total / 2) {
                world.put_block(*p, m);
            }
            let s = score_blueprint(&world, &bp).value;
            let err = (s - 0.5).abs();
            worst = worst.max(err * 2.0 * total as f64);
            ensure(err <= 1.0 / (2.0 * total as f64) + 1e-12, || format!("{} half-built scored {s}", bp.name()))?;
        }
    }
    Ok(format!("30 blueprints closed exactly; worst half-build error {worst:.2} of the allowed 1/(2n)"))
}

fn timeout_formula() -> Result<String, String> {
    let mut n = 0;
    for r in 0..3u8 {
        for m in 0..3u8 {
            for seed in 0..3u64 {
                let cfg = BlueprintConfig::new(m, r, seed as u8, 1, seed as u32).unwrap();
                let t = generate_construction_task(cfg, seed, 2).map_err(|e| e.to_string())?;
                let want = [600, 900, 1200][r as usize];
                ensure(t.timeout_seconds == want, || format!("r={r}: {} != {want}", t.timeout_seconds))?;
                n += 1;
            }
        }
    }
    Ok(format!("{n} tasks: 600/900/1200 s for r = 0/1/2"))
}

fn complexity() -> Result<String, String> {
    let mut materials = [0.0; 3];
    let mut rooms = [0.0; 3];
    for level in 0..3u8 {
        for s in 0..30u32 {
            let (a, b, c) = ((s % 3) as u8, ((s / 3) % 3) as u8, ((s / 9) % 3) as u8);
            let bp = generate_blueprint(BlueprintConfig::new(level, a, b, c, s).unwrap(), s as u64).unwrap();
            let unique: BTreeSet<&str> = bp.cells().map(|(_, _, m)| m).filter(|m| *m != "air").collect();
            materials[level as usize] += unique.len() as f64 / 30.0;
            let bp = generate_blueprint(BlueprintConfig::new(a, level, b, c, s).unwrap(), s as u64).unwrap();
            rooms[level as usize] += bp.rooms as f64 / 30.0;
        }
    }
    ensure(materials[0] < materials[1] && materials[1] < materials[2], || format!("materials {materials:?}"))?;
    ensure(rooms[0] < rooms[1] && rooms[1] < rooms[2], || format!("rooms {rooms:?}"))?;
    Ok(format!("materials {:.2?}, rooms {:.2?}", materials, rooms))
}

fn split_hygiene() -> Result<String, String> {
    let (train, test) =
        split_train_test(Domain::Cooking, SplitSizes::default_for(Domain::Cooking)).map_err(|e| e.to_string())?;
    let (tr, te) = (goal_items(&train), goal_items(&test));
    let want_tr: BTreeSet<String> = COOKING_TRAIN.iter().map(|s| s.to_string()).collect();
    let want_te: BTreeSet<String> = COOKING_TEST.iter().map(|s| s.to_string()).collect();
    ensure(tr == want_tr, || format!("train goals {tr:?}"))?;
    ensure(te == want_te, || format!("test goals {te:?}"))?;
    ensure(tr.is_disjoint(&te), || "cooking goals overlap".into())?;

    let sizes = SplitSizes { train: 2000, test: 30 };
    let (train, test) = split_train_test(Domain::Construction, sizes).map_err(|e| e.to_string())?;
    let hashes = |ts: &[TaskSpec]| -> BTreeSet<String> {
        ts.iter().map(|t| t.blueprint.as_ref().unwrap().content_hash()).collect()
    };
    let (htr, hte) = (hashes(&train), hashes(&test));
    ensure(train.len() == 2000 && test.len() == 30, || "wrong split sizes".into())?;
    ensure(htr.is_disjoint(&hte), || "construction blueprints shared across splits".into())?;
    ensure(train.iter().chain(&test).all(|t| t.split.is_some()), || "split tag missing".into())?;
    let tagged = test.iter().all(|t| t.split == Some(SplitKind::Test));
    ensure(tagged, || "test tasks not tagged".into())?;
    Ok(format!("cooking 10 vs 6 goals, construction {} vs {} distinct blueprints", htr.len(), hte.len()))
}

/// A log with a fixed score and `turns` assistant messages per agent.
fn synthetic_log(task: &TaskSpec, score: f64, turns: &[usize]) -> EpisodeLog {
    let mut log = EpisodeLog::default();
    log.push(Record::Header {
        task: Box::new(task.clone()),
        seed: 0,
        agents: task.agent_names.clone(),
        endpoints: vec!["synthetic".into(); task.agent_count],
        max_ticks: 100,
    });
    for (a, name) in task.agent_names.iter().enumerate() {
        log.push(Record::Message { tick: 0, agent: name.clone(), role: Role::System, content: format!("prompt {a}") });
    }
    let mut tick = 0;
    for round in 0..turns.iter().copied().max().unwrap_or(0) {
        for (a, name) in task.agent_names.iter().enumerate() {
            if round < turns[a] {
                tick += 1;
                let msg = |role, content: String| Record::Message { tick, agent: name.clone(), role, content };
                log.push(msg(Role::System, format!("obs {round}")));
                log.push(msg(Role::Assistant, format!("!inventory {round}")));
            }
        }
    }
    log.push(Record::End {
        tick,
        reason: if score >= 1.0 { EndReason::Completed } else { EndReason::Timeout },
        score: Score {
            value: score,
            kind: ScoreKind::EditDistance,
            detail: ScoreDetail::Blocks { matched: 0, total: 0, per_level: Vec::new() },
        },
        detail: None,
    });
    log
}

/// Indices a sort-and-cut selection keeps.
fn sorting_oracle(scores: &[f64], policy: FilterPolicy) -> BTreeSet<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());
    match policy {
        FilterPolicy::SuccessOnly => order.into_iter().filter(|&i| scores[i] == 1.0).collect(),
        FilterPolicy::TopFraction { fraction } => {
            let k = ((fraction * scores.len() as f64).ceil() as usize).max(1);
            let cut = scores[order[k - 1]];
            order.into_iter().filter(|&i| scores[i] >= cut).collect()
        }
    }
}

fn dataset_pipeline() -> Result<String, String> {
    let task = generate_crafting_task(3, 2, "stone_pickaxe", PlanBlocked::None).unwrap();
    let strategy = proptest::collection::vec(
        (prop_oneof![Just(1.0), Just(0.0), Just(0.5), (0u32..=20).prop_map(|k| k as f64 / 20.0)], 0usize..6, 0usize..6),
        1..40,
    );
    let mut runner = TestRunner::new(Config { cases: 300, failure_persistence: None, ..Config::default() });
    runner
        .run(&strategy, |runs| {
            let logs: Vec<EpisodeLog> = runs.iter().map(|(s, a, b)| synthetic_log(&task, *s, &[*a, *b])).collect();
            let scores: Vec<f64> = runs.iter().map(|r| r.0).collect();
            for policy in [FilterPolicy::SuccessOnly, FilterPolicy::TOP25] {
                let got: BTreeSet<usize> = filter_runs(&logs, policy).unwrap().into_iter().collect();
                prop_assert_eq!(got, sorting_oracle(&scores, policy), "{:?}", policy);
            }
            for (log, (_, a, b)) in logs.iter().zip(&runs) {
                let ex = emit_transitions(log).unwrap();
                prop_assert_eq!(ex.len(), a + b);
                prop_assert!(ex.iter().all(|e| e.memory.starts_with("prompt ") && e.target().starts_with("!inventory")));
            }
            let written = write_examples(&logs, std::io::sink()).unwrap();
            prop_assert_eq!(written, runs.iter().map(|r| r.1 + r.2).sum::<usize>());
            Ok(())
        })
        .map_err(|e| e.to_string())?;

    let want = ["Task", "Train", "Test", "Trials", "Success", "Transitions", "Avg Traj. Len."];
    ensure(STATS_COLUMNS == want, || format!("columns {STATS_COLUMNS:?}"))?;

    let mut rows = Vec::new();
    let mut band = Vec::new();
    for (domain, reference) in [(Domain::Cooking, 29.7), (Domain::Crafting, 19.2), (Domain::Construction, 111.5)] {
        let dir = common::repo_root().join("fixtures/corpus").join(domain.to_string());
        let mut paths: Vec<_> = std::fs::read_dir(&dir)
            .map_err(|e| format!("{}: {e}", dir.display()))?
            .map(|e| e.unwrap().path())
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        paths.sort();
        let logs: Vec<EpisodeLog> = paths.iter().map(|p| EpisodeLog::load(p).unwrap()).collect();
        let kept = filter_runs(&logs, FilterPolicy::default_for(domain)).map_err(|e| e.to_string())?;
        let sizes = SplitSizes::default_for(domain);
        let stats = DatasetStats::compute(domain, sizes.train, sizes.test, &logs, &kept).map_err(|e| e.to_string())?;
        let avg = stats.avg_trajectory_length;
        ensure(avg >= reference / 10.0 && avg <= reference * 10.0, || {
            format!("{domain} average {avg:.1} outside [{:.2}, {:.0}]", reference / 10.0, reference * 10.0)
        })?;
        band.push(format!("{domain} {avg:.1}"));
        rows.push(stats);
    }
    let table = StatsTable(&rows).to_string();
    let header: Vec<&str> = table.lines().next().unwrap().split('|').map(str::trim).collect();
    ensure(header == want, || format!("table header {header:?}"))?;
    Ok(format!("filters match the sorting oracle on 300 cases; corpus averages {}", band.join(", ")))
}

fn command_golden() -> Result<String, String> {
    let cases = common::golden_cases();
    let bad: Vec<String> = cases
        .iter()
        .filter(|c| c.got != c.want)
        .map(|c| format!("!{}: want {:?} got {:?}", c.command, c.want, c.got))
        .collect();
    ensure(bad.is_empty(), || bad.join("; "))?;
    let commands: BTreeSet<&str> = cases.iter().map(|c| c.command).collect();
    ensure(commands.len() >= 12, || format!("only {} commands", commands.len()))?;
    Ok(format!("{} templates over {} commands", cases.len(), commands.len()))
}

fn conversation_invariants() -> Result<String, String> {
    common::run_chat_property(1000)?;
    Ok("1000 schedules with 3-5 agents".into())
}

fn conservation() -> Result<String, String> {
    common::conservation::run(10_000)?;
    Ok("10000 command sequences".into())
}

fn main() {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let checks: [(&str, Check); 11] = [
        ("determinism golden", determinism),
        ("oracle crafting completeness", crafting_completeness),
        ("oracle cooking", cooking),
        ("blueprint fix-closure", fix_closure),
        ("timeout formula", timeout_formula),
        ("complexity monotonicity", complexity),
        ("split hygiene", split_hygiene),
        ("dataset pipeline", dataset_pipeline),
        ("command golden suite", command_golden),
        ("conversation invariants", conversation_invariants),
        ("conservation fuzz", conservation),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS  {name}: {detail} [{secs:.1}s]"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
