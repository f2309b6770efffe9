mod common;

use craftsim_core::dataset::{emit_transitions, filter_runs, write_examples, FilterPolicy};
use craftsim_core::episode::{Endpoints, Record, Role};
use craftsim_core::oracle::OracleAgent;
use craftsim_core::task::generate::generate_construction_task;
use craftsim_core::task::{
    generate_cooking_task, generate_crafting_task, BlueprintConfig, CookingOptions, PlanBlocked, TaskSpec,
};
use craftsim_core::{replay_episode, run_episode, run_suite, AgentEndpoint, EndReason, EpisodeConfig, EpisodeLog};

fn oracle_run(task: &TaskSpec, seed: u64) -> EpisodeLog {
    let mut eps: Endpoints =
        task.agent_names.iter().map(|n| (n.clone(), Box::new(OracleAgent::new()) as Box<dyn AgentEndpoint>)).collect();
    run_episode(&EpisodeConfig::new(task.clone(), seed), &mut eps).unwrap()
}

fn sample_tasks() -> Vec<TaskSpec> {
    vec![
        generate_crafting_task(5, 3, "bookshelf", PlanBlocked::One).unwrap(),
        generate_cooking_task(9, &CookingOptions { items: Some(vec!["cake".into(), "bread".into()]), ..Default::default() })
            .unwrap(),
        generate_cooking_task(
            4,
            &CookingOptions { hells_kitchen: true, items: Some(vec!["golden_carrot".into(), "cookie".into()]), ..Default::default() },
        )
        .unwrap(),
        generate_construction_task(BlueprintConfig::new(1, 0, 0, 1, 3).unwrap(), 3, 2).unwrap(),
    ]
}

fn body(log: &EpisodeLog) -> Vec<&Record> {
    log.records.iter().filter(|r| !matches!(r, Record::Header { .. })).collect()
}

#[test]
fn replay_reproduces_every_record() {
    for (i, task) in sample_tasks().iter().enumerate() {
        let log = oracle_run(task, i as u64);
        let (replayed, score) = replay_episode(&log).unwrap();
        assert_eq!(&score, log.end().unwrap().2, "{}", task.task_name);
        assert_eq!(body(&replayed), body(&log), "{}", task.task_name);
    }
}

#[test]
fn logs_round_trip_through_jsonl() {
    let dir = tempfile::tempdir().unwrap();
    for (i, task) in sample_tasks().iter().enumerate() {
        let log = oracle_run(task, 10 + i as u64);
        let path = dir.path().join(format!("{i}.jsonl"));
        log.save(&path).unwrap();
        let back = EpisodeLog::load(&path).unwrap();
        assert_eq!(back.records, log.records);
        assert_eq!(back.to_jsonl(), log.to_jsonl());
    }
}

#[test]
fn oracle_solves_the_sample_tasks() {
    for (i, task) in sample_tasks().iter().enumerate() {
        let log = oracle_run(task, 20 + i as u64);
        let (tick, reason, score) = log.end().unwrap();
        assert_eq!(reason, EndReason::Completed, "{}", task.task_name);
        assert_eq!(score.value, 1.0);
        assert!(tick <= task.max_ticks());
    }
}

#[test]
fn suite_reports_each_run() {
    let tasks: Vec<TaskSpec> = ["stone_pickaxe", "bread", "compass"]
        .iter()
        .enumerate()
        .map(|(i, t)| generate_crafting_task(i as u64, 2, t, PlanBlocked::None).unwrap())
        .collect();
    let mut seen = Vec::new();
    let report = run_suite(
        &tasks,
        &[1, 2],
        |_, _| Box::new(OracleAgent::new()) as Box<dyn AgentEndpoint>,
        |t, seed, log| seen.push((t.task_name.clone(), seed, log.final_score().unwrap())),
    )
    .unwrap();
    assert_eq!(report.runs.len(), 6);
    assert_eq!(seen.len(), 6);
    assert_eq!(report.success_rate(), 1.0);
    assert_eq!(report.mean_score(), 1.0);
    let runs: usize = report.groups.iter().map(|(_, g)| g.runs).sum();
    assert_eq!(runs, 6);
}

#[test]
fn corpus_examples_are_well_formed() {
    let dir = common::repo_root().join("fixtures/corpus/crafting");
    let mut paths: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    paths.sort();
    let logs: Vec<EpisodeLog> = paths.iter().map(|p| EpisodeLog::load(p).unwrap()).collect();
    let kept = filter_runs(&logs, FilterPolicy::SuccessOnly).unwrap();
    assert!(!kept.is_empty());
    let chosen: Vec<&EpisodeLog> = kept.iter().map(|&i| &logs[i]).collect();

    let mut buf = Vec::new();
    let written = write_examples(chosen.iter().copied(), &mut buf).unwrap();
    let lines: Vec<serde_json::Value> =
        String::from_utf8(buf).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), written);

    let mut total = 0;
    for log in &chosen {
        let assistant = log.records.iter().filter(|r| matches!(r, Record::Message { role: Role::Assistant, .. })).count();
        let ex = emit_transitions(log).unwrap();
        assert_eq!(ex.len(), assistant);
        for e in &ex {
            assert_eq!(e.score, 1.0);
            assert!(e.memory.contains(&e.agent));
            assert_eq!(e.turns.last().unwrap().role, Role::Assistant);
            assert!(e.context().iter().all(|m| m.role != Role::System || !m.content.contains("YOUR CURRENT ASSIGNED GOAL")));
        }
        total += ex.len();
    }
    assert_eq!(total, written);
}
