use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

fn craftsim(args: &[&str], cwd: &Path) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_craftsim")).args(args).current_dir(cwd).output().unwrap();
    assert!(out.status.success(), "craftsim {args:?} failed:\n{}", String::from_utf8_lossy(&out.stderr));
    out
}

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fixture() -> String {
    repo().join("fixtures/stone_pickaxe.json").display().to_string()
}

#[test]
fn run_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = craftsim(&["run", "--task", &fixture(), "--seed", "7"], dir.path());
    let b = craftsim(&["run", "--task", &fixture(), "--seed", "7", "--out", "b.jsonl"], dir.path());
    let saved = std::fs::read(dir.path().join("b.jsonl")).unwrap();
    assert_eq!(a.stdout, saved);
    let summary = String::from_utf8(b.stderr).unwrap();
    assert!(summary.contains("reason=completed score=1.000"), "{summary}");
    let last = String::from_utf8(saved).unwrap().lines().last().unwrap().to_string();
    assert!(last.starts_with("{\"type\":\"end\""));
}

#[test]
fn idle_agents_time_out() {
    let dir = tempfile::tempdir().unwrap();
    let out = craftsim(&["run", "--task", &fixture(), "--agents", "idle", "--max-ticks", "30"], dir.path());
    let summary = String::from_utf8(out.stderr).unwrap();
    assert!(summary.contains("tick=30 reason=timeout"), "{summary}");
}

#[test]
fn generate_then_suite_then_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    craftsim(&["generate", "--domain", "crafting", "--split", "test", "--count", "3", "--out", "tasks"], d);
    let mut tasks: Vec<String> = std::fs::read_dir(d.join("tasks"))
        .unwrap()
        .map(|e| format!("tasks/{}", e.unwrap().file_name().to_string_lossy()))
        .collect();
    tasks.sort();
    assert_eq!(tasks.len(), 3);
    let manifest = serde_json::json!({ "tasks": tasks, "seeds": [1, 2], "agents": "oracle" });
    std::fs::write(d.join("suite.json"), manifest.to_string()).unwrap();

    let out = craftsim(&["run-suite", "--manifest", "suite.json", "--out", "runs"], d);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("success rate 1.000, mean score 1.000"), "{text}");
    let logs = std::fs::read_dir(d.join("runs")).unwrap().filter(|e| {
        e.as_ref().unwrap().path().extension().is_some_and(|x| x == "jsonl")
    });
    assert_eq!(logs.count(), 6);
    assert!(d.join("runs/report.json").exists());

    let out = craftsim(&["dataset", "--in", "runs", "--out", "ex.jsonl", "--policy", "success"], d);
    let table = String::from_utf8(out.stdout).unwrap();
    let header: Vec<&str> = table.lines().next().unwrap().split('|').map(str::trim).collect();
    assert_eq!(header, ["Task", "Train", "Test", "Trials", "Success", "Transitions", "Avg Traj. Len."]);
    let row: Vec<&str> = table.lines().nth(2).unwrap().split('|').map(str::trim).collect();
    assert_eq!(&row[..1], ["Crafting"]);
    assert_eq!(&row[3..5], ["6", "6"]);
    let examples = std::fs::read_to_string(d.join("ex.jsonl")).unwrap();
    assert_eq!(examples.lines().count().to_string(), row[5]);
}

#[test]
fn blueprint_json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = craftsim(&["generate-blueprint", "--m", "2", "--r", "1", "--w", "1", "--c", "2", "--json"], dir.path());
    let bp: craftsim_core::Blueprint = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!((bp.config.m, bp.config.r), (2, 1));
    let text = craftsim(&["generate-blueprint", "--m", "2", "--r", "1", "--w", "1", "--c", "2"], dir.path());
    assert!(String::from_utf8(text.stdout).unwrap().starts_with(&format!("Blueprint {}", bp.name())));
}

#[test]
fn serve_with_echo_agents() {
    let dir = tempfile::tempdir().unwrap();
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let addr = format!("127.0.0.1:{port}");
    let server = Command::new(env!("CARGO_BIN_EXE_craftsim"))
        .args(["serve", "--addr", &addr, "--task", &fixture(), "--max-ticks", "20", "--out", "served.jsonl"])
        .args(["--oracle", "Andy_0", "--poll-timeout-ms", "5000", "--accept-timeout-s", "20"])
        .current_dir(dir.path())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    // the server may not be listening yet
    let mut agent = None;
    for _ in 0..100 {
        let out = Command::new(env!("CARGO_BIN_EXE_craftsim"))
            .args(["echo-agent", "--addr", &addr])
            .current_dir(dir.path())
            .output()
            .unwrap();
        if out.status.success() {
            agent = Some(out);
            break;
        }
        std::thread::sleep(std::time::Duration::from_millis(50));
    }
    let agent = agent.expect("echo agent never connected");
    let served = server.wait_with_output().unwrap();
    assert!(served.status.success(), "{}", String::from_utf8_lossy(&served.stderr));
    let said = String::from_utf8(agent.stdout).unwrap();
    assert!(said.contains("timeout"), "{said}");
    assert!(dir.path().join("served.jsonl").exists());
}
