use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use craftsim_core::dataset::{self, DatasetStats, FilterPolicy, StatsTable};
use craftsim_core::episode::{run_episode, run_suite, AgentEndpoint, Endpoints, EpisodeConfig, EpisodeLog, SuiteManifest};
use craftsim_core::gateway::{self, GatewayOptions};
use craftsim_core::oracle::endpoint_by_kind;
use craftsim_core::task::{split, split_train_test, BlueprintConfig, Domain, SplitKind, SplitSizes, TaskSpec};
use craftsim_core::generate_blueprint;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

#[derive(Parser)]
#[command(name = "craftsim", version, about = "Multi-agent crafting, cooking and construction episodes")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write generated tasks, one JSON file each.
    Generate {
        #[arg(long)]
        domain: Domain,
        #[arg(long, value_parser = parse_split)]
        split: SplitKind,
        #[arg(long)]
        count: usize,
        /// Base seed. Without it the default split seeds are used.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "tasks")]
        out: PathBuf,
    },
    /// Print one blueprint.
    GenerateBlueprint {
        #[arg(long)]
        m: u8,
        #[arg(long)]
        r: u8,
        #[arg(long, default_value_t = 0)]
        w: u8,
        #[arg(long, default_value_t = 0)]
        c: u8,
        #[arg(long, default_value_t = 0)]
        variant: u32,
        /// Defaults to the variant number.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        json: bool,
    },
    /// Run one episode and write its log (stdout by default).
    Run {
        #[arg(long)]
        task: PathBuf,
        /// Comma-separated endpoint kinds (oracle, idle, echo), one per
        /// agent or a single kind for all.
        #[arg(long, default_value = "oracle")]
        agents: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        max_ticks: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every task of a manifest and save the logs.
    RunSuite {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value = "runs")]
        out: PathBuf,
    },
    /// Filter logs into training examples and print dataset statistics.
    Dataset {
        #[arg(long = "in")]
        input: PathBuf,
        /// success, top25, top:<fraction>, or auto (per domain).
        #[arg(long, default_value = "auto")]
        policy: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate oracle logs on the first train tasks of each domain.
    Corpus {
        #[arg(long, default_value = "fixtures/corpus")]
        out: PathBuf,
        #[arg(long, default_value_t = 16)]
        cooking: usize,
        #[arg(long, default_value_t = 16)]
        crafting: usize,
        #[arg(long, default_value_t = 4)]
        construction: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Host one episode for agents connecting over TCP.
    Serve {
        #[arg(long, default_value = "127.0.0.1:7878")]
        addr: String,
        #[arg(long)]
        task: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Agents played by in-process oracles.
        #[arg(long, value_delimiter = ',')]
        oracle: Vec<String>,
        #[arg(long, default_value_t = 100)]
        poll_timeout_ms: u64,
        #[arg(long, default_value_t = 60)]
        accept_timeout_s: u64,
        #[arg(long)]
        max_ticks: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Connect to a gateway and echo chat back.
    EchoAgent {
        #[arg(long, default_value = "127.0.0.1:7878")]
        addr: String,
        #[arg(long)]
        agent: Option<String>,
    },
}

fn parse_split(s: &str) -> Result<SplitKind, String> {
    match s {
        "train" => Ok(SplitKind::Train),
        "test" => Ok(SplitKind::Test),
        other => Err(format!("unknown split {other}")),
    }
}

/// Accepts the path as given or with `.json` added.
fn load_task(path: &Path) -> Result<TaskSpec> {
    let path = if !path.exists() && path.extension().is_none() { path.with_extension("json") } else { path.to_path_buf() };
    TaskSpec::load(&path).with_context(|| format!("loading task {}", path.display()))
}

fn endpoints_for<'a>(task: &TaskSpec, agents: &str) -> Result<Endpoints<'a>> {
    let kinds: Vec<&str> = agents.split(',').map(str::trim).collect();
    if kinds.len() != 1 && kinds.len() != task.agent_names.len() {
        bail!("{} endpoint kinds given for {} agents", kinds.len(), task.agent_names.len());
    }
    let mut eps: Endpoints = BTreeMap::new();
    for (i, name) in task.agent_names.iter().enumerate() {
        let kind = kinds[if kinds.len() == 1 { 0 } else { i }];
        let ep = endpoint_by_kind(kind).with_context(|| format!("unknown endpoint kind {kind}"))?;
        eps.insert(name.clone(), ep as Box<dyn AgentEndpoint>);
    }
    Ok(eps)
}

fn log_name(task: &TaskSpec, seed: u64) -> String {
    format!("{}_seed{seed}.jsonl", task.task_name)
}

fn summary(log: &EpisodeLog) -> Result<String> {
    let (tick, reason, score) = log.end()?;
    Ok(format!("{} tick={tick} reason={} score={:.3}", log.task()?.task_name, reason.as_str(), score.value))
}

fn collect_logs(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<PathBuf> =
        std::fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))?.map(|e| e.map(|e| e.path())).collect::<Result<_, _>>()?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            collect_logs(&p, out)?;
        } else if p.extension().is_some_and(|e| e == "jsonl") {
            out.push(p);
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Generate { domain, split: which, count, seed, out } => {
            let tasks = match seed {
                Some(base) => (0..count)
                    .map(|i| split::generate_one(domain, which, i, base))
                    .collect::<Result<Vec<_>, _>>()?,
                None => {
                    let sizes = match which {
                        SplitKind::Train => SplitSizes { train: count, test: 0 },
                        SplitKind::Test => SplitSizes { train: 0, test: count },
                    };
                    let (train, test) = split_train_test(domain, sizes)?;
                    if which == SplitKind::Train { train } else { test }
                }
            };
            std::fs::create_dir_all(&out)?;
            for t in &tasks {
                std::fs::write(out.join(format!("{}.json", t.task_name)), t.to_json())?;
            }
            println!("wrote {} tasks to {}", tasks.len(), out.display());
        }
        Cmd::GenerateBlueprint { m, r, w, c, variant, seed, json } => {
            let bp = generate_blueprint(BlueprintConfig::new(m, r, w, c, variant)?, seed.unwrap_or(variant as u64))?;
            if json {
                println!("{}", serde_json::to_string_pretty(&bp)?);
            } else {
                print!("{}", bp.render());
            }
        }
        Cmd::Run { task, agents, seed, max_ticks, out } => {
            let task = load_task(&task)?;
            let mut eps = endpoints_for(&task, &agents)?;
            let mut cfg = EpisodeConfig::new(task, seed);
            cfg.max_ticks = max_ticks;
            let log = run_episode(&cfg, &mut eps)?;
            match out {
                Some(p) => log.save(&p)?,
                None => print!("{}", log.to_jsonl()),
            }
            eprintln!("{}", summary(&log)?);
        }
        Cmd::RunSuite { manifest, out } => {
            let m = SuiteManifest::load(&manifest).map_err(anyhow::Error::msg)?;
            let base = manifest.parent().unwrap_or(Path::new("."));
            let tasks = m.resolve_tasks(base).map_err(anyhow::Error::msg)?;
            if endpoint_by_kind(&m.agents).is_none() {
                bail!("unknown endpoint kind {}", m.agents);
            }
            std::fs::create_dir_all(&out)?;
            let mut io_err = None;
            let report = run_suite(
                &tasks,
                &m.seeds,
                |_, _| endpoint_by_kind(&m.agents).expect("checked") as Box<dyn AgentEndpoint>,
                |task, seed, log| {
                    if let Err(e) = log.save(&out.join(log_name(task, seed))) {
                        io_err.get_or_insert(e);
                    }
                },
            )?;
            if let Some(e) = io_err {
                return Err(e.into());
            }
            std::fs::write(out.join("report.json"), serde_json::to_string_pretty(&report)?)?;
            for (k, g) in &report.groups {
                let level = match (k.m, k.r) {
                    (Some(m), Some(r)) => format!(" m={m} r={r}"),
                    _ => String::new(),
                };
                println!(
                    "{} agents={} blocked={:?}{level}: {}/{} completed, mean score {:.3}",
                    k.task_type, k.agent_count, k.plan_blocked, g.completed, g.runs, g.mean_score
                );
            }
            println!("success rate {:.3}, mean score {:.3}", report.success_rate(), report.mean_score());
        }
        Cmd::Dataset { input, policy, out } => {
            let mut paths = Vec::new();
            collect_logs(&input, &mut paths)?;
            let mut by_domain: BTreeMap<String, (Domain, Vec<EpisodeLog>)> = BTreeMap::new();
            for p in &paths {
                let log = EpisodeLog::load(p).with_context(|| format!("loading {}", p.display()))?;
                let d = dataset::domain_of(log.task()?.task_type);
                by_domain.entry(d.to_string()).or_insert_with(|| (d, Vec::new())).1.push(log);
            }
            let file = std::io::BufWriter::new(std::fs::File::create(&out)?);
            let mut writer = file;
            let mut stats = Vec::new();
            let order = [Domain::Cooking, Domain::Crafting, Domain::Construction];
            for d in order {
                let Some((_, logs)) = by_domain.get(&d.to_string()) else { continue };
                let pol = if policy == "auto" { FilterPolicy::default_for(d) } else { policy.parse()? };
                let kept = dataset::filter_runs(logs, pol)?;
                dataset::write_examples(kept.iter().map(|&i| &logs[i]), &mut writer)?;
                let sizes = SplitSizes::default_for(d);
                stats.push(DatasetStats::compute(d, sizes.train, sizes.test, logs, &kept)?);
            }
            print!("{}", StatsTable(&stats));
        }
        Cmd::Corpus { out, cooking, crafting, construction, seed } => {
            for (d, n) in [(Domain::Cooking, cooking), (Domain::Crafting, crafting), (Domain::Construction, construction)] {
                let (tasks, _) = split_train_test(d, SplitSizes { train: n, test: 0 })?;
                let dir = out.join(d.to_string());
                std::fs::create_dir_all(&dir)?;
                for (task, log) in tasks.iter().zip(dataset::oracle_runs(&tasks, seed)?) {
                    log.save(&dir.join(log_name(task, seed)))?;
                    println!("{}", summary(&log)?);
                }
            }
        }
        Cmd::Serve { addr, task, seed, oracle, poll_timeout_ms, accept_timeout_s, max_ticks, out } => {
            let task = load_task(&task)?;
            let mut local: Endpoints = BTreeMap::new();
            for name in oracle {
                if !task.agent_names.contains(&name) {
                    bail!("{name} is not an agent of {}", task.task_name);
                }
                local.insert(name, endpoint_by_kind("oracle").expect("builtin") as Box<dyn AgentEndpoint>);
            }
            let listener = gateway::bind(&addr)?;
            eprintln!("listening on {}", listener.local_addr()?);
            let mut cfg = EpisodeConfig::new(task, seed);
            cfg.max_ticks = max_ticks;
            let opts = GatewayOptions {
                poll_timeout: Duration::from_millis(poll_timeout_ms),
                accept_timeout: Duration::from_secs(accept_timeout_s),
            };
            let log = gateway::serve(&listener, &cfg, local, &opts)?;
            match out {
                Some(p) => log.save(&p)?,
                None => print!("{}", log.to_jsonl()),
            }
            eprintln!("{}", summary(&log)?);
        }
        Cmd::EchoAgent { addr, agent } => {
            let client = gateway::Client::connect(addr.as_str(), agent.as_deref())?;
            eprintln!("playing {} in {}", client.agent, client.episode_id);
            let (reason, score) = gateway::run_echo_agent(client)?;
            println!("{reason} {score:.3}");
        }
    }
    Ok(())
}
