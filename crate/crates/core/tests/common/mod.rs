#![allow(dead_code)]

use craftsim_core::command::{action_output, execute, parse_first_command, CommandContext, Outcome};
use craftsim_core::conversation::{render_chat, Conversations, DeliveryKind};
use craftsim_core::evaluator::apply_fixes;
use craftsim_core::recipes::RecipeBook;
use craftsim_core::task::{generate_blueprint, Blueprint, BlueprintConfig, Fix};
use craftsim_core::world::{AgentBody, BlockPos, Bounds, WorldState};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::PathBuf;

pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

/// A hand-built flat world with three agents, for byte-exact command output.
pub struct Bench {
    pub world: WorldState,
    pub convos: Conversations,
    pub blueprint: Option<Blueprint>,
    pub plan_access: bool,
}

pub const ANDY: BlockPos = BlockPos::new(0, -60, 0);

impl Bench {
    pub fn new() -> Self {
        let mut world = WorldState::empty(Bounds::around(BlockPos::new(0, -60, 0), 32, 24), 11, "plains");
        world.add_agent(AgentBody::new("Andy_0", ANDY));
        world.add_agent(AgentBody::new("Jill_0", BlockPos::new(2, -60, 0)));
        world.add_agent(AgentBody::new("Bob_0", BlockPos::new(12, -60, 0)));
        Bench {
            world,
            convos: Conversations::new(["Andy_0", "Jill_0", "Bob_0"]),
            blueprint: None,
            plan_access: true,
        }
    }

    pub fn give(&mut self, agent: &str, item: &str, n: u32) -> &mut Self {
        self.world.agent_mut(agent).unwrap().inventory.add(item, n);
        self
    }

    /// Output the actor would read for `text`, after any multi-tick action
    /// has finished.
    pub fn run(&mut self, actor: &str, text: &str) -> String {
        let parsed = match parse_first_command(text) {
            Ok(Some(p)) => p,
            Ok(None) => return String::new(),
            Err(e) => return e.to_string(),
        };
        let book = RecipeBook::builtin();
        let mut ctx = CommandContext {
            world: &mut self.world,
            book,
            conversations: &mut self.convos,
            blueprint: self.blueprint.as_ref(),
            plan_access: self.plan_access,
        };
        match execute(&mut ctx, actor, &parsed.command) {
            Outcome::Done(r) => r.message.unwrap_or_default(),
            Outcome::Pending => {
                for _ in 0..10_000 {
                    for c in self.world.advance_tick() {
                        if c.agent == actor {
                            return action_output(&c.result);
                        }
                    }
                }
                panic!("{text} never finished")
            }
        }
    }
}

pub struct Golden {
    pub command: &'static str,
    pub got: String,
    pub want: String,
}

fn g(command: &'static str, got: String, want: &str) -> Golden {
    Golden { command, got, want: want.to_string() }
}

/// Byte-exact expected output for a fixed script of commands.
pub fn golden_cases() -> Vec<Golden> {
    let mut out = Vec::new();

    let mut b = Bench::new();
    b.world.put_block(BlockPos::new(1, -60, 2), "crafting_table");
    out.push(g(
        "craftRecipe",
        b.run("Andy_0", "!craftRecipe(\"mushroom_stew\", 1)"),
        "Code output:\nYou do not have the resources to craft a mushroom_stew. It requires: brown_mushroom: 1, red_mushroom: 1, bowl: 1.\n",
    ));
    b.give("Andy_0", "oak_log", 1);
    out.push(g(
        "craftRecipe",
        b.run("Andy_0", "!craftRecipe(\"oak_planks\", 1)"),
        "Code output:\nSuccessfully crafted oak_planks, you now have 4 oak_planks.\n",
    ));
    out.push(g(
        "searchForBlock",
        b.run("Andy_0", "!searchForBlock(\"sugar_cane\", 64)"),
        "Code output:\nCould not find any sugar_cane in 64 blocks.\n",
    ));
    out.push(g("inventory", b.run("Andy_0", "!inventory"), "\nINVENTORY\n- oak_planks: 4\nWEARING: Nothing\n"));
    out.push(g("inventory", b.run("Jill_0", "!inventory"), "\nINVENTORY: Nothing\nWEARING: Nothing\n"));
    out.push(g(
        "stats",
        b.run("Andy_0", "!stats"),
        "\nSTATS\n- Position: x: 0, y: -60, z: 0\n- Biome: plains\n- Current action: Idle\n",
    ));
    out.push(g("savedPlaces", b.run("Andy_0", "!savedPlaces"), "No places saved."));
    out.push(g(
        "rememberHere",
        b.run("Andy_0", "!rememberHere(\"home\")"),
        "Code output:\nSaved location home at (0, -60, 0).\n",
    ));
    out.push(g(
        "goToCoordinates",
        b.run("Andy_0", "!goToCoordinates(5, -60, 0, 0)"),
        "Code output:\nYou have reached at 5, -60, 0.\n",
    ));
    out.push(g(
        "goToRememberedPlace",
        b.run("Andy_0", "!goToRememberedPlace(\"home\")"),
        "Code output:\nYou have reached home.\n",
    ));
    out.push(g(
        "placeHere",
        b.run("Andy_0", "!placeHere(\"oak_planks\")"),
        "Code output:\nPlaced oak_planks at (0, -60, 0).\n",
    ));
    b.give("Andy_0", "stick", 2);
    out.push(g(
        "givePlayer",
        b.run("Andy_0", "!givePlayer(\"Jill_0\", \"stick\", 1)"),
        "Code output:\nYou have reached Jill_0.\nDiscarded 1 stick.\nJill_0 received stick.\n",
    ));
    out.push(g(
        "discard",
        b.run("Andy_0", "!discard(\"stick\", 1)"),
        "Code output:\nDiscarded 1 stick.\n",
    ));
    out.push(g("attack", b.run("Andy_0", "!attack(\"cow\")"), "Code output:\nCould not find any cow to attack.\n"));
    out.push(g("fly", b.run("Andy_0", "!fly()"), "Command !fly does not exist. Use !help to see all available commands."));
    out.push(g(
        "arity",
        b.run("Andy_0", "!searchForBlock(\"oak_log\")"),
        "Command !searchForBlock was given 1 args, but requires 2 args.",
    ));

    let mut b = Bench::new();
    b.world.put_block(BlockPos::new(0, -60, 2), "chest");
    out.push(g("viewChest", b.run("Andy_0", "!viewChest"), "Code output:\nThe chest is empty.\n"));
    b.give("Andy_0", "bread", 2);
    out.push(g(
        "putInChest",
        b.run("Andy_0", "!putInChest(\"bread\", 2)"),
        "Code output:\nSuccessfully put 2 bread in the chest.\n",
    ));
    out.push(g(
        "takeFromChest",
        b.run("Jill_0", "!takeFromChest(\"bread\", 1)"),
        "Code output:\nSuccessfully took 1 bread from the chest.\n",
    ));
    out.push(g("viewChest", b.run("Andy_0", "!viewChest"), "Code output:\nChest contents:\nbread: 1\n"));

    let mut b = Bench::new();
    b.world.put_block(BlockPos::new(1, -60, 2), "furnace");
    b.world.set_fuel(BlockPos::new(1, -60, 2), 8);
    b.give("Andy_0", "potato", 2);
    out.push(g(
        "smeltItem",
        b.run("Andy_0", "!smeltItem(\"potato\", 2)"),
        "Code output:\nSuccessfully smelted potato, got 2 baked_potato.\n",
    ));
    b.world.put_block(BlockPos::new(0, -60, -3), "sugar_cane");
    b.world.put_block(BlockPos::new(1, -60, -3), "sugar_cane");
    out.push(g(
        "collectBlocks",
        b.run("Andy_0", "!collectBlocks(\"sugar_cane\", 2)"),
        "Code output:\nYou have reached at 0, -60, 0.\nPicked up 1 items.\nYou have reached at 1, -60, 0.\nPicked up 1 items.\nCollected 2 sugar_cane.\n",
    ));

    let mut b = Bench::new();
    out.push(g("startConversation", b.run("Jill_0", "!startConversation(\"Andy_0\", \"hi\")"), ""));
    out.push(g(
        "startConversation",
        b.run("Jill_0", "!startConversation(\"Andy_0\", \"hi again\")"),
        "You are already in conversation with Andy_0. Don't use this command to talk to them.",
    ));
    out.push(g("endConversation", b.run("Andy_0", "!endConversation(\"Jill_0\", \"bye\")"), ""));
    let notice = b.convos.pump(0, |_| false).into_iter().find(|d| d.kind == DeliveryKind::Notice).map(|d| d.text);
    out.push(g("endConversation", notice.unwrap_or_default(), "Conversation with Andy_0 ended with message: bye"));
    out.push(g(
        "endConversation",
        b.run("Andy_0", "!endConversation(\"Jill_0\")"),
        "You are not in conversation with Jill_0.",
    ));

    let mut b = Bench::new();
    let bp = generate_blueprint(BlueprintConfig::new(0, 0, 0, 0, 0).unwrap(), 1).unwrap();
    let level0 = bp.fixes(&b.world, Some(0)).unwrap();
    let first = level0.first().map(|f| f.to_string()).unwrap_or_default();
    b.blueprint = Some(bp.clone());
    let report = b.run("Andy_0", "!checkBlueprintLevel(0)");
    out.push(g(
        "checkBlueprintLevel",
        report.lines().take(2).collect::<Vec<_>>().join("\n"),
        &format!("Level 0 requires the following fixes:\n{first}"),
    ));
    apply_fixes(&mut b.world, &bp, &level0);
    out.push(g("checkBlueprintLevel", b.run("Andy_0", "!checkBlueprintLevel(0)"), "Level 0 is complete"));

    let mut b = Bench::new();
    b.plan_access = false;
    out.push(g(
        "getCraftingPlan",
        b.run("Andy_0", "!getCraftingPlan(\"stick\", 1)"),
        "You do not have access to crafting plans in this task.",
    ));
    out
}

/// Parse blueprint fix lines back into fixes.
pub fn parse_fix_lines(text: &str) -> Vec<Fix> {
    let coords = |rest: &str| -> BlockPos {
        let nums: Vec<i32> = rest
            .trim_start_matches("X: ")
            .split(", ")
            .map(|p| p.trim_start_matches("Y: ").trim_start_matches("Z: ").trim().parse().unwrap())
            .collect();
        BlockPos::new(nums[0], nums[1], nums[2])
    };
    let mut out = Vec::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("Remove the ") {
            let (m, at) = rest.split_once(" at coordinates ").unwrap();
            out.push(Fix::Remove { material: m.to_string(), pos: coords(at) });
        } else if let Some(rest) = line.strip_prefix("Place ") {
            let (m, at) = rest.split_once(" at coordinates ").unwrap();
            out.push(Fix::Place { material: m.to_string(), pos: coords(at) });
        }
    }
    out
}

#[derive(Debug, Clone)]
pub enum ChatOp {
    Start(usize, usize),
    Send(usize),
    End(usize, usize),
    Nothing,
}

fn chat_op(n: usize) -> impl Strategy<Value = ChatOp> {
    prop_oneof![
        2 => (0..n, 0..n).prop_map(|(a, b)| ChatOp::Start(a, b)),
        4 => (0..n).prop_map(ChatOp::Send),
        1 => (0..n, 0..n).prop_map(|(a, b)| ChatOp::End(a, b)),
        2 => Just(ChatOp::Nothing),
    ]
}

/// (agent count, per-tick ops, per-tick busy flags)
pub fn chat_schedule() -> impl Strategy<Value = (usize, Vec<(ChatOp, Vec<bool>)>)> {
    (3usize..=5).prop_flat_map(|n| {
        let tick = (chat_op(n), proptest::collection::vec(any::<bool>(), n));
        (Just(n), proptest::collection::vec(tick, 20..200))
    })
}

pub fn check_chat_schedule(n: usize, schedule: &[(ChatOp, Vec<bool>)]) -> Result<(), TestCaseError> {
    let names: Vec<String> = (0..n).map(|i| format!("Agent_{i}")).collect();
    let mut c = Conversations::new(names.clone());
    let mut sent: BTreeMap<(String, String), VecDeque<String>> = BTreeMap::new();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut next = 0usize;
    let mut check = |c: &mut Conversations,
                     tick: u64,
                     busy: &[bool],
                     sent: &mut BTreeMap<(String, String), VecDeque<String>>|
     -> Result<(), TestCaseError> {
        let is_busy = |a: &str| busy[names.iter().position(|x| x == a).unwrap()];
        for d in c.pump(tick, is_busy) {
            if d.kind != DeliveryKind::Chat {
                continue;
            }
            prop_assert!(!(is_busy(&d.from) && is_busy(&d.to)), "delivery on a both-busy tick");
            let queue = sent.get_mut(&(d.from.clone(), d.to.clone())).expect("delivered something never sent");
            let want = queue.pop_front().expect("delivered more than sent");
            prop_assert_eq!(&d.text, &render_chat(&d.from, &want), "out of order");
            prop_assert!(seen.insert(want), "delivered twice");
        }
        let mut open: BTreeMap<&str, usize> = BTreeMap::new();
        for s in c.sessions().iter().filter(|s| s.is_open()) {
            *open.entry(&s.pair.0).or_default() += 1;
            *open.entry(&s.pair.1).or_default() += 1;
        }
        prop_assert!(open.values().all(|&k| k <= 1), "agent in two open sessions");
        Ok(())
    };
    for (tick, (op, busy)) in schedule.iter().enumerate() {
        let tick = tick as u64;
        match op {
            ChatOp::Start(a, b) => {
                let body = format!("m{next}");
                next += 1;
                if let Ok(outcome) = c.start(&names[*a], &names[*b], &body, tick) {
                    if outcome.notice().is_none() {
                        sent.entry((names[*a].clone(), names[*b].clone())).or_default().push_back(body);
                    }
                }
            }
            ChatOp::Send(a) => {
                let body = format!("m{next}");
                next += 1;
                let partner = c.partner_of(&names[*a]).map(str::to_string);
                if c.send(&names[*a], &body, tick) {
                    sent.entry((names[*a].clone(), partner.unwrap())).or_default().push_back(body);
                }
            }
            ChatOp::End(a, b) => {
                let _ = c.end(&names[*a], &names[*b], Some("bye"), tick);
            }
            ChatOp::Nothing => {}
        }
        check(&mut c, tick, busy, &mut sent)?;
    }
    // drain with everyone idle: all that was sent arrives exactly once
    let idle = vec![false; n];
    let start = schedule.len() as u64;
    for t in 0..10_000u64 {
        if c.pending() == 0 {
            break;
        }
        check(&mut c, start + t, &idle, &mut sent)?;
    }
    prop_assert_eq!(c.pending(), 0);
    prop_assert!(sent.values().all(VecDeque::is_empty), "messages lost");
    Ok(())
}

pub fn run_chat_property(cases: u32) -> Result<(), String> {
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    runner.run(&chat_schedule(), |(n, s)| check_chat_schedule(n, &s)).map_err(|e| e.to_string())
}

pub mod conservation {
    use super::*;
    use craftsim_core::episode::reset;
    use craftsim_core::recipes::RecipeKind;
    use craftsim_core::task::{generate_cooking_task, CookingOptions};

    const ITEMS: &[&str] = &[
        "oak_log", "oak_planks", "stick", "potato", "baked_potato", "wheat", "bread", "bowl", "mushroom_stew",
        "brown_mushroom", "red_mushroom", "cobblestone", "milk_bucket", "sugar", "sugar_cane", "egg", "cake",
        "carrot", "gold_nugget", "golden_carrot", "beef", "rabbit", "mutton", "crafting_table", "chest", "dirt",
    ];
    const BLOCKS: &[&str] = &["oak_log", "potato", "wheat", "sugar_cane", "carrot", "dirt", "oak_planks", "stone"];
    const ANIMALS: &[&str] = &["cow", "pig", "chicken", "rabbit", "sheep"];

    fn pick(list: &[&str], i: usize) -> String {
        list[i % list.len()].to_string()
    }

    /// One random command line for one agent, built from three dice.
    pub fn command_text(kind: u8, a: usize, b: usize, others: &[String]) -> String {
        let n = 1 + b % 4;
        match kind % 16 {
            0 => format!("!craftRecipe(\"{}\", {n})", pick(ITEMS, a)),
            1 => format!("!smeltItem(\"{}\", {n})", pick(ITEMS, a)),
            2 => format!("!collectBlocks(\"{}\", {n})", pick(BLOCKS, a)),
            3 => format!("!placeHere(\"{}\")", pick(ITEMS, a)),
            4 => format!("!givePlayer(\"{}\", \"{}\", {n})", others[b % others.len()], pick(ITEMS, a)),
            5 => format!("!putInChest(\"{}\", {n})", pick(ITEMS, a)),
            6 => format!("!takeFromChest(\"{}\", {n})", pick(ITEMS, a)),
            7 => format!("!discard(\"{}\", {n})", pick(ITEMS, a)),
            8 => format!("!attack(\"{}\")", pick(ANIMALS, a)),
            9 => format!("!goToCoordinates({}, -60, {}, 1)", (a % 21) as i32 - 10, (b % 21) as i32 - 10),
            10 => format!("!goToPlayer(\"{}\", 2)", others[b % others.len()]),
            11 => "!stop".to_string(),
            12 => format!("!searchForBlock(\"{}\", 32)", pick(BLOCKS, a)),
            13 => "!inventory".to_string(),
            14 => format!("!craftRecipe(\"{}\", 1)", pick(&["oak_planks", "stick", "bowl", "bread", "sugar"], a)),
            _ => "!clearFurnace".to_string(),
        }
    }

    /// Census change a completed action implies: only crafts and smelts
    /// create or destroy items.
    fn implied_delta(book: &RecipeBook, issued: &str, lines: &str, delta: &mut BTreeMap<String, i64>) {
        let Ok(Some(parsed)) = parse_first_command(issued) else { return };
        let cmd = parsed.command;
        let recipe = match cmd.name.as_str() {
            "craftRecipe" if lines.contains(&format!("Successfully crafted {},", cmd.str_arg(0))) => {
                book.get(cmd.str_arg(0)).filter(|r| r.kind == RecipeKind::Craft)
            }
            "smeltItem" if lines.contains(&format!("Successfully smelted {},", cmd.str_arg(0))) => {
                book.smelt_recipe_for_input(cmd.str_arg(0))
            }
            _ => None,
        };
        if let Some(r) = recipe {
            let times = cmd.num_arg(1) as i64;
            *delta.entry(r.output.clone()).or_default() += r.count as i64 * times;
            for (i, n) in &r.inputs {
                *delta.entry(i.clone()).or_default() -= *n as i64 * times;
            }
        }
    }

    fn apply(census: &mut BTreeMap<String, i64>, delta: &BTreeMap<String, i64>) {
        for (k, v) in delta {
            *census.entry(k.clone()).or_default() += v;
        }
        census.retain(|_, v| *v != 0);
    }

    pub fn base_world() -> WorldState {
        let opts = CookingOptions {
            items: Some(vec!["bread".into(), "mushroom_stew".into(), "baked_potato".into()]),
            ..Default::default()
        };
        let task = generate_cooking_task(5, &opts).unwrap();
        let mut w = reset(&task, 5);
        for name in task.agent_names {
            let inv = &mut w.agent_mut(&name).unwrap().inventory;
            for (item, n) in [("oak_log", 4), ("wheat", 6), ("potato", 3), ("bowl", 2), ("dirt", 3), ("cobblestone", 8)] {
                inv.add(item, n);
            }
        }
        w
    }

    /// (agent, kind, a, b, ticks to wait afterwards)
    pub fn steps() -> impl Strategy<Value = Vec<(usize, u8, usize, usize, u8)>> {
        proptest::collection::vec((0usize..2, any::<u8>(), 0usize..64, 0usize..64, 0u8..40), 1..12)
    }

    pub fn check(base: &WorldState, steps: &[(usize, u8, usize, usize, u8)]) -> Result<(), TestCaseError> {
        let book = RecipeBook::builtin();
        let mut world = base.clone();
        let names = world.agent_names();
        let mut convos = Conversations::new(names.clone());
        let mut expected = world.item_census();
        let mut in_flight: BTreeMap<String, String> = BTreeMap::new();
        let settle = |world: &WorldState, expected: &BTreeMap<String, i64>| -> Result<(), TestCaseError> {
            let census = world.item_census();
            prop_assert_eq!(&census, expected);
            prop_assert!(census.values().all(|&v| v > 0), "non-positive census entry");
            for a in world.agents() {
                prop_assert!(a.inventory.iter().all(|(_, n)| n > 0), "zero count kept in inventory");
            }
            Ok(())
        };
        for &(who, kind, a, b, wait) in steps {
            let actor = names[who].clone();
            let others: Vec<String> = names.iter().filter(|n| **n != actor).cloned().collect();
            let text = command_text(kind, a, b, &others);
            let parsed = parse_first_command(&text).unwrap().unwrap();
            let mut ctx = CommandContext {
                world: &mut world,
                book,
                conversations: &mut convos,
                blueprint: None,
                plan_access: true,
            };
            match execute(&mut ctx, &actor, &parsed.command) {
                Outcome::Pending => {
                    in_flight.insert(actor.clone(), text);
                }
                Outcome::Done(r) => {
                    let mut delta = BTreeMap::new();
                    implied_delta(book, &text, r.message.as_deref().unwrap_or(""), &mut delta);
                    apply(&mut expected, &delta);
                }
            }
            settle(&world, &expected)?;
            for _ in 0..wait {
                let mut delta = BTreeMap::new();
                for c in world.advance_tick() {
                    if let Some(issued) = in_flight.remove(&c.agent) {
                        implied_delta(book, &issued, &c.result.message(), &mut delta);
                    }
                }
                apply(&mut expected, &delta);
                settle(&world, &expected)?;
            }
        }
        Ok(())
    }

    pub fn run(cases: u32) -> Result<(), String> {
        let base = base_world();
        let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
        runner.run(&steps(), |s| check(&base, &s)).map_err(|e| e.to_string())
    }
}
