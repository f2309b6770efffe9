//! Pool everything at the first agent, who then crafts the target.

use super::{n, parse_inventory, s, Out, Policy};
use crate::episode::TaskBrief;
use crate::recipes::{RecipeBook, RecipeKind};
use crate::world::materials::{source_of, Source};
use std::collections::BTreeSet;

const SEND_ALL: &str = "Please send me all your items";
const SENT: &str = "I gave you all my items.";
const ASK_PLAN: &str = "Can you send me the crafting plan for";
const PLAN: &str = "Here is the crafting plan";
const NO_PLAN: &str = "I cannot see crafting plans either.";
const MAX_REPLANS: u32 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Gathering,
    AwaitPlan,
    Crafting,
    Done,
}

pub(super) struct Crafting {
    me: String,
    leader: String,
    followers: Vec<String>,
    target: String,
    plan_access: bool,
    phase: Phase,
    reported: BTreeSet<String>,
    asked: usize,
    replans: u32,
    giving_to: Option<String>,
    plan_for: Option<(String, String)>,
    give_retries: u32,
}

impl Crafting {
    pub(super) fn new(brief: &TaskBrief) -> Self {
        let leader = brief.agents[0].clone();
        Crafting {
            me: brief.agent.clone(),
            followers: brief.agents[1..].to_vec(),
            leader,
            target: brief.targets.first().map(|t| t.item.clone()).unwrap_or_default(),
            plan_access: brief.plan_access,
            phase: Phase::Gathering,
            reported: BTreeSet::new(),
            asked: 0,
            replans: 0,
            giving_to: None,
            plan_for: None,
            give_retries: 0,
        }
    }

    fn leading(&self) -> bool {
        self.me == self.leader
    }

    fn ask_next_for_plan(&mut self, out: &mut Out) {
        if let Some(f) = self.followers.get(self.asked) {
            self.asked += 1;
            out.say(f, format!("{ASK_PLAN} {}?", self.target));
            self.phase = Phase::AwaitPlan;
        } else {
            // nobody can show a plan: work from what we know
            self.phase = Phase::Crafting;
            out.cmd("inventory", vec![]);
        }
    }

    fn craft_from(&mut self, text: &str, out: &mut Out) {
        let inv = parse_inventory(text);
        let book = RecipeBook::builtin();
        let Ok(plan) = book.compute_crafting_plan(&self.target, 1, &inv) else {
            self.phase = Phase::Done;
            return;
        };
        if plan.already_have {
            self.phase = Phase::Done;
            return;
        }
        if !plan.missing.is_empty() {
            self.replans += 1;
            if self.replans > MAX_REPLANS {
                self.phase = Phase::Done;
                return;
            }
            for (item, count) in &plan.missing {
                if let Source::Block(block) = source_of(item) {
                    out.cmd("collectBlocks", vec![s(block), n(*count)]);
                }
            }
            out.wait(2);
            out.cmd("inventory", vec![]);
            return;
        }
        for step in &plan.steps {
            match step.kind {
                RecipeKind::Craft => out.cmd("craftRecipe", vec![s(&step.output), n(step.times)]),
                RecipeKind::Smelt => out.cmd("smeltItem", vec![s(&step.inputs[0].0), n(step.times)]),
            }
        }
    }
}

impl Policy for Crafting {
    fn start(&mut self, out: &mut Out) {
        if !self.leading() {
            return;
        }
        for f in &self.followers {
            out.say(f, format!("{SEND_ALL}, I will craft the {}.", self.target));
        }
    }

    fn on_result(&mut self, command: &str, ok: bool, text: &str, out: &mut Out) {
        match command {
            "inventory" if self.leading() && self.phase == Phase::Crafting => self.craft_from(text, out),
            "inventory" => {
                let Some(to) = self.giving_to.take() else { return };
                for (item, count) in parse_inventory(text).iter() {
                    out.cmd("givePlayer", vec![s(&to), s(item), n(count)]);
                }
                out.say(&to, SENT);
            }
            "givePlayer" if !ok && self.give_retries < 3 => {
                self.give_retries += 1;
                if let Some(c) = out.last_cmd.clone() {
                    out.cmd_front(c);
                }
            }
            "getCraftingPlan" if self.leading() => {
                self.phase = Phase::Crafting;
                out.cmd("inventory", vec![]);
            }
            "getCraftingPlan" => {
                if let Some((to, _)) = self.plan_for.take() {
                    out.say(&to, format!("{PLAN}: {}", text.trim()));
                }
            }
            "craftRecipe" | "smeltItem" if !ok && self.leading() => {
                out.clear();
                self.replans += 1;
                if self.replans <= MAX_REPLANS {
                    out.wait(1);
                    out.cmd("inventory", vec![]);
                }
            }
            _ => {}
        }
    }

    fn on_chat(&mut self, from: &str, body: &str, out: &mut Out) {
        if self.leading() {
            if body.contains(SENT) {
                self.reported.insert(from.to_string());
            } else if body.starts_with(PLAN) && self.phase == Phase::AwaitPlan {
                self.phase = Phase::Crafting;
                out.cmd("inventory", vec![]);
            } else if body.contains(NO_PLAN) && self.phase == Phase::AwaitPlan {
                self.ask_next_for_plan(out);
            }
            return;
        }
        if body.contains(SEND_ALL) {
            self.giving_to = Some(from.to_string());
            out.cmd("inventory", vec![]);
        } else if let Some(rest) = body.strip_prefix(ASK_PLAN) {
            let item = rest.trim().trim_end_matches('?').to_string();
            if self.plan_access {
                self.plan_for = Some((from.to_string(), item.clone()));
                out.cmd("getCraftingPlan", vec![s(&item), n(1)]);
            } else {
                out.say(from, NO_PLAN);
            }
        }
    }

    fn idle(&mut self, out: &mut Out) {
        if !self.leading() || self.phase != Phase::Gathering {
            return;
        }
        if self.reported.len() < self.followers.len() {
            return;
        }
        if self.plan_access {
            out.cmd("getCraftingPlan", vec![s(&self.target), n(1)]);
            self.phase = Phase::AwaitPlan;
        } else {
            self.ask_next_for_plan(out);
        }
    }
}
