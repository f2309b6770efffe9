//! Each bot cooks its share of the dishes from recipe steps it was given
//! or asked for, then hands them over (or keeps them in Hell's Kitchen).

use super::{n, s, Out, Policy};
use crate::episode::TaskBrief;
use crate::recipes::RecipeBook;
use crate::task::instructions::{cooking_instructions, parse_instructions, Instruction, RecipeInstructions};
use std::collections::{BTreeMap, VecDeque};

const ASK: &str = "Can you send me the recipe for ";
const HAVE: &str = "Here is the recipe.";
const DONT_HAVE: &str = "I do not have the recipe for ";
const READY: &str = "My dishes are ready, bring me yours.";
const MAX_RETRIES: u32 = 4;

pub(super) struct Cooking {
    me: String,
    others: Vec<String>,
    receiver: String,
    hells_kitchen: bool,
    known: BTreeMap<String, RecipeInstructions>,
    todo: VecDeque<String>,
    asking: Option<(String, usize)>,
    cooking: Option<String>,
    made: Vec<String>,
    receiver_ready: bool,
    announced: bool,
    handed_over: bool,
    retries: u32,
}

fn instruction_commands(step: &Instruction, out: &mut Out) {
    match step {
        Instruction::Take { item, count } => out.cmd("takeFromChest", vec![s(item), n(*count)]),
        Instruction::Harvest { block, count, .. } => out.cmd("collectBlocks", vec![s(block), n(*count)]),
        Instruction::Hunt { kind, count, .. } => {
            for _ in 0..*count {
                out.cmd("attack", vec![s(kind)]);
            }
        }
        Instruction::Smelt { input, count, .. } => out.cmd("smeltItem", vec![s(input), n(*count)]),
        Instruction::Craft { output, times, .. } => out.cmd("craftRecipe", vec![s(output), n(*times)]),
    }
}

impl Cooking {
    pub(super) fn new(brief: &TaskBrief) -> Self {
        let me_idx = brief.agents.iter().position(|a| *a == brief.agent).unwrap_or(0);
        let count = brief.agents.len().max(1);
        let dishes: VecDeque<String> = if brief.hells_kitchen {
            brief.assigned.iter().filter_map(|&i| brief.targets.get(i)).map(|t| t.item.clone()).collect()
        } else {
            brief.targets.iter().enumerate().filter(|(i, _)| i % count == me_idx).map(|(_, t)| t.item.clone()).collect()
        };
        let receiver = brief
            .goal
            .split_once("give all of these to ")
            .and_then(|(_, rest)| rest.split(':').next())
            .map(str::to_string)
            .unwrap_or_else(|| brief.agents[0].clone());
        Cooking {
            me: brief.agent.clone(),
            others: brief.others(),
            receiver,
            hells_kitchen: brief.hells_kitchen,
            known: parse_instructions(&brief.goal).into_iter().map(|r| (r.item.clone(), r)).collect(),
            todo: dishes,
            asking: None,
            cooking: None,
            made: Vec::new(),
            receiver_ready: false,
            announced: false,
            handed_over: false,
            retries: 0,
        }
    }

    fn ask(&mut self, item: String, from_idx: usize, out: &mut Out) {
        match self.others.get(from_idx) {
            Some(other) => {
                out.say(other, format!("{ASK}{item}?"));
                self.asking = Some((item, from_idx));
            }
            None => {
                // nobody shared it, fall back on general cooking knowledge
                let r = cooking_instructions(RecipeBook::builtin(), &item, 1);
                self.known.insert(item, r);
                self.asking = None;
            }
        }
    }
}

impl Policy for Cooking {
    fn start(&mut self, _out: &mut Out) {}

    fn on_result(&mut self, command: &str, ok: bool, _text: &str, out: &mut Out) {
        if ok || command.is_empty() || command == "startConversation" {
            return;
        }
        if self.retries < MAX_RETRIES {
            self.retries += 1;
            if let Some(c) = out.last_cmd.clone() {
                out.cmd_front(c);
                out.queue.push_front(super::Op::Wait(2));
            }
        }
    }

    fn on_chat(&mut self, from: &str, body: &str, out: &mut Out) {
        if let Some(rest) = body.strip_prefix(ASK) {
            let item = rest.trim().trim_end_matches('?');
            match self.known.get(item) {
                Some(r) => out.say(from, format!("{HAVE}\n{r}")),
                None => out.say(from, format!("{DONT_HAVE}{item}.")),
            }
            return;
        }
        if body.contains(READY) {
            self.receiver_ready = true;
            return;
        }
        for r in parse_instructions(body) {
            if self.asking.as_ref().is_some_and(|(item, _)| *item == r.item) {
                self.asking = None;
            }
            self.known.insert(r.item.clone(), r);
        }
        if let Some(rest) = body.strip_prefix(DONT_HAVE) {
            let item = rest.trim().trim_end_matches('.');
            if let Some((asked, idx)) = self.asking.clone() {
                if asked == item {
                    self.ask(asked, idx + 1, out);
                }
            }
        }
    }

    fn idle(&mut self, out: &mut Out) {
        if let Some(dish) = self.cooking.take() {
            self.made.push(dish);
            self.retries = 0;
        }
        if self.asking.is_some() {
            return;
        }
        if let Some(dish) = self.todo.front().cloned() {
            match self.known.get(&dish) {
                Some(r) => {
                    for step in &r.steps {
                        instruction_commands(step, out);
                    }
                    self.todo.pop_front();
                    self.cooking = Some(dish);
                }
                None => self.ask(dish, 0, out),
            }
            return;
        }
        if self.hells_kitchen {
            return;
        }
        if self.me == self.receiver {
            if !self.announced {
                self.announced = true;
                for o in self.others.clone() {
                    out.say(&o, READY);
                }
            }
        } else if self.receiver_ready && !self.handed_over {
            self.handed_over = true;
            for dish in &self.made {
                out.cmd("givePlayer", vec![s(&self.receiver), s(dish), n(1)]);
            }
        }
    }
}
