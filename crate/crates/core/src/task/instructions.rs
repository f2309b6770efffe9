//! Step-by-step recipe instructions: rendered into goal text for agents with
//! recipe access and parsed back by agents that act on them.
//!
//! The text never contains `!`, so relaying it over chat cannot trigger a
//! command.

use crate::recipes::{RecipeBook, RecipeKind};
use crate::world::materials::{self, Source};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Items a cooking world keeps in its chest rather than growing or hunting.
pub const COOKING_CHEST_ITEMS: &[&str] = &["milk_bucket", "gold_ingot", "gold_nugget", "bowl", "egg", "apple", "cocoa_beans"];

pub fn cooking_expands(book: &RecipeBook, item: &str) -> bool {
    !book.is_raw(item) && !COOKING_CHEST_ITEMS.contains(&item)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Instruction {
    Take { item: String, count: u32 },
    Harvest { item: String, block: String, count: u32 },
    Hunt { kind: String, item: String, count: u32 },
    Smelt { input: String, output: String, count: u32 },
    Craft { output: String, times: u32, table: bool, inputs: String },
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instruction::Take { item, count } => write!(f, "Take {count} {item} from the chest."),
            Instruction::Harvest { item, block, count } => {
                write!(f, "Harvest {count} {item} from the farm, the crop block is {block}.")
            }
            Instruction::Hunt { kind, item, count } => {
                write!(f, "Hunt {count} {kind} and pick up the {item} each one drops.")
            }
            Instruction::Smelt { input, output, count } => {
                write!(f, "Smelt {count} {input} in a furnace or smoker to get {count} {output}.")
            }
            Instruction::Craft { output, times, table: true, inputs } => {
                write!(f, "Craft {output} {times} times at a crafting table using {inputs}.")
            }
            Instruction::Craft { output, times, table: false, inputs } => {
                write!(f, "Craft {output} {times} times using {inputs}.")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecipeInstructions {
    pub item: String,
    pub steps: Vec<Instruction>,
}

impl fmt::Display for RecipeInstructions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Recipe for {}:", self.item)?;
        for (i, s) in self.steps.iter().enumerate() {
            writeln!(f, "Step {}: {s}", i + 1)?;
        }
        Ok(())
    }
}

/// Instructions for making `count` of a cooking item from what the farm
/// and chest provide.
pub fn cooking_instructions(book: &RecipeBook, item: &str, count: u32) -> RecipeInstructions {
    let (raws, crafts) = plan_steps(book, item, count);
    let mut steps = Vec::new();
    for (raw, n) in raws {
        steps.push(match materials::source_of(&raw) {
            _ if COOKING_CHEST_ITEMS.contains(&raw.as_str()) => Instruction::Take { item: raw, count: n },
            Source::Block(block) => {
                Instruction::Harvest { item: raw.clone(), block: block.to_string(), count: n }
            }
            Source::Livestock(kind) => Instruction::Hunt { kind: kind.to_string(), item: raw, count: n },
            _ => Instruction::Take { item: raw, count: n },
        });
    }
    steps.extend(crafts);
    RecipeInstructions { item: item.to_string(), steps }
}

fn plan_steps(book: &RecipeBook, item: &str, count: u32) -> (Vec<(String, u32)>, Vec<Instruction>) {
    let mut raws: Vec<(String, u32)> = Vec::new();
    let mut steps = Vec::new();
    fn walk(
        book: &RecipeBook,
        item: &str,
        n: u32,
        top: bool,
        raws: &mut Vec<(String, u32)>,
        steps: &mut Vec<Instruction>,
    ) {
        let recipe = match book.get(item) {
            Some(r) if top || cooking_expands(book, item) => r,
            _ => {
                match raws.iter_mut().find(|(i, _)| i == item) {
                    Some(e) => e.1 += n,
                    None => raws.push((item.to_string(), n)),
                }
                return;
            }
        };
        let times = n.div_ceil(recipe.count);
        for (input, k) in &recipe.inputs {
            walk(book, input, k * times, false, raws, steps);
        }
        steps.push(match recipe.kind {
            RecipeKind::Smelt => Instruction::Smelt {
                input: recipe.inputs[0].0.clone(),
                output: item.to_string(),
                count: times,
            },
            RecipeKind::Craft => Instruction::Craft {
                output: item.to_string(),
                times,
                table: recipe.station != crate::recipes::Station::None,
                inputs: recipe
                    .inputs
                    .iter()
                    .map(|(i, k)| format!("{} {i}", k * times))
                    .collect::<Vec<_>>()
                    .join(" and "),
            },
        });
    }
    walk(book, item, count, true, &mut raws, &mut steps);
    (raws, steps)
}

fn parse_step(sentence: &str) -> Option<Instruction> {
    let s = sentence.trim().trim_end_matches('.');
    let words: Vec<&str> = s.split_whitespace().collect();
    let num = |w: &str| w.parse::<u32>().ok();
    match words.first().copied()? {
        "Take" => Some(Instruction::Take { count: num(words.get(1)?)?, item: words.get(2)?.to_string() }),
        "Harvest" => Some(Instruction::Harvest {
            count: num(words.get(1)?)?,
            item: words.get(2)?.to_string(),
            block: words.last()?.to_string(),
        }),
        "Hunt" => Some(Instruction::Hunt {
            count: num(words.get(1)?)?,
            kind: words.get(2)?.to_string(),
            item: words.get(7)?.to_string(),
        }),
        "Smelt" => Some(Instruction::Smelt {
            count: num(words.get(1)?)?,
            input: words.get(2)?.to_string(),
            output: words.last()?.to_string(),
        }),
        "Craft" => {
            let using = s.find(" using ")?;
            Some(Instruction::Craft {
                output: words.get(1)?.to_string(),
                times: num(words.get(2)?)?,
                table: s.contains("at a crafting table"),
                inputs: s[using + 7..].to_string(),
            })
        }
        _ => None,
    }
}

/// Pull every recipe block out of free text (a goal or a chat message).
pub fn parse_instructions(text: &str) -> Vec<RecipeInstructions> {
    let mut out: Vec<RecipeInstructions> = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("Recipe for ") {
            if let Some(item) = rest.strip_suffix(':') {
                out.push(RecipeInstructions { item: item.trim().to_string(), steps: Vec::new() });
            }
            continue;
        }
        if let (Some(current), Some(rest)) = (out.last_mut(), line.strip_prefix("Step ")) {
            if let Some((_, sentence)) = rest.split_once(": ") {
                if let Some(step) = parse_step(sentence) {
                    current.steps.push(step);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bread_instructions() {
        let r = cooking_instructions(RecipeBook::builtin(), "bread", 1);
        let text = r.to_string();
        assert_eq!(
            text,
            "Recipe for bread:\nStep 1: Harvest 3 wheat from the farm, the crop block is wheat.\nStep 2: Craft bread 1 times at a crafting table using 3 wheat.\n"
        );
        assert!(!text.contains('!'));
    }

    #[test]
    fn round_trip_every_cooking_item() {
        let book = RecipeBook::builtin();
        for item in ["cake", "rabbit_stew", "golden_apple", "cooked_mutton", "mushroom_stew", "golden_carrot", "pumpkin_pie"] {
            let r = cooking_instructions(book, item, 1);
            let parsed = parse_instructions(&format!("Some goal.\n\n{r}"));
            assert_eq!(parsed, vec![r], "{item}");
        }
    }

    #[test]
    fn cake_takes_milk_from_chest() {
        let r = cooking_instructions(RecipeBook::builtin(), "cake", 1);
        assert!(r.steps.contains(&Instruction::Take { item: "milk_bucket".into(), count: 3 }));
        assert!(r.steps.iter().any(|s| matches!(s, Instruction::Craft { output, .. } if output == "sugar")));
    }
}
