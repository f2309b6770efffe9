//! The agent command set: registry, docs, parsing and dispatch.

mod execute;
mod parse;

pub use execute::{action_output, execute, CommandContext, CommandResult, Outcome, DEFAULT_SEARCH_RANGE, NEARBY_RADIUS};
pub use parse::{parse_first_command, remainder, validate, Command, ParseError, Parsed, Value};

pub const HELP_HINT: &str = "Use !help to see all available commands.";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArgType {
    String,
    Number,
    Bool,
}

impl ArgType {
    pub fn label(self) -> &'static str {
        match self {
            ArgType::String => "string",
            ArgType::Number => "number",
            ArgType::Bool => "bool",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Param {
    pub name: &'static str,
    pub ty: ArgType,
    pub description: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CommandSpec {
    pub name: &'static str,
    pub description: &'static str,
    pub params: &'static [Param],
    /// How many trailing params may be left out.
    pub optional: usize,
}

const fn p(name: &'static str, ty: ArgType, description: &'static str) -> Param {
    Param { name, ty, description }
}

const fn c(name: &'static str, description: &'static str, params: &'static [Param]) -> CommandSpec {
    CommandSpec { name, description, params, optional: 0 }
}

use ArgType::{Number as N, String as S};

static REGISTRY: &[CommandSpec] = &[
    c("stats", "Show your position, biome and current action.", &[]),
    c("inventory", "Show what you are carrying.", &[]),
    c("nearbyBlocks", "List block types around you.", &[]),
    c("craftable", "List items you can craft from your inventory right now.", &[]),
    c("entities", "List players, animals and dropped items around you.", &[]),
    c("savedPlaces", "List the places you have remembered.", &[]),
    c(
        "getCraftingPlan",
        "Work out every craft needed to make an item from what you hold, and what is still missing.",
        &[
            p("targetItem", S, "Item to make."),
            p("quantity", N, "How many of it you want."),
        ],
    ),
    c("help", "Show this command list.", &[]),
    c("stop", "Cancel the action you are running.", &[]),
    c(
        "goToPlayer",
        "Walk to another player.",
        &[p("player_name", S, "Who to walk to."), p("closeness", N, "Distance to stop at.")],
    ),
    c(
        "goToCoordinates",
        "Walk to a position.",
        &[
            p("x", N, "X coordinate."),
            p("y", N, "Y coordinate."),
            p("z", N, "Z coordinate."),
            p("closeness", N, "Distance to stop at."),
        ],
    ),
    c(
        "searchForBlock",
        "Walk to the closest block of a type within a range.",
        &[p("type", S, "Block type."), p("search_range", N, "Search radius in blocks.")],
    ),
    c("rememberHere", "Remember your current position under a name.", &[p("name", S, "Name for this place.")]),
    c("goToRememberedPlace", "Walk to a place you remembered.", &[p("name", S, "Name of the place.")]),
    c(
        "givePlayer",
        "Walk to a player and hand over items.",
        &[
            p("player_name", S, "Who receives the items."),
            p("item_name", S, "Item to hand over."),
            p("num", N, "How many."),
        ],
    ),
    c(
        "putInChest",
        "Store items in the closest chest.",
        &[p("item_name", S, "Item to store."), p("num", N, "How many.")],
    ),
    c(
        "takeFromChest",
        "Take items out of the closest chest.",
        &[p("item_name", S, "Item to take."), p("num", N, "How many.")],
    ),
    c("viewChest", "Show what the closest chest holds.", &[]),
    c(
        "discard",
        "Drop items on the ground where you stand.",
        &[p("item_name", S, "Item to drop."), p("num", N, "How many.")],
    ),
    c(
        "collectBlocks",
        "Break and pick up the closest blocks of a type.",
        &[p("type", S, "Block type."), p("num", N, "How many blocks.")],
    ),
    c(
        "craftRecipe",
        "Craft an item, walking to a crafting table when the recipe needs one.",
        &[
            p("recipe_name", S, "Item to craft."),
            p("num", N, "How many times to run the recipe; one run can yield several items."),
        ],
    ),
    c(
        "smeltItem",
        "Cook or smelt an item at the closest furnace or smoker.",
        &[p("item_name", S, "Raw input item."), p("num", N, "How many to smelt.")],
    ),
    c("clearFurnace", "Empty the closest furnace.", &[]),
    c("placeHere", "Place one block where you stand.", &[p("type", S, "Block to place.")]),
    c("attack", "Hunt the closest animal of a type.", &[p("type", S, "Animal type.")]),
    c(
        "startConversation",
        "Open a chat with another bot and send the first message.",
        &[p("player_name", S, "Bot to talk to."), p("message", S, "First message.")],
    ),
    CommandSpec {
        name: "endConversation",
        description: "Close your chat with a bot, optionally with a last message.",
        params: &[p("player_name", S, "Bot to stop talking to."), p("message", S, "Optional parting message.")],
        optional: 1,
    },
    c(
        "checkBlueprintLevel",
        "List the fixes one level of the blueprint still needs.",
        &[p("levelNum", N, "Level to check, starting at 0.")],
    ),
    c("checkBlueprint", "List the fixes the whole blueprint still needs.", &[]),
    c("getBlueprint", "Show the full blueprint, level by level.", &[]),
    c("getBlueprintLevel", "Show one level of the blueprint.", &[p("levelNum", N, "Level to show, starting at 0.")]),
];

pub fn registry() -> &'static [CommandSpec] {
    REGISTRY
}

pub fn spec_for(name: &str) -> Option<&'static CommandSpec> {
    REGISTRY.iter().find(|s| s.name == name)
}

/// Prompt block describing `specs` in order.
pub fn render_command_docs(specs: &[CommandSpec]) -> String {
    if specs.is_empty() {
        return String::new();
    }
    let mut out = String::from("Commands (write them as !name(args), strings in double quotes):\n");
    for s in specs {
        out.push_str(&format!("!{}: {}\n", s.name, s.description));
        if !s.params.is_empty() {
            out.push_str("Params:\n");
            for p in s.params {
                out.push_str(&format!("{}: ({}) {}\n", p.name, p.ty.label(), p.description));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_has_31_unique_commands() {
        let names: std::collections::BTreeSet<_> = registry().iter().map(|s| s.name).collect();
        assert_eq!(names.len(), 31);
        assert_eq!(registry().len(), 31);
    }

    #[test]
    fn docs_mention_plan_params() {
        let docs = render_command_docs(registry());
        assert!(docs.contains("!getCraftingPlan"));
        assert!(docs.contains("targetItem: (string)"));
        assert!(docs.contains("quantity: (number)"));
        assert_eq!(docs, render_command_docs(registry()));
        assert_eq!(render_command_docs(&[]), "");
    }
}
