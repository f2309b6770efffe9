//! Static material and item tables: passability, block drops, placeable items,
//! livestock drops and world sources for raw items.

use super::StationKind;

pub const AIR: &str = "air";

/// Material of the implicit ground below `Bounds::ground_y`.
pub const GROUND: &str = "grass_block";

const CROPS: &[(&str, &str)] = &[
    ("potatoes", "potato"),
    ("carrots", "carrot"),
    ("beetroots", "beetroot"),
    ("wheat", "wheat"),
    ("brown_mushroom", "brown_mushroom"),
    ("red_mushroom", "red_mushroom"),
    ("sugar_cane", "sugar_cane"),
    ("dandelion", "dandelion"),
];

const LIVESTOCK: &[(&str, &str)] = &[
    ("chicken", "chicken"),
    ("cow", "beef"),
    ("pig", "porkchop"),
    ("rabbit", "rabbit"),
    ("sheep", "mutton"),
];

const SOLID_BLOCKS: &[&str] = &[
    "stone",
    "cobblestone",
    "terracotta",
    "bricks",
    "sandstone",
    "oak_planks",
    "spruce_planks",
    "birch_planks",
    "dark_oak_planks",
    "quartz_block",
    "oak_log",
    "spruce_log",
    "dirt",
    "glass",
    "pumpkin",
    "coal_ore",
    "iron_ore",
    "white_wool",
    "crafting_table",
    "furnace",
    "smoker",
    "chest",
];

pub fn is_carpet(material: &str) -> bool {
    material.ends_with("_carpet")
}

pub fn is_door(material: &str) -> bool {
    material.ends_with("_door")
}

pub fn is_crop(material: &str) -> bool {
    CROPS.iter().any(|(block, _)| *block == material)
}

/// Agents may occupy cells holding passable materials.
pub fn is_passable(material: &str) -> bool {
    material == AIR || is_carpet(material) || is_door(material) || is_crop(material)
}

pub fn is_solid(material: &str) -> bool {
    !is_passable(material)
}

pub fn station_for(material: &str) -> Option<StationKind> {
    match material {
        "crafting_table" => Some(StationKind::CraftingTable),
        "furnace" => Some(StationKind::Furnace),
        "smoker" => Some(StationKind::Smoker),
        "chest" => Some(StationKind::Chest),
        _ => None,
    }
}

/// Blocks that no agent may remove.
pub fn is_unbreakable(material: &str) -> bool {
    material == GROUND || station_for(material).is_some()
}

/// Item obtained from breaking a block. `None` for unbreakable blocks and air.
pub fn block_drop(material: &str) -> Option<&str> {
    if material == AIR || is_unbreakable(material) {
        return None;
    }
    Some(
        CROPS
            .iter()
            .find(|(block, _)| *block == material)
            .map(|(_, item)| *item)
            .unwrap_or(material),
    )
}

/// Block produced by placing `item`, if the item is placeable.
pub fn block_for_item(item: &str) -> Option<&str> {
    if let Some((block, _)) = CROPS.iter().find(|(_, it)| *it == item) {
        return Some(block);
    }
    if SOLID_BLOCKS.contains(&item) || is_carpet(item) || is_door(item) {
        return Some(item);
    }
    None
}

/// Crop block that yields `item` when harvested, e.g. potato -> potatoes.
pub fn crop_block_for(item: &str) -> Option<&'static str> {
    CROPS.iter().find(|(_, it)| *it == item).map(|(block, _)| *block)
}

pub fn livestock_drop(kind: &str) -> Option<&'static str> {
    LIVESTOCK.iter().find(|(k, _)| *k == kind).map(|(_, d)| *d)
}

pub fn livestock_for_drop(item: &str) -> Option<&'static str> {
    LIVESTOCK.iter().find(|(_, d)| *d == item).map(|(k, _)| *k)
}

pub fn livestock_kinds() -> impl Iterator<Item = &'static str> {
    LIVESTOCK.iter().map(|(k, _)| *k)
}

/// Where a provisioned raw item lives in a fresh world.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Block(&'static str),
    Livestock(&'static str),
    Chest,
}

pub fn source_of(item: &str) -> Source {
    if let Some(block) = crop_block_for(item) {
        return Source::Block(block);
    }
    if let Some(kind) = livestock_for_drop(item) {
        return Source::Livestock(kind);
    }
    match item {
        "oak_log" => Source::Block("oak_log"),
        "cobblestone" => Source::Block("cobblestone"),
        "pumpkin" => Source::Block("pumpkin"),
        _ => Source::Chest,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crops_round_trip_between_block_and_item() {
        for (block, item) in CROPS {
            assert_eq!(block_drop(block), Some(*item));
            assert_eq!(block_for_item(item), Some(*block));
        }
    }

    #[test]
    fn stations_do_not_drop() {
        assert_eq!(block_drop("furnace"), None);
        assert_eq!(block_drop(GROUND), None);
        assert_eq!(block_drop("stone"), Some("stone"));
    }

    #[test]
    fn passability() {
        assert!(is_passable("air"));
        assert!(is_passable("lime_carpet"));
        assert!(is_passable("dark_oak_door"));
        assert!(is_passable("wheat"));
        assert!(is_solid("stone"));
        assert!(is_solid("pumpkin"));
    }

    #[test]
    fn food_is_not_placeable() {
        assert_eq!(block_for_item("bread"), None);
        assert_eq!(block_for_item("gold_ingot"), None);
        assert_eq!(block_for_item("potato"), Some("potatoes"));
    }
}
