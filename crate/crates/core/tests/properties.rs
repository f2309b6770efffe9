mod common;

use craftsim_core::evaluator::{apply_fixes, blueprint_diff, score_blueprint};
use craftsim_core::recipes::{RecipeBook, RecipeKind};
use craftsim_core::task::{generate_blueprint, BlueprintConfig};
use craftsim_core::world::provision::{spawn_world_from_spec, ProvisionSpec, WorldKind};
use craftsim_core::world::Inventory;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn chat_schedules_keep_invariants((n, s) in common::chat_schedule()) {
        common::check_chat_schedule(n, &s)?;
    }

    #[test]
    fn random_commands_conserve_items(steps in common::conservation::steps()) {
        let base = common::conservation::base_world();
        common::conservation::check(&base, &steps)?;
    }

    #[test]
    fn diff_lines_close_any_blueprint(m in 0u8..3, r in 0u8..3, w in 0u8..3, c in 0u8..3, seed in 0u64..1000) {
        let bp = generate_blueprint(BlueprintConfig::new(m, r, w, c, 0).unwrap(), seed).unwrap();
        let mut world = spawn_world_from_spec(&ProvisionSpec::new(WorldKind::ConstructionSuperflat), seed);
        let fixes = common::parse_fix_lines(&blueprint_diff(&world, &bp, None).unwrap());
        prop_assert_eq!(fixes.len(), bp.total_cells());
        apply_fixes(&mut world, &bp, &fixes);
        prop_assert_eq!(score_blueprint(&world, &bp).value, 1.0);
    }

    /// Executing a plan's steps in order from the missing items plus the
    /// starting inventory never runs short and ends holding the target.
    #[test]
    fn crafting_plans_are_sound(target_idx in 0usize..500, held in proptest::collection::vec((0usize..500, 1u32..4), 0..4)) {
        let book = RecipeBook::builtin();
        let crafts: Vec<&str> = book.recipes().filter(|r| r.kind == RecipeKind::Craft).map(|r| r.output.as_str()).collect();
        let items: Vec<&str> = book.recipes().map(|r| r.output.as_str()).chain(book.raw_items().iter().map(String::as_str)).collect();
        let target = crafts[target_idx % crafts.len()];
        let mut inv = Inventory::new();
        for (i, n) in held {
            inv.add(items[i % items.len()], n);
        }
        let plan = book.compute_crafting_plan(target, 1, &inv).unwrap();
        let mut work = inv.clone();
        work.merge(&plan.missing_inventory());
        for step in &plan.steps {
            let r = book.get(&step.output).unwrap();
            for (i, n) in &r.inputs {
                prop_assert!(work.remove(i, n * step.times).is_ok(), "{} short of {}", target, i);
            }
            work.add(&r.output, r.count * step.times);
        }
        if plan.already_have {
            prop_assert!(plan.steps.is_empty() && inv.count(target) >= 1);
        }
        prop_assert!(work.count(target) >= 1);
    }
}
