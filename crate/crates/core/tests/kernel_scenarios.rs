mod common;

use std::collections::BTreeSet;

use common::*;
use rtsl_core::def::{compile_structure, CompileOptions, Mitigation, Property, TerrainRule};
use rtsl_core::doc::parse_document;
use rtsl_core::fixtures::{load_fixture, paper_game};
use rtsl_core::geometry::{cells_in_vision, Cell};
use rtsl_core::sim::{
    resolve_damage, Action, Amount, BuildJob, Command, RejectReason, SimConfig,
};
use rtsl_core::Position;

fn labels(v: &[&str]) -> BTreeSet<String> {
    v.iter().map(|s| s.to_string()).collect()
}

#[test]
fn starting_banks_follow_the_resource_block() {
    let s = hills();
    for p in ["P1", "P2"] {
        assert_eq!(bank(&s, p, "Wood"), 100.0);
        assert_eq!(bank(&s, p, "Gold"), 100.0);
        assert_eq!(bank(&s, p, "Oil"), 10.0);
        assert_eq!(bank(&s, p, "Food"), 5.0);
    }
    assert_eq!(s.tick, 0);
    assert!(s.entities.contains_key("TownHall1"));
    assert!(s.entities.contains_key("GreatHall1"));
}

#[test]
fn observer_only_game_ticks_as_a_fixed_point() {
    let mut s = rtsl_core::sim::new_game(
        std::sync::Arc::new(paper_game()),
        "Hills",
        &[],
        3,
        SimConfig::default(),
    )
    .unwrap();
    assert!(s.entities.is_empty());
    let before = s.clone();
    s.tick();
    assert_eq!(s.tick, 1);
    assert_eq!(s.entities, before.entities);
    assert_eq!(s.cells, before.cells);
    assert_eq!(s.players, before.players);
}

#[test]
fn town_hall_completes_after_thirty_seconds() {
    let mut s = hills();
    set_bank(&mut s, "P1", "Wood", 799.0);
    set_bank(&mut s, "P1", "Gold", 1200.0);
    let cmd = Command::Construct { building: "Town Hall".into(), x: 10.0, y: 12.0 };
    assert_eq!(
        s.submit("P1", cmd.clone()),
        Err(RejectReason::InsufficientResources(vec!["Wood".into()]))
    );
    assert_eq!((bank(&s, "P1", "Wood"), bank(&s, "P1", "Gold")), (799.0, 1200.0));

    set_bank(&mut s, "P1", "Wood", 800.0);
    assert_eq!(s.submit("P1", cmd), Ok(()));
    assert_eq!((bank(&s, "P1", "Wood"), bank(&s, "P1", "Gold")), (0.0, 0.0));
    let th = &s.entities["TownHall2"];
    assert!(!th.complete);
    assert_eq!(th.hp, 1200.0);
    assert!(matches!(th.action, Action::Build { job: BuildJob::Construct, .. }));

    s.run_ticks(299);
    assert!(!s.entities["TownHall2"].complete);
    s.tick();
    assert!(s.entities["TownHall2"].complete);
    assert_eq!(s.entities["TownHall2"].action, Action::Idle);
}

#[test]
fn construct_rejects_blocked_and_out_of_bounds_sites() {
    let mut s = hills();
    set_bank(&mut s, "P1", "Wood", 5000.0);
    set_bank(&mut s, "P1", "Gold", 5000.0);
    let on_hall = Command::Construct { building: "Town Hall".into(), x: 3.0, y: 2.0 };
    assert_eq!(s.submit("P1", on_hall), Err(RejectReason::BadTerrain));
    let outside = Command::Construct { building: "Town Hall".into(), x: 40.0, y: 2.0 };
    assert_eq!(s.submit("P1", outside), Err(RejectReason::OutOfBounds));
    let unit = Command::Construct { building: "Peasants".into(), x: 8.0, y: 8.0 };
    assert!(matches!(s.submit("P1", unit), Err(RejectReason::UnknownPrototype(_))));
    assert_eq!(bank(&s, "P1", "Wood"), 5000.0);
}

#[test]
fn train_peasants_at_town_hall() {
    let mut s = hills();
    let cmd = Command::Train { location: "TownHall1".into(), product: "Peasants".into() };
    assert_eq!(s.submit("P1", cmd.clone()), Ok(()));
    assert_eq!(bank(&s, "P1", "Gold"), 50.0);
    assert_eq!(bank(&s, "P1", "Food"), 4.0);
    assert_eq!(s.submit("P1", cmd), Err(RejectReason::Busy));
    s.run_ticks(99);
    assert!(!s.entities.contains_key("Peasants2"));
    s.tick();
    let p = &s.entities["Peasants2"];
    assert_eq!(p.owner, "P1");
    assert!(s.map().cells.get(&(p.pos.cell().x, p.pos.cell().y)).is_none());
    let hall = s.footprint(&s.entities["TownHall1"]);
    assert!(!hall.contains(&p.pos.cell()));
}

#[test]
fn research_unlocks_dependent_units() {
    let mut s = hills();
    set_bank(&mut s, "P1", "Wood", 400.0);
    set_bank(&mut s, "P1", "Gold", 400.0);
    s.entities.get_mut("TownHall1").unwrap().proto = "Keep".into();
    let ghost_req = paper_game().faction("Human").unwrap().prototype("Ghost").unwrap().require.clone();
    assert_eq!(ghost_req.techs, ["Masonry"]);

    let research = Command::Train { location: "TownHall1".into(), product: "Masonry".into() };
    assert_eq!(s.submit("P1", research.clone()), Ok(()));
    assert_eq!(bank(&s, "P1", "Wood"), 300.0);
    s.run_ticks(200);
    assert!(s.players["P1"].techs_done.contains("Masonry"));
    assert_eq!(
        s.submit("P1", research),
        Err(RejectReason::AlreadyResearched("Masonry".into()))
    );
}

#[test]
fn archer_walks_three_cells_in_one_second() {
    let mut s = plains();
    let start = s.entities["ElvinArcher1"].pos;
    assert_eq!(
        s.submit("P1", Command::Move { id: "ElvinArcher1".into(), x: 74.5, y: 64.5 }),
        Ok(())
    );
    for k in 1..=10 {
        s.tick();
        let dx = s.entities["ElvinArcher1"].pos.x - start.x;
        assert!((dx - 0.3 * k as f64).abs() < 1e-9, "tick {k}: {dx}");
    }
    let e = &s.entities["ElvinArcher1"];
    assert!((e.pos.x - 67.5).abs() < 1e-9);
    assert_eq!(e.pos.y, 64.5);
    s.run_ticks(30);
    assert_eq!(s.entities["ElvinArcher1"].pos, Position::new(74.5, 64.5));
    assert_eq!(s.entities["ElvinArcher1"].action, Action::Idle);
}

#[test]
fn move_rejections() {
    let mut s = hills();
    let hall = Command::Move { id: "TownHall1".into(), x: 8.5, y: 8.5 };
    assert_eq!(s.submit("P1", hall), Err(RejectReason::CannotMove));
    let theirs = Command::Move { id: "GreatHall1".into(), x: 8.5, y: 8.5 };
    assert_eq!(s.submit("P1", theirs), Err(RejectReason::UnknownId));
    let off = Command::Move { id: "Peasants1".into(), x: -1.0, y: 8.5 };
    assert_eq!(s.submit("P1", off), Err(RejectReason::OutOfBounds));
    assert_eq!(s.submit("P9", Command::Update), Err(RejectReason::UnknownPlayer));
    assert_eq!(s.command_log.len(), 4);
    assert!(s.command_log.iter().all(|c| !c.accepted));
}

/// Hand-applied damage rule: terrain percentages multiply, then exactly one
/// armor entry, then clamp.
fn oracle(max: f64, percents: &[f64], armor: Option<Mitigation>) -> f64 {
    let mut d = percents.iter().fold(max, |d, p| d * (1.0 + p / 100.0));
    d = match armor {
        Some(Mitigation::Flat(f)) => d - f,
        Some(Mitigation::Percent(p)) => d * (1.0 - p / 100.0),
        None => d,
    };
    d.max(0.0)
}

#[test]
fn damage_table() {
    let def = paper_game();
    let archer = def.faction("Human").unwrap().prototype("Elvin Archer").unwrap();
    let grunt = def.faction("Orc").unwrap().prototype("Grunt").unwrap();
    let arrow = archer.attack("Arrow").unwrap();
    let axe = grunt.attack("Axe").unwrap();
    let ground = labels(&["Ground"]);
    let rules = def.map("Hills").unwrap().terrain_rules.clone();

    // Arrow 3-9 against the Shield 4 archer
    let d = resolve_damage(arrow, &ground, archer, &ground, &rules);
    assert_eq!(d, 5.0);
    assert_eq!(d, oracle(9.0, &[], Some(Mitigation::Flat(4.0))));
    // Axe 6-8 against Shield 4
    assert_eq!(resolve_damage(axe, &ground, archer, &ground, &rules), 4.0);
    // Low attacker into High, no armor on the target side
    let mut bare = grunt.clone();
    bare.armor = Default::default();
    let low = labels(&["Ground", "Low"]);
    let high = labels(&["Ground", "High"]);
    let d = resolve_damage(arrow, &low, &bare, &high, &rules);
    assert!((d - 6.75).abs() < 1e-9);
    assert!((d - oracle(9.0, &[-25.0], None)).abs() < 1e-12);
    // the rule only applies in one direction
    assert_eq!(resolve_damage(arrow, &high, &bare, &low, &rules), 9.0);

    // Percent 3 against arrows from the armor listing
    let armor_doc = load_fixture("armor").unwrap().parse().unwrap();
    let armor_node = armor_doc.walk().find(|n| n.tag == "Armor").unwrap();
    let mut listed = bare.clone();
    listed.armor = compile_armor_node(armor_node);
    assert_eq!(listed.armor.per_attack.get("Arrow"), Some(&Mitigation::Percent(3.0)));
    let d = resolve_damage(arrow, &ground, &listed, &ground, &rules);
    assert!((d - 8.73).abs() < 1e-9, "{d}");
}

/// Compiles a bare `<Armor>` block inside a throwaway unit.
fn compile_armor_node(armor: &rtsl_core::doc::DocNode) -> rtsl_core::def::ArmorSpec {
    let mut src = String::from(
        "<Faction>F</Faction><Resource><Gold>1</Gold></Resource><Map><Name>M</Name></Map>\
         <F><Unit><U><Health Point>1</Health Point><Attack><Arrow><Range>1</Range><Damage>1</Damage>\
         <Recharge>1</Recharge></Arrow><Sword><Range>1</Range><Damage>1</Damage><Recharge>1</Recharge>\
         </Sword></Attack>",
    );
    src.push_str(&rtsl_core::doc::serialize_document(&rtsl_core::doc::DocNode::root(vec![armor.clone()])));
    src.push_str("</U></Unit></F>");
    let def = compile_structure(&parse_document(&src).unwrap(), &CompileOptions::default()).unwrap();
    def.factions[0].units[0].armor.clone()
}

#[test]
fn damage_oracle_sweep() {
    let def = paper_game();
    let base = def.faction("Orc").unwrap().prototype("Grunt").unwrap().clone();
    let mut attack = base.attack("Axe").unwrap().clone();
    let percents = [-50.0, -25.0, 0.0, 10.0, 40.0];
    let armors = [
        None,
        Some(Mitigation::Flat(0.0)),
        Some(Mitigation::Flat(3.0)),
        Some(Mitigation::Flat(50.0)),
        Some(Mitigation::Percent(3.0)),
        Some(Mitigation::Percent(100.0)),
    ];
    for max in [0.0, 1.0, 7.5, 9.0, 30.0] {
        attack.damage.universal.max = max;
        for p in percents {
            for q in percents {
                let rules = vec![
                    TerrainRule {
                        label: "Low".into(),
                        attack_damage: [("High".to_string(), p)].into(),
                        ..Default::default()
                    },
                    TerrainRule {
                        label: "Swamp".into(),
                        attack_damage: [("High".to_string(), q)].into(),
                        ..Default::default()
                    },
                ];
                for armor in armors {
                    let mut target = base.clone();
                    target.armor = Default::default();
                    target.armor.universal = armor;
                    let from = labels(&["Low", "Swamp"]);
                    let to = labels(&["High"]);
                    let got = resolve_damage(&attack, &from, &target, &to, &rules);
                    let want = oracle(max, &[p, q], armor);
                    assert!((got - want).abs() < 1e-9, "max {max} p {p} q {q} {armor:?}");
                    assert!(got >= 0.0);
                }
            }
        }
    }
}

#[test]
fn archer_fights_grunt_on_plains() {
    let mut s = plains();
    let grunt = s.place_entity("P2", "Grunt", 67.5, 64.5).unwrap();
    assert_eq!(
        s.submit("P1", Command::Attack { ally: "ElvinArcher1".into(), enemy: grunt.clone() }),
        Ok(())
    );
    // Arrow 9 minus Armor 1, once every 2 s
    s.tick();
    assert_eq!(s.entities[&grunt].hp, 52.0);
    s.run_ticks(19);
    assert_eq!(s.entities[&grunt].hp, 52.0);
    s.tick();
    assert_eq!(s.entities[&grunt].hp, 44.0);
}

#[test]
fn attacker_closes_distance_before_firing() {
    let mut s = plains();
    let grunt = s.place_entity("P2", "Grunt", 69.5, 64.5).unwrap();
    s.submit("P1", Command::Attack { ally: "ElvinArcher1".into(), enemy: grunt.clone() }).unwrap();
    s.tick();
    assert_eq!(s.entities["ElvinArcher1"].pos.x, 64.5);
    assert!(!s.entities["ElvinArcher1"].path.is_empty());
    s.tick();
    assert!(s.entities["ElvinArcher1"].pos.x > 64.5);
    s.run_ticks(10);
    assert!(s.entities[&grunt].hp < 60.0);
    let d = rtsl_core::geometry::distance(s.entities["ElvinArcher1"].pos, s.entities[&grunt].pos);
    assert!(d <= 4.0 + 1e-9);
}

#[test]
fn hidden_enemies_are_unknown_ids() {
    let mut s = plains();
    let near = s.place_entity("P2", "Grunt", 64.5 + 4.9, 64.5).unwrap();
    let far = s.place_entity("P2", "Grunt", 64.5, 64.5 + 5.1).unwrap();
    let attack = |e: &str| Command::Attack { ally: "ElvinArcher1".into(), enemy: e.into() };
    assert_eq!(s.submit("P1", attack(&far)), Err(RejectReason::UnknownId));
    assert_eq!(s.submit("P1", attack(&near)), Ok(()));
    assert_eq!(s.submit("P1", attack("GhostOfNothing")), Err(RejectReason::UnknownId));

    let view = s.visible_update("P1").unwrap();
    let seen: Vec<&str> = view.enemies.iter().map(|e| e.id.as_str()).collect();
    assert_eq!(seen, [near.as_str()]);
    // the spawned grunt at the far corner is not visible either
    assert!(!seen.contains(&"Grunt1"));
}

#[test]
fn lone_archer_sees_only_its_disc() {
    let s = plains();
    let view = s.visible_update("P1").unwrap();
    let cells: BTreeSet<Cell> = view.cells.iter().map(|c| c.cell).collect();
    assert_eq!(cells.len(), 81);
    assert_eq!(cells, cells_in_vision(Position::new(64.5, 64.5), 5.0));
    assert_eq!(view.own.len(), 1);
    assert!(view.enemies.is_empty());
}

#[test]
fn empty_player_view_has_only_bank_and_tick() {
    let mut s = plains();
    s.entities.retain(|_, e| e.owner != "P1");
    let view = s.visible_update("P1").unwrap();
    assert!(view.own.is_empty() && view.enemies.is_empty() && view.cells.is_empty());
    assert_eq!(view.bank["Gold"], 100.0);
    assert_eq!(view.tick, 0);
    assert!(s.visible_update("P7").is_none());
}

#[test]
fn wood_runs_out_after_three_trips_and_the_cell_flips() {
    let mut s = hills();
    let before = s.layer_labels(Cell::new(0, 1));
    assert_eq!(before, ["Wood", "Low", "Air"]);
    assert_eq!(
        s.submit("P1", Command::Gather { unit: "Peasants1".into(), x: 0.5, y: 1.5 }),
        Ok(())
    );
    let mut trips = 0;
    let mut last = bank(&s, "P1", "Wood");
    for _ in 0..400 {
        s.tick();
        let now = bank(&s, "P1", "Wood");
        if now > last {
            assert_eq!(now - last, 100.0);
            trips += 1;
        }
        last = now;
        let carried = s.entities["Peasants1"].carrying.as_ref().map_or(0.0, |c| c.1.to_f64());
        assert!(carried <= 100.0);
    }
    assert_eq!(trips, 3);
    assert_eq!(bank(&s, "P1", "Wood"), 400.0);
    assert_eq!(s.deposit(Cell::new(0, 1), "Wood"), Amount::ZERO);
    assert_eq!(s.layer_labels(Cell::new(0, 1)), ["Ground", "Low", "Air"]);
    assert_eq!(s.entities["Peasants1"].action, Action::Idle);
}

#[test]
fn gather_timing_is_one_unit_per_tick() {
    let mut s = hills();
    s.submit("P1", Command::Gather { unit: "Peasants1".into(), x: 0.5, y: 1.5 }).unwrap();
    s.run_ticks(100);
    assert_eq!(s.deposit(Cell::new(0, 1), "Wood").to_f64(), 200.0);
    assert_eq!(bank(&s, "P1", "Wood"), 100.0);
    s.tick();
    assert_eq!(bank(&s, "P1", "Wood"), 200.0);
}

#[test]
fn two_gatherers_share_a_small_deposit() {
    let mut s = hills();
    s.cells.get_mut(&Cell::new(0, 1)).unwrap().deposits.insert("Wood".into(), Amount::from_f64(10.0));
    s.rebase_totals();
    let start = s.resource_totals();
    let second = s.place_entity("P1", "Peasants", 1.5, 2.5).unwrap();
    for unit in ["Peasants1", second.as_str()] {
        s.submit("P1", Command::Gather { unit: unit.into(), x: 0.5, y: 1.5 }).unwrap();
    }
    s.run_ticks(200);
    assert_eq!(bank(&s, "P1", "Wood"), 110.0);
    assert_eq!(s.resource_totals(), start);
}

#[test]
fn gathering_needs_a_process_building() {
    let mut s = hills();
    s.entities.remove("TownHall1");
    s.submit("P1", Command::Gather { unit: "Peasants1".into(), x: 0.5, y: 0.5 }).unwrap();
    s.run_ticks(150);
    let p = &s.entities["Peasants1"];
    assert_eq!(p.action, Action::Idle);
    assert_eq!(p.carrying.as_ref().map(|c| (c.0.as_str(), c.1.to_f64())), Some(("Gold", 100.0)));
    assert_eq!(bank(&s, "P1", "Gold"), 100.0);
}

#[test]
fn oil_needs_a_rig_over_the_well() {
    let mut s = hills();
    let peon = "Peon1".to_string();
    assert_eq!(
        s.submit("P2", Command::Gather { unit: peon.clone(), x: 12.5, y: 3.5 }),
        Err(RejectReason::MissingBuilding("Oil".into()))
    );
    s.place_entity("P2", "Oil Rig", 12.5, 3.5).unwrap();
    assert_eq!(s.submit("P2", Command::Gather { unit: peon, x: 12.5, y: 3.5 }), Ok(()));
    assert_eq!(
        s.submit("P1", Command::Gather { unit: "Peasants1".into(), x: 12.5, y: 3.5 }),
        Err(RejectReason::NoDeposit)
    );
}

#[test]
fn lockdown_freezes_a_catapult_for_twelve_seconds() {
    let mut s = plains();
    let ghost = s.place_entity("P1", "Ghost", 60.5, 60.5).unwrap();
    let cat = s.place_entity("P2", "Catapult", 63.5, 60.5).unwrap();
    let grunt = s.place_entity("P2", "Grunt", 60.5, 63.5).unwrap();
    let cast = |enemy: &str| Command::GameAction {
        name: "Lockdown".into(),
        allies: vec![ghost.clone()],
        enemies: vec![enemy.to_string()],
        xs: vec![],
        ys: vec![],
    };
    assert_eq!(s.submit("P1", cast(&grunt)), Err(RejectReason::RequireTraitFailed));

    let before = s.entities[&cat].clone();
    assert_eq!(s.effective_speed(&before), 1.0);
    assert_eq!(s.effective_recharge(&before, "Boulder"), 5.0);
    assert_eq!(s.submit("P1", cast(&cat)), Ok(()));
    s.submit("P2", Command::Move { id: cat.clone(), x: 70.5, y: 60.5 }).unwrap();
    s.submit("P2", Command::Attack { ally: cat.clone(), enemy: ghost.clone() }).unwrap_or(());

    for _ in 0..120 {
        let c = &s.entities[&cat];
        assert_eq!(s.effective_speed(c), 0.0);
        assert_eq!(s.effective_recharge(c, "Boulder"), 100000.0);
        s.tick();
    }
    let c = &s.entities[&cat];
    assert_eq!(c.pos, before.pos);
    assert_eq!(s.entities[&ghost].hp, 45.0);
    assert!(s.effects.is_empty());
    assert_eq!(s.effective_speed(c), 1.0);
    assert_eq!(s.effective_recharge(c, "Boulder"), 5.0);
    assert_eq!(c.cooldowns, before.cooldowns);
}

#[test]
fn limit_four_rejects_the_fifth_cast() {
    let mut s = arena();
    let dummy = s.place_entity("P2", "Dummy", 7.5, 5.5).unwrap();
    let cast = Command::GameAction {
        name: "Slow".into(),
        allies: vec!["Mage1".into()],
        enemies: vec![dummy],
        xs: vec![],
        ys: vec![],
    };
    for _ in 0..4 {
        assert_eq!(s.submit("P1", cast.clone()), Ok(()));
    }
    assert_eq!(s.submit("P1", cast), Err(RejectReason::AbilityExhausted));
    assert_eq!(s.entities["Mage1"].ability_uses["Slow"], 0);
}

#[test]
fn effect_expires_after_its_time_limit() {
    let mut s = arena();
    let dummy = s.place_entity("P2", "Dummy", 7.5, 5.5).unwrap();
    s.submit(
        "P1",
        Command::GameAction {
            name: "Slow".into(),
            allies: vec!["Mage1".into()],
            enemies: vec![dummy.clone()],
            xs: vec![],
            ys: vec![],
        },
    )
    .unwrap();
    let fx = &s.effects[0];
    assert_eq!(fx.expires_at_tick, Some(20));
    assert!(fx.expires_at_tick.unwrap() > fx.created_tick);
    let d = s.entities[&dummy].clone();
    assert_eq!(s.effective_speed(&d), 1.0);
    assert_eq!(s.effective_vision(&d), 2.0);
    s.run_ticks(20);
    assert!(s.effects.is_empty());
    let d = &s.entities[&dummy];
    assert_eq!((s.effective_speed(d), s.effective_vision(d)), (2.0, 1.0));
}

#[test]
fn upgrade_keeps_the_health_fraction() {
    let mut s = hills();
    s.entities.get_mut("TownHall1").unwrap().hp = 600.0;
    set_bank(&mut s, "P1", "Wood", 200.0);
    set_bank(&mut s, "P1", "Gold", 300.0);
    let cmd = Command::Train { location: "TownHall1".into(), product: "Keep".into() };
    assert_eq!(s.submit("P1", cmd), Ok(()));
    s.run_ticks(449);
    assert_eq!(s.entities["TownHall1"].proto, "Town Hall");
    s.tick();
    let keep = &s.entities["TownHall1"];
    assert_eq!(keep.proto, "Keep");
    assert_eq!(keep.hp, 1200.0);
    assert_eq!(keep.hp / 2400.0, 600.0 / 1200.0);
    let again = Command::Train { location: "TownHall1".into(), product: "Keep".into() };
    assert_eq!(s.submit("P1", again), Err(RejectReason::NotBuildable("Keep".into())));
}

#[test]
fn repair_restores_two_points_per_second() {
    let mut s = hills();
    s.entities.get_mut("TownHall1").unwrap().hp = 600.0;
    let cmd = Command::GameAction {
        name: "Repair".into(),
        allies: ids(&["Peasants1", "TownHall1"]),
        enemies: vec![],
        xs: vec![],
        ys: vec![],
    };
    assert_eq!(s.submit("P1", cmd), Ok(()));
    let mut summed = 600.0;
    for _ in 0..50 {
        s.tick();
        summed += 2.0 * 0.1;
    }
    let hp = s.entities["TownHall1"].hp;
    assert!((hp - 610.0).abs() < 1e-9, "{hp}");
    assert!((hp - summed).abs() < 1e-9);
}

#[test]
fn repair_caps_at_full_health_and_honours_overrides() {
    let mut s = arena();
    let fixer = s.place_entity("P1", "Fixer", 10.5, 10.5).unwrap();
    let horse = s.place_entity("P1", "Horse", 12.5, 10.5).unwrap();
    let spare = s.place_entity("P1", "Horse", 11.5, 10.5).unwrap();
    let repair = |t: &str| Command::GameAction {
        name: "Repair".into(),
        allies: vec![fixer.clone(), t.to_string()],
        enemies: vec![],
        xs: vec![],
        ys: vec![],
    };
    s.entities.get_mut(&horse).unwrap().hp = 50.0;
    s.submit("P1", repair(&horse)).unwrap();
    s.run_ticks(10);
    // the horse is 2 away: within its override range, repaired at 1 hp/s
    assert_eq!(s.entities[&fixer].pos, Position::new(10.5, 10.5));
    assert!((s.entities[&horse].hp - 51.0).abs() < 1e-9);

    s.submit("P1", repair(&spare)).unwrap();
    s.run_ticks(10);
    assert_eq!(s.entities[&spare].hp, 100.0);
    assert_eq!(s.entities[&fixer].action, Action::Idle);
}

#[test]
fn containers_respect_weight_and_armor_class() {
    let mut s = arena();
    let cart = s.place_entity("P1", "Cart", 10.5, 10.5).unwrap();
    let c3 = s.place_entity("P1", "Crate Three", 11.5, 10.5).unwrap();
    let c4 = s.place_entity("P1", "Crate Four", 10.5, 11.5).unwrap();
    let c2 = s.place_entity("P1", "Crate Two", 9.5, 10.5).unwrap();
    let knight = s.place_entity("P1", "Knight", 10.5, 9.5).unwrap();
    let far = s.place_entity("P1", "Crate Two", 20.5, 10.5).unwrap();
    let load = |units: &[&str]| {
        let mut allies = vec![cart.clone()];
        allies.extend(units.iter().map(|u| u.to_string()));
        Command::GameAction { name: "Load".into(), allies, enemies: vec![], xs: vec![], ys: vec![] }
    };
    let before = s.entities[&c3].clone();
    assert_eq!(s.submit("P1", load(&[&c3, &c4])), Ok(()));
    assert_eq!(s.submit("P1", load(&[&c2])), Err(RejectReason::ContainFull));
    assert_eq!(s.submit("P1", load(&[&knight])), Err(RejectReason::ArmorClassNotAllowed));
    assert_eq!(s.submit("P1", load(&[&far])), Err(RejectReason::DistanceViolation));
    assert_eq!(s.entities[&cart].contained, [c3.clone(), c4.clone()]);
    assert_eq!(
        s.submit("P1", Command::Move { id: c3.clone(), x: 3.5, y: 3.5 }),
        Err(RejectReason::Contained)
    );

    s.submit("P1", Command::Move { id: cart.clone(), x: 14.5, y: 10.5 }).unwrap();
    s.run_ticks(30);
    let unload = Command::GameAction {
        name: "Unload".into(),
        allies: vec![cart.clone(), c3.clone()],
        enemies: vec![],
        xs: vec![15.5],
        ys: vec![10.5],
    };
    assert_eq!(s.submit("P1", unload), Ok(()));
    let after = s.entities[&c3].clone();
    assert_eq!(after.pos, Position::new(15.5, 10.5));
    assert_eq!(rtsl_core::sim::Entity { pos: before.pos, ..after }, before);
    assert_eq!(s.entities[&cart].contained, [c4]);
}

#[test]
fn mutually_lethal_units_die_together() {
    let mut s = plains();
    let grunt = s.place_entity("P2", "Grunt", 65.5, 64.5).unwrap();
    // Arrow 9 - 1 = 8 against the grunt, Axe 8 - 4 = 4 against the archer
    s.entities.get_mut(&grunt).unwrap().hp = 7.5;
    s.entities.get_mut("ElvinArcher1").unwrap().hp = 3.5;
    s.submit("P1", Command::Attack { ally: "ElvinArcher1".into(), enemy: grunt.clone() }).unwrap();
    s.submit("P2", Command::Attack { ally: grunt.clone(), enemy: "ElvinArcher1".into() }).unwrap();
    s.tick();
    assert!(!s.entities.contains_key(&grunt));
    assert!(!s.entities.contains_key("ElvinArcher1"));
}

#[test]
fn zero_health_survives() {
    let mut s = plains();
    let grunt = s.place_entity("P2", "Grunt", 65.5, 64.5).unwrap();
    s.entities.get_mut(&grunt).unwrap().hp = 8.0;
    s.submit("P1", Command::Attack { ally: "ElvinArcher1".into(), enemy: grunt.clone() }).unwrap();
    s.tick();
    assert_eq!(s.entities[&grunt].hp, 0.0);
    s.run_ticks(20);
    assert!(!s.entities.contains_key(&grunt));
}

#[test]
fn area_attacks_skip_layers_they_cannot_reach() {
    let mut s = arena();
    let bomber = s.place_entity("P1", "Bomber", 20.5, 16.5).unwrap();
    let dummy = s.place_entity("P2", "Dummy", 20.5, 20.5).unwrap();
    let bird = s.place_entity("P2", "Bird", 21.5, 20.5).unwrap();
    let dummy2 = s.place_entity("P2", "Dummy", 21.5, 21.5).unwrap();
    assert_eq!(s.occupied_layers(&s.entities[&bird]), BTreeSet::from(["Air".to_string()]));
    s.submit("P1", Command::Attack { ally: bomber.clone(), enemy: dummy.clone() }).unwrap();
    s.tick();
    assert_eq!(s.entities[&dummy].hp, 90.0);
    assert_eq!(s.entities[&dummy2].hp, 90.0);
    assert_eq!(s.entities[&bird].hp, 100.0);
    assert_eq!(
        s.submit("P1", Command::Attack { ally: bomber, enemy: bird.clone() }),
        Err(RejectReason::BadTerrain)
    );
    let gunner = s.place_entity("P1", "Gunner", 21.5, 17.5).unwrap();
    assert_eq!(
        s.submit("P1", Command::Attack { ally: gunner.clone(), enemy: dummy }),
        Err(RejectReason::BadTerrain)
    );
    assert_eq!(s.submit("P1", Command::Attack { ally: gunner, enemy: bird.clone() }), Ok(()));
    s.tick();
    assert_eq!(s.entities[&bird].hp, 90.0);
}

#[test]
fn catapult_minimum_distance() {
    let mut s = plains();
    let cat = s.place_entity("P2", "Catapult", 65.5, 64.5).unwrap();
    s.submit("P2", Command::Attack { ally: cat.clone(), enemy: "ElvinArcher1".into() }).unwrap();
    s.tick();
    assert_eq!(s.entities["ElvinArcher1"].hp, 40.0);
    let mut s = plains();
    let cat = s.place_entity("P2", "Catapult", 68.5, 64.5).unwrap();
    s.submit("P2", Command::Attack { ally: cat, enemy: "ElvinArcher1".into() }).unwrap();
    s.tick();
    // Boulder 30 against Shield 4
    assert_eq!(s.entities["ElvinArcher1"].hp, 14.0);
}

#[test]
fn destroyed_container_takes_its_cargo() {
    let mut s = arena();
    let cart = s.place_entity("P1", "Cart", 10.5, 10.5).unwrap();
    let crate3 = s.place_entity("P1", "Crate Three", 11.5, 10.5).unwrap();
    s.submit(
        "P1",
        Command::GameAction {
            name: "Load".into(),
            allies: vec![cart.clone(), crate3.clone()],
            enemies: vec![],
            xs: vec![],
            ys: vec![],
        },
    )
    .unwrap();
    let tank = s.place_entity("P2", "Tank", 10.5, 11.5).unwrap();
    s.entities.get_mut(&cart).unwrap().hp = 1.0;
    s.submit("P2", Command::Attack { ally: tank, enemy: cart.clone() }).unwrap();
    s.tick();
    assert!(!s.entities.contains_key(&cart));
    assert!(!s.entities.contains_key(&crate3));
}

#[test]
fn modifier_properties_cover_the_lockdown_block() {
    let def = paper_game();
    let l = def.faction("Human").unwrap().prototype("Ghost").unwrap().ability("Lockdown").unwrap();
    let props: BTreeSet<Property> = l.target_modifiers.iter().map(|m| m.property).collect();
    assert_eq!(props, BTreeSet::from([Property::Recharge, Property::Speed]));
}
