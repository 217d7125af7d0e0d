#![allow(dead_code)]

use std::sync::Arc;

use rtsl_core::def::{compile_definition, GameDefinition};
use rtsl_core::doc::parse_document;
use rtsl_core::fixtures::paper_game;
use rtsl_core::sim::{new_game, Amount, GameState, SimConfig};

/// A small two-faction game for cases the bundled listings do not reach.
pub const ARENA: &str = r#"
<Factions>
Red
Blue
</Factions>
<Resource>
  <Gold> 1000 </Gold>
</Resource>
<Red>
  <Unit>
    <Mage>
      <Health Point> 50 </Health Point>
      <Terrain> Ground </Terrain>
      <Vision> 8 </Vision>
      <Speed> 2 </Speed>
      <Attack>
        <Bolt>
          <Range> 6 </Range>
          <Damage> 5 </Damage>
          <Recharge> 1 </Recharge>
        </Bolt>
      </Attack>
      <Slow>
        <Enemy>
          <Speed> -50% </Speed>
          <Vision> 2 </Vision>
        </Enemy>
        <Time Limit> 2 </Time Limit>
        <Limit> 4 </Limit>
      </Slow>
    </Mage>
    <Bomber>
      <Health Point> 50 </Health Point>
      <Terrain> Ground </Terrain>
      <Vision> 8 </Vision>
      <Speed> 1 </Speed>
      <Attack>
        <Blast>
          <Range> 6 </Range>
          <Damage> 10 </Damage>
          <Recharge> 1 </Recharge>
          <Shape>
            <Circle> 1.5 </Circle>
          </Shape>
        </Blast>
      </Attack>
    </Bomber>
    <Gunner>
      <Health Point> 50 </Health Point>
      <Terrain> Ground </Terrain>
      <Vision> 8 </Vision>
      <Attack>
        <Flak>
          <Range> 6 </Range>
          <Damage> 10 </Damage>
          <Recharge> 1 </Recharge>
          <Terrain> Air </Terrain>
        </Flak>
      </Attack>
    </Gunner>
    <Cart>
      <Health Point> 100 </Health Point>
      <Terrain> Ground </Terrain>
      <Vision> 2 </Vision>
      <Speed> 2 </Speed>
      <Contain>
        <Weight> 8 </Weight>
        <Armor> Light </Armor>
      </Contain>
    </Cart>
    <Crate Two>
      <Health Point> 10 </Health Point>
      <Terrain> Ground </Terrain>
      <Speed> 1 </Speed>
      <Weight> 2 </Weight>
      <Armor> Light </Armor>
    </Crate Two>
    <Crate Three>
      <Health Point> 10 </Health Point>
      <Terrain> Ground </Terrain>
      <Speed> 1 </Speed>
      <Weight> 3 </Weight>
      <Armor> Light </Armor>
    </Crate Three>
    <Crate Four>
      <Health Point> 10 </Health Point>
      <Terrain> Ground </Terrain>
      <Speed> 1 </Speed>
      <Weight> 4 </Weight>
      <Armor> Light </Armor>
    </Crate Four>
    <Knight>
      <Health Point> 10 </Health Point>
      <Terrain> Ground </Terrain>
      <Speed> 1 </Speed>
      <Weight> 1 </Weight>
      <Armor> Heavy </Armor>
    </Knight>
    <Fixer>
      <Health Point> 20 </Health Point>
      <Terrain> Ground </Terrain>
      <Vision> 3 </Vision>
      <Speed> 2 </Speed>
      <Repair>
        2
        <Range>1</Range>
        <Horse>
          1
          <Range>2</Range>
        </Horse>
      </Repair>
    </Fixer>
    <Horse>
      <Health Point> 100 </Health Point>
      <Terrain> Ground </Terrain>
      <Speed> 4 </Speed>
    </Horse>
  </Unit>
</Red>
<Blue>
  <Unit>
    <Dummy>
      <Health Point> 100 </Health Point>
      <Terrain> Ground </Terrain>
      <Vision> 1 </Vision>
      <Speed> 2 </Speed>
      <Biological> True </Biological>
    </Dummy>
    <Tank>
      <Health Point> 100 </Health Point>
      <Terrain> Ground </Terrain>
      <Vision> 1 </Vision>
      <Speed> 2 </Speed>
      <Attack>
        <Cannon>
          <Range> 3 </Range>
          <Damage> 4 </Damage>
          <Recharge> 2 </Recharge>
        </Cannon>
      </Attack>
    </Tank>
    <Bird>
      <Health Point> 100 </Health Point>
      <Terrain> Air </Terrain>
      <Vision> 1 </Vision>
    </Bird>
  </Unit>
</Blue>
<Map>
  <Name> Arena </Name>
  <Size> 32-32 </Size>
  <(20,20)>
    <Terrain>
      Ground
      Air
    </Terrain>
  </(20,20)>
  <(21,20)>
    <Terrain>
      Ground
      Air
    </Terrain>
  </(21,20)>
  <Start>
    <Player 1>
      <Mage> 5.5,5.5 </Mage>
    </Player 1>
    <Player 2>
      <Dummy> 28.5,28.5 </Dummy>
    </Player 2>
  </Start>
</Map>
"#;

pub fn arena_def() -> Arc<GameDefinition> {
    Arc::new(compile_definition(&parse_document(ARENA).unwrap()).unwrap())
}

pub fn arena() -> GameState {
    new_game(arena_def(), "Arena", &players("Red", "Blue"), 7, SimConfig::default()).unwrap()
}

pub fn players(a: &str, b: &str) -> Vec<(String, String)> {
    vec![("P1".into(), a.into()), ("P2".into(), b.into())]
}

pub fn paper(map: &str, seed: u64, config: SimConfig) -> GameState {
    new_game(Arc::new(paper_game()), map, &players("Human", "Orc"), seed, config).unwrap()
}

pub fn hills() -> GameState {
    paper("Hills", 7, SimConfig::default())
}

pub fn plains() -> GameState {
    paper("Plains", 7, SimConfig::default())
}

pub fn set_bank(state: &mut GameState, player: &str, resource: &str, amount: f64) {
    state
        .players
        .get_mut(player)
        .unwrap()
        .bank
        .insert(resource.to_string(), Amount::from_f64(amount));
}

pub fn bank(state: &GameState, player: &str, resource: &str) -> f64 {
    state.players[player]
        .bank
        .get(resource)
        .copied()
        .unwrap_or_default()
        .to_f64()
}

pub fn ids(strs: &[&str]) -> Vec<String> {
    strs.iter().map(|s| s.to_string()).collect()
}
