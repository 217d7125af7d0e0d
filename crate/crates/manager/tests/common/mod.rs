#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use rtsl_core::def::{compile_definition, GameDefinition};
use rtsl_core::doc::parse_document;
use rtsl_manager::Agent;

/// A mage next to a flimsy hut.
pub const SKIRMISH: &str = r#"
<Factions>
Red
Blue
</Factions>
<Resource>
  <Gold> 100 </Gold>
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
    </Mage>
  </Unit>
</Red>
<Blue>
  <Building>
    <Hut>
      <Health Point> 20 </Health Point>
      <Terrain> Ground </Terrain>
      <Vision> 2 </Vision>
    </Hut>
  </Building>
</Blue>
<Map>
  <Name> Field </Name>
  <Size> 16-16 </Size>
  <Start>
    <Player 1>
      <Mage> 5.5,5.5 </Mage>
    </Player 1>
    <Player 2>
      <Hut> 8.5,5.5 </Hut>
    </Player 2>
  </Start>
</Map>
"#;

pub fn skirmish() -> Arc<GameDefinition> {
    Arc::new(compile_definition(&parse_document(SKIRMISH).unwrap()).unwrap())
}

/// Sends its opening lines on connect and its scheduled lines on each tick;
/// records everything the server says.
#[derive(Default, Clone)]
pub struct Scripted {
    pub opening: Vec<String>,
    pub at: BTreeMap<u64, Vec<String>>,
    pub heard: Vec<String>,
}

impl Scripted {
    pub fn new(faction: &str) -> Self {
        Self { opening: vec![format!("FACTION {faction}")], ..Self::default() }
    }

    pub fn silent() -> Self {
        Self::default()
    }

    pub fn opening(mut self, line: &str) -> Self {
        self.opening.push(line.to_string());
        self
    }

    pub fn at(mut self, tick: u64, line: &str) -> Self {
        self.at.entry(tick).or_default().push(line.to_string());
        self
    }
}

impl Agent for Scripted {
    fn connect(&mut self) -> Vec<String> {
        self.opening.clone()
    }

    fn on_tick(&mut self, tick: u64) -> Vec<String> {
        self.at.get(&tick).cloned().unwrap_or_default()
    }

    fn on_message(&mut self, line: &str) -> Vec<String> {
        self.heard.push(line.to_string());
        vec![]
    }
}
