use super::parser::parse_coordinate_tag;

/// Reserved tag names. Anything else is game-specific information.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Keyword {
    Action,
    Armor,
    Attack,
    Build,
    Building,
    /// `Build Time`, `Build Speed` and `Building Time` all land here.
    BuildingTime,
    Contain,
    Damage,
    Distance,
    Enemy,
    /// Also matches the plural `Factions`.
    Faction,
    Gather,
    HealthPoint,
    Limit,
    Map,
    Modify,
    Movement,
    Name,
    Prepare,
    Process,
    Purpose,
    Range,
    Recharge,
    Repair,
    Require,
    Resource,
    Shape,
    Point,
    Square,
    Rectangle,
    Circle,
    FCone,
    BCone,
    Size,
    Speed,
    Terrain,
    TimeLimit,
    Weight,
    Vision,
    Unit,
    UniqueId,
    Upgrade,
    // Distance bounds.
    Less,
    Greater,
    // Entity state as reported in listings and updates.
    Position,
    XY,
    Moving,
    Attacking,
    Gathering,
    Idle,
    // Definition sections that the listings imply but never name.
    Tech,
    Start,
    /// `(x,y)` / `x,y` grid cell tags.
    Coordinate,
    GameSpecific(String),
}

impl Keyword {
    /// Every reserved case, excluding `GameSpecific`.
    pub const RESERVED: &'static [Keyword] = &[
        Keyword::Action,
        Keyword::Armor,
        Keyword::Attack,
        Keyword::Build,
        Keyword::Building,
        Keyword::BuildingTime,
        Keyword::Contain,
        Keyword::Damage,
        Keyword::Distance,
        Keyword::Enemy,
        Keyword::Faction,
        Keyword::Gather,
        Keyword::HealthPoint,
        Keyword::Limit,
        Keyword::Map,
        Keyword::Modify,
        Keyword::Movement,
        Keyword::Name,
        Keyword::Prepare,
        Keyword::Process,
        Keyword::Purpose,
        Keyword::Range,
        Keyword::Recharge,
        Keyword::Repair,
        Keyword::Require,
        Keyword::Resource,
        Keyword::Shape,
        Keyword::Point,
        Keyword::Square,
        Keyword::Rectangle,
        Keyword::Circle,
        Keyword::FCone,
        Keyword::BCone,
        Keyword::Size,
        Keyword::Speed,
        Keyword::Terrain,
        Keyword::TimeLimit,
        Keyword::Weight,
        Keyword::Vision,
        Keyword::Unit,
        Keyword::UniqueId,
        Keyword::Upgrade,
        Keyword::Less,
        Keyword::Greater,
        Keyword::Position,
        Keyword::XY,
        Keyword::Moving,
        Keyword::Attacking,
        Keyword::Gathering,
        Keyword::Idle,
        Keyword::Tech,
        Keyword::Start,
        Keyword::Coordinate,
    ];

    /// Canonical spelling used when emitting documents.
    pub fn canonical(&self) -> &str {
        match self {
            Keyword::Action => "Action",
            Keyword::Armor => "Armor",
            Keyword::Attack => "Attack",
            Keyword::Build => "Build",
            Keyword::Building => "Building",
            Keyword::BuildingTime => "Build Time",
            Keyword::Contain => "Contain",
            Keyword::Damage => "Damage",
            Keyword::Distance => "Distance",
            Keyword::Enemy => "Enemy",
            Keyword::Faction => "Faction",
            Keyword::Gather => "Gather",
            Keyword::HealthPoint => "Health Point",
            Keyword::Limit => "Limit",
            Keyword::Map => "Map",
            Keyword::Modify => "Modify",
            Keyword::Movement => "Movement",
            Keyword::Name => "Name",
            Keyword::Prepare => "Prepare",
            Keyword::Process => "Process",
            Keyword::Purpose => "Purpose",
            Keyword::Range => "Range",
            Keyword::Recharge => "Recharge",
            Keyword::Repair => "Repair",
            Keyword::Require => "Require",
            Keyword::Resource => "Resource",
            Keyword::Shape => "Shape",
            Keyword::Point => "Point",
            Keyword::Square => "Square",
            Keyword::Rectangle => "Rectangle",
            Keyword::Circle => "Circle",
            Keyword::FCone => "F_Cone",
            Keyword::BCone => "B_Cone",
            Keyword::Size => "Size",
            Keyword::Speed => "Speed",
            Keyword::Terrain => "Terrain",
            Keyword::TimeLimit => "Time Limit",
            Keyword::Weight => "Weight",
            Keyword::Vision => "Vision",
            Keyword::Unit => "Unit",
            Keyword::UniqueId => "UniqueID",
            Keyword::Upgrade => "Upgrade",
            Keyword::Less => "Less",
            Keyword::Greater => "Greater",
            Keyword::Position => "Position",
            Keyword::XY => "X,Y",
            Keyword::Moving => "Moving",
            Keyword::Attacking => "Attacking",
            Keyword::Gathering => "Gathering",
            Keyword::Idle => "Idle",
            Keyword::Tech => "Tech",
            Keyword::Start => "Start",
            Keyword::Coordinate => "#,#",
            Keyword::GameSpecific(name) => name,
        }
    }

    pub fn is_reserved(&self) -> bool {
        !matches!(self, Keyword::GameSpecific(_))
    }
}

/// Lowercase with all whitespace removed: the key used for tag matching.
pub fn normalize_key(tag: &str) -> String {
    tag.chars()
        .filter(|c| !c.is_whitespace())
        .flat_map(char::to_lowercase)
        .collect()
}

/// Total classification of a tag name.
pub fn classify_tag(tag: &str) -> Keyword {
    let key = normalize_key(tag);
    let kw = match key.as_str() {
        "action" => Keyword::Action,
        "armor" | "armour" => Keyword::Armor,
        "attack" => Keyword::Attack,
        "build" => Keyword::Build,
        "building" => Keyword::Building,
        "buildtime" | "buildspeed" | "buildingtime" => Keyword::BuildingTime,
        "contain" => Keyword::Contain,
        "damage" => Keyword::Damage,
        "distance" => Keyword::Distance,
        "enemy" => Keyword::Enemy,
        "faction" | "factions" => Keyword::Faction,
        "gather" => Keyword::Gather,
        "healthpoint" => Keyword::HealthPoint,
        "limit" => Keyword::Limit,
        "map" => Keyword::Map,
        "modify" => Keyword::Modify,
        "movement" => Keyword::Movement,
        "name" => Keyword::Name,
        "prepare" => Keyword::Prepare,
        "process" => Keyword::Process,
        "purpose" => Keyword::Purpose,
        "range" => Keyword::Range,
        "recharge" => Keyword::Recharge,
        "repair" => Keyword::Repair,
        "require" => Keyword::Require,
        "resource" => Keyword::Resource,
        "shape" => Keyword::Shape,
        "point" => Keyword::Point,
        "square" => Keyword::Square,
        "rectangle" => Keyword::Rectangle,
        "circle" => Keyword::Circle,
        "f_cone" | "fcone" => Keyword::FCone,
        "b_cone" | "bcone" => Keyword::BCone,
        "size" => Keyword::Size,
        "speed" => Keyword::Speed,
        "terrain" => Keyword::Terrain,
        "timelimit" => Keyword::TimeLimit,
        "weight" => Keyword::Weight,
        "vision" => Keyword::Vision,
        "unit" => Keyword::Unit,
        "uniqueid" => Keyword::UniqueId,
        "upgrade" => Keyword::Upgrade,
        "less" => Keyword::Less,
        "greater" => Keyword::Greater,
        "position" => Keyword::Position,
        "x,y" => Keyword::XY,
        "moving" => Keyword::Moving,
        "attacking" => Keyword::Attacking,
        "gathering" => Keyword::Gathering,
        "idle" => Keyword::Idle,
        "tech" => Keyword::Tech,
        "start" => Keyword::Start,
        _ => match parse_coordinate_tag(tag) {
            Ok(Some(_)) => Keyword::Coordinate,
            _ => Keyword::GameSpecific(tag.to_string()),
        },
    };
    kw
}
