use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::mdp::{KnowledgeModel, LabeledMdp, ModelError};

/// Grid coordinate; `x` grows eastwards, `y` grows northwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell(pub i32, pub i32);

impl Cell {
    pub fn x(self) -> i32 {
        self.0
    }

    pub fn y(self) -> i32 {
        self.1
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.0, self.1)
    }
}

impl std::str::FromStr for Cell {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split([':', ',']).map(str::trim).collect();
        match parts.as_slice() {
            [x, y] => Ok(Cell(
                x.parse().map_err(|_| format!("bad x coordinate in {s:?}"))?,
                y.parse().map_err(|_| format!("bad y coordinate in {s:?}"))?,
            )),
            _ => Err(format!("expected x:y, got {s:?}")),
        }
    }
}

/// Compass moves in tie-breaking order, then `Stay`.
pub const ACTIONS: [&str; 9] = ["N", "NE", "E", "SE", "S", "SW", "W", "NW", "Stay"];
pub const STAY: usize = 8;

const OFFSETS: [(i32, i32); 8] = [
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
    (-1, 0),
    (-1, 1),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelCell {
    pub cell: Cell,
    pub prop: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardCell {
    pub cell: Cell,
    pub value: f64,
}

fn default_intended() -> f64 {
    0.9
}

fn default_epsilon() -> f64 {
    0.1
}

/// Grid world description, loadable from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default)]
    pub description: String,
    pub width: i32,
    pub height: i32,
    #[serde(default)]
    pub obstacles: Vec<Cell>,
    #[serde(default)]
    pub labels: Vec<LabelCell>,
    #[serde(default)]
    pub rewards: Vec<RewardCell>,
    #[serde(default = "default_intended")]
    pub intended_probability: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon_agent: f64,
    pub start: Cell,
}

impl GridConfig {
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        serde_json::from_str(text).map_err(|e| ModelError::Grid(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ModelError::Grid(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn slip(&self) -> f64 {
        1.0 - self.intended_probability
    }

    fn inside(&self, c: Cell) -> bool {
        c.0 >= 0 && c.1 >= 0 && c.0 < self.width && c.1 < self.height
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::Grid(msg));
        if self.width <= 0 || self.height <= 0 {
            return bad(format!("dimensions {}x{}", self.width, self.height));
        }
        if !(0.0..=1.0).contains(&self.intended_probability) {
            return bad(format!(
                "intended probability {} outside [0, 1]",
                self.intended_probability
            ));
        }
        if !(0.0..1.0).contains(&self.epsilon_agent) {
            return Err(ModelError::BadEpsilon(self.epsilon_agent));
        }
        let obstacles: BTreeSet<Cell> = self.obstacles.iter().copied().collect();
        for c in obstacles.iter().chain([&self.start]) {
            if !self.inside(*c) {
                return bad(format!("cell {c} outside the grid"));
            }
        }
        if obstacles.contains(&self.start) {
            return bad(format!("start cell {} is an obstacle", self.start));
        }
        for l in &self.labels {
            if !self.inside(l.cell) {
                return bad(format!("label cell {} outside the grid", l.cell));
            }
            if obstacles.contains(&l.cell) {
                return bad(format!("labeled cell {} is an obstacle", l.cell));
            }
        }
        for r in &self.rewards {
            if !self.inside(r.cell) {
                return bad(format!("reward cell {} outside the grid", r.cell));
            }
            if !r.value.is_finite() {
                return bad(format!("reward at {} is not finite", r.cell));
            }
        }
        Ok(())
    }
}

/// Grid world built from a [`GridConfig`]; obstacle cells are not states.
#[derive(Debug, Clone)]
pub struct GridWorld {
    pub config: GridConfig,
    cells: Vec<Cell>,
    index: HashMap<Cell, usize>,
}

impl GridWorld {
    pub fn num_states(&self) -> usize {
        self.cells.len()
    }

    pub fn cell(&self, s: usize) -> Cell {
        self.cells[s]
    }

    pub fn state(&self, c: Cell) -> Option<usize> {
        self.index.get(&c).copied()
    }

    pub fn start_state(&self) -> usize {
        self.index[&self.config.start]
    }

    /// First state labeled with `prop`.
    pub fn labeled_state(&self, prop: &str) -> Option<usize> {
        self.config
            .labels
            .iter()
            .find(|l| l.prop == prop)
            .and_then(|l| self.state(l.cell))
    }

    /// ASCII map, north at the top.
    pub fn render(&self) -> String {
        let cfg = &self.config;
        let mut labels: HashMap<Cell, Vec<&str>> = HashMap::new();
        for l in &cfg.labels {
            labels.entry(l.cell).or_default().push(&l.prop);
        }
        let rewards: HashMap<Cell, f64> = cfg.rewards.iter().map(|r| (r.cell, r.value)).collect();
        let mut out = String::new();
        if !cfg.description.is_empty() {
            let _ = writeln!(out, "{}", cfg.description);
        }
        let border = format!("+{}+", "-".repeat(6 * cfg.width as usize));
        let _ = writeln!(out, "{border}");
        for y in (0..cfg.height).rev() {
            out.push('|');
            for x in 0..cfg.width {
                let c = Cell(x, y);
                let text = if self.state(c).is_none() {
                    "######".to_string()
                } else {
                    let mut t = String::new();
                    if c == cfg.start {
                        t.push('@');
                    }
                    if let Some(names) = labels.get(&c) {
                        t.push_str(&names.join("/"));
                    } else if let Some(v) = rewards.get(&c) {
                        t.push_str(&format!("+{v}"));
                    } else if t.is_empty() {
                        t.push('.');
                    }
                    format!("{t:^6.6}")
                };
                out.push_str(&text);
            }
            let _ = writeln!(out, "| {y}");
        }
        let _ = writeln!(out, "{border}");
        out.push(' ');
        for x in 0..cfg.width {
            let _ = write!(out, "{x:^6}");
        }
        out.push('\n');
        out
    }
}

/// Builds the true dynamics and the agent's knowledge of them.
///
/// Moves reach the intended neighbour with the intended probability and each
/// of the two 45-degree flanking neighbours with half of the remaining mass.
/// Mass that would leave the grid or hit an obstacle stays on the current cell.
pub fn build_gridworld(
    cfg: &GridConfig,
) -> Result<(GridWorld, LabeledMdp, KnowledgeModel), ModelError> {
    cfg.validate()?;
    let obstacles: BTreeSet<Cell> = cfg.obstacles.iter().copied().collect();
    let mut cells = Vec::new();
    let mut index = HashMap::new();
    for y in 0..cfg.height {
        for x in 0..cfg.width {
            let c = Cell(x, y);
            if !obstacles.contains(&c) {
                index.insert(c, cells.len());
                cells.push(c);
            }
        }
    }
    let world = GridWorld {
        config: cfg.clone(),
        cells,
        index,
    };

    let flank = cfg.slip() / 2.0;
    let mut transitions = Vec::with_capacity(world.num_states());
    for &c in &world.cells {
        let here = world.index[&c];
        let mut per_action = Vec::with_capacity(ACTIONS.len());
        for a in 0..ACTIONS.len() {
            if a == STAY {
                per_action.push(vec![(here, 1.0)]);
                continue;
            }
            let mut dist: Vec<(usize, f64)> = Vec::with_capacity(3);
            let mut add = |dir: usize, p: f64| {
                if p == 0.0 {
                    return;
                }
                let (dx, dy) = OFFSETS[dir];
                let target = Cell(c.0 + dx, c.1 + dy);
                let to = world.index.get(&target).copied().unwrap_or(here);
                match dist.iter_mut().find(|(t, _)| *t == to) {
                    Some(entry) => entry.1 += p,
                    None => dist.push((to, p)),
                }
            };
            add(a, cfg.intended_probability);
            add((a + 7) % 8, flank);
            add((a + 1) % 8, flank);
            per_action.push(dist);
        }
        transitions.push(per_action);
    }

    let mut ap: Vec<String> = Vec::new();
    for l in &cfg.labels {
        if !ap.contains(&l.prop) {
            ap.push(l.prop.clone());
        }
    }
    let mut labels = vec![Vec::new(); world.num_states()];
    for l in &cfg.labels {
        let s = world.index[&l.cell];
        if !labels[s].contains(&l.prop) {
            labels[s].push(l.prop.clone());
        }
    }
    let mut rewards = vec![0.0; world.num_states()];
    for r in &cfg.rewards {
        if let Some(&s) = world.index.get(&r.cell) {
            rewards[s] = r.value;
        }
    }
    let mdp = LabeledMdp::new(
        ACTIONS.iter().map(|s| s.to_string()).collect(),
        STAY,
        transitions,
        rewards,
        ap,
        labels,
    )?;
    let km = KnowledgeModel::from_mdp(&mdp, cfg.epsilon_agent)?;
    Ok((world, mdp, km))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn open_grid() -> GridConfig {
        GridConfig {
            description: String::new(),
            width: 8,
            height: 8,
            obstacles: vec![Cell(4, 4)],
            labels: vec![LabelCell {
                cell: Cell(1, 1),
                prop: "A".into(),
            }],
            rewards: vec![RewardCell {
                cell: Cell(6, 6),
                value: 10.0,
            }],
            intended_probability: 0.9,
            epsilon_agent: 0.1,
            start: Cell(0, 0),
        }
    }

    #[test]
    fn interior_north() {
        let (w, mdp, _) = build_gridworld(&open_grid()).unwrap();
        let s = w.state(Cell(2, 2)).unwrap();
        let dist = mdp.distribution(s, 0);
        let sum: f64 = dist.iter().map(|d| d.1).sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!((mdp.probability(s, 0, w.state(Cell(2, 3)).unwrap()) - 0.9).abs() < 1e-12);
        assert!((mdp.probability(s, 0, w.state(Cell(1, 3)).unwrap()) - 0.05).abs() < 1e-12);
        assert!((mdp.probability(s, 0, w.state(Cell(3, 3)).unwrap()) - 0.05).abs() < 1e-12);
        assert_eq!(dist.len(), 3);
    }

    #[test]
    fn stay_is_deterministic() {
        let (w, mdp, _) = build_gridworld(&open_grid()).unwrap();
        for s in 0..w.num_states() {
            assert_eq!(mdp.distribution(s, STAY), &[(s, 1.0)]);
        }
    }

    #[test]
    fn corner_south_west_stays() {
        let (w, mdp, _) = build_gridworld(&open_grid()).unwrap();
        let s = w.state(Cell(0, 0)).unwrap();
        assert_eq!(mdp.distribution(s, 5), &[(s, 1.0)]);
    }

    #[test]
    fn obstacle_redirects_to_self() {
        let (w, mdp, km) = build_gridworld(&open_grid()).unwrap();
        let s = w.state(Cell(4, 3)).unwrap();
        // north is the obstacle
        assert!((mdp.probability(s, 0, s) - 0.9).abs() < 1e-12);
        assert_eq!(km.likely(s, 0), &[s]);
        assert!(w.state(Cell(4, 4)).is_none());
    }

    #[test]
    fn reward_on_entry() {
        let (w, mdp, _) = build_gridworld(&open_grid()).unwrap();
        let target = w.state(Cell(6, 6)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (next, r) = mdp.step(target, STAY, &mut rng);
        assert_eq!(next, target);
        assert_eq!(r, 10.0);
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = open_grid();
        cfg.obstacles.push(Cell(1, 1));
        assert!(build_gridworld(&cfg).is_err());
        let mut cfg = open_grid();
        cfg.intended_probability = 1.5;
        assert!(build_gridworld(&cfg).is_err());
        let mut cfg = open_grid();
        cfg.start = Cell(4, 4);
        assert!(build_gridworld(&cfg).is_err());
        let mut cfg = open_grid();
        cfg.width = 0;
        assert!(build_gridworld(&cfg).is_err());
    }

    #[test]
    fn render_shows_obstacles_and_labels() {
        let (w, _, _) = build_gridworld(&open_grid()).unwrap();
        let map = w.render();
        assert!(map.contains("######"));
        assert!(map.contains("A"));
        assert!(map.contains("+10"));
        assert_eq!(map.lines().count(), 8 + 3);
    }

    #[test]
    fn cell_parsing() {
        assert_eq!("3:4".parse::<Cell>().unwrap(), Cell(3, 4));
        assert_eq!("3,4".parse::<Cell>().unwrap(), Cell(3, 4));
        assert!("3".parse::<Cell>().is_err());
    }
}
