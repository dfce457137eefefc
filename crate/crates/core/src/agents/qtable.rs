use std::collections::HashMap;

use rand::Rng;

#[derive(Debug, Clone, Default)]
struct Row {
    values: HashMap<u64, f64>,
    /// Highest stored value, lowest action index on ties.
    best: Option<(u64, f64)>,
}

impl Row {
    fn rescan(&mut self) {
        self.best = self
            .values
            .iter()
            .fold(None, |acc: Option<(u64, f64)>, (&a, &v)| match acc {
                Some((ba, bv)) if bv > v || (bv == v && ba < a) => Some((ba, bv)),
                _ => Some((a, v)),
            });
    }
}

/// Best known action of a state, counting the implicit 0 of unvisited actions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Incumbent {
    /// `None` when an unvisited action (value 0) beats every stored entry.
    pub action: Option<u64>,
    pub value: f64,
}

/// Sparse Q-table: absent `(state, action)` pairs read as 0.
#[derive(Debug, Clone)]
pub struct QTable {
    num_actions: u64,
    rows: HashMap<u64, Row>,
}

impl QTable {
    pub fn new(num_actions: u64) -> Self {
        Self {
            num_actions,
            rows: HashMap::new(),
        }
    }

    pub fn num_actions(&self) -> u64 {
        self.num_actions
    }

    pub fn get(&self, state: u64, action: u64) -> f64 {
        self.rows
            .get(&state)
            .and_then(|r| r.values.get(&action))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn is_visited(&self, state: u64, action: u64) -> bool {
        self.rows
            .get(&state)
            .is_some_and(|r| r.values.contains_key(&action))
    }

    pub fn visited(&self, state: u64) -> usize {
        self.rows.get(&state).map_or(0, |r| r.values.len())
    }

    /// Number of stored entries over all states.
    pub fn len(&self) -> usize {
        self.rows.values().map(|r| r.values.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn set(&mut self, state: u64, action: u64, value: f64) {
        let row = self.rows.entry(state).or_default();
        row.values.insert(action, value);
        match row.best {
            Some((ba, bv)) if value > bv || (value == bv && action < ba) => {
                row.best = Some((action, value))
            }
            Some((ba, _)) if ba == action => row.rescan(),
            Some(_) => {}
            None => row.best = Some((action, value)),
        }
    }

    /// Highest stored entry of a state.
    pub fn best_stored(&self, state: u64) -> Option<(u64, f64)> {
        self.rows.get(&state).and_then(|r| r.best)
    }

    pub fn incumbent(&self, state: u64) -> Incumbent {
        let full = self.visited(state) as u64 >= self.num_actions;
        match self.best_stored(state) {
            Some((a, v)) if v >= 0.0 || full => Incumbent {
                action: Some(a),
                value: v,
            },
            _ => Incumbent {
                action: None,
                value: 0.0,
            },
        }
    }

    /// `max_a Q(state, a)` including the implicit zeros.
    pub fn max_value(&self, state: u64) -> f64 {
        self.incumbent(state).value
    }

    /// A uniformly drawn unvisited action, falling back to the lowest
    /// unvisited index when the row is nearly full.
    pub fn sample_unvisited<R: Rng + ?Sized>(&self, state: u64, rng: &mut R) -> Option<u64> {
        let Some(row) = self.rows.get(&state) else {
            return Some(rng.gen_range(0..self.num_actions));
        };
        if row.values.len() as u64 >= self.num_actions {
            return None;
        }
        for _ in 0..64 {
            let a = rng.gen_range(0..self.num_actions);
            if !row.values.contains_key(&a) {
                return Some(a);
            }
        }
        (0..self.num_actions).find(|a| !row.values.contains_key(a))
    }

    /// Visited states in ascending order.
    pub fn states(&self) -> Vec<u64> {
        let mut s: Vec<u64> = self.rows.keys().copied().collect();
        s.sort_unstable();
        s
    }

    /// Full-row maximum, recomputed from scratch.
    pub fn scan_best(&self, state: u64) -> Option<(u64, f64)> {
        let row = self.rows.get(&state)?;
        let mut entries: Vec<(u64, f64)> = row.values.iter().map(|(&a, &v)| (a, v)).collect();
        entries.sort_by_key(|e| e.0);
        entries.into_iter().fold(None, |acc, (a, v)| match acc {
            Some((_, bv)) if bv >= v => acc,
            _ => Some((a, v)),
        })
    }
}
