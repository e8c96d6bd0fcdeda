//! Atom rearrangement planning and the rearrangement timing / idling model.

use serde::{Deserialize, Serialize};

use crate::circuit::EdgeColoring;
use crate::codes::ProductLayout;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MotionError {
    #[error("order is not a permutation of 0..{0}")]
    InvalidPermutation(usize),
    #[error("positions must be strictly increasing and below the trap count")]
    InvalidPositions,
    #[error("{atoms} atoms need at least 3N/2 traps, got {traps}")]
    InsufficientWorkspace { atoms: usize, traps: usize },
    #[error("layout mismatch: {0}")]
    StructureMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Move {
    pub atom: usize,
    pub from: usize,
    pub to: usize,
}

/// Layers of simultaneous moves on a line of `traps` sites. Atom `i` is the
/// `i`-th atom from the left at the start; `order[i]` is its final rank.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveSchedule {
    pub traps: usize,
    pub initial: Vec<usize>,
    pub order: Vec<usize>,
    pub layers: Vec<Vec<Move>>,
    /// Divide-and-conquer levels that moved at least one atom.
    pub levels: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotionParams {
    /// Transfer time between static and dynamic traps (µs).
    pub tau_t_us: f64,
    /// Peak acceleration (µm/µs²).
    pub a_p: f64,
    /// Grid spacing (µm).
    pub d_um: f64,
    /// Coherence time (µs).
    pub t_c_us: f64,
}

impl MotionParams {
    pub fn paper() -> Self {
        MotionParams { tau_t_us: 50.0, a_p: 0.02, d_um: 5.0, t_c_us: 10e6 }
    }

    pub fn validate(&self) -> Result<(), MotionError> {
        for (name, v) in [("tau_t", self.tau_t_us), ("a_p", self.a_p), ("d", self.d_um), ("T_c", self.t_c_us)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(MotionError::InvalidParameter(format!("{name} = {v} must be positive")));
            }
        }
        Ok(())
    }
}

impl Default for MotionParams {
    fn default() -> Self {
        Self::paper()
    }
}

fn need(n: usize) -> usize {
    3 * n / 2
}

struct Segment {
    lo: usize,
    width: usize,
    /// Atoms in left-to-right order, compact at `lo`.
    atoms: Vec<usize>,
}

/// Plans an arbitrary 1D rearrangement in `ceil(log2 N)` divide-and-conquer
/// levels. Each level moves the atoms bound for the right part of every
/// segment into the free space on its right, then compacts both parts so
/// each has room for the next level. The left part keeps an even number of
/// atoms, so ranks `2t` and `2t+1` end on neighbouring traps.
pub fn plan_1d(order: &[usize], positions: &[usize], traps: usize) -> Result<MoveSchedule, MotionError> {
    let n = order.len();
    let mut seen = vec![false; n];
    for &o in order {
        if o >= n || std::mem::replace(&mut seen[o], true) {
            return Err(MotionError::InvalidPermutation(n));
        }
    }
    if positions.len() != n || positions.windows(2).any(|w| w[0] >= w[1]) || positions.last().is_some_and(|&p| p >= traps) {
        return Err(MotionError::InvalidPositions);
    }
    if 2 * traps < 3 * n {
        return Err(MotionError::InsufficientWorkspace { atoms: n, traps });
    }
    let mut pos = positions.to_vec();
    let mut layers = Vec::new();
    let mut push = |layer: Vec<Move>, pos: &mut Vec<usize>| {
        if !layer.is_empty() {
            for m in &layer {
                pos[m.atom] = m.to;
            }
            layers.push(layer);
        }
    };
    let compact: Vec<Move> =
        (0..n).filter(|&i| pos[i] != i).map(|i| Move { atom: i, from: pos[i], to: i }).collect();
    push(compact, &mut pos);

    let mut active = vec![Segment { lo: 0, width: traps, atoms: (0..n).collect() }];
    let mut levels = 0;
    loop {
        active.retain(|s| s.atoms.windows(2).any(|w| order[w[0]] > order[w[1]]));
        if active.is_empty() {
            break;
        }
        levels += 1;
        let mut split = Vec::new();
        let mut gather = Vec::new();
        let mut next = Vec::new();
        for s in &active {
            let k = s.atoms.len();
            let left = (2 * k.div_ceil(4)).min(k - 1);
            let mut ranks: Vec<usize> = s.atoms.iter().map(|&a| order[a]).collect();
            ranks.sort_unstable();
            let cut = ranks[left];
            let (l, r): (Vec<usize>, Vec<usize>) = s.atoms.iter().partition(|&&a| order[a] < cut);
            let mut after = vec![0; n];
            for (j, &a) in r.iter().enumerate() {
                let to = s.lo + k + j;
                split.push(Move { atom: a, from: pos[a], to });
                after[a] = to;
            }
            for &a in &l {
                after[a] = pos[a];
            }
            let w_left = need(l.len());
            for (i, &a) in l.iter().enumerate() {
                if after[a] != s.lo + i {
                    gather.push(Move { atom: a, from: after[a], to: s.lo + i });
                }
            }
            for (j, &a) in r.iter().enumerate() {
                if after[a] != s.lo + w_left + j {
                    gather.push(Move { atom: a, from: after[a], to: s.lo + w_left + j });
                }
            }
            next.push(Segment { lo: s.lo, width: w_left, atoms: l });
            next.push(Segment { lo: s.lo + w_left, width: s.width - w_left, atoms: r });
        }
        push(split, &mut pos);
        push(gather, &mut pos);
        active = next;
    }
    Ok(MoveSchedule { traps, initial: positions.to_vec(), order: order.to_vec(), layers, levels })
}

impl MoveSchedule {
    pub fn n_atoms(&self) -> usize {
        self.initial.len()
    }

    pub fn final_positions(&self) -> Vec<usize> {
        let mut pos = self.initial.clone();
        for layer in &self.layers {
            for m in layer {
                pos[m.atom] = m.to;
            }
        }
        pos
    }

    /// Atoms sorted by final position.
    pub fn final_order(&self) -> Vec<usize> {
        let pos = self.final_positions();
        let mut atoms: Vec<usize> = (0..pos.len()).collect();
        atoms.sort_by_key(|&a| pos[a]);
        atoms
    }

    /// Move time of each layer: the longest move in it sets the duration.
    pub fn layer_times_us(&self, p: &MotionParams) -> Vec<f64> {
        self.layers
            .iter()
            .map(|l| {
                let far = l.iter().map(|m| m.from.abs_diff(m.to)).max().unwrap_or(0);
                move_time(far as f64 * p.d_um, p)
            })
            .collect()
    }

    /// `(transfer, movement)` in µs, charging `2 tau_t` per level.
    pub fn duration_us(&self, p: &MotionParams) -> (f64, f64) {
        (2.0 * p.tau_t_us * self.levels as f64, self.layer_times_us(p).iter().sum())
    }

    pub fn to_json(&self, p: &MotionParams) -> serde_json::Value {
        serde_json::json!({
            "M": self.traps,
            "layers": self.layers,
            "times_us": self.layer_times_us(p),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationKind {
    UnknownAtom,
    RepeatedAtom,
    WrongSource,
    OutOfRange,
    DuplicateTarget,
    OccupiedTarget,
    Crossing,
    WrongFinalOrder,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// Offending layer; equal to the layer count for a final-order error.
    pub layer: usize,
    pub kind: ViolationKind,
}

/// First violated constraint, or `None` when every layer is a legal
/// simultaneous move and the final order matches `s.order`.
pub fn validate_schedule(s: &MoveSchedule) -> Option<Violation> {
    let n = s.n_atoms();
    let mut pos = s.initial.clone();
    let mut occ = vec![usize::MAX; s.traps];
    for (a, &p) in pos.iter().enumerate() {
        if p >= s.traps || occ[p] != usize::MAX {
            return Some(Violation { layer: 0, kind: ViolationKind::OutOfRange });
        }
        occ[p] = a;
    }
    for (li, layer) in s.layers.iter().enumerate() {
        let bad = |kind| Some(Violation { layer: li, kind });
        let mut moving = vec![false; n];
        for m in layer {
            if m.atom >= n {
                return bad(ViolationKind::UnknownAtom);
            }
            if std::mem::replace(&mut moving[m.atom], true) {
                return bad(ViolationKind::RepeatedAtom);
            }
            if pos[m.atom] != m.from {
                return bad(ViolationKind::WrongSource);
            }
            if m.to >= s.traps {
                return bad(ViolationKind::OutOfRange);
            }
        }
        let mut targets: Vec<usize> = layer.iter().map(|m| m.to).collect();
        targets.sort_unstable();
        if targets.windows(2).any(|w| w[0] == w[1]) {
            return bad(ViolationKind::DuplicateTarget);
        }
        if layer.iter().any(|m| occ[m.to] != usize::MAX && !moving[occ[m.to]]) {
            return bad(ViolationKind::OccupiedTarget);
        }
        let mut by_from: Vec<&Move> = layer.iter().collect();
        by_from.sort_by_key(|m| m.from);
        if by_from.windows(2).any(|w| w[0].to >= w[1].to) {
            return bad(ViolationKind::Crossing);
        }
        for m in layer {
            occ[m.from] = usize::MAX;
        }
        for m in layer {
            occ[m.to] = m.atom;
            pos[m.atom] = m.to;
        }
    }
    let mut atoms: Vec<usize> = (0..n).collect();
    atoms.sort_by_key(|&a| pos[a]);
    if atoms.iter().enumerate().any(|(r, &a)| s.order[a] != r) {
        return Some(Violation { layer: s.layers.len(), kind: ViolationKind::WrongFinalOrder });
    }
    None
}

/// Duration (µs) of a cubic-spline move over `distance_um`.
pub fn move_time(distance_um: f64, p: &MotionParams) -> f64 {
    (6.0 * distance_um.max(0.0) / p.a_p).sqrt()
}

/// Upper bound `(transfer, movement)` in µs for one full rearrangement of a
/// line of `l` atoms. Transfers are charged per whole level, `ceil(log2 l)`.
pub fn rearrangement_time_bound(l: f64, p: &MotionParams) -> (f64, f64) {
    let transfer = 2.0 * p.tau_t_us * l.max(1.0).log2().ceil();
    let movement = (3.0 + 2.0 * std::f64::consts::SQRT_2) * (6.0 * l * p.d_um / p.a_p).sqrt();
    (transfer, movement)
}

/// How the rearranged line length follows from the code size.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LineModel {
    /// `L = ceil(sqrt(n + n_checks))`.
    Hgp { n_checks: usize },
    /// `L = n / 8`.
    Lp,
}

impl LineModel {
    pub fn line_length(&self, n: usize) -> f64 {
        match *self {
            LineModel::Hgp { n_checks } => ((n + n_checks) as f64).sqrt().ceil(),
            LineModel::Lp => n as f64 / 8.0,
        }
    }
}

/// Idling error per rearrangement layer, scaled with the gate error
/// relative to a 0.5% reference.
pub fn idling_rate(n: usize, p_g: f64, p: &MotionParams, model: LineModel) -> f64 {
    let (t, m) = rearrangement_time_bound(model.line_length(n), p);
    (t + m) / p.t_c_us * p_g / 0.005
}

pub fn rescaled_gate_error(p_g: f64, p_i: f64) -> f64 {
    p_g + 3.0 * p_i
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Horizontal,
    Vertical,
}

/// One color class of a product layout: the same line permutation runs on
/// every line (row for horizontal, column for vertical), so one schedule
/// drives all AOD lines together.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorSchedule {
    pub color: usize,
    pub lines: Vec<usize>,
    /// Slot (grid coordinate along the line) carried by each schedule atom.
    pub slots: Vec<usize>,
    /// `(bit slot, check slot)` pairs that must end adjacent.
    pub pairs: Vec<(usize, usize)>,
    pub schedule: MoveSchedule,
}

impl ColorSchedule {
    /// Final trap of each slot.
    pub fn slot_positions(&self) -> Vec<usize> {
        let fin = self.schedule.final_positions();
        let mut out = vec![0; self.slots.len()];
        for (a, &s) in self.slots.iter().enumerate() {
            out[s] = fin[a];
        }
        out
    }
}

/// Grid lines of an HGP layout: bits of the line code occupy slots
/// `0..n_bits`, checks occupy `n_bits..n_bits + n_checks`. Colors are
/// scheduled in sequence, each starting where the previous one ended.
pub fn schedule_for_coloring(
    layout: &ProductLayout,
    coloring: &EdgeColoring,
    direction: Direction,
) -> Result<Vec<ColorSchedule>, MotionError> {
    if layout.lift != 1 {
        return Err(MotionError::StructureMismatch("line schedules need an unlifted product layout".into()));
    }
    let (nb, nc, lines) = match direction {
        Direction::Horizontal => (layout.n2, layout.r2, layout.n1 + layout.r1),
        Direction::Vertical => (layout.n1, layout.r1, layout.n2 + layout.r2),
    };
    if coloring.graph.n_bits != nb || coloring.graph.n_checks != nc {
        return Err(MotionError::StructureMismatch(format!(
            "coloring graph is {}x{}, line code is {}x{}",
            coloring.graph.n_checks, coloring.graph.n_bits, nc, nb
        )));
    }
    let n = nb + nc;
    let traps = (3 * n).div_ceil(2);
    let mut slot_pos: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(coloring.n_colors);
    for color in 0..coloring.n_colors {
        let pairs: Vec<(usize, usize)> = coloring.edges_of(color).into_iter().map(|(c, b)| (b, nb + c)).collect();
        let mut slots: Vec<usize> = (0..n).collect();
        slots.sort_by_key(|&s| slot_pos[s]);
        let mut rank = vec![usize::MAX; n];
        let mut r = 0;
        for &(b, c) in &pairs {
            rank[b] = r;
            rank[c] = r + 1;
            r += 2;
        }
        for &s in &slots {
            if rank[s] == usize::MAX {
                rank[s] = r;
                r += 1;
            }
        }
        let order: Vec<usize> = slots.iter().map(|&s| rank[s]).collect();
        let positions: Vec<usize> = slots.iter().map(|&s| slot_pos[s]).collect();
        let schedule = plan_1d(&order, &positions, traps)?;
        let fin = schedule.final_positions();
        for (a, &s) in slots.iter().enumerate() {
            slot_pos[s] = fin[a];
        }
        out.push(ColorSchedule { color, lines: (0..lines).collect(), slots, pairs, schedule });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::bipartite_edge_coloring;
    use crate::codes::{hgp, repetition_code, TannerGraph};
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Applies each layer to an explicit line of optional atoms and reads
    /// the final order off the line.
    fn line_oracle(s: &MoveSchedule) -> Vec<usize> {
        let mut line = vec![None; s.traps];
        for (a, &p) in s.initial.iter().enumerate() {
            line[p] = Some(a);
        }
        for layer in &s.layers {
            let picked: Vec<(usize, usize)> = layer.iter().map(|m| (line[m.from].take().unwrap(), m.to)).collect();
            for (a, to) in picked {
                assert!(line[to].is_none());
                line[to] = Some(a);
            }
        }
        let mut rank_of = vec![0; s.n_atoms()];
        for (r, a) in line.into_iter().flatten().enumerate() {
            rank_of[a] = r;
        }
        rank_of
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for i in 0..n {
                let mut q = p.clone();
                q.insert(i, n - 1);
                out.push(q);
            }
        }
        out
    }

    fn ceil_log2(n: usize) -> usize {
        (usize::BITS - (n.max(1) - 1).leading_zeros()) as usize
    }

    #[test]
    fn identity_compact_needs_no_layer() {
        let s = plan_1d(&[0, 1, 2, 3], &[0, 1, 2, 3], 6).unwrap();
        assert!(s.layers.is_empty());
        let s = plan_1d(&[0, 1, 2, 3], &[0, 2, 3, 5], 6).unwrap();
        assert_eq!(s.layers.len(), 1);
        assert_eq!(validate_schedule(&s), None);
    }

    #[test]
    fn reversal_of_eight() {
        let order: Vec<usize> = (0..8).rev().collect();
        let s = plan_1d(&order, &(0..8).collect::<Vec<_>>(), 12).unwrap();
        assert_eq!(s.levels, 3);
        assert_eq!(validate_schedule(&s), None);
        assert_eq!(line_oracle(&s), order);
        assert!(s.layers.len() <= 2 * 3);
    }

    #[test]
    fn exhaustive_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1usize..=6 {
            let traps = (3 * n).div_ceil(2);
            for order in permutations(n) {
                let mut pos: Vec<usize> = (0..traps).collect();
                pos.shuffle(&mut rng);
                let mut pos = pos[..n].to_vec();
                pos.sort_unstable();
                for start in [(0..n).collect::<Vec<_>>(), pos] {
                    let s = plan_1d(&order, &start, traps).unwrap();
                    assert_eq!(validate_schedule(&s), None, "{order:?} from {start:?}");
                    assert_eq!(line_oracle(&s), order);
                    assert!(s.levels <= ceil_log2(n));
                }
            }
        }
    }

    #[test]
    fn random_permutations_up_to_256() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..500 {
            let n = rng.gen_range(1..=256);
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            let s = plan_1d(&order, &(0..n).collect::<Vec<_>>(), (3 * n).div_ceil(2)).unwrap();
            assert_eq!(validate_schedule(&s), None);
            assert_eq!(line_oracle(&s), order);
            assert!(s.levels <= ceil_log2(n));
            assert!(s.layers.len() <= 2 * s.levels);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(plan_1d(&[0, 0], &[0, 1], 3), Err(MotionError::InvalidPermutation(2)));
        assert_eq!(plan_1d(&[1, 0], &[1, 0], 3), Err(MotionError::InvalidPositions));
        assert_eq!(plan_1d(&[1, 0, 2, 3], &[0, 1, 2, 3], 5), Err(MotionError::InsufficientWorkspace { atoms: 4, traps: 5 }));
    }

    fn base(layers: Vec<Vec<Move>>) -> MoveSchedule {
        MoveSchedule { traps: 6, initial: vec![0, 1, 2], order: vec![0, 1, 2], layers, levels: 1 }
    }

    #[test]
    fn validator_reports_violations() {
        let m = |atom, from, to| Move { atom, from, to };
        let crossing = base(vec![vec![m(0, 0, 4), m(1, 1, 3)]]);
        assert_eq!(validate_schedule(&crossing).unwrap().kind, ViolationKind::Crossing);
        let dup = base(vec![vec![m(0, 0, 4), m(1, 1, 4)]]);
        assert_eq!(validate_schedule(&dup).unwrap().kind, ViolationKind::DuplicateTarget);
        let occupied = base(vec![vec![m(0, 0, 2)]]);
        assert_eq!(validate_schedule(&occupied).unwrap().kind, ViolationKind::OccupiedTarget);
        let wrong = base(vec![vec![m(0, 3, 4)]]);
        assert_eq!(validate_schedule(&wrong).unwrap().kind, ViolationKind::WrongSource);
        let order = base(vec![vec![m(0, 0, 5)]]);
        assert_eq!(validate_schedule(&order), Some(Violation { layer: 1, kind: ViolationKind::WrongFinalOrder }));
        // Moving into a trap vacated in the same layer is fine.
        let shift = base(vec![vec![m(0, 0, 3), m(1, 1, 4), m(2, 2, 5)]]);
        assert_eq!(validate_schedule(&shift), None);
    }

    #[test]
    fn move_time_values() {
        let p = MotionParams::paper();
        assert_eq!(move_time(0.0, &p), 0.0);
        assert!((move_time(500.0, &p) - 150000f64.sqrt()).abs() < 1e-9);
        assert!((move_time(500.0, &p) - 387.298).abs() < 1e-3);
        assert!(move_time(10.0, &p) < move_time(11.0, &p));
    }

    #[test]
    fn timing_bound_values() {
        let p = MotionParams::paper();
        let (t, m) = rearrangement_time_bound(100.0, &p);
        assert!((t / 1000.0 - 0.7).abs() / 0.7 < 0.05, "{t}");
        assert!((m / 1000.0 - 2.3).abs() / 2.3 < 0.05, "{m}");
        assert!((t - 700.0).abs() < 1e-9);
        assert!((rearrangement_time_bound(4.0, &p).0 - 4.0 * p.tau_t_us).abs() < 1e-9);
        let ratio = rearrangement_time_bound(400.0, &p).1 / m;
        assert!((ratio - 2.0).abs() < 1e-9);
    }

    #[test]
    fn idling_values() {
        let p = MotionParams::paper();
        assert_eq!(idling_rate(1000, 0.0, &p, LineModel::Lp), 0.0);
        // 10000 qubits in total: L = 100.
        let pi = idling_rate(5000, 5e-3, &p, LineModel::Hgp { n_checks: 5000 });
        assert!((pi - 3.0e-4).abs() / 3.0e-4 < 0.05, "{pi}");
        assert_eq!(LineModel::Lp.line_length(800), 100.0);
        assert_eq!(rescaled_gate_error(1e-3, 0.0), 1e-3);
        assert!((rescaled_gate_error(1e-3, 1e-4) - 1.3e-3).abs() < 1e-15);
        // Movement-dominated growth: n^(1/4) for HGP, n^(1/2) for LP.
        let n = 1usize << 40;
        let h = |n: usize| idling_rate(n, 1e-3, &p, LineModel::Hgp { n_checks: n });
        assert!((h(16 * n) / h(n) - 2.0).abs() < 0.02);
        let l = |n: usize| idling_rate(n, 1e-3, &p, LineModel::Lp);
        assert!((l(4 * n) / l(n) - 2.0).abs() < 0.02);
        assert!(MotionParams { a_p: 0.0, ..p }.validate().is_err());
    }

    #[test]
    fn schedule_json_shape() {
        let s = plan_1d(&[1, 0], &[0, 1], 3).unwrap();
        let v = s.to_json(&MotionParams::paper());
        assert_eq!(v["M"], 3);
        assert_eq!(v["layers"].as_array().unwrap().len(), s.layers.len());
        assert_eq!(v["times_us"].as_array().unwrap().len(), s.layers.len());
        assert!(v["layers"][0][0]["atom"].is_u64());
    }

    fn check_colorings(code: &crate::codes::CssCode, h1: &TannerGraph, h2: &TannerGraph) {
        let layout = code.layout().unwrap();
        for (dir, g) in [(Direction::Horizontal, h2), (Direction::Vertical, h1)] {
            let col = bipartite_edge_coloring(g);
            let scheds = schedule_for_coloring(&layout, &col, dir).unwrap();
            assert_eq!(scheds.len(), col.n_colors);
            let n = g.n_bits + g.n_checks;
            for cs in &scheds {
                assert_eq!(validate_schedule(&cs.schedule), None);
                assert!(cs.schedule.levels <= ceil_log2(n));
                let pos = cs.slot_positions();
                for &(b, c) in &cs.pairs {
                    assert_eq!(pos[b].abs_diff(pos[c]), 1, "pair {b},{c}");
                }
                let lines = if dir == Direction::Horizontal { layout.n1 + layout.r1 } else { layout.n2 + layout.r2 };
                assert_eq!(cs.lines.len(), lines);
            }
        }
    }

    #[test]
    fn rep3_colorings_bring_pairs_together() {
        let r = repetition_code(3).unwrap();
        let code = hgp(&r, &r).unwrap();
        let g = TannerGraph::from_matrix(&r.h);
        assert_eq!(bipartite_edge_coloring(&g).n_colors, 2);
        check_colorings(&code, &g, &g);
    }

    #[test]
    fn biregular_colorings_bring_pairs_together() {
        let g = crate::codes::random_biregular_tanner(12, 3, 4, 6, 3).unwrap();
        let c = crate::codes::ClassicalCode::from_parity_check(g.to_matrix(), 1 << 16);
        let code = hgp(&c, &c).unwrap();
        check_colorings(&code, &g, &g);
    }

    #[test]
    fn lifted_layout_rejected() {
        let code = crate::codes::builtin_lp_code(544).unwrap();
        let layout = code.layout().unwrap();
        let g = TannerGraph::from_matrix(&repetition_code(3).unwrap().h);
        let col = bipartite_edge_coloring(&g);
        assert!(matches!(schedule_for_coloring(&layout, &col, Direction::Horizontal), Err(MotionError::StructureMismatch(_))));
    }

    proptest! {
        #[test]
        fn planner_time_within_bound(seed in 0u64..10_000, n in 2usize..300) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            let s = plan_1d(&order, &(0..n).collect::<Vec<_>>(), (3 * n).div_ceil(2)).unwrap();
            prop_assert_eq!(validate_schedule(&s), None);
            let p = MotionParams::paper();
            let (_, movement) = s.duration_us(&p);
            prop_assert!(movement <= rearrangement_time_bound(n as f64, &p).1);
        }
    }
}
