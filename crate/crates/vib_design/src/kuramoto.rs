use std::collections::BTreeSet;

use graph_core::{matrix_graph, is_dag, IncidenceSet, SignedGraph};
use kuramoto_dynamics::{influence_matrices, linearize, KuramotoNetwork};
use nalgebra::{DMatrix, DVector};

use crate::{modifiable_graph, DesignError, ModifiableMode};

/// Largest number of cancelling vibrations tried per combination.
const MAX_CANCELLERS: usize = 3;
/// Realizable position counts above this skip the maximal-subset enumeration.
const MAX_ENUMERATED_POSITIONS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotClass {
    /// After masking, only diagonal entries remain.
    DiagonalOnly,
    SingleOffDiagonal { row: usize, col: usize },
    /// Two or more modifiable off-diagonal entries; such vibrations are dropped.
    MultiOffDiagonal,
}

/// One network edge as a vibration slot.
#[derive(Debug, Clone, PartialEq)]
pub struct VibrationSlot {
    pub edge: (usize, usize),
    /// Influence matrix `M_e` on the cluster's coordinates.
    pub influence: DMatrix<f64>,
    /// `M_e ⊙ (I + A_mod)`.
    pub masked: DMatrix<f64>,
    pub class: SlotClass,
}

/// Vibrations sharing one waveform whose combined influence has its only
/// modifiable off-diagonal entry at `position`, with value 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Combo {
    pub position: (usize, usize),
    /// `(edge, coefficient)`: the edge carries `coefficient` times the combo's waveform.
    pub edges: Vec<((usize, usize), f64)>,
    /// `Σ coefficient·M_e`, unit at `position`, zero on the diagonal.
    pub matrix: DMatrix<f64>,
    /// Entry at `position` before normalization.
    pub kappa: f64,
    /// True when every canceller is a diagonal-only slot.
    pub diagonal_cancellers_only: bool,
}

/// How the network's edge vibrations act on one cluster's linearization.
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceMap {
    pub jacobian: DMatrix<f64>,
    pub modifiable: SignedGraph,
    /// Unweighted adjacency of the modifiable graph.
    pub a_mod: DMatrix<f64>,
    pub slots: Vec<VibrationSlot>,
    /// All combinations found, best first within each position.
    pub combos: Vec<Combo>,
    /// Positions with at least one combination, signed as in `modifiable`.
    pub realizable: SignedGraph,
    /// Maximal acyclic subsets of realizable positions; empty if too many to list.
    pub maximal_acyclic: Vec<Vec<(usize, usize)>>,
}

impl InfluenceMap {
    pub fn combos_at(&self, position: (usize, usize)) -> impl Iterator<Item = &Combo> {
        self.combos.iter().filter(move |c| c.position == position)
    }

    pub fn realizable_positions(&self) -> Vec<(usize, usize)> {
        self.realizable.edges().iter().map(|e| (e.target, e.source)).collect()
    }
}

fn clean(m: &mut DMatrix<f64>, scale: f64) {
    m.apply(|v| {
        if v.abs() <= 1e-12 * scale {
            *v = 0.0
        }
    });
}

/// Builds the influence map for a Jacobian and its per-edge influence matrices.
pub fn influence_map(jacobian: &DMatrix<f64>, maps: Vec<((usize, usize), DMatrix<f64>)>) -> InfluenceMap {
    let d = jacobian.nrows();
    let modifiable = modifiable_graph(jacobian, ModifiableMode::Kuramoto);
    let a_mod = modifiable.adjacency().abs();
    let mask = DMatrix::<f64>::identity(d, d) + &a_mod;
    let scale = maps.iter().map(|(_, m)| m.amax()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);

    let slots: Vec<VibrationSlot> = maps
        .into_iter()
        .map(|(edge, mut influence)| {
            clean(&mut influence, scale);
            let masked = influence.component_mul(&mask);
            let off: Vec<(usize, usize)> = (0..d)
                .flat_map(|i| (0..d).map(move |j| (i, j)))
                .filter(|&(i, j)| i != j && masked[(i, j)] != 0.0)
                .collect();
            let class = match off.as_slice() {
                [] => SlotClass::DiagonalOnly,
                [(row, col)] => SlotClass::SingleOffDiagonal { row: *row, col: *col },
                _ => SlotClass::MultiOffDiagonal,
            };
            VibrationSlot { edge, influence, masked, class }
        })
        .collect();

    let mut combos = Vec::new();
    let mut seen = BTreeSet::new();
    for (ei, e) in slots.iter().enumerate() {
        let SlotClass::SingleOffDiagonal { row, col } = e.class else { continue };
        let cancellers: Vec<usize> = (0..slots.len())
            .filter(|&f| {
                f != ei
                    && match slots[f].class {
                        SlotClass::DiagonalOnly => true,
                        SlotClass::SingleOffDiagonal { row: r, col: c } => (r, c) == (row, col),
                        SlotClass::MultiOffDiagonal => false,
                    }
            })
            .collect();
        let mut found = Vec::new();
        for size in 0..=MAX_CANCELLERS.min(cancellers.len()) {
            for subset in subsets(&cancellers, size) {
                if let Some(c) = solve_combo(&slots, ei, &subset, (row, col), scale) {
                    found.push(c);
                }
            }
            if !found.is_empty() {
                break;
            }
        }
        for c in found {
            let mut key: Vec<(usize, usize)> = c.edges.iter().map(|x| x.0).collect();
            key.sort_unstable();
            if seen.insert((c.position, key)) {
                combos.push(c);
            }
        }
    }
    combos.sort_by(|a, b| {
        let norm = |c: &Combo| c.edges.iter().map(|x| x.1 * x.1).sum::<f64>();
        (a.position, a.edges.len(), !a.diagonal_cancellers_only)
            .cmp(&(b.position, b.edges.len(), !b.diagonal_cancellers_only))
            .then(norm(a).total_cmp(&norm(b)))
            .then_with(|| a.edges.iter().map(|x| x.0).cmp(b.edges.iter().map(|x| x.0)))
    });

    let mut realizable = SignedGraph::new(d, false);
    let mut positions: Vec<(usize, usize)> = combos.iter().map(|c| c.position).collect();
    positions.dedup();
    for &(p, q) in &positions {
        let sign = modifiable.edge(q, p).expect("combo positions are modifiable").sign;
        realizable.add_edge(q, p, sign).expect("unique positions");
    }
    let maximal_acyclic = if positions.len() <= MAX_ENUMERATED_POSITIONS {
        maximal_acyclic_subsets(d, &positions)
    } else {
        Vec::new()
    };
    InfluenceMap { jacobian: jacobian.clone(), modifiable, a_mod, slots, combos, realizable, maximal_acyclic }
}

fn subsets(items: &[usize], size: usize) -> Vec<Vec<usize>> {
    if size == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        for mut rest in subsets(&items[i + 1..], size - 1) {
            rest.insert(0, x);
            out.push(rest);
        }
    }
    out
}

/// Coefficients on `subset` that cancel slot `main`'s diagonal, if any.
fn solve_combo(
    slots: &[VibrationSlot],
    main: usize,
    subset: &[usize],
    position: (usize, usize),
    scale: f64,
) -> Option<Combo> {
    let d = slots[main].influence.nrows();
    let target = -DVector::from_iterator(d, (0..d).map(|i| slots[main].influence[(i, i)]));
    let coeffs = if subset.is_empty() {
        DVector::zeros(0)
    } else {
        let cols = DMatrix::from_fn(d, subset.len(), |i, k| slots[subset[k]].influence[(i, i)]);
        let c = cols.clone().svd(true, true).solve(&target, 1e-12).ok()?;
        if (&cols * &c - &target).amax() > 1e-10 * scale {
            return None;
        }
        c
    };
    if subset.is_empty() && target.amax() > 1e-10 * scale {
        return None;
    }
    let mut combined = slots[main].influence.clone();
    for (k, &f) in subset.iter().enumerate() {
        combined += &slots[f].influence * coeffs[k];
    }
    let kappa = combined[position];
    if kappa.abs() <= 1e-9 * scale {
        return None;
    }
    combined /= kappa;
    clean(&mut combined, 1.0);
    combined.fill_diagonal(0.0);
    let mut edges = vec![(slots[main].edge, 1.0 / kappa)];
    edges.extend(subset.iter().enumerate().map(|(k, &f)| (slots[f].edge, coeffs[k] / kappa)));
    let diagonal_cancellers_only = subset.iter().all(|&f| slots[f].class == SlotClass::DiagonalOnly);
    Some(Combo { position, edges, matrix: combined, kappa, diagonal_cancellers_only })
}

fn pattern(d: usize, positions: &[(usize, usize)]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(d, d);
    for &(p, q) in positions {
        m[(p, q)] = 1.0;
    }
    m
}

fn maximal_acyclic_subsets(d: usize, positions: &[(usize, usize)]) -> Vec<Vec<(usize, usize)>> {
    let k = positions.len();
    let acyclic: Vec<u32> = (0u32..(1 << k))
        .filter(|&mask| {
            let chosen: Vec<_> = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| positions[i]).collect();
            is_dag(&matrix_graph(&pattern(d, &chosen)))
        })
        .collect();
    acyclic
        .iter()
        .filter(|&&m| !acyclic.iter().any(|&o| o != m && o & m == m))
        .map(|&m| (0..k).filter(|i| m >> i & 1 == 1).map(|i| positions[i]).collect())
        .collect()
}

/// Influence map of cluster `k` of a Kuramoto network.
pub fn kuramoto_modifiable(
    kn: &KuramotoNetwork,
    inc: &IncidenceSet,
    k: usize,
) -> Result<InfluenceMap, DesignError> {
    if k >= inc.r_clusters() {
        return Err(DesignError::InvalidSpec(format!("no cluster {k}")));
    }
    let lin = linearize(kn, inc)?;
    Ok(influence_map(&lin.blocks[k], influence_matrices(inc, k)))
}
