//! Estimate of the fiber partition of `x ↦ Φ(x)` on the grid.

use super::config::CheckConfig;
use super::sweep::Sweep;
use crate::dynamics::{dist, ComponentId, Placement, SystemSpec};
use crate::topology::CompactSetApprox;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

/// Trace entries kept per estimate.
const TRACE_CAP: usize = 64;

#[derive(Clone, Debug)]
pub struct Atom {
    pub label: String,
    /// indices into the sweep grid
    pub members: Vec<usize>,
    /// components all of whose grid points belong to this atom
    pub whole_components: Vec<ComponentId>,
    pub cloud: CompactSetApprox,
    /// member with the smallest final Cauchy residual
    pub representative: usize,
}

impl Atom {
    pub fn touches(&self, c: ComponentId, sweep: &Sweep) -> bool {
        self.members.iter().any(|&i| sweep.grid[i].point.component == c)
    }
}

#[derive(Clone, Debug)]
pub struct PartitionEstimate {
    pub atoms: Vec<Atom>,
    /// grid index → atom index
    pub assignment: Vec<usize>,
    pub tol: f64,
    /// same clustering at `tol/2`
    pub stable: bool,
    /// which test functions separated neighbouring grid points
    pub trace: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PartitionSummary {
    pub atoms: usize,
    pub stable: bool,
    pub largest_atom: usize,
}

impl PartitionEstimate {
    pub fn atom_of(&self, grid_index: usize) -> &Atom {
        &self.atoms[self.assignment[grid_index]]
    }

    pub fn atom_by_label(&self, label: &str) -> Option<&Atom> {
        self.atoms.iter().find(|a| a.label == label)
    }

    pub fn summary(&self) -> PartitionSummary {
        PartitionSummary {
            atoms: self.atoms.len(),
            stable: self.stable,
            largest_atom: self.atoms.iter().map(|a| a.members.len()).max().unwrap_or(0),
        }
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut j = i;
        while self.0[j] != r {
            let next = self.0[j];
            self.0[j] = r;
            j = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller root wins so labels do not depend on merge order
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

/// Largest distance from the ω-estimate of a grid point to `at`.
fn omega_excess(sweep: &Sweep, i: usize, at: [f64; 2]) -> f64 {
    sweep.grid[i].omega.iter().map(|&q| dist(q, at)).fold(0.0, f64::max)
}

fn by_component(sweep: &Sweep) -> BTreeMap<ComponentId, Vec<usize>> {
    let mut m: BTreeMap<ComponentId, Vec<usize>> = BTreeMap::new();
    for (i, p) in sweep.grid.iter().enumerate() {
        m.entry(p.point.component).or_default().push(i);
    }
    m
}

/// Single-linkage clusters, canonically labeled by their smallest member.
fn cluster(system: &SystemSpec, sweep: &Sweep, tol: f64, tol_h: f64) -> Vec<usize> {
    let n = sweep.grid.len();
    let mut uf = UnionFind::new(n);
    let comps = by_component(sweep);
    for idx in comps.values() {
        for (a, &i) in idx.iter().enumerate() {
            for &j in &idx[a + 1..] {
                if sweep.phi_distance(&sweep.grid[i], &sweep.grid[j]) <= tol {
                    uf.union(i, j);
                }
            }
        }
    }
    // Different components only merge through a declared contact, and only
    // when both estimates are concentrated at that contact.
    for contact in &system.embedding.params().contacts {
        let [ca, cb] = contact.components;
        let (Some(ia), Some(ib)) = (comps.get(&ca), comps.get(&cb)) else { continue };
        let near_a: Vec<usize> =
            ia.iter().copied().filter(|&i| omega_excess(sweep, i, contact.at) <= tol_h).collect();
        let near_b: Vec<usize> =
            ib.iter().copied().filter(|&i| omega_excess(sweep, i, contact.at) <= tol_h).collect();
        for &i in &near_a {
            for &j in &near_b {
                if sweep.phi_distance(&sweep.grid[i], &sweep.grid[j]) <= tol {
                    uf.union(i, j);
                }
            }
        }
    }
    (0..n).map(|i| uf.find(i)).collect()
}

/// Dense cloud of a whole component at the given resolution.
pub fn component_cloud(system: &SystemSpec, c: ComponentId, resolution: f64) -> Vec<[f64; 2]> {
    match system.embedding.placement(c) {
        Placement::Circle { center, r } => {
            let m = ((std::f64::consts::TAU * r) / (0.5 * resolution)).ceil().max(8.0) as usize;
            (0..m)
                .map(|i| {
                    let t = std::f64::consts::TAU * i as f64 / m as f64;
                    [center[0] + r * t.cos(), center[1] + r * t.sin()]
                })
                .collect()
        }
        Placement::Line { y, scale } => (-40 * scale.ceil() as i64..=40 * scale.ceil() as i64)
            .map(|n| [(n as f64 / scale).tanh(), y])
            .collect(),
        Placement::Fixed(p) => vec![p],
    }
}

fn atom_label(sweep: &Sweep, members: &[usize], whole: &[ComponentId], total_by_comp: usize) -> String {
    if !whole.is_empty() && whole.len() == total_by_comp {
        return whole.iter().map(ToString::to_string).collect::<Vec<_>>().join("+");
    }
    if members.len() == 1 {
        return sweep.grid[members[0]].label.clone();
    }
    format!("{}+{}", sweep.grid[members[0]].label, members.len() - 1)
}

/// Index and weighted size of the test function that best separates two
/// estimates.
fn separating_function(sweep: &Sweep, i: usize, j: usize) -> (usize, f64) {
    let (a, b) = (sweep.phi(&sweep.grid[i]), sweep.phi(&sweep.grid[j]));
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(k, (x, y))| (k, sweep.family.weight(k) * (x - y).abs()))
        .fold((0, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best })
}

pub fn estimate_partition(system: &SystemSpec, sweep: &Sweep, cfg: &CheckConfig) -> PartitionEstimate {
    let tol = cfg.partition_tol;
    let tol_h = cfg.tol_h();
    let roots = cluster(system, sweep, tol, tol_h);
    let roots_half = cluster(system, sweep, tol / 2.0, tol_h);
    let stable = roots == roots_half;

    let mut root_to_atom: BTreeMap<usize, usize> = BTreeMap::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut assignment = vec![0; sweep.grid.len()];
    for (i, &r) in roots.iter().enumerate() {
        let a = *root_to_atom.entry(r).or_insert_with(|| {
            members.push(Vec::new());
            members.len() - 1
        });
        members[a].push(i);
        assignment[i] = a;
    }

    let comps = by_component(sweep);
    let mut atoms = Vec::with_capacity(members.len());
    for m in members {
        let touched: BTreeSet<ComponentId> = m.iter().map(|&i| sweep.grid[i].point.component).collect();
        let whole: Vec<ComponentId> = touched
            .iter()
            .copied()
            .filter(|c| comps[c].iter().all(|i| m.binary_search(i).is_ok()))
            .collect();
        let covered_by_whole: usize = whole.iter().map(|c| comps[c].len()).sum();
        let mut pts: Vec<[f64; 2]> = m.iter().map(|&i| sweep.grid[i].pos).collect();
        for &c in &whole {
            pts.extend(component_cloud(system, c, cfg.resolution));
        }
        let cloud = CompactSetApprox::new(pts, cfg.resolution).expect("atom has members");
        let representative = *m
            .iter()
            .min_by(|&&a, &&b| {
                let ra = sweep.phi_deltas(&sweep.grid[a]).last().copied().unwrap_or(0.0);
                let rb = sweep.phi_deltas(&sweep.grid[b]).last().copied().unwrap_or(0.0);
                ra.total_cmp(&rb).then(a.cmp(&b))
            })
            .unwrap();
        let label = atom_label(
            sweep,
            &m,
            &whole,
            if covered_by_whole == m.len() { whole.len() } else { usize::MAX },
        );
        atoms.push(Atom { label, members: m, whole_components: whole, cloud, representative });
    }

    let mut trace = Vec::new();
    'outer: for idx in comps.values() {
        for w in idx.windows(2) {
            let (i, j) = (w[0], w[1]);
            if assignment[i] != assignment[j] {
                let (k, size) = separating_function(sweep, i, j);
                trace.push(format!(
                    "{} | {}: f_{k} separates (weighted gap {size:.3e})",
                    sweep.grid[i].label, sweep.grid[j].label
                ));
                if trace.len() >= TRACE_CAP {
                    break 'outer;
                }
            }
        }
    }

    PartitionEstimate { atoms, assignment, tol, stable, trace }
}
