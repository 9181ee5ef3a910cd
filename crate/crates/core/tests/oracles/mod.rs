//! Independent reference computations shared by the integration tests and the
//! acceptance runner. Each check returns its worst observed error so callers
//! decide how to report it.

#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cine_core::eval::f1;
use cine_core::graph::{CsrMatrix, Graph, ProximityMatrix};
use cine_core::io::generate_sbm;
use cine_core::labels::{LabelTable, LabeledView, SplitPlan};
use cine_core::rect::{
    normalize_adjacency, propagate, rect_l_loss_grad, rect_n_loss_grad, GcnParams, HeadParams, RectLParams,
    SemanticTargets,
};
use cine_core::rsdne::{
    grad_h, grad_u, init_state, objective, solve, update_selection, RsdneConfig, RsdneState, SelectionMode, Variant,
};

pub const FD_STEP: f64 = 1e-5;
/// Denominator floor of the entrywise relative error, so entries whose true
/// value is zero are judged on an absolute scale.
pub const FD_FLOOR: f64 = 1e-6;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A single-label table over `n` nodes with `classes` classes; each node is
/// unlabeled with probability `p_unlabeled`.
pub fn random_labels(rng: &mut ChaCha8Rng, n: usize, classes: usize, p_unlabeled: f64) -> LabelTable {
    let names = (0..classes).map(|c| c.to_string()).collect();
    let rows = (0..n)
        .map(|_| {
            if rng.random_bool(p_unlabeled) {
                Vec::new()
            } else {
                vec![rng.random_range(0..classes)]
            }
        })
        .collect();
    LabelTable::new(names, rows).unwrap()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

/// Connected-ish random graph: a path plus extra edges with probability `p`.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Graph {
    let mut pairs: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
    for a in 0..n {
        for b in a + 2..n {
            if rng.random_bool(p) {
                pairs.push((a, b));
            }
        }
    }
    Graph::from_pairs(n, &pairs).unwrap()
}

pub fn sq_dist(u: &DMatrix<f64>, a: usize, b: usize) -> f64 {
    let mut s = 0.0;
    for c in 0..u.ncols() {
        let d = u[(a, c)] - u[(b, c)];
        s += d * d;
    }
    s
}

/// Labeled nodes other than `i` with the same single label, found by a plain scan.
pub fn same_class_peers(labels: &LabelTable, i: usize) -> Vec<usize> {
    let li = labels.labels(i);
    if li.is_empty() {
        return Vec::new();
    }
    (0..labels.n())
        .filter(|&j| j != i && labels.labels(j) == li)
        .collect()
}

/// Cost of selecting `subset` for node `i`, summed in ascending subset order.
pub fn selection_cost(u: &DMatrix<f64>, i: usize, subset: &[usize]) -> f64 {
    let mut sorted = subset.to_vec();
    sorted.sort_unstable();
    sorted.iter().map(|&j| sq_dist(u, i, j)).sum()
}

fn for_each_subset(pool: &[usize], k: usize, start: usize, current: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if current.len() == k {
        f(current);
        return;
    }
    for idx in start..pool.len() {
        current.push(pool[idx]);
        for_each_subset(pool, k, idx + 1, current, f);
        current.pop();
    }
}

/// Minimum selection cost of node `i` over every `min(k, |pool|)`-subset of its peers.
pub fn brute_force_min(u: &DMatrix<f64>, i: usize, pool: &[usize], k: usize) -> f64 {
    let k = k.min(pool.len());
    let mut best = f64::INFINITY;
    for_each_subset(pool, k, 0, &mut Vec::new(), &mut |s| {
        best = best.min(selection_cost(u, i, s));
    });
    best
}

fn blank_state(u: DMatrix<f64>, dim: usize) -> RsdneState {
    let n = u.nrows();
    RsdneState::from_parts(u, DMatrix::zeros(dim, n), vec![Vec::new(); n], CsrMatrix::zeros(n, n))
}

/// Optimality of the closed-form `S` step on one random instance (n <= 12,
/// d <= 4, k <= 3). Returns the larger of the absolute gaps between the greedy
/// cost and the exhaustive minimum, evaluated directly and via `2 Tr(U'L_sU)`.
pub fn selection_optimality_gap(seed: u64) -> f64 {
    let mut rng = rng(seed);
    let n = rng.random_range(4..=12);
    let d = rng.random_range(1..=4);
    let k = rng.random_range(1..=3);
    let classes = rng.random_range(1..=3);
    let labels = random_labels(&mut rng, n, classes, 0.2);
    let mut u = random_matrix(&mut rng, n, d);
    if seed.is_multiple_of(4) {
        // Integer coordinates produce exact distance ties.
        u.apply(|x| *x = (*x * 2.0).round());
    }
    let view = LabeledView::from_table(&labels);
    let config = RsdneConfig { dim: d, k, ..RsdneConfig::default() };
    let mut state = blank_state(u.clone(), d);
    update_selection(&mut state, &view, &config, SelectionMode::Full);

    let mut greedy = 0.0;
    let mut oracle = 0.0;
    for i in 0..n {
        greedy += selection_cost(&u, i, &state.neighbors[i]);
        oracle += brute_force_min(&u, i, &same_class_peers(&labels, i), k);
    }
    let trace_form = 2.0 * state.intra_laplacian().quadratic_trace(&u);
    (greedy - oracle).abs().max((trace_form - oracle).abs())
}

/// `Tr(U'L_sU)` with every peer selected versus half the direct full intra-class
/// pairwise sum; returns the relative gap.
pub fn all_peer_trace_gap(seed: u64) -> f64 {
    let mut rng = rng(seed);
    let n = rng.random_range(5..=14);
    let d = rng.random_range(1..=5);
    let classes = rng.random_range(1..=3);
    let labels = random_labels(&mut rng, n, classes, 0.2);
    let u = random_matrix(&mut rng, n, d);
    let largest = (0..classes).map(|c| labels.members(c).len()).max().unwrap_or(1);
    let view = LabeledView::from_table(&labels);
    let config = RsdneConfig {
        dim: d,
        k: largest.saturating_sub(1).max(1),
        ..RsdneConfig::default()
    };
    let mut state = blank_state(u.clone(), d);
    update_selection(&mut state, &view, &config, SelectionMode::Full);
    let trace = state.intra_laplacian().quadratic_trace(&u);

    let mut pairwise = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j && !labels.labels(i).is_empty() && labels.labels(i) == labels.labels(j) {
                pairwise += sq_dist(&u, i, j);
            }
        }
    }
    let direct = 0.5 * pairwise;
    (trace - direct).abs() / direct.abs().max(f64::MIN_POSITIVE)
}

/// Worst entrywise relative error between `analytic` and central differences of `f`.
pub fn fd_error(param: &DMatrix<f64>, analytic: &DMatrix<f64>, f: &mut dyn FnMut(&DMatrix<f64>) -> f64) -> f64 {
    let mut worst: f64 = 0.0;
    let mut p = param.clone();
    for idx in 0..p.len() {
        let orig = p[idx];
        p[idx] = orig + FD_STEP;
        let up = f(&p);
        p[idx] = orig - FD_STEP;
        let down = f(&p);
        p[idx] = orig;
        let numeric = (up - down) / (2.0 * FD_STEP);
        let a = analytic[idx];
        let rel = (numeric - a).abs() / numeric.abs().max(a.abs()).max(FD_FLOOR);
        worst = worst.max(rel);
    }
    worst
}

/// Finite-difference check of both solver gradients on a random instance with n <= 8.
pub fn rsdne_gradient_error(seed: u64) -> f64 {
    let mut rng = rng(seed);
    let n = rng.random_range(4..=8);
    let d = rng.random_range(2..=3);
    let graph = random_graph(&mut rng, n, 0.3);
    let proximity = ProximityMatrix::of_graph(&graph);
    let labels = random_labels(&mut rng, n, 2, 0.3);
    let view = LabeledView::from_table(&labels);
    let config = RsdneConfig {
        dim: d,
        k: 2,
        alpha: 1.0,
        lambda: 0.1,
        seed,
        ..RsdneConfig::default()
    };
    let mut state = init_state(&config, &view, &proximity, SelectionMode::Full);
    update_selection(&mut state, &view, &config, SelectionMode::Full);

    let gu = grad_u(&state, &proximity, &config);
    let gh = grad_h(&state, &proximity, &config);
    let mut probe = state.clone();
    let eu = fd_error(&state.u, &gu, &mut |u| {
        probe.u = u.clone();
        objective(&probe, &proximity, &config)
    });
    let mut probe = state.clone();
    let eh = fd_error(&state.h, &gh, &mut |h| {
        probe.h = h.clone();
        objective(&probe, &proximity, &config)
    });
    eu.max(eh)
}

struct RectInstance {
    propagated: CsrMatrix,
    proximity: ProximityMatrix,
    targets: SemanticTargets,
    pairs: Vec<(usize, usize)>,
    params: RectLParams,
    structural: GcnParams,
}

fn rect_instance(seed: u64) -> RectInstance {
    let mut rng = rng(seed);
    let n = rng.random_range(4..=8);
    let m = rng.random_range(2..=5);
    let h = rng.random_range(2..=4);
    let s = rng.random_range(1..=3);
    let graph = random_graph(&mut rng, n, 0.3);
    let proximity = ProximityMatrix::of_graph(&graph);
    let x = CsrMatrix::from_dense(&random_matrix(&mut rng, n, m));
    let propagated = propagate(&normalize_adjacency(&graph), &x);
    let mut labels = random_labels(&mut rng, n, 2, 0.3);
    if labels.labeled_nodes().is_empty() {
        labels = LabelTable::single(2, &vec![0; n]).unwrap();
    }
    let view = LabeledView::from_table(&labels);
    let reduced = random_matrix(&mut rng, n, s);
    let targets = SemanticTargets::readout(&reduced, &view).unwrap();
    let pairs = targets.pairs(&view);
    let slope = |rng: &mut ChaCha8Rng| DMatrix::from_fn(1, h, |_, _| rng.random_range(0.05..0.5));
    let params = RectLParams {
        gcn: GcnParams {
            weight: random_matrix(&mut rng, m, h),
            slope: slope(&mut rng),
        },
        head: HeadParams {
            weight: random_matrix(&mut rng, h, s),
            bias: random_matrix(&mut rng, 1, s),
        },
    };
    let structural = GcnParams {
        weight: random_matrix(&mut rng, m, h),
        slope: slope(&mut rng),
    };
    RectInstance {
        propagated,
        proximity,
        targets,
        pairs,
        params,
        structural,
    }
}

/// Finite-difference check of every RECT parameter gradient (GCN weight, PReLU
/// slope, head weight and bias for the semantic loss; GCN weight and slope for
/// the structure loss) on a random instance with n <= 8.
pub fn rect_gradient_error(seed: u64) -> f64 {
    let inst = rect_instance(seed);
    let (prop, targets, pairs) = (&inst.propagated, &inst.targets, &inst.pairs[..]);
    let (_, g) = rect_l_loss_grad(prop, &inst.params, targets, pairs);
    let semantic = |p: &RectLParams| rect_l_loss_grad(prop, p, targets, pairs).0;

    let mut worst: f64 = 0.0;
    let mut probe = inst.params.clone();
    worst = worst.max(fd_error(&inst.params.gcn.weight, &g.gcn.weight, &mut |w| {
        probe.gcn.weight = w.clone();
        semantic(&probe)
    }));
    let mut probe = inst.params.clone();
    worst = worst.max(fd_error(&inst.params.gcn.slope, &g.gcn.slope, &mut |w| {
        probe.gcn.slope = w.clone();
        semantic(&probe)
    }));
    let mut probe = inst.params.clone();
    worst = worst.max(fd_error(&inst.params.head.weight, &g.head.weight, &mut |w| {
        probe.head.weight = w.clone();
        semantic(&probe)
    }));
    let mut probe = inst.params.clone();
    worst = worst.max(fd_error(&inst.params.head.bias, &g.head.bias, &mut |w| {
        probe.head.bias = w.clone();
        semantic(&probe)
    }));

    let m = inst.proximity.sparse();
    let (_, g) = rect_n_loss_grad(prop, &inst.structural, m);
    let mut probe = inst.structural.clone();
    worst = worst.max(fd_error(&inst.structural.weight, &g.weight, &mut |w| {
        probe.weight = w.clone();
        rect_n_loss_grad(prop, &probe, m).0
    }));
    let mut probe = inst.structural.clone();
    worst = worst.max(fd_error(&inst.structural.slope, &g.slope, &mut |w| {
        probe.slope = w.clone();
        rect_n_loss_grad(prop, &probe, m).0
    }));
    worst
}

/// Most negative step-to-step decrease of the objective trace on a seeded SBM;
/// alternates the full and light solvers across seeds.
pub fn sbm_trace_worst_decrease(seed: u64) -> f64 {
    let bundle = generate_sbm(4, 30, 0.3, 0.03, seed).unwrap();
    let proximity = ProximityMatrix::of_graph(&bundle.graph);
    let plan = SplitPlan::sample(&bundle.labels, 0.5, 1, seed).unwrap();
    let view = LabeledView::new(&plan, &bundle.labels);
    let config = RsdneConfig {
        dim: 16,
        kbar: 10,
        tol: 0.0,
        seed,
        ..RsdneConfig::default()
    };
    let variant = if seed.is_multiple_of(2) { Variant::Rsdne } else { Variant::RsdneStar };
    let out = solve(&proximity, &view, &config, variant).unwrap();
    out.trace
        .windows(2)
        .map(|w| w[0].objective - w[1].objective)
        .fold(f64::INFINITY, f64::min)
}

/// Random prediction/truth pair; single-label when `single`, else multi-label.
pub fn random_f1_case(seed: u64) -> (Vec<Vec<usize>>, Vec<Vec<usize>>, usize, bool) {
    let mut rng = rng(seed);
    let classes = rng.random_range(1..=6);
    let n = rng.random_range(1..=40);
    let single = seed.is_multiple_of(2);
    let draw = |rng: &mut ChaCha8Rng| -> Vec<usize> {
        if single {
            vec![rng.random_range(0..classes)]
        } else {
            let mut s: Vec<usize> = (0..classes).filter(|_| rng.random_bool(0.35)).collect();
            if s.is_empty() {
                s.push(rng.random_range(0..classes));
            }
            s
        }
    };
    let truth: Vec<Vec<usize>> = (0..n).map(|_| draw(&mut rng)).collect();
    let pred: Vec<Vec<usize>> = (0..n).map(|_| draw(&mut rng)).collect();
    (pred, truth, classes, single)
}

fn f1_from(tp: u64, fp: u64, fn_: u64) -> f64 {
    if 2 * tp + fp + fn_ == 0 {
        0.0
    } else {
        (2 * tp) as f64 / (2 * tp + fp + fn_) as f64
    }
}

/// Micro and macro F1 from a full confusion matrix (single-label) or from
/// node-by-class indicator matrices (multi-label).
pub fn confusion_f1(pred: &[Vec<usize>], truth: &[Vec<usize>], classes: usize, single: bool) -> (f64, f64) {
    let (mut tp, mut fp, mut fn_) = (vec![0u64; classes], vec![0u64; classes], vec![0u64; classes]);
    if single {
        let mut confusion = vec![vec![0u64; classes]; classes];
        for (p, t) in pred.iter().zip(truth) {
            confusion[t[0]][p[0]] += 1;
        }
        for c in 0..classes {
            tp[c] = confusion[c][c];
            fp[c] = (0..classes).map(|r| confusion[r][c]).sum::<u64>() - tp[c];
            fn_[c] = confusion[c].iter().sum::<u64>() - tp[c];
        }
    } else {
        let indicator = |rows: &[Vec<usize>]| -> Vec<Vec<bool>> {
            rows.iter()
                .map(|r| (0..classes).map(|c| r.contains(&c)).collect())
                .collect()
        };
        let (p, t) = (indicator(pred), indicator(truth));
        for i in 0..pred.len() {
            for c in 0..classes {
                match (p[i][c], t[i][c]) {
                    (true, true) => tp[c] += 1,
                    (true, false) => fp[c] += 1,
                    (false, true) => fn_[c] += 1,
                    (false, false) => {}
                }
            }
        }
    }
    let micro = f1_from(tp.iter().sum(), fp.iter().sum(), fn_.iter().sum());
    let macro_ = (0..classes).map(|c| f1_from(tp[c], fp[c], fn_[c])).sum::<f64>() / classes as f64;
    (micro, macro_)
}

/// Number of cases among `count` where the library disagrees bit-for-bit with the oracle.
pub fn f1_mismatches(count: u64) -> usize {
    (0..count)
        .filter(|&seed| {
            let (pred, truth, classes, single) = random_f1_case(seed);
            let r = f1(&pred, &truth, classes).unwrap();
            (r.micro_f1, r.macro_f1) != confusion_f1(&pred, &truth, classes, single)
        })
        .count()
}

/// The four-node example: micro 0.75, macro (4/5 + 2/3)/2 = 0.7333...
pub fn f1_hand_example() -> (f64, f64) {
    let truth = vec![vec![0], vec![0], vec![1], vec![1]];
    let pred = vec![vec![0], vec![0], vec![1], vec![0]];
    let r = f1(&pred, &truth, 2).unwrap();
    (r.micro_f1, r.macro_f1)
}
