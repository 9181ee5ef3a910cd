//! Label bookkeeping and completely-imbalanced train/test splits.
//!
//! A [`SplitPlan`] samples a training set `L`, hides a set of unseen classes
//! and derives the reduced training set `L'` that embedding methods may see.
//! Methods never receive the plan itself, only a [`LabeledView`] of `L'`.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Per-node class sets over a fixed class universe.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelTable {
    classes: Vec<String>,
    node_labels: Vec<Vec<usize>>,
}

impl LabelTable {
    /// `node_labels[i]` lists class indices into `classes`; empty means unlabeled.
    pub fn new(classes: Vec<String>, mut node_labels: Vec<Vec<usize>>) -> Result<Self> {
        for (i, set) in node_labels.iter_mut().enumerate() {
            set.sort_unstable();
            set.dedup();
            if let Some(&c) = set.iter().find(|&&c| c >= classes.len()) {
                return Err(Error::Data(format!("node {i} references unknown class index {c}")));
            }
        }
        Ok(LabelTable {
            classes,
            node_labels,
        })
    }

    /// Single-label table with classes named `0..num_classes`.
    pub fn single(num_classes: usize, assignment: &[usize]) -> Result<Self> {
        let classes = (0..num_classes).map(|c| c.to_string()).collect();
        Self::new(classes, assignment.iter().map(|&c| vec![c]).collect())
    }

    pub fn n(&self) -> usize {
        self.node_labels.len()
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn class_names(&self) -> &[String] {
        &self.classes
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == name)
    }

    pub fn labels(&self, node: usize) -> &[usize] {
        &self.node_labels[node]
    }

    pub fn is_labeled(&self, node: usize) -> bool {
        !self.node_labels[node].is_empty()
    }

    pub fn labeled_nodes(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.is_labeled(i)).collect()
    }

    pub fn is_multi_label(&self) -> bool {
        self.node_labels.iter().any(|s| s.len() > 1)
    }

    /// All nodes carrying `class`, ascending.
    pub fn members(&self, class: usize) -> Vec<usize> {
        (0..self.n())
            .filter(|&i| self.node_labels[i].binary_search(&class).is_ok())
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    /// In `L'`: training node whose labels are all seen.
    Train,
    /// In `L` but dropped from `L'` because it carries an unseen class.
    TrainRemoved,
    Test,
    Unlabeled,
}

impl Role {
    fn as_str(self) -> &'static str {
        match self {
            Role::Train => "train",
            Role::TrainRemoved => "train_removed",
            Role::Test => "test",
            Role::Unlabeled => "unlabeled",
        }
    }

    fn parse(s: &str) -> Option<Role> {
        match s {
            "train" => Some(Role::Train),
            "train_removed" => Some(Role::TrainRemoved),
            "test" => Some(Role::Test),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplitPlan {
    seed: u64,
    train_fraction: f64,
    num_classes: usize,
    unseen: Vec<usize>,
    roles: Vec<Role>,
}

impl SplitPlan {
    /// Samples a split with `unseen_count` classes hidden uniformly at random.
    pub fn sample(
        labels: &LabelTable,
        train_fraction: f64,
        unseen_count: usize,
        seed: u64,
    ) -> Result<SplitPlan> {
        if unseen_count >= labels.num_classes() {
            return Err(Error::Config(format!(
                "unseen count {unseen_count} must be below the class count {}",
                labels.num_classes()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut classes: Vec<usize> = (0..labels.num_classes()).collect();
        classes.shuffle(&mut rng);
        let mut unseen = classes[..unseen_count].to_vec();
        unseen.sort_unstable();
        Self::sample_train(labels, train_fraction, unseen, seed, &mut rng)
    }

    /// Samples a split with an explicit unseen class set.
    pub fn with_unseen(
        labels: &LabelTable,
        train_fraction: f64,
        unseen: &[usize],
        seed: u64,
    ) -> Result<SplitPlan> {
        let mut unseen = unseen.to_vec();
        unseen.sort_unstable();
        unseen.dedup();
        if unseen.iter().any(|&c| c >= labels.num_classes()) || unseen.len() >= labels.num_classes() {
            return Err(Error::Config(format!("invalid unseen class set {unseen:?}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::sample_train(labels, train_fraction, unseen, seed, &mut rng)
    }

    fn sample_train(
        labels: &LabelTable,
        train_fraction: f64,
        unseen: Vec<usize>,
        seed: u64,
        rng: &mut ChaCha8Rng,
    ) -> Result<SplitPlan> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::Config(format!("train fraction {train_fraction} not in (0, 1)")));
        }
        let n = labels.n();
        let mut in_train = vec![false; n];
        if labels.is_multi_label() {
            let mut pool = labels.labeled_nodes();
            let take = (train_fraction * pool.len() as f64).round() as usize;
            pool.shuffle(rng);
            for &i in &pool[..take] {
                in_train[i] = true;
            }
        } else {
            // Stratified: the same fraction of every class.
            for c in 0..labels.num_classes() {
                let mut members = labels.members(c);
                let take = (train_fraction * members.len() as f64).round() as usize;
                members.shuffle(rng);
                for &i in &members[..take] {
                    in_train[i] = true;
                }
            }
        }
        let roles = (0..n)
            .map(|i| {
                if !labels.is_labeled(i) {
                    Role::Unlabeled
                } else if !in_train[i] {
                    Role::Test
                } else if labels.labels(i).iter().any(|c| unseen.binary_search(c).is_ok()) {
                    Role::TrainRemoved
                } else {
                    Role::Train
                }
            })
            .collect();
        let plan = SplitPlan {
            seed,
            train_fraction,
            num_classes: labels.num_classes(),
            unseen,
            roles,
        };
        if plan.seen_train().is_empty() {
            return Err(Error::Data(
                "completely-imbalanced training set is empty: every training node carries an unseen class".into(),
            ));
        }
        Ok(plan)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn train_fraction(&self) -> f64 {
        self.train_fraction
    }

    pub fn n(&self) -> usize {
        self.roles.len()
    }

    pub fn role(&self, node: usize) -> Role {
        self.roles[node]
    }

    pub fn unseen(&self) -> &[usize] {
        &self.unseen
    }

    pub fn is_seen(&self, class: usize) -> bool {
        class < self.num_classes && self.unseen.binary_search(&class).is_err()
    }

    pub fn seen(&self) -> Vec<usize> {
        (0..self.num_classes).filter(|&c| self.is_seen(c)).collect()
    }

    fn with_role(&self, pred: impl Fn(Role) -> bool) -> Vec<usize> {
        (0..self.n()).filter(|&i| pred(self.roles[i])).collect()
    }

    /// `L`: every sampled training node, including the removed ones.
    pub fn train(&self) -> Vec<usize> {
        self.with_role(|r| matches!(r, Role::Train | Role::TrainRemoved))
    }

    /// `L'`: training nodes whose labels are all seen.
    pub fn seen_train(&self) -> Vec<usize> {
        self.with_role(|r| r == Role::Train)
    }

    pub fn test(&self) -> Vec<usize> {
        self.with_role(|r| r == Role::Test)
    }

    /// Nodes of `L'` carrying `class`, ascending.
    pub fn class_members(&self, labels: &LabelTable, class: usize) -> Result<Vec<usize>> {
        if !self.is_seen(class) {
            return Err(Error::Data(format!("class {class} is unseen in this split")));
        }
        Ok(self
            .seen_train()
            .into_iter()
            .filter(|&i| labels.labels(i).binary_search(&class).is_ok())
            .collect())
    }

    pub fn write(&self, labels: &LabelTable, path: &Path) -> Result<()> {
        let mut out = String::new();
        let names = labels.class_names();
        writeln!(
            out,
            "#split\tseed={}\ttrain_fraction={}\tn={}",
            self.seed,
            self.train_fraction,
            self.n()
        )
        .unwrap();
        writeln!(out, "#classes\t{}", names.join("\t")).unwrap();
        let unseen: Vec<&str> = self.unseen.iter().map(|&c| names[c].as_str()).collect();
        writeln!(out, "#unseen\t{}", unseen.join("\t")).unwrap();
        for (i, role) in self.roles.iter().enumerate() {
            if *role != Role::Unlabeled {
                writeln!(out, "{i}\t{}", role.as_str()).unwrap();
            }
        }
        let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn read(labels: &LabelTable, path: &Path) -> Result<SplitPlan> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut seed = None;
        let mut fraction = None;
        let mut n = None;
        let mut unseen = Vec::new();
        let mut roles: Option<Vec<Role>> = None;
        for (lineno, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let lineno = lineno + 1;
            let fields: Vec<&str> = line.split('\t').collect();
            match fields[0] {
                "#split" => {
                    for kv in &fields[1..] {
                        let (k, v) = kv
                            .split_once('=')
                            .ok_or_else(|| Error::parse(path, lineno, "expected key=value"))?;
                        let bad = || Error::parse(path, lineno, format!("bad value for {k}"));
                        match k {
                            "seed" => seed = Some(v.parse::<u64>().map_err(|_| bad())?),
                            "train_fraction" => fraction = Some(v.parse::<f64>().map_err(|_| bad())?),
                            "n" => n = Some(v.parse::<usize>().map_err(|_| bad())?),
                            _ => return Err(Error::parse(path, lineno, format!("unknown key {k}"))),
                        }
                    }
                    let n = n.ok_or_else(|| Error::parse(path, lineno, "missing n"))?;
                    if n != labels.n() {
                        return Err(Error::Data(format!(
                            "split covers {n} nodes but the label table has {}",
                            labels.n()
                        )));
                    }
                    roles = Some(vec![Role::Unlabeled; n]);
                }
                "#classes" => {
                    if fields[1..] != *labels.class_names() {
                        return Err(Error::parse(path, lineno, "class universe differs from labels"));
                    }
                }
                "#unseen" => {
                    for name in fields[1..].iter().filter(|s| !s.is_empty()) {
                        let c = labels.class_index(name).ok_or_else(|| {
                            Error::parse(path, lineno, format!("unknown class {name}"))
                        })?;
                        unseen.push(c);
                    }
                    unseen.sort_unstable();
                }
                "" => {}
                _ => {
                    let roles = roles
                        .as_mut()
                        .ok_or_else(|| Error::parse(path, lineno, "row before #split header"))?;
                    if fields.len() != 2 {
                        return Err(Error::parse(path, lineno, "expected node<TAB>role"));
                    }
                    let node: usize = fields[0]
                        .parse()
                        .map_err(|_| Error::parse(path, lineno, "bad node id"))?;
                    let role = Role::parse(fields[1])
                        .ok_or_else(|| Error::parse(path, lineno, format!("bad role {}", fields[1])))?;
                    if node >= roles.len() {
                        return Err(Error::parse(path, lineno, format!("node {node} out of range")));
                    }
                    if !labels.is_labeled(node) {
                        return Err(Error::parse(path, lineno, format!("node {node} has no labels")));
                    }
                    roles[node] = role;
                }
            }
        }
        let roles = roles.ok_or_else(|| Error::parse(path, 1, "missing #split header"))?;
        Ok(SplitPlan {
            seed: seed.unwrap_or(0),
            train_fraction: fraction.unwrap_or(0.0),
            num_classes: labels.num_classes(),
            unseen,
            roles,
        })
    }
}

/// Every `k`-subset of `0..num_classes` in lexicographic order.
pub fn unseen_combinations(num_classes: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for c in start..n {
            if n - c < k - cur.len() {
                break;
            }
            cur.push(c);
            rec(c + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= num_classes {
        rec(0, num_classes, k, &mut Vec::new(), &mut out);
    }
    out
}

/// How unseen class sets are chosen across repeats.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnseenSchedule {
    /// An independent uniform draw per repeat.
    Random,
    /// Repeat `r` uses combination `r mod C(|C|, k)` in lexicographic order.
    Exhaustive,
}

impl UnseenSchedule {
    pub fn unseen_for(self, num_classes: usize, count: usize, repeat: usize) -> Option<Vec<usize>> {
        match self {
            UnseenSchedule::Random => None,
            UnseenSchedule::Exhaustive => {
                let combos = unseen_combinations(num_classes, count);
                combos.get(repeat % combos.len().max(1)).cloned()
            }
        }
    }
}

/// The label information an embedding method is allowed to see: `L'` only.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledView {
    num_classes: usize,
    seen: Vec<bool>,
    node_labels: Vec<Vec<usize>>,
    members: Vec<Vec<usize>>,
}

impl LabeledView {
    pub fn new(plan: &SplitPlan, labels: &LabelTable) -> Self {
        let n = labels.n();
        let num_classes = labels.num_classes();
        let seen: Vec<bool> = (0..num_classes).map(|c| plan.is_seen(c)).collect();
        let mut node_labels = vec![Vec::new(); n];
        let mut members = vec![Vec::new(); num_classes];
        for i in plan.seen_train() {
            node_labels[i] = labels.labels(i).to_vec();
            for &c in labels.labels(i) {
                members[c].push(i);
            }
        }
        LabeledView {
            num_classes,
            seen,
            node_labels,
            members,
        }
    }

    /// A view with no labeled nodes, for unsupervised methods.
    pub fn unlabeled(n: usize, num_classes: usize) -> Self {
        LabeledView {
            num_classes,
            seen: vec![true; num_classes],
            node_labels: vec![Vec::new(); n],
            members: vec![Vec::new(); num_classes],
        }
    }

    /// Every labeled node in its own view direct from an assignment; used when a
    /// caller has no split (all given labels are training labels).
    pub fn from_table(labels: &LabelTable) -> Self {
        let mut members = vec![Vec::new(); labels.num_classes()];
        for i in 0..labels.n() {
            for &c in labels.labels(i) {
                members[c].push(i);
            }
        }
        LabeledView {
            num_classes: labels.num_classes(),
            seen: vec![true; labels.num_classes()],
            node_labels: (0..labels.n()).map(|i| labels.labels(i).to_vec()).collect(),
            members,
        }
    }

    pub fn n(&self) -> usize {
        self.node_labels.len()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn is_seen(&self, class: usize) -> bool {
        self.seen[class]
    }

    pub fn is_labeled(&self, node: usize) -> bool {
        !self.node_labels[node].is_empty()
    }

    pub fn labels(&self, node: usize) -> &[usize] {
        &self.node_labels[node]
    }

    pub fn labeled_nodes(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.is_labeled(i)).collect()
    }

    pub fn has_labels(&self) -> bool {
        self.node_labels.iter().any(|s| !s.is_empty())
    }

    /// Labeled members of `class`, ascending.
    pub fn members(&self, class: usize) -> &[usize] {
        &self.members[class]
    }

    /// Seen classes with at least one labeled member.
    pub fn populated_classes(&self) -> Vec<usize> {
        (0..self.num_classes)
            .filter(|&c| self.seen[c] && !self.members[c].is_empty())
            .collect()
    }

    /// True when both nodes are labeled and their label sets are disjoint.
    pub fn different_classes(&self, a: usize, b: usize) -> bool {
        let (la, lb) = (&self.node_labels[a], &self.node_labels[b]);
        !la.is_empty() && !lb.is_empty() && !la.iter().any(|c| lb.binary_search(c).is_ok())
    }

    /// Labeled nodes other than `node` sharing at least one class with it, ascending.
    pub fn peers(&self, node: usize) -> Vec<usize> {
        let classes = &self.node_labels[node];
        let mut out: Vec<usize> = match classes.as_slice() {
            [] => Vec::new(),
            [c] => self.members[*c].clone(),
            _ => {
                let mut v: Vec<usize> = classes.iter().flat_map(|&c| self.members[c].iter().copied()).collect();
                v.sort_unstable();
                v.dedup();
                v
            }
        };
        out.retain(|&j| j != node);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc() -> LabelTable {
        LabelTable::new(
            vec!["A".into(), "B".into(), "C".into()],
            vec![vec![2], vec![0], vec![1]],
        )
        .unwrap()
    }

    #[test]
    fn unseen_nodes_are_removed_from_train() {
        let labels = abc();
        // Train fraction close to 1 keeps every single-member class in L.
        let plan = SplitPlan::with_unseen(&labels, 0.99, &[2], 1).unwrap();
        assert_eq!(plan.train(), vec![0, 1, 2]);
        assert_eq!(plan.seen_train(), vec![1, 2]);
        assert_eq!(plan.role(0), Role::TrainRemoved);
    }

    #[test]
    fn balanced_split_keeps_everything() {
        let labels = LabelTable::single(3, &[0, 0, 1, 1, 2, 2, 0, 1, 2, 0]).unwrap();
        let plan = SplitPlan::sample(&labels, 0.5, 0, 3).unwrap();
        assert_eq!(plan.train(), plan.seen_train());
        assert!(plan.unseen().is_empty());
    }

    #[test]
    fn stratification_takes_fraction_of_each_class() {
        let assignment: Vec<usize> = (0..60).map(|i| i % 3).collect();
        let labels = LabelTable::single(3, &assignment).unwrap();
        let plan = SplitPlan::sample(&labels, 0.3, 1, 11).unwrap();
        for c in 0..3 {
            let in_train = plan.train().iter().filter(|&&i| labels.labels(i)[0] == c).count();
            assert_eq!(in_train, 6);
        }
        assert_eq!(plan.test().len(), 42);
    }

    #[test]
    fn empty_reduced_set_is_an_error() {
        let labels = LabelTable::single(2, &[0, 0, 0, 1]).unwrap();
        let err = SplitPlan::with_unseen(&labels, 0.4, &[0], 2);
        // Class 1 has one member which rounds to zero training nodes.
        assert!(matches!(err, Err(Error::Data(_))));
    }

    #[test]
    fn rejects_bad_arguments() {
        let labels = abc();
        assert!(SplitPlan::sample(&labels, 0.5, 3, 0).is_err());
        assert!(SplitPlan::sample(&labels, 1.0, 1, 0).is_err());
        assert!(SplitPlan::sample(&labels, 0.0, 1, 0).is_err());
    }

    #[test]
    fn combinations_of_six_choose_two() {
        let combos = unseen_combinations(6, 2);
        assert_eq!(combos.len(), 15);
        let mut dedup = combos.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), 15);
        assert!(combos.iter().all(|c| c.len() == 2 && c[0] < c[1] && c[1] < 6));
        assert_eq!(unseen_combinations(4, 0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn class_members_in_reduced_set() {
        let labels = LabelTable::new(
            vec!["A".into(), "B".into(), "C".into()],
            vec![
                vec![0],
                vec![1],
                vec![2],
                vec![0, 1],
                vec![0],
                vec![1],
                vec![2],
                vec![0],
            ],
        )
        .unwrap();
        let plan = SplitPlan::with_unseen(&labels, 0.99, &[2], 5).unwrap();
        assert_eq!(plan.class_members(&labels, 0).unwrap(), vec![0, 3, 4, 7]);
        assert_eq!(plan.class_members(&labels, 1).unwrap(), vec![1, 3, 5]);
        assert!(plan.class_members(&labels, 2).is_err());

        let view = LabeledView::new(&plan, &labels);
        assert_eq!(view.peers(3), vec![0, 1, 4, 5, 7]);
        assert!(!view.different_classes(0, 3));
        assert!(view.different_classes(0, 1));
        assert!(!view.is_labeled(2));
    }

    #[test]
    fn seen_class_without_members_is_legal() {
        let labels = LabelTable::single(3, &[0, 0, 0, 0, 1, 2, 2, 2]).unwrap();
        // Class 1 has a single member that rounds out of the training set at 0.3.
        let plan = SplitPlan::with_unseen(&labels, 0.3, &[2], 0).unwrap();
        assert_eq!(plan.class_members(&labels, 1).unwrap(), Vec::<usize>::new());
    }

    #[test]
    fn split_file_round_trip() {
        let assignment: Vec<usize> = (0..30).map(|i| i % 4).collect();
        let mut labels = LabelTable::single(4, &assignment).unwrap();
        labels.node_labels[7].clear();
        let plan = SplitPlan::sample(&labels, 0.4, 2, 99).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("split.tsv");
        plan.write(&labels, &path).unwrap();
        let back = SplitPlan::read(&labels, &path).unwrap();
        assert_eq!(back, plan);
        assert_eq!(back.role(7), Role::Unlabeled);
    }
}
