use std::collections::BTreeMap;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ClassSet, DatasetError, LabeledExample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Validation, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitDataset {
    pub classes: ClassSet,
    pub seed: u64,
    pub train: Vec<LabeledExample>,
    pub validation: Vec<LabeledExample>,
    pub test: Vec<LabeledExample>,
    /// Classes that had to be sampled with replacement, and similar notes.
    pub warnings: Vec<String>,
}

impl SplitDataset {
    pub fn empty(classes: ClassSet) -> Self {
        Self { classes, seed: 0, train: vec![], validation: vec![], test: vec![], warnings: vec![] }
    }

    pub fn split(&self, split: Split) -> &[LabeledExample] {
        match split {
            Split::Train => &self.train,
            Split::Validation => &self.validation,
            Split::Test => &self.test,
        }
    }

    pub fn split_mut(&mut self, split: Split) -> &mut Vec<LabeledExample> {
        match split {
            Split::Train => &mut self.train,
            Split::Validation => &mut self.validation,
            Split::Test => &mut self.test,
        }
    }

    pub fn iter_splits(&self) -> impl Iterator<Item = (Split, &[LabeledExample])> {
        Split::ALL.into_iter().map(|s| (s, self.split(s)))
    }

    pub fn len(&self) -> usize {
        self.train.len() + self.validation.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `class,split,rows,positives,negatives`, one line per class and split.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("class,split,rows,positives,negatives\n");
        for (k, class) in self.classes.iter().enumerate() {
            for (split, rows) in self.iter_splits() {
                let pos = rows.iter().filter(|r| r.labels[k]).count();
                out.push_str(&format!("{class},{},{},{pos},{}\n", split.as_str(), rows.len(), rows.len() - pos));
            }
        }
        out
    }
}

struct Sampler<'a> {
    rows: &'a [LabeledExample],
    used: Vec<bool>,
    assigned: Vec<Option<Split>>,
    rng: ChaCha8Rng,
    warnings: Vec<String>,
}

impl Sampler<'_> {
    /// Draws `n` rows from `candidates`, preferring rows no earlier class
    /// took. Falls back to sampling with replacement when short.
    fn draw(&mut self, candidates: &[usize], n: usize, what: &str) -> Vec<usize> {
        let fresh: Vec<usize> = candidates.iter().copied().filter(|&i| !self.used[i]).collect();
        let mut out: Vec<usize> = if fresh.len() >= n {
            index::sample(&mut self.rng, fresh.len(), n).into_iter().map(|j| fresh[j]).collect()
        } else {
            self.warnings.push(format!(
                "{what}: {} unused rows for {n} requested; sampled the rest with replacement",
                fresh.len()
            ));
            let mut out = fresh.clone();
            while out.len() < n {
                out.push(candidates[self.rng.gen_range(0..candidates.len())]);
            }
            out
        };
        for &i in &out {
            self.used[i] = true;
        }
        out.sort_unstable();
        out
    }

    /// Assigns rows to splits 80/10/10 by count. Duplicates of one row share
    /// its split, and rows placed by an earlier class keep their split.
    fn split(&mut self, drawn: &[usize]) {
        let mut multiplicity: BTreeMap<usize, usize> = BTreeMap::new();
        for &i in drawn {
            *multiplicity.entry(i).or_default() += 1;
        }
        let n = drawn.len();
        let train_target = (n * 8 + 5) / 10;
        let val_target = (n + 5) / 10;
        let mut counts = [0usize; 3];
        let mut fresh = Vec::new();
        for (&i, &m) in &multiplicity {
            match self.assigned[i] {
                Some(s) => counts[s as usize] += m,
                None => fresh.push(i),
            }
        }
        fresh.shuffle(&mut self.rng);
        for i in fresh {
            let split = if counts[0] < train_target {
                Split::Train
            } else if counts[1] < val_target {
                Split::Validation
            } else {
                Split::Test
            };
            counts[split as usize] += multiplicity[&i];
            self.assigned[i] = Some(split);
        }
    }
}

/// Samples `per_class_n / 2` positives and as many negatives for every
/// class, then splits each class's sample 80/10/10. Classes with the fewest
/// positives draw first, and a row drawn for one class is not drawn again
/// unless a later class runs short.
pub fn assemble(
    rows: &[LabeledExample],
    classes: &ClassSet,
    per_class_n: usize,
    seed: u64,
) -> Result<SplitDataset, DatasetError> {
    if per_class_n == 0 || per_class_n % 2 == 1 {
        return Err(DatasetError::OddPerClassN(per_class_n));
    }
    let half = per_class_n / 2;
    let k = classes.len();
    assert!(rows.iter().all(|r| r.labels.len() == k), "label vectors must match the class set");
    let positives: Vec<Vec<usize>> = (0..k).map(|c| (0..rows.len()).filter(|&i| rows[i].labels[c]).collect()).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&c| (positives[c].len(), c));

    let mut s = Sampler {
        rows,
        used: vec![false; rows.len()],
        assigned: vec![None; rows.len()],
        rng: ChaCha8Rng::seed_from_u64(seed),
        warnings: Vec::new(),
    };
    let mut drawn_all = Vec::new();
    for c in order {
        let name = classes.get(c).expect("in range").to_string();
        if positives[c].is_empty() {
            return Err(DatasetError::InsufficientPositives(name));
        }
        let negatives: Vec<usize> = (0..rows.len()).filter(|&i| !rows[i].labels[c]).collect();
        if negatives.is_empty() {
            return Err(DatasetError::InsufficientNegatives(name));
        }
        let pos = s.draw(&positives[c], half, &format!("{name} positives"));
        let neg = s.draw(&negatives, half, &format!("{name} negatives"));
        s.split(&pos);
        s.split(&neg);
        drawn_all.extend(pos);
        drawn_all.extend(neg);
    }

    let mut out = SplitDataset::empty(classes.clone());
    out.seed = seed;
    for i in drawn_all {
        let split = s.assigned[i].expect("every drawn row is assigned");
        out.split_mut(split).push(s.rows[i].clone());
    }
    out.warnings = s.warnings;
    Ok(out)
}
