//! Deterministic 5-fold cross-validation plans with 4:1 train/val
//! sub-splits inside each round's training data.

use asad_nn::SeededRng;

use crate::error::{DataError, Result};

pub const NUM_FOLDS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldRound {
    pub test: Vec<usize>,
    pub train: Vec<usize>,
    pub val: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub seed: u64,
    pub n_windows: usize,
    /// fold_of[window_index] in 0..5.
    pub fold_of: Vec<u8>,
    pub rounds: Vec<FoldRound>,
}

impl FoldPlan {
    pub fn fold_sizes(&self) -> [usize; NUM_FOLDS] {
        let mut sizes = [0usize; NUM_FOLDS];
        for &f in &self.fold_of {
            sizes[f as usize] += 1;
        }
        sizes
    }
}

fn split_rounds(folds: Vec<Vec<usize>>, n: usize, seed: u64) -> FoldPlan {
    let mut fold_of = vec![0u8; n];
    for (f, members) in folds.iter().enumerate() {
        for &w in members {
            fold_of[w] = f as u8;
        }
    }
    let mut rounds = Vec::with_capacity(NUM_FOLDS);
    for r in 0..NUM_FOLDS {
        let test = folds[r].clone();
        let mut pool: Vec<usize> = (0..NUM_FOLDS)
            .filter(|&f| f != r)
            .flat_map(|f| folds[f].iter().copied())
            .collect();
        let mut rng = SeededRng::derive(seed, "train-val-split", &[r as u64]);
        rng.shuffle(&mut pool);
        let val_len = pool.len() / NUM_FOLDS;
        let val = pool[..val_len].to_vec();
        let train = pool[val_len..].to_vec();
        rounds.push(FoldRound { test, train, val });
    }
    FoldPlan {
        seed,
        n_windows: n,
        fold_of,
        rounds,
    }
}

/// Uniformly shuffle windows and deal them round-robin into 5 folds.
pub fn make_folds(n_windows: usize, seed: u64) -> Result<FoldPlan> {
    if n_windows < NUM_FOLDS {
        return Err(DataError::TooFewWindows { n: n_windows });
    }
    let mut order: Vec<usize> = (0..n_windows).collect();
    let mut rng = SeededRng::derive(seed, "fold-shuffle", &[]);
    rng.shuffle(&mut order);
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); NUM_FOLDS];
    for (i, w) in order.into_iter().enumerate() {
        folds[i % NUM_FOLDS].push(w);
    }
    Ok(split_rounds(folds, n_windows, seed))
}

/// Like [`make_folds`] but whole trials move between folds together, so
/// windows of one trial never straddle the test boundary.
pub fn make_folds_grouped(window_trial: &[(String, u32)], seed: u64) -> Result<FoldPlan> {
    let n = window_trial.len();
    if n < NUM_FOLDS {
        return Err(DataError::TooFewWindows { n });
    }
    let mut trials: Vec<(String, u32)> = Vec::new();
    for key in window_trial {
        if !trials.contains(key) {
            trials.push(key.clone());
        }
    }
    if trials.len() < NUM_FOLDS {
        return Err(DataError::TooFewWindows { n: trials.len() });
    }
    let mut order: Vec<usize> = (0..trials.len()).collect();
    let mut rng = SeededRng::derive(seed, "fold-shuffle-trials", &[]);
    rng.shuffle(&mut order);
    let mut fold_of_trial = vec![0usize; trials.len()];
    for (i, t) in order.into_iter().enumerate() {
        fold_of_trial[t] = i % NUM_FOLDS;
    }
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); NUM_FOLDS];
    for (w, key) in window_trial.iter().enumerate() {
        let t = trials.iter().position(|k| k == key).expect("key present");
        folds[fold_of_trial[t]].push(w);
    }
    Ok(split_rounds(folds, n, seed))
}
