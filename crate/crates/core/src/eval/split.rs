use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

fn shuffled_classes(labels: &[usize], seed: u64) -> [Vec<usize>; 2] {
    let mut classes = [Vec::new(), Vec::new()];
    for (i, &l) in labels.iter().enumerate() {
        classes[l.min(1)].push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for c in classes.iter_mut() {
        c.shuffle(&mut rng);
    }
    classes
}

/// Shuffles each class (seeded) and deals its members round-robin into `k`
/// folds, continuing the deal position from one class to the next so fold
/// sizes differ by at most one. Each fold is returned sorted.
pub fn stratified_kfold(labels: &[usize], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::InvalidConfig(format!("k = {k} folds, need at least 2")));
    }
    let classes = shuffled_classes(labels, seed);
    for (class, members) in classes.iter().enumerate() {
        if members.len() < k {
            return Err(Error::InsufficientClass {
                class,
                count: members.len(),
                required: k,
            });
        }
    }
    let mut folds = vec![Vec::new(); k];
    let mut at = 0;
    for members in &classes {
        for &i in members {
            folds[at].push(i);
            at = (at + 1) % k;
        }
    }
    for f in folds.iter_mut() {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Stratified `(train, test)` split with `round(fraction · N)` test rows.
/// Per-class test counts start at `floor(fraction · n_c)` and the remaining
/// rows go to the classes with the largest remainders.
pub fn holdout_split(labels: &[usize], fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidConfig(format!("hold-out fraction {fraction} outside (0, 1)")));
    }
    let classes = shuffled_classes(labels, seed);
    for (class, members) in classes.iter().enumerate() {
        if members.len() < 2 {
            return Err(Error::InsufficientClass {
                class,
                count: members.len(),
                required: 2,
            });
        }
    }
    let total = (fraction * labels.len() as f64).round() as usize;
    let exact: Vec<f64> = classes.iter().map(|c| fraction * c.len() as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order: Vec<usize> = (0..classes.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (exact[a] - exact[a].floor(), exact[b] - exact[b].floor());
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let mut missing = total.saturating_sub(counts.iter().sum());
    for &c in order.iter().cycle().take(2 * classes.len()) {
        if missing == 0 {
            break;
        }
        if counts[c] < classes[c].len() {
            counts[c] += 1;
            missing -= 1;
        }
    }

    let mut train = Vec::new();
    let mut test = Vec::new();
    for (members, &t) in classes.iter().zip(&counts) {
        test.extend_from_slice(&members[..t]);
        train.extend_from_slice(&members[t..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}
