use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::record::WaveformRecord;
use crate::error::{Error, Result};
use crate::sri::Condition;

pub const DEFAULT_TRAIN_FRACTION: f64 = 0.8;

/// Disjoint train/test partition of a record set.
#[derive(Debug, Clone)]
pub struct DatasetSplit {
    pub train: Vec<WaveformRecord>,
    pub test: Vec<WaveformRecord>,
    /// Positions in the input slice, ascending.
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub seed: u64,
    pub train_fraction: f64,
}

/// Seeded split stratified by condition.
///
/// Each class contributes `round(train_fraction · n_class)` records to the
/// training side; both sides must keep at least one record of each class.
pub fn split(records: &[WaveformRecord], train_fraction: f64, seed: u64) -> Result<DatasetSplit> {
    if records.len() < 2 {
        return Err(Error::Split(format!("need at least 2 records, got {}", records.len())));
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Split(format!("train fraction must be in (0, 1), got {train_fraction}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train_indices = Vec::new();
    let mut test_indices = Vec::new();
    for class in Condition::ALL {
        let mut idx: Vec<usize> = records
            .iter()
            .enumerate()
            .filter(|(_, r)| r.condition == class)
            .map(|(i, _)| i)
            .collect();
        idx.shuffle(&mut rng);
        let n_train = (train_fraction * idx.len() as f64).round() as usize;
        if n_train == 0 || n_train == idx.len() {
            return Err(Error::Split(format!(
                "class {class:?} has {} records; cannot place at least one on each side",
                idx.len()
            )));
        }
        test_indices.extend_from_slice(&idx[n_train..]);
        idx.truncate(n_train);
        train_indices.extend(idx);
    }
    train_indices.sort_unstable();
    test_indices.sort_unstable();
    Ok(DatasetSplit {
        train: train_indices.iter().map(|&i| records[i].clone()).collect(),
        test: test_indices.iter().map(|&i| records[i].clone()).collect(),
        train_indices,
        test_indices,
        seed,
        train_fraction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn records(n_los: usize, n_nlos: usize) -> Vec<WaveformRecord> {
        (0..n_los + n_nlos)
            .map(|i| {
                let c = if i < n_los { Condition::Los } else { Condition::Nlos };
                WaveformRecord::new(vec![i as f64], 5.0, 5.0, c)
            })
            .collect()
    }

    fn count(rs: &[WaveformRecord], c: Condition) -> usize {
        rs.iter().filter(|r| r.condition == c).count()
    }

    #[test]
    fn exact_stratification() {
        let s = split(&records(50, 50), 0.8, 3).unwrap();
        assert_eq!(s.train.len(), 80);
        assert_eq!(s.test.len(), 20);
        assert_eq!(count(&s.train, Condition::Los), 40);
        assert_eq!(count(&s.test, Condition::Nlos), 10);
    }

    #[test]
    fn deterministic_and_disjoint() {
        let rs = records(37, 61);
        let a = split(&rs, 0.8, 9).unwrap();
        let b = split(&rs, 0.8, 9).unwrap();
        assert_eq!(a.train_indices, b.train_indices);
        let mut all: Vec<usize> = a.train_indices.iter().chain(&a.test_indices).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..rs.len()).collect::<Vec<_>>());
        let c = split(&rs, 0.8, 10).unwrap();
        assert_ne!(a.train_indices, c.train_indices);
    }

    #[test]
    fn full_scale_dataset_size() {
        // 49 233 samples at 80 %: 39 386 ± 1 for training.
        let rs = records(24_000, 25_233);
        let s = split(&rs, 0.8, 1).unwrap();
        assert!((s.train.len() as i64 - 39_386).abs() <= 1, "{}", s.train.len());
        let full = 24_000.0 / 49_233.0;
        let tr = count(&s.train, Condition::Los) as f64 / s.train.len() as f64;
        let te = count(&s.test, Condition::Los) as f64 / s.test.len() as f64;
        assert!((tr - full).abs() < 0.01 && (te - full).abs() < 0.01);
    }

    #[test]
    fn single_class_fails() {
        assert!(matches!(split(&records(10, 0), 0.8, 0), Err(Error::Split(_))));
        assert!(matches!(split(&records(10, 1), 0.8, 0), Err(Error::Split(_))));
        assert!(matches!(split(&records(1, 0), 0.8, 0), Err(Error::Split(_))));
    }
}
