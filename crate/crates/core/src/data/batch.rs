use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Mini-batch index sampler: without replacement within an epoch, seeded
/// reshuffle at each epoch boundary.
///
/// The last batch of an epoch is short when `batch_size` does not divide the
/// set size, so every index appears exactly once per epoch.
#[derive(Debug, Clone)]
pub struct BatchSampler {
    len: usize,
    batch_size: usize,
    rng: ChaCha8Rng,
    order: Vec<usize>,
    cursor: usize,
}

impl BatchSampler {
    pub fn new(len: usize, batch_size: usize, seed: u64) -> Result<Self> {
        if batch_size == 0 {
            return Err(Error::Argument("batch size must be positive".into()));
        }
        if batch_size > len {
            return Err(Error::Argument(format!(
                "batch size {batch_size} exceeds training set size {len}"
            )));
        }
        Ok(Self {
            len,
            batch_size,
            rng: ChaCha8Rng::seed_from_u64(seed),
            order: (0..len).collect(),
            cursor: len,
        })
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    /// Next batch of indices, reshuffling when the epoch is exhausted.
    pub fn next_batch(&mut self) -> Vec<usize> {
        if self.cursor >= self.len {
            self.order.shuffle(&mut self.rng);
            self.cursor = 0;
        }
        let end = (self.cursor + self.batch_size).min(self.len);
        let batch = self.order[self.cursor..end].to_vec();
        self.cursor = end;
        batch
    }

    /// All batches of one fresh epoch.
    pub fn epoch(&mut self) -> Vec<Vec<usize>> {
        self.cursor = self.len;
        let mut batches = Vec::with_capacity(self.len.div_ceil(self.batch_size));
        loop {
            batches.push(self.next_batch());
            if self.cursor >= self.len {
                return batches;
            }
        }
    }

    /// Draws the next batch from `items`, which must have the sampler's length.
    pub fn sample<'a, T>(&mut self, items: &'a [T]) -> Result<Vec<&'a T>> {
        if items.len() != self.len {
            return Err(Error::dim("batch sampler source", self.len, items.len()));
        }
        Ok(self.next_batch().into_iter().map(|i| &items[i]).collect())
    }
}
