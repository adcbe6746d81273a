//! Train/val/test split by plan id. Frames of one plan never straddle splits.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::DatasetError;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<u32>,
    pub val: Vec<u32>,
    pub test: Vec<u32>,
}

impl Split {
    /// Shuffles `plan_ids` with `seed` and cuts at the given fractions
    /// (the test split takes the remainder). Each list is sorted.
    pub fn by_plan(plan_ids: &[u32], seed: u64, train_frac: f64, val_frac: f64) -> Split {
        let mut ids = plan_ids.to_vec();
        ids.sort_unstable();
        ids.dedup();
        ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let n = ids.len();
        let n_train = ((n as f64 * train_frac).round() as usize).min(n);
        let n_val = ((n as f64 * val_frac).round() as usize).min(n - n_train);
        let mut train = ids[..n_train].to_vec();
        let mut val = ids[n_train..n_train + n_val].to_vec();
        let mut test = ids[n_train + n_val..].to_vec();
        train.sort_unstable();
        val.sort_unstable();
        test.sort_unstable();
        Split { train, val, test }
    }

    pub fn default_fractions(plan_ids: &[u32], seed: u64) -> Split {
        Self::by_plan(plan_ids, seed, 0.8, 0.1)
    }

    pub fn get(&self, name: &str) -> Option<&[u32]> {
        match name {
            "train" => Some(&self.train),
            "val" => Some(&self.val),
            "test" => Some(&self.test),
            _ => None,
        }
    }

    /// `train=...`, `val=...`, `test=...` lines of comma-separated plan ids.
    pub fn to_manifest(&self) -> String {
        let join = |ids: &[u32]| ids.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
        format!(
            "train={}\nval={}\ntest={}\n",
            join(&self.train),
            join(&self.val),
            join(&self.test)
        )
    }

    pub fn from_manifest(text: &str) -> Result<Split, DatasetError> {
        let mut split = Split::default();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| DatasetError::BadSplitManifest(line.to_string()))?;
            let ids = value
                .split(',')
                .filter(|s| !s.is_empty())
                .map(|s| s.trim().parse::<u32>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| DatasetError::BadSplitManifest(line.to_string()))?;
            match key.trim() {
                "train" => split.train = ids,
                "val" => split.val = ids,
                "test" => split.test = ids,
                _ => return Err(DatasetError::BadSplitManifest(line.to_string())),
            }
        }
        Ok(split)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eighty_ten_ten_without_overlap() {
        let ids: Vec<u32> = (0..20).collect();
        let s = Split::default_fractions(&ids, 3);
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (16, 2, 2));
        let mut all: Vec<u32> = s.train.iter().chain(&s.val).chain(&s.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, ids);
        assert_eq!(Split::from_manifest(&s.to_manifest()).unwrap(), s);
    }
}
