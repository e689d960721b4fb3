//! Rating-log ingestion, implicit-feedback conversion, leave-one-out
//! splitting, and negative sampling.

use rand::Rng;
use serde::Serialize;
use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("parse error at {path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("empty dataset: {0}")]
    EmptyDataset(String),
    #[error("user {user} has only {count} interactions, need at least 3 for a split")]
    SplitTooFew { user: usize, count: usize },
    #[error("user {user}: negative pool has {available} items, {needed} needed")]
    EvalPoolTooSmall {
        user: usize,
        needed: usize,
        available: usize,
    },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RatingsFormat {
    /// MovieLens `u.data`: user \t item \t rating \t timestamp
    Tab,
    /// MovieLens `ratings.dat`: user::item::rating::timestamp
    DoubleColon,
}

impl RatingsFormat {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "tab" => Some(RatingsFormat::Tab),
            "double_colon" => Some(RatingsFormat::DoubleColon),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            RatingsFormat::Tab => "tab",
            RatingsFormat::DoubleColon => "double_colon",
        }
    }
}

/// One parsed rating line with ids already remapped to dense 0-based indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawRating {
    pub user_id: usize,
    pub item_id: usize,
    pub rating: f64,
    pub timestamp: i64,
}

/// Ratings plus the original-id mapping tables retained from loading.
#[derive(Debug, Clone)]
pub struct RatingLog {
    pub ratings: Vec<RawRating>,
    /// dense index -> original user id as it appeared in the file
    pub user_ids: Vec<u64>,
    /// dense index -> original item id
    pub item_ids: Vec<u64>,
}

pub fn load_ratings(path: &Path, format: RatingsFormat) -> Result<RatingLog, DataError> {
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    let mut ratings = Vec::new();
    let mut user_map: HashMap<u64, usize> = HashMap::new();
    let mut item_map: HashMap<u64, usize> = HashMap::new();
    let mut user_ids = Vec::new();
    let mut item_ids = Vec::new();
    let path_str = path.display().to_string();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = match format {
            RatingsFormat::Tab => line.split('\t').collect(),
            RatingsFormat::DoubleColon => line.split("::").collect(),
        };
        let err = |msg: String| DataError::Parse {
            path: path_str.clone(),
            line: idx + 1,
            msg,
        };
        if fields.len() != 4 {
            return Err(err(format!("expected 4 fields, got {}", fields.len())));
        }
        let user: u64 = fields[0]
            .trim()
            .parse()
            .map_err(|_| err(format!("bad user id {:?}", fields[0])))?;
        let item: u64 = fields[1]
            .trim()
            .parse()
            .map_err(|_| err(format!("bad item id {:?}", fields[1])))?;
        let rating: f64 = fields[2]
            .trim()
            .parse()
            .map_err(|_| err(format!("bad rating {:?}", fields[2])))?;
        let timestamp: i64 = fields[3]
            .trim()
            .parse()
            .map_err(|_| err(format!("bad timestamp {:?}", fields[3])))?;
        let user_id = *user_map.entry(user).or_insert_with(|| {
            user_ids.push(user);
            user_ids.len() - 1
        });
        let item_id = *item_map.entry(item).or_insert_with(|| {
            item_ids.push(item);
            item_ids.len() - 1
        });
        ratings.push(RawRating {
            user_id,
            item_id,
            rating,
            timestamp,
        });
    }
    if ratings.is_empty() {
        return Err(DataError::EmptyDataset(path_str));
    }
    Ok(RatingLog {
        ratings,
        user_ids,
        item_ids,
    })
}

/// Implicit-feedback dataset: every retained interaction is a positive.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub num_users: usize,
    pub num_items: usize,
    /// per user: (item_id, timestamp) sorted by (timestamp, item_id) ascending
    pub interactions: Vec<Vec<(usize, i64)>>,
}

impl Dataset {
    pub fn num_positives(&self) -> usize {
        self.interactions.iter().map(|v| v.len()).sum()
    }

    pub fn sparsity(&self) -> f64 {
        1.0 - self.num_positives() as f64 / (self.num_users * self.num_items) as f64
    }
}

/// Convert ratings to implicit positives, drop users with fewer than
/// `min_interactions`, collapse duplicate (user, item) pairs keeping the
/// latest timestamp, and re-densify ids.
pub fn to_implicit(log: &RatingLog, min_interactions: usize) -> Result<Dataset, DataError> {
    let num_users_raw = log.user_ids.len();
    let mut per_user: Vec<HashMap<usize, i64>> = vec![HashMap::new(); num_users_raw];
    for r in &log.ratings {
        let entry = per_user[r.user_id].entry(r.item_id).or_insert(r.timestamp);
        if r.timestamp > *entry {
            *entry = r.timestamp;
        }
    }
    let kept_users: Vec<usize> = (0..num_users_raw)
        .filter(|&u| per_user[u].len() >= min_interactions)
        .collect();
    if kept_users.is_empty() {
        return Err(DataError::EmptyDataset(
            "no user meets the minimum interaction count".into(),
        ));
    }
    let mut item_remap: HashMap<usize, usize> = HashMap::new();
    let mut interactions = Vec::with_capacity(kept_users.len());
    for &u in &kept_users {
        let mut items: Vec<(usize, i64)> = per_user[u].iter().map(|(&i, &t)| (i, t)).collect();
        // deterministic remap: items appear in (timestamp, item) order
        items.sort_by_key(|&(i, t)| (t, i));
        let items: Vec<(usize, i64)> = items
            .into_iter()
            .map(|(i, t)| {
                let len = item_remap.len();
                (*item_remap.entry(i).or_insert(len), t)
            })
            .collect();
        interactions.push(items);
    }
    Ok(Dataset {
        num_users: kept_users.len(),
        num_items: item_remap.len(),
        interactions,
    })
}

/// Leave-one-out split: per user, last interaction by timestamp is the test
/// item, second-to-last is validation, the rest train. Timestamp ties break
/// by larger item id = later.
#[derive(Debug, Clone)]
pub struct InteractionSplit {
    pub num_users: usize,
    pub num_items: usize,
    /// per-user train items in time order
    pub train: Vec<Vec<usize>>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
    /// per-user sorted set of all positives (train + val + test)
    positives: Vec<Vec<usize>>,
}

impl InteractionSplit {
    /// Sorted list of every item the user interacted with.
    pub fn positives(&self, user: usize) -> &[usize] {
        &self.positives[user]
    }

    pub fn is_positive(&self, user: usize, item: usize) -> bool {
        self.positives[user].binary_search(&item).is_ok()
    }

    pub fn train_count(&self, user: usize) -> usize {
        self.train[user].len()
    }

    /// JSON-lines audit dump: one `{user, train, val, test}` object per user.
    pub fn write_jsonl(&self, path: &Path) -> Result<(), DataError> {
        #[derive(Serialize)]
        struct Row<'a> {
            user: usize,
            train: &'a [usize],
            val: usize,
            test: usize,
        }
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        for u in 0..self.num_users {
            let row = Row {
                user: u,
                train: &self.train[u],
                val: self.validation[u],
                test: self.test[u],
            };
            writeln!(out, "{}", serde_json::to_string(&row).unwrap())?;
        }
        Ok(())
    }
}

pub fn leave_one_out(dataset: &Dataset) -> Result<InteractionSplit, DataError> {
    let mut train = Vec::with_capacity(dataset.num_users);
    let mut validation = Vec::with_capacity(dataset.num_users);
    let mut test = Vec::with_capacity(dataset.num_users);
    let mut positives = Vec::with_capacity(dataset.num_users);
    for (u, items) in dataset.interactions.iter().enumerate() {
        if items.len() < 3 {
            return Err(DataError::SplitTooFew {
                user: u,
                count: items.len(),
            });
        }
        let mut ordered = items.clone();
        ordered.sort_by_key(|&(i, t)| (t, i));
        let (test_item, _) = ordered[ordered.len() - 1];
        let (val_item, _) = ordered[ordered.len() - 2];
        let train_items: Vec<usize> = ordered[..ordered.len() - 2]
            .iter()
            .map(|&(i, _)| i)
            .collect();
        let mut pos: Vec<usize> = ordered.iter().map(|&(i, _)| i).collect();
        pos.sort_unstable();
        train.push(train_items);
        validation.push(val_item);
        test.push(test_item);
        positives.push(pos);
    }
    Ok(InteractionSplit {
        num_users: dataset.num_users,
        num_items: dataset.num_items,
        train,
        validation,
        test,
        positives,
    })
}

/// Per train positive, `ratio` distinct negatives uniform over the user's
/// non-interacted items. Negatives for positive i occupy the slice
/// `[i*ratio, (i+1)*ratio)`. Returns the warning flag set when the candidate
/// pool was smaller than `ratio` and sampling fell back to replacement.
pub fn sample_train_negatives<R: Rng>(
    split: &InteractionSplit,
    user: usize,
    ratio: usize,
    rng: &mut R,
) -> (Vec<usize>, bool) {
    let num_pos = split.train[user].len();
    if ratio == 0 || num_pos == 0 {
        return (Vec::new(), false);
    }
    let pool = split.num_items - split.positives[user].len();
    let with_replacement = pool < ratio;
    let mut out = Vec::with_capacity(num_pos * ratio);
    let mut chosen: HashSet<usize> = HashSet::new();
    for _ in 0..num_pos {
        chosen.clear();
        for _ in 0..ratio {
            loop {
                let item = rng.gen_range(0..split.num_items);
                if split.is_positive(user, item) {
                    continue;
                }
                if !with_replacement && chosen.contains(&item) {
                    continue;
                }
                chosen.insert(item);
                out.push(item);
                break;
            }
        }
    }
    (out, with_replacement)
}

/// `k` distinct non-interacted items, used as fixed evaluation negatives.
pub fn sample_eval_negatives<R: Rng>(
    split: &InteractionSplit,
    user: usize,
    k: usize,
    rng: &mut R,
) -> Result<Vec<usize>, DataError> {
    let pool = split.num_items - split.positives[user].len();
    if pool < k {
        return Err(DataError::EvalPoolTooSmall {
            user,
            needed: k,
            available: pool,
        });
    }
    let mut chosen: HashSet<usize> = HashSet::with_capacity(k);
    let mut out = Vec::with_capacity(k);
    while out.len() < k {
        let item = rng.gen_range(0..split.num_items);
        if split.is_positive(user, item) || chosen.contains(&item) {
            continue;
        }
        chosen.insert(item);
        out.push(item);
    }
    Ok(out)
}

/// Write ratings back out in a parseable format (used by tests and the
/// synthetic-data examples).
pub fn write_ratings(
    ratings: &[RawRating],
    format: RatingsFormat,
    path: &Path,
) -> Result<(), DataError> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for r in ratings {
        match format {
            RatingsFormat::Tab => writeln!(
                out,
                "{}\t{}\t{}\t{}",
                r.user_id + 1,
                r.item_id + 1,
                r.rating,
                r.timestamp
            )?,
            RatingsFormat::DoubleColon => writeln!(
                out,
                "{}::{}::{}::{}",
                r.user_id + 1,
                r.item_id + 1,
                r.rating,
                r.timestamp
            )?,
        }
    }
    Ok(())
}

pub mod synthetic {
    //! Planted low-rank interaction generator for desk-scale experiments.

    use super::{Dataset, RawRating};
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    /// Users and items live in a `latent_dim`-dimensional preference space;
    /// each user interacts with their top-scoring items plus exploration
    /// noise, stamped with increasing timestamps.
    pub fn ratings(
        num_users: usize,
        num_items: usize,
        latent_dim: usize,
        interactions_per_user: usize,
        seed: u64,
    ) -> Vec<RawRating> {
        assert!(interactions_per_user <= num_items);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let user_factors: Vec<Vec<f64>> = (0..num_users)
            .map(|_| (0..latent_dim).map(|_| normal.sample(&mut rng)).collect())
            .collect();
        let item_factors: Vec<Vec<f64>> = (0..num_items)
            .map(|_| (0..latent_dim).map(|_| normal.sample(&mut rng)).collect())
            .collect();
        let mut out = Vec::new();
        for (u, uf) in user_factors.iter().enumerate() {
            let mut scored: Vec<(usize, f64)> = item_factors
                .iter()
                .enumerate()
                .map(|(i, itf)| {
                    let dot: f64 = uf.iter().zip(itf).map(|(a, b)| a * b).sum();
                    (i, dot + normal.sample(&mut rng) * 0.5)
                })
                .collect();
            scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
            let mut picked: Vec<usize> =
                scored[..interactions_per_user].iter().map(|&(i, _)| i).collect();
            picked.shuffle(&mut rng);
            for (t, &item) in picked.iter().enumerate() {
                out.push(RawRating {
                    user_id: u,
                    item_id: item,
                    rating: rng.gen_range(1..=5) as f64,
                    timestamp: (u * 10_000 + t) as i64,
                });
            }
        }
        out
    }

    /// Convenience: generator output straight to a `Dataset`.
    pub fn dataset(
        num_users: usize,
        num_items: usize,
        latent_dim: usize,
        interactions_per_user: usize,
        seed: u64,
    ) -> Dataset {
        let ratings = ratings(num_users, num_items, latent_dim, interactions_per_user, seed);
        let log = super::RatingLog {
            user_ids: (0..num_users as u64).collect(),
            item_ids: (0..num_items as u64).collect(),
            ratings,
        };
        super::to_implicit(&log, 1).expect("synthetic dataset is never empty")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn load_tab_format() {
        let f = write_temp("1\t50\t5\t881250949\n2\t13\t3\t881250950\n");
        let log = load_ratings(f.path(), RatingsFormat::Tab).unwrap();
        assert_eq!(log.ratings.len(), 2);
        assert_eq!(
            log.ratings[0],
            RawRating {
                user_id: 0,
                item_id: 0,
                rating: 5.0,
                timestamp: 881250949
            }
        );
        assert_eq!(log.user_ids, vec![1, 2]);
        assert_eq!(log.item_ids, vec![50, 13]);
    }

    #[test]
    fn load_double_colon_format() {
        let f = write_temp("1::1193::5::978300760\n");
        let log = load_ratings(f.path(), RatingsFormat::DoubleColon).unwrap();
        assert_eq!(log.ratings[0].rating, 5.0);
        assert_eq!(log.item_ids, vec![1193]);
    }

    #[test]
    fn load_wrong_delimiter_is_parse_error() {
        let f = write_temp("1,50,5\n");
        match load_ratings(f.path(), RatingsFormat::Tab) {
            Err(DataError::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn load_empty_file_is_error() {
        let f = write_temp("");
        assert!(matches!(
            load_ratings(f.path(), RatingsFormat::Tab),
            Err(DataError::EmptyDataset(_))
        ));
    }

    fn log_from(ratings: Vec<RawRating>) -> RatingLog {
        let users = ratings.iter().map(|r| r.user_id).max().unwrap() + 1;
        let items = ratings.iter().map(|r| r.item_id).max().unwrap() + 1;
        RatingLog {
            ratings,
            user_ids: (0..users as u64).collect(),
            item_ids: (0..items as u64).collect(),
        }
    }

    fn rating(user_id: usize, item_id: usize, timestamp: i64) -> RawRating {
        RawRating {
            user_id,
            item_id,
            rating: 4.0,
            timestamp,
        }
    }

    #[test]
    fn to_implicit_filters_sparse_users() {
        let mut ratings = Vec::new();
        for i in 0..5 {
            ratings.push(rating(0, i, i as i64));
        }
        for i in 0..3 {
            ratings.push(rating(1, i, i as i64));
        }
        let ds = to_implicit(&log_from(ratings), 5).unwrap();
        assert_eq!(ds.num_users, 1);
        assert_eq!(ds.num_positives(), 5);
    }

    #[test]
    fn to_implicit_dedups_keeping_latest() {
        let ratings = vec![
            rating(0, 7, 10),
            rating(0, 7, 99),
            rating(0, 1, 5),
            rating(0, 2, 6),
        ];
        let ds = to_implicit(&log_from(ratings), 1).unwrap();
        assert_eq!(ds.num_positives(), 3);
        let seven = ds.interactions[0]
            .iter()
            .max_by_key(|&&(_, t)| t)
            .unwrap();
        assert_eq!(seven.1, 99);
    }

    #[test]
    fn to_implicit_all_filtered_is_error() {
        let ratings = vec![rating(0, 1, 1)];
        assert!(matches!(
            to_implicit(&log_from(ratings), 5),
            Err(DataError::EmptyDataset(_))
        ));
    }

    #[test]
    fn to_implicit_redensifies_item_ids() {
        let ratings = vec![rating(0, 100, 1), rating(0, 200, 2), rating(0, 300, 3)];
        let log = RatingLog {
            user_ids: vec![0],
            item_ids: (0..301).collect(),
            ratings,
        };
        let ds = to_implicit(&log, 1).unwrap();
        assert_eq!(ds.num_items, 3);
        let mut ids: Vec<usize> = ds.interactions[0].iter().map(|&(i, _)| i).collect();
        ids.sort_unstable();
        assert_eq!(ids, vec![0, 1, 2]);
    }

    #[test]
    fn leave_one_out_basic_ordering() {
        let ds = Dataset {
            num_users: 1,
            num_items: 3,
            interactions: vec![vec![(0, 1), (1, 2), (2, 3)]],
        };
        let split = leave_one_out(&ds).unwrap();
        assert_eq!(split.train[0], vec![0]);
        assert_eq!(split.validation[0], 1);
        assert_eq!(split.test[0], 2);
    }

    #[test]
    fn leave_one_out_five_items_leaves_three_in_train() {
        let ds = Dataset {
            num_users: 1,
            num_items: 5,
            interactions: vec![(0..5).map(|i| (i, i as i64)).collect()],
        };
        let split = leave_one_out(&ds).unwrap();
        assert_eq!(split.train[0].len(), 3);
    }

    #[test]
    fn leave_one_out_timestamp_tie_breaks_by_item_id() {
        let ds = Dataset {
            num_users: 1,
            num_items: 4,
            interactions: vec![vec![(3, 7), (1, 7), (0, 1), (2, 2)]],
        };
        let split = leave_one_out(&ds).unwrap();
        assert_eq!(split.test[0], 3);
        assert_eq!(split.validation[0], 1);
    }

    #[test]
    fn leave_one_out_too_few_is_error() {
        let ds = Dataset {
            num_users: 1,
            num_items: 2,
            interactions: vec![vec![(0, 1), (1, 2)]],
        };
        assert!(matches!(
            leave_one_out(&ds),
            Err(DataError::SplitTooFew { user: 0, count: 2 })
        ));
    }

    fn toy_split() -> InteractionSplit {
        let ds = synthetic::dataset(8, 50, 4, 12, 3);
        leave_one_out(&ds).unwrap()
    }

    #[test]
    fn train_negatives_avoid_positives_and_count() {
        let split = toy_split();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (negs, warned) = sample_train_negatives(&split, 0, 4, &mut rng);
        assert!(!warned);
        assert_eq!(negs.len(), split.train[0].len() * 4);
        for &n in &negs {
            assert!(!split.is_positive(0, n));
        }
        // distinct within each positive's group
        for group in negs.chunks(4) {
            let mut g = group.to_vec();
            g.sort_unstable();
            g.dedup();
            assert_eq!(g.len(), 4);
        }
    }

    #[test]
    fn train_negatives_ratio_zero_is_empty() {
        let split = toy_split();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (negs, _) = sample_train_negatives(&split, 0, 0, &mut rng);
        assert!(negs.is_empty());
    }

    #[test]
    fn train_negatives_deterministic_under_seed() {
        let split = toy_split();
        let mut a = ChaCha8Rng::seed_from_u64(9);
        let mut b = ChaCha8Rng::seed_from_u64(9);
        assert_eq!(
            sample_train_negatives(&split, 2, 4, &mut a),
            sample_train_negatives(&split, 2, 4, &mut b)
        );
    }

    #[test]
    fn train_negatives_small_pool_falls_back_to_replacement() {
        let ds = Dataset {
            num_users: 1,
            num_items: 5,
            interactions: vec![(0..4).map(|i| (i, i as i64)).collect()],
        };
        let split = leave_one_out(&ds).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        // pool = 1 non-interacted item but ratio 3
        let (negs, warned) = sample_train_negatives(&split, 0, 3, &mut rng);
        assert!(warned);
        assert_eq!(negs.len(), split.train[0].len() * 3);
        assert!(negs.iter().all(|&n| n == 4));
    }

    #[test]
    fn eval_negatives_disjoint_and_deterministic() {
        let split = toy_split();
        let mut a = ChaCha8Rng::seed_from_u64(5);
        let negs = sample_eval_negatives(&split, 1, 30, &mut a).unwrap();
        assert_eq!(negs.len(), 30);
        let mut sorted = negs.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 30);
        for &n in &negs {
            assert!(!split.is_positive(1, n));
        }
        let mut b = ChaCha8Rng::seed_from_u64(5);
        assert_eq!(negs, sample_eval_negatives(&split, 1, 30, &mut b).unwrap());
    }

    #[test]
    fn eval_negatives_zero_k_is_empty() {
        let split = toy_split();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert!(sample_eval_negatives(&split, 0, 0, &mut rng)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn eval_negatives_pool_too_small_names_user() {
        let ds = Dataset {
            num_users: 1,
            num_items: 5,
            interactions: vec![(0..4).map(|i| (i, i as i64)).collect()],
        };
        let split = leave_one_out(&ds).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        match sample_eval_negatives(&split, 0, 99, &mut rng) {
            Err(DataError::EvalPoolTooSmall { user: 0, .. }) => {}
            other => panic!("expected pool error, got {other:?}"),
        }
    }

    #[test]
    fn split_partitions_positive_set() {
        let split = toy_split();
        for u in 0..split.num_users {
            let mut all = split.train[u].clone();
            all.push(split.validation[u]);
            all.push(split.test[u]);
            all.sort_unstable();
            let dedup_len = {
                let mut d = all.clone();
                d.dedup();
                d.len()
            };
            assert_eq!(dedup_len, all.len(), "overlap within split of user {u}");
            assert_eq!(all, split.positives(u));
        }
    }

    #[test]
    fn ratings_roundtrip_through_file() {
        let ratings = synthetic::ratings(5, 30, 4, 8, 11);
        let f = tempfile::NamedTempFile::new().unwrap();
        write_ratings(&ratings, RatingsFormat::Tab, f.path()).unwrap();
        let log = load_ratings(f.path(), RatingsFormat::Tab).unwrap();
        assert_eq!(log.ratings.len(), ratings.len());
    }
}
