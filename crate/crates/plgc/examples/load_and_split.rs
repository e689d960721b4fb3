//! Generate a synthetic ratings file, parse it back in the tab-separated
//! format, convert to implicit feedback, and build the leave-one-out split.
//!
//! Run with: cargo run --example load_and_split

use plgc::data::{
    leave_one_out, load_ratings, synthetic, to_implicit, write_ratings, RatingsFormat,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("ratings.tsv");

    let ratings = synthetic::ratings(30, 80, 4, 12, 7);
    write_ratings(&ratings, RatingsFormat::Tab, &path)?;
    println!("wrote {} ratings to {}", ratings.len(), path.display());

    let log = load_ratings(&path, RatingsFormat::Tab)?;
    let dataset = to_implicit(&log, 3)?;
    println!(
        "dataset: {} users x {} items, {} positives, sparsity {:.4}",
        dataset.num_users,
        dataset.num_items,
        dataset.num_positives(),
        dataset.sparsity()
    );

    let split = leave_one_out(&dataset)?;
    for user in 0..3 {
        println!(
            "user {user}: {} train items, validation item {}, test item {}",
            split.train[user].len(),
            split.validation[user],
            split.test[user]
        );
    }

    let audit = dir.path().join("split.jsonl");
    split.write_jsonl(&audit)?;
    println!(
        "split audit dump: {} lines at {}",
        dataset.num_users,
        audit.display()
    );
    Ok(())
}
