//! Random-search hyperparameter tuning with a deterministic trial log,
//! demonstrated on a cheap synthetic objective.
//!
//! ```sh
//! cargo run --example tune_search
//! ```

use assembly_speech::tuner::{random_search, Candidate, SearchSpace};

fn main() -> assembly_speech::Result<()> {
    // the kind of space the segmentation tuner searches: a refractory rate,
    // a similarity threshold, and a discrete peak distance
    let space = SearchSpace::new()
        .real("rho", 0.05, 0.999)
        .real("tau", 0.2, 0.999)
        .int("min_peak_distance", 1, 12);

    // stand-in objective with a known optimum at (rho 0.3, tau 0.76, d 3)
    let objective = |c: &Candidate| {
        let rho = c["rho"].as_f64().unwrap();
        let tau = c["tau"].as_f64().unwrap();
        let d = c["min_peak_distance"].as_i64().unwrap() as f64;
        Ok(1.0 - (rho - 0.3).powi(2) - (tau - 0.76).powi(2) - 0.01 * (d - 3.0).powi(2))
    };

    let result = random_search(&space, objective, 40, 7)?;
    println!("trial  rho    tau    d   score");
    for t in result.trials.iter().take(10) {
        println!(
            "{:>5}  {:.3}  {:.3}  {:>2}  {:.4}",
            t.index,
            t.candidate["rho"].as_f64().unwrap(),
            t.candidate["tau"].as_f64().unwrap(),
            t.candidate["min_peak_distance"].as_i64().unwrap(),
            t.score.unwrap()
        );
    }
    let best = result.best.unwrap();
    println!(
        "... best of {}: trial {} with score {:.4} at {:?}",
        result.trials.len(),
        best.index,
        best.score.unwrap(),
        best.candidate
    );
    Ok(())
}
