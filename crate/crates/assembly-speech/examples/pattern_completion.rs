//! Sequence recall from partial input: train a recurrent area on a
//! 5-element input sequence, then cue only the first element and let the
//! trained recurrent weights replay the rest.
//!
//! ```sh
//! cargo run --example pattern_completion
//! ```

use assembly_speech::area::k_cap;
use assembly_speech::{Area, AreaConfig, Assembly, PlasticityRule, SpikeFrame};

fn main() -> assembly_speech::Result<()> {
    let (n, k, width) = (500, 50, 200);
    let cfg = AreaConfig {
        n,
        k,
        k_in: 40,
        k_in_rec: 100,
        rho: 0.0,
        beta: 0.1,
        rule: PlasticityRule::Hebbian,
        seed: 21,
    };
    let mut area = Area::build(cfg, width)?;

    // 5 disjoint input patterns of 40 active bits each
    let sequence: Vec<SpikeFrame> = (0..5)
        .map(|i| SpikeFrame::from_active(width, &(i * 40..(i + 1) * 40).collect::<Vec<_>>()))
        .collect();

    for _ in 0..50 {
        area.reset();
        for x in &sequence {
            area.step(x)?;
        }
    }

    // record the trained trajectory
    area.reset();
    let mut trained: Vec<Assembly> = Vec::new();
    for x in &sequence {
        trained.push(area.step(x)?);
    }

    // recall: cue element 0, then zero input; recurrence must carry the chain
    let zero = SpikeFrame::zeros(width);
    let mut current = {
        let drive = area.drive_with(&sequence[0], &Assembly::empty(), None)?;
        k_cap(&drive, k)
    };
    println!("position  overlap(recalled, trained)/k");
    println!("{:>8}  {:.2}", 0, current.overlap(&trained[0]) as f64 / k as f64);
    for (pos, target) in trained.iter().enumerate().skip(1) {
        let drive = area.drive_with(&zero, &current, None)?;
        current = k_cap(&drive, k);
        println!("{:>8}  {:.2}", pos, current.overlap(target) as f64 / k as f64);
    }
    Ok(())
}
