//! A plastic area presented with a fixed input: the winning assembly
//! stabilises as Hebbian updates entrench the first winners.
//!
//! ```sh
//! cargo run --example assembly_stabilisation
//! ```

use assembly_speech::{Area, AreaConfig, PlasticityRule, SpikeFrame};

fn main() -> assembly_speech::Result<()> {
    let cfg = AreaConfig {
        n: 500,
        k: 50,
        k_in: 50,
        k_in_rec: 100,
        rho: 0.0,
        beta: 0.05,
        rule: PlasticityRule::Hebbian,
        seed: 7,
    };
    let mut area = Area::build(cfg, 100)?;
    let input = SpikeFrame::from_active(100, &(0..30).collect::<Vec<_>>());

    let mut prev = area.step(&input)?;
    println!("step  overlap with previous assembly");
    for step in 1..=20 {
        let a = area.step(&input)?;
        let overlap = a.overlap(&prev) as f64 / 50.0;
        println!("{step:>4}  {overlap:.2}");
        prev = a;
    }
    println!("\nweight checksum: {}", &area.weight_checksum()[..16]);
    Ok(())
}
