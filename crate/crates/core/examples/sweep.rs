//! Compare both schemes over a range of seeds and print one line per seed.
//!
//! `cargo run --release --example sweep -- [first_seed] [count] [config.json]`

use std::time::Instant;

use fapsim_core::{compare, ScenarioConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().collect();
    let first: u64 = args.get(1).map_or(Ok(1), |s| s.parse())?;
    let count: u64 = args.get(2).map_or(Ok(10), |s| s.parse())?;
    let base = match args.get(3) {
        Some(path) => ScenarioConfig::from_json(&std::fs::read_to_string(path)?)?,
        None => ScenarioConfig::default(),
    };
    println!("seed  dep_fap dep_prop  adj_fap_j  adj_prop_j  impr_pct  net_fap_j  net_prop_j  maxfwd_fap maxfwd_prop  secs");
    let mut impr = Vec::new();
    for seed in first..first + count {
        let cfg = ScenarioConfig { seed, ..base.clone() };
        let t = Instant::now();
        let c = compare(&cfg)?;
        let (f, p) = (&c.fap_only, &c.proposed);
        impr.push(c.improvement_pct());
        println!(
            "{seed:>4}  {:>7} {:>8}  {:>9.4}  {:>10.4}  {:>8.2}  {:>9.3}  {:>10.3}  {:>10} {:>11}  {:.1}",
            f.depleted_count(),
            p.depleted_count(),
            f.bs_adjacent_mean_residual_j(),
            p.bs_adjacent_mean_residual_j(),
            c.improvement_pct(),
            f.sensor_consumption().joules(),
            p.sensor_consumption().joules(),
            f.burst_max_forward.iter().max().unwrap_or(&0),
            p.burst_max_forward.iter().max().unwrap_or(&0),
            t.elapsed().as_secs_f64()
        );
        eprintln!("  fap {:?}\n  prop {:?}", f.stats, p.stats);
    }
    println!("mean improvement {:.2}%", impr.iter().sum::<f64>() / impr.len() as f64);
    Ok(())
}
