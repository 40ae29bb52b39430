use mzo::diagnostics::linear_fit_r2;
use mzo::experiment::{run_grid, ExperimentConfig};

fn main() {
    let mut cfg = ExperimentConfig::default();
    cfg.replications = 50;
    cfg.seed = 41;
    let t0 = std::time::Instant::now();
    let cells = run_grid(&cfg).unwrap();
    println!("grid took {:.1}s", t0.elapsed().as_secs_f64());

    for &sigma2 in &cfg.sigma2s {
        println!("== sigma2 = {sigma2}");
        // table: rows d, cols tau
        print!("{:>6}", "d\\tau");
        for &tau in &cfg.taus { print!("{tau:>11}"); }
        println!();
        for &d in &cfg.dims {
            print!("{d:>6}");
            let mut row = Vec::new();
            for &tau in &cfg.taus {
                let c = cells.iter().find(|c| c.d == d && c.tau == tau && c.sigma2 == sigma2).unwrap();
                print!("{:>11.3e}", c.mean_error);
                row.push(c.mean_error);
            }
            let mn = row.iter().cloned().fold(f64::INFINITY, f64::min);
            let mx = row.iter().cloned().fold(0.0f64, f64::max);
            let mean = row.iter().sum::<f64>() / row.len() as f64;
            println!("   spread={:.1}%", 100.0 * (mx - mn) / mean);
        }
        // R^2 comparison
        let slice: Vec<_> = cells.iter().filter(|c| c.sigma2 == sigma2).collect();
        let sum_feat: Vec<f64> = slice.iter().map(|c| (c.d as f64) + (c.tau as f64)).collect();
        let prod_feat: Vec<f64> = slice.iter().map(|c| (c.d as f64) * (c.tau as f64)).collect();
        let ys: Vec<f64> = slice.iter().map(|c| c.mean_error).collect();
        let (_, _, r2_sum) = linear_fit_r2(&sum_feat, &ys);
        let (_, _, r2_prod) = linear_fit_r2(&prod_feat, &ys);
        println!("R2(d+tau) = {r2_sum:.4}, R2(d*tau) = {r2_prod:.4}");
    }
}
