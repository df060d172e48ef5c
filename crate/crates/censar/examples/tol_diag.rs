use censar::mcem::FitConfig;
use censar::simlab::{run_study, Dgp, DgpConfig};

fn main() {
    let reps: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(6);
    let tol: f64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(1e-6);
    let cap: usize = std::env::args().nth(3).and_then(|s| s.parse().ok()).unwrap_or(20000);
    let growth: f64 = std::env::args().nth(4).and_then(|s| s.parse().ok()).unwrap_or(1.3);
    let cfg = DgpConfig { replications: reps, seed: 555, ..DgpConfig::default() };
    let fit_cfg = FitConfig { tol, max_iter: 300, mc_cap: cap, mc_growth: growth, ..FitConfig::default() };
    let t0 = std::time::Instant::now();
    let rep = run_study(&cfg, Dgp::Dgp1, &fit_cfg).unwrap();
    let (mut sx, mut sy, mut sxx, mut sxy, mut m) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for r in &rep.records {
        let (mut rsx, mut rsy, mut rm) = (0.0, 0.0, 0.0);
        for &(t, i) in &r.imputation { sx += t; sy += i; sxx += t*t; sxy += t*i; m += 1.0; rsx += t; rsy += i; rm += 1.0; }
        let srho: f64 = r.rho_hat.iter().sum();
        println!("rep {}: offset {:+.3} sum_rho_bias {:+.4} iters {} conv {}", r.rep, rsy/rm - rsx/rm, srho - 0.6, r.em_iterations, r.converged);
    }
    let slope = (sxy - sx*sy/m)/(sxx - sx*sx/m);
    println!("pooled slope {:.4} intercept {:+.4} offset {:+.4}", slope, sy/m - slope*sx/m, sy/m - sx/m);
    println!("rho bias median {:?}", rep.summary.rho_bias_median);
    println!("elapsed {:?}", t0.elapsed());
}
