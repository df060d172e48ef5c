use censar::mcem::FitConfig;
use censar::simlab::{run_study, Dgp, DgpConfig};

fn main() {
    let reps: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    let cap: usize = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(5000);
    let cfg = DgpConfig { replications: reps, seed: 555, ..DgpConfig::default() };
    let fit_cfg = FitConfig { tol: 1e-3, max_iter: 60, mc_cap: cap, ..FitConfig::default() };
    let rep = run_study(&cfg, Dgp::Dgp1, &fit_cfg).unwrap();
    let (mut sx, mut sy, mut sxx, mut sxy, mut m) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for r in &rep.records {
        let (mut rsx, mut rsy, mut rm) = (0.0, 0.0, 0.0);
        for &(t, i) in &r.imputation {
            sx += t; sy += i; sxx += t * t; sxy += t * i; m += 1.0;
            rsx += t; rsy += i; rm += 1.0;
        }
        let srho: f64 = r.rho_hat.iter().sum();
        println!("rep {}: offset {:+.3}  sum(rho_hat)-0.6 = {:+.4}", r.rep, rsy/rm - rsx/rm, srho - 0.6);
    }
    let slope = (sxy - sx * sy / m) / (sxx - sx * sx / m);
    let intercept = sy / m - slope * sx / m;
    println!("pooled: mean_true {:.3} mean_imp {:.3} offset {:+.4}", sx/m, sy/m, sy/m - sx/m);
    println!("pooled regression: slope {:.4} intercept {:+.4}", slope, intercept);
}
