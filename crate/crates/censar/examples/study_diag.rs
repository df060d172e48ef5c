use censar::mcem::FitConfig;
use censar::simlab::{run_study, Dgp, DgpConfig};

fn main() {
    let which = match std::env::args().nth(1).as_deref() {
        Some("dgp2") => Dgp::Dgp2,
        _ => Dgp::Dgp1,
    };
    let reps: usize = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(10);
    let cfg = DgpConfig { replications: reps, seed: 555, ..DgpConfig::default() };
    let fit_cfg = FitConfig { tol: 1e-3, max_iter: 60, ..FitConfig::default() };
    let t0 = std::time::Instant::now();
    let rep = run_study(&cfg, which, &fit_cfg).unwrap();
    println!("elapsed {:?} for {} reps ({:?})", t0.elapsed(), reps, which);
    println!("rho bias median: {:?}", rep.summary.rho_bias_median);
    println!("rho bias iqr   : {:?}", rep.summary.rho_bias_iqr);
    println!("fpr median {:.4}  tpr median {:?} tpr min {:?} fdr median {:?}",
        rep.summary.fpr_median, rep.summary.tpr_median, rep.summary.tpr_min, rep.summary.fdr_median);
    println!("converged share {:.2}", rep.summary.converged_share);
    let mut slopes = (0.0, 0.0);
    let (mut sx, mut sy, mut sxx, mut sxy, mut m) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for r in &rep.records {
        for &(t, i) in &r.imputation { sx += t; sy += i; sxx += t*t; sxy += t*i; m += 1.0; }
    }
    let slope = (sxy - sx*sy/m) / (sxx - sx*sx/m);
    let intercept = sy/m - slope * sx/m;
    slopes = (slope, intercept);
    println!("imputation slope {:.4} intercept {:.4}", slopes.0, slopes.1);
}
