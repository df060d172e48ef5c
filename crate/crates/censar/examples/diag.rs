use censar::mcem::{fit, tobit_init, FitConfig};
use censar::net::build_weights;
use censar::simlab::{gen_dgp1, DgpConfig};

fn main() {
    let cfg = DgpConfig { replications: 8, ..DgpConfig::default() };
    let ws = build_weights(cfg.n).unwrap();
    let mut d = vec![Vec::new(); 3];
    for rep in 0..8u64 {
        let (data, _) = gen_dgp1(&cfg, censar::derive_seed(77, &[rep])).unwrap();
        let init = tobit_init(&data, &ws).unwrap();
        println!("rep {rep}: rho0 = {:?} beta0[0..2] = {:?} s2 = {:.3} fallback={} clipped={}",
            init.theta.rho.to_vec(), &init.theta.beta.to_vec()[..2], init.theta.sigma2, init.fallback, init.clipped);
        for k in 0..3 { d[k].push((init.theta.rho[k] - cfg.rho_true[k]).abs()); }
    }
    for k in 0..3 {
        let mut v = d[k].clone();
        v.sort_by(f64::total_cmp);
        println!("component {k}: median dist {:.3}", v[v.len()/2]);
    }
    // One full fit to check end-to-end recovery
    let t0 = std::time::Instant::now();
    let (data, _) = gen_dgp1(&cfg, censar::derive_seed(77, &[0])).unwrap();
    let fit_cfg = FitConfig { tol: 1e-3, max_iter: 60, ..FitConfig::default() };
    let res = fit(&data, &ws, &fit_cfg, 42).unwrap();
    println!("fit: converged={} iters={} rho={:?}", res.converged, res.em_iterations, res.theta.rho.to_vec());
    println!("    beta={:?}", res.theta.beta.to_vec());
    println!("    sigma2={:.4}  elapsed={:?}", res.theta.sigma2, t0.elapsed());
    for (i, rec) in res.trace.iter().enumerate() {
        if i < 5 || i + 3 > res.trace.len() {
            println!("  iter {i}: rho={:?} d2={:.2e} draws={}", rec.theta.rho.to_vec(), rec.squared_change, rec.draws);
        }
    }
}
