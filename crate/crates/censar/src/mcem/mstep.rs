//! M-step: maximize the profiled objective over `rho` by BFGS with a
//! backtracking line search that rejects infeasible trial points, then
//! recover `beta` and `sigma^2` in closed form.

use ndarray::{Array1, ArrayView1};

use crate::error::{Error, Result};
use crate::mcem::{CensoredNetwork, DesignQr, EStepMoments, ProfileObjective, Theta};
use crate::net::WeightSet;
use crate::optim::{maximize, BfgsOptions};

/// Diagnostics of one M-step.
#[derive(Debug, Clone)]
pub struct MStepOutcome {
    pub theta: Theta,
    /// Profiled objective at the warm start.
    pub q_init: f64,
    /// Profiled objective at the returned `rho`.
    pub q_opt: f64,
    pub bfgs_iterations: usize,
    pub warning: Option<String>,
}

pub fn m_step(
    moments: &EStepMoments,
    data: &CensoredNetwork,
    ws: &WeightSet,
    qr: &DesignQr,
    rho_init: &ArrayView1<f64>,
    fix_rho_zero: bool,
) -> Result<MStepOutcome> {
    let po = ProfileObjective::new(moments, data, ws, qr)?;

    if fix_rho_zero {
        let rho = Array1::zeros(ws.q());
        let q_val = po.value(&rho.view()).ok_or_else(|| {
            Error::Numerical("profiled deviance non-positive at rho = 0".into())
        })?;
        let theta = assemble(&po, &rho)?;
        return Ok(MStepOutcome {
            theta,
            q_init: q_val,
            q_opt: q_val,
            bfgs_iterations: 0,
            warning: None,
        });
    }

    let q_init = po.value(rho_init).ok_or_else(|| Error::InfeasibleRho {
        rho: rho_init.to_vec(),
        reason: "M-step started from an infeasible rho".into(),
    })?;

    let opts = BfgsOptions {
        max_iter: 200,
        // The objective scales with N; so do its gradient components.
        grad_tol: 1e-7 * data.num_edges() as f64,
        step_tol: 1e-12,
        max_halvings: 30,
        armijo_c: 1e-4,
    };
    let out = maximize(
        |rho| po.value(&rho.view()),
        |rho| po.grad(&rho.view()),
        &rho_init.to_owned(),
        &opts,
    );

    let (rho_hat, q_opt, warning) = if !out.value.is_finite() || out.value < q_init - 1e-10 {
        (
            rho_init.to_owned(),
            q_init,
            Some(
                out.warning
                    .unwrap_or_else(|| "no feasible ascent direction; kept warm start".into()),
            ),
        )
    } else {
        (out.x, out.value, out.warning)
    };

    let theta = assemble(&po, &rho_hat)?;
    Ok(MStepOutcome {
        theta,
        q_init,
        q_opt,
        bfgs_iterations: out.iterations,
        warning,
    })
}

fn assemble(po: &ProfileObjective, rho: &Array1<f64>) -> Result<Theta> {
    let beta = po.beta_hat(&rho.view())?;
    let sigma2 = po.sigma2_hat(&rho.view());
    if !(sigma2 > 0.0) {
        return Err(Error::Numerical(format!(
            "profiled sigma2 = {sigma2} is not positive"
        )));
    }
    Ok(Theta {
        rho: rho.clone(),
        beta,
        sigma2,
    })
}
