//! Diffusion-time replica exchange with the context frozen at the production
//! time: basin hopping at t = 0.1 with and without the ladder.

use ggpa::context::ContextMode;
use ggpa::doublewell::{batch_metrics, ground_truth_marginal, run_fixed_t_chains, run_re_chains, DoubleWellParams};
use ggpa::schedule::NoiseSchedule;

fn main() -> ggpa::Result<()> {
    let params = DoubleWellParams::default();
    let sched = NoiseSchedule::default();
    let truth = ground_truth_marginal(&params, 2048)?;
    let (n_chains, n_sweeps) = (32, 5000);

    let fixed = run_fixed_t_chains(&params, &sched, 0.1, ContextMode::Annealed { anchor_t: 0.1 }, n_chains, n_sweeps, 0.3, 2)?;
    let f = batch_metrics(&fixed, &truth, 4)?;
    let (ladder, swaps) = run_re_chains(&params, &sched, &[0.1, 0.2, 0.4, 0.8], 0.1, n_chains, n_sweeps, 0.3, 3)?;
    let r = batch_metrics(&ladder, &truth, 4)?;

    println!("fixed t = 0.1: JS {:.2e}, IAT {:.1}", f.js_clean, f.iat);
    println!("ladder:        JS {:.2e}, IAT {:.1}", r.js_clean, r.iat);
    for s in swaps {
        println!("  swap {}<->{}: {:.2}", s.pair_lo, s.pair_hi, s.rate);
    }
    Ok(())
}
