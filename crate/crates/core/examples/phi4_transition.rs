//! GG-PA against checkerboard Metropolis across the ordering transition of a
//! small lattice.

use ggpa::phi4::{observables, run_ggpa_point, run_mc_point, Phi4Params, Phi4RunConfig};
use ggpa::schedule::NoiseSchedule;

fn main() -> ggpa::Result<()> {
    let cfg = Phi4RunConfig {
        l: 12,
        n_sweeps: 4000,
        mc_equilibration: 2000,
        mc_measurement: 6000,
        target_n_eff: 100.0,
        max_sweeps: 32_000,
        mc_max_measurement: 48_000,
        ..Phi4RunConfig::default()
    };
    let sched = NoiseSchedule::default();
    println!("{:>6} {:>16} {:>16} {:>12} {:>12}", "J", "<|m|> ggpa", "<|m|> mc", "chi ggpa", "chi mc");
    for (i, j) in [0.3, 0.4, 0.45, 0.5, 0.6].into_iter().enumerate() {
        let p = Phi4Params::new(j, 0.0);
        let g = observables(&run_ggpa_point(&cfg, &p, &sched, i as u64)?, cfg.l)?;
        let m = observables(&run_mc_point(&cfg, &p, i as u64)?.0, cfg.l)?;
        println!(
            "{j:>6.3} {:>9.4}±{:.4} {:>9.4}±{:.4} {:>12.2} {:>12.2}",
            g.mean_abs_m, g.se_m, m.mean_abs_m, m.se_m, g.chi, m.chi
        );
    }
    Ok(())
}
