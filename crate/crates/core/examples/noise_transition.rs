//! Softening along a fixed-anchor lattice ladder: effective couplings and
//! the barrier of the noise-blurred on-site potential.

use ggpa::phi4::noise_transition_analysis;
use ggpa::replica::ReplicaLadder;
use ggpa::phi4::Phi4Adapter;
use ggpa::schedule::NoiseSchedule;

fn main() -> ggpa::Result<()> {
    let times = ReplicaLadder::<Phi4Adapter>::geometric_times(0.1, 0.6, 8);
    println!("{:>7} {:>9} {:>9} {:>9}", "t", "sigma~", "J_eff", "barrier");
    for r in noise_transition_analysis(16, 0.5, 0.1, &times, &NoiseSchedule::default())? {
        println!("{:>7.4} {:>9.4} {:>9.4} {:>9.4}", r.t, r.sigma_tilde, r.j_eff_ir, r.barrier);
    }
    Ok(())
}
