//! Free energies of the replica states of one ladder from the kernel
//! sufficient statistics, with bootstrap errors.

use ggpa::doublewell::{re_ladder_free_energies, DoubleWellParams};
use ggpa::schedule::NoiseSchedule;

fn main() -> ggpa::Result<()> {
    let times = [0.1, 0.2, 0.4, 0.8];
    let (f, se) = re_ladder_free_energies(&DoubleWellParams::default(), &NoiseSchedule::default(), &times, 0.1, 6000, 0.2, 4)?;
    for ((t, f), se) in times.iter().zip(&f).zip(&se) {
        println!("t = {t:<4} f = {f:+.4} ± {se:.4}");
    }
    Ok(())
}
