mod common;

use ggpa::context::ContextMode;

#[test]
fn one_sweep_keeps_the_joint_target_annealed() {
    let r = common::pi_t_invariance(0.2, ContextMode::Annealed { anchor_t: 0.2 }, 10_000, 31);
    assert!(r.xs.2 > 0.005, "(x, s): chi2 {} on {} dof, p {}", r.xs.0, r.xs.1, r.xs.2);
    assert!(r.env.2 > 0.005, "x_env: chi2 {} on {} dof, p {}", r.env.0, r.env.1, r.env.2);
}

#[test]
fn one_sweep_keeps_the_joint_target_unannealed() {
    let r = common::pi_t_invariance(0.6, ContextMode::Unannealed, 10_000, 32);
    assert!(r.xs.2 > 0.005, "(x, s): chi2 {} on {} dof, p {}", r.xs.0, r.xs.1, r.xs.2);
    assert!(r.env.2 > 0.005, "x_env: chi2 {} on {} dof, p {}", r.env.0, r.env.1, r.env.2);
}

#[test]
fn two_replica_ladder_is_stationary() {
    let ((stat, dof, p), rate) = common::two_replica_stationarity(8_000, 20, 5);
    assert!(rate > 0.1, "swap rate {rate}");
    assert!(p > 0.01, "chi2 {stat} on {dof} dof, p {p}");
}

#[test]
fn exact_conditionals_match_their_moments() {
    for (name, z) in common::conditional_moment_checks(400_000, 9) {
        assert!(z < 4.0, "{name}: |z| = {z}");
    }
}
