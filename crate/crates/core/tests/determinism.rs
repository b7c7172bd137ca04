//! Parallel and sequential execution give bitwise identical results, and
//! everything serialized reads back equal.

use std::f64::consts::FRAC_PI_2;

use sectorial::convergence::{run_convergence, FormSequence};
use sectorial::generators::{example45, random_nonclosable, random_penalization, Example45Config};
use sectorial::relations::m_sectorial_check;
use sectorial::selftest::run_selftest;
use sectorial::semigroups::{semigroup_contour, semigroup_convergence, ContourSpec, SemigroupMode};
use sectorial::{Execution, Tolerance, C64};

fn tol() -> Tolerance {
    Tolerance::default()
}

fn both<T: PartialEq + std::fmt::Debug>(f: impl Fn(Execution) -> T) {
    assert_eq!(f(Execution::Sequential), f(Execution::Parallel));
}

#[test]
fn convergence_reports_do_not_depend_on_execution() {
    let zs = [C64::new(0.0, 1.0), C64::new(0.3, -0.4)];
    for seed in 0..4 {
        let seq = random_penalization(seed, 5, 0.8, 20, &tol()).unwrap();
        both(|exec| serde_json::to_string(&run_convergence(&seq, &zs, Some(&[0.1]), &tol(), exec).unwrap()).unwrap());
    }
    let seq = random_nonclosable(3, 4, 15, false, &tol()).unwrap();
    both(|exec| serde_json::to_string(&run_convergence(&seq, &zs, None, &tol(), exec).unwrap()).unwrap());
}

#[test]
fn semigroups_do_not_depend_on_execution() {
    let seq = random_penalization(9, 4, 0.7, 15, &tol()).unwrap();
    let report = run_convergence(&seq, &[], None, &tol(), Execution::Sequential).unwrap();
    both(|exec| semigroup_convergence(&report, &[0.0, 0.5, 2.0], SemigroupMode::Restricted, &tol(), exec).unwrap().distances);
    let rel = seq.members()[0].associate(&tol()).unwrap();
    let theta = m_sectorial_check(&rel, FRAC_PI_2, &tol()).angle_theta.unwrap();
    let spec = ContourSpec::for_angle(theta);
    both(|exec| semigroup_contour(&rel, 0.3, &spec, &tol(), exec).unwrap());
}

#[test]
fn selftest_transcript_does_not_depend_on_execution() {
    both(|exec| run_selftest(13, 30, exec).transcript());
}

#[test]
fn sequences_round_trip_through_json() {
    let seqs = [
        example45(&Example45Config::new(3, vec![1, 2, 5]).unwrap(), &tol()).unwrap(),
        random_penalization(1, 4, 0.5, 6, &tol()).unwrap(),
        random_nonclosable(2, 4, 6, true, &tol()).unwrap(),
    ];
    for seq in seqs {
        let text = serde_json::to_string(&seq).unwrap();
        let back: FormSequence = serde_json::from_str(&text).unwrap();
        assert_eq!(back, seq);
    }
}
