//! The tower search against an independent check: a pure prolongation works
//! exactly when the prolonged affine system is static feedback linearizable.

mod common;

use pureflat::classify::{check_static_feedback_linearizable, Verdict};
use pureflat::geometry::SampleSet;
use pureflat::prolong::{orders_of_total, search_minimal_prolongation};

fn linearizable(sys: &pureflat::system::ControlSystem, j: &[usize], s: &SampleSet) -> bool {
    let p = sys.prolonged_affine(j).unwrap();
    check_static_feedback_linearizable(&p, s).unwrap().verdict == Verdict::StaticLinearizable
}

#[test]
fn search_agrees_with_static_feedback_on_prolonged_systems() {
    let s = SampleSet::default();
    for name in common::ALL {
        let sys = common::load(name).system;
        let out = search_minimal_prolongation(&sys, &s, None).unwrap();
        let Some(found) = &out.found else {
            assert!(
                out.accessibility_rank < sys.n(),
                "{name}: no order found on an accessible system"
            );
            continue;
        };
        assert!(
            linearizable(&sys, &found.j.0, &s),
            "{name}: {} fails the oracle",
            found.j
        );
        for total in 0..found.j.total() {
            for j in orders_of_total(sys.m(), total) {
                assert!(!linearizable(&sys, &j.0, &s), "{name}: oracle passes at smaller {j}");
            }
        }
    }
}
