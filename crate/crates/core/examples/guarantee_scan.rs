//! Success probability of saturated-schedule runs for every splitting of
//! n <= 4 qubits. `!` marks runs below 1 - eps^2 - 0.01.
//!
//!     cargo run --release --example guarantee_scan [steps_per_unit_time]

use adia_core::dynamics::{evolve, Drive};
use adia_core::problem::all_splittings;
use adia_core::runtime::optimal_schedule;
use adia_core::{MarkedState, Precision, Schedule};

fn main() {
    let steps: f64 = std::env::args()
        .nth(1)
        .map(|s| s.parse().unwrap())
        .unwrap_or(50.0);
    for n in 1..=4 {
        for split in all_splittings(n) {
            let mut line = format!("{:?}", split.parts());
            for eps in [0.4, 0.2, 0.1, 0.05] {
                let p = Precision::new(eps, 1e-10, steps).unwrap();
                let s = optimal_schedule(&split, &Schedule::linear(), &p, 1001).unwrap();
                let r = evolve(&split, &MarkedState::zeros(n), &Drive::saturated(s), &p).unwrap();
                let ok = r.success_probability >= 1.0 - eps * eps - 0.01;
                line += &format!(
                    "  eps={eps}: p={:.5}{}",
                    r.success_probability,
                    if ok { "" } else { "!" }
                );
            }
            println!("{line}");
        }
    }
}
