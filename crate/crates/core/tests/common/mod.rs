//! Oracles shared by the integration tests.

use phasekit::limit_cycle::{LimitCycle, SectionSpec};
use phasekit::ode::{locate_in_step, StepOptions, Stepper, Tolerance, VectorField};
use std::ops::ControlFlow;

/// Time of the `count`-th qualifying section crossing starting from `x0` at t = 0.
pub fn nth_crossing(vf: &dyn VectorField, x0: &[f64], section: SectionSpec, count: usize) -> f64 {
    let opts = StepOptions {
        tol: Tolerance::new(1e-13, 1e-15),
        max_step: 0.02,
        ..Default::default()
    };
    let mut st = Stepper::new(vf, 0.0, x0, 1.0, opts).unwrap();
    let ev = |x: &[f64]| section.value(x);
    let mut prev = ev(x0);
    let mut seen = 0;
    st.run(1e6, |step| {
        if let Some(e) = locate_in_step(step, &ev, section.direction, prev) {
            if section.side_ok(&e.x) {
                seen += 1;
                if seen == count {
                    return ControlFlow::Break(e.t);
                }
            }
        }
        prev = ev(&step.end());
        ControlFlow::Continue(())
    })
    .unwrap()
    .expect("crossing found")
}

/// Asymptotic time-phase gradient by central differences of the 20th return time.
pub fn fd_prc(vf: &dyn VectorField, lc: &LimitCycle, theta: f64, delta: f64) -> Vec<f64> {
    let x = lc.state_at_phase(theta);
    (0..x.len())
        .map(|c| {
            let mut xp = x.clone();
            xp[c] += delta;
            let tp = nth_crossing(vf, &xp, lc.anchor().section, 20);
            xp[c] = x[c] - delta;
            let tm = nth_crossing(vf, &xp, lc.anchor().section, 20);
            // an earlier arrival is a phase advance
            (tm - tp) / (2.0 * delta)
        })
        .collect()
}
