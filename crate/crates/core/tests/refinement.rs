//! Derivative-free refinement of a transport schedule that never brings the
//! wells together.

use holotrap::optctrl::{transport_refinement_hook, RefinementOptions};
use holotrap::propagator::{run_transport, TransportOptions};
use holotrap::pulse::{default_transport_knots, Knot, PulseSchedule};
use holotrap::units::{SpatialGrid, TimeGrid};

#[test]
fn refinement_rescues_a_schedule_without_tunnelling() {
    let t_final = 500.0;
    let (width, knots) = default_transport_knots();
    let far: Vec<Knot> = knots
        .iter()
        .map(|k| Knot::new(k.t, k.depth_right, k.depth_left, 14.0))
        .collect();
    let bad = PulseSchedule::from_fractions(width, t_final, &far).unwrap();
    let grid = SpatialGrid::new(-38.0, 24.0, 512).unwrap();
    let tg = TimeGrid::with_step(t_final, 0.1).unwrap();
    let options = TransportOptions {
        n_out: 20,
        ..TransportOptions::default()
    };
    let fidelity =
        |s: &PulseSchedule| run_transport(s, &grid, &tg, None, &options).map(|r| r.fidelity_moving);
    let before = fidelity(&bad).unwrap();
    let refine = RefinementOptions {
        max_evaluations: 24,
        ..RefinementOptions::default()
    };
    let r = transport_refinement_hook(&bad, &refine, fidelity).unwrap();
    assert_eq!(r.initial_objective, before);
    assert!(r.evaluations <= 24);
    assert!(
        r.objective - before > 0.10,
        "F_M {before} -> {}",
        r.objective
    );
    assert_eq!(fidelity(&r.schedule).unwrap(), r.objective);
}
