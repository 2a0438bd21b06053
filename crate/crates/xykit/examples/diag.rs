use xykit::pulsesim::*;
use xykit::decomp::*;
use xykit::qcore::*;
use std::f64::consts::{TAU, PI};
use std::time::Instant;
fn main() {
    let transmon = TunableTransmon::from_flux_curve(4.759e9, 0.767e9).unwrap();
    let phi_ac = 2.0;
    let probe = CoupledPair::new(1.0e6, 4.0e9, transmon.clone(), -2).unwrap();
    let f_fixed = (probe.omega_zero(phi_ac) - 2.0*TAU*200e6)/TAU;
    for g in [0.25e6, 0.4e6] {
        let t0 = Instant::now();
        let pair = CoupledPair::new(g, f_fixed, transmon.clone(), -2).unwrap();
        let t_rise = 10e-9;
        let eps = 0.1827;
        let tau = 0.25/(2.0*g*eps);
        let template = FluxPulse::new(phi_ac, TAU*200e6, 0.0, t_rise, tau).unwrap();
        let bound = bind_half_pulse(&pair, &template).unwrap();
        let bind_t = t0.elapsed().as_secs_f64();
        let mut worst: f64 = 0.0;
        let mut rng = xykit::rng::Streams::new(23).stream(0);
        use rand::Rng;
        for _ in 0..4 {
            let theta = rng.gen_range(0.0..2.0*PI);
            let beta = rng.gen_range(-PI..PI);
            let program = decompose_xy(theta, beta);
            let ideal = reconstruct(&program).unwrap();
            let real = reconstruct_with_pulsesim(&program, &pair, &bound).unwrap();
            worst = worst.max(distance_global_phase(&ideal, &real).unwrap());
        }
        println!("g = {:.2} MHz: bind {:.1}s, worst composite dist {:.2e}", g/1e6, bind_t, worst);
    }
}
