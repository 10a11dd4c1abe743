//! Sweeps reflected mass and PD gains for a catalog actuator and prints the
//! measured metrics the shipped presets are chosen from.
//!
//! ```text
//! cargo run --release -p sea-core --example tune_presets -- SEA-23-23 200 10 0.1
//! ```
//! Arguments: actuator name, then optional `mass kp kd` to evaluate a single
//! candidate instead of the built-in grid.

use sea_core::analysis::{
    bandwidth_from_points, bode_force_tracking, chatter_experiment, log_frequencies, smallest_resolvable_force,
    BodeOptions, ChatterOptions, ResolutionOptions, SeaSystem,
};
use sea_core::catalog::find_spec;
use sea_core::defaults::{preset_with_tuning, Tuning, SMALL_FORCE_FRACTION};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let name = args.first().map(String::as_str).unwrap_or("SEA-23-23");
    let spec = find_spec(name).expect("unknown actuator");
    let candidates: Vec<Tuning> = if args.len() >= 4 {
        vec![Tuning {
            motor_mass: args[1].parse().unwrap(),
            kp: args[2].parse().unwrap(),
            kd: args[3].parse().unwrap(),
        }]
    } else {
        let mut v = Vec::new();
        for m in [50.0, 100.0, 150.0, 200.0, 250.0] {
            for kp in [5.0, 10.0, 20.0] {
                for kd in [0.05, 0.1, 0.2] {
                    v.push(Tuning { motor_mass: m, kp, kd });
                }
            }
        }
        v
    };
    let small = SMALL_FORCE_FRACTION * spec.continuous_force.si();
    let large = spec.peak_force().si();
    let freqs = log_frequencies(0.5, 200.0, 61);
    println!("mass kp kd | small_bw large_bw | resolution | chatter x1 (ovs, amp) | chatter x100");
    for t in candidates {
        let p = preset_with_tuning(&spec, t);
        let sys = SeaSystem::new(p.plant, p.controller);
        let bw = |a| {
            bode_force_tracking(&sys, a, &freqs, &BodeOptions::default())
                .map_err(|e| e.to_string())
                .and_then(|pts| bandwidth_from_points(&pts).map_err(|e| e.to_string()))
        };
        let res = smallest_resolvable_force(&sys, &ResolutionOptions::default());
        let c1 = chatter_experiment(&sys, 1.0, &ChatterOptions::default());
        let c100 = chatter_experiment(&sys, 100.0, &ChatterOptions::default());
        println!(
            "{} {} {} | {:?} {:?} | {:?} | {:?} | {:?}",
            t.motor_mass,
            t.kp,
            t.kd,
            bw(small),
            bw(large),
            res.map(|r| r.threshold),
            c1.map(|c| (c.overshoot, c.sustained_amplitude)),
            c100.map(|c| (c.chatter, c.sustained_amplitude)),
        );
    }
}
