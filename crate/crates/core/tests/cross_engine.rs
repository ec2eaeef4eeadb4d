use specmarkov::sim::run;
use specmarkov::{analyze, ModelParams, PuParams, Scheme, SimConfig, StateClass};

fn config(params: ModelParams, seed: u64) -> SimConfig {
    SimConfig {
        seed,
        ..SimConfig::new(params)
    }
}

#[test]
fn pu_busy_fraction_matches_occupancy() {
    for (p, v) in [(0.05, 0.1), (0.2, 0.3), (0.01, 0.5)] {
        let params = ModelParams {
            pu_arrival: p,
            pu_completion: v,
            ..ModelParams::default()
        };
        let r = run(&config(params, 11)).unwrap();
        let busy = PuParams::new(10, p, v).unwrap().busy_probability();
        for (ch, &slots) in r.channel_busy_slots.iter().enumerate() {
            let frac = slots as f64 / r.counted_slots as f64;
            assert!(
                (frac - busy).abs() < 1e-2,
                "p={p} v={v} channel {ch}: {frac} vs {busy}"
            );
        }
    }
}

#[test]
fn pu_busy_count_histogram_matches_g() {
    let params = ModelParams {
        pu_arrival: 0.05,
        ..ModelParams::default()
    };
    let r = run(&config(params, 5)).unwrap();
    let g = specmarkov::pu::occupancy(&params.pu_params().unwrap()).unwrap();
    for (i, &slots) in r.busy_histogram.iter().enumerate() {
        let frac = slots as f64 / r.counted_slots as f64;
        assert!(
            (frac - g.busy(i)).abs() < 1e-2,
            "{i} busy: {frac} vs {}",
            g.busy(i)
        );
    }
}

#[test]
fn statuses_partition_every_pair() {
    let params = ModelParams {
        pairs: 4,
        su_arrival: 0.6,
        pu_arrival: 0.1,
        ..ModelParams::default()
    };
    let r = run(&config(params, 3)).unwrap();
    for su in &r.per_su {
        assert_eq!(su.total(), r.counted_slots);
    }
    let fractions: f64 = [
        StateClass::Idle,
        StateClass::Transmitting,
        StateClass::Collided,
        StateClass::Backlogged,
    ]
    .iter()
    .map(|&c| r.status_fraction(c))
    .sum();
    assert!((fractions - 1.0).abs() < 1e-12);
}

#[test]
fn delivered_frames_carry_whole_frames() {
    for ts in [3, 10] {
        let params = ModelParams {
            pu_arrival: 0.1,
            sensing_delay: ts,
            ..ModelParams::default()
        };
        let r = run(&config(params, 9)).unwrap();
        let a = &r.aggregate;
        assert_eq!(a.delivered_frames * 10, a.delivered_frame_slots);
        assert_eq!(
            a.transmitting,
            a.delivered_frame_slots + a.aborted_clean_slots + a.boundary_clean_slots
        );
    }
}

#[test]
fn pseudorandom_never_picks_the_same_channel() {
    for p in [0.01, 0.05, 0.1] {
        let params = ModelParams {
            pairs: 6,
            pu_arrival: p,
            scheme: Scheme::PseudoRandom,
            ..ModelParams::default()
        };
        let r = run(&SimConfig {
            slots: 300_000,
            warmup: 10_000,
            ..config(params, 2)
        })
        .unwrap();
        assert!(r.aggregate.selections > 0);
        assert_eq!(r.aggregate.selection_collisions, 0);
        assert_eq!(r.q_hat, 0.0);
    }
}

#[test]
fn identical_seeds_identical_runs() {
    let params = ModelParams {
        pairs: 3,
        pu_arrival: 0.08,
        ..ModelParams::default()
    };
    let cfg = SimConfig {
        slots: 200_000,
        warmup: 1_000,
        ..config(params, 42)
    };
    assert_eq!(run(&cfg).unwrap(), run(&cfg).unwrap());
}

#[test]
fn random_q_matches_simulated_clash_share() {
    // Below saturation, so the two pairs do not run in lock-step.
    let params = ModelParams {
        pairs: 2,
        pu_arrival: 0.02,
        su_arrival: 0.9,
        ..ModelParams::default()
    };
    let q = analyze(&params).unwrap().q;
    let r = run(&SimConfig {
        exclude_su_occupied: false,
        ..config(params, 1)
    })
    .unwrap();
    let rel = (r.q_slot_mean - q).abs() / q;
    println!(
        "analytic q {q:.6}, simulated {:.6}, relative gap {rel:.4}",
        r.q_slot_mean
    );
    assert!(rel <= 0.10, "relative gap {rel}");
}
