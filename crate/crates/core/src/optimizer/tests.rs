use super::*;
use crate::quadrature::GaussLegendre;
use crate::trajectory::StateVec;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Traj = QuinticTrajectory<f64, 3>;

fn firefly() -> RobotShape<f64> {
    RobotShape::new(0.5, 3.0).unwrap()
}

fn limits() -> Limits<f64> {
    Limits {
        velocity: 2.0,
        acceleration: 8.0,
        jerk: 20.0,
    }
}

fn random_state(rng: &mut ChaCha8Rng, pos: f64, der: f64) -> StateVec<f64, 3> {
    let mut v = |s: f64| [rng.gen_range(-s..s), rng.gen_range(-s..s), rng.gen_range(-s..s)];
    StateVec::new(v(pos), v(der), v(der))
}

fn context(start: StateVec<f64, 3>, goal: [f64; 3], peers: Vec<Peer<f64, 3>>) -> PlanContext<f64, 3> {
    PlanContext {
        start,
        goal,
        shape: firefly(),
        limits: limits(),
        weights: CostWeights::default(),
        peers,
        t_lo: 0.5,
        t_hi: 10.0,
        warm_start: 3.0,
        options: PlanOptions::default(),
    }
}

/// `∫ |f|` on `[a, b]` after splitting at sign changes of `f`, located by
/// dense sampling and bisection, with 256-point Gauss–Legendre per piece.
fn abs_integral_oracle(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let samples = 4000;
    let mut cuts = vec![a];
    let h = (b - a) / samples as f64;
    for k in 0..samples {
        let (mut x0, mut x1) = (a + h * k as f64, a + h * (k + 1) as f64);
        let (f0, f1) = (f(x0), f(x1));
        if f0 == 0.0 || f0.signum() == f1.signum() {
            continue;
        }
        for _ in 0..100 {
            let m = 0.5 * (x0 + x1);
            if f(m).signum() == f0.signum() {
                x0 = m;
            } else {
                x1 = m;
            }
        }
        cuts.push(0.5 * (x0 + x1));
    }
    cuts.push(b);
    let rule = GaussLegendre::<f64>::new(256);
    cuts.windows(2)
        .map(|w| rule.integrate(w[0], w[1], |t| f(t)).abs())
        .sum()
}

fn pointwise_collision_integrand<'a>(
    own: &'a Traj,
    peer: &'a Traj,
    radii: [f64; 3],
    k_p: f64,
) -> impl Fn(f64) -> f64 + 'a {
    move |t| {
        let (a, b) = (own.sample(t), peer.sample(t));
        let mut dd = 0.0;
        let mut d = 0.0;
        for i in 0..3 {
            let r2 = radii[i] * radii[i];
            dd += 2.0 * (a.pos[i] - b.pos[i]) * (a.vel[i] - b.vel[i]) / r2;
            d += (a.pos[i] - b.pos[i]).powi(2) / r2;
        }
        dd * (-k_p * d).exp()
    }
}

#[test]
fn smoothness_zero_cases() {
    let still = Traj::stationary([1.0, 2.0, 3.0], 2.0);
    assert_eq!(smoothness_cost(&still, 1.0), 0.0);
    let x0 = StateVec::at_rest([0.0; 3]);
    let traj = condense(&x0, &StateVec::at_rest([1.0, 0.0, 0.0]), 2.0).unwrap();
    assert_eq!(smoothness_cost(&traj, 0.0), 0.0);
}

#[test]
fn smoothness_matches_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let rule = GaussLegendre::<f64>::new(64);
    for _ in 0..100 {
        let t = rng.gen_range(0.3..6.0);
        let traj = condense(&random_state(&mut rng, 5.0, 2.0), &random_state(&mut rng, 5.0, 2.0), t).unwrap();
        let exact = smoothness_cost(&traj, 1.0);
        let quad = rule.integrate(0.0, t, |s| traj.jerk(s).iter().map(|j| j * j).sum());
        assert!((exact - quad).abs() <= 1e-10 * quad.abs().max(1e-300), "{exact} vs {quad}");
    }
}

#[test]
fn distant_peer_costs_nothing() {
    let own = condense(
        &StateVec::at_rest([0.0; 3]),
        &StateVec::at_rest([1.0, 0.0, 0.0]),
        2.0,
    )
    .unwrap();
    let shape = firefly();
    let sep = 20.0 * 1.0;
    let peer = Peer {
        trajectory: Traj::stationary([0.0, sep + 1.0, 0.0], 0.0),
        shape,
    };
    let w = CostWeights {
        k_p: 1.0,
        ..CostWeights::default()
    };
    for form in [CollisionForm::Variation, CollisionForm::Signed] {
        let opts = PlanOptions {
            collision_form: form,
            prune_below: 0.0,
            ..PlanOptions::default()
        };
        assert!(collision_cost(&own, &shape, &peer, &w, &opts) < 1e-12);
    }
}

#[test]
fn static_pair_costs_nothing() {
    let own = Traj::stationary([0.0; 3], 3.0);
    let peer = Peer {
        trajectory: Traj::stationary([0.3, 0.0, 0.0], 3.0),
        shape: firefly(),
    };
    for form in [
        CollisionForm::Variation,
        CollisionForm::Signed,
        CollisionForm::LiteralQuadrature,
    ] {
        let opts = PlanOptions {
            collision_form: form,
            ..PlanOptions::default()
        };
        let c = collision_cost(&own, &firefly(), &peer, &CostWeights::default(), &opts);
        assert_eq!(c, 0.0, "{form:?}");
    }
}

#[test]
fn head_on_approach_matches_quadrature() {
    let shape = firefly();
    let own = condense(
        &StateVec::at_rest([-3.0, 0.0, 0.0]),
        &StateVec::at_rest([3.0, 0.0, 0.0]),
        4.0,
    )
    .unwrap();
    let peer_traj = condense(
        &StateVec::at_rest([3.0, 0.2, 0.0]),
        &StateVec::at_rest([-3.0, 0.2, 0.0]),
        3.0,
    )
    .unwrap();
    let peer = Peer {
        trajectory: peer_traj,
        shape,
    };
    let w = CostWeights {
        q_obs: 1.0,
        k_p: 1.0,
        ..CostWeights::default()
    };
    let opts = PlanOptions {
        prune_below: 0.0,
        ..PlanOptions::default()
    };
    let radii = combined_radii::<f64, 3>(&shape, &shape);
    let closed = collision_cost(&own, &shape, &peer, &w, &opts);
    let f = pointwise_collision_integrand(&own, &peer_traj, radii, 1.0);
    let quad = abs_integral_oracle(&f, 0.0, 4.0);
    assert!(closed > 0.1);
    assert!((closed - quad).abs() < 1e-6 * quad, "{closed} vs {quad}");

    let signed = PlanOptions {
        collision_form: CollisionForm::Signed,
        ..opts
    };
    let rule = GaussLegendre::<f64>::new(256);
    let q_signed = rule.integrate(0.0, 3.0, &f) + rule.integrate(3.0, 4.0, &f);
    let c_signed = collision_cost(&own, &shape, &peer, &w, &signed);
    assert!((c_signed - q_signed).abs() < 1e-6 * quad);
}

#[test]
fn literal_form_uses_unscaled_numerator() {
    let shape = firefly();
    let own = condense(
        &StateVec::at_rest([-2.0, 0.0, 0.0]),
        &StateVec::at_rest([2.0, 0.0, 0.0]),
        3.0,
    )
    .unwrap();
    let peer = Peer {
        trajectory: Traj::stationary([0.0, 0.5, 0.0], 3.0),
        shape,
    };
    let w = CostWeights {
        q_obs: 1.0,
        k_p: 1.0,
        ..CostWeights::default()
    };
    let opts = PlanOptions {
        collision_form: CollisionForm::LiteralQuadrature,
        ..PlanOptions::default()
    };
    let radii = combined_radii::<f64, 3>(&shape, &shape);
    let rule = GaussLegendre::<f64>::new(256);
    let quad = rule.integrate(0.0, 3.0, |t| {
        let a = own.sample(t);
        let mut num = 0.0;
        let mut d = 0.0;
        for i in 0..3 {
            let dp = a.pos[i] - [0.0, 0.5, 0.0][i];
            num += dp * a.vel[i];
            d += dp * dp / (radii[i] * radii[i]);
        }
        2.0 * num * (-d).exp()
    });
    let lit = collision_cost(&own, &shape, &peer, &w, &opts);
    assert!((lit - quad).abs() < 1e-8 * (1.0 + quad.abs()), "{lit} vs {quad}");
}

#[test]
fn inflation_reduces_separation() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let p = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
        let q = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
        if p == q {
            continue;
        }
        let (x1, x2) = (rng.gen_range(0.0..0.5), rng.gen_range(0.5..1.0));
        let small = combined_radii::<f64, 3>(&firefly().with_pad(x1), &firefly());
        let large = combined_radii::<f64, 3>(&firefly().with_pad(x2), &firefly());
        assert!(scaled_separation(&p, &q, &large) < scaled_separation(&p, &q, &small));
        let r = combined_radii::<f64, 3>(&firefly(), &firefly());
        assert_eq!(scaled_separation(&p, &q, &r), scaled_separation(&q, &p, &r));
    }
}

#[test]
fn limits_huge_tau_is_negligible() {
    let traj = condense(
        &StateVec::at_rest([0.0; 3]),
        &StateVec::at_rest([2.0, 1.0, -1.0]),
        3.0,
    )
    .unwrap();
    let huge = Limits {
        velocity: 100.0,
        acceleration: 100.0,
        jerk: 100.0,
    };
    for form in [LimitForm::Signed, LimitForm::Variation] {
        assert!(limits_cost(&traj, &huge, &CostWeights::default(), form) < 1e-100);
    }
}

#[test]
fn limits_signed_form_telescopes() {
    // Same speed at both ends, rest acceleration at both ends: the signed
    // velocity and acceleration terms vanish, leaving only jerk.
    let v = [1.0, 0.0, 0.0];
    let traj = condense(
        &StateVec::new([0.0; 3], v, [0.0; 3]),
        &StateVec::new([3.0, 1.0, 0.0], [0.0, 1.0, 0.0], [0.0; 3]),
        3.0,
    )
    .unwrap();
    let w = CostWeights::<f64> {
        q_lim: 1.0,
        ..CostWeights::default()
    };
    let no_jerk = Limits {
        velocity: 1.2,
        acceleration: 1.0,
        jerk: 1e3,
    };
    assert!(limits_cost(&traj, &no_jerk, &w, LimitForm::Signed).abs() < 1e-12);
    assert!(limits_cost(&traj, &no_jerk, &w, LimitForm::Variation) > 1e-6);
}

#[test]
fn limits_match_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let rule = GaussLegendre::<f64>::new(256);
    for _ in 0..50 {
        let t = rng.gen_range(0.8..4.0);
        let traj = condense(&random_state(&mut rng, 2.0, 1.0), &random_state(&mut rng, 2.0, 1.0), t).unwrap();
        // Limits at 80% of the sampled peaks and K_p scaled so the exponent
        // spans at most 5: some violation, no clamping, and no boundary
        // layer too thin for the quadrature oracle to resolve.
        let peak = |o: usize| {
            (0..=400)
                .map(|k| traj.eval_order(o, t * k as f64 / 400.0).iter().map(|v| v * v).sum::<f64>())
                .fold(0.0, f64::max)
        };
        let peaks = [peak(1), peak(2), peak(3)];
        let w = CostWeights {
            q_lim: 1.0,
            k_p: 5.0 / peaks.iter().fold(1e-3, |m: f64, p| m.max(*p)),
            ..CostWeights::default()
        };
        let tau = |o: usize| (0.8 * peaks[o - 1]).max(1e-6).sqrt();
        let lim = Limits {
            velocity: tau(1),
            acceleration: tau(2),
            jerk: tau(3),
        };
        let integrand = |s: f64| -> f64 {
            (1..=3)
                .map(|o| {
                    let x = traj.eval_order(o, s);
                    let dx = traj.eval_order(o + 1, s);
                    let n2: f64 = x.iter().map(|v| v * v).sum();
                    let dn2: f64 = 2.0 * x.iter().zip(&dx).map(|(a, b)| a * b).sum::<f64>();
                    dn2 * (w.k_p * (n2 - lim.for_order(o).powi(2))).exp()
                })
                .sum()
        };
        let signed_quad = rule.integrate(0.0, t, integrand);
        let scale = abs_integral_oracle(&integrand, 0.0, t);
        let signed = limits_cost(&traj, &lim, &w, LimitForm::Signed);
        assert!((signed - signed_quad).abs() <= 1e-6 * scale, "{signed} vs {signed_quad}");

        // The variation form integrates |d/dt ‖x‖²| per order.
        let var_quad: f64 = (1..=3)
            .map(|o| {
                let f = |s: f64| {
                    let x = traj.eval_order(o, s);
                    let dx = traj.eval_order(o + 1, s);
                    let n2: f64 = x.iter().map(|v| v * v).sum();
                    let dn2: f64 = 2.0 * x.iter().zip(&dx).map(|(a, b)| a * b).sum::<f64>();
                    dn2 * (w.k_p * (n2 - lim.for_order(o).powi(2))).exp()
                };
                abs_integral_oracle(&f, 0.0, t)
            })
            .sum();
        let var = limits_cost(&traj, &lim, &w, LimitForm::Variation);
        assert!((var - var_quad).abs() <= 1e-6 * var_quad, "{var} vs {var_quad}");
    }
}

#[test]
fn pure_time_cost() {
    let mut ctx = context(StateVec::at_rest([0.0; 3]), [4.0, 0.0, 0.0], vec![]);
    ctx.weights = CostWeights {
        q_dynm: 0.0,
        q_obs: 0.0,
        q_lim: 0.0,
        k_t: 2.0,
        k_p: 10.0,
    };
    let mut last = 0.0;
    for t in [0.5, 1.0, 2.0, 5.0] {
        let c = total_cost(t, &ctx).unwrap();
        assert!((c - 2.0 * t * t).abs() < 1e-12);
        assert!(c > last);
        last = c;
    }
    let out = plan(&ctx).unwrap();
    assert!((out.duration() - ctx.t_lo).abs() < 1e-4);
}

#[test]
fn collision_linear_in_weight() {
    let peer = Peer {
        trajectory: Traj::stationary([2.0, 0.4, 0.0], 5.0),
        shape: firefly(),
    };
    let mut ctx = context(StateVec::at_rest([0.0; 3]), [4.0, 0.0, 0.0], vec![peer]);
    let a = cost_breakdown(3.0, &ctx).unwrap();
    ctx.weights.q_obs *= 2.0;
    let b = cost_breakdown(3.0, &ctx).unwrap();
    assert!(a.collision > 0.0);
    assert!((b.collision - 2.0 * a.collision).abs() < 1e-12 * b.collision);
    assert_eq!(a.smoothness, b.smoothness);
    assert_eq!(a.limits, b.limits);
}

#[test]
fn bracket_collapse_returns_warm_start() {
    let mut ctx = context(StateVec::at_rest([0.0; 3]), [1.0, 0.0, 0.0], vec![]);
    ctx.t_lo = 2.0;
    ctx.t_hi = 2.00001;
    ctx.warm_start = 2.000005;
    let out = plan(&ctx).unwrap();
    assert!(out.collapsed);
    assert_eq!(out.duration(), 2.000005);
    ctx.t_hi = 1.0;
    assert!(matches!(plan(&ctx), Err(Error::BracketCollapse { .. })));
}

fn random_context(rng: &mut ChaCha8Rng) -> PlanContext<f64, 3> {
    let start = random_state(rng, 3.0, 1.0);
    let goal = [rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0), rng.gen_range(-1.0..1.0)];
    let peers = (0..rng.gen_range(0..4))
        .map(|_| {
            let t = rng.gen_range(1.0..6.0);
            let a = random_state(rng, 3.0, 0.5);
            let b = StateVec::at_rest([rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0), 0.0]);
            Peer {
                trajectory: condense(&a, &b, t).unwrap(),
                shape: firefly(),
            }
        })
        .collect();
    let mut ctx = context(start, goal, peers);
    ctx.warm_start = rng.gen_range(ctx.t_lo..ctx.t_hi);
    ctx
}

#[test]
fn plan_matches_dense_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..50 {
        let ctx = random_context(&mut rng);
        let out = plan(&ctx).unwrap();
        let step = (ctx.t_hi - ctx.t_lo) / 2000.0;
        let (mut bt, mut bc) = (ctx.t_lo, f64::INFINITY);
        for k in 0..=2000 {
            let t = ctx.t_lo + step * k as f64;
            let c = total_cost(t, &ctx).unwrap();
            if c < bc {
                (bt, bc) = (t, c);
            }
        }
        assert!(
            (out.duration() - bt).abs() <= step + 1e-9,
            "case {case}: plan {} (cost {}) vs grid {} (cost {})",
            out.duration(),
            out.cost,
            bt,
            bc
        );
    }
}

#[test]
fn plan_is_deterministic_and_exact_at_endpoints() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..10 {
        let ctx = random_context(&mut rng);
        let a = plan(&ctx).unwrap();
        let b = plan(&ctx.clone()).unwrap();
        assert_eq!(a.duration().to_bits(), b.duration().to_bits());
        let (s0, s1) = (a.trajectory.start_state(), a.trajectory.end_state());
        for i in 0..3 {
            assert!((s0.pos[i] - ctx.start.pos[i]).abs() < 1e-9);
            assert!((s0.vel[i] - ctx.start.vel[i]).abs() < 1e-9);
            assert!((s1.pos[i] - ctx.goal[i]).abs() < 1e-9);
            assert!(s1.vel[i].abs() < 1e-9 && s1.acc[i].abs() < 1e-9);
        }
    }
}

proptest! {
    #[test]
    fn variation_cost_matches_quadrature(seed in 0u64..1_000_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t_own = rng.gen_range(1.0..5.0);
        let own = condense(&random_state(&mut rng, 2.0, 1.0), &random_state(&mut rng, 2.0, 0.5), t_own).unwrap();
        let t_peer = rng.gen_range(0.5..6.0);
        let peer_traj = condense(&random_state(&mut rng, 2.0, 1.0), &random_state(&mut rng, 2.0, 0.5), t_peer).unwrap();
        let shape = firefly();
        let k_p = rng.gen_range(0.5..3.0);
        let w = CostWeights { q_obs: 1.0, k_p, ..CostWeights::default() };
        let opts = PlanOptions { prune_below: 0.0, ..PlanOptions::default() };
        let closed = collision_cost(&own, &shape, &Peer { trajectory: peer_traj, shape }, &w, &opts);
        let radii = combined_radii::<f64, 3>(&shape, &shape);
        let f = pointwise_collision_integrand(&own, &peer_traj, radii, k_p);
        let mut cuts = vec![0.0, t_own];
        if t_peer < t_own { cuts.insert(1, t_peer); }
        let quad: f64 = cuts.windows(2).map(|c| abs_integral_oracle(&f, c[0], c[1])).sum();
        prop_assert!((closed - quad).abs() <= 1e-6 * quad.max(1e-12), "{} vs {}", closed, quad);
    }
}

/// A duration-only planner cannot steer sideways, but an initial lateral
/// velocity bends the quintic by an amount that grows with `T`; the barrier
/// must pick a duration that clears a peer sitting on the straight line.
#[test]
fn static_peer_on_the_line_is_cleared() {
    let start = StateVec::new([0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0; 3]);
    let peer_shape = firefly();
    let peer = Peer {
        trajectory: Traj::stationary([3.0, 0.0, 0.0], 0.0),
        shape: peer_shape,
    };
    let radii = combined_radii::<f64, 3>(&firefly(), &peer_shape);
    let min_d = |traj: &Traj| {
        (0..=(traj.duration * 1000.0).ceil() as usize)
            .map(|k| scaled_separation(&traj.position(k as f64 * 1e-3), &[3.0, 0.0, 0.0], &radii))
            .fold(f64::INFINITY, f64::min)
    };
    let mut ctx = context(start, [6.0, 0.0, 0.0], vec![peer]);
    ctx.limits = Limits {
        velocity: 4.0,
        acceleration: 12.0,
        jerk: 60.0,
    };
    ctx.t_lo = 1.0;
    ctx.t_hi = 12.0;

    let mut alone = ctx.clone();
    alone.peers.clear();
    let d_alone = min_d(&plan(&alone).unwrap().trajectory);
    assert!(d_alone < 0.9, "{d_alone}");

    // The library default weights only push the duration part of the way.
    let d_default = min_d(&plan(&ctx).unwrap().trajectory);
    assert!(d_default >= d_alone);

    ctx.weights = crate::sim::swarm_weights();
    let out = plan(&ctx).unwrap();
    let d = min_d(&out.trajectory);
    assert!(d > 1.0 - 0.02, "min d = {d} at T = {}", out.duration());
}
