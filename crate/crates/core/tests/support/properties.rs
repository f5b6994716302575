//! Property checks driven through proptest's runner so the same code backs
//! both the `properties` test target and the acceptance summary.

use std::cell::Cell;
use std::collections::HashMap;

use keba::action::Action;
use keba::engine::dynamics::{adapt_center, adapt_radii, euclidean, membership, update_activation, update_stability};
use keba::engine::{Hierarchy, KebaParams, Koncept, KonceptId, Links, OpenBall, PROTO_COUNT};
use keba::experiments::run_scenario;
use keba::persistence::{load_state, parse_document, save_state, to_json};
use keba::rng::RngStream;
use keba::world::{Locomotion, PhenomenonId, PhenomenonKind, World, WorldParams};
use keba::{AnimatSpec, ControllerKind, ScenarioConfig, Simulation};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

pub type Property = (&'static str, fn(u32) -> Result<(), String>);

pub const PROPERTIES: &[Property] = &[
    ("membership bounds, monotonicity, continuity", membership_shape),
    ("activation convexity", activation_convexity),
    ("activation decays slower at higher levels", activation_level_decay),
    ("stability stays in [0, 1]", stability_bounds),
    ("steady activation reaches full stability", stability_saturates),
    ("radius ordering after adaptation", radius_ordering),
    ("center contraction", center_contraction),
    ("vote argmax scale invariance", vote_scale_invariance),
    ("single creation per level per tick", single_creation),
    ("frozen levels are bit-identical", frozen_levels),
    ("koncept count never decreases", koncept_count_monotone),
    ("world bounds, transitions, physiology", world_invariants),
    ("noise-free perception is pure", perception_pure),
    ("full-run determinism", determinism),
    ("save/load resume exactness", resume_exactness),
];

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config { cases: cases.max(1), failure_persistence: None, ..Config::default() })
}

fn finish<T: std::fmt::Debug>(r: Result<(), proptest::test_runner::TestError<T>>) -> Result<(), String> {
    r.map_err(|e| e.to_string())
}

/// Heavy properties run a fraction of the requested cases.
fn heavy(cases: u32) -> u32 {
    (cases / 16).max(3)
}

pub fn membership_shape(cases: u32) -> Result<(), String> {
    let s = (1e-3f64..1.0, 1e-3f64..1.0, 0.0f64..2.5, 0.0f64..0.01);
    finish(runner(cases).run(&s, |(r1, gap, d, eps)| {
        let r2 = r1 + gap;
        let m = membership(d, r1, r2).unwrap();
        let m2 = membership(d + eps, r1, r2).unwrap();
        prop_assert!((0.0..=1.0).contains(&m));
        prop_assert!(m2 <= m, "m({}) = {m2} > m({d}) = {m}", d + eps);
        prop_assert!(m - m2 <= eps / gap + 1e-12, "jump {} over {eps}", m - m2);
        prop_assert!(membership(d, r2, r1).is_err());
        Ok(())
    }))
}

fn params_strategy() -> impl Strategy<Value = KebaParams> {
    (1.0f64..4.0, 0.01f64..3.0).prop_map(|(a, iota)| KebaParams {
        activation_potential: a,
        persistence: iota,
        ..Default::default()
    })
}

pub fn activation_convexity(cases: u32) -> Result<(), String> {
    let s = (0.0f64..=1.0, 0.0f64..=1.0, 0usize..6, params_strategy());
    finish(runner(cases).run(&s, |(v, a_prev, level, p)| {
        let a = update_activation(v, a_prev, level, &p);
        prop_assert!(a >= v.min(a_prev) - 1e-15 && a <= v.max(a_prev) + 1e-15, "{a} outside [{v}, {a_prev}]");
        prop_assert_eq!(update_activation(v, v, level, &p), v);
        Ok(())
    }))
}

pub fn activation_level_decay(cases: u32) -> Result<(), String> {
    let s = (0.0f64..=1.0, 0.0f64..=1.0, params_strategy());
    finish(runner(cases).run(&s, |(v, a_prev, p)| {
        let gaps: Vec<f64> = (0..6).map(|n| (update_activation(v, a_prev, n, &p) - v).abs()).collect();
        for n in 1..gaps.len() {
            prop_assert!(gaps[n] + 1e-15 >= gaps[n - 1], "|a - v| shrank from level {} to {n}: {gaps:?}", n - 1);
        }
        Ok(())
    }))
}

pub fn stability_bounds(cases: u32) -> Result<(), String> {
    let s = (0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..=1.0);
    finish(runner(cases).run(&s, |(s_prev, a_t, a_prev, kappa)| {
        let s = update_stability(s_prev, a_t, a_prev, kappa);
        prop_assert!((0.0..=1.0).contains(&s));
        Ok(())
    }))
}

pub fn stability_saturates(cases: u32) -> Result<(), String> {
    let s = (0.001f64..=1.0, 0.0f64..=1.0);
    finish(runner(cases).run(&s, |(kappa, a)| {
        let ticks = (1.0 / kappa).ceil() as usize;
        let mut s = 0.0;
        for t in 0..ticks {
            prop_assert!(s < 1.0, "full stability after only {t} ticks");
            s = update_stability(s, a, a, kappa);
        }
        prop_assert_eq!(s, 1.0, "kappa {} after {} ticks", kappa, ticks);
        Ok(())
    }))
}

pub fn radius_ordering(cases: u32) -> Result<(), String> {
    let s = (1e-4f64..1.0, 1e-4f64..1.0, 0.0f64..3.0, 1e-4f64..0.05);
    finish(runner(cases).run(&s, |(r1, gap, d, rate)| {
        let (mut a, mut b) = (r1, r1 + gap);
        adapt_radii(&mut a, &mut b, d, rate);
        prop_assert!(a > 0.0 && a < b, "r1 = {a}, r2 = {b}");
        Ok(())
    }))
}

pub fn center_contraction(cases: u32) -> Result<(), String> {
    let s = (2usize..7).prop_flat_map(|k| {
        (
            prop::collection::vec(0.0f64..=1.0, k),
            prop::collection::vec(0.0f64..=1.0, k),
            0.001f64..=1.0,
            0.001f64..=1.0,
        )
    });
    finish(runner(cases).run(&s, |(mut center, target, eta, v)| {
        let before = euclidean(&target, &center);
        prop_assume!(before > 1e-6);
        adapt_center(&mut center, &target, v, eta);
        let after = euclidean(&target, &center);
        prop_assert!(after < before, "{after} >= {before}");
        Ok(())
    }))
}

fn links(l: [f64; 3]) -> Links {
    Links::from_array(l)
}

fn toy_hierarchy(proto_v: &[f64], upper: &[(f64, [f64; 3])], scale: f64) -> Hierarchy {
    let mut levels = vec![(0..PROTO_COUNT)
        .map(|i| Koncept {
            id: KonceptId(i as u32),
            level: 0,
            parents: vec![],
            ball: None,
            v: proto_v[i] * scale,
            a: 0.0,
            a_prev: 0.0,
            s: 0.0,
            links: links([0.3 + 0.02 * i as f64, 0.5, 0.1]),
        })
        .collect::<Vec<_>>()];
    if !upper.is_empty() {
        levels.push(
            upper
                .iter()
                .enumerate()
                .map(|(j, &(v, l))| Koncept {
                    id: KonceptId((PROTO_COUNT + j) as u32),
                    level: 1,
                    parents: vec![KonceptId(j as u32 % 15), KonceptId((j as u32 + 1) % 15)],
                    ball: Some(OpenBall { center: vec![0.5, 0.5], r1: 0.1, r2: 0.25 }),
                    v: v * scale,
                    a: 0.0,
                    a_prev: 0.0,
                    s: 0.0,
                    links: links(l),
                })
                .collect(),
        );
    }
    Hierarchy::from_parts(KebaParams::default(), levels, RngStream::new(0, "links"), 0).unwrap()
}

pub fn vote_scale_invariance(cases: u32) -> Result<(), String> {
    let s = (
        prop::collection::vec(0.0f64..=1.0, PROTO_COUNT),
        prop::collection::vec((0.0f64..=1.0, prop::array::uniform3(0.0f64..=1.0)), 0..6),
        0.01f64..=1.0,
    );
    finish(runner(cases).run(&s, |(proto_v, upper, c)| {
        let max_v = proto_v.iter().chain(upper.iter().map(|(v, _)| v)).fold(0.0f64, |m, &v| m.max(v));
        let scale = if max_v > 0.0 { c / max_v.max(c) } else { c };
        let base = toy_hierarchy(&proto_v, &upper, 1.0).vote();
        let scaled = toy_hierarchy(&proto_v, &upper, scale).vote();
        for (x, y) in base.scores.iter().zip(scaled.scores) {
            prop_assert!((x * scale - y).abs() <= 1e-12 * x.abs().max(1.0));
        }
        let mut sorted = base.scores;
        sorted.sort_by(|a, b| b.total_cmp(a));
        let near_tie = sorted[0] - sorted[1] <= 1e-9 * sorted[0].max(1e-300);
        if !near_tie {
            prop_assert_eq!(base.action, scaled.action);
        }
        Ok(())
    }))
}

/// Piecewise-steady protokoncept inputs: a few patterns, each held for a
/// while with small jitter, so levels actually stabilize and grow.
#[derive(Debug, Clone)]
pub struct InputStream {
    seed: u64,
    patterns: Vec<[f64; PROTO_COUNT]>,
    schedule: Vec<(usize, u32)>,
    jitter: f64,
    kappa: f64,
    max_levels: usize,
}

impl InputStream {
    fn inputs(&self) -> Vec<[f64; PROTO_COUNT]> {
        let mut rng = RngStream::new(self.seed, "jitter");
        let mut out = Vec::new();
        for &(i, hold) in &self.schedule {
            let p = self.patterns[i % self.patterns.len()];
            for _ in 0..hold {
                out.push(p.map(|x| (x + rng.uniform(-self.jitter, self.jitter)).clamp(0.0, 1.0)));
            }
        }
        out
    }

    fn hierarchy(&self) -> Hierarchy {
        let params = KebaParams { stability_speed: self.kappa, max_levels: self.max_levels, ..Default::default() };
        Hierarchy::new(params, RngStream::new(self.seed, "links")).unwrap()
    }
}

fn input_streams() -> impl Strategy<Value = InputStream> {
    (
        any::<u64>(),
        prop::collection::vec(prop::array::uniform15(0.0f64..=1.0), 2..5),
        prop::collection::vec((0usize..8, 4u32..30), 4..16),
        prop_oneof![Just(0.0), 0.0f64..0.03],
        0.1f64..0.6,
        1usize..4,
    )
        .prop_map(|(seed, patterns, schedule, jitter, kappa, max_levels)| InputStream {
            seed,
            patterns,
            schedule,
            jitter,
            kappa,
            max_levels,
        })
}

fn bits(level: &[Koncept]) -> Vec<u64> {
    let mut out = Vec::new();
    for k in level {
        out.extend([k.v, k.a, k.a_prev, k.s].map(f64::to_bits));
        out.extend(k.links.to_array().map(f64::to_bits));
        if let Some(b) = &k.ball {
            out.extend(b.center.iter().map(|x| x.to_bits()));
            out.extend([b.r1.to_bits(), b.r2.to_bits()]);
        }
        out.push(k.id.0 as u64);
    }
    out
}

pub fn single_creation(cases: u32) -> Result<(), String> {
    let total_created = Cell::new(0usize);
    let r = runner(heavy(cases) * 4).run(&input_streams(), |stream| {
        let mut h = stream.hierarchy();
        for input in stream.inputs() {
            let before = h.counts();
            let report = h.step(&input).unwrap();
            let after = h.counts();
            for p in &report.propagations {
                let n = p.level + 1;
                let grew = after.get(n).copied().unwrap_or(0) - before.get(n).copied().unwrap_or(0);
                prop_assert!(grew <= 1, "level {n} grew by {grew} in one tick");
                prop_assert_eq!(grew, usize::from(p.created.is_some()));
                if let Some(id) = p.created {
                    total_created.set(total_created.get() + 1);
                    let k = h.koncept(id).unwrap();
                    prop_assert_eq!(k.v, 1.0);
                    prop_assert!(k.parents.len() >= 2);
                    prop_assert!(k.parents.iter().all(|&q| h.koncept(q).is_some_and(|q| q.level == p.level && q.a > 0.0)));
                    prop_assert!(k.ball.as_ref().is_some_and(|b| b.r1 > 0.0 && b.r1 < b.r2));
                }
            }
        }
        Ok(())
    });
    finish(r)?;
    if total_created.get() == 0 {
        return Err("no input stream ever created a koncept; the property was vacuous".into());
    }
    Ok(())
}

pub fn frozen_levels(cases: u32) -> Result<(), String> {
    let frozen_seen = Cell::new(0usize);
    let r = runner(heavy(cases) * 4).run(&input_streams(), |stream| {
        let mut h = stream.hierarchy();
        for input in stream.inputs() {
            let before: Vec<Vec<u64>> = h.levels().iter().map(|l| bits(l)).collect();
            let report = h.step(&input).unwrap();
            let refreshed = report.refreshed_levels();
            for (n, was) in before.iter().enumerate().skip(1) {
                if !refreshed.contains(&n) {
                    frozen_seen.set(frozen_seen.get() + 1);
                    prop_assert!(&bits(&h.levels()[n]) == was, "frozen level {} changed", n);
                }
            }
        }
        Ok(())
    });
    finish(r)?;
    if frozen_seen.get() == 0 {
        return Err("no frozen level was ever observed; the property was vacuous".into());
    }
    Ok(())
}

fn small_config(seed: u64, noise: f64, ticks: u64) -> ScenarioConfig {
    let animats = vec![
        AnimatSpec::new(ControllerKind::Keba),
        AnimatSpec::new(ControllerKind::Keba),
        AnimatSpec::new(ControllerKind::Random),
    ];
    let mut c = ScenarioConfig::new(seed, ticks, animats);
    c.world.width = 30.0;
    c.world.height = 30.0;
    c.world.spawn_rate = 0.05;
    c.world.noise_amplitude = noise;
    c
}

pub fn koncept_count_monotone(cases: u32) -> Result<(), String> {
    let s = (any::<u64>(), 0.0f64..0.5);
    finish(runner(heavy(cases)).run(&s, |(seed, noise)| {
        let mut sim = Simulation::new(small_config(seed, noise, 600)).unwrap();
        let mut last: Vec<Vec<usize>> = sim.controllers.iter().map(|c| c.koncept_counts()).collect();
        while !sim.finished() {
            sim.step();
            for (c, prev) in sim.controllers.iter().zip(last.iter_mut()) {
                let now = c.koncept_counts();
                prop_assert!(now.len() >= prev.len());
                prop_assert!(prev.iter().zip(&now).all(|(a, b)| b >= a), "{:?} -> {:?}", prev, now);
                *prev = now;
            }
        }
        Ok(())
    }))
}

fn stage(kind: PhenomenonKind) -> u8 {
    match kind {
        PhenomenonKind::Lightning => 0,
        PhenomenonKind::Rain => 1,
        PhenomenonKind::Food => 2,
        PhenomenonKind::Rock => 9,
    }
}

fn world_strategy() -> impl Strategy<Value = (u64, f64, f64, f64, f64, Vec<Locomotion>, Vec<usize>)> {
    (
        any::<u64>(),
        5.0f64..150.0,
        5.0f64..150.0,
        0.0f64..0.3,
        0.0f64..1.0,
        prop::collection::vec(prop_oneof![Just(Locomotion::Wander), Just(Locomotion::Circular), Just(Locomotion::Static)], 1..5),
        prop::collection::vec(0usize..3, 50..200),
    )
}

fn build_world(seed: u64, width: f64, height: f64, spawn_rate: f64, noise: f64, modes: &[Locomotion]) -> World {
    let params = WorldParams { width, height, spawn_rate, noise_amplitude: noise, ..Default::default() };
    let mut w = World::new(params, RngStream::new(seed, "world.spawn"));
    let mut setup = RngStream::new(seed, "setup");
    for (i, &mode) in modes.iter().enumerate() {
        let at = w.random_position(&mut setup);
        let heading = setup.uniform(0.0, std::f64::consts::TAU);
        w.add_animat(at, heading, mode, RngStream::new(seed, format!("m{i}")), RngStream::new(seed, format!("s{i}")));
    }
    for kind in [PhenomenonKind::Food, PhenomenonKind::Rock, PhenomenonKind::Rain, PhenomenonKind::Lightning] {
        for _ in 0..3 {
            let at = w.random_position(&mut setup);
            w.spawn(kind, at);
        }
    }
    w
}

pub fn world_invariants(cases: u32) -> Result<(), String> {
    finish(runner(heavy(cases) * 2).run(&world_strategy(), |(seed, width, height, spawn, noise, modes, actions)| {
        let mut w = build_world(seed, width, height, spawn, noise, &modes);
        let mut kinds: HashMap<PhenomenonId, PhenomenonKind> = w.phenomena.iter().map(|p| (p.id, p.kind)).collect();
        let mut gone: Vec<PhenomenonId> = Vec::new();
        let mut acts = actions.iter().cycle();
        for tick in 1..=1500u64 {
            w.step();
            for who in 0..w.animats.len() {
                if !w.animats[who].alive() {
                    continue;
                }
                let input = w.perceive(who);
                prop_assert!(input.iter().all(|x| (0.0..=1.0).contains(x)));
                w.apply_action(who, Action::ALL[*acts.next().unwrap()], tick);
                w.physiology_step(who, tick);
            }
            for b in &w.animats {
                prop_assert!(b.position.in_bounds(width, height), "animat at {:?}", b.position);
                let ph = b.physiology;
                for x in [ph.energy, ph.hunger, ph.thirst] {
                    prop_assert!((0.0..=1.0).contains(&x));
                }
                prop_assert_eq!(b.alive(), b.death_tick.is_none());
            }
            for p in &w.phenomena {
                prop_assert!(p.position.in_bounds(width, height));
                prop_assert!(p.size > 0.0 && !gone.contains(&p.id), "{:?} reappeared", p.id);
                if let Some(&was) = kinds.get(&p.id) {
                    let ok = was == p.kind || stage(p.kind) == stage(was) + 1;
                    prop_assert!(ok, "{:?} went from {:?} to {:?}", p.id, was, p.kind);
                }
                kinds.insert(p.id, p.kind);
            }
            let present: Vec<PhenomenonId> = w.phenomena.iter().map(|p| p.id).collect();
            for (id, kind) in &kinds {
                if !present.contains(id) && !gone.contains(id) {
                    prop_assert_eq!(*kind, PhenomenonKind::Food, "only food is ever removed");
                    gone.push(*id);
                }
            }
        }
        Ok(())
    }))
}

pub fn perception_pure(cases: u32) -> Result<(), String> {
    finish(runner(heavy(cases) * 2).run(&world_strategy(), |(seed, width, height, spawn, _, modes, _)| {
        let mut w = build_world(seed, width, height, spawn, 0.0, &modes);
        for _ in 0..50 {
            w.step();
            for who in 0..w.animats.len() {
                let snapshot = w.clone();
                let first = w.perceive(who);
                let second = w.perceive(who);
                prop_assert_eq!(first, second);
                let mut other = snapshot.clone();
                prop_assert_eq!(other.perceive(who), first);
                prop_assert!(w.phenomena == snapshot.phenomena);
            }
        }
        Ok(())
    }))
}

pub fn determinism(cases: u32) -> Result<(), String> {
    let s = (any::<u64>(), 0.0f64..0.6);
    finish(runner(heavy(cases)).run(&s, |(seed, noise)| {
        let a = run_scenario(small_config(seed, noise, 800)).unwrap();
        let b = run_scenario(small_config(seed, noise, 800)).unwrap();
        prop_assert!(a == b, "metrics differ for seed {}", seed);
        let mut x = Simulation::new(small_config(seed, noise, 800)).unwrap();
        let mut y = Simulation::new(small_config(seed, noise, 800)).unwrap();
        x.run_to_end();
        y.run_to_end();
        prop_assert!(x == y, "final states differ for seed {}", seed);
        Ok(())
    }))
}

pub fn resume_exactness(cases: u32) -> Result<(), String> {
    let s = (any::<u64>(), 0.0f64..0.5, 1u64..400, 1u64..400);
    finish(runner(heavy(cases)).run(&s, |(seed, noise, before, after)| {
        let mut sim = Simulation::new(small_config(seed, noise, 2000)).unwrap();
        for _ in 0..before {
            sim.step();
        }
        let text = to_json(&save_state(&sim)).unwrap();
        let mut resumed = load_state(parse_document(&text).unwrap().document).unwrap();
        prop_assert!(to_json(&save_state(&resumed)).unwrap() == text, "save after load differs");
        for _ in 0..after {
            let (t1, t2) = (sim.step(), resumed.step());
            prop_assert!(t1 == t2, "traces diverged at tick {}", sim.tick);
        }
        prop_assert!(save_state(&sim) == save_state(&resumed));
        Ok(())
    }))
}

