//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stochgame::game::{Belief, GameSpec, Regret};
use stochgame::informed::{belief_based_play, belief_based_strategy, solve_informed, solve_informed_at};
use stochgame::lp::{self, Relation};
use stochgame::sim::{sample_index, simulate};
use stochgame::uninformed::{
    build_regret_lp, dual_value, regret_based_play, regret_trace, solve_uninformed,
};
use stochgame::verify::{
    best_response_informed, best_response_uninformed, brute_value_one_stage, brute_value_two_stage,
    non_revealing_value,
};

const REFERENCE_VALUE: f64 = -3.4698;

fn case_study() -> GameSpec {
    GameSpec::from_json_str(include_str!("../data/intrusion.json")).unwrap()
}

fn random_distribution(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|x| x / s).collect()
}

/// |K|, |A|, |B| in 1..=3, N in 1..=3, payoffs uniform in [-10, 10].
fn random_game(rng: &mut ChaCha8Rng) -> GameSpec {
    let (nk, na, nb) = (rng.gen_range(1..=3), rng.gen_range(1..=3), rng.gen_range(1..=3));
    let horizon = rng.gen_range(1..=3);
    let payoff = (0..nk)
        .map(|_| (0..na).map(|_| (0..nb).map(|_| rng.gen_range(-10.0..=10.0)).collect()).collect())
        .collect();
    let transition = (0..na)
        .map(|_| (0..nk).map(|_| random_distribution(rng, nk)).collect())
        .collect();
    let initial = random_distribution(rng, nk);
    GameSpec::new(payoff, transition, initial, horizon).unwrap()
}

fn random_games(seed: u64, count: usize) -> Vec<GameSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_game(&mut rng)).collect()
}

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, id: &str, ok: bool, detail: String) {
        if !ok {
            self.failures += 1;
        }
        println!("criterion {id}: {} {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

fn criterion_1(r: &mut Report) {
    let g = case_study();
    let start = Instant::now();
    let vi = solve_informed(&g).unwrap().value;
    let vu = solve_uninformed(&g).unwrap().value;
    let secs = start.elapsed().as_secs_f64();
    let ok = (vi - REFERENCE_VALUE).abs() <= 1e-3 && (vu - REFERENCE_VALUE).abs() <= 1e-3 && (vi - vu).abs() <= 1e-6 && secs < 1.0;
    r.line(
        "1",
        ok,
        format!("informed {vi:.6} uninformed {vu:.6} gap {:.1e} in {secs:.3}s", (vi - vu).abs()),
    );
}

fn criterion_2(r: &mut Report) {
    let mut games = vec![case_study()];
    games.extend(random_games(2, 50));
    let mut worst = 0.0_f64;
    for g in &games {
        let si = solve_informed(g).unwrap();
        let su = solve_uninformed(g).unwrap();
        let a = best_response_uninformed(g, &si.strategy).unwrap().guaranteed_value;
        let b = best_response_informed(g, &su.strategy).unwrap().guaranteed_value;
        worst = worst.max((a - si.value).abs()).max((b - si.value).abs());
    }
    r.line("2", worst <= 1e-6, format!("{} games, worst best-response gap {worst:.2e}", games.len()));
}

fn criterion_3(r: &mut Report) {
    let mut games = vec![case_study()];
    games.extend(random_games(2, 50));
    let (mut dot_gap, mut w_gap) = (0.0_f64, 0.0_f64);
    for g in &games {
        let su = solve_uninformed(g).unwrap();
        dot_gap = dot_gap.max((su.initial_regret.dot(&g.initial()) + su.value).abs());
        w_gap = w_gap.max(dual_value(g, g.horizon(), &su.initial_regret).unwrap().abs());
    }
    r.line(
        "3",
        dot_gap <= 1e-6 && w_gap <= 1e-6,
        format!("{} games, |p0.alpha + v| <= {dot_gap:.2e}, |w_N(alpha)| <= {w_gap:.2e}", games.len()),
    );
}

fn criterion_4(r: &mut Report) {
    let g = case_study();
    let (nk, na, n) = (g.num_states(), g.num_actions_p1(), g.horizon());
    let si = solve_informed(&g).unwrap();
    // (stage, history ordinal, sigma(nv), sigma(v)) with "1" = first-listed action
    let table3: [(usize, usize, [f64; 2], [f64; 2]); 7] = [
        (1, 0, [0.0, 1.0], [0.1875, 0.8125]),
        (2, 0, [0.0, 1.0], [0.375, 0.625]),
        (2, 1, [0.0, 1.0], [0.1356, 0.8644]),
        (3, 0, [0.0, 1.0], [0.375, 0.625]),
        (3, 1, [0.0, 1.0], [0.133, 0.867]),
        (3, 2, [0.0, 1.0], [0.375, 0.625]),
        (3, 3, [0.0, 1.0], [0.1391, 0.8609]),
    ];
    let mut sigma_gap = 0.0_f64;
    for (t, h, nv, v) in table3 {
        for a in 0..na {
            sigma_gap = sigma_gap.max((si.strategy.get(t, h, 0)[a] - nv[a]).abs());
            sigma_gap = sigma_gap.max((si.strategy.get(t, h, 1)[a] - v[a]).abs());
        }
    }
    let table3_beliefs: [(usize, usize, f64); 7] = [
        (1, 0, 0.5),
        (2, 0, 0.8),
        (2, 1, 0.1448),
        (3, 0, 0.8),
        (3, 1, 0.1135),
        (3, 2, 0.8),
        (3, 3, 0.1836),
    ];
    let beliefs = belief_based_strategy(&g).unwrap().beliefs;
    let belief_gap = table3_beliefs
        .iter()
        .map(|&(t, h, p)| (beliefs[t - 1][h].as_ref().unwrap().probs()[0] - p).abs())
        .fold(0.0_f64, f64::max);

    let trace = regret_trace(&g, None).unwrap();
    let table4: [(usize, usize, [f64; 2], [f64; 2]); 7] = [
        (1, 0, [0.6657, 0.3347], [3.1669, 3.7729]),
        (2, 0, [0.6617, 0.3383], [0.9109, 1.5038]),
        (2, 1, [0.6617, 0.3383], [0.7568, 1.3498]),
        (3, 0, [0.6875, 0.3125], [0.2621, 0.9496]),
        (3, 1, [0.6875, 0.3125], [0.0666, 0.7541]),
        (3, 2, [0.6875, 0.3125], [0.2621, 0.9496]),
        (3, 3, [0.6875, 0.3125], [0.0666, 0.7541]),
    ];
    let (mut mix_gap, mut regret_gap, mut subst_gap) = (0.0_f64, 0.0_f64, 0.0_f64);
    for (t, h, mix, regret) in table4 {
        let y = trace.strategy.get(t, h);
        let ours = trace.regrets[t - 1][h].values();
        for i in 0..nk {
            mix_gap = mix_gap.max((y[i] - mix[i]).abs());
        }
        if t == 1 {
            for i in 0..nk {
                regret_gap = regret_gap.max((ours[i] - regret[i]).abs());
            }
            continue;
        }
        // the regret LP fixes beta_a only up to beta_a + c 1
        let shift = regret[0] - ours[0];
        for i in 0..nk {
            regret_gap = regret_gap.max((ours[i] + shift - regret[i]).abs());
        }
        // and the printed beta must itself be optimal
        let (parent, a) = (h / na, h % na);
        let alpha = &trace.regrets[t - 2][parent];
        let mut built = build_regret_lp(&g, n - (t - 1), alpha);
        let free = lp::solve(&built.lp).unwrap().require_optimal().unwrap().objective_value;
        for k in 0..nk {
            built.lp.add_constraint(vec![(built.beta[a][k], 1.0)], Relation::Eq, regret[k]);
        }
        let pinned = lp::solve(&built.lp).unwrap().require_optimal().unwrap().objective_value;
        subst_gap = subst_gap.max((pinned - free).abs());
    }
    let ok = sigma_gap <= 1e-3 && mix_gap <= 1e-3 && regret_gap <= 1e-3 && subst_gap <= 1e-3;
    r.line(
        "4",
        ok,
        format!(
            "sigma gap {sigma_gap:.1e}, tau gap {mix_gap:.1e}, regret gap (mod shift) {regret_gap:.1e}, \
             printed-regret optimality gap {subst_gap:.1e}; beliefs (not gated) gap {belief_gap:.1e}"
        ),
    );
}

fn criterion_5(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let games = random_games(50, 10);
    let (mut worst, mut eq_gap) = (f64::INFINITY, 0.0_f64);
    for g in &games {
        let su = solve_uninformed(g).unwrap();
        let p0 = g.initial();
        let v = su.value;
        for _ in 0..10 {
            let alpha = Regret::new((0..g.num_states()).map(|_| rng.gen_range(-10.0..10.0)).collect()).unwrap();
            let w = dual_value(g, g.horizon(), &alpha).unwrap();
            worst = worst.min(w - alpha.dot(&p0) - v);
        }
        let w = dual_value(g, g.horizon(), &su.initial_regret).unwrap();
        eq_gap = eq_gap.max((w - su.initial_regret.dot(&p0) - v).abs());
    }
    r.line(
        "5",
        worst >= -1e-6 && eq_gap <= 1e-6,
        format!("100 alphas on 10 games, min slack {worst:.2e}, equality gap at alpha_1 {eq_gap:.2e}"),
    );
}

fn criterion_6(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut games = vec![case_study()];
    games.extend(random_games(60, 9));
    let (mut concave, mut convex, mut shift) = (f64::INFINITY, f64::INFINITY, 0.0_f64);
    for g in &games {
        let (nk, n) = (g.num_states(), g.horizon());
        for _ in 0..5 {
            let p1 = random_distribution(&mut rng, nk);
            let p2 = random_distribution(&mut rng, nk);
            let lam: f64 = rng.gen();
            let mix: Vec<f64> = p1.iter().zip(&p2).map(|(a, b)| lam * a + (1.0 - lam) * b).collect();
            let v = |p: Vec<f64>| solve_informed_at(g, n, &Belief::new(p).unwrap()).unwrap().value;
            let (va, vb) = (v(p1), v(p2));
            concave = concave.min(v(mix) - lam * va - (1.0 - lam) * vb);

            let a1: Vec<f64> = (0..nk).map(|_| rng.gen_range(-10.0..10.0)).collect();
            let a2: Vec<f64> = (0..nk).map(|_| rng.gen_range(-10.0..10.0)).collect();
            let am: Vec<f64> = a1.iter().zip(&a2).map(|(a, b)| lam * a + (1.0 - lam) * b).collect();
            let w = |a: &[f64]| dual_value(g, n, &Regret::new(a.to_vec()).unwrap()).unwrap();
            convex = convex.min(lam * w(&a1) + (1.0 - lam) * w(&a2) - w(&am));
            let c = rng.gen_range(-5.0..5.0);
            let shifted = Regret::new(a1.clone()).unwrap().shifted(c);
            shift = shift.max((dual_value(g, n, &shifted).unwrap() - w(&a1) - c).abs());
        }
    }
    r.line(
        "6",
        concave >= -1e-6 && convex >= -1e-6 && shift <= 1e-6,
        format!("concavity slack {concave:.2e}, convexity slack {convex:.2e}, translation gap {shift:.2e}"),
    );
}

fn criterion_7(r: &mut Report) {
    let mut games = vec![case_study()];
    games.extend(random_games(70, 20));
    let mut one_gap = 0.0_f64;
    for g in &games {
        let one = g.with_horizon(1).unwrap();
        let brute = brute_value_one_stage(g, &g.initial()).unwrap();
        let vi = solve_informed(&one).unwrap().value;
        let vu = solve_uninformed(&one).unwrap().value;
        one_gap = one_gap.max((brute - vi).abs()).max((brute - vu).abs());
    }
    let g = case_study();
    let non_revealing = non_revealing_value(&g, &g.initial()).unwrap();
    let two = g.with_horizon(2).unwrap();
    let v2 = solve_informed(&two).unwrap().value;
    let (lo, hi) = brute_value_two_stage(&g, &g.initial(), 64).unwrap();
    let ok = one_gap <= 1e-7 && (non_revealing + 1.05).abs() <= 1e-7 && lo <= v2 + 1e-9 && v2 <= hi + 1e-9;
    r.line(
        "7",
        ok,
        format!(
            "one-stage oracle vs N=1 LPs gap {one_gap:.1e} on {} games; averaged-matrix value {non_revealing:.4}; \
             N=2 value {v2:.6} in [{lo:.6}, {hi:.6}] at g=64",
            games.len()
        ),
    );
}

fn criterion_8(r: &mut Report) {
    let g = case_study();
    let start = Instant::now();
    let si = solve_informed(&g).unwrap();
    let su = solve_uninformed(&g).unwrap();
    let rep = simulate(&g, &si.strategy, &su.strategy, 1000, 7).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let dev = (rep.mean - si.value).abs();
    r.line(
        "8",
        dev <= 4.0 * rep.std_error && secs < 10.0,
        format!(
            "mean {:.4} value {:.4} |diff| {dev:.4} <= 4 SE {:.4}; {secs:.3}s",
            rep.mean,
            si.value,
            4.0 * rep.std_error
        ),
    );
}

fn criterion_9(r: &mut Report) {
    let g = case_study();
    let si = solve_informed(&g).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let play = belief_based_play(&g, |_, _| 1, &mut rng).unwrap();
    let mut stage1_gap = 0.0_f64;
    for k in 0..g.num_states() {
        for a in 0..g.num_actions_p1() {
            stage1_gap = stage1_gap.max((play.distributions[0][k][a] - si.strategy.get(1, 0, k)[a]).abs());
        }
    }
    let expanded = belief_based_strategy(&g).unwrap();
    let level = best_response_uninformed(&g, &expanded.strategy).unwrap().guaranteed_value;
    let level_gap = (level - si.value).abs();

    // identical informed feeds, different p2 realizations
    let run = |flip: bool| {
        let mut b_rng = ChaCha8Rng::seed_from_u64(90);
        let actions = [0usize, 1, 0];
        let mut b_hist = Vec::new();
        let out = regret_based_play(&g, None, |t, mix| {
            let b = sample_index(mix, b_rng.gen());
            b_hist.push(if flip { mix.len() - 1 - b } else { b });
            actions[t - 1]
        })
        .unwrap();
        (out, b_hist)
    };
    let (a, ba) = run(false);
    let (b, bb) = run(true);
    let measurable = a == b;
    r.line(
        "9",
        stage1_gap <= 1e-6 && level_gap <= 1e-6 && measurable,
        format!(
            "stage-1 gap {stage1_gap:.1e}, belief-based level gap {level_gap:.1e}, \
             regret play identical under b-histories {ba:?} / {bb:?}: {measurable}"
        ),
    );
}

fn main() {
    let mut r = Report { failures: 0 };
    criterion_1(&mut r);
    criterion_2(&mut r);
    criterion_3(&mut r);
    criterion_4(&mut r);
    criterion_5(&mut r);
    criterion_6(&mut r);
    criterion_7(&mut r);
    criterion_8(&mut r);
    criterion_9(&mut r);
    if r.failures > 0 {
        println!("{} criteria failed", r.failures);
        std::process::exit(1);
    }
    println!("all criteria passed");
}
