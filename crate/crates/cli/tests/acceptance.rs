//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Run with `cargo test -p marsim-cli --test acceptance`.

use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use marsim_cli::{run_sweep, Series, SweepSpec};
use marsim_core::agents::{attempt_migration, choose_next_with_rule, Migration};
use marsim_core::estimator::{
    agent_task_reliability, episode_lambda, mas_reliability, node_instantaneous_reliability, service_reliability,
};
use marsim_core::radio::{self, link_capacity, received_power};
use marsim_core::{
    monte_carlo, run_episode_with, AgentPolicy, EpisodeSetup, FailureParams, LinkState, MobilityModel, RadioParams,
    ReliabilityMode, RouteRule, ScenarioConfig, TopologySnapshot, TravelAgent,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn lambdas(series: &Series) -> Vec<f64> {
    series.rows.iter().map(|r| r.mean_lambda).collect()
}

fn show(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>().join(" ")
}

fn non_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] >= w[0])
}

fn non_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0])
}

fn sweep(cfg: &ScenarioConfig, spec: SweepSpec) -> Vec<Series> {
    run_sweep(cfg, &spec).expect("sweep runs")
}

fn max_fr_plateau() -> Verdict {
    let cfg = ScenarioConfig::default();
    let values = ["10", "12", "14", "16", "18", "20", "22", "24"];
    let l = lambdas(&sweep(&cfg, SweepSpec::new("max_fr", &values))[0]);
    let plateau = l[4..].iter().all(|&x| x >= 0.85);
    verdict(
        non_decreasing(&l) && plateau,
        format!("lambda over max_fr 10..24: {}", show(&l)),
    )
}

fn agent_count_drop() -> Verdict {
    // connected network without software failure: lfp = 0 and perfect agents
    let mut cfg = ScenarioConfig::default();
    cfg.max_fr = 15;
    cfg.failure.lfp = 0.0;
    cfg.failure.agent_weibull_scale = f64::INFINITY;
    let l = lambdas(&sweep(&cfg, SweepSpec::new("m_agents", &["5", "10", "15", "20", "25"]))[0]);
    let floor = l[..3].iter().copied().fold(f64::INFINITY, f64::min);
    let sweep_ok = floor >= 0.95 && l[3] < floor && l[4] < floor;

    // static, connected, ideal: every agent must finish
    let mut ideal = cfg.clone();
    ideal.mobility.model = MobilityModel::Static;
    ideal.failure.p_t_migration = 1.0;
    ideal.failure.node_weibull_scale = f64::INFINITY;
    let grid: Vec<(f64, f64)> = (0..25).map(|i| (100.0 + 150.0 * (i % 5) as f64, 100.0 + 150.0 * (i / 5) as f64)).collect();
    let setup = EpisodeSetup {
        positions: Some(grid),
        ..EpisodeSetup::default()
    };
    let mut sanity = Vec::new();
    for m in [5, 10, 15] {
        ideal.m_agents = m;
        let worst = (0..20)
            .map(|q| run_episode_with(&ideal, q, &setup, |_| {}).unwrap().lambda_t)
            .fold(f64::INFINITY, f64::min);
        sanity.push(worst);
    }
    let sanity_ok = sanity.iter().all(|&x| x == 1.0);

    // informational: default link and software failure
    let mut stock = ScenarioConfig::default();
    stock.max_fr = 15;
    let info = lambdas(&sweep(&stock, SweepSpec::new("m_agents", &["5", "10", "15", "20", "25"]))[0]);
    verdict(
        sweep_ok && sanity_ok,
        format!(
            "lambda over m 5..25 (lfp=0, perfect agents): {}; static sanity min lambda for m=5,10,15: {}; info, default failures: {}",
            show(&l),
            show(&sanity),
            show(&info)
        ),
    )
}

fn lfp_threshold() -> Verdict {
    let cfg = ScenarioConfig::default();
    let l = lambdas(&sweep(&cfg, SweepSpec::new("lfp", &["0", "0.1", "0.2", "0.3", "0.4", "0.5"]))[0]);
    let ratio = l[4] / l[2];
    verdict(
        non_increasing(&l) && ratio <= 0.7,
        format!("lambda over lfp 0..0.5: {}; lambda(0.4)/lambda(0.2) = {ratio:.4}", show(&l)),
    )
}

fn mobility_convergence() -> Verdict {
    let cfg = ScenarioConfig::default();
    let spec = SweepSpec::new("n_nodes", &["10", "25", "40"]).with_series("mobility.model", &["RWMM", "SRMM", "RPGM"]);
    let series = sweep(&cfg, spec);
    let spread = |i: usize| {
        let at: Vec<f64> = series.iter().map(|s| s.rows[i].mean_lambda).collect();
        let hi = at.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = at.iter().copied().fold(f64::INFINITY, f64::min);
        hi - lo
    };
    let by_model: Vec<String> = series.iter().map(|s| format!("{} [{}]", s.label, show(&lambdas(s)))).collect();
    verdict(
        spread(2) <= 0.1,
        format!(
            "spread N=10 {:.4}, N=25 {:.4}, N=40 {:.4}; {}",
            spread(0),
            spread(1),
            spread(2),
            by_model.join(", ")
        ),
    )
}

fn size_scalability() -> Verdict {
    let cfg = ScenarioConfig::default();
    let l = lambdas(&sweep(&cfg, SweepSpec::new("n_nodes", &["20", "45"]))[0]);
    let gap = (l[1] - l[0]).abs();
    verdict(
        gap <= 0.1,
        format!("lambda N=20 {:.4}, N=45 {:.4}, gap {gap:.4}", l[0], l[1]),
    )
}

fn reachability_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce55);
    let mut mismatches = 0;
    let mut agents = 0;
    for instance in 0..200u64 {
        let n = rng.random_range(1..=6);
        let mut cfg = ScenarioConfig::default();
        cfg.n_nodes = n;
        cfg.m_agents = rng.random_range(1..=6);
        cfg.sp_total = rng.random_range(0..=n);
        cfg.mobility.model = MobilityModel::Static;
        cfg.failure.lfp = 0.0;
        cfg.failure.p_t_migration = 1.0;
        cfg.failure.agent_weibull_scale = f64::INFINITY;
        cfg.failure.node_weibull_scale = f64::INFINITY;
        let pos: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.random_range(0.0..1000.0), rng.random_range(0.0..1000.0)))
            .collect();
        // reachability by repeated relaxation from each source
        let d_star = radio::cutoff_distance(&cfg.radio);
        let linked = |i: usize, j: usize| (pos[i].0 - pos[j].0).hypot(pos[i].1 - pos[j].1) <= d_star;
        let component_size = |src: usize| {
            let mut seen = vec![false; n];
            seen[src] = true;
            loop {
                let mut grew = false;
                for i in 0..n {
                    for j in 0..n {
                        if seen[i] && !seen[j] && linked(i, j) {
                            seen[j] = true;
                            grew = true;
                        }
                    }
                }
                if !grew {
                    break;
                }
            }
            seen.iter().filter(|&&s| s).count()
        };
        let setup = EpisodeSetup {
            positions: Some(pos.clone()),
            ..EpisodeSetup::default()
        };
        let ep = run_episode_with(&cfg, instance, &setup, |_| {}).unwrap();
        for a in &ep.agents {
            agents += 1;
            if a.lambda != component_size(a.owner) as f64 / n as f64 {
                mismatches += 1;
            }
        }
    }
    verdict(
        mismatches == 0,
        format!("200 instances, {agents} agents, {mismatches} mismatches"),
    )
}

fn routing_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0a11);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let n = rng.random_range(2..=10);
        let p = rng.random_range(0.1..0.8);
        let mut adj = vec![vec![false; n]; n];
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random::<f64>() < p {
                    adj[i][j] = true;
                    adj[j][i] = true;
                    edges.push((i, j));
                }
            }
        }
        let s = TopologySnapshot::from_edges(n, &edges, None).unwrap();
        let here = rng.random_range(0..n);
        let mut a = TravelAgent::new(0, here, n, 0, 1.0, 3);
        let mut visited = vec![false; n];
        let mut rsn = vec![0u64; n];
        visited[here] = true;
        for v in 0..n {
            if v != here && rng.random::<f64>() < 0.5 {
                let step = rng.random_range(0..4);
                a.mark_visit(v, step);
                visited[v] = true;
                rsn[v] = step;
            }
        }
        // every neighbour scored against each rule, first non-empty rule wins
        let nbrs: Vec<usize> = (0..n).filter(|&u| adj[here][u]).collect();
        let expected = if nbrs.is_empty() {
            None
        } else {
            let r1 = nbrs.iter().copied().filter(|&u| !visited[u] && (0..n).filter(|&w| adj[u][w] && visited[w]).count() >= 2).min();
            let r2 = nbrs.iter().copied().filter(|&u| !visited[u]).min();
            let r3 = nbrs
                .iter()
                .copied()
                .filter(|&w| visited[w] && (0..n).any(|x| adj[w][x] && !visited[x]))
                .min_by_key(|&w| (rsn[w], w));
            let r4 = nbrs.iter().copied().min_by_key(|&w| (rsn[w], w));
            r1.map(|u| (u, RouteRule::CommonNeighbor))
                .or(r2.map(|u| (u, RouteRule::Unvisited)))
                .or(r3.map(|u| (u, RouteRule::FrontierRevisit)))
                .or(r4.map(|u| (u, RouteRule::LeastRecent)))
        };
        if choose_next_with_rule(&a, &s) != expected {
            mismatches += 1;
        }
    }
    verdict(mismatches == 0, format!("1000 snapshots, {mismatches} mismatches"))
}

fn rel_ok(got: f64, want: f64, tol: f64) -> bool {
    if want == 0.0 {
        got.abs() <= tol
    } else {
        ((got - want) / want).abs() <= tol
    }
}

fn formula_checks() -> Verdict {
    use ReliabilityMode::*;
    const EQ: f64 = 1e-12;
    const RF: f64 = 1e-9;
    let unit = RadioParams {
        p_t_watts: 1.0,
        g_t: 1.0,
        g_r: 1.0,
        h_t: 1.0,
        h_r: 1.0,
        noise_watts: 1.0,
        bandwidth_hz: 1e6,
        capacity_threshold_bps: 1.0,
    };
    let tall = RadioParams {
        h_t: 1.5,
        h_r: 1.5,
        ..unit.clone()
    };
    let mut cfg = ScenarioConfig::default();
    cfg.n_nodes = 6;
    cfg.m_agents = 3;
    cfg.q_runs = 1;
    let single = monte_carlo(&cfg, 9).unwrap();
    let mut fixed = cfg.clone();
    fixed.q_runs = 8;
    fixed.mobility.model = MobilityModel::Static;
    fixed.failure.lfp = 0.0;
    fixed.failure.p_t_migration = 1.0;
    fixed.failure.node_weibull_scale = f64::INFINITY;
    fixed.sp_total = 1;
    let deterministic = {
        let positions: Vec<(f64, f64)> = (0..6).map(|i| (100.0 + 100.0 * i as f64, 300.0)).collect();
        let setup = EpisodeSetup {
            positions: Some(positions),
            owners: Some(vec![0, 2, 5]),
            providers: Some(vec![1]),
            ..EpisodeSetup::default()
        };
        let eps: Vec<f64> = (0..8)
            .map(|q| run_episode_with(&fixed, q, &setup, |_| {}).unwrap().lambda_t)
            .collect();
        let mean = eps.iter().sum::<f64>() / 8.0;
        (eps.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 7.0).sqrt()
    };
    let checks: Vec<(&str, bool)> = vec![
        ("task 20/25 fractional", rel_ok(agent_task_reliability(20, 25, Fractional).unwrap(), 0.8, EQ)),
        ("task 25/25 all-or-nothing", rel_ok(agent_task_reliability(25, 25, AllOrNothing).unwrap(), 1.0, EQ)),
        ("task 24/25 all-or-nothing", rel_ok(agent_task_reliability(24, 25, AllOrNothing).unwrap(), 0.0, EQ)),
        ("task 1/1 fractional", rel_ok(agent_task_reliability(1, 1, Fractional).unwrap(), 1.0, EQ)),
        ("task 1/1 all-or-nothing", rel_ok(agent_task_reliability(1, 1, AllOrNothing).unwrap(), 1.0, EQ)),
        ("weighted mean", rel_ok(episode_lambda(&[(1.0, 1.0), (0.5, 0.8)]).unwrap(), 0.7, EQ)),
        ("perfect software", rel_ok(episode_lambda(&[(0.2, 1.0), (0.9, 1.0), (0.4, 1.0)]).unwrap(), 0.5, EQ)),
        ("single agent", rel_ok(episode_lambda(&[(0.6, 0.7)]).unwrap(), 0.42, EQ)),
        ("MAS all ones", rel_ok(mas_reliability(&[1.0, 1.0, 1.0]), 1.0, EQ)),
        ("MAS pair", rel_ok(mas_reliability(&[0.5, 1.0]), 0.75, EQ)),
        ("MAS empty", mas_reliability(&[]) == 0.0),
        ("R_i 1 of 2", rel_ok(node_instantaneous_reliability(1, 2).unwrap(), 0.5, EQ)),
        ("R_i 2 of 2", rel_ok(node_instantaneous_reliability(2, 2).unwrap(), 1.0, EQ)),
        ("R_i 0 of 13", rel_ok(node_instantaneous_reliability(0, 13).unwrap(), 0.0, EQ)),
        ("R_service pair", rel_ok(service_reliability(&[0.5, 1.0]).unwrap(), 0.75, EQ)),
        ("R_service constant", rel_ok(service_reliability(&[0.35; 9]).unwrap(), 0.35, EQ)),
        ("R_service bound", service_reliability(&[0.0, 0.5, 0.5, 1.0]).unwrap() <= 1.0),
        ("Q=1 mean", rel_ok(single.mean_lambda, single.per_episode[0].lambda_t, EQ) && single.std_lambda == 0.0),
        ("deterministic std", deterministic <= EQ),
        ("two-ray 100 m", rel_ok(received_power(100.0, &tall).unwrap(), 5.0625e-8, RF)),
        ("two-ray unit", rel_ok(received_power(1.0, &unit).unwrap(), 1.0, RF)),
        ("Shannon SNR 3", rel_ok(link_capacity(3.0, &unit), 2e6, RF)),
        ("Shannon SNR 1", rel_ok(link_capacity(1.0, &unit), 1e6, RF)),
        ("Shannon no power", link_capacity(0.0, &unit) == 0.0),
        (
            "software e^-1",
            rel_ok(
                radio::agent_software_reliability(
                    &FailureParams {
                        agent_weibull_shape: 1.0,
                        agent_weibull_scale: 1000.0,
                        ..FailureParams::default()
                    },
                    1000.0,
                ),
                (-1.0f64).exp(),
                EQ,
            ),
        ),
    ];
    let failed: Vec<&str> = checks.iter().filter(|(_, ok)| !ok).map(|(name, _)| *name).collect();
    verdict(
        failed.is_empty(),
        if failed.is_empty() {
            format!("{} checks", checks.len())
        } else {
            format!("failed: {}", failed.join(", "))
        },
    )
}

fn marsim(args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_marsim"))
        .args(args)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap_or_default()
}

fn byte_identical_output() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let conf = tmp.path().join("scenario.conf");
    std::fs::write(
        &conf,
        "q_runs = 24\nsweep.parameter = lfp\nsweep.values = 0.1, 0.3\nsweep.series = mobility.model\nsweep.series_values = RWMM, RPGM\n",
    )
    .unwrap();
    let conf = conf.to_str().unwrap();
    let dirs: Vec<String> = (0..4).map(|i| tmp.path().join(format!("o{i}")).display().to_string()).collect();
    let ran = marsim(&["run", "--config", conf, "--seed", "5", "--out", &dirs[0], "--jobs", "1"])
        && marsim(&["run", "--config", conf, "--seed", "5", "--out", &dirs[1], "--jobs", "4"])
        && marsim(&["sweep", "--config", conf, "--seed", "5", "--out", &dirs[2], "--jobs", "1"])
        && marsim(&["sweep", "--config", conf, "--seed", "5", "--out", &dirs[3], "--jobs", "3"]);
    let d: Vec<&Path> = dirs.iter().map(Path::new).collect();
    let same = |a: &Path, b: &Path, name: &str| {
        let x = read(a, name);
        !x.is_empty() && x == read(b, name)
    };
    let run_same = same(d[0], d[1], "run.csv") && same(d[0], d[1], "episodes.csv");
    let sweep_same = same(d[2], d[3], "lfp_RWMM.csv") && same(d[2], d[3], "lfp_RPGM.csv") && same(d[2], d[3], "lfp.svg");
    verdict(
        ran && run_same && sweep_same,
        format!("commands ok {ran}, run identical {run_same}, sweep identical {sweep_same} (jobs 1 vs 4 and 1 vs 3)"),
    )
}

fn empirical_rates() -> Verdict {
    const TRIALS: usize = 100_000;
    let fp = FailureParams::default();
    let policy = AgentPolicy::default();
    let s = TopologySnapshot::from_edges(2, &[(0, 1)], None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let moved = (0..TRIALS)
        .filter(|_| {
            let mut a = TravelAgent::new(0, 0, 2, 0, 1.0, policy.retry_budget);
            attempt_migration(&mut a, 1, &s, fp.p_t_migration, &policy, 1, &mut rng).unwrap() == Migration::Moved
        })
        .count() as f64
        / TRIALS as f64;
    let rp = RadioParams::default();
    let failed = (0..TRIALS)
        .filter(|_| radio::link_up(10.0, &rp, &fp, Some(LinkState::Up), 1.0, &mut rng) == LinkState::Down)
        .count() as f64
        / TRIALS as f64;
    let ok = (moved - fp.p_t_migration).abs() <= 0.01 && (failed - fp.lfp).abs() <= 0.01;
    verdict(
        ok,
        format!(
            "migration {moved:.4} vs p_t {}, link failure {failed:.4} vs lfp {}",
            fp.p_t_migration, fp.lfp
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("max_fr plateau", max_fr_plateau),
        ("agent count drop", agent_count_drop),
        ("lfp threshold", lfp_threshold),
        ("mobility convergence", mobility_convergence),
        ("size scalability", size_scalability),
        ("reachability oracle", reachability_oracle),
        ("routing oracle", routing_oracle),
        ("formula checks", formula_checks),
        ("byte-identical output", byte_identical_output),
        ("empirical rates", empirical_rates),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        failures += usize::from(!v.pass);
        println!(
            "criterion {:>2} {} {name} ({:.1}s): {}",
            i + 1,
            if v.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            v.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
