use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use spingate::control::{
    control_matrix, grape_optimize, hopping_matrix, scaling_study, Ascent, ControlProblem, GrapeOptions, TargetGate,
};
use spingate::degeneracy::{
    construct_lifting_operator, degenerate_levels, detect_degeneracies, lifted_sector, verify_lifted, LiftingOperator,
    ShiftPlan,
};
use spingate::infection::{infection_closure, minimal_infecting_set, SearchMode};
use spingate::lie::{closure, is_algebraically_propagating, is_controllable, random_pair_universality_test};
use spingate::network::{
    load_network, quadratic_spec_from_chain, random_connected, save_network, GatewaySet, ModelKind, ParameterRanges, Sign,
    SpinNetwork,
};
use spingate::pauli::{commutator, heisenberg_coupling, local_su2, PauliSum, PauliWord};
use spingate::tomography::{
    add_noise, exact_quadratic_spectral_data, exact_spectral_data, extract_spectrum, quadratic_sampling_requirements,
    reconstruct_couplings, reconstruct_quadratic_chain, sampling_requirements, simulate_quadratic_signal, simulate_signal,
    FourierOptions, NoiseModel, QuadraticPrior, ReconstructionResult, SamplingOptions, SamplingPlan, SpectralData,
};

use crate::files::{read_signal, read_text, write_pulse, write_scaling, write_signal, write_text, CliError, CliResult};
use crate::{AscentKind, Command, GrapeArgs, Mode, Model, Outcome, ScalingTarget, Tomo};

pub fn run(command: Command) -> CliResult<Outcome> {
    match command {
        Command::Infect { net, gateway } => infect(&net, gateway.as_deref()),
        Command::MinGateway { net, mode, cap } => min_gateway(&net, mode, cap),
        Command::Controllable { net, gateway, cap } => controllable(&net, gateway.as_deref(), cap),
        Command::Propagating { model, delta, c, terms } => propagating(model, delta, c, terms.as_deref()),
        Command::Universality { n, trials, seed, cap } => universality(n, trials, seed, cap),
        Command::Tomo(t) => tomo(t),
        Command::Lift { net, gateway, homogeneous, out } => lift(&net, gateway.as_deref(), homogeneous, &out),
        Command::Grape { grape, n, target, t, couplings, out } => {
            grape_single(&grape, n, &target, t, couplings.as_deref(), &out)
        }
        Command::GrapeScaling { grape, n, target, out } => grape_scaling(&grape, &n, target, &out),
        Command::Demo { n, seed, noise, extra_edges, margin, out_dir } => {
            demo(n, seed, noise, extra_edges, margin, out_dir.as_deref())
        }
    }
}

fn outcome(positive: bool) -> Outcome {
    if positive {
        Outcome::Success
    } else {
        Outcome::Negative
    }
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> CliResult<Vec<T>> {
    text.split(',')
        .map(|s| s.trim().parse().map_err(|_| CliError::Usage(format!("bad {what} `{s}` in `{text}`"))))
        .collect()
}

fn gateway_for(net: &SpinNetwork, given: Option<&str>) -> CliResult<GatewaySet> {
    let nodes = match given {
        Some(text) => parse_list(text, "gateway node")?,
        None if !net.gateway.is_empty() => net.gateway.clone(),
        None => return Err(CliError::Usage("no gateway: pass --gateway or declare one in the network file".into())),
    };
    Ok(GatewaySet::new(nodes, net.n)?)
}

fn fmt_nodes(nodes: &[usize]) -> String {
    nodes.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

fn infect(path: &Path, gateway: Option<&str>) -> CliResult<Outcome> {
    let net = load_network(path)?;
    let g = gateway_for(&net, gateway)?;
    let out = infection_closure(&net, &g);
    println!("gateway {{{}}}", fmt_nodes(g.nodes()));
    for (k, (by, new)) in out.sequence.steps.iter().enumerate() {
        println!("step {}: {by} infects {new}", k + 1);
    }
    let covers = out.covers(net.n);
    println!("infected {}/{} nodes: {}", out.infected.len(), net.n, if covers { "infecting" } else { "not infecting" });
    Ok(outcome(covers))
}

fn min_gateway(path: &Path, mode: Mode, cap: usize) -> CliResult<Outcome> {
    let net = load_network(path)?;
    let mode = match mode {
        Mode::Exhaustive => SearchMode::Exhaustive,
        Mode::Greedy => SearchMode::Greedy,
    };
    let found = minimal_infecting_set(&net, mode, cap)?;
    println!(
        "{} gateway of size {}: {{{}}}",
        if found.heuristic { "heuristic" } else { "minimal" },
        found.gateway.len(),
        fmt_nodes(found.gateway.nodes())
    );
    Ok(Outcome::Success)
}

fn controllable(path: &Path, gateway: Option<&str>, cap: usize) -> CliResult<Outcome> {
    let net = load_network(path)?;
    let g = gateway_for(&net, gateway)?;
    let c = is_controllable(&net, &g, cap)?;
    println!(
        "dynamical Lie algebra dim {} of {} from {{{}}}: {}",
        c.dim,
        c.target,
        fmt_nodes(g.nodes()),
        if c.controllable { "controllable" } else { "not controllable" }
    );
    Ok(outcome(c.controllable))
}

fn parse_terms(text: &str) -> CliResult<PauliSum> {
    let mut sum: Option<PauliSum> = None;
    for part in text.split(',') {
        let (word, coef) = part
            .split_once(':')
            .ok_or_else(|| CliError::Usage(format!("expected WORD:coefficient, got `{part}`")))?;
        let coef: f64 = coef.trim().parse().map_err(|_| CliError::Usage(format!("bad coefficient in `{part}`")))?;
        let word = word.trim();
        if word.len() != 2 {
            return Err(CliError::Usage(format!("`{word}` is not a two-site word")));
        }
        let term = PauliSum::term(2, PauliWord::parse(word)?, coef);
        sum = Some(match sum {
            Some(s) => s.add(&term),
            None => term,
        });
    }
    sum.ok_or_else(|| CliError::Usage("no terms given".into()))
}

fn propagating(model: Model, delta: f64, c: f64, terms: Option<&str>) -> CliResult<Outcome> {
    let coupling = match (terms, model) {
        (Some(t), _) => parse_terms(t)?,
        (None, Model::Heisenberg) => heisenberg_coupling(2, 1, 2, c, delta),
        (None, Model::Ising) => PauliSum::parse_term("ZZ", c)?,
    };
    let propagating = is_algebraically_propagating(&coupling)?;
    let mut gens: Vec<PauliSum> = local_su2(2, 1).iter().map(|s| commutator(&coupling, s)).collect();
    gens.extend(local_su2(2, 1));
    let dim = closure(&gens, 2)?.dim();
    println!("closure dim {dim} of 15: {}", if propagating { "algebraically propagating" } else { "not propagating" });
    Ok(outcome(propagating))
}

fn universality(n: usize, trials: usize, seed: u64, cap: usize) -> CliResult<Outcome> {
    println!("seed {seed}");
    let rate = random_pair_universality_test(n, trials, seed, cap)?;
    let hits = (rate * trials as f64).round() as usize;
    println!("{hits}/{trials} random pairs generate u({})", 1usize << n);
    Ok(outcome(hits == trials))
}

fn sampling_plan(net: &SpinNetwork, margin: f64) -> CliResult<SamplingPlan> {
    let opts = SamplingOptions { resolution_margin: margin, ..Default::default() };
    Ok(if net.model == ModelKind::ExcitationPreserving {
        sampling_requirements(net, &opts)?
    } else {
        quadratic_sampling_requirements(&quadratic_spec_from_chain(net)?, &opts)?
    })
}

fn tomo(t: Tomo) -> CliResult<Outcome> {
    match t {
        Tomo::Simulate { net, gateway, dt, steps, margin, noise, shots, seed, out } => {
            let net = load_network(&net)?;
            let plan = sampling_plan(&net, margin)?;
            let dt = dt.unwrap_or(plan.dt);
            let steps = match (steps, plan.steps) {
                (Some(k), _) | (None, Some(k)) => k,
                (None, None) => {
                    return Err(CliError::Usage("degenerate spectrum has no finite record length; pass --steps".into()))
                }
            };
            println!("seed {seed}");
            println!("dt {dt}, {steps} samples, T {}", (steps - 1) as f64 * dt);
            let ts = if net.model == ModelKind::ExcitationPreserving {
                simulate_signal(&net, &gateway_for(&net, gateway.as_deref())?, dt, steps)?
            } else {
                simulate_quadratic_signal(&quadratic_spec_from_chain(&net)?, dt, steps)?
            };
            let model = match shots {
                Some(shots) => NoiseModel::Shots { shots },
                None if noise > 0.0 => NoiseModel::Gaussian { sigma: noise },
                None => NoiseModel::None,
            };
            let ts = add_noise(&ts, model, &mut ChaCha8Rng::seed_from_u64(seed))?;
            write_signal(&out, &ts)?;
            println!("wrote {} records for nodes {{{}}}", ts.len() * ts.values.len(), fmt_nodes(&ts.values.keys().copied().collect::<Vec<_>>()));
            Ok(Outcome::Success)
        }
        Tomo::Spectrum { input, out, levels, reference } => {
            let ts = read_signal(&input, reference)?;
            let opts = FourierOptions { expected_levels: levels, ..Default::default() };
            let sd = extract_spectrum(&ts, &opts)?;
            write_text(&out, &sd.to_json())?;
            println!("{} levels from {} samples at dt {}", sd.len(), ts.len(), ts.dt);
            Ok(Outcome::Success)
        }
        Tomo::Reconstruct { net, spectrum, exact, fourier: _, gateway, report } => {
            let net = load_network(&net)?;
            let (sd, mode) = if exact {
                let sd = if net.model == ModelKind::ExcitationPreserving {
                    exact_spectral_data(&net, &gateway_for(&net, gateway.as_deref())?)?
                } else {
                    exact_quadratic_spectral_data(&quadratic_spec_from_chain(&net)?)?
                };
                (sd, "exact")
            } else {
                let path = spectrum.expect("clap requires --spectrum without --exact");
                (SpectralData::from_json(&read_text(&path)?, &path)?, "fourier")
            };
            let result = reconstruct(&net, &sd);
            write_report(&report, mode, &result)?;
            match result {
                Ok(r) => {
                    print_estimates(&r);
                    Ok(Outcome::Success)
                }
                Err(e) => Err(e.into()),
            }
        }
    }
}

fn reconstruct(net: &SpinNetwork, sd: &SpectralData) -> spingate::Result<ReconstructionResult> {
    let result = if net.model == ModelKind::ExcitationPreserving {
        let gateway = GatewaySet::new(sd.overlaps.keys().copied(), net.n)?;
        reconstruct_couplings(&net.topology(), &gateway, sd, &Default::default())?
    } else {
        let field_signs: Vec<Sign> = net.fields.iter().map(|&b| Sign::of(b)).collect();
        let prior = QuadraticPrior { n: net.n, gamma: net.gamma, coupling_signs: &net.signs, field_signs: Some(&field_signs) };
        reconstruct_quadratic_chain(&prior, sd, &Default::default())?
    };
    Ok(result.with_truth(net))
}

fn write_report(path: &Path, mode: &str, result: &spingate::Result<ReconstructionResult>) -> CliResult<()> {
    let doc = match result {
        Ok(r) => json!({
            "mode": mode,
            "refusal": null,
            "couplings": r.couplings,
            "fields": r.fields,
            "e0": r.e0,
            "field_condition": r.field_condition,
            "max_abs_error": r.max_abs_error(),
            "max_rel_error": r.max_rel_error(),
        }),
        Err(e) => json!({
            "mode": mode,
            "refusal": e.to_string(),
            "couplings": [],
            "fields": [],
        }),
    };
    write_text(path, &serde_json::to_string_pretty(&doc).expect("report serializes"))
}

fn print_estimates(r: &ReconstructionResult) {
    for c in &r.couplings {
        println!("c_{},{} = {:.10} (file {:.10})", c.a, c.b, c.value, c.truth.unwrap_or(f64::NAN));
    }
    for b in &r.fields {
        println!("b_{} = {:.10} (file {:.10})", b.node, b.value, b.truth.unwrap_or(f64::NAN));
    }
    if let (Some(abs), Some(rel)) = (r.max_abs_error(), r.max_rel_error()) {
        println!("max |error| {abs:.3e}, max relative error {rel:.3e}");
    }
}

fn lift(path: &Path, gateway: Option<&str>, homogeneous: Option<f64>, out: &Path) -> CliResult<Outcome> {
    let net = load_network(path)?;
    let g = gateway_for(&net, gateway)?;
    let levels = detect_degeneracies(&net)?;
    if levels.is_empty() {
        println!("spectrum is nondegenerate");
    }
    for level in &levels {
        println!("{}-fold level at {:.10}", level.multiplicity(), level.energy);
    }
    let op = match homogeneous {
        Some(h) => LiftingOperator::homogeneous_field(net.n, g, h),
        None => construct_lifting_operator(&net, &g, &ShiftPlan::default())?,
    };
    let gap = verify_lifted(&net, &op)?;
    let remaining = degenerate_levels(&lifted_sector(&net, &op)?);
    write_text(out, &op.to_json(gap))?;
    println!("minimum gap after lifting {gap:.6e}");
    if !remaining.is_empty() {
        println!("{} degenerate level(s) remain", remaining.len());
    }
    Ok(outcome(remaining.is_empty()))
}

fn grape_options(args: &GrapeArgs) -> GrapeOptions {
    GrapeOptions {
        segments: args.segments,
        epsilon: args.eps,
        max_iterations: args.max_iterations,
        bound: args.bound,
        seed: args.seed,
        ascent: match args.ascent {
            AscentKind::Lbfgs => GrapeOptions::default().ascent,
            AscentKind::Gradient => Ascent::Gradient,
        },
        ..Default::default()
    }
}

fn parse_target(n: usize, text: &str) -> CliResult<TargetGate> {
    let bad = || CliError::Usage(format!("target must be swap:K,L or logical:M, got `{text}`"));
    let (kind, rest) = text.split_once(':').ok_or_else(bad)?;
    match kind {
        "swap" => match parse_list::<usize>(rest, "site")?[..] {
            [k, l] => Ok(TargetGate::swap(n, k, l)?),
            _ => Err(bad()),
        },
        "logical" => Ok(TargetGate::logical_swap(n, rest.trim().parse().map_err(|_| bad())?)?),
        _ => Err(bad()),
    }
}

fn grape_single(args: &GrapeArgs, n: usize, target: &str, t: Option<f64>, couplings: Option<&str>, out: &Path) -> CliResult<Outcome> {
    if n < 2 {
        return Err(CliError::Usage("need at least 2 sites".into()));
    }
    let c: Vec<f64> = match couplings {
        Some(text) => parse_list(text, "coupling")?,
        None => vec![1.0; n - 1],
    };
    if c.len() != n - 1 {
        return Err(CliError::Usage(format!("{} couplings for {n} sites", c.len())));
    }
    let duration = t.unwrap_or((n * n) as f64);
    let problem = ControlProblem::new(hopping_matrix(&c), control_matrix(n), parse_target(n, target)?)?;
    println!("seed {}", args.seed);
    let result = grape_optimize(&problem, duration, &grape_options(args))?;
    write_pulse(out, &result.schedule)?;
    println!(
        "T {duration}, {} segments, {} iterations, infidelity {:.3e}: {}",
        result.schedule.segments(),
        result.iterations,
        result.schedule.infidelity.unwrap_or(1.0),
        if result.converged { "converged" } else { "not converged" }
    );
    Ok(outcome(result.converged))
}

fn parse_range(text: &str) -> CliResult<Vec<usize>> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts[..] {
        [_] => parse_list(text, "chain length"),
        [a, b] | [a, b, _] => {
            let num = |s: &str| s.trim().parse::<usize>().map_err(|_| CliError::Usage(format!("bad range `{text}`")));
            let step = if parts.len() == 3 { num(parts[2])? } else { 1 };
            if step == 0 {
                return Err(CliError::Usage("range step must be positive".into()));
            }
            Ok((num(a)?..=num(b)?).step_by(step).collect())
        }
        _ => Err(CliError::Usage(format!("bad range `{text}`"))),
    }
}

fn grape_scaling(args: &GrapeArgs, n: &str, target: ScalingTarget, out: &Path) -> CliResult<Outcome> {
    let ns = parse_range(n)?;
    let target = match target {
        ScalingTarget::Logical => spingate::control::ScalingTarget::LogicalEnd,
        ScalingTarget::Physical => spingate::control::ScalingTarget::PhysicalEnd,
    };
    println!("seed {}", args.seed);
    let rows = scaling_study(&ns, target, &grape_options(args))?;
    write_scaling(out, &rows)?;
    for r in &rows {
        println!("N {:>3}  T {:>6}  infidelity {:.3e}  iterations {}", r.n, r.duration, r.infidelity, r.iterations);
    }
    Ok(outcome(rows.iter().all(|r| r.converged)))
}

fn demo(n: usize, seed: u64, noise: f64, extra_edges: f64, margin: f64, out_dir: Option<&Path>) -> CliResult<Outcome> {
    if !(2..=spingate::infection::DEFAULT_EXHAUSTIVE_CAP).contains(&n) {
        return Err(CliError::Usage(format!("demo supports 2 ≤ N ≤ {}", spingate::infection::DEFAULT_EXHAUSTIVE_CAP)));
    }
    println!("seed {seed}");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ranges = ParameterRanges { random_sign: true, ..Default::default() };
    let net = random_connected(n, extra_edges, 1.0, &ranges, &mut rng);
    let gateway = minimal_infecting_set(&net, SearchMode::Exhaustive, spingate::infection::DEFAULT_EXHAUSTIVE_CAP)?.gateway;
    let net = net.with_gateway(gateway.nodes().to_vec());
    println!("network: {n} nodes, {} edges, gateway {{{}}}", net.couplings.len(), fmt_nodes(gateway.nodes()));

    let plan = sampling_plan(&net, margin)?;
    let Some(steps) = plan.steps else {
        println!("spectrum is degenerate; run `lift` first");
        return Ok(Outcome::Negative);
    };
    println!("sampling: dt {:.6}, {steps} samples, T {:.3}", plan.dt, plan.duration().unwrap_or(0.0));
    let clean = simulate_signal(&net, &gateway, plan.dt, steps)?;
    let model = if noise > 0.0 { NoiseModel::Gaussian { sigma: noise } } else { NoiseModel::None };
    let ts = add_noise(&clean, model, &mut rng)?;
    let (estimate, result) = match extract_spectrum(&ts, &FourierOptions::expecting(n)) {
        Ok(sd) => {
            let r = reconstruct(&net, &sd);
            (Some(sd), r)
        }
        Err(e) => (None, Err(e)),
    };

    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(|e| CliError::File { path: dir.to_path_buf(), message: e.to_string() })?;
        save_network(&net, dir.join("network.json"))?;
        write_signal(&dir.join("signal.csv"), &ts)?;
        if let Some(sd) = &estimate {
            write_text(&dir.join("spectrum.json"), &sd.to_json())?;
        }
        write_report(&dir.join("report.json"), "fourier", &result)?;
    }
    match result {
        Ok(r) => {
            print_estimates(&r);
            Ok(Outcome::Success)
        }
        Err(e) => Err(e.into()),
    }
}
