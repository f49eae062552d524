//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use opwire::diagram::{identity_wiring, substitute};
use opwire::format::{parse_model, serialize_model};
use opwire::hierarchy::{check_refinement_moore, RefinementOutcome};
use opwire::lti::DEFAULT_PIVOT_EPS;
use opwire::testkit::{gen, oracle, rng};
use opwire::{
    apply_lti, apply_moore, check_naturality, compose_contracts, lti_equivalent, Error, HierarchicalModel, Interface,
    Limits, LtiSystem, Matrix, MooreMachine, Port, Supplier, ValueType, WiringDiagram,
};
use rand::seq::SliceRandom;

type Verdict = Result<String, String>;

fn within(start: Instant, budget: Duration, detail: String) -> Verdict {
    let took = start.elapsed();
    if took < budget {
        Ok(format!("{detail}; {:.2}s < {}s", took.as_secs_f64(), budget.as_secs()))
    } else {
        Err(format!("{detail}; took {:.2}s, budget {}s", took.as_secs_f64(), budget.as_secs()))
    }
}

fn categorical_laws() -> Verdict {
    let start = Instant::now();
    let shape = gen::Shape::bits(4, 3);
    let mut failures = Vec::new();
    let n = 120;
    for seed in 0..n {
        let mut r = rng(10_000 + seed);
        let f = gen::diagram(&mut r, &shape);
        let slot = f.inner.choose(&mut r).unwrap().clone();
        let g = gen::diagram_with_outer(&mut r, &shape, slot.interface.clone());
        let x = g.inner.choose(&mut r).unwrap().clone();
        let h = gen::diagram_with_outer(&mut r, &shape, x.interface.clone());

        let left = substitute(&f, &slot.id, &g).and_then(|fg| substitute(&fg, &format!("{}/{}", slot.id, x.id), &h));
        let right = substitute(&g, &x.id, &h).and_then(|gh| substitute(&f, &slot.id, &gh));
        let assoc = matches!((&left, &right), (Ok(a), Ok(b)) if a == b);
        let right_unit = substitute(&f, &slot.id, &identity_wiring(&slot.interface)).is_ok_and(|d| d.structurally_eq(&f));
        let left_unit = substitute(&identity_wiring(&f.outer), "id", &f).is_ok_and(|d| d.structurally_eq(&f));
        if !(assoc && right_unit && left_unit) {
            failures.push(seed);
        }
    }
    if !failures.is_empty() {
        return Err(format!("{} of {n} diagrams failed (seeds {failures:?})", failures.len()));
    }
    within(start, Duration::from_secs(5), format!("{n} diagrams, associativity and both unit laws, 0 failures"))
}

fn moore_functoriality() -> Verdict {
    let start = Instant::now();
    let limits = Limits::default();
    let n = 60;
    for seed in 0..n {
        let mut r = rng(20_000 + seed);
        let model = gen::two_level_moore(&mut r, &gen::Shape::bits(4, 3), 2);
        let nested = model.composite_moore(&limits).map_err(|e| e.to_string())?;
        let (slot, child) = model.children.iter().next().unwrap();
        let mut assign = model.moore.clone();
        assign.insert(slot.clone(), apply_moore(&child.diagram, &child.moore, &limits).map_err(|e| e.to_string())?);
        let staged = apply_moore(&model.diagram, &assign, &limits).map_err(|e| e.to_string())?;
        if nested.traces(5, &limits).unwrap() != staged.traces(5, &limits).unwrap() {
            return Err(format!("seed {seed}: trace sets differ at horizon 5"));
        }
    }
    within(start, Duration::from_secs(10), format!("{n} instances, trace sets equal at horizon 5"))
}

fn lti_functoriality() -> Verdict {
    let start = Instant::now();
    let (mut seed, mut done, n) = (30_000u64, 0, 60);
    while done < n {
        seed += 1;
        let mut r = rng(seed);
        let model = gen::two_level_lti(&mut r, &gen::Shape::reals(4, 3), 2);
        let (slot, child) = model.children.iter().next().unwrap();
        let (Ok(nested), Ok(inner)) = (model.composite_lti(DEFAULT_PIVOT_EPS), apply_lti(&child.diagram, &child.lti, DEFAULT_PIVOT_EPS)) else {
            continue;
        };
        done += 1;
        let mut assign = model.lti.clone();
        assign.insert(slot.clone(), inner);
        let staged = apply_lti(&model.diagram, &assign, DEFAULT_PIVOT_EPS).map_err(|e| format!("seed {seed}: {e}"))?;
        if !lti_equivalent(&nested, &staged, 1e-9).unwrap() {
            return Err(format!("seed {seed}: Markov parameters differ beyond 1e-9"));
        }
    }
    within(start, Duration::from_secs(5), format!("{n} well-posed instances equivalent at tol 1e-9"))
}

fn scalar(ins: &[&str], outs: &[&str]) -> Interface {
    Interface::new(
        ins.iter().map(|n| Port::new(*n, ValueType::Real)).collect(),
        outs.iter().map(|n| Port::new(*n, ValueType::Real)).collect(),
    )
}

fn closed_loop() -> Verdict {
    let x = scalar(&["u"], &["y"]);
    let d = WiringDiagram::new(scalar(&[], &["y"]))
        .with_box("P", x.clone())
        .with_box("K", x.clone())
        .wire("P", "u", Supplier::inner("K", "y"))
        .wire("K", "u", Supplier::inner("P", "y"))
        .expose("y", "P", "y");
    let one = |v: f64| Matrix::from_rows(&[vec![v]]);
    let (a, b, c, k) = (1.0, 1.0, 1.0, -0.5);
    let plant = LtiSystem::new(x.clone(), one(a), one(b), one(c), one(0.0)).unwrap();
    let gain = LtiSystem::static_gain(x.clone(), one(k)).unwrap();
    let s = apply_lti(&d, &BTreeMap::from([("P".into(), plant), ("K".into(), gain)]), DEFAULT_PIVOT_EPS).map_err(|e| e.to_string())?;
    let expected = a + b * k * c;
    let err = (s.a().get(0, 0) - expected).abs();
    if err >= 1e-12 {
        return Err(format!("A' = {}, expected {expected}", s.a().get(0, 0)));
    }

    let unity = LtiSystem::static_gain(x, one(1.0)).unwrap();
    // det(I - E_y D) for the 2x2 loop [[1, -1], [-1, 1]]
    let det = 1.0 * 1.0 - (-1.0) * (-1.0);
    let assign = BTreeMap::from([("P".into(), unity.clone()), ("K".into(), unity)]);
    match apply_lti(&d, &assign, DEFAULT_PIVOT_EPS) {
        Err(Error::IllPosedLoop { .. }) if det == 0.0 => Ok(format!("A' = [{}] (|error| = {err:e}); unity loop IllPosedLoop (det = 0)", s.a().get(0, 0))),
        other => Err(format!("unity loop gave {other:?}")),
    }
}

fn contract_oracle() -> Verdict {
    let start = Instant::now();
    let limits = Limits::default();
    let n = 120;
    for seed in 0..n {
        let mut r = rng(40_000 + seed);
        let d = gen::diagram(&mut r, &gen::Shape::bits(3, 2));
        let assign = gen::contract_assignment(&mut r, &d, 0.6);
        let c = compose_contracts(&d, &assign, &limits).map_err(|e| e.to_string())?;
        if c.pairs() != &oracle::brute_compose(&d, &assign) {
            return Err(format!("seed {seed}: composite differs from the nested-loop enumeration"));
        }
    }
    within(start, Duration::from_secs(10), format!("{n} random assignments match the nested-loop enumerator"))
}

fn naturality() -> Verdict {
    let start = Instant::now();
    let limits = Limits::default();
    let n = 240;
    let mut traces = 0;
    for seed in 0..n {
        let mut r = rng(50_000 + seed);
        let d = gen::diagram(&mut r, &gen::Shape::bits(3, 2));
        let assign = gen::moore_assignment(&mut r, &d, 2);
        let h = 1 + (seed as usize % 3);
        let report = check_naturality(&d, &assign, h, &limits).map_err(|e| e.to_string())?;
        if !report.holds() {
            return Err(format!("seed {seed} h {h}: {:?}", report.discrepancy_lines()));
        }
        traces += report.behavior_leg.len();
    }
    within(start, Duration::from_secs(30), format!("{n} assignments, h in 1..=3, {traces} traces, square commutes"))
}

fn bit_delay_chain(n: usize) -> HierarchicalModel {
    let x = Interface::new(vec![Port::new("u", ValueType::bit())], vec![Port::new("y", ValueType::bit())]);
    let delay = MooreMachine::from_fn(x.clone(), vec!["0".into(), "1".into()], 0, |s| vec![s], |_, v| v[0]).unwrap();
    let mut d = WiringDiagram::new(x.clone());
    for k in 0..n {
        let id = format!("P{k}");
        let src = if k == 0 { Supplier::outer("u") } else { Supplier::inner(format!("P{}", k - 1), "y") };
        d = d.with_box(&id, x.clone()).wire(&id, "u", src);
    }
    let mut m = HierarchicalModel::new(d.expose("y", &format!("P{}", n - 1), "y"));
    for k in 0..n {
        m.moore.insert(format!("P{k}"), delay.clone());
    }
    m
}

fn refined(spec: MooreMachine, implementation: HierarchicalModel) -> HierarchicalModel {
    let mut root = HierarchicalModel::new(identity_wiring(implementation.outer()));
    root.moore.insert("id".into(), spec);
    root.children.insert("id".into(), implementation);
    root
}

fn refinement() -> Verdict {
    let limits = Limits::default();
    let tf = gen::SecondOrder {
        den: [0.12, -0.7],
        num: [0.6, 1.5],
        feedthrough: 0.0,
    };
    let (ctrl, obs) = (tf.controllable(), tf.observable());
    if !lti_equivalent(&ctrl, &obs, 1e-9).unwrap() {
        return Err("canonical realizations differ".into());
    }
    let mut c = ctrl.c().clone();
    c.set(0, 0, c.get(0, 0) + 1e-2);
    let bumped = LtiSystem::new(ctrl.interface().clone(), ctrl.a().clone(), ctrl.b().clone(), c, ctrl.d().clone()).unwrap();
    if lti_equivalent(&ctrl, &bumped, 1e-6).unwrap() {
        return Err("1e-2 perturbation not detected".into());
    }

    let two = bit_delay_chain(2);
    let spec = two.composite_moore(&limits).unwrap();
    let own = check_refinement_moore(&refined(spec.clone(), two), "id", None, &limits).map_err(|e| e.to_string())?;
    if !own.holds() {
        return Err(format!("self-refinement failed: {own:?}"));
    }
    match check_refinement_moore(&refined(spec, bit_delay_chain(1)), "id", None, &limits).map_err(|e| e.to_string())? {
        RefinementOutcome::MooreCounterexample(seq) if seq == vec![vec![1], vec![0]] => {
            Ok("canonical forms equivalent at 1e-9, 1e-2 bump rejected, self-refinement holds, single vs double delay fails at u=[1,0]".into())
        }
        other => Err(format!("single vs double delay gave {other:?}")),
    }
}

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

const MODELS: [&str; 5] = ["minimal.model", "uav.model", "uav-perturbed.model", "uav-finite.model", "uav-lti.model"];

fn opwire(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opwire"))
        .current_dir(corpus_dir())
        .args(args)
        .env_remove("OPWIRE_MAX_ENUM")
        .output()
        .expect("binary runs")
}

fn expect_exit(args: &[&str], code: i32) -> Result<Output, String> {
    let o = opwire(args);
    if o.status.code() == Some(code) {
        Ok(o)
    } else {
        Err(format!(
            "`opwire {}` exited {:?}, expected {code}: {}{}",
            args.join(" "),
            o.status.code(),
            String::from_utf8_lossy(&o.stdout),
            String::from_utf8_lossy(&o.stderr)
        ))
    }
}

fn uav_end_to_end() -> Verdict {
    let start = Instant::now();
    for m in MODELS {
        expect_exit(&["validate", m], 0)?;
    }
    for m in ["uav.model", "uav-lti.model"] {
        let flat = expect_exit(&["flatten", m], 0)?;
        let file = parse_model(&String::from_utf8(flat.stdout).unwrap()).map_err(|e| e.to_string())?;
        let ids: Vec<&String> = file.model.diagram.inner.iter().map(|b| &b.id).collect();
        for id in &ids {
            let Some(chain) = file.metadata.get(&format!("provenance:{id}")) else {
                return Err(format!("{m}: no provenance for {id}"));
            };
            let ancestors: Vec<&str> = chain.split(';').filter(|s| !s.is_empty()).collect();
            let complete = ancestors.len() == id.matches('/').count() && ancestors.iter().all(|a| id.starts_with(&format!("{a}/")));
            if !complete {
                return Err(format!("{m}: provenance of {id} is `{chain}`"));
            }
        }
        if ids.len() != file.metadata.keys().filter(|k| k.starts_with("provenance:")).count() {
            return Err(format!("{m}: provenance has entries for missing boxes"));
        }
    }
    let sims = [("uav.model", "uav-inputs.csv"), ("uav-lti.model", "uav-lti-inputs.csv")];
    for (m, inputs) in sims {
        let a = expect_exit(&["simulate", m, "--inputs", inputs, "--horizon", "100"], 0)?;
        let b = expect_exit(&["simulate", m, "--inputs", inputs, "--horizon", "100"], 0)?;
        if a.stdout != b.stdout || a.stdout.iter().filter(|&&c| c == b'\n').count() != 101 {
            return Err(format!("{m}: 100-step simulation not deterministic"));
        }
    }
    for m in ["uav.model", "uav-finite.model"] {
        expect_exit(&["check", m], 0)?;
        let o = expect_exit(&["check-naturality", m, "--horizon", "2"], 0)?;
        if !String::from_utf8_lossy(&o.stdout).starts_with("naturality holds (") {
            return Err(format!("{m}: unexpected naturality output"));
        }
    }
    expect_exit(&["check-refinement", "uav.model", "--box", "D"], 0)?;
    expect_exit(&["check-refinement", "uav-perturbed.model", "--box", "D"], 1)?;
    within(start, Duration::from_secs(10), "validate, flatten, simulate x100, check, check-naturality --horizon 2 on the corpus".into())
}

fn round_trip() -> Verdict {
    for m in MODELS {
        let text = std::fs::read_to_string(corpus_dir().join(m)).map_err(|e| e.to_string())?;
        let parsed = parse_model(&text).map_err(|e| format!("{m}: {e}"))?;
        let again = serialize_model(&parsed);
        if again != text || parse_model(&again).map_err(|e| e.to_string())? != parsed {
            return Err(format!("{m}: not a fixed point of parse and serialize"));
        }
    }
    let runs: Vec<Vec<&str>> = vec![
        vec!["flatten", "uav.model"],
        vec!["check", "uav-perturbed.model"],
        vec!["check-naturality", "uav.model", "--horizon", "3"],
        vec!["check-refinement", "uav-perturbed.model", "--box", "D"],
        vec!["compose-contracts", "uav.model"],
        vec!["export-dot", "uav.model", "--flat"],
        vec!["simulate", "uav-lti.model", "--inputs", "uav-lti-inputs.csv", "--horizon", "50"],
    ];
    for args in &runs {
        let outputs: Vec<Output> = (0..3).map(|_| opwire(args)).collect();
        if outputs.windows(2).any(|w| w[0].stdout != w[1].stdout || w[0].status != w[1].status) {
            return Err(format!("`opwire {}` output varies between runs", args.join(" ")));
        }
    }
    Ok(format!("{} corpus files are fixed points; {} commands byte-identical across 3 runs", MODELS.len(), runs.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 9] = [
        ("categorical laws", categorical_laws),
        ("Moore functoriality", moore_functoriality),
        ("LTI functoriality", lti_functoriality),
        ("closed-loop formula", closed_loop),
        ("contract pullback oracle", contract_oracle),
        ("naturality", naturality),
        ("refinement", refinement),
        ("UAV end-to-end", uav_end_to_end),
        ("round-trip and determinism", round_trip),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("[PASS] {}. {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {}. {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
