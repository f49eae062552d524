use std::collections::BTreeMap;

use opwire::diagram::{substitute, tensor};
use opwire::testkit::{gen, oracle, rng, uav};
use opwire::types::{decode, valuation_count};
use opwire::{apply_moore, Interface, Limits, MooreMachine, Port, Side, Supplier, Valuation, ValueType, WiringDiagram};
use rand::Rng;

fn bit_io(ins: &[&str], outs: &[&str]) -> Interface {
    Interface::new(
        ins.iter().map(|n| Port::new(*n, ValueType::bit())).collect(),
        outs.iter().map(|n| Port::new(*n, ValueType::bit())).collect(),
    )
}

fn delay(init: usize) -> MooreMachine {
    MooreMachine::from_fn(bit_io(&["u"], &["y"]), vec!["0".into(), "1".into()], init, |s| vec![s], |_, v| v[0]).unwrap()
}

fn random_inputs(r: &mut impl Rng, iface: &Interface, h: usize) -> Vec<Valuation> {
    let radices = iface.radices(Side::Input);
    (0..h).map(|_| radices.iter().map(|&k| r.gen_range(0..k)).collect()).collect()
}

fn all_sequences(iface: &Interface, h: usize) -> Vec<Vec<Valuation>> {
    let radices = iface.radices(Side::Input);
    let n = valuation_count(&radices) as usize;
    let seq_radices = vec![n; h];
    (0..valuation_count(&seq_radices) as usize)
        .map(|k| decode(&seq_radices, k).into_iter().map(|i| decode(&radices, i)).collect())
        .collect()
}

#[test]
fn delays_in_series_delay_twice() {
    let x = bit_io(&["u"], &["y"]);
    let d = WiringDiagram::new(x.clone())
        .with_box("P", x.clone())
        .with_box("Q", x.clone())
        .wire("P", "u", Supplier::outer("u"))
        .wire("Q", "u", Supplier::inner("P", "y"))
        .expose("y", "Q", "y");
    let assign = BTreeMap::from([("P".to_string(), delay(0)), ("Q".to_string(), delay(0))]);
    let m = apply_moore(&d, &assign, &Limits::default()).unwrap();
    let t = m.simulate(&[vec![1], vec![0], vec![1]]).unwrap();
    assert_eq!(t.outputs, vec![vec![0], vec![0], vec![1]]);
    assert_eq!(m.state_count(), 4);
}

#[test]
fn self_loop_holds_its_state() {
    let x = bit_io(&["u"], &["y"]);
    let d = WiringDiagram::new(bit_io(&[], &["y"]))
        .with_box("P", x)
        .wire("P", "u", Supplier::inner("P", "y"))
        .expose("y", "P", "y");
    let assign = BTreeMap::from([("P".to_string(), delay(1))]);
    let m = apply_moore(&d, &assign, &Limits::default()).unwrap();
    let t = m.simulate(&vec![vec![]; 5]).unwrap();
    assert!(t.outputs.iter().all(|y| y == &vec![1]));
}

#[test]
fn traces_count_and_edge_cases() {
    let limits = Limits::default();
    let zero = delay(0).traces(0, &limits).unwrap();
    assert_eq!(zero.len(), 1);
    assert!(zero.iter().next().unwrap().is_empty());
    let two = delay(1).traces(2, &limits).unwrap();
    assert_eq!(two.len(), 4);
    assert!(two.iter().all(|t| t.outputs[0] == vec![1]));
    assert!(delay(0).simulate(&[]).unwrap().is_empty());
    assert_eq!(delay(0).step(0, &[1]).unwrap(), (1, vec![0]));
}

#[test]
fn traces_match_brute_force() {
    let limits = Limits::default();
    for seed in 0..60 {
        let mut r = rng(seed);
        let iface = gen::interface(&mut r, &gen::Shape::bits(1, 2), 0, 0);
        let m = gen::moore(&mut r, &iface, 2);
        for h in 0..=3 {
            assert_eq!(m.traces(h, &limits).unwrap(), oracle::brute_traces(&m, h), "seed {seed} h {h}");
        }
    }
}

#[test]
fn parallel_and_sequential_composites_agree() {
    for seed in 0..20 {
        let mut r = rng(50 + seed);
        let d = gen::diagram(&mut r, &gen::Shape::bits(4, 3));
        let assign = gen::moore_assignment(&mut r, &d, 2);
        let a = apply_moore(&d, &assign, &Limits::default()).unwrap();
        let b = apply_moore(&d, &assign, &Limits::sequential()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.traces(3, &Limits::default()).unwrap(), b.traces(3, &Limits::sequential()).unwrap());
    }
}

#[test]
fn composite_state_count_is_the_product() {
    for seed in 0..30 {
        let mut r = rng(100 + seed);
        let d = gen::diagram(&mut r, &gen::Shape::bits(4, 2));
        let assign = gen::moore_assignment(&mut r, &d, 3);
        let m = apply_moore(&d, &assign, &Limits::default()).unwrap();
        let product: usize = assign.values().map(MooreMachine::state_count).product();
        assert_eq!(m.state_count(), product);
    }
}

#[test]
fn nested_and_staged_composites_are_trace_equal() {
    let limits = Limits::default();
    for seed in 0..60 {
        let mut r = rng(200 + seed);
        let model = gen::two_level_moore(&mut r, &gen::Shape::bits(4, 3), 2);
        let nested = model.composite_moore(&limits).unwrap();

        let (slot, child) = model.children.iter().next().unwrap();
        let inner = apply_moore(&child.diagram, &child.moore, &limits).unwrap();
        let mut assign = model.moore.clone();
        assign.insert(slot.clone(), inner);
        let staged = apply_moore(&model.diagram, &assign, &limits).unwrap();

        assert_eq!(nested.traces(5, &limits).unwrap(), staged.traces(5, &limits).unwrap(), "seed {seed}");
    }
}

#[test]
fn tensor_runs_components_side_by_side() {
    let limits = Limits::default();
    for seed in 0..40 {
        let mut r = rng(300 + seed);
        let shape = gen::Shape::bits(2, 2);
        let f = gen::diagram(&mut r, &shape);
        let g = gen::diagram(&mut r, &shape).map_box_ids(|id| format!("g{id}"));
        let fa = gen::moore_assignment(&mut r, &f, 2);
        let ga = gen::moore_assignment(&mut r, &g, 2);
        let both: BTreeMap<_, _> = fa.clone().into_iter().chain(ga.clone()).collect();

        let mf = apply_moore(&f, &fa, &limits).unwrap();
        let mg = apply_moore(&g, &ga, &limits).unwrap();
        let mt = apply_moore(&tensor(&f, &g), &both, &limits).unwrap();
        assert_eq!(mt.state_count(), mf.state_count() * mg.state_count());

        let split = f.outer.inputs.len();
        for _ in 0..10 {
            let seq = random_inputs(&mut r, mt.interface(), 6);
            let left: Vec<Valuation> = seq.iter().map(|v| v[..split].to_vec()).collect();
            let right: Vec<Valuation> = seq.iter().map(|v| v[split..].to_vec()).collect();
            let yf = mf.simulate(&left).unwrap().outputs;
            let yg = mg.simulate(&right).unwrap().outputs;
            let joined: Vec<Valuation> = yf.into_iter().zip(yg).map(|(a, b)| [a, b].concat()).collect();
            assert_eq!(mt.simulate(&seq).unwrap().outputs, joined, "seed {seed}");
        }
    }
}

#[test]
fn composite_matches_cosimulation_on_three_box_diagrams() {
    let limits = Limits::default();
    let mut seed = 400;
    let mut checked = 0;
    while checked < 50 {
        seed += 1;
        let mut r = rng(seed);
        let d = gen::diagram(&mut r, &gen::Shape::bits(3, 3));
        if d.inner.len() != 3 {
            continue;
        }
        checked += 1;
        let assign = gen::moore_assignment(&mut r, &d, 2);
        let m = apply_moore(&d, &assign, &limits).unwrap();
        let sequences = if valuation_count(&d.outer.radices(Side::Input)) <= 4 {
            all_sequences(&d.outer, 5)
        } else {
            (0..300).map(|_| random_inputs(&mut r, &d.outer, 5)).collect()
        };
        for seq in sequences {
            assert_eq!(
                m.simulate(&seq).unwrap().outputs,
                oracle::cosimulate_moore(&d, &assign, &seq),
                "seed {seed}"
            );
        }
    }
}

#[test]
fn uav_composite_has_eight_states_and_matches_cosimulation() {
    let model = uav::flat_model();
    let m = apply_moore(&model.diagram, &model.moore, &Limits::default()).unwrap();
    assert_eq!(m.state_count(), 8);
    assert_eq!(m.states()[m.init()], "(lo,down,lo)");
    for seq in all_sequences(&model.diagram.outer, 5) {
        assert_eq!(m.simulate(&seq).unwrap().outputs, oracle::cosimulate_moore(&model.diagram, &model.moore, &seq));
    }
}

#[test]
fn substituting_a_composite_matches_flattening() {
    let limits = Limits::default();
    let model = uav::model();
    let child = &model.children["D"];
    let staged_d = apply_moore(&child.diagram, &child.moore, &limits).unwrap();
    let mut assign = model.moore.clone();
    assign.insert("D".into(), staged_d);
    let staged = apply_moore(&model.diagram, &assign, &limits).unwrap();

    let flat = substitute(&model.diagram, "D", &child.diagram).unwrap();
    let mut leaves = model.moore.clone();
    leaves.remove("D");
    for (k, m) in &child.moore {
        leaves.insert(format!("D/{k}"), m.clone());
    }
    let nested = apply_moore(&flat, &leaves, &limits).unwrap();
    assert!(opwire::trace_equivalent(&staged, &nested, 8, &limits).unwrap());
}
