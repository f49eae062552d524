//! Regenerates the model corpus: `cargo run -p opwire-cli --example gen_corpus -- <dir>`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use opwire::format::{serialize_model, ModelFile};
use opwire::testkit::uav;
use opwire::{identity_wiring, HierarchicalModel, Interface, MooreMachine, Port, ValueType};

fn file(model: HierarchicalModel, description: &str) -> ModelFile {
    let mut f = ModelFile::new(model);
    f.metadata = BTreeMap::from([
        ("description".to_string(), description.to_string()),
        ("source".to_string(), "illustrative UAV architecture, not a verified reconstruction".to_string()),
    ]);
    f
}

fn minimal() -> ModelFile {
    let x = Interface::new(vec![Port::new("u", ValueType::bit())], vec![Port::new("y", ValueType::bit())]);
    let delay = MooreMachine::from_fn(x.clone(), vec!["0".into(), "1".into()], 0, |s| vec![s], |_, v| v[0]).unwrap();
    let mut model = HierarchicalModel::new(identity_wiring(&x));
    model.moore.insert("id".into(), delay);
    let mut f = ModelFile::new(model);
    f.metadata.insert("description".into(), "one unit delay behind identity wiring".into());
    f
}

fn main() {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "corpus".into()));
    std::fs::create_dir_all(&dir).unwrap();
    let files = [
        ("minimal.model", minimal()),
        ("uav.model", file(uav::model(), "sensor, controller and dynamics loop; dynamics refined into autopilot and airframe")),
        ("uav-perturbed.model", file(uav::perturbed_model(), "as uav.model, but the airframe climbs in calm air with the power off")),
        ("uav-finite.model", file(uav::flat_model(), "flat sensor, controller and dynamics loop with two-state machines")),
        ("uav-lti.model", file(uav::lti_model(), "linear loop; the plant is a transformed realization of autopilot and airframe in series")),
    ];
    for (name, f) in files {
        std::fs::write(dir.join(name), serialize_model(&f)).unwrap();
    }
    std::fs::write(
        dir.join("uav-inputs.csv"),
        "d,e\nhi,calm\nhi,calm\nhi,gust\nlo,calm\nhi,calm\nhi,calm\n",
    )
    .unwrap();
    std::fs::write(
        dir.join("uav-lti-inputs.csv"),
        "d,e\n1,0\n1,0\n1,0.5\n1,-0.5\n0,0\n0,0\n",
    )
    .unwrap();
}
