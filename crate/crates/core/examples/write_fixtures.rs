//! Regenerates the JSON fixtures under `fixtures/`.
//!
//! Run with `cargo run --release --example write_fixtures`.

use std::fs;
use std::path::Path;

use simplicial_energy::fixtures::{
    annulus_tree, bad_triangle, dirichlet_disk, double_tetrahedron, genus2_fan, genus2_subdivided,
    infinite_energy_wheel, torus_identity, Instance,
};
use simplicial_energy::verify::{compare_weights, strongest_cotangent_witness, CompareParams};

fn write<T: serde::Serialize>(dir: &Path, name: &str, value: &T) {
    let path = dir.join(name);
    let json = serde_json::to_string_pretty(value).expect("serializable");
    fs::write(&path, json + "\n").expect("writable fixture directory");
    println!("wrote {}", path.display());
}

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    fs::create_dir_all(&dir).expect("fixture directory");
    let instances: [(&str, Instance); 8] = [
        ("torus.json", torus_identity()),
        ("genus2_fan.json", genus2_fan()),
        ("genus2_46.json", genus2_subdivided(2)),
        ("dirichlet_disk.json", dirichlet_disk(6, 0.15)),
        ("annulus_tree.json", annulus_tree(6)),
        ("double_tetrahedron.json", double_tetrahedron()),
        ("bad_triangle.json", bad_triangle()),
        ("infinite_energy.json", infinite_energy_wheel()),
    ];
    for (name, inst) in &instances {
        write(&dir, name, &inst.to_file());
    }
    let report = compare_weights(&CompareParams::default()).expect("comparison runs");
    let witness = strongest_cotangent_witness(&report).expect("a cotangent violation");
    println!(
        "cotangent violations: {} of {} (vertex {}, residual {:e})",
        report.cotangent_violations, report.params.instances, witness.vertex, witness.residual
    );
    write(&dir, "cotangent_witness.json", &witness);
}
