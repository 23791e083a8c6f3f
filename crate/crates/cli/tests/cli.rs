use std::path::Path;
use std::process::{Command, Output};

fn cmc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cmc")).current_dir(dir).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let o = cmc(dir, args);
    assert!(o.status.success(), "{args:?} failed: {}", stderr(&o));
    stdout(&o)
}

/// Forman `p`-cells are parent intervals `[a, b]` with `dim b − dim a = p`.
#[test]
fn generated_disk_subdivides_to_interval_counts() {
    let dir = tempfile::tempdir().unwrap();
    let parent = ok(dir.path(), &["gen", "disk", "--nr", "4", "--nphi", "3", "-o", "disk.json"]);
    assert_eq!(parent.trim(), "counts 13 24 12");
    // 3 central triangles with 3 edges and 3 vertices, 9 quads with 4 each.
    let faces_edges = 3 * 3 + 9 * 4;
    let faces_nodes = faces_edges;
    let expected = format!("counts {} {} {}", 13 + 24 + 12, 2 * 24 + faces_edges, faces_nodes);
    let sub = ok(dir.path(), &["forman", "disk.json", "-o", "sub.json"]);
    assert_eq!(sub.trim(), expected);
    assert!(ok(dir.path(), &["validate", "sub.json"]).contains("compatible orientation: true"));
}

#[test]
fn corrupted_mesh_fails_validation_with_cell_ids() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["gen", "rect", "--nx", "2", "--ny", "1", "-o", "rect.json"]);
    let path = dir.path().join("rect.json");
    let mut mesh: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    // Flip the sign of the first edge of face 0, breaking ∂∂ = 0 there.
    let sign = &mut mesh["incidence"][2][0][0][1];
    *sign = serde_json::json!(-sign.as_i64().unwrap());
    std::fs::write(&path, mesh.to_string()).unwrap();
    let o = cmc(dir.path(), &["validate", "rect.json"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("violation"), "{err}");
    assert!(err.contains("2-cell #0"), "{err}");
}

#[test]
fn usage_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cmc(dir.path(), &["solve"]).status.code(), Some(2));
    assert_eq!(cmc(dir.path(), &["gen", "torus", "-o", "x.json"]).status.code(), Some(2));
    ok(dir.path(), &["discretize", "disk-quadratic", "-o", "p.json"]);
    let o = cmc(dir.path(), &["solve", "p.json", "--steps", "3", "-o", "r.json"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(!dir.path().join("r.json").exists());
    assert_eq!(cmc(dir.path(), &["discretize", "no-such-problem", "-o", "p.json"]).status.code(), Some(2));
}

#[test]
fn disk_pipeline_reports_errors_and_renders_svg() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["discretize", "disk-quadratic", "-o", "p.json"]);
    let out = ok(dir.path(), &["solve", "p.json", "--formulation", "mixed", "-o", "r.json"]);
    let u_rel: f64 = out.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!((u_rel - 0.0803).abs() < 1e-3, "{out}");
    ok(dir.path(), &["render", "r.json", "--problem", "p.json", "-o", "out.svg"]);
    let svg = std::fs::read_to_string(dir.path().join("out.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert!(svg.contains("<polygon"));
}

#[test]
fn transient_cube_renders_numbered_vtk_frames() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["discretize", "cube-quadratic", "-o", "c.json", "--dt", "0.05", "--steps", "3"]);
    ok(dir.path(), &["solve", "c.json", "--regime", "transient", "--formulation", "mixed", "-o", "r.json"]);
    ok(dir.path(), &["render", "r.json", "--problem", "c.json", "-o", "cube.vtk", "--frames"]);
    for i in 0..4 {
        let text = std::fs::read_to_string(dir.path().join(format!("cube_{i:04}.vtk"))).unwrap();
        assert!(text.starts_with("# vtk DataFile"));
    }
    assert!(!dir.path().join("cube_0004.vtk").exists());
    let o = cmc(dir.path(), &["render", "r.json", "--problem", "c.json", "-o", "cube.svg"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn repro_prints_every_catalog_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(dir.path(), &["repro"]);
    for name in ["cube-quadratic", "disk-quadratic", "hemisphere-linear", "rectangle-linear"] {
        assert!(out.lines().any(|l| l.starts_with(name)), "{out}");
    }
    assert_eq!(out.lines().filter(|l| l.trim_start().starts_with("reference")).count(), 3);
}
