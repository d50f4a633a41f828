use std::path::PathBuf;
use std::process::Command;

fn treeshap(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_treeshap")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

fn scratch(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("treeshap-bin-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

const EXAMPLE: &str = r#"{"root":1,"edges":[{"child":3,"parent":1},{"child":6,"parent":3},{"child":7,"parent":3}]}"#;

#[test]
fn compute_prints_the_grid() {
    let tree = scratch("compute.json", EXAMPLE);
    let (code, out) = treeshap(&[
        "compute",
        tree.to_str().unwrap(),
        "-m",
        "dropbox",
        "-m",
        "geometric",
        "-m",
        "shapley",
        "--unit",
        "1000",
        "--root-adjust",
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("Shapley         1167  1167  333  333   3000"), "{out}");
}

#[test]
fn flags_override_the_config_file() {
    let tree = scratch("cfg.json", EXAMPLE);
    let cfg = scratch("cfg.toml", "unit = 1000\nformat = \"csv\"\nexact = true\n");
    let (code, out) =
        treeshap(&["compute", tree.to_str().unwrap(), "--config", cfg.to_str().unwrap(), "--format", "table"]);
    assert_eq!(code, 0);
    assert!(out.contains("6500/3"), "{out}");
    assert!(out.starts_with("# nodes 4"), "{out}");
}

#[test]
fn exit_codes() {
    let good = scratch("good.json", EXAMPLE);
    let bad = scratch("bad.json", r#"{"root":1,"edges":[{"child":1,"parent":3}]}"#);
    assert_eq!(treeshap(&["verify", good.to_str().unwrap()]).0, 0);
    assert_eq!(treeshap(&["verify", good.to_str().unwrap(), "--corrupt"]).0, 2);
    assert_eq!(treeshap(&["count", bad.to_str().unwrap()]).0, 1);
    assert_eq!(treeshap(&["compute", good.to_str().unwrap(), "-m", "lottery"]).0, 1);
}

#[test]
fn stream_writes_a_checkpoint() {
    let log = scratch("joins.log", "{\"seq\":1,\"node\":3,\"parent\":1}\n{\"seq\":2,\"node\":6,\"parent\":3}\n");
    let ckpt = std::env::temp_dir().join(format!("treeshap-ckpt-{}.json", std::process::id()));
    let (code, out) =
        treeshap(&["stream", log.to_str().unwrap(), "--root", "1", "--checkpoint", ckpt.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.starts_with("seq 1 node 3 depth 1: +1 each to 1 3"), "{out}");
    let tree = tree_shapley::io::parse_tree_file(&std::fs::read_to_string(&ckpt).unwrap()).unwrap();
    assert_eq!(tree.len(), 3);
}
