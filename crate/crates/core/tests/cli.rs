use std::process::Command;

fn sclcone(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_sclcone"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn compute_prints_values() {
    assert_eq!(sclcone(&["compute", "[a,b]", "--order-a", "0", "--order-b", "0"]), (0, "1/2\n".into(), String::new()));
    let (code, out, _) = sclcone(&["compute", "ab", "--order-a", "0", "--order-b", "3"]);
    assert_eq!((code, out.as_str()), (0, "infinite\n"));
    let (code, out, _) = sclcone(&["compute", "ab", "--order-a", "2", "--order-b", "3", "--strategy", "enumerate"]);
    assert_eq!((code, out.as_str()), (0, "1/12\n"));
}

#[test]
fn compute_json() {
    let (code, out, _) = sclcone(&["compute", "[a,b]", "--order-a", "3", "--order-b", "4", "--json"]);
    assert_eq!(code, 0);
    let j: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(j["scl"]["num"], "1");
    assert_eq!(j["scl"]["den"], "6");
    assert_eq!(j["status"], "finite");
    assert_eq!(j["certificate_ok"], true);
    assert!(j["lp"]["pivots"].is_u64());
}

#[test]
fn usage_errors_exit_two() {
    let (code, _, err) = sclcone(&["compute", "a^^", "--order-a", "2", "--order-b", "3"]);
    assert_eq!(code, 2);
    assert!(!err.is_empty());
    assert_eq!(sclcone(&["compute", "ab", "--order-a", "1"]).0, 2);
    assert_eq!(sclcone(&["bogus"]).0, 2);
    assert_eq!(sclcone(&["scan", "ab", "--orders-a", "x", "--orders-b", "3"]).0, 2);
}

#[test]
fn resource_cap_exits_three() {
    let out = Command::new(env!("CARGO_BIN_EXE_sclcone"))
        .args(["diskgen", "aba^-3b^-3", "--order-a", "7", "--order-b", "7"])
        .env("SCLCONE_MAX_NODES", "3")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn scan_is_deterministic_and_fits() {
    let dir = std::env::temp_dir().join(format!("sclcone-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p1 = dir.join("one.csv");
    let p2 = dir.join("two.csv");
    let base = ["scan", "[a,b]", "--orders-a", "2..12", "--orders-b", "7"];
    let mut a = base.to_vec();
    a.extend(["--out", p1.to_str().unwrap(), "--jobs", "1"]);
    let mut b = base.to_vec();
    b.extend(["--out", p2.to_str().unwrap(), "--jobs", "4"]);
    assert_eq!(sclcone(&a).0, 0);
    assert_eq!(sclcone(&b).0, 0);
    let (t1, t2) = (std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    assert_eq!(t1, t2);
    let text = String::from_utf8(t1).unwrap();
    assert_eq!(text.lines().count(), 12);
    assert!(text.contains("3,7,finite,1,6,\n"));

    let (code, out, _) = sclcone(&["fit", p1.to_str().unwrap(), "--axis", "a", "--max-period", "3", "--max-degree", "2"]);
    assert_eq!(code, 0);
    let fits: Vec<&str> = out.lines().filter(|l| l.starts_with("o = ")).collect();
    assert_eq!(fits.len(), 2, "{out}");
    assert!(fits[0].contains("mod 1") && fits[0].ends_with("(o - 2) / (2o)"));
    assert!(fits[1].ends_with("(5) / (14)"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn heisenberg_subcommands() {
    let (code, out, _) = sclcone(&["heisenberg", "suv", "--u", "2", "--v", "5", "--check"]);
    assert_eq!(code, 0);
    assert!(out.contains("formula: [-8, -4]") && out.contains("match"));
    let (code, out, _) = sclcone(&["heisenberg", "region", "--m", "1", "--n", "2", "--max", "4"]);
    assert_eq!(code, 0);
    assert!(out.contains("  2 ..#.#"));
}

#[test]
fn diskgen_lists_generators() {
    let (code, out, _) = sclcone(&["diskgen", "ab", "--order-a", "2", "--order-b", "5"]);
    assert_eq!(code, 0);
    assert!(out.contains("factor a (order 2): 1 generators"));
    assert!(out.contains("[5]"));
}
