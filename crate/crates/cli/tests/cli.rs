use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn om_forge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_om-forge")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn det(m: &[Vec<i64>]) -> i64 {
    if m.len() == 1 {
        return m[0][0];
    }
    (0..m.len())
        .map(|j| {
            let minor: Vec<Vec<i64>> = m[1..].iter().map(|row| [&row[..j], &row[j + 1..]].concat()).collect();
            let s = if j % 2 == 0 { 1 } else { -1 };
            s * m[0][j] * det(&minor)
        })
        .sum()
}

/// `.chi` text of vectors, signs by Laplace expansion over lexicographic subsets.
fn chi_of(rows: &[Vec<i64>]) -> String {
    let (n, r) = (rows.len(), rows[0].len());
    let mut signs = String::new();
    let mut subset: Vec<usize> = (0..r).collect();
    loop {
        let m: Vec<Vec<i64>> = subset.iter().map(|&e| rows[e].clone()).collect();
        signs.push(match det(&m).signum() {
            1 => '+',
            -1 => '-',
            _ => '0',
        });
        let Some(i) = (0..r).rev().find(|&i| subset[i] < n - r + i) else { break };
        subset[i] += 1;
        for k in i + 1..r {
            subset[k] = subset[k - 1] + 1;
        }
    }
    format!("{r} {n}\n{signs}\n")
}

const W3_ROWS: [[i64; 2]; 3] = [[1, 0], [1, 1], [0, 1]];

fn w3_rows() -> Vec<Vec<i64>> {
    W3_ROWS.iter().map(|r| r.to_vec()).collect()
}

fn c48_rows() -> Vec<Vec<i64>> {
    (1..=8i64).map(|t| vec![1, t, t * t, t * t * t]).collect()
}

#[test]
fn w3_cocircuits_match_the_line_arrangement() {
    let dir = tempfile::tempdir().unwrap();
    let rows = w3_rows();
    let chi = chi_of(&rows);
    assert_eq!(chi, "2 3\n+++\n");
    let file = write(dir.path(), "w3.chi", &chi);
    let out = om_forge(&["cocircuits", &file]);
    assert!(out.status.success());
    let got: Vec<String> = json(&out)["cocircuits"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().to_string()).collect();
    // each vector spans a hyperplane; its normal is the rotation by 90 degrees
    let mut expected = Vec::new();
    for a in &rows {
        let normal = [-a[1], a[0]];
        let x: String = rows
            .iter()
            .map(|v| match (v[0] * normal[0] + v[1] * normal[1]).signum() {
                1 => '+',
                -1 => '-',
                _ => '0',
            })
            .collect();
        let neg: String = x.chars().map(|c| match c { '+' => '-', '-' => '+', c => c }).collect();
        expected.push(x);
        expected.push(neg);
    }
    let (mut got, mut expected) = (got, expected);
    got.sort();
    expected.sort();
    assert_eq!(got, expected);
    assert_eq!(json(&out)["seed"], 1);
}

#[test]
fn c48_elements_have_at_least_four_mutations() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "c48.chi", &chi_of(&c48_rows()));
    let out = om_forge(&["-q", "mutations", &file]);
    assert!(out.status.success());
    let v = json(&out);
    assert!(v["adjacency"].as_array().unwrap().iter().all(|k| k.as_u64().unwrap() >= 4));
    assert_eq!(v["L"], 4);
}

#[test]
fn w3_program_is_euclidean() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "w3.chi", &chi_of(&w3_rows()));
    let out = om_forge(&["euclidean", "--g", "0", "--f", "1", &file]);
    assert!(out.status.success());
    assert_eq!(json(&out)["euclidean"], true);
}

#[test]
fn points_and_chirotope_inputs_agree() {
    let dir = tempfile::tempdir().unwrap();
    let rows = c48_rows();
    let pts: String = std::iter::once("4 8".to_string())
        .chain(rows.iter().map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")))
        .collect::<Vec<_>>()
        .join("\n");
    let a = write(dir.path(), "c48.pts", &pts);
    let b = write(dir.path(), "c48.chi", &chi_of(&rows));
    let (x, y) = (json(&om_forge(&["cocircuits", &a])), json(&om_forge(&["cocircuits", &b])));
    assert_eq!(x["cocircuits"], y["cocircuits"]);
    assert_eq!(x["count"], 2 * 56);
}

#[test]
fn saved_extension_reads_back() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "c48.chi", &chi_of(&c48_rows()));
    for ext in ["x.chi", "x.ccj"] {
        let saved = dir.path().join(ext);
        let out = om_forge(&["lexext", "--spec", "0:+,5:-,6:+,7:+", "--save", saved.to_str().unwrap(), &file]);
        assert!(out.status.success());
        let reported = json(&out)["extension"]["cocircuits"].clone();
        let back = json(&om_forge(&["cocircuits", saved.to_str().unwrap()]));
        assert_eq!(back["cocircuits"], reported);
        assert_eq!(back["n"], 9);
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let short = write(dir.path(), "short.chi", "2 3\n++\n");
    assert_eq!(om_forge(&["validate", &short]).status.code(), Some(1));
    assert_eq!(om_forge(&["cocircuits", "/nonexistent/x.chi"]).status.code(), Some(1));
    // violates the three-term Grassmann-Plucker relation on 0,1,2,3
    let bad = write(dir.path(), "bad.chi", "2 4\n+++-+-\n");
    let out = om_forge(&["validate", &bad]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["ok"], false);
    let half = write(dir.path(), "half.ccj", r#"{"n": 3, "rank": 2, "cocircuits": ["0+-", "+0-", "++0"]}"#);
    assert_ne!(om_forge(&["cocircuits", &half]).status.code(), Some(0));
    // the first four points of the moment curve are not the walls of one simplicial tope of C(4, 8)
    let c48 = write(dir.path(), "c48.chi", &chi_of(&c48_rows()));
    let out = om_forge(&["-q", "mutations", &c48]);
    let listed: Vec<Value> = json(&out)["mutations"].as_array().unwrap().iter().map(|m| m["basis"].clone()).collect();
    let basis = serde_json::json!([0, 1, 2, 4]);
    assert!(!listed.contains(&basis));
    assert_eq!(om_forge(&["flip", "--basis", "0,1,2,4", &c48]).status.code(), Some(3));
    assert_eq!(om_forge(&["acceptance", "no-such-suite"]).status.code(), Some(1));
}

#[test]
fn acceptance_suites_pass() {
    for suite in ["lex-suite", "realizable-shannon", "direct-sum"] {
        let out = om_forge(&["--seed", "3", "-q", "acceptance", suite]);
        assert_eq!(out.status.code(), Some(0), "{suite}: {}", String::from_utf8_lossy(&out.stdout));
        let v = json(&out);
        assert_eq!(v["seed"], 3);
        assert_eq!(v["criteria"][0]["outcome"], "pass");
    }
}
