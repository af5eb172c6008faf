use codp_dsl::{elaborate, format, parse, DslError, Registry};
use codp_testkit::diagram::{diagram_relation, outer_ports};
use codp_testkit::{codp_files, fixture_dir, Relation};

#[test]
fn every_fixture_round_trips() {
    let files = codp_files(&fixture_dir());
    assert!(files.len() >= 6);
    for (name, text) in files {
        let ast = parse(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let canonical = format(&ast);
        assert_eq!(parse(&canonical).unwrap(), ast, "{name}");
        assert_eq!(format(&parse(&canonical).unwrap()), canonical, "{name}");
        elaborate(&ast).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn malformed_fixtures_that_parse_also_round_trip() {
    for (name, text) in codp_files(&fixture_dir().join("malformed")) {
        if let Ok(ast) = parse(&text) {
            assert_eq!(parse(&format(&ast)).unwrap(), ast, "{name}");
        }
    }
}

#[test]
fn canonical_text_is_locked() {
    let dir = fixture_dir();
    for name in ["diamond_loop", "uav"] {
        let text = std::fs::read_to_string(dir.join(format!("{name}.codp"))).unwrap();
        let golden = std::fs::read_to_string(dir.join("golden").join(format!("{name}.codp"))).unwrap();
        assert_eq!(format(&parse(&text).unwrap()), golden, "{name}");
    }
}

#[test]
fn statement_order_does_not_matter() {
    let text = std::fs::read_to_string(fixture_dir().join("chain.codp")).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines.reverse();
    assert_eq!(parse(&lines.join("\n")).unwrap(), parse(&text).unwrap());
}

#[test]
fn finite_fixtures_match_the_relational_reading() {
    for name in ["chain", "diamond_loop", "parallel"] {
        let text = std::fs::read_to_string(fixture_dir().join(format!("{name}.codp"))).unwrap();
        let ast = parse(&text).unwrap();
        let el = elaborate(&ast).unwrap();
        let (fun_ports, res_ports) = outer_ports(&ast);
        assert_eq!((&el.fun_ports, &el.res_ports), (&fun_ports, &res_ports), "{name}");
        let dp = el.build(&Registry::new(), &Default::default(), None).unwrap();
        let want = diagram_relation(&ast, &fun_ports, &res_ports);
        assert!(!want.is_empty(), "{name}");
        assert_eq!(Relation::of(&dp).pairs, want, "{name}: {}", el.expr);
    }
}

#[test]
fn malformed_fixtures_fail_with_their_exit_code() {
    let files = codp_files(&fixture_dir().join("malformed"));
    assert!(files.len() >= 10);
    for (name, text) in files {
        let want = if name.starts_with("syntax_") { 1 } else { 2 };
        let err: DslError = parse(&text).and_then(|ast| elaborate(&ast)).err().unwrap_or_else(|| panic!("{name} accepted"));
        assert_eq!(err.exit_code(), want, "{name}: {err}");
    }
}

#[test]
fn uav_transcription_shape() {
    let ast = parse(&std::fs::read_to_string(fixture_dir().join("uav.codp")).unwrap()).unwrap();
    assert_eq!((ast.nodes.len(), ast.loops.len(), ast.params.len()), (5, 1, 2));
}
