use obscost_cli::{with_defaults, ConfigError, Initial, RunConfig, SCHEMA};
use obscost_kdv::Scheme;

#[test]
fn parses_key_value_documents() {
    let mut c = RunConfig::new("simulate");
    c.apply_text("# experiment\nlength = 5.5\nnodes=128  # fine enough\n\nscheme = \"implicit-euler\"\ninitial = sine:3\n")
        .unwrap();
    assert_eq!(c.length, Some(5.5));
    assert_eq!(c.nodes, Some(128));
    assert_eq!(c.scheme, Some(Scheme::ImplicitEuler));
    assert_eq!(c.initial_state().unwrap(), Some(Initial::Sine(3)));
}

#[test]
fn errors_name_line_and_field() {
    let mut c = RunConfig::new("gamma");
    let e = c.apply_text("length = 4\nk1 = ten\n").unwrap_err();
    assert!(matches!(&e, ConfigError::Field { at, field, .. } if at == "line 2" && field == "k1"), "{e}");
    assert!(e.to_string().starts_with("line 2: field `k1`"));

    let e = c.apply_text("\n\nlenght = 4\n").unwrap_err();
    assert!(matches!(&e, ConfigError::UnknownKey { at, key } if at == "line 3" && key == "lenght"));

    let e = c.apply_text("length 4\n").unwrap_err();
    assert!(matches!(e, ConfigError::Syntax { line: 1, .. }));

    for bad in ["lambda_profile = huge", "scheme = rk4", "initial = cosine:2", "initial = sine:0", "schema = 99"] {
        assert!(c.apply_text(bad).is_err(), "{bad}");
    }
}

#[test]
fn json_round_trip_is_identity() {
    let mut c = RunConfig::new("gramschmidt");
    c.apply_text("length = 6.283185307179586\nlambda_profile = custom:1,2,3,4,5,6,7,8\nstub_e13 = 6\nb_override = 20\n")
        .unwrap();
    let c = with_defaults(c);
    let text = serde_json::to_string(&c).unwrap();
    let back: RunConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(back, c);
    assert_eq!(serde_json::to_string(&back).unwrap(), text);
    assert_eq!(back.schema, SCHEMA);
    assert!(serde_json::from_str::<RunConfig>(&text.replace("\"length\"", "\"lenght\"")).is_err());
}

#[test]
fn defaults_fill_only_missing_fields() {
    let mut c = RunConfig::new("gramian");
    c.apply_text("length = 4\ndt = 0.002").unwrap();
    let c = with_defaults(c);
    assert_eq!(c.dt, Some(0.002));
    assert_eq!(c.nodes, Some(200));
    assert_eq!(c.time, Some(2.0));
    let c = with_defaults(RunConfig::new("cost"));
    assert_eq!(c, RunConfig::new("cost"));
}
