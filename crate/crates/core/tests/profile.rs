mod common;

use common::{fixture, random_profile, read_fixture, rng, FIXTURES};
use duolayer::model::LayerId;
use duolayer::profile::{parse_profile, serialize_profile, validate, Condition, DistanceSource};
use duolayer::transition::{Direction, EasingStyle};
use serde_json::Value;

#[test]
fn e1_matches_hand_written_expectation() {
    let p = parse_profile(&read_fixture("e1_hand.prof")).unwrap();
    let want: Value = serde_json::from_str(&read_fixture("e1_hand.expected.json")).unwrap();

    let g = &want["geometry"];
    assert_eq!(p.geometry.width_px as u64, g["width_px"].as_u64().unwrap());
    assert_eq!(p.geometry.height_px as u64, g["height_px"].as_u64().unwrap());
    assert_eq!(p.geometry.physical_width_m, g["physical_width_m"].as_f64().unwrap());
    assert_eq!(p.geometry.physical_height_m, g["physical_height_m"].as_f64().unwrap());
    assert_eq!(p.geometry.separation_m, g["separation_m"].as_f64().unwrap());

    let assets = want["assets"].as_object().unwrap();
    assert_eq!(p.assets.len(), assets.len());
    for (name, a) in assets {
        let got = &p.assets[name];
        let paths: Vec<&str> = a["paths"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
        assert_eq!(got.paths, paths);
        assert_eq!(got.size_m.to_vec(), a["size_m"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect::<Vec<_>>());
    }

    let ents = want["entities"].as_array().unwrap();
    assert_eq!(p.entities.len(), ents.len());
    for (got, e) in p.entities.iter().zip(ents) {
        assert_eq!(got.name, e["name"].as_str().unwrap());
        assert_eq!(got.asset, e["asset"].as_str().unwrap());
        assert_eq!(got.layer.as_str(), e["layer"].as_str().unwrap());
        assert_eq!(got.center_m[0], e["center_m"][0].as_f64().unwrap());
        assert_eq!(got.center_m[1], e["center_m"][1].as_f64().unwrap());
        assert_eq!(got.scale, e["scale"].as_f64().unwrap());
        assert_eq!(got.alpha, e["alpha"].as_f64().unwrap());
        assert_eq!(got.linking.name(), e["linking"].as_str().unwrap());
    }

    let c = &want["cues"]["raise"];
    let cue = &p.cues["raise"];
    assert_eq!(p.cues.len(), 1);
    assert_eq!(cue.target, c["target"].as_str().unwrap());
    assert_eq!(cue.spec.direction, Direction::BackToFront);
    assert_eq!(c["direction"], "back_to_front");
    assert_eq!(cue.spec.parameters.names(), vec!["alpha"]);
    assert_eq!(cue.spec.duration_s, c["duration_s"].as_f64().unwrap());
    assert_eq!(cue.spec.lag_s, c["lag_s"].as_f64().unwrap());
    assert!(c["separation_m"].is_null() && cue.spec.separation_m.is_none());
    for (env, w) in [(&cue.spec.source_envelope, &c["source"]), (&cue.spec.dest_envelope, &c["dest"])] {
        assert_eq!(env.delay_s(), w["delay_s"].as_f64().unwrap());
        assert_eq!(env.duration_s(), w["duration_s"].as_f64().unwrap());
        for (ph, style) in env.phases().iter().zip(w["phases"].as_array().unwrap()) {
            assert_eq!(ph.style.name(), style.as_str().unwrap());
        }
    }

    assert_eq!(p.bindings.len(), 1);
    assert_eq!(p.bindings[0].condition, Condition::Manual);
    assert_eq!(p.bindings[0].source, DistanceSource::User);
    assert_eq!(p.bindings[0].fire, want["bindings"][0]["fire"].as_str().unwrap());
}

#[test]
fn every_fixture_round_trips_and_is_clean() {
    for name in FIXTURES.iter().map(|f| format!("{f}.prof")).chain(["minimal.prof".to_string()]) {
        let p = parse_profile(&read_fixture(&name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        let text = serialize_profile(&p);
        assert_eq!(parse_profile(&text).unwrap(), p, "{name}");
        assert_eq!(serialize_profile(&parse_profile(&text).unwrap()), text, "{name} idempotence");
        assert_eq!(validate(&p), vec![], "{name}");
    }
}

#[test]
fn minimal_canonical_form_matches_golden() {
    let p = parse_profile(&read_fixture("minimal.prof")).unwrap();
    assert_eq!(serialize_profile(&p), read_fixture("minimal.canonical.prof"));
}

#[test]
fn generated_profiles_round_trip() {
    let mut r = rng(0x5eed);
    for i in 0..300 {
        let p = random_profile(&mut r);
        let text = serialize_profile(&p);
        let back = parse_profile(&text).unwrap_or_else(|e| panic!("profile {i}: {e}\n{text}"));
        assert_eq!(back, p, "profile {i}");
        assert_eq!(serialize_profile(&back), text);
    }
}

#[test]
fn parse_is_order_independent_for_named_blocks() {
    // Reversing declaration order of assets and cues must not change the
    // parsed maps; entities keep their order because it is drawing order.
    let src = read_fixture("e4_pull_push.prof");
    let p = parse_profile(&src).unwrap();
    let mut reordered = String::from("display { resolution_px 320 180; size_m 1.218 0.685; separation_m 0.72; }\n");
    reordered.push_str("bind { when manual; fire push; }\nbind { when manual; fire pull; }\n");
    let cues: Vec<&str> = src.split("cue ").skip(1).map(|s| s.split("\nbind").next().unwrap()).collect();
    for c in cues.iter().rev() {
        reordered.push_str("cue ");
        reordered.push_str(c.trim_end());
        reordered.push('\n');
    }
    reordered.push_str("entity designer { asset designer; layer back; center_m -0.25 0; }\n");
    reordered.push_str("entity app { asset app; layer back; center_m 0.15 0; link outline { outline_thickness_px 2; } }\n");
    reordered.push_str("asset app { path \"assets/app.pam\"; size_m 0.12 0.21; }\n");
    reordered.push_str("asset designer { path \"assets/person.pam\"; size_m 0.25 0.5; }\n");
    let q = parse_profile(&reordered).unwrap();
    assert_eq!(q.assets, p.assets);
    assert_eq!(q.cues, p.cues);
    assert_eq!(q.entities, p.entities);
    // Bindings are a list; order is kept as written.
    assert_eq!(q.bindings[0].fire, "push");
}

#[test]
fn fixture_details() {
    let e4 = parse_profile(&read_fixture("e4_pull_push.prof")).unwrap();
    let pull = &e4.cues["pull"].spec;
    assert_eq!(pull.parameters.names(), vec!["alpha", "scale", "shadow"]);
    assert_eq!((pull.absent_look.scale, pull.present_look.shadow), (0.8, 0.6));
    assert_eq!(pull.source_envelope.phases()[0].style, EasingStyle::EaseIn);

    let e5 = parse_profile(&read_fixture("e5_agent.prof")).unwrap();
    assert_eq!(e5.assets["agent"].paths.len(), 2);
    assert!(matches!(e5.bindings[0].condition, Condition::ZoneEnter(_)));

    let e14 = parse_profile(&read_fixture("e14_depth.prof")).unwrap();
    assert!(e14.calibration.is_some());
    assert_eq!(e14.segments["split"].threshold_m, 1.0);
    assert_eq!(e14.bindings[0].source, DistanceSource::Hand);
    assert_eq!(e14.entity("near").unwrap().layer, LayerId::Front);
}

#[test]
fn lints() {
    let src = "display { separation_m 4; }\nasset a { path \"a.pam\"; size_m 0.1 0.1; }\nasset b { path \"b.pam\"; size_m 0.1 0.1; }\n\
               entity e { asset a; layer front; center_m 0.7 0; }\ncue c { target e; transition { direction fade_in front; duration_s 1; } }\n";
    let d = validate(&parse_profile(src).unwrap());
    let codes: Vec<&str> = d.iter().map(|d| d.code).collect();
    assert_eq!(codes, vec!["separation", "off-panel", "unused-asset", "unused-cue"]);
    assert!(d[2].message.contains("`b`"));
}

#[test]
fn errors_point_into_the_source() {
    let cases = [
        ("display { }\ncue c { target ghost; transition { direction front_to_back; duration_s 1; } }\n", 2),
        ("display { }\nbind { when zone_enter nowhere; fire c; }\n", 2),
        ("display { }\nasset a { path \"x.pam\" \"y.pam\"; size_m 1 1; }\n", 2),
        ("display { }\nsegment s { asset a; front b; }\n", 2),
        ("display { }\ndisplay { }\n", 2),
        ("display {\n  size_m 1 1;\n  resolution_px 1920 1080;\n}\n", 1),
    ];
    for (src, line) in cases {
        let e = parse_profile(src).unwrap_err();
        assert_eq!(e.line, line, "{src}: {e}");
        assert!(e.points_into(src), "{e}");
    }
}

#[test]
fn fixture_file_paths_exist() {
    for name in FIXTURES {
        let p = parse_profile(&read_fixture(&format!("{name}.prof"))).unwrap();
        for a in p.assets.values() {
            for path in &a.paths {
                assert!(fixture(path).exists(), "{name}: {path}");
            }
        }
    }
}
