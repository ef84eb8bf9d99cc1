//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any failed. Built with `harness = false`.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use common::wire::{http, start, Client};
use common::{
    brute_dilate, brute_erode, cli, fixture, random_buffer, random_mask, random_points, random_profile,
    random_similarity, random_spec, raycast_composite, read_fixture, rng, mutate, FIXTURES,
};
use duolayer::calibration::{estimate_similarity, rmse, PointSet3};
use duolayer::compositor::{composite, OpticalModel, Viewpoint};
use duolayer::linalg::Vec3;
use duolayer::linking::{dilate, erode, halo_band, outline_band, BinaryMask};
use duolayer::model::{luminance_alpha, Color, DisplayGeometry, LayerId, Pixel, PixelBuffer};
use duolayer::pnm;
use duolayer::profile::{parse_profile, serialize_profile};
use duolayer::runtime::{classify_proximity, parse_command_log, AssetLibrary, Engine, Replay, Zone, ZoneConfig};
use duolayer::transition::{evaluate_transition, Direction, TransitionSpec};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use sha2::{Digest, Sha256};
use tempfile::TempDir;

type Outcome = Result<String, String>;

macro_rules! check {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn within(limit: Duration, started: Instant) -> Result<Duration, String> {
    let took = started.elapsed();
    check!(took < limit, "took {:.2?}, limit {:.0?}", took, limit);
    Ok(took)
}

// ---------------------------------------------------------------------------

fn luminance() -> Outcome {
    let t0 = Instant::now();
    let mut r = rng(1);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let (cr, cg, cb) = (r.gen::<f64>(), r.gen::<f64>(), r.gen::<f64>());
        let want = 0.2126 * cr + 0.7152 * cg + 0.0722 * cb;
        worst = worst.max((luminance_alpha(Color::new(cr, cg, cb)) - want).abs());
    }
    check!(worst <= 1e-12, "max error {worst:e}");
    check!(luminance_alpha(Color::new(0.0, 1.0, 0.0)) == 0.7152, "green gives {}", luminance_alpha(Color::new(0.0, 1.0, 0.0)));
    check!(luminance_alpha(Color::BLACK) == 0.0, "black is not 0");
    check!(luminance_alpha(Color::new(1.0, 1.0, 1.0)) == 1.0, "white gives {}", luminance_alpha(Color::new(1.0, 1.0, 1.0)));
    let took = within(Duration::from_secs(1), t0)?;
    Ok(format!("10000 colors, max error {worst:.1e}, {took:.2?}"))
}

fn calibration() -> Outcome {
    let t0 = Instant::now();
    let mut r = rng(2);
    let mut worst_param = 0.0f64;
    let mut worst_rmse = 0.0f64;
    for _ in 0..1000 {
        let truth = random_similarity(&mut r);
        let src = PointSet3::new(random_points(&mut r, 12));
        let dst = PointSet3::new(src.points.iter().map(|p| truth.apply(*p)).collect());
        let fit = estimate_similarity(&src, &dst, true).map_err(|e| e.to_string())?;
        for (a, b) in fit.to_numbers().iter().zip(truth.to_numbers()) {
            worst_param = worst_param.max((a - b).abs());
        }
        worst_rmse = worst_rmse.max(rmse(&fit, &src, &dst).map_err(|e| e.to_string())?.rmse_m);
    }
    check!(worst_param <= 1e-9, "noiseless parameter error {worst_param:e}");
    check!(worst_rmse <= 1e-9, "noiseless rmse {worst_rmse:e}");

    let noise = Normal::new(0.0, 0.001).unwrap();
    let mut good = 0;
    for _ in 0..100 {
        let truth = random_similarity(&mut r);
        let src = PointSet3::new(random_points(&mut r, 12));
        let dst = PointSet3::new(
            src.points
                .iter()
                .map(|p| truth.apply(*p) + Vec3::new(noise.sample(&mut r), noise.sample(&mut r), noise.sample(&mut r)))
                .collect(),
        );
        let fit = estimate_similarity(&src, &dst, true).map_err(|e| e.to_string())?;
        if rmse(&fit, &src, &dst).map_err(|e| e.to_string())?.rmse_m <= 0.002 {
            good += 1;
        }
    }
    check!(good >= 95, "only {good}/100 noisy fits within 2 mm");

    let mut mirrored = 0;
    for _ in 0..200 {
        let pts = random_points(&mut r, 12);
        let truth = random_similarity(&mut r);
        // Reflect through a random plane, then move rigidly.
        let n = Vec3::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
        let n = n.scale(1.0 / n.norm());
        let dst: Vec<Vec3> = pts.iter().map(|p| truth.apply(*p - n.scale(2.0 * p.dot(n)))).collect();
        let fit = estimate_similarity(&PointSet3::new(pts), &PointSet3::new(dst), true).map_err(|e| e.to_string())?;
        check!((fit.rotation.det() - 1.0).abs() < 1e-9, "mirrored input gave det {}", fit.rotation.det());
        mirrored += 1;
    }
    let took = within(Duration::from_secs(5), t0)?;
    Ok(format!(
        "1000 exact (param err {worst_param:.1e}), {good}/100 noisy <= 2 mm, {mirrored} mirrored det +1, {took:.2?}"
    ))
}

fn transitions() -> Outcome {
    let t0 = Instant::now();
    let mut r = rng(3);
    let alpha = |s: &TransitionSpec, t: f64, l: LayerId| evaluate_transition(s, t).get(l).alpha;
    for i in 0..1000 {
        let s = random_spec(&mut r);
        let total = s.total_s();
        let (src, dst) = match s.direction {
            Direction::FrontToBack => (Some(LayerId::Front), Some(LayerId::Back)),
            Direction::BackToFront => (Some(LayerId::Back), Some(LayerId::Front)),
            Direction::FadeIn(l) => (None, Some(l)),
            Direction::FadeOut(l) => (Some(l), None),
        };
        check!((total - (s.duration_s + s.lag_s)).abs() < 1e-12, "spec {i}: total {total}");
        if let Some(l) = src {
            check!(alpha(&s, 0.0, l) == 1.0 && alpha(&s, total, l) == 0.0, "spec {i}: source endpoints");
        }
        if let Some(l) = dst {
            check!(alpha(&s, 0.0, l) == 0.0 && alpha(&s, total, l) == 1.0, "spec {i}: destination endpoints");
        }
        let mut unlagged = s.clone();
        unlagged.lag_s = 0.0;
        let mut prev = evaluate_transition(&s, 0.0);
        for k in 0..=100 {
            let t = total * k as f64 / 100.0;
            let st = evaluate_transition(&s, t);
            for p in [st.front, st.back] {
                check!((0.0..=1.0).contains(&p.alpha) && (0.0..=1.0).contains(&p.shadow), "spec {i}: out of range at t={t}");
            }
            if let Some(l) = src {
                check!(st.get(l).alpha <= prev.get(l).alpha, "spec {i}: source rose at t={t}");
            }
            if let Some(l) = dst {
                check!(st.get(l).alpha >= prev.get(l).alpha, "spec {i}: destination fell at t={t}");
                let shifted = evaluate_transition(&unlagged, (t - s.lag_s).max(0.0));
                check!(st.get(l) == shifted.get(l), "spec {i}: lag shift broken at t={t}");
            }
            prev = st;
        }
    }
    let took = within(Duration::from_secs(5), t0)?;
    Ok(format!("1000 specs x 100 samples, {took:.2?}"))
}

fn compositor() -> Outcome {
    let t0 = Instant::now();
    let mut r = rng(4);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let pw = r.gen_range(0.3..1.5);
        let g = DisplayGeometry::new(64, 36, pw, pw * 36.0 / 64.0, r.gen_range(0.01..1.0)).map_err(|e| e.to_string())?;
        let front = random_buffer(&mut r, 64, 36);
        let back = random_buffer(&mut r, 64, 36);
        let eye = [r.gen_range(-0.6..0.6), r.gen_range(-0.4..0.4), r.gen_range(0.2..3.0)];
        let amb = [r.gen_range(0.0..0.3), r.gen_range(0.0..0.3), r.gen_range(0.0..0.3)];
        let v = Viewpoint::new(eye[0], eye[1], eye[2]).map_err(|e| e.to_string())?;
        let optical = OpticalModel { ambient: Color::new(amb[0], amb[1], amb[2]) };
        let got = composite(&front, &back, &g, &v, &optical).map_err(|e| e.to_string())?;
        let want = raycast_composite(&front, &back, &g, eye, amb);
        for (p, w) in got.buffer.pixels().iter().zip(&want) {
            for (a, b) in p.color.channels().iter().zip(w) {
                worst = worst.max((a - b).abs());
            }
        }

        // A black front is fully transparent: the same as no front at all.
        let black = PixelBuffer::filled(64, 36, Pixel::opaque(Color::BLACK));
        let empty = PixelBuffer::new(64, 36);
        let through = composite(&black, &back, &g, &v, &optical).map_err(|e| e.to_string())?;
        let bare = composite(&empty, &back, &g, &v, &optical).map_err(|e| e.to_string())?;
        check!(through.buffer == bare.buffer, "black front altered the back layer");
        let oracle = raycast_composite(&empty, &back, &g, eye, amb);
        for (p, w) in through.buffer.pixels().iter().zip(&oracle) {
            check!(p.color.channels().iter().zip(w).all(|(a, b)| (a - b).abs() <= 1e-6), "black front differs from oracle");
        }
    }
    check!(worst <= 1e-6, "max channel error {worst:e}");
    let took = within(Duration::from_secs(10), t0)?;
    Ok(format!("50 pairs, max error {worst:.1e}, black front exact, {took:.2?}"))
}

fn morphology() -> Outcome {
    let mut r = rng(5);
    let minus = |a: &BinaryMask, b: &BinaryMask| {
        let (w, h) = a.dims();
        BinaryMask::from_fn(w, h, |x, y| a.get(x, y) && !b.get(x, y))
    };
    for i in 0..200 {
        let m = random_mask(&mut r, 32, 32);
        let rad = r.gen_range(1..8);
        check!(dilate(&m, rad) == brute_dilate(&m, rad), "mask {i}: dilate r={rad}");
        check!(erode(&m, rad) == brute_erode(&m, rad), "mask {i}: erode r={rad}");
        check!(halo_band(&m, rad) == minus(&brute_dilate(&m, rad), &m), "mask {i}: halo r={rad}");
        check!(outline_band(&m, rad) == minus(&m, &brute_erode(&m, rad)), "mask {i}: outline r={rad}");
    }
    Ok("200 masks, exact".into())
}

// ---------------------------------------------------------------------------

fn path_arg(p: &Path) -> String {
    p.display().to_string()
}

fn render_fixture(name: &str, out: &Path, frames: u64) -> Result<String, String> {
    let mut args = vec!["render".to_string(), "--profile".into(), path_arg(&fixture(&format!("{name}.prof")))];
    for (flag, ext) in [("--commands", "commands"), ("--sensors", "sensors")] {
        let f = fixture(&format!("{name}.{ext}"));
        if f.exists() {
            args.extend([flag.to_string(), path_arg(&f)]);
        }
    }
    args.extend(["--out".into(), path_arg(out), "--frames".into(), frames.to_string()]);
    let (code, _, err) = cli(&args);
    check!(code == 0, "{name}: render exited {code}: {err}");
    fs::read_to_string(out.join("manifest.txt")).map_err(|e| e.to_string())
}

fn read_layer(dir: &Path, layer: &str, k: u64) -> Result<PixelBuffer, String> {
    pnm::read_image(&dir.join(format!("{layer}_{k:05}.pam"))).map_err(|e| e.to_string())
}

fn e1_fixture() -> Outcome {
    let p = parse_profile(&read_fixture("e1_hand.prof")).map_err(|e| e.to_string())?;
    check!(p.geometry.separation_m == 0.72, "separation {}", p.geometry.separation_m);
    let cue = &p.cues["raise"].spec;
    check!(cue.direction == Direction::BackToFront, "direction {:?}", cue.direction);
    check!(cue.parameters.names() == vec!["alpha"], "parameters {:?}", cue.parameters.names());

    let dir = TempDir::new().map_err(|e| e.to_string())?;
    render_fixture("e1_hand", dir.path(), 40)?;
    let last = (0u64..).find(|k| *k as f64 / 30.0 >= cue.total_s()).unwrap();
    let mid = last / 2;
    let (f0, b0) = (read_layer(dir.path(), "front", 0)?, read_layer(dir.path(), "back", 0)?);
    let (fm, bm) = (read_layer(dir.path(), "front", mid)?, read_layer(dir.path(), "back", mid)?);
    let (f1, b1) = (read_layer(dir.path(), "front", last)?, read_layer(dir.path(), "back", last)?);

    // The hand is whatever leaves the back panel over the cue.
    let (w, h) = b0.dims();
    let hand: Vec<(usize, usize)> =
        (0..h).flat_map(|y| (0..w).map(move |x| (x, y))).filter(|&(x, y)| b0.get(x, y) != b1.get(x, y)).collect();
    check!(hand.len() > 100, "hand covers only {} pixels", hand.len());
    let visible = |b: &PixelBuffer| hand.iter().filter(|&&(x, y)| b.get(x, y).alpha > 0.0).count();
    let mean_alpha = |b: &PixelBuffer| hand.iter().map(|&(x, y)| b.get(x, y).alpha).sum::<f64>() / hand.len() as f64;

    check!(f0.pixels().iter().all(|p| p.alpha == 0.0), "front not empty at start");
    check!(visible(&b0) > 0, "hand missing from back at start");
    check!(visible(&b1) == 0, "hand still on back at end");
    check!(visible(&f1) > 0, "hand missing from front at end");
    check!(visible(&fm) > 0 && visible(&bm) > 0, "hand not on both layers at tick {mid}");

    let front_ratio = mean_alpha(&fm) / mean_alpha(&f1);
    let back_ratio = mean_alpha(&bm) / mean_alpha(&b0);
    check!(front_ratio > 0.0 && front_ratio < 1.0, "front ratio {front_ratio}");
    check!(back_ratio > 0.0 && back_ratio < 1.0, "back ratio {back_ratio}");
    Ok(format!(
        "separation 0.72, tick {mid}: front at {front_ratio:.3} and back at {back_ratio:.3} of full alpha; ticks 0 and {last} single-layer"
    ))
}

fn determinism() -> Outcome {
    let dir = TempDir::new().map_err(|e| e.to_string())?;
    for name in FIXTURES {
        let frames = if name == "e4_pull_push" { 130 } else { 60 };
        let a = render_fixture(name, &dir.path().join(format!("{name}_a")), frames)?;
        let b = render_fixture(name, &dir.path().join(format!("{name}_b")), frames)?;
        check!(a == b, "{name}: manifests differ");
        check!(a.lines().count() as u64 == frames * 4, "{name}: manifest has {} lines", a.lines().count());
    }

    // Live session on a paused server, then offline replay of its log.
    let log = dir.path().join("live.commands");
    let h = start(&fixture("e4_pull_push.prof"), true, 30.0, Some(&log));
    let mut c = Client::connect(h.addr());
    let mut live = BTreeMap::new();
    let mut tick = 0u64;
    for (line, steps) in [
        (r#"{"id":1,"cmd":"trigger","cue":"pull"}"#, 20),
        (r#"{"id":2,"cmd":"set_eye","eye":[-0.2,0.1,1.0]}"#, 10),
        (r#"{"id":3,"cmd":"trigger","cue":"push"}"#, 15),
        (r#"{"id":4,"cmd":"set_separation","separation_m":0.3}"#, 10),
    ] {
        check!(c.request(line)["ok"] == true, "live command refused: {line}");
        live.insert(tick, Sha256::digest(http(h.addr(), "GET", "/frame/composite", None).body));
        for _ in 0..steps {
            c.request(r#"{"id":0,"cmd":"step"}"#);
            tick += 1;
            live.insert(tick, Sha256::digest(http(h.addr(), "GET", "/frame/composite", None).body));
        }
    }
    h.shutdown();
    let live_manifest: String = live.iter().map(|(t, d)| format!("{d:x}  composite_{t:05}.ppm\n")).collect();

    let mut replays = Vec::new();
    for run in ["r1", "r2"] {
        let out = dir.path().join(run);
        let args = [
            "render",
            "--profile",
            &path_arg(&fixture("e4_pull_push.prof")),
            "--commands",
            &path_arg(&log),
            "--out",
            &path_arg(&out),
            "--frames",
            &(tick + 1).to_string(),
        ];
        let (code, _, err) = cli(&args);
        check!(code == 0, "replay render failed: {err}");
        let m = fs::read_to_string(out.join("manifest.txt")).map_err(|e| e.to_string())?;
        replays.push(m.lines().filter(|l| l.ends_with(".ppm")).map(|l| format!("{l}\n")).collect::<String>());
    }
    check!(replays[0] == replays[1], "offline replays differ");
    check!(replays[0] == live_manifest, "offline replay differs from the live session");
    Ok(format!("6 fixtures twice, live session of {} ticks replayed", tick + 1))
}

fn parser() -> Outcome {
    let mut corpus = Vec::new();
    for name in FIXTURES.iter().map(|f| format!("{f}.prof")).chain(["minimal.prof".into()]) {
        let text = read_fixture(&name);
        let p = parse_profile(&text).map_err(|e| format!("{name}: {e}"))?;
        check!(parse_profile(&serialize_profile(&p)).as_ref() == Ok(&p), "{name}: round trip");
        corpus.push(text);
    }
    let mut r = rng(8);
    for i in 0..1000 {
        let p = random_profile(&mut r);
        let text = serialize_profile(&p);
        let back = parse_profile(&text).map_err(|e| format!("generated {i}: {e}"))?;
        check!(back == p, "generated {i}: round trip differs");
        if i < 50 {
            corpus.push(text);
        }
    }
    let mut errors = 0;
    for i in 0..10_000 {
        let base = &corpus[r.gen_range(0..corpus.len())];
        let mut text = mutate(&mut r, base);
        if r.gen_bool(0.2) {
            text = mutate(&mut r, &text);
        }
        let res = panic::catch_unwind(AssertUnwindSafe(|| parse_profile(&text)));
        match res {
            Err(_) => return Err(format!("fuzz case {i} panicked:\n{text}")),
            Ok(Err(e)) => {
                check!(e.points_into(&text), "fuzz case {i}: error at {}:{} outside the input", e.line, e.column);
                errors += 1;
            }
            Ok(Ok(_)) => {}
        }
    }
    Ok(format!("7 fixtures, 1000 generated, 10000 fuzzed ({errors} rejected, all located)"))
}

fn proximity() -> Outcome {
    let z = ZoneConfig::default();
    let zone = |d: f64| classify_proximity(d, &z).map_err(|e| e.to_string());
    check!(zone(1.2)? == Zone::Social, "1.2 m is {:?}", zone(1.2)?);
    check!(zone(3.6)? == Zone::Public, "3.6 m is {:?}", zone(3.6)?);
    check!(zone(1.2 - 1e-9)? == Zone::Personal, "just inside 1.2 m");
    check!(zone(0.0)? == Zone::Personal, "0 m");
    let rank = |z: Zone| match z {
        Zone::Personal => 0,
        Zone::Social => 1,
        Zone::Public => 2,
    };
    let mut r = rng(9);
    let mut ds: Vec<f64> = (0..10_000).map(|_| r.gen_range(0.0..10.0)).collect();
    ds.sort_by(f64::total_cmp);
    let mut prev = 0;
    for d in ds {
        let k = rank(zone(d)?);
        check!(k >= prev, "zone moved inward at {d}");
        prev = k;
    }
    Ok("boundaries and 10000-distance sweep".into())
}

fn wire() -> Outcome {
    let dir = TempDir::new().map_err(|e| e.to_string())?;
    let log = dir.path().join("wire.commands");
    let prof = fixture("e4_pull_push.prof");
    let h = start(&prof, true, 30.0, Some(&log));
    let addr = h.addr();
    let scripts: [&[&str]; 3] = [
        &[r#"{"cmd":"trigger","cue":"pull"}"#, r#"{"cmd":"step","n":2}"#],
        &[r#"{"cmd":"set_eye","eye":[0.1,0,1.3]}"#, r#"{"cmd":"trigger","cue":"push"}"#],
        &[r#"{"cmd":"set_param","path":"entity.app.alpha","value":0.7}"#, r#"{"cmd":"query","topic":"tick"}"#],
    ];
    let workers: Vec<_> = scripts
        .iter()
        .enumerate()
        .map(|(k, script)| {
            let script: Vec<String> = script.iter().map(|s| s.to_string()).collect();
            std::thread::spawn(move || -> Result<Vec<u64>, String> {
                let mut c = Client::connect(addr);
                let mut ids = Vec::new();
                for i in 0..40u64 {
                    let id = k as u64 * 10_000 + i;
                    let body = &script[i as usize % script.len()];
                    let line = format!("{{\"id\":{id},{}", &body[1..]);
                    let v = c.request(&line);
                    check!(v["ok"] == true, "client {k} request {i} failed: {v}");
                    ids.push(v["id"].as_u64().ok_or("reply without id")?);
                }
                Ok(ids)
            })
        })
        .collect();
    let mut all = Vec::new();
    for (k, w) in workers.into_iter().enumerate() {
        let ids = w.join().map_err(|_| "client thread panicked".to_string())??;
        let want: Vec<u64> = (0..40).map(|i| k as u64 * 10_000 + i).collect();
        check!(ids == want, "client {k} got replies for the wrong ids");
        all.extend(ids);
    }
    all.sort();
    all.dedup();
    check!(all.len() == 120, "{} distinct replies for 120 requests", all.len());

    // Fuzz, then make sure the session still answers.
    let mut r = rng(10);
    let mut fuzz = Client::connect(addr);
    for _ in 0..1000 {
        let mut line: Vec<u8> = if r.gen_bool(0.5) {
            let mut v: Vec<u8> = (0..r.gen_range(1..120)).map(|_| r.gen::<u8>()).filter(|b| *b != b'\n').collect();
            v.insert(0, b'#');
            v
        } else {
            // A valid request with a few printable characters swapped.
            let body = scripts[r.gen_range(0..3)][r.gen_range(0..2)];
            let mut v = format!("{{\"id\":{},{}", r.gen_range(0..99), &body[1..]).into_bytes();
            for _ in 0..r.gen_range(1..4) {
                let at = r.gen_range(0..v.len());
                v[at] = r.gen_range(b' '..=b'~');
            }
            v
        };
        line.push(b'\n');
        fuzz.write_raw(&line);
    }
    for i in 0..1000 {
        let v: serde_json::Value =
            serde_json::from_str(&fuzz.next_reply()).map_err(|e| format!("fuzz reply {i} is not JSON: {e}"))?;
        check!(v["ok"].is_boolean(), "fuzz reply {i} malformed: {v}");
    }
    let mut c = Client::connect(addr);
    let state = c.request(r#"{"id":1,"cmd":"query","topic":"state"}"#);
    check!(state["ok"] == true, "server stopped answering after fuzz");
    h.shutdown();

    // The logged total order replays to the same state.
    let cmds = parse_command_log(&fs::read_to_string(&log).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let p = parse_profile(&read_fixture("e4_pull_push.prof")).map_err(|e| e.to_string())?;
    let lib = AssetLibrary::load(&p, &PathBuf::from(prof.parent().unwrap())).map_err(|e| e.to_string())?;
    let mut eng = Engine::new(p, lib).map_err(|e| e.to_string())?;
    let until = state["data"]["tick"].as_u64().unwrap();
    Replay::new(&cmds, &[]).advance_to(&mut eng, until, |_| Ok(())).map_err(|e| e.to_string())?;
    let mut live = state["data"].clone();
    live.as_object_mut().unwrap().remove("paused");
    let replayed = eng.query("state").map_err(|e| e.to_string())?;
    if replayed != live {
        let diff: Vec<String> = live
            .as_object()
            .unwrap()
            .iter()
            .filter(|(k, v)| replayed.get(k.as_str()) != Some(v))
            .map(|(k, v)| format!("{k}: live {v} vs replay {}", replayed[k.as_str()]))
            .collect();
        return Err(format!("replayed state differs from the live one: {}", diff.join("; ")));
    }
    Ok(format!("3 clients x 40 requests bijective, 1000 fuzz lines, log replays to tick {until}"))
}

// ---------------------------------------------------------------------------

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("luminance alpha", luminance),
        ("calibration", calibration),
        ("transition suite", transitions),
        ("compositor oracle", compositor),
        ("morphology oracle", morphology),
        ("E1 fixture reproduction", e1_fixture),
        ("determinism", determinism),
        ("parser", parser),
        ("proximity", proximity),
        ("wire protocol", wire),
    ];
    // Failures are reported by line; keep panic noise out of the output.
    panic::set_hook(Box::new(|_| {}));
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let outcome = panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
