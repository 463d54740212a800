use modelsets::exploratory::{exploratory_phase, scan_candidates, Decision, ScriptedAnswer, ScriptedSource, TerminalSource};
use modelsets::session::{SessionRequest, SessionState, TOKEN_HEADER};
use modelsets::{Dataset, Family, Response};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde_json::{json, Value};

const TOKEN: &str = "s3cret";
const RETAINED: [usize; 5] = [0, 1, 2, 3, 4];

fn data() -> Dataset {
    let mut r = ChaCha8Rng::seed_from_u64(77);
    let n = 120;
    let x = DMatrix::from_fn(n, 6, |_, _| r.sample::<f64, _>(StandardNormal));
    let y = (0..n)
        .map(|i| x[(i, 0)] * x[(i, 0)] + x[(i, 1)] * x[(i, 2)] + 0.8 * x[(i, 3)] * x[(i, 4)] + r.sample::<f64, _>(StandardNormal))
        .collect();
    Dataset::with_default_names(x, Response::Continuous { y })
}

fn open() -> (Dataset, SessionState) {
    let ds = data();
    let s = SessionState::open("sess", TOKEN, &ds, &RETAINED, Family::Gaussian, 0.01).unwrap();
    (ds, s)
}

fn call(s: &mut SessionState, method: &str, path: &str, body: Value) -> (u16, Value) {
    let bytes = if body.is_null() { Vec::new() } else { serde_json::to_vec(&body).unwrap() };
    let r = s.handle(&SessionRequest::new(method, path, Some(TOKEN), &bytes));
    (r.status, r.body)
}

#[test]
fn fresh_session_lists_pending_candidates() {
    let (ds, mut s) = open();
    let k = scan_candidates(&ds, &RETAINED, Family::Gaussian, 0.01).unwrap().len();
    assert!(k >= 3);
    let (status, body) = call(&mut s, "GET", "/session", Value::Null);
    assert_eq!(status, 200);
    assert_eq!(body["pending"], k);
    assert_eq!(body["decided"], 0);
    assert_eq!(body["candidates"].as_array().unwrap().len(), k);
    assert_eq!(body["retained"], json!(["x1", "x2", "x3", "x4", "x5"]));
    assert!(body["candidates"].as_array().unwrap().iter().all(|c| c["decision"] == "pending"));
    let (status, plot) = call(&mut s, "GET", "/candidates/0/plot", Value::Null);
    assert_eq!(status, 200);
    assert_eq!(plot["plots"][0]["points"].as_array().unwrap().len(), ds.n());
    assert_eq!(call(&mut s, "GET", &format!("/candidates/{k}/plot"), Value::Null).0, 404);
    assert_eq!(call(&mut s, "GET", "/candidates/abc/plot", Value::Null).0, 400);
    assert_eq!(call(&mut s, "DELETE", "/session", Value::Null).0, 404);
    assert_eq!(TOKEN_HEADER, "X-Session-Token");
}

#[test]
fn all_discarded_gives_mains_only() {
    let (_, mut s) = open();
    let k = s.pending();
    for id in 0..k {
        assert_eq!(call(&mut s, "POST", "/decisions", json!({ "candidate": id, "keep": false })).0, 200);
    }
    let (status, body) = call(&mut s, "POST", "/finalize", Value::Null);
    assert_eq!(status, 200);
    assert_eq!(body["kept"], json!([]));
    assert_eq!(body["comprehensive"]["size"], 5);
    assert_eq!(call(&mut s, "POST", "/finalize", Value::Null).0, 409);
}

#[test]
fn malformed_bodies_are_rejected() {
    let (_, mut s) = open();
    assert_eq!(call(&mut s, "POST", "/decisions", json!({ "candidate": 0 })).0, 400);
    let r = s.handle(&SessionRequest::new("POST", "/decisions", Some(TOKEN), b"not json"));
    assert_eq!(r.status, 400);
    assert_eq!(r.body["error"], "bad_request");
}

#[test]
fn session_script_and_terminal_agree() {
    let (ds, mut s) = open();
    let cands = scan_candidates(&ds, &RETAINED, Family::Gaussian, 0.01).unwrap();
    let keep: Vec<bool> = (0..cands.len()).map(|i| i % 3 != 1).collect();

    // Decide out of order over the session protocol.
    for id in (0..cands.len()).rev() {
        call(&mut s, "POST", "/decisions", json!({ "candidate": id, "keep": keep[id] }));
    }
    let (_, fin) = call(&mut s, "POST", "/finalize", Value::Null);
    let via_session = s.outcome();

    let answers = cands.iter().zip(&keep).map(|(c, &k)| ScriptedAnswer { term: c.term, keep: k });
    let via_script = exploratory_phase(&ds, &RETAINED, Family::Gaussian, 0.01, &mut ScriptedSource::new(answers)).unwrap();
    let typed: String = keep.iter().map(|&k| if k { "N\n" } else { "Y\n" }).collect();
    let via_terminal =
        exploratory_phase(&ds, &RETAINED, Family::Gaussian, 0.01, &mut TerminalSource::new(typed.as_bytes(), Vec::new())).unwrap();

    assert_eq!(via_session, via_script);
    assert_eq!(via_script, via_terminal);
    assert!(via_session.candidates.iter().all(|c| c.decision != Decision::Pending));
    let labels: Vec<String> = via_script.kept_terms().iter().map(|t| t.label(&ds.names)).collect();
    assert_eq!(fin["kept"], json!(labels));
    assert_eq!(fin["comprehensive"]["terms"], json!(via_script.comprehensive().labels(&ds.names)));
}

#[test]
fn state_serializes_without_the_token() {
    let (_, s) = open();
    let text = serde_json::to_string(&s).unwrap();
    assert!(!text.contains(TOKEN));
    let r = s.clone().handle(&SessionRequest::new("GET", "/session", Some("wrong"), b""));
    assert_eq!(r.status, 401);
}
