mod common;

use std::net::SocketAddr;

use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde_json::{json, Value};

use patchbench::harness::{load_run, review_router, EvalReport};

use common::{replay_config, run_replay};

struct Server {
    base: String,
    client: Client,
    _rt: tokio::runtime::Runtime,
}

impl Server {
    fn start(run_dir: &std::path::Path) -> Server {
        let rt = tokio::runtime::Runtime::new().unwrap();
        let run = load_run(run_dir).unwrap();
        let listener = rt
            .block_on(tokio::net::TcpListener::bind(SocketAddr::from(([127, 0, 0, 1], 0))))
            .unwrap();
        let addr = listener.local_addr().unwrap();
        rt.spawn(async move { axum::serve(listener, review_router(run)).await.unwrap() });
        Server {
            base: format!("http://{addr}"),
            client: Client::new(),
            _rt: rt,
        }
    }

    fn get(&self, path: &str) -> (StatusCode, Value) {
        let r = self.client.get(format!("{}{path}", self.base)).send().unwrap();
        let status = r.status();
        (status, r.json().unwrap())
    }

    fn rate(&self, id: &str, body: Value) -> (StatusCode, Value) {
        let r = self
            .client
            .post(format!("{}/samples/{id}/ratings", self.base))
            .json(&body)
            .send()
            .unwrap();
        let status = r.status();
        (status, r.json().unwrap())
    }

    fn ids(&self, query: &str) -> Vec<String> {
        let (status, v) = self.get(&format!("/samples{query}"));
        assert_eq!(status, StatusCode::OK);
        v.as_array()
            .unwrap()
            .iter()
            .map(|s| s["id"].as_str().unwrap().to_string())
            .collect()
    }

    fn report(&self) -> EvalReport {
        let (status, v) = self.get("/report");
        assert_eq!(status, StatusCode::OK);
        serde_json::from_value(v).unwrap()
    }
}

fn setup() -> (tempfile::TempDir, Server) {
    let config = replay_config(Some(&["additive", "church-bell", "ocean-waves"]), Some(3));
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    run_replay(&config, &dir);
    let server = Server::start(&dir);
    (tmp, server)
}

#[test]
fn listing_and_filters() {
    let (_tmp, s) = setup();
    let all = s.ids("");
    assert_eq!(all.len(), 18);
    let human = s.ids("?status=needs-human");
    assert!(!human.is_empty());
    assert!(human.iter().all(|id| !id.contains(":additive:")));
    assert_eq!(s.ids("?status=needs-human&resolution=open"), human);
    assert_eq!(s.ids("?unjudged_by=alice").len(), 18);

    let (status, v) = s.get("/samples?rater=alice");
    assert_eq!(status, StatusCode::OK);
    assert!(v.as_array().unwrap().iter().all(|x| x["judged"] == json!(false)));

    let (status, v) = s.get("/samples/patchscript:nope:0");
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(v["code"], "unknown-sample");
}

#[test]
fn audio_is_served_only_for_rendered_samples() {
    let (_tmp, s) = setup();
    let rendered = s.ids("?status=needs-human")[0].clone();
    let r = s.client.get(format!("{}/samples/{rendered}/audio", s.base)).send().unwrap();
    assert_eq!(r.status(), StatusCode::OK);
    assert_eq!(r.headers()["content-type"], "audio/wav");
    assert_eq!(&r.bytes().unwrap()[..4], b"RIFF");

    let broken = s.ids("?status=not-well-formed");
    assert!(!broken.is_empty());
    let (status, v) = s.get(&format!("/samples/{}/audio", broken[0]));
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(v["code"], "not-renderable");
    assert_eq!(v["error"], "not renderable");
}

#[test]
fn ratings_are_blind_until_submitted() {
    let (_tmp, s) = setup();
    let id = s.ids("?status=needs-human")[0].clone();

    let (status, detail) = s.get(&format!("/samples/{id}?rater=bob"));
    assert_eq!(status, StatusCode::OK);
    assert!(!detail["reference"].as_str().unwrap().is_empty());
    assert!(!detail["prompt"].as_str().unwrap().is_empty());
    assert!(detail["patch"].is_object());

    let (status, _) = s.rate(&id, json!({"rater": "alice", "judgment": "pass"}));
    assert_eq!(status, StatusCode::CREATED);

    // Bob has not judged, so Alice's vote stays hidden.
    let (_, detail) = s.get(&format!("/samples/{id}?rater=bob"));
    assert!(detail["ratings"].is_null());
    assert!(detail["my_rating"].is_null());
    assert_eq!(detail["judged"], json!(false));

    let (status, _) = s.rate(&id, json!({"rater": "bob", "judgment": "fail"}));
    assert_eq!(status, StatusCode::CREATED);
    let (_, detail) = s.get(&format!("/samples/{id}?rater=bob"));
    assert_eq!(detail["ratings"].as_array().unwrap().len(), 2);
    assert_eq!(detail["my_rating"]["judgment"], "fail");
    assert_eq!(detail["resolution"], "pending");

    assert!(!s.ids("?unjudged_by=bob").contains(&id));
    assert!(s.ids("?unjudged_by=carol").contains(&id));
}

#[test]
fn rating_errors() {
    let (_tmp, s) = setup();
    let id = s.ids("?status=needs-human")[0].clone();

    let (status, v) = s.rate(&id, json!({"rater": "alice", "judgment": "maybe"}));
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(v["code"], "malformed-rating");
    let (status, _) = s.rate(&id, json!({"rater": "", "judgment": "pass"}));
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = s.rate(&id, json!({"rater": "alice", "judgment": "pass", "extra": 1}));
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = s.rate(&id, json!({"sample": "other", "rater": "alice", "judgment": "pass"}));
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = s.rate(&id, json!({"rater": "a", "judgment": "fail", "adjudicated": "pass"}));
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (status, v) = s.rate("patchscript:church-bell:99", json!({"rater": "alice", "judgment": "pass"}));
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(v["code"], "unknown-sample");

    let specific = s.ids("?status=pass");
    let (status, v) = s.rate(&specific[0], json!({"rater": "alice", "judgment": "pass"}));
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(v["code"], "not-rateable");

    assert_eq!(s.rate(&id, json!({"rater": "alice", "judgment": "pass"})).0, StatusCode::CREATED);
    let (status, v) = s.rate(&id, json!({"rater": "alice", "judgment": "fail"}));
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(v["code"], "duplicate-rating");
}

#[test]
fn ratings_flow_into_the_report_and_the_run_dir() {
    let (tmp, s) = setup();
    let human = s.ids("?status=needs-human");
    assert!(human.len() >= 2);
    let before = s.report();
    let total_c = |r: &EvalReport| r.categories.iter().map(|c| c.totals.c).sum::<u64>();
    let total_pending = |r: &EvalReport| r.categories.iter().map(|c| c.pending).sum::<u64>();

    // Agreement counts as a pass.
    for rater in ["alice", "bob"] {
        s.rate(&human[0], json!({"rater": rater, "judgment": "pass"}));
    }
    let agreed = s.report();
    assert_eq!(total_c(&agreed), total_c(&before) + 1);

    // Disagreement stays out of c until adjudicated.
    s.rate(&human[1], json!({"rater": "alice", "judgment": "pass"}));
    s.rate(&human[1], json!({"rater": "bob", "judgment": "fail"}));
    let split = s.report();
    assert_eq!(total_c(&split), total_c(&agreed));
    assert_eq!(total_pending(&split), total_pending(&agreed) + 1);

    let (status, _) = s.rate(
        &human[1],
        json!({"rater": "alice+bob", "judgment": "pass", "adjudicated": "pass"}),
    );
    assert_eq!(status, StatusCode::CREATED);
    let (status, _) = s.rate(
        &human[1],
        json!({"rater": "carol+dan", "judgment": "fail", "adjudicated": "fail"}),
    );
    assert_eq!(status, StatusCode::CONFLICT);
    let settled = s.report();
    assert_eq!(total_c(&settled), total_c(&agreed) + 1);
    assert_eq!(total_pending(&settled), total_pending(&agreed));

    // Everything was persisted: a fresh load gives the same report.
    let reloaded = load_run(&tmp.path().join("run")).unwrap();
    assert_eq!(reloaded.ratings.len(), 5);
    assert_eq!(reloaded.report(), settled);
}
