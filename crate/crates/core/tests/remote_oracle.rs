//! Remote backend against a scripted local HTTP server.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use lsck::oracle::{
    ClMembershipQuery, ClVerdict, MlGroupQuery, Oracle, OracleBackend, QueryItem, RemoteConfig,
    RemoteOracle,
};
use lsck::Error;
use serde_json::{json, Value};

struct Captured {
    authorization: Option<String>,
    body: Value,
}

/// Serves one scripted `(status, body)` per connection, then stops.
fn serve(script: Vec<(u16, String)>) -> (String, Arc<Mutex<Vec<Captured>>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!(
        "http://{}/v1/chat/completions",
        listener.local_addr().unwrap()
    );
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = Arc::clone(&seen);
    thread::spawn(move || {
        for (status, body) in script {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream);
            let mut len = 0usize;
            let mut auth = None;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                let line = line.trim_end();
                if line.is_empty() {
                    break;
                }
                let lower = line.to_ascii_lowercase();
                if let Some(v) = lower.strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
                if lower.starts_with("authorization:") {
                    auth = Some(line["authorization:".len()..].trim().to_string());
                }
            }
            let mut buf = vec![0u8; len];
            reader.read_exact(&mut buf).unwrap();
            log.lock().unwrap().push(Captured {
                authorization: auth,
                body: serde_json::from_slice(&buf).unwrap_or(Value::Null),
            });
            let mut stream = reader.into_inner();
            write!(
                stream,
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            )
            .unwrap();
        }
    });
    (url, seen)
}

fn reply(content: &str) -> (u16, String) {
    (
        200,
        json!({"choices": [{"message": {"role": "assistant", "content": content}}]}).to_string(),
    )
}

fn config(url: String) -> RemoteConfig {
    let mut cfg = RemoteConfig::new(url, "sk-test", "test-model");
    cfg.initial_backoff = Duration::from_millis(1);
    cfg.timeout = Duration::from_secs(10);
    cfg
}

fn items(texts: &[&str]) -> Vec<QueryItem> {
    texts
        .iter()
        .enumerate()
        .map(|(id, t)| QueryItem {
            id,
            text: t.to_string(),
        })
        .collect()
}

#[test]
fn group_reply_becomes_partition_and_is_ledgered() {
    let (url, seen) = serve(vec![reply("GROUP: 1, 3\nGROUP: 2")]);
    let oracle = Oracle::new(RemoteOracle::new(config(url)));
    let q = MlGroupQuery::new(items(&["card lost", "weather today", "missing card"])).unwrap();
    let resp = oracle.query_ml_group(&q).unwrap();
    assert_eq!(resp.groups(), &[vec![0, 2], vec![1]]);
    assert_eq!(oracle.totals().ml_queries, 1);
    assert_eq!(oracle.ledger().transcript().len(), 1);

    let seen = seen.lock().unwrap();
    assert_eq!(seen[0].authorization.as_deref(), Some("Bearer sk-test"));
    assert_eq!(seen[0].body["model"], "test-model");
    let prompt = seen[0].body["messages"][0]["content"].as_str().unwrap();
    assert!(prompt.contains("1. card lost") && prompt.contains("3. missing card"));
}

#[test]
fn server_errors_are_retried() {
    let (url, seen) = serve(vec![
        (500, "{}".into()),
        (429, "{}".into()),
        reply("MATCH: 2"),
    ]);
    let backend = RemoteOracle::new(config(url));
    let q = ClMembershipQuery::new(
        items(&["refund", "exchange rate"]),
        QueryItem {
            id: 9,
            text: "currency conversion".into(),
        },
    )
    .unwrap();
    assert_eq!(backend.cl_membership(&q).unwrap(), ClVerdict::Matched(1));
    assert_eq!(seen.lock().unwrap().len(), 3);
}

#[test]
fn unparseable_replies_exhaust_attempts() {
    let (url, _) = serve(vec![reply("maybe?"), reply("GROUP: 7"), reply("sure")]);
    let backend = RemoteOracle::new(config(url));
    let q = MlGroupQuery::new(items(&["a", "b"])).unwrap();
    match backend.ml_group(&q, 1) {
        Err(Error::OracleParse { attempts, raw, .. }) => {
            assert_eq!(attempts, 3);
            assert_eq!(raw, "sure");
        }
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn unreachable_endpoint_is_a_transport_error() {
    let port = TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap()
        .port();
    let mut cfg = config(format!("http://127.0.0.1:{port}/v1"));
    cfg.max_attempts = 2;
    let q = MlGroupQuery::new(items(&["a", "b"])).unwrap();
    match RemoteOracle::new(cfg).ml_group(&q, 1) {
        Err(Error::OracleTransport { attempts, .. }) => assert_eq!(attempts, 2),
        other => panic!("expected a transport error, got {other:?}"),
    }
}
