//! Remote generator against a scripted local chat-completion server.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::{Arc, Mutex};
use std::thread;

use serde_json::{json, Value};

use chartsynth::datagen::{generate_for_type, procedural_data, BatchError, GeneratorConfig, RemoteConfig};
use chartsynth::model::{ChartRecord, ChartType, GeneratorKind, TopicSet};

enum Reply {
    Status(u16),
    Text(String),
}

struct Seen {
    bodies: Vec<Value>,
    auth: Vec<Option<String>>,
}

fn read_request(stream: &mut TcpStream) -> Option<(Option<String>, Value)> {
    let mut reader = BufReader::new(stream);
    let mut len = 0;
    let mut auth = None;
    let mut line = String::new();
    reader.read_line(&mut line).ok()?;
    loop {
        line.clear();
        reader.read_line(&mut line).ok()?;
        let l = line.trim_end();
        if l.is_empty() {
            break;
        }
        let (name, value) = l.split_once(':')?;
        match name.to_ascii_lowercase().as_str() {
            "content-length" => len = value.trim().parse().ok()?,
            "authorization" => auth = Some(value.trim().to_string()),
            _ => {}
        }
    }
    let mut body = vec![0; len];
    reader.read_exact(&mut body).ok()?;
    Some((auth, serde_json::from_slice(&body).ok()?))
}

/// Serves `script` in order, one reply per connection, then stops listening.
fn serve(script: Vec<Reply>) -> (String, Arc<Mutex<Seen>>, thread::JoinHandle<()>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
    let seen = Arc::new(Mutex::new(Seen { bodies: vec![], auth: vec![] }));
    let log = seen.clone();
    let handle = thread::spawn(move || {
        for reply in script {
            let (mut stream, _) = listener.accept().unwrap();
            let Some((auth, body)) = read_request(&mut stream) else { continue };
            {
                let mut s = log.lock().unwrap();
                s.bodies.push(body);
                s.auth.push(auth);
            }
            let (status, payload) = match reply {
                Reply::Status(code) => (code, json!({"error": "busy"})),
                Reply::Text(text) => (200, json!({"choices": [{"message": {"role": "assistant", "content": text}}]})),
            };
            let body = payload.to_string();
            let _ = write!(
                stream,
                "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                body.len()
            );
        }
    });
    (url, seen, handle)
}

fn pie_reply(seed: u64) -> Reply {
    let content = ChartRecord::from(procedural_data(ChartType::Pie, "energy", seed)).content;
    Reply::Text(format!("Here is the data:\n```json\n{content:#}\n```"))
}

fn config(url: &str, m: usize, token_env: &str) -> GeneratorConfig {
    let remote: RemoteConfig = serde_json::from_value(json!({
        "endpoint": url,
        "model": "test-model",
        "timeout_secs": 5,
        "max_retries": 1,
        "max_in_flight": 1,
        "token_env": token_env,
    }))
    .unwrap();
    GeneratorConfig { kind: GeneratorKind::Remote, seed: 3, remote: Some(remote), batch_size: m }
}

#[test]
fn retries_validates_and_records_prompts() {
    let script = vec![
        Reply::Status(503),
        pie_reply(1),
        Reply::Text("Sorry, I cannot produce that.".into()),
        pie_reply(2),
        pie_reply(3),
    ];
    let (url, seen, handle) = serve(script);
    std::env::set_var("CHARTSYNTH_TEST_TOKEN", "sekrit");
    let topics = TopicSet::parse("energy\n").unwrap();
    let batch = generate_for_type(ChartType::Pie, &config(&url, 4, "CHARTSYNTH_TEST_TOKEN"), &topics).unwrap();
    handle.join().unwrap();

    assert_eq!(batch.data.len(), 3);
    assert_eq!((batch.rejections.attempted, batch.rejections.rejected), (4, 1));
    assert_eq!(batch.prompts.len(), 3);
    assert!(batch.data.iter().all(|d| d.provenance.generator == GeneratorKind::Remote));

    let seen = seen.lock().unwrap();
    assert_eq!(seen.bodies.len(), 5);
    assert!(seen.auth.iter().all(|a| a.as_deref() == Some("Bearer sekrit")));
    let first = &seen.bodies[0];
    assert_eq!(first["model"], "test-model");
    assert_eq!(first["messages"][0]["role"], "system");
    assert!(first["messages"][1]["content"].as_str().unwrap().contains("energy"));
}

#[test]
fn unreachable_endpoint_keeps_partial_results() {
    let (url, _, handle) = serve(vec![pie_reply(1), pie_reply(2)]);
    let topics = TopicSet::parse("energy\n").unwrap();
    let result = generate_for_type(ChartType::Pie, &config(&url, 5, "CHARTSYNTH_UNSET_TOKEN"), &topics);
    handle.join().unwrap();
    match result {
        Err(BatchError::Transport { partial, message }) => {
            assert_eq!(partial.data.len(), 2, "{message}");
            assert!(message.contains("2 attempts"), "{message}");
        }
        other => panic!("expected a transport error, got {:?}", other.map(|b| b.data.len())),
    }
}
