use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::thread;
use std::time::Duration;

use fta_copilot::{
    generate_candidate, run_repair_loop, ChatMessage, ChatProvider, CopilotError, HttpChatProvider, Transcript,
    EMPTY_BODY, LIDAR_MOCK_RESPONSES,
};
use serde_json::{json, Value};

/// A raw request as seen by the mock server.
struct Seen {
    head: String,
    body: Value,
}

fn read_request(stream: &mut TcpStream) -> Seen {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut head = String::new();
    let mut length = 0;
    loop {
        let mut line = String::new();
        reader.read_line(&mut line).unwrap();
        if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
            length = v.trim().parse().unwrap();
        }
        if line == "\r\n" || line.is_empty() {
            break;
        }
        head.push_str(&line);
    }
    let mut body = vec![0; length];
    reader.read_exact(&mut body).unwrap();
    Seen {
        head,
        body: serde_json::from_slice(&body).unwrap_or(Value::Null),
    }
}

/// Serves one canned `(status, body)` per connection and returns what it saw.
fn serve(replies: Vec<(u16, String)>) -> (String, thread::JoinHandle<Vec<Seen>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
    let handle = thread::spawn(move || {
        let mut seen = Vec::new();
        for (status, body) in replies {
            let (mut stream, _) = listener.accept().unwrap();
            seen.push(read_request(&mut stream));
            let response = format!(
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
            stream.write_all(response.as_bytes()).unwrap();
        }
        seen
    });
    (url, handle)
}

fn completion(content: &str) -> String {
    json!({ "choices": [{ "message": { "role": "assistant", "content": content } }] }).to_string()
}

#[test]
fn posts_chat_completion_and_reads_reply() {
    let (url, server) = serve(vec![(200, completion("hello"))]);
    let provider = HttpChatProvider::new(url, "test-model", Some("sk-abc".into()));
    let reply = provider.complete(&[ChatMessage::user("hi")]).unwrap();
    assert_eq!(reply, "hello");
    let seen = server.join().unwrap();
    assert!(seen[0].head.starts_with("POST /v1/chat/completions"));
    assert!(seen[0].head.to_ascii_lowercase().contains("authorization: bearer sk-abc"));
    assert_eq!(
        seen[0].body,
        json!({ "model": "test-model", "messages": [{ "role": "user", "content": "hi" }] })
    );
}

#[test]
fn no_credential_means_no_authorization_header() {
    let (url, server) = serve(vec![(200, completion("ok"))]);
    HttpChatProvider::new(url, "m", None).complete(&[]).unwrap();
    assert!(!server.join().unwrap()[0].head.to_ascii_lowercase().contains("authorization"));
}

#[test]
fn server_error_status() {
    let (url, server) = serve(vec![(500, "internal".into())]);
    let err = generate_candidate(&HttpChatProvider::new(url, "m", None), "x").unwrap_err();
    assert_eq!(err, CopilotError::ProviderError { status: 500, body: "internal".into() });
    server.join().unwrap();
}

#[test]
fn empty_body_is_marked() {
    let (url, server) = serve(vec![(200, String::new())]);
    let err = generate_candidate(&HttpChatProvider::new(url, "m", None), "x").unwrap_err();
    assert_eq!(err, CopilotError::ProviderError { status: 200, body: EMPTY_BODY.into() });
    server.join().unwrap();
}

#[test]
fn refused_connection_is_unreachable() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let provider = HttpChatProvider::new(format!("http://127.0.0.1:{port}/"), "m", None);
    assert!(matches!(provider.complete(&[]), Err(CopilotError::ProviderUnreachable(_))));
}

#[test]
fn silent_server_times_out() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/", listener.local_addr().unwrap());
    let holder = thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        thread::sleep(Duration::from_millis(1500));
        drop(stream);
    });
    let provider = HttpChatProvider::new(url, "m", None).with_timeout(Duration::from_millis(300));
    assert_eq!(provider.complete(&[]), Err(CopilotError::Timeout));
    holder.join().unwrap();
}

#[test]
fn credential_never_reaches_the_transcript() {
    let secret = "sk-live-9f8e7d6c5b4a";
    let replies = LIDAR_MOCK_RESPONSES.iter().map(|r| (200, completion(r))).collect();
    let (url, server) = serve(replies);
    let provider = HttpChatProvider::new(url, "m", Some(secret.into()));
    let session = run_repair_loop(&provider, "Lidar sensor in Autonomy", 7).unwrap();
    assert!(session.outcome.is_success());
    let seen = server.join().unwrap();
    assert_eq!(seen.len(), 8);
    let json = Transcript::from_session(&session, &provider.secrets()).to_json();
    assert!(!json.contains(secret));
    assert!(!format!("{provider:?}").contains(secret));
    assert!(!format!("{session:?}").contains(secret));
}
