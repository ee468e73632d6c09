use std::time::Duration;

use futures_util::{SinkExt, StreamExt};
use serde_json::{json, Value};
use tokio_tungstenite::tungstenite::Message;

use star::agent::AgentConfig;
use star::board::Board;
use star::gateway::{Gateway, GatewayConfig, SessionConfig};
use star::piece::Piece;
use star::placement::PlacementAction;
use star::proxy::{proxy_signal, ProxyPolicy};
use star::runner::{read_records, run_proxy_suite, write_records, MatchConfig};
use star::social::{AgentId, SocialCodeKind};

type Ws =
    tokio_tungstenite::WebSocketStream<tokio_tungstenite::MaybeTlsStream<tokio::net::TcpStream>>;

async fn start(config: GatewayConfig) -> String {
    let gateway = Gateway::bind("127.0.0.1:0", config).await.unwrap();
    let addr = gateway.local_addr().unwrap();
    tokio::spawn(gateway.run());
    format!("ws://{addr}")
}

async fn recv(ws: &mut Ws) -> Value {
    loop {
        let frame = tokio::time::timeout(Duration::from_secs(10), ws.next())
            .await
            .expect("server answered in time")
            .expect("stream open")
            .unwrap();
        if let Message::Text(t) = frame {
            return serde_json::from_str(&t).unwrap();
        }
    }
}

async fn send(ws: &mut Ws, v: Value) {
    ws.send(Message::text(v.to_string())).await.unwrap();
}

fn match_config(code: SocialCodeKind) -> MatchConfig {
    MatchConfig {
        social_code: code,
        games: 3,
        max_blocks_per_game: 120,
        ..MatchConfig::default()
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn scripted_proxy_client_reproduces_in_process_run() {
    let dir = tempfile::tempdir().unwrap();
    let url = start(GatewayConfig {
        record_dir: Some(dir.path().to_path_buf()),
        ..GatewayConfig::default()
    })
    .await;
    let code = SocialCodeKind::Simple;
    let config = match_config(code);
    let policy = ProxyPolicy::default();

    let (mut ws, _) = tokio_tungstenite::connect_async(url.as_str())
        .await
        .unwrap();
    let hello = recv(&mut ws).await;
    assert_eq!(hello["type"], "hello");
    let session = hello["session"].as_u64().unwrap();
    send(
        &mut ws,
        json!({"type": "control", "cmd": "config", "config": {"match": config}}),
    )
    .await;
    assert_eq!(recv(&mut ws).await["games"], 3);
    send(&mut ws, json!({"type": "control", "cmd": "start"})).await;

    let mut game_ends = 0;
    loop {
        let msg = recv(&mut ws).await;
        match msg["type"].as_str().unwrap() {
            "status" => {}
            "state" => {
                // the client only knows what is on the wire plus the team and code
                let board: Board = msg["board"].as_str().unwrap().parse().unwrap();
                let piece: Piece = serde_json::from_value(msg["piece"].clone()).unwrap();
                let action: PlacementAction =
                    serde_json::from_value(msg["action"].clone()).unwrap();
                let acting = AgentId(msg["actingAgent"].as_u64().unwrap() as u32);
                let raw = proxy_signal(
                    &policy,
                    config.social(),
                    &config.team,
                    acting,
                    &board,
                    piece,
                    action,
                )
                .unwrap();
                let feedback = json!({
                    "type": "feedback",
                    "effectiveness": raw.effectiveness,
                    "social": raw.social,
                    "game": msg["game"],
                    "step": msg["step"],
                });
                send(&mut ws, feedback).await;
            }
            "gameEnd" => game_ends += 1,
            "sessionEnd" => break,
            other => panic!("unexpected {other}: {msg}"),
        }
    }
    assert_eq!(game_ends, 3);
    ws.close(None).await.unwrap();

    let (expected, _) = run_proxy_suite(&config, &AgentConfig::default(), policy).unwrap();
    let mut expected_bytes = Vec::new();
    write_records(&expected, &mut expected_bytes).unwrap();

    let path = dir.path().join(format!("session-{session}.ndjson"));
    let wire_bytes = std::fs::read(&path).unwrap();
    assert_eq!(read_records(&wire_bytes[..]).unwrap(), expected);
    assert!(wire_bytes == expected_bytes, "records differ byte-wise");
}

#[tokio::test]
async fn silent_trainer_is_auto_advanced() {
    let url = start(GatewayConfig {
        session: SessionConfig {
            base: MatchConfig {
                games: 1,
                max_blocks_per_game: 4,
                ..MatchConfig::default()
            },
            agent: AgentConfig::default(),
        },
        feedback_timeout: Some(Duration::from_millis(20)),
        ..GatewayConfig::default()
    })
    .await;
    let (mut ws, _) = tokio_tungstenite::connect_async(url.as_str())
        .await
        .unwrap();
    recv(&mut ws).await;
    send(&mut ws, json!({"type": "control", "cmd": "start"})).await;
    let mut states = 0;
    loop {
        let msg = recv(&mut ws).await;
        match msg["type"].as_str().unwrap() {
            "state" => states += 1,
            "gameEnd" => assert_eq!(msg["actionsTotal"], 4),
            "sessionEnd" => break,
            _ => {}
        }
    }
    assert_eq!(states, 4);
}

#[tokio::test]
async fn idle_session_times_out() {
    let url = start(GatewayConfig {
        idle_timeout: Duration::from_millis(50),
        ..GatewayConfig::default()
    })
    .await;
    let (mut ws, _) = tokio_tungstenite::connect_async(url.as_str())
        .await
        .unwrap();
    assert_eq!(recv(&mut ws).await["type"], "hello");
    let msg = recv(&mut ws).await;
    assert_eq!(msg["type"], "error");
    assert_eq!(msg["kind"], "timeout");
}

#[tokio::test]
async fn malformed_frame_gets_protocol_error() {
    let url = start(GatewayConfig::default()).await;
    let (mut ws, _) = tokio_tungstenite::connect_async(url.as_str())
        .await
        .unwrap();
    recv(&mut ws).await;
    ws.send(Message::text("{\"type\":\"feedback\",\"social\":42}"))
        .await
        .unwrap();
    let msg = recv(&mut ws).await;
    assert_eq!(msg["type"], "error");
    assert_eq!(msg["kind"], "protocol");
    // the session is still usable
    send(&mut ws, json!({"type": "control", "cmd": "start"})).await;
    assert_eq!(recv(&mut ws).await["type"], "status");
    assert_eq!(recv(&mut ws).await["type"], "state");
}

#[tokio::test]
async fn sessions_are_independent() {
    let url = start(GatewayConfig::default()).await;
    let (mut a, _) = tokio_tungstenite::connect_async(url.as_str())
        .await
        .unwrap();
    let (mut b, _) = tokio_tungstenite::connect_async(url.as_str())
        .await
        .unwrap();
    let ha = recv(&mut a).await;
    let hb = recv(&mut b).await;
    assert_ne!(ha["session"], hb["session"]);
    send(&mut a, json!({"type": "control", "cmd": "start"})).await;
    recv(&mut a).await;
    let state = recv(&mut a).await;
    assert_eq!(state["session"], ha["session"]);
    send(
        &mut b,
        json!({"type": "feedback", "effectiveness": 1, "social": null}),
    )
    .await;
    assert_eq!(recv(&mut b).await["kind"], "stale");
}

#[tokio::test]
async fn auto_advance_only_covers_unanswered_actions() {
    let dir = tempfile::tempdir().unwrap();
    let url = start(GatewayConfig {
        session: SessionConfig {
            base: MatchConfig {
                games: 1,
                max_blocks_per_game: 8,
                ..MatchConfig::default()
            },
            agent: AgentConfig::default(),
        },
        feedback_timeout: Some(Duration::from_millis(300)),
        record_dir: Some(dir.path().to_path_buf()),
        ..GatewayConfig::default()
    })
    .await;
    let (mut ws, _) = tokio_tungstenite::connect_async(url.as_str())
        .await
        .unwrap();
    let session = recv(&mut ws).await["session"].as_u64().unwrap();
    send(&mut ws, json!({"type": "control", "cmd": "start"})).await;
    loop {
        let msg = recv(&mut ws).await;
        match msg["type"].as_str().unwrap() {
            "state" if msg["step"] != 3 => {
                // answer after most of the window has passed
                tokio::time::sleep(Duration::from_millis(150)).await;
                send(
                    &mut ws,
                    json!({"type": "feedback", "effectiveness": 1, "step": msg["step"]}),
                )
                .await;
            }
            "sessionEnd" => break,
            "error" => panic!("{msg}"),
            _ => {}
        }
    }
    let bytes = std::fs::read(dir.path().join(format!("session-{session}.ndjson"))).unwrap();
    let records = read_records(&bytes[..]).unwrap();
    let silent: Vec<usize> = records[0]
        .steps
        .iter()
        .filter(|s| s.signal.effectiveness.is_none())
        .map(|s| s.step)
        .collect();
    assert_eq!(records[0].steps.len(), 8);
    assert_eq!(silent, vec![3]);
}
