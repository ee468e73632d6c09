//! A live session end to end: the gateway on a local port and a scripted
//! client standing in for the browser UI. The client answers with the proxy's
//! judgments but only presses the social button, and leaves every fifth
//! action unanswered so the auto-advance timer moves the game on.
//!
//! To serve a real trainer instead: `star serve --addr 127.0.0.1:8765`.

use std::time::Duration;

use futures_util::{SinkExt, StreamExt};
use serde_json::{json, Value};
use tokio_tungstenite::tungstenite::Message;

use star::board::Board;
use star::gateway::{Gateway, GatewayConfig};
use star::piece::Piece;
use star::placement::PlacementAction;
use star::proxy::{proxy_signal, ProxyPolicy};
use star::runner::{read_records, MatchConfig};
use star::social::AgentId;

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    let records = tempfile::tempdir()?;
    let gateway = Gateway::bind(
        "127.0.0.1:0",
        GatewayConfig {
            feedback_timeout: Some(Duration::from_millis(250)),
            record_dir: Some(records.path().to_path_buf()),
            ..GatewayConfig::default()
        },
    )
    .await?;
    let url = format!("ws://{}", gateway.local_addr()?);
    tokio::spawn(gateway.run());

    let (mut ws, _) = tokio_tungstenite::connect_async(url.as_str()).await?;
    let config = MatchConfig {
        games: 2,
        ..MatchConfig::default()
    };
    ws.send(Message::text(
        json!({"type": "control", "cmd": "config", "config": {"match": config}}).to_string(),
    ))
    .await?;
    ws.send(Message::text(
        json!({"type": "control", "cmd": "start"}).to_string(),
    ))
    .await?;

    let policy = ProxyPolicy::default();
    let mut session = 0;
    while let Some(frame) = ws.next().await {
        let Message::Text(text) = frame? else {
            continue;
        };
        let msg: Value = serde_json::from_str(&text)?;
        match msg["type"].as_str().unwrap_or_default() {
            "hello" => {
                session = msg["session"].as_u64().unwrap_or_default();
                println!("session {session}: {} / {}", msg["design"], msg["code"]);
            }
            "state" => {
                let step = msg["step"].as_u64().unwrap_or_default();
                if step % 5 == 4 {
                    continue;
                }
                let board: Board = msg["board"].as_str().unwrap_or_default().parse()?;
                let piece: Piece = serde_json::from_value(msg["piece"].clone())?;
                let action: PlacementAction = serde_json::from_value(msg["action"].clone())?;
                let acting = AgentId(msg["actingAgent"].as_u64().unwrap_or_default() as u32);
                let raw = proxy_signal(
                    &policy,
                    config.social(),
                    &config.team,
                    acting,
                    &board,
                    piece,
                    action,
                )?;
                let reply = json!({"type": "feedback", "social": raw.social, "game": msg["game"], "step": step});
                ws.send(Message::text(reply.to_string())).await?;
            }
            "gameEnd" => println!(
                "game {}: {} actions, {} rows, {:.1}% permissible",
                msg["game"].as_u64().unwrap_or_default() + 1,
                msg["actionsTotal"],
                msg["rowsCleared"],
                msg["pctPermissible"].as_f64().unwrap_or_default()
            ),
            "sessionEnd" => break,
            "error" => println!("error: {}", msg["message"]),
            _ => {}
        }
    }
    ws.close(None).await.ok();

    let path = records.path().join(format!("session-{session}.ndjson"));
    let saved = read_records(std::io::BufReader::new(std::fs::File::open(&path)?))?;
    let silent = saved
        .iter()
        .flat_map(|r| &r.steps)
        .filter(|s| s.signal.social.is_none())
        .count();
    println!(
        "{} games saved; {silent} actions went unanswered",
        saved.len()
    );
    Ok(())
}
