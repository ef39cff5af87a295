use std::net::SocketAddr;
use std::time::{Duration, Instant};

use futures_util::{SinkExt, StreamExt};
use rovergym_core::registry::EnvListing;
use rovergym_core::{EnvError, RenderFrame};
use rovergym_teleop::{serve, KillReport, ServeConfig, Server, TeleopError};
use serde_json::Value;
use tokio::net::TcpStream;
use tokio::time::{sleep, timeout};
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{connect_async, MaybeTlsStream, WebSocketStream};

type Ws = WebSocketStream<MaybeTlsStream<TcpStream>>;

const DT: f64 = 0.02;

async fn start() -> Server {
    serve("127.0.0.1:0".parse().unwrap(), ServeConfig::default())
        .await
        .unwrap()
}

async fn connect(addr: SocketAddr, id: &str) -> Ws {
    connect_async(format!("ws://{addr}/session/{id}")).await.unwrap().0
}

enum Inbound {
    Frame(RenderFrame),
    Reply(Value),
}

async fn next(ws: &mut Ws) -> Option<Inbound> {
    loop {
        match timeout(Duration::from_secs(5), ws.next()).await.ok()?? {
            Ok(Message::Text(t)) => {
                let v: Value = serde_json::from_str(t.as_str()).unwrap();
                return Some(if v.get("tick").is_some() {
                    Inbound::Frame(RenderFrame::from_json(t.as_str()).unwrap())
                } else {
                    Inbound::Reply(v)
                });
            }
            Ok(Message::Close(_)) | Err(_) => return None,
            Ok(_) => continue,
        }
    }
}

async fn next_frame(ws: &mut Ws) -> RenderFrame {
    loop {
        if let Inbound::Frame(f) = next(ws).await.expect("socket open") {
            return f;
        }
    }
}

async fn next_reply(ws: &mut Ws) -> Value {
    loop {
        if let Inbound::Reply(v) = next(ws).await.expect("socket open") {
            return v;
        }
    }
}

/// Frames received over `window`, in order.
async fn collect_frames(ws: &mut Ws, window: Duration) -> Vec<RenderFrame> {
    let end = Instant::now() + window;
    let mut frames = Vec::new();
    while let Ok(Some(Ok(msg))) = timeout(end.saturating_duration_since(Instant::now()), ws.next()).await {
        if let Message::Text(t) = msg {
            if let Ok(f) = RenderFrame::from_json(t.as_str()) {
                frames.push(f);
            }
        }
    }
    frames
}

async fn send(ws: &mut Ws, text: &str) {
    ws.send(Message::Text(text.into())).await.unwrap();
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn idle_session_broadcasts_and_stays_put() {
    let server = start().await;
    let mut ws = connect(server.local_addr(), "idle").await;
    let frames = collect_frames(&mut ws, Duration::from_secs(1)).await;
    assert!((15..=25).contains(&frames.len()), "{} frames", frames.len());
    let x0 = frames[0].pose.x;
    assert!(frames.iter().all(|f| f.pose.x == x0 && f.pose.y == frames[0].pose.y));
    assert!(frames.windows(2).all(|w| w[0].tick < w[1].tick));
    server.kill_all().await;
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn latched_twist_moves_one_metre_per_second() {
    let server = start().await;
    let mut ws = connect(server.local_addr(), "drive").await;
    let x0 = next_frame(&mut ws).await.pose.x;
    let t0 = Instant::now();
    send(&mut ws, r#"{"kind":"twist","twist":{"linear":1.0,"angular":0.0}}"#).await;
    sleep(Duration::from_secs(1)).await;
    send(&mut ws, r#"{"kind":"twist","twist":{"linear":0.0,"angular":0.0}}"#).await;
    let held = t0.elapsed().as_secs_f64();
    let after = collect_frames(&mut ws, Duration::from_millis(300)).await;
    let moved = after.last().unwrap().pose.x - x0;
    assert!(held < 1.0 + DT, "sender stalled for {held} s");
    assert!(
        (moved - 1.0).abs() <= DT + 1e-9,
        "moved {moved} m while the twist was held {held} s"
    );
    server.kill_all().await;
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn acks_and_bad_commands() {
    let server = start().await;
    let mut ws = connect(server.local_addr(), "acks").await;
    for (text, ack) in [
        (r#"{"kind":"twist","twist":{"linear":0.2,"angular":0.1}}"#, "twist"),
        (r#"{"kind":"suspension","motors":[0,0,0,0]}"#, "suspension"),
        (r#"{"kind":"stop"}"#, "stop"),
    ] {
        send(&mut ws, text).await;
        assert_eq!(next_reply(&mut ws).await, serde_json::json!({ "ack": ack }));
    }
    for bad in [
        "{",
        r#"{"kind":"warp"}"#,
        r#"{"kind":"reset","motors":[1,2,3,4]}"#,
        "[]",
    ] {
        send(&mut ws, bad).await;
        assert_eq!(next_reply(&mut ws).await, serde_json::json!({ "error": "bad_command" }));
    }
    ws.send(Message::Binary(vec![1, 2, 3].into())).await.unwrap();
    assert_eq!(next_reply(&mut ws).await, serde_json::json!({ "error": "bad_command" }));
    // still alive and broadcasting
    let a = next_frame(&mut ws).await.tick;
    let b = next_frame(&mut ws).await.tick;
    assert!(b > a);
    server.kill_all().await;
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn reset_restarts_at_tick_zero() {
    let server = start().await;
    let mut ws = connect(server.local_addr(), "reset").await;
    send(&mut ws, r#"{"kind":"twist","twist":{"linear":1.0,"angular":0.0}}"#).await;
    sleep(Duration::from_millis(300)).await;
    send(&mut ws, r#"{"kind":"reset"}"#).await;
    loop {
        match next(&mut ws).await.unwrap() {
            Inbound::Reply(v) if v["ack"] == "reset" => break,
            _ => {}
        }
    }
    // the reset frame is published before any further step
    let mut saw_zero = false;
    for _ in 0..5 {
        if next_frame(&mut ws).await.tick == 0 {
            saw_zero = true;
            break;
        }
    }
    assert!(saw_zero);
    server.kill_all().await;
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn slow_subscriber_does_not_stall_the_loop() {
    let server = start().await;
    let addr = server.local_addr();
    let mut lazy = connect(addr, "shared").await;
    let mut active = connect(addr, "shared").await;
    let first = next_frame(&mut active).await.tick;
    let frames = collect_frames(&mut active, Duration::from_secs(1)).await;
    let last = frames.last().unwrap().tick;
    assert!(last - first >= 40, "loop advanced only {} ticks", last - first);
    let catch_up = collect_frames(&mut lazy, Duration::from_millis(200)).await;
    assert!(catch_up.windows(2).all(|w| w[0].tick < w[1].tick));
    assert!(catch_up.last().unwrap().tick >= last);
    server.kill_all().await;
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn kill_all_is_idempotent_and_closes_everything() {
    let server = start().await;
    let addr = server.local_addr();
    let mut a = connect(addr, "one").await;
    let mut b = connect(addr, "two").await;
    next_frame(&mut a).await;
    next_frame(&mut b).await;
    assert_eq!(server.session_ids(), vec!["one".to_string(), "two".to_string()]);
    assert_eq!(server.kill_all().await, 2);
    assert_eq!(server.kill_all().await, 0);
    for ws in [&mut a, &mut b] {
        while next(ws).await.is_some() {}
    }
    timeout(Duration::from_secs(5), server.wait()).await.unwrap().unwrap();
    assert!(connect_async(format!("ws://{addr}/session/three")).await.is_err());
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn http_listing_and_kill() {
    let server = start().await;
    let addr = server.local_addr();
    let client = reqwest::Client::new();
    let listing: Vec<EnvListing> = client
        .get(format!("http://{addr}/envs"))
        .send()
        .await
        .unwrap()
        .json()
        .await
        .unwrap();
    let dims: Vec<(String, usize, usize)> = listing
        .into_iter()
        .map(|l| (l.id, l.observation_dim, l.action_dim))
        .collect();
    assert!(dims.contains(&("lsd_force_lidar-v0".into(), 3, 6)));
    assert!(dims.contains(&("leo_nav-v0".into(), 773, 2)));
    server.open_session("bg").unwrap();
    let report: KillReport = client
        .post(format!("http://{addr}/kill"))
        .send()
        .await
        .unwrap()
        .json()
        .await
        .unwrap();
    assert_eq!(report, KillReport { stopped: 1 });
    timeout(Duration::from_secs(5), server.wait()).await.unwrap().unwrap();
    assert!(client.get(format!("http://{addr}/envs")).send().await.is_err());
}

#[tokio::test]
async fn serve_errors() {
    let config = ServeConfig {
        env_id: "nope-v0".into(),
        ..ServeConfig::default()
    };
    assert!(matches!(
        serve("127.0.0.1:0".parse().unwrap(), config).await,
        Err(TeleopError::Env(EnvError::UnknownEnvironment(_)))
    ));
    let server = start().await;
    assert!(matches!(
        serve(server.local_addr(), ServeConfig::default()).await,
        Err(TeleopError::BindFailure { .. })
    ));
    let zero = ServeConfig {
        sim_hz: 0.0,
        ..ServeConfig::default()
    };
    assert!(matches!(
        serve("127.0.0.1:0".parse().unwrap(), zero).await,
        Err(TeleopError::InvalidConfig(_))
    ));
    server.kill_all().await;
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn cockpit_directory_is_served() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<title>cockpit</title>").unwrap();
    let config = ServeConfig {
        cockpit_dir: Some(dir.path().to_path_buf()),
        ..ServeConfig::default()
    };
    let server = serve("127.0.0.1:0".parse().unwrap(), config).await.unwrap();
    let body = reqwest::get(format!("http://{}/", server.local_addr()))
        .await
        .unwrap()
        .text()
        .await
        .unwrap();
    assert_eq!(body, "<title>cockpit</title>");
    server.kill_all().await;
    let missing = ServeConfig {
        cockpit_dir: Some(dir.path().join("absent")),
        ..ServeConfig::default()
    };
    assert!(matches!(
        serve("127.0.0.1:0".parse().unwrap(), missing).await,
        Err(TeleopError::InvalidConfig(_))
    ));
}
