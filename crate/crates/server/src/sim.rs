//! Load and robustness drivers shared by the test suites.

use std::net::SocketAddr;

use dialogos_core::ids::InterventionId;
use dialogos_core::protocol::{ServerFrame, MAX_FRAME_BYTES};
use rand::Rng;
use tokio::io::{AsyncBufReadExt, AsyncWriteExt, BufReader};
use tokio::net::TcpStream;

const VALID: &[&str] = &[
    r#"{"t":"hello","user":"u1","version":1}"#,
    r#"{"t":"join","channel":"c","subscribe":true}"#,
    r#"{"t":"post","channel":"c","act":"demander","body":"Comment ?"}"#,
    r#"{"t":"post","channel":"c","parent":3,"act":"repondre","body":"ainsi","ctx":{"activity":"A1"}}"#,
    r#"{"t":"act_menu","channel":"c","node":3}"#,
    r#"{"t":"context_open","object":"O1"}"#,
    r#"{"t":"open","message":3,"mode":"contextual"}"#,
    r#"{"t":"peer_query","tags":["tableur"],"k":5}"#,
    r#"{"t":"offers_set","tags":["tableur"]}"#,
];

/// A line that no handler may accept: broken JSON, wrong shapes, wrong
/// types, unknown tags or oversized payloads. Never contains a newline.
pub fn malformed_frame<R: Rng>(rng: &mut R) -> String {
    let base = VALID[rng.gen_range(0..VALID.len())];
    match rng.gen_range(0..10) {
        // strict prefix of an object is never a complete object
        0 => base[..rng.gen_range(0..base.len())].to_string(),
        1 => {
            let len = rng.gen_range(1..64);
            (0..len)
                .map(|_| char::from_u32(rng.gen_range(0x20..0x2FFF)).unwrap_or('?'))
                .collect()
        }
        2 => base.replacen("\"t\":\"", "\"t\":\"x_", 1),
        3 => base.replacen("\"t\":", "\"tag\":", 1),
        4 => {
            let values = ["[]", "null", "true", "42", "\"post\"", "{}", "[1,2]"];
            values[rng.gen_range(0..values.len())].to_string()
        }
        5 => {
            // a required field with the wrong type
            let swaps = [
                ("\"version\":1", "\"version\":\"1\""),
                ("\"channel\":\"c\"", "\"channel\":7"),
                ("\"k\":5", "\"k\":-5"),
                ("\"message\":3", "\"message\":\"m3\""),
                ("\"tags\":[\"tableur\"]", "\"tags\":\"tableur\""),
                ("\"body\":\"Comment ?\"", "\"body\":null"),
                ("\"object\":\"O1\"", "\"object\":[\"O1\"]"),
                ("\"mode\":\"contextual\"", "\"mode\":\"sideways\""),
                ("\"node\":3", "\"node\":3.5"),
                ("\"user\":\"u1\"", "\"user\":{}"),
            ];
            let (from, to) = swaps[rng.gen_range(0..swaps.len())];
            if base.contains(from) {
                base.replacen(from, to, 1)
            } else {
                format!("{{\"t\":\"hello\",{}}}", to)
            }
        }
        6 => {
            // drop a required field; `tags` alone may be omitted
            if base.contains("peer_query") {
                return r#"{"t":"peer_query","tags":["tableur"]}"#.to_string();
            }
            match base.find(',') {
                Some(i) => {
                    let rest = &base[i + 1..];
                    match rest.find([',', '}']) {
                        Some(j) if rest.as_bytes()[j] == b',' => {
                            format!("{}{}", &base[..i + 1], &rest[j + 1..])
                        }
                        _ => format!("{}}}", &base[..i]),
                    }
                }
                None => "{\"t\":\"post\"}".to_string(),
            }
        }
        7 => format!("{}{}", base, "}"),
        8 => {
            let pad = "a".repeat(MAX_FRAME_BYTES + rng.gen_range(1..1000));
            format!("{{\"t\":\"post\",\"channel\":\"c\",\"act\":\"demander\",\"body\":\"{pad}\"}}")
        }
        _ => base.replace(':', "="),
    }
}

/// What one simulated client observed.
#[derive(Debug, Clone, Default)]
pub struct ClientTrace {
    /// Ids of posts this client had acknowledged, in send order.
    pub acked: Vec<InterventionId>,
    /// Ids carried by pushed events, in arrival order.
    pub received: Vec<InterventionId>,
    pub errors: Vec<String>,
}

async fn read_frame(
    lines: &mut tokio::io::Lines<BufReader<tokio::net::tcp::OwnedReadHalf>>,
) -> std::io::Result<ServerFrame> {
    let line = lines
        .next_line()
        .await?
        .ok_or_else(|| std::io::Error::new(std::io::ErrorKind::UnexpectedEof, "closed"))?;
    serde_json::from_str(&line)
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
}

/// Connect `clients` users to a server at `addr`, have each post `posts`
/// root interventions on `channel` concurrently, and return what each saw.
/// The channel must already exist in chat mode.
pub async fn run_posting_clients(
    addr: SocketAddr,
    channel: &str,
    clients: usize,
    posts: usize,
) -> std::io::Result<Vec<ClientTrace>> {
    // join everyone before anyone posts, so every client sees every event
    let mut joined = Vec::new();
    for i in 0..clients {
        let stream = TcpStream::connect(addr).await?;
        let (read, mut write) = stream.into_split();
        let mut lines = BufReader::new(read).lines();
        let hello = format!("{{\"t\":\"hello\",\"user\":\"sim{i}\",\"version\":1}}\n");
        write.write_all(hello.as_bytes()).await?;
        loop {
            if let ServerFrame::Welcome { .. } = read_frame(&mut lines).await? {
                break;
            }
        }
        let join = format!("{{\"t\":\"join\",\"channel\":\"{channel}\",\"subscribe\":true}}\n");
        write.write_all(join.as_bytes()).await?;
        loop {
            match read_frame(&mut lines).await? {
                ServerFrame::History { .. } => break,
                ServerFrame::Error { code, detail, .. } => {
                    return Err(std::io::Error::other(format!("join failed: {code} {detail:?}")))
                }
                _ => {}
            }
        }
        joined.push((i, lines, write));
    }

    let total = clients * posts;
    let mut tasks = Vec::new();
    for (i, mut lines, mut write) in joined {
        let channel = channel.to_string();
        tasks.push(tokio::spawn(async move {
            let sender = tokio::spawn(async move {
                for p in 0..posts {
                    let act = if p % 2 == 0 { "affirmer" } else { "saluer" };
                    let line = format!(
                        "{{\"t\":\"post\",\"channel\":\"{channel}\",\"act\":\"{act}\",\"body\":\"c{i} p{p}\"}}\n"
                    );
                    write.write_all(line.as_bytes()).await?;
                }
                Ok::<_, std::io::Error>(write)
            });
            let mut trace = ClientTrace::default();
            while trace.received.len() < total && trace.errors.len() < posts {
                match read_frame(&mut lines).await? {
                    ServerFrame::Ack { id: Some(id), .. } => trace.acked.push(id),
                    ServerFrame::Event { intervention } => trace.received.push(intervention.id),
                    ServerFrame::Error { code, .. } => trace.errors.push(code),
                    _ => {}
                }
            }
            // the write half closes the connection when dropped
            let _write = sender.await.map_err(std::io::Error::other)??;
            Ok::<_, std::io::Error>(trace)
        }));
    }
    let mut traces = Vec::new();
    for t in tasks {
        traces.push(t.await.map_err(std::io::Error::other)??);
    }
    Ok(traces)
}
