//! Newline-delimited JSON over TCP.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use dialogos_core::ids::Timestamp;
use dialogos_core::protocol::{encode_frame, ServerFrame, MAX_FRAME_BYTES};
use tokio::io::{AsyncBufReadExt, AsyncReadExt, AsyncWriteExt, BufReader};
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::mpsc;

use crate::hub::{ConnId, Delivery, Hub};

pub fn now_ms() -> Timestamp {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as Timestamp)
        .unwrap_or(0)
}

struct Shared {
    hub: Hub,
    outboxes: HashMap<ConnId, mpsc::UnboundedSender<String>>,
}

impl Shared {
    fn deliver(&self, deliveries: Vec<Delivery>) {
        for (id, frame) in deliveries {
            if let Some(tx) = self.outboxes.get(&id) {
                let _ = tx.send(encode_frame(&frame));
            }
        }
    }
}

/// A running server. Cloning shares the same hub.
#[derive(Clone)]
pub struct Server {
    shared: Arc<Mutex<Shared>>,
}

impl Server {
    pub fn new(hub: Hub) -> Self {
        Server {
            shared: Arc::new(Mutex::new(Shared {
                hub,
                outboxes: HashMap::new(),
            })),
        }
    }

    /// Run `f` against the hub, under the sequencer lock.
    pub fn with_hub<R>(&self, f: impl FnOnce(&Hub) -> R) -> R {
        f(&self.shared.lock().expect("hub lock").hub)
    }

    /// Accept connections until the listener fails.
    pub async fn run(self, listener: TcpListener) -> std::io::Result<()> {
        loop {
            let (stream, peer) = listener.accept().await?;
            log::debug!("connection from {peer}");
            let server = self.clone();
            tokio::spawn(async move {
                if let Err(e) = server.handle(stream).await {
                    log::debug!("connection {peer} closed: {e}");
                }
            });
        }
    }

    fn deliver_to(&self, id: ConnId, frame: ServerFrame) {
        self.shared.lock().expect("hub lock").deliver(vec![(id, frame)]);
    }

    async fn handle(&self, stream: TcpStream) -> std::io::Result<()> {
        let (read, mut write) = stream.into_split();
        let (tx, mut rx) = mpsc::unbounded_channel::<String>();
        let id = {
            let mut s = self.shared.lock().expect("hub lock");
            let id = s.hub.connect();
            s.outboxes.insert(id, tx);
            id
        };
        let writer = tokio::spawn(async move {
            while let Some(line) = rx.recv().await {
                if write.write_all(line.as_bytes()).await.is_err() {
                    break;
                }
            }
        });

        let mut reader = BufReader::new(read);
        let mut buf = Vec::new();
        let result = loop {
            buf.clear();
            let n = match (&mut reader)
                .take(MAX_FRAME_BYTES as u64 + 2)
                .read_until(b'\n', &mut buf)
                .await
            {
                Ok(n) => n,
                Err(e) => break Err(e),
            };
            if n == 0 {
                break Ok(());
            }
            if !buf.ends_with(b"\n") && n > MAX_FRAME_BYTES {
                self.deliver_to(id, ServerFrame::error("BAD_FRAME", "frame too large"));
                // discard the rest of the line
                let mut sink = Vec::new();
                if let Err(e) = reader.read_until(b'\n', &mut sink).await {
                    break Err(e);
                }
                continue;
            }
            match std::str::from_utf8(&buf) {
                Ok(line) if line.trim().is_empty() => {}
                Ok(line) => {
                    let mut s = self.shared.lock().expect("hub lock");
                    let deliveries = s.hub.receive(id, line, now_ms());
                    s.deliver(deliveries);
                }
                Err(_) => self.deliver_to(id, ServerFrame::error("BAD_FRAME", "frame is not UTF-8")),
            }
        };

        {
            let mut s = self.shared.lock().expect("hub lock");
            s.outboxes.remove(&id);
            let deliveries = s.hub.disconnect(id, now_ms());
            s.deliver(deliveries);
        }
        // the outbox sender is gone, so the writer drains and stops
        let _ = writer.await;
        result
    }
}
