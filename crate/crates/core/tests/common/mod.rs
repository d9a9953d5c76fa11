#![allow(dead_code)]

use std::net::SocketAddr;
use std::path::PathBuf;

use minvid::{FrameGrid, SourceClip};
use tokio::sync::oneshot;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

pub fn read_fixture(rel: &str) -> String {
    std::fs::read_to_string(fixture(rel)).unwrap()
}

/// The 10-pixel, 2-frame clip the golden documents were made from.
pub fn golden_clip() -> SourceClip {
    let frames = (0..2)
        .map(|t| FrameGrid::from_fn(10, 10, |x, y| (x * 20 + y * 3 + t * 40) as u8))
        .collect();
    SourceClip::new("golden", frames, "rowing", "rowing").unwrap()
}

pub fn textured_clip(id: &str, side: u32, frames: usize, category: &str) -> SourceClip {
    let frames = (0..frames)
        .map(|t| FrameGrid::from_fn(side, side, |x, y| ((x * 7 + y * 13 + t as u32 * 31) % 256) as u8))
        .collect();
    SourceClip::new(id, frames, category, category).unwrap()
}

/// An axum app served on a background thread until dropped.
pub struct TestServer {
    pub addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<std::thread::JoinHandle<()>>,
}

impl TestServer {
    pub fn start(app: axum::Router) -> Self {
        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        listener.set_nonblocking(true).unwrap();
        let addr = listener.local_addr().unwrap();
        let (tx, rx) = oneshot::channel::<()>();
        let thread = std::thread::spawn(move || {
            let rt = tokio::runtime::Builder::new_current_thread().enable_all().build().unwrap();
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::from_std(listener).unwrap();
                axum::serve(listener, app)
                    .with_graceful_shutdown(async {
                        let _ = rx.await;
                    })
                    .await
                    .unwrap();
            });
        });
        TestServer {
            addr,
            shutdown: Some(tx),
            thread: Some(thread),
        }
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }
}

impl Drop for TestServer {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}
