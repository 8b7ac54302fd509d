#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use growcut::service::{serve, AppState};
use tokio::sync::oneshot;

pub struct Server {
    pub base: String,
    pub client: reqwest::Client,
    stop: Option<oneshot::Sender<()>>,
    task: Option<tokio::task::JoinHandle<std::io::Result<()>>>,
}

impl Server {
    pub async fn start(data_dir: Option<PathBuf>) -> Self {
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let addr = listener.local_addr().unwrap();
        let app = Arc::new(AppState::new(data_dir).unwrap());
        let (tx, rx) = oneshot::channel();
        let task = tokio::spawn(serve(listener, app, async {
            let _ = rx.await;
        }));
        Self {
            base: format!("http://{addr}"),
            client: reqwest::Client::new(),
            stop: Some(tx),
            task: Some(task),
        }
    }

    pub async fn stop(mut self) {
        let _ = self.stop.take().unwrap().send(());
        self.task.take().unwrap().await.unwrap().unwrap();
    }

    pub fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }

    pub async fn post_bytes(&self, path: &str, body: Vec<u8>) -> (u16, Vec<u8>) {
        let r = self.client.post(self.url(path)).body(body).send().await.unwrap();
        (r.status().as_u16(), r.bytes().await.unwrap().to_vec())
    }

    pub async fn post_json(&self, path: &str, body: serde_json::Value) -> (u16, serde_json::Value) {
        let (status, bytes) = self.post_bytes(path, serde_json::to_vec(&body).unwrap()).await;
        (status, serde_json::from_slice(&bytes).unwrap_or(serde_json::Value::Null))
    }

    pub async fn get(&self, path: &str) -> (u16, Vec<u8>) {
        let r = self.client.get(self.url(path)).send().await.unwrap();
        (r.status().as_u16(), r.bytes().await.unwrap().to_vec())
    }

    pub async fn get_json(&self, path: &str) -> (u16, serde_json::Value) {
        let (status, bytes) = self.get(path).await;
        (status, serde_json::from_slice(&bytes).unwrap_or(serde_json::Value::Null))
    }
}

/// Decoded PNG: width, height, channels, pixels.
pub fn decode_png(bytes: &[u8]) -> (u32, u32, usize, Vec<u8>) {
    let decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    let mut reader = decoder.read_info().unwrap();
    let mut buf = vec![0; reader.output_buffer_size().unwrap()];
    let info = reader.next_frame(&mut buf).unwrap();
    buf.truncate(info.buffer_size());
    (info.width, info.height, info.color_type.samples(), buf)
}

/// Pixels whose RGB triple is not gray.
pub fn colored_pixels(rgb: &[u8]) -> usize {
    rgb.chunks_exact(3).filter(|p| !(p[0] == p[1] && p[1] == p[2])).count()
}

pub fn stroke(axis: &str, index: usize, points: &[[i64; 2]], radius: u32, label: &str) -> serde_json::Value {
    serde_json::json!({"axis": axis, "index": index, "points": points, "radius": radius, "label": label})
}

/// Closed rectangle polyline.
pub fn rect(u0: i64, v0: i64, u1: i64, v1: i64) -> Vec<[i64; 2]> {
    vec![[u0, v0], [u1, v0], [u1, v1], [u0, v1], [u0, v0]]
}

/// Orthogonal-plane strokes for the 64³ desk box phantom (box x 20..=44,
/// y 22..=42, z 24..=40): a foreground cross and an enclosing background
/// rectangle on the central axial, sagittal and coronal slices.
pub fn desk_box_strokes() -> serde_json::Value {
    serde_json::json!({"strokes": [
        stroke("axial", 32, &[[26, 32], [38, 32]], 1, "fg"),
        stroke("axial", 32, &[[32, 26], [32, 38]], 1, "fg"),
        stroke("sagittal", 32, &[[26, 32], [38, 32]], 1, "fg"),
        stroke("coronal", 32, &[[26, 32], [38, 32]], 1, "fg"),
        stroke("axial", 32, &rect(16, 18, 48, 46), 1, "bg"),
        stroke("sagittal", 32, &rect(18, 20, 46, 44), 1, "bg"),
        stroke("coronal", 32, &rect(16, 20, 48, 44), 1, "bg"),
    ]})
}
