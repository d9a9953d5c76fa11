//! The manifest: one JSON document holding everything a session produced,
//! from imported clips to evaluation inputs.
//!
//! Frames live next to the manifest as grayscale PNGs under `frames/`,
//! named by content hash. Rationals are serialized as `[numer, denom]`
//! integer pairs, never as floats.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::png::{decode_png, encode_png};
use super::{read_bytes, write_atomic, IoError};
use crate::config::{ConfigKey, VideoConfig};
use crate::eval::{RateTriplet, ScoredExample};
use crate::frame::SourceClip;
use crate::oracle::answer::AnswerKey;
use crate::oracle::RecognitionRecord;
use crate::search::SearchTree;

pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable naming the default manifest path.
pub const STATE_ENV: &str = "MINVID_STATE";

/// Directory (relative to the manifest) holding frame PNGs.
pub const FRAMES_DIR: &str = "frames";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameRef {
    /// Path relative to the manifest's directory.
    pub file: String,
    /// SHA-256 of the PNG file's bytes.
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClipEntry {
    pub clip_id: String,
    pub action_category: String,
    pub answer_key_id: String,
    pub side: u32,
    pub frames: Vec<FrameRef>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigEntry {
    pub id: String,
    pub key: ConfigKey,
    pub config: VideoConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    #[serde(default)]
    pub clips: Vec<ClipEntry>,
    #[serde(default)]
    pub answer_keys: BTreeMap<String, AnswerKey>,
    #[serde(default)]
    pub configs: Vec<ConfigEntry>,
    #[serde(default)]
    pub records: Vec<RecognitionRecord>,
    #[serde(default)]
    pub trees: Vec<SearchTree>,
    #[serde(default)]
    pub triplets: Vec<RateTriplet>,
    #[serde(default)]
    pub scored: Vec<ScoredExample>,
}

impl Default for Manifest {
    fn default() -> Self {
        Manifest {
            schema_version: SCHEMA_VERSION,
            clips: Vec::new(),
            answer_keys: BTreeMap::new(),
            configs: Vec::new(),
            records: Vec::new(),
            trees: Vec::new(),
            triplets: Vec::new(),
            scored: Vec::new(),
        }
    }
}

/// Path from `explicit`, else from the `MINVID_STATE` variable.
pub fn default_path(explicit: Option<&Path>) -> Option<PathBuf> {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(STATE_ENV).map(PathBuf::from))
}

fn base_dir(manifest_path: &Path) -> &Path {
    match manifest_path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    }
}

impl Manifest {
    pub fn new() -> Self {
        Manifest::default()
    }

    pub fn from_json(text: &str) -> Result<Self, IoError> {
        let manifest: Manifest = serde_json::from_str(text).map_err(|e| IoError::Parse(e.to_string()))?;
        if manifest.schema_version != SCHEMA_VERSION {
            return Err(IoError::SchemaVersion(manifest.schema_version));
        }
        Ok(manifest)
    }

    /// Pretty-printed JSON with a trailing newline. Every collection is kept
    /// in a canonical order, so equal manifests serialize to equal bytes.
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        text
    }

    pub fn load(path: &Path) -> Result<Self, IoError> {
        let bytes = read_bytes(path)?;
        let text = String::from_utf8(bytes).map_err(|e| IoError::Parse(e.to_string()))?;
        Manifest::from_json(&text)
    }

    /// Writes atomically (temporary file, then rename).
    pub fn save(&self, path: &Path) -> Result<(), IoError> {
        write_atomic(path, self.to_json().as_bytes())
    }

    /// Stores the clip's frames as PNGs beside the manifest and records the
    /// clip and its answer key, replacing any entry with the same id.
    pub fn add_clip(&mut self, manifest_path: &Path, clip: &SourceClip, answer_key: AnswerKey) -> Result<(), IoError> {
        let dir = base_dir(manifest_path).join(FRAMES_DIR);
        let mut frames = Vec::with_capacity(clip.frames().len());
        for frame in clip.frames() {
            let bytes = encode_png(frame)?;
            let sha = hex::encode(Sha256::digest(&bytes));
            let file = format!("{FRAMES_DIR}/{}.png", &sha[..16]);
            let path = dir.join(format!("{}.png", &sha[..16]));
            if !path.exists() {
                write_atomic(&path, &bytes)?;
            }
            frames.push(FrameRef { file, sha256: sha });
        }
        let entry = ClipEntry {
            clip_id: clip.clip_id().to_string(),
            action_category: clip.action_category().to_string(),
            answer_key_id: clip.answer_key_id().to_string(),
            side: clip.side(),
            frames,
        };
        self.clips.retain(|c| c.clip_id != entry.clip_id);
        self.clips.push(entry);
        self.clips.sort_by(|a, b| a.clip_id.cmp(&b.clip_id));
        self.answer_keys.insert(clip.answer_key_id().to_string(), answer_key);
        Ok(())
    }

    pub fn clip_entry(&self, clip_id: &str) -> Option<&ClipEntry> {
        self.clips.iter().find(|c| c.clip_id == clip_id)
    }

    /// Loads a clip's frames, verifying each file against its hash.
    pub fn load_clip(&self, manifest_path: &Path, clip_id: &str) -> Result<SourceClip, IoError> {
        let entry = self
            .clip_entry(clip_id)
            .ok_or_else(|| IoError::UnknownClip(clip_id.to_string()))?;
        let dir = base_dir(manifest_path);
        let mut frames = Vec::with_capacity(entry.frames.len());
        for r in &entry.frames {
            let bytes = read_bytes(&dir.join(&r.file))?;
            if hex::encode(Sha256::digest(&bytes)) != r.sha256 {
                return Err(IoError::HashMismatch { file: r.file.clone() });
            }
            frames.push(decode_png(&bytes)?);
        }
        Ok(SourceClip::new(
            entry.clip_id.clone(),
            frames,
            entry.action_category.clone(),
            entry.answer_key_id.clone(),
        )?)
    }

    pub fn tree(&self, clip_id: &str) -> Option<&SearchTree> {
        self.trees.iter().find(|t| t.root().clip_id == clip_id)
    }

    /// Inserts or replaces the tree for the same root clip.
    pub fn put_tree(&mut self, tree: SearchTree) {
        let clip_id = tree.root().clip_id.clone();
        self.trees.retain(|t| t.root().clip_id != clip_id);
        self.trees.push(tree);
        self.trees.sort_by(|a, b| a.root().cmp(b.root()));
    }

    /// Inserts or replaces the record for the same configuration.
    pub fn put_record(&mut self, record: RecognitionRecord) {
        match self.records.binary_search_by(|r| r.config_key.cmp(&record.config_key)) {
            Ok(i) => self.records[i] = record,
            Err(i) => self.records.insert(i, record),
        }
    }

    pub fn register_config(&mut self, config: &VideoConfig) {
        let key = config.key();
        let entry = ConfigEntry {
            id: key.id(),
            key,
            config: config.clone(),
        };
        match self.configs.binary_search_by(|c| c.key.cmp(&entry.key)) {
            Ok(i) => self.configs[i] = entry,
            Err(i) => self.configs.insert(i, entry),
        }
    }

    /// Finds a configuration by its 16-hex id among registered configs and
    /// every tree node.
    pub fn find_config(&self, id: &str) -> Option<VideoConfig> {
        self.configs
            .iter()
            .find(|c| c.id == id)
            .map(|c| c.config.clone())
            .or_else(|| {
                self.trees
                    .iter()
                    .flat_map(|t| t.nodes())
                    .find(|n| n.key.id() == id)
                    .map(|n| n.config.clone())
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::make_root;
    use crate::frame::FrameGrid;
    use crate::oracle::answer::AnswerKey;

    fn clip() -> SourceClip {
        let frames = (0..2).map(|t| FrameGrid::from_fn(10, 10, |x, y| (x * 20 + y + t * 3) as u8)).collect();
        SourceClip::new("toy", frames, "rowing", "rowing").unwrap()
    }

    fn key() -> AnswerKey {
        AnswerKey::new("rowing", ["boat"], ["row"]).unwrap()
    }

    #[test]
    fn clip_roundtrip_through_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("session.json");
        let mut m = Manifest::new();
        let c = clip();
        m.add_clip(&path, &c, key()).unwrap();
        m.register_config(&make_root(&c).unwrap());
        m.save(&path).unwrap();
        let loaded = Manifest::load(&path).unwrap();
        assert_eq!(loaded, m);
        assert_eq!(loaded.load_clip(&path, "toy").unwrap(), c);
        let id = make_root(&c).unwrap().key().id();
        assert_eq!(loaded.find_config(&id), Some(make_root(&c).unwrap()));
        assert!(matches!(loaded.load_clip(&path, "nope"), Err(IoError::UnknownClip(_))));
    }

    #[test]
    fn tampered_frame_detected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        let mut m = Manifest::new();
        m.add_clip(&path, &clip(), key()).unwrap();
        let file = dir.path().join(&m.clips[0].frames[0].file);
        let other = encode_png(&FrameGrid::filled(10, 10, 7)).unwrap();
        std::fs::write(file, other).unwrap();
        assert!(matches!(m.load_clip(&path, "toy"), Err(IoError::HashMismatch { .. })));
    }

    #[test]
    fn schema_version_checked() {
        let mut m = Manifest::new();
        m.schema_version = 99;
        assert!(matches!(Manifest::from_json(&m.to_json()), Err(IoError::SchemaVersion(99))));
        assert!(Manifest::from_json("{").is_err());
    }

    #[test]
    fn records_kept_sorted_and_unique() {
        let c = clip();
        let root = make_root(&c).unwrap().key();
        let mut other = root.clone();
        other.scale_exp = 1;
        let mut m = Manifest::new();
        m.put_record(RecognitionRecord::new(other.clone(), 30, 3).unwrap());
        m.put_record(RecognitionRecord::new(root.clone(), 30, 20).unwrap());
        m.put_record(RecognitionRecord::new(root.clone(), 30, 21).unwrap());
        let keys: Vec<&ConfigKey> = m.records.iter().map(|r| &r.config_key).collect();
        assert_eq!(keys, [&root, &other]);
        assert_eq!(m.records[0].n_correct(), 21);
    }
}
