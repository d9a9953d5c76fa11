//! Acceptance suite: prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Expected values come from independent
//! re-derivations in this file, never from the library under test.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::ControlFlow;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use minvid::config::make_root;
use minvid::eval::{average_precision, gap_report, CountFile, Label, RateSource, ScoredExample};
use minvid::geometry::CropRect;
use minvid::io::gif::{decode_loop, encode_loop, export_loop};
use minvid::io::manifest::Manifest;
use minvid::oracle::record::TrialResponse;
use minvid::oracle::synthetic::SyntheticOracle;
use minvid::oracle::{recognition_rate, AnswerKey, Assessment, Stimulus};
use minvid::reduction::{crop_corner, expand};
use minvid::search::{resume_with, run_search_with, NodeStatus, SearchError, Traversal};
use minvid::study::{component_summary, ComponentCountFile, ComponentResult, ManualClock, Probe, StudyService};
use minvid::{
    minimal_set, render, run_search, ConfigKey, Corner, FrameGrid, OracleHandle, Rational, RecognitionRecord,
    SearchParams, SourceClip, VideoConfig,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn noise_clip(id: &str, side: u32, frames: usize, seed: u64) -> SourceClip {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let frames = (0..frames)
        .map(|_| FrameGrid::from_fn(side, side, |_, _| rng.random()))
        .collect();
    SourceClip::new(id, frames, "rowing", "rowing").unwrap()
}

fn r(n: i64) -> Rational {
    Rational::from_integer(n)
}

/// Independent rendered side: `floor(side * (4/5)^k + 1/2)` in exact
/// rationals.
fn side_after(side: Rational, k: u32) -> i64 {
    let mut v = side;
    for _ in 0..k {
        v = v * Rational::new(4, 5);
    }
    (v + Rational::new(1, 2)).floor().to_integer()
}

/// A lattice point in the test's own representation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Point {
    x: Rational,
    y: Rational,
    side: Rational,
    k: u32,
    frames: Vec<usize>,
}

impl Point {
    fn rendered(&self) -> i64 {
        side_after(self.side, self.k)
    }

    fn key(&self, clip: &str) -> ConfigKey {
        ConfigKey {
            clip_id: clip.to_string(),
            frame_indices: self.frames.clone(),
            crop: CropRect::new(self.x, self.y, self.side),
            scale_exp: self.k,
        }
    }

    /// One-step reductions not cut off by the size floor.
    fn children(&self, min_side: i64) -> Vec<Point> {
        let mut out = Vec::new();
        let side = self.side * Rational::new(4, 5);
        let slack = self.side / r(5);
        for (dx, dy) in [(r(0), r(0)), (slack, r(0)), (r(0), slack), (slack, slack)] {
            let p = Point {
                x: self.x + dx,
                y: self.y + dy,
                side,
                ..self.clone()
            };
            if p.rendered() >= min_side {
                out.push(p);
            }
        }
        let p = Point {
            k: self.k + 1,
            ..self.clone()
        };
        if p.rendered() >= min_side {
            out.push(p);
        }
        if self.frames.len() >= 2 {
            for i in 0..self.frames.len() {
                let mut frames = self.frames.clone();
                frames.remove(i);
                out.push(Point {
                    frames,
                    ..self.clone()
                });
            }
        }
        out
    }
}

/// A monotone recognizer: an OR of clauses, each requiring a covered square
/// and kept frames at a rendered side of at least s. Every
/// reduction can only take something away, so a configuration is
/// recognizable only if all its ancestors are.
#[derive(Clone, Debug)]
struct Clause {
    region: (Rational, Rational, Rational),
    frames: BTreeSet<usize>,
    min_side: i64,
}

fn holds(clauses: &[Clause], key: &ConfigKey) -> bool {
    let (x, y, side) = (key.crop.x, key.crop.y, key.crop.side);
    clauses.iter().any(|c| {
        let (rx, ry, rs) = c.region;
        rx >= x
            && ry >= y
            && rx + rs <= x + side
            && ry + rs <= y + side
            && c.frames.iter().all(|f| key.frame_indices.contains(f))
            && side_after(side, key.scale_exp) >= c.min_side
    })
}

fn random_clauses(rng: &mut ChaCha8Rng, side: u32, n_frames: usize) -> Vec<Clause> {
    (0..rng.random_range(1..=3))
        .map(|_| {
            let rs = rng.random_range(1..=3i64);
            let rx = rng.random_range(0..=(side as i64 - rs));
            let ry = rng.random_range(0..=(side as i64 - rs));
            let frames = (0..n_frames).filter(|_| rng.random_bool(0.4)).collect();
            Clause {
                region: (r(rx), r(ry), r(rs)),
                frames,
                min_side: rng.random_range(4..=side as i64),
            }
        })
        .collect()
}

fn ac1_minimality_oracle_equivalence() -> Result<String, String> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xAC1);
    let (max_depth, min_side) = (4u32, 4i64);
    let mut total_minimal = 0;
    let trials = 24;
    for trial in 0..trials {
        let side = rng.random_range(6..=12u32);
        let n_frames = rng.random_range(1..=3usize);
        let clip = noise_clip(&format!("t{trial}"), side, n_frames, trial);
        let clauses = random_clauses(&mut rng, side, n_frames);
        let recognizes = {
            let c = clauses.clone();
            move |k: &ConfigKey| holds(&c, k)
        };

        // Brute force: every lattice point within the depth limit.
        let root = Point {
            x: r(0),
            y: r(0),
            side: r(side as i64),
            k: 0,
            frames: (0..n_frames).collect(),
        };
        let mut depth_of: BTreeMap<Point, u32> = BTreeMap::from([(root.clone(), 0)]);
        let mut layer = vec![root];
        for d in 1..=max_depth {
            let mut next = Vec::new();
            for p in &layer {
                for c in p.children(min_side) {
                    if !depth_of.contains_key(&c) {
                        depth_of.insert(c.clone(), d);
                        next.push(c);
                    }
                }
            }
            layer = next;
        }
        let id = clip.clip_id().to_string();
        let expected: BTreeSet<ConfigKey> = depth_of
            .iter()
            .filter(|(p, &d)| {
                d < max_depth
                    && recognizes(&p.key(&id))
                    && p.children(min_side).iter().all(|c| !recognizes(&c.key(&id)))
            })
            .map(|(p, _)| p.key(&id))
            .collect();

        let oracle = {
            let rec = recognizes.clone();
            SyntheticOracle::new(move |k| if rec(k) { 0.9 } else { 0.1 })
        };
        let params = SearchParams {
            max_depth: Some(max_depth),
            oracle_budget: 1_000_000,
            min_side: min_side as u32,
            traversal: if trial % 2 == 0 { Traversal::Bfs } else { Traversal::Dfs },
            ..SearchParams::default()
        };
        let tree = run_search(make_root(&clip).unwrap(), &clip, &OracleHandle::new(oracle), params)
            .map_err(|e| format!("trial {trial}: {e}"))?;
        let got: BTreeSet<ConfigKey> = minimal_set(&tree).iter().map(VideoConfig::key).collect();
        ensure(got == expected, || {
            format!(
                "trial {trial} (side {side}, {n_frames} frames): search {} vs brute force {}",
                got.len(),
                expected.len()
            )
        })?;
        total_minimal += got.len();
    }
    let elapsed = start.elapsed();
    ensure(elapsed.as_secs_f64() < 10.0, || format!("took {elapsed:?}"))?;
    ensure(total_minimal > 0, || "every oracle produced an empty minimal set".into())?;
    Ok(format!(
        "{trials} random monotone oracles, {total_minimal} minimal configs matched, {:.2}s",
        elapsed.as_secs_f64()
    ))
}

fn ac2_topology() -> Result<String, String> {
    let clip = noise_clip("fig", 50, 2, 2);
    let min_side = 4;
    let root = make_root(&clip).unwrap();
    let mut seen = BTreeSet::from([root.key()]);
    let mut layer = vec![root];
    let mut checked = 0;
    for _ in 0..4 {
        let mut next = Vec::new();
        for parent in &layer {
            let e = expand(parent, min_side);
            let spatial: Vec<_> = e.children.iter().filter(|(edge, _)| edge.is_spatial()).collect();
            let temporal: Vec<_> = e.children.iter().filter(|(edge, _)| edge.is_temporal()).collect();
            ensure(e.children.len() == 7 && spatial.len() == 5 && temporal.len() == 2 && e.blocked.is_empty(), || {
                format!("{} has {} children", parent.key(), e.children.len())
            })?;
            let exact_parent = {
                let mut v = parent.crop.side;
                for _ in 0..parent.scale_exp {
                    v = v * Rational::new(4, 5);
                }
                v
            };
            for (_, child) in &spatial {
                let want = (exact_parent * Rational::new(4, 5) + Rational::new(1, 2)).floor().to_integer();
                ensure(child.rendered_side() == want, || {
                    format!("{} renders {} not {want}", child.key(), child.rendered_side())
                })?;
            }
            let keys: BTreeSet<ConfigKey> = e.children.iter().map(|(_, c)| c.key()).collect();
            ensure(keys.len() == 7, || "duplicate children".into())?;
            for (edge, child) in e.children {
                if edge.is_spatial() && seen.insert(child.key()) {
                    next.push(child);
                }
            }
            checked += 1;
        }
        layer = next;
    }
    // At the floor every spatial reduction is blocked; only the two frame
    // drops remain.
    let tiny = noise_clip("tiny", 4, 2, 3);
    let e = expand(&make_root(&tiny).unwrap(), 4);
    ensure(e.children.len() == 2 && e.blocked.len() == 5, || "floor config".into())?;
    Ok(format!("{checked} two-frame configs expand to 5 spatial + 2 temporal"))
}

fn ac3_threshold_strictness() -> Result<String, String> {
    let clip = noise_clip("th", 12, 2, 4);
    let root = make_root(&clip).unwrap();
    let key = root.key();

    // Records and the synthetic oracle path.
    for (n, want) in [(15u32, false), (16, true)] {
        let rec = RecognitionRecord::new(key.clone(), 30, n).unwrap();
        ensure(rec.is_recognizable() == want, || format!("record {n}/30"))?;
        let handle = OracleHandle::new(SyntheticOracle::constant(n as f64 / 30.0));
        let s = Stimulus::new(root.clone(), render(&root, &clip).unwrap());
        match handle.query(&s, 30).map_err(|e| e.to_string())? {
            Assessment::Complete(r) => {
                ensure(r.n_correct() == n && r.is_recognizable() == want, || format!("oracle {n}/30"))?
            }
            Assessment::Pending => return Err("synthetic oracle pending".into()),
        }
    }

    // Free-text adjudication path.
    let answers = AnswerKey::new("rowing", ["boat"], ["row"]).unwrap();
    for (n, want) in [(15usize, false), (16, true)] {
        let responses: Vec<TrialResponse> = (0..30)
            .map(|i| TrialResponse {
                subject_id: format!("s{i}"),
                config_key: key.clone(),
                free_text: if i < n { "rowing a boat" } else { "swimming" }.into(),
                correct: i < n,
                timestamp_ms: 0,
            })
            .collect();
        let rec = recognition_rate(&responses, &answers).map_err(|e| e.to_string())?;
        ensure(rec.is_recognizable() == want, || format!("responses {n}/30"))?;
    }

    // Search path: a root at 16/30 with children at 15/30 is minimal; at
    // 15/30 it is not searched below.
    for (root_n, want) in [(16u32, 1usize), (15, 0)] {
        let root_key = key.clone();
        let oracle = SyntheticOracle::new(move |k| if *k == root_key { root_n as f64 / 30.0 } else { 0.5 });
        let tree = run_search(root.clone(), &clip, &OracleHandle::new(oracle), SearchParams::default())
            .map_err(|e| e.to_string())?;
        ensure(minimal_set(&tree).len() == want, || format!("search with root {root_n}/30"))?;
    }

    // Component path, directly and through probe trials in the service.
    for (n, want) in [(15u32, false), (16, true)] {
        ensure(ComponentResult::new("oar", 30, n).unwrap().recognized == want, || format!("component {n}/30"))?;
        let service = StudyService::new(Arc::new(ManualClock::new(0)));
        service.add_clip(clip.clone(), answers.clone());
        let probe = Probe {
            frame_position: 0,
            x: 3,
            y: 3,
            component_key: ["oar".to_string()].into_iter().collect(),
            component_name: "oar".into(),
        };
        service.enqueue_probes(&root, &[probe], 30).map_err(|e| e.to_string())?;
        for i in 0..30 {
            let subject = format!("s{i}");
            let job = service.next_job(&subject).ok_or("no probe job")?;
            let text = if i < n { "an oar" } else { "a rope" };
            service.submit_response(job.job.job_id, &subject, text).map_err(|e| e.to_string())?;
        }
        let report = service.component_recognition(&key).map_err(|e| e.to_string())?;
        ensure(report.components[0].recognized == want, || format!("probe trials {n}/30"))?;
    }
    Ok("15/30 unrecognizable, 16/30 recognizable in records, oracle, search, and component paths".into())
}

fn ac4_geometry_canonicalization() -> Result<String, String> {
    let clip = noise_clip("geo", 50, 2, 5);
    let root = make_root(&clip).unwrap();
    let mut configs: BTreeMap<ConfigKey, VideoConfig> = BTreeMap::from([(root.key(), root.clone())]);
    let mut renders: Vec<(ConfigKey, Vec<FrameGrid>)> = vec![(root.key(), render(&root, &clip).unwrap())];
    let mut layer = vec![root.clone()];
    for _ in 0..3 {
        let mut next = Vec::new();
        for parent in &layer {
            for (_, child) in expand(parent, 4).children {
                // Every path, including ones that reach a known key again.
                renders.push((child.key(), render(&child, &clip).unwrap()));
                if configs.insert(child.key(), child.clone()).is_none() {
                    next.push(child);
                }
            }
        }
        layer = next;
    }
    let mut by_key: HashMap<ConfigKey, &Vec<FrameGrid>> = HashMap::new();
    let mut by_render: HashMap<&Vec<FrameGrid>, &ConfigKey> = HashMap::new();
    for (key, frames) in &renders {
        if let Some(prev) = by_key.insert(key.clone(), frames) {
            ensure(prev == frames, || format!("{key} renders two ways"))?;
        }
        if let Some(prev) = by_render.insert(frames, key) {
            ensure(prev == key, || format!("{prev} and {key} render identically"))?;
        }
    }
    let tl = crop_corner(&root, Corner::TopLeft, 4).unwrap();
    let tl_br = crop_corner(&tl, Corner::BottomRight, 4).unwrap();
    ensure(tl_br.crop == CropRect::new(r(8), r(8), r(32)), || format!("TL then BR gave {:?}", tl_br.crop))?;
    Ok(format!(
        "{} distinct keys over {} paths to depth 3; TL then BR = (8, 8) side 32",
        configs.len(),
        renders.len()
    ))
}

fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

fn ac5_published_statistics() -> Result<String, String> {
    let start = Instant::now();
    let read = |f: &str| std::fs::read_to_string(fixture(f)).map_err(|e| e.to_string());
    let levels = CountFile::from_json(&read("published/group_rates.json")?).map_err(|e| e.to_string())?;
    let gaps = CountFile::from_json(&read("published/gap_rates.json")?).map_err(|e| e.to_string())?;
    let lv = gap_report(&levels.to_triplets().map_err(|e| e.to_string())?, RateSource::Human)
        .map_err(|e| e.to_string())?;
    let gp = gap_report(&gaps.to_triplets().map_err(|e| e.to_string())?, RateSource::Human)
        .map_err(|e| e.to_string())?;
    // Independent means straight from the counts.
    let mean = |f: &CountFile, pick: fn(&minvid::eval::gaps::CountTriplet) -> i64| {
        f.triplets.iter().map(|t| pick(t) as f64).sum::<f64>() / (f.triplets.len() as f64 * f.n_subjects as f64)
    };
    let checks = [
        ("minimal", lv.minimal.mean, mean(&levels, |t| t.minimal as i64), 0.71, 0.005),
        ("spatial", lv.spatial.mean, mean(&levels, |t| t.spatial as i64), 0.29, 0.005),
        ("temporal", lv.temporal.mean, mean(&levels, |t| t.temporal as i64), 0.16, 0.005),
        (
            "spatial gap",
            gp.spatial_gap.mean,
            mean(&gaps, |t| t.minimal as i64 - t.spatial as i64),
            0.63,
            0.01,
        ),
        (
            "temporal gap",
            gp.temporal_gap.mean,
            mean(&gaps, |t| t.minimal as i64 - t.temporal as i64),
            0.68,
            0.01,
        ),
    ];
    for (name, got, independent, target, tol) in checks {
        ensure((got - independent).abs() < 1e-12, || format!("{name}: {got} vs {independent}"))?;
        ensure((got - target).abs() <= tol, || format!("{name}: {got:.4} not within {tol} of {target}"))?;
    }
    let comps = ComponentCountFile::from_json(&read("published/components.json")?).map_err(|e| e.to_string())?;
    let s = component_summary(&comps.results().map_err(|e| e.to_string())?).ok_or("no components")?;
    ensure((s.mean - 0.77).abs() <= 0.005 && (s.sd - 0.17).abs() <= 0.005, || s.display())?;
    let elapsed = start.elapsed();
    ensure(elapsed.as_secs_f64() < 1.0, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "means {:.3}/{:.3}/{:.3}, gaps {:.3}/{:.3}, components {}, {:.0}ms",
        lv.minimal.mean,
        lv.spatial.mean,
        lv.temporal.mean,
        gp.spatial_gap.mean,
        gp.temporal_gap.mean,
        s.display(),
        elapsed.as_secs_f64() * 1000.0
    ))
}

fn ap_key(i: usize) -> ConfigKey {
    ConfigKey {
        clip_id: format!("k{i:02}"),
        frame_indices: vec![0],
        crop: CropRect::full(8),
        scale_exp: 0,
    }
}

/// Exact AP from pairwise counts: a positive's rank is the number of
/// examples ranked at or before it: a higher score, or an equal score with
/// a key that is not greater.
fn brute_ap(items: &[(usize, u8, bool)]) -> Option<Rational> {
    let ahead = |a: &(usize, u8, bool), b: &(usize, u8, bool)| a.1 > b.1 || (a.1 == b.1 && ap_key(a.0) <= ap_key(b.0));
    let positives: Vec<_> = items.iter().filter(|e| e.2).collect();
    if positives.is_empty() {
        return None;
    }
    let mut sum = r(0);
    for p in &positives {
        let rank = items.iter().filter(|e| ahead(e, p)).count() as i64;
        let hits = positives.iter().filter(|q| ahead(q, p)).count() as i64;
        sum += Rational::new(hits, rank);
    }
    Some(sum / r(positives.len() as i64))
}

fn ac6_average_precision() -> Result<String, String> {
    const GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];
    let mut rng = ChaCha8Rng::seed_from_u64(0xAC6);
    let mut instances = 0usize;
    // Every multiset of (score, label) pairs with up to 8 examples; keys
    // are assigned in a random order so ties exercise the key rule.
    fn multisets(n: usize, from: usize, cur: &mut Vec<usize>, out: &mut dyn FnMut(&[usize])) {
        if cur.len() == n {
            out(cur);
            return;
        }
        for t in from..10 {
            cur.push(t);
            multisets(n, t, cur, out);
            cur.pop();
        }
    }
    let mut failure = None;
    for n in 1..=8 {
        multisets(n, 0, &mut Vec::new(), &mut |types| {
            if failure.is_some() {
                return;
            }
            let mut ids: Vec<usize> = (0..types.len()).collect();
            ids.shuffle(&mut rng);
            let items: Vec<(usize, u8, bool)> =
                types.iter().zip(&ids).map(|(&t, &id)| (id, (t % 5) as u8, t >= 5)).collect();
            let examples: Vec<ScoredExample> = items
                .iter()
                .map(|&(id, s, pos)| {
                    ScoredExample::new(ap_key(id), if pos { Label::Positive } else { Label::Negative }, GRID[s as usize])
                })
                .collect();
            instances += 1;
            match (brute_ap(&items), average_precision(&examples)) {
                (None, Err(_)) => {}
                (Some(want), Ok(got)) => {
                    let want = *want.numer() as f64 / *want.denom() as f64;
                    if (got - want).abs() > 1e-12 {
                        failure = Some(format!("{items:?}: {got} vs {want}"));
                    }
                }
                (w, g) => failure = Some(format!("{items:?}: {w:?} vs {g:?}")),
            }
        });
    }
    if let Some(f) = failure {
        return Err(f);
    }

    // Strictly increasing maps of [0, 1] onto itself leave AP unchanged.
    let transforms: [fn(f64) -> f64; 3] = [|x| x * x, f64::sqrt, |x| (x.exp() - 1.0) / (1f64.exp() - 1.0)];
    for i in 0..100 {
        let n = rng.random_range(2..=40);
        let levels: Vec<f64> = (0..=20).map(|v| v as f64 / 20.0).collect();
        let mut examples: Vec<ScoredExample> = (0..n)
            .map(|j| {
                let label = if rng.random_bool(0.4) { Label::Positive } else { Label::Negative };
                ScoredExample::new(ap_key(j), label, levels[rng.random_range(0..levels.len())])
            })
            .collect();
        examples[0].label = Label::Positive;
        let base = average_precision(&examples).map_err(|e| e.to_string())?;
        let f = transforms[i % transforms.len()];
        let moved: Vec<ScoredExample> = examples
            .iter()
            .map(|e| ScoredExample {
                model_score: f(e.model_score),
                ..e.clone()
            })
            .collect();
        let after = average_precision(&moved).map_err(|e| e.to_string())?;
        ensure(base == after, || format!("instance {i}: {base} became {after}"))?;
    }
    Ok(format!("{instances} exhaustive instances exact, 100 monotone transforms invariant"))
}

fn ac7_subject_exclusion() -> Result<String, String> {
    let categories = ["rowing", "mopping", "biking", "ironing", "juggling"];
    let clips: Vec<SourceClip> = (0..7)
        .map(|i| {
            let cat = categories[i % categories.len()];
            let frames = (0..2).map(|t| FrameGrid::filled(8, 8, (i * 10 + t) as u8)).collect();
            SourceClip::new(format!("c{i}"), frames, cat, cat).unwrap()
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0xAC7);
    let mut assignments = 0usize;
    for run in 0..1000 {
        let clock = Arc::new(ManualClock::new(0));
        let service = StudyService::new(clock.clone()).with_deadline_ms(1_000);
        for c in &clips {
            service.add_clip(c.clone(), AnswerKey::new(c.action_category(), ["x"], ["y"]).unwrap());
        }
        let configs: Vec<VideoConfig> = clips
            .iter()
            .flat_map(|c| {
                let root = make_root(c).unwrap();
                let kids: Vec<VideoConfig> = expand(&root, 4).children.into_iter().map(|(_, k)| k).take(2).collect();
                std::iter::once(root).chain(kids)
            })
            .collect();
        let subjects: Vec<String> = (0..6).map(|i| format!("s{i}")).collect();
        let mut assigned_pairs: BTreeSet<(String, String)> = BTreeSet::new();
        let mut outstanding: Vec<(u64, String)> = Vec::new();
        // Re-enqueueing a batch is idempotent and returns the same ids.
        let mut job_ids: BTreeSet<u64> = BTreeSet::new();
        let mut completed = 0usize;
        for step in 0..60 {
            match rng.random_range(0..10) {
                0 | 1 => {
                    let c = &configs[rng.random_range(0..configs.len())];
                    if let Ok(ids) = service.enqueue_recognition(std::slice::from_ref(c), rng.random_range(1..=3)) {
                        job_ids.extend(ids);
                    }
                }
                2..=5 => {
                    let s = &subjects[rng.random_range(0..subjects.len())];
                    if let Some(a) = service.next_job(s) {
                        let pair = (s.clone(), a.job.action_category.clone());
                        ensure(assigned_pairs.insert(pair), || {
                            format!("run {run} step {step}: {s} got a second {} job", a.job.action_category)
                        })?;
                        outstanding.push((a.job.job_id, s.clone()));
                        assignments += 1;
                    }
                }
                6..=7 if !outstanding.is_empty() => {
                    let (id, s) = outstanding.swap_remove(rng.random_range(0..outstanding.len()));
                    if service.submit_response(id, &s, "x y").is_ok() {
                        completed += 1;
                    }
                }
                8 => {
                    let id = rng.random_range(0..40);
                    let s = &subjects[rng.random_range(0..subjects.len())];
                    // A rejected submission may still reopen an expired job,
                    // so only the conservation checks below apply.
                    if service.submit_response(id, s, "x y").is_ok() {
                        completed += 1;
                        outstanding.retain(|(j, _)| *j != id);
                    }
                }
                _ => clock.advance(rng.random_range(0..700)),
            }
            let c = service.counts();
            let enqueued = job_ids.len();
            ensure(c.open + c.assigned + c.completed == c.enqueued && c.enqueued == enqueued, || {
                format!("run {run} step {step}: {c:?} with {enqueued} enqueued")
            })?;
            ensure(c.completed == completed, || format!("run {run} step {step}: completed {}", c.completed))?;
        }
    }
    Ok(format!("1000 interleavings, {assignments} assignments, no repeat category, counts conserved"))
}

fn ac8_loop_export() -> Result<String, String> {
    let clip = noise_clip("gif", 50, 2, 8);
    let root = make_root(&clip).unwrap();
    let config = crop_corner(&root, Corner::BottomLeft, 4).unwrap();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("loop.gif");
    export_loop(&config, &clip, &path).map_err(|e| e.to_string())?;
    let bytes = std::fs::read(&path).map_err(|e| e.to_string())?;
    let decoded = decode_loop(&bytes).map_err(|e| e.to_string())?;
    let frames = render(&config, &clip).unwrap();
    ensure(decoded.delays_cs == vec![50, 50], || format!("delays {:?}", decoded.delays_cs))?;
    ensure(decoded.loops_forever, || "not looping forever".into())?;
    ensure(decoded.frames == frames, || "pixels differ from render".into())?;
    ensure(encode_loop(&frames, 2).map_err(|e| e.to_string())? == bytes, || "export differs from encoder".into())?;
    Ok(format!("{}x{} two-frame loop, 50 cs delay, infinite, pixels identical", frames[0].width(), frames[0].height()))
}

fn ac9_resume_determinism() -> Result<String, String> {
    let clip = noise_clip("resume", 12, 2, 9);
    let answers = AnswerKey::new("rowing", ["boat"], ["row"]).unwrap();
    let oracle = || {
        OracleHandle::new(SyntheticOracle::new(|k| {
            if k.scale_exp == 0 && k.crop.side == r(12) {
                0.9
            } else if side_after(k.crop.side, k.scale_exp) >= 6 && minvid::oracle::synthetic::unit_hash(3, k) < 0.7 {
                0.8
            } else {
                0.2
            }
        }))
    };
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let save = |name: &str, tree: &minvid::SearchTree| -> Result<Vec<u8>, String> {
        let path = dir.path().join(name).join("state.json");
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        let mut m = Manifest::new();
        m.add_clip(&path, &clip, answers.clone()).map_err(|e| e.to_string())?;
        for n in tree.nodes() {
            if let Some(rec) = &n.record {
                m.put_record(rec.clone());
            }
        }
        m.put_tree(tree.clone());
        m.save(&path).map_err(|e| e.to_string())?;
        std::fs::read(&path).map_err(|e| e.to_string())
    };
    let params = SearchParams {
        oracle_budget: 100_000,
        ..SearchParams::default()
    };
    let full = run_search(make_root(&clip).unwrap(), &clip, &oracle(), params.clone()).map_err(|e| e.to_string())?;
    let reference = save("full", &full)?;
    let steps = full.audit().len();
    ensure(steps > 20, || format!("only {steps} steps"))?;
    let mut stops: Vec<usize> = (1..steps).step_by((steps / 8).max(1)).collect();
    stops.push(steps - 1);
    for stop in &stops {
        let mut seen = 0;
        let mut halt = |_: &minvid::SearchTree| {
            seen += 1;
            if seen >= *stop {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        };
        let partial = match run_search_with(make_root(&clip).unwrap(), &clip, &oracle(), params.clone(), &mut halt) {
            Err(SearchError::Interrupted { tree }) => *tree,
            Ok(_) => continue,
            Err(e) => return Err(e.to_string()),
        };
        // Persist, then finish from the reloaded tree with a fresh cache.
        let name = format!("stop{stop}");
        save(&name, &partial)?;
        let loaded = Manifest::load(&dir.path().join(&name).join("state.json")).map_err(|e| e.to_string())?;
        let tree = loaded.tree(clip.clip_id()).ok_or("tree missing")?.clone();
        let done =
            resume_with(tree, &clip, &oracle(), &mut |_| ControlFlow::Continue(())).map_err(|e| e.to_string())?;
        ensure(done.count(NodeStatus::Pending) == 0, || "resumed search incomplete".into())?;
        ensure(save(&name, &done)? == reference, || format!("manifest differs after stop {stop}"))?;
    }
    Ok(format!("{} interruption points over {steps} steps, manifests byte-identical", stops.len()))
}

fn main() -> ExitCode {
    let checks: [(&str, &str, Check); 9] = [
        ("AC1", "minimality oracle-equivalence", ac1_minimality_oracle_equivalence),
        ("AC2", "reduction topology", ac2_topology),
        ("AC3", "threshold strictness", ac3_threshold_strictness),
        ("AC4", "geometry and canonicalization", ac4_geometry_canonicalization),
        ("AC5", "published statistics fixture", ac5_published_statistics),
        ("AC6", "average precision", ac6_average_precision),
        ("AC7", "subject exclusion", ac7_subject_exclusion),
        ("AC8", "loop export", ac8_loop_export),
        ("AC9", "resume determinism", ac9_resume_determinism),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (id, name, check) in checks {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("{id} PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("{id} FAIL {name}: {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
