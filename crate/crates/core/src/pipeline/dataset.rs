//! On-disk trial layout:
//!
//! ```text
//! <root>/exclusions.tsv                  optional: subject_id, video_id or *, reason
//! <root>/<subject>/ratings.tsv           video_id, valence, arousal, dominance, liking, familiarity
//! <root>/<subject>/<video>/<CHANNEL>.tsv
//! ```
//!
//! A channel file starts with `# channel=ECG units=mV rate=256 sampling=uniform`
//! and continues with `time<TAB>value` rows. Uniform channels are rebuilt from
//! the header rate and the first timestamp.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{
    Channel, ChannelData, Flavor, IrregularSignal, SamRatings, SubjectId, TrialRecord,
    UniformSignal, VideoId,
};

pub const RATINGS_FILE: &str = "ratings.tsv";
pub const EXCLUSIONS_FILE: &str = "exclusions.tsv";

pub fn channel_units(ch: Channel) -> &'static str {
    match ch {
        Channel::Ecg => "mV",
        Channel::AccZ | Channel::Scg | Channel::Adr => "g",
        Channel::Eda => "uS",
        Channel::Skt => "degC",
        Channel::Emg | Channel::Eog => "uV",
        Channel::Bvp | Channel::Rsp => "au",
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn sorted_dirs(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if path.is_dir() {
            out.push((entry.file_name().to_string_lossy().into_owned(), path));
        }
    }
    out.sort_by(|a, b| SubjectId::new(a.0.clone()).cmp(&SubjectId::new(b.0.clone())));
    Ok(out)
}

fn optional_rating(v: &str) -> std::result::Result<Option<f64>, String> {
    match v {
        "" | "NA" | "-" => Ok(None),
        x => x.parse::<f64>().map(Some).map_err(|e| format!("`{x}`: {e}")),
    }
}

/// Ratings per video, in file order.
pub fn parse_ratings(text: &str, file: &Path) -> Result<Vec<(VideoId, SamRatings)>> {
    let mut out: Vec<(VideoId, SamRatings)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let ln = i + 1;
        if line.trim().is_empty() || line.starts_with('#') || (ln == 1 && line.starts_with("video_id")) {
            continue;
        }
        let f: Vec<&str> = line.split('\t').map(str::trim).collect();
        if f.len() < 3 || f.len() > 6 {
            return Err(Error::parse(file, ln, format!("expected 3 to 6 columns, got {}", f.len())));
        }
        let num = |k: usize| f[k].parse::<f64>().map_err(|e| Error::parse(file, ln, format!("`{}`: {e}", f[k])));
        let mut r = SamRatings::new(num(1)?, num(2)?).map_err(|e| Error::parse(file, ln, e.to_string()))?;
        let opt = |k: usize| -> Result<Option<f64>> {
            f.get(k).map_or(Ok(None), |v| optional_rating(v).map_err(|e| Error::parse(file, ln, e)))
        };
        r.dominance = opt(3)?;
        r.liking = opt(4)?;
        r.familiarity = opt(5)?;
        let video = VideoId::new(f[0]);
        if out.iter().any(|(v, _)| *v == video) {
            return Err(Error::parse(file, ln, format!("duplicate video `{video}`")));
        }
        out.push((video, r));
    }
    Ok(out)
}

struct Header {
    channel: Channel,
    rate: f64,
    uniform: bool,
}

fn parse_header(line: &str, file: &Path) -> Result<Header> {
    let bad = |m: String| Error::parse(file, 1, m);
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| bad("first line must be a `# channel=... rate=... sampling=...` header".into()))?;
    let mut fields = BTreeMap::new();
    for part in body.split_whitespace() {
        let (k, v) = part.split_once('=').ok_or_else(|| bad(format!("header field `{part}` is not key=value")))?;
        fields.insert(k.to_ascii_lowercase(), v.to_string());
    }
    let get = |k: &str| fields.get(k).ok_or_else(|| bad(format!("header lacks `{k}`")));
    let channel: Channel = get("channel")?.parse().map_err(bad)?;
    if channel.is_derived() {
        return Err(bad(format!("{channel} is derived and cannot be stored")));
    }
    let rate: f64 = get("rate")?.parse().map_err(|e| bad(format!("rate: {e}")))?;
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(bad(format!("rate must be positive, got {rate}")));
    }
    let uniform = match get("sampling")?.as_str() {
        "uniform" => true,
        "irregular" => false,
        other => return Err(bad(format!("sampling must be uniform or irregular, got `{other}`"))),
    };
    Ok(Header { channel, rate, uniform })
}

/// One channel file. Timestamps must strictly increase; the error names the
/// offending line.
pub fn parse_channel(text: &str, file: &Path) -> Result<(Channel, ChannelData)> {
    let mut lines = text.lines().enumerate();
    let header = parse_header(lines.next().map_or("", |(_, l)| l), file)?;
    let mut ts = Vec::new();
    let mut vs = Vec::new();
    for (i, line) in lines {
        let ln = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let (t, v) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(file, ln, "expected `time<TAB>value`"))?;
        let t: f64 = t.trim().parse().map_err(|e| Error::parse(file, ln, format!("time: {e}")))?;
        let v: f64 = v.trim().parse().map_err(|e| Error::parse(file, ln, format!("value: {e}")))?;
        if !t.is_finite() {
            return Err(Error::parse(file, ln, "non-finite timestamp"));
        }
        if let Some(&prev) = ts.last() {
            if !(t > prev) {
                return Err(Error::parse(
                    file,
                    ln,
                    format!("timestamp {t} does not increase (previous {prev}) at sample offset {}", ts.len()),
                ));
            }
        }
        ts.push(t);
        vs.push(v);
    }
    let data = if header.uniform {
        ChannelData::Uniform(UniformSignal::with_start(vs, header.rate, ts.first().copied().unwrap_or(0.0)))
    } else {
        ChannelData::Irregular(IrregularSignal::new(ts, vs)?)
    };
    Ok((header.channel, data))
}

/// `(subject, video or None for all, reason)` rows of the sidecar.
pub fn parse_exclusions(text: &str, file: &Path) -> Result<Vec<(SubjectId, Option<VideoId>, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') || (i == 0 && line.starts_with("subject_id")) {
            continue;
        }
        let f: Vec<&str> = line.split('\t').map(str::trim).collect();
        if f.len() < 2 {
            return Err(Error::parse(file, i + 1, "expected subject_id, video_id, reason"));
        }
        let video = (f[1] != "*").then(|| VideoId::new(f[1]));
        out.push((SubjectId::new(f[0]), video, f.get(2).unwrap_or(&"").to_string()));
    }
    Ok(out)
}

fn load_trial(subject: &SubjectId, video: &VideoId, ratings: &SamRatings, dir: &Path) -> Result<TrialRecord> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "tsv"))
        .collect();
    files.sort();
    let mut channels = BTreeMap::new();
    for f in files {
        let (ch, data) = parse_channel(&read(&f)?, &f)?;
        if channels.insert(ch, data).is_some() {
            return Err(Error::parse(&f, 1, format!("channel {ch} stored twice")));
        }
    }
    Ok(TrialRecord {
        subject_id: subject.clone(),
        video_id: video.clone(),
        channels,
        ratings: ratings.clone(),
        faulty: false,
    })
}

/// Loads every trial under `root`, ordered by subject then video. The sidecar
/// exclusions only flag trials as faulty; the screening itself runs later.
pub fn load_dataset(root: &Path, flavor: Flavor) -> Result<Vec<TrialRecord>> {
    if !root.is_dir() {
        return Err(Error::io(root, std::io::Error::new(std::io::ErrorKind::NotFound, "dataset directory not found")));
    }
    let mut plan = Vec::new();
    for (name, sdir) in sorted_dirs(root)? {
        let subject = SubjectId::new(name);
        let rfile = sdir.join(RATINGS_FILE);
        if !rfile.is_file() {
            return Err(Error::Config(format!("subject {subject}: missing {}", rfile.display())));
        }
        let ratings = parse_ratings(&read(&rfile)?, &rfile)?;
        let rated: BTreeSet<&str> = ratings.iter().map(|(v, _)| v.as_str()).collect();
        for (vname, _) in sorted_dirs(&sdir)? {
            if !rated.contains(vname.as_str()) {
                return Err(Error::Config(format!("trial {subject}/{vname} has no row in {}", rfile.display())));
            }
        }
        let mut ratings = ratings;
        ratings.sort_by(|a, b| a.0.cmp(&b.0));
        for (video, r) in ratings {
            let vdir = sdir.join(video.as_str());
            if !vdir.is_dir() {
                return Err(Error::Config(format!("trial {subject}/{video} is rated but {} is missing", vdir.display())));
            }
            plan.push((subject.clone(), video, r, vdir));
        }
    }
    let mut trials: Vec<TrialRecord> = plan
        .par_iter()
        .map(|(s, v, r, d)| load_trial(s, v, r, d))
        .collect::<Result<_>>()?;

    let xfile = root.join(EXCLUSIONS_FILE);
    if xfile.is_file() {
        for (subject, video, _) in parse_exclusions(&read(&xfile)?, &xfile)? {
            for t in trials.iter_mut().filter(|t| t.subject_id == subject) {
                if video.as_ref().map_or(true, |v| *v == t.video_id) {
                    t.faulty = true;
                }
            }
        }
    }
    log::info!("loaded {} {} trials from {}", trials.len(), flavor.name(), root.display());
    Ok(trials)
}

/// Text of one channel file; floats use the shortest exact representation.
pub fn channel_text(ch: Channel, data: &ChannelData) -> String {
    let mut s = String::new();
    match data {
        ChannelData::Uniform(u) => {
            let _ = writeln!(s, "# channel={} units={} rate={} sampling=uniform", ch, channel_units(ch), u.rate);
            for (i, v) in u.samples.iter().enumerate() {
                let _ = writeln!(s, "{}\t{v}", u.time_at(i));
            }
        }
        ChannelData::Irregular(r) => {
            let dt = r.duration() / (r.len().max(2) - 1) as f64;
            let rate = if dt > 0.0 { (1.0 / dt * 1000.0).round() / 1000.0 } else { 1.0 };
            let _ = writeln!(s, "# channel={} units={} rate={rate} sampling=irregular", ch, channel_units(ch));
            for (t, v) in r.timestamps().iter().zip(r.values()) {
                let _ = writeln!(s, "{t}\t{v}");
            }
        }
    }
    s
}

fn put(path: &Path, text: &str) -> Result<()> {
    if let Some(p) = path.parent() {
        fs::create_dir_all(p).map_err(|e| Error::io(p, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn rating_text(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".into(), |x| x.to_string())
}

/// Writes trials in the layout `load_dataset` reads. Faulty trials go to the sidecar.
pub fn write_dataset(root: &Path, trials: &[TrialRecord]) -> Result<()> {
    let mut by_subject: BTreeMap<&SubjectId, Vec<&TrialRecord>> = BTreeMap::new();
    for t in trials {
        by_subject.entry(&t.subject_id).or_default().push(t);
    }
    for (subject, ts) in &by_subject {
        let mut s = String::from("video_id\tvalence\tarousal\tdominance\tliking\tfamiliarity\n");
        for t in ts {
            let r = &t.ratings;
            let _ = writeln!(
                s,
                "{}\t{}\t{}\t{}\t{}\t{}",
                t.video_id,
                r.valence,
                r.arousal,
                rating_text(r.dominance),
                rating_text(r.liking),
                rating_text(r.familiarity)
            );
        }
        put(&root.join(subject.as_str()).join(RATINGS_FILE), &s)?;
    }
    trials
        .par_iter()
        .map(|t| {
            let dir = root.join(t.subject_id.as_str()).join(t.video_id.as_str());
            for (ch, data) in &t.channels {
                put(&dir.join(format!("{ch}.tsv")), &channel_text(*ch, data))?;
            }
            Ok(())
        })
        .collect::<Result<()>>()?;
    let faulty: Vec<&TrialRecord> = trials.iter().filter(|t| t.faulty).collect();
    if !faulty.is_empty() {
        let mut s = String::from("subject_id\tvideo_id\treason\n");
        for t in faulty {
            let _ = writeln!(s, "{}\t{}\tflagged", t.subject_id, t.video_id);
        }
        put(&root.join(EXCLUSIONS_FILE), &s)?;
    }
    Ok(())
}

/// Schema check for `validate`: loads everything and reports channel findings
/// per trial against the channels the configured scenarios need.
pub fn validate_dataset(root: &Path, flavor: Flavor, required: &[Channel]) -> Result<Vec<String>> {
    let trials = load_dataset(root, flavor)?;
    let mut problems = Vec::new();
    for t in &trials {
        for f in crate::model::validate_channels(t, required).findings {
            problems.push(format!("{}/{}: {f}", t.subject_id, t.video_id));
        }
    }
    Ok(problems)
}
