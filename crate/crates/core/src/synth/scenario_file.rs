//! Plain-text scenario format.
//!
//! ```text
//! # canvas and timing
//! width = 320
//! height = 240
//! background = 30,30,30
//! frames = 30
//! seed = 7
//! noise = 2
//! frame_interval = 0.5
//! actor = disk r=8 color=200,50,50 path=1:20,40;30:300,40 hide=12-13
//! actor = rect w=10 h=20 color=50,200,50 path=1:40,100;30:280,100
//! ```

use std::str::FromStr;

use super::{Actor, Scenario, Shape, SynthError, Waypoint};

fn num<T: FromStr>(s: &str, what: &str) -> Result<T, String> {
    s.trim().parse().map_err(|_| format!("invalid {what} `{s}`"))
}

fn rgb(s: &str) -> Result<[u8; 3], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("color `{s}` needs three components"));
    }
    Ok([num(parts[0], "color")?, num(parts[1], "color")?, num(parts[2], "color")?])
}

fn path(s: &str) -> Result<Vec<Waypoint>, String> {
    s.split(';')
        .map(|w| {
            let (slice, xy) = w.split_once(':').ok_or_else(|| format!("waypoint `{w}` needs slice:x,y"))?;
            let (x, y) = xy.split_once(',').ok_or_else(|| format!("waypoint `{w}` needs slice:x,y"))?;
            Ok(Waypoint { slice: num(slice, "slice")?, x: num(x, "x")?, y: num(y, "y")? })
        })
        .collect()
}

fn hide(s: &str) -> Result<Vec<(u32, u32)>, String> {
    s.split(';')
        .map(|r| match r.split_once('-') {
            Some((a, b)) => Ok((num(a, "slice")?, num(b, "slice")?)),
            None => {
                let t = num(r, "slice")?;
                Ok((t, t))
            }
        })
        .collect()
}

fn actor(spec: &str) -> Result<Actor, String> {
    let mut tokens = spec.split_whitespace();
    let kind = tokens.next().ok_or("actor needs a shape")?;
    let (mut r, mut w, mut h, mut color, mut waypoints, mut hidden) = (None, None, None, None, None, Vec::new());
    for tok in tokens {
        let (k, v) = tok.split_once('=').ok_or_else(|| format!("expected key=value, got `{tok}`"))?;
        match k {
            "r" => r = Some(num::<f64>(v, "radius")?),
            "w" => w = Some(num::<u32>(v, "width")?),
            "h" => h = Some(num::<u32>(v, "height")?),
            "color" => color = Some(rgb(v)?),
            "path" => waypoints = Some(path(v)?),
            "hide" => hidden = hide(v)?,
            _ => return Err(format!("unknown actor key `{k}`")),
        }
    }
    let shape = match kind {
        "disk" => Shape::Disk { radius: r.ok_or("disk needs r=")? },
        "rect" => Shape::Rectangle {
            width: w.ok_or("rect needs w=")?,
            height: h.ok_or("rect needs h=")?,
        },
        _ => return Err(format!("unknown shape `{kind}`")),
    };
    Ok(Actor {
        shape,
        color: color.ok_or("actor needs color=")?,
        path: waypoints.ok_or("actor needs path=")?,
        hidden,
    })
}

/// Parses and validates a scenario. `width`, `height` and `frames` are
/// required; the background defaults to black, noise to 0, seed to 0 and
/// the frame interval to 1 s.
pub fn parse_scenario(text: &str) -> Result<Scenario, SynthError> {
    let mut s = Scenario::new(0, 0, [0, 0, 0], 0);
    let (mut width, mut height, mut frames) = (None, None, None);
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parsed: Result<(), String> = (|| {
            let (k, v) = line.split_once('=').ok_or("expected key = value")?;
            let v = v.trim();
            match k.trim() {
                "width" => width = Some(num(v, "width")?),
                "height" => height = Some(num(v, "height")?),
                "frames" => frames = Some(num(v, "frames")?),
                "background" => s.background = rgb(v)?,
                "seed" => s.seed = num(v, "seed")?,
                "noise" => s.noise_amplitude = num(v, "noise")?,
                "frame_interval" => s.frame_interval = num(v, "frame_interval")?,
                "actor" => s.actors.push(actor(v)?),
                other => return Err(format!("unknown key `{other}`")),
            }
            Ok(())
        })();
        parsed.map_err(|message| SynthError::Parse { line: i + 1, message })?;
    }
    let missing = |k: &str| SynthError::Parse { line: 0, message: format!("missing `{k}`") };
    s.width = width.ok_or_else(|| missing("width"))?;
    s.height = height.ok_or_else(|| missing("height"))?;
    s.frame_count = frames.ok_or_else(|| missing("frames"))?;
    s.validate()?;
    Ok(s)
}
