use std::time::Duration;

/// Inclusive seq bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub from: Option<u64>,
    pub to: Option<u64>,
}

impl Window {
    pub fn contains(&self, seq: u64) -> bool {
        self.from.is_none_or(|a| seq >= a) && self.to.is_none_or(|b| seq <= b)
    }
}

pub fn parse_duration(s: &str) -> Result<Duration, String> {
    let s = s.trim();
    let split = s
        .find(|c: char| !c.is_ascii_digit())
        .ok_or_else(|| format!("duration {s:?} needs a unit (s, m or h)"))?;
    let (num, unit) = s.split_at(split);
    let n: u64 = num
        .parse()
        .map_err(|_| format!("duration {s:?} must start with an integer"))?;
    if n == 0 {
        return Err("duration must be positive".into());
    }
    let secs = match unit {
        "s" => n,
        "m" => n * 60,
        "h" => n * 3600,
        _ => return Err(format!("unknown duration unit {unit:?}; use s, m or h")),
    };
    Ok(Duration::from_secs(secs))
}

pub fn parse_window(s: &str) -> Result<Window, String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("window {s:?} must look like a..b"))?;
    let bound = |x: &str| -> Result<Option<u64>, String> {
        if x.is_empty() {
            Ok(None)
        } else {
            x.parse().map(Some).map_err(|_| format!("bad seq {x:?} in window"))
        }
    };
    let w = Window {
        from: bound(a)?,
        to: bound(b)?,
    };
    if let (Some(a), Some(b)) = (w.from, w.to) {
        if a > b {
            return Err(format!("empty window {a}..{b}"));
        }
    }
    Ok(w)
}

/// Duration back in the unit it was most likely written in.
pub fn format_duration(d: Duration) -> String {
    let s = d.as_secs();
    if s.is_multiple_of(3600) {
        format!("{}h", s / 3600)
    } else if s.is_multiple_of(60) {
        format!("{}m", s / 60)
    } else {
        format!("{s}s")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn durations() {
        assert_eq!(parse_duration("60m"), Ok(Duration::from_secs(3600)));
        assert_eq!(parse_duration("1s"), Ok(Duration::from_secs(1)));
        assert_eq!(parse_duration("2h"), Ok(Duration::from_secs(7200)));
        assert!(parse_duration("0m").is_err());
        assert!(parse_duration("10").is_err());
        assert!(parse_duration("m").is_err());
        assert!(parse_duration("5d").is_err());
        assert_eq!(format_duration(Duration::from_secs(3600)), "1h");
        assert_eq!(format_duration(Duration::from_secs(90)), "90s");
    }

    #[test]
    fn windows() {
        let w = parse_window("3..5").unwrap();
        assert!(!w.contains(2) && w.contains(3) && w.contains(5) && !w.contains(6));
        let open = parse_window("..4").unwrap();
        assert!(open.contains(1) && !open.contains(5));
        assert!(parse_window("..").unwrap().contains(u64::MAX));
        assert!(parse_window("5..3").is_err());
        assert!(parse_window("5").is_err());
    }
}
