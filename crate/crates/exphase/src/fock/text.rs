//! Canonical text form for two-particle states: a statistics header followed
//! by one line per term, `site,spin,vib | site,spin,vib | re,im`.
//! Two-dimensional sites are written `x:y`.

use num_complex::Complex64 as C64;

use super::{FockError, ModeLabel, Site, Spin, Statistics, TwoParticleState};

impl TwoParticleState {
    pub fn to_canonical_text(&self) -> String {
        let mut out = String::new();
        out.push_str(match self.statistics() {
            Statistics::Boson => "statistics: boson\n",
            Statistics::Fermion => "statistics: fermion\n",
        });
        for (m1, m2, amp) in self.terms() {
            out.push_str(&format!(
                "{} | {} | {:.17e},{:.17e}\n",
                mode_text(m1),
                mode_text(m2),
                amp.re,
                amp.im
            ));
        }
        out
    }

    pub fn from_canonical_text(text: &str) -> Result<Self, FockError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| FockError::ParseState("missing statistics header".into()))?;
        let stats = match header.trim().trim_start_matches("statistics:").trim() {
            "boson" => Statistics::Boson,
            "fermion" => Statistics::Fermion,
            other => {
                return Err(FockError::ParseState(format!(
                    "unknown statistics tag {other:?}"
                )))
            }
        };
        let mut raw = Vec::new();
        for line in lines {
            let mut fields = line.split('|');
            let m1 = parse_mode(fields.next().unwrap_or(""))?;
            let m2 = parse_mode(
                fields
                    .next()
                    .ok_or_else(|| FockError::ParseState(format!("missing second mode: {line}")))?,
            )?;
            let amp_text = fields
                .next()
                .ok_or_else(|| FockError::ParseState(format!("missing amplitude: {line}")))?;
            let mut parts = amp_text.split(',');
            let re = parse_f64(parts.next().unwrap_or(""))?;
            let im = parse_f64(parts.next().unwrap_or(""))?;
            raw.push((m1, m2, C64::new(re, im)));
        }
        Ok(Self::from_raw_terms(raw, stats))
    }
}

fn mode_text(m: ModeLabel) -> String {
    let spin = match m.spin {
        Spin::Up => "up",
        Spin::Down => "down",
    };
    format!("{},{},{}", m.site, spin, m.vib)
}

fn parse_mode(text: &str) -> Result<ModeLabel, FockError> {
    let mut parts = text.trim().split(',');
    let site = parse_site(parts.next().unwrap_or(""))?;
    let spin = match parts
        .next()
        .ok_or_else(|| FockError::ParseState(format!("missing spin: {text}")))?
        .trim()
    {
        "up" => Spin::Up,
        "down" => Spin::Down,
        other => return Err(FockError::ParseState(format!("unknown spin {other:?}"))),
    };
    let vib = parts
        .next()
        .ok_or_else(|| FockError::ParseState(format!("missing vib: {text}")))?
        .trim()
        .parse::<u32>()
        .map_err(|e| FockError::ParseState(format!("bad vib in {text:?}: {e}")))?;
    Ok(ModeLabel { site, spin, vib })
}

fn parse_site(text: &str) -> Result<Site, FockError> {
    let t = text.trim();
    let (x, y) = match t.split_once(':') {
        Some((x, y)) => (x, y),
        None => (t, "0"),
    };
    let parse = |s: &str| {
        s.trim()
            .parse::<i32>()
            .map_err(|e| FockError::ParseState(format!("bad site {t:?}: {e}")))
    };
    Ok(Site { x: parse(x)?, y: parse(y)? })
}

fn parse_f64(text: &str) -> Result<f64, FockError> {
    text.trim()
        .parse::<f64>()
        .map_err(|e| FockError::ParseState(format!("bad amplitude {text:?}: {e}")))
}
