//! On-disk cache of stationary solutions keyed by (p, K, tol).
//!
//! A solution is expensive to shoot at large p, so the CLI stores each
//! one in a text file and reloads it on reruns with the same key. The
//! format is one JSON header line followed by two CSV sections:
//!
//! ```text
//! {"schema":"...","p":...,"k":...,"tol":...,"nodal_radii":[...],
//!  "mu_plus":...,"mu_minus":...,"sha256":"<hex of everything below>"}
//! [scales]
//! <one JSON line: series start, zeros, scalar scales>
//! [shot]               t,w,wt,wtt            (log-radius profile)
//! [profile]            r,u,du                (physical samples)
//! ```
//!
//! Floats are written with 17 significant digits, so a load reproduces
//! every field bit-for-bit; the header checksum covers the body, and a
//! mismatch surfaces as [`LabError::CacheCorrupt`] so the caller can
//! rebuild instead of computing on silently truncated data.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{LabError, Result};
use crate::grid::RadialGrid;
use crate::shooting::{RawShot, SeriesStart, ShotNode, ShotParams};
use crate::stationary::{build_stationary, StationarySolution};

const SCHEMA: &str = "blowup-lab stationary cache v1";

/// Environment variable overriding the cache directory.
pub const CACHE_DIR_ENV: &str = "BLOWUP_LAB_CACHE_DIR";

/// Cache directory after applying the environment override.
pub fn cache_dir(configured: &Path) -> PathBuf {
    match std::env::var_os(CACHE_DIR_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => configured.to_path_buf(),
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    schema: String,
    p: f64,
    k: usize,
    tol: f64,
    nodal_radii: Vec<f64>,
    mu_plus: f64,
    mu_minus: f64,
    sha256: String,
}

/// The fields that are neither in the header nor in a CSV section.
#[derive(Debug, Serialize, Deserialize)]
struct Scales {
    series: SeriesStart,
    zeros_t: Vec<f64>,
    zero_slopes: Vec<f64>,
    t_k: f64,
    gamma: f64,
    u_max: f64,
    u_min: f64,
    r_min: f64,
    w_min: f64,
    ln_mu_plus: f64,
    ln_mu_minus: f64,
}

/// 17-significant-digit scientific notation: enough for an exact f64
/// round trip and byte-deterministic across runs.
fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// File name for the (p, K, tol) key, using the shortest round-trip
/// representation of the floats so equal keys map to equal names.
pub fn cache_file_name(p: f64, k: usize, tol: f64) -> String {
    format!("stationary_p{p:e}_K{k}_tol{tol:e}.csv")
}

/// Full path of the cache entry for (p, K, tol) under `dir`.
pub fn cache_path(dir: &Path, p: f64, k: usize, tol: f64) -> PathBuf {
    dir.join(cache_file_name(p, k, tol))
}

fn render_body(sol: &StationarySolution) -> String {
    let scales = Scales {
        series: sol.shot.series.clone(),
        zeros_t: sol.shot.zeros_t.clone(),
        zero_slopes: sol.shot.zero_slopes.clone(),
        t_k: sol.t_k,
        gamma: sol.gamma,
        u_max: sol.u_max,
        u_min: sol.u_min,
        r_min: sol.r_min,
        w_min: sol.w_min,
        ln_mu_plus: sol.ln_mu_plus,
        ln_mu_minus: sol.ln_mu_minus,
    };
    let mut body = String::new();
    body.push_str("[scales]\n");
    body.push_str(&serde_json::to_string(&scales).expect("scales serialize"));
    body.push('\n');
    body.push_str("[shot]\nt,w,wt,wtt\n");
    for n in &sol.shot.nodes {
        body.push_str(&format!(
            "{},{},{},{}\n",
            fmt(n.t),
            fmt(n.w),
            fmt(n.wt),
            fmt(n.wtt)
        ));
    }
    body.push_str("[profile]\nr,u,du\n");
    let nodes = sol.grid.nodes();
    for i in 0..nodes.len() {
        body.push_str(&format!(
            "{},{},{}\n",
            fmt(nodes[i]),
            fmt(sol.u[i]),
            fmt(sol.du[i])
        ));
    }
    body
}

fn checksum(body: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(body.as_bytes());
    format!("{:x}", hasher.finalize())
}

/// Serializes `sol` under its (p, K, tol) key; returns the path.
pub fn store(dir: &Path, sol: &StationarySolution, tol: f64) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let body = render_body(sol);
    let header = Header {
        schema: SCHEMA.to_string(),
        p: sol.p,
        k: sol.k,
        tol,
        nodal_radii: sol.nodal_radii.clone(),
        mu_plus: sol.mu_plus,
        mu_minus: sol.mu_minus,
        sha256: checksum(&body),
    };
    let path = cache_path(dir, sol.p, sol.k, tol);
    let text = format!("{}\n{}", serde_json::to_string(&header)?, body);
    // write-then-rename so a crash never leaves a half-written entry
    let tmp = path.with_extension("csv.tmp");
    fs::write(&tmp, text)?;
    fs::rename(&tmp, &path)?;
    Ok(path)
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| LabError::CacheCorrupt(format!("bad float `{s}` in {what}")))
}

fn expect_line<'a>(
    lines: &mut impl Iterator<Item = &'a str>,
    want: &str,
) -> Result<()> {
    match lines.next() {
        Some(l) if l == want => Ok(()),
        other => Err(LabError::CacheCorrupt(format!(
            "expected `{want}`, found {other:?}"
        ))),
    }
}

/// Loads and verifies the cache entry at `path`.
pub fn load(path: &Path) -> Result<StationarySolution> {
    let text = fs::read_to_string(path)?;
    let (header_line, body) = text
        .split_once('\n')
        .ok_or_else(|| LabError::CacheCorrupt("missing header line".into()))?;
    let header: Header = serde_json::from_str(header_line)
        .map_err(|e| LabError::CacheCorrupt(format!("bad header: {e}")))?;
    if header.schema != SCHEMA {
        return Err(LabError::CacheCorrupt(format!(
            "schema `{}` (expected `{SCHEMA}`)",
            header.schema
        )));
    }
    if header.sha256 != checksum(body) {
        return Err(LabError::CacheCorrupt("checksum mismatch".into()));
    }

    let mut lines = body.lines();
    expect_line(&mut lines, "[scales]")?;
    let scales: Scales = serde_json::from_str(lines.next().ok_or_else(|| {
        LabError::CacheCorrupt("missing scales line".into())
    })?)
    .map_err(|e| LabError::CacheCorrupt(format!("bad scales: {e}")))?;

    expect_line(&mut lines, "[shot]")?;
    expect_line(&mut lines, "t,w,wt,wtt")?;
    let mut nodes = Vec::new();
    let mut rest = None;
    for line in lines.by_ref() {
        if line == "[profile]" {
            rest = Some(());
            break;
        }
        let mut cols = line.split(',');
        let mut col = |what| -> Result<f64> {
            parse_f64(
                cols.next().ok_or_else(|| {
                    LabError::CacheCorrupt(format!("short shot row `{line}`"))
                })?,
                what,
            )
        };
        nodes.push(ShotNode {
            t: col("shot t")?,
            w: col("shot w")?,
            wt: col("shot wt")?,
            wtt: col("shot wtt")?,
        });
    }
    if rest.is_none() {
        return Err(LabError::CacheCorrupt("missing [profile] section".into()));
    }
    expect_line(&mut lines, "r,u,du")?;
    let (mut r, mut u, mut du) = (Vec::new(), Vec::new(), Vec::new());
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let mut cols = line.split(',');
        let mut col = |what| -> Result<f64> {
            parse_f64(
                cols.next().ok_or_else(|| {
                    LabError::CacheCorrupt(format!("short profile row `{line}`"))
                })?,
                what,
            )
        };
        r.push(col("r")?);
        u.push(col("u")?);
        du.push(col("du")?);
    }
    if nodes.is_empty() || r.len() < 2 {
        return Err(LabError::CacheCorrupt("empty data section".into()));
    }

    let shot = RawShot {
        p: header.p,
        series: scales.series,
        nodes,
        zeros_t: scales.zeros_t,
        zero_slopes: scales.zero_slopes,
    };
    Ok(StationarySolution {
        p: header.p,
        k: header.k,
        shot,
        t_k: scales.t_k,
        gamma: scales.gamma,
        grid: RadialGrid::from_nodes(r),
        u,
        du,
        nodal_radii: header.nodal_radii,
        u_max: scales.u_max,
        u_min: scales.u_min,
        r_min: scales.r_min,
        w_min: scales.w_min,
        mu_plus: header.mu_plus,
        mu_minus: header.mu_minus,
        ln_mu_plus: scales.ln_mu_plus,
        ln_mu_minus: scales.ln_mu_minus,
    })
}

/// Loads the (p, K, tol) entry if present and intact, otherwise builds
/// the solution and stores it. Returns the solution and whether it came
/// from the cache.
pub fn load_or_build(
    dir: &Path,
    p: f64,
    k: usize,
    params: &ShotParams,
) -> Result<(StationarySolution, bool)> {
    let path = cache_path(dir, p, k, params.tol);
    if path.exists() {
        match load(&path) {
            Ok(sol) => return Ok((sol, true)),
            Err(LabError::CacheCorrupt(_)) | Err(LabError::Io(_)) => {
                // fall through and rebuild
            }
            Err(e) => return Err(e),
        }
    }
    let sol = build_stationary(p, k, params)?;
    store(dir, &sol, params.tol)?;
    Ok((sol, false))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp_dir(tag: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!(
            "blowup-lab-cache-test-{tag}-{}",
            std::process::id()
        ));
        let _ = fs::remove_dir_all(&dir);
        fs::create_dir_all(&dir).unwrap();
        dir
    }

    fn assert_solutions_equal(a: &StationarySolution, b: &StationarySolution) {
        assert_eq!(a.p, b.p);
        assert_eq!(a.k, b.k);
        assert_eq!(a.t_k, b.t_k);
        assert_eq!(a.gamma, b.gamma);
        assert_eq!(a.u_max, b.u_max);
        assert_eq!(a.u_min, b.u_min);
        assert_eq!(a.r_min, b.r_min);
        assert_eq!(a.w_min, b.w_min);
        assert_eq!(a.mu_plus, b.mu_plus);
        assert_eq!(a.mu_minus, b.mu_minus);
        assert_eq!(a.ln_mu_plus, b.ln_mu_plus);
        assert_eq!(a.ln_mu_minus, b.ln_mu_minus);
        assert_eq!(a.nodal_radii, b.nodal_radii);
        assert_eq!(a.u, b.u);
        assert_eq!(a.du, b.du);
        assert_eq!(a.grid.nodes(), b.grid.nodes());
        assert_eq!(a.shot.zeros_t, b.shot.zeros_t);
        assert_eq!(a.shot.zero_slopes, b.shot.zero_slopes);
        assert_eq!(a.shot.nodes.len(), b.shot.nodes.len());
        for (x, y) in a.shot.nodes.iter().zip(&b.shot.nodes) {
            assert_eq!((x.t, x.w, x.wt, x.wtt), (y.t, y.w, y.wt, y.wtt));
        }
        assert_eq!(a.shot.series.a, b.shot.series.a);
        assert_eq!(a.shot.series.t0, b.shot.series.t0);
    }

    #[test]
    fn round_trip_is_exact() {
        let dir = tmp_dir("roundtrip");
        let params = ShotParams::default();
        let sol = build_stationary(80.0, 2, &params).unwrap();
        let path = store(&dir, &sol, params.tol).unwrap();
        let back = load(&path).unwrap();
        assert_solutions_equal(&sol, &back);
        // loaded solution evaluates identically
        for r in [1e-12, 1e-6, 0.3, 0.9] {
            assert_eq!(sol.u_at(r), back.u_at(r));
            assert_eq!(sol.du_at(r), back.du_at(r));
        }
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn store_is_byte_deterministic() {
        let dir = tmp_dir("determinism");
        let params = ShotParams::default();
        let sol = build_stationary(35.0, 3, &params).unwrap();
        let path = store(&dir, &sol, params.tol).unwrap();
        let first = fs::read(&path).unwrap();
        let path2 = store(&dir, &sol, params.tol).unwrap();
        assert_eq!(path, path2);
        assert_eq!(first, fs::read(&path2).unwrap());
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn corruption_is_detected_and_rebuilt() {
        let dir = tmp_dir("corrupt");
        let params = ShotParams::default();
        let sol = build_stationary(35.0, 2, &params).unwrap();
        let path = store(&dir, &sol, params.tol).unwrap();
        let mut text = fs::read_to_string(&path).unwrap();
        // flip one digit inside the body
        let pos = text.len() - 20;
        let byte = text.as_bytes()[pos];
        let flipped = if byte == b'5' { '6' } else { '5' };
        text.replace_range(pos..pos + 1, &flipped.to_string());
        fs::write(&path, text).unwrap();
        match load(&path) {
            Err(LabError::CacheCorrupt(msg)) => {
                assert!(msg.contains("checksum"), "{msg}");
            }
            other => panic!("expected corruption error, got {other:?}"),
        }
        // load_or_build falls back to a rebuild and repairs the entry
        let (rebuilt, from_cache) = load_or_build(&dir, 35.0, 2, &params).unwrap();
        assert!(!from_cache);
        assert_solutions_equal(&sol, &rebuilt);
        let (cached, from_cache) = load_or_build(&dir, 35.0, 2, &params).unwrap();
        assert!(from_cache);
        assert_solutions_equal(&sol, &cached);
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn keys_separate_entries() {
        let a = cache_file_name(100.0, 2, 1e-13);
        let b = cache_file_name(100.0, 3, 1e-13);
        let c = cache_file_name(200.0, 2, 1e-13);
        let d = cache_file_name(100.0, 2, 1e-12);
        let all = [&a, &b, &c, &d];
        for i in 0..4 {
            for j in i + 1..4 {
                assert_ne!(all[i], all[j]);
            }
        }
    }

    #[test]
    fn env_var_overrides_cache_dir() {
        // set/remove in one test to avoid cross-test env races
        std::env::set_var(CACHE_DIR_ENV, "/tmp/override-home");
        assert_eq!(
            cache_dir(Path::new("/var/cache")),
            PathBuf::from("/tmp/override-home")
        );
        std::env::remove_var(CACHE_DIR_ENV);
        assert_eq!(cache_dir(Path::new("/var/cache")), PathBuf::from("/var/cache"));
    }
}
