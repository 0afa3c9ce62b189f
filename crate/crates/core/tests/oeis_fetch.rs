use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use flowertrees::oeis::{fetch, refresh, CacheMeta, FetchConfig, OeisError, REQUEST_INTERVAL};
use num_bigint::BigInt;

const FIB: &str = "# Fibonacci numbers\n0 0\n1 1\n2 1\n3 2\n4 3\n5 5\n6 8\n7 13\n8 21\n9 34\n10 55\n11 89\n";

/// Serves `FIB` for A000045 and 404 for anything else. Returns the base URL
/// and the request paths seen so far.
fn serve() -> (String, Arc<Mutex<Vec<String>>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = seen.clone();
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut request = String::new();
            reader.read_line(&mut request).unwrap();
            let mut line = String::new();
            while reader.read_line(&mut line).unwrap() > 2 {
                line.clear();
            }
            let path = request.split_whitespace().nth(1).unwrap_or("").to_string();
            log.lock().unwrap().push(path.clone());
            let (status, body) = if path == "/A000045/b000045.txt" { ("200 OK", FIB) } else { ("404 Not Found", "") };
            let _ = write!(
                stream,
                "HTTP/1.1 {status}\r\nContent-Type: text/plain\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
        }
    });
    (base, seen)
}

fn config(dir: &std::path::Path, base: &str) -> FetchConfig {
    FetchConfig { cache_dir: dir.to_path_buf(), network: true, base_url: base.to_string(), timeout: Duration::from_secs(5) }
}

#[test]
fn download_cache_and_offline_reread() {
    let (base, seen) = serve();
    let dir = tempfile::tempdir().unwrap();
    let online = config(dir.path(), &base);

    let seq = fetch("A000045", &online).unwrap();
    assert_eq!(seq.offset, 0);
    assert_eq!(seq.terms.len(), 12);
    assert_eq!(seq.terms[11], BigInt::from(89));

    let stored = fs::read(dir.path().join("A000045.txt")).unwrap();
    assert_eq!(stored, FIB.as_bytes());
    let meta: CacheMeta = serde_json::from_str(&fs::read_to_string(dir.path().join("A000045.json")).unwrap()).unwrap();
    assert_eq!((meta.id.as_str(), meta.terms), ("A000045", 12));

    // A cached id is never requested again, online or not.
    let again = fetch("A000045", &online).unwrap();
    let offline = fetch("A000045", &FetchConfig { network: false, ..online.clone() }).unwrap();
    assert_eq!(again, seq);
    assert_eq!(offline, seq);
    assert_eq!(seen.lock().unwrap().len(), 1);
    assert_eq!(fs::read(dir.path().join("A000045.txt")).unwrap(), stored);

    // Refreshing rewrites the same bytes, spaced by the request interval.
    let start = Instant::now();
    refresh("A000045", &online).unwrap();
    refresh("A000045", &online).unwrap();
    assert!(start.elapsed() >= REQUEST_INTERVAL);
    assert_eq!(fs::read(dir.path().join("A000045.txt")).unwrap(), stored);
    assert_eq!(seen.lock().unwrap().len(), 3);
}

#[test]
fn failures_are_typed() {
    let (base, _) = serve();
    let dir = tempfile::tempdir().unwrap();
    let online = config(dir.path(), &base);

    assert!(matches!(fetch("A999999", &online), Err(OeisError::Network(_))));
    assert!(!dir.path().join("A999999.txt").exists());
    assert!(matches!(fetch("B000045", &online), Err(OeisError::MalformedId(_))));
    assert!(matches!(fetch("A000045", &FetchConfig { network: false, ..online }), Err(OeisError::CacheMiss(_))));

    let closed = TcpListener::bind("127.0.0.1:0").unwrap();
    let dead = format!("http://{}", closed.local_addr().unwrap());
    drop(closed);
    assert!(matches!(fetch("A000045", &config(dir.path(), &dead)), Err(OeisError::Network(_))));
}

#[test]
fn malformed_cached_bfile_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("A000045.txt"), "0 0\n1 x\n").unwrap();
    let cfg = FetchConfig { cache_dir: dir.path().to_path_buf(), ..FetchConfig::default() };
    assert!(matches!(fetch("A000045", &cfg), Err(OeisError::MalformedBFile { line: 2, .. })));
}
