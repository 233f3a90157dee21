//! Read-only static file server for the timeline browser.

use std::fs;
use std::io;
use std::path::{Component, Path, PathBuf};
use tiny_http::{Header, Method, Request, Response, Server};

/// Directory listing consumed by the browser's video list.
pub const INDEX_ROUTE: &str = "/videos.json";

pub fn bind(addr: &str) -> io::Result<Server> {
    Server::http(addr).map_err(|e| io::Error::new(io::ErrorKind::AddrNotAvailable, e.to_string()))
}

/// Serve requests until the server is dropped or fails.
pub fn run(server: &Server, root: &Path) -> io::Result<()> {
    let root = root.canonicalize()?;
    for request in server.incoming_requests() {
        handle(request, &root)?;
    }
    Ok(())
}

fn content_type(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()).unwrap_or("") {
        "json" => "application/json",
        "svg" => "image/svg+xml",
        "png" => "image/png",
        "ppm" | "pgm" => "image/x-portable-anymap",
        "csv" => "text/csv; charset=utf-8",
        "html" => "text/html; charset=utf-8",
        "js" | "mjs" => "text/javascript",
        "css" => "text/css",
        _ => "application/octet-stream",
    }
}

fn header(name: &str, value: &str) -> Header {
    Header::from_bytes(name.as_bytes(), value.as_bytes()).expect("static header is valid")
}

/// Map a URL path onto `root`, refusing anything that could escape it.
pub fn resolve_path(root: &Path, url: &str) -> Option<PathBuf> {
    let path = url.split(['?', '#']).next().unwrap_or("");
    let decoded = percent_decode(path)?;
    let mut out = root.to_path_buf();
    for comp in Path::new(decoded.trim_start_matches('/')).components() {
        match comp {
            Component::Normal(c) => out.push(c),
            Component::CurDir => {}
            _ => return None,
        }
    }
    if out.is_dir() {
        out.push("index.html");
    }
    let real = out.canonicalize().ok()?;
    real.starts_with(root).then_some(real)
}

fn percent_decode(s: &str) -> Option<String> {
    let bytes = s.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' {
            let hex = s.get(i + 1..i + 3)?;
            out.push(u8::from_str_radix(hex, 16).ok()?);
            i += 3;
        } else {
            out.push(bytes[i]);
            i += 1;
        }
    }
    String::from_utf8(out).ok()
}

/// Names of `root` subdirectories holding a timeline, plus `.` when the root
/// holds one itself. Sorted.
pub fn list_videos(root: &Path) -> io::Result<Vec<String>> {
    let mut ids = Vec::new();
    if root.join("timeline.json").is_file() {
        ids.push(".".to_string());
    }
    for entry in fs::read_dir(root)? {
        let entry = entry?;
        if entry.path().join("timeline.json").is_file() {
            ids.push(entry.file_name().to_string_lossy().into_owned());
        }
    }
    ids.sort();
    Ok(ids)
}

fn handle(request: Request, root: &Path) -> io::Result<()> {
    if *request.method() != Method::Get {
        let resp = Response::from_string("method not allowed\n")
            .with_status_code(405)
            .with_header(header("Allow", "GET"));
        return request.respond(resp);
    }
    let url = request.url().to_string();
    if url.split('?').next() == Some(INDEX_ROUTE) {
        let body = serde_json::to_string(&list_videos(root)?)?;
        return request.respond(
            Response::from_string(body).with_header(header("Content-Type", "application/json")),
        );
    }
    match resolve_path(root, &url).filter(|p| p.is_file()) {
        Some(path) => {
            let file = fs::File::open(&path)?;
            request.respond(
                Response::from_file(file).with_header(header("Content-Type", content_type(&path))),
            )
        }
        None => request.respond(Response::from_string("not found\n").with_status_code(404)),
    }
}
