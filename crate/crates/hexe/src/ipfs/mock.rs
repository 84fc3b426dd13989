//! In-process pinning server for hermetic tests. Speaks just enough
//! HTTP/1.1 for the client: multipart pin uploads (content-length or
//! chunked), gateway fetches, auth checking, and injectable faults.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicU32, AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use sha2::{Digest, Sha256};

use super::IpfsConfig;

/// Requests larger than this are refused outright.
const HARD_BODY_LIMIT: usize = 256 * 1024 * 1024;

struct ServerState {
    api_key: String,
    api_secret: String,
    store: Mutex<HashMap<String, Vec<u8>>>,
    /// Next N requests answer 503.
    fail_requests: AtomicU32,
    /// Next N fetches send only half the payload (with a consistent
    /// Content-Length, so the shortfall shows up as an integrity failure).
    truncate_fetches: AtomicU32,
    /// Pins above this many bytes answer 413. 0 means unlimited.
    max_payload: AtomicU64,
}

/// A content-addressed pinning service on a loopback port.
pub struct MockPinServer {
    addr: SocketAddr,
    state: Arc<ServerState>,
    shutdown: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

impl MockPinServer {
    /// Binds 127.0.0.1 on an ephemeral port and starts serving.
    pub fn start(api_key: &str, api_secret: &str) -> std::io::Result<Self> {
        let listener = TcpListener::bind("127.0.0.1:0")?;
        let addr = listener.local_addr()?;
        let state = Arc::new(ServerState {
            api_key: api_key.to_string(),
            api_secret: api_secret.to_string(),
            store: Mutex::new(HashMap::new()),
            fail_requests: AtomicU32::new(0),
            truncate_fetches: AtomicU32::new(0),
            max_payload: AtomicU64::new(0),
        });
        let shutdown = Arc::new(AtomicBool::new(false));
        let handle = {
            let state = Arc::clone(&state);
            let shutdown = Arc::clone(&shutdown);
            std::thread::spawn(move || {
                for stream in listener.incoming() {
                    if shutdown.load(Ordering::SeqCst) {
                        break;
                    }
                    let Ok(stream) = stream else { continue };
                    let state = Arc::clone(&state);
                    std::thread::spawn(move || {
                        let _ = handle_connection(stream, &state);
                    });
                }
            })
        };
        Ok(Self {
            addr,
            state,
            shutdown,
            handle: Some(handle),
        })
    }

    /// `http://127.0.0.1:<port>`; serves both the pin API and the gateway.
    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Client config pointed at this server with its real credentials and
    /// test-friendly timeouts.
    pub fn client_config(&self) -> IpfsConfig {
        IpfsConfig {
            api_base_url: self.base_url(),
            gateway_base_url: self.base_url(),
            api_key: self.state.api_key.clone(),
            api_secret: self.state.api_secret.clone(),
            timeout_seconds: 30,
            max_retries: 2,
        }
    }

    /// The next `n` requests (pin or fetch) answer 503.
    pub fn inject_failures(&self, n: u32) {
        self.state.fail_requests.store(n, Ordering::SeqCst);
    }

    /// The next `n` fetches return half the payload.
    pub fn truncate_next_fetches(&self, n: u32) {
        self.state.truncate_fetches.store(n, Ordering::SeqCst);
    }

    /// Pins above `bytes` answer 413. 0 removes the limit.
    pub fn set_max_payload(&self, bytes: u64) {
        self.state.max_payload.store(bytes, Ordering::SeqCst);
    }

    pub fn pinned_count(&self) -> usize {
        self.state.store.lock().unwrap().len()
    }

    pub fn contains(&self, cid: &str) -> bool {
        self.state.store.lock().unwrap().contains_key(cid)
    }
}

impl Drop for MockPinServer {
    fn drop(&mut self) {
        self.shutdown.store(true, Ordering::SeqCst);
        // Unblock accept() so the serving thread sees the flag.
        let _ = TcpStream::connect(self.addr);
        if let Some(handle) = self.handle.take() {
            let _ = handle.join();
        }
    }
}

/// The cid the mock assigns: hex SHA-256 of the content. Deterministic,
/// so pinning the same bytes twice yields the same cid.
pub fn content_cid(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

struct Request {
    method: String,
    path: String,
    headers: HashMap<String, String>,
    body: Vec<u8>,
}

fn handle_connection(mut stream: TcpStream, state: &ServerState) -> std::io::Result<()> {
    stream.set_read_timeout(Some(Duration::from_secs(60)))?;
    let request = match read_request(&mut stream) {
        Ok(r) => r,
        Err(_) => {
            return respond(
                &mut stream,
                400,
                "Bad Request",
                "text/plain",
                b"bad request",
            )
        }
    };

    if claim_token(&state.fail_requests) {
        return respond(
            &mut stream,
            503,
            "Service Unavailable",
            "application/json",
            br#"{"error":"injected failure"}"#,
        );
    }

    match (request.method.as_str(), request.path.as_str()) {
        ("POST", "/pinning/pinFileToIPFS") => handle_pin(&mut stream, state, &request),
        ("GET", path) if path.starts_with("/ipfs/") => handle_fetch(&mut stream, state, &path[6..]),
        _ => respond(
            &mut stream,
            404,
            "Not Found",
            "text/plain",
            b"no such route",
        ),
    }
}

fn handle_pin(
    stream: &mut TcpStream,
    state: &ServerState,
    request: &Request,
) -> std::io::Result<()> {
    let key_ok = request.headers.get("pinata_api_key") == Some(&state.api_key);
    let secret_ok = request.headers.get("pinata_secret_api_key") == Some(&state.api_secret);
    if !key_ok || !secret_ok {
        return respond(
            stream,
            401,
            "Unauthorized",
            "application/json",
            br#"{"error":"invalid API credentials"}"#,
        );
    }

    let content_type = request
        .headers
        .get("content-type")
        .cloned()
        .unwrap_or_default();
    let Some(file) = extract_file_part(&request.body, &content_type) else {
        return respond(
            stream,
            400,
            "Bad Request",
            "application/json",
            br#"{"error":"multipart field `file` missing"}"#,
        );
    };

    let limit = state.max_payload.load(Ordering::SeqCst);
    if limit > 0 && file.len() as u64 > limit {
        return respond(
            stream,
            413,
            "Payload Too Large",
            "application/json",
            br#"{"error":"payload exceeds pin limit"}"#,
        );
    }

    let cid = content_cid(&file);
    let size = file.len();
    state.store.lock().unwrap().insert(cid.clone(), file);
    let body = format!(
        r#"{{"IpfsHash":"{cid}","PinSize":{size},"Timestamp":{}}}"#,
        crate::keygen::unix_now()
    );
    respond(stream, 200, "OK", "application/json", body.as_bytes())
}

fn handle_fetch(stream: &mut TcpStream, state: &ServerState, cid: &str) -> std::io::Result<()> {
    let payload = state.store.lock().unwrap().get(cid).cloned();
    let Some(payload) = payload else {
        return respond(
            stream,
            404,
            "Not Found",
            "application/json",
            br#"{"error":"cid not pinned"}"#,
        );
    };
    let mut body = payload.as_slice();
    if claim_token(&state.truncate_fetches) {
        body = &body[..body.len() / 2];
    }
    respond(stream, 200, "OK", "application/octet-stream", body)
}

/// Atomically takes one unit off a fault counter. True when a fault was
/// claimed.
fn claim_token(counter: &AtomicU32) -> bool {
    counter
        .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |v| v.checked_sub(1))
        .is_ok()
}

fn respond(
    stream: &mut TcpStream,
    code: u16,
    reason: &str,
    content_type: &str,
    body: &[u8],
) -> std::io::Result<()> {
    let head = format!(
        "HTTP/1.1 {code} {reason}\r\nContent-Type: {content_type}\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
        body.len()
    );
    stream.write_all(head.as_bytes())?;
    stream.write_all(body)?;
    stream.flush()
}

/// Reads one full request, handling Content-Length and chunked bodies.
fn read_request(stream: &mut TcpStream) -> std::io::Result<Request> {
    let mut buf = Vec::with_capacity(8 * 1024);
    let header_end = loop {
        if let Some(at) = find(&buf, b"\r\n\r\n", 0) {
            break at;
        }
        if buf.len() > 64 * 1024 {
            return Err(bad("headers too large"));
        }
        read_some(stream, &mut buf)?;
    };

    let head = std::str::from_utf8(&buf[..header_end]).map_err(|_| bad("non-utf8 headers"))?;
    let mut lines = head.split("\r\n");
    let request_line = lines.next().ok_or_else(|| bad("empty request"))?;
    let mut parts = request_line.split_whitespace();
    let method = parts.next().ok_or_else(|| bad("no method"))?.to_string();
    let path = parts.next().ok_or_else(|| bad("no path"))?.to_string();

    let mut headers = HashMap::new();
    for line in lines {
        if let Some((name, value)) = line.split_once(':') {
            headers.insert(name.trim().to_ascii_lowercase(), value.trim().to_string());
        }
    }

    let mut rest = buf.split_off(header_end + 4);
    let body = if let Some(len) = headers.get("content-length") {
        let len: usize = len.parse().map_err(|_| bad("bad content-length"))?;
        if len > HARD_BODY_LIMIT {
            return Err(bad("body too large"));
        }
        rest.reserve(len.saturating_sub(rest.len()));
        while rest.len() < len {
            read_some(stream, &mut rest)?;
        }
        rest.truncate(len);
        rest
    } else if headers
        .get("transfer-encoding")
        .is_some_and(|v| v.to_ascii_lowercase().contains("chunked"))
    {
        decode_chunked(stream, rest)?
    } else {
        Vec::new()
    };

    Ok(Request {
        method,
        path,
        headers,
        body,
    })
}

/// Decodes a chunked body; `pending` holds bytes already read past the
/// headers.
fn decode_chunked(stream: &mut TcpStream, mut pending: Vec<u8>) -> std::io::Result<Vec<u8>> {
    let mut body = Vec::new();
    let mut pos = 0;
    loop {
        let line_end = loop {
            if let Some(at) = find(&pending, b"\r\n", pos) {
                break at;
            }
            read_some(stream, &mut pending)?;
        };
        let size_text = std::str::from_utf8(&pending[pos..line_end])
            .map_err(|_| bad("bad chunk size"))?
            .trim()
            .split(';')
            .next()
            .unwrap_or("")
            .to_string();
        let size = usize::from_str_radix(&size_text, 16).map_err(|_| bad("bad chunk size"))?;
        if body.len() + size > HARD_BODY_LIMIT {
            return Err(bad("body too large"));
        }
        let data_start = line_end + 2;
        while pending.len() < data_start + size + 2 {
            read_some(stream, &mut pending)?;
        }
        if size == 0 {
            return Ok(body);
        }
        body.extend_from_slice(&pending[data_start..data_start + size]);
        pos = data_start + size + 2;
        // Drop consumed bytes so the buffer does not grow without bound.
        pending.drain(..pos);
        pos = 0;
    }
}

fn read_some(stream: &mut TcpStream, buf: &mut Vec<u8>) -> std::io::Result<()> {
    let mut chunk = [0u8; 16 * 1024];
    let n = stream.read(&mut chunk)?;
    if n == 0 {
        return Err(bad("connection closed mid-request"));
    }
    buf.extend_from_slice(&chunk[..n]);
    Ok(())
}

fn bad(msg: &str) -> std::io::Error {
    std::io::Error::new(std::io::ErrorKind::InvalidData, msg)
}

/// Naive subslice search, fast enough for test payloads.
fn find(haystack: &[u8], needle: &[u8], from: usize) -> Option<usize> {
    if haystack.len() < needle.len() + from {
        return None;
    }
    (from..=haystack.len() - needle.len()).find(|&i| &haystack[i..i + needle.len()] == needle)
}

/// Pulls the bytes of the multipart part named `file`.
fn extract_file_part(body: &[u8], content_type: &str) -> Option<Vec<u8>> {
    let boundary = content_type
        .split(';')
        .map(str::trim)
        .find_map(|p| p.strip_prefix("boundary="))?
        .trim_matches('"');
    let delim = format!("--{boundary}");

    let mut at = find(body, delim.as_bytes(), 0)? + delim.len();
    loop {
        // After a delimiter: "--" closes the stream, CRLF opens a part.
        if body.get(at..at + 2) == Some(b"--") {
            return None;
        }
        let headers_start = at + 2;
        let headers_end = find(body, b"\r\n\r\n", headers_start)?;
        let headers = std::str::from_utf8(&body[headers_start..headers_end]).ok()?;
        let data_start = headers_end + 4;
        let next_delim = find(body, delim.as_bytes(), data_start)?;
        // The part's data ends right before the CRLF preceding the delimiter.
        let data_end = next_delim.checked_sub(2)?;

        let is_file = headers.lines().any(|l| {
            l.to_ascii_lowercase().starts_with("content-disposition")
                && (l.contains("name=\"file\"") || l.contains("name=file;"))
        });
        if is_file {
            return Some(body[data_start..data_end].to_vec());
        }
        at = next_delim + delim.len();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn content_cid_is_deterministic_hex_digest() {
        // SHA-256 of "abc", a published test vector.
        assert_eq!(
            content_cid(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        assert_eq!(content_cid(b"abc"), content_cid(b"abc"));
        assert_ne!(content_cid(b"abc"), content_cid(b"abd"));
    }

    #[test]
    fn multipart_extraction_finds_the_file_part() {
        let body = b"--XYZ\r\ncontent-disposition: form-data; name=\"meta\"\r\n\r\nignored\r\n--XYZ\r\ncontent-disposition: form-data; name=\"file\"; filename=\"a.wav\"\r\ncontent-type: application/octet-stream\r\n\r\nPAYLOAD\x00BYTES\r\n--XYZ--\r\n";
        let got = extract_file_part(body, "multipart/form-data; boundary=XYZ").unwrap();
        assert_eq!(got, b"PAYLOAD\x00BYTES");
    }

    #[test]
    fn multipart_extraction_handles_missing_part() {
        let body = b"--B\r\ncontent-disposition: form-data; name=\"other\"\r\n\r\nx\r\n--B--\r\n";
        assert!(extract_file_part(body, "multipart/form-data; boundary=B").is_none());
    }

    #[test]
    fn subslice_find() {
        assert_eq!(find(b"hello world", b"world", 0), Some(6));
        assert_eq!(find(b"hello world", b"world", 7), None);
        assert_eq!(find(b"aaa", b"aaaa", 0), None);
    }
}
