//! Pinning-service client: pin a file over a Pinata-shaped HTTP API and
//! fetch it back through a gateway. Everything is plain configuration, so
//! the bundled [`mock`] server stands in for the real service in tests.

pub mod mock;

use std::fmt;
use std::fs::File;
use std::path::Path;
use std::thread;
use std::time::Duration;

use serde::Deserialize;
use thiserror::Error;

/// Environment variable holding the pinning API key.
pub const ENV_KEY: &str = "HEXE_IPFS_KEY";
/// Environment variable holding the pinning API secret.
pub const ENV_SECRET: &str = "HEXE_IPFS_SECRET";
/// Optional override for the pinning API base URL.
pub const ENV_API: &str = "HEXE_IPFS_API";
/// Optional override for the gateway base URL.
pub const ENV_GATEWAY: &str = "HEXE_IPFS_GATEWAY";
/// Optional path to a `key = value` config file, lowest precedence.
pub const ENV_CONFIG: &str = "HEXE_IPFS_CONFIG";

const DEFAULT_API: &str = "https://api.pinata.cloud";
const DEFAULT_GATEWAY: &str = "https://gateway.pinata.cloud";

#[derive(Debug, Error)]
pub enum IpfsError {
    #[error("pinning credentials are missing; set {ENV_KEY} and {ENV_SECRET}")]
    MissingCredentials,
    #[error("payload is empty")]
    EmptyPayload,
    #[error("pinning service rejected the credentials")]
    AuthFailed,
    #[error("payload exceeds the service limit")]
    PayloadTooLarge,
    #[error("cid {0} not found on the gateway")]
    NotFound(String),
    #[error("service unavailable after {attempts} attempts: {detail}")]
    ServiceUnavailable { attempts: u32, detail: String },
    #[error("cid {cid}: fetched {actual} bytes, receipt says {expected}")]
    IntegrityMismatch {
        cid: String,
        expected: u64,
        actual: u64,
    },
    #[error("unexpected service response: {0}")]
    Protocol(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Service endpoints and credentials. The `Debug` impl redacts the
/// credentials; nothing in this crate ever logs them.
#[derive(Clone)]
pub struct IpfsConfig {
    pub api_base_url: String,
    pub gateway_base_url: String,
    pub api_key: String,
    pub api_secret: String,
    pub timeout_seconds: u64,
    pub max_retries: u32,
}

impl Default for IpfsConfig {
    fn default() -> Self {
        Self {
            api_base_url: DEFAULT_API.into(),
            gateway_base_url: DEFAULT_GATEWAY.into(),
            api_key: String::new(),
            api_secret: String::new(),
            timeout_seconds: 60,
            max_retries: 2,
        }
    }
}

impl fmt::Debug for IpfsConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let redact = |s: &str| {
            if s.is_empty() {
                "<unset>"
            } else {
                "<redacted>"
            }
        };
        f.debug_struct("IpfsConfig")
            .field("api_base_url", &self.api_base_url)
            .field("gateway_base_url", &self.gateway_base_url)
            .field("api_key", &redact(&self.api_key))
            .field("api_secret", &redact(&self.api_secret))
            .field("timeout_seconds", &self.timeout_seconds)
            .field("max_retries", &self.max_retries)
            .finish()
    }
}

impl IpfsConfig {
    /// Builds the config from the environment: an optional config file
    /// named by `HEXE_IPFS_CONFIG`, overridden by the `HEXE_IPFS_*`
    /// variables. Credentials never come from command-line flags.
    pub fn from_env() -> Result<Self, IpfsError> {
        let mut cfg = Self::default();
        if let Ok(path) = std::env::var(ENV_CONFIG) {
            let text = std::fs::read_to_string(&path)?;
            cfg.apply_config_text(&text);
        }
        let var = |name: &str| std::env::var(name).ok().filter(|v| !v.is_empty());
        if let Some(v) = var(ENV_API) {
            cfg.api_base_url = v;
        }
        if let Some(v) = var(ENV_GATEWAY) {
            cfg.gateway_base_url = v;
        }
        if let Some(v) = var(ENV_KEY) {
            cfg.api_key = v;
        }
        if let Some(v) = var(ENV_SECRET) {
            cfg.api_secret = v;
        }
        Ok(cfg)
    }

    /// Applies `key = value` lines; `#` starts a comment. Unknown keys are
    /// ignored so config files can carry extra tooling entries.
    pub fn apply_config_text(&mut self, text: &str) {
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            let Some((key, value)) = line.split_once('=') else {
                continue;
            };
            let value = value.trim().to_string();
            match key.trim() {
                "api" => self.api_base_url = value,
                "gateway" => self.gateway_base_url = value,
                "key" => self.api_key = value,
                "secret" => self.api_secret = value,
                "timeout_seconds" => {
                    if let Ok(v) = value.parse() {
                        self.timeout_seconds = v;
                    }
                }
                "max_retries" => {
                    if let Ok(v) = value.parse() {
                        self.max_retries = v;
                    }
                }
                _ => {}
            }
        }
    }

    fn require_credentials(&self) -> Result<(), IpfsError> {
        if self.api_key.is_empty() || self.api_secret.is_empty() {
            return Err(IpfsError::MissingCredentials);
        }
        Ok(())
    }

    fn gateway_url(&self, cid: &str) -> String {
        format!("{}/ipfs/{cid}", self.gateway_base_url.trim_end_matches('/'))
    }

    fn pin_url(&self) -> String {
        format!(
            "{}/pinning/pinFileToIPFS",
            self.api_base_url.trim_end_matches('/')
        )
    }
}

/// Proof of a successful pin, and the baseline for integrity checks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PinReceipt {
    pub cid: String,
    /// Bytes pinned, as uploaded.
    pub size: u64,
    pub timestamp_pinned: u64,
    /// Full fetch URL, `{gateway}/ipfs/{cid}`.
    pub gateway_url: String,
}

#[derive(Deserialize)]
struct PinResponse {
    #[serde(rename = "IpfsHash")]
    ipfs_hash: String,
    /// UNIX seconds from the mock; real services may send a string date,
    /// which is ignored.
    #[serde(rename = "Timestamp", default)]
    timestamp: Option<serde_json::Value>,
}

enum Attempt<T> {
    Done(T),
    Fatal(IpfsError),
    Transient(String),
}

fn with_retries<T>(
    cfg: &IpfsConfig,
    mut attempt: impl FnMut() -> Attempt<T>,
) -> Result<T, IpfsError> {
    let attempts = cfg.max_retries + 1;
    let mut detail = String::new();
    for round in 0..attempts {
        match attempt() {
            Attempt::Done(v) => return Ok(v),
            Attempt::Fatal(e) => return Err(e),
            Attempt::Transient(d) => detail = d,
        }
        if round + 1 < attempts {
            let backoff = Duration::from_millis(50 << round.min(5));
            thread::sleep(backoff);
        }
    }
    Err(IpfsError::ServiceUnavailable { attempts, detail })
}

fn http_client(cfg: &IpfsConfig) -> Result<reqwest::blocking::Client, IpfsError> {
    reqwest::blocking::Client::builder()
        .timeout(Duration::from_secs(cfg.timeout_seconds.max(1)))
        .build()
        .map_err(|e| IpfsError::Protocol(e.to_string()))
}

/// Pins an in-memory payload under the given file name.
pub fn pin_bytes(cfg: &IpfsConfig, bytes: &[u8], name: &str) -> Result<PinReceipt, IpfsError> {
    if bytes.is_empty() {
        return Err(IpfsError::EmptyPayload);
    }
    let size = bytes.len() as u64;
    let owned = bytes.to_vec();
    let name = name.to_string();
    pin_with(cfg, size, move || {
        reqwest::blocking::multipart::Part::bytes(owned.clone()).file_name(name.clone())
    })
}

/// Pins a file from disk, streaming it instead of buffering.
pub fn pin_file(cfg: &IpfsConfig, path: &Path) -> Result<PinReceipt, IpfsError> {
    let size = std::fs::metadata(path)?.len();
    if size == 0 {
        return Err(IpfsError::EmptyPayload);
    }
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "file".to_string());
    let path = path.to_path_buf();
    pin_with(cfg, size, move || {
        let file = File::open(&path).expect("pinned file vanished mid-upload");
        reqwest::blocking::multipart::Part::reader_with_length(file, size).file_name(name.clone())
    })
}

fn pin_with(
    cfg: &IpfsConfig,
    size: u64,
    make_part: impl Fn() -> reqwest::blocking::multipart::Part,
) -> Result<PinReceipt, IpfsError> {
    cfg.require_credentials()?;
    let client = http_client(cfg)?;
    let url = cfg.pin_url();
    let response = with_retries(cfg, || {
        let form = reqwest::blocking::multipart::Form::new().part("file", make_part());
        let sent = client
            .post(&url)
            .header("pinata_api_key", &cfg.api_key)
            .header("pinata_secret_api_key", &cfg.api_secret)
            .multipart(form)
            .send();
        match sent {
            Ok(resp) => classify_pin(resp),
            Err(e) => Attempt::Transient(e.to_string()),
        }
    })?;
    Ok(PinReceipt {
        gateway_url: cfg.gateway_url(&response.ipfs_hash),
        timestamp_pinned: response
            .timestamp
            .as_ref()
            .and_then(serde_json::Value::as_u64)
            .unwrap_or_else(crate::keygen::unix_now),
        size,
        cid: response.ipfs_hash,
    })
}

fn classify_pin(resp: reqwest::blocking::Response) -> Attempt<PinResponse> {
    let status = resp.status();
    if status.is_success() {
        return match resp.json::<PinResponse>() {
            Ok(body) if !body.ipfs_hash.is_empty() => Attempt::Done(body),
            Ok(_) => Attempt::Fatal(IpfsError::Protocol("empty IpfsHash in response".into())),
            Err(e) => Attempt::Fatal(IpfsError::Protocol(format!("bad pin response: {e}"))),
        };
    }
    match status.as_u16() {
        401 | 403 => Attempt::Fatal(IpfsError::AuthFailed),
        413 => Attempt::Fatal(IpfsError::PayloadTooLarge),
        500..=599 => Attempt::Transient(format!("pin failed with status {status}")),
        _ => Attempt::Fatal(IpfsError::Protocol(format!(
            "pin failed with status {status}"
        ))),
    }
}

/// Fetches the bytes behind a cid through the gateway.
pub fn fetch_cid(cfg: &IpfsConfig, cid: &str) -> Result<Vec<u8>, IpfsError> {
    if cid.is_empty() {
        return Err(IpfsError::Protocol("empty cid".into()));
    }
    let client = http_client(cfg)?;
    let url = cfg.gateway_url(cid);
    with_retries(cfg, || {
        match client.get(&url).send() {
            Ok(resp) => {
                let status = resp.status();
                if status.is_success() {
                    match resp.bytes() {
                        Ok(b) => Attempt::Done(b.to_vec()),
                        // A connection dropped mid-body is worth retrying.
                        Err(e) => Attempt::Transient(e.to_string()),
                    }
                } else {
                    match status.as_u16() {
                        404 => Attempt::Fatal(IpfsError::NotFound(cid.to_string())),
                        401 | 403 => Attempt::Fatal(IpfsError::AuthFailed),
                        500..=599 => {
                            Attempt::Transient(format!("fetch failed with status {status}"))
                        }
                        _ => Attempt::Fatal(IpfsError::Protocol(format!(
                            "fetch failed with status {status}"
                        ))),
                    }
                }
            }
            Err(e) => Attempt::Transient(e.to_string()),
        }
    })
}

/// Fetches against a receipt and verifies the size matches what was
/// pinned.
pub fn fetch_pinned(cfg: &IpfsConfig, receipt: &PinReceipt) -> Result<Vec<u8>, IpfsError> {
    let bytes = fetch_cid(cfg, &receipt.cid)?;
    if bytes.len() as u64 != receipt.size {
        return Err(IpfsError::IntegrityMismatch {
            cid: receipt.cid.clone(),
            expected: receipt.size,
            actual: bytes.len() as u64,
        });
    }
    Ok(bytes)
}

/// Strips the `ipfs://` scheme, if present.
pub fn parse_ipfs_url(input: &str) -> Option<&str> {
    input.strip_prefix("ipfs://").filter(|cid| !cid.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn debug_never_shows_credentials() {
        let cfg = IpfsConfig {
            api_key: "k3y-material".into(),
            api_secret: "s3cret-material".into(),
            ..IpfsConfig::default()
        };
        let debugged = format!("{cfg:?}");
        assert!(!debugged.contains("k3y-material"));
        assert!(!debugged.contains("s3cret-material"));
        assert!(debugged.contains("<redacted>"));
    }

    #[test]
    fn config_text_is_applied_with_comments_ignored() {
        let mut cfg = IpfsConfig::default();
        cfg.apply_config_text(
            "# pinning service\napi = http://127.0.0.1:9999\nkey=abc\nsecret = def # inline\ntimeout_seconds = 5\nmax_retries = 7\njunk line\nunknown = ok\n",
        );
        assert_eq!(cfg.api_base_url, "http://127.0.0.1:9999");
        assert_eq!(cfg.api_key, "abc");
        assert_eq!(cfg.api_secret, "def");
        assert_eq!(cfg.timeout_seconds, 5);
        assert_eq!(cfg.max_retries, 7);
    }

    #[test]
    fn missing_credentials_fail_before_any_network_use() {
        let cfg = IpfsConfig::default();
        assert!(matches!(
            pin_bytes(&cfg, b"data", "x.wav"),
            Err(IpfsError::MissingCredentials)
        ));
    }

    #[test]
    fn empty_payload_is_rejected() {
        let cfg = IpfsConfig {
            api_key: "k".into(),
            api_secret: "s".into(),
            ..IpfsConfig::default()
        };
        assert!(matches!(
            pin_bytes(&cfg, b"", "x.wav"),
            Err(IpfsError::EmptyPayload)
        ));
    }

    #[test]
    fn gateway_url_shape() {
        let cfg = IpfsConfig {
            gateway_base_url: "http://gw.example/".into(),
            ..IpfsConfig::default()
        };
        assert_eq!(cfg.gateway_url("abc"), "http://gw.example/ipfs/abc");
    }

    #[test]
    fn ipfs_scheme_parsing() {
        assert_eq!(parse_ipfs_url("ipfs://abc123"), Some("abc123"));
        assert_eq!(parse_ipfs_url("ipfs://"), None);
        assert_eq!(parse_ipfs_url("file.wav"), None);
    }
}
