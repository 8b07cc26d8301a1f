//! "Same topic?" decision sources with query accounting.
//!
//! An [`Oracle`] wraps a backend ([`SimOracle`] driven by ground-truth labels,
//! or [`RemoteOracle`] talking to a chat-completion endpoint) and counts every
//! logical query in a [`QueryLedger`]. One must-link group query costs one
//! ledger entry no matter how many texts it carries.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dataset::EmbeddedDataset;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryItem {
    pub id: usize,
    pub text: String,
}

impl QueryItem {
    pub fn from_dataset(data: &EmbeddedDataset, index: usize) -> Self {
        Self {
            id: data.record(index).id,
            text: data.text_of(index).to_owned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlGroupQuery {
    items: Vec<QueryItem>,
}

impl MlGroupQuery {
    pub fn new(items: Vec<QueryItem>) -> Result<Self> {
        if items.len() < 2 {
            return Err(Error::InvalidParameter(
                "a group query needs >= 2 texts".into(),
            ));
        }
        let mut ids: Vec<usize> = items.iter().map(|i| i.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter(
                "group query texts must have distinct ids".into(),
            ));
        }
        Ok(Self { items })
    }

    pub fn from_indices(data: &EmbeddedDataset, indices: &[usize]) -> Result<Self> {
        Self::new(
            indices
                .iter()
                .map(|&i| QueryItem::from_dataset(data, i))
                .collect(),
        )
    }

    pub fn items(&self) -> &[QueryItem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// A partition of query positions. Normalized: every group is sorted and
/// groups are ordered by their first element, so equality is
/// order-insensitive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlGroupResponse {
    groups: Vec<Vec<usize>>,
}

impl MlGroupResponse {
    /// Validates that `groups` partitions `0..m`.
    pub fn new(mut groups: Vec<Vec<usize>>, m: usize) -> Result<Self> {
        let mut seen = vec![false; m];
        for g in &mut groups {
            if g.is_empty() {
                return Err(Error::Malformed("empty group".into()));
            }
            g.sort_unstable();
            for &i in g.iter() {
                if i >= m || std::mem::replace(&mut seen[i], true) {
                    return Err(Error::Malformed(format!(
                        "group index {i} is out of range or repeated"
                    )));
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Malformed("groups do not cover every text".into()));
        }
        groups.sort_unstable_by_key(|g| g[0]);
        Ok(Self { groups })
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClMembershipQuery {
    set: Vec<QueryItem>,
    candidate: QueryItem,
}

impl ClMembershipQuery {
    pub fn new(set: Vec<QueryItem>, candidate: QueryItem) -> Result<Self> {
        if set.is_empty() {
            return Err(Error::InvalidParameter(
                "membership query needs a nonempty set".into(),
            ));
        }
        if set.iter().any(|s| s.id == candidate.id) {
            return Err(Error::InvalidParameter(
                "candidate is already in the set".into(),
            ));
        }
        Ok(Self { set, candidate })
    }

    pub fn set(&self) -> &[QueryItem] {
        &self.set
    }

    pub fn candidate(&self) -> &QueryItem {
        &self.candidate
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClVerdict {
    /// The candidate matches no set member.
    None,
    /// The candidate shares a topic with this set position.
    Matched(usize),
}

pub trait OracleBackend: Send + Sync {
    fn name(&self) -> String;

    /// `repeat` distinguishes repeated asks of the same query; backends with
    /// their own sampling noise may ignore it.
    fn ml_group(&self, query: &MlGroupQuery, repeat: u32) -> Result<MlGroupResponse>;

    fn cl_membership(&self, query: &ClMembershipQuery) -> Result<ClVerdict>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOracleConfig {
    /// Probability that each elementary same/different decision is flipped.
    pub error_rate: f64,
    pub seed: u64,
}

impl SimOracleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.error_rate) {
            return Err(Error::InvalidParameter(format!(
                "error rate must be in [0, 1], got {}",
                self.error_rate
            )));
        }
        Ok(())
    }
}

const TAG_ML: u64 = 0x4d4c;
const TAG_CL: u64 = 0x434c;

/// Label-driven oracle. Each unordered pair of texts in a query gets the
/// true same/different verdict, flipped independently with probability
/// `error_rate`; groups are the transitive closure of "same" verdicts.
/// Randomness is derived from `(seed, query ids, repeat)` so replays agree.
#[derive(Debug, Clone)]
pub struct SimOracle {
    labels: Vec<i64>,
    config: SimOracleConfig,
}

impl SimOracle {
    /// `labels` is indexed by record id.
    pub fn new(labels: Vec<i64>, config: SimOracleConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { labels, config })
    }

    pub fn from_dataset(data: &EmbeddedDataset, config: SimOracleConfig) -> Result<Self> {
        let labels = data
            .labels()
            .ok_or_else(|| Error::OracleConfig("simulated oracle needs labelled data".into()))?;
        Self::new(labels, config)
    }

    fn label(&self, id: usize) -> Result<i64> {
        self.labels
            .get(id)
            .copied()
            .ok_or_else(|| Error::OracleConfig(format!("no label for record id {id}")))
    }

    fn flip(&self, rng: &mut impl Rng) -> bool {
        // p = 0 never flips, p = 1 always does
        rng.random::<f64>() < self.config.error_rate
    }

    /// Elementary verdicts for every pair `i < j`, in row-major order.
    pub fn ml_decisions(&self, query: &MlGroupQuery, repeat: u32) -> Result<Vec<bool>> {
        let ids = query.items.iter().map(|i| i.id as u64);
        let mut rng = rng::rng_from(rng::hash_words(
            [self.config.seed, TAG_ML, repeat as u64]
                .into_iter()
                .chain(ids),
        ));
        let labels: Vec<i64> = query
            .items
            .iter()
            .map(|i| self.label(i.id))
            .collect::<Result<_>>()?;
        let m = labels.len();
        let mut out = Vec::with_capacity(m * (m - 1) / 2);
        for a in 0..m {
            for b in a + 1..m {
                let truth = labels[a] == labels[b];
                out.push(truth ^ self.flip(&mut rng));
            }
        }
        Ok(out)
    }

    /// Elementary verdicts of the candidate against each set member.
    pub fn cl_decisions(&self, query: &ClMembershipQuery) -> Result<Vec<bool>> {
        let words = [
            self.config.seed,
            TAG_CL,
            query.candidate.id as u64,
            u64::MAX,
        ]
        .into_iter()
        .chain(query.set.iter().map(|i| i.id as u64));
        let mut rng = rng::rng_from(rng::hash_words(words));
        let cand = self.label(query.candidate.id)?;
        query
            .set
            .iter()
            .map(|member| Ok((self.label(member.id)? == cand) ^ self.flip(&mut rng)))
            .collect()
    }
}

/// Groups from pairwise "same" verdicts by union-find.
pub(crate) fn closure_groups(m: usize, same: &[bool]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut k = 0;
    for a in 0..m {
        for b in a + 1..m {
            if same[k] {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
            k += 1;
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; m];
    for i in 0..m {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

impl OracleBackend for SimOracle {
    fn name(&self) -> String {
        format!(
            "sim(p={}, seed={})",
            self.config.error_rate, self.config.seed
        )
    }

    fn ml_group(&self, query: &MlGroupQuery, repeat: u32) -> Result<MlGroupResponse> {
        let same = self.ml_decisions(query, repeat)?;
        MlGroupResponse::new(closure_groups(query.len(), &same), query.len())
    }

    fn cl_membership(&self, query: &ClMembershipQuery) -> Result<ClVerdict> {
        let same = self.cl_decisions(query)?;
        Ok(match same.iter().position(|&s| s) {
            Some(i) => ClVerdict::Matched(i),
            None => ClVerdict::None,
        })
    }
}

// ---------------------------------------------------------------------------
// Remote chat-completion backend

pub const ENV_API_URL: &str = "ORACLE_API_URL";
pub const ENV_API_KEY: &str = "ORACLE_API_KEY";

#[derive(Clone, PartialEq)]
pub struct RemoteConfig {
    pub url: String,
    pub api_key: String,
    pub model: String,
    pub temperature: f64,
    pub max_attempts: u32,
    pub initial_backoff: Duration,
    pub timeout: Duration,
}

impl fmt::Debug for RemoteConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RemoteConfig")
            .field("url", &self.url)
            .field("api_key", &"<redacted>")
            .field("model", &self.model)
            .field("temperature", &self.temperature)
            .field("max_attempts", &self.max_attempts)
            .finish()
    }
}

impl RemoteConfig {
    pub fn new(
        url: impl Into<String>,
        api_key: impl Into<String>,
        model: impl Into<String>,
    ) -> Self {
        Self {
            url: url.into(),
            api_key: api_key.into(),
            model: model.into(),
            temperature: 0.7,
            max_attempts: 3,
            initial_backoff: Duration::from_millis(500),
            timeout: Duration::from_secs(120),
        }
    }

    /// Endpoint and key from `ORACLE_API_URL` / `ORACLE_API_KEY`.
    pub fn from_env(model: impl Into<String>) -> Result<Self> {
        let url = std::env::var(ENV_API_URL)
            .map_err(|_| Error::OracleConfig(format!("{ENV_API_URL} is not set")))?;
        let key = std::env::var(ENV_API_KEY)
            .map_err(|_| Error::OracleConfig(format!("{ENV_API_KEY} is not set")))?;
        Ok(Self::new(url, key, model))
    }
}

pub fn ml_prompt(query: &MlGroupQuery) -> String {
    let mut s = String::from(
        "Below is a numbered list of short texts. Group together the texts that \
         discuss the same topic.\n\
         Answer with one line per group in the form \"GROUP: i, j, k\" using the \
         numbers of the texts. Every number must appear in exactly one group; a \
         text unrelated to all others forms a group on its own. Do not output \
         anything else.\n\n",
    );
    for (i, item) in query.items.iter().enumerate() {
        s.push_str(&format!("{}. {}\n", i + 1, one_line(&item.text)));
    }
    s
}

pub fn cl_prompt(query: &ClMembershipQuery) -> String {
    let mut s = String::from(
        "Below is a numbered set of texts that each discuss a different topic, \
         followed by a candidate text.\n\
         If the candidate discusses the same topic as one of the numbered texts, \
         answer \"MATCH: i\" with that text's number. Otherwise answer \"NONE\". \
         Do not output anything else.\n\nSet:\n",
    );
    for (i, item) in query.set.iter().enumerate() {
        s.push_str(&format!("{}. {}\n", i + 1, one_line(&item.text)));
    }
    s.push_str(&format!(
        "\nCandidate: {}\n",
        one_line(&query.candidate.text)
    ));
    s
}

fn one_line(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Parses `GROUP: i, j` lines (1-based) into a partition of `0..m`. Blank
/// lines are allowed; any other line is rejected.
pub fn parse_group_reply(raw: &str, m: usize) -> std::result::Result<MlGroupResponse, String> {
    let mut groups = Vec::new();
    for line in raw.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let rest = line
            .strip_prefix("GROUP:")
            .ok_or_else(|| format!("unexpected line {line:?}"))?;
        let group = rest
            .split(',')
            .map(|tok| {
                let v: usize = tok
                    .trim()
                    .parse()
                    .map_err(|_| format!("bad index {:?} in {line:?}", tok.trim()))?;
                if v == 0 || v > m {
                    return Err(format!("index {v} outside 1..={m}"));
                }
                Ok(v - 1)
            })
            .collect::<std::result::Result<Vec<_>, String>>()?;
        groups.push(group);
    }
    if groups.is_empty() {
        return Err("no GROUP lines".into());
    }
    MlGroupResponse::new(groups, m).map_err(|e| e.to_string())
}

/// Parses exactly `NONE` or `MATCH: i` (1-based, `i <= set_len`).
pub fn parse_membership_reply(raw: &str, set_len: usize) -> std::result::Result<ClVerdict, String> {
    let reply = raw.trim();
    if reply == "NONE" {
        return Ok(ClVerdict::None);
    }
    let rest = reply
        .strip_prefix("MATCH:")
        .ok_or_else(|| format!("expected NONE or MATCH: i, got {reply:?}"))?;
    let v: usize = rest
        .trim()
        .parse()
        .map_err(|_| format!("bad match index {:?}", rest.trim()))?;
    if v == 0 || v > set_len {
        return Err(format!("match index {v} outside 1..={set_len}"));
    }
    Ok(ClVerdict::Matched(v - 1))
}

pub fn chat_request_body(model: &str, prompt: &str, temperature: f64) -> Value {
    json!({
        "model": model,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": temperature,
    })
}

/// Extracts `choices[0].message.content` from a chat-completion reply.
pub fn chat_reply_content(body: &Value) -> Option<&str> {
    body.get("choices")?
        .get(0)?
        .get("message")?
        .get("content")?
        .as_str()
}

pub struct RemoteOracle {
    config: RemoteConfig,
    agent: ureq::Agent,
}

enum Attempt {
    Transport(String),
    Parse { message: String, raw: String },
}

impl RemoteOracle {
    pub fn new(config: RemoteConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self { config, agent }
    }

    fn post(&self, prompt: &str) -> std::result::Result<String, Attempt> {
        let body = chat_request_body(&self.config.model, prompt, self.config.temperature);
        let mut resp = self
            .agent
            .post(&self.config.url)
            .header("Authorization", &format!("Bearer {}", self.config.api_key))
            .send_json(&body)
            .map_err(|e| Attempt::Transport(e.to_string()))?;
        let status = resp.status();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| Attempt::Transport(e.to_string()))?;
        if !status.is_success() {
            return Err(Attempt::Transport(format!("HTTP {status}: {text}")));
        }
        let value: Value = serde_json::from_str(&text).map_err(|e| Attempt::Parse {
            message: format!("reply is not JSON: {e}"),
            raw: text.clone(),
        })?;
        chat_reply_content(&value)
            .map(str::to_owned)
            .ok_or(Attempt::Parse {
                message: "reply has no choices[0].message.content".into(),
                raw: text,
            })
    }

    /// Up to `max_attempts` tries with doubling backoff; both transport and
    /// parse failures are retried.
    fn ask<T>(
        &self,
        prompt: &str,
        parse: impl Fn(&str) -> std::result::Result<T, String>,
    ) -> Result<T> {
        let attempts = self.config.max_attempts.max(1);
        let mut last = Attempt::Transport("no attempt made".into());
        for attempt in 0..attempts {
            if attempt > 0 {
                std::thread::sleep(self.config.initial_backoff * 2u32.pow(attempt - 1));
            }
            last = match self.post(prompt) {
                Ok(content) => match parse(&content) {
                    Ok(v) => return Ok(v),
                    Err(message) => Attempt::Parse {
                        message,
                        raw: content,
                    },
                },
                Err(e) => e,
            };
            log::warn!("oracle attempt {} of {attempts} failed", attempt + 1);
        }
        Err(match last {
            Attempt::Transport(message) => Error::OracleTransport { attempts, message },
            Attempt::Parse { message, raw } => Error::OracleParse {
                attempts,
                message,
                raw,
            },
        })
    }
}

impl OracleBackend for RemoteOracle {
    fn name(&self) -> String {
        format!("remote({})", self.config.model)
    }

    fn ml_group(&self, query: &MlGroupQuery, _repeat: u32) -> Result<MlGroupResponse> {
        self.ask(&ml_prompt(query), |raw| parse_group_reply(raw, query.len()))
    }

    fn cl_membership(&self, query: &ClMembershipQuery) -> Result<ClVerdict> {
        self.ask(&cl_prompt(query), |raw| {
            parse_membership_reply(raw, query.set.len())
        })
    }
}

// ---------------------------------------------------------------------------
// Ledger and handle

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerTotals {
    pub ml_queries: u64,
    pub cl_queries: u64,
    pub consistency_queries: u64,
}

impl LedgerTotals {
    pub fn total(&self) -> u64 {
        self.ml_queries + self.cl_queries + self.consistency_queries
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryKind {
    Ml,
    Cl,
    Consistency,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub kind: QueryKind,
    pub request: Value,
    pub response: Value,
    pub latency_ms: f64,
}

#[derive(Debug, Default)]
pub struct QueryLedger {
    ml: AtomicU64,
    cl: AtomicU64,
    consistency: AtomicU64,
    transcript: Mutex<Vec<TranscriptEntry>>,
}

impl QueryLedger {
    pub fn totals(&self) -> LedgerTotals {
        LedgerTotals {
            ml_queries: self.ml.load(Ordering::SeqCst),
            cl_queries: self.cl.load(Ordering::SeqCst),
            consistency_queries: self.consistency.load(Ordering::SeqCst),
        }
    }

    fn count(&self, kind: QueryKind, by: u64) {
        let c = match kind {
            QueryKind::Ml => &self.ml,
            QueryKind::Cl => &self.cl,
            QueryKind::Consistency => &self.consistency,
        };
        c.fetch_add(by, Ordering::SeqCst);
    }

    fn record(&self, entries: impl IntoIterator<Item = TranscriptEntry>) {
        self.transcript.lock().unwrap().extend(entries);
    }

    pub fn transcript(&self) -> Vec<TranscriptEntry> {
        self.transcript.lock().unwrap().clone()
    }
}

fn ml_request_json(query: &MlGroupQuery, repeat: u32) -> Value {
    json!({"items": query.items, "repeat": repeat})
}

fn response_json<T: Serialize>(r: &Result<T>) -> Value {
    match r {
        Ok(v) => json!({"ok": v}),
        Err(e) => json!({"error": e.to_string()}),
    }
}

type Answered = (Result<MlGroupResponse>, TranscriptEntry);

/// Shareable oracle handle: a backend plus its ledger.
pub struct Oracle {
    backend: Box<dyn OracleBackend>,
    ledger: QueryLedger,
    max_in_flight: usize,
}

impl fmt::Debug for Oracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Oracle")
            .field("backend", &self.backend.name())
            .field("totals", &self.ledger.totals())
            .finish()
    }
}

impl Oracle {
    pub fn new(backend: impl OracleBackend + 'static) -> Self {
        Self {
            backend: Box::new(backend),
            ledger: QueryLedger::default(),
            max_in_flight: 4,
        }
    }

    pub fn with_max_in_flight(mut self, n: usize) -> Self {
        self.max_in_flight = n.max(1);
        self
    }

    pub fn backend_name(&self) -> String {
        self.backend.name()
    }

    pub fn ledger(&self) -> &QueryLedger {
        &self.ledger
    }

    pub fn totals(&self) -> LedgerTotals {
        self.ledger.totals()
    }

    fn timed_ml(
        &self,
        query: &MlGroupQuery,
        repeat: u32,
        kind: QueryKind,
    ) -> (Result<MlGroupResponse>, TranscriptEntry) {
        self.ledger.count(kind, 1);
        let start = Instant::now();
        let res = self.backend.ml_group(query, repeat);
        let entry = TranscriptEntry {
            kind,
            request: ml_request_json(query, repeat),
            response: response_json(&res),
            latency_ms: start.elapsed().as_secs_f64() * 1e3,
        };
        (res, entry)
    }

    pub fn query_ml_group(&self, query: &MlGroupQuery) -> Result<MlGroupResponse> {
        let (res, entry) = self.timed_ml(query, 0, QueryKind::Ml);
        self.ledger.record([entry]);
        res
    }

    /// Issues independent group queries with at most `max_in_flight` in
    /// flight. Results and transcript entries come back in input order.
    pub fn query_ml_groups(&self, queries: &[MlGroupQuery]) -> Vec<Result<MlGroupResponse>> {
        let workers = self.max_in_flight.min(queries.len());
        if workers <= 1 {
            return queries.iter().map(|q| self.query_ml_group(q)).collect();
        }
        let next = AtomicUsize::new(0);
        let slots: Vec<Mutex<Option<Answered>>> =
            queries.iter().map(|_| Mutex::new(None)).collect();
        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    let Some(q) = queries.get(i) else { break };
                    *slots[i].lock().unwrap() = Some(self.timed_ml(q, 0, QueryKind::Ml));
                });
            }
        });
        let mut out = Vec::with_capacity(queries.len());
        let mut entries = Vec::with_capacity(queries.len());
        for slot in slots {
            let (res, entry) = slot.into_inner().unwrap().expect("every query was issued");
            out.push(res);
            entries.push(entry);
        }
        self.ledger.record(entries);
        out
    }

    pub fn query_cl_membership(&self, query: &ClMembershipQuery) -> Result<ClVerdict> {
        self.ledger.count(QueryKind::Cl, 1);
        let start = Instant::now();
        let res = self.backend.cl_membership(query);
        self.ledger.record([TranscriptEntry {
            kind: QueryKind::Cl,
            request: json!({"set": query.set, "candidate": query.candidate}),
            response: response_json(&res),
            latency_ms: start.elapsed().as_secs_f64() * 1e3,
        }]);
        res
    }

    /// Asks the same group query `alpha` times (repeat indices `1..=alpha`)
    /// and reports whether every answer is the same partition.
    pub fn consistency_repeat(&self, query: &MlGroupQuery, alpha: u32) -> Result<bool> {
        if alpha == 0 {
            return Err(Error::InvalidParameter("alpha must be >= 1".into()));
        }
        let mut first: Option<MlGroupResponse> = None;
        let mut consistent = true;
        let mut entries = Vec::with_capacity(alpha as usize);
        let mut failure = None;
        for r in 1..=alpha {
            let (res, entry) = self.timed_ml(query, r, QueryKind::Consistency);
            entries.push(entry);
            match res {
                Ok(resp) => match &first {
                    None => first = Some(resp),
                    Some(f) => consistent &= *f == resp,
                },
                Err(e) => {
                    failure = Some(e);
                    break;
                }
            }
        }
        self.ledger.record(entries);
        match failure {
            Some(e) => Err(e),
            None => Ok(consistent),
        }
    }

    /// Writes the transcript as JSONL, one query per line.
    pub fn write_transcript(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        for entry in self.ledger.transcript() {
            serde_json::to_writer(&mut w, &entry)?;
            w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}
