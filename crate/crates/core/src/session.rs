//! Review session for the exploratory phase, served to a browser client.
//!
//! The state machine and request routing live here and are free of any
//! networking; the command-line tool binds them to a loopback HTTP listener.
//!
//! | method | path                      | body                          |
//! |--------|---------------------------|-------------------------------|
//! | GET    | `/session`                | —                             |
//! | GET    | `/candidates/{id}/plot`   | —                             |
//! | POST   | `/decisions`              | `{"candidate": id, "keep": b}`|
//! | POST   | `/finalize`               | —                             |
//!
//! Every request carries the session token, in the `X-Session-Token` header
//! or as a `token` query parameter.

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::data::Dataset;
use crate::exploratory::{plots_for, scan_candidates, Decision, ExploratoryError, ExploratoryOutcome, PlotData, TermCandidate};
use crate::model::ModelSpec;
use crate::stats::Family;

pub const TOKEN_HEADER: &str = "X-Session-Token";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionCandidate {
    #[serde(flatten)]
    pub candidate: TermCandidate,
    pub label: String,
    pub plots: Vec<PlotData>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub session_id: String,
    pub retained: Vec<usize>,
    pub names: Vec<String>,
    pub candidates: Vec<SessionCandidate>,
    pub finalized: bool,
    #[serde(skip)]
    token: String,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SessionError {
    #[error("unknown candidate {0}")]
    UnknownCandidate(usize),
    #[error("session already finalized")]
    AlreadyFinalized,
    #[error("missing or wrong session token")]
    BadToken,
    #[error("{0} candidates still pending")]
    PendingCandidates(usize),
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error("no route for {0}")]
    NotFound(String),
}

impl SessionError {
    pub fn status(&self) -> u16 {
        match self {
            SessionError::BadToken => 401,
            SessionError::UnknownCandidate(_) | SessionError::NotFound(_) => 404,
            SessionError::AlreadyFinalized | SessionError::PendingCandidates(_) => 409,
            SessionError::BadRequest(_) => 400,
        }
    }

    fn code(&self) -> &'static str {
        match self {
            SessionError::UnknownCandidate(_) => "unknown_candidate",
            SessionError::AlreadyFinalized => "already_finalized",
            SessionError::BadToken => "bad_token",
            SessionError::PendingCandidates(_) => "pending_candidates",
            SessionError::BadRequest(_) => "bad_request",
            SessionError::NotFound(_) => "not_found",
        }
    }
}

impl SessionState {
    pub fn new(
        session_id: impl Into<String>,
        token: impl Into<String>,
        dataset: &Dataset,
        retained: &[usize],
        candidates: Vec<TermCandidate>,
    ) -> Result<Self, ExploratoryError> {
        let candidates = candidates
            .into_iter()
            .map(|c| {
                Ok(SessionCandidate { label: c.term.label(&dataset.names), plots: plots_for(dataset, &c.term)?, candidate: c })
            })
            .collect::<Result<_, ExploratoryError>>()?;
        Ok(Self {
            session_id: session_id.into(),
            retained: retained.to_vec(),
            names: dataset.names.clone(),
            candidates,
            finalized: false,
            token: token.into(),
        })
    }

    /// Scan `retained` and open a session over the candidates found.
    pub fn open(
        session_id: impl Into<String>,
        token: impl Into<String>,
        dataset: &Dataset,
        retained: &[usize],
        family: Family,
        signif: f64,
    ) -> Result<Self, ExploratoryError> {
        let candidates = scan_candidates(dataset, retained, family, signif)?;
        Self::new(session_id, token, dataset, retained, candidates)
    }

    pub fn pending(&self) -> usize {
        self.candidates.iter().filter(|c| c.candidate.decision == Decision::Pending).count()
    }

    pub fn check_token(&self, token: Option<&str>) -> Result<(), SessionError> {
        match token {
            Some(t) if t == self.token => Ok(()),
            _ => Err(SessionError::BadToken),
        }
    }

    /// Record a decision. Repeating a decision is a no-op; a different one
    /// overwrites it until the session is finalized.
    pub fn decide(&mut self, id: usize, keep: bool) -> Result<&TermCandidate, SessionError> {
        if self.finalized {
            return Err(SessionError::AlreadyFinalized);
        }
        let c = self.candidates.get_mut(id).ok_or(SessionError::UnknownCandidate(id))?;
        c.candidate.decision = if keep { Decision::Keep } else { Decision::Discard };
        Ok(&c.candidate)
    }

    pub fn plots(&self, id: usize) -> Result<&[PlotData], SessionError> {
        self.candidates.get(id).map(|c| c.plots.as_slice()).ok_or(SessionError::UnknownCandidate(id))
    }

    pub fn outcome(&self) -> ExploratoryOutcome {
        ExploratoryOutcome::new(self.retained.clone(), self.candidates.iter().map(|c| c.candidate.clone()).collect())
    }

    /// Freeze the session. Allowed only once nothing is pending.
    pub fn finalize(&mut self) -> Result<ExploratoryOutcome, SessionError> {
        if self.finalized {
            return Err(SessionError::AlreadyFinalized);
        }
        let pending = self.pending();
        if pending > 0 {
            return Err(SessionError::PendingCandidates(pending));
        }
        self.finalized = true;
        Ok(self.outcome())
    }

    fn summary(&self) -> serde_json::Value {
        let candidates: Vec<_> = self
            .candidates
            .iter()
            .map(|c| {
                json!({
                    "id": c.candidate.id,
                    "term": c.candidate.term,
                    "label": c.label,
                    "p_value": c.candidate.p_value,
                    "test_statistic": c.candidate.test_statistic,
                    "decision": c.candidate.decision,
                })
            })
            .collect();
        json!({
            "session_id": self.session_id,
            "finalized": self.finalized,
            "pending": self.pending(),
            "decided": self.candidates.len() - self.pending(),
            "retained": self.retained.iter().map(|&v| &self.names[v]).collect::<Vec<_>>(),
            "candidates": candidates,
        })
    }

    fn comprehensive_json(&self, model: &ModelSpec) -> serde_json::Value {
        json!({ "terms": model.labels(&self.names), "size": model.size() })
    }

    /// Route one request. The token is checked before anything else.
    pub fn handle(&mut self, req: &SessionRequest) -> SessionResponse {
        match self.route(req) {
            Ok(body) => SessionResponse { status: 200, body },
            Err(e) => SessionResponse { status: e.status(), body: json!({ "error": e.code(), "message": e.to_string() }) },
        }
    }

    fn route(&mut self, req: &SessionRequest) -> Result<serde_json::Value, SessionError> {
        self.check_token(req.token.as_deref())?;
        let path = req.path.split('?').next().unwrap_or("").trim_end_matches('/');
        let segments: Vec<&str> = path.split('/').filter(|s| !s.is_empty()).collect();
        match (req.method.as_str(), segments.as_slice()) {
            ("GET", ["session"]) => Ok(self.summary()),
            ("GET", ["candidates", id, "plot"]) => {
                let id: usize = id.parse().map_err(|_| SessionError::BadRequest(format!("bad candidate id `{id}`")))?;
                Ok(json!({ "candidate": id, "plots": self.plots(id)? }))
            }
            ("POST", ["decisions"]) => {
                #[derive(Deserialize)]
                struct Body {
                    candidate: usize,
                    keep: bool,
                }
                let body: Body = serde_json::from_slice(&req.body).map_err(|e| SessionError::BadRequest(e.to_string()))?;
                let c = self.decide(body.candidate, body.keep)?.clone();
                Ok(json!({ "candidate": c.id, "decision": c.decision, "pending": self.pending() }))
            }
            ("POST", ["finalize"]) => {
                let outcome = self.finalize()?;
                Ok(json!({
                    "finalized": true,
                    "kept": outcome.kept_terms().iter().map(|t| t.label(&self.names)).collect::<Vec<_>>(),
                    "comprehensive": self.comprehensive_json(&outcome.comprehensive()),
                }))
            }
            (method, _) => Err(SessionError::NotFound(format!("{method} {path}"))),
        }
    }
}

/// A transport-independent request.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SessionRequest {
    pub method: String,
    /// Path, optionally with a query string.
    pub path: String,
    pub token: Option<String>,
    pub body: Vec<u8>,
}

impl SessionRequest {
    pub fn new(method: &str, path: &str, token: Option<&str>, body: &[u8]) -> Self {
        let token = token.map(str::to_string).or_else(|| query_token(path));
        Self { method: method.to_ascii_uppercase(), path: path.into(), token, body: body.to_vec() }
    }
}

fn query_token(path: &str) -> Option<String> {
    let (_, query) = path.split_once('?')?;
    query.split('&').find_map(|kv| kv.strip_prefix("token=")).map(str::to_string)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionResponse {
    pub status: u16,
    pub body: serde_json::Value,
}
