//! Loopback HTTP transport for [`SessionState`].

use std::io::Read;
use std::net::{Ipv4Addr, SocketAddr};

use modelsets::exploratory::ExploratoryOutcome;
use modelsets::session::{SessionRequest, SessionState, TOKEN_HEADER};
use tiny_http::{Header, Method, Response, Server};

use crate::error::CliError;

const STAGE: &str = "explore";

pub struct SessionServer {
    server: Server,
}

impl SessionServer {
    /// Bind `127.0.0.1:port`; port 0 picks a free one. There is deliberately
    /// no way to bind another interface.
    pub fn bind(port: u16) -> Result<Self, CliError> {
        let server = Server::http(SocketAddr::from((Ipv4Addr::LOCALHOST, port)))
            .map_err(|e| CliError::io(STAGE, format!("cannot bind session server: {e}")))?;
        Ok(Self { server })
    }

    pub fn addr(&self) -> SocketAddr {
        self.server.server_addr().to_ip().expect("bound to a TCP address")
    }

    /// Answer requests one at a time until a finalize succeeds, then return
    /// the frozen outcome.
    pub fn serve(self, mut session: SessionState) -> Result<ExploratoryOutcome, CliError> {
        for mut request in self.server.incoming_requests() {
            if *request.method() == Method::Options {
                // CORS preflight for a browser client on another origin.
                let _ = request.respond(with_cors(Response::empty(204)));
                continue;
            }
            let mut body = Vec::new();
            if let Err(e) = request.as_reader().read_to_end(&mut body) {
                log::warn!("dropping request with unreadable body: {e}");
                continue;
            }
            let token = request
                .headers()
                .iter()
                .find(|h| h.field.equiv(TOKEN_HEADER))
                .map(|h| h.value.as_str().to_string());
            let req = SessionRequest::new(request.method().as_str(), request.url(), token.as_deref(), &body);
            let resp = session.handle(&req);
            log::debug!("{} {} -> {}", req.method, request.url(), resp.status);
            let finalized = req.method == "POST" && resp.status == 200 && session.finalized;
            let json = Response::from_string(resp.body.to_string())
                .with_status_code(resp.status)
                .with_header(header("Content-Type", "application/json"));
            if let Err(e) = request.respond(with_cors(json)) {
                log::warn!("failed to send response: {e}");
            }
            if finalized {
                return Ok(session.outcome());
            }
        }
        Err(CliError::io(STAGE, "session server stopped before finalize"))
    }
}

fn header(name: &str, value: &str) -> Header {
    Header::from_bytes(name.as_bytes(), value.as_bytes()).expect("static header is valid")
}

fn with_cors<R: Read>(resp: Response<R>) -> Response<R> {
    resp.with_header(header("Access-Control-Allow-Origin", "*"))
        .with_header(header("Access-Control-Allow-Headers", &format!("Content-Type, {TOKEN_HEADER}")))
        .with_header(header("Access-Control-Allow-Methods", "GET, POST, OPTIONS"))
}
