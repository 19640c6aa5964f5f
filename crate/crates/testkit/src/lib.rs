//! In-process HTTP fixtures: a FAIR Data Point that serves canned Turtle
//! documents, and an object remote speaking the `/objects/<sha256>` API.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

use sha2::{Digest, Sha256};
use tiny_http::{Header, Method, Response, Server};

/// One request as seen by a mock server.
#[derive(Debug, Clone)]
pub struct Seen {
    pub method: String,
    pub path: String,
    pub headers: Vec<(String, String)>,
}

impl Seen {
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }
}

struct Running {
    server: Arc<Server>,
    thread: Option<JoinHandle<()>>,
    seen: Arc<Mutex<Vec<Seen>>>,
    base: String,
}

impl Running {
    fn start(
        handler: impl Fn(&mut tiny_http::Request) -> Response<std::io::Cursor<Vec<u8>>> + Send + 'static,
    ) -> Self {
        let server = Arc::new(Server::http("127.0.0.1:0").expect("bind mock server"));
        let port = server.server_addr().to_ip().expect("ip listener").port();
        let seen = Arc::new(Mutex::new(Vec::new()));
        let (srv, log) = (server.clone(), seen.clone());
        let thread = std::thread::spawn(move || {
            for mut req in srv.incoming_requests() {
                log.lock().unwrap().push(Seen {
                    method: req.method().to_string(),
                    path: req.url().to_string(),
                    headers: req
                        .headers()
                        .iter()
                        .map(|h| (h.field.to_string(), h.value.to_string()))
                        .collect(),
                });
                let resp = handler(&mut req);
                let _ = req.respond(resp);
            }
        });
        Running {
            server,
            thread: Some(thread),
            seen,
            base: format!("http://127.0.0.1:{port}"),
        }
    }
}

impl Drop for Running {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

fn header(k: &str, v: &str) -> Header {
    Header::from_bytes(k.as_bytes(), v.as_bytes()).expect("valid header")
}

#[derive(Clone)]
enum Route {
    Body {
        status: u16,
        content_type: String,
        body: Vec<u8>,
    },
    Redirect(String),
}

/// A static FAIR Data Point.
pub struct MockFdp {
    running: Running,
}

#[derive(Default)]
pub struct MockFdpBuilder {
    routes: HashMap<String, Route>,
}

impl MockFdpBuilder {
    /// Serve `body` as `text/turtle` at `path`. The placeholder `{base}` in
    /// the body is replaced with the server's base URL.
    pub fn turtle(mut self, path: &str, body: &str) -> Self {
        self.routes.insert(
            path.to_string(),
            Route::Body {
                status: 200,
                content_type: "text/turtle".into(),
                body: body.as_bytes().to_vec(),
            },
        );
        self
    }

    pub fn raw(mut self, path: &str, status: u16, content_type: &str, body: &str) -> Self {
        self.routes.insert(
            path.to_string(),
            Route::Body {
                status,
                content_type: content_type.into(),
                body: body.as_bytes().to_vec(),
            },
        );
        self
    }

    /// 302 from `path` to `to` (a path on the same server).
    pub fn redirect(mut self, path: &str, to: &str) -> Self {
        self.routes
            .insert(path.to_string(), Route::Redirect(to.to_string()));
        self
    }

    pub fn start(self) -> MockFdp {
        let routes = Arc::new(Mutex::new(self.routes));
        let base = Arc::new(Mutex::new(String::new()));
        let (r, b) = (routes.clone(), base.clone());
        let running = Running::start(move |req| {
            let path = req.url().split('?').next().unwrap_or("").to_string();
            let base = b.lock().unwrap().clone();
            match r.lock().unwrap().get(&path).cloned() {
                Some(Route::Body {
                    status,
                    content_type,
                    body,
                }) => {
                    let body = String::from_utf8_lossy(&body).replace("{base}", &base);
                    Response::from_data(body.into_bytes())
                        .with_status_code(status)
                        .with_header(header("Content-Type", &content_type))
                }
                Some(Route::Redirect(to)) => Response::from_data(Vec::new())
                    .with_status_code(302)
                    .with_header(header("Location", &format!("{base}{to}"))),
                None => Response::from_data(b"not found".to_vec()).with_status_code(404),
            }
        });
        *base.lock().unwrap() = running.base.clone();
        MockFdp { running }
    }
}

impl MockFdp {
    pub fn builder() -> MockFdpBuilder {
        MockFdpBuilder::default()
    }

    pub fn base(&self) -> &str {
        &self.running.base
    }

    pub fn url(&self, path: &str) -> String {
        format!("{}{path}", self.running.base)
    }

    pub fn requests(&self) -> Vec<Seen> {
        self.running.seen.lock().unwrap().clone()
    }
}

/// The sample HealthDCAT-AP style catalog used across the test suites:
/// a catalog listing two datasets, the first one describing a prostate MRI
/// cohort of 14300 patients.
pub const SAMPLE_CATALOG: &str = r#"@prefix dcat: <http://www.w3.org/ns/dcat#> .
@prefix dct: <http://purl.org/dc/terms/> .
@prefix foaf: <http://xmlns.com/foaf/0.1/> .
@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .

<{base}/catalog/procancer> a dcat:Catalog ;
    dct:title "Prostate cancer imaging catalog" ;
    dcat:dataset <{base}/dataset/mpmri>, <{base}/dataset/followup> .
"#;

pub const SAMPLE_DATASET_MPMRI: &str = r#"@prefix dcat: <http://www.w3.org/ns/dcat#> .
@prefix dct: <http://purl.org/dc/terms/> .
@prefix foaf: <http://xmlns.com/foaf/0.1/> .
@prefix spdx: <http://spdx.org/rdf/terms#> .
@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
@prefix healthdcatap: <http://healthdataportal.eu/ns/health#> .

<{base}/dataset/mpmri> a dcat:Dataset ;
    dct:title "Prostate mpMRI cohort"@en ;
    dct:description "Multiparametric MRI studies with clinical annotations." ;
    dcat:version "2.1" ;
    dct:publisher <{base}/org/consortium> ;
    dct:license <https://creativecommons.org/licenses/by-nc/4.0/> ;
    dcat:keyword "prostate", "MRI", "oncology" ;
    healthdcatap:numberOfPatients "14300"^^xsd:integer ;
    healthdcatap:numberOfStudies 15800 ;
    healthdcatap:imagingModalities "MR" ;
    healthdcatap:sequenceTypes "T2W", "DWI", "DCE" ;
    healthdcatap:vendors "Siemens", "Philips", "GE" ;
    healthdcatap:useCase "UC1 lesion detection" ;
    dcat:distribution _:dist1 .

<{base}/org/consortium> a foaf:Organization ;
    foaf:name "Imaging Consortium" .

_:dist1 a dcat:Distribution ;
    dcat:accessURL <{base}/files/mpmri.zip> ;
    dcat:mediaType "application/zip" ;
    dcat:byteSize "1048576"^^xsd:integer ;
    spdx:checksum _:ck1 .

_:ck1 a spdx:Checksum ;
    spdx:algorithm spdx:checksumAlgorithm_md5 ;
    spdx:checksumValue "900150983cd24fb0d6963f7d28e17f72"^^xsd:hexBinary .
"#;

pub const SAMPLE_DATASET_FOLLOWUP: &str = r#"@prefix dcat: <http://www.w3.org/ns/dcat#> .
@prefix dct: <http://purl.org/dc/terms/> .
@prefix healthdcatap: <http://healthdataportal.eu/ns/health#> .

<{base}/dataset/followup> a dcat:Dataset ;
    dct:title "Treatment follow-up subset" ;
    dct:publisher "Clinical Partner Hospital" ;
    dct:license "CC-BY-4.0" ;
    healthdcatap:numberOfPatients 812 ;
    dcat:distribution <{base}/dist/followup-csv> .

<{base}/dist/followup-csv> a dcat:Distribution ;
    dcat:accessURL <{base}/files/followup.csv> ;
    dcat:mediaType <http://www.iana.org/assignments/media-types/text/csv> .
"#;

/// FDP serving the sample catalog at `/catalog/procancer`.
pub fn sample_fdp() -> MockFdp {
    MockFdp::builder()
        .turtle("/catalog/procancer", SAMPLE_CATALOG)
        .turtle("/dataset/mpmri", SAMPLE_DATASET_MPMRI)
        .turtle("/dataset/followup", SAMPLE_DATASET_FOLLOWUP)
        .redirect("/fdp", "/catalog/procancer")
        .raw(
            "/html",
            200,
            "text/html",
            "<!DOCTYPE html>\n<html><body>FAIR Data Point</body></html>\n",
        )
        .start()
}

/// Behaviour switches for [`MockRemote`].
#[derive(Debug, Clone, Copy, Default)]
pub struct RemoteMode {
    /// Serve objects with one byte flipped.
    pub tamper: bool,
}

/// Object remote holding objects in memory.
pub struct MockRemote {
    running: Running,
    objects: Arc<Mutex<HashMap<String, Vec<u8>>>>,
}

impl MockRemote {
    pub fn start(token: &str, mode: RemoteMode) -> MockRemote {
        let objects: Arc<Mutex<HashMap<String, Vec<u8>>>> = Arc::default();
        let objs = objects.clone();
        let expected = format!("Bearer {token}");
        let running = Running::start(move |req| {
            let authorized = req
                .headers()
                .iter()
                .any(|h| h.field.equiv("Authorization") && h.value.as_str() == expected);
            if !authorized {
                return Response::from_data(b"unauthorized".to_vec()).with_status_code(401);
            }
            let Some(digest) = req.url().strip_prefix("/objects/").map(str::to_string) else {
                return Response::from_data(Vec::new()).with_status_code(404);
            };
            match req.method() {
                Method::Head | Method::Get => match objs.lock().unwrap().get(&digest) {
                    Some(data) => {
                        let mut data = data.clone();
                        if mode.tamper && !data.is_empty() {
                            data[0] ^= 0xff;
                        }
                        Response::from_data(data)
                    }
                    None => Response::from_data(Vec::new()).with_status_code(404),
                },
                Method::Put => {
                    let mut body = Vec::new();
                    if req.as_reader().read_to_end(&mut body).is_err() {
                        return Response::from_data(Vec::new()).with_status_code(400);
                    }
                    if hex::encode(Sha256::digest(&body)) != digest {
                        return Response::from_data(b"digest mismatch".to_vec())
                            .with_status_code(400);
                    }
                    objs.lock().unwrap().insert(digest, body);
                    Response::from_data(Vec::new()).with_status_code(201)
                }
                _ => Response::from_data(Vec::new()).with_status_code(405),
            }
        });
        MockRemote { running, objects }
    }

    pub fn url(&self) -> &str {
        &self.running.base
    }

    pub fn object_count(&self) -> usize {
        self.objects.lock().unwrap().len()
    }

    pub fn insert(&self, digest: &str, data: &[u8]) {
        self.objects
            .lock()
            .unwrap()
            .insert(digest.to_string(), data.to_vec());
    }

    pub fn requests(&self) -> Vec<Seen> {
        self.running.seen.lock().unwrap().clone()
    }
}
