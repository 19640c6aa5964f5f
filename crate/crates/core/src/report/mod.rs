//! Human-readable rendering of a passport as one self-contained HTML page
//! or as Markdown.

mod svg;

use std::fmt::Write;

use crate::cas::ObjectRef;
use crate::passport::{DatasetRef, ModelPassport, PassportError};
use crate::pipeline::{
    build_dag, Dag, LockFile, LockRecord, PipelineError, PipelineSpec, StageSpec,
};
use crate::provgraph::Literal;

pub use svg::render_dag_svg;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderFormat {
    Html,
    Markdown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RenderOptions {
    pub format: RenderFormat,
    pub include_graph_svg: bool,
}

impl RenderOptions {
    pub fn html() -> Self {
        Self {
            format: RenderFormat::Html,
            include_graph_svg: true,
        }
    }

    pub fn markdown() -> Self {
        Self {
            format: RenderFormat::Markdown,
            include_graph_svg: false,
        }
    }
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self::html()
    }
}

pub(crate) fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

/// The stage graph as recorded in the lock: an edge wherever an out of
/// one stage is a dep of another.
pub fn dag_from_lock(lock: &LockFile) -> Result<Dag, PipelineError> {
    let stages = lock
        .stages
        .iter()
        .map(|(name, r)| StageSpec {
            name: name.clone(),
            command: r.command.clone(),
            deps: r.deps.keys().cloned().collect(),
            outs: r.outs.keys().cloned().collect(),
            params: r.params.keys().cloned().collect(),
            tool: r.tool.clone(),
        })
        .collect();
    let spec = PipelineSpec {
        stages,
        params_file: String::new(),
        training: None,
        workspace_id: lock.workspace_id.clone(),
    };
    build_dag(&spec)
}

/// Render a passport. Output is a pure function of its inputs.
pub fn render(passport: &ModelPassport, options: &RenderOptions) -> Result<String, PassportError> {
    passport.check_self_consistent()?;
    let dag = dag_from_lock(&passport.lock)?;
    Ok(match options.format {
        RenderFormat::Html => Html::new(passport, &dag, options.include_graph_svg).render(),
        RenderFormat::Markdown => markdown(passport, &dag),
    })
}

fn duration(r: &LockRecord) -> String {
    match r.duration_ms() {
        Some(ms) => format!("{}.{:03} s", ms / 1000, ms % 1000),
        None => "unknown".into(),
    }
}

fn literal(l: &Literal) -> &str {
    l.lexical()
}

fn or_dash(s: &str) -> &str {
    if s.trim().is_empty() {
        "-"
    } else {
        s
    }
}

fn dataset_ref(passport: &ModelPassport, r: &Option<DatasetRef>) -> (String, Option<String>) {
    match r {
        Some(DatasetRef::Iri(i)) => (i.clone(), None),
        Some(DatasetRef::Object(o)) => {
            let path = passport
                .lock
                .stages
                .values()
                .flat_map(|s| s.deps.iter().chain(s.outs.iter()))
                .find(|(_, v)| v.sha256_hex() == o.sha256_hex())
                .map(|(p, _)| p.clone())
                .unwrap_or_default();
            (path, Some(o.sha256_hex().to_string()))
        }
        None => ("-".into(), None),
    }
}

const CSS: &str = "\
body{font-family:system-ui,-apple-system,Segoe UI,Roboto,sans-serif;margin:2rem auto;max-width:1100px;color:#1d2330;line-height:1.45;padding:0 1rem}
h1{font-size:1.6rem;margin-bottom:.2rem}
h2{border-bottom:2px solid #3b6db3;padding-bottom:.2rem;margin-top:2.2rem}
h3{margin-bottom:.3rem}
table{border-collapse:collapse;margin:.5rem 0 1rem;width:100%}
th,td{border:1px solid #d0d7e2;padding:.3rem .5rem;text-align:left;vertical-align:top}
th{background:#eef3fb}
code{font-family:ui-monospace,SFMono-Regular,Menlo,monospace;font-size:.9em}
.digest{background:#f4f4f4;padding:0 .2rem;border-radius:3px;cursor:help}
.identity{font-size:1.05rem;word-break:break-all}
.muted{color:#667}
.stage{border:1px solid #d0d7e2;border-radius:6px;padding:.5rem 1rem;margin:1rem 0}
.dag{max-width:100%;height:auto}
dl{display:grid;grid-template-columns:max-content auto;gap:.2rem 1rem}
dt{font-weight:600}
dd{margin:0}
";

struct Html<'a> {
    p: &'a ModelPassport,
    dag: &'a Dag,
    svg: bool,
    out: String,
}

fn digest(hex: &str) -> String {
    let e = escape(hex);
    if hex.len() > 12 {
        format!("<code class=\"digest\" title=\"{e}\">{}…</code>", &e[..12])
    } else {
        format!("<code class=\"digest\" title=\"{e}\">{e}</code>")
    }
}

fn object(o: &ObjectRef) -> String {
    format!(
        "sha256 {} md5 {} ({} bytes)",
        digest(o.sha256_hex()),
        digest(o.md5_hex()),
        o.size
    )
}

impl<'a> Html<'a> {
    fn new(p: &'a ModelPassport, dag: &'a Dag, svg: bool) -> Self {
        Self {
            p,
            dag,
            svg,
            out: String::with_capacity(16 * 1024),
        }
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.out.push_str(s.as_ref());
        self.out.push('\n');
    }

    fn dl(&mut self, rows: &[(&str, String)]) {
        self.line("<dl>");
        for (k, v) in rows {
            self.line(format!("<dt>{}</dt><dd>{v}</dd>", escape(k)));
        }
        self.line("</dl>");
    }

    fn table(&mut self, head: &[&str], rows: &[Vec<String>]) {
        self.line("<table>");
        let h: String = head
            .iter()
            .map(|h| format!("<th>{}</th>", escape(h)))
            .collect();
        self.line(format!("<thead><tr>{h}</tr></thead>"));
        self.line("<tbody>");
        for r in rows {
            let cells: String = r.iter().map(|c| format!("<td>{c}</td>")).collect();
            self.line(format!("<tr>{cells}</tr>"));
        }
        self.line("</tbody></table>");
    }

    fn render(mut self) -> String {
        let p = self.p;
        let title = if p.manual.model_name.trim().is_empty() {
            "AI Model Passport".to_string()
        } else {
            format!("AI Model Passport: {}", p.manual.model_name.trim())
        };
        self.line("<!DOCTYPE html>");
        self.line("<html lang=\"en\">");
        self.line("<head>");
        self.line("<meta charset=\"utf-8\">");
        self.line("<meta name=\"viewport\" content=\"width=device-width, initial-scale=1\">");
        self.line(format!("<title>{}</title>", escape(&title)));
        self.line(format!("<style>\n{CSS}</style>"));
        self.line("</head>");
        self.line("<body>");
        self.line(format!("<h1>{}</h1>", escape(&title)));
        self.identity();
        self.datasets();
        self.model();
        self.pipeline();
        self.stages();
        self.manual();
        self.line("</body>");
        self.line("</html>");
        self.out
    }

    fn identity(&mut self) {
        let p = self.p;
        self.line("<section id=\"identity\">");
        self.line("<h2>Identity</h2>");
        self.line(format!(
            "<p class=\"identity\"><code>{}</code></p>",
            escape(&p.identity)
        ));
        self.dl(&[
            ("Created", escape(&p.created_at)),
            ("Tool", escape(&p.tool_version)),
            ("Format version", escape(&p.format_version)),
            ("Workspace", escape(&p.lock.workspace_id)),
        ]);
        self.line("</section>");
    }

    fn datasets(&mut self) {
        let p = self.p;
        self.line("<section id=\"datasets\">");
        self.line("<h2>Datasets</h2>");
        if p.datasets.is_empty() {
            self.line("<p class=\"muted\">none recorded</p>");
        }
        for h in &p.datasets {
            let d = &h.descriptor;
            self.line(format!("<h3>{}</h3>", escape(&d.title)));
            let mut rows = vec![
                ("Identifier", format!("<code>{}</code>", escape(&d.id))),
                ("Version", escape(or_dash(&d.version))),
                (
                    "Publisher",
                    format!(
                        "{} <span class=\"muted\">({})</span>",
                        escape(&d.publisher.name),
                        escape(&d.publisher.kind)
                    ),
                ),
                ("License", escape(&d.license)),
            ];
            if !d.description.is_empty() {
                rows.push(("Description", escape(&d.description)));
            }
            if !d.keywords.is_empty() {
                rows.push(("Keywords", escape(&d.keywords.join(", "))));
            }
            for (k, vs) in &d.health_ext {
                let v: Vec<&str> = vs.iter().map(literal).collect();
                rows.push((k.as_str(), escape(&v.join(", "))));
            }
            rows.push((
                "Harvested from",
                format!("<code>{}</code>", escape(&h.source_url)),
            ));
            rows.push(("Retrieved", escape(&h.retrieved_at)));
            self.dl(&rows);
            if !d.distributions.is_empty() {
                let rows: Vec<Vec<String>> = d
                    .distributions
                    .iter()
                    .map(|x| {
                        vec![
                            format!("<code>{}</code>", escape(&x.access_url)),
                            escape(or_dash(&x.media_type)),
                            x.byte_size
                                .map(|b| b.to_string())
                                .unwrap_or_else(|| "-".into()),
                            x.checksum
                                .as_ref()
                                .map(|c| format!("{} {}", c.algorithm(), digest(c.hex())))
                                .unwrap_or_else(|| "-".into()),
                        ]
                    })
                    .collect();
                self.table(&["Access URL", "Media type", "Bytes", "Checksum"], &rows);
            }
        }
        self.line("</section>");
    }

    fn model(&mut self) {
        let p = self.p;
        let m = &p.manual;
        let t = &p.training;
        self.line("<section id=\"model\">");
        self.line("<h2>Model</h2>");
        self.dl(&[
            ("Name", escape(or_dash(&m.model_name))),
            ("Version", escape(or_dash(&m.model_version))),
            (
                "Learning task",
                escape(
                    &m.learning_task
                        .as_ref()
                        .map(|x| x.to_string())
                        .unwrap_or_else(|| "-".into()),
                ),
            ),
            (
                "Learning approach",
                escape(
                    &m.learning_approach
                        .as_ref()
                        .map(|x| x.to_string())
                        .unwrap_or_else(|| "-".into()),
                ),
            ),
            ("Algorithm", escape(or_dash(&m.algorithm_family))),
            ("Framework", escape(or_dash(&m.software_framework))),
            ("Trained by stage", escape(&t.stage)),
            (
                "Artifact",
                format!(
                    "<code>{}</code> {}",
                    escape(&t.model_path),
                    object(&t.model_artifact)
                ),
            ),
            (
                "Implementation",
                t.implementation_ref
                    .as_ref()
                    .map(object)
                    .unwrap_or_else(|| "-".into()),
            ),
        ]);
        self.line("<h3>Hyperparameters</h3>");
        if t.hyperparameters.is_empty() {
            self.line("<p class=\"muted\">none recorded</p>");
        } else {
            let rows: Vec<Vec<String>> = t
                .hyperparameters
                .iter()
                .map(|(k, v)| vec![format!("<code>{}</code>", escape(k)), escape(literal(v))])
                .collect();
            self.table(&["Parameter", "Value"], &rows);
        }
        self.line("<h3>Evaluation</h3>");
        if t.evaluations.is_empty() {
            self.line("<p class=\"muted\">none recorded</p>");
        } else {
            let rows: Vec<Vec<String>> = t
                .evaluations
                .iter()
                .map(|e| {
                    let (name, sha) = dataset_ref(p, &e.dataset_ref);
                    let data = match sha {
                        Some(s) => format!("<code>{}</code> {}", escape(&name), digest(&s)),
                        None => escape(&name),
                    };
                    vec![escape(&e.metric_name), escape(&e.value), data]
                })
                .collect();
            self.table(&["Metric", "Value", "Evaluated on"], &rows);
        }
        if !t.environment.is_empty() {
            self.line("<h3>Environment</h3>");
            let rows: Vec<Vec<String>> = t
                .environment
                .iter()
                .map(|e| vec![escape(&e.package_name), escape(&e.version)])
                .collect();
            self.table(&["Package", "Version"], &rows);
        }
        self.line("</section>");
    }

    fn pipeline(&mut self) {
        self.line("<section id=\"pipeline\">");
        self.line("<h2>Pipeline</h2>");
        if self.svg {
            let svg = render_dag_svg(self.dag);
            self.line(svg);
        } else {
            let order: Vec<String> = self.dag.order().iter().map(|s| escape(s)).collect();
            self.line(format!("<p>{}</p>", order.join(" → ")));
        }
        self.line("</section>");
    }

    fn artifacts(&mut self, label: &str, items: &std::collections::BTreeMap<String, ObjectRef>) {
        if items.is_empty() {
            return;
        }
        self.line(format!("<h4>{label}</h4>"));
        let rows: Vec<Vec<String>> = items
            .iter()
            .map(|(path, o)| {
                vec![
                    format!("<code>{}</code>", escape(path)),
                    digest(o.sha256_hex()),
                    digest(o.md5_hex()),
                    o.size.to_string(),
                ]
            })
            .collect();
        self.table(&["Path", "sha256", "md5", "Bytes"], &rows);
    }

    fn stages(&mut self) {
        let p = self.p;
        self.line("<section id=\"stages\">");
        self.line("<h2>Stage details</h2>");
        for name in self.dag.order() {
            let r = &p.lock.stages[name];
            self.line(format!(
                "<div class=\"stage\" id=\"stage-{}\">",
                escape(name)
            ));
            self.line(format!("<h3>{}</h3>", escape(name)));
            let mut rows = vec![
                ("Command", format!("<code>{}</code>", escape(&r.command))),
                ("Fingerprint", digest(&r.fingerprint)),
                ("Exit code", r.exit_code.to_string()),
                ("Started", escape(&r.started_at)),
                ("Ended", escape(&r.ended_at)),
                ("Duration", duration(r)),
            ];
            if let Some(t) = &r.tool {
                rows.push((
                    "Tool",
                    format!("{} {}", escape(&t.name), escape(&t.version)),
                ));
            }
            if !r.params.is_empty() {
                let ps: Vec<String> = r
                    .params
                    .iter()
                    .map(|(k, v)| format!("<code>{}</code> = {}", escape(k), escape(literal(v))))
                    .collect();
                rows.push(("Params", ps.join(", ")));
            }
            self.dl(&rows);
            self.artifacts("Inputs", &r.deps);
            self.artifacts("Outputs", &r.outs);
            self.line("</div>");
        }
        self.line("</section>");
    }

    fn manual(&mut self) {
        let m = &self.p.manual;
        self.line("<section id=\"manual\">");
        self.line("<h2>Manual metadata</h2>");
        self.dl(&[
            ("Intended purpose", escape(&m.intended_purpose)),
            ("Potential threats", escape(&m.potential_threats)),
            ("License", escape(&m.license)),
            ("Owner", escape(&m.owner)),
            ("Description", escape(or_dash(&m.description))),
        ]);
        self.line("</section>");
    }
}

fn md_escape(s: &str) -> String {
    s.replace('\\', "\\\\")
        .replace('|', "\\|")
        .replace('\n', " ")
}

fn md_table(out: &mut String, head: &[&str], rows: &[Vec<String>]) {
    let _ = writeln!(out, "| {} |", head.join(" | "));
    let _ = writeln!(out, "|{}", "---|".repeat(head.len()));
    for r in rows {
        let _ = writeln!(out, "| {} |", r.join(" | "));
    }
    out.push('\n');
}

fn markdown(p: &ModelPassport, dag: &Dag) -> String {
    let mut o = String::new();
    let m = &p.manual;
    let t = &p.training;
    let title = if m.model_name.trim().is_empty() {
        "AI Model Passport".to_string()
    } else {
        format!("AI Model Passport: {}", m.model_name.trim())
    };
    let _ = writeln!(o, "# {}\n", md_escape(&title));

    o.push_str("## Identity\n\n");
    let _ = writeln!(o, "`{}`\n", p.identity);
    let _ = writeln!(o, "- Created: {}", p.created_at);
    let _ = writeln!(o, "- Tool: {}", md_escape(&p.tool_version));
    let _ = writeln!(o, "- Format version: {}", p.format_version);
    let _ = writeln!(o, "- Workspace: {}\n", p.lock.workspace_id);

    o.push_str("## Datasets\n\n");
    if p.datasets.is_empty() {
        o.push_str("none recorded\n\n");
    }
    for h in &p.datasets {
        let d = &h.descriptor;
        let _ = writeln!(o, "### {}\n", md_escape(&d.title));
        let _ = writeln!(o, "- Identifier: <{}>", d.id);
        let _ = writeln!(o, "- Version: {}", md_escape(or_dash(&d.version)));
        let _ = writeln!(
            o,
            "- Publisher: {} ({})",
            md_escape(&d.publisher.name),
            d.publisher.kind
        );
        let _ = writeln!(o, "- License: {}", md_escape(&d.license));
        for (k, vs) in &d.health_ext {
            let v: Vec<&str> = vs.iter().map(literal).collect();
            let _ = writeln!(o, "- {k}: {}", md_escape(&v.join(", ")));
        }
        let _ = writeln!(o, "- Harvested from: <{}>", h.source_url);
        let _ = writeln!(o, "- Retrieved: {}\n", h.retrieved_at);
    }

    o.push_str("## Model\n\n");
    let opt = |x: Option<String>| x.unwrap_or_else(|| "-".into());
    let _ = writeln!(o, "- Name: {}", md_escape(or_dash(&m.model_name)));
    let _ = writeln!(o, "- Version: {}", md_escape(or_dash(&m.model_version)));
    let _ = writeln!(
        o,
        "- Learning task: {}",
        md_escape(&opt(m.learning_task.as_ref().map(|x| x.to_string())))
    );
    let _ = writeln!(
        o,
        "- Learning approach: {}",
        md_escape(&opt(m.learning_approach.as_ref().map(|x| x.to_string())))
    );
    let _ = writeln!(
        o,
        "- Algorithm: {}",
        md_escape(or_dash(&m.algorithm_family))
    );
    let _ = writeln!(
        o,
        "- Framework: {}",
        md_escape(or_dash(&m.software_framework))
    );
    let _ = writeln!(
        o,
        "- Artifact: `{}` sha256 `{}`\n",
        t.model_path,
        t.model_artifact.sha256_hex()
    );
    o.push_str("### Hyperparameters\n\n");
    if t.hyperparameters.is_empty() {
        o.push_str("none recorded\n\n");
    } else {
        let rows: Vec<Vec<String>> = t
            .hyperparameters
            .iter()
            .map(|(k, v)| vec![format!("`{k}`"), md_escape(literal(v))])
            .collect();
        md_table(&mut o, &["Parameter", "Value"], &rows);
    }
    o.push_str("### Evaluation\n\n");
    if t.evaluations.is_empty() {
        o.push_str("none recorded\n\n");
    } else {
        let rows: Vec<Vec<String>> = t
            .evaluations
            .iter()
            .map(|e| {
                let (name, _) = dataset_ref(p, &e.dataset_ref);
                vec![md_escape(&e.metric_name), e.value.clone(), md_escape(&name)]
            })
            .collect();
        md_table(&mut o, &["Metric", "Value", "Evaluated on"], &rows);
    }

    o.push_str("## Pipeline\n\n");
    let ranks = dag.ranks();
    for name in dag.order() {
        let preds = dag.predecessors(name);
        let after = if preds.is_empty() {
            String::new()
        } else {
            format!(" after {}", preds.join(", "))
        };
        let _ = writeln!(o, "- rank {}: {}{after}", ranks[name], md_escape(name));
    }
    o.push('\n');

    o.push_str("## Stage details\n\n");
    for name in dag.order() {
        let r = &p.lock.stages[name];
        let _ = writeln!(o, "### {}\n", md_escape(name));
        let _ = writeln!(o, "- Command: `{}`", r.command.replace('`', "'"));
        let _ = writeln!(o, "- Fingerprint: `{}`", r.fingerprint);
        let _ = writeln!(o, "- Exit code: {}", r.exit_code);
        let _ = writeln!(o, "- Duration: {}", duration(r));
        if let Some(tool) = &r.tool {
            let _ = writeln!(
                o,
                "- Tool: {} {}",
                md_escape(&tool.name),
                md_escape(&tool.version)
            );
        }
        for (k, v) in &r.params {
            let _ = writeln!(o, "- Param `{k}` = {}", md_escape(literal(v)));
        }
        o.push('\n');
        let rows: Vec<Vec<String>> = r
            .deps
            .iter()
            .map(|(path, x)| {
                vec![
                    "in".into(),
                    format!("`{path}`"),
                    format!("`{}`", x.sha256_hex()),
                ]
            })
            .chain(r.outs.iter().map(|(path, x)| {
                vec![
                    "out".into(),
                    format!("`{path}`"),
                    format!("`{}`", x.sha256_hex()),
                ]
            }))
            .collect();
        if !rows.is_empty() {
            md_table(&mut o, &["", "Path", "sha256"], &rows);
        }
    }

    o.push_str("## Manual metadata\n\n");
    let _ = writeln!(o, "- Intended purpose: {}", md_escape(&m.intended_purpose));
    let _ = writeln!(
        o,
        "- Potential threats: {}",
        md_escape(&m.potential_threats)
    );
    let _ = writeln!(o, "- License: {}", md_escape(&m.license));
    let _ = writeln!(o, "- Owner: {}", md_escape(&m.owner));
    let _ = writeln!(o, "- Description: {}", md_escape(or_dash(&m.description)));
    o
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn escapes_markup() {
        assert_eq!(
            escape("<a href=\"x\">&'"),
            "&lt;a href=&quot;x&quot;&gt;&amp;&#39;"
        );
    }

    #[test]
    fn digests_keep_full_value_in_title() {
        let h = "a".repeat(64);
        let d = digest(&h);
        assert!(d.contains(&format!("title=\"{h}\"")));
        assert!(d.contains(&format!(">{}…<", &h[..12])));
    }
}
