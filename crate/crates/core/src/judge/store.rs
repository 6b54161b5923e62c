//! Judgment state with an append-only JSON-lines journal and periodic
//! snapshots.
//!
//! Every accepted submission or second-round vote becomes one journal line
//! carrying a sequence number and the acknowledgement returned to the
//! client. On open the snapshot (if any) is loaded and later journal lines
//! are replayed. A final line cut short by a crash is dropped.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::aggregate::{self, first_round, resolve_second_round, Aggregation, AggregatedQrel, RoundOne};
use super::export::{export_qrels, ExclusionRule, ExportReport};
use super::kappa::{agreement_report, AgreementReport};
use super::JudgmentRecord;
use crate::corpus::{Document, Grade, Topic};
use crate::error::{Error, Result};
use crate::pool::PoolSet;

pub const JOURNAL_FILE: &str = "journal.jsonl";
pub const SNAPSHOT_FILE: &str = "snapshot.json";
const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct JudgeSettings {
    /// First-round votes each pair needs.
    pub assessors_per_pair: usize,
    pub second_round_votes: usize,
    /// Write a snapshot after this many journal events; 0 disables.
    pub snapshot_every: usize,
}

impl Default for JudgeSettings {
    fn default() -> Self {
        JudgeSettings {
            assessors_per_pair: aggregate::DEFAULT_ASSESSORS,
            second_round_votes: aggregate::DEFAULT_SECOND_ROUND_VOTES,
            snapshot_every: 100,
        }
    }
}

/// Pools plus the topic and document text shown to assessors.
#[derive(Debug, Clone)]
pub struct Collection {
    pools: PoolSet,
    topics: BTreeMap<u32, Topic>,
    documents: HashMap<String, Document>,
}

impl Collection {
    /// Every pooled topic and document must be present.
    pub fn new(pools: PoolSet, topics: Vec<Topic>, documents: Vec<Document>) -> Result<Self> {
        let topics: BTreeMap<u32, Topic> = topics.into_iter().map(|t| (t.topic_id, t)).collect();
        let pooled: HashSet<&str> = pools
            .pools
            .iter()
            .flat_map(|p| p.docnos.iter().map(String::as_str))
            .collect();
        let documents: HashMap<String, Document> = documents
            .into_iter()
            .filter(|d| pooled.contains(d.docno.as_str()))
            .map(|d| (d.docno.clone(), d))
            .collect();
        for p in &pools.pools {
            if !topics.contains_key(&p.topic_id) {
                return Err(Error::validation(None, format!("pool topic {} has no topic text", p.topic_id)));
            }
            if let Some(d) = p.docnos.iter().find(|d| !documents.contains_key(*d)) {
                return Err(Error::validation(
                    None,
                    format!("pooled document {d} of topic {} is not in the corpus", p.topic_id),
                ));
            }
        }
        Ok(Collection {
            pools,
            topics,
            documents,
        })
    }

    pub fn pools(&self) -> &PoolSet {
        &self.pools
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubmissionAck {
    pub seq: u64,
    pub assessor_id: String,
    pub topic_id: u32,
    pub records: usize,
    pub locked: bool,
    pub timestamp: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolutionAck {
    pub seq: u64,
    pub assessor_id: String,
    pub pair: String,
    pub grade: Grade,
    pub votes: usize,
    pub needed: usize,
    /// Set when this vote settled the pair.
    pub resolved: Option<AggregatedQrel>,
    pub timestamp: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Ack {
    Submission(SubmissionAck),
    Resolution(ResolutionAck),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub seq: u64,
    pub idempotency_key: Option<String>,
    /// `topic:<id>` or `pair:<topic:docno>`.
    pub target: String,
    pub records: Vec<JudgmentRecord>,
    pub ack: Ack,
}

/// Result of a write: `replayed` is true when an idempotency key matched an
/// earlier request and its acknowledgement was returned unchanged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome<T> {
    pub ack: T,
    pub replayed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct Snapshot {
    schema_version: u32,
    seq: u64,
    events: Vec<IdemEntry>,
    records: Vec<JudgmentRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct IdemEntry {
    assessor_id: String,
    key: String,
    target: String,
    ack: Ack,
}

#[derive(Debug, Default, Clone)]
struct PairVotes {
    round1: Vec<(String, Grade)>,
    round2: BTreeMap<String, Grade>,
}

#[derive(Debug, Default)]
struct State {
    seq: u64,
    records: Vec<JudgmentRecord>,
    locked: BTreeSet<(String, u32)>,
    topic_assessors: BTreeMap<u32, BTreeSet<String>>,
    pairs: BTreeMap<(u32, String), PairVotes>,
    idem: HashMap<(String, String), (String, Ack)>,
}

impl State {
    fn apply(&mut self, event: &Event) {
        self.seq = event.seq;
        for r in &event.records {
            let votes = self.pairs.entry((r.topic_id, r.docno.clone())).or_default();
            match r.round {
                1 => {
                    votes.round1.push((r.assessor_id.clone(), r.grade));
                    self.locked.insert((r.assessor_id.clone(), r.topic_id));
                    self.topic_assessors
                        .entry(r.topic_id)
                        .or_default()
                        .insert(r.assessor_id.clone());
                }
                _ => {
                    votes.round2.insert(r.assessor_id.clone(), r.grade);
                }
            }
            self.records.push(r.clone());
        }
        if let Some(key) = &event.idempotency_key {
            let who = match &event.ack {
                Ack::Submission(a) => a.assessor_id.clone(),
                Ack::Resolution(a) => a.assessor_id.clone(),
            };
            self.idem
                .insert((who, key.clone()), (event.target.clone(), event.ack.clone()));
        }
    }

    fn snapshot(&self) -> Snapshot {
        let mut events: Vec<IdemEntry> = self
            .idem
            .iter()
            .map(|((assessor_id, key), (target, ack))| IdemEntry {
                assessor_id: assessor_id.clone(),
                key: key.clone(),
                target: target.clone(),
                ack: ack.clone(),
            })
            .collect();
        events.sort_by(|a, b| (&a.assessor_id, &a.key).cmp(&(&b.assessor_id, &b.key)));
        Snapshot {
            schema_version: SNAPSHOT_VERSION,
            seq: self.seq,
            events,
            records: self.records.clone(),
        }
    }

    fn from_snapshot(s: Snapshot) -> State {
        let mut state = State::default();
        state.apply(&Event {
            seq: s.seq,
            idempotency_key: None,
            target: String::new(),
            records: s.records,
            ack: Ack::Submission(SubmissionAck {
                seq: s.seq,
                assessor_id: String::new(),
                topic_id: 0,
                records: 0,
                locked: true,
                timestamp: 0,
            }),
        });
        for e in s.events {
            state.idem.insert((e.assessor_id, e.key), (e.target, e.ack));
        }
        state
    }
}

#[derive(Debug)]
struct Persistence {
    dir: PathBuf,
    journal: File,
    since_snapshot: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TopicSummary {
    pub topic_id: u32,
    pub title: String,
    pub pool_size: usize,
    /// This assessor has submitted the topic.
    pub completed: bool,
    /// Assessors who have submitted the topic.
    pub assessments: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PoolDocument {
    pub docno: String,
    pub title: String,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PoolView {
    pub topic: Topic,
    pub completed: bool,
    pub documents: Vec<PoolDocument>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TieView {
    pub pair: String,
    pub topic_id: u32,
    pub docno: String,
    pub topic_title: String,
    pub document_title: String,
    pub options: [Grade; 2],
    pub round1: aggregate::Histogram,
    pub votes: usize,
    pub needed: usize,
    /// This assessor already voted on the pair.
    pub voted: bool,
}

#[derive(Debug)]
pub struct JudgeStore {
    collection: Collection,
    settings: JudgeSettings,
    state: State,
    persistence: Option<Persistence>,
}

impl JudgeStore {
    /// A store that keeps everything in memory.
    pub fn in_memory(collection: Collection, settings: JudgeSettings) -> Result<Self> {
        Self::check_settings(&settings)?;
        Ok(JudgeStore {
            collection,
            settings,
            state: State::default(),
            persistence: None,
        })
    }

    /// Opens (or creates) a store persisted in `dir`.
    pub fn open(dir: &Path, collection: Collection, settings: JudgeSettings) -> Result<Self> {
        Self::check_settings(&settings)?;
        fs::create_dir_all(dir).map_err(|e| Error::file(dir, e))?;
        let snap_path = dir.join(SNAPSHOT_FILE);
        let mut state = if snap_path.exists() {
            let bytes = fs::read(&snap_path).map_err(|e| Error::file(&snap_path, e))?;
            let snap: Snapshot = serde_json::from_slice(&bytes)?;
            if snap.schema_version != SNAPSHOT_VERSION {
                return Err(Error::invalid(format!(
                    "{}: unsupported snapshot version {}",
                    snap_path.display(),
                    snap.schema_version
                )));
            }
            State::from_snapshot(snap)
        } else {
            State::default()
        };
        let journal_path = dir.join(JOURNAL_FILE);
        for event in read_journal(&journal_path)? {
            if event.seq <= state.seq {
                continue;
            }
            if event.seq != state.seq + 1 {
                return Err(Error::invalid(format!(
                    "{}: journal jumps from event {} to {}",
                    journal_path.display(),
                    state.seq,
                    event.seq
                )));
            }
            state.apply(&event);
        }
        let journal = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&journal_path)
            .map_err(|e| Error::file(&journal_path, e))?;
        Ok(JudgeStore {
            collection,
            settings,
            state,
            persistence: Some(Persistence {
                dir: dir.to_path_buf(),
                journal,
                since_snapshot: 0,
            }),
        })
    }

    fn check_settings(s: &JudgeSettings) -> Result<()> {
        if s.assessors_per_pair == 0 || s.second_round_votes == 0 {
            return Err(Error::invalid("assessors_per_pair and second_round_votes must be at least 1"));
        }
        Ok(())
    }

    pub fn settings(&self) -> &JudgeSettings {
        &self.settings
    }

    pub fn collection(&self) -> &Collection {
        &self.collection
    }

    pub fn records(&self) -> &[JudgmentRecord] {
        &self.state.records
    }

    pub fn last_seq(&self) -> u64 {
        self.state.seq
    }

    pub fn is_locked(&self, assessor: &str, topic_id: u32) -> bool {
        self.state.locked.contains(&(assessor.to_string(), topic_id))
    }

    fn replay_of(&self, assessor: &str, key: Option<&str>, target: &str) -> Result<Option<Ack>> {
        let Some(key) = key else { return Ok(None) };
        match self.state.idem.get(&(assessor.to_string(), key.to_string())) {
            Some((t, ack)) if t == target => Ok(Some(ack.clone())),
            Some((t, _)) => Err(Error::Conflict(format!(
                "idempotency key {key:?} was already used for {t}"
            ))),
            None => Ok(None),
        }
    }

    fn commit(&mut self, event: Event) -> Result<()> {
        if let Some(p) = &mut self.persistence {
            let mut line = serde_json::to_vec(&event)?;
            line.push(b'\n');
            p.journal.write_all(&line)?;
            p.journal.sync_data()?;
            p.since_snapshot += 1;
        }
        self.state.apply(&event);
        let due = match &self.persistence {
            Some(p) => self.settings.snapshot_every > 0 && p.since_snapshot >= self.settings.snapshot_every,
            None => false,
        };
        if due {
            self.snapshot()?;
        }
        Ok(())
    }

    /// Writes a snapshot now (temporary file, then rename).
    pub fn snapshot(&mut self) -> Result<()> {
        let Some(p) = &mut self.persistence else {
            return Ok(());
        };
        let path = p.dir.join(SNAPSHOT_FILE);
        let tmp = p.dir.join(format!("{SNAPSHOT_FILE}.tmp"));
        let bytes = serde_json::to_vec(&self.state.snapshot())?;
        {
            let mut f = File::create(&tmp).map_err(|e| Error::file(&tmp, e))?;
            f.write_all(&bytes)?;
            f.sync_all()?;
        }
        fs::rename(&tmp, &path).map_err(|e| Error::file(&path, e))?;
        p.since_snapshot = 0;
        Ok(())
    }

    /// Records one assessor's grades for every pooled document of a topic
    /// and locks the topic for that assessor.
    pub fn submit_judgments(
        &mut self,
        assessor: &str,
        topic_id: u32,
        grades: &[(String, Grade)],
        idempotency_key: Option<&str>,
        timestamp: u64,
    ) -> Result<Outcome<SubmissionAck>> {
        let target = format!("topic:{topic_id}");
        if let Some(ack) = self.replay_of(assessor, idempotency_key, &target)? {
            let Ack::Submission(ack) = ack else {
                return Err(Error::Conflict("idempotency key belongs to another request".into()));
            };
            return Ok(Outcome { ack, replayed: true });
        }
        let pool = self
            .collection
            .pools
            .pool(topic_id)
            .ok_or_else(|| Error::NotFound(format!("topic {topic_id} has no pool")))?;
        if self.is_locked(assessor, topic_id) {
            return Err(Error::Conflict(format!(
                "topic {topic_id} was already submitted by {assessor}"
            )));
        }
        let done = self.state.topic_assessors.get(&topic_id).map_or(0, |s| s.len());
        if done >= self.settings.assessors_per_pair {
            return Err(Error::Conflict(format!(
                "topic {topic_id} already has {done} assessments"
            )));
        }
        let in_pool: HashSet<&str> = pool.docnos.iter().map(String::as_str).collect();
        let mut given: HashMap<&str, Grade> = HashMap::new();
        for (d, g) in grades {
            if !in_pool.contains(d.as_str()) {
                return Err(Error::validation(None, format!("{d} is not in the pool of topic {topic_id}")));
            }
            if given.insert(d.as_str(), *g).is_some() {
                return Err(Error::validation(None, format!("{d} is graded twice")));
            }
        }
        let missing: Vec<String> = pool
            .docnos
            .iter()
            .filter(|d| !given.contains_key(d.as_str()))
            .cloned()
            .collect();
        if !missing.is_empty() {
            return Err(Error::Incomplete { missing });
        }
        let records: Vec<JudgmentRecord> = pool
            .docnos
            .iter()
            .map(|d| JudgmentRecord {
                assessor_id: assessor.to_string(),
                topic_id,
                docno: d.clone(),
                grade: given[d.as_str()],
                round: 1,
                timestamp,
            })
            .collect();
        let ack = SubmissionAck {
            seq: self.state.seq + 1,
            assessor_id: assessor.to_string(),
            topic_id,
            records: records.len(),
            locked: true,
            timestamp,
        };
        self.commit(Event {
            seq: ack.seq,
            idempotency_key: idempotency_key.map(str::to_string),
            target,
            records,
            ack: Ack::Submission(ack.clone()),
        })?;
        Ok(Outcome { ack, replayed: false })
    }

    /// Records a second-round vote on a tied pair.
    pub fn submit_resolution(
        &mut self,
        assessor: &str,
        pair: &str,
        grade: Grade,
        idempotency_key: Option<&str>,
        timestamp: u64,
    ) -> Result<Outcome<ResolutionAck>> {
        let (topic_id, docno) = aggregate::parse_pair_id(pair)?;
        let target = format!("pair:{}", aggregate::pair_id(topic_id, &docno));
        if let Some(ack) = self.replay_of(assessor, idempotency_key, &target)? {
            let Ack::Resolution(ack) = ack else {
                return Err(Error::Conflict("idempotency key belongs to another request".into()));
            };
            return Ok(Outcome { ack, replayed: true });
        }
        let m = self.settings.assessors_per_pair;
        let needed = self.settings.second_round_votes;
        let votes = self
            .state
            .pairs
            .get(&(topic_id, docno.clone()))
            .ok_or_else(|| Error::NotFound(format!("pair {pair} has no judgments")))?;
        if votes.round1.len() != m {
            return Err(Error::Conflict(format!(
                "pair {pair} has {} of {m} first-round votes",
                votes.round1.len()
            )));
        }
        let r1: Vec<Grade> = votes.round1.iter().map(|(_, g)| *g).collect();
        let options = match first_round(&r1, m)? {
            RoundOne::Majority(g) => {
                return Err(Error::Conflict(format!("pair {pair} is not tied (majority grade {g})")));
            }
            RoundOne::Tie(options) => options,
        };
        if votes.round2.len() >= needed {
            return Err(Error::Conflict(format!("pair {pair} is already resolved")));
        }
        if votes.round2.contains_key(assessor) {
            return Err(Error::Conflict(format!("{assessor} already voted on pair {pair}")));
        }
        if !options.contains(&grade) {
            return Err(Error::invalid(format!(
                "grade {grade} is not one of the options {} and {} for pair {pair}",
                options[0], options[1]
            )));
        }
        let mut round2: Vec<Grade> = votes.round2.values().copied().collect();
        round2.push(grade);
        let resolved = if round2.len() == needed {
            let (g, status) = resolve_second_round(&r1, options, &round2)?;
            Some(AggregatedQrel {
                topic_id,
                docno: docno.clone(),
                grade: g,
                status,
                round1: aggregate::histogram(&r1),
                round2: aggregate::histogram(&round2),
            })
        } else {
            None
        };
        let ack = ResolutionAck {
            seq: self.state.seq + 1,
            assessor_id: assessor.to_string(),
            pair: aggregate::pair_id(topic_id, &docno),
            grade,
            votes: round2.len(),
            needed,
            resolved,
            timestamp,
        };
        self.commit(Event {
            seq: ack.seq,
            idempotency_key: idempotency_key.map(str::to_string),
            target,
            records: vec![JudgmentRecord {
                assessor_id: assessor.to_string(),
                topic_id,
                docno,
                grade,
                round: 2,
                timestamp,
            }],
            ack: Ack::Resolution(ack.clone()),
        })?;
        Ok(Outcome { ack, replayed: false })
    }

    pub fn topics_for(&self, assessor: &str) -> Vec<TopicSummary> {
        self.collection
            .pools
            .pools
            .iter()
            .map(|p| TopicSummary {
                topic_id: p.topic_id,
                title: self.collection.topics[&p.topic_id].title.clone(),
                pool_size: p.len(),
                completed: self.is_locked(assessor, p.topic_id),
                assessments: self.state.topic_assessors.get(&p.topic_id).map_or(0, |s| s.len()),
            })
            .collect()
    }

    pub fn pool_view(&self, assessor: &str, topic_id: u32) -> Result<PoolView> {
        let pool = self
            .collection
            .pools
            .pool(topic_id)
            .ok_or_else(|| Error::NotFound(format!("topic {topic_id} has no pool")))?;
        Ok(PoolView {
            topic: self.collection.topics[&topic_id].clone(),
            completed: self.is_locked(assessor, topic_id),
            documents: pool
                .docnos
                .iter()
                .map(|d| {
                    let doc = &self.collection.documents[d];
                    PoolDocument {
                        docno: d.clone(),
                        title: doc.title.clone(),
                        content: doc.content.clone(),
                    }
                })
                .collect(),
        })
    }

    pub fn aggregation(&self) -> Result<Aggregation> {
        aggregate::aggregate(
            &self.state.records,
            self.settings.assessors_per_pair,
            self.settings.second_round_votes,
        )
    }

    pub fn ties_for(&self, assessor: &str) -> Result<Vec<TieView>> {
        Ok(self
            .aggregation()?
            .ties
            .into_iter()
            .map(|t| TieView {
                topic_title: self
                    .collection
                    .topics
                    .get(&t.topic_id)
                    .map(|x| x.title.clone())
                    .unwrap_or_default(),
                document_title: self
                    .collection
                    .documents
                    .get(&t.docno)
                    .map(|d| d.title.clone())
                    .unwrap_or_default(),
                voted: t.round2.contains_key(assessor),
                votes: t.round2.len(),
                needed: self.settings.second_round_votes,
                pair: t.pair,
                topic_id: t.topic_id,
                docno: t.docno,
                options: t.options,
                round1: t.round1,
            })
            .collect())
    }

    pub fn agreement(&self) -> AgreementReport {
        agreement_report(&self.state.records)
    }

    /// Exports final qrels. Open ties are an error unless `break_ties` is
    /// set, which settles them by the higher option; incomplete pairs are
    /// always an error.
    pub fn export(&self, rule: ExclusionRule, break_ties: bool) -> Result<ExportReport> {
        let agg = self.aggregation()?;
        if !agg.incomplete.is_empty() {
            return Err(Error::Conflict(format!(
                "{} pairs do not yet have {} first-round votes",
                agg.incomplete.len(),
                self.settings.assessors_per_pair
            )));
        }
        if !agg.ties.is_empty() && !break_ties {
            return Err(Error::Conflict(format!(
                "{} tied pairs are waiting for second-round votes",
                agg.ties.len()
            )));
        }
        export_qrels(&aggregate::break_open_ties(&agg), rule)
    }
}

/// Reads journal events. A last line without its newline that does not
/// parse is treated as an interrupted write and ignored.
pub fn read_journal(path: &Path) -> Result<Vec<Event>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let file = File::open(path).map_err(|e| Error::file(path, e))?;
    let mut events = Vec::new();
    let mut reader = BufReader::new(file);
    let mut line = String::new();
    let mut line_no = 0;
    loop {
        line.clear();
        let n = reader.read_line(&mut line).map_err(|e| Error::file(path, e))?;
        if n == 0 {
            break;
        }
        line_no += 1;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<Event>(line.trim_end()) {
            Ok(e) => events.push(e),
            Err(_) if !line.ends_with('\n') => break,
            Err(e) => {
                return Err(Error::parse(
                    line_no,
                    Some(path.display().to_string()),
                    e.to_string(),
                ))
            }
        }
    }
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pool::{balanced_interleave, Source, SCHEMA_VERSION};

    fn collection() -> Collection {
        let pools = PoolSet {
            schema_version: SCHEMA_VERSION,
            depth: 3,
            model_a: "bm25".into(),
            model_b: "dirichlet_lm".into(),
            first_pick: Source::A,
            pools: vec![balanced_interleave(7, &["d1", "d2"], &["d3"], 3)],
        };
        let topics = vec![Topic {
            topic_id: 7,
            title: "eskola foun".into(),
            description: String::new(),
            narrative: String::new(),
        }];
        let docs = ["d1", "d2", "d3", "d4"]
            .iter()
            .map(|d| Document::new(*d, format!("title {d}"), "content"))
            .collect();
        Collection::new(pools, topics, docs).unwrap()
    }

    fn grades(v: [u8; 3]) -> Vec<(String, Grade)> {
        ["d1", "d2", "d3"]
            .iter()
            .zip(v)
            .map(|(d, g)| (d.to_string(), Grade::new(g).unwrap()))
            .collect()
    }

    #[test]
    fn submit_locks_topic() {
        let mut s = JudgeStore::in_memory(collection(), JudgeSettings::default()).unwrap();
        let out = s.submit_judgments("a1", 7, &grades([3, 0, 1]), None, 5).unwrap();
        assert_eq!(out.ack.records, 3);
        assert!(s.is_locked("a1", 7));
        assert!(matches!(
            s.submit_judgments("a1", 7, &grades([3, 0, 1]), None, 6),
            Err(Error::Conflict(_))
        ));
        assert!(s.topics_for("a1")[0].completed);
        assert!(!s.topics_for("a2")[0].completed);
    }

    #[test]
    fn incomplete_and_foreign_docnos() {
        let mut s = JudgeStore::in_memory(collection(), JudgeSettings::default()).unwrap();
        let mut g = grades([1, 1, 1]);
        g.pop();
        match s.submit_judgments("a1", 7, &g, None, 0) {
            Err(Error::Incomplete { missing }) => assert_eq!(missing, ["d3"]),
            other => panic!("{other:?}"),
        }
        g.push(("d4".into(), Grade::RELEVANT));
        assert!(matches!(s.submit_judgments("a1", 7, &g, None, 0), Err(Error::Validation { .. })));
        assert!(matches!(s.submit_judgments("a1", 8, &g, None, 0), Err(Error::NotFound(_))));
        assert!(!s.is_locked("a1", 7));
    }

    #[test]
    fn idempotent_resubmission() {
        let mut s = JudgeStore::in_memory(collection(), JudgeSettings::default()).unwrap();
        let first = s.submit_judgments("a1", 7, &grades([1, 2, 3]), Some("k1"), 1).unwrap();
        let again = s.submit_judgments("a1", 7, &grades([0, 0, 0]), Some("k1"), 2).unwrap();
        assert!(again.replayed);
        assert_eq!(again.ack, first.ack);
        assert_eq!(s.records().len(), 3);
    }

    #[test]
    fn tie_resolution_flow() {
        let mut s = JudgeStore::in_memory(collection(), JudgeSettings::default()).unwrap();
        for (i, g) in [[3, 0, 2], [3, 0, 2], [1, 0, 2], [1, 0, 2], [0, 0, 2]].iter().enumerate() {
            s.submit_judgments(&format!("a{i}"), 7, &grades(*g), None, i as u64).unwrap();
        }
        assert!(matches!(
            s.submit_judgments("a5", 7, &grades([0, 0, 0]), None, 9),
            Err(Error::Conflict(_))
        ));
        let ties = s.ties_for("a0").unwrap();
        assert_eq!(ties.len(), 1);
        assert_eq!(ties[0].pair, "7:d1");
        assert_eq!(ties[0].options, [Grade::HIGHLY_RELEVANT, Grade::MARGINAL]);
        assert!(s.export(ExclusionRule::default(), false).is_err());

        assert!(s.submit_resolution("a0", "7:d1", Grade::RELEVANT, None, 10).is_err());
        assert!(s.submit_resolution("a0", "7:d2", Grade::IRRELEVANT, None, 10).is_err());
        s.submit_resolution("a0", "7:d1", Grade::HIGHLY_RELEVANT, None, 10).unwrap();
        assert!(s.submit_resolution("a0", "7:d1", Grade::HIGHLY_RELEVANT, None, 11).is_err());
        s.submit_resolution("a1", "7:d1", Grade::HIGHLY_RELEVANT, None, 12).unwrap();
        let last = s.submit_resolution("a2", "7:d1", Grade::MARGINAL, None, 13).unwrap();
        let resolved = last.ack.resolved.unwrap();
        assert_eq!(resolved.grade, Grade::HIGHLY_RELEVANT);
        assert!(s.submit_resolution("a3", "7:d1", Grade::MARGINAL, None, 14).is_err());
        assert!(s.ties_for("a0").unwrap().is_empty());

        let rule = ExclusionRule {
            min_relevant: 1,
            max_relevant: 100,
        };
        let report = s.export(rule, false).unwrap();
        assert_eq!(report.qrels.len(), 3);
    }

    #[test]
    fn journal_replay_reconstructs_state() {
        let dir = tempfile::tempdir().unwrap();
        let settings = JudgeSettings {
            snapshot_every: 2,
            ..JudgeSettings::default()
        };
        let before;
        {
            let mut s = JudgeStore::open(dir.path(), collection(), settings).unwrap();
            for (i, g) in [[3, 0, 2], [3, 1, 2], [1, 0, 2], [1, 0, 3], [0, 0, 2]].iter().enumerate() {
                s.submit_judgments(&format!("a{i}"), 7, &grades(*g), Some("key"), i as u64).unwrap();
            }
            s.submit_resolution("a0", "7:d1", Grade::MARGINAL, None, 9).unwrap();
            before = s.aggregation().unwrap();
        }
        assert!(dir.path().join(SNAPSHOT_FILE).exists());
        let reopened = JudgeStore::open(dir.path(), collection(), settings).unwrap();
        assert_eq!(reopened.aggregation().unwrap(), before);
        assert_eq!(reopened.last_seq(), 6);

        fs::remove_file(dir.path().join(SNAPSHOT_FILE)).unwrap();
        let mut replayed = JudgeStore::open(dir.path(), collection(), settings).unwrap();
        assert_eq!(replayed.aggregation().unwrap(), before);
        let again = replayed.submit_judgments("a0", 7, &grades([0, 0, 0]), Some("key"), 99).unwrap();
        assert!(again.replayed);
    }

    #[test]
    fn torn_last_line_is_ignored() {
        let dir = tempfile::tempdir().unwrap();
        {
            let mut s = JudgeStore::open(dir.path(), collection(), JudgeSettings::default()).unwrap();
            s.submit_judgments("a0", 7, &grades([1, 1, 1]), None, 0).unwrap();
        }
        let path = dir.path().join(JOURNAL_FILE);
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        f.write_all(b"{\"seq\":2,\"idem").unwrap();
        let s = JudgeStore::open(dir.path(), collection(), JudgeSettings::default()).unwrap();
        assert_eq!(s.records().len(), 3);
    }
}
