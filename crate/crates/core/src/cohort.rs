//! Paired-data model: per-subject records grouped into complete pairs,
//! CSV/TSV ingestion, and tabulation into the summary statistics the
//! estimators consume.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CohortError {
    #[error("row {row}: {msg}")]
    Value { row: usize, msg: String },
    #[error("pair {pair_id}: {msg}")]
    Structure { pair_id: String, msg: String },
    #[error("exposure-concordant pairs present: {0:?}")]
    ConcordantPairs(Vec<String>),
    #[error("cohort is empty")]
    Empty,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// One subject in a pair. Covariate values are stored in the order given
/// by the owning cohort's `covariate_names`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectRecord {
    pub pair_id: String,
    /// Member index within the pair, 1 or 2.
    pub member: u8,
    pub exposure: bool,
    pub outcome: bool,
    pub covariates: Vec<f64>,
}

impl SubjectRecord {
    pub fn exposure_f64(&self) -> f64 {
        if self.exposure {
            1.0
        } else {
            0.0
        }
    }

    pub fn outcome_f64(&self) -> f64 {
        if self.outcome {
            1.0
        } else {
            0.0
        }
    }
}

/// A complete pair. For exposure-discordant pairs the exposed member is
/// stored first so that tabulations are invariant to input order.
#[derive(Debug, Clone, PartialEq)]
pub struct Pair {
    pub members: [SubjectRecord; 2],
}

impl Pair {
    pub fn id(&self) -> &str {
        &self.members[0].pair_id
    }

    pub fn is_exposure_discordant(&self) -> bool {
        self.members[0].exposure != self.members[1].exposure
    }

    /// Pair-mean exposure: 0, 0.5 or 1.
    pub fn mean_exposure(&self) -> f64 {
        (self.members[0].exposure_f64() + self.members[1].exposure_f64()) / 2.0
    }

    /// (exposed member, unexposed member); only for discordant pairs.
    pub fn by_exposure(&self) -> (&SubjectRecord, &SubjectRecord) {
        debug_assert!(self.is_exposure_discordant());
        if self.members[0].exposure {
            (&self.members[0], &self.members[1])
        } else {
            (&self.members[1], &self.members[0])
        }
    }

    fn normalize(&mut self) {
        let swap = if self.is_exposure_discordant() {
            !self.members[0].exposure
        } else {
            self.members[0].member > self.members[1].member
        };
        if swap {
            self.members.swap(0, 1);
        }
    }
}

/// A validated cohort of complete pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedCohort {
    pairs: Vec<Pair>,
    covariate_names: Vec<String>,
    source: String,
}

impl PairedCohort {
    /// Build a cohort from complete pairs, validating the pairing
    /// invariants and normalizing member order.
    pub fn new(
        mut pairs: Vec<Pair>,
        covariate_names: Vec<String>,
        source: impl Into<String>,
    ) -> Result<Self, CohortError> {
        if pairs.is_empty() {
            return Err(CohortError::Empty);
        }
        let mut seen = std::collections::BTreeSet::new();
        for pair in &pairs {
            let id = pair.id().to_string();
            if pair.members[0].pair_id != pair.members[1].pair_id {
                return Err(CohortError::Structure {
                    pair_id: id,
                    msg: format!("members carry different pair ids ({})", pair.members[1].pair_id),
                });
            }
            if !seen.insert(id.clone()) {
                return Err(CohortError::Structure {
                    pair_id: id,
                    msg: "pair id appears in more than one pair".into(),
                });
            }
            for m in &pair.members {
                if m.covariates.len() != covariate_names.len() {
                    return Err(CohortError::Structure {
                        pair_id: id.clone(),
                        msg: format!(
                            "expected {} covariate values, found {}",
                            covariate_names.len(),
                            m.covariates.len()
                        ),
                    });
                }
            }
        }
        for pair in &mut pairs {
            pair.normalize();
        }
        Ok(Self { pairs, covariate_names, source: source.into() })
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn n_pairs(&self) -> usize {
        self.pairs.len()
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.covariate_names
    }

    pub fn covariate_index(&self, name: &str) -> Option<usize> {
        self.covariate_names.iter().position(|n| n == name)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Iterate over all subjects, pair by pair.
    pub fn subjects(&self) -> impl Iterator<Item = &SubjectRecord> {
        self.pairs.iter().flat_map(|p| p.members.iter())
    }

    /// Keep only exposure-discordant pairs. Returns the filtered cohort
    /// (empty input list maps to `None`) and the number of removed pairs.
    pub fn filter_discordant(&self) -> (Option<PairedCohort>, usize) {
        let kept: Vec<Pair> =
            self.pairs.iter().filter(|p| p.is_exposure_discordant()).cloned().collect();
        let removed = self.n_pairs() - kept.len();
        if kept.is_empty() {
            (None, removed)
        } else {
            let cohort = PairedCohort {
                pairs: kept,
                covariate_names: self.covariate_names.clone(),
                source: self.source.clone(),
            };
            (Some(cohort), removed)
        }
    }
}

// ---------------------------------------------------------------------------
// ingestion
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowFormat {
    /// One row per subject (canonical).
    Long,
    /// One row per pair with `exposure1,outcome1,exposure2,outcome2` columns.
    Wide,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delimiter {
    Auto,
    Comma,
    Tab,
}

/// Column mapping for delimiter-separated input.
#[derive(Debug, Clone)]
pub struct IngestSchema {
    pub format: RowFormat,
    pub delimiter: Delimiter,
    pub pair_id: String,
    pub member: String,
    pub exposure: String,
    pub outcome: String,
}

impl Default for IngestSchema {
    fn default() -> Self {
        Self {
            format: RowFormat::Long,
            delimiter: Delimiter::Auto,
            pair_id: "pair_id".into(),
            member: "member".into(),
            exposure: "exposure".into(),
            outcome: "outcome".into(),
        }
    }
}

fn parse_binary(field: &str, row: usize, column: &str) -> Result<bool, CohortError> {
    match field.trim() {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(CohortError::Value {
            row,
            msg: format!("column {column} must be 0 or 1, got {other:?}"),
        }),
    }
}

fn parse_real(field: &str, row: usize, column: &str) -> Result<f64, CohortError> {
    field.trim().parse::<f64>().map_err(|_| CohortError::Value {
        row,
        msg: format!("column {column} must be a real number, got {field:?}"),
    })
}

/// Ingest a delimiter-separated stream with a header row into a validated
/// cohort. Unmapped columns are preserved as named real covariates.
pub fn ingest_pairs<R: Read>(source: R, schema: &IngestSchema) -> Result<PairedCohort, CohortError> {
    let mut text = String::new();
    let mut source = source;
    source.read_to_string(&mut text)?;
    let delim = match schema.delimiter {
        Delimiter::Comma => b',',
        Delimiter::Tab => b'\t',
        Delimiter::Auto => {
            let header = text.lines().next().unwrap_or("");
            if header.matches('\t').count() > header.matches(',').count() {
                b'\t'
            } else {
                b','
            }
        }
    };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delim)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers: Vec<String> =
        reader.headers().map_err(|e| CohortError::Parse(e.to_string()))?.iter()
            .map(str::to_string)
            .collect();

    match schema.format {
        RowFormat::Long => ingest_long(&mut reader, &headers, schema),
        RowFormat::Wide => ingest_wide(&mut reader, &headers, schema),
    }
}

fn column(headers: &[String], name: &str) -> Result<usize, CohortError> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| CohortError::Parse(format!("missing required column {name:?}")))
}

fn ingest_long<R: Read>(
    reader: &mut csv::Reader<R>,
    headers: &[String],
    schema: &IngestSchema,
) -> Result<PairedCohort, CohortError> {
    let id_col = column(headers, &schema.pair_id)?;
    let exp_col = column(headers, &schema.exposure)?;
    let out_col = column(headers, &schema.outcome)?;
    let member_col = headers.iter().position(|h| *h == schema.member);
    let reserved = [Some(id_col), Some(exp_col), Some(out_col), member_col];
    let cov_cols: Vec<usize> =
        (0..headers.len()).filter(|i| !reserved.contains(&Some(*i))).collect();
    let covariate_names: Vec<String> = cov_cols.iter().map(|&i| headers[i].clone()).collect();

    // Group rows by pair id, preserving first-appearance order.
    let mut order: Vec<String> = Vec::new();
    let mut groups: BTreeMap<String, Vec<SubjectRecord>> = BTreeMap::new();
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 2; // header is row 1
        let record = record.map_err(|e| CohortError::Parse(e.to_string()))?;
        let pair_id = record.get(id_col).unwrap_or("").trim().to_string();
        if pair_id.is_empty() {
            return Err(CohortError::Value { row, msg: "empty pair_id".into() });
        }
        let exposure = parse_binary(record.get(exp_col).unwrap_or(""), row, &schema.exposure)?;
        let outcome = parse_binary(record.get(out_col).unwrap_or(""), row, &schema.outcome)?;
        let covariates = cov_cols
            .iter()
            .map(|&c| parse_real(record.get(c).unwrap_or(""), row, &headers[c]))
            .collect::<Result<Vec<f64>, _>>()?;
        let entry = groups.entry(pair_id.clone()).or_insert_with(|| {
            order.push(pair_id.clone());
            Vec::new()
        });
        let member = match member_col {
            Some(c) => {
                let raw = record.get(c).unwrap_or("").trim();
                raw.parse::<u8>().ok().filter(|m| *m == 1 || *m == 2).ok_or_else(|| {
                    CohortError::Value {
                        row,
                        msg: format!("column {} must be 1 or 2, got {raw:?}", schema.member),
                    }
                })?
            }
            None => (entry.len() + 1) as u8,
        };
        if entry.iter().any(|m| m.member == member) {
            return Err(CohortError::Structure {
                pair_id,
                msg: format!("duplicate member {member}"),
            });
        }
        entry.push(SubjectRecord { pair_id, member, exposure, outcome, covariates });
    }

    let mut pairs = Vec::with_capacity(order.len());
    for id in order {
        let mut members = groups.remove(&id).unwrap();
        match members.len() {
            2 => {
                members.sort_by_key(|m| m.member);
                let b = members.pop().unwrap();
                let a = members.pop().unwrap();
                pairs.push(Pair { members: [a, b] });
            }
            n => {
                return Err(CohortError::Structure {
                    pair_id: id,
                    msg: format!("expected 2 members, found {n}"),
                })
            }
        }
    }
    PairedCohort::new(pairs, covariate_names, "ingest")
}

fn ingest_wide<R: Read>(
    reader: &mut csv::Reader<R>,
    headers: &[String],
    schema: &IngestSchema,
) -> Result<PairedCohort, CohortError> {
    let id_col = column(headers, &schema.pair_id)?;
    let exp_cols =
        [column(headers, &format!("{}1", schema.exposure))?, column(headers, &format!("{}2", schema.exposure))?];
    let out_cols =
        [column(headers, &format!("{}1", schema.outcome))?, column(headers, &format!("{}2", schema.outcome))?];
    let reserved: Vec<usize> =
        [id_col, exp_cols[0], exp_cols[1], out_cols[0], out_cols[1]].into();
    let cov_cols: Vec<usize> =
        (0..headers.len()).filter(|i| !reserved.contains(i)).collect();
    let covariate_names: Vec<String> = cov_cols.iter().map(|&i| headers[i].clone()).collect();

    let mut pairs = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 2;
        let record = record.map_err(|e| CohortError::Parse(e.to_string()))?;
        let pair_id = record.get(id_col).unwrap_or("").trim().to_string();
        if pair_id.is_empty() {
            return Err(CohortError::Value { row, msg: "empty pair_id".into() });
        }
        // pair-level covariates are shared by both members
        let covariates = cov_cols
            .iter()
            .map(|&c| parse_real(record.get(c).unwrap_or(""), row, &headers[c]))
            .collect::<Result<Vec<f64>, _>>()?;
        let mut members = Vec::with_capacity(2);
        for j in 0..2 {
            let exposure = parse_binary(
                record.get(exp_cols[j]).unwrap_or(""),
                row,
                &headers[exp_cols[j]],
            )?;
            let outcome = parse_binary(
                record.get(out_cols[j]).unwrap_or(""),
                row,
                &headers[out_cols[j]],
            )?;
            members.push(SubjectRecord {
                pair_id: pair_id.clone(),
                member: (j + 1) as u8,
                exposure,
                outcome,
                covariates: covariates.clone(),
            });
        }
        let b = members.pop().unwrap();
        let a = members.pop().unwrap();
        pairs.push(Pair { members: [a, b] });
    }
    PairedCohort::new(pairs, covariate_names, "ingest")
}

/// Write a cohort in the canonical long CSV format. Float covariates use
/// the shortest round-trip representation, so re-ingesting reproduces the
/// cohort exactly.
pub fn write_pairs<W: Write>(cohort: &PairedCohort, mut out: W) -> Result<(), CohortError> {
    let mut header = vec![
        "pair_id".to_string(),
        "member".to_string(),
        "exposure".to_string(),
        "outcome".to_string(),
    ];
    header.extend(cohort.covariate_names().iter().cloned());
    writeln!(out, "{}", header.join(","))?;
    for pair in cohort.pairs() {
        for m in &pair.members {
            let mut fields = vec![
                m.pair_id.clone(),
                m.member.to_string(),
                (m.exposure as u8).to_string(),
                (m.outcome as u8).to_string(),
            ];
            fields.extend(m.covariates.iter().map(|v| format!("{v}")));
            writeln!(out, "{}", fields.join(","))?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// tabulations
// ---------------------------------------------------------------------------

/// The 2x2 cross-classification of exposure-discordant pairs by the
/// outcomes of the exposed and unexposed member.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscordantTable {
    /// Both members had the event.
    pub t: u64,
    /// Exposed member event, unexposed no event.
    pub u: u64,
    /// Unexposed member event, exposed no event.
    pub v: u64,
    /// Neither member had the event.
    pub w: u64,
}

impl DiscordantTable {
    pub fn new(t: u64, u: u64, v: u64, w: u64) -> Self {
        Self { t, u, v, w }
    }

    pub fn n(&self) -> u64 {
        self.t + self.u + self.v + self.w
    }

    /// Exposed subjects with the event.
    pub fn n11(&self) -> u64 {
        self.u + self.t
    }

    /// Unexposed subjects with the event.
    pub fn n10(&self) -> u64 {
        self.v + self.t
    }

    /// Exposed subjects without the event.
    pub fn n01(&self) -> u64 {
        self.v + self.w
    }

    /// Unexposed subjects without the event.
    pub fn n00(&self) -> u64 {
        self.u + self.w
    }
}

/// Cross-classify the exposure-discordant pairs of a cohort.
///
/// Every pair must be exposure-discordant; concordant pairs are an error so
/// that a caller working with twin data filters explicitly first.
pub fn tabulate_discordant(cohort: &PairedCohort) -> Result<DiscordantTable, CohortError> {
    let concordant: Vec<String> = cohort
        .pairs()
        .iter()
        .filter(|p| !p.is_exposure_discordant())
        .map(|p| p.id().to_string())
        .collect();
    if !concordant.is_empty() {
        return Err(CohortError::ConcordantPairs(concordant));
    }
    let mut table = DiscordantTable::new(0, 0, 0, 0);
    for pair in cohort.pairs() {
        let (exposed, unexposed) = pair.by_exposure();
        match (exposed.outcome, unexposed.outcome) {
            (true, true) => table.t += 1,
            (true, false) => table.u += 1,
            (false, true) => table.v += 1,
            (false, false) => table.w += 1,
        }
    }
    Ok(table)
}

/// Individual-level counts r_yx indexed by outcome then exposure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndividualCounts {
    pub r11: u64,
    pub r10: u64,
    pub r01: u64,
    pub r00: u64,
}

impl IndividualCounts {
    pub fn total(&self) -> u64 {
        self.r11 + self.r10 + self.r01 + self.r00
    }
}

/// Pair-structure summary of a full cohort (concordant pairs included):
/// individual counts, exposure prevalence, pair-type proportions and
/// within-pair outcome covariances per pair type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllPairSummary {
    pub r: IndividualCounts,
    pub n_pairs: u64,
    /// Pairs with both members unexposed / both exposed / discordant.
    pub m00: u64,
    pub m11: u64,
    pub md: u64,
    /// Exposure prevalence among individuals.
    pub q_hat: f64,
    /// Pair-type proportions.
    pub q00_hat: f64,
    pub q11_hat: f64,
    pub qd_hat: f64,
    /// Outcome prevalence by exposure.
    pub p0_hat: f64,
    pub p1_hat: f64,
    /// Mean outcome within each pair-type stratum. For discordant pairs the
    /// exposed- and unexposed-member means are kept separately.
    pub ybar00: f64,
    pub ybar11: f64,
    pub ybar_d_exposed: f64,
    pub ybar_d_unexposed: f64,
    /// Mean within-pair outcome products per stratum.
    pub yy00: f64,
    pub yy11: f64,
    pub yyd: f64,
    /// Plug-in (divide-by-m) within-pair outcome covariances per stratum;
    /// 0 when the stratum is empty.
    pub c00_hat: f64,
    pub c11_hat: f64,
    pub cd_hat: f64,
    /// Names of empty strata whose covariance terms were zeroed.
    pub empty_strata: Vec<String>,
}

/// Summarize a full cohort into the statistics the all-pair analyses need.
pub fn tabulate_all(cohort: &PairedCohort) -> AllPairSummary {
    let mut r = IndividualCounts { r11: 0, r10: 0, r01: 0, r00: 0 };
    let (mut m00, mut m11, mut md) = (0u64, 0u64, 0u64);
    let (mut s00, mut ss00) = (0.0, 0.0); // sum of member outcomes, sum of products
    let (mut s11, mut ss11) = (0.0, 0.0);
    let (mut se_d, mut su_d, mut ssd) = (0.0, 0.0, 0.0);

    for pair in cohort.pairs() {
        for m in &pair.members {
            match (m.outcome, m.exposure) {
                (true, true) => r.r11 += 1,
                (true, false) => r.r10 += 1,
                (false, true) => r.r01 += 1,
                (false, false) => r.r00 += 1,
            }
        }
        let y0 = pair.members[0].outcome_f64();
        let y1 = pair.members[1].outcome_f64();
        if pair.is_exposure_discordant() {
            md += 1;
            let (e, u) = pair.by_exposure();
            se_d += e.outcome_f64();
            su_d += u.outcome_f64();
            ssd += e.outcome_f64() * u.outcome_f64();
        } else if pair.members[0].exposure {
            m11 += 1;
            s11 += y0 + y1;
            ss11 += y0 * y1;
        } else {
            m00 += 1;
            s00 += y0 + y1;
            ss00 += y0 * y1;
        }
    }

    let n_pairs = cohort.n_pairs() as u64;
    let n_ind = (2 * n_pairs) as f64;
    let exposed = (r.r11 + r.r01) as f64;
    let unexposed = (r.r10 + r.r00) as f64;

    let mut empty_strata = Vec::new();
    let (ybar00, yy00, c00_hat) = if m00 > 0 {
        let mean = s00 / (2.0 * m00 as f64);
        let prod = ss00 / m00 as f64;
        (mean, prod, prod - mean * mean)
    } else {
        empty_strata.push("both-unexposed".to_string());
        (0.0, 0.0, 0.0)
    };
    let (ybar11, yy11, c11_hat) = if m11 > 0 {
        let mean = s11 / (2.0 * m11 as f64);
        let prod = ss11 / m11 as f64;
        (mean, prod, prod - mean * mean)
    } else {
        empty_strata.push("both-exposed".to_string());
        (0.0, 0.0, 0.0)
    };
    let (ybar_d_exposed, ybar_d_unexposed, yyd, cd_hat) = if md > 0 {
        let me = se_d / md as f64;
        let mu = su_d / md as f64;
        let prod = ssd / md as f64;
        (me, mu, prod, prod - me * mu)
    } else {
        empty_strata.push("discordant".to_string());
        (0.0, 0.0, 0.0, 0.0)
    };

    AllPairSummary {
        r,
        n_pairs,
        m00,
        m11,
        md,
        q_hat: exposed / n_ind,
        q00_hat: m00 as f64 / n_pairs as f64,
        q11_hat: m11 as f64 / n_pairs as f64,
        qd_hat: md as f64 / n_pairs as f64,
        p0_hat: if unexposed > 0.0 { r.r10 as f64 / unexposed } else { 0.0 },
        p1_hat: if exposed > 0.0 { r.r11 as f64 / exposed } else { 0.0 },
        ybar00,
        ybar11,
        ybar_d_exposed,
        ybar_d_unexposed,
        yy00,
        yy11,
        yyd,
        c00_hat,
        c11_hat,
        cd_hat,
        empty_strata,
    }
}

// ---------------------------------------------------------------------------
// summary-count input
// ---------------------------------------------------------------------------

/// Pair-pattern counts for one exposure-concordant stratum: number of pairs
/// with two, one and zero events.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConcordantPatternCounts {
    pub events2: u64,
    pub events1: u64,
    pub events0: u64,
}

impl ConcordantPatternCounts {
    pub fn total(&self) -> u64 {
        self.events2 + self.events1 + self.events0
    }
}

/// Key-value document describing a full cohort by pair-pattern counts,
/// bypassing raw ingestion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AllPairCounts {
    pub discordant: DiscordantTable,
    #[serde(default)]
    pub both_unexposed: ConcordantPatternCounts,
    #[serde(default)]
    pub both_exposed: ConcordantPatternCounts,
    /// Optional individual counts; validated against the pair patterns
    /// when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r11: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r10: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r01: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r00: Option<u64>,
}

impl AllPairCounts {
    pub fn to_summary(&self) -> Result<AllPairSummary, CohortError> {
        let d = &self.discordant;
        let bu = &self.both_unexposed;
        let bx = &self.both_exposed;
        let r = IndividualCounts {
            r11: 2 * bx.events2 + bx.events1 + d.t + d.u,
            r01: 2 * bx.events0 + bx.events1 + d.v + d.w,
            r10: 2 * bu.events2 + bu.events1 + d.t + d.v,
            r00: 2 * bu.events0 + bu.events1 + d.u + d.w,
        };
        for (name, declared, derived) in [
            ("r11", self.r11, r.r11),
            ("r10", self.r10, r.r10),
            ("r01", self.r01, r.r01),
            ("r00", self.r00, r.r00),
        ] {
            if let Some(decl) = declared {
                if decl != derived {
                    return Err(CohortError::Parse(format!(
                        "{name}={decl} inconsistent with pair-pattern counts (imply {derived})"
                    )));
                }
            }
        }
        let (m00, m11, md) = (bu.total(), bx.total(), d.n());
        let n_pairs = m00 + m11 + md;
        if n_pairs == 0 {
            return Err(CohortError::Empty);
        }
        let n_ind = (2 * n_pairs) as f64;
        let exposed = (r.r11 + r.r01) as f64;
        let unexposed = (r.r10 + r.r00) as f64;

        let mut empty_strata = Vec::new();
        let (ybar00, yy00, c00) = if m00 > 0 {
            let mean = (2 * bu.events2 + bu.events1) as f64 / (2 * m00) as f64;
            let prod = bu.events2 as f64 / m00 as f64;
            (mean, prod, prod - mean * mean)
        } else {
            empty_strata.push("both-unexposed".to_string());
            (0.0, 0.0, 0.0)
        };
        let (ybar11, yy11, c11) = if m11 > 0 {
            let mean = (2 * bx.events2 + bx.events1) as f64 / (2 * m11) as f64;
            let prod = bx.events2 as f64 / m11 as f64;
            (mean, prod, prod - mean * mean)
        } else {
            empty_strata.push("both-exposed".to_string());
            (0.0, 0.0, 0.0)
        };
        let (ye, yu, yyd, cd) = if md > 0 {
            let me = (d.t + d.u) as f64 / md as f64;
            let mu = (d.t + d.v) as f64 / md as f64;
            let prod = d.t as f64 / md as f64;
            (me, mu, prod, prod - me * mu)
        } else {
            empty_strata.push("discordant".to_string());
            (0.0, 0.0, 0.0, 0.0)
        };

        Ok(AllPairSummary {
            r,
            n_pairs,
            m00,
            m11,
            md,
            q_hat: exposed / n_ind,
            q00_hat: m00 as f64 / n_pairs as f64,
            q11_hat: m11 as f64 / n_pairs as f64,
            qd_hat: md as f64 / n_pairs as f64,
            p0_hat: if unexposed > 0.0 { r.r10 as f64 / unexposed } else { 0.0 },
            p1_hat: if exposed > 0.0 { r.r11 as f64 / exposed } else { 0.0 },
            ybar00,
            ybar11,
            ybar_d_exposed: ye,
            ybar_d_unexposed: yu,
            yy00,
            yy11,
            yyd,
            c00_hat: c00,
            c11_hat: c11,
            cd_hat: cd,
            empty_strata,
        })
    }
}

/// Parse a `{t,u,v,w}` JSON document into a discordant table.
pub fn discordant_table_from_json(text: &str) -> Result<DiscordantTable, CohortError> {
    serde_json::from_str(text).map_err(|e| CohortError::Parse(e.to_string()))
}

/// Parse a pair-pattern count JSON document into an all-pair summary.
pub fn all_pair_summary_from_json(text: &str) -> Result<AllPairSummary, CohortError> {
    let counts: AllPairCounts =
        serde_json::from_str(text).map_err(|e| CohortError::Parse(e.to_string()))?;
    counts.to_summary()
}
