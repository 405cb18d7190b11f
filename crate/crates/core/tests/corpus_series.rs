use std::collections::BTreeMap;

use chrono::NaiveDate;
use polarity_core::corpus::{
    filter, groups, read_corpus, summarize, write_corpus_to, CorpusFormat, DateRange, TweetRecord,
};
use polarity_core::series::{
    daily_aggregate, rank_groups_by_mean_pol, read_series_csv, write_series_csv, ScoredRecord,
};
use polarity_core::synth::tweet_corpus;
use polarity_core::valence::{classify_polarity, Polarity, ValenceConfig, ValenceScorer};
use proptest::prelude::*;
use std::path::Path;

fn day(s: &str) -> NaiveDate {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
}

fn corpus() -> Vec<TweetRecord> {
    tweet_corpus(&["Japan", "USA"], day("2020-03-01"), 20, 5, 11)
}

#[test]
fn jsonl_round_trip_preserves_records() {
    let mut records: Vec<TweetRecord> = corpus().into_iter().take(10).collect();
    records[3].label = None;
    records[4].text = "quotes \" and, commas\nnewline ✓".into();
    for format in [CorpusFormat::Jsonl, CorpusFormat::Csv] {
        let mut buf = Vec::new();
        write_corpus_to(&records, &mut buf, format).unwrap();
        let back = read_corpus(buf.as_slice(), format, Path::new("mem")).unwrap();
        assert!(back.rejections.is_empty(), "{format}");
        assert_eq!(back.records, records, "{format}");
    }
}

#[test]
fn filter_matches_linear_scan() {
    let records = corpus();
    let range = DateRange::new(day("2020-03-05"), day("2020-03-09")).unwrap();
    let got = filter(&records, Some("USA"), Some(range));
    let mut want = Vec::new();
    for r in &records {
        if r.group == "USA" && r.date >= day("2020-03-05") && r.date <= day("2020-03-09") {
            want.push(r.clone());
        }
    }
    assert_eq!(got, want);
    assert_eq!(got.len(), 25);
}

fn scored(records: &[TweetRecord]) -> Vec<ScoredRecord<f64>> {
    let scorer = ValenceScorer::english();
    records
        .iter()
        .map(|r| ScoredRecord {
            record: r.clone(),
            score: scorer.score(&r.text),
        })
        .collect()
}

#[test]
fn series_matches_groupby_oracle() {
    let records = filter(&corpus(), Some("Japan"), None);
    let scored = scored(&records);
    let cfg = ValenceConfig::default();
    let series = daily_aggregate(&scored, &cfg).unwrap();

    let mut groups: BTreeMap<NaiveDate, Vec<&ScoredRecord<f64>>> = BTreeMap::new();
    for s in &scored {
        groups.entry(s.record.date).or_default().push(s);
    }
    assert_eq!(series.points.len(), groups.len());
    for (p, (date, day)) in series.points.iter().zip(&groups) {
        assert_eq!(p.date, *date);
        let mean = day.iter().map(|s| s.score.compound).sum::<f64>() / day.len() as f64;
        assert!((p.mean_pol - mean).abs() < 1e-12);
        let pos = day
            .iter()
            .filter(|s| classify_polarity(&s.score, &cfg) == Polarity::Positive)
            .count();
        let neg = day.iter().filter(|s| s.score.compound <= -0.05).count();
        assert_eq!((p.n_pos, p.n_neg, p.n), (pos, neg, day.len()));
        assert!((p.pn_ratio - (pos as f64 + 1.0) / (neg as f64 + 1.0)).abs() < 1e-12);
    }
}

#[test]
fn series_csv_reparses_identically() {
    let scored = scored(&filter(&corpus(), Some("USA"), None));
    let series = daily_aggregate(&scored, &ValenceConfig::default()).unwrap();
    let mut buf = Vec::new();
    write_series_csv(&series, &mut buf).unwrap();
    let back = read_series_csv::<f64, _>(buf.as_slice(), "USA").unwrap();
    assert_eq!(back, series);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn series_is_invariant_to_record_order(seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut s = scored(&filter(&corpus(), Some("Japan"), None));
        let cfg = ValenceConfig::default();
        let base = daily_aggregate(&s, &cfg).unwrap();
        s.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(daily_aggregate(&s, &cfg).unwrap(), base);
    }
}

#[test]
fn summaries_agree_with_day_counts() {
    let records = corpus();
    for g in groups(&records) {
        let mine = filter(&records, Some(&g), None);
        let s = summarize(&mine, &g).unwrap();
        let mut per_day: BTreeMap<NaiveDate, usize> = BTreeMap::new();
        for r in &mine {
            *per_day.entry(r.date).or_default() += 1;
        }
        assert_eq!(s.total_tweets, per_day.values().sum::<usize>());
        assert_eq!(s.total_days, per_day.len());
        assert!(s.min_per_day as f64 <= s.avg_per_day && s.avg_per_day <= s.max_per_day as f64);
    }
}

#[test]
fn every_input_row_is_accepted_or_rejected() {
    let csv = "id,date,group,text\n1,2020-03-01,A,ok\n2,2020-13-40,A,bad date\n3,2020-03-02,A,\n4,2020-03-02,A,fine\n";
    let r = read_corpus(csv.as_bytes(), CorpusFormat::Csv, Path::new("mem")).unwrap();
    assert_eq!((r.records.len(), r.rejections.len()), (2, 2));
    assert_eq!(r.total_rows(), 4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn daily_points_are_consistent(seed in any::<u64>()) {
        let records = tweet_corpus(&["G"], day("2020-01-01"), 10, 6, seed);
        let s = daily_aggregate(&scored(&records), &ValenceConfig::default()).unwrap();
        prop_assert_eq!(s.points.len(), 10);
        for p in &s.points {
            prop_assert_eq!(p.n_pos + p.n_neg + p.n_neu, p.n);
            prop_assert!(p.mean_pol > -1.0 && p.mean_pol < 1.0);
            prop_assert!(p.pn_ratio > 0.0);
            prop_assert_eq!(p.pn_ratio > 1.0, p.n_pos > p.n_neg);
            prop_assert_eq!(p.pn_ratio == 1.0, p.n_pos == p.n_neg);
        }
        prop_assert!(s.points.windows(2).all(|w| w[0].date < w[1].date));
    }

    #[test]
    fn group_ranking_ignores_record_order(seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let rank = |records: &[TweetRecord]| {
            let series: Vec<_> = groups(records)
                .iter()
                .map(|g| daily_aggregate(&scored(&filter(records, Some(g), None)), &ValenceConfig::default()).unwrap())
                .collect();
            rank_groups_by_mean_pol(&series)
        };
        let mut records = tweet_corpus(&["A", "B", "C"], day("2020-01-01"), 8, 4, 77);
        let base = rank(&records);
        records.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(rank(&records), base);
    }
}
