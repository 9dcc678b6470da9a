mod common;

use std::fs;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread;

use common::*;
use medal_core::model::{attr, AttrValue, ObjectId, TagSource};
use medal_core::store::{FaultyStorage, LOG_FILE, MANIFEST_FILE};
use medal_core::{Catalog, OpenOptions};

fn open_faulty(lake: &Lake, storage: Arc<FaultyStorage>) -> medal_core::Result<Catalog> {
    Catalog::open_with(
        lake.catalog_path(),
        OpenOptions {
            storage: Some(storage),
            ..OpenOptions::default()
        },
    )
}

fn seeded(lake: &Lake) -> ObjectId {
    let mut c = lake.open();
    let id = c.create_object("/raw/a", props("seed", "lab", "csv")).unwrap();
    c.tag_object(&id, ["base"], TagSource::Manual).unwrap();
    id
}

/// Crashes a create at every write step. After reopening, the object is
/// present exactly when the call reported success.
fn crash_every_step(torn: bool) {
    let mut budget = 0;
    loop {
        let lake = Lake::new();
        let seed = seeded(&lake);
        let storage = Arc::new(FaultyStorage::new(budget, torn));
        let outcome = open_faulty(&lake, storage.clone())
            .and_then(|mut c| c.create_object("/raw/b", props("fresh", "lab", "csv")));

        let c = lake.open();
        assert!(c.validate().is_valid());
        assert_eq!(c.object(&seed).unwrap().tags.len(), 1);
        let fresh: Vec<_> = c.objects().filter(|h| h.title() == "fresh").collect();
        match &outcome {
            Ok(id) => {
                assert_eq!(fresh.len(), 1, "budget {budget}");
                assert_eq!(&fresh[0].id, id);
            }
            Err(_) => assert!(fresh.is_empty(), "budget {budget}"),
        }
        assert_eq!(c.manifest().counters.objects as usize, c.len());
        assert_eq!(c.manifest().counters.events as usize, c.events().len());
        assert_eq!(c.replay_counts(), c.live_counts());

        if !storage.crashed() {
            assert!(outcome.is_ok());
            break;
        }
        budget += 1;
        assert!(budget < 200, "create never finished");
    }
}

#[test]
fn crash_at_any_step_is_all_or_nothing() {
    crash_every_step(false);
}

#[test]
fn torn_writes_are_all_or_nothing() {
    crash_every_step(true);
}

#[test]
fn read_only_views_are_consistent_snapshots() {
    let lake = Lake::new();
    seeded(&lake);
    let path = lake.catalog_path();
    let stop = Arc::new(AtomicBool::new(false));
    let reader = {
        let stop = stop.clone();
        let path = path.clone();
        thread::spawn(move || {
            let mut views = 0;
            while !stop.load(Ordering::SeqCst) {
                let c = Catalog::open_read_only(&path).unwrap();
                assert_eq!(c.manifest().counters.objects as usize, c.len());
                assert_eq!(c.manifest().counters.events as usize, c.events().len());
                assert!(c.validate().is_valid());
                views += 1;
            }
            views
        })
    };
    let mut c = lake.open();
    for i in 0..60 {
        let id = c.create_object("/raw/x", props(&format!("obj {i}"), "lab", "text")).unwrap();
        c.describe_object(&id, "written while reading").unwrap();
    }
    stop.store(true, Ordering::SeqCst);
    assert!(reader.join().unwrap() > 0);
}

#[test]
fn ten_thousand_objects() {
    let lake = Lake::new();
    let mut c = lake.open();
    for i in 0..10_000 {
        c.create_object("/raw/bulk", props(&format!("bulk {i}"), "gen", "csv")).unwrap();
    }
    drop(c);
    let c = lake.open();
    assert_eq!(c.manifest().counters.objects, 10_000);
    assert_eq!(c.len(), 10_000);
}

#[test]
fn log_prefix_never_changes() {
    let lake = Lake::new();
    let id = seeded(&lake);
    let log = lake.catalog_path().join(LOG_FILE);
    let before = fs::read(&log).unwrap();
    {
        let mut c = lake.open();
        c.describe_object(&id, "later").unwrap();
        c.tag_object(&id, ["more"], TagSource::Manual).unwrap();
    }
    let after = fs::read(&log).unwrap();
    assert!(after.len() > before.len());
    assert_eq!(&after[..before.len()], &before[..]);
}

#[test]
fn reopen_preserves_everything() {
    let lake = Lake::new();
    let mut c = lake.open();
    let mut ids = Vec::new();
    for i in 0..100 {
        match i % 4 {
            0 | 1 => {
                let mut p = props(&format!("item {i}"), ["north", "south"][i % 2], "text");
                p.insert("batch".into(), AttrValue::Integer((i / 10) as i64));
                ids.push(c.create_object("/raw/i", p).unwrap());
            }
            2 => {
                c.tag_object(&ids[i % ids.len()], [format!("t{}", i % 5)], TagSource::Manual).unwrap();
            }
            _ => c.describe_object(&ids[i % ids.len()], &format!("note {i}")).unwrap(),
        }
    }
    c.group_by(attr::ORIGIN).unwrap();
    c.add_parenthood([ids[0].clone(), ids[1].clone()], &ids[2], Default::default()).unwrap();
    let export = c.export();
    drop(c);
    let c = lake.open();
    assert_eq!(c.export(), export);
    assert!(lake.catalog_path().join(MANIFEST_FILE).exists());
}
