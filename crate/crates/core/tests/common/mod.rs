#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use medal_core::model::{attr, AttrValue, Attributes};
use medal_core::store::FsStorage;
use medal_core::{Catalog, OpenOptions};

pub const PRODUCTS_V1: &str =
    "<products><p><name>A</name><price>3</price></p><p><name>B</name><price>5</price></p></products>";
pub const PRODUCTS_V2: &str =
    "<products><p><name>A</name><price>4</price></p><p><name>B</name><price>6</price></p></products>";
pub const TWEETS: &str = r#"[{"user":"ann","text":"love the new products","likes":3},{"user":"bob","text":"prices went up","likes":1}]"#;

pub struct Lake {
    pub dir: tempfile::TempDir,
}

impl Lake {
    pub fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    pub fn file(&self, name: &str, content: impl AsRef<[u8]>) -> PathBuf {
        let p = self.dir.path().join("lake").join(name);
        fs::create_dir_all(p.parent().unwrap()).unwrap();
        fs::write(&p, content).unwrap();
        p
    }

    pub fn catalog_path(&self) -> PathBuf {
        self.dir.path().join("catalog")
    }

    pub fn open(&self) -> Catalog {
        open_fast(&self.catalog_path())
    }
}

/// Opens without fsync; these tests do not pull the plug.
pub fn open_fast(path: &Path) -> Catalog {
    Catalog::open_with(
        path,
        OpenOptions {
            create_if_missing: true,
            storage: Some(Arc::new(FsStorage { durable: false })),
            ..OpenOptions::default()
        },
    )
    .unwrap()
}

pub fn props(title: &str, origin: &str, format: &str) -> Attributes {
    Attributes::from([
        (attr::TITLE.into(), AttrValue::text(title)),
        (attr::ORIGIN.into(), AttrValue::text(origin)),
        (attr::INGEST_FORMAT.into(), AttrValue::text(format)),
    ])
}
