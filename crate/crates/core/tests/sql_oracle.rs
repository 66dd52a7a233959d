//! The exact engine against SQLite running the rendered SQL.

mod common;

use std::sync::Arc;

use common::{random_query, random_table};
use explorebench::adapters::ExactEngine;
use explorebench::model::render_sql;
use explorebench::table::Value;
use explorebench::{BinComponent, BinKey, Table};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rusqlite::functions::FunctionFlags;
use rusqlite::types::ValueRef;
use rusqlite::{params_from_iter, Connection};

fn load(table: &Table) -> Connection {
    let conn = Connection::open_in_memory().unwrap();
    if conn.query_row("SELECT FLOOR(1.5)", [], |r| r.get::<_, f64>(0)).is_err() {
        conn.create_scalar_function("FLOOR", 1, FunctionFlags::SQLITE_DETERMINISTIC, |ctx| {
            Ok(ctx.get::<Option<f64>>(0)?.map(f64::floor))
        })
        .unwrap();
    }
    let cols: Vec<String> = table
        .columns()
        .iter()
        .map(|c| format!("{} {}", c.name, if c.schema().is_nominal() { "TEXT" } else { "REAL" }))
        .collect();
    conn.execute(&format!("CREATE TABLE t ({})", cols.join(", ")), []).unwrap();
    let marks = vec!["?"; cols.len()].join(", ");
    let mut stmt = conn.prepare(&format!("INSERT INTO t VALUES ({marks})")).unwrap();
    for i in 0..table.rows() {
        let row: Vec<rusqlite::types::Value> = table
            .row(i)
            .into_iter()
            .map(|v| match v {
                Value::Number(x) if x.is_nan() => rusqlite::types::Value::Null,
                Value::Number(x) => rusqlite::types::Value::Real(x),
                Value::Text(s) => rusqlite::types::Value::Text(s),
            })
            .collect();
        stmt.execute(params_from_iter(row)).unwrap();
    }
    drop(stmt);
    conn
}

fn component(v: ValueRef<'_>) -> Option<BinComponent> {
    match v {
        ValueRef::Null => None,
        ValueRef::Integer(i) => Some(BinComponent::Index(i)),
        ValueRef::Real(x) => Some(BinComponent::Index(x as i64)),
        ValueRef::Text(t) => Some(BinComponent::Category(String::from_utf8_lossy(t).into_owned())),
        ValueRef::Blob(_) => panic!("blob key"),
    }
}

#[test]
fn exact_engine_agrees_with_sqlite() {
    let table = random_table(2_000, 21);
    let schema = table.schema("t");
    let conn = load(&table);
    let engine = ExactEngine::with_table(Arc::new(table.clone()), schema.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..200 {
        let (viz, filter) = random_query(&schema, &mut rng);
        let sql = render_sql(&viz, &filter, "t", &schema).unwrap();
        let got = engine.execute(&viz, &filter, None).unwrap().unwrap();
        let mut stmt = conn.prepare(&sql).unwrap();
        let dims = viz.bin_dims();
        let rows = stmt
            .query_map([], |r| {
                let key: Option<Vec<BinComponent>> = (0..dims).map(|d| component(r.get_ref(d).unwrap())).collect();
                let value: Option<f64> = r.get(dims)?;
                Ok((key, value))
            })
            .unwrap();
        let mut n = 0;
        for row in rows {
            let (Some(key), Some(value)) = row.unwrap() else { continue };
            n += 1;
            let mine = got.estimate(&BinKey(key.clone())).unwrap_or_else(|| panic!("query {i}: {sql}: missing {key:?}"));
            assert!(
                (mine - value).abs() <= 1e-9 * value.abs().max(1.0),
                "query {i}: {sql}: {key:?} {mine} vs {value}"
            );
        }
        assert_eq!(n, got.len(), "query {i}: {sql}");
    }
}
