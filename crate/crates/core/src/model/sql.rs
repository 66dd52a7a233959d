use super::{AggregateFn, BinningSpec, Condition, FilterPredicate, Quantizer, VizSpec};
use crate::schema::Schema;
use crate::Result;

fn ident(name: &str) -> String {
    let simple = name
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if simple {
        name.to_string()
    } else {
        format!("\"{}\"", name.replace('"', "\"\""))
    }
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

fn text(s: &str) -> String {
    format!("'{}'", s.replace('\'', "''"))
}

fn group_expr(b: &BinningSpec, schema: &Schema) -> Result<String> {
    let col = schema.column(&b.column)?;
    let c = ident(&b.column);
    Ok(match b.quantizer(col) {
        None => c,
        Some(Quantizer::Width { w, reference }) if reference == 0.0 => {
            format!("FLOOR({c} / {})", num(w))
        }
        Some(Quantizer::Width { w, reference }) => {
            format!("FLOOR(({c} - {}) / {})", num(reference), num(w))
        }
        Some(Quantizer::Count { span, .. }) if span <= 0.0 => format!("FLOOR(0.0 * {c})"),
        Some(Quantizer::Count { k, min, span }) => {
            let e = format!(
                "FLOOR({} * ({c} - {}) / {})",
                num(f64::from(k)),
                num(min),
                num(span)
            );
            format!(
                "CASE WHEN {e} >= {k} THEN {} WHEN {e} < 0 THEN 0 ELSE {e} END",
                k - 1
            )
        }
    })
}

fn where_clause(p: &FilterPredicate) -> String {
    p.atoms
        .iter()
        .map(|a| {
            let c = ident(&a.column);
            match &a.condition {
                Condition::Eq(v) => format!("{c} = {}", text(v)),
                Condition::Ne(v) => format!("{c} <> {}", text(v)),
                Condition::Lt(x) => format!("{c} < {}", num(*x)),
                Condition::Le(x) => format!("{c} <= {}", num(*x)),
                Condition::Gt(x) => format!("{c} > {}", num(*x)),
                Condition::Ge(x) => format!("{c} >= {}", num(*x)),
                Condition::InRange(lo, hi) => {
                    format!("{c} >= {} AND {c} < {}", num(*lo), num(*hi))
                }
            }
        })
        .collect::<Vec<_>>()
        .join(" AND ")
}

/// Renders the viz's query as one `SELECT ... GROUP BY` statement whose
/// grouping expressions reproduce the binning semantics.
pub fn render_sql(
    viz: &VizSpec,
    effective: &FilterPredicate,
    table: &str,
    schema: &Schema,
) -> Result<String> {
    viz.validate(schema)?;
    effective.validate(schema)?;
    let groups = viz
        .binning
        .iter()
        .map(|b| group_expr(b, schema))
        .collect::<Result<Vec<_>>>()?;
    let agg = match (viz.agg.function, &viz.agg.column) {
        (AggregateFn::Count, _) => "COUNT(*)".to_string(),
        (f, Some(c)) => format!("{}({})", f.as_str().to_uppercase(), ident(c)),
        (_, None) => unreachable!("validated"),
    };
    let mut sql = format!("SELECT {}, {agg} FROM {}", groups.join(", "), ident(table));
    if !effective.is_empty() {
        sql.push_str(" WHERE ");
        sql.push_str(&where_clause(effective));
    }
    sql.push_str(" GROUP BY ");
    sql.push_str(&groups.join(", "));
    Ok(sql)
}
