//! Load a CSV table, with an optional schema overriding inferred column
//! types, and report what was read.

use seqvimp::forest::Schema;
use seqvimp::Dataset;

const CSV: &str = "\
age,group,score,outcome
34,a,1.5,yes
41,b,2.25,no
29,a,,yes
50,c,3.0,no
38,b,2.0,yes
";

fn main() -> seqvimp::Result<()> {
    // Without the schema `age` would be numeric.
    let schema = Schema::parse("age:categorical\n")?;
    let (data, summary) = Dataset::from_csv_reader(CSV.as_bytes(), "outcome", Some(&schema))?;
    println!("rows read {}, dropped {}", summary.rows_read, summary.rows_dropped);
    for (name, ty) in &summary.column_types {
        println!("  {name}: {ty:?}");
    }
    println!("task {}, {} predictors, {} rows", data.task(), data.n_predictors(), data.n_rows());
    Ok(())
}
