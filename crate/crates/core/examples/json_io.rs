//! Read a representation file, write it back.

use kregular::io::{parse_representation, NumericMode};

fn main() -> kregular::Result<()> {
    let text = r#"{"k": 2, "d": 2, "u": [1, 1], "v": [1, 0],
                   "mats": [[[0, 2], [1, 0]], [[0, 1], [2, 0]]]}"#;
    let rep = parse_representation(text, NumericMode::Auto)?;
    println!("mode {}", rep.mode_name());
    print!("{}", rep.to_json());
    let float = parse_representation(text, NumericMode::Float)?;
    print!("{}", float.to_json());
    Ok(())
}
