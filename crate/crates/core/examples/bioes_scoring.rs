//! BIO2 to BIOES conversion, span extraction and entity-level scoring.

use seqtag::data::bio2_to_bioes;
use seqtag::eval::{entity_prf1, extract_spans};

fn main() -> seqtag::Result<()> {
    let gold_bio2 = ["B-PER", "I-PER", "O", "B-LOC", "I-LOC", "I-LOC", "B-ORG"];
    let gold = bio2_to_bioes(&gold_bio2)?;
    println!("BIO2  {gold_bio2:?}\nBIOES {gold:?}");
    match bio2_to_bioes(&["O", "I-PER"]) {
        Ok(_) => unreachable!(),
        Err(e) => println!("invalid input rejected: {e}"),
    }

    let pred = ["B-PER", "E-PER", "O", "B-LOC", "E-LOC", "O", "S-ORG"];
    let gold_spans = extract_spans(&gold);
    let pred_spans = extract_spans(&pred);
    println!("gold spans {gold_spans:?}\npred spans {pred_spans:?}");
    let r = entity_prf1(&[gold_spans], &[pred_spans])?;
    println!("P {:.3}  R {:.3}  F1 {:.3}", r.precision, r.recall, r.f1);
    Ok(())
}
