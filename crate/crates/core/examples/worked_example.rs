//! Settles the two-player, three-alternative round and prints every
//! transfer component.

use envelope_vote::mechanism::TieBreakPolicy;
use envelope_vote::mechanism::{settle_round, DepositVector};

fn main() -> envelope_vote::Result<()> {
    let deposits = vec![
        DepositVector::new(vec![21.0, 15.0, 0.0])?,
        DepositVector::new(vec![0.0, 15.0, 12.0])?,
    ];
    let out = settle_round(&deposits, TieBreakPolicy::LowestIndex)?;
    let a = out.scale.value();
    println!("a = {a}, selected = A{}", out.selected + 1);
    println!("tally = {:?}", out.tallies.totals());
    for (i, (x, tr)) in out.votes.iter().zip(&out.transfers).enumerate() {
        println!("participant {}", i + 1);
        println!("  votes = {:?}", x.as_slice());
        println!(
            "  r0 = {:?}  (in units of a: {:?})",
            tr.r0,
            in_units(&tr.r0, a)
        );
        println!(
            "  r1 = {:?}  (in units of a: {:?})",
            tr.r1,
            in_units(&tr.r1, a)
        );
        println!("  t  = {:?}", tr.t);
        println!("  R  = {} of {} deposited", tr.total, deposits[i].total());
    }
    println!("surplus = {}", out.surplus);
    Ok(())
}

fn in_units(v: &[f64], a: f64) -> Vec<f64> {
    v.iter().map(|x| x / a).collect()
}
