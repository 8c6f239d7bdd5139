//! Shape of the set of pairs (m, p) for which a positive sequence has
//! D^m a^p = 0.
//!
//! cargo run -p misometry --example sequence_classify

use misometry::sequences::{classify_rho, is_in_a_mp, is_strict_a_mp, Generator, PositiveSequencePrefix, RhoSearch};

fn main() -> misometry::error::Result<()> {
    let search = RhoSearch::default();
    let cases = [
        ("sqrt(n^2+1)", Generator::poly_power(&[1.0, 0.0, 1.0], 2.0)?),
        ("(1+2n)^(1/3)", Generator::poly_power(&[1.0, 2.0], 3.0)?),
        ("(1+n)^2", Generator::poly_power(&[1.0, 2.0, 1.0], 1.0)?),
    ];
    for (name, g) in cases {
        let a = PositiveSequencePrefix::from_generator(g, 24)?;
        println!("{name:>14}: {:?}", classify_rho(&a, &search)?);
    }

    let fact: Vec<f64> = (1..=10u32)
        .scan(1.0, |acc, n| {
            *acc *= n as f64;
            Some(*acc)
        })
        .collect();
    println!("     factorial: {:?}", classify_rho(&PositiveSequencePrefix::new(fact)?, &search)?);
    println!("      constant: {:?}", classify_rho(&PositiveSequencePrefix::new(vec![2.5; 12])?, &search)?);

    let a = PositiveSequencePrefix::new(vec![1.0, 2.0, 5.0, 10.0, 17.0])?;
    println!("1,2,5,10,17 in A(3,1): {:?}", is_in_a_mp(&a, 3, 1.0, 1e-9)?.status);
    println!("1,2,5,10,17 strict at (2,1): {:?}", is_strict_a_mp(&a, 2, 1.0, 1e-9)?.status);
    Ok(())
}
