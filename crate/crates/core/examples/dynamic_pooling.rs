//! Dynamic pooling keeps the largest responses of each map inside the
//! previous active set; the union becomes the next active set.

use tigranet::layers::{dynamic_pool, ActiveNodeSet, PoolTape};

fn main() -> tigranet::Result<()> {
    let maps = vec![
        vec![9.0, 0.0, 0.0, 1.0, 4.0, 2.0],
        vec![0.0, 9.0, 1.0, 0.0, 3.0, 7.0],
    ];
    let all = ActiveNodeSet::all(6);
    let (pooled, first) = dynamic_pool(&maps, &all, 3, &mut PoolTape::default())?;
    println!("J = 3 over all vertices");
    for (i, (p, set)) in pooled.iter().zip(first.per_map()).enumerate() {
        println!("  map {i}: kept {set:?} -> {p:?}");
    }
    println!("  active set {:?}", first.omega());

    let (pooled, second) = dynamic_pool(&maps, &first, 1, &mut PoolTape::default())?;
    println!("J = 1 inside that set");
    for (i, p) in pooled.iter().enumerate() {
        println!("  map {i}: {p:?}");
    }
    println!(
        "  active set {:?} (nested: {})",
        second.omega(),
        first.contains_all(&second)
    );
    Ok(())
}
