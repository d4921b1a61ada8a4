mod common;

use common::{brute_force_junctions, random_rna, random_structure, table, ExpectedJunction};
use csminer::junction::{find_three_way_junctions, JunctionFamily};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn found(db: &str, residues: &[u8]) -> Vec<ExpectedJunction> {
    find_three_way_junctions(&table(db), residues)
        .into_iter()
        .map(|j| ExpectedJunction {
            coords: j.coords(),
            loops: (j.j12.len(), j.j23.len(), j.j31.len()),
            family: j.family,
        })
        .collect()
}

#[test]
fn toy_junction() {
    let db = "((..((...))..((...))..))";
    let js = find_three_way_junctions(&table(db), &vec![b'A'; db.len()]);
    assert_eq!(js.len(), 1);
    assert_eq!((js[0].j12.len(), js[0].j23.len(), js[0].j31.len()), (2, 2, 2));
    assert_eq!(js[0].family, JunctionFamily::B);
    assert_eq!(js[0].coords(), [1, 6, 10, 15, 19, 24]);
}

#[test]
fn lone_pair_arm_is_not_a_junction() {
    // the first branch is a single pair, so it has no penultimate pair
    let db = "((..(...)..((...))..))";
    assert!(find_three_way_junctions(&table(db), &vec![b'G'; db.len()]).is_empty());
    assert!(brute_force_junctions(db).is_empty());
}

#[test]
fn four_way_loop_is_not_a_junction() {
    let db = "((.((...)).((...)).((...)).))";
    assert!(find_three_way_junctions(&table(db), &vec![b'C'; db.len()]).is_empty());
}

#[test]
fn agrees_with_enumerator_on_fixed_seed() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut total = 0;
    for _ in 0..300 {
        let len = rand::Rng::gen_range(&mut rng, 1..=200);
        let db = random_structure(&mut rng, len);
        let res = random_rna(&mut rng, len);
        let want = brute_force_junctions(&db);
        total += want.len();
        assert_eq!(found(&db, &res), want, "{db}");
    }
    assert!(total > 50, "generator rarely makes junctions ({total})");
}

proptest! {
    #[test]
    fn agrees_with_enumerator(seed in any::<u64>(), len in 1usize..=200) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let db = random_structure(&mut rng, len);
        let res = random_rna(&mut rng, len);
        prop_assert_eq!(found(&db, &res), brute_force_junctions(&db));
    }

    #[test]
    fn subsequences_frame_their_loops(seed in any::<u64>(), len in 20usize..=200) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let db = random_structure(&mut rng, len);
        let res = random_rna(&mut rng, len);
        for j in find_three_way_junctions(&table(&db), &res) {
            prop_assert_eq!(j.strseq1.len(), j.j12.len() + 4);
            prop_assert_eq!(j.strseq2.len(), j.j23.len() + 4);
            prop_assert_eq!(j.strseq3.len(), j.j31.len() + 4);
            let c = j.coords();
            prop_assert!(c.windows(2).all(|w| w[0] < w[1]));
        }
    }
}

#[test]
fn adjacent_pair_has_no_penultimate() {
    // the third arm is a single pair closing an empty loop; reading it
    // backwards must not count as a second pair
    let db = "((((..))()))";
    assert!(brute_force_junctions(db).is_empty());
    assert!(find_three_way_junctions(&table(db), &vec![b'A'; db.len()]).is_empty());
}
