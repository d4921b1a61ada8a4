//! Random junction tables with a known labelling rule, for validating the
//! forest without the curated dataset.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::features::FeatureVector;
use crate::thermo::ThermoParams;

use super::{CoaxLabel, DatasetRow, LabeledExample, Provenance};

const PAIRS: [(char, char); 6] = [('G', 'C'), ('C', 'G'), ('A', 'U'), ('U', 'A'), ('G', 'U'), ('U', 'G')];

/// H1H3 when J13 is empty and J23 is not, else H1H2 when J12 is empty and
/// the H1/H2 stack is below -1 kcal/mol, else NONE.
pub fn rule_label(fv: &FeatureVector) -> CoaxLabel {
    if fv.j13 == 0 && fv.j23 > 0 {
        CoaxLabel::H1H3
    } else if fv.j12 == 0 && fv.dg_h1h2 < -1.0 {
        CoaxLabel::H1H2
    } else {
        CoaxLabel::None
    }
}

fn loop_len(rng: &mut impl Rng) -> usize {
    // empty loops slightly more often than not, which keeps the three
    // classes roughly balanced under the rule above
    if rng.gen_bool(0.55) {
        0
    } else {
        rng.gen_range(1..=6)
    }
}

fn random_loop(rng: &mut impl Rng) -> String {
    (0..loop_len(rng))
        .map(|_| *b"ACGU".choose(rng).unwrap() as char)
        .collect()
}

/// `n` random junction rows labelled by [`rule_label`]; a fraction `noise`
/// of labels is then replaced by a different label chosen uniformly.
pub fn synthetic_rows(n: usize, noise: f64, seed: u64) -> Vec<DatasetRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = ThermoParams::default();
    let mut rows = Vec::with_capacity(n);
    for serial in 1..=n {
        // (penultimate, terminal) pair of each helix
        let mut arms = [[('G', 'C'); 2]; 3];
        for arm in &mut arms {
            for p in arm.iter_mut() {
                *p = *PAIRS.choose(&mut rng).unwrap();
            }
        }
        let [h1, h2, h3] = arms;
        let s1 = format!("{}{}{}{}{}", h1[0].0, h1[1].0, random_loop(&mut rng), h2[1].0, h2[0].0);
        let s2 = format!("{}{}{}{}{}", h2[0].1, h2[1].1, random_loop(&mut rng), h3[1].0, h3[0].0);
        let s3 = format!("{}{}{}{}{}", h3[0].1, h3[1].1, random_loop(&mut rng), h1[1].1, h1[0].1);
        // room for a short stem and hairpin between the subsequences
        let gap = 12;
        let a = 1;
        let b = a + s1.len() - 1;
        let c = b + gap;
        let d = c + s2.len() - 1;
        let e = d + gap;
        let f = e + s3.len() - 1;
        let mut row = DatasetRow {
            provenance: Provenance {
                serial: serial.to_string(),
                pdb: "SYN".into(),
                rna_type: "synthetic".into(),
                family: String::new(),
            },
            coaxial: CoaxLabel::None,
            coords: [a, b, c, d, e, f],
            strseqs: [s1, s2, s3],
        };
        let ex = row.to_example(&params).expect("generated rows are well formed");
        let mut label = rule_label(&ex.features);
        if rng.gen_bool(noise) {
            let others: Vec<CoaxLabel> = CoaxLabel::ALL.into_iter().filter(|&l| l != label).collect();
            label = *others.choose(&mut rng).unwrap();
        }
        row.coaxial = label;
        let (j31, j23) = (row.strseqs[2].len() - 4, row.strseqs[1].len() - 4);
        row.provenance.family = crate::junction::classify_family_counts(j31, j23).to_string();
        rows.push(row);
    }
    rows
}

pub fn synthetic_examples(n: usize, noise: f64, seed: u64) -> Vec<LabeledExample> {
    let params = ThermoParams::default();
    synthetic_rows(n, noise, seed)
        .iter()
        .map(|r| r.to_example(&params).expect("generated rows are well formed"))
        .collect()
}

/// Same examples with labels permuted at random.
pub fn shuffle_labels(samples: &[LabeledExample], seed: u64) -> Vec<LabeledExample> {
    let mut labels: Vec<CoaxLabel> = samples.iter().map(|s| s.label).collect();
    labels.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    samples
        .iter()
        .zip(labels)
        .map(|(s, label)| LabeledExample { label, ..s.clone() })
        .collect()
}
