//! Small reference diagrams: the lifestyle, smoking and coin-betting models
//! used throughout the tests, benches and documentation.

use crate::model::Diagram;

const YN: &[&str] = &["no", "yes"];

/// `smoke -> lung_cancer` with `P(lc=yes | smoke=no) = p_no`, `P(lc=yes | smoke=yes) = p_yes`.
pub fn m1(p_no: f64, p_yes: f64) -> Diagram {
    Diagram::builder()
        .decision("smoke", YN)
        .chance(
            "lung_cancer",
            YN,
            &["smoke"],
            vec![vec![1.0 - p_no, p_no], vec![1.0 - p_yes, p_yes]],
        )
        .decision_order(&["smoke"])
        .causal(true)
        .build()
}

/// [`m1`] with the 0.05 / 0.2 rows plus a set decision for lung cancer.
pub fn m1_with_set_decision() -> Diagram {
    Diagram::builder()
        .decision("smoke", YN)
        .chance("lung_cancer", YN, &["smoke"], vec![vec![0.95, 0.05], vec![0.8, 0.2]])
        .set_decision("s_lc", "lung_cancer")
        .decision_order(&["smoke", "s_lc"])
        .causal(true)
        .build()
}

/// Bet `d` on coin flip `c`; `w` is deterministic (win iff the bet matches).
/// `observe` adds the information arc `c -> d`.
pub fn coin(p_heads: f64, observe: bool) -> Diagram {
    coin_builder(p_heads, observe).build()
}

/// [`coin`] with utility 1 for a win and 0 for a loss.
pub fn coin_with_utility(p_heads: f64, observe: bool) -> Diagram {
    coin_builder(p_heads, observe)
        .utility("utility", &["w"], vec![1.0, 0.0])
        .build()
}

fn coin_builder(p_heads: f64, observe: bool) -> crate::model::DiagramBuilder {
    let hl = &["heads", "tails"];
    let b = Diagram::builder()
        .decision("d", hl)
        .chance("c", hl, &[], vec![vec![p_heads, 1.0 - p_heads]])
        // rows over (d, c): hh, ht, th, tt
        .deterministic("w", &["win", "lose"], &["d", "c"], &[0, 1, 1, 0])
        .decision_order(&["d"])
        .causal(true);
    if observe {
        b.information("c", "d")
    } else {
        b
    }
}

/// The full lifestyle model: smoke and diet decisions, genotype, lung cancer,
/// cardiovascular status, length of life and utility.
pub fn lifestyle() -> Diagram {
    Diagram::builder()
        .decision("smoke", YN)
        .decision("diet", &["good", "poor"])
        .chance("genotype", &["normal", "predisposed"], &[], vec![vec![0.7, 0.3]])
        .chance(
            "lung_cancer",
            YN,
            &["smoke", "genotype"],
            vec![vec![0.98, 0.02], vec![0.9, 0.1], vec![0.85, 0.15], vec![0.6, 0.4]],
        )
        .chance(
            "cardiovascular_status",
            &["good", "poor"],
            &["diet", "genotype"],
            vec![vec![0.9, 0.1], vec![0.7, 0.3], vec![0.6, 0.4], vec![0.3, 0.7]],
        )
        .chance(
            "length_of_life",
            &["short", "long"],
            &["lung_cancer", "cardiovascular_status"],
            vec![vec![0.2, 0.8], vec![0.5, 0.5], vec![0.7, 0.3], vec![0.9, 0.1]],
        )
        .utility("utility", &["length_of_life"], vec![0.0, 100.0])
        .decision_order(&["smoke", "diet"])
        .causal(true)
        .build()
}

/// Smoking decision with smoking pleasure and lung cancer both downstream of it.
pub fn smoking_pleasure() -> Diagram {
    Diagram::builder()
        .decision("smoke", YN)
        .chance(
            "smoking_pleasure",
            &["low", "high"],
            &["smoke"],
            vec![vec![0.9, 0.1], vec![0.2, 0.8]],
        )
        .chance("lung_cancer", YN, &["smoke"], vec![vec![0.95, 0.05], vec![0.8, 0.2]])
        .utility(
            "utility",
            &["smoking_pleasure", "lung_cancer"],
            // (low,no) (low,yes) (high,no) (high,yes)
            vec![80.0, 10.0, 100.0, 15.0],
        )
        .decision_order(&["smoke"])
        .causal(true)
        .build()
}

/// The "gene" view: genotype drives lung cancer and (with smoking) pleasure.
pub fn smoking_genotype() -> Diagram {
    Diagram::builder()
        .decision("smoke", YN)
        .chance("genotype", &["normal", "predisposed"], &[], vec![vec![0.7, 0.3]])
        .chance(
            "smoking_pleasure",
            &["low", "high"],
            &["smoke", "genotype"],
            vec![vec![0.9, 0.1], vec![0.8, 0.2], vec![0.4, 0.6], vec![0.1, 0.9]],
        )
        .chance("lung_cancer", YN, &["genotype"], vec![vec![0.95, 0.05], vec![0.7, 0.3]])
        .utility(
            "utility",
            &["smoking_pleasure", "lung_cancer"],
            vec![80.0, 10.0, 100.0, 15.0],
        )
        .decision_order(&["smoke"])
        .causal(true)
        .build()
}

/// Smoke and diet decisions with genotype as a common cause of lung cancer
/// and cardiovascular status.
pub fn lifestyle_common_cause() -> Diagram {
    Diagram::builder()
        .decision("smoke", YN)
        .decision("diet", &["good", "poor"])
        .chance("genotype", &["normal", "predisposed"], &[], vec![vec![0.7, 0.3]])
        .chance(
            "lung_cancer",
            YN,
            &["smoke", "genotype"],
            vec![vec![0.98, 0.02], vec![0.9, 0.1], vec![0.85, 0.15], vec![0.6, 0.4]],
        )
        .chance(
            "cardiovascular_status",
            &["good", "poor"],
            &["diet", "genotype"],
            vec![vec![0.9, 0.1], vec![0.7, 0.3], vec![0.6, 0.4], vec![0.3, 0.7]],
        )
        .decision_order(&["smoke", "diet"])
        .causal(true)
        .build()
}

/// [`lifestyle_common_cause`] with genotype marginalized out, which forces arcs from smoke and
/// lung cancer into cardiovascular status.
pub fn lifestyle_marginalized() -> Diagram {
    let g = [0.7, 0.3];
    let lc_yes = [[0.02, 0.1], [0.15, 0.4]]; // [smoke][genotype]
    let cvs_poor = [[0.1, 0.3], [0.4, 0.7]]; // [diet][genotype]
    let p_lc = |s: usize, l: usize| -> f64 {
        (0..2)
            .map(|k| g[k] * if l == 1 { lc_yes[s][k] } else { 1.0 - lc_yes[s][k] })
            .sum()
    };
    let lc_rows: Vec<Vec<f64>> = (0..2).map(|s| vec![p_lc(s, 0), p_lc(s, 1)]).collect();
    let mut cvs_rows = Vec::new();
    for (s, lc) in lc_yes.iter().enumerate() {
        for l in 0..2 {
            for cvs in &cvs_poor {
                let joint_poor: f64 = (0..2)
                    .map(|k| {
                        let pl = if l == 1 { lc[k] } else { 1.0 - lc[k] };
                        g[k] * pl * cvs[k]
                    })
                    .sum();
                let poor = joint_poor / p_lc(s, l);
                cvs_rows.push(vec![1.0 - poor, poor]);
            }
        }
    }
    Diagram::builder()
        .decision("smoke", YN)
        .decision("diet", &["good", "poor"])
        .chance("lung_cancer", YN, &["smoke"], lc_rows)
        .chance(
            "cardiovascular_status",
            &["good", "poor"],
            &["smoke", "lung_cancer", "diet"],
            cvs_rows,
        )
        .decision_order(&["smoke", "diet"])
        .causal(true)
        .build()
}

/// `a -> b -> c` with set decisions on `a` and `b`: minimal, causal, and
/// certifiable as a causal network.
pub fn certified_chain() -> Diagram {
    Diagram::builder()
        .chance("a", YN, &[], vec![vec![0.6, 0.4]])
        .chance("b", YN, &["a"], vec![vec![0.8, 0.2], vec![0.3, 0.7]])
        .chance("c", YN, &["b"], vec![vec![0.9, 0.1], vec![0.25, 0.75]])
        .set_decision("s_a", "a")
        .set_decision("s_b", "b")
        .decision_order(&["s_a", "s_b"])
        .causal(true)
        .build()
}

/// Every reference diagram with a stable name, for corpus-style tests.
pub fn corpus() -> Vec<(&'static str, Diagram)> {
    vec![
        ("m1", m1(0.05, 0.2)),
        ("m1_flat", m1(0.5, 0.5)),
        ("m1_set_decision", m1_with_set_decision()),
        ("coin", coin(0.5, false)),
        ("coin_utility", coin_with_utility(0.5, false)),
        ("coin_observed", coin_with_utility(0.5, true)),
        ("lifestyle", lifestyle()),
        ("smoking_pleasure", smoking_pleasure()),
        ("smoking_genotype", smoking_genotype()),
        ("lifestyle_common_cause", lifestyle_common_cause()),
        ("lifestyle_marginalized", lifestyle_marginalized()),
        ("certified_chain", certified_chain()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validate::validate_diagram;

    #[test]
    fn every_fixture_is_valid() {
        for (name, d) in corpus() {
            let r = validate_diagram(&d);
            assert!(r.is_valid(), "{name}: {r}");
        }
    }
}
