mod common;

use num_rational::Ratio;
use spir_core::privacy::{
    enumerate_views, verify_database_privacy, verify_user_privacy, AuditConfig, AuditMode, DistTable, Mutant, ViewKind,
};
use spir_core::scheme::ParamsSpec;

use common::{label, params, small};

fn cfg() -> AuditConfig {
    AuditConfig::default()
}

#[test]
fn two_colluders_see_uniform_queries() {
    let p = params(4, 2, 2, 2, 5);
    for subset in [[0, 1], [0, 3], [2, 3]] {
        let t = enumerate_views(&p, 0, &subset, false, Mutant::None, &cfg()).unwrap();
        assert!(t.is_uniform_over(5u128.pow(8)), "{subset:?}");
        assert_eq!(t.mass(), Ratio::from_integer(1));
    }
}

#[test]
fn query_tables_agree_across_indexes() {
    let p = small(3, 1, 2, 2, 3);
    for subset in [[0, 1], [0, 2], [1, 2]] {
        let a = enumerate_views(&p, 0, &subset, true, Mutant::None, &cfg()).unwrap();
        let b = enumerate_views(&p, 1, &subset, true, Mutant::None, &cfg()).unwrap();
        assert!(a.same_distribution(&b));
        assert_eq!(a.total(), 3u64.pow(8));
    }
}

#[test]
fn unrandomized_queries_reveal_the_index() {
    let p = params(2, 1, 1, 2, 3);
    let a = enumerate_views(&p, 0, &[0], false, Mutant::NoRandomization, &cfg()).unwrap();
    let b = enumerate_views(&p, 1, &[0], false, Mutant::NoRandomization, &cfg()).unwrap();
    assert_eq!(a.support_len(), 1);
    assert!(a.first_difference(&b).is_some());
}

#[test]
fn structural_pass_agrees_with_exhaustive() {
    let configs = [
        params(2, 1, 1, 2, 3),
        small(3, 1, 1, 2, 3),
        small(3, 2, 1, 2, 3),
        small(3, 1, 2, 2, 3),
        params(4, 1, 1, 2, 5),
        params(4, 2, 1, 2, 5),
        params(4, 1, 3, 2, 5),
    ];
    for p in configs {
        let s = verify_user_privacy(&p, AuditMode::Structural, Mutant::None, &cfg()).unwrap();
        let e = verify_user_privacy(&p, AuditMode::Exhaustive, Mutant::None, &cfg()).unwrap();
        assert!(s.passed() && e.passed(), "{}", label(&p));
    }
}

#[test]
fn database_privacy_on_enumerable_configs() {
    for p in [params(2, 1, 1, 2, 3), small(3, 2, 1, 2, 3), small(3, 1, 1, 2, 3), small(3, 1, 2, 2, 3)] {
        let r = verify_database_privacy(&p, Mutant::None, &cfg()).unwrap();
        assert!(r.passed(), "{}\n{r}", label(&p));
        assert_eq!(r.view, ViewKind::Database);
        let m = verify_database_privacy(&p, Mutant::NoMask, &cfg()).unwrap();
        assert!(!m.passed() && m.mutual_information_bits > 0.0, "{}", label(&p));
        let s = verify_database_privacy(&p, Mutant::ShortMask, &cfg()).unwrap();
        assert!(!s.passed() && s.mutual_information_bits > 0.0, "{}", label(&p));
    }
}

#[test]
fn single_file_database_privacy_is_vacuous() {
    let mut spec = ParamsSpec::new(3, 1, 1, 1, 5);
    spec.allow_single_file = true;
    let r = verify_database_privacy(&spec.build().unwrap(), Mutant::None, &cfg()).unwrap();
    assert!(r.passed());
    assert_eq!(r.enumeration_size, 0);
}

#[test]
fn tables_are_normalised() {
    let p = small(3, 1, 1, 2, 3);
    let t = enumerate_views(&p, 1, &[2], true, Mutant::None, &cfg()).unwrap();
    assert_eq!(t.mass(), Ratio::from_integer(1));
    let mut merged = DistTable::new();
    merged.merge(t.clone());
    assert!(merged.same_distribution(&t));
}
