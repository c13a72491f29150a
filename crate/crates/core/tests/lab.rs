use multiegs::cache::ChainCache;
use multiegs::chain::FiniteQuotient;
use multiegs::lab::{dependent_elements, exceptional_elements, CheckReport, Lab, Part, Verdict};
use multiegs::suite::{suite_data, suite_datum};
use multiegs::{BranchElement, Error, GroupWord, NumericalDatum, Vertex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GUARD: u64 = 1 << 16;

fn datum(name: &str) -> NumericalDatum {
    suite_datum(name).unwrap()
}

fn single(v: [u32; 2]) -> NumericalDatum {
    NumericalDatum::from_pairs(3, &[(1, &[&v])]).unwrap()
}

fn holds(r: &CheckReport, prefix: &str) -> bool {
    let c = r.certificates.iter().find(|c| c.name.starts_with(prefix)).unwrap_or_else(|| panic!("{prefix}\n{r}"));
    c.holds
}

fn excluded<T: std::fmt::Debug>(r: multiegs::Result<T>) -> bool {
    matches!(r, Err(Error::Excluded(_)) | Err(Error::Precondition(_)))
}

#[test]
fn branch_over_derived_examples() {
    let lab = Lab::new(GUARD);
    let r = lab.check_branch_over_derived(&datum("p3-12"), 3).unwrap();
    assert_eq!(r.verdict, Verdict::Verified);
    assert!(r.matches_prediction());

    let r = lab.check_branch_over_derived(&single([1, 1]), 3).unwrap();
    assert_eq!(r.verdict, Verdict::RefutedByWitness);
    assert!(r.matches_prediction());
    assert_eq!(r.witness.as_deref(), Some("psi([a,b[1,1]], 1, 1)"));

    let r = lab.check_branch_over_derived(&datum("p5-exceptional"), 3).unwrap();
    assert_eq!(r.verdict, Verdict::Verified);
}

#[test]
fn branch_over_gamma3_examples() {
    let lab = Lab::new(GUARD);
    let r = lab.check_branch_over_gamma3(&datum("p3-12"), 4).unwrap();
    assert_eq!(r.verdict, Verdict::Verified, "{r}");
    let r = lab.check_branch_over_gamma3(&datum("p5-symmetric"), 3).unwrap();
    assert_eq!(r.verdict, Verdict::Verified, "{r}");
    assert!(excluded(lab.check_branch_over_gamma3(&datum("p3-const-pair"), 4)));
    // For p = 3 every symmetric vector is constant.
    assert!(excluded(lab.check_branch_over_gamma3(&datum("p3-22"), 4)));
}

#[test]
fn key_examples() {
    let lab = Lab::new(GUARD);
    let r = lab.check_key(&datum("p3-torsion-pair"), 3).unwrap();
    assert_eq!(r.verdict, Verdict::Verified);
    assert!(excluded(lab.check_key(&datum("p3-const-pair"), 3)));

    // No level up to 4 separates [b^(1), b^(2)] from gamma3.
    let r = lab.check_key(&datum("p5-exceptional"), 4).unwrap();
    assert!(holds(&r, "[b[1,1],b[2,1]] inside gamma3"));
    assert_eq!(r.predicted, Some(Verdict::RefutedByWitness));
}

#[test]
fn subdirect_and_second_derived() {
    let lab = Lab::new(GUARD);
    let gs = datum("p3-12");
    assert_eq!(lab.check_subdirect(&gs, 3).unwrap().verdict, Verdict::Verified);
    assert_eq!(lab.check_second_derived(&gs, 3).unwrap().verdict, Verdict::Verified);
    let g2 = datum("p3-const-pair");
    assert!(excluded(lab.check_subdirect(&g2, 3)));
    assert!(excluded(lab.check_second_derived(&g2, 3)));
    assert_eq!(lab.check_second_derived(&datum("p5-exceptional"), 3).unwrap().verdict, Verdict::Verified);
    assert_eq!(lab.check_subdirect(&datum("p5-symmetric"), 3).unwrap().verdict, Verdict::Verified);
}

#[test]
fn csp_positive_examples() {
    let lab = Lab::new(GUARD);
    let r = lab.check_csp_positive(&datum("p3-12"), 3).unwrap();
    assert_eq!(r.verdict, Verdict::Verified);
    assert!(holds(&r, "level 2 kernel inside derived"));
    assert!(excluded(lab.check_csp_positive(&datum("p3-dependent"), 4)));
    assert!(lab.check_csp_positive(&datum("p3-12"), 2).is_err());
}

#[test]
fn dependent_witness_construction() {
    let d = datum("p3-dependent");
    let (c, t1, _) = dependent_elements(&d, 1).unwrap();
    assert_eq!(t1.to_string(), "b[2,1]");
    assert_eq!(c.to_string(), "b[1,1]");
    for n in 1..=4 {
        let (c, _, tn) = dependent_elements(&d, n).unwrap();
        let x = c.evaluate(&d, n).unwrap().invert().mul(&tn.evaluate(&d, n).unwrap());
        assert!(x.is_identity(), "n = {n}");
    }
    assert!(dependent_elements(&datum("p3-independent-pair"), 3).is_err());

    let lab = Lab::new(GUARD);
    let r = lab.csp_witness_dependent(&d, 3, 5).unwrap();
    for name in ["c^-1 t_n trivial", "abelianization", "t_n in t_1 G'", "c^-1 t_n in level n kernel"] {
        assert!(holds(&r, name), "{name}");
    }
    // The generators collapse in every finite abelianization, so G' of a
    // finite quotient cannot separate c from t_n.
    assert!(!holds(&r, "c^-1 t_n outside G'"));
    let q = FiniteQuotient::new(&d, 5, GUARD).unwrap();
    assert_eq!(q.log_order() - q.derived().log_order(), 2);
}

#[test]
fn exceptional_witness_examples() {
    let lab = Lab::new(GUARD);
    let e5 = datum("p5-exceptional");
    let r = lab.csp_witness_exceptional(&e5, 2, 4).unwrap();
    assert_eq!(r.verdict, Verdict::Verified, "{r}");
    let (name, _, t1) = exceptional_elements(&e5, 1).unwrap();
    assert_eq!(name, "[b[1,1],b[2,1]]");
    assert!(t1.evaluate(&e5, 1).unwrap().is_identity());
    let (_, _, t2) = exceptional_elements(&e5, 2).unwrap();
    assert_eq!(t1.evaluate(&e5, 4).unwrap(), t2.evaluate(&e5, 4).unwrap());
    assert!(excluded(exceptional_elements(&datum("p3-12"), 2)));
    assert!(excluded(exceptional_elements(&datum("p5-symmetric"), 2)));
}

#[test]
fn fractality_examples() {
    let lab = Lab::new(GUARD);
    let r = lab.check_fractality(&datum("p3-12"), 3).unwrap();
    assert_eq!(r.verdict, Verdict::Verified);
    assert!(holds(&r, "depth 1") && holds(&r, "depth 2"));

    let g2 = datum("p3-const-pair");
    for n in 2..=4 {
        assert!(holds(&lab.check_fractality(&g2, n).unwrap(), "depth 1"));
    }
    // Sections at depth 2 land in Q_{n-2}; the index-p defect needs n - 2 >= 2.
    assert!(holds(&lab.check_fractality(&g2, 3).unwrap(), "depth 2"));
    let r = lab.check_fractality(&g2, 4).unwrap();
    assert_eq!(r.verdict, Verdict::RefutedByWitness);
    assert!(!holds(&r, "depth 2"));
    assert!(r.witness.as_deref().unwrap().ends_with("index 3"));
}

#[test]
fn full_section_examples() {
    let lab = Lab::new(GUARD);
    let gs = datum("p3-12");
    let r = lab.find_full_section_vertex(&gs, &GroupWord::a(3, 1), 4, 6).unwrap();
    assert_eq!(r.verdict, Verdict::Verified);
    assert_eq!(r.witness.as_deref(), Some("vertex (1)"));

    let pair = datum("p3-independent-pair");
    let b = GroupWord::b(&pair, 1, 1, 1).unwrap();
    let r = lab.find_full_section_vertex(&pair, &b, 4, 6).unwrap();
    assert_eq!(r.verdict, Verdict::Verified);
    assert_eq!(r.witness.as_deref(), Some("vertex (1,1)"));

    assert!(excluded(lab.find_full_section_vertex(&gs, &GroupWord::identity(3), 4, 6)));
}

#[test]
fn normal_closure_examples() {
    let lab = Lab::new(GUARD);
    let gs = datum("p3-12");
    let r = lab.check_normal_closure(&gs, &GroupWord::a(3, 1), 5).unwrap();
    assert_eq!(r.verdict, Verdict::Verified);
    assert!(holds(&r, "G' blocks"));

    let e5 = datum("p5-exceptional");
    let x = GroupWord::parse("[a,b[1,1]]", &e5).unwrap();
    let r = lab.check_normal_closure(&e5, &x, 4).unwrap();
    assert_eq!(r.verdict, Verdict::Verified);
    assert!(holds(&r, "gamma3 blocks"));
    assert!(!r.certificates.iter().any(|c| c.name.starts_with("G' blocks")));

    assert!(excluded(lab.check_normal_closure(&gs, &GroupWord::identity(3), 5)));
}

#[test]
fn weak_csp_examples() {
    let lab = Lab::new(GUARD);
    let gs = datum("p3-12");
    for n in 1..=2 {
        assert_eq!(lab.check_weak_csp(&gs, n).unwrap().verdict, Verdict::Verified);
    }
    assert!(excluded(lab.check_weak_csp(&datum("p3-const-pair"), 1)));
}

#[test]
fn constant_vector_examples() {
    let lab = Lab::new(GUARD);
    let g2 = datum("p3-const-pair");
    let r = lab.constant_vector_analysis(&g2, 2, 5, 20).unwrap();
    assert_eq!(r.verdict, Verdict::Verified, "{r}");
    assert!(holds(&r, "K has index p"));
    assert!(holds(&r, "b^(j) (b^(k))^-1 inside K"));
    assert!(holds(&r, "K' meet K_1 equals K_1'"));
    let r = lab.constant_vector_analysis(&g2, 3, 5, 20).unwrap();
    assert_eq!(r.verdict, Verdict::Verified, "{r}");
    assert!(holds(&r, "star products inside K_1'"));
    assert_eq!(r.seed, Some(5));
    assert!(excluded(lab.constant_vector_analysis(&datum("p3-12"), 3, 5, 20)));
}

#[test]
fn classification_sweep_p3() {
    let lab = Lab::new(GUARD);
    for v in [[1, 0], [2, 0], [0, 1], [0, 2], [1, 1], [1, 2], [2, 1], [2, 2]] {
        let d = single(v);
        let r = lab.check_branch_over_derived(&d, 3).unwrap();
        assert_eq!(r.verdict == Verdict::Verified, d.classify().branch_over_derived, "{v:?}");
        assert_eq!(d.classify().branch_over_derived, v[0] != v[1], "{v:?}");
    }
}

#[test]
fn classification_sweep_p5_sampled() {
    let lab = Lab::new(GUARD);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut tested = 0;
    while tested < 20 {
        let mut fams = vec![Vec::new(); 5];
        for _ in 0..rng.gen_range(1..=2) {
            let j = rng.gen_range(0..5);
            fams[j].push((0..4).map(|_| rng.gen_range(0..5)).collect::<Vec<u32>>());
        }
        let Ok(d) = NumericalDatum::new(5, fams) else { continue };
        let r = lab.check_branch_over_derived(&d, 3).unwrap();
        assert_eq!(r.verdict == Verdict::Verified, d.classify().branch_over_derived, "{}", d.short());
        tested += 1;
    }
}

#[test]
fn verified_containments_are_monotone_in_level() {
    let lab = Lab::new(GUARD);
    for (name, d) in suite_data().into_iter().filter(|(_, d)| d.p() == 3 && !d.in_g_class()) {
        let top = lab.check_key(&d, 4).unwrap();
        if top.verdict == Verdict::Verified {
            assert_eq!(lab.check_key(&d, 3).unwrap().verdict, Verdict::Verified, "{name}");
        }
        let top = lab.check_branch_over_gamma3(&d, 4).unwrap();
        assert_eq!(top.verdict, Verdict::Verified, "{name}");
        assert_eq!(lab.check_branch_over_gamma3(&d, 3).unwrap().verdict, Verdict::Verified, "{name}");
        for k in 1..=3 {
            let top = lab.check_kernel_containment(&d, 4, k, Part::Derived).unwrap();
            if top.verdict == Verdict::Verified {
                let low = lab.check_kernel_containment(&d, 3, k, Part::Derived).unwrap();
                assert_eq!(low.verdict, Verdict::Verified, "{name} k={k}");
            }
        }
    }
}

#[test]
fn refutations_re_verify_from_scratch() {
    // psi([a,b], 1, 1) is not in St(1)' for the symmetric GGS group.
    let d = single([1, 1]);
    let w = GroupWord::parse("[a,b[1,1]]", &d).unwrap();
    let e = BranchElement::at_coordinate(3, 1, BranchElement::leaf(w));
    let q = FiniteQuotient::new(&d, 3, GUARD).unwrap();
    let st1 = q.level_kernel(1).unwrap().derived();
    assert!(!st1.contains(&e.evaluate(&d, 3).unwrap()));

    // The fractality defect of the constant pair at depth 2.
    let g2 = datum("p3-const-pair");
    let q = FiniteQuotient::new(&g2, 4, GUARD).unwrap();
    let q2 = FiniteQuotient::new(&g2, 2, GUARD).unwrap();
    let u = Vertex::new(3, vec![1, 1]).unwrap();
    let img = q.level_kernel(2).unwrap().section_image(&u);
    assert_eq!(q2.log_order() - img.log_order(), 1);

    // A level 2 kernel element of Q_4 outside gamma3 for the exceptional datum.
    let e5 = datum("p5-exceptional");
    let lab = Lab::new(GUARD);
    let r = lab.csp_witness_exceptional(&e5, 2, 4).unwrap();
    let text = r.witness.unwrap();
    let portrait = text.split_once("gamma3 at level 4:\n").unwrap().1;
    let g = multiegs::Portrait::from_text(portrait).unwrap();
    let q = FiniteQuotient::new(&e5, 4, GUARD).unwrap();
    assert!(q.level_kernel(2).unwrap().contains(&g));
    assert!(!q.gamma3().contains(&g));
}

#[test]
fn cache_does_not_change_reports() {
    let dir = tempfile::tempdir().unwrap();
    let plain = Lab::new(GUARD);
    let cold = Lab::new(GUARD).with_cache(ChainCache::new(dir.path()).unwrap());
    let warm = Lab::new(GUARD).with_cache(ChainCache::new(dir.path()).unwrap());
    let run = |lab: &Lab| -> Vec<String> {
        let gs = datum("p3-12");
        let e5 = datum("p5-exceptional");
        vec![
            lab.check_key(&gs, 4).unwrap().to_text(),
            lab.check_second_derived(&gs, 3).unwrap().to_text(),
            lab.check_fractality(&datum("p3-const-pair"), 4).unwrap().to_text(),
            lab.csp_witness_exceptional(&e5, 2, 4).unwrap().to_text(),
            lab.find_full_section_vertex(&gs, &GroupWord::a(3, 1), 4, 5).unwrap().to_text(),
        ]
    };
    let a = run(&plain);
    let b = run(&cold);
    assert!(std::fs::read_dir(dir.path()).unwrap().count() > 0);
    let c = run(&warm);
    assert_eq!(a, b);
    assert_eq!(b, c);
}

#[test]
fn degree_guard_is_reported() {
    let lab = Lab::new(100);
    assert!(matches!(lab.check_key(&datum("p3-12"), 5), Err(Error::DegreeGuard { .. })));
}
