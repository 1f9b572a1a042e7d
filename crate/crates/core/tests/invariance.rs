use cylscale::assembly::Grid;
use cylscale::eigen::EigenRequest;
use cylscale::geometry::{threshold, EndMap, EndPreset, ProfileKind};
use cylscale::scaling::ProfileParams;
use cylscale::spectral::{detect_resonances, ResonanceSearch, Tag, Window};
use cylscale::C64;

fn search(end: EndMap) -> ResonanceSearch {
    let nu2 = threshold(2);
    let mut s = ResonanceSearch::new(
        end,
        Grid::new(12.0, 96, 12).unwrap(),
        vec![C64::new(0.0, 0.15), C64::new(0.0, 0.3)],
        vec![ProfileParams { r: 4.0, r_tilde: 6.0 }, ProfileParams { r: 5.0, r_tilde: 8.0 }],
        Window {
            re_min: 0.0,
            re_max: nu2,
            im_min: -nu2,
            im_max: nu2,
        },
    );
    s.eigen = EigenRequest::near(C64::new(0.5 * nu2, 0.0), 80);
    s
}

#[test]
fn widening_guide_candidates_are_scaling_independent() {
    let end = EndMap::new(EndPreset::ProfileProduct {
        phi: ProfileKind::One,
        psi: ProfileKind::ExpDecay,
        s: 1.0,
    })
    .unwrap();
    let out = detect_resonances(&search(end)).unwrap();
    let stable: Vec<_> = out
        .report
        .entries
        .iter()
        .filter(|e| matches!(e.tag, Tag::Discrete | Tag::Resonance))
        .filter(|e| e.stability.is_some())
        .collect();
    for e in &stable {
        let s = e.stability.unwrap();
        assert_eq!(s.variants, 4);
        assert!(s.drift < s.tolerance && s.refined_drift <= s.drift, "{e:?}");
        assert!(e.mu.im <= 1e-6 * (1.0 + e.mu.norm()), "{e:?}");
    }
    // bound state below ν₁
    let bound: Vec<_> = stable.iter().filter(|e| e.tag == Tag::Discrete).collect();
    assert_eq!(bound.len(), 1);
    assert!((bound[0].mu.re - 7.1979).abs() < 1e-3, "{:?}", bound[0]);
    // resonances between the first two thresholds, well away from the rays
    let far: Vec<_> = stable
        .iter()
        .filter(|e| e.tag == Tag::Resonance && e.stability.unwrap().min_ray_distance > 1.0)
        .collect();
    assert_eq!(far.len(), 2, "{far:?}");
    for e in far {
        assert!(e.mu.re > threshold(1) && e.mu.re < threshold(2));
        assert!(e.mu.im < -0.1);
    }
}

#[test]
fn straight_guide_has_no_stable_candidates() {
    let out = detect_resonances(&search(EndMap::new(EndPreset::Straight).unwrap())).unwrap();
    assert_eq!(out.report.count(Tag::Resonance), 0);
    assert!(out
        .report
        .entries
        .iter()
        .filter(|e| e.tag == Tag::Discrete)
        .all(|e| e.stability.is_none()));
}
