use pants_atlas::curve_model::{CurveCode, CyclicInterval, Side};
use pants_atlas::genus::{genus2_family, ConcatCode};
use pants_atlas::labelled_sphere::gen_lambda;
use pants_atlas::polygon::ChordGraph;
use pants_atlas::unlabelled_sphere::{random_index_set, IndexFamily, RandomConstructionParams};

#[test]
fn curve_codes_round_trip() {
    for c in gen_lambda(5, 1, 5).unwrap().codes {
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<CurveCode>(&text).unwrap(), c);
    }
    let c = CurveCode::new(4, [1, 4], [(2, Side::Above), (3, Side::Below)]).unwrap();
    assert_eq!(c.to_string(), serde_json::from_str::<CurveCode>(&serde_json::to_string(&c).unwrap()).unwrap().to_string());
}

#[test]
fn concat_codes_round_trip() {
    for c in genus2_family(3).unwrap().codes() {
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<ConcatCode>(&text).unwrap(), c, "{text}");
    }
}

#[test]
fn chord_graphs_are_validated_on_read() {
    let ok: ChordGraph = serde_json::from_str(r#"{"n":5,"edges":[[1,3],[2,5]]}"#).unwrap();
    assert_eq!(ok.edges().len(), 2);
    for bad in [
        r#"{"n":5,"edges":[[1,1]]}"#,
        r#"{"n":5,"edges":[[1,6]]}"#,
        r#"{"n":5,"edges":[[1,2],[2,1]]}"#,
    ] {
        assert!(serde_json::from_str::<ChordGraph>(bad).is_err(), "{bad}");
    }
}

#[test]
fn index_families_keep_provenance() {
    let fam = random_index_set(RandomConstructionParams { n: 50, c: 1.5, seed: 9 }).unwrap();
    let text = serde_json::to_string(&fam).unwrap();
    let back: IndexFamily = serde_json::from_str(&text).unwrap();
    assert_eq!(back, fam);
    assert_eq!(back.seed, Some(9));
    assert!(serde_json::from_str::<IndexFamily>(r#"{"n":5,"s":[1],"bogus":0}"#).is_err());
}

#[test]
fn cyclic_intervals_round_trip() {
    let a = CyclicInterval::new(7, 6, 9);
    assert_eq!((a.i, a.j), (6, 2));
    let back: CyclicInterval = serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
    assert_eq!(back, a);
}
