use dfemlab_web::{cantilever, edge_crack, kink_angle};

#[test]
fn dfem_cantilever_beats_fem() {
    let f = cantilever("fem", 10, 3).unwrap();
    let d = cantilever("dfem", 10, 3).unwrap();
    assert_eq!(f.nodes.len(), 44);
    assert_eq!(d.displacement.len(), d.nodes.len());
    assert!(d.r_e < f.r_e);
    // the tip deflects downward under a downward load
    let tip = d.nodes.iter().position(|p| p[0] == 48.0 && p[1] == 0.0);
    assert!(tip.is_none_or(|i| d.displacement[i][1] < 0.0));
    assert!(cantilever("xfem", 10, 3).is_err());
    assert!(cantilever("dfem", 0, 3).is_err());
}

#[test]
fn edge_crack_mode_one() {
    let f = edge_crack("xdfem", 11, 1.0, 0.0).unwrap();
    assert!((f.k1.unwrap() - 1.0).abs() < 0.05, "{:?}", f.k1);
    assert!(f.k2.unwrap().abs() < 0.02);
    assert_eq!(f.crack.as_ref().unwrap().len(), 2);
    let json = serde_json::to_string(&f).unwrap();
    assert!(json.contains("\"triangles\""));
    assert!(edge_crack("xdfem", 12, 1.0, 0.0).is_err());
    assert!(edge_crack("fem", 11, 1.0, 0.0).is_err());
}

#[test]
fn kink_angles() {
    assert!(kink_angle(1.0, 0.0).unwrap().abs() < 1e-12);
    assert!((kink_angle(0.0, 1.0).unwrap() + 70.528_779_365_509_3).abs() < 1e-9);
    assert!(kink_angle(0.0, 0.0).is_err());
}
