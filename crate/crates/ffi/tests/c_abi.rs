use std::ffi::{c_char, CStr, CString};
use std::ptr;

use marked_groups_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn group(selector: &str) -> *mut MgGroup {
    let mut g = ptr::null_mut();
    let status = unsafe { mg_group_from_selector(c(selector).as_ptr(), &mut g) };
    assert_eq!(status, MgStatus::Ok, "{selector}: {}", last_error());
    g
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(mg_last_error_message()) }.to_string_lossy().into_owned()
}

fn take(s: *mut c_char) -> String {
    let out = unsafe { CStr::from_ptr(s) }.to_string_lossy().into_owned();
    unsafe { mg_string_free(s) };
    out
}

#[test]
fn groups_and_balls() {
    let free = group("free:2");
    let mut rank = 0;
    assert_eq!(unsafe { mg_group_rank(free, &mut rank) }, MgStatus::Ok);
    assert_eq!(rank, 2);

    let mut ball = ptr::null_mut();
    assert_eq!(unsafe { mg_ball_build(free, 3, 0, &mut ball) }, MgStatus::Ok);
    let (mut vertices, mut edges) = (0, 0);
    unsafe {
        assert_eq!(mg_ball_vertex_count(ball, &mut vertices), MgStatus::Ok);
        assert_eq!(mg_ball_edge_count(ball, &mut edges), MgStatus::Ok);
    }
    assert_eq!(vertices, 53);
    assert_eq!(edges, 2 * 52);

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { mg_ball_to_json(ball, &mut json) }, MgStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take(json)).unwrap();
    assert_eq!(v["vertices"].as_array().unwrap().len(), 53);

    let mut fp = ptr::null_mut();
    assert_eq!(unsafe { mg_ball_fingerprint(ball, &mut fp) }, MgStatus::Ok);
    assert_eq!(take(fp).len(), 64);

    unsafe {
        mg_ball_free(ball);
        mg_group_free(free);
    }
}

#[test]
fn decisions() {
    let z2 = group("abelian:2");
    let mut d = MgDecision::Unknown;
    unsafe {
        assert_eq!(mg_group_decide(z2, c("x1 x2 X1 X2").as_ptr(), &mut d), MgStatus::Ok);
        assert_eq!(d, MgDecision::Identity);
        assert_eq!(mg_group_decide(z2, c("x1 x2").as_ptr(), &mut d), MgStatus::Ok);
        assert_eq!(d, MgDecision::NonIdentity);
        assert_eq!(mg_group_decide(z2, c("x7").as_ptr(), &mut d), MgStatus::Parse);
        mg_group_free(z2);
    }
    assert!(!last_error().is_empty());
}

#[test]
fn comparisons() {
    let (f, z) = (group("free:2"), group("abelian:2"));
    let mut same = true;
    let mut radius = -7;
    unsafe {
        assert_eq!(mg_locally_isomorphic(f, z, 2, 0, &mut same), MgStatus::Ok);
        assert!(!same);
        assert_eq!(mg_agreement_radius(f, z, 4, 0, &mut radius), MgStatus::Ok);
        assert_eq!(radius, 1);
        assert_eq!(mg_kernel_agreement(f, z, 3, &mut same), MgStatus::Ok);
        assert!(same);
        assert_eq!(mg_kernel_agreement(f, z, 4, &mut same), MgStatus::Ok);
        assert!(!same);
        mg_group_free(f);
        mg_group_free(z);
    }
}

#[test]
fn small_cancellation_and_search() {
    let mut out = ptr::null_mut();
    let text = c("rank 2\nx1 x2 X1 X2\n");
    assert_eq!(unsafe { mg_check_sc(text.as_ptr(), 1, 6, &mut out) }, MgStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(v["satisfied"], false);
    assert_eq!(unsafe { mg_check_sc(text.as_ptr(), 1, 0, &mut out) }, MgStatus::Parse);

    let (z, z2) = (group("abelian:1"), group("abelian:2"));
    unsafe {
        assert_eq!(mg_qi_search(z, z2, 1, 14, 1000, &mut out), MgStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(v["status"], "NonExistent");
        assert_eq!(mg_qi_search(z, z, 1, 2, 1000, &mut out), MgStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(v["status"], "Found");
        mg_group_free(z);
        mg_group_free(z2);
    }
}

#[test]
fn errors_are_reported() {
    let mut g = ptr::null_mut();
    unsafe {
        assert_eq!(mg_group_from_selector(ptr::null(), &mut g), MgStatus::NullPointer);
        assert_eq!(mg_group_from_selector(c("nope:3").as_ptr(), &mut g), MgStatus::Parse);
        assert!(last_error().contains("nope"));
        let bad = [0xffu8, 0];
        assert_eq!(mg_group_from_selector(bad.as_ptr().cast(), &mut g), MgStatus::InvalidUtf8);
        assert_eq!(mg_group_from_selector(c("free:2").as_ptr(), ptr::null_mut()), MgStatus::NullPointer);
    }
    assert!(g.is_null());

    let free = group("free:3");
    let mut ball = ptr::null_mut();
    assert_eq!(unsafe { mg_ball_build(free, 12, 1000, &mut ball) }, MgStatus::Library);
    assert!(last_error().to_lowercase().contains("budget"), "{}", last_error());
    assert!(ball.is_null());
    let mut rank = 0;
    assert_eq!(unsafe { mg_group_rank(free, &mut rank) }, MgStatus::Ok);
    assert!(last_error().is_empty());
    unsafe {
        mg_group_free(free);
        mg_group_free(ptr::null_mut());
        mg_ball_free(ptr::null_mut());
        mg_string_free(ptr::null_mut());
    }
}

#[test]
fn header_is_generated() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/marked_groups.h")).unwrap();
    for name in ["mg_group_from_selector", "mg_ball_build", "mg_qi_search", "mg_last_error_message", "MgGroup"] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
