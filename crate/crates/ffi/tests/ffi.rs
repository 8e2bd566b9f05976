use std::ffi::{CStr, CString};
use std::ptr;

use normforge_ffi::*;

fn cs(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take(p: *mut std::ffi::c_char) -> String {
    let s = CStr::from_ptr(p).to_str().unwrap().to_owned();
    nf_string_free(p);
    s
}

unsafe fn last_error() -> String {
    CStr::from_ptr(nf_last_error_message()).to_str().unwrap().to_owned()
}

const BALL: &str = r#"{"dim":2,"generators":[["2","1"],["-2","-1"],["0","1"],["0","-1"]]}"#;

#[test]
fn gauge_through_handle() {
    unsafe {
        let mut ball = ptr::null_mut();
        assert_eq!(nf_ball_from_json(cs(BALL).as_ptr(), &mut ball), NfStatus::Ok);
        assert_eq!(nf_ball_dim(ball), 2);
        let mut out = ptr::null_mut();
        assert_eq!(nf_ball_gauge(ball, cs(r#"["2","0"]"#).as_ptr(), &mut out), NfStatus::Ok);
        assert_eq!(take(out), "2/1");
        let mut inside = false;
        assert_eq!(nf_ball_contains(ball, cs(r#"["1","1/2"]"#).as_ptr(), &mut inside), NfStatus::Ok);
        assert!(inside);
        nf_ball_free(ball);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    unsafe {
        let mut ball = ptr::null_mut();
        assert_eq!(nf_ball_from_json(cs("{").as_ptr(), &mut ball), NfStatus::Parse);
        assert!(!last_error().is_empty());
        assert_eq!(nf_ball_from_json(ptr::null(), &mut ball), NfStatus::NullPointer);

        assert_eq!(nf_ball_from_json(cs(BALL).as_ptr(), &mut ball), NfStatus::Ok);
        let mut out = ptr::null_mut();
        let st = nf_ball_gauge(ball, cs(r#"["1","2","3"]"#).as_ptr(), &mut out);
        assert_eq!(st, NfStatus::DimensionMismatch);
        assert!(last_error().contains("dimension"));
        assert_eq!(nf_ball_gauge(ball, cs(r#"["1","0"]"#).as_ptr(), ptr::null_mut()), NfStatus::NullPointer);
        nf_ball_free(ball);
        nf_ball_free(ptr::null_mut());
        nf_string_free(ptr::null_mut());
    }
}

#[test]
fn rho_enclosure() {
    unsafe {
        let (mut lo, mut hi) = (ptr::null_mut(), ptr::null_mut());
        let st = nf_rho(cs("1").as_ptr(), cs("-1/2").as_ptr(), cs("1/3").as_ptr(), cs("1/1000000").as_ptr(), &mut lo, &mut hi);
        assert_eq!(st, NfStatus::Ok, "{}", last_error());
        let lo: normforge::Rat = take(lo).parse().unwrap();
        let hi: normforge::Rat = take(hi).parse().unwrap();
        assert!(lo <= hi);
        assert!(hi.clone() - lo <= "1/1000000".parse().unwrap());
        // ρ(r, s, t) ≥ (|r| + |s|)/4 with equality away from the flat part.
        assert!(hi >= "3/8".parse().unwrap());
    }
}

#[test]
fn space_eval_matches_ball_gauge() {
    unsafe {
        let doc = format!(r#"{{"dim":2,"norm":{{"kind":"polytope","ball":{BALL}}}}}"#);
        let mut space = ptr::null_mut();
        let st = nf_space_from_json(cs(&doc).as_ptr(), &mut space);
        if st != NfStatus::Ok {
            panic!("{}", last_error());
        }
        let mut out = ptr::null_mut();
        assert_eq!(nf_space_eval(space, cs(r#"["2","0"]"#).as_ptr(), cs("1/1000").as_ptr(), &mut out), NfStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(v["exact"], "2/1");
        nf_space_free(space);
    }
}

#[test]
fn verify_rho_suite() {
    unsafe {
        let mut report = ptr::null_mut();
        let mut passed = false;
        assert_eq!(nf_verify(cs("rho").as_ptr(), 7, 20, &mut report, &mut passed), NfStatus::Ok, "{}", last_error());
        assert!(passed);
        let v: serde_json::Value = serde_json::from_str(&take(report)).unwrap();
        assert_eq!(v["suites"][0]["suite"], "rho-properties");
        assert_eq!(nf_verify(cs("nope").as_ptr(), 7, 20, &mut report, &mut passed), NfStatus::InvalidArgument);
    }
}
