use std::ffi::{c_char, CString};
use std::ptr;

use stochgame_ffi::*;

fn data(name: &str) -> CString {
    CString::new(format!("{}/../core/data/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    let n = unsafe { sg_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf[..n.min(255)].iter().map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

fn load(name: &str) -> *mut SgGame {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { sg_game_load(data(name).as_ptr(), &mut g) }, SgStatus::Ok);
    g
}

#[test]
fn solve_and_simulate_case_study() {
    unsafe {
        let g = load("intrusion.json");
        let (mut k, mut a, mut b, mut n) = (0, 0, 0, 0);
        assert_eq!(sg_game_dims(g, &mut k, &mut a, &mut b, &mut n), SgStatus::Ok);
        assert_eq!((k, a, b, n), (2, 2, 2, 3));

        let mut inf = ptr::null_mut();
        let mut unf = ptr::null_mut();
        assert_eq!(sg_solve_informed(g, &mut inf), SgStatus::Ok);
        assert_eq!(sg_solve_uninformed(g, &mut unf), SgStatus::Ok);
        let (mut v, mut w) = (0.0, 0.0);
        sg_informed_value(inf, &mut v);
        sg_uninformed_value(unf, &mut w);
        assert!((v + 3.469888).abs() < 1e-6);
        assert!((v - w).abs() < 1e-9);

        let mut mix = [0.0; 2];
        assert_eq!(sg_informed_mix(inf, 1, 0, 1, mix.as_mut_ptr(), 2), SgStatus::Ok);
        assert!((mix[0] - 0.1875).abs() < 1e-4);
        assert_eq!(sg_uninformed_mix(unf, 1, 0, mix.as_mut_ptr(), 2), SgStatus::Ok);
        assert!((mix[0] - 0.6653).abs() < 1e-4);

        let mut alpha = [0.0; 2];
        assert_eq!(sg_uninformed_initial_regret(unf, alpha.as_mut_ptr(), 2), SgStatus::Ok);
        let mut dual = 0.0;
        assert_eq!(sg_dual_value(g, 3, alpha.as_ptr(), 2, &mut dual), SgStatus::Ok);
        assert!(dual.abs() < 1e-6, "{dual}");

        let mut r1 = SgSimReport::default();
        let mut r2 = SgSimReport::default();
        assert_eq!(sg_simulate(g, inf, unf, 500, 11, &mut r1), SgStatus::Ok);
        assert_eq!(sg_simulate(g, inf, unf, 500, 11, &mut r2), SgStatus::Ok);
        assert_eq!(r1.mean.to_bits(), r2.mean.to_bits());
        assert!((r1.game_value - v).abs() < 1e-6);

        sg_informed_free(inf);
        sg_uninformed_free(unf);
        sg_game_free(g);
    }
}

#[test]
fn derived_games() {
    unsafe {
        let g = load("intrusion.json");
        let mut short = ptr::null_mut();
        assert_eq!(sg_game_with_horizon(g, 1, &mut short), SgStatus::Ok);
        let mut inf = ptr::null_mut();
        sg_solve_informed(short, &mut inf);
        let mut v = 0.0;
        sg_informed_value(inf, &mut v);
        assert!((v + 1.03125).abs() < 1e-9);

        let p = [1.0, 0.0];
        let mut pure = ptr::null_mut();
        assert_eq!(sg_game_with_initial(g, p.as_ptr(), 2, &mut pure), SgStatus::Ok);
        let bad = [0.7, 0.7];
        let mut never = ptr::null_mut();
        assert_eq!(sg_game_with_initial(g, bad.as_ptr(), 2, &mut never), SgStatus::Validation);
        assert!(never.is_null());

        sg_informed_free(inf);
        sg_game_free(short);
        sg_game_free(pure);
        sg_game_free(g);
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(sg_game_from_json(ptr::null(), &mut g), SgStatus::NullPointer);
        assert!(last_error().contains("null"));

        let text = CString::new("{ nope").unwrap();
        assert_eq!(sg_game_from_json(text.as_ptr(), &mut g), SgStatus::Parse);
        assert!(last_error().starts_with("malformed"));

        let missing = CString::new("/nonexistent/game.json").unwrap();
        assert_eq!(sg_game_load(missing.as_ptr(), &mut g), SgStatus::Io);

        let g = load("intrusion.json");
        let mut inf = ptr::null_mut();
        sg_solve_informed(g, &mut inf);
        let mut one = [0.0; 1];
        assert_eq!(sg_informed_mix(inf, 1, 0, 0, one.as_mut_ptr(), 1), SgStatus::BufferTooSmall);
        assert_eq!(sg_informed_mix(inf, 4, 0, 0, one.as_mut_ptr(), 2), SgStatus::IndexOutOfRange);
        assert_eq!(sg_informed_mix(inf, 2, 2, 0, one.as_mut_ptr(), 2), SgStatus::IndexOutOfRange);
        assert_eq!(sg_dual_value(g, 3, one.as_ptr(), 1, one.as_mut_ptr()), SgStatus::Validation);
        assert_eq!(sg_simulate(g, inf, ptr::null(), 10, 0, ptr::null_mut()), SgStatus::NullPointer);

        // success clears the slot
        let mut v = 0.0;
        assert_eq!(sg_informed_value(inf, &mut v), SgStatus::Ok);
        assert_eq!(sg_last_error_message(ptr::null_mut(), 0), 0);

        sg_informed_free(inf);
        sg_game_free(g);
        sg_game_free(ptr::null_mut());
    }
}

#[test]
fn truncated_error_message() {
    unsafe {
        let mut g = ptr::null_mut();
        sg_game_from_json(ptr::null(), &mut g);
        let mut buf = [1 as c_char; 4];
        let full = sg_last_error_message(buf.as_mut_ptr(), buf.len());
        assert!(full > 3);
        assert_eq!(buf[3], 0);
    }
}
