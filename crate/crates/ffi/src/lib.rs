//! C ABI for greencomp.
//!
//! Every fallible call returns a `GcStatus`; on failure the message is
//! kept per thread and read with `gc_last_error_message`. Handles are
//! opaque and must be released with their matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use greencomp::engine::RunResult;
use greencomp::power::{bs_input_power, PowerModelParams};
use greencomp::radio::{path_loss, ChannelParams};
use greencomp::{run_monte_carlo, Error, ScenarioConfig};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Io = 4,
    OutOfRange = 5,
    Internal = 6,
}

/// Scenario configuration handle.
pub struct GcConfig(ScenarioConfig);

/// Monte Carlo result handle.
pub struct GcResult(RunResult);

/// Mean values for one simulated hour. Undefined ratios are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct GcHour {
    pub hour: u32,
    pub throughput_bps: f64,
    pub grid_w: f64,
    pub solar_w: f64,
    pub demand_w: f64,
    pub conventional_w: f64,
    pub savings_pct: f64,
    pub savings_conv_pct: f64,
    pub ee_bits_per_j: f64,
    pub eci_j_per_bit: f64,
}

/// Run-level totals with standard errors where they exist.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct GcTotals {
    pub grid_wh: f64,
    pub grid_wh_stderr: f64,
    pub solar_wh: f64,
    pub demand_wh: f64,
    pub shared_wh: f64,
    pub line_loss_wh: f64,
    pub throughput_bps: f64,
    pub savings_pct: f64,
    pub ee_bits_per_j: f64,
    pub ee_bits_per_j_stderr: f64,
    pub eci_j_per_bit: f64,
    pub undefined_ee_hours: u32,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).unwrap_or_default());
}

fn fail(status: GcStatus, msg: impl Into<String>) -> GcStatus {
    set_error(msg);
    status
}

fn status_of(e: &Error) -> GcStatus {
    match e {
        Error::Parse { .. } => GcStatus::Parse,
        Error::Io { .. } => GcStatus::Io,
        Error::UnknownSite(_) => GcStatus::OutOfRange,
        Error::Plot(_) => GcStatus::Internal,
        _ => GcStatus::InvalidArgument,
    }
}

/// Runs `f`, turning errors and panics into a status and stored message.
fn guarded(f: impl FnOnce() -> Result<(), (GcStatus, String)>) -> GcStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GcStatus::Ok,
        Ok(Err((status, msg))) => fail(status, msg),
        Err(_) => fail(GcStatus::Internal, "internal panic"),
    }
}

fn lib_err(e: Error) -> (GcStatus, String) {
    (status_of(&e), e.to_string())
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (GcStatus, String)> {
    if p.is_null() {
        return Err((GcStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (GcStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

fn null(what: &str) -> (GcStatus, String) {
    (GcStatus::NullPointer, format!("{what} is null"))
}

unsafe fn emit<T>(out: *mut *mut T, value: T) -> Result<(), (GcStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Copies the calling thread's last error message into `buf` (always NUL
/// terminated when `len > 0`) and returns the full message length.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn gc_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let bytes = e.borrow();
        let bytes = bytes.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn gc_config_default(out: *mut *mut GcConfig) -> GcStatus {
    guarded(|| emit(out, GcConfig(ScenarioConfig::default())))
}

/// Loads a `key = value` scenario file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn gc_config_load(path: *const c_char, out: *mut *mut GcConfig) -> GcStatus {
    guarded(|| {
        let path = text(path, "path")?;
        let cfg = ScenarioConfig::load(Path::new(path)).map_err(lib_err)?;
        emit(out, GcConfig(cfg))
    })
}

/// Parses scenario text; relative profile paths resolve against the
/// working directory.
///
/// # Safety
/// `config_text` must be a NUL-terminated string and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn gc_config_parse(config_text: *const c_char, out: *mut *mut GcConfig) -> GcStatus {
    guarded(|| {
        let body = text(config_text, "config text")?;
        let cfg = ScenarioConfig::parse(body, "<ffi>", Path::new(".")).map_err(lib_err)?;
        emit(out, GcConfig(cfg))
    })
}

/// Sets one configuration key using the scenario file syntax. The handle
/// is left unchanged when the new value is rejected.
///
/// # Safety
/// `cfg` must be a live handle; `key` and `value` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn gc_config_set(cfg: *mut GcConfig, key: *const c_char, value: *const c_char) -> GcStatus {
    guarded(|| {
        let cfg = cfg.as_mut().ok_or_else(|| null("config"))?;
        let key = text(key, "key")?.trim().to_ascii_lowercase();
        let value = text(value, "value")?;
        if value.contains('\n') {
            return Err((GcStatus::InvalidArgument, "value must be a single line".into()));
        }
        // alpha and line_loss_pct describe the same setting
        let clashes: &[&str] = match key.as_str() {
            "alpha" | "line_loss_pct" => &["alpha", "line_loss_pct"],
            "solar_profile" | "solar_profile_wh" => &["solar_profile", "solar_profile_wh"],
            "traffic_profile" | "traffic_profile_values" => &["traffic_profile", "traffic_profile_values"],
            _ => &[],
        };
        let mut body: String = cfg
            .0
            .to_config_string()
            .lines()
            .filter(|l| {
                let k = l.split('=').next().unwrap_or("").trim();
                k != key && !clashes.contains(&k)
            })
            .map(|l| format!("{l}\n"))
            .collect();
        body.push_str(&format!("{key} = {value}\n"));
        cfg.0 = ScenarioConfig::parse(&body, "<ffi>", Path::new(".")).map_err(lib_err)?;
        Ok(())
    })
}

/// Writes the configuration as scenario text into `buf` (NUL terminated
/// when `len > 0`) and returns the full text length.
///
/// # Safety
/// `cfg` must be a live handle; `buf` null or `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn gc_config_to_string(cfg: *const GcConfig, buf: *mut c_char, len: usize) -> usize {
    let Some(cfg) = cfg.as_ref() else {
        set_error("config is null");
        return 0;
    };
    let s = cfg.0.to_config_string();
    if !buf.is_null() && len > 0 {
        let n = s.len().min(len - 1);
        ptr::copy_nonoverlapping(s.as_ptr().cast(), buf, n);
        *buf.add(n) = 0;
    }
    s.len()
}

/// # Safety
/// `cfg` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gc_config_free(cfg: *mut GcConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Runs the Monte Carlo simulation for `cfg`.
///
/// # Safety
/// `cfg` must be a live handle and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn gc_run(cfg: *const GcConfig, out: *mut *mut GcResult) -> GcStatus {
    guarded(|| {
        let cfg = cfg.as_ref().ok_or_else(|| null("config"))?;
        let result = run_monte_carlo(&cfg.0).map_err(lib_err)?;
        emit(out, GcResult(result))
    })
}

/// Number of simulated hours in `res`, or 0 for a null handle.
///
/// # Safety
/// `res` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gc_result_hours(res: *const GcResult) -> usize {
    res.as_ref().map_or(0, |r| r.0.hours.len())
}

/// # Safety
/// `res` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gc_result_hour(res: *const GcResult, index: usize, out: *mut GcHour) -> GcStatus {
    guarded(|| {
        let res = res.as_ref().ok_or_else(|| null("result"))?;
        let out = out.as_mut().ok_or_else(|| null("output pointer"))?;
        let h = res.0.hours.get(index).ok_or_else(|| {
            (
                GcStatus::OutOfRange,
                format!("hour {index} outside 0..{}", res.0.hours.len()),
            )
        })?;
        *out = GcHour {
            hour: h.hour as u32,
            throughput_bps: h.throughput_bps.mean,
            grid_w: h.grid_w.mean,
            solar_w: h.solar_w.mean,
            demand_w: h.demand_w.mean,
            conventional_w: h.conventional_w.mean,
            savings_pct: h.savings_solar_pct.mean,
            savings_conv_pct: h.savings_conv_pct.mean,
            ee_bits_per_j: h.ee_bits_per_j.map_or(f64::NAN, |e| e.mean),
            eci_j_per_bit: h.eci_j_per_bit.unwrap_or(f64::NAN),
        };
        Ok(())
    })
}

/// # Safety
/// `res` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gc_result_totals(res: *const GcResult, out: *mut GcTotals) -> GcStatus {
    guarded(|| {
        let t = &res.as_ref().ok_or_else(|| null("result"))?.0.totals;
        let out = out.as_mut().ok_or_else(|| null("output pointer"))?;
        *out = GcTotals {
            grid_wh: t.grid_wh.mean,
            grid_wh_stderr: t.grid_wh.stderr,
            solar_wh: t.solar_wh.mean,
            demand_wh: t.demand_wh.mean,
            shared_wh: t.shared_wh.mean,
            line_loss_wh: t.line_loss_wh.mean,
            throughput_bps: t.throughput_bps.mean,
            savings_pct: t.savings_solar_pct.mean,
            ee_bits_per_j: t.ee_bits_per_j.mean,
            ee_bits_per_j_stderr: t.ee_bits_per_j.stderr,
            eci_j_per_bit: t.eci_j_per_bit,
            undefined_ee_hours: t.undefined_ee_hours as u32,
        };
        Ok(())
    })
}

/// # Safety
/// `res` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gc_result_free(res: *mut GcResult) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}

/// Base station input power in watts at `load` in [0, 1] with default
/// hardware parameters; a load of 0 means the station sleeps.
///
/// # Safety
/// `out_w` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gc_bs_input_power(load: f64, out_w: *mut f64) -> GcStatus {
    guarded(|| {
        let out = out_w.as_mut().ok_or_else(|| null("output pointer"))?;
        *out = bs_input_power(&PowerModelParams::default(), load).map_err(lib_err)?;
        Ok(())
    })
}

/// Path loss in dB at `distance_m` with default channel parameters.
///
/// # Safety
/// `out_db` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gc_path_loss_db(distance_m: f64, out_db: *mut f64) -> GcStatus {
    guarded(|| {
        let out = out_db.as_mut().ok_or_else(|| null("output pointer"))?;
        *out = path_loss(&ChannelParams::default(), distance_m).map_err(lib_err)?;
        Ok(())
    })
}
