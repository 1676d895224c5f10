//! C ABI over `nestocc`.
//!
//! Environments, profiles and trees are opaque heap handles released with the
//! matching `*_free`. Every fallible call returns a [`NestoccStatus`]; on
//! failure the message is kept per thread and read back with
//! [`nestocc_last_error_message`]. Panics never cross the boundary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use nestocc::environment::{EnvironmentSpec, StickLaw};
use nestocc::occupancy::{self, PoissonKernel};
use nestocc::rng::stream;
use nestocc::spectral::{Property, RegimeLabel, SpectralProfile};
use nestocc::tree::WeightedTree;
use nestocc::Error;

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NestoccStatus {
    Ok = 0,
    NullPointer = 1,
    Config = 2,
    Domain = 3,
    NoThetaStar = 4,
    SlopeOutOfRange = 5,
    Lattice = 6,
    MemoryBudget = 7,
    Refused = 8,
    Io = 9,
    Panic = 10,
}

/// Bits of the regime mask written by [`nestocc_classify`].
pub const NESTOCC_REGIME_I: u32 = 1 << 0;
pub const NESTOCC_REGIME_IIA: u32 = 1 << 1;
pub const NESTOCC_REGIME_IIB: u32 = 1 << 2;
pub const NESTOCC_REGIME_IIC: u32 = 1 << 3;
pub const NESTOCC_REGIME_III: u32 = 1 << 4;
pub const NESTOCC_REGIME_IV: u32 = 1 << 5;
pub const NESTOCC_REGIME_FREEZING: u32 = 1 << 6;
pub const NESTOCC_REGIME_OUT_OF_RANGE: u32 = 1 << 7;

/// Kernel selectors for [`nestocc_poisson_kernel`].
pub const NESTOCC_KERNEL_PHI: i32 = 0;
pub const NESTOCC_KERNEL_M: i32 = 1;
pub const NESTOCC_KERNEL_V: i32 = 2;
pub const NESTOCC_KERNEL_W: i32 = 3;
pub const NESTOCC_KERNEL_PSI: i32 = 4;

/// Opaque environment.
pub struct NestoccEnv(EnvironmentSpec);

/// Opaque spectral profile.
pub struct NestoccProfile(SpectralProfile);

/// Opaque materialized tree.
pub struct NestoccTree(WeightedTree);

/// Critical constants; absent values are NaN.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct NestoccCriticalConstants {
    pub theta_star: f64,
    pub v: f64,
    pub theta_sub: f64,
    pub a_star: f64,
    pub a_c: f64,
    /// `+inf` under property A.
    pub a_bar: f64,
    pub a_bar_minus: f64,
    pub slope_at_two: f64,
    pub slope_at_zero: f64,
    /// 0 for property A, 1 for property B.
    pub property_b: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> NestoccStatus {
    match e {
        Error::Config(_) | Error::Parse(_) => NestoccStatus::Config,
        Error::Domain(_) => NestoccStatus::Domain,
        Error::NoThetaStar { .. } => NestoccStatus::NoThetaStar,
        Error::SlopeOutOfRange { .. } => NestoccStatus::SlopeOutOfRange,
        Error::Lattice(_) => NestoccStatus::Lattice,
        Error::MemoryBudget { .. } => NestoccStatus::MemoryBudget,
        Error::Refused(_) => NestoccStatus::Refused,
        Error::Io(_) | Error::Csv(_) => NestoccStatus::Io,
    }
}

fn guard<F: FnOnce() -> Result<(), NestoccStatus>>(f: F) -> NestoccStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NestoccStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside nestocc".into());
            NestoccStatus::Panic
        }
    }
}

fn lift<T>(r: nestocc::Result<T>) -> Result<T, NestoccStatus> {
    r.map_err(|e| {
        let s = status_of(&e);
        set_error(e.to_string());
        s
    })
}

unsafe fn arg<'a, T>(p: *const T) -> Result<&'a T, NestoccStatus> {
    p.as_ref().ok_or_else(|| {
        set_error("null pointer argument".into());
        NestoccStatus::NullPointer
    })
}

unsafe fn put<T>(out: *mut T, v: T) -> Result<(), NestoccStatus> {
    if out.is_null() {
        set_error("null output pointer".into());
        return Err(NestoccStatus::NullPointer);
    }
    out.write(v);
    Ok(())
}

/// Copies the last error message of this thread into `buf` (NUL terminated,
/// truncated to `len`). Returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn nestocc_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

fn new_env(spec: EnvironmentSpec, out: *mut *mut NestoccEnv) -> NestoccStatus {
    guard(|| {
        lift(spec.validate())?;
        unsafe { put(out, Box::into_raw(Box::new(NestoccEnv(spec)))) }
    })
}

/// Bernoulli sieve with uniform sticks.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nestocc_env_sieve_uniform(out: *mut *mut NestoccEnv) -> NestoccStatus {
    new_env(EnvironmentSpec::BernoulliSieve(StickLaw::Uniform), out)
}

/// Bernoulli sieve with Beta(a, b) sticks.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nestocc_env_sieve_beta(a: f64, b: f64, out: *mut *mut NestoccEnv) -> NestoccStatus {
    new_env(EnvironmentSpec::BernoulliSieve(StickLaw::Beta { a, b }), out)
}

/// Symmetric Dirichlet split into `m` parts.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nestocc_env_dirichlet(m: usize, alpha: f64, out: *mut *mut NestoccEnv) -> NestoccStatus {
    new_env(EnvironmentSpec::DirichletSplit { m, alpha }, out)
}

/// Fixed probability vector.
///
/// # Safety
/// `weights` must be valid for `len` reads; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nestocc_env_deterministic(
    weights: *const f64,
    len: usize,
    out: *mut *mut NestoccEnv,
) -> NestoccStatus {
    if weights.is_null() {
        set_error("null weights".into());
        return NestoccStatus::NullPointer;
    }
    let w = std::slice::from_raw_parts(weights, len).to_vec();
    new_env(EnvironmentSpec::DeterministicSplit(w), out)
}

/// # Safety
/// `env` must come from a `nestocc_env_*` constructor, or be null.
#[no_mangle]
pub unsafe extern "C" fn nestocc_env_free(env: *mut NestoccEnv) {
    if !env.is_null() {
        drop(Box::from_raw(env));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn nestocc_env_is_lattice(env: *const NestoccEnv, out: *mut bool) -> NestoccStatus {
    guard(|| put(out, arg(env)?.0.is_lattice()))
}

/// Closed-form profile when available, else a default Monte Carlo grid.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn nestocc_profile_new(env: *const NestoccEnv, out: *mut *mut NestoccProfile) -> NestoccStatus {
    guard(|| {
        let p = lift(SpectralProfile::build(&arg(env)?.0, None))?;
        put(out, Box::into_raw(Box::new(NestoccProfile(p))))
    })
}

/// # Safety
/// `p` must come from [`nestocc_profile_new`], or be null.
#[no_mangle]
pub unsafe extern "C" fn nestocc_profile_free(p: *mut NestoccProfile) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// `derivative` 0, 1 or 2 selects `lambda`, `lambda'` or `lambda''`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn nestocc_profile_eval(
    p: *const NestoccProfile,
    derivative: i32,
    theta: f64,
    out: *mut f64,
) -> NestoccStatus {
    guard(|| {
        let p = &arg(p)?.0;
        let v = match derivative {
            0 => p.lambda(theta),
            1 => p.dlambda(theta),
            2 => p.d2lambda(theta),
            _ => {
                set_error(format!("derivative order {derivative} not in 0..=2"));
                return Err(NestoccStatus::Config);
            }
        };
        put(out, v)
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn nestocc_critical_constants(
    p: *const NestoccProfile,
    out: *mut NestoccCriticalConstants,
) -> NestoccStatus {
    guard(|| {
        let c = lift(arg(p)?.0.critical_constants())?;
        put(
            out,
            NestoccCriticalConstants {
                theta_star: c.theta_star,
                v: c.v,
                theta_sub: c.theta_sub,
                a_star: c.a_star,
                a_c: c.a_c,
                a_bar: c.a_bar,
                a_bar_minus: c.a_bar_minus.unwrap_or(f64::NAN),
                slope_at_two: c.slope_at_two,
                slope_at_zero: c.slope_at_zero.unwrap_or(f64::NAN),
                property_b: (c.property == Property::B) as i32,
            },
        )
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn nestocc_solve_theta_for_slope(p: *const NestoccProfile, a: f64, out: *mut f64) -> NestoccStatus {
    guard(|| put(out, lift(arg(p)?.0.solve_theta_for_slope(a))?))
}

/// `lambda*(a)`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn nestocc_legendre(p: *const NestoccProfile, a: f64, out: *mut f64) -> NestoccStatus {
    guard(|| put(out, lift(arg(p)?.0.legendre(a))?))
}

/// `alpha(a)` on `(a_*, a_bar)`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn nestocc_alpha_exponent(p: *const NestoccProfile, a: f64, out: *mut f64) -> NestoccStatus {
    guard(|| {
        let p = &arg(p)?.0;
        let c = lift(p.critical_constants())?;
        put(out, lift(p.alpha_exponent(&c, a))?)
    })
}

fn regime_bit(l: RegimeLabel) -> u32 {
    match l {
        RegimeLabel::VeryLow => NESTOCC_REGIME_I,
        RegimeLabel::PresatA => NESTOCC_REGIME_IIA,
        RegimeLabel::PresatB => NESTOCC_REGIME_IIB,
        RegimeLabel::PresatC => NESTOCC_REGIME_IIC,
        RegimeLabel::Saturation => NESTOCC_REGIME_III,
        RegimeLabel::Postsat => NESTOCC_REGIME_IV,
        RegimeLabel::Freezing => NESTOCC_REGIME_FREEZING,
        RegimeLabel::OutOfRange => NESTOCC_REGIME_OUT_OF_RANGE,
    }
}

/// Writes a mask of `NESTOCC_REGIME_*` bits and the solved `theta` (NaN when
/// not attainable).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn nestocc_classify(
    p: *const NestoccProfile,
    a: f64,
    mask_out: *mut u32,
    theta_out: *mut f64,
) -> NestoccStatus {
    guard(|| {
        let p = &arg(p)?.0;
        let c = lift(p.critical_constants())?;
        let cls = lift(p.classify_regime(&c, a))?;
        put(mask_out, cls.labels.iter().fold(0, |m, &l| m | regime_bit(l)))?;
        put(theta_out, cls.theta.unwrap_or(f64::NAN))
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn nestocc_tree_new(
    env: *const NestoccEnv,
    depth: usize,
    mass_floor: f64,
    seed: u64,
    out: *mut *mut NestoccTree,
) -> NestoccStatus {
    guard(|| {
        let t = lift(WeightedTree::materialize(&arg(env)?.0, depth, mass_floor, seed))?;
        put(out, Box::into_raw(Box::new(NestoccTree(t))))
    })
}

/// # Safety
/// `t` must come from [`nestocc_tree_new`], or be null.
#[no_mangle]
pub unsafe extern "C" fn nestocc_tree_free(t: *mut NestoccTree) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

fn check_level(t: &WeightedTree, j: usize) -> Result<(), NestoccStatus> {
    if j > t.depth() {
        set_error(format!("level {j} beyond tree depth {}", t.depth()));
        return Err(NestoccStatus::Config);
    }
    Ok(())
}

/// Number of boxes at level `j` and the truncated mass there.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn nestocc_tree_level_info(
    t: *const NestoccTree,
    j: usize,
    boxes_out: *mut usize,
    residual_out: *mut f64,
) -> NestoccStatus {
    guard(|| {
        let t = &arg(t)?.0;
        check_level(t, j)?;
        put(boxes_out, t.level(j).len())?;
        put(residual_out, t.level(j).residual_mass)
    })
}

/// `W_j(theta)`; `approximate_out` flags truncation without an error bound.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn nestocc_tree_martingale(
    t: *const NestoccTree,
    p: *const NestoccProfile,
    theta: f64,
    j: usize,
    value_out: *mut f64,
    approximate_out: *mut bool,
) -> NestoccStatus {
    guard(|| {
        let t = &arg(t)?.0;
        check_level(t, j)?;
        let m = t.martingale(&arg(p)?.0, theta, j);
        put(value_out, m.value)?;
        put(approximate_out, m.approximate)
    })
}

/// Throws `n` balls into the tree and writes `K(1..=k_max)` at level `j`
/// into `counts_out`, plus the empty-box count (`UINT64_MAX` when the level
/// is truncated).
///
/// # Safety
/// `counts_out` must be valid for `k_max` writes; other pointers valid.
#[no_mangle]
pub unsafe extern "C" fn nestocc_occupancy_tree(
    t: *const NestoccTree,
    n: u64,
    seed: u64,
    j: usize,
    k_max: usize,
    counts_out: *mut u64,
    empty_out: *mut u64,
) -> NestoccStatus {
    guard(|| {
        let t = &arg(t)?.0;
        check_level(t, j)?;
        if counts_out.is_null() || k_max == 0 {
            set_error("counts_out must hold at least one value".into());
            return Err(NestoccStatus::NullPointer);
        }
        let alloc = occupancy::throw_balls_tree(t, n, &mut stream(seed, &[]));
        let c = lift(occupancy::occupancy_counts(&alloc, j, k_max, Some(t)))?;
        std::slice::from_raw_parts_mut(counts_out, k_max).copy_from_slice(&c.k);
        put(empty_out, c.l.unwrap_or(u64::MAX))
    })
}

/// Ball-driven allocation of `n` balls down to level `j`; writes
/// `K(1..=k_max)` at level `j`.
///
/// # Safety
/// `counts_out` must be valid for `k_max` writes; `env` valid.
#[no_mangle]
pub unsafe extern "C" fn nestocc_occupancy_lazy(
    env: *const NestoccEnv,
    n: u64,
    seed: u64,
    j: usize,
    k_max: usize,
    counts_out: *mut u64,
) -> NestoccStatus {
    guard(|| {
        let env = &arg(env)?.0;
        if counts_out.is_null() || k_max == 0 {
            set_error("counts_out must hold at least one value".into());
            return Err(NestoccStatus::NullPointer);
        }
        let alloc = lift(occupancy::throw_balls_lazy(env, n, j, &mut stream(seed, &[])))?;
        let c = lift(occupancy::occupancy_counts(&alloc, j, k_max, None))?;
        std::slice::from_raw_parts_mut(counts_out, k_max).copy_from_slice(&c.k);
        Ok(())
    })
}

/// Poisson kernels: `phi_k`, `m`, `v`, `w` and `psi_{l,k}`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nestocc_poisson_kernel(kind: i32, l: u32, k: u32, x: f64, out: *mut f64) -> NestoccStatus {
    guard(|| {
        if !(x >= 0.0) {
            set_error(format!("kernel argument must be nonnegative, got {x}"));
            return Err(NestoccStatus::Domain);
        }
        let kernel = match kind {
            NESTOCC_KERNEL_PHI => PoissonKernel::Phi(k),
            NESTOCC_KERNEL_M => PoissonKernel::M,
            NESTOCC_KERNEL_V => PoissonKernel::V,
            NESTOCC_KERNEL_W => PoissonKernel::W,
            NESTOCC_KERNEL_PSI if l <= k => PoissonKernel::Psi(l, k),
            _ => {
                set_error(format!("bad kernel selector {kind} (l={l}, k={k})"));
                return Err(NestoccStatus::Config);
            }
        };
        put(out, kernel.eval(x))
    })
}
