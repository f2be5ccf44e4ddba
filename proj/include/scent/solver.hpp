#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "scent/errors.hpp"
#include "scent/fft.hpp"
#include "scent/rng.hpp"

namespace scent {

// Pseudo-spectral 2D incompressible Navier-Stokes in vorticity form on the
// periodic square [-pi, pi]^2. Row index i maps to x2 (vertical), column
// index j to x1 (horizontal); wavenumbers are integers.
struct SolverConfig {
  std::int64_t height = 64;
  std::int64_t width = 64;
  double viscosity = 0.01;  // 1/Re with Re = 100
  double dt = 1e-3;
  std::int64_t steps_per_frame = 100;
  std::int64_t frames = 50;
  double burn_in_time = 2.0;
  double grf_alpha = 2.5;
  double grf_tau = 3.0;
  bool forcing = true;

  void validate() const {
    if (!is_pow2(height) || !is_pow2(width) || height < 16 || width < 16)
      throw ConfigError("SolverConfig: grid dims must be powers of two >= 16");
    if (!(viscosity > 0)) throw ConfigError("SolverConfig: viscosity must be positive");
    if (!(dt > 0)) throw ConfigError("SolverConfig: dt must be positive");
    if (steps_per_frame < 1) throw ConfigError("SolverConfig: steps_per_frame >= 1");
    if (frames < 2) throw ConfigError("SolverConfig: need at least 2 frames");
    if (burn_in_time < 0) throw ConfigError("SolverConfig: negative burn-in");
    if (!(grf_alpha > 0) || !(grf_tau > 0))
      throw ConfigError("SolverConfig: GRF parameters must be positive");
  }
};

// Gaussian random field with spectral density (|k|^2 + tau^2)^(-alpha).
// White noise is filtered in Fourier space; the white spectrum is Hermitian
// because the noise is real, so the inverse transform is real by symmetry.
inline std::vector<double> grf_init(const SolverConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const std::int64_t h = cfg.height, w = cfg.width;
  RngStream rng(seed, "grf");
  std::vector<std::complex<double>> spec(static_cast<std::size_t>(h * w));
  for (auto& v : spec) v = {rng.gaussian(), 0.0};
  Fft2 fft(h, w);
  fft.transform(spec, false);
  const double amp = std::sqrt(static_cast<double>(h * w)) *
                     std::pow(cfg.grf_tau, cfg.grf_alpha - 1.0);
  for (std::int64_t i = 0; i < h; ++i) {
    const double k2v = static_cast<double>(fft_freq(i, h));
    for (std::int64_t j = 0; j < w; ++j) {
      const double k1v = static_cast<double>(fft_freq(j, w));
      const double k2 = k1v * k1v + k2v * k2v;
      const double s =
          amp * std::pow(k2 + cfg.grf_tau * cfg.grf_tau, -cfg.grf_alpha / 2.0);
      spec[static_cast<std::size_t>(i * w + j)] *= s;
    }
  }
  spec[0] = 0.0;  // zero-mean field
  std::vector<double> field(static_cast<std::size_t>(h * w));
  fft.inverse_real(spec, field);
  return field;
}

// Time stepper with precomputed spectral operators. Advances vorticity with
// an integrating-factor RK4: diffusion handled exactly by e^(-nu |k|^2 dt),
// advection + forcing by the explicit stages.
class VorticitySolver {
 public:
  explicit VorticitySolver(const SolverConfig& cfg)
      : cfg_(cfg), fft_(cfg.height, cfg.width) {
    cfg.validate();
    const std::int64_t h = cfg.height, w = cfg.width;
    const std::int64_t n = h * w;
    k1_.resize(static_cast<std::size_t>(n));
    k2_.resize(static_cast<std::size_t>(n));
    inv_k2_.resize(static_cast<std::size_t>(n));
    dealias_.resize(static_cast<std::size_t>(n));
    e_half_.resize(static_cast<std::size_t>(n));
    e_full_.resize(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < h; ++i) {
      const double kv = static_cast<double>(fft_freq(i, h));
      for (std::int64_t j = 0; j < w; ++j) {
        const double ku = static_cast<double>(fft_freq(j, w));
        const auto idx = static_cast<std::size_t>(i * w + j);
        k1_[idx] = ku;
        k2_[idx] = kv;
        const double ksq = ku * ku + kv * kv;
        inv_k2_[idx] = ksq > 0 ? 1.0 / ksq : 0.0;
        dealias_[idx] = (std::abs(ku) <= static_cast<double>(w) / 3.0 &&
                         std::abs(kv) <= static_cast<double>(h) / 3.0)
                            ? 1.0
                            : 0.0;
        e_half_[idx] = std::exp(-cfg.viscosity * ksq * cfg.dt / 2.0);
        e_full_[idx] = e_half_[idx] * e_half_[idx];
      }
    }
    // Forcing f(x1, x2) = -4 cos(4 x2), constant along rows' columns.
    fhat_.assign(static_cast<std::size_t>(n), {0.0, 0.0});
    if (cfg.forcing) {
      std::vector<double> f(static_cast<std::size_t>(n));
      for (std::int64_t i = 0; i < h; ++i) {
        const double x2 = -std::numbers::pi +
                          2.0 * std::numbers::pi * static_cast<double>(i) /
                              static_cast<double>(h);
        const double fv = -4.0 * std::cos(4.0 * x2);
        for (std::int64_t j = 0; j < w; ++j) f[static_cast<std::size_t>(i * w + j)] = fv;
      }
      fft_.forward(f, fhat_);
    }
    scratch_.resize(5);
    for (auto& s : scratch_) s.resize(static_cast<std::size_t>(n));
    ua_.resize(static_cast<std::size_t>(n));
    ub_.resize(static_cast<std::size_t>(n));
    wa_.resize(static_cast<std::size_t>(n));
    wb_.resize(static_cast<std::size_t>(n));
    prod_.resize(static_cast<std::size_t>(n));
  }

  const SolverConfig& config() const { return cfg_; }

  // One dt step in place.
  void step(std::vector<double>& omega) {
    const std::int64_t n = cfg_.height * cfg_.width;
    if (static_cast<std::int64_t>(omega.size()) != n)
      throw ContractError("VorticitySolver::step: field size mismatch");
    auto& what = scratch_[0];
    fft_.forward(omega, what);

    auto& ga = scratch_[1];
    auto& gb = scratch_[2];
    auto& gc = scratch_[3];
    auto& tmp = scratch_[4];

    rhs(what, ga, /*check_cfl=*/true);  // stage a at t
    for (std::int64_t i = 0; i < n; ++i)
      tmp[static_cast<std::size_t>(i)] =
          e_half_[static_cast<std::size_t>(i)] *
          (what[static_cast<std::size_t>(i)] +
           0.5 * cfg_.dt * ga[static_cast<std::size_t>(i)]);
    rhs(tmp, gb, false);  // stage b at t + dt/2
    for (std::int64_t i = 0; i < n; ++i)
      tmp[static_cast<std::size_t>(i)] =
          e_half_[static_cast<std::size_t>(i)] * what[static_cast<std::size_t>(i)] +
          0.5 * cfg_.dt * gb[static_cast<std::size_t>(i)];
    rhs(tmp, gc, false);  // stage c at t + dt/2
    for (std::int64_t i = 0; i < n; ++i)
      tmp[static_cast<std::size_t>(i)] =
          e_full_[static_cast<std::size_t>(i)] * what[static_cast<std::size_t>(i)] +
          cfg_.dt * e_half_[static_cast<std::size_t>(i)] * gc[static_cast<std::size_t>(i)];
    rhs(tmp, prod_, false);  // stage d at t + dt (reuse prod_ buffer)

    for (std::int64_t i = 0; i < n; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      what[idx] = e_full_[idx] * what[idx] +
                  cfg_.dt / 6.0 *
                      (e_full_[idx] * ga[idx] + 2.0 * e_half_[idx] * (gb[idx] + gc[idx]) +
                       prod_[idx]);
      // Keep the state band-limited to 2/3 of the grid: products of retained
      // modes then stay below the sampling limit and cannot alias onto any
      // retained mode (in particular the mean stays exactly conserved).
      what[idx] *= dealias_[idx];
    }
    fft_.inverse_real(what, omega);
    for (double v : omega)
      if (!std::isfinite(v))
        throw NumericError("VorticitySolver::step: field diverged (non-finite)");
  }

 private:
  // g(what) = dealias(FFT(-u . grad omega)) + fhat
  void rhs(const std::vector<std::complex<double>>& what,
           std::vector<std::complex<double>>& g, bool check_cfl) {
    const std::int64_t n = cfg_.height * cfg_.width;
    const std::complex<double> im(0.0, 1.0);
    // Velocity from the stream function: psi_hat = what / |k|^2.
    for (std::int64_t i = 0; i < n; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      const std::complex<double> psi = what[idx] * inv_k2_[idx];
      wa_[idx] = im * k2_[idx] * psi;    // u1 = d psi / d x2
      wb_[idx] = -im * k1_[idx] * psi;   // u2 = -d psi / d x1
    }
    fft_.transform(wa_, true);
    fft_.transform(wb_, true);
    for (std::int64_t i = 0; i < n; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      ua_[idx] = wa_[idx].real();
      ub_[idx] = wb_[idx].real();
    }
    if (check_cfl) {
      double umax = 0.0;
      for (std::int64_t i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        umax = std::max({umax, std::abs(ua_[idx]), std::abs(ub_[idx])});
      }
      const double grid = static_cast<double>(std::max(cfg_.height, cfg_.width));
      const double cfl = cfg_.dt * umax * grid / (2.0 * std::numbers::pi);
      if (!(cfl < 1.0))
        throw NumericError("VorticitySolver: CFL violation, max|u| = " +
                           std::to_string(umax));
    }
    // d omega / d x1 and x2.
    for (std::int64_t i = 0; i < n; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      wa_[idx] = im * k1_[idx] * what[idx];
      wb_[idx] = im * k2_[idx] * what[idx];
    }
    fft_.transform(wa_, true);
    fft_.transform(wb_, true);
    std::vector<double>& adv = dscratch_;
    adv.resize(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      adv[idx] = -(ua_[idx] * wa_[idx].real() + ub_[idx] * wb_[idx].real());
    }
    fft_.forward(adv, g);
    for (std::int64_t i = 0; i < n; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      g[idx] = g[idx] * dealias_[idx] + fhat_[idx];
    }
  }

  SolverConfig cfg_;
  Fft2 fft_;
  std::vector<double> k1_, k2_, inv_k2_, dealias_, e_half_, e_full_;
  std::vector<std::complex<double>> fhat_;
  std::vector<std::vector<std::complex<double>>> scratch_;
  std::vector<std::complex<double>> wa_, wb_, prod_;
  std::vector<double> ua_, ub_, dscratch_;
};

// Single-step convenience wrapper.
inline std::vector<double> step_vorticity(const std::vector<double>& omega,
                                          const SolverConfig& cfg) {
  VorticitySolver solver(cfg);
  std::vector<double> out = omega;
  solver.step(out);
  return out;
}

}  // namespace scent
