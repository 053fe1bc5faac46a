#pragma once

#include "nlheat/common.hpp"
#include "nlheat/kernels.hpp"
#include "nlheat/lattice.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace nlheat {

enum class Route { Series, Spectral };
std::string to_string(Route r);

struct HeatKernelOptions {
    double eps = 1e-12;          // relative Poisson-tail target (series)
    double log_floor = -200.0;   // smallest ln v the truncation must honour
    long k_ceiling = 200000;     // resource limit on K_max
    double coverage_tol = 1e-2;  // spectral: |G| at Nyquist relative to max |G|
    double max_rel_error = 1e-3; // a frame value is accepted below this estimated relative error
    bool tilt_frames = true;     // exponentially shifted frames (1-D)
    double frame_spacing = 1.0;  // ladder step, in standard deviations of the tilted field
};

struct HeatKernelResult {
    Lattice lattice;
    double t = 0.0;
    LatticeField log_v;            // log domain; -inf where unresolved or zero
    double log_atom_weight = 0.0;  // -t
    Route route = Route::Spectral;
    long k_max = 0;                // series truncation (largest k used)
    std::vector<double> rel_error; // per-point relative error estimate
    double error_estimate = 0.0;   // max rel_error over resolved points
    std::size_t unresolved = 0;    // points reported as -inf
    std::vector<double> frames;    // tilts used
    std::map<std::string, double> meta;

    double mass() const { return log_v.quadrature(); }
    // Log-linear interpolation between lattice points; DomainError outside.
    double log_v_at(const Vec& x, bool* interpolated = nullptr) const;
    void write_csv(const std::string& path) const;
};

HeatKernelResult v_spectral(const KernelFamily& family, const Lattice& lat, double t,
                            const HeatKernelOptions& opt = {});
HeatKernelResult v_series(const KernelFamily& family, const Lattice& lat, double t, double eps,
                          HeatKernelOptions opt = {});

// Smallest K with P{N(t) > K} below e^{log_target} (Chernoff, h(u) = u ln u - u + 1).
long poisson_k_max(double t, double log_target);

// ln( t^k a^{*k}(x) / k! ) - t for the Gaussian family, |x| = r.
double gaussian_log_term(long k, double r, double t, int d);
// ln v(x, t) for the Gaussian family by the exact series; also returns the index range used.
double gaussian_log_v(double r, double t, int d, long* k_lo = nullptr, long* k_hi = nullptr);

// ln a^{*k}(x), 1-D, by a band-limited sum centered at x under the saddle tilt.
double log_convolution_power(const KernelFamily& family, long k, double x);

struct SaddleDiagnostic {
    Vec x;
    double t = 0.0;
    long k_hat = 1;
    LogValue log_term_at_k_hat;
    std::vector<std::pair<long, double>> s_profile;
    double stirling_constant = 1.0;  // c(d) = (d+1)/2
    double z_hat = 0.0;              // maximizer of the continuous model S(z, t)
    bool unimodal = true;
    bool window_exhausted = false;
};

SaddleDiagnostic dominant_term(const KernelFamily& family, const Vec& x, double t);

}  // namespace nlheat
