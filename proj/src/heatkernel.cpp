#include "nlheat/heatkernel.hpp"

#include "nlheat/io.hpp"
#include "nlheat/ldp.hpp"
#include "nlheat/parallel.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <functional>

namespace nlheat {

std::string to_string(Route r) { return r == Route::Series ? "series" : "spectral"; }

namespace {

double log_factorial(long k) { return boost::math::lgamma(double(k) + 1.0); }

cplx cexpm1(cplx z) {
    double x = z.real(), y = z.imag();
    double s = std::sin(0.5 * y);
    return {std::expm1(x) * std::cos(y) - 2.0 * s * s, std::exp(x) * std::sin(y)};
}

cplx ipow(cplx a, long k) {
    cplx r = 1.0;
    while (k) {
        if (k & 1) r *= a;
        a *= a;
        k >>= 1;
    }
    return r;
}

// Symbol of the tilted kernel on the dual lattice, FFT order.
std::vector<cplx> dual_symbol(const KernelFamily& fam, const Lattice& lat, double gamma) {
    const std::size_t n = lat.n;
    std::vector<cplx> out(lat.size());
    if (lat.d == 1) {
        double dp = kPi / lat.L;
        auto line = fam.tilted_symbol_line(-dp * double(n / 2), dp, n, gamma);
        for (std::size_t j = 0; j < n; ++j) out[(j + n / 2) % n] = line[j];
        return out;
    }
    if (gamma != 0.0) throw DomainError("2-D lattices use the untilted frame only");
    // radial symbol: cache by integer |m|^2
    std::map<long, double> cache;
    for (std::size_t i = 0; i < out.size(); ++i) {
        long m1 = Lattice::dual_index(i / n, n), m2 = Lattice::dual_index(i % n, n);
        long key = m1 * m1 + m2 * m2;
        auto it = cache.find(key);
        if (it == cache.end()) {
            double pn = kPi * std::sqrt(double(key)) / lat.L;
            it = cache.emplace(key, fam.fourier(vec2(pn, 0.0))).first;
        }
        out[i] = it->second;
    }
    return out;
}

double edge_max(const Lattice& lat, const std::vector<cplx>& w) {
    const std::size_t n = lat.n, band = std::max<std::size_t>(1, n / 64);
    auto outer = [&](std::size_t j) { return j < band || j >= n - band; };
    double m = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        bool o = lat.d == 1 ? outer(i) : (outer(i / n) || outer(i % n));
        if (o) m = std::max(m, std::abs(w[i].real()));
    }
    return m;
}

double sum_abs(const std::vector<cplx>& v) {
    double s = 0.0;
    for (auto& c : v) s += std::abs(c);
    return s;
}

// Tilts 0, +-g1, +-g2, ... with steps of `spacing` standard deviations of the tilted
// field, until the field center leaves the lattice.
std::vector<double> build_ladder(const KernelFamily& fam, double spacing, double cap,
                                 const std::function<double(double, const RayCumulant&)>& center,
                                 const std::function<double(double, const RayCumulant&)>& variance,
                                 double reach) {
    std::vector<double> pos;
    double g = 0.0;
    for (int i = 0; i < 400; ++i) {
        auto rc = fam.ray_cumulant(g);
        double var = variance(g, rc);
        if (!(var > 0.0) || !std::isfinite(var)) break;
        g += spacing / std::sqrt(var);
        if (g >= cap) break;
        rc = fam.ray_cumulant(g);
        if (!std::isfinite(rc.value)) break;
        pos.push_back(g);
        if (center(g, rc) > reach) break;
    }
    std::vector<double> out;
    for (auto it = pos.rbegin(); it != pos.rend(); ++it) out.push_back(-*it);
    out.push_back(0.0);
    for (double v : pos) out.push_back(v);
    return out;
}

double tilt_cap(const KernelFamily& fam) {
    double cap = 0.95 * fam.gamma_bound();
    if (fam.bounded_support()) cap = std::min(cap, 600.0 / fam.mu());
    return cap;
}

HeatKernelResult empty_result(const KernelFamily& fam, const Lattice& lat, double t, Route route) {
    lat.validate();
    if (fam.dimension() != lat.d) throw ConfigError("kernel and lattice dimensions differ");
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("time t must be >= 0");
    HeatKernelResult r;
    r.lattice = lat;
    r.t = t;
    r.route = route;
    r.log_atom_weight = -t;
    r.log_v.lattice = lat;
    r.log_v.domain = Domain::Log;
    r.log_v.values.assign(lat.size(), -kInf);
    r.rel_error.assign(lat.size(), 0.0);
    return r;
}

void finish_result(HeatKernelResult& r) {
    r.unresolved = 0;
    r.error_estimate = 0.0;
    for (std::size_t i = 0; i < r.log_v.values.size(); ++i) {
        if (r.log_v.values[i] == -kInf)
            ++r.unresolved;
        else
            r.error_estimate = std::max(r.error_estimate, r.rel_error[i]);
    }
    r.meta["unresolved_points"] = double(r.unresolved);
    r.meta["mass_error"] = r.mass() - (-std::expm1(-r.t));
}

}  // namespace

// ---------------------------------------------------------------- result helpers

double HeatKernelResult::log_v_at(const Vec& x, bool* interpolated) const {
    const auto& lat = lattice;
    if (x.size() != lat.d) throw DomainError("log_v_at: dimension mismatch");
    auto locate = [&](double xc, std::size_t& j, double& w) {
        double u = (xc + lat.L) / lat.h();
        if (u < 0.0 || u > double(lat.n - 1)) throw DomainError("point outside the lattice (extrapolation refused)");
        j = std::min<std::size_t>(std::size_t(std::floor(u)), lat.n - 2);
        w = u - double(j);
    };
    auto lerp = [](double a, double b, double w) {
        if (w == 0.0) return a;
        if (w == 1.0) return b;
        if (a == -kInf || b == -kInf) return -kInf;
        return (1.0 - w) * a + w * b;
    };
    if (lat.d == 1) {
        std::size_t j;
        double w;
        locate(x[0], j, w);
        if (interpolated) *interpolated = w != 0.0 && w != 1.0;
        return lerp(log_v.values[j], log_v.values[j + 1], w);
    }
    std::size_t j0, j1;
    double w0, w1;
    locate(x[0], j0, w0);
    locate(x[1], j1, w1);
    if (interpolated) *interpolated = (w0 != 0.0 && w0 != 1.0) || (w1 != 0.0 && w1 != 1.0);
    auto at = [&](std::size_t a, std::size_t b) { return log_v.values[a * lat.n + b]; };
    return lerp(lerp(at(j0, j1), at(j0, j1 + 1), w1), lerp(at(j0 + 1, j1), at(j0 + 1, j1 + 1), w1), w0);
}

void HeatKernelResult::write_csv(const std::string& path) const {
    std::vector<std::string> header = lattice.d == 1 ? std::vector<std::string>{"x"}
                                                     : std::vector<std::string>{"x1", "x2"};
    for (const char* h : {"t", "ln_v", "route", "k_max"}) header.push_back(h);
    CsvWriter csv(path, header);
    for (std::size_t i = 0; i < lattice.size(); ++i) {
        Vec x = lattice.point(i);
        for (int k = 0; k < lattice.d; ++k) csv.cell(x[k]);
        csv.cell(t).cell(log_v.values[i]).cell(to_string(route)).cell((long long)k_max);
        csv.end_row();
    }
}

long poisson_k_max(double t, double log_target) {
    if (t <= 0.0) return 0;
    auto h = [](double u) { return u * std::log(u) - u + 1.0; };
    long K = std::max(1L, long(std::ceil(t)));
    // P{N > K} <= exp(-t h((K+1)/t)) for K + 1 > t
    while (-t * h(double(K + 1) / t) >= log_target) {
        K = K < 64 ? K + 1 : long(double(K) * 1.05);
        if (K > 100000000L) break;
    }
    // shrink back to the smallest such K
    long lo = std::max(1L, long(std::ceil(t)));
    long hi = K;
    while (lo < hi) {
        long mid = (lo + hi) / 2;
        if (-t * h(double(mid + 1) / t) < log_target)
            hi = mid;
        else
            lo = mid + 1;
    }
    return hi;
}

// ---------------------------------------------------------------- spectral route

HeatKernelResult v_spectral(const KernelFamily& fam, const Lattice& lat, double t, const HeatKernelOptions& opt) {
    auto res = empty_result(fam, lat, t, Route::Spectral);
    if (t == 0.0) {
        finish_result(res);
        return res;
    }
    std::vector<double> gammas{0.0};
    if (opt.tilt_frames && lat.d == 1)
        gammas = build_ladder(
            fam, 0.6 * opt.frame_spacing, tilt_cap(fam),
            [&](double, const RayCumulant& rc) { return t * std::exp(rc.value) * rc.d1; },
            [&](double, const RayCumulant& rc) { return t * std::exp(rc.value) * (rc.d2 + rc.d1 * rc.d1); }, lat.L);
    const std::size_t N = lat.size(), F = gammas.size();
    const double scale = std::pow(2.0 * lat.L, -lat.d);
    const double lg = std::log2(double(N));
    std::vector<std::vector<double>> q(F), lv(F), rel(F);
    double coverage = 0.0;

    parallel_for(F, [&](std::size_t f) {
        double g = gammas[f];
        auto A = dual_symbol(fam, lat, g);
        double ell = fam.ray_cumulant(g).value;
        double tl = t * std::exp(ell);
        std::vector<cplx> G(N);
        for (std::size_t i = 0; i < N; ++i)
            G[i] = tl < 1.0 ? std::exp(-tl) * cexpm1(tl * A[i]) : std::exp(tl * (A[i] - 1.0)) - std::exp(-tl);
        if (g == 0.0) {
            double gmax = 0.0, nyq = 0.0;
            for (std::size_t i = 0; i < N; ++i) {
                double a = std::abs(G[i]);
                gmax = std::max(gmax, a);
                bool edge = lat.d == 1 ? i == lat.n / 2 : (i / lat.n == lat.n / 2 || i % lat.n == lat.n / 2);
                if (edge) nyq = std::max(nyq, a);
            }
            coverage = gmax > 0.0 ? nyq / gmax : 0.0;
        }
        double noise = 2.2e-16 * lg * sum_abs(G) * scale;
        auto w = dual_to_field(lat, std::move(G));
        double err = noise + edge_max(lat, w);
        double shift = t * std::expm1(ell);
        q[f].assign(N, -kInf);
        lv[f].assign(N, -kInf);
        rel[f].assign(N, kInf);
        for (std::size_t i = 0; i < N; ++i) {
            double v = w[i].real();
            if (!(v > 0.0)) continue;
            double xg = lat.d == 1 ? g * lat.coord(i) : 0.0;
            q[f][i] = std::log(v) - std::log(err);
            rel[f][i] = err / v;
            lv[f][i] = std::log(v) + shift - xg;
        }
    });
    if (coverage > opt.coverage_tol)
        throw ConfigError("insufficient frequency coverage: |G| at Nyquist is " + std::to_string(coverage) +
                          " of its maximum; refine the lattice spacing");
    for (std::size_t i = 0; i < N; ++i) {
        double bq = -kInf;
        std::size_t bf = F;
        for (std::size_t f = 0; f < F; ++f)
            if (q[f][i] > bq) bq = q[f][i], bf = f;
        if (bf < F && rel[bf][i] < opt.max_rel_error) {
            res.log_v.values[i] = lv[bf][i];
            res.rel_error[i] = rel[bf][i];
        }
    }
    res.frames = gammas;
    res.meta["spectral_tail"] = coverage;
    res.meta["frames"] = double(F);
    finish_result(res);
    return res;
}

// ---------------------------------------------------------------- series route

double gaussian_log_term(long k, double r, double t, int d) {
    double kd = double(k);
    return kd * std::log(t) - log_factorial(k) - t - 0.5 * d * std::log(4.0 * kPi * kd) - r * r / (4.0 * kd);
}

double gaussian_log_v(double r, double t, int d, long* k_lo, long* k_hi) {
    if (t <= 0.0) return -kInf;
    // maximize the term over k: derivative ln t - psi(k+1) - d/(2k) + r^2/(4k^2)
    auto dfk = [&](double k) {
        return std::log(t) - boost::math::digamma(k + 1.0) - 0.5 * d / k + r * r / (4.0 * k * k);
    };
    double kstar = 1.0;
    if (dfk(1.0) > 0.0) {
        double lo = 1.0, hi = 2.0;
        while (dfk(hi) > 0.0) lo = hi, hi *= 2.0;
        for (int it = 0; it < 200 && hi - lo > 1e-9 * hi; ++it) {
            double m = 0.5 * (lo + hi);
            (dfk(m) > 0.0 ? lo : hi) = m;
        }
        kstar = 0.5 * (lo + hi);
    }
    long k0 = std::max(1L, long(std::floor(kstar)));
    if (gaussian_log_term(k0 + 1, r, t, d) > gaussian_log_term(k0, r, t, d)) ++k0;
    double top = gaussian_log_term(k0, r, t, d);
    LogSumExp acc;
    acc.add(top);
    long lo = k0, hi = k0;
    double prev = top;
    for (long k = k0 - 1; k >= 1; --k) {
        double v = gaussian_log_term(k, r, t, d);
        acc.add(v);
        lo = k;
        if (v < top - 45.0 && v <= prev) break;
        prev = v;
    }
    prev = top;
    for (long k = k0 + 1;; ++k) {
        double v = gaussian_log_term(k, r, t, d);
        acc.add(v);
        hi = k;
        if (v < top - 45.0 && v <= prev) break;
        prev = v;
    }
    if (k_lo) *k_lo = lo;
    if (k_hi) *k_hi = hi;
    return acc.value();
}

namespace {

struct SeriesFrame {
    double g;
    RayCumulant rc;
    std::vector<cplx> A, P;
};

// fn(i) over [0, n) in fixed contiguous chunks
void for_chunks(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const std::size_t chunk = 8192, nch = (n + chunk - 1) / chunk;
    parallel_for(nch, [&](std::size_t c) {
        std::size_t e = std::min(n, (c + 1) * chunk);
        for (std::size_t i = c * chunk; i < e; ++i) fn(i);
    });
}

}  // namespace

HeatKernelResult v_series(const KernelFamily& fam, const Lattice& lat, double t, double eps, HeatKernelOptions opt) {
    opt.eps = eps;
    if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("series eps must lie in (0, 1)");
    auto res = empty_result(fam, lat, t, Route::Series);
    if (t == 0.0) {
        finish_result(res);
        return res;
    }
    const std::size_t N = lat.size();

    if (fam.tail_class() == TailClass::Gaussian) {
        // exact a^{*k}: adaptive index window per point
        std::vector<long> khi(N);
        parallel_for(N, [&](std::size_t i) {
            long lo, hi;
            res.log_v.values[i] = gaussian_log_v(lat.point(i).norm(), t, lat.d, &lo, &hi);
            khi[i] = hi;
            res.rel_error[i] = 1e-15;
        });
        res.k_max = *std::max_element(khi.begin(), khi.end());
        res.meta["closed_form"] = 1.0;
        finish_result(res);
        return res;
    }

    double log_target = std::log(opt.eps) + opt.log_floor - std::log(fam.max_value());
    long K = poisson_k_max(t, log_target);
    if (K > opt.k_ceiling)
        throw ResourceError("series truncation needs K_max=" + std::to_string(K) + " > ceiling " +
                            std::to_string(opt.k_ceiling));
    res.k_max = K;

    std::vector<double> gammas{0.0};
    if (opt.tilt_frames && lat.d == 1)
        gammas = build_ladder(
            fam, opt.frame_spacing, tilt_cap(fam), [&](double, const RayCumulant& rc) { return rc.d1; },
            [&](double, const RayCumulant& rc) { return double(K) * rc.d2; }, 0.9 * lat.L);
    const std::size_t F = gammas.size();
    std::vector<SeriesFrame> frames(F);
    parallel_for(F, [&](std::size_t f) {
        auto& fr = frames[f];
        fr.g = gammas[f];
        fr.rc = fam.ray_cumulant(fr.g);
        fr.A = dual_symbol(fam, lat, fr.g);
        fr.P.assign(N, cplx(1.0, 0.0));
    });

    const double scale = std::pow(2.0 * lat.L, -lat.d);
    const double lg = std::log2(double(N));
    std::vector<LogSumExp> pos(N), neg(N), err(N);
    // 1-D: coordinate; 2-D: radius
    std::vector<double> xc(N), la(N);
    for (std::size_t i = 0; i < N; ++i) {
        xc[i] = lat.d == 1 ? lat.coord(i) : lat.point(i).norm();
        // k = 1 is a itself, taken pointwise
        la[i] = fam.bounded_support() && std::abs(xc[i]) > fam.mu() ? -kInf : fam.log_radial(xc[i]);
    }
    std::vector<double> best_rel(N), best_lm(N), min_lb(N);
    std::vector<signed char> best_sg(N);

    for (long k = 1; k <= K; ++k) {
        const double kd = double(k);
        const double lpois = kd * std::log(t) - log_factorial(k) - t;
        std::fill(best_rel.begin(), best_rel.end(), kInf);
        std::fill(min_lb.begin(), min_lb.end(), kInf);
        for (auto& fr : frames) {
            for_chunks(N, [&](std::size_t i) { fr.P[i] *= fr.A[i]; });
            if (k == 1) continue;
            double mean = (fr.g < 0 ? -1.0 : 1.0) * kd * fr.rc.d1;
            double sd = std::sqrt(kd * fr.rc.d2);
            if (fr.g != 0.0 && std::abs(mean) + 6.0 * sd > 0.9 * lat.L) continue;
            double noise = 2.2e-16 * lg * sum_abs(fr.P) * scale;
            auto w = dual_to_field(lat, fr.P);
            double e = noise + (fr.g != 0.0 ? edge_max(lat, w) : 0.0);
            double shift = kd * fr.rc.value;
            for_chunks(N, [&](std::size_t i) {
                double v = w[i].real(), av = std::abs(v);
                double gx = lat.d == 1 ? fr.g * xc[i] : 0.0;
                double dist = lat.d == 1 ? std::abs(xc[i] - mean) : xc[i];
                if (av > 0.0 && dist <= 8.0 * sd) {
                    double r = e / av;
                    if (r < opt.max_rel_error && r < best_rel[i]) {
                        best_rel[i] = r;
                        best_lm[i] = std::log(av) + shift - gx;
                        best_sg[i] = v > 0 ? 1 : -1;
                        return;
                    }
                }
                // upper bound on |term|, only needed while nothing resolves the point
                if (best_rel[i] == kInf && av + e > 0.0)
                    min_lb[i] = std::min(min_lb[i], std::log(av + e) + shift - gx);
            });
        }
        for_chunks(N, [&](std::size_t i) {
            if (k == 1) {
                if (la[i] > -kInf) {
                    pos[i].add(lpois + la[i]);
                    err[i].add(lpois + la[i] - 36.0);
                }
            } else if (best_rel[i] < kInf) {
                double lt = lpois + best_lm[i];
                (best_sg[i] > 0 ? pos[i] : neg[i]).add(lt);
                err[i].add(lt + std::log(best_rel[i]));
            } else if (min_lb[i] < kInf) {
                err[i].add(lpois + min_lb[i]);
            }
        });
        res.k_max = k;
        // stop once P{N > k} max a is below eps times every value resolved so far
        if (double(k + 1) > t) {
            double floor_v = kInf;
            for (std::size_t i = 0; i < N; ++i) {
                double p = pos[i].value();
                if (p > -kInf) floor_v = std::min(floor_v, p);
            }
            double u = double(k + 1) / t;
            double tail = -t * (u * std::log(u) - u + 1.0) + std::log(fam.max_value());
            if (floor_v < kInf && tail < std::log(opt.eps) + std::max(floor_v, opt.log_floor)) break;
        }
    }
    res.meta["k_bound"] = double(K);
    for (std::size_t i = 0; i < N; ++i) {
        double p = pos[i].value(), m = neg[i].value();
        if (!(p > m)) continue;
        double v = p + std::log1p(-std::exp(m - p));
        double rel = std::exp(err[i].value() - v);
        res.rel_error[i] = rel;
        if (rel < opt.max_rel_error) res.log_v.values[i] = v;
    }
    res.frames = gammas;
    res.meta["frames"] = double(F);
    finish_result(res);
    return res;
}

// ---------------------------------------------------------------- point saddle evaluation

double log_convolution_power(const KernelFamily& fam, long k, double x) {
    if (fam.dimension() != 1) throw DomainError("log_convolution_power is 1-D only");
    if (k < 1) throw DomainError("k must be >= 1");
    if (k == 1) return fam.log_radial(x);
    const double kd = double(k);
    RateFunction rf(fam);
    auto rr = rf.ray(std::abs(x) / kd);
    if (rr.infinite) return -kInf;
    double g = (x < 0 ? -1.0 : 1.0) * rr.gradient[0];
    auto rc = fam.ray_cumulant(g);
    double sd = std::sqrt(kd * rc.d2);
    double Lh = 20.0 * sd;
    bool quad = fam.tail_class() == TailClass::Tabulated ||
                (fam.tail_class() == TailClass::StretchedExp && fam.p() != 1.0 && fam.p() != 2.0);
    std::size_t n = 1024, nmax = quad ? (1u << 16) : (1u << 22);
    for (; n < nmax; n *= 2) {
        double pn = kPi * double(n / 2) / Lh;
        if (std::pow(std::abs(fam.tilted_symbol(vec1(pn), vec1(g))), kd) < 1e-18) break;
    }
    double dp = kPi / Lh;
    auto A = fam.tilted_symbol_line(-dp * double(n / 2), dp, n, g);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double p = -dp * double(n / 2) + dp * double(j);
        sum += (ipow(A[j], k) * std::polar(1.0, -p * x)).real();
    }
    double w = sum / (2.0 * Lh);
    if (!(w > 0.0)) return -kInf;
    return std::log(w) + kd * rc.value - g * x;
}

SaddleDiagnostic dominant_term(const KernelFamily& fam, const Vec& x, double t) {
    if (!(t > 0.0)) throw DomainError("dominant_term requires t > 0");
    if (x.size() != fam.dimension()) throw DomainError("dominant_term: dimension mismatch");
    const int d = fam.dimension();
    const bool gauss = fam.tail_class() == TailClass::Gaussian;
    if (!gauss && d != 1) throw DomainError("dominant_term: non-Gaussian families are supported in 1-D only");
    SaddleDiagnostic sd;
    sd.x = x;
    sd.t = t;
    sd.stirling_constant = 0.5 * (d + 1);
    const double r = x.norm(), c = sd.stirling_constant;

    std::shared_ptr<RateFunction> rf;
    if (!gauss) rf = std::make_shared<RateFunction>(fam);
    // derivative of S(z,t) = z ln(t/z) + z - c ln z - z I(|x|/z)
    auto dS = [&](double z) {
        double base = std::log(t / z) - c / z;
        if (r == 0.0) return base;
        if (gauss) return base + r * r / (4.0 * z * z);
        double s = r / z;
        auto rr = rf->ray(s);
        if (rr.infinite) return kInf;
        return base - rr.value + s * rr.gradient[0];
    };
    double zhat = 1.0;
    if (dS(1.0) > 0.0) {
        double lo = 1.0, hi = 2.0;
        while (dS(hi) > 0.0 && hi < 1e12) lo = hi, hi *= 2.0;
        for (int it = 0; it < 200 && hi - lo > 1e-10 * hi; ++it) {
            double m = 0.5 * (lo + hi);
            (dS(m) > 0.0 ? lo : hi) = m;
        }
        zhat = 0.5 * (lo + hi);
    }
    sd.z_hat = zhat;

    std::map<long, double> memo;
    auto term = [&](long k) {
        auto it = memo.find(k);
        if (it != memo.end()) return it->second;
        double v = gauss ? gaussian_log_term(k, r, t, d)
                         : double(k) * std::log(t) - log_factorial(k) - t + log_convolution_power(fam, k, x[0]);
        memo.emplace(k, v);
        return v;
    };
    long center = std::max(1L, std::lround(zhat));
    long W = std::max(10L, long(std::ceil(6.0 * std::sqrt(zhat))));
    long lo = 1, hi = 1, best = 1;
    for (int attempt = 0; attempt < 6; ++attempt) {
        lo = std::max(1L, center - W);
        hi = center + W;
        best = lo;
        for (long k = lo; k <= hi; ++k)
            if (term(k) > term(best)) best = k;
        bool at_edge = (best == hi) || (best == lo && lo > 1);
        if (!at_edge) break;
        center = best;
        W *= 2;
        if (attempt == 5) sd.window_exhausted = true;
    }
    sd.k_hat = best;
    sd.log_term_at_k_hat = LogValue::from_log(term(best));
    for (long k = lo; k <= hi; ++k) sd.s_profile.emplace_back(k, term(k));
    // unimodal: nondecreasing up to k_hat, nonincreasing after
    for (std::size_t i = 1; i < sd.s_profile.size(); ++i) {
        long k = sd.s_profile[i].first;
        double a = sd.s_profile[i - 1].second, b = sd.s_profile[i].second;
        double tol = 1e-12 * std::max(1.0, std::abs(a));
        if ((k <= best && b < a - tol) || (k > best && b > a + tol)) sd.unimodal = false;
    }
    return sd;
}

}  // namespace nlheat
