#include "nlheat/lattice.hpp"

#include "nlheat/io.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <mutex>
#include <tuple>

namespace nlheat {

Lattice Lattice::make(int d, std::size_t n, double L) {
    Lattice l{d, n, L};
    l.validate();
    return l;
}

void Lattice::validate() const {
    if (d != 1 && d != 2) throw ConfigError("lattice dimension must be 1 or 2");
    if (n < 8 || (n & (n - 1)) != 0) throw ConfigError("lattice n must be a power of two >= 8");
    if (!(L > 0.0) || !std::isfinite(L)) throw ConfigError("lattice half extent L must be > 0");
}

Vec Lattice::point(std::size_t idx) const {
    if (d == 1) return vec1(coord(idx));
    return vec2(coord(idx / n), coord(idx % n));
}

Vec Lattice::dual_point(std::size_t idx) const {
    if (d == 1) return vec1(dual(idx));
    return vec2(dual(idx / n), dual(idx % n));
}

double LatticeField::quadrature() const {
    double hd = std::pow(lattice.h(), lattice.d), s = 0.0;
    if (domain == Domain::Linear) {
        for (double v : values) s += v;
    } else {
        for (double v : values) s += std::exp(v);
    }
    return hd * s;
}

LogValue log_sum_exp_accumulate(const std::vector<LogValue>& terms) {
    LogSumExp acc;
    for (const auto& t : terms)
        if (t.sign != 0) acc.add(t.log_magnitude);
    return LogValue::from_log(acc.value());
}

// ---------------------------------------------------------------- FFT

namespace {

std::mutex g_plan_mu;

fftw_plan get_plan(int d, std::size_t n, int sign) {
    static std::map<std::tuple<int, std::size_t, int>, fftw_plan> cache;
    std::lock_guard<std::mutex> lk(g_plan_mu);
    auto key = std::make_tuple(d, n, sign);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::size_t total = d == 1 ? n : n * n;
    auto* buf = fftw_alloc_complex(total);
    // FFTW_ESTIMATE keeps the algorithm choice deterministic across runs.
    unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan p = d == 1 ? fftw_plan_dft_1d(int(n), buf, buf, sign, flags)
                         : fftw_plan_dft_2d(int(n), int(n), buf, buf, sign, flags);
    fftw_free(buf);
    if (!p) throw ResourceError("fftw planning failed");
    cache.emplace(key, p);
    return p;
}

}  // namespace

void dft(std::vector<cplx>& data, int d, std::size_t n, int sign) {
    std::size_t total = d == 1 ? n : n * n;
    if (data.size() != total) throw ConfigError("dft: buffer size mismatch");
    fftw_plan p = get_plan(d, n, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD);
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(p, ptr, ptr);
}

namespace {
inline double parity(const Lattice& lat, std::size_t idx) {
    long m = lat.d == 1 ? Lattice::dual_index(idx, lat.n)
                        : Lattice::dual_index(idx / lat.n, lat.n) + Lattice::dual_index(idx % lat.n, lat.n);
    return (m & 1) ? -1.0 : 1.0;
}
}  // namespace

std::vector<cplx> field_to_dual(const Lattice& lat, const std::vector<double>& f) {
    if (f.size() != lat.size()) throw ConfigError("field size does not match lattice");
    std::vector<cplx> F(f.begin(), f.end());
    dft(F, lat.d, lat.n, +1);
    double hd = std::pow(lat.h(), lat.d);
    for (std::size_t i = 0; i < F.size(); ++i) F[i] *= hd * parity(lat, i);
    return F;
}

std::vector<cplx> dual_to_field(const Lattice& lat, std::vector<cplx> G) {
    if (G.size() != lat.size()) throw ConfigError("dual field size does not match lattice");
    for (std::size_t i = 0; i < G.size(); ++i) G[i] *= parity(lat, i);
    dft(G, lat.d, lat.n, -1);
    double s = std::pow(2.0 * lat.L, -lat.d);
    for (auto& v : G) v *= s;
    return G;
}

// ---------------------------------------------------------------- sampling

double aliasing_bound(const KernelFamily& fam, const Lattice& lat) {
    if (fam.bounded_support()) return fam.mu() <= lat.L ? 0.0 : fam.max_value();
    // images of a point in [-L, L) sit at distance >= (2j - 1) L
    double sum = 0.0;
    for (int j = 1; j < 1000; ++j) {
        double dist = (2.0 * j - 1.0) * lat.L;
        double mult = lat.d == 1 ? 2.0 : 8.0 * j;
        double term = mult * fam.c1() * std::exp(-fam.b() * std::pow(dist, fam.p()));
        sum += term;
        if (term < 1e-30 * sum || term == 0.0) break;
    }
    return sum;
}

LatticeField sample(const KernelFamily& fam, const Lattice& lat) {
    lat.validate();
    if (fam.dimension() != lat.d) throw ConfigError("kernel and lattice dimensions differ");
    double alias = aliasing_bound(fam, lat);
    if (alias >= 1e-13 * fam.max_value())
        throw ConfigError("aliasing bound " + std::to_string(alias) + " exceeds 1e-13*max a; increase L (now " +
                          std::to_string(lat.L) + ")");
    LatticeField f;
    f.lattice = lat;
    f.values.resize(lat.size());
    for (std::size_t i = 0; i < lat.size(); ++i) {
        double s = lat.point(i).norm();
        f.values[i] = s > fam.mu() ? 0.0 : fam.radial(s);
    }
    f.meta["aliasing_bound"] = alias;
    return f;
}

LatticeField convolve(const LatticeField& f, const LatticeField& g) {
    if (!(f.lattice == g.lattice)) throw ConfigError("convolve: lattices differ");
    if (f.domain != Domain::Linear || g.domain != Domain::Linear)
        throw ConfigError("convolve: both fields must be in the linear domain");
    auto F = field_to_dual(f.lattice, f.values);
    auto G = field_to_dual(g.lattice, g.values);
    for (std::size_t i = 0; i < F.size(); ++i) F[i] *= G[i];
    auto w = dual_to_field(f.lattice, std::move(F));
    LatticeField out;
    out.lattice = f.lattice;
    out.values.resize(w.size());
    double vmax = 0.0;
    for (auto& c : w) vmax = std::max(vmax, std::abs(c.real()));
    double clamped = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        double v = w[i].real();
        if (v < 0.0) {
            if (v < -1e-12 * vmax)
                throw NumericError("convolve: negative overshoot " + std::to_string(v) +
                                   " beyond tolerance (aliasing or ringing)");
            clamped = std::max(clamped, -v);
            v = 0.0;
        }
        out.values[i] = v;
    }
    out.meta["clamped_max"] = clamped;
    return out;
}

// ---------------------------------------------------------------- io

void write_csv(const LatticeField& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    const auto& lat = f.lattice;
    out << (lat.d == 1 ? "x," : "x1,x2,") << (f.domain == Domain::Log ? "ln_value" : "value") << "\n";
    for (std::size_t i = 0; i < lat.size(); ++i) {
        Vec x = lat.point(i);
        for (int k = 0; k < lat.d; ++k) out << fmt_double(x[k]) << ",";
        out << fmt_double(f.values[i]) << "\n";
    }
}

namespace {
template <class T>
void put_le(std::ostream& os, T v) {
    static_assert(sizeof(T) == 8);
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
    os.write(reinterpret_cast<const char*>(&u), 8);
}
template <class T>
T get_le(std::istream& is) {
    std::uint64_t u;
    is.read(reinterpret_cast<char*>(&u), 8);
    if (!is) throw ConfigError("binary field: truncated file");
    if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
    T v;
    std::memcpy(&v, &u, 8);
    return v;
}
}  // namespace

void write_binary(const LatticeField& f, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    put_le<std::int64_t>(out, f.lattice.d);
    put_le<std::int64_t>(out, std::int64_t(f.lattice.n));
    put_le<double>(out, f.lattice.L);
    for (double v : f.values) put_le<double>(out, v);
}

LatticeField read_binary(const std::string& path, Domain domain) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read '" + path + "'");
    LatticeField f;
    f.lattice.d = int(get_le<std::int64_t>(in));
    f.lattice.n = std::size_t(get_le<std::int64_t>(in));
    f.lattice.L = get_le<double>(in);
    f.lattice.validate();
    f.domain = domain;
    f.values.resize(f.lattice.size());
    for (auto& v : f.values) v = get_le<double>(in);
    return f;
}

}  // namespace nlheat
