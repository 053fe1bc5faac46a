#pragma once

#include "nlheat/common.hpp"
#include "nlheat/kernels.hpp"

#include <complex>
#include <map>
#include <string>
#include <vector>

namespace nlheat {

using cplx = std::complex<double>;

// Uniform periodic lattice on [-L, L)^d with n points per axis.
struct Lattice {
    int d = 1;
    std::size_t n = 8;
    double L = 1.0;

    static Lattice make(int d, std::size_t n, double L);
    void validate() const;
    double h() const { return 2.0 * L / double(n); }
    std::size_t size() const { return d == 1 ? n : n * n; }
    double coord(std::size_t j) const { return -L + double(j) * h(); }
    Vec point(std::size_t idx) const;
    // signed dual index of FFT slot j, and the dual frequency pi m / L
    static long dual_index(std::size_t j, std::size_t n) { return j < n / 2 ? long(j) : long(j) - long(n); }
    double dual(std::size_t j) const { return kPi * double(dual_index(j, n)) / L; }
    Vec dual_point(std::size_t idx) const;
    bool operator==(const Lattice& o) const { return d == o.d && n == o.n && L == o.L; }
};

enum class Domain { Linear, Log };

struct LatticeField {
    Lattice lattice;
    std::vector<double> values;
    Domain domain = Domain::Linear;
    std::map<std::string, double> meta;

    // h^d * sum(values) for linear fields, h^d * sum(exp(values)) for log fields
    double quadrature() const;
};

// ln|value| with sign in {+1, 0}; sign 0 iff log_magnitude = -inf.
struct LogValue {
    double log_magnitude = -kInf;
    int sign = 0;
    static LogValue from_log(double l) { return {l, l == -kInf ? 0 : 1}; }
};

LogValue log_sum_exp_accumulate(const std::vector<LogValue>& terms);

// Streaming log-sum-exp against the running maximum.
class LogSumExp {
public:
    void add(double l) {
        if (l == -kInf) return;
        if (l > m_) {
            s_ = s_ * std::exp(m_ - l) + 1.0;
            m_ = l;
        } else {
            s_ += std::exp(l - m_);
        }
    }
    double value() const { return m_ == -kInf ? -kInf : m_ + std::log(s_); }
    double max_term() const { return m_; }

private:
    double m_ = -kInf;
    double s_ = 0.0;
};

// Certified bound on sum_{m != 0} a(x + 2 L m) over the lattice cell.
double aliasing_bound(const KernelFamily& family, const Lattice& lat);

LatticeField sample(const KernelFamily& family, const Lattice& lat);

// Periodic convolution, scaled by h^d to approximate the continuum integral.
LatticeField convolve(const LatticeField& f, const LatticeField& g);

// Unnormalized in-place DFT (FFTW); sign -1 forward, +1 backward.
void dft(std::vector<cplx>& data, int d, std::size_t n, int sign);

// F(p_m) = h^d sum_j f_j e^{i p_m . x_j}, returned in FFT order.
std::vector<cplx> field_to_dual(const Lattice& lat, const std::vector<double>& f);
// w_j = (2L)^{-d} sum_m G_m e^{-i p_m . x_j}; inverse of field_to_dual.
std::vector<cplx> dual_to_field(const Lattice& lat, std::vector<cplx> G);

void write_csv(const LatticeField& f, const std::string& path);
void write_binary(const LatticeField& f, const std::string& path);
LatticeField read_binary(const std::string& path, Domain domain = Domain::Linear);

}  // namespace nlheat
