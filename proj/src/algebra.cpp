#include "rsdiff/algebra.hpp"

#include <map>
#include <mutex>
#include <sstream>

namespace rsdiff {

double metallic_lambda(int m) {
    return 0.5 * (m + std::sqrt(static_cast<double>(m) * m + 4.0));
}

namespace {

// lambda_m at 256 bits, cached per ring parameter
const mpf_class& metallic_lambda_mpf(int m) {
    static std::map<int, mpf_class> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(m);
    if (it == cache.end()) {
        mpf_class root(0, 256);
        mpf_class disc(static_cast<long>(m) * m + 4, 256);
        mpf_sqrt(root.get_mpf_t(), disc.get_mpf_t());
        mpf_class lam(0, 256);
        lam = (root + m) / 2;
        it = cache.emplace(m, lam).first;
    }
    return it->second;
}

} // namespace

double QuadNum::value() const {
    mpf_class acc(u_, 256);
    mpf_class vv(v_, 256);
    acc += vv * metallic_lambda_mpf(m_);
    return acc.get_d();
}

double metallic_lambda_conj(int m) {
    return 0.5 * (m - std::sqrt(static_cast<double>(m) * m + 4.0));
}

int QuadNum::sign() const {
    // sign of u + v*lambda = sign of (2u + mv) + v*sqrt(m^2+4), decided in Z.
    int su = sgn(u_), sv = sgn(v_);
    if (sv == 0) return su;
    BigInt a = 2 * u_ + m_ * BigInt(v_); // rational part doubled
    BigInt b = v_;                       // sqrt coefficient
    int sa = sgn(a), sb = sgn(b);
    if (sa >= 0 && sb >= 0) return (sa == 0 && sb == 0) ? 0 : 1;
    if (sa <= 0 && sb <= 0) return -1;
    BigInt lhs = a * a;
    BigInt rhs = b * b * (BigInt(m_) * m_ + 4);
    if (sa > 0) { // a > 0, b < 0: positive iff a^2 > b^2 D
        return lhs > rhs ? 1 : (lhs == rhs ? 0 : -1);
    }
    // a < 0, b > 0: positive iff b^2 D > a^2
    return rhs > lhs ? 1 : (rhs == lhs ? 0 : -1);
}

QuadNum QuadNum::pow(unsigned n) const {
    QuadNum result(1, 0, m_);
    QuadNum base = *this;
    while (n > 0) {
        if (n & 1u) result = result * base;
        base = base * base;
        n >>= 1u;
    }
    return result;
}

std::string QuadNum::str() const {
    std::ostringstream os;
    os << u_.get_str() << (sgn(v_) < 0 ? "" : "+") << v_.get_str() << "*lambda_" << m_;
    return os.str();
}

std::string KIndex::str() const {
    std::ostringstream os;
    if (dyadic_) {
        os << num_ << "/2^" << r_;
    } else {
        os << "(" << metallic_.u().get_str() << (sgn(metallic_.v()) < 0 ? "" : "+")
           << metallic_.v().get_str() << "*lambda_" << metallic_.m() << ")/sqrt("
           << metallic_.m() * metallic_.m() + 4 << ")";
    }
    return os.str();
}

int padic_valuation(const BigInt& n) {
    if (sgn(n) == 0) throw std::domain_error("padic_valuation: n = 0 has infinite valuation");
    return static_cast<int>(mpz_scan1(n.get_mpz_t(), 0));
}

PAdicApprox PAdicApprox::from_integer(BigInt n, int precision) {
    if (sgn(n) < 0) throw std::invalid_argument("PAdicApprox: embed nonnegative integers only");
    if (precision < 1) throw std::invalid_argument("PAdicApprox: precision must be positive");
    PAdicApprox z;
    z.precision = precision;
    z.bits.resize(precision, 0);
    for (int i = 0; i < precision; ++i)
        z.bits[i] = static_cast<uint8_t>(mpz_tstbit(n.get_mpz_t(), i));
    return z;
}

PAdicApprox PAdicApprox::all_ones(int precision) {
    if (precision < 1) throw std::invalid_argument("PAdicApprox: precision must be positive");
    PAdicApprox z;
    z.precision = precision;
    z.bits.assign(precision, 1);
    return z;
}

BigInt PAdicApprox::truncate(int j) const {
    if (j > precision) throw std::invalid_argument("PAdicApprox: truncation beyond precision");
    BigInt n = 0;
    for (int i = j - 1; i >= 0; --i) {
        n <<= 1;
        n += bits[static_cast<size_t>(i)];
    }
    return n;
}

} // namespace rsdiff
