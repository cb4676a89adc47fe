#pragma once

#include <gmpxx.h>

#include <cmath>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsdiff/common.hpp"

namespace rsdiff {

using BigInt = mpz_class;

/// Double value of the metallic mean lambda_m = (m + sqrt(m^2+4))/2.
double metallic_lambda(int m);

/// Conjugate root lambda'_m = (m - sqrt(m^2+4))/2 = m - lambda_m, in (-1, 0).
double metallic_lambda_conj(int m);

/**
 * QuadNum: exact element u + v*lambda_m of the ring Z[lambda_m].
 *
 * lambda_m is the metallic mean, the positive root of x^2 = m*x + 1, so
 * multiplication closes via lambda^2 = m*lambda + 1.  Coefficients are
 * arbitrary-precision; inflation powers lambda^n overflow 64-bit integers
 * around n ~ 40 already for m = 1.  Values are immutable after construction.
 */
class QuadNum {
public:
    QuadNum() : u_(0), v_(0), m_(1) {}
    QuadNum(BigInt u, BigInt v, int m) : u_(std::move(u)), v_(std::move(v)), m_(m) {
        if (m < 1) throw std::invalid_argument("QuadNum: ring parameter m must be >= 1");
    }
    QuadNum(long u, long v, int m) : QuadNum(BigInt(u), BigInt(v), m) {}

    const BigInt& u() const { return u_; }
    const BigInt& v() const { return v_; }
    int m() const { return m_; }

    /// lambda_m itself, i.e. 0 + 1*lambda_m.
    static QuadNum lambda(int m) { return QuadNum(0, 1, m); }
    /// lambda'_m = m - lambda_m (also a unit of the ring).
    static QuadNum lambda_conj(int m) { return QuadNum(m, -1, m); }
    static QuadNum integer(long n, int m) { return QuadNum(n, 0, m); }

    QuadNum operator+(const QuadNum& o) const {
        check(o);
        return QuadNum(u_ + o.u_, v_ + o.v_, m_);
    }
    QuadNum operator-(const QuadNum& o) const {
        check(o);
        return QuadNum(u_ - o.u_, v_ - o.v_, m_);
    }
    QuadNum operator-() const { return QuadNum(-u_, -v_, m_); }
    QuadNum operator*(const QuadNum& o) const {
        check(o);
        // (u1 + v1 L)(u2 + v2 L) with L^2 = mL + 1
        BigInt vv = v_ * o.v_;
        return QuadNum(u_ * o.u_ + vv, u_ * o.v_ + v_ * o.u_ + m_ * vv, m_);
    }

    bool operator==(const QuadNum& o) const { return m_ == o.m_ && u_ == o.u_ && v_ == o.v_; }
    bool operator!=(const QuadNum& o) const { return !(*this == o); }
    bool operator<(const QuadNum& o) const {
        check(o);
        return (*this - o).sign() < 0;
    }
    bool operator<=(const QuadNum& o) const { return !(o < *this); }
    bool operator>(const QuadNum& o) const { return o < *this; }
    bool operator>=(const QuadNum& o) const { return !(*this < o); }

    /// Algebraic conjugation (the star map): u + v*lambda |-> u + v*lambda'
    /// expressed in the basis (1, lambda) as (u + m v) - v*lambda.
    QuadNum star() const { return QuadNum(u_ + m_ * BigInt(v_), -v_, m_); }

    /// Exact sign of u + v*lambda_m.
    int sign() const;

    /// Double embedding; evaluated in 256-bit precision before the final
    /// rounding, since u and v*lambda cancel catastrophically for inflation
    /// powers (coefficients grow like lambda^n while the value stays O(1)).
    double value() const;

    /// Exact n-th power (n >= 0).
    QuadNum pow(unsigned n) const;

    std::string str() const;

private:
    void check(const QuadNum& o) const {
        if (m_ != o.m_)
            throw std::invalid_argument("QuadNum: ring parameter mismatch (m=" +
                                        std::to_string(m_) + " vs " + std::to_string(o.m_) + ")");
    }
    BigInt u_, v_;
    int m_;
};

enum class QuadOp { Add, Sub, Mul };

inline QuadNum quad_arith(const QuadNum& a, const QuadNum& b, QuadOp op) {
    switch (op) {
        case QuadOp::Add: return a + b;
        case QuadOp::Sub: return a - b;
        case QuadOp::Mul: return a * b;
    }
    throw std::invalid_argument("quad_arith: bad op");
}

inline QuadNum quad_star(const QuadNum& a) { return a.star(); }

/**
 * KIndex: a frequency of the Fourier module.
 *
 * Metallic: k = (u + v*lambda_m)/sqrt(m^2+4), the module F_m.
 * Dyadic:   k = num/2^r with r = 0 or num odd (reduced at construction);
 *           there is no real-valued star in the dyadic case.
 */
class KIndex {
public:
    static KIndex metallic(long u, long v, int m) {
        KIndex k;
        k.metallic_ = QuadNum(u, v, m);
        k.dyadic_ = false;
        return k;
    }
    static KIndex metallic(QuadNum q) {
        KIndex k;
        k.metallic_ = std::move(q);
        k.dyadic_ = false;
        return k;
    }
    static KIndex dyadic(long long num, int r) {
        if (r < 0) throw std::invalid_argument("KIndex: r must be >= 0");
        while (r > 0 && num % 2 == 0) { num /= 2; --r; }
        KIndex k;
        k.dyadic_ = true;
        k.num_ = num;
        k.r_ = r;
        return k;
    }

    bool is_dyadic() const { return dyadic_; }
    const QuadNum& quad() const { return metallic_; }
    long long num() const { return num_; }
    int r() const { return r_; }

    double k() const {
        if (dyadic_) return static_cast<double>(num_) / std::ldexp(1.0, r_);
        return metallic_.value() / std::sqrt(static_cast<double>(metallic_.m()) * metallic_.m() + 4.0);
    }

    /// Star frequency; empty for dyadic indices.
    std::optional<double> k_star() const {
        if (dyadic_) return std::nullopt;
        // sign flip sqrt(m^2+4) -> -sqrt(m^2+4)
        return -metallic_.star().value() /
               std::sqrt(static_cast<double>(metallic_.m()) * metallic_.m() + 4.0);
    }

    std::string str() const;

private:
    KIndex() = default;
    QuadNum metallic_;
    bool dyadic_ = false;
    long long num_ = 0;
    int r_ = 0;
};

/// Largest j with 2^j | n; n = 0 signals infinite valuation.
int padic_valuation(const BigInt& n);
inline int padic_valuation(long long n) { return padic_valuation(BigInt(static_cast<long>(n))); }

/**
 * PAdicApprox: an element of Z_2 modulo 2^precision, stored as bits in
 * low-order-first order.  Nonnegative integers embed via binary expansion.
 */
struct PAdicApprox {
    std::vector<uint8_t> bits; // low-order first, values 0/1
    int precision = 0;

    static PAdicApprox from_integer(BigInt n, int precision);
    /// The 2-adic -1 = ...1111 truncated to the given precision.
    static PAdicApprox all_ones(int precision);

    /// n mod 2^j as an ordinary integer, j <= precision.
    BigInt truncate(int j) const;
};

} // namespace rsdiff
