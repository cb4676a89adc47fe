#include "rsdiff/entropy.hpp"

#include <cmath>

namespace rsdiff {

double entropy_exact(Family family) {
    if (family == Family::PeriodDoubling) return (2.0 / 3.0) * std::log(2.0);
    if (family != Family::Fibonacci)
        throw std::invalid_argument("entropy_exact: no closed form for this family");
    const double tau = metallic_lambda(1);
    double sum = 0;
    for (int l = 2; l < 400; ++l) {
        sum += std::log(static_cast<double>(l)) / std::pow(tau, l + 2);
        // tail: log(j) <= log(l) + (j-l)/l for j >= l, summed geometrically
        double x = 1.0 / tau;
        double tail = (std::log(l + 1.0) / (1 - x) + x / (l * (1 - x) * (1 - x))) *
                      std::pow(tau, -(l + 3));
        if (tail < 1e-12) break;
    }
    return sum;
}

BigInt pd_a_count(int r) {
    if (r < 0) throw std::invalid_argument("pd_a_count: r >= 0");
    BigInt two = 2, p;
    mpz_pow_ui(p.get_mpz_t(), two.get_mpz_t(), static_cast<unsigned long>(r + 1));
    p += (r % 2 == 0) ? 1 : -1;
    return p / 3;
}

BigInt count_exact_words(int r, CountMode mode) {
    if (r < 0) throw std::invalid_argument("count_exact_words: r >= 0");
    if (mode == CountMode::Formula) {
        BigInt two = 2, e;
        mpz_pow_ui(e.get_mpz_t(), two.get_mpz_t(), static_cast<unsigned long>(r + 2));
        e -= (r % 2 == 0) ? 1 : -1;
        e -= 3;
        e /= 6;
        BigInt out;
        mpz_pow_ui(out.get_mpz_t(), two.get_mpz_t(), e.get_ui());
        return out;
    }
    if (r > 4) throw GuardError("count_exact_words: brute force guarded at r <= 4");
    auto words = exact_patches(period_doubling_spec(0.5), r);
    return BigInt(static_cast<unsigned long>(words.size()));
}

std::pair<double, size_t> entropy_estimate(const RandomSubstitutionSpec& spec, int n) {
    if (n < 1) throw std::invalid_argument("entropy_estimate: n >= 1");
    if (n > 18) throw GuardError("entropy_estimate: n exceeds guard (18)");
    auto words = legal_words(spec, n);
    return {std::log(static_cast<double>(words.size())) / n, words.size()};
}

} // namespace rsdiff
