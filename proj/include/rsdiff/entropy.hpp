#pragma once

#include <cstddef>
#include <utility>

#include "rsdiff/algebra.hpp"
#include "rsdiff/substitution.hpp"

namespace rsdiff {

/// Topological entropy: the Fibonacci series sum_{l>=2} log(l)/tau^(l+2)
/// (summed until the geometric tail bound drops below 1e-12) or the period
/// doubling closed form (2/3) log 2.  No closed form exists for noble means
/// with m >= 2.
double entropy_exact(Family family);

enum class CountMode { Formula, BruteForce };

/// Number of distinct realisations of the r-fold period doubling image of a:
/// 2^((2^(r+2) - (-1)^r - 3)/6), exact; brute force enumerates realisations
/// and is guarded at r <= 4.
BigInt count_exact_words(int r, CountMode mode);

/// Every realisation of the r-fold image of a contains exactly
/// (2^(r+1) + (-1)^r)/3 letters a.
BigInt pd_a_count(int r);

/// log |legal_words(n)| / n together with the word count.
std::pair<double, size_t> entropy_estimate(const RandomSubstitutionSpec& spec, int n);

} // namespace rsdiff
