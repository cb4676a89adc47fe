#pragma once

#include <map>
#include <utility>
#include <vector>

#include "rsdiff/algebra.hpp"
#include "rsdiff/geometry.hpp"
#include "rsdiff/substitution.hpp"

namespace rsdiff {

/// Fixed point of the two-state occupation chain at x = 0: iterates
/// [[q,1],[p,0]] from (1/2, 1/2) and returns (g_a(0), g_b(0), iterations).
/// Converges to (1/(1+p), p/(1+p)) for p < 1.
struct MarkovFixedPoint {
    double ga0 = 0, gb0 = 0;
    int iterations = 0;
};
MarkovFixedPoint markov_fixed_point(double p, double tol = 1e-12, int max_iterations = 200);

/**
 * OccupationTable: level-n occupation probabilities g^(n) on the patch
 * positions.  Metallic families key by exact position; the dyadic family
 * stores a dense vector over [0, 2^n) where entry x holds P(type at x = a)
 * and g_b = 1 - g_a.
 */
struct OccupationTable {
    int level = 0;
    Family family = Family::Custom;
    int m = 1;
    std::map<QuadNum, std::pair<double, double>> values; // metallic
    std::vector<double> dyadic_a;                        // dyadic: a-probability per site

    std::pair<double, double> at(const QuadNum& x) const;
};

/// Level-n table from the seed condition g^(0)_alpha(x) = [alpha=a][x=0].
OccupationTable g_iterate(const RandomSubstitutionSpec& spec, int n);

/// Limit occupation probabilities, solved by the renormalisation identities
/// downward in position and anchored at the fixed point at 0.  Positions
/// outside Lambda_{>=0} give (0, 0) by convention.
std::map<QuadNum, std::pair<double, double>> g_limit(const RandomSubstitutionSpec& spec,
                                                     const std::vector<QuadNum>& positions);
std::pair<double, double> g_limit_at(const RandomSubstitutionSpec& spec, const QuadNum& x);

/// Limit a-probability for the period doubling chain (Fact-style recursion
/// a_{2n} = 1 - q a_n, a_{2n+1} = 1 - p a_n, a_0 = 1/(1+q)).
double pd_a_limit(double p, const BigInt& x);

/**
 * AtomicMeasure: finite atom list approximating the infinite Bernoulli
 * convolution mu = conv_l (sum_n p_n delta_{n (lambda')^l}).  Truncation
 * keeps total mass 1; only atom positions are off by at most
 * tail_shift_bound.
 */
struct AtomicMeasure {
    std::vector<std::pair<double, double>> atoms; // (position, mass), sorted
    double total_mass = 0;
    double tail_shift_bound = 0;
    int depth = 0;
};

/// First L convolution factors, atoms within 1e-14 merged.
/// Guard: (m+1)^L <= 10^7.
AtomicMeasure mu_truncated(const RandomSubstitutionSpec& spec, int depth);

/// mu((lo, hi]) with a certified enclosure, evaluated by adaptive splitting
/// of the convolution factors near the interval boundary.
struct MassResult {
    double value = 0;
    double error_bound = 0;
};
MassResult mu_interval_mass(const RandomSubstitutionSpec& spec, double lo, double hi,
                            double tol = 1e-8);

/// Weight function h_letter(y) = (1_J * mu)(y) with J = [0,1) for a and
/// [lambda', 0) for b; returns 0 outside the covering window.
double h_eval(const RandomSubstitutionSpec& spec, double y, char letter, double tol = 1e-8);
MassResult h_eval_with_bound(const RandomSubstitutionSpec& spec, double y, char letter,
                             double tol = 1e-8);

/// 2-adic weight function h(z mod 2^j) for period doubling, with the
/// uniform-continuity error bound (max{p,q})^j.
MassResult h_eval_padic(double p, const PAdicApprox& z, int j);

} // namespace rsdiff
