#pragma once

#include <array>
#include <complex>
#include <map>
#include <vector>

#include "rsdiff/geometry.hpp"

namespace rsdiff {

using Complex = std::complex<double>;

/**
 * WeightedComb: a finite weighted Dirac comb with a declared support window.
 * The autocorrelation estimators divide by the window volume; the van Hove
 * boundary error is O(boundary/volume) and is accepted, not corrected.
 */
struct WeightedComb {
    std::vector<double> points;
    std::vector<Complex> weights;
    double window_lo = 0;
    double window_hi = 0;

    void validate() const;
    double volume() const { return window_hi - window_lo; }
    /// Smallest gap between distinct points (uniform discreteness radius).
    double discreteness_radius() const;
};

/// Autocorrelation coefficients: eta(z) = sum_{y-x=z} conj(w_x) w_y / vol,
/// for |z| <= maxz (all differences when maxz < 0).  Differences within
/// 1e-9 are binned together.
std::map<double, Complex> autocorrelation(const WeightedComb& comb, double maxz = -1);

/// Letter-resolved pair correlations of an exact point set:
/// eta[ab](z) = #{x : type x = a, type (x+z) = b} / span, keyed by exact
/// difference.  Entries ordered aa, ab, ba, bb.
std::map<QuadNum, std::array<double, 4>> pair_correlations(const LabeledPointSet& ps,
                                                           double maxz);

/// Sliding-window norm sup_t |comb|([t, t+K]).
double k_norm(const WeightedComb& comb, double K);

struct MeanConvergenceDiag {
    double mean_diag = 0; // (1/vol) integral over K+A of |(mu - omega) * g|
    double alt_diag = 0;  // |mu - omega|(A) / vol(A)
};

/// Convergence-in-mean diagnostics for a pair of combs on matching windows;
/// g is a triangular bump of unit mass and half-width `bump_halfwidth`.
MeanConvergenceDiag mean_convergence_diag(const WeightedComb& mu, const WeightedComb& omega,
                                          double bump_halfwidth = 0.5);

} // namespace rsdiff
