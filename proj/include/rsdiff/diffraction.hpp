#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rsdiff/algebra.hpp"
#include "rsdiff/substitution.hpp"

namespace rsdiff {

using Complex = std::complex<double>;

struct Weights {
    Complex ua{1.0, 0.0};
    Complex ub{1.0, 0.0};
};

/// Fourier-Bohr amplitude of the window [a,b) at internal frequency t:
/// dens * integral_a^b e^{2 pi i t y} dy
///   = dens * (b-a) * e^{i pi (a+b) t} * sinc(pi (b-a) t).
Complex interval_amplitude(double a, double b, double t, double lattice_density);

/// sin(x)/x with the removable singularity filled in.
double sinc(double x);

/**
 * Deterministic Bragg intensity at a module frequency.
 *
 * Metallic families evaluate the window amplitudes at t = k* - rho*k
 * (rho = 0 gives the undeformed tiling); the dyadic family uses the exact
 * period doubling amplitudes A_a = (2/3)((-1)^r/2^r) e^{2 pi i k} and
 * A_b = [r=0] - A_a.
 */
double det_intensity(const RandomSubstitutionSpec& spec, const KIndex& k, const Weights& w,
                     double rho = 0.0);

/// Bragg intensity of the locally randomised system: the deterministic
/// intensity times the probability-dependent factor product (finite for the
/// dyadic family, truncated by a geometric tail bound otherwise).
double random_intensity(const RandomSubstitutionSpec& spec, const KIndex& k, const Weights& w,
                        double rho = 0.0, double tol = 1e-10);

/// Radon-Nikodym density of the absolutely continuous diffraction part.
/// Closed forms exist for the Fibonacci family (weights and deformation
/// supported) and period doubling; noble means with m >= 2 has no closed
/// form and must be estimated via mc_sample.
double ac_density(const RandomSubstitutionSpec& spec, double k, const Weights& w,
                  double rho = 0.0, double tol = 1e-10);

/// E(X_n(k)) by the exact concatenation recursions.
Complex exact_expectation(const RandomSubstitutionSpec& spec, double k, int n, const Weights& w);

/// Var(X_n(k)) for period doubling in solved form
/// V_n = alpha_n V_1 + 2pq sum_j alpha_{n+1-j} psi_j, alpha_n = (2^n-(-1)^n)/3.
double pd_variance_closed(double p, double k, int n);

struct ExpSumStats {
    int level = 0;
    size_t samples = 0;
    std::vector<double> k;
    std::vector<Complex> mean;
    std::vector<double> variance;   // sample variance of the complex sums
    std::vector<double> bragg_est;  // |mean|^2 / L_n^2, the Bragg intensity estimate
};

/// Monte Carlo exponential sums over N independent level-n patches.
/// The Fibonacci family grows one concatenation chain per sample (sub-patches
/// reused); period doubling and noble means substitute letters independently,
/// which realises the independent copies of their recursions.
ExpSumStats mc_sample(const RandomSubstitutionSpec& spec, int n, const std::vector<double>& kgrid,
                      size_t N, uint64_t seed, const Weights& w);

/// One sampled level-n patch word, identical to the sample_index-th draw of
/// mc_sample with the same seed.
std::string sample_patch_word(const RandomSubstitutionSpec& spec, int level, uint64_t seed,
                              uint64_t sample_index = 0);

struct Peak {
    KIndex index;
    double k = 0;
    double intensity = 0;
    Peak(KIndex idx, double kk, double ii) : index(std::move(idx)), k(kk), intensity(ii) {}
};

struct Spectrum {
    std::string family;
    std::vector<double> params;
    double rho = 0;
    Weights weights;
    std::vector<Peak> pure_point;
    std::function<double(double)> ac; // empty when only Monte Carlo applies
    std::string ac_kind;              // "closed-form" or "monte-carlo"
    double ac_truncation_tol = 0;
};

/// Enumerates the pure-point spectrum: metallic indices (u,v) up to the given
/// height with k inside [k_lo, k_hi], or dyadic indices with r <= bound and
/// k in [0,1); drops peaks below `cutoff` and attaches the AC density.
Spectrum spectrum_enumerate(const RandomSubstitutionSpec& spec, int height_or_rmax, double cutoff,
                            const Weights& w, double rho = 0.0, double k_lo = -4.0,
                            double k_hi = 4.0);

/// Adaptive Simpson quadrature (used for integrating the AC density).
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-7);

} // namespace rsdiff
