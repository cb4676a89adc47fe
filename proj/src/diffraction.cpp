#include "rsdiff/diffraction.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "rsdiff/geometry.hpp"
#include "rsdiff/rng.hpp"

namespace rsdiff {

namespace {

void require_builtin(const RandomSubstitutionSpec& spec, const char* who) {
    if (spec.family == Family::Custom)
        throw std::invalid_argument(std::string(who) + ": builtin families only");
}

bool is_dyadic(const RandomSubstitutionSpec& spec) { return spec.family == Family::PeriodDoubling; }

double pair_prob_sum(const std::vector<double>& probs) {
    double s = 0;
    for (size_t i = 0; i < probs.size(); ++i)
        for (size_t j = i + 1; j < probs.size(); ++j) s += probs[i] * probs[j];
    return s;
}

Complex unit_phase(double x) { return std::polar(1.0, -2.0 * kPi * x); } // e^{-2 pi i x}

} // namespace

double sinc(double x) {
    if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

Complex interval_amplitude(double a, double b, double t, double lattice_density) {
    if (!(a < b)) throw std::invalid_argument("interval_amplitude: need a < b");
    double len = b - a;
    return lattice_density * len * std::polar(1.0, kPi * (a + b) * t) * sinc(kPi * len * t);
}

namespace {

// star frequency (deformed: k* - rho k) of a metallic index
double internal_frequency(const KIndex& k, double rho) {
    auto ks = k.k_star();
    if (!ks) throw std::invalid_argument("metallic frequency expected");
    return *ks - rho * k.k();
}

Complex metallic_amplitude_sum(const RandomSubstitutionSpec& spec, const KIndex& k,
                               const Weights& w, double rho) {
    const int m = spec.m;
    if (k.is_dyadic() || k.quad().m() != m)
        throw std::invalid_argument("det_intensity: frequency outside the family module");
    const double dens = 1.0 / std::sqrt(static_cast<double>(m) * m + 4.0);
    const double lamc = metallic_lambda_conj(m);
    const double t = internal_frequency(k, rho);
    Complex Aa = interval_amplitude(0.0, 1.0, t, dens);
    Complex Ab = interval_amplitude(lamc, 0.0, t, dens);
    return w.ua * Aa + w.ub * Ab;
}

Complex pd_amplitude_sum(const KIndex& k, const Weights& w) {
    if (!k.is_dyadic()) throw std::invalid_argument("det_intensity: dyadic frequency expected");
    const int r = k.r();
    double sign = (r % 2 == 0) ? 1.0 : -1.0;
    Complex Aa = (2.0 / 3.0) * (sign / std::ldexp(1.0, r)) * std::polar(1.0, 2.0 * kPi * k.k());
    Complex Ab = (r == 0 ? Complex(1.0, 0.0) : Complex(0.0, 0.0)) - Aa;
    return w.ua * Aa + w.ub * Ab;
}

} // namespace

double det_intensity(const RandomSubstitutionSpec& spec, const KIndex& k, const Weights& w,
                     double rho) {
    require_builtin(spec, "det_intensity");
    if (rho != 0.0 && spec.family != Family::Fibonacci)
        throw std::invalid_argument("det_intensity: deformation is Fibonacci-family only");
    Complex amp = is_dyadic(spec) ? pd_amplitude_sum(k, w) : metallic_amplitude_sum(spec, k, w, rho);
    return std::norm(amp);
}

double random_intensity(const RandomSubstitutionSpec& spec, const KIndex& k, const Weights& w,
                        double rho, double tol) {
    double det = det_intensity(spec, k, w, rho);
    if (is_dyadic(spec)) {
        // finite product over l = 1..r
        const double p = spec.probs[0], q = 1 - p;
        double prod = 1.0;
        for (int l = 1; l <= k.r(); ++l) {
            double x = std::ldexp(1.0, l) * k.k(); // 2^l * k, phase angle in half-turns
            prod *= std::norm(q + p * std::polar(1.0, -kPi * x));
        }
        return det * prod;
    }
    const int m = spec.m;
    const double lamc = metallic_lambda_conj(m);
    const double abslc = std::abs(lamc);
    const double t = internal_frequency(k, rho);
    // remaining-factor deficit: sum_{l>L} 4 S (pi m |lambda'|^l |t|)^2 < tol
    const double S = pair_prob_sum(spec.probs);
    double prod = 1.0;
    double tail = 4.0 * S * kPi * kPi * m * m * t * t * abslc * abslc / (1 - abslc * abslc);
    for (int l = 1; tail > tol && l < 4000; ++l) {
        Complex factor = 0;
        double shift = std::pow(lamc, l);
        for (int n = 0; n <= m; ++n)
            factor += spec.probs[static_cast<size_t>(n)] * std::polar(1.0, 2.0 * kPi * n * shift * t);
        prod *= std::norm(factor);
        tail *= abslc * abslc;
        if (prod == 0.0) break;
    }
    return det * prod;
}

namespace {

// psi(k) = 1/2 |(1 - e^{-2 pi i l_b k}) u_a - (1 - e^{-2 pi i l_a k}) u_b|^2
// covers both the weighted (rho = 0) and the deformed (unit-weight) forms.
double fib_psi(double k, const Weights& w, double la, double lb) {
    Complex term = (1.0 - unit_phase(lb * k)) * w.ua - (1.0 - unit_phase(la * k)) * w.ub;
    return 0.5 * std::norm(term);
}

} // namespace

double ac_density(const RandomSubstitutionSpec& spec, double k, const Weights& w, double rho,
                  double tol) {
    require_builtin(spec, "ac_density");
    if (spec.family == Family::NobleMeans)
        throw std::invalid_argument(
            "ac_density: no closed form for noble means with m >= 2; use mc_sample");
    if (spec.family == Family::PeriodDoubling) {
        const double p = spec.probs[0], q = 1 - p;
        if (p * q == 0) return 0.0;
        double sum = 0, prod = 1.0;
        const double pref = 4.0 * p * q / 3.0;
        for (int n = 1; n < 200; ++n) {
            double pw = std::ldexp(1.0, n); // 2^n
            sum += (1.0 - std::cos(pw * kPi * k)) / pw * prod;
            prod *= std::norm(q + p * std::polar(1.0, -pw * kPi * k));
            if (pref * 2.0 * (2.0 / pw) < tol) break; // geometric tail, products <= 1
        }
        return pref * sum;
    }
    // Fibonacci family (rho = 0 or deformed)
    const double p = spec.probs[0], q = 1 - p;
    if (p * q == 0) return 0.0;
    const double tau = metallic_lambda(1), sigma = metallic_lambda_conj(1);
    const double la = tau + rho * (1 - tau), lb = 1 + rho;
    const double psi = fib_psi(k, w, la, lb);
    const double pref = 2.0 * p * q * tau / std::sqrt(5.0);
    double am = std::abs(w.ua) + std::abs(w.ub);
    const double psi_max = 2.0 * am * am;
    double sum = 0, prod = 1.0, taun = tau * tau;
    for (int n = 2; n < 300; ++n) {
        sum += psi / taun * prod;
        // next factor (level n-1 appears in the term for n+1)
        double len = std::pow(tau, n - 1) + rho * std::pow(sigma, n - 1);
        prod *= std::norm(p + q * unit_phase(len * k));
        taun *= tau;
        if (pref * psi_max / (taun * (1 - 1 / tau)) < tol) break;
    }
    return pref * sum;
}

Complex exact_expectation(const RandomSubstitutionSpec& spec, double k, int n, const Weights& w) {
    require_builtin(spec, "exact_expectation");
    if (n < 0 || n > 60) throw std::invalid_argument("exact_expectation: need 0 <= n <= 60");
    if (spec.family == Family::PeriodDoubling) {
        const double p = spec.probs[0], q = 1 - p;
        Complex e = unit_phase(k);
        Complex E0 = w.ua;
        Complex E1 = p * (w.ua + w.ub * e) + q * (w.ub + w.ua * e);
        if (n == 0) return E0;
        if (n == 1) return E1;
        Complex prev = E0, cur = E1;
        for (int j = 2; j <= n; ++j) {
            double h = std::ldexp(1.0, j - 1); // 2^(j-1)
            Complex ph_full = unit_phase(h * k);       // e^{-2 pi i 2^{j-1} k} = e^{-2^j pi i k}
            Complex ph_half = unit_phase(0.5 * h * k); // e^{-2^{j-1} pi i k}
            Complex ph_three = unit_phase(1.5 * h * k);
            Complex next = (p + q * ph_full) * cur +
                           (q + q * ph_half + p * ph_full + p * ph_three) * prev;
            prev = cur;
            cur = next;
        }
        return cur;
    }
    // metallic: level-0 patch is the b tile, level-1 patch the a tile
    const int m = spec.m;
    const double lam = metallic_lambda(m);
    Complex prev = w.ub, cur = w.ua;
    if (n == 0) return prev;
    if (n == 1) return cur;
    for (int j = 2; j <= n; ++j) {
        double Lm1 = std::pow(lam, j - 1), Lm2 = std::pow(lam, j - 2);
        Complex c1 = 0, c2 = 0;
        for (int i = 0; i <= m; ++i) {
            double pi = spec.probs[static_cast<size_t>(i)];
            if (pi == 0) continue;
            // branch i: j-1 copies of the level-(j-1) patch around one level-(j-2) patch
            for (int rcopy = 0; rcopy < i; ++rcopy) c1 += pi * unit_phase(rcopy * Lm1 * k);
            c2 += pi * unit_phase(i * Lm1 * k);
            for (int rcopy = i; rcopy < m; ++rcopy)
                c1 += pi * unit_phase((Lm2 + rcopy * Lm1) * k);
        }
        Complex next = c1 * cur + c2 * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

double pd_variance_closed(double p, double k, int n) {
    if (n < 0 || n > 60) throw std::invalid_argument("pd_variance_closed: need 0 <= n <= 60");
    const double q = 1 - p;
    if (n == 0) return 0.0;
    const double V1 = 2 * p * q * (1.0 - std::cos(2 * kPi * k));
    auto alpha = [](int j) {
        return (std::ldexp(1.0, j) - ((j % 2 == 0) ? 1.0 : -1.0)) / 3.0;
    };
    double sum = alpha(n) * V1;
    double prod = std::norm(q + p * unit_phase(k)); // product up to l = 1
    for (int j = 2; j <= n; ++j) {
        double psi_j = (1.0 - std::cos(std::ldexp(1.0, j) * kPi * k)) * prod;
        sum += 2 * p * q * alpha(n + 1 - j) * psi_j;
        prod *= std::norm(q + p * std::polar(1.0, -std::ldexp(1.0, j) * kPi * k));
    }
    return sum;
}

namespace {

struct SamplePatch {
    std::vector<double> pos;
    std::string letters;
};

std::string fib_chain_word(const RandomSubstitutionSpec& spec, int n, const CounterRng& stream) {
    // concatenation chain: level j patch from the same level j-1 and j-2
    // realisations, one binary decision per level
    const double p = spec.probs[0];
    std::string wm2 = "b", wm1 = "a";
    if (n == 0) wm1 = wm2;
    for (int j = 2; j <= n; ++j) {
        double u = stream.derive(static_cast<uint64_t>(j)).uniform();
        std::string w = (u < p) ? wm2 + wm1 : wm1 + wm2;
        wm2 = std::move(wm1);
        wm1 = std::move(w);
    }
    return wm1;
}

std::string grown_word(const RandomSubstitutionSpec& spec, int n, const CounterRng& stream) {
    // independent letter substitutions; level-n patch of the dyadic family is
    // the n-fold image of a, the metallic one the (n-1)-fold image
    int steps = is_dyadic(spec) ? n : n - 1;
    if (steps < 0) return "b";
    std::string word = "a";
    for (int level = 0; level < steps; ++level)
        word = apply_random(spec, word, stream, static_cast<uint64_t>(level));
    return word;
}

SamplePatch make_patch(const RandomSubstitutionSpec& spec, int n, const CounterRng& stream) {
    SamplePatch patch;
    patch.letters = spec.family == Family::Fibonacci ? fib_chain_word(spec, n, stream)
                                                     : grown_word(spec, n, stream);
    if (is_dyadic(spec)) {
        patch.pos.resize(patch.letters.size());
        for (size_t i = 0; i < patch.letters.size(); ++i) patch.pos[i] = static_cast<double>(i);
    } else {
        patch.pos = realize(patch.letters, spec).float_positions();
    }
    return patch;
}

} // namespace

std::string sample_patch_word(const RandomSubstitutionSpec& spec, int level, uint64_t seed,
                              uint64_t sample_index) {
    // generating patches substitute every letter independently for all
    // families; the concatenation chain (15 shared decisions at level 16)
    // stays internal to the Fibonacci branch of mc_sample, where it is the
    // stated statistical model for the exponential sums
    require_builtin(spec, "sample_patch_word");
    if (level > 30) throw GuardError("sample_patch_word: level exceeds guard (30)");
    CounterRng stream = CounterRng(seed).derive(sample_index);
    return grown_word(spec, level, stream);
}

ExpSumStats mc_sample(const RandomSubstitutionSpec& spec, int n, const std::vector<double>& kgrid,
                      size_t N, uint64_t seed, const Weights& w) {
    require_builtin(spec, "mc_sample");
    if (N < 2) throw std::invalid_argument("mc_sample: need at least 2 samples");
    if (n > 30) throw GuardError("mc_sample: level exceeds guard (30)");

    ExpSumStats stats;
    stats.level = n;
    stats.samples = N;
    stats.k = kgrid;
    const size_t K = kgrid.size();
    std::vector<Complex> sums(N * K);

    CounterRng root(seed);
    auto run_range = [&](size_t begin, size_t end) {
        for (size_t s = begin; s < end; ++s) {
            CounterRng stream = root.derive(s);
            SamplePatch patch = make_patch(spec, n, stream);
            for (size_t ki = 0; ki < K; ++ki) {
                Complex acc = 0;
                const double k = kgrid[ki];
                for (size_t i = 0; i < patch.pos.size(); ++i) {
                    Complex weight = patch.letters[i] == 'a' ? w.ua : w.ub;
                    acc += weight * unit_phase(k * patch.pos[i]);
                }
                sums[s * K + ki] = acc;
            }
        }
    };

    size_t threads = 1;
    if (const char* env = std::getenv("RSDIFF_THREADS")) {
        long parsed = std::strtol(env, nullptr, 10);
        if (parsed > 1) threads = static_cast<size_t>(parsed);
    }
    threads = std::min(threads, N);
    if (threads <= 1) {
        run_range(0, N);
    } else {
        std::vector<std::thread> pool;
        size_t chunk = (N + threads - 1) / threads;
        for (size_t t = 0; t < threads; ++t) {
            size_t begin = t * chunk, end = std::min(N, begin + chunk);
            if (begin < end) pool.emplace_back(run_range, begin, end);
        }
        for (auto& th : pool) th.join();
    }

    const double Ln = is_dyadic(spec) ? std::ldexp(1.0, n) : std::pow(metallic_lambda(spec.m), n);
    stats.mean.resize(K);
    stats.variance.resize(K);
    stats.bragg_est.resize(K);
    for (size_t ki = 0; ki < K; ++ki) {
        Complex mean = 0;
        for (size_t s = 0; s < N; ++s) mean += sums[s * K + ki];
        mean /= static_cast<double>(N);
        double var = 0;
        for (size_t s = 0; s < N; ++s) var += std::norm(sums[s * K + ki] - mean);
        var /= static_cast<double>(N - 1);
        stats.mean[ki] = mean;
        stats.variance[ki] = var;
        // pointwise Bragg intensity estimate |E(X_n)|^2 / L_n^2 (the measure
        // normalisation |.|^2/L_n diverges at a Bragg position)
        stats.bragg_est[ki] = std::norm(mean) / (Ln * Ln);
    }
    return stats;
}

Spectrum spectrum_enumerate(const RandomSubstitutionSpec& spec, int height_or_rmax, double cutoff,
                            const Weights& w, double rho, double k_lo, double k_hi) {
    require_builtin(spec, "spectrum_enumerate");
    if (height_or_rmax < 0) throw std::invalid_argument("spectrum_enumerate: bound must be >= 0");
    Spectrum sp;
    sp.family = spec.name;
    sp.params = spec.probs;
    sp.rho = rho;
    sp.weights = w;
    if (is_dyadic(spec)) {
        auto add = [&](long long num, int r) {
            KIndex k = KIndex::dyadic(num, r);
            double I = random_intensity(spec, k, w);
            if (I >= cutoff) sp.pure_point.emplace_back(k, k.k(), I);
        };
        add(0, 0);
        for (int r = 1; r <= height_or_rmax; ++r)
            for (long long num = 1; num < (1ll << r); num += 2) add(num, r);
    } else {
        for (long u = -height_or_rmax; u <= height_or_rmax; ++u)
            for (long v = -height_or_rmax; v <= height_or_rmax; ++v) {
                KIndex k = KIndex::metallic(u, v, spec.m);
                double kf = k.k();
                if (kf < k_lo || kf > k_hi) continue;
                double I = random_intensity(spec, k, w, rho);
                if (I >= cutoff) sp.pure_point.emplace_back(k, kf, I);
            }
    }
    std::sort(sp.pure_point.begin(), sp.pure_point.end(),
              [](const Peak& a, const Peak& b) { return a.k < b.k; });
    if (spec.family == Family::NobleMeans) {
        sp.ac_kind = "monte-carlo";
        sp.ac_truncation_tol = 0;
    } else {
        sp.ac_kind = "closed-form";
        sp.ac_truncation_tol = 1e-10;
        RandomSubstitutionSpec copy = spec;
        Weights wc = w;
        double r = rho;
        sp.ac = [copy, wc, r](double k) { return ac_density(copy, k, wc, r); };
    }
    return sp;
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
    auto simpson = [&](double x0, double x2, double f0, double f1, double f2) {
        return (x2 - x0) / 6.0 * (f0 + 4 * f1 + f2);
    };
    std::function<double(double, double, double, double, double, double, double, int)> rec =
        [&](double x0, double x2, double f0, double f1, double f2, double whole, double eps,
            int depth) -> double {
        double xm1 = 0.5 * (x0 + 0.5 * (x0 + x2)), xm2 = 0.5 * (0.5 * (x0 + x2) + x2);
        double xc = 0.5 * (x0 + x2);
        double fl = f(xm1), fr = f(xm2);
        double left = simpson(x0, xc, f0, fl, f1);
        double right = simpson(xc, x2, f1, fr, f2);
        if (depth > 24 || std::abs(left + right - whole) < 15 * eps)
            return left + right + (left + right - whole) / 15.0;
        return rec(x0, xc, f0, fl, f1, left, eps / 2, depth + 1) +
               rec(xc, x2, f1, fr, f2, right, eps / 2, depth + 1);
    };
    double fa = f(a), fm = f(0.5 * (a + b)), fb = f(b);
    double whole = simpson(a, b, fa, fm, fb);
    return rec(a, b, fa, fm, fb, whole, tol, 0);
}

} // namespace rsdiff
