#include "rsdiff/autocorr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rsdiff {

void WeightedComb::validate() const {
    if (points.size() != weights.size())
        throw std::invalid_argument("WeightedComb: points/weights size mismatch");
    if (!(window_lo <= window_hi)) throw std::invalid_argument("WeightedComb: bad window");
    for (double x : points)
        if (x < window_lo - 1e-9 || x > window_hi + 1e-9)
            throw std::invalid_argument("WeightedComb: point outside declared window");
}

double WeightedComb::discreteness_radius() const {
    if (points.size() < 2) return std::numeric_limits<double>::infinity();
    std::vector<double> sorted = points;
    std::sort(sorted.begin(), sorted.end());
    double r = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i + 1 < sorted.size(); ++i)
        if (sorted[i + 1] - sorted[i] > 0) r = std::min(r, sorted[i + 1] - sorted[i]);
    return r;
}

std::map<double, Complex> autocorrelation(const WeightedComb& comb, double maxz) {
    comb.validate();
    if (comb.points.size() < 2 && comb.points.empty())
        return {};
    const double vol = comb.volume();
    std::map<double, Complex> out;
    const double bin = 1e-9;
    auto insert = [&](double z, Complex v) {
        auto it = out.lower_bound(z - bin);
        if (it != out.end() && std::abs(it->first - z) <= bin) {
            it->second += v;
            return;
        }
        out[z] += v;
    };
    // all weights zero -> empty autocorrelation
    bool nonzero = false;
    for (const auto& w : comb.weights) nonzero = nonzero || (w != Complex(0.0, 0.0));
    if (!nonzero || vol <= 0) return {};
    for (size_t i = 0; i < comb.points.size(); ++i)
        for (size_t j = 0; j < comb.points.size(); ++j) {
            double z = comb.points[j] - comb.points[i];
            if (maxz >= 0 && std::abs(z) > maxz) continue;
            insert(z, std::conj(comb.weights[i]) * comb.weights[j] / vol);
        }
    return out;
}

std::map<QuadNum, std::array<double, 4>> pair_correlations(const LabeledPointSet& ps,
                                                           double maxz) {
    if (ps.points.size() < 2) throw std::invalid_argument("pair_correlations: need >= 2 points");
    double span = ps.points.back().first.value() - ps.points.front().first.value();
    std::map<QuadNum, std::array<double, 4>> out;
    const size_t n = ps.points.size();
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) {
            double zf = ps.points[j].first.value() - ps.points[i].first.value();
            if (std::abs(zf) > maxz) continue;
            QuadNum z = ps.points[j].first - ps.points[i].first;
            size_t idx = (ps.points[i].second == 'a' ? 0u : 2u) +
                         (ps.points[j].second == 'a' ? 0u : 1u);
            auto it = out.find(z);
            if (it == out.end()) it = out.emplace(z, std::array<double, 4>{0, 0, 0, 0}).first;
            it->second[idx] += 1.0 / span;
        }
    return out;
}

double k_norm(const WeightedComb& comb, double K) {
    comb.validate();
    if (!(K > 0)) throw std::invalid_argument("k_norm: K > 0");
    if (comb.points.empty()) return 0;
    std::vector<std::pair<double, double>> pts;
    pts.reserve(comb.points.size());
    for (size_t i = 0; i < comb.points.size(); ++i)
        pts.emplace_back(comb.points[i], std::abs(comb.weights[i]));
    std::sort(pts.begin(), pts.end());
    std::vector<double> prefix(pts.size() + 1, 0.0);
    for (size_t i = 0; i < pts.size(); ++i) prefix[i + 1] = prefix[i] + pts[i].second;
    // the supremum over closed windows [t, t+K] is attained with the window
    // starting at a point
    double best = 0;
    size_t j = 0;
    for (size_t i = 0; i < pts.size(); ++i) {
        if (j < i) j = i;
        while (j < pts.size() && pts[j].first <= pts[i].first + K + 1e-15) ++j;
        best = std::max(best, prefix[j] - prefix[i]);
    }
    return best;
}

namespace {

double bump(double x, double w) {
    double a = std::abs(x);
    return a >= w ? 0.0 : (1.0 - a / w) / w; // triangular, unit mass
}

} // namespace

MeanConvergenceDiag mean_convergence_diag(const WeightedComb& mu, const WeightedComb& omega,
                                          double bump_halfwidth) {
    mu.validate();
    omega.validate();
    if (std::abs(mu.window_lo - omega.window_lo) > 1e-12 ||
        std::abs(mu.window_hi - omega.window_hi) > 1e-12)
        throw std::invalid_argument("mean_convergence_diag: windows do not match");
    const double w = bump_halfwidth;
    if (!(w > 0)) throw std::invalid_argument("mean_convergence_diag: bump half-width > 0");

    // difference comb
    std::vector<std::pair<double, Complex>> nu;
    for (size_t i = 0; i < mu.points.size(); ++i) nu.emplace_back(mu.points[i], mu.weights[i]);
    for (size_t i = 0; i < omega.points.size(); ++i)
        nu.emplace_back(omega.points[i], -omega.weights[i]);
    std::sort(nu.begin(), nu.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    // merge coincident atoms
    std::vector<std::pair<double, Complex>> atoms;
    for (const auto& [x, v] : nu) {
        if (!atoms.empty() && x - atoms.back().first < 1e-12)
            atoms.back().second += v;
        else
            atoms.emplace_back(x, v);
    }

    MeanConvergenceDiag diag;
    const double vol = mu.volume();
    // Eq.-(alt) statistic
    double total_abs = 0;
    for (const auto& [x, v] : atoms)
        if (x >= mu.window_lo - 1e-12 && x <= mu.window_hi + 1e-12) total_abs += std::abs(v);
    diag.alt_diag = vol > 0 ? total_abs / vol : 0;

    // (nu * g) is piecewise linear with breakpoints at x_i - w, x_i, x_i + w;
    // integrate |nu * g| exactly over [lo - w, hi + w]
    std::vector<double> brk;
    brk.reserve(atoms.size() * 3 + 2);
    for (const auto& [x, v] : atoms) {
        brk.push_back(x - w);
        brk.push_back(x);
        brk.push_back(x + w);
    }
    brk.push_back(mu.window_lo - w);
    brk.push_back(mu.window_hi + w);
    std::sort(brk.begin(), brk.end());
    brk.erase(std::unique(brk.begin(), brk.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-13; }),
              brk.end());
    auto eval = [&](double x) {
        Complex acc = 0;
        for (const auto& [xi, v] : atoms) acc += v * bump(x - xi, w);
        return acc;
    };
    bool real_valued = true;
    for (const auto& [x, v] : atoms) real_valued = real_valued && std::abs(v.imag()) < 1e-15;
    const double lo = mu.window_lo - w, hi = mu.window_hi + w;
    double integral = 0;
    for (size_t i = 0; i + 1 < brk.size(); ++i) {
        double a = std::max(brk[i], lo), b = std::min(brk[i + 1], hi);
        if (!(b > a)) continue;
        Complex fa = eval(a), fb = eval(b);
        if (real_valued) {
            // exact integral of |linear| on the segment
            double ya = fa.real(), yb = fb.real();
            if (ya * yb >= 0) {
                integral += 0.5 * (std::abs(ya) + std::abs(yb)) * (b - a);
            } else {
                double t = ya / (ya - yb);
                integral += 0.5 * (std::abs(ya) * t + std::abs(yb) * (1 - t)) * (b - a);
            }
        } else {
            // |f| with linear real and imaginary parts: 8-point Gauss-Legendre
            static const double gx[4] = {0.1834346424956498, 0.5255324099163290,
                                         0.7966664774136267, 0.9602898564975363};
            static const double gw[4] = {0.3626837833783620, 0.3137066458778873,
                                         0.2223810344533745, 0.1012285362903763};
            double mid = 0.5 * (a + b), half = 0.5 * (b - a);
            double acc = 0;
            for (int q = 0; q < 4; ++q)
                acc += gw[q] * (std::abs(eval(mid - half * gx[q])) +
                                std::abs(eval(mid + half * gx[q])));
            integral += acc * half;
        }
    }
    diag.mean_diag = vol > 0 ? integral / vol : 0;
    return diag;
}

} // namespace rsdiff
