#include "rsdiff/windows.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rsdiff/rng.hpp"

namespace rsdiff {

IntervalUnion IntervalUnion::point(const QuadNum& x) {
    IntervalUnion u(x.m());
    u.parts_.emplace_back(x, x);
    return u;
}

IntervalUnion IntervalUnion::interval(QuadNum lo, QuadNum hi) {
    if (hi < lo) throw std::invalid_argument("IntervalUnion: need lo <= hi");
    IntervalUnion u(lo.m());
    u.parts_.emplace_back(std::move(lo), std::move(hi));
    return u;
}

QuadNum IntervalUnion::lo() const {
    if (parts_.empty()) throw std::invalid_argument("IntervalUnion: empty");
    return parts_.front().first;
}

QuadNum IntervalUnion::hi() const {
    if (parts_.empty()) throw std::invalid_argument("IntervalUnion: empty");
    return parts_.back().second;
}

void IntervalUnion::normalize() {
    std::sort(parts_.begin(), parts_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::pair<QuadNum, QuadNum>> merged;
    for (auto& part : parts_) {
        if (!merged.empty() && !(merged.back().second < part.first)) {
            if (merged.back().second < part.second) merged.back().second = part.second;
        } else {
            merged.push_back(part);
        }
    }
    parts_ = std::move(merged);
}

void IntervalUnion::add(QuadNum lo, QuadNum hi) {
    if (hi < lo) throw std::invalid_argument("IntervalUnion::add: need lo <= hi");
    parts_.emplace_back(std::move(lo), std::move(hi));
    normalize();
}

IntervalUnion IntervalUnion::mapped(const QuadNum& scale, const QuadNum& offset) const {
    IntervalUnion out(m_);
    for (const auto& [lo, hi] : parts_) {
        QuadNum a = lo * scale + offset;
        QuadNum b = hi * scale + offset;
        if (b < a) std::swap(a, b);
        out.parts_.emplace_back(std::move(a), std::move(b));
    }
    out.normalize();
    return out;
}

void IntervalUnion::unite(const IntervalUnion& other) {
    for (const auto& part : other.parts_) parts_.push_back(part);
    normalize();
}

IntervalUnion IntervalUnion::hull() const {
    if (parts_.empty()) return IntervalUnion(m_);
    return interval(lo(), hi());
}

bool IntervalUnion::contains(double x, double tol) const {
    for (const auto& [lo, hi] : parts_)
        if (x >= lo.value() - tol && x <= hi.value() + tol) return true;
    return false;
}

namespace {

double point_set_distance(double x, const std::vector<std::pair<double, double>>& parts) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [lo, hi] : parts) {
        double d = x < lo ? lo - x : (x > hi ? x - hi : 0.0);
        best = std::min(best, d);
    }
    return best;
}

std::vector<std::pair<double, double>> float_parts(const IntervalUnion& u) {
    std::vector<std::pair<double, double>> out;
    out.reserve(u.parts().size());
    for (const auto& [lo, hi] : u.parts()) out.emplace_back(lo.value(), hi.value());
    return out;
}

} // namespace

double IntervalUnion::hausdorff(const IntervalUnion& other) const {
    auto A = float_parts(*this), B = float_parts(other);
    if (A.empty() || B.empty())
        throw std::invalid_argument("hausdorff: empty interval union");
    auto directed = [](const std::vector<std::pair<double, double>>& from,
                       const std::vector<std::pair<double, double>>& to) {
        // sup_x d(x, to) over x in `from` is attained at an endpoint of `from`
        // or at a gap midpoint of `to` lying inside `from`
        double best = 0;
        for (const auto& [lo, hi] : from) {
            best = std::max(best, point_set_distance(lo, to));
            best = std::max(best, point_set_distance(hi, to));
        }
        for (size_t i = 0; i + 1 < to.size(); ++i) {
            double mid = 0.5 * (to[i].second + to[i + 1].first);
            for (const auto& [lo, hi] : from)
                if (mid >= lo && mid <= hi) best = std::max(best, point_set_distance(mid, to));
        }
        return best;
    };
    return std::max(directed(A, B), directed(B, A));
}

std::pair<IntervalUnion, IntervalUnion> ifs_apply(int m, const IntervalUnion& wa,
                                                  const IntervalUnion& wb) {
    const QuadNum scale = QuadNum::lambda_conj(m); // lambda', the contraction
    auto offset_f = [&](int j) { return QuadNum(static_cast<long>(j) * m, -j, m); }; // j*lambda'
    auto offset_g = [&](int j) { return QuadNum(static_cast<long>(j) * m + 1, -j, m); };

    IntervalUnion na(m), nb(m);
    for (int j = 0; j < m; ++j) {
        na.unite(wa.mapped(scale, offset_f(j)));
        na.unite(wa.mapped(scale, offset_g(j)));
    }
    na.unite(wb.mapped(scale, offset_f(0)));
    for (int j = 0; j <= m; ++j) nb.unite(wa.mapped(scale, offset_f(j)));
    return {na, nb};
}

IfsResult ifs_fixed_point(int m, double tol) {
    if (m < 1) throw std::invalid_argument("ifs_fixed_point: m >= 1");
    if (!(tol > 0)) throw std::invalid_argument("ifs_fixed_point: tol > 0");
    IntervalUnion wa = IntervalUnion::point(QuadNum(0, 0, m));
    IntervalUnion wb = wa;
    IfsResult res{wa, wb, 0, {}};
    // successive distance below tol*(1-c) pins the fixed point within tol
    const double stop = tol * (1.0 - std::abs(metallic_lambda_conj(m)));
    for (int it = 1; it <= 400; ++it) {
        auto [na, nb] = ifs_apply(m, wa, wb);
        // the attractor components are intervals; collapsing transient gaps
        // keeps the degenerate seed {0} tractable (points stay points under
        // the maps, so the raw union would grow exponentially)
        na = na.hull();
        nb = nb.hull();
        double d = std::max(na.hausdorff(wa), nb.hausdorff(wb));
        res.step_distances.push_back(d);
        wa = std::move(na);
        wb = std::move(nb);
        res.iterations = it;
        if (d < stop && it > 1) break;
    }
    res.wa = wa;
    res.wb = wb;
    return res;
}

ChaosTrace chaos_game(int m, std::vector<double> probs, size_t steps, uint64_t seed) {
    if (m < 1) throw std::invalid_argument("chaos_game: m >= 1");
    const size_t nbranch = static_cast<size_t>(3 * m + 1);
    if (probs.empty()) probs.assign(nbranch, 1.0 / static_cast<double>(nbranch));
    if (probs.size() != nbranch)
        throw std::invalid_argument("chaos_game: need 3m+1 branch probabilities");
    double total = 0;
    for (double p : probs) {
        if (!(p > 0)) throw std::invalid_argument("chaos_game: all probabilities must be > 0");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("chaos_game: probabilities must sum to 1");

    const double lamc = metallic_lambda_conj(m);
    ChaosTrace trace;
    trace.seed = seed;
    trace.steps = steps;
    trace.points.reserve(steps);
    CounterRng rng(seed);
    char type = 'a';
    double y = 0;
    for (size_t i = 0; i < steps; ++i) {
        if (type == 'b') {
            y = lamc * y;
            type = 'a';
        } else {
            double u = rng.derive(i).uniform() * total;
            double acc = 0;
            size_t pick = nbranch - 1;
            for (size_t b = 0; b < nbranch; ++b) {
                acc += probs[b];
                if (u < acc) {
                    pick = b;
                    break;
                }
            }
            // branches: (a, g_j) j<m, then (a, f_j) j<m, then (b, f_j) j<=m
            if (pick < static_cast<size_t>(m)) {
                y = lamc * (y + static_cast<double>(pick)) + 1.0;
                type = 'a';
            } else if (pick < static_cast<size_t>(2 * m)) {
                y = lamc * (y + static_cast<double>(pick - m));
                type = 'a';
            } else {
                y = lamc * (y + static_cast<double>(pick - 2 * m));
                type = 'b';
            }
        }
        trace.points.emplace_back(type, y);
    }
    return trace;
}

TorusFit fit_torus_parameter(const LabeledPointSet& ps) {
    if (ps.family == Family::PeriodDoubling)
        throw std::invalid_argument("fit_torus_parameter: metallic families only");
    if (ps.points.size() < 10)
        throw std::invalid_argument("fit_torus_parameter: need at least 10 points");
    const int m = ps.m;
    double smin = std::numeric_limits<double>::infinity();
    double smax = -std::numeric_limits<double>::infinity();
    for (const auto& [pos, letter] : ps.points) {
        double s = pos.star().value();
        smin = std::min(smin, s);
        smax = std::max(smax, s);
    }
    TorusFit fit;
    fit.r = ps.points.front().first.value();
    fit.s = -0.5 * (smin + smax);
    double window_width = 2.0 * (1.0 - metallic_lambda_conj(m));
    fit.residual = window_width - (smax - smin);
    return fit;
}

} // namespace rsdiff
