#include "rsdiff/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace rsdiff {

namespace {

bool is_dyadic(const RandomSubstitutionSpec& spec) { return spec.family == Family::PeriodDoubling; }

QuadNum tile_length(char letter, const RandomSubstitutionSpec& spec) {
    if (is_dyadic(spec)) return QuadNum(1, 0, 1);
    if (letter == 'a') return QuadNum::lambda(spec.m);
    if (letter == 'b') return QuadNum(1, 0, spec.m);
    throw std::invalid_argument(std::string("tile_length: unknown letter '") + letter + "'");
}

} // namespace

std::vector<double> LabeledPointSet::float_positions() const {
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& [pos, letter] : points) out.push_back(pos.value());
    return out;
}

LabeledPointSet realize(const std::string& word, const RandomSubstitutionSpec& spec) {
    LabeledPointSet ps;
    ps.family = spec.family;
    ps.m = is_dyadic(spec) ? 1 : spec.m;
    QuadNum pos(0, 0, ps.m);
    for (char c : word) {
        ps.points.emplace_back(pos, c);
        pos = pos + tile_length(c, spec);
    }
    return ps;
}

LabeledPointSet translate(const LabeledPointSet& ps, const QuadNum& t) {
    LabeledPointSet out = ps;
    for (auto& [pos, letter] : out.points) pos = pos + t;
    return out;
}

QuadNum patch_length_exact(const RandomSubstitutionSpec& spec, int n) {
    if (n < 0) throw std::invalid_argument("patch_length: level must be >= 0");
    if (is_dyadic(spec)) {
        BigInt two = 2;
        BigInt len;
        mpz_pow_ui(len.get_mpz_t(), two.get_mpz_t(), static_cast<unsigned long>(n));
        return QuadNum(len, 0, 1);
    }
    return QuadNum::lambda(spec.m).pow(static_cast<unsigned>(n));
}

double patch_length(const RandomSubstitutionSpec& spec, int n) {
    return patch_length_exact(spec, n).value();
}

Deformation::Deformation(double r) : rho(r) {
    double tau = metallic_lambda(1);
    if (!(r > -1.0 && r < tau + 1.0))
        throw std::invalid_argument("Deformation: rho must lie in (-1, tau+1)");
}

double Deformation::length_a(int m) const {
    double lam = metallic_lambda(m);
    return lam + rho * (1.0 - lam);
}

double patch_length_deformed(int n, const Deformation& d) {
    double tau = metallic_lambda(1), sigma = metallic_lambda_conj(1);
    return std::pow(tau, n) + d.rho * std::pow(sigma, n);
}

std::vector<double> deformed_positions(const std::string& word, const Deformation& d) {
    std::vector<double> out;
    out.reserve(word.size());
    double pos = 0;
    for (char c : word) {
        out.push_back(pos);
        pos += (c == 'a') ? d.length_a(1) : d.length_b();
    }
    return out;
}

CoveringReport covering_check(const LabeledPointSet& ps) {
    if (ps.family == Family::PeriodDoubling)
        throw std::invalid_argument("covering_check: metallic families only");
    const int m = ps.m;
    // W_m = [lambda'_m - 1, 1 - lambda'_m]
    QuadNum lo = QuadNum::lambda_conj(m) - QuadNum(1, 0, m);
    QuadNum hi = QuadNum(1, 0, m) - QuadNum::lambda_conj(m);
    CoveringReport rep;
    for (const auto& [pos, letter] : ps.points) {
        QuadNum s = pos.star();
        rep.max_abs_star = std::max(rep.max_abs_star, std::abs(s.value()));
        if (s < lo || s > hi) {
            ++rep.violations;
            rep.violating_points.push_back(pos);
        }
    }
    return rep;
}

LabeledPointSet reachable_positions(const RandomSubstitutionSpec& spec, int r) {
    spec.validate();
    if (r < 0) throw std::invalid_argument("reachable_positions: level must be >= 0");
    const int m = is_dyadic(spec) ? 1 : spec.m;
    const QuadNum scale = is_dyadic(spec) ? QuadNum(2, 0, 1) : QuadNum::lambda(m);
    // typed positions, deduplicated exactly
    std::map<QuadNum, std::pair<bool, bool>> cur; // pos -> (has a, has b)
    cur[QuadNum(0, 0, m)] = {true, false};
    for (int level = 0; level < r; ++level) {
        std::map<QuadNum, std::pair<bool, bool>> next;
        for (const auto& [pos, types] : cur) {
            QuadNum base = pos * scale;
            auto expand = [&](char letter) {
                for (const auto& [img, prob] : spec.branches(letter)) {
                    if (prob <= 0) continue;
                    QuadNum offset(0, 0, m);
                    for (char c : img) {
                        auto& slot = next[base + offset];
                        if (c == 'a') slot.first = true;
                        else slot.second = true;
                        offset = offset + tile_length(c, spec);
                    }
                }
            };
            if (types.first) expand('a');
            if (types.second) expand('b');
        }
        cur = std::move(next);
        if (cur.size() > 5'000'000) throw GuardError("reachable_positions: set exceeds guard");
    }
    LabeledPointSet ps;
    ps.family = spec.family;
    ps.m = m;
    for (const auto& [pos, types] : cur) {
        if (types.first) ps.points.emplace_back(pos, 'a');
        if (types.second) ps.points.emplace_back(pos, 'b');
    }
    return ps;
}

namespace {

// span covered by the tiles: last left endpoint plus its tile length; with
// the bare last-minus-first span a unit-tile patch would not have density 1
double covered_span(const LabeledPointSet& ps) {
    if (ps.points.size() < 2)
        throw std::invalid_argument("empirical_density: need at least 2 points");
    double last_tile = 1.0;
    if (ps.family != Family::PeriodDoubling && ps.points.back().second == 'a')
        last_tile = metallic_lambda(ps.m);
    return ps.points.back().first.value() + last_tile - ps.points.front().first.value();
}

} // namespace

double empirical_density(const LabeledPointSet& ps) {
    return static_cast<double>(ps.points.size()) / covered_span(ps);
}

std::vector<double> empirical_density_by_letter(const LabeledPointSet& ps) {
    double span = covered_span(ps);
    size_t na = 0, nb = 0;
    for (const auto& [pos, letter] : ps.points) (letter == 'a' ? na : nb)++;
    return {static_cast<double>(na) / span, static_cast<double>(nb) / span};
}

std::vector<QuadNum> model_set_interval(int m, int n) {
    // x = u + v*lambda with 0 <= x < lambda^n and x* in [lambda'-1, 1-lambda']
    QuadNum L = QuadNum::lambda(m).pow(static_cast<unsigned>(n));
    QuadNum wlo = QuadNum::lambda_conj(m) - QuadNum(1, 0, m);
    QuadNum whi = QuadNum(1, 0, m) - QuadNum::lambda_conj(m);
    const double lam = metallic_lambda(m), lamc = metallic_lambda_conj(m);
    const double Lf = L.value();
    const double sqrtD = std::sqrt(static_cast<double>(m) * m + 4.0);
    // x - x* = v*sqrt(D) pins the v range
    long vmin = static_cast<long>(std::floor((0.0 - whi.value()) / sqrtD)) - 2;
    long vmax = static_cast<long>(std::ceil((Lf - wlo.value()) / sqrtD)) + 2;
    std::vector<QuadNum> out;
    for (long v = vmin; v <= vmax; ++v) {
        double ulo = std::max(0.0 - v * lam, wlo.value() - v * lamc);
        double uhi = std::min(Lf - v * lam, whi.value() - v * lamc);
        for (long u = static_cast<long>(std::floor(ulo)) - 2;
             u <= static_cast<long>(std::ceil(uhi)) + 2; ++u) {
            QuadNum x(u, v, m);
            if (x.sign() < 0 || !(x < L)) continue;
            QuadNum s = x.star();
            if (s < wlo || s > whi) continue;
            out.push_back(x);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

void write_pointset_csv(std::ostream& os, const LabeledPointSet& ps) {
    os << "position_float,position_u,position_v,letter\n";
    char buf[64];
    for (const auto& [pos, letter] : ps.points) {
        std::snprintf(buf, sizeof buf, "%.17g", pos.value());
        os << buf << "," << pos.u().get_str() << "," << pos.v().get_str() << "," << letter << "\n";
    }
}

LabeledPointSet read_pointset_csv(std::istream& is, const RandomSubstitutionSpec& spec) {
    LabeledPointSet ps;
    ps.family = spec.family;
    ps.m = is_dyadic(spec) ? 1 : spec.m;
    std::string line;
    std::getline(is, line); // header
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string ff, uu, vv, ll;
        if (!std::getline(ls, ff, ',') || !std::getline(ls, uu, ',') ||
            !std::getline(ls, vv, ',') || !std::getline(ls, ll, ','))
            throw std::invalid_argument("pointset csv: malformed line: " + line);
        ps.points.emplace_back(QuadNum(BigInt(uu), BigInt(vv), ps.m), ll[0]);
    }
    // gap invariant: consecutive gap equals the left point's tile length
    for (size_t i = 0; i + 1 < ps.points.size(); ++i) {
        QuadNum gap = ps.points[i + 1].first - ps.points[i].first;
        if (gap != tile_length(ps.points[i].second, spec))
            throw std::invalid_argument("pointset csv: tile-gap invariant violated at row " +
                                        std::to_string(i));
    }
    return ps;
}

} // namespace rsdiff
