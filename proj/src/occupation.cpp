#include "rsdiff/occupation.hpp"

#include <algorithm>
#include <cmath>

namespace rsdiff {

namespace {

void require_metallic(const RandomSubstitutionSpec& spec, const char* who) {
    if (spec.family != Family::Fibonacci && spec.family != Family::NobleMeans)
        throw std::invalid_argument(std::string(who) + ": metallic families only");
}

bool in_lambda_nonneg(const QuadNum& x) {
    if (x.sign() < 0) return false;
    const int m = x.m();
    QuadNum lo = QuadNum::lambda_conj(m) - QuadNum(1, 0, m);
    QuadNum hi = QuadNum(1, 0, m) - QuadNum::lambda_conj(m);
    QuadNum s = x.star();
    return !(s < lo) && !(hi < s);
}

} // namespace

MarkovFixedPoint markov_fixed_point(double p, double tol, int max_iterations) {
    if (p < 0 || p > 1) throw std::invalid_argument("markov_fixed_point: p in [0,1]");
    const double q = 1 - p;
    MarkovFixedPoint out;
    double ga = 0.5, gb = 0.5;
    for (int it = 1; it <= max_iterations; ++it) {
        double na = q * ga + gb;
        double nb = p * ga;
        out.iterations = it;
        if (std::abs(na - ga) < tol && std::abs(nb - gb) < tol) {
            ga = na;
            gb = nb;
            break;
        }
        ga = na;
        gb = nb;
    }
    out.ga0 = ga;
    out.gb0 = gb;
    return out;
}

std::pair<double, double> OccupationTable::at(const QuadNum& x) const {
    if (family == Family::PeriodDoubling) {
        if (x.v() != 0 || sgn(x.u()) < 0) return {0, 0};
        if (x.u() >= static_cast<long>(dyadic_a.size())) return {0, 0};
        double a = dyadic_a[x.u().get_ui()];
        return {a, 1 - a};
    }
    auto it = values.find(x);
    if (it == values.end()) return {0, 0};
    return it->second;
}

OccupationTable g_iterate(const RandomSubstitutionSpec& spec, int n) {
    spec.validate();
    if (n < 0) throw std::invalid_argument("g_iterate: level must be >= 0");
    OccupationTable table;
    table.level = n;
    table.family = spec.family;
    table.m = spec.family == Family::PeriodDoubling ? 1 : spec.m;

    if (spec.family == Family::PeriodDoubling) {
        if (n > 24) throw GuardError("g_iterate: dyadic level exceeds guard (24)");
        const double p = spec.probs[0], q = 1 - p;
        std::vector<double> a{1.0};
        for (int level = 0; level < n; ++level) {
            std::vector<double> next(a.size() * 2);
            for (size_t x = 0; x < a.size(); ++x) {
                next[2 * x] = 1 - q * a[x];
                next[2 * x + 1] = 1 - p * a[x];
            }
            a = std::move(next);
        }
        table.dyadic_a = std::move(a);
        return table;
    }

    require_metallic(spec, "g_iterate");
    const int m = spec.m;
    // guard calibrated to level 18 of the m = 1 family (table sizes scale
    // with the patch length lambda_m^n)
    if (n * std::log(metallic_lambda(m)) > 18.0 * std::log(metallic_lambda(1)) + 1e-9)
        throw GuardError("g_iterate: level exceeds guard (lambda_m^n above tau^18)");
    const QuadNum lambda = QuadNum::lambda(m);
    const QuadNum one(1, 0, m);
    std::map<QuadNum, std::pair<double, double>> cur{{QuadNum(0, 0, m), {1.0, 0.0}}};
    for (int level = 0; level < n; ++level) {
        std::map<QuadNum, std::pair<double, double>> next;
        for (const auto& [x, g] : cur) {
            QuadNum base = x * lambda;
            if (g.first > 0) {
                for (const auto& [img, prob] : spec.branches('a')) {
                    if (prob <= 0) continue;
                    QuadNum offset(0, 0, m);
                    for (char c : img) {
                        auto& slot = next[base + offset];
                        (c == 'a' ? slot.first : slot.second) += prob * g.first;
                        offset = offset + (c == 'a' ? lambda : one);
                    }
                }
            }
            if (g.second > 0) {
                // b -> a deterministically
                next[base].first += g.second;
            }
        }
        cur = std::move(next);
    }
    table.values = std::move(cur);
    return table;
}

double pd_a_limit(double p, const BigInt& x) {
    if (sgn(x) < 0) return 0;
    const double q = 1 - p;
    // peel binary digits; a_0 is the even-branch fixed point
    std::vector<bool> odd_bits;
    BigInt n = x;
    while (sgn(n) != 0) {
        odd_bits.push_back(mpz_tstbit(n.get_mpz_t(), 0) != 0);
        n >>= 1;
    }
    double a = 1.0 / (1.0 + q);
    for (auto it = odd_bits.rbegin(); it != odd_bits.rend(); ++it)
        a = *it ? 1 - p * a : 1 - q * a;
    return a;
}

namespace {

struct GLimitSolver {
    const RandomSubstitutionSpec& spec;
    QuadNum lambda_inv; // 1/lambda = lambda - m
    std::map<QuadNum, std::pair<double, double>> memo;

    explicit GLimitSolver(const RandomSubstitutionSpec& s)
        : spec(s), lambda_inv(QuadNum(-s.m, 1, s.m)) {}

    std::pair<double, double> solve(const QuadNum& x) {
        if (!in_lambda_nonneg(x)) return {0, 0};
        auto it = memo.find(x);
        if (it != memo.end()) return it->second;
        const int m = spec.m;
        if (x.sign() == 0) {
            double p0 = spec.probs[0];
            auto anchor = std::make_pair(1.0 / (1.0 + p0), p0 / (1.0 + p0));
            memo.emplace(x, anchor);
            return anchor;
        }
        const QuadNum lambda = QuadNum::lambda(m);
        const QuadNum one(1, 0, m);
        double ga = 0, gb = 0;
        // renormalisation identities; every argument lies strictly below x
        for (int i = 0; i <= m; ++i) {
            double pi = spec.probs[static_cast<size_t>(i)];
            if (pi == 0) continue;
            for (int j = 0; j < i; ++j)
                ga += pi * solve((x - QuadNum(0, j, m)) * lambda_inv).first;
            for (int j = i; j < m; ++j)
                ga += pi * solve((x - QuadNum(1, j, m)) * lambda_inv).first;
            gb += pi * solve((x - QuadNum(0, i, m)) * lambda_inv).first;
        }
        ga += solve(x * lambda_inv).second;
        auto result = std::make_pair(ga, gb);
        memo.emplace(x, result);
        return result;
    }
};

} // namespace

std::pair<double, double> g_limit_at(const RandomSubstitutionSpec& spec, const QuadNum& x) {
    if (spec.family == Family::PeriodDoubling) {
        if (x.v() != 0 || sgn(x.u()) < 0) return {0, 0};
        double a = pd_a_limit(spec.probs[0], x.u());
        return {a, 1 - a};
    }
    require_metallic(spec, "g_limit");
    GLimitSolver solver(spec);
    return solver.solve(x);
}

std::map<QuadNum, std::pair<double, double>> g_limit(const RandomSubstitutionSpec& spec,
                                                     const std::vector<QuadNum>& positions) {
    std::map<QuadNum, std::pair<double, double>> out;
    if (spec.family == Family::PeriodDoubling) {
        for (const auto& x : positions) out.emplace(x, g_limit_at(spec, x));
        return out;
    }
    require_metallic(spec, "g_limit");
    GLimitSolver solver(spec);
    for (const auto& x : positions) out.emplace(x, solver.solve(x));
    return out;
}

AtomicMeasure mu_truncated(const RandomSubstitutionSpec& spec, int depth) {
    require_metallic(spec, "mu_truncated");
    if (depth < 1) throw std::invalid_argument("mu_truncated: depth must be >= 1");
    const int m = spec.m;
    if (std::pow(m + 1.0, depth) > 1e7)
        throw GuardError("mu_truncated: (m+1)^depth exceeds atom guard");
    const double lamc = metallic_lambda_conj(m);
    AtomicMeasure mu;
    mu.depth = depth;
    mu.atoms = {{0.0, 1.0}};
    std::vector<std::pair<double, double>> next;
    for (int level = 1; level <= depth; ++level) {
        double shift = std::pow(lamc, level);
        next.clear();
        next.reserve(mu.atoms.size() * (m + 1));
        for (const auto& [pos, mass] : mu.atoms)
            for (int ncopies = 0; ncopies <= m; ++ncopies) {
                double pn = spec.probs[static_cast<size_t>(ncopies)];
                if (pn > 0) next.emplace_back(pos + ncopies * shift, mass * pn);
            }
        std::sort(next.begin(), next.end());
        mu.atoms.clear();
        for (const auto& [pos, mass] : next) {
            if (!mu.atoms.empty() && pos - mu.atoms.back().first < 1e-14)
                mu.atoms.back().second += mass;
            else
                mu.atoms.emplace_back(pos, mass);
        }
    }
    mu.total_mass = 0;
    for (const auto& [pos, mass] : mu.atoms) mu.total_mass += mass;
    double abslc = std::abs(lamc);
    mu.tail_shift_bound = m * std::pow(abslc, depth + 1) / (1 - abslc);
    return mu;
}

MassResult mu_interval_mass(const RandomSubstitutionSpec& spec, double lo, double hi, double tol) {
    require_metallic(spec, "mu_interval_mass");
    const int m = spec.m;
    const double lamc = metallic_lambda_conj(m);

    // degenerate branch: a single point mass at i*lambda'/(1-lambda')
    for (int i = 0; i <= m; ++i)
        if (spec.probs[static_cast<size_t>(i)] >= 1.0 - 1e-15) {
            double s = i * lamc / (1 - lamc);
            return {(lo < s && s <= hi) ? 1.0 : 0.0, 0.0};
        }

    constexpr int kMaxLevel = 90;
    constexpr size_t kAtomCap = 400000;
    const double abslc = std::abs(lamc);

    // support interval of the factors beyond each level
    std::vector<double> rem_min(kMaxLevel + 2, 0.0), rem_max(kMaxLevel + 2, 0.0);
    {
        double deep = m * std::pow(abslc, kMaxLevel + 2) / (1 - abslc);
        rem_min[kMaxLevel + 1] = -deep;
        rem_max[kMaxLevel + 1] = deep;
        for (int level = kMaxLevel; level >= 0; --level) {
            double shift = m * std::pow(lamc, level + 1);
            rem_min[static_cast<size_t>(level)] =
                rem_min[static_cast<size_t>(level) + 1] + std::min(0.0, shift);
            rem_max[static_cast<size_t>(level)] =
                rem_max[static_cast<size_t>(level) + 1] + std::max(0.0, shift);
        }
    }

    // atoms carrying the first `level` factors; an atom is resolved once the
    // support interval of its remaining factors clears the boundary of (lo,hi]
    std::vector<std::pair<double, double>> work{{0.0, 1.0}};
    std::vector<std::pair<double, double>> next;
    double inside = 0, unresolved = 0;
    for (int level = 0; level <= kMaxLevel && !work.empty(); ++level) {
        const double rmin = rem_min[static_cast<size_t>(level)];
        const double rmax = rem_max[static_cast<size_t>(level)];
        const bool bail = level == kMaxLevel || work.size() > kAtomCap;
        next.clear();
        double straddle = 0;
        for (const auto& [pos, mass] : work) {
            double a = pos + rmin, b = pos + rmax;
            if (a > lo && b <= hi) {
                inside += mass;
            } else if (b <= lo || a > hi) {
                // outside
            } else if (bail) {
                unresolved += mass;
            } else {
                straddle += mass;
                double shift = std::pow(lamc, level + 1);
                for (int ncopies = 0; ncopies <= m; ++ncopies) {
                    double pn = spec.probs[static_cast<size_t>(ncopies)];
                    if (pn > 0) next.emplace_back(pos + ncopies * shift, mass * pn);
                }
            }
        }
        if (straddle + unresolved <= tol) {
            unresolved += straddle;
            work.clear();
            break;
        }
        work.swap(next);
    }
    return {inside + unresolved / 2, unresolved / 2};
}

MassResult h_eval_with_bound(const RandomSubstitutionSpec& spec, double y, char letter,
                             double tol) {
    require_metallic(spec, "h_eval");
    const double lamc = metallic_lambda_conj(spec.m);
    if (letter == 'a') return mu_interval_mass(spec, y - 1.0, y, tol);
    if (letter == 'b') return mu_interval_mass(spec, y, y - lamc, tol);
    throw std::invalid_argument("h_eval: letter must be 'a' or 'b'");
}

double h_eval(const RandomSubstitutionSpec& spec, double y, char letter, double tol) {
    return h_eval_with_bound(spec, y, letter, tol).value;
}

MassResult h_eval_padic(double p, const PAdicApprox& z, int j) {
    if (j < 0 || j > z.precision)
        throw std::invalid_argument("h_eval_padic: need 0 <= j <= precision");
    double value = pd_a_limit(p, z.truncate(j));
    double r = std::max(p, 1 - p);
    return {value, std::pow(r, j)};
}

} // namespace rsdiff
