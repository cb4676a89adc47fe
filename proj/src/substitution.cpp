#include "rsdiff/substitution.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace rsdiff {

namespace {

constexpr double kProbTol = 1e-12;
constexpr size_t kPatchGuard = 10'000'000;

int letter_index(const RandomSubstitutionSpec& spec, char c) {
    for (size_t i = 0; i < spec.alphabet.size(); ++i)
        if (spec.alphabet[i] == c) return static_cast<int>(i);
    throw std::invalid_argument(std::string("unknown letter '") + c + "'");
}

} // namespace

void RandomSubstitutionSpec::validate() const {
    if (alphabet.empty()) throw std::invalid_argument("spec: empty alphabet");
    for (char c : alphabet) {
        auto it = rules.find(c);
        if (it == rules.end())
            throw std::invalid_argument(std::string("spec: no rule for letter '") + c + "'");
        double total = 0;
        for (const auto& [word, prob] : it->second) {
            if (word.empty()) throw std::invalid_argument("spec: empty image word");
            for (char w : word) letter_index(*this, w);
            if (prob < 0 || prob > 1) throw std::invalid_argument("spec: probability outside [0,1]");
            total += prob;
        }
        if (std::abs(total - 1.0) > kProbTol)
            throw std::invalid_argument(std::string("spec: probabilities for '") + c +
                                        "' sum to " + std::to_string(total));
    }
}

const std::vector<std::pair<std::string, double>>& RandomSubstitutionSpec::branches(char letter) const {
    auto it = rules.find(letter);
    if (it == rules.end())
        throw std::invalid_argument(std::string("unknown letter '") + letter + "'");
    return it->second;
}

std::string RandomSubstitutionSpec::serialize() const {
    std::ostringstream os;
    os << "name = " << name << "\n";
    os << "alphabet = ";
    for (char c : alphabet) os << c;
    os << "\n";
    for (char c : alphabet) {
        os << "rule " << c << " =";
        for (const auto& [word, prob] : branches(c)) {
            os.precision(17);
            os << " " << word << ":" << prob;
        }
        os << "\n";
    }
    return os.str();
}

RandomSubstitutionSpec fibonacci_spec(double p) {
    if (p < 0 || p > 1) throw std::invalid_argument("fibonacci: p must lie in [0,1]");
    RandomSubstitutionSpec s;
    s.name = "fibonacci";
    s.alphabet = {'a', 'b'};
    s.rules['a'] = {{"ba", p}, {"ab", 1 - p}};
    s.rules['b'] = {{"a", 1.0}};
    s.family = Family::Fibonacci;
    s.m = 1;
    s.probs = {p, 1 - p}; // p_0 = P(a -> ba), p_1 = P(a -> ab)
    return s;
}

RandomSubstitutionSpec noble_spec(int m, const std::vector<double>& probs) {
    if (m < 1) throw std::invalid_argument("noble: m must be >= 1");
    if (probs.size() != static_cast<size_t>(m + 1))
        throw std::invalid_argument("noble: need m+1 branch probabilities");
    RandomSubstitutionSpec s;
    s.name = "noble";
    s.alphabet = {'a', 'b'};
    std::vector<std::pair<std::string, double>> imgs;
    for (int i = 0; i <= m; ++i) {
        // a -> a^i b a^(m-i)
        std::string w(static_cast<size_t>(i), 'a');
        w += 'b';
        w += std::string(static_cast<size_t>(m - i), 'a');
        imgs.emplace_back(w, probs[static_cast<size_t>(i)]);
    }
    s.rules['a'] = std::move(imgs);
    s.rules['b'] = {{"a", 1.0}};
    s.family = m == 1 ? Family::Fibonacci : Family::NobleMeans;
    s.m = m;
    s.probs = probs;
    s.validate();
    return s;
}

RandomSubstitutionSpec period_doubling_spec(double p) {
    if (p < 0 || p > 1) throw std::invalid_argument("perioddoubling: p must lie in [0,1]");
    RandomSubstitutionSpec s;
    s.name = "perioddoubling";
    s.alphabet = {'a', 'b'};
    s.rules['a'] = {{"ab", p}, {"ba", 1 - p}};
    s.rules['b'] = {{"aa", 1.0}};
    s.family = Family::PeriodDoubling;
    s.m = 0;
    s.probs = {p, 1 - p};
    return s;
}

namespace {

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

double parse_scalar(const std::string& kv, const std::string& key) {
    auto eq = kv.find('=');
    if (eq == std::string::npos || kv.substr(0, eq) != key)
        throw std::invalid_argument("expected `" + key + "=...` in spec string, got `" + kv + "`");
    return std::stod(kv.substr(eq + 1));
}

std::vector<double> parse_vector(const std::string& kv, const std::string& key) {
    auto eq = kv.find('=');
    if (eq == std::string::npos || kv.substr(0, eq) != key)
        throw std::invalid_argument("expected `" + key + "=[...]` in spec string");
    std::string body = kv.substr(eq + 1);
    if (body.size() < 2 || body.front() != '[' || body.back() != ']')
        throw std::invalid_argument("expected bracketed list in `" + kv + "`");
    body = body.substr(1, body.size() - 2);
    std::vector<double> out;
    std::istringstream is(body);
    std::string item;
    while (std::getline(is, item, ',')) out.push_back(std::stod(item));
    return out;
}

RandomSubstitutionSpec parse_config(const std::string& text) {
    RandomSubstitutionSpec s;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("config: missing '=' in `" + line + "`");
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);
        auto trim = [](std::string& t) {
            t.erase(0, t.find_first_not_of(" \t"));
            t.erase(t.find_last_not_of(" \t") + 1);
        };
        trim(key);
        trim(val);
        if (key == "name") {
            s.name = val;
        } else if (key == "alphabet") {
            for (char c : val) s.alphabet.push_back(c);
        } else if (key.rfind("rule ", 0) == 0 && key.size() == 6) {
            char letter = key[5];
            std::vector<std::pair<std::string, double>> branches;
            for (const auto& tok : split_ws(val)) {
                auto colon = tok.rfind(':');
                if (colon == std::string::npos)
                    throw std::invalid_argument("config: rule entry `" + tok + "` needs word:prob");
                branches.emplace_back(tok.substr(0, colon), std::stod(tok.substr(colon + 1)));
            }
            s.rules[letter] = std::move(branches);
        } else {
            throw std::invalid_argument("config: unknown key `" + key + "`");
        }
    }
    s.validate();
    return s;
}

} // namespace

RandomSubstitutionSpec parse_spec(const std::string& text) {
    if (text.find('\n') != std::string::npos || text.find("rule") != std::string::npos)
        return parse_config(text);
    auto toks = split_ws(text);
    if (toks.empty()) throw std::invalid_argument("empty spec string");
    const std::string& fam = toks[0];
    if (fam == "fibonacci") {
        if (toks.size() != 2) throw std::invalid_argument("usage: fibonacci p=<prob>");
        return fibonacci_spec(parse_scalar(toks[1], "p"));
    }
    if (fam == "noble") {
        if (toks.size() != 3) throw std::invalid_argument("usage: noble m=<int> p=[p0,...,pm]");
        int m = static_cast<int>(parse_scalar(toks[1], "m"));
        return noble_spec(m, parse_vector(toks[2], "p"));
    }
    if (fam == "perioddoubling") {
        if (toks.size() != 2) throw std::invalid_argument("usage: perioddoubling p=<prob>");
        return period_doubling_spec(parse_scalar(toks[1], "p"));
    }
    throw std::invalid_argument("unknown builtin `" + fam + "` (expected fibonacci|noble|perioddoubling)");
}

SubstitutionMatrix substitution_matrix(const RandomSubstitutionSpec& spec) {
    spec.validate();
    size_t n = spec.alphabet.size();
    SubstitutionMatrix M(n, std::vector<double>(n, 0.0));
    for (size_t j = 0; j < n; ++j) {
        for (const auto& [word, prob] : spec.branches(spec.alphabet[j])) {
            for (char c : word)
                M[static_cast<size_t>(letter_index(spec, c))][j] += prob;
        }
    }
    return M;
}

PFData pf_data(const SubstitutionMatrix& M) {
    size_t n = M.size();
    for (const auto& row : M)
        if (row.size() != n) throw std::invalid_argument("pf_data: matrix not square");

    // primitivity: some power up to n^2 strictly positive
    auto multiply = [n](const SubstitutionMatrix& A, const SubstitutionMatrix& B) {
        SubstitutionMatrix C(n, std::vector<double>(n, 0.0));
        for (size_t i = 0; i < n; ++i)
            for (size_t k = 0; k < n; ++k)
                for (size_t j = 0; j < n; ++j) C[i][j] += A[i][k] * B[k][j];
        return C;
    };
    SubstitutionMatrix P = M;
    bool primitive = false;
    for (size_t pow = 1; pow <= n * n; ++pow) {
        bool allpos = true;
        for (const auto& row : P)
            for (double x : row) allpos = allpos && x > 0;
        if (allpos) {
            primitive = true;
            break;
        }
        P = multiply(P, M);
    }
    if (!primitive) throw std::invalid_argument("pf_data: matrix is not primitive");

    auto iterate = [&](bool left) {
        std::vector<double> v(n, 1.0);
        double lambda = 0;
        for (int it = 0; it < 100000; ++it) {
            std::vector<double> w(n, 0.0);
            for (size_t i = 0; i < n; ++i)
                for (size_t j = 0; j < n; ++j)
                    w[left ? j : i] += M[i][j] * v[left ? i : j];
            double norm = 0;
            for (double x : w) norm += std::abs(x);
            for (double& x : w) x /= norm;
            double resid = 0;
            for (size_t i = 0; i < n; ++i) resid = std::max(resid, std::abs(w[i] - v[i]));
            v = w;
            lambda = norm;
            if (resid < 1e-14 && it > 3) break;
        }
        return std::make_pair(lambda, v);
    };

    PFData out;
    auto [lam, right] = iterate(false);
    auto [lam2, left] = iterate(true);
    out.eigenvalue = 0.5 * (lam + lam2);
    double sum = 0;
    for (double x : right) sum += x;
    for (double& x : right) x /= sum;
    out.frequencies = right;
    double mn = *std::min_element(left.begin(), left.end());
    for (double& x : left) x /= mn;
    out.lengths = left;
    return out;
}

std::string apply_random(const RandomSubstitutionSpec& spec, const std::string& word,
                         const CounterRng& stream, uint64_t level) {
    std::string out;
    out.reserve(word.size() * 2);
    for (size_t i = 0; i < word.size(); ++i) {
        const auto& branches = spec.branches(word[i]);
        if (branches.size() == 1) {
            out += branches[0].first;
            continue;
        }
        double u = stream.derive(level, i).uniform();
        double acc = 0;
        const std::string* chosen = &branches.back().first;
        for (const auto& [img, prob] : branches) {
            acc += prob;
            if (u < acc) {
                chosen = &img;
                break;
            }
        }
        out += *chosen;
    }
    return out;
}

std::string apply_random(const RandomSubstitutionSpec& spec, const std::string& word,
                         uint64_t rng_seed, uint64_t level) {
    return apply_random(spec, word, CounterRng(rng_seed), level);
}

std::map<std::string, double> exact_patches(const RandomSubstitutionSpec& spec, int r, char seed) {
    spec.validate();
    if (r < 0) throw std::invalid_argument("exact_patches: level must be >= 0");
    std::map<std::string, double> cur{{std::string(1, seed), 1.0}};
    for (int level = 0; level < r; ++level) {
        std::map<std::string, double> next;
        for (const auto& [word, prob] : cur) {
            // expand the product of per-letter branch choices
            std::vector<std::pair<std::string, double>> partial{{"", prob}};
            for (char c : word) {
                const auto& branches = spec.branches(c);
                std::vector<std::pair<std::string, double>> grown;
                grown.reserve(partial.size() * branches.size());
                for (const auto& [prefix, pp] : partial)
                    for (const auto& [img, bp] : branches)
                        if (bp > 0) grown.emplace_back(prefix + img, pp * bp);
                partial = std::move(grown);
                if (partial.size() + next.size() > kPatchGuard)
                    throw GuardError("exact_patches: realisation count exceeds guard");
            }
            for (auto& [w, pp] : partial) next[w] += pp;
        }
        cur = std::move(next);
    }
    return cur;
}

namespace {

// All realisations of one substitution step applied to `word`, fed to `emit`.
void for_each_realisation(const RandomSubstitutionSpec& spec, const std::string& word,
                          const std::function<void(const std::string&)>& emit) {
    std::string buf;
    std::function<void(size_t)> rec = [&](size_t i) {
        if (i == word.size()) {
            emit(buf);
            return;
        }
        for (const auto& [img, prob] : spec.branches(word[i])) {
            if (prob <= 0) continue;
            size_t len = buf.size();
            buf += img;
            rec(i + 1);
            buf.resize(len);
        }
    };
    rec(0);
}

} // namespace

namespace {

// Length of the source slice whose inflation covers any window of length L.
// A window touches at most L+2 source letters; for constant-length-2 rules
// only L/2+2, and for the metallic rules at most 3L/4+2 because b-runs in
// legal words have length <= 2 (every b sits inside an a-image that carries
// exactly one b, so a run of three would swallow a whole a-image).
size_t source_span(const RandomSubstitutionSpec& spec, size_t L) {
    switch (spec.family) {
        case Family::PeriodDoubling: return L / 2 + 2;
        case Family::Fibonacci:
        case Family::NobleMeans: return std::min(L, (3 * L) / 4 + 2);
        case Family::Custom: return L;
    }
    return L;
}

} // namespace

std::set<std::string> legal_words(const RandomSubstitutionSpec& spec, int n) {
    spec.validate();
    if (n < 1) throw std::invalid_argument("legal_words: n must be >= 1");
    if (n > 20) throw GuardError("legal_words: n exceeds guard (20)");

    // Accumulate legal words up to length L; the dictionary is the monotone
    // union over all inflation levels, so we iterate inflate-and-cut rounds
    // and stop when one more round adds nothing.  Only slices up to the
    // source span ever need inflating.
    const size_t L = static_cast<size_t>(std::max(n + 4, 12));
    const size_t span = source_span(spec, L);
    std::set<std::string> words;
    std::set<std::string> expanded;

    auto insert_word = [&](const std::string& s, bool* changed) {
        auto add = [&](const std::string& t) {
            if (words.insert(t).second && changed) *changed = true;
        };
        if (s.size() <= L) add(s);
        else
            for (size_t i = 0; i + L <= s.size(); ++i) add(s.substr(i, L));
        // keep the inflation frontier (span-length slices) explicit
        if (s.size() > span)
            for (size_t i = 0; i + span <= s.size(); ++i) add(s.substr(i, span));
    };

    bool changed = false;
    insert_word(std::string(1, spec.alphabet[0]), &changed);
    changed = true;
    while (changed) {
        changed = false;
        std::vector<std::string> frontier;
        for (const auto& w : words)
            if (w.size() <= span && !expanded.count(w)) frontier.push_back(w);
        for (const auto& w : frontier) {
            expanded.insert(w);
            for_each_realisation(spec, w,
                                 [&](const std::string& s) { insert_word(s, &changed); });
        }
    }

    std::set<std::string> out;
    const size_t nn = static_cast<size_t>(n);
    for (const auto& w : words) {
        if (w.size() == nn) out.insert(w);
        if (w.size() > nn)
            for (size_t i = 0; i + nn <= w.size(); ++i) out.insert(w.substr(i, nn));
    }
    return out;
}

} // namespace rsdiff
