#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rsdiff/common.hpp"
#include "rsdiff/rng.hpp"

namespace rsdiff {

enum class Family { Fibonacci, NobleMeans, PeriodDoubling, Custom };

/**
 * RandomSubstitutionSpec: alphabet plus, per letter, a list of
 * (image word, probability) branches.  Per-letter probabilities sum to 1.
 *
 * Builtins:
 *   fibonacci p        a -> ba (p), ab (q);  b -> a        [metallic, m = 1]
 *   noble m p0..pm     a -> a^i b a^(m-i) (p_i);  b -> a   [metallic]
 *   perioddoubling p   a -> ab (p), ba (q);  b -> aa       [dyadic]
 */
struct RandomSubstitutionSpec {
    std::string name;
    std::vector<char> alphabet;
    std::map<char, std::vector<std::pair<std::string, double>>> rules;
    Family family = Family::Custom;
    int m = 0;                  // metallic ring parameter for fibonacci/noble
    std::vector<double> probs;  // family branch probabilities (p for binary, p0..pm for noble)

    void validate() const;
    const std::vector<std::pair<std::string, double>>& branches(char letter) const;

    /// Key-value config serialisation (round-trips through parse_spec).
    std::string serialize() const;
};

RandomSubstitutionSpec fibonacci_spec(double p);
RandomSubstitutionSpec noble_spec(int m, const std::vector<double>& probs);
RandomSubstitutionSpec period_doubling_spec(double p);

/// Parses either a builtin description ("fibonacci p=0.4",
/// "noble m=2 p=[0.2,0.5,0.3]", "perioddoubling p=0.7") or the key-value
/// config format produced by serialize().
RandomSubstitutionSpec parse_spec(const std::string& text);

using SubstitutionMatrix = std::vector<std::vector<double>>;

/// Entry (i,j) = expected count of letter alphabet[i] in the image of alphabet[j].
SubstitutionMatrix substitution_matrix(const RandomSubstitutionSpec& spec);

struct PFData {
    double eigenvalue = 0;
    std::vector<double> frequencies; // right eigenvector, sums to 1
    std::vector<double> lengths;     // left eigenvector, min entry 1
};

/// Perron-Frobenius data via power iteration (residual < 1e-12).
/// Throws std::invalid_argument when no power up to dim^2 is strictly positive.
PFData pf_data(const SubstitutionMatrix& M);

/// One random substitution step; each letter drawn from its own derived stream
/// (seed, level, position), so results are reproducible and order-independent.
std::string apply_random(const RandomSubstitutionSpec& spec, const std::string& word,
                         uint64_t rng_seed, uint64_t level = 0);
std::string apply_random(const RandomSubstitutionSpec& spec, const std::string& word,
                         const CounterRng& stream, uint64_t level);

/// All distinct realisations of spec^r(seed) with their total probabilities.
/// Guard: intermediate distinct-word count must stay <= 10^7.
std::map<std::string, double> exact_patches(const RandomSubstitutionSpec& spec, int r,
                                            char seed = 'a');

/// All legal words of length n (subwords of realisations of spec^k(a), any k),
/// computed by inflate-and-cut until the set stabilises.  Guard: n <= 20.
std::set<std::string> legal_words(const RandomSubstitutionSpec& spec, int n);

} // namespace rsdiff
