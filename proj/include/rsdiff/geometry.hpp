#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rsdiff/algebra.hpp"
#include "rsdiff/substitution.hpp"

namespace rsdiff {

/**
 * LabeledPointSet: left tile endpoints of the geometric realisation of a
 * word.  Metallic families place tiles of length lambda_m (a) and 1 (b);
 * the dyadic (period doubling) family uses unit tiles, so positions are
 * plain integers (stored as QuadNum with v = 0).  Positions are exact and
 * strictly increasing.
 */
struct LabeledPointSet {
    Family family = Family::Custom;
    int m = 1; // ring parameter of the positions (1 for the dyadic family)
    std::vector<std::pair<QuadNum, char>> points;

    std::vector<double> float_positions() const;
};

/// Left endpoints of `word` realised with the family's natural tile lengths,
/// starting at 0.
LabeledPointSet realize(const std::string& word, const RandomSubstitutionSpec& spec);

/// Translate all positions by t (exact).
LabeledPointSet translate(const LabeledPointSet& ps, const QuadNum& t);

/// Exact length lambda_m^n (metallic) or 2^n (dyadic) of a level-n patch.
QuadNum patch_length_exact(const RandomSubstitutionSpec& spec, int n);
double patch_length(const RandomSubstitutionSpec& spec, int n);

/// Deformed Fibonacci-family tile lengths l_a = tau + rho(1-tau), l_b = 1+rho.
struct Deformation {
    double rho = 0.0;
    explicit Deformation(double r);
    double length_a(int m) const;
    double length_b() const { return 1.0 + rho; }
};

/// Deformed level-n patch length tau^n + rho*sigma^n (Fibonacci family).
double patch_length_deformed(int n, const Deformation& d);

/// Float positions of `word` under deformed tile lengths.
std::vector<double> deformed_positions(const std::string& word, const Deformation& d);

struct CoveringReport {
    double max_abs_star = 0.0;
    size_t violations = 0;
    std::vector<QuadNum> violating_points;
};

/// Checks that every position's star image lies in the covering window
/// W_m = [lambda'_m - 1, 1 - lambda'_m] (exact comparisons; violations are
/// reported, not thrown).
CoveringReport covering_check(const LabeledPointSet& ps);

/// Union over all realisations of the typed positions of level-r inflation
/// patches from seed (a, 0); the set all realisations live on.
LabeledPointSet reachable_positions(const RandomSubstitutionSpec& spec, int r);

/// Point count divided by the tile-covered span (last left endpoint plus its
/// tile length, minus the first); unit-tile patches then have density 1.
double empirical_density(const LabeledPointSet& ps);
/// Per-letter variant, ordered by the spec alphabet {a, b}.
std::vector<double> empirical_density_by_letter(const LabeledPointSet& ps);

/// Model set Lambda^(n) = {x in Z[lambda_m] : x* in W_m, 0 <= x < lambda_m^n},
/// enumerated exactly.
std::vector<QuadNum> model_set_interval(int m, int n);

/// CSV export/import with columns position_float,position_u,position_v,letter.
/// Import validates the tile-gap invariant.
void write_pointset_csv(std::ostream& os, const LabeledPointSet& ps);
LabeledPointSet read_pointset_csv(std::istream& is, const RandomSubstitutionSpec& spec);

} // namespace rsdiff
