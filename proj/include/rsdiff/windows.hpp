#pragma once

#include <cstdint>
#include <vector>

#include "rsdiff/algebra.hpp"
#include "rsdiff/geometry.hpp"

namespace rsdiff {

/**
 * IntervalUnion: sorted disjoint closed intervals with exact endpoints in
 * Z[lambda_m].  The IFS maps x -> lambda' x + c with c in Z[lambda_m]
 * preserve the ring, so no drift accumulates over the ~40 iterations a
 * tolerance of 1e-8 needs.
 */
class IntervalUnion {
public:
    explicit IntervalUnion(int m) : m_(m) {}
    static IntervalUnion point(const QuadNum& x);
    static IntervalUnion interval(QuadNum lo, QuadNum hi);

    int m() const { return m_; }
    const std::vector<std::pair<QuadNum, QuadNum>>& parts() const { return parts_; }
    bool empty() const { return parts_.empty(); }
    QuadNum lo() const;
    QuadNum hi() const;

    void add(QuadNum lo, QuadNum hi); // inserts and re-merges (exact comparisons)
    /// Image under x -> scale*x + offset (scale may be negative).
    IntervalUnion mapped(const QuadNum& scale, const QuadNum& offset) const;
    void unite(const IntervalUnion& other);
    /// Collapse to the convex hull (single interval).
    IntervalUnion hull() const;

    bool contains(double x, double tol) const;
    double hausdorff(const IntervalUnion& other) const;

private:
    int m_;
    std::vector<std::pair<QuadNum, QuadNum>> parts_;
    void normalize();
};

struct IfsResult {
    IntervalUnion wa;
    IntervalUnion wb;
    int iterations = 0;
    std::vector<double> step_distances; // successive Hausdorff distances
};

/// Fixed point of the covering-window IFS (Fibonacci for m = 1, the noble
/// means maps in general), iterated from the degenerate seed {0} until the
/// Hausdorff distance between successive iterates drops below tol.
IfsResult ifs_fixed_point(int m, double tol);

/// One application of the IFS set maps (used for invariance checks).
std::pair<IntervalUnion, IntervalUnion> ifs_apply(int m, const IntervalUnion& wa,
                                                  const IntervalUnion& wb);

struct ChaosTrace {
    std::vector<std::pair<char, double>> points; // (type, internal position)
    uint64_t seed = 0;
    size_t steps = 0;
};

/// Single-point random iteration in internal space from (a, 0).  For m = 1
/// the four a-branches are (a, sy+1), (a, sy), (b, sy), (b, sy+s) with
/// probabilities p1..p4; all branch probabilities must be positive.
/// Pass an empty vector for uniform probabilities.
ChaosTrace chaos_game(int m, std::vector<double> probs, size_t steps, uint64_t seed);

struct TorusFit {
    double r = 0;
    double s = 0;
    double residual = 0;
};

/// Estimates the torus parameter of a metallic patch: r is the leftmost
/// point, s = -(min* + max*)/2 against the symmetric covering window, and
/// the residual is the window width minus the observed star-hull width.
TorusFit fit_torus_parameter(const LabeledPointSet& ps);

} // namespace rsdiff
