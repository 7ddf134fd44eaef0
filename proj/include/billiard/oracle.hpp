#pragma once

#include "billiard/dynamics.hpp"

#include <memory>

namespace billiard {

// Arbitrary-precision reference solver. Same contract as next_collision, but
// every arithmetic step runs at `digits` decimal digits with its own
// bracketing (no seeding from the double-precision path), so it serves as
// independent ground truth. Holds its state at full precision so corner
// series can be iterated without per-step rounding.
class OracleSolver {
public:
    OracleSolver(const CuspTable& table, int digits);
    ~OracleSolver();
    OracleSolver(OracleSolver&&) noexcept;

    void set_state(const CollisionState& s);
    FlightResult step(); // advances the internal state; returns the rounded view
    void reverse();      // time reversal I(r, phi) = (r, pi - phi) at full precision
    CollisionState state() const;
    Component component() const;
    double wall_arclength(double s) const;

    // |param_a - param_b| evaluated at full precision (for precision sweeps).
    static double param_distance(const OracleSolver& a, const OracleSolver& b);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

FlightResult oracle_next_collision(const CuspTable& table, const CollisionState& state, int digits);

double oracle_wall_arclength(const CuspTable& table, double s, int digits);

} // namespace billiard
