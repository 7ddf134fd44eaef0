#pragma once

#include "billiard/geometry.hpp"
#include "billiard/rng.hpp"

namespace billiard {

// Post-collision state. `param` is the wall abscissa s on Gamma1/Gamma2 and the
// arclength from the lower junction on Gamma3; r is the global arclength.
// phi in (0,pi) is the angle from the positive tangent to the outgoing
// velocity, so v = cos(phi) t + sin(phi) n with n the inward normal.
struct CollisionState {
    Component comp;
    double param;
    double r;
    double x, z;
    double vx, vz;
    double sin_phi, cos_phi;

    double phi() const { return std::atan2(sin_phi, cos_phi); }
    double eta() const { return std::atan2(sin_phi, std::abs(cos_phi)); } // min(phi, pi - phi)
};

struct StepFlags {
    bool near_grazing = false;       // sin(phi_next) < 1e-8
    bool near_corner = false;        // hit within 1e-10 of a junction or the vertex
    bool precision_escalated = false;
};

struct FlightResult {
    CollisionState next;
    double tau = 0.0; // free path
    StepFlags flags;
};

struct PrecisionPolicy {
    double escalate_sin_phi = 1e-6;
    double escalate_tau = 1e-9;
    double escalate_abscissa = 1e-4;
    int digits = 60;
    bool allow_escalation = true;
};

inline const PrecisionPolicy& default_policy() {
    static const PrecisionPolicy p{};
    return p;
}

// Builds a valid post-collision state from boundary coordinates.
CollisionState make_state(const CuspTable& table, Component comp, double param, double phi);
CollisionState state_from_r_phi(const CuspTable& table, double r, double phi);

// One step of the billiard map. Throws SingularHit when the trajectory meets
// the vertex or a junction within 1e-12, or the reflected angle is grazing
// below 1e-12; NoIntersection guards against geometry bugs.
FlightResult next_collision(const CuspTable& table, const CollisionState& state,
                            const PrecisionPolicy& policy = default_policy());

// Time reversal I(r,phi) = (r, pi - phi); prev = I o T o I.
FlightResult prev_collision(const CuspTable& table, const CollisionState& state,
                            const PrecisionPolicy& policy = default_policy());

CollisionState time_reverse(const CuspTable& table, const CollisionState& state);

// z-mirror r -> perimeter - r, phi -> pi - phi (conjugacy of the table symmetry).
CollisionState mirror_state(const CuspTable& table, const CollisionState& state);

// Invariant-measure sampler: r uniform on [0,|dQ|], phi = arccos(1-2U).
CollisionState sample_mu(const CuspTable& table, SplitMix64& rng);

// Restriction of mu to the arc (the return-map base M).
CollisionState sample_mu_tilde(const CuspTable& table, SplitMix64& rng);

} // namespace billiard
