#include "doctest.h"

#include "billiard/dynamics.hpp"
#include "billiard/errors.hpp"
#include "billiard/oracle.hpp"
#include "billiard/stable.hpp"
#include "billiard/stats.hpp"

#include <cmath>

using namespace billiard;

namespace {
const CuspTable& table() {
    static const CuspTable t = build_table({3.0, 1.0, M_PI / 6});
    return t;
}
}

TEST_CASE("the perpendicular opposing shot hits the vertex") {
    // axis point of the arc, velocity exactly down the channel axis (cos(pi/2)
    // rounds to ~6e-17, which would tilt the ray off the vertex by 1e-5)
    CollisionState s = make_state(table(), Component::Gamma3, 0.5 * table().len_gamma3,
                                  0.5 * M_PI);
    CHECK(s.vx == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(std::abs(s.vz) < 1e-12);
    s.vx = -1.0;
    s.vz = 0.0;
    s.sin_phi = 1.0;
    s.cos_phi = 0.0;
    s.z = 0.0;
    CHECK_THROWS_AS(next_collision(table(), s), SingularHit);
}

TEST_CASE("cached velocity equals rotate(tangent, +phi)") {
    SplitMix64 rng(4);
    for (int i = 0; i < 200; ++i) {
        const CollisionState s = sample_mu(table(), rng);
        const BoundaryPoint p = table().point_at(s.r);
        const double tx = std::cos(p.tangent_angle), tz = std::sin(p.tangent_angle);
        const double phi = s.phi();
        const double vx = std::cos(phi) * tx - std::sin(phi) * tz * -1.0; // rot by +phi
        const double vz = std::sin(phi) * tx + std::cos(phi) * tz;
        // rotate(t, +phi) = (tx cos - tz sin, tx sin + tz cos)
        CHECK(std::abs(s.vx - (tx * std::cos(phi) - tz * std::sin(phi))) < 1e-13);
        CHECK(std::abs(s.vz - vz) < 1e-13);
        (void)vx;
    }
}

TEST_CASE("mirror equivariance of the collision map") {
    SplitMix64 rng(5);
    int tested = 0;
    for (int i = 0; i < 400; ++i) {
        const CollisionState s = sample_mu(table(), rng);
        try {
            const FlightResult a = next_collision(table(), s);
            const FlightResult b = next_collision(table(), mirror_state(table(), s));
            const CollisionState bm = mirror_state(table(), b.next);
            CHECK(std::abs(a.tau - b.tau) < 1e-12);
            CHECK(std::abs(a.next.r - bm.r) < 1e-11);
            CHECK(std::abs(a.next.phi() - bm.phi()) < 1e-11);
            ++tested;
        } catch (const SingularHit&) {
        }
    }
    CHECK(tested > 380);
}

TEST_CASE("reversibility: I T I T = id") {
    SplitMix64 rng(6);
    int tested = 0;
    for (int i = 0; i < 500; ++i) {
        const CollisionState s = sample_mu(table(), rng);
        try {
            const FlightResult f = next_collision(table(), s);
            const FlightResult b = prev_collision(table(), f.next);
            CHECK(std::abs(b.next.r - s.r) + std::abs(b.next.phi() - s.phi()) < 1e-10);
            ++tested;
        } catch (const SingularHit&) {
        }
    }
    CHECK(tested > 480);
}

TEST_CASE("perpendicular bounce self-retraces") {
    const CollisionState s = make_state(table(), Component::Gamma1, 0.5, 0.5 * M_PI);
    const FlightResult fwd = next_collision(table(), s);
    const FlightResult back = prev_collision(table(), s);
    // with phi = pi/2 the time reversal fixes the state, so prev = I(next)
    CHECK(back.next.r == doctest::Approx(fwd.next.r).epsilon(1e-12));
    CHECK(back.next.phi() == doctest::Approx(M_PI - fwd.next.phi()).epsilon(1e-12));
    CHECK(back.tau == doctest::Approx(fwd.tau).epsilon(1e-12));
}

TEST_CASE("100-step forward-backward round trip at oracle precision") {
    // the map is uniformly hyperbolic away from the cusp (Lyapunov ~ 1.3 per
    // bounce), so a double-precision 100-step round trip decorrelates by step
    // ~30; the identity I T I T = id over 100 steps needs working precision
    // beyond the total expansion, hence the 120-digit solver here
    SplitMix64 rng(7);
    int done = 0;
    for (int orbit = 0; orbit < 20 && done < 2; ++orbit) {
        const CollisionState s0 = sample_mu(table(), rng);
        try {
            OracleSolver solver(table(), 120);
            solver.set_state(s0);
            bool clean = true;
            for (int i = 0; i < 100; ++i) {
                const FlightResult f = solver.step();
                if (f.next.sin_phi < 1e-3) {
                    clean = false;
                    break;
                }
            }
            if (!clean) continue;
            solver.reverse();
            for (int i = 0; i < 100; ++i) solver.step();
            solver.reverse();
            const CollisionState back = solver.state();
            CHECK(std::abs(back.r - s0.r) + std::abs(back.phi() - s0.phi()) < 1e-6);
            ++done;
        } catch (const SingularHit&) {
        }
    }
    CHECK(done == 2);
}

TEST_CASE("mu sampler marginals") {
    SplitMix64 rng(8);
    const std::size_t n = 1000000;
    std::vector<double> phis(n);
    double mean_cos = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double phi = std::acos(1.0 - 2.0 * rng.uniform());
        phis[i] = phi;
        mean_cos += std::cos(phi);
    }
    mean_cos /= double(n);
    CHECK(std::abs(mean_cos) < 3e-3);
    const double ks = ks_distance(std::move(phis), [](double x) {
        return 0.5 * (1.0 - std::cos(x));
    });
    CHECK(ks < 2e-3);
}

TEST_CASE("measure invariance under T and F (KS of pushforward marginals)") {
    EngineOptions opt;
    opt.seed = 303;
    const MarginalKs t_ks = pushforward_marginals(table(), 200000, false, opt);
    CHECK(t_ks.r_ks < 5e-3);
    CHECK(t_ks.phi_ks < 5e-3);
    const MarginalKs f_ks = pushforward_marginals(table(), 1000000, true, opt);
    CHECK(f_ks.r_ks < 5e-3);
    CHECK(f_ks.phi_ks < 5e-3);
}

TEST_CASE("single-step oracle equivalence") {
    SplitMix64 rng(9);
    double max_dr = 0, max_dphi = 0;
    int tested = 0;
    for (int i = 0; i < 300; ++i) {
        const CollisionState s = sample_mu(table(), rng);
        try {
            const FlightResult fast = next_collision(table(), s);
            const FlightResult slow = oracle_next_collision(table(), s, 60);
            max_dr = std::max(max_dr, std::abs(fast.next.r - slow.next.r));
            max_dphi = std::max(max_dphi, std::abs(fast.next.phi() - slow.next.phi()));
            CHECK(fast.next.comp == slow.next.comp);
            ++tested;
        } catch (const SingularHit&) {
        }
    }
    CHECK(tested > 290);
    CHECK(max_dr < 1e-12);
    CHECK(max_dphi < 1e-12);
}

TEST_CASE("oracle self-consistency across precisions") {
    SplitMix64 rng(10);
    // one step at 30 vs 60 digits from identical states: difference below 1e-25
    for (int i = 0; i < 25; ++i) {
        const CollisionState s = sample_mu(table(), rng);
        try {
            OracleSolver a(table(), 30), b(table(), 60);
            a.set_state(s);
            b.set_state(s);
            a.step();
            b.step();
            CHECK(OracleSolver::param_distance(a, b) < 1e-25);
        } catch (const SingularHit&) {
        }
    }
}

TEST_CASE("deep corner series stable under digit sweep") {
    // find an excursion with run length >= 300 and compare 60- vs 90-digit exits
    SplitMix64 rng(11);
    CollisionState deep_start;
    long n_found = 0;
    for (int i = 0; i < 2000000 && n_found < 300; ++i) {
        const CollisionState s = sample_mu_tilde(table(), rng);
        try {
            CollisionState cur = s;
            long n = 0;
            do {
                cur = next_collision(table(), cur).next;
                if (cur.comp != Component::Gamma3) ++n;
            } while (cur.comp != Component::Gamma3);
            if (n > n_found) {
                n_found = n;
                deep_start = s;
            }
        } catch (const SingularHit&) {
        }
    }
    REQUIRE(n_found >= 300);
    OracleSolver a(table(), 60), b(table(), 90);
    a.set_state(deep_start);
    b.set_state(deep_start);
    long ra = 0, rb = 0;
    do {
        a.step();
        ++ra;
    } while (a.component() != Component::Gamma3);
    do {
        b.step();
        ++rb;
    } while (b.component() != Component::Gamma3);
    CHECK(ra == rb);
    CHECK(OracleSolver::param_distance(a, b) < 1e-20);
}

TEST_CASE("precision escalation triggers deep in the cusp") {
    // a state whose next free path is far below the escalation threshold
    const CollisionState s = make_state(table(), Component::Gamma1, 2e-5, 0.4);
    const FlightResult fr = next_collision(table(), s);
    CHECK(fr.flags.precision_escalated);
    CHECK(fr.tau > 0.0);

    PrecisionPolicy off;
    off.allow_escalation = false;
    const FlightResult plain = next_collision(table(), s, off);
    CHECK_FALSE(plain.flags.precision_escalated);
    CHECK(std::abs(plain.next.r - fr.next.r) < 1e-10);
}

TEST_CASE("oracle requires >= 30 digits") {
    CHECK_THROWS_AS(OracleSolver(table(), 20), InvalidParams);
}
