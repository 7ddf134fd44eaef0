// Throughput comparison: serial reference vs OpenMP kernels, plus the
// arbitrary-precision oracle for scale.
#include "billiard/oracle.hpp"
#include "billiard/stats.hpp"

#include <chrono>
#include <cstdio>

using namespace billiard;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

} // namespace

int main(int argc, char** argv) {
    const std::size_t n_orbits = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 200000;
    const CuspTable table = build_table({3.0, 1.0, M_PI / 6});

    std::printf("table: beta=3, s1=1, theta0=pi/6; %zu excursions per run\n\n", n_orbits);

    double serial_rate = 0.0;
    for (ExecPolicy pol : {ExecPolicy::serial, ExecPolicy::openmp}) {
        EngineOptions opt;
        opt.seed = 99;
        opt.exec = pol;
        const auto t0 = Clock::now();
        const ReturnEnsemble ens = return_time_ensemble(table, n_orbits, opt);
        const double dt = seconds_since(t0);
        double steps = 0;
        for (auto n : ens.run_lengths) steps += n + 1.0;
        const double rate = steps / dt;
        std::printf("%-8s return-map ensemble: %.2fs, %.3g collisions/s (mean R %.4f)\n",
                    pol == ExecPolicy::serial ? "serial" : "openmp", dt, rate,
                    ens.mean_return_time);
        if (pol == ExecPolicy::serial)
            serial_rate = rate;
        else
            std::printf("         speedup vs serial: %.2fx\n", rate / serial_rate);
    }

    // single long T-orbit (serial by nature)
    {
        PrecisionPolicy pol;
        SplitMix64 rng(5);
        CollisionState cur = sample_mu(table, rng);
        const std::size_t steps = 2000000;
        const auto t0 = Clock::now();
        double acc = 0;
        for (std::size_t i = 0; i < steps; ++i) {
            cur = next_collision(table, cur, pol).next;
            acc += cur.sin_phi;
        }
        const double dt = seconds_since(t0);
        std::printf("\nsingle T-orbit: %.3g collisions/s (%.0f ns/step, checksum %.3f)\n",
                    steps / dt, 1e9 * dt / steps, acc);
    }

    // oracle throughput
    {
        OracleSolver solver(table, 60);
        SplitMix64 rng(7);
        const int n = 500;
        CollisionState s = sample_mu(table, rng);
        const auto t0 = Clock::now();
        int done = 0;
        for (int i = 0; i < n; ++i) {
            try {
                solver.set_state(s);
                s = solver.step().next;
                ++done;
            } catch (const SingularHit&) {
                s = sample_mu(table, rng);
            }
        }
        const double dt = seconds_since(t0);
        std::printf("oracle (60 digits): %.3g collisions/s (%.2f ms/step, %d steps)\n", done / dt,
                    1e3 * dt / done, done);
    }
    return 0;
}
