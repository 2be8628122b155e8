// Acceptance run: one PASS/FAIL line per criterion A1..A12.
//
// Each criterion names the scenarios that implement it, the loosest
// deterministic tolerance and stochastic threshold any of its reports may
// use, and a wall-clock budget. The scenarios carry their own pass rules
// (grid fractions, monotonicity, ESS); on top of that this driver refuses a
// report whose threshold is looser than the pinned one.
#include "verify.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

namespace {

struct Criterion {
    const char* id;
    const char* title;
    std::vector<const char*> scenarios;
    double det_tol;     // largest relative tolerance allowed in a deterministic report
    double sigma;       // largest |z| threshold allowed in a stochastic report
    double budget_s;
};

const std::vector<Criterion> kCriteria = {
    {"A1", "algebra identities", {"algebra-identities"}, 1e-12, 3.0, 5},
    {"A2", "duality", {"duality"}, 1e-10, 3.0, 5},
    {"A3", "Cauchy-like theorem", {"cauchy-theorem"}, 1e-6, 3.0, 30},
    {"A4", "Gaussian (0|1)", {"gaussian-01-smalln"}, 1e-8, 3.0, 300},
    {"A5", "Gaussian (1|0)", {"gaussian-10"}, 1e-8, 3.0, 300},
    {"A6", "Lorentz", {"lorentz-closedform", "lorentz"}, 1e-9, 3.0, 600},
    {"A7", "microscopic limit", {"micro-limit"}, 2e-2, 3.0, 120},
    {"A8", "partially quenched", {"partially-quenched"}, 1e-3, 3.0, 600},
    {"A9", "quartic", {"quartic"}, 1e-8, 3.0, 900},
    {"A10", "correlated Wishart", {"correlated"}, 1e-12, 3.0, 300},
    {"A11", "supersymmetric point", {"susy-point"}, 1e-10, 3.0, 60},
    {"A12", "ordinary-space self-consistency", {"ordinary-consistency"}, 1e-10, 3.0, 60},
};

}  // namespace

int main(int argc, char** argv) {
    chirmt::ScenarioConfig cfg;
    cfg.seed = 20240601;
    cfg.samples = 100000;
    cfg.threads = 1;
    cfg.sigma = 3.0;
    // Optional filter, e.g. `acceptance A4 A9`.
    std::vector<std::string> only(argv + 1, argv + argc);

    int failed = 0;
    for (const auto& c : kCriteria) {
        if (!only.empty()) {
            bool want = false;
            for (const auto& o : only) want = want || o == c.id;
            if (!want) continue;
        }
        bool pass = true;
        std::string detail;
        const auto t0 = std::chrono::steady_clock::now();
        for (const char* name : c.scenarios) {
            chirmt::ScenarioResult r = chirmt::run_scenario(name, cfg);
            pass = pass && r.pass;
            std::string notes;
            for (const auto& rep : r.reports) {
                const double limit = rep.stochastic ? c.sigma : c.det_tol;
                if (rep.pass && rep.threshold > limit * (1.0 + 1e-12)) {
                    pass = false;
                    notes += " [" + rep.id + " uses a looser threshold]";
                }
                if (!rep.pass) {
                    notes += " [" + rep.id;
                    if (!rep.note.empty()) notes += ": " + rep.note;
                    notes += "]";
                }
            }
            detail += " " + std::string(name) + ": " + r.summary + notes + ";";
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > c.budget_s) {
            pass = false;
            detail += " [over budget]";
        }
        if (!pass) ++failed;
        std::printf("%-4s %s  %s (%.1f s of %.0f s)%s\n", c.id, pass ? "PASS" : "FAIL", c.title, secs, c.budget_s,
                    detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d criteria failed\n", failed);
    return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
