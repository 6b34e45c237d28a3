// Timing harness comparing the parallel class-property checker against
// the serial reference on the same workloads, verifying that verdicts
// agree while reporting the speedup.

#include <chrono>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "amalgam/checkers.hpp"

using namespace amalgam;

namespace {

struct Workload {
    std::string cls;
    std::string property;
    int n;
    int bound;
};

std::unique_ptr<ClassDriver> driver_by_name(const std::string& name)
{
    if (name == "equiv2") return make_equiv2_driver();
    if (name == "linear-orders") return make_linear_order_driver();
    if (name == "graphs") return make_graph_driver();
    return make_boolean_driver();
}

CheckReport run_one(const ClassDriver& d, const Workload& w,
                    bool parallel, double& seconds)
{
    CheckOptions opt;
    opt.parallel = parallel;
    auto t0 = std::chrono::steady_clock::now();
    CheckReport rep;
    if (w.property == "jep")
        rep = check_jep(d, w.n, w.bound, nullptr, opt);
    else if (w.property == "wap")
        rep = check_wap(d, w.n, w.bound, opt);
    else
        rep = check_cap(d, w.n, w.bound, opt);
    auto t1 = std::chrono::steady_clock::now();
    seconds = std::chrono::duration<double>(t1 - t0).count();
    return rep;
}

} // namespace

int main()
{
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads: %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP disabled: parallel runs fall back to serial\n");
#endif
    std::vector<Workload> workloads = {
        {"equiv2", "jep", 1, 3},
        {"equiv2", "jep", 1, 4},
        {"linear-orders", "jep", 2, 2},
        {"graphs", "jep", 1, 3},
        {"linear-orders", "wap", 1, 3},
    };
    std::printf("%-14s %-4s %2s %5s | %10s %10s %8s  %s\n",
                "class", "prop", "n", "bound", "serial[s]", "parallel[s]",
                "speedup", "verdict");
    bool all_agree = true;
    for (const Workload& w : workloads) {
        std::unique_ptr<ClassDriver> d = driver_by_name(w.cls);
        double ts = 0.0, tp = 0.0;
        CheckReport serial = run_one(*d, w, false, ts);
        CheckReport parallel = run_one(*d, w, true, tp);
        bool agree = serial.holds == parallel.holds &&
                     serial.bound_independent == parallel.bound_independent;
        all_agree = all_agree && agree;
        std::printf("%-14s %-4s %2d %5d | %10.3f %10.3f %7.2fx  %s%s\n",
                    w.cls.c_str(), w.property.c_str(), w.n, w.bound, ts, tp,
                    tp > 0.0 ? ts / tp : 0.0,
                    serial.holds ? "holds" : "fails",
                    agree ? "" : "  [MISMATCH]");
    }
    if (!all_agree) {
        std::printf("verdict mismatch between serial and parallel runs\n");
        return 1;
    }
    return 0;
}
