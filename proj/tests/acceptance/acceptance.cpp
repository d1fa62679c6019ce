// Acceptance runner: `acceptance --criterion N` prints one PASS/FAIL line and
// exits non-zero on FAIL. Every tolerance lives in the constants below.

#include "jdr/experiment.hpp"
#include "jdr/jdr.hpp"
#include "jdr/metrics.hpp"
#include "jdr/predictor.hpp"
#include "jdr/sparse.hpp"
#include "jdr/synth.hpp"
#include "support/oracles.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace jdr;
namespace fs = std::filesystem;

namespace {

// Slope windows.
constexpr double kMSlopeLo = -0.65, kMSlopeHi = -0.35;
constexpr double kNSlopeLo = 0.3, kNSlopeHi = 0.7;
constexpr double kSSlopeLo = 0.8, kSSlopeHi = 1.2;
constexpr double kRobustSlopeGap = 0.15;
// Proxy expectation at m = 1e6.
constexpr double kProxyTol = 0.05;
// Fast path: cross subspace distance <= 0.15 sqrt(r).
constexpr double kFastDistanceFactor = 0.15;
// Pathology final NSEE.
constexpr double kPathologyGood = 0.3, kPathologyBadOdd = 0.6, kPathologyBadEven = 0.5;
// Kernel regression.
constexpr double kConstantTol = 1e-12, kRangeSlack = 1e-12;
// Dyadic recall.
constexpr double kRandomMultiple = 3.0;

constexpr int kTrials = 20;

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(4);
    ss << v;
    return ss.str();
}

std::string join(const std::vector<double>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + fmt(xs[i]);
    return s;
}

ExperimentPlan bilinear_m_sweep() {
    ExperimentPlan plan;
    plan.sweep = SweepVariable::M;
    plan.grid = {1000, 2000, 4000, 8000};
    plan.trials = kTrials;
    plan.seed = 1;
    plan.fixed.n1 = plan.fixed.n2 = 50;
    plan.fixed.r = 5;
    return plan;
}

Verdict slope_verdict(const ExperimentResult& res, double lo, double hi) {
    const double s = res.slope.slope;
    return {s >= lo && s <= hi, "slope=" + fmt(s) + " window=[" + fmt(lo) + "," + fmt(hi) + "] mean_nsee=" +
                                    join(res.mean_nsee)};
}

Verdict m_scaling() { return slope_verdict(run_experiment(bilinear_m_sweep()), kMSlopeLo, kMSlopeHi); }

Verdict n_scaling() {
    ExperimentPlan plan;
    plan.sweep = SweepVariable::N;
    plan.grid = {50, 100, 200};
    plan.trials = kTrials;
    plan.seed = 2;
    plan.fixed.m = 20000;
    plan.fixed.r = 5;
    return slope_verdict(run_experiment(plan), kNSlopeLo, kNSlopeHi);
}

Verdict s_scaling() {
    ExperimentPlan plan;
    plan.sweep = SweepVariable::S;
    plan.grid = {10, 20, 50, 100};
    plan.trials = kTrials;
    plan.seed = 3;
    plan.fixed.n1 = plan.fixed.n2 = 100;
    plan.fixed.m = 20000;
    plan.fixed.r = 5;
    plan.estimator = Estimator::SparseJdr;
    plan.normalize = Normalization::None;
    return slope_verdict(run_experiment(plan), kSSlopeLo, kSSlopeHi);
}

Verdict rbf_scaling() {
    auto plan = bilinear_m_sweep();
    plan.fixed.model = LinkModel::Rbf;
    plan.seed = 4;
    return slope_verdict(run_experiment(plan), kMSlopeLo, kMSlopeHi);
}

Verdict proxy_expectation() {
    SyntheticSpec spec;
    spec.n1 = spec.n2 = 8;
    spec.r = 2;
    spec.m = 1'000'000;
    spec.seed = 5;
    const auto truth = make_ground_truth(spec);
    const auto set = generate(spec, truth);
    const auto proxy = build_proxy(whiten(set, identity_normalization(8, 8)));
    const double err = (proxy.X0 - truth.U * truth.V.transpose()).norm();
    return {err <= kProxyTol, "frobenius_error=" + fmt(err) + " tol=" + fmt(kProxyTol)};
}

template <typename Fn>
double best_seconds(int repeats, Fn&& fn) {
    double best = 1e300;
    for (int i = 0; i < repeats; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

Verdict fast_path() {
    // Fidelity: same data as the m-sweep at m = 8000; both paths on feature-wise normalized data.
    double worst = 0.0, total = 0.0;
    for (int t = 0; t < kTrials; ++t) {
        SyntheticSpec spec;
        spec.n1 = spec.n2 = 50;
        spec.r = 5;
        spec.m = 8000;
        spec.seed = 600 + static_cast<std::uint64_t>(t);
        const auto set = generate(spec, make_ground_truth(spec));
        const auto exact = fit_jdr(set, 5, Normalization::FeatureWise);
        const auto fast = fit_fast_jdr(set, 5, spec.seed);
        const double d = std::max(subspace_distance(exact.whitened_U, fast.whitened_U),
                                  subspace_distance(exact.whitened_V, fast.whitened_V));
        worst = std::max(worst, d);
        total += d;
    }
    const double mean = total / kTrials;
    const double limit = kFastDistanceFactor * std::sqrt(5.0);

    SyntheticSpec big;
    big.n1 = big.n2 = 400;
    big.r = 5;
    big.m = 20000;
    big.seed = 650;
    const auto set = generate(big, make_ground_truth(big));
    const double t_exact = best_seconds(3, [&] { fit_jdr(set, 5, Normalization::Full); });
    const double t_fast = best_seconds(3, [&] { fit_fast_jdr(set, 5, 1); });

    const bool fidelity = mean <= limit;
    const bool timing = t_fast <= t_exact;
    return {fidelity && timing, "mean_cross_distance=" + fmt(mean) + " worst=" + fmt(worst) + " limit=" +
                                    fmt(limit) + (fidelity ? " (ok)" : " (over)") + " fast_s=" + fmt(t_fast) +
                                    " exact_s=" + fmt(t_exact) + (timing ? " (ok)" : " (slower)")};
}

Verdict projection_oracle() {
    long checked = 0, mismatched = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        for (Index n : {3, 4}) {
            const Matrix X = oracle::random_gaussian(n, n, 7000 + seed * 7 + static_cast<std::uint64_t>(n));
            for (Index s = 1; s <= n; ++s) {
                mismatched += (X - project_omega1(X, s)).norm() != oracle::best_residual(X, oracle::omega1_masks(n, n, s));
                mismatched += (X - project_omega2(X, s)).norm() != oracle::best_residual(X, oracle::omega2_masks(n, n, s));
                mismatched += (X - project_omega3(X, s)).norm() != oracle::best_residual(X, oracle::omega3_masks(n, n, s));
                checked += 3;
            }
            for (Index s1 = 1; s1 <= n; ++s1)
                for (Index s2 = 1; s2 <= n; ++s2) {
                    const Matrix seq = project_omega2(project_omega1(X, s1), s2);
                    mismatched += (X - seq).norm() != oracle::best_residual(X, oracle::omega12_masks(n, n, s1, s2));
                    ++checked;
                }
        }
    }
    return {mismatched == 0, "residual_checks=" + std::to_string(checked) + " mismatches=" + std::to_string(mismatched)};
}

Verdict pathology() {
    PathologyConfig cfg;
    cfg.seed = 8;
    double odd_jdr = 0, odd_phd = 0, even_jdr = 0, even_phd = 0;
    for (const auto& row : run_pathology(cfg)) {
        const bool odd = row.link == LinkModel::Bilinear;
        const bool is_jdr = row.method == Estimator::Jdr;
        (odd ? (is_jdr ? odd_jdr : odd_phd) : (is_jdr ? even_jdr : even_phd)) = row.final_nsee();
    }
    const bool pass = odd_jdr <= kPathologyGood && odd_phd >= kPathologyBadOdd && even_jdr >= kPathologyBadEven &&
                      even_phd <= kPathologyGood;
    return {pass, "odd: jdr=" + fmt(odd_jdr) + " phd=" + fmt(odd_phd) + "; even: jdr=" + fmt(even_jdr) +
                      " phd=" + fmt(even_phd)};
}

Verdict robustness() {
    auto plan = bilinear_m_sweep();
    plan.seed = 9;
    bool pass = true;
    std::string detail;
    double base = 0.0;
    for (FeatureDist variant : {FeatureDist::Uniform, FeatureDist::Poisson, FeatureDist::CorrelatedGaussian}) {
        const auto res = run_robustness(plan, variant, 0.2);
        base = res.baseline.slope.slope;
        const double gap = std::abs(res.slope_difference());
        pass = pass && gap <= kRobustSlopeGap;
        detail += std::string(to_string(variant)) + "=" + fmt(res.perturbed.slope.slope) + " ";
    }
    return {pass, "gaussian=" + fmt(base) + " " + detail + "max_gap=" + fmt(kRobustSlopeGap)};
}

Verdict kernel_regression() {
    Rng rng(10);
    std::uniform_int_distribution<Index> ia(0, 39), ib(0, 29);
    std::uniform_real_distribution<double> val(-3.0, 5.0);
    const Matrix ea = oracle::random_gaussian(40, 5, 11), eb = oracle::random_gaussian(30, 5, 12);
    std::vector<Observation> obs;
    for (int t = 0; t < 200; ++t) obs.push_back({ia(rng), ib(rng), val(rng)});

    std::vector<Observation> flat = obs;
    for (auto& o : flat) o.y = 2.75;
    const KernelPredictor constant(ea, eb, flat, 0.9, 1.1);
    double const_err = 0.0;
    for (Index i = 0; i < 40; ++i)
        for (Index j = 0; j < 30; ++j) const_err = std::max(const_err, std::abs(constant.predict(i, j) - 2.75));

    double lo = obs[0].y, hi = obs[0].y;
    for (const auto& o : obs) {
        lo = std::min(lo, o.y);
        hi = std::max(hi, o.y);
    }
    const KernelPredictor general(ea, eb, obs, 0.7, 0.7);
    int outside = 0;
    for (int q = 0; q < 1000; ++q) {
        const double v = general.predict(ia(rng), ib(rng));
        outside += v < lo - kRangeSlack || v > hi + kRangeSlack;
    }

    const KernelPredictor single(ea, eb, {{3, 4, -1.25}}, 0.5, 0.5);
    int single_bad = 0;
    for (Index i = 0; i < 40; ++i)
        for (Index j = 0; j < 30; ++j) single_bad += std::abs(single.predict(i, j) + 1.25) > kConstantTol;

    const bool pass = const_err <= kConstantTol && outside == 0 && single_bad == 0;
    return {pass, "constant_max_error=" + fmt(const_err) + " out_of_range=" + std::to_string(outside) +
                      "/1000 single_mismatch=" + std::to_string(single_bad)};
}

Verdict dyadic() {
    DyadicConfig cfg;
    cfg.seed = 11;
    const auto res = run_dyadic_benchmark(cfg);
    const double jdr = res.mean("jdr", 10), pca = res.mean("pca", 10), phd = res.mean("phd", 10);
    const double random_measured = res.mean("random", 10);
    const double random_expected = res.random_expected(10, cfg.m_b);
    const bool pass = jdr >= kRandomMultiple * random_expected && jdr >= pca;
    return {pass, "recall@10 jdr=" + fmt(jdr) + " pca=" + fmt(pca) + " phd=" + fmt(phd) + " random_expected=" +
                      fmt(random_expected) + " random_measured=" + fmt(random_measured)};
}

// ---------------------------------------------------------------- CLI determinism

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        files[fs::relative(entry.path(), dir).string()] = ss.str();
    }
    return files;
}

Verdict cli_determinism() {
    const fs::path root = fs::temp_directory_path() / "jdr_acceptance_cli";
    fs::remove_all(root);
    const std::string cli = JDR_CLI_PATH;
    auto sh = [&](const std::string& args) { return std::system((cli + " " + args + " >/dev/null 2>&1").c_str()); };

    // Shared inputs, written once and then treated as read-only.
    const fs::path in = root / "inputs";
    if (sh("synth --n1 12 --n2 10 --rank 2 --m 600 --s1 4 --s2 4 --seed 21 --out " + (in / "data").string()) != 0)
        return {false, "could not create inputs"};
    {
        std::ofstream obs(in / "observed.csv"), qs(in / "queries.csv");
        for (int i = 0; i < 30; ++i) obs << i % 15 << "," << (i * 7) % 20 << "," << (i % 4) * 0.5 << "\n";
        for (int i = 0; i < 15; ++i) qs << i << "," << (i * 3) % 20 << "\n";
    }
    const std::string data = (in / "data").string();
    const std::string abc = "--a " + data + "/A.csv --b " + data + "/B.csv --y " + data + "/y.csv";
    const auto inputs_before = snapshot(in);

    const std::vector<std::pair<std::string, std::string>> commands{
        {"synth", "synth --model rbf --dist poisson --n1 7 --n2 6 --rank 2 --m 300 --seed 4"},
        {"fit_jdr", "fit " + abc + " --algo jdr --rank 2"},
        {"fit_fast", "fit " + abc + " --algo fast --rank 2 --seed 9"},
        {"fit_sparse", "fit " + abc + " --algo sparse --rank 2 --s1 4 --s2 4"},
        {"fit_pca", "fit " + abc + " --algo pca --rank 2"},
        {"fit_phd", "fit " + abc + " --algo phd --rank 2"},
        {"fit_cphd", "fit " + abc + " --algo cphd --rank 2"},
        {"experiment", "experiment --grid 200,400 --trials 2 --n 8 --rank 2 --algo fast --seed 3"},
        {"pathology", "pathology --grid 300,600 --trials 2 --seed 2"},
        {"dyadic", "dyadic --m-d 60 --m-g 60 --n 8 --rank 2 --partitions 2 --seed 6"},
    };
    std::string failures;
    int compared = 0;
    for (const auto& [name, args] : commands) {
        std::map<std::string, std::string> runs[2];
        for (int rep = 0; rep < 2; ++rep) {
            const fs::path out = root / (name + "_" + std::to_string(rep));
            if (sh(args + " --out " + out.string()) != 0) {
                failures += name + "(exit) ";
                break;
            }
            runs[rep] = snapshot(out);
        }
        if (runs[0].empty() || runs[0] != runs[1]) failures += name + " ";
        compared += static_cast<int>(runs[0].size());
    }
    // predict needs an embedding directory; reuse the first fit.
    for (const std::string flags : {"", " --fill-zeros"}) {
        std::map<std::string, std::string> runs[2];
        for (int rep = 0; rep < 2; ++rep) {
            const fs::path out = root / ("predict" + std::to_string(flags.size()) + "_" + std::to_string(rep));
            const std::string args = "predict --emb " + (root / "fit_jdr_0").string() + " --a " + data + "/A.csv --b " +
                                     data + "/B.csv --observed " + (in / "observed.csv").string() + " --queries " +
                                     (in / "queries.csv").string() + flags + " --out " + out.string();
            if (sh(args) == 0) runs[rep] = snapshot(out);
        }
        if (runs[0].empty() || runs[0] != runs[1]) failures += "predict" + flags + " ";
        compared += static_cast<int>(runs[0].size());
    }
    if (snapshot(in) != inputs_before) failures += "inputs-mutated ";
    return {failures.empty(), "files_compared=" + std::to_string(compared) +
                                  (failures.empty() ? "" : " differing=" + failures)};
}

const std::map<int, std::pair<std::string, std::function<Verdict()>>> kCriteria{
    {1, {"m-scaling slope", m_scaling}},
    {2, {"n-scaling slope", n_scaling}},
    {3, {"s-scaling slope (sparse)", s_scaling}},
    {4, {"RBF m-scaling slope", rbf_scaling}},
    {5, {"proxy expectation", proxy_expectation}},
    {6, {"fast path fidelity and speed", fast_path}},
    {7, {"sparse projection oracle", projection_oracle}},
    {8, {"odd/even link pathology", pathology}},
    {9, {"feature-distribution robustness", robustness}},
    {10, {"kernel regression properties", kernel_regression}},
    {11, {"synthetic dyadic recall", dyadic}},
    {12, {"CLI determinism", cli_determinism}},
};

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> which;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--criterion" && i + 1 < argc) which.push_back(std::atoi(argv[++i]));
        else if (arg == "--all")
            for (const auto& [id, _] : kCriteria) which.push_back(id);
    }
    if (which.empty()) {
        std::cerr << "usage: acceptance --criterion N | --all\n";
        return 2;
    }
    bool all_pass = true;
    for (int id : which) {
        const auto it = kCriteria.find(id);
        if (it == kCriteria.end()) {
            std::cerr << "unknown criterion " << id << "\n";
            return 2;
        }
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = it->second.second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << it->second.first << "): " << v.detail
                  << " [" << fmt(secs) << "s]" << std::endl;
        all_pass = all_pass && v.pass;
    }
    return all_pass ? 0 : 1;
}
