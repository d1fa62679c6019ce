// jdr: synthesize data, fit embeddings, predict dyadic scores and run the
// scaling experiments. Every command writes into --out.

#include "jdr/baselines.hpp"
#include "jdr/experiment.hpp"
#include "jdr/io.hpp"
#include "jdr/jdr.hpp"
#include "jdr/predictor.hpp"
#include "jdr/sparse.hpp"
#include "jdr/synth.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using jdr::Index;
using jdr::Matrix;
using jdr::Vector;
using jdr::io::Json;

namespace {

const std::map<std::string, jdr::Normalization> kNormalizations{
    {"full", jdr::Normalization::Full},
    {"featurewise", jdr::Normalization::FeatureWise},
    {"none", jdr::Normalization::None}};

const std::map<std::string, jdr::LinkModel> kModels{
    {"bilinear", jdr::LinkModel::Bilinear}, {"rbf", jdr::LinkModel::Rbf}, {"even", jdr::LinkModel::EvenQuadratic}};

const std::map<std::string, jdr::FeatureDist> kDists{{"gaussian", jdr::FeatureDist::Gaussian},
                                                      {"uniform", jdr::FeatureDist::Uniform},
                                                      {"poisson", jdr::FeatureDist::Poisson},
                                                      {"corr", jdr::FeatureDist::CorrelatedGaussian}};

const std::map<std::string, jdr::Estimator> kEstimators{
    {"jdr", jdr::Estimator::Jdr},   {"fast", jdr::Estimator::FastJdr}, {"sparse", jdr::Estimator::SparseJdr},
    {"pca", jdr::Estimator::Pca},   {"phd", jdr::Estimator::Phd},      {"cphd", jdr::Estimator::Cphd}};

const std::map<std::string, jdr::SweepVariable> kSweeps{
    {"m", jdr::SweepVariable::M}, {"n", jdr::SweepVariable::N}, {"s", jdr::SweepVariable::S}};

Json base_meta(const std::string& command) {
    Json j;
    j["command"] = command;
    j["version"] = JDR_VERSION_STRING;
    return j;
}

fs::path prepare_out(const std::string& out) {
    fs::path dir(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    jdr::require(!ec && fs::is_directory(dir), jdr::ErrorKind::Io, "cannot create output directory " + out);
    return dir;
}

Json index_list(const std::vector<Index>& v) {
    Json j = Json::array();
    for (Index x : v) j.push_back(x);
    return j;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
    std::string model = "bilinear";
    std::string dist = "gaussian";
    Index n1 = 50, n2 = 50, r = 5, m = 1000;
    Index s1 = 0, s2 = 0;
    double rho = 0.2;
    double noise = 1.0;
    std::uint64_t seed = 0;
    std::string out;
};

void run_synth(const SynthArgs& a) {
    jdr::SyntheticSpec spec;
    spec.model = kModels.at(a.model);
    spec.feature_dist = kDists.at(a.dist);
    spec.n1 = a.n1;
    spec.n2 = a.n2;
    spec.r = a.r;
    spec.m = a.m;
    spec.rho = a.rho;
    spec.noise_sd = a.noise;
    spec.seed = a.seed;
    if (a.s1 > 0 || a.s2 > 0) spec.sparsity = std::make_pair(a.s1 > 0 ? a.s1 : a.n1, a.s2 > 0 ? a.s2 : a.n2);
    spec.validate();

    const auto truth = jdr::make_ground_truth(spec);
    const auto set = jdr::generate(spec, truth);
    const fs::path dir = prepare_out(a.out);
    jdr::io::write_matrix_csv(dir / "A.csv", set.A);
    jdr::io::write_matrix_csv(dir / "B.csv", set.B);
    jdr::io::write_vector_column(dir / "y.csv", set.y);
    jdr::io::write_matrix_csv(dir / "U.csv", truth.U);
    jdr::io::write_matrix_csv(dir / "V.csv", truth.V);
    if (spec.sparsity) {
        jdr::io::write_index_list(dir / "support_U.csv", truth.support_U);
        jdr::io::write_index_list(dir / "support_V.csv", truth.support_V);
    }
    Json meta = base_meta("synth");
    meta["model"] = a.model;
    meta["dist"] = a.dist;
    meta["n1"] = a.n1;
    meta["n2"] = a.n2;
    meta["r"] = a.r;
    meta["m"] = a.m;
    meta["rho"] = a.rho;
    meta["noise_sd"] = a.noise;
    meta["s1"] = spec.sparsity ? spec.sparsity->first : a.n1;
    meta["s2"] = spec.sparsity ? spec.sparsity->second : a.n2;
    meta["seed"] = a.seed;
    jdr::io::write_json(dir / "meta.json", meta);
}

// ---------------------------------------------------------------- fit

struct FitArgs {
    std::string a_path, b_path, y_path;
    bool header = false;
    std::string algo = "jdr";
    Index rank = 5;
    Index s1 = 0, s2 = 0;
    std::string normalize;  // default depends on the algorithm
    std::uint64_t seed = 0;
    std::string out;
};

void run_fit(const FitArgs& a) {
    jdr::SampleSet set{jdr::io::read_matrix_csv(a.a_path, a.header), jdr::io::read_matrix_csv(a.b_path, a.header),
                       jdr::io::read_vector_csv(a.y_path, a.header)};
    jdr::validate(set);
    const std::string norm_name = a.normalize.empty() ? (a.algo == "sparse" ? "none" : "full") : a.normalize;
    const jdr::Normalization mode = kNormalizations.at(norm_name);
    const fs::path dir = prepare_out(a.out);

    Json meta = base_meta("fit");
    meta["algo"] = a.algo;
    meta["r"] = a.rank;
    meta["m"] = set.size();
    meta["n1"] = set.dim_a();
    meta["n2"] = set.dim_b();
    meta["normalization"] = norm_name;
    meta["seed"] = a.seed;

    jdr::NormalizationState state;
    auto write_pair = [&](const Matrix& U, const Matrix& V, const Vector& sigma) {
        jdr::io::write_matrix_csv(dir / "U.csv", U);
        jdr::io::write_matrix_csv(dir / "V.csv", V);
        jdr::io::write_vector_row(dir / "sigma.csv", sigma);
    };

    if (a.algo == "jdr" || a.algo == "fast") {
        const jdr::JdrFit fit = a.algo == "jdr" ? jdr::fit_jdr_with_state(set, a.rank, mode)
                                                : jdr::fit_fast_jdr_with_state(set, a.rank, a.seed);
        if (a.algo == "fast") meta["normalization"] = "featurewise";
        state = fit.normalization;
        write_pair(fit.embedding.U, fit.embedding.V, fit.embedding.sigma);
    } else if (a.algo == "sparse") {
        const jdr::SparsityBudget budget{a.rank, a.s1 > 0 ? a.s1 : set.dim_a(), a.s2 > 0 ? a.s2 : set.dim_b()};
        const auto fit = jdr::fit_sparse_jdr(set, budget, mode);
        state = jdr::fit_normalization(set, mode);
        write_pair(fit.base.U, fit.base.V, fit.base.sigma);
        jdr::io::write_index_list(dir / "support_U.csv", fit.row_support_U);
        jdr::io::write_index_list(dir / "support_V.csv", fit.row_support_V);
        meta["s1"] = budget.s1;
        meta["s2"] = budget.s2;
    } else if (a.algo == "pca") {
        state = jdr::fit_normalization(set, jdr::Normalization::None);
        write_pair(jdr::fit_pca(set.A, a.rank), jdr::fit_pca(set.B, a.rank), Vector::Ones(a.rank));
        meta["normalization"] = "none";
    } else if (a.algo == "phd") {
        state = jdr::fit_normalization(set, mode);
        const auto w = jdr::whiten(set, state);
        const auto [U, V] =
            jdr::unwhiten_embeddings(jdr::fit_phd(w.A, w.y, a.rank), jdr::fit_phd(w.B, w.y, a.rank), state);
        write_pair(U, V, Vector::Ones(a.rank));
    } else {  // cphd
        state = jdr::fit_normalization(set, mode);
        const auto w = jdr::whiten(set, state);
        const Matrix W = jdr::fit_cphd({w.A, w.B, w.y}, a.rank);
        const auto [Wa, Wb] =
            jdr::unwhiten_embeddings(W.topRows(set.dim_a()), W.bottomRows(set.dim_b()), state);
        Matrix joint(W.rows(), W.cols());
        joint << Wa, Wb;
        jdr::io::write_matrix_csv(dir / "W.csv", joint);
    }
    jdr::io::write_vector_column(dir / "mu_a.csv", state.mu_a);
    jdr::io::write_vector_column(dir / "mu_b.csv", state.mu_b);
    meta["jitter"] = state.jitter();
    jdr::io::write_json(dir / "meta.json", meta);
}

// ---------------------------------------------------------------- predict

struct PredictArgs {
    std::string emb_dir;
    std::string a_path, b_path;
    std::string observed_path, queries_path;
    bool header = false;
    std::optional<double> hd, hg;
    bool fill_zeros = false;
    std::uint64_t seed = 0;
    std::string out;
};

void run_predict(const PredictArgs& a) {
    const fs::path emb(a.emb_dir);
    const Matrix U = jdr::io::read_matrix_csv(emb / "U.csv");
    const Matrix V = jdr::io::read_matrix_csv(emb / "V.csv");
    const Vector sigma = jdr::io::read_vector_csv(emb / "sigma.csv");
    const Vector mu_a = jdr::io::read_vector_csv(emb / "mu_a.csv");
    const Vector mu_b = jdr::io::read_vector_csv(emb / "mu_b.csv");
    const Matrix fa = jdr::io::read_matrix_csv(a.a_path, a.header);
    const Matrix fb = jdr::io::read_matrix_csv(a.b_path, a.header);
    auto observed = jdr::io::read_triples(a.observed_path, a.header);
    const auto queries = jdr::io::read_pairs(a.queries_path, a.header);

    jdr::DyadicDataset data{fa, fb, observed, queries};
    data.validate();
    if (a.fill_zeros) data.observed = jdr::fill_zeros(data.observed, fb.rows());

    const Matrix za = jdr::embed_scaled_raw(U, sigma, mu_a, fa);
    const Matrix zb = jdr::embed_scaled_raw(V, sigma, mu_b, fb);
    const double hd = a.hd ? *a.hd : jdr::median_heuristic_bandwidth(za, a.seed);
    const double hg = a.hg ? *a.hg : jdr::median_heuristic_bandwidth(zb, a.seed);
    const jdr::KernelPredictor kp(za, zb, data.observed, hd, hg);
    const auto yhat = kp.predict_all(queries);

    const fs::path dir = prepare_out(a.out);
    std::vector<jdr::Observation> rows;
    for (std::size_t q = 0; q < queries.size(); ++q) rows.push_back({queries[q].first, queries[q].second, yhat[q]});
    jdr::io::write_triples(dir / "predictions.csv", rows);
    Json meta = base_meta("predict");
    meta["h_d"] = hd;
    meta["h_g"] = hg;
    meta["fill_zeros"] = a.fill_zeros;
    meta["observed"] = data.observed.size();
    meta["queries"] = queries.size();
    meta["seed"] = a.seed;
    jdr::io::write_json(dir / "meta.json", meta);
}

// ---------------------------------------------------------------- experiment

struct ExperimentArgs {
    std::string sweep = "m";
    std::vector<Index> grid;
    Index trials = 20;
    std::string model = "bilinear";
    std::string dist = "gaussian";
    double rho = 0.2;
    std::string algo = "jdr";
    std::string normalize;
    Index n = 50, m = 1000, r = 5, s = 0;
    double noise = 1.0;
    std::uint64_t seed = 0;
    std::string out;
};

void write_experiment_csv(const fs::path& path, const jdr::ExperimentResult& res) {
    std::string text = "parameter,trial,nsee\n";
    for (const auto& rec : res.records)
        text += std::to_string(rec.parameter) + "," + std::to_string(rec.trial) + "," +
                jdr::io::format_double(rec.nsee) + "\n";
    for (std::size_t g = 0; g < res.grid.size(); ++g)
        text += std::to_string(res.grid[g]) + ",mean," + jdr::io::format_double(res.mean_nsee[g]) + "\n";
    text += "all,slope," + jdr::io::format_double(res.slope.slope) + "\n";
    jdr::io::write_text(path, text);
}

void run_experiment_cmd(const ExperimentArgs& a) {
    jdr::ExperimentPlan plan;
    plan.sweep = kSweeps.at(a.sweep);
    plan.grid = a.grid;
    plan.trials = a.trials;
    plan.seed = a.seed;
    plan.estimator = kEstimators.at(a.algo);
    const std::string norm_name = a.normalize.empty() ? (a.algo == "sparse" ? "none" : "full") : a.normalize;
    plan.normalize = kNormalizations.at(norm_name);
    plan.fixed.model = kModels.at(a.model);
    plan.fixed.feature_dist = kDists.at(a.dist);
    plan.fixed.rho = a.rho;
    plan.fixed.n1 = plan.fixed.n2 = a.n;
    plan.fixed.m = a.m;
    plan.fixed.r = a.r;
    plan.fixed.noise_sd = a.noise;
    if (a.s > 0) plan.fixed.sparsity = std::make_pair(a.s, a.s);

    const auto res = jdr::run_experiment(plan);
    const fs::path dir = prepare_out(a.out);
    write_experiment_csv(dir / "results.csv", res);
    Json meta = base_meta("experiment");
    meta["sweep"] = a.sweep;
    meta["grid"] = index_list(a.grid);
    meta["trials"] = a.trials;
    meta["model"] = a.model;
    meta["dist"] = a.dist;
    meta["rho"] = a.rho;
    meta["algo"] = a.algo;
    meta["normalization"] = norm_name;
    meta["n"] = a.n;
    meta["m"] = a.m;
    meta["r"] = a.r;
    meta["s"] = a.s;
    meta["noise_sd"] = a.noise;
    meta["seed"] = a.seed;
    meta["slope"] = res.slope.slope;
    jdr::io::write_json(dir / "meta.json", meta);
    std::cout << "slope " << jdr::io::format_double(res.slope.slope) << "\n";
}

// ---------------------------------------------------------------- pathology

void run_pathology_cmd(const jdr::PathologyConfig& cfg, const std::string& out) {
    const auto rows = jdr::run_pathology(cfg);
    const fs::path dir = prepare_out(out);
    std::string text = "link,method,parameter,mean_nsee\n";
    for (const auto& row : rows)
        for (std::size_t g = 0; g < row.result.grid.size(); ++g)
            text += std::string(jdr::to_string(row.link)) + "," + jdr::to_string(row.method) + "," +
                    std::to_string(row.result.grid[g]) + "," + jdr::io::format_double(row.result.mean_nsee[g]) + "\n";
    jdr::io::write_text(dir / "pathology.csv", text);
    Json meta = base_meta("pathology");
    meta["n"] = cfg.n;
    meta["r"] = cfg.r;
    meta["grid"] = index_list(cfg.grid);
    meta["trials"] = cfg.trials;
    meta["noise_sd"] = cfg.noise_sd;
    meta["seed"] = cfg.seed;
    jdr::io::write_json(dir / "meta.json", meta);
    for (const auto& row : rows)
        std::cout << jdr::to_string(row.link) << " " << jdr::to_string(row.method) << " final "
                  << jdr::io::format_double(row.final_nsee()) << "\n";
}

// ---------------------------------------------------------------- dyadic

void run_dyadic_cmd(const jdr::DyadicConfig& cfg, const std::string& out) {
    const auto res = jdr::run_dyadic_benchmark(cfg);
    const fs::path dir = prepare_out(out);
    std::string text = "method,partition,k,recall\n";
    for (const auto& row : res.rows)
        text += row.method + "," + std::to_string(row.partition) + "," + std::to_string(row.k) + "," +
                jdr::io::format_double(row.recall) + "\n";
    std::vector<std::string> methods;
    for (const auto& row : res.rows)
        if (std::find(methods.begin(), methods.end(), row.method) == methods.end()) methods.push_back(row.method);
    for (const auto& method : methods)
        for (Index k : cfg.ks)
            text += method + ",mean," + std::to_string(k) + "," + jdr::io::format_double(res.mean(method, k)) + "\n";
    for (Index k : cfg.ks)
        text += "random_expected,mean," + std::to_string(k) + "," +
                jdr::io::format_double(res.random_expected(k, cfg.m_b)) + "\n";
    jdr::io::write_text(dir / "recall.csv", text);
    Json meta = base_meta("dyadic");
    meta["m_d"] = cfg.m_a;
    meta["m_g"] = cfg.m_b;
    meta["n"] = cfg.n;
    meta["r"] = cfg.r;
    meta["partitions"] = cfg.partitions;
    meta["test_fraction"] = cfg.test_fraction;
    meta["positive_quantile"] = cfg.positive_quantile;
    meta["k"] = index_list(cfg.ks);
    meta["bandwidth_scale"] = cfg.bandwidth_scale;
    meta["cphd"] = cfg.include_cphd;
    meta["seed"] = cfg.seed;
    jdr::io::write_json(dir / "meta.json", meta);
    for (const auto& method : methods)
        std::cout << method << " recall@" << cfg.ks.front() << " " << jdr::io::format_double(res.mean(method, cfg.ks.front()))
                  << "\n";
}

template <typename Map>
auto choices(const Map& m) {
    std::vector<std::string> keys;
    for (const auto& [k, v] : m) keys.push_back(k);
    return CLI::IsMember(keys);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Joint dimensionality reduction for paired features"};
    app.set_version_flag("--version", JDR_VERSION_STRING);
    app.require_subcommand(1);

    SynthArgs sa;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic sample set and its ground truth");
    synth->add_option("--model", sa.model)->check(choices(kModels));
    synth->add_option("--dist", sa.dist)->check(choices(kDists));
    synth->add_option("--n1", sa.n1);
    synth->add_option("--n2", sa.n2);
    synth->add_option("--rank,-r", sa.r);
    synth->add_option("--m", sa.m);
    synth->add_option("--s1", sa.s1, "Planted row support of U (0 = dense)");
    synth->add_option("--s2", sa.s2, "Planted row support of V (0 = dense)");
    synth->add_option("--rho", sa.rho);
    synth->add_option("--noise", sa.noise);
    synth->add_option("--seed", sa.seed);
    synth->add_option("--out", sa.out)->required();

    FitArgs fa;
    auto* fit = app.add_subcommand("fit", "Estimate embeddings from A, B, y");
    fit->add_option("--a", fa.a_path)->required()->check(CLI::ExistingFile);
    fit->add_option("--b", fa.b_path)->required()->check(CLI::ExistingFile);
    fit->add_option("--y", fa.y_path)->required()->check(CLI::ExistingFile);
    fit->add_flag("--header", fa.header, "Input CSVs start with a header row");
    fit->add_option("--algo", fa.algo)->check(CLI::IsMember({"jdr", "fast", "sparse", "pca", "phd", "cphd"}));
    fit->add_option("--rank,-r", fa.rank);
    fit->add_option("--s1", fa.s1);
    fit->add_option("--s2", fa.s2);
    fit->add_option("--normalize", fa.normalize)->check(choices(kNormalizations));
    fit->add_option("--seed", fa.seed);
    fit->add_option("--out", fa.out)->required();

    PredictArgs pa;
    double hd = 0.0, hg = 0.0;
    auto* predict = app.add_subcommand("predict", "Kernel regression over observed dyads");
    predict->add_option("--emb", pa.emb_dir, "Directory written by fit")->required()->check(CLI::ExistingDirectory);
    predict->add_option("--a", pa.a_path, "Entity features, A side")->required()->check(CLI::ExistingFile);
    predict->add_option("--b", pa.b_path, "Entity features, B side")->required()->check(CLI::ExistingFile);
    predict->add_option("--observed", pa.observed_path, "Triples i,j,y")->required()->check(CLI::ExistingFile);
    predict->add_option("--queries", pa.queries_path, "Pairs i,j")->required()->check(CLI::ExistingFile);
    predict->add_flag("--header", pa.header);
    auto* hd_opt = predict->add_option("--hd", hd, "A-side bandwidth (default: median heuristic)")->check(CLI::PositiveNumber);
    auto* hg_opt = predict->add_option("--hg", hg, "B-side bandwidth (default: median heuristic)")->check(CLI::PositiveNumber);
    predict->add_flag("--fill-zeros", pa.fill_zeros, "Score missing genes of observed diseases as 0");
    predict->add_option("--seed", pa.seed);
    predict->add_option("--out", pa.out)->required();

    ExperimentArgs ea;
    auto* experiment = app.add_subcommand("experiment", "Error-scaling sweep");
    experiment->add_option("--sweep", ea.sweep)->check(choices(kSweeps));
    experiment->add_option("--grid", ea.grid)->delimiter(',')->required();
    experiment->add_option("--trials", ea.trials);
    experiment->add_option("--model", ea.model)->check(choices(kModels));
    experiment->add_option("--dist", ea.dist)->check(choices(kDists));
    experiment->add_option("--rho", ea.rho);
    experiment->add_option("--algo", ea.algo)->check(choices(kEstimators));
    experiment->add_option("--normalize", ea.normalize)->check(choices(kNormalizations));
    experiment->add_option("--n", ea.n);
    experiment->add_option("--m", ea.m);
    experiment->add_option("--rank,-r", ea.r);
    experiment->add_option("--s", ea.s, "Planted sparsity when not swept (0 = dense)");
    experiment->add_option("--noise", ea.noise);
    experiment->add_option("--seed", ea.seed);
    experiment->add_option("--out", ea.out)->required();

    jdr::PathologyConfig pc;
    std::string pathology_out;
    auto* pathology = app.add_subcommand("pathology", "JDR vs pHd on odd and even links");
    pathology->add_option("--n", pc.n);
    pathology->add_option("--rank,-r", pc.r);
    pathology->add_option("--grid", pc.grid)->delimiter(',');
    pathology->add_option("--trials", pc.trials);
    pathology->add_option("--noise", pc.noise_sd);
    pathology->add_option("--seed", pc.seed);
    pathology->add_option("--out", pathology_out)->required();

    jdr::DyadicConfig dc;
    std::string dyadic_out;
    auto* dyadic = app.add_subcommand("dyadic", "Held-out recall@k on synthetic dyads");
    dyadic->add_option("--m-d", dc.m_a);
    dyadic->add_option("--m-g", dc.m_b);
    dyadic->add_option("--n", dc.n);
    dyadic->add_option("--rank,-r", dc.r);
    dyadic->add_option("--partitions", dc.partitions);
    dyadic->add_option("--test-fraction", dc.test_fraction);
    dyadic->add_option("--k", dc.ks)->delimiter(',');
    dyadic->add_option("--bandwidth-scale", dc.bandwidth_scale);
    dyadic->add_flag("--cphd", dc.include_cphd, "Also run cpHd+KR (slow)");
    dyadic->add_option("--seed", dc.seed);
    dyadic->add_option("--out", dyadic_out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*synth) run_synth(sa);
        if (*fit) run_fit(fa);
        if (*predict) {
            if (*hd_opt) pa.hd = hd;
            if (*hg_opt) pa.hg = hg;
            run_predict(pa);
        }
        if (*experiment) run_experiment_cmd(ea);
        if (*pathology) run_pathology_cmd(pc, pathology_out);
        if (*dyadic) run_dyadic_cmd(dc, dyadic_out);
    } catch (const jdr::Error& e) {
        std::cerr << "error: kind=" << jdr::to_string(e.kind()) << " message=" << e.message() << "\n";
        return e.is_numerical() ? 3 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: kind=Internal message=" << e.what() << "\n";
        return 3;
    }
    return 0;
}
