// Command-line front end: point sets, variation estimates, training runs,
// benchmark evaluation, convergence experiments and rate fits.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qmcdl/bench.hpp"
#include "qmcdl/exp.hpp"
#include "qmcdl/lds.hpp"
#include "qmcdl/net.hpp"
#include "qmcdl/train.hpp"
#include "qmcdl/variation.hpp"

namespace {

using namespace qmcdl;

enum ExitCode : int { kOk = 0, kRuntimeFailure = 1, kBadInput = 2, kCellsFailed = 3 };

std::string fmt17(double v) { return detail::format_double(v); }

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    return out;
}

PointSet read_points_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("'" + path + "' is empty");
    const auto header = detail::split_csv_line(line);
    const std::size_t dim = header.size();
    for (std::size_t k = 0; k < dim; ++k) {
        if (header[k] != "x" + std::to_string(k + 1)) throw std::runtime_error("points CSV: header must be x1,...,xD");
    }
    std::vector<double> coords;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != dim) throw std::runtime_error("points CSV: wrong field count on line " + std::to_string(row));
        for (const auto& f : fields) coords.push_back(detail::parse_double(f));
    }
    return PointSet(dim, std::move(coords));
}

void write_points_csv(std::ostream& out, const PointSet& points) {
    for (std::size_t k = 0; k < points.dim(); ++k) out << (k ? "," : "") << 'x' << k + 1;
    out << '\n';
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t k = 0; k < points.dim(); ++k) out << (k ? "," : "") << fmt17(points(i, k));
        out << '\n';
    }
}

// ---------------------------------------------------------------------------

struct SampleArgs {
    std::string kind = "sobol";
    std::size_t dim = 1;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::uint64_t start = 1;
    std::string out = "-";
};

int run_sample(const SampleArgs& a) {
    SamplerKind kind;
    switch (parse_sampler_family(a.kind)) {
        case SamplerFamily::van_der_corput: kind = SamplerKind::van_der_corput(2, a.start); break;
        case SamplerFamily::halton: kind = SamplerKind::halton(a.start); break;
        case SamplerFamily::sobol: kind = SamplerKind::sobol(a.start); break;
        case SamplerFamily::uniform_random: kind = SamplerKind::uniform_random(a.seed, a.start - 1); break;
    }
    const PointSet points = generate(kind, a.dim, a.n);
    if (a.out == "-") {
        write_points_csv(std::cout, points);
    } else {
        auto out = open_output(a.out);
        write_points_csv(out, points);
    }
    return kOk;
}

// ---------------------------------------------------------------------------

struct VariationArgs {
    std::string map;
    std::size_t mesh = 64;
    std::string method = "recursion";
};

int run_variation(const VariationArgs& a) {
    const GridFunction f = find_benchmark(a.map).as_grid_function();
    const bool ladder = a.method == "ladder";
    const std::size_t minimum = ladder ? 1 : 2;
    if (a.mesh < 2 * minimum) throw std::invalid_argument("variation: mesh must be at least " + std::to_string(2 * minimum));
    auto estimate = [&](std::size_t mesh) {
        return ladder ? hardy_krause_ladder_bound(f, mesh) : hardy_krause_upper_bound(f, mesh);
    };
    const double value = estimate(a.mesh);
    const double coarse = estimate(a.mesh / 2);
    std::cout << fmt17(value) << ' ' << fmt17(value - coarse) << '\n';
    return kOk;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
    std::string benchmark;
    std::string sampler = "sobol";
    std::size_t n = 0;
    std::string grid = "single";
    std::uint64_t seed = 0;
    std::size_t epochs = 20000;
    std::string activation = "sigmoid";
    bool batch_norm = false;
    int loss_exponent = 2;
    double learning_rate = 1e-3;
    double weight_decay = 1e-6;
    std::size_t depth = 4;
    std::size_t width = 12;
    std::size_t test_size = 8192;
    std::size_t validation_size = 1024;
    std::size_t threads = 0;
    std::string out;
    std::string report;
};

int run_train(const TrainArgs& a) {
    const auto start = std::chrono::steady_clock::now();
    ExperimentPlan plan;
    plan.benchmark = a.benchmark;
    const SamplerFamily family = parse_sampler_family(a.sampler);
    plan.samplers = {family};
    plan.n_schedule = {a.n};
    plan.grid = parse_grid_mode(a.grid);
    plan.single.learning_rate = a.learning_rate;
    plan.single.weight_decay = a.weight_decay;
    plan.single.network.hidden_layers = a.depth;
    plan.single.network.width = a.width;
    plan.test_size = a.test_size;
    plan.validation_size = a.validation_size;
    plan.activation = parse_activation(a.activation);
    plan.batch_norm = a.batch_norm;
    plan.epochs = a.epochs;
    plan.loss_exponent = a.loss_exponent;
    plan.seed = a.seed;
    plan.threads = a.threads;
    plan.validate();

    const PlanSets sets = make_plan_sets(plan, family, a.n);
    const EnsembleResult ensemble = ensemble_select(sets.train, sets.validation, plan.hyper_grid(),
                                                    plan_base_config(plan), plan_ensemble_seed(plan, family, a.n),
                                                    plan.threads);
    const TrainedModel& model = ensemble.best;
    save_model(a.out, model.params);

    std::size_t diverged = 0;
    for (const auto& c : ensemble.cells) diverged += c.diverged;
    const auto& cfg = model.config;
    nlohmann::json report;
    report["benchmark"] = a.benchmark;
    report["sampler"] = std::string(to_string(family));
    report["n"] = a.n;
    report["grid"] = std::string(to_string(plan.grid));
    report["master_seed"] = a.seed;
    report["config"] = {{"learning_rate", cfg.learning_rate},
                        {"weight_decay", cfg.weight_decay},
                        {"depth", cfg.network.hidden_layers},
                        {"width", cfg.network.width},
                        {"activation", std::string(to_string(cfg.network.activation))},
                        {"batch_norm", cfg.network.batch_norm},
                        {"loss_exponent", cfg.loss_exponent},
                        {"seed", cfg.seed}};
    report["E_T"] = model.training_error;
    report["E_G"] = errors_on(model.params, sets.test, 1);
    report["validation_error"] = ensemble.cells[ensemble.best_index].validation_error;
    report["epochs"] = model.epochs_run;
    report["best_epoch"] = model.best_epoch;
    report["cells"] = ensemble.cells.size();
    report["diverged_cells"] = diverged;
    report["test_size"] = a.test_size;
    report["wall_ms"] =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    report["model"] = a.out;
    auto out = open_output(a.report);
    out << report.dump(2) << '\n';
    std::cout << "E_T " << fmt17(report["E_T"].get<double>()) << "  E_G " << fmt17(report["E_G"].get<double>())
              << '\n';
    return kOk;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
    std::string benchmark;
    std::string in;
    std::string out = "-";
    std::string model;
};

int run_eval(const EvalArgs& a) {
    const auto& map = find_benchmark(a.benchmark);
    const PointSet points = read_points_csv(a.in);
    if (points.dim() != map.dim) {
        throw std::invalid_argument("eval: '" + a.benchmark + "' needs " + std::to_string(map.dim) +
                                    " coordinates, the file has " + std::to_string(points.dim()));
    }
    std::vector<double> values;
    if (a.model.empty()) {
        values.reserve(points.size());
        for (std::size_t i = 0; i < points.size(); ++i) values.push_back(map(points.point(i)));
    } else {
        const NetworkParams params = load_model(a.model);
        if (params.config().input_dim != map.dim) throw std::invalid_argument("eval: model input size differs");
        values = forward(params, points.coords());
    }
    auto write = [&](std::ostream& out) {
        out << "y\n";
        for (double v : values) out << fmt17(v) << '\n';
    };
    if (a.out == "-") {
        write(std::cout);
    } else {
        auto out = open_output(a.out);
        write(out);
    }
    return kOk;
}

// ---------------------------------------------------------------------------

struct ExperimentArgs {
    std::string plan;
    std::string out;
    long threads = -1;
};

void print_fits(const std::vector<GroupRateFit>& fits) {
    for (const auto& g : fits) {
        std::printf("%-14s %-8s %-8s slope %+.4f  R2 %.4f  points %zu  N %zu..%zu\n", g.benchmark.c_str(),
                    g.sampler.c_str(), g.activation.c_str(), g.fit.slope, g.fit.r_squared, g.fit.points,
                    g.fit.n_min, g.fit.n_max);
    }
}

int run_experiment(const ExperimentArgs& a) {
    std::ifstream in(a.plan);
    if (!in) throw std::runtime_error("cannot open '" + a.plan + "'");
    ExperimentPlan plan = plan_from_json(nlohmann::json::parse(in));
    if (a.threads >= 0) plan.threads = static_cast<std::size_t>(a.threads);
    const auto records = run_plan(plan);
    const auto fits = fit_rates(records);
    emit(records, fits, a.out);
    std::size_t failed = 0;
    for (const auto& r : records) {
        std::printf("%-14s %-8s N=%-6zu E_T %.6g  E_G %.6g  runs %zu  failed %zu\n", r.benchmark.c_str(),
                    r.sampler.c_str(), r.n, r.train_error, r.gen_error, r.runs, r.failed);
        failed += r.failed;
    }
    print_fits(fits);
    if (failed) std::printf("%zu diverged cells or runs were logged in records.csv\n", failed);
    return kOk;
}

struct RatesArgs {
    std::string in;
    bool json = false;
};

int run_rates(const RatesArgs& a) {
    const auto fits = fit_rates(load_records(a.in));
    if (a.json) {
        std::cout << fits_to_json(fits).dump(2) << '\n';
    } else {
        print_fits(fits);
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quasi-Monte Carlo training sets for deep-learning surrogates"};
    app.require_subcommand(1);

    SampleArgs sample;
    auto* s = app.add_subcommand("sample", "Write a point set as CSV");
    s->add_option("--kind", sample.kind, "sobol | halton | vdc | random")
        ->check(CLI::IsMember({"sobol", "halton", "vdc", "random"}));
    s->add_option("--dim", sample.dim, "Dimension")->required()->check(CLI::PositiveNumber);
    s->add_option("--n", sample.n, "Number of points")->required();
    s->add_option("--seed", sample.seed, "Seed of the random stream");
    s->add_option("--start", sample.start, "First sequence index (1 = first point)")->check(CLI::PositiveNumber);
    s->add_option("--out", sample.out, "Output CSV, - for stdout");

    VariationArgs variation;
    auto* v = app.add_subcommand("variation", "Hardy-Krause variation estimate of a benchmark map");
    v->add_option("--map", variation.map, "Benchmark name")->required();
    v->add_option("--mesh", variation.mesh, "Mesh size");
    v->add_option("--method", variation.method, "ladder | recursion")
        ->check(CLI::IsMember({"ladder", "recursion"}));

    TrainArgs train;
    auto* t = app.add_subcommand("train", "Train a surrogate on one training set");
    t->add_option("--benchmark", train.benchmark, "Benchmark name")->required();
    t->add_option("--sampler", train.sampler, "sobol | halton | random")
        ->check(CLI::IsMember({"sobol", "halton", "vdc", "random"}));
    t->add_option("--n", train.n, "Training set size")->required()->check(CLI::PositiveNumber);
    t->add_option("--grid", train.grid, "table1 | fast | single")
        ->check(CLI::IsMember({"table1", "full", "fast", "single"}));
    t->add_option("--seed", train.seed, "Master seed");
    t->add_option("--epochs", train.epochs, "Epoch cap");
    t->add_option("--activation", train.activation, "sigmoid | tanh | relu | identity");
    t->add_flag("--batch-norm", train.batch_norm, "Batch normalization after each hidden layer");
    t->add_option("--loss-exponent", train.loss_exponent, "1 or 2");
    t->add_option("--lr", train.learning_rate, "Learning rate (single grid)");
    t->add_option("--wd", train.weight_decay, "Weight decay (single grid)");
    t->add_option("--depth", train.depth, "Hidden layers (single grid)");
    t->add_option("--width", train.width, "Hidden width (single grid)");
    t->add_option("--test-size", train.test_size, "Test set size");
    t->add_option("--validation-size", train.validation_size, "Validation set size");
    t->add_option("--threads", train.threads, "Worker threads, 0 = hardware");
    t->add_option("--out", train.out, "Model file")->required();
    t->add_option("--report", train.report, "Report JSON")->required();

    EvalArgs eval;
    auto* e = app.add_subcommand("eval", "Evaluate a benchmark (or a trained model) on a point CSV");
    e->add_option("--benchmark", eval.benchmark, "Benchmark name")->required();
    e->add_option("--in", eval.in, "Points CSV")->required();
    e->add_option("--out", eval.out, "Values CSV, - for stdout");
    e->add_option("--model", eval.model, "Evaluate this model instead of the benchmark");

    ExperimentArgs experiment;
    auto* x = app.add_subcommand("experiment", "Run a convergence plan");
    x->add_option("--plan", experiment.plan, "Plan JSON")->required();
    x->add_option("--out", experiment.out, "Result directory")->required();
    x->add_option("--threads", experiment.threads, "Override the plan's thread count");

    RatesArgs rates;
    auto* r = app.add_subcommand("rates", "Fit convergence rates to a records CSV");
    r->add_option("--in", rates.in, "records.csv")->required();
    r->add_flag("--json", rates.json, "Print JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? kOk : kBadInput;
    }

    try {
        if (*s) return run_sample(sample);
        if (*v) return run_variation(variation);
        if (*t) return run_train(train);
        if (*e) return run_eval(eval);
        if (*x) return run_experiment(experiment);
        if (*r) return run_rates(rates);
    } catch (const std::invalid_argument& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kBadInput;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        const std::string what = err.what();
        return what.find("diverged") != std::string::npos ? kCellsFailed : kRuntimeFailure;
    }
    return kBadInput;
}
