#pragma once

// Convergence studies: training-set size schedules, sampler comparisons,
// log-log rate fits and result files.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "qmcdl/bench.hpp"
#include "qmcdl/lds.hpp"
#include "qmcdl/net.hpp"
#include "qmcdl/rng.hpp"
#include "qmcdl/train.hpp"

namespace qmcdl {

enum class GridMode { table1, fast, single };

[[nodiscard]] inline std::string_view to_string(GridMode g) {
    switch (g) {
        case GridMode::table1: return "table1";
        case GridMode::fast: return "fast";
        case GridMode::single: return "single";
    }
    return "unknown";
}

[[nodiscard]] inline GridMode parse_grid_mode(std::string_view name) {
    if (name == "table1" || name == "full") return GridMode::table1;
    if (name == "fast") return GridMode::fast;
    if (name == "single") return GridMode::single;
    throw std::invalid_argument("unknown grid mode '" + std::string(name) + "'");
}

struct ExperimentPlan {
    std::string benchmark;
    std::vector<SamplerFamily> samplers{SamplerFamily::sobol, SamplerFamily::uniform_random};
    std::vector<std::size_t> n_schedule{16, 32, 64, 128, 256, 512, 1024};
    GridMode grid = GridMode::fast;
    std::vector<std::size_t> depths;  // overrides the grid's depth list when non-empty
    TrainConfig single;               // the configuration for GridMode::single
    std::size_t random_repeats = 100;
    std::size_t sobol_repeats = 1;    // > 1 reports retraining averages for deterministic samplers too
    bool random_best = false;         // report the ensemble-best model for random samplers too
    std::size_t test_size = 8192;
    std::size_t validation_size = 1024;
    bool paper_faithful = false;      // select ensembles on the test set
    Activation activation = Activation::sigmoid;
    bool batch_norm = false;
    std::size_t epochs = 20000;
    int loss_exponent = 2;
    std::uint64_t seed = 0;
    std::size_t threads = 0;

    void validate() const {
        (void)find_benchmark(benchmark);
        if (samplers.empty()) throw std::invalid_argument("plan: no samplers");
        if (n_schedule.empty()) throw std::invalid_argument("plan: empty N schedule");
        for (std::size_t i = 0; i < n_schedule.size(); ++i) {
            if (n_schedule[i] == 0) throw std::invalid_argument("plan: N must be positive");
            if (i > 0 && n_schedule[i] <= n_schedule[i - 1]) {
                throw std::invalid_argument("plan: N schedule must be strictly increasing");
            }
        }
        if (test_size <= n_schedule.back()) throw std::invalid_argument("plan: test size must exceed max N");
        if (validation_size == 0) throw std::invalid_argument("plan: validation size must be positive");
        if (random_repeats == 0 || sobol_repeats == 0) throw std::invalid_argument("plan: repeats must be positive");
        if (epochs == 0) throw std::invalid_argument("plan: epochs must be positive");
    }

    [[nodiscard]] HyperGrid hyper_grid() const {
        HyperGrid g;
        switch (grid) {
            case GridMode::table1: g = HyperGrid::table1(); break;
            case GridMode::fast: g = HyperGrid::fast(); break;
            case GridMode::single: g = HyperGrid::single(single); break;
        }
        if (!depths.empty() && grid != GridMode::single) g.depths = depths;
        return g;
    }
};

struct ExperimentRecord {
    std::string benchmark;
    std::string sampler;
    std::size_t n = 0;
    double train_error = 0.0;
    double gen_error = 0.0;
    double learning_rate = 0.0;
    double weight_decay = 0.0;
    std::size_t depth = 0;
    std::size_t width = 0;
    std::uint64_t seed = 0;
    double train_error_sd = 0.0;
    double gen_error_sd = 0.0;
    std::string activation;
    std::size_t runs = 1;     // trainings averaged into the errors
    std::size_t failed = 0;   // diverged cells and runs
    double wall_ms = 0.0;

    friend bool operator==(const ExperimentRecord&, const ExperimentRecord&) = default;
};

// ---------------------------------------------------------------------------
// Data sets of a plan
// ---------------------------------------------------------------------------

/// Training, validation and test sets of one sampler at one N. For
/// deterministic sequences the test block starts at the first power of two
/// above max N, and the validation block follows it, so the three never
/// overlap. Random sets come from independent streams of the master seed.
struct PlanSets {
    Dataset train;
    Dataset validation;
    Dataset test;
};

[[nodiscard]] inline std::uint64_t plan_stream(std::uint64_t master, SamplerFamily family, std::uint64_t role,
                                               std::uint64_t n = 0) {
    return derive_seed(master, {static_cast<std::uint64_t>(family), role, n});
}

[[nodiscard]] inline SamplerKind plan_sampler(SamplerFamily family, std::uint64_t start, std::uint64_t stream) {
    switch (family) {
        case SamplerFamily::van_der_corput: return SamplerKind::van_der_corput(2, start);
        case SamplerFamily::halton: return SamplerKind::halton(start);
        case SamplerFamily::sobol: return SamplerKind::sobol(start);
        case SamplerFamily::uniform_random: return SamplerKind::uniform_random(stream, 0);
    }
    throw std::invalid_argument("plan_sampler: unknown family");
}

[[nodiscard]] inline PlanSets make_plan_sets(const ExperimentPlan& plan, SamplerFamily family, std::size_t n) {
    const auto& map = find_benchmark(plan.benchmark);
    const std::uint64_t max_n = plan.n_schedule.back();
    std::uint64_t test_start = 1;
    while (test_start <= max_n) test_start <<= 1;
    const std::uint64_t validation_start = test_start + plan.test_size;
    enum : std::uint64_t { kTrain = 1, kValidation = 2, kTest = 3 };
    PlanSets sets;
    sets.train = make_dataset(generate(plan_sampler(family, 1, plan_stream(plan.seed, family, kTrain, n)), map.dim, n),
                              map);
    sets.validation = make_dataset(
        generate(plan_sampler(family, validation_start, plan_stream(plan.seed, family, kValidation)), map.dim,
                 plan.validation_size),
        map);
    sets.test = make_dataset(
        generate(plan_sampler(family, test_start, plan_stream(plan.seed, family, kTest)), map.dim, plan.test_size),
        map);
    return sets;
}

/// The training configuration shared by every grid cell of the plan.
[[nodiscard]] inline TrainConfig plan_base_config(const ExperimentPlan& plan) {
    TrainConfig base = plan.single;
    base.loss_exponent = plan.loss_exponent;
    base.epochs = plan.epochs;
    base.network.input_dim = find_benchmark(plan.benchmark).dim;
    base.network.activation = plan.activation;
    base.network.batch_norm = plan.batch_norm;
    return base;
}

/// Seed of the ensemble trained for (sampler, N).
[[nodiscard]] inline std::uint64_t plan_ensemble_seed(const ExperimentPlan& plan, SamplerFamily family,
                                                      std::size_t n) {
    return plan_stream(plan.seed, family, 10, n);
}

// ---------------------------------------------------------------------------
// Running a plan
// ---------------------------------------------------------------------------

/// One record per (sampler, N) in plan order. Each record trains on the
/// sampler's first N points and measures E_G on the test set. With an
/// ensemble grid the best cell is chosen on the validation set; deterministic
/// samplers then report that model, random samplers report the mean over
/// `random_repeats` retrainings of its configuration.
[[nodiscard]] inline std::vector<ExperimentRecord> run_plan(const ExperimentPlan& plan) {
    plan.validate();
    const HyperGrid grid = plan.hyper_grid();
    const TrainConfig base = plan_base_config(plan);

    std::vector<ExperimentRecord> records;
    for (SamplerFamily family : plan.samplers) {
        const bool random = family == SamplerFamily::uniform_random;
        for (std::size_t n : plan.n_schedule) {
            const auto start = std::chrono::steady_clock::now();
            const PlanSets sets = make_plan_sets(plan, family, n);
            const std::uint64_t cell_master = plan_ensemble_seed(plan, family, n);

            ExperimentRecord rec;
            rec.benchmark = plan.benchmark;
            rec.sampler = std::string(to_string(family));
            rec.n = n;
            rec.activation = std::string(to_string(plan.activation));

            const EnsembleResult ensemble =
                ensemble_select(sets.train, plan.paper_faithful ? sets.test : sets.validation, grid, base,
                                cell_master, plan.threads);
            for (const auto& cell : ensemble.cells) rec.failed += cell.diverged;
            const TrainConfig& chosen = ensemble.best.config;
            rec.learning_rate = chosen.learning_rate;
            rec.weight_decay = chosen.weight_decay;
            rec.depth = chosen.network.hidden_layers;
            rec.width = chosen.network.width;

            const std::size_t repeats = random ? (plan.random_best ? 1 : plan.random_repeats) : plan.sobol_repeats;
            if (repeats == 1) {
                rec.seed = chosen.seed;
                rec.train_error = ensemble.best.training_error;
                rec.gen_error = errors_on(ensemble.best.params, sets.test, 1);
                rec.runs = 1;
            } else {
                const std::uint64_t retrain_seed = plan_stream(plan.seed, family, 11, n);
                const RetrainStatistics stats =
                    retrain_statistics(chosen, sets.train, sets.test, repeats, retrain_seed, plan.threads);
                if (stats.completed == 0) throw std::runtime_error("run_plan: every retraining diverged");
                rec.seed = retrain_seed;
                rec.train_error = stats.mean_training_error;
                rec.gen_error = stats.mean_test_error;
                rec.train_error_sd = stats.sd_training_error;
                rec.gen_error_sd = stats.sd_test_error;
                rec.runs = stats.completed;
                rec.failed += stats.failed;
            }
            rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
            records.push_back(std::move(rec));
        }
    }
    return records;
}

// ---------------------------------------------------------------------------
// Rate fits
// ---------------------------------------------------------------------------

/// Least-squares line log2(E_G) = slope * log2(N) + intercept. A reported
/// convergence rate of 1 corresponds to slope -1.
struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t points = 0;
    std::size_t n_min = 0;
    std::size_t n_max = 0;

    friend bool operator==(const RateFit&, const RateFit&) = default;
};

[[nodiscard]] inline RateFit fit_log_log(std::span<const std::size_t> ns, std::span<const double> errors) {
    if (ns.size() != errors.size()) throw std::invalid_argument("fit_rate: size mismatch");
    if (ns.size() < 3) throw std::invalid_argument("fit_rate: need at least three points");
    std::vector<double> x(ns.size()), y(ns.size());
    for (std::size_t i = 0; i < ns.size(); ++i) {
        if (!(errors[i] > 0.0) || !std::isfinite(errors[i])) {
            throw std::invalid_argument("fit_rate: errors must be positive and finite");
        }
        if (ns[i] == 0) throw std::invalid_argument("fit_rate: N must be positive");
        x[i] = std::log2(static_cast<double>(ns[i]));
        y[i] = std::log2(errors[i]);
    }
    const double k = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= k;
    my /= k;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_rate: all N are equal");
    RateFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        ss_res += r * r;
    }
    fit.r_squared = syy == 0.0 ? 1.0 : 1.0 - ss_res / syy;
    fit.points = ns.size();
    fit.n_min = *std::min_element(ns.begin(), ns.end());
    fit.n_max = *std::max_element(ns.begin(), ns.end());
    return fit;
}

/// Rate of E_G over the given records (one sampler).
[[nodiscard]] inline RateFit fit_rate(std::span<const ExperimentRecord> records) {
    std::vector<std::size_t> ns;
    std::vector<double> errors;
    for (const auto& r : records) {
        ns.push_back(r.n);
        errors.push_back(r.gen_error);
    }
    return fit_log_log(ns, errors);
}

struct GroupRateFit {
    std::string benchmark;
    std::string sampler;
    std::string activation;
    RateFit fit;
};

/// One fit per (benchmark, sampler, activation) group with at least three
/// records, in order of first appearance.
[[nodiscard]] inline std::vector<GroupRateFit> fit_rates(std::span<const ExperimentRecord> records) {
    std::vector<std::tuple<std::string, std::string, std::string>> order;
    std::map<std::tuple<std::string, std::string, std::string>, std::vector<ExperimentRecord>> groups;
    for (const auto& r : records) {
        auto key = std::make_tuple(r.benchmark, r.sampler, r.activation);
        if (!groups.contains(key)) order.push_back(key);
        groups[key].push_back(r);
    }
    std::vector<GroupRateFit> fits;
    for (const auto& key : order) {
        const auto& group = groups[key];
        if (group.size() < 3) continue;
        fits.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), fit_rate(group)});
    }
    return fits;
}

// ---------------------------------------------------------------------------
// Result files
// ---------------------------------------------------------------------------

inline constexpr const char* kRecordsHeader =
    "benchmark,sampler,N,E_T,E_G,lr,wd,depth,width,seed,E_T_sd,E_G_sd,activation,runs,failed";
inline constexpr const char* kTimingsHeader = "benchmark,sampler,N,wall_ms";

namespace detail {

[[nodiscard]] inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

[[nodiscard]] inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

[[nodiscard]] inline double parse_double(const std::string& s) {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::runtime_error("bad number '" + s + "'");
    return v;
}

[[nodiscard]] inline std::uint64_t parse_unsigned(const std::string& s) {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used);
    if (used != s.size()) throw std::runtime_error("bad integer '" + s + "'");
    return v;
}

}  // namespace detail

/// Records CSV: kRecordsHeader then one row per record. Floats carry 17
/// significant digits so they reload exactly. Wall times are kept out of
/// this file so reruns of a plan reproduce it byte for byte.
inline void write_records_csv(std::ostream& out, std::span<const ExperimentRecord> records) {
    out << kRecordsHeader << '\n';
    for (const auto& r : records) {
        out << r.benchmark << ',' << r.sampler << ',' << r.n << ',' << detail::format_double(r.train_error) << ','
            << detail::format_double(r.gen_error) << ',' << detail::format_double(r.learning_rate) << ','
            << detail::format_double(r.weight_decay) << ',' << r.depth << ',' << r.width << ',' << r.seed << ','
            << detail::format_double(r.train_error_sd) << ',' << detail::format_double(r.gen_error_sd) << ','
            << r.activation << ',' << r.runs << ',' << r.failed << '\n';
    }
}

[[nodiscard]] inline std::vector<ExperimentRecord> read_records_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kRecordsHeader) throw std::runtime_error("records CSV: bad header");
    std::vector<ExperimentRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() != 15) throw std::runtime_error("records CSV: expected 15 fields in '" + line + "'");
        ExperimentRecord r;
        r.benchmark = f[0];
        r.sampler = f[1];
        r.n = detail::parse_unsigned(f[2]);
        r.train_error = detail::parse_double(f[3]);
        r.gen_error = detail::parse_double(f[4]);
        r.learning_rate = detail::parse_double(f[5]);
        r.weight_decay = detail::parse_double(f[6]);
        r.depth = detail::parse_unsigned(f[7]);
        r.width = detail::parse_unsigned(f[8]);
        r.seed = detail::parse_unsigned(f[9]);
        r.train_error_sd = detail::parse_double(f[10]);
        r.gen_error_sd = detail::parse_double(f[11]);
        r.activation = f[12];
        r.runs = detail::parse_unsigned(f[13]);
        r.failed = detail::parse_unsigned(f[14]);
        records.push_back(std::move(r));
    }
    return records;
}

inline void write_timings_csv(std::ostream& out, std::span<const ExperimentRecord> records) {
    out << kTimingsHeader << '\n';
    for (const auto& r : records) {
        out << r.benchmark << ',' << r.sampler << ',' << r.n << ',' << detail::format_double(r.wall_ms) << '\n';
    }
}

[[nodiscard]] inline nlohmann::json plan_to_json(const ExperimentPlan& plan) {
    nlohmann::json j;
    j["benchmark"] = plan.benchmark;
    std::vector<std::string> samplers;
    for (auto s : plan.samplers) samplers.emplace_back(to_string(s));
    j["samplers"] = samplers;
    j["n_schedule"] = plan.n_schedule;
    j["grid"] = std::string(to_string(plan.grid));
    if (!plan.depths.empty()) j["depths"] = plan.depths;
    j["single"] = {{"learning_rate", plan.single.learning_rate},
                   {"weight_decay", plan.single.weight_decay},
                   {"depth", plan.single.network.hidden_layers},
                   {"width", plan.single.network.width}};
    j["repeats"] = plan.random_repeats;
    j["sobol_repeats"] = plan.sobol_repeats;
    j["random_best"] = plan.random_best;
    j["test_size"] = plan.test_size;
    j["validation_size"] = plan.validation_size;
    j["paper_faithful"] = plan.paper_faithful;
    j["activation"] = std::string(to_string(plan.activation));
    j["batch_norm"] = plan.batch_norm;
    j["epochs"] = plan.epochs;
    j["loss_exponent"] = plan.loss_exponent;
    j["seed"] = plan.seed;
    j["threads"] = plan.threads;
    return j;
}

/// Reads the plan schema; absent keys keep their defaults. Only
/// "benchmark" is required.
[[nodiscard]] inline ExperimentPlan plan_from_json(const nlohmann::json& j) {
    ExperimentPlan plan;
    plan.benchmark = j.at("benchmark").get<std::string>();
    if (j.contains("samplers")) {
        plan.samplers.clear();
        for (const auto& s : j["samplers"]) plan.samplers.push_back(parse_sampler_family(s.get<std::string>()));
    }
    if (j.contains("n_schedule")) plan.n_schedule = j["n_schedule"].get<std::vector<std::size_t>>();
    if (j.contains("grid")) plan.grid = parse_grid_mode(j["grid"].get<std::string>());
    if (j.contains("depths")) plan.depths = j["depths"].get<std::vector<std::size_t>>();
    if (j.contains("single")) {
        const auto& s = j["single"];
        plan.single.learning_rate = s.value("learning_rate", plan.single.learning_rate);
        plan.single.weight_decay = s.value("weight_decay", plan.single.weight_decay);
        plan.single.network.hidden_layers = s.value("depth", plan.single.network.hidden_layers);
        plan.single.network.width = s.value("width", plan.single.network.width);
    }
    plan.random_repeats = j.value("repeats", plan.random_repeats);
    plan.sobol_repeats = j.value("sobol_repeats", plan.sobol_repeats);
    plan.random_best = j.value("random_best", plan.random_best);
    plan.test_size = j.value("test_size", plan.test_size);
    plan.validation_size = j.value("validation_size", plan.validation_size);
    plan.paper_faithful = j.value("paper_faithful", plan.paper_faithful);
    if (j.contains("activation")) plan.activation = parse_activation(j["activation"].get<std::string>());
    plan.batch_norm = j.value("batch_norm", plan.batch_norm);
    plan.epochs = j.value("epochs", plan.epochs);
    plan.loss_exponent = j.value("loss_exponent", plan.loss_exponent);
    plan.seed = j.value("seed", plan.seed);
    plan.threads = j.value("threads", plan.threads);
    return plan;
}

[[nodiscard]] inline nlohmann::json fits_to_json(std::span<const GroupRateFit> fits) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& g : fits) {
        arr.push_back({{"benchmark", g.benchmark},
                       {"sampler", g.sampler},
                       {"activation", g.activation},
                       {"slope", g.fit.slope},
                       {"intercept", g.fit.intercept},
                       {"r_squared", g.fit.r_squared},
                       {"points", g.fit.points},
                       {"n_min", g.fit.n_min},
                       {"n_max", g.fit.n_max}});
    }
    return arr;
}

[[nodiscard]] inline std::vector<GroupRateFit> fits_from_json(const nlohmann::json& arr) {
    std::vector<GroupRateFit> fits;
    for (const auto& j : arr) {
        GroupRateFit g;
        g.benchmark = j.at("benchmark").get<std::string>();
        g.sampler = j.at("sampler").get<std::string>();
        g.activation = j.at("activation").get<std::string>();
        g.fit.slope = j.at("slope").get<double>();
        g.fit.intercept = j.at("intercept").get<double>();
        g.fit.r_squared = j.at("r_squared").get<double>();
        g.fit.points = j.at("points").get<std::size_t>();
        g.fit.n_min = j.at("n_min").get<std::size_t>();
        g.fit.n_max = j.at("n_max").get<std::size_t>();
        fits.push_back(std::move(g));
    }
    return fits;
}

struct ResultBundle {
    std::vector<ExperimentRecord> records;
    std::vector<GroupRateFit> fits;
};

/// Writes records.csv, timings.csv and summary.json (rate fits) into `dir`,
/// creating it if needed.
inline void emit(std::span<const ExperimentRecord> records, std::span<const GroupRateFit> fits,
                 const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    auto open = [&](const char* name) {
        std::ofstream out(dir / name);
        if (!out) throw std::runtime_error("cannot write '" + (dir / name).string() + "'");
        return out;
    };
    {
        auto out = open("records.csv");
        write_records_csv(out, records);
        if (!out) throw std::runtime_error("write failed: records.csv");
    }
    {
        auto out = open("timings.csv");
        write_timings_csv(out, records);
        if (!out) throw std::runtime_error("write failed: timings.csv");
    }
    {
        auto out = open("summary.json");
        nlohmann::json summary;
        summary["records"] = records.size();
        summary["fits"] = fits_to_json(fits);
        out << summary.dump(2) << '\n';
        if (!out) throw std::runtime_error("write failed: summary.json");
    }
}

[[nodiscard]] inline std::vector<ExperimentRecord> load_records(const std::filesystem::path& csv) {
    std::ifstream in(csv);
    if (!in) throw std::runtime_error("cannot open '" + csv.string() + "'");
    return read_records_csv(in);
}

/// Inverse of emit().
[[nodiscard]] inline ResultBundle load(const std::filesystem::path& dir) {
    ResultBundle bundle;
    bundle.records = load_records(dir / "records.csv");
    std::ifstream timings(dir / "timings.csv");
    if (timings) {
        std::string line;
        std::getline(timings, line);
        if (line != kTimingsHeader) throw std::runtime_error("timings CSV: bad header");
        std::size_t row = 0;
        while (std::getline(timings, line)) {
            if (line.empty()) continue;
            const auto f = detail::split_csv_line(line);
            if (f.size() != 4 || row >= bundle.records.size()) throw std::runtime_error("timings CSV: bad row");
            auto& r = bundle.records[row++];
            if (f[0] != r.benchmark || f[1] != r.sampler || detail::parse_unsigned(f[2]) != r.n) {
                throw std::runtime_error("timings CSV does not match records");
            }
            r.wall_ms = detail::parse_double(f[3]);
        }
    }
    std::ifstream summary(dir / "summary.json");
    if (summary) bundle.fits = fits_from_json(nlohmann::json::parse(summary).at("fits"));
    return bundle;
}

}  // namespace qmcdl
