#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "qmcdl/exp.hpp"

using namespace qmcdl;

namespace {

ExperimentPlan tiny_plan(const std::string& benchmark, std::vector<std::size_t> ns) {
    ExperimentPlan plan;
    plan.benchmark = benchmark;
    plan.samplers = {SamplerFamily::sobol};
    plan.n_schedule = std::move(ns);
    plan.grid = GridMode::single;
    plan.single.learning_rate = 1e-2;
    plan.single.weight_decay = 1e-7;
    plan.single.network.hidden_layers = 1;
    plan.single.network.width = 6;
    plan.epochs = 400;
    plan.test_size = 512;
    plan.validation_size = 64;
    plan.random_repeats = 3;
    plan.threads = 1;
    return plan;
}

std::vector<ExperimentRecord> synthetic(const std::vector<std::size_t>& ns, double (*law)(double)) {
    std::vector<ExperimentRecord> out;
    for (std::size_t n : ns) {
        ExperimentRecord r;
        r.benchmark = "synthetic";
        r.sampler = "sobol";
        r.activation = "sigmoid";
        r.n = n;
        r.gen_error = law(static_cast<double>(n));
        out.push_back(r);
    }
    return out;
}

std::vector<double> coords_of(const PointSet& ps) { return {ps.coords().begin(), ps.coords().end()}; }

std::string records_text(const std::vector<ExperimentRecord>& records) {
    std::ostringstream out;
    write_records_csv(out, records);
    return out.str();
}

std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("qmcdl_test_exp_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

ExperimentRecord sample_record(std::size_t i) {
    ExperimentRecord r;
    r.benchmark = i % 2 ? "owen_f34" : "linear";
    r.sampler = i % 3 ? "sobol" : "uniform_random";
    r.n = 16u << i;
    r.train_error = 1.0 / 3.0 * std::pow(0.7, static_cast<double>(i));
    r.gen_error = std::nextafter(0.1, 1.0) / (i + 1);
    r.learning_rate = 1e-3;
    r.weight_decay = 1e-7;
    r.depth = 4;
    r.width = 12;
    r.seed = 0xfedcba9876543210ULL + i;
    r.train_error_sd = i * 1e-9;
    r.gen_error_sd = std::sqrt(2.0) * i;
    r.activation = i % 2 ? "relu" : "sigmoid";
    r.runs = 1 + i;
    r.failed = i / 2;
    r.wall_ms = 12.345678901234567 * i;
    return r;
}

}  // namespace

TEST(Plan, ValidateRejectsBadPlans) {
    auto plan = tiny_plan("linear", {16, 32});
    EXPECT_NO_THROW(plan.validate());
    plan.n_schedule = {32, 16};
    EXPECT_THROW(plan.validate(), std::invalid_argument);
    plan.n_schedule = {16, 16};
    EXPECT_THROW(plan.validate(), std::invalid_argument);
    plan.n_schedule = {16, 1024};
    plan.test_size = 1024;
    EXPECT_THROW(plan.validate(), std::invalid_argument);
    plan = tiny_plan("no_such_map", {16});
    EXPECT_THROW(plan.validate(), std::invalid_argument);
}

TEST(Plan, GridModes) {
    auto plan = tiny_plan("linear", {16});
    EXPECT_EQ(plan.hyper_grid().size(), 1u);
    plan.grid = GridMode::fast;
    EXPECT_EQ(plan.hyper_grid().size(), 12u);
    plan.grid = GridMode::table1;
    EXPECT_EQ(plan.hyper_grid().size(), 108u);
    plan.depths = {1};
    EXPECT_EQ(plan.hyper_grid().size(), 36u);
    EXPECT_EQ(parse_grid_mode("full"), GridMode::table1);
    EXPECT_EQ(parse_grid_mode(to_string(GridMode::fast)), GridMode::fast);
    EXPECT_THROW((void)parse_grid_mode("huge"), std::invalid_argument);
}

TEST(Plan, DeterministicTestSetFollowsLargestTrainingPrefix) {
    auto plan = tiny_plan("product2", {16, 40});
    const auto sets = make_plan_sets(plan, SamplerFamily::sobol, 40);
    const auto expected = generate(SamplerKind::sobol(64), 2, plan.test_size);
    EXPECT_EQ(coords_of(sets.test.inputs), coords_of(expected));
    const auto validation = generate(SamplerKind::sobol(64 + plan.test_size), 2, plan.validation_size);
    EXPECT_EQ(coords_of(sets.validation.inputs), coords_of(validation));
    EXPECT_EQ(coords_of(sets.train.inputs), coords_of(generate(SamplerKind::sobol(1), 2, 40)));
}

TEST(RunPlan, OneSamplerOneSizeFixedConfigGivesOneRecord) {
    const auto plan = tiny_plan("linear", {16});
    const auto records = run_plan(plan);
    ASSERT_EQ(records.size(), 1u);
    const auto& r = records[0];
    EXPECT_EQ(r.benchmark, "linear");
    EXPECT_EQ(r.sampler, "sobol");
    EXPECT_EQ(r.n, 16u);
    EXPECT_EQ(r.depth, 1u);
    EXPECT_EQ(r.width, 6u);
    EXPECT_EQ(r.runs, 1u);
    EXPECT_EQ(r.failed, 0u);
    EXPECT_TRUE(std::isfinite(r.train_error) && r.train_error >= 0);
    EXPECT_TRUE(std::isfinite(r.gen_error) && r.gen_error >= 0);
}

TEST(RunPlan, MasterSeedChangesRandomRecordsButNotSobolTrainingSets) {
    auto a = tiny_plan("product2", {16, 32});
    a.samplers = {SamplerFamily::sobol, SamplerFamily::uniform_random};
    auto b = a;
    b.seed = a.seed + 1;
    for (std::size_t n : a.n_schedule) {
        const auto sa = make_plan_sets(a, SamplerFamily::sobol, n);
        const auto sb = make_plan_sets(b, SamplerFamily::sobol, n);
        EXPECT_EQ(coords_of(sa.train.inputs), coords_of(sb.train.inputs));
        EXPECT_EQ(sa.train.targets, sb.train.targets);
        EXPECT_EQ(coords_of(sa.test.inputs), coords_of(sb.test.inputs));
        const auto ra = make_plan_sets(a, SamplerFamily::uniform_random, n);
        const auto rb = make_plan_sets(b, SamplerFamily::uniform_random, n);
        EXPECT_NE(coords_of(ra.train.inputs), coords_of(rb.train.inputs));
    }
    const auto ra = run_plan(a);
    const auto rb = run_plan(b);
    ASSERT_EQ(ra.size(), 4u);
    ASSERT_EQ(rb.size(), 4u);
    for (std::size_t i = 2; i < 4; ++i) {
        EXPECT_EQ(ra[i].sampler, "random");
        EXPECT_NE(ra[i].gen_error, rb[i].gen_error);
        EXPECT_EQ(ra[i].runs, 3u);
    }
}

TEST(RunPlan, SmokePlanErrorDecreasesWithN) {
    auto plan = tiny_plan("linear", {16, 32, 64});
    plan.samplers = {SamplerFamily::uniform_random};
    plan.activation = Activation::relu;
    plan.single.network.width = 24;
    plan.random_repeats = 20;
    plan.epochs = 3000;
    const auto records = run_plan(plan);
    ASSERT_EQ(records.size(), 3u);
    EXPECT_LT(records[1].gen_error, records[0].gen_error);
    EXPECT_LT(records[2].gen_error, records[1].gen_error);
}

TEST(RunPlan, RerunIsBitwiseIdentical) {
    auto plan = tiny_plan("owen_f34", {16, 32});
    plan.samplers = {SamplerFamily::sobol, SamplerFamily::uniform_random};
    plan.grid = GridMode::fast;
    plan.depths = {1};
    plan.epochs = 100;
    plan.threads = 3;
    const auto first = run_plan(plan);
    plan.threads = 1;
    const auto second = run_plan(plan);
    EXPECT_EQ(records_text(first), records_text(second));
}

TEST(RunPlan, TrainingErrorMatchesTrainOne) {
    const auto plan = tiny_plan("product2", {32});
    const auto records = run_plan(plan);
    ASSERT_EQ(records.size(), 1u);
    const auto& r = records[0];
    TrainConfig cfg = plan.single;
    cfg.epochs = plan.epochs;
    cfg.loss_exponent = plan.loss_exponent;
    cfg.network.input_dim = 2;
    cfg.network.activation = plan.activation;
    cfg.seed = r.seed;
    const auto sets = make_plan_sets(plan, SamplerFamily::sobol, 32);
    const auto model = train_one(sets.train, cfg);
    EXPECT_EQ(r.train_error, model.training_error);
    EXPECT_EQ(r.gen_error, errors_on(model.params, sets.test, 1));
}

TEST(RunPlan, SymmetrizedReportingFlags) {
    auto plan = tiny_plan("linear", {16});
    plan.samplers = {SamplerFamily::sobol, SamplerFamily::uniform_random};
    plan.sobol_repeats = 2;
    plan.random_best = true;
    const auto records = run_plan(plan);
    ASSERT_EQ(records.size(), 2u);
    EXPECT_EQ(records[0].runs, 2u);
    EXPECT_EQ(records[1].runs, 1u);
}

TEST(FitRate, ExactInverseLaw) {
    const std::vector<std::size_t> ns{16, 32, 64, 128, 256};
    const auto fit = fit_rate(synthetic(ns, [](double n) { return 3.0 / n; }));
    EXPECT_NEAR(fit.slope, -1.0, 1e-12);
    EXPECT_NEAR(fit.intercept, std::log2(3.0), 1e-12);
    EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
    EXPECT_EQ(fit.points, 5u);
    EXPECT_EQ(fit.n_min, 16u);
    EXPECT_EQ(fit.n_max, 256u);
}

TEST(FitRate, ExactSquareRootLaw) {
    const std::vector<std::size_t> ns{16, 64, 256, 1024};
    const auto fit = fit_rate(synthetic(ns, [](double n) { return 0.2 / std::sqrt(n); }));
    EXPECT_NEAR(fit.slope, -0.5, 1e-12);
    EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
}

TEST(FitRate, LogarithmicCorrectionFlattensTheSlope) {
    std::vector<std::size_t> ns;
    for (std::size_t n = 16; n <= 4096; n *= 2) ns.push_back(n);
    const auto fit = fit_rate(synthetic(ns, [](double n) { return std::pow(std::log2(n), 3.0) / n; }));
    // Independent evaluation: least squares of log2(k^3 / 2^k) = 3 log2 k - k on k = 4..12.
    double mk = 0, my = 0;
    for (int k = 4; k <= 12; ++k) {
        mk += k;
        my += 3 * std::log2(k) - k;
    }
    mk /= 9;
    my /= 9;
    double sxy = 0, sxx = 0;
    for (int k = 4; k <= 12; ++k) {
        sxy += (k - mk) * (3 * std::log2(k) - k - my);
        sxx += (k - mk) * (k - mk);
    }
    EXPECT_NEAR(fit.slope, sxy / sxx, 1e-12);
    EXPECT_GT(fit.slope, -1.0);
    EXPECT_LT(fit.slope, -0.5);
}

TEST(FitRate, RejectsBadInput) {
    EXPECT_THROW((void)fit_rate(synthetic({16, 32}, [](double n) { return 1 / n; })), std::invalid_argument);
    EXPECT_THROW((void)fit_rate(synthetic({16, 32, 64}, [](double) { return 0.0; })), std::invalid_argument);
    EXPECT_THROW((void)fit_rate(synthetic({16, 32, 64}, [](double) { return -1.0; })), std::invalid_argument);
}

TEST(FitRates, GroupsBySamplerAndActivation) {
    auto records = synthetic({16, 32, 64}, [](double n) { return 1 / n; });
    auto other = synthetic({16, 32, 64}, [](double n) { return 1 / std::sqrt(n); });
    for (auto& r : other) r.sampler = "uniform_random";
    records.insert(records.end(), other.begin(), other.end());
    records.push_back(synthetic({16}, [](double n) { return n; })[0]);
    records.back().activation = "relu";
    const auto fits = fit_rates(records);
    ASSERT_EQ(fits.size(), 2u);
    EXPECT_EQ(fits[0].sampler, "sobol");
    EXPECT_NEAR(fits[0].fit.slope, -1.0, 1e-12);
    EXPECT_EQ(fits[1].sampler, "uniform_random");
    EXPECT_NEAR(fits[1].fit.slope, -0.5, 1e-12);
}

TEST(Emit, EmptyRecordListIsHeaderOnly) {
    const auto dir = scratch_dir("empty");
    emit({}, {}, dir);
    std::ifstream in(dir / "records.csv");
    std::stringstream text;
    text << in.rdbuf();
    EXPECT_EQ(text.str(), std::string(kRecordsHeader) + "\n");
    const auto bundle = load(dir);
    EXPECT_TRUE(bundle.records.empty());
    EXPECT_TRUE(bundle.fits.empty());
}

TEST(Emit, HeaderStartsWithTheDocumentedColumns) {
    EXPECT_EQ(std::string(kRecordsHeader).rfind("benchmark,sampler,N,E_T,E_G,lr,wd,depth,width,seed", 0), 0u);
}

TEST(Emit, LoadInvertsEmit) {
    std::vector<ExperimentRecord> records;
    for (std::size_t i = 0; i < 6; ++i) records.push_back(sample_record(i));
    const auto fits = fit_rates(records);
    const auto dir = scratch_dir("roundtrip");
    emit(records, fits, dir);
    const auto bundle = load(dir);
    EXPECT_EQ(bundle.records, records);
    ASSERT_EQ(bundle.fits.size(), fits.size());
}

TEST(Emit, SummarySlopesKeepFullPrecision) {
    std::vector<ExperimentRecord> records;
    for (std::size_t n = 16; n <= 1024; n *= 2) {
        ExperimentRecord r = sample_record(0);
        r.n = n;
        r.gen_error = std::pow(std::log2(double(n)), 2.0) / std::sqrt(double(n)) * (1 + 1e-3 * (n % 7));
        records.push_back(r);
    }
    const auto dir = scratch_dir("summary");
    emit(records, fit_rates(records), dir);
    const auto bundle = load(dir);
    ASSERT_EQ(bundle.fits.size(), 1u);
    const RateFit recomputed = fit_rate(bundle.records);
    EXPECT_EQ(bundle.fits[0].fit.slope, recomputed.slope);
    EXPECT_EQ(bundle.fits[0].fit.intercept, recomputed.intercept);
    EXPECT_EQ(bundle.fits[0].fit.r_squared, recomputed.r_squared);
    EXPECT_EQ(bundle.fits[0].fit.points, recomputed.points);
    EXPECT_EQ(bundle.fits[0].fit.n_min, 16u);
    EXPECT_EQ(bundle.fits[0].fit.n_max, 1024u);
}

TEST(Emit, RecordsWithoutTimingsLoad) {
    std::vector<ExperimentRecord> records{sample_record(1), sample_record(2)};
    const auto dir = scratch_dir("no_timings");
    emit(records, {}, dir);
    std::filesystem::remove(dir / "timings.csv");
    const auto loaded = load(dir).records;
    ASSERT_EQ(loaded.size(), 2u);
    EXPECT_EQ(loaded[0].wall_ms, 0.0);
    EXPECT_EQ(loaded[1].gen_error, records[1].gen_error);
}

TEST(Emit, UnwritablePathThrows) {
    const auto dir = scratch_dir("blocker");
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "file") << "x";
    EXPECT_THROW(emit({}, {}, dir / "file" / "sub"), std::runtime_error);
}

TEST(Emit, CorruptCsvIsRejected) {
    const auto dir = scratch_dir("corrupt");
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "records.csv") << "not,a,header\n";
    EXPECT_THROW((void)load(dir), std::runtime_error);
    std::ofstream(dir / "records.csv") << kRecordsHeader << "\nlinear,sobol,abc\n";
    EXPECT_ANY_THROW((void)load(dir));
}

TEST(PlanJson, RoundTrip) {
    auto plan = tiny_plan("owen_f34", {16, 64, 256});
    plan.samplers = {SamplerFamily::uniform_random, SamplerFamily::halton};
    plan.grid = GridMode::fast;
    plan.depths = {1, 2};
    plan.random_best = true;
    plan.sobol_repeats = 4;
    plan.paper_faithful = true;
    plan.activation = Activation::relu;
    plan.batch_norm = true;
    plan.loss_exponent = 1;
    plan.seed = 0xdeadbeefcafeULL;
    const auto back = plan_from_json(plan_to_json(plan));
    EXPECT_EQ(plan_to_json(back), plan_to_json(plan));
    EXPECT_EQ(back.samplers, plan.samplers);
    EXPECT_EQ(back.n_schedule, plan.n_schedule);
    EXPECT_EQ(back.seed, plan.seed);
    EXPECT_EQ(back.single, plan.single);
    EXPECT_EQ(back.activation, Activation::relu);
}

TEST(PlanJson, MinimalPlanTakesDefaults) {
    const auto plan = plan_from_json(nlohmann::json::parse(R"({"benchmark": "linear"})"));
    EXPECT_EQ(plan.benchmark, "linear");
    EXPECT_EQ(plan.random_repeats, 100u);
    EXPECT_EQ(plan.test_size, 8192u);
    EXPECT_EQ(plan.grid, GridMode::fast);
    EXPECT_THROW((void)plan_from_json(nlohmann::json::parse(R"({"samplers": ["sobol"]})")), std::exception);
}
