#include "qgil/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "qgil/sha1.hpp"

namespace qgil {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json train_config_to_json(const nn::TrainConfig& c) {
    return {{"learning_rate", c.learning_rate},
            {"batch_size", c.batch_size},
            {"max_epochs", c.max_epochs},
            {"patience", c.patience},
            {"seed", c.seed}};
}

nn::TrainConfig train_config_from_json(const json& j) {
    nn::TrainConfig c;
    c.learning_rate = j.at("learning_rate").get<double>();
    c.batch_size = j.at("batch_size").get<int>();
    c.max_epochs = j.at("max_epochs").get<int>();
    c.patience = j.at("patience").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

json config_to_json(const ExperimentConfig& c) {
    json j;
    j["env"] = c.env_name;
    j["strategy"] = strategy_name(c.strategy.kind);
    j["tau"] = c.strategy.tau;
    j["epsilon"] = c.strategy.epsilon;
    j["p_query"] = c.strategy.p_query;
    j["hybrid_coin"] = c.strategy.hybrid_coin;
    j["iterations"] = c.iterations;
    j["episodes"] = c.episodes_per_iteration;
    j["horizon"] = c.horizon;
    j["eval_trials"] = c.eval_trials;
    j["bootstrap_episodes"] = c.bootstrap_episodes;
    j["budget"] = std::isinf(c.query_budget) ? json(nullptr) : json(c.query_budget);
    j["seed"] = c.seed;
    j["policy_train"] = train_config_to_json(c.policy_train);
    j["lossnet_train"] = train_config_to_json(c.lossnet_train);
    j["log_decisions"] = c.log_decisions;
    j["supervised_reference_loss"] = c.supervised_reference_loss.has_value()
                                         ? json(*c.supervised_reference_loss)
                                         : json(nullptr);
    return j;
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    c.env_name = j.at("env").get<std::string>();
    const auto kind = strategy_from_name(j.at("strategy").get<std::string>());
    if (!kind) throw UsageError("manifest: unknown strategy");
    c.strategy.kind = *kind;
    c.strategy.tau = j.at("tau").get<double>();
    c.strategy.epsilon = j.at("epsilon").get<double>();
    c.strategy.p_query = j.at("p_query").get<double>();
    c.strategy.hybrid_coin = j.at("hybrid_coin").get<double>();
    c.iterations = j.at("iterations").get<int>();
    c.episodes_per_iteration = j.at("episodes").get<int>();
    c.horizon = j.at("horizon").get<int>();
    c.eval_trials = j.at("eval_trials").get<int>();
    c.bootstrap_episodes = j.at("bootstrap_episodes").get<int>();
    c.query_budget = j.at("budget").is_null() ? std::numeric_limits<double>::infinity()
                                              : j.at("budget").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.policy_train = train_config_from_json(j.at("policy_train"));
    c.lossnet_train = train_config_from_json(j.at("lossnet_train"));
    c.log_decisions = j.at("log_decisions").get<bool>();
    if (!j.at("supervised_reference_loss").is_null()) {
        c.supervised_reference_loss = j.at("supervised_reference_loss").get<double>();
    }
    return c;
}

double percentile(std::vector<double> v, double q) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
    return v[std::min(n - 1, rank == 0 ? 0 : rank - 1)];
}

std::string write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ContractError("cannot write " + path.string());
    out << content;
    return git_blob_sha1(content);
}

// Fills unset tau/epsilon for loss-network strategies from the calibration
// procedure; Table-style fixed values do not transfer across environments.
void autocalibrate(ExperimentConfig& c, const ParsedCli& parsed, std::ostream& err) {
    if (!strategy_needs_lossnet(c.strategy.kind)) return;
    const bool need_tau = !parsed.tau_explicit;
    const bool need_eps = !parsed.epsilon_explicit && strategy_uses_gradient(c.strategy.kind);
    if (!need_tau && !need_eps) return;
    const LossVariant variant = strategy_lossnet_variant(c.strategy.kind);
    const CalibrationReport r =
        calibrate_thresholds(c.env_name, c.seed, variant, c.policy_train, c.lossnet_train,
                             c.bootstrap_episodes);
    if (need_tau) c.strategy.tau = std::max(r.tau, 1e-9);
    if (need_eps) c.strategy.epsilon = std::max(r.epsilon, 1e-9);
    err << "calibrated " << strategy_name(c.strategy.kind) << " on " << c.env_name << ": tau "
        << fmt_double(c.strategy.tau) << ", epsilon " << fmt_double(c.strategy.epsilon) << "\n";
}

}  // namespace

std::string usage_text() {
    std::ostringstream os;
    os << "qgil - query-gated imitation learning benchmark\n"
       << "\n"
       << "usage:\n"
       << "  qgil --env <reach2d|cliffcorridor> --strategy <name> [options]   single run\n"
       << "  qgil --env <env> --strategy all [options]                        full suite\n"
       << "  qgil --env <env> --calibrate [--variant regression|classifier]   suggest tau/epsilon\n"
       << "  qgil --replot <metrics.csv>                                      re-render a run CSV\n"
       << "  qgil --manifest <manifest.json> [--out dir]                      reproduce a run\n"
       << "\n"
       << "strategies: supervised dagger loss safedagger loss-gradient\n"
       << "            safedagger-gradient random loss-gradient-random\n"
       << "            safedagger-gradient-random\n"
       << "\n"
       << "options:\n"
       << "  --tau X --epsilon X --p-query X --hybrid-coin X\n"
       << "  --iterations M --episodes N --horizon T --eval-trials K\n"
       << "  --bootstrap-episodes B --seed S --budget C --out DIR --jobs J\n"
       << "  --policy-lr X --policy-batch B --policy-epochs E --policy-patience P\n"
       << "  --lossnet-lr X --lossnet-batch B --lossnet-epochs E --lossnet-patience P\n"
       << "  --dump-dataset --log-decisions --config FILE (key = value lines)\n"
       << "\n"
       << "unset tau/epsilon for a loss-network strategy are calibrated automatically\n"
       << "(70th percentiles of on-policy signals); p-query defaults to 0.3.\n"
       << "exit codes: 0 ok, 1 usage error, 2 run failure\n";
    return os.str();
}

ParsedCli parse_args(const std::vector<std::string>& argv) {
    if (argv.empty()) throw UsageError("no arguments");

    ParsedCli parsed;
    CLI::App app{"query-gated imitation learning benchmark", "qgil"};
    app.allow_config_extras(false);

    std::string strategy_name_arg;
    std::string variant_arg = "regression";
    std::string manifest_path;
    double budget = 0.0;
    bool calibrate = false;
    bool log_decisions = false;

    app.add_option("--env", parsed.config.env_name)
        ->check(CLI::IsMember(env_names()))
        ->capture_default_str();
    app.add_option("--strategy", strategy_name_arg, "strategy name or 'all'");
    auto* tau_opt = app.add_option("--tau", parsed.config.strategy.tau)
                        ->check(CLI::PositiveNumber);
    auto* eps_opt = app.add_option("--epsilon", parsed.config.strategy.epsilon)
                        ->check(CLI::PositiveNumber);
    auto* pq_opt = app.add_option("--p-query", parsed.config.strategy.p_query)
                       ->check(CLI::Range(0.0, 1.0));
    auto* coin_opt = app.add_option("--hybrid-coin", parsed.config.strategy.hybrid_coin)
                         ->check(CLI::Range(0.0, 1.0));
    app.add_option("--iterations", parsed.config.iterations)->check(CLI::PositiveNumber);
    app.add_option("--episodes", parsed.config.episodes_per_iteration)
        ->check(CLI::PositiveNumber);
    app.add_option("--horizon", parsed.config.horizon)->check(CLI::NonNegativeNumber);
    app.add_option("--eval-trials", parsed.config.eval_trials)->check(CLI::Range(2, 1 << 20));
    app.add_option("--bootstrap-episodes", parsed.config.bootstrap_episodes)
        ->check(CLI::PositiveNumber);
    app.add_option("--seed", parsed.config.seed);
    auto* budget_opt = app.add_option("--budget", budget)->check(CLI::PositiveNumber);
    app.add_option("--out", parsed.out_dir)->capture_default_str();
    app.add_option("--jobs", parsed.jobs)->check(CLI::PositiveNumber);
    app.add_flag("--dump-dataset", parsed.dump_dataset);
    app.add_flag("--log-decisions", log_decisions);
    app.add_flag("--calibrate", calibrate);
    app.add_option("--variant", variant_arg)
        ->check(CLI::IsMember({"regression", "classifier"}));
    app.add_option("--replot", parsed.replot_path);
    app.add_option("--manifest", manifest_path);

    app.add_option("--policy-lr", parsed.config.policy_train.learning_rate)
        ->check(CLI::PositiveNumber);
    app.add_option("--policy-batch", parsed.config.policy_train.batch_size)
        ->check(CLI::PositiveNumber);
    app.add_option("--policy-epochs", parsed.config.policy_train.max_epochs)
        ->check(CLI::PositiveNumber);
    app.add_option("--policy-patience", parsed.config.policy_train.patience)
        ->check(CLI::NonNegativeNumber);
    app.add_option("--lossnet-lr", parsed.config.lossnet_train.learning_rate)
        ->check(CLI::PositiveNumber);
    app.add_option("--lossnet-batch", parsed.config.lossnet_train.batch_size)
        ->check(CLI::PositiveNumber);
    app.add_option("--lossnet-epochs", parsed.config.lossnet_train.max_epochs)
        ->check(CLI::PositiveNumber);
    app.add_option("--lossnet-patience", parsed.config.lossnet_train.patience)
        ->check(CLI::NonNegativeNumber);

    app.set_config("--config");

    std::vector<std::string> args(argv.rbegin(), argv.rend());  // CLI11 wants reversed
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    parsed.config.log_decisions = log_decisions;
    parsed.tau_explicit = tau_opt->count() > 0;
    parsed.epsilon_explicit = eps_opt->count() > 0;
    if (budget_opt->count() > 0) parsed.config.query_budget = budget;
    parsed.calibrate_variant =
        variant_arg == "classifier" ? LossVariant::Classifier : LossVariant::Regression;

    if (!parsed.replot_path.empty()) {
        parsed.mode = CliMode::Replot;
        return parsed;
    }
    if (calibrate) {
        parsed.mode = CliMode::Calibrate;
        return parsed;
    }
    if (!manifest_path.empty()) {
        parsed.config = config_from_manifest(manifest_path);
        parsed.mode = CliMode::Run;
        parsed.tau_explicit = parsed.epsilon_explicit = true;  // manifest pins everything
        return parsed;
    }

    if (strategy_name_arg.empty()) {
        throw UsageError("--strategy is required (or use --calibrate / --replot / --manifest)");
    }
    if (strategy_name_arg == "all") {
        parsed.mode = CliMode::Suite;
        for (StrategyKind k : all_strategies()) parsed.suite_strategies.push_back(strategy_name(k));
    } else {
        const auto kind = strategy_from_name(strategy_name_arg);
        if (!kind) throw UsageError("--strategy: unknown strategy '" + strategy_name_arg + "'");
        parsed.config.strategy.kind = *kind;
        parsed.mode = CliMode::Run;
    }

    // Flags that the chosen strategy ignores are accepted with a warning.
    if (parsed.mode == CliMode::Run) {
        const StrategyKind k = parsed.config.strategy.kind;
        if (tau_opt->count() > 0 && !strategy_needs_lossnet(k)) {
            parsed.warnings.push_back(std::string("--tau is unused for strategy ") +
                                      strategy_name(k));
        }
        if (eps_opt->count() > 0 && !strategy_uses_gradient(k)) {
            parsed.warnings.push_back(std::string("--epsilon is unused for strategy ") +
                                      strategy_name(k));
        }
        if (pq_opt->count() > 0 && k != StrategyKind::Random && !strategy_is_hybrid(k)) {
            parsed.warnings.push_back(std::string("--p-query is unused for strategy ") +
                                      strategy_name(k));
        }
        if (coin_opt->count() > 0 && !strategy_is_hybrid(k)) {
            parsed.warnings.push_back(std::string("--hybrid-coin is unused for strategy ") +
                                      strategy_name(k));
        }
    }
    return parsed;
}

std::vector<std::string> render_args(const ExperimentConfig& c, const std::string& out_dir) {
    std::vector<std::string> v = {
        "--env", c.env_name,
        "--strategy", strategy_name(c.strategy.kind),
        "--tau", fmt_double(c.strategy.tau),
        "--epsilon", fmt_double(c.strategy.epsilon),
        "--p-query", fmt_double(c.strategy.p_query),
        "--hybrid-coin", fmt_double(c.strategy.hybrid_coin),
        "--iterations", std::to_string(c.iterations),
        "--episodes", std::to_string(c.episodes_per_iteration),
        "--horizon", std::to_string(c.horizon),
        "--eval-trials", std::to_string(c.eval_trials),
        "--bootstrap-episodes", std::to_string(c.bootstrap_episodes),
        "--seed", std::to_string(c.seed),
        "--policy-lr", fmt_double(c.policy_train.learning_rate),
        "--policy-batch", std::to_string(c.policy_train.batch_size),
        "--policy-epochs", std::to_string(c.policy_train.max_epochs),
        "--policy-patience", std::to_string(c.policy_train.patience),
        "--lossnet-lr", fmt_double(c.lossnet_train.learning_rate),
        "--lossnet-batch", std::to_string(c.lossnet_train.batch_size),
        "--lossnet-epochs", std::to_string(c.lossnet_train.max_epochs),
        "--lossnet-patience", std::to_string(c.lossnet_train.patience),
        "--out", out_dir,
    };
    if (!std::isinf(c.query_budget)) {
        v.push_back("--budget");
        v.push_back(fmt_double(c.query_budget));
    }
    if (c.log_decisions) v.push_back("--log-decisions");
    return v;
}

CalibrationReport calibrate_thresholds(const std::string& env_name, std::uint64_t seed,
                                       LossVariant variant, const nn::TrainConfig& policy_cfg,
                                       const nn::TrainConfig& lossnet_cfg, int bootstrap_episodes,
                                       int probe_episodes) {
    auto env = make_env(env_name);
    const EnvSpec& spec = env->spec();

    RngStream boot_rng(mix_seed(seed, 0xCA1));
    Dataset dataset = bootstrap(*env, bootstrap_episodes, boot_rng, mix_seed(seed, 0xCA2));
    const Policy policy_arch = Policy::make(spec.obs_dim, spec.action_dim);

    auto probe = [&](const Policy& policy, const LossNet& lossnet, std::vector<double>& lhats,
                     std::vector<double>& grads) {
        for (int episode = 0; episode < probe_episodes; ++episode) {
            RngStream env_rng(mix_seed(seed, 0xCA3, static_cast<std::uint64_t>(episode)));
            Vec obs = env->reset(env_rng);
            while (!env->done()) {
                const Vec proposed = propose_action(policy, obs);
                lhats.push_back(loss_estimate(lossnet, obs, proposed));
                grads.push_back(risk_gradient_norm(lossnet, obs, proposed));
                obs = env->step(proposed).observation;
            }
        }
    };

    // The difference-norm scale comes from a regression pass: its l-hat
    // estimates |expert - proposed|, which is exactly the scale tau lives on.
    const LossNet reg_arch =
        LossNet::make(spec.obs_dim, spec.action_dim, LossVariant::Regression, 1.0);
    const RetrainResult reg_heads =
        retrain(dataset, policy_arch, &reg_arch, policy_cfg, lossnet_cfg, seed, 0);
    std::vector<double> reg_lhats, reg_grads;
    probe(reg_heads.policy, *reg_heads.lossnet, reg_lhats, reg_grads);
    CalibrationReport report = summarize_calibration(reg_lhats, reg_grads);

    if (variant == LossVariant::Classifier) {
        // Train the classifier with the calibrated label threshold, then read
        // epsilon off the probability-gradient distribution. tau keeps the
        // difference-norm value (it labels the classifier's targets).
        const double label_tau = std::max(report.tau, 1e-9);
        const LossNet cls_arch =
            LossNet::make(spec.obs_dim, spec.action_dim, LossVariant::Classifier, label_tau);
        const RetrainResult cls_heads =
            retrain(dataset, policy_arch, &cls_arch, policy_cfg, lossnet_cfg, seed, 0);
        std::vector<double> cls_lhats, cls_grads;
        probe(cls_heads.policy, *cls_heads.lossnet, cls_lhats, cls_grads);
        const CalibrationReport cls = summarize_calibration(cls_lhats, cls_grads);
        report.epsilon = cls.epsilon;
        report.grad_p50 = cls.grad_p50;
        report.grad_p70 = cls.grad_p70;
        report.grad_p90 = cls.grad_p90;
        report.degenerate_grad = cls.degenerate_grad;
        report.tau = label_tau;
    }
    return report;
}

CalibrationReport summarize_calibration(const std::vector<double>& lhats,
                                        const std::vector<double>& grads) {
    CalibrationReport r;
    r.samples = static_cast<int>(lhats.size());
    r.lhat_p50 = percentile(lhats, 0.5);
    r.lhat_p70 = percentile(lhats, 0.7);
    r.lhat_p90 = percentile(lhats, 0.9);
    r.grad_p50 = percentile(grads, 0.5);
    r.grad_p70 = percentile(grads, 0.7);
    r.grad_p90 = percentile(grads, 0.9);
    r.tau = r.lhat_p70;
    r.epsilon = r.grad_p70;
    r.degenerate_lhat = !lhats.empty() && r.lhat_p90 == r.lhat_p50;
    r.degenerate_grad = !grads.empty() && r.grad_p90 == r.grad_p50;
    return r;
}

RunArtifacts execute_run(const ExperimentConfig& config, const std::string& out_dir,
                         bool dump_dataset) {
    RunArtifacts artifacts;
    const std::string started = utc_now();
    artifacts.result = run_experiment(config);

    const fs::path run_dir = fs::path(out_dir) / strategy_name(config.strategy.kind);
    fs::create_directories(run_dir);
    artifacts.run_dir = run_dir.string();

    std::vector<std::pair<std::string, std::string>> outputs;  // name -> blob hash
    const std::string csv = run_csv_string(artifacts.result);
    outputs.emplace_back("metrics.csv", write_text_file(run_dir / "metrics.csv", csv));
    if (dump_dataset) {
        std::ostringstream ds;
        save_dataset(artifacts.result.dataset, ds);
        outputs.emplace_back("dataset.csv", write_text_file(run_dir / "dataset.csv", ds.str()));
    }

    std::sort(outputs.begin(), outputs.end());
    std::string combined;
    for (const auto& [name, hash] : outputs) combined += name + ":" + hash + "\n";
    artifacts.csv_hash = sha1_hex(combined);

    json manifest;
    manifest["config"] = config_to_json(config);
    manifest["started_utc"] = started;
    manifest["finished_utc"] = utc_now();
    manifest["outputs"] = json::array();
    for (const auto& [name, hash] : outputs) {
        manifest["outputs"].push_back({{"name", name}, {"sha1", hash}});
    }
    manifest["csv_hash"] = artifacts.csv_hash;
    manifest["best_iteration"] = artifacts.result.best_iteration;
    manifest["expert_mean_reward"] = artifacts.result.expert_mean_reward;
    write_text_file(run_dir / "manifest.json", manifest.dump(2) + "\n");
    return artifacts;
}

SuiteSummary run_suite(const std::vector<ExperimentConfig>& configs, const std::string& out_dir,
                       bool dump_dataset, int jobs) {
    if (configs.empty()) throw ConfigError("run_suite: need at least one config");
    SuiteSummary summary;
    summary.rows.resize(configs.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= configs.size()) return;
            SuiteRow& row = summary.rows[i];
            row.algorithm = strategy_name(configs[i].strategy.kind);
            try {
                const RunArtifacts a = execute_run(configs[i], out_dir, dump_dataset);
                const IterationMetrics& fin = a.result.final_metrics();
                row.queries = fin.cumulative_queries;
                row.loss = fin.mean_loss_vs_expert;
                row.loss_std = fin.loss_std;
                row.ok = true;
            } catch (const std::exception& e) {
                row.ok = false;
                row.error = e.what();
            }
        }
    };
    const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(configs.size())));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    // Efficiency against this suite's supervised row, when present and clean.
    double supervised_loss = std::numeric_limits<double>::quiet_NaN();
    for (const SuiteRow& row : summary.rows) {
        if (row.ok && row.algorithm == "supervised") supervised_loss = row.loss;
    }
    for (SuiteRow& row : summary.rows) {
        if (row.ok && std::isfinite(supervised_loss) && row.queries >= 1) {
            row.efficiency = query_efficiency(row.loss, supervised_loss, row.queries);
        }
    }

    fs::create_directories(out_dir);
    std::ostringstream os;
    os << "algorithm,queries,loss,loss_std,efficiency,status\n";
    for (const SuiteRow& row : summary.rows) {
        if (row.ok) {
            os << row.algorithm << "," << row.queries << "," << fmt_double(row.loss) << ","
               << fmt_double(row.loss_std) << ","
               << (std::isfinite(row.efficiency) ? fmt_double(row.efficiency) : "na") << ",ok\n";
        } else {
            os << row.algorithm << ",,,,na,failed\n";
        }
    }
    const fs::path summary_path = fs::path(out_dir) / "summary.csv";
    write_text_file(summary_path, os.str());
    summary.summary_path = summary_path.string();
    return summary;
}

std::vector<IterationMetrics> replot(const std::string& csv_path, std::ostream& out) {
    std::ifstream in(csv_path);
    if (!in) throw UsageError("--replot: cannot open " + csv_path);
    std::string line;
    std::vector<IterationMetrics> rows;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line != "iteration,loss,err,total_obs") {
                throw UsageError("--replot: unexpected header '" + line + "'");
            }
            header_seen = true;
            continue;
        }
        IterationMetrics m;
        char* end = nullptr;
        const char* p = line.c_str();
        m.iteration = static_cast<int>(std::strtol(p, &end, 10));
        if (end == p || *end != ',') throw UsageError("--replot: bad row '" + line + "'");
        p = end + 1;
        m.mean_loss_vs_expert = std::strtod(p, &end);
        if (*end != ',') throw UsageError("--replot: bad row '" + line + "'");
        p = end + 1;
        m.loss_std = std::strtod(p, &end);
        if (*end != ',') throw UsageError("--replot: bad row '" + line + "'");
        p = end + 1;
        m.cumulative_queries = std::strtoll(p, &end, 10);
        rows.push_back(m);
    }
    if (!header_seen || rows.empty()) throw UsageError("--replot: no data rows");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].iteration != static_cast<int>(i) + 1) {
            throw UsageError("--replot: iteration column must run 1..M");
        }
        if (i > 0 && rows[i].cumulative_queries < rows[i - 1].cumulative_queries) {
            throw UsageError("--replot: total_obs must be non-decreasing");
        }
    }

    double max_loss = 0.0;
    for (const IterationMetrics& m : rows) {
        max_loss = std::max(max_loss, std::fabs(m.mean_loss_vs_expert));
    }
    out << "iter  loss vs expert" << std::string(24, ' ') << "queries\n";
    for (const IterationMetrics& m : rows) {
        const int bar = max_loss > 0.0
                            ? static_cast<int>(std::lround(
                                  30.0 * std::fabs(m.mean_loss_vs_expert) / max_loss))
                            : 0;
        char head[64];
        std::snprintf(head, sizeof(head), "%4d  %+9.4f ", m.iteration, m.mean_loss_vs_expert);
        out << head << std::string(bar, '#') << std::string(31 - bar, ' ')
            << m.cumulative_queries << "\n";
    }
    return rows;
}

ExperimentConfig config_from_manifest(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw UsageError("--manifest: cannot open " + manifest_path);
    json j;
    in >> j;
    return config_from_json(j.at("config"));
}

std::string manifest_csv_hash(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw ContractError("cannot open " + manifest_path);
    json j;
    in >> j;
    return j.at("csv_hash").get<std::string>();
}

int cli_main(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
    ParsedCli parsed;
    try {
        parsed = parse_args(argv);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n\n" << usage_text();
        return 1;
    }
    for (const std::string& w : parsed.warnings) err << "warning: " << w << "\n";

    try {
        switch (parsed.mode) {
            case CliMode::Replot: {
                replot(parsed.replot_path, out);
                return 0;
            }
            case CliMode::Calibrate: {
                const CalibrationReport r = calibrate_thresholds(
                    parsed.config.env_name, parsed.config.seed, parsed.calibrate_variant,
                    parsed.config.policy_train, parsed.config.lossnet_train,
                    parsed.config.bootstrap_episodes);
                out << "calibration on " << parsed.config.env_name << " (seed "
                    << parsed.config.seed << ", "
                    << (parsed.calibrate_variant == LossVariant::Regression ? "regression"
                                                                            : "classifier")
                    << " variant, " << r.samples << " on-policy states)\n";
                out << "  l-hat     p50 " << fmt_double(r.lhat_p50) << "  p70 "
                    << fmt_double(r.lhat_p70) << "  p90 " << fmt_double(r.lhat_p90) << "\n";
                out << "  grad-norm p50 " << fmt_double(r.grad_p50) << "  p70 "
                    << fmt_double(r.grad_p70) << "  p90 " << fmt_double(r.grad_p90) << "\n";
                out << "suggested --tau " << fmt_double(r.tau) << " --epsilon "
                    << fmt_double(r.epsilon) << "\n";
                if (r.degenerate_lhat) out << "warning: l-hat distribution is degenerate\n";
                if (r.degenerate_grad) out << "warning: grad-norm distribution is degenerate\n";
                return 0;
            }
            case CliMode::Suite: {
                std::vector<ExperimentConfig> configs;
                for (const std::string& name : parsed.suite_strategies) {
                    ExperimentConfig c = parsed.config;
                    c.strategy.kind = *strategy_from_name(name);
                    autocalibrate(c, parsed, err);
                    configs.push_back(c);
                }
                const SuiteSummary s =
                    run_suite(configs, parsed.out_dir, parsed.dump_dataset, parsed.jobs);
                out << "wrote " << s.summary_path << "\n";
                bool any_failed = false;
                for (const SuiteRow& row : s.rows) {
                    if (!row.ok) {
                        any_failed = true;
                        err << "run failed: " << row.algorithm << ": " << row.error << "\n";
                    }
                }
                return any_failed ? 2 : 0;
            }
            case CliMode::Run: {
                ExperimentConfig c = parsed.config;
                autocalibrate(c, parsed, err);
                const RunArtifacts a = execute_run(c, parsed.out_dir, parsed.dump_dataset);
                const IterationMetrics& fin = a.result.final_metrics();
                out << "run " << strategy_name(c.strategy.kind) << " on " << c.env_name
                    << ": final loss vs expert " << fmt_double(fin.mean_loss_vs_expert)
                    << " +- " << fmt_double(fin.loss_std) << ", queries "
                    << fin.cumulative_queries << "\n";
                out << "artifacts in " << a.run_dir << " (csv hash " << a.csv_hash << ")\n";
                return 0;
            }
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "run failure: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

}  // namespace qgil
